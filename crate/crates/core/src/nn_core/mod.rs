//! Pseudo-orbital network, Adam with a cosine schedule, and checkpoints.

mod adam;
pub mod checkpoint;
mod mlp;

pub use adam::{AdamState, DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_EPS};
pub use checkpoint::{Block, Checkpoint, ShapeSpec};
pub use mlp::{sigmoid, silu, silu_grad, ForwardCache, OrbitalNet};

use crate::error::Result;

impl OrbitalNet {
    pub fn to_block(&self, name: &str, step: u64) -> Block {
        Block {
            name: name.to_string(),
            shape: ShapeSpec::Mlp(self.widths().to_vec()),
            seed: self.seed(),
            step,
            data: self.params().to_vec(),
        }
    }

    pub fn from_block(block: &Block) -> Result<Self> {
        match &block.shape {
            ShapeSpec::Mlp(widths) => OrbitalNet::from_parts(widths.clone(), block.data.clone(), block.seed),
            other => Err(crate::Error::Shape(format!(
                "block '{}' has shape {other}, expected an mlp",
                block.name
            ))),
        }
    }
}
