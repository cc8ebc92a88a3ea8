//! Text container for trained parameters.
//!
//! ```text
//! # vnet-checkpoint=1
//! # meta <key>=<value>
//! # block name=<name> shape=<tag>:<dims> seed=<u64> step=<u64> len=<n>
//! <n values, one per line, 17 significant digits>
//! ```
//!
//! Shape tags: `mlp:5x64x64x32` (layer widths), `symmetric-matrix:32` (upper
//! triangle, row-major) and `vector:<n>`.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io_util::{fmt_f64, write_atomic};

pub const CHECKPOINT_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ShapeSpec {
    Mlp(Vec<usize>),
    SymmetricMatrix(usize),
    Vector(usize),
}

impl ShapeSpec {
    pub fn len(&self) -> usize {
        match self {
            ShapeSpec::Mlp(w) => w.windows(2).map(|w| w[0] * w[1] + w[1]).sum(),
            ShapeSpec::SymmetricMatrix(n) => n * (n + 1) / 2,
            ShapeSpec::Vector(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeSpec::Mlp(w) => {
                let dims: Vec<String> = w.iter().map(|d| d.to_string()).collect();
                write!(f, "mlp:{}", dims.join("x"))
            }
            ShapeSpec::SymmetricMatrix(n) => write!(f, "symmetric-matrix:{n}"),
            ShapeSpec::Vector(n) => write!(f, "vector:{n}"),
        }
    }
}

impl FromStr for ShapeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, dims) = s
            .split_once(':')
            .ok_or_else(|| Error::Invalid(format!("shape '{s}' lacks a tag")))?;
        let parse = |d: &str| {
            d.parse::<usize>()
                .map_err(|_| Error::Invalid(format!("bad dimension '{d}' in shape '{s}'")))
        };
        match tag {
            "mlp" => Ok(ShapeSpec::Mlp(dims.split('x').map(parse).collect::<Result<_>>()?)),
            "symmetric-matrix" => Ok(ShapeSpec::SymmetricMatrix(parse(dims)?)),
            "vector" => Ok(ShapeSpec::Vector(parse(dims)?)),
            other => Err(Error::Invalid(format!("unknown shape tag '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub name: String,
    pub shape: ShapeSpec,
    pub seed: u64,
    pub step: u64,
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checkpoint {
    pub meta: Vec<(String, String)>,
    pub blocks: Vec<Block>,
}

impl Checkpoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push_block(&mut self, block: Block) -> Result<()> {
        if block.data.len() != block.shape.len() {
            return Err(Error::Shape(format!(
                "block '{}' has {} values for shape {}",
                block.name,
                block.data.len(),
                block.shape
            )));
        }
        if self.block(&block.name).is_some() {
            return Err(Error::Invalid(format!("duplicate block '{}'", block.name)));
        }
        self.blocks.push(block);
        Ok(())
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn require(&self, name: &str) -> Result<&Block> {
        self.block(name)
            .ok_or_else(|| Error::Invalid(format!("checkpoint has no block '{name}'")))
    }

    pub fn render(&self) -> String {
        let mut out = format!("# vnet-checkpoint={CHECKPOINT_VERSION}\n");
        for (k, v) in &self.meta {
            out.push_str(&format!("# meta {k}={v}\n"));
        }
        for b in &self.blocks {
            out.push_str(&format!(
                "# block name={} shape={} seed={} step={} len={}\n",
                b.name,
                b.shape,
                b.seed,
                b.step,
                b.data.len()
            ));
            for v in &b.data {
                out.push_str(&fmt_f64(*v));
                out.push('\n');
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.render().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse { line, msg, .. } => Error::parse(path, line, msg),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut ck = Checkpoint::new();
        let mut lines = text.lines().enumerate();
        let err = |line: usize, msg: String| Error::parse("<checkpoint>", line + 1, msg);
        match lines.next() {
            Some((_, l)) if l.trim() == format!("# vnet-checkpoint={CHECKPOINT_VERSION}") => {}
            Some((_, l)) if l.trim().starts_with("# vnet-checkpoint=") => {
                return Err(Error::Version {
                    found: l.trim()["# vnet-checkpoint=".len()..].to_string(),
                    expected: CHECKPOINT_VERSION.to_string(),
                })
            }
            _ => return Err(err(0, "missing checkpoint header".into())),
        }
        let mut current: Option<(Block, usize)> = None;
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# meta ") {
                let (k, v) = rest
                    .split_once('=')
                    .ok_or_else(|| err(i, format!("bad meta line '{line}'")))?;
                ck.push_meta(k.trim(), v.trim());
            } else if let Some(rest) = line.strip_prefix("# block ") {
                if let Some((b, expected)) = current.take() {
                    if b.data.len() != expected {
                        return Err(err(i, format!("block '{}' truncated", b.name)));
                    }
                    ck.push_block(b)?;
                }
                let mut name = None;
                let mut shape = None;
                let mut seed = 0;
                let mut step = 0;
                let mut len = None;
                for tok in rest.split_whitespace() {
                    let (k, v) = tok
                        .split_once('=')
                        .ok_or_else(|| err(i, format!("bad block field '{tok}'")))?;
                    let num = |v: &str| v.parse::<u64>().map_err(|_| err(i, format!("bad number '{v}'")));
                    match k {
                        "name" => name = Some(v.to_string()),
                        "shape" => shape = Some(v.parse::<ShapeSpec>()?),
                        "seed" => seed = num(v)?,
                        "step" => step = num(v)?,
                        "len" => len = Some(num(v)? as usize),
                        _ => {}
                    }
                }
                let name = name.ok_or_else(|| err(i, "block without name".into()))?;
                let shape = shape.ok_or_else(|| err(i, "block without shape".into()))?;
                let expected = len.unwrap_or(shape.len());
                if expected != shape.len() {
                    return Err(err(i, format!("len {expected} disagrees with shape {shape}")));
                }
                current = Some((
                    Block {
                        name,
                        shape,
                        seed,
                        step,
                        data: Vec::with_capacity(expected),
                    },
                    expected,
                ));
            } else if line.starts_with('#') {
                continue;
            } else {
                let (b, expected) = current.as_mut().ok_or_else(|| err(i, "value outside a block".into()))?;
                if b.data.len() == *expected {
                    return Err(err(i, format!("too many values in block '{}'", b.name)));
                }
                let v: f64 = line.parse().map_err(|_| err(i, format!("bad value '{line}'")))?;
                b.data.push(v);
            }
        }
        if let Some((b, expected)) = current.take() {
            if b.data.len() != expected {
                return Err(Error::Invalid(format!("block '{}' truncated", b.name)));
            }
            ck.push_block(b)?;
        }
        Ok(ck)
    }
}
