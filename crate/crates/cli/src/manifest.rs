use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Result;
use vnet_core::io_util::write_atomic;

/// Everything needed to rerun a command: the resolved settings, the files it
/// read and wrote, and the tool version. Wall time is informational.
#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub settings: BTreeMap<String, String>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut out = String::from("# vnet-manifest=1\n");
        out.push_str(&format!("subcommand={}\n", self.subcommand));
        out.push_str(&format!("version={}\n", self.version));
        for (k, v) in &self.settings {
            out.push_str(&format!("{k}={v}\n"));
        }
        for p in &self.inputs {
            out.push_str(&format!("input={}\n", p.display()));
        }
        for p in &self.outputs {
            out.push_str(&format!("output={}\n", p.display()));
        }
        out.push_str(&format!("wall_time_s={:.3}\n", self.wall_time_s));
        out
    }

    /// `manifest-<subcommand>.txt` in `dir`.
    pub fn path_in(&self, dir: &Path) -> PathBuf {
        dir.join(format!("manifest-{}.txt", self.subcommand))
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let p = self.path_in(dir);
        write_atomic(&p, self.render().as_bytes())?;
        Ok(p)
    }
}
