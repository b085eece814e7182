use std::path::PathBuf;

use cspwb_core::caps::Caps;
use cspwb_core::error::Result;

#[derive(Clone, Debug, Default)]
pub struct WorkbenchConfig {
    pub caps: Caps,
    /// Base seed for every sampled check.
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub verbosity: u8,
}

impl WorkbenchConfig {
    /// Default settings with caps taken from `CSPWB_CAPS` when set.
    pub fn from_env(seed: u64, verbosity: u8) -> Result<WorkbenchConfig> {
        Ok(WorkbenchConfig { caps: Caps::from_env()?, seed, out_dir: None, verbosity })
    }
}
