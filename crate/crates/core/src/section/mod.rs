//! Poincaré sections: charts in symplectic coordinates `(y, eta)`, the first
//! return map between them, its block partition and fitted generating
//! functions.

mod chart;
mod genfun;
mod returns;

pub use chart::{build_sections, build_sections_with, Ellipse, Embedding, SectionChart, SectionParams};
pub use genfun::{fit_generating_function, BlockSample, GeneratingFunction};
pub use returns::{first_return, partition_blocks, return_jacobian, PartitionParams, Return, ReturnBlock, ReturnMapData};

use crate::error::Result;

impl ReturnMapData {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
