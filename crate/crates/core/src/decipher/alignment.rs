use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// States of the edit machine.
pub const BASE: u32 = 0;
pub const AFTER_INS: u32 = 1;
pub const AFTER_DEL: u32 = 2;

/// Fixed probabilities of the three edit operations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentModel {
    pub sub: f64,
    pub ins: f64,
    pub del: f64,
}

impl Default for AlignmentModel {
    fn default() -> Self {
        AlignmentModel {
            sub: 0.9,
            ins: 0.05,
            del: 0.05,
        }
    }
}

impl AlignmentModel {
    pub fn new(sub: f64, ins: f64, del: f64) -> Result<Self> {
        let m = AlignmentModel { sub, ins, del };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.sub, self.ins, self.del].iter().all(|p| (0.0..=1.0).contains(p));
        if !ok || (self.sub + self.ins + self.del - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "alignment weights must be probabilities summing to 1, got {self:?}"
            )));
        }
        Ok(())
    }
}
