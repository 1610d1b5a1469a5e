//! The scale constants driving clusters, quadrilaterals and droplet sizes.

use crate::rational::{qi, Q};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropletConstants {
    pub c1: Q,
    pub c2_prime: Q,
    pub c2: Q,
    pub c3: Q,
    pub c4_prime: Q,
    pub c4: Q,
    /// Couples the renormalised droplet-size threshold to the vacancy
    /// density; lives on its own scale and is only required positive.
    pub c5: Q,
}

impl Default for DropletConstants {
    fn default() -> Self {
        DropletConstants {
            c1: qi(8),
            c2_prime: qi(16),
            c2: qi(32),
            c3: qi(96),
            c4_prime: qi(192),
            c4: qi(384),
            c5: qi(16),
        }
    }
}

impl DropletConstants {
    /// Reduced scale for randomised suites that need large droplets to fit
    /// in small windows. Valid for alpha = 1 only.
    pub fn small() -> DropletConstants {
        DropletConstants {
            c1: qi(1),
            c2_prime: qi(2),
            c2: qi(3),
            c3: qi(6),
            c4_prime: qi(8),
            c4: qi(12),
            c5: qi(16),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstantsError {
    #[error("constants must be positive")]
    NonPositive,
    #[error("constants must satisfy C1 < C2' < C2 < C3 < C4' < C4")]
    ChainViolated,
    #[error("(C3 - C2)/C2 must be at least alpha = {0}")]
    ClusterScaleTooSmall(u32),
}

impl DropletConstants {
    pub fn validate(&self, alpha: Option<u32>) -> Result<(), ConstantsError> {
        let all = [self.c1, self.c2_prime, self.c2, self.c3, self.c4_prime, self.c4, self.c5];
        if all.iter().any(|c| *c <= qi(0)) {
            return Err(ConstantsError::NonPositive);
        }
        let chain = [self.c1, self.c2_prime, self.c2, self.c3, self.c4_prime, self.c4];
        if chain.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConstantsError::ChainViolated);
        }
        if let Some(a) = alpha {
            if (self.c3 - self.c2) / self.c2 < qi(a as i128) {
                return Err(ConstantsError::ClusterScaleTooSmall(a));
            }
        }
        Ok(())
    }
}
