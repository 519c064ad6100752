use serde::{Deserialize, Serialize};

use crate::error::InventoryError;

/// Mosca's migration-time parameters, all in years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMosca")]
pub struct MoscaParameters {
    /// How long the data must remain secure.
    pub x: f64,
    /// How long the migration takes.
    pub y: f64,
    /// Time until the threat materializes.
    pub z: f64,
}

#[derive(Deserialize)]
struct RawMosca {
    x: f64,
    y: f64,
    z: f64,
}

impl TryFrom<RawMosca> for MoscaParameters {
    type Error = InventoryError;

    fn try_from(r: RawMosca) -> Result<Self, Self::Error> {
        MoscaParameters::new(r.x, r.y, r.z)
    }
}

impl MoscaParameters {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, InventoryError> {
        for (name, value) in [("x", x), ("y", y), ("z", z)] {
            if !value.is_finite() || value < 0.0 {
                return Err(InventoryError::InvalidMosca { name, value });
            }
        }
        Ok(Self { x, y, z })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoscaOutcome {
    pub pass: bool,
    /// z - (x + y); positive exactly when the check passes.
    pub margin_years: f64,
}

/// Passes iff x + y < z.
pub fn mosca_check(p: &MoscaParameters) -> MoscaOutcome {
    let margin_years = p.z - (p.x + p.y);
    MoscaOutcome { pass: margin_years > 0.0, margin_years }
}
