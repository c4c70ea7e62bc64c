//! Occlusion ratio bins.
//!
//! Intervals are half-open on the right except heavy, which is closed at
//! 0.80; anything strictly above 0.80 is discarded.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OcclusionBin {
    None,
    Light,
    Partial,
    Moderate,
    Heavy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinOutcome {
    Bin(OcclusionBin),
    Discard,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("occlusion ratio {0} is outside [0, 1]")]
pub struct RatioOutOfRange(pub f64);

pub const LIGHT_START: f64 = 0.0;
pub const PARTIAL_START: f64 = 0.20;
pub const MODERATE_START: f64 = 0.40;
pub const HEAVY_START: f64 = 0.60;
pub const DISCARD_ABOVE: f64 = 0.80;

pub fn occlusion_bin(ratio: f64) -> Result<BinOutcome, RatioOutOfRange> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(RatioOutOfRange(ratio));
    }
    let bin = if ratio == 0.0 {
        OcclusionBin::None
    } else if ratio < PARTIAL_START {
        OcclusionBin::Light
    } else if ratio < MODERATE_START {
        OcclusionBin::Partial
    } else if ratio < HEAVY_START {
        OcclusionBin::Moderate
    } else if ratio <= DISCARD_ABOVE {
        OcclusionBin::Heavy
    } else {
        return Ok(BinOutcome::Discard);
    };
    Ok(BinOutcome::Bin(bin))
}

impl OcclusionBin {
    pub const ALL: [OcclusionBin; 5] = [
        OcclusionBin::None,
        OcclusionBin::Light,
        OcclusionBin::Partial,
        OcclusionBin::Moderate,
        OcclusionBin::Heavy,
    ];

    /// Domain name in the default occlusion shift.
    pub fn domain_name(self) -> &'static str {
        match self {
            OcclusionBin::None => "no occlusion",
            OcclusionBin::Light => "light occlusion",
            OcclusionBin::Partial => "partial occlusion",
            OcclusionBin::Moderate => "moderate occlusion",
            OcclusionBin::Heavy => "heavy occlusion",
        }
    }

    pub fn from_domain(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.domain_name() == name)
    }

    /// Closed range of ratios owned by this bin (endpoint ownership aside).
    pub fn bounds(self) -> (f64, f64) {
        match self {
            OcclusionBin::None => (0.0, 0.0),
            OcclusionBin::Light => (LIGHT_START, PARTIAL_START),
            OcclusionBin::Partial => (PARTIAL_START, MODERATE_START),
            OcclusionBin::Moderate => (MODERATE_START, HEAVY_START),
            OcclusionBin::Heavy => (HEAVY_START, DISCARD_ABOVE),
        }
    }

    pub fn contains(self, ratio: f64) -> bool {
        occlusion_bin(ratio) == Ok(BinOutcome::Bin(self))
    }
}

impl std::fmt::Display for OcclusionBin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.domain_name())
    }
}
