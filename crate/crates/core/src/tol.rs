//! Central numerical tolerances.
//!
//! Every module reads the same record, so loosening validation for noisy
//! experimental input happens in one place. The record is fixed on first
//! use: the CLI installs an override before any computation, and library
//! users who never call [`install`] get the defaults.

use std::sync::OnceLock;

/// Tolerance record read by all validation and comparison code.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Max entrywise deviation tolerated by Hermiticity, trace and
    /// unitarity checks.
    pub hermiticity: f64,
    /// Magnitude below zero tolerated for eigenvalues of nominally
    /// positive semidefinite matrices.
    pub psd: f64,
    /// General-purpose equality tolerance for scalar comparisons.
    pub equality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity: 1e-9,
            psd: 1e-10,
            equality: 1e-10,
        }
    }
}

static CURRENT: OnceLock<Tolerances> = OnceLock::new();

/// The tolerances in effect for this process.
pub fn current() -> Tolerances {
    *CURRENT.get_or_init(Tolerances::default)
}

/// Installs `tolerances` process-wide.
///
/// Returns false when the record was already fixed, either by an earlier
/// install or by a first read of [`current`]; the earlier record stays.
pub fn install(tolerances: Tolerances) -> bool {
    CURRENT.set(tolerances).is_ok()
}

/// Default tolerances loosened so that every field is at least `floor`.
///
/// This is what the CLI installs for noisy input: one knob raises the
/// Hermiticity, PSD and equality thresholds together without ever
/// tightening any of them below the defaults.
pub fn loosened(floor: f64) -> Tolerances {
    let base = Tolerances::default();
    Tolerances {
        hermiticity: base.hermiticity.max(floor),
        psd: base.psd.max(floor),
        equality: base.equality.max(floor),
    }
}
