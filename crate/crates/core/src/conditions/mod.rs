//! Sufficient and necessary optimality conditions for the canonical mechanisms.

mod batteries;
mod mm;
mod orthant;
mod probe;
mod regime;
mod report;

pub use batteries::{check_ad_tiered, check_good_only, check_mechanism, check_single_bundle, hinge_tail_min, BatteryOptions};
pub use mm::{check_mm, mm_grid_min, mm_value, MmResult, MM_TOL};
pub use orthant::{orthant, orthant_min, Orientation, OrthantMin};
pub use probe::{adversarial_probe, adversarial_probe_with, ProbeOptions, ProbeWitness};
pub use regime::{
    check_general_kappa_edges, classify_regime, classify_regime_uniform, EdgeSign, EdgeSignReport, RegimeLabel,
    REGIME_BOUNDARY_TOL,
};
pub use report::{verdict_of, ConditionItem, ConditionReport, Status, Verdict, Witness};
