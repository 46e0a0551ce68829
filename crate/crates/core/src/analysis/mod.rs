//! Sweeps, scaling fits and estimators for the quantities behind the
//! routing bounds.

mod estimators;
mod fit;
mod replay;
mod sweep;

pub use estimators::{
    annulus_count, annulus_shortcut_profile, cell_occupancy, dyadic_radii, estimate_cdelta_shortcut_probability,
    estimate_hit_probability, expected_empty_cells, lemma1_cell_occupancy, local_connectivity, nodes_in_bracket,
    sample_property_pn, shortcut_length_survival, shortcut_lengths, Connectivity, DiscHitEstimate, HitEstimate,
    LengthSurvival,
};
pub use fit::{fit_points, fit_scaling, FitModel, FitReport, MIN_FIT_POINTS};
pub use replay::{validate_route, RouteViolation};
pub use sweep::{
    lower_bound_threshold, read_csv, run_sweep, summarize, write_csv, GridSummary, HopBudget, PhaseStats, RecordStatus,
    SweepConfig, SweepOutcome, SweepRecord, CSV_HEADER,
};
