//! Functionals, identities and probes evaluated on simulation output.

mod blowup;
mod functionals;
mod monitor;
mod paths;
mod record;
mod weak;

pub use blowup::{blowup_indicator, BlowupReport};
pub use functionals::{
    bd_functional, bd_gradient, dissipation_rate, energy_functional, gap_norms, lambda_field,
    lambda_identity_residual, mass, source_terms, third_moment, ux_sup, vacuum_stats, BdValue,
    DissipationTerms, Frame, GapNorms, LambdaField, VacuumStats,
};
pub use monitor::{DwellDetector, VacuumEvents, VacuumMonitor};
pub use paths::{particle_path, PathResult, VelocityTable};
pub use record::{BalanceRecord, DiagConfig, FunctionalRecord, Recorder, RunSummary};
pub use weak::{weak_form_residual, BumpValue, SpaceTimeBump, WeakResidual};
