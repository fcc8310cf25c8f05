use super::{SimState, Stepper};
use crate::error::{numeric, Result};
use serde::Serialize;

/// Running mass budget of a simulation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MassLedger {
    pub initial_mass: f64,
    /// Cumulative net inflow through the boundaries.
    pub boundary_inflow: f64,
    /// Cumulative mass added by clipping.
    pub clipped_mass: f64,
    pub clipped_cells: usize,
    pub steps: usize,
    /// Largest relative balance residual seen at a record time.
    pub max_residual: f64,
}

impl MassLedger {
    /// `|M(t) − M(0) − inflow − clipped| / M(0)`.
    pub fn residual(&self, mass: f64) -> f64 {
        let expected = self.initial_mass + self.boundary_inflow + self.clipped_mass;
        (mass - expected).abs() / self.initial_mass.abs().max(f64::MIN_POSITIVE)
    }
}

/// Receives the state at every record time.
pub trait Observer {
    fn observe(&mut self, state: &SimState, ledger: &MassLedger) -> Result<()>;
}

/// Observer that ignores every record.
pub struct NullObserver;

impl Observer for NullObserver {
    fn observe(&mut self, _: &SimState, _: &MassLedger) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub ledger: MassLedger,
    pub records: usize,
}

/// Advances `state` to `t_final`, landing exactly on every multiple of
/// `record_dt` and on `t_final`, and hands each of those states to `observer`.
///
/// On error `state` holds the last successfully completed step.
pub fn run(
    stepper: &mut Stepper,
    state: &mut SimState,
    t_final: f64,
    record_dt: f64,
    observer: &mut dyn Observer,
) -> Result<RunOutcome> {
    let dx = stepper.grid.dx();
    let t_start = state.t;
    let mut ledger = MassLedger {
        initial_mass: state.mass(dx),
        ..MassLedger::default()
    };
    let mut records = 0usize;
    observer.observe(state, &ledger)?;
    records += 1;
    let mut k = 1u64;
    let (warn, fail) = (stepper.cfg.clip_warn, stepper.cfg.clip_error);
    while state.t < t_final {
        let target = (t_start + k as f64 * record_dt).min(t_final);
        let remaining = target - state.t;
        let mut dt = stepper.stable_dt(state);
        let landing = dt >= remaining * (1.0 - 1e-9);
        if landing {
            dt = remaining;
        } else if dt > 0.5 * remaining {
            // split the remainder so the last step is not a sliver
            dt = 0.5 * remaining;
        }
        if !(dt > 0.0) {
            return Err(numeric(format!("time step collapsed to {dt:e} at t = {}", state.t)));
        }
        let rep = stepper.step(state, dt)?;
        if landing {
            state.t = target;
        }
        ledger.steps += 1;
        ledger.boundary_inflow += rep.boundary_inflow;
        ledger.clipped_mass += rep.clipped_mass;
        ledger.clipped_cells += rep.clipped_cells;
        let scale = ledger.initial_mass.abs().max(f64::MIN_POSITIVE);
        if rep.clipped_mass > fail * scale {
            return Err(numeric(format!(
                "clipped mass {:e} in one step at t = {} exceeds the error threshold",
                rep.clipped_mass, state.t
            )));
        } else if rep.clipped_mass > warn * scale {
            log::warn!(
                "clipped mass {:e} ({} cells) at t = {}",
                rep.clipped_mass,
                rep.clipped_cells,
                state.t
            );
        }
        if landing {
            let res = ledger.residual(state.mass(dx));
            ledger.max_residual = ledger.max_residual.max(res);
            observer.observe(state, &ledger)?;
            records += 1;
            k += 1;
        }
    }
    Ok(RunOutcome { ledger, records })
}
