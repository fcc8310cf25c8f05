use crate::error::{config, Result};
use serde::Serialize;

/// Reports the start of the last run of consecutive records on which a
/// condition held, once that run reaches `dwell` records.
#[derive(Debug, Clone, PartialEq)]
pub struct DwellDetector {
    dwell: usize,
    /// Only count runs that follow at least one record where the condition
    /// failed.
    needs_prior_failure: bool,
    seen_failure: bool,
    start: Option<f64>,
    count: usize,
    relapses: usize,
}

impl DwellDetector {
    pub fn new(dwell: usize, needs_prior_failure: bool) -> Self {
        Self {
            dwell: dwell.max(1),
            needs_prior_failure,
            seen_failure: false,
            start: None,
            count: 0,
            relapses: 0,
        }
    }

    pub fn update(&mut self, t: f64, holds: bool) {
        if !holds {
            if self.confirmed().is_some() {
                self.relapses += 1;
            }
            self.seen_failure = true;
            self.start = None;
            self.count = 0;
            return;
        }
        if self.needs_prior_failure && !self.seen_failure {
            return;
        }
        if self.start.is_none() {
            self.start = Some(t);
        }
        self.count += 1;
    }

    /// Start of the current run if it has lasted at least `dwell` records.
    pub fn confirmed(&self) -> Option<f64> {
        self.start.filter(|_| self.count >= self.dwell)
    }

    /// Number of times a confirmed run was later broken.
    pub fn relapses(&self) -> usize {
        self.relapses
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct VacuumEvents {
    /// First time after which `min ρ ≥ ρ₁` held to the end of the run.
    pub t0: Option<f64>,
    pub t0_relapses: usize,
    /// Time at which the vacuum set disappeared for good.
    pub t1: Option<f64>,
    pub t1_relapses: usize,
    pub rho1: f64,
    pub vacuum_threshold: f64,
}

/// Tracks the lower density bound `ρ₁` and the vacuum set over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct VacuumMonitor {
    rho1: f64,
    vacuum_threshold: f64,
    t0: DwellDetector,
    t1: DwellDetector,
}

impl VacuumMonitor {
    /// `rho1` must lie strictly between 0 and `inf ρ̄`.
    pub fn new(rho1: f64, rho_inf: f64, dwell: usize, vacuum_threshold: f64) -> Result<Self> {
        if !(rho1 > 0.0 && rho1 < rho_inf) {
            return Err(config(format!(
                "rho1 = {rho1} must satisfy 0 < rho1 < inf of the reference density ({rho_inf})"
            )));
        }
        if !(vacuum_threshold >= 0.0) {
            return Err(config(format!(
                "vacuum threshold must be nonnegative, got {vacuum_threshold}"
            )));
        }
        Ok(Self {
            rho1,
            vacuum_threshold,
            t0: DwellDetector::new(dwell, false),
            t1: DwellDetector::new(dwell, true),
        })
    }

    pub fn update(&mut self, t: f64, min_rho: f64) {
        self.t0.update(t, min_rho >= self.rho1);
        self.t1.update(t, min_rho > self.vacuum_threshold);
    }

    pub fn events(&self) -> VacuumEvents {
        VacuumEvents {
            t0: self.t0.confirmed(),
            t0_relapses: self.t0.relapses(),
            t1: self.t1.confirmed(),
            t1_relapses: self.t1.relapses(),
            rho1: self.rho1,
            vacuum_threshold: self.vacuum_threshold,
        }
    }
}
