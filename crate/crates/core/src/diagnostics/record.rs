use super::functionals::*;
use super::monitor::{VacuumEvents, VacuumMonitor};
use crate::background::Background;
use crate::error::{config, Result};
use crate::gas::GasParams;
use crate::grid::Grid1D;
use crate::solver::{MassLedger, Observer, SimState};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagConfig {
    /// Exponent of the `lp_gap` column.
    pub lp: f64,
    /// Lower density bound for the `T₀` detector; defaults to `½ inf ρ̄`.
    pub rho1: Option<f64>,
    /// Consecutive records a detector condition must hold.
    pub dwell: usize,
    /// Density at or below which a cell counts as vacuum for `T₁`;
    /// defaults to the solver's velocity floor.
    pub vacuum_threshold: Option<f64>,
    /// Keep every `snapshot_every`-th record inside
    /// `[snapshot_start, snapshot_end]` for post-hoc analysis.
    pub snapshot_every: usize,
    pub snapshot_start: f64,
    pub snapshot_end: f64,
    /// Times at which full-resolution states are written.
    pub output_times: Vec<f64>,
    /// Support `[c − h, c + h]` of the bump used for the Λ identity check.
    pub probe_center: f64,
    pub probe_half_width: f64,
}

impl Default for DiagConfig {
    fn default() -> Self {
        Self {
            lp: 4.0,
            rho1: None,
            dwell: 5,
            vacuum_threshold: None,
            snapshot_every: 1,
            snapshot_start: 0.0,
            snapshot_end: 10.0,
            output_times: vec![0.0, 50.0, 100.0, 200.0],
            probe_center: 0.0,
            probe_half_width: 20.0,
        }
    }
}

impl DiagConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lp >= 1.0 && self.lp.is_finite()) {
            return Err(config(format!("lp must be finite and >= 1, got {}", self.lp)));
        }
        if self.dwell == 0 || self.snapshot_every == 0 {
            return Err(config("dwell and snapshot_every must be at least 1"));
        }
        if !(self.probe_half_width > 0.0) {
            return Err(config("probe_half_width must be positive"));
        }
        if self.snapshot_end < self.snapshot_start {
            return Err(config("snapshot_end must not precede snapshot_start"));
        }
        Ok(())
    }
}

/// One row of `functionals.csv`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FunctionalRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub bd_energy: f64,
    pub diss_cum: f64,
    pub sup_gap: f64,
    pub l2_gap: f64,
    pub lp_gap: f64,
    pub min_rho: f64,
    pub max_rho: f64,
    pub vac_measure: f64,
    pub m3: f64,
    pub bd_grad: f64,
    pub lambda_l2: f64,
    pub ux_sup: f64,
    pub blowup_cum: f64,
    pub l2_ugap: f64,
}

impl FunctionalRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.mass,
            self.energy,
            self.bd_energy,
            self.diss_cum,
            self.sup_gap,
            self.l2_gap,
            self.lp_gap,
            self.min_rho,
            self.max_rho,
            self.vac_measure,
            self.m3,
            self.bd_grad,
            self.lambda_l2,
            self.ux_sup,
            self.blowup_cum,
            self.l2_ugap,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// One row of `balance.csv`: the terms of the combined energy/BD identity
/// `d/dt[α·bd_energy + energy] + D = I₁ + … + I₆`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BalanceRecord {
    pub t: f64,
    pub d_pressure: f64,
    pub d_kinetic: f64,
    pub d_viscous: f64,
    pub d_grad_alpha: f64,
    pub d_grad_theta: f64,
    /// Weighted dissipation `D` whose running integral is `diss_cum`.
    pub diss_rate: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub i5: f64,
    pub i6: f64,
    pub src_rate: f64,
    pub src_cum: f64,
    /// `α·bd_energy + energy`.
    pub combined: f64,
    /// `combined(0) + src_cum − combined − diss_cum`.
    pub margin: f64,
    pub m3_weighted: f64,
    pub lambda_cum: f64,
    pub lambda_identity: f64,
    pub bd_excluded: usize,
    pub clipped_mass: f64,
    pub mass_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub records: usize,
    pub t_final: f64,
    pub vacuum: VacuumEvents,
    pub energy_initial: f64,
    pub bd_energy_initial: f64,
    pub sup_gap_initial: f64,
    pub sup_gap_final: f64,
    pub sup_gap_ratio: f64,
    /// Largest `sup_gap(t)/sup_gap(0)`.
    pub sup_gap_peak_ratio: f64,
    /// `min_t margin(t)` of the combined identity.
    pub balance_margin: f64,
    /// `combined(0) + max_t src_cum − max_t[combined + diss_cum]`.
    pub balance_margin_sup: f64,
    /// `bd_energy(0) + energy(0) + src_cum(T) − max_t bd_energy − diss_cum(T)`.
    pub balance_margin_literal: f64,
    /// `max_t [m3/(1+ln(1+t))] / m3(0)`.
    pub m3_envelope_ratio: f64,
    pub lambda_cum: f64,
    pub bd_grad_max: f64,
    pub max_bd_excluded: usize,
    pub nonfinite_records: usize,
    pub negative_energy_records: usize,
    pub mass: MassLedger,
}

/// Observer that evaluates every functional at each record time and keeps
/// the snapshots requested by its [`DiagConfig`].
pub struct Recorder<'a> {
    grid: Grid1D,
    xs: Vec<f64>,
    gas: GasParams,
    bg: &'a dyn Background,
    u_floor: f64,
    cfg: DiagConfig,
    monitor: VacuumMonitor,
    pub functionals: Vec<FunctionalRecord>,
    pub balance: Vec<BalanceRecord>,
    pub snapshots: Vec<SimState>,
    /// States at `output_times`, in order.
    pub states: Vec<SimState>,
    next_output: usize,
    ledger: MassLedger,
}

impl<'a> Recorder<'a> {
    pub fn new(
        grid: Grid1D,
        gas: GasParams,
        bg: &'a dyn Background,
        u_floor: f64,
        cfg: DiagConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let rho1 = cfg.rho1.unwrap_or(0.5 * bg.rho_inf());
        let monitor = VacuumMonitor::new(
            rho1,
            bg.rho_inf(),
            cfg.dwell,
            cfg.vacuum_threshold.unwrap_or(u_floor),
        )?;
        let mut cfg = cfg;
        cfg.output_times.sort_by(f64::total_cmp);
        Ok(Self {
            grid,
            xs: grid.centers(),
            gas,
            bg,
            u_floor,
            cfg,
            monitor,
            functionals: Vec::new(),
            balance: Vec::new(),
            snapshots: Vec::new(),
            states: Vec::new(),
            next_output: 0,
            ledger: MassLedger::default(),
        })
    }

    pub fn events(&self) -> VacuumEvents {
        self.monitor.events()
    }

    pub fn summary(&self) -> RunSummary {
        let f = &self.functionals;
        let b = &self.balance;
        let first = f.first().copied().unwrap_or_default();
        let last = f.last().copied().unwrap_or_default();
        let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::NAN };
        let peak = f.iter().map(|r| r.sup_gap).fold(0.0, f64::max);
        let env = f
            .iter()
            .map(|r| r.m3 / (1.0 + r.t.ln_1p()))
            .fold(0.0, f64::max);
        let lhs = b
            .iter()
            .zip(f)
            .map(|(b, f)| b.combined + f.diss_cum)
            .fold(f64::NEG_INFINITY, f64::max);
        let src_max = b.iter().map(|b| b.src_cum).fold(f64::NEG_INFINITY, f64::max);
        let c0 = b.first().map(|b| b.combined).unwrap_or(0.0);
        let bd_max = f.iter().map(|r| r.bd_energy).fold(f64::NEG_INFINITY, f64::max);
        let literal = first.bd_energy + first.energy + b.last().map(|b| b.src_cum).unwrap_or(0.0)
            - bd_max
            - last.diss_cum;
        RunSummary {
            records: f.len(),
            t_final: last.t,
            vacuum: self.monitor.events(),
            energy_initial: first.energy,
            bd_energy_initial: first.bd_energy,
            sup_gap_initial: first.sup_gap,
            sup_gap_final: last.sup_gap,
            sup_gap_ratio: ratio(last.sup_gap, first.sup_gap),
            sup_gap_peak_ratio: ratio(peak, first.sup_gap),
            balance_margin: b.iter().map(|b| b.margin).fold(f64::INFINITY, f64::min),
            balance_margin_sup: c0 + src_max - lhs,
            balance_margin_literal: literal,
            m3_envelope_ratio: ratio(env, first.m3),
            lambda_cum: b.last().map(|b| b.lambda_cum).unwrap_or(0.0),
            bd_grad_max: f.iter().map(|r| r.bd_grad).fold(0.0, f64::max),
            max_bd_excluded: b.iter().map(|b| b.bd_excluded).max().unwrap_or(0),
            nonfinite_records: f.iter().filter(|r| !r.is_finite()).count(),
            negative_energy_records: f
                .iter()
                .filter(|r| r.energy < 0.0 || r.bd_energy < 0.0)
                .count(),
            mass: self.ledger,
        }
    }

    fn probe(&self, x: f64) -> (f64, f64) {
        let h = self.cfg.probe_half_width;
        let z = (x - self.cfg.probe_center) / h;
        if z.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let s = 1.0 - z * z;
        let b = (-1.0 / s).exp();
        (b, b * (-2.0 * z / (s * s)) / h)
    }
}

impl Observer for Recorder<'_> {
    fn observe(&mut self, state: &SimState, ledger: &MassLedger) -> Result<()> {
        let t = state.t;
        let wave = self.bg.field(t, &self.xs)?;
        let dx = self.grid.dx();
        let f = Frame::new(&self.xs, dx, &state.rho, &state.m, &wave, self.gas, self.u_floor)?;
        let energy = energy_functional(&f);
        let bd = bd_functional(&f);
        let diss = dissipation_rate(&f);
        let src = source_terms(&f);
        let (m3, m3w) = third_moment(&f);
        let lam = lambda_field(&f);
        let gaps = gap_norms(&f, self.cfg.lp)?;
        let vac = vacuum_stats(&f);
        let ux = ux_sup(&f);
        let diss_rate = diss.weighted(&self.gas);
        let src_rate: f64 = src.iter().sum();
        let combined = self.gas.alpha * bd.value + energy;

        let (mut diss_cum, mut blowup_cum, mut src_cum, mut lambda_cum) = (0.0, 0.0, 0.0, 0.0);
        if let (Some(pf), Some(pb)) = (self.functionals.last(), self.balance.last()) {
            let h = t - pf.t;
            diss_cum = pf.diss_cum + 0.5 * h * (pb.diss_rate + diss_rate);
            blowup_cum = pf.blowup_cum + 0.5 * h * (pf.ux_sup + ux);
            src_cum = pb.src_cum + 0.5 * h * (pb.src_rate + src_rate);
            lambda_cum = pb.lambda_cum + 0.5 * h * (pf.lambda_l2 + lam.l2_sq);
        }
        let combined0 = self.balance.first().map(|b| b.combined).unwrap_or(combined);

        self.functionals.push(FunctionalRecord {
            t,
            mass: mass(&f),
            energy,
            bd_energy: bd.value,
            diss_cum,
            sup_gap: gaps.sup,
            l2_gap: gaps.l2,
            lp_gap: gaps.lp,
            min_rho: vac.min_rho,
            max_rho: vac.max_rho,
            vac_measure: vac.vac_measure,
            m3,
            bd_grad: bd_gradient(&f),
            lambda_l2: lam.l2_sq,
            ux_sup: ux,
            blowup_cum,
            l2_ugap: gaps.l2_u,
        });
        self.balance.push(BalanceRecord {
            t,
            d_pressure: diss.pressure,
            d_kinetic: diss.kinetic,
            d_viscous: diss.viscous,
            d_grad_alpha: diss.grad_alpha,
            d_grad_theta: diss.grad_theta,
            diss_rate,
            i1: src[0],
            i2: src[1],
            i3: src[2],
            i4: src[3],
            i5: src[4],
            i6: src[5],
            src_rate,
            src_cum,
            combined,
            margin: combined0 + src_cum - combined - diss_cum,
            m3_weighted: m3w,
            lambda_cum,
            lambda_identity: lambda_identity_residual(&f, |x| self.probe(x)),
            bd_excluded: bd.excluded,
            clipped_mass: ledger.clipped_mass,
            mass_residual: ledger.residual(state.rho.iter().sum::<f64>() * dx),
        });
        self.monitor.update(t, vac.min_rho);
        self.ledger = *ledger;

        let k = self.functionals.len() - 1;
        let tol = 1e-9 * t.abs().max(1.0);
        if t >= self.cfg.snapshot_start - tol
            && t <= self.cfg.snapshot_end + tol
            && k % self.cfg.snapshot_every == 0
        {
            self.snapshots.push(state.clone());
        }
        while self.next_output < self.cfg.output_times.len()
            && self.cfg.output_times[self.next_output] <= t + tol
        {
            if self.states.last().map(|s| s.t) != Some(t) {
                self.states.push(state.clone());
            }
            self.next_output += 1;
        }
        Ok(())
    }
}
