use super::config::RunConfig;
use super::io::{self, FAILED_MARKER};
use crate::background::Background;
use crate::diagnostics::{
    blowup_indicator, particle_path, weak_form_residual, BalanceRecord, FunctionalRecord, Recorder,
    RunSummary, VelocityTable,
};
use crate::error::{config, Error, Result};
use crate::grid::Grid1D;
use crate::initdata::{perturbation_support, regularize, InitialData};
use crate::rarefaction::{rate_report, WaveProfile};
use crate::solver::{check_domain_margin, eps_compat, run, SimState, Stepper};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Quantities derived from the config that the run actually used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub u_minus: f64,
    pub u_plus: f64,
    pub u_floor: f64,
    pub dx: f64,
    pub eps_compat: Option<bool>,
    /// Interval where the initial state departs from the reference.
    pub perturbation_support: Option<(f64, f64)>,
    pub regularized_min_rho: Option<f64>,
}

#[derive(Serialize)]
struct RunReport<'a> {
    status: &'static str,
    error: Option<String>,
    resolved: &'a Resolved,
    summary: &'a RunSummary,
}

#[derive(Serialize)]
struct StateRow {
    x: f64,
    rho: f64,
    m: f64,
    u: f64,
    rho_bar: f64,
    u_bar: f64,
}

/// `state_t<t>.csv`, with `t` printed to three decimals.
pub fn state_file_name(t: f64) -> String {
    format!("state_t{t:.3}.csv")
}

/// Everything a finished or aborted run produced, held in memory.
pub struct RunArtifacts {
    pub grid: Grid1D,
    pub resolved: Resolved,
    pub functionals: Vec<FunctionalRecord>,
    pub balance: Vec<BalanceRecord>,
    pub snapshots: Vec<SimState>,
    pub states: Vec<SimState>,
    pub summary: RunSummary,
    /// Solver abort, if any; the series stop at the last good record.
    pub error: Option<Error>,
}

/// Sets up and runs one simulation without touching the file system.
/// Configuration problems are returned as errors; a solver abort is carried
/// in [`RunArtifacts::error`] next to the records gathered so far.
pub fn simulate(cfg: &RunConfig, allow_eps_violation: bool) -> Result<RunArtifacts> {
    cfg.validate()?;
    let bg = cfg.background()?;
    let bg: &dyn Background = &*bg;
    let gas = cfg.gas;
    let t_final = cfg.scheme.t_final;
    let data = cfg.initial_data(bg)?;

    let mut compat = None;
    let mut reg_min = None;
    let state = if gas.eps > 0.0 {
        let ok = eps_compat(gas.eps, t_final)?;
        compat = Some(ok);
        if !ok {
            if !allow_eps_violation {
                return Err(config(format!(
                    "eps = {} and t_final = {t_final} violate sqrt(eps)·ln(1+T) <= eps^(1/4); \
                     pass --allow-eps-violation to run anyway",
                    gas.eps
                )));
            }
            log::warn!("running with eps = {} outside the compatible horizon", gas.eps);
        }
        let r = regularize(&data, gas.eps, cfg.init.mollify_radius, bg, &gas)?;
        reg_min = Some(r.min_rho);
        SimState::from_regularized(&r)
    } else {
        SimState::from_initial(&data)
    };
    let start = InitialData::new(cfg.grid, state.rho.clone(), state.m.clone())?;
    let support = perturbation_support(&start, bg, cfg.init.support_tol)?;
    check_domain_margin(&cfg.grid, bg, t_final, support)?;

    let (u_minus, u_plus) = cfg.end_velocities()?;
    let u_floor = cfg.scheme.resolved_u_floor(bg);
    let resolved = Resolved {
        u_minus,
        u_plus,
        u_floor,
        dx: cfg.grid.dx(),
        eps_compat: compat,
        perturbation_support: support,
        regularized_min_rho: reg_min,
    };

    let mut stepper = Stepper::new(cfg.grid, gas, cfg.scheme.clone(), bg, None)?;
    let mut rec = Recorder::new(cfg.grid, gas, bg, u_floor, cfg.diag.clone())?;
    let mut s = state;
    let error = run(&mut stepper, &mut s, t_final, cfg.scheme.record_dt, &mut rec).err();
    let summary = rec.summary();
    Ok(RunArtifacts {
        grid: cfg.grid,
        resolved,
        functionals: rec.functionals,
        balance: rec.balance,
        snapshots: rec.snapshots,
        states: rec.states,
        summary,
        error,
    })
}

/// Runs one simulation into `dir`. Configuration problems are reported before
/// anything is written; a solver abort leaves the partial outputs behind next
/// to a `FAILED` marker.
pub fn cmd_run(cfg: &RunConfig, dir: &Path, allow_eps_violation: bool) -> Result<RunSummary> {
    let art = simulate(cfg, allow_eps_violation)?;
    io::create_dir(dir)?;
    let marker = dir.join(FAILED_MARKER);
    if marker.exists() {
        std::fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
    }
    io::write_json(&dir.join("config.json"), cfg)?;
    let bg = cfg.background()?;
    let written = write_run_outputs(dir, &*bg, &art);
    match art.error {
        None => {
            written?;
            Ok(art.summary)
        }
        Some(e) => {
            if let Err(w) = written {
                log::error!("could not write partial outputs: {w}");
            }
            io::write_text(&marker, &format!("{e}\n"))?;
            Err(e)
        }
    }
}

fn write_run_outputs(dir: &Path, bg: &dyn Background, art: &RunArtifacts) -> Result<()> {
    let grid = &art.grid;
    io::write_csv(&dir.join("functionals.csv"), &art.functionals)?;
    io::write_csv(&dir.join("balance.csv"), &art.balance)?;
    io::write_snapshots(&dir.join("snapshots.csv"), grid, &art.snapshots)?;
    let xs = grid.centers();
    let u_floor = art.resolved.u_floor;
    for s in &art.states {
        let wave = bg.field(s.t, &xs)?;
        let rows: Vec<StateRow> = (0..grid.n)
            .map(|i| StateRow {
                x: xs[i],
                rho: s.rho[i],
                m: s.m[i],
                u: if s.rho[i] > u_floor { s.m[i] / s.rho[i] } else { f64::NAN },
                rho_bar: wave[i].rho,
                u_bar: wave[i].u,
            })
            .collect();
        io::write_csv(&dir.join(state_file_name(s.t)), &rows)?;
    }
    let report = RunReport {
        status: if art.error.is_some() { "failed" } else { "ok" },
        error: art.error.as_ref().map(|e| e.to_string()),
        resolved: &art.resolved,
        summary: &art.summary,
    };
    io::write_json(&dir.join("summary.json"), &report)
}

#[derive(Serialize)]
struct WaveRow {
    x: f64,
    rho: f64,
    u: f64,
    rho_x: f64,
    u_x: f64,
    rho_xx: f64,
    u_xx: f64,
    rho_t: f64,
    u_t: f64,
}

#[derive(Serialize)]
struct WaveReport {
    gamma: f64,
    rho_minus: f64,
    rho_plus: f64,
    u_minus: f64,
    u_plus: f64,
    w_minus: f64,
    w_plus: f64,
    sigma2: f64,
    q: f64,
    eta: f64,
    kq: f64,
    /// Norm exponent of `rates.csv`, `null` for the sup norm.
    rate_p: Option<f64>,
    /// Fitted slopes of `ρ̄_x, ū_x, ρ̄_xx, ū_xx` against `ln(1+t)`.
    rate_exponents: [f64; 4],
}

/// `wave_t<t>.csv`, with `t` printed to three decimals.
pub fn wave_file_name(t: f64) -> String {
    format!("wave_t{t:.3}.csv")
}

/// Sample points past the grid ends, doubling the distance until the wave
/// sits within `1e-10` of its end states, so profile files reach them.
fn far_field(wp: &WaveProfile, t: f64, grid: &Grid1D) -> Result<(Vec<f64>, Vec<f64>)> {
    let span = grid.x_right - grid.x_left;
    let settled = |x: f64, rho: f64, u: f64| -> Result<bool> {
        let (r, v) = wp.wave_state(t, x)?;
        Ok((r - rho).abs() <= 1e-10 && (v - u).abs() <= 1e-10)
    };
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for k in 0..64 {
        let x = grid.x_left - span * 2f64.powi(k);
        left.push(x);
        if settled(x, wp.rho_minus, wp.u_minus)? {
            break;
        }
    }
    for k in 0..64 {
        let x = grid.x_right + span * 2f64.powi(k);
        right.push(x);
        if settled(x, wp.rho_plus, wp.u_plus)? {
            break;
        }
    }
    left.reverse();
    Ok((left, right))
}

/// Writes wave profiles on the configured grid plus far-field end points,
/// `rates.csv` and `wave.json`.
pub fn cmd_wave(cfg: &RunConfig, dir: &Path) -> Result<()> {
    cfg.gas.validate()?;
    cfg.grid.validate()?;
    let wp = cfg.wave_profile()?;
    let p = match cfg.output.rate_p {
        p if p == 0.0 => f64::INFINITY,
        p => p,
    };
    let rates = rate_report(&wp, p, &cfg.output.rate_times)?;
    io::create_dir(dir)?;
    for &t in &cfg.output.wave_times {
        let (mut xs, right) = far_field(&wp, t, &cfg.grid)?;
        xs.extend(cfg.grid.centers());
        xs.extend(right);
        let rows: Vec<WaveRow> = wp
            .wave_field(t, &xs)?
            .iter()
            .zip(&xs)
            .map(|(w, &x)| WaveRow {
                x,
                rho: w.rho,
                u: w.u,
                rho_x: w.rho_x,
                u_x: w.u_x,
                rho_xx: w.rho_xx,
                u_xx: w.u_xx,
                rho_t: w.rho_t,
                u_t: w.u_t,
            })
            .collect();
        io::write_csv(&dir.join(wave_file_name(t)), &rows)?;
    }
    io::write_csv_with_header(
        &dir.join("rates.csv"),
        &["t", "rho_x", "u_x", "rho_xx", "u_xx", "u_xx_sup", "u_xx_sup_cum"],
        &rates.rows,
    )?;
    io::write_json(
        &dir.join("wave.json"),
        &WaveReport {
            gamma: wp.gas.gamma,
            rho_minus: wp.rho_minus,
            rho_plus: wp.rho_plus,
            u_minus: wp.u_minus,
            u_plus: wp.u_plus,
            w_minus: wp.w_minus,
            w_plus: wp.w_plus,
            sigma2: wp.sigma2,
            q: wp.q,
            eta: wp.eta,
            kq: wp.kq,
            rate_p: p.is_finite().then_some(p),
            rate_exponents: rates.exponents,
        },
    )
}

#[derive(Serialize)]
struct WeakRow {
    run: String,
    n: usize,
    dx: f64,
    t1: f64,
    t2: f64,
    mass: f64,
    momentum: f64,
    mass_scale: f64,
    momentum_scale: f64,
    /// Residual of the previous run divided by this one.
    mass_ratio: Option<f64>,
    momentum_ratio: Option<f64>,
}

#[derive(Serialize)]
struct PathPointRow<'a> {
    run: &'a str,
    x_seed: f64,
    s: f64,
    x: f64,
}

#[derive(Serialize)]
struct PathRow {
    run: String,
    n: usize,
    x_seed: f64,
    t_from: f64,
    t_to: f64,
    stretch: f64,
    rho_seed: f64,
    rho_foot: f64,
    defect: f64,
    truncated: bool,
    defect_ratio: Option<f64>,
}

#[derive(Serialize)]
struct BlowupRow<'a> {
    run: &'a str,
    n: usize,
    t: f64,
    ux_sup: f64,
    cumulative: f64,
}

#[derive(Serialize)]
struct WindowRow {
    run: String,
    n: usize,
    t_start: f64,
    eta: f64,
    window: f64,
    window_ratio: Option<f64>,
}

struct DiagRun {
    label: String,
    n: usize,
    dx: f64,
    weak: crate::diagnostics::WeakResidual,
    paths: Vec<crate::diagnostics::PathResult>,
    series: Vec<(f64, f64, f64)>,
    window: Option<(f64, f64, f64)>,
}

fn run_label(dir: &Path) -> String {
    dir.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

fn analyse(dir: &Path, post_override: Option<&RunConfig>, overrides: &[String]) -> Result<DiagRun> {
    let marker = dir.join(FAILED_MARKER);
    if marker.exists() {
        return Err(config(format!("{} is marked FAILED", dir.display())));
    }
    let mut cfg: RunConfig = io::read_json(&dir.join("config.json"))?;
    if let Some(c) = post_override {
        cfg.post = c.post.clone();
    }
    let cfg = cfg.with_overrides(overrides)?;
    let post = &cfg.post;
    let bg = cfg.background()?;
    let bg: &dyn Background = &*bg;
    let u_floor = cfg.scheme.resolved_u_floor(bg);
    let snaps = io::read_snapshots(&dir.join("snapshots.csv"), &cfg.grid)?;
    if snaps.is_empty() {
        return Err(config(format!("{} holds no snapshots", dir.display())));
    }
    let (s_lo, s_hi) = (snaps[0].t, snaps[snaps.len() - 1].t);
    for (what, a, b) in [
        ("weak-form window", post.t1, post.t2),
        ("path interval", post.path_t_from, post.path_t_to),
    ] {
        if a < s_lo - 1e-9 || b > s_hi + 1e-9 {
            return Err(config(format!(
                "{what} [{a}, {b}] is not covered by the stored snapshots [{s_lo}, {s_hi}] of {}; \
                 widen diag.snapshot_start/snapshot_end",
                dir.display()
            )));
        }
    }
    let weak = weak_form_residual(&cfg.grid, &snaps, bg, cfg.gas, u_floor, &post.test, post.t1, post.t2)?;
    let table = VelocityTable::new(cfg.grid, &snaps, bg, cfg.gas, u_floor)?;
    let paths = post
        .seeds
        .iter()
        .map(|&x| particle_path(&table, x, post.path_t_from, post.path_t_to, post.substeps))
        .collect::<Result<Vec<_>>>()?;

    let funcs = io::read_functionals(&dir.join("functionals.csv"))?;
    let t: Vec<f64> = funcs.iter().map(|f| f.t).collect();
    let ux: Vec<f64> = funcs.iter().map(|f| f.ux_sup).collect();
    let summary: serde_json::Value = io::read_json(&dir.join("summary.json"))?;
    let start = post
        .blowup_start
        .or_else(|| summary["summary"]["vacuum"]["t1"].as_f64());
    let (series, window) = if t.len() >= 2 {
        let cum = blowup_indicator(&t, &ux, t[0], t[t.len() - 1] - t[0])?.cumulative;
        let series = cum.iter().zip(&ux).map(|(&(t, c), &u)| (t, u, c)).collect();
        let window = match start {
            Some(s) => {
                let r = blowup_indicator(&t, &ux, s, post.blowup_eta)?;
                Some((s, post.blowup_eta, r.window))
            }
            None => {
                log::warn!("{}: no vacuum-vanishing time detected, blow-up window skipped", dir.display());
                None
            }
        };
        (series, window)
    } else {
        (Vec::new(), None)
    };
    Ok(DiagRun {
        label: run_label(dir),
        n: cfg.grid.n,
        dx: cfg.grid.dx(),
        weak,
        paths,
        series,
        window,
    })
}

fn ratio(prev: Option<f64>, cur: f64) -> Option<f64> {
    prev.map(|p| p / cur)
}

/// Post-hoc analyses of one or more run directories. Consecutive runs are
/// treated as a refinement sequence and their residual ratios recorded.
pub fn cmd_diag(
    runs: &[PathBuf],
    out: &Path,
    post_override: Option<&RunConfig>,
    overrides: &[String],
) -> Result<()> {
    if runs.is_empty() {
        return Err(config("diag needs at least one run directory"));
    }
    let results = runs
        .iter()
        .map(|d| analyse(d, post_override, overrides))
        .collect::<Result<Vec<_>>>()?;
    io::create_dir(out)?;

    let mut weak = Vec::new();
    let mut points = Vec::new();
    let mut defects = Vec::new();
    let mut blow = Vec::new();
    let mut windows = Vec::new();
    let mut prev: Option<&DiagRun> = None;
    for r in &results {
        weak.push(WeakRow {
            run: r.label.clone(),
            n: r.n,
            dx: r.dx,
            t1: r.weak.t1,
            t2: r.weak.t2,
            mass: r.weak.mass,
            momentum: r.weak.momentum,
            mass_scale: r.weak.mass_scale,
            momentum_scale: r.weak.momentum_scale,
            mass_ratio: ratio(prev.map(|p| p.weak.mass), r.weak.mass),
            momentum_ratio: ratio(prev.map(|p| p.weak.momentum), r.weak.momentum),
        });
        for (k, p) in r.paths.iter().enumerate() {
            for &(s, x) in &p.trajectory {
                points.push(PathPointRow {
                    run: &r.label,
                    x_seed: p.x_seed,
                    s,
                    x,
                });
            }
            let before = prev.and_then(|q| q.paths.get(k)).filter(|q| q.x_seed == p.x_seed);
            defects.push(PathRow {
                run: r.label.clone(),
                n: r.n,
                x_seed: p.x_seed,
                t_from: p.t_from,
                t_to: p.t_to,
                stretch: p.stretch,
                rho_seed: p.rho_seed,
                rho_foot: p.rho_foot,
                defect: p.defect,
                truncated: p.truncated,
                defect_ratio: ratio(before.map(|q| q.defect), p.defect),
            });
        }
        for &(t, ux_sup, cumulative) in &r.series {
            blow.push(BlowupRow {
                run: &r.label,
                n: r.n,
                t,
                ux_sup,
                cumulative,
            });
        }
        if let Some((t_start, eta, window)) = r.window {
            let before = prev.and_then(|q| q.window).map(|w| w.2);
            windows.push(WindowRow {
                run: r.label.clone(),
                n: r.n,
                t_start,
                eta,
                window,
                // growth under refinement: this run over the coarser one
                window_ratio: before.map(|b| window / b),
            });
        }
        prev = Some(r);
    }
    io::write_csv_with_header(
        &out.join("weakform.csv"),
        &["run", "n", "dx", "t1", "t2", "mass", "momentum", "mass_scale", "momentum_scale", "mass_ratio", "momentum_ratio"],
        &weak,
    )?;
    io::write_csv_with_header(&out.join("paths.csv"), &["run", "x_seed", "s", "x"], &points)?;
    io::write_csv_with_header(
        &out.join("path_defects.csv"),
        &["run", "n", "x_seed", "t_from", "t_to", "stretch", "rho_seed", "rho_foot", "defect", "truncated", "defect_ratio"],
        &defects,
    )?;
    io::write_csv_with_header(&out.join("blowup.csv"), &["run", "n", "t", "ux_sup", "cumulative"], &blow)?;
    io::write_csv_with_header(
        &out.join("blowup_window.csv"),
        &["run", "n", "t_start", "eta", "window", "window_ratio"],
        &windows,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub run: String,
    pub eps: f64,
    pub n: usize,
    pub dx: f64,
    pub alpha: f64,
    pub status: String,
    pub exit_code: i32,
    pub message: String,
    pub sup_gap_initial: Option<f64>,
    pub sup_gap_final: Option<f64>,
    pub sup_gap_ratio: Option<f64>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub energy_initial: Option<f64>,
    pub bd_energy_initial: Option<f64>,
    pub balance_margin: Option<f64>,
    pub balance_margin_literal: Option<f64>,
    pub m3_envelope_ratio: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Exit code of the first failing run.
    pub first_failure: Option<i32>,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status != "ok").count()
    }
}

/// Cartesian product of the sweep lists, in `eps`, `n`, `alpha` order.
pub fn sweep_configs(cfg: &RunConfig) -> Vec<RunConfig> {
    let s = &cfg.sweep;
    let or = |v: &Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v.clone() };
    let ns = if s.n.is_empty() { vec![cfg.grid.n] } else { s.n.clone() };
    let mut out = Vec::new();
    for &eps in &or(&s.eps, cfg.gas.eps) {
        for &n in &ns {
            for &alpha in &or(&s.alpha, cfg.gas.alpha) {
                let mut c = cfg.clone();
                c.gas.eps = eps;
                c.gas.alpha = alpha;
                c.grid.n = n;
                c.sweep = Default::default();
                out.push(c);
            }
        }
    }
    out
}

/// One run per combination in `dir/run_<k>`, executed on a worker pool, then
/// `sweep_summary.csv`. Failing runs are recorded and the sweep continues.
pub fn cmd_sweep(cfg: &RunConfig, dir: &Path, allow_eps_violation: bool) -> Result<SweepOutcome> {
    cfg.validate()?;
    let configs = sweep_configs(cfg);
    io::create_dir(dir)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.sweep.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(String, Result<RunSummary>)> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(k, c)| {
                let name = format!("run_{k:03}");
                let sub = dir.join(&name);
                let r = cmd_run(c, &sub, allow_eps_violation);
                if let Err(e) = &r {
                    if !sub.join(FAILED_MARKER).exists() {
                        let _ = io::create_dir(&sub)
                            .and_then(|_| io::write_text(&sub.join(FAILED_MARKER), &format!("{e}\n")));
                    }
                }
                (name, r)
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(results.len());
    let mut first_failure = None;
    for ((name, r), c) in results.into_iter().zip(&configs) {
        let mut row = SweepRow {
            run: name,
            eps: c.gas.eps,
            n: c.grid.n,
            dx: c.grid.dx(),
            alpha: c.gas.alpha,
            status: "ok".into(),
            exit_code: 0,
            message: String::new(),
            sup_gap_initial: None,
            sup_gap_final: None,
            sup_gap_ratio: None,
            t0: None,
            t1: None,
            energy_initial: None,
            bd_energy_initial: None,
            balance_margin: None,
            balance_margin_literal: None,
            m3_envelope_ratio: None,
        };
        match r {
            Ok(s) => {
                row.sup_gap_initial = Some(s.sup_gap_initial);
                row.sup_gap_final = Some(s.sup_gap_final);
                row.sup_gap_ratio = Some(s.sup_gap_ratio);
                row.t0 = s.vacuum.t0;
                row.t1 = s.vacuum.t1;
                row.energy_initial = Some(s.energy_initial);
                row.bd_energy_initial = Some(s.bd_energy_initial);
                row.balance_margin = Some(s.balance_margin);
                row.balance_margin_literal = Some(s.balance_margin_literal);
                row.m3_envelope_ratio = Some(s.m3_envelope_ratio);
            }
            Err(e) => {
                row.status = "failed".into();
                row.exit_code = e.exit_code();
                row.message = e.to_string();
                first_failure.get_or_insert(e.exit_code());
            }
        }
        rows.push(row);
    }
    io::write_csv(&dir.join("sweep_summary.csv"), &rows)?;
    Ok(SweepOutcome { rows, first_failure })
}
