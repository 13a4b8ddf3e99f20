//! The experiment commands behind the command line front end. Each writes
//! its CSV files and plot scripts into an output directory and returns an
//! [`ExperimentReport`].

use std::path::Path;

use crate::coupled::{
    gaussian_data, perturbed_data, run_full_observed, run_linearized, run_linearized_observed, LinearizedRun,
    SimConfig, VMode,
};
use crate::error::{Error, Result};
use crate::harness::config::{Perturbation, RunConfig};
use crate::harness::plots;
use crate::harness::report::{CriterionResult, ExperimentReport};
use crate::harness::tables::{
    fields_table, full_norms_table, measure_table, norms_table, read_fields, Table, FULL_NORMS_HEADER, NORMS_HEADER,
};
use crate::numerics::{l2_norm, trapezoid, ComplexField, Grid1D, RealField, C64};
use crate::parallel::par_map;
use crate::reference::ReferenceWave;

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })
}

/// `(ū, v̄)` on the run grid.
pub fn perturbation_data(p: &Perturbation, grid: &Grid1D) -> Result<(ComplexField, RealField)> {
    match p {
        Perturbation::Gaussian => Ok(gaussian_data(grid, 1.0)),
        Perturbation::File(path) => {
            let (x, u, v) = read_fields(path)?;
            let tol = 1e-9 * grid.x_max();
            if x.len() != grid.len() || x.iter().enumerate().any(|(k, &xk)| (xk - grid.x(k)).abs() > tol) {
                return Err(Error::Config(format!(
                    "{}: nodes do not match the {}-node grid on (-{}, {})",
                    path.display(),
                    grid.len(),
                    grid.x_max(),
                    grid.x_max()
                )));
            }
            Ok((u, v))
        }
    }
}

fn step_of(t: f64, dt: f64) -> usize {
    (t / dt).round() as usize
}

fn dump_due(rc: &RunConfig, t: f64) -> bool {
    let steps = (rc.sim.t_final / rc.sim.dt).round() as usize;
    let s = step_of(t, rc.sim.dt);
    s.is_multiple_of(rc.fields_every) || s == steps
}

fn stamp(t: f64) -> String {
    format!("t{t:.6}")
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Reference profile as a fields file: `re_u = r`, `im_u = 0`,
/// `v_tilde = φ`.
pub fn cmd_reference(rc: &RunConfig, out: &Path) -> Result<ExperimentReport> {
    rc.validate()?;
    ensure_dir(out)?;
    let wave = rc.sim.reference_wave()?;
    let grid = &rc.sim.grid;
    let u: ComplexField = wave.r.iter().map(|&r| C64::new(r, 0.0)).collect();
    fields_table(grid, &u, &wave.phi).write(&out.join("reference.csv"))?;
    plots::write_script(out, "reference", &plots::reference("reference.csv"))?;
    let mut rep = ExperimentReport::new("reference", rc.echo());
    rep.scalar("r_at_zero", wave.r_at_zero());
    rep.scalar("slope_at_zero", rc.sim.wave.slope_at_zero());
    rep.scalar("shock_strength", rc.sim.wave.shock_strength());
    rep.scalar("sup_r", max_of(wave.r.iter().map(|r| r.abs())));
    Ok(rep)
}

/// Full system from `(r + δū, φ + δv̄)`.
pub fn cmd_full(rc: &RunConfig, out: &Path) -> Result<ExperimentReport> {
    rc.validate()?;
    ensure_dir(out)?;
    let cfg = &rc.sim;
    let grid = cfg.grid;
    let wave = cfg.reference_wave()?;
    let (u1, v1) = perturbation_data(&rc.perturbation, &grid)?;
    let (u0, v0) = perturbed_data(&wave, cfg.delta, &u1, &v1);
    let mut last_dump = String::new();
    let run = run_full_observed(cfg, &u0, &v0, |st| {
        if dump_due(rc, st.t) {
            last_dump = format!("fields_{}", stamp(st.t));
            fields_table(&grid, &st.u, &st.v).write(&out.join(format!("{last_dump}.csv")))?;
        }
        Ok(())
    })?;
    full_norms_table(&run.records).write(&out.join("norms_full.csv"))?;
    plots::write_script(out, "norms_full", &plots::time_series("norms_full", "norms_full.csv", &FULL_NORMS_HEADER))?;
    plots::write_script(out, &last_dump, &plots::fields(&last_dump, &format!("{last_dump}.csv"), None))?;

    let mut rep = ExperimentReport::new("full", rc.echo());
    let m0 = run.records[0].mass;
    rep.scalar("mass_drift_rel", max_of(run.records.iter().map(|r| (r.mass - m0).abs() / m0)));
    rep.scalar("sup_h1_u", max_of(run.records.iter().map(|r| r.h1_u)));
    rep.scalar("sup_l2_v", max_of(run.records.iter().map(|r| r.l2_v)));
    rep.norms = Some(full_norms_table(&run.records));
    Ok(rep)
}

/// Linearized system from `(ū, v̄)`: fields, the reconstructed spiked long
/// wave, `Ψ(t)` at every step and the norm table.
pub fn cmd_linearized(rc: &RunConfig, out: &Path) -> Result<ExperimentReport> {
    rc.validate()?;
    ensure_dir(out)?;
    let cfg = &rc.sim;
    let grid = cfg.grid;
    let (u1, v1) = perturbation_data(&rc.perturbation, &grid)?;
    let mut last_dump = String::new();
    let run = run_linearized_observed(cfg, &u1, &v1, |sys, st| {
        if dump_due(rc, st.t) {
            let s = stamp(st.t);
            fields_table(&grid, &st.u, &st.v.v_tilde).write(&out.join(format!("fields_{s}.csv")))?;
            let mut sp = Table::new(&["x", "v"]);
            for (k, v) in sys.spiked(&st.v).into_iter().enumerate() {
                sp.push(vec![grid.x(k), v]);
            }
            sp.write(&out.join(format!("spiked_{s}.csv")))?;
            last_dump = s;
        }
        Ok(())
    })?;
    measure_table(run.psi()).write(&out.join("measure.csv"))?;
    norms_table(&run.records).write(&out.join("norms.csv"))?;
    plots::write_script(out, "norms", &plots::time_series("norms", "norms.csv", &NORMS_HEADER))?;
    plots::write_script(out, "measure", &plots::time_series("measure", "measure.csv", &["t", "psi"]))?;
    let name = format!("fields_{last_dump}");
    plots::write_script(
        out,
        &name,
        &plots::fields(&name, &format!("{name}.csv"), Some(&format!("spiked_{last_dump}.csv"))),
    )?;

    let mut rep = ExperimentReport::new("linearized", rc.echo());
    linearized_summary(&mut rep, &run);
    rep.norms = Some(norms_table(&run.records));
    Ok(rep)
}

fn linearized_summary(rep: &mut ExperimentReport, run: &LinearizedRun) {
    let r = &run.records;
    let e0 = r[0].energy;
    rep.scalar("sup_h1_u", max_of(r.iter().map(|x| x.h1_u)));
    rep.scalar("sup_l2_vtilde", max_of(r.iter().map(|x| x.l2_vtilde)));
    rep.scalar("sup_hm1_v", max_of(r.iter().map(|x| x.hm1_v)));
    rep.scalar("psi_final", run.state.v.psi_now());
    rep.scalar(
        "energy_drift_rel",
        if e0 != 0.0 {
            max_of(r.iter().map(|x| (x.energy - e0).abs() / e0.abs()))
        } else {
            max_of(r.iter().map(|x| x.energy.abs()))
        },
    );
    rep.scalar("boundary_max", run.boundary_max);
}

/// One output time of the stability comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    pub t: f64,
    /// `‖u_full − e^{ibt}(r + δu)‖_{L²}`.
    pub u: f64,
    /// `‖v_full − φ − δṽ‖_{L²}` outside the spike window.
    pub v_off: f64,
    /// `|∫_W (v_full − φ) − δ(∫_W ṽ + Ψ)|` over the window `W`.
    pub spike: f64,
}

impl Discrepancy {
    pub fn total(&self) -> f64 {
        self.u + self.v_off + self.spike
    }
}

#[derive(Debug, Clone)]
pub struct StabilityRun {
    pub delta: f64,
    pub series: Vec<Discrepancy>,
    /// `x, |u_full|, |u_pred|, v_full, v_pred` at `T`.
    pub overlay: Table,
}

impl StabilityRun {
    pub fn sup(&self) -> f64 {
        self.series.iter().map(|d| d.total()).fold(0.0, f64::max)
    }

    pub fn last(&self) -> f64 {
        self.series.last().map(|d| d.total()).unwrap_or(f64::NAN)
    }
}

/// Linearized run, the zero-perturbation baseline and one full run per
/// perturbation size.
#[derive(Debug, Clone)]
pub struct StabilityStudy {
    pub linearized: LinearizedRun,
    pub baseline: StabilityRun,
    pub runs: Vec<StabilityRun>,
    /// Half-width of the spike window, `5 · mollify_width`.
    pub window: f64,
}

impl StabilityStudy {
    /// `(D_δ(T) − D_0(T)) / δ`.
    pub fn corrected_ratio(&self, run: &StabilityRun) -> f64 {
        (run.last() - self.baseline.last()) / run.delta
    }
}

struct Snapshot {
    t: f64,
    u: ComplexField,
    v_tilde: RealField,
    psi: f64,
    spiked: RealField,
}

/// Centre slot of `ṽ` replaced by the mean of its neighbours.
fn filled(v: &[f64], mode: VMode) -> RealField {
    let mut out = v.to_vec();
    if mode == VMode::Decomposed {
        let m = v.len() / 2;
        out[m] = 0.5 * (v[m - 1] + v[m + 1]);
    }
    out
}

/// The three-step protocol: linearized run from `(ū, v̄)`, full runs from
/// `(r + δū, φ + δv̄)`, and the discrepancy `D(t)` at every output time.
pub fn stability_study(cfg: &SimConfig, u1: &[C64], v1: &[f64], deltas: &[f64]) -> Result<StabilityStudy> {
    cfg.validate()?;
    let mut snaps = Vec::new();
    let linearized = run_linearized_observed(cfg, u1, v1, |sys, st| {
        snaps.push(Snapshot {
            t: st.t,
            u: st.u.clone(),
            v_tilde: filled(&st.v.v_tilde, sys.mode),
            psi: st.v.psi_now(),
            spiked: sys.spiked(&st.v),
        });
        Ok(())
    })?;
    let wave = cfg.reference_wave()?;
    let window = 5.0 * cfg.mollify_width;
    let mut all = vec![0.0];
    all.extend_from_slice(deltas);
    let runs = par_map(&all, |&delta| compare(cfg, &wave, &snaps, u1, v1, delta, window));
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let baseline = runs.remove(0);
    Ok(StabilityStudy {
        linearized,
        baseline,
        runs,
        window,
    })
}

fn compare(
    cfg: &SimConfig,
    wave: &ReferenceWave,
    snaps: &[Snapshot],
    u1: &[C64],
    v1: &[f64],
    delta: f64,
    window: f64,
) -> Result<StabilityRun> {
    let grid = cfg.grid;
    let n = grid.len();
    let h = grid.h();
    let inside: Vec<bool> = (0..n).map(|k| grid.x(k).abs() <= window).collect();
    let (u0, v0) = perturbed_data(wave, delta, u1, v1);
    let mut series = Vec::new();
    let mut overlay = Table::new(&["x", "abs_u_full", "abs_u_pred", "v_full", "v_pred"]);
    let mut i = 0;
    run_full_observed(cfg, &u0, &v0, |st| {
        let s = snaps
            .get(i)
            .filter(|s| (s.t - st.t).abs() <= 1e-9 * cfg.dt)
            .ok_or_else(|| Error::Domain(format!("no linearized snapshot at t = {}", st.t)))?;
        i += 1;
        let rot = C64::new(0.0, cfg.wave.b * st.t).exp();
        let pred: ComplexField = (0..n).map(|k| rot * (wave.r[k] + delta * s.u[k])).collect();
        let du: ComplexField = (0..n).map(|k| st.u[k] - pred[k]).collect();
        let mut off = vec![0.0; n];
        let mut mass_full = vec![0.0; n];
        let mut mass_lin = vec![0.0; n];
        for k in 0..n {
            let dv = st.v[k] - wave.phi[k];
            if inside[k] {
                mass_full[k] = dv;
                mass_lin[k] = s.v_tilde[k];
            } else {
                off[k] = dv - delta * s.v_tilde[k];
            }
        }
        series.push(Discrepancy {
            t: st.t,
            u: l2_norm(&du, &grid)?,
            v_off: l2_norm(&off, &grid)?,
            spike: (trapezoid(&mass_full, h) - delta * (trapezoid(&mass_lin, h) + s.psi)).abs(),
        });
        if (st.t - cfg.t_final).abs() <= 1e-9 * cfg.dt {
            for k in 0..n {
                overlay.push(vec![
                    grid.x(k),
                    st.u[k].norm(),
                    pred[k].norm(),
                    st.v[k],
                    wave.phi[k] + delta * s.spiked[k],
                ]);
            }
        }
        Ok(())
    })?;
    Ok(StabilityRun {
        delta,
        series,
        overlay,
    })
}

/// Verdict on a perturbation sweep: every `D` finite and the
/// baseline-corrected `D(T)/δ` non-increasing as `δ` decreases.
pub fn sweep_verdict(study: &StabilityStudy) -> CriterionResult {
    let mut runs: Vec<&StabilityRun> = study.runs.iter().collect();
    runs.sort_by(|a, b| b.delta.total_cmp(&a.delta));
    let finite = study.runs.iter().chain([&study.baseline]).all(|r| r.sup().is_finite());
    let ratios: Vec<f64> = runs.iter().map(|r| study.corrected_ratio(r)).collect();
    let monotone = ratios.windows(2).all(|w| w[1] <= w[0]);
    let listing: Vec<String> = runs
        .iter()
        .zip(&ratios)
        .map(|(r, q)| format!("delta {}: sup D {:.3e}, corrected D(T)/delta {:.4}", r.delta, r.sup(), q))
        .collect();
    CriterionResult {
        id: 9,
        name: super::validate::CRITERIA[8],
        passed: finite && monotone && runs.len() >= 2,
        detail: format!(
            "baseline D(T) {:.3e}; {}; finite {finite}, non-increasing {monotone}",
            study.baseline.last(),
            listing.join("; ")
        ),
    }
}

fn delta_tag(d: f64) -> String {
    format!("d{d}")
}

/// Discrepancy tables, overlays and their plot scripts.
pub fn write_stability_outputs(study: &StabilityStudy, cfg: &SimConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let header = ["t", "d", "d_u", "d_v", "d_spike"];
    for run in study.runs.iter().chain([&study.baseline]) {
        let tag = delta_tag(run.delta);
        let mut t = Table::new(&header);
        for d in &run.series {
            t.push(vec![d.t, d.total(), d.u, d.v_off, d.spike]);
        }
        t.write(&out.join(format!("stability_{tag}.csv")))?;
        let name = format!("stability_{tag}");
        plots::write_script(out, &name, &plots::time_series(&name, &format!("{name}.csv"), &header))?;
        let name = format!("overlay_{tag}");
        run.overlay.write(&out.join(format!("{name}.csv")))?;
        plots::write_script(out, &name, &plots::overlay(&name, &format!("{name}.csv"), cfg.t_final))?;
    }
    let mut sweep = Table::new(&["delta", "sup_d", "d_final", "d_final_over_delta", "corrected_over_delta"]);
    for run in &study.runs {
        sweep.push(vec![
            run.delta,
            run.sup(),
            run.last(),
            run.last() / run.delta,
            study.corrected_ratio(run),
        ]);
    }
    sweep.write(&out.join("sweep.csv"))?;
    norms_table(&study.linearized.records).write(&out.join("norms.csv"))?;
    measure_table(study.linearized.psi()).write(&out.join("measure.csv"))
}

/// Stability protocol for `delta`, or for every value of `sweep` when one
/// is configured.
pub fn cmd_stability(rc: &RunConfig, out: &Path) -> Result<ExperimentReport> {
    rc.validate()?;
    let cfg = &rc.sim;
    let (u1, v1) = perturbation_data(&rc.perturbation, &cfg.grid)?;
    let deltas = if rc.sweep.is_empty() {
        vec![cfg.delta]
    } else {
        rc.sweep.clone()
    };
    if deltas.iter().any(|&d| d <= 0.0) {
        return Err(Error::Config("perturbation sizes must be positive; the baseline runs anyway".into()));
    }
    let study = stability_study(cfg, &u1, &v1, &deltas)?;
    write_stability_outputs(&study, cfg, out)?;

    let mut rep = ExperimentReport::new("stability", rc.echo());
    rep.scalar("spike_window", study.window);
    rep.scalar("baseline_sup_d", study.baseline.sup());
    rep.scalar("baseline_d_final", study.baseline.last());
    for run in &study.runs {
        let tag = delta_tag(run.delta);
        rep.scalar(&format!("sup_d_{tag}"), run.sup());
        rep.scalar(&format!("d_final_{tag}"), run.last());
        rep.scalar(&format!("d_final_over_delta_{tag}"), run.last() / run.delta);
        rep.scalar(&format!("corrected_over_delta_{tag}"), study.corrected_ratio(run));
    }
    if study.runs.len() >= 2 {
        rep.criteria.push(sweep_verdict(&study));
    }
    rep.norms = Some(norms_table(&study.linearized.records));
    Ok(rep)
}

/// Time-step refinement of the linearized run: solutions at `dt`, `dt/2`
/// and `dt/4` compared at `T`, with observed orders
/// `log2(|e(dt) − e(dt/2)| / |e(dt/2) − e(dt/4)|)`.
pub fn cmd_convergence(rc: &RunConfig, out: &Path) -> Result<ExperimentReport> {
    rc.validate()?;
    ensure_dir(out)?;
    let cfg = &rc.sim;
    let grid = cfg.grid;
    let (u1, v1) = perturbation_data(&rc.perturbation, &grid)?;
    let dts = [cfg.dt, cfg.dt / 2.0, cfg.dt / 4.0];
    let runs = par_map(&dts, |&dt| {
        let c = SimConfig {
            dt,
            output_every: ((cfg.t_final / dt).round() as usize).max(1),
            ..cfg.clone()
        };
        run_linearized(&c, &u1, &v1)
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let diff = |a: &LinearizedRun, b: &LinearizedRun| -> Result<[f64; 3]> {
        let du: ComplexField = a.state.u.iter().zip(&b.state.u).map(|(x, y)| x - y).collect();
        let dv: RealField = a.state.v.v_tilde.iter().zip(&b.state.v.v_tilde).map(|(x, y)| x - y).collect();
        Ok([
            l2_norm(&du, &grid)?,
            l2_norm(&dv, &grid)?,
            (a.state.v.psi_now() - b.state.v.psi_now()).abs(),
        ])
    };
    let d1 = diff(&runs[0], &runs[1])?;
    let d2 = diff(&runs[1], &runs[2])?;
    let mut t = Table::new(&["dt", "diff_u", "diff_v", "diff_psi"]);
    t.push(vec![dts[0], d1[0], d1[1], d1[2]]);
    t.push(vec![dts[1], d2[0], d2[1], d2[2]]);
    t.write(&out.join("convergence.csv"))?;

    let mut rep = ExperimentReport::new("convergence", rc.echo());
    for (j, name) in ["u", "v", "psi"].iter().enumerate() {
        rep.scalar(&format!("diff_{name}_coarse"), d1[j]);
        rep.scalar(&format!("diff_{name}_fine"), d2[j]);
        rep.scalar(&format!("order_{name}"), (d1[j] / d2[j]).log2());
    }
    rep.norms = Some(t);
    Ok(rep)
}
