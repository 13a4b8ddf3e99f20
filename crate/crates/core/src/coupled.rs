//! Time loops for the full system and its linearization around the
//! reference wave.
//!
//! Both equations are advanced by operator splitting. With Strang splitting
//! a step is half a hyperbolic step, a full Crank–Nicolson step with the long
//! wave frozen, and another half hyperbolic step. Lie splitting does one of
//! each.
//!
//! The linearized Schrödinger unknown lives in the frame rotating with the
//! reference wave, so the full solution is approximated by
//! `e^{ibt}(r + δ u)` and `φ + δ v`.

use crate::error::{Error, Result};
use crate::hyperbolic::{
    cn_step_transport, explicit_v_eps0, lf_step_burgers, lf_step_transport, step_decomposed, Flux, MeasureSolution,
};
use crate::numerics::{
    dx_central, h1_norm, h_minus1_norm, l2_norm, measure_h_minus1_norm, mollifier, smoothed_sign, trapezoid,
    ComplexField, Grid1D, RealField, TimeSeries, C64,
};
use crate::reference::{closed_form_r, integrate_r_eps, Integrator, ReferenceWave, WaveParams};
use crate::schrodinger::{cn_step, energy_diagnostic, mass, BoundaryClosure, EnergyCoeffs, NewtonOptions, SchrodingerProblem};

/// Representation of the linearized long wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VMode {
    /// Smooth coefficient `2φ^δ` on the whole grid; the measure appears as a
    /// spike of width about the mollification width.
    Regularized,
    /// `ṽ` off the shock plus the amplitude `Ψ(t)`.
    #[default]
    Decomposed,
}

impl VMode {
    pub fn name(&self) -> &'static str {
        match self {
            VMode::Regularized => "regularized",
            VMode::Decomposed => "decomposed",
        }
    }

    pub fn parse(s: &str) -> Option<VMode> {
        match s {
            "regularized" => Some(VMode::Regularized),
            "decomposed" => Some(VMode::Decomposed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    Lie,
    #[default]
    Strang,
}

impl Splitting {
    pub fn name(&self) -> &'static str {
        match self {
            Splitting::Lie => "lie",
            Splitting::Strang => "strang",
        }
    }

    pub fn parse(s: &str) -> Option<Splitting> {
        match s {
            "lie" => Some(Splitting::Lie),
            "strang" => Some(Splitting::Strang),
            _ => None,
        }
    }
}

/// Time discretization of the linear transport equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transport {
    /// Explicit conservative scheme with the configured flux.
    #[default]
    Explicit,
    /// Crank–Nicolson with central differences. Non-dissipative, so the
    /// energy of the regularized system is conserved; only valid in
    /// regularized mode.
    Central,
}

impl Transport {
    pub fn name(&self) -> &'static str {
        match self {
            Transport::Explicit => "explicit",
            Transport::Central => "central",
        }
    }

    pub fn parse(s: &str) -> Option<Transport> {
        match s {
            "explicit" => Some(Transport::Explicit),
            "central" => Some(Transport::Central),
            _ => None,
        }
    }
}

/// All run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub grid: Grid1D,
    pub dt: f64,
    pub t_final: f64,
    pub wave: WaveParams,
    pub delta: f64,
    pub mollify_width: f64,
    pub v_mode: VMode,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub splitting: Splitting,
    pub flux: Flux,
    pub transport: Transport,
    pub substeps: usize,
    pub integrator: Integrator,
    pub output_every: usize,
    /// Largest admissible `|u|` next to the boundary in linearized runs,
    /// relative to the sup norm of the data.
    pub containment_tol: f64,
}

impl Default for SimConfig {
    /// Desk-scale version of the published experiment: `(-22, 22)` with 4001
    /// nodes, `dt = 2.5e-4`, `T = 1`, `ε = 0.1`, `b = -1.5`, `A = C = 1`,
    /// `δ = 0.1`, mollification width `10h`.
    fn default() -> Self {
        let grid = Grid1D::new(22.0, 4001).expect("valid default grid");
        SimConfig {
            grid,
            dt: 2.5e-4,
            t_final: 1.0,
            wave: WaveParams {
                b: -1.5,
                eps: 0.1,
                a: 1.0,
                c: 1.0,
            },
            delta: 0.1,
            mollify_width: 10.0 * grid.h(),
            v_mode: VMode::Decomposed,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            splitting: Splitting::Strang,
            flux: Flux::LocalLaxFriedrichs,
            transport: Transport::Explicit,
            substeps: 4,
            integrator: Integrator::Rk4,
            output_every: 40,
            containment_tol: 1e-2,
        }
    }
}

impl SimConfig {
    /// Same configuration on another grid, keeping the mollification width
    /// as the same multiple of `h`.
    pub fn with_grid(&self, grid: Grid1D) -> SimConfig {
        let mult = self.mollify_width / self.grid.h();
        SimConfig {
            grid,
            mollify_width: mult * grid.h(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.wave.validate()?;
        let h = self.grid.h();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.dt > h {
            return Err(Error::Config(format!("dt = {} exceeds the grid spacing h = {h}", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("T must be positive, got {}", self.t_final)));
        }
        self.steps()?;
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!("delta must be nonnegative, got {}", self.delta)));
        }
        if !(self.mollify_width >= 3.0 * h * (1.0 - 1e-12)) {
            return Err(Error::Resolution {
                width: self.mollify_width,
                h,
            });
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(Error::Config("Newton tolerance and iteration cap must be positive".into()));
        }
        if !(self.containment_tol > 0.0) {
            return Err(Error::Config("containment_tol must be positive".into()));
        }
        if self.substeps == 0 || self.output_every == 0 {
            return Err(Error::Config("substeps and output_every must be positive".into()));
        }
        if self.transport == Transport::Central && self.v_mode == VMode::Decomposed {
            return Err(Error::Config("central transport requires v_mode = regularized".into()));
        }
        Ok(())
    }

    /// Number of steps; `T` must be a multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        let n = (self.t_final / self.dt).round();
        if n < 1.0 || (n * self.dt - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(Error::Config(format!(
                "T = {} is not a multiple of dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(n as usize)
    }

    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.newton_tol,
            max_iter: self.newton_max_iter,
        }
    }

    pub fn reference_wave(&self) -> Result<ReferenceWave> {
        if self.wave.eps == 0.0 {
            closed_form_r(self.wave, &self.grid)
        } else {
            integrate_r_eps(self.wave, &self.grid, self.substeps, self.integrator)
        }
    }

    fn is_output_step(&self, step: usize, last: usize) -> bool {
        step.is_multiple_of(self.output_every) || step == last
    }
}

/// State of the full nonlinear system.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub u: ComplexField,
    pub v: RealField,
    pub t: f64,
}

/// State of the linearized system.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedState {
    pub u: ComplexField,
    pub v: MeasureSolution,
    pub t: f64,
}

/// Norms of a full run at an output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullRecord {
    pub t: f64,
    pub mass: f64,
    pub h1_u: f64,
    pub l2_v: f64,
    pub hm1_v: f64,
}

impl FullRecord {
    pub fn values(&self) -> [f64; 5] {
        [self.t, self.mass, self.h1_u, self.l2_v, self.hm1_v]
    }
}

/// Norms and diagnostics of a linearized run at an output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormRecord {
    pub t: f64,
    pub mass: f64,
    pub h1_u: f64,
    pub l2_vtilde: f64,
    pub hm1_v: f64,
    pub energy: f64,
    pub shock_energy: f64,
    pub psi: f64,
}

impl NormRecord {
    /// Columns of the norms file, in header order.
    pub fn values(&self) -> [f64; 7] {
        [
            self.t,
            self.mass,
            self.h1_u,
            self.l2_vtilde,
            self.hm1_v,
            self.energy,
            self.shock_energy,
        ]
    }
}

#[derive(Debug, Clone)]
pub struct FullRun {
    pub state: FullState,
    pub records: Vec<FullRecord>,
}

#[derive(Debug, Clone)]
pub struct LinearizedRun {
    pub state: LinearizedState,
    pub records: Vec<NormRecord>,
    /// Largest `|u|` seen next to either boundary at output steps.
    pub boundary_max: f64,
}

impl LinearizedRun {
    pub fn psi(&self) -> &TimeSeries {
        &self.state.v.psi
    }
}

fn check_record(values: &[f64], step: usize, t: f64) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence {
            location: "recorded norms".into(),
        }
        .at(t, step))
    }
}

/// Full system with data `(u0, v0)`. `observe` sees the state at every
/// output step, including `t = 0` and `t = T`.
pub fn run_full_observed<F>(cfg: &SimConfig, u0: &[C64], v0: &[f64], mut observe: F) -> Result<FullRun>
where
    F: FnMut(&FullState) -> Result<()>,
{
    cfg.validate()?;
    let grid = &cfg.grid;
    grid.check(u0)?;
    grid.check(v0)?;
    let wave = cfg.reference_wave()?;
    let steps = cfg.steps()?;
    let eps = cfg.wave.eps;
    let mut prob = SchrodingerProblem {
        a1: v0.to_vec(),
        a2: vec![0.0; grid.len()],
        cubic_eps: eps,
        boundary: BoundaryClosure::from_profile(&wave.r),
    };
    let opts = cfg.newton();
    let mut st = FullState {
        u: u0.to_vec(),
        v: v0.to_vec(),
        t: 0.0,
    };
    let mut records = Vec::new();
    let record = |st: &FullState, step: usize, records: &mut Vec<FullRecord>| -> Result<()> {
        let rec = FullRecord {
            t: st.t,
            mass: mass(&st.u, grid)?,
            h1_u: h1_norm(&st.u, grid)?,
            l2_v: l2_norm(&st.v, grid)?,
            hm1_v: h_minus1_norm(&st.v, grid)?,
        };
        check_record(&rec.values(), step, st.t)?;
        records.push(rec);
        Ok(())
    };
    record(&st, 0, &mut records)?;
    observe(&st)?;
    let burgers = |v: &[f64], u: &[C64], dt: f64| lf_step_burgers(v, u, dt, eps, grid, cfg.flux);
    for step in 1..=steps {
        let t0 = st.t;
        let res: Result<()> = (|| {
            match cfg.splitting {
                Splitting::Strang => {
                    st.v = burgers(&st.v, &st.u, 0.5 * cfg.dt)?;
                    prob.a1.copy_from_slice(&st.v);
                    st.u = cn_step(&st.u, &[], cfg.dt, &prob, grid, opts)?;
                    st.v = burgers(&st.v, &st.u, 0.5 * cfg.dt)?;
                }
                Splitting::Lie => {
                    st.v = burgers(&st.v, &st.u, cfg.dt)?;
                    prob.a1.copy_from_slice(&st.v);
                    st.u = cn_step(&st.u, &[], cfg.dt, &prob, grid, opts)?;
                }
            }
            Ok(())
        })();
        res.map_err(|e| e.at(t0, step))?;
        st.t = step as f64 * cfg.dt;
        if cfg.is_output_step(step, steps) {
            record(&st, step, &mut records)?;
            observe(&st)?;
        }
    }
    Ok(FullRun { state: st, records })
}

pub fn run_full(cfg: &SimConfig, u0: &[C64], v0: &[f64]) -> Result<FullRun> {
    run_full_observed(cfg, u0, v0, |_| Ok(()))
}

/// Unperturbed reference data `(r, φ)` perturbed by `δ (u1, v1)`.
pub fn perturbed_data(wave: &ReferenceWave, delta: f64, u1: &[C64], v1: &[f64]) -> (ComplexField, RealField) {
    let u = wave.r.iter().zip(u1).map(|(&r, &p)| C64::new(r, 0.0) + delta * p).collect();
    let v = wave.phi.iter().zip(v1).map(|(&f, &p)| f + delta * p).collect();
    (u, v)
}

/// `∫ |φ| ṽ²` with the centre node excluded.
pub fn weighted_shock_energy(v_tilde: &[f64], phi: &[f64], grid: &Grid1D) -> Result<f64> {
    grid.check(v_tilde)?;
    grid.check(phi)?;
    let m = grid.center();
    let f: Vec<f64> = (0..v_tilde.len())
        .map(|k| if k == m { 0.0 } else { phi[k].abs() * v_tilde[k] * v_tilde[k] })
        .collect();
    Ok(trapezoid(&f, grid.h()))
}

/// Coefficients of a linearized run.
#[derive(Debug, Clone)]
pub struct LinearizedSystem {
    pub wave: ReferenceWave,
    pub mode: VMode,
    /// `φ` or `φ^δ`, whichever the run uses.
    pub phi: RealField,
    pub problem: SchrodingerProblem,
    /// Transport coefficient `2φ` or `2φ^δ`.
    pub coeff: RealField,
    pub rho: RealField,
}

impl LinearizedSystem {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = &cfg.grid;
        let wave = cfg.reference_wave()?;
        let eps = cfg.wave.eps;
        let rho = mollifier(cfg.mollify_width, grid)?;
        let phi = match cfg.v_mode {
            VMode::Decomposed => wave.phi.clone(),
            VMode::Regularized => {
                let ss = smoothed_sign(cfg.mollify_width, grid)?;
                ss.iter()
                    .zip(&wave.r)
                    .map(|(s, r)| s * (eps * r * r + 1.0).sqrt())
                    .collect()
            }
        };
        let a1 = phi
            .iter()
            .zip(&wave.r)
            .map(|(f, r)| f + cfg.wave.b - 2.0 * eps * r * r)
            .collect();
        let a2 = wave.r.iter().map(|r| -eps * r * r).collect();
        let coeff = phi.iter().map(|f| 2.0 * f).collect();
        Ok(LinearizedSystem {
            problem: SchrodingerProblem {
                a1,
                a2,
                cubic_eps: 0.0,
                boundary: BoundaryClosure::DIRICHLET,
            },
            mode: cfg.v_mode,
            wave,
            phi,
            coeff,
            rho,
        })
    }

    /// Schrödinger source `v r`. In decomposed mode the measure enters as
    /// `Ψ r(0) ρ_w`, and the centre slot of `ṽ` is filled with the mean of
    /// its neighbours so that the source has no one-node defect.
    pub fn source(&self, v: &MeasureSolution) -> ComplexField {
        let psi = v.psi_now();
        let r0 = self.wave.r_at_zero();
        match self.mode {
            VMode::Regularized => v.v_tilde.iter().zip(&self.wave.r).map(|(v, r)| C64::new(v * r, 0.0)).collect(),
            VMode::Decomposed => {
                let m = v.v_tilde.len() / 2;
                (0..v.v_tilde.len())
                    .map(|k| {
                        let vt = if k == m {
                            0.5 * (v.v_tilde[m - 1] + v.v_tilde[m + 1])
                        } else {
                            v.v_tilde[k]
                        };
                        C64::new(vt * self.wave.r[k] + psi * r0 * self.rho[k], 0.0)
                    })
                    .collect()
            }
        }
    }

    /// Long-wave field as a function: `v` in regularized mode and
    /// `ṽ + Ψ ρ_w` in decomposed mode.
    pub fn spiked(&self, v: &MeasureSolution) -> RealField {
        match self.mode {
            VMode::Regularized => v.v_tilde.clone(),
            VMode::Decomposed => v.v_tilde.iter().zip(&self.rho).map(|(a, r)| a + v.psi_now() * r).collect(),
        }
    }

    fn transport_source(&self, u: &[C64], eps: f64, grid: &Grid1D) -> Result<RealField> {
        let f: Vec<f64> = u.iter().zip(&self.wave.r).map(|(u, r)| r * u.re).collect();
        Ok(dx_central(&f, grid)?.into_iter().map(|d| 2.0 * eps * d).collect())
    }

    fn hyperbolic_substep(&self, st: &mut LinearizedState, dt: f64, cfg: &SimConfig) -> Result<()> {
        let grid = &cfg.grid;
        let src = self.transport_source(&st.u, cfg.wave.eps, grid)?;
        match self.mode {
            VMode::Decomposed => step_decomposed(
                &mut st.v,
                &self.coeff,
                &src,
                self.wave.phi_traces(),
                dt,
                grid,
                cfg.flux,
            ),
            VMode::Regularized => {
                st.v.v_tilde = match cfg.transport {
                    Transport::Explicit => lf_step_transport(&st.v.v_tilde, &self.coeff, &src, dt, grid, cfg.flux)?,
                    Transport::Central => cn_step_transport(&st.v.v_tilde, &self.coeff, &src, dt, grid)?,
                };
                let t = st.v.time();
                st.v.psi.push(t + dt, 0.0)
            }
        }
    }

    /// Energy functional of the linearized system. The `v²` term is weighted
    /// by `1/(2ε)`; for zero coupling only the Schrödinger part remains.
    pub fn energy(&self, st: &LinearizedState, eps: f64, grid: &Grid1D) -> Result<f64> {
        let zeros = vec![0.0; grid.len()];
        let a4: RealField = self.coeff.clone();
        let (a3, a4, c) = if eps > 0.0 {
            (&self.wave.r, &a4, 2.0 * eps)
        } else {
            (&zeros, &zeros, 1.0)
        };
        let co = EnergyCoeffs {
            a1: &self.problem.a1,
            a2: &self.problem.a2,
            a3,
            a4,
            coupling: c,
        };
        energy_diagnostic(&st.u, &st.v.v_tilde, &co, grid)
    }

    fn record(&self, st: &LinearizedState, cfg: &SimConfig) -> Result<NormRecord> {
        let grid = &cfg.grid;
        let hm1_v = match self.mode {
            VMode::Decomposed => measure_h_minus1_norm(&st.v.v_tilde, st.v.psi_now(), grid)?,
            VMode::Regularized => h_minus1_norm(&st.v.v_tilde, grid)?,
        };
        let mut off = st.v.v_tilde.clone();
        if self.mode == VMode::Decomposed {
            off[grid.center()] = 0.0;
        }
        Ok(NormRecord {
            t: st.t,
            mass: mass(&st.u, grid)?,
            h1_u: h1_norm(&st.u, grid)?,
            l2_vtilde: l2_norm(&off, grid)?,
            hm1_v,
            energy: self.energy(st, cfg.wave.eps, grid)?,
            shock_energy: weighted_shock_energy(&off, &self.phi, grid)?,
            psi: st.v.psi_now(),
        })
    }
}

/// Boundary monitor of linearized runs. Dispersion carries a small
/// algebraic tail to the edges, so the bound is relative to the data size.
struct Containment {
    limit: f64,
    seen: f64,
}

impl Containment {
    fn new(cfg: &SimConfig, u0: &[C64], v0: &[f64]) -> Self {
        let scale = u0.iter().map(|z| z.norm()).chain(v0.iter().map(|v| v.abs())).fold(0.0, f64::max);
        Containment {
            limit: cfg.containment_tol * scale,
            seen: 0.0,
        }
    }

    fn check(&mut self, u: &[C64], t: f64, step: usize) -> Result<()> {
        let n = u.len();
        let magnitude = u[1].norm().max(u[n - 2].norm());
        self.seen = self.seen.max(magnitude);
        if magnitude > self.limit {
            return Err(Error::Containment { t, magnitude }.at(t, step));
        }
        Ok(())
    }
}

/// Linearized system with data `(u0, v0)`, dispatching on the coupling.
pub fn run_linearized_observed<F>(cfg: &SimConfig, u0: &[C64], v0: &[f64], observe: F) -> Result<LinearizedRun>
where
    F: FnMut(&LinearizedSystem, &LinearizedState) -> Result<()>,
{
    if cfg.wave.eps == 0.0 {
        run_linearized_eps0_observed(cfg, u0, v0, observe)
    } else {
        run_linearized_eps_observed(cfg, u0, v0, observe)
    }
}

pub fn run_linearized(cfg: &SimConfig, u0: &[C64], v0: &[f64]) -> Result<LinearizedRun> {
    run_linearized_observed(cfg, u0, v0, |_, _| Ok(()))
}

/// Zero coupling: `v` from the closed-form solution, `u` by Crank–Nicolson
/// with source `(ṽ + Ψ ρ_w) r` at the step midpoint.
pub fn run_linearized_eps0(cfg: &SimConfig, u0: &[C64], v0: &[f64]) -> Result<LinearizedRun> {
    run_linearized_eps0_observed(cfg, u0, v0, |_, _| Ok(()))
}

fn run_linearized_eps0_observed<F>(cfg: &SimConfig, u0: &[C64], v0: &[f64], mut observe: F) -> Result<LinearizedRun>
where
    F: FnMut(&LinearizedSystem, &LinearizedState) -> Result<()>,
{
    if cfg.wave.eps != 0.0 {
        return Err(Error::Config(format!(
            "closed-form long wave requires eps = 0, got {}",
            cfg.wave.eps
        )));
    }
    let grid = &cfg.grid;
    grid.check(u0)?;
    grid.check(v0)?;
    let mut cfg_sys = cfg.clone();
    cfg_sys.v_mode = VMode::Decomposed;
    cfg_sys.transport = Transport::Explicit;
    let sys = LinearizedSystem::new(&cfg_sys)?;
    let steps = cfg.steps()?;
    if 2.0 * cfg.t_final > grid.x_max() {
        return Err(Error::Horizon(format!(
            "2T = {} exceeds the half-width {}",
            2.0 * cfg.t_final,
            grid.x_max()
        )));
    }
    let opts = cfg.newton();
    let mut st = LinearizedState {
        u: u0.to_vec(),
        v: MeasureSolution::from_function(v0, grid)?,
        t: 0.0,
    };
    let mut guard = Containment::new(cfg, u0, v0);
    let mut records = vec![sys.record(&st, &cfg_sys)?];
    observe(&sys, &st)?;
    for step in 1..=steps {
        let t0 = st.t;
        let t1 = step as f64 * cfg.dt;
        let res: Result<()> = (|| {
            let mid = explicit_v_eps0(v0, 0.5 * (t0 + t1), grid)?;
            let src = sys.source(&mid);
            st.u = cn_step(&st.u, &src, cfg.dt, &sys.problem, grid, opts)?;
            let now = explicit_v_eps0(v0, t1, grid)?;
            st.v.psi.push(t1, now.psi_now())?;
            st.v.v_tilde = now.v_tilde;
            Ok(())
        })();
        res.map_err(|e| e.at(t0, step))?;
        st.t = t1;
        if cfg.is_output_step(step, steps) {
            guard.check(&st.u, t1, step)?;
            let rec = sys.record(&st, &cfg_sys)?;
            check_record(&rec.values(), step, t1)?;
            records.push(rec);
            observe(&sys, &st)?;
        }
    }
    Ok(LinearizedRun {
        state: st,
        records,
        boundary_max: guard.seen,
    })
}

/// Positive coupling: split Crank–Nicolson and transport steps.
pub fn run_linearized_eps(cfg: &SimConfig, u0: &[C64], v0: &[f64]) -> Result<LinearizedRun> {
    run_linearized_eps_observed(cfg, u0, v0, |_, _| Ok(()))
}

fn run_linearized_eps_observed<F>(cfg: &SimConfig, u0: &[C64], v0: &[f64], mut observe: F) -> Result<LinearizedRun>
where
    F: FnMut(&LinearizedSystem, &LinearizedState) -> Result<()>,
{
    if !(cfg.wave.eps > 0.0) {
        return Err(Error::Config(format!(
            "split linearized run requires eps > 0, got {}",
            cfg.wave.eps
        )));
    }
    let grid = &cfg.grid;
    grid.check(u0)?;
    grid.check(v0)?;
    let sys = LinearizedSystem::new(cfg)?;
    let steps = cfg.steps()?;
    let opts = cfg.newton();
    let v = match cfg.v_mode {
        VMode::Decomposed => MeasureSolution::from_function(v0, grid)?,
        VMode::Regularized => MeasureSolution {
            v_tilde: v0.to_vec(),
            psi: TimeSeries::starting_with(0.0),
        },
    };
    let mut st = LinearizedState {
        u: u0.to_vec(),
        v,
        t: 0.0,
    };
    let mut guard = Containment::new(cfg, u0, v0);
    let mut records = vec![sys.record(&st, cfg)?];
    observe(&sys, &st)?;
    for step in 1..=steps {
        let t0 = st.t;
        let res: Result<()> = (|| {
            match cfg.splitting {
                Splitting::Strang => {
                    sys.hyperbolic_substep(&mut st, 0.5 * cfg.dt, cfg)?;
                    st.u = cn_step(&st.u, &sys.source(&st.v), cfg.dt, &sys.problem, grid, opts)?;
                    sys.hyperbolic_substep(&mut st, 0.5 * cfg.dt, cfg)?;
                }
                Splitting::Lie => {
                    sys.hyperbolic_substep(&mut st, cfg.dt, cfg)?;
                    st.u = cn_step(&st.u, &sys.source(&st.v), cfg.dt, &sys.problem, grid, opts)?;
                }
            }
            Ok(())
        })();
        res.map_err(|e| e.at(t0, step))?;
        st.t = step as f64 * cfg.dt;
        if cfg.is_output_step(step, steps) {
            guard.check(&st.u, st.t, step)?;
            let rec = sys.record(&st, cfg)?;
            check_record(&rec.values(), step, st.t)?;
            records.push(rec);
            observe(&sys, &st)?;
        }
    }
    Ok(LinearizedRun {
        state: st,
        records,
        boundary_max: guard.seen,
    })
}

/// Decomposed transport of `v0` with coefficient `2φ` and no source: the
/// long-wave part of the zero-coupling linearization computed by the
/// numerical scheme instead of the closed form.
pub fn run_decomposed_transport(cfg: &SimConfig, v0: &[f64]) -> Result<MeasureSolution> {
    let mut c = cfg.clone();
    c.v_mode = VMode::Decomposed;
    c.transport = Transport::Explicit;
    let sys = LinearizedSystem::new(&c)?;
    let grid = &cfg.grid;
    let zero = vec![0.0; grid.len()];
    let mut ms = MeasureSolution::from_function(v0, grid)?;
    for step in 1..=c.steps()? {
        step_decomposed(&mut ms, &sys.coeff, &zero, sys.wave.phi_traces(), c.dt, grid, c.flux)
            .map_err(|e| e.at((step - 1) as f64 * c.dt, step))?;
    }
    Ok(ms)
}

/// Gaussian `e^{-x²}` as complex and real data.
pub fn gaussian_data(grid: &Grid1D, scale: f64) -> (ComplexField, RealField) {
    let g = grid.sample(|x| scale * (-x * x).exp());
    (g.iter().map(|&v| C64::new(v, 0.0)).collect(), g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(eps: f64, mode: VMode) -> SimConfig {
        let grid = Grid1D::new(8.0, 401).unwrap();
        SimConfig {
            grid,
            dt: 1e-3,
            t_final: 0.2,
            wave: WaveParams { b: -1.5, eps, a: 1.0, c: 1.0 },
            mollify_width: 10.0 * grid.h(),
            v_mode: mode,
            output_every: 20,
            ..SimConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        let c = SimConfig {
            dt: 3e-4,
            ..SimConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = SimConfig::default();
        c.mollify_width = c.grid.h();
        assert!(matches!(c.validate(), Err(Error::Resolution { .. })));
        let mut c = SimConfig {
            transport: Transport::Central,
            ..SimConfig::default()
        };
        assert!(c.validate().is_err());
        c.v_mode = VMode::Regularized;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn zero_data_stays_zero() {
        for (eps, mode) in [(0.0, VMode::Decomposed), (0.1, VMode::Decomposed), (0.1, VMode::Regularized)] {
            let cfg = small(eps, mode);
            let (u0, v0) = gaussian_data(&cfg.grid, 0.0);
            let run = run_linearized(&cfg, &u0, &v0).unwrap();
            for r in &run.records {
                assert!(r.values()[1..].iter().all(|v| v.abs() <= 1e-12));
                assert!(r.shock_energy <= 1e-20);
            }
        }
    }

    #[test]
    fn doubling_data_doubles_solution() {
        for (eps, mode) in [(0.0, VMode::Decomposed), (0.1, VMode::Decomposed), (0.1, VMode::Regularized)] {
            let cfg = small(eps, mode);
            let (u1, v1) = gaussian_data(&cfg.grid, 1.0);
            let (u2, v2) = gaussian_data(&cfg.grid, 2.0);
            let a = run_linearized(&cfg, &u1, &v1).unwrap_or_else(|e| panic!("{eps} {mode:?} {e}"));
            let b = run_linearized(&cfg, &u2, &v2).unwrap();
            for (x, y) in a.state.u.iter().zip(&b.state.u) {
                assert!((2.0 * x - y).norm() <= 1e-10 * y.norm().max(1e-3));
            }
            assert!((2.0 * a.state.v.psi_now() - b.state.v.psi_now()).abs() <= 1e-10);
        }
    }

    #[test]
    fn full_run_at_zero_coupling_keeps_shock() {
        let cfg = small(0.0, VMode::Decomposed);
        let wave = cfg.reference_wave().unwrap();
        let u0: ComplexField = wave.r.iter().map(|&r| C64::new(r, 0.0)).collect();
        let run = run_full(&cfg, &u0, &wave.phi).unwrap();
        let v = &run.state.v;
        let n = v.len();
        assert_eq!(v[cfg.grid.center()], 0.0);
        for k in 0..n / 2 {
            assert_eq!(v[k], -v[n - 1 - k]);
            assert!(v[k] > 0.0 && v[k] <= 1.0);
        }
        let m0 = run.records[0].mass;
        assert!((run.records.last().unwrap().mass - m0).abs() <= 1e-10 * m0);
    }

    #[test]
    fn divergence_reports_step() {
        let mut cfg = small(0.1, VMode::Decomposed);
        cfg.dt = 0.01;
        cfg.t_final = 0.1;
        let wave = cfg.reference_wave().unwrap();
        let u0: ComplexField = wave.r.iter().map(|&r| C64::new(r, 0.0)).collect();
        let v0: RealField = wave.phi.iter().map(|p| 100.0 * p).collect();
        match run_full(&cfg, &u0, &v0) {
            Err(e @ Error::AtStep { .. }) => {
                assert_eq!(e.exit_code(), 2);
                assert!(matches!(e.root(), Error::StepSize { .. }));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn source_free_shock_energy_does_not_grow() {
        let mut cfg = small(0.1, VMode::Decomposed);
        cfg.t_final = 0.5;
        let (_, v0) = gaussian_data(&cfg.grid, 1.0);
        let c = cfg.clone();
        // u ≡ 0, so the transport source vanishes
        let sys = LinearizedSystem::new(&c).unwrap();
        let zero = vec![0.0; c.grid.len()];
        let mut ms = MeasureSolution::from_function(&v0, &c.grid).unwrap();
        let mut last = weighted_shock_energy(&ms.v_tilde, &sys.phi, &c.grid).unwrap();
        for _ in 0..c.steps().unwrap() {
            step_decomposed(&mut ms, &sys.coeff, &zero, sys.wave.phi_traces(), c.dt, &c.grid, c.flux).unwrap();
            let e = weighted_shock_energy(&ms.v_tilde, &sys.phi, &c.grid).unwrap();
            assert!(e <= last * (1.0 + 1e-3));
            last = e;
        }
    }
}
