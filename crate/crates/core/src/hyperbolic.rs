//! Transport solvers for the long wave `v`.
//!
//! Burgers `v_t + (v²)_x = s` and linear transport `v_t + (a v)_x = s` are
//! advanced with conservative Lax–Friedrichs fluxes. The local variant
//! (Rusanov) is the default; the classic scheme with viscosity `h/dt` is
//! available for comparison. Endpoints are held fixed: for the entropy shock
//! characteristics enter the domain from both ends.
//!
//! The linearized long wave is a measure `ṽ + Ψ(t) δ₀`. In decomposed form
//! `ṽ` is advanced on each side of `x = 0` with one-sided stencils next to
//! the shock, and `Ψ' = -J` with `J = 2φ(0+)ṽ(0+) - 2φ(0-)ṽ(0-)`.

use crate::error::{Error, Result};
use crate::numerics::{dx_central, Grid1D, RealField, TimeSeries, C64};

/// Numerical flux of the explicit schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Flux {
    /// Local Lax–Friedrichs: viscosity from the local wave speed.
    #[default]
    LocalLaxFriedrichs,
    /// Classic Lax–Friedrichs: viscosity `h/dt`.
    LaxFriedrichs,
}

impl Flux {
    pub fn name(&self) -> &'static str {
        match self {
            Flux::LocalLaxFriedrichs => "llf",
            Flux::LaxFriedrichs => "lf",
        }
    }

    pub fn parse(s: &str) -> Option<Flux> {
        match s {
            "llf" | "rusanov" => Some(Flux::LocalLaxFriedrichs),
            "lf" => Some(Flux::LaxFriedrichs),
            _ => None,
        }
    }
}

/// `h / max|speed|`, or infinity for a zero speed field.
fn dt_max(speed_max: f64, h: f64) -> f64 {
    if speed_max > 0.0 {
        h / speed_max
    } else {
        f64::INFINITY
    }
}

fn check_cfl(dt: f64, speed_max: f64, h: f64) -> Result<()> {
    let limit = dt_max(speed_max, h);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepSize {
            dt,
            max_speed: speed_max,
            dt_max: limit,
        });
    }
    Ok(())
}

/// Admissible Burgers step `h / (2 max|v|)`.
pub fn burgers_dt_max(v: &[f64], grid: &Grid1D) -> f64 {
    dt_max(2.0 * v.iter().fold(0.0f64, |m, x| m.max(x.abs())), grid.h())
}

/// Conservative update of interior nodes with interface fluxes
/// `½(f_k + f_{k+1}) - ½ α_{k+½} (v_{k+1} - v_k)`. Endpoints are held.
fn conservative_update(v: &[f64], f: &[f64], speed: &[f64], src: &[f64], dt: f64, h: f64, flux: Flux) -> RealField {
    let n = v.len();
    let iface: Vec<f64> = (0..n - 1)
        .map(|k| {
            let alpha = match flux {
                Flux::LocalLaxFriedrichs => speed[k].abs().max(speed[k + 1].abs()),
                Flux::LaxFriedrichs => h / dt,
            };
            0.5 * (f[k] + f[k + 1]) - 0.5 * alpha * (v[k + 1] - v[k])
        })
        .collect();
    let mut out = v.to_vec();
    for k in 1..n - 1 {
        out[k] = v[k] - dt / h * (iface[k] - iface[k - 1]) + dt * src[k];
    }
    out
}

/// One step of `v_t + (v²)_x = ε (|u|²)_x`, source by central differences.
pub fn lf_step_burgers(v: &[f64], u: &[C64], dt: f64, eps: f64, grid: &Grid1D, flux: Flux) -> Result<RealField> {
    grid.check(v)?;
    grid.check(u)?;
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    check_cfl(dt, 2.0 * vmax, grid.h())?;
    let src = if eps == 0.0 {
        vec![0.0; v.len()]
    } else {
        let rho: Vec<f64> = u.iter().map(|z| z.norm_sqr()).collect();
        dx_central(&rho, grid)?.into_iter().map(|d| eps * d).collect()
    };
    let f: Vec<f64> = v.iter().map(|x| x * x).collect();
    let speed: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
    let out = conservative_update(v, &f, &speed, &src, dt, grid.h(), flux);
    finite(out, "Burgers step")
}

fn finite(v: RealField, location: &str) -> Result<RealField> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::Divergence {
            location: location.into(),
        })
    }
}

/// One explicit step of `v_t + (a v)_x = s` on the whole grid.
pub fn lf_step_transport(v: &[f64], coeff: &[f64], source: &[f64], dt: f64, grid: &Grid1D, flux: Flux) -> Result<RealField> {
    grid.check(v)?;
    grid.check(coeff)?;
    grid.check(source)?;
    let amax = coeff.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    check_cfl(dt, amax, grid.h())?;
    let f: Vec<f64> = v.iter().zip(coeff).map(|(v, a)| a * v).collect();
    finite(conservative_update(v, &f, coeff, source, dt, grid.h(), flux), "transport step")
}

/// Crank–Nicolson in time with central differences in space for
/// `v_t + (a v)_x = s`. Non-dissipative; endpoints held.
pub fn cn_step_transport(v: &[f64], coeff: &[f64], source: &[f64], dt: f64, grid: &Grid1D) -> Result<RealField> {
    grid.check(v)?;
    grid.check(coeff)?;
    grid.check(source)?;
    let n = v.len();
    let lam = dt / (4.0 * grid.h());
    let mut sub = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = v.to_vec();
    for k in 1..n - 1 {
        sub[k] = -lam * coeff[k - 1];
        sup[k] = lam * coeff[k + 1];
        rhs[k] = v[k] - lam * (coeff[k + 1] * v[k + 1] - coeff[k - 1] * v[k - 1]) + dt * source[k];
    }
    diag[0] = 1.0;
    diag[n - 1] = 1.0;
    let out = crate::numerics::thomas(&sub, &diag, &sup, &rhs)?;
    finite(out, "transport step")
}

/// Linearized long wave `ṽ + Ψ(t) δ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSolution {
    pub v_tilde: RealField,
    pub psi: TimeSeries,
}

impl MeasureSolution {
    /// Plain function data: `Ψ(0) = 0`, centre node cleared.
    pub fn from_function(v0: &[f64], grid: &Grid1D) -> Result<Self> {
        grid.check(v0)?;
        let mut v_tilde = v0.to_vec();
        v_tilde[grid.center()] = 0.0;
        Ok(MeasureSolution {
            v_tilde,
            psi: TimeSeries::starting_with(0.0),
        })
    }

    pub fn time(&self) -> f64 {
        self.psi.last().map(|(t, _)| t).unwrap_or(0.0)
    }

    pub fn psi_now(&self) -> f64 {
        self.psi.last().map(|(_, p)| p).unwrap_or(0.0)
    }

    /// `ṽ` with the centre slot excluded.
    pub fn off_shock(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let m = self.v_tilde.len() / 2;
        self.v_tilde.iter().copied().enumerate().filter(move |&(k, _)| k != m)
    }
}

/// Integral of the piecewise-linear interpolant of `f` over `[a, b]`.
pub fn integrate_interpolant(f: &[f64], grid: &Grid1D, a: f64, b: f64) -> f64 {
    let h = grid.h();
    integrate_cells(f, grid, a, b, |k, lo, hi| {
        let xl = grid.x(k);
        let val = |x: f64| f[k] + (f[k + 1] - f[k]) * (x - xl) / h;
        0.5 * (hi - lo) * (val(lo) + val(hi))
    })
}

/// Integral over `[a, b]` of the piecewise cubic through the four nodes
/// around each cell (shifted inward at the ends). Fourth order for smooth
/// `f`, exact for cubics.
pub fn integrate_cubic_interpolant(f: &[f64], grid: &Grid1D, a: f64, b: f64) -> f64 {
    if f.len() < 4 {
        return integrate_interpolant(f, grid, a, b);
    }
    let g = 0.5 / 3f64.sqrt();
    integrate_cells(f, grid, a, b, |k, lo, hi| {
        let j = k.saturating_sub(1).min(f.len() - 4);
        let nodes = [grid.x(j), grid.x(j + 1), grid.x(j + 2), grid.x(j + 3)];
        let val = |x: f64| {
            (0..4)
                .map(|i| {
                    let w: f64 = (0..4)
                        .filter(|&l| l != i)
                        .map(|l| (x - nodes[l]) / (nodes[i] - nodes[l]))
                        .product();
                    w * f[j + i]
                })
                .sum::<f64>()
        };
        let (mid, len) = (0.5 * (lo + hi), hi - lo);
        0.5 * len * (val(mid - g * len) + val(mid + g * len))
    })
}

fn integrate_cells<F: Fn(usize, f64, f64) -> f64>(f: &[f64], grid: &Grid1D, a: f64, b: f64, piece: F) -> f64 {
    if b < a {
        return -integrate_cells(f, grid, b, a, piece);
    }
    let h = grid.h();
    let x0 = grid.x_min();
    let a = a.max(x0);
    let b = b.min(grid.x_max());
    if b <= a {
        return 0.0;
    }
    let ka = (((a - x0) / h).floor() as usize).min(f.len() - 2);
    let kb = (((b - x0) / h).ceil() as usize).clamp(1, f.len() - 1);
    let mut acc = 0.0;
    for k in ka..kb {
        let lo = a.max(grid.x(k));
        let hi = b.min(grid.x(k + 1));
        if hi > lo {
            acc += piece(k, lo, hi);
        }
    }
    acc
}

/// Closed-form linearized solution for zero coupling:
/// `ṽ(t, x) = v0(x ∓ 2t)` on `x ≷ 0` and `Ψ(t) = ∫_{-2t}^{2t} v0`.
pub fn explicit_v_eps0(v0: &[f64], t: f64, grid: &Grid1D) -> Result<MeasureSolution> {
    grid.check(v0)?;
    if !(t >= 0.0) {
        return Err(Error::Horizon(format!("negative time {t}")));
    }
    if 2.0 * t > grid.x_max() {
        return Err(Error::Horizon(format!(
            "2t = {} exceeds the half-width {}",
            2.0 * t,
            grid.x_max()
        )));
    }
    let m = grid.center();
    let v_tilde = (0..grid.len())
        .map(|k| {
            let x = grid.x(k);
            if k == m {
                0.0
            } else if t == 0.0 {
                v0[k]
            } else if x < 0.0 {
                crate::numerics::interpolate(v0, grid, x - 2.0 * t)
            } else {
                crate::numerics::interpolate(v0, grid, x + 2.0 * t)
            }
        })
        .collect();
    let mut psi = TimeSeries::starting_with(0.0);
    if t > 0.0 {
        psi.push(t, explicit_psi(v0, t, grid))?;
    }
    Ok(MeasureSolution { v_tilde, psi })
}

/// `Ψ(t) = ∫_{-2t}^{2t} v0` for the cubic interpolant of `v0`.
pub fn explicit_psi(v0: &[f64], t: f64, grid: &Grid1D) -> f64 {
    integrate_cubic_interpolant(v0, grid, -2.0 * t, 2.0 * t)
}

/// One-sided limits `ṽ(0-)`, `ṽ(0+)` by linear extrapolation from the two
/// nearest nodes on each side.
pub fn traces(v_tilde: &[f64], grid: &Grid1D) -> (f64, f64) {
    let m = grid.center();
    (
        2.0 * v_tilde[m - 1] - v_tilde[m - 2],
        2.0 * v_tilde[m + 1] - v_tilde[m + 2],
    )
}

/// `J = 2φ(0+)ṽ(0+) - 2φ(0-)ṽ(0-)` with `phi_traces = (φ(0-), φ(0+))`.
pub fn jump_source(v_tilde: &[f64], phi_traces: (f64, f64), grid: &Grid1D) -> f64 {
    let (vl, vr) = traces(v_tilde, grid);
    2.0 * phi_traces.1 * vr - 2.0 * phi_traces.0 * vl
}

/// Append `Ψ(t + dt) = Ψ(t) - dt (J(t) + J(t + dt)) / 2`.
pub fn psi_update(ms: &mut MeasureSolution, dt: f64, j_old: f64, j_new: f64) -> Result<()> {
    let (t, psi) = (ms.time(), ms.psi_now());
    ms.psi.push(t + dt, psi - 0.5 * dt * (j_old + j_new))
}

/// Advance `ṽ` of `v_t + (a v)_x = s` off the shock. Nodes next to `x = 0`
/// use one-sided upwind differences toward the shock and the centre slot
/// stays zero, so nothing crosses `x = 0`. `Ψ` is left untouched.
pub fn lf_step_linear(
    ms: &MeasureSolution,
    coeff: &[f64],
    source: &[f64],
    dt: f64,
    grid: &Grid1D,
    flux: Flux,
) -> Result<MeasureSolution> {
    let m = grid.center();
    if grid.len() < 7 {
        return Err(Error::Grid("decomposed transport needs at least 7 nodes".into()));
    }
    if !(coeff[m - 1] > 0.0 && coeff[m + 1] < 0.0) {
        return Err(Error::Domain(format!(
            "characteristics must enter the shock: a(0-) = {}, a(0+) = {}",
            coeff[m - 1],
            coeff[m + 1]
        )));
    }
    let v = &ms.v_tilde;
    let mut out = lf_step_transport(v, coeff, source, dt, grid, flux)?;
    let h = grid.h();
    let f = |k: usize| coeff[k] * v[k];
    out[m - 1] = v[m - 1] - dt / h * (f(m - 1) - f(m - 2)) + dt * source[m - 1];
    out[m + 1] = v[m + 1] - dt / h * (f(m + 2) - f(m + 1)) + dt * source[m + 1];
    out[m] = 0.0;
    Ok(MeasureSolution {
        v_tilde: finite(out, "decomposed transport step")?,
        psi: ms.psi.clone(),
    })
}

/// Full decomposed step: transport of `ṽ` and trapezoidal update of `Ψ`.
pub fn step_decomposed(
    ms: &mut MeasureSolution,
    coeff: &[f64],
    source: &[f64],
    phi_traces: (f64, f64),
    dt: f64,
    grid: &Grid1D,
    flux: Flux,
) -> Result<()> {
    let j_old = jump_source(&ms.v_tilde, phi_traces, grid);
    let next = lf_step_linear(ms, coeff, source, dt, grid, flux)?;
    let j_new = jump_source(&next.v_tilde, phi_traces, grid);
    ms.v_tilde = next.v_tilde;
    psi_update(ms, dt, j_old, j_new)
}

/// Total variation `Σ |v_{k+1} - v_k|`.
pub fn total_variation(v: &[f64]) -> f64 {
    v.windows(2).map(|p| (p[1] - p[0]).abs()).sum()
}
