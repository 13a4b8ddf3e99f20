//! Crank–Nicolson stepping for
//!
//! ```text
//! i u_t + u_xx = a1 u + a2 ū + S - ε_c |u|² u
//! ```
//!
//! The unknown is the midpoint `w = (uⁿ + uⁿ⁺¹)/2`. Because of the `a2 ū`
//! term the system is only ℝ-linear, so each Newton update solves a real
//! block-tridiagonal system in `(Re w, Im w)` with 2×2 diagonal blocks.
//!
//! Endpoints follow the real-ratio closure `u₀ = β_L u₁`,
//! `u_{n-1} = β_R u_{n-2}`. With `β = 0` this is the homogeneous Dirichlet
//! condition; with `β = r(x₀)/r(x₁)` a reference profile is reproduced exactly
//! at the edge. Any real ratio keeps the discrete Laplacian symmetric, so the
//! mass of the interior nodes is conserved.

use crate::error::{Error, Result};
use crate::numerics::{all_finite, block_thomas, Block2, ComplexField, Grid1D, RealField, C64};

/// Endpoint ratios of the boundary closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryClosure {
    pub left: f64,
    pub right: f64,
}

impl BoundaryClosure {
    pub const DIRICHLET: BoundaryClosure = BoundaryClosure { left: 0.0, right: 0.0 };

    /// Ratios that make `profile` satisfy the closure. Falls back to zero
    /// where the neighbouring value is negligible.
    pub fn from_profile(profile: &[f64]) -> BoundaryClosure {
        let n = profile.len();
        let scale = profile.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ratio = |edge: f64, inner: f64| {
            if inner.abs() > 1e-8 * scale && (edge / inner).abs() <= 2.0 {
                edge / inner
            } else {
                0.0
            }
        };
        if n < 4 {
            return Self::DIRICHLET;
        }
        BoundaryClosure {
            left: ratio(profile[0], profile[1]),
            right: ratio(profile[n - 1], profile[n - 2]),
        }
    }
}

impl Default for BoundaryClosure {
    fn default() -> Self {
        Self::DIRICHLET
    }
}

/// Coefficients of the Schrödinger equation. The source is passed per step.
#[derive(Debug, Clone)]
pub struct SchrodingerProblem {
    pub a1: RealField,
    pub a2: RealField,
    pub cubic_eps: f64,
    pub boundary: BoundaryClosure,
}

impl SchrodingerProblem {
    /// Free equation `i u_t + u_xx = 0`.
    pub fn free(grid: &Grid1D) -> Self {
        SchrodingerProblem {
            a1: vec![0.0; grid.len()],
            a2: vec![0.0; grid.len()],
            cubic_eps: 0.0,
            boundary: BoundaryClosure::DIRICHLET,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.cubic_eps == 0.0
    }

    fn check(&self, grid: &Grid1D) -> Result<()> {
        grid.check(&self.a1)?;
        grid.check(&self.a2)?;
        if !(self.cubic_eps >= 0.0) {
            return Err(Error::UnsupportedParameter(format!(
                "cubic coefficient must be nonnegative, got {}",
                self.cubic_eps
            )));
        }
        Ok(())
    }
}

/// Newton stopping rule. The residual is measured in the discrete L² norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-12,
            max_iter: 50,
        }
    }
}

/// Outcome of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
}

/// One Crank–Nicolson step. `source` is `S(t + dt/2)`; an empty slice means
/// no source.
pub fn cn_step(
    u: &[C64],
    source: &[C64],
    dt: f64,
    prob: &SchrodingerProblem,
    grid: &Grid1D,
    opts: NewtonOptions,
) -> Result<ComplexField> {
    cn_step_detailed(u, source, dt, prob, grid, opts).map(|(u, _)| u)
}

/// As [`cn_step`] with the source given as a function of time, sampled at
/// the midpoint.
pub fn cn_step_at<F>(
    u: &[C64],
    t: f64,
    dt: f64,
    prob: &SchrodingerProblem,
    grid: &Grid1D,
    source: F,
    opts: NewtonOptions,
) -> Result<ComplexField>
where
    F: Fn(f64) -> ComplexField,
{
    let s = source(t + 0.5 * dt);
    cn_step(u, &s, dt, prob, grid, opts)
}

/// As [`cn_step`], also reporting Newton iterations and the final residual.
pub fn cn_step_detailed(
    u: &[C64],
    source: &[C64],
    dt: f64,
    prob: &SchrodingerProblem,
    grid: &Grid1D,
    opts: NewtonOptions,
) -> Result<(ComplexField, NewtonReport)> {
    grid.check(u)?;
    prob.check(grid)?;
    if !source.is_empty() {
        grid.check(source)?;
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    if !all_finite(u) {
        return Err(Error::Divergence {
            location: "Schrödinger input".into(),
        });
    }
    let n = grid.len();
    let ni = n - 2;
    let h2 = grid.h() * grid.h();
    let c = 0.5 * dt;
    let eps = prob.cubic_eps;
    let (bl, br) = (prob.boundary.left, prob.boundary.right);
    let zero = C64::new(0.0, 0.0);
    let src = |k: usize| if source.is_empty() { zero } else { source[k] };

    // diagonal correction of the Laplacian from the closure
    let dl = |j: usize| {
        let mut d = 0.0;
        if j == 0 {
            d += bl / h2;
        }
        if j == ni - 1 {
            d += br / h2;
        }
        d
    };

    let un = &u[1..n - 1];
    let mut w: Vec<C64> = un.to_vec();
    let residual = |w: &[C64], out: &mut Vec<C64>| {
        out.clear();
        for j in 0..ni {
            let k = j + 1;
            let left = if j == 0 { zero } else { w[j - 1] };
            let right = if j + 1 == ni { zero } else { w[j + 1] };
            let lap = (left + right - 2.0 * w[j]) / h2 + dl(j) * w[j];
            let cubic = eps * w[j].norm_sqr() * w[j];
            let op = lap - prob.a1[k] * w[j] - prob.a2[k] * w[j].conj() - src(k) + cubic;
            out.push(C64::i() * (w[j] - un[j]) + c * op);
        }
    };
    let norm = |r: &[C64]| (grid.h() * r.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();

    let off = vec![c / h2; ni];
    let mut diag: Vec<Block2> = vec![[[0.0; 2]; 2]; ni];
    let mut rhs = vec![[0.0; 2]; ni];
    let mut r = Vec::with_capacity(ni);
    let mut iterations = 0;
    let mut res;
    loop {
        residual(&w, &mut r);
        res = norm(&r);
        if !res.is_finite() {
            return Err(Error::Divergence {
                location: "Newton residual".into(),
            });
        }
        let done = if prob.is_linear() {
            iterations == 1
        } else {
            res <= opts.tol
        };
        if done {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(Error::Convergence {
                iterations,
                residual: res,
            });
        }
        for j in 0..ni {
            let k = j + 1;
            let (p, q) = (w[j].re, w[j].im);
            let base = -2.0 / h2 + dl(j) - prob.a1[k];
            let cross = c * eps * 2.0 * p * q;
            diag[j] = [
                [
                    c * (base - prob.a2[k] + eps * (3.0 * p * p + q * q)),
                    -1.0 + cross,
                ],
                [
                    1.0 + cross,
                    c * (base + prob.a2[k] + eps * (p * p + 3.0 * q * q)),
                ],
            ];
            rhs[j] = [-r[j].re, -r[j].im];
        }
        let d = block_thomas(&off, &diag, &off, &rhs)?;
        for (wj, dj) in w.iter_mut().zip(&d) {
            *wj += C64::new(dj[0], dj[1]);
        }
        iterations += 1;
    }

    let mut out = vec![zero; n];
    for j in 0..ni {
        out[j + 1] = 2.0 * w[j] - un[j];
    }
    out[0] = bl * out[1];
    out[n - 1] = br * out[n - 2];
    if !all_finite(&out) {
        return Err(Error::Divergence {
            location: "Schrödinger step".into(),
        });
    }
    Ok((
        out,
        NewtonReport {
            iterations,
            residual: res,
        },
    ))
}

/// `h Σ |u_k|²` over interior nodes. The endpoints are slaved to their
/// neighbours by the closure and carry no mass; for fields vanishing at the
/// ends this is the squared trapezoid L² norm.
pub fn mass(u: &[C64], grid: &Grid1D) -> Result<f64> {
    grid.check(u)?;
    let n = u.len();
    Ok(grid.h() * u[1..n - 1].iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// Right-hand side of `½ d/dt ∫|u|² = Im ∫ a2 ū² + Im ∫ S ū`, with the same
/// interior quadrature as [`mass`].
pub fn mass_rate_diagnostic(u: &[C64], source: &[C64], prob: &SchrodingerProblem, grid: &Grid1D) -> Result<f64> {
    grid.check(u)?;
    prob.check(grid)?;
    if !source.is_empty() {
        grid.check(source)?;
    }
    let n = u.len();
    let mut acc = 0.0;
    for k in 1..n - 1 {
        let ub = u[k].conj();
        acc += (prob.a2[k] * ub * ub).im;
        if !source.is_empty() {
            acc += (source[k] * ub).im;
        }
    }
    Ok(grid.h() * acc)
}

/// Coefficient fields of the quadratic energy functional.
#[derive(Debug, Clone, Copy)]
pub struct EnergyCoeffs<'a> {
    pub a1: &'a [f64],
    pub a2: &'a [f64],
    pub a3: &'a [f64],
    pub a4: &'a [f64],
    /// Weight `c` of the transport source `c (a3 Re u)_x`; the `v²` term is
    /// divided by it.
    pub coupling: f64,
}

/// `∫ |u_x|² + a1|u|² + Re(a2 u²) + 2 a3 v Re u - a4 v²/c`.
///
/// `|u_x|²` uses forward differences so that it matches the discrete
/// Laplacian; the remaining terms use the trapezoid rule.
pub fn energy_diagnostic(u: &[C64], v: &[f64], coeffs: &EnergyCoeffs<'_>, grid: &Grid1D) -> Result<f64> {
    for f in [coeffs.a1, coeffs.a2, coeffs.a3, coeffs.a4, v] {
        grid.check(f)?;
    }
    grid.check(u)?;
    if !(coeffs.coupling > 0.0) {
        return Err(Error::UnsupportedParameter(format!(
            "energy coupling must be positive, got {}",
            coeffs.coupling
        )));
    }
    let h = grid.h();
    let grad: f64 = u.windows(2).map(|p| (p[1] - p[0]).norm_sqr()).sum::<f64>() / h;
    let density: Vec<f64> = (0..u.len())
        .map(|k| {
            coeffs.a1[k] * u[k].norm_sqr()
                + (coeffs.a2[k] * u[k] * u[k]).re
                + 2.0 * coeffs.a3[k] * v[k] * u[k].re
                - coeffs.a4[k] * v[k] * v[k] / coeffs.coupling
        })
        .collect();
    Ok(grad + crate::numerics::trapezoid(&density, h))
}
