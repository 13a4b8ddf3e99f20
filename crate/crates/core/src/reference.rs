//! Stationary reference solution `(e^{ibt} r(x), φ(x))`.
//!
//! For zero coupling the profile `r` is known in closed form on each side of
//! the shock; for positive coupling it is integrated outward from `x = 0`.

use crate::error::{Error, Result};
use crate::numerics::{Grid1D, RealField};

/// Parameters of the reference wave: frequency `b`, coupling `eps`,
/// `r(0) = a` and the slope coefficient `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    pub b: f64,
    pub eps: f64,
    pub a: f64,
    pub c: f64,
}

impl WaveParams {
    pub fn new(b: f64, eps: f64, a: f64, c: f64) -> Result<Self> {
        let p = WaveParams { b, eps, a, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b < 1.0) {
            return Err(Error::UnsupportedParameter(format!(
                "no reference profile for b = {} (need b < 1)",
                self.b
            )));
        }
        if !(self.eps >= 0.0) {
            return Err(Error::UnsupportedParameter(format!(
                "coupling must be nonnegative, got {}",
                self.eps
            )));
        }
        if !(self.a.is_finite() && self.c.is_finite()) {
            return Err(Error::UnsupportedParameter("non-finite A or C".into()));
        }
        Ok(())
    }

    /// `r'(0)` of the zero-coupling profile; also the initial slope for the
    /// coupled profile.
    pub fn slope_at_zero(&self) -> f64 {
        if self.b <= -1.0 {
            self.c * (1.0 + self.b).abs().sqrt()
        } else {
            self.a * (1.0 + self.b).sqrt()
        }
    }

    /// `|φ(0±)| = sqrt(ε A² + 1)`.
    pub fn shock_strength(&self) -> f64 {
        (self.eps * self.a * self.a + 1.0).sqrt()
    }

    pub fn with_eps(&self, eps: f64) -> WaveParams {
        WaveParams { eps, ..*self }
    }
}

/// One-step integrator used for the coupled profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Classical fourth-order Runge–Kutta.
    Rk4,
    /// Explicit Euler on the first-order system.
    Euler,
}

impl Integrator {
    pub fn name(&self) -> &'static str {
        match self {
            Integrator::Rk4 => "rk4",
            Integrator::Euler => "euler",
        }
    }

    pub fn parse(s: &str) -> Option<Integrator> {
        match s {
            "rk4" => Some(Integrator::Rk4),
            "euler" => Some(Integrator::Euler),
            _ => None,
        }
    }
}

/// Sampled reference wave.
#[derive(Debug, Clone)]
pub struct ReferenceWave {
    pub params: WaveParams,
    pub grid: Grid1D,
    pub r: RealField,
    pub r_prime: RealField,
    pub phi: RealField,
}

impl ReferenceWave {
    /// Closed form when `eps = 0`, fourth-order integration otherwise.
    pub fn build(params: WaveParams, grid: &Grid1D, substeps: usize) -> Result<Self> {
        if params.eps == 0.0 {
            closed_form_r(params, grid)
        } else {
            integrate_r_eps(params, grid, substeps, Integrator::Rk4)
        }
    }

    /// `φ(0-)` and `φ(0+)`.
    pub fn phi_traces(&self) -> (f64, f64) {
        let s = self.params.shock_strength();
        (s, -s)
    }

    pub fn r_at_zero(&self) -> f64 {
        self.r[self.grid.center()]
    }
}

/// `sgn` with `sgn(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Closed-form `(r, r')` at a single point for zero coupling.
pub fn closed_form_point(p: &WaveParams, x: f64) -> (f64, f64) {
    let (a, c, b) = (p.a, p.c, p.b);
    let w = (1.0 - b).sqrt();
    if b <= -1.0 {
        let k = (1.0 + b).abs().sqrt();
        if x > 0.0 {
            let cp = c * ((1.0 + b).abs() / (1.0 - b)).sqrt();
            (
                cp * (w * x).sin() + a * (w * x).cos(),
                cp * w * (w * x).cos() - a * w * (w * x).sin(),
            )
        } else {
            (
                c * (k * x).sin() + a * (k * x).cos(),
                c * k * (k * x).cos() - a * k * (k * x).sin(),
            )
        }
    } else {
        let k = (1.0 + b).sqrt();
        if x > 0.0 {
            let cp = a * ((b + 1.0) / (1.0 - b)).sqrt();
            (
                cp * (w * x).sin() + a * (w * x).cos(),
                cp * w * (w * x).cos() - a * w * (w * x).sin(),
            )
        } else {
            let e = (k * x).exp();
            (a * e, a * k * e)
        }
    }
}

/// Reference wave for `eps = 0` sampled from the closed forms. `r'` comes
/// from the analytic derivative.
pub fn closed_form_r(p: WaveParams, grid: &Grid1D) -> Result<ReferenceWave> {
    p.validate()?;
    if p.eps != 0.0 {
        return Err(Error::UnsupportedParameter(format!(
            "closed form requires eps = 0, got {}",
            p.eps
        )));
    }
    let (r, r_prime): (Vec<f64>, Vec<f64>) = grid
        .coords()
        .into_iter()
        .map(|x| closed_form_point(&p, x))
        .unzip();
    let mut wave = ReferenceWave {
        params: p,
        grid: *grid,
        r,
        r_prime,
        phi: Vec::new(),
    };
    wave.phi = phi_of(&wave);
    Ok(wave)
}

/// `r'' = b r - r sgn(x) sqrt(eps r² + 1) - eps r³` with `side = sgn(x)`.
fn profile_rhs(p: &WaveParams, side: f64, y: [f64; 2]) -> [f64; 2] {
    let r = y[0];
    [
        y[1],
        p.b * r - side * r * (p.eps * r * r + 1.0).sqrt() - p.eps * r * r * r,
    ]
}

fn step(p: &WaveParams, side: f64, y: [f64; 2], dx: f64, method: Integrator) -> [f64; 2] {
    let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    match method {
        Integrator::Euler => add(y, profile_rhs(p, side, y), dx),
        Integrator::Rk4 => {
            let k1 = profile_rhs(p, side, y);
            let k2 = profile_rhs(p, side, add(y, k1, 0.5 * dx));
            let k3 = profile_rhs(p, side, add(y, k2, 0.5 * dx));
            let k4 = profile_rhs(p, side, add(y, k3, dx));
            [
                y[0] + dx / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + dx / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ]
        }
    }
}

/// Integrate the profile equation outward from `x = 0` in both directions,
/// `substeps` steps per grid cell, starting from `r(0) = A` and the
/// zero-coupling slope. Also accepts `eps = 0`, which reproduces the closed
/// forms up to integration error.
pub fn integrate_r_eps(
    p: WaveParams,
    grid: &Grid1D,
    substeps: usize,
    method: Integrator,
) -> Result<ReferenceWave> {
    p.validate()?;
    if substeps == 0 {
        return Err(Error::Config("substeps must be positive".into()));
    }
    let n = grid.len();
    let m = grid.center();
    let dx = grid.h() / substeps as f64;
    let mut r = vec![0.0; n];
    let mut rp = vec![0.0; n];
    r[m] = p.a;
    rp[m] = p.slope_at_zero();

    for side in [1.0, -1.0] {
        let mut y = [p.a, p.slope_at_zero()];
        let mut k = m;
        loop {
            let next = if side > 0.0 {
                if k + 1 >= n {
                    break;
                }
                k + 1
            } else {
                if k == 0 {
                    break;
                }
                k - 1
            };
            for _ in 0..substeps {
                y = step(&p, side, y, side * dx, method);
            }
            if !(y[0].is_finite() && y[1].is_finite()) {
                return Err(Error::Divergence {
                    location: format!("reference profile at x = {}", grid.x(next)),
                });
            }
            r[next] = y[0];
            rp[next] = y[1];
            k = next;
        }
    }
    let mut wave = ReferenceWave {
        params: p,
        grid: *grid,
        r,
        r_prime: rp,
        phi: Vec::new(),
    };
    wave.phi = phi_of(&wave);
    Ok(wave)
}

/// `φ_ε(x) = -sgn(x) sqrt(ε r(x)² + 1)`, zero at the centre node.
pub fn phi_of(wave: &ReferenceWave) -> RealField {
    let eps = wave.params.eps;
    wave.r
        .iter()
        .enumerate()
        .map(|(k, &r)| -sign(wave.grid.x(k)) * (eps * r * r + 1.0).sqrt())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> Grid1D {
        Grid1D::new(22.0, 4001).unwrap()
    }

    #[test]
    fn rejects_unsupported_parameters() {
        assert!(WaveParams::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(WaveParams::new(-1.5, -0.1, 1.0, 1.0).is_err());
        let p = WaveParams::new(-1.5, 0.1, 1.0, 1.0).unwrap();
        assert!(closed_form_r(p, &grid()).is_err());
    }

    #[test]
    fn closed_form_values() {
        let g = Grid1D::new(5.0, 1001).unwrap();
        let p = WaveParams::new(-1.5, 0.0, 1.0, 1.0).unwrap();
        let w = closed_form_r(p, &g).unwrap();
        let m = g.center();
        assert_eq!(w.r[m], 1.0);
        assert_relative_eq!(w.r_prime[m], 0.5f64.sqrt(), epsilon = 1e-15);
        let k1 = m + 100; // x = 1
        assert_relative_eq!(g.x(k1), 1.0, epsilon = 1e-12);
        let want = (0.5f64 / 2.5).sqrt() * 2.5f64.sqrt().sin() + 2.5f64.sqrt().cos();
        assert_relative_eq!(w.r[k1], want, epsilon = 1e-12);
        assert!((w.r[k1] - 0.4369).abs() < 1e-4);
    }

    #[test]
    fn closed_form_one_sided_limits_agree() {
        for b in [-1.5, -0.5] {
            let p = WaveParams::new(b, 0.0, 1.0, 1.0).unwrap();
            let (rl, rpl) = closed_form_point(&p, -1e-14);
            let (rr, rpr) = closed_form_point(&p, 1e-14);
            assert!((rl - rr).abs() < 1e-10 && (rpl - rpr).abs() < 1e-10);
            assert_relative_eq!(rpl, p.slope_at_zero(), epsilon = 1e-10);
        }
    }

    #[test]
    fn high_accuracy_oracle_matches_closed_form_at_one() {
        // independent oracle: many tiny RK4 steps on the eps = 0 equation
        let p = WaveParams::new(-1.5, 0.0, 1.0, 1.0).unwrap();
        let mut y = [1.0, p.slope_at_zero()];
        let n = 20000;
        for _ in 0..n {
            y = step(&p, 1.0, y, 1.0 / n as f64, Integrator::Rk4);
        }
        assert!((y[0] - closed_form_point(&p, 1.0).0).abs() < 1e-12);
    }

    #[test]
    fn residual_of_closed_form_is_second_order() {
        // second differences of the samples against (b - sgn x) r
        let p = WaveParams::new(-1.5, 0.0, 1.0, 1.0).unwrap();
        let residual = |n: usize| {
            let g = Grid1D::new(5.0, n).unwrap();
            let w = closed_form_r(p, &g).unwrap();
            let h = g.h();
            (1..n - 1)
                .filter(|&k| k != g.center())
                .map(|k| {
                    let d2 = (w.r[k + 1] - 2.0 * w.r[k] + w.r[k - 1]) / (h * h);
                    (d2 - (p.b - sign(g.x(k))) * w.r[k]).abs()
                })
                .fold(0.0, f64::max)
        };
        let coarse = residual(401);
        let fine = residual(801);
        let ratio = coarse / fine;
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }

    #[test]
    fn integrated_profile_starts_from_closed_form_data() {
        let p = WaveParams::new(-1.5, 0.1, 1.0, 1.0).unwrap();
        let w = integrate_r_eps(p, &grid(), 4, Integrator::Rk4).unwrap();
        let m = w.grid.center();
        assert_eq!(w.r[m], 1.0);
        assert_eq!(w.r_prime[m], 0.5f64.sqrt());
        assert!(w.r.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn phi_identities() {
        let p = WaveParams::new(-1.5, 0.1, 1.0, 1.0).unwrap();
        let w = integrate_r_eps(p, &grid(), 4, Integrator::Rk4).unwrap();
        let m = w.grid.center();
        assert_eq!(w.phi[m], 0.0);
        for k in 0..w.r.len() {
            if k == m {
                continue;
            }
            let x = w.grid.x(k);
            assert!((w.phi[k] * w.phi[k] - 0.1 * w.r[k] * w.r[k] - 1.0).abs() < 1e-12);
            assert!(w.phi[k].abs() >= 1.0);
            assert_eq!(sign(w.phi[k]), -sign(x));
        }
        let (l, r) = w.phi_traces();
        assert_relative_eq!(l, 1.1f64.sqrt());
        assert_relative_eq!(r, -(1.1f64.sqrt()));

        let p0 = WaveParams::new(-1.5, 0.0, 1.0, 1.0).unwrap();
        let w0 = closed_form_r(p0, &grid()).unwrap();
        for k in 0..w0.r.len() {
            assert_eq!(w0.phi[k], -sign(w0.grid.x(k)));
        }
    }

    #[test]
    fn small_coupling_approaches_closed_form() {
        let g = grid();
        let p = WaveParams::new(-1.5, 1e-6, 1.0, 1.0).unwrap();
        let we = integrate_r_eps(p, &g, 4, Integrator::Rk4).unwrap();
        let w0 = closed_form_r(p.with_eps(0.0), &g).unwrap();
        let sup = (0..g.len())
            .filter(|&k| g.x(k).abs() <= 2.0)
            .map(|k| (we.r[k] - w0.r[k]).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 1e-4, "{sup}");
    }

    #[test]
    fn fourth_order_under_substep_doubling() {
        let g = Grid1D::new(5.0, 51).unwrap();
        let p = WaveParams::new(-1.5, 0.1, 1.0, 1.0).unwrap();
        let sol = |s| integrate_r_eps(p, &g, s, Integrator::Rk4).unwrap().r;
        let (r1, r2, r4) = (sol(1), sol(2), sol(4));
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let ratio = d(&r1, &r2) / d(&r2, &r4);
        assert!(ratio > 13.0 && ratio < 19.0, "ratio {ratio}");
    }

    #[test]
    fn euler_is_available_and_first_order() {
        let g = Grid1D::new(2.0, 41).unwrap();
        let p = WaveParams::new(-1.5, 0.0, 1.0, 1.0).unwrap();
        let exact = closed_form_r(p, &g).unwrap();
        let err = |s| {
            let w = integrate_r_eps(p, &g, s, Integrator::Euler).unwrap();
            w.r.iter().zip(&exact.r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let ratio = err(50) / err(100);
        assert!(ratio > 1.8 && ratio < 2.2, "ratio {ratio}");
    }
}
