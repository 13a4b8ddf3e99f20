//! Grids, sampled fields, discrete norms, difference operators, banded
//! solvers, mollifiers and time series.
//!
//! Fields are plain `Vec<f64>` / `Vec<Complex64>` with one sample per grid
//! node. Every integral is a trapezoid sum on the node values.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Sub};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type RealField = Vec<f64>;
pub type ComplexField = Vec<C64>;

/// Uniform node-centred grid on the symmetric interval `[-x_max, x_max]`.
///
/// The node count is odd so that `x = 0` is the exact middle node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_max: f64,
    n_nodes: usize,
}

impl Grid1D {
    pub fn new(x_max: f64, n_nodes: usize) -> Result<Self> {
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(Error::Grid(format!("half-width must be positive, got {x_max}")));
        }
        if n_nodes < 3 || n_nodes.is_multiple_of(2) {
            return Err(Error::Grid(format!(
                "node count must be odd and at least 3, got {n_nodes}"
            )));
        }
        Ok(Grid1D { x_max, n_nodes })
    }

    pub fn x_min(&self) -> f64 {
        -self.x_max
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_nodes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        2.0 * self.x_max / (self.n_nodes - 1) as f64
    }

    /// Index of the node at `x = 0`.
    pub fn center(&self) -> usize {
        (self.n_nodes - 1) / 2
    }

    /// Coordinate of node `k`. Computed relative to the centre node so that
    /// the grid is exactly symmetric and the centre is exactly zero.
    pub fn x(&self, k: usize) -> f64 {
        let m = self.center() as f64;
        (k as f64 - m) * self.h()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|k| self.x(k)).collect()
    }

    pub fn sample<T, F: Fn(f64) -> T>(&self, f: F) -> Vec<T> {
        (0..self.n_nodes).map(|k| f(self.x(k))).collect()
    }

    /// Same interval with `2 (n - 1) + 1` nodes, so every node of `self` is a
    /// node of the refined grid.
    pub fn refined(&self) -> Grid1D {
        Grid1D {
            x_max: self.x_max,
            n_nodes: 2 * (self.n_nodes - 1) + 1,
        }
    }

    pub(crate) fn check<T>(&self, f: &[T]) -> Result<()> {
        if f.len() != self.n_nodes {
            return Err(Error::Dimension {
                expected: self.n_nodes,
                got: f.len(),
            });
        }
        Ok(())
    }
}

/// Scalars that can live in a sampled field.
pub trait Sample:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + Send
    + Sync
{
    fn zero() -> Self;
    fn abs2(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl Sample for f64 {
    fn zero() -> Self {
        0.0
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Sample for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

pub fn all_finite<T: Sample>(f: &[T]) -> bool {
    f.iter().all(|v| v.is_finite_value())
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid(f: &[f64], h: f64) -> f64 {
    match f.len() {
        0 | 1 => 0.0,
        n => h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[n - 1])),
    }
}

/// Trapezoid rule on arbitrary, increasing abscissae.
pub fn trapezoid_nonuniform(t: &[f64], f: &[f64]) -> f64 {
    t.windows(2)
        .zip(f.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum()
}

/// Trapezoid inner product `∫ f g dx` of two real fields.
pub fn inner(f: &[f64], g: &[f64], grid: &Grid1D) -> Result<f64> {
    grid.check(f)?;
    grid.check(g)?;
    let prod: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    Ok(trapezoid(&prod, grid.h()))
}

/// `(∫ |f|² dx)^{1/2}` by the trapezoid rule.
pub fn l2_norm<T: Sample>(f: &[T], grid: &Grid1D) -> Result<f64> {
    grid.check(f)?;
    let sq: Vec<f64> = f.iter().map(|v| v.abs2()).collect();
    Ok(trapezoid(&sq, grid.h()).max(0.0).sqrt())
}

/// `∫ |f| dx` by the trapezoid rule.
pub fn l1_norm(f: &[f64], grid: &Grid1D) -> Result<f64> {
    grid.check(f)?;
    let a: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    Ok(trapezoid(&a, grid.h()))
}

/// Second-order first derivative: central in the interior, one-sided
/// three-point formulas at the endpoints.
pub fn dx_central<T: Sample>(f: &[T], grid: &Grid1D) -> Result<Vec<T>> {
    grid.check(f)?;
    let n = f.len();
    let h = grid.h();
    let mut d = vec![T::zero(); n];
    for k in 1..n - 1 {
        d[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
    }
    d[0] = (f[1] * 4.0 - f[0] * 3.0 - f[2]) / (2.0 * h);
    d[n - 1] = (f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) / (2.0 * h);
    Ok(d)
}

pub fn h1_norm<T: Sample>(f: &[T], grid: &Grid1D) -> Result<f64> {
    let l2 = l2_norm(f, grid)?;
    let d = l2_norm(&dx_central(f, grid)?, grid)?;
    Ok((l2 * l2 + d * d).sqrt())
}

/// Discrete `H⁻¹` norm: solve `(I - D_xx) w = f` with `w = 0` at both
/// endpoints and return `⟨f, w⟩^{1/2}`.
///
/// This is the truncated-domain surrogate of the norm on the whole line.
pub fn h_minus1_norm(f: &[f64], grid: &Grid1D) -> Result<f64> {
    grid.check(f)?;
    let w = inverse_helmholtz(f, grid);
    Ok(inner(f, &w, grid)?.max(0.0).sqrt())
}

/// `H⁻¹` norm of `f + mass · δ₀`, the Dirac mass represented on the grid
/// by `1/h` at the centre node.
pub fn measure_h_minus1_norm(f: &[f64], mass: f64, grid: &Grid1D) -> Result<f64> {
    grid.check(f)?;
    let mut g = f.to_vec();
    g[grid.center()] += mass / grid.h();
    h_minus1_norm(&g, grid)
}

fn inverse_helmholtz(f: &[f64], grid: &Grid1D) -> Vec<f64> {
    let n = f.len();
    let h2 = grid.h() * grid.h();
    let m = n - 2;
    let sub = vec![-1.0 / h2; m];
    let diag = vec![1.0 + 2.0 / h2; m];
    let sup = vec![-1.0 / h2; m];
    let mut w = vec![0.0; n];
    let inner = thomas(&sub, &diag, &sup, &f[1..n - 1])
        .expect("I - D_xx is strictly diagonally dominant");
    w[1..n - 1].copy_from_slice(&inner);
    w
}

/// Thomas algorithm for `sub[k] x[k-1] + diag[k] x[k] + sup[k] x[k+1] = rhs[k]`.
/// `sub[0]` and `sup[n-1]` are ignored.
pub fn thomas<T>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Result<Vec<T>>
where
    T: Copy
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + PartialEq
        + Default,
{
    let n = rhs.len();
    for len in [sub.len(), diag.len(), sup.len()] {
        if len != n {
            return Err(Error::Dimension { expected: n, got: len });
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let zero = T::default();
    let mut c = vec![zero; n];
    let mut d = vec![zero; n];
    let mut beta = diag[0];
    if beta == zero {
        return Err(Error::Domain("zero pivot in tridiagonal solve".into()));
    }
    c[0] = sup[0] / beta;
    d[0] = rhs[0] / beta;
    for k in 1..n {
        beta = diag[k] - sub[k] * c[k - 1];
        if beta == zero {
            return Err(Error::Domain("zero pivot in tridiagonal solve".into()));
        }
        c[k] = sup[k] / beta;
        d[k] = (rhs[k] - sub[k] * d[k - 1]) / beta;
    }
    for k in (0..n - 1).rev() {
        d[k] = d[k] - c[k] * d[k + 1];
    }
    Ok(d)
}

pub type Block2 = [[f64; 2]; 2];

fn block_vec(a: &Block2, v: [f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

fn block_inv(a: &Block2) -> Option<Block2> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ])
}

/// Block Thomas algorithm for a block-tridiagonal system with 2×2 blocks
/// whose off-diagonal blocks are scalar multiples of the identity:
/// `sub[k] x[k-1] + diag[k] x[k] + sup[k] x[k+1] = rhs[k]`.
pub fn block_thomas(sub: &[f64], diag: &[Block2], sup: &[f64], rhs: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    let n = rhs.len();
    for len in [sub.len(), diag.len(), sup.len()] {
        if len != n {
            return Err(Error::Dimension { expected: n, got: len });
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let singular = || Error::Domain("singular pivot block in block tridiagonal solve".into());
    // c[k] = beta_k^{-1} sup[k] (a scalar times beta_k^{-1}), d[k] = beta_k^{-1}(rhs - sub d[k-1])
    let mut c: Vec<Block2> = vec![[[0.0; 2]; 2]; n];
    let mut d: Vec<[f64; 2]> = vec![[0.0; 2]; n];
    let inv = block_inv(&diag[0]).ok_or_else(singular)?;
    c[0] = scale(&inv, sup[0]);
    d[0] = block_vec(&inv, rhs[0]);
    for k in 1..n {
        let sc = scale(&c[k - 1], sub[k]);
        let beta = [
            [diag[k][0][0] - sc[0][0], diag[k][0][1] - sc[0][1]],
            [diag[k][1][0] - sc[1][0], diag[k][1][1] - sc[1][1]],
        ];
        let inv = block_inv(&beta).ok_or_else(singular)?;
        c[k] = scale(&inv, sup[k]);
        let r = [rhs[k][0] - sub[k] * d[k - 1][0], rhs[k][1] - sub[k] * d[k - 1][1]];
        d[k] = block_vec(&inv, r);
    }
    for k in (0..n - 1).rev() {
        let cd = block_vec(&c[k], d[k + 1]);
        d[k] = [d[k][0] - cd[0], d[k][1] - cd[1]];
    }
    Ok(d)
}

fn scale(a: &Block2, s: f64) -> Block2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

/// Standard bump `exp(1/(z²-1))` on `(-1, 1)`, unnormalised.
fn bump(z: f64) -> f64 {
    if z.abs() < 1.0 {
        (1.0 / (z * z - 1.0)).exp()
    } else {
        0.0
    }
}

/// Mollifier `ρ_w(x) = ρ(x/w)/w` sampled on the grid and normalised so that
/// its trapezoid integral is one.
pub fn mollifier(width: f64, grid: &Grid1D) -> Result<RealField> {
    let h = grid.h();
    if !(width >= 3.0 * h * (1.0 - 1e-12)) {
        return Err(Error::Resolution { width, h });
    }
    let mut rho = grid.sample(|x| bump(x / width));
    // exact evenness
    let n = rho.len();
    for k in 0..n / 2 {
        let s = 0.5 * (rho[k] + rho[n - 1 - k]);
        rho[k] = s;
        rho[n - 1 - k] = s;
    }
    let mass = trapezoid(&rho, h);
    rho.iter_mut().for_each(|v| *v /= mass);
    Ok(rho)
}

/// `-(sgn ⋆ ρ_w)` on the grid: odd, `+1` for `x ≤ -w`, `-1` for `x ≥ w`,
/// zero at the centre node.
pub fn smoothed_sign(width: f64, grid: &Grid1D) -> Result<RealField> {
    let rho = mollifier(width, grid)?;
    let h = grid.h();
    let n = rho.len();
    // cumulative distribution of rho
    let mut cdf = vec![0.0; n];
    for k in 1..n {
        cdf[k] = cdf[k - 1] + 0.5 * h * (rho[k - 1] + rho[k]);
    }
    let mut s: Vec<f64> = cdf.iter().map(|c| 1.0 - 2.0 * c).collect();
    for k in 0..n / 2 {
        let a = 0.5 * (s[k] - s[n - 1 - k]);
        s[k] = a;
        s[n - 1 - k] = -a;
    }
    s[grid.center()] = 0.0;
    for (k, v) in s.iter_mut().enumerate() {
        let x = grid.x(k);
        if x <= -width {
            *v = 1.0;
        } else if x >= width {
            *v = -1.0;
        }
    }
    Ok(s)
}

/// Ordered `(t, value)` samples starting at `t = 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    t: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_with(value: f64) -> Self {
        TimeSeries {
            t: vec![0.0],
            values: vec![value],
        }
    }

    /// Append a sample; times must start at zero and increase strictly.
    pub fn push(&mut self, t: f64, value: f64) -> Result<()> {
        match self.t.last() {
            None if t != 0.0 => {
                return Err(Error::Domain(format!("time series must start at t = 0, got {t}")))
            }
            Some(&last) if t <= last => {
                return Err(Error::Domain(format!("non-increasing time {t} after {last}")))
            }
            _ => {}
        }
        if !value.is_finite() {
            return Err(Error::Divergence {
                location: format!("time series value at t = {t}"),
            });
        }
        self.t.push(t);
        self.values.push(value);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        Some((*self.t.last()?, *self.values.last()?))
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t.iter().copied().zip(self.values.iter().copied())
    }

    /// Piecewise-linear interpolation, clamped to the sampled range.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        let n = self.t.len();
        if n == 0 {
            return None;
        }
        if t <= self.t[0] {
            return Some(self.values[0]);
        }
        if t >= self.t[n - 1] {
            return Some(self.values[n - 1]);
        }
        let j = self.t.partition_point(|&s| s <= t);
        let (t0, t1) = (self.t[j - 1], self.t[j]);
        let th = (t - t0) / (t1 - t0);
        Some(self.values[j - 1] * (1.0 - th) + self.values[j] * th)
    }
}

/// `∫₀ᵀ Ψ(t) φ(t) dt` by the trapezoid rule on the samples of `psi`: the
/// action of the line measure `Ψ(t) δ_Σ` on a test function traced on `x = 0`.
pub fn measure_pairing<F: Fn(f64) -> f64>(psi: &TimeSeries, test: F) -> Result<f64> {
    if psi.is_empty() {
        return Err(Error::Domain("measure pairing of an empty series".into()));
    }
    let prod: Vec<f64> = psi.iter().map(|(t, p)| p * test(t)).collect();
    Ok(trapezoid_nonuniform(psi.times(), &prod))
}

/// Piecewise-linear interpolation of node samples at an arbitrary point;
/// constant extrapolation outside the grid.
pub fn interpolate(f: &[f64], grid: &Grid1D, x: f64) -> f64 {
    let n = f.len();
    let s = (x - grid.x_min()) / grid.h();
    if s <= 0.0 {
        return f[0];
    }
    if s >= (n - 1) as f64 {
        return f[n - 1];
    }
    let k = s.floor() as usize;
    let th = s - k as f64;
    f[k] * (1.0 - th) + f[k + 1] * th
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn g(n: usize) -> Grid1D {
        Grid1D::new(22.0, n).unwrap()
    }

    #[test]
    fn grid_invariants() {
        assert!(Grid1D::new(1.0, 4).is_err());
        assert!(Grid1D::new(1.0, 1).is_err());
        assert!(Grid1D::new(-1.0, 5).is_err());
        let g = g(4001);
        assert_eq!(g.x(g.center()), 0.0);
        assert_relative_eq!(g.x(0), -22.0, epsilon = 1e-12);
        assert_relative_eq!(g.x(4000), 22.0, epsilon = 1e-12);
        assert_relative_eq!(g.h(), 0.011, epsilon = 1e-15);
        let r = g.refined();
        assert_eq!(r.len(), 8001);
        assert_eq!(r.x(2 * 17), g.x(17));
    }

    #[test]
    fn l2_of_zero_and_constants() {
        let g = g(101);
        assert_eq!(l2_norm(&vec![0.0; 101], &g).unwrap(), 0.0);
        let unit = Grid1D::new(1.0, 7).unwrap();
        assert_relative_eq!(l2_norm(&[1.0; 7], &unit).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert!(matches!(
            l2_norm(&[1.0; 5], &unit),
            Err(Error::Dimension { expected: 7, got: 5 })
        ));
    }

    #[test]
    fn l2_of_gaussian() {
        let g = g(4001);
        let f = g.sample(|x| (-x * x).exp());
        let exact = (std::f64::consts::PI / 2.0).powf(0.25);
        assert!((l2_norm(&f, &g).unwrap() - exact).abs() < 1e-6);
    }

    #[test]
    fn central_difference_accuracy() {
        let g = Grid1D::new(3.0, 301).unwrap();
        let f = g.sample(f64::sin);
        let d = dx_central(&f, &g).unwrap();
        let h = g.h();
        let bound = h * h / 6.0;
        let worst = (1..300)
            .map(|k| (d[k] - g.x(k).cos()).abs())
            .fold(0.0, f64::max);
        assert!(worst <= bound, "{worst} > {bound}");
        let c = vec![2.5; 301];
        assert!(dx_central(&c, &g).unwrap().iter().all(|v| v.abs() < 1e-12));
        assert_relative_eq!(h1_norm(&c, &g).unwrap(), l2_norm(&c, &g).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn h1_homogeneous() {
        let g = g(801);
        let f = g.sample(|x| (-x * x).exp() * x.cos());
        let f2: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
        assert_relative_eq!(h1_norm(&f2, &g).unwrap(), 2.0 * h1_norm(&f, &g).unwrap(), max_relative = 1e-12);
    }

    /// Dense Gaussian elimination on the full (I - D_xx) matrix.
    fn dense_hm1(f: &[f64], g: &Grid1D) -> f64 {
        let n = f.len() - 2;
        let h2 = g.h() * g.h();
        let mut a = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            a[i][i] = 1.0 + 2.0 / h2;
            if i > 0 {
                a[i][i - 1] = -1.0 / h2;
            }
            if i + 1 < n {
                a[i][i + 1] = -1.0 / h2;
            }
            a[i][n] = f[i + 1];
        }
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            a.swap(col, piv);
            let (top, rest) = a.split_at_mut(col + 1);
            let prow = &top[col];
            for row in rest.iter_mut() {
                let fac = row[col] / prow[col];
                if fac != 0.0 {
                    for j in col..=n {
                        row[j] -= fac * prow[j];
                    }
                }
            }
        }
        let mut w = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = a[i][n];
            for j in i + 1..n {
                s -= a[i][j] * w[j];
            }
            w[i] = s / a[i][i];
        }
        let mut full = vec![0.0; n + 2];
        full[1..=n].copy_from_slice(&w);
        let prod: Vec<f64> = f.iter().zip(&full).map(|(a, b)| a * b).collect();
        trapezoid(&prod, g.h()).sqrt()
    }

    #[test]
    fn hm1_matches_dense_oracle() {
        let g = g(4001);
        let f = g.sample(|x| (-x * x).exp());
        let fast = h_minus1_norm(&f, &g).unwrap();
        // the dense oracle is O(n³); use a coarser grid for it and compare there too
        let gc = Grid1D::new(22.0, 401).unwrap();
        let fc = gc.sample(|x| (-x * x).exp());
        let dense = dense_hm1(&fc, &gc);
        assert!((h_minus1_norm(&fc, &gc).unwrap() - dense).abs() < 1e-10);
        assert!(fast > 0.0 && fast < l2_norm(&f, &g).unwrap());
        assert_eq!(h_minus1_norm(&vec![0.0; 4001], &g).unwrap(), 0.0);
    }

    #[test]
    fn hm1_spectral_oracle_full_resolution() {
        // Dirichlet sine modes diagonalise I - D_xx exactly on the grid.
        let g = g(4001);
        let f = g.sample(|x| (-x * x).exp());
        let n = f.len() - 2;
        let h = g.h();
        let np1 = (n + 1) as f64;
        let mut acc = 0.0;
        for j in 1..=n {
            let th = j as f64 * std::f64::consts::PI / np1;
            let coef: f64 = (1..=n).map(|k| f[k] * (th * k as f64).sin()).sum();
            let lambda = 1.0 + 4.0 / (h * h) * (0.5 * th).sin().powi(2);
            acc += coef * coef / lambda;
        }
        let oracle = (h * 2.0 / np1 * acc).sqrt();
        assert!((h_minus1_norm(&f, &g).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn thomas_solves_complex_system() {
        let n = 6;
        let sub = vec![C64::new(1.0, 0.5); n];
        let diag = vec![C64::new(-4.0, 2.0); n];
        let sup = vec![C64::new(0.5, -1.0); n];
        let x: Vec<C64> = (0..n).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        let mut rhs = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            rhs[k] = diag[k] * x[k];
            if k > 0 {
                rhs[k] += sub[k] * x[k - 1];
            }
            if k + 1 < n {
                rhs[k] += sup[k] * x[k + 1];
            }
        }
        let got = thomas(&sub, &diag, &sup, &rhs).unwrap();
        for (a, b) in got.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn block_thomas_matches_complex_thomas() {
        // (2i/dt + D - a) w = rhs written in real 2x2 blocks must agree with
        // the complex scalar solve.
        let n = 9;
        let a: Vec<f64> = (0..n).map(|k| 0.3 * k as f64 - 1.0).collect();
        let rhs: Vec<C64> = (0..n).map(|k| C64::new((k as f64).sin(), (k as f64).cos())).collect();
        let s = 3.0;
        let sub = vec![C64::new(s, 0.0); n];
        let sup = sub.clone();
        let diag: Vec<C64> = a.iter().map(|ak| C64::new(-2.0 * s - ak, 7.0)).collect();
        let want = thomas(&sub, &diag, &sup, &rhs).unwrap();
        let bdiag: Vec<Block2> = diag.iter().map(|d| [[d.re, -d.im], [d.im, d.re]]).collect();
        let brhs: Vec<[f64; 2]> = rhs.iter().map(|r| [r.re, r.im]).collect();
        let got = block_thomas(&vec![s; n], &bdiag, &vec![s; n], &brhs).unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!((g[0] - w.re).abs() < 1e-12 && (g[1] - w.im).abs() < 1e-12);
        }
    }

    #[test]
    fn mollifier_properties() {
        let g = g(4001);
        let w = 10.0 * g.h();
        let rho = mollifier(w, &g).unwrap();
        assert!((trapezoid(&rho, g.h()) - 1.0).abs() < 1e-14);
        let n = rho.len();
        for k in 0..n {
            assert_eq!(rho[k], rho[n - 1 - k]);
        }
        assert!(matches!(mollifier(2.0 * g.h(), &g), Err(Error::Resolution { .. })));

        let s = smoothed_sign(w, &g).unwrap();
        assert_eq!(s[g.center()], 0.0);
        for k in 0..n {
            assert_eq!(s[k], -s[n - 1 - k]);
            let x = g.x(k);
            if x <= -w {
                assert_eq!(s[k], 1.0);
            }
            if x >= w {
                assert_eq!(s[k], -1.0);
            }
            assert!(s[k].abs() <= 1.0);
        }
    }

    #[test]
    fn pairing_examples() {
        let mut zero = TimeSeries::starting_with(0.0);
        let mut one = TimeSeries::starting_with(1.0);
        let mut ramp = TimeSeries::starting_with(0.0);
        let dt = 1e-3;
        for k in 1..=1000 {
            let t = k as f64 * dt;
            zero.push(t, 0.0).unwrap();
            one.push(t, 1.0).unwrap();
            ramp.push(t, t).unwrap();
        }
        assert_eq!(measure_pairing(&zero, |_| 1.0).unwrap(), 0.0);
        assert_relative_eq!(measure_pairing(&one, |_| 1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert!((measure_pairing(&ramp, |_| 1.0).unwrap() - 0.5).abs() <= dt * dt);
        assert!(measure_pairing(&TimeSeries::new(), |_| 1.0).is_err());
    }

    #[test]
    fn time_series_rejects_bad_times() {
        let mut s = TimeSeries::new();
        assert!(s.push(0.5, 1.0).is_err());
        s.push(0.0, 1.0).unwrap();
        assert!(s.push(0.0, 2.0).is_err());
        s.push(0.25, 3.0).unwrap();
        assert_eq!(s.interpolate(0.125), Some(2.0));
    }

    fn field(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, len)
    }

    proptest! {
        #[test]
        fn norms_triangle_inequality(f in field(65), h in field(65)) {
            let g = Grid1D::new(2.0, 65).unwrap();
            let sum: Vec<f64> = f.iter().zip(&h).map(|(a, b)| a + b).collect();
            type Norm = fn(&[f64], &Grid1D) -> Result<f64>;
            let norms: [Norm; 3] = [l2_norm::<f64>, h1_norm::<f64>, h_minus1_norm];
            for norm in norms {
                let nf = norm(&f, &g).unwrap();
                let nh = norm(&h, &g).unwrap();
                let ns = norm(&sum, &g).unwrap();
                prop_assert!((ns - nf).abs() <= nh * (1.0 + 1e-12) + 1e-12);
            }
        }

        #[test]
        fn hm1_homogeneous_and_dominated(f in field(65), alpha in -5.0f64..5.0) {
            let g = Grid1D::new(2.0, 65).unwrap();
            let scaled: Vec<f64> = f.iter().map(|v| alpha * v).collect();
            let a = h_minus1_norm(&scaled, &g).unwrap();
            let b = alpha.abs() * h_minus1_norm(&f, &g).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
            prop_assert!(h_minus1_norm(&f, &g).unwrap() <= l2_norm(&f, &g).unwrap() * (1.0 + 1e-12));
        }

        #[test]
        fn derivative_flips_parity(half in field(32)) {
            let g = Grid1D::new(2.0, 65).unwrap();
            // even field built from a random half
            let mut even = vec![0.0; 65];
            for k in 0..32 {
                even[k] = half[k];
                even[64 - k] = half[k];
            }
            even[32] = half[0];
            let d = dx_central(&even, &g).unwrap();
            for k in 0..65 {
                prop_assert!((d[k] + d[64 - k]).abs() <= 1e-12 * (1.0 + d[k].abs()));
            }
        }
    }
}
