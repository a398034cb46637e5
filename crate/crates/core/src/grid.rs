//! Cell-centred radial grids on `[0, r_max]`.
//!
//! Nodes sit at `r_i = (i + ½)h`, quadrature weights are
//! `w_i = s_n r_i^{n−1} h`. The Laplacian is written in flux form with face
//! coefficients `a_{i+½} = n h Σ_{j≤i} r_j^{n−1} / r_{i+½}`, which makes it
//! symmetric for the weighted inner product and exact on `r²`. The condition
//! at `r = 0` is built into the first face (`a_{−½} = 0`); beyond `r_max` the
//! field is zero (ghost node at `r_max + h/2`).

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
// `Float` is shadowed by std's inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{solve_tridiagonal, Scalar};

/// Area of the unit sphere `S^{n−1}`, `n = 1, …, 6`.
pub fn sphere_area(n: usize) -> f64 {
    use core::f64::consts::PI;
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        5 => 8.0 * PI * PI / 3.0,
        6 => PI * PI * PI,
        _ => f64::NAN,
    }
}

#[derive(Clone, Debug)]
pub struct RadialGrid {
    n: usize,
    m: usize,
    r_max: f64,
    h: f64,
    nodes: Arc<[f64]>,
    weights: Arc<[f64]>,
    /// `a_{i+½}` for `i = 0, …, M−1`; the last entry is the face at `r_max`.
    faces: Arc<[f64]>,
    /// `h² r_i^{n−1}`
    denom: Arc<[f64]>,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.m == other.m && self.r_max == other.r_max
    }
}

impl RadialGrid {
    pub fn new(n: usize, m: usize, r_max: f64) -> Result<Self> {
        if !(1..=6).contains(&n) {
            return Err(Error::DimensionOutOfRange(n));
        }
        if m < 16 {
            return Err(Error::InvalidParameter("grid needs at least 16 points".into()));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidParameter("r_max must be positive".into()));
        }
        let h = r_max / m as f64;
        let s_n = sphere_area(n);
        let nodes: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) * h).collect();
        let pow: Vec<f64> = nodes.iter().map(|r| r.powi(n as i32 - 1)).collect();
        let weights: Vec<f64> = pow.iter().map(|p| s_n * p * h).collect();
        let mut faces = Vec::with_capacity(m);
        let mut cum = 0.0;
        for i in 0..m {
            cum += pow[i];
            let rf = (i as f64 + 1.0) * h;
            faces.push(n as f64 * h * cum / rf);
        }
        let denom: Vec<f64> = pow.iter().map(|p| h * h * p).collect();
        Ok(RadialGrid {
            n,
            m,
            r_max,
            h,
            nodes: nodes.into(),
            weights: weights.into(),
            faces: faces.into(),
            denom: denom.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.n)
    }

    /// Same grid in another dimension.
    pub fn with_dim(&self, n: usize) -> Result<Self> {
        RadialGrid::new(n, self.m, self.r_max)
    }

    /// `∫ g dx` for radial samples `g`, pairwise summed.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        debug_assert_eq!(g.len(), self.m);
        pairwise(0, self.m, &|i| self.weights[i] * g[i])
    }

    /// `∫ g(r) dx` for a closure evaluated at the nodes.
    pub fn integrate_fn(&self, g: impl Fn(usize) -> f64) -> f64 {
        pairwise(0, self.m, &|i| self.weights[i] * g(i))
    }

    /// `∫ u v̄ dx`.
    pub fn inner(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let re = pairwise(0, self.m, &|i| self.weights[i] * (u[i] * v[i].conj()).re);
        let im = pairwise(0, self.m, &|i| self.weights[i] * (u[i] * v[i].conj()).im);
        Complex64::new(re, im)
    }

    /// `‖u‖²_{L²}`.
    pub fn norm_sq(&self, u: &[Complex64]) -> f64 {
        pairwise(0, self.m, &|i| self.weights[i] * u[i].norm_sqr())
    }

    /// `‖∇u‖²_{L²}` from face differences; equals `−⟨Δu, u⟩` exactly.
    pub fn grad_sq(&self, u: &[Complex64]) -> f64 {
        let m = self.m;
        let s = self.sphere_area() / self.h;
        s * pairwise(0, m, &|i| {
            let next = if i + 1 < m { u[i + 1] } else { Complex64::zero() };
            self.faces[i] * (next - u[i]).norm_sqr()
        })
    }

    /// `Σ_f a_f φ_f |Δu_f|² s_n / h`: the gradient energy weighted by a
    /// function of the face radius.
    pub fn weighted_grad_sq(&self, u: &[Complex64], phi: impl Fn(f64) -> f64) -> f64 {
        let m = self.m;
        let s = self.sphere_area() / self.h;
        s * pairwise(0, m, &|i| {
            let next = if i + 1 < m { u[i + 1] } else { Complex64::zero() };
            let rf = (i as f64 + 1.0) * self.h;
            self.faces[i] * phi(rf) * (next - u[i]).norm_sqr()
        })
    }

    /// Discrete face areas `a_{i+½} ≈ r_{i+½}^{n−1}`, without the factor `s_n`.
    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    /// Per-face contributions to [`grad_sq`](Self::grad_sq); entry `i` is the
    /// gradient energy of the shell between `r_i` and `r_{i+1}` (`r_M = r_max`).
    pub fn grad_sq_faces(&self, u: &[Complex64]) -> Vec<f64> {
        let m = self.m;
        let s = self.sphere_area() / self.h;
        (0..m)
            .map(|i| {
                let next = if i + 1 < m { u[i + 1] } else { Complex64::zero() };
                s * self.faces[i] * (next - u[i]).norm_sqr()
            })
            .collect()
    }

    /// Tridiagonal bands of `Δ`: `(lower, diag, upper)`.
    pub fn laplacian_bands(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let m = self.m;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for i in 0..m {
            let right = self.faces[i] / self.denom[i];
            let left = if i > 0 { self.faces[i - 1] / self.denom[i] } else { 0.0 };
            lower[i] = left;
            upper[i] = if i + 1 < m { right } else { 0.0 };
            diag[i] = -(left + right);
        }
        (lower, diag, upper)
    }

    /// `Δu` into `out`.
    pub fn laplacian_into<T>(&self, u: &[T], out: &mut [T])
    where
        T: Copy + Zero + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        let m = self.m;
        for i in 0..m {
            let next = if i + 1 < m { u[i + 1] } else { T::zero() };
            let mut flux = (next - u[i]) * self.faces[i];
            if i > 0 {
                flux = flux - (u[i] - u[i - 1]) * self.faces[i - 1];
            }
            out[i] = flux * (1.0 / self.denom[i]);
        }
    }

    pub fn laplacian<T>(&self, u: &[T]) -> Vec<T>
    where
        T: Copy + Zero + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        let mut out = vec![T::zero(); self.m];
        self.laplacian_into(u, &mut out);
        out
    }

    /// Prepares `(−γΔ + c)` for repeated solves.
    pub fn helmholtz(&self, gamma: f64, c: f64) -> Helmholtz {
        let (l, d, u) = self.laplacian_bands();
        Helmholtz {
            lower: l.iter().map(|x| -gamma * x).collect(),
            diag: d.iter().map(|x| -gamma * x + c).collect(),
            upper: u.iter().map(|x| -gamma * x).collect(),
        }
    }

    /// Solves `(−γΔ + c)u = rhs`.
    pub fn helmholtz_solve<T>(&self, rhs: &[T], gamma: f64, c: f64) -> Result<Vec<T>>
    where
        T: Scalar + From<f64>,
    {
        let mut out = rhs.to_vec();
        self.helmholtz(gamma, c).solve_in_place(&mut out, &mut Vec::new())?;
        Ok(out)
    }

    /// Value at radius `r` by 4-point Lagrange interpolation on the even
    /// extension through `r = 0`; zero beyond the grid.
    pub fn interpolate(&self, u: &[Complex64], r: f64) -> Complex64 {
        let r = r.abs();
        let m = self.m as isize;
        let s = r / self.h - 0.5;
        if s >= m as f64 {
            return Complex64::zero();
        }
        let i0 = s.floor() as isize;
        let t = s - i0 as f64;
        let get = |j: isize| -> Complex64 {
            let j = if j < 0 { -1 - j } else { j };
            if j >= m {
                Complex64::zero()
            } else {
                u[j as usize]
            }
        };
        // Lagrange basis on offsets −1, 0, 1, 2.
        let w = [
            -t * (t - 1.0) * (t - 2.0) / 6.0,
            (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0,
            (t + 1.0) * t * (t - 1.0) / 6.0,
        ];
        get(i0 - 1) * w[0] + get(i0) * w[1] + get(i0 + 1) * w[2] + get(i0 + 2) * w[3]
    }

    /// Largest index `i` with `r_i ≤ r`, or `None` when `r < r_0`.
    pub fn index_below(&self, r: f64) -> Option<usize> {
        let s = r / self.h - 0.5;
        if s < 0.0 {
            None
        } else {
            Some((s.floor() as usize).min(self.m - 1))
        }
    }
}

/// Factored-once bands of `(−γΔ + c)`.
#[derive(Clone, Debug)]
pub struct Helmholtz {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Helmholtz {
    pub fn solve_in_place<T>(&self, rhs: &mut [T], scratch: &mut Vec<T>) -> Result<()>
    where
        T: Scalar + From<f64>,
    {
        let l: Vec<T> = self.lower.iter().map(|&x| T::from(x)).collect();
        let d: Vec<T> = self.diag.iter().map(|&x| T::from(x)).collect();
        let u: Vec<T> = self.upper.iter().map(|&x| T::from(x)).collect();
        solve_tridiagonal(&l, &d, &u, rhs, scratch)
    }

    /// Applies the operator.
    pub fn apply<T>(&self, u: &[T]) -> Vec<T>
    where
        T: Copy + Zero + Add<Output = T> + Mul<f64, Output = T>,
    {
        let m = u.len();
        (0..m)
            .map(|i| {
                let mut s = u[i] * self.diag[i];
                if i > 0 {
                    s = s + u[i - 1] * self.lower[i];
                }
                if i + 1 < m {
                    s = s + u[i + 1] * self.upper[i];
                }
                s
            })
            .collect()
    }

    pub fn bands(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.lower, &self.diag, &self.upper)
    }
}

/// Pairwise summation of `f(lo..hi)`.
pub(crate) fn pairwise(lo: usize, hi: usize, f: &dyn Fn(usize) -> f64) -> f64 {
    if hi - lo <= 32 {
        let mut s = 0.0;
        for i in lo..hi {
            s += f(i);
        }
        s
    } else {
        let mid = lo + (hi - lo) / 2;
        pairwise(lo, mid, f) + pairwise(mid, hi, f)
    }
}

/// `l`-component complex field on a radial grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialField {
    grid: RadialGrid,
    data: Vec<Vec<Complex64>>,
}

impl RadialField {
    pub fn zeros(grid: &RadialGrid, l: usize) -> Self {
        RadialField { grid: grid.clone(), data: vec![vec![Complex64::zero(); grid.len()]; l] }
    }

    pub fn from_components(grid: &RadialGrid, data: Vec<Vec<Complex64>>) -> Result<Self> {
        if data.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch);
        }
        Ok(RadialField { grid: grid.clone(), data })
    }

    /// Component `k` sampled from `f(k, r)`.
    pub fn from_fn(grid: &RadialGrid, l: usize, f: impl Fn(usize, f64) -> Complex64) -> Self {
        let data = (0..l).map(|k| grid.nodes().iter().map(|&r| f(k, r)).collect()).collect();
        RadialField { grid: grid.clone(), data }
    }

    /// Real profile `f(k, r)`.
    pub fn from_real_fn(grid: &RadialGrid, l: usize, f: impl Fn(usize, f64) -> f64) -> Self {
        Self::from_fn(grid, l, |k, r| Complex64::new(f(k, r), 0.0))
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.data.len()
    }

    pub fn component(&self, k: usize) -> &[Complex64] {
        &self.data[k]
    }

    pub fn component_mut(&mut self, k: usize) -> &mut [Complex64] {
        &mut self.data[k]
    }

    pub fn data(&self) -> &[Vec<Complex64>] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Vec<Complex64>> {
        self.data
    }

    /// Values of all components at node `i`.
    pub fn point(&self, i: usize, out: &mut [Complex64]) {
        for (o, c) in out.iter_mut().zip(&self.data) {
            *o = c[i];
        }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let data = self.data.iter().map(|c| c.iter().map(|v| v * lambda).collect()).collect();
        RadialField { grid: self.grid.clone(), data }
    }

    /// Multiplies component `k` by `phase[k]`.
    pub fn rotated(&self, phase: &[Complex64]) -> Self {
        let data = self
            .data
            .iter()
            .zip(phase)
            .map(|(c, p)| c.iter().map(|v| v * p).collect())
            .collect();
        RadialField { grid: self.grid.clone(), data }
    }

    /// Componentwise modulus `⌊u⌋`.
    pub fn modulus(&self) -> Self {
        let data = self
            .data
            .iter()
            .map(|c| c.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect())
            .collect();
        RadialField { grid: self.grid.clone(), data }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().flatten().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `max |u|` over the trailing 5% of nodes divided by `max |u|`.
    pub fn tail_ratio(&self) -> f64 {
        let m = self.grid.len();
        let start = m - (m / 20).max(1);
        let tail = self
            .data
            .iter()
            .flat_map(|c| c[start..].iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        let top = self.max_abs();
        if top == 0.0 {
            0.0
        } else {
            tail / top
        }
    }

    /// `(Σ_k ‖u_k − v_k‖²)^{1/2}`.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        let mut s = 0.0;
        for (a, b) in self.data.iter().zip(&other.data) {
            s += self.grid.integrate_fn(|i| (a[i] - b[i]).norm_sqr());
        }
        Ok(s.sqrt())
    }

    /// `(Σ_k ‖u_k‖²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|c| self.grid.norm_sq(c)).sum::<f64>().sqrt()
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.components() != other.components() {
            Err(Error::GridMismatch)
        } else {
            Ok(())
        }
    }

    /// Resamples onto another grid via [`RadialGrid::interpolate`].
    pub fn resample(&self, grid: &RadialGrid) -> Self {
        Self::from_fn(grid, self.components(), |k, r| self.grid.interpolate(&self.data[k], r))
    }

    pub fn with_grid_dim(&self, n: usize) -> Result<Self> {
        Ok(RadialField { grid: self.grid.with_dim(n)?, data: self.data.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn gaussian_quadrature() {
        let g = RadialGrid::new(3, 2048, 10.0).unwrap();
        let v = g.integrate_fn(|i| (-g.nodes()[i].powi(2)).exp());
        assert!((v / PI.powf(1.5) - 1.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn ball_volume() {
        for n in 1..=6 {
            let g = RadialGrid::new(n, 256, 2.0).unwrap();
            let vol: f64 = g.weights().iter().sum();
            let exact = sphere_area(n) * 2f64.powi(n as i32) / n as f64;
            assert!((vol / exact - 1.0).abs() < 1e-3, "n={n}");
        }
    }

    #[test]
    fn laplacian_of_r_squared_is_exact() {
        let g = RadialGrid::new(6, 1024, 10.0).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        let lap = g.laplacian(&u);
        for v in &lap[..1023] {
            assert!((v - 12.0).abs() < 1e-8);
        }
    }

    #[test]
    fn laplacian_of_constant() {
        let g = RadialGrid::new(4, 256, 5.0).unwrap();
        let lap = g.laplacian(&vec![1.0; 256]);
        assert!(lap[..255].iter().all(|v| v.abs() <= 1e-10));
    }

    #[test]
    fn laplacian_of_gaussian() {
        let g = RadialGrid::new(3, 2048, 8.0).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        let lap = g.laplacian(&u);
        let mut worst: f64 = 0.0;
        for (i, r) in g.nodes().iter().enumerate().take(1500) {
            let exact = (4.0 * r * r - 6.0) * (-r * r).exp();
            worst = worst.max((lap[i] - exact).abs());
        }
        assert!(worst < 10.0 * g.h() * g.h(), "{worst}");
    }

    #[test]
    fn grad_sq_is_minus_laplacian_pairing() {
        let g = RadialGrid::new(5, 300, 6.0).unwrap();
        let u: Vec<Complex64> =
            g.nodes().iter().map(|r| Complex64::new((-r * r).exp(), r * (-r).exp())).collect();
        let lap = g.laplacian(&u);
        let pairing = -g.inner(&lap, &u).re;
        assert!((pairing - g.grad_sq(&u)).abs() < 1e-12 * pairing);
    }

    #[test]
    fn helmholtz_round_trip() {
        let g = RadialGrid::new(3, 512, 12.0).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|r| (-r * r / 2.0).exp() * (1.0 + r)).collect();
        let op = g.helmholtz(1.5, 0.7);
        let rhs = op.apply(&u);
        let back = g.helmholtz_solve(&rhs, 1.5, 0.7).unwrap();
        for i in 0..512 {
            assert!((back[i] - u[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn interpolation_is_cubic_exact() {
        let g = RadialGrid::new(2, 64, 4.0).unwrap();
        // Even polynomial: exact under the mirror extension.
        let f = |r: f64| 1.0 + r * r;
        let u: Vec<Complex64> = g.nodes().iter().map(|&r| Complex64::new(f(r), 0.0)).collect();
        for r in [0.0, 0.01, 0.3, 1.234, 3.5] {
            assert!((g.interpolate(&u, r).re - f(r)).abs() < 1e-12, "{r}");
        }
    }
}
