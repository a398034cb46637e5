//! Small dense and banded linear algebra: tridiagonal solves in floating
//! point, exact row reduction and a phase-one simplex over `Ratio<i128>`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Sub};

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::nonlinearity::poly::Rational;

pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[m-1]` are ignored. The solution overwrites `rhs`.
pub fn solve_tridiagonal<T: Scalar>(
    lower: &[T],
    diag: &[T],
    upper: &[T],
    rhs: &mut [T],
    scratch: &mut Vec<T>,
) -> Result<()> {
    let m = diag.len();
    if m == 0 {
        return Ok(());
    }
    scratch.clear();
    scratch.reserve(m);
    let mut pivot = diag[0];
    check_pivot(pivot, 0)?;
    scratch.push(upper[0] / pivot);
    rhs[0] = rhs[0] / pivot;
    for i in 1..m {
        pivot = diag[i] - lower[i] * scratch[i - 1];
        check_pivot(pivot, i)?;
        scratch.push(upper[i] / pivot);
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..m - 1).rev() {
        rhs[i] = rhs[i] - scratch[i] * rhs[i + 1];
    }
    Ok(())
}

/// Factored tridiagonal matrix for repeated solves with one matrix.
#[derive(Clone, Debug)]
pub struct TridiagonalLu<T> {
    lower: Vec<T>,
    pivot: Vec<T>,
    /// `upper[i] / pivot[i]`
    ratio: Vec<T>,
}

impl<T: Scalar> TridiagonalLu<T> {
    pub fn new(lower: &[T], diag: &[T], upper: &[T]) -> Result<Self> {
        let m = diag.len();
        let mut pivot = Vec::with_capacity(m);
        let mut ratio = Vec::with_capacity(m);
        for i in 0..m {
            let p = if i == 0 { diag[0] } else { diag[i] - lower[i] * ratio[i - 1] };
            check_pivot(p, i)?;
            pivot.push(p);
            ratio.push(upper[i] / p);
        }
        Ok(TridiagonalLu { lower: lower.to_vec(), pivot, ratio })
    }

    pub fn solve(&self, rhs: &mut [T]) {
        let m = self.pivot.len();
        if m == 0 {
            return;
        }
        rhs[0] = rhs[0] / self.pivot[0];
        for i in 1..m {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / self.pivot[i];
        }
        for i in (0..m - 1).rev() {
            rhs[i] = rhs[i] - self.ratio[i] * rhs[i + 1];
        }
    }
}

fn check_pivot<T: Scalar>(p: T, row: usize) -> Result<()> {
    let a = p.modulus();
    if a == 0.0 || !a.is_finite() {
        Err(Error::SingularSystem { row })
    } else {
        Ok(())
    }
}

/// Reduced row-echelon form in place; returns the pivot columns.
pub fn rref(a: &mut [Vec<Rational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == a.len() {
            break;
        }
        let Some(p) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = Rational::one() / a[row][col];
        for x in a[row].iter_mut() {
            *x *= inv;
        }
        for r in 0..a.len() {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col];
                for c in 0..cols {
                    let v = a[row][c];
                    a[r][c] -= f * v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Dimension of `{x : A x = 0}` for an `m × cols` matrix.
pub fn nullity(a: &[Vec<Rational>], cols: usize) -> usize {
    let mut work = a.to_vec();
    cols - rref(&mut work, cols).len()
}

/// A solution of `A x = 0` with every `x_j ≥ 1`, when one exists.
///
/// Writes `x = 1 + s`, `s ≥ 0` and runs a phase-one simplex with Bland's
/// rule on `A s = −A 1`.
pub fn positive_kernel_vector(a: &[Vec<Rational>], cols: usize) -> Option<Vec<Rational>> {
    let rows: Vec<&Vec<Rational>> = a.iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
    let m = rows.len();
    if m == 0 {
        return Some(vec![Rational::one(); cols]);
    }
    // Tableau columns: s (cols), artificials (m), rhs.
    let width = cols + m + 1;
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(m + 1);
    for (i, r) in rows.iter().enumerate() {
        let mut line = vec![Rational::zero(); width];
        let b: Rational = -r.iter().fold(Rational::zero(), |acc, x| acc + x);
        let sign = if b.is_negative() { -Rational::one() } else { Rational::one() };
        for j in 0..cols {
            line[j] = r[j] * sign;
        }
        line[cols + i] = Rational::one();
        line[width - 1] = b * sign;
        t.push(line);
    }
    // Reduced costs of the phase-one objective (sum of artificials).
    let mut obj = vec![Rational::zero(); width];
    for line in &t {
        for j in 0..cols {
            obj[j] -= line[j];
        }
        obj[width - 1] -= line[width - 1];
    }
    t.push(obj);
    let mut basis: Vec<usize> = (cols..cols + m).collect();

    while let Some(enter) = (0..cols + m).find(|&j| t[m][j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = t[i][width - 1] / t[i][enter];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr || (ratio == lr && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        // Phase one is bounded below by zero, so a pivot row always exists.
        let (p, _) = leave?;
        let inv = Rational::one() / t[p][enter];
        for x in t[p].iter_mut() {
            *x *= inv;
        }
        for i in 0..=m {
            if i != p && !t[i][enter].is_zero() {
                let f = t[i][enter];
                for j in 0..width {
                    let v = t[p][j];
                    t[i][j] -= f * v;
                }
            }
        }
        basis[p] = enter;
    }

    if !t[m][width - 1].is_zero() {
        return None;
    }
    let mut x = vec![Rational::one(); cols];
    for (i, &b) in basis.iter().enumerate() {
        if b < cols {
            x[b] += t[i][width - 1];
        }
    }
    Some(x)
}
