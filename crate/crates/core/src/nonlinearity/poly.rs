//! Polynomials in `(z, z̄) ∈ ℂ^l × ℂ^l` with exact Gaussian-rational
//! coefficients (and a floating-point fallback on overflow).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::float::FloatCore;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Exact rational `p/q`. Panics on `q == 0`.
pub fn rat(p: i128, q: i128) -> Rational {
    Rational::new(p, q)
}

/// Exact dyadic representation of a finite `f64`, when it fits in `i128`.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some(Rational::zero());
    }
    let (mantissa, exp, sign) = FloatCore::integer_decode(x);
    let mut num = mantissa as i128;
    let mut exp = exp as i32;
    while num & 1 == 0 && exp < 0 {
        num >>= 1;
        exp += 1;
    }
    let num = num * sign as i128;
    if exp >= 0 {
        if exp > 126 - 64 {
            return None;
        }
        Some(Rational::from_integer(num.checked_shl(exp as u32)?))
    } else {
        if -exp > 126 {
            return None;
        }
        Some(Rational::new(num, 1i128 << (-exp) as u32))
    }
}

/// A polynomial coefficient: an exact Gaussian rational, or a double
/// precision complex number once exact arithmetic overflowed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coeff {
    Exact { re: Rational, im: Rational },
    Approx(Complex64),
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::Exact { re: Rational::zero(), im: Rational::zero() }
    }

    pub fn one() -> Self {
        Coeff::real(Rational::one())
    }

    pub fn real(re: Rational) -> Self {
        Coeff::Exact { re, im: Rational::zero() }
    }

    pub fn imag_unit() -> Self {
        Coeff::Exact { re: Rational::zero(), im: Rational::one() }
    }

    pub fn from_f64(x: f64) -> Self {
        match rational_from_f64(x) {
            Some(r) => Coeff::real(r),
            None => Coeff::Approx(Complex64::new(x, 0.0)),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        match (rational_from_f64(z.re), rational_from_f64(z.im)) {
            (Some(re), Some(im)) => Coeff::Exact { re, im },
            _ => Coeff::Approx(z),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coeff::Exact { .. })
    }

    /// Exact zero test; approximate coefficients are zero only if both parts are `0.0`.
    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Exact { re, im } => re.is_zero() && im.is_zero(),
            Coeff::Approx(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Coeff::Exact { re, im } => Complex64::new(ratio_to_f64(re), ratio_to_f64(im)),
            Coeff::Approx(z) => *z,
        }
    }

    pub fn norm(&self) -> f64 {
        self.to_complex().norm()
    }

    pub fn conj(&self) -> Self {
        match *self {
            Coeff::Exact { re, im } => Coeff::Exact { re, im: -im },
            Coeff::Approx(z) => Coeff::Approx(z.conj()),
        }
    }

    pub fn neg(&self) -> Self {
        match *self {
            Coeff::Exact { re, im } => Coeff::Exact { re: -re, im: -im },
            Coeff::Approx(z) => Coeff::Approx(-z),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if let (Coeff::Exact { re: a, im: b }, Coeff::Exact { re: c, im: d }) = (self, other) {
            if let (Some(re), Some(im)) = (a.checked_add(c), b.checked_add(d)) {
                return Coeff::Exact { re, im };
            }
        }
        Coeff::Approx(self.to_complex() + other.to_complex())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if let (Coeff::Exact { re: a, im: b }, Coeff::Exact { re: c, im: d }) = (self, other) {
            let re = a
                .checked_mul(c)
                .zip(b.checked_mul(d))
                .and_then(|(x, y)| x.checked_sub(&y));
            let im = a
                .checked_mul(d)
                .zip(b.checked_mul(c))
                .and_then(|(x, y)| x.checked_add(&y));
            if let (Some(re), Some(im)) = (re, im) {
                return Coeff::Exact { re, im };
            }
        }
        Coeff::Approx(self.to_complex() * other.to_complex())
    }

    /// Division by a non-zero coefficient.
    pub fn div(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        if let Coeff::Exact { re: c, im: d } = other {
            let den = c.checked_mul(c).zip(d.checked_mul(d)).and_then(|(x, y)| x.checked_add(&y));
            if let Some(den) = den {
                let inv = Coeff::Exact { re: *c / den, im: -*d / den };
                return Some(self.mul(&inv));
            }
        }
        Some(Coeff::Approx(self.to_complex() / other.to_complex()))
    }

    pub fn scale(&self, factor: i128) -> Self {
        self.mul(&Coeff::real(Rational::from_integer(factor)))
    }

    /// Real and imaginary parts when the coefficient is exact.
    pub fn exact_parts(&self) -> Option<(Rational, Rational)> {
        match *self {
            Coeff::Exact { re, im } => Some((re, im)),
            Coeff::Approx(_) => None,
        }
    }
}

pub(crate) fn ratio_to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) => n / d,
        _ => f64::NAN,
    }
}

fn fmt_rational(r: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Which Wirtinger derivative to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wirtinger {
    /// `∂/∂z_k`
    Holomorphic,
    /// `∂/∂z̄_k`
    Antiholomorphic,
}

/// `coeff · z^holo · z̄^anti`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: Coeff,
    pub holo: Vec<u32>,
    pub anti: Vec<u32>,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.holo.iter().sum::<u32>() + self.anti.iter().sum::<u32>()
    }

    /// Exponent pair of the conjugate monomial.
    pub fn conj_key(&self) -> (Vec<u32>, Vec<u32>) {
        (self.anti.clone(), self.holo.clone())
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = self.coeff.to_complex();
        for (j, zj) in z.iter().enumerate() {
            for _ in 0..self.holo[j] {
                acc *= zj;
            }
            let zc = zj.conj();
            for _ in 0..self.anti[j] {
                acc *= zc;
            }
        }
        acc
    }
}

/// Polynomial `F(z, z̄)` in `l` complex variables, kept canonical: monomials
/// merged, zero coefficients pruned, sorted by `(holo, anti)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionPoly {
    l: usize,
    monomials: Vec<Monomial>,
}

type Key = (Vec<u32>, Vec<u32>);

impl InteractionPoly {
    pub fn zero(l: usize) -> Self {
        InteractionPoly { l, monomials: Vec::new() }
    }

    pub fn constant(l: usize, c: Coeff) -> Self {
        Self::from_terms(l, [(c, vec![0; l], vec![0; l])])
    }

    /// `z_j` (0-based `j`).
    pub fn variable(l: usize, j: usize) -> Result<Self> {
        check_index(j, l)?;
        let mut holo = vec![0; l];
        holo[j] = 1;
        Ok(Self::from_terms(l, [(Coeff::one(), holo, vec![0; l])]))
    }

    /// `z̄_j` (0-based `j`).
    pub fn conj_variable(l: usize, j: usize) -> Result<Self> {
        Ok(Self::variable(l, j)?.conj())
    }

    /// Builds a canonical polynomial from `(coeff, holo, anti)` triples.
    ///
    /// Panics if an exponent vector does not have length `l`.
    pub fn from_terms<I>(l: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Coeff, Vec<u32>, Vec<u32>)>,
    {
        let mut map: BTreeMap<Key, Coeff> = BTreeMap::new();
        for (c, holo, anti) in terms {
            assert!(holo.len() == l && anti.len() == l, "exponent length must equal l");
            map.entry((holo, anti))
                .and_modify(|acc| *acc = acc.add(&c))
                .or_insert(c);
        }
        let monomials = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((holo, anti), coeff)| Monomial { coeff, holo, anti })
            .collect();
        InteractionPoly { l, monomials }
    }

    pub fn components(&self) -> usize {
        self.l
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.monomials.iter().all(|m| m.coeff.is_exact())
    }

    /// Coefficient of `z^holo z̄^anti` (zero when absent).
    pub fn coeff_of(&self, holo: &[u32], anti: &[u32]) -> Coeff {
        self.monomials
            .binary_search_by(|m| (m.holo.as_slice(), m.anti.as_slice()).cmp(&(holo, anti)))
            .map(|i| self.monomials[i].coeff)
            .unwrap_or_else(|_| Coeff::zero())
    }

    /// `Some(d)` when every monomial has total degree `d`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.monomials.iter().map(Monomial::degree);
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.l, other.l);
        let terms = self
            .monomials
            .iter()
            .chain(other.monomials.iter())
            .map(|m| (m.coeff, m.holo.clone(), m.anti.clone()));
        Self::from_terms(self.l, terms)
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.l, other.l);
        let mut terms = Vec::with_capacity(self.monomials.len() * other.monomials.len());
        for a in &self.monomials {
            for b in &other.monomials {
                let holo = a.holo.iter().zip(&b.holo).map(|(x, y)| x + y).collect();
                let anti = a.anti.iter().zip(&b.anti).map(|(x, y)| x + y).collect();
                terms.push((a.coeff.mul(&b.coeff), holo, anti));
            }
        }
        Self::from_terms(self.l, terms)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.l, Coeff::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        let terms = self
            .monomials
            .iter()
            .map(|m| (m.coeff.mul(c), m.holo.clone(), m.anti.clone()));
        Self::from_terms(self.l, terms)
    }

    fn map_coeffs(&self, f: impl Fn(&Coeff) -> Coeff) -> Self {
        let terms = self
            .monomials
            .iter()
            .map(|m| (f(&m.coeff), m.holo.clone(), m.anti.clone()));
        Self::from_terms(self.l, terms)
    }

    /// Complex conjugate: conjugates coefficients and swaps `z ↔ z̄`.
    pub fn conj(&self) -> Self {
        let terms = self
            .monomials
            .iter()
            .map(|m| (m.coeff.conj(), m.anti.clone(), m.holo.clone()));
        Self::from_terms(self.l, terms)
    }

    /// `Im p = (p − conj p) / 2i`, as a polynomial.
    pub fn imag_part(&self) -> Self {
        let half_over_i = Coeff::Exact { re: Rational::zero(), im: rat(-1, 2) };
        self.sub(&self.conj()).scale(&half_over_i)
    }

    /// `Re p = (p + conj p) / 2`, as a polynomial.
    pub fn real_part(&self) -> Self {
        self.add(&self.conj()).scale(&Coeff::real(rat(1, 2)))
    }

    /// Multiplies by `z̄_k` (0-based).
    pub fn times_conj_var(&self, k: usize) -> Self {
        let terms = self.monomials.iter().map(|m| {
            let mut anti = m.anti.clone();
            anti[k] += 1;
            (m.coeff, m.holo.clone(), anti)
        });
        Self::from_terms(self.l, terms)
    }

    /// Formal Wirtinger derivative with respect to `z_k` or `z̄_k` (0-based `k`).
    pub fn wirtinger(&self, k: usize, which: Wirtinger) -> Result<Self> {
        check_index(k, self.l)?;
        let terms = self.monomials.iter().filter_map(|m| {
            let (mut holo, mut anti) = (m.holo.clone(), m.anti.clone());
            let e = match which {
                Wirtinger::Holomorphic => &mut holo[k],
                Wirtinger::Antiholomorphic => &mut anti[k],
            };
            if *e == 0 {
                return None;
            }
            let factor = *e as i128;
            *e -= 1;
            Some((m.coeff.scale(factor), holo, anti))
        });
        Ok(Self::from_terms(self.l, terms))
    }

    /// Direct monomial summation at `z`.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.l);
        self.monomials.iter().map(|m| m.eval(z)).sum()
    }

    /// Largest coefficient modulus (0 for the zero polynomial).
    pub fn max_coeff_norm(&self) -> f64 {
        self.monomials.iter().map(|m| m.coeff.norm()).fold(0.0, f64::max)
    }

    /// Identically zero: exact coefficients must vanish exactly, approximate
    /// ones must be below `rel_tol · scale`.
    pub fn vanishes(&self, scale: f64, rel_tol: f64) -> bool {
        self.monomials.iter().all(|m| match m.coeff {
            Coeff::Exact { .. } => m.coeff.is_zero(),
            Coeff::Approx(z) => z.norm() <= rel_tol * scale,
        })
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly::new(self)
    }
}

fn check_index(k: usize, l: usize) -> Result<()> {
    if k < l {
        Ok(())
    } else {
        Err(Error::ComponentOutOfRange { index: k + 1, l })
    }
}

impl fmt::Display for InteractionPoly {
    /// Prints in the grammar accepted by [`crate::nonlinearity::parse_interaction`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return f.write_str("0");
        }
        for (idx, m) in self.monomials.iter().enumerate() {
            let factors = monomial_factors(m);
            let (negative, body) = coeff_text(&m.coeff, factors.is_empty());
            match (idx, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            match (body.is_empty(), factors.is_empty()) {
                (true, _) => f.write_str(&factors)?,
                (false, true) => f.write_str(&body)?,
                (false, false) => write!(f, "{body}*{factors}")?,
            }
        }
        Ok(())
    }
}

fn monomial_factors(m: &Monomial) -> alloc::string::String {
    use alloc::format;
    use alloc::string::String;
    let mut parts: Vec<String> = Vec::new();
    for (j, &e) in m.holo.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("z{}", j + 1)),
            _ => parts.push(format!("z{}^{}", j + 1, e)),
        }
    }
    for (j, &e) in m.anti.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("conj(z{})", j + 1)),
            _ => parts.push(format!("conj(z{})^{}", j + 1, e)),
        }
    }
    parts.join("*")
}

/// Returns `(leading minus, text)`; the text is empty for a unit coefficient
/// multiplying a non-empty monomial.
fn coeff_text(c: &Coeff, bare: bool) -> (bool, alloc::string::String) {
    use alloc::format;
    use alloc::string::{String, ToString};
    struct R<'a>(&'a Rational);
    impl fmt::Display for R<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            fmt_rational(self.0, f)
        }
    }
    match c {
        Coeff::Exact { re, im } if im.is_zero() => {
            let neg = re.is_negative();
            let a = re.abs();
            if a.is_one() && !bare {
                (neg, String::new())
            } else {
                (neg, R(&a).to_string())
            }
        }
        Coeff::Exact { re, im } if re.is_zero() => {
            let neg = im.is_negative();
            let a = im.abs();
            if a.is_one() {
                (neg, "i".to_string())
            } else {
                (neg, format!("{}*i", R(&a)))
            }
        }
        Coeff::Exact { re, im } => {
            let sign = if im.is_negative() { '-' } else { '+' };
            (false, format!("({}{}{}*i)", R(re), sign, R(&im.abs())))
        }
        Coeff::Approx(z) => (false, format!("({:?}+{:?}*i)", z.re, z.im)),
    }
}

/// `(variable, power of z, power of z̄)` factors of one term.
type Factors = Vec<(usize, u32, u32)>;

/// Floating-point evaluation plan for a polynomial.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<(Complex64, Factors)>,
}

impl CompiledPoly {
    pub fn new(p: &InteractionPoly) -> Self {
        let terms = p
            .monomials
            .iter()
            .map(|m| {
                let factors = (0..p.l)
                    .filter(|&j| m.holo[j] + m.anti[j] > 0)
                    .map(|j| (j, m.holo[j], m.anti[j]))
                    .collect();
                (m.coeff.to_complex(), factors)
            })
            .collect();
        CompiledPoly { terms }
    }

    #[inline]
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for (c, factors) in &self.terms {
            let mut t = *c;
            for &(j, a, b) in factors {
                let zj = z[j];
                for _ in 0..a {
                    t *= zj;
                }
                let zc = zj.conj();
                for _ in 0..b {
                    t *= zc;
                }
            }
            sum += t;
        }
        sum
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z1bar_sq_z2() -> InteractionPoly {
        InteractionPoly::from_terms(2, [(Coeff::one(), vec![0, 1], vec![2, 0])])
    }

    #[test]
    fn wirtinger_power_rule() {
        let f = z1bar_sq_z2();
        let d = f.wirtinger(0, Wirtinger::Antiholomorphic).unwrap();
        assert_eq!(d, InteractionPoly::from_terms(2, [(Coeff::real(rat(2, 1)), vec![0, 1], vec![1, 0])]));
        let d = f.wirtinger(1, Wirtinger::Holomorphic).unwrap();
        assert_eq!(d, InteractionPoly::from_terms(2, [(Coeff::one(), vec![0, 0], vec![2, 0])]));
        assert!(f.wirtinger(0, Wirtinger::Holomorphic).unwrap().is_zero());
        assert!(f.wirtinger(2, Wirtinger::Holomorphic).is_err());
    }

    #[test]
    fn conj_swaps_exponents() {
        let f = z1bar_sq_z2().scale(&Coeff::imag_unit());
        let g = f.conj();
        assert_eq!(g.monomials()[0].holo, vec![2, 0]);
        assert_eq!(g.monomials()[0].anti, vec![0, 1]);
        assert_eq!(g.monomials()[0].coeff, Coeff::imag_unit().neg());
    }

    #[test]
    fn merging_prunes_zero() {
        let a = z1bar_sq_z2();
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn dyadic_conversion_is_exact() {
        assert_eq!(rational_from_f64(0.5), Some(rat(1, 2)));
        assert_eq!(rational_from_f64(-3.0), Some(rat(-3, 1)));
        let r = rational_from_f64(0.1).unwrap();
        assert_eq!(ratio_to_f64(&r), 0.1);
        assert_eq!(rational_from_f64(f64::NAN), None);
        assert_eq!(rational_from_f64(1e300), None);
    }

    #[test]
    fn overflow_falls_back_to_approx() {
        let big = Coeff::real(Rational::from_integer(i128::MAX / 2));
        let p = big.mul(&big);
        assert!(!p.is_exact());
        assert!(p.to_complex().re > 1e70);
    }

    #[test]
    fn eval_at_point() {
        let f = z1bar_sq_z2();
        let z = [Complex64::new(1.0, 1.0), Complex64::new(2.0, 0.0)];
        let v = f.eval(&z);
        assert!((v - Complex64::new(0.0, -4.0)).norm() < 1e-15);
        assert_eq!(f.compile().eval(&z), v);
    }
}
