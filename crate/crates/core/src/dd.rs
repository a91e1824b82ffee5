//! Complex double-double values and dense matrices.

use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;

use num_complex::Complex64 as C64;
use twofloat::consts::FRAC_PI_2;
use twofloat::TwoFloat;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Cdd {
    pub re: TwoFloat,
    pub im: TwoFloat,
}

impl Cdd {
    pub const ZERO: Self = Self { re: TwoFloat::from_f64(0.0), im: TwoFloat::from_f64(0.0) };

    pub fn real(re: TwoFloat) -> Self {
        Self { re, im: TwoFloat::from(0.0) }
    }

    pub fn div_real(self, s: TwoFloat) -> Self {
        Self { re: div(self.re, s), im: div(self.im, s) }
    }

    pub fn norm_sqr(self) -> TwoFloat {
        self.re * self.re + self.im * self.im
    }

    pub fn inv(self) -> Self {
        let den = self.norm_sqr();
        Self { re: div(self.re, den), im: -div(self.im, den) }
    }

    pub fn scale(self, s: TwoFloat) -> Self {
        Self { re: self.re * s, im: self.im * s }
    }

    pub fn from_parts(hi: C64, lo: C64) -> Self {
        Self { re: TwoFloat::new_add(hi.re, lo.re), im: TwoFloat::new_add(hi.im, lo.im) }
    }

    /// Nearest `Complex64`.
    pub fn to_c64(self) -> C64 {
        C64::new(self.re.hi() + self.re.lo(), self.im.hi() + self.im.lo())
    }

    /// Nearest `Complex64` and the remainder below it.
    pub fn split(self) -> (C64, C64) {
        let hi = self.to_c64();
        let re = self.re - hi.re;
        let im = self.im - hi.im;
        (hi, C64::new(re.hi() + re.lo(), im.hi() + im.lo()))
    }

    pub fn is_zero(self) -> bool {
        self.re.hi() == 0.0 && self.im.hi() == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.re.hi().is_finite() && self.im.hi().is_finite()
    }
}

impl From<C64> for Cdd {
    fn from(z: C64) -> Self {
        Self { re: TwoFloat::from(z.re), im: TwoFloat::from(z.im) }
    }
}

impl Add for Cdd {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl Sub for Cdd {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Neg for Cdd {
    type Output = Self;

    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl AddAssign for Cdd {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Mul for Cdd {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

/// `a / b` to double-double accuracy by three quotient refinements.
///
/// `TwoFloat`'s own division by a `TwoFloat` only reaches `f64` accuracy.
pub(crate) fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

/// `√n` for `n = 0..count`.
pub(crate) fn sqrt_table(count: usize) -> Vec<TwoFloat> {
    (0..count).map(|n| TwoFloat::from(n as f64).sqrt()).collect()
}

/// Dense row-major square matrix of [`Cdd`].
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct DdMatrix {
    dim: usize,
    data: Vec<Cdd>,
}

impl DdMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: alloc::vec![Cdd::ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut out = Self::zeros(dim);
        for n in 0..dim {
            out[(n, n)] = Cdd::real(TwoFloat::from(1.0));
        }
        out
    }

    pub fn from_parts(hi: &DMatrix<C64>, lo: &DMatrix<C64>) -> Self {
        let dim = hi.nrows();
        let mut out = Self::zeros(dim);
        for n in 0..dim {
            for m in 0..dim {
                out[(n, m)] = Cdd::from_parts(hi[(n, m)], lo[(n, m)]);
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, n: usize) -> &[Cdd] {
        &self.data[n * self.dim..(n + 1) * self.dim]
    }

    /// First non-finite entry, as `(row, col)`.
    pub fn non_finite(&self) -> Option<(usize, usize)> {
        self.data.iter().position(|z| !z.is_finite()).map(|i| (i / self.dim, i % self.dim))
    }

    /// Rounded matrix and the remainder matrix.
    pub fn split(&self) -> (DMatrix<C64>, DMatrix<C64>) {
        let mut hi = DMatrix::zeros(self.dim, self.dim);
        let mut lo = DMatrix::zeros(self.dim, self.dim);
        for n in 0..self.dim {
            for m in 0..self.dim {
                let (h, l) = self[(n, m)].split();
                hi[(n, m)] = h;
                lo[(n, m)] = l;
            }
        }
        (hi, lo)
    }

    pub fn map_indexed(&self, f: impl Fn(usize, usize, Cdd) -> Cdd) -> Self {
        let mut out = self.clone();
        for (i, z) in out.data.iter_mut().enumerate() {
            *z = f(i / self.dim, i % self.dim, *z);
        }
        out
    }

    /// Product in ascending inner-index order, skipping exact zeros on the left.
    pub fn mul(&self, rhs: &Self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for n in 0..d {
            let target = &mut out.data[n * d..(n + 1) * d];
            for (j, x) in self.row(n).iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (entry, y) in target.iter_mut().zip(rhs.row(j)) {
                    *entry += *x * *y;
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.map_indexed(|n, m, z| z - rhs[(n, m)])
    }

    /// Rows `0..rows` of `self · v`.
    pub fn apply_rows(&self, v: &[Cdd], rows: usize) -> Vec<Cdd> {
        (0..rows)
            .map(|n| self.row(n).iter().zip(v).fold(Cdd::ZERO, |acc, (x, y)| acc + *x * *y))
            .collect()
    }
}

impl Index<(usize, usize)> for DdMatrix {
    type Output = Cdd;

    fn index(&self, (n, m): (usize, usize)) -> &Cdd {
        &self.data[n * self.dim + m]
    }
}

impl IndexMut<(usize, usize)> for DdMatrix {
    fn index_mut(&mut self, (n, m): (usize, usize)) -> &mut Cdd {
        &mut self.data[n * self.dim + m]
    }
}

/// Horner evaluation of `Σ c_k x^k` with `f64` coefficients.
pub(crate) fn horner(coeffs: &[C64], x: Cdd) -> Cdd {
    coeffs.iter().rev().fold(Cdd::ZERO, |acc, c| acc * x + Cdd::from(*c))
}

// cos and sin of 0 ≤ x ≤ π/4 by Taylor series to double-double precision
fn cos_sin_reduced(x: TwoFloat) -> (TwoFloat, TwoFloat) {
    let x2 = x * x;
    let mut cos = TwoFloat::from(1.0);
    let mut sin = x;
    let mut cterm = TwoFloat::from(1.0);
    let mut sterm = x;
    let mut k = 1.0f64;
    loop {
        cterm = -cterm * x2 / (k * (k + 1.0));
        sterm = -sterm * x2 / ((k + 1.0) * (k + 2.0));
        cos += cterm;
        sin += sterm;
        k += 2.0;
        if cterm.hi().abs() < 1e-34 && sterm.hi().abs() < 1e-34 {
            break;
        }
    }
    (cos, sin)
}

/// `(cos, sin)` of `2πj/m`, with the quadrant and octant reduction done in
/// exact integer arithmetic.
pub(crate) fn unit_root(j: usize, m: usize) -> (TwoFloat, TwoFloat) {
    let num = 4 * (j % m);
    let quadrant = num / m;
    let rem = num - quadrant * m;
    // angle within the quadrant is (π/2)·rem/m
    let (c, s) = if 2 * rem <= m {
        cos_sin_reduced(FRAC_PI_2 * (rem as f64) / (m as f64))
    } else {
        let (c, s) = cos_sin_reduced(FRAC_PI_2 * ((m - rem) as f64) / (m as f64));
        (s, c)
    };
    match quadrant {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}
