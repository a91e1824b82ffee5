//! Fock-basis states and operators.
//!
//! Operators are dense `D×D` complex matrices with `entries[n][m] = ⟨n|Op|m⟩`.
//! States are amplitude vectors over `|0⟩..|D−1⟩`.

use alloc::vec::Vec;
use core::ops::{Add, Index, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::dd::{sqrt_table, Cdd, DdMatrix};
use crate::error::{Error, Result};
use crate::factorial::log_factorial;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 512;

/// Largest tail mass a normalized coherent state may leave outside the truncation.
pub const TAIL_MASS_LIMIT: f64 = 1e-10;

/// Number of retained Fock levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Truncation {
    dim: usize,
}

impl Truncation {
    pub fn new(dim: usize) -> Result<Self> {
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(Error::BadDimension(dim));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest |z|² admitted by the coherent-state tail guard, `D/4`.
    pub fn tail_guard(&self) -> f64 {
        self.dim as f64 / 4.0
    }
}

fn check_finite(values: &[C64]) -> Result<()> {
    match values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Ket amplitudes over the truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amps: Vec<C64>,
}

impl FockVector {
    pub fn from_amps(amps: Vec<C64>, cfg: Truncation) -> Result<Self> {
        if amps.len() != cfg.dim() {
            return Err(Error::DimensionMismatch { expected: cfg.dim(), found: amps.len() });
        }
        check_finite(&amps)?;
        Ok(Self { amps })
    }

    /// The Fock state `|n⟩`.
    pub fn basis(n: usize, cfg: Truncation) -> Self {
        let mut amps = alloc::vec![C64::new(0.0, 0.0); cfg.dim()];
        amps[n] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.norm_rows(self.dim())
    }

    /// Euclidean norm of the first `rows` amplitudes.
    pub fn norm_rows(&self, rows: usize) -> f64 {
        libm::sqrt(self.amps[..rows.min(self.dim())].iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { amps: self.amps.iter().map(|z| z * s).collect() }
    }

    pub(crate) fn to_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amps)
    }
}

impl Index<usize> for FockVector {
    type Output = C64;

    fn index(&self, n: usize) -> &C64 {
        &self.amps[n]
    }
}

impl Sub for &FockVector {
    type Output = FockVector;

    fn sub(self, rhs: &FockVector) -> FockVector {
        assert_eq!(self.dim(), rhs.dim());
        FockVector { amps: self.amps.iter().zip(&rhs.amps).map(|(a, b)| a - b).collect() }
    }
}

/// Bra components: `comps[m]` multiplies `⟨m|`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualBraVector {
    comps: Vec<C64>,
}

impl DualBraVector {
    pub fn comps(&self) -> &[C64] {
        &self.comps
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    /// ⟨self|ket⟩ with no conjugation; the components already are the bra.
    pub fn pair(&self, ket: &FockVector) -> C64 {
        self.comps.iter().zip(ket.amps()).map(|(b, k)| b * k).sum()
    }

    /// The bra composed with a diagonal operator on its right, `⟨·| diag(d)`.
    pub fn times_diagonal(&self, diag: &[f64]) -> Self {
        Self { comps: self.comps.iter().zip(diag).map(|(c, d)| c * d).collect() }
    }
}

/// Dense operator in the Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    mat: DMatrix<C64>,
}

impl FockOperator {
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), found: mat.ncols() });
        }
        if !(MIN_DIM..=MAX_DIM).contains(&mat.nrows()) {
            return Err(Error::BadDimension(mat.nrows()));
        }
        check_finite(mat.as_slice())?;
        Ok(Self { mat })
    }

    /// Wraps a matrix whose entries are finite by construction.
    pub(crate) fn from_raw(mat: DMatrix<C64>) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        Self { mat }
    }

    /// Rejects results that overflowed, naming the first offending entry.
    pub(crate) fn checked(mat: DMatrix<C64>) -> Result<Self> {
        for m in 0..mat.ncols() {
            for n in 0..mat.nrows() {
                let z = mat[(n, m)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::Overflow { row: n, col: m });
                }
            }
        }
        Ok(Self { mat })
    }

    pub fn zeros(cfg: Truncation) -> Self {
        Self { mat: DMatrix::zeros(cfg.dim(), cfg.dim()) }
    }

    pub fn identity(cfg: Truncation) -> Self {
        Self { mat: DMatrix::identity(cfg.dim(), cfg.dim()) }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        Self { mat: DMatrix::from_diagonal(&DVector::from_column_slice(diag)) }
    }

    /// Rank-one dyad `|ket⟩⟨bra|`.
    pub fn dyad(ket: &FockVector, bra: &DualBraVector) -> Self {
        let k = ket.to_dvector();
        let b = DVector::from_column_slice(bra.comps());
        Self { mat: &k * b.transpose() }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, n: usize, m: usize) -> C64 {
        self.mat[(n, m)]
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn apply(&self, ket: &FockVector) -> FockVector {
        let out = &self.mat * ket.to_dvector();
        FockVector { amps: out.as_slice().to_vec() }
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { mat: &self.mat * s }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// `self^k` by repeated multiplication; `k = 0` gives the identity.
    pub fn pow(&self, k: usize) -> Self {
        let mut acc = DMatrix::identity(self.dim(), self.dim());
        for _ in 0..k {
            acc = &acc * &self.mat;
        }
        Self { mat: acc }
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self { mat: &self.mat * &other.mat - &other.mat * &self.mat }
    }

    /// Largest entry magnitude over rows `0..rows`.
    pub fn max_abs_rows(&self, rows: usize) -> f64 {
        let rows = rows.min(self.dim());
        let mut best = 0.0f64;
        for m in 0..self.dim() {
            for n in 0..rows {
                best = best.max(self.mat[(n, m)].norm());
            }
        }
        best
    }

    /// Largest entrywise deviation `|self − other|` over rows `0..rows`.
    pub fn max_deviation_rows(&self, other: &Self, rows: usize) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let rows = rows.min(self.dim());
        let mut best = 0.0f64;
        for m in 0..self.dim() {
            for n in 0..rows {
                best = best.max((self.mat[(n, m)] - other.mat[(n, m)]).norm());
            }
        }
        best
    }

    /// Normwise relative deviation on rows `0..rows`: the largest entrywise
    /// deviation divided by the largest entry of `reference` in the block.
    pub fn relative_deviation_rows(&self, reference: &Self, rows: usize) -> f64 {
        let dev = self.max_deviation_rows(reference, rows);
        let scale = reference.max_abs_rows(rows);
        if scale > 0.0 {
            dev / scale
        } else {
            dev
        }
    }

    /// `max |Op − Op†|` entrywise; zero iff the operator is Hermitian.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_deviation_rows(&self.adjoint(), self.dim())
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;

    fn add(self, rhs: &FockOperator) -> FockOperator {
        FockOperator { mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;

    fn sub(self, rhs: &FockOperator) -> FockOperator {
        FockOperator { mat: &self.mat - &rhs.mat }
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;

    fn mul(self, rhs: &FockOperator) -> FockOperator {
        FockOperator { mat: &self.mat * &rhs.mat }
    }
}

/// Annihilation operator: `⟨n|a|m⟩ = √m` for `m = n + 1`.
pub fn ladder_a(cfg: Truncation) -> FockOperator {
    let d = cfg.dim();
    let mut mat = DMatrix::zeros(d, d);
    for m in 1..d {
        mat[(m - 1, m)] = C64::new(libm::sqrt(m as f64), 0.0);
    }
    FockOperator::from_raw(mat)
}

/// Creation operator, the conjugate transpose of [`ladder_a`].
pub fn ladder_adag(cfg: Truncation) -> FockOperator {
    ladder_a(cfg).adjoint()
}

/// `N = a†a = diag(0, 1, …, D−1)`.
///
/// Stored as the exact diagonal; the floating-point product of the ladder
/// matrices differs from it by rounding of `√n·√n`.
pub fn number_op(cfg: Truncation) -> FockOperator {
    let diag: Vec<C64> = (0..cfg.dim()).map(|n| C64::new(n as f64, 0.0)).collect();
    FockOperator::diagonal(&diag)
}

/// Σ_{n≥D} e^{−λ} λⁿ/n!, the Poisson mass a coherent state with |α|² = λ
/// loses to truncation. Summed directly rather than as `1 − Σ_{n<D}`.
pub fn poisson_tail_mass(lambda: f64, dim: usize) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let mut n = dim;
    let mut term = libm::exp(-lambda + n as f64 * libm::log(lambda) - log_factorial(n));
    let mut sum = 0.0;
    while term > 0.0 {
        sum += term;
        n += 1;
        term *= lambda / n as f64;
        if term < sum * 1e-17 && n as f64 > lambda {
            break;
        }
    }
    sum
}

/// Normalized coherent state together with the probability mass it loses
/// to truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentState {
    pub state: FockVector,
    pub tail_mass: f64,
}

// αⁿ/√(n!) by the recurrence amp[n] = amp[n−1]·α/√n
fn scaled_powers(z: C64, prefactor: f64, dim: usize) -> Vec<C64> {
    let mut amps = Vec::with_capacity(dim);
    let mut cur = C64::new(prefactor, 0.0);
    amps.push(cur);
    for n in 1..dim {
        cur = cur * z / libm::sqrt(n as f64);
        amps.push(cur);
    }
    amps
}

/// Coherent amplitudes with no tail guard; used where the truncated dyads
/// themselves are the object of interest (planar quadrature).
pub(crate) fn coherent_unchecked(alpha: C64, dim: usize) -> Vec<C64> {
    scaled_powers(alpha, libm::exp(-0.5 * alpha.norm_sqr()), dim)
}

/// `|α⟩ = e^{−|α|²/2} Σ αⁿ/√(n!) |n⟩`, truncated.
pub fn coherent(alpha: C64, cfg: Truncation) -> Result<CoherentState> {
    let norm_sqr = alpha.norm_sqr();
    let tail_mass = poisson_tail_mass(norm_sqr, cfg.dim());
    if norm_sqr > cfg.tail_guard() || tail_mass > TAIL_MASS_LIMIT {
        return Err(Error::TailTooLarge { norm_sqr, tail_mass });
    }
    let state = FockVector { amps: coherent_unchecked(alpha, cfg.dim()) };
    Ok(CoherentState { state, tail_mass })
}

/// Non-normalized coherent state `e^{γa†}|0⟩`, amplitudes `γⁿ/√(n!)`.
pub fn ncs(gamma: C64, cfg: Truncation) -> Result<FockVector> {
    let norm_sqr = gamma.norm_sqr();
    if norm_sqr > cfg.tail_guard() {
        return Err(Error::TailTooLarge {
            norm_sqr,
            tail_mass: poisson_tail_mass(norm_sqr, cfg.dim()),
        });
    }
    Ok(FockVector { amps: scaled_powers(gamma, 1.0, cfg.dim()) })
}

/// Analytic dual of [`ncs`]: components `γ^{−m}/√(m!)`.
///
/// This is the pairing under which the circle contour over `|γ⟩̃⟨γ|̃ J`
/// resolves the identity at every radius. It coincides with the Hermitian
/// conjugate of `ncs(γ)` only on the unit circle.
pub fn dual_bra(gamma: C64, cfg: Truncation) -> Result<DualBraVector> {
    if gamma == C64::new(0.0, 0.0) {
        return Err(Error::ZeroGamma);
    }
    let comps = scaled_powers(gamma.inv(), 1.0, cfg.dim());
    check_finite(&comps).map_err(|e| match e {
        Error::NonFinite(i) => Error::Overflow { row: 0, col: i },
        other => other,
    })?;
    Ok(DualBraVector { comps })
}

/// Diagonal of the weight operator `J`, entries `n!/(2π)`.
pub fn j_weight_diagonal(cfg: Truncation) -> Result<Vec<f64>> {
    let inv_two_pi = 1.0 / (2.0 * core::f64::consts::PI);
    let mut fact = 1.0f64;
    let mut diag = Vec::with_capacity(cfg.dim());
    for n in 0..cfg.dim() {
        if n > 0 {
            fact *= n as f64;
        }
        let w = fact * inv_two_pi;
        if !w.is_finite() {
            return Err(Error::Overflow { row: n, col: n });
        }
        diag.push(w);
    }
    Ok(diag)
}

/// Weight operator `J = (1/2π) Σ n! |n⟩⟨n|`. Overflows for `D > 171`.
pub fn j_weight(cfg: Truncation) -> Result<FockOperator> {
    let diag: Vec<C64> = j_weight_diagonal(cfg)?.into_iter().map(|w| C64::new(w, 0.0)).collect();
    Ok(FockOperator::diagonal(&diag))
}

/// Translation operator `T(β) = e^{βa†}` on NCS.
///
/// Truncated `a†` is nilpotent, so the exponential is the finite sum
/// `Σ_p (βa†)^p/p!`; its entries are evaluated in closed form,
/// `⟨m|T|j⟩ = β^{m−j} √(m!/j!) / (m−j)!` for `m ≥ j`.
pub fn translation_op(beta: C64, cfg: Truncation) -> Result<FockOperator> {
    FockOperator::checked(translation_dd(beta, cfg)?.split().0)
}

// column recurrence T[m][j] = T[m−1][j] · β√m / (m−j), in double-double
pub(crate) fn translation_dd(beta: C64, cfg: Truncation) -> Result<DdMatrix> {
    let d = cfg.dim();
    let sqrt_n = sqrt_table(d);
    let beta = Cdd::from(beta);
    let mut mat = DdMatrix::identity(d);
    for j in 0..d {
        for m in j + 1..d {
            mat[(m, j)] = (mat[(m - 1, j)] * beta).scale(sqrt_n[m] / (m - j) as f64);
        }
    }
    if let Some((row, col)) = mat.non_finite() {
        return Err(Error::Overflow { row, col });
    }
    Ok(mat)
}
