//! Construction of `f(a)` from a polynomial series.
//!
//! Routes:
//! - origin dyads, `Σ_k c_k a^k` written entrywise;
//! - translated dyads, `χ e^{−z0 a†}` with `χ = e^{z0 a†} Σ_k c_k a^k`;
//! - contour quadrature of either form;
//! - direct matrix powers `Σ_k c_k (a − z0)^k`, kept as an independent check.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use twofloat::TwoFloat;

use crate::approx::{DiskDomain, PolySeries};
use crate::contour::{circle_sum, QuadratureSpec};
use crate::dd::{sqrt_table, Cdd, DdMatrix};
use crate::error::{Error, Result};
use crate::fock::{coherent, translation_dd, FockOperator, Truncation};

/// Largest magnitude accepted for an entry of `χ`.
pub const CHI_ENTRY_LIMIT: f64 = 1e300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    DyadOrigin,
    DyadTranslated,
    QuadratureOrigin,
    QuadratureTranslated,
    DirectPolynomial,
}

/// An operator carried as the unevaluated sum of a rounded matrix and its
/// remainder, about 32 significant digits.
///
/// Band entries of `f(a)` are monomial coefficients of the truncated series
/// and cancel strongly when applied to a coherent state; state-level
/// residuals are evaluated from this form.
#[derive(Clone, Debug, PartialEq)]
pub struct PreciseOperator {
    mat: DdMatrix,
}

impl PreciseOperator {
    pub fn from_operator(op: &FockOperator) -> Self {
        let zero = DMatrix::zeros(op.dim(), op.dim());
        Self { mat: DdMatrix::from_parts(op.matrix(), &zero) }
    }

    pub fn from_parts(hi: &DMatrix<C64>, lo: &DMatrix<C64>) -> Result<Self> {
        if hi.shape() != lo.shape() || !hi.is_square() {
            return Err(Error::DimensionMismatch { expected: hi.nrows(), found: lo.ncols() });
        }
        Ok(Self { mat: DdMatrix::from_parts(hi, lo) })
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    /// Nearest `f64` operator.
    pub fn rounded(&self) -> FockOperator {
        FockOperator::from_raw(self.mat.split().0)
    }

    /// Remainder below [`PreciseOperator::rounded`].
    pub fn low_part(&self) -> DMatrix<C64> {
        self.mat.split().1
    }

    pub fn scale(&self, s: C64) -> Self {
        let s = Cdd::from(s);
        Self { mat: self.mat.map_indexed(|_, _, z| z * s) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { mat: self.mat.sub(&other.mat) }
    }

    pub fn sub_identity(&self, s: C64) -> Self {
        let s = Cdd::from(s);
        Self { mat: self.mat.map_indexed(|n, m, z| if n == m { z - s } else { z }) }
    }

    /// `self · a`.
    pub fn mul_ladder_a(&self) -> Self {
        let sqrt_n = sqrt_table(self.dim());
        let mat = &self.mat;
        Self { mat: mat.map_indexed(|n, m, _| if m == 0 { Cdd::ZERO } else { mat[(n, m - 1)].scale(sqrt_n[m]) }) }
    }

    /// `[N, self]`, entries `(n − m)·⟨n|self|m⟩`.
    pub fn number_commutator(&self) -> Self {
        Self { mat: self.mat.map_indexed(|n, m, z| z.scale(TwoFloat::from(n as f64 - m as f64))) }
    }

    /// `[self, a†] = self·a† − a†·self`.
    pub fn commutator_adag(&self) -> Self {
        let d = self.dim();
        let sqrt_n = sqrt_table(d + 1);
        let mat = &self.mat;
        Self {
            mat: mat.map_indexed(|n, m, _| {
                let right = if m + 1 < d { mat[(n, m + 1)].scale(sqrt_n[m + 1]) } else { Cdd::ZERO };
                let left = if n > 0 { mat[(n - 1, m)].scale(sqrt_n[n]) } else { Cdd::ZERO };
                right - left
            }),
        }
    }

    /// `‖P_V (self − value)|α⟩‖ / ‖P_V |α⟩‖` over rows `0..rows`.
    ///
    /// `α` must pass the coherent-state truncation guards.
    pub fn coherent_residual(&self, alpha: C64, value: C64, rows: usize, cfg: Truncation) -> Result<f64> {
        if cfg.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: cfg.dim() });
        }
        coherent(alpha, cfg)?;
        let d = self.dim();
        let rows = rows.min(d);
        // unnormalized amplitudes, the ratio is scale free
        let sqrt_n = sqrt_table(d);
        let a = Cdd::from(alpha);
        let mut amps = alloc::vec![Cdd::real(TwoFloat::from(1.0)); d];
        for n in 1..d {
            amps[n] = (amps[n - 1] * a).div_real(sqrt_n[n]);
        }
        let value = Cdd::from(value);
        let image = self.mat.apply_rows(&amps, rows);
        let mut defect = 0.0;
        let mut norm = 0.0;
        for (n, z) in image.iter().enumerate() {
            defect += (*z - value * amps[n]).to_c64().norm_sqr();
            norm += amps[n].to_c64().norm_sqr();
        }
        Ok(libm::sqrt(defect) / libm::sqrt(norm))
    }
}

/// A synthesized `f(a)` and the rows on which it is free of truncation error.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthResult {
    /// Rounded operator.
    pub op: FockOperator,
    pub precise: PreciseOperator,
    pub valid_rows: usize,
    pub route: Route,
    pub domain: DiskDomain,
}

/// `χ_{nm} = √(m!/n!) Σ_k c_k C(n, m−k) z0^{n−m+k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiMatrix {
    pub entries: DMatrix<C64>,
}

fn check_degree(series: &PolySeries, cfg: Truncation) -> Result<()> {
    if series.degree() >= cfg.dim() {
        return Err(Error::DegreeExceedsDim { degree: series.degree(), dim: cfg.dim() });
    }
    Ok(())
}

fn finish(mat: DdMatrix, series: &PolySeries, cfg: Truncation, route: Route) -> Result<SynthResult> {
    if let Some((row, col)) = mat.non_finite() {
        return Err(Error::Overflow { row, col });
    }
    let precise = PreciseOperator { mat };
    Ok(SynthResult {
        op: precise.rounded(),
        precise,
        valid_rows: cfg.dim() - series.degree(),
        route,
        domain: *series.domain(),
    })
}

// Σ_k c_k a^k by band: ⟨n|·|n+k⟩ = c_k √((n+k)!/n!)
fn origin_band(coeffs: &[C64], cfg: Truncation) -> DdMatrix {
    let d = cfg.dim();
    let sqrt_n = sqrt_table(d);
    let mut mat = DdMatrix::zeros(d);
    for n in 0..d {
        let mut ratio = TwoFloat::from(1.0);
        for (k, c) in coeffs.iter().enumerate() {
            let m = n + k;
            if m >= d {
                break;
            }
            if k > 0 {
                ratio *= sqrt_n[m];
            }
            mat[(n, m)] = Cdd::from(*c).scale(ratio);
        }
    }
    mat
}

// e^{z0 a†} Σ_k c_k a^k, which collects to the χ sum entry by entry
fn chi_dd(series: &PolySeries, cfg: Truncation) -> Result<DdMatrix> {
    let z0 = series.center();
    if z0 == C64::new(0.0, 0.0) {
        return Err(Error::CenterMismatch { expected: "nonzero" });
    }
    check_degree(series, cfg)?;
    let chi = translation_dd(z0, cfg)?.mul(&origin_band(series.coeffs(), cfg));
    let d = cfg.dim();
    for n in 0..d {
        for m in 0..d {
            if !(chi[(n, m)].to_c64().norm() <= CHI_ENTRY_LIMIT) {
                return Err(Error::Overflow { row: n, col: m });
            }
        }
    }
    Ok(chi)
}

/// `f(a) = Σ_{n≤m} c_{m−n} √(m!/n!) |n⟩⟨m|`.
pub fn synth_origin(series: &PolySeries, cfg: Truncation) -> Result<SynthResult> {
    if series.center() != C64::new(0.0, 0.0) {
        return Err(Error::CenterMismatch { expected: "0" });
    }
    check_degree(series, cfg)?;
    finish(origin_band(series.coeffs(), cfg), series, cfg, Route::DyadOrigin)
}

/// Dyad coefficients of `f(a) e^{z0 a†}`, zero for `m > n + L`.
pub fn chi_coeffs(series: &PolySeries, cfg: Truncation) -> Result<ChiMatrix> {
    Ok(ChiMatrix { entries: chi_dd(series, cfg)?.split().0 })
}

/// `f(a) = χ · e^{−z0 a†}`.
pub fn synth_translated(series: &PolySeries, cfg: Truncation) -> Result<SynthResult> {
    let chi = chi_dd(series, cfg)?;
    let back = translation_dd(-series.center(), cfg)?;
    finish(chi.mul(&back), series, cfg, Route::DyadTranslated)
}

/// Trapezoid quadrature of the contour form of `f(a)`. Requires `M ≥ 2D + L`.
pub fn synth_quadrature(series: &PolySeries, spec: &QuadratureSpec, cfg: Truncation) -> Result<SynthResult> {
    check_degree(series, cfg)?;
    spec.require_nodes(2 * cfg.dim() + series.degree())?;
    let z0 = series.center();
    let sum = circle_sum(spec, cfg, z0, series.coeffs())?;
    if z0 == C64::new(0.0, 0.0) {
        return finish(sum, series, cfg, Route::QuadratureOrigin);
    }
    let back = translation_dd(-z0, cfg)?;
    finish(sum.mul(&back), series, cfg, Route::QuadratureTranslated)
}

/// `Σ_k c_k (a − z0)^k` by repeated products with the bidiagonal `a − z0`.
pub fn synth_direct(series: &PolySeries, cfg: Truncation) -> Result<SynthResult> {
    check_degree(series, cfg)?;
    let d = cfg.dim();
    let sqrt_n = sqrt_table(d);
    let minus_z0 = -Cdd::from(series.center());
    let mut power = DdMatrix::identity(d);
    let mut acc = DdMatrix::zeros(d);
    for (k, c) in series.coeffs().iter().enumerate() {
        if k > 0 {
            let prev = power;
            power = prev.map_indexed(|n, m, z| {
                let z = z * minus_z0;
                if m > 0 {
                    z + prev[(n, m - 1)].scale(sqrt_n[m])
                } else {
                    z
                }
            });
        }
        let c = Cdd::from(*c);
        acc = acc.map_indexed(|n, m, z| z + power[(n, m)] * c);
    }
    finish(acc, series, cfg, Route::DirectPolynomial)
}

/// Closed-form dyad route for the series center: origin dyads at `z0 = 0`,
/// translated dyads otherwise.
pub fn synth_dyad(series: &PolySeries, cfg: Truncation) -> Result<SynthResult> {
    if series.center() == C64::new(0.0, 0.0) {
        synth_origin(series, cfg)
    } else {
        synth_translated(series, cfg)
    }
}

/// Relative eigen-relation defect at one coherent state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenResidual {
    pub residual: f64,
    /// `α` lies outside the series domain.
    pub extrapolated: bool,
}

/// `‖P_V (f(a)|α⟩ − f(α)|α⟩)‖ / ‖P_V |α⟩‖` on the valid rows.
pub fn eigen_residual(result: &SynthResult, alpha: C64, f_value: C64, cfg: Truncation) -> Result<EigenResidual> {
    Ok(EigenResidual {
        residual: result.precise.coherent_residual(alpha, f_value, result.valid_rows, cfg)?,
        extrapolated: !result.domain.contains(alpha),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{ring, tail_bound, taylor_series, FunctionKind};
    use crate::factorial::{log_binomial, log_factorial};
    use crate::fock::ladder_a;
    use alloc::vec;
    use alloc::vec::Vec;

    fn cfg(d: usize) -> Truncation {
        Truncation::new(d).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn series(center: C64, radius: f64, coeffs: Vec<C64>) -> PolySeries {
        PolySeries::from_coeffs(DiskDomain::new(center, radius).unwrap(), coeffs).unwrap()
    }

    fn taylor(kind: FunctionKind, center: C64, radius: f64, degree: usize) -> PolySeries {
        taylor_series(kind, DiskDomain::new(center, radius).unwrap(), degree).unwrap()
    }

    // Σ c_k (a − z0)^k with f64 matrix powers
    fn power_sum(s: &PolySeries, cfg: Truncation) -> FockOperator {
        let shifted = &ladder_a(cfg) - &FockOperator::identity(cfg).scale(s.center());
        s.coeffs().iter().enumerate().fold(FockOperator::zeros(cfg), |acc, (k, ck)| &acc + &shifted.pow(k).scale(*ck))
    }

    #[test]
    fn origin_reproduces_ladder_and_constants() {
        let z = series(c(0.0, 0.0), 1.0, vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let r = synth_origin(&z, cfg(8)).unwrap();
        assert_eq!(r.op, ladder_a(cfg(8)));
        assert_eq!(r.valid_rows, 7);
        assert_eq!(r.route, Route::DyadOrigin);
        let k = series(c(0.0, 0.0), 1.0, vec![c(2.5, -1.0)]);
        let r = synth_origin(&k, cfg(5)).unwrap();
        assert_eq!(r.op, FockOperator::identity(cfg(5)).scale(c(2.5, -1.0)));
        assert_eq!(r.valid_rows, 5);
    }

    #[test]
    fn origin_exp_matches_powers() {
        let s = taylor(FunctionKind::Exp, c(0.0, 0.0), 1.0, 12);
        let r = synth_origin(&s, cfg(32)).unwrap();
        let oracle = power_sum(&s, cfg(32));
        assert!(r.op.relative_deviation_rows(&oracle, r.valid_rows) <= 1e-13);
    }

    #[test]
    fn origin_band_is_exact() {
        let s = taylor(FunctionKind::Exp, c(0.0, 0.0), 1.0, 5);
        let r = synth_origin(&s, cfg(12)).unwrap();
        for n in 0..12 {
            for m in 0..12 {
                let inside = m >= n && m <= n + 5;
                assert_eq!(r.op.get(n, m) != c(0.0, 0.0), inside, "({n}, {m})");
            }
        }
    }

    #[test]
    fn degree_and_center_preconditions() {
        let s = taylor(FunctionKind::Exp, c(0.0, 0.0), 1.0, 8);
        assert_eq!(synth_origin(&s, cfg(8)), Err(Error::DegreeExceedsDim { degree: 8, dim: 8 }));
        assert_eq!(synth_direct(&s, cfg(8)).unwrap_err(), Error::DegreeExceedsDim { degree: 8, dim: 8 });
        let shifted = taylor(FunctionKind::Log, c(1.0, 0.0), 0.5, 4);
        assert!(matches!(synth_origin(&shifted, cfg(8)), Err(Error::CenterMismatch { .. })));
        assert!(matches!(chi_coeffs(&s, cfg(16)), Err(Error::CenterMismatch { .. })));
    }

    #[test]
    fn chi_constant_and_first_row() {
        let z0 = c(0.7, 0.4);
        let k = series(z0, 0.5, vec![c(1.5, 0.0)]);
        let chi = chi_coeffs(&k, cfg(10)).unwrap().entries;
        for n in 0..10 {
            for m in 0..10 {
                let expect = if m <= n {
                    let lw = 0.5 * (log_factorial(m) - log_factorial(n)) + log_binomial(n, m);
                    c(1.5, 0.0) * z0.powu((n - m) as u32) * libm::exp(lw)
                } else {
                    c(0.0, 0.0)
                };
                assert!((chi[(n, m)] - expect).norm() <= 1e-14 * expect.norm().max(1.0), "({n}, {m})");
            }
        }
        let s = taylor(FunctionKind::Log, c(1.0, 0.0), 0.5, 6);
        let chi = chi_coeffs(&s, cfg(12)).unwrap().entries;
        for m in 0..12 {
            let expect = if m <= 6 { s.coeffs()[m] * libm::exp(0.5 * log_factorial(m)) } else { c(0.0, 0.0) };
            assert!((chi[(0, m)] - expect).norm() <= 1e-14 * expect.norm().max(1.0));
        }
        for n in 0..12 {
            for m in n + 7..12 {
                assert_eq!(chi[(n, m)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn translated_shifted_ladder() {
        let z0 = c(1.0, -0.5);
        let s = series(z0, 0.5, vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let r = synth_translated(&s, cfg(16)).unwrap();
        let expect = &ladder_a(cfg(16)) - &FockOperator::identity(cfg(16)).scale(z0);
        assert_eq!(r.valid_rows, 15);
        assert!(r.op.max_deviation_rows(&expect, r.valid_rows) <= 1e-14);
    }

    #[test]
    fn translated_matches_powers() {
        for kind in [FunctionKind::Log, FunctionKind::Reciprocal] {
            let s = taylor(kind, c(1.0, 0.0), 0.5, 24);
            let r = synth_translated(&s, cfg(64)).unwrap();
            assert_eq!(r.valid_rows, 40);
            let oracle = power_sum(&s, cfg(64));
            assert!(r.op.relative_deviation_rows(&oracle, r.valid_rows) <= 1e-9);
        }
    }

    #[test]
    fn quadrature_routes() {
        let z = series(c(0.0, 0.0), 1.0, vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let r = synth_quadrature(&z, &QuadratureSpec::unit(64).unwrap(), cfg(16)).unwrap();
        assert_eq!(r.route, Route::QuadratureOrigin);
        assert!(r.op.max_deviation_rows(&ladder_a(cfg(16)), 16) <= 1e-12);

        let e = taylor(FunctionKind::Exp, c(0.0, 0.0), 1.0, 12);
        let q = synth_quadrature(&e, &QuadratureSpec::unit(128).unwrap(), cfg(32)).unwrap();
        let o = synth_origin(&e, cfg(32)).unwrap();
        assert!(q.op.relative_deviation_rows(&o.op, o.valid_rows) <= 1e-11);

        let l = taylor(FunctionKind::Log, c(1.0, 0.0), 0.5, 16);
        let q = synth_quadrature(&l, &QuadratureSpec::unit(128).unwrap(), cfg(32)).unwrap();
        let t = synth_translated(&l, cfg(32)).unwrap();
        assert_eq!(q.route, Route::QuadratureTranslated);
        assert_eq!(q.valid_rows, t.valid_rows);
        assert!(q.op.relative_deviation_rows(&t.op, t.valid_rows) <= 1e-9);
    }

    #[test]
    fn quadrature_node_threshold() {
        let l = taylor(FunctionKind::Log, c(1.0, 0.0), 0.5, 4);
        let spec = QuadratureSpec::unit(35).unwrap();
        assert_eq!(
            synth_quadrature(&l, &spec, cfg(16)).unwrap_err(),
            Error::InsufficientNodes { nodes: 35, required: 36 }
        );
        assert!(synth_quadrature(&l, &QuadratureSpec::unit(36).unwrap(), cfg(16)).is_ok());
    }

    #[test]
    fn direct_examples() {
        let k = series(c(1.0, 1.0), 0.5, vec![c(-3.0, 0.0)]);
        let r = synth_direct(&k, cfg(6)).unwrap();
        assert_eq!(r.op, FockOperator::identity(cfg(6)).scale(c(-3.0, 0.0)));
        let sq = series(c(0.0, 0.0), 1.0, vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let r = synth_direct(&sq, cfg(4)).unwrap();
        assert!((r.op.get(0, 2) - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((r.op.get(1, 3) - c(6f64.sqrt(), 0.0)).norm() < 1e-15);
        assert_eq!(r.op.get(0, 1), c(0.0, 0.0));
        assert_eq!(r.op.get(2, 0), c(0.0, 0.0));
    }

    #[test]
    fn eigen_residual_examples() {
        let z = series(c(0.0, 0.0), 1.0, vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let r = synth_origin(&z, cfg(32)).unwrap();
        let e = eigen_residual(&r, c(0.3, 0.0), c(0.3, 0.0), cfg(32)).unwrap();
        assert!(e.residual <= 1e-12 && !e.extrapolated);

        let s = taylor(FunctionKind::Log, c(1.0, 0.0), 0.5, 30);
        let r = synth_translated(&s, cfg(64)).unwrap();
        let alpha = c(1.2, 0.0);
        let e = eigen_residual(&r, alpha, alpha.ln(), cfg(64)).unwrap();
        assert!(e.residual <= tail_bound(&s).unwrap().max(1e-9));
        let e = eigen_residual(&r, c(1.0, 0.0), c(0.0, 0.0), cfg(64)).unwrap();
        assert!(e.residual <= 1e-10);
        let out = eigen_residual(&r, c(1.7, 0.0), c(1.7, 0.0).ln(), cfg(64)).unwrap();
        assert!(out.extrapolated && out.residual.is_finite());
    }

    #[test]
    fn precise_residual_beats_rounded_operator() {
        let s = taylor(FunctionKind::Reciprocal, c(1.0, 0.0), 0.5, 30);
        let r = synth_translated(&s, cfg(64)).unwrap();
        let rounded = PreciseOperator::from_operator(&r.op);
        let (hi, lo) = (r.precise.rounded(), r.precise.low_part());
        assert_eq!(hi, r.op);
        assert_eq!(PreciseOperator::from_parts(hi.matrix(), &lo).unwrap(), r.precise);
        let mut worst_precise = 0.0f64;
        let mut worst_rounded = 0.0f64;
        for alpha in ring(c(1.0, 0.0), 0.4, 16) {
            let f = alpha.inv();
            worst_precise = worst_precise.max(r.precise.coherent_residual(alpha, f, 34, cfg(64)).unwrap());
            worst_rounded = worst_rounded.max(rounded.coherent_residual(alpha, f, 34, cfg(64)).unwrap());
        }
        assert!(worst_precise <= 1e-11);
        assert!(worst_rounded > 100.0 * worst_precise);
    }

    #[test]
    fn precise_operator_algebra() {
        let d = cfg(10);
        let a = PreciseOperator::from_operator(&ladder_a(d));
        // [N, a] = −a
        let c1 = a.number_commutator().sub(&a.scale(c(-1.0, 0.0)));
        assert!(c1.rounded().max_abs_rows(10) == 0.0);
        // [a, a†] = 1 away from the truncation corner
        let comm = a.commutator_adag().sub_identity(c(1.0, 0.0));
        assert!(comm.rounded().max_abs_rows(9) < 1e-15);
        // a·a entries √(m(m−1)) on the second superdiagonal
        let aa = a.mul_ladder_a().rounded();
        assert!((aa.get(0, 2) - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert_eq!(a.dim(), 10);
    }
}
