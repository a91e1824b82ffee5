//! Target functions on closed disks and their polynomial approximations.
//!
//! A closed disk never separates the plane, so partial Taylor sums about the
//! disk center form a uniformly convergent polynomial sequence whenever the
//! nearest singularity lies outside the disk. A [`PolySeries`] stores one
//! cumulative coefficient vector `c_0..c_L` of `Σ c_k (z − z0)^k`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::factorial::log_factorial;

use FunctionKind as Kind;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Relative slack when deciding whether a point sits on or inside the disk.
const CONTAINMENT_SLACK: f64 = 1e-12;

/// Largest condition estimate of the least-squares normal system we accept.
pub const FIT_CONDITION_LIMIT: f64 = 1e12;

/// Closed disk `{z : |z − z0| ≤ r}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskDomain {
    center: C64,
    radius: f64,
}

impl DiskDomain {
    pub fn new(center: C64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidRadius(radius));
        }
        if !(center.re.is_finite() && center.im.is_finite()) {
            return Err(Error::NonFinite(0));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> C64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `r / |z0|`, the geometric convergence ratio of series about `z0`
    /// for functions singular at the origin.
    pub fn ratio(&self) -> f64 {
        self.radius / self.center.norm()
    }

    pub fn contains(&self, z: C64) -> bool {
        (z - self.center).norm() <= self.radius * (1.0 + CONTAINMENT_SLACK)
    }

    /// True when `z` lies on the boundary circle up to the containment slack.
    pub fn on_boundary(&self, z: C64) -> bool {
        ((z - self.center).norm() - self.radius).abs() <= self.radius * CONTAINMENT_SLACK
    }

    pub fn excludes_origin(&self) -> bool {
        self.radius < self.center.norm()
    }

    /// `count` equispaced points on the boundary circle starting at angle 0.
    pub fn boundary_points(&self, count: usize) -> Vec<C64> {
        ring(self.center, self.radius, count)
    }
}

/// `count` equispaced points on `|z − center| = radius`.
pub fn ring(center: C64, radius: f64, count: usize) -> Vec<C64> {
    (0..count)
        .map(|j| {
            let theta = 2.0 * core::f64::consts::PI * j as f64 / count as f64;
            center + C64::from_polar(radius, theta)
        })
        .collect()
}

/// Analytic target function.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionKind {
    Log,
    Reciprocal,
    Sqrt,
    Exp,
    /// Monomial coefficients `p_0..p_n` of `Σ p_j z^j`.
    Polynomial(Vec<C64>),
}

impl FunctionKind {
    /// Kinds whose singularity or branch point sits at the origin.
    pub fn singular_at_origin(&self) -> bool {
        matches!(self, Self::Log | Self::Reciprocal | Self::Sqrt)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Log => "ln",
            Self::Reciprocal => "inv",
            Self::Sqrt => "sqrt",
            Self::Exp => "exp",
            Self::Polynomial(_) => "poly",
        }
    }

    /// Reference value `f(z)`.
    ///
    /// `ln` and `√` use the branch that agrees with the principal branch at
    /// `center` and has its cut on the ray from 0 pointing away from
    /// `center`, which is the branch the Taylor series about `center` sums to.
    pub fn eval(&self, z: C64, center: C64) -> C64 {
        match self {
            Self::Log => {
                if center == ZERO {
                    z.ln()
                } else {
                    center.ln() + (z / center).ln()
                }
            }
            Self::Reciprocal => z.inv(),
            Self::Sqrt => {
                if center == ZERO {
                    z.sqrt()
                } else {
                    center.sqrt() * (z / center).sqrt()
                }
            }
            Self::Exp => z.exp(),
            Self::Polynomial(p) => horner(p, z),
        }
    }
}

fn horner(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().rev().fold(ZERO, |acc, c| acc * x + c)
}

/// Coefficients of `Σ p_j z^j` rewritten about `z0`:
/// `c_k = Σ_{j≥k} p_j C(j, k) z0^{j−k}`.
pub fn recenter(monomial: &[C64], z0: C64) -> Vec<C64> {
    let n = monomial.len();
    let mut powers = Vec::with_capacity(n);
    let mut p = ONE;
    for _ in 0..n {
        powers.push(p);
        p *= z0;
    }
    (0..n)
        .map(|k| {
            (k..n)
                .map(|j| {
                    let binom = libm::round(libm::exp(
                        log_factorial(j) - log_factorial(k) - log_factorial(j - k),
                    ));
                    monomial[j] * powers[j - k] * binom
                })
                .sum()
        })
        .collect()
}

/// Truncated power series `Σ_{k=0}^{L} c_k (z − z0)^k` on a disk domain.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySeries {
    domain: DiskDomain,
    coeffs: Vec<C64>,
    kind: Option<FunctionKind>,
}

impl PolySeries {
    /// Series with no attached function kind.
    pub fn from_coeffs(domain: DiskDomain, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if let Some(i) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { domain, coeffs, kind: None })
    }

    pub fn with_kind(mut self, kind: FunctionKind) -> Self {
        self.kind = Some(kind);
        self
    }

    pub fn center(&self) -> C64 {
        self.domain.center
    }

    pub fn domain(&self) -> &DiskDomain {
        &self.domain
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn kind(&self) -> Option<&FunctionKind> {
        self.kind.as_ref()
    }

    /// Horner evaluation at `z`.
    pub fn eval(&self, z: C64) -> C64 {
        horner(&self.coeffs, z - self.center())
    }

    /// `a·self + b·other`, for series sharing a center. The kind is dropped.
    pub fn combine(&self, a: C64, other: &Self, b: C64) -> Option<Self> {
        if self.center() != other.center() {
            return None;
        }
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| {
                a * self.coeffs.get(k).copied().unwrap_or(ZERO)
                    + b * other.coeffs.get(k).copied().unwrap_or(ZERO)
            })
            .collect();
        let radius = self.domain.radius.min(other.domain.radius);
        Some(Self { domain: DiskDomain { center: self.center(), radius }, coeffs, kind: None })
    }
}

/// A series value, flagged when `z` lies outside the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: C64,
    pub extrapolated: bool,
}

pub fn eval_series(series: &PolySeries, z: C64) -> SeriesValue {
    SeriesValue { value: series.eval(z), extrapolated: !series.domain.contains(z) }
}

/// Taylor partial sum of degree `degree` about the domain center.
pub fn taylor_series(kind: FunctionKind, domain: DiskDomain, degree: usize) -> Result<PolySeries> {
    let z0 = domain.center();
    if kind.singular_at_origin() && !domain.excludes_origin() {
        return Err(Error::DomainContainsSingularity {
            radius: domain.radius(),
            center_abs: z0.norm(),
        });
    }
    let n = degree + 1;
    let coeffs: Vec<C64> = match &kind {
        Kind::Log => {
            let inv = z0.inv();
            let mut out = Vec::with_capacity(n);
            out.push(z0.ln());
            let mut pow = ONE;
            for k in 1..n {
                pow *= inv;
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                out.push(pow * (sign / k as f64));
            }
            out
        }
        Kind::Reciprocal => {
            let inv = z0.inv();
            let mut out = Vec::with_capacity(n);
            let mut cur = inv;
            for _ in 0..n {
                out.push(cur);
                cur = -cur * inv;
            }
            out
        }
        Kind::Sqrt => {
            let inv = z0.inv();
            let mut out = Vec::with_capacity(n);
            let mut cur = z0.sqrt();
            out.push(cur);
            for k in 1..n {
                // C(1/2, k) = C(1/2, k−1)·(3/2 − k)/k
                cur = cur * inv * ((1.5 - k as f64) / k as f64);
                out.push(cur);
            }
            out
        }
        Kind::Exp => {
            let mut out = Vec::with_capacity(n);
            let mut cur = z0.exp();
            out.push(cur);
            for k in 1..n {
                cur /= k as f64;
                out.push(cur);
            }
            out
        }
        Kind::Polynomial(p) => {
            if let Some(i) = p.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(Error::NonFinite(i));
            }
            let mut full = if p.is_empty() { alloc::vec![ZERO] } else { recenter(p, z0) };
            full.resize(n, ZERO);
            full
        }
    };
    Ok(PolySeries::from_coeffs(domain, coeffs)?.with_kind(kind))
}

/// Upper bound on `sup_{z∈Ω} |f(z) − P_L(z)|` for the Taylor partial sums
/// produced by [`taylor_series`].
pub fn tail_bound(series: &PolySeries) -> Result<f64> {
    let kind = series.kind().ok_or(Error::UnknownTail)?;
    let dom = series.domain();
    let next = (series.degree() + 1) as f64;
    let bound = match kind {
        Kind::Log | Kind::Reciprocal | Kind::Sqrt => {
            let q = dom.ratio();
            let geometric = libm::pow(q, next) / (1.0 - q);
            match kind {
                // |c_k| r^k = q^k / k
                Kind::Log => geometric / next,
                // |c_k| r^k = q^k / |z0|
                Kind::Reciprocal => geometric / dom.center().norm(),
                // |c_k| r^k = √|z0| |C(1/2, k)| q^k, with |C(1/2, k)| nonincreasing for k ≥ 1
                _ => {
                    let mut b = 1.0f64;
                    for k in 1..=series.degree() + 1 {
                        b *= (1.5 - k as f64) / k as f64;
                    }
                    libm::sqrt(dom.center().norm()) * b.abs() * geometric
                }
            }
        }
        // Lagrange remainder with max |e^z| = e^{Re z0 + r} on the disk
        Kind::Exp => libm::exp(
            dom.center().re + dom.radius() + next * libm::log(dom.radius()) - log_factorial(series.degree() + 1),
        ),
        Kind::Polynomial(p) => {
            let full = recenter(p, dom.center());
            full.iter()
                .enumerate()
                .skip(series.degree() + 1)
                .map(|(k, c)| c.norm() * libm::pow(dom.radius(), k as f64))
                .fold(0.0, |acc, t| acc + t)
        }
    };
    Ok(bound)
}

/// Least-squares polynomial fitted to boundary samples.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFit {
    pub series: PolySeries,
    /// Largest `|P(z_i) − f_i|` over the samples.
    pub max_residual: f64,
    /// Condition estimate of the (radius-scaled) normal system.
    pub condition: f64,
}

/// Fits `Σ_{k≤L} c_k (z − z0)^k` to `(z_i, f_i)` samples in the least-squares
/// sense.
///
/// The basis is scaled by the sample radius `ρ`, i.e. columns `((z − z0)/ρ)^k`,
/// so equispaced samples give an orthogonal system; the condition estimate is
/// that of the scaled normal matrix, `(σ_max/σ_min)²`.
pub fn boundary_fit(samples: &[(C64, C64)], center: C64, degree: usize) -> Result<BoundaryFit> {
    let ncoef = degree + 1;
    let required = 2 * ncoef;
    if samples.len() < required {
        return Err(Error::TooFewSamples { required, found: samples.len() });
    }
    let rho = samples.iter().map(|(z, _)| (z - center).norm()).fold(0.0, f64::max);
    if !(rho > 0.0) {
        return Err(Error::InvalidRadius(rho));
    }
    for i in 0..samples.len() {
        for j in 0..i {
            if (samples[i].0 - samples[j].0).norm() <= 1e-14 * rho {
                return Err(Error::DuplicateSample(j, i));
            }
        }
    }

    let vander = DMatrix::from_fn(samples.len(), ncoef, |i, k| {
        let w = (samples[i].0 - center) / rho;
        w.powi(k as i32)
    });
    let rhs = DVector::from_iterator(samples.len(), samples.iter().map(|(_, f)| *f));

    let svd = vander.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { (smax / smin) * (smax / smin) } else { f64::INFINITY };
    if !(condition <= FIT_CONDITION_LIMIT) {
        return Err(Error::IllConditioned(condition));
    }
    let scaled = svd.solve(&rhs, 0.0).map_err(|_| Error::IllConditioned(condition))?;

    let mut scale = 1.0f64;
    let coeffs: Vec<C64> = scaled
        .iter()
        .map(|c| {
            let out = c / scale;
            scale *= rho;
            out
        })
        .collect();
    let series = PolySeries::from_coeffs(DiskDomain::new(center, rho)?, coeffs)?;
    let max_residual =
        samples.iter().map(|(z, f)| (series.eval(*z) - f).norm()).fold(0.0, f64::max);
    Ok(BoundaryFit { series, max_residual, condition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn disk(re: f64, im: f64, r: f64) -> DiskDomain {
        DiskDomain::new(c(re, im), r).unwrap()
    }

    // max |f − P_L| over `count` boundary points
    fn boundary_error(series: &PolySeries, kind: &FunctionKind, count: usize) -> f64 {
        series
            .domain()
            .boundary_points(count)
            .into_iter()
            .map(|z| (kind.eval(z, series.center()) - series.eval(z)).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn reciprocal_coefficients() {
        let s = taylor_series(Kind::Reciprocal, disk(1.0, 0.0, 0.5), 2).unwrap();
        assert_eq!(s.coeffs(), &[c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]);
        // central finite differences of 1/z at 1: f' = −1, f''/2 = 1
        let h = 1e-4;
        let f = |x: f64| 1.0 / x;
        let d1 = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        let d2 = (f(1.0 + h) - 2.0 * f(1.0) + f(1.0 - h)) / (h * h) / 2.0;
        assert!((s.coeffs()[1].re - d1).abs() < 1e-7);
        assert!((s.coeffs()[2].re - d2).abs() < 1e-5);
    }

    #[test]
    fn exp_coefficients() {
        let s = taylor_series(Kind::Exp, disk(0.0, 0.0, 1.0), 3).unwrap();
        let expected = [1.0, 1.0, 0.5, 1.0 / 6.0];
        for (got, want) in s.coeffs().iter().zip(expected) {
            assert!((got - c(want, 0.0)).norm() < 1e-16);
        }
    }

    #[test]
    fn log_coefficients() {
        let s = taylor_series(Kind::Log, disk(1.0, 0.0, 0.5), 3).unwrap();
        let expected = [0.0, 1.0, -0.5, 1.0 / 3.0];
        for (got, want) in s.coeffs().iter().zip(expected) {
            assert!((got - c(want, 0.0)).norm() < 1e-16);
        }
        // numerical derivatives of ln at 1
        let h = 1e-3;
        let f = |x: f64| libm::log(x);
        let d1 = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        let d3 = (f(1.0 + 2.0 * h) - 2.0 * f(1.0 + h) + 2.0 * f(1.0 - h) - f(1.0 - 2.0 * h))
            / (2.0 * h * h * h)
            / 6.0;
        assert!((s.coeffs()[1].re - d1).abs() < 1e-6);
        assert!((s.coeffs()[3].re - d3).abs() < 1e-4);
    }

    #[test]
    fn sqrt_coefficients_match_function() {
        let dom = disk(0.0, 2.0, 1.0);
        let s = taylor_series(Kind::Sqrt, dom, 60).unwrap();
        for z in dom.boundary_points(32) {
            let reference = Kind::Sqrt.eval(z, dom.center());
            assert!((s.eval(z) - reference).norm() < 1e-12);
            assert!((reference * reference - z).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_kinds_reject_origin() {
        for kind in [Kind::Log, Kind::Reciprocal, Kind::Sqrt] {
            assert!(matches!(
                taylor_series(kind, disk(1.0, 0.0, 1.0), 4),
                Err(Error::DomainContainsSingularity { .. })
            ));
        }
        assert!(taylor_series(Kind::Exp, disk(0.0, 0.0, 2.0), 4).is_ok());
        assert!(DiskDomain::new(c(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn branch_cut_points_away_from_center() {
        // center on the negative real axis: the principal log would be cut
        // through the disk, but the series branch is continuous there
        let dom = disk(-2.0, 0.0, 1.0);
        let s = taylor_series(Kind::Log, dom, 80).unwrap();
        let above = c(-2.0, 0.5);
        let below = c(-2.0, -0.5);
        for z in [above, below] {
            assert!((s.eval(z) - Kind::Log.eval(z, dom.center())).norm() < 1e-13);
        }
        assert!((Kind::Log.eval(above, dom.center()) - Kind::Log.eval(below, dom.center())).im.abs() < 1.0);
    }

    #[test]
    fn polynomial_tail_is_zero() {
        let p = Kind::Polynomial(vec![c(1.0, 0.0), c(-2.0, 1.0), c(0.5, 0.0)]);
        let s = taylor_series(p.clone(), disk(0.3, -0.2, 1.0), 2).unwrap();
        assert_eq!(tail_bound(&s).unwrap(), 0.0);
        // truncating below the degree leaves |c_2| r^2
        let short = taylor_series(p, disk(0.3, -0.2, 1.0), 1).unwrap();
        assert!((tail_bound(&short).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reciprocal_tail_bound_value() {
        let s = taylor_series(Kind::Reciprocal, disk(1.0, 0.0, 0.5), 10).unwrap();
        let bound = tail_bound(&s).unwrap();
        assert!((bound - libm::pow(0.5, 11.0) / 0.5).abs() < 1e-18);
        assert!((bound - 9.765625e-4).abs() < 1e-12);
        assert!(boundary_error(&s, &Kind::Reciprocal, 1000) <= bound);
    }

    #[test]
    fn log_tail_bound_is_small_and_sound() {
        let s = taylor_series(Kind::Log, disk(1.0, 0.0, 0.5), 20).unwrap();
        let bound = tail_bound(&s).unwrap();
        assert!(bound <= 1e-6);
        assert!(boundary_error(&s, &Kind::Log, 1000) <= bound);
    }

    #[test]
    fn tail_bounds_dominate_sampled_error() {
        let cases = [
            (Kind::Log, disk(0.5, 1.0, 0.7)),
            (Kind::Reciprocal, disk(-1.0, -1.0, 1.0)),
            (Kind::Sqrt, disk(2.0, 0.0, 1.5)),
            (Kind::Exp, disk(0.5, -0.5, 2.0)),
        ];
        for (kind, dom) in cases {
            for degree in [2usize, 5, 10, 20, 30] {
                let s = taylor_series(kind.clone(), dom, degree).unwrap();
                let err = boundary_error(&s, &kind, 500);
                assert!(err <= tail_bound(&s).unwrap() + 1e-14, "{kind:?} L={degree}");
            }
        }
    }

    #[test]
    fn unknown_tail_without_kind() {
        let s = PolySeries::from_coeffs(disk(0.0, 0.0, 1.0), vec![c(1.0, 0.0)]).unwrap();
        assert_eq!(tail_bound(&s), Err(Error::UnknownTail));
    }

    #[test]
    fn evaluation() {
        let s = taylor_series(Kind::Log, disk(1.0, 0.0, 0.5), 40).unwrap();
        assert_eq!(eval_series(&s, c(1.0, 0.0)).value, s.coeffs()[0]);
        let v = eval_series(&s, c(1.4, 0.0));
        assert!((v.value.re - 0.33647223662121289).abs() < 1e-9);
        assert!(!v.extrapolated);

        let r = taylor_series(Kind::Reciprocal, disk(1.0, 0.0, 0.5), 40).unwrap();
        assert!((eval_series(&r, c(0.6, 0.0)).value.re - 1.0 / 0.6).abs() < 1e-6);
        assert!(eval_series(&r, c(0.4, 0.0)).extrapolated);
    }

    #[test]
    fn fit_recovers_quadratic() {
        let z0 = c(0.4, 0.2);
        let dom = DiskDomain::new(z0, 0.8).unwrap();
        let samples: Vec<_> = dom.boundary_points(6).into_iter().map(|z| (z, z * z)).collect();
        let fit = boundary_fit(&samples, z0, 2).unwrap();
        let expected = recenter(&[ZERO, ZERO, ONE], z0);
        for (got, want) in fit.series.coeffs().iter().zip(&expected) {
            assert!((got - want).norm() < 1e-10);
        }
        assert!(fit.max_residual < 1e-12);
    }

    #[test]
    fn fit_reciprocal_close_to_taylor() {
        let dom = disk(1.0, 0.0, 0.5);
        let samples: Vec<_> = dom.boundary_points(64).into_iter().map(|z| (z, z.inv())).collect();
        let fit = boundary_fit(&samples, dom.center(), 10).unwrap();
        let taylor = taylor_series(Kind::Reciprocal, dom, 10).unwrap();
        for (got, want) in fit.series.coeffs().iter().zip(taylor.coeffs()) {
            assert!((got - want).norm() < 2e-3);
        }
    }

    #[test]
    fn fit_preconditions() {
        let dom = disk(0.0, 0.0, 1.0);
        let few: Vec<_> = dom.boundary_points(5).into_iter().map(|z| (z, z)).collect();
        assert_eq!(
            boundary_fit(&few, dom.center(), 2),
            Err(Error::TooFewSamples { required: 6, found: 5 })
        );
        let mut dup: Vec<_> = dom.boundary_points(6).into_iter().map(|z| (z, z)).collect();
        dup[3] = dup[1];
        assert_eq!(boundary_fit(&dup, dom.center(), 2), Err(Error::DuplicateSample(1, 3)));
        // samples bunched on a short arc cannot pin down a degree-20 fit
        let arc: Vec<_> = (0..42)
            .map(|j| {
                let z = C64::from_polar(1.0, 0.01 * j as f64);
                (z, z)
            })
            .collect();
        assert!(matches!(boundary_fit(&arc, ZERO, 20), Err(Error::IllConditioned(_))));
    }
}
