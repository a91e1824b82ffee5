//! Quadrature realizations of the identity resolutions.
//!
//! The circle identity `I = −i∮_{|γ|=R} dγ/γ |γ⟩̃⟨γ|̃ J` becomes `∫_0^{2π} dθ`
//! after `γ = R e^{iθ}`. In truncation the integrand is a trigonometric
//! polynomial in θ, so the equispaced trapezoid rule is exact once the node
//! count exceeds the largest frequency. The planar Glauber resolution is kept
//! as a baseline check.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use twofloat::consts::TAU;
use twofloat::TwoFloat;

use crate::approx::PolySeries;
use crate::dd::{div, horner, sqrt_table, unit_root, Cdd, DdMatrix};
use crate::error::{Error, Result};
use crate::factorial::log_factorial;
use crate::fock::{coherent_unchecked, translation_dd, FockOperator, Truncation};

/// Circle contour `|γ| = R` sampled at `M` equispaced angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    radius: f64,
    nodes: usize,
}

impl QuadratureSpec {
    pub fn new(radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidQuadrature("radius"));
        }
        if nodes < 2 {
            return Err(Error::InvalidQuadrature("nodes"));
        }
        Ok(Self { radius, nodes })
    }

    /// Unit circle.
    pub fn unit(nodes: usize) -> Result<Self> {
        Self::new(1.0, nodes)
    }

    /// Circle of radius [`balanced_radius`].
    pub fn balanced(shift: C64, nodes: usize, cfg: Truncation) -> Result<Self> {
        Self::new(balanced_radius(shift, cfg), nodes)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Nodes `γ_j = R e^{2πij/M}` in ascending `j`.
    pub fn points(&self) -> Vec<C64> {
        (0..self.nodes)
            .map(|j| C64::from_polar(self.radius, 2.0 * PI * j as f64 / self.nodes as f64))
            .collect()
    }

    pub(crate) fn require_nodes(&self, required: usize) -> Result<()> {
        if self.nodes < required {
            return Err(Error::InsufficientNodes { nodes: self.nodes, required });
        }
        Ok(())
    }
}

/// Log of the largest node-term factor on a circle of radius `r`: the dual
/// bra grows like `√(m!)/r^m` and the ket like `(r + |shift|)^n/√(n!)`.
pub fn node_log_range(r: f64, shift: C64, cfg: Truncation) -> f64 {
    let (lr, ls) = (libm::log(r), libm::log(r + shift.norm()));
    (0..cfg.dim())
        .map(|n| {
            let half = 0.5 * log_factorial(n);
            (half - n as f64 * lr).max(n as f64 * ls - half)
        })
        .fold(0.0, f64::max)
}

/// Contour radius minimizing [`node_log_range`], scanned on a log grid over
/// `[0.05, 50]`. Rounding in the node sums scales with `exp(node_log_range)`.
pub fn balanced_radius(shift: C64, cfg: Truncation) -> f64 {
    const STEPS: usize = 2000;
    let (lo, hi) = (libm::log(0.05), libm::log(50.0));
    let mut best = (f64::INFINITY, 1.0);
    for i in 0..=STEPS {
        let r = libm::exp(lo + (hi - lo) * i as f64 / STEPS as f64);
        let range = node_log_range(r, shift, cfg);
        if range < best.0 {
            best = (range, r);
        }
    }
    best.1
}

/// `(2π/M) Σ_j P(γ_j) |γ_j + shift⟩̃ ⟨γ_j|̃ J` with `P(γ) = Σ_k weight[k] γ^k`,
/// summed in ascending node order.
///
/// Individual node terms exceed the converged entry by up to `R^{n−m}√(m!/n!)`,
/// so nodes, amplitudes and the running sum are carried in double-double and
/// rounded once at the end.
pub(crate) fn circle_sum(spec: &QuadratureSpec, cfg: Truncation, shift: C64, weight: &[C64]) -> Result<DdMatrix> {
    let d = cfg.dim();
    let nodes = spec.nodes();
    let radius = TwoFloat::from(spec.radius());
    let step = TAU / nodes as f64;
    let inv_tau = div(TwoFloat::from(1.0), TAU);
    let sqrt_n = sqrt_table(d);
    let shift = Cdd::from(shift);

    let mut acc = DdMatrix::zeros(d);
    let mut ket = alloc::vec![Cdd::ZERO; d];
    let mut bra = alloc::vec![Cdd::ZERO; d];
    for j in 0..nodes {
        let (c, s) = unit_root(j, nodes);
        let gamma = Cdd { re: radius * c, im: radius * s };
        let z = gamma + shift;
        let inv = gamma.inv();
        // |z⟩̃ amplitudes z^n/√(n!), weighted by P(γ)·2π/M
        ket[0] = horner(weight, gamma).scale(step);
        // ⟨γ|̃ J components γ^{−m}√(m!)/(2π)
        bra[0] = Cdd::real(inv_tau);
        for n in 1..d {
            ket[n] = (ket[n - 1] * z).div_real(sqrt_n[n]);
            bra[n] = (bra[n - 1] * inv).scale(sqrt_n[n]);
        }
        for (n, k) in ket.iter().enumerate() {
            for (m, b) in bra.iter().enumerate() {
                acc[(n, m)] += *k * *b;
            }
        }
    }
    if let Some((row, col)) = acc.non_finite() {
        return Err(Error::Overflow { row, col });
    }
    Ok(acc)
}

/// Trapezoid quadrature of the circle identity. Requires `M ≥ 2D`.
pub fn identity_quadrature(spec: &QuadratureSpec, cfg: Truncation) -> Result<FockOperator> {
    spec.require_nodes(2 * cfg.dim())?;
    let zero = C64::new(0.0, 0.0);
    FockOperator::checked(circle_sum(spec, cfg, zero, &[C64::new(1.0, 0.0)])?.split().0)
}

/// Quadrature of the translated identity
/// `I = −i∮ dγ/γ |γ+z0⟩̃⟨γ|̃ J e^{−z0 a†}`.
///
/// The contour sum reproduces the lower-triangular `e^{z0 a†}` exactly in
/// truncation, so the product with `e^{−z0 a†}` is the identity on every row.
pub fn translated_identity_quadrature(z0: C64, spec: &QuadratureSpec, cfg: Truncation) -> Result<FockOperator> {
    spec.require_nodes(2 * cfg.dim())?;
    let sum = circle_sum(spec, cfg, z0, &[C64::new(1.0, 0.0)])?;
    let back = translation_dd(-z0, cfg)?;
    FockOperator::checked(sum.mul(&back).split().0)
}

/// Polar grid for the planar resolution `(1/π)∫ d²α |α⟩⟨α|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanarGridSpec {
    pub radial_cutoff: f64,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
}

impl PlanarGridSpec {
    pub fn new(radial_cutoff: f64, radial_nodes: usize, angular_nodes: usize) -> Result<Self> {
        if !(radial_cutoff > 0.0 && radial_cutoff.is_finite()) {
            return Err(Error::InvalidQuadrature("radial_cutoff"));
        }
        if radial_nodes == 0 {
            return Err(Error::InvalidQuadrature("radial_nodes"));
        }
        if angular_nodes == 0 {
            return Err(Error::InvalidQuadrature("angular_nodes"));
        }
        Ok(Self { radial_cutoff, radial_nodes, angular_nodes })
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, by Newton iteration on
/// the three-term recurrence. Nodes are returned in ascending order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn_1 = if n == 1 { 1.0 } else { p0 };
            deriv = nf * (x * pn - pn_1) / (x * x - 1.0);
            let dx = pn / deriv;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(1/π) Σ w_ij f(α_ij) |α_ij⟩⟨α_ij|` over the polar grid.
///
/// Radius uses Gauss–Legendre on `[0, cutoff]` (no node at `r = 0`), angle the
/// trapezoid rule. The remaining error on the diagonal is the radial cutoff,
/// `⟨n|·|n⟩ = P(n+1, cutoff²)` (regularized lower incomplete gamma).
fn planar_sum<F>(grid: &PlanarGridSpec, cfg: Truncation, f: F) -> FockOperator
where
    F: Fn(C64) -> C64,
{
    let d = cfg.dim();
    let (x, w) = gauss_legendre(grid.radial_nodes);
    let half = 0.5 * grid.radial_cutoff;
    let dtheta = 2.0 * PI / grid.angular_nodes as f64;
    let mut acc = DMatrix::<C64>::zeros(d, d);
    for (xi, wi) in x.iter().zip(&w) {
        let r = half * (xi + 1.0);
        let radial = wi * half * r * dtheta / PI;
        for j in 0..grid.angular_nodes {
            let alpha = C64::from_polar(r, dtheta * j as f64);
            let amps = DVector::from_vec(coherent_unchecked(alpha, d));
            let weight = f(alpha) * radial;
            acc += (&amps * weight) * amps.adjoint();
        }
    }
    FockOperator::from_raw(acc)
}

/// Planar (Glauber) resolution of the identity over normalized coherent dyads.
pub fn glauber_identity_quadrature(grid: &PlanarGridSpec, cfg: Truncation) -> FockOperator {
    planar_sum(grid, cfg, |_| C64::new(1.0, 0.0))
}

/// `(1/π)∫ d²α f(α)|α⟩⟨α|` for a polynomial `f` about the origin; converges
/// to `Σ c_k a^k`.
pub fn entire_resolution_quadrature(series: &PolySeries, grid: &PlanarGridSpec, cfg: Truncation) -> Result<FockOperator> {
    if series.center() != C64::new(0.0, 0.0) {
        return Err(Error::CenterMismatch { expected: "0" });
    }
    Ok(planar_sum(grid, cfg, |alpha| series.eval(alpha)))
}
