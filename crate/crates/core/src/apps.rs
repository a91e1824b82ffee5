//! `ln a`, `1/a` and the number-phase commutator.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::approx::{tail_bound, taylor_series, DiskDomain, FunctionKind};
use crate::error::{Error, Result};
use crate::fock::Truncation;
use crate::synth::{eigen_residual, synth_dyad, synth_translated, SynthResult};

const I: C64 = C64::new(0.0, 1.0);

/// `ln a` from the Taylor series of `ln z` about the domain center.
pub fn build_ln_a(domain: DiskDomain, degree: usize, cfg: Truncation) -> Result<SynthResult> {
    synth_translated(&taylor_series(FunctionKind::Log, domain, degree)?, cfg)
}

/// `1/a` from the Taylor series of `1/z` about the domain center.
pub fn build_inv_a(domain: DiskDomain, degree: usize, cfg: Truncation) -> Result<SynthResult> {
    synth_translated(&taylor_series(FunctionKind::Reciprocal, domain, degree)?, cfg)
}

/// State-level check of `[N, −i ln a] = i` at one coherent state.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorReport {
    pub alpha: C64,
    /// `‖P_V([N, −i ln a] − i)|α⟩‖ / ‖P_V|α⟩‖`.
    pub residual: f64,
    pub dim: usize,
    pub degree: usize,
    pub domain: DiskDomain,
    /// Rows the residual is taken over.
    pub rows: usize,
    /// `max |Op − Op†|` for `Op = −i ln a`. Recorded, never expected to vanish.
    pub non_self_adjointness: f64,
    /// `α` lies outside the open domain.
    pub extrapolated: bool,
}

/// Residual of `[N, −i·op] − i` applied to `|α⟩` on the valid rows less one.
pub fn commutator_test(ln_result: &SynthResult, alpha: C64, cfg: Truncation) -> Result<CommutatorReport> {
    let minus_i = C64::new(0.0, -1.0);
    let phase = ln_result.precise.scale(minus_i);
    let rows = ln_result.valid_rows.saturating_sub(1);
    let residual = phase.number_commutator().coherent_residual(alpha, I, rows, cfg)?;
    let dom = ln_result.domain;
    Ok(CommutatorReport {
        alpha,
        residual,
        dim: cfg.dim(),
        degree: cfg.dim() - ln_result.valid_rows,
        domain: dom,
        rows,
        non_self_adjointness: ln_result.op.scale(minus_i).hermiticity_defect(),
        extrapolated: (alpha - dom.center()).norm() >= dom.radius(),
    })
}

/// One `(L, D, α)` cell of a convergence sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub degree: usize,
    pub dim: usize,
    pub alpha: C64,
    pub tail_bound: Option<f64>,
    pub eigen_residual: Option<f64>,
    /// Only for `ln`.
    pub commutator_residual: Option<f64>,
    pub extrapolated: bool,
    /// Why the cell has no residuals.
    pub error: Option<Error>,
}

/// Eigen and commutator residuals over every `(L, D, α)`, ordered by
/// ascending `L`, then ascending `D`, then `α` in grid order.
///
/// Cells that cannot be computed carry their error instead of residuals.
pub fn sweep_report(
    kind: &FunctionKind,
    domain: DiskDomain,
    degrees: &[usize],
    dims: &[usize],
    alphas: &[C64],
) -> Vec<SweepCell> {
    let mut degrees = degrees.to_vec();
    let mut dims = dims.to_vec();
    degrees.sort_unstable();
    degrees.dedup();
    dims.sort_unstable();
    dims.dedup();
    let mut table = Vec::with_capacity(degrees.len() * dims.len() * alphas.len());
    for &degree in &degrees {
        let series = taylor_series(kind.clone(), domain, degree);
        let bound = series.as_ref().ok().and_then(|s| tail_bound(s).ok());
        for &dim in &dims {
            let built = Truncation::new(dim).and_then(|cfg| {
                let s = series.clone()?;
                Ok((cfg, synth_dyad(&s, cfg)?))
            });
            for &alpha in alphas {
                let mut cell = SweepCell {
                    degree,
                    dim,
                    alpha,
                    tail_bound: bound,
                    eigen_residual: None,
                    commutator_residual: None,
                    extrapolated: !domain.contains(alpha),
                    error: None,
                };
                let outcome = built.clone().and_then(|(cfg, result)| {
                    let eig = eigen_residual(&result, alpha, kind.eval(alpha, domain.center()), cfg)?;
                    let comm = match kind {
                        FunctionKind::Log => Some(commutator_test(&result, alpha, cfg)?.residual),
                        _ => None,
                    };
                    Ok((eig.residual, comm))
                });
                match outcome {
                    Ok((eig, comm)) => {
                        cell.eigen_residual = Some(eig);
                        cell.commutator_residual = comm;
                    }
                    Err(e) => cell.error = Some(e),
                }
                table.push(cell);
            }
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::ring;
    use crate::approx::PolySeries;
    use crate::fock::ladder_a;
    use crate::synth::{synth_origin, PreciseOperator};
    use alloc::vec;

    fn cfg(d: usize) -> Truncation {
        Truncation::new(d).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ln_domain() -> DiskDomain {
        DiskDomain::new(c(1.0, 0.0), 0.5).unwrap()
    }

    #[test]
    fn ln_a_eigen_relation() {
        let r = build_ln_a(ln_domain(), 30, cfg(64)).unwrap();
        assert!(eigen_residual(&r, c(1.0, 0.0), c(0.0, 0.0), cfg(64)).unwrap().residual <= 1e-9);
        let a = c(1.3, 0.0);
        assert!(eigen_residual(&r, a, a.ln(), cfg(64)).unwrap().residual <= 1e-6);
    }

    #[test]
    fn singular_domain_rejected() {
        let wide = DiskDomain::new(c(1.0, 0.0), 1.0).unwrap();
        assert!(matches!(build_ln_a(wide, 10, cfg(32)), Err(Error::DomainContainsSingularity { .. })));
        assert!(matches!(build_inv_a(wide, 10, cfg(32)), Err(Error::DomainContainsSingularity { .. })));
    }

    #[test]
    fn inv_a_eigen_and_left_inverse() {
        let d = cfg(64);
        let r = build_inv_a(ln_domain(), 30, d).unwrap();
        assert!(eigen_residual(&r, c(1.0, 0.0), c(1.0, 0.0), d).unwrap().residual <= 1e-9);
        let left = r.precise.mul_ladder_a().sub_identity(c(1.0, 0.0));
        for a in ring(c(1.0, 0.0), 0.4, 16) {
            assert!(left.coherent_residual(a, c(0.0, 0.0), r.valid_rows, d).unwrap() <= 1e-6);
        }
        // boundary point: bounded by the series tail, flagged
        let s = taylor_series(FunctionKind::Reciprocal, ln_domain(), 30).unwrap();
        let e = eigen_residual(&r, c(0.5, 0.0), c(2.0, 0.0), d).unwrap();
        assert!(e.residual <= tail_bound(&s).unwrap());
        assert!(ln_domain().on_boundary(c(0.5, 0.0)));
    }

    #[test]
    fn ladder_stand_in_commutator() {
        // [N, −i a] = i a, exact in truncation
        let z = PolySeries::from_coeffs(DiskDomain::new(c(0.0, 0.0), 1.0).unwrap(), vec![c(0.0, 0.0), c(1.0, 0.0)])
            .unwrap();
        let d = cfg(32);
        let r = synth_origin(&z, d).unwrap();
        let lhs = r.precise.scale(c(0.0, -1.0)).number_commutator();
        let rhs = PreciseOperator::from_operator(&ladder_a(d)).scale(c(0.0, 1.0));
        let defect = lhs.sub(&rhs);
        assert!(defect.coherent_residual(c(0.3, 0.2), c(0.0, 0.0), r.valid_rows - 1, d).unwrap() <= 1e-12);
    }

    #[test]
    fn ln_commutator_converges() {
        let d = cfg(96);
        let r10 = commutator_test(&build_ln_a(ln_domain(), 10, d).unwrap(), c(1.1, 0.0), d).unwrap();
        let r30 = commutator_test(&build_ln_a(ln_domain(), 30, d).unwrap(), c(1.1, 0.0), d).unwrap();
        assert!(r30.residual <= 1e-3);
        assert!(r30.residual < r10.residual);
        assert_eq!((r30.degree, r30.rows), (30, 65));
        assert!(r30.non_self_adjointness > 0.0 && !r30.extrapolated);
    }

    #[test]
    fn ln_inv_consistency() {
        // formally [ln a, a†] = 1/a
        let d = cfg(96);
        let ln = build_ln_a(ln_domain(), 30, d).unwrap();
        let inv = build_inv_a(ln_domain(), 30, d).unwrap();
        let diff = inv.precise.sub(&ln.precise.commutator_adag());
        for a in ring(c(1.0, 0.0), 0.3, 8) {
            assert!(diff.coherent_residual(a, c(0.0, 0.0), ln.valid_rows - 1, d).unwrap() <= 1e-4);
        }
    }

    #[test]
    fn sweep_smoke_and_order() {
        let table = sweep_report(&FunctionKind::Log, ln_domain(), &[30, 10, 20], &[64], &[c(1.2, 0.1)]);
        let degrees: Vec<usize> = table.iter().map(|t| t.degree).collect();
        assert_eq!(degrees, vec![10, 20, 30]);
        let eig: Vec<f64> = table.iter().map(|t| t.eigen_residual.unwrap()).collect();
        assert!(eig[0] >= eig[1] && eig[1] >= eig[2]);
        assert!(table.iter().all(|t| t.commutator_residual.unwrap().is_finite()));

        let single = sweep_report(&FunctionKind::Log, ln_domain(), &[10], &[32], &[c(1.0, 0.0)]);
        assert_eq!(single.len(), 1);
        assert!(single[0].eigen_residual.unwrap().is_finite() && single[0].error.is_none());
    }

    #[test]
    fn sweep_is_truncation_independent() {
        let t = sweep_report(&FunctionKind::Reciprocal, ln_domain(), &[20], &[32, 64], &[c(1.2, -0.1)]);
        let (a, b) = (t[0].eigen_residual.unwrap(), t[1].eigen_residual.unwrap());
        assert!((a - b).abs() <= 1e-10);
        assert!(t[0].commutator_residual.is_none());
    }

    #[test]
    fn sweep_records_cell_errors() {
        let t = sweep_report(&FunctionKind::Log, ln_domain(), &[40], &[32, 64], &[c(1.1, 0.0)]);
        assert_eq!(t[0].error, Some(Error::DegreeExceedsDim { degree: 40, dim: 32 }));
        assert!(t[1].eigen_residual.is_some());
        let bad = sweep_report(&FunctionKind::Log, ln_domain(), &[10], &[1], &[c(1.1, 0.0)]);
        assert_eq!(bad[0].error, Some(Error::BadDimension(1)));
    }
}
