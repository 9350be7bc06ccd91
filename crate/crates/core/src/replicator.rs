//! Replicator-type systems with pairwise and triplet interaction weights.
//!
//! `ṗ_i = ((Kp)_i − pᵀHp) p_i` on the probability simplex, where `K` holds
//! the pairwise weights and `H` the triplet weights. No relationship between
//! `K` and `H` is assumed.

use nalgebra::DMatrix;
use num_traits::Zero;

use thiserror::Error;

use crate::eigen::{eig_dense, EigenError};
use crate::partition::{all_partitions, Partition};
use crate::rational::{rat_to_f64, Rat, RatMatrix};
use crate::synchrony::matrix_synchrony_check;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplicatorError {
    #[error("matrices must be square and of equal size (K is {k_rows}x{k_cols}, H is {h_rows}x{h_cols})")]
    DimensionMismatch { k_rows: usize, k_cols: usize, h_rows: usize, h_cols: usize },
    #[error("state has {found} entries, expected {expected}")]
    StateSize { expected: usize, found: usize },
    #[error("state is not an equilibrium (residual {residual:e})")]
    NotEquilibrium { residual: f64 },
    #[error("state component {index} is zero")]
    ZeroComponent { index: usize },
    #[error("system of {size} species exceeds enumeration cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("state is not on the simplex: {0}")]
    NotOnSimplex(String),
    #[error("eigenvalue computation failed: {0}")]
    Eigen(#[from] EigenError),
}

/// Pairwise matrix `K` and triplet matrix `H` of one replicator-type system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicatorSystem {
    pairwise: RatMatrix,
    triplet: RatMatrix,
}

impl ReplicatorSystem {
    pub fn new(pairwise: RatMatrix, triplet: RatMatrix) -> Result<ReplicatorSystem, ReplicatorError> {
        if !pairwise.is_square()
            || !triplet.is_square()
            || pairwise.nrows() != triplet.nrows()
        {
            return Err(ReplicatorError::DimensionMismatch {
                k_rows: pairwise.nrows(),
                k_cols: pairwise.ncols(),
                h_rows: triplet.nrows(),
                h_cols: triplet.ncols(),
            });
        }
        Ok(ReplicatorSystem { pairwise, triplet })
    }

    pub fn len(&self) -> usize {
        self.pairwise.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pairwise(&self) -> &RatMatrix {
        &self.pairwise
    }

    pub fn triplet(&self) -> &RatMatrix {
        &self.triplet
    }

    fn check_len(&self, p: usize) -> Result<(), ReplicatorError> {
        if p != self.len() {
            return Err(ReplicatorError::StateSize { expected: self.len(), found: p });
        }
        Ok(())
    }
}

/// Validated simplex state: entries in `[0, 1]` summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexState(Vec<f64>);

impl SimplexState {
    pub fn new(p: Vec<f64>) -> Result<SimplexState, ReplicatorError> {
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ReplicatorError::NotOnSimplex(format!("entries sum to {sum}")));
        }
        if let Some((i, &v)) = p.iter().enumerate().find(|&(_, &v)| !(-1e-12..=1.0 + 1e-12).contains(&v)) {
            return Err(ReplicatorError::NotOnSimplex(format!("entry {i} is {v}")));
        }
        Ok(SimplexState(p))
    }

    pub fn uniform(n: usize) -> SimplexState {
        SimplexState(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn quadratic_form(m: &RatMatrix, p: &[Rat]) -> Rat {
    m.mul_vec(p).iter().zip(p).map(|(hp, pi)| hp * pi).sum()
}

/// `ṗ_i = ((Kp)_i − pᵀHp) p_i`, exact.
pub fn field_exact(sys: &ReplicatorSystem, p: &[Rat]) -> Result<Vec<Rat>, ReplicatorError> {
    sys.check_len(p.len())?;
    let kp = sys.pairwise.mul_vec(p);
    let php = quadratic_form(&sys.triplet, p);
    Ok(kp.into_iter().zip(p).map(|(kpi, pi)| (kpi - &php) * pi).collect())
}

/// `ṗ_i = ((Kp)_i − pᵀHp) p_i` in floating point.
pub fn field_f64(sys: &ReplicatorSystem, p: &[f64]) -> Result<Vec<f64>, ReplicatorError> {
    sys.check_len(p.len())?;
    let n = sys.len();
    let k = sys.pairwise.to_f64();
    let h = sys.triplet.to_f64();
    let mut kp = vec![0.0; n];
    let mut hp = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            kp[i] += k[(i, j)] * p[j];
            hp[i] += h[(i, j)] * p[j];
        }
    }
    let php: f64 = hp.iter().zip(p).map(|(a, b)| a * b).sum();
    Ok((0..n).map(|i| (kp[i] - php) * p[i]).collect())
}

fn residual_f64(sys: &ReplicatorSystem, p: &[Rat]) -> Result<f64, ReplicatorError> {
    let field = field_exact(sys, p)?;
    Ok(field.iter().map(|v| rat_to_f64(v).abs()).fold(0.0, f64::max))
}

/// Analytic Jacobian at an equilibrium with no zero component: row `i` is
/// `p_i (K_i − pᵀ(H + Hᵀ))`. Agrees with central finite differences.
pub fn jacobian_exact(sys: &ReplicatorSystem, p: &[Rat]) -> Result<RatMatrix, ReplicatorError> {
    sys.check_len(p.len())?;
    let residual = residual_f64(sys, p)?;
    if residual > 1e-10 {
        return Err(ReplicatorError::NotEquilibrium { residual });
    }
    if let Some(index) = p.iter().position(Rat::is_zero) {
        return Err(ReplicatorError::ZeroComponent { index });
    }
    let n = sys.len();
    let symmetrized = sys.triplet.add(&sys.triplet.transpose());
    // Row vector pᵀ(H + Hᵀ).
    let correction = symmetrized.transpose().mul_vec(p);
    let mut out = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, (sys.pairwise.get(i, j) - &correction[j]) * &p[i]);
        }
    }
    Ok(out)
}

/// Floating-point wrapper of [`jacobian_exact`]'s formula with a `1e-10`
/// equilibrium tolerance.
pub fn jacobian_f64(sys: &ReplicatorSystem, p: &[f64]) -> Result<DMatrix<f64>, ReplicatorError> {
    sys.check_len(p.len())?;
    let field = field_f64(sys, p)?;
    let residual = field.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if residual > 1e-10 {
        return Err(ReplicatorError::NotEquilibrium { residual });
    }
    if let Some(index) = p.iter().position(|&v| v == 0.0) {
        return Err(ReplicatorError::ZeroComponent { index });
    }
    let n = sys.len();
    let k = sys.pairwise.to_f64();
    let h = sys.triplet.to_f64();
    let correction: Vec<f64> =
        (0..n).map(|j| (0..n).map(|l| p[l] * (h[(l, j)] + h[(j, l)])).sum()).collect();
    Ok(DMatrix::from_fn(n, n, |i, j| (k[(i, j)] - correction[j]) * p[i]))
}

/// Sign classification of one Jacobian eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenClass {
    Zero,
    PurelyImaginary,
    NegativeRealPart,
    PositiveRealPart,
}

pub fn classify_eigenvalue(re: f64, im: f64, tolerance: f64) -> EigenClass {
    if re.abs() <= tolerance && im.abs() <= tolerance {
        EigenClass::Zero
    } else if re.abs() <= tolerance {
        EigenClass::PurelyImaginary
    } else if re < 0.0 {
        EigenClass::NegativeRealPart
    } else {
        EigenClass::PositiveRealPart
    }
}

/// Linear stability data of an interior equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub eigenvalues: Vec<nalgebra::Complex<f64>>,
    pub classifications: Vec<EigenClass>,
    /// Eigenvalue along `(1, …, 1)` when the diagonal is an eigendirection.
    pub diagonal_eigenvalue: Option<f64>,
    pub tolerance: f64,
}

/// Eigenvalues and sign classes of the analytic Jacobian at `p`; the
/// all-ones eigendirection (motion along full synchrony) is flagged apart.
pub fn stability_report(sys: &ReplicatorSystem, p: &[Rat]) -> Result<StabilityReport, ReplicatorError> {
    let tolerance = 1e-9;
    let jacobian = jacobian_exact(sys, p)?.to_f64();
    let eigenvalues = eig_dense(&jacobian)?;
    let classifications =
        eigenvalues.iter().map(|v| classify_eigenvalue(v.re, v.im, tolerance)).collect();
    let image: Vec<f64> = (0..sys.len()).map(|i| jacobian.row(i).sum()).collect();
    let mean = image.iter().sum::<f64>() / image.len().max(1) as f64;
    let diagonal_eigenvalue = image
        .iter()
        .all(|v| (v - mean).abs() <= tolerance * mean.abs().max(1.0))
        .then_some(mean);
    Ok(StabilityReport { eigenvalues, classifications, diagonal_eigenvalue, tolerance })
}

/// All partitions whose polydiagonal is invariant under the pairwise matrix;
/// these are exactly the synchrony spaces of the system.
pub fn synchrony_partitions(sys: &ReplicatorSystem, cap: usize) -> Result<Vec<Partition>, ReplicatorError> {
    let n = sys.len();
    if n > cap {
        return Err(ReplicatorError::TooLarge { size: n, cap });
    }
    let mut out = Vec::new();
    for part in all_partitions(n) {
        if matrix_synchrony_check(&sys.pairwise, &part).expect("dimensions match") {
            out.push(part);
        }
    }
    Ok(out)
}

/// `d/dt Σ p_i = pᵀKp − (pᵀHp)(Σ p_i)`, exact. Vanishes identically on the
/// simplex when `K = H`.
pub fn simplex_drift_exact(sys: &ReplicatorSystem, p: &[Rat]) -> Result<Rat, ReplicatorError> {
    sys.check_len(p.len())?;
    let total: Rat = p.iter().sum();
    Ok(quadratic_form(&sys.pairwise, p) - quadratic_form(&sys.triplet, p) * total)
}

pub fn simplex_drift_f64(sys: &ReplicatorSystem, p: &[f64]) -> Result<f64, ReplicatorError> {
    Ok(field_f64(sys, p)?.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{eval_field_exact, generic_rationals, ExactCoupling};
    use crate::hypergraph::{EdgeSpec, Hypergraph};
    use crate::rational::{format_rat, rat, rat_int};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Skew pairwise matrix of the first worked example.
    fn skew_pairwise() -> RatMatrix {
        RatMatrix::from_i64_rows(&[
            &[0, -1, 2, -1],
            &[1, 0, 0, -1],
            &[-2, 0, 0, 2],
            &[1, 1, -2, 0],
        ])
        .scale(&rat(1, 2))
    }

    /// Symmetric triplet matrix of the first worked example.
    fn symmetric_triplet() -> RatMatrix {
        RatMatrix::from_i64_rows(&[
            &[2, -1, 1, -2],
            &[-1, 2, -2, 1],
            &[1, -2, 2, -1],
            &[-2, 1, -1, 2],
        ])
    }

    /// The third worked example: identical pairwise and triplet matrices.
    fn diag_perturbed() -> RatMatrix {
        RatMatrix::from_i64_rows(&[
            &[1, -1, 1, -1],
            &[1, 1, -1, -1],
            &[-1, 1, 1, -1],
            &[1, 1, 1, -3],
        ])
    }

    fn uniform4() -> Vec<Rat> {
        vec![rat(1, 4); 4]
    }

    #[test]
    fn uniform_state_is_equilibrium() {
        let sys = ReplicatorSystem::new(diag_perturbed(), diag_perturbed()).unwrap();
        let field = field_exact(&sys, &uniform4()).unwrap();
        assert!(field.iter().all(Rat::is_zero));

        let sys = ReplicatorSystem::new(skew_pairwise(), symmetric_triplet()).unwrap();
        let field = field_exact(&sys, &uniform4()).unwrap();
        assert!(field.iter().all(Rat::is_zero));
    }

    #[test]
    fn skew_triplet_reduces_to_pairwise_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let vals = generic_rationals(&mut rng, 20);
        let base = RatMatrix::from_rows(vec![
            vals[0..4].to_vec(),
            vals[4..8].to_vec(),
            vals[8..12].to_vec(),
            vals[12..16].to_vec(),
        ]);
        let skew = {
            let t = base.transpose();
            let mut out = RatMatrix::zeros(4, 4);
            for i in 0..4 {
                for j in 0..4 {
                    out.set(i, j, base.get(i, j) - t.get(i, j));
                }
            }
            out
        };
        let sys = ReplicatorSystem::new(skew_pairwise(), skew).unwrap();
        let p = vals[16..20].to_vec();
        let field = field_exact(&sys, &p).unwrap();
        let kp = sys.pairwise().mul_vec(&p);
        for i in 0..4 {
            assert_eq!(field[i], &kp[i] * &p[i]);
        }
    }

    #[test]
    fn zero_components_stay_zero() {
        let sys = ReplicatorSystem::new(diag_perturbed(), diag_perturbed()).unwrap();
        let p = vec![rat(1, 2), Rat::zero(), rat(1, 4), rat(1, 4)];
        let field = field_exact(&sys, &p).unwrap();
        assert!(field[1].is_zero());
    }

    #[test]
    fn jacobian_of_third_example_is_printed_matrix() {
        let sys = ReplicatorSystem::new(diag_perturbed(), diag_perturbed()).unwrap();
        let jac = jacobian_exact(&sys, &uniform4()).unwrap();
        let expected = RatMatrix::from_i64_rows(&[
            &[2, -6, 2, 2],
            &[2, 2, -6, 2],
            &[-6, 2, 2, 2],
            &[2, 2, 2, -6],
        ])
        .scale(&rat(1, 16));
        assert_eq!(jac, expected);
    }

    #[test]
    fn jacobian_without_triplet_term_scales_pairwise() {
        let sys = ReplicatorSystem::new(skew_pairwise(), RatMatrix::zeros(4, 4)).unwrap();
        let jac = jacobian_exact(&sys, &uniform4()).unwrap();
        assert_eq!(jac, skew_pairwise().scale(&rat(1, 4)));
    }

    #[test]
    fn symmetric_zero_row_sum_triplet_drops_out() {
        // pᵀ(H+Hᵀ) vanishes at the uniform state, so the analytic Jacobian is
        // (1/4)K; central differences on the full field agree.
        let sys = ReplicatorSystem::new(skew_pairwise(), symmetric_triplet()).unwrap();
        let jac = jacobian_exact(&sys, &uniform4()).unwrap();
        assert_eq!(jac, skew_pairwise().scale(&rat(1, 4)));

        let fd = crate::dynamics::jacobian_fd(
            |p| field_f64(&sys, p).unwrap(),
            &[0.25; 4],
            1e-5,
        )
        .unwrap();
        let analytic = jac.to_f64();
        for i in 0..4 {
            for j in 0..4 {
                assert!((fd[(i, j)] - analytic[(i, j)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn jacobian_rejects_bad_states() {
        let sys = ReplicatorSystem::new(diag_perturbed(), diag_perturbed()).unwrap();
        let err = jacobian_exact(&sys, &[rat(1, 2), rat(1, 4), rat(1, 8), rat(1, 8)]).unwrap_err();
        assert!(matches!(err, ReplicatorError::NotEquilibrium { .. }));

        let skew_only = ReplicatorSystem::new(skew_pairwise(), RatMatrix::zeros(4, 4)).unwrap();
        // (0,0,0,0) is an equilibrium but has zero components.
        let err = jacobian_exact(&skew_only, &vec![Rat::zero(); 4]).unwrap_err();
        assert_eq!(err, ReplicatorError::ZeroComponent { index: 0 });
    }

    #[test]
    fn stability_of_third_example() {
        let sys = ReplicatorSystem::new(diag_perturbed(), diag_perturbed()).unwrap();
        let report = stability_report(&sys, &uniform4()).unwrap();
        let s3 = 3f64.sqrt() / 4.0;
        let expected = [(-0.5, 0.0), (0.0, 0.0), (0.25, -s3), (0.25, s3)];
        for (v, (re, im)) in report.eigenvalues.iter().zip(expected) {
            assert!((v.re - re).abs() < 1e-9 && (v.im - im).abs() < 1e-9);
        }
        assert_eq!(
            report.classifications,
            vec![
                EigenClass::NegativeRealPart,
                EigenClass::Zero,
                EigenClass::PositiveRealPart,
                EigenClass::PositiveRealPart,
            ]
        );
        assert_eq!(report.diagonal_eigenvalue, Some(0.0));
    }

    #[test]
    fn neutral_spectrum_without_triplet_interactions() {
        let sys = ReplicatorSystem::new(skew_pairwise(), RatMatrix::zeros(4, 4)).unwrap();
        let report = stability_report(&sys, &uniform4()).unwrap();
        assert!(report
            .classifications
            .iter()
            .all(|c| matches!(c, EigenClass::Zero | EigenClass::PurelyImaginary)));
    }

    #[test]
    fn synchrony_spaces_of_pairwise_matrix() {
        let sys = ReplicatorSystem::new(diag_perturbed(), diag_perturbed()).unwrap();
        let spaces = synchrony_partitions(&sys, 12).unwrap();
        let merge123 = Partition::from_classes(4, &[vec![0, 1, 2], vec![3]]).unwrap();
        assert!(spaces.contains(&merge123));
        assert!(spaces.contains(&Partition::singletons(4)));

        let zero = ReplicatorSystem::new(RatMatrix::zeros(4, 4), RatMatrix::zeros(4, 4)).unwrap();
        assert_eq!(synchrony_partitions(&zero, 12).unwrap().len(), 15);

        // Rows built from disjoint power ranges: no two class sums can agree.
        let generic = RatMatrix::from_rows(
            (0..4)
                .map(|i| (0..4).map(|j| rat_int(4i64.pow((4 * i + j) as u32))).collect())
                .collect(),
        );
        let sys = ReplicatorSystem::new(generic, RatMatrix::zeros(4, 4)).unwrap();
        assert_eq!(synchrony_partitions(&sys, 12).unwrap(), vec![Partition::singletons(4)]);
    }

    #[test]
    fn synchrony_matches_exact_tangency() {
        let sys = ReplicatorSystem::new(diag_perturbed(), diag_perturbed()).unwrap();
        let spaces = synchrony_partitions(&sys, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for partn in all_partitions(4) {
            let tangent = (0..10).all(|_| {
                let values = generic_rationals(&mut rng, partn.num_classes());
                let p: Vec<Rat> = (0..4).map(|i| values[partn.class_of(i)].clone()).collect();
                let field = field_exact(&sys, &p).unwrap();
                partn
                    .classes()
                    .iter()
                    .all(|class| class.iter().all(|&c| field[c] == field[class[0]]))
            });
            assert_eq!(tangent, spaces.contains(&partn), "partition {partn}");
        }
    }

    #[test]
    fn simplex_drift_values() {
        let identical = ReplicatorSystem::new(diag_perturbed(), diag_perturbed()).unwrap();
        let p = vec![rat(1, 2), rat(1, 4), rat(1, 8), rat(1, 8)];
        assert!(simplex_drift_exact(&identical, &p).unwrap().is_zero());

        let skew_only = ReplicatorSystem::new(skew_pairwise(), RatMatrix::zeros(4, 4)).unwrap();
        let q = vec![rat(2, 7), rat(1, 7), rat(3, 7), rat(1, 7)];
        assert!(simplex_drift_exact(&skew_only, &q).unwrap().is_zero());

        let first = ReplicatorSystem::new(skew_pairwise(), symmetric_triplet()).unwrap();
        assert!(simplex_drift_exact(&first, &uniform4()).unwrap().is_zero());
    }

    #[test]
    fn simplex_state_validation() {
        assert!(SimplexState::new(vec![0.25; 4]).is_ok());
        assert!(SimplexState::new(vec![0.5, 0.4]).is_err());
        assert!(SimplexState::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn agrees_with_hypergraph_product_field() {
        // The replicator field is the admissible product-coupling field of the
        // hypergraph with one pairwise edge per K entry and one triplet edge
        // per unordered pair of species.
        let k = skew_pairwise();
        let h = symmetric_triplet();
        let sys = ReplicatorSystem::new(k.clone(), h.clone()).unwrap();
        let n = 4;
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if !k.get(i, j).is_zero() {
                    edges.push(EdgeSpec::simple(
                        format!("k{i}{j}"),
                        &[&(j + 1).to_string()],
                        &[&(i + 1).to_string()],
                        k.get(i, j).clone(),
                    ));
                }
            }
        }
        for i in 0..n {
            for a in 0..n {
                for b in a..n {
                    let weight = if a == b {
                        -h.get(a, b).clone()
                    } else {
                        -(h.get(a, b) + h.get(b, a))
                    };
                    if weight.is_zero() {
                        continue;
                    }
                    let tail = vec![((a + 1).to_string(), 1), ((b + 1).to_string(), 1)];
                    edges.push(EdgeSpec {
                        id: format!("h{i}{a}{b}"),
                        tail,
                        head: vec![(i + 1).to_string()],
                        weight,
                    });
                }
            }
        }
        let graph = Hypergraph::from_numbered(n, edges).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..5 {
            let p = generic_rationals(&mut rng, n);
            let via_graph = eval_field_exact(&graph, &ExactCoupling::product(), &p).unwrap();
            let direct = field_exact(&sys, &p).unwrap();
            assert_eq!(
                via_graph,
                direct,
                "state {:?}",
                p.iter().map(format_rat).collect::<Vec<_>>()
            );
        }
    }
}
