//! Admissible coupled cell vector fields: evaluation, integration, and
//! invariance checks.
//!
//! A cell field has the shape `F_i(x) = f(x_i) + Σ_k Σ_{e ∈ BS_k(i)} w_e
//! Q_k(x_i; x_{T(e)})`, with each `Q_k` symmetric in its trailing `k`
//! arguments and tail nodes passed with multiplicity. Exact evaluation over
//! rationals is available for the polynomial builtin families and is what the
//! balance ⇔ invariance checks run on; arbitrary couplings run in `f64`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hypergraph::Hypergraph;
use crate::partition::Partition;
use crate::rational::{rat_to_f64, Rat};
use crate::synchrony::{quotient, SynchronyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    #[error("state has {found} entries, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no coupling function for tail cardinality {tail_cardinality}")]
    MissingCoupling { tail_cardinality: usize },
    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },
    #[error("step size must be positive")]
    NonPositiveStep,
    #[error("coupling for tail cardinality {tail_cardinality} is not symmetric in its trailing arguments")]
    AsymmetricCoupling { tail_cardinality: usize },
}

/// Builtin polynomial coupling families, evaluable exactly over rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingFamily {
    /// `Q_k(x_0; x_1, …, x_k) = x_0 · x_1 ⋯ x_k`. The family that separates
    /// balanced from unbalanced partitions.
    Product,
    /// `Q_k(x_0; x_1, …, x_k) = x_1 + ⋯ + x_k`.
    Linear,
}

/// Exact-mode coupling: a builtin family plus an internal polynomial
/// `f(x) = Σ c_j x^j` given by ascending coefficients (empty = zero).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCoupling {
    pub family: CouplingFamily,
    pub internal: Vec<Rat>,
}

impl ExactCoupling {
    pub fn product() -> ExactCoupling {
        ExactCoupling { family: CouplingFamily::Product, internal: Vec::new() }
    }

    pub fn linear() -> ExactCoupling {
        ExactCoupling { family: CouplingFamily::Linear, internal: Vec::new() }
    }

    pub fn with_internal(mut self, coefficients: Vec<Rat>) -> ExactCoupling {
        self.internal = coefficients;
        self
    }

    fn internal_at(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.internal.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    fn coupling_at(&self, base: &Rat, args: &[Rat]) -> Rat {
        match self.family {
            CouplingFamily::Product => {
                let mut prod = base.clone();
                for a in args {
                    prod *= a;
                }
                prod
            }
            CouplingFamily::Linear => args.iter().sum(),
        }
    }
}

/// Exact admissible field with scalar cells (`d = 1`).
pub fn eval_field_exact(
    h: &Hypergraph,
    coupling: &ExactCoupling,
    x: &[Rat],
) -> Result<Vec<Rat>, DynamicsError> {
    let n = h.node_count();
    if x.len() != n {
        return Err(DynamicsError::DimensionMismatch { expected: n, found: x.len() });
    }
    let mut out: Vec<Rat> = x.iter().map(|xi| coupling.internal_at(xi)).collect();
    for edge in h.edges() {
        let args: Vec<Rat> = edge.tail_with_multiplicity().iter().map(|&v| x[v].clone()).collect();
        for &i in edge.head() {
            let term = coupling.coupling_at(&x[i], &args);
            out[i] += edge.weight() * term;
        }
    }
    Ok(out)
}

pub type InternalFn = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
/// `(x_i, flattened tail states, output)`; tail states come as `k` blocks of
/// the internal dimension, one per tail entry counted with multiplicity.
pub type CouplingFn = Box<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;

enum CouplingKind {
    Builtin(CouplingFamily),
    Custom(BTreeMap<usize, CouplingFn>),
}

/// Floating-point coupling system: internal dynamics plus one coupling
/// function per tail cardinality.
pub struct CouplingSystem {
    d: usize,
    f: InternalFn,
    q: CouplingKind,
    warnings: Vec<String>,
}

impl CouplingSystem {
    pub fn product(d: usize) -> CouplingSystem {
        CouplingSystem {
            d,
            f: Box::new(|_, out| out.fill(0.0)),
            q: CouplingKind::Builtin(CouplingFamily::Product),
            warnings: Vec::new(),
        }
    }

    pub fn linear(d: usize) -> CouplingSystem {
        CouplingSystem {
            d,
            f: Box::new(|_, out| out.fill(0.0)),
            q: CouplingKind::Builtin(CouplingFamily::Linear),
            warnings: Vec::new(),
        }
    }

    /// Internal dynamics `f(x) = −x`.
    pub fn with_decay(mut self) -> CouplingSystem {
        self.f = Box::new(|x, out| {
            for (o, v) in out.iter_mut().zip(x) {
                *o = -v;
            }
        });
        self
    }

    pub fn with_internal(mut self, f: InternalFn) -> CouplingSystem {
        self.f = f;
        self
    }

    /// User-supplied couplings keyed by tail cardinality. Each function is
    /// spot-checked for permutation symmetry in its trailing arguments at
    /// random points; couplings that evaluate to zero everywhere sampled are
    /// accepted with a warning.
    pub fn custom(
        d: usize,
        f: InternalFn,
        couplings: BTreeMap<usize, CouplingFn>,
        seed: u64,
    ) -> Result<CouplingSystem, DynamicsError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut warnings = Vec::new();
        for (&k, q) in &couplings {
            let mut all_zero = true;
            for _ in 0..8 {
                let base: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let args: Vec<f64> = (0..k * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mut reference = vec![0.0; d];
                q(&base, &args, &mut reference);
                if reference.iter().any(|v| v.abs() > 1e-12) {
                    all_zero = false;
                }
                let mut order: Vec<usize> = (0..k).collect();
                order.shuffle(&mut rng);
                let mut permuted = vec![0.0; k * d];
                for (slot, &block) in order.iter().enumerate() {
                    permuted[slot * d..(slot + 1) * d].copy_from_slice(&args[block * d..(block + 1) * d]);
                }
                let mut out = vec![0.0; d];
                q(&base, &permuted, &mut out);
                if reference.iter().zip(&out).any(|(a, b)| (a - b).abs() > 1e-8) {
                    return Err(DynamicsError::AsymmetricCoupling { tail_cardinality: k });
                }
            }
            if all_zero {
                warnings.push(format!("coupling for tail cardinality {k} evaluates to zero"));
            }
        }
        Ok(CouplingSystem { d, f, q: CouplingKind::Custom(couplings), warnings })
    }

    pub fn internal_dim(&self) -> usize {
        self.d
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn eval_coupling(&self, k: usize, base: &[f64], args: &[f64], out: &mut [f64]) -> Result<(), DynamicsError> {
        match &self.q {
            CouplingKind::Builtin(CouplingFamily::Product) => {
                for c in 0..self.d {
                    let mut prod = base[c];
                    for block in 0..k {
                        prod *= args[block * self.d + c];
                    }
                    out[c] = prod;
                }
                Ok(())
            }
            CouplingKind::Builtin(CouplingFamily::Linear) => {
                for c in 0..self.d {
                    out[c] = (0..k).map(|block| args[block * self.d + c]).sum();
                }
                Ok(())
            }
            CouplingKind::Custom(map) => {
                let q = map.get(&k).ok_or(DynamicsError::MissingCoupling { tail_cardinality: k })?;
                q(base, args, out);
                Ok(())
            }
        }
    }
}

/// Floating-point admissible field; `x` holds `n` blocks of the internal
/// dimension.
pub fn eval_field(
    h: &Hypergraph,
    coupling: &CouplingSystem,
    x: &[f64],
) -> Result<Vec<f64>, DynamicsError> {
    let d = coupling.internal_dim();
    let n = h.node_count();
    if x.len() != n * d {
        return Err(DynamicsError::DimensionMismatch { expected: n * d, found: x.len() });
    }
    let mut out = vec![0.0; n * d];
    for i in 0..n {
        (coupling.f)(&x[i * d..(i + 1) * d], &mut out[i * d..(i + 1) * d]);
    }
    let mut term = vec![0.0; d];
    for edge in h.edges() {
        let k = edge.tail_cardinality();
        let mut args = Vec::with_capacity(k * d);
        for v in edge.tail_with_multiplicity() {
            args.extend_from_slice(&x[v * d..(v + 1) * d]);
        }
        let w = rat_to_f64(edge.weight());
        for &i in edge.head() {
            coupling.eval_coupling(k, &x[i * d..(i + 1) * d], &args, &mut term)?;
            for c in 0..d {
                out[i * d + c] += w * term[c];
            }
        }
    }
    Ok(out)
}

/// Fixed-step trajectory; `states[s]` is the state at time `s · dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Classic fixed-step fourth-order Runge–Kutta.
pub fn rk4<F: Fn(&[f64]) -> Vec<f64>>(
    field: F,
    x0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<Trajectory, DynamicsError> {
    if dt <= 0.0 {
        return Err(DynamicsError::NonPositiveStep);
    }
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x0.to_vec());
    let mut x = x0.to_vec();
    let n = x.len();
    for step in 0..steps {
        let k1 = field(&x);
        let mid1: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * dt * k1[i]).collect();
        let k2 = field(&mid1);
        let mid2: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * dt * k2[i]).collect();
        let k3 = field(&mid2);
        let end: Vec<f64> = (0..n).map(|i| x[i] + dt * k3[i]).collect();
        let k4 = field(&end);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFiniteState { step });
        }
        states.push(x.clone());
    }
    Ok(Trajectory { dt, states })
}

/// Integrates the admissible field of `h` under `coupling` from `x0`.
pub fn integrate(
    h: &Hypergraph,
    coupling: &CouplingSystem,
    x0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<Trajectory, DynamicsError> {
    eval_field(h, coupling, x0)?;
    rk4(|x| eval_field(h, coupling, x).expect("dimensions validated"), x0, dt, steps)
}

/// Central-difference Jacobian, column `j` from `(F(x+he_j) − F(x−he_j)) / 2h`.
pub fn jacobian_fd<F: Fn(&[f64]) -> Vec<f64>>(
    field: F,
    x: &[f64],
    h: f64,
) -> Result<DMatrix<f64>, DynamicsError> {
    if h <= 0.0 {
        return Err(DynamicsError::NonPositiveStep);
    }
    let n = x.len();
    let mut out = DMatrix::<f64>::zeros(n, n);
    let mut probe = x.to_vec();
    for j in 0..n {
        probe[j] = x[j] + h;
        let plus = field(&probe);
        probe[j] = x[j] - h;
        let minus = field(&probe);
        probe[j] = x[j];
        for i in 0..n {
            let v = (plus[i] - minus[i]) / (2.0 * h);
            if !v.is_finite() {
                return Err(DynamicsError::NonFiniteState { step: j });
            }
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

/// Distinct nonzero rationals `k/97` with numerators drawn from ±1..=96.
/// Generic enough to separate any two distinct polynomial fields sampled here.
pub fn generic_rationals(rng: &mut impl Rng, count: usize) -> Vec<Rat> {
    assert!(count <= 192, "at most 192 distinct generic values available");
    let mut numerators: Vec<i64> = (1..=96).chain(-96..=-1).collect();
    numerators.shuffle(rng);
    numerators.truncate(count);
    numerators.into_iter().map(|n| Rat::new(n.into(), 97.into())).collect()
}

/// Exact flow-invariance check report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvarianceReport {
    pub pass: bool,
    pub trials: usize,
    pub seed: u64,
    pub witness: Option<InvarianceWitness>,
}

/// Two same-class cells whose field values differ at a sampled point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvarianceWitness {
    pub cell_a: usize,
    pub cell_b: usize,
    pub trial: usize,
}

/// Checks exact tangency of the coupled field to the polydiagonal of `part`:
/// at `trials` generic rational points with distinct per-class values, the
/// field must agree exactly on every class. Passes for all points exactly
/// when `part` is balanced (with the product family).
pub fn flow_invariance_exact(
    h: &Hypergraph,
    coupling: &ExactCoupling,
    part: &Partition,
    trials: usize,
    seed: u64,
) -> InvarianceReport {
    assert_eq!(part.size(), h.node_count(), "partition size must match node count");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = part.classes();
    for trial in 0..trials {
        let values = generic_rationals(&mut rng, part.num_classes());
        let x: Vec<Rat> = (0..h.node_count()).map(|i| values[part.class_of(i)].clone()).collect();
        let field = eval_field_exact(h, coupling, &x).expect("state built from partition");
        for class in &classes {
            let rep = class[0];
            for &cell in &class[1..] {
                if field[cell] != field[rep] {
                    return InvarianceReport {
                        pass: false,
                        trials,
                        seed,
                        witness: Some(InvarianceWitness { cell_a: rep, cell_b: cell, trial }),
                    };
                }
            }
        }
    }
    InvarianceReport { pass: true, trials, seed, witness: None }
}

/// Floating-point invariance check: reports the largest within-class spread
/// of the field over sampled on-diagonal states.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadReport {
    pub pass: bool,
    pub max_spread: f64,
    pub tolerance: f64,
    pub trials: usize,
    pub seed: u64,
}

pub fn flow_invariance_float(
    h: &Hypergraph,
    coupling: &CouplingSystem,
    part: &Partition,
    trials: usize,
    seed: u64,
    tolerance: f64,
) -> Result<SpreadReport, DynamicsError> {
    assert_eq!(part.size(), h.node_count(), "partition size must match node count");
    let d = coupling.internal_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_spread: f64 = 0.0;
    for _ in 0..trials {
        let values: Vec<Vec<f64>> = (0..part.num_classes())
            .map(|_| (0..d).map(|_| rng.gen_range(0.25..1.25)).collect())
            .collect();
        let mut x = vec![0.0; h.node_count() * d];
        for i in 0..h.node_count() {
            x[i * d..(i + 1) * d].copy_from_slice(&values[part.class_of(i)]);
        }
        let field = eval_field(h, coupling, &x)?;
        for class in part.classes() {
            let rep = class[0];
            for &cell in &class[1..] {
                for c in 0..d {
                    max_spread = max_spread.max((field[cell * d + c] - field[rep * d + c]).abs());
                }
            }
        }
    }
    Ok(SpreadReport { pass: max_spread <= tolerance, max_spread, tolerance, trials, seed })
}

/// Trajectory-mode invariance: integrates from a point of the polydiagonal
/// and reports the largest distance from it along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub pass: bool,
    pub max_distance: f64,
    pub tolerance: f64,
    pub steps: usize,
}

pub fn flow_invariance_trajectory(
    h: &Hypergraph,
    coupling: &CouplingSystem,
    part: &Partition,
    class_values: &[f64],
    dt: f64,
    steps: usize,
    tolerance: f64,
) -> Result<DriftReport, DynamicsError> {
    assert_eq!(part.size(), h.node_count(), "partition size must match node count");
    let d = coupling.internal_dim();
    if class_values.len() != part.num_classes() * d {
        return Err(DynamicsError::DimensionMismatch {
            expected: part.num_classes() * d,
            found: class_values.len(),
        });
    }
    let mut x0 = vec![0.0; h.node_count() * d];
    for i in 0..h.node_count() {
        let c = part.class_of(i);
        x0[i * d..(i + 1) * d].copy_from_slice(&class_values[c * d..(c + 1) * d]);
    }
    let trajectory = integrate(h, coupling, &x0, dt, steps)?;
    let max_distance = trajectory
        .states
        .iter()
        .map(|x| polydiagonal_distance(x, part, d))
        .fold(0.0, f64::max);
    Ok(DriftReport { pass: max_distance <= tolerance, max_distance, tolerance, steps })
}

/// Max-norm distance from the polydiagonal: each cell against its class mean.
pub fn polydiagonal_distance(x: &[f64], part: &Partition, d: usize) -> f64 {
    let mut max = 0.0f64;
    for class in part.classes() {
        for c in 0..d {
            let mean: f64 =
                class.iter().map(|&i| x[i * d + c]).sum::<f64>() / class.len() as f64;
            for &i in &class {
                max = max.max((x[i * d + c] - mean).abs());
            }
        }
    }
    max
}

/// Report for the restriction-equals-quotient check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionReport {
    pub pass: bool,
    pub trials: usize,
    pub seed: u64,
    pub mismatch: Option<RestrictionMismatch>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionMismatch {
    pub class: usize,
    pub trial: usize,
}

/// At random rational quotient states, lifts to the polydiagonal, evaluates
/// the full field, projects to class representatives, and compares exactly
/// with the quotient hypernetwork's field at the same state.
pub fn restriction_equals_quotient(
    h: &Hypergraph,
    part: &Partition,
    coupling: &ExactCoupling,
    trials: usize,
    seed: u64,
) -> Result<RestrictionReport, SynchronyError> {
    let quotient_h = quotient(h, part)?;
    let p = part.num_classes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let y = generic_rationals(&mut rng, p);
        let x: Vec<Rat> = (0..h.node_count()).map(|i| y[part.class_of(i)].clone()).collect();
        let full = eval_field_exact(h, coupling, &x).expect("state sized to h");
        let reduced = eval_field_exact(&quotient_h, coupling, &y).expect("state sized to quotient");
        for (class_idx, class) in part.classes().iter().enumerate() {
            let rep = class[0];
            if full[rep] != reduced[class_idx]
                || class.iter().any(|&cell| full[cell] != full[rep])
            {
                return Ok(RestrictionReport {
                    pass: false,
                    trials,
                    seed,
                    mismatch: Some(RestrictionMismatch { class: class_idx, trial }),
                });
            }
        }
    }
    Ok(RestrictionReport { pass: true, trials, seed, mismatch: None })
}
