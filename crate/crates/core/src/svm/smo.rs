//! Sequential minimal optimization for the soft-margin SVM dual
//!
//! ```text
//! min  ½ αᵀQα − eᵀα   s.t.  0 ≤ α_i ≤ C,  yᵀα = 0,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! Each step updates the maximal violating pair
//! `i = argmax_{I_up} −y_t ∇_t`, `j = argmin_{I_low} −y_t ∇_t` (ties go to
//! the lowest index) and stops once `m(α) − M(α) < tol`. The working set is
//! a pure function of the current state, so identical inputs in identical
//! order give bit-identical models, and flipping every label selects the same
//! pairs with roles swapped, which negates the decision function exactly.

use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use super::model::{BinarySvmModel, MODEL_FORMAT_VERSION};
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelSpec,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// Iteration budget, in multiples of the training-set size.
    pub max_passes: usize,
    /// Kernel-row cache budget in bytes.
    pub cache_bytes: usize,
}

impl SvmParams {
    pub fn new(c: f64, kernel: KernelSpec) -> Self {
        SvmParams {
            c,
            kernel,
            tol: 1e-3,
            max_passes: 2000,
            cache_bytes: 64 << 20,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidArgument("max_passes must be at least 1".into()));
        }
        self.kernel.validate()
    }
}

/// Solver output with the full dual vector, for diagnostics and oracles.
#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub model: BinarySvmModel,
    /// One `α_i` per training example.
    pub alphas: Vec<f64>,
    pub iterations: usize,
    /// `eᵀα − ½ αᵀQα` (the maximized dual).
    pub dual_objective: f64,
}

/// LRU cache of kernel rows `K(x_i, ·)`.
struct KernelRows<'a> {
    data: &'a [&'a [f64]],
    kernel: KernelSpec,
    capacity: usize,
    rows: HashMap<usize, (Rc<Vec<f64>>, u64)>,
    clock: u64,
}

impl<'a> KernelRows<'a> {
    fn new(data: &'a [&'a [f64]], kernel: KernelSpec, cache_bytes: usize) -> Self {
        let row_bytes = data.len().max(1) * std::mem::size_of::<f64>();
        KernelRows {
            data,
            kernel,
            capacity: (cache_bytes / row_bytes).max(2),
            rows: HashMap::new(),
            clock: 0,
        }
    }

    fn row(&mut self, i: usize) -> Rc<Vec<f64>> {
        self.clock += 1;
        let clock = self.clock;
        if let Some((row, used)) = self.rows.get_mut(&i) {
            *used = clock;
            return Rc::clone(row);
        }
        if self.rows.len() >= self.capacity {
            if let Some(&victim) = self
                .rows
                .iter()
                .min_by_key(|(_, (_, used))| *used)
                .map(|(k, _)| k)
            {
                self.rows.remove(&victim);
            }
        }
        let xi = self.data[i];
        let row: Rc<Vec<f64>> = Rc::new(
            self.data
                .iter()
                .map(|xj| self.kernel.eval_unchecked(xi, xj))
                .collect(),
        );
        self.rows.insert(i, (Rc::clone(&row), clock));
        row
    }
}

fn check_inputs(data: &[&[f64]], labels: &[i8]) -> Result<usize> {
    if data.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} vectors but {} labels",
            data.len(),
            labels.len()
        )));
    }
    let dim = data
        .first()
        .map(|x| x.len())
        .ok_or_else(|| Error::InsufficientData("empty training set".into()))?;
    for x in data {
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("training vectors"));
        }
    }
    if let Some(bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
        return Err(Error::InvalidArgument(format!("label {bad} is not ±1")));
    }
    let has_pos = labels.iter().any(|&y| y == 1);
    let has_neg = labels.iter().any(|&y| y == -1);
    if !(has_pos && has_neg) {
        return Err(Error::InsufficientData(
            "binary SVM training needs examples of both labels".into(),
        ));
    }
    Ok(dim)
}

/// Trains a binary SVM. Labels must be ±1 with both present.
pub fn smo_train(data: &[&[f64]], labels: &[i8], params: &SvmParams) -> Result<BinarySvmModel> {
    smo_solve(data, labels, params).map(|s| s.model)
}

/// Trains and returns the full dual solution.
pub fn smo_solve(data: &[&[f64]], labels: &[i8], params: &SvmParams) -> Result<SmoSolution> {
    params.validate()?;
    let dim = check_inputs(data, labels)?;
    let n = data.len();
    let c = params.c;
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();

    let diag: Vec<f64> = data
        .iter()
        .map(|x| params.kernel.eval_unchecked(x, x))
        .collect();
    let mut cache = KernelRows::new(data, params.kernel, params.cache_bytes);

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = params.max_passes.saturating_mul(n).max(10_000);
    let mut iterations = 0;

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    loop {
        let mut i = usize::MAX;
        let mut m = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut big_m = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > m {
                m = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < big_m {
                big_m = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || m - big_m < params.tol {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::NotConverged {
                iterations,
                violation: m - big_m,
            });
        }
        iterations += 1;

        let ki = cache.row(i);
        let kj = cache.row(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);

        if y[i] != y[j] {
            let quad = (diag[i] + diag[j] + 2.0 * ki[j] * y[i] * y[j]).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (diag[i] + diag[j] - 2.0 * ki[j]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        let da_i = (alpha[i] - old_i) * y[i];
        let da_j = (alpha[j] - old_j) * y[j];
        for t in 0..n {
            grad[t] += y[t] * (ki[t] * da_i + kj[t] * da_j);
        }
    }

    let rho = compute_rho(&alpha, &grad, &y, c);

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support_vectors.push(data[t].to_vec());
            coefficients.push(alpha[t] * y[t]);
        }
    }

    // eᵀα − ½αᵀQα with Qα = ∇ + e
    let dual_objective = alpha
        .iter()
        .zip(&grad)
        .map(|(a, g)| a - 0.5 * a * (g + 1.0))
        .sum();

    Ok(SmoSolution {
        model: BinarySvmModel {
            format_version: MODEL_FORMAT_VERSION,
            kernel: params.kernel,
            c,
            dim,
            support_vectors,
            coefficients,
            bias: -rho,
        },
        alphas: alpha,
        iterations,
        dual_objective,
    })
}

/// Offset from free vectors, or the midpoint of the feasible interval when
/// every α sits at a bound.
fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train(points: &[Vec<f64>], labels: &[i8], params: SvmParams) -> SmoSolution {
        let refs: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
        smo_solve(&refs, labels, &params).unwrap()
    }

    #[test]
    fn two_point_max_margin() {
        let pts = vec![vec![0.0, 0.0], vec![2.0, 0.0]];
        let s = train(&pts, &[-1, 1], SvmParams::new(1e6, KernelSpec::Linear));
        let m = &s.model;
        assert!(m.decision_value(&[1.0, 0.0]).unwrap().abs() < 1e-6);
        assert!((m.decision_value(&[2.0, 0.0]).unwrap() - 1.0).abs() < 1e-3);
        assert!((m.decision_value(&[3.0, 0.0]).unwrap() - 2.0).abs() < 1e-2);
        assert!((m.bias + 1.0).abs() < 1e-6);
        // analytic dual: a = (0.5, 0.5), objective 0.5
        for a in &s.alphas {
            assert!((a - 0.5).abs() < 1e-9);
        }
        assert!((s.dual_objective - 0.5).abs() < 1e-9);
    }

    #[test]
    fn xor_with_rbf() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let labels = [-1, -1, 1, 1];
        let s = train(&pts, &labels, SvmParams::new(1e6, KernelSpec::Rbf { gamma: 1.0 }));
        for (p, &l) in pts.iter().zip(&labels) {
            assert_eq!(s.model.predict(p).unwrap(), l);
        }
    }

    #[test]
    fn free_vectors_sit_on_the_margin() {
        let mut r = crate::rng::seeded(5);
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![crate::rng::normal(&mut r), crate::rng::normal(&mut r)])
            .collect();
        let labels: Vec<i8> = pts.iter().map(|p| if p[0] + 0.3 * p[1] > 0.1 { 1 } else { -1 }).collect();
        let c = 5.0;
        let params = SvmParams::new(c, KernelSpec::Rbf { gamma: 0.5 });
        let s = train(&pts, &labels, params);
        let mut checked = 0;
        for (t, a) in s.alphas.iter().enumerate() {
            if *a > 0.0 && *a < c {
                let f = s.model.decision_value(&pts[t]).unwrap();
                assert!((f - f64::from(labels[t])).abs() <= params.tol, "t={t} f={f}");
                checked += 1;
            }
        }
        assert!(checked > 0);
        let eq: f64 = s.alphas.iter().zip(&labels).map(|(a, &y)| a * f64::from(y)).sum();
        assert!(eq.abs() < 1e-6);
        assert!(s.alphas.iter().all(|&a| (0.0..=c).contains(&a)));
    }

    #[test]
    fn label_flip_negates() {
        let pts: Vec<Vec<f64>> = (0..12).map(|i| vec![(i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()]).collect();
        let labels: Vec<i8> = (0..12).map(|i| if i % 3 == 0 { 1 } else { -1 }).collect();
        let flipped: Vec<i8> = labels.iter().map(|l| -l).collect();
        let params = SvmParams::new(3.0, KernelSpec::Polynomial { c: 0.5, degree: 3 });
        let a = train(&pts, &labels, params).model;
        let b = train(&pts, &flipped, params).model;
        for k in 0..30 {
            let x = [k as f64 * 0.1 - 1.5, 1.0 - k as f64 * 0.07];
            let fa = a.decision_value(&x).unwrap();
            let fb = b.decision_value(&x).unwrap();
            assert!((fa + fb).abs() < 1e-9);
        }
    }

    #[test]
    fn errors() {
        let pts = [vec![0.0], vec![1.0]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let p = SvmParams::new(1.0, KernelSpec::Linear);
        assert!(matches!(smo_solve(&refs, &[1, 1], &p), Err(Error::InsufficientData(_))));
        let bad = [vec![0.0], vec![f64::NAN]];
        let refs_bad: Vec<&[f64]> = bad.iter().map(|p| p.as_slice()).collect();
        assert!(matches!(smo_solve(&refs_bad, &[1, -1], &p), Err(Error::NonFinite(_))));
        assert!(smo_solve(&refs, &[1, 0], &p).is_err());
        assert!(smo_solve(&refs, &[1, -1], &SvmParams::new(0.0, KernelSpec::Linear)).is_err());
    }

    #[test]
    fn iteration_budget_is_reported() {
        let mut r = crate::rng::seeded(9);
        let pts: Vec<Vec<f64>> = (0..200).map(|_| vec![crate::rng::normal(&mut r); 1]).collect();
        let labels: Vec<i8> = (0..200).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let mut params = SvmParams::new(1e3, KernelSpec::Rbf { gamma: 10.0 }).with_tol(1e-12);
        params.max_passes = 1;
        match smo_solve(&refs, &labels, &params) {
            Err(Error::NotConverged { iterations, .. }) => assert_eq!(iterations, 10_000),
            other => panic!("expected NotConverged, got {:?}", other.map(|s| s.iterations)),
        }
    }

    #[test]
    fn tiny_cache_gives_same_model() {
        let pts: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64).sin(), (i as f64 * 0.3).cos()]).collect();
        let labels: Vec<i8> = (0..30).map(|i| if (i as f64).sin() > 0.2 { 1 } else { -1 }).collect();
        let mut small = SvmParams::new(10.0, KernelSpec::Rbf { gamma: 2.0 });
        let big = small;
        small.cache_bytes = 1;
        assert_eq!(train(&pts, &labels, small).model, train(&pts, &labels, big).model);
    }
}
