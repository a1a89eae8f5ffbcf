//! Independent reference implementations and fixtures shared by the
//! integration tests.
#![allow(dead_code)]

use std::sync::Mutex;

use rand::Rng;
use rhythmsvm::rng::seeded;
use rhythmsvm::svm::{smo_solve, KernelSpec, SvmParams};

use rhythmsvm::label::RhythmLabel;
use rhythmsvm::preprocess::{build_segments, LabeledSegment};
use rhythmsvm::synth::{gen_corpus, CorpusSpec};
use rhythmsvm::tune::{Access, SegmentSource};

/// Cyclic Jacobi eigensolver for a symmetric matrix. Eigenvalues come back
/// descending with unit eigenvectors.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|k| v[k][i]).collect()).collect();
    (values, vectors)
}

#[derive(Debug, Clone, Copy)]
pub enum OracleKernel {
    Linear,
    Poly { c: f64, d: i32 },
    Rbf { gamma: f64 },
}

impl OracleKernel {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        match *self {
            OracleKernel::Linear => dot,
            OracleKernel::Poly { c, d } => (1.0 + c * dot).powi(d),
            OracleKernel::Rbf { gamma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

pub struct QpSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
}

/// Projection onto `{0 ≤ α ≤ C, yᵀα = 0}` by bisection on the multiplier.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lambda: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - lambda * yi).clamp(0.0, c)).collect() };
    let g = |a: &[f64]| -> f64 { a.iter().zip(y).map(|(ai, yi)| ai * yi).sum() };
    let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Dual soft-margin SVM by accelerated projected gradient:
/// maximize `Σα − ½ αᵀQα` with `Q_ij = y_i y_j K(x_i, x_j)`.
pub fn qp_oracle(x: &[Vec<f64>], labels: &[i8], kernel: OracleKernel, c: f64, iterations: usize) -> QpSolution {
    let n = x.len();
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let k: Vec<Vec<f64>> = x.iter().map(|a| x.iter().map(|b| kernel.eval(a, b)).collect()).collect();
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect()).collect();
    let qv = |a: &[f64]| -> Vec<f64> { q.iter().map(|row| row.iter().zip(a).map(|(r, ai)| r * ai).sum()).collect() };
    let objective = |a: &[f64]| -> f64 {
        let qa = qv(a);
        a.iter().sum::<f64>() - 0.5 * a.iter().zip(&qa).map(|(ai, qi)| ai * qi).sum::<f64>()
    };
    // Lipschitz constant from power iteration
    let mut p = vec![1.0; n];
    let mut lip = 1.0;
    for _ in 0..200 {
        let w = qv(&p);
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        lip = norm / p.iter().map(|v| v * v).sum::<f64>().sqrt();
        p = w.iter().map(|v| v / norm).collect();
    }
    let step = 1.0 / (lip * 1.05);
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t: f64 = 1.0;
    let mut best = objective(&a);
    for _ in 0..iterations {
        let grad = qv(&z);
        let cand: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi + step * (1.0 - gi)).collect();
        let next = project(&cand, &y, c);
        let obj = objective(&next);
        if obj < best {
            // restart momentum when the objective drops
            z = a.clone();
            t = 1.0;
            continue;
        }
        best = obj;
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = next.iter().zip(&a).map(|(n1, a0)| n1 + (t - 1.0) / t_next * (n1 - a0)).collect();
        a = next;
        t = t_next;
    }
    // bias from free multipliers, or the midpoint of the feasible range
    let f_no_b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[j] * y[j] * k[j][i]).sum()).collect();
    let eps = 1e-6 * c.max(1.0);
    let free: Vec<f64> = (0..n).filter(|&i| a[i] > eps && a[i] < c - eps).map(|i| y[i] - f_no_b[i]).collect();
    let bias = if !free.is_empty() {
        free.iter().sum::<f64>() / free.len() as f64
    } else {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let r = y[i] - f_no_b[i];
            let at_upper = a[i] >= c - eps;
            // y_i f(x_i) ≥ 1 at α = 0, ≤ 1 at α = C
            if (y[i] > 0.0) != at_upper {
                lo = lo.max(r);
            } else {
                hi = hi.min(r);
            }
        }
        0.5 * (lo + hi)
    };
    QpSolution {
        objective: objective(&a),
        alpha: a,
        bias,
    }
}

pub fn qp_decision(x: &[Vec<f64>], labels: &[i8], kernel: OracleKernel, sol: &QpSolution, probe: &[f64]) -> f64 {
    x.iter()
        .zip(labels)
        .zip(&sol.alpha)
        .map(|((xi, &yi), ai)| ai * f64::from(yi) * kernel.eval(xi, probe))
        .sum::<f64>()
        + sol.bias
}

/// `|X_k|` for k < N/2 by direct summation.
pub fn dft_magnitude(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, v) in x.iter().enumerate() {
                let a = 2.0 * std::f64::consts::PI * ((k * j) % n) as f64 / n as f64;
                re += v * a.cos();
                im -= v * a.sin();
            }
            (re * re + im * im).sqrt()
        })
        .collect()
}

/// Balanced windows cut from a synthetic corpus.
pub fn synthetic_windows(records_per_class: usize, duration_s: f64, window_s: f64, seed: u64) -> Vec<LabeledSegment> {
    let corpus = gen_corpus(&CorpusSpec {
        n_per_class: records_per_class,
        duration_s,
        seed,
        ..Default::default()
    })
    .unwrap();
    build_segments(&corpus, window_s, seed).unwrap()
}

/// Segment source that logs every sample read with its access tag.
pub struct AuditedSource {
    pub segments: Vec<LabeledSegment>,
    pub log: Mutex<Vec<(usize, Access)>>,
}

impl AuditedSource {
    pub fn new(segments: Vec<LabeledSegment>) -> Self {
        AuditedSource {
            segments,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn reads(&self) -> Vec<(usize, Access)> {
        self.log.lock().unwrap().clone()
    }
}

impl SegmentSource for AuditedSource {
    fn len(&self) -> usize {
        self.segments.len()
    }

    fn label(&self, i: usize) -> RhythmLabel {
        self.segments[i].label
    }

    fn samples(&self, i: usize, access: Access) -> &[f64] {
        self.log.lock().unwrap().push((i, access));
        &self.segments[i].samples
    }
}

pub struct Instance {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<i8>,
    pub kernel: (KernelSpec, OracleKernel),
    pub c: f64,
}

/// Instance `i` of the seeded family: up to 20 points in up to 3
/// dimensions, kernels and C cycling through every combination.
pub fn instance(i: u64) -> Instance {
    let mut rng = seeded(1000 + i);
    let n = rng.gen_range(4..=20);
    let d = rng.gen_range(1..=3);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut y: Vec<i8> = x
        .iter()
        .map(|p| {
            let s: f64 = p.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + 0.3 * rng.gen_range(-1.0..1.0);
            if s >= 0.0 { 1 } else { -1 }
        })
        .collect();
    y[0] = 1;
    y[1] = -1;
    let kernel = match i % 3 {
        0 => (KernelSpec::Linear, OracleKernel::Linear),
        1 => (KernelSpec::Polynomial { c: 0.5, degree: 3 }, OracleKernel::Poly { c: 0.5, d: 3 }),
        _ => (KernelSpec::Rbf { gamma: 1.5 }, OracleKernel::Rbf { gamma: 1.5 }),
    };
    let c = [0.1, 1.0, 10.0][((i / 3) % 3) as usize];
    Instance { x, y, kernel, c }
}

pub fn probes(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = x[0].len();
    let lo: Vec<f64> = (0..d).map(|k| x.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min) - 0.2).collect();
    let hi: Vec<f64> = (0..d).map(|k| x.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max) + 0.2).collect();
    let steps: Vec<usize> = match d {
        1 => vec![100],
        2 => vec![10, 10],
        _ => vec![5, 5, 4],
    };
    let mut out = vec![Vec::new()];
    for k in 0..d {
        let (s, lo_k, hi_k) = (steps[k], lo[k], hi[k]);
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..s).map(move |j| {
                    let mut q = p.clone();
                    q.push(lo_k + (hi_k - lo_k) * (j as f64 + 0.5) / s as f64);
                    q
                })
            })
            .collect();
    }
    out
}

pub struct Comparison {
    pub rel_objective_gap: f64,
    pub disagreements: usize,
    pub probes: usize,
}

pub fn compare(inst: &Instance) -> Comparison {
    let refs: Vec<&[f64]> = inst.x.iter().map(Vec::as_slice).collect();
    let params = SvmParams::new(inst.c, inst.kernel.0).with_tol(1e-6);
    let smo = smo_solve(&refs, &inst.y, &params).unwrap();
    let oracle = qp_oracle(&inst.x, &inst.y, inst.kernel.1, inst.c, 20000);
    let gap = (smo.dual_objective - oracle.objective).abs() / oracle.objective.abs().max(1e-12);
    let grid = probes(&inst.x);
    let disagreements = grid
        .iter()
        .filter(|p| {
            let a = smo.model.predict(p).unwrap();
            let b = if qp_decision(&inst.x, &inst.y, inst.kernel.1, &oracle, p) >= 0.0 { 1 } else { -1 };
            a != b
        })
        .count();
    Comparison {
        rel_objective_gap: gap,
        disagreements,
        probes: grid.len(),
    }
}
