//! Search grids anchored on training-set statistics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svm::{dot, KernelSpec, SvmParams};

pub const C_EXPONENTS: std::ops::RangeInclusive<i32> = 0..=4;
pub const GAMMA_OFFSETS: std::ops::RangeInclusive<i32> = -2..=2;
pub const POLY_C_STEPS: std::ops::RangeInclusive<i32> = -3..=3;
pub const POLY_DEGREES: std::ops::RangeInclusive<u32> = 2..=6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Linear,
    Polynomial,
    Rbf,
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelFamily::Linear => "linear",
            KernelFamily::Polynomial => "polynomial",
            KernelFamily::Rbf => "rbf",
        })
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(KernelFamily::Linear),
            "polynomial" | "poly" => Ok(KernelFamily::Polynomial),
            "rbf" => Ok(KernelFamily::Rbf),
            other => Err(Error::Config(format!("unknown kernel family {other:?}"))),
        }
    }
}

/// Mean distance over all pairs with opposite labels.
pub fn d_mean(vectors: &[&[f64]], labels: &[i8]) -> Result<f64> {
    if vectors.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: vectors.len(),
            actual: labels.len(),
        });
    }
    let pos: Vec<&[f64]> = vectors.iter().zip(labels).filter(|(_, &y)| y > 0).map(|(v, _)| *v).collect();
    let neg: Vec<&[f64]> = vectors.iter().zip(labels).filter(|(_, &y)| y <= 0).map(|(v, _)| *v).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::InsufficientData("D_mean needs both labels".into()));
    }
    let mut sum = 0.0;
    for p in &pos {
        for q in &neg {
            if p.len() != q.len() {
                return Err(Error::DimensionMismatch {
                    expected: p.len(),
                    actual: q.len(),
                });
            }
            sum += p.iter().zip(*q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        }
    }
    Ok(sum / (pos.len() * neg.len()) as f64)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

fn c_value(family: KernelFamily, n: i32, d_mean: f64) -> f64 {
    match family {
        KernelFamily::Linear => 10f64.powi(n) / d_mean,
        _ => 10f64.powi(n),
    }
}

/// `10^N / D_mean` for the linear family, `10^N` otherwise; N = 0..4.
pub fn c_grid(family: KernelFamily, d_mean: f64) -> Result<Vec<f64>> {
    check_positive("D_mean", d_mean)?;
    Ok(C_EXPONENTS.map(|n| c_value(family, n, d_mean)).collect())
}

fn gamma_value(k: i32, d_mean: f64) -> f64 {
    10f64.powf(-d_mean.log10() + f64::from(k))
}

/// `10^(γ_start + k)` with `γ_start = −log10 D_mean`, k = −2..2.
pub fn gamma_grid(d_mean: f64) -> Result<Vec<f64>> {
    check_positive("D_mean", d_mean)?;
    Ok(GAMMA_OFFSETS.map(|k| gamma_value(k, d_mean)).collect())
}

/// `1 / max ‖x‖²`.
pub fn poly_c_start(vectors: &[&[f64]]) -> Result<f64> {
    let max = vectors.iter().map(|v| dot(v, v)).fold(0.0, f64::max);
    if max == 0.0 || !max.is_finite() {
        return Err(Error::InsufficientData("polynomial grid needs a nonzero training vector".into()));
    }
    Ok(1.0 / max)
}

fn poly_c_value(k: i32, c_start: f64) -> f64 {
    c_start * 4f64.powi(k)
}

/// `(c_start · 2^(2k), d)` for k = −3..3 and d = 2..6, degree-major.
pub fn poly_grid(vectors: &[&[f64]]) -> Result<Vec<(f64, u32)>> {
    let c_start = poly_c_start(vectors)?;
    Ok(POLY_DEGREES
        .flat_map(|d| POLY_C_STEPS.map(move |k| (poly_c_value(k, c_start), d)))
        .collect())
}

/// Kernel-parameter position within its grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelStep {
    Linear,
    Rbf { gamma_offset: i32 },
    Polynomial { degree: u32, c_step: i32 },
}

/// A point of the search grid as offsets. Concrete values depend on the
/// statistics of the data a classifier trains on, so one point resolves to
/// different (C, kernel) values per binary subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    pub c_exponent: i32,
    pub kernel: KernelStep,
}

impl GridPoint {
    pub fn family(&self) -> KernelFamily {
        match self.kernel {
            KernelStep::Linear => KernelFamily::Linear,
            KernelStep::Rbf { .. } => KernelFamily::Rbf,
            KernelStep::Polynomial { .. } => KernelFamily::Polynomial,
        }
    }

    pub fn resolve(&self, stats: &ColumnStats) -> Result<SvmParams> {
        let family = self.family();
        let c = c_value(family, self.c_exponent, stats.d_mean);
        let kernel = match self.kernel {
            KernelStep::Linear => KernelSpec::Linear,
            KernelStep::Rbf { gamma_offset } => KernelSpec::Rbf {
                gamma: gamma_value(gamma_offset, stats.d_mean),
            },
            KernelStep::Polynomial { degree, c_step } => KernelSpec::Polynomial {
                c: poly_c_value(c_step, stats.poly_c_start),
                degree,
            },
        };
        let params = SvmParams::new(c, kernel);
        params.validate()?;
        Ok(params)
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C=10^{}", self.c_exponent)?;
        match self.kernel {
            KernelStep::Linear => write!(f, "/D_mean"),
            KernelStep::Rbf { gamma_offset } => write!(f, " gamma=10^(start{gamma_offset:+})"),
            KernelStep::Polynomial { degree, c_step } => {
                write!(f, " d={degree} c=c_start*4^{c_step}")
            }
        }
    }
}

/// Per-subproblem anchors for grid resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnStats {
    pub d_mean: f64,
    pub poly_c_start: f64,
}

impl ColumnStats {
    pub fn compute(vectors: &[&[f64]], labels: &[i8]) -> Result<Self> {
        Ok(ColumnStats {
            d_mean: d_mean(vectors, labels)?,
            poly_c_start: poly_c_start(vectors)?,
        })
    }
}

/// All points of a family, ordered by the tie-break rule: C first, then
/// γ, or d then c.
pub fn grid_points(family: KernelFamily) -> Vec<GridPoint> {
    let steps: Vec<KernelStep> = match family {
        KernelFamily::Linear => vec![KernelStep::Linear],
        KernelFamily::Rbf => GAMMA_OFFSETS.map(|gamma_offset| KernelStep::Rbf { gamma_offset }).collect(),
        KernelFamily::Polynomial => POLY_DEGREES
            .flat_map(|degree| POLY_C_STEPS.map(move |c_step| KernelStep::Polynomial { degree, c_step }))
            .collect(),
    };
    C_EXPONENTS
        .flat_map(|c_exponent| steps.iter().map(move |&kernel| GridPoint { c_exponent, kernel }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_mean_examples() {
        let a = [0.0, 0.0];
        let b = [3.0, 4.0];
        assert_eq!(d_mean(&[&a, &b], &[-1, 1]).unwrap(), 5.0);
        let (p, q, r) = ([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
        let d = d_mean(&[&p, &q, &r], &[-1, -1, 1]).unwrap();
        assert!((d - (1.0 + 2f64.sqrt()) / 2.0).abs() < 1e-15);
        let dup = d_mean(&[&p, &q, &r, &p, &q, &r], &[-1, -1, 1, -1, -1, 1]).unwrap();
        assert!((dup - d).abs() < 1e-15);
        assert!(d_mean(&[&p, &q], &[1, 1]).is_err());
    }

    #[test]
    fn grid_examples() {
        let lin = c_grid(KernelFamily::Linear, 10.0).unwrap();
        let want = [0.1, 1.0, 10.0, 100.0, 1000.0];
        for (g, w) in lin.iter().zip(want) {
            assert!((g - w).abs() <= 1e-15 * w);
        }
        assert_eq!(c_grid(KernelFamily::Rbf, 3.7).unwrap(), vec![1.0, 10.0, 100.0, 1000.0, 10000.0]);
        assert_eq!(c_grid(KernelFamily::Linear, 1.0).unwrap(), vec![1.0, 10.0, 100.0, 1000.0, 10000.0]);
        let g = gamma_grid(10.0).unwrap();
        for (g, w) in g.iter().zip([1e-3, 1e-2, 1e-1, 1.0, 10.0]) {
            assert!((g - w).abs() <= 1e-14 * w);
        }
        let g = gamma_grid(0.1).unwrap();
        assert!((g[0] - 0.1).abs() < 1e-15 && (g[4] - 1000.0).abs() < 1e-11);
        assert!(c_grid(KernelFamily::Linear, 0.0).is_err());
    }

    #[test]
    fn poly_grid_examples() {
        let v = [2.0, 0.0];
        let w = [1.0, 1.0];
        let grid = poly_grid(&[&v, &w]).unwrap();
        assert_eq!(grid.len(), 35);
        assert_eq!(grid[0], (0.25 / 64.0, 2));
        assert_eq!(grid[6], (0.25 * 64.0, 2));
        assert_eq!(grid[34].1, 6);
        let unit = [0.6, 0.8];
        assert_eq!(poly_c_start(&[&unit]).unwrap(), 1.0 / (0.36 + 0.64));
        let z = [0.0, 0.0];
        assert!(poly_grid(&[&z]).is_err());
    }

    #[test]
    fn grid_sizes_and_order() {
        assert_eq!(grid_points(KernelFamily::Linear).len(), 5);
        assert_eq!(grid_points(KernelFamily::Rbf).len(), 25);
        assert_eq!(grid_points(KernelFamily::Polynomial).len(), 175);
        let rbf = grid_points(KernelFamily::Rbf);
        assert_eq!(rbf[0], GridPoint { c_exponent: 0, kernel: KernelStep::Rbf { gamma_offset: -2 } });
        assert_eq!(rbf[5].c_exponent, 1);
    }

    #[test]
    fn resolution_uses_column_stats() {
        let stats = ColumnStats { d_mean: 10.0, poly_c_start: 0.25 };
        let p = GridPoint { c_exponent: 2, kernel: KernelStep::Linear }.resolve(&stats).unwrap();
        assert!((p.c - 10.0).abs() < 1e-12);
        let p = GridPoint { c_exponent: 1, kernel: KernelStep::Rbf { gamma_offset: 0 } }.resolve(&stats).unwrap();
        assert_eq!(p.c, 10.0);
        match p.kernel {
            KernelSpec::Rbf { gamma } => assert!((gamma - 0.1).abs() < 1e-15),
            _ => unreachable!(),
        }
        let p = GridPoint { c_exponent: 0, kernel: KernelStep::Polynomial { degree: 3, c_step: 1 } }
            .resolve(&stats)
            .unwrap();
        assert_eq!(p.kernel, KernelSpec::Polynomial { c: 1.0, degree: 3 });
    }
}
