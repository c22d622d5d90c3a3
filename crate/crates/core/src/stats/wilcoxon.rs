use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{PairedSample, StatsError};

/// Largest total sample size (zeros included) tested by exact enumeration.
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// post > pre.
    Greater,
}

impl std::str::FromStr for Alternative {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "two-sided" | "two_sided" => Ok(Alternative::TwoSided),
            "greater" => Ok(Alternative::Greater),
            other => Err(format!("unknown alternative {other:?} (expected two-sided or greater)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of ranks of the positive differences.
    pub w_statistic: f64,
    pub n_total: usize,
    pub n_nonzero: usize,
    pub p_value: f64,
    pub method: Method,
    pub alternative: Alternative,
}

/// Pratt ranks: average ranks of |d| over all differences, zeros included.
pub fn pratt_ranks(d: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()));
    let mut ranks = vec![0.0; d.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && d[order[j + 1]].abs() == d[order[i]].abs() {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Signed-rank test of post − pre with Pratt's treatment of zeros. Exact
/// when the total sample size is at most [`EXACT_MAX_N`], normal
/// approximation otherwise.
pub fn wilcoxon_pratt(samples: &[PairedSample], alternative: Alternative) -> Result<WilcoxonResult, StatsError> {
    let d: Vec<f64> = samples.iter().map(|s| f64::from(s.post) - f64::from(s.pre)).collect();
    let method = if d.len() <= EXACT_MAX_N { Method::Exact } else { Method::NormalApprox };
    wilcoxon_pratt_differences(&d, alternative, method)
}

/// Same test on raw differences with an explicit method. The exact path
/// refuses more than 30 nonzero differences.
pub fn wilcoxon_pratt_differences(
    d: &[f64],
    alternative: Alternative,
    method: Method,
) -> Result<WilcoxonResult, StatsError> {
    if d.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::InconsistentInput("non-finite difference".into()));
    }
    let ranks = pratt_ranks(d);
    let nonzero: Vec<f64> = d.iter().zip(&ranks).filter(|(x, _)| **x != 0.0).map(|(_, r)| *r).collect();
    if nonzero.is_empty() {
        return Err(StatsError::DegenerateSample);
    }
    let w: f64 = d.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
    let p_value = match method {
        Method::Exact => exact_p(&nonzero, w, alternative)?,
        Method::NormalApprox => normal_p(d, &ranks, w, alternative)?,
    };
    Ok(WilcoxonResult {
        w_statistic: w,
        n_total: d.len(),
        n_nonzero: nonzero.len(),
        p_value: p_value.clamp(0.0, 1.0),
        method,
        alternative,
    })
}

/// Null distribution of W by subset-sum counting over doubled ranks (Pratt
/// ranks are multiples of 1/2), equivalent to enumerating all 2^n signs.
fn exact_p(ranks: &[f64], w: f64, alternative: Alternative) -> Result<f64, StatsError> {
    if ranks.len() > 30 {
        return Err(StatsError::InconsistentInput(format!("exact test on {} nonzero differences", ranks.len())));
    }
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0f64; max + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let total = 2f64.powi(ranks.len() as i32);
    let w2 = (w * 2.0).round() as usize;
    let upper: f64 = counts[w2..].iter().sum::<f64>() / total;
    let lower: f64 = counts[..=w2].iter().sum::<f64>() / total;
    Ok(match alternative {
        Alternative::Greater => upper,
        Alternative::TwoSided => (2.0 * upper.min(lower)).min(1.0),
    })
}

/// Normal approximation with Pratt's zero correction, tie correction and a
/// continuity correction of 1/2.
fn normal_p(d: &[f64], ranks: &[f64], w: f64, alternative: Alternative) -> Result<f64, StatsError> {
    let n = d.len() as f64;
    let z0 = d.iter().filter(|x| **x == 0.0).count() as f64;
    let mean = (n * (n + 1.0) - z0 * (z0 + 1.0)) / 4.0;
    let mut var = n * (n + 1.0) * (2.0 * n + 1.0) - z0 * (z0 + 1.0) * (2.0 * z0 + 1.0);
    // Tie groups among the nonzero ranks.
    let mut nz: Vec<f64> = d.iter().zip(ranks).filter(|(x, _)| **x != 0.0).map(|(_, r)| *r).collect();
    nz.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < nz.len() {
        let j = nz[i..].iter().take_while(|r| **r == nz[i]).count();
        let t = j as f64;
        var -= 0.5 * t * (t * t - 1.0);
        i += j;
    }
    let sd = (var / 24.0).sqrt();
    if sd.is_nan() || sd <= 0.0 {
        return Err(StatsError::DegenerateSample);
    }
    let diff = w - mean;
    let z = (diff - 0.5 * diff.signum()) / sd;
    let normal = Normal::standard();
    Ok(match alternative {
        Alternative::Greater => normal.sf(z),
        Alternative::TwoSided => (2.0 * normal.sf(z.abs())).min(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties_including_zeros() {
        assert_eq!(pratt_ranks(&[0.0, 1.0, -1.0, 2.0]), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn five_positive() {
        let r = wilcoxon_pratt_differences(&[1.0; 5], Alternative::TwoSided, Method::Exact).unwrap();
        assert_eq!(r.w_statistic, 15.0);
        assert!((r.p_value - 0.0625).abs() < 1e-15);
        let r = wilcoxon_pratt_differences(&[1.0; 5], Alternative::Greater, Method::Exact).unwrap();
        assert!((r.p_value - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate() {
        assert!(matches!(
            wilcoxon_pratt_differences(&[0.0, 0.0], Alternative::TwoSided, Method::Exact),
            Err(StatsError::DegenerateSample)
        ));
        assert!(matches!(wilcoxon_pratt_differences(&[], Alternative::TwoSided, Method::Exact), Err(StatsError::EmptySample)));
    }
}
