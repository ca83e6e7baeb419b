//! Small numeric helpers: log-space binomial coefficients and
//! normal-approximation confidence intervals.

/// 97.5% quantile of the standard normal, for two-sided 95% intervals.
pub const Z_95: f64 = 1.959963984540054;

/// Natural log of `C(n, k)`, computed term by term in log space.
///
/// Stays finite for `n` up to at least 1e4 where the coefficient itself
/// would overflow `f64`. Returns `f64::NEG_INFINITY` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    let mut acc = 0.0;
    for j in 1..=k {
        acc += ((n - k + j) as f64).ln() - (j as f64).ln();
    }
    acc
}

/// Ratio `C(an, ak) / C(bn, bk)` evaluated in log space.
pub fn binomial_ratio(an: u64, ak: u64, bn: u64, bk: u64) -> f64 {
    let num = ln_binomial(an, ak);
    if num == f64::NEG_INFINITY {
        return 0.0;
    }
    (num - ln_binomial(bn, bk)).exp()
}

/// Sample mean and 95% half-width from integer sums of a count statistic.
///
/// Sums are accumulated exactly in integers by the callers, so the resulting
/// floats do not depend on summation order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
    pub trials: u64,
}

impl MeanCi {
    pub fn from_sums(sum: i128, sum_sq: i128, trials: u64) -> MeanCi {
        assert!(trials > 0, "mean of zero trials");
        let n = trials as f64;
        let mean = sum as f64 / n;
        let half_width = if trials > 1 {
            let var = (sum_sq as f64 - (sum as f64) * (sum as f64) / n) / (n - 1.0);
            // tiny negative values can appear when the statistic is constant
            Z_95 * (var.max(0.0) / n).sqrt()
        } else {
            0.0
        };
        MeanCi { mean, half_width, trials }
    }

    pub fn lo(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.mean + self.half_width
    }

    /// Standard error of the mean (half-width divided by the 95% quantile).
    pub fn standard_error(&self) -> f64 {
        self.half_width / Z_95
    }
}
