use serde::{Deserialize, Serialize};

/// One-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.326_347_874_040_841;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Passes when `statistic >= threshold`.
    AtLeast,
    /// Passes when `statistic <= threshold`.
    AtMost,
}

impl Comparison {
    pub fn holds(self, statistic: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtLeast => statistic >= threshold,
            Comparison::AtMost => statistic <= threshold,
        }
    }
}

/// Outcome of one Monte Carlo experiment.
///
/// `bound` is the theoretical target and `threshold` the value actually
/// compared against after statistical slack; `passed` is always
/// `comparison.holds(statistic, threshold)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub experiment: String,
    pub params: serde_json::Value,
    pub trials: usize,
    pub statistic: f64,
    pub bound: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
    pub seeds_used: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_times: Option<Vec<f64>>,
}

impl VerificationReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        experiment: &str,
        params: serde_json::Value,
        trials: usize,
        statistic: f64,
        bound: f64,
        threshold: f64,
        comparison: Comparison,
        seeds_used: Vec<u64>,
    ) -> Self {
        VerificationReport {
            experiment: experiment.to_string(),
            params,
            trials,
            statistic,
            bound,
            threshold,
            comparison,
            passed: comparison.holds(statistic, threshold),
            seeds_used,
            wall_times: None,
        }
    }

    /// Recomputes `passed` from the stored numbers.
    pub fn is_consistent(&self) -> bool {
        self.passed == self.comparison.holds(self.statistic, self.threshold)
    }

    /// Single-line JSON.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Smallest success count still consistent, at one-sided 99% confidence
/// (normal approximation), with a success probability of `p` over `trials`.
pub fn binomial_min_successes(trials: usize, p: f64) -> usize {
    let n = trials as f64;
    let lower = n * p - Z_99 * (n * p * (1.0 - p)).sqrt();
    lower.max(0.0).floor() as usize
}

/// Largest failure count still consistent, at one-sided 99% confidence, with a
/// failure probability of `q` over `trials`.
pub fn binomial_max_failures(trials: usize, q: f64) -> usize {
    let n = trials as f64;
    let upper = n * q + Z_99 * (n * q * (1.0 - q)).sqrt();
    (upper.floor() as usize).min(trials)
}
