//! Flat result rows shared by the acceptance runner and the CLI tables.

use serde::Serialize;

use crate::averaging::PropertyCheck;
use crate::kernel::KrrGapReport;
use crate::linear_gap::{GapReport, MomentCheck, ProjectionTensorReport, WishartReport};
use crate::stats::{Estimate, Verdict};

/// One table row. Columns that do not apply to an experiment are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub label: String,
    pub d: Option<usize>,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub group: String,
    pub dim_a_or_codim: Option<f64>,
    pub sigma_x: Option<f64>,
    pub sigma_xi: Option<f64>,
    pub trials: Option<usize>,
    pub mc_mean: Option<f64>,
    pub mc_se: Option<f64>,
    pub closed_form: Option<f64>,
    pub rho: Option<f64>,
    pub mk: Option<f64>,
    pub n_kperp: Option<f64>,
    pub bound_bias: Option<f64>,
    pub bound_variance: Option<f64>,
    pub seed: u64,
    pub verdict: Verdict,
}

impl ResultRow {
    pub fn new(experiment: &str, label: impl Into<String>, seed: u64, verdict: Verdict) -> Self {
        Self {
            experiment: experiment.to_owned(),
            label: label.into(),
            d: None,
            k: None,
            n: None,
            group: String::new(),
            dim_a_or_codim: None,
            sigma_x: None,
            sigma_xi: None,
            trials: None,
            mc_mean: None,
            mc_se: None,
            closed_form: None,
            rho: None,
            mk: None,
            n_kperp: None,
            bound_bias: None,
            bound_variance: None,
            seed,
            verdict,
        }
    }

    pub fn with_group(mut self, group: impl Into<String>) -> Self {
        self.group = group.into();
        self
    }

    pub fn with_dims(mut self, d: Option<usize>, k: Option<usize>, n: Option<usize>) -> Self {
        self.d = d;
        self.k = k;
        self.n = n;
        self
    }

    pub fn with_estimate(mut self, est: Estimate, closed_form: Option<f64>) -> Self {
        self.mc_mean = Some(est.mean);
        self.mc_se = Some(est.se);
        self.trials = Some(est.count);
        self.closed_form = closed_form;
        self
    }

    /// A deterministic check: `value` against `threshold`.
    pub fn check(experiment: &str, label: impl Into<String>, value: f64, threshold: f64, passed: bool, seed: u64) -> Self {
        let mut row = Self::new(experiment, label, seed, Verdict::from_bool(passed));
        row.mc_mean = Some(value);
        row.closed_form = Some(threshold);
        row
    }

    pub fn from_gap(experiment: &str, r: &GapReport) -> Self {
        let mut row = Self::new(experiment, "gap", r.seed, r.verdict)
            .with_group(&r.group)
            .with_dims(Some(r.d), Some(r.k), Some(r.n))
            .with_estimate(Estimate { mean: r.mc_gap_mean, se: r.mc_gap_se, count: r.trials - r.failed_trials }, Some(r.closed_form));
        row.dim_a_or_codim = Some(r.dim_a);
        row.sigma_x = Some(r.sigma_x);
        row.sigma_xi = Some(r.sigma_xi);
        row.trials = Some(r.trials);
        row
    }

    pub fn from_krr(experiment: &str, r: &KrrGapReport) -> Self {
        let mut row = Self::new(experiment, "gap", r.seed, r.verdict)
            .with_group(&r.group)
            .with_dims(Some(r.d), Some(1), Some(r.n))
            .with_estimate(r.gap, Some(r.lower_bound));
        row.sigma_xi = Some(r.sigma);
        row.rho = Some(r.rho);
        row.mk = Some(r.mk);
        row.n_kperp = Some(r.n_kperp.mean);
        row.dim_a_or_codim = Some(r.n_kperp.mean);
        row.bound_bias = Some(r.bias.mean);
        row.bound_variance = Some(r.bound_variance);
        row
    }

    pub fn from_wishart(experiment: &str, r: &WishartReport, seed: u64) -> Self {
        let mut row = Self::new(experiment, "mean_diagonal", seed, r.verdict).with_dims(Some(r.d), None, Some(r.n));
        row.trials = Some(r.trials);
        row.mc_mean = Some(r.mean_diagonal);
        row.mc_se = Some(r.se.diagonal().mean());
        row.closed_form = Some(r.coefficient);
        row
    }

    pub fn from_projection_tensor(experiment: &str, r: &ProjectionTensorReport, seed: u64) -> Vec<Self> {
        let moments: [(&str, &MomentCheck); 7] = [
            ("alpha", &r.alpha),
            ("beta", &r.beta),
            ("gamma", &r.gamma),
            ("diagonal", &r.diagonal),
            ("trace_squared", &r.trace_squared),
            ("frobenius", &r.frobenius),
            ("trace_of_square", &r.trace_of_square),
        ];
        moments
            .iter()
            .map(|(label, m)| {
                Self::new(experiment, *label, seed, m.verdict)
                    .with_dims(Some(r.d), None, Some(r.n))
                    .with_estimate(m.estimate, Some(m.expected))
            })
            .collect()
    }

    pub fn from_property_checks(experiment: &str, group: &str, checks: &[PropertyCheck], seed: u64) -> Vec<Self> {
        checks
            .iter()
            .map(|c| Self::check(experiment, c.name, c.value, c.threshold, c.passed, seed).with_group(group))
            .collect()
    }
}

/// Column names in table order.
pub const COLUMNS: [&str; 20] = [
    "experiment",
    "label",
    "d",
    "k",
    "n",
    "group",
    "dimA_or_codim",
    "sigma_x",
    "sigma_xi",
    "trials",
    "mc_mean",
    "mc_se",
    "closed_form",
    "rho",
    "Mk",
    "N_kperp",
    "bound_bias",
    "bound_variance",
    "seed",
    "verdict",
];

impl ResultRow {
    /// Cells in [`COLUMNS`] order; absent values are empty and floats use
    /// the shortest round-trip representation.
    pub fn cells(&self) -> Vec<String> {
        fn int(v: Option<usize>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        fn real(v: Option<f64>) -> String {
            v.map(|x| format!("{x:?}")).unwrap_or_default()
        }
        vec![
            self.experiment.clone(),
            self.label.clone(),
            int(self.d),
            int(self.k),
            int(self.n),
            self.group.clone(),
            real(self.dim_a_or_codim),
            real(self.sigma_x),
            real(self.sigma_xi),
            int(self.trials),
            real(self.mc_mean),
            real(self.mc_se),
            real(self.closed_form),
            real(self.rho),
            real(self.mk),
            real(self.n_kperp),
            real(self.bound_bias),
            real(self.bound_variance),
            self.seed.to_string(),
            self.verdict.to_string(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_match_columns() {
        let row = ResultRow::check("x", "y", 0.1, 1.0, true, 3);
        let cells = row.cells();
        assert_eq!(cells.len(), COLUMNS.len());
        assert_eq!(cells[10], "0.1");
        assert_eq!(cells[2], "");
        assert_eq!(cells[18], "3");
        assert_eq!(cells[19], "pass");
    }
}
