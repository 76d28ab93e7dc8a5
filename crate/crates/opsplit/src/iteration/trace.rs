//! Per-iteration records, running sums, and trace export.

use crate::error::Result;
use crate::Point;
use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;
use std::path::Path;

/// One executed (or terminally evaluated) iteration. `dist_to_ref` is the
/// distance of the pre-step iterate to the reference point, when one was
/// supplied; `running_sum` is the partial sum Σ λ_k(1/α_k − λ_k)·residual²
/// up to and including this row's step.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub index: usize,
    pub residual: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub error_norm: f64,
    pub dist_to_ref: Option<f64>,
    pub running_sum: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIterations,
    ResidualTolerance,
    TargetReached,
}

/// Append-only record of a run. Rows are indexed by iteration; iterate
/// snapshots are thinned (`thin` = 1 below 10⁴ planned iterations, 10
/// above) to bound the trace size.
#[derive(Clone, Debug)]
pub struct IterationTrace {
    pub algorithm: String,
    pub dimension: usize,
    pub thin: usize,
    pub rows: Vec<TraceRow>,
    /// (iteration, iterate) snapshots: the initial point, every `thin`-th
    /// iterate, and always the final point.
    pub iterates: Vec<(usize, Point)>,
    /// Objective values at each row's pre-step iterate, when the run
    /// records objectives (proximal-gradient does; others do not).
    pub objectives: Vec<f64>,
    /// `‖x_k − x̄‖` for k = 0..=steps, when a reference was supplied.
    pub distances: Vec<f64>,
    /// Σ_n λ_n·‖e_{i,n}‖ per slot.
    pub per_factor_error_sums: Vec<f64>,
    /// Per-factor partial sums Σ_n λ_n(1−α_{i,n})/α_{i,n}·‖(Id−T_{i,n})
    /// applied to the pipeline stage at x_n minus the same at x̄‖², when a
    /// reference was supplied (empty otherwise).
    pub displacement_sums: Vec<f64>,
    /// Σ_n λ_n(1/α_n − λ_n)·residual_n² over executed steps.
    pub running_sum: f64,
    /// Σ_n λ_n·‖e_n‖ with e_n the aggregate (composite) error.
    pub error_weighted_sum: f64,
    /// Σ_n ‖G(x_n) − G(x̄)‖² for a caller-chosen map G, when one was hooked.
    pub map_gap_sum: Option<f64>,
    /// Count of iterations violating ‖x_{n+1}−x̄‖ ≤ ‖x_n−x̄‖ + λ_n‖e_n‖
    /// beyond a 1e−9 relative slack.
    pub fejer_violations: usize,
    pub max_fejer_violation: f64,
    /// Per-snapshot distances to a supplied set family (feasibility runs).
    pub set_distances: Vec<(usize, Vec<f64>)>,
    pub annotations: Vec<String>,
    pub stop_reason: StopReason,
    pub final_point: Point,
    steps: usize,
}

impl IterationTrace {
    pub(crate) fn new(
        algorithm: &str,
        dimension: usize,
        planned_iterations: usize,
        factor_count: usize,
        with_reference: bool,
    ) -> Self {
        let thin = if planned_iterations < 10_000 { 1 } else { 10 };
        IterationTrace {
            algorithm: algorithm.to_owned(),
            dimension,
            thin,
            rows: Vec::new(),
            iterates: Vec::new(),
            objectives: Vec::new(),
            distances: Vec::new(),
            per_factor_error_sums: vec![0.0; factor_count],
            displacement_sums: if with_reference {
                vec![0.0; factor_count]
            } else {
                Vec::new()
            },
            running_sum: 0.0,
            error_weighted_sum: 0.0,
            map_gap_sum: None,
            fejer_violations: 0,
            max_fejer_violation: 0.0,
            set_distances: Vec::new(),
            annotations: Vec::new(),
            stop_reason: StopReason::MaxIterations,
            final_point: Point::zeros(dimension),
            steps: 0,
        }
    }

    pub(crate) fn snapshot(&mut self, index: usize, x: &Point) {
        if index % self.thin == 0 {
            self.iterates.push((index, x.clone()));
        }
    }

    pub(crate) fn count_step(&mut self) {
        self.steps += 1;
    }

    pub(crate) fn finish(&mut self, final_index: usize, x: Point, reason: StopReason) {
        if self.iterates.last().map(|(i, _)| *i) != Some(final_index) {
            self.iterates.push((final_index, x.clone()));
        }
        self.final_point = x;
        self.stop_reason = reason;
    }

    /// Number of update steps executed (a terminal residual check does not
    /// count as a step).
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Residual at the last evaluated iterate.
    pub fn final_residual(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.residual)
    }

    pub fn final_distance(&self) -> Option<f64> {
        self.distances.last().copied()
    }

    pub fn sup_distance(&self) -> Option<f64> {
        self.distances
            .iter()
            .copied()
            .reduce(f64::max)
    }

    /// The a-posteriori constant ν = Σ_k λ_k‖e_k‖ + 2·sup_k ‖x_k − x̄‖ of
    /// the quasi-Fejér inequality; available once a reference was tracked.
    pub fn nu(&self) -> Option<f64> {
        self.sup_distance()
            .map(|sup| self.error_weighted_sum + 2.0 * sup)
    }

    /// Assembles the (values, decrements, perturbations) triple of the
    /// squared-distance quasi-Fejér inequality from the recorded ledger:
    /// values ‖x_n − x̄‖², decrements λ_n(1/α_n − λ_n)·residual_n²,
    /// perturbations ν·λ_n·‖e_n‖.
    pub fn quasi_fejer_inputs(&self) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let nu = self.nu()?;
        if self.distances.len() != self.steps + 1 {
            return None;
        }
        let values = self.distances.iter().map(|d| d * d).collect();
        let stepping = &self.rows[..self.steps];
        let decrements = stepping
            .iter()
            .map(|r| r.lambda * (1.0 / r.alpha - r.lambda) * r.residual * r.residual)
            .collect();
        let perturbations = stepping
            .iter()
            .map(|r| nu * r.lambda * r.error_norm)
            .collect();
        Some((values, decrements, perturbations))
    }

    /// CSV with the fixed column contract, one row per recorded iteration.
    /// `thin` > 1 keeps every `thin`-th row plus the final one.
    pub fn csv_string(&self, thin: usize) -> String {
        let thin = thin.max(1);
        let mut out = String::from("index,residual,lambda,alpha,error_norm,dist_to_ref,running_sum\n");
        let last = self.rows.len().saturating_sub(1);
        for (k, row) in self.rows.iter().enumerate() {
            if k % thin != 0 && k != last {
                continue;
            }
            let dist = row
                .dist_to_ref
                .map_or(String::new(), |d| format!("{d}"));
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.index, row.residual, row.lambda, row.alpha, row.error_norm, dist, row.running_sum
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path, thin: usize) -> Result<()> {
        std::fs::write(path, self.csv_string(thin))?;
        Ok(())
    }

    /// JSON export: run metadata plus the same columns as the CSV (and an
    /// extra `objective` column when the run recorded objectives).
    pub fn json_value(&self) -> serde_json::Value {
        let mut columns = json!({
            "index": self.rows.iter().map(|r| r.index).collect::<Vec<_>>(),
            "residual": self.rows.iter().map(|r| r.residual).collect::<Vec<_>>(),
            "lambda": self.rows.iter().map(|r| r.lambda).collect::<Vec<_>>(),
            "alpha": self.rows.iter().map(|r| r.alpha).collect::<Vec<_>>(),
            "error_norm": self.rows.iter().map(|r| r.error_norm).collect::<Vec<_>>(),
            "dist_to_ref": self.rows.iter().map(|r| r.dist_to_ref).collect::<Vec<_>>(),
            "running_sum": self.rows.iter().map(|r| r.running_sum).collect::<Vec<_>>(),
        });
        if !self.objectives.is_empty() {
            columns["objective"] = json!(self.objectives);
        }
        json!({
            "algorithm": self.algorithm,
            "dimension": self.dimension,
            "steps": self.steps,
            "stop_reason": self.stop_reason,
            "thin": self.thin,
            "final_residual": self.final_residual(),
            "final_point": self.final_point.iter().copied().collect::<Vec<_>>(),
            "final_dist_to_ref": self.final_distance(),
            "running_sum": self.running_sum,
            "error_weighted_sum": self.error_weighted_sum,
            "per_factor_error_sums": self.per_factor_error_sums,
            "displacement_sums": self.displacement_sums,
            "map_gap_sum": self.map_gap_sum,
            "fejer_violations": self.fejer_violations,
            "max_fejer_violation": self.max_fejer_violation,
            "set_distances": self.set_distances.iter().map(|(i, d)| json!({"index": i, "distances": d})).collect::<Vec<_>>(),
            "annotations": self.annotations,
            "columns": columns,
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.json_value())?;
        std::fs::write(path, text)?;
        Ok(())
    }
}
