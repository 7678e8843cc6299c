//! CSV rendering of experiment results.

use std::io::Write;

use anyhow::Result;
use srlab_core::experiments::{ExperimentReport, VarBoundPoint};
use srlab_core::stats::ContourCell;

/// Full precision: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const SUM_HEADER: [&str; 6] = ["case", "mode", "abs_bias", "variance", "rel_err", "n"];

pub fn sum_row(case: &str, mode: &str, r: &ExperimentReport) -> Vec<String> {
    let s = r.summary.as_ref();
    vec![
        case.to_string(),
        mode.to_string(),
        opt(s.map(|s| s.abs_bias)),
        opt(s.map(|s| s.variance)),
        opt(s.and_then(|s| s.mean_abs_rel_err)),
        s.map(|s| s.n_samples.to_string()).unwrap_or_default(),
    ]
}

pub const SQRT_HEADER: [&str; 10] = [
    "a",
    "mode",
    "delta",
    "mu",
    "abs_bias",
    "variance",
    "rel_err",
    "n_it_mean",
    "breakdowns",
    "non_converged",
];

pub fn sqrt_row(a: f64, mode: &str, delta: f64, r: &ExperimentReport) -> Vec<String> {
    let s = r.summary.as_ref();
    vec![
        num(a),
        mode.to_string(),
        num(delta),
        opt(s.map(|s| s.mu)),
        opt(s.map(|s| s.abs_bias)),
        opt(s.map(|s| s.variance)),
        opt(s.and_then(|s| s.mean_abs_rel_err)),
        opt(s.and_then(|s| s.n_it_mean)),
        r.breakdowns.to_string(),
        r.non_converged.to_string(),
    ]
}

pub const DOT_HEADER: [&str; 5] = ["n", "mode", "abs_bias", "variance", "rel_err"];

pub fn dot_row(n: usize, mode: &str, r: &ExperimentReport) -> Vec<String> {
    let s = r.summary.as_ref();
    vec![
        n.to_string(),
        mode.to_string(),
        opt(s.map(|s| s.abs_bias)),
        opt(s.map(|s| s.variance)),
        opt(s.and_then(|s| s.mean_abs_rel_err)),
    ]
}

pub const VARBOUND_HEADER: [&str; 4] = ["x", "empirical", "theoretical", "bound"];

pub fn varbound_row(p: &VarBoundPoint) -> Vec<String> {
    vec![num(p.x), num(p.empirical), num(p.theoretical), num(p.bound)]
}

pub const CONTOUR_HEADER: [&str; 5] = ["x1", "x2", "e_down", "e_up", "p"];

pub fn contour_row(c: &ContourCell) -> Vec<String> {
    vec![
        num(c.x1),
        num(c.x2),
        num(c.branches.e_down),
        num(c.branches.e_up),
        num(c.branches.p),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1650.7618, 2f64.powi(-10), 0.0, -7.25e-300] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn empty_fields_for_missing_values() {
        assert_eq!(opt(None), "");
    }
}
