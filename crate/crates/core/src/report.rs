//! Report row and summary schemas shared by the suites and the batch driver.
//!
//! CSV detail rows and JSON summaries are assembled from plain structs with
//! fixed field order, and floats are printed with Rust's shortest-roundtrip
//! formatting, so identical runs serialize byte-identically.

use serde::Serialize;

/// One scored inequality: `(form, level, family, seed, lhs, rhs, margin)`.
#[derive(Debug, Clone, Serialize)]
pub struct MarginRow {
    pub form: &'static str,
    pub level: usize,
    pub family: &'static str,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl MarginRow {
    pub const CSV_HEADER: &'static str = "form,level,family,seed,lhs,rhs,margin";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.form, self.level, self.family, self.seed, self.lhs, self.rhs, self.margin
        )
    }
}

/// One ball membership sample:
/// `(level, r, seed, distance, member, four bound flags)`.
#[derive(Debug, Clone, Serialize)]
pub struct BallRow {
    pub level: usize,
    pub r: f64,
    pub seed: u64,
    pub distance: f64,
    pub member: bool,
    pub norm_bound_ok: bool,
    pub im_lower_ok: bool,
    pub im_band_ok: bool,
    pub re_band_ok: bool,
}

impl BallRow {
    pub const CSV_HEADER: &'static str =
        "level,r,seed,distance,member,norm_bound_ok,im_lower_ok,im_band_ok,re_band_ok";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.level,
            self.r,
            self.seed,
            self.distance,
            self.member,
            self.norm_bound_ok,
            self.im_lower_ok,
            self.im_band_ok,
            self.re_band_ok
        )
    }
}

/// One function-axiom check: a named deviation against its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantRow {
    pub invariant: &'static str,
    pub level: usize,
    pub family: &'static str,
    pub seed: u64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl InvariantRow {
    pub const CSV_HEADER: &'static str = "invariant,level,family,seed,deviation,tolerance,pass";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.invariant, self.level, self.family, self.seed, self.deviation, self.tolerance, self.pass
        )
    }
}

/// Per-form aggregate of margin rows.
#[derive(Debug, Clone, Serialize)]
pub struct FormSummary {
    pub form: String,
    pub count: usize,
    pub min_margin: f64,
    pub median_margin: f64,
    pub violations: usize,
}

/// JSON summary of a margin suite.
#[derive(Debug, Clone, Serialize)]
pub struct MarginSummary {
    pub forms: Vec<FormSummary>,
    pub total_rows: usize,
    pub total_violations: usize,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Aggregates margin rows by form; a row is a violation when its margin is
/// below `-tol * (1 + |rhs|)`.
pub fn summarize_margins(rows: &[MarginRow], tol: f64) -> MarginSummary {
    let mut forms: Vec<&'static str> = Vec::new();
    for r in rows {
        if !forms.contains(&r.form) {
            forms.push(r.form);
        }
    }
    let mut out = Vec::new();
    let mut total_violations = 0;
    for form in forms {
        let mut margins: Vec<f64> = rows
            .iter()
            .filter(|r| r.form == form)
            .map(|r| r.margin)
            .collect();
        margins.sort_by(|a, b| a.total_cmp(b));
        let violations = rows
            .iter()
            .filter(|r| r.form == form && r.margin < -tol * (1.0 + r.rhs.abs()))
            .count();
        total_violations += violations;
        out.push(FormSummary {
            form: form.to_string(),
            count: margins.len(),
            min_margin: margins.first().copied().unwrap_or(f64::NAN),
            median_margin: median(&margins),
            violations,
        });
    }
    MarginSummary {
        forms: out,
        total_rows: rows.len(),
        total_violations,
    }
}

/// JSON summary of a ball suite.
#[derive(Debug, Clone, Serialize)]
pub struct BallSummary {
    pub rows: usize,
    pub members: usize,
    pub bound_failures: usize,
    pub midpoint_checks: usize,
    pub midpoint_failures: usize,
    pub max_member_distance: f64,
}

/// JSON summary of a function-axiom suite.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantSummary {
    pub rows: usize,
    pub failures: usize,
    pub worst_relative_excess: f64,
}

pub fn summarize_invariants(rows: &[InvariantRow]) -> InvariantSummary {
    let failures = rows.iter().filter(|r| !r.pass).count();
    let worst = rows
        .iter()
        .map(|r| r.deviation / r.tolerance.max(1e-300))
        .fold(0.0f64, f64::max);
    InvariantSummary {
        rows: rows.len(),
        failures,
        worst_relative_excess: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_lines_are_stable() {
        let row = MarginRow {
            form: "norm",
            level: 2,
            family: "moebius",
            seed: 42,
            lhs: 0.5,
            rhs: 1.0,
            margin: 0.5,
        };
        assert_eq!(row.csv_line(), "norm,2,moebius,42,0.5,1,0.5");
    }

    #[test]
    fn margin_summary_counts_violations() {
        let mk = |form: &'static str, margin: f64| MarginRow {
            form,
            level: 1,
            family: "moebius",
            seed: 0,
            lhs: 0.0,
            rhs: 1.0,
            margin,
        };
        let rows = vec![mk("est", 0.5), mk("est", -1.0), mk("norm", 0.1)];
        let s = summarize_margins(&rows, 1e-8);
        assert_eq!(s.total_rows, 3);
        assert_eq!(s.total_violations, 1);
        let est = s.forms.iter().find(|f| f.form == "est").unwrap();
        assert_eq!(est.count, 2);
        assert_eq!(est.violations, 1);
        assert_eq!(est.min_margin, -1.0);
    }
}
