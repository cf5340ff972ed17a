//! Report rows shared by the verification oracles and the CLI: every row
//! carries the quantity id, the closed-form value, the observed value
//! (oracle, estimate, or recomputation), the tolerance and a pass flag.

use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub id: String,
    pub closed: f64,
    pub observed: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ReportRow {
    /// Row judged by relative deviation against max(1, |closed|).
    pub fn relative(id: impl Into<String>, closed: f64, observed: f64, tol: f64) -> ReportRow {
        let denom = 1.0f64.max(closed.abs());
        let pass = (observed - closed).abs() <= tol * denom;
        ReportRow { id: id.into(), closed, observed, tol, pass }
    }

    /// Row judged by absolute deviation (tol in the value's own units,
    /// e.g. a multiple of a standard error).
    pub fn absolute(id: impl Into<String>, closed: f64, observed: f64, tol: f64) -> ReportRow {
        let pass = (observed - closed).abs() <= tol;
        ReportRow { id: id.into(), closed, observed, tol, pass }
    }

    /// Row that records a boolean check.
    pub fn flag(id: impl Into<String>, pass: bool) -> ReportRow {
        ReportRow {
            id: id.into(),
            closed: 1.0,
            observed: if pass { 1.0 } else { 0.0 },
            tol: 0.0,
            pass,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = ReportRow>) {
        self.rows.extend(rows);
    }

    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    /// CSV with fixed columns; numbers carry 17 significant digits so
    /// reports are bit-reproducible.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("id,closed,observed,tolerance,pass\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:.16e},{:.16e},{:.16e},{}",
                r.id, r.closed, r.observed, r.tol, r.pass
            );
        }
        s
    }

    pub fn to_summary(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let _ = writeln!(
                s,
                "[{}] {}: closed {:.10e}, observed {:.10e}, tol {:.3e}",
                if r.pass { "pass" } else { "FAIL" },
                r.id,
                r.closed,
                r.observed,
                r.tol
            );
        }
        let _ = writeln!(s, "{} of {} checks passed", self.rows.len() - self.failed(), self.rows.len());
        s
    }
}
