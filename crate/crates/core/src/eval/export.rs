//! CSV exports with fixed column orders.

use std::io::Write;

use super::{DensityGrid, RocCurve};
use crate::error::{Error, Result};

pub const REPORT_HEADER: [&str; 10] = [
    "index",
    "label",
    "score_ffnn",
    "score_sigmoid",
    "logp_class0",
    "logp_class1",
    "post_mean",
    "ci_lo",
    "ci_hi",
    "abstain",
];

/// One line of `reports.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub index: usize,
    pub label: usize,
    pub score_ffnn: f64,
    pub score_sigmoid: f64,
    pub logp: [f64; 2],
    pub post_mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub abstain: bool,
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<csv>", io),
        other => Error::InvalidConfig(format!("csv write failed: {other:?}")),
    }
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::io("<csv>", std::io::Error::other(e.to_string())))?
        .flush()
        .map_err(|e| Error::io("<csv>", e))
}

pub fn write_reports(sink: impl Write, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(REPORT_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.index.to_string(),
            r.label.to_string(),
            num(r.score_ffnn),
            num(r.score_sigmoid),
            num(r.logp[0]),
            num(r.logp[1]),
            num(r.post_mean),
            num(r.ci_lo),
            num(r.ci_hi),
            u8::from(r.abstain).to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// Columns `scorer,fpr,tpr,threshold`; one block of rows per curve.
pub fn write_roc_curves(sink: impl Write, curves: &[(&str, &RocCurve)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["scorer", "fpr", "tpr", "threshold"]).map_err(csv_err)?;
    for (name, curve) in curves {
        for p in &curve.points {
            w.write_record([name.to_string(), num(p.fpr), num(p.tpr), num(p.threshold)])
                .map_err(csv_err)?;
        }
    }
    finish(w)
}

/// Columns `x,y,logp_0,...,logp_{M-1},logp_total`.
pub fn write_density_grid(sink: impl Write, grid: &DensityGrid) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let m = grid.log_densities.cols();
    let mut header = vec!["x".to_string(), "y".to_string()];
    header.extend((0..m).map(|k| format!("logp_{k}")));
    header.push("logp_total".into());
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..grid.points.rows() {
        let mut row: Vec<String> = grid.points.row(i).iter().map(|&v| num(v)).collect();
        row.extend(grid.log_densities.row(i).iter().map(|&v| num(v)));
        row.push(num(grid.total[i]));
        w.write_record(&row).map_err(csv_err)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::roc_auc;

    #[test]
    fn roc_csv_layout() {
        let c = roc_auc(&[0.9, 0.1], &[1, 0]).unwrap();
        let mut buf = Vec::new();
        write_roc_curves(&mut buf, &[("ffnn", &c)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "scorer,fpr,tpr,threshold");
        assert_eq!(lines[1], "ffnn,0.0,0.0,inf");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn report_csv_layout() {
        let row = ReportRow {
            index: 3,
            label: 1,
            score_ffnn: 0.5,
            score_sigmoid: 0.25,
            logp: [-1.0, f64::NEG_INFINITY],
            post_mean: 0.5,
            ci_lo: 0.025,
            ci_hi: 0.975,
            abstain: true,
        };
        let mut buf = Vec::new();
        write_reports(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), REPORT_HEADER.join(","));
        assert_eq!(text.lines().nth(1).unwrap(), "3,1,0.5,0.25,-1.0,-inf,0.5,0.025,0.975,1");
    }
}
