//! CSV tables emitted by the command-line tools.
//!
//! Every table has a header row. Reals are printed with 12 significant
//! digits in the shortest of fixed or exponent notation, so identical
//! inputs always give byte-identical files.

use std::io::Write;

use thiserror::Error;

use crate::eqspace::{diagonal_dimension, full_dimension, rank_oracle, EqspaceError, MAX_RANK_N};
use crate::training::{Expt1Row, RunRecord};
use crate::zxparity::{parity_csv_rows, ZxError};

pub const EXPT1_HEADER: [&str; 5] = ["alpha", "k", "prob_g1", "prob_g2", "accuracy"];
pub const EXPT2_HEADER: [&str; 9] =
    ["depth", "seed", "epoch", "loss", "train_ss", "train_ms", "eval_ss", "eval_ms", "grad_norm"];
pub const DIMS_HEADER: [&str; 5] = ["n", "s", "full_dim", "diag_dim", "rank_verified"];
pub const PARITY_HEADER: [&str; 3] = ["n", "bitstring", "prob"];

/// Largest `n` for which `full_dim` is tabulated.
pub const MAX_DIMS_N: usize = 12;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("n = {0} is outside the supported range for this table")]
    Range(usize),

    #[error(transparent)]
    Eqspace(#[from] EqspaceError),

    #[error(transparent)]
    Zx(#[from] ZxError),
}

pub type ReportResult<T> = Result<T, ReportError>;

/// `printf("%.12g")`.
pub fn format_real(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn writer<W: Write>(out: W, header: &[&str]) -> ReportResult<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

/// One row per `(alpha, k)`, alpha-major.
pub fn write_expt1<W: Write>(out: W, rows: &[Expt1Row]) -> ReportResult<()> {
    let mut w = writer(out, &EXPT1_HEADER)?;
    for r in rows {
        for (k, (p1, p2)) in r.prob_g1.iter().zip(&r.prob_g2).enumerate() {
            w.write_record([format_real(r.alpha), k.to_string(), format_real(*p1), format_real(*p2), format_real(r.accuracy)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per `(depth, seed, epoch)` in the order given.
pub fn write_expt2<W: Write>(out: W, records: &[RunRecord]) -> ReportResult<()> {
    let mut w = writer(out, &EXPT2_HEADER)?;
    for r in records {
        for m in &r.metrics {
            w.write_record([
                r.depth.to_string(),
                r.seed.to_string(),
                m.epoch.to_string(),
                format_real(m.loss),
                format_real(m.train_ss),
                format_real(m.train_ms),
                format_real(m.eval_ss),
                format_real(m.eval_ms),
                format_real(m.grad_norm),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimsRow {
    pub n: usize,
    pub s: usize,
    /// Only tabulated for qubit nodes.
    pub full_dim: Option<usize>,
    pub diag_dim: u128,
    /// Whether `full_dim` was confirmed by the rank computation.
    pub rank_verified: bool,
}

/// Rows for every `n` in `ns` and every node dimension in `ss`, `n`-major.
/// Qubit rows with `n <= 5` are checked against the rank oracle.
pub fn dims_rows(ns: &[usize], ss: &[usize]) -> ReportResult<Vec<DimsRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        if n == 0 || n > MAX_DIMS_N {
            return Err(ReportError::Range(n));
        }
        for &s in ss {
            if s < 2 {
                return Err(ReportError::Range(s));
            }
            let full_dim = (s == 2).then(|| full_dimension(n));
            let rank_verified = match full_dim {
                Some(d) if n <= MAX_RANK_N => rank_oracle(n)? == d,
                _ => false,
            };
            rows.push(DimsRow { n, s, full_dim, diag_dim: diagonal_dimension(n, s), rank_verified });
        }
    }
    Ok(rows)
}

pub fn write_dims<W: Write>(out: W, rows: &[DimsRow]) -> ReportResult<()> {
    let mut w = writer(out, &DIMS_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.s.to_string(),
            r.full_dim.map(|d| d.to_string()).unwrap_or_default(),
            r.diag_dim.to_string(),
            r.rank_verified.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Observable bitstrings of the CZ(pi)-Hadamard circuit on the `n`-cycle.
pub fn write_parity<W: Write>(out: W, n: usize) -> ReportResult<()> {
    let mut w = writer(out, &PARITY_HEADER)?;
    for (n, bits, p) in parity_csv_rows(n)? {
        w.write_record([n.to_string(), bits, format_real(p)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::training::{experiment1, MetricsRow};

    fn text(f: impl FnOnce(&mut Vec<u8>) -> ReportResult<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn twelve_significant_digits() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.625, "0.625"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0, "0.666666666667"),
            (std::f64::consts::PI, "3.14159265359"),
            (-std::f64::consts::PI, "-3.14159265359"),
            (1e-5, "1e-05"),
            (1.5e-4, "0.00015"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (0.12500000000000003, "0.125"),
            (9.9999999999999e-5, "0.0001"),
        ];
        for (x, want) in cases {
            assert_eq!(format_real(x), want, "{x}");
        }
    }

    #[test]
    fn expt1_table() {
        let rows = experiment1(&[std::f64::consts::PI]).unwrap();
        let s = text(|b| write_expt1(b, &rows));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "alpha,k,prob_g1,prob_g2,accuracy");
        assert_eq!(lines.len(), 8);
        assert_eq!(lines[3], "3.14159265359,2,0.5625,0.375,0.625");
    }

    #[test]
    fn expt2_table() {
        let m = MetricsRow { epoch: 0, loss: 0.5, train_ss: 0.25, train_ms: 1.0, eval_ss: 0.0, eval_ms: 0.5, grad_norm: 1e-7 };
        let recs = [RunRecord { depth: 3, seed: 7, metrics: vec![m] }];
        let s = text(|b| write_expt2(b, &recs));
        assert_eq!(s, "depth,seed,epoch,loss,train_ss,train_ms,eval_ss,eval_ms,grad_norm\n3,7,0,0.5,0.25,1,0,0.5,1e-07\n");
    }

    #[test]
    fn dims_table() {
        let rows = dims_rows(&[2, 3, 4], &[2, 3]).unwrap();
        assert_eq!(rows[2], DimsRow { n: 3, s: 2, full_dim: Some(20), diag_dim: 4, rank_verified: true });
        assert_eq!(rows[4].diag_dim, 5);
        assert_eq!(rows[1].diag_dim, 6);
        let s = text(|b| write_dims(b, &rows[..2]));
        assert_eq!(s, "n,s,full_dim,diag_dim,rank_verified\n2,2,10,3,true\n2,3,,6,false\n");
        assert!(dims_rows(&[13], &[2]).is_err());
        assert!(!dims_rows(&[6], &[2]).unwrap()[0].rank_verified);
    }

    #[test]
    fn parity_table() {
        let s = text(|b| write_parity(b, 3));
        assert_eq!(s, "n,bitstring,prob\n3,001,0.25\n3,010,0.25\n3,100,0.25\n3,111,0.25\n");
    }
}
