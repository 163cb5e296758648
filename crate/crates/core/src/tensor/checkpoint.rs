//! Text checkpoint of a correlation tensor.
//!
//! ```text
//! dvqa-tensor 1
//! mode dense            | mode train
//! ranks 2 2 3
//! bonds -               | bonds 1 2 2 1
//! <re> <im>             one line per parameter, row-major
//! ```
//!
//! Values are written with 17 significant digits and read back bit-exactly.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::CorrelationTensor;
use crate::error::{DvqaError, Result};

pub fn write_checkpoint(c: &CorrelationTensor) -> String {
    let mut out = String::from("dvqa-tensor 1\n");
    let ranks: Vec<String> = c.ranks().iter().map(|r| r.to_string()).collect();
    match c.bonds() {
        None => {
            out.push_str("mode dense\n");
            let _ = writeln!(out, "ranks {}", ranks.join(" "));
            out.push_str("bonds -\n");
        }
        Some(bonds) => {
            out.push_str("mode train\n");
            let _ = writeln!(out, "ranks {}", ranks.join(" "));
            let b: Vec<String> = bonds.iter().map(|b| b.to_string()).collect();
            let _ = writeln!(out, "bonds {}", b.join(" "));
        }
    }
    for z in c.params() {
        let _ = writeln!(out, "{:.16e} {:.16e}", z.re, z.im);
    }
    out
}

pub fn read_checkpoint(text: &str, path: &str) -> Result<CorrelationTensor> {
    let perr = |line: usize, message: String| DvqaError::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut expect = |key: &str| -> Result<(usize, String)> {
        let (n, l) = lines
            .next()
            .ok_or_else(|| perr(0, format!("unexpected end of file, expected {key}")))?;
        let rest = l
            .strip_prefix(key)
            .ok_or_else(|| perr(n, format!("expected `{key}`")))?;
        Ok((n, rest.trim().to_string()))
    };
    let (n, version) = expect("dvqa-tensor")?;
    if version != "1" {
        return Err(perr(n, format!("unsupported version {version}")));
    }
    let (mode_line, mode) = expect("mode")?;
    let (rank_line, ranks) = expect("ranks")?;
    let ranks = ranks
        .split_whitespace()
        .map(|r| r.parse::<usize>().map_err(|_| perr(rank_line, format!("bad rank {r:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let (bond_line, bonds) = expect("bonds")?;
    let mut values = Vec::new();
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut f = line.split_whitespace();
        let (Some(re), Some(im), None) = (f.next(), f.next(), f.next()) else {
            return Err(perr(n, "expected `<re> <im>`".into()));
        };
        let re: f64 = re.parse().map_err(|_| perr(n, format!("bad number {re:?}")))?;
        let im: f64 = im.parse().map_err(|_| perr(n, format!("bad number {im:?}")))?;
        values.push(Complex64::new(re, im));
    }
    match mode.as_str() {
        "dense" => CorrelationTensor::from_dense(&ranks, values).map_err(|e| perr(rank_line, e.to_string())),
        "train" => {
            let bonds = bonds
                .split_whitespace()
                .map(|b| b.parse::<usize>().map_err(|_| perr(bond_line, format!("bad bond {b:?}"))))
                .collect::<Result<Vec<_>>>()?;
            CorrelationTensor::from_train(&ranks, bonds, values).map_err(|e| perr(bond_line, e.to_string()))
        }
        other => Err(perr(mode_line, format!("unknown mode {other:?}"))),
    }
}
