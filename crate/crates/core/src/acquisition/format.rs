//! Line-oriented text serialization of [`PhaselessDataset`].
//!
//! ```text
//! COINV-DATASET v1
//! k <real>  sigma <real>  delta <real>  seed <int>
//! receivers <n_rx> radius <R> aperture <theta0> <theta1>
//! references <n_ref> radius <rho> aperture <theta0> <theta1>
//! M0
//! <n_rx lines, one real each>
//! M1
//! <n_rx lines, n_ref reals each>
//! M2
//! <n_rx lines, n_ref reals each>
//! ```
//!
//! Reals are written with 17 significant digits, so reading back is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::{AcquisitionGeometry, PhaselessDataset};
use crate::geometry::Ring;
use crate::{Error, Result};

pub const FORMAT_HEADER: &str = "COINV-DATASET v1";

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn dataset_to_string(ds: &PhaselessDataset) -> String {
    let mut out = String::new();
    let g = &ds.geometry;
    let ring_line = |name: &str, r: &Ring| {
        let (a, b) = r.aperture();
        format!("{name} {} radius {} aperture {} {}\n", r.count(), real(r.radius()), real(a), real(b))
    };
    out.push_str(FORMAT_HEADER);
    out.push('\n');
    let _ = writeln!(
        out,
        "k {}  sigma {}  delta {}  seed {}",
        real(ds.k),
        real(g.sigma),
        real(ds.noise_delta),
        ds.noise_seed
    );
    out.push_str(&ring_line("receivers", &g.receivers));
    out.push_str(&ring_line("references", &g.references));
    out.push_str("M0\n");
    for v in ds.m0.iter() {
        out.push_str(&real(*v));
        out.push('\n');
    }
    for (name, m) in [("M1", &ds.m1), ("M2", &ds.m2)] {
        out.push_str(name);
        out.push('\n');
        for i in 0..m.nrows() {
            let row: Vec<String> = m.row(i).iter().map(|v| real(*v)).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn write_dataset(ds: &PhaselessDataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, dataset_to_string(ds))?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<PhaselessDataset> {
    dataset_from_str(&fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l.trim()))
            }
            None => Err(Error::Parse {
                line: self.last + 1,
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_real(line: usize, field: &str, tok: Option<&str>) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing value for `{field}`")))?;
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("`{field}`: cannot parse `{tok}` as a real")))
}

fn parse_count(line: usize, field: &str, tok: Option<&str>) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing value for `{field}`")))?;
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("`{field}`: cannot parse `{tok}` as a count")))
}

fn expect_key(line: usize, tok: Option<&str>, key: &str) -> Result<()> {
    match tok {
        Some(t) if t == key => Ok(()),
        Some(t) => Err(parse_err(line, format!("expected `{key}`, found `{t}`"))),
        None => Err(parse_err(line, format!("expected `{key}`"))),
    }
}

fn parse_ring(lines: &mut Lines<'_>, name: &str) -> Result<Ring> {
    let (no, l) = lines.next(name)?;
    let mut t = l.split_whitespace();
    expect_key(no, t.next(), name)?;
    let count = parse_count(no, name, t.next())?;
    expect_key(no, t.next(), "radius")?;
    let radius = parse_real(no, "radius", t.next())?;
    expect_key(no, t.next(), "aperture")?;
    let a = parse_real(no, "aperture", t.next())?;
    let b = parse_real(no, "aperture", t.next())?;
    if let Some(extra) = t.next() {
        return Err(parse_err(no, format!("unexpected token `{extra}`")));
    }
    Ring::new(radius, count, a, b).map_err(|e| parse_err(no, e.to_string()))
}

fn parse_block(lines: &mut Lines<'_>, name: &str, rows: usize, cols: usize) -> Result<Vec<f64>> {
    let (no, l) = lines.next(name)?;
    if l != name {
        return Err(parse_err(no, format!("expected section `{name}`, found `{l}`")));
    }
    let mut values = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let (no, l) = lines.next(&format!("row {} of {name}", r + 1))?;
        let row: Vec<&str> = l.split_whitespace().collect();
        if row.len() != cols {
            return Err(parse_err(
                no,
                format!("{name} row {} has {} values, expected {cols}", r + 1, row.len()),
            ));
        }
        for tok in row {
            let v = parse_real(no, name, Some(tok))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(parse_err(no, format!("{name}: `{tok}` is not a finite nonnegative modulus")));
            }
            values.push(v);
        }
    }
    Ok(values)
}

pub fn dataset_from_str(text: &str) -> Result<PhaselessDataset> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (no, header) = lines.next("the version header")?;
    if header != FORMAT_HEADER {
        return Err(parse_err(
            no,
            format!("missing version header: expected `{FORMAT_HEADER}`, found `{header}`"),
        ));
    }

    let (no, l) = lines.next("the parameter line")?;
    let mut t = l.split_whitespace();
    expect_key(no, t.next(), "k")?;
    let k = parse_real(no, "k", t.next())?;
    expect_key(no, t.next(), "sigma")?;
    let sigma = parse_real(no, "sigma", t.next())?;
    expect_key(no, t.next(), "delta")?;
    let delta = parse_real(no, "delta", t.next())?;
    expect_key(no, t.next(), "seed")?;
    let seed_tok = t.next().ok_or_else(|| parse_err(no, "missing value for `seed`"))?;
    let seed = seed_tok
        .parse::<u64>()
        .map_err(|_| parse_err(no, format!("`seed`: cannot parse `{seed_tok}` as an integer")))?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(parse_err(no, format!("`k` must be positive, got {k}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(parse_err(no, format!("`delta` must lie in [0, 1), got {delta}")));
    }

    let receivers = parse_ring(&mut lines, "receivers")?;
    let references = parse_ring(&mut lines, "references")?;
    let geometry = AcquisitionGeometry::new(receivers, references, sigma).map_err(|e| parse_err(no, e.to_string()))?;
    let (nr, nz) = (receivers.count(), references.count());

    let m0 = parse_block(&mut lines, "M0", nr, 1)?;
    let m1 = parse_block(&mut lines, "M1", nr, nz)?;
    let m2 = parse_block(&mut lines, "M2", nr, nz)?;
    for (no, l) in lines.inner {
        if !l.trim().is_empty() {
            return Err(parse_err(no + 1, "trailing content after M2"));
        }
    }

    Ok(PhaselessDataset {
        geometry,
        k,
        m0: DVector::from_vec(m0),
        m1: DMatrix::from_row_slice(nr, nz, &m1),
        m2: DMatrix::from_row_slice(nr, nz, &m2),
        noise_delta: delta,
        noise_seed: seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PhaselessDataset {
        let geometry = AcquisitionGeometry::new(
            Ring::new(10.0, 4, 0.0, std::f64::consts::PI).unwrap(),
            Ring::full(9.0, 3).unwrap(),
            1.5,
        )
        .unwrap();
        PhaselessDataset {
            geometry,
            k: 4.0 * std::f64::consts::PI,
            m0: DVector::from_vec(vec![0.1, 1.0 / 3.0, 2e-17, 7.0]),
            m1: DMatrix::from_fn(4, 3, |i, j| (i as f64 + 1.0) / (j as f64 + 7.0)),
            m2: DMatrix::from_fn(4, 3, |i, j| ((i * 3 + j) as f64).sqrt() * std::f64::consts::E),
            noise_delta: 0.05,
            noise_seed: 12345678901234,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let ds = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.txt");
        write_dataset(&ds, &path).unwrap();
        assert_eq!(read_dataset(&path).unwrap(), ds);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let text = dataset_to_string(&sample());
        let broken = text.replace("receivers 4", "receivers 5");
        match dataset_from_str(&broken) {
            Err(Error::Parse { line, message }) => {
                assert!(line > 4, "line {line}");
                assert!(message.contains("M1") || message.contains("M0"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let short_row: Vec<String> = text
            .lines()
            .enumerate()
            .map(|(i, l)| if i == 11 { l.split(' ').take(2).collect::<Vec<_>>().join(" ") } else { l.to_string() })
            .collect();
        match dataset_from_str(&short_row.join("\n")) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 12);
                assert!(message.contains("expected 3"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_header_rejected() {
        let text = dataset_to_string(&sample());
        let headless: String = text.lines().skip(1).collect::<Vec<_>>().join("\n");
        match dataset_from_str(&headless) {
            Err(Error::Parse { line: 1, message }) => assert!(message.contains("missing version header")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_fields_name_the_field() {
        let text = dataset_to_string(&sample());
        let bad = text.replacen("sigma 1.5", "sigma x", 1);
        match dataset_from_str(&bad) {
            Err(Error::Parse { line: 2, message }) => assert!(message.contains("sigma")),
            other => panic!("expected parse error, got {other:?}"),
        }
        let negative = text.replacen("M0\n", "M0\n-", 1);
        assert!(matches!(dataset_from_str(&negative), Err(Error::Parse { line: 6, .. })));
    }
}
