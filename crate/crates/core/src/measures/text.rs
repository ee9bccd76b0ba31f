//! Line-oriented text format for [`DiscreteMeasure`].
//!
//! ```text
//! # space: real                 (default when no directive is given)
//! # space: euclidean 2
//! # space: finite a b c         (discrete metric unless `# row:` lines follow)
//! # row: 0 1 2
//! <atom> <weight>
//! ```
//!
//! Real atoms are decimals, vectors are comma-separated coordinates and finite
//! atoms are label names. Other `#` lines are comments.

use std::fmt::Write as _;
use std::path::Path;

use super::{DiscreteMeasure, GroundSpace, Point};
use crate::error::{Error, Result};

enum Header {
    Real,
    Euclidean(usize),
    Finite(Vec<String>),
}

pub fn parse(text: &str) -> Result<DiscreteMeasure> {
    let mut header = Header::Real;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut body: Vec<(usize, &str, &str)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(spec) = rest.strip_prefix("space:") {
                header = parse_space(spec, lineno)?;
            } else if let Some(row) = rest.strip_prefix("row:") {
                let row = row
                    .split_whitespace()
                    .map(|t| parse_f64(t, lineno))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(atom), Some(weight), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::invalid(format!("line {lineno}: expected `<atom> <weight>`")));
        };
        body.push((lineno, atom, weight));
    }

    let space = match &header {
        Header::Real => GroundSpace::RealLine,
        Header::Euclidean(d) => GroundSpace::euclidean(*d)?,
        Header::Finite(labels) => {
            let k = labels.len();
            if rows.is_empty() {
                let matrix = (0..k * k)
                    .map(|i| if i / k == i % k { 0.0 } else { 1.0 })
                    .collect();
                GroundSpace::finite(labels.clone(), matrix)?
            } else {
                if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                    return Err(Error::invalid(format!("distance rows must form a {k}x{k} matrix")));
                }
                GroundSpace::finite(labels.clone(), rows.concat())?
            }
        }
    };

    let mut pairs = Vec::with_capacity(body.len());
    for (lineno, atom, weight) in body {
        let point = match (&header, &space) {
            (Header::Real, _) => Point::real(parse_f64(atom, lineno)?),
            (Header::Euclidean(_), _) => Point::vector(
                atom.split(',')
                    .map(|t| parse_f64(t, lineno))
                    .collect::<Result<Vec<_>>>()?,
            ),
            (Header::Finite(_), GroundSpace::Finite(f)) => Point::Label(
                f.label_index(atom)
                    .ok_or_else(|| Error::invalid(format!("line {lineno}: unknown label {atom:?}")))?,
            ),
            _ => unreachable!(),
        };
        pairs.push((point, parse_f64(weight, lineno)?));
    }
    DiscreteMeasure::from_pairs(space, pairs)
}

fn parse_space(spec: &str, lineno: usize) -> Result<Header> {
    let mut tokens = spec.split_whitespace();
    match tokens.next() {
        Some("real") => Ok(Header::Real),
        Some("euclidean") => {
            let dim = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::invalid(format!("line {lineno}: euclidean needs a dimension")))?;
            Ok(Header::Euclidean(dim))
        }
        Some("finite") => Ok(Header::Finite(tokens.map(str::to_string).collect())),
        other => Err(Error::invalid(format!("line {lineno}: unknown space {other:?}"))),
    }
}

fn parse_f64(token: &str, lineno: usize) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| Error::invalid(format!("line {lineno}: {token:?} is not a number")))
}

/// Writes the measure with shortest round-trip decimals.
pub fn render(mu: &DiscreteMeasure) -> String {
    let mut out = String::new();
    match mu.space() {
        GroundSpace::RealLine => out.push_str("# space: real\n"),
        GroundSpace::Euclidean { dim } => {
            let _ = writeln!(out, "# space: euclidean {dim}");
        }
        GroundSpace::Finite(f) => {
            let _ = writeln!(out, "# space: finite {}", f.labels().join(" "));
            for i in 0..f.len() {
                let row: Vec<String> = (0..f.len()).map(|j| f.distance(i, j).to_string()).collect();
                let _ = writeln!(out, "# row: {}", row.join(" "));
            }
        }
    }
    for (p, w) in mu.iter() {
        match (p, mu.space()) {
            (Point::Label(j), GroundSpace::Finite(f)) => {
                let _ = writeln!(out, "{} {w}", f.labels()[*j]);
            }
            _ => {
                let _ = writeln!(out, "{p} {w}");
            }
        }
    }
    out
}

pub fn read(path: &Path) -> Result<DiscreteMeasure> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text)
}

pub fn write(path: &Path, mu: &DiscreteMeasure) -> Result<()> {
    std::fs::write(path, render(mu)).map_err(|e| Error::io(path, e))
}
