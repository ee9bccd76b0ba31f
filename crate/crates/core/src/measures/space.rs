use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A point of a ground space.
///
/// Ordering is total (reals compare with `f64::total_cmp`) so that points can
/// key sorted maps and multisets can be put in a canonical order.
#[derive(Clone, Debug)]
pub enum Point {
    Real(f64),
    Vector(Vec<f64>),
    Label(usize),
}

impl Point {
    /// Real point with `-0.0` folded into `0.0`.
    pub fn real(x: f64) -> Self {
        Point::Real(x + 0.0)
    }

    pub fn vector(coords: Vec<f64>) -> Self {
        Point::Vector(coords.into_iter().map(|c| c + 0.0).collect())
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Point::Real(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_label(&self) -> Option<usize> {
        match self {
            Point::Label(j) => Some(*j),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Point::Real(_) => 0,
            Point::Vector(_) => 1,
            Point::Label(_) => 2,
        }
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Point::Real(a), Point::Real(b)) => a.total_cmp(b),
            (Point::Vector(a), Point::Vector(b)) => {
                for (x, y) in a.iter().zip(b) {
                    match x.total_cmp(y) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                a.len().cmp(&b.len())
            }
            (Point::Label(a), Point::Label(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Point {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Point {}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Real(x) => write!(f, "{x}"),
            Point::Vector(v) => {
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            Point::Label(j) => write!(f, "#{j}"),
        }
    }
}

/// A finite set of labels with an explicit metric.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    dist: Vec<f64>,
}

impl FiniteSpace {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.labels.len() + j]
    }
}

/// Metric space the measures live on.
#[derive(Clone, Debug, PartialEq)]
pub enum GroundSpace {
    RealLine,
    Euclidean { dim: usize },
    Finite(Arc<FiniteSpace>),
}

impl GroundSpace {
    pub fn real_line() -> Self {
        GroundSpace::RealLine
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("euclidean dimension must be at least 1"));
        }
        Ok(GroundSpace::Euclidean { dim })
    }

    /// Finite labeled space. `matrix` is row-major `k x k` and must be a metric.
    pub fn finite(labels: Vec<String>, matrix: Vec<f64>) -> Result<Self> {
        let k = labels.len();
        if k == 0 {
            return Err(Error::invalid("finite space needs at least one label"));
        }
        if matrix.len() != k * k {
            return Err(Error::invalid(format!(
                "distance matrix has {} entries, expected {}",
                matrix.len(),
                k * k
            )));
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::invalid(format!("duplicate label {label:?}")));
            }
        }
        let d = |i: usize, j: usize| matrix[i * k + j];
        for i in 0..k {
            if d(i, i) != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal at label {i}")));
            }
            for j in 0..k {
                let v = d(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid(format!("bad distance at ({i},{j}): {v}")));
                }
                if i != j && v == 0.0 {
                    return Err(Error::invalid(format!("distinct labels {i},{j} at distance 0")));
                }
                if v != d(j, i) {
                    return Err(Error::invalid(format!("asymmetric distance at ({i},{j})")));
                }
            }
        }
        for i in 0..k {
            for j in 0..k {
                for l in 0..k {
                    if d(i, l) > d(i, j) + d(j, l) + 1e-12 {
                        return Err(Error::invalid(format!(
                            "triangle inequality fails for labels ({i},{j},{l})"
                        )));
                    }
                }
            }
        }
        Ok(GroundSpace::Finite(Arc::new(FiniteSpace { labels, dist: matrix })))
    }

    /// `k` labels named `0..k` under the discrete metric.
    pub fn discrete(k: usize) -> Result<Self> {
        let labels = (0..k).map(|i| i.to_string()).collect();
        let matrix = (0..k * k)
            .map(|idx| if idx / k == idx % k { 0.0 } else { 1.0 })
            .collect();
        Self::finite(labels, matrix)
    }

    pub fn as_finite(&self) -> Option<&FiniteSpace> {
        match self {
            GroundSpace::Finite(f) => Some(f),
            _ => None,
        }
    }

    pub fn is_real_line(&self) -> bool {
        matches!(self, GroundSpace::RealLine)
    }

    pub fn contains(&self, p: &Point) -> bool {
        match (self, p) {
            (GroundSpace::RealLine, Point::Real(x)) => x.is_finite(),
            (GroundSpace::Euclidean { dim }, Point::Vector(v)) => {
                v.len() == *dim && v.iter().all(|c| c.is_finite())
            }
            (GroundSpace::Finite(f), Point::Label(j)) => *j < f.len(),
            _ => false,
        }
    }

    /// Ground distance. Both points must belong to the space.
    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        match (self, a, b) {
            (GroundSpace::RealLine, Point::Real(x), Point::Real(y)) => (x - y).abs(),
            (GroundSpace::Euclidean { .. }, Point::Vector(x), Point::Vector(y)) => x
                .iter()
                .zip(y)
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>()
                .sqrt(),
            (GroundSpace::Finite(f), Point::Label(i), Point::Label(j)) => f.distance(*i, *j),
            _ => panic!("points {a} and {b} do not belong to {self:?}"),
        }
    }

    pub(crate) fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::invalid(format!("point {p} is not in {}", self.describe())))
        }
    }

    pub fn describe(&self) -> String {
        match self {
            GroundSpace::RealLine => "the real line".into(),
            GroundSpace::Euclidean { dim } => format!("R^{dim}"),
            GroundSpace::Finite(f) => format!("a finite space of {} labels", f.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_matrices() {
        let labels = || vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let asym = vec![0.0, 1.0, 1.0, 2.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        assert!(GroundSpace::finite(labels(), asym).is_err());
        let triangle = vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0];
        assert!(GroundSpace::finite(labels(), triangle).is_err());
        let diag = vec![1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        assert!(GroundSpace::finite(labels(), diag).is_err());
        assert!(GroundSpace::euclidean(0).is_err());
    }

    #[test]
    fn point_order_is_canonical() {
        assert_eq!(Point::real(-0.0), Point::real(0.0));
        assert!(Point::real(-1.0) < Point::real(0.5));
        assert!(Point::vector(vec![0.0, 2.0]) < Point::vector(vec![1.0, 0.0]));
    }

    #[test]
    fn discrete_metric() {
        let s = GroundSpace::discrete(3).unwrap();
        assert_eq!(s.distance(&Point::Label(0), &Point::Label(2)), 1.0);
        assert_eq!(s.distance(&Point::Label(1), &Point::Label(1)), 0.0);
        assert!(!s.contains(&Point::Label(3)));
    }
}
