use std::fmt;

use crate::error::{Error, Result};

/// A point label: a real coordinate, a nonnegative integer, or a vertex name.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Real(f64),
    Int(u64),
    Vertex(String),
}

impl Point {
    pub fn as_real(&self) -> Option<f64> {
        match *self {
            Point::Real(x) => Some(x),
            Point::Int(n) => Some(n as f64),
            Point::Vertex(_) => None,
        }
    }

    pub fn as_int(&self) -> Option<u64> {
        match *self {
            Point::Int(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_vertex(&self) -> Option<&str> {
        match self {
            Point::Vertex(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Real(x) => write!(f, "{x}"),
            Point::Int(n) => write!(f, "{n}"),
            Point::Vertex(v) => f.write_str(v),
        }
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::Real(x)
    }
}

impl From<u64> for Point {
    fn from(n: u64) -> Self {
        Point::Int(n)
    }
}

impl From<&str> for Point {
    fn from(v: &str) -> Self {
        Point::Vertex(v.to_string())
    }
}

/// Ordered finite set of distinct point labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    /// Labels are compared exactly; no fuzzy deduplication of reals.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].iter().any(|q| q == p) {
                return Err(Error::DuplicatePoint(p.to_string()));
            }
        }
        Ok(Self { points })
    }

    pub fn reals(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().copied().map(Point::Real).collect())
    }

    pub fn ints(ns: &[u64]) -> Result<Self> {
        Self::new(ns.iter().copied().map(Point::Int).collect())
    }

    pub fn vertices<S: AsRef<str>>(vs: &[S]) -> Result<Self> {
        Self::new(
            vs.iter()
                .map(|v| Point::Vertex(v.as_ref().to_string()))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn get(&self, i: usize) -> Option<&Point> {
        self.points.get(i)
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.points.iter().position(|q| q == p)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    /// Real coordinates, erroring unless every label is real and the
    /// sequence strictly increases.
    pub fn increasing_reals(&self) -> Result<Vec<f64>> {
        let xs = self
            .points
            .iter()
            .map(|p| {
                p.as_real().ok_or_else(|| Error::DomainMismatch {
                    point: p.to_string(),
                    domain: "real coordinates".into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(i) = xs.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::NotIncreasing(i + 1));
        }
        Ok(xs)
    }

    /// Copy with the point at `index` removed.
    pub fn without(&self, index: usize) -> Option<Self> {
        if self.points.len() <= 1 || index >= self.points.len() {
            return None;
        }
        let mut points = self.points.clone();
        points.remove(index);
        Some(Self { points })
    }

    /// The first `n` points.
    pub fn prefix(&self, n: usize) -> Option<Self> {
        (n >= 1 && n <= self.points.len()).then(|| Self {
            points: self.points[..n].to_vec(),
        })
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty() {
        assert_eq!(PointSet::new(vec![]), Err(Error::EmptyPointSet));
        assert!(matches!(
            PointSet::reals(&[1.0, 2.0, 1.0]),
            Err(Error::DuplicatePoint(_))
        ));
        // distinct in value but not in label type
        assert!(PointSet::new(vec![Point::Int(1), Point::Real(1.0)]).is_ok());
    }

    #[test]
    fn increasing_reals_checks_order() {
        let ps = PointSet::reals(&[1.0, 3.0, 2.0]).unwrap();
        assert_eq!(ps.increasing_reals(), Err(Error::NotIncreasing(2)));
        let ps = PointSet::reals(&[0.5, 1.5]).unwrap();
        assert_eq!(ps.increasing_reals().unwrap(), vec![0.5, 1.5]);
    }

    #[test]
    fn prefix_and_without() {
        let ps = PointSet::ints(&[0, 1, 2]).unwrap();
        assert_eq!(ps.prefix(2).unwrap().len(), 2);
        assert!(ps.prefix(0).is_none());
        assert_eq!(
            ps.without(1).unwrap().points(),
            &[Point::Int(0), Point::Int(2)]
        );
        assert!(PointSet::ints(&[4]).unwrap().without(0).is_none());
    }
}
