//! Points, group labels and the metric they live in.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Distance function over coordinate vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[non_exhaustive]
pub enum Metric {
    /// L2 distance.
    #[default]
    Euclidean,
}

impl Metric {
    /// Distance between two coordinate vectors of equal length.
    ///
    /// Symmetric bit-for-bit: `distance(a, b) == distance(b, a)`, since the
    /// squared differences are identical under negation and are summed in
    /// coordinate order.
    #[inline]
    pub fn distance<T: Scalar>(&self, a: &[T], b: &[T]) -> T {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .fold(T::zero(), |acc, (&x, &y)| {
                    let d = x - y;
                    acc + d * d
                })
                .sqrt(),
        }
    }
}

/// Anything that can report pairwise distances between indexed points.
pub trait MetricSpace<T: Scalar> {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn distance(&self, a: usize, b: usize) -> T;
}

/// A single labelled point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord<T> {
    pub id: usize,
    pub coords: Vec<T>,
    pub group: usize,
}

/// An immutable collection of labelled points of a common dimension.
///
/// Coordinates are stored row-major in one flat buffer; point ids are the
/// row indices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    dim: usize,
    coords: Vec<T>,
    groups: Vec<usize>,
    m: usize,
    group_sizes: Vec<usize>,
    metric: Metric,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset from a flat row-major coordinate buffer.
    ///
    /// `m` is the number of groups; every label must be `< m`.
    pub fn new(dim: usize, coords: Vec<T>, groups: Vec<usize>, m: usize) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if coords.len() != dim * groups.len() {
            return Err(Error::Dimension {
                expected: dim * groups.len(),
                found: coords.len(),
            });
        }
        if let Some(i) = coords.chunks(dim).position(|row| row.iter().any(|x| !x.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        let mut group_sizes = vec![0; m];
        for &g in &groups {
            if g >= m {
                return Err(Error::InvalidGroup { group: g, m });
            }
            group_sizes[g] += 1;
        }
        Ok(Self {
            dim,
            coords,
            groups,
            m,
            group_sizes,
            metric: Metric::default(),
        })
    }

    /// Builds a dataset from `(coords, group)` rows. When `m` is `None` the
    /// group count is one more than the largest label.
    pub fn from_rows<I>(rows: I, m: Option<usize>) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<T>, usize)>,
    {
        let mut dim = None;
        let mut coords = Vec::new();
        let mut groups = Vec::new();
        for (row, g) in rows {
            let d = *dim.get_or_insert(row.len());
            if row.len() != d {
                return Err(Error::Dimension {
                    expected: d,
                    found: row.len(),
                });
            }
            coords.extend(row);
            groups.push(g);
        }
        let m = m.unwrap_or_else(|| groups.iter().max().map_or(0, |g| g + 1));
        Self::new(dim.unwrap_or(0), coords, groups, m)
    }

    /// One-dimensional convenience constructor, mostly for tests and examples.
    pub fn from_line(xs: &[f64], groups: &[usize]) -> Result<Self> {
        Self::from_rows(xs.iter().zip(groups).map(|(&x, &g)| (vec![T::of(x)], g)), None)
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn n(&self) -> usize {
        self.groups.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of groups.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn group(&self, id: usize) -> usize {
        self.groups[id]
    }

    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    /// `|S_i|` for every group.
    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn coords(&self, id: usize) -> &[T] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    /// Row-major coordinate buffer.
    pub fn raw_coords(&self) -> &[T] {
        &self.coords
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> T {
        self.metric.distance(self.coords(a), self.coords(b))
    }

    pub fn record(&self, id: usize) -> PointRecord<T> {
        PointRecord {
            id,
            coords: self.coords(id).to_vec(),
            group: self.groups[id],
        }
    }

    pub fn records(&self) -> impl Iterator<Item = PointRecord<T>> + '_ {
        (0..self.n()).map(|i| self.record(i))
    }

    /// A new dataset holding the given points (renumbered `0..ids.len()`),
    /// keeping the group count and metric.
    pub fn subset(&self, ids: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(ids.len() * self.dim);
        let mut groups = Vec::with_capacity(ids.len());
        for &id in ids {
            if id >= self.n() {
                return Err(Error::InvalidPoint { id, n: self.n() });
            }
            coords.extend_from_slice(self.coords(id));
            groups.push(self.groups[id]);
        }
        Ok(Self::new(self.dim, coords, groups, self.m)?.with_metric(self.metric))
    }
}

impl<T: Scalar> MetricSpace<T> for Dataset<T> {
    fn len(&self) -> usize {
        self.n()
    }

    fn distance(&self, a: usize, b: usize) -> T {
        Dataset::distance(self, a, b)
    }
}
