//! Center sets and how they are scored.

use crate::bounds::ProblemInstance;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A set of chosen center ids with per-group counts.
///
/// Ids are kept sorted ascending and unique.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CenterSet {
    centers: Vec<usize>,
    per_group: Vec<usize>,
}

impl CenterSet {
    /// Centers drawn from `dataset`.
    pub fn from_ids<T: Scalar>(dataset: &Dataset<T>, ids: impl IntoIterator<Item = usize>) -> Result<Self> {
        let n = dataset.n();
        Self::from_labelled(
            ids.into_iter().map(|id| {
                if id >= n {
                    Err(Error::InvalidPoint { id, n })
                } else {
                    Ok((id, dataset.group(id)))
                }
            }),
            dataset.m(),
        )
    }

    /// Centers given as `(id, group)` pairs, for points that do not live in
    /// a [`Dataset`] (e.g. stream arrival indices).
    pub fn from_labelled<I>(pairs: I, m: usize) -> Result<Self>
    where
        I: IntoIterator<Item = Result<(usize, usize)>>,
    {
        let mut centers = Vec::new();
        let mut per_group = vec![0; m];
        for pair in pairs {
            let (id, g) = pair?;
            if g >= m {
                return Err(Error::InvalidGroup { group: g, m });
            }
            centers.push(id);
            per_group[g] += 1;
        }
        centers.sort_unstable();
        if let Some(w) = centers.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateCenter(w[0]));
        }
        Ok(Self { centers, per_group })
    }

    pub fn ids(&self) -> &[usize] {
        &self.centers
    }

    /// `|C ∩ S_i|` for every group.
    pub fn per_group(&self) -> &[usize] {
        &self.per_group
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.centers.binary_search(&id).is_ok()
    }
}

/// The k-center objective: the largest distance from any point of the
/// dataset to its nearest center.
///
/// Points are scanned in id order and centers in ascending id order; the
/// result does not depend on that order since only `min`/`max` are taken.
pub fn objective<T: Scalar>(dataset: &Dataset<T>, centers: &CenterSet) -> Result<T> {
    if centers.is_empty() {
        return Err(Error::NoCenters);
    }
    if let Some(&id) = centers.ids().iter().find(|&&id| id >= dataset.n()) {
        return Err(Error::InvalidPoint { id, n: dataset.n() });
    }
    Ok(radius_to(dataset, centers.ids()))
}

/// Objective of an instance's dataset; see [`objective`].
pub fn instance_objective<T: Scalar>(instance: &ProblemInstance<'_, T>, centers: &CenterSet) -> Result<T> {
    objective(instance.dataset, centers)
}

/// `max_s min_{c in ids} d(s, c)` without validation.
pub(crate) fn radius_to<T: Scalar>(dataset: &Dataset<T>, ids: &[usize]) -> T {
    let mut worst = T::zero();
    for s in 0..dataset.n() {
        let mut best = T::infinity();
        for &c in ids {
            let d = dataset.distance(s, c);
            if d < best {
                best = d;
                if best == T::zero() {
                    break;
                }
            }
        }
        if best > worst {
            worst = best;
        }
    }
    worst
}

/// True iff `|C| = k` and `l_i <= |C ∩ S_i| <= u_i` for every group.
pub fn check_fairness<T: Scalar>(instance: &ProblemInstance<'_, T>, centers: &CenterSet) -> bool {
    let b = instance.bounds;
    if centers.len() != b.k || centers.per_group().len() != b.m() {
        return false;
    }
    if centers.ids().iter().any(|&id| id >= instance.dataset.n()) {
        return false;
    }
    centers
        .per_group()
        .iter()
        .zip(b.l.iter().zip(&b.u))
        .all(|(&c, (&l, &u))| l <= c && c <= u)
}
