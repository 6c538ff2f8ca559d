//! Farthest-first traversal.
//!
//! Besides the center sequence `a_1..a_k` and the gaps `d_2..d_k`, the trace
//! keeps for every point the list of times its nearest center changed, so
//! the nearest-center assignment of any prefix `a_1..a_h` can be recovered
//! in `O(log k)` per point without rescanning.

use crate::dataset::{Dataset, MetricSpace};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A change of a point's nearest center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssignEvent<T> {
    /// Number of centers chosen when the change happened (1-based).
    pub iteration: u32,
    /// Position of the new nearest center in the sequence (0-based).
    pub center: u32,
    pub dist: T,
}

#[derive(Debug, Clone)]
pub struct GonzalezTrace<T> {
    sequence: Vec<usize>,
    gaps: Vec<T>,
    points: Vec<usize>,
    history: Vec<Vec<AssignEvent<T>>>,
    selection_order: Vec<usize>,
}

impl<T: Scalar> GonzalezTrace<T> {
    /// Center ids in the order chosen.
    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// `d_2, ..., d_len`: the distance of each newly chosen center to the
    /// centers chosen before it. Non-increasing.
    pub fn gaps(&self) -> &[T] {
        &self.gaps
    }

    /// `d_i` for `2 <= i <= len` (1-based like the sequence).
    pub fn gap(&self, i: usize) -> T {
        assert!(i >= 2 && i <= self.len(), "gap index {i} outside 2..={}", self.len());
        self.gaps[i - 2]
    }

    /// Ids of the points the traversal ran over; assignment vectors are
    /// aligned with this slice.
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    /// Assignment history of the point at position `local` of [`Self::points`].
    pub fn history(&self, local: usize) -> &[AssignEvent<T>] {
        &self.history[local]
    }

    /// Full farthest-first order over all traversed points. For a subset
    /// traversal this extends past `limit`; otherwise it equals the sequence.
    pub fn selection_order(&self) -> &[usize] {
        &self.selection_order
    }

    /// Nearest center among `a_1..a_h` for one point, as (sequence
    /// position, distance).
    pub fn assignment_of(&self, local: usize, h: usize) -> (usize, T) {
        assert!(h >= 1 && h <= self.len(), "prefix {h} outside 1..={}", self.len());
        let events = &self.history[local];
        let idx = events.partition_point(|e| e.iteration as usize <= h);
        let e = events[idx - 1];
        (e.center as usize, e.dist)
    }

    /// Nearest center among the first `h` centers for every traversed point,
    /// as (0-based sequence position, distance).
    pub fn assignment_at_prefix(&self, h: usize) -> Vec<(usize, T)> {
        (0..self.points.len()).map(|p| self.assignment_of(p, h)).collect()
    }
}

/// Farthest-first traversal over `dataset` starting at `start`, choosing
/// `k` centers. Ties in the argmax go to the smallest id.
pub fn gonzalez<T: Scalar>(dataset: &Dataset<T>, k: usize, start: usize) -> Result<GonzalezTrace<T>> {
    let n = dataset.n();
    if k == 0 {
        return Err(Error::ZeroK);
    }
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    if start >= n {
        return Err(Error::InvalidPoint { id: start, n });
    }
    let points: Vec<usize> = (0..n).collect();
    Ok(traverse(&points, |a, b| dataset.distance(a, b), start, k, k))
}

/// Farthest-first traversal restricted to `subset` (ids in `space`),
/// starting from `subset[0]`. Records the trace for the first
/// `min(limit, |subset|)` centers and the selection order of every point.
pub fn gonzalez_on_subset<T, S>(space: &S, subset: &[usize], limit: usize) -> GonzalezTrace<T>
where
    T: Scalar,
    S: MetricSpace<T> + ?Sized,
{
    assert!(!subset.is_empty(), "gonzalez on an empty subset");
    let limit = limit.clamp(1, subset.len());
    traverse(subset, |a, b| space.distance(a, b), 0, limit, subset.len())
}

fn traverse<T, F>(points: &[usize], dist: F, start_local: usize, record: usize, total: usize) -> GonzalezTrace<T>
where
    T: Scalar,
    F: Fn(usize, usize) -> T,
{
    let n = points.len();
    let mut nearest = vec![T::zero(); n];
    let mut selected = vec![false; n];
    let mut history: Vec<Vec<AssignEvent<T>>> = Vec::with_capacity(n);
    let mut sequence = Vec::with_capacity(record);
    let mut gaps = Vec::with_capacity(record.saturating_sub(1));
    let mut order = Vec::with_capacity(total);

    let first = points[start_local];
    selected[start_local] = true;
    sequence.push(first);
    order.push(first);
    for (p, &id) in points.iter().enumerate() {
        let d = dist(id, first);
        nearest[p] = d;
        history.push(vec![AssignEvent {
            iteration: 1,
            center: 0,
            dist: d,
        }]);
    }

    for t in 1..total {
        // argmax over unselected points, lowest position on ties
        let mut best: Option<(usize, T)> = None;
        for p in 0..n {
            if selected[p] {
                continue;
            }
            if best.is_none_or(|(_, bd)| nearest[p] > bd) {
                best = Some((p, nearest[p]));
            }
        }
        let Some((next, gap)) = best else { break };
        selected[next] = true;
        let id = points[next];
        order.push(id);
        let recording = t < record;
        if recording {
            sequence.push(id);
            gaps.push(gap);
        }
        for (p, &pid) in points.iter().enumerate() {
            let d = dist(pid, id);
            if d < nearest[p] {
                nearest[p] = d;
                if recording {
                    history[p].push(AssignEvent {
                        iteration: (t + 1) as u32,
                        center: t as u32,
                        dist: d,
                    });
                }
            }
        }
    }

    GonzalezTrace {
        sequence,
        gaps,
        points: points.to_vec(),
        history,
        selection_order: order,
    }
}
