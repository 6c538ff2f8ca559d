//! One guess `Δ` of the ladder: pivots, their replacement sets and the
//! reserve pool.

use std::cell::Cell;
use std::rc::Rc;

use crate::bounds::FairnessBounds;
use crate::dataset::{Metric, MetricSpace};
use crate::error::{Error, Result};
use crate::fairshift::{fair_shift_with_candidates, ShiftCandidate, ShiftResult};
use crate::scalar::Scalar;

/// Live/peak count of distinct stored points, shared by every [`Stored`].
#[derive(Debug, Default)]
pub(crate) struct LiveCounter {
    current: Cell<usize>,
    peak: Cell<usize>,
}

impl LiveCounter {
    pub(crate) fn peak(&self) -> usize {
        self.peak.get()
    }
}

/// A stream point held in memory. Dropping the last handle releases it.
#[derive(Debug)]
pub(crate) struct Stored<T> {
    pub id: usize,
    pub group: usize,
    pub coords: Box<[T]>,
    live: Rc<LiveCounter>,
}

pub(crate) type Handle<T> = Rc<Stored<T>>;

impl<T> Stored<T> {
    pub(crate) fn new(id: usize, group: usize, coords: Box<[T]>, live: &Rc<LiveCounter>) -> Handle<T> {
        let now = live.current.get() + 1;
        live.current.set(now);
        live.peak.set(live.peak.get().max(now));
        Rc::new(Self {
            id,
            group,
            coords,
            live: Rc::clone(live),
        })
    }
}

impl<T> Drop for Stored<T> {
    fn drop(&mut self) {
        self.live.current.set(self.live.current.get() - 1);
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Pivot<T> {
    pub point: Handle<T>,
    /// At most one point per group.
    pub repl: Vec<Handle<T>>,
}

#[derive(Debug, Clone)]
pub(crate) struct Rung<T> {
    pub exponent: i32,
    pub delta: T,
    /// Creation order.
    pub pivots: Vec<Pivot<T>>,
    /// Per group, at most `u_i` points, deduplicated by id.
    pub reserve: Vec<Vec<Handle<T>>>,
    slots: usize,
}

/// Pivot coordinates viewed as a metric space over local positions.
pub(crate) struct PivotSpace<'a, T> {
    pub metric: Metric,
    pub pivots: &'a [Pivot<T>],
}

impl<T: Scalar> MetricSpace<T> for PivotSpace<'_, T> {
    fn len(&self) -> usize {
        self.pivots.len()
    }

    fn distance(&self, a: usize, b: usize) -> T {
        self.metric
            .distance(&self.pivots[a].point.coords, &self.pivots[b].point.coords)
    }
}

/// Outcome of merging one rung's pivots at the end of the stream.
#[derive(Debug, Clone)]
pub struct MergeOutcome<T> {
    /// Ids of the well-separated pivots `C`.
    pub selected: Vec<usize>,
    /// Minimum pairwise distance within `C` (infinite for one pivot).
    pub separation: T,
    pub shift: ShiftResult,
}

impl<T: Scalar> Rung<T> {
    pub(crate) fn new(exponent: i32, delta: T, m: usize) -> Self {
        Self {
            exponent,
            delta,
            pivots: Vec::new(),
            reserve: vec![Vec::new(); m],
            slots: 0,
        }
    }

    pub(crate) fn with_reserve(exponent: i32, delta: T, reserve: &[Vec<Handle<T>>]) -> Self {
        let slots = reserve.iter().map(Vec::len).sum();
        Self {
            exponent,
            delta,
            pivots: Vec::new(),
            reserve: reserve.to_vec(),
            slots,
        }
    }

    /// Pivots, replacement entries and reserve entries held by this rung.
    pub(crate) fn slots(&self) -> usize {
        self.slots
    }

    pub(crate) fn space(&self, metric: Metric) -> PivotSpace<'_, T> {
        PivotSpace {
            metric,
            pivots: &self.pivots,
        }
    }

    /// Attaches `p` to the first pivot within `2Δ` (merging `repl` into its
    /// replacement set, incumbents kept), or makes `p` a new pivot. `repl` is
    /// then merged into the reserve under the upper quotas.
    pub(crate) fn process(&mut self, metric: Metric, p: &Handle<T>, repl: &[Handle<T>], upper: &[usize]) {
        let reach = self.delta + self.delta;
        let hit = self
            .pivots
            .iter()
            .position(|c| metric.distance(&c.point.coords, &p.coords) <= reach);
        match hit {
            Some(i) => {
                let set = &mut self.pivots[i].repl;
                for q in repl {
                    if set.iter().all(|r| r.group != q.group) {
                        set.push(Rc::clone(q));
                        self.slots += 1;
                    }
                }
            }
            None => {
                let mut set: Vec<Handle<T>> = Vec::with_capacity(repl.len());
                for q in repl {
                    if set.iter().all(|r| r.group != q.group) {
                        set.push(Rc::clone(q));
                    }
                }
                self.slots += 1 + set.len();
                self.pivots.push(Pivot {
                    point: Rc::clone(p),
                    repl: set,
                });
            }
        }
        for q in repl {
            let pool = &mut self.reserve[q.group];
            if pool.len() < upper[q.group] && pool.iter().all(|r| r.id != q.id) {
                pool.push(Rc::clone(q));
                self.slots += 1;
            }
        }
    }

    /// Selects pivots more than `(6+2ε)Δ` apart, gathers replacement sets
    /// within `(3+ε)Δ` of each selected pivot (as if located at their
    /// source pivot) and runs the fair-shift test on them.
    pub(crate) fn merge(&self, metric: Metric, eps: T, bounds: &FairnessBounds) -> Result<MergeOutcome<T>> {
        let n = self.pivots.len();
        let m = bounds.m();
        let failed = |selected, separation| MergeOutcome {
            selected,
            separation,
            shift: ShiftResult {
                feasible: false,
                replacement: Vec::new(),
                slack: vec![0; m],
                max_flow: 0,
            },
        };
        if n == 0 {
            return Ok(failed(Vec::new(), T::infinity()));
        }
        let space = self.space(metric);
        let apart = (T::of(6.0) + eps + eps) * self.delta;
        let mut chosen = vec![0usize];
        let mut taken = vec![false; n];
        taken[0] = true;
        let mut nearest: Vec<T> = (0..n).map(|j| space.distance(0, j)).collect();
        while chosen.len() < n {
            let mut best: Option<usize> = None;
            for j in 0..n {
                if !taken[j] && best.is_none_or(|b| nearest[j] > nearest[b]) {
                    best = Some(j);
                }
            }
            let j = best.expect("an unselected pivot remains");
            if nearest[j] <= apart {
                break;
            }
            taken[j] = true;
            chosen.push(j);
            for (t, near) in nearest.iter_mut().enumerate() {
                *near = near.min(space.distance(j, t));
            }
        }
        let mut separation = T::infinity();
        for (a, &i) in chosen.iter().enumerate() {
            for &j in &chosen[a + 1..] {
                separation = separation.min(space.distance(i, j));
            }
        }
        let selected: Vec<usize> = chosen.iter().map(|&i| self.pivots[i].point.id).collect();
        if chosen.len() > bounds.k {
            return Ok(failed(selected, separation));
        }

        let near = (T::of(3.0) + eps) * self.delta;
        let mut best: Vec<Option<ShiftCandidate<T>>> = vec![None; chosen.len() * m];
        for (src, pivot) in self.pivots.iter().enumerate() {
            // Selected pivots are more than twice `near` apart, so at most one matches.
            let Some((pos, d)) = chosen
                .iter()
                .enumerate()
                .map(|(pos, &c)| (pos, space.distance(c, src)))
                .find(|&(_, d)| d <= near)
            else {
                continue;
            };
            for q in &pivot.repl {
                let slot = &mut best[pos * m + q.group];
                if slot.is_none_or(|s| d < s.dist) {
                    *slot = Some(ShiftCandidate {
                        center: selected[pos],
                        center_pos: pos,
                        group: q.group,
                        witness: q.id,
                        dist: d,
                    });
                }
            }
        }
        let candidates: Vec<ShiftCandidate<T>> = best.into_iter().flatten().collect();
        let shift = match fair_shift_with_candidates(&candidates, &selected, bounds) {
            Ok(s) => s,
            Err(Error::TooManyCenters { .. }) => return Ok(failed(selected, separation)),
            Err(e) => return Err(e),
        };
        Ok(MergeOutcome {
            selected,
            separation,
            shift,
        })
    }
}
