//! Offline fair k-center: farthest-first traversal, binary search for the
//! longest prefix that can be fair-shifted, binary search for the smallest
//! shift radius on that prefix, then completion to `k` fair centers.
//!
//! Also hosts the equality-quota special case and the Major/Minor
//! allocation heuristics used as baselines.

use std::collections::BTreeMap;

use crate::bounds::{FairnessBounds, ProblemInstance};
use crate::error::{Error, Result};
use crate::fairshift::{build_shift_graph, collect_candidates, fair_shift, ShiftResult};
use crate::gonzalez::{gonzalez, GonzalezTrace};
use crate::scalar::Scalar;
use crate::solution::CenterSet;

/// Memoized fair-shift probes over prefixes of one traversal.
#[derive(Debug)]
pub struct PrefixSearch<'a, 't, T> {
    pub instance: ProblemInstance<'a, T>,
    pub trace: &'t GonzalezTrace<T>,
    pub feasible: BTreeMap<usize, bool>,
    pub probes: usize,
}

impl<'a, 't, T: Scalar> PrefixSearch<'a, 't, T> {
    pub fn new(instance: ProblemInstance<'a, T>, trace: &'t GonzalezTrace<T>) -> Self {
        Self {
            instance,
            trace,
            feasible: BTreeMap::new(),
            probes: 0,
        }
    }

    /// Shift radius used for prefix `h`: `d_h / 2`, and unbounded for
    /// `h = 1` where `d_1` does not exist (a single ball overlaps nothing).
    pub fn radius(&self, h: usize) -> T {
        if h == 1 {
            T::infinity()
        } else {
            self.trace.gap(h) / T::of(2.0)
        }
    }

    /// Whether `a_1..a_h` can be fair-shifted at radius [`Self::radius`].
    pub fn probe(&mut self, h: usize) -> Result<bool> {
        if let Some(&f) = self.feasible.get(&h) {
            return Ok(f);
        }
        self.probes += 1;
        let centers = &self.trace.sequence()[..h];
        let assignment = self.trace.assignment_at_prefix(h);
        let r = fair_shift(
            self.instance.dataset,
            &assignment,
            centers,
            self.radius(h),
            self.instance.bounds,
        )?;
        self.feasible.insert(h, r.feasible);
        Ok(r.feasible)
    }
}

/// Largest `h` in `1..=len` such that prefix `h` is fair-shiftable, found
/// by binary search. The result always satisfies: `h` succeeds and `h + 1`
/// fails (or `h = len`). Returns 0 if even `h = 1` fails.
pub fn find_max_prefix<T: Scalar>(search: &mut PrefixSearch<'_, '_, T>) -> Result<usize> {
    if !search.probe(1)? {
        return Ok(0);
    }
    let (mut lo, mut hi) = (1, search.trace.len());
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if search.probe(mid)? {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

/// Feasibility of every prefix `1..=len`, probed one by one. Used to check
/// that binary search over prefixes is sound on a given instance.
pub fn prefix_feasibility_scan<T: Scalar>(
    instance: ProblemInstance<'_, T>,
    trace: &GonzalezTrace<T>,
) -> Result<Vec<bool>> {
    let mut s = PrefixSearch::new(instance, trace);
    (1..=trace.len()).map(|h| s.probe(h)).collect()
}

/// The minimum-radius shift of a prefix.
#[derive(Debug, Clone)]
pub struct ShiftChoice<T> {
    /// Largest distance between a center and its replacement.
    pub threshold: T,
    pub shift: ShiftResult,
    pub probes: usize,
}

/// Among the shifts of `a_1..a_h` found at radius `radius` (strict), finds one
/// minimizing the largest center-to-replacement distance.
///
/// Only the per-(center, group) closest witnesses can set that maximum, so
/// the search runs over their sorted distinct distances (plus 0), reusing one
/// network and re-filtering candidate edges at each step.
pub fn minimize_shift_distance<T: Scalar>(
    instance: ProblemInstance<'_, T>,
    trace: &GonzalezTrace<T>,
    h: usize,
    radius: T,
) -> Result<ShiftChoice<T>> {
    let bounds = instance.bounds;
    if h == 0 {
        let shift = crate::fairshift::fair_shift_with_candidates::<T>(&[], &[], bounds)?;
        return Ok(ShiftChoice {
            threshold: T::zero(),
            shift,
            probes: 1,
        });
    }
    let centers = &trace.sequence()[..h];
    let assignment = trace.assignment_at_prefix(h);
    let candidates = collect_candidates(instance.dataset, &assignment, centers, radius);
    let mut levels: Vec<T> = candidates.iter().map(|c| c.dist).collect();
    levels.push(T::zero());
    levels.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    levels.dedup();

    let mut graph = build_shift_graph(&candidates, centers, bounds)?;
    let mut probes = 0;
    let mut try_level = |graph: &mut crate::fairshift::ShiftGraph<T>, t: T| {
        probes += 1;
        graph.restrict_to(t);
        graph.solve()
    };
    // The top level admits every candidate; it must succeed.
    let top = *levels.last().expect("nonempty");
    let mut best = try_level(&mut graph, top);
    if !best.feasible {
        return Err(Error::Infeasible(format!(
            "prefix {h} is not fair-shiftable at the given radius"
        )));
    }
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let r = try_level(&mut graph, levels[mid]);
        if r.feasible {
            hi = mid;
            best = r;
        } else {
            lo = mid + 1;
        }
    }
    // `best` always holds the result at `levels[hi]`.
    let threshold = levels[hi];
    let shift = best;
    Ok(ShiftChoice {
        threshold,
        shift,
        probes,
    })
}

/// Extends `chosen` to `k` centers: first cures every lower-quota deficit
/// with unused points of that group, then pads with unused points under the
/// upper quotas, always in ascending id order.
///
/// Fails only if `chosen` already breaks an upper quota, exceeds `k`, or has
/// deficits larger than the free budget; any fair-shift result satisfies
/// none of these.
pub fn complete_centers<T: Scalar>(chosen: &[usize], instance: ProblemInstance<'_, T>) -> Result<CenterSet> {
    let ds = instance.dataset;
    let b = instance.bounds;
    let n = ds.n();
    let mut used = vec![false; n];
    let mut counts = vec![0usize; ds.m()];
    let mut out = Vec::with_capacity(b.k);
    for &id in chosen {
        if id >= n {
            return Err(Error::InvalidPoint { id, n });
        }
        if used[id] {
            return Err(Error::DuplicateCenter(id));
        }
        used[id] = true;
        counts[ds.group(id)] += 1;
        out.push(id);
    }
    if out.len() > b.k {
        return Err(Error::TooManyCenters {
            centers: out.len(),
            k: b.k,
        });
    }
    if let Some(g) = (0..ds.m()).find(|&g| counts[g] > b.u[g]) {
        return Err(Error::Infeasible(format!("shifted centers exceed u_{g}")));
    }
    for (id, taken) in used.iter_mut().enumerate() {
        let g = ds.group(id);
        if !*taken && counts[g] < b.l[g] {
            *taken = true;
            counts[g] += 1;
            out.push(id);
        }
    }
    if out.len() > b.k {
        return Err(Error::Infeasible("lower-quota deficits exceed the free budget".into()));
    }
    for (id, taken) in used.iter_mut().enumerate() {
        if out.len() == b.k {
            break;
        }
        let g = ds.group(id);
        if !*taken && counts[g] < b.u[g] {
            *taken = true;
            counts[g] += 1;
            out.push(id);
        }
    }
    if out.len() < b.k || (0..ds.m()).any(|g| counts[g] < b.l[g]) {
        return Err(Error::Infeasible("cannot complete to a fair center set".into()));
    }
    CenterSet::from_ids(ds, out)
}

/// Everything the offline solver decided along the way.
#[derive(Debug, Clone)]
pub struct OfflineOutcome<T> {
    pub centers: CenterSet,
    /// Longest fair-shiftable prefix.
    pub h: usize,
    /// Largest center-to-replacement distance on that prefix.
    pub threshold: T,
    pub shift: ShiftResult,
    /// Max-flow runs across both binary searches.
    pub probes: usize,
    pub trace: GonzalezTrace<T>,
}

/// Fair k-center 3-approximation in `O(nk)` time. Deterministic given
/// `start`, the first traversal center.
pub fn solve_offline<T: Scalar>(instance: ProblemInstance<'_, T>, start: usize) -> Result<CenterSet> {
    Ok(solve_offline_detailed(instance, start)?.centers)
}

pub fn solve_offline_detailed<T: Scalar>(instance: ProblemInstance<'_, T>, start: usize) -> Result<OfflineOutcome<T>> {
    crate::bounds::validate_instance(&instance)?;
    let trace = gonzalez(instance.dataset, instance.k(), start)?;
    let mut search = PrefixSearch::new(instance, &trace);
    let h = find_max_prefix(&mut search)?;
    let radius = if h == 0 { T::zero() } else { search.radius(h) };
    let prefix_probes = search.probes;
    let choice = minimize_shift_distance(instance, &trace, h, radius)?;
    let chosen: Vec<usize> = choice.shift.witnesses().collect();
    let centers = complete_centers(&chosen, instance)?;
    Ok(OfflineOutcome {
        centers,
        h,
        threshold: choice.threshold,
        shift: choice.shift,
        probes: prefix_probes + choice.probes,
        trace,
    })
}

/// Group traversal order for the allocation heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicMode {
    /// Largest groups first.
    Major,
    /// Smallest groups first.
    Minor,
}

/// Exact per-group center counts inside the range quotas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeuristicAllocation {
    pub counts: Vec<usize>,
    pub order: Vec<usize>,
}

/// Starts from `m_i = l_i` and visits groups by size (decreasing for Major,
/// increasing for Minor, ties by group id), raising each to `u_i` while the
/// remaining budget allows and otherwise giving it whatever budget is left.
pub fn heuristic_allocation(
    group_sizes: &[usize],
    bounds: &FairnessBounds,
    mode: HeuristicMode,
) -> HeuristicAllocation {
    let mut order: Vec<usize> = (0..bounds.m()).collect();
    match mode {
        HeuristicMode::Major => order.sort_by(|&a, &b| group_sizes[b].cmp(&group_sizes[a]).then(a.cmp(&b))),
        HeuristicMode::Minor => order.sort_by(|&a, &b| group_sizes[a].cmp(&group_sizes[b]).then(a.cmp(&b))),
    }
    let mut counts = bounds.l.clone();
    for &i in &order {
        let remaining = bounds.k - counts.iter().sum::<usize>();
        if bounds.u[i] - counts[i] <= remaining {
            counts[i] = bounds.u[i];
        } else {
            counts[i] += remaining;
        }
    }
    HeuristicAllocation { counts, order }
}

/// Largest-remainder apportionment of `k` proportional to group sizes: the
/// exact-proportion quotas used as the equality baseline.
pub fn proportional_allocation(group_sizes: &[usize], k: usize) -> Vec<usize> {
    let n: usize = group_sizes.iter().sum();
    let mut counts: Vec<usize> = group_sizes.iter().map(|&s| s * k / n).collect();
    let mut rem: Vec<(usize, usize)> = group_sizes.iter().enumerate().map(|(i, &s)| ((s * k) % n, i)).collect();
    rem.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let missing = k - counts.iter().sum::<usize>();
    for &(_, i) in rem.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

/// Equality-quota fair k-center: [`solve_offline`] with `l = u = counts`.
pub fn solve_equality<T: Scalar>(
    dataset: &crate::dataset::Dataset<T>,
    counts: &[usize],
    start: usize,
) -> Result<CenterSet> {
    let bounds = FairnessBounds::exact(counts.to_vec());
    let instance = ProblemInstance::new(dataset, &bounds)?;
    solve_offline(instance, start)
}
