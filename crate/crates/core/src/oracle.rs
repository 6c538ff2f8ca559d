//! Exhaustive reference solvers for verification at small scale.
//!
//! Every routine here is guarded: if the instance is too large to enumerate
//! it returns [`Error::OracleScale`] instead of truncating the search.

use std::collections::VecDeque;

use crate::bounds::{FairnessBounds, ProblemInstance};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::scalar::Scalar;
use crate::solution::CenterSet;

/// Largest number of subsets / assignments any oracle will enumerate.
pub const ORACLE_LIMIT: u64 = 10_000_000;

/// Optimal fair center set found by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution<T> {
    pub best_set: CenterSet,
    /// The optimal objective.
    pub opt: T,
    /// Number of fair subsets examined.
    pub explored: u64,
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k.min(n));
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u64) / (i as u64 + 1);
        if acc > ORACLE_LIMIT * 1000 {
            return u64::MAX;
        }
    }
    acc
}

/// Enumerates all k-subsets in lexicographic order and returns the fair one
/// with the smallest objective (first in lexicographic order on ties).
pub fn brute_force_optimal<T: Scalar>(instance: ProblemInstance<'_, T>) -> Result<ExactSolution<T>> {
    let ds = instance.dataset;
    let b = instance.bounds;
    let (n, k) = (ds.n(), b.k);
    if k == 0 {
        return Err(Error::ZeroK);
    }
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    if b.l.len() != ds.m() || b.u.len() != ds.m() {
        return Err(Error::Infeasible("bounds do not match group count".into()));
    }
    if binomial(n, k) > ORACLE_LIMIT {
        return Err(Error::OracleScale);
    }
    let dist: Vec<T> = (0..n)
        .flat_map(|a| (0..n).map(move |c| (a, c)))
        .map(|(a, c)| ds.distance(a, c))
        .collect();

    let mut idx: Vec<usize> = (0..k).collect();
    let mut counts = vec![0usize; ds.m()];
    let mut best: Option<(T, Vec<usize>)> = None;
    let mut explored = 0u64;
    loop {
        counts.iter_mut().for_each(|c| *c = 0);
        for &i in &idx {
            counts[ds.group(i)] += 1;
        }
        let fair = counts
            .iter()
            .zip(b.l.iter().zip(&b.u))
            .all(|(&c, (&l, &u))| l <= c && c <= u);
        if fair {
            explored += 1;
            let bound = best.as_ref().map(|(v, _)| *v);
            let mut worst = T::zero();
            let mut pruned = false;
            for s in 0..n {
                let row = &dist[s * n..(s + 1) * n];
                let near = idx.iter().map(|&c| row[c]).fold(T::infinity(), T::min);
                if near > worst {
                    worst = near;
                    if bound.is_some_and(|bv| worst >= bv) {
                        pruned = true;
                        break;
                    }
                }
            }
            if !pruned {
                best = Some((worst, idx.clone()));
            }
        }
        // next combination
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            break;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    let (opt, ids) = best.ok_or_else(|| Error::Infeasible("no fair subset exists".into()))?;
    Ok(ExactSolution {
        best_set: CenterSet::from_ids(ds, ids)?,
        opt,
        explored,
    })
}

/// Optimal unconstrained k-center by enumeration.
pub fn brute_force_unconstrained<T: Scalar>(dataset: &Dataset<T>, k: usize) -> Result<ExactSolution<T>> {
    let b = FairnessBounds::unconstrained(dataset.group_sizes(), k);
    brute_force_optimal(ProblemInstance::new_unchecked(dataset, &b))
}

/// Decides the range-based fair-shift problem by trying every map from
/// `centers` to points within distance `< d_prime`, checking injectivity,
/// the upper quotas, and that lower-quota deficits fit in `k - |A|`.
pub fn brute_force_fair_shift<T: Scalar>(
    dataset: &Dataset<T>,
    centers: &[usize],
    d_prime: T,
    bounds: &FairnessBounds,
) -> Result<bool> {
    if centers.len() > 8 {
        return Err(Error::OracleScale);
    }
    if centers.len() > bounds.k {
        return Ok(false);
    }
    let options: Vec<Vec<usize>> = centers
        .iter()
        .map(|&a| (0..dataset.n()).filter(|&s| dataset.distance(a, s) < d_prime).collect())
        .collect();
    if options.iter().any(Vec::is_empty) {
        return Ok(false);
    }
    let total = options
        .iter()
        .try_fold(1u64, |acc, o| acc.checked_mul(o.len() as u64))
        .unwrap_or(u64::MAX);
    if total > ORACLE_LIMIT {
        return Err(Error::OracleScale);
    }
    let budget = bounds.k - centers.len();
    let mut pick = vec![0usize; centers.len()];
    let mut counts = vec![0usize; bounds.m()];
    loop {
        let chosen: Vec<usize> = pick.iter().zip(&options).map(|(&p, o)| o[p]).collect();
        let mut distinct = chosen.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() == chosen.len() {
            counts.iter_mut().for_each(|c| *c = 0);
            for &s in &chosen {
                counts[dataset.group(s)] += 1;
            }
            let within_upper = counts.iter().zip(&bounds.u).all(|(&c, &u)| c <= u);
            let deficit: usize = counts.iter().zip(&bounds.l).map(|(&c, &l)| l.saturating_sub(c)).sum();
            if within_upper && deficit <= budget {
                return Ok(true);
            }
        }
        // odometer
        let mut i = 0;
        loop {
            if i == pick.len() {
                return Ok(false);
            }
            pick[i] += 1;
            if pick[i] < options[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// Maximum flow by shortest augmenting paths over a dense residual matrix.
/// Independent of [`crate::flow::dinic_max_flow`]; reads only capacities.
pub fn reference_max_flow(network: &FlowNetwork) -> Result<i64> {
    let v = network.vertex_count();
    if network.edges().len() > 10_000 || v > 2_000 {
        return Err(Error::OracleScale);
    }
    let mut res = vec![0i64; v * v];
    for e in network.edges() {
        res[e.from * v + e.to] += e.cap;
    }
    let (s, t) = (network.source(), network.sink());
    let mut total = 0i64;
    loop {
        let mut parent = vec![usize::MAX; v];
        parent[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            if x == t {
                break;
            }
            for y in 0..v {
                if parent[y] == usize::MAX && res[x * v + y] > 0 {
                    parent[y] = x;
                    queue.push_back(y);
                }
            }
        }
        if parent[t] == usize::MAX {
            return Ok(total);
        }
        let mut bottleneck = i64::MAX;
        let mut y = t;
        while y != s {
            let x = parent[y];
            bottleneck = bottleneck.min(res[x * v + y]);
            y = x;
        }
        let mut y = t;
        while y != s {
            let x = parent[y];
            res[x * v + y] -= bottleneck;
            res[y * v + x] += bottleneck;
            y = x;
        }
        total += bottleneck;
    }
}

/// Best flow value in the lower-bounded shift network (before the
/// lower-bound reduction), by enumerating every integral flow:
/// each center routes its unit to one adjacent group or nowhere, and the
/// free-center node sends `x_f <= u_f` to group `f` with `Σx <= k - |A|`;
/// group totals must lie in `[l_f, u_f]`.
///
/// `edges` lists (center position, group) adjacencies. Returns `None` when no
/// flow meets the lower bounds.
pub fn brute_force_lower_bounded_flow(
    centers: usize,
    edges: &[(usize, usize)],
    bounds: &FairnessBounds,
) -> Result<Option<usize>> {
    let m = bounds.m();
    if centers > bounds.k {
        return Ok(None);
    }
    let free = bounds.k - centers;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); centers];
    for &(a, f) in edges {
        if !adj[a].contains(&f) {
            adj[a].push(f);
        }
    }
    let center_choices: u64 = adj
        .iter()
        .try_fold(1u64, |acc, a| acc.checked_mul(a.len() as u64 + 1))
        .unwrap_or(u64::MAX);
    let free_choices: u64 = bounds
        .u
        .iter()
        .try_fold(1u64, |acc, &u| acc.checked_mul(u.min(free) as u64 + 1))
        .unwrap_or(u64::MAX);
    if center_choices.saturating_mul(free_choices) > ORACLE_LIMIT {
        return Err(Error::OracleScale);
    }

    let mut best: Option<usize> = None;
    let mut pick = vec![0usize; centers]; // 0 = unrouted, j = adj[a][j-1]
    loop {
        let mut totals = vec![0usize; m];
        for (a, &p) in pick.iter().enumerate() {
            if p > 0 {
                totals[adj[a][p - 1]] += 1;
            }
        }
        let mut x = vec![0usize; m];
        loop {
            let sent: usize = x.iter().sum();
            if sent <= free {
                let ok = (0..m).all(|f| {
                    let tf = totals[f] + x[f];
                    bounds.l[f] <= tf && tf <= bounds.u[f]
                });
                if ok {
                    let value = totals.iter().sum::<usize>() + sent;
                    best = Some(best.map_or(value, |b| b.max(value)));
                }
            }
            let mut i = 0;
            loop {
                if i == m {
                    break;
                }
                x[i] += 1;
                if x[i] <= bounds.u[i].min(free) {
                    break;
                }
                x[i] = 0;
                i += 1;
            }
            if i == m {
                break;
            }
        }
        let mut i = 0;
        loop {
            if i == centers {
                return Ok(best);
            }
            pick[i] += 1;
            if pick[i] <= adj[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}
