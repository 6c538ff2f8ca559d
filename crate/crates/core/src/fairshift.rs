//! Range-based fair shift: can every center in `A` be moved to a point
//! closer than `d'` so that the moved set respects the upper quotas and the
//! remaining `k - |A|` free centers can still cover every lower-quota deficit?
//!
//! Answered with one max-flow over the network
//!
//! ```text
//!   s --(k-|A|)--> v_C --(u_f)--> V_f[f]
//!   s --(1)------> V_A[a] --(1, witness)--> V_f[f]
//!   V_f[f] --(l_f)--> t      V_f[f] --(u_f - l_f)--> t'
//!   s --(Σl)--> t'           t' --(k)--> t
//! ```
//!
//! which encodes the lower bounds `l_f` on `V_f[f] -> t` without lower-bounded
//! edges. A shift exists iff the maximum flow saturates the source, i.e.
//! equals `k + Σl`. Zero-capacity edges are not materialized.

use crate::bounds::FairnessBounds;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::flow::{dinic_max_flow, FlowNetwork};
use crate::scalar::Scalar;

/// The closest point of one group assigned to one center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftCandidate<T> {
    /// Center id.
    pub center: usize,
    /// Position of the center in `A`.
    pub center_pos: usize,
    pub group: usize,
    pub witness: usize,
    pub dist: T,
}

/// One moved center.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Replacement {
    pub center: usize,
    pub witness: usize,
    pub group: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ShiftResult {
    pub feasible: bool,
    /// One entry per center of `A`, in `A` order, when feasible.
    pub replacement: Vec<Replacement>,
    /// Per-group number of free centers the flow routed through `v_C`.
    pub slack: Vec<usize>,
    pub max_flow: i64,
}

impl ShiftResult {
    pub fn is_success(&self) -> bool {
        self.feasible
    }

    pub fn witnesses(&self) -> impl Iterator<Item = usize> + '_ {
        self.replacement.iter().map(|r| r.witness)
    }

    /// `|B ∩ S_i|` per group.
    pub fn per_group(&self, m: usize) -> Vec<usize> {
        let mut counts = vec![0; m];
        for r in &self.replacement {
            counts[r.group] += 1;
        }
        counts
    }
}

/// Scans the points once and keeps, per (center, group), the closest point
/// assigned to that center at distance strictly below `d_prime`.
///
/// `assignment[s]` is the position in `centers` of the center point `s` is
/// assigned to, and its distance. Output is ordered by (center position,
/// group); distance ties go to the smaller witness id.
pub fn collect_candidates<T: Scalar>(
    dataset: &Dataset<T>,
    assignment: &[(usize, T)],
    centers: &[usize],
    d_prime: T,
) -> Vec<ShiftCandidate<T>> {
    debug_assert_eq!(assignment.len(), dataset.n());
    let m = dataset.m();
    let mut best: Vec<Option<(usize, T)>> = vec![None; centers.len() * m];
    for (s, &(pos, dist)) in assignment.iter().enumerate() {
        if dist >= d_prime || dist.is_nan() {
            continue;
        }
        let slot = &mut best[pos * m + dataset.group(s)];
        if slot.is_none_or(|(_, bd)| dist < bd) {
            *slot = Some((s, dist));
        }
    }
    best.into_iter()
        .enumerate()
        .filter_map(|(i, b)| {
            b.map(|(witness, dist)| ShiftCandidate {
                center: centers[i / m],
                center_pos: i / m,
                group: i % m,
                witness,
                dist,
            })
        })
        .collect()
}

/// Vertex layout of the shift network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftLayout {
    pub centers: usize,
    pub groups: usize,
}

impl ShiftLayout {
    pub const SOURCE: usize = 0;
    pub const FREE: usize = 1;
    pub const RELAY: usize = 2;
    pub const SINK: usize = 3;

    pub fn center(&self, pos: usize) -> usize {
        4 + pos
    }

    pub fn group(&self, g: usize) -> usize {
        4 + self.centers + g
    }

    pub fn vertex_count(&self) -> usize {
        4 + self.centers + self.groups
    }
}

/// The shift network together with the bookkeeping needed to read a
/// replacement back out of a flow.
#[derive(Debug, Clone)]
pub struct ShiftGraph<T> {
    pub network: FlowNetwork,
    pub layout: ShiftLayout,
    centers: Vec<usize>,
    candidates: Vec<ShiftCandidate<T>>,
    candidate_edges: Vec<usize>,
    slack_edges: Vec<Option<usize>>,
    target: i64,
}

/// Builds the shift network for centers `A` (`centers`) with the given
/// candidate edges. Requires `|A| <= k`.
pub fn build_shift_graph<T: Scalar>(
    candidates: &[ShiftCandidate<T>],
    centers: &[usize],
    bounds: &FairnessBounds,
) -> Result<ShiftGraph<T>> {
    let k = bounds.k;
    if centers.len() > k {
        return Err(Error::TooManyCenters {
            centers: centers.len(),
            k,
        });
    }
    let m = bounds.m();
    let layout = ShiftLayout {
        centers: centers.len(),
        groups: m,
    };
    let (s, vc, tp, t) = (
        ShiftLayout::SOURCE,
        ShiftLayout::FREE,
        ShiftLayout::RELAY,
        ShiftLayout::SINK,
    );
    let mut net = FlowNetwork::new(layout.vertex_count(), s, t);
    let add = |net: &mut FlowNetwork, from, to, cap: usize, label| {
        (cap > 0).then(|| net.add_edge(from, to, cap as i64, label))
    };
    add(&mut net, s, vc, k - centers.len(), None);
    add(&mut net, s, tp, bounds.sum_l(), None);
    add(&mut net, tp, t, k, None);
    let mut slack_edges = Vec::with_capacity(m);
    for f in 0..m {
        add(&mut net, layout.group(f), t, bounds.l[f], None);
        add(&mut net, layout.group(f), tp, bounds.u[f] - bounds.l[f], None);
        slack_edges.push(add(&mut net, vc, layout.group(f), bounds.u[f], None));
    }
    for pos in 0..centers.len() {
        add(&mut net, s, layout.center(pos), 1, None);
    }
    let mut candidate_edges = Vec::with_capacity(candidates.len());
    for c in candidates {
        debug_assert!(c.center_pos < centers.len() && c.group < m);
        candidate_edges.push(net.add_edge(layout.center(c.center_pos), layout.group(c.group), 1, Some(c.witness)));
    }
    Ok(ShiftGraph {
        network: net,
        layout,
        centers: centers.to_vec(),
        candidates: candidates.to_vec(),
        candidate_edges,
        slack_edges,
        target: (k + bounds.sum_l()) as i64,
    })
}

impl<T: Scalar> ShiftGraph<T> {
    /// Flow value a successful shift must reach: `k + Σl`.
    pub fn target(&self) -> i64 {
        self.target
    }

    pub fn candidates(&self) -> &[ShiftCandidate<T>] {
        &self.candidates
    }

    /// Keeps only candidate edges with distance `<= threshold` (others get
    /// capacity 0) and clears all flow.
    pub fn restrict_to(&mut self, threshold: T) {
        self.network.reset_flows();
        for (c, &e) in self.candidates.iter().zip(&self.candidate_edges) {
            self.network.set_capacity(e, i64::from(c.dist <= threshold));
        }
    }

    /// Runs max-flow and reads off the replacement if the flow saturates.
    pub fn solve(&mut self) -> ShiftResult {
        let max_flow = dinic_max_flow(&mut self.network);
        let m = self.layout.groups;
        if max_flow != self.target {
            return ShiftResult {
                feasible: false,
                replacement: Vec::new(),
                slack: vec![0; m],
                max_flow,
            };
        }
        let mut chosen: Vec<Option<Replacement>> = vec![None; self.centers.len()];
        for (c, &e) in self.candidates.iter().zip(&self.candidate_edges) {
            if self.network.edge(e).flow > 0 {
                debug_assert!(chosen[c.center_pos].is_none());
                chosen[c.center_pos] = Some(Replacement {
                    center: c.center,
                    witness: c.witness,
                    group: c.group,
                });
            }
        }
        let replacement: Vec<Replacement> = chosen
            .into_iter()
            .map(|r| r.expect("saturated source edge implies a matched center"))
            .collect();
        let slack = self
            .slack_edges
            .iter()
            .map(|e| e.map_or(0, |e| self.network.edge(e).flow as usize))
            .collect();
        ShiftResult {
            feasible: true,
            replacement,
            slack,
            max_flow,
        }
    }
}

/// Fair-shift test on an explicit candidate list (one edge per
/// (center, group) at most).
pub fn fair_shift_with_candidates<T: Scalar>(
    candidates: &[ShiftCandidate<T>],
    centers: &[usize],
    bounds: &FairnessBounds,
) -> Result<ShiftResult> {
    Ok(build_shift_graph(candidates, centers, bounds)?.solve())
}

/// Fair-shift test for centers `A` at radius `d_prime` (strict).
///
/// `assignment` gives, for every point of `dataset`, the position in
/// `centers` of its nearest center and the distance. Open balls of radius
/// `d_prime` around `A` must be pairwise disjoint, i.e. every pair of centers
/// at distance `>= 2 d_prime`; otherwise this fails with
/// [`Error::RadiusTooLarge`].
pub fn fair_shift<T: Scalar>(
    dataset: &Dataset<T>,
    assignment: &[(usize, T)],
    centers: &[usize],
    d_prime: T,
    bounds: &FairnessBounds,
) -> Result<ShiftResult> {
    if centers.len() > bounds.k {
        return Err(Error::TooManyCenters {
            centers: centers.len(),
            k: bounds.k,
        });
    }
    let two = d_prime + d_prime;
    for (i, &a) in centers.iter().enumerate() {
        for &b in &centers[i + 1..] {
            if dataset.distance(a, b) < two {
                return Err(Error::RadiusTooLarge);
            }
        }
    }
    let candidates = collect_candidates(dataset, assignment, centers, d_prime);
    fair_shift_with_candidates(&candidates, centers, bounds)
}

/// Assignment of every point to its nearest center in `centers` (lowest
/// position on ties), by direct scan.
pub fn nearest_assignment<T: Scalar>(dataset: &Dataset<T>, centers: &[usize]) -> Vec<(usize, T)> {
    (0..dataset.n())
        .map(|s| {
            centers
                .iter()
                .enumerate()
                .map(|(j, &c)| (j, dataset.distance(s, c)))
                .fold((0, T::infinity()), |acc, x| if x.1 < acc.1 { x } else { acc })
        })
        .collect()
}
