//! One-pass fair k-center over a point stream.
//!
//! A ladder of `β+1` guesses `Δ = (1+ε)^e` for consecutive exponents `e`
//! runs side by side. Each guess keeps pivots more than `2Δ` apart, one
//! replacement candidate per group and pivot, and a reserve of up to `u_i`
//! points per group. Every `k` points the ladder checks whether some guess
//! holds more than `k` pivots; if so the lower bound `τ` on the optimum
//! rises and the guesses below it are replaced by larger ones seeded from
//! the old smallest guess. At the end of the stream the smallest guess
//! whose pivots can be fair-shifted wins; if none can, the offline solver
//! runs on what the smallest guess stored.
//!
//! Memory stays at `O((km + Σu) log(1/ε)/ε)` points regardless of stream
//! length.
//!
//! ```
//! use fairkc::streaming::{stream_solve, StreamConfig, StreamPoint};
//! use fairkc::FairnessBounds;
//!
//! let pts = (0..40).map(|i| StreamPoint::new(vec![(i % 4) as f64 * 10.0 + i as f64 * 0.01], i % 2));
//! let bounds = FairnessBounds::new(vec![1, 1], vec![3, 3], 4);
//! let out = stream_solve(pts, &bounds, StreamConfig::default()).unwrap();
//! assert_eq!(out.centers.len(), 4);
//! ```

mod replay;
mod rung;

use std::rc::Rc;

use crate::bounds::{FairnessBounds, ProblemInstance};
use crate::dataset::{Dataset, Metric, PointRecord};
use crate::error::{Error, Result};
use crate::gonzalez::gonzalez_on_subset;
use crate::offline::solve_offline;
use crate::scalar::Scalar;
use crate::solution::CenterSet;

pub use replay::{write_replay, ReplayHeader, ReplayReader};
pub use rung::MergeOutcome;

use rung::{Handle, LiveCounter, Rung, Stored};

/// One stream element. Its id is its arrival index.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamPoint<T> {
    pub coords: Vec<T>,
    pub group: usize,
}

impl<T> StreamPoint<T> {
    pub fn new(coords: Vec<T>, group: usize) -> Self {
        Self { coords, group }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamConfig {
    /// Ladder resolution, in `(0, 1]`.
    pub eps: f64,
    /// Coalesce exact duplicates (same coordinates and group) among the
    /// buffered prefix, and measure `τ` over distinct coordinates only.
    pub dedup: bool,
    pub metric: Metric,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            eps: 0.1,
            dedup: false,
            metric: Metric::Euclidean,
        }
    }
}

impl StreamConfig {
    pub fn with_eps(eps: f64) -> Self {
        Self { eps, ..Self::default() }
    }
}

/// One ladder update.
#[derive(Debug, Clone, PartialEq)]
pub struct MaintainEvent<T> {
    /// Points seen when it ran.
    pub at: usize,
    pub tau_before: T,
    pub tau_after: T,
    /// Guesses created from the old smallest guess.
    pub spawned: usize,
    /// Largest pivot count over all guesses right after the update.
    pub max_pivots_after: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StreamStats<T> {
    pub points_seen: usize,
    /// Prefix points dropped as exact duplicates.
    pub coalesced: usize,
    /// The ladder holds `beta + 1` guesses.
    pub beta: usize,
    /// Most distinct points held at once.
    pub peak_stored: usize,
    /// Most point references held at once, summed over guesses (a point kept
    /// by several guesses counts once per guess and role).
    pub peak_slots: usize,
    /// `τ` after initialization and after every update.
    pub tau_history: Vec<T>,
    pub maintains: Vec<MaintainEvent<T>>,
    /// Guess that produced the answer, if any did.
    pub winning_delta: Option<T>,
    pub fallback_used: bool,
}

/// Upper bound on [`StreamStats::peak_slots`]: `4 (km + Σu)(β+1)`.
pub fn memory_envelope(bounds: &FairnessBounds, beta: usize) -> usize {
    4 * (bounds.k * bounds.m() + bounds.sum_u()) * (beta + 1)
}

/// Read-only view of one guess.
#[derive(Debug, Clone, PartialEq)]
pub struct RungSummary<T> {
    pub exponent: i32,
    pub delta: T,
    pub pivots: Vec<usize>,
    /// Replacement set ids, aligned with `pivots`.
    pub replacements: Vec<Vec<usize>>,
    /// Reserve ids per group.
    pub reserve: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct StreamOutcome<T> {
    pub centers: CenterSet,
    /// The chosen centers with coordinates, by ascending id.
    pub points: Vec<PointRecord<T>>,
    pub stats: StreamStats<T>,
}

/// Number of ladder steps so that `(1+ε)^β >= (2+ε)/ε`.
pub fn ladder_beta(eps: f64) -> usize {
    let target = (2.0 + eps) / eps;
    let base = 1.0 + eps;
    let mut b = (target.ln() / base.ln()).ceil().max(0.0) as i32;
    while base.powi(b) < target {
        b += 1;
    }
    while b > 0 && base.powi(b - 1) >= target {
        b -= 1;
    }
    b as usize
}

/// Incremental one-pass solver; feed points with [`Self::push`], then call
/// [`Self::finish`].
#[derive(Debug)]
pub struct StreamingSolver<T> {
    bounds: FairnessBounds,
    config: StreamConfig,
    eps: T,
    base: T,
    dim: Option<usize>,
    group_counts: Vec<usize>,
    live: Rc<LiveCounter>,
    buffer: Vec<Handle<T>>,
    distinct_in_buffer: usize,
    rungs: Vec<Rung<T>>,
    tau: T,
    stats: StreamStats<T>,
}

impl<T: Scalar> StreamingSolver<T> {
    pub fn new(bounds: FairnessBounds, config: StreamConfig) -> Result<Self> {
        if !(config.eps > 0.0 && config.eps <= 1.0) {
            return Err(Error::Epsilon(config.eps));
        }
        if bounds.k == 0 {
            return Err(Error::ZeroK);
        }
        bounds.check_shape()?;
        let m = bounds.m();
        let beta = ladder_beta(config.eps);
        Ok(Self {
            eps: T::of(config.eps),
            base: T::of(1.0 + config.eps),
            dim: None,
            group_counts: vec![0; m],
            live: Rc::default(),
            buffer: Vec::with_capacity(bounds.k + 1),
            distinct_in_buffer: 0,
            rungs: Vec::new(),
            tau: T::zero(),
            stats: StreamStats {
                beta,
                ..StreamStats::default()
            },
            bounds,
            config,
        })
    }

    pub fn bounds(&self) -> &FairnessBounds {
        &self.bounds
    }

    pub fn stats(&self) -> &StreamStats<T> {
        &self.stats
    }

    /// Current lower bound on the optimum (zero before initialization).
    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn is_initialized(&self) -> bool {
        !self.rungs.is_empty()
    }

    pub fn rungs(&self) -> Vec<RungSummary<T>> {
        let ids = |v: &[Handle<T>]| v.iter().map(|p| p.id).collect::<Vec<_>>();
        self.rungs
            .iter()
            .map(|r| RungSummary {
                exponent: r.exponent,
                delta: r.delta,
                pivots: r.pivots.iter().map(|c| c.point.id).collect(),
                replacements: r.pivots.iter().map(|c| ids(&c.repl)).collect(),
                reserve: r.reserve.iter().map(|g| ids(g)).collect(),
            })
            .collect()
    }

    fn delta(&self, e: i32) -> T {
        self.base.powi(e)
    }

    /// Least exponent `e` with `(1+ε)^e >= tau`.
    fn exponent_for(&self, tau: T) -> i32 {
        let mut e = (tau.ln() / self.base.ln()).ceil().to_i32().unwrap_or(0);
        while self.delta(e) < tau {
            e += 1;
        }
        while self.delta(e - 1) >= tau {
            e -= 1;
        }
        e
    }

    pub fn push(&mut self, point: StreamPoint<T>) -> Result<()> {
        let id = self.stats.points_seen;
        let StreamPoint { coords, group } = point;
        let m = self.bounds.m();
        if group >= m {
            return Err(Error::InvalidGroup { group, m });
        }
        match self.dim {
            None if coords.is_empty() => return Err(Error::Dimension { expected: 1, found: 0 }),
            None => self.dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(Error::Dimension {
                    expected: d,
                    found: coords.len(),
                })
            }
            Some(_) => {}
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(id));
        }
        self.stats.points_seen += 1;

        if !self.is_initialized() {
            let same_coords = |p: &Handle<T>| *p.coords == *coords;
            if self.config.dedup && self.buffer.iter().any(|p| p.group == group && same_coords(p)) {
                self.stats.coalesced += 1;
                return Ok(());
            }
            if !self.buffer.iter().any(same_coords) {
                self.distinct_in_buffer += 1;
            }
            self.group_counts[group] += 1;
            let p = Stored::new(id, group, coords.into_boxed_slice(), &self.live);
            self.buffer.push(p);
            self.note_memory(0);
            let ready = if self.config.dedup {
                self.distinct_in_buffer == self.bounds.k + 1
            } else {
                self.buffer.len() == self.bounds.k + 1
            };
            if ready {
                self.init()?;
            }
            return Ok(());
        }

        self.group_counts[group] += 1;
        let p = Stored::new(id, group, coords.into_boxed_slice(), &self.live);
        let single = [Rc::clone(&p)];
        for r in &mut self.rungs {
            r.process(self.config.metric, &p, &single, &self.bounds.u);
        }
        drop(single);
        drop(p);
        self.note_memory(0);
        if self.stats.points_seen.is_multiple_of(self.bounds.k) {
            self.maintain();
        }
        Ok(())
    }

    fn init(&mut self) -> Result<()> {
        let metric = self.config.metric;
        let mut tau = T::infinity();
        for (i, a) in self.buffer.iter().enumerate() {
            for b in &self.buffer[i + 1..] {
                let d = metric.distance(&a.coords, &b.coords);
                if d > T::zero() || !self.config.dedup {
                    tau = tau.min(d);
                }
            }
        }
        tau = tau * T::of(0.5);
        if tau <= T::zero() || !tau.is_finite() {
            return Err(Error::DegeneratePrefix);
        }
        self.tau = tau;
        self.stats.tau_history.push(tau);
        let e0 = self.exponent_for(tau);
        let m = self.bounds.m();
        for e in e0..=e0 + self.stats.beta as i32 {
            let mut r = Rung::new(e, self.delta(e), m);
            for p in &self.buffer {
                r.process(metric, p, std::slice::from_ref(p), &self.bounds.u);
            }
            self.rungs.push(r);
            self.note_memory(0);
        }
        self.buffer.clear();
        Ok(())
    }

    fn note_memory(&mut self, extra: usize) {
        let slots = self.buffer.len() + extra + self.rungs.iter().map(Rung::slots).sum::<usize>();
        self.stats.peak_slots = self.stats.peak_slots.max(slots);
        self.stats.peak_stored = self.live.peak();
    }

    /// Raises `τ` when some guess holds more than `k` pivots and replaces
    /// the guesses that fell below it.
    fn maintain(&mut self) {
        let k = self.bounds.k;
        let metric = self.config.metric;
        let mut tau_r = self.tau;
        let mut oversized = false;
        for r in &self.rungs {
            if r.pivots.len() > k {
                oversized = true;
                let space = r.space(metric);
                let subset: Vec<usize> = (0..r.pivots.len()).collect();
                let trace = gonzalez_on_subset(&space, &subset, k + 1);
                tau_r = tau_r.max(trace.gap(k + 1) * T::of(0.5));
            }
        }
        if !oversized {
            return;
        }
        let tau_before = self.tau;
        self.tau = tau_r;
        self.stats.tau_history.push(tau_r);
        let beta = self.stats.beta as i32;
        let old_min = self.rungs[0].exponent;
        let old_max = old_min + beta;
        let new_min = self.exponent_for(tau_r);
        debug_assert!(new_min > old_min);

        let below = self.rungs.iter().take_while(|r| r.exponent < new_min).count();
        let mut aborted: Vec<Rung<T>> = self.rungs.drain(..below).collect();
        let seed = aborted.swap_remove(0);
        drop(aborted);
        let seed_slots = seed.slots();

        let n = seed.pivots.len();
        let subset: Vec<usize> = (0..n).collect();
        let trace = gonzalez_on_subset(&seed.space(metric), &subset, k + 1);
        let lead = &trace.selection_order()[..n.min(k + 1)];
        let mut fed = vec![false; n];
        let mut order: Vec<usize> = Vec::with_capacity(n);
        for &i in lead {
            fed[i] = true;
            order.push(i);
        }
        order.extend((0..n).filter(|&i| !fed[i]));

        let mut spawned = 0;
        for e in (old_max + 1).max(new_min)..=new_min + beta {
            let mut r = Rung::with_reserve(e, self.delta(e), &seed.reserve);
            for &i in &order {
                let c = &seed.pivots[i];
                r.process(metric, &c.point, &c.repl, &self.bounds.u);
            }
            self.rungs.push(r);
            spawned += 1;
            self.note_memory(seed_slots);
        }
        drop(seed);
        self.note_memory(0);
        debug_assert_eq!(self.rungs.len(), beta as usize + 1);

        self.stats.maintains.push(MaintainEvent {
            at: self.stats.points_seen,
            tau_before,
            tau_after: tau_r,
            spawned,
            max_pivots_after: self.rungs.iter().map(|r| r.pivots.len()).max().unwrap_or(0),
        });
    }

    /// Checks every structural invariant of the ladder; returns a
    /// description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if !self.is_initialized() {
            return Ok(());
        }
        let metric = self.config.metric;
        let k = self.bounds.k;
        let slack = T::one() + T::epsilon() * T::of(1024.0);
        let beta = self.stats.beta;
        if self.rungs.len() != beta + 1 {
            return Err(format!("{} guesses, expected {}", self.rungs.len(), beta + 1));
        }
        for w in self.rungs.windows(2) {
            if w[1].exponent != w[0].exponent + 1 {
                return Err("guess exponents are not consecutive".into());
            }
        }
        let low = self.rungs[0].delta;
        if low < self.tau || low > (T::one() + self.eps) * self.tau * slack {
            return Err(format!("smallest guess {low} not in [τ, (1+ε)τ] for τ = {}", self.tau));
        }
        for r in &self.rungs {
            let delta = r.delta;
            if r.pivots.len() > 2 * k {
                return Err(format!("Δ={delta}: {} pivots exceed 2k", r.pivots.len()));
            }
            for (i, a) in r.pivots.iter().enumerate() {
                for b in &r.pivots[i + 1..] {
                    if metric.distance(&a.point.coords, &b.point.coords) <= delta + delta {
                        return Err(format!("Δ={delta}: pivots {} and {} within 2Δ", a.point.id, b.point.id));
                    }
                }
                let reach = (T::of(2.0) + self.eps) * delta * slack;
                for (j, q) in a.repl.iter().enumerate() {
                    if metric.distance(&a.point.coords, &q.coords) > reach {
                        return Err(format!(
                            "Δ={delta}: replacement {} too far from pivot {}",
                            q.id, a.point.id
                        ));
                    }
                    if a.repl[..j].iter().any(|o| o.group == q.group) {
                        return Err(format!(
                            "Δ={delta}: pivot {} holds two points of group {}",
                            a.point.id, q.group
                        ));
                    }
                }
            }
            for (g, pool) in r.reserve.iter().enumerate() {
                if pool.len() > self.bounds.u[g] {
                    return Err(format!("Δ={delta}: reserve exceeds u_{g}"));
                }
                for (j, q) in pool.iter().enumerate() {
                    if q.group != g || pool[..j].iter().any(|o| o.id == q.id) {
                        return Err(format!("Δ={delta}: reserve of group {g} malformed"));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_feasible(&self) -> Result<()> {
        let n: usize = self.group_counts.iter().sum();
        let b = &self.bounds;
        if n < b.k {
            return Err(Error::KTooLarge { k: b.k, n });
        }
        if let Some(g) = (0..b.m()).find(|&g| b.l[g] > self.group_counts[g]) {
            return Err(Error::Infeasible(format!("l_{g} exceeds group size")));
        }
        let reach: usize = (0..b.m()).map(|g| b.u[g].min(self.group_counts[g])).sum();
        if reach < b.k {
            return Err(Error::Infeasible("sum of upper bounds below k".into()));
        }
        Ok(())
    }

    /// Ends the stream and returns a fair center set.
    pub fn finish(mut self) -> Result<StreamOutcome<T>> {
        self.check_feasible()?;
        if !self.is_initialized() {
            return self.finish_short();
        }
        self.maintain();
        let metric = self.config.metric;
        for idx in 0..self.rungs.len() {
            let merged = self.rungs[idx].merge(metric, self.eps, &self.bounds)?;
            if merged.shift.is_success() {
                self.stats.winning_delta = Some(self.rungs[idx].delta);
                let picked = self.complete(&self.rungs[idx], &merged);
                return self.outcome(picked);
            }
        }
        self.stats.fallback_used = true;
        self.fallback()
    }

    /// Adds reserve points to the shifted centers: first every lower-quota
    /// deficit, then up to the shift's per-group plan, then anything under
    /// the upper quotas, each pass by ascending id.
    fn complete(&self, rung: &Rung<T>, merged: &MergeOutcome<T>) -> Vec<Handle<T>> {
        let b = &self.bounds;
        let m = b.m();
        let mut out: Vec<Handle<T>> = Vec::with_capacity(b.k);
        let mut counts = vec![0usize; m];
        for rep in &merged.shift.replacement {
            let handle = rung
                .pivots
                .iter()
                .flat_map(|c| c.repl.iter())
                .find(|q| q.id == rep.witness)
                .expect("witness comes from a replacement set");
            counts[rep.group] += 1;
            out.push(Rc::clone(handle));
        }
        let mut pool: Vec<&Handle<T>> = rung.reserve.iter().flatten().collect();
        pool.sort_by_key(|q| q.id);
        let plan: Vec<usize> = (0..m).map(|g| counts[g] + merged.shift.slack[g]).collect();

        // Reserve group g holds min(u_g, |S_g|) >= l_g distinct points, so at
        // least l_g - counts[g] of them are not chosen yet.
        let cap = |pass: usize, g: usize| match pass {
            0 => b.l[g],
            1 => plan[g].min(b.u[g]),
            _ => b.u[g],
        };
        for pass in 0..3 {
            for q in &pool {
                if out.len() == b.k {
                    break;
                }
                let g = q.group;
                if counts[g] < cap(pass, g) && out.iter().all(|o| o.id != q.id) {
                    counts[g] += 1;
                    out.push(Rc::clone(q));
                }
            }
        }
        assert!(
            (0..m).all(|g| counts[g] >= b.l[g]) && out.len() == b.k,
            "reserve cannot complete a successful shift"
        );
        out
    }

    fn outcome(mut self, mut picked: Vec<Handle<T>>) -> Result<StreamOutcome<T>> {
        picked.sort_by_key(|p| p.id);
        let centers = CenterSet::from_labelled(picked.iter().map(|p| Ok((p.id, p.group))), self.bounds.m())?;
        let points = picked
            .iter()
            .map(|p| PointRecord {
                id: p.id,
                coords: p.coords.to_vec(),
                group: p.group,
            })
            .collect();
        self.note_memory(0);
        Ok(StreamOutcome {
            centers,
            points,
            stats: self.stats,
        })
    }

    /// Offline solve over everything the smallest guess stored.
    fn fallback(self) -> Result<StreamOutcome<T>> {
        let rung = &self.rungs[0];
        let mut held: Vec<Handle<T>> = Vec::new();
        let candidates = rung
            .pivots
            .iter()
            .flat_map(|c| std::iter::once(&c.point).chain(&c.repl))
            .chain(rung.reserve.iter().flatten());
        for q in candidates {
            if held.iter().all(|h| h.id != q.id) {
                held.push(Rc::clone(q));
            }
        }
        let picked = solve_on(&held, &self.bounds, self.config.metric)?;
        self.outcome(picked)
    }

    /// Streams that never filled the `k+1`-point prefix.
    fn finish_short(self) -> Result<StreamOutcome<T>> {
        let b = &self.bounds;
        if self.buffer.len() == b.k {
            let fair = (0..b.m()).all(|g| b.l[g] <= self.group_counts[g] && self.group_counts[g] <= b.u[g]);
            if !fair {
                return Err(Error::Infeasible("the whole stream is not a fair center set".into()));
            }
            let picked = self.buffer.clone();
            return self.outcome(picked);
        }
        let picked = solve_on(&self.buffer, b, self.config.metric)?;
        self.outcome(picked)
    }
}

/// Runs the offline solver on held points, with upper quotas clipped to
/// what is held.
fn solve_on<T: Scalar>(held: &[Handle<T>], bounds: &FairnessBounds, metric: Metric) -> Result<Vec<Handle<T>>> {
    let ds =
        Dataset::from_rows(held.iter().map(|p| (p.coords.to_vec(), p.group)), Some(bounds.m()))?.with_metric(metric);
    let sizes = ds.group_sizes();
    let local = FairnessBounds::new(
        bounds.l.clone(),
        bounds.u.iter().zip(sizes).map(|(&u, &s)| u.min(s)).collect(),
        bounds.k,
    );
    let inst = ProblemInstance::new(&ds, &local)?;
    let centers = solve_offline(inst, 0)?;
    Ok(centers.ids().iter().map(|&i| Rc::clone(&held[i])).collect())
}

/// Runs the streaming solver over `points` in one pass.
pub fn stream_solve<T, I>(points: I, bounds: &FairnessBounds, config: StreamConfig) -> Result<StreamOutcome<T>>
where
    T: Scalar,
    I: IntoIterator<Item = StreamPoint<T>>,
{
    let mut solver = StreamingSolver::new(bounds.clone(), config)?;
    for p in points {
        solver.push(p)?;
    }
    solver.finish()
}

#[cfg(test)]
mod tests;
