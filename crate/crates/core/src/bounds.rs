//! Per-group quotas and the problem instance they constrain.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Range-based quotas: at least `l[i]` and at most `u[i]` of the `k`
/// centers must come from group `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FairnessBounds {
    pub l: Vec<usize>,
    pub u: Vec<usize>,
    pub k: usize,
}

impl FairnessBounds {
    pub fn new(l: Vec<usize>, u: Vec<usize>, k: usize) -> Self {
        Self { l, u, k }
    }

    /// Equality-based quotas `l = u = counts`, `k = Σ counts`.
    pub fn exact(counts: Vec<usize>) -> Self {
        let k = counts.iter().sum();
        Self {
            l: counts.clone(),
            u: counts,
            k,
        }
    }

    /// No lower bounds and every group allowed up to `min(k, |S_i|)`
    /// centers; the unconstrained k-center problem.
    pub fn unconstrained(group_sizes: &[usize], k: usize) -> Self {
        Self {
            l: vec![0; group_sizes.len()],
            u: group_sizes.iter().map(|&s| s.min(k)).collect(),
            k,
        }
    }

    pub fn m(&self) -> usize {
        self.l.len()
    }

    pub fn sum_l(&self) -> usize {
        self.l.iter().sum()
    }

    pub fn sum_u(&self) -> usize {
        self.u.iter().sum()
    }

    /// Checks the quota invariants that do not depend on a dataset:
    /// matching lengths, `l_i <= u_i`, `Σl <= k <= Σu`, `k > 0`.
    pub fn check_shape(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::ZeroK);
        }
        if self.l.len() != self.u.len() {
            return Err(Error::Infeasible(format!(
                "bounds length mismatch: {} lower, {} upper",
                self.l.len(),
                self.u.len()
            )));
        }
        for (i, (&l, &u)) in self.l.iter().zip(&self.u).enumerate() {
            if l > u {
                return Err(Error::Infeasible(format!("l_{i} > u_{i}")));
            }
        }
        if self.sum_l() > self.k {
            return Err(Error::Infeasible("lower bounds exceed k".into()));
        }
        if self.sum_u() < self.k {
            return Err(Error::Infeasible("sum of upper bounds below k".into()));
        }
        Ok(())
    }

    /// Bounds `l_i = floor(alpha_i |S_i| k / n)` and
    /// `u_i = min(|S_i|, k, ceil(beta_i |S_i| k / n))`.
    ///
    /// If rounding pushes `Σl` above `k`, the largest lower bounds are
    /// decremented until `Σl = k`.
    pub fn from_ratios(group_sizes: &[usize], k: usize, alpha: &[f64], beta: &[f64]) -> Result<Self> {
        let m = group_sizes.len();
        if alpha.len() != m || beta.len() != m {
            return Err(Error::InvalidParameter(format!(
                "expected {m} ratios per side, got {} and {}",
                alpha.len(),
                beta.len()
            )));
        }
        let n: usize = group_sizes.iter().sum();
        if k == 0 {
            return Err(Error::ZeroK);
        }
        if k > n {
            return Err(Error::KTooLarge { k, n });
        }
        let mut l = Vec::with_capacity(m);
        let mut u = Vec::with_capacity(m);
        for i in 0..m {
            if !(alpha[i] > 0.0 && alpha[i] <= 1.0) || beta[i].is_nan() || beta[i] < 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "ratios for group {i} outside alpha in (0,1], beta >= 1"
                )));
            }
            let share = (group_sizes[i] * k) as f64 / n as f64;
            l.push(snap(alpha[i] * share).floor() as usize);
            u.push((snap(beta[i] * share).ceil() as usize).min(group_sizes[i]).min(k));
        }
        while l.iter().sum::<usize>() > k {
            let (i, _) = l
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                .expect("nonempty");
            l[i] -= 1;
        }
        if u.iter().sum::<usize>() < k {
            return Err(Error::InfeasibleProportional);
        }
        Ok(Self { l, u, k })
    }
}

/// Rounds values within 1e-9 (relative) of an integer onto it, so that
/// `floor`/`ceil` of an exact product are not thrown off by representation
/// error (e.g. `0.8 * 5.0`).
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x
    }
}

/// Approximately proportional quotas with a single slack `eps`:
/// `l_i = floor((1-eps)|S_i|k/n)`, `u_i = min(|S_i|, k, ceil((1+eps)|S_i|k/n))`.
pub fn derive_proportional_bounds<T: Scalar>(dataset: &Dataset<T>, k: usize, eps: f64) -> Result<FairnessBounds> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("bounds eps {eps} outside [0, 1)")));
    }
    let m = dataset.m();
    FairnessBounds::from_ratios(dataset.group_sizes(), k, &vec![1.0 - eps; m], &vec![1.0 + eps; m])
}

/// A dataset together with the quotas a solution must meet.
#[derive(Debug, Clone, Copy)]
pub struct ProblemInstance<'a, T> {
    pub dataset: &'a Dataset<T>,
    pub bounds: &'a FairnessBounds,
}

impl<'a, T: Scalar> ProblemInstance<'a, T> {
    /// Pairs a dataset with bounds after [`validate_instance`].
    pub fn new(dataset: &'a Dataset<T>, bounds: &'a FairnessBounds) -> Result<Self> {
        let inst = Self { dataset, bounds };
        validate_instance(&inst)?;
        Ok(inst)
    }

    /// Pairs without validation; callers that need feasibility must
    /// validate themselves.
    pub fn new_unchecked(dataset: &'a Dataset<T>, bounds: &'a FairnessBounds) -> Self {
        Self { dataset, bounds }
    }

    pub fn k(&self) -> usize {
        self.bounds.k
    }
}

/// Verifies every instance invariant:
/// `0 <= l_i <= u_i <= |S_i|` and `Σl <= k <= Σu`, `1 <= k <= n`.
pub fn validate_instance<T: Scalar>(instance: &ProblemInstance<'_, T>) -> Result<()> {
    let ds = instance.dataset;
    let b = instance.bounds;
    if b.l.len() != ds.m() || b.u.len() != ds.m() {
        return Err(Error::Infeasible(format!(
            "bounds cover {} / {} groups, dataset has {}",
            b.l.len(),
            b.u.len(),
            ds.m()
        )));
    }
    for i in 0..ds.m() {
        if b.l[i] > ds.group_sizes()[i] {
            return Err(Error::Infeasible(format!("l_{i} exceeds group size")));
        }
    }
    b.check_shape()?;
    for i in 0..ds.m() {
        if b.u[i] > ds.group_sizes()[i] {
            return Err(Error::Infeasible(format!("u_{i} exceeds group size")));
        }
    }
    if b.k > ds.n() {
        return Err(Error::KTooLarge { k: b.k, n: ds.n() });
    }
    Ok(())
}
