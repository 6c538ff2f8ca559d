//! Gaussian blob datasets with hyperplane-defined groups.

use fairkc::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Hyperplane draws tried before giving up on filling every group.
const MAX_PLANE_DRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub blobs: usize,
    pub points_per_blob: usize,
    pub dim: usize,
    pub box_edge: f64,
    /// Number of groups; a power of two.
    pub m: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            blobs: 20,
            points_per_blob: 250,
            dim: 4,
            box_edge: 20.0,
            m: 2,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    /// 20 blobs of 5000 points.
    pub fn full_scale(self) -> Self {
        Self {
            points_per_blob: 5000,
            ..self
        }
    }

    pub fn n(&self) -> usize {
        self.blobs * self.points_per_blob
    }

    pub fn validate(&self) -> Result<()> {
        if self.blobs == 0 || self.points_per_blob == 0 || self.dim == 0 {
            return Err(HarnessError::Config(
                "blobs, points_per_blob and dim must be positive".into(),
            ));
        }
        if !(self.box_edge.is_finite() && self.box_edge > 0.0) {
            return Err(HarnessError::Config("box_edge must be positive".into()));
        }
        if !self.m.is_power_of_two() {
            return Err(HarnessError::Config(format!("m = {} is not a power of two", self.m)));
        }
        if self.m > self.n() {
            return Err(HarnessError::Config("more groups than points".into()));
        }
        Ok(())
    }
}

/// Blob centers uniform in `[0, box_edge]^dim`, points `N(center, I)`.
/// Each point's group is the sign pattern of `log2 m` random hyperplanes
/// (uniform unit normal through a uniform point of the data's bounding
/// box). Hyperplanes are redrawn until every group is nonempty.
pub fn generate_blobs(spec: &SyntheticSpec) -> Result<Dataset<f64>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.dim;
    let centers: Vec<Vec<f64>> = (0..spec.blobs)
        .map(|_| (0..d).map(|_| rng.random::<f64>() * spec.box_edge).collect())
        .collect();
    let mut coords = Vec::with_capacity(spec.n() * d);
    for c in &centers {
        for _ in 0..spec.points_per_blob {
            coords.extend(c.iter().map(|&x| x + rng.sample::<f64, _>(StandardNormal)));
        }
    }
    let n = spec.n();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for row in coords.chunks_exact(d) {
        for j in 0..d {
            lo[j] = lo[j].min(row[j]);
            hi[j] = hi[j].max(row[j]);
        }
    }
    let planes = spec.m.trailing_zeros() as usize;
    for _ in 0..MAX_PLANE_DRAWS {
        let mut groups = vec![0usize; n];
        for bit in 0..planes {
            let normal = unit_vector(&mut rng, d);
            let anchor: Vec<f64> = (0..d).map(|j| lo[j] + rng.random::<f64>() * (hi[j] - lo[j])).collect();
            for (g, row) in groups.iter_mut().zip(coords.chunks_exact(d)) {
                let side: f64 = row
                    .iter()
                    .zip(&anchor)
                    .zip(&normal)
                    .map(|((x, a), w)| (x - a) * w)
                    .sum();
                if side > 0.0 {
                    *g |= 1 << bit;
                }
            }
        }
        let mut seen = vec![false; spec.m];
        groups.iter().for_each(|&g| seen[g] = true);
        if seen.iter().all(|&s| s) {
            return Ok(Dataset::new(d, coords, groups, spec.m)?);
        }
    }
    Err(HarnessError::Config(format!(
        "no hyperplane draw filled all {} groups",
        spec.m
    )))
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
