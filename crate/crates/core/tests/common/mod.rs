#![allow(dead_code)]

use fairkc::{Dataset, FairnessBounds, ProblemInstance};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random points in the unit square (scaled), with every group nonempty.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, m: usize, scale: f64) -> Dataset<f64> {
    loop {
        let rows: Vec<(Vec<f64>, usize)> = (0..n)
            .map(|_| {
                (
                    vec![rng.random::<f64>() * scale, rng.random::<f64>() * scale],
                    rng.random_range(0..m),
                )
            })
            .collect();
        let ds = Dataset::from_rows(rows, Some(m)).unwrap();
        if ds.group_sizes().iter().all(|&s| s > 0) {
            return ds;
        }
    }
}

/// Valid bounds for `ds`, alternating between equality (`l = u`) and
/// range (`l < u`) constraints.
pub fn random_bounds(rng: &mut ChaCha8Rng, ds: &Dataset<f64>, k: usize, equality: bool) -> FairnessBounds {
    let sizes = ds.group_sizes().to_vec();
    loop {
        let b = if equality {
            let mut counts = vec![0; sizes.len()];
            let mut left = k;
            while left > 0 {
                let g = rng.random_range(0..sizes.len());
                if counts[g] < sizes[g] {
                    counts[g] += 1;
                    left -= 1;
                }
            }
            FairnessBounds::exact(counts)
        } else {
            let l: Vec<usize> = sizes
                .iter()
                .map(|&s| rng.random_range(0..=s.min(k) / 2 + 1).min(s))
                .collect();
            let u: Vec<usize> = sizes
                .iter()
                .zip(&l)
                .map(|(&s, &l)| rng.random_range(l..=s.min(k).max(l)))
                .collect();
            FairnessBounds::new(l, u, k)
        };
        if ProblemInstance::new(ds, &b).is_ok() {
            return b;
        }
    }
}
