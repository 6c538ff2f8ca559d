mod common;

use std::cell::Cell;
use std::rc::Rc;

use common::{random_bounds, random_dataset};
use fairkc::oracle::brute_force_optimal;
use fairkc::streaming::{
    memory_envelope, stream_solve, write_replay, ReplayHeader, ReplayReader, StreamConfig, StreamOutcome, StreamPoint,
    StreamingSolver,
};
use fairkc::{check_fairness, objective, CenterSet, Dataset, FairnessBounds, ProblemInstance};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn points_of(ds: &Dataset<f64>) -> Vec<StreamPoint<f64>> {
    ds.records().map(|r| StreamPoint::new(r.coords, r.group)).collect()
}

fn score(ds: &Dataset<f64>, b: &FairnessBounds, out: &StreamOutcome<f64>) -> f64 {
    let cs = CenterSet::from_ids(ds, out.centers.ids().iter().copied()).unwrap();
    assert!(check_fairness(&ProblemInstance::new(ds, b).unwrap(), &cs));
    objective(ds, &cs).unwrap()
}

#[test]
fn ratio_envelope_on_micro_streams() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..90 {
        let eps = [0.05, 0.1, 0.5][trial % 3];
        let n = rng.random_range(6..=12);
        let m = rng.random_range(1..=3);
        let k = rng.random_range(1..=3);
        let ds = random_dataset(&mut rng, n, m, 10.0);
        let b = random_bounds(&mut rng, &ds, k, trial % 2 == 0);
        let opt = brute_force_optimal(ProblemInstance::new(&ds, &b).unwrap()).unwrap().opt;
        let out = stream_solve(points_of(&ds), &b, StreamConfig::with_eps(eps)).unwrap();
        let obj = score(&ds, &b, &out);
        assert!(obj <= (13.0 + 20.0 * eps) * opt, "trial {trial}: {obj} vs opt {opt}");
        assert!(out.stats.peak_slots <= memory_envelope(&b, out.stats.beta));
        for &tau in &out.stats.tau_history {
            assert!(tau <= opt, "trial {trial}: tau {tau} above opt {opt}");
        }
    }
}

/// Every center must come from group 1, whose points sit in one tight
/// cluster; the other clusters hold group 0 only, far away.
fn fallback_stream(rng: &mut ChaCha8Rng, k: usize) -> (Dataset<f64>, FairnessBounds) {
    let mut rows = Vec::new();
    rows.push((vec![0.0, 0.0], 0));
    rows.push((vec![0.001, 0.0], 0));
    for j in 0..k + rng.random_range(0..3) {
        rows.push((vec![0.05 + 0.05 * j as f64, rng.random::<f64>() * 0.05], 1));
    }
    let far = rng.random_range(1..k);
    for c in 1..=far {
        let centre = 50.0 * c as f64 + rng.random::<f64>() * 20.0;
        for _ in 0..rng.random_range(1..=3) {
            rows.push((vec![centre + rng.random::<f64>() * 0.01, rng.random::<f64>() * 0.01], 0));
        }
    }
    let ds = Dataset::from_rows(rows, Some(2)).unwrap();
    (ds, FairnessBounds::new(vec![0, k], vec![0, k], k))
}

#[test]
fn fallback_streams_stay_within_offline_envelope() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut fallbacks = 0;
    for trial in 0..30 {
        let eps = [0.05, 0.1, 0.5][trial % 3];
        let k = rng.random_range(2..=4);
        let (ds, b) = fallback_stream(&mut rng, k);
        let opt = brute_force_optimal(ProblemInstance::new(&ds, &b).unwrap()).unwrap().opt;
        let out = stream_solve(points_of(&ds), &b, StreamConfig::with_eps(eps)).unwrap();
        let obj = score(&ds, &b, &out);
        if out.stats.fallback_used {
            fallbacks += 1;
            assert!(obj <= (3.0 + 7.0 * eps) * opt, "trial {trial}: {obj} vs {opt}");
        }
    }
    assert!(fallbacks >= 20, "only {fallbacks} streams took the fallback");
}

struct Counted {
    points: std::vec::IntoIter<StreamPoint<f64>>,
    reads: Rc<Cell<usize>>,
}

impl Iterator for Counted {
    type Item = StreamPoint<f64>;

    fn next(&mut self) -> Option<Self::Item> {
        let p = self.points.next()?;
        self.reads.set(self.reads.get() + 1);
        Some(p)
    }
}

#[test]
fn single_pass_over_a_consuming_iterator() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let ds = random_dataset(&mut rng, 500, 3, 100.0);
    let b = FairnessBounds::new(vec![1, 1, 1], vec![4, 4, 4], 6);
    let reads = Rc::new(Cell::new(0));
    let it = Counted {
        points: points_of(&ds).into_iter(),
        reads: Rc::clone(&reads),
    };
    let out = stream_solve(it, &b, StreamConfig::default()).unwrap();
    assert_eq!(reads.get(), 500);
    assert_eq!(out.stats.points_seen, 500);
    score(&ds, &b, &out);
}

#[test]
fn permuted_replays_are_each_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let ds = random_dataset(&mut rng, 11, 2, 10.0);
    let b = random_bounds(&mut rng, &ds, 3, false);
    let opt = brute_force_optimal(ProblemInstance::new(&ds, &b).unwrap()).unwrap().opt;
    let mut order: Vec<usize> = (0..ds.n()).collect();
    for _ in 0..10 {
        order.shuffle(&mut rng);
        let perm = Dataset::from_rows(order.iter().map(|&i| (ds.coords(i).to_vec(), ds.group(i))), Some(2)).unwrap();
        let out = stream_solve(points_of(&perm), &b, StreamConfig::with_eps(0.1)).unwrap();
        assert!(score(&perm, &b, &out) <= 15.0 * opt);
    }
}

#[test]
fn invariants_hold_after_every_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for trial in 0..12 {
        let m = 1 + trial % 3;
        let k = 2 + trial % 4;
        let b = FairnessBounds::new(vec![0; m], vec![k; m], k);
        let mut s = StreamingSolver::<f64>::new(b.clone(), StreamConfig::with_eps(0.2)).unwrap();
        // a drifting walk keeps raising the lower bound
        let mut x = [0.0f64; 2];
        for i in 0..400 {
            x[0] += rng.random::<f64>() * (1.0 + i as f64 / 10.0);
            x[1] = rng.random::<f64>() * 5.0;
            s.push(StreamPoint::new(x.to_vec(), rng.random_range(0..m))).unwrap();
            s.check_invariants()
                .unwrap_or_else(|e| panic!("trial {trial}, point {i}: {e}"));
        }
        assert!(s.stats().maintains.iter().all(|e| e.max_pivots_after <= k));
        let out = s.finish().unwrap();
        assert!(out.stats.peak_slots <= memory_envelope(&b, out.stats.beta));
        assert_eq!(out.centers.len(), k);
    }
}

#[test]
fn replay_file_feeds_the_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let ds = random_dataset(&mut rng, 60, 2, 10.0);
    let b = FairnessBounds::new(vec![1, 1], vec![3, 3], 4);
    let mut bytes = Vec::new();
    let header = ReplayHeader { n: 60, dim: 2, m: 2 };
    write_replay(&mut bytes, header, points_of(&ds)).unwrap();
    let reader = ReplayReader::new(&bytes[..]).unwrap();
    let pts: Vec<StreamPoint<f64>> = reader.map(Result::unwrap).collect();
    let from_file = stream_solve(pts, &b, StreamConfig::default()).unwrap();
    let direct = stream_solve(points_of(&ds), &b, StreamConfig::default()).unwrap();
    assert_eq!(from_file.centers, direct.centers);
}
