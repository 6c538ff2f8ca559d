mod common;

use common::{random_bounds, random_dataset};
use fairkc::fairshift::{build_shift_graph, collect_candidates, fair_shift, nearest_assignment};
use fairkc::flow::dinic_max_flow;
use fairkc::gonzalez::gonzalez;
use fairkc::offline::{heuristic_allocation, solve_equality, solve_offline, HeuristicMode};
use fairkc::oracle::{
    brute_force_fair_shift, brute_force_lower_bounded_flow, brute_force_optimal, brute_force_unconstrained,
    reference_max_flow,
};
use fairkc::{check_fairness, derive_proportional_bounds, objective, FairnessBounds, ProblemInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn offline_within_three_of_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..120 {
        let n = rng.random_range(5..=12);
        let m = rng.random_range(1..=3);
        let k = rng.random_range(1..=4.min(n));
        let ds = random_dataset(&mut rng, n, m, 10.0);
        let b = random_bounds(&mut rng, &ds, k, trial % 2 == 0);
        let inst = ProblemInstance::new(&ds, &b).unwrap();
        let opt = brute_force_optimal(inst).unwrap().opt;
        let start = rng.random_range(0..n);
        let c = solve_offline(inst, start).unwrap();
        assert!(check_fairness(&inst, &c));
        let obj = objective(&ds, &c).unwrap();
        assert!(obj <= 3.0 * opt, "trial {trial}: {obj} > 3 * {opt}");
    }
}

#[test]
fn fair_shift_agrees_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut tested = 0;
    while tested < 120 {
        let n = rng.random_range(6..=12);
        let m = rng.random_range(1..=3);
        let ds = random_dataset(&mut rng, n, m, 10.0);
        let k = rng.random_range(1..=4);
        let a_len = rng.random_range(1..=k.min(3));
        let mut ids: Vec<usize> = (0..n).collect();
        for i in 0..a_len {
            let j = rng.random_range(i..n);
            ids.swap(i, j);
        }
        let centers = &ids[..a_len];
        let mut sep = f64::INFINITY;
        for (i, &a) in centers.iter().enumerate() {
            for &c in &centers[i + 1..] {
                sep = sep.min(ds.distance(a, c));
            }
        }
        let d_prime = if sep.is_finite() {
            sep / 2.0
        } else {
            rng.random::<f64>() * 8.0
        };
        let l: Vec<usize> = (0..m).map(|_| rng.random_range(0..=1)).collect();
        let u: Vec<usize> = l.iter().map(|&l| l + rng.random_range(0..=2)).collect();
        let b = FairnessBounds::new(l, u, k);
        if b.check_shape().is_err() {
            continue;
        }
        let assign = nearest_assignment(&ds, centers);
        let res = fair_shift(&ds, &assign, centers, d_prime, &b).unwrap();
        let brute = brute_force_fair_shift(&ds, centers, d_prime, &b).unwrap();
        assert_eq!(res.is_success(), brute);
        if res.is_success() {
            let mut seen = std::collections::HashSet::new();
            let mut counts = vec![0; m];
            for r in &res.replacement {
                assert!(ds.distance(r.center, r.witness) < d_prime);
                assert!(seen.insert(r.witness));
                counts[ds.group(r.witness)] += 1;
            }
            assert!(counts.iter().zip(&b.u).all(|(c, u)| c <= u));
            let deficit: usize = counts.iter().zip(&b.l).map(|(&c, &l)| l.saturating_sub(c)).sum();
            assert!(deficit <= k - a_len);
        }
        tested += 1;
    }
}

#[test]
fn dinic_matches_reference_and_lower_bounded_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..60 {
        let m = rng.random_range(1..=3);
        let k = rng.random_range(1..=4);
        let a = rng.random_range(1..=k);
        let l: Vec<usize> = (0..m).map(|_| rng.random_range(0..=1)).collect();
        let u: Vec<usize> = l.iter().map(|&l| l + rng.random_range(0..=2)).collect();
        let b = FairnessBounds::new(l, u, k);
        if b.check_shape().is_err() {
            continue;
        }
        let mut edges = Vec::new();
        let mut cands = Vec::new();
        for pos in 0..a {
            for g in 0..m {
                if rng.random_bool(0.5) {
                    edges.push((pos, g));
                    cands.push(fairkc::fairshift::ShiftCandidate {
                        center: pos,
                        center_pos: pos,
                        group: g,
                        witness: 100 + pos * m + g,
                        dist: 1.0,
                    });
                }
            }
        }
        let centers: Vec<usize> = (0..a).collect();
        let mut graph = build_shift_graph(&cands, &centers, &b).unwrap();
        let reference = reference_max_flow(&graph.network).unwrap();
        let target = graph.target();
        let flow = dinic_max_flow(&mut graph.network);
        assert_eq!(flow, reference, "trial {trial}");
        assert!(graph.network.is_valid_flow());
        // Saturation agrees with a full-value flow in the lower-bounded model.
        let lower = brute_force_lower_bounded_flow(a, &edges, &b).unwrap();
        assert_eq!(flow == target, lower == Some(k), "trial {trial}");
    }
}

#[test]
fn gonzalez_gaps_and_two_approximation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..80 {
        let n = rng.random_range(4..=12);
        let ds = random_dataset(&mut rng, n, 1, 10.0);
        let k = rng.random_range(1..=4.min(n));
        let trace = gonzalez(&ds, k, rng.random_range(0..n)).unwrap();
        assert!(trace.gaps().windows(2).all(|w| w[0] >= w[1]));
        let centers = fairkc::CenterSet::from_ids(&ds, trace.sequence().iter().copied()).unwrap();
        let opt = brute_force_unconstrained(&ds, k).unwrap().opt;
        assert!(objective(&ds, &centers).unwrap() <= 2.0 * opt);
    }
}

#[test]
fn range_optimum_never_worse_than_equality() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..60 {
        let n = rng.random_range(6..=12);
        let m = rng.random_range(2..=3);
        let ds = random_dataset(&mut rng, n, m, 10.0);
        let k = rng.random_range(2..=4);
        let Ok(b) = derive_proportional_bounds(&ds, k, 0.2) else {
            continue;
        };
        let range = brute_force_optimal(ProblemInstance::new(&ds, &b).unwrap()).unwrap().opt;
        for mode in [HeuristicMode::Major, HeuristicMode::Minor] {
            let alloc = heuristic_allocation(ds.group_sizes(), &b, mode);
            let eq = FairnessBounds::exact(alloc.counts.clone());
            let exact = brute_force_optimal(ProblemInstance::new(&ds, &eq).unwrap())
                .unwrap()
                .opt;
            assert!(range <= exact);
            let heuristic = solve_equality(&ds, &alloc.counts, 0).unwrap();
            assert!(check_fairness(&ProblemInstance::new(&ds, &b).unwrap(), &heuristic));
        }
    }
}

#[test]
fn candidates_respect_strict_radius() {
    let ds = fairkc::Dataset::from_line(&[0.0, 1.0, 2.0, 10.0], &[0, 1, 1, 0]).unwrap();
    let assign = nearest_assignment(&ds, &[0, 3]);
    let cands = collect_candidates(&ds, &assign, &[0, 3], 1.0);
    assert_eq!(cands.len(), 2);
    assert!(cands.iter().all(|c| c.dist < 1.0));
}
