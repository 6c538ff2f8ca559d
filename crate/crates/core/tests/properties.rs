use fairkc::fairshift::{fair_shift, nearest_assignment};
use fairkc::gonzalez::gonzalez;
use fairkc::offline::solve_offline;
use fairkc::streaming::{stream_solve, StreamConfig, StreamPoint};
use fairkc::{check_fairness, Dataset, FairnessBounds, ProblemInstance};
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = Dataset<f64>> {
    (1usize..4).prop_flat_map(|m| {
        proptest::collection::vec(((-50.0f64..50.0, -50.0f64..50.0), 0..m), 4..40).prop_map(move |rows| {
            Dataset::from_rows(rows.into_iter().map(|((x, y), g)| (vec![x, y], g)), Some(m)).unwrap()
        })
    })
}

/// Bounds derived from the dataset's group sizes so the instance is valid.
fn bounds_for(ds: &Dataset<f64>, k: usize, slack: usize) -> Option<FairnessBounds> {
    let sizes = ds.group_sizes();
    let l: Vec<usize> = sizes.iter().map(|&s| (s.min(k) / 3).min(1)).collect();
    let u: Vec<usize> = sizes
        .iter()
        .zip(&l)
        .map(|(&s, &l)| (l + slack).min(s).min(k).max(l))
        .collect();
    let b = FairnessBounds::new(l, u, k);
    ProblemInstance::new(ds, &b).is_ok().then_some(b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn traversal_gaps_never_increase(ds in dataset(), k in 1usize..8, start in 0usize..4) {
        let k = k.min(ds.n());
        let t = gonzalez(&ds, k, start % ds.n()).unwrap();
        prop_assert!(t.gaps().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn fair_shift_is_monotone_in_radius(ds in dataset(), a_len in 1usize..4, k_extra in 0usize..3, frac in 0.05f64..1.0) {
        let trace = gonzalez(&ds, a_len.min(ds.n()), 0).unwrap();
        let centers = trace.sequence().to_vec();
        let k = centers.len() + k_extra;
        let Some(b) = bounds_for(&ds, k.min(ds.n()), 2) else { return Ok(()) };
        prop_assume!(b.k >= centers.len());
        let full = if centers.len() > 1 { trace.gap(centers.len()) / 2.0 } else { 200.0 };
        let assign = nearest_assignment(&ds, &centers);
        let small = fair_shift(&ds, &assign, &centers, full * frac, &b).unwrap();
        let large = fair_shift(&ds, &assign, &centers, full, &b).unwrap();
        prop_assert!(!small.is_success() || large.is_success());
    }

    #[test]
    fn offline_output_is_fair(ds in dataset(), k in 1usize..6, slack in 0usize..3, start in 0usize..40) {
        let Some(b) = bounds_for(&ds, k.min(ds.n()), slack) else { return Ok(()) };
        let inst = ProblemInstance::new(&ds, &b).unwrap();
        let c = solve_offline(inst, start % ds.n()).unwrap();
        prop_assert!(check_fairness(&inst, &c));
    }

    #[test]
    fn streaming_output_is_fair(ds in dataset(), k in 1usize..5, slack in 0usize..3, eps in 0.05f64..1.0) {
        let Some(b) = bounds_for(&ds, k.min(ds.n()), slack) else { return Ok(()) };
        let pts = ds.records().map(|r| StreamPoint::new(r.coords, r.group));
        let out = match stream_solve(pts, &b, StreamConfig::with_eps(eps)) {
            Ok(out) => out,
            Err(fairkc::Error::DegeneratePrefix) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let inst = ProblemInstance::new(&ds, &b).unwrap();
        prop_assert!(check_fairness(&inst, &out.centers));
    }

    #[test]
    fn proportional_bounds_are_valid(sizes in proptest::collection::vec(1usize..200, 1..6), k_frac in 0.01f64..0.5, eps in 0.0f64..0.99) {
        let n: usize = sizes.iter().sum();
        let k = ((n as f64 * k_frac) as usize).max(1);
        let alpha: Vec<f64> = sizes.iter().map(|_| 1.0 - eps).collect();
        let beta: Vec<f64> = sizes.iter().map(|_| 1.0 + eps).collect();
        if let Ok(b) = FairnessBounds::from_ratios(&sizes, k, &alpha, &beta) {
            prop_assert!(b.check_shape().is_ok());
            for (u, size) in b.u.iter().zip(&sizes) {
                prop_assert!(u <= size);
            }
        }
    }
}
