use ganlab_core::distributions::Histogram;
use ganlab_core::divergences::{em_bruteforce, em_recurrence, wasserstein_1d};

/// Every histogram of exactly `len` cells with total mass `mass`.
fn compositions(len: usize, mass: u32) -> Vec<Vec<u32>> {
    if len == 1 {
        return vec![vec![mass]];
    }
    (0..=mass)
        .flat_map(|first| {
            compositions(len - 1, mass - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

#[test]
fn recurrence_equals_exhaustive_search_on_small_histograms() {
    let mut pairs = 0;
    for len in 1..=4 {
        for mass in 1..=8 {
            let all = compositions(len, mass);
            for p in &all {
                for q in &all {
                    let rec = em_recurrence(&Histogram::from_counts(p), &Histogram::from_counts(q)).unwrap();
                    let (cost, plan) = em_bruteforce(p, q).unwrap();
                    assert_eq!(rec.distance, cost, "{p:?} {q:?}");
                    assert_eq!(plan.recomputed_cost(), cost);
                    pairs += 1;
                }
            }
        }
    }
    assert!(pairs > 10_000);
}

#[test]
fn recurrence_agrees_with_sorted_sample_distance() {
    // Unit masses at integer positions: W between the point clouds is the
    // pile distance divided by the total mass.
    let p = [3u32, 0, 2, 1, 4];
    let q = [1u32, 2, 4, 3, 0];
    let expand = |h: &[u32]| -> Vec<f64> {
        h.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat_n(i as f64, c as usize)).collect()
    };
    let rec = em_recurrence(&Histogram::from_counts(&p), &Histogram::from_counts(&q)).unwrap();
    let w = wasserstein_1d(&expand(&p), &expand(&q)).unwrap();
    assert!((rec.distance / 10.0 - w).abs() < 1e-12, "{} vs {w}", rec.distance);
}
