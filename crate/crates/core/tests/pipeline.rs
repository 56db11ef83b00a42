mod common;

use std::collections::BTreeSet;

use airfoil_kit::geom::point_segment_distance;
use airfoil_kit::naca::{generate_airfoil, sample_design_space, AirfoilParams, Naca4Params, Spacing};
use airfoil_kit::pipeline::*;
use airfoil_kit::synthetic::PowerLawLayer;
use airfoil_kit::Vec2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{coarse_params, naca4, synthetic_case};

proptest! {
    #[test]
    fn subsample_is_distinct_and_reproducible(n_nodes in 1usize..5000, frac in 0.0f64..1.2, seed in any::<u64>(), stream in 0u64..1000) {
        let n = (n_nodes as f64 * frac) as usize;
        let a = subsample(n_nodes, n, seed, stream);
        prop_assert_eq!(&a, &subsample(n_nodes, n, seed, stream));
        let set: BTreeSet<usize> = a.indices.iter().copied().collect();
        prop_assert_eq!(set.len(), a.indices.len());
        prop_assert_eq!(a.indices.len(), n.min(n_nodes));
        prop_assert!(set.iter().all(|&i| i < n_nodes));
        prop_assert_eq!(a.exhausted, n >= n_nodes);
    }

    #[test]
    fn normalizer_round_trip(rows in prop::collection::vec(prop::array::uniform3(-1e3f64..1e3), 2..200)) {
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let norm = Normalizer::fit(&[&flat], 3).unwrap();
        let mut z = flat.clone();
        norm.apply(&mut z).unwrap();
        for c in 0..3 {
            let col: Vec<f64> = z.iter().skip(c).step_by(3).copied().collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / col.len() as f64;
            prop_assert!(mean.abs() < 1e-9);
            prop_assert!(norm.degenerate[c] || (var - 1.0).abs() < 1e-9);
        }
        norm.invert(&mut z).unwrap();
        for (a, b) in z.iter().zip(&flat) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn subsample_is_uniform() {
    // Inclusion counts over many streams against the binomial expectation.
    let (n_nodes, n, trials) = (100usize, 10usize, 5000u64);
    let mut counts = vec![0f64; n_nodes];
    for stream in 0..trials {
        for i in subsample(n_nodes, n, 21, stream).indices {
            counts[i] += 1.0;
        }
    }
    let expect = trials as f64 * n as f64 / n_nodes as f64;
    let chi2: f64 = counts.iter().map(|c| (c - expect) * (c - expect) / expect).sum();
    // 99 degrees of freedom; 150 is beyond the 0.1% tail.
    assert!(chi2 < 150.0, "chi2 {chi2}");
}

#[test]
fn normalizer_pools_tables() {
    let a = [1.0, 10.0, 3.0, 10.0];
    let b = [5.0, 10.0];
    let norm = Normalizer::fit(&[&a, &b], 2).unwrap();
    assert_eq!(norm.means, vec![3.0, 10.0]);
    assert!((norm.stds[0] - (8.0f64 / 3.0).sqrt()).abs() < 1e-15);
    assert_eq!((norm.stds[1], norm.degenerate[1]), (1.0, true));
    assert!(Normalizer::fit(&[&a[..3]], 2).is_err());
}

#[test]
fn distance_matches_brute_force() {
    let mut r = ChaCha8Rng::seed_from_u64(8);
    for params in [Naca4Params::new(0.0, 0.0, 0.12).unwrap(), Naca4Params::new(0.06, 0.3, 0.2).unwrap()] {
        for closed in [false, true] {
            let g = generate_airfoil(&AirfoilParams::Four(params), 200, Spacing::Cosine, closed).unwrap();
            let lp = g.closed_loop();
            let pts: Vec<Vec2> = (0..3000)
                .map(|k| {
                    let s = if k % 2 == 0 { 0.05 } else { 3.0 };
                    Vec2::new(r.gen_range(-s..1.0 + s), r.gen_range(-s..s))
                })
                .collect();
            let fast = signed_distance(&pts, &g);
            for (p, d) in pts.iter().zip(fast) {
                let brute = (0..lp.len())
                    .map(|i| point_segment_distance(*p, lp[i], lp[(i + 1) % lp.len()]))
                    .fold(f64::INFINITY, f64::min);
                // Same segments, possibly traversed in the other direction.
                assert!((d - brute).abs() <= 1e-14 * brute.max(1e-3), "{p:?}: {d} vs {brute}");
            }
        }
    }
}

#[test]
fn uncapped_graph_is_symmetric() {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let pts: Vec<Vec2> = (0..1500).map(|_| Vec2::new(r.gen_range(0.0..1.0), r.gen_range(0.0..1.0))).collect();
    let g = radius_graph(&pts, 0.04, usize::MAX).unwrap();
    let set: BTreeSet<(usize, usize)> = g.edges.iter().copied().collect();
    assert_eq!(set.len(), g.edges.len());
    assert!(g.edges.iter().all(|&(a, b)| a != b && set.contains(&(b, a))));
    assert!(g.edges.windows(2).all(|w| w[0].0 <= w[1].0));
    assert!(radius_graph(&pts, 0.0, 4).is_err());
}

#[test]
fn batched_inference_recovers_per_node_values() {
    let n_nodes = 10_007;
    let batches = coverage_batches(n_nodes, 1000, 4, 17);
    assert_eq!(batches.len(), 11);
    assert!(batches.iter().all(|b| b.len() == 1000));
    let seen: BTreeSet<usize> = batches.iter().flatten().copied().collect();
    assert_eq!(seen.len(), n_nodes);
    // A deterministic model gives the same value for a node in every pass.
    let passes: Vec<(Vec<usize>, Vec<f64>)> = batches
        .iter()
        .map(|b| (b.clone(), b.iter().flat_map(|&i| [i as f64, -(i as f64) * 0.5]).collect()))
        .collect();
    let avg = inference_average(n_nodes, 2, &passes).unwrap();
    for i in 0..n_nodes {
        assert_eq!((avg.values[2 * i], avg.values[2 * i + 1]), (i as f64, -(i as f64) * 0.5));
    }
    assert_eq!(avg.counts.iter().sum::<usize>(), 11_000);
    assert!(inference_average(n_nodes, 2, &passes[..10]).is_err());
}

#[test]
fn splits_partition_the_roster() {
    let roster: Vec<CaseMeta> = sample_design_space(12, 400).iter().map(CaseMeta::from).collect();
    let all: BTreeSet<&String> = roster.iter().map(|m| &m.id).collect();
    for task in [Task::Full, Task::Reynolds, Task::Aoa] {
        let s = split_dataset(&roster, task, 3).unwrap();
        assert_eq!(s, split_dataset(&roster, task, 3).unwrap());
        let train: BTreeSet<&String> = s.train_ids.iter().collect();
        let test: BTreeSet<&String> = s.test_ids.iter().collect();
        assert!(train.is_disjoint(&test));
        assert_eq!(train.union(&test).copied().collect::<BTreeSet<_>>(), all);
    }
    assert_ne!(split_dataset(&roster, Task::Full, 3).unwrap().test_ids, split_dataset(&roster, Task::Full, 4).unwrap().test_ids);
    assert!(split_dataset(&roster[..100], Task::Scarce, 3).is_err());
    let full = split_dataset(&roster, Task::Full, 3).unwrap();
    let carved = carve_validation(&full, 0.1).unwrap();
    assert_eq!((carved.train_ids.len(), carved.validation_ids.len()), (288, 32));
    assert_eq!(carved.test_ids, full.test_ids);
}

#[test]
fn features_of_a_meshed_case() {
    let case = synthetic_case(&naca4(2.0, 4.0, 12.0, 50.0, 3.0), &coarse_params(), &PowerLawLayer::default());
    let f = build_features(&case.cloud, &case.spec).unwrap();
    let u = case.spec.inlet_velocity();
    let brute = PolylineDistance::new(case.geometry.closed_loop()).unwrap();
    for (i, row) in f.inputs.iter().enumerate().step_by(97) {
        assert_eq!((row[2], row[3]), (u.x, u.y));
        assert!((row[4] - brute.distance(Vec2::new(row[0], row[1]))).abs() < 1e-12);
        assert_eq!(row[5] != 0.0 || row[6] != 0.0, case.cloud.surface[i]);
    }
    let cropped = crop(&case.cloud, &Rect::default()).unwrap();
    assert!(cropped.len() < case.cloud.len() && cropped.surface.iter().any(|&s| s));
}
