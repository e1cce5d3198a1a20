//! Property tests for the library invariants.

use proptest::prelude::*;

use vinepd::field::{
    build_pyramid, downsample, gradient_field, intensity_field, FiltrationKind, ScalarField,
    ValueRange,
};
use vinepd::matching::{
    match_diagrams, point_distance, solve_assignment, CostMatrix, DistanceMetric,
};
use vinepd::persistence::{betti_at, compute_pd, Degree, PersistenceDiagram, PersistencePoint};
use vinepd::synth;
use vinepd::vineyard::{stability_score, stable_diagram, track_vines, Vine, VineSegment};

proptest! {
    #[test]
    fn filtration_outputs_stay_in_unit_range(
        w in 1usize..12,
        h in 1usize..12,
        channels in prop::sample::select(vec![1usize, 3]),
        seed in any::<u64>(),
    ) {
        let img = synth::random_image(w, h, channels, seed);
        for field in [intensity_field(&img), gradient_field(&img)] {
            prop_assert!(field.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn downsample_preserves_mean_on_even_dims(
        w in 1usize..8,
        h in 1usize..8,
        seed in any::<u64>(),
    ) {
        // Dyadic lattice values keep every partial sum exact in f64, so the
        // mean of block means equals the global mean bit-for-bit.
        let field = synth::lattice_field(2 * w, 2 * h, 256, seed);
        let down = downsample(&field);
        let mean = |f: &ScalarField| f.values().iter().sum::<f64>() / f.len() as f64;
        prop_assert_eq!(mean(&field), mean(&down));
    }

    #[test]
    fn pyramid_base_is_bit_identical(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
        let field = synth::lattice_field(w, h, 255, seed);
        let pyramid = build_pyramid(&field, 3, FiltrationKind::Intensity);
        prop_assert_eq!(&pyramid.levels()[0], &field);
    }

    #[test]
    fn diagram_values_come_from_the_input(
        w in 1usize..9,
        h in 1usize..9,
        seed in any::<u64>(),
    ) {
        let field = synth::lattice_field(w, h, 9, seed);
        let pd = compute_pd(&field, 1, FiltrationKind::Intensity);
        for p in &pd.points {
            prop_assert!(field.values().contains(&p.birth));
            prop_assert!(field.values().contains(&p.death));
        }
    }

    #[test]
    fn degree_zero_count_equals_regional_max_plateaus(
        w in 1usize..10,
        h in 1usize..10,
        seed in any::<u64>(),
    ) {
        let field = synth::lattice_field(w, h, 6, seed);
        let pd = compute_pd(&field, 1, FiltrationKind::Intensity);
        let count = pd.points_of_degree(Degree::Zero).len();
        prop_assert_eq!(count, regional_max_plateaus(&field));
    }

    #[test]
    fn oracle_agrees_on_small_plateau_fields(
        w in 1usize..7,
        h in 1usize..7,
        seed in any::<u64>(),
    ) {
        let field = synth::lattice_field(w, h, 7, seed);
        let fast = compute_pd(&field, 1, FiltrationKind::Intensity);
        let slow = vinepd::oracle::oracle_pd(&field).unwrap();
        prop_assert_eq!(fast.points, slow.points);
    }

    #[test]
    fn euler_characteristic_matches_at_every_threshold(
        w in 1usize..9,
        h in 1usize..9,
        seed in any::<u64>(),
    ) {
        let field = synth::lattice_field(w, h, 8, seed);
        let pd = compute_pd(&field, 1, FiltrationKind::Intensity);
        let mut thresholds: Vec<f64> = field.values().to_vec();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        for tau in thresholds {
            let (b0, b1) = betti_at(&pd, tau);
            let (v, e, f) = complex_counts(&field, tau);
            prop_assert_eq!(b0 as i64 - b1 as i64, v as i64 - e as i64 + f as i64);
        }
    }

    #[test]
    fn point_distances_are_symmetric_and_ordered(
        b1 in 0.0f64..1.0, p1 in 0.0f64..1.0,
        b2 in 0.0f64..1.0, p2 in 0.0f64..1.0,
    ) {
        let p = PersistencePoint::new(Degree::Zero, b1, b1 - p1.min(b1), false);
        let q = PersistencePoint::new(Degree::Zero, b2, b2 - p2.min(b2), false);
        let euclid = point_distance(&p, &q, DistanceMetric::Euclidean).unwrap();
        let scaled = point_distance(&p, &q, DistanceMetric::PersistenceScaled).unwrap();
        let relative = point_distance(&p, &q, DistanceMetric::RelativePersistence).unwrap();
        for metric in [
            DistanceMetric::Euclidean,
            DistanceMetric::PersistenceScaled,
            DistanceMetric::RelativePersistence,
        ] {
            let forward = point_distance(&p, &q, metric).unwrap();
            let backward = point_distance(&q, &p, metric).unwrap();
            prop_assert_eq!(forward, backward);
            prop_assert!(forward >= 0.0);
        }
        // Scale factors are >= 1 (relative) and divisors >= 1 (scaled).
        prop_assert!(relative >= euclid - 1e-15);
        prop_assert!(euclid >= scaled - 1e-15);
    }

    #[test]
    fn assignment_cost_is_minimal_for_tiny_matrices(
        n in 1usize..5,
        seed in any::<u64>(),
    ) {
        let mut rng = synth::SplitMix64::new(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| (rng.next_f64() * 8.0).round() / 2.0).collect())
            .collect();
        let m = CostMatrix::from_rows(rows);
        let pairs = solve_assignment(&m);
        let cost: f64 = pairs.iter().map(|&(r, c)| m.get(r, c)).sum();
        let best = permutations_min(&m);
        prop_assert!((cost - best).abs() < 1e-9);
    }

    #[test]
    fn matches_never_exceed_threshold(
        seed in any::<u64>(),
        tau in 0.0f64..0.6,
    ) {
        let a = random_diagram(seed, 1);
        let b = random_diagram(seed.wrapping_add(1), 2);
        let result = match_diagrams(&a, &b, Degree::Zero, DistanceMetric::RelativePersistence, tau);
        prop_assert!(result.pairs.iter().all(|&(_, _, d)| d <= tau));
        let mut rows: Vec<usize> = result.pairs.iter().map(|&(r, _, _)| r).collect();
        rows.extend(&result.unmatched_a);
        rows.sort_unstable();
        let n_a = a.points_of_degree(Degree::Zero).len();
        prop_assert_eq!(rows, (0..n_a).collect::<Vec<_>>());
    }

    #[test]
    fn stability_stays_in_half_open_unit_interval(
        distances in prop::collection::vec(0.0f64..3.0, 1..6),
        persistences in prop::collection::vec(0.0f64..1.0, 6),
    ) {
        let segments: Vec<VineSegment> = distances
            .iter()
            .enumerate()
            .map(|(i, &d)| VineSegment {
                scale_from: i as u32 + 1,
                point_from: PersistencePoint::new(Degree::Zero, persistences[i], 0.0, false),
                point_to: PersistencePoint::new(Degree::Zero, persistences[i + 1], 0.0, false),
                distance: d,
                pers_from: persistences[i],
                pers_to: persistences[i + 1],
            })
            .collect();
        let all_zero = segments.iter().all(|s| s.distance == 0.0);
        let vine = Vine {
            degree: Degree::Zero,
            segments,
            birth_scale: 1,
            death_scale: distances.len() as u32 + 1,
        };
        let sigma = stability_score(&vine);
        prop_assert!(sigma > 0.0 && sigma <= 1.0);
        prop_assert_eq!(sigma == 1.0, all_zero);
    }

    #[test]
    fn lowering_stability_threshold_only_adds_points(
        seed in any::<u64>(),
        lo in 0.0f64..1.0,
        hi in 0.0f64..1.0,
    ) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let pds: Vec<PersistenceDiagram> = (1..=3)
            .map(|s| random_diagram(seed.wrapping_mul(s as u64 + 1), s))
            .collect();
        let vines =
            track_vines(&pds, Degree::Zero, DistanceMetric::RelativePersistence, 0.4).unwrap();
        let strict = stable_diagram(&vines, hi, FiltrationKind::Intensity);
        let loose = stable_diagram(&vines, lo, FiltrationKind::Intensity);
        for point in &strict.points {
            prop_assert!(loose.points.contains(point));
        }
    }

    #[test]
    fn tracking_is_reproducible(seed in any::<u64>()) {
        let pds: Vec<PersistenceDiagram> = (1..=4)
            .map(|s| random_diagram(seed.wrapping_mul(s as u64 + 7), s))
            .collect();
        for tau in [0.05, 0.2, 0.5] {
            let a = track_vines(&pds, Degree::Zero, DistanceMetric::RelativePersistence, tau)
                .unwrap();
            let b = track_vines(&pds, Degree::Zero, DistanceMetric::RelativePersistence, tau)
                .unwrap();
            prop_assert_eq!(a, b);
        }
    }
}

fn random_diagram(seed: u64, scale: u32) -> PersistenceDiagram {
    let mut rng = synth::SplitMix64::new(seed);
    let count = rng.next_below(6) as usize;
    let points = (0..count)
        .map(|_| {
            let death = rng.next_f64() * 0.5;
            let birth = death + rng.next_f64() * (1.0 - death);
            PersistencePoint::new(Degree::Zero, birth, death, false)
        })
        .collect();
    PersistenceDiagram::new(points, scale, FiltrationKind::Intensity)
}

fn permutations_min(m: &CostMatrix) -> f64 {
    let n = m.rows();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut indices, 0, &mut |perm| {
        let cost: f64 = perm.iter().enumerate().map(|(r, &c)| m.get(r, c)).sum();
        if cost < best {
            best = cost;
        }
    });
    best
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Connected equal-value regions with no strictly greater 4-neighbor.
fn regional_max_plateaus(field: &ScalarField) -> usize {
    let (w, h) = (field.width(), field.height());
    let n = w * h;
    let mut visited = vec![false; n];
    let mut count = 0usize;
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let value = field.values()[start];
        let mut stack = vec![start];
        let mut region = Vec::new();
        visited[start] = true;
        let mut is_max = true;
        while let Some(p) = stack.pop() {
            region.push(p);
            let (r, c) = (p / w, p % w);
            let mut neighbors = Vec::new();
            if r > 0 {
                neighbors.push(p - w);
            }
            if r + 1 < h {
                neighbors.push(p + w);
            }
            if c > 0 {
                neighbors.push(p - 1);
            }
            if c + 1 < w {
                neighbors.push(p + 1);
            }
            for nb in neighbors {
                let nv = field.values()[nb];
                if nv > value {
                    is_max = false;
                } else if nv == value && !visited[nb] {
                    visited[nb] = true;
                    stack.push(nb);
                }
            }
        }
        if is_max {
            count += 1;
        }
    }
    count
}

/// Vertices, edges, and filled squares of the thresholded complex.
fn complex_counts(field: &ScalarField, tau: f64) -> (usize, usize, usize) {
    let (w, h) = (field.width(), field.height());
    let present = |r: usize, c: usize| field.get(r, c) >= tau;
    let mut v = 0;
    let mut e = 0;
    let mut f = 0;
    for r in 0..h {
        for c in 0..w {
            if present(r, c) {
                v += 1;
            }
            if c + 1 < w && present(r, c) && present(r, c + 1) {
                e += 1;
            }
            if r + 1 < h && present(r, c) && present(r + 1, c) {
                e += 1;
            }
            if r + 1 < h
                && c + 1 < w
                && present(r, c)
                && present(r, c + 1)
                && present(r + 1, c)
                && present(r + 1, c + 1)
            {
                f += 1;
            }
        }
    }
    (v, e, f)
}
