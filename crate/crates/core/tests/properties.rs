mod common;

use common::{fuzz_scene, random_masks, reference_runs, DT};
use modal_lift::io::{read_demo_from, write_demo_to};
use modal_lift::metrics::{activation_histogram, path_length};
use modal_lift::model::{
    validate_demonstration, ActivityThreshold, Demonstration, Dim, DimSet, InterfaceSpec, Pose,
    ReconstructionConfig, TrajectoryPoint,
};
use modal_lift::reconstruction::{reconstruct_demo, reconstruct_segments, time_warp};
use modal_lift::segmentation::{mask_runs, Segment};
use modal_lift::sim::{generate_demo, DemonstratorPolicy};
use modal_lift::smoothing::{butterworth_lowpass, savitzky_golay};
use nalgebra::{UnitQuaternion, Vector3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn thr() -> ActivityThreshold {
    ActivityThreshold {
        linear: 1e-9,
        angular: 1e-9,
    }
}

/// Straight leg along `dim` with an arbitrary distance channel.
fn leg(dim: Dim, n: usize, dist: f64, origin: Vector3<f64>, first: usize, clearance: &[f64]) -> Segment {
    let k = dim.index();
    let points = (0..n)
        .map(|i| {
            let mut p = TrajectoryPoint::at_rest((first + i) as f64 * DT, Pose::new(origin, UnitQuaternion::identity()), DimSet::single(dim));
            p.pose.position[k] += dist * i as f64 / (n - 1) as f64;
            if i + 1 < n {
                p.vel[k] = dist / ((n - 1) as f64 * DT);
            }
            p.obstacle_dist = clearance[i % clearance.len()];
            p
        })
        .collect();
    Segment::new(points, vec![first..first + n], &thr())
}

fn translation_dim() -> impl Strategy<Value = (Dim, Dim)> {
    (0usize..3, 1usize..3).prop_map(|(a, off)| (Dim::MOTION[a], Dim::MOTION[(a + off) % 3]))
}

fn arb_point() -> impl Strategy<Value = TrajectoryPoint> {
    (
        prop::array::uniform3(-2.0f64..2.0),
        prop::array::uniform3(-3.0f64..3.0),
        prop::array::uniform6(-1.0f64..1.0),
        0.0f64..=1.0,
        0u8..128,
        prop_oneof![Just(f64::INFINITY), 0.0f64..5.0],
    )
        .prop_map(|(p, r, v, g, bits, d)| {
            let mut pt = TrajectoryPoint::at_rest(
                0.0,
                Pose::new(Vector3::from(p), UnitQuaternion::from_scaled_axis(Vector3::from(r))),
                DimSet::from_bits(bits).unwrap(),
            );
            pt.vel = nalgebra::Vector6::from_column_slice(&v);
            pt.gripper = g;
            pt.obstacle_dist = d;
            pt
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jsonl_round_trip_is_bit_exact(points in prop::collection::vec(arb_point(), 1..40), dt in 1e-4f64..0.1) {
        let points: Vec<_> = points
            .into_iter()
            .enumerate()
            .map(|(i, mut p)| { p.t = i as f64 * dt; p })
            .collect();
        let demo = Demonstration::new(points, dt, "sippuff1d", "prop");
        let mut buf = Vec::new();
        write_demo_to(&demo, &mut buf).unwrap();
        let back = read_demo_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back, demo);
    }

    #[test]
    fn segmentation_matches_reference_and_keeps_identity(seed in any::<u64>(), eps in 1usize..120) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let masks = random_masks(&mut rng, 500);
        let runs = mask_runs(&masks, eps);
        prop_assert_eq!(&runs, &reference_runs(&masks, eps));
        for w in runs.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
        for r in &runs {
            prop_assert!(r.len() >= eps);
            prop_assert!(masks[r.clone()].iter().all(|m| *m == masks[r.start]));
        }
    }

    #[test]
    fn warp_preserves_endpoints_order_and_closest_approach(
        n in 2usize..120,
        extra in 0usize..200,
        clearance in prop::collection::vec(0.0f64..1.0, 1..30),
    ) {
        let s = leg(Dim::Vy, n, 0.25, Vector3::zeros(), 0, &clearance);
        let w = time_warp(&s, n + extra).unwrap();
        prop_assert_eq!(w.len(), n + extra);
        prop_assert_eq!(&w.points[0].pose, &s.points[0].pose);
        prop_assert_eq!(&w.points[n + extra - 1].pose, &s.points[n - 1].pose);
        prop_assert!(w.points.windows(2).all(|p| p[1].t > p[0].t && p[1].pose.position.y >= p[0].pose.position.y));
        let min = |x: &Segment| x.points.iter().map(|p| p.obstacle_dist).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(min(&w), min(&s));
    }

    #[test]
    fn composed_path_is_no_longer_than_its_parts(
        (a, b) in translation_dim(),
        n1 in 2usize..250,
        n2 in 2usize..250,
        d1 in -0.5f64..0.5,
        d2 in -0.5f64..0.5,
        c1 in prop::collection::vec(0.05f64..1.0, 1..20),
        c2 in prop::collection::vec(0.05f64..1.0, 1..20),
    ) {
        let s1 = leg(a, n1, d1, Vector3::zeros(), 0, &c1);
        let mut end = Vector3::zeros();
        end[a.index()] = d1;
        let s2 = leg(b, n2, d2, end, n1, &c2);
        let m = reconstruct_segments(&s1, &s2).unwrap();
        let len = |x: &Segment| x.points.windows(2).map(|w| (w[1].pose.position - w[0].pose.position).norm()).sum::<f64>();
        prop_assert!(len(&m) <= len(&s1) + len(&s2) + 1e-12);
        prop_assert_eq!(m.len(), n1.max(n2));
        prop_assert!((m.points.last().unwrap().pose.position - s2.points.last().unwrap().pose.position).amax() < 1e-12);
        let min = |x: &Segment| x.points.iter().map(|p| p.obstacle_dist).fold(f64::INFINITY, f64::min);
        prop_assert!(min(&m) <= min(&s1).min(min(&s2)));
        prop_assert_eq!(m.mask, s1.mask.union(s2.mask));
    }

    #[test]
    fn mask_bitstrings_round_trip(bits in 0u8..128) {
        let d = DimSet::from_bits(bits).unwrap();
        prop_assert_eq!(d.to_string().parse::<DimSet>().unwrap(), d);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fuzzed_scenes_generate_valid_reconstructible_demos(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = fuzz_scene(&mut rng, 0);
        for spec in modal_lift::builtin_interfaces() {
            let Ok(demo) = generate_demo(&scene, &DemonstratorPolicy::default(), &spec, DT, seed) else {
                continue;
            };
            prop_assert!(validate_demonstration(&demo, &spec).is_empty());
            for p in &demo.points {
                for d in Dim::MOTION {
                    prop_assert!(p.vel[d.index()] == 0.0 || p.mask.contains(d));
                }
            }
            let cfg = ReconstructionConfig::default();
            let r = reconstruct_demo(&demo, &cfg).unwrap();
            prop_assert!(r.segments_after.len() <= r.segments_before.len());
            prop_assert!(path_length(&r.reconstructed) <= path_length(&demo) + 1e-9);
            prop_assert!(activation_histogram(&demo, &cfg).max_k() <= spec.l);
        }
    }

    #[test]
    fn smoothing_keeps_duration_masks_and_cap(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = fuzz_scene(&mut rng, 0);
        let spec = InterfaceSpec::sip_puff();
        let Ok(demo) = generate_demo(&scene, &DemonstratorPolicy::default(), &spec, DT, seed) else {
            return Ok(());
        };
        let cfg = ReconstructionConfig::default();
        for s in [butterworth_lowpass(&demo, 4, 2.0).unwrap(), savitzky_golay(&demo, 11, 3).unwrap()] {
            prop_assert_eq!(s.duration(), demo.duration());
            prop_assert!(s.points.iter().zip(&demo.points).all(|(a, b)| a.mask == b.mask));
            prop_assert!(activation_histogram(&s, &cfg).max_k() <= spec.l);
        }
    }
}
