mod common;

use proptest::prelude::*;
use rand::Rng;

use twinbench_core::geometry::{generate_rig, welzl_ses, CameraRigSpec};
use twinbench_core::metrics::{background_mask, ssim_map, weighted_score};
use twinbench_core::pose::pair_by_frame;
use twinbench_core::{samples, PoseSet, RasterImage};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ses_matches_exhaustive_search(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = common::rng(seed);
        let pts = common::random_points(&mut rng, n);
        let s = welzl_ses(&pts).unwrap();
        let (center, r) = common::brute_force_ses(&pts);
        prop_assert!((s.radius - r).abs() < 1e-9, "radius {} vs {}", s.radius, r);
        prop_assert!((s.center - center).norm() < 1e-6);
        for p in &pts {
            prop_assert!(s.contains(p, 1e-9));
        }
    }

    #[test]
    fn ssim_map_matches_brute_force(seed in any::<u64>(), w in 11usize..=128, h in 11usize..=128) {
        let mut rng = common::rng(seed);
        let a = common::random_image(&mut rng, w, h);
        let b = common::random_image(&mut rng, w, h);
        let map = ssim_map(&a, &b, 11).unwrap();
        prop_assert_eq!((map.width, map.height), (w - 10, h - 10));
        // spot-check a seeded selection of windows plus the corners
        let mut probes = vec![(0, 0), (map.width - 1, map.height - 1)];
        probes.extend((0..32).map(|_| (rng.random_range(0..map.width), rng.random_range(0..map.height))));
        for (x, y) in probes {
            let expected = common::brute_force_ssim(&a, &b, 11, x, y);
            prop_assert!((map.get(x, y) - expected).abs() < 1e-9, "({x},{y}): {} vs {expected}", map.get(x, y));
        }
    }

    /// Zero weight exactly where both window centers are background.
    #[test]
    fn mask_drops_only_shared_background(seed in any::<u64>(), density in 0.0f64..0.2) {
        let mut rng = common::rng(seed);
        let bg = [255, 255, 255];
        let mut a = RasterImage::filled(40, 30, bg);
        let mut b = RasterImage::filled(40, 30, bg);
        for img in [&mut a, &mut b] {
            for y in 0..30 {
                for x in 0..40 {
                    if rng.random_bool(density) {
                        img.set(x, y, [rng.random(), rng.random(), 0]);
                    }
                }
            }
        }
        let mask = background_mask(&a, &b, bg, 11).unwrap();
        prop_assert_eq!(mask.len(), 30 * 20);
        for y in 0..20 {
            for x in 0..30 {
                let shared_bg = a.get(x + 5, y + 5) == bg && b.get(x + 5, y + 5) == bg;
                prop_assert_eq!(mask[y * 30 + x] == 0, shared_bg);
            }
        }
        if let Ok(score) = weighted_score(&a, &b, bg, 11) {
            prop_assert_eq!(score.foreground_px, mask.iter().filter(|&&m| m != 0).count());
        }
    }
}

#[test]
fn partial_pose_file_pairs_half_the_frames() {
    let gt = generate_rig(&samples::unit_cube(), &CameraRigSpec::default()).unwrap();
    let est = PoseSet::new(gt.iter().filter(|p| p.frame < 50).rev().copied().collect());
    let (paired_est, paired_gt, unmatched) = pair_by_frame(&est, &gt);
    assert_eq!((paired_est.len(), paired_gt.len(), unmatched), (50, 50, 50));
    for (e, g) in paired_est.iter().zip(paired_gt.iter()) {
        assert_eq!(e.frame, g.frame);
    }
}
