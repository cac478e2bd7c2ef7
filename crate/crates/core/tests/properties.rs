//! Randomized invariants across modules.

use hydrosem::analysis::{interference_frequencies, interference_minima, lloyd_bandwidth, LloydGeometry};
use hydrosem::scenario::{parse_config, preset, PRESET_NAMES};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edited_configs_round_trip(
        which in 0..PRESET_NAMES.len(),
        nx in 1usize..500,
        nz in 1usize..20,
        px in 1usize..=8,
        t_end in 0.5f64..2000.0,
        seed in any::<u64>(),
    ) {
        let mut cfg = preset(PRESET_NAMES[which]).unwrap();
        cfg.discretization.nx = nx;
        cfg.discretization.nz = nz;
        cfg.discretization.px = px;
        cfg.run.t_end = t_end;
        cfg.run.seed = seed;
        prop_assert_eq!(parse_config(&cfg.to_ini()).unwrap(), cfg);
    }

    #[test]
    fn minimum_frequencies_match_minimum_angles(
        depth in 200.0f64..3000.0,
        sin_theta in 0.01f64..1.0,
        c in 1400.0f64..1600.0,
    ) {
        let g = LloydGeometry { source_depth: depth, sound_speed: c, sin_theta };
        let df = lloyd_bandwidth(&g).unwrap();
        prop_assert!((df - c / (2.0 * depth * sin_theta)).abs() <= 1e-9 * df);
        // each minimum frequency puts the receiver angle on a minimum of the angle form
        for (m, f) in interference_frequencies(&g, 20.0 * df).unwrap().into_iter().enumerate().skip(1) {
            let k = 2.0 * std::f64::consts::PI * f / c;
            let angles = interference_minima(depth, k);
            prop_assert!(angles.len() > m);
            prop_assert!((angles[m] - sin_theta).abs() <= 1e-9);
        }
    }
}
