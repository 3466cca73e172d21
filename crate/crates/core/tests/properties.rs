use proptest::prelude::*;

use irsched::config::ScenarioConfig;
use irsched::irs::{circular_delta, circular_distance, quantize_phase, IrsConfiguration};
use irsched::rate::RateTable;
use irsched::sched::{self, validate};

fn cfg(k: usize, f: usize, z: usize, b_q: u32) -> ScenarioConfig {
    let mut c = ScenarioConfig::desk();
    c.k = k;
    c.f = f;
    c.z = z;
    c.b_codebook = b_q;
    c
}

/// (config, table) with K = F * slots and rates on a coarse grid so that ties occur.
fn instance() -> impl Strategy<Value = (ScenarioConfig, RateTable)> {
    (1usize..=3, 1usize..=4, 1u32..=2)
        .prop_flat_map(|(f, slots, b_q)| (Just(f), Just(slots), 1..=slots, Just(b_q)))
        .prop_flat_map(|(f, slots, z, b_q)| {
            let c = cfg(f * slots, f, z, b_q);
            let n = c.k * c.codebook_size() * c.f;
            (Just(c), prop::collection::vec(0u8..8, n))
        })
        .prop_map(|(c, r)| {
            let rates = r.into_iter().map(|x| f64::from(x) * 0.5).collect();
            let t = RateTable::from_rates(c.k, c.codebook_size(), c.f, rates).unwrap();
            (c, t)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn circular_distance_is_a_symmetric_pseudometric(
        a in prop::collection::vec(0u16..8, 1..12),
        seed in any::<u64>(),
    ) {
        let b: Vec<u16> = a.iter().enumerate().map(|(i, &x)| ((u64::from(x) + seed.rotate_left(i as u32)) % 8) as u16).collect();
        let a = IrsConfiguration::new(3, a).unwrap();
        let b = IrsConfiguration::new(3, b).unwrap();
        let ab = circular_distance(&a, &b).unwrap();
        prop_assert_eq!(ab, circular_distance(&b, &a).unwrap());
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(circular_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn quantization_picks_a_nearest_grid_point(theta in -20.0f64..20.0, bits in 1u32..6) {
        let q = quantize_phase(theta, bits);
        let levels = 1u32 << bits;
        let step = std::f64::consts::TAU / f64::from(levels);
        let d = circular_delta(theta, f64::from(q) * step);
        prop_assert!(d <= step / 2.0 + 1e-12);
    }

    #[test]
    fn schedulers_are_feasible_and_ordered((c, t) in instance()) {
        let g = sched::gmax(&t, &c).unwrap();
        let d = sched::da(&t, &c).unwrap();
        let u = sched::uoscbc(&t, &c).unwrap();
        let e = sched::exhaustive(&t, &c).unwrap();
        for grid in [&g, &d, &u, &e] {
            prop_assert!(validate(grid, &c).is_ok());
        }
        let s = |grid| sched::sum_rate(grid, &t).unwrap();
        prop_assert!(s(&g) <= s(&e) + 1e-9);
        prop_assert!(s(&d) <= s(&e) + 1e-9);
        prop_assert!(s(&u) >= s(&g) - 1e-9);
    }

    #[test]
    fn scaling_rates_preserves_decisions((c, t) in instance(), factor in 0.1f64..10.0) {
        let scaled = t.scaled(factor);
        for run in [sched::gmax, sched::da, sched::uoscbc, sched::exhaustive] {
            let a = run(&t, &c).unwrap();
            let b = run(&scaled, &c).unwrap();
            let (ra, rb) = (sched::sum_rate(&a, &t).unwrap(), sched::sum_rate(&b, &t).unwrap());
            prop_assert!((ra - rb).abs() <= 1e-9 * ra.max(1.0));
        }
    }
}
