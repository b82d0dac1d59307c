use dht_rcm::analytic::{routability, tree_closed_form, DenominatorMode, PhaseFailureModel};
use dht_rcm::harness::format_real;
use dht_rcm::sim::{estimate_routability, SimSeeds};
use dht_rcm::{GeometryKind, GeometrySpec};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = GeometryKind> {
    prop::sample::select(GeometryKind::ALL.to_vec())
}

fn model(kind: GeometryKind, d: u32, q: f64) -> PhaseFailureModel {
    PhaseFailureModel::new(GeometrySpec::new(kind, d).unwrap(), q).unwrap()
}

proptest! {
    #[test]
    fn phase_failure_is_a_probability(kind in kind(), d in 1u32..=100, q in 0.0f64..0.99) {
        let m = model(kind, d, q);
        for h in 1..=d {
            let f = m.phase_failure(h).unwrap();
            prop_assert!((0.0..=1.0).contains(&f), "Q({h}) = {f}");
        }
    }

    #[test]
    fn path_success_falls_with_distance(kind in kind(), d in 1u32..=100, q in 0.0f64..0.99) {
        let curve = model(kind, d, q).success_curve(d);
        prop_assert!(curve.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(curve.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn path_success_falls_with_q(
        kind in kind(),
        d in 2u32..=64,
        q1 in 0.0f64..0.95,
        dq in 0.0f64..0.04,
    ) {
        let q2 = q1 + dq;
        let a = model(kind, d, q1).success_curve(d);
        let b = model(kind, d, q2).success_curve(d);
        for (h, (x, y)) in a.iter().zip(&b).enumerate() {
            prop_assert!(y <= &(x + 1e-15), "h={} p({q1})={x} p({q2})={y}", h + 1);
        }
    }

    #[test]
    fn ring_phases_never_fail_more_than_xor(d in 1u32..=100, q in 0.0f64..0.99) {
        let ring = model(GeometryKind::Ring, d, q);
        let xor = model(GeometryKind::Xor, d, q);
        for m in 1..=d {
            let (r, x) = (ring.phase_failure(m).unwrap(), xor.phase_failure(m).unwrap());
            prop_assert!(r <= x * (1.0 + 1e-12) + 1e-300, "m={m}: ring {r} xor {x}");
        }
    }

    #[test]
    fn tree_paths_are_the_most_fragile(d in 1u32..=100, q in 0.0f64..0.95) {
        let tree = model(GeometryKind::Tree, d, q).success_curve(d);
        for kind in [GeometryKind::Hypercube, GeometryKind::Xor, GeometryKind::Ring] {
            let other = model(kind, d, q).success_curve(d);
            for (h, (t, o)) in tree.iter().zip(&other).enumerate() {
                prop_assert!(t <= &(o * (1.0 + 1e-12)), "{kind} h={}: tree {t} vs {o}", h + 1);
            }
        }
    }

    #[test]
    fn tree_is_least_routable_among_binomial_profiles(d in 2u32..=100, q in 0.0f64..0.9) {
        let tree = routability(&GeometrySpec::tree(d).unwrap(), q, DenominatorMode::ExactSurvivors).unwrap();
        for kind in [GeometryKind::Hypercube, GeometryKind::Xor] {
            let other = routability(&GeometrySpec::new(kind, d).unwrap(), q, DenominatorMode::ExactSurvivors).unwrap();
            prop_assert!(tree.routability <= other.routability * (1.0 + 1e-12), "{kind}");
        }
    }

    #[test]
    fn tree_closed_form_matches_pipeline(d in 2u32..=100, q in 0.0f64..0.9) {
        let spec = GeometrySpec::tree(d).unwrap();
        match (tree_closed_form(d, q), routability(&spec, q, DenominatorMode::PaperPN)) {
            (Ok(closed), Ok(r)) => {
                let rel = (closed - r.unclamped).abs() / closed.abs().max(f64::MIN_POSITIVE);
                prop_assert!(rel <= 1e-12, "closed {closed} pipeline {}", r.unclamped);
            }
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert!(false, "disagree: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn routability_and_failure_sum_to_one(kind in kind(), d in 2u32..=100, q in 0.0f64..0.9, exact in any::<bool>()) {
        let mode = if exact { DenominatorMode::ExactSurvivors } else { DenominatorMode::PaperPN };
        if let Ok(r) = routability(&GeometrySpec::new(kind, d).unwrap(), q, mode) {
            prop_assert_eq!(r.routability + r.failed_fraction, 1.0);
            prop_assert!((0.0..=1.0).contains(&r.routability));
        }
    }

    #[test]
    fn formatted_reals_keep_ten_digits(x in prop::num::f64::NORMAL) {
        let back: f64 = format_real(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-10 * x.abs(), "{x} -> {}", format_real(x));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn simulation_is_reproducible(kind in kind(), d in 2u32..=8, q in 0.0f64..0.6, seed in any::<u64>()) {
        let spec = GeometrySpec::new(kind, d).unwrap();
        let seeds = SimSeeds::from_master(seed);
        let a = estimate_routability(&spec, q, 3, 40, seeds).unwrap();
        let b = estimate_routability(&spec, q, 3, 40, seeds).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!((0.0..=1.0).contains(&a.routable_fraction));
        prop_assert_eq!(a.hop_cap_hits, 0);
    }
}
