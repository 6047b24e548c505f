use proptest::prelude::*;

use renewal_coupling::coupling::tv_bound_curve;
use renewal_coupling::plmp::{simulate_plmp, EventKind, PlmpDynamics, PlmpEvent, PlmpState, SimulationOptions};
use renewal_coupling::renewal::simulate_renewal;
use renewal_coupling::rng::{replicate, stream};
use renewal_coupling::{common_part, IntensitySpec};

fn law() -> impl Strategy<Value = IntensitySpec> {
    prop_oneof![
        (0.2..5.0f64).prop_map(IntensitySpec::exponential),
        (0.0..2.0f64, 0.1..3.0f64).prop_map(|(a, w)| IntensitySpec::uniform(a, a + w)),
        (0.5..6.0f64, 0.3..3.0f64).prop_map(|(k, r)| IntensitySpec::gamma(k, r)),
        (0.6..4.0f64, 0.3..3.0f64).prop_map(|(k, s)| IntensitySpec::weibull(k, s)),
        (0.1..3.0f64, 0.0..3.0f64, 0.2..2.0f64)
            .prop_map(|(a, b, x)| IntensitySpec::table(vec![[0.0, a], [x, b], [x + 1.0, a + b]])),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cdf_is_monotone_and_bounded(spec in law(), xs in prop::collection::vec(0.0..20.0f64, 2..40)) {
        let v = spec.view().unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let fs: Vec<f64> = xs.iter().map(|&x| v.cdf(x)).collect();
        prop_assert!(fs.iter().all(|f| (0.0..=1.0).contains(f)));
        prop_assert!(fs.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn quantile_round_trips(spec in law(), u in 0.001..0.999f64) {
        let v = spec.view().unwrap();
        let x = v.quantile(u).unwrap();
        prop_assert!((v.cdf(x) - u).abs() < 1e-8, "u {} x {} F {}", u, x, v.cdf(x));
    }

    #[test]
    fn residual_survival_is_conditional(spec in law(), a in 0.0..1.5f64, x in 0.0..5.0f64) {
        let v = spec.view().unwrap();
        prop_assume!(v.survival(a) > 1e-6);
        let r = v.residual(a).unwrap();
        let expect = v.survival(a + x) / v.survival(a);
        prop_assert!((r.survival(x) - expect).abs() < 1e-8 * expect.max(1e-3) + 1e-10);
    }

    #[test]
    fn common_part_is_a_probability(spec in law(), a in 0.0..2.0f64) {
        let v = spec.view().unwrap();
        prop_assume!(v.survival(a) > 1e-6);
        let k = common_part(&v, a).unwrap();
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&k));
        if a == 0.0 {
            prop_assert!((k - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn backward_plus_forward_spans_the_period(spec in law(), seed in 0u64..1000, t in 0.1..30.0f64) {
        let v = spec.view().unwrap();
        let path = simulate_renewal(&v, 0.0, 30.0, &mut stream(seed, 0)).unwrap();
        let c = path.clock(t).unwrap();
        let mut prev = 0.0;
        let mut period = None;
        for &e in &path.epochs {
            if e > t {
                period = Some(e - prev);
                break;
            }
            prev = e;
        }
        let period = period.unwrap();
        prop_assert!((c.backward + c.forward - period).abs() < 1e-9 * period.max(1.0));
        prop_assert!(c.backward >= 0.0 && c.forward > 0.0);
    }

    #[test]
    fn tv_bound_is_clipped_and_decreasing(c in 0.0..100.0f64, ell in 1u32..4) {
        let grid: Vec<f64> = (1..50).map(|i| i as f64 * 0.7).collect();
        let b = tv_bound_curve(c, ell, &grid);
        prop_assert!(b.iter().all(|x| (0.0..=1.0).contains(x)));
        prop_assert!(b.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rank_bookkeeping_is_exact(rates in prop::collection::vec(0.1..3.0f64, 6), seed in 0u64..500) {
        let r: [f64; 6] = rates.try_into().unwrap();
        let dynamics = PlmpDynamics::new()
            .add(vec![1], move |_| r[0])
            .add(vec![2, 3], move |_| r[1])
            .delete(vec![1], move |_| r[2])
            .delete(vec![2, 3], move |_| r[3])
            .zero(vec![0], move |_| r[4])
            .zero(vec![0, 1], move |_| r[5])
            .with_constant_majorant(18.0);
        let initial = PlmpState::new([(0, 0.0)]).unwrap();
        let trace = simulate_plmp(initial, &dynamics, 20.0, &SimulationOptions::event(), &mut stream(seed, 0)).unwrap();
        for e in &trace.events {
            let before = e.state_before.as_ref().unwrap();
            let after = e.state_after.as_ref().unwrap();
            prop_assert_eq!(before.rank(), e.rank_before);
            prop_assert_eq!(after.rank(), e.rank_after);
            let n = e.labels.len();
            match (&e.event, e.kind) {
                (PlmpEvent::Add(s), EventKind::Add) => {
                    prop_assert_eq!(e.rank_after, e.rank_before + n);
                    prop_assert!(s.iter().all(|l| after.clock(*l) == Some(0.0)));
                }
                (PlmpEvent::Delete(s), EventKind::Delete) => {
                    prop_assert_eq!(e.rank_after + n, e.rank_before);
                    prop_assert!(after.contains_none(s));
                }
                (PlmpEvent::Zero(s), EventKind::Zero) => {
                    prop_assert_eq!(e.rank_after, e.rank_before);
                    prop_assert!(s.iter().all(|l| after.clock(*l) == Some(0.0)));
                }
                _ => prop_assert!(false, "kind mismatch"),
            }
            // Untouched clocks carry over unchanged.
            for (l, c) in before.labels().iter().zip(before.clocks()) {
                if !e.labels.contains(l) {
                    prop_assert_eq!(after.clock(*l), Some(*c));
                }
            }
        }
    }
}

#[test]
fn replication_is_independent_of_pool_size() {
    let v = IntensitySpec::gamma(2.0, 1.0).view().unwrap();
    let run = || replicate(5, 200, |_, rng| simulate_renewal(&v, 0.0, 10.0, rng).unwrap().epochs);
    let wide = run();
    let narrow = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
    assert_eq!(wide, narrow);
}
