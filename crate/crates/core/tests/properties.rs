use circmix_core::certify::{
    box_simplex_prob, chain_bound, min_one_step_prob, omega_sum_cdf, three_step_interval_prob, PolytopeSpec,
};
use circmix_core::coupling::{marginal_density, Coordinate};
use circmix_core::kernel::density::cells;
use circmix_core::kernel::sets;
use circmix_core::spectral::{band_report, cyclicity_score, decay_curve, stationary};
use circmix_core::*;
use proptest::prelude::*;
use proptest::strategy::ValueTree;

fn small_rat(max_num: i64, den: i64) -> impl Strategy<Value = Rat> {
    (0..max_num).prop_map(move |k| rat(k, den))
}

fn unit_point() -> impl Strategy<Value = Rat> {
    (0i64..997).prop_map(|k| rat(k, 997))
}

fn base_map() -> impl Strategy<Value = PwAffineMap> {
    (1i64..6, 1i64..5, 0i64..60).prop_map(|(p, q, b)| mod1_affine(&rat(p, q), &rat(b, 60)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_pointwise(f in base_map(), g in base_map(), x in unit_point()) {
        let h = compose(&f, &g);
        prop_assert_eq!(h.eval(&x).unwrap(), f.eval(&g.eval(&x).unwrap()).unwrap());
    }

    #[test]
    fn iterates_add(b in small_rat(60, 60), m in 1usize..4, n in 1usize..4) {
        let f = mod1_affine(&rat(1, 2), &b).unwrap();
        let lhs = iterate(&f, m + n).unwrap();
        let rhs = compose(&iterate(&f, m).unwrap(), &iterate(&f, n).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn branches_partition_the_circle(f in base_map(), g in base_map()) {
        let h = compose(&f, &g);
        let br = h.branches();
        prop_assert_eq!(&br[0].lo, &Rat::zero());
        prop_assert_eq!(&br[br.len() - 1].hi, &Rat::one());
        for w in br.windows(2) {
            prop_assert_eq!(&w[0].hi, &w[1].lo);
            prop_assert!(w[0].lo < w[0].hi);
        }
    }

    #[test]
    fn ulam_step_contracts_tv(
        a in prop::collection::vec(0.0f64..1.0, 30),
        b in prop::collection::vec(0.0f64..1.0, 30),
    ) {
        let q = Kernel::default().build_ulam(30).unwrap();
        let norm = |v: Vec<f64>| { let s: f64 = v.iter().sum(); v.into_iter().map(|x| x / s).collect::<Vec<_>>() };
        let (a, b) = (norm(a), norm(b));
        let before = cells::tv(&a, &b).unwrap();
        let after = cells::tv(&q.step(&a), &q.step(&b)).unwrap();
        prop_assert!(after <= before + 1e-12);
        prop_assert!((cells::mass(&q.step(&a)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_probability_is_monotone(
        coeffs in prop::collection::vec(1i64..12, 1..4),
        t1 in 0i64..400,
        dt in 0i64..100,
    ) {
        let c: Vec<Rat> = coeffs.iter().map(|&k| rat(k, 4)).collect();
        let spec = PolytopeSpec::new(c, rat(1, 15), rat(t1, 1000)).unwrap();
        let p = box_simplex_prob(&spec);
        let q = box_simplex_prob(&spec.with_threshold(rat(t1 + dt, 1000)));
        prop_assert!(p <= q);
        prop_assert!(!p.is_negative() && p <= Rat::one());
    }

    #[test]
    fn reflected_tail_completes_the_cdf(t in 0i64..840) {
        // with u_i = w - ω_i, {Σ c ω >= t} = {Σ c u <= top - t}
        let k = Kernel::default();
        let t = rat(t, 7200);
        let top = rat(7, 60);
        prop_assert_eq!(omega_sum_cdf(&k, &t) + omega_sum_cdf(&k, &(&top - &t)), Rat::one());
    }

    #[test]
    fn three_step_partition_sums_to_one(x in 0i64..=30, cuts in prop::collection::btree_set(1i64..120, 1..6)) {
        let k = Kernel::default();
        let x = rat(x, 300);
        let mut pts = vec![Rat::zero()];
        pts.extend(cuts.iter().map(|&c| rat(c, 120)));
        pts.push(Rat::one());
        let total: Rat = pts
            .windows(2)
            .map(|w| three_step_interval_prob(&k, &x, &Interval::of(w[0].clone(), w[1].clone())).unwrap())
            .sum();
        prop_assert_eq!(total, Rat::one());
    }

    #[test]
    fn coordinate_marginals_match_the_kernel(x in 0i64..300, y in 0i64..300) {
        let k = Kernel::default();
        let (x, y) = (rat(x, 300), rat(y, 300));
        for (which, own) in [(Coordinate::First, &x), (Coordinate::Second, &y)] {
            let m = marginal_density(&k, &x, &y, which).unwrap();
            prop_assert_eq!(m.tv(&k.one_step_density(own).unwrap()), Rat::zero());
        }
    }
}

#[test]
fn one_step_infimum_is_a_lower_bound() {
    let k = Kernel::default();
    let cases = [
        (sets::t1(), sets::s0()),
        (sets::t2(), sets::s0()),
        (sets::t3(), sets::t2_t1()),
        (sets::t4(), sets::t3()),
        (Interval::of(rat(1, 7), rat(5, 7)), Interval::of(rat(1, 3), rat(2, 3))),
    ];
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for (i, j) in cases {
        let inf = min_one_step_prob(&k, &i, &j).unwrap();
        for _ in 0..100 {
            let u = (0i64..1_000_000).new_tree(&mut runner).unwrap().current();
            let x = &i.lo + i.len() * rat(u, 1_000_000);
            assert!(k.one_step_prob(&x, &j).unwrap() >= inf, "x = {x}");
        }
    }
}

#[test]
fn chain_stages_are_reproduced_individually() {
    let k = Kernel::default();
    let stages = [(sets::t4(), sets::t3()), (sets::t3(), sets::t2_t1()), (sets::t2_t1(), sets::s0())];
    let product: Rat = stages
        .iter()
        .map(|(i, j)| min_one_step_prob(&k, i, j).unwrap())
        .fold(Rat::one(), |a, b| a * b);
    assert_eq!(chain_bound(&k, &stages).unwrap(), product);
}

#[test]
fn decay_diagnostics_on_a_coarse_grid() {
    let q = Kernel::default().build_ulam(90).unwrap();
    let st = stationary(&q, 1e-12, 100_000).unwrap();
    let initials = vec![
        ("uniform".to_string(), cells::uniform(90)),
        ("cell0".to_string(), cells::point_mass(90, 0)),
    ];
    let series = decay_curve(&q, &initials, &st.density, 300).unwrap();
    assert!(series.max_increase() <= 1e-12);
    let s = &st.density;
    assert_eq!(cyclicity_score(s, s, s, s).unwrap(), 0.0);
    let d = q.propagate(&cells::uniform(90), 10).unwrap();
    assert_eq!(band_report(&d, &rat(1, 6)).unwrap(), band_report(&d, &rat(1, 6)).unwrap());
}
