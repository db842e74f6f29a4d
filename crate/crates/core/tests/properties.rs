use fairalloc::bc::{self, pf_allocate, symmetric_allocate, BcChannel};
use fairalloc::mac::{solve, Disagreement, MacChannel, MacCriterion, ModeChoice, ScalarMac, VectorMac};
use fairalloc::majorization::majorized_by_tol;
use fairalloc::maxmin::{maxmin_allocate, symmetric_capacity, Mode};
use fairalloc::oracle::{grid_pf_polymatroid, progressive_fill_maxmin, OracleConfig};
use fairalloc::setfn::{has_order_property, in_polyhedron, is_monotone, is_submodular, DEFAULT_TOL};
use proptest::prelude::*;

fn powers(k: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..50.0, k)
}

fn unit(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim).prop_filter_map("zero vector", |v| {
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        (n > 1e-3).then(|| v.iter().map(|a| a / n).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_rank_is_ordered_polymatroid(p in powers(1..7), n in 0.1f64..5.0) {
        let g = ScalarMac::new(p, n).unwrap().rank();
        prop_assert!(is_submodular(&g, DEFAULT_TOL).unwrap().holds_true());
        prop_assert!(is_monotone(&g, DEFAULT_TOL).unwrap().holds_true());
        prop_assert!(has_order_property(&g, DEFAULT_TOL).unwrap().holds_true());
    }

    #[test]
    fn vector_rank_is_polymatroid(
        p in powers(2..6),
        sigs in prop::collection::vec(unit(3), 5),
        n in 0.1f64..5.0,
    ) {
        let k = p.len();
        let ch = VectorMac::new(p, sigs[..k].to_vec(), n).unwrap();
        let g = ch.rank();
        prop_assert!(is_submodular(&g, DEFAULT_TOL).unwrap().holds_true());
        prop_assert!(is_monotone(&g, DEFAULT_TOL).unwrap().holds_true());
        let mmse = ch.mmse_rates().unwrap();
        prop_assert!(in_polyhedron(&g, &mmse, 1e-9).unwrap());
    }

    #[test]
    fn modes_agree_on_scalar_channels(p in powers(1..8), n in 0.1f64..5.0) {
        let g = ScalarMac::new(p, n).unwrap().rank();
        let a = maxmin_allocate(&g, Mode::Exhaustive).unwrap();
        let b = maxmin_allocate(&g, Mode::Ordered).unwrap();
        for (x, y) in a.rates.iter().zip(&b.rates) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let s1 = symmetric_capacity(&g, Mode::Exhaustive).unwrap().c_sym;
        let s2 = symmetric_capacity(&g, Mode::Ordered).unwrap().c_sym;
        prop_assert!((s1 - s2).abs() < 1e-9);
    }

    #[test]
    fn vector_maxmin_matches_filling(
        p in powers(2..5),
        sigs in prop::collection::vec(unit(2), 4),
    ) {
        let k = p.len();
        let g = VectorMac::new(p, sigs[..k].to_vec(), 1.0).unwrap().rank();
        let mm = maxmin_allocate(&g, Mode::Exhaustive).unwrap();
        let fill = progressive_fill_maxmin(&g, &OracleConfig::default()).unwrap();
        for (x, y) in mm.rates.iter().zip(&fill) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn scalar_sym_capacity_vanishes_with_weakest_user(p in powers(2..6), eps in 1e-9f64..1e-6) {
        // With one user's power near zero, C_sym tends to zero while the
        // sum capacity stays bounded away from it.
        let mut q = p.clone();
        q[0] = eps;
        let g = ScalarMac::new(q, 1.0).unwrap().rank();
        let c = symmetric_capacity(&g, Mode::Ordered).unwrap().c_sym;
        prop_assert!(c <= p.len() as f64 * 0.5 * eps.ln_1p() + 1e-15);
        prop_assert!(g.total() > 0.0);
    }

    #[test]
    fn bc_symmetric_point_is_consistent(noise in powers(1..7), p in 0.01f64..100.0) {
        let ch = BcChannel::new(noise, p).unwrap();
        let a = symmetric_allocate(&ch);
        prop_assert!(a.check(&ch, 1e-9).is_ok());
        prop_assert!(a.powers.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12)));
        prop_assert!(a.sum_rate() <= bc::bc_sum_capacity(&ch) + 1e-12);
    }

    #[test]
    fn bc_pf_rates_and_sinr_nonincreasing(noise in powers(2..6), p in 0.01f64..100.0) {
        let ch = BcChannel::new(noise, p).unwrap();
        let a = pf_allocate(&ch).unwrap();
        prop_assert!(a.check(&ch, 1e-9).is_ok());
        prop_assert!(a.rates.windows(2).all(|w| w[0] >= w[1] - 1e-9));
        prop_assert!(a.sinr.windows(2).all(|w| w[0] >= w[1] - 1e-9));
        prop_assert!(bc::pf_residual(&ch, &a) < 1e-8);
    }

    #[test]
    fn bc_pf_beats_random_boundary_points(
        noise in powers(2..5),
        p in 0.1f64..50.0,
        cuts in prop::collection::vec(0.0f64..1.0, 4),
    ) {
        let ch = BcChannel::new(noise, p).unwrap();
        let k = ch.users();
        let mut x: Vec<f64> = cuts[..k - 1].to_vec();
        x.sort_by(f64::total_cmp);
        x.push(1.0);
        let other = bc::boundary_rates(&ch, &x).unwrap();
        let pf = pf_allocate(&ch).unwrap();
        let obj = |r: &[f64]| r.iter().map(|v| v.ln()).sum::<f64>();
        prop_assert!(obj(&other) <= obj(&pf.rates) + 1e-9);
    }
}

#[test]
fn mac_nbs_matches_grid_oracle() {
    let ch = ScalarMac::new(vec![1.0, 4.0, 9.0], 1.0).unwrap();
    let g = ch.rank();
    let d = vec![0.05, 0.1, 0.0];
    let sol = solve(&MacChannel::Scalar(ch), &MacCriterion::Nbs(Disagreement::Point(d.clone())), ModeChoice::Auto)
        .unwrap();
    let grid = grid_pf_polymatroid(&g, &d, &OracleConfig::default()).unwrap();
    let obj = |r: &[f64]| r.iter().zip(&d).map(|(a, b)| (a - b).ln()).sum::<f64>();
    let best = obj(&sol.allocation.rates);
    assert!(best >= grid.objective - 1e-9);
    assert!(best - grid.objective < 1e-3);
}

#[test]
fn generic_nbs_points_are_majorization_sensible() {
    // With a zero disagreement point the NBS is the max-min point.
    let ch = MacChannel::Scalar(ScalarMac::new(vec![2.0, 8.0, 200.0, 300.0], 1.0).unwrap());
    let zero = solve(&ch, &MacCriterion::Nbs(Disagreement::Point(vec![0.0; 4])), ModeChoice::Auto).unwrap();
    let mm = solve(&ch, &MacCriterion::MaxMinPf, ModeChoice::Auto).unwrap();
    for (a, b) in zero.allocation.rates.iter().zip(&mm.allocation.rates) {
        assert!((a - b).abs() < 1e-9);
    }
    assert!(majorized_by_tol(&mm.allocation.rates, &zero.allocation.rates, 1e-9).unwrap());
}
