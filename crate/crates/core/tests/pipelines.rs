use siegellab::count::{self, CountQuery};
use siegellab::equidist::{self, Observable};
use siegellab::flag::{self, FlagPoint, GrassmannModel};
use siegellab::lattice::{self, ModularSample};
use siegellab::siegel::{self, TestFunction};

#[test]
fn mean_value_for_ball_and_bump() {
    for f in [TestFunction::Ball { r: 1.0 }, TestFunction::Bump { s: 1.5 }] {
        let r = siegel::mean_value_mc(&f, 50_000, 5).unwrap();
        assert!(r.z_score.abs() <= 3.5, "{f:?}: {r:?}");
    }
}

#[test]
fn annulus_supremum_plateaus_and_cusp_ratio_is_bounded() {
    let f = TestFunction::Annulus { r0: 1.0, r1: 2.0 };
    let p = siegel::sup_bound_probe(&f, 40_000, 9).unwrap();
    assert!(p.linf_flag, "{p:?}");
    // S f * lambda_1^2 along the cusp family stays below the sampled constant
    for y in [4.0, 25.0, 100.0] {
        let lat = ModularSample { x: 0.1, y, theta: 0.4 }.lattice();
        let s = siegel::siegel_eval(&f, &lat).unwrap().value;
        let l = lattice::shortest_vector(&lat).unwrap().1;
        assert!(s * l * l <= p.c_hat.max(8.0), "y = {y}");
    }
}

#[test]
fn truncation_gap_shrinks_with_delta() {
    // the annulus never sees a lattice with lambda_1 < 1/2, so use a ball that contains the short vectors
    let f = TestFunction::Ball { r: 1.5 };
    let gaps = siegel::truncation_gaps(&f, &[0.4, 0.2, 0.1], 100_000, 3).unwrap();
    assert!(gaps[0].1 > gaps[1].1 && gaps[1].1 > gaps[2].1 && gaps[2].1 > 0.0, "{gaps:?}");
}

#[test]
fn supercritical_exponent_saturates() {
    let model = GrassmannModel::new(1, 2).unwrap();
    let mut saturated = 0;
    for m in 0..50 {
        let x = count::ensemble_point(&model, 4, m);
        let n = |t: f64| count::count_approximations(&CountQuery::new(&x, 1.0, 2.8, t).unwrap()).unwrap();
        saturated += u32::from(n(2e5) == n(1e5));
    }
    assert!(saturated >= 45, "{saturated}/50");
}

#[test]
fn orbit_average_at_large_y_matches_haar_mean() {
    let phi = Observable::cusp(0.5).unwrap();
    let (_, se) = equidist::haar_mean_mc(&phi, 40_000, 2).unwrap();
    let base = equidist::base_ensemble(1, 11).remove(0);
    let avg = equidist::k_orbit_average(&phi, 1e4, &base, 1 << 10).unwrap();
    assert!((avg.value - equidist::haar_mean(&phi)).abs() < 3.0 * se, "{avg:?} vs {}", equidist::haar_mean(&phi));
}

#[test]
fn rational_base_point_reduction_identity() {
    let model = GrassmannModel::new(2, 4).unwrap();
    let x = FlagPoint::base_point(&model);
    let r = siegel::reduction_identity_check(&x, 6.0, &model).unwrap();
    assert!(r.equal && r.lhs >= 1, "{r:?}");
}

#[test]
fn kappa_oracle_matches_monte_carlo_cone_volume() {
    for (l, n) in [(1, 2), (1, 3), (2, 4)] {
        let model = GrassmannModel::new(l, n).unwrap();
        let (mc, se) = flag::cone_volume_f_mc(&model, 1.0, 200_000, 6).unwrap();
        let q = flag::cone_volume_f_quadrature(&model, 1.0);
        assert!((mc - q).abs() < 4.0 * se, "{model}: {mc} ± {se} vs {q}");
        assert!((count::kappa_oracle(&model, 1.0).value - q / 2.0).abs() < 1e-12);
    }
}
