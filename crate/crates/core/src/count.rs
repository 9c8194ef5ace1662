//! Counting rational approximations `N_{c,tau}(x, T)`, the `ln T` law at the
//! critical exponent, and the cone-volume prediction of its slope.
//!
//! Lines are counted with a tube scan around `x` ([`lattice::tube_candidates`]),
//! hyperplanes through their normal line, and `Gr(2, 4)` from the full list of
//! rational planes.

use std::f64::consts::E;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flag::{self, ConeVector, FlagPoint, GrassmannModel, RationalSubspace, RegionSpec};
use crate::lattice;
use crate::numeric::fit_line;
use crate::siegel;
use crate::{intmat, rng, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CountQuery {
    pub model: GrassmannModel,
    pub x: FlagPoint,
    pub c: f64,
    pub tau: f64,
    pub t: f64,
}

impl CountQuery {
    pub fn new(x: &FlagPoint, c: f64, tau: f64, t: f64) -> Result<Self> {
        let model = x.model.clone();
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Invalid(format!("c must be positive, got {c}")));
        }
        if !(tau >= 0.0 && tau <= model.beta_f64() + 1.0) {
            return Err(Error::Invalid(format!("tau must lie in [0, beta + 1], got {tau}")));
        }
        if !(t >= 1.0 && t.is_finite()) {
            return Err(Error::Invalid(format!("T must be finite and >= 1, got {t}")));
        }
        Ok(CountQuery { model, x: x.clone(), c, tau, t })
    }
}

/// `N_{c,tau}(x, T)`.
pub fn count_approximations(q: &CountQuery) -> Result<u64> {
    Ok(approximation_heights(&q.x, q.c, q.tau, q.t)?.len() as u64)
}

/// Counts the subspaces of `points` with `d(x, v) < c H(v)^{-tau}` and `1 <= H(v) < t`.
pub fn count_in_list(x: &FlagPoint, c: f64, tau: f64, t: f64, points: &[RationalSubspace]) -> Result<u64> {
    let px = x.plucker();
    let mut n = 0;
    for v in points {
        let h = v.height();
        if h >= 1.0 && h < t && flag::distance(&px, &v.plucker_f64())? < c * h.powf(-tau) {
            n += 1;
        }
    }
    Ok(n)
}

/// Sorted heights of all approximations counted by `N_{c,tau}(x, t)`.
pub fn approximation_heights(x: &FlagPoint, c: f64, tau: f64, t: f64) -> Result<Vec<f64>> {
    let model = &x.model;
    let mut hs = if model.ell == 1 {
        line_heights(&x.frame[0], c, tau, t)?
    } else if model.ell + 1 == model.n {
        // the Hodge star is an isometry sending a hyperplane to its normal line
        // and preserving heights of primitive vectors
        let k = x.rotation();
        let normal: Vec<f64> = k.column(model.n - 1).iter().copied().collect();
        line_heights(&normal, c, tau, t)?
    } else {
        let pts = flag::enumerate_rational_points(model, t)?;
        let px = x.plucker();
        let mut hs = vec![];
        for v in &pts {
            let h = v.height();
            if h >= 1.0 && flag::distance(&px, &v.plucker_f64())? < c * h.powf(-tau) {
                hs.push(h);
            }
        }
        hs
    };
    hs.sort_by(f64::total_cmp);
    Ok(hs)
}

/// Slack on tube radii so that boundary candidates are never lost to rounding.
fn widen(r: f64) -> f64 {
    r * (1.0 + 1e-9) + 1e-9
}

fn tube_guard(n: usize, m_max: i64, rho: &dyn Fn(i64) -> f64) -> Result<()> {
    let mut work = 0.0;
    for m in 0..=m_max {
        work += (2.0 * rho(m) + 1.0).powi(n as i32 - 1);
        if work > flag::ENUMERATION_GUARD {
            return Err(Error::ResourceGuard(format!("tube scan would visit more than {:.0e} candidates", flag::ENUMERATION_GUARD)));
        }
    }
    Ok(())
}

fn line_heights(x: &[f64], c: f64, tau: f64, t: f64) -> Result<Vec<f64>> {
    let n = x.len();
    if t > 1e8 {
        return Err(Error::ResourceGuard(format!("T = {t} is beyond the tube scan range")));
    }
    let m_max = t.floor() as i64;
    // orthogonal distance of v from the line is |v| sin d < c |v|^{1 - tau}, and |v| >= max(|v_j|, 1)
    let rho = |m: i64| {
        let w = if tau >= 1.0 { c * (m.max(1) as f64).powf(1.0 - tau) } else { c * t.powf(1.0 - tau) };
        widen(std::f64::consts::SQRT_2 * w.min(t))
    };
    tube_guard(n, m_max, &rho)?;
    let t2 = t * t;
    let j = dominant_axis(x);
    let mut hs = vec![];
    lattice::tube_candidates(x, m_max, rho, |v| {
        if !slice_representative(v, j) || !intmat::is_primitive(v) {
            return;
        }
        let h2 = v.iter().map(|&a| (a * a) as f64).sum::<f64>();
        if h2 >= t2 {
            return;
        }
        let h = h2.sqrt();
        let vf: Vec<f64> = v.iter().map(|&a| a as f64).collect();
        if flag::distance(x, &vf).is_ok_and(|d| d < c * h.powf(-tau)) {
            hs.push(h);
        }
    });
    Ok(hs)
}

/// Each line meets the slices `v_j = m >= 0` once, except in the slice `m = 0`
/// where both `v` and `-v` appear.
fn slice_representative(v: &[i64], j: usize) -> bool {
    v[j] > 0 || flag::line_canonical(v)
}

fn dominant_axis(x: &[f64]) -> usize {
    (0..x.len()).max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs())).unwrap_or(0)
}

/// Number of heights `< t` for each `t` in the grid.
pub fn profile(heights: &[f64], t_grid: &[f64]) -> Vec<u64> {
    t_grid.iter().map(|&t| heights.partition_point(|&h| h < t) as u64).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BirkhoffCount {
    pub total: u64,
    pub per_cell: Vec<u64>,
}

/// `sum_{i < N} S 1_{F_c}(a(y_i) k_x^{-1} Gamma)`.
pub fn birkhoff_count(x: &FlagPoint, c: f64, n_cells: usize) -> Result<BirkhoffCount> {
    let model = &x.model;
    let kinv = x.rotation().transpose();
    let f = RegionSpec::f(model, c)?;
    let per_cell = (0..n_cells)
        .into_par_iter()
        .map(|i| {
            let g = flag::cell_flow(model, i).matrix() * &kinv;
            Ok(siegel::siegel_eval_region(&f, &g, model)?.terms)
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(BirkhoffCount { total: per_cell.iter().sum(), per_cell })
}

/// `#(k_x^{-1} P_chi ∩ E^+_{T,c})` with `c T = e^N`, for lines.
///
/// Members of `E^+` have `|w^+| < e^N` and orthogonal part `< c |w^+|^{1 - beta} <= c`,
/// so a tube of radius `c` around `x` holds every candidate. Both signs of each
/// primitive vector are tested.
pub fn direct_region_count(x: &FlagPoint, c: f64, n_cells: usize) -> Result<u64> {
    let model = &x.model;
    if model.ell != 1 {
        return Err(Error::Invalid(format!("direct region count is implemented for lines, got {model}")));
    }
    let region = RegionSpec::eplus(model, (n_cells as f64).exp() / c, c)?;
    let kinv = x.rotation().transpose();
    let top = (n_cells as f64).exp() + c;
    let rho = |_| widen(std::f64::consts::SQRT_2 * c);
    tube_guard(model.n, top.floor() as i64, &rho)?;
    let j = dominant_axis(&x.frame[0]);
    let mut count = 0;
    let mut err = None;
    lattice::tube_candidates(&x.frame[0], top.floor() as i64, rho, |v| {
        if !slice_representative(v, j) || !intmat::is_primitive(v) {
            return;
        }
        for s in [1.0, -1.0] {
            let p = nalgebra::DVector::from_iterator(v.len(), v.iter().map(|&a| s * a as f64));
            match ConeVector::new(model, (&kinv * p).iter().copied().collect()) {
                Ok(w) => count += u64::from(flag::region_contains(&region, &w)),
                Err(e) => err = Some(e),
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(count),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// `(ln T, N)` pairs.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares fit of `N` against `ln T`.
pub fn slope_fit(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 4 {
        return Err(Error::Invalid(format!("a slope fit needs at least 4 grid points, got {}", points.len())));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::Invalid("the T grid must be strictly increasing".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let f = fit_line(&xs, &ys);
    Ok(SlopeFit { points: points.to_vec(), slope: f.slope, intercept: f.intercept, r2: f.r2.clamp(0.0, 1.0) })
}

/// `x` for ensemble member `member`.
pub fn ensemble_point(model: &GrassmannModel, seed: u64, member: u64) -> FlagPoint {
    flag::sample_uniform_point(model, &mut rng::stream(seed, rng::streams::FLAG_POINT, member))
}

/// `N_{c,tau}(x_m, T)` for each member `m` and each `T` of the grid.
pub fn ensemble_counts(model: &GrassmannModel, c: f64, tau: f64, t_grid: &[f64], members: u64, seed: u64) -> Result<Vec<Vec<u64>>> {
    let t_max = t_grid.iter().copied().fold(1.0, f64::max);
    (0..members)
        .into_par_iter()
        .map(|m| {
            let x = ensemble_point(model, seed, m);
            Ok(profile(&approximation_heights(&x, c, tau, t_max)?, t_grid))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleFit {
    pub fit: SlopeFit,
    pub members: u64,
    /// Mean and standard deviation of the per-member slopes.
    pub member_slope_mean: f64,
    pub member_slope_sd: f64,
}

/// Fits the ensemble mean curve and reports the spread of per-member slopes.
pub fn ensemble_fit(t_grid: &[f64], counts: &[Vec<u64>]) -> Result<EnsembleFit> {
    if counts.is_empty() {
        return Err(Error::Invalid("empty ensemble".into()));
    }
    let ln_t: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
    let k = counts.len() as f64;
    let mean: Vec<(f64, f64)> = ln_t
        .iter()
        .enumerate()
        .map(|(j, &l)| (l, counts.iter().map(|r| r[j] as f64).sum::<f64>() / k))
        .collect();
    let fit = slope_fit(&mean)?;
    let slopes: Vec<f64> = counts
        .iter()
        .map(|r| fit_line(&ln_t, &r.iter().map(|&v| v as f64).collect::<Vec<_>>()).slope)
        .collect();
    let (m, _) = crate::numeric::mean_stderr(&slopes);
    let sd = (slopes.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (k - 1.0).max(1.0)).sqrt();
    Ok(EnsembleFit { fit, members: counts.len() as u64, member_slope_mean: m, member_slope_sd: sd })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaOracle {
    /// Predicted slope `kappa c^d` of `N` against `ln T`.
    pub value: f64,
    /// False when the cone measure is only known up to a constant.
    pub exact: bool,
}

/// `[K ∩ P : K ∩ L]^{-1} lambda(F_c)`; one cell per unit of `ln T`.
pub fn kappa_oracle(model: &GrassmannModel, c: f64) -> KappaOracle {
    let (_, exact) = flag::measure_normalization(model);
    KappaOracle { value: flag::cone_volume_f_quadrature(model, c) / siegel::stabilizer_index(model) as f64, exact }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SandwichReport {
    pub samples: u64,
    /// Samples in `E^+_{T,c_hat} \ Q_{2l}` and in `E \ Q_l`.
    pub left_tested: u64,
    pub right_tested: u64,
    pub violations: u64,
}

/// Random cone vector with `ln |v^+|` uniform on `[lo, hi)` and
/// `|u| = scale * s * |v^+|^{-beta}`, `s` uniform on `[0, 1)`.
pub fn random_cone_vector(model: &GrassmannModel, lo: f64, hi: f64, scale: f64, seed: u64, index: u64) -> Result<ConeVector> {
    let mut r = rng::stream(seed, rng::streams::CONE_VECTOR, index);
    let sign = if rng::uniform(&mut r) < 0.5 { 1.0 } else { -1.0 };
    let p = (lo + (hi - lo) * rng::uniform(&mut r)).exp();
    let mut dir: Vec<f64> = (0..model.d).map(|_| rng::gaussian(&mut r)).collect();
    let nd = dir.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-300);
    let mag = scale * rng::uniform(&mut r) * p.powf(-model.beta_f64());
    dir.iter_mut().for_each(|a| *a *= mag / nd);
    ConeVector::from_chart(model, sign * p, &dir)
}

/// Checks `E^+_{T,c_hat} \ Q_{2l} ⊆ E(T) \ Q_l ⊆ E^+_{T,1/c_hat}` on random cone vectors.
pub fn sandwich_check(model: &GrassmannModel, ell_index: u32, c0: f64, t: f64, samples: u64, seed: u64) -> Result<SandwichReport> {
    let beta = model.beta_f64();
    let ch = flag::c_hat(beta, c0, ell_index);
    let inner = RegionSpec::eplus(model, t, ch)?;
    let outer = RegionSpec::eplus(model, t, 1.0 / ch)?;
    let e = RegionSpec::e(model, t)?;
    let q1 = RegionSpec::q(model, ell_index, c0)?;
    let q2 = RegionSpec::q(model, 2 * ell_index, c0)?;
    let hi = (t / ch).ln() + 0.5;
    let rows = (0..samples)
        .into_par_iter()
        .map(|i| {
            let v = random_cone_vector(model, -0.5, hi, 2.0 / ch, seed, i)?;
            let left = flag::region_contains(&inner, &v) && !flag::region_contains(&q2, &v);
            let mid = flag::region_contains(&e, &v) && !flag::region_contains(&q1, &v);
            let right = flag::region_contains(&outer, &v);
            Ok((left, mid, (left && !mid) || (mid && !right)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SandwichReport {
        samples,
        left_tested: rows.iter().filter(|r| r.0).count() as u64,
        right_tested: rows.iter().filter(|r| r.1).count() as u64,
        violations: rows.iter().filter(|r| r.2).count() as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PartitionReport {
    pub samples: u64,
    pub exactly_one: u64,
    /// Samples whose set of containing cells differs from `{cell_index}`.
    pub violations: u64,
}

/// Samples `E^+_{T,c}` with `c T = e^N` and checks that each vector lies in exactly one cell.
pub fn partition_check(model: &GrassmannModel, c: f64, n_cells: usize, samples: u64, seed: u64) -> Result<PartitionReport> {
    let region = RegionSpec::eplus(model, (n_cells as f64).exp() / c, c)?;
    let mut drawn = 0;
    let mut exactly_one = 0;
    let mut violations = 0;
    let mut index = 0;
    while drawn < samples {
        let v = random_cone_vector(model, 0.0, n_cells as f64, c, seed, index)?;
        index += 1;
        if !flag::region_contains(&region, &v) {
            continue;
        }
        drawn += 1;
        let cells = flag::cells_containing(model, c, &v, n_cells);
        if cells.len() == 1 {
            exactly_one += 1;
        }
        if cells.len() != 1 || flag::cell_index(model, c, &v) != Some(cells[0]) {
            violations += 1;
        }
    }
    Ok(PartitionReport { samples, exactly_one, violations })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthPoint {
    pub t: f64,
    /// `#{v ∈ P_chi : |v| < T}`, counting both signs.
    pub count: u64,
    /// `count / T^{beta d}`.
    pub ratio: f64,
}

/// Growth of primitive decomposable vectors; `beta d = n` for every Grassmannian.
pub fn primitive_growth(model: &GrassmannModel, ts: &[f64]) -> Result<Vec<GrowthPoint>> {
    ts.iter()
        .map(|&t| {
            let count = 2 * flag::enumerate_rational_points(model, t)?.len() as u64;
            Ok(GrowthPoint { t, count, ratio: count as f64 / t.powi(model.n as i32) })
        })
        .collect()
}

/// `e^a, ..., e^b` at `k` equally spaced exponents.
pub fn exp_grid(a: f64, b: f64, k: usize) -> Vec<f64> {
    if k < 2 {
        return vec![a.exp()];
    }
    (0..k).map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp()).collect()
}

/// Euler's number, the upper edge of the fundamental cell in `|v^+|`.
pub const CELL_EDGE: f64 = E;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(l: usize, n: usize) -> GrassmannModel {
        GrassmannModel::new(l, n).unwrap()
    }

    fn brute_lines(x: &[f64], c: f64, tau: f64, t: f64) -> u64 {
        let n = x.len();
        lattice::primitive_points_in_ball(n, t)
            .filter(|p| flag::line_canonical(&p.coords))
            .filter(|p| {
                let vf: Vec<f64> = p.coords.iter().map(|&a| a as f64).collect();
                flag::distance(x, &vf).unwrap() < c * p.norm.powf(-tau)
            })
            .count() as u64
    }

    #[test]
    fn tube_matches_brute_force_on_lines() {
        for (n, tau) in [(2usize, 2.0), (2, 1.0), (3, 1.5), (3, 0.5), (4, 4.0 / 3.0)] {
            let model = m(1, n);
            for i in 0..10 {
                let x = ensemble_point(&model, 5, i);
                let q = CountQuery::new(&x, 1.3, tau, 30.0).unwrap();
                assert_eq!(count_approximations(&q).unwrap(), brute_lines(&x.frame[0], 1.3, tau, 30.0), "n = {n}, tau = {tau}");
            }
        }
    }

    #[test]
    fn hyperplanes_through_normals_match_enumeration() {
        let model = m(2, 3);
        let pts = flag::enumerate_rational_points(&model, 12.0).unwrap();
        for i in 0..10 {
            let x = ensemble_point(&model, 8, i);
            let a = count_approximations(&CountQuery::new(&x, 1.0, 1.5, 12.0).unwrap()).unwrap();
            assert_eq!(a, count_in_list(&x, 1.0, 1.5, 12.0, &pts).unwrap());
        }
    }

    #[test]
    fn rational_point_counts_itself() {
        let model = m(2, 4);
        let v = RationalSubspace::from_rows(&vec![vec![1, 2, 0, 1], vec![0, 1, 1, 3]]).unwrap();
        let x = FlagPoint::from_subspace(&model, &v).unwrap();
        let q = CountQuery::new(&x, 1.0, 1.0, v.height() + 0.5).unwrap();
        assert!(count_approximations(&q).unwrap() >= 1);
    }

    /// Exact count for `x = [1 : phi]` from the convergents `F_{k+1} / F_k`.
    ///
    /// With `c = 1` and `tau = 2`, `d < |v|^{-2}` forces `|p - q phi| < 2 / |v|`,
    /// so every solution has `p` within one of `q phi`; each candidate is tested exactly.
    #[test]
    fn golden_ratio_against_convergent_scan() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let model = m(1, 2);
        let x = FlagPoint::from_rows(&model, &[vec![1.0, phi]]).unwrap();
        let fib = [1i64, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987];
        for k in 5..fib.len() {
            let t = fib[k] as f64;
            let mut oracle = 0;
            for q in 0..=fib[k] {
                let base = ((q as f64) * phi).floor() as i64;
                for p in base - 1..=base + 2 {
                    if intmat::gcd(q, p) != 1 || !(q > 0 || p > 0) {
                        continue;
                    }
                    let h = ((q * q + p * p) as f64).sqrt();
                    let dist = flag::distance(&[1.0, phi], &[q as f64, p as f64]).unwrap();
                    if h < t && dist < h.powi(-2) {
                        oracle += 1;
                    }
                }
            }
            let got = count_approximations(&CountQuery::new(&x, 1.0, 2.0, t).unwrap()).unwrap();
            assert_eq!(got, oracle, "T = {t}");
        }
    }

    #[test]
    fn birkhoff_matches_direct_count() {
        for (n, members) in [(2usize, 6u64), (3, 4)] {
            let model = m(1, n);
            for i in 0..members {
                let x = ensemble_point(&model, 17, i);
                let b = birkhoff_count(&x, 1.0, 5).unwrap();
                assert_eq!(b.per_cell.iter().sum::<u64>(), b.total);
                assert_eq!(b.total, direct_region_count(&x, 1.0, 5).unwrap());
            }
        }
        let x = ensemble_point(&m(1, 2), 17, 0);
        assert_eq!(birkhoff_count(&x, 1.0, 0).unwrap().total, 0);
    }

    #[test]
    fn kappa_oracle_values() {
        let pi = std::f64::consts::PI;
        // lambda(F_1) = 2 omega_0 omega_d c^d with the radial integral equal to 1
        assert!((kappa_oracle(&m(1, 2), 1.0).value - 12.0 / (pi * pi)).abs() < 1e-9);
        let r = kappa_oracle(&m(1, 3), 0.5).value / kappa_oracle(&m(1, 3), 1.0).value;
        assert!((r - 0.25).abs() < 1e-12);
        assert!(!kappa_oracle(&m(2, 4), 1.0).exact);
    }

    #[test]
    fn sandwich_and_partition_small() {
        let model = m(1, 2);
        let s = sandwich_check(&model, 8, flag::DEFAULT_C0, 1e3, 2000, 1).unwrap();
        assert_eq!(s.violations, 0);
        assert!(s.left_tested > 0 && s.right_tested > 0);
        let p = partition_check(&m(1, 3), 1.0, 8, 500, 2).unwrap();
        assert_eq!((p.violations, p.exactly_one), (0, 500));
    }

    #[test]
    fn slope_fit_rejects_short_grids() {
        assert!(slope_fit(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).is_err());
        let f = slope_fit(&[(1.0, 1.0), (2.0, 3.0), (3.0, 5.0), (4.0, 7.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn count_is_monotone(i in 0u64..1000, c1 in 0.3f64..1.5, dc in 0.0f64..1.0, t in 2.0f64..200.0) {
            let x = ensemble_point(&m(1, 2), 99, i);
            let n = |c: f64, tau: f64, t: f64| count_approximations(&CountQuery::new(&x, c, tau, t).unwrap()).unwrap();
            prop_assert!(n(c1, 2.0, t) <= n(c1, 2.0, 2.0 * t));
            prop_assert!(n(c1, 2.0, t) <= n(c1 + dc, 2.0, t));
            prop_assert!(n(c1, 2.5, t) <= n(c1, 2.0, t));
        }
    }
}
