//! Primitive Siegel transforms `S f(g Z^n) = sum_{v primitive} f(g v)`.
//!
//! Evaluation enumerates the primitive points of the lattice inside the
//! support radius of `f`. Haar averages are only available on `SL_2`, where
//! the mean value formula predicts `E[S f] = (1 / zeta(2)) ∫ f`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::count;
use crate::flag::{self, ConeVector, FlagPoint, GrassmannModel, RationalSubspace, RegionSpec};
use crate::intmat;
use crate::lattice::{self, UnimodularLattice};
use crate::numeric::{mean_stderr, simpson, zeta};
use crate::{Error, Result};

/// Radial test functions on `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TestFunction {
    /// Indicator of `|v| < r`.
    Ball { r: f64 },
    /// Indicator of `r0 <= |v| < r1`.
    Annulus { r0: f64, r1: f64 },
    /// `exp(1 - 1 / (1 - (|v|/s)^2))` for `|v| < s`, zero outside.
    Bump { s: f64 },
    /// `sum_k w_k f_k`.
    Mixture(Vec<(f64, TestFunction)>),
}

/// The smooth bump `exp(1 - 1/(1 - r^2))` on `[0, 1)`, with value 1 at 0.
pub fn bump(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

impl TestFunction {
    /// Parses `ball:R`, `annulus:R0,R1`, `bump:S` or `zero`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("test function must be ball:R, annulus:R0,R1, bump:S or zero; got {s:?}"));
        if s.trim() == "zero" {
            return Ok(TestFunction::Ball { r: 0.0 });
        }
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = args.split(',').map(|t| t.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        let f = match (kind.trim(), nums.as_slice()) {
            ("ball", [r]) => TestFunction::Ball { r: *r },
            ("annulus", [a, b]) => TestFunction::Annulus { r0: *a, r1: *b },
            ("bump", [s]) => TestFunction::Bump { s: *s },
            _ => return Err(bad()),
        };
        f.validate()?;
        Ok(f)
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            TestFunction::Ball { r } => *r >= 0.0 && r.is_finite(),
            TestFunction::Annulus { r0, r1 } => *r0 >= 0.0 && r1 >= r0 && r1.is_finite(),
            TestFunction::Bump { s } => *s > 0.0 && s.is_finite(),
            TestFunction::Mixture(parts) => return parts.iter().try_for_each(|(_, f)| f.validate()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("invalid test function parameters: {self:?}")))
        }
    }

    /// Value at a point of norm `r`.
    pub fn radial(&self, r: f64) -> f64 {
        match self {
            TestFunction::Ball { r: a } => f64::from(u8::from(r < *a)),
            TestFunction::Annulus { r0, r1 } => f64::from(u8::from(r >= *r0 && r < *r1)),
            TestFunction::Bump { s } => bump(r / s),
            TestFunction::Mixture(parts) => parts.iter().map(|(w, f)| w * f.radial(r)).sum(),
        }
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        self.radial(v.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    pub fn support_radius(&self) -> f64 {
        match self {
            TestFunction::Ball { r } => *r,
            TestFunction::Annulus { r1, .. } => *r1,
            TestFunction::Bump { s } => *s,
            TestFunction::Mixture(parts) => parts.iter().map(|(_, f)| f.support_radius()).fold(0.0, f64::max),
        }
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            TestFunction::Ball { r } => out.push(*r),
            TestFunction::Annulus { r0, r1 } => out.extend([*r0, *r1]),
            TestFunction::Bump { s } => out.push(*s),
            TestFunction::Mixture(parts) => parts.iter().for_each(|(_, f)| f.breakpoints(out)),
        }
    }

    /// `∫_{R^n} f` by Simpson quadrature of `|S^{n-1}| r^{n-1} f(r)` between breakpoints.
    pub fn integral(&self, n: usize) -> f64 {
        let mut pts = vec![0.0];
        self.breakpoints(&mut pts);
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        let sphere = n as f64 * crate::numeric::unit_ball_volume(n);
        let mut total = 0.0;
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b > a {
                // keep evaluations strictly inside the interval so indicators see its interior
                let eps = 1e-12 * (b - a);
                let g = |r: f64| sphere * r.powi(n as i32 - 1) * self.radial(r.clamp(a + eps, b - eps));
                total += simpson(g, a, b, 2000);
            }
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SiegelEvaluation {
    pub value: f64,
    /// Number of primitive points with a nonzero contribution.
    pub terms: u64,
    pub cutoff_radius: f64,
}

/// `S f` on a lattice in `R^n`.
pub fn siegel_eval(f: &TestFunction, lattice: &UnimodularLattice) -> Result<SiegelEvaluation> {
    let r = f.support_radius();
    siegel_eval_with(lattice, r, |_, p| f.eval(p))
}

/// Sums `f(coords, point)` over primitive lattice points of norm `<= radius`.
pub fn siegel_eval_with<F: Fn(&[i64], &[f64]) -> f64>(lattice: &UnimodularLattice, radius: f64, f: F) -> Result<SiegelEvaluation> {
    let mut value = 0.0;
    let mut terms = 0;
    if radius > 0.0 {
        lattice::lattice_points_within(lattice, radius, lattice::DEFAULT_NODE_LIMIT, |z, p| {
            if intmat::is_primitive(z) {
                let v = f(z, p);
                if v != 0.0 {
                    value += v;
                    terms += 1;
                }
            }
        })?;
    }
    Ok(SiegelEvaluation { value, terms, cutoff_radius: radius })
}

/// `S_chi 1_R(g Gamma)` for a bounded region `R` of the cone over `Gr(l, n)`:
/// the number of `v ∈ P_chi` with `g v ∈ R`.
pub fn siegel_eval_region(spec: &RegionSpec, g: &nalgebra::DMatrix<f64>, model: &GrassmannModel) -> Result<SiegelEvaluation> {
    let c = flag::compound_matrix(g, model.ell);
    let lat = UnimodularLattice::new(c)?;
    let r = spec.support_radius();
    siegel_eval_with(&lat, r, |z, p| {
        if model.ell > 1 && !flag::plucker_relations_hold(z, model) {
            return 0.0;
        }
        let v = ConeVector { model: model.clone(), plucker: p.to_vec() };
        f64::from(u8::from(flag::region_contains(spec, &v)))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanValueResult {
    pub estimate: f64,
    pub stderr: f64,
    pub predicted: f64,
    pub z_score: f64,
    pub samples: u64,
}

/// `(1 / zeta(2)) ∫_{R^2} f`.
pub fn mean_value_prediction(f: &TestFunction) -> f64 {
    f.integral(2) / zeta(2)
}

/// Values of `S f` on the Haar samples `0..samples` of `seed`, in index order.
pub fn siegel_values_sl2(f: &TestFunction, samples: u64, seed: u64) -> Result<Vec<f64>> {
    (0..samples)
        .into_par_iter()
        .map(|i| siegel_eval(f, &lattice::haar_sample_indexed(seed, i).lattice()).map(|e| e.value))
        .collect()
}

/// Monte Carlo check of the mean value formula on `SL_2(R)/SL_2(Z)`.
pub fn mean_value_mc(f: &TestFunction, samples: u64, seed: u64) -> Result<MeanValueResult> {
    if samples < 2 {
        return Err(Error::Invalid("need at least two samples".into()));
    }
    let vals = siegel_values_sl2(f, samples, seed)?;
    let (estimate, stderr) = mean_stderr(&vals);
    let predicted = mean_value_prediction(f);
    let z_score = if stderr > 0.0 { (estimate - predicted) / stderr } else if estimate == predicted { 0.0 } else { f64::INFINITY };
    Ok(MeanValueResult { estimate, stderr, predicted, z_score, samples })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupProbe {
    /// Running maximum of `S f` after each quarter of the samples.
    pub sup_by_quarter: [f64; 4],
    pub sup_observed: f64,
    /// `max S f * lambda_1^{beta d}` with `beta d = 2`.
    pub c_hat: f64,
    /// Finite and unchanged over the second half of the samples.
    pub linf_flag: bool,
}

/// Empirical supremum of `S f` on Haar samples, and the constant in
/// `S f <= C lambda_1^{-2}`.
pub fn sup_bound_probe(f: &TestFunction, samples: u64, seed: u64) -> Result<SupProbe> {
    let rows: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let lat = lattice::haar_sample_indexed(seed, i).lattice();
            let v = siegel_eval(f, &lat)?.value;
            let l = lattice::shortest_vector(&lat)?.1;
            Ok((v, v * l * l))
        })
        .collect::<Result<_>>()?;
    let mut sup_by_quarter = [0.0; 4];
    let mut running: f64 = 0.0;
    for (k, (v, _)) in rows.iter().enumerate() {
        running = running.max(*v);
        let q = (4 * (k + 1) - 1) / rows.len().max(1);
        sup_by_quarter[q.min(3)] = running;
    }
    let c_hat = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let sup_observed = running;
    let linf_flag = sup_observed.is_finite() && sup_by_quarter[1] == sup_observed;
    Ok(SupProbe { sup_by_quarter, sup_observed, c_hat, linf_flag })
}

/// Hard-cutoff truncation: `S f` if `lambda_1 >= delta`, else 0.
pub fn truncated_siegel(f: &TestFunction, lattice: &UnimodularLattice, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if lattice::shortest_vector(lattice)?.1 >= delta {
        Ok(siegel_eval(f, lattice)?.value)
    } else {
        Ok(0.0)
    }
}

/// `|E[S^{(delta)} f] - E[S f]|` for each delta, over common Haar samples.
pub fn truncation_gaps(f: &TestFunction, deltas: &[f64], samples: u64, seed: u64) -> Result<Vec<(f64, f64)>> {
    let rows: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let lat = lattice::haar_sample_indexed(seed, i).lattice();
            Ok((siegel_eval(f, &lat)?.value, lattice::shortest_vector(&lat)?.1))
        })
        .collect::<Result<_>>()?;
    Ok(deltas
        .iter()
        .map(|&d| {
            let cut: Vec<f64> = rows.iter().map(|&(v, l)| if l < d { v } else { 0.0 }).collect();
            (d, mean_stderr(&cut).0)
        })
        .collect())
}

/// `[K ∩ P : K ∩ L]`. `K ∩ P = S(O(l) x O(n - l))` stabilises the plane `x_0`
/// and `K ∩ L` is the subgroup fixing `e_chi`, i.e. with `det` of the `O(l)`
/// block equal to 1; the index is 2 for every Grassmannian.
pub fn stabilizer_index(_model: &GrassmannModel) -> u64 {
    2
}

/// Primitive decomposable vectors of `V_chi(Z)` with norm `< t`: a scan of
/// the integer ball in `V_chi` filtered by gcd and the Plücker relations.
pub fn primitive_chi_vectors(model: &GrassmannModel, t: f64) -> Result<Vec<Vec<i64>>> {
    let est = crate::numeric::unit_ball_volume(model.dim_v) * (t + 1.0).powi(model.dim_v as i32);
    if est > 5e9 {
        return Err(Error::ResourceGuard(format!("about {est:.1e} points in the ball of V_chi")));
    }
    Ok(lattice::BallPoints::new(model.dim_v, t)
        .filter(|p| intmat::is_primitive(p) && (model.ell == 1 || flag::plucker_relations_hold(p, model)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReductionCheck {
    /// Rational points with `d(x, v) < H(v)^{-beta}`, `1 <= H(v) < T`.
    pub lhs: u64,
    /// `#(k_x^{-1} P_chi ∩ E_beta(T))`.
    pub lattice_count: u64,
    pub index: u64,
    pub equal: bool,
}

impl ReductionCheck {
    pub fn rhs(&self) -> f64 {
        self.lattice_count as f64 / self.index as f64
    }
}

/// Compares the direct rational-point count with the lattice-region count.
///
/// The two sides use different inputs: rational points from
/// [`flag::enumerate_rational_points`] with projective distances to `x`, and
/// primitive vectors of `V_chi(Z)` moved by `k_x^{-1}` and tested against
/// the region `E_beta(T)` around `e_chi`.
pub fn reduction_identity_check(x: &FlagPoint, t: f64, model: &GrassmannModel) -> Result<ReductionCheck> {
    let pts = flag::enumerate_rational_points(model, t)?;
    let chi = primitive_chi_vectors(model, t)?;
    reduction_identity_check_with(x, t, model, &pts, &chi)
}

/// [`reduction_identity_check`] with precomputed inputs.
pub fn reduction_identity_check_with(
    x: &FlagPoint,
    t: f64,
    model: &GrassmannModel,
    rational_points: &[RationalSubspace],
    chi_vectors: &[Vec<i64>],
) -> Result<ReductionCheck> {
    let lhs = count::count_in_list(x, 1.0, model.beta_f64(), t, rational_points)?;
    let kinv = flag::compound_matrix(&x.rotation().transpose(), model.ell);
    let region = RegionSpec::e(model, t)?;
    let mut lattice_count = 0;
    for p in chi_vectors {
        let pv = nalgebra::DVector::from_iterator(p.len(), p.iter().map(|&c| c as f64));
        let w = &kinv * pv;
        let v = ConeVector::new(model, w.iter().copied().collect())?;
        if flag::region_contains(&region, &v) {
            lattice_count += 1;
        }
    }
    let index = stabilizer_index(model);
    Ok(ReductionCheck { lhs, lattice_count, index, equal: lattice_count == index * lhs })
}

/// Haar average of the annulus indicator predicted by the mean value formula.
pub fn annulus_prediction(r0: f64, r1: f64) -> f64 {
    PI * (r1 * r1 - r0 * r0) / zeta(2)
}
