//! Expanding `SO(2)`-orbit averages on `SL_2(R)/SL_2(Z)`.
//!
//! An orbit average is `(1/pi) ∫_0^pi phi(a(y) k_theta x) d theta` with
//! `a(y) = diag(y^{-1/2}, y^{1/2})`; `k_{theta + pi} = -k_theta` acts the same
//! way on lattices, so half a turn suffices. Quadrature is the trapezoid rule,
//! which converges spectrally for smooth periodic integrands.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::lattice::{self, ModularSample, UnimodularLattice};
use crate::numeric::{fit_line, median, pairwise_sum, simpson};
use crate::siegel::bump;
use crate::{intmat, rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ObservableKind {
    /// `sum_{v primitive} b(|v| / s)` with `s <= 1`: nonzero only when the
    /// lattice has a vector shorter than `s`, so it measures cusp height.
    SmoothCuspHeight,
    /// The same sum at any scale `s`.
    SmoothBallCount,
    Constant,
}

/// A bounded continuous function on `SL_2(R)/SL_2(Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observable {
    pub kind: ObservableKind,
    /// Smoothing scale `s`, or the value of a constant observable.
    pub scale: f64,
}

impl Observable {
    pub fn cusp(s: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::Invalid(format!("cusp observable needs 0 < s <= 1, got {s}")));
        }
        Ok(Observable { kind: ObservableKind::SmoothCuspHeight, scale: s })
    }

    pub fn ball(s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Invalid(format!("ball observable needs s > 0, got {s}")));
        }
        Ok(Observable { kind: ObservableKind::SmoothBallCount, scale: s })
    }

    pub fn constant(value: f64) -> Self {
        Observable { kind: ObservableKind::Constant, scale: value }
    }

    /// Parses `cusp:S`, `ball:S` or `const:V`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("observable must be cusp:S, ball:S or const:V; got {s:?}"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let v: f64 = arg.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "cusp" => Self::cusp(v),
            "ball" => Self::ball(v),
            "const" => Ok(Self::constant(v)),
            _ => Err(bad()),
        }
    }

    /// Value on the lattice spanned by `b1, b2`.
    pub fn eval_basis(&self, b1: [f64; 2], b2: [f64; 2]) -> f64 {
        match self.kind {
            ObservableKind::Constant => self.scale,
            _ => primitive_bump_sum(b1, b2, self.scale),
        }
    }

    pub fn eval(&self, lattice: &UnimodularLattice) -> Result<f64> {
        if lattice.dim() != 2 {
            return Err(Error::Invalid("observables are defined on planar lattices".into()));
        }
        let b = lattice.basis();
        Ok(self.eval_basis([b[(0, 0)], b[(1, 0)]], [b[(0, 1)], b[(1, 1)]]))
    }
}

/// `sum_{v primitive} b(|v| / s)`, enumerated in a Lagrange–Gauss reduced basis.
fn primitive_bump_sum(b1: [f64; 2], b2: [f64; 2], s: f64) -> f64 {
    let (a, b, _) = lattice::lagrange_gauss(b1, b2);
    let a2 = a[0] * a[0] + a[1] * a[1];
    let mu = (a[0] * b[0] + a[1] * b[1]) / a2;
    let bs2 = (b[0] * b[0] + b[1] * b[1]) - mu * mu * a2;
    let s2 = s * s;
    let jmax = (s2 / bs2).sqrt().floor() as i64;
    let mut total = 0.0;
    for j in -jmax..=jmax {
        let rem = s2 - (j * j) as f64 * bs2;
        if rem <= 0.0 {
            continue;
        }
        let half = (rem / a2).sqrt();
        let centre = -(j as f64) * mu;
        for i in (centre - half).ceil() as i64..=(centre + half).floor() as i64 {
            if intmat::gcd(i, j) != 1 {
                continue;
            }
            let v = [i as f64 * a[0] + j as f64 * b[0], i as f64 * a[1] + j as f64 * b[1]];
            let r2 = v[0] * v[0] + v[1] * v[1];
            if r2 < s2 {
                total += bump((r2 / s2).sqrt());
            }
        }
    }
    total
}

/// Exact Haar mean: `(1 / zeta(2)) ∫_{R^2} b(|v| / s) dv = (12 s^2 / pi) ∫_0^1 r b(r) dr`.
pub fn haar_mean(phi: &Observable) -> f64 {
    match phi.kind {
        ObservableKind::Constant => phi.scale,
        _ => 12.0 * phi.scale * phi.scale / PI * simpson(|r| r * bump(r), 0.0, 1.0, 4000),
    }
}

/// Monte Carlo Haar mean with its standard error.
pub fn haar_mean_mc(phi: &Observable, samples: u64, seed: u64) -> Result<(f64, f64)> {
    let vals: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| phi.eval(&lattice::haar_sample_indexed(seed, i).lattice()))
        .collect::<Result<_>>()?;
    Ok(crate::numeric::mean_stderr(&vals))
}

fn flowed_columns(y: f64, theta: f64, base: &UnimodularLattice) -> ([f64; 2], [f64; 2]) {
    let b = base.basis();
    let (sn, cs) = theta.sin_cos();
    let (ym, yp) = (y.powf(-0.5), y.sqrt());
    let col = |j: usize| {
        let (u, v) = (b[(0, j)], b[(1, j)]);
        [ym * (cs * u - sn * v), yp * (sn * u + cs * v)]
    };
    (col(0), col(1))
}

/// Convergence threshold between successive trapezoid refinements.
pub const QUADRATURE_TOL: f64 = 1e-6;
/// Largest number of nodes before giving up.
pub const MAX_NODES: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitAverage {
    pub value: f64,
    pub nodes: usize,
    /// `|I_{2N} - I_N|` at the final refinement.
    pub last_change: f64,
}

/// Trapezoid rule on `[0, pi)`, doubling until two successive values agree.
///
/// The first grid resolves angular features of width `1/y`, the narrowest
/// a compactly supported observable can develop under `a(y)`.
fn refine<F: Fn(f64) -> f64 + Sync>(f: F, y_max: f64, min_points: usize) -> Result<OrbitAverage> {
    let resolve = ((4.0 * PI * y_max).ceil() as usize).next_power_of_two();
    let mut n = min_points.max(1 << 10).max(resolve).next_power_of_two();
    if n > MAX_NODES {
        return Err(Error::ResourceGuard(format!("orbit quadrature would need {n} nodes")));
    }
    let eval = |count: usize, offset: f64, step: f64| -> f64 {
        let vals: Vec<f64> = (0..count).into_par_iter().map(|k| f((k as f64 + offset) * step)).collect();
        pairwise_sum(&vals)
    };
    let mut sum = eval(n, 0.0, PI / n as f64);
    let mut value = sum / n as f64;
    loop {
        if 2 * n > MAX_NODES {
            return Err(Error::NoConvergence(format!("orbit quadrature not settled at {n} nodes")));
        }
        sum += eval(n, 0.5, PI / n as f64);
        n *= 2;
        let next = sum / n as f64;
        let change = (next - value).abs();
        value = next;
        if change < QUADRATURE_TOL {
            return Ok(OrbitAverage { value, nodes: n, last_change: change });
        }
    }
}

/// `(1/pi) ∫_0^pi phi(a(y) k_theta base) d theta`.
pub fn k_orbit_average(phi: &Observable, y: f64, base: &UnimodularLattice, min_points: usize) -> Result<OrbitAverage> {
    if !(y >= 1.0 && y.is_finite()) {
        return Err(Error::Invalid(format!("y must be finite and >= 1, got {y}")));
    }
    if base.dim() != 2 {
        return Err(Error::Invalid("orbit averages need a planar lattice".into()));
    }
    refine(
        |t| {
            let (b1, b2) = flowed_columns(y, t, base);
            phi.eval_basis(b1, b2)
        },
        y,
        min_points,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubleCorrelation {
    pub value: f64,
    /// Product of the Haar means.
    pub target: f64,
    pub error: f64,
    pub nodes: usize,
}

/// `(1/pi) ∫ phi1(a(y1) k base1) phi2(a(y2) k base2) d theta`.
pub fn double_correlation(
    phi1: &Observable,
    phi2: &Observable,
    y1: f64,
    y2: f64,
    base1: &UnimodularLattice,
    base2: &UnimodularLattice,
) -> Result<DoubleCorrelation> {
    if !(y1 >= 1.0 && y2 >= y1 && y2.is_finite()) {
        return Err(Error::Invalid(format!("need 1 <= y1 <= y2, got y1 = {y1}, y2 = {y2}")));
    }
    let avg = refine(
        |t| {
            let (a1, a2) = flowed_columns(y1, t, base1);
            let v = phi1.eval_basis(a1, a2);
            if v == 0.0 {
                return 0.0;
            }
            let (b1, b2) = flowed_columns(y2, t, base2);
            v * phi2.eval_basis(b1, b2)
        },
        y2,
        0,
    )?;
    let target = haar_mean(phi1) * haar_mean(phi2);
    Ok(DoubleCorrelation { value: avg.value, target, error: (avg.value - target).abs(), nodes: avg.nodes })
}

/// Haar-distributed base lattices from the equidistribution stream of `seed`.
pub fn base_ensemble(count: usize, seed: u64) -> Vec<UnimodularLattice> {
    (0..count as u64)
        .map(|i| ModularSample::draw(&mut rng::stream(seed, rng::streams::EQUIDIST_BASE, i)).lattice())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCurve {
    pub ys: Vec<f64>,
    /// Largest error over the base ensemble at each `y`.
    pub errors: Vec<f64>,
    pub median_errors: Vec<f64>,
    /// `errors_by_base[b][k]` is the error of base `b` at `ys[k]`.
    pub errors_by_base: Vec<Vec<f64>>,
    /// Least squares slope of `ln error` against `ln y`.
    pub fitted_exponent: f64,
}

/// Floor applied to errors before taking logarithms.
const ERROR_FLOOR: f64 = 1e-16;

/// `|I(y) - mu(phi)|` over a base ensemble and a geometric `y` grid.
pub fn decay_probe(phi: &Observable, bases: &[UnimodularLattice], ys: &[f64]) -> Result<DecayCurve> {
    if ys.len() < 2 || ys.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("the y grid must be strictly increasing with at least two points".into()));
    }
    if bases.is_empty() {
        return Err(Error::Invalid("empty base ensemble".into()));
    }
    let mu = haar_mean(phi);
    let errors_by_base = bases
        .iter()
        .map(|b| ys.iter().map(|&y| Ok((k_orbit_average(phi, y, b, 0)?.value - mu).abs())).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    let column = |k: usize| errors_by_base.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let errors: Vec<f64> = (0..ys.len()).map(|k| column(k).into_iter().fold(0.0, f64::max)).collect();
    let median_errors: Vec<f64> = (0..ys.len()).map(|k| median(&column(k))).collect();
    let lx: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.max(ERROR_FLOOR).ln()).collect();
    let fitted_exponent = fit_line(&lx, &ly).slope;
    Ok(DecayCurve { ys: ys.to_vec(), errors, median_errors, errors_by_base, fitted_exponent })
}

/// `k` points from `a` to `b` in geometric progression.
pub fn geometric_grid(a: f64, b: f64, k: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && b > a) || k < 2 {
        return Err(Error::Invalid(format!("geometric grid needs 0 < a < b and k >= 2, got {a}, {b}, {k}")));
    }
    let r = (b / a).ln() / (k - 1) as f64;
    Ok((0..k).map(|i| if i + 1 == k { b } else { a * (r * i as f64).exp() }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn bump_sum_matches_generic_enumeration() {
        let phi = Observable::ball(1.7).unwrap();
        for i in 0..200 {
            let lat = lattice::haar_sample_indexed(21, i).lattice();
            let mut slow = 0.0;
            lattice::lattice_points_within(&lat, 1.7, lattice::DEFAULT_NODE_LIMIT, |z, p| {
                if intmat::is_primitive(z) {
                    slow += bump((p[0] * p[0] + p[1] * p[1]).sqrt() / 1.7);
                }
            })
            .unwrap();
            assert!((phi.eval(&lat).unwrap() - slow).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_observable_is_exact() {
        let base = UnimodularLattice::standard(2);
        let one = Observable::constant(1.0);
        for y in [1.0, 37.0, 1e4] {
            assert!((k_orbit_average(&one, y, &base, 0).unwrap().value - 1.0).abs() < 1e-12);
        }
        let cusp = Observable::cusp(0.5).unwrap();
        let d = double_correlation(&cusp, &one, 4.0, 16.0, &base, &base).unwrap();
        assert!((d.value - k_orbit_average(&cusp, 4.0, &base, 0).unwrap().value).abs() < 1e-6);
    }

    #[test]
    fn identity_flow_on_square_lattice() {
        // Z^2 rotated has no vector shorter than 1, so the cusp observable vanishes
        let cusp = Observable::cusp(0.5).unwrap();
        assert_eq!(k_orbit_average(&cusp, 1.0, &UnimodularLattice::standard(2), 0).unwrap().value, 0.0);
        // direct quadrature of the ball observable without flow
        let ball = Observable::ball(1.5).unwrap();
        let base = UnimodularLattice::standard(2);
        let direct = simpson(
            |t| {
                let (b1, b2) = flowed_columns(1.0, t, &base);
                ball.eval_basis(b1, b2)
            },
            0.0,
            PI,
            2000,
        ) / PI;
        assert!((k_orbit_average(&ball, 1.0, &base, 0).unwrap().value - direct).abs() < 1e-6);
    }

    #[test]
    fn rotating_the_base_leaves_the_average_unchanged() {
        let phi = Observable::ball(1.2).unwrap();
        let base = lattice::haar_sample_indexed(4, 2).lattice();
        let psi: f64 = 0.7;
        let rot = DMatrix::from_row_slice(2, 2, &[psi.cos(), -psi.sin(), psi.sin(), psi.cos()]);
        let turned = base.act(&rot).unwrap();
        let a = k_orbit_average(&phi, 8.0, &base, 0).unwrap().value;
        let b = k_orbit_average(&phi, 8.0, &turned, 0).unwrap().value;
        assert!((a - b).abs() < 5e-6);
    }

    #[test]
    fn haar_mean_agrees_with_monte_carlo() {
        let phi = Observable::cusp(0.5).unwrap();
        let (m, se) = haar_mean_mc(&phi, 40_000, 12).unwrap();
        assert!((m - haar_mean(&phi)).abs() < 4.0 * se, "{m} +- {se} vs {}", haar_mean(&phi));
    }

    #[test]
    fn parse_observables() {
        assert_eq!(Observable::parse("cusp:0.5").unwrap().kind, ObservableKind::SmoothCuspHeight);
        assert!(Observable::parse("cusp:1.5").is_err());
        assert!(Observable::parse("torus:1").is_err());
    }
}
