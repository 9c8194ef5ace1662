//! Unimodular lattices, reduction and enumeration.
//!
//! A lattice is stored by a real column basis `g`, representing `g Z^n`.
//! Short vectors are found by LLL reduction followed by Fincke–Pohst
//! enumeration; in dimension two Lagrange–Gauss reduction is used instead.
//! Haar sampling is only provided on `SL_2(R)/SL_2(Z)`, where the standard
//! fundamental domain can be sampled exactly.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;

use crate::flag::{compound_matrix, GrassmannModel};
use crate::intmat::gcd_slice;
use crate::{rng, Error, Result};

/// Default bound on enumeration nodes before a search is refused.
pub const DEFAULT_NODE_LIMIT: u64 = 100_000_000;

/// Tolerance on `|det| - 1` accepted after group actions.
pub const DET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct UnimodularLattice {
    basis: DMatrix<f64>,
}

impl UnimodularLattice {
    /// Wraps a square basis, rescaling it to `|det| = 1`.
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        if !basis.is_square() || basis.nrows() == 0 {
            return Err(Error::Invalid("lattice basis must be square and nonempty".into()));
        }
        let n = basis.nrows();
        let scale = basis.columns(0, n).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let det = basis.determinant();
        if !det.is_finite() || det.abs() <= 1e-12 * scale.powi(n as i32) {
            return Err(Error::Degenerate(format!("determinant {det:e}")));
        }
        let s = det.abs().powf(-1.0 / n as f64);
        Ok(UnimodularLattice { basis: basis * s })
    }

    pub fn standard(n: usize) -> Self {
        UnimodularLattice { basis: DMatrix::identity(n, n) }
    }

    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let n = cols.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| cols[j][i]))
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|j| self.basis.column(j).iter().copied().collect()).collect()
    }

    /// `g * self`; the result is renormalised and must stay unimodular.
    pub fn act(&self, g: &DMatrix<f64>) -> Result<Self> {
        let b = g * &self.basis;
        let d = b.determinant().abs();
        if (d - 1.0).abs() > DET_TOLERANCE * 1e3 {
            return Err(Error::Invalid(format!("acting matrix is not in SL_n: |det| = {d}")));
        }
        Self::new(b)
    }

    /// The lattice vector with integer coordinates `z`.
    pub fn point(&self, z: &[i64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.basis[(i, j)] * z[j] as f64).sum()).collect()
    }
}

/// A point of the standard fundamental domain together with a rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularSample {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl ModularSample {
    /// Exact draw from the Haar probability measure.
    ///
    /// `x` has density proportional to `(1 - x^2)^{-1/2}` on `[-1/2, 1/2]`,
    /// which is the `x`-marginal of `dx dy / y^2` on the domain, and given `x`
    /// the height is `sqrt(1 - x^2) / u` for `u` uniform on `(0, 1]`.
    pub fn draw<R: Rng + ?Sized>(r: &mut R) -> Self {
        let x = (rng::uniform(r) * PI / 3.0 - PI / 6.0).sin();
        let y = (1.0 - x * x).sqrt() / rng::uniform_open0(r);
        let theta = rng::uniform(r) * PI;
        ModularSample { x, y, theta }
    }

    /// `Rot(theta) * y^{-1/2} [[1, x], [0, y]]`.
    pub fn lattice(&self) -> UnimodularLattice {
        let s = 1.0 / self.y.sqrt();
        let (sn, cs) = self.theta.sin_cos();
        let b = DMatrix::from_row_slice(2, 2, &[s, s * self.x, 0.0, s * self.y]);
        let rot = DMatrix::from_row_slice(2, 2, &[cs, -sn, sn, cs]);
        UnimodularLattice { basis: rot * b }
    }
}

/// Haar-random lattice in `SL_2(R)/SL_2(Z)`.
pub fn haar_sample_sl2<R: Rng + ?Sized>(r: &mut R) -> UnimodularLattice {
    ModularSample::draw(r).lattice()
}

/// Sample `index` of the Haar stream for `seed`.
pub fn haar_sample_indexed(seed: u64, index: u64) -> ModularSample {
    ModularSample::draw(&mut rng::stream(seed, rng::streams::HAAR_SL2, index))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveVector {
    pub coords: Vec<i64>,
    pub norm: f64,
}

impl PrimitiveVector {
    pub fn new(coords: Vec<i64>) -> Option<Self> {
        if gcd_slice(&coords) != 1 {
            return None;
        }
        let norm = (coords.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt();
        Some(PrimitiveVector { coords, norm })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A reduced basis `b' = b u` with the unimodular change of basis `u`.
#[derive(Debug, Clone)]
pub struct Reduced {
    /// Reduced columns.
    pub cols: Vec<Vec<f64>>,
    /// `u[i][k]`: coefficient of original column `i` in reduced column `k`.
    pub u: Vec<Vec<i64>>,
}

impl Reduced {
    /// Original coordinates of the vector with reduced coordinates `z`.
    pub fn original_coords(&self, z: &[i64]) -> Vec<i64> {
        self.u.iter().map(|row| row.iter().zip(z).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Lagrange–Gauss reduction of a planar basis.
pub fn lagrange_gauss(b1: [f64; 2], b2: [f64; 2]) -> ([f64; 2], [f64; 2], [[i64; 2]; 2]) {
    let (mut a, mut b) = (b1, b2);
    // columns of u express a, b in the original basis
    let mut u = [[1i64, 0], [0, 1]];
    let n2 = |v: [f64; 2]| v[0] * v[0] + v[1] * v[1];
    if n2(a) > n2(b) {
        std::mem::swap(&mut a, &mut b);
        u = [[0, 1], [1, 0]];
    }
    loop {
        let mu = ((a[0] * b[0] + a[1] * b[1]) / n2(a)).round();
        let m = mu as i64;
        b = [b[0] - mu * a[0], b[1] - mu * a[1]];
        u = [[u[0][0], u[0][1] - m * u[0][0]], [u[1][0], u[1][1] - m * u[1][0]]];
        if n2(b) >= n2(a) {
            break;
        }
        std::mem::swap(&mut a, &mut b);
        u = [[u[0][1], u[0][0]], [u[1][1], u[1][0]]];
    }
    (a, b, u)
}

fn gram_schmidt(cols: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let m = cols.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut mu = vec![vec![0.0; m]; m];
    let mut bn = vec![0.0; m];
    for i in 0..m {
        let mut v = cols[i].clone();
        for j in 0..i {
            mu[i][j] = dot(&cols[i], &star[j]) / bn[j];
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= mu[i][j] * sk;
            }
        }
        bn[i] = dot(&v, &v);
        star.push(v);
    }
    (mu, bn)
}

/// LLL reduction (`delta = 0.99`) of linearly independent columns.
pub fn lll(cols: &[Vec<f64>]) -> Result<Reduced> {
    let m = cols.len();
    let mut b = cols.to_vec();
    let mut u: Vec<Vec<i64>> = (0..m).map(|i| (0..m).map(|j| i64::from(i == j)).collect()).collect();
    let (mut mu, mut bn) = gram_schmidt(&b);
    if bn.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::Degenerate("dependent columns".into()));
    }
    let mut k = 1;
    let mut steps = 0u64;
    while k < m {
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::Degenerate("LLL did not terminate".into()));
        }
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 {
                let qi = q as i64;
                for t in 0..b[k].len() {
                    b[k][t] -= q * b[j][t];
                }
                for row in u.iter_mut() {
                    row[k] -= qi * row[j];
                }
                for t in 0..=j {
                    let mjt = if t == j { 1.0 } else { mu[j][t] };
                    mu[k][t] -= q * mjt;
                }
            }
        }
        if bn[k] >= (0.99 - mu[k][k - 1] * mu[k][k - 1]) * bn[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            for row in u.iter_mut() {
                row.swap(k, k - 1);
            }
            let (m2, b2) = gram_schmidt(&b);
            mu = m2;
            bn = b2;
            k = (k - 1).max(1);
        }
    }
    Ok(Reduced { cols: b, u })
}

/// Reduces columns: Lagrange–Gauss for two vectors in the plane, LLL otherwise.
pub fn reduce(cols: &[Vec<f64>]) -> Result<Reduced> {
    if cols.len() == 2 && cols[0].len() == 2 {
        let (a, b, u) = lagrange_gauss([cols[0][0], cols[0][1]], [cols[1][0], cols[1][1]]);
        if !(a[0] * b[1] - a[1] * b[0]).is_normal() {
            return Err(Error::Degenerate("planar basis is singular".into()));
        }
        return Ok(Reduced {
            cols: vec![a.to_vec(), b.to_vec()],
            u: vec![vec![u[0][0], u[0][1]], vec![u[1][0], u[1][1]]],
        });
    }
    lll(cols)
}

/// Fincke–Pohst enumeration of all nonzero `z` with `|sum_k z_k cols_k|^2 <= r2`.
///
/// `cols` should be reduced. The visitor receives the coefficient vector and
/// the squared norm. Returns the number of points visited, or a resource
/// error once more than `node_limit` search nodes have been expanded.
pub fn fincke_pohst<F: FnMut(&[i64], f64)>(cols: &[Vec<f64>], r2: f64, node_limit: u64, mut visit: F) -> Result<u64> {
    let m = cols.len();
    let (mu, bn) = gram_schmidt(cols);
    if bn.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Degenerate("dependent columns".into()));
    }
    let r2 = r2 * (1.0 + 1e-12);
    let mut z = vec![0i64; m];
    let mut nodes = 0u64;
    let mut found = 0u64;
    struct Ctx<'a, F> {
        mu: &'a [Vec<f64>],
        bn: &'a [f64],
        r2: f64,
        limit: u64,
        visit: &'a mut F,
    }
    fn rec<F: FnMut(&[i64], f64)>(
        ctx: &mut Ctx<'_, F>,
        k: usize,
        z: &mut Vec<i64>,
        partial: f64,
        nodes: &mut u64,
        found: &mut u64,
    ) -> Result<()> {
        let m = z.len();
        let c: f64 = -(k + 1..m).map(|i| ctx.mu[i][k] * z[i] as f64).sum::<f64>();
        let rem = ctx.r2 - partial;
        if rem < 0.0 {
            return Ok(());
        }
        let w = (rem / ctx.bn[k]).sqrt();
        let lo = (c - w).ceil() as i64;
        let hi = (c + w).floor() as i64;
        for zk in lo..=hi {
            *nodes += 1;
            if *nodes > ctx.limit {
                return Err(Error::ResourceGuard(format!("more than {} enumeration nodes", ctx.limit)));
            }
            let d = zk as f64 - c;
            let p = partial + d * d * ctx.bn[k];
            if p > ctx.r2 {
                continue;
            }
            z[k] = zk;
            if k == 0 {
                if z.iter().any(|&t| t != 0) {
                    *found += 1;
                    (ctx.visit)(z, p);
                }
            } else {
                rec(ctx, k - 1, z, p, nodes, found)?;
            }
        }
        z[k] = 0;
        Ok(())
    }
    if m == 0 {
        return Ok(0);
    }
    let mut ctx = Ctx { mu: &mu, bn: &bn, r2, limit: node_limit, visit: &mut visit };
    rec(&mut ctx, m - 1, &mut z, 0.0, &mut nodes, &mut found)?;
    Ok(found)
}

/// Visits every nonzero lattice vector with norm at most `radius`, passing
/// its coordinates in the lattice's own basis and the point itself.
pub fn lattice_points_within<F: FnMut(&[i64], &[f64])>(
    lattice: &UnimodularLattice,
    radius: f64,
    node_limit: u64,
    mut visit: F,
) -> Result<u64> {
    let red = reduce(&lattice.columns())?;
    let n = lattice.dim();
    let mut pt = vec![0.0; n];
    fincke_pohst(&red.cols, radius * radius, node_limit, |z, _| {
        for (i, p) in pt.iter_mut().enumerate() {
            *p = (0..z.len()).map(|k| red.cols[k][i] * z[k] as f64).sum();
        }
        let orig = red.original_coords(z);
        visit(&orig, &pt);
    })
}

/// Shortest nonzero vector: its coordinates in the lattice basis and its length.
pub fn shortest_vector(lattice: &UnimodularLattice) -> Result<(PrimitiveVector, f64)> {
    let red = reduce(&lattice.columns())?;
    let r2 = red.cols.iter().map(|c| dot(c, c)).fold(f64::INFINITY, f64::min);
    let mut best: Option<(Vec<i64>, f64)> = None;
    fincke_pohst(&red.cols, r2, DEFAULT_NODE_LIMIT, |z, p| {
        if best.as_ref().is_none_or(|(_, b)| p < *b) {
            best = Some((z.to_vec(), p));
        }
    })?;
    let (z, p) = best.ok_or_else(|| Error::Degenerate("no nonzero vector found".into()))?;
    let coords = red.original_coords(&z);
    let len = p.sqrt();
    Ok((PrimitiveVector { norm: len, coords }, len))
}

/// `lambda_chi(g)`: the shortest vector of `g V_chi(Z)` inside `V_chi = wedge^l R^n`.
pub fn lambda_chi(g: &DMatrix<f64>, model: &GrassmannModel) -> Result<f64> {
    if model.n > 4 || !(model.ell == 1 || model.ell == 2) {
        return Err(Error::Invalid(format!("lambda_chi is implemented for n <= 4 and l in {{1, 2}}, got {model}")));
    }
    let c = compound_matrix(g, model.ell);
    Ok(shortest_vector(&UnimodularLattice::new(c)?)?.1)
}

/// Iterator over integer vectors with `|v| < T` in lexicographic order.
#[derive(Debug, Clone)]
pub struct BallPoints {
    t2: f64,
    cur: Vec<i64>,
    hi: Vec<i64>,
    done: bool,
}

impl BallPoints {
    pub fn new(n: usize, t: f64) -> Self {
        let mut it = BallPoints { t2: t * t, cur: vec![0; n], hi: vec![0; n], done: n == 0 || t <= 0.0 };
        if !it.done {
            it.reset_from(0);
        }
        it
    }

    fn partial(&self, k: usize) -> i64 {
        self.cur[..k].iter().map(|x| x * x).sum()
    }

    /// Largest `x >= 0` with `partial + x^2 < T^2`.
    fn bound(&self, partial: i64) -> i64 {
        let rem = self.t2 - partial as f64;
        if rem <= 0.0 {
            return -1;
        }
        let mut x = rem.sqrt().floor() as i64 + 1;
        while x >= 0 && ((partial + x * x) as f64) >= self.t2 {
            x -= 1;
        }
        x
    }

    fn reset_from(&mut self, k: usize) {
        for j in k..self.cur.len() {
            let h = self.bound(self.partial(j));
            self.hi[j] = h;
            self.cur[j] = -h;
        }
    }
}

impl Iterator for BallPoints {
    type Item = Vec<i64>;
    fn next(&mut self) -> Option<Vec<i64>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut k = self.cur.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            if self.cur[k] < self.hi[k] {
                self.cur[k] += 1;
                self.reset_from(k + 1);
                break;
            }
        }
        Some(out)
    }
}

/// Every primitive vector of `Z^n` with norm `< t`, each once, lexicographically.
pub fn primitive_points_in_ball(n: usize, t: f64) -> impl Iterator<Item = PrimitiveVector> {
    BallPoints::new(n, t).filter_map(PrimitiveVector::new)
}

/// Integer points near the line through the unit vector `x`.
///
/// Let `j` be the coordinate where `|x_j|` is largest. For every slice
/// `v_j = m` with `0 <= m <= m_max` the visitor receives each integer `v`
/// with `|v_i - m x_i / x_j| <= rho(m)` for `i != j`. Any `v` with `v_j = m`
/// whose component orthogonal to `x` has norm `w` satisfies
/// `|v_i - m x_i / x_j| <= sqrt(2) w`, so choosing `rho(m) >= sqrt(2) w_max(m)`
/// covers every vector within orthogonal distance `w_max(m)` of the line.
pub fn tube_candidates<R, F>(x: &[f64], m_max: i64, rho: R, mut visit: F)
where
    R: Fn(i64) -> f64,
    F: FnMut(&[i64]),
{
    let n = x.len();
    let j = (0..n).max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs())).unwrap_or(0);
    let others: Vec<usize> = (0..n).filter(|&i| i != j).collect();
    let mut v = vec![0i64; n];
    let mut lo = vec![0i64; n];
    let mut hi = vec![0i64; n];
    for m in 0..=m_max {
        let r = rho(m);
        v[j] = m;
        let mut empty = false;
        for &i in &others {
            let c = m as f64 * x[i] / x[j];
            lo[i] = (c - r).ceil() as i64;
            hi[i] = (c + r).floor() as i64;
            if lo[i] > hi[i] {
                empty = true;
            }
            v[i] = lo[i];
        }
        if empty {
            continue;
        }
        'odo: loop {
            visit(&v);
            for &i in others.iter().rev() {
                if v[i] < hi[i] {
                    v[i] += 1;
                    continue 'odo;
                }
                v[i] = lo[i];
            }
            break;
        }
    }
}

/// One row of the cusp-measure probe.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CuspRow {
    pub delta: f64,
    /// Fraction of Haar samples with `lambda_1 < delta`.
    pub empirical: f64,
    pub stderr: f64,
    /// `3 delta^2 / pi`.
    pub predicted: f64,
    pub rel_err: f64,
}

/// `mu(lambda_1 < delta)` on `SL_2(R)/SL_2(Z)`.
///
/// For `delta <= 1` a lattice has at most one pair `±v` shorter than `delta`,
/// so the mean value formula applied to the disc indicator gives the exact
/// value `pi delta^2 / (2 zeta(2)) = 3 delta^2 / pi`.
pub fn cusp_probe(deltas: &[f64], samples: u64, seed: u64) -> Result<Vec<CuspRow>> {
    use rayon::prelude::*;
    if let Some(d) = deltas.iter().find(|&&d| !(d > 0.0 && d <= 1.0)) {
        return Err(Error::Invalid(format!("delta must lie in (0, 1], got {d}")));
    }
    if samples < 2 {
        return Err(Error::Invalid("need at least two samples".into()));
    }
    let lambdas: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| shortest_vector(&haar_sample_indexed(seed, i).lattice()).map(|s| s.1))
        .collect::<Result<_>>()?;
    Ok(deltas
        .iter()
        .map(|&delta| {
            let hits = lambdas.iter().filter(|&&l| l < delta).count() as f64;
            let n = samples as f64;
            let p = hits / n;
            let predicted = 3.0 * delta * delta / PI;
            CuspRow { delta, empirical: p, stderr: (p * (1.0 - p) / n).sqrt(), predicted, rel_err: (p - predicted).abs() / predicted }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn standard_lattice_shortest_is_one() {
        let (_, l) = shortest_vector(&UnimodularLattice::standard(2)).unwrap();
        assert!((l - 1.0).abs() < 1e-15);
        let (_, l) = shortest_vector(&UnimodularLattice::standard(5)).unwrap();
        assert!((l - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cusp_lattice_shortest() {
        let s = ModularSample { x: 0.3, y: 4.0, theta: 0.0 };
        let (v, l) = shortest_vector(&s.lattice()).unwrap();
        assert!((l - 0.5).abs() < 1e-14);
        assert_eq!(v.coords.iter().map(|c| c.abs()).collect::<Vec<_>>(), vec![1, 0]);
        let diag = UnimodularLattice::new(DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0 / 3.0])).unwrap();
        assert!((shortest_vector(&diag).unwrap().1 - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_basis_rejected() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(UnimodularLattice::new(b), Err(Error::Degenerate(_))));
    }

    #[test]
    fn ball_small_cases() {
        let v: Vec<Vec<i64>> = primitive_points_in_ball(2, 1.5).map(|p| p.coords).collect();
        assert_eq!(
            v,
            vec![vec![-1, -1], vec![-1, 0], vec![-1, 1], vec![0, -1], vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]
        );
        // naive triple loop with gcd filter
        let mut naive = vec![];
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                for c in -2i64..=2 {
                    if a * a + b * b + c * c < 4 && gcd_slice(&[a, b, c]) == 1 {
                        naive.push(vec![a, b, c]);
                    }
                }
            }
        }
        let v: Vec<Vec<i64>> = primitive_points_in_ball(3, 2.0).map(|p| p.coords).collect();
        assert_eq!(v, naive);
    }

    #[test]
    fn planar_primitive_density() {
        // #{primitive v : |v| < T} / T^2 tends to pi / zeta(2) = 6 / pi.
        let c = primitive_points_in_ball(2, 200.0).count() as f64 / 200.0f64.powi(2);
        assert!((c / (6.0 / PI) - 1.0).abs() < 0.01, "{c}");
    }

    #[test]
    fn lambda_chi_under_flow() {
        let m = GrassmannModel::new(1, 2).unwrap();
        let id = DMatrix::identity(2, 2);
        assert!((lambda_chi(&id, &m).unwrap() - 1.0).abs() < 1e-15);
        let y = std::f64::consts::E.powi(2);
        let a = DMatrix::from_row_slice(2, 2, &[y.powf(-0.5), 0.0, 0.0, y.sqrt()]);
        assert!((lambda_chi(&a, &m).unwrap() - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn sampler_is_deterministic_and_unimodular() {
        for i in 0..200 {
            let a = haar_sample_indexed(42, i);
            assert_eq!(a, haar_sample_indexed(42, i));
            assert!(a.x.abs() <= 0.5 && a.x * a.x + a.y * a.y >= 1.0 - 1e-12);
            assert!((a.lattice().basis().determinant() - 1.0).abs() < 1e-12);
            assert!((shortest_vector(&a.lattice()).unwrap().1 - 1.0 / a.y.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn tube_covers_nearby_points() {
        let x = [0.6, 0.8];
        let mut got = vec![];
        tube_candidates(&x, 5, |_| 1.0, |v| got.push(v.to_vec()));
        // (3, 4) lies on the line; (1, 2) has orthogonal distance 0.4
        assert!(got.contains(&vec![3, 4]) && got.contains(&vec![1, 2]));
        assert!(got.iter().all(|v| v[1] >= 0 && v[1] <= 5));
    }

    fn arb_basis() -> impl Strategy<Value = Vec<Vec<f64>>> {
        proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 3), 3)
    }

    proptest! {
        #[test]
        fn shortest_is_no_longer_than_enumerated_points(cols in arb_basis()) {
            let Ok(lat) = UnimodularLattice::from_columns(&cols) else { return Ok(()) };
            let red = reduce(&lat.columns()).unwrap();
            let cond = red.cols.iter().map(|c| dot(c, c).sqrt()).fold(0.0, f64::max);
            prop_assume!(cond < 50.0);
            let (v, l) = shortest_vector(&lat).unwrap();
            let p = lat.point(&v.coords);
            prop_assert!((dot(&p, &p).sqrt() - l).abs() < 1e-9);
            lattice_points_within(&lat, l * 1.5, DEFAULT_NODE_LIMIT, |_, pt| {
                assert!(dot(pt, pt).sqrt() >= l - 1e-9);
            }).unwrap();
        }
    }
}
