//! Grassmannians `Gr(l, n)` in their Plücker embedding.
//!
//! `V_chi = wedge^l R^n` has the basis `e_I` indexed by `l`-subsets `I` of
//! `{0, .., n-1}` in lexicographic order; `e_chi = e_0 ∧ .. ∧ e_{l-1}` is
//! index 0. A point of the cone over `Gr(l, n)` is a decomposable vector of
//! `V_chi`. Near `e_chi` the plane of `v` is the row space of `[I | A]` and
//! `A` is the chart coordinate `u_v^-`.

use std::collections::HashMap;
use std::f64::consts::E;
use std::fmt;

use nalgebra::DMatrix;
use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;

use crate::intmat::{self, IntMat};
use crate::lattice::{self, BallPoints};
use crate::numeric::{simpson, unit_ball_volume, zeta};
use crate::{rng, Error, Result};

/// The model `Gr(l, n)` with `dim V = C(n, l)`, `d = l (n - l)` and the
/// critical exponent `beta = n / (l (n - l))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrassmannModel {
    pub ell: usize,
    pub n: usize,
    pub dim_v: usize,
    pub d: usize,
    pub beta: Ratio<i64>,
    subsets: Vec<Vec<usize>>,
    relations: Vec<Relation>,
}

impl fmt::Display for GrassmannModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.ell, self.n)
    }
}

impl GrassmannModel {
    pub fn new(ell: usize, n: usize) -> Result<Self> {
        if ell == 0 || ell >= n || n > 8 {
            return Err(Error::Invalid(format!("need 1 <= l < n <= 8, got l = {ell}, n = {n}")));
        }
        let subsets = subsets(n, ell);
        let d = ell * (n - ell);
        let relations = relation_terms(n, ell, &subsets);
        Ok(GrassmannModel { ell, n, dim_v: subsets.len(), d, beta: Ratio::new(n as i64, d as i64), subsets, relations })
    }

    /// Parses `"l,n"`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::Invalid(format!("model must look like \"l,n\", got {s:?}"));
        if parts.len() != 2 {
            return Err(bad());
        }
        let ell = parts[0].parse().map_err(|_| bad())?;
        let n = parts[1].parse().map_err(|_| bad())?;
        Self::new(ell, n)
    }

    pub fn beta_f64(&self) -> f64 {
        *self.beta.numer() as f64 / *self.beta.denom() as f64
    }

    /// `l`-subsets in lexicographic order; entry `k` indexes coordinate `k` of `V_chi`.
    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn subset_index(&self, s: &[usize]) -> Option<usize> {
        self.subsets.iter().position(|t| t == s)
    }

    /// Coordinates of `e_chi`.
    pub fn e_chi(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim_v];
        v[0] = 1.0;
        v
    }
}

/// All `k`-subsets of `{0, .., n-1}` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    go(0, n, k, &mut vec![], &mut out);
    out
}

fn real_det(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        k => DMatrix::from_fn(k, k, |i, j| m[i][j]).determinant(),
    }
}

/// Exact Plücker vector (all `l x l` minors) of an integer `l x n` matrix.
pub fn plucker_embed(rows: &IntMat) -> Result<Vec<i64>> {
    let ell = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    if ell == 0 || ell > n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid("expected an l x n matrix with l <= n".into()));
    }
    let p = subsets(n, ell)
        .iter()
        .map(|s| intmat::det(&rows.iter().map(|r| s.iter().map(|&j| r[j]).collect()).collect()))
        .collect::<Result<Vec<i64>>>()?;
    if p.iter().all(|&x| x == 0) {
        return Err(Error::Invalid("matrix does not have full row rank".into()));
    }
    Ok(p)
}

/// Real Plücker vector of an `l x n` matrix.
pub fn plucker_real(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows[0].len();
    subsets(n, rows.len())
        .iter()
        .map(|s| real_det(&rows.iter().map(|r| s.iter().map(|&j| r[j]).collect()).collect::<Vec<_>>()))
        .collect()
}

/// `wedge^l g`: entry `(I, J)` is the minor of `g` on rows `I` and columns `J`.
pub fn compound_matrix(g: &DMatrix<f64>, ell: usize) -> DMatrix<f64> {
    let ss = subsets(g.nrows(), ell);
    let k = ss.len();
    DMatrix::from_fn(k, k, |a, b| {
        let m: Vec<Vec<f64>> = ss[a].iter().map(|&i| ss[b].iter().map(|&j| g[(i, j)]).collect()).collect();
        real_det(&m)
    })
}

/// Sign and coordinate index of `e_{seq}` for an unsorted index sequence;
/// `None` when an index repeats.
fn signed_index(subsets: &[Vec<usize>], seq: &[usize]) -> Option<(bool, usize)> {
    let mut s = seq.to_vec();
    let mut sign = false;
    for i in 0..s.len() {
        for j in 0..s.len() - 1 - i {
            if s[j] > s[j + 1] {
                s.swap(j, j + 1);
                sign = !sign;
            }
        }
    }
    if s.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    subsets.iter().position(|t| *t == s).map(|k| (sign, k))
}

/// A quadratic relation as a list of signed products `± p_a p_b`.
type Relation = Vec<(bool, usize, usize)>;

/// The relations `sum_k (-1)^k p_{I + j_k} p_{J - j_k}` for `|I| = l - 1`, `|J| = l + 1`,
/// dropping empty ones.
fn relation_terms(n: usize, ell: usize, subsets_l: &[Vec<usize>]) -> Vec<Relation> {
    let mut out = vec![];
    for i_set in subsets(n, ell - 1) {
        for j_set in subsets(n, ell + 1) {
            let mut rel = vec![];
            for (k, &jk) in j_set.iter().enumerate() {
                let mut left = i_set.clone();
                left.push(jk);
                let right: Vec<usize> = j_set.iter().copied().filter(|&j| j != jk).collect();
                if let (Some((sa, a)), Some((sb, b))) = (signed_index(subsets_l, &left), signed_index(subsets_l, &right)) {
                    rel.push((sa ^ sb ^ (k % 2 == 1), a, b));
                }
            }
            if !rel.is_empty() {
                out.push(rel);
            }
        }
    }
    out
}

fn plucker_relations<T>(p: &[T], model: &GrassmannModel) -> Vec<T>
where
    T: Copy + std::ops::Neg<Output = T> + Default + std::ops::Mul<Output = T> + std::ops::Add<Output = T>,
{
    model
        .relations
        .iter()
        .map(|rel| {
            rel.iter().fold(T::default(), |acc, &(neg, a, b)| {
                let t = p[a] * p[b];
                acc + if neg { -t } else { t }
            })
        })
        .collect()
}

/// Exact check of every quadratic Plücker relation.
pub fn plucker_relations_hold(p: &[i64], model: &GrassmannModel) -> bool {
    model.relations.iter().all(|rel| {
        rel.iter().fold(0i128, |acc, &(neg, a, b)| {
            let t = p[a] as i128 * p[b] as i128;
            if neg {
                acc - t
            } else {
                acc + t
            }
        }) == 0
    })
}

/// Largest Plücker relation residual relative to `|p|^2`.
pub fn plucker_residual(p: &[f64], model: &GrassmannModel) -> f64 {
    let n2: f64 = p.iter().map(|x| x * x).sum();
    plucker_relations(p, model).into_iter().fold(0.0f64, |m, r| m.max(r.abs())) / n2.max(f64::MIN_POSITIVE)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A rational point: saturated row lattice in Hermite normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RationalSubspace {
    pub basis: IntMat,
    pub plucker: Vec<i64>,
    #[serde(skip)]
    pub height_sq: i64,
}

impl RationalSubspace {
    /// Saturates and canonicalises the row space of `rows`.
    pub fn from_rows(rows: &IntMat) -> Result<Self> {
        let sat = intmat::saturate(rows)?;
        if sat.len() != rows.len() {
            return Err(Error::Invalid("rows are linearly dependent".into()));
        }
        let plucker = plucker_embed(&sat)?;
        debug_assert_eq!(intmat::gcd_slice(&plucker), 1);
        let height_sq = plucker.iter().try_fold(0i64, |s, &x| s.checked_add(x.checked_mul(x)?)).ok_or(Error::Overflow("height"))?;
        Ok(RationalSubspace { basis: sat, plucker, height_sq })
    }

    pub fn height(&self) -> f64 {
        (self.height_sq as f64).sqrt()
    }

    pub fn plucker_f64(&self) -> Vec<f64> {
        self.plucker.iter().map(|&x| x as f64).collect()
    }
}

pub fn height(v: &RationalSubspace) -> f64 {
    v.height()
}

/// A real point of `Gr(l, n)` given by an orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FlagPoint {
    pub model: GrassmannModel,
    pub frame: Vec<Vec<f64>>,
}

impl FlagPoint {
    /// Orthonormalises the rows (Gram–Schmidt).
    pub fn from_rows(model: &GrassmannModel, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != model.ell || rows.iter().any(|r| r.len() != model.n) {
            return Err(Error::Invalid(format!("frame must be {} x {}", model.ell, model.n)));
        }
        let frame = orthonormalize(rows).ok_or_else(|| Error::Degenerate("frame rows are dependent".into()))?;
        Ok(FlagPoint { model: model.clone(), frame })
    }

    pub fn base_point(model: &GrassmannModel) -> Self {
        let frame = (0..model.ell).map(|i| (0..model.n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        FlagPoint { model: model.clone(), frame }
    }

    pub fn from_subspace(model: &GrassmannModel, v: &RationalSubspace) -> Result<Self> {
        let rows: Vec<Vec<f64>> = v.basis.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
        Self::from_rows(model, &rows)
    }

    /// Unit Plücker vector of the frame.
    pub fn plucker(&self) -> Vec<f64> {
        plucker_real(&self.frame)
    }

    /// A rotation `k_x` in `SO(n)` with `k_x x_0 = x`: its first `l` columns are the frame.
    pub fn rotation(&self) -> DMatrix<f64> {
        let n = self.model.n;
        let mut rows = self.frame.clone();
        for i in 0..n {
            if rows.len() == n {
                break;
            }
            let mut cand = rows.clone();
            cand.push((0..n).map(|j| f64::from(u8::from(i == j))).collect());
            if let Some(o) = orthonormalize(&cand) {
                let last = o[o.len() - 1].clone();
                if norm(&last) > 0.5 {
                    rows = o;
                }
            }
        }
        let mut k = DMatrix::from_fn(n, n, |i, j| rows[j][i]);
        if k.determinant() < 0.0 {
            for i in 0..n {
                k[(i, n - 1)] = -k[(i, n - 1)];
            }
        }
        k
    }

    pub fn frame_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.frame.len() {
            for j in 0..self.frame.len() {
                let d: f64 = self.frame[i].iter().zip(&self.frame[j]).map(|(a, b)| a * b).sum();
                r = r.max((d - f64::from(u8::from(i == j))).abs());
            }
        }
        r
    }
}

fn orthonormalize(rows: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = vec![];
    for r in rows {
        let mut v = r.clone();
        // two passes for stability
        for _ in 0..2 {
            for q in &out {
                let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= d * qi;
                }
            }
        }
        let nv = norm(&v);
        if nv < 1e-10 * norm(r).max(1.0) {
            return None;
        }
        out.push(v.into_iter().map(|x| x / nv).collect());
    }
    Some(out)
}

/// A nonzero decomposable vector of `V_chi`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeVector {
    pub model: GrassmannModel,
    pub plucker: Vec<f64>,
}

impl ConeVector {
    pub fn new(model: &GrassmannModel, plucker: Vec<f64>) -> Result<Self> {
        if plucker.len() != model.dim_v {
            return Err(Error::Invalid(format!("expected {} Plücker coordinates", model.dim_v)));
        }
        if plucker.iter().all(|&x| x == 0.0) {
            return Err(Error::Invalid("zero vector".into()));
        }
        Ok(ConeVector { model: model.clone(), plucker })
    }

    /// `vplus * pl([I | A])` with `A` given row-major as `l x (n - l)`.
    pub fn from_chart(model: &GrassmannModel, vplus: f64, a: &[f64]) -> Result<Self> {
        let (ell, n) = (model.ell, model.n);
        if a.len() != ell * (n - ell) {
            return Err(Error::Invalid("chart coordinate has the wrong size".into()));
        }
        let rows: Vec<Vec<f64>> = (0..ell)
            .map(|i| {
                let mut r = vec![0.0; n];
                r[i] = 1.0;
                r[ell..].copy_from_slice(&a[i * (n - ell)..(i + 1) * (n - ell)]);
                r
            })
            .collect();
        let p = plucker_real(&rows).into_iter().map(|x| x * vplus).collect();
        Self::new(model, p)
    }

    pub fn from_integer(model: &GrassmannModel, p: &[i64]) -> Result<Self> {
        Self::new(model, p.iter().map(|&x| x as f64).collect())
    }

    pub fn norm(&self) -> f64 {
        norm(&self.plucker)
    }

    /// Coordinate on `e_chi`.
    pub fn vplus(&self) -> f64 {
        self.plucker[0]
    }

    /// Chart coordinate `A` (row-major), or [`Error::OutsideChart`].
    pub fn uminus(&self) -> Result<Vec<f64>> {
        let (ell, n) = (self.model.ell, self.model.n);
        let top = self.plucker[0];
        if top == 0.0 {
            return Err(Error::OutsideChart);
        }
        let mut a = Vec::with_capacity(ell * (n - ell));
        for i in 0..ell {
            for j in 0..n - ell {
                let mut s: Vec<usize> = (0..ell).filter(|&k| k != i).collect();
                s.push(ell + j);
                let idx = self.model.subset_index(&s).expect("subset");
                let sign = if (ell - 1 - i) % 2 == 0 { 1.0 } else { -1.0 };
                a.push(sign * self.plucker[idx] / top);
            }
        }
        Ok(a)
    }

    pub fn uminus_norm(&self) -> Result<f64> {
        Ok(norm(&self.uminus()?))
    }

    /// `g v` for `g` acting on `R^n`.
    pub fn act(&self, g: &DMatrix<f64>) -> ConeVector {
        let c = compound_matrix(g, self.model.ell);
        let p = c * DMatrix::from_column_slice(self.model.dim_v, 1, &self.plucker);
        ConeVector { model: self.model.clone(), plucker: p.iter().copied().collect() }
    }
}

/// `(v^+, u_v^-)` of a decomposable vector.
pub fn cone_coords(v: &ConeVector) -> Result<(f64, Vec<f64>)> {
    Ok((v.vplus(), v.uminus()?))
}

/// Projective distance `arccos(|<u, w>| / (|u| |w|))` on Plücker vectors.
pub fn distance(u: &[f64], w: &[f64]) -> Result<f64> {
    let (nu, nw) = (norm(u), norm(w));
    if nu == 0.0 || nw == 0.0 || u.len() != w.len() {
        return Err(Error::Invalid("distance needs two nonzero vectors of equal length".into()));
    }
    let uh: Vec<f64> = u.iter().map(|x| x / nu).collect();
    let proj: f64 = uh.iter().zip(w).map(|(a, b)| a * b).sum();
    let perp: f64 = w.iter().zip(&uh).map(|(b, a)| (b - proj * a).powi(2)).sum::<f64>().sqrt();
    Ok(perp.atan2(proj.abs()))
}

/// Distance from `x_0 = [e_chi]`.
pub fn distance_to_base(v: &[f64]) -> f64 {
    let perp = v[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    perp.atan2(v[0].abs())
}

/// The diagonal flow `a(y) = diag(y^{-(n-l)/n} I_l, y^{l/n} I_{n-l})`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagFlow {
    pub model: GrassmannModel,
    pub y: f64,
}

impl DiagFlow {
    pub fn new(model: &GrassmannModel, y: f64) -> Result<Self> {
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::Invalid(format!("flow parameter must be positive, got {y}")));
        }
        Ok(DiagFlow { model: model.clone(), y })
    }

    fn entries(&self) -> Vec<f64> {
        let (ell, n) = (self.model.ell as f64, self.model.n as f64);
        (0..self.model.n)
            .map(|i| if i < self.model.ell { self.y.powf(-(n - ell) / n) } else { self.y.powf(ell / n) })
            .collect()
    }

    /// The matrix on `R^n`.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.entries()))
    }

    /// The diagonal of the induced action on `V_chi`.
    pub fn on_v(&self) -> Vec<f64> {
        let e = self.entries();
        self.model.subsets().iter().map(|s| s.iter().map(|&i| e[i]).product()).collect()
    }

    pub fn apply(&self, v: &ConeVector) -> ConeVector {
        let p = v.plucker.iter().zip(self.on_v()).map(|(a, b)| a * b).collect();
        ConeVector { model: v.model.clone(), plucker: p }
    }
}

pub fn diag_flow(model: &GrassmannModel, y: f64) -> Result<DiagFlow> {
    DiagFlow::new(model, y)
}

/// Default value of the sandwich constant `C_0`.
pub const DEFAULT_C0: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionKind {
    /// `d(x_0, [v]) < c |v|^{-tau}`, `1 <= |v| < T`.
    E,
    /// `|u_v^-| < c |v^+|^{-beta}`, `1 <= |v^+| < c T`.
    Eplus,
    /// `|u_v^-| < c |v^+|^{-beta}`, `1 <= |v^+| < e`.
    F,
    /// `|v| <= C_0 l`.
    Q,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub t: f64,
    pub c: f64,
    /// Exponent in the `E` region; `beta` unless chosen otherwise.
    pub tau: f64,
    pub ell_index: u32,
    pub beta: f64,
    pub c0: f64,
    /// `l` of the model, used for the support radius.
    pub model_ell: usize,
}

impl RegionSpec {
    fn base(model: &GrassmannModel, kind: RegionKind) -> Self {
        RegionSpec {
            kind,
            t: 1.0,
            c: 1.0,
            tau: model.beta_f64(),
            ell_index: 1,
            beta: model.beta_f64(),
            c0: DEFAULT_C0,
            model_ell: model.ell,
        }
    }

    fn check(self) -> Result<Self> {
        if !(self.t >= 1.0) || !self.t.is_finite() {
            return Err(Error::Invalid(format!("T must be finite and >= 1, got {}", self.t)));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::Invalid(format!("c must be positive, got {}", self.c)));
        }
        if self.kind == RegionKind::Q && self.ell_index == 0 {
            return Err(Error::Invalid("Q needs l >= 1".into()));
        }
        Ok(self)
    }

    /// `E_beta(T)`.
    pub fn e(model: &GrassmannModel, t: f64) -> Result<Self> {
        RegionSpec { t, ..Self::base(model, RegionKind::E) }.check()
    }

    /// `E` with general constant and exponent.
    pub fn e_general(model: &GrassmannModel, t: f64, c: f64, tau: f64) -> Result<Self> {
        RegionSpec { t, c, tau, ..Self::base(model, RegionKind::E) }.check()
    }

    pub fn eplus(model: &GrassmannModel, t: f64, c: f64) -> Result<Self> {
        RegionSpec { t, c, ..Self::base(model, RegionKind::Eplus) }.check()
    }

    pub fn f(model: &GrassmannModel, c: f64) -> Result<Self> {
        RegionSpec { c, ..Self::base(model, RegionKind::F) }.check()
    }

    pub fn q(model: &GrassmannModel, ell_index: u32, c0: f64) -> Result<Self> {
        RegionSpec { ell_index, c0, ..Self::base(model, RegionKind::Q) }.check()
    }

    /// `max |v|` over the region, when bounded.
    ///
    /// In the chart `|v|^2 = (v^+)^2 det(I + A A^T) <= (v^+)^2 (1 + |A|^2)^l`
    /// and `|A| < c` once `|v^+| >= 1`.
    pub fn support_radius(&self) -> f64 {
        match self.kind {
            RegionKind::E => self.t,
            RegionKind::Q => self.c0 * self.ell_index as f64,
            RegionKind::F | RegionKind::Eplus => {
                let top = if self.kind == RegionKind::F { E } else { self.c * self.t };
                top * (1.0 + self.c * self.c).powf(self.model_ell as f64 / 2.0)
            }
        }
    }
}

/// `(1 + C_0 l^{-beta})^{-(1 + beta)}`.
pub fn c_hat(beta: f64, c0: f64, ell_index: u32) -> f64 {
    (1.0 + c0 * (ell_index as f64).powf(-beta)).powf(-(1.0 + beta))
}

fn chart_window(v: &ConeVector, c: f64, beta: f64, lo: f64, hi: f64) -> bool {
    let vp = v.vplus().abs();
    if !(vp >= lo && vp < hi) {
        return false;
    }
    match v.uminus_norm() {
        Ok(u) => u < c * vp.powf(-beta),
        Err(_) => false,
    }
}

/// Relative slack on norm bounds, so that rotated integer vectors whose norm
/// sits exactly on a bound are classified by their exact norm.
pub const NORM_GUARD: f64 = 1e-12;

/// Membership in a region, with the strict and weak inequalities of its definition.
pub fn region_contains(spec: &RegionSpec, v: &ConeVector) -> bool {
    match spec.kind {
        RegionKind::E => {
            let nv = v.norm();
            nv >= 1.0 - NORM_GUARD && nv < spec.t * (1.0 - NORM_GUARD) && distance_to_base(&v.plucker) < spec.c * nv.powf(-spec.tau)
        }
        RegionKind::Eplus => chart_window(v, spec.c, spec.beta, 1.0, spec.c * spec.t),
        RegionKind::F => chart_window(v, spec.c, spec.beta, 1.0, E),
        RegionKind::Q => v.norm() <= spec.c0 * spec.ell_index as f64 * (1.0 + NORM_GUARD),
    }
}

/// `y_i = e^{beta i}`.
pub fn cell_flow(model: &GrassmannModel, i: usize) -> DiagFlow {
    DiagFlow { model: model.clone(), y: (model.beta_f64() * i as f64).exp() }
}

/// Every `i < cells` with `a(y_i) v ∈ F_c`, tested through the flow action.
pub fn cells_containing(model: &GrassmannModel, c: f64, v: &ConeVector, cells: usize) -> Vec<usize> {
    let f = RegionSpec { c, ..RegionSpec::base(model, RegionKind::F) };
    (0..cells).filter(|&i| region_contains(&f, &cell_flow(model, i).apply(v))).collect()
}

/// The cell of `v`: `i = floor(ln |v^+|)`, returned only if `a(y_i) v ∈ F_c`.
pub fn cell_index(model: &GrassmannModel, c: f64, v: &ConeVector) -> Option<usize> {
    let vp = v.vplus().abs();
    if !(vp >= 1.0) || !vp.is_finite() {
        return None;
    }
    let i = vp.ln().floor() as usize;
    // guard against ln rounding at the cell walls
    [i.saturating_sub(1), i, i + 1].into_iter().find(|&j| {
        let f = RegionSpec { c, ..RegionSpec::base(model, RegionKind::F) };
        region_contains(&f, &cell_flow(model, j).apply(v))
    })
}

/// Planar Hermite constant `gamma_2 = 2 / sqrt(3)`.
pub const HERMITE_GAMMA2: f64 = 1.154_700_538_379_251_5;

/// Upper bound on the number of integer points scanned before refusing.
pub const ENUMERATION_GUARD: f64 = 2e9;

pub(crate) fn line_canonical(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

fn ball_guard(n: usize, r: f64) -> Result<()> {
    let est = unit_ball_volume(n) * (r + 1.0).powi(n as i32);
    if est > ENUMERATION_GUARD {
        return Err(Error::ResourceGuard(format!("about {est:.1e} integer points in a ball of radius {r} in dimension {n}")));
    }
    Ok(())
}

/// All rational points of height `< t`, sorted by height then Plücker vector.
///
/// Supported: `(1, n)` for `n <= 6`, `(n - 1, n)` for `n <= 6` through the
/// normal vector, and `(2, 4)`.
pub fn enumerate_rational_points(model: &GrassmannModel, t: f64) -> Result<Vec<RationalSubspace>> {
    let (ell, n) = (model.ell, model.n);
    let t2 = t * t;
    let mut out = if ell == 1 && n <= 6 {
        ball_guard(n, t)?;
        lattice::primitive_points_in_ball(n, t)
            .filter(|v| line_canonical(&v.coords))
            .map(|v| RationalSubspace::from_rows(&vec![v.coords]))
            .collect::<Result<Vec<_>>>()?
    } else if ell + 1 == n && n <= 6 {
        ball_guard(n, t)?;
        lattice::primitive_points_in_ball(n, t)
            .filter(|v| line_canonical(&v.coords))
            .map(|v| RationalSubspace::from_rows(&intmat::integer_kernel(&vec![v.coords], n)?))
            .collect::<Result<Vec<_>>>()?
    } else if ell == 2 && n == 4 {
        enumerate_planes_r4(t)?
    } else {
        return Err(Error::Invalid(format!("rational point enumeration is not implemented for {model}")));
    };
    out.retain(|v| (v.height_sq as f64) < t2);
    out.sort_by(|a, b| a.height_sq.cmp(&b.height_sq).then_with(|| a.plucker.cmp(&b.plucker)));
    Ok(out)
}

/// Rational planes in `Q^4` of height `< t`.
///
/// Every such plane has a primitive vector `v1` with `|v1|^2 <= gamma_2 H`.
/// For each candidate `v1` the planes through it correspond to primitive
/// vectors of the projected quotient lattice `Z^4 / Z v1`, and the height is
/// `|v1|` times the norm of that projection.
fn enumerate_planes_r4(t: f64) -> Result<Vec<RationalSubspace>> {
    let r1_sq = HERMITE_GAMMA2 * t;
    ball_guard(4, r1_sq.sqrt())?;
    let est = 4.2 * t.powi(3) * std::f64::consts::PI.powi(2) * r1_sq / 2.0;
    if est > ENUMERATION_GUARD {
        return Err(Error::ResourceGuard(format!("about {est:.1e} quotient candidates for T = {t}")));
    }
    let t2 = t * t;
    let mut found: HashMap<Vec<i64>, (Vec<i64>, Vec<i64>)> = HashMap::new();
    for v1 in BallPoints::new(4, r1_sq.sqrt() + 1e-9) {
        let n1: i64 = v1.iter().map(|x| x * x).sum();
        if n1 == 0 || (n1 as f64) > r1_sq || !line_canonical(&v1) || !intmat::is_primitive(&v1) {
            continue;
        }
        let (b, _) = intmat::unimodular_completion(&v1)?;
        let cols: Vec<Vec<i64>> = (1..4).map(|k| b.iter().map(|r| r[k]).collect()).collect();
        let v1f: Vec<f64> = v1.iter().map(|&x| x as f64).collect();
        let proj: Vec<Vec<f64>> = cols
            .iter()
            .map(|c| {
                let s = c.iter().zip(&v1).map(|(a, b)| a * b).sum::<i64>() as f64 / n1 as f64;
                c.iter().zip(&v1f).map(|(&a, b)| a as f64 - s * b).collect()
            })
            .collect();
        let red = lattice::lll(&proj)?;
        let r2 = t2 / n1 as f64;
        let mut err = None;
        lattice::fincke_pohst(&red.cols, r2, lattice::DEFAULT_NODE_LIMIT, |z, _| {
            if err.is_some() || !line_canonical(z) || !intmat::is_primitive(z) {
                return;
            }
            let c = red.original_coords(z);
            let v2: Vec<i64> = (0..4).map(|i| (0..3).map(|k| c[k] * cols[k][i]).sum()).collect();
            match plucker_embed(&vec![v1.clone(), v2.clone()]) {
                Ok(p) => {
                    let h2: i64 = p.iter().map(|x| x * x).sum();
                    if (h2 as f64) < t2 {
                        let key = intmat::primitive_part(&p);
                        found.entry(key).or_insert_with(|| (v1.clone(), v2));
                    }
                }
                Err(e) => err = Some(e),
            }
        })?;
        if let Some(e) = err {
            return Err(e);
        }
    }
    found.into_values().map(|(a, b)| RationalSubspace::from_rows(&vec![a, b])).collect()
}

/// A `sigma_X`-distributed point: orthonormalised rows of a Gaussian matrix.
pub fn sample_uniform_point<R: Rng + ?Sized>(model: &GrassmannModel, r: &mut R) -> FlagPoint {
    loop {
        let rows: Vec<Vec<f64>> = (0..model.ell).map(|_| (0..model.n).map(|_| rng::gaussian(r)).collect()).collect();
        if let Ok(p) = FlagPoint::from_rows(model, &rows) {
            return p;
        }
    }
}

/// Scale `omega_0` of the invariant measure `|v^+|^{n-1} dv^+ du` on the cone,
/// and whether it is the absolute normalisation of the mean value formula.
///
/// For lines the cone is `R^n \ {0}` with Lebesgue measure divided by
/// `zeta(n)`. Other models use `omega_0 = 1`.
pub fn measure_normalization(model: &GrassmannModel) -> (f64, bool) {
    if model.ell == 1 {
        (1.0 / zeta(model.n as u32), true)
    } else {
        (1.0, false)
    }
}

/// `lambda(F_c)` by quadrature over `|v^+|`, integrating the volume of the
/// `u`-ball of radius `c |v^+|^{-beta}` against `2 |v^+|^{n-1}`.
pub fn cone_volume_f_quadrature(model: &GrassmannModel, c: f64) -> f64 {
    let (w0, _) = measure_normalization(model);
    let (n, d, beta) = (model.n as i32, model.d, model.beta_f64());
    let ball = unit_ball_volume(d);
    let integrand = |p: f64| 2.0 * p.powi(n - 1) * ball * (c * p.powf(-beta)).powi(d as i32);
    w0 * simpson(integrand, 1.0, E, 4000)
}

/// Monte Carlo estimate of `lambda(F_c)`: uniform draws of `(v^+, A)` in a
/// box, weighted by the density `|v^+|^{n-1}` and tested with [`region_contains`].
pub fn cone_volume_f_mc(model: &GrassmannModel, c: f64, samples: u64, seed: u64) -> Result<(f64, f64)> {
    let (w0, _) = measure_normalization(model);
    let f = RegionSpec::f(model, c)?;
    let d = model.d;
    let boxvol = 2.0 * (E - 1.0) * (2.0 * c).powi(d as i32);
    let vals: Vec<f64> = (0..samples)
        .map(|i| {
            let mut r = rng::stream(seed, rng::streams::CONE_VOLUME, i);
            let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
            let p = 1.0 + (E - 1.0) * rng::uniform(&mut r);
            let a: Vec<f64> = (0..d).map(|_| c * (2.0 * rng::uniform(&mut r) - 1.0)).collect();
            let v = ConeVector::from_chart(model, sign * p, &a).expect("chart vector");
            if region_contains(&f, &v) {
                w0 * boxvol * p.powi(model.n as i32 - 1)
            } else {
                0.0
            }
        })
        .collect();
    Ok(crate::numeric::mean_stderr(&vals))
}

/// `max |d(x_0, [v]) - |u|| / |u|^2` over `directions` random chart
/// directions at fixed `|u|`.
pub fn distance_expansion_ratio(model: &GrassmannModel, unorm: f64, directions: u64, seed: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..directions {
        let mut r = rng::stream(seed, rng::streams::AUX, i);
        let mut a: Vec<f64> = (0..model.d).map(|_| rng::gaussian(&mut r)).collect();
        let na = norm(&a);
        a.iter_mut().for_each(|x| *x *= unorm / na);
        let v = ConeVector::from_chart(model, 1.0, &a)?;
        let u = v.uminus_norm()?;
        worst = worst.max((distance_to_base(&v.plucker) - u).abs() / (u * u));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(l: usize, n: usize) -> GrassmannModel {
        GrassmannModel::new(l, n).unwrap()
    }

    #[test]
    fn model_constants() {
        let g = m(2, 4);
        assert_eq!((g.dim_v, g.d), (6, 4));
        assert_eq!(g.beta, Ratio::new(1, 1));
        assert_eq!(m(1, 3).beta, Ratio::new(3, 2));
        assert!(GrassmannModel::new(2, 2).is_err());
    }

    #[test]
    fn plucker_examples() {
        assert_eq!(plucker_embed(&vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0]]).unwrap(), vec![1, 0, 0, 0, 0, 0]);
        assert_eq!(plucker_embed(&vec![vec![1, 0, 0, 0], vec![0, 1, 1, 0]]).unwrap(), vec![1, 1, 0, 0, 0, 0]);
        assert_eq!(plucker_embed(&vec![vec![1, 0, 1, 0], vec![0, 1, 0, 1]]).unwrap(), vec![1, 0, 1, -1, 0, 1]);
    }

    #[test]
    fn height_examples() {
        assert_eq!(RationalSubspace::from_rows(&vec![vec![1, 0]]).unwrap().height(), 1.0);
        assert_eq!(RationalSubspace::from_rows(&vec![vec![3, 4]]).unwrap().height(), 5.0);
        assert_eq!(RationalSubspace::from_rows(&vec![vec![6, 8]]).unwrap().height(), 5.0);
        let p = RationalSubspace::from_rows(&vec![vec![1, 0, 1, 0], vec![0, 1, 0, 1]]).unwrap();
        assert_eq!(p.height(), 2.0);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!((distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((distance(&[1.0, 0.0], &[1.0, 1.0]).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(distance(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn chart_examples() {
        let g = m(1, 2);
        let v = ConeVector::new(&g, vec![2.0, 3.0]).unwrap();
        let (vp, u) = cone_coords(&v).unwrap();
        assert_eq!((vp, u), (2.0, vec![1.5]));
        let e = ConeVector::new(&m(2, 4), m(2, 4).e_chi()).unwrap();
        assert_eq!(cone_coords(&e).unwrap(), (1.0, vec![0.0; 4]));
        assert_eq!(ConeVector::new(&g, vec![0.0, 1.0]).unwrap().uminus(), Err(Error::OutsideChart));
    }

    #[test]
    fn chart_round_trip_and_row_basis() {
        // u^- = M1^{-1} M2 for any row basis [M1 | M2]
        let g = m(2, 4);
        let rows = vec![vec![2.0, 1.0, 0.5, -1.0], vec![1.0, 3.0, 2.0, 0.25]];
        let v = ConeVector::new(&g, plucker_real(&rows)).unwrap();
        let a = v.uminus().unwrap();
        let m1 = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let m2 = DMatrix::from_row_slice(2, 2, &[0.5, -1.0, 2.0, 0.25]);
        let want = m1.try_inverse().unwrap() * m2;
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i * 2 + j] - want[(i, j)]).abs() < 1e-12);
            }
        }
        let back = ConeVector::from_chart(&g, v.vplus(), &a).unwrap();
        for (x, y) in back.plucker.iter().zip(&v.plucker) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn flow_examples() {
        let f = diag_flow(&m(1, 2), 4.0).unwrap();
        assert_eq!(f.matrix(), DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 2.0]));
        for (l, n) in [(1, 2), (1, 3), (2, 4), (2, 5)] {
            let g = m(l, n);
            let y = 3.7;
            let fl = diag_flow(&g, y).unwrap();
            assert!((fl.matrix().determinant() - 1.0).abs() < 1e-12);
            assert!((fl.on_v()[0] - y.powf(-1.0 / g.beta_f64())).abs() < 1e-12);
        }
    }

    #[test]
    fn region_examples() {
        let g = m(1, 2);
        let e = ConeVector::new(&g, vec![1.0, 0.0]).unwrap();
        assert!(region_contains(&RegionSpec::e(&g, 2.0).unwrap(), &e));
        let f1 = RegionSpec::f(&g, 1.0).unwrap();
        assert!(region_contains(&f1, &ConeVector::new(&g, vec![1.5, 0.0]).unwrap()));
        assert!(!region_contains(&f1, &ConeVector::new(&g, vec![E, 0.0]).unwrap()));
        assert!(region_contains(&RegionSpec::q(&g, 1, 8.0).unwrap(), &ConeVector::new(&g, vec![8.0, 0.0]).unwrap()));
    }

    #[test]
    fn cell_index_examples() {
        let g = m(1, 2);
        assert_eq!(cell_index(&g, 1.0, &ConeVector::new(&g, vec![1.5, 0.01]).unwrap()), Some(0));
        let vp = 2.3f64.exp();
        let v = ConeVector::from_chart(&g, vp, &[0.5 * vp.powi(-2)]).unwrap();
        assert_eq!(cell_index(&g, 1.0, &v), Some(2));
        assert_eq!(cells_containing(&g, 1.0, &v, 8), vec![2]);
    }

    #[test]
    fn enumeration_small_cases() {
        let lines = enumerate_rational_points(&m(1, 2), 2.5).unwrap();
        let mut got: Vec<Vec<i64>> = lines.iter().map(|l| l.basis[0].clone()).collect();
        got.sort();
        assert_eq!(got, vec![vec![0, 1], vec![1, -2], vec![1, -1], vec![1, 0], vec![1, 1], vec![1, 2], vec![2, -1], vec![2, 1]]);
        let planes = enumerate_rational_points(&m(2, 4), 1.4).unwrap();
        assert_eq!(planes.len(), 6);
        assert!(planes.iter().all(|p| p.height_sq == 1));
        // Height sqrt(2) < 1.5: two entries ±1 in non-complementary positions,
        // 12 position pairs times 2 projective sign classes.
        let planes = enumerate_rational_points(&m(2, 4), 1.5).unwrap();
        assert_eq!(planes.len(), 6 + 24);
        assert_eq!(planes.iter().filter(|p| p.height_sq == 2).count(), 24);
    }

    #[test]
    fn hyperplanes_match_normals() {
        let hs = enumerate_rational_points(&m(2, 3), 3.0).unwrap();
        let ls = enumerate_rational_points(&m(1, 3), 3.0).unwrap();
        assert_eq!(hs.len(), ls.len());
        assert!(hs.iter().all(|h| plucker_relations_hold(&h.plucker, &m(2, 3))));
    }

    #[test]
    fn planes_match_naive_box_scan() {
        // A reduced basis of a plane of height H has 1 <= |v1| <= |v2| and
        // |v1| |v2| <= (2/sqrt 3) H, so both vectors lie in the ball of radius (2/sqrt 3) T.
        let t = 3.2;
        let model = m(2, 4);
        let fast: std::collections::BTreeSet<Vec<i64>> =
            enumerate_rational_points(&model, t).unwrap().into_iter().map(|p| p.basis.concat()).collect();
        let bound = HERMITE_GAMMA2 * t;
        let b = bound.floor() as i64;
        let mut vecs: Vec<Vec<i64>> = vec![];
        for a0 in -b..=b {
            for a1 in -b..=b {
                for a2 in -b..=b {
                    for a3 in -b..=b {
                        let v = vec![a0, a1, a2, a3];
                        let n2 = v.iter().map(|x| x * x).sum::<i64>();
                        if n2 > 0 && (n2 as f64) <= bound * bound {
                            vecs.push(v);
                        }
                    }
                }
            }
        }
        let mut slow = std::collections::BTreeSet::new();
        for (i, a) in vecs.iter().enumerate() {
            for c in &vecs[i + 1..] {
                let Ok(p) = plucker_embed(&vec![a.clone(), c.clone()]) else { continue };
                if (p.iter().map(|x| x * x).sum::<i64>() as f64) >= t * t {
                    continue;
                }
                let s = RationalSubspace::from_rows(&vec![a.clone(), c.clone()]).unwrap();
                if (s.height_sq as f64) < t * t {
                    slow.insert(s.basis.concat());
                }
            }
        }
        assert_eq!(fast, slow);
        assert!(fast.len() > 6);
    }

    #[test]
    fn rotation_maps_base_point() {
        let mut r = rng::stream(3, 9, 0);
        for (l, n) in [(1, 2), (1, 3), (2, 4)] {
            let g = m(l, n);
            let x = sample_uniform_point(&g, &mut r);
            let k = x.rotation();
            assert!((k.determinant() - 1.0).abs() < 1e-12);
            assert!(((k.transpose() * &k) - DMatrix::identity(n, n)).abs().max() < 1e-12);
            let img = ConeVector::new(&g, g.e_chi()).unwrap().act(&k);
            assert!(distance(&img.plucker, &x.plucker()).unwrap() < 1e-7);
        }
    }

    #[test]
    fn cone_volume_quadrature_vs_closed_form() {
        let pi = std::f64::consts::PI;
        assert!((cone_volume_f_quadrature(&m(1, 2), 1.0) - 24.0 / (pi * pi)).abs() < 1e-9);
        assert!((cone_volume_f_quadrature(&m(1, 3), 0.5) - 2.0 * pi * 0.25 / zeta(3)).abs() < 1e-9);
        let r = cone_volume_f_quadrature(&m(2, 4), 0.5) / cone_volume_f_quadrature(&m(2, 4), 1.0);
        assert!((r - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn cone_volume_mc_agrees_with_quadrature() {
        let g = m(1, 2);
        let (est, se) = cone_volume_f_mc(&g, 1.0, 400_000, 5).unwrap();
        let q = cone_volume_f_quadrature(&g, 1.0);
        assert!((est - q).abs() < 4.0 * se && se / q < 0.005, "{est} {se} {q}");
    }

    proptest! {
        #[test]
        fn flow_scales_chart_coordinates(a in proptest::collection::vec(-2.0f64..2.0, 4), vp in 0.5f64..5.0, y in 0.2f64..20.0) {
            let g = m(2, 4);
            let v = ConeVector::from_chart(&g, vp, &a).unwrap();
            prop_assert!(plucker_residual(&v.plucker, &g) < 1e-9);
            let w = diag_flow(&g, y).unwrap().apply(&v);
            let (wp, wu) = cone_coords(&w).unwrap();
            prop_assert!((wp - y.powf(-1.0) * vp).abs() < 1e-9 * vp);
            for (x, z) in wu.iter().zip(&a) {
                prop_assert!((x - y * z).abs() < 1e-9 * (1.0 + y * z.abs()));
            }
        }
    }
}
