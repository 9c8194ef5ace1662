//! Exact integer linear algebra on small dense matrices.
//!
//! Matrices are `Vec<Vec<i64>>` in row-major form. Every operation uses
//! checked arithmetic and reports [`Error::Overflow`] instead of wrapping.

use crate::{Error, Result};

pub type IntMat = Vec<Vec<i64>>;

fn mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::Overflow("intmat"))
}

fn add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow("intmat"))
}

/// `a*x + b*y`, checked.
fn lin(a: i64, x: i64, b: i64, y: i64) -> Result<i64> {
    add(mul(a, x)?, mul(b, y)?)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

pub fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0, |g, &x| gcd(g, x))
}

pub fn is_primitive(v: &[i64]) -> bool {
    gcd_slice(v) == 1
}

/// Returns `(g, x, y)` with `g = gcd(a, b) >= 0` and `a*x + b*y = g`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a as i128, b as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (r0, s0, t0) = (-r0, -s0, -t0);
    }
    (r0 as i64, s0 as i64, t0 as i64)
}

/// Divides out the content and fixes the sign so the first nonzero entry is positive.
pub fn primitive_part(v: &[i64]) -> Vec<i64> {
    let g = gcd_slice(v);
    if g == 0 {
        return v.to_vec();
    }
    let sign = v.iter().find(|&&x| x != 0).map_or(1, |x| x.signum());
    v.iter().map(|x| x / g * sign).collect()
}

pub fn identity(n: usize) -> IntMat {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

pub fn transpose(a: &IntMat) -> IntMat {
    if a.is_empty() {
        return vec![];
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn mat_vec(a: &IntMat, v: &[i64]) -> Result<Vec<i64>> {
    a.iter()
        .map(|row| row.iter().zip(v).try_fold(0i64, |s, (&x, &y)| add(s, mul(x, y)?)))
        .collect()
}

pub fn mat_mul(a: &IntMat, b: &IntMat) -> Result<IntMat> {
    let bt = transpose(b);
    a.iter().map(|row| mat_vec(&bt, row)).collect()
}

/// Replace columns `p`, `q` of `m` by `(x*cp + y*cq, z*cp + w*cq)`.
fn col_op(m: &mut IntMat, p: usize, q: usize, x: i64, y: i64, z: i64, w: i64) -> Result<()> {
    for row in m.iter_mut() {
        let (a, b) = (row[p], row[q]);
        row[p] = lin(x, a, y, b)?;
        row[q] = lin(z, a, w, b)?;
    }
    Ok(())
}

/// Replace rows `p`, `q` of `m` by `(x*rp + y*rq, z*rp + w*rq)`.
fn row_op(m: &mut IntMat, p: usize, q: usize, x: i64, y: i64, z: i64, w: i64) -> Result<()> {
    for j in 0..m[p].len() {
        let (a, b) = (m[p][j], m[q][j]);
        m[p][j] = lin(x, a, y, b)?;
        m[q][j] = lin(z, a, w, b)?;
    }
    Ok(())
}

/// Unimodular completion of a primitive vector.
///
/// Returns `(b, b_inv)` with `det b = 1`, first column of `b` equal to `v`,
/// and `b * b_inv = I`.
pub fn unimodular_completion(v: &[i64]) -> Result<(IntMat, IntMat)> {
    let n = v.len();
    if !is_primitive(v) {
        return Err(Error::Invalid(format!("{v:?} is not primitive")));
    }
    // Column operations V on the row vector v^T until v^T V = e_1^T.
    let mut r = v.to_vec();
    let mut vm = identity(n);
    let mut vinv = identity(n);
    for k in 1..n {
        if r[k] == 0 {
            continue;
        }
        let (a, b) = (r[0], r[k]);
        let (g, x, y) = ext_gcd(a, b);
        let (ag, bg) = (a / g, b / g);
        // [[x, -b/g], [y, a/g]] has determinant 1.
        r[0] = g;
        r[k] = 0;
        col_op(&mut vm, 0, k, x, y, -bg, ag)?;
        // inverse block [[a/g, b/g], [-y, x]] acts on rows of V^-1
        row_op(&mut vinv, 0, k, ag, bg, -y, x)?;
    }
    if n == 1 {
        return if r[0] == 1 { Ok((vec![vec![1]], vec![vec![1]])) } else { Err(Error::Invalid("det -1".into())) };
    }
    if r[0] < 0 {
        // negate columns 0 and 1 of V (rows 0 and 1 of V^-1); det unchanged
        for row in vm.iter_mut() {
            row[0] = -row[0];
            row[1] = -row[1];
        }
        for j in 0..n {
            vinv[0][j] = -vinv[0][j];
            vinv[1][j] = -vinv[1][j];
        }
    }
    // v^T V = e_1^T  =>  V^{-T} e_1 = v.
    Ok((transpose(&vinv), transpose(&vm)))
}

/// Basis (as rows) of the integer kernel `{z : a z = 0}`.
pub fn integer_kernel(a: &IntMat, n: usize) -> Result<IntMat> {
    let mut m = a.clone();
    let mut u = identity(n);
    let mut p = 0;
    for i in 0..m.len() {
        if p >= n {
            break;
        }
        for k in p + 1..n {
            if m[i][k] == 0 {
                continue;
            }
            let (a0, b0) = (m[i][p], m[i][k]);
            let (g, x, y) = ext_gcd(a0, b0);
            let (ag, bg) = (a0 / g, b0 / g);
            col_op(&mut m, p, k, x, y, -bg, ag)?;
            col_op(&mut u, p, k, x, y, -bg, ag)?;
        }
        if m[i][p] != 0 {
            p += 1;
        }
    }
    Ok((p..n).map(|j| u.iter().map(|row| row[j]).collect()).collect())
}

/// Row Hermite normal form: positive pivots, entries above pivots reduced
/// into `[0, pivot)`, zero rows dropped.
pub fn row_hnf(a: &IntMat) -> Result<IntMat> {
    let mut m = a.clone();
    if m.is_empty() {
        return Ok(m);
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        if r >= m.len() {
            break;
        }
        for k in r + 1..m.len() {
            if m[k][c] == 0 {
                continue;
            }
            let (a0, b0) = (m[r][c], m[k][c]);
            let (g, x, y) = ext_gcd(a0, b0);
            let (ag, bg) = (a0 / g, b0 / g);
            row_op(&mut m, r, k, x, y, -bg, ag)?;
        }
        if m[r][c] == 0 {
            continue;
        }
        if m[r][c] < 0 {
            for x in m[r].iter_mut() {
                *x = -*x;
            }
        }
        let piv = m[r][c];
        for k in 0..r {
            let q = m[k][c].div_euclid(piv);
            if q != 0 {
                for j in 0..cols {
                    m[k][j] = add(m[k][j], mul(-q, m[r][j])?)?;
                }
            }
        }
        r += 1;
    }
    m.truncate(r);
    Ok(m)
}

/// Saturation of the row lattice: `(row space ⊗ Q) ∩ Z^n`, in HNF.
pub fn saturate(rows: &IntMat) -> Result<IntMat> {
    let n = rows.first().map_or(0, |r| r.len());
    let k = integer_kernel(rows, n)?;
    if k.is_empty() {
        return Ok(identity(n));
    }
    let sat = integer_kernel(&k, n)?;
    row_hnf(&sat)
}

/// Rank over Q by fraction-free (Bareiss) elimination.
pub fn rank(a: &IntMat) -> usize {
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, p);
        for i in r + 1..m.len() {
            for j in c + 1..cols {
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) / prev;
            }
            m[i][c] = 0;
        }
        prev = m[r][c];
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Determinant of a square matrix (Bareiss).
pub fn det(a: &IntMat) -> Result<i64> {
    let n = a.len();
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| m[i][c] != 0) else { return Ok(0) };
        if p != c {
            m.swap(c, p);
            sign = -sign;
        }
        for i in c + 1..n {
            for j in c + 1..n {
                m[i][j] = (m[c][c] * m[i][j] - m[i][c] * m[c][j]) / prev;
            }
            m[i][c] = 0;
        }
        prev = m[c][c];
    }
    let d = if n == 0 { 1 } else { sign * m[n - 1][n - 1] };
    i64::try_from(d).map_err(|_| Error::Overflow("det"))
}
