//! Split root systems, Weyl groups and the integrability criteria.
//!
//! Simple roots are numbered as in Bourbaki. The Cartan matrix uses
//! `A[i][j] = <alpha_i, alpha_j^vee> = 2 (alpha_i, alpha_j) / (alpha_j, alpha_j)`.
//! Roots are integer vectors in the simple-root basis and coroots are integer
//! vectors in the simple-coroot basis. Nothing in this module uses floating point.
//!
//! The distinguished parabolic for a node `alpha` is `P = P_{Delta \ {alpha}}`
//! with character the fundamental weight `varpi_alpha`. Its stabiliser `L` of
//! the highest weight vector has root set
//! `Phi_L = {beta > 0} ∪ {beta : supp(beta) ⊆ Delta \ {alpha}}` and torus
//! `ker varpi_alpha`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::intmat::{self, IntMat};
use crate::{Error, Result};

/// Default bound on `|W|` for exhaustive scans. Excludes `E8`.
pub const DEFAULT_WEYL_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CartanType {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for CartanType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "A" => CartanType::A,
            "B" => CartanType::B,
            "C" => CartanType::C,
            "D" => CartanType::D,
            "E" => CartanType::E,
            "F" => CartanType::F,
            "G" => CartanType::G,
            other => return Err(Error::Invalid(format!("unknown Cartan type {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynkinDiagram {
    pub cartan_type: CartanType,
    pub rank: usize,
    /// Undirected edges `(i, j, bond)` between 0-based nodes, `i < j`.
    pub edges: Vec<(usize, usize, u8)>,
    /// Half squared lengths `(alpha_i, alpha_i) / 2`; the shortest roots have 1.
    pub half_lengths: Vec<i64>,
    /// Set for accepted but non-canonical inputs such as `D3`.
    pub warning: Option<String>,
}

impl DynkinDiagram {
    pub fn new(cartan_type: CartanType, rank: usize) -> Result<Self> {
        use CartanType::*;
        let bad = || Error::Invalid(format!("no root system of type {cartan_type}{rank}"));
        let chain = |k: usize| (0..k.saturating_sub(1)).map(|i| (i, i + 1)).collect::<Vec<_>>();
        let mut warning = None;
        let (pairs, half_lengths): (Vec<(usize, usize)>, Vec<i64>) = match cartan_type {
            A if rank >= 1 => (chain(rank), vec![1; rank]),
            B if rank >= 2 => (chain(rank), (0..rank).map(|i| if i + 1 < rank { 2 } else { 1 }).collect()),
            C if rank >= 2 => (chain(rank), (0..rank).map(|i| if i + 1 < rank { 1 } else { 2 }).collect()),
            D if rank >= 3 => {
                if rank == 3 {
                    warning = Some("D3 is isomorphic to A3 (node 1 of D3 is the middle node of A3)".into());
                }
                let mut p = chain(rank - 1);
                p.push((rank - 3, rank - 1));
                (p, vec![1; rank])
            }
            E if (6..=8).contains(&rank) => {
                let mut p = vec![(0, 2), (1, 3), (2, 3)];
                p.extend((3..rank - 1).map(|i| (i, i + 1)));
                (p, vec![1; rank])
            }
            F if rank == 4 => (chain(4), vec![2, 2, 1, 1]),
            G if rank == 2 => (chain(2), vec![1, 3]),
            _ => return Err(bad()),
        };
        let edges = pairs
            .into_iter()
            .map(|(i, j)| {
                let (li, lj) = (half_lengths[i], half_lengths[j]);
                (i.min(j), i.max(j), (li.max(lj) / li.min(lj)) as u8)
            })
            .collect();
        Ok(DynkinDiagram { cartan_type, rank, edges, half_lengths, warning })
    }

    /// Symmetric Gram matrix of the simple roots.
    pub fn gram(&self) -> IntMat {
        let n = self.rank;
        let mut g = vec![vec![0; n]; n];
        for i in 0..n {
            g[i][i] = 2 * self.half_lengths[i];
        }
        for &(i, j, _) in &self.edges {
            let v = -self.half_lengths[i].max(self.half_lengths[j]);
            g[i][j] = v;
            g[j][i] = v;
        }
        g
    }

    pub fn cartan_matrix(&self) -> IntMat {
        let g = self.gram();
        let n = self.rank;
        (0..n).map(|i| (0..n).map(|j| g[i][j] / self.half_lengths[j]).collect()).collect()
    }

    /// Neighbours of a 0-based node.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b, _)| if a == i { Some(b) } else if b == i { Some(a) } else { None })
            .collect();
        v.sort_unstable();
        v
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.rank];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in self.neighbors(i) {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Classified order of the Weyl group.
pub fn weyl_order_formula(t: CartanType, rank: usize) -> u64 {
    let fact = |k: usize| (1..=k as u64).product::<u64>();
    match t {
        CartanType::A => fact(rank + 1),
        CartanType::B | CartanType::C => (1u64 << rank) * fact(rank),
        CartanType::D => (1u64 << (rank - 1)) * fact(rank),
        CartanType::E => match rank {
            6 => 51_840,
            7 => 2_903_040,
            _ => 696_729_600,
        },
        CartanType::F => 1152,
        CartanType::G => 12,
    }
}

#[derive(Debug, Clone)]
pub struct RootDatum {
    pub diagram: DynkinDiagram,
    pub cartan: IntMat,
    /// All roots; positive roots come first, ordered by height.
    pub roots: Vec<Vec<i64>>,
    /// Coroot of `roots[k]` in the simple-coroot basis.
    pub coroots: Vec<Vec<i64>>,
    pub num_positive: usize,
    pub weyl_order: u64,
    /// `reflections[i][k]` is the index of `s_i(roots[k])`.
    pub reflections: Vec<Vec<u16>>,
    /// Index of `-roots[k]`.
    pub negation: Vec<u16>,
    /// Index of the simple root `alpha_i`.
    pub simple_index: Vec<usize>,
    index: HashMap<Vec<i64>, usize>,
}

/// Builds the root datum of a split simple group of the given type.
pub fn build_root_datum(cartan_type: CartanType, rank: usize) -> Result<RootDatum> {
    let diagram = DynkinDiagram::new(cartan_type, rank)?;
    let cartan = diagram.cartan_matrix();
    let n = rank;
    let reflect = |beta: &[i64], i: usize| -> Vec<i64> {
        let pairing: i64 = (0..n).map(|k| beta[k] * cartan[k][i]).sum();
        let mut out = beta.to_vec();
        out[i] -= pairing;
        out
    };
    let simple: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|k| i64::from(k == i)).collect()).collect();
    let mut seen: HashSet<Vec<i64>> = simple.iter().cloned().collect();
    let mut queue: VecDeque<Vec<i64>> = simple.iter().cloned().collect();
    while let Some(b) = queue.pop_front() {
        for i in 0..n {
            let r = reflect(&b, i);
            if seen.insert(r.clone()) {
                queue.push_back(r);
            }
        }
    }
    let mut roots: Vec<Vec<i64>> = seen.into_iter().collect();
    let height = |r: &Vec<i64>| r.iter().sum::<i64>();
    roots.sort_by(|a, b| {
        let (ha, hb) = (height(a), height(b));
        (ha < 0).cmp(&(hb < 0)).then(ha.abs().cmp(&hb.abs())).then(b.cmp(a))
    });
    let num_positive = roots.iter().filter(|r| height(r) > 0).count();
    let index: HashMap<Vec<i64>, usize> = roots.iter().cloned().enumerate().map(|(k, r)| (r, k)).collect();
    let gram = diagram.gram();
    let coroots = roots
        .iter()
        .map(|b| {
            let norm: i64 = (0..n).map(|i| (0..n).map(|j| b[i] * gram[i][j] * b[j]).sum::<i64>()).sum();
            (0..n).map(|j| 2 * b[j] * diagram.half_lengths[j] / norm).collect()
        })
        .collect();
    let reflections = (0..n)
        .map(|i| roots.iter().map(|b| index[&reflect(b, i)] as u16).collect())
        .collect();
    let negation = roots
        .iter()
        .map(|b| index[&b.iter().map(|x| -x).collect::<Vec<_>>()] as u16)
        .collect();
    let simple_index = simple.iter().map(|s| index[s]).collect();
    Ok(RootDatum {
        weyl_order: weyl_order_formula(cartan_type, rank),
        diagram,
        cartan,
        roots,
        coroots,
        num_positive,
        reflections,
        negation,
        simple_index,
        index,
    })
}

impl RootDatum {
    pub fn rank(&self) -> usize {
        self.diagram.rank
    }

    pub fn root_index(&self, beta: &[i64]) -> Option<usize> {
        self.index.get(beta).copied()
    }

    pub fn is_positive(&self, k: usize) -> bool {
        k < self.num_positive
    }

    /// Breadth-first enumeration of `W`, refusing if `|W|` exceeds `cap`.
    ///
    /// Elements come out in shortlex order of their words, so every word is
    /// reduced and the identity is first.
    pub fn weyl_elements(&self, cap: u64) -> Result<Vec<WeylElement>> {
        let mut out = Vec::new();
        self.for_each_weyl_element(cap, |w| {
            out.push(w.clone());
            true
        })?;
        Ok(out)
    }

    /// Streams `W` in shortlex order; `visit` returns `false` to stop early.
    pub fn for_each_weyl_element<F: FnMut(&WeylElement) -> bool>(&self, cap: u64, mut visit: F) -> Result<()> {
        if self.weyl_order > cap {
            return Err(Error::ResourceGuard(format!(
                "|W({}{})| = {} exceeds the cap {}",
                self.diagram.cartan_type,
                self.rank(),
                self.weyl_order,
                cap
            )));
        }
        let id: Vec<u16> = (0..self.roots.len() as u16).collect();
        let mut seen: HashSet<Vec<u16>> = HashSet::new();
        seen.insert(id.clone());
        let mut frontier = vec![WeylElement { word: vec![], action: id }];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for w in &frontier {
                if !visit(w) {
                    return Ok(());
                }
            }
            for w in &frontier {
                for i in 0..self.rank() {
                    // s_i w
                    let action: Vec<u16> = w.action.iter().map(|&r| self.reflections[i][r as usize]).collect();
                    if seen.insert(action.clone()) {
                        let mut word = Vec::with_capacity(w.word.len() + 1);
                        word.push(i);
                        word.extend_from_slice(&w.word);
                        next.push(WeylElement { word, action });
                    }
                }
            }
            frontier = next;
        }
        Ok(())
    }

    /// The element with the given word of 0-based simple reflections.
    pub fn weyl_from_word(&self, word: &[usize]) -> WeylElement {
        let mut action: Vec<u16> = (0..self.roots.len() as u16).collect();
        for &i in word.iter().rev() {
            action = action.iter().map(|&r| self.reflections[i][r as usize]).collect();
        }
        WeylElement { word: word.to_vec(), action }
    }

    /// Number of positive roots sent to negative roots.
    pub fn inversion_count(&self, w: &WeylElement) -> usize {
        (0..self.num_positive).filter(|&k| !self.is_positive(w.action[k] as usize)).count()
    }
}

/// A Weyl group element: a word in 0-based simple reflections, read
/// right to left, and its permutation of the root indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeylElement {
    pub word: Vec<usize>,
    pub action: Vec<u16>,
}

impl WeylElement {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Word with 1-based indices, e.g. `s2 s1`, or `e` for the identity.
    pub fn word_string(&self) -> String {
        if self.word.is_empty() {
            return "e".into();
        }
        self.word.iter().map(|i| format!("s{}", i + 1)).collect::<Vec<_>>().join(" ")
    }

    fn inverse_action(&self) -> Vec<u16> {
        let mut inv = vec![0u16; self.action.len()];
        for (k, &r) in self.action.iter().enumerate() {
            inv[r as usize] = k as u16;
        }
        inv
    }
}

/// A maximal parabolic given by a distinguished simple root (1-based `alpha`).
#[derive(Debug, Clone, Copy)]
pub struct ParabolicChoice<'a> {
    pub datum: &'a RootDatum,
    pub alpha: usize,
}

impl<'a> ParabolicChoice<'a> {
    pub fn new(datum: &'a RootDatum, alpha: usize) -> Result<Self> {
        if alpha == 0 || alpha > datum.rank() {
            return Err(Error::Invalid(format!("alpha must lie in 1..={}, got {alpha}", datum.rank())));
        }
        Ok(ParabolicChoice { datum, alpha })
    }

    fn a0(&self) -> usize {
        self.alpha - 1
    }

    /// Membership in `Phi_L` for each root index.
    fn levi_parabolic_mask(&self) -> Vec<bool> {
        let a = self.a0();
        (0..self.datum.roots.len())
            .map(|k| self.datum.is_positive(k) || self.datum.roots[k][a] == 0)
            .collect()
    }

    /// Root indices of `Phi_w = Phi_L ∩ w(Phi_L)`.
    pub fn phi_w(&self, w: &WeylElement) -> Vec<usize> {
        let mask = self.levi_parabolic_mask();
        let inv = w.inverse_action();
        (0..mask.len()).filter(|&k| mask[k] && mask[inv[k] as usize]).collect()
    }

    /// `r_w = dim t_w - rank{beta^vee : beta ∈ Phi_w ∩ -Phi_w}`.
    pub fn character_rank(&self, w: &WeylElement) -> Result<i64> {
        let d = self.datum;
        let n = d.rank();
        let a = self.a0();
        let in_w: HashSet<usize> = self.phi_w(w).into_iter().collect();
        let levi: Vec<usize> = in_w.iter().copied().filter(|&k| in_w.contains(&(d.negation[k] as usize))).collect();
        // The functional varpi_alpha ∘ w^{-1} in coroot coordinates: its j-th entry is
        // the alpha-coordinate of the coroot of w^{-1}(alpha_j).
        let inv = w.inverse_action();
        let twisted: Vec<i64> = (0..n).map(|j| d.coroots[inv[d.simple_index[j]] as usize][a]).collect();
        let mut e_alpha = vec![0; n];
        e_alpha[a] = 1;
        let dim_t = n as i64 - intmat::rank(&vec![e_alpha, twisted.clone()]) as i64;
        let mut levels: Vec<usize> = levi;
        levels.sort_unstable();
        for &k in &levels {
            let c = &d.coroots[k];
            let tw: i64 = c.iter().zip(&twisted).map(|(x, y)| x * y).sum();
            if c[a] != 0 || tw != 0 {
                return Err(Error::ModelAnomaly(format!(
                    "coroot of {:?} is not in t_w for w = {}",
                    d.roots[k],
                    w.word_string()
                )));
            }
        }
        let cor: IntMat = levels.iter().map(|&k| d.coroots[k].clone()).collect();
        Ok(dim_t - intmat::rank(&cor) as i64)
    }
}

/// `true` iff `Delta \ theta` is a single root, i.e. the parabolic is maximal.
/// `theta` holds 1-based node indices.
pub fn is_l1_integrable_subset(datum: &RootDatum, theta: &[usize]) -> bool {
    let kept: HashSet<usize> = theta.iter().copied().filter(|&i| i >= 1 && i <= datum.rank()).collect();
    datum.rank() - kept.len() == 1
}

pub fn is_l1_integrable(choice: &ParabolicChoice) -> bool {
    let theta: Vec<usize> = (1..=choice.datum.rank()).filter(|&i| i != choice.alpha).collect();
    is_l1_integrable_subset(choice.datum, &theta)
}

pub fn is_linf_integrable(choice: &ParabolicChoice) -> bool {
    choice.datum.rank() == 1
}

pub fn l2_necessary_neighbor_test(choice: &ParabolicChoice) -> bool {
    choice.datum.diagram.neighbors(choice.a0()).len() <= 1
}

#[derive(Debug, Clone)]
pub struct L2FullResult {
    pub holds: bool,
    pub witness: Option<WeylElement>,
    /// Character rank of the witness.
    pub witness_rank: Option<i64>,
    pub scanned: u64,
}

/// Scans `W` for an element whose `L_w` carries a nontrivial character.
pub fn l2_necessary_full_test(choice: &ParabolicChoice, weyl_cap: u64) -> Result<L2FullResult> {
    let mut failure: Option<(WeylElement, i64)> = None;
    let mut err = None;
    let mut scanned = 0u64;
    choice.datum.for_each_weyl_element(weyl_cap, |w| {
        scanned += 1;
        match choice.character_rank(w) {
            Ok(0) => true,
            Ok(r) => {
                failure = Some((w.clone(), r));
                false
            }
            Err(e) => {
                err = Some(e);
                false
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(match failure {
        Some((w, r)) => L2FullResult { holds: false, witness: Some(w), witness_rank: Some(r), scanned },
        None => L2FullResult { holds: true, witness: None, witness_rank: None, scanned },
    })
}

/// Checks `Phi_{s_alpha} ⊆ Phi^+ ∪ <Delta \ B(alpha)>^-` on root sets.
pub fn reflection_levi_inclusion_check(choice: &ParabolicChoice) -> bool {
    let d = choice.datum;
    let a = choice.a0();
    let mut ball = d.diagram.neighbors(a);
    ball.push(a);
    let s = d.weyl_from_word(&[a]);
    choice
        .phi_w(&s)
        .into_iter()
        .all(|k| d.is_positive(k) || ball.iter().all(|&b| d.roots[k][b] == 0))
}

/// One row of the integrability table.
#[derive(Debug, Clone, Serialize)]
pub struct IntegrabilityReport {
    pub cartan_type: CartanType,
    pub rank: usize,
    pub alpha: usize,
    pub l1: bool,
    pub linf: bool,
    pub l2_neighbor: bool,
    pub l2_full: Option<bool>,
    pub witness: Option<String>,
    pub inclusion: bool,
    pub warning: Option<String>,
}

pub fn integrability_report(
    cartan_type: CartanType,
    rank: usize,
    alpha: usize,
    full: Option<u64>,
) -> Result<IntegrabilityReport> {
    let datum = build_root_datum(cartan_type, rank)?;
    let choice = ParabolicChoice::new(&datum, alpha)?;
    let (l2_full, witness) = match full {
        Some(cap) => {
            let r = l2_necessary_full_test(&choice, cap)?;
            (Some(r.holds), r.witness.map(|w| w.word_string()))
        }
        None => (None, None),
    };
    Ok(IntegrabilityReport {
        cartan_type,
        rank,
        alpha,
        l1: is_l1_integrable(&choice),
        linf: is_linf_integrable(&choice),
        l2_neighbor: l2_necessary_neighbor_test(&choice),
        l2_full,
        witness,
        inclusion: reflection_levi_inclusion_check(&choice),
        warning: datum.diagram.warning.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use CartanType::*;

    fn all_small_types() -> Vec<(CartanType, usize)> {
        let mut v = vec![];
        for r in 1..=6 {
            v.push((A, r));
        }
        for r in 2..=6 {
            v.push((B, r));
            v.push((C, r));
        }
        for r in 4..=6 {
            v.push((D, r));
        }
        v.extend([(E, 6), (F, 4), (G, 2)]);
        v
    }

    #[test]
    fn root_counts_match_classification() {
        let expected = |t: CartanType, n: usize| match t {
            A => n * (n + 1),
            B | C => 2 * n * n,
            D => 2 * n * (n - 1),
            E => [72, 126, 240][n - 6],
            F => 48,
            G => 12,
        };
        for (t, n) in all_small_types().into_iter().chain([(E, 7), (E, 8), (D, 3)]) {
            let d = build_root_datum(t, n).unwrap();
            assert_eq!(d.roots.len(), expected(t, n), "{t}{n}");
            assert_eq!(d.num_positive * 2, d.roots.len());
        }
        assert_eq!(build_root_datum(A, 1).unwrap().roots, vec![vec![1], vec![-1]]);
    }

    #[test]
    fn cartan_determinants() {
        let expected = |t: CartanType, n: usize| match t {
            A => n as i64 + 1,
            B | C => 2,
            D => 4,
            E => [3, 2, 1][n - 6],
            F | G => 1,
        };
        for (t, n) in all_small_types().into_iter().chain([(E, 7), (E, 8)]) {
            let dg = DynkinDiagram::new(t, n).unwrap();
            assert!(dg.is_connected());
            assert_eq!(intmat::det(&dg.cartan_matrix()).unwrap(), expected(t, n), "{t}{n}");
        }
    }

    #[test]
    fn invalid_pairs_are_rejected() {
        for (t, n) in [(A, 0), (B, 1), (C, 1), (D, 2), (E, 5), (E, 9), (F, 3), (G, 3)] {
            assert!(build_root_datum(t, n).is_err());
        }
        assert!(DynkinDiagram::new(D, 3).unwrap().warning.is_some());
    }

    #[test]
    fn b2_and_g2_cartan_entries() {
        assert_eq!(DynkinDiagram::new(B, 2).unwrap().cartan_matrix(), vec![vec![2, -2], vec![-1, 2]]);
        assert_eq!(DynkinDiagram::new(G, 2).unwrap().cartan_matrix(), vec![vec![2, -1], vec![-3, 2]]);
    }

    #[test]
    fn reflections_are_involutions() {
        for (t, n) in all_small_types() {
            let d = build_root_datum(t, n).unwrap();
            for s in &d.reflections {
                for (k, &r) in s.iter().enumerate() {
                    assert_eq!(s[r as usize] as usize, k);
                }
            }
        }
    }

    #[test]
    fn weyl_orders_and_lengths() {
        for (t, n) in [(A, 3), (B, 3), (G, 2), (F, 4), (D, 4)] {
            let d = build_root_datum(t, n).unwrap();
            let ws = d.weyl_elements(DEFAULT_WEYL_CAP).unwrap();
            assert_eq!(ws.len() as u64, d.weyl_order);
            for w in &ws {
                assert_eq!(d.inversion_count(w), w.len());
                assert_eq!(d.weyl_from_word(&w.word).action, w.action);
            }
        }
    }

    #[test]
    fn cap_refuses_large_groups() {
        let d = build_root_datum(E, 8).unwrap();
        let err = d.weyl_elements(DEFAULT_WEYL_CAP).unwrap_err();
        assert!(err.is_resource_guard());
    }

    #[test]
    fn l1_and_linf_examples() {
        let a3 = build_root_datum(A, 3).unwrap();
        assert!(is_l1_integrable_subset(&a3, &[1, 3]));
        assert!(!is_l1_integrable_subset(&a3, &[3]));
        let a1 = build_root_datum(A, 1).unwrap();
        assert!(is_l1_integrable_subset(&a1, &[]));
        assert!(is_linf_integrable(&ParabolicChoice::new(&a1, 1).unwrap()));
        let a2 = build_root_datum(A, 2).unwrap();
        assert!(!is_linf_integrable(&ParabolicChoice::new(&a2, 1).unwrap()));
        let c3 = build_root_datum(C, 3).unwrap();
        assert!(!is_linf_integrable(&ParabolicChoice::new(&c3, 1).unwrap()));
    }

    #[test]
    fn neighbor_test_examples() {
        let a3 = build_root_datum(A, 3).unwrap();
        assert!(!l2_necessary_neighbor_test(&ParabolicChoice::new(&a3, 2).unwrap()));
        assert!(l2_necessary_neighbor_test(&ParabolicChoice::new(&a3, 1).unwrap()));
        let d4 = build_root_datum(D, 4).unwrap();
        assert!(!l2_necessary_neighbor_test(&ParabolicChoice::new(&d4, 2).unwrap()));
    }

    #[test]
    fn character_rank_by_hand() {
        // A1: W = {e, s1}; both have r_w = 0.
        let a1 = build_root_datum(A, 1).unwrap();
        let c = ParabolicChoice::new(&a1, 1).unwrap();
        let r = l2_necessary_full_test(&c, DEFAULT_WEYL_CAP).unwrap();
        assert!(r.holds && r.scanned == 2);

        // A3, alpha2: identity and s1 have r = 0, s2 has t_w = {h2 = 0, h1 + h3 = 0}
        // and no Levi coroots, so r = 1.
        let a3 = build_root_datum(A, 3).unwrap();
        let c = ParabolicChoice::new(&a3, 2).unwrap();
        assert_eq!(c.character_rank(&a3.weyl_from_word(&[])).unwrap(), 0);
        assert_eq!(c.character_rank(&a3.weyl_from_word(&[0])).unwrap(), 0);
        assert_eq!(c.character_rank(&a3.weyl_from_word(&[1])).unwrap(), 1);
        let r = l2_necessary_full_test(&c, DEFAULT_WEYL_CAP).unwrap();
        assert!(!r.holds);
        assert_eq!(r.witness.unwrap().word_string(), "s2");
    }

    #[test]
    fn reflection_rank_counts_neighbours() {
        // For w = s_alpha the character rank is |V(alpha)| - 1 when alpha has neighbours.
        for (t, n) in all_small_types() {
            if n < 2 {
                continue;
            }
            let d = build_root_datum(t, n).unwrap();
            for a in 1..=n {
                let c = ParabolicChoice::new(&d, a).unwrap();
                let r = c.character_rank(&d.weyl_from_word(&[a - 1])).unwrap();
                assert_eq!(r, d.diagram.neighbors(a - 1).len() as i64 - 1, "{t}{n} alpha{a}");
            }
        }
    }

    #[test]
    fn inclusion_examples() {
        for (t, n, a) in [(A, 2, 1), (A, 3, 2), (A, 1, 1)] {
            let d = build_root_datum(t, n).unwrap();
            assert!(reflection_levi_inclusion_check(&ParabolicChoice::new(&d, a).unwrap()));
        }
    }

    #[test]
    fn full_test_implies_neighbor_test_small_ranks() {
        for (t, n) in [(A, 2), (A, 3), (A, 4), (B, 3), (C, 3), (D, 4), (G, 2)] {
            let d = build_root_datum(t, n).unwrap();
            for a in 1..=n {
                let c = ParabolicChoice::new(&d, a).unwrap();
                let full = l2_necessary_full_test(&c, DEFAULT_WEYL_CAP).unwrap();
                if full.holds {
                    assert!(l2_necessary_neighbor_test(&c), "{t}{n} alpha{a}");
                }
            }
        }
    }
}
