//! Structural hypotheses: the two local-homogeneity conditions, subshift
//! matrices, and probes of the centralizer and finite-support identities.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::element::{Element, RandomParams};
use crate::error::{Error, Result};
use crate::simstruct::{SimilarityLabel, Structure};
use crate::space::{BallAddress, Space, SpaceDoc, SymbolId};

/// A square 0/1 matrix without zero rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct TransitionMatrix {
    rows: Vec<Vec<u8>>,
}

impl TryFrom<Vec<Vec<u8>>> for TransitionMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self> {
        TransitionMatrix::new(rows)
    }
}

impl From<TransitionMatrix> for Vec<Vec<u8>> {
    fn from(m: TransitionMatrix) -> Self {
        m.rows
    }
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Matrix("empty matrix".into()));
        }
        if n > 36 {
            return Err(Error::Matrix(format!("{n} symbols; at most 36 are supported")));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Matrix(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if row.iter().any(|&x| x > 1) {
                return Err(Error::Matrix(format!("row {i} has an entry other than 0 or 1")));
            }
            if row.iter().all(|&x| x == 0) {
                return Err(Error::Matrix(format!("symbol {i} is dead: its row is zero")));
            }
        }
        Ok(TransitionMatrix { rows })
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Matrix(e.to_string()))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i][j] == 1
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn followers(&self, i: usize) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.get(i, j)).collect()
    }

    fn reaches_all(&self, forward: bool) -> bool {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, s) in seen.iter_mut().enumerate() {
                let edge = if forward { self.get(i, j) } else { self.get(j, i) };
                if edge && !*s {
                    *s = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|x| x)
    }
}

/// The subshift presentation: a fresh root `R` whose children are all
/// symbols, each symbol followed by its follower set. Symbols are labeled by
/// their follower sets, so only symbols with equal follower sets are similar.
pub fn sft_from_matrix(m: &TransitionMatrix) -> Space {
    let n = m.len();
    let name = |i: usize| i.to_string();
    let mut children = BTreeMap::new();
    children.insert("R".to_string(), (0..n).map(name).collect());
    let mut labels = BTreeMap::new();
    labels.insert("R".to_string(), "R".to_string());
    for i in 0..n {
        let f = m.followers(i);
        children.insert(name(i), f.iter().map(|&j| name(j)).collect());
        let sig: Vec<String> = f.iter().map(|j| j.to_string()).collect();
        labels.insert(name(i), format!("follows:{}", sig.join(",")));
    }
    let doc = SpaceDoc {
        name: Some("sft".into()),
        symbols: std::iter::once("R".to_string()).chain((0..n).map(name)).collect(),
        children,
        root: "R".into(),
        terminals: vec![],
        labels: Some(labels),
    };
    Space::from_doc(doc).expect("matrix presentations are valid")
}

/// Strong connectivity of the transition graph.
pub fn is_irreducible(m: &TransitionMatrix) -> bool {
    m.reaches_all(true) && m.reaches_all(false)
}

/// Symbols with at least two followers.
pub fn two_followed_symbols(m: &TransitionMatrix) -> Vec<usize> {
    (0..m.len()).filter(|&i| m.followers(i).len() >= 2).collect()
}

/// A random irreducible `n × n` matrix with a 2-followed symbol (`n >= 2`).
pub fn random_irreducible_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> TransitionMatrix {
    assert!(n >= 2, "a 1x1 matrix has no 2-followed symbol");
    let density = rng.gen_range(0.2..0.7);
    loop {
        let rows: Vec<Vec<u8>> = (0..n).map(|_| (0..n).map(|_| rng.gen_bool(density) as u8).collect()).collect();
        if let Ok(m) = TransitionMatrix::new(rows) {
            if is_irreducible(&m) && !two_followed_symbols(&m).is_empty() {
                return m;
            }
        }
    }
}

/// Outcome of the two local-homogeneity conditions. `None` means the
/// condition holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CssStarReport {
    /// An infinite symbol below which no ball splits into two infinite
    /// subballs.
    pub condition1: Option<String>,
    /// A type and an infinite symbol whose balls contain no ball of that
    /// type.
    pub condition2: Option<(String, String)>,
}

impl CssStarReport {
    pub fn passed(&self) -> bool {
        self.condition1.is_none() && self.condition2.is_none()
    }
}

fn reach(space: &Space, s: SymbolId) -> Vec<bool> {
    let mut seen = vec![false; space.num_symbols()];
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(u) = stack.pop() {
        for &c in space.children_of_symbol(u) {
            if !seen[c] {
                seen[c] = true;
                stack.push(c);
            }
        }
    }
    seen
}

pub fn verify_css_star(space: &Space) -> CssStarReport {
    let balls = space.ball_symbols();
    let infinite: Vec<SymbolId> = balls.iter().copied().filter(|&s| !space.symbol_is_finite(s)).collect();
    let reach: BTreeMap<SymbolId, Vec<bool>> = infinite.iter().map(|&s| (s, reach(space, s))).collect();

    let condition1 = infinite
        .iter()
        .find(|&&s| {
            !(0..space.num_symbols()).any(|u| {
                reach[&s][u] && space.children_of_symbol(u).iter().filter(|&&c| !space.symbol_is_finite(c)).count() >= 2
            })
        })
        .map(|&s| space.symbol_name(s).to_string());

    let classes: BTreeMap<usize, SymbolId> = balls.iter().rev().map(|&s| (space.class_of(s), s)).collect();
    let mut condition2 = None;
    'outer: for (&t, &rep) in &classes {
        for &s in &infinite {
            if !(0..space.num_symbols()).any(|u| reach[&s][u] && space.class_of(u) == t) {
                condition2 = Some((space.symbol_name(rep).to_string(), space.symbol_name(s).to_string()));
                break 'outer;
            }
        }
    }
    CssStarReport { condition1, condition2 }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CentralizerReport {
    pub ball: BallAddress,
    pub positive_samples: usize,
    pub positive_failures: usize,
    pub negative_samples: usize,
    /// Sampled elements supported inside the ball; they need no witness.
    pub negative_skipped: usize,
    pub negative_failures: usize,
    pub witnesses: Vec<String>,
}

impl CentralizerReport {
    pub fn passed(&self) -> bool {
        self.positive_failures == 0 && self.negative_failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteSupportReport {
    pub lambda_trivial: bool,
    /// Number of type classes of terminal balls.
    pub n: usize,
    pub closure_checks: usize,
    pub closure_failures: usize,
    pub normality_checks: usize,
    pub normality_failures: usize,
    pub class_mixing_failures: usize,
}

impl FiniteSupportReport {
    pub fn passed(&self) -> bool {
        self.closure_failures == 0 && self.normality_failures == 0 && self.class_mixing_failures == 0
    }
}

impl Structure {
    /// For sampled `h ∈ Γ_{X∖B}`, `g ∈ Γ_{B}`: `[h, g] = 1`. For sampled `g`
    /// moving a point outside `B`: an `h` fixing `B` with `[h, g] ≠ 1`.
    pub fn centralizer_probe(&self, b: &BallAddress, samples: usize, seed: u64) -> Result<CentralizerReport> {
        let sp = self.space();
        sp.check_address(b)?;
        if b.is_root() {
            return Err(Error::RootBall);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = RandomParams::default();
        let inside = std::slice::from_ref(b);
        let outside = sp.complement(inside);
        let mut report = CentralizerReport {
            ball: b.clone(),
            positive_samples: samples,
            positive_failures: 0,
            negative_samples: 0,
            negative_skipped: 0,
            negative_failures: 0,
            witnesses: Vec::new(),
        };
        for _ in 0..samples {
            let h = self.random_element_on(&outside, &mut rng, params);
            let g = self.random_element_on(inside, &mut rng, params);
            if !self.is_identity(&self.commutator(&h, &g)) {
                report.positive_failures += 1;
            }
        }
        for _ in 0..samples {
            let g = self.random_element(&mut rng, params);
            if self.fixes_clopen(&g, &outside) {
                report.negative_skipped += 1;
                continue;
            }
            report.negative_samples += 1;
            let found = self.moved_ball_within(&g, &outside).and_then(|e| self.separating_swap(&g, b, e));
            match found {
                Some((e, d)) => {
                    if report.witnesses.len() < 4 {
                        report.witnesses.push(format!("swap({e}, {d})"));
                    }
                }
                None => report.negative_failures += 1,
            }
        }
        Ok(report)
    }

    /// A transposition `(e d)` supported outside `b` not commuting with `g`,
    /// shrinking the moved ball `e` until a partner `d` fits beside it.
    fn separating_swap(&self, g: &Element, b: &BallAddress, mut e: BallAddress) -> Option<(BallAddress, BallAddress)> {
        let sp = self.space();
        for _ in 0..16 {
            let ge = self.apply(g, &e).ok()?;
            if let Some(d) = sp.find_ball(&BallAddress::root(), sp.class_at(&e), &[b.clone(), e.clone(), ge], true) {
                let h = self.transposition(&e, &d, SimilarityLabel::Canonical).ok()?;
                if !self.is_identity(&self.commutator(&h, g)) {
                    return Some((e, d));
                }
            }
            e = sp.children(&e).into_iter().find(|c| self.apply(g, c).is_ok_and(|t| t != *c))?;
        }
        None
    }

    /// Sample the subgroup of finitely supported elements and check closure,
    /// normality and that terminal type classes never mix.
    pub fn finite_support_probe(&self, samples: usize, seed: u64) -> Result<FiniteSupportReport> {
        if self.is_decorated() {
            return Err(Error::Unsupported("finite-support probe on decorated structures".into()));
        }
        let sp = self.space();
        let terminals = self.terminal_balls(6);
        let classes: BTreeSet<usize> = terminals.iter().map(|a| sp.class_at(a)).collect();
        let mut report = FiniteSupportReport {
            lambda_trivial: terminals.is_empty(),
            n: classes.len(),
            closure_checks: 0,
            closure_failures: 0,
            normality_checks: 0,
            normality_failures: 0,
            class_mixing_failures: 0,
        };
        if terminals.is_empty() {
            return Ok(report);
        }
        let mut by_class: BTreeMap<usize, Vec<BallAddress>> = BTreeMap::new();
        for t in terminals {
            by_class.entry(sp.class_at(&t)).or_default().push(t);
        }
        let pools: Vec<Vec<BallAddress>> = by_class.into_values().filter(|v| v.len() >= 2).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let random_finitary = |rng: &mut ChaCha8Rng| -> Result<Element> {
            let mut h = self.identity();
            for _ in 0..rng.gen_range(1..=4) {
                let pool = pools.choose(rng).expect("some terminal class has two balls");
                let pair: Vec<&BallAddress> = pool.choose_multiple(rng, 2).collect();
                h = self.compose(&self.transposition(pair[0], pair[1], SimilarityLabel::Canonical)?, &h);
            }
            Ok(h)
        };
        for _ in 0..samples {
            let h1 = random_finitary(&mut rng)?;
            let h2 = random_finitary(&mut rng)?;
            report.closure_checks += 2;
            if !self.has_finite_support(&self.compose(&h1, &h2))? {
                report.closure_failures += 1;
            }
            if !self.has_finite_support(&self.inverse(&h1))? {
                report.closure_failures += 1;
            }

            let g = self.random_element(&mut rng, RandomParams::default());
            let c = self.conjugate(&h1, &g);
            report.normality_checks += 1;
            let g_inv = self.inverse(&g);
            let pulled: Option<BTreeSet<BallAddress>> =
                self.moved_points(&h1).iter().map(|p| self.apply(&g_inv, p).ok()).collect();
            if !self.has_finite_support(&c)? || pulled.as_ref() != Some(&self.moved_points(&c)) {
                report.normality_failures += 1;
            }
            for p in self.moved_points(&h1) {
                if self.apply(&h1, &p).map(|q| sp.class_at(&q)) != Ok(sp.class_at(&p)) {
                    report.class_mixing_failures += 1;
                }
            }
        }
        Ok(report)
    }

    /// Terminal (one-point) balls with addresses of length at most `depth`.
    pub fn terminal_balls(&self, depth: usize) -> Vec<BallAddress> {
        let sp = self.space();
        let mut out = Vec::new();
        let mut frontier = vec![BallAddress::root()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for a in &frontier {
                for c in sp.children(a) {
                    if sp.num_children(&c) == 0 {
                        out.push(c);
                    } else {
                        next.push(c);
                    }
                }
            }
            frontier = next;
        }
        out.sort();
        out
    }

    /// The points moved by a finitely supported element, as terminal
    /// addresses.
    pub fn moved_points(&self, g: &Element) -> BTreeSet<BallAddress> {
        let sp = self.space();
        let mut out = BTreeSet::new();
        for r in g.regions() {
            if r.src == r.dst || !sp.is_finite_ball(&r.src) {
                continue;
            }
            let mut stack = vec![r.src.clone()];
            while let Some(a) = stack.pop() {
                let kids = sp.children(&a);
                if kids.is_empty() {
                    out.insert(a);
                } else {
                    stack.extend(kids);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::space::addr;

    fn m(rows: &[&[u8]]) -> TransitionMatrix {
        TransitionMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn matrices() {
        let golden = m(&[&[1, 1], &[1, 0]]);
        assert!(is_irreducible(&golden));
        assert_eq!(two_followed_symbols(&golden), vec![0]);
        assert!(!is_irreducible(&m(&[&[1, 1], &[0, 1]])));
        assert!(is_irreducible(&m(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]])));
        assert!(two_followed_symbols(&m(&[&[0, 1], &[1, 0]])).is_empty());
        assert!(matches!(TransitionMatrix::new(vec![vec![0, 1], vec![0, 0]]), Err(Error::Matrix(_))));
        assert_eq!(TransitionMatrix::parse(fixtures::GOLDEN_MEAN_MATRIX).unwrap(), golden);
    }

    #[test]
    fn golden_from_matrix() {
        let sp = sft_from_matrix(&m(&[&[1, 1], &[1, 0]]));
        let fixture = fixtures::golden_mean();
        assert_eq!(sp.minimal_ball_partition().unwrap(), fixture.minimal_ball_partition().unwrap());
        for a in ["0", "1", "00", "01", "10", "010", "0101"] {
            for b in ["0", "1", "00", "01", "10", "010", "0101"] {
                let same = |s: &Space| s.class_at(&addr(a)) == s.class_at(&addr(b));
                assert_eq!(same(&sp), same(&fixture), "{a} {b}");
            }
        }
    }

    #[test]
    fn css_star_verdicts() {
        assert!(verify_css_star(&fixtures::binary()).passed());
        assert!(verify_css_star(&fixtures::golden_mean()).passed());
        assert!(verify_css_star(&fixtures::qaut()).passed());
        let h = verify_css_star(&fixtures::houghton_h2());
        assert_eq!(h.condition1.as_deref(), Some("x1"));
        assert_eq!(h.condition2, Some(("x1".to_string(), "x2".to_string())));
    }

    #[test]
    fn finite_support_fixtures() {
        let b = Structure::canonical(fixtures::binary()).finite_support_probe(10, 1).unwrap();
        assert!(b.lambda_trivial);
        let q = Structure::canonical(fixtures::qaut()).finite_support_probe(30, 1).unwrap();
        assert!(!q.lambda_trivial && q.n == 1 && q.passed(), "{q:?}");
    }
}
