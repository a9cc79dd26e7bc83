//! Explicit constructions: the extension property, involutions, ping-pong
//! pairs, the paradoxical decomposition of `Γ / Γ_B`, conjugacy-class and
//! cocycle witnesses.

use std::collections::{BTreeMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::element::{locate, BallStatus, CosetRep, Element, RandomParams, Region};
use crate::error::{Error, Result};
use crate::simstruct::{SimilarityLabel, Structure};
use crate::space::{BallAddress, ClassId};

/// A requested similarity `src → dst` for the extension property.
pub type Pair = (BallAddress, BallAddress, SimilarityLabel);

const MATCH_ITERATIONS: usize = 10_000;
const MATCH_BALLS: usize = 4096;

/// Stratum `C_i^j` of the paradoxical decomposition; both indices start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Stratum {
    pub i: usize,
    pub j: usize,
}

impl std::fmt::Display for Stratum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "C_{}^{}", self.i, self.j)
    }
}

/// One infinite depth-zero ball with its two subballs and translators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParadoxPiece {
    pub ball: BallAddress,
    pub sub1: BallAddress,
    pub sub2: BallAddress,
    /// Maps `sub1` onto `ball`.
    pub g: Element,
    /// Maps `sub2` onto `ball`.
    pub h: Element,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParadoxData {
    /// The ball `B_1` whose stabilizer cosets are decomposed.
    pub base: BallAddress,
    pub pieces: Vec<ParadoxPiece>,
}

impl ParadoxData {
    pub fn strata(&self) -> Vec<Stratum> {
        (1..=self.pieces.len()).flat_map(|i| (1..=3).map(move |j| Stratum { i, j })).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParadoxReport {
    pub strata: usize,
    pub samples_per_stratum: BTreeMap<String, usize>,
    pub unfilled_strata: Vec<String>,
    pub translate_checks: usize,
    pub translate_violations: usize,
    pub coset_pairs: usize,
    pub coset_violations: usize,
    pub witnesses: Vec<String>,
}

impl ParadoxReport {
    pub fn passed(&self) -> bool {
        self.unfilled_strata.is_empty() && self.translate_violations == 0 && self.coset_violations == 0
    }
}

/// A ping-pong pair and its four balls `B_1^+, B_1^-, B_2^+, B_2^-`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PingPong {
    pub g: Element,
    pub h: Element,
    pub balls: [BallAddress; 4],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PingPongReport {
    pub containment_failures: Vec<String>,
    pub max_len: usize,
    /// `words_by_length[k]` counts reduced words of length `k + 1`.
    pub words_by_length: Vec<usize>,
    pub words_checked: usize,
    pub identity_words: Vec<String>,
}

impl PingPongReport {
    pub fn passed(&self) -> bool {
        self.containment_failures.is_empty() && self.identity_words.is_empty()
    }
}

/// A commutator `f` whose support is not stabilized by `g`: `f` moves
/// `moved`, fixes `fixed`, and `g(moved) = fixed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separation {
    pub f: Element,
    pub moved: BallAddress,
    pub fixed: BallAddress,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MalnormalReport {
    pub samples: usize,
    pub nontrivial_samples: usize,
    pub conjugates_in_stabilizer: usize,
    pub counterexamples: usize,
}

impl Structure {
    /// Swap `b` and `d` by `label` and its inverse; identity elsewhere.
    pub fn transposition(&self, b: &BallAddress, d: &BallAddress, label: SimilarityLabel) -> Result<Element> {
        if !b.disjoint(d) {
            return Err(Error::Precondition(format!("`{b}` and `{d}` are not disjoint")));
        }
        let mut regions =
            vec![Region::new(b.clone(), d.clone(), label), Region::new(d.clone(), b.clone(), self.invert_label(label))];
        let mut pair = [b.clone(), d.clone()];
        pair.sort();
        for c in self.space().complement(&pair) {
            regions.push(Region::canonical(c.clone(), c));
        }
        self.element(regions)
    }

    /// Involution exchanging `b` with the leftmost subball of `d` similar to
    /// `b`.
    pub fn swap_involution(&self, b: &BallAddress, d: &BallAddress) -> Result<Element> {
        self.space().check_address(b)?;
        self.space().check_address(d)?;
        if b.is_root() || d.is_root() {
            return Err(Error::RootBall);
        }
        let d0 = self
            .space()
            .find_ball(d, self.space().class_at(b), &[], false)
            .ok_or_else(|| Error::Construction(format!("no ball similar to `{b}` inside `{d}`")))?;
        self.transposition(b, &d0, SimilarityLabel::Canonical)
    }

    /// An element equal to the given similarities on their sources and to the
    /// identity outside `X`.
    pub fn extend_partial(&self, pairs: &[Pair]) -> Result<Element> {
        self.extend_within(&[BallAddress::root()], pairs)
    }

    /// Like [`Structure::extend_partial`], supported in the clopen set
    /// `region`. Material not covered by the pairs is matched by identity
    /// where possible and by canonical similarities otherwise.
    pub fn extend_within(&self, region: &[BallAddress], pairs: &[Pair]) -> Result<Element> {
        let sp = self.space();
        sp.check_cover(region, region).map_err(Error::Precondition)?;
        let sources: Vec<BallAddress> = pairs.iter().map(|p| p.0.clone()).collect();
        let targets: Vec<BallAddress> = pairs.iter().map(|p| p.1.clone()).collect();
        for (name, balls) in [("source", &sources), ("target", &targets)] {
            for (i, x) in balls.iter().enumerate() {
                sp.check_address(x)?;
                if !region.iter().any(|r| r.contains(x)) {
                    return Err(Error::Precondition(format!("{name} `{x}` lies outside the region")));
                }
                if balls[..i].iter().any(|y| y.comparable(x)) {
                    return Err(Error::Precondition(format!("{name} balls overlap at `{x}`")));
                }
            }
        }
        for (b, d, l) in pairs {
            if !self.label_valid(*l, b, d) {
                return Err(Error::LabelMismatch { src: b.to_string(), dst: d.to_string() });
            }
        }
        let mut sorted_sources = sources.clone();
        sorted_sources.sort();
        let mut sorted_targets = targets.clone();
        sorted_targets.sort();
        let p = sp.clopen_minus(region, &sorted_sources);
        let q = sp.clopen_minus(region, &sorted_targets);
        if p.is_empty() || q.is_empty() {
            return Err(Error::Precondition("the family covers the region".into()));
        }

        let common = sp.clopen_intersect(&p, &q);
        let p_only = sp.clopen_minus(&p, &q);
        let q_only = sp.clopen_minus(&q, &p);
        let attempt = match (p_only.is_empty(), q_only.is_empty()) {
            (true, true) => Some((common.clone(), vec![])),
            (false, false) => self.match_clopen(&p_only, &q_only).ok().map(|m| (common.clone(), m)),
            _ => None,
        };
        let (fixed, matched) = match attempt {
            Some(x) => x,
            None => (vec![], self.match_clopen(&p, &q)?),
        };

        let mut regions: Vec<Region> = pairs.iter().map(|(b, d, l)| Region::new(b.clone(), d.clone(), *l)).collect();
        regions.extend(fixed.into_iter().map(|c| Region::canonical(c.clone(), c)));
        regions.extend(matched.into_iter().map(|(a, b)| Region::canonical(a, b)));
        regions.extend(sp.complement(region).into_iter().map(|c| Region::canonical(c.clone(), c)));
        self.element(regions)
    }

    /// Pair up two clopen sets ball by ball with type-equal balls, splitting
    /// balls as needed.
    pub fn match_clopen(&self, p: &[BallAddress], q: &[BallAddress]) -> Result<Vec<(BallAddress, BallAddress)>> {
        let sp = self.space();
        let mut p = p.to_vec();
        let mut q = q.to_vec();
        let mut out = Vec::new();
        for _ in 0..MATCH_ITERATIONS {
            p.sort();
            q.sort();
            let mut by_class: BTreeMap<ClassId, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
            for (i, a) in p.iter().enumerate() {
                by_class.entry(sp.class_at(a)).or_default().0.push(i);
            }
            for (i, a) in q.iter().enumerate() {
                by_class.entry(sp.class_at(a)).or_default().1.push(i);
            }
            let mut matches: Vec<(usize, usize)> =
                by_class.values().flat_map(|(x, y)| x.iter().copied().zip(y.iter().copied())).collect();
            let rest_p = p.len() - matches.len();
            let rest_q = q.len() - matches.len();
            if rest_p == 0 && rest_q == 0 {
                out.extend(matches.into_iter().map(|(i, j)| (p[i].clone(), q[j].clone())));
                return Ok(out);
            }
            if (rest_p == 0) != (rest_q == 0) {
                matches.pop();
            }
            let used_p: HashSet<usize> = matches.iter().map(|m| m.0).collect();
            let used_q: HashSet<usize> = matches.iter().map(|m| m.1).collect();
            out.extend(matches.iter().map(|&(i, j)| (p[i].clone(), q[j].clone())));
            p = p.iter().enumerate().filter(|(i, _)| !used_p.contains(i)).map(|(_, a)| a.clone()).collect();
            q = q.iter().enumerate().filter(|(i, _)| !used_q.contains(i)).map(|(_, a)| a.clone()).collect();

            let splittable = |v: &[BallAddress]| {
                v.iter()
                    .enumerate()
                    .filter(|(_, a)| sp.num_children(a) > 0)
                    .min_by(|(_, a), (_, b)| (a.len(), *a).cmp(&(b.len(), *b)))
                    .map(|(i, _)| i)
            };
            let (side, idx) = if p.len() <= q.len() {
                match splittable(&p) {
                    Some(i) => (0, i),
                    None => (1, splittable(&q).ok_or_else(|| no_match(&p, &q))?),
                }
            } else {
                match splittable(&q) {
                    Some(i) => (1, i),
                    None => (0, splittable(&p).ok_or_else(|| no_match(&p, &q))?),
                }
            };
            let v = if side == 0 { &mut p } else { &mut q };
            let a = v.swap_remove(idx);
            v.extend(sp.children(&a));
            if p.len() + q.len() > MATCH_BALLS {
                return Err(no_match(&p, &q));
            }
        }
        Err(no_match(&p, &q))
    }

    /// Deepen inside the similarity `a → t` until a ball disjoint from its
    /// image is found.
    fn deepen_to_moved(&self, a: &BallAddress, t: &BallAddress, l: SimilarityLabel) -> Option<BallAddress> {
        let sp = self.space();
        let (mut a, mut t, mut l) = (a.clone(), t.clone(), l);
        for _ in 0..1024 {
            if a.disjoint(&t) {
                return Some(a);
            }
            let kids: Vec<_> = (0..sp.num_children(&a)).map(|c| self.restrict_label(l, &a, &t, c as u8)).collect();
            if let Some(k) = kids.iter().filter(|(s, d, _)| s.disjoint(d)).min_by_key(|(s, _, _)| sp.is_finite_ball(s))
            {
                return Some(k.0.clone());
            }
            let next = kids
                .into_iter()
                .filter(|(s, d, l)| s != d || !self.is_identity_label(*l))
                .min_by_key(|(s, _, _)| sp.is_finite_ball(s))?;
            (a, t, l) = next;
        }
        None
    }

    /// A ball `B` inside one region of `g` with `g(B) ∩ B = ∅`.
    pub fn move_witness(&self, g: &Element) -> Result<BallAddress> {
        let g = self.reduce(g);
        let r = g
            .regions()
            .iter()
            .find(|r| r.src != r.dst || !self.is_identity_label(r.label))
            .ok_or(Error::IdentityElement)?;
        self.deepen_to_moved(&r.src, &r.dst, r.label)
            .ok_or_else(|| Error::Invariant(format!("no moved ball below `{}`", r.src)))
    }

    /// A ball inside the clopen set `u` moved off itself by `g`, if any point
    /// of `u` is moved.
    pub fn moved_ball_within(&self, g: &Element, u: &[BallAddress]) -> Option<BallAddress> {
        for r in g.regions() {
            for piece in self.space().clopen_intersect(std::slice::from_ref(&r.src), u) {
                let (t, l) = self.restrict(g, &piece).ok()?;
                if piece == t && self.is_identity_label(l) {
                    continue;
                }
                if let Some(b) = self.deepen_to_moved(&piece, &t, l) {
                    return Some(b);
                }
            }
        }
        None
    }

    /// Write `g = h1 · h2` with both factors supported in proper clopen sets.
    pub fn split_small_support(&self, g: &Element) -> Result<(Element, Element)> {
        let sp = self.space();
        let mut b = self.move_witness(g)?;
        let (t, l) = loop {
            let (t, l) = self.restrict(g, &b)?;
            let mut pair = [b.clone(), t.clone()];
            pair.sort();
            if !sp.complement(&pair).is_empty() {
                break (t, l);
            }
            let kids = sp.children(&b);
            let next = kids
                .iter()
                .find(|c| !sp.is_finite_ball(c))
                .or(kids.first())
                .cloned()
                .ok_or_else(|| Error::Construction("the space has too few points".into()))?;
            b = next;
        };
        let k = self.transposition(&b, &t, l)?;
        let h2 = self.compose(&k, g);
        Ok((k, h2))
    }

    /// An element supported in `a` that maps the clopen set `b` into `c`.
    pub fn vigorous_witness(&self, a: &[BallAddress], b: &[BallAddress], c: &[BallAddress]) -> Result<Element> {
        let sp = self.space();
        if sp.has_finite_balls() {
            return Err(Error::Precondition("the space has finite balls".into()));
        }
        for set in [a, b, c] {
            sp.check_cover(set, set).map_err(Error::Precondition)?;
        }
        let (mut a, mut b, mut c) = (a.to_vec(), b.to_vec(), c.to_vec());
        a.sort();
        b.sort();
        c.sort();
        for (name, set) in [("B", &b), ("C", &c)] {
            if !sp.clopen_minus(set, &a).is_empty() {
                return Err(Error::Precondition(format!("{name} is not contained in A")));
            }
            if sp.clopen_minus(&a, set).is_empty() || set.is_empty() {
                return Err(Error::Precondition(format!("{name} is not a proper non-empty subset of A")));
            }
        }
        if sp.clopen_minus(&b, &c).is_empty() && sp.clopen_minus(&c, &b).is_empty() {
            return Ok(self.identity());
        }
        let mut targets: Vec<BallAddress> = Vec::new();
        let mut pairs = Vec::new();
        for x in &b {
            let k = sp.class_at(x);
            let t = c
                .iter()
                .find_map(|ball| sp.find_ball(ball, k, &targets, true))
                .ok_or_else(|| Error::Construction(format!("no room in C for a copy of `{x}`")))?;
            targets.push(t.clone());
            pairs.push((x.clone(), t, SimilarityLabel::Canonical));
        }
        self.extend_within(&a, &pairs)
    }

    /// Split the shallowest, leftmost infinite ball of `within` until at
    /// least `want` infinite balls exist; return the first `want` of them.
    pub fn split_pool(&self, within: &[BallAddress], want: usize) -> Result<Vec<BallAddress>> {
        let sp = self.space();
        let mut pool = within.to_vec();
        for _ in 0..4096 {
            pool.sort();
            let infinite: Vec<BallAddress> = pool.iter().filter(|a| !sp.is_finite_ball(a)).cloned().collect();
            if infinite.len() >= want {
                return Ok(infinite.into_iter().take(want).collect());
            }
            let i = (0..pool.len())
                .filter(|&i| !sp.is_finite_ball(&pool[i]))
                .min_by(|&i, &j| (pool[i].len(), &pool[i]).cmp(&(pool[j].len(), &pool[j])))
                .ok_or_else(|| Error::Construction("not enough infinite balls".into()))?;
            let a = pool.swap_remove(i);
            pool.extend(sp.children(&a));
        }
        Err(Error::Construction("not enough infinite balls".into()))
    }

    /// Three disjoint subballs of `b` of the given classes.
    fn three_subballs(&self, b: &BallAddress, classes: [ClassId; 3]) -> Result<[BallAddress; 3]> {
        let pieces = self.split_pool(std::slice::from_ref(b), 4)?;
        let mut out: Vec<BallAddress> = Vec::with_capacity(3);
        for (piece, k) in pieces.iter().zip(classes) {
            out.push(
                self.space()
                    .find_ball(piece, k, &[], false)
                    .ok_or_else(|| Error::Construction(format!("no ball of the needed type inside `{piece}`")))?,
            );
        }
        Ok([out[0].clone(), out[1].clone(), out[2].clone()])
    }

    /// Two elements generating a free group of rank two. `seed` rotates the
    /// roles of the four balls.
    pub fn pingpong_pair(&self, seed: u64) -> Result<PingPong> {
        let mut pool = self.split_pool(&[BallAddress::root()], 4)?;
        pool.rotate_left((seed % 4) as usize);
        let [b1p, b1m, b2p, b2m] = [pool[0].clone(), pool[1].clone(), pool[2].clone(), pool[3].clone()];
        let k = |a: &BallAddress| self.space().class_at(a);
        let c = SimilarityLabel::Canonical;

        let [a1p, b1p_, c1p] = self.three_subballs(&b1p, [k(&b1p), k(&b2m), k(&b2p)])?;
        let [a1m, b1m_, c1m] = self.three_subballs(&b1m, [k(&b1m), k(&b2m), k(&b2p)])?;
        let h = self.extend_partial(&[
            (b1p.clone(), a1p, c),
            (b2m.clone(), b1p_, c),
            (b2p.clone(), c1p, c),
            (a1m, b1m.clone(), c),
            (b1m_, b2m.clone(), c),
            (c1m, b2p.clone(), c),
        ])?;

        let [a2p, b2p_, c2p] = self.three_subballs(&b2p, [k(&b1m), k(&b1p), k(&b2p)])?;
        let [a2m, b2m_, c2m] = self.three_subballs(&b2m, [k(&b1m), k(&b1p), k(&b2m)])?;
        let g = self.extend_partial(&[
            (b1m.clone(), a2p, c),
            (b1p.clone(), b2p_, c),
            (b2p.clone(), c2p, c),
            (a2m, b1m.clone(), c),
            (b2m_, b1p.clone(), c),
            (c2m, b2m.clone(), c),
        ])?;
        Ok(PingPong { g, h, balls: [b1p, b1m, b2p, b2m] })
    }

    /// Check the ping-pong containments ball-wise and evaluate every reduced
    /// word of length `1..=max_len`.
    pub fn verify_pingpong(&self, pp: &PingPong, max_len: usize) -> PingPongReport {
        let [b1p, b1m, b2p, b2m] = &pp.balls;
        let g_inv = self.inverse(&pp.g);
        let h_inv = self.inverse(&pp.h);
        let mut failures = Vec::new();
        let checks =
            [("h", &pp.h, b1m, b1p), ("h^-1", &h_inv, b1p, b1m), ("g", &pp.g, b2m, b2p), ("g^-1", &g_inv, b2p, b2m)];
        for (name, x, from, into) in checks {
            let outside = self.space().complement(std::slice::from_ref(from));
            for img in self.image_clopen(x, &outside) {
                if !into.contains(&img) {
                    failures.push(format!("{name} maps part of X \\ {from} onto `{img}`, outside `{into}`"));
                }
            }
        }

        let letters = [&pp.g, &g_inv, &pp.h, &h_inv];
        let names = ["g", "G", "h", "H"];
        let mut words_by_length = vec![0usize; max_len];
        let mut identity_words = Vec::new();
        let mut stack: Vec<(Element, usize, String)> = vec![(self.identity(), usize::MAX, String::new())];
        while let Some((acc, last, word)) = stack.pop() {
            if word.len() == max_len {
                continue;
            }
            for x in 0..4 {
                if last != usize::MAX && x == last ^ 1 {
                    continue;
                }
                let next = self.compose(&acc, letters[x]);
                let w = format!("{word}{}", names[x]);
                words_by_length[w.len() - 1] += 1;
                if self.is_identity(&next) && identity_words.len() < 16 {
                    identity_words.push(w.clone());
                }
                stack.push((next, x, w));
            }
        }
        PingPongReport {
            containment_failures: failures,
            max_len,
            words_checked: words_by_length.iter().sum(),
            words_by_length,
            identity_words,
        }
    }

    /// Paradoxical-decomposition data with the default choice of subballs.
    pub fn paradox_data(&self) -> Result<ParadoxData> {
        let balls = self.infinite_depth_zero_balls()?;
        let mut choices = Vec::new();
        for b in &balls {
            choices.push(self.guarded_subballs(b)?);
        }
        self.paradox_data_with(&choices, true)
    }

    fn infinite_depth_zero_balls(&self) -> Result<Vec<BallAddress>> {
        let cells = self.space().minimal_ball_partition()?;
        let balls: Vec<BallAddress> =
            cells.cells().iter().filter(|a| !self.space().is_finite_ball(a)).cloned().collect();
        if balls.is_empty() {
            return Err(Error::Precondition("no infinite depth-zero ball".into()));
        }
        Ok(balls)
    }

    /// The first two disjoint proper subballs of `b` similar to `b` whose path
    /// from `b` passes an infinite left sibling, in breadth-first order.
    pub fn guarded_subballs(&self, b: &BallAddress) -> Result<(BallAddress, BallAddress)> {
        let sp = self.space();
        let guarded = |a: &BallAddress| {
            (b.len() + 1..=a.len()).any(|t| {
                let (p, i) = (a.prefix(t - 1), a.prefix(t).last().unwrap());
                (0..i).any(|j| !sp.is_finite_ball(&p.child(j)))
            })
        };
        let cands: Vec<BallAddress> =
            sp.balls_of_class(b, sp.class_at(b), &[], true, 256).into_iter().filter(|a| guarded(a)).collect();
        let first = cands.first().cloned();
        let second = first.as_ref().and_then(|f| cands.iter().find(|a| a.disjoint(f)).cloned());
        match (first, second) {
            (Some(x), Some(y)) => Ok((x, y)),
            _ => Err(Error::Construction(format!("`{b}` has no two guarded subballs of its own type"))),
        }
    }

    /// Build paradox data from explicit subball choices, one pair per
    /// infinite depth-zero ball. With `guarded`, each translator also moves
    /// the part of `B_i` left of its subball out of `B_i`.
    pub fn paradox_data_with(&self, choices: &[(BallAddress, BallAddress)], guarded: bool) -> Result<ParadoxData> {
        let balls = self.infinite_depth_zero_balls()?;
        if choices.len() != balls.len() {
            return Err(Error::Precondition(format!("expected {} subball pairs", balls.len())));
        }
        let mut pieces = Vec::new();
        for (b, (s1, s2)) in balls.iter().zip(choices) {
            for s in [s1, s2] {
                if !b.strictly_contains(s) || !self.sim_nonempty(b, s) || self.space().is_finite_ball(s) {
                    return Err(Error::Precondition(format!("`{s}` is not an infinite subball of `{b}` of its type")));
                }
            }
            if !s1.disjoint(s2) {
                return Err(Error::Precondition(format!("`{s1}` and `{s2}` overlap")));
            }
            let g = self.translator(b, s1, guarded)?;
            let h = self.translator(b, s2, guarded)?;
            pieces.push(ParadoxPiece { ball: b.clone(), sub1: s1.clone(), sub2: s2.clone(), g, h });
        }
        Ok(ParadoxData { base: balls[0].clone(), pieces })
    }

    /// An element mapping `s` onto `b` canonically.
    fn translator(&self, b: &BallAddress, s: &BallAddress, guarded: bool) -> Result<Element> {
        let sp = self.space();
        let mut pairs = vec![(s.clone(), b.clone(), SimilarityLabel::Canonical)];
        if guarded {
            let outside = sp.complement(std::slice::from_ref(b));
            let mut used: Vec<BallAddress> = Vec::new();
            for t in b.len() + 1..=s.len() {
                let step = s.prefix(t);
                let parent = s.prefix(t - 1);
                for j in 0..step.last().unwrap() {
                    let w = parent.child(j);
                    let k = sp.class_at(&w);
                    // Leave part of the outside uncovered so the complement can be matched.
                    let leaves_room = |t: &BallAddress| {
                        let mut taken = used.clone();
                        taken.push(t.clone());
                        taken.sort();
                        !sp.clopen_minus(&outside, &taken).is_empty()
                    };
                    let target = outside
                        .iter()
                        .flat_map(|o| sp.balls_of_class(o, k, &used, true, 16))
                        .find(|t| leaves_room(t))
                        .ok_or_else(|| Error::Construction(format!("no room outside `{b}` for a copy of `{w}`")))?;
                    used.push(target.clone());
                    pairs.push((w, target, SimilarityLabel::Canonical));
                }
            }
        }
        self.extend_partial(&pairs)
    }

    /// The leftmost infinite maximal cell of `g` inside `b`, or `b` itself
    /// when one cell contains it.
    pub fn leftmost_infinite_cell(&self, g: &Element, b: &BallAddress) -> Result<BallAddress> {
        if locate(g.regions(), b).is_some() {
            return Ok(b.clone());
        }
        crate::element::below(g.regions(), b)
            .iter()
            .map(|r| &r.src)
            .find(|a| !self.space().is_finite_ball(a))
            .cloned()
            .ok_or_else(|| Error::Invariant(format!("no infinite cell inside `{b}`")))
    }

    fn classify_image(&self, data: &ParadoxData, img: &BallAddress) -> Result<Stratum> {
        for (i, p) in data.pieces.iter().enumerate() {
            if p.ball.contains(img) {
                let j = if p.sub1.contains(img) {
                    1
                } else if p.sub2.contains(img) {
                    3
                } else {
                    2
                };
                return Ok(Stratum { i: i + 1, j });
            }
        }
        Err(Error::Invariant(format!("image `{img}` of the leftmost infinite cell misses every infinite ball")))
    }

    pub fn classify_stratum(&self, data: &ParadoxData, f: &Element) -> Result<Stratum> {
        let f = self.reduce(f);
        let d = self.leftmost_infinite_cell(&f, &data.base)?;
        self.classify_image(data, &self.apply(&f, &d)?)
    }

    pub fn classify_coset(&self, data: &ParadoxData, rep: &CosetRep) -> Result<Stratum> {
        if rep.base != data.base {
            return Err(Error::Precondition(format!("coset of `{}`, expected `{}`", rep.base, data.base)));
        }
        let r = rep
            .regions
            .iter()
            .find(|r| !self.space().is_finite_ball(&r.src))
            .ok_or_else(|| Error::Invariant("coset restriction has no infinite cell".into()))?;
        self.classify_image(data, &r.dst)
    }

    /// Sample each stratum and check the translate identities and the
    /// coset invariance of the classification.
    pub fn verify_paradox(&self, data: &ParadoxData, samples: usize, seed: u64) -> ParadoxReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = RandomParams::default();
        let strata = data.strata();
        let inverses: Vec<(Element, Element)> =
            data.pieces.iter().map(|p| (self.inverse(&p.g), self.inverse(&p.h))).collect();
        let mut witnesses = Vec::new();
        let note = |w: &mut Vec<String>, s: String| {
            if w.len() < 8 {
                w.push(s);
            }
        };

        let mut buckets: BTreeMap<Stratum, Vec<Element>> = strata.iter().map(|s| (*s, Vec::new())).collect();
        let mut classify_errors = 0usize;
        let budget = samples.max(1) * strata.len() * 50;
        for _ in 0..budget {
            if buckets.values().all(|v| v.len() >= samples) {
                break;
            }
            let f = self.random_element(&mut rng, params);
            let Ok(s) = self.classify_stratum(data, &f) else {
                classify_errors += 1;
                continue;
            };
            let (gi, hi) = &inverses[s.i - 1];
            let derived = [self.compose(gi, &f), self.compose(hi, &f)];
            for x in std::iter::once(f).chain(derived) {
                if let Ok(t) = self.classify_stratum(data, &x) {
                    let v = buckets.get_mut(&t).unwrap();
                    if v.len() < samples {
                        v.push(x);
                    }
                }
            }
        }

        let mut checks = 0usize;
        let mut violations = classify_errors;
        for (s, elems) in &buckets {
            let piece = &data.pieces[s.i - 1];
            let (gi, hi) = &inverses[s.i - 1];
            for f in elems {
                let mut expect = |label: &str, x: Element, ok: &dyn Fn(Stratum) -> bool| {
                    checks += 1;
                    match self.classify_stratum(data, &x) {
                        Ok(t) if ok(t) => {}
                        other => {
                            violations += 1;
                            note(&mut witnesses, format!("{label} for f in {s}: got {other:?}"));
                        }
                    }
                };
                let same_i = |t: Stratum| t.i == s.i;
                if s.j == 1 {
                    expect("g_i f", self.compose(&piece.g, f), &same_i);
                }
                if s.j == 3 {
                    expect("h_i f", self.compose(&piece.h, f), &same_i);
                }
                expect("g_i^-1 f", self.compose(gi, f), &|t| t == Stratum { i: s.i, j: 1 });
                expect("h_i^-1 f", self.compose(hi, f), &|t| t == Stratum { i: s.i, j: 3 });
            }
        }

        let coset_pairs = 50;
        let mut coset_violations = 0;
        let outside = self.space().complement(std::slice::from_ref(&data.base));
        for _ in 0..coset_pairs {
            let f1 = self.random_element(&mut rng, params);
            let k = self.random_element_on(&outside, &mut rng, params);
            let f2 = self.compose(&f1, &k);
            let ok = (|| -> Result<bool> {
                let r1 = self.restrict_coset(&f1, &data.base)?;
                let r2 = self.restrict_coset(&f2, &data.base)?;
                let s1 = self.classify_stratum(data, &f1)?;
                Ok(self.coset_equals(&r1, &r2)
                    && self.classify_stratum(data, &f2)? == s1
                    && self.classify_coset(data, &r1)? == s1
                    && self.classify_coset(data, &r2)? == s1)
            })();
            if !matches!(ok, Ok(true)) {
                coset_violations += 1;
                note(&mut witnesses, format!("coset pair disagrees: {ok:?}"));
            }
        }

        ParadoxReport {
            strata: strata.len(),
            samples_per_stratum: buckets.iter().map(|(s, v)| (s.to_string(), v.len())).collect(),
            unfilled_strata: buckets.iter().filter(|(_, v)| v.len() < samples).map(|(s, _)| s.to_string()).collect(),
            translate_checks: checks,
            translate_violations: violations,
            coset_pairs,
            coset_violations,
            witnesses,
        }
    }

    /// `n` pairwise distinct conjugates `h_k⁻¹ f h_k` of `f`.
    pub fn icc_conjugates(&self, f: &Element, n: usize) -> Result<Vec<Element>> {
        let sp = self.space();
        let b = self.move_witness(f)?;
        let fb = self.apply(f, &b)?;
        let k = sp.class_at(&b);
        let mut out: Vec<Element> = Vec::with_capacity(n);
        let mut seen: HashSet<Element> = HashSet::new();
        let mut accept = |c: Element, out: &mut Vec<Element>| {
            if seen.insert(c.clone()) {
                out.push(c);
            }
        };
        let budget = 8 * n + 32;
        if sp.is_finite_ball(&b) {
            let mut avoid = vec![b.clone(), fb.clone()];
            for _ in 0..budget {
                if out.len() >= n {
                    break;
                }
                let Some(d) = sp.find_ball(&BallAddress::root(), k, &avoid, true) else { break };
                avoid.push(d.clone());
                let h = self.transposition(&b, &d, SimilarityLabel::Canonical)?;
                accept(self.conjugate(f, &h), &mut out);
            }
        } else {
            let mut d_prev = fb.clone();
            for _ in 0..budget {
                if out.len() >= n {
                    break;
                }
                let on_left_path = |a: &BallAddress| a.suffix_after(&d_prev).unwrap().iter().all(|&c| c == 0);
                let Some(d) = sp.balls_of_class(&d_prev, k, &[], true, 64).into_iter().find(|a| !on_left_path(a))
                else {
                    break;
                };
                let h = self.transposition(&b, &d, SimilarityLabel::Canonical)?;
                accept(self.conjugate(f, &h), &mut out);
                d_prev = d;
            }
        }
        if out.len() < n {
            return Err(Error::Construction(format!("found only {} distinct conjugates", out.len())));
        }
        Ok(out)
    }

    /// An element `g` with `Γ_B ∩ g⁻¹ Γ_B g = {1}`: each ball of `X ∖ B` is
    /// swapped with its own subball of `B`.
    pub fn malnormal_witness(&self, b: &BallAddress) -> Result<Element> {
        let sp = self.space();
        sp.check_address(b)?;
        if b.is_root() {
            return Err(Error::RootBall);
        }
        if sp.is_finite_ball(b) {
            return Err(Error::Precondition(format!("`{b}` is finite")));
        }
        let outside = sp.complement(std::slice::from_ref(b));
        let pieces = self.split_pool(std::slice::from_ref(b), outside.len().max(2))?;
        let mut regions = Vec::new();
        let mut inner = Vec::new();
        for (o, piece) in outside.iter().zip(&pieces) {
            let d = sp
                .find_ball(piece, sp.class_at(o), &[], false)
                .ok_or_else(|| Error::Construction(format!("no ball similar to `{o}` inside `{piece}`")))?;
            regions.push(Region::canonical(o.clone(), d.clone()));
            regions.push(Region::canonical(d.clone(), o.clone()));
            inner.push(d);
        }
        inner.sort();
        for c in sp.clopen_minus(std::slice::from_ref(b), &inner) {
            regions.push(Region::canonical(c.clone(), c));
        }
        self.element(regions)
    }

    /// Check that no non-trivial `f ∈ Γ_B` has `g⁻¹ f g ∈ Γ_B`, on seeded
    /// random `f`.
    pub fn malnormal_probe(&self, b: &BallAddress, g: &Element, samples: usize, seed: u64) -> Result<MalnormalReport> {
        if b.is_root() {
            return Err(Error::RootBall);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let outside = self.space().complement(std::slice::from_ref(b));
        let ball = std::slice::from_ref(b);
        let mut report =
            MalnormalReport { samples, nontrivial_samples: 0, conjugates_in_stabilizer: 0, counterexamples: 0 };
        for _ in 0..samples {
            let f = self.random_element_on(&outside, &mut rng, RandomParams::default());
            let trivial = self.is_identity(&f);
            if !trivial {
                report.nontrivial_samples += 1;
            }
            if self.fixes_clopen(&self.conjugate(&f, g), ball) {
                report.conjugates_in_stabilizer += 1;
                if !trivial {
                    report.counterexamples += 1;
                }
            }
        }
        Ok(report)
    }

    /// The `n`-th element of a sequence with unbounded cocycle norm: `n`
    /// disjoint pairs of balls outside `b` swapped, composed with a nested
    /// displacement inside `b`.
    pub fn unbounded_sequence(&self, b: &BallAddress, n: usize) -> Result<Element> {
        let sp = self.space();
        sp.check_address(b)?;
        if b.is_root() {
            return Err(Error::RootBall);
        }
        if n == 0 || sp.is_finite_ball(b) {
            return Err(Error::Precondition("need n >= 1 and an infinite ball".into()));
        }
        let outside = sp.complement(std::slice::from_ref(b));
        let mut cur = outside
            .iter()
            .find(|a| !sp.is_finite_ball(a))
            .cloned()
            .ok_or_else(|| Error::Construction(format!("no infinite ball outside `{b}`")))?;
        let mut comb = Vec::new();
        while comb.len() < 2 * n {
            let kids = sp.children(&cur);
            let mut infinite = kids.into_iter().filter(|c| !sp.is_finite_ball(c));
            let next = infinite.next().ok_or_else(|| Error::Construction("comb ended".into()))?;
            comb.extend(infinite);
            cur = next;
        }
        let mut f = self.identity();
        for pair in comb[..2 * n].chunks(2) {
            f = self.compose(&self.swap_involution(&pair[0], &pair[1])?, &f);
        }
        let k = sp.class_at(b);
        let mut chain = vec![sp.find_ball(b, k, &[], true).ok_or_else(|| Error::Construction("no subball".into()))?];
        while chain.len() <= n {
            let last = chain.last().unwrap();
            chain.push(sp.find_ball(last, k, &[], true).ok_or_else(|| Error::Construction("no subball".into()))?);
        }
        let inner = self.extend_within(
            std::slice::from_ref(b),
            &[(chain[n - 1].clone(), chain[n].clone(), SimilarityLabel::Canonical)],
        )?;
        Ok(self.compose(&f, &inner))
    }

    /// A commutator certifying that `g` does not centralize the commutator
    /// subgroup.
    pub fn commutator_separation_witness(&self, g: &Element) -> Result<Separation> {
        let sp = self.space();
        if sp.has_finite_balls() {
            return Err(Error::Precondition("the space has finite balls".into()));
        }
        let root = BallAddress::root();
        let mut b = self.move_witness(g)?;
        // Shrink the moved ball until two auxiliary balls fit beside it.
        let (c, d1, d2) = loop {
            let c = self.apply(g, &b)?;
            let k = sp.class_at(&b);
            let d1 = sp.find_ball(&root, k, &[b.clone(), c.clone()], true);
            let d2 = d1.as_ref().and_then(|d1| sp.find_ball(&root, k, &[b.clone(), c.clone(), d1.clone()], true));
            if let (Some(d1), Some(d2)) = (d1, d2) {
                break (c, d1, d2);
            }
            b = sp
                .children(&b)
                .into_iter()
                .find(|x| self.ball_status(g, x) == BallStatus::Moved)
                .ok_or_else(|| Error::Construction("no room for auxiliary balls".into()))?;
        };
        let h1 = self.transposition(&b, &d1, SimilarityLabel::Canonical)?;
        let h2 = self.transposition(&b, &d2, SimilarityLabel::Canonical)?;
        let f = self.commutator(&h1, &h2);
        if self.ball_status(&f, &b) != BallStatus::Moved || self.ball_status(&f, &c) != BallStatus::Fixed {
            return Err(Error::Invariant("separation certificate does not hold".into()));
        }
        Ok(Separation { f, moved: b, fixed: c })
    }
}

fn no_match(p: &[BallAddress], q: &[BallAddress]) -> Error {
    Error::Construction(format!("cannot match clopen sets ({} and {} balls left)", p.len(), q.len()))
}
