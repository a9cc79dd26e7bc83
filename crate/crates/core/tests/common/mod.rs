//! Independent oracles shared by the integration suites. They work from
//! pointwise evaluation and brute-force enumeration, never from the
//! normal-form or zipper code they check.

#![allow(dead_code)]

use rand::Rng;
use simgroup::checks::TransitionMatrix;
use std::collections::{BTreeMap, HashMap};

use simgroup::space::SpaceDoc;
use simgroup::{fixtures, BallAddress, Element, Region, Space, Structure};

pub fn structures() -> Vec<(&'static str, Structure)> {
    vec![
        ("binary", Structure::canonical(fixtures::binary())),
        ("golden-mean", Structure::canonical(fixtures::golden_mean())),
        ("qaut", Structure::canonical(fixtures::qaut())),
        ("houghton-H2", Structure::canonical(fixtures::houghton_h2())),
    ]
}

pub fn klein() -> Structure {
    Structure::decorated(fixtures::binary(), fixtures::klein_four()).unwrap()
}

pub fn el(st: &Structure, pairs: &[(&str, &str)]) -> Element {
    let regions = pairs.iter().map(|(s, t)| Region::canonical(s.parse().unwrap(), t.parse().unwrap())).collect();
    st.element(regions).unwrap()
}

/// Descendants of `a` at address length `len`, stopping early at terminals.
pub fn leaves(space: &Space, a: &BallAddress, len: usize) -> Vec<BallAddress> {
    let mut out = Vec::new();
    let mut stack = vec![a.clone()];
    while let Some(b) = stack.pop() {
        let kids = space.children(&b);
        if b.len() >= len || kids.is_empty() {
            out.push(b);
        } else {
            stack.extend(kids);
        }
    }
    out.sort();
    out
}

/// All addresses with `1 <= len <= max`.
pub fn addresses(space: &Space, max: usize) -> Vec<BallAddress> {
    let mut out = Vec::new();
    let mut frontier = vec![BallAddress::root()];
    for _ in 0..max {
        let next: Vec<BallAddress> = frontier.iter().flat_map(|a| space.children(a)).collect();
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Whether `g` restricted to `a` is a single similarity, decided by
/// evaluating `g` on every descendant of `a` at address length `len`.
pub fn is_region(st: &Structure, g: &Element, a: &BallAddress, len: usize) -> bool {
    let sp = st.space();
    let images: Vec<_> = leaves(sp, a, len)
        .into_iter()
        .map(|u| {
            let (img, l) = st.restrict(g, &u).expect("leaves lie inside regions");
            (u.suffix_after(a).unwrap().to_vec(), img, l)
        })
        .collect();
    st.labels_for_class(sp.class_at(a)).into_iter().any(|l| {
        let (s_first, img0, _) = &images[0];
        let (s0, _) = st.transport(l, s_first);
        if img0.len() < s0.len() {
            return false;
        }
        let t = img0.prefix(img0.len() - s0.len());
        st.label_valid(l, a, &t)
            && images.iter().all(|(s, img, lab)| {
                let (moved, rest) = st.transport(l, s);
                *img == t.join(&moved) && *lab == rest
            })
    })
}

/// `|plus| + |minus|` counted directly: non-root addresses that are not
/// regions of `g`, plus those that are not regions of `g⁻¹`.
pub fn norm_oracle(st: &Structure, g: &Element) -> u64 {
    let count = |x: &Element| {
        let depth = x.max_depth();
        addresses(st.space(), depth).iter().filter(|a| !is_region(st, x, a, depth + 2)).count() as u64
    };
    count(g) + count(&st.inverse(g))
}

/// Split random regions into their children using pointwise images only.
pub fn split_randomly<R: Rng>(st: &Structure, g: &Element, rng: &mut R, splits: usize) -> Element {
    let mut regions = g.regions().to_vec();
    for _ in 0..splits {
        let i = rng.gen_range(0..regions.len());
        let r = regions[i].clone();
        let kids = st.space().children(&r.src);
        if kids.is_empty() {
            continue;
        }
        regions.swap_remove(i);
        for c in kids {
            let (dst, label) = st.restrict(g, &c).unwrap();
            regions.push(Region::new(c, dst, label));
        }
    }
    st.from_regions(regions).unwrap()
}

/// Irreducibility by matrix powers: every entry of `Σ_{l=1..n} B^l` positive.
pub fn irreducible_by_powers(m: &TransitionMatrix) -> bool {
    let n = m.len();
    let b: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j) as u64).collect()).collect();
    let mut power = b.clone();
    let mut sum = b.clone();
    for _ in 1..n {
        power = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| (power[i][k] * b[k][j]).min(1)).sum::<u64>().min(1)).collect())
            .collect();
        for i in 0..n {
            for j in 0..n {
                sum[i][j] |= power[i][j];
            }
        }
    }
    sum.iter().all(|row| row.iter().all(|&x| x > 0))
}

/// Labeled subtree shapes truncated at `depth`, interned level by level:
/// two symbols get the same id iff their truncated labeled trees agree.
pub fn subtree_shapes(space: &Space, depth: usize) -> Vec<usize> {
    let n = space.num_symbols();
    let label = |s: usize| space.label(s).unwrap_or("").to_string();
    let mut ids: Vec<usize> = Vec::new();
    for d in 0..=depth {
        let mut table: HashMap<(String, Option<Vec<usize>>), usize> = HashMap::new();
        ids = (0..n)
            .map(|s| {
                let kids = (d > 0).then(|| space.children_of_symbol(s).iter().map(|&c| ids[c]).collect());
                let next = table.len();
                *table.entry((label(s), kids)).or_insert(next)
            })
            .collect();
    }
    ids
}

/// Length of the longest downward path from each symbol, capped at `cap`.
pub fn heights(space: &Space, cap: usize) -> Vec<usize> {
    let n = space.num_symbols();
    let mut h = vec![0usize; n];
    for _ in 0..cap {
        h = (0..n).map(|s| space.children_of_symbol(s).iter().map(|&c| h[c] + 1).max().unwrap_or(0)).collect();
    }
    h
}

/// A random presentation on up to six symbols; some draws are invalid.
pub fn random_space_doc<R: Rng>(rng: &mut R, labeled: bool) -> SpaceDoc {
    let n = rng.gen_range(2..=6);
    let symbols: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut children = BTreeMap::new();
    let mut terminals = Vec::new();
    for (i, s) in symbols.iter().enumerate() {
        if i > 0 && rng.gen_bool(0.25) {
            terminals.push(s.clone());
            continue;
        }
        let k = rng.gen_range(1..=3);
        children.insert(s.clone(), (0..k).map(|_| symbols[rng.gen_range(0..n)].clone()).collect());
    }
    let labels = labeled.then(|| symbols.iter().map(|s| (s.clone(), format!("l{}", rng.gen_range(0..2)))).collect());
    SpaceDoc { name: Some("random".into()), symbols, children, root: "s0".into(), terminals, labels }
}
