//! Compact ultrametric spaces presented as end spaces of rooted trees.
//!
//! A presentation lists symbols, the ordered children of each symbol and a
//! root. Balls are vertices of the unfolded tree, named by their
//! [`BallAddress`] (the sequence of child positions from the root). Terminal
//! symbols are one-point balls.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type SymbolId = usize;
pub type ClassId = usize;

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// A vertex of the unfolded tree, i.e. a closed ball. The empty address is
/// the whole space.
///
/// The derived order is lexicographic with prefixes first, which is the ball
/// order used throughout ("leftmost" = least).
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BallAddress(Vec<u8>);

impl BallAddress {
    pub fn root() -> Self {
        BallAddress(Vec::new())
    }

    pub fn from_indices(indices: impl Into<Vec<u8>>) -> Self {
        BallAddress(indices.into())
    }

    pub fn indices(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, c: u8) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(c);
        BallAddress(v)
    }

    pub fn join(&self, suffix: &[u8]) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + suffix.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(suffix);
        BallAddress(v)
    }

    /// `None` for the root.
    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(BallAddress(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    pub fn prefix(&self, len: usize) -> Self {
        BallAddress(self.0[..len].to_vec())
    }

    /// Ancestor-or-equal: the ball `other` is contained in `self`.
    pub fn contains(&self, other: &BallAddress) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn strictly_contains(&self, other: &BallAddress) -> bool {
        other.0.len() > self.0.len() && other.0.starts_with(&self.0)
    }

    pub fn comparable(&self, other: &BallAddress) -> bool {
        self.contains(other) || other.contains(self)
    }

    pub fn disjoint(&self, other: &BallAddress) -> bool {
        !self.comparable(other)
    }

    /// The suffix of `self` below `ancestor`, if `ancestor` contains `self`.
    pub fn suffix_after(&self, ancestor: &BallAddress) -> Option<&[u8]> {
        self.0.strip_prefix(ancestor.0.as_slice())
    }

    /// Length of the longest common prefix.
    pub fn common_prefix_len(&self, other: &BallAddress) -> usize {
        self.0.iter().zip(other.0.iter()).take_while(|(a, b)| a == b).count()
    }

    /// Non-root strict ancestors, shallowest first.
    pub fn proper_ancestors(&self) -> impl Iterator<Item = BallAddress> + '_ {
        (1..self.0.len()).map(move |k| self.prefix(k))
    }
}

impl fmt::Display for BallAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.0 {
            write!(f, "{}", DIGITS[c as usize] as char)?;
        }
        Ok(())
    }
}

impl fmt::Debug for BallAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BallAddress {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.bytes()
            .map(|b| match b {
                b'0'..=b'9' => Ok(b - b'0'),
                b'a'..=b'z' => Ok(b - b'a' + 10),
                _ => Err(Error::InvalidAddress(s.to_string())),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BallAddress)
    }
}

impl Serialize for BallAddress {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BallAddress {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parse an address literal, panicking on malformed input. Meant for tests
/// and fixtures.
pub fn addr(s: &str) -> BallAddress {
    s.parse().expect("malformed address literal")
}

/// The on-disk form of a presentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub symbols: Vec<String>,
    #[serde(default)]
    pub children: BTreeMap<String, Vec<String>>,
    pub root: String,
    #[serde(default)]
    pub terminals: Vec<String>,
    /// Optional vertex labels. Symbols with different labels are never
    /// similar, even if their subtrees are isomorphic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<BTreeMap<String, String>>,
}

/// A validated presentation together with its derived type data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Space {
    name: String,
    symbols: Vec<String>,
    index: HashMap<String, SymbolId>,
    children: Vec<Vec<SymbolId>>,
    root: SymbolId,
    labels: Option<Vec<String>>,
    class: Vec<ClassId>,
    num_classes: usize,
    finite: Vec<bool>,
    reachable: Vec<bool>,
    class_base: Vec<Option<BallAddress>>,
}

impl Space {
    /// Parse the JSON space format.
    pub fn parse(text: &str) -> Result<Space> {
        let doc: SpaceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Space::from_doc(doc)
    }

    pub fn from_doc(doc: SpaceDoc) -> Result<Space> {
        if doc.symbols.is_empty() {
            return Err(Error::EmptySymbols);
        }
        let mut index = HashMap::new();
        for (i, s) in doc.symbols.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::DuplicateSymbol(s.clone()));
            }
        }
        let lookup = |s: &String| index.get(s).copied().ok_or_else(|| Error::UndeclaredSymbol(s.clone()));
        let root = index.get(&doc.root).copied().ok_or_else(|| Error::MissingRoot(doc.root.clone()))?;
        let mut children = vec![Vec::new(); doc.symbols.len()];
        for (s, kids) in &doc.children {
            let i = lookup(s)?;
            if kids.len() > DIGITS.len() {
                return Err(Error::TooManyChildren(s.clone(), kids.len()));
            }
            children[i] = kids.iter().map(lookup).collect::<Result<Vec<_>>>()?;
        }
        let mut terminal = vec![false; doc.symbols.len()];
        for t in &doc.terminals {
            let i = lookup(t)?;
            if !children[i].is_empty() {
                return Err(Error::TerminalWithChildren(t.clone()));
            }
            terminal[i] = true;
        }
        for (i, s) in doc.symbols.iter().enumerate() {
            if children[i].is_empty() && !terminal[i] {
                return Err(Error::UnmarkedLeaf(s.clone()));
            }
        }
        let labels = match &doc.labels {
            None => None,
            Some(map) => {
                for k in map.keys() {
                    lookup(k)?;
                }
                Some(doc.symbols.iter().map(|s| map.get(s).cloned().unwrap_or_default()).collect())
            }
        };
        let mut space = Space {
            name: doc.name.clone().unwrap_or_default(),
            symbols: doc.symbols.clone(),
            index,
            children,
            root,
            labels,
            class: Vec::new(),
            num_classes: 0,
            finite: Vec::new(),
            reachable: Vec::new(),
            class_base: Vec::new(),
        };
        space.derive();
        Ok(space)
    }

    pub fn to_doc(&self) -> SpaceDoc {
        SpaceDoc {
            name: if self.name.is_empty() { None } else { Some(self.name.clone()) },
            symbols: self.symbols.clone(),
            children: self
                .symbols
                .iter()
                .enumerate()
                .filter(|(i, _)| !self.children[*i].is_empty())
                .map(|(i, s)| (s.clone(), self.children[i].iter().map(|&c| self.symbols[c].clone()).collect()))
                .collect(),
            root: self.symbols[self.root].clone(),
            terminals: self
                .symbols
                .iter()
                .enumerate()
                .filter(|(i, _)| self.children[*i].is_empty())
                .map(|(_, s)| s.clone())
                .collect(),
            labels: self.labels.as_ref().map(|l| self.symbols.iter().cloned().zip(l.iter().cloned()).collect()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("space serializes")
    }

    pub fn with_name(mut self, name: &str) -> Space {
        self.name = name.to_string();
        self
    }

    fn derive(&mut self) {
        let n = self.symbols.len();
        self.class = refine_classes(&self.children, self.labels.as_deref());
        self.num_classes = self.class.iter().max().map_or(0, |m| m + 1);

        // Least fixpoint: terminals are finite, a symbol is finite once all
        // its children are.
        let mut finite: Vec<bool> = self.children.iter().map(|k| k.is_empty()).collect();
        loop {
            let mut changed = false;
            for s in 0..n {
                if !finite[s] && self.children[s].iter().all(|&c| finite[c]) {
                    finite[s] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        self.finite = finite;

        let mut reachable = vec![false; n];
        let mut stack = vec![self.root];
        reachable[self.root] = true;
        while let Some(s) = stack.pop() {
            for &c in &self.children[s] {
                if !reachable[c] {
                    reachable[c] = true;
                    stack.push(c);
                }
            }
        }
        self.reachable = reachable;

        // Breadth-first leftmost non-root address of each class. At a fixed
        // depth only the leftmost address carrying a given symbol can lead to
        // leftmost descendants, so one address per symbol is kept.
        let mut base = vec![None; self.num_classes];
        let mut frontier = vec![(BallAddress::root(), self.root)];
        for _ in 0..=n {
            let mut next: Vec<(BallAddress, SymbolId)> = Vec::new();
            let mut seen = vec![false; n];
            for (a, s) in &frontier {
                for (i, &c) in self.children[*s].iter().enumerate() {
                    if !seen[c] {
                        seen[c] = true;
                        next.push((a.child(i as u8), c));
                    }
                }
            }
            for (a, s) in &next {
                let k = self.class[*s];
                if base[k].is_none() {
                    base[k] = Some(a.clone());
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        self.class_base = base;
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbol_name(&self, s: SymbolId) -> &str {
        &self.symbols[s]
    }

    pub fn symbol_names(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol_id(&self, name: &str) -> Result<SymbolId> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn root_symbol(&self) -> SymbolId {
        self.root
    }

    pub fn children_of_symbol(&self, s: SymbolId) -> &[SymbolId] {
        &self.children[s]
    }

    pub fn is_terminal_symbol(&self, s: SymbolId) -> bool {
        self.children[s].is_empty()
    }

    pub fn label(&self, s: SymbolId) -> Option<&str> {
        self.labels.as_ref().map(|l| l[s].as_str())
    }

    pub fn has_labels(&self) -> bool {
        self.labels.is_some()
    }

    pub fn is_reachable(&self, s: SymbolId) -> bool {
        self.reachable[s]
    }

    /// Symbols that occur at some non-root address, in declaration order.
    pub fn ball_symbols(&self) -> Vec<SymbolId> {
        let mut seen = vec![false; self.symbols.len()];
        for s in 0..self.symbols.len() {
            if self.reachable[s] {
                for &c in &self.children[s] {
                    seen[c] = true;
                }
            }
        }
        (0..self.symbols.len()).filter(|&s| seen[s]).collect()
    }

    pub fn class_of(&self, s: SymbolId) -> ClassId {
        self.class[s]
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Symbol name to class id.
    pub fn type_classes(&self) -> BTreeMap<String, ClassId> {
        self.symbols.iter().cloned().zip(self.class.iter().copied()).collect()
    }

    /// The breadth-first leftmost proper ball of a class, if the class occurs.
    pub fn class_base(&self, k: ClassId) -> Option<&BallAddress> {
        self.class_base.get(k).and_then(|b| b.as_ref())
    }

    pub fn symbol_is_finite(&self, s: SymbolId) -> bool {
        self.finite[s]
    }

    pub fn is_finite_type(&self, symbol: &str) -> Result<bool> {
        Ok(self.finite[self.symbol_id(symbol)?])
    }

    /// Whether any proper ball is finite.
    pub fn has_finite_balls(&self) -> bool {
        self.ball_symbols().into_iter().any(|s| self.finite[s])
    }

    /// Symbol at an address, or `None` if the address leaves the tree.
    pub fn symbol_at(&self, a: &BallAddress) -> Option<SymbolId> {
        let mut s = self.root;
        for &i in a.indices() {
            s = *self.children[s].get(i as usize)?;
        }
        Some(s)
    }

    pub fn check_address(&self, a: &BallAddress) -> Result<SymbolId> {
        self.symbol_at(a).ok_or_else(|| Error::InvalidAddress(a.to_string()))
    }

    /// Symbol at an address already known to be valid.
    pub fn sym(&self, a: &BallAddress) -> SymbolId {
        self.symbol_at(a).expect("address outside the tree")
    }

    pub fn class_at(&self, a: &BallAddress) -> ClassId {
        self.class[self.sym(a)]
    }

    pub fn num_children(&self, a: &BallAddress) -> usize {
        self.children[self.sym(a)].len()
    }

    pub fn children(&self, a: &BallAddress) -> Vec<BallAddress> {
        (0..self.num_children(a)).map(|i| a.child(i as u8)).collect()
    }

    pub fn is_finite_ball(&self, a: &BallAddress) -> bool {
        self.finite[self.sym(a)]
    }

    /// Number of proper balls strictly containing `a`.
    pub fn ball_depth(&self, a: &BallAddress) -> Result<usize> {
        self.check_address(a)?;
        if a.is_root() {
            return Err(Error::RootBall);
        }
        Ok(a.len() - 1)
    }

    /// All depth-zero proper balls.
    pub fn minimal_ball_partition(&self) -> Result<Partition> {
        let k = self.children[self.root].len();
        if k == 0 {
            return Err(Error::TerminalRoot);
        }
        Ok(Partition { cells: (0..k).map(|i| BallAddress::from_indices(vec![i as u8])).collect() })
    }

    /// Coarsest common refinement of two partitions.
    pub fn refine(&self, p1: &Partition, p2: &Partition) -> Partition {
        let mut cells = Vec::new();
        for a in &p1.cells {
            for b in &p2.cells {
                if a.contains(b) {
                    cells.push(b.clone());
                } else if b.contains(a) {
                    cells.push(a.clone());
                }
            }
        }
        cells.sort();
        cells.dedup();
        Partition { cells }
    }

    /// Length of the common prefix, or `None` when one ball contains the
    /// other (the distance between the balls is then zero).
    pub fn distance_exponent(&self, a1: &BallAddress, a2: &BallAddress) -> Option<usize> {
        if a1.comparable(a2) {
            None
        } else {
            Some(a1.common_prefix_len(a2))
        }
    }

    /// Check that `cells` are pairwise disjoint balls covering exactly the
    /// union of `region` (a list of disjoint balls).
    pub fn check_cover(&self, region: &[BallAddress], cells: &[BallAddress]) -> std::result::Result<(), String> {
        let mut sorted: Vec<&BallAddress> = cells.iter().collect();
        sorted.sort();
        for c in &sorted {
            if self.symbol_at(c).is_none() {
                return Err(format!("invalid address `{c}`"));
            }
        }
        for w in sorted.windows(2) {
            if w[0].contains(w[1]) {
                return Err(format!("`{}` and `{}` overlap", w[0], w[1]));
            }
        }
        let set: BTreeSet<&BallAddress> = sorted.iter().copied().collect();
        let mut used = 0usize;
        for r in region {
            self.cover_below(r, &set, &mut used)?;
        }
        if used != set.len() {
            return Err("some cell lies outside the covered region".to_string());
        }
        Ok(())
    }

    fn cover_below(
        &self,
        a: &BallAddress,
        set: &BTreeSet<&BallAddress>,
        used: &mut usize,
    ) -> std::result::Result<(), String> {
        if set.contains(a) {
            *used += 1;
            return Ok(());
        }
        let below = set.range::<&BallAddress, _>(a..).next().is_some_and(|c| a.strictly_contains(c));
        if !below {
            return Err(format!("ball `{a}` is not covered"));
        }
        for c in self.children(a) {
            self.cover_below(&c, set, used)?;
        }
        Ok(())
    }

    /// Maximal balls of `region \ remove`. Both arguments are lists of
    /// pairwise disjoint balls.
    pub fn clopen_minus(&self, region: &[BallAddress], remove: &[BallAddress]) -> Vec<BallAddress> {
        let mut out = Vec::new();
        for r in region {
            self.minus_below(r, remove, &mut out);
        }
        out.sort();
        out
    }

    fn minus_below(&self, a: &BallAddress, remove: &[BallAddress], out: &mut Vec<BallAddress>) {
        if remove.iter().any(|b| b.contains(a)) {
            return;
        }
        if !remove.iter().any(|b| a.strictly_contains(b)) {
            out.push(a.clone());
            return;
        }
        for c in self.children(a) {
            self.minus_below(&c, remove, out);
        }
    }

    /// Maximal balls of the intersection of two clopen sets.
    pub fn clopen_intersect(&self, a: &[BallAddress], b: &[BallAddress]) -> Vec<BallAddress> {
        let mut out = Vec::new();
        for x in a {
            for y in b {
                if x.contains(y) {
                    out.push(y.clone());
                } else if y.contains(x) {
                    out.push(x.clone());
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Maximal balls of the complement of a set of disjoint balls.
    pub fn complement(&self, balls: &[BallAddress]) -> Vec<BallAddress> {
        self.clopen_minus(&[BallAddress::root()], balls)
    }

    /// Breadth-first leftmost ball of class `k` inside `within` that avoids
    /// every ball in `avoid`. With `proper`, `within` itself is excluded.
    pub fn find_ball(
        &self,
        within: &BallAddress,
        k: ClassId,
        avoid: &[BallAddress],
        proper: bool,
    ) -> Option<BallAddress> {
        self.balls_of_class(within, k, avoid, proper, 1).into_iter().next()
    }

    /// Up to `limit` pairwise distinct balls of class `k` inside `within`
    /// avoiding `avoid`, in breadth-first then left-to-right order.
    pub fn balls_of_class(
        &self,
        within: &BallAddress,
        k: ClassId,
        avoid: &[BallAddress],
        proper: bool,
        limit: usize,
    ) -> Vec<BallAddress> {
        let mut out = Vec::new();
        let Some(s0) = self.symbol_at(within) else { return out };
        if avoid.iter().any(|b| b.contains(within)) {
            return out;
        }
        let max_avoid = avoid.iter().map(|b| b.len()).max().unwrap_or(0);
        let max_len = within.len().max(max_avoid) + 2 * self.symbols.len() + 2;
        let mut frontier = vec![(within.clone(), s0)];
        let mut depth = within.len();
        loop {
            for (a, s) in &frontier {
                let ok = !(proper && a == within) && self.class[*s] == k;
                if ok && !avoid.iter().any(|b| b.comparable(a)) {
                    out.push(a.clone());
                    if out.len() >= limit {
                        return out;
                    }
                }
            }
            if depth >= max_len {
                return out;
            }
            // Free addresses (meeting no avoided ball) with equal symbols have
            // isomorphic subtrees; when collecting a single ball it is enough
            // to keep the leftmost of them.
            let mut next = Vec::new();
            let mut seen = vec![false; self.symbols.len()];
            for (a, s) in &frontier {
                for (i, &c) in self.children[*s].iter().enumerate() {
                    let b = a.child(i as u8);
                    if avoid.iter().any(|x| x.contains(&b)) {
                        continue;
                    }
                    let constrained = avoid.iter().any(|x| b.strictly_contains(x));
                    if !constrained && limit == 1 {
                        if seen[c] {
                            continue;
                        }
                        seen[c] = true;
                    }
                    next.push((b, c));
                }
            }
            if next.is_empty() || next.len() > 200_000 {
                return out;
            }
            frontier = next;
            depth += 1;
        }
    }
}

/// Coarsest partition of the symbols such that equivalent symbols carry the
/// same label and have position-wise equivalent child sequences.
fn refine_classes(children: &[Vec<SymbolId>], labels: Option<&[String]>) -> Vec<ClassId> {
    let n = children.len();
    let mut class: Vec<ClassId> = match labels {
        None => vec![0; n],
        Some(l) => renumber(&(0..n).map(|s| l[s].clone()).collect::<Vec<_>>()),
    };
    let mut count = class.iter().max().map_or(0, |m| m + 1);
    loop {
        let sigs: Vec<(ClassId, Vec<ClassId>)> =
            (0..n).map(|s| (class[s], children[s].iter().map(|&c| class[c]).collect())).collect();
        let next = renumber(&sigs);
        let next_count = next.iter().max().map_or(0, |m| m + 1);
        class = next;
        if next_count == count {
            return class;
        }
        count = next_count;
    }
}

/// Ids by order of first appearance.
fn renumber<T: Ord + Clone>(keys: &[T]) -> Vec<usize> {
    let mut ids: BTreeMap<T, usize> = BTreeMap::new();
    keys.iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k.clone()).or_insert(next)
        })
        .collect()
}

/// A finite partition of the space into disjoint balls.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    cells: Vec<BallAddress>,
}

impl Partition {
    pub fn new(space: &Space, mut cells: Vec<BallAddress>) -> Result<Partition> {
        space.check_cover(&[BallAddress::root()], &cells).map_err(Error::SourcesNotPartition)?;
        cells.sort();
        Ok(Partition { cells })
    }

    pub fn cells(&self) -> &[BallAddress] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn address_round_trip_and_order() {
        let a = addr("0110");
        assert_eq!(a.to_string(), "0110");
        assert!(addr("0") < addr("00"));
        assert!(addr("01") < addr("1"));
        assert!(addr("0").contains(&addr("011")));
        assert!(addr("0").disjoint(&addr("1")));
        assert!("0A".parse::<BallAddress>().is_err());
    }

    #[test]
    fn binary_basics() {
        let s = fixtures::binary();
        assert_eq!(s.num_symbols(), 1);
        assert_eq!(s.num_classes(), 1);
        assert!(!s.is_finite_type("x").unwrap());
        assert_eq!(s.ball_depth(&addr("0")).unwrap(), 0);
        assert_eq!(s.ball_depth(&addr("01")).unwrap(), 1);
        assert_eq!(s.ball_depth(&addr("0110")).unwrap(), 3);
        assert_eq!(s.ball_depth(&addr("")), Err(Error::RootBall));
        assert_eq!(s.minimal_ball_partition().unwrap().cells(), &[addr("0"), addr("1")]);
    }

    #[test]
    fn validation_errors() {
        let undeclared = r#"{"symbols":["x"],"children":{"x":["y"]},"root":"x","terminals":[]}"#;
        assert_eq!(Space::parse(undeclared), Err(Error::UndeclaredSymbol("y".into())));
        let empty = r#"{"symbols":[],"children":{},"root":"x","terminals":[]}"#;
        assert_eq!(Space::parse(empty), Err(Error::EmptySymbols));
        let no_root = r#"{"symbols":["x"],"children":{"x":["x"]},"root":"r","terminals":[]}"#;
        assert!(matches!(Space::parse(no_root), Err(Error::MissingRoot(_))));
        let bad_terminal = r#"{"symbols":["x"],"children":{"x":["x"]},"root":"x","terminals":["x"]}"#;
        assert!(matches!(Space::parse(bad_terminal), Err(Error::TerminalWithChildren(_))));
    }

    #[test]
    fn finiteness() {
        let q = fixtures::qaut();
        assert!(q.is_finite_type("a").unwrap());
        assert!(!q.is_finite_type("x").unwrap());
        assert!(q.is_finite_type("zz").is_err());
        assert!(q.has_finite_balls());
        assert!(!fixtures::binary().has_finite_balls());
    }

    #[test]
    fn refine_examples() {
        let s = fixtures::binary();
        let p = |v: &[&str]| Partition::new(&s, v.iter().map(|x| addr(x)).collect()).unwrap();
        assert_eq!(s.refine(&p(&["0", "1"]), &p(&["0", "1"])), p(&["0", "1"]));
        assert_eq!(s.refine(&p(&["0", "1"]), &p(&["00", "01", "1"])), p(&["00", "01", "1"]));
        assert_eq!(s.refine(&p(&["00", "01", "1"]), &p(&["0", "10", "11"])), p(&["00", "01", "10", "11"]));
    }

    #[test]
    fn distance_examples() {
        let s = fixtures::binary();
        assert_eq!(s.distance_exponent(&addr("010"), &addr("011")), Some(2));
        assert_eq!(s.distance_exponent(&addr("0"), &addr("1")), Some(0));
        assert_eq!(s.distance_exponent(&addr("01"), &addr("0")), None);
    }

    #[test]
    fn partition_validation() {
        let s = fixtures::binary();
        assert!(Partition::new(&s, vec![addr("0"), addr("10")]).is_err());
        assert!(Partition::new(&s, vec![addr("0"), addr("1"), addr("10")]).is_err());
        assert!(Partition::new(&s, vec![addr("")]).is_ok());
    }

    #[test]
    fn set_operations() {
        let s = fixtures::binary();
        assert_eq!(s.complement(&[addr("00")]), vec![addr("01"), addr("1")]);
        assert_eq!(s.clopen_minus(&[addr("0")], &[addr("010")]), vec![addr("00"), addr("011")]);
        assert_eq!(s.clopen_intersect(&[addr("0")], &[addr("01"), addr("1")]), vec![addr("01")]);
    }

    #[test]
    fn class_search() {
        let g = fixtures::golden_mean();
        let one = g.class_at(&addr("1"));
        assert_eq!(g.find_ball(&addr("0"), one, &[], true), Some(addr("01")));
        assert_eq!(g.find_ball(&addr("0"), one, &[addr("01")], true), Some(addr("001")));
        let b = fixtures::binary();
        let found = b.balls_of_class(&addr("1"), 0, &[addr("10")], true, 3);
        assert_eq!(found, vec![addr("11"), addr("110"), addr("111")]);
    }
}
