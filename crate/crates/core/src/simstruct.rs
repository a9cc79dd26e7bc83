//! Similarity structures: which balls are similar, and how a similarity acts
//! on addresses below its source.
//!
//! Two flavors exist. `Canonical` is the unique order-preserving similarity
//! between type-equal balls. `State(q)` decorates it with an element of a
//! finite self-similar group given by a Mealy automaton on a uniform d-ary
//! space.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{BallAddress, ClassId, Space};

pub type StateId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SimilarityLabel {
    Canonical,
    /// Never the identity state; that one is normalized to `Canonical`.
    State(StateId),
}

/// On-disk automaton format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonDoc {
    pub degree: usize,
    pub states: Vec<String>,
    pub identity: String,
    pub perm: BTreeMap<String, Vec<usize>>,
    pub section: BTreeMap<String, Vec<String>>,
    pub product: BTreeMap<String, BTreeMap<String, String>>,
    pub inverse: BTreeMap<String, String>,
}

/// A finite self-similar group presented by its multiplication table, root
/// permutations and sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAutomaton {
    degree: usize,
    states: Vec<String>,
    identity: StateId,
    perm: Vec<Vec<u8>>,
    section: Vec<Vec<StateId>>,
    product: Vec<Vec<StateId>>,
    inverse: Vec<StateId>,
    by_action: HashMap<(Vec<u8>, Vec<StateId>), StateId>,
    fixes_a_point: Vec<bool>,
}

impl GroupAutomaton {
    pub fn parse(text: &str) -> Result<GroupAutomaton> {
        let doc: AutomatonDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        GroupAutomaton::from_doc(&doc)
    }

    /// Build and validate: group axioms, wreath recursion and faithfulness
    /// are all checked exhaustively.
    pub fn from_doc(doc: &AutomatonDoc) -> Result<GroupAutomaton> {
        let bad = |m: String| Error::Automaton(m);
        let n = doc.states.len();
        let d = doc.degree;
        if n == 0 {
            return Err(bad("no states".into()));
        }
        if d == 0 || d > 36 {
            return Err(bad(format!("degree {d} out of range")));
        }
        let mut idx = HashMap::new();
        for (i, s) in doc.states.iter().enumerate() {
            if idx.insert(s.as_str(), i).is_some() {
                return Err(bad(format!("duplicate state `{s}`")));
            }
        }
        let id = |s: &str| idx.get(s).copied().ok_or_else(|| bad(format!("unknown state `{s}`")));
        let identity = id(&doc.identity)?;
        let mut perm = vec![Vec::new(); n];
        let mut section = vec![Vec::new(); n];
        let mut product = vec![vec![0; n]; n];
        let mut inverse = vec![0; n];
        for (q, name) in doc.states.iter().enumerate() {
            let p = doc.perm.get(name).ok_or_else(|| bad(format!("missing perm for `{name}`")))?;
            let mut sorted = p.clone();
            sorted.sort_unstable();
            if sorted != (0..d).collect::<Vec<_>>() {
                return Err(bad(format!("perm of `{name}` is not a permutation of 0..{d}")));
            }
            perm[q] = p.iter().map(|&x| x as u8).collect();
            let s = doc.section.get(name).ok_or_else(|| bad(format!("missing sections for `{name}`")))?;
            if s.len() != d {
                return Err(bad(format!("`{name}` needs {d} sections")));
            }
            section[q] = s.iter().map(|x| id(x)).collect::<Result<_>>()?;
            let row = doc.product.get(name).ok_or_else(|| bad(format!("missing product row `{name}`")))?;
            for (r, other) in doc.states.iter().enumerate() {
                let v = row.get(other).ok_or_else(|| bad(format!("missing product {name}*{other}")))?;
                product[q][r] = id(v)?;
            }
            inverse[q] = id(doc.inverse.get(name).ok_or_else(|| bad(format!("missing inverse of `{name}`")))?)?;
        }
        let e = identity;
        if perm[e].iter().enumerate().any(|(i, &x)| i != x as usize) || section[e].iter().any(|&x| x != e) {
            return Err(bad("identity state must act trivially".into()));
        }
        for p in 0..n {
            if product[e][p] != p || product[p][e] != p {
                return Err(bad(format!("identity law fails for `{}`", doc.states[p])));
            }
            if product[p][inverse[p]] != e || product[inverse[p]][p] != e {
                return Err(bad(format!("inverse law fails for `{}`", doc.states[p])));
            }
            for q in 0..n {
                for r in 0..n {
                    if product[product[p][q]][r] != product[p][product[q][r]] {
                        return Err(bad("product is not associative".into()));
                    }
                }
                let pq = product[p][q];
                for u in 0..d {
                    let qu = perm[q][u] as usize;
                    if perm[pq][u] as usize != perm[p][qu] as usize {
                        return Err(bad(format!(
                            "root permutation of {}*{} is not the composite",
                            doc.states[p], doc.states[q]
                        )));
                    }
                    if section[pq][u] != product[section[p][qu]][section[q][u]] {
                        return Err(bad(format!(
                            "wreath recursion fails for {}*{} at letter {u}",
                            doc.states[p], doc.states[q]
                        )));
                    }
                }
            }
        }
        // Faithfulness: states acting identically on the tree are bisimilar.
        let keys: Vec<(Vec<u8>, usize)> = (0..n).map(|q| (perm[q].clone(), 0)).collect();
        let mut class = first_appearance(&keys);
        loop {
            let sig: Vec<(usize, Vec<usize>)> =
                (0..n).map(|q| (class[q], section[q].iter().map(|&s| class[s]).collect())).collect();
            let next = first_appearance(&sig);
            if next == class {
                break;
            }
            class = next;
        }
        for p in 0..n {
            for q in p + 1..n {
                if class[p] == class[q] {
                    return Err(bad(format!("states `{}` and `{}` act identically", doc.states[p], doc.states[q])));
                }
            }
        }
        let by_action = (0..n).map(|q| ((perm[q].clone(), section[q].clone()), q)).collect();
        // A state fixes some end iff an infinite path of fixed letters exists
        // (greatest fixpoint).
        let mut fixes = vec![true; n];
        loop {
            let next: Vec<bool> =
                (0..n).map(|q| q == e || (0..d).any(|u| perm[q][u] as usize == u && fixes[section[q][u]])).collect();
            if next == fixes {
                break;
            }
            fixes = next;
        }
        Ok(GroupAutomaton {
            degree: d,
            states: doc.states.clone(),
            identity,
            perm,
            section,
            product,
            inverse,
            by_action,
            fixes_a_point: fixes,
        })
    }

    pub fn to_doc(&self) -> AutomatonDoc {
        let name = |q: StateId| self.states[q].clone();
        let n = self.states.len();
        AutomatonDoc {
            degree: self.degree,
            states: self.states.clone(),
            identity: name(self.identity),
            perm: (0..n).map(|q| (name(q), self.perm[q].iter().map(|&x| x as usize).collect())).collect(),
            section: (0..n).map(|q| (name(q), self.section[q].iter().map(|&s| name(s)).collect())).collect(),
            product: (0..n).map(|p| (name(p), (0..n).map(|q| (name(q), name(self.product[p][q]))).collect())).collect(),
            inverse: (0..n).map(|q| (name(q), name(self.inverse[q]))).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn identity(&self) -> StateId {
        self.identity
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q]
    }

    pub fn state_id(&self, name: &str) -> Result<StateId> {
        self.states.iter().position(|s| s == name).ok_or_else(|| Error::Automaton(format!("unknown state `{name}`")))
    }

    pub fn perm(&self, q: StateId, u: u8) -> u8 {
        self.perm[q][u as usize]
    }

    pub fn section(&self, q: StateId, u: u8) -> StateId {
        self.section[q][u as usize]
    }

    pub fn product(&self, p: StateId, q: StateId) -> StateId {
        self.product[p][q]
    }

    pub fn inverse(&self, q: StateId) -> StateId {
        self.inverse[q]
    }

    /// The state with the given root permutation and sections, if any.
    pub fn lookup(&self, perm: &[u8], sections: &[StateId]) -> Option<StateId> {
        self.by_action.get(&(perm.to_vec(), sections.to_vec())).copied()
    }

    pub fn fixes_a_point(&self, q: StateId) -> bool {
        self.fixes_a_point[q]
    }
}

fn first_appearance<T: Ord + Clone>(keys: &[T]) -> Vec<usize> {
    let mut ids = BTreeMap::new();
    keys.iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k.clone()).or_insert(next)
        })
        .collect()
}

/// A space together with its similarity structure. All group operations go
/// through this context.
#[derive(Debug, Clone)]
pub struct Structure {
    space: Arc<Space>,
    automaton: Option<Arc<GroupAutomaton>>,
    uniform: Option<ClassId>,
}

impl Structure {
    /// The canonical structure: one similarity between any two type-equal
    /// balls.
    pub fn canonical(space: Space) -> Structure {
        Structure { space: Arc::new(space), automaton: None, uniform: None }
    }

    /// Decorate a uniform d-ary space with a finite automaton group. Every
    /// non-root ball must share one type class with `degree` children.
    pub fn decorated(space: Space, automaton: GroupAutomaton) -> Result<Structure> {
        let balls = space.ball_symbols();
        let k = space.class_of(*balls.first().ok_or(Error::TerminalRoot)?);
        for s in balls {
            if space.class_of(s) != k || space.children_of_symbol(s).len() != automaton.degree() {
                return Err(Error::Unsupported(format!(
                    "decorations need a uniform {}-ary space; symbol `{}` differs",
                    automaton.degree(),
                    space.symbol_name(s)
                )));
            }
        }
        Ok(Structure { space: Arc::new(space), automaton: Some(Arc::new(automaton)), uniform: Some(k) })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn space_arc(&self) -> Arc<Space> {
        self.space.clone()
    }

    pub fn automaton(&self) -> Option<&GroupAutomaton> {
        self.automaton.as_deref()
    }

    pub fn is_decorated(&self) -> bool {
        self.automaton.is_some()
    }

    /// Whether `Sim(b1, b2)` is non-empty.
    pub fn sim_nonempty(&self, b1: &BallAddress, b2: &BallAddress) -> bool {
        match (self.space.symbol_at(b1), self.space.symbol_at(b2)) {
            (Some(s1), Some(s2)) => self.space.class_of(s1) == self.space.class_of(s2),
            _ => false,
        }
    }

    /// Whether `label` names a similarity from `src` onto `dst`.
    pub fn label_valid(&self, label: SimilarityLabel, src: &BallAddress, dst: &BallAddress) -> bool {
        if !self.sim_nonempty(src, dst) {
            return false;
        }
        match label {
            SimilarityLabel::Canonical => true,
            SimilarityLabel::State(q) => match (&self.automaton, self.uniform) {
                (Some(a), Some(k)) => q < a.num_states() && q != a.identity() && self.space.class_at(src) == k,
                _ => false,
            },
        }
    }

    pub fn all_labels(&self) -> Vec<SimilarityLabel> {
        match &self.automaton {
            None => vec![SimilarityLabel::Canonical],
            Some(a) => (0..a.num_states()).map(|q| self.normalize(q)).collect(),
        }
    }

    /// Labels available between balls of class `k`.
    pub fn labels_for_class(&self, k: ClassId) -> Vec<SimilarityLabel> {
        if self.uniform == Some(k) {
            self.all_labels()
        } else {
            vec![SimilarityLabel::Canonical]
        }
    }

    fn state(&self, l: SimilarityLabel) -> Option<StateId> {
        match l {
            SimilarityLabel::Canonical => self.automaton.as_ref().map(|a| a.identity()),
            SimilarityLabel::State(q) => Some(q),
        }
    }

    fn normalize(&self, q: StateId) -> SimilarityLabel {
        match &self.automaton {
            Some(a) if q != a.identity() => SimilarityLabel::State(q),
            _ => SimilarityLabel::Canonical,
        }
    }

    /// `l1 ∘ l2` (apply `l2` first).
    pub fn compose_labels(&self, l1: SimilarityLabel, l2: SimilarityLabel) -> SimilarityLabel {
        match (l1, l2) {
            (SimilarityLabel::Canonical, l) | (l, SimilarityLabel::Canonical) => l,
            (SimilarityLabel::State(p), SimilarityLabel::State(q)) => {
                let a = self.automaton.as_ref().expect("state label without automaton");
                self.normalize(a.product(p, q))
            }
        }
    }

    pub fn invert_label(&self, l: SimilarityLabel) -> SimilarityLabel {
        match l {
            SimilarityLabel::Canonical => l,
            SimilarityLabel::State(q) => {
                let a = self.automaton.as_ref().expect("state label without automaton");
                self.normalize(a.inverse(q))
            }
        }
    }

    /// Run a label along a suffix: the image suffix and the label restricted
    /// to the ball below the suffix.
    pub fn transport(&self, label: SimilarityLabel, suffix: &[u8]) -> (Vec<u8>, SimilarityLabel) {
        match label {
            SimilarityLabel::Canonical => (suffix.to_vec(), label),
            SimilarityLabel::State(mut q) => {
                let a = self.automaton.as_ref().expect("state label without automaton");
                let mut out = Vec::with_capacity(suffix.len());
                for &u in suffix {
                    out.push(a.perm(q, u));
                    q = a.section(q, u);
                }
                (out, self.normalize(q))
            }
        }
    }

    /// Image suffix of `suffix` under the similarity `label` from `src` to
    /// `dst`.
    pub fn apply_sim(
        &self,
        label: SimilarityLabel,
        src: &BallAddress,
        dst: &BallAddress,
        suffix: &[u8],
    ) -> Result<Vec<u8>> {
        if self.space.symbol_at(&src.join(suffix)).is_none() {
            return Err(Error::InvalidAddress(src.join(suffix).to_string()));
        }
        if !self.label_valid(label, src, dst) {
            return Err(Error::LabelMismatch { src: src.to_string(), dst: dst.to_string() });
        }
        Ok(self.transport(label, suffix).0)
    }

    /// Restriction of a similarity to one child of its source.
    pub fn restrict_label(
        &self,
        label: SimilarityLabel,
        src: &BallAddress,
        dst: &BallAddress,
        child: u8,
    ) -> (BallAddress, BallAddress, SimilarityLabel) {
        let (img, l) = self.transport(label, &[child]);
        (src.child(child), dst.join(&img), l)
    }

    /// If a full family of child similarities (`family[c]` maps child `c` of
    /// `parent`) assembles into one similarity on `parent`, return its target
    /// and label.
    pub fn merge_family(
        &self,
        parent: &BallAddress,
        family: &[(&BallAddress, SimilarityLabel)],
    ) -> Option<(BallAddress, SimilarityLabel)> {
        let first = family.first()?.0;
        let target = first.parent()?;
        let mut perm = Vec::with_capacity(family.len());
        for (dst, _) in family {
            if dst.len() != first.len() || !target.contains(dst) {
                return None;
            }
            perm.push(dst.last()?);
        }
        if self.space.num_children(&target) != family.len() || !self.sim_nonempty(parent, &target) {
            return None;
        }
        match &self.automaton {
            None => {
                let ok = family.iter().all(|(_, l)| *l == SimilarityLabel::Canonical)
                    && perm.iter().enumerate().all(|(i, &p)| i == p as usize);
                ok.then_some((target, SimilarityLabel::Canonical))
            }
            Some(a) => {
                let sections: Vec<StateId> = family.iter().map(|(_, l)| self.state(*l).unwrap()).collect();
                let identity_shape = perm.iter().enumerate().all(|(i, &p)| i == p as usize)
                    && sections.iter().all(|&s| s == a.identity());
                if identity_shape {
                    return Some((target, SimilarityLabel::Canonical));
                }
                if self.uniform != Some(self.space.class_at(parent)) {
                    return None;
                }
                a.lookup(&perm, &sections).map(|q| (target, self.normalize(q)))
            }
        }
    }

    /// Whether the label acts as the identity on suffixes.
    pub fn is_identity_label(&self, l: SimilarityLabel) -> bool {
        l == SimilarityLabel::Canonical
    }

    /// Whether a label with equal source and target fixes some point.
    pub fn label_fixes_a_point(&self, l: SimilarityLabel) -> bool {
        match l {
            SimilarityLabel::Canonical => true,
            SimilarityLabel::State(q) => self.automaton.as_ref().unwrap().fixes_a_point(q),
        }
    }

    pub fn label_name(&self, l: SimilarityLabel) -> String {
        match l {
            SimilarityLabel::Canonical => "canonical".to_string(),
            SimilarityLabel::State(q) => self.automaton.as_ref().unwrap().state_name(q).to_string(),
        }
    }

    pub fn state_label(&self, name: &str) -> Result<SimilarityLabel> {
        let a = self.automaton.as_ref().ok_or_else(|| Error::Unsupported("state labels need an automaton".into()))?;
        Ok(self.normalize(a.state_id(name)?))
    }
}
