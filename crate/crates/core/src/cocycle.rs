//! The zipper cocycle `b(g) = χ_{gZ} − χ_Z` over classes of ball
//! embeddings `[f, B]`, its norm and the permutation action `π`.
//!
//! The zipper set `Z` consists of the classes `[incl_B, B]` of proper balls;
//! the whole space is not a proper ball and is excluded.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Neg};

use serde::{Deserialize, Serialize};

use crate::element::{below, Element, Region, RegionDoc};
use crate::error::{Error, Result};
use crate::simstruct::{SimilarityLabel, Structure};
use crate::space::BallAddress;

/// A class `[f, B]` in canonical form: an embedding of the canonical base
/// ball of `B`'s type class, given as reduced regions partitioning `base`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EmbeddingClass {
    pub base: BallAddress,
    pub regions: Vec<Region>,
}

/// A finitely supported integer vector over embedding classes. Zero
/// coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CocycleVector {
    coeffs: BTreeMap<EmbeddingClass, i64>,
}

impl CocycleVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, class: EmbeddingClass, c: i64) {
        if c == 0 {
            return;
        }
        match self.coeffs.entry(class) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0 {
                    e.remove();
                }
            }
        }
    }

    pub fn coeff(&self, class: &EmbeddingClass) -> i64 {
        self.coeffs.get(class).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Number of classes with non-zero coefficient.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EmbeddingClass, i64)> {
        self.coeffs.iter().map(|(k, &v)| (k, v))
    }

    pub fn norm_sq(&self) -> u64 {
        self.coeffs.values().map(|c| (c * c) as u64).sum()
    }
}

impl Add for CocycleVector {
    type Output = CocycleVector;

    fn add(mut self, rhs: CocycleVector) -> CocycleVector {
        for (k, v) in rhs.coeffs {
            self.add_term(k, v);
        }
        self
    }
}

impl Neg for CocycleVector {
    type Output = CocycleVector;

    fn neg(self) -> CocycleVector {
        CocycleVector { coeffs: self.coeffs.into_iter().map(|(k, v)| (k, -v)).collect() }
    }
}

/// Serialized vector entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorEntryDoc {
    pub class: ClassDoc,
    pub coeff: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDoc {
    pub base: BallAddress,
    pub regions: Vec<RegionDoc>,
}

/// Distinct non-root strict ancestors of a set of cells.
fn strict_ancestors<'a>(cells: impl Iterator<Item = &'a BallAddress>) -> Vec<BallAddress> {
    let mut out = BTreeSet::new();
    for c in cells {
        for a in c.proper_ancestors() {
            if !a.is_root() {
                out.insert(a);
            }
        }
    }
    out.into_iter().collect()
}

impl Structure {
    /// Canonical form of `[f, b]`, where `regions` describe `f` on `b`.
    pub fn class_canonicalize(&self, b: &BallAddress, regions: &[Region]) -> Result<EmbeddingClass> {
        if b.is_root() {
            return Err(Error::RootBall);
        }
        let k = self.space().class_at(b);
        let base = self
            .space()
            .class_base(k)
            .ok_or_else(|| Error::Invariant(format!("type class of `{b}` has no proper ball")))?
            .clone();
        let mut best: Option<EmbeddingClass> = None;
        for l in self.labels_for_class(k) {
            let moved = self.compose_partial(regions, &[Region::new(base.clone(), b.clone(), l)])?;
            let cand = EmbeddingClass { base: base.clone(), regions: self.reduce_regions(moved, base.len()) };
            if best.as_ref().is_none_or(|x| cand < *x) {
                best = Some(cand);
            }
        }
        Ok(best.unwrap())
    }

    /// The inclusion class `[incl_b, b]`.
    pub fn inclusion_class(&self, b: &BallAddress) -> Result<EmbeddingClass> {
        self.class_canonicalize(b, &[Region::canonical(b.clone(), b.clone())])
    }

    /// Balls carrying `gZ ∖ Z` (`plus`) and `Z ∖ gZ` (`minus`).
    pub fn zipper_sets(&self, g: &Element) -> (Vec<BallAddress>, Vec<BallAddress>) {
        let g = self.reduce(g);
        let plus = strict_ancestors(g.regions().iter().map(|r| &r.src));
        let minus = strict_ancestors(g.regions().iter().map(|r| &r.dst));
        (plus, minus)
    }

    pub fn cocycle_vector(&self, g: &Element) -> CocycleVector {
        let g = self.reduce(g);
        let (plus, minus) = self.zipper_sets(&g);
        let mut v = CocycleVector::zero();
        for b in plus {
            let class = self.class_canonicalize(&b, below(g.regions(), &b)).expect("proper ball");
            v.add_term(class, 1);
        }
        for b in minus {
            v.add_term(self.inclusion_class(&b).expect("proper ball"), -1);
        }
        v
    }

    /// `‖b(g)‖² = |gZ △ Z|`.
    pub fn cocycle_norm_sq(&self, g: &Element) -> u64 {
        let (plus, minus) = self.zipper_sets(g);
        (plus.len() + minus.len()) as u64
    }

    /// `π(g)`: `[f, B] ↦ [g∘f, B]`.
    pub fn pi_apply(&self, g: &Element, v: &CocycleVector) -> CocycleVector {
        let mut out = CocycleVector::zero();
        for (class, c) in v.iter() {
            let moved = self.compose_partial(g.regions(), &class.regions).expect("elements cover the space");
            out.add_term(self.class_canonicalize(&class.base, &moved).expect("proper ball"), c);
        }
        out
    }

    /// Exact check of `b(gh) = π(g) b(h) + b(g)`.
    pub fn verify_cocycle_identity(&self, g: &Element, h: &Element) -> bool {
        let lhs = self.cocycle_vector(&self.compose(g, h));
        let rhs = self.pi_apply(g, &self.cocycle_vector(h)) + self.cocycle_vector(g);
        lhs == rhs
    }

    /// Keep the coefficients on the orbit of `[incl_b, b]`, i.e. on classes
    /// whose base has the type of `b`.
    pub fn project_orbit(&self, v: &CocycleVector, b: &BallAddress) -> Result<CocycleVector> {
        if b.is_root() {
            return Err(Error::RootBall);
        }
        self.space().check_address(b)?;
        let k = self.space().class_at(b);
        let mut out = CocycleVector::zero();
        for (class, c) in v.iter() {
            if self.space().class_at(&class.base) == k {
                out.add_term(class.clone(), c);
            }
        }
        Ok(out)
    }

    /// `n` distinct classes in the orbit of `[incl_b, b]`: embeddings of `b`
    /// onto a nested chain of subballs when `b` is infinite, onto disjoint
    /// balls otherwise.
    pub fn orbit_infinite_witness(&self, b: &BallAddress, n: usize) -> Result<Vec<EmbeddingClass>> {
        if b.is_root() {
            return Err(Error::RootBall);
        }
        self.space().check_address(b)?;
        let k = self.space().class_at(b);
        let mut targets = vec![b.clone()];
        while targets.len() < n {
            let next = if self.space().is_finite_ball(b) {
                self.space().find_ball(&BallAddress::root(), k, &targets, true)
            } else {
                self.space().find_ball(targets.last().unwrap(), k, &[], true)
            };
            targets.push(next.ok_or_else(|| Error::Construction(format!("no further ball of the type of `{b}`")))?);
        }
        targets
            .iter()
            .take(n)
            .map(|d| self.class_canonicalize(b, &[Region::new(b.clone(), d.clone(), SimilarityLabel::Canonical)]))
            .collect()
    }

    pub fn vector_to_doc(&self, v: &CocycleVector) -> Vec<VectorEntryDoc> {
        v.iter()
            .map(|(class, coeff)| VectorEntryDoc {
                class: ClassDoc { base: class.base.clone(), regions: self.regions_to_doc(&class.regions) },
                coeff,
            })
            .collect()
    }

    pub fn vector_from_doc(&self, docs: &[VectorEntryDoc]) -> Result<CocycleVector> {
        let mut v = CocycleVector::zero();
        for d in docs {
            let regions = self.regions_from_doc(&d.class.regions)?;
            v.add_term(self.class_canonicalize(&d.class.base, &regions)?, d.coeff);
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::RandomParams;
    use crate::fixtures;
    use crate::space::addr;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn el(st: &Structure, pairs: &[(&str, &str)]) -> Element {
        st.element(pairs.iter().map(|(s, t)| Region::canonical(addr(s), addr(t))).collect()).unwrap()
    }

    #[test]
    fn zipper_examples() {
        let st = Structure::canonical(fixtures::binary());
        let s = el(&st, &[("0", "1"), ("1", "0")]);
        let g0 = el(&st, &[("00", "0"), ("01", "10"), ("1", "11")]);
        assert_eq!(st.zipper_sets(&st.identity()), (vec![], vec![]));
        assert_eq!(st.zipper_sets(&s), (vec![], vec![]));
        assert_eq!(st.zipper_sets(&g0), (vec![addr("0")], vec![addr("1")]));
        assert_eq!(st.cocycle_norm_sq(&g0), 2);
        assert!(st.cocycle_vector(&s).is_zero());
        let v = st.cocycle_vector(&g0);
        assert_eq!(v.len(), 2);
        assert_eq!(v.coeff(&st.inclusion_class(&addr("1")).unwrap()), -1);
        let plus = st.class_canonicalize(&addr("0"), below(g0.regions(), &addr("0"))).unwrap();
        assert_eq!(v.coeff(&plus), 1);
        assert_eq!(st.pi_apply(&g0, &st.cocycle_vector(&st.inverse(&g0))), -st.cocycle_vector(&g0));
        assert!(st.verify_cocycle_identity(&g0, &st.inverse(&g0)));
    }

    #[test]
    fn canonical_base_transport() {
        let st = Structure::canonical(fixtures::binary());
        let c = st.inclusion_class(&addr("1")).unwrap();
        assert_eq!(c.base, addr("0"));
        assert_eq!(c.regions, vec![Region::canonical(addr("0"), addr("1"))]);
        assert_eq!(st.inclusion_class(&addr("0")).unwrap().regions, vec![Region::canonical(addr("0"), addr("0"))]);
    }

    #[test]
    fn decorated_cocycle_identity() {
        let st = Structure::decorated(fixtures::binary(), fixtures::klein_four()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let g = st.random_element(&mut rng, RandomParams::default());
            let h = st.random_element(&mut rng, RandomParams::default());
            assert!(st.verify_cocycle_identity(&g, &h));
            assert_eq!(st.cocycle_vector(&g).norm_sq(), st.cocycle_norm_sq(&g));
        }
    }

    #[test]
    fn orbit_witnesses() {
        let st = Structure::canonical(fixtures::binary());
        let w = st.orbit_infinite_witness(&addr("0"), 10).unwrap();
        assert_eq!(w.iter().collect::<BTreeSet<_>>().len(), 10);
        assert_eq!(st.orbit_infinite_witness(&addr("0"), 1).unwrap(), vec![st.inclusion_class(&addr("0")).unwrap()]);
        let q = Structure::canonical(fixtures::qaut());
        let w = q.orbit_infinite_witness(&addr("1"), 5).unwrap();
        assert_eq!(w.iter().collect::<BTreeSet<_>>().len(), 5);
    }

    #[test]
    fn vector_doc_round_trip() {
        let st = Structure::canonical(fixtures::golden_mean());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let g = st.random_element(&mut rng, RandomParams::default());
            let v = st.cocycle_vector(&g);
            assert_eq!(st.vector_from_doc(&st.vector_to_doc(&v)).unwrap(), v);
        }
    }
}
