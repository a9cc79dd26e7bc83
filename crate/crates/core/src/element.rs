//! Group elements as matched source/target ball partitions with similarity
//! labels, kept in maximal-partition normal form.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simstruct::{SimilarityLabel, Structure};
use crate::space::BallAddress;

/// One piece of a piecewise similarity: `src` is mapped onto `dst` by
/// `label`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Region {
    pub src: BallAddress,
    pub dst: BallAddress,
    pub label: SimilarityLabel,
}

impl Region {
    pub fn new(src: BallAddress, dst: BallAddress, label: SimilarityLabel) -> Region {
        Region { src, dst, label }
    }

    pub fn canonical(src: BallAddress, dst: BallAddress) -> Region {
        Region { src, dst, label: SimilarityLabel::Canonical }
    }
}

/// A group element. Regions are sorted by source; sources and targets each
/// partition the space. Elements returned by [`Structure`] operations are
/// reduced, so derived equality is group equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    regions: Vec<Region>,
}

impl Element {
    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = &BallAddress> {
        self.regions.iter().map(|r| &r.src)
    }

    /// Deepest address length among sources and targets.
    pub fn max_depth(&self) -> usize {
        self.regions.iter().map(|r| r.src.len().max(r.dst.len())).max().unwrap_or(0)
    }
}

/// The restriction of an element to a ball, up to the rigid stabilizer of
/// that ball.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CosetRep {
    pub base: BallAddress,
    pub regions: Vec<Region>,
}

/// Ball-level support status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallStatus {
    Fixed,
    Moved,
    Mixed,
}

/// Parameters for random element generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomParams {
    /// Maximal number of indices added below the region being cut up.
    pub max_depth: usize,
    /// Maximal number of cells in the random source partition.
    pub max_regions: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams { max_depth: 4, max_regions: 6 }
    }
}

/// Index of the region whose source contains `a`, for source-sorted regions.
pub(crate) fn locate(regions: &[Region], a: &BallAddress) -> Option<usize> {
    let i = regions.partition_point(|r| r.src <= *a);
    (i > 0 && regions[i - 1].src.contains(a)).then(|| i - 1)
}

/// Regions whose sources lie strictly below `a`.
pub(crate) fn below<'a>(regions: &'a [Region], a: &BallAddress) -> &'a [Region] {
    let start = regions.partition_point(|r| r.src <= *a);
    let len = regions[start..].iter().take_while(|r| a.strictly_contains(&r.src)).count();
    &regions[start..start + len]
}

impl Structure {
    pub fn identity(&self) -> Element {
        Element { regions: vec![Region::canonical(BallAddress::root(), BallAddress::root())] }
    }

    pub fn is_identity(&self, g: &Element) -> bool {
        *g == self.identity()
    }

    /// Paste similarities into an element. The result is validated but not
    /// reduced.
    pub fn from_regions(&self, mut regions: Vec<Region>) -> Result<Element> {
        let root = [BallAddress::root()];
        let sources: Vec<BallAddress> = regions.iter().map(|r| r.src.clone()).collect();
        self.space().check_cover(&root, &sources).map_err(Error::SourcesNotPartition)?;
        let targets: Vec<BallAddress> = regions.iter().map(|r| r.dst.clone()).collect();
        self.space().check_cover(&root, &targets).map_err(Error::TargetsNotPartition)?;
        for r in &regions {
            if !self.label_valid(r.label, &r.src, &r.dst) {
                return Err(Error::LabelMismatch { src: r.src.to_string(), dst: r.dst.to_string() });
            }
        }
        regions.sort();
        Ok(Element { regions })
    }

    /// `from_regions` followed by `reduce`.
    pub fn element(&self, regions: Vec<Region>) -> Result<Element> {
        Ok(self.reduce(&self.from_regions(regions)?))
    }

    /// Merge complete sibling families until no merge applies. The result's
    /// sources are the maximal partition.
    pub fn reduce(&self, g: &Element) -> Element {
        Element { regions: self.reduce_regions(g.regions.clone(), 0) }
    }

    /// Reduce a region list, never merging above addresses of length `floor`.
    pub fn reduce_regions(&self, mut regions: Vec<Region>, floor: usize) -> Vec<Region> {
        regions.sort();
        loop {
            let mut changed = false;
            let mut out: Vec<Region> = Vec::with_capacity(regions.len());
            let mut i = 0;
            while i < regions.len() {
                let r = &regions[i];
                if r.src.len() > floor && r.src.last() == Some(0) {
                    let parent = r.src.parent().unwrap();
                    let k = self.space().num_children(&parent);
                    let complete = i + k <= regions.len()
                        && (0..k).all(|j| {
                            regions[i + j].src.len() == r.src.len()
                                && regions[i + j].src.last() == Some(j as u8)
                                && parent.contains(&regions[i + j].src)
                        });
                    if complete {
                        let family: Vec<(&BallAddress, SimilarityLabel)> =
                            regions[i..i + k].iter().map(|r| (&r.dst, r.label)).collect();
                        if let Some((dst, label)) = self.merge_family(&parent, &family) {
                            out.push(Region::new(parent, dst, label));
                            i += k;
                            changed = true;
                            continue;
                        }
                    }
                }
                out.push(r.clone());
                i += 1;
            }
            regions = out;
            if !changed {
                return regions;
            }
        }
    }

    /// Compose partial maps: `inner` first, then `outer`. The targets of
    /// `inner` must be covered by the sources of `outer`; the result has the
    /// (possibly refined) sources of `inner`. Not reduced.
    pub fn compose_partial(&self, outer: &[Region], inner: &[Region]) -> Result<Vec<Region>> {
        let mut out = Vec::with_capacity(inner.len().max(outer.len()));
        for r in inner {
            if let Some(i) = locate(outer, &r.dst) {
                let o = &outer[i];
                let (img, lo) = self.transport(o.label, r.dst.suffix_after(&o.src).unwrap());
                out.push(Region::new(r.src.clone(), o.dst.join(&img), self.compose_labels(lo, r.label)));
                continue;
            }
            let pieces = below(outer, &r.dst);
            if pieces.is_empty() {
                return Err(Error::Invariant(format!("ball `{}` is not covered by the outer map", r.dst)));
            }
            let inv = self.invert_label(r.label);
            for o in pieces {
                let w = o.src.suffix_after(&r.dst).unwrap();
                let (u, _) = self.transport(inv, w);
                let (_, lu) = self.transport(r.label, &u);
                out.push(Region::new(r.src.join(&u), o.dst.clone(), self.compose_labels(o.label, lu)));
            }
        }
        out.sort();
        Ok(out)
    }

    /// `g ∘ f`: apply `f` first.
    pub fn compose(&self, g: &Element, f: &Element) -> Element {
        let regions = self.compose_partial(&g.regions, &f.regions).expect("elements cover the space");
        Element { regions: self.reduce_regions(regions, 0) }
    }

    /// Compose a word, rightmost factor applied first.
    pub fn product(&self, factors: &[&Element]) -> Element {
        factors.iter().rev().fold(self.identity(), |acc, f| self.compose(f, &acc))
    }

    pub fn inverse(&self, g: &Element) -> Element {
        let regions =
            g.regions.iter().map(|r| Region::new(r.dst.clone(), r.src.clone(), self.invert_label(r.label))).collect();
        Element { regions: self.reduce_regions(regions, 0) }
    }

    pub fn equals(&self, g: &Element, h: &Element) -> bool {
        self.reduce(g) == self.reduce(h)
    }

    /// Image ball and restricted label of a ball lying inside one region.
    pub fn restrict(&self, g: &Element, a: &BallAddress) -> Result<(BallAddress, SimilarityLabel)> {
        self.space().check_address(a)?;
        match locate(&g.regions, a) {
            Some(i) => {
                let r = &g.regions[i];
                let (img, l) = self.transport(r.label, a.suffix_after(&r.src).unwrap());
                Ok((r.dst.join(&img), l))
            }
            None => Err(Error::InsufficientDepth(a.to_string())),
        }
    }

    pub fn apply(&self, g: &Element, a: &BallAddress) -> Result<BallAddress> {
        self.restrict(g, a).map(|(b, _)| b)
    }

    /// The image of a ball as a list of disjoint balls.
    pub fn image_balls(&self, g: &Element, a: &BallAddress) -> Vec<BallAddress> {
        match self.restrict(g, a) {
            Ok((b, _)) => vec![b],
            Err(_) => below(&g.regions, a).iter().map(|r| r.dst.clone()).collect(),
        }
    }

    /// Image of a clopen set given as disjoint balls.
    pub fn image_clopen(&self, g: &Element, set: &[BallAddress]) -> Vec<BallAddress> {
        let mut out: Vec<BallAddress> = set.iter().flat_map(|a| self.image_balls(g, a)).collect();
        out.sort();
        out
    }

    /// How `g` moves the points of ball `a`.
    pub fn ball_status(&self, g: &Element, a: &BallAddress) -> BallStatus {
        if let Ok((img, l)) = self.restrict(g, a) {
            if img.disjoint(a) {
                return BallStatus::Moved;
            }
            if img != *a {
                // A similarity of a ball into a comparable ball has a fixed point.
                return BallStatus::Mixed;
            }
            if self.is_identity_label(l) {
                return BallStatus::Fixed;
            }
            return if self.label_fixes_a_point(l) { BallStatus::Mixed } else { BallStatus::Moved };
        }
        let mut seen: Option<BallStatus> = None;
        for c in self.space().children(a) {
            let s = self.ball_status(g, &c);
            match seen {
                None => seen = Some(s),
                Some(t) if t != s => return BallStatus::Mixed,
                _ => {}
            }
        }
        seen.unwrap_or(BallStatus::Fixed)
    }

    /// Status of every ball at address length `depth` (and of shallower
    /// terminal balls).
    pub fn support(&self, g: &Element, depth: usize) -> BTreeMap<BallAddress, BallStatus> {
        let mut out = BTreeMap::new();
        let mut frontier = vec![BallAddress::root()];
        while let Some(a) = frontier.pop() {
            if a.len() == depth || self.space().num_children(&a) == 0 {
                out.insert(a.clone(), self.ball_status(g, &a));
            } else {
                frontier.extend(self.space().children(&a));
            }
        }
        out
    }

    /// Whether only finitely many points move. Canonical structures only.
    pub fn has_finite_support(&self, g: &Element) -> Result<bool> {
        if self.is_decorated() {
            return Err(Error::Unsupported("finite-support detection for decorated structures".into()));
        }
        Ok(g.regions.iter().all(|r| r.src == r.dst || self.space().is_finite_ball(&r.src)))
    }

    /// `h⁻¹ g h`.
    pub fn conjugate(&self, g: &Element, h: &Element) -> Element {
        self.product(&[&self.inverse(h), g, h])
    }

    /// `g⁻¹ h⁻¹ g h`.
    pub fn commutator(&self, g: &Element, h: &Element) -> Element {
        self.product(&[&self.inverse(g), &self.inverse(h), g, h])
    }

    /// The reduced restriction of `g` to the ball `b`.
    pub fn restrict_coset(&self, g: &Element, b: &BallAddress) -> Result<CosetRep> {
        if b.is_root() {
            return Err(Error::RootBall);
        }
        let regions = match self.restrict(g, b) {
            Ok((img, l)) => vec![Region::new(b.clone(), img, l)],
            Err(Error::InsufficientDepth(_)) => self.reduce_regions(below(&g.regions, b).to_vec(), b.len()),
            Err(e) => return Err(e),
        };
        Ok(CosetRep { base: b.clone(), regions })
    }

    pub fn coset_equals(&self, r1: &CosetRep, r2: &CosetRep) -> bool {
        r1 == r2
    }

    /// Whether `g` is the identity on every ball of `set`.
    pub fn fixes_clopen(&self, g: &Element, set: &[BallAddress]) -> bool {
        set.iter().all(|b| self.ball_status(g, b) == BallStatus::Fixed)
    }

    /// Random partition of the clopen set `region` into at most `cells`
    /// balls, splitting at most `max_depth` levels below the region.
    pub fn random_partition<R: Rng + ?Sized>(
        &self,
        region: &[BallAddress],
        rng: &mut R,
        max_depth: usize,
        cells: usize,
    ) -> Vec<BallAddress> {
        let limit = region.iter().map(|b| b.len()).max().unwrap_or(0) + max_depth;
        let mut out: Vec<BallAddress> = region.to_vec();
        while out.len() < cells {
            let splittable: Vec<usize> =
                (0..out.len()).filter(|&i| out[i].len() < limit && self.space().num_children(&out[i]) > 0).collect();
            let Some(&i) = splittable.choose(rng) else { break };
            let a = out.swap_remove(i);
            out.extend(self.space().children(&a));
        }
        out.sort();
        out
    }

    /// A random element supported in the clopen set `region`.
    pub fn random_element_on<R: Rng + ?Sized>(
        &self,
        region: &[BallAddress],
        rng: &mut R,
        params: RandomParams,
    ) -> Element {
        let want = rng.gen_range(1..=params.max_regions.max(1));
        let sources = self.random_partition(region, rng, params.max_depth, want);
        let profile = |cells: &[BallAddress]| {
            let mut v: Vec<usize> = cells.iter().map(|a| self.space().class_at(a)).collect();
            v.sort_unstable();
            v
        };
        let wanted = profile(&sources);
        let mut targets = None;
        for _ in 0..200 {
            let t = self.random_partition(region, rng, params.max_depth, sources.len());
            if profile(&t) == wanted {
                targets = Some(t);
                break;
            }
        }
        let targets = targets.unwrap_or_else(|| sources.clone());
        let mut by_class: BTreeMap<usize, Vec<BallAddress>> = BTreeMap::new();
        for t in targets {
            by_class.entry(self.space().class_at(&t)).or_default().push(t);
        }
        for v in by_class.values_mut() {
            v.shuffle(rng);
        }
        let mut regions = Vec::with_capacity(sources.len());
        for s in sources {
            let k = self.space().class_at(&s);
            let dst = by_class.get_mut(&k).and_then(|v| v.pop()).expect("class profiles match");
            let labels = self.labels_for_class(k);
            let label = *labels.choose(rng).unwrap();
            regions.push(Region::new(s, dst, label));
        }
        for c in self.space().complement(region) {
            regions.push(Region::canonical(c.clone(), c));
        }
        self.element(regions).expect("random regions form an element")
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, params: RandomParams) -> Element {
        self.random_element_on(&[BallAddress::root()], rng, params)
    }

    /// A random non-identity element.
    pub fn random_nontrivial<R: Rng + ?Sized>(&self, rng: &mut R, params: RandomParams) -> Element {
        loop {
            let g = self.random_element(rng, params);
            if !self.is_identity(&g) {
                return g;
            }
        }
    }

    /// Split randomly chosen regions into their children, `splits` times.
    /// The result describes the same element with a finer partition.
    pub fn refinement_noise<R: Rng + ?Sized>(&self, g: &Element, rng: &mut R, splits: usize) -> Element {
        let mut regions = g.regions.clone();
        for _ in 0..splits {
            let candidates: Vec<usize> =
                (0..regions.len()).filter(|&i| self.space().num_children(&regions[i].src) > 0).collect();
            let Some(&i) = candidates.choose(rng) else { break };
            let r = regions.swap_remove(i);
            for c in 0..self.space().num_children(&r.src) {
                let (s, t, l) = self.restrict_label(r.label, &r.src, &r.dst, c as u8);
                regions.push(Region::new(s, t, l));
            }
        }
        regions.sort();
        Element { regions }
    }
}

/// On-disk element format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementDoc {
    #[serde(default)]
    pub space: String,
    pub regions: Vec<RegionDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionDoc {
    pub src: BallAddress,
    pub dst: BallAddress,
    pub label: LabelDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelDoc {
    Named(String),
    State { state: String },
}

impl Structure {
    pub fn label_to_doc(&self, l: SimilarityLabel) -> LabelDoc {
        match l {
            SimilarityLabel::Canonical => LabelDoc::Named("canonical".into()),
            SimilarityLabel::State(_) => LabelDoc::State { state: self.label_name(l) },
        }
    }

    pub fn label_from_doc(&self, l: &LabelDoc) -> Result<SimilarityLabel> {
        match l {
            LabelDoc::Named(s) if s == "canonical" => Ok(SimilarityLabel::Canonical),
            LabelDoc::Named(s) => Err(Error::Parse(format!("unknown label `{s}`"))),
            LabelDoc::State { state } => self.state_label(state),
        }
    }

    pub fn regions_to_doc(&self, regions: &[Region]) -> Vec<RegionDoc> {
        regions
            .iter()
            .map(|r| RegionDoc { src: r.src.clone(), dst: r.dst.clone(), label: self.label_to_doc(r.label) })
            .collect()
    }

    pub fn regions_from_doc(&self, docs: &[RegionDoc]) -> Result<Vec<Region>> {
        docs.iter()
            .map(|d| {
                self.space().check_address(&d.src)?;
                self.space().check_address(&d.dst)?;
                Ok(Region::new(d.src.clone(), d.dst.clone(), self.label_from_doc(&d.label)?))
            })
            .collect()
    }

    pub fn element_to_doc(&self, g: &Element) -> ElementDoc {
        ElementDoc { space: self.space().name().to_string(), regions: self.regions_to_doc(&g.regions) }
    }

    /// Read an element document; the result is validated but left as given.
    pub fn element_from_doc(&self, doc: &ElementDoc) -> Result<Element> {
        if !doc.space.is_empty() && !self.space().name().is_empty() && doc.space != self.space().name() {
            return Err(Error::Parse(format!(
                "element belongs to space `{}`, not `{}`",
                doc.space,
                self.space().name()
            )));
        }
        self.from_regions(self.regions_from_doc(&doc.regions)?)
    }

    pub fn element_to_json(&self, g: &Element) -> String {
        serde_json::to_string_pretty(&self.element_to_doc(g)).expect("element serializes")
    }

    pub fn element_from_json(&self, text: &str) -> Result<Element> {
        let doc: ElementDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        self.element_from_doc(&doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::space::addr;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn binary() -> Structure {
        Structure::canonical(fixtures::binary())
    }

    fn el(st: &Structure, pairs: &[(&str, &str)]) -> Element {
        st.element(pairs.iter().map(|(s, t)| Region::canonical(addr(s), addr(t))).collect()).unwrap()
    }

    #[test]
    fn module_examples() {
        let st = binary();
        let s = el(&st, &[("0", "1"), ("1", "0")]);
        let g0 = el(&st, &[("00", "0"), ("01", "10"), ("1", "11")]);
        assert_eq!(g0.len(), 3);
        assert!(st
            .from_regions(vec![Region::canonical(addr("0"), addr("1")), Region::canonical(addr("1"), addr("10"))])
            .is_err());
        assert_eq!(st.compose(&g0, &st.inverse(&g0)), st.identity());
        assert_eq!(st.compose(&g0, &g0), el(&st, &[("000", "0"), ("001", "10"), ("01", "110"), ("1", "111")]));
        assert_eq!(st.compose(&s, &s), st.identity());
        assert_eq!(st.inverse(&s), s);
        assert_eq!(st.inverse(&g0), el(&st, &[("0", "00"), ("10", "01"), ("11", "1")]));
        assert_eq!(st.inverse(&st.identity()), st.identity());
        assert_eq!(el(&st, &[("00", "00"), ("01", "01"), ("1", "1")]), st.identity());
        assert_eq!(st.apply(&g0, &addr("00")).unwrap(), addr("0"));
        assert_eq!(st.apply(&g0, &addr("011")).unwrap(), addr("101"));
        assert_eq!(st.apply(&g0, &addr("0")), Err(Error::InsufficientDepth("0".into())));
        assert!(!st.equals(&g0, &s));
    }

    #[test]
    fn refinement_noise_reduces_back() {
        let st = binary();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let g = st.random_element(&mut rng, RandomParams::default());
            let noisy = st.refinement_noise(&g, &mut rng, 5);
            assert_eq!(st.reduce(&noisy), g);
        }
    }

    #[test]
    fn support_examples() {
        let st = binary();
        let s = el(&st, &[("0", "1"), ("1", "0")]);
        let sup = st.support(&s, 1);
        assert!(sup.values().all(|&v| v == BallStatus::Moved));
        assert_eq!(sup.len(), 2);
        assert!(!st.has_finite_support(&s).unwrap());
        assert!(st.support(&st.identity(), 3).values().all(|&v| v == BallStatus::Fixed));
        let g0 = el(&st, &[("00", "0"), ("01", "10"), ("1", "11")]);
        assert_eq!(st.ball_status(&g0, &addr("00")), BallStatus::Mixed);
        assert_eq!(st.ball_status(&g0, &addr("001")), BallStatus::Moved);
    }

    #[test]
    fn cosets() {
        let st = binary();
        let s = el(&st, &[("0", "1"), ("1", "0")]);
        let g0 = el(&st, &[("00", "0"), ("01", "10"), ("1", "11")]);
        let id = st.restrict_coset(&st.identity(), &addr("0")).unwrap();
        assert_eq!(id.regions, vec![Region::canonical(addr("0"), addr("0"))]);
        let a = st.restrict_coset(&g0, &addr("0")).unwrap();
        let b = st.restrict_coset(&s, &addr("0")).unwrap();
        assert!(!st.coset_equals(&a, &b));
        assert_eq!(st.restrict_coset(&g0, &addr("")), Err(Error::RootBall));
    }

    #[test]
    fn decorated_group_laws() {
        let st = Structure::decorated(fixtures::binary(), fixtures::klein_four()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let f = st.random_element(&mut rng, RandomParams::default());
            let g = st.random_element(&mut rng, RandomParams::default());
            let h = st.random_element(&mut rng, RandomParams::default());
            assert_eq!(st.compose(&st.compose(&f, &g), &h), st.compose(&f, &st.compose(&g, &h)));
            assert_eq!(st.compose(&g, &st.inverse(&g)), st.identity());
            let noisy = st.refinement_noise(&g, &mut rng, 4);
            assert_eq!(st.reduce(&noisy), g);
        }
    }

    #[test]
    fn element_json_round_trip() {
        let st = Structure::decorated(fixtures::binary(), fixtures::klein_four()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let g = st.random_element(&mut rng, RandomParams::default());
            let back = st.element_from_json(&st.element_to_json(&g)).unwrap();
            assert_eq!(back, g);
        }
    }
}
