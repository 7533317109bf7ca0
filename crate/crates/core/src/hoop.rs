//! The abelian hoop group realized as integer 1-chains.
//!
//! With structure group (ℝ,+) the holonomy of a loop is additive over its
//! traversals, so two loops define the same hoop exactly when their
//! signed traversal counts agree segment by segment. A [`Chain`] is that
//! count vector; hoop composition is chain addition.
//!
//! Independence of a hoop family is certified constructively: each member
//! owns an *exclusive segment* that it traverses with coefficient ±1 and
//! that no other member touches. The certificate is what makes coordinate
//! maps surjective and lets decompositions be read off directly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::{Add, Neg, Sub};

use thiserror::Error;

use crate::rational::{self, Rational};
use crate::substrate::{Loop, Path, Scene, SegmentId, Step, SubstrateError, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HoopError {
    #[error("hoops are not independent: {0}")]
    NotIndependent(IndependenceFailure),
    #[error("chain is not in the integer span of the basis (residual {residual})")]
    NotInSpan { residual: String },
    #[error("coefficient for hoop {index} is {value}, not an integer")]
    NonIntegral { index: usize, value: String },
    #[error("hoop set carries no independence certificate")]
    Uncertified,
    #[error(transparent)]
    Substrate(#[from] SubstrateError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndependenceFailure {
    /// The hoop at `index` is the trivial (empty) chain.
    Trivial { index: usize },
    /// The hoop at `index` owns no segment with coefficient ±1 that the
    /// others leave untouched.
    NoExclusiveSegment { index: usize },
}

impl std::fmt::Display for IndependenceFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IndependenceFailure::Trivial { index } => write!(f, "hoop {index} is trivial"),
            IndependenceFailure::NoExclusiveSegment { index } => {
                write!(f, "hoop {index} has no exclusive segment")
            }
        }
    }
}

/// Finite integer combination of segments; zero coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chain(BTreeMap<SegmentId, i64>);

impl Chain {
    pub fn zero() -> Chain {
        Chain(BTreeMap::new())
    }

    pub fn from_map(mut terms: BTreeMap<SegmentId, i64>) -> Chain {
        terms.retain(|_, k| *k != 0);
        Chain(terms)
    }

    pub fn from_terms<S: Into<SegmentId>>(terms: impl IntoIterator<Item = (S, i64)>) -> Chain {
        let mut map = BTreeMap::new();
        for (s, k) in terms {
            *map.entry(s.into()).or_insert(0) += k;
        }
        Chain::from_map(map)
    }

    pub fn get(&self, seg: &SegmentId) -> i64 {
        self.0.get(seg).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SegmentId, &i64)> {
        self.0.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &SegmentId> {
        self.0.keys()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn scale(&self, k: i64) -> Chain {
        Chain::from_map(self.0.iter().map(|(s, c)| (s.clone(), c * k)).collect())
    }

    /// Signed in-minus-out count at each vertex; empty for closed chains.
    pub fn boundary(&self, scene: &Scene) -> Result<BTreeMap<VertexId, i64>, SubstrateError> {
        let mut b: BTreeMap<VertexId, i64> = BTreeMap::new();
        for (s, k) in &self.0 {
            let seg = scene.segment(s)?;
            *b.entry(seg.target.clone()).or_insert(0) += k;
            *b.entry(seg.source.clone()).or_insert(0) -= k;
        }
        b.retain(|_, k| *k != 0);
        Ok(b)
    }

    pub fn to_rational(&self) -> BTreeMap<SegmentId, Rational> {
        self.0.iter().map(|(s, k)| (s.clone(), rational::rat(*k))).collect()
    }
}

impl std::fmt::Display for Chain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.0.iter().map(|(s, k)| format!("{s}:{k:+}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl Add for &Chain {
    type Output = Chain;
    fn add(self, rhs: &Chain) -> Chain {
        let mut out = self.0.clone();
        for (s, k) in &rhs.0 {
            *out.entry(s.clone()).or_insert(0) += k;
        }
        Chain::from_map(out)
    }
}

impl Neg for &Chain {
    type Output = Chain;
    fn neg(self) -> Chain {
        self.scale(-1)
    }
}

impl Sub for &Chain {
    type Output = Chain;
    fn sub(self, rhs: &Chain) -> Chain {
        self + &(-rhs)
    }
}

/// Forward minus reverse traversal count per segment.
pub fn chain_of(path: &Path) -> Chain {
    Chain::from_terms(path.steps().iter().map(|s| (s.segment.clone(), s.direction.sign())))
}

pub fn hoops_equal(l: &Loop, other: &Loop) -> bool {
    chain_of(l.path()) == chain_of(other.path())
}

pub fn hoop_compose(c: &Chain, other: &Chain) -> Chain {
    c + other
}

pub fn hoop_inverse(c: &Chain) -> Chain {
    -c
}

pub fn is_trivial(l: &Loop) -> bool {
    chain_of(l.path()).is_empty()
}

/// One exclusive segment per hoop, with the hoop's coefficient (±1) on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    exclusive: Vec<(SegmentId, i64)>,
}

impl Certificate {
    pub fn exclusive(&self, index: usize) -> (&SegmentId, i64) {
        let (s, k) = &self.exclusive[index];
        (s, *k)
    }

    pub fn len(&self) -> usize {
        self.exclusive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exclusive.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SegmentId, i64)> {
        self.exclusive.iter().map(|(s, k)| (s, *k))
    }
}

/// Finds, for each chain, the lowest-id segment it traverses with
/// coefficient ±1 and that no other chain touches.
///
/// Such segments are automatically distinct across chains, so the
/// assignment is injective.
pub fn check_independent(chains: &[Chain]) -> Result<Certificate, HoopError> {
    let mut usage: BTreeMap<&SegmentId, usize> = BTreeMap::new();
    for c in chains {
        for s in c.support() {
            *usage.entry(s).or_insert(0) += 1;
        }
    }
    let mut exclusive = Vec::with_capacity(chains.len());
    for (index, c) in chains.iter().enumerate() {
        if c.is_empty() {
            return Err(HoopError::NotIndependent(IndependenceFailure::Trivial { index }));
        }
        let found = c.iter().find(|(s, k)| k.abs() == 1 && usage[s] == 1);
        match found {
            Some((s, k)) => exclusive.push((s.clone(), *k)),
            None => {
                return Err(HoopError::NotIndependent(IndependenceFailure::NoExclusiveSegment {
                    index,
                }))
            }
        }
    }
    Ok(Certificate { exclusive })
}

/// A hoop (or, in graph frames, an edge) together with the path that
/// represents it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hoop {
    pub label: String,
    pub chain: Chain,
    pub representative: Option<Path>,
}

impl Hoop {
    pub fn from_loop(label: impl Into<String>, l: &Loop) -> Hoop {
        Hoop { label: label.into(), chain: chain_of(l.path()), representative: Some(l.path().clone()) }
    }

    pub fn from_chain(label: impl Into<String>, chain: Chain) -> Hoop {
        Hoop { label: label.into(), chain, representative: None }
    }
}

/// Ordered hoop family, usually carrying an independence certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoopSet {
    hoops: Vec<Hoop>,
    certificate: Option<Certificate>,
}

impl HoopSet {
    pub fn certify(hoops: Vec<Hoop>) -> Result<HoopSet, HoopError> {
        let chains: Vec<Chain> = hoops.iter().map(|h| h.chain.clone()).collect();
        let certificate = check_independent(&chains)?;
        Ok(HoopSet { hoops, certificate: Some(certificate) })
    }

    /// A family with no certificate; most operations will refuse it.
    pub fn uncertified(hoops: Vec<Hoop>) -> HoopSet {
        HoopSet { hoops, certificate: None }
    }

    pub fn hoops(&self) -> &[Hoop] {
        &self.hoops
    }

    pub fn chains(&self) -> impl Iterator<Item = &Chain> + Clone {
        self.hoops.iter().map(|h| &h.chain)
    }

    pub fn len(&self) -> usize {
        self.hoops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hoops.is_empty()
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    /// Re-expresses every chain and representative against `scene` and
    /// re-certifies.
    pub fn rebase(&self, scene: &Scene) -> HoopSet {
        let hoops: Vec<Hoop> = self
            .hoops
            .iter()
            .map(|h| Hoop {
                label: h.label.clone(),
                chain: scene.resolve_chain(&h.chain),
                representative: h.representative.as_ref().map(|p| scene.resolve_path(p)),
            })
            .collect();
        match self.certificate {
            Some(_) => HoopSet::certify(hoops.clone()).unwrap_or(HoopSet::uncertified(hoops)),
            None => HoopSet::uncertified(hoops),
        }
    }
}

/// Integer coefficients of `target` over a certified basis.
///
/// Each coefficient is read off the basis member's exclusive segment; the
/// residual is then checked to vanish.
pub fn decompose_hoop(target: &Chain, basis: &HoopSet) -> Result<Vec<i64>, HoopError> {
    let cert = basis.certificate().ok_or(HoopError::Uncertified)?;
    let coeffs: Vec<i64> = cert.iter().map(|(s, sign)| target.get(s) * sign).collect();
    let mut residual = target.clone();
    for (n, h) in coeffs.iter().zip(basis.hoops()) {
        residual = &residual - &h.chain.scale(*n);
    }
    if residual.is_empty() {
        Ok(coeffs)
    } else {
        Err(HoopError::NotInSpan { residual: residual.to_string() })
    }
}

/// Like [`decompose_hoop`] for a target with rational coefficients, such as
/// a real linear combination of basis chains. Succeeds only when the
/// combination is integral.
pub fn decompose_combination(
    target: &BTreeMap<SegmentId, Rational>,
    basis: &HoopSet,
) -> Result<Vec<i64>, HoopError> {
    let cert = basis.certificate().ok_or(HoopError::Uncertified)?;
    let zero = rational::rat(0);
    let read: Vec<Rational> = cert
        .iter()
        .map(|(s, sign)| target.get(s).unwrap_or(&zero) * rational::rat(sign))
        .collect();
    let mut residual = target.clone();
    for (a, h) in read.iter().zip(basis.hoops()) {
        for (s, k) in h.chain.iter() {
            let e = residual.entry(s.clone()).or_insert_with(|| zero.clone());
            *e -= a * rational::rat(*k);
        }
    }
    residual.retain(|_, v| *v != zero);
    if !residual.is_empty() {
        let shown: Vec<String> = residual
            .iter()
            .map(|(s, v)| format!("{s}:{}", rational::format_rational(v)))
            .collect();
        return Err(HoopError::NotInSpan { residual: format!("{{{}}}", shown.join(", ")) });
    }
    read.iter()
        .enumerate()
        .map(|(index, a)| {
            rational::to_i64(a).ok_or_else(|| HoopError::NonIntegral {
                index,
                value: rational::format_rational(a),
            })
        })
        .collect()
}

/// Result of [`independent_basis`]: the basis and, for every input, its
/// integer coefficients over the basis.
#[derive(Debug, Clone)]
pub struct BasisDecomposition {
    pub basis: HoopSet,
    pub coefficients: Vec<Vec<i64>>,
}

pub fn independent_basis(scene: &Scene, loops: &[Loop]) -> Result<BasisDecomposition, HoopError> {
    let chains: Vec<Chain> = loops.iter().map(|l| chain_of(&scene.resolve_path(l.path()))).collect();
    independent_basis_of_chains(scene, &chains)
}

/// Spanning forest of a set of segments, grown breadth-first from the
/// lowest-id segment of each component.
#[derive(Debug, Clone)]
pub struct SpanningForest {
    tree: BTreeSet<SegmentId>,
    /// parent segment of each non-root vertex
    parent: BTreeMap<VertexId, SegmentId>,
    depth: BTreeMap<VertexId, usize>,
}

impl SpanningForest {
    pub fn grow(scene: &Scene, support: &BTreeSet<SegmentId>) -> Result<SpanningForest, SubstrateError> {
        let mut incident: BTreeMap<VertexId, Vec<SegmentId>> = BTreeMap::new();
        for s in support {
            let seg = scene.segment(s)?;
            incident.entry(seg.source.clone()).or_default().push(s.clone());
            incident.entry(seg.target.clone()).or_default().push(s.clone());
        }
        for v in incident.values_mut() {
            v.sort();
        }
        let mut tree = BTreeSet::new();
        let mut parent = BTreeMap::new();
        let mut depth: BTreeMap<VertexId, usize> = BTreeMap::new();
        for s in support {
            let root = scene.segment(s)?.source.clone();
            if depth.contains_key(&root) {
                continue;
            }
            depth.insert(root.clone(), 0);
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                let d = depth[&v];
                for e in &incident[&v] {
                    let seg = scene.segment(e)?;
                    let other = if seg.source == v { &seg.target } else { &seg.source };
                    if !depth.contains_key(other) {
                        depth.insert(other.clone(), d + 1);
                        parent.insert(other.clone(), e.clone());
                        tree.insert(e.clone());
                        queue.push_back(other.clone());
                    }
                }
            }
        }
        Ok(SpanningForest { tree, parent, depth })
    }

    pub fn is_tree_segment(&self, s: &SegmentId) -> bool {
        self.tree.contains(s)
    }

    /// Steps from `v` one level up toward its root.
    fn up_step(&self, scene: &Scene, v: &VertexId) -> Result<(Step, VertexId), SubstrateError> {
        let e = &self.parent[v];
        let seg = scene.segment(e)?;
        if &seg.source == v {
            Ok((Step::forward(e.clone()), seg.target.clone()))
        } else {
            Ok((Step::reverse(e.clone()), seg.source.clone()))
        }
    }

    /// Tree path from `from` to `to`; both must lie in one component.
    pub fn tree_path(&self, scene: &Scene, from: &VertexId, to: &VertexId) -> Result<Vec<Step>, SubstrateError> {
        let mut up_from: Vec<Step> = Vec::new();
        let mut down_to: Vec<Step> = Vec::new();
        let (mut a, mut b) = (from.clone(), to.clone());
        while self.depth[&a] > self.depth[&b] {
            let (st, next) = self.up_step(scene, &a)?;
            up_from.push(st);
            a = next;
        }
        while self.depth[&b] > self.depth[&a] {
            let (st, next) = self.up_step(scene, &b)?;
            down_to.push(st);
            b = next;
        }
        while a != b {
            let (sa, na) = self.up_step(scene, &a)?;
            let (sb, nb) = self.up_step(scene, &b)?;
            up_from.push(sa);
            down_to.push(sb);
            a = na;
            b = nb;
        }
        let down = down_to.into_iter().rev().map(|s| Step { segment: s.segment, direction: s.direction.flip() });
        up_from.extend(down);
        Ok(up_from)
    }
}

/// Fundamental-cycle basis of the support of `chains`.
///
/// Every input must be closed (boundary-free); each one then decomposes with
/// its own coefficients on the non-tree segments.
pub fn independent_basis_of_chains(scene: &Scene, chains: &[Chain]) -> Result<BasisDecomposition, HoopError> {
    let chains: Vec<Chain> = chains.iter().map(|c| scene.resolve_chain(c)).collect();
    let support: BTreeSet<SegmentId> = chains.iter().flat_map(|c| c.support().cloned()).collect();
    let forest = SpanningForest::grow(scene, &support)?;
    let mut hoops = Vec::new();
    let mut owners = Vec::new();
    for s in support.iter().filter(|s| !forest.is_tree_segment(s)) {
        let seg = scene.segment(s)?;
        let mut steps = vec![Step::forward(s.clone())];
        steps.extend(forest.tree_path(scene, &seg.target, &seg.source)?);
        let path = Path::new(scene, steps)?;
        let l = Loop::new(path)?;
        hoops.push(Hoop::from_loop(format!("cycle({s})"), &l));
        owners.push(s.clone());
    }
    let basis = HoopSet::certify(hoops)?;
    let coefficients = chains
        .iter()
        .map(|c| owners.iter().map(|s| c.get(s)).collect())
        .collect();
    Ok(BasisDecomposition { basis, coefficients })
}

/// `larger ≥ smaller`: every hoop of `smaller` is an integer combination of
/// hoops of `larger`.
pub fn hoopset_geq(larger: &HoopSet, smaller: &HoopSet) -> bool {
    larger.certificate().is_some() && smaller.chains().all(|c| decompose_hoop(c, larger).is_ok())
}
