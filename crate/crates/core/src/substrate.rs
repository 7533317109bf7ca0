//! Atomic oriented segments and everything built from them.
//!
//! A [`Scene`] is a finite segment complex: segments with distinct endpoints,
//! faces given by per-segment crossing tables, named loops and graphs, and
//! discrete one-forms ([`FieldSample`]) and gauge parameters
//! ([`GaugeFunction`]). Paths are endpoint-chained sequences of signed
//! segment steps.
//!
//! Scenes are plain values. Edits that change the complex, such as
//! [`Scene::refine_segment`], return a new scene and leave the old one
//! untouched. A refined scene remembers which segments it retired
//! (its *lineage*) so that chains and paths recorded against an older scene
//! can be brought forward with [`Scene::resolve_chain`] and
//! [`Scene::resolve_path`].

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gauge::Graph;
use crate::hoop::Chain;
use crate::rational::Rational;
use crate::systems::SystemSpec;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                $name(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

string_id!(
    /// Identifier of an atomic segment.
    SegmentId
);
string_id!(VertexId);
string_id!(FaceId);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubstrateError {
    #[error("unknown segment `{0}`")]
    UnknownSegment(SegmentId),
    #[error("segment `{0}` violates the two-point boundary rule (source = target)")]
    TwoPointBoundary(SegmentId),
    #[error("duplicate segment id `{0}`")]
    DuplicateSegment(SegmentId),
    #[error("duplicate face id `{0}`")]
    DuplicateFace(FaceId),
    #[error("unknown face `{0}`")]
    UnknownFace(FaceId),
    #[error("paths do not chain: step {index} starts at `{found}` but the previous step ends at `{expected}`")]
    Chaining {
        index: usize,
        expected: VertexId,
        found: VertexId,
    },
    #[error("a path needs at least one step")]
    EmptyPath,
    #[error("path from `{source_vertex}` to `{target_vertex}` is not closed")]
    NotClosed {
        source_vertex: VertexId,
        target_vertex: VertexId,
    },
    #[error("malformed step `{0}`")]
    MalformedStep(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub id: SegmentId,
    pub source: VertexId,
    pub target: VertexId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            Direction::Forward => 1,
            Direction::Reverse => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub segment: SegmentId,
    pub direction: Direction,
}

impl Step {
    pub fn forward(seg: impl Into<SegmentId>) -> Step {
        Step { segment: seg.into(), direction: Direction::Forward }
    }

    pub fn reverse(seg: impl Into<SegmentId>) -> Step {
        Step { segment: seg.into(), direction: Direction::Reverse }
    }

    /// Parses `a` (forward) or `-a` (reverse).
    pub fn parse(token: &str) -> Result<Step, SubstrateError> {
        let t = token.trim();
        let (dir, id) = match t.strip_prefix('-') {
            Some(rest) => (Direction::Reverse, rest),
            None => (Direction::Forward, t),
        };
        if id.is_empty() || id.starts_with('-') || id.chars().any(char::is_whitespace) {
            return Err(SubstrateError::MalformedStep(token.to_string()));
        }
        Ok(Step { segment: SegmentId::new(id), direction: dir })
    }

    pub fn token(&self) -> String {
        match self.direction {
            Direction::Forward => self.segment.to_string(),
            Direction::Reverse => format!("-{}", self.segment),
        }
    }
}

/// A nonempty, endpoint-chained sequence of steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    steps: Vec<Step>,
    source: VertexId,
    target: VertexId,
}

impl Path {
    /// Builds a path, checking that consecutive steps chain in `scene`.
    pub fn new(scene: &Scene, steps: Vec<Step>) -> Result<Path, SubstrateError> {
        let first = steps.first().ok_or(SubstrateError::EmptyPath)?;
        let (source, mut cursor) = scene.step_endpoints(first)?;
        for (index, step) in steps.iter().enumerate().skip(1) {
            let (s, t) = scene.step_endpoints(step)?;
            if s != cursor {
                return Err(SubstrateError::Chaining { index, expected: cursor, found: s });
            }
            cursor = t;
        }
        Ok(Path { steps, source, target: cursor })
    }

    /// Parses whitespace- or comma-separated step tokens.
    pub fn parse(scene: &Scene, src: &str) -> Result<Path, SubstrateError> {
        let steps = src
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(Step::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Path::new(scene, steps)
    }

    pub fn single(seg: &Segment, direction: Direction) -> Path {
        let (source, target) = match direction {
            Direction::Forward => (seg.source.clone(), seg.target.clone()),
            Direction::Reverse => (seg.target.clone(), seg.source.clone()),
        };
        Path { steps: vec![Step { segment: seg.id.clone(), direction }], source, target }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn source(&self) -> &VertexId {
        &self.source
    }

    pub fn target(&self) -> &VertexId {
        &self.target
    }

    pub fn is_closed(&self) -> bool {
        self.source == self.target
    }

    pub fn tokens(&self) -> Vec<String> {
        self.steps.iter().map(Step::token).collect()
    }

    /// Cyclic rotation of a closed path; the base point moves to the
    /// source of step `k`.
    pub fn rotate(&self, scene: &Scene, k: usize) -> Result<Path, SubstrateError> {
        let n = self.steps.len();
        let mut steps = self.steps[k % n..].to_vec();
        steps.extend_from_slice(&self.steps[..k % n]);
        Path::new(scene, steps)
    }

    /// Inserts `seg` followed by its reverse before step `at` (a backtrack).
    pub fn with_backtrack(
        &self,
        scene: &Scene,
        at: usize,
        seg: &SegmentId,
        direction: Direction,
    ) -> Result<Path, SubstrateError> {
        let mut steps = self.steps.clone();
        let out = Step { segment: seg.clone(), direction };
        let back = Step { segment: seg.clone(), direction: direction.flip() };
        let at = at.min(steps.len());
        steps.splice(at..at, [out, back]);
        Path::new(scene, steps)
    }

    fn rebuilt(steps: Vec<Step>, source: VertexId, target: VertexId) -> Path {
        Path { steps, source, target }
    }
}

/// Concatenates paths in order (the first path is traversed first).
pub fn compose(paths: &[Path]) -> Result<Path, SubstrateError> {
    let first = paths.first().ok_or(SubstrateError::EmptyPath)?;
    let mut steps = first.steps.clone();
    let mut cursor = first.target.clone();
    let mut index = first.steps.len();
    for p in &paths[1..] {
        if p.source != cursor {
            return Err(SubstrateError::Chaining { index, expected: cursor, found: p.source.clone() });
        }
        steps.extend_from_slice(&p.steps);
        cursor = p.target.clone();
        index += p.steps.len();
    }
    Ok(Path::rebuilt(steps, first.source.clone(), cursor))
}

pub fn reverse(path: &Path) -> Path {
    let steps = path
        .steps
        .iter()
        .rev()
        .map(|s| Step { segment: s.segment.clone(), direction: s.direction.flip() })
        .collect();
    Path::rebuilt(steps, path.target.clone(), path.source.clone())
}

/// A closed path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Loop(Path);

impl Loop {
    pub fn new(path: Path) -> Result<Loop, SubstrateError> {
        if path.is_closed() {
            Ok(Loop(path))
        } else {
            Err(SubstrateError::NotClosed {
                source_vertex: path.source.clone(),
                target_vertex: path.target.clone(),
            })
        }
    }

    pub fn parse(scene: &Scene, src: &str) -> Result<Loop, SubstrateError> {
        Loop::new(Path::parse(scene, src)?)
    }

    pub fn path(&self) -> &Path {
        &self.0
    }

    pub fn base(&self) -> &VertexId {
        self.0.source()
    }

    pub fn reversed(&self) -> Loop {
        Loop(reverse(&self.0))
    }

    /// `other` traversed after `self`; both must share a base point.
    pub fn then(&self, other: &Loop) -> Result<Loop, SubstrateError> {
        Loop::new(compose(&[self.0.clone(), other.0.clone()])?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    AtSource,
    AtTarget,
}

impl End {
    pub fn swap(self) -> End {
        match self {
            End::AtSource => End::AtTarget,
            End::AtTarget => End::AtSource,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Above,
    Below,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Above => Side::Below,
            Side::Below => Side::Above,
        }
    }
}

/// How a segment sits relative to an oriented face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Crossing {
    InClosure,
    Disjoint,
    /// Meets the face only at `end`; the rest of the segment lies on `side`.
    Transversal { end: End, side: Side },
}

impl Crossing {
    /// Classification seen when the segment is traversed in `direction`.
    pub fn along(self, direction: Direction) -> Crossing {
        match (self, direction) {
            (Crossing::Transversal { end, side }, Direction::Reverse) => {
                Crossing::Transversal { end: end.swap(), side }
            }
            (c, _) => c,
        }
    }

    /// Twice the contribution of one forward traversal to ε.
    pub(crate) fn weight(self) -> i64 {
        match self {
            Crossing::Transversal { end: End::AtTarget, side: Side::Above }
            | Crossing::Transversal { end: End::AtSource, side: Side::Below } => 1,
            Crossing::Transversal { end: End::AtTarget, side: Side::Below }
            | Crossing::Transversal { end: End::AtSource, side: Side::Above } => -1,
            Crossing::InClosure | Crossing::Disjoint => 0,
        }
    }
}

/// An oriented face, known only through its crossing table.
///
/// Segments missing from the table are disjoint from the face; `Disjoint`
/// entries are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub id: FaceId,
    crossings: BTreeMap<SegmentId, Crossing>,
}

impl Face {
    pub fn new(id: impl Into<FaceId>) -> Face {
        Face { id: id.into(), crossings: BTreeMap::new() }
    }

    pub fn with(mut self, seg: impl Into<SegmentId>, crossing: Crossing) -> Face {
        self.set(seg.into(), crossing);
        self
    }

    pub fn set(&mut self, seg: SegmentId, crossing: Crossing) {
        if crossing == Crossing::Disjoint {
            self.crossings.remove(&seg);
        } else {
            self.crossings.insert(seg, crossing);
        }
    }

    pub fn crossing(&self, seg: &SegmentId) -> Crossing {
        self.crossings.get(seg).copied().unwrap_or(Crossing::Disjoint)
    }

    pub fn crossings(&self) -> impl Iterator<Item = (&SegmentId, &Crossing)> {
        self.crossings.iter()
    }

    /// The same surface with the opposite orientation: above and below trade places.
    pub fn flipped(&self) -> Face {
        let crossings = self
            .crossings
            .iter()
            .map(|(s, c)| {
                let c = match *c {
                    Crossing::Transversal { end, side } => Crossing::Transversal { end, side: side.flip() },
                    other => other,
                };
                (s.clone(), c)
            })
            .collect();
        Face { id: self.id.clone(), crossings }
    }
}

/// Integrals of a one-form over segments; unmapped segments read 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FieldSample(BTreeMap<SegmentId, Rational>);

impl FieldSample {
    pub fn new() -> Self {
        FieldSample(BTreeMap::new())
    }

    pub fn get(&self, seg: &SegmentId) -> Rational {
        self.0.get(seg).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, seg: SegmentId, value: Rational) {
        if value.is_zero() {
            self.0.remove(&seg);
        } else {
            self.0.insert(seg, value);
        }
    }

    pub fn with(mut self, seg: impl Into<SegmentId>, value: Rational) -> Self {
        self.set(seg.into(), value);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SegmentId, &Rational)> {
        self.0.iter()
    }

    pub fn add(&self, other: &FieldSample) -> FieldSample {
        let mut out = self.clone();
        for (s, v) in &other.0 {
            let nv = out.get(s) + v;
            out.set(s.clone(), nv);
        }
        out
    }
}

/// Gauge parameter: a function on vertices, unmapped vertices read 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GaugeFunction(BTreeMap<VertexId, Rational>);

impl GaugeFunction {
    pub fn new() -> Self {
        GaugeFunction(BTreeMap::new())
    }

    pub fn get(&self, v: &VertexId) -> Rational {
        self.0.get(v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, v: VertexId, value: Rational) {
        if value.is_zero() {
            self.0.remove(&v);
        } else {
            self.0.insert(v, value);
        }
    }

    pub fn with(mut self, v: impl Into<VertexId>, value: Rational) -> Self {
        self.set(v.into(), value);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, &Rational)> {
        self.0.iter()
    }

    pub fn add(&self, other: &GaugeFunction) -> GaugeFunction {
        let mut out = self.clone();
        for (v, x) in &other.0 {
            let nx = out.get(v) + x;
            out.set(v.clone(), nx);
        }
        out
    }
}

/// `f(target) − f(source)` for one segment.
pub fn d_of(scene: &Scene, f: &GaugeFunction, seg: &SegmentId) -> Result<Rational, SubstrateError> {
    let s = scene.segment(seg)?;
    Ok(f.get(&s.target) - f.get(&s.source))
}

/// Record of one segment split: `segment` became `parts[0]` then `parts[1]`
/// through the fresh vertex `midpoint`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub segment: SegmentId,
    pub parts: [SegmentId; 2],
    pub midpoint: VertexId,
}

impl Split {
    fn expand_step(&self, step: &Step) -> Vec<Step> {
        if step.segment != self.segment {
            return vec![step.clone()];
        }
        let [a, b] = &self.parts;
        match step.direction {
            Direction::Forward => vec![Step::forward(a.clone()), Step::forward(b.clone())],
            Direction::Reverse => vec![Step::reverse(b.clone()), Step::reverse(a.clone())],
        }
    }

    pub fn apply_path(&self, path: &Path) -> Path {
        let steps = path.steps.iter().flat_map(|s| self.expand_step(s)).collect();
        Path::rebuilt(steps, path.source.clone(), path.target.clone())
    }

    pub fn apply_chain(&self, chain: &Chain) -> Chain {
        let k = chain.get(&self.segment);
        if k == 0 {
            return chain.clone();
        }
        let mut terms: BTreeMap<SegmentId, i64> =
            chain.iter().filter(|(s, _)| **s != self.segment).map(|(s, k)| (s.clone(), *k)).collect();
        for p in &self.parts {
            *terms.entry(p.clone()).or_insert(0) += k;
        }
        Chain::from_map(terms)
    }

    /// The whole value moves to the first part; the second reads 0.
    pub fn apply_field(&self, field: &FieldSample) -> FieldSample {
        let v = field.get(&self.segment);
        let mut out = field.clone();
        out.0.remove(&self.segment);
        if !v.is_zero() {
            let merged = out.get(&self.parts[0]) + v;
            out.set(self.parts[0].clone(), merged);
        }
        out
    }

    fn apply_face(&self, face: &Face) -> Face {
        let mut out = face.clone();
        let c = out.crossings.remove(&self.segment).unwrap_or(Crossing::Disjoint);
        let [a, b] = &self.parts;
        match c {
            Crossing::Disjoint => {}
            Crossing::InClosure => {
                out.set(a.clone(), Crossing::InClosure);
                out.set(b.clone(), Crossing::InClosure);
            }
            Crossing::Transversal { end: End::AtSource, .. } => out.set(a.clone(), c),
            Crossing::Transversal { end: End::AtTarget, .. } => out.set(b.clone(), c),
        }
        out
    }
}

/// The segment complex together with everything named on it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scene {
    pub(crate) segments: BTreeMap<SegmentId, Segment>,
    pub(crate) faces: BTreeMap<FaceId, Face>,
    pub(crate) loops: BTreeMap<String, Loop>,
    pub(crate) graphs: BTreeMap<String, Graph>,
    pub(crate) fields: BTreeMap<String, FieldSample>,
    pub(crate) gauges: BTreeMap<String, GaugeFunction>,
    pub(crate) systems: BTreeMap<String, SystemSpec>,
    pub(crate) lineage: BTreeMap<SegmentId, Split>,
}

impl Scene {
    pub fn new() -> Scene {
        Scene::default()
    }

    pub fn add_segment(
        &mut self,
        id: impl Into<SegmentId>,
        source: impl Into<VertexId>,
        target: impl Into<VertexId>,
    ) -> Result<(), SubstrateError> {
        let seg = Segment { id: id.into(), source: source.into(), target: target.into() };
        if seg.source == seg.target {
            return Err(SubstrateError::TwoPointBoundary(seg.id));
        }
        if self.segments.contains_key(&seg.id) || self.lineage.contains_key(&seg.id) {
            return Err(SubstrateError::DuplicateSegment(seg.id));
        }
        self.segments.insert(seg.id.clone(), seg);
        Ok(())
    }

    pub fn add_face(&mut self, face: Face) -> Result<(), SubstrateError> {
        if self.faces.contains_key(&face.id) {
            return Err(SubstrateError::DuplicateFace(face.id));
        }
        for (seg, _) in face.crossings() {
            self.segment(seg)?;
        }
        self.faces.insert(face.id.clone(), face);
        Ok(())
    }

    /// Replaces or inserts a face.
    pub fn put_face(&mut self, face: Face) {
        self.faces.insert(face.id.clone(), face);
    }

    pub fn add_loop(&mut self, name: impl Into<String>, l: Loop) {
        self.loops.insert(name.into(), l);
    }

    pub fn add_graph(&mut self, graph: Graph) {
        self.graphs.insert(graph.name().to_string(), graph);
    }

    pub fn add_field(&mut self, name: impl Into<String>, field: FieldSample) {
        self.fields.insert(name.into(), field);
    }

    pub fn add_gauge(&mut self, name: impl Into<String>, gauge: GaugeFunction) {
        self.gauges.insert(name.into(), gauge);
    }

    pub fn add_system(&mut self, spec: SystemSpec) {
        self.systems.insert(spec.name.clone(), spec);
    }

    pub fn segment(&self, id: &SegmentId) -> Result<&Segment, SubstrateError> {
        self.segments.get(id).ok_or_else(|| SubstrateError::UnknownSegment(id.clone()))
    }

    pub fn face(&self, id: &FaceId) -> Result<&Face, SubstrateError> {
        self.faces.get(id).ok_or_else(|| SubstrateError::UnknownFace(id.clone()))
    }

    pub fn segments(&self) -> impl Iterator<Item = &Segment> {
        self.segments.values()
    }

    pub fn faces(&self) -> impl Iterator<Item = &Face> {
        self.faces.values()
    }

    pub fn loops(&self) -> impl Iterator<Item = (&String, &Loop)> {
        self.loops.iter()
    }

    pub fn loop_named(&self, name: &str) -> Option<&Loop> {
        self.loops.get(name)
    }

    pub fn graphs(&self) -> impl Iterator<Item = (&String, &Graph)> {
        self.graphs.iter()
    }

    pub fn graph_named(&self, name: &str) -> Option<&Graph> {
        self.graphs.get(name)
    }

    pub fn fields(&self) -> impl Iterator<Item = (&String, &FieldSample)> {
        self.fields.iter()
    }

    pub fn field_named(&self, name: &str) -> Option<&FieldSample> {
        self.fields.get(name)
    }

    pub fn gauges(&self) -> impl Iterator<Item = (&String, &GaugeFunction)> {
        self.gauges.iter()
    }

    pub fn gauge_named(&self, name: &str) -> Option<&GaugeFunction> {
        self.gauges.get(name)
    }

    pub fn systems(&self) -> impl Iterator<Item = (&String, &SystemSpec)> {
        self.systems.iter()
    }

    pub fn system_named(&self, name: &str) -> Option<&SystemSpec> {
        self.systems.get(name)
    }

    pub fn lineage(&self) -> impl Iterator<Item = &Split> {
        self.lineage.values()
    }

    pub fn has_vertex(&self, v: &VertexId) -> bool {
        self.segments.values().any(|s| &s.source == v || &s.target == v)
    }

    pub fn vertices(&self) -> Vec<VertexId> {
        let mut vs: Vec<VertexId> =
            self.segments.values().flat_map(|s| [s.source.clone(), s.target.clone()]).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn step_endpoints(&self, step: &Step) -> Result<(VertexId, VertexId), SubstrateError> {
        let seg = self.segment(&step.segment)?;
        Ok(match step.direction {
            Direction::Forward => (seg.source.clone(), seg.target.clone()),
            Direction::Reverse => (seg.target.clone(), seg.source.clone()),
        })
    }

    pub fn fresh_segment_id(&self, stem: &str) -> SegmentId {
        fresh(stem, |c| {
            let id = SegmentId::new(c);
            self.segments.contains_key(&id) || self.lineage.contains_key(&id)
        })
        .into()
    }

    pub fn fresh_vertex_id(&self, stem: &str) -> VertexId {
        let used = self.vertices();
        let retired: Vec<&VertexId> = self.lineage.values().map(|s| &s.midpoint).collect();
        let id = fresh(stem, |c| {
            let v = VertexId::new(c);
            used.binary_search(&v).is_ok() || retired.contains(&&v)
        });
        VertexId::new(id)
    }

    pub fn fresh_face_id(&self, stem: &str) -> FaceId {
        FaceId::new(fresh(stem, |c| self.faces.contains_key(&FaceId::new(c))))
    }

    /// Splits `seg` at a fresh vertex and migrates every object that
    /// references it.
    pub fn refine_segment(&self, seg: &SegmentId) -> Result<(Scene, Split), SubstrateError> {
        let old = self.segment(seg)?.clone();
        let a = self.fresh_segment_id(&format!("{seg}.1"));
        let b = {
            let id = fresh(&format!("{seg}.2"), |c| {
                let id = SegmentId::new(c);
                id == a || self.segments.contains_key(&id) || self.lineage.contains_key(&id)
            });
            SegmentId::new(id)
        };
        let w = self.fresh_vertex_id(&format!("{seg}.m"));
        let split = Split { segment: seg.clone(), parts: [a.clone(), b.clone()], midpoint: w.clone() };

        let mut next = self.clone();
        next.segments.remove(seg);
        next.segments.insert(a.clone(), Segment { id: a, source: old.source, target: w.clone() });
        next.segments.insert(b.clone(), Segment { id: b, source: w, target: old.target });
        for l in next.loops.values_mut() {
            *l = Loop(split.apply_path(&l.0));
        }
        for g in next.graphs.values_mut() {
            *g = g.map_paths(|p| split.apply_path(p));
        }
        for f in next.fields.values_mut() {
            *f = split.apply_field(f);
        }
        for face in next.faces.values_mut() {
            *face = split.apply_face(face);
        }
        next.lineage.insert(seg.clone(), split.clone());
        Ok((next, split))
    }

    /// Rewrites a chain recorded against an ancestor of this scene.
    pub fn resolve_chain(&self, chain: &Chain) -> Chain {
        if self.lineage.is_empty() || chain.iter().all(|(s, _)| !self.lineage.contains_key(s)) {
            return chain.clone();
        }
        let mut terms: BTreeMap<SegmentId, i64> = BTreeMap::new();
        for (s, k) in chain.iter() {
            for leaf in self.leaves(s) {
                *terms.entry(leaf).or_insert(0) += k;
            }
        }
        Chain::from_map(terms)
    }

    pub fn resolve_path(&self, path: &Path) -> Path {
        if path.steps.iter().all(|s| !self.lineage.contains_key(&s.segment)) {
            return path.clone();
        }
        let mut steps: Vec<Step> = Vec::new();
        for st in &path.steps {
            let leaves = self.leaves(&st.segment);
            match st.direction {
                Direction::Forward => steps.extend(leaves.into_iter().map(Step::forward)),
                Direction::Reverse => steps.extend(leaves.into_iter().rev().map(Step::reverse)),
            }
        }
        Path::rebuilt(steps, path.source.clone(), path.target.clone())
    }

    pub fn resolve_loop(&self, l: &Loop) -> Loop {
        Loop(self.resolve_path(&l.0))
    }

    pub fn resolve_field(&self, field: &FieldSample) -> FieldSample {
        let mut out = FieldSample::new();
        for (s, v) in field.iter() {
            let first = self.leaves(s).into_iter().next().expect("a segment has at least one leaf");
            let merged = out.get(&first) + v;
            out.set(first, merged);
        }
        out
    }

    /// Current segments that a (possibly retired) segment id stands for,
    /// in traversal order.
    fn leaves(&self, seg: &SegmentId) -> Vec<SegmentId> {
        match self.lineage.get(seg) {
            None => vec![seg.clone()],
            Some(split) => split.parts.iter().flat_map(|p| self.leaves(p)).collect(),
        }
    }

    pub(crate) fn push_lineage(&mut self, split: Split) {
        self.lineage.insert(split.segment.clone(), split);
    }

    /// Every violated invariant, in a stable order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in self.segments.values() {
            if s.source == s.target {
                out.push(format!("segment `{}`: two-point boundary violated (source = target)", s.id));
            }
        }
        for face in self.faces.values() {
            for (seg, _) in face.crossings() {
                if !self.segments.contains_key(seg) {
                    out.push(format!("face `{}`: crossing references unknown segment `{seg}`", face.id));
                }
            }
        }
        for (name, l) in &self.loops {
            if let Err(e) = Path::new(self, l.0.steps.clone()).and_then(Loop::new) {
                out.push(format!("loop `{name}`: {e}"));
            }
        }
        for (name, g) in &self.graphs {
            for problem in g.violations(self) {
                out.push(format!("graph `{name}`: {problem}"));
            }
        }
        for (name, f) in &self.fields {
            for (seg, _) in f.iter() {
                if !self.segments.contains_key(seg) {
                    out.push(format!("field `{name}`: unknown segment `{seg}`"));
                }
            }
        }
        for (name, g) in &self.gauges {
            for (v, _) in g.iter() {
                if !self.has_vertex(v) {
                    out.push(format!("gauge `{name}`: unknown vertex `{v}`"));
                }
            }
        }
        for (name, sys) in &self.systems {
            for problem in sys.violations(self) {
                out.push(format!("system `{name}`: {problem}"));
            }
        }
        out
    }
}

fn fresh(stem: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(stem) {
        return stem.to_string();
    }
    (1..)
        .map(|i| format!("{stem}_{i}"))
        .find(|c| !taken(c))
        .expect("unbounded search")
}
