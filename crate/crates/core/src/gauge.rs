//! Graphs, gauge transformations and maximal-tree gauge fixing.
//!
//! The unconstrained side coordinatizes field samples by edge integrals. A
//! gauge function shifts each edge d.o.f. by the difference of its values at
//! the edge's endpoints; a maximal tree lets that freedom set every tree
//! edge to zero, leaving one fundamental loop per remaining edge.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use crate::cyl::{self, CylFunction, FrameKind, MomentumSpace, ReducedConfigSpace};
use crate::flux;
use crate::hoop::{chain_of, Chain, Hoop, HoopSet};
use crate::linalg::{self, Matrix};
use crate::poly::Poly;
use crate::rational::{self, Rational};
use crate::substrate::{
    d_of, Direction, FaceId, FieldSample, GaugeFunction, Loop, Path, Scene, Step, SubstrateError, VertexId,
};
use crate::systems::{system_geq, FiniteSystem, SystemOrderWitness, SystemsError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GaugeError {
    #[error("function is not defined on the edge frame of graph `{0}`")]
    FrameMismatch(String),
    #[error("function is not gauge invariant")]
    NotInvariant,
    #[error("graph `{0}` has no loops; only constants are gauge invariant")]
    NoLoops(String),
    #[error("complement hint {0:?} does not pick a complement of the annihilator")]
    BadHint(Vec<usize>),
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error(transparent)]
    Substrate(#[from] SubstrateError),
    #[error(transparent)]
    Cyl(#[from] cyl::CylError),
    #[error(transparent)]
    Systems(#[from] Box<SystemsError>),
}

impl From<SystemsError> for GaugeError {
    fn from(e: SystemsError) -> Self {
        GaugeError::Systems(Box::new(e))
    }
}

/// Named edges meeting only at their endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    name: String,
    edges: Vec<(String, Path)>,
}

impl Graph {
    /// Builds and validates against `scene`.
    pub fn new(scene: &Scene, name: impl Into<String>, edges: Vec<(String, Path)>) -> Result<Graph, GaugeError> {
        let g = Graph::unchecked(name, edges);
        match g.violations(scene).first() {
            Some(v) => Err(GaugeError::Invalid(v.clone())),
            None => Ok(g),
        }
    }

    /// Skips validation; [`Scene::violations`] reports problems later.
    pub fn unchecked(name: impl Into<String>, edges: Vec<(String, Path)>) -> Graph {
        Graph { name: name.into(), edges }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn edges(&self) -> &[(String, Path)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|(n, _)| n == name)
    }

    pub fn vertices(&self) -> Vec<VertexId> {
        let vs: BTreeSet<VertexId> =
            self.edges.iter().flat_map(|(_, p)| [p.source().clone(), p.target().clone()]).collect();
        vs.into_iter().collect()
    }

    /// The edge d.o.f. as a frame; certified whenever the graph is valid.
    pub fn frame(&self) -> HoopSet {
        let hoops: Vec<Hoop> = self
            .edges
            .iter()
            .map(|(n, p)| Hoop { label: n.clone(), chain: chain_of(p), representative: Some(p.clone()) })
            .collect();
        HoopSet::certify(hoops.clone()).unwrap_or_else(|_| HoopSet::uncertified(hoops))
    }

    pub fn space(&self) -> ReducedConfigSpace {
        ReducedConfigSpace::edges(self.frame())
    }

    pub fn map_paths(&self, f: impl Fn(&Path) -> Path) -> Graph {
        Graph { name: self.name.clone(), edges: self.edges.iter().map(|(n, p)| (n.clone(), f(p))).collect() }
    }

    pub fn violations(&self, scene: &Scene) -> Vec<String> {
        let mut out = Vec::new();
        let mut names = BTreeSet::new();
        let mut owner: BTreeMap<&crate::substrate::SegmentId, &str> = BTreeMap::new();
        for (name, path) in &self.edges {
            if !names.insert(name.as_str()) {
                out.push(format!("duplicate edge name `{name}`"));
            }
            if let Err(e) = Path::new(scene, path.steps().to_vec()) {
                out.push(format!("edge `{name}`: {e}"));
                continue;
            }
            if path.source() == path.target() {
                out.push(format!("edge `{name}`: two-point boundary violated (source = target)"));
            }
            for step in path.steps() {
                if let Some(other) = owner.insert(&step.segment, name) {
                    if other == name {
                        out.push(format!("edge `{name}` runs over segment `{}` twice", step.segment));
                    } else {
                        out.push(format!("edges `{other}` and `{name}` share segment `{}`", step.segment));
                    }
                }
            }
        }
        out
    }
}

/// A spanning forest of a graph together with its roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaximalTree {
    tree: BTreeSet<usize>,
    roots: Vec<VertexId>,
    /// edge leading one level closer to the root
    parent: BTreeMap<VertexId, usize>,
    /// vertices in the order they joined the tree
    order: Vec<VertexId>,
}

impl MaximalTree {
    pub fn tree_edges(&self) -> &BTreeSet<usize> {
        &self.tree
    }

    pub fn roots(&self) -> &[VertexId] {
        &self.roots
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.tree.contains(&edge)
    }

    /// The tree path e(v) from `v` to its root, as (edge, sign) steps.
    pub fn path_to_root(&self, graph: &Graph, v: &VertexId) -> Vec<(usize, Direction)> {
        let mut out = Vec::new();
        let mut cur = v.clone();
        while let Some(&e) = self.parent.get(&cur) {
            let p = &graph.edges[e].1;
            if p.source() == &cur {
                out.push((e, Direction::Forward));
                cur = p.target().clone();
            } else {
                out.push((e, Direction::Reverse));
                cur = p.source().clone();
            }
        }
        out
    }
}

/// Grows a tree per component: start from the lowest-named unused edge,
/// root it at that edge's target, then keep adding the lowest-named edge
/// with exactly one endpoint already in the tree.
pub fn maximal_tree(graph: &Graph) -> MaximalTree {
    let mut by_name: Vec<usize> = (0..graph.len()).collect();
    by_name.sort_by(|&a, &b| graph.edges[a].0.cmp(&graph.edges[b].0));
    let mut seen: BTreeSet<VertexId> = BTreeSet::new();
    let mut mt = MaximalTree { tree: BTreeSet::new(), roots: Vec::new(), parent: BTreeMap::new(), order: Vec::new() };
    for &start in &by_name {
        let p = &graph.edges[start].1;
        if seen.contains(p.source()) || seen.contains(p.target()) {
            continue;
        }
        let root = p.target().clone();
        seen.insert(root.clone());
        seen.insert(p.source().clone());
        mt.roots.push(root.clone());
        mt.order.push(root);
        mt.order.push(p.source().clone());
        mt.parent.insert(p.source().clone(), start);
        mt.tree.insert(start);
        loop {
            let next = by_name.iter().copied().find(|&e| {
                let q = &graph.edges[e].1;
                seen.contains(q.source()) != seen.contains(q.target())
            });
            let Some(e) = next else { break };
            let q = &graph.edges[e].1;
            let fresh = if seen.contains(q.source()) { q.target() } else { q.source() };
            seen.insert(fresh.clone());
            mt.order.push(fresh.clone());
            mt.parent.insert(fresh.clone(), e);
            mt.tree.insert(e);
        }
    }
    mt
}

/// A fundamental loop l_J = e(v') ∘ e_J ∘ e(v)⁻¹ for a non-tree edge e_J.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalLoop {
    pub edge: usize,
    pub path: Loop,
    /// the loop's d.o.f. as a combination of edge d.o.f.
    pub edge_coefficients: Vec<i64>,
}

fn steps_of(graph: &Graph, e: usize, d: Direction) -> Vec<Step> {
    let p = &graph.edges[e].1;
    match d {
        Direction::Forward => p.steps().to_vec(),
        Direction::Reverse => crate::substrate::reverse(p).steps().to_vec(),
    }
}

pub fn loop_basis(scene: &Scene, graph: &Graph, tree: &MaximalTree) -> Result<Vec<FundamentalLoop>, GaugeError> {
    let mut out = Vec::new();
    for (j, (_, p)) in graph.edges.iter().enumerate() {
        if tree.contains(j) {
            continue;
        }
        let mut coeffs = vec![0i64; graph.len()];
        let mut steps = Vec::new();
        for (e, d) in tree.path_to_root(graph, p.source()).into_iter().rev() {
            steps.extend(steps_of(graph, e, d.flip()));
            coeffs[e] -= d.sign();
        }
        steps.extend(p.steps().iter().cloned());
        coeffs[j] += 1;
        for (e, d) in tree.path_to_root(graph, p.target()) {
            steps.extend(steps_of(graph, e, d));
            coeffs[e] += d.sign();
        }
        let path = Loop::new(Path::new(scene, steps)?)?;
        out.push(FundamentalLoop { edge: j, path, edge_coefficients: coeffs });
    }
    Ok(out)
}

/// The loop d.o.f. as a certified frame.
pub fn loop_frame(graph: &Graph, loops: &[FundamentalLoop]) -> HoopSet {
    let hoops: Vec<Hoop> =
        loops.iter().map(|l| Hoop::from_loop(format!("l[{}]", graph.edges[l.edge].0), &l.path)).collect();
    HoopSet::certify(hoops.clone()).unwrap_or_else(|_| HoopSet::uncertified(hoops))
}

pub fn gauge_transform(scene: &Scene, a: &FieldSample, f: &GaugeFunction) -> FieldSample {
    let mut out = a.clone();
    for seg in scene.segments() {
        let shift = d_of(scene, f, &seg.id).expect("segment comes from the scene");
        if !shift.is_zero() {
            let v = out.get(&seg.id) + shift;
            out.set(seg.id.clone(), v);
        }
    }
    out
}

/// θ(root) = 0 and θ(v) = κ of the first step of e(v) plus θ one level up.
pub fn theta_assignment(graph: &Graph, tree: &MaximalTree, a: &FieldSample) -> GaugeFunction {
    let mut theta = GaugeFunction::new();
    for v in &tree.order {
        let Some(&e) = tree.parent.get(v) else { continue };
        let p = &graph.edges[e].1;
        let k = cyl::kappa_eval(&chain_of(p), a);
        let (step, up) = if p.source() == v { (k, p.target()) } else { (-k, p.source()) };
        theta.set(v.clone(), step + theta.get(up));
    }
    theta
}

/// d_v for every vertex: +1 on edges ending at v, −1 on edges starting there.
pub fn orbit_directions(graph: &Graph) -> BTreeMap<VertexId, Vec<Rational>> {
    let mut dirs: BTreeMap<VertexId, Vec<Rational>> = BTreeMap::new();
    for v in graph.vertices() {
        dirs.insert(v, vec![Rational::zero(); graph.len()]);
    }
    for (i, (_, p)) in graph.edges.iter().enumerate() {
        dirs.get_mut(p.target()).expect("vertex listed")[i] += rational::rat(1);
        dirs.get_mut(p.source()).expect("vertex listed")[i] -= rational::rat(1);
    }
    dirs
}

fn check_frame(psi: &CylFunction, graph: &Graph) -> Result<(), GaugeError> {
    let names: Vec<&str> = graph.edges.iter().map(|(n, _)| n.as_str()).collect();
    if psi.space.kind() != FrameKind::Edges || psi.space.labels() != names {
        return Err(GaugeError::FrameMismatch(graph.name.clone()));
    }
    Ok(())
}

pub fn is_gauge_invariant(psi: &CylFunction, graph: &Graph) -> Result<bool, GaugeError> {
    check_frame(psi, graph)?;
    Ok(orbit_directions(graph).values().all(|d| psi.poly.directional(d).is_zero()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reduction {
    /// The graph has no loops: the invariant is this constant.
    Constant(Rational),
    Reduced { psi: CylFunction, loops: Vec<FundamentalLoop> },
}

/// Sets tree-edge variables to 0 and each non-tree edge variable to its
/// fundamental loop's coordinate.
pub fn gauge_reduce(scene: &Scene, psi: &CylFunction, graph: &Graph) -> Result<Reduction, GaugeError> {
    if !is_gauge_invariant(psi, graph)? {
        return Err(GaugeError::NotInvariant);
    }
    let tree = maximal_tree(graph);
    let loops = loop_basis(scene, graph, &tree)?;
    if loops.is_empty() {
        return Ok(Reduction::Constant(psi.poly.constant_term()));
    }
    let mut subs = vec![Poly::zero(); graph.len()];
    for (k, l) in loops.iter().enumerate() {
        subs[l.edge] = Poly::var(k);
    }
    let space = ReducedConfigSpace::hoops(loop_frame(graph, &loops));
    let reduced = CylFunction::new(space, psi.poly.substitute(&subs))?;
    Ok(Reduction::Reduced { psi: reduced, loops })
}

/// κ_e(df) for every edge.
fn edge_shifts(graph: &Graph, f: &GaugeFunction) -> Vec<Rational> {
    graph.edges.iter().map(|(_, p)| f.get(p.target()) - f.get(p.source())).collect()
}

fn shifted(psi: &Poly, shifts: &[Rational], sign: i64) -> Poly {
    let subs: Vec<Poly> = shifts
        .iter()
        .enumerate()
        .map(|(i, s)| &Poly::var(i) + &Poly::constant(s * rational::rat(sign)))
        .collect();
    psi.substitute(&subs)
}

/// g⁻¹*_f(φ̂ (g*_f Ψ̄)) = φ̂ Ψ̄, compared as polynomials.
pub fn flux_gauge_invariance_check(
    scene: &Scene,
    face: &FaceId,
    psi: &CylFunction,
    f: &GaugeFunction,
    graph: &Graph,
) -> Result<bool, GaugeError> {
    check_frame(psi, graph)?;
    let shifts = edge_shifts(graph, f);
    let moved = CylFunction::new(psi.space.clone(), shifted(&psi.poly, &shifts, 1))?;
    let acted = cyl::flux_apply(scene, face, &moved)?;
    let back = shifted(&acted.poly, &shifts, -1);
    Ok(back == cyl::flux_apply(scene, face, psi)?.poly)
}

/// A constrained system cut out of a graph system.
#[derive(Debug, Clone)]
pub struct Constrained {
    pub system: FiniteSystem,
    pub tree: MaximalTree,
    pub loops: Vec<FundamentalLoop>,
    /// ε of each unconstrained momentum against each loop
    pub epsilon: Matrix,
    /// basis of the annihilator F̂₀, as coefficient rows over the momenta
    pub annihilator: Matrix,
    /// momenta spanning the chosen complement F̂₁
    pub chosen: Vec<usize>,
}

pub fn constrain_system(
    scene: &Scene,
    system: &FiniteSystem,
    graph: &Graph,
    hint: Option<&[usize]>,
) -> Result<Constrained, GaugeError> {
    let tree = maximal_tree(graph);
    let loops = loop_basis(scene, graph, &tree)?;
    if loops.is_empty() {
        return Err(GaugeError::NoLoops(graph.name.clone()));
    }
    let frame = loop_frame(graph, &loops);
    let m = loops.len();
    let epsilon = system.momenta().epsilon_matrix(scene, frame.chains())?;
    let annihilator = linalg::left_kernel(&epsilon, m);
    let chosen = match hint {
        Some(h) => {
            let rows: Matrix = h.iter().filter_map(|&i| epsilon.get(i).cloned()).collect();
            if h.len() != m || rows.len() != m || linalg::rank(&rows, m) != m {
                return Err(GaugeError::BadHint(h.to_vec()));
            }
            h.to_vec()
        }
        // non-pivot momenta of the annihilator's echelon form span a complement
        None => {
            let pivots = linalg::rref(&annihilator, epsilon.len()).pivots;
            (0..epsilon.len()).filter(|i| !pivots.contains(i)).collect()
        }
    };
    let momenta = MomentumSpace::new(chosen.iter().map(|&i| system.momenta().basis()[i].clone()).collect());
    let constrained = FiniteSystem::new(scene, momenta, frame)?;
    Ok(Constrained { system: constrained, tree, loops, epsilon, annihilator, chosen })
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub unconstrained: Result<SystemOrderWitness, SystemsError>,
    pub fine: Constrained,
    pub coarse: Constrained,
    pub constrained: Result<SystemOrderWitness, SystemsError>,
}

/// Constrains a comparable pair of graph systems and asks whether the
/// order survives.
pub fn order_preservation_probe(
    scene: &Scene,
    fine: (&FiniteSystem, &Graph, Option<&[usize]>),
    coarse: (&FiniteSystem, &Graph, Option<&[usize]>),
) -> Result<ProbeReport, GaugeError> {
    let unconstrained = system_geq(scene, fine.0, coarse.0);
    let cf = constrain_system(scene, fine.0, fine.1, fine.2)?;
    let cc = constrain_system(scene, coarse.0, coarse.1, coarse.2)?;
    let constrained = system_geq(scene, &cf.system, &cc.system);
    Ok(ProbeReport { unconstrained, fine: cf, coarse: cc, constrained })
}

/// Rank of the ε-rows of single-face flux operators against probe hoops.
pub fn restricted_flux_rank(scene: &Scene, faces: &[FaceId], probe: &[Chain]) -> Result<usize, GaugeError> {
    let rows = faces
        .iter()
        .map(|f| probe.iter().map(|c| Ok(flux::epsilon_in(scene, f, c)?.to_rational())).collect())
        .collect::<Result<Matrix, GaugeError>>()?;
    Ok(linalg::rank(&rows, probe.len()))
}
