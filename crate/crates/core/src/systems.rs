//! Finite physical systems and their directing relation.
//!
//! A system pairs a momentum space (flux combinations) with a certified hoop
//! frame. It is non-degenerate when the square matrix G of momenta acting
//! on the frame's d.o.f. is invertible. Systems are ordered by inclusion of
//! momentum spans together with integer decomposability of hoops, and any
//! two systems have a common upper bound built by [`common_refinement`].

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::cyl::{self, face_coordinates, CylError, CylFunction, FluxCombo, GMatrix, MomentumSpace, ReducedConfigSpace};
use crate::flux::{self, FluxError};
use crate::hoop::{
    chain_of, decompose_hoop, hoopset_geq, independent_basis, independent_basis_of_chains, Chain, Hoop, HoopError,
    HoopSet,
};
use crate::linalg::{self, Matrix};
use crate::poly::Poly;
use crate::rational::{self, Rational};
use crate::substrate::{Crossing, End, Face, FaceId, FieldSample, Loop, Path, Scene, Side, Step, SubstrateError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemsError {
    #[error("no non-trivial input: zero-dimensional systems are not built")]
    EmptyInput,
    #[error("not comparable on the {side} side: {detail}")]
    NotComparable { side: OrderSide, detail: String },
    #[error("construction produced a degenerate system")]
    Degenerate,
    #[error("unknown loop `{0}`")]
    UnknownLoop(String),
    #[error("unknown graph `{0}`")]
    UnknownGraph(String),
    #[error(transparent)]
    Hoop(#[from] HoopError),
    #[error(transparent)]
    Cyl(#[from] CylError),
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error(transparent)]
    Substrate(#[from] SubstrateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderSide {
    Momenta,
    Hoops,
}

impl fmt::Display for OrderSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderSide::Momenta => "momentum",
            OrderSide::Hoops => "hoop",
        })
    }
}

/// λ = (F̂, K_L).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSystem {
    momenta: MomentumSpace,
    frame: HoopSet,
    nondegenerate: bool,
}

impl FiniteSystem {
    pub fn new(scene: &Scene, momenta: MomentumSpace, frame: HoopSet) -> Result<FiniteSystem, SystemsError> {
        let nondegenerate = frame.certificate().is_some()
            && momenta.dim() == frame.len()
            && !frame.is_empty()
            && cyl::g_matrix(scene, &momenta, &frame)?.is_nondegenerate();
        Ok(FiniteSystem { momenta, frame, nondegenerate })
    }

    pub fn momenta(&self) -> &MomentumSpace {
        &self.momenta
    }

    pub fn frame(&self) -> &HoopSet {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    /// The flag computed at construction.
    pub fn nondegenerate(&self) -> bool {
        self.nondegenerate
    }

    pub fn space(&self, scene: &Scene) -> ReducedConfigSpace {
        ReducedConfigSpace::hoops(self.frame.rebase(scene))
    }

    pub fn g(&self, scene: &Scene) -> Result<GMatrix, SystemsError> {
        Ok(cyl::g_matrix(scene, &self.momenta, &self.frame)?)
    }

    /// Same system with its frame expressed against `scene`.
    pub fn rebase(&self, scene: &Scene) -> FiniteSystem {
        FiniteSystem { momenta: self.momenta.clone(), frame: self.frame.rebase(scene), nondegenerate: self.nondegenerate }
    }
}

/// Where a system stored in a scene takes its frame from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SystemSource {
    Loops(Vec<String>),
    Graph(String),
}

/// A named system as written in a scene file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemSpec {
    pub name: String,
    pub source: SystemSource,
    pub momenta: Vec<FluxCombo>,
}

impl SystemSpec {
    pub fn violations(&self, scene: &Scene) -> Vec<String> {
        let mut out = Vec::new();
        match &self.source {
            SystemSource::Loops(names) => {
                for n in names {
                    if scene.loop_named(n).is_none() {
                        out.push(format!("unknown loop `{n}`"));
                    }
                }
            }
            SystemSource::Graph(g) => {
                if scene.graph_named(g).is_none() {
                    out.push(format!("unknown graph `{g}`"));
                }
            }
        }
        for combo in &self.momenta {
            for (f, _) in combo.terms() {
                if scene.face(f).is_err() {
                    out.push(format!("unknown face `{f}`"));
                }
            }
        }
        out
    }

    pub fn frame(&self, scene: &Scene) -> Result<HoopSet, SystemsError> {
        match &self.source {
            SystemSource::Loops(names) => {
                let hoops = names
                    .iter()
                    .map(|n| {
                        let l = scene.loop_named(n).ok_or_else(|| SystemsError::UnknownLoop(n.clone()))?;
                        Ok(Hoop::from_loop(n.clone(), l))
                    })
                    .collect::<Result<Vec<_>, SystemsError>>()?;
                Ok(HoopSet::certify(hoops)?)
            }
            SystemSource::Graph(g) => {
                let graph = scene.graph_named(g).ok_or_else(|| SystemsError::UnknownGraph(g.clone()))?;
                Ok(graph.frame())
            }
        }
    }

    pub fn build(&self, scene: &Scene) -> Result<FiniteSystem, SystemsError> {
        FiniteSystem::new(scene, MomentumSpace::new(self.momenta.clone()), self.frame(scene)?)
    }
}

/// Dimension match, non-degenerate G and (automatically here) constant
/// action of every momentum on every frame d.o.f.
pub fn is_nondegenerate(scene: &Scene, system: &FiniteSystem) -> bool {
    system.frame.certificate().is_some()
        && system.momenta.dim() == system.frame.len()
        && !system.frame.is_empty()
        && system.g(scene).map(|g| g.is_nondegenerate()).unwrap_or(false)
}

/// Proof that λ' ≥ λ: how each coarse momentum and hoop is built from fine ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemOrderWitness {
    /// row i: coefficients of coarse momentum i over the fine momenta
    pub momentum_coefficients: Matrix,
    /// row i: integer coefficients of coarse hoop i over the fine hoops
    pub hoop_matrix: Vec<Vec<i64>>,
}

impl SystemOrderWitness {
    pub fn verify(&self, scene: &Scene, fine: &FiniteSystem, coarse: &FiniteSystem) -> bool {
        let fine_frame = fine.frame.rebase(scene);
        let momenta_ok = self.momentum_coefficients.len() == coarse.momenta.dim()
            && coarse.momenta.basis().iter().zip(&self.momentum_coefficients).all(|(target, row)| {
                let built = fine
                    .momenta
                    .basis()
                    .iter()
                    .zip(row)
                    .fold(FluxCombo::zero(), |acc, (c, a)| acc.add(&c.scale(a)));
                &built == target
            });
        let hoops_ok = self.hoop_matrix.len() == coarse.frame.len()
            && coarse.frame.chains().zip(&self.hoop_matrix).all(|(target, row)| {
                let built = fine_frame
                    .chains()
                    .zip(row)
                    .fold(Chain::zero(), |acc, (c, n)| &acc + &c.scale(*n));
                built == scene.resolve_chain(target)
            });
        momenta_ok && hoops_ok
    }
}

/// Span membership in face coordinates: a combination is in a span when it
/// is literally a linear combination of the spanning combinations.
fn span_coefficients(fine: &[FluxCombo], coarse: &[FluxCombo]) -> Result<Matrix, usize> {
    let mut faces: Vec<FaceId> =
        fine.iter().chain(coarse).flat_map(|c| c.terms().map(|(f, _)| f.clone())).collect();
    faces.sort();
    faces.dedup();
    let rows = face_coordinates(fine, &faces);
    let targets = face_coordinates(coarse, &faces);
    targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if rows.is_empty() {
                return if t.iter().all(|x| x.is_zero()) { Ok(Vec::new()) } else { Err(i) };
            }
            linalg::solve_combination(&rows, t).ok_or(i)
        })
        .collect()
}

/// λ' ≥ λ: F̂' ⊃ F̂ and every hoop of λ is an integer combination of hoops of λ'.
pub fn system_geq(
    scene: &Scene,
    fine: &FiniteSystem,
    coarse: &FiniteSystem,
) -> Result<SystemOrderWitness, SystemsError> {
    let momentum_coefficients = span_coefficients(fine.momenta.basis(), coarse.momenta.basis()).map_err(|i| {
        SystemsError::NotComparable {
            side: OrderSide::Momenta,
            detail: format!("momentum `{}` is outside the finer span", coarse.momenta.basis()[i]),
        }
    })?;
    let fine_frame = fine.frame.rebase(scene);
    if fine_frame.certificate().is_none() {
        return Err(SystemsError::NotComparable { side: OrderSide::Hoops, detail: "finer frame is uncertified".into() });
    }
    let hoop_matrix = coarse
        .frame
        .hoops()
        .iter()
        .map(|h| {
            decompose_hoop(&scene.resolve_chain(&h.chain), &fine_frame).map_err(|_| SystemsError::NotComparable {
                side: OrderSide::Hoops,
                detail: format!("hoop `{}` is not composed of finer hoops", h.label),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SystemOrderWitness { momentum_coefficients, hoop_matrix })
}

/// Dual faces for every hoop of a certified frame.
pub fn synthesize_dual_faces(scene: &Scene, frame: &HoopSet) -> Result<(Scene, Vec<Face>), SystemsError> {
    let all: Vec<usize> = (0..frame.len()).collect();
    synthesize_dual_faces_for(scene, frame, &all)
}

/// Splits each chosen hoop's exclusive segment and plants a face at the new
/// midpoint that the hoop pierces once, positively. No other frame hoop
/// touches that segment, so ε(S_I, l_J) = δ_IJ.
pub fn synthesize_dual_faces_for(
    scene: &Scene,
    frame: &HoopSet,
    indices: &[usize],
) -> Result<(Scene, Vec<Face>), SystemsError> {
    let mut current = scene.clone();
    let mut faces = Vec::with_capacity(indices.len());
    for &i in indices {
        let rebased = frame.rebase(&current);
        let cert = rebased.certificate().ok_or(HoopError::Uncertified)?;
        let (seg, sign) = cert.exclusive(i);
        let seg = seg.clone();
        let (next, split) = current.refine_segment(&seg)?;
        let (side_in, side_out) = if sign > 0 { (Side::Above, Side::Below) } else { (Side::Below, Side::Above) };
        let id = next.fresh_face_id(&format!("{}*", rebased.hoops()[i].label));
        let face = Face::new(id)
            .with(split.parts[0].clone(), Crossing::Transversal { end: End::AtTarget, side: side_in })
            .with(split.parts[1].clone(), Crossing::Transversal { end: End::AtSource, side: side_out });
        current = next;
        current.put_face(face.clone());
        faces.push(face);
    }
    Ok((current, faces))
}

/// Output of [`extend_to_system`].
#[derive(Debug, Clone)]
pub struct Extension {
    pub scene: Scene,
    pub system: FiniteSystem,
    /// integer coefficients of each input loop over the system's frame
    pub coefficients: Vec<Vec<i64>>,
}

/// A non-degenerate system whose frame makes every input loop's d.o.f.
/// a linear function of the frame coordinates.
pub fn extend_to_system(scene: &Scene, loops: &[Loop]) -> Result<Extension, SystemsError> {
    let decomposition = independent_basis(scene, loops)?;
    if decomposition.basis.is_empty() {
        return Err(SystemsError::EmptyInput);
    }
    let (next, faces) = synthesize_dual_faces(scene, &decomposition.basis)?;
    let momenta = MomentumSpace::new(faces.iter().map(|f| FluxCombo::single(f.id.clone())).collect());
    let system = FiniteSystem::new(&next, momenta, decomposition.basis.rebase(&next))?;
    if !system.nondegenerate() {
        return Err(SystemsError::Degenerate);
    }
    Ok(Extension { scene: next, system, coefficients: decomposition.coefficients })
}

/// A non-degenerate system whose momentum space contains φ̂_S for every
/// given face. Each face needs a witness loop in `pool`.
pub fn extend_to_system_momentum(
    scene: &Scene,
    faces: &[FaceId],
    pool: &[Loop],
) -> Result<(Scene, FiniteSystem), SystemsError> {
    let mut current = scene.clone();
    let mut acc: Option<FiniteSystem> = None;
    for face_id in faces {
        let resolved: Vec<Loop> = pool.iter().map(|l| current.resolve_loop(l)).collect();
        let face = current.face(face_id)?.clone();
        let witness = flux::face_validity(&face, &resolved)?;
        let basis = independent_basis(&current, &resolved[witness.index..=witness.index])?.basis;
        let eps: Vec<bool> = basis.chains().map(|c| !flux::epsilon_hoop(&face, c).is_zero()).collect();
        let j = eps.iter().position(|&e| e).expect("ε is additive, so some basis hoop carries it");
        let others: Vec<usize> = (0..basis.len()).filter(|&k| k != j).collect();
        let (next, duals) = synthesize_dual_faces_for(&current, &basis, &others)?;
        current = next;
        let mut momenta = vec![FluxCombo::single(face_id.clone())];
        momenta.extend(duals.iter().map(|f| FluxCombo::single(f.id.clone())));
        let local = FiniteSystem::new(&current, MomentumSpace::new(momenta), basis.rebase(&current))?;
        acc = Some(match acc {
            None => local,
            Some(prev) => {
                let (next, joined) = common_refinement(&current, &prev, &local)?;
                current = next;
                joined
            }
        });
    }
    let system = acc.ok_or(SystemsError::EmptyInput)?;
    Ok((current, system))
}

/// Adds a fresh three-segment loop that pierces `face` once and nothing else.
fn attach_piercing_loop(scene: &mut Scene, face: &FaceId) -> Result<Hoop, SystemsError> {
    let stem = format!("{face}.probe");
    let u = scene.fresh_vertex_id(&format!("{stem}.u"));
    let m = scene.fresh_vertex_id(&format!("{stem}.m"));
    let w = scene.fresh_vertex_id(&format!("{stem}.w"));
    let mut ids = Vec::new();
    for (k, (a, b)) in [(&u, &m), (&m, &w), (&w, &u)].into_iter().enumerate() {
        let id = scene.fresh_segment_id(&format!("{stem}.{}", k + 1));
        scene.add_segment(id.clone(), a.clone(), b.clone())?;
        ids.push(id);
    }
    let updated = scene
        .face(face)?
        .clone()
        .with(ids[0].clone(), Crossing::Transversal { end: End::AtTarget, side: Side::Above })
        .with(ids[1].clone(), Crossing::Transversal { end: End::AtSource, side: Side::Below });
    scene.put_face(updated);
    let path = Path::new(scene, ids.iter().cloned().map(Step::forward).collect())?;
    Ok(Hoop::from_loop(format!("probe({face})"), &Loop::new(path)?))
}

/// A system ≥ both inputs.
///
/// The frame is a fundamental-cycle basis of both input frames, the
/// momentum space starts from a maximal formally independent subset of the
/// inputs' momenta (λ₁ first). If those momenta act dependently on the
/// frame, fresh loops piercing single faces separate them; dual faces then
/// complete the momentum space to a non-degenerate pairing.
pub fn common_refinement(
    scene: &Scene,
    first: &FiniteSystem,
    second: &FiniteSystem,
) -> Result<(Scene, FiniteSystem), SystemsError> {
    let mut current = scene.clone();
    let chains: Vec<Chain> =
        first.frame.rebase(scene).chains().chain(second.frame.rebase(scene).chains()).cloned().collect();
    let mut hoops = independent_basis_of_chains(scene, &chains)?.basis.hoops().to_vec();

    let combos: Vec<FluxCombo> = first.momenta.basis().iter().chain(second.momenta.basis()).cloned().collect();
    let faces: Vec<FaceId> = {
        let set: BTreeSet<FaceId> = combos.iter().flat_map(|c| c.terms().map(|(f, _)| f.clone())).collect();
        set.into_iter().collect()
    };
    let kept = linalg::greedy_independent(&face_coordinates(&combos, &faces), faces.len());
    let pivots: Vec<FluxCombo> = kept.iter().map(|&i| combos[i].clone()).collect();
    let coords = face_coordinates(&pivots, &faces);

    let action = MomentumSpace::new(pivots.clone()).epsilon_matrix(scene, hoops.iter().map(|h| &h.chain))?;
    let rank = linalg::rank(&action, hoops.len());
    if rank < pivots.len() {
        let kernel = linalg::left_kernel(&action, hoops.len());
        let mixed: Matrix = kernel
            .iter()
            .map(|y| {
                (0..faces.len())
                    .map(|f| y.iter().zip(&coords).map(|(a, row)| a * &row[f]).sum())
                    .collect()
            })
            .collect();
        for f in linalg::rref(&mixed, faces.len()).pivots {
            hoops.push(attach_piercing_loop(&mut current, &faces[f])?);
        }
    }

    let frame = HoopSet::certify(hoops)?;
    let action = MomentumSpace::new(pivots.clone()).epsilon_matrix(&current, frame.chains())?;
    let used = linalg::rref(&action, frame.len()).pivots;
    let free: Vec<usize> = (0..frame.len()).filter(|j| !used.contains(j)).collect();
    let (next, duals) = synthesize_dual_faces_for(&current, &frame, &free)?;
    let mut momenta = pivots;
    momenta.extend(duals.iter().map(|f| FluxCombo::single(f.id.clone())));
    let system = FiniteSystem::new(&next, MomentumSpace::new(momenta), frame.rebase(&next))?;
    if !system.nondegenerate() {
        return Err(SystemsError::Degenerate);
    }
    Ok((next, system))
}

/// Equal rational spans of the two chain families.
pub fn same_reduced_space(a: &HoopSet, b: &HoopSet) -> bool {
    let segs: Vec<_> = {
        let set: BTreeSet<_> = a.chains().chain(b.chains()).flat_map(|c| c.support().cloned()).collect();
        set.into_iter().collect()
    };
    let rows = |h: &HoopSet| -> Matrix {
        h.chains().map(|c| segs.iter().map(|s| rational::rat(c.get(s))).collect()).collect()
    };
    let (ra, rb) = (rows(a), rows(b));
    let both: Matrix = ra.iter().chain(&rb).cloned().collect();
    let r = linalg::rank(&both, segs.len());
    linalg::rank(&ra, segs.len()) == r && linalg::rank(&rb, segs.len()) == r
}

/// `n` disjoint two-segment loops on fresh vertices, with their dual faces.
pub fn fresh_disjoint_system(scene: &Scene, n: usize) -> Result<(Scene, FiniteSystem), SystemsError> {
    let mut current = scene.clone();
    let mut loops = Vec::with_capacity(n);
    for _ in 0..n {
        let u = current.fresh_vertex_id("ring.u");
        let w = current.fresh_vertex_id("ring.w");
        let a = current.fresh_segment_id("ring.a");
        current.add_segment(a.clone(), u.clone(), w.clone())?;
        let b = current.fresh_segment_id("ring.b");
        current.add_segment(b.clone(), w, u)?;
        loops.push(Loop::new(Path::new(&current, vec![Step::forward(a), Step::forward(b)])?)?);
    }
    let ext = extend_to_system(&current, &loops)?;
    Ok((ext.scene, ext.system))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assumption {
    A1a,
    A1b,
    A2,
    A3a,
    A3b,
    A4,
    A5,
    A6a,
    A6b,
}

impl Assumption {
    pub const ALL: [Assumption; 9] = [
        Assumption::A1a,
        Assumption::A1b,
        Assumption::A2,
        Assumption::A3a,
        Assumption::A3b,
        Assumption::A4,
        Assumption::A5,
        Assumption::A6a,
        Assumption::A6b,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Assumption::A1a => "1a",
            Assumption::A1b => "1b",
            Assumption::A2 => "2",
            Assumption::A3a => "3a",
            Assumption::A3b => "3b",
            Assumption::A4 => "4",
            Assumption::A5 => "5",
            Assumption::A6a => "6a",
            Assumption::A6b => "6b",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Assumption::A1a => "every configurational d.o.f. fits some system",
            Assumption::A1b => "every momentum operator fits some system",
            Assumption::A2 => "coordinate maps are onto",
            Assumption::A3a => "momenta act on cylindrical functions by the chain rule",
            Assumption::A3b => "momenta map d.o.f. to constants",
            Assumption::A4 => "pairings are non-degenerate",
            Assumption::A5 => "equal reduced spaces are mutually comparable",
            Assumption::A6a => "coarse d.o.f. are combinations of fine d.o.f.",
            Assumption::A6b => "coarse momenta are combinations of fine momenta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    pub passed: bool,
    /// number of individual instances examined
    pub checked: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub checks: Vec<AssumptionCheck>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, a: Assumption) -> &AssumptionCheck {
        self.checks.iter().find(|c| c.assumption == a).expect("every assumption is reported")
    }
}

/// Inputs the existential assumptions are exercised on.
#[derive(Debug, Clone, Default)]
pub struct Probes {
    pub loops: Vec<Loop>,
    pub polys: Vec<Poly>,
    pub faces: Vec<FaceId>,
}

pub fn verify_assumptions(scene: &Scene, sample: &[FiniteSystem], probes: &Probes) -> Report {
    verify_assumptions_with_fault(scene, sample, probes, None)
}

/// Runs the suite; `fault` corrupts one stage so that its check alone must fail.
pub fn verify_assumptions_with_fault(
    scene: &Scene,
    sample: &[FiniteSystem],
    probes: &Probes,
    fault: Option<Assumption>,
) -> Report {
    let mut warnings = Vec::new();
    if sample.is_empty() {
        warnings.push("empty sample: per-system assumptions hold vacuously".to_string());
    }
    let sample: Vec<FiniteSystem> = sample.iter().map(|s| s.rebase(scene)).collect();
    let mut checks = Vec::new();
    for a in Assumption::ALL {
        let injected = fault == Some(a);
        let outcome = match a {
            Assumption::A1a => check_1a(scene, probes, injected),
            Assumption::A1b => check_1b(scene, probes, injected),
            Assumption::A2 => check_2(&sample, injected),
            Assumption::A3a => check_3(scene, &sample, probes, injected, true),
            Assumption::A3b => check_3(scene, &sample, probes, injected, false),
            Assumption::A4 => check_4(scene, &sample, injected),
            Assumption::A5 => check_5(scene, &sample, injected),
            Assumption::A6a | Assumption::A6b => check_6(scene, &sample, injected, a == Assumption::A6a),
        };
        if outcome.checked == 0 {
            warnings.push(format!("assumption {}: nothing to check", a.label()));
        }
        checks.push(AssumptionCheck { assumption: a, passed: outcome.failure.is_none(), checked: outcome.checked, detail: outcome.failure.unwrap_or_else(|| "ok".into()) });
    }
    Report { checks, warnings }
}

struct Outcome {
    checked: usize,
    failure: Option<String>,
}

impl Outcome {
    fn pass(checked: usize) -> Outcome {
        Outcome { checked, failure: None }
    }

    fn fail(checked: usize, why: impl Into<String>) -> Outcome {
        Outcome { checked, failure: Some(why.into()) }
    }
}

/// A fixed field sample with distinct values on every segment.
fn probe_field(scene: &Scene) -> FieldSample {
    let mut a = FieldSample::new();
    for (k, s) in scene.segments().enumerate() {
        a.set(s.id.clone(), rational::ratio(2 * k as i64 + 3, k as i64 + 2));
    }
    a
}

fn check_1a(scene: &Scene, probes: &Probes, injected: bool) -> Outcome {
    let nontrivial = probes.loops.iter().filter(|l| !chain_of(l.path()).is_empty()).count();
    if nontrivial == 0 {
        return Outcome::pass(0);
    }
    let ext = match extend_to_system(scene, &probes.loops) {
        Ok(e) => e,
        Err(e) => return Outcome::fail(0, format!("extension failed: {e}")),
    };
    let mut frame = ext.system.frame().clone();
    if injected {
        let mut hoops = frame.hoops().to_vec();
        hoops.pop();
        frame = HoopSet::certify(hoops).unwrap_or_else(|e| unreachable!("a subset stays certified: {e}"));
    }
    let a = probe_field(&ext.scene);
    let space = ReducedConfigSpace::hoops(frame.clone());
    let x = cyl::coordinate_map(&space, &a);
    for (i, l) in probes.loops.iter().enumerate() {
        let c = ext.scene.resolve_chain(&chain_of(l.path()));
        let Ok(n) = decompose_hoop(&c, &frame) else {
            return Outcome::fail(i + 1, format!("probe loop {i} is not compatible with the extended frame"));
        };
        let rebuilt: Rational = n.iter().zip(&x).map(|(k, xi)| rational::rat(*k) * xi).sum();
        if rebuilt != cyl::kappa_eval(&c, &a) {
            return Outcome::fail(i + 1, format!("probe loop {i}: κ does not match its decomposition"));
        }
    }
    Outcome::pass(probes.loops.len())
}

fn check_1b(scene: &Scene, probes: &Probes, injected: bool) -> Outcome {
    if probes.faces.is_empty() {
        return Outcome::pass(0);
    }
    let (next, system) = match extend_to_system_momentum(scene, &probes.faces, &probes.loops) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(0, format!("extension failed: {e}")),
    };
    if !is_nondegenerate(&next, &system) {
        return Outcome::fail(0, "extended system is degenerate");
    }
    let mut basis = system.momenta().basis().to_vec();
    if injected {
        basis.remove(0);
    }
    let singles: Vec<FluxCombo> = probes.faces.iter().map(|f| FluxCombo::single(f.clone())).collect();
    match span_coefficients(&basis, &singles) {
        Ok(_) => Outcome::pass(probes.faces.len()),
        Err(i) => Outcome::fail(i + 1, format!("face `{}` is outside the extended momentum space", probes.faces[i])),
    }
}

fn check_2(sample: &[FiniteSystem], injected: bool) -> Outcome {
    let mut checked = 0;
    for (k, sys) in sample.iter().enumerate() {
        let space = ReducedConfigSpace::hoops(sys.frame().clone());
        let n = space.dim() as i64;
        let targets = [
            vec![Rational::zero(); space.dim()],
            (0..n).map(|i| rational::ratio(if i % 2 == 0 { i + 1 } else { -i - 1 }, i + 2)).collect(),
        ];
        for t in targets {
            checked += 1;
            let mut a = match cyl::preimage(&space, &t) {
                Ok(a) => a,
                Err(e) => return Outcome::fail(checked, format!("system {k}: {e}")),
            };
            if injected {
                if let Some(cert) = space.frame().certificate().filter(|c| !c.is_empty()) {
                    let (s, _) = cert.exclusive(0);
                    let v = a.get(s) + Rational::one();
                    a.set(s.clone(), v);
                }
            }
            if cyl::coordinate_map(&space, &a) != t {
                return Outcome::fail(checked, format!("system {k}: preimage misses its target"));
            }
        }
    }
    Outcome::pass(checked)
}

fn default_probe(dim: usize) -> Poly {
    let product = (0..dim).fold(Poly::constant(Rational::one()), |acc, i| &acc * &Poly::var(i));
    &(&product + &Poly::var(0).pow(2)) - &Poly::constant(rational::ratio(1, 3))
}

fn check_3(scene: &Scene, sample: &[FiniteSystem], probes: &Probes, injected: bool, chain_rule: bool) -> Outcome {
    let mut checked = 0;
    for (k, sys) in sample.iter().enumerate() {
        let space = ReducedConfigSpace::hoops(sys.frame().clone());
        for (j, phi) in sys.momenta().basis().iter().enumerate() {
            // φ̂κ_I for each frame coordinate
            let mut constants = Vec::with_capacity(space.dim());
            for i in 0..space.dim() {
                let mut out = match cyl::combo_apply(scene, phi, &CylFunction::coordinate(&space, i)) {
                    Ok(o) => o.poly,
                    Err(e) => return Outcome::fail(checked, format!("system {k}: {e}")),
                };
                if !chain_rule {
                    checked += 1;
                    if injected && checked == 1 {
                        out = &out + &Poly::var(i);
                    }
                    if !out.is_constant() {
                        return Outcome::fail(checked, format!("system {k}: momentum {j} maps d.o.f. {i} to {out}"));
                    }
                }
                constants.push(out.constant_term());
            }
            if !chain_rule {
                continue;
            }
            let mut polys: Vec<Poly> = probes.polys.iter().filter(|p| p.nvars() <= space.dim()).cloned().collect();
            polys.push(default_probe(space.dim()));
            for psi in polys {
                checked += 1;
                let f = CylFunction { space: space.clone(), poly: psi.clone() };
                let lhs = match cyl::combo_apply(scene, phi, &f) {
                    Ok(o) => o.poly,
                    Err(e) => return Outcome::fail(checked, format!("system {k}: {e}")),
                };
                let mut rhs = (0..space.dim())
                    .fold(Poly::zero(), |acc, i| &acc + &psi.derivative(i).scale(&constants[i]));
                if injected && checked == 1 {
                    rhs = &rhs + &Poly::constant(Rational::one());
                }
                if lhs != rhs {
                    return Outcome::fail(checked, format!("system {k}: momentum {j} on {psi} breaks the chain rule"));
                }
            }
        }
    }
    Outcome::pass(checked)
}

fn check_4(scene: &Scene, sample: &[FiniteSystem], injected: bool) -> Outcome {
    for (k, sys) in sample.iter().enumerate() {
        let g = match sys.g(scene) {
            Ok(g) => g,
            Err(e) => return Outcome::fail(k + 1, format!("system {k}: {e}")),
        };
        let g = if injected && k == 0 {
            let mut e = g.entries.clone();
            let n = e.len();
            if n >= 2 {
                e[n - 1] = e[0].clone();
            } else if n == 1 {
                e[0] = vec![Rational::zero()];
            }
            GMatrix::from_entries(e)
        } else {
            g
        };
        if !g.is_nondegenerate() {
            return Outcome::fail(k + 1, format!("system {k}: G is singular"));
        }
    }
    Outcome::pass(sample.len())
}

fn check_5(scene: &Scene, sample: &[FiniteSystem], injected: bool) -> Outcome {
    for (k, sys) in sample.iter().enumerate() {
        let frame = sys.frame();
        let chains: Vec<Chain> = frame.chains().cloned().collect();
        let other = if injected && k == 0 {
            let mut hoops = frame.hoops().to_vec();
            hoops[0].chain = hoops[0].chain.scale(2);
            HoopSet::uncertified(hoops)
        } else {
            match independent_basis_of_chains(scene, &chains) {
                Ok(d) => d.basis,
                Err(e) => return Outcome::fail(k + 1, format!("system {k}: {e}")),
            }
        };
        if same_reduced_space(frame, &other) && !(hoopset_geq(frame, &other) && hoopset_geq(&other, frame)) {
            return Outcome::fail(k + 1, format!("system {k}: equal reduced spaces but frames are not mutually ≥"));
        }
    }
    Outcome::pass(sample.len())
}

fn check_6(scene: &Scene, sample: &[FiniteSystem], injected: bool, hoops: bool) -> Outcome {
    let mut checked = 0;
    let a = probe_field(scene);
    for (i, fine) in sample.iter().enumerate() {
        for (j, coarse) in sample.iter().enumerate() {
            if !fine.nondegenerate() || !coarse.nondegenerate() {
                continue;
            }
            let Ok(mut w) = system_geq(scene, fine, coarse) else { continue };
            checked += 1;
            if injected && checked == 1 {
                if hoops {
                    w.hoop_matrix[0][0] += 1;
                } else {
                    w.momentum_coefficients[0][0] += Rational::one();
                }
            }
            let ok = if hoops {
                let x = cyl::coordinate_map(&ReducedConfigSpace::hoops(fine.frame().clone()), &a);
                coarse.frame().chains().zip(&w.hoop_matrix).all(|(c, row)| {
                    let combined: Rational = row.iter().zip(&x).map(|(n, xi)| rational::rat(*n) * xi).sum();
                    combined == cyl::kappa_eval(c, &a)
                })
            } else {
                coarse.momenta().basis().iter().zip(&w.momentum_coefficients).all(|(target, row)| {
                    let built = fine
                        .momenta()
                        .basis()
                        .iter()
                        .zip(row)
                        .fold(FluxCombo::zero(), |acc, (c, x)| acc.add(&c.scale(x)));
                    &built == target
                })
            };
            if !ok {
                return Outcome::fail(checked, format!("pair ({i} ≥ {j}): witness does not reproduce the coarse system"));
            }
        }
    }
    Outcome::pass(checked)
}
