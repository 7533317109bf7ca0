//! End-to-end checks shared by the focused integration tests and the
//! acceptance runner. Each returns a one-line summary or the first failure.

use std::collections::BTreeMap;

use hoopcalc::cyl::{self, CylFunction, FluxCombo, MomentumSpace};
use hoopcalc::fixtures;
use hoopcalc::flux::{self, FluxError};
use hoopcalc::gauge::{self, Reduction};
use hoopcalc::hoop::{decompose_combination, hoopset_geq, independent_basis, independent_basis_of_chains, HoopError};
use hoopcalc::poly::Poly;
use hoopcalc::rational::{rat, HalfInt};
use hoopcalc::substrate::{GaugeFunction, Path};
use hoopcalc::systems::{
    common_refinement, extend_to_system, is_nondegenerate, synthesize_dual_faces, system_geq,
    verify_assumptions, verify_assumptions_with_fault, Assumption, FiniteSystem, OrderSide, Probes, SystemsError,
};
use hoopcalc::{chain_of, Chain, Hoop, HoopSet, Loop, Rational, Scene};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::*;

pub type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

pub fn epsilon_examples() -> Outcome {
    let s = fixtures::boundary_loop();
    let (face, l) = (s.face(&"S".into()).unwrap(), s.loop_named("l").unwrap());
    let half = HalfInt::from_twice(1);
    ensure!(flux::epsilon_loop(face, l) == half, "boundary loop: got {}", flux::epsilon_loop(face, l));
    ensure!(flux::epsilon_hoop(face, &chain_of(l.path())) == half, "boundary loop chain route disagrees");

    let s = fixtures::sphere_times_circle();
    let l = s.loop_named("l").unwrap();
    let up = flux::epsilon_loop(s.face(&"S".into()).unwrap(), l);
    let down = flux::epsilon_loop(s.face(&"S-".into()).unwrap(), l);
    ensure!(up == HalfInt::from_int(1) && down == HalfInt::from_int(-1), "circle: got {up} and {down}");
    let slice = flux::epsilon_loop(s.face(&"S".into()).unwrap(), s.loop_named("m").unwrap());
    ensure!(slice.is_zero(), "loop inside the slice: got {slice}");

    let s = fixtures::ball_sphere();
    let loops: Vec<Loop> = s.loops().map(|(_, l)| l.clone()).collect();
    let verdict = flux::face_validity(s.face(&"S".into()).unwrap(), &loops);
    ensure!(verdict == Err(FluxError::NoWitness("S".into())), "sphere around a ball: {verdict:?}");
    Ok("boundary loop 1/2, circle +1/-1, ball sphere has no witness".into())
}

pub fn representative_independence(seed: u64, target: usize) -> Outcome {
    let mut rng = rng(seed);
    let mut rewrites = 0;
    let mut scenes = 0;
    while rewrites < target {
        scenes += 1;
        let nv = rng.gen_range(3..=7);
        let mut scene = { let k = rng.gen_range(2..=6); random_complex(&mut rng, nv, k) };
        for k in 0..3 {
            let f = random_face(&mut rng, &scene, &format!("F{k}"));
            scene.add_face(f).unwrap();
        }
        let original = random_loop(&mut rng, &scene);
        let start = scene.clone();
        let faces: Vec<_> = start.faces().map(|f| f.id.clone()).collect();
        let reference: Vec<HalfInt> =
            faces.iter().map(|f| flux::epsilon_loop(start.face(f).unwrap(), &original)).collect();
        let mut l = original.clone();
        for _ in 0..rng.gen_range(1..=6) {
            (scene, l) = rewrite(&mut rng, &scene, &l);
            rewrites += 1;
            ensure!(
                chain_of(l.path()) == scene.resolve_chain(&chain_of(original.path())),
                "rewrite changed the hoop of {:?}",
                original.path().tokens()
            );
            for (f, want) in faces.iter().zip(&reference) {
                let face = scene.face(f).unwrap();
                let by_loop = flux::epsilon_loop(face, &l);
                let by_chain = flux::epsilon_hoop(face, &chain_of(l.path()));
                ensure!(by_loop == *want, "face {f}: ε moved from {want} to {by_loop} on {:?}", l.path().tokens());
                ensure!(by_chain == by_loop, "face {f}: chain route {by_chain} vs loop route {by_loop}");
            }
        }
        // split the final representative into consecutive edges
        let steps = l.path().steps().to_vec();
        let mut cuts: Vec<usize> = (1..steps.len()).filter(|_| rng.gen_bool(0.4)).collect();
        cuts.insert(0, 0);
        cuts.push(steps.len());
        for f in &faces {
            let face = scene.face(f).unwrap();
            let twice: i64 = cuts
                .windows(2)
                .map(|w| flux::epsilon_edge(face, &Path::new(&scene, steps[w[0]..w[1]].to_vec()).unwrap()))
                .sum();
            ensure!(HalfInt::from_twice(twice) == flux::epsilon_loop(face, &l), "edge sum disagrees on face {f}");
        }
    }
    Ok(format!("{rewrites} rewrites over {scenes} random scenes, ε constant and routes agree"))
}

fn random_basis(rng: &mut ChaCha8Rng) -> (Scene, HoopSet) {
    loop {
        let scene = if rng.gen_bool(0.3) {
            let n = rng.gen_range(1..=5);
            flower(rng, n).0
        } else {
            let nv = rng.gen_range(3..=6);
            { let k = rng.gen_range(1..=5); random_complex(rng, nv, k) }
        };
        let loops: Vec<Loop> = (0..rng.gen_range(1..=4)).map(|_| random_loop(rng, &scene)).collect();
        let basis = independent_basis(&scene, &loops).unwrap().basis;
        if !basis.is_empty() {
            return (scene, basis);
        }
    }
}

pub fn integer_coefficient_oracle(seed: u64, trials: usize) -> Outcome {
    let mut rng = rng(seed);
    let (mut integral, mut fractional, mut outside) = (0, 0, 0);
    for _ in 0..trials {
        let (scene, basis) = random_basis(&mut rng);
        let chains: Vec<Chain> = basis.chains().cloned().collect();
        let kind = rng.gen_range(0..3);
        let target: BTreeMap<_, Rational> = if kind == 2 {
            chain_of(random_loop(&mut rng, &scene).path()).to_rational()
        } else {
            let mut t: BTreeMap<_, Rational> = BTreeMap::new();
            for c in &chains {
                let a = if kind == 0 { rat(rng.gen_range(-4..=4)) } else { random_rational(&mut rng) };
                for (s, k) in c.iter() {
                    *t.entry(s.clone()).or_insert_with(|| rat(0)) += &a * rat(*k);
                }
            }
            t.retain(|_, v| *v != rat(0));
            t
        };
        let mut segs = segments_of(&chains);
        segs.extend(target.keys().cloned());
        segs.sort();
        segs.dedup();
        let rows: Vec<Vec<Rational>> = chains.iter().map(|c| chain_vector(c, &segs)).collect();
        let t: Vec<Rational> = segs.iter().map(|s| target.get(s).cloned().unwrap_or_else(|| rat(0))).collect();
        let oracle = oracle_solve(&rows, &t);
        let got = decompose_combination(&target, &basis);
        match (&oracle, &got) {
            (None, Err(HoopError::NotInSpan { .. })) => outside += 1,
            (Some(x), Ok(n)) if x.iter().all(is_integer) => {
                ensure!(x.iter().zip(n).all(|(a, b)| *a == rat(*b)), "coefficients differ: {x:?} vs {n:?}");
                integral += 1;
            }
            (Some(x), Err(HoopError::NonIntegral { .. })) if !x.iter().all(is_integer) => fractional += 1,
            _ => return Err(format!("oracle {oracle:?} but decomposition {got:?}")),
        }
    }
    ensure!(integral > 0 && fractional > 0 && outside > 0, "poor coverage: {integral}/{fractional}/{outside}");
    Ok(format!("{trials} targets: {integral} integral, {fractional} fractional, {outside} outside the span"))
}

fn oracle_geq(fine: &HoopSet, coarse: &HoopSet) -> bool {
    let segs = segments_of(fine.chains().chain(coarse.chains()));
    let rows: Vec<Vec<Rational>> = fine.chains().map(|c| chain_vector(c, &segs)).collect();
    coarse.chains().all(|c| match oracle_solve(&rows, &chain_vector(c, &segs)) {
        Some(x) => x.iter().all(is_integer),
        None => false,
    })
}

pub fn hoopset_order_oracle(seed: u64, pairs: usize) -> Outcome {
    let mut rng = rng(seed);
    let (mut yes, mut no) = (0, 0);
    while yes + no < pairs {
        let (scene, fine) = random_basis(&mut rng);
        let coarse = match rng.gen_range(0..3) {
            0 => {
                // integer combinations of the fine hoops, re-certified
                let chains: Vec<Chain> = (0..rng.gen_range(1..=3))
                    .map(|_| {
                        fine.chains().fold(Chain::zero(), |acc, c| &acc + &c.scale(rng.gen_range(-2..=2)))
                    })
                    .filter(|c| !c.is_empty())
                    .collect();
                if chains.is_empty() {
                    continue;
                }
                independent_basis_of_chains(&scene, &chains).unwrap().basis
            }
            1 => {
                let loops: Vec<Loop> = (0..rng.gen_range(1..=3)).map(|_| random_loop(&mut rng, &scene)).collect();
                independent_basis(&scene, &loops).unwrap().basis
            }
            _ => {
                let mut hoops = fine.hoops().to_vec();
                hoops.shuffle(&mut rng);
                hoops.truncate(rng.gen_range(1..=hoops.len()));
                HoopSet::certify(hoops).unwrap()
            }
        };
        if coarse.is_empty() || coarse.certificate().is_none() {
            continue;
        }
        let want = oracle_geq(&fine, &coarse);
        ensure!(hoopset_geq(&fine, &coarse) == want, "hoopset_geq disagrees with the oracle (oracle says {want})");
        if want {
            yes += 1;
        } else {
            no += 1;
        }
    }
    ensure!(yes > 0 && no > 0, "coverage: {yes} comparable, {no} not");
    Ok(format!("{} certified pairs: {yes} comparable, {no} not", yes + no))
}

pub fn dual_faces_identity(seed: u64) -> Outcome {
    let mut rng = rng(seed);
    let mut frames = 0;
    for n in 1..=12 {
        for round in 0..3 {
            let (scene, loops) = flower(&mut rng, n);
            let mut scene = scene;
            if round > 0 {
                for k in 0..2 {
                    let f = random_face(&mut rng, &scene, &format!("X{k}"));
                    scene.add_face(f).unwrap();
                }
            }
            let mut loops = loops;
            if round == 2 {
                // mix petals so the exclusive segments are not the obvious ones
                let extra = loops[0].then(loops.last().unwrap()).unwrap();
                loops.push(extra);
            }
            let basis = independent_basis(&scene, &loops).unwrap().basis;
            ensure!(basis.len() == n, "flower of {n} petals gave a basis of {}", basis.len());
            let (next, faces) = synthesize_dual_faces(&scene, &basis).unwrap();
            let momenta = MomentumSpace::new(faces.iter().map(|f| FluxCombo::single(f.id.clone())).collect());
            let g = cyl::g_matrix(&next, &momenta, &basis.rebase(&next)).unwrap();
            ensure!(g.is_identity(), "N = {n}: G is {:?}", g.entries);
            frames += 1;
        }
    }
    Ok(format!("G = identity for {frames} frames with N = 1..12"))
}

/// A random nondegenerate system on `scene`, possibly using existing faces.
fn random_system(rng: &mut ChaCha8Rng, scene: &Scene) -> Result<(Scene, FiniteSystem), SystemsError> {
    loop {
        let loops: Vec<Loop> = (0..rng.gen_range(1..=3)).map(|_| random_loop(rng, scene)).collect();
        if rng.gen_bool(0.5) {
            let basis = independent_basis(scene, &loops)?.basis;
            let faces: Vec<_> = scene.faces().map(|f| f.id.clone()).collect();
            if basis.is_empty() || faces.len() < basis.len() {
                continue;
            }
            let momenta: Vec<FluxCombo> = (0..basis.len())
                .map(|_| {
                    let terms = (0..rng.gen_range(1..=2))
                        .map(|_| (rat(rng.gen_range(1..=3)), faces.choose(rng).unwrap().clone()));
                    FluxCombo::from_terms(terms)
                })
                .collect();
            let sys = FiniteSystem::new(scene, MomentumSpace::new(momenta), basis)?;
            if sys.nondegenerate() {
                return Ok((scene.clone(), sys));
            }
        } else {
            let ext = extend_to_system(scene, &loops)?;
            return Ok((ext.scene, ext.system));
        }
    }
}

fn random_scene_with_faces(rng: &mut ChaCha8Rng) -> Scene {
    let nv = rng.gen_range(3..=6);
    let mut scene = { let k = rng.gen_range(2..=5); random_complex(rng, nv, k) };
    for k in 0..rng.gen_range(1..=3) {
        let f = random_face(rng, &scene, &format!("F{k}"));
        scene.add_face(f).unwrap();
    }
    scene
}

pub fn directedness(seed: u64, pairs: usize) -> Outcome {
    let mut rng = rng(seed);
    let mut incomparable = 0;
    for _ in 0..pairs {
        let scene = random_scene_with_faces(&mut rng);
        let (scene, a) = random_system(&mut rng, &scene).map_err(|e| e.to_string())?;
        let (scene, b) = random_system(&mut rng, &scene).map_err(|e| e.to_string())?;
        let a = a.rebase(&scene);
        if system_geq(&scene, &a, &b).is_err() && system_geq(&scene, &b, &a).is_err() {
            incomparable += 1;
        }
        let (scene, joint) = common_refinement(&scene, &a, &b).map_err(|e| format!("refinement failed: {e}"))?;
        ensure!(is_nondegenerate(&scene, &joint), "refinement is degenerate");
        for small in [&a, &b] {
            let w = system_geq(&scene, &joint, small).map_err(|e| format!("refinement not above an input: {e}"))?;
            ensure!(w.verify(&scene, &joint, small), "order witness does not verify");
        }
    }
    ensure!(incomparable > 0, "no incomparable pair was generated");
    Ok(format!("{pairs} pairs ({incomparable} mutually incomparable), every refinement nondegenerate and above both"))
}

/// A scene with several systems and probes every assumption can bite on.
pub fn assumption_sample(rng: &mut ChaCha8Rng) -> (Scene, Vec<FiniteSystem>, Probes) {
    loop {
        let mut scene = random_scene_with_faces(rng);
        let loops: Vec<Loop> = (0..4).map(|_| random_loop(rng, &scene)).collect();
        let faces: Vec<_> = scene
            .faces()
            .filter(|f| flux::face_validity(f, &loops).is_ok())
            .map(|f| f.id.clone())
            .collect();
        if faces.is_empty() {
            continue;
        }
        let mut sample = Vec::new();
        for _ in 0..3 {
            let (next, sys) = random_system(rng, &scene).unwrap();
            scene = next;
            sample.push(sys);
        }
        let polys = (0..2).map(|_| random_poly(rng, 2, 3, 2)).collect();
        let sample = sample.iter().map(|s| s.rebase(&scene)).collect();
        let loops = loops.iter().map(|l| scene.resolve_loop(l)).collect();
        return (scene, sample, Probes { loops, polys, faces });
    }
}

pub fn assumption_suite(seed: u64, samples: usize) -> Outcome {
    let mut rng = rng(seed);
    for k in 0..samples {
        let (scene, sample, probes) = assumption_sample(&mut rng);
        let report = verify_assumptions(&scene, &sample, &probes);
        for c in &report.checks {
            ensure!(c.passed, "sample {k}: assumption {} failed: {}", c.assumption.label(), c.detail);
            ensure!(c.checked > 0, "sample {k}: assumption {} examined nothing", c.assumption.label());
        }
        for fault in Assumption::ALL {
            let r = verify_assumptions_with_fault(&scene, &sample, &probes, Some(fault));
            for c in &r.checks {
                ensure!(
                    c.passed == (c.assumption != fault),
                    "sample {k}: fault in {} flipped check {} to passed = {}",
                    fault.label(),
                    c.assumption.label(),
                    c.passed
                );
            }
        }
    }
    let empty = verify_assumptions(&Scene::new(), &[], &Probes::default());
    ensure!(empty.all_passed() && !empty.warnings.is_empty(), "empty input must pass vacuously with warnings");
    Ok(format!("1a to 6b pass on {samples} samples, each of 9 injected faults is caught alone"))
}

fn invariant_on(rng: &mut ChaCha8Rng, loops: &[gauge::FundamentalLoop]) -> (Poly, Poly) {
    let psi = random_poly(rng, loops.len(), 3, 2);
    let subs: Vec<Poly> = loops
        .iter()
        .map(|l| Poly::linear(&l.edge_coefficients.iter().map(|k| rat(*k)).collect::<Vec<_>>()))
        .collect();
    let big = psi.substitute(&subs);
    (psi, big)
}

pub fn maximal_tree_reduction(seed: u64, graphs: usize, samples: usize) -> Outcome {
    let mut rng = rng(seed);
    let mut trees = 0;
    for k in 0..graphs {
        let tree_only = k % 5 == 0;
        let (scene, g) = if tree_only {
            let nv = rng.gen_range(2..=6);
            random_tree_graph(&mut rng, nv)
        } else {
            let nv = rng.gen_range(2..=6);
            { let k = rng.gen_range(1..=8); random_graph(&mut rng, nv, k) }
        };
        let tree = gauge::maximal_tree(&g);
        let loops = gauge::loop_basis(&scene, &g, &tree).map_err(|e| e.to_string())?;
        let components = tree.roots().len();
        ensure!(tree.tree_edges().len() == g.vertices().len() - components, "graph {k}: tree is not spanning");
        ensure!(loops.len() == g.len() - tree.tree_edges().len(), "graph {k}: wrong number of loops");

        let (psi, big) = invariant_on(&mut rng, &loops);
        let big_f = CylFunction::new(g.space(), big.clone()).unwrap();
        ensure!(gauge::is_gauge_invariant(&big_f, &g).unwrap(), "graph {k}: loop polynomial not invariant");
        let reduced = gauge::gauge_reduce(&scene, &big_f, &g).map_err(|e| e.to_string())?;
        if let Reduction::Reduced { psi: r, .. } = &reduced {
            ensure!(r.poly == psi, "graph {k}: reduction does not recover the loop polynomial");
        }
        let space = g.space();
        let edge_chains: Vec<Chain> = g.edges().iter().map(|(_, p)| chain_of(p)).collect();
        let loop_chains: Vec<Chain> = loops.iter().map(|l| chain_of(l.path.path())).collect();
        for _ in 0..samples {
            let a = random_field(&mut rng, &scene);
            let theta = gauge::theta_assignment(&g, &tree, &a);
            let moved = gauge::gauge_transform(&scene, &a, &theta);
            for (i, c) in edge_chains.iter().enumerate() {
                if tree.contains(i) {
                    let x = cyl::kappa_eval(c, &moved);
                    ensure!(x == rat(0), "graph {k}: tree edge {} keeps κ = {x}", g.edges()[i].0);
                }
            }
            let loop_x: Vec<Rational> = loop_chains.iter().map(|c| cyl::kappa_eval(c, &a)).collect();
            for (l, x) in loops.iter().zip(&loop_x) {
                let after = cyl::kappa_eval(&edge_chains[l.edge], &moved);
                ensure!(*x == after, "graph {k}: non-tree edge does not carry its loop value");
            }
            let lhs = big.eval(&cyl::coordinate_map(&space, &a));
            let rhs = match &reduced {
                Reduction::Constant(c) => c.clone(),
                Reduction::Reduced { psi: r, .. } => r.poly.eval(&loop_x),
            };
            ensure!(lhs == rhs, "graph {k}: round trip gives {rhs}, expected {lhs}");
        }
        if loops.is_empty() {
            trees += 1;
            ensure!(matches!(reduced, Reduction::Constant(_)), "graph {k}: tree graph reduced to a non-constant");
        }
        let single = CylFunction::new(g.space(), Poly::var(0)).unwrap();
        ensure!(
            gauge::gauge_reduce(&scene, &single, &g) == Err(gauge::GaugeError::NotInvariant),
            "graph {k}: a single edge variable passed as invariant"
        );
    }
    ensure!(trees > 0, "no tree-only graph was generated");
    Ok(format!("{graphs} graphs ({trees} trees) x {samples} field samples: tree edges zeroed, round trip exact"))
}

pub fn flux_gauge_invariance(seed: u64, triples: usize) -> Outcome {
    let mut rng = rng(seed);
    for k in 0..triples {
        let nv = rng.gen_range(2..=5);
        let (mut scene, g) = { let k = rng.gen_range(1..=6); random_graph(&mut rng, nv, k) };
        let face = random_face(&mut rng, &scene, "S");
        scene.add_face(face).unwrap();
        let psi = CylFunction::new(g.space(), random_poly(&mut rng, g.len(), 3, 3)).unwrap();
        let mut f = GaugeFunction::new();
        for v in g.vertices() {
            f.set(v, random_rational(&mut rng));
        }
        ensure!(
            gauge::flux_gauge_invariance_check(&scene, &"S".into(), &psi, &f, &g).unwrap(),
            "triple {k}: flux does not commute with the gauge shift"
        );
    }
    Ok(format!("{triples} random (face, polynomial, gauge) triples commute exactly"))
}

pub fn annihilator_dimension(seed: u64, systems: usize) -> Outcome {
    let mut rng = rng(seed);
    let mut checked = 0;
    while checked < systems {
        let nv = rng.gen_range(2..=5);
        let (mut scene, g) = { let k = rng.gen_range(2..=7); random_graph(&mut rng, nv, k) };
        scene.add_graph(g.clone());
        let (scene, duals) = synthesize_dual_faces(&scene, &g.frame()).unwrap();
        let g = scene.graph_named("g").unwrap().clone();
        let n = g.len();
        // unit upper-triangular mixing of the duals keeps G invertible
        let momenta = MomentumSpace::new(
            (0..n)
                .map(|i| {
                    let mut c = FluxCombo::single(duals[i].id.clone());
                    if i + 1 < n && rng.gen_bool(0.5) {
                        c = c.add(&FluxCombo::single(duals[i + 1].id.clone()).scale(&random_rational(&mut rng)));
                    }
                    c
                })
                .collect(),
        );
        let sys = FiniteSystem::new(&scene, momenta, g.frame()).unwrap();
        ensure!(sys.nondegenerate(), "dual faces over a graph must give a nondegenerate system");
        let tree = gauge::maximal_tree(&g);
        let m = g.len() - tree.tree_edges().len();
        match gauge::constrain_system(&scene, &sys, &g, None) {
            Err(gauge::GaugeError::NoLoops(_)) => ensure!(m == 0, "NoLoops with {m} loops"),
            Err(e) => return Err(e.to_string()),
            Ok(c) => {
                ensure!(c.annihilator.len() == n - m, "dim F0 = {} but N - M = {}", c.annihilator.len(), n - m);
                ensure!(c.system.nondegenerate(), "constrained system is degenerate");
                checked += 1;
            }
        }
    }

    let s = fixtures::triangle();
    let lam = s.system_named("lam").unwrap().build(&s).unwrap();
    let lam2 = s.system_named("lam2").unwrap().build(&s).unwrap();
    let (gamma, gamma2) = (s.graph_named("gamma").unwrap(), s.graph_named("gamma2").unwrap());
    let c = gauge::constrain_system(&s, &lam, gamma, None).unwrap();
    ensure!(c.chosen == vec![1, 2], "triangle default complement is {:?}, expected S2, S3", c.chosen);
    let probe = gauge::order_preservation_probe(&s, (&lam, gamma, Some(&[1, 2])), (&lam2, gamma2, Some(&[0])))
        .map_err(|e| e.to_string())?;
    ensure!(probe.unconstrained.is_ok(), "unconstrained triangle pair must be comparable");
    ensure!(
        matches!(probe.constrained, Err(SystemsError::NotComparable { side: OrderSide::Momenta, .. })),
        "hints (S1 | S2, S3) must be incomparable: {:?}",
        probe.constrained
    );
    let probe = gauge::order_preservation_probe(&s, (&lam, gamma, Some(&[1, 2])), (&lam2, gamma2, Some(&[1])))
        .map_err(|e| e.to_string())?;
    ensure!(probe.constrained.is_ok(), "hint S2 must be comparable: {:?}", probe.constrained);
    Ok(format!("dim F0 = N - M on {systems} systems; triangle: incomparable with S1, comparable with S2"))
}

pub fn two_edge_rank() -> Outcome {
    let s = fixtures::two_edge_circle();
    let probe = [chain_of(s.loop_named("l").unwrap().path()), chain_of(s.loop_named("probe").unwrap().path())];
    let frame = HoopSet::certify(vec![Hoop::from_chain("l", probe[0].clone()), Hoop::from_chain("p", probe[1].clone())]);
    ensure!(frame.is_ok(), "probe frame must be independent");
    let rank = gauge::restricted_flux_rank(&s, &["S1".into(), "S2".into()], &probe).map_err(|e| e.to_string())?;
    ensure!(rank == 2, "restricted flux rank is {rank}");
    Ok("restricted fluxes of S1, S2 have ε-row rank 2".into())
}
