//! Random scene generators and independent oracles shared by the
//! integration tests.
#![allow(dead_code)]

pub mod criteria;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use hoopcalc::gauge::Graph;
use hoopcalc::poly::Poly;
use hoopcalc::rational::{rat, ratio};
use hoopcalc::substrate::{Crossing, Direction, End, Side, Step};
use hoopcalc::{Chain, Face, Loop, Path, Rational, Scene, SegmentId, VertexId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.gen_range(-9..=9), rng.gen_range(1..=5))
}

/// Connected complex on `nv` vertices: a random spanning tree plus `extra`
/// further segments.
pub fn random_complex(rng: &mut ChaCha8Rng, nv: usize, extra: usize) -> Scene {
    let mut s = Scene::new();
    let v = |i: usize| format!("v{i}");
    let mut n = 0;
    let mut add = |s: &mut Scene, a: usize, b: usize, rng: &mut ChaCha8Rng| {
        let (a, b) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
        s.add_segment(format!("s{n:02}"), v(a), v(b)).unwrap();
        n += 1;
    };
    for i in 1..nv {
        let j = rng.gen_range(0..i);
        add(&mut s, i, j, rng);
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..nv);
        let mut b = rng.gen_range(0..nv);
        while b == a {
            b = rng.gen_range(0..nv);
        }
        add(&mut s, a, b, rng);
    }
    s
}

fn adjacency(scene: &Scene) -> BTreeMap<VertexId, Vec<Step>> {
    let mut adj: BTreeMap<VertexId, Vec<Step>> = BTreeMap::new();
    for seg in scene.segments() {
        adj.entry(seg.source.clone()).or_default().push(Step::forward(seg.id.clone()));
        adj.entry(seg.target.clone()).or_default().push(Step::reverse(seg.id.clone()));
    }
    adj
}

fn shortest_steps(scene: &Scene, adj: &BTreeMap<VertexId, Vec<Step>>, from: &VertexId, to: &VertexId) -> Vec<Step> {
    let mut prev: BTreeMap<VertexId, (VertexId, Step)> = BTreeMap::new();
    let mut seen = BTreeSet::from([from.clone()]);
    let mut queue = VecDeque::from([from.clone()]);
    while let Some(u) = queue.pop_front() {
        if &u == to {
            break;
        }
        for st in &adj[&u] {
            let (_, w) = scene.step_endpoints(st).unwrap();
            if seen.insert(w.clone()) {
                prev.insert(w.clone(), (u.clone(), st.clone()));
                queue.push_back(w);
            }
        }
    }
    let mut out = Vec::new();
    let mut cur = to.clone();
    while &cur != from {
        let (p, st) = prev[&cur].clone();
        out.push(st);
        cur = p;
    }
    out.reverse();
    out
}

/// A random walk closed up by a shortest path home.
pub fn random_loop(rng: &mut ChaCha8Rng, scene: &Scene) -> Loop {
    let adj = adjacency(scene);
    let vertices: Vec<&VertexId> = adj.keys().collect();
    let start = (*vertices.choose(rng).unwrap()).clone();
    loop {
        let mut steps = Vec::new();
        let mut cur = start.clone();
        for _ in 0..rng.gen_range(2..8) {
            let st = adj[&cur].choose(rng).unwrap().clone();
            cur = scene.step_endpoints(&st).unwrap().1;
            steps.push(st);
        }
        steps.extend(shortest_steps(scene, &adj, &cur, &start));
        let l = Loop::new(Path::new(scene, steps).unwrap()).unwrap();
        if !hoopcalc::chain_of(l.path()).is_empty() {
            return l;
        }
    }
}

pub fn random_crossing(rng: &mut ChaCha8Rng) -> Crossing {
    match rng.gen_range(0..10) {
        0..=4 => Crossing::Disjoint,
        5 => Crossing::InClosure,
        _ => Crossing::Transversal {
            end: if rng.gen_bool(0.5) { End::AtSource } else { End::AtTarget },
            side: if rng.gen_bool(0.5) { Side::Above } else { Side::Below },
        },
    }
}

pub fn random_face(rng: &mut ChaCha8Rng, scene: &Scene, id: &str) -> Face {
    let mut f = Face::new(id);
    for seg in scene.segments() {
        f.set(seg.id.clone(), random_crossing(rng));
    }
    f
}

/// A random rewrite of a loop's representative that keeps its hoop:
/// a backtrack, a rotation or a refinement of a traversed segment.
pub fn rewrite(rng: &mut ChaCha8Rng, scene: &Scene, l: &Loop) -> (Scene, Loop) {
    let steps = l.path().steps();
    match rng.gen_range(0..3) {
        0 => {
            let at = rng.gen_range(0..=steps.len());
            let here = if at == steps.len() {
                l.path().target().clone()
            } else {
                scene.step_endpoints(&steps[at]).unwrap().0
            };
            let adj = adjacency(scene);
            let st = adj[&here].choose(rng).unwrap().clone();
            let p = l.path().with_backtrack(scene, at, &st.segment, st.direction).unwrap();
            (scene.clone(), Loop::new(p).unwrap())
        }
        1 => {
            let k = rng.gen_range(0..steps.len());
            (scene.clone(), Loop::new(l.path().rotate(scene, k).unwrap()).unwrap())
        }
        _ => {
            let seg = steps.choose(rng).unwrap().segment.clone();
            let (next, _) = scene.refine_segment(&seg).unwrap();
            let moved = next.resolve_loop(l);
            (next, moved)
        }
    }
}

/// `nv` vertices and `ne` edges, each edge a chain of 1 to 3 fresh segments.
pub fn random_graph(rng: &mut ChaCha8Rng, nv: usize, ne: usize) -> (Scene, Graph) {
    let mut s = Scene::new();
    let mut edges = Vec::new();
    for e in 0..ne {
        let a = rng.gen_range(0..nv);
        let mut b = rng.gen_range(0..nv);
        while b == a {
            b = rng.gen_range(0..nv);
        }
        let pieces = rng.gen_range(1..=3);
        let mut steps = Vec::new();
        let mut cur = format!("v{a}");
        for k in 0..pieces {
            let next = if k + 1 == pieces { format!("v{b}") } else { format!("m{e}_{k}") };
            let id = format!("g{e:02}_{k}");
            s.add_segment(id.as_str(), cur.as_str(), next.as_str()).unwrap();
            steps.push(Step::forward(id));
            cur = next;
        }
        edges.push((format!("e{e:02}"), Path::new(&s, steps).unwrap()));
    }
    let g = Graph::new(&s, "g", edges).unwrap();
    (s, g)
}

/// Sparse random polynomial: each term touches at most three variables.
pub fn random_poly(rng: &mut ChaCha8Rng, nvars: usize, terms: usize, max_deg: u32) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..terms {
        let mut t = Poly::constant(random_rational(rng));
        if nvars > 0 {
            for _ in 0..rng.gen_range(0..=3) {
                let i = rng.gen_range(0..nvars);
                t = &t * &Poly::var(i).pow(rng.gen_range(1..=max_deg.max(1)));
            }
        }
        p = &p + &t;
    }
    p
}

pub fn random_field(rng: &mut ChaCha8Rng, scene: &Scene) -> hoopcalc::substrate::FieldSample {
    let mut a = hoopcalc::substrate::FieldSample::new();
    for seg in scene.segments() {
        a.set(seg.id.clone(), random_rational(rng));
    }
    a
}

/// `n` petals of 2 or 3 segments through a common base vertex, each petal
/// possibly reversed.
pub fn flower(rng: &mut ChaCha8Rng, n: usize) -> (Scene, Vec<Loop>) {
    let mut s = Scene::new();
    let mut loops = Vec::new();
    for i in 0..n {
        let k = rng.gen_range(2..=3);
        let mut ids = Vec::new();
        for j in 0..k {
            let a = if j == 0 { "o".to_string() } else { format!("p{i}_{j}") };
            let b = if j + 1 == k { "o".to_string() } else { format!("p{i}_{}", j + 1) };
            let id = format!("f{i:02}_{j}");
            s.add_segment(id.as_str(), a.as_str(), b.as_str()).unwrap();
            ids.push(id);
        }
        let l = Loop::parse(&s, &ids.join(" ")).unwrap();
        loops.push(if rng.gen_bool(0.5) { l.reversed() } else { l });
    }
    (s, loops)
}

pub fn segments_of<'a>(chains: impl IntoIterator<Item = &'a Chain>) -> Vec<SegmentId> {
    let set: BTreeSet<SegmentId> = chains.into_iter().flat_map(|c| c.support().cloned()).collect();
    set.into_iter().collect()
}

pub fn chain_vector(c: &Chain, segs: &[SegmentId]) -> Vec<Rational> {
    segs.iter().map(|s| rat(c.get(s))).collect()
}

/// Solves Σ x_i rows[i] = target by Gauss–Jordan elimination on the
/// transposed augmented system. Returns one solution if any exists.
pub fn oracle_solve(rows: &[Vec<Rational>], target: &[Rational]) -> Option<Vec<Rational>> {
    let n = rows.len();
    let m = target.len();
    let zero = rat(0);
    // m equations in n unknowns
    let mut a: Vec<Vec<Rational>> =
        (0..m).map(|r| (0..n).map(|c| rows[c][r].clone()).chain([target[r].clone()]).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m).find(|&i| a[i][c] != zero) else { continue };
        a.swap(r, p);
        let inv = rat(1) / a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..m {
            if i != r && a[i][c] != zero {
                let f = a[i][c].clone();
                for j in 0..=n {
                    let d = a[r][j].clone() * f.clone();
                    a[i][j] = a[i][j].clone() - d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if a[r..].iter().any(|row| row[n] != zero) {
        return None;
    }
    let mut x = vec![zero; n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = a[i][n].clone();
    }
    Some(x)
}

pub fn is_integer(r: &Rational) -> bool {
    r.is_integer()
}

pub fn direction_of(rng: &mut ChaCha8Rng) -> Direction {
    if rng.gen_bool(0.5) {
        Direction::Forward
    } else {
        Direction::Reverse
    }
}

/// A random spanning tree on `nv` vertices: vertex i joins a random earlier one.
pub fn random_tree_graph(rng: &mut ChaCha8Rng, nv: usize) -> (Scene, Graph) {
    let mut s = Scene::new();
    let mut edges = Vec::new();
    for i in 1..nv {
        let j = rng.gen_range(0..i);
        let (a, b) = if rng.gen_bool(0.5) { (i, j) } else { (j, i) };
        let id = format!("t{i:02}");
        s.add_segment(id.as_str(), format!("v{a}"), format!("v{b}")).unwrap();
        edges.push((format!("e{i:02}"), Path::new(&s, vec![Step::forward(id)]).unwrap()));
    }
    let g = Graph::new(&s, "tree", edges).unwrap();
    (s, g)
}
