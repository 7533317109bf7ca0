//! Small hand-built scenes with known answers.

use crate::cyl::FluxCombo;
use crate::gauge::Graph;
use crate::rational::{rat, ratio};
use crate::substrate::{Crossing, End, Face, FieldSample, GaugeFunction, Loop, Path, Scene, Side};
use crate::systems::{SystemSource, SystemSpec};

const IN_ABOVE: Crossing = Crossing::Transversal { end: End::AtTarget, side: Side::Above };
const OUT_BELOW: Crossing = Crossing::Transversal { end: End::AtSource, side: Side::Below };

fn segments(scene: &mut Scene, list: &[(&str, &str, &str)]) {
    for (id, a, b) in list {
        scene.add_segment(*id, *a, *b).expect("fixture segments are valid");
    }
}

fn named_loop(scene: &mut Scene, name: &str, steps: &str) {
    let l = Loop::parse(scene, steps).expect("fixture loops close");
    scene.add_loop(name, l);
}

fn graph(scene: &Scene, name: &str, edges: &[(&str, &str)]) -> Graph {
    let edges = edges
        .iter()
        .map(|(n, steps)| (n.to_string(), Path::parse(scene, steps).expect("fixture edges chain")))
        .collect();
    Graph::new(scene, name, edges).expect("fixture graphs are valid")
}

/// Loop `l` runs along e1 inside the face, then back along e2, which ends
/// on the face from below. ε(S, l) = 1/2.
pub fn boundary_loop() -> Scene {
    let mut s = Scene::new();
    segments(&mut s, &[("e1", "y", "y'"), ("e2", "y", "y'")]);
    s.add_face(
        Face::new("S")
            .with("e1", Crossing::InClosure)
            .with("e2", Crossing::Transversal { end: End::AtTarget, side: Side::Below }),
    )
    .expect("fixture face");
    named_loop(&mut s, "l", "e1 -e2");
    s
}

/// A circle factor crossing a sphere slice once. `S` and its flip `S-`
/// give ε = 1 and ε = −1 on `l`; `m` stays on the slice.
pub fn sphere_times_circle() -> Scene {
    let mut s = Scene::new();
    segments(&mut s, &[("c1", "p", "q"), ("c2", "q", "p"), ("s1", "q", "r"), ("s2", "r", "q")]);
    let face = Face::new("S")
        .with("c1", IN_ABOVE)
        .with("c2", OUT_BELOW)
        .with("s1", Crossing::InClosure)
        .with("s2", Crossing::InClosure);
    let mut flipped = face.flipped();
    flipped.id = "S-".into();
    s.add_face(face).expect("fixture face");
    s.add_face(flipped).expect("fixture face");
    named_loop(&mut s, "l", "c1 c2");
    named_loop(&mut s, "m", "s1 s2");
    s
}

/// A sphere bounding a ball. Every loop goes in as often as it goes out,
/// so no witness exists.
pub fn ball_sphere() -> Scene {
    let mut s = Scene::new();
    segments(
        &mut s,
        &[("a", "i", "m"), ("b", "m", "o"), ("c", "o", "n"), ("d", "n", "i"), ("f", "i", "j"), ("g", "j", "i")],
    );
    s.add_face(
        Face::new("S")
            .with("a", Crossing::Transversal { end: End::AtTarget, side: Side::Below })
            .with("b", Crossing::Transversal { end: End::AtSource, side: Side::Above })
            .with("c", IN_ABOVE)
            .with("d", OUT_BELOW),
    )
    .expect("fixture face");
    named_loop(&mut s, "through", "a b c d");
    named_loop(&mut s, "inside", "f g");
    s
}

/// Three edges e1, e2, e3 from v0 to v1, each of two segments; face SI
/// pierces eI in the middle and nothing else.
///
/// Graphs: `gamma` = {e1, e2, e3}, `gamma2` = {e1, e2} and the loopless
/// `tree` = {e1}. Systems: `lam`
/// on gamma with momenta S1, S2, S3 and `lam2` on gamma2 with S1, S2.
/// Also carries a field `A` and a gauge `f` for examples.
pub fn triangle() -> Scene {
    let mut s = Scene::new();
    for i in 1..=3 {
        let m = format!("m{i}");
        s.add_segment(format!("e{i}a"), "v0", m.as_str()).expect("fixture segment");
        s.add_segment(format!("e{i}b"), m.as_str(), "v1").expect("fixture segment");
        s.add_face(Face::new(format!("S{i}")).with(format!("e{i}a"), IN_ABOVE).with(format!("e{i}b"), OUT_BELOW))
            .expect("fixture face");
    }
    let g = graph(&s, "gamma", &[("e1", "e1a e1b"), ("e2", "e2a e2b"), ("e3", "e3a e3b")]);
    let g2 = graph(&s, "gamma2", &[("e1", "e1a e1b"), ("e2", "e2a e2b")]);
    let t = graph(&s, "tree", &[("e1", "e1a e1b")]);
    s.add_graph(g);
    s.add_graph(g2);
    s.add_graph(t);
    named_loop(&mut s, "l2", "-e1b -e1a e2a e2b");
    named_loop(&mut s, "l3", "-e1b -e1a e3a e3b");
    let faces = |n: usize| (1..=n).map(|i| FluxCombo::single(format!("S{i}"))).collect::<Vec<_>>();
    s.add_system(SystemSpec { name: "lam".into(), source: SystemSource::Graph("gamma".into()), momenta: faces(3) });
    s.add_system(SystemSpec { name: "lam2".into(), source: SystemSource::Graph("gamma2".into()), momenta: faces(2) });
    s.add_system(SystemSpec {
        name: "loops".into(),
        source: SystemSource::Loops(vec!["l2".into(), "l3".into()]),
        momenta: vec![FluxCombo::single("S2"), FluxCombo::single("S3")],
    });
    s.add_field(
        "A",
        FieldSample::new()
            .with("e1a", ratio(1, 2))
            .with("e1b", rat(1))
            .with("e2a", rat(-2))
            .with("e2b", ratio(2, 3))
            .with("e3a", rat(3)),
    );
    s.add_gauge("f", GaugeFunction::new().with("v0", rat(2)).with("m1", ratio(-1, 4)).with("v1", rat(5)));
    s
}

/// Two edges forming a circle, e1: v0 → v1 and e2: v1 → v0, with S1
/// piercing e1 and S2 piercing e2. The extra edge e3: v1 → v0 meets
/// neither face and only serves as a probe.
pub fn two_edge_circle() -> Scene {
    let mut s = Scene::new();
    segments(
        &mut s,
        &[
            ("e1a", "v0", "m1"),
            ("e1b", "m1", "v1"),
            ("e2a", "v1", "m2"),
            ("e2b", "m2", "v0"),
            ("e3", "v1", "v0"),
        ],
    );
    s.add_face(Face::new("S1").with("e1a", IN_ABOVE).with("e1b", OUT_BELOW)).expect("fixture face");
    s.add_face(Face::new("S2").with("e2a", IN_ABOVE).with("e2b", OUT_BELOW)).expect("fixture face");
    let g = graph(&s, "gamma", &[("e1", "e1a e1b"), ("e2", "e2a e2b")]);
    s.add_graph(g);
    named_loop(&mut s, "l", "e1a e1b e2a e2b");
    named_loop(&mut s, "probe", "e1a e1b e3");
    s
}
