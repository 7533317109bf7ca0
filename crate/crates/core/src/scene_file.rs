//! JSON scene files.
//!
//! ```json
//! {
//!   "segments": [{ "id": "a", "source": "v0", "target": "v1" }],
//!   "faces": [{ "id": "S", "crossings": [
//!       { "segment": "a", "kind": "transversal", "end": "at_target", "side": "above" }] }],
//!   "loops": [{ "name": "l", "steps": ["a", "-b"] }],
//!   "graphs": [{ "name": "g", "edges": [{ "name": "e1", "steps": ["a"] }] }],
//!   "fields": [{ "name": "A", "values": { "a": "3/2" } }],
//!   "gauges": [{ "name": "f", "values": { "v0": "1" } }],
//!   "systems": [{ "name": "lam", "loops": ["l"], "momenta": [{ "S": "1" }] }],
//!   "refinements": [{ "segment": "c", "parts": ["c.1", "c.2"], "midpoint": "c.m" }]
//! }
//! ```
//!
//! Every key except `segments` may be omitted. Unknown keys are rejected.
//! Rationals are strings `p` or `p/q`. Serialization is canonical: sorted
//! ids and names, normalized rationals, empty sections left out.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cyl::FluxCombo;
use crate::gauge::Graph;
use crate::rational::{format_rational, parse_rational, Rational};
use crate::substrate::{
    Crossing, Direction, End, Face, FieldSample, GaugeFunction, Loop, Path, Scene, SegmentId, Side, Split, Step,
    VertexId,
};
use crate::systems::{SystemSource, SystemSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SceneFileError {
    /// Malformed JSON or a shape mismatch; positions are 1-based.
    Syntax { line: usize, column: usize, message: String },
    /// Well-formed but inconsistent; one entry per problem.
    Invalid(Vec<String>),
}

impl fmt::Display for SceneFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SceneFileError::Syntax { line, column, message } => write!(f, "{line}:{column}: {message}"),
            SceneFileError::Invalid(problems) => {
                write!(f, "invalid scene:")?;
                for p in problems {
                    write!(f, "\n  - {p}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for SceneFileError {}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    segments: Vec<SegmentDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    faces: Vec<FaceDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    loops: Vec<LoopDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    graphs: Vec<GraphDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    fields: Vec<ValuesDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    gauges: Vec<ValuesDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    systems: Vec<SystemDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    refinements: Vec<RefinementDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentDoc {
    id: String,
    source: String,
    target: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaceDoc {
    id: String,
    crossings: Vec<CrossingDoc>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindDoc {
    InClosure,
    Transversal,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum EndDoc {
    AtSource,
    AtTarget,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SideDoc {
    Above,
    Below,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CrossingDoc {
    segment: String,
    kind: KindDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    end: Option<EndDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    side: Option<SideDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopDoc {
    name: String,
    steps: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    name: String,
    edges: Vec<LoopDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValuesDoc {
    name: String,
    values: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    loops: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    graph: Option<String>,
    momenta: Vec<BTreeMap<String, String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RefinementDoc {
    segment: String,
    parts: [String; 2],
    midpoint: String,
}

/// Parses and fully validates a scene.
pub fn parse_scene(src: &str) -> Result<Scene, SceneFileError> {
    let doc: SceneDoc = serde_json::from_str(src).map_err(|e| SceneFileError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    build(doc)
}

fn steps_of(tokens: &[String], problems: &mut Vec<String>, what: &str) -> Option<Vec<Step>> {
    let mut out = Vec::with_capacity(tokens.len());
    for t in tokens {
        match Step::parse(t) {
            Ok(s) => out.push(s),
            Err(e) => {
                problems.push(format!("{what}: {e}"));
                return None;
            }
        }
    }
    Some(out)
}

fn rational_of(src: &str, problems: &mut Vec<String>, what: &str) -> Option<Rational> {
    match parse_rational(src) {
        Ok(r) => Some(r),
        Err(e) => {
            problems.push(format!("{what}: {e}"));
            None
        }
    }
}

fn build(doc: SceneDoc) -> Result<Scene, SceneFileError> {
    let mut scene = Scene::new();
    let mut problems = Vec::new();

    for s in doc.segments {
        if let Err(e) = scene.add_segment(s.id, s.source, s.target) {
            problems.push(e.to_string());
        }
    }
    for r in doc.refinements {
        let split = Split {
            segment: SegmentId::new(r.segment),
            parts: r.parts.map(SegmentId::new),
            midpoint: VertexId::new(r.midpoint),
        };
        if scene.segment(&split.segment).is_ok() {
            problems.push(format!("refinement: segment `{}` is both current and retired", split.segment));
        }
        scene.push_lineage(split);
    }
    for f in doc.faces {
        let mut face = Face::new(f.id.clone());
        for c in f.crossings {
            let crossing = match (c.kind, c.end, c.side) {
                (KindDoc::InClosure, None, None) => Crossing::InClosure,
                (KindDoc::Transversal, Some(end), Some(side)) => Crossing::Transversal {
                    end: match end {
                        EndDoc::AtSource => End::AtSource,
                        EndDoc::AtTarget => End::AtTarget,
                    },
                    side: match side {
                        SideDoc::Above => Side::Above,
                        SideDoc::Below => Side::Below,
                    },
                },
                (KindDoc::InClosure, ..) => {
                    problems.push(format!("face `{}`: in_closure crossing takes no end or side", f.id));
                    continue;
                }
                (KindDoc::Transversal, ..) => {
                    problems.push(format!("face `{}`: transversal crossing needs both end and side", f.id));
                    continue;
                }
            };
            if face.crossing(&SegmentId::new(c.segment.as_str())) != Crossing::Disjoint {
                problems.push(format!("face `{}`: segment `{}` listed twice", f.id, c.segment));
            }
            face.set(SegmentId::new(c.segment), crossing);
        }
        if let Err(e) = scene.add_face(face) {
            problems.push(e.to_string());
        }
    }
    for l in doc.loops {
        let what = format!("loop `{}`", l.name);
        let Some(steps) = steps_of(&l.steps, &mut problems, &what) else { continue };
        match Path::new(&scene, steps).and_then(Loop::new) {
            Ok(lp) => {
                if scene.loop_named(&l.name).is_some() {
                    problems.push(format!("{what}: duplicate name"));
                }
                scene.add_loop(l.name, lp);
            }
            Err(e) => problems.push(format!("{what}: {e}")),
        }
    }
    for g in doc.graphs {
        let mut edges = Vec::new();
        for e in g.edges {
            let what = format!("graph `{}` edge `{}`", g.name, e.name);
            let Some(steps) = steps_of(&e.steps, &mut problems, &what) else { continue };
            match Path::new(&scene, steps) {
                Ok(p) => edges.push((e.name, p)),
                Err(err) => problems.push(format!("{what}: {err}")),
            }
        }
        if scene.graph_named(&g.name).is_some() {
            problems.push(format!("graph `{}`: duplicate name", g.name));
        }
        scene.add_graph(Graph::unchecked(g.name, edges));
    }
    for f in doc.fields {
        let mut field = FieldSample::new();
        for (seg, v) in &f.values {
            if let Some(r) = rational_of(v, &mut problems, &format!("field `{}`", f.name)) {
                field.set(SegmentId::new(seg.as_str()), r);
            }
        }
        scene.add_field(f.name, field);
    }
    for g in doc.gauges {
        let mut gauge = GaugeFunction::new();
        for (v, x) in &g.values {
            if let Some(r) = rational_of(x, &mut problems, &format!("gauge `{}`", g.name)) {
                gauge.set(VertexId::new(v.as_str()), r);
            }
        }
        scene.add_gauge(g.name, gauge);
    }
    for s in doc.systems {
        let what = format!("system `{}`", s.name);
        let source = match (s.loops, s.graph) {
            (Some(loops), None) => SystemSource::Loops(loops),
            (None, Some(graph)) => SystemSource::Graph(graph),
            _ => {
                problems.push(format!("{what}: give exactly one of `loops` or `graph`"));
                continue;
            }
        };
        let mut momenta = Vec::new();
        for m in &s.momenta {
            let terms: Vec<_> = m
                .iter()
                .filter_map(|(face, v)| rational_of(v, &mut problems, &what).map(|r| (r, face.as_str().into())))
                .collect();
            momenta.push(FluxCombo::from_terms(terms));
        }
        scene.add_system(SystemSpec { name: s.name, source, momenta });
    }

    problems.extend(scene.violations());
    if problems.is_empty() {
        Ok(scene)
    } else {
        Err(SceneFileError::Invalid(problems))
    }
}

fn tokens(path: &Path) -> Vec<String> {
    path.steps()
        .iter()
        .map(|s| match s.direction {
            Direction::Forward => s.segment.to_string(),
            Direction::Reverse => format!("-{}", s.segment),
        })
        .collect()
}

/// Canonical pretty-printed JSON with a trailing newline.
pub fn serialize_scene(scene: &Scene) -> String {
    let doc = SceneDoc {
        segments: scene
            .segments()
            .map(|s| SegmentDoc { id: s.id.to_string(), source: s.source.to_string(), target: s.target.to_string() })
            .collect(),
        faces: scene
            .faces()
            .map(|f| FaceDoc {
                id: f.id.to_string(),
                crossings: f
                    .crossings()
                    .map(|(seg, c)| match *c {
                        Crossing::Transversal { end, side } => CrossingDoc {
                            segment: seg.to_string(),
                            kind: KindDoc::Transversal,
                            end: Some(match end {
                                End::AtSource => EndDoc::AtSource,
                                End::AtTarget => EndDoc::AtTarget,
                            }),
                            side: Some(match side {
                                Side::Above => SideDoc::Above,
                                Side::Below => SideDoc::Below,
                            }),
                        },
                        _ => CrossingDoc { segment: seg.to_string(), kind: KindDoc::InClosure, end: None, side: None },
                    })
                    .collect(),
            })
            .collect(),
        loops: scene.loops().map(|(n, l)| LoopDoc { name: n.clone(), steps: tokens(l.path()) }).collect(),
        graphs: scene
            .graphs()
            .map(|(n, g)| GraphDoc {
                name: n.clone(),
                edges: g.edges().iter().map(|(e, p)| LoopDoc { name: e.clone(), steps: tokens(p) }).collect(),
            })
            .collect(),
        fields: scene
            .fields()
            .map(|(n, f)| ValuesDoc {
                name: n.clone(),
                values: f.iter().map(|(s, v)| (s.to_string(), format_rational(v))).collect(),
            })
            .collect(),
        gauges: scene
            .gauges()
            .map(|(n, g)| ValuesDoc {
                name: n.clone(),
                values: g.iter().map(|(v, x)| (v.to_string(), format_rational(x))).collect(),
            })
            .collect(),
        systems: scene
            .systems()
            .map(|(n, s)| {
                let (loops, graph) = match &s.source {
                    SystemSource::Loops(l) => (Some(l.clone()), None),
                    SystemSource::Graph(g) => (None, Some(g.clone())),
                };
                SystemDoc {
                    name: n.clone(),
                    loops,
                    graph,
                    momenta: s
                        .momenta
                        .iter()
                        .map(|c| c.terms().map(|(f, r)| (f.to_string(), format_rational(r))).collect())
                        .collect(),
                }
            })
            .collect(),
        refinements: scene
            .lineage()
            .map(|s| RefinementDoc {
                segment: s.segment.to_string(),
                parts: [s.parts[0].to_string(), s.parts[1].to_string()],
                midpoint: s.midpoint.to_string(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("scene documents always serialize");
    out.push('\n');
    out
}
