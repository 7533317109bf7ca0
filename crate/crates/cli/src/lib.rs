//! Command-line front end: one scene file per invocation, one report out.
//!
//! Every verb produces a [`Report`] rendered either as human-oriented text
//! or as a JSON object with the keys `verb`, `inputs`, `result` and
//! `witnesses`. Exit status is 0 on success, 1 when the question has a
//! negative mathematical answer and 2 when the input itself is bad.

use std::fmt::Write as _;
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use hoopcalc::cyl::{CylError, CylFunction, FluxCombo};
use hoopcalc::flux::{self, CrossingCounts, FluxError};
use hoopcalc::gauge::{self, GaugeError, Graph, Reduction};
use hoopcalc::hoop::{self, HoopError, HoopSet};
use hoopcalc::linalg::Matrix;
use hoopcalc::poly::{self, Poly};
use hoopcalc::rational::format_rational;
use hoopcalc::scene_file::{self, SceneFileError};
use hoopcalc::substrate::SubstrateError;
use hoopcalc::systems::{self, FiniteSystem, Probes, SystemSource, SystemSpec, SystemsError};
use hoopcalc::{chain_of, Chain, FaceId, Loop, Rational, Scene, SegmentId};
use serde_json::{json, Map, Value};

#[derive(Debug, Parser)]
#[command(name = "hoopcalc", version, about = "Exact hoop and flux calculus on scene files")]
pub struct Cli {
    /// Output mode.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a scene.
    Validate { scene: PathBuf },
    /// Reduce named loops to an independent hoop basis.
    HoopReduce {
        scene: PathBuf,
        /// Loops to reduce (default: every loop in the scene).
        #[arg(long, value_delimiter = ',')]
        loops: Vec<String>,
    },
    /// Signed crossing number ε(S, l).
    Epsilon {
        scene: PathBuf,
        #[arg(long)]
        face: String,
        #[arg(long = "loop")]
        loop_name: String,
    },
    /// Find a loop proving a face pierces something.
    CheckFace {
        scene: PathBuf,
        #[arg(long)]
        face: String,
        /// Candidate witnesses (default: every loop in the scene).
        #[arg(long, value_delimiter = ',')]
        loops: Vec<String>,
    },
    /// Build a named system and report its pairing matrix.
    BuildSystem {
        scene: PathBuf,
        #[arg(long)]
        system: String,
    },
    /// Decide whether one system is finer than another.
    CheckSystem {
        scene: PathBuf,
        #[arg(long)]
        fine: String,
        #[arg(long)]
        coarse: String,
    },
    /// Split a segment and write the result to a new scene file.
    Refine {
        scene: PathBuf,
        #[arg(long)]
        segment: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rewrite a gauge invariant edge polynomial over fundamental loops.
    GaugeReduce {
        scene: PathBuf,
        #[arg(long)]
        graph: String,
        /// Polynomial in `x_<edge>` variables.
        #[arg(long)]
        poly: String,
    },
    /// Gauge-constrain a graph system.
    Constrain {
        scene: PathBuf,
        #[arg(long)]
        system: String,
        /// Momenta to keep, by label.
        #[arg(long, value_delimiter = ',')]
        hint: Option<Vec<String>>,
    },
    /// Compare two graph systems before and after constraining.
    ProbeOrder {
        scene: PathBuf,
        #[arg(long)]
        fine: String,
        #[arg(long)]
        coarse: String,
        #[arg(long, value_delimiter = ',')]
        fine_hint: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        coarse_hint: Option<Vec<String>>,
    },
    /// Run the assumption checks on a sample of systems.
    VerifyAssumptions {
        scene: PathBuf,
        /// Systems to sample (default: every system in the scene).
        #[arg(long, value_delimiter = ',')]
        sample: Vec<String>,
        /// Extra probe polynomials in `x1, x2, ...`.
        #[arg(long)]
        poly: Vec<String>,
    },
}

/// What a finished invocation hands back to the shell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Structured result of one verb.
#[derive(Debug, Clone)]
pub struct Report {
    pub verb: &'static str,
    pub inputs: Map<String, Value>,
    pub result: Value,
    pub witnesses: Value,
    pub text: String,
    /// set when the answer is negative
    pub negative: bool,
}

impl Report {
    fn new(verb: &'static str, inputs: Map<String, Value>) -> Report {
        Report { verb, inputs, result: Value::Null, witnesses: json!({}), text: String::new(), negative: false }
    }

    pub fn to_json(&self) -> String {
        let v = json!({
            "verb": self.verb,
            "inputs": self.inputs,
            "result": self.result,
            "witnesses": self.witnesses,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    /// A well-posed question with a negative answer.
    Domain { kind: &'static str, message: String },
    /// Bad file, bad name, bad argument.
    Input(String),
}

impl From<SubstrateError> for Failure {
    fn from(e: SubstrateError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<HoopError> for Failure {
    fn from(e: HoopError) -> Self {
        match e {
            HoopError::NotInSpan { .. } | HoopError::NonIntegral { .. } => {
                Failure::Domain { kind: "NotInSpan", message: e.to_string() }
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<FluxError> for Failure {
    fn from(e: FluxError) -> Self {
        Failure::Domain { kind: "NoWitness", message: e.to_string() }
    }
}

impl From<CylError> for Failure {
    fn from(e: CylError) -> Self {
        match e {
            CylError::NotComparable { .. } => Failure::Domain { kind: "NotComparable", message: e.to_string() },
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<SystemsError> for Failure {
    fn from(e: SystemsError) -> Self {
        match e {
            SystemsError::NotComparable { .. } => Failure::Domain { kind: "NotComparable", message: e.to_string() },
            SystemsError::Hoop(e) => e.into(),
            SystemsError::Cyl(e) => e.into(),
            SystemsError::Flux(e) => e.into(),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<GaugeError> for Failure {
    fn from(e: GaugeError) -> Self {
        match e {
            GaugeError::NotInvariant => Failure::Domain { kind: "NotInvariant", message: e.to_string() },
            GaugeError::NoLoops(_) => Failure::Domain { kind: "NoLoops", message: e.to_string() },
            GaugeError::Systems(e) => (*e).into(),
            GaugeError::Cyl(e) => e.into(),
            _ => Failure::Input(e.to_string()),
        }
    }
}

/// Parses `args` (program name first) and runs the verb.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            return if code == 0 {
                Output { code, stdout: rendered, stderr: String::new() }
            } else {
                Output { code, stdout: String::new(), stderr: rendered }
            };
        }
    };
    let format = cli.format;
    let verb = verb_name(&cli.command);
    match dispatch(cli.command) {
        Ok(report) => Output {
            code: if report.negative { 1 } else { 0 },
            stdout: render(&report, format),
            stderr: String::new(),
        },
        Err((inputs, Failure::Domain { kind, message })) => {
            let mut report = Report::new(verb, inputs);
            report.result = json!({ "error": kind, "message": message });
            report.text = format!("{kind}: {message}\n");
            Output { code: 1, stdout: render(&report, format), stderr: String::new() }
        }
        Err((_, Failure::Input(message))) => {
            Output { code: 2, stdout: String::new(), stderr: format!("error: {message}\n") }
        }
    }
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Text => report.text.clone(),
        Format::Json => report.to_json(),
    }
}

fn verb_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::HoopReduce { .. } => "hoop-reduce",
        Command::Epsilon { .. } => "epsilon",
        Command::CheckFace { .. } => "check-face",
        Command::BuildSystem { .. } => "build-system",
        Command::CheckSystem { .. } => "check-system",
        Command::Refine { .. } => "refine",
        Command::GaugeReduce { .. } => "gauge-reduce",
        Command::Constrain { .. } => "constrain",
        Command::ProbeOrder { .. } => "probe-order",
        Command::VerifyAssumptions { .. } => "verify-assumptions",
    }
}

type Fail = (Map<String, Value>, Failure);

fn dispatch(command: Command) -> Result<Report, Fail> {
    let verb = verb_name(&command);
    let mut inputs = Map::new();
    macro_rules! input {
        ($k:expr, $v:expr) => {
            inputs.insert($k.to_string(), json!($v))
        };
    }
    let scene_path = match &command {
        Command::Validate { scene }
        | Command::HoopReduce { scene, .. }
        | Command::Epsilon { scene, .. }
        | Command::CheckFace { scene, .. }
        | Command::BuildSystem { scene, .. }
        | Command::CheckSystem { scene, .. }
        | Command::Refine { scene, .. }
        | Command::GaugeReduce { scene, .. }
        | Command::Constrain { scene, .. }
        | Command::ProbeOrder { scene, .. }
        | Command::VerifyAssumptions { scene, .. } => scene.clone(),
    };
    input!("scene", file_name(&scene_path));
    match &command {
        Command::Validate { .. } => {}
        Command::HoopReduce { loops, .. } | Command::CheckFace { loops, .. } if !loops.is_empty() => {
            input!("loops", loops);
        }
        Command::Epsilon { face, loop_name, .. } => {
            input!("face", face);
            input!("loop", loop_name);
        }
        Command::BuildSystem { system, .. } => {
            input!("system", system);
        }
        Command::CheckSystem { fine, coarse, .. } => {
            input!("fine", fine);
            input!("coarse", coarse);
        }
        Command::Refine { segment, out, .. } => {
            input!("segment", segment);
            input!("out", file_name(out));
        }
        Command::GaugeReduce { graph, poly, .. } => {
            input!("graph", graph);
            input!("poly", poly);
        }
        Command::Constrain { system, hint, .. } => {
            input!("system", system);
            if let Some(h) = hint {
                input!("hint", h);
            }
        }
        Command::ProbeOrder { fine, coarse, fine_hint, coarse_hint, .. } => {
            input!("fine", fine);
            input!("coarse", coarse);
            if let Some(h) = fine_hint {
                input!("fine_hint", h);
            }
            if let Some(h) = coarse_hint {
                input!("coarse_hint", h);
            }
        }
        Command::VerifyAssumptions { sample, poly, .. } => {
            if !sample.is_empty() {
                input!("sample", sample);
            }
            if !poly.is_empty() {
                input!("poly", poly);
            }
        }
        _ => {}
    }
    if let Command::CheckFace { face, .. } = &command {
        input!("face", face);
    }
    let mut report = Report::new(verb, inputs.clone());
    let outcome = load_scene(&scene_path).and_then(|scene| match command {
        Command::Validate { .. } => validate(&scene, &mut report),
        Command::HoopReduce { loops, .. } => hoop_reduce(&scene, &loops, &mut report),
        Command::Epsilon { face, loop_name, .. } => epsilon(&scene, &face, &loop_name, &mut report),
        Command::CheckFace { face, loops, .. } => check_face(&scene, &face, &loops, &mut report),
        Command::BuildSystem { system, .. } => build_system(&scene, &system, &mut report),
        Command::CheckSystem { fine, coarse, .. } => check_system(&scene, &fine, &coarse, &mut report),
        Command::Refine { segment, out, .. } => refine(&scene, &scene_path, &segment, &out, &mut report),
        Command::GaugeReduce { graph, poly, .. } => gauge_reduce(&scene, &graph, &poly, &mut report),
        Command::Constrain { system, hint, .. } => constrain(&scene, &system, hint.as_deref(), &mut report),
        Command::ProbeOrder { fine, coarse, fine_hint, coarse_hint, .. } => {
            probe_order(&scene, (&fine, fine_hint.as_deref()), (&coarse, coarse_hint.as_deref()), &mut report)
        }
        Command::VerifyAssumptions { sample, poly, .. } => verify_assumptions(&scene, &sample, &poly, &mut report),
    });
    match outcome {
        Ok(()) => Ok(report),
        Err(f) => Err((inputs, f)),
    }
}

fn file_name(p: &FsPath) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string())
}

fn load_scene(path: &FsPath) -> Result<Scene, Failure> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    scene_file::parse_scene(&src).map_err(|e| match e {
        SceneFileError::Syntax { line, column, message } => {
            Failure::Input(format!("{}:{line}:{column}: {message}", path.display()))
        }
        invalid => Failure::Input(format!("{}: {invalid}", path.display())),
    })
}

/// Unknown-name failure with the closest known name as a suggestion.
fn unknown<'a>(kind: &str, name: &str, known: impl IntoIterator<Item = &'a str>) -> Failure {
    let best = known
        .into_iter()
        .map(|k| (strsim::levenshtein(name, k), k))
        .filter(|(d, k)| *d <= (k.len().max(name.len()) / 2).max(1))
        .min();
    match best {
        Some((_, k)) => Failure::Input(format!("unknown {kind} `{name}`; did you mean `{k}`?")),
        None => Failure::Input(format!("unknown {kind} `{name}`")),
    }
}

fn find_loop<'a>(scene: &'a Scene, name: &str) -> Result<&'a Loop, Failure> {
    scene.loop_named(name).ok_or_else(|| unknown("loop", name, scene.loops().map(|(n, _)| n.as_str())))
}

fn find_face(scene: &Scene, name: &str) -> Result<FaceId, Failure> {
    let id = FaceId::new(name);
    scene.face(&id).map(|_| id).map_err(|_| unknown("face", name, scene.faces().map(|f| f.id.as_str())))
}

fn find_graph<'a>(scene: &'a Scene, name: &str) -> Result<&'a Graph, Failure> {
    scene.graph_named(name).ok_or_else(|| unknown("graph", name, scene.graphs().map(|(n, _)| n.as_str())))
}

fn find_system<'a>(scene: &'a Scene, name: &str) -> Result<&'a SystemSpec, Failure> {
    scene.system_named(name).ok_or_else(|| unknown("system", name, scene.systems().map(|(n, _)| n.as_str())))
}

fn loops_or_all(scene: &Scene, names: &[String]) -> Result<Vec<(String, Loop)>, Failure> {
    if names.is_empty() {
        return Ok(scene.loops().map(|(n, l)| (n.clone(), l.clone())).collect());
    }
    names.iter().map(|n| Ok((n.clone(), find_loop(scene, n)?.clone()))).collect()
}

fn r(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

fn matrix(m: &Matrix) -> Value {
    Value::Array(m.iter().map(|row| Value::Array(row.iter().map(r).collect())).collect())
}

fn matrix_text(m: &Matrix) -> String {
    let mut s = String::new();
    for row in m {
        let cells: Vec<String> = row.iter().map(format_rational).collect();
        let _ = writeln!(s, "  [{}]", cells.join(", "));
    }
    s
}

fn chain(c: &Chain) -> Value {
    Value::Object(c.iter().map(|(s, k)| (s.to_string(), json!(k))).collect())
}

fn frame_json(frame: &HoopSet) -> Value {
    Value::Array(frame.hoops().iter().map(|h| json!({ "label": h.label, "chain": chain(&h.chain) })).collect())
}

fn certificate_json(frame: &HoopSet) -> Value {
    match frame.certificate() {
        Some(cert) => Value::Array(
            cert.iter().map(|(s, k)| json!({ "segment": s.to_string(), "coefficient": k })).collect(),
        ),
        None => Value::Null,
    }
}

/// Single unit-coefficient momenta are named by their face.
fn momentum_label(c: &FluxCombo) -> String {
    let terms: Vec<_> = c.terms().collect();
    match terms.as_slice() {
        [(f, a)] if **a == Rational::from_integer(1.into()) => f.to_string(),
        _ => c.to_string(),
    }
}

fn validate(scene: &Scene, report: &mut Report) -> Result<(), Failure> {
    let counts = [
        ("segments", scene.segments().count()),
        ("faces", scene.faces().count()),
        ("loops", scene.loops().count()),
        ("graphs", scene.graphs().count()),
        ("fields", scene.fields().count()),
        ("gauges", scene.gauges().count()),
        ("systems", scene.systems().count()),
        ("refinements", scene.lineage().count()),
    ];
    report.result = json!({
        "valid": true,
        "counts": counts.iter().map(|(k, n)| (k.to_string(), json!(n))).collect::<Map<_, _>>(),
    });
    let parts: Vec<String> = counts.iter().map(|(k, n)| format!("{n} {k}")).collect();
    report.text = format!("valid scene: {}\n", parts.join(", "));
    Ok(())
}

fn hoop_reduce(scene: &Scene, names: &[String], report: &mut Report) -> Result<(), Failure> {
    let loops = loops_or_all(scene, names)?;
    if loops.is_empty() {
        return Err(Failure::Input("no loops to reduce".into()));
    }
    let plain: Vec<Loop> = loops.iter().map(|(_, l)| l.clone()).collect();
    let dec = hoop::independent_basis(scene, &plain)?;
    let coefficients: Map<String, Value> =
        loops.iter().zip(&dec.coefficients).map(|((n, _), c)| (n.clone(), json!(c))).collect();
    report.result = json!({ "basis": frame_json(&dec.basis), "coefficients": coefficients });
    report.witnesses = json!({ "certificate": certificate_json(&dec.basis) });
    let mut t = format!("basis of {} hoops:\n", dec.basis.len());
    for h in dec.basis.hoops() {
        let _ = writeln!(t, "  {} = {}", h.label, h.chain);
    }
    for ((n, _), c) in loops.iter().zip(&dec.coefficients) {
        let _ = writeln!(t, "  {n} -> {c:?}");
    }
    report.text = t;
    Ok(())
}

fn counts_json(n: &CrossingCounts) -> Value {
    json!({ "t_plus": n.t_plus, "s_plus": n.s_plus, "t_minus": n.t_minus, "s_minus": n.s_minus })
}

fn epsilon(scene: &Scene, face: &str, loop_name: &str, report: &mut Report) -> Result<(), Failure> {
    let id = find_face(scene, face)?;
    let l = scene.resolve_loop(find_loop(scene, loop_name)?);
    let f = scene.face(&id)?;
    let e = flux::epsilon_loop(f, &l);
    let by_chain = flux::epsilon_hoop(f, &chain_of(l.path()));
    debug_assert_eq!(e, by_chain);
    report.result = r(&e.to_rational());
    report.witnesses = json!({
        "counts": counts_json(&CrossingCounts::of(f, l.path())),
        "chain": chain(&chain_of(l.path())),
        "from_chain": r(&by_chain.to_rational()),
    });
    report.text = format!("{e}\n");
    Ok(())
}

fn check_face(scene: &Scene, face: &str, names: &[String], report: &mut Report) -> Result<(), Failure> {
    let id = find_face(scene, face)?;
    let loops = loops_or_all(scene, names)?;
    let resolved: Vec<Loop> = loops.iter().map(|(_, l)| scene.resolve_loop(l)).collect();
    let w = flux::face_validity(scene.face(&id)?, &resolved)?;
    let name = &loops[w.index].0;
    report.result = json!({ "valid": true, "witness": name, "epsilon": r(&w.epsilon.to_rational()) });
    report.witnesses = json!({ "loop": resolved[w.index].path().tokens() });
    report.text = format!("face {face} is pierced: ε({face}, {name}) = {}\n", w.epsilon);
    Ok(())
}

fn build(scene: &Scene, name: &str) -> Result<FiniteSystem, Failure> {
    Ok(find_system(scene, name)?.build(scene)?)
}

fn build_system(scene: &Scene, name: &str, report: &mut Report) -> Result<(), Failure> {
    let sys = build(scene, name)?;
    let g = sys.g(scene)?;
    let nondegenerate = systems::is_nondegenerate(scene, &sys);
    let labels: Vec<String> = sys.momenta().basis().iter().map(momentum_label).collect();
    report.result = json!({
        "dim": sys.dim(),
        "frame": frame_json(sys.frame()),
        "momenta": labels,
        "g": matrix(&g.entries),
        "nondegenerate": nondegenerate,
    });
    report.witnesses = json!({ "certificate": certificate_json(sys.frame()) });
    let hoops: Vec<&str> = sys.frame().hoops().iter().map(|h| h.label.as_str()).collect();
    report.text = format!(
        "system {name}: dimension {}, {}\n  hoops: {}\n  momenta: {}\nG =\n{}",
        sys.dim(),
        if nondegenerate { "nondegenerate" } else { "degenerate" },
        hoops.join(", "),
        labels.join(", "),
        matrix_text(&g.entries)
    );
    Ok(())
}

fn check_system(scene: &Scene, fine: &str, coarse: &str, report: &mut Report) -> Result<(), Failure> {
    let f = build(scene, fine)?;
    let c = build(scene, coarse)?;
    let w = systems::system_geq(scene, &f, &c)?;
    report.result = json!({ "geq": true, "verified": w.verify(scene, &f, &c) });
    report.witnesses = json!({
        "momentum_coefficients": matrix(&w.momentum_coefficients),
        "hoop_matrix": w.hoop_matrix,
    });
    report.text = format!(
        "{fine} >= {coarse}\nmomenta:\n{}hoops:\n{}",
        matrix_text(&w.momentum_coefficients),
        w.hoop_matrix.iter().map(|row| format!("  {row:?}\n")).collect::<String>()
    );
    Ok(())
}

fn refine(scene: &Scene, input: &FsPath, segment: &str, out: &FsPath, report: &mut Report) -> Result<(), Failure> {
    let same = match (std::fs::canonicalize(input), std::fs::canonicalize(out)) {
        (Ok(a), Ok(b)) => a == b,
        _ => input == out,
    };
    if same {
        return Err(Failure::Input("refusing to overwrite the input scene; choose another --out".into()));
    }
    let id = SegmentId::new(segment);
    if scene.segment(&id).is_err() {
        return Err(unknown("segment", segment, scene.segments().map(|s| s.id.as_str())));
    }
    let (next, split) = scene.refine_segment(&id)?;
    std::fs::write(out, scene_file::serialize_scene(&next))
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", out.display())))?;
    report.result = json!({
        "segment": segment,
        "parts": [split.parts[0].to_string(), split.parts[1].to_string()],
        "midpoint": split.midpoint.to_string(),
        "written": file_name(out),
    });
    report.text = format!(
        "{segment} -> {} {} through {}; wrote {}\n",
        split.parts[0],
        split.parts[1],
        split.midpoint,
        out.display()
    );
    Ok(())
}

fn edge_names(graph: &Graph) -> Vec<String> {
    graph.edges().iter().map(|(n, _)| n.clone()).collect()
}

fn tree_json(graph: &Graph, tree: &gauge::MaximalTree) -> Value {
    let names = edge_names(graph);
    json!({
        "edges": tree.tree_edges().iter().map(|&i| names[i].clone()).collect::<Vec<_>>(),
        "roots": tree.roots().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
    })
}

fn loops_json(graph: &Graph, loops: &[gauge::FundamentalLoop]) -> Value {
    let names = edge_names(graph);
    Value::Array(
        loops
            .iter()
            .map(|l| {
                json!({
                    "closing_edge": names[l.edge],
                    "steps": l.path.path().tokens(),
                    "edge_coefficients": l.edge_coefficients,
                })
            })
            .collect(),
    )
}

fn gauge_reduce(scene: &Scene, graph: &str, src: &str, report: &mut Report) -> Result<(), Failure> {
    let g = find_graph(scene, graph)?;
    let names = edge_names(g);
    let p = poly::parse_with(src, |v| names.iter().position(|n| v.strip_prefix("x_") == Some(n.as_str())))
        .map_err(|e| Failure::Input(format!("--poly column {}: {}", e.column, e.message)))?;
    let psi = CylFunction::new(g.space(), p)?;
    let tree = gauge::maximal_tree(g);
    report.witnesses = json!({ "tree": tree_json(g, &tree) });
    match gauge::gauge_reduce(scene, &psi, g)? {
        Reduction::Constant(c) => {
            report.result = json!({ "invariant": true, "constant": r(&c) });
            report.text = format!("invariant; graph has no loops, value is the constant {}\n", format_rational(&c));
        }
        Reduction::Reduced { psi: reduced, loops } => {
            let var = |i: usize| format!("k_{}", names[loops[i].edge]);
            let shown = reduced.poly.display_with(var);
            report.result = json!({
                "invariant": true,
                "reduced": shown,
                "variables": (0..loops.len()).map(var).collect::<Vec<_>>(),
            });
            report.witnesses["loops"] = loops_json(g, &loops);
            let mut t = format!("invariant; reduced to {shown}\n");
            for (i, l) in loops.iter().enumerate() {
                let _ = writeln!(t, "  {} = loop {}", var(i), l.path.path().tokens().join(" "));
            }
            report.text = t;
        }
    }
    Ok(())
}

fn graph_system(scene: &Scene, name: &str) -> Result<(FiniteSystem, Graph, Vec<String>), Failure> {
    let spec = find_system(scene, name)?;
    let SystemSource::Graph(g) = &spec.source else {
        return Err(Failure::Input(format!("system `{name}` is not built on a graph")));
    };
    let graph = find_graph(scene, g)?.clone();
    let labels = spec.momenta.iter().map(momentum_label).collect();
    Ok((spec.build(scene)?, graph, labels))
}

fn hint_indices(labels: &[String], hint: Option<&[String]>) -> Result<Option<Vec<usize>>, Failure> {
    let Some(h) = hint else { return Ok(None) };
    h.iter()
        .map(|name| {
            labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| unknown("momentum", name, labels.iter().map(String::as_str)))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn constrained_json(c: &gauge::Constrained, labels: &[String]) -> Value {
    json!({
        "n": c.epsilon.len(),
        "m": c.loops.len(),
        "annihilator_dim": c.annihilator.len(),
        "chosen": c.chosen.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>(),
    })
}

fn constrain(scene: &Scene, name: &str, hint: Option<&[String]>, report: &mut Report) -> Result<(), Failure> {
    let (sys, graph, labels) = graph_system(scene, name)?;
    let idx = hint_indices(&labels, hint)?;
    let c = gauge::constrain_system(scene, &sys, &graph, idx.as_deref())?;
    report.result = constrained_json(&c, &labels);
    report.witnesses = json!({
        "epsilon": matrix(&c.epsilon),
        "annihilator": matrix(&c.annihilator),
        "tree": tree_json(&graph, &c.tree),
        "loops": loops_json(&graph, &c.loops),
    });
    let chosen: Vec<&str> = c.chosen.iter().map(|&i| labels[i].as_str()).collect();
    report.text = format!(
        "{name}: {} momenta, {} loops, annihilator of dimension {}\nkept: {}\nε =\n{}",
        c.epsilon.len(),
        c.loops.len(),
        c.annihilator.len(),
        chosen.join(", "),
        matrix_text(&c.epsilon)
    );
    Ok(())
}

fn verdict(v: &Result<systems::SystemOrderWitness, SystemsError>) -> Result<Value, Failure> {
    match v {
        Ok(w) => Ok(json!({
            "geq": true,
            "momentum_coefficients": matrix(&w.momentum_coefficients),
            "hoop_matrix": w.hoop_matrix,
        })),
        Err(SystemsError::NotComparable { side, detail }) => {
            Ok(json!({ "geq": false, "side": format!("{side:?}"), "detail": detail }))
        }
        Err(e) => Err(e.clone().into()),
    }
}

fn probe_order(
    scene: &Scene,
    fine: (&str, Option<&[String]>),
    coarse: (&str, Option<&[String]>),
    report: &mut Report,
) -> Result<(), Failure> {
    let (fs, fg, fl) = graph_system(scene, fine.0)?;
    let (cs, cg, cl) = graph_system(scene, coarse.0)?;
    let fh = hint_indices(&fl, fine.1)?;
    let ch = hint_indices(&cl, coarse.1)?;
    let p = gauge::order_preservation_probe(scene, (&fs, &fg, fh.as_deref()), (&cs, &cg, ch.as_deref()))?;
    let before = verdict(&p.unconstrained)?;
    let after = verdict(&p.constrained)?;
    report.result = json!({
        "unconstrained_geq": before["geq"],
        "constrained_geq": after["geq"],
        "fine": constrained_json(&p.fine, &fl),
        "coarse": constrained_json(&p.coarse, &cl),
    });
    report.witnesses = json!({ "unconstrained": before, "constrained": after });
    let word = |v: &Value| if v["geq"] == json!(true) { ">=" } else { "not >=" };
    report.text = format!(
        "unconstrained: {} {} {}\nconstrained:   {} {} {} (kept {} | {})\n",
        fine.0,
        word(&before),
        coarse.0,
        fine.0,
        word(&after),
        coarse.0,
        p.fine.chosen.iter().map(|&i| fl[i].as_str()).collect::<Vec<_>>().join(","),
        p.coarse.chosen.iter().map(|&i| cl[i].as_str()).collect::<Vec<_>>().join(","),
    );
    Ok(())
}

fn verify_assumptions(scene: &Scene, sample: &[String], polys: &[String], report: &mut Report) -> Result<(), Failure> {
    let names: Vec<String> =
        if sample.is_empty() { scene.systems().map(|(n, _)| n.clone()).collect() } else { sample.to_vec() };
    let systems = names.iter().map(|n| build(scene, n)).collect::<Result<Vec<_>, _>>()?;
    let polys = polys
        .iter()
        .map(|s| poly::parse_indexed(s).map_err(|e| Failure::Input(format!("--poly {s}: {}", e.message))))
        .collect::<Result<Vec<Poly>, _>>()?;
    let probes = Probes {
        loops: scene.loops().map(|(_, l)| scene.resolve_loop(l)).collect(),
        polys,
        faces: scene.faces().map(|f| f.id.clone()).collect(),
    };
    let out = systems::verify_assumptions(scene, &systems, &probes);
    let checks: Vec<Value> = out
        .checks
        .iter()
        .map(|c| {
            json!({
                "assumption": c.assumption.label(),
                "passed": c.passed,
                "checked": c.checked,
                "detail": c.detail,
            })
        })
        .collect();
    report.result = json!({ "all_passed": out.all_passed(), "checks": checks });
    report.witnesses = json!({ "sample": names, "warnings": out.warnings });
    report.negative = !out.all_passed();
    let mut t = String::new();
    for c in &out.checks {
        let _ = writeln!(
            t,
            "{:<3} {:<4} {:>4}  {}",
            c.assumption.label(),
            if c.passed { "pass" } else { "FAIL" },
            c.checked,
            c.assumption.description()
        );
        if !c.passed {
            let _ = writeln!(t, "      {}", c.detail);
        }
    }
    for w in &out.warnings {
        let _ = writeln!(t, "warning: {w}");
    }
    report.text = t;
    Ok(())
}
