//! Golden cases: one or more invocations per verb on the bundled scenes.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub code: i32,
}

pub const CASES: &[Case] = &[
    Case { name: "validate", args: &["validate", "triangle.json"], code: 0 },
    Case { name: "hoop-reduce", args: &["hoop-reduce", "triangle.json"], code: 0 },
    Case { name: "epsilon", args: &["epsilon", "boundary.json", "--face", "S", "--loop", "l"], code: 0 },
    Case { name: "epsilon-flipped", args: &["epsilon", "sphere_circle.json", "--face", "S-", "--loop", "l"], code: 0 },
    Case { name: "check-face", args: &["check-face", "sphere_circle.json", "--face", "S"], code: 0 },
    Case { name: "check-face-none", args: &["check-face", "ball.json", "--face", "S"], code: 1 },
    Case { name: "build-system", args: &["build-system", "triangle.json", "--system", "lam"], code: 0 },
    Case { name: "check-system", args: &["check-system", "triangle.json", "--fine", "lam", "--coarse", "lam2"], code: 0 },
    Case {
        name: "check-system-reversed",
        args: &["check-system", "triangle.json", "--fine", "lam2", "--coarse", "lam"],
        code: 1,
    },
    Case { name: "refine", args: &["refine", "triangle.json", "--segment", "e1a", "--out", "OUT"], code: 0 },
    Case {
        name: "gauge-reduce",
        args: &["gauge-reduce", "triangle.json", "--graph", "gamma", "--poly", "x_e2 - x_e1 + (x_e3 - x_e2)^2"],
        code: 0,
    },
    Case { name: "gauge-reduce-tree", args: &["gauge-reduce", "triangle.json", "--graph", "tree", "--poly", "x_e1"], code: 1 },
    Case { name: "constrain", args: &["constrain", "triangle.json", "--system", "lam"], code: 0 },
    Case { name: "constrain-hint", args: &["constrain", "triangle.json", "--system", "lam", "--hint", "S1,S2"], code: 0 },
    Case {
        name: "probe-order",
        args: &["probe-order", "triangle.json", "--fine", "lam", "--coarse", "lam2", "--fine-hint", "S2,S3", "--coarse-hint", "S1"],
        code: 0,
    },
    Case {
        name: "probe-order-s2",
        args: &["probe-order", "triangle.json", "--fine", "lam", "--coarse", "lam2", "--fine-hint", "S2,S3", "--coarse-hint", "S2"],
        code: 0,
    },
    Case { name: "verify-assumptions", args: &["verify-assumptions", "triangle.json", "--sample", "lam,lam2"], code: 0 },
];

pub const VERBS: &[&str] = &[
    "validate",
    "hoop-reduce",
    "epsilon",
    "check-face",
    "build-system",
    "check-system",
    "refine",
    "gauge-reduce",
    "constrain",
    "probe-order",
    "verify-assumptions",
];

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn golden_path(name: &str) -> PathBuf {
    crate_dir().join("tests/golden").join(format!("{name}.json"))
}

/// Command line for `case`, with scene names resolved against the bundled
/// scenes and `OUT` replaced by `out`.
pub fn argv(case: &Case, out: &Path) -> Vec<String> {
    let scenes = crate_dir().join("scenes");
    let mut v = vec!["hoopcalc".to_string(), "--format".into(), "json".into()];
    for a in case.args {
        if *a == "OUT" {
            v.push(out.display().to_string());
        } else if a.ends_with(".json") {
            v.push(scenes.join(a).display().to_string());
        } else {
            v.push(a.to_string());
        }
    }
    v
}

/// Runs every case through `exec` (argv → exit code, stdout) and compares
/// with the golden files. With `update`, rewrites them instead.
pub fn check_all(exec: impl Fn(&[String]) -> (i32, String), update: bool) -> Result<usize, String> {
    let dir = std::env::temp_dir().join(format!("hoopcalc-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    for verb in VERBS {
        if !CASES.iter().any(|c| c.args[0] == *verb) {
            return Err(format!("no golden case for {verb}"));
        }
    }
    for case in CASES {
        let out = dir.join(format!("{}.json", case.name));
        let args = argv(case, &out);
        let (code, stdout) = exec(&args);
        let (code2, stdout2) = exec(&args);
        if code != case.code {
            return Err(format!("{}: exit {code}, expected {}", case.name, case.code));
        }
        if (code, &stdout) != (code2, &stdout2) {
            return Err(format!("{}: output differs between runs", case.name));
        }
        let mut produced = vec![(golden_path(case.name), stdout)];
        if case.args.contains(&"OUT") {
            let written = std::fs::read_to_string(&out).map_err(|e| format!("{}: {e}", case.name))?;
            produced.push((golden_path(&format!("{}.scene", case.name)), written));
        }
        for (path, got) in produced {
            if update {
                std::fs::write(&path, &got).map_err(|e| e.to_string())?;
                continue;
            }
            let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            if want != got {
                return Err(format!("{}: output differs from {}\n{got}", case.name, path.display()));
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(CASES.len())
}
