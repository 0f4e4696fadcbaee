//! Command-line front end over the library: seeded verification suites,
//! flow integration with CSV export and basin classification, stratum
//! classification, and orbit projection reports.
//!
//! Exit codes: 0 pass/success, 1 suite failure, 2 usage error.

mod json;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use hyperlie::algebra::AlgVec;
use hyperlie::flow::{classify_limit, integrate, BasinThresholds, FlowConfig, Verdict};
use hyperlie::linalg::{sym_eigen, Mat};
use hyperlie::orbit::{kks_residual, orbit_classify, pr12, projection_rank, OrbitKind};
use hyperlie::poisson::{casimirs, classify_stratum, gram, phi, MPoint, SClass};
use hyperlie::sample::Region;
use hyperlie::verify::{run_suite, SuiteConfig, SuiteReport, SUITES};
use json::Json;

const USAGE: &str = "hyperlie: compatible Poisson structures on su(2)^3

USAGE:
  hyperlie verify [--suite NAME] [--seed N] [--samples N] [--region plus|minus|both]
                  [--tol NAME=VALUE]... [--phi-floor X] [--config PATH]
  hyperlie flow --init POINT --t0 T --t1 T --out PATH [--config PATH]
  hyperlie classify --init POINT [--config PATH]
  hyperlie project --init POINT [--config PATH]

POINT is nine decimal floats \"a1,a2,a3;b1,b2,b3;c1,c2,c3\".
Suites: jacobi conditions frames system13 leaf metric casimir projection all (default all).
Config files hold key=value lines ('#' comments); flags override the file,
the file overrides built-in defaults. Tolerance overrides use tol.NAME=VALUE
in files and --tol NAME=VALUE on the command line.

Reports are JSON on stdout with alphabetical keys and floats at 17
significant digits; flow trajectories are CSV (schema '# hyperlie-traj v1').

Exit codes: 0 pass/success, 1 suite failure, 2 usage error.";

#[derive(Debug, Clone)]
struct Opts {
    seed: u64,
    samples: usize,
    region: Region,
    phi_floor: f64,
    tols: BTreeMap<String, f64>,
    out: Option<PathBuf>,
    suite: String,
    init: Option<String>,
    t0: Option<f64>,
    t1: Option<f64>,
}

impl Default for Opts {
    fn default() -> Self {
        Opts {
            seed: 42,
            samples: 200,
            region: Region::Both,
            phi_floor: 0.1,
            tols: BTreeMap::new(),
            out: None,
            suite: "all".to_string(),
            init: None,
            t0: None,
            t1: None,
        }
    }
}

struct UsageError(String);

impl Opts {
    fn set(&mut self, key: &str, value: &str) -> Result<(), UsageError> {
        let bad = |what: &str| UsageError(format!("invalid {what}: `{value}`"));
        match key {
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "samples" => self.samples = value.parse().map_err(|_| bad("samples"))?,
            "region" => {
                self.region = Region::parse(value).ok_or_else(|| bad("region"))?;
            }
            "phi-floor" | "phi_floor" => {
                self.phi_floor = value.parse().map_err(|_| bad("phi floor"))?;
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "suite" => self.suite = value.to_string(),
            "init" => self.init = Some(value.to_string()),
            "t0" => self.t0 = Some(value.parse().map_err(|_| bad("t0"))?),
            "t1" => self.t1 = Some(value.parse().map_err(|_| bad("t1"))?),
            _ if key.starts_with("tol.") => {
                let name = key.trim_start_matches("tol.");
                let tol: f64 = value.parse().map_err(|_| bad("tolerance"))?;
                if tol <= 0.0 || tol.is_nan() {
                    return Err(UsageError(format!("tolerance must be positive: {value}")));
                }
                self.tols.insert(name.to_string(), tol);
            }
            _ => return Err(UsageError(format!("unknown option `{key}`"))),
        }
        Ok(())
    }

    fn load_config(&mut self, path: &str) -> Result<(), UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {path}: {e}")))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("{path}:{}: expected key=value", lineno + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    fn parse(args: &[String]) -> Result<Opts, UsageError> {
        let mut opts = Opts::default();
        // config file first, then flags override
        let mut i = 0;
        while i < args.len() {
            if args[i] == "--config" {
                let path = args
                    .get(i + 1)
                    .ok_or_else(|| UsageError("--config needs a path".into()))?;
                opts.load_config(path)?;
            }
            i += 1;
        }
        let mut i = 0;
        while i < args.len() {
            let flag = &args[i];
            let key = flag
                .strip_prefix("--")
                .ok_or_else(|| UsageError(format!("unexpected argument `{flag}`")))?;
            let value = args
                .get(i + 1)
                .ok_or_else(|| UsageError(format!("flag {flag} needs a value")))?;
            i += 2;
            match key {
                "config" => {} // already applied
                "tol" => {
                    let (name, tol) = value.split_once('=').ok_or_else(|| {
                        UsageError(format!("--tol expects NAME=VALUE, got `{value}`"))
                    })?;
                    opts.set(&format!("tol.{name}"), tol)?;
                }
                other => opts.set(other, value)?,
            }
        }
        Ok(opts)
    }
}

/// Parse "a1,a2,a3;b1,b2,b3;c1,c2,c3".
fn parse_init(text: &str) -> Result<MPoint, UsageError> {
    let bad = || {
        UsageError(format!(
            "init must be nine floats `a1,a2,a3;b1,b2,b3;c1,c2,c3`, got `{text}`"
        ))
    };
    let groups: Vec<&str> = text.split(';').collect();
    if groups.len() != 3 {
        return Err(bad());
    }
    let mut slots = [AlgVec::ZERO; 3];
    for (slot, group) in slots.iter_mut().zip(&groups) {
        let parts: Vec<&str> = group.split(',').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let mut coords = [0.0; 3];
        for (c, p) in coords.iter_mut().zip(&parts) {
            *c = p.trim().parse().map_err(|_| bad())?;
        }
        *slot = AlgVec(coords);
    }
    Ok(MPoint::new(slots[0], slots[1], slots[2]))
}

fn tolerance_ladder() -> Json {
    Json::obj(vec![
        ("exact_algebra", Json::Num(1e-12)),
        ("linear_solve", Json::Num(1e-9)),
        ("tensor_derivative", Json::Num(1e-8)),
        ("finite_difference", Json::Num(1e-6)),
    ])
}

fn report_json(rep: &SuiteReport) -> Json {
    let checks = rep
        .checks
        .iter()
        .map(|c| {
            let worst = match (&c.worst_point, c.pass) {
                (Some(p), false) => Json::floats(&p.to_array()),
                _ => Json::Null,
            };
            Json::obj(vec![
                ("max_residual", Json::Num(c.max_residual)),
                ("name", Json::Str(c.name.clone())),
                ("pass", Json::Bool(c.pass)),
                ("tolerance", Json::Num(c.tolerance)),
                ("worst_failing_point", worst),
            ])
        })
        .collect();
    Json::obj(vec![
        ("checks", Json::Arr(checks)),
        ("pass", Json::Bool(rep.pass())),
        ("samples", Json::Int(rep.samples as i64)),
        ("seed", Json::Int(rep.seed as i64)),
        ("suite", Json::Str(rep.suite.clone())),
        ("tolerance_ladder", tolerance_ladder()),
    ])
}

fn cmd_verify(opts: &Opts) -> Result<u8, UsageError> {
    if opts.samples == 0 {
        return Err(UsageError("--samples must be at least 1".into()));
    }
    if opts.suite != "all" && !SUITES.contains(&opts.suite.as_str()) {
        return Err(UsageError(format!(
            "unknown suite `{}` (expected one of: {} all)",
            opts.suite,
            SUITES.join(" ")
        )));
    }
    let cfg = SuiteConfig {
        seed: opts.seed,
        samples: opts.samples,
        region: opts.region,
        phi_floor: opts.phi_floor,
        tol_overrides: opts.tols.clone(),
    };
    let reports = run_suite(&opts.suite, &cfg).expect("suite name validated above");
    let pass = reports.iter().all(SuiteReport::pass);
    let out = Json::obj(vec![
        ("pass", Json::Bool(pass)),
        (
            "reports",
            Json::Arr(reports.iter().map(report_json).collect()),
        ),
    ]);
    println!("{}", out.render());
    Ok(if pass { 0 } else { 1 })
}

fn verdict_json(rep: &hyperlie::flow::ConvergenceReport) -> Json {
    let (verdict, r) = match rep.verdict {
        Verdict::ConvergesTo { r } => ("converges_to", Json::Num(r)),
        Verdict::Diverges => ("diverges", Json::Null),
        Verdict::LeavesPositivity => ("leaves_positivity", Json::Null),
        Verdict::Inconclusive => ("inconclusive", Json::Null),
    };
    Json::obj(vec![
        ("r", r),
        ("t_reached", Json::Num(rep.t_reached)),
        (
            "thresholds",
            Json::obj(vec![
                ("eps_crit", Json::Num(rep.thresholds.eps_crit)),
                ("f_max_factor", Json::Num(rep.thresholds.f_max_factor)),
            ]),
        ),
        ("verdict", Json::Str(verdict.into())),
    ])
}

fn cmd_flow(opts: &Opts) -> Result<u8, UsageError> {
    let init = parse_init(
        opts.init
            .as_deref()
            .ok_or_else(|| UsageError("flow needs --init".into()))?,
    )?;
    let (t0, t1) = match (opts.t0, opts.t1) {
        (Some(t0), Some(t1)) => (t0, t1),
        _ => return Err(UsageError("flow needs --t0 and --t1".into())),
    };
    let out_path = opts
        .out
        .as_ref()
        .ok_or_else(|| UsageError("flow needs --out PATH for the trajectory".into()))?;
    let cfg = FlowConfig::new(t0, t1);
    let traj = integrate(&init, &cfg).map_err(|e| UsageError(e.to_string()))?;
    std::fs::write(out_path, traj.to_csv())
        .map_err(|e| UsageError(format!("cannot write {}: {e}", out_path.display())))?;

    // classification always runs backward from the initial point, on its
    // own deep horizon, independent of the export window
    let classify_cfg = FlowConfig {
        max_steps: 400_000,
        ..FlowConfig::new(0.0, -2e5)
    };
    let rep = classify_limit(&init, &classify_cfg, &BasinThresholds::default())
        .map_err(|e| UsageError(e.to_string()))?;
    println!("{}", verdict_json(&rep).render());
    Ok(0)
}

fn cmd_classify(opts: &Opts) -> Result<u8, UsageError> {
    let p = parse_init(
        opts.init
            .as_deref()
            .ok_or_else(|| UsageError("classify needs --init".into()))?,
    )?;
    let g = gram(&p).to_matrix();
    let (eigs, _) = sym_eigen(&Mat::from_rows(&[
        g[0].to_vec(),
        g[1].to_vec(),
        g[2].to_vec(),
    ]));
    let (membership, r, lambda) = match classify_stratum(&p) {
        SClass::OrbitStratum { r, lambda } => ("S_O", Json::Num(r), Json::Num(lambda)),
        SClass::ZeroStratum { lambda } => ("S_0", Json::Num(0.0), Json::Num(lambda)),
        SClass::NotInS => ("not_in_S", Json::Null, Json::Null),
    };
    let out = Json::obj(vec![
        ("casimirs", Json::floats(&casimirs(&p))),
        ("gram_eigenvalues", Json::floats(&eigs)),
        ("lambda", lambda),
        ("phi", Json::Num(phi(&p))),
        ("r", r),
        ("s_membership", Json::Str(membership.into())),
    ]);
    println!("{}", out.render());
    Ok(0)
}

fn cmd_project(opts: &Opts) -> Result<u8, UsageError> {
    let p = parse_init(
        opts.init
            .as_deref()
            .ok_or_else(|| UsageError("project needs --init".into()))?,
    )?;
    let z = pr12(&p);
    let class = orbit_classify(z);
    let kind = match class.kind {
        OrbitKind::Zero => "zero",
        OrbitKind::Nilpotent => "nilpotent",
        OrbitKind::RegularSemisimple => "regular_semisimple",
    };
    let rank = match projection_rank(&p) {
        Ok(r) => Json::Int(r as i64),
        Err(_) => Json::Null,
    };
    // the orbit-form comparison only applies on the flow-limit strata
    let (kks_res, kks_sign) = if !matches!(classify_stratum(&p), SClass::NotInS) {
        match kks_residual(&p) {
            Ok(rep) => (Json::Num(rep.residual), Json::Num(rep.sign)),
            Err(_) => (Json::Null, Json::Null),
        }
    } else {
        (Json::Null, Json::Null)
    };
    let out = Json::obj(vec![
        (
            "casimir",
            Json::obj(vec![
                ("im", Json::Num(class.casimir.im)),
                ("re", Json::Num(class.casimir.re)),
            ]),
        ),
        ("kind", Json::Str(kind.into())),
        ("kks_residual", kks_res),
        ("kks_sign", kks_sign),
        ("projection_rank", rank),
        (
            "z",
            Json::obj(vec![
                ("im", Json::floats(&z.im.0)),
                ("re", Json::floats(&z.re.0)),
            ]),
        ),
    ]);
    println!("{}", out.render());
    Ok(0)
}

fn dispatch() -> u8 {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return 2;
    };
    if command == "--help" || command == "-h" || command == "help" {
        println!("{USAGE}");
        return 0;
    }
    let rest = &args[1..];
    let result = Opts::parse(rest).and_then(|opts| match command.as_str() {
        "verify" => cmd_verify(&opts),
        "flow" => cmd_flow(&opts),
        "classify" => cmd_classify(&opts),
        "project" => cmd_project(&opts),
        other => Err(UsageError(format!("unknown command `{other}`"))),
    });
    match result {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `hyperlie --help` for usage");
            2
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(dispatch())
}
