use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use meshwave_core::engine::{
    attribute_components, compare, replication_seeds, run, run_many, write_samples_csv, Aggregate, RunResult,
};
use meshwave_core::policy::{policy_sweep, PolicyConfig, SweepGrid};
use meshwave_core::scenario::{parse_scenario, validate, ScenarioError};
use meshwave_core::{Mode, ScenarioConfig};

#[derive(Parser)]
#[command(name = "meshwave", version, about = "Mesh / broadcast-offload / broker network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write run.json, samples.csv and a summary.
    Simulate {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a baseline and a proposed scenario of the same family and compare them.
    Compare {
        baseline: PathBuf,
        proposed: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Skip the per-layer attribution runs.
        #[arg(long)]
        no_attribution: bool,
    },
    /// Evaluate the policy economics over a parameter grid.
    Policy {
        inputs: PathBuf,
        /// Grid override, e.g. `beta=0.05,0.1,0.2;alpha=0.08,0.12`.
        #[arg(long)]
        sweep: Option<String>,
        /// Print the policy-score and net-benefit argmax rows.
        #[arg(long)]
        argmax: bool,
        /// Output directory, or `-` for CSV on standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check scenario or policy files without running anything.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Root seed. Falls back to the file's seed, then to MESHWAVE_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Replication count; overrides the file.
    #[arg(long)]
    replications: Option<u32>,
    /// Output directory, or `-` for JSON on standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for replications (default: logical processors).
    #[arg(long)]
    jobs: Option<usize>,
}

/// Error with its exit code.
#[derive(Debug)]
enum Failure {
    Validation(String),
    Io(String),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Io(_) => 3,
            Failure::Mismatch(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) | Failure::Io(m) | Failure::Mismatch(m) => f.write_str(m),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io { .. } => Failure::Io(e.to_string()),
            ScenarioError::Parse { .. } => Failure::Validation(e.to_string()),
            ScenarioError::Validation(v) => Failure::Validation(format!("invalid scenario: {}", v.join("; "))),
        }
    }
}

fn io_err(path: &Path, e: impl fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Loads a scenario. Seed precedence: `--seed`, the file, `MESHWAVE_SEED`.
fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, Failure> {
    let text = read(path)?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    if let Some(obj) = value.as_object_mut() {
        if let Some(s) = seed {
            obj.insert("seed".into(), s.into());
        } else if !obj.contains_key("seed") {
            if let Some(s) = env_seed()? {
                obj.insert("seed".into(), s.into());
            }
        }
    }
    Ok(parse_scenario(&value.to_string(), path)?)
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var("MESHWAVE_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Validation(format!("MESHWAVE_SEED is not an unsigned integer: {v:?}"))),
        Err(_) => Ok(None),
    }
}

enum Out {
    Dir(PathBuf),
    Stdout,
}

fn out_target(out: Option<PathBuf>) -> Result<Out, Failure> {
    match out {
        Some(p) if p.as_os_str() == "-" => Ok(Out::Stdout),
        Some(p) => {
            fs::create_dir_all(&p).map_err(|e| io_err(&p, e))?;
            Ok(Out::Dir(p))
        }
        None => Ok(Out::Dir(PathBuf::from("."))),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn to_json<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

fn set_jobs(jobs: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Failure::Validation("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Validation(e.to_string()))?;
    }
    Ok(())
}

/// One run at `seed` for a single replication, `seed ^ i` otherwise.
fn runs_for(config: &ScenarioConfig, n: u32) -> Result<Vec<RunResult>, Failure> {
    let result = if n <= 1 { run(config, config.seed).map(|r| vec![r]) } else { run_many(config, &replication_seeds(config.seed, n)) };
    result.map_err(|e| Failure::Validation(e.to_string()))
}

/// Text rounding: times and rates to 2 decimals, loss to 4, indices to 3.
fn fmt_metric(name: &str, v: f64) -> String {
    match name {
        "latency_p95_ms" | "throughput_mbps" | "t_rec_mean_s" | "t_rec_single_s" | "t_rec_multi_s" | "d_mesh_mean" => {
            format!("{v:.2}")
        }
        "loss" | "throughput_per_user_mbps" => format!("{v:.4}"),
        _ => format!("{v:.3}"),
    }
}

fn cmd_simulate(path: &Path, args: RunArgs) -> Result<(), Failure> {
    set_jobs(args.jobs)?;
    let config = load(path, args.seed)?;
    let n = args.replications.unwrap_or(config.replications);
    if n == 0 {
        return Err(Failure::Validation("--replications must be at least 1".into()));
    }
    let runs = runs_for(&config, n)?;
    let agg = Aggregate::from_runs(&runs).map_err(|e| Failure::Validation(e.to_string()))?;
    let first = &runs[0];

    let mut table = format!(
        "scenario {} ({} mode), {} replication(s), seeds {:?}\n{:<26} {:>12} {:>12}\n",
        config.name, config.mode, runs.len(), agg.seeds, "metric", "mean", "ci95 +-"
    );
    for (name, _) in first.kpis.fields() {
        let ci = agg.intervals.get(name).map_or("-".to_string(), |c| fmt_metric(name, c.half_width));
        table += &format!("{:<26} {:>12} {:>12}\n", name, fmt_metric(name, agg.mean(name)), ci);
    }

    match out_target(args.out)? {
        Out::Stdout => {
            io::stdout().write_all(&to_json(first)).map_err(|e| Failure::Io(e.to_string()))?;
            eprint!("{table}");
        }
        Out::Dir(dir) => {
            write_file(&dir.join("run.json"), &to_json(first))?;
            let mut csv = Vec::new();
            write_samples_csv(first, &mut csv).map_err(|e| Failure::Io(e.to_string()))?;
            write_file(&dir.join("samples.csv"), &csv)?;
            if runs.len() > 1 {
                write_file(&dir.join("aggregate.json"), &to_json(&agg))?;
            }
            print!("{table}");
        }
    }
    Ok(())
}

fn cmd_compare(base_path: &Path, prop_path: &Path, args: RunArgs, no_attribution: bool) -> Result<(), Failure> {
    set_jobs(args.jobs)?;
    let base = load(base_path, args.seed)?;
    let mut prop = load(prop_path, args.seed)?;
    if base.mode == prop.mode {
        return Err(Failure::Mismatch(format!("both scenarios are in {} mode", base.mode)));
    }
    if base.mode != Mode::Baseline {
        return Err(Failure::Mismatch("first scenario must be the baseline".into()));
    }
    if base.family_fingerprint() != prop.family_fingerprint() {
        return Err(Failure::Mismatch("scenarios differ beyond mode".into()));
    }
    // Both sides use the same seeds.
    prop.seed = base.seed;
    let n = args.replications.unwrap_or(base.replications);
    if n == 0 {
        return Err(Failure::Validation("--replications must be at least 1".into()));
    }
    let b = Aggregate::from_runs(&runs_for(&base, n)?).map_err(|e| Failure::Validation(e.to_string()))?;
    let p = Aggregate::from_runs(&runs_for(&prop, n)?).map_err(|e| Failure::Validation(e.to_string()))?;
    let mut report = compare(&b, &p).map_err(|e| Failure::Mismatch(e.to_string()))?;
    if !no_attribution {
        report.attribution =
            Some(attribute_components(&prop, prop.seed).map_err(|e| Failure::Validation(e.to_string()))?);
    }

    let mut table = format!("{:<26} {:>12} {:>12} {:>12}\n", "Metric", "Baseline", "Proposed", "Improvement");
    for (name, _) in b.per_run[0].fields() {
        let imp = report.improvements.get(name).map_or("-".to_string(), |v| format!("{:+.1}%", v * 100.0));
        table += &format!(
            "{:<26} {:>12} {:>12} {:>12}\n",
            name,
            fmt_metric(name, b.mean(name)),
            fmt_metric(name, p.mean(name)),
            imp
        );
    }
    if let Some(a) = &report.attribution {
        table += "\nattribution (share of degradation when each layer is off)\n";
        for (metric, shares) in &a.shares {
            let parts: Vec<String> = shares.iter().map(|(k, v)| format!("{k} {:.3}", v)).collect();
            table += &format!("  {metric:<24} {}\n", parts.join("  "));
        }
    }

    match out_target(args.out)? {
        Out::Stdout => {
            io::stdout().write_all(&to_json(&report)).map_err(|e| Failure::Io(e.to_string()))?;
            eprint!("{table}");
        }
        Out::Dir(dir) => {
            write_file(&dir.join("comparison.json"), &to_json(&report))?;
            print!("{table}");
        }
    }
    Ok(())
}

fn parse_list(axis: &str, s: &str) -> Result<Vec<f64>, Failure> {
    let v: Vec<f64> = s
        .split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Validation(format!("bad {axis} value in sweep: {e}")))?;
    if v.is_empty() {
        return Err(Failure::Validation(format!("sweep axis {axis} is empty")));
    }
    Ok(v)
}

/// `beta=…;alpha=…;theta=a/b/c/d,…`; omitted axes keep the file's grid.
fn parse_sweep(spec: &str, base: &SweepGrid) -> Result<SweepGrid, Failure> {
    let mut grid = base.clone();
    for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (axis, values) =
            part.split_once('=').ok_or_else(|| Failure::Validation(format!("sweep term {part:?} has no '='")))?;
        match axis.trim() {
            "beta" => grid.betas = parse_list("beta", values)?,
            "alpha" | "alpha_s" => grid.alphas = parse_list("alpha", values)?,
            "theta" => {
                grid.thetas = values
                    .split(',')
                    .map(|t| {
                        let w = parse_list("theta", &t.replace('/', ","))?;
                        <[f64; 4]>::try_from(w)
                            .map_err(|_| Failure::Validation("theta needs four weights a/b/c/d".into()))
                    })
                    .collect::<Result<_, _>>()?;
            }
            other => return Err(Failure::Validation(format!("unknown sweep axis {other:?}"))),
        }
    }
    Ok(grid)
}

fn cmd_policy(path: &Path, sweep: Option<String>, argmax: bool, out: Option<PathBuf>) -> Result<(), Failure> {
    let config: PolicyConfig =
        serde_json::from_str(&read(path)?).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let v = config.violations();
    if !v.is_empty() {
        return Err(Failure::Validation(format!("invalid policy inputs: {}", v.join("; "))));
    }
    let grid = match &sweep {
        Some(s) => parse_sweep(s, &config.grid)?,
        None => config.grid.clone(),
    };
    let table = policy_sweep(&config, &grid).map_err(|e| Failure::Validation(e.to_string()))?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv).map_err(|e| Failure::Io(e.to_string()))?;

    let mut notes = Vec::new();
    if table.rows.iter().any(|r| (r.beta - 0.05).abs() < 1e-12) {
        notes.push(
            "note: at beta = 0.05 the benefit is lambda_r * RCG = 75000; the reference table lists 80000"
                .to_string(),
        );
    }
    if table.rows.iter().any(|r| r.deficit_inconsistent) {
        notes.push(
            "note: the post-subsidy deficit equation disagrees with the coverage-based deficit (see delta_r_eq vs delta_r_coverage)"
                .to_string(),
        );
    }
    let mut text = format!("{} rows; B_eff-optimal alpha_s: {:?}\n", table.rows.len(), table.beff_optimal_alpha);
    if argmax {
        let ps = &table.rows[table.argmax_ps];
        let nsb = &table.rows[table.argmax_nsb];
        text += &format!(
            "argmax PS:  beta={} alpha_s={} theta={:?} ps={:.3}\n",
            ps.beta, ps.alpha_s, ps.theta, ps.ps
        );
        text += &format!("argmax NSB: beta={} alpha_s={} nsb={:.2}\n", nsb.beta, nsb.alpha_s, nsb.nsb);
    }
    for n in &notes {
        text += n;
        text.push('\n');
    }

    match out_target(out)? {
        Out::Stdout => {
            io::stdout().write_all(&csv).map_err(|e| Failure::Io(e.to_string()))?;
            eprint!("{text}");
        }
        Out::Dir(dir) => {
            write_file(&dir.join("policy_sweep.csv"), &csv)?;
            print!("{text}");
        }
    }
    Ok(())
}

fn cmd_validate(files: &[PathBuf]) -> Result<(), Failure> {
    let mut bad = Vec::new();
    for f in files {
        let text = read(f)?;
        let value: Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(e) => {
                bad.push(format!("{}: {e}", f.display()));
                continue;
            }
        };
        let violations = if value.get("subsidy").is_some() {
            match serde_json::from_value::<PolicyConfig>(value) {
                Ok(p) => p.violations(),
                Err(e) => vec![e.to_string()],
            }
        } else {
            match serde_json::from_value::<ScenarioConfig>(value) {
                Ok(mut c) => {
                    c.normalize();
                    validate(&c)
                }
                Err(e) => vec![e.to_string()],
            }
        };
        if violations.is_empty() {
            println!("{}: ok", f.display());
        } else {
            for v in &violations {
                println!("{}: {v}", f.display());
            }
            bad.push(format!("{}: {} violation(s)", f.display(), violations.len()));
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(bad.join("\n")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { scenario, run } => cmd_simulate(&scenario, run),
        Command::Compare { baseline, proposed, run, no_attribution } => {
            cmd_compare(&baseline, &proposed, run, no_attribution)
        }
        Command::Policy { inputs, sweep, argmax, out } => cmd_policy(&inputs, sweep, argmax, out),
        Command::Validate { files } => cmd_validate(&files),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
