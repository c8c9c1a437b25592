//! `ergofpp`: inspect environments, query distances, check lemmas and run
//! experiment sweeps.
//!
//! Exit codes: 0 success, 1 lemma violation, 2 usage or configuration error,
//! 3 resource error (search region over the memory cap, I/O failure).

mod config;
mod manifest;

use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use ergofpp::experiments::{run_experiment, CSV_VERSION_LINE};
use ergofpp::geodesy::DEFAULT_MEMORY_CAP;
use ergofpp::oracle::check;
use ergofpp::{
    distance_with, wandering, Axis, Environment, Error, Lemma, SearchOptions, Vertex,
};

use crate::manifest::{FileDigest, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "ergofpp", version, about = "Exact first-passage percolation on odometer environments")]
struct Cli {
    /// Environment seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Weight parameter, in (0, 0.2).
    #[arg(long, global = true, default_value_t = 0.1)]
    alpha: f64,
    /// Output file (env, dist, geo, check) or directory (exp).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel commands.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest search box, in cells.
    #[arg(long, global = true)]
    memory_cap: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Digit prefixes, grid lines and a level heat map of a window.
    Env {
        #[arg(long, default_value_t = 50)]
        window: i64,
        /// Lower-left corner of the window as `x,y`.
        #[arg(long, default_value = "0,0", value_parser = parse_vertex, allow_hyphen_values = true)]
        origin: Vertex,
        /// Number of leading digits to print.
        #[arg(long, default_value_t = 16)]
        digits: usize,
        /// Highest grid level listed.
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
    /// Passage time between two vertices given as `x,y`.
    Dist {
        #[arg(value_parser = parse_vertex, allow_hyphen_values = true)]
        u: Vertex,
        #[arg(value_parser = parse_vertex, allow_hyphen_values = true)]
        v: Vertex,
        /// Include the geodesic's vertices.
        #[arg(long)]
        emit_path: bool,
    },
    /// Like `dist`, always including the geodesic.
    Geo {
        #[arg(value_parser = parse_vertex, allow_hyphen_values = true)]
        u: Vertex,
        #[arg(value_parser = parse_vertex, allow_hyphen_values = true)]
        v: Vertex,
    },
    /// Check a structural lemma; one JSON report per seed.
    Check {
        /// square, corner, rectangle, samevertex or inf-geo.
        #[arg(long)]
        lemma: String,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Seeds as `a..b`, `a..=b` or a single seed; defaults to `--seed`.
        #[arg(long)]
        seeds: Option<String>,
    },
    /// Run an experiment described by a configuration file.
    Exp { config: PathBuf },
}

fn parse_vertex(s: &str) -> Result<Vertex, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let x = x.trim().parse().map_err(|_| format!("bad x coordinate {x:?}"))?;
    let y = y.trim().parse().map_err(|_| format!("bad y coordinate {y:?}"))?;
    Ok(Vertex::new(x, y))
}

enum Failure {
    Violation,
    Usage(String),
    Resource(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::RegionTooLarge { .. } | Error::Unreachable { .. } => Failure::Resource(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Resource(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn emit(out: Option<&FsPath>, text: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable");
    s.push('\n');
    s
}

fn digits_prefix(digits: &[u8], count: usize) -> String {
    digits.iter().take(count).map(|d| char::from(b'0' + d)).collect()
}

fn cmd_env(cli: &Cli, window: i64, origin: Vertex, digits: usize, levels: u32) -> CmdResult {
    if window < 1 {
        return Err(Failure::Usage("window must be positive".to_string()));
    }
    let env = Environment::from_seed(cli.alpha, cli.seed)?;
    let (x1, y1) = (origin.x + window - 1, origin.y + window - 1);
    let mut text = format!(
        "seed {}\nalpha {}\nprecision {}\nomega_h {}\nomega_v {}\nwindow x {}..={} y {}..={}\n",
        env.seed(),
        env.alpha(),
        env.precision(),
        digits_prefix(env.omega_h().digits(), digits),
        digits_prefix(env.omega_v().digits(), digits),
        origin.x,
        x1,
        origin.y,
        y1,
    );
    let join = |v: Vec<i64>| v.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
    for k in 1..=levels.max(1) {
        let rows = env.grid_lines(k, origin.y, y1, Axis::Row)?;
        let cols = env.grid_lines(k, origin.x, x1, Axis::Col)?;
        text.push_str(&format!("grid {k} rows {}\n", join(rows)));
        text.push_str(&format!("grid {k} cols {}\n", join(cols)));
    }
    // Heat map: highest grid level through each vertex, top row first.
    let mut csv = format!("{CSV_VERSION_LINE}\ny");
    for x in origin.x..=x1 {
        csv.push_str(&format!(",{x}"));
    }
    csv.push('\n');
    for y in (origin.y..=y1).rev() {
        let row_level = env.row_level(y)?;
        csv.push_str(&y.to_string());
        for x in origin.x..=x1 {
            csv.push_str(&format!(",{}", row_level.max(env.col_level(x)?)));
        }
        csv.push('\n');
    }
    match &cli.out {
        Some(path) => {
            print!("{text}");
            fs::write(path, csv)?;
        }
        None => print!("{text}{csv}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct DistReport {
    u: Vertex,
    v: Vertex,
    time: f64,
    edges: usize,
    wandering: f64,
    expanded: u64,
    region_budget: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<Vec<Vertex>>,
}

fn options(cli: &Cli) -> SearchOptions {
    SearchOptions {
        memory_cap: cli.memory_cap.unwrap_or(DEFAULT_MEMORY_CAP),
    }
}

fn cmd_dist(cli: &Cli, u: Vertex, v: Vertex, emit_path: bool) -> CmdResult {
    let env = Environment::from_seed(cli.alpha, cli.seed)?;
    let g = distance_with(&env, u, v, &options(cli))?;
    let report = DistReport {
        u,
        v,
        time: g.time,
        edges: g.path.len(),
        wandering: wandering(u, v, &g.path),
        expanded: g.expanded,
        region_budget: g.region_budget,
        path: emit_path.then(|| g.path.vertices().to_vec()),
    };
    emit(cli.out.as_deref(), &json_line(&report))
}

fn cmd_check(cli: &Cli, lemma: &str, k: u32, trials: u64, seeds: Option<&str>) -> CmdResult {
    let lemma: Lemma = lemma.parse().map_err(|_| {
        let known: Vec<&str> = Lemma::ALL.iter().map(|l| l.name()).collect();
        Failure::Usage(format!("unknown lemma {lemma:?}; expected one of {}", known.join(", ")))
    })?;
    let seeds = match seeds {
        Some(s) => config::parse_seeds(s).map_err(Failure::Usage)?,
        None => vec![cli.seed],
    };
    let mut out = String::new();
    let mut violated = false;
    for seed in seeds {
        let env = Environment::from_seed(cli.alpha, seed)?;
        let report = check(&env, lemma, k, trials)?;
        violated |= !report.passed();
        let line = json_line(&report);
        if cli.out.is_none() {
            print!("{line}");
        }
        out.push_str(&line);
    }
    if let Some(path) = &cli.out {
        fs::write(path, out)?;
    }
    if violated {
        Err(Failure::Violation)
    } else {
        Ok(())
    }
}

fn cmd_exp(cli: &Cli, path: &FsPath) -> CmdResult {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut rc = config::parse(&text).map_err(|errs| Failure::Usage(errs.join("\n")))?;
    if let Some(cap) = cli.memory_cap {
        rc.experiment.memory_cap = cap;
    }
    let threads = cli.threads.or(rc.threads).unwrap_or(1);
    let dir = cli
        .out
        .clone()
        .or(rc.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("ergofpp-out"));

    let started_at = manifest::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Resource(e.to_string()))?;
    let output = pool.install(|| run_experiment(&rc.experiment))?;
    let csv = output.table.to_csv();
    let json = output.summary.to_json();

    fs::create_dir_all(&dir)?;
    fs::write(dir.join("samples.csv"), &csv)?;
    fs::write(dir.join("summary.json"), &json)?;
    let manifest = RunManifest {
        tool: "ergofpp".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: "exp".to_string(),
        config_entries: rc.entries.clone(),
        config: rc.experiment.clone(),
        seeds: rc.experiment.seeds.clone(),
        threads,
        started_at,
        finished_at: manifest::now(),
        files: vec![
            FileDigest::of("samples.csv", csv.as_bytes()),
            FileDigest::of("summary.json", json.as_bytes()),
        ],
    };
    manifest.write(&dir)?;

    let failed: Vec<&str> = output
        .summary
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    println!(
        "{}: {} rows -> {}",
        rc.experiment.experiment,
        output.table.rows.len(),
        dir.display()
    );
    if !output.summary.assertive {
        println!("summary is not assertive: too few seeds");
    }
    if !failed.is_empty() {
        println!("failed checks: {}", failed.join(", "));
    }
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Env {
            window,
            origin,
            digits,
            levels,
        } => cmd_env(cli, *window, *origin, *digits, *levels),
        Command::Dist { u, v, emit_path } => cmd_dist(cli, *u, *v, *emit_path),
        Command::Geo { u, v } => cmd_dist(cli, *u, *v, true),
        Command::Check {
            lemma,
            k,
            trials,
            seeds,
        } => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cli.threads.unwrap_or(1))
                .build()
                .map_err(|e| Failure::Resource(e.to_string()))?;
            pool.install(|| cmd_check(cli, lemma, *k, *trials, seeds.as_deref()))
        }
        Command::Exp { config } => cmd_exp(cli, config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => {
            eprintln!("lemma violated; see the witness in the report");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
