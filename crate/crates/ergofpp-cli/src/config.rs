//! Flat `key = value` experiment configuration.
//!
//! Lists are written as repeated keys. `seeds` additionally accepts ranges
//! `a..b` (half open) and `a..=b`. Everything after a `#` is a comment.

use std::path::PathBuf;

use ergofpp::{ExperimentConfig, ExperimentKind};

pub const KEYS: [&str; 11] = [
    "experiment",
    "alpha",
    "lambda",
    "n_values",
    "seeds",
    "out_dir",
    "threads",
    "memory_cap",
    "k_max",
    "directions",
    "epsilon",
];

/// Parsed configuration plus the CLI-only settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    /// `(key, value)` pairs in file order, for the manifest.
    pub entries: Vec<(String, String)>,
}

pub fn parse_seeds(value: &str) -> Result<Vec<u64>, String> {
    let range = |lo: &str, hi: &str, inclusive: bool| -> Result<Vec<u64>, String> {
        let lo: u64 = lo.trim().parse().map_err(|_| format!("bad seed range start {lo:?}"))?;
        let hi: u64 = hi.trim().parse().map_err(|_| format!("bad seed range end {hi:?}"))?;
        let hi = if inclusive { hi.checked_add(1).ok_or("seed range overflows")? } else { hi };
        if lo >= hi {
            return Err(format!("empty seed range {value:?}"));
        }
        Ok((lo..hi).collect())
    };
    if let Some((lo, hi)) = value.split_once("..=") {
        range(lo, hi, true)
    } else if let Some((lo, hi)) = value.split_once("..") {
        range(lo, hi, false)
    } else {
        value
            .parse()
            .map(|s| vec![s])
            .map_err(|_| format!("bad seed {value:?}"))
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("{key}: cannot parse {value:?}"))
}

/// Parse a configuration file. Every problem is reported, with line
/// numbers for syntax errors, before anything runs.
pub fn parse(text: &str) -> Result<RunConfig, Vec<String>> {
    let mut errors = Vec::new();
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                let (k, v) = (k.trim(), v.trim());
                if KEYS.contains(&k) {
                    entries.push((k.to_string(), v.to_string()));
                } else {
                    errors.push(format!("line {}: unknown key {k:?}", i + 1));
                }
            }
            None => errors.push(format!("line {}: expected key = value", i + 1)),
        }
    }

    let single = |key: &str, errors: &mut Vec<String>| -> Option<String> {
        let values: Vec<&String> = entries.iter().filter(|e| e.0 == key).map(|e| &e.1).collect();
        if values.len() > 1 {
            errors.push(format!("{key}: given {} times", values.len()));
        }
        values.last().map(|v| v.to_string())
    };

    let kind = match single("experiment", &mut errors) {
        Some(v) => match v.parse::<ExperimentKind>() {
            Ok(k) => Some(k),
            Err(_) => {
                errors.push(format!("experiment: unknown value {v:?}"));
                None
            }
        },
        None => {
            errors.push("experiment: missing".to_string());
            None
        }
    };
    let mut cfg = ExperimentConfig::new(kind.unwrap_or(ExperimentKind::Variance));
    let mut out_dir = None;
    let mut threads = None;

    macro_rules! scalar {
        ($key:literal, $field:expr) => {
            if let Some(v) = single($key, &mut errors) {
                match number($key, &v) {
                    Ok(x) => $field = x,
                    Err(e) => errors.push(e),
                }
            }
        };
    }
    scalar!("alpha", cfg.alpha);
    scalar!("lambda", cfg.lambda);
    scalar!("memory_cap", cfg.memory_cap);
    scalar!("k_max", cfg.k_max);
    scalar!("directions", cfg.directions);
    scalar!("epsilon", cfg.epsilon);
    if let Some(v) = single("out_dir", &mut errors) {
        out_dir = Some(PathBuf::from(v));
    }
    if let Some(v) = single("threads", &mut errors) {
        match number::<usize>("threads", &v) {
            Ok(0) => errors.push("threads: must be positive".to_string()),
            Ok(t) => threads = Some(t),
            Err(e) => errors.push(e),
        }
    }

    let ns: Vec<&String> = entries.iter().filter(|e| e.0 == "n_values").map(|e| &e.1).collect();
    if !ns.is_empty() {
        cfg.n_values.clear();
        for v in ns {
            match number("n_values", v) {
                Ok(n) => cfg.n_values.push(n),
                Err(e) => errors.push(e),
            }
        }
    }
    let seeds: Vec<&String> = entries.iter().filter(|e| e.0 == "seeds").map(|e| &e.1).collect();
    if !seeds.is_empty() {
        cfg.seeds.clear();
        for v in seeds {
            match parse_seeds(v) {
                Ok(s) => cfg.seeds.extend(s),
                Err(e) => errors.push(format!("seeds: {e}")),
            }
        }
    }

    // An unknown kind falls back to variance, which adds no kind-specific problems.
    errors.extend(cfg.problems());
    if errors.is_empty() {
        Ok(RunConfig {
            experiment: cfg,
            out_dir,
            threads,
            entries,
        })
    } else {
        Err(errors)
    }
}
