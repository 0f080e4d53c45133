//! Batch front end.
//!
//! ```text
//! lcflow <command> [--config FILE] [--key value | --key=value]...
//! ```
//!
//! Each command writes `<out>/<command>.csv`, `<out>/<command>.json` and a
//! JSON-lines log `<out>/<command>.log.jsonl`; `simulate` also writes a
//! field snapshot. Exit status is 0 on success, 2 for invalid input and 3
//! for numerical failures, including failed built-in checks.

pub mod checks;
pub mod commands;
pub mod config;
pub mod report;
pub mod runs;

use std::path::PathBuf;

use serde_json::json;

pub use config::Config;
use report::{Reporter, RunLog};

use crate::error::{Error, Result};
use crate::field::write_snapshot;

pub const COMMANDS: [&str; 8] = [
    "profile",
    "fundamentals",
    "spectrum",
    "thm-spectral",
    "simulate",
    "droplet-compare",
    "residual-scaling",
    "identity-checks",
];

const COMMON: [(&str, &str); 2] = [("out", "lcflow-out"), ("threads", "auto")];

/// Keys and defaults accepted by a command.
pub fn defaults(command: &str) -> Result<Vec<(&'static str, &'static str)>> {
    let own: &[(&str, &str)] = match command {
        "profile" => &[("L", "-0.5"), ("z_max", "40"), ("nodes", "4001")],
        "fundamentals" => &[
            ("L", "-0.5"),
            ("A", "0.1,0.5,1"),
            ("y_max", "40"),
            ("nodes", "4001"),
        ],
        "spectrum" => &[("L", "-0.5"), ("eps", "0.1,0.05,0.025"), ("kinds", "0,1,2")],
        "thm-spectral" => &[("L", "-0.5"), ("eps", "0.1,0.05,0.025,0.0125")],
        "simulate" => &[
            ("geometry", "slab"),
            ("L", "-0.5"),
            ("eps", "0.05"),
            ("nodes", "auto"),
            ("t_end", "auto"),
            ("dt_factor", "0.1"),
            ("record_every", "50"),
            ("half_width", "0.5"),
            ("R0", "0.3"),
            ("anchoring_width", "0.2"),
            ("snapshot", "simulate.qfld"),
        ],
        "droplet-compare" => &[
            ("L", "-0.5"),
            ("eps", "0.02"),
            ("R0", "0.3"),
            ("nodes", "auto"),
            ("anchoring_width", "0.2"),
            ("dt_factor", "0.1"),
            ("record_every", "25"),
        ],
        "residual-scaling" => &[
            ("L", "-0.5"),
            ("eps", "0.04,0.02,0.01"),
            ("R0", "0.8"),
            ("delta", "0.4"),
            ("dim", "2"),
            ("nodes_per_eps", "8"),
            ("angles", "8"),
            ("flat_eps", "0.01"),
            ("flat_nodes", "1024"),
        ],
        "identity-checks" => &[
            ("seed", "1"),
            ("frames", "20"),
            ("pairs", "100"),
            ("fields", "20"),
            ("field_nodes", "64"),
        ],
        c => {
            return Err(Error::Config(format!(
                "unknown command `{c}` (expected one of {})",
                COMMANDS.join(", ")
            )))
        }
    };
    Ok(own.iter().chain(COMMON.iter()).copied().collect())
}

/// A command with its resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub command: String,
    pub config: Config,
}

impl Scenario {
    pub fn new(command: &str) -> Result<Self> {
        Ok(Scenario {
            command: command.to_string(),
            config: Config::with_defaults(&defaults(command)?),
        })
    }

    /// Parses `<command> [--config FILE] [--key value]...`. The file is
    /// applied first, flags override it.
    pub fn from_args(args: &[String]) -> Result<Self> {
        let command = args
            .first()
            .ok_or_else(|| Error::Config("missing command".into()))?;
        let mut sc = Scenario::new(command)?;
        let mut overrides = Vec::new();
        let mut file = None;
        let mut it = args[1..].iter();
        while let Some(a) = it.next() {
            let flag = a
                .strip_prefix("--")
                .ok_or_else(|| Error::Config(format!("expected `--key`, got `{a}`")))?;
            let (key, value) = match flag.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it
                        .next()
                        .ok_or_else(|| Error::Config(format!("`--{flag}` needs a value")))?;
                    (flag.to_string(), v.clone())
                }
            };
            if key == "config" {
                file = Some(value);
            } else {
                overrides.push((key, value));
            }
        }
        if let Some(path) = file {
            let text =
                std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
            sc.config.apply_text(&text)?;
        }
        for (k, v) in overrides {
            sc.config.set(&k, &v)?;
        }
        Ok(sc)
    }

    pub fn out_dir(&self) -> Result<PathBuf> {
        Ok(PathBuf::from(self.config.str("out")?))
    }
}

/// Files written by a run and whether its checks passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub passed: bool,
}

fn thread_pool(cfg: &Config) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.opt_usize("threads")? {
        if n == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

/// Executes a scenario and writes its reports.
pub fn run(sc: &Scenario) -> Result<Outcome> {
    let dir = sc.out_dir()?;
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let pool = thread_pool(&sc.config)?;
    let rep = Reporter {
        dir: dir.clone(),
        command: &sc.command,
        config: &sc.config,
    };
    let mut log = RunLog::create(&dir.join(format!("{}.log.jsonl", sc.command)))?;
    let cfg_json: serde_json::Map<String, serde_json::Value> = sc
        .config
        .entries()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    log.event(
        "start",
        json!({ "command": sc.command, "config": cfg_json }),
    );

    let result = pool.install(|| {
        commands::execute(&sc.command, &sc.config, &mut |row: &[f64]| {
            log.event("record", json!(row));
        })
    });
    let (out, field) = match result {
        Ok(r) => r,
        Err(e) => {
            log.event(
                "error",
                json!({ "message": e.to_string(), "exit_code": e.exit_code() }),
            );
            return Err(e);
        }
    };
    let mut files = Vec::new();
    for (name, table) in &out.tables {
        files.push(rep.write_csv(name, table)?);
    }
    files.push(rep.write_json(&format!("{}.json", sc.command), out.summary)?);
    if let Some(f) = field {
        let path = dir.join(sc.config.str("snapshot")?);
        write_snapshot(&f, std::io::BufWriter::new(std::fs::File::create(&path)?))?;
        files.push(path);
    }
    log.event(
        "finish",
        json!({ "passed": out.passed, "files": files.len() }),
    );
    Ok(Outcome {
        files,
        passed: out.passed,
    })
}

pub fn usage() -> String {
    let mut s = String::from(
        "usage: lcflow <command> [--config FILE] [--key value]...\n\ncommands and keys:\n",
    );
    for c in COMMANDS {
        let keys: Vec<String> = defaults(c)
            .unwrap()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        s.push_str(&format!("  {c:<17} {}\n", keys.join(" ")));
    }
    s
}

/// Parses, runs and maps the result to an exit code. Only
/// `identity-checks` treats failed checks as an error.
pub fn main_with_args(args: &[String]) -> i32 {
    if args.is_empty() || args.iter().any(|a| a == "--help" || a == "-h") {
        print!("{}", usage());
        return if args.is_empty() { 2 } else { 0 };
    }
    let outcome = Scenario::from_args(args).and_then(|sc| {
        let o = run(&sc)?;
        if sc.command == "identity-checks" && !o.passed {
            return Err(Error::CheckFailed(
                "identity checks failed, see identity-checks.csv".into(),
            ));
        }
        Ok(o)
    });
    match outcome {
        Ok(o) => {
            for f in &o.files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn parses_flags_and_negative_values() {
        let sc =
            Scenario::from_args(&args("droplet-compare --L -0.5 --eps=0.04 --R0 0.25")).unwrap();
        assert_eq!(sc.config.f64("L").unwrap(), -0.5);
        assert_eq!(sc.config.f64("eps").unwrap(), 0.04);
        assert_eq!(sc.config.f64("R0").unwrap(), 0.25);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Scenario::from_args(&args("spectrum --gamma 1")).is_err());
        assert!(Scenario::from_args(&args("launch")).is_err());
        assert!(Scenario::from_args(&args("profile L -1")).is_err());
        assert!(Scenario::from_args(&args("profile --L")).is_err());
    }

    #[test]
    fn every_command_has_defaults() {
        for c in COMMANDS {
            let d = defaults(c).unwrap();
            assert!(d.iter().any(|(k, _)| *k == "out"));
        }
    }
}
