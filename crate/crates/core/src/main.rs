use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use crlab::corpus::{
    builtin_scenarios, dependency_closure, load_scenario, run, RunOptions, Scenario,
};
use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "crlab",
    version,
    about = "Jet-based checks of CR structure equations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario (built-in name or JSON file) and print its report.
    Run {
        scenario: String,
        /// Jet order, overriding the scenario.
        #[arg(long)]
        order: Option<usize>,
        /// Tolerance override, `structural|dual_route|exact|<task>=VALUE`; repeatable.
        #[arg(long = "tol", value_name = "NAME=VAL")]
        tol: Vec<String>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        /// Include base-point tensors in the report.
        #[arg(long)]
        dump_tensors: bool,
        /// Include wall-clock times (the report is then no longer byte-stable).
        #[arg(long)]
        timing: bool,
    },
    /// List the built-in scenarios.
    List,
    /// Run the built-in corpus.
    Check {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Print a scenario's tasks and budgets.
    Describe { scenario: String },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    /// Skips the n = 3 sphere and the Whitney map.
    Fast,
}

fn parse_tol(items: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for it in items {
        let (k, v) = it
            .split_once('=')
            .with_context(|| format!("expected NAME=VAL, got `{it}`"))?;
        let v: f64 = v
            .trim()
            .parse()
            .with_context(|| format!("bad tolerance value in `{it}`"))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn describe(s: &Scenario) -> String {
    let mut out = format!("{}\n", s.name);
    if !s.description.is_empty() {
        out.push_str(&format!("  {}\n", s.description));
    }
    let requested: Vec<&str> = s.tasks.iter().map(|t| t.name()).collect();
    let all: Vec<&str> = dependency_closure(&s.tasks)
        .iter()
        .map(|t| t.name())
        .collect();
    out.push_str(&format!("  tasks     {}\n", requested.join(", ")));
    out.push_str(&format!("  runs      {}\n", all.join(" -> ")));
    out.push_str(&format!(
        "  jet order {}, E_k up to k = {}\n",
        s.jet_order, s.ek_order
    ));
    let src = s.source_spec();
    let bp: Vec<String> = src
        .base_point
        .iter()
        .map(|z| format!("{:.6}{:+.6}i", z.re, z.im))
        .collect();
    out.push_str(&format!(
        "  source    C^{}, base point ({})\n",
        src.ambient_complex_dim,
        bp.join(", ")
    ));
    if let Some(m) = &s.map {
        out.push_str(&format!("  map       {} components\n", m.len()));
    }
    if let Some(e) = &s.expect_ek {
        out.push_str(&format!(
            "  expects   E_k dims {:?}, s0 = {}, k0 = {}\n",
            e.dims, e.s0, e.k0
        ));
    }
    if s.expect_spherical {
        out.push_str("  expects   S = 0\n");
    }
    for (k, v) in &s.tolerances {
        out.push_str(&format!("  tol       {k} = {v:e}\n"));
    }
    out
}

fn main_inner() -> Result<bool> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run {
            scenario,
            order,
            tol,
            out,
            dump_tensors,
            timing,
        } => {
            let opts = RunOptions {
                order,
                tolerances: parse_tol(&tol)?,
                dump_tensors,
                timing,
                rotation: None,
            };
            let sc = load_scenario(&scenario)?;
            let report = run(&sc, &opts)?;
            let json = report.to_json();
            match out {
                Some(path) => {
                    std::fs::write(&path, json)
                        .with_context(|| format!("writing {}", path.display()))?;
                    eprint!("{}", report.summary());
                }
                None => print!("{json}"),
            }
            Ok(report.passed)
        }
        Cmd::List => {
            for s in builtin_scenarios() {
                println!("{:<22} {}", s.name, s.description);
            }
            Ok(true)
        }
        Cmd::Check { suite } => {
            let mut ok = true;
            for s in builtin_scenarios() {
                if suite == Suite::Fast && matches!(s.name.as_str(), "sphere-basics-n3" | "whitney")
                {
                    continue;
                }
                let t0 = Instant::now();
                let report = run(&s, &RunOptions::default())?;
                let verdict = if report.passed { "PASS" } else { "FAIL" };
                println!(
                    "{verdict} {:<22} {:>7.2}s",
                    s.name,
                    t0.elapsed().as_secs_f64()
                );
                if !report.passed {
                    print!("{}", report.summary());
                }
                ok &= report.passed;
            }
            Ok(ok)
        }
        Cmd::Describe { scenario } => {
            let s = load_scenario(&scenario)?;
            print!("{}", describe(&s));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
