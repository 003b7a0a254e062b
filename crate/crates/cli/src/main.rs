use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dynq::product::Regime;
use dynq::session::{relation_query, run_script, Program, Session, Setup};
use dynq::specs::{CnfGrammar, Dfa, EcrpqQuery, NepsSpec, SyncAutomaton};
use dynq::{bench, check, Error, LabeledGraph};

/// Incremental maintenance of graph query answers.
#[derive(Parser)]
#[command(name = "dynq", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay a modification script and print the answer at every `query` line
    Run(RunArgs),
    /// Compare every maintained query against its from-scratch oracle on random instances
    Check(CheckArgs),
    /// Time incremental updates against full recomputation (CSV on stdout)
    Bench(BenchArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Graph file; repeat for products and per-copy graphs
    #[arg(long, required = true)]
    graph: Vec<PathBuf>,
    #[arg(long)]
    script: PathBuf,
    #[arg(long, value_parser = parse_program)]
    program: Program,
    #[arg(long)]
    dfa: Option<PathBuf>,
    #[arg(long)]
    grammar: Option<PathBuf>,
    /// Synchronous relation; queries all endpoint tuples of paths in it
    #[arg(long)]
    sync: Option<PathBuf>,
    #[arg(long)]
    ecrpq: Option<PathBuf>,
    #[arg(long)]
    neps: Option<PathBuf>,
    #[arg(long)]
    lmax: Option<usize>,
    #[arg(long, value_parser = parse_regime)]
    regime: Option<Regime>,
}

#[derive(Args)]
struct CheckArgs {
    /// Trials per suite [default: each suite's own count]
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    max_nodes: Option<usize>,
    /// Run only these suites (repeatable)
    #[arg(long)]
    suite: Vec<String>,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark one program [default: all]
    #[arg(long, value_parser = parse_program)]
    program: Option<Program>,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    max_nodes: usize,
}

fn parse_program(s: &str) -> Result<Program, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load<T>(path: &Path, parse: impl FnOnce(&str) -> dynq::Result<T>) -> Result<T, String> {
    parse(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn setup(a: &RunArgs) -> Result<Setup, String> {
    let graphs = a
        .graph
        .iter()
        .map(|p| load(p, LabeledGraph::parse))
        .collect::<Result<Vec<_>, _>>()?;
    let al = graphs[0].alphabet().clone();
    let query = match (&a.ecrpq, &a.sync) {
        (Some(_), Some(_)) => return Err("give either --ecrpq or --sync, not both".into()),
        (Some(p), None) => {
            let dir = p.parent().unwrap_or(Path::new(".")).to_path_buf();
            let resolve = |name: &str| {
                fs::read_to_string(dir.join(name)).map_err(|e| Error::Invalid(format!("{name}: {e}")))
            };
            Some(load(p, |t| EcrpqQuery::parse(t, &al, &resolve))?)
        }
        (None, Some(p)) => Some(load(p, |t| SyncAutomaton::parse(t, &al).and_then(relation_query))?),
        (None, None) => None,
    };
    Ok(Setup {
        program: a.program,
        dfa: a.dfa.as_deref().map(|p| load(p, |t| Dfa::parse(t, &al))).transpose()?,
        grammar: a.grammar.as_deref().map(|p| load(p, |t| CnfGrammar::parse(t, &al))).transpose()?,
        neps: a.neps.as_deref().map(|p| load(p, NepsSpec::parse)).transpose()?,
        query,
        graphs,
        lmax: a.lmax,
        regime: a.regime,
    })
}

fn run(a: RunArgs) -> ExitCode {
    let prepared = setup(&a).and_then(|s| {
        let script = read(&a.script)?;
        let session = Session::new(s).map_err(|e| e.to_string())?;
        Ok((session, script))
    });
    let (mut session, script) = match prepared {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = run_script(&mut session, &script, &mut |line| {
        // a closed pipe ends output; the exit code still reports the script
        let _ = writeln!(out, "{line}");
    });
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", a.script.display());
            ExitCode::from(2)
        }
    }
}

fn check(a: CheckArgs) -> ExitCode {
    let mut selected = Vec::new();
    for name in &a.suite {
        match check::find(name) {
            Some(s) => selected.push(s),
            None => {
                let names: Vec<&str> = check::suites().iter().map(|s| s.name).collect();
                eprintln!("error: unknown suite `{name}`; available: {}", names.join(", "));
                return ExitCode::from(2);
            }
        }
    }
    if selected.is_empty() {
        selected.extend(check::suites());
    }
    // a trial index passes when every suite that ran it passed
    let mut by_index: BTreeMap<usize, bool> = BTreeMap::new();
    for s in selected {
        let trials = a.trials.unwrap_or(s.trials);
        let o = s.run(trials, a.seed, a.max_nodes);
        println!(
            "{:<18} {:>4}/{:<4} {:>8.2}s",
            o.suite,
            o.passed(),
            o.trials,
            o.elapsed.as_secs_f64()
        );
        for (t, e) in &o.failures {
            println!("  trial {t}: {e}");
        }
        for t in 0..trials {
            by_index.entry(t).or_insert(true);
        }
        for (t, _) in &o.failures {
            by_index.insert(*t, false);
        }
    }
    let passed = by_index.values().filter(|&&ok| ok).count();
    let total = by_index.len();
    if passed == total {
        println!("OK {passed}/{total}");
        ExitCode::SUCCESS
    } else {
        println!("FAIL {passed}/{total}");
        ExitCode::from(1)
    }
}

fn bench(a: BenchArgs) -> ExitCode {
    let programs = a.program.map_or(Program::ALL.to_vec(), |p| vec![p]);
    let samples = match bench::run(&programs, a.trials, a.seed, a.max_nodes) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    let header = ["program", "trial", "step", "nodes", "op", "incremental_us", "recompute_us"];
    let written = w.write_record(header).and_then(|_| {
        for s in &samples {
            w.write_record([
                s.program.name().to_string(),
                s.trial.to_string(),
                s.step.to_string(),
                s.nodes.to_string(),
                if s.insert { "ins" } else { "del" }.to_string(),
                format!("{:.3}", s.incremental.as_secs_f64() * 1e6),
                format!("{:.3}", s.recompute.as_secs_f64() * 1e6),
            ])?;
        }
        w.flush().map_err(csv::Error::from)
    });
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run(a) => run(a),
        Cmd::Check(a) => check(a),
        Cmd::Bench(a) => bench(a),
    }
}
