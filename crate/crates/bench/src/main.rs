use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polyqaoa::circuit::GateModel;
use polyqaoa::encoding::{decode, encode, render_bits, VarSpec};
use polyqaoa::poly::{Algebra, MultilinearPoly};
use polyqaoa::quadratize::verify_quadratization;
use polyqaoa_bench::config::{DomainEntry, ModeName};
use polyqaoa_bench::sweep::{self, read_records, summarize, worker_count, SummaryRow};
use polyqaoa_bench::{
    brute_force, run_single, run_sweep, ExperimentConfig, Formulation, HarnessError, Instance, Problem,
    RunSettings, SweepPoint,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "polyqaoa", version, about = "Compile polynomial objectives to PUBO/QUBO QAOA circuits and benchmark them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Show the sign-magnitude bits of a single value
    Encode {
        #[arg(allow_hyphen_values = true)]
        value: f64,
        /// Magnitude exponent: the domain is ]-2^n, 2^n[
        #[arg(long)]
        n: u32,
        /// Number of fractional bits
        #[arg(short, long, default_value_t = 0)]
        m: u32,
        #[arg(long)]
        unsigned: bool,
    },
    /// Print the discretized polynomial and its spin Hamiltonian
    Hamiltonian {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        json: bool,
    },
    /// Reduce the PUBO to a QUBO and verify the reduction exhaustively
    Quadratize {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        json: bool,
    },
    /// Synthesize the QAOA circuit and report width, depth and gate counts
    Circuit {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(short = 'p', long, default_value_t = 1)]
        layers: usize,
        #[arg(long, value_parser = parse_gate_model, default_value = "ladder")]
        gate_model: GateModel,
        /// Print one line per gate
        #[arg(long)]
        list: bool,
        #[arg(long)]
        json: bool,
    },
    /// Train and sample a single configuration, printing its record as JSON
    Run {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(short = 'p', long, default_value_t = 1)]
        layers: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        max_iterations: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
        /// Train on sampled estimates with this many shots per evaluation
        #[arg(long)]
        sampled: Option<usize>,
    },
    /// Run a full sweep and write records.jsonl and summary.csv
    Sweep {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        preset: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (overrides POLYQAOA_WORKERS)
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Enumerate every assignment and report the minimum
    BruteForce {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        json: bool,
    },
    /// Recompute the summary table from a records file
    Report {
        records: PathBuf,
        /// Write the summary CSV here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Take objective and domain from a built-in preset (1d-st, 2d-rb)
    #[arg(long, conflicts_with_all = ["config", "objective"])]
    preset: Option<String>,
    /// Take objective and domain from a config file
    #[arg(long, conflicts_with = "objective")]
    config: Option<PathBuf>,
    /// Objective expression, e.g. "0.5*(x^4 - 16*x^2 + 5*x)"
    #[arg(long)]
    objective: Option<String>,
    /// Variable domain NAME:N or NAME:N:unsigned; repeat per variable
    #[arg(long = "var")]
    vars: Vec<String>,
    /// Bit resolution (fractional bits per variable)
    #[arg(short, long, default_value_t = 0)]
    m: u32,
    #[arg(long, default_value = "pubo")]
    formulation: Formulation,
}

impl ProblemArgs {
    fn resolve(&self) -> Result<(Problem, Option<ExperimentConfig>), HarnessError> {
        if let Some(name) = &self.preset {
            let c = ExperimentConfig::preset(name)?;
            return Ok((c.problem(), Some(c)));
        }
        if let Some(path) = &self.config {
            let c = ExperimentConfig::load(path)?;
            return Ok((c.problem(), Some(c)));
        }
        let objective = self
            .objective
            .clone()
            .ok_or_else(|| HarnessError::Config("give --preset, --config or --objective".into()))?;
        if self.vars.is_empty() {
            return Err(HarnessError::Config("--objective needs at least one --var NAME:N".into()));
        }
        let domain = self.vars.iter().map(|v| parse_var(v)).collect::<Result<_, _>>()?;
        let p = Problem { objective, domain };
        p.validate()?;
        Ok((p, None))
    }

    fn instance(&self) -> Result<(Problem, Option<ExperimentConfig>, Instance), HarnessError> {
        let (p, c) = self.resolve()?;
        let inst = Instance::build(&p, self.m, self.formulation)?;
        Ok((p, c, inst))
    }
}

fn parse_var(s: &str) -> Result<DomainEntry, HarnessError> {
    let bad = || HarnessError::Config(format!("bad --var `{s}` (expected NAME:N or NAME:N:unsigned)"));
    let parts: Vec<&str> = s.split(':').collect();
    let (name, n, signed) = match parts.as_slice() {
        [name, n] => (name, n, true),
        [name, n, "unsigned"] => (name, n, false),
        [name, n, "signed"] => (name, n, true),
        _ => return Err(bad()),
    };
    Ok(DomainEntry {
        name: name.to_string(),
        signed,
        n: n.parse().map_err(|_| bad())?,
    })
}

fn parse_gate_model(s: &str) -> Result<GateModel, String> {
    match s {
        "ladder" => Ok(GateModel::Ladder),
        "native" | "native_gadget" | "native-gadget" => Ok(GateModel::NativeGadget),
        _ => Err(format!("unknown gate model `{s}` (expected ladder or native_gadget)")),
    }
}

fn terms_json<A: Algebra>(p: &MultilinearPoly<A>) -> serde_json::Value {
    p.terms()
        .map(|(k, c)| json!({ "indices": k.as_slice(), "coefficient": c }))
        .collect()
}

fn print_json(v: &impl serde::Serialize) -> Result<(), HarnessError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn layout_lines(inst: &Instance) -> Vec<String> {
    inst.layout
        .entries
        .iter()
        .map(|e| {
            let r = e.range();
            format!("  {}: qubits {}..{} ({} bits)", e.spec.name, r.start, r.end, e.spec.width())
        })
        .collect()
}

fn print_summary_rows(rows: &[SummaryRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(std::io::stdout());
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn execute(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Encode { value, n, m, unsigned } => {
            let spec = if unsigned { VarSpec::unsigned("x", n, m) } else { VarSpec::signed("x", n, m) };
            spec.validate()?;
            let bits = encode(value, &spec)?;
            println!("bits:  {}", render_bits(&bits, &spec));
            println!("value: {}", decode(&bits, &spec)?);
        }
        Command::Hamiltonian { problem, json } => {
            let (p, _, inst) = problem.instance()?;
            if json {
                print_json(&json!({
                    "objective": p.objective,
                    "formulation": inst.formulation,
                    "num_qubits": inst.num_qubits(),
                    "num_ancilla": inst.num_ancilla(),
                    "pubo": terms_json(&inst.pubo),
                    "training": terms_json(&inst.training),
                    "hamiltonian": terms_json(&inst.hamiltonian),
                }))?;
            } else {
                println!("objective:   {}", inst.objective);
                println!("layout:");
                for l in layout_lines(&inst) {
                    println!("{l}");
                }
                println!("pubo ({} terms, degree {}):\n  {}", inst.pubo.len(), inst.pubo.degree(), inst.pubo);
                if inst.formulation == Formulation::Qubo {
                    println!(
                        "qubo ({} terms, {} ancillae):\n  {}",
                        inst.training.len(),
                        inst.num_ancilla(),
                        inst.training
                    );
                }
                println!(
                    "hamiltonian ({} qubits, {} terms):\n  {}",
                    inst.num_qubits(),
                    inst.hamiltonian.len(),
                    inst.hamiltonian
                );
            }
        }
        Command::Quadratize { mut problem, json } => {
            problem.formulation = Formulation::Qubo;
            let (_, _, inst) = problem.instance()?;
            let q = inst.quadratization.as_ref().expect("qubo instance");
            let report = verify_quadratization(&inst.pubo, q)?;
            if json {
                print_json(&json!({
                    "num_original_bits": q.num_original_bits,
                    "num_ancilla": q.num_ancilla,
                    "total_bits": q.total_bits(),
                    "pubo_degree": inst.pubo.degree(),
                    "substitutions": q.substitutions,
                    "qubo": terms_json(&q.qubo),
                    "verification": report,
                }))?;
            } else {
                println!(
                    "{} original bits + {} ancillae = {} qubits (pubo degree {})",
                    q.num_original_bits,
                    q.num_ancilla,
                    q.total_bits(),
                    inst.pubo.degree()
                );
                for s in &q.substitutions {
                    println!(
                        "  z{} = x{}*x{}  penalty {}  ({} terms rewritten)",
                        s.ancilla, s.pair.0, s.pair.1, s.penalty_weight, s.rewritten_terms
                    );
                }
                println!(
                    "verification: {} ({} assignments, {} mismatches, min {} vs {})",
                    if report.passed { "passed" } else { "FAILED" },
                    report.assignments_checked,
                    report.mismatches,
                    report.original_min,
                    report.qubo_min
                );
            }
            if !report.passed {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Circuit { problem, layers, gate_model, list, json } => {
            let (_, _, inst) = problem.instance()?;
            let ladder = inst.circuit(layers, GateModel::Ladder)?;
            let native = inst.circuit(layers, GateModel::NativeGadget)?;
            let chosen = if gate_model == GateModel::Ladder { &ladder } else { &native };
            if json {
                print_json(&json!({
                    "ladder": ladder.metrics(),
                    "native_gadget": native.metrics(),
                }))?;
            } else {
                println!("width:  {}", ladder.width());
                println!("layers: {layers}");
                for (name, c) in [("ladder", &ladder), ("native_gadget", &native)] {
                    let counts: Vec<String> = c.gate_counts().iter().map(|(k, n)| format!("{k}={n}")).collect();
                    println!("{name:14} depth {:6}  {}", c.depth(), counts.join(" "));
                }
            }
            if list {
                print!("{}", chosen.listing());
            }
        }
        Command::Run { problem, layers, seed, shots, max_iterations, tolerance, sampled } => {
            let (p, config, _) = problem.instance()?;
            let mut settings = config.map(|c| c.run_settings()).unwrap_or_else(RunSettings::default);
            if let Some(s) = shots {
                settings.shots = s;
            }
            if let Some(i) = max_iterations {
                settings.optimizer.max_iterations = i;
            }
            if let Some(t) = tolerance {
                settings.optimizer.tolerance = t;
            }
            if let Some(s) = sampled {
                settings.optimizer.mode = ModeName::Sampled;
                settings.optimizer.shots = s;
            }
            settings
                .optimizer
                .to_config()
                .validate()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            if settings.shots == 0 {
                return Err(HarnessError::Config("shots must be at least 1".into()));
            }
            let point = SweepPoint {
                formulation: problem.formulation,
                bit_resolution: problem.m,
                layers,
                seed,
            };
            let record = run_single(&p, &point, &settings, 0);
            print_json(&record)?;
            if let (Some(e), Some(kind)) = (&record.error, record.error_kind) {
                eprintln!("error: {e}");
                return Ok(ExitCode::from(kind.exit_code()));
            }
        }
        Command::Sweep { preset, config, out, workers } => {
            let c = match (preset, config) {
                (Some(name), _) => ExperimentConfig::preset(&name)?,
                (None, Some(path)) => ExperimentConfig::load(&path)?,
                (None, None) => unreachable!("clap requires one of them"),
            };
            let dir = out.unwrap_or_else(|| c.output.dir.clone());
            let n = worker_count(workers);
            eprintln!("running {} points on {n} workers into {}", c.points().len(), dir.display());
            let outcome = run_sweep(&c, Some(&dir), n)?;
            eprintln!(
                "wrote {} and {} ({} failed)",
                dir.join(sweep::RECORDS_FILE).display(),
                dir.join(sweep::SUMMARY_FILE).display(),
                outcome.failures()
            );
            if outcome.failures() > 0 {
                return Ok(ExitCode::from(2));
            }
        }
        Command::BruteForce { problem, json } => {
            let (p, _, _) = problem.instance()?;
            let b = brute_force(&p, problem.m, problem.formulation)?;
            if json {
                print_json(&b)?;
            } else {
                println!(
                    "{} over {} original bits ({} total): minimum {}",
                    b.formulation, b.original_bits, b.total_bits, b.minimum
                );
                for (bits, point) in b.argmin_bits.iter().zip(&b.argmin_points) {
                    let vals: Vec<String> = point.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    println!("  {bits}  ->  {}", vals.join(", "));
                }
            }
        }
        Command::Report { records, out } => {
            let rows = summarize(&read_records(&records)?);
            match out {
                Some(path) => sweep::write_summary(&rows, &path)?,
                None => print_summary_rows(&rows)?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(HarnessError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(HarnessError::Json(e)) if e.io_error_kind() == Some(std::io::ErrorKind::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
