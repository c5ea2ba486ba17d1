use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use divstr::color::{fpt_solve, FptOptions, DEFAULT_REPETITION_CAP};
use divstr::exact::{optimize, solve, SolveOptions};
use divstr::lcs::build_lcs_dag;
use divstr::local_search::{parse_rational, ptas_maxsum};
use divstr::oracle::{
    brute_clique, brute_diverse, brute_farthest, brute_lcs_set_many, brute_matching_3dm,
    OracleBudget,
};
use divstr::reductions::{
    encode_as_lcs_stretched, reduce_3dm, reduce_clique, safe_stretch, ThreeDmInstance, UGraph,
};
use divstr::strings::parse_string_list;
use divstr::{Diversity, Error, Mode, RString, Semantics, SigmaDag, StringSet};

#[derive(Parser)]
#[command(
    name = "divstr",
    version,
    about = "Diverse string selection over string sets and Σ-DAGs"
)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Omit wall-clock fields so output is byte-identical across runs.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// Σ-DAG file.
    #[arg(long)]
    dag: Option<PathBuf>,
    /// String-set file (turned into a trie).
    #[arg(long)]
    strings: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact layered DP (decision, or optimum with --optimize).
    Exact {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        mode: Mode,
        #[arg(long)]
        k: usize,
        #[arg(long, required_unless_present = "optimize")]
        delta: Option<u64>,
        /// Binary search for the largest feasible Δ.
        #[arg(long)]
        optimize: bool,
        #[arg(long, default_value = "tuple")]
        semantics: Semantics,
        #[arg(long)]
        witness: bool,
        #[arg(long)]
        max_states: Option<usize>,
    },
    /// (1−ε)-approximate max-sum selection of K distinct strings.
    Ptas {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Randomized color-coding solver.
    Fpt {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        mode: Mode,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Repetitions; defaults to ⌈ln 100 / p⌉ capped by --max-reps.
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_REPETITION_CAP)]
        max_reps: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        witness: bool,
    },
    /// Σ-DAG of all longest common subsequences.
    LcsDag {
        #[arg(long)]
        strings: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a reduced instance.
    Reduce {
        #[command(subcommand)]
        kind: Reduce,
    },
    /// Brute-force references.
    Oracle {
        #[command(subcommand)]
        problem: Oracle,
    },
    /// List the language of a Σ-DAG.
    Enumerate {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 100_000)]
        limit: usize,
    },
    /// Check that a Σ-DAG file is well formed.
    Validate {
        #[arg(long)]
        dag: PathBuf,
    },
}

#[derive(Subcommand)]
enum Reduce {
    #[command(name = "3dm")]
    ThreeDm {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Clique {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        k: usize,
    },
    LcsEncode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta: u64,
        #[arg(long)]
        mode: Mode,
        /// Symbols per padding index; 1 gives the unstretched construction,
        /// which can be wrong once r ≥ 2. Defaults to (s−1)·r + 1.
        #[arg(long)]
        stretch: Option<usize>,
    },
}

#[derive(Subcommand)]
enum Oracle {
    /// Best K-selection by exhaustive enumeration.
    Diverse {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        mode: Mode,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta: Option<u64>,
        #[arg(long, default_value = "tuple")]
        semantics: Semantics,
    },
    /// All longest common subsequences of the listed strings.
    Lcs {
        #[arg(long)]
        strings: PathBuf,
    },
    /// Farthest member from a reference list.
    Farthest {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        refs: PathBuf,
    },
    #[command(name = "3dm")]
    ThreeDm {
        #[arg(long = "in")]
        input: PathBuf,
    },
    Clique {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: usize,
    },
}

/// Everything a command reports.
#[derive(Debug, Default, Serialize)]
struct RunReport {
    command: String,
    decision: Option<bool>,
    #[serde(skip)]
    value_label: &'static str,
    value: Option<String>,
    witness: Option<Vec<String>>,
    stats: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_secs: Option<f64>,
    /// Extra `KEY value` lines for text output.
    #[serde(skip)]
    lines: Vec<String>,
    #[serde(skip)]
    print_witness: bool,
}

impl RunReport {
    fn new(command: &str) -> Self {
        RunReport {
            command: command.into(),
            ..Default::default()
        }
    }

    fn stat(&mut self, key: &str, value: impl Into<Value>) {
        self.stats.insert(key.into(), value.into());
    }
}

fn emit_report(report: &RunReport, format: Format) -> String {
    if format == Format::Json {
        let v = serde_json::to_value(report).expect("report serializes");
        return format!("{v}\n");
    }
    let mut out = String::new();
    if report.value_label == "VALUE" {
        if let Some(v) = &report.value {
            out.push_str(&format!("VALUE {v}\n"));
        }
    }
    if let Some(d) = report.decision {
        out.push_str(if d { "DECISION YES\n" } else { "DECISION NO\n" });
    }
    if report.value_label != "VALUE" {
        if let Some(v) = &report.value {
            out.push_str(&format!("{} {v}\n", report.value_label));
        }
    }
    for line in &report.lines {
        out.push_str(line);
        out.push('\n');
    }
    let stats: Vec<String> = report
        .stats
        .iter()
        .map(|(k, v)| match v {
            Value::String(s) => format!("{k}={s}"),
            other => format!("{k}={other}"),
        })
        .collect();
    out.push_str(&format!("STATS {}\n", stats.join(" ")));
    if let Some(t) = report.time_secs {
        out.push_str(&format!("TIME {t:.6}\n"));
    }
    if report.print_witness {
        for w in report.witness.iter().flatten() {
            out.push_str(w);
            out.push('\n');
        }
    }
    out
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn load_dag(input: &Input) -> Result<SigmaDag, Error> {
    match (&input.dag, &input.strings) {
        (Some(p), _) => SigmaDag::parse(&read(p)?),
        (_, Some(p)) => SigmaDag::from_strings(&StringSet::parse(&read(p)?)?),
        _ => unreachable!("clap enforces one input"),
    }
}

fn load_set(input: &Input, budget: &OracleBudget) -> Result<StringSet, Error> {
    match (&input.dag, &input.strings) {
        (Some(p), _) => SigmaDag::parse(&read(p)?)?.language(budget.max_candidates),
        (_, Some(p)) => StringSet::parse(&read(p)?),
        _ => unreachable!("clap enforces one input"),
    }
}

fn render(xs: &[RString]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn yes_no(r: &RunReport) -> u8 {
    match r.decision {
        Some(false) => 1,
        _ => 0,
    }
}

fn run(cli: &Cli) -> Result<(RunReport, u8), Error> {
    let started = Instant::now();
    let (mut report, code) = match &cli.command {
        Command::Exact {
            input,
            mode,
            k,
            delta,
            optimize: opt,
            semantics,
            witness,
            max_states,
        } => {
            let g = load_dag(input)?;
            let opts = SolveOptions {
                semantics: *semantics,
                max_states: *max_states,
            };
            let mut rep = RunReport::new("exact");
            rep.print_witness = *witness;
            rep.stat("mode", mode.to_string());
            rep.stat("k", *k);
            if *opt {
                match optimize(&g, *k, *mode, opts)? {
                    Some(best) => {
                        rep.decision = Some(true);
                        rep.value_label = "OPTIMUM";
                        rep.value = Some(best.value.to_string());
                        rep.witness = best.result.witness.as_deref().map(render);
                        rep.stat("states", best.result.stats.states);
                        rep.stat("calls", best.calls);
                    }
                    None => {
                        rep.decision = Some(false);
                        rep.stat("states", 0);
                    }
                }
            } else {
                let delta = delta.expect("clap requires --delta without --optimize");
                rep.stat("delta", delta);
                let res = solve(&g, *k, delta, *mode, opts)?;
                rep.decision = Some(res.decision);
                rep.value_label = "ACHIEVED";
                rep.value = res.achieved.map(|a| a.to_string());
                rep.witness = res.witness.as_deref().map(render);
                rep.stat("states", res.stats.states);
                rep.stat("peak_layer", res.stats.peak_layer);
            }
            let code = yes_no(&rep);
            (rep, code)
        }
        Command::Ptas {
            input,
            k,
            eps,
            seed,
        } => {
            let g = load_dag(input)?;
            let eps = parse_rational(eps)?;
            let out = ptas_maxsum(&g, *k, eps, *seed)?;
            let mut rep = RunReport::new("ptas");
            rep.value_label = "VALUE";
            rep.value = Some(out.value.to_string());
            rep.witness = Some(render(&out.strings));
            rep.print_witness = true;
            rep.stat("branch", serde_json::to_value(out.branch).unwrap());
            rep.stat("k", *k);
            rep.stat("eps", eps.to_string());
            rep.stat("states", 0);
            (rep, 0)
        }
        Command::Fpt {
            input,
            mode,
            k,
            delta,
            seed,
            reps,
            max_reps,
            threads,
            witness,
        } => {
            let g = load_dag(input)?;
            let repetitions = Some(
                reps.unwrap_or_else(|| divstr::color::default_repetitions(g.r(), *k, *max_reps)),
            );
            let opts = FptOptions {
                repetitions,
                threads: *threads,
                max_states: None,
            };
            let out = fpt_solve(&g, *k, *delta, *mode, *seed, opts)?;
            let mut rep = RunReport::new("fpt");
            rep.print_witness = *witness;
            rep.decision = Some(out.result.decision);
            rep.value_label = "ACHIEVED";
            rep.value = out.result.achieved.map(|a| a.to_string());
            rep.witness = out.result.witness.as_deref().map(render);
            rep.stat("states", out.stats.states);
            rep.stat("colors", out.stats.colors);
            rep.stat("repetitions", out.stats.repetitions_run);
            rep.stat("repetition_budget", out.stats.repetitions_budget);
            rep.stat("verification_failures", out.stats.verification_failures);
            rep.stat("max_trie_size", out.stats.max_trie_size);
            let code = yes_no(&rep);
            (rep, code)
        }
        Command::LcsDag { strings, out } => {
            let (_, members) = parse_string_list(&read(strings)?)?;
            let g = build_lcs_dag(&members)?;
            let mut rep = RunReport::new("lcs-dag");
            rep.lines.push(format!("R {}", g.r()));
            rep.stat("r", g.r());
            rep.stat("vertices", g.vertex_count());
            rep.stat("edges", g.size());
            rep.stat("states", g.vertex_count());
            match out {
                Some(path) => write(path, &g.to_text())?,
                None => {
                    rep.witness = Some(g.to_text().lines().map(String::from).collect());
                    rep.print_witness = true;
                }
            }
            (rep, 0)
        }
        Command::Reduce { kind } => (reduce(kind)?, 0),
        Command::Oracle { problem } => {
            let rep = oracle(problem)?;
            let code = yes_no(&rep);
            (rep, code)
        }
        Command::Enumerate { input, limit } => {
            let g = load_dag(input)?;
            let en = g.enumerate(*limit);
            let mut rep = RunReport::new("enumerate");
            rep.stat("count", en.strings.len());
            rep.stat("truncated", en.truncated);
            rep.stat("states", g.vertex_count());
            rep.witness = Some(render(&en.strings));
            rep.print_witness = true;
            let code = if en.truncated { 3 } else { 0 };
            (rep, code)
        }
        Command::Validate { dag } => {
            let g = SigmaDag::parse(&read(dag)?)?;
            let mut rep = RunReport::new("validate");
            rep.lines.push("VALID".into());
            rep.stat("r", g.r());
            rep.stat("vertices", g.vertex_count());
            rep.stat("edges", g.size());
            rep.stat("states", g.vertex_count());
            (rep, 0)
        }
    };
    if !cli.no_timing {
        report.time_secs = Some(started.elapsed().as_secs_f64());
    }
    Ok((report, code))
}

fn reduce(kind: &Reduce) -> Result<RunReport, Error> {
    let mut rep = RunReport::new("reduce");
    match kind {
        Reduce::ThreeDm { input, out } => {
            let inst = ThreeDmInstance::parse(&read(input)?)?;
            let red = reduce_3dm(&inst)?;
            write(out, &red.strings.to_text())?;
            rep.lines.push(format!("K {}", red.k));
            rep.lines.push(format!("DELTA_MIN {}", red.delta_min));
            rep.lines.push(format!("DELTA_SUM {}", red.delta_sum));
            rep.stat("strings", red.strings.len());
        }
        Reduce::Clique { input, out, k } => {
            let g = UGraph::parse(&read(input)?)?;
            let red = reduce_clique(&g, *k)?;
            write(out, &red.strings.to_text())?;
            rep.lines.push(format!("K {}", red.k));
            rep.lines.push(format!("DELTA_MIN {}", red.delta_min));
            rep.stat("strings", red.strings.len());
        }
        Reduce::LcsEncode {
            input,
            out,
            k,
            delta,
            mode,
            stretch,
        } => {
            let set = StringSet::parse(&read(input)?)?;
            let c = stretch.unwrap_or_else(|| safe_stretch(set.len(), set.r()));
            let enc = encode_as_lcs_stretched(&set, *k, *delta, *mode, c)?;
            write(out, &enc.to_text())?;
            rep.lines
                .push(format!("DELTA_SHIFTED {}", enc.shifted_delta));
            rep.stat("length", enc.s1.len());
            rep.stat("stretch", enc.stretch);
        }
    }
    rep.stat("states", 0);
    Ok(rep)
}

fn oracle(problem: &Oracle) -> Result<RunReport, Error> {
    let budget = OracleBudget::from_env();
    let mut rep = RunReport::new("oracle");
    rep.stat("states", 0);
    match problem {
        Oracle::Diverse {
            input,
            mode,
            k,
            delta,
            semantics,
        } => {
            let set = load_set(input, &budget)?;
            let out = brute_diverse(&set, *k, delta.unwrap_or(0), *mode, *semantics, &budget)?;
            rep.value_label = "OPTIMUM";
            rep.value = out.optimum.map(|o: Diversity| o.to_string());
            rep.decision = Some(if delta.is_some() {
                out.decision
            } else {
                out.optimum.is_some()
            });
            rep.witness = out.witness.as_deref().map(render);
            rep.print_witness = true;
            rep.stat("candidates", set.len());
        }
        Oracle::Lcs { strings } => {
            let (_, members) = parse_string_list(&read(strings)?)?;
            let set = brute_lcs_set_many(&members, &budget)?;
            rep.lines.push(format!("R {}", set.r()));
            rep.stat("count", set.len());
            rep.witness = Some(render(&set.sorted()));
            rep.print_witness = true;
        }
        Oracle::Farthest { input, refs } => {
            let set = load_set(input, &budget)?;
            let (_, refs) = parse_string_list(&read(refs)?)?;
            let refs = refs
                .iter()
                .map(|x| RString::parse(set.alphabet(), &x.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            let (y, v) = brute_farthest(&set, &refs, &budget)?;
            rep.value_label = "VALUE";
            rep.value = Some(v.to_string());
            rep.witness = Some(vec![y.to_string()]);
            rep.print_witness = true;
        }
        Oracle::ThreeDm { input } => {
            let inst = ThreeDmInstance::parse(&read(input)?)?;
            rep.decision = Some(brute_matching_3dm(&inst, &budget)?);
        }
        Oracle::Clique { input, k } => {
            let g = UGraph::parse(&read(input)?)?;
            rep.decision = Some(brute_clique(&g, *k, &budget)?);
        }
    }
    Ok(rep)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, code)) => {
            print!("{}", emit_report(&report, cli.format));
            ExitCode::from(code)
        }
        Err(e) => {
            if cli.format == Format::Json {
                println!("{}", json!({ "error": e.to_string() }));
            }
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Budget(_)) { 3 } else { 2 })
        }
    }
}
