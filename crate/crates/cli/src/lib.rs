//! Command-line driver: solving, rewriting, evaluation, instance generation
//! and oracle checks over weighted KB files.
//!
//! Exit codes: 0 on success or a positive verdict, 1 on a negative verdict
//! of a check (`sat`, `entail`, `eval`, `oracle-check`), 2 on usage or input
//! errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use costlite::kb::validate_kb;
use costlite::reductions::formats::{parse_cnf, parse_dnf, parse_edge_list};
use costlite::reductions::random::harness_instance;
use costlite::reductions::{gen_3col, gen_3dnf_certain, gen_3dnf_cq_certain, gen_3sat, gen_lexmax};
use costlite::rewriter::{rewrite, RewriteOptions, Rewriting};
use costlite::solver::{entails_bounded, entails_opt, k_satisfiable, optimal_cost, Mode, SearchConfig, Verdict};
use costlite::textio::{parse_kb, parse_query, serialize_kb, serialize_query};
use costlite::{Query, Term, WeightedKb};

/// Environment variable overriding the number of free anonymous elements.
pub const MAX_ANON_ENV: &str = "COSTLITE_MAX_ANON";

#[derive(Parser, Debug)]
#[command(name = "costlite", version, about = "Cost-based reasoning over weighted DL knowledge bases")]
struct Cli {
    /// Structured JSON output instead of the text report.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    #[value(alias = "c")]
    Certain,
    #[value(alias = "p")]
    Possible,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Certain => Mode::Certain,
            ModeArg::Possible => Mode::Possible,
        }
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Budget {
    /// Cost bound.
    #[arg(long)]
    k: Option<u64>,
    /// Use the optimal cost.
    #[arg(long)]
    opt: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    #[value(name = "3sat")]
    Sat,
    #[value(name = "3dnf-iq")]
    DnfIq,
    #[value(name = "3dnf-cq")]
    DnfCq,
    #[value(name = "3col")]
    Col,
    Lexmax,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether some interpretation has cost at most K.
    Sat {
        /// Weighted KB file.
        #[arg(long)]
        kb: PathBuf,
        /// Cost bound.
        #[arg(long)]
        k: u64,
    },
    /// Bounded-cost or optimal-cost entailment of a Boolean CQ.
    Entail {
        /// Weighted KB file.
        #[arg(long)]
        kb: PathBuf,
        /// Query file, or the query text itself.
        #[arg(long)]
        query: String,
        /// Certain or possible answers (`c` and `p` also accepted).
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[command(flatten)]
        budget: Budget,
    },
    /// Compile a TBox, query and budget into a first-order query.
    Rewrite {
        /// KB file; only its TBox is used.
        #[arg(long)]
        tbox: PathBuf,
        /// Query file, or the query text itself.
        #[arg(long)]
        query: String,
        /// Cost bound.
        #[arg(long)]
        k: u64,
        /// Certain or possible answers (`c` and `p` also accepted).
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Largest ABox (in individuals) the rewriting must serve.
        #[arg(long)]
        max_abox: Option<usize>,
        /// Exact ABox-type tests with counting quantifiers.
        #[arg(long)]
        full_types: bool,
        /// Output `.fo` file.
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Evaluate a rewriting on a weighted ABox.
    Eval {
        /// Rewriting written by `rewrite`.
        #[arg(long)]
        fo: PathBuf,
        /// KB file; only its ABox is used.
        #[arg(long)]
        abox: PathBuf,
        /// Cost bound.
        #[arg(long)]
        k: u64,
        /// Certain or possible answers (`c` and `p` also accepted).
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// Generate a hard instance from a formula or graph.
    Gen {
        #[arg(value_enum)]
        family: Family,
        /// DIMACS CNF/DNF file or edge list.
        #[arg(long)]
        input: PathBuf,
        /// Variable whose lexmax value is queried (1-based).
        #[arg(long, default_value_t = 1)]
        index: usize,
        /// Output prefix: writes PREFIX.wkb and PREFIX.q.
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
    /// Compare rewriting answers with the solver on random instances.
    OracleCheck {
        /// Seed of the instance generator.
        #[arg(long)]
        seed: u64,
        /// Number of instances.
        #[arg(long)]
        count: usize,
        /// Certain or possible answers (`c` and `p` also accepted).
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// Answers of a CQ with answer variables, over the ABox individuals.
    Answers {
        /// Weighted KB file.
        #[arg(long)]
        kb: PathBuf,
        /// Query file, or the query text itself.
        #[arg(long)]
        query: String,
        /// Certain or possible answers (`c` and `p` also accepted).
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[command(flatten)]
        budget: Budget,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

struct Output {
    code: i32,
    text: String,
    json: Value,
}

/// Runs the CLI on `argv` (program name first).
pub fn run(argv: &[String]) -> Report {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Report { code, stdout: text, stderr: String::new() }
            } else {
                Report { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let cfg = match search_config() {
        Ok(c) => c,
        Err(Failure(m)) => return Report { code: 2, stdout: String::new(), stderr: format!("error: {m}\n") },
    };
    match dispatch(&cli.command, &cfg) {
        Ok(out) => {
            let stdout = if cli.json { format!("{}\n", out.json) } else { out.text };
            Report { code: out.code, stdout, stderr: String::new() }
        }
        Err(Failure(m)) => Report { code: 2, stdout: String::new(), stderr: format!("error: {m}\n") },
    }
}

fn search_config() -> Result<SearchConfig, Failure> {
    let mut cfg = SearchConfig::default();
    if let Ok(v) = std::env::var(MAX_ANON_ENV) {
        cfg.max_anonymous = v.trim().parse().map_err(|_| Failure(format!("{MAX_ANON_ENV} must be a number, got `{v}`")))?;
    }
    Ok(cfg)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_kb(path: &Path) -> Result<WeightedKb, Failure> {
    let kb = parse_kb(&read(path)?).map_err(|e| Failure(format!("{}:{e}", path.display())))?;
    let report = validate_kb(&kb);
    if !report.issues.is_empty() {
        return Err(Failure(format!("{}: {}", path.display(), report.issues.join("; "))));
    }
    Ok(kb)
}

/// A query given as a file path or inline text.
fn load_query(arg: &str) -> Result<Query, Failure> {
    let text = if Path::new(arg).is_file() { read(Path::new(arg))? } else { arg.to_string() };
    parse_query(text.trim()).map_err(|e| Failure(format!("query: {e}")))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn verdict_code(b: bool) -> i32 {
    if b {
        0
    } else {
        1
    }
}

/// Budget resolved against a KB: a fixed `k`, or the optimum (`None` when
/// infinite).
fn resolve_budget(kb: &WeightedKb, b: &Budget, cfg: &SearchConfig) -> Result<(Option<u64>, bool), Failure> {
    if let Some(k) = b.k {
        return Ok((Some(k), true));
    }
    let o = optimal_cost(kb, cfg)?;
    let k = match o.cost.to_u128() {
        Some(c) => Some(u64::try_from(c).map_err(|_| Failure("optimal cost exceeds 64 bits".into()))?),
        None => None,
    };
    Ok((k, o.complete))
}

fn budget_label(b: &Budget, k: Option<u64>) -> String {
    match (b.opt, k) {
        (false, Some(k)) => format!("k={k}"),
        (true, Some(k)) => format!("opt={k}"),
        (_, None) => "opt=inf".to_string(),
    }
}

fn dispatch(cmd: &Command, cfg: &SearchConfig) -> Result<Output, Failure> {
    match cmd {
        Command::Sat { kb, k } => {
            let kb = load_kb(kb)?;
            let v = k_satisfiable(&kb, *k, cfg)?;
            let text = format!("{k}-satisfiable: {}\nexhaustive: {}\n", yes_no(v.answer), v.complete);
            let json = json!({"command": "sat", "k": k, "answer": v.answer, "complete": v.complete});
            Ok(Output { code: verdict_code(v.answer), text, json })
        }
        Command::Entail { kb, query, mode, budget } => {
            let kb = load_kb(kb)?;
            let q = load_query(query)?;
            let mode = Mode::from(*mode);
            let v: Verdict = match budget.k {
                Some(k) => entails_bounded(&kb, &q, k, mode, cfg)?,
                None => entails_opt(&kb, &q, mode, cfg)?,
            };
            let k = match budget.k {
                Some(k) => Some(k),
                None => resolve_budget(&kb, budget, cfg)?.0,
            };
            let label = budget_label(budget, k);
            let text = format!("{} ({label}): {}\nexhaustive: {}\n", mode.label(), yes_no(v.answer), v.complete);
            let json = json!({
                "command": "entail", "mode": mode.label(), "k": k, "opt": budget.opt,
                "answer": v.answer, "complete": v.complete,
            });
            Ok(Output { code: verdict_code(v.answer), text, json })
        }
        Command::Rewrite { tbox, query, k, mode, max_abox, full_types, out } => {
            let kb = load_kb(tbox)?;
            let q = load_query(query)?;
            let opts = RewriteOptions { max_individuals: *max_abox, full_types: *full_types };
            let r = rewrite(&kb.tbox, &q, *k, Mode::from(*mode), &opts)?;
            fs::write(out, r.to_fo_text()).map_err(|e| Failure(format!("{}: {e}", out.display())))?;
            let text = format!(
                "wrote {}\nmode: {}\nk: {k}\nstrategies: {}\ngamma: {}\nregime: {}\nsize: {}\n",
                out.display(),
                r.mode.label(),
                r.strategies,
                r.max_gamma,
                r.regime,
                r.formula.size()
            );
            let json = json!({
                "command": "rewrite", "out": out.display().to_string(), "mode": r.mode.label(), "k": k,
                "strategies": r.strategies, "gamma": r.max_gamma, "regime": r.regime.to_string(), "size": r.formula.size(),
            });
            Ok(Output { code: 0, text, json })
        }
        Command::Eval { fo, abox, k, mode } => {
            let r = Rewriting::from_fo_text(&read(fo)?)?;
            let mode = Mode::from(*mode);
            if r.mode != mode || r.k != *k {
                return Err(Failure(format!(
                    "{} was compiled for mode {} and k={}, not {} and k={k}",
                    fo.display(),
                    r.mode.label(),
                    r.k,
                    mode.label()
                )));
            }
            let kb = load_kb(abox)?;
            let answer = r.answer(&kb.abox)?;
            let text = format!("{} (k={k}): {}\nregime: {}\n", mode.label(), yes_no(answer), r.regime);
            let json = json!({"command": "eval", "mode": mode.label(), "k": k, "answer": answer, "regime": r.regime.to_string()});
            Ok(Output { code: verdict_code(answer), text, json })
        }
        Command::Gen { family, input, index, out } => generate(*family, input, *index, out.as_deref()),
        Command::OracleCheck { seed, count, mode } => oracle_check(*seed, *count, Mode::from(*mode), cfg),
        Command::Answers { kb, query, mode, budget } => answers(kb, query, Mode::from(*mode), budget, cfg),
    }
}

fn generate(family: Family, input: &Path, index: usize, out: Option<&Path>) -> Result<Output, Failure> {
    let text = read(input)?;
    let (kb, q, k): (WeightedKb, Option<Query>, Option<u64>) = match family {
        Family::Sat => (gen_3sat(&parse_cnf(&text)?), None, Some(1)),
        Family::DnfIq => {
            let (kb, q, k) = gen_3dnf_certain(&parse_dnf(&text)?);
            (kb, Some(q), Some(k))
        }
        Family::DnfCq => {
            let (kb, q, k) = gen_3dnf_cq_certain(&parse_dnf(&text)?);
            (kb, Some(q), Some(k))
        }
        Family::Col => {
            let (kb, k) = gen_3col(&parse_edge_list(&text)?);
            (kb, None, Some(k))
        }
        Family::Lexmax => {
            let phi = parse_cnf(&text)?;
            if index == 0 || index > phi.num_vars {
                return Err(Failure(format!("--index must be between 1 and {}", phi.num_vars)));
            }
            let (kb, q) = gen_lexmax(&phi, index);
            (kb, Some(q), None)
        }
    };
    let budget = k.map_or("opt".to_string(), |k| k.to_string());
    let mut text = String::new();
    let mut files = vec![];
    match out {
        Some(prefix) => {
            let kb_path = prefix.with_extension("wkb");
            fs::write(&kb_path, serialize_kb(&kb)).map_err(|e| Failure(format!("{}: {e}", kb_path.display())))?;
            files.push(kb_path.display().to_string());
            if let Some(q) = &q {
                let q_path = prefix.with_extension("q");
                fs::write(&q_path, format!("{}\n", serialize_query(q)))
                    .map_err(|e| Failure(format!("{}: {e}", q_path.display())))?;
                files.push(q_path.display().to_string());
            }
            for f in &files {
                let _ = writeln!(text, "wrote {f}");
            }
        }
        None => {
            text.push_str(&serialize_kb(&kb));
            if let Some(q) = &q {
                let _ = writeln!(text, "[query]\n{}", serialize_query(q));
            }
        }
    }
    let _ = writeln!(text, "budget: {budget}");
    let json = json!({
        "command": "gen", "files": files, "budget": budget,
        "tbox": kb.tbox.len(), "abox": kb.abox.len(), "query": q.as_ref().map(serialize_query),
    });
    Ok(Output { code: 0, text, json })
}

fn oracle_check(seed: u64, count: usize, mode: Mode, cfg: &SearchConfig) -> Result<Output, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    let mut disagreements = 0;
    let mut positive = 0;
    for n in 0..count {
        let (kb, q, k) = harness_instance(&mut rng, mode);
        let r = rewrite(&kb.tbox, &q, k, mode, &RewriteOptions::default())?;
        let got = r.answer(&kb.abox)?;
        let want = entails_bounded(&kb, &q, k, mode, cfg)?.answer;
        positive += usize::from(want);
        if got != want {
            disagreements += 1;
            let _ = writeln!(text, "instance {n}: rewriting {got}, solver {want}, k={k}, query {}", serialize_query(&q));
        }
    }
    let _ = writeln!(
        text,
        "{count} {} instances, {positive} positive, {disagreements} disagreements",
        mode.label()
    );
    let json = json!({
        "command": "oracle-check", "seed": seed, "count": count, "mode": mode.label(),
        "positive": positive, "disagreements": disagreements,
    });
    Ok(Output { code: verdict_code(disagreements == 0), text, json })
}

fn tuples(inds: &[String], arity: usize) -> Vec<Vec<String>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                inds.iter().map(move |a| {
                    let mut t = t.clone();
                    t.push(a.clone());
                    t
                })
            })
            .collect();
    }
    out
}

fn answers(kb: &Path, query: &str, mode: Mode, budget: &Budget, cfg: &SearchConfig) -> Result<Output, Failure> {
    let kb = load_kb(kb)?;
    let q = load_query(query)?;
    let (k, complete) = resolve_budget(&kb, budget, cfg)?;
    let inds: Vec<String> = kb.abox.iter().flat_map(|(a, _)| a.individuals()).map(str::to_string).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut found = vec![];
    let mut exhaustive = complete;
    for t in tuples(&inds, q.answer_vars.len()) {
        let holds = match k {
            Some(k) => {
                let v = entails_bounded(&kb, &q.ground(&t), k, mode, cfg)?;
                exhaustive &= v.complete;
                v.answer
            }
            None => mode == Mode::Certain,
        };
        if holds {
            found.push(t);
        }
    }
    let mut text = String::new();
    let vars = q.answer_vars.iter().map(|v| Term::var(v.clone()).name().to_string()).collect::<Vec<_>>().join(", ");
    let _ = writeln!(text, "{} answers ({}) to ({vars}): {}", mode.label(), budget_label(budget, k), found.len());
    for t in &found {
        let _ = writeln!(text, "({})", t.join(", "));
    }
    let _ = writeln!(text, "exhaustive: {exhaustive}");
    let json = json!({
        "command": "answers", "mode": mode.label(), "k": k, "opt": budget.opt,
        "vars": q.answer_vars, "answers": found, "complete": exhaustive,
    });
    Ok(Output { code: 0, text, json })
}
