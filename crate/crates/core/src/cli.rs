//! Command implementations behind the `cqenum` binary.
//!
//! Exit codes: 0 success, 1 usage, parse or I/O errors, 2 the width bound
//! is too small for some refinement, 3 the query exceeds the variable cap.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cq::Cq;
use crate::decomp::{enumerate_fc_tds, DEFAULT_VAR_CAP};
use crate::error::{Error, Result};
use crate::fixtures::{four_cycle_instance, FOUR_CYCLE, FOUR_CYCLE_PROJECTED};
use crate::oracle::brute_eval_with_limit;
use crate::pipeline::{preprocess, PipelineParams, QueryIndex};
use crate::relmodel::{Row, Structure, Value};
use crate::splitting::m_bound;

pub const EXIT_ERROR: i32 = 1;
pub const EXIT_WIDTH: i32 = 2;
pub const EXIT_TOO_MANY_VARS: i32 = 3;

/// Default data directory when `--data` is not given.
pub const DATA_ENV: &str = "CQENUM_DATA";
pub const SENTINEL: &str = "EOE";

#[derive(Parser, Debug)]
#[command(name = "cqenum", version, about = "Enumerate and test answers of conjunctive queries")]
pub struct Cli {
    /// Seed for every randomized choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Input {
    /// File holding the query.
    #[arg(short, long, required_unless_present = "expr")]
    pub query: Option<PathBuf>,
    /// Query text given inline.
    #[arg(short, long, conflicts_with = "query")]
    pub expr: Option<String>,
    /// Directory with one file per relation.
    #[arg(short, long, env = DATA_ENV)]
    pub data: PathBuf,
    /// Manifest listing `Name/arity` lines [default: <data>/manifest.txt].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value_t = '\t')]
    pub delimiter: char,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Tuning {
    /// Width bound assumed for the query.
    #[arg(long, default_value_t = 1.5)]
    pub w: f64,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Largest number of query variables accepted.
    #[arg(long, default_value_t = DEFAULT_VAR_CAP)]
    pub var_cap: usize,
}

impl Tuning {
    fn params(&self) -> Result<PipelineParams> {
        let mut p = PipelineParams::new(self.w, self.delta)?;
        p.var_cap = self.var_cap;
        Ok(p)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Preprocess and stream all answers, one tab-separated tuple per line.
    Run {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        tuning: Tuning,
        /// Stop after this many tuples.
        #[arg(long)]
        limit: Option<u64>,
        /// Print `EOE` after the last tuple.
        #[arg(long)]
        sentinel: bool,
        /// Sort the output (buffers everything first).
        #[arg(long)]
        stable: bool,
        /// Report per-tuple delays on standard error.
        #[arg(long, conflicts_with = "stable")]
        profile_delay: bool,
    },
    /// Describe the query, its decompositions and the refinements.
    Analyze {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        tuning: Tuning,
        /// Also list every table of every refinement.
        #[arg(long)]
        refine: bool,
    },
    /// Decide whether a tuple is an answer, or cross-check a random batch.
    Test {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        tuning: Tuning,
        /// Sample this many answers and non-answers and compare with brute force.
        #[arg(long, conflicts_with = "tuple")]
        batch: Option<usize>,
        /// Values of the free variables, in order of first occurrence.
        #[arg(required_unless_present = "batch")]
        tuple: Vec<String>,
    },
    /// Brute-force answers, sorted.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        sentinel: bool,
        /// Largest search space (domain size to the number of variables).
        #[arg(long, default_value_t = 1e8)]
        max_space: f64,
    },
    /// Pipeline on the worst-case 4-cycle family.
    Bench {
        /// Values of ell, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [256usize, 2048])]
        ell: Vec<usize>,
        #[arg(long, default_value_t = 1.5)]
        w: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        /// Use the query with x1 and x3 projected away.
        #[arg(long)]
        projected: bool,
        /// Stop enumerating after this many tuples.
        #[arg(long)]
        max_answers: Option<u64>,
        /// Random membership tests per instance.
        #[arg(long, default_value_t = 1000)]
        tests: usize,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::WidthExceeded { .. } => EXIT_WIDTH,
        Error::TooManyVariables { .. } => EXIT_TOO_MANY_VARS,
        _ => EXIT_ERROR,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Run {
            input,
            tuning,
            limit,
            sentinel,
            stable,
            profile_delay,
        } => cmd_run(input, tuning, *limit, *sentinel, *stable, *profile_delay, out, err),
        Command::Analyze {
            input,
            tuning,
            refine,
        } => cmd_analyze(input, tuning, *refine, out),
        Command::Test {
            input,
            tuning,
            batch,
            tuple,
        } => cmd_test(input, tuning, *batch, tuple, cli.seed, out),
        Command::Oracle {
            input,
            sentinel,
            max_space,
        } => cmd_oracle(input, *sentinel, *max_space, out),
        Command::Bench {
            ell,
            w,
            delta,
            projected,
            max_answers,
            tests,
        } => cmd_bench(ell, *w, *delta, *projected, *max_answers, *tests, cli.seed, out),
    }
}

fn io(e: std::io::Error) -> Error {
    Error::io("<output>", e)
}

pub fn load_input(input: &Input) -> Result<(Cq, Arc<Structure>)> {
    let text = match (&input.query, &input.expr) {
        (_, Some(e)) => e.clone(),
        (Some(path), None) => std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?,
        (None, None) => return Err(Error::BadParams("no query given".into())),
    };
    let phi = Cq::parse(text.trim())?;
    let manifest = input
        .manifest
        .clone()
        .unwrap_or_else(|| input.data.join("manifest.txt"));
    let a = Structure::load_with_manifest(&input.data, &manifest, input.delimiter)?;
    phi.check_signature(a.signature())?;
    Ok((phi, Arc::new(a)))
}

fn render(a: &Structure, row: &[Value]) -> String {
    let names: Vec<&str> = row.iter().map(|&v| a.domain().name(v)).collect();
    names.join("\t")
}

fn median(v: &mut [u64]) -> u64 {
    if v.is_empty() {
        return 0;
    }
    v.sort_unstable();
    v[v.len() / 2]
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    input: &Input,
    tuning: &Tuning,
    limit: Option<u64>,
    sentinel: bool,
    stable: bool,
    profile: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let (phi, a) = load_input(input)?;
    let qi = preprocess(&phi, &a, &tuning.params()?)?;
    let limit = limit.unwrap_or(u64::MAX);
    let mut it = qi.enumerate();
    let mut emitted = 0u64;
    let (mut step_delays, mut time_delays) = (Vec::new(), Vec::new());
    if stable {
        let mut lines: Vec<String> = it.map(|r| render(&a, &r)).collect();
        lines.sort();
        for line in lines.into_iter().take(limit.min(usize::MAX as u64) as usize) {
            writeln!(out, "{line}").map_err(io)?;
            emitted += 1;
        }
    } else {
        let mut last_steps = 0;
        let mut last_time = Instant::now();
        while emitted < limit {
            let Some(row) = it.next() else { break };
            if profile {
                let now = Instant::now();
                step_delays.push(it.steps() - last_steps);
                time_delays.push((now - last_time).as_nanos() as u64);
                last_steps = it.steps();
                last_time = now;
            }
            writeln!(out, "{}", render(&a, &row)).map_err(io)?;
            emitted += 1;
        }
    }
    if sentinel {
        writeln!(out, "{SENTINEL}").map_err(io)?;
    }
    if profile {
        let max_steps = step_delays.iter().copied().max().unwrap_or(0);
        let max_ns = time_delays.iter().copied().max().unwrap_or(0);
        writeln!(
            err,
            "emitted {emitted}; preprocessing {:.3?}; delay steps max {max_steps} median {}; delay ns max {max_ns} median {}",
            qi.report().total_time,
            median(&mut step_delays),
            median(&mut time_delays)
        )
        .map_err(io)?;
    }
    Ok(0)
}

fn cmd_analyze(input: &Input, tuning: &Tuning, refine: bool, out: &mut dyn Write) -> Result<i32> {
    let (phi, a) = load_input(input)?;
    let names = |s: crate::varset::VarSet| -> String {
        s.iter().map(|v| phi.var_name(v)).collect::<Vec<_>>().join(" ")
    };
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(io);
    w(out, format!("query: {phi}"))?;
    w(out, format!("variables: {}", names(phi.vars())))?;
    w(out, format!("free: {}", names(phi.free())))?;
    w(out, format!("quantified: {}", names(phi.quantified())))?;
    let stats = a.stats();
    w(out, format!("structure: n = {}, m = {}, size = {}", stats.n, stats.m, stats.size))?;
    let tds = enumerate_fc_tds(&phi, tuning.var_cap)?;
    let two_node = tds.iter().filter(|t| t.len() == 2).count();
    let full_bag = tds.iter().filter(|t| t.bags.contains(&phi.vars())).count();
    w(
        out,
        format!(
            "free-connex decompositions: {} ({two_node} with two nodes, {full_bag} with a bag of all variables)",
            tds.len()
        ),
    )?;
    for (i, td) in tds.iter().enumerate() {
        let f: Vec<usize> = td.connex.clone().unwrap_or_default();
        let bags: Vec<String> = td
            .bags
            .iter()
            .enumerate()
            .map(|(t, &b)| format!("{}{}", phi.fmt_set(b), if f.contains(&t) { "*" } else { "" }))
            .collect();
        let edges: Vec<String> = td.edges.iter().map(|(x, y)| format!("{x}-{y}")).collect();
        w(out, format!("  td {i}: {} edges {}", bags.join(" "), edges.join(" ")))?;
    }
    let qi = preprocess(&phi, &a, &tuning.params()?)?;
    let rep = qi.report();
    w(
        out,
        format!(
            "refinements: {} (M = {}, c = {:.4}, eps = {:.4e}, {} splits, {} dropped, {:.3?})",
            qi.parts().len(),
            rep.m_bound,
            rep.c,
            rep.eps,
            rep.splits,
            rep.dropped,
            rep.total_time
        ),
    )?;
    for (i, part) in qi.parts().iter().enumerate() {
        let r = &part.refinement;
        let bags: Vec<String> = part.td.bags.iter().map(|&b| phi.fmt_set(b)).collect();
        w(
            out,
            format!(
                "  refinement {i}: |s| = {}, rows = {}, bags {} sizes {:?}, max bag cost {:.6}",
                r.family().len(),
                r.total_rows(),
                bags.join(" "),
                part.table_sizes,
                part.max_cost
            ),
        )?;
        if refine {
            for line in r.dump().lines() {
                w(out, format!("    {line}"))?;
            }
        }
    }
    Ok(0)
}

fn parse_tuple(a: &Structure, fields: &[String]) -> Option<Row> {
    fields.iter().map(|f| a.domain().id(f)).collect()
}

fn cmd_test(
    input: &Input,
    tuning: &Tuning,
    batch: Option<usize>,
    tuple: &[String],
    seed: u64,
    out: &mut dyn Write,
) -> Result<i32> {
    let (phi, a) = load_input(input)?;
    let qi = preprocess(&phi, &a, &tuning.params()?)?;
    let Some(n) = batch else {
        if tuple.len() != phi.free().len() {
            return Err(Error::DomainMismatch);
        }
        let answer = match parse_tuple(&a, tuple) {
            Some(row) => qi.test(&row)?,
            None => false,
        };
        writeln!(out, "{answer}").map_err(io)?;
        return Ok(0);
    };
    let truth = brute_eval_with_limit(&phi, &a, f64::INFINITY)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let answers = truth.to_vec();
    let positives: Vec<Row> = (0..n)
        .filter_map(|_| answers.choose(&mut rng).cloned())
        .collect();
    let k = phi.free().len();
    let d = a.domain().len() as Value;
    let mut negatives = Vec::new();
    for _ in 0..n.saturating_mul(100) {
        if negatives.len() == n || d == 0 {
            break;
        }
        let row: Row = (0..k).map(|_| rng.gen_range(0..d)).collect();
        if !truth.contains(&row) {
            negatives.push(row);
        }
    }
    let agree = |rows: &[Row], want: bool| -> Result<usize> {
        let mut ok = 0;
        for r in rows {
            if qi.test(r)? == want {
                ok += 1;
            }
        }
        Ok(ok)
    };
    let pos_ok = agree(&positives, true)?;
    let neg_ok = agree(&negatives, false)?;
    writeln!(
        out,
        "positives {pos_ok}/{} agree, negatives {neg_ok}/{} agree",
        positives.len(),
        negatives.len()
    )
    .map_err(io)?;
    Ok(if pos_ok == positives.len() && neg_ok == negatives.len() {
        0
    } else {
        EXIT_ERROR
    })
}

fn cmd_oracle(input: &Input, sentinel: bool, max_space: f64, out: &mut dyn Write) -> Result<i32> {
    let (phi, a) = load_input(input)?;
    let answers = brute_eval_with_limit(&phi, &a, max_space)?;
    let mut lines: Vec<String> = answers.rows.iter().map(|r| render(&a, r)).collect();
    lines.sort();
    for line in lines {
        writeln!(out, "{line}").map_err(io)?;
    }
    if sentinel {
        writeln!(out, "{SENTINEL}").map_err(io)?;
    }
    Ok(0)
}

/// Largest step count between consecutive answers, over at most `cap`
/// answers, with the number of answers seen.
pub fn measure_delay(qi: &QueryIndex, cap: u64) -> (u64, u64) {
    let mut it = qi.enumerate();
    let (mut count, mut last, mut worst) = (0u64, 0u64, 0u64);
    while count < cap {
        if it.next().is_none() {
            // The step to discover the end counts as a delay too.
            worst = worst.max(it.steps() - last);
            break;
        }
        count += 1;
        worst = worst.max(it.steps() - last);
        last = it.steps();
    }
    (worst, count)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    ells: &[usize],
    w: f64,
    delta: f64,
    projected: bool,
    max_answers: Option<u64>,
    tests: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Result<i32> {
    let phi = Cq::parse(if projected { FOUR_CYCLE_PROJECTED } else { FOUR_CYCLE })?;
    let params = PipelineParams::new(w, delta)?;
    writeln!(
        out,
        "ell\tn\tm\tM\tparts\tpreprocess_s\tanswers\tmax_delay_steps\tmax_test_steps"
    )
    .map_err(io)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &ell in ells {
        let a = Arc::new(four_cycle_instance(ell));
        let stats = a.stats();
        let qi = preprocess(&phi, &a, &params)?;
        let (delay, count) = measure_delay(&qi, max_answers.unwrap_or(u64::MAX));
        let k = phi.free().len();
        let d = a.domain().len() as Value;
        let mut worst_test = 0;
        for _ in 0..tests {
            let row: Row = (0..k).map(|_| rng.gen_range(0..d)).collect();
            let mut steps = 0;
            qi.test_counted(&row, &mut steps)?;
            worst_test = worst_test.max(steps);
        }
        writeln!(
            out,
            "{ell}\t{}\t{}\t{}\t{}\t{:.3}\t{count}\t{delay}\t{worst_test}",
            stats.n,
            stats.m,
            m_bound(stats.m, params.c()),
            qi.parts().len(),
            qi.report().total_time.as_secs_f64()
        )
        .map_err(io)?;
    }
    Ok(0)
}
