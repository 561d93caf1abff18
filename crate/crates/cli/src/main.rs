use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use stanley::cache::EnumerationCache;
use stanley::indep::{self, SearchLimits};
use stanley::modsets::{self, EnumerationLimits, ModularSet, Verdict, Violation};
use stanley::prover::{self, ProofOutcome, ProofTrace, ProverLimits};
use stanley::seq::{self, GeneratorSet};
use stanley::GrowthDiagnostics64;

const SUCCESS: u8 = 0;
const NEGATIVE: u8 = 1;
const INCONCLUSIVE: u8 = 2;
const INPUT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "stanley", version, about = "Stanley sequences, modular sets and character proofs")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for enumeration and search (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Greedy extension of a generator set.
    Generate(GenerateArgs),
    /// Check whether a set is modular.
    Verify(VerifyArgs),
    /// All modular sets for one modulus or a range of moduli.
    Enumerate(EnumerateArgs),
    /// Characters found by enumeration and by sequence search.
    Table(TableArgs),
    /// Independence certificate, modulus, omitted set and growth of a sequence.
    Analyze(AnalyzeArgs),
    /// Generator sets whose sequence has a given character.
    Search(SearchArgs),
    /// Try to prove that no modular set has an odd character.
    Prove(ProveArgs),
    /// Re-check a proof trace.
    CheckTrace(CheckTraceArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Comma-separated generators containing 0.
    #[arg(long, value_parser = parse_set)]
    set: Elements,
    /// Number of terms.
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Stop before the first term above this value.
    #[arg(long)]
    value_limit: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    modulus: u64,
    #[arg(long, value_parser = parse_set)]
    set: Elements,
}

#[derive(Args)]
struct EnumerateArgs {
    /// A single modulus.
    #[arg(long, conflicts_with = "modulus_max", required_unless_present = "modulus_max")]
    modulus: Option<u64>,
    /// Every modulus from 1 up to this one.
    #[arg(long)]
    modulus_max: Option<u64>,
    /// Largest modulus the enumerator accepts.
    #[arg(long, default_value_t = modsets::DEFAULT_MAX_MODULUS)]
    bound: u64,
    /// JSON-lines result cache (default: $STANLEY_CACHE, else none).
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// Largest modulus enumerated.
    #[arg(long, default_value_t = 36)]
    modulus_max: u64,
    /// Generators are drawn from 0..=bound in the sequence search.
    #[arg(long, default_value_t = 20)]
    bound: u64,
    #[arg(long, default_value_t = 8)]
    kmax: u32,
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, value_parser = parse_set)]
    set: Elements,
    /// Terms generated.
    #[arg(long, default_value_t = 4096)]
    count: usize,
    #[arg(long, default_value_t = 11)]
    kmax: u32,
    /// Print growth ratios at powers of two as CSV.
    #[arg(long)]
    growth: bool,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, allow_hyphen_values = true)]
    lambda: i64,
    #[arg(long, default_value_t = 20)]
    bound: u64,
    #[arg(long, default_value_t = 8)]
    kmax: u32,
}

#[derive(Args)]
struct ProveArgs {
    #[arg(long)]
    lambda: u32,
    /// Offset bound for symbolic terms (default 4·lambda).
    #[arg(long)]
    bound: Option<i64>,
    /// Write the proof trace here as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    budget_nodes: usize,
    #[arg(long, default_value_t = 120)]
    budget_seconds: u64,
}

#[derive(Args)]
struct CheckTraceArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Character the trace must rule out (default: the one it names).
    #[arg(long)]
    lambda: Option<u32>,
}

#[derive(Clone, Debug)]
struct Elements(Vec<u64>);

fn parse_set(s: &str) -> Result<Elements, String> {
    let mut xs = s
        .split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|_| format!("not a non-negative integer: {p:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    xs.sort_unstable();
    if let Some(w) = xs.windows(2).find(|w| w[0] == w[1]) {
        return Err(format!("duplicate element {}", w[0]));
    }
    Ok(Elements(xs))
}

struct Failure(String);

impl From<stanley::Error> for Failure {
    fn from(e: stanley::Error) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(u8, String), Failure>;

fn join(xs: &[u64]) -> String {
    xs.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn omega_text(omega: Option<u64>) -> String {
    omega.map_or_else(|| "none".into(), |w| w.to_string())
}

fn set_line(ms: &ModularSet) -> String {
    format!(
        "modulus={} elements={} lambda={} omega={}",
        ms.modulus(),
        join(ms.elements()),
        ms.lambda(),
        omega_text(ms.omega())
    )
}

fn set_json(ms: &ModularSet) -> Value {
    serde_json::to_value(ms.record()).expect("record serializes")
}

fn violation_text(v: &Violation) -> String {
    match v {
        Violation::ModAp { x, y, z } => format!("{x}, {y}, {z} is a progression modulo the modulus"),
        Violation::Uncovered { residue } => format!("{residue} is not covered"),
    }
}

fn generate(a: GenerateArgs, format: Format) -> Outcome {
    let gens = GeneratorSet::new(a.set.0)?;
    let prefix = seq::generate(&gens, a.count, a.value_limit.unwrap_or(u64::MAX))?;
    let out = match format {
        Format::Text => prefix.terms().iter().map(|t| format!("{t}\n")).collect(),
        Format::Json => serde_json::to_string(&prefix.to_record()).expect("prefix serializes") + "\n",
    };
    Ok((SUCCESS, out))
}

fn verify(a: VerifyArgs, format: Format) -> Outcome {
    let verdict = modsets::verify_modular(&a.set.0, a.modulus)?;
    let (code, out) = match (&verdict, format) {
        (Verdict::Valid(ms), Format::Text) => {
            (SUCCESS, format!("valid lambda={} omega={}\n", ms.lambda(), omega_text(ms.omega())))
        }
        (Verdict::Valid(ms), Format::Json) => {
            (SUCCESS, json!({"valid": true, "lambda": ms.lambda(), "omega": ms.omega()}).to_string() + "\n")
        }
        (Verdict::Invalid(v), Format::Text) => (NEGATIVE, format!("invalid: {}\n", violation_text(v))),
        (Verdict::Invalid(v), Format::Json) => {
            (NEGATIVE, json!({"valid": false, "violation": v}).to_string() + "\n")
        }
    };
    Ok((code, out))
}

fn open_cache(flag: Option<PathBuf>) -> Result<Option<EnumerationCache>, Failure> {
    let path = flag.or_else(|| std::env::var_os("STANLEY_CACHE").map(PathBuf::from));
    let Some(path) = path else { return Ok(None) };
    let cache = EnumerationCache::open(path)?;
    for w in cache.warnings() {
        eprintln!("warning: {}: {w}", cache.path().display());
    }
    Ok(Some(cache))
}

fn enumerate_range(
    moduli: impl Iterator<Item = u64>,
    limits: &EnumerationLimits,
    cache: &mut Option<EnumerationCache>,
) -> Result<Vec<ModularSet>, Failure> {
    let mut all = Vec::new();
    for n in moduli {
        if let Some(hit) = cache.as_ref().and_then(|c| c.get(n)) {
            all.extend_from_slice(hit);
            continue;
        }
        let sets = modsets::enumerate_modular_sets(n, limits)?;
        if let Some(c) = cache.as_mut() {
            c.insert(n, &sets)?;
        }
        all.extend(sets);
    }
    Ok(all)
}

fn enumerate(a: EnumerateArgs, format: Format) -> Outcome {
    let limits = EnumerationLimits { max_modulus: a.bound };
    let range = match (a.modulus, a.modulus_max) {
        (Some(n), _) => n..=n,
        (None, Some(m)) => 1..=m,
        (None, None) => unreachable!("clap requires one of the modulus flags"),
    };
    if *range.end() > limits.max_modulus {
        return Err(stanley::Error::BudgetExceeded { modulus: *range.end(), max: limits.max_modulus }.into());
    }
    let mut cache = open_cache(a.cache)?;
    let sets = enumerate_range(range, &limits, &mut cache)?;
    let mut out = String::new();
    for ms in &sets {
        match format {
            Format::Text => out.push_str(&set_line(ms)),
            Format::Json => out.push_str(&set_json(ms).to_string()),
        }
        out.push('\n');
    }
    Ok((SUCCESS, out))
}

fn table(a: TableArgs, format: Format) -> Outcome {
    let limits = EnumerationLimits { max_modulus: a.modulus_max.max(modsets::DEFAULT_MAX_MODULUS) };
    let mut cache = open_cache(a.cache)?;
    let sets = enumerate_range(1..=a.modulus_max, &limits, &mut cache)?;
    let mut enumerated: BTreeMap<i64, Vec<&ModularSet>> = BTreeMap::new();
    for ms in &sets {
        enumerated.entry(ms.lambda()).or_default().push(ms);
    }
    let searched = indep::character_search(a.bound, a.kmax, &SearchLimits::default())?;
    let mut rows: Vec<Value> = Vec::new();
    let mut lambdas: Vec<i64> = enumerated.keys().chain(searched.keys()).copied().collect();
    lambdas.sort_unstable();
    lambdas.dedup();
    for lambda in lambdas {
        if let Some(list) = enumerated.get(&lambda) {
            let first = list.iter().min_by_key(|m| (m.modulus(), m.elements().to_vec())).unwrap();
            rows.push(json!({
                "lambda": lambda,
                "source": "enumeration",
                "count": list.len(),
                "modulus": first.modulus(),
                "witness": first.elements(),
            }));
        }
        if let Some(hits) = searched.get(&lambda) {
            let first = &hits[0];
            rows.push(json!({
                "lambda": lambda,
                "source": "search",
                "count": hits.len(),
                "rho": first.certificate.rho,
                "witness": first.generators.elements(),
            }));
        }
    }
    let mut out = String::new();
    match format {
        Format::Json => {
            out = serde_json::to_string(&rows).expect("rows serialize");
            out.push('\n');
        }
        Format::Text => {
            for r in &rows {
                let witness: Vec<u64> = serde_json::from_value(r["witness"].clone()).expect("witness is a list");
                let period = match r.get("modulus") {
                    Some(m) => format!("modulus={m}"),
                    None => format!("rho={}", r["rho"]),
                };
                let _ = writeln!(
                    out,
                    "lambda={} source={} count={} {period} witness={}",
                    r["lambda"],
                    r["source"].as_str().unwrap(),
                    r["count"],
                    join(&witness)
                );
            }
        }
    }
    Ok((SUCCESS, out))
}

fn analyze(a: AnalyzeArgs, format: Format) -> Outcome {
    let gens = GeneratorSet::new(a.set.0)?;
    let prefix = seq::generate(&gens, a.count.max(gens.len()), u64::MAX)?;
    if a.growth {
        let points: Vec<usize> = (1..).map(|k| 1usize << k).take_while(|&n| n < prefix.len()).collect();
        let diag: GrowthDiagnostics64 = seq::growth_diagnostics(&prefix, &points)?;
        let out = match format {
            Format::Json => serde_json::to_string(&diag).expect("diagnostics serialize") + "\n",
            Format::Text => {
                let mut out = String::from("n,term,ratio_type1,ratio_type2\n");
                for s in &diag.samples {
                    let _ = writeln!(out, "{},{},{},{}", s.n, s.term, s.ratio_type1, s.ratio_type2);
                }
                out
            }
        };
        return Ok((SUCCESS, out));
    }
    let omitted = seq::omitted_set(&gens, gens.largest())?;
    let levels = (0..=a.kmax).rev().find(|&k| indep::required_terms(k) <= prefix.len());
    let cert = match levels {
        Some(k) => indep::detect_independence(prefix.terms(), k)?,
        None => None,
    };
    let modular = match &cert {
        Some(c) => indep::find_modulus(&prefix, c, 4).ok().flatten(),
        None => None,
    };
    let out = match format {
        Format::Json => {
            json!({
                "generators": gens.elements(),
                "certificate": cert,
                "modular_set": modular.as_ref().map(set_json),
                "omitted": omitted.omitted,
                "omega": omitted.omega,
                "omega_below_lambda": cert.map(|c| seq::omega_below(omitted.omega, c.lambda)),
            })
            .to_string()
                + "\n"
        }
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "generators={}", join(gens.elements()));
            match &cert {
                Some(c) => {
                    let _ = writeln!(out, "certificate: {c}");
                }
                None => out.push_str("certificate: none\n"),
            }
            match &modular {
                Some(ms) => {
                    let _ = writeln!(out, "modular set: {}", set_line(ms));
                }
                None => out.push_str("modular set: none\n"),
            }
            let _ = writeln!(out, "omitted={} omega={}", join(&omitted.omitted), omega_text(omitted.omega));
            if let Some(c) = cert {
                let _ = writeln!(out, "omega below lambda: {}", seq::omega_below(omitted.omega, c.lambda));
            }
            out
        }
    };
    Ok((SUCCESS, out))
}

fn search(a: SearchArgs, format: Format) -> Outcome {
    let found = indep::search_by_character(a.lambda, a.bound, a.kmax, &SearchLimits::default())?;
    let code = if found.is_empty() { NEGATIVE } else { SUCCESS };
    let out = match format {
        Format::Json => serde_json::to_string(&found).expect("sets serialize") + "\n",
        Format::Text => found.iter().map(|g| join(g.elements()) + "\n").collect(),
    };
    Ok((code, out))
}

fn write_trace(path: &Path, trace: &ProofTrace) -> Result<(), Failure> {
    std::fs::write(path, trace.to_json() + "\n").map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn prove(a: ProveArgs, format: Format) -> Outcome {
    let limits = ProverLimits {
        bound: a.bound,
        max_nodes: a.budget_nodes,
        max_time: Duration::from_secs(a.budget_seconds),
        ..ProverLimits::default()
    };
    let outcome = prover::prove_character_impossible(a.lambda, &limits)?;
    if let Some(path) = &a.trace {
        write_trace(path, outcome.trace())?;
    }
    let stats = outcome.trace().stats();
    let (code, text, value) = match &outcome {
        ProofOutcome::Impossible { nodes, .. } => (
            SUCCESS,
            format!("impossible ({nodes} nodes, {} splits)\n", stats.splits),
            json!({"outcome": "impossible", "lambda": a.lambda, "nodes": nodes, "stats": stats}),
        ),
        ProofOutcome::Candidate { nodes, leaf, witness, .. } => {
            let text = match witness {
                Some(ms) => format!("candidate {}\n", set_line(ms)),
                None => format!("candidate generators={} (no concrete set found)\n", join(&leaf.generators)),
            };
            (
                NEGATIVE,
                text,
                json!({
                    "outcome": "candidate",
                    "lambda": a.lambda,
                    "nodes": nodes,
                    "generators": leaf.generators,
                    "witness": witness.as_ref().map(set_json),
                }),
            )
        }
        ProofOutcome::Inconclusive { nodes, exhausted, .. } => (
            INCONCLUSIVE,
            format!("inconclusive: {exhausted:?} budget exhausted after {nodes} nodes\n").to_lowercase(),
            json!({"outcome": "inconclusive", "lambda": a.lambda, "nodes": nodes, "exhausted": exhausted}),
        ),
    };
    Ok((code, if format == Format::Json { value.to_string() + "\n" } else { text }))
}

fn check_trace(a: CheckTraceArgs, format: Format) -> Outcome {
    let text = std::fs::read_to_string(&a.trace).map_err(|e| Failure(format!("{}: {e}", a.trace.display())))?;
    let trace = ProofTrace::from_json(&text).map_err(|e| Failure(format!("{}: malformed trace: {e}", a.trace.display())))?;
    let lambda = a.lambda.unwrap_or(trace.lambda);
    let result = prover::validate_trace(&trace, lambda);
    let out = match (&result, format) {
        (Ok(()), Format::Text) => format!("valid: no modular set has character {lambda}\n"),
        (Ok(()), Format::Json) => json!({"valid": true, "lambda": lambda}).to_string() + "\n",
        (Err(e), Format::Text) => format!("invalid at {}: {}\n", e.path, e.reason),
        (Err(e), Format::Json) => {
            json!({"valid": false, "lambda": lambda, "path": e.path, "reason": e.reason}).to_string() + "\n"
        }
    };
    Ok((if result.is_ok() { SUCCESS } else { NEGATIVE }, out))
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure(format!("cannot configure {n} threads: {e}")))?;
    }
    let f = cli.format;
    match cli.command {
        Command::Generate(a) => generate(a, f),
        Command::Verify(a) => verify(a, f),
        Command::Enumerate(a) => enumerate(a, f),
        Command::Table(a) => table(a, f),
        Command::Analyze(a) => analyze(a, f),
        Command::Search(a) => search(a, f),
        Command::Prove(a) => prove(a, f),
        Command::CheckTrace(a) => check_trace(a, f),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let rendered = e.to_string();
            eprintln!("{}", rendered.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(INPUT_ERROR);
        }
    };
    match run(cli) {
        Ok((code, out)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
