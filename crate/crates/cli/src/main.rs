//! `indiscern`: command-line front end for the discernibility toolkit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use indiscern::discern::{self, Verdict};
use indiscern::ef::{ef_game, Side};
use indiscern::format::{self, ElementMap, StructureFile};
use indiscern::logic::{frege_congruence_check, hb_identity, Compiled, EnumerationBudget};
use indiscern::quotient;
use indiscern::{
    automorphism_group, rigidify, validate, BinaryRelationView, Partition, Strategy, Structure,
};

#[derive(Parser)]
#[command(
    name = "indiscern",
    version,
    about = "Discernibility analysis of finite structures"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,

    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Clone, Serialize)]
struct Opts {
    /// Largest quantifier rank of enumerated formulas
    #[arg(long, global = true, default_value_t = 2)]
    max_rank: usize,

    /// Largest formula size in AST nodes
    #[arg(long, global = true, default_value_t = 9)]
    max_nodes: usize,

    /// Stop after this many distinct formulas
    #[arg(long, global = true, default_value_t = 50_000)]
    max_formulas: usize,

    /// Only atomic formulas and their negations
    #[arg(long, global = true)]
    atomic_only: bool,

    /// Allow atoms over the designated equality symbol
    #[arg(long, global = true)]
    allow_equality: bool,

    /// Rigidification strategy: full or greedy
    #[arg(long, global = true, default_value = "greedy")]
    strategy: Strategy,

    /// Rounds of the Ehrenfeucht-Fraisse game
    #[arg(long, global = true, default_value_t = 3)]
    rounds: usize,

    /// Write the structured report to PATH (`-` for standard output)
    #[arg(long, global = true, value_name = "PATH")]
    #[serde(skip)]
    json: Option<PathBuf>,

    /// Unary predicates for the second-order identity check, comma separated
    #[arg(long, global = true, value_delimiter = ',', value_name = "P1,P2,...")]
    family: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum Verb {
    /// Check the structure invariants
    Validate { file: PathBuf },
    /// Orbits of the automorphism group
    Orbits { file: PathBuf },
    /// Order, generators and orbits of the automorphism group
    Group { file: PathBuf },
    /// Add singleton predicates until the structure is rigid
    Rigidify {
        file: PathBuf,
        /// Also write the extended structure file here
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Classify every pair of elements by the strongest discernibility found
    Classify { file: PathBuf },
    /// Check the implications between the identity principles
    Hierarchy { file: PathBuf },
    /// The identity formula of the signature and the relation it defines
    Hb { file: PathBuf },
    /// Check the Frege axioms for a binary relation read as equality
    Frege {
        file: PathBuf,
        /// Candidate relation; defaults to the designated equality
        #[arg(long)]
        relation: Option<String>,
    },
    /// Quotient by a congruence and check truth transfer
    Quotient {
        file: PathBuf,
        /// Blocks such as `0,3;1,4;2,5`; defaults to the equality classes
        #[arg(long)]
        partition: Option<String>,
        /// Also write the quotient and its map here
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve the Ehrenfeucht-Fraisse game on two structures
    Ef { a: PathBuf, b: PathBuf },
    /// Full second-order identity and its restriction to a family
    Leibniz {
        file: PathBuf,
        /// A single pair `a,b`; defaults to every pair
        #[arg(long)]
        pair: Option<String>,
    },
}

impl Verb {
    fn name(&self) -> &'static str {
        match self {
            Verb::Validate { .. } => "validate",
            Verb::Orbits { .. } => "orbits",
            Verb::Group { .. } => "group",
            Verb::Rigidify { .. } => "rigidify",
            Verb::Classify { .. } => "classify",
            Verb::Hierarchy { .. } => "hierarchy",
            Verb::Hb { .. } => "hb",
            Verb::Frege { .. } => "frege",
            Verb::Quotient { .. } => "quotient",
            Verb::Ef { .. } => "ef",
            Verb::Leibniz { .. } => "leibniz",
        }
    }

    fn inputs(&self) -> Vec<&Path> {
        match self {
            Verb::Ef { a, b } => vec![a, b],
            Verb::Validate { file }
            | Verb::Orbits { file }
            | Verb::Group { file }
            | Verb::Rigidify { file, .. }
            | Verb::Classify { file }
            | Verb::Hierarchy { file }
            | Verb::Hb { file }
            | Verb::Frege { file, .. }
            | Verb::Quotient { file, .. }
            | Verb::Leibniz { file, .. } => vec![file],
        }
    }
}

/// Errors in the input rather than negative analysis results.
struct InputError(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.into())
    }
}

struct Outcome {
    text: String,
    payload: Value,
    /// A documented negative finding: exit status 1.
    negative: bool,
}

#[derive(Serialize)]
struct Report<'a> {
    tool_version: &'static str,
    format_version: usize,
    command: Value,
    structure_digest: String,
    payload: &'a Value,
}

fn load(path: &Path) -> Result<Structure, InputError> {
    let src =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let file = format::parse_file(&src).map_err(|e| anyhow!("{}:{e}", path.display()))?;
    file.structures
        .into_iter()
        .next()
        .ok_or_else(|| InputError(anyhow!("{}: no structure in file", path.display())))
}

fn budget(opts: &Opts) -> EnumerationBudget {
    EnumerationBudget {
        max_quantifier_rank: opts.max_rank,
        max_node_count: opts.max_nodes,
        max_formulas: opts.max_formulas,
        atomic_only: opts.atomic_only,
        allow_equality: opts.allow_equality,
    }
}

fn digest(structures: &[Structure]) -> String {
    let mut hasher = Sha256::new();
    for s in structures {
        hasher.update(format::to_canonical_string(s).as_bytes());
    }
    hasher.finalize().iter().fold(String::new(), |mut out, b| {
        let _ = write!(out, "{b:02x}");
        out
    })
}

fn parse_pair(text: &str) -> anyhow::Result<(usize, usize)> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| anyhow!("expected a pair `a,b`, got `{text}`"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn parse_partition(n: usize, text: &str) -> anyhow::Result<Partition> {
    let mut blocks = Vec::new();
    let mut seen = vec![false; n];
    for block in text.split(';').filter(|b| !b.trim().is_empty()) {
        let members = block
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("bad block `{block}`"))?;
        for &x in &members {
            if x < n {
                seen[x] = true;
            }
        }
        blocks.push(members);
    }
    // Unmentioned elements are singletons.
    blocks.extend((0..n).filter(|&x| !seen[x]).map(|x| vec![x]));
    Ok(Partition::from_blocks(n, blocks)?)
}

fn equality_partition(s: &Structure) -> anyhow::Result<Partition> {
    let eq = s.equality_relation().ok_or_else(|| {
        anyhow!("no congruence given: pass --partition or designate an equality symbol")
    })?;
    let n = s.domain_size();
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    for a in 0..n {
        if labels[a] == usize::MAX {
            for b in a..n {
                if labels[b] == usize::MAX && eq.contains(&[a, b]) {
                    labels[b] = next;
                }
            }
            labels[a] = next;
            next += 1;
        }
    }
    let p = Partition::from_labels(&labels);
    if (0..n).any(|a| (0..n).any(|b| p.same_block(a, b) != eq.contains(&[a, b]))) {
        bail!("the equality symbol is not an equivalence relation");
    }
    Ok(p)
}

fn pairs_of(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect()
}

fn run_validate(s: &Structure) -> Outcome {
    let report = validate(s);
    let mut text = String::new();
    if report.is_valid() {
        let _ = writeln!(text, "{}: valid", s.name());
    } else {
        let _ = writeln!(
            text,
            "{}: {} violation(s)",
            s.name(),
            report.violations.len()
        );
        for v in &report.violations {
            let _ = writeln!(text, "  {v}");
        }
    }
    Outcome {
        text,
        payload: json!({ "valid": report.is_valid(), "violations": report.violations }),
        negative: !report.is_valid(),
    }
}

fn run_group(s: &Structure, full: bool) -> Outcome {
    let g = automorphism_group(s);
    let mut text = String::new();
    let _ = writeln!(text, "orbits: {}", g.orbits);
    if full {
        let _ = writeln!(text, "order: {}", g.order);
        let _ = writeln!(text, "generators: {}", g.generators.len());
        for p in &g.generators {
            let _ = writeln!(text, "  {p}");
        }
    }
    let orbits: Vec<&[usize]> = g.orbits.blocks().iter().map(Vec::as_slice).collect();
    let payload = if full {
        json!({
            "order": g.order.to_string(),
            "generators": g.generators,
            "orbits": orbits,
            "base": g.base,
        })
    } else {
        json!({ "orbits": orbits, "rigid": g.is_trivial() })
    };
    Outcome {
        text,
        payload,
        negative: false,
    }
}

fn write_output(path: &Option<PathBuf>, contents: &str) -> Result<(), InputError> {
    if let Some(path) = path {
        std::fs::write(path, contents)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn run_rigidify(
    s: &Structure,
    opts: &Opts,
    output: &Option<PathBuf>,
) -> Result<Outcome, InputError> {
    let r = rigidify(s, opts.strategy)?;
    let emitted = format::to_canonical_string(&r.structure);
    write_output(output, &emitted)?;
    let mut text = String::new();
    for (name, e) in &r.added {
        let _ = writeln!(text, "# added {name} = {{{e}}}");
    }
    text.push_str(&emitted);
    let added: Vec<Value> = r
        .added
        .iter()
        .map(|(name, e)| json!({ "predicate": name, "element": e }))
        .collect();
    Ok(Outcome {
        text,
        payload: json!({
            "strategy": opts.strategy,
            "added": added,
            "structure": emitted,
        }),
        negative: false,
    })
}

fn run_classify(s: &Structure, opts: &Opts) -> Result<Outcome, InputError> {
    let pairs = discern::classify_all(s, budget(opts))?;
    let mut text = String::new();
    for p in &pairs {
        let _ = write!(text, "({},{}) {}", p.pair.0, p.pair.1, p.verdict.as_str());
        if let Some(w) = &p.witness {
            let _ = write!(text, "  witness: {w}");
        }
        if let Some(c) = &p.orbit_certificate {
            let _ = write!(text, "  certificate: {c}");
        }
        if p.truncated {
            text.push_str("  [truncated]");
        }
        text.push('\n');
    }
    let counts = discern::verdict_counts(&pairs);
    let summary: serde_json::Map<String, Value> = counts
        .iter()
        .map(|(v, c)| (v.as_str().to_string(), json!(c)))
        .collect();
    if pairs
        .iter()
        .all(|p| p.verdict != Verdict::NotDiscernedWithinBudget)
        && !pairs.is_empty()
    {
        let _ = writeln!(text, "every pair decided within budget");
    }
    Ok(Outcome {
        text,
        payload: json!({ "budget": budget(opts), "pairs": pairs, "summary": summary }),
        negative: false,
    })
}

fn run_hierarchy(s: &Structure, opts: &Opts) -> Result<Outcome, InputError> {
    let report = discern::verify_hierarchy(s, budget(opts))?;
    let mut text = String::new();
    let p = report.principles;
    let _ = writeln!(
        text,
        "PII-A {}  PII-R {}  PII-W {}  PII {}",
        p.pii_a, p.pii_r, p.pii_w, p.pii
    );
    for c in &report.claims {
        let kind = serde_json::to_value(c.kind).unwrap_or_default();
        let _ = writeln!(
            text,
            "({}) [{}] {}: {} ({})",
            c.item,
            kind.as_str().unwrap_or("?"),
            c.statement,
            if c.holds { "holds" } else { "FAILS" },
            c.evidence
        );
    }
    let _ = writeln!(text, "counterexamples: {}", report.counterexamples);
    let holds = report.holds();
    Ok(Outcome {
        text,
        payload: json!({ "holds": holds, "report": report }),
        negative: !holds,
    })
}

fn run_hb(s: &Structure) -> Result<Outcome, InputError> {
    let phi = hb_identity(s.signature())?;
    let compiled = Compiled::new(s, &phi)?;
    let n = s.domain_size();
    // Free variables are x and y, in sorted order.
    let related: Vec<(usize, usize)> = pairs_of(n)
        .into_iter()
        .filter(|&(a, b)| compiled.eval_slots(&[a, b]))
        .collect();
    let mut text = String::new();
    let _ = writeln!(text, "{phi}");
    let _ = writeln!(text, "quantifier rank: {}", phi.quantifier_rank());
    if related.is_empty() {
        let _ = writeln!(text, "defines the identity on {}", s.name());
    } else {
        let shown: Vec<String> = related.iter().map(|(a, b)| format!("({a},{b})")).collect();
        let _ = writeln!(text, "relates distinct elements: {}", shown.join(" "));
    }
    Ok(Outcome {
        text,
        payload: json!({
            "formula": phi,
            "quantifier_rank": phi.quantifier_rank(),
            "related_distinct_pairs": related,
            "defines_identity": related.is_empty(),
        }),
        negative: false,
    })
}

fn run_frege(s: &Structure, opts: &Opts, relation: &Option<String>) -> Result<Outcome, InputError> {
    let name = match relation {
        Some(name) => name.clone(),
        None => s
            .signature()
            .equality_name()
            .ok_or_else(|| {
                anyhow!("no candidate relation: pass --relation or designate an equality symbol")
            })?
            .to_string(),
    };
    let rel = BinaryRelationView::of_relation(s, &name)?;
    let report = frege_congruence_check(s, &rel, budget(opts))?;
    let mut text = String::new();
    let _ = writeln!(text, "{name}: {}", report.verdict());
    let _ = writeln!(text, "(=1) reflexive: {}", report.reflexive);
    let _ = writeln!(
        text,
        "(=2) substitution: {} over {} contexts{}",
        report.substitution,
        report.contexts_checked,
        if report.saturated {
            " (exhaustive)"
        } else {
            ""
        }
    );
    if !report.is_diagonal {
        let _ = writeln!(text, "not the diagonal");
    }
    if let Some(c) = &report.counterexample {
        let _ = writeln!(
            text,
            "counterexample: {} with ({},{}) and u = {}",
            c.context, c.a, c.b, c.parameter
        );
    }
    Ok(Outcome {
        text,
        payload: json!({
            "relation": name,
            "verdict": report.verdict(),
            "report": report,
        }),
        negative: !report.passes(),
    })
}

fn run_quotient(
    s: &Structure,
    opts: &Opts,
    partition: &Option<String>,
    output: &Option<PathBuf>,
) -> Result<Outcome, InputError> {
    let p = match partition {
        Some(text) => parse_partition(s.domain_size(), text)?,
        None => equality_partition(s)?,
    };
    if let Some((symbol, tuple)) = quotient::congruence_violation(s, &p)? {
        let shown: Vec<String> = tuple.iter().map(usize::to_string).collect();
        let text = format!(
            "{p} is not a congruence: {symbol}({}) is not closed under the blocks\n",
            shown.join(",")
        );
        return Ok(Outcome {
            text,
            payload: json!({
                "partition": p,
                "congruence": false,
                "violation": { "symbol": symbol, "tuple": tuple },
            }),
            negative: true,
        });
    }
    let qm = quotient::quotient(s, &p)?;
    let transfer = quotient::truth_transfer_check(&qm, budget(opts))?;
    let map: ElementMap = qm.element_map();
    let emitted = format::file_to_string(&StructureFile {
        structures: vec![qm.target.clone()],
        maps: vec![map],
    });
    write_output(output, &emitted)?;
    let mut text = String::new();
    let _ = writeln!(text, "# congruence {p}");
    let _ = writeln!(
        text,
        "# truth transfer: {} ({} formulas){}",
        if transfer.passes { "holds" } else { "FAILS" },
        transfer.formulas_checked,
        if transfer.saturated {
            ", exhaustive"
        } else {
            ""
        }
    );
    if let Some(c) = &transfer.counterexample {
        let _ = writeln!(
            text,
            "# counterexample: {} at {:?}",
            c.formula, c.assignment
        );
    }
    text.push_str(&emitted);
    Ok(Outcome {
        text,
        payload: json!({
            "partition": p,
            "congruence": true,
            "map": qm.f,
            "quotient": emitted,
            "truth_transfer": transfer,
        }),
        negative: false,
    })
}

fn run_ef(a: &Structure, b: &Structure, opts: &Opts) -> Result<Outcome, InputError> {
    let out = ef_game(a, b, opts.rounds)?;
    let mut text = String::new();
    if out.equivalent {
        let _ = writeln!(text, "equivalent at rank {}", out.rounds);
    } else {
        let _ = writeln!(text, "not equivalent at rank {}", out.rounds);
        for r in &out.trace {
            let side = match r.spoiler_side {
                Side::A => a.name(),
                Side::B => b.name(),
            };
            let _ = writeln!(
                text,
                "  round {}: Spoiler plays {} in {}, Duplicator {}",
                r.round,
                r.spoiler_element,
                side,
                match r.reply {
                    Some(y) if !r.immediate_loss => format!("answers {y}"),
                    _ => "has no answer".to_string(),
                }
            );
        }
    }
    Ok(Outcome {
        text,
        payload: serde_json::to_value(&out)?,
        negative: false,
    })
}

fn run_leibniz(s: &Structure, opts: &Opts, pair: &Option<String>) -> Result<Outcome, InputError> {
    let pairs = match pair {
        Some(text) => vec![parse_pair(text)?],
        None => pairs_of(s.domain_size()),
    };
    let family: Vec<String> = match &opts.family {
        Some(f) => f.clone(),
        None => s
            .signature()
            .predicates()
            .filter(|(_, sym)| sym.arity == 1)
            .map(|(_, sym)| sym.name.clone())
            .collect(),
    };
    let family_refs: Vec<&str> = family.iter().map(String::as_str).collect();
    let mut text = String::new();
    let _ = writeln!(text, "family: {{{}}}", family.join(","));
    let mut rows = Vec::new();
    for (a, b) in pairs {
        let full = discern::leibniz_full(s, a, b)?;
        let restricted = discern::henkin_leibniz(s, &family_refs, a, b)?;
        let _ = writeln!(
            text,
            "({a},{b}) family: {}  all subsets: {}",
            if restricted {
                "identified"
            } else {
                "separated"
            },
            if full { "identified" } else { "separated" }
        );
        rows.push(json!({ "pair": [a, b], "family": restricted, "full": full }));
    }
    Ok(Outcome {
        text,
        payload: json!({ "family": family, "pairs": rows }),
        negative: false,
    })
}

/// Analyses need structurally sound input; equality that fails to be a
/// congruence is left for `validate` and `frege` to report.
fn check_structural(path: &Path, s: &Structure) -> Result<(), InputError> {
    let report = validate(s);
    if let Some(v) = report.structural().next() {
        return Err(InputError(anyhow!("{}: {v}", path.display())));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(Outcome, Vec<Structure>), InputError> {
    let mut structures = Vec::new();
    for path in cli.verb.inputs() {
        let s = load(path)?;
        if !matches!(cli.verb, Verb::Validate { .. }) {
            check_structural(path, &s)?;
        }
        structures.push(s);
    }
    let s = &structures[0];
    let opts = &cli.opts;
    let outcome = match &cli.verb {
        Verb::Validate { .. } => run_validate(s),
        Verb::Orbits { .. } => run_group(s, false),
        Verb::Group { .. } => run_group(s, true),
        Verb::Rigidify { output, .. } => run_rigidify(s, opts, output)?,
        Verb::Classify { .. } => run_classify(s, opts)?,
        Verb::Hierarchy { .. } => run_hierarchy(s, opts)?,
        Verb::Hb { .. } => run_hb(s)?,
        Verb::Frege { relation, .. } => run_frege(s, opts, relation)?,
        Verb::Quotient {
            partition, output, ..
        } => run_quotient(s, opts, partition, output)?,
        Verb::Ef { .. } => run_ef(s, &structures[1], opts)?,
        Verb::Leibniz { pair, .. } => run_leibniz(s, opts, pair)?,
    };
    Ok((outcome, structures))
}

fn command_record(cli: &Cli, structures: &[Structure]) -> Value {
    let names: Vec<&str> = structures.iter().map(Structure::name).collect();
    let mut extra = serde_json::Map::new();
    match &cli.verb {
        Verb::Frege {
            relation: Some(r), ..
        } => {
            extra.insert("relation".into(), json!(r));
        }
        Verb::Quotient {
            partition: Some(p), ..
        } => {
            extra.insert("partition".into(), json!(p));
        }
        Verb::Leibniz { pair: Some(p), .. } => {
            extra.insert("pair".into(), json!(p));
        }
        _ => {}
    }
    json!({
        "verb": cli.verb.name(),
        "structures": names,
        "options": cli.opts,
        "arguments": extra,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, structures) = match run(&cli) {
        Ok(done) => done,
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let report = Report {
        tool_version: env!("CARGO_PKG_VERSION"),
        format_version: format::FORMAT_VERSION,
        command: command_record(&cli, &structures),
        structure_digest: digest(&structures),
        payload: &outcome.payload,
    };
    let rendered = match serde_json::to_string_pretty(&report) {
        Ok(r) => r + "\n",
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match &cli.opts.json {
        Some(path) if path.as_os_str() == "-" => print!("{rendered}"),
        Some(path) => {
            print!("{}", outcome.text);
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{}", outcome.text),
    }
    ExitCode::from(u8::from(outcome.negative))
}
