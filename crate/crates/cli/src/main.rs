//! `cognilog`: validate, match and reason over e-log and s-log files.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cognilog::equations::adjacency;
use cognilog::functor::{Candidate, SearchConfig, Weights};
use cognilog::reasoning::{
    abstract_episode, classify_story, comprehend, generate_slog, infer_missing, plan, ReasoningError, Segmentation,
};
use cognilog::store::{Store, StoreError};
use cognilog::text::{write_functor, write_log, TextError};
use cognilog::{BeLog, Log, ModelError, ObjectId};

const STORE_VAR: &str = "COGNILOG_STORE";

#[derive(Parser)]
#[command(name = "cognilog", version, about = "Episode and scenario logs as categories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that logs are valid categories.
    Validate { logs: Vec<String> },
    /// Rank functors from an e-log into an s-log.
    Match {
        elog: String,
        slog: String,
        #[command(flatten)]
        search: SearchArgs,
        /// Allow e-log objects to stay unmapped.
        #[arg(long)]
        partial: bool,
        /// Require every s-log object to be hit.
        #[arg(long)]
        surjective: bool,
    },
    /// Complete an e-log with the actions of an s-log it partially matches.
    Infer {
        elog: String,
        slog: String,
        #[command(flatten)]
        search: SearchArgs,
        /// Where to write the completed e-log; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full functors of an e-log onto an s-log.
    Abstract {
        elog: String,
        slog: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Turn a causally closed part of an e-log into an s-log.
    GenSlog {
        elog: String,
        /// Comma-separated object ids; all actions when absent.
        #[arg(long, value_delimiter = ',')]
        select: Vec<String>,
        #[arg(long)]
        id: String,
        #[arg(long = "belog")]
        belogs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Segment a story and match its scenes against a library of s-logs.
    Comprehend {
        story: String,
        library: Vec<String>,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_enum, default_value_t = SegmentArg::Components)]
        segmentation: SegmentArg,
    },
    /// Score story classes by the scenes a story contains.
    Classify {
        story: String,
        library: Vec<String>,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_enum, default_value_t = SegmentArg::Components)]
        segmentation: SegmentArg,
    },
    /// Chain s-logs back from a goal action and ground them in a world.
    Plan {
        goal: String,
        #[arg(long)]
        world: String,
        library: Vec<String>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Print the cause and performer matrices of a log.
    DumpMatrices { log: String },
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// Be-log files to merge; the store's be-log is always included.
    #[arg(long = "belog")]
    belogs: Vec<PathBuf>,
    /// Score weights `structural,temporal,similarity`, summing to 1.
    #[arg(long)]
    weights: Option<String>,
    /// Smallest accepted compatibility per mapped pair.
    #[arg(long)]
    min_compat: Option<f64>,
    #[arg(long)]
    max_candidates: Option<usize>,
    /// Chain length for planning, levels for comprehension.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Tsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SegmentArg {
    Components,
    Pairs,
}

impl From<SegmentArg> for Segmentation {
    fn from(s: SegmentArg) -> Self {
        match s {
            SegmentArg::Components => Segmentation::CausalComponents,
            SegmentArg::Pairs => Segmentation::TrivialPairs,
        }
    }
}

/// Failure with its exit status.
#[derive(Debug)]
enum Failure {
    /// The input was read but fails a check or has no answer (1).
    Domain(String),
    /// Bad arguments (2).
    Usage(String),
    /// I/O, parse or internal error (3).
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Usage(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match &e {
            StoreError::Text { source: TextError::Model(_), .. } => Failure::Domain(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<ReasoningError> for Failure {
    fn from(e: ReasoningError) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Domain(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("cognilog: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn store_dir() -> Option<PathBuf> {
    std::env::var_os(STORE_VAR).map(PathBuf::from)
}

/// Loads a log named by path, or by id from the store directory.
fn load_log(arg: &str) -> Result<Log, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        let store = Store::load(path)?;
        return store
            .logs
            .into_values()
            .next()
            .ok_or_else(|| Failure::Usage(format!("{arg}: not a log file")));
    }
    if let Some(dir) = store_dir() {
        for ext in ["elog", "slog"] {
            let p = dir.join(format!("{arg}.{ext}"));
            if p.exists() {
                return load_log(&p.to_string_lossy());
            }
        }
    }
    Err(Failure::Internal(format!("{arg}: no such file or stored log")))
}

fn load_belog(paths: &[PathBuf]) -> Result<BeLog, Failure> {
    let mut store = Store::new();
    if let Some(dir) = store_dir() {
        let p = dir.join(cognilog::store::BELOG_FILE);
        if p.exists() {
            store.load_belog_file(&p)?;
        }
    }
    for p in paths {
        store.load_belog_file(p)?;
    }
    Ok(store.belog)
}

fn config(args: &SearchArgs) -> Result<SearchConfig, Failure> {
    let mut cfg = SearchConfig::default();
    if let Some(w) = &args.weights {
        let parts: Vec<f64> = w
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| Failure::Usage(format!("--weights `{w}`: expected three numbers")))?;
        let [s, t, m] = parts[..] else {
            return Err(Failure::Usage(format!("--weights `{w}`: expected three numbers")));
        };
        cfg.weights = Weights::new(s, t, m).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Some(m) = args.min_compat {
        if !(0.0..=1.0).contains(&m) {
            return Err(Failure::Usage(format!("--min-compat {m}: expected a value in [0, 1]")));
        }
        cfg.min_compatibility = m;
    }
    if let Some(n) = args.max_candidates {
        cfg.max_candidates = n;
    }
    if let Some(d) = args.depth {
        cfg.depth = d;
    }
    Ok(cfg)
}

fn candidates_text(cands: &[Candidate], format: Format) -> String {
    match format {
        Format::Text => cands.iter().map(|c| write_functor(&c.functor, Some(&c.score))).collect::<Vec<_>>().join("\n"),
        Format::Tsv => {
            let mut s = String::from("rank\ttotal\tstructural\ttemporal\tsimilarity\tcomplete\tactions\tparticipants\n");
            for (i, c) in cands.iter().enumerate() {
                let pairs = |m: &std::collections::BTreeMap<ObjectId, ObjectId>| {
                    m.iter().map(|(a, b)| format!("{a}>{b}")).collect::<Vec<_>>().join(",")
                };
                let _ = writeln!(
                    s,
                    "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\t{}",
                    i + 1,
                    c.score.total,
                    c.score.structural,
                    c.score.temporal,
                    c.score.similarity,
                    c.score.report.is_complete(),
                    pairs(&c.functor.action_map),
                    pairs(&c.functor.participant_map)
                );
            }
            s
        }
    }
}

fn write_or_return(out: Option<&Path>, text: String, summary: String) -> Outcome {
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure::Internal(format!("{}: {e}", p.display())))?;
            Ok(summary)
        }
        None => Ok(text + &summary),
    }
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Validate { logs } => {
            if logs.is_empty() {
                return Err(Failure::Usage("validate: no logs given".into()));
            }
            let mut out = String::new();
            let mut failed = Vec::new();
            for arg in &logs {
                match load_log(arg) {
                    Ok(log) => {
                        let _ = writeln!(out, "{arg}: ok ({} actions)", log.content_action_ids().len());
                    }
                    Err(Failure::Domain(m)) => failed.push(m),
                    Err(other) => return Err(other),
                }
            }
            if failed.is_empty() {
                Ok(out)
            } else {
                print!("{out}");
                Err(Failure::Domain(failed.join("\n")))
            }
        }
        Command::Match { elog, slog, search, partial, surjective } => {
            let (e, s, b) = (load_log(&elog)?, load_log(&slog)?, load_belog(&search.belogs)?);
            let mut cfg = config(&search)?;
            cfg.require_injective = !partial;
            cfg.require_surjective = surjective;
            let found = cognilog::functor::search_functors(&e, &s, &b, &cfg);
            if found.is_empty() {
                return Err(Failure::Domain(format!("no functor from `{}` into `{}`", e.id, s.id)));
            }
            Ok(candidates_text(&found, search.format))
        }
        Command::Infer { elog, slog, search, out } => {
            let (e, s, b) = (load_log(&elog)?, load_log(&slog)?, load_belog(&search.belogs)?);
            let mut cfg = config(&search)?;
            if search.min_compat.is_none() {
                cfg.min_compatibility = 0.5;
            }
            let r = infer_missing(&e, &s, &b, &cfg)?;
            let mut summary = String::new();
            for a in &r.added {
                let _ = writeln!(summary, "added {} from {} tense={}", a.id, a.source, a.tense.as_str());
            }
            for (a, arrow, t) in &r.rewired {
                let _ = writeln!(summary, "rewired {a} {arrow} -> {t}");
            }
            if r.added.is_empty() {
                summary.push_str("nothing to add\n");
            }
            write_or_return(out.as_deref(), write_log(&r.log), summary)
        }
        Command::Abstract { elog, slog, search } => {
            let (e, s, b) = (load_log(&elog)?, load_log(&slog)?, load_belog(&search.belogs)?);
            let results = abstract_episode(&e, &s, &b, &config(&search)?);
            if results.is_empty() {
                return Err(Failure::Domain(format!("`{}` has no full abstraction onto `{}`", e.id, s.id)));
            }
            let cands: Vec<Candidate> = results.iter().map(|r| r.candidate.clone()).collect();
            let mut text = candidates_text(&cands, search.format);
            if search.format == Format::Text {
                for (i, r) in results.iter().enumerate().filter(|(_, r)| !r.residue.is_empty()) {
                    let ids: Vec<&str> = r.residue.iter().map(|x| x.as_str()).collect();
                    let _ = writeln!(text, "residue {} {}", i + 1, ids.join(","));
                }
            }
            Ok(text)
        }
        Command::GenSlog { elog, select, id, belogs, out } => {
            let e = load_log(&elog)?;
            let b = load_belog(&belogs)?;
            let selection: BTreeSet<ObjectId> = if select.is_empty() {
                e.content_action_ids().into_iter().collect()
            } else {
                select
                    .iter()
                    .map(|x| ObjectId::new(x.as_str()))
                    .collect::<Result<_, _>>()
                    .map_err(|err| Failure::Usage(format!("--select: {err}")))?
            };
            let id = ObjectId::new(id).map_err(|err| Failure::Usage(format!("--id: {err}")))?;
            let g = generate_slog(&e, &selection, &b, id)?;
            write_or_return(out.as_deref(), write_log(&g.slog), write_functor(&g.functor, None))
        }
        Command::Comprehend { story, library, search, segmentation } => {
            let (story, lib, b) = load_story(&story, &library, &search)?;
            let cfg = config(&search)?;
            let tree = comprehend(&story, &lib, &b, &cfg, segmentation.into(), search.depth.unwrap_or(3))?;
            let mut out = String::new();
            for node in tree.levels.iter().flatten() {
                let actions: Vec<&str> = node.actions.iter().map(|a| a.as_str()).collect();
                let _ = write!(out, "{} actions={}", node.id, actions.join(","));
                if !node.children.is_empty() {
                    let _ = write!(out, " children={}", node.children.join(","));
                }
                match &node.matched {
                    Some(m) => {
                        let _ = writeln!(out, " scene={} total={:.4}", m.slog, m.candidate.score.total);
                    }
                    None => out.push_str(" scene=-\n"),
                }
            }
            Ok(out)
        }
        Command::Classify { story, library, search, segmentation } => {
            let (story, lib, b) = load_story(&story, &library, &search)?;
            let cfg = config(&search)?;
            let tree = comprehend(&story, &lib, &b, &cfg, segmentation.into(), search.depth.unwrap_or(3))?;
            let mut out = String::new();
            for c in classify_story(&tree, &b) {
                let flag = if c.vacuous { " vacuous" } else { "" };
                let _ = writeln!(out, "{}\t{:.4}{flag}", c.class, c.score);
            }
            Ok(out)
        }
        Command::Plan { goal, world, library, search } => {
            let goal = ObjectId::new(goal).map_err(|e| Failure::Usage(format!("goal: {e}")))?;
            let world = load_log(&world)?;
            let lib = load_library(&library)?;
            let b = load_belog(&search.belogs)?;
            let plans = plan(&goal, &lib, &world, &b, &config(&search)?)?;
            let mut out = String::new();
            for p in plans {
                let chain: Vec<&str> = p.chain.iter().map(|c| c.as_str()).collect();
                let grounding: Vec<String> = p.assignment.iter().map(|(c, w)| format!("{c}={w}")).collect();
                let _ = writeln!(
                    out,
                    "# {} chain={} grounding={} score={:.4}",
                    p.id,
                    chain.join(","),
                    grounding.join(","),
                    p.score
                );
                out.push_str(&write_log(&p.elog));
            }
            Ok(out)
        }
        Command::DumpMatrices { log } => Ok(adjacency(&load_log(&log)?).dump()),
    }
}

fn load_library(args: &[String]) -> Result<Vec<Log>, Failure> {
    if args.is_empty() {
        let dir = store_dir().ok_or_else(|| Failure::Usage("no s-logs given and no store set".into()))?;
        return Ok(Store::load(&dir)?.scenarios());
    }
    args.iter().map(|a| load_log(a)).collect()
}

fn load_story(story: &str, library: &[String], search: &SearchArgs) -> Result<(Log, Vec<Log>, BeLog), Failure> {
    Ok((load_log(story)?, load_library(library)?, load_belog(&search.belogs)?))
}
