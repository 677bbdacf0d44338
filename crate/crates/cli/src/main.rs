//! `plref`: analyses and refactorings for Prolog projects.

use std::collections::BTreeSet;
use std::io::{BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use plref_core::analysis::{all_suggestions, dead_predicates, far, ArgPos, Location, Suggestion, SuggestionKind};
use plref_core::edit::{apply, unified_diff, EditError, EditSet, RealFs, SemanticsFlag};
use plref_core::model::{Indicator, Program};
use plref_core::oracle::{parse_battery, solve, Limits, Query, Stubs, Terminal};
use plref_core::transform::{from_suggestion, run, DupStrategy, TransformRequest};

const EXIT_REFACTOR: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CONFLICT: u8 = 3;

#[derive(Parser)]
#[command(name = "plref", version, about = "Analyse and refactor Prolog projects")]
struct Cli {
    /// Project manifest.
    #[arg(short, long, global = true, env = "PLREF_MANIFEST", default_value = "project.plm")]
    manifest: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write without asking.
    #[arg(short, long, global = true)]
    yes: bool,
    /// Print the diff and exit without writing.
    #[arg(long, global = true, conflicts_with = "yes")]
    dry_run: bool,
    /// Allow transforms flagged conditional or changing.
    #[arg(long, global = true)]
    accept_semantics_change: bool,
    #[arg(long, global = true, value_enum, default_value_t = Color::Auto)]
    color: Color,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Diff,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Color {
    Auto,
    Always,
    Never,
}

#[derive(Subcommand)]
enum Cmd {
    /// All suggestions.
    Check,
    /// Predicates unreachable from the roots.
    Dead,
    /// Groups of identical predicates.
    Dup,
    /// Arguments that can be removed.
    Far,
    /// Unused imports and exports that could be hidden.
    Imports,
    /// Clause-level smells: cuts, unifications, output before commit, negated conditions.
    Smells,
    /// Carry out a suggestion by id.
    Apply { id: String },
    /// Turn a goal sequence into a new predicate.
    Extract {
        name: String,
        /// Occurrence, `FILE:START..END` (bytes) or `FILE:LINE:COL-LINE:COL`; repeatable.
        #[arg(long = "at", required = true)]
        at: Vec<String>,
        /// Module for the new predicate.
        #[arg(long)]
        module: Option<String>,
    },
    /// Remove predicates from their module's export list.
    Hide {
        #[arg(required = true)]
        preds: Vec<String>,
        #[arg(long)]
        force: bool,
    },
    /// Delete dead predicates; all of them when none are named.
    RmDead {
        preds: Vec<String>,
        #[arg(long)]
        force: bool,
    },
    /// Collapse a group of identical predicates.
    RmDup {
        #[arg(num_args = 2.., required = true)]
        group: Vec<String>,
        /// Member to keep.
        #[arg(long, conflicts_with = "extract_to")]
        keep: Option<String>,
        /// Move one copy into this new module.
        #[arg(long, requires = "file")]
        extract_to: Option<String>,
        #[arg(long)]
        file: Option<String>,
    },
    /// Remove argument positions, `PRED@INDEX`; every removable one when none are named.
    RmArgs { positions: Vec<String> },
    /// Rename a predicate and every call to it.
    RenamePred { pred: String, new_name: String },
    /// Rename a data functor, everywhere or at the given occurrences.
    RenameFunctor {
        functor: String,
        new_name: String,
        /// Restrict to these occurrences.
        #[arg(long = "at")]
        at: Vec<String>,
    },
    /// Rename a module and the imports that name it.
    RenameModule {
        module: String,
        new_name: String,
        /// Also rename the module's file.
        #[arg(long)]
        file: Option<String>,
    },
    /// Merge modules into one.
    Merge {
        #[arg(num_args = 2.., required = true)]
        modules: Vec<String>,
        #[arg(long)]
        name: String,
        #[arg(long)]
        file: String,
    },
    /// Move some predicates of a module into a new one.
    Split {
        module: String,
        /// Predicates that go to the new module.
        #[arg(long = "part", required = true)]
        part: Vec<String>,
        #[arg(long)]
        name: String,
        #[arg(long)]
        file: String,
    },
    /// Move a predicate to another module.
    Move { pred: String, target: String },
    /// Thread a new argument from CALLER down to CALLEE.
    AddArg {
        caller: String,
        callee: String,
        seed: String,
        #[arg(long)]
        position: Option<usize>,
        #[arg(long)]
        clause: Option<usize>,
    },
    /// Reorder arguments, e.g. `reorder p/3 3,1,2`.
    Reorder { pred: String, permutation: String },
    /// Rewrite cut-guarded clauses as if-then-else.
    Cut2ite { pred: String },
    /// Swap the branches of an if-then-else and negate its condition.
    InvertIte { location: String },
    /// Turn a head-binding unification into an equality test.
    Unif2test {
        location: String,
        #[arg(long, default_value = "==")]
        test: String,
    },
    /// Move output unifications behind the commit point; positions are comma separated.
    OutputAfterCommit { pred: String, positions: String },
    /// Run queries with the bundled interpreter.
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
    /// Start the local HTTP service.
    Serve {
        #[arg(long, default_value_t = plref_service::DEFAULT_PORT)]
        port: u16,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Run a query, or every query of a battery file.
    Run(OracleArgs),
}

#[derive(Args)]
struct OracleArgs {
    query: Option<String>,
    #[arg(long, conflicts_with = "query")]
    battery: Option<PathBuf>,
    /// Fact table for builtins the interpreter lacks.
    #[arg(long)]
    stubs: Option<PathBuf>,
    #[arg(long, default_value_t = Limits::default().max_steps)]
    steps: u64,
    #[arg(long, default_value_t = Limits::default().max_answers)]
    answers: usize,
}

struct Fail {
    code: u8,
    message: String,
}

impl Fail {
    fn new(code: u8, message: impl Into<String>) -> Fail {
        Fail {
            code,
            message: message.into(),
        }
    }
    fn usage(message: impl Into<String>) -> Fail {
        Fail::new(EXIT_USAGE, message)
    }
    fn refactor(message: impl Into<String>) -> Fail {
        Fail::new(EXIT_REFACTOR, message)
    }
}

type Res<T = ()> = Result<T, Fail>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("error: invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("error: {first}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}

fn load(cli: &Cli) -> Res<Program> {
    Program::load(&cli.manifest).map_err(|e| Fail::refactor(e.to_string()))
}

fn dispatch(cli: &Cli) -> Res {
    use Cmd::*;
    let kinds = |ks: &[SuggestionKind]| ks.to_vec();
    match &cli.cmd {
        Check => list(cli, None),
        Dead => {
            let p = load(cli)?;
            dead_predicates(&p).map_err(|e| Fail::refactor(e.to_string()))?;
            show(cli, &p, Some(kinds(&[SuggestionKind::DeadCode])))
        }
        Dup => list(cli, Some(kinds(&[SuggestionKind::DuplicateGroup]))),
        Far => list(cli, Some(kinds(&[SuggestionKind::RedundantArgs]))),
        Imports => list(
            cli,
            Some(kinds(&[SuggestionKind::UnusedImport, SuggestionKind::HideableExport])),
        ),
        Smells => list(
            cli,
            Some(kinds(&[
                SuggestionKind::CutReplaceable,
                SuggestionKind::UnificationAsTest,
                SuggestionKind::OutputBeforeCommit,
                SuggestionKind::InvertibleIte,
                SuggestionKind::CommonSequence,
            ])),
        ),
        Oracle { cmd: OracleCmd::Run(a) } => oracle(cli, a),
        Serve { port } => serve(cli, *port),
        _ => {
            let p = load(cli)?;
            let req = request(cli, &p)?;
            transform(cli, &p, &req)
        }
    }
}

fn list(cli: &Cli, only: Option<Vec<SuggestionKind>>) -> Res {
    let p = load(cli)?;
    show(cli, &p, only)
}

fn show(cli: &Cli, p: &Program, only: Option<Vec<SuggestionKind>>) -> Res {
    let list: Vec<Suggestion> = all_suggestions(p)
        .into_iter()
        .filter(|s| only.as_ref().map_or(true, |k| k.contains(&s.kind)))
        .collect();
    let mut out = std::io::stdout().lock();
    if cli.format == Format::Json {
        let text = serde_json::to_string_pretty(&list).expect("suggestions serialize");
        let _ = writeln!(out, "{text}");
        return Ok(());
    }
    for s in &list {
        let at = s.span.as_ref().map(|l| position(p, l)).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "{}  {:<20} {}  {}  {}", s.id, s.kind.as_str(), s.target, at, s.explanation);
    }
    Ok(())
}

fn position(p: &Program, l: &Location) -> String {
    match p.file_index(&l.file) {
        Some(f) => {
            let (line, col) = line_col(p.file_text(f), l.start);
            format!("{}:{line}:{col}", l.file)
        }
        None => l.file.clone(),
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

fn offset_of(text: &str, line: usize, col: usize) -> Option<usize> {
    let mut start = 0;
    for _ in 1..line {
        start += text[start..].find('\n')? + 1;
    }
    let off = start + col.checked_sub(1)?;
    (off <= text.len()).then_some(off)
}

/// `FILE:START..END` in bytes, or `FILE:LINE:COL-LINE:COL` with the end column exclusive.
fn location(p: &Program, spec: &str) -> Res<Location> {
    let bad = || Fail::usage(format!("bad location {spec}: expected FILE:START..END or FILE:LINE:COL-LINE:COL"));
    let parts: Vec<&str> = spec.rsplitn(4, ':').collect();
    let (file, start, end) = if parts.len() == 4 && parts[1].contains('-') {
        let (c1, l2) = parts[1].split_once('-').ok_or_else(bad)?;
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
        let file = parts[3];
        let fid = p
            .file_index(file)
            .ok_or_else(|| Fail::usage(format!("{file} is not in the project")))?;
        let text = p.file_text(fid);
        let start = offset_of(text, num(parts[2])?, num(c1)?).ok_or_else(bad)?;
        let end = offset_of(text, num(l2)?, num(parts[0])?).ok_or_else(bad)?;
        (file.to_string(), start, end)
    } else {
        let (file, range) = spec.rsplit_once(':').ok_or_else(bad)?;
        let (a, b) = range.split_once("..").ok_or_else(bad)?;
        let a = a.parse().map_err(|_| bad())?;
        let b = b.parse().map_err(|_| bad())?;
        (file.to_string(), a, b)
    };
    if start > end {
        return Err(bad());
    }
    Ok(Location { file, start, end })
}

fn numbers(spec: &str) -> Res<Vec<usize>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Fail::usage(format!("bad number list {spec}")))
        })
        .collect()
}

fn arg_pos(p: &Program, spec: &str) -> Res<ArgPos> {
    let (pred, idx) = spec
        .rsplit_once('@')
        .ok_or_else(|| Fail::usage(format!("bad argument position {spec}: expected PRED@INDEX")))?;
    let index = idx
        .parse()
        .map_err(|_| Fail::usage(format!("bad argument index in {spec}")))?;
    let ind = Indicator::parse(pred).map_err(Fail::usage)?;
    let pred = p
        .find_pred(&ind)
        .ok_or_else(|| Fail::refactor(format!("unknown predicate {pred}")))?;
    Ok(ArgPos { pred, index })
}

fn request(cli: &Cli, p: &Program) -> Res<TransformRequest> {
    use Cmd::*;
    let locs = |specs: &[String]| specs.iter().map(|s| location(p, s)).collect::<Res<Vec<_>>>();
    Ok(match &cli.cmd {
        Apply { id } => {
            let s = all_suggestions(p)
                .into_iter()
                .find(|s| &s.id == id)
                .ok_or_else(|| Fail::new(EXIT_CONFLICT, format!("no suggestion {id} in the current project")))?;
            from_suggestion(&s).ok_or_else(|| {
                Fail::refactor(format!("{} suggestions need parameters; use the matching command", s.kind))
            })?
        }
        Extract { name, at, module } => TransformRequest::ExtractPredicate {
            occurrences: locs(at)?,
            name: name.clone(),
            module: module.clone(),
        },
        Hide { preds, force } => TransformRequest::HidePredicates {
            targets: preds.clone(),
            force: *force,
        },
        RmDead { preds, force } => {
            let targets = if preds.is_empty() {
                dead_predicates(p)
                    .map_err(|e| Fail::refactor(e.to_string()))?
                    .iter()
                    .map(ToString::to_string)
                    .collect()
            } else {
                preds.clone()
            };
            TransformRequest::RemoveDead { targets, force: *force }
        }
        RmDup {
            group,
            keep,
            extract_to,
            file,
        } => {
            let strategy = match (keep, extract_to, file) {
                (_, Some(module), Some(file)) => DupStrategy::ExtractTo {
                    module: module.clone(),
                    file: file.clone(),
                },
                (Some(keep), None, _) => DupStrategy::Keep { keep: keep.clone() },
                _ => DupStrategy::Keep { keep: group[0].clone() },
            };
            TransformRequest::RemoveDuplicates {
                group: group.clone(),
                strategy,
            }
        }
        RmArgs { positions } => {
            let positions = if positions.is_empty() {
                far(p).into_iter().collect()
            } else {
                positions.iter().map(|s| arg_pos(p, s)).collect::<Res<BTreeSet<_>>>()?.into_iter().collect()
            };
            TransformRequest::RemoveArguments { positions }
        }
        RenamePred { pred, new_name } => TransformRequest::RenamePredicate {
            pred: pred.clone(),
            new_name: new_name.clone(),
        },
        RenameFunctor { functor, new_name, at } => TransformRequest::RenameFunctor {
            functor: functor.clone(),
            new_name: new_name.clone(),
            occurrences: if at.is_empty() { None } else { Some(locs(at)?) },
        },
        RenameModule { module, new_name, file } => TransformRequest::RenameModule {
            module: module.clone(),
            new_name: new_name.clone(),
            file: file.clone(),
        },
        Merge { modules, name, file } => TransformRequest::MergeModules {
            modules: modules.clone(),
            new_name: name.clone(),
            file: file.clone(),
        },
        Split {
            module,
            part,
            name,
            file,
        } => TransformRequest::SplitModule {
            module: module.clone(),
            part_b: part.clone(),
            name_b: name.clone(),
            file_b: file.clone(),
        },
        Move { pred, target } => TransformRequest::MovePredicate {
            pred: pred.clone(),
            target: target.clone(),
        },
        AddArg {
            caller,
            callee,
            seed,
            position,
            clause,
        } => TransformRequest::AddArgument {
            caller: caller.clone(),
            callee: callee.clone(),
            seed: seed.clone(),
            position: *position,
            clause: *clause,
        },
        Reorder { pred, permutation } => TransformRequest::ReorderArguments {
            pred: pred.clone(),
            permutation: numbers(permutation)?,
        },
        Cut2ite { pred } => TransformRequest::ReplaceCutByIte { pred: pred.clone() },
        InvertIte { location: l } => TransformRequest::InvertIte {
            location: location(p, l)?,
        },
        Unif2test { location: l, test } => TransformRequest::UnificationToTest {
            location: location(p, l)?,
            test: test.clone(),
        },
        OutputAfterCommit { pred, positions } => TransformRequest::OutputAfterCommit {
            pred: pred.clone(),
            positions: numbers(positions)?,
        },
        Check | Dead | Dup | Far | Imports | Smells | Oracle { .. } | Serve { .. } => {
            unreachable!("not a transform")
        }
    })
}

fn use_color(cli: &Cli) -> bool {
    match cli.color {
        Color::Always => true,
        Color::Never => false,
        Color::Auto => std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal(),
    }
}

fn paint(diff: &str) -> String {
    let mut out = String::with_capacity(diff.len());
    for line in diff.split_inclusive('\n') {
        let code = if line.starts_with("+++") || line.starts_with("---") {
            "1"
        } else if line.starts_with('+') {
            "32"
        } else if line.starts_with('-') {
            "31"
        } else if line.starts_with("@@") {
            "36"
        } else {
            ""
        };
        if code.is_empty() {
            out.push_str(line);
        } else {
            let body = line.trim_end_matches('\n');
            out.push_str(&format!("\x1b[{code}m{body}\x1b[0m"));
            if line.ends_with('\n') {
                out.push('\n');
            }
        }
    }
    out
}

fn transform(cli: &Cli, p: &Program, req: &TransformRequest) -> Res {
    let es = run(p, req).map_err(|e| Fail::refactor(format!("{}: {e}", e.name())))?;
    let diff = unified_diff(&es, p).map_err(edit_fail)?;
    print_preview(cli, req, &es, &diff);
    if es.is_empty() {
        if cli.format == Format::Text {
            eprintln!("nothing to change");
        }
        return Ok(());
    }
    if cli.dry_run {
        return Ok(());
    }
    if es.semantics != SemanticsFlag::Preserving && !cli.accept_semantics_change {
        return Err(Fail::refactor(format!(
            "SemanticsChangeNotAccepted: {} is {}; rerun with --accept-semantics-change",
            req.name(),
            es.semantics.as_str()
        )));
    }
    if !cli.yes && !confirm()? {
        eprintln!("not applied");
        return Ok(());
    }
    let report = apply(&es, p, &RealFs).map_err(edit_fail)?;
    if cli.format == Format::Text {
        for f in &report.files_written {
            eprintln!("wrote {f}");
        }
        for f in &report.files_deleted {
            eprintln!("deleted {f}");
        }
    }
    Ok(())
}

fn print_preview(cli: &Cli, req: &TransformRequest, es: &EditSet, diff: &str) {
    let mut out = std::io::stdout().lock();
    match cli.format {
        Format::Json => {
            let v = json!({
                "transform": req.name(),
                "semantics_flag": es.semantics,
                "annotations": es.annotations,
                "diff": diff,
                "edits": es.edits,
                "file_ops": es.file_ops,
            });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("preview serializes"));
        }
        Format::Diff => {
            let _ = write!(out, "{diff}");
        }
        Format::Text => {
            let shown = if use_color(cli) { paint(diff) } else { diff.to_string() };
            let _ = write!(out, "{shown}");
            let _ = out.flush();
            for a in &es.annotations {
                eprintln!("note: {a}");
            }
            if es.semantics != SemanticsFlag::Preserving {
                eprintln!("note: semantics {}", es.semantics.as_str());
            }
        }
    }
}

fn confirm() -> Res<bool> {
    let stdin = std::io::stdin();
    if !stdin.is_terminal() {
        return Err(Fail::new(
            EXIT_CONFLICT,
            "stdin is not a terminal; pass --yes to write or --dry-run to preview",
        ));
    }
    eprint!("apply? [y/N] ");
    let mut line = String::new();
    stdin
        .lock()
        .read_line(&mut line)
        .map_err(|e| Fail::refactor(e.to_string()))?;
    Ok(matches!(line.trim(), "y" | "Y" | "yes"))
}

fn edit_fail(e: EditError) -> Fail {
    match e {
        EditError::Conflicts(_) | EditError::Locked(_) => Fail::new(EXIT_CONFLICT, e.to_string()),
        _ => Fail::refactor(e.to_string()),
    }
}

fn oracle(cli: &Cli, a: &OracleArgs) -> Res {
    let p = load(cli)?;
    let queries = match (&a.query, &a.battery) {
        (Some(q), _) => vec![Query::parse(q).map_err(|e| Fail::usage(e.to_string()))?],
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))?;
            parse_battery(&text).map_err(|e| Fail::usage(e.to_string()))?
        }
        (None, None) => return Err(Fail::usage("give a query or --battery FILE")),
    };
    let stubs = match &a.stubs {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))?;
            Stubs::parse(&text).map_err(|e| Fail::usage(e.to_string()))?
        }
        None => Stubs::new(),
    };
    let limits = Limits {
        max_steps: a.steps,
        max_answers: a.answers,
    };
    let mut out = std::io::stdout().lock();
    let mut results = Vec::new();
    for q in &queries {
        let o = solve(&p, q, limits, &stubs);
        if cli.format == Format::Json {
            let answers: Vec<String> = o.to_string().lines().map(str::to_string).collect();
            let terminal = match &o.terminal {
                Terminal::Exhausted => "exhausted".to_string(),
                Terminal::DepthLimited => "depth_limited".to_string(),
                Terminal::Error(e) => format!("error: {e}"),
            };
            let n = o.answers.len();
            results.push(json!({"query": q.to_string(), "answers": &answers[..n], "terminal": terminal, "steps": o.steps}));
        } else {
            let _ = writeln!(out, "{q}\n{o}");
        }
    }
    if cli.format == Format::Json {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&results).expect("results serialize"));
    }
    Ok(())
}

fn serve(cli: &Cli, port: u16) -> Res {
    let p = load(cli)?;
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Fail::refactor(e.to_string()))?;
    eprintln!("listening on http://127.0.0.1:{port}");
    rt.block_on(plref_service::serve(p, port))
        .map_err(|e| Fail::refactor(format!("serve: {e}")))
}
