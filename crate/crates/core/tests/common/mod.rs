//! Fixture loading and checks shared by the integration tests and the
//! acceptance target.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use plref_core::analysis::{all_suggestions, alpha_normal, far, ArgPos, Location};
use plref_core::edit::{apply_to_program, Fs, RealFs, SemanticsFlag};
use plref_core::model::{PredId, Program};
use plref_core::oracle::{equivalent, parse_battery, Limits, Query, Stubs};
use plref_core::syntax::{parse_program, render_item, render_term, Goal, GoalKind, OperatorTable, RenderStyle};
use plref_core::transform::{from_suggestion, run, TransformRequest};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub struct Fixture {
    pub name: String,
    pub dir: PathBuf,
    pub program: Program,
    pub queries: Vec<Query>,
}

pub fn corpus() -> Vec<Fixture> {
    let root = fixtures_dir().join("corpus");
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(&root)
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    dirs.into_iter()
        .map(|dir| {
            let name = dir.file_name().unwrap().to_string_lossy().into_owned();
            let program = Program::load(&dir.join("project.plm")).unwrap_or_else(|e| panic!("{name}: {e}"));
            let text = std::fs::read_to_string(dir.join("queries.txt")).unwrap();
            let queries = parse_battery(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            Fixture {
                name,
                dir,
                program,
                queries,
            }
        })
        .collect()
}

/// Every `.pl` file of the fixture tree.
pub fn corpus_files() -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut stack = vec![fixtures_dir()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "pl") {
                out.push((p.display().to_string(), std::fs::read_to_string(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

/// Parse, render, parse again: items must be structurally equal, and each
/// item's span must reparse on its own to the same item.
pub fn roundtrip(path: &str, text: &str) -> Result<(), String> {
    let mut ops = OperatorTable::default();
    let first = parse_program(path, text, &mut ops).map_err(|e| format!("{path}: {e}"))?;
    let style = RenderStyle::default();
    let mut ops2 = OperatorTable::default();
    let mut rendered = String::new();
    for it in &first.items {
        rendered.push_str(&render_item(it, &ops, &style));
        rendered.push('\n');
    }
    let second = parse_program(path, &rendered, &mut ops2).map_err(|e| format!("{path}: rendered text: {e}"))?;
    if first.items != second.items {
        return Err(format!("{path}: rendered program differs structurally"));
    }
    let mut ops3 = OperatorTable::default();
    for it in &first.items {
        let sp = it.span();
        let slice = &text[sp.start..sp.end];
        let one = parse_program(path, slice, &mut ops3).map_err(|e| format!("{path}: span {sp}: {e}"))?;
        if one.items.len() != 1 || one.items[0] != *it {
            return Err(format!("{path}: span {sp} does not reproduce its item"));
        }
    }
    Ok(())
}

fn collect_goals<'a>(g: &'a Goal, ites: &mut Vec<&'a Goal>) {
    g.walk(&mut |x| {
        if let GoalKind::IfThenElse { implicit_else: false, .. } = x.kind {
            ites.push(x);
        }
    });
}

/// Transform requests worth trying on a program. Entry points keep their
/// names and argument order so that the query battery stays meaningful.
pub fn candidates(p: &Program) -> Vec<TransformRequest> {
    let mut out: Vec<TransformRequest> = all_suggestions(p).iter().filter_map(from_suggestion).collect();
    let user_modules: Vec<String> = p.modules.iter().map(|m| m.name.clone()).filter(|m| m != "user").collect();
    for (id, def) in &p.preds {
        if def.clauses.is_empty() {
            continue;
        }
        out.push(TransformRequest::ReplaceCutByIte { pred: id.to_string() });
        if p.is_root(id) {
            continue;
        }
        out.push(TransformRequest::RenamePredicate {
            pred: id.to_string(),
            new_name: format!("{}_rn", id.name),
        });
        if id.arity >= 2 {
            out.push(TransformRequest::ReorderArguments {
                pred: id.to_string(),
                permutation: (1..=id.arity).rev().collect(),
            });
        }
        for m in &user_modules {
            if *m != id.module {
                out.push(TransformRequest::MovePredicate {
                    pred: id.to_string(),
                    target: m.clone(),
                });
            }
        }
    }
    let mut seen_edges = BTreeSet::new();
    for cs in &p.calls {
        if let (Some(caller), plref_core::model::Resolution::Pred(callee)) = (&cs.caller, &cs.resolution) {
            if cs.meta_extra.is_some() || caller == callee || p.is_root(caller) {
                continue;
            }
            if !seen_edges.insert((caller.clone(), callee.clone())) {
                continue;
            }
            let seed = p
                .clauses_of(caller)
                .find_map(|(_, c)| c.body.to_term().variables().into_iter().find(|v| !v.starts_with('_')));
            if let Some(seed) = seed {
                out.push(TransformRequest::AddArgument {
                    caller: caller.to_string(),
                    callee: callee.to_string(),
                    seed,
                    position: None,
                    clause: None,
                });
            }
        }
    }
    for f in &p.files {
        for c in f.parsed.clauses() {
            let mut ites = Vec::new();
            collect_goals(&c.body, &mut ites);
            for g in ites {
                if let Some(sp) = g.span {
                    out.push(TransformRequest::InvertIte {
                        location: Location {
                            file: f.path.clone(),
                            start: sp.start,
                            end: sp.end,
                        },
                    });
                }
            }
        }
    }
    for m in &user_modules {
        out.push(TransformRequest::RenameModule {
            module: m.clone(),
            new_name: format!("{m}_rn"),
            file: Some(format!("{m}_rn.pl")),
        });
        let own: Vec<&PredId> = p.preds.keys().filter(|k| &k.module == m).collect();
        if own.len() >= 2 {
            out.push(TransformRequest::SplitModule {
                module: m.clone(),
                part_b: vec![own[0].to_string()],
                name_b: format!("{m}_b"),
                file_b: format!("{m}_b.pl"),
            });
        }
    }
    for (i, a) in user_modules.iter().enumerate() {
        for b in &user_modules[i + 1..] {
            out.push(TransformRequest::MergeModules {
                modules: vec![a.clone(), b.clone()],
                new_name: "merged".into(),
                file: "merged.pl".into(),
            });
        }
    }
    let fa = far(p);
    if !fa.is_empty() {
        out.push(TransformRequest::RemoveArguments {
            positions: fa.into_iter().collect(),
        });
    }
    out
}

#[derive(Debug, Default)]
pub struct Preservation {
    pub tried: usize,
    pub preserving: usize,
    pub not_preserving: usize,
    pub refused: usize,
    /// Preserving edits that change an entry point's interface; the battery
    /// addresses the old one.
    pub interface_changed: usize,
    pub queries: usize,
    pub failures: Vec<String>,
    /// Preserving applications per transform name.
    pub by_transform: BTreeMap<&'static str, usize>,
}

pub fn check_equal(a: &Program, b: &Program, queries: &[Query]) -> Result<(), String> {
    let verdicts = equivalent(a, b, queries, Limits::default(), &Stubs::new());
    for (q, v) in queries.iter().zip(&verdicts) {
        if !v.is_equal() {
            return Err(format!("{q}: {v:?}"));
        }
    }
    Ok(())
}

/// Runs every candidate; those flagged preserving must give equal outcomes
/// on the whole battery.
pub fn preservation(fx: &Fixture) -> Preservation {
    let mut r = Preservation::default();
    for req in candidates(&fx.program) {
        r.tried += 1;
        let es = match run(&fx.program, &req) {
            Ok(es) if !es.is_empty() => es,
            _ => {
                r.refused += 1;
                continue;
            }
        };
        if es.semantics != SemanticsFlag::Preserving {
            r.not_preserving += 1;
            continue;
        }
        let after = match apply_to_program(&es, &fx.program) {
            Ok(p) => p,
            Err(e) => {
                r.failures.push(format!("{} {req:?}: {e}", fx.name));
                continue;
            }
        };
        if after.roots != fx.program.roots {
            r.interface_changed += 1;
            continue;
        }
        r.preserving += 1;
        *r.by_transform.entry(req.name()).or_default() += 1;
        r.queries += fx.queries.len();
        if let Err(e) = check_equal(&fx.program, &after, &fx.queries) {
            r.failures.push(format!("{} {}: {e}", fx.name, serde_json::to_string(&req).unwrap()));
        }
    }
    r
}

pub struct FarFixture {
    pub name: String,
    pub program: Program,
    pub planted: BTreeSet<ArgPos>,
    pub queries: Vec<Query>,
}

/// Single-file fixtures whose header lists roots, planted positions and queries:
/// `% roots: p/2`, `% planted: q/3@2`, `% ?- p(1, X).`
pub fn far_fixtures() -> Vec<FarFixture> {
    let dir = fixtures_dir().join("far");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
        .into_iter()
        .filter(|f| f.extension().is_some_and(|x| x == "pl"))
        .map(|f| {
            let name = f.file_name().unwrap().to_string_lossy().into_owned();
            let text = std::fs::read_to_string(&f).unwrap();
            let mut roots = Vec::new();
            let mut planted_raw = Vec::new();
            let mut queries = Vec::new();
            for line in text.lines() {
                if let Some(r) = line.strip_prefix("% roots:") {
                    roots.extend(r.split_whitespace().map(str::to_string));
                } else if let Some(r) = line.strip_prefix("% planted:") {
                    planted_raw.extend(r.split_whitespace().map(str::to_string));
                } else if let Some(q) = line.strip_prefix("% ?-") {
                    queries.push(Query::parse(q).unwrap_or_else(|e| panic!("{name}: {e}")));
                }
            }
            let rs: Vec<&str> = roots.iter().map(String::as_str).collect();
            let program = Program::single(&name, &text, &rs).unwrap_or_else(|e| panic!("{name}: {e}"));
            let planted = planted_raw
                .iter()
                .map(|s| {
                    let (ind, i) = s.rsplit_once('@').unwrap();
                    let (n, a) = ind.rsplit_once('/').unwrap();
                    ArgPos {
                        pred: PredId::new("user", n, a.parse().unwrap()),
                        index: i.parse().unwrap(),
                    }
                })
                .collect();
            FarFixture {
                name,
                program,
                planted,
                queries,
            }
        })
        .collect()
}

/// Marks every planted position, and removing the full marked set keeps
/// the battery's outcomes.
pub fn far_check(fx: &FarFixture) -> Result<usize, String> {
    let marked = far(&fx.program);
    let missing: Vec<String> = fx
        .planted
        .iter()
        .filter(|a| !marked.contains(a))
        .map(|a| format!("{}@{}", a.pred, a.index))
        .collect();
    if !missing.is_empty() {
        return Err(format!("{}: planted positions not marked: {}", fx.name, missing.join(", ")));
    }
    let req = TransformRequest::RemoveArguments {
        positions: marked.iter().cloned().collect(),
    };
    let es = run(&fx.program, &req).map_err(|e| format!("{}: {e}", fx.name))?;
    let after = apply_to_program(&es, &fx.program).map_err(|e| format!("{}: {e}", fx.name))?;
    check_equal(&fx.program, &after, &fx.queries).map_err(|e| format!("{}: {e}", fx.name))?;
    Ok(marked.len())
}

/// A random call graph as a program, with the dead set computed by a plain
/// breadth-first search over the generated edges.
pub fn random_call_graph(seed: u64) -> (String, Vec<String>, BTreeSet<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=50);
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut text = String::new();
    for i in 0..n {
        let nclauses = rng.gen_range(1..=2);
        for _ in 0..nclauses {
            let k = rng.gen_range(0..=3);
            let mut goals = Vec::new();
            for _ in 0..k {
                let j = rng.gen_range(0..n);
                edges[i].push(j);
                let g = match rng.gen_range(0..6) {
                    0 => format!("\\+ {}", names[j]),
                    1 => format!("findall(x, {}, _)", names[j]),
                    2 => format!("( {} -> true ; true )", names[j]),
                    3 => format!("call({})", names[j]),
                    _ => names[j].clone(),
                };
                goals.push(g);
            }
            if goals.is_empty() {
                text.push_str(&format!("{}.\n", names[i]));
            } else {
                text.push_str(&format!("{} :- {}.\n", names[i], goals.join(", ")));
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let nroots = rng.gen_range(1..=3.min(n));
    let roots: Vec<usize> = idx[..nroots].to_vec();
    let mut live = vec![false; n];
    let mut queue: VecDeque<usize> = roots.iter().copied().collect();
    for &r in &roots {
        live[r] = true;
    }
    while let Some(i) = queue.pop_front() {
        for &j in &edges[i] {
            if !live[j] {
                live[j] = true;
                queue.push_back(j);
            }
        }
    }
    let dead = (0..n).filter(|&i| !live[i]).map(|i| format!("user:{}/0", names[i])).collect();
    let roots = roots.iter().map(|&i| format!("{}/0", names[i])).collect();
    (text, roots, dead)
}

pub const DUP_A: &str = ":- module(alpha, [even/1, odd/1, size/2]).

even(z).
even(s(N)) :- odd(N).

odd(s(N)) :- even(N).

size([], 0).
size([_|T], N) :- size(T, M), N is M + 1.
";

pub const DUP_B: &str = ":- module(beta, [even/1, odd/1, size/2]).

even(z).
even(s(M)) :- odd(M).

odd(s(M)) :- even(M).

size([], 0).
size([_|T], N) :- size(T, M), N is M + 2.
";

pub const DUP_C: &str = ":- module(gamma, [start/1]).
:- use_module(alpha).
:- use_module(beta).

start(X) :- alpha:even(X), beta:odd(X).
";

/// Duplicate groups merged per module set, so a duplicated SCC counts once.
pub fn dup_corpus_groups() -> Vec<BTreeSet<String>> {
    let p = Program::from_sources(
        "[files]\nalpha.pl\nbeta.pl\ngamma.pl\n",
        &[
            ("alpha.pl".into(), DUP_A.into()),
            ("beta.pl".into(), DUP_B.into()),
            ("gamma.pl".into(), DUP_C.into()),
        ],
    )
    .unwrap();
    let mut by_modules: BTreeMap<BTreeSet<String>, BTreeSet<String>> = BTreeMap::new();
    for g in plref_core::analysis::duplicate_groups(&p) {
        let mods: BTreeSet<String> = g.iter().map(|m| m.module.clone()).collect();
        by_modules.entry(mods).or_default().extend(g.iter().map(ToString::to_string));
    }
    by_modules.into_values().collect()
}

pub fn dup_expected() -> BTreeSet<String> {
    ["alpha:even/1", "alpha:odd/1", "beta:even/1", "beta:odd/1"]
        .into_iter()
        .map(String::from)
        .collect()
}

/// Hash of every file under `dir`, keyed by relative path.
pub fn tree_hash(dir: &Path) -> String {
    let mut entries = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                entries.push(p);
            }
        }
    }
    entries.sort();
    let mut h = Sha256::new();
    for p in entries {
        h.update(p.strip_prefix(dir).unwrap().to_string_lossy().as_bytes());
        h.update([0]);
        h.update(std::fs::read(&p).unwrap());
        h.update([0]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Real file system that fails the `fail_at`-th mutating call.
pub struct FailingFs {
    calls: AtomicUsize,
    fail_at: usize,
}

impl FailingFs {
    pub fn new(fail_at: usize) -> Self {
        FailingFs {
            calls: AtomicUsize::new(0),
            fail_at,
        }
    }

    pub fn mutations(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn tick(&self) -> io::Result<()> {
        let n = self.calls.fetch_add(1, Ordering::SeqCst) + 1;
        if n == self.fail_at {
            Err(io::Error::new(io::ErrorKind::Other, format!("injected failure at call {n}")))
        } else {
            Ok(())
        }
    }
}

impl Fs for FailingFs {
    fn read(&self, path: &Path) -> io::Result<Vec<u8>> {
        RealFs.read(path)
    }
    fn write(&self, path: &Path, data: &[u8]) -> io::Result<()> {
        self.tick()?;
        RealFs.write(path, data)
    }
    fn rename(&self, from: &Path, to: &Path) -> io::Result<()> {
        self.tick()?;
        RealFs.rename(from, to)
    }
    fn remove(&self, path: &Path) -> io::Result<()> {
        self.tick()?;
        RealFs.remove(path)
    }
    fn create_dir_all(&self, path: &Path) -> io::Result<()> {
        RealFs.create_dir_all(path)
    }
    fn remove_dir_all(&self, path: &Path) -> io::Result<()> {
        RealFs.remove_dir_all(path)
    }
    fn exists(&self, path: &Path) -> bool {
        RealFs.exists(path)
    }
}

/// Copies a fixture directory into `dst`.
pub fn copy_dir(src: &Path, dst: &Path) {
    std::fs::create_dir_all(dst).unwrap();
    for e in std::fs::read_dir(src).unwrap() {
        let p = e.unwrap().path();
        if p.is_file() {
            std::fs::copy(&p, dst.join(p.file_name().unwrap())).unwrap();
        }
    }
}

pub const READER: &str = include_str!("../fixtures/okeefe_reader.pl");

pub fn reader() -> Program {
    Program::single("reader.pl", READER, &["make_reader/3", "reader_next/3", "reader_done/1"]).unwrap()
}

/// Clauses per predicate with variables renamed canonically, order ignored.
pub fn shape(p: &Program) -> BTreeMap<String, Vec<String>> {
    let ops = OperatorTable::default();
    let mut out = BTreeMap::new();
    for id in p.preds.keys() {
        let mut v: Vec<String> = p
            .clauses_of(id)
            .map(|(_, c)| render_term(&alpha_normal(&[c.to_term()])[0], &ops))
            .collect();
        v.sort();
        out.insert(format!("{}/{}", id.name, id.arity), v);
    }
    out
}

pub fn shape_of(text: &str) -> BTreeMap<String, Vec<String>> {
    shape(&Program::single("x.pl", text, &[]).unwrap())
}

pub fn loc(p: &Program, file: &str, needle: &str) -> Result<Location, String> {
    let fid = p.file_index(file).ok_or_else(|| format!("no file {file}"))?;
    let start = p
        .file_text(fid)
        .find(needle)
        .ok_or_else(|| format!("`{needle}` not in {file}"))?;
    Ok(Location {
        file: file.into(),
        start,
        end: start + needle.len(),
    })
}

pub fn step(p: Program, req: TransformRequest) -> Result<Program, String> {
    let es = run(&p, &req).map_err(|e| format!("{}: {e}", req.name()))?;
    apply_to_program(&es, &p).map_err(|e| format!("{}: {e}", req.name()))
}

pub const CUT2ITE_LISTING: &str = "reader_code(Term,Stream,State) :- \
    ( Term = end_of_file, State = end_of_file -> true \
    ; State = read(Term,Stream,Position), stream_position(Stream,Position) ).";

pub fn cut2ite_golden() -> Result<(), String> {
    let p = reader();
    let es = run(&p, &TransformRequest::ReplaceCutByIte { pred: "reader_code/3".into() }).map_err(|e| e.to_string())?;
    if es.semantics != SemanticsFlag::Preserving {
        return Err(format!("flagged {}", es.semantics.as_str()));
    }
    let q = apply_to_program(&es, &p).map_err(|e| e.to_string())?;
    let got = &shape(&q)["reader_code/3"];
    let want = &shape_of(CUT2ITE_LISTING)["reader_code/3"];
    if got != want {
        return Err(format!("got {got:?}, want {want:?}"));
    }
    Ok(())
}

pub const RENAMING_LISTING: &str = "\
reader_init(File,Stream,State) :- open(File,read,Stream), reader_next_state(Stream,State).
reader_next(reader(Term,Stream,Pos),Term,State) :- set_stream_position(Stream,Pos), reader_next_state(Stream,State).
reader_done(end_of_file).
reader_next_state(Stream,State) :- read(Stream,Term), build_reader_state(Term,Stream,State).
build_reader_state(Term,Stream,State) :- ( Term == end_of_file -> State = end_of_file ; State = reader(Term,Stream,Position), get_stream_position(Stream,Position) ).
set_stream_position(Stream,Position) :- stream_position(Stream,_,Position).
get_stream_position(Stream,Position) :- stream_position(Stream,Position).
";

/// The scripted refactoring of the stream reader, compared with the final listing.
pub fn reader_pipeline() -> Result<(), String> {
    let f = "reader.pl";
    let mut p = reader();
    p = step(p, TransformRequest::ReplaceCutByIte { pred: "reader_code/3".into() })?;
    p = step(
        p,
        TransformRequest::OutputAfterCommit {
            pred: "reader_code/3".into(),
            positions: vec![3],
        },
    )?;
    let l = loc(&p, f, "Term = end_of_file")?;
    p = step(
        p,
        TransformRequest::UnificationToTest {
            location: l,
            test: "==".into(),
        },
    )?;
    let occ = vec![
        loc(&p, f, "read(Stream,Term),\n        reader_code(Term,Stream,State)")?,
        loc(&p, f, "read(Stream,Next),\n        reader_code(Next,Stream,State)")?,
    ];
    p = step(
        p,
        TransformRequest::ExtractPredicate {
            occurrences: occ,
            name: "read_next_state".into(),
            module: None,
        },
    )?;
    p = step(
        p,
        TransformRequest::ReorderArguments {
            pred: "reader_next/3".into(),
            permutation: vec![2, 1, 3],
        },
    )?;
    for (old, new) in [
        ("make_reader/3", "reader_init"),
        ("read_next_state/2", "reader_next_state"),
        ("reader_code/3", "build_reader_state"),
    ] {
        p = step(
            p,
            TransformRequest::RenamePredicate {
                pred: old.into(),
                new_name: new.into(),
            },
        )?;
    }
    p = step(
        p,
        TransformRequest::RenameFunctor {
            functor: "read/3".into(),
            new_name: "reader".into(),
            occurrences: None,
        },
    )?;
    for (needle, name) in [
        ("stream_position(Stream,_,Pos)", "set_stream_position"),
        ("stream_position(Stream,Position)", "get_stream_position"),
    ] {
        let l = loc(&p, f, needle)?;
        p = step(
            p,
            TransformRequest::ExtractPredicate {
                occurrences: vec![l],
                name: name.into(),
                module: None,
            },
        )?;
    }
    let got = shape(&p);
    let want = shape_of(RENAMING_LISTING);
    if got != want {
        return Err(format!("final program differs:\n{}", p.file_text(0)));
    }
    Ok(())
}

/// A unification whose left side can be unbound at run time.
pub const GUARD_SRC: &str = "answer(X, R) :-
    (   X = yes ->
        R = agreed
    ;   R = declined
    ).
";

pub const GUARD_NEEDLE: &str = "X = yes";

/// `Ok` when turning the unification into `==` changes some outcome.
pub fn guardrail_oracle() -> Result<(), String> {
    let p = Program::single("guard.pl", GUARD_SRC, &["answer/2"]).unwrap();
    let l = loc(&p, "guard.pl", GUARD_NEEDLE)?;
    let es = run(
        &p,
        &TransformRequest::UnificationToTest {
            location: l,
            test: "==".into(),
        },
    )
    .map_err(|e| e.to_string())?;
    if es.semantics == SemanticsFlag::Preserving {
        return Err("unif2test flagged preserving".into());
    }
    let q = apply_to_program(&es, &p).map_err(|e| e.to_string())?;
    let queries = parse_battery("?- answer(V, R).\n?- answer(yes, R).\n?- answer(no, R).\n").unwrap();
    let verdicts = equivalent(&p, &q, &queries, Limits::default(), &Stubs::new());
    if verdicts[0].is_equal() {
        return Err("unbound query gave equal outcomes".into());
    }
    if !verdicts[1].is_equal() || !verdicts[2].is_equal() {
        return Err("bound queries should agree".into());
    }
    Ok(())
}

/// Dead predicates of one random graph versus the naive search.
pub fn dead_code_seed(seed: u64) -> Result<(), String> {
    let (text, roots, expected) = random_call_graph(seed);
    let rs: Vec<&str> = roots.iter().map(String::as_str).collect();
    let p = Program::single("g.pl", &text, &rs).map_err(|e| e.to_string())?;
    let got: BTreeSet<String> = plref_core::analysis::dead_predicates(&p)
        .map_err(|e| e.to_string())?
        .iter()
        .map(ToString::to_string)
        .collect();
    if got != expected {
        return Err(format!("seed {seed}: got {got:?}, expected {expected:?}"));
    }
    Ok(())
}

fn fault_setup() -> (tempfile::TempDir, Program, plref_core::edit::EditSet) {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&fixtures_dir().join("corpus/18_chain"), dir.path());
    let p = Program::load(&dir.path().join("project.plm")).unwrap();
    let req = TransformRequest::RenameModule {
        module: "back".into(),
        new_name: "engine".into(),
        file: Some("engine.pl".into()),
    };
    let es = run(&p, &req).unwrap();
    (dir, p, es)
}

/// Mutating file system calls made by the fault-injection apply.
pub fn fault_steps() -> usize {
    let (_dir, p, es) = fault_setup();
    let probe = FailingFs::new(usize::MAX);
    plref_core::edit::apply(&es, &p, &probe).unwrap();
    probe.mutations()
}

/// Fails an apply at `n` evenly spread steps; returns how many runs left the
/// tree byte-identical and reported the failure.
pub fn fault_injection(n: usize) -> Result<usize, String> {
    let (_dir, p, es) = fault_setup();
    let probe = FailingFs::new(usize::MAX);
    plref_core::edit::apply(&es, &p, &probe).map_err(|e| e.to_string())?;
    let steps = probe.mutations();
    if steps < n {
        return Err(format!("only {steps} mutating steps"));
    }
    let mut intact = 0;
    for k in 1..=n {
        let (dir, p, es) = fault_setup();
        let before = tree_hash(dir.path());
        let fs = FailingFs::new(k * steps / n);
        let failed = plref_core::edit::apply(&es, &p, &fs).is_err();
        if failed && tree_hash(dir.path()) == before {
            intact += 1;
        }
    }
    Ok(intact)
}
