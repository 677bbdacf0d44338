use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::syntax::{line_col, parse_program, render_term, Item, OpType, OperatorTable, Term, TermKind};

use super::manifest::{Indicator, Manifest};
use super::{
    pdg::Pdg, resolve, ClauseRef, ImportDecl, ImportSource, ListEntry, ModelError, ModuleDecl,
    ModuleDef, PredDef, PredId, Program, SourceFile, Warning,
};

static VERSION: AtomicU64 = AtomicU64::new(1);

/// A fresh, process-wide monotonically increasing snapshot version.
pub fn next_version() -> u64 {
    VERSION.fetch_add(1, Ordering::SeqCst)
}

/// Knobs for building a program snapshot.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Use this version instead of drawing a fresh one.
    pub version: Option<u64>,
}

impl Program {
    /// Reads a manifest and every file it lists (paths relative to the
    /// manifest's directory).
    pub fn load(manifest_path: &Path) -> Result<Program, ModelError> {
        let io = |path: &Path, e: std::io::Error| ModelError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let manifest_text =
            std::fs::read_to_string(manifest_path).map_err(|e| io(manifest_path, e))?;
        let manifest = Manifest::parse(&manifest_text)?;
        let root = manifest_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let mut sources = Vec::new();
        for f in &manifest.files {
            let p = root.join(f);
            let text = std::fs::read_to_string(&p).map_err(|e| io(&p, e))?;
            sources.push((f.clone(), text));
        }
        let mut program = Program::build(&manifest_text, manifest, &sources, LoadOptions::default())?;
        program.root = Some(root);
        program.manifest_path = manifest_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned());
        Ok(program)
    }

    /// Builds a program from in-memory sources; every file the manifest
    /// lists must be present in `sources`.
    pub fn from_sources(
        manifest_text: &str,
        sources: &[(String, String)],
    ) -> Result<Program, ModelError> {
        let manifest = Manifest::parse(manifest_text)?;
        let mut ordered = Vec::new();
        for f in &manifest.files {
            let text = sources
                .iter()
                .find(|(p, _)| p == f)
                .map(|(_, t)| t.clone())
                .ok_or_else(|| ModelError::Manifest(format!("no source for {f}")))?;
            ordered.push((f.clone(), text));
        }
        Program::build(manifest_text, manifest, &ordered, LoadOptions::default())
    }

    /// A one-file program with the given roots; handy for small fixtures.
    pub fn single(path: &str, text: &str, roots: &[&str]) -> Result<Program, ModelError> {
        let mut manifest = format!("[files]\n{path}\n");
        if !roots.is_empty() {
            manifest.push_str("[roots]\n");
            for r in roots {
                manifest.push_str(r);
                manifest.push('\n');
            }
        }
        Program::from_sources(&manifest, &[(path.to_string(), text.to_string())])
    }

    /// Rebuilds from new texts, keeping root directory and manifest location.
    pub fn reload_with(
        &self,
        manifest_text: &str,
        sources: &[(String, String)],
    ) -> Result<Program, ModelError> {
        let mut p = Program::from_sources(manifest_text, sources)?;
        p.root = self.root.clone();
        p.manifest_path = self.manifest_path.clone();
        Ok(p)
    }

    /// Reloads from disk when the program came from a manifest file.
    pub fn reload(&self) -> Result<Program, ModelError> {
        match (&self.root, &self.manifest_path) {
            (Some(root), Some(m)) => Program::load(&root.join(m)),
            _ => {
                let sources: Vec<(String, String)> = self
                    .files
                    .iter()
                    .map(|f| (f.path.clone(), f.text().to_string()))
                    .collect();
                self.reload_with(&self.manifest_text, &sources)
            }
        }
    }

    /// Current source texts keyed by manifest path.
    pub fn sources(&self) -> Vec<(String, String)> {
        self.files
            .iter()
            .map(|f| (f.path.clone(), f.text().to_string()))
            .collect()
    }

    fn build(
        manifest_text: &str,
        manifest: Manifest,
        sources: &[(String, String)],
        opts: LoadOptions,
    ) -> Result<Program, ModelError> {
        let mut seen = BTreeSet::new();
        let mut project_ops = OperatorTable::default();
        let mut files = Vec::new();
        for (path, text) in sources {
            if !seen.insert(path.clone()) {
                return Err(ModelError::Manifest(format!("{path} is listed twice")));
            }
            let mut ops = project_ops.clone();
            let parsed = parse_program(path, text, &mut ops).map_err(|e| {
                let (line, col) = line_col(text, e.offset());
                ModelError::Parse {
                    file: path.clone(),
                    offset: e.offset(),
                    line,
                    col,
                    message: e.to_string(),
                }
            })?;
            let module = module_directive(&parsed.items)
                .and_then(|(_, t)| t.args()[0].atom_name().map(str::to_string))
                .unwrap_or_else(|| "user".to_string());
            if let Some((_, t)) = module_directive(&parsed.items) {
                for (op, _) in list_items(&t.args()[1]) {
                    if let Some((p, kind, names)) = op_entry(op) {
                        for n in names {
                            project_ops.add(&n, p, kind);
                        }
                    }
                }
            }
            files.push(SourceFile {
                path: path.clone(),
                module,
                parsed,
                ops,
            });
        }

        let mut warnings = Vec::new();
        let mut modules: Vec<ModuleDef> = Vec::new();
        let mut module_index: HashMap<String, usize> = HashMap::new();
        for (fid, f) in files.iter().enumerate() {
            if let Some(&mi) = module_index.get(&f.module) {
                if f.module != "user" {
                    return Err(ModelError::DuplicateModuleName(f.module.clone()));
                }
                modules[mi].files.push(fid);
                continue;
            }
            let decl = module_directive(&f.parsed.items).map(|(item, t)| {
                let list = &t.args()[1];
                ModuleDecl {
                    item,
                    span: f.parsed.items[item].span(),
                    name_span: t.args()[0].span,
                    list_span: list.span,
                    element_spans: list_items(list).into_iter().filter_map(|(e, _)| e.span).collect(),
                }
            });
            let exports = module_directive(&f.parsed.items)
                .map(|(_, t)| list_entries(&t.args()[1], true))
                .unwrap_or_default();
            module_index.insert(f.module.clone(), modules.len());
            modules.push(ModuleDef {
                name: f.module.clone(),
                file: fid,
                files: vec![fid],
                decl,
                exports,
                imports: Vec::new(),
            });
        }

        let mut preds: BTreeMap<PredId, PredDef> = BTreeMap::new();
        for (fid, f) in files.iter().enumerate() {
            for (item, it) in f.parsed.items.iter().enumerate() {
                match it {
                    Item::Clause(c) => {
                        let Some((name, arity)) = c.head.functor() else {
                            let (line, col) = line_col(f.text(), c.span.start);
                            return Err(ModelError::Parse {
                                file: f.path.clone(),
                                offset: c.span.start,
                                line,
                                col,
                                message: "clause head is not callable".into(),
                            });
                        };
                        let id = PredId::new(&f.module, name, arity);
                        preds
                            .entry(id.clone())
                            .or_insert_with(|| PredDef {
                                id,
                                clauses: Vec::new(),
                                dynamic: false,
                            })
                            .clauses
                            .push(ClauseRef { file: fid, item });
                    }
                    Item::Directive { term, .. } => {
                        if term.is_functor("dynamic", 1) {
                            for ind in indicator_items(&term.args()[0]) {
                                let id = PredId::new(&f.module, &ind.name, ind.arity);
                                preds
                                    .entry(id.clone())
                                    .or_insert_with(|| PredDef {
                                        id,
                                        clauses: Vec::new(),
                                        dynamic: true,
                                    })
                                    .dynamic = true;
                            }
                        }
                    }
                }
            }
        }

        // imports need the full module table to resolve their sources
        let module_names: BTreeSet<String> = modules.iter().map(|m| m.name.clone()).collect();
        for (fid, f) in files.iter().enumerate() {
            for (item, it) in f.parsed.items.iter().enumerate() {
                let Item::Directive { term, span } = it else { continue };
                if !(term.is_functor("use_module", 1) || term.is_functor("use_module", 2)) {
                    continue;
                }
                let spec = term.args()[0].clone();
                let source = import_source(&spec, &f.path, &files, &module_names);
                if let ImportSource::Unknown(s) = &source {
                    warnings.push(Warning::UnknownImport {
                        module: f.module.clone(),
                        spec: s.clone(),
                        file: f.path.clone(),
                    });
                }
                let (entries, list_span, element_spans) = if term.args().len() == 2 {
                    let list = &term.args()[1];
                    if list.list_elements().is_some() {
                        (
                            Some(list_entries(list, false)),
                            list.span,
                            list_items(list).into_iter().filter_map(|(e, _)| e.span).collect(),
                        )
                    } else {
                        (None, list.span, Vec::new())
                    }
                } else {
                    (None, None, Vec::new())
                };
                let mi = module_index[&f.module];
                modules[mi].imports.push(ImportDecl {
                    file: fid,
                    item,
                    span: *span,
                    spec_span: spec.span,
                    spec,
                    source,
                    entries,
                    list_span,
                    element_spans,
                });
            }
        }

        for m in &modules {
            for e in m.exports.iter().filter(|e| !e.is_op) {
                if !preds.contains_key(&PredId::new(&m.name, &e.name, e.arity)) {
                    warnings.push(Warning::ExportNotDefined {
                        module: m.name.clone(),
                        indicator: format!("{}/{}", e.name, e.arity),
                    });
                }
            }
        }

        let roots = match &manifest.roots {
            Some(list) => resolve_roots(list, &preds)?,
            None => modules
                .iter()
                .flat_map(|m| {
                    m.exports
                        .iter()
                        .filter(|e| !e.is_op)
                        .map(|e| PredId::new(&m.name, &e.name, e.arity))
                })
                .filter(|p| preds.contains_key(p))
                .collect(),
        };

        let meta = manifest.meta_table();
        let mut program = Program {
            version: opts.version.unwrap_or_else(next_version),
            root: None,
            manifest_path: None,
            manifest_text: manifest_text.to_string(),
            manifest,
            files,
            modules,
            preds,
            roots,
            entry_points: BTreeSet::new(),
            meta,
            warnings,
            calls: Vec::new(),
            pdg: Pdg::default(),
            module_index,
            calls_by_item: HashMap::new(),
            calls_by_callee: HashMap::new(),
        };
        let (calls, call_warnings) = resolve::collect_calls(&program);
        program.warnings.extend(call_warnings);
        program.warnings.extend(resolve::ambiguity_warnings(&program));
        for (i, c) in calls.iter().enumerate() {
            program
                .calls_by_item
                .entry((c.file, c.item))
                .or_default()
                .push(i);
            if let Some(p) = c.resolution.pred() {
                program.calls_by_callee.entry(p.clone()).or_default().push(i);
                if c.caller.is_none() {
                    program.entry_points.insert(p.clone());
                }
            }
        }
        program.calls = calls;
        program.pdg = Pdg::build(&program);
        Ok(program)
    }
}

fn module_directive(items: &[Item]) -> Option<(usize, &Term)> {
    items.iter().enumerate().find_map(|(i, it)| match it {
        Item::Directive { term, .. }
            if term.is_functor("module", 2) && term.args()[0].atom_name().is_some() =>
        {
            Some((i, term))
        }
        _ => None,
    })
}

/// List elements paired with their index; a non-list yields nothing.
fn list_items(t: &Term) -> Vec<(&Term, usize)> {
    match t.list_elements() {
        Some((items, _)) => items.into_iter().enumerate().map(|(i, e)| (e, i)).collect(),
        None => Vec::new(),
    }
}

fn op_entry(t: &Term) -> Option<(u16, OpType, Vec<String>)> {
    if !t.is_functor("op", 3) {
        return None;
    }
    let a = t.args();
    let TermKind::Int(p) = a[0].kind else { return None };
    let kind: OpType = a[1].atom_name()?.parse().ok()?;
    let names = match a[2].list_elements() {
        Some((items, None)) => items.iter().filter_map(|n| n.atom_name()).map(str::to_string).collect(),
        _ => vec![a[2].atom_name()?.to_string()],
    };
    Some((p.clamp(0, 1200) as u16, kind, names))
}

fn list_entries(list: &Term, allow_ops: bool) -> Vec<ListEntry> {
    let mut out = Vec::new();
    for (e, _) in list_items(list) {
        if allow_ops {
            if let Some((_, _, names)) = op_entry(e) {
                for n in names {
                    out.push(ListEntry {
                        name: n,
                        arity: 0,
                        span: e.span,
                        is_op: true,
                    });
                }
                continue;
            }
        }
        if let Some((name, arity)) = entry_indicator(e) {
            out.push(ListEntry {
                name,
                arity,
                span: e.span,
                is_op: false,
            });
        }
    }
    out
}

fn entry_indicator(e: &Term) -> Option<(String, usize)> {
    let e = if e.is_functor("as", 2) { &e.args()[0] } else { e };
    let dcg = e.is_functor("//", 2);
    if !(e.is_functor("/", 2) || dcg) {
        return None;
    }
    let name = e.args()[0].atom_name()?.to_string();
    let TermKind::Int(n) = e.args()[1].kind else { return None };
    let n = usize::try_from(n).ok()?;
    Some((name, if dcg { n + 2 } else { n }))
}

fn indicator_items(t: &Term) -> Vec<Indicator> {
    if t.is_functor(",", 2) {
        let mut v = indicator_items(&t.args()[0]);
        v.extend(indicator_items(&t.args()[1]));
        return v;
    }
    if let Some((items, _)) = t.list_elements() {
        return items.into_iter().flat_map(indicator_items).collect();
    }
    Indicator::from_term(t).into_iter().collect()
}

fn normalize(path: &str) -> String {
    let mut parts: Vec<&str> = Vec::new();
    for p in path.split('/') {
        match p {
            "" | "." => {}
            ".." => {
                parts.pop();
            }
            p => parts.push(p),
        }
    }
    parts.join("/")
}

fn import_source(
    spec: &Term,
    importer: &str,
    files: &[SourceFile],
    modules: &BTreeSet<String>,
) -> ImportSource {
    if spec.is_functor("library", 1) {
        return ImportSource::Library(render_term(&spec.args()[0], &OperatorTable::default()));
    }
    let Some(name) = spec.atom_name() else {
        return ImportSource::Unknown(render_term(spec, &OperatorTable::default()));
    };
    let dir = importer.rsplit_once('/').map_or("", |(d, _)| d);
    let mut candidates = vec![normalize(&format!("{dir}/{name}")), normalize(name)];
    if !name.ends_with(".pl") {
        candidates.push(normalize(&format!("{dir}/{name}.pl")));
        candidates.push(normalize(&format!("{name}.pl")));
    }
    for c in &candidates {
        if let Some(f) = files.iter().find(|f| normalize(&f.path) == *c) {
            return ImportSource::Module(f.module.clone());
        }
    }
    let stem = name.rsplit('/').next().unwrap_or(name);
    let stem = stem.strip_suffix(".pl").unwrap_or(stem);
    if modules.contains(stem) {
        return ImportSource::Module(stem.to_string());
    }
    ImportSource::Unknown(name.to_string())
}

fn resolve_roots(
    list: &[Indicator],
    preds: &BTreeMap<PredId, PredDef>,
) -> Result<BTreeSet<PredId>, ModelError> {
    let mut roots = BTreeSet::new();
    for ind in list {
        let found: Vec<PredId> = match &ind.module {
            Some(m) => {
                let id = PredId::new(m, &ind.name, ind.arity);
                if preds.contains_key(&id) {
                    vec![id]
                } else {
                    vec![]
                }
            }
            None => {
                let user = PredId::new("user", &ind.name, ind.arity);
                if preds.contains_key(&user) {
                    vec![user]
                } else {
                    preds
                        .keys()
                        .filter(|p| p.name == ind.name && p.arity == ind.arity)
                        .cloned()
                        .collect()
                }
            }
        };
        if found.is_empty() {
            return Err(ModelError::Manifest(format!("root {ind} is not defined")));
        }
        roots.extend(found);
    }
    Ok(roots)
}
