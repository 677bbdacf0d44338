//! Project manifest: `[files]`, `[roots]` and `[meta]` sections, one entry
//! per line, `#` comments.

use std::fmt;

use crate::syntax::{parse_term, OperatorTable, Term, TermKind};

use super::ModelError;

/// A predicate indicator as written by a user, optionally module-qualified.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Indicator {
    pub module: Option<String>,
    pub name: String,
    pub arity: usize,
}

impl Indicator {
    pub fn new(module: Option<&str>, name: &str, arity: usize) -> Self {
        Indicator {
            module: module.map(str::to_string),
            name: name.to_string(),
            arity,
        }
    }

    /// Parses `name/arity` or `module:name/arity`; names may be quoted.
    pub fn parse(text: &str) -> Result<Indicator, String> {
        let term = parse_term(text.trim(), &OperatorTable::default())
            .map_err(|e| format!("invalid predicate indicator `{text}`: {e}"))?;
        Self::from_term(&term).ok_or_else(|| format!("invalid predicate indicator `{text}`"))
    }

    pub fn from_term(term: &Term) -> Option<Indicator> {
        let (module, ind) = if term.is_functor(":", 2) {
            (Some(term.args()[0].atom_name()?.to_string()), &term.args()[1])
        } else {
            (None, term)
        };
        if !ind.is_functor("/", 2) {
            return None;
        }
        let name = ind.args()[0].atom_name()?.to_string();
        let TermKind::Int(arity) = ind.args()[1].kind else {
            return None;
        };
        Some(Indicator {
            module,
            name,
            arity: usize::try_from(arity).ok()?,
        })
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(m) = &self.module {
            write!(f, "{m}:")?;
        }
        write!(f, "{}/{}", crate::syntax::atom_text(&self.name), self.arity)
    }
}

/// One meta-argument: 1-based position and number of extra arguments the
/// meta-predicate appends before calling it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MetaArg {
    pub pos: usize,
    pub extra: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaSpec {
    pub name: String,
    pub arity: usize,
    pub args: Vec<MetaArg>,
}

impl MetaSpec {
    fn new(name: &str, arity: usize, args: &[(usize, usize)]) -> Self {
        MetaSpec {
            name: name.to_string(),
            arity,
            args: args.iter().map(|&(pos, extra)| MetaArg { pos, extra }).collect(),
        }
    }
}

/// Meta-predicates known without configuration.
pub fn default_meta() -> Vec<MetaSpec> {
    let mut v: Vec<MetaSpec> = (1..=8).map(|n| MetaSpec::new("call", n, &[(1, n - 1)])).collect();
    v.extend([
        MetaSpec::new("findall", 3, &[(2, 0)]),
        MetaSpec::new("findall", 4, &[(2, 0)]),
        MetaSpec::new("bagof", 3, &[(2, 0)]),
        MetaSpec::new("setof", 3, &[(2, 0)]),
        MetaSpec::new("aggregate_all", 3, &[(2, 0)]),
        MetaSpec::new("\\+", 1, &[(1, 0)]),
        MetaSpec::new("forall", 2, &[(1, 0), (2, 0)]),
        MetaSpec::new("once", 1, &[(1, 0)]),
        MetaSpec::new("ignore", 1, &[(1, 0)]),
        MetaSpec::new("not", 1, &[(1, 0)]),
        MetaSpec::new("catch", 3, &[(1, 0), (3, 0)]),
    ]);
    v.extend((2..=5).map(|n| MetaSpec::new("maplist", n, &[(1, n - 1)])));
    v
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub files: Vec<String>,
    /// `None` when the manifest has no `[roots]` section.
    pub roots: Option<Vec<Indicator>>,
    pub meta: Vec<MetaSpec>,
}

#[derive(PartialEq)]
enum Section {
    None,
    Files,
    Roots,
    Meta,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Manifest, ModelError> {
        let mut m = Manifest::default();
        let mut section = Section::None;
        for (lineno, raw) in text.lines().enumerate() {
            let err = |msg: String| ModelError::Manifest(format!("line {}: {msg}", lineno + 1));
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = match &line[1..line.len() - 1] {
                    "files" => Section::Files,
                    "roots" => {
                        m.roots.get_or_insert_with(Vec::new);
                        Section::Roots
                    }
                    "meta" => Section::Meta,
                    other => return Err(err(format!("unknown section [{other}]"))),
                };
                continue;
            }
            match section {
                Section::None => return Err(err("entry outside of any section".into())),
                Section::Files => m.files.push(line.to_string()),
                Section::Roots => m
                    .roots
                    .get_or_insert_with(Vec::new)
                    .push(Indicator::parse(line).map_err(err)?),
                Section::Meta => m.meta.push(parse_meta(line).map_err(err)?),
            }
        }
        Ok(m)
    }

    /// Effective meta-predicate table: defaults overridden by configuration.
    pub fn meta_table(&self) -> Vec<MetaSpec> {
        let mut table: Vec<MetaSpec> = default_meta()
            .into_iter()
            .filter(|d| !self.meta.iter().any(|m| m.name == d.name && m.arity == d.arity))
            .collect();
        table.extend(self.meta.iter().cloned());
        table
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_meta(line: &str) -> Result<MetaSpec, String> {
    let mut parts = line.split_whitespace();
    let ind = Indicator::parse(parts.next().unwrap_or_default())?;
    let mut args = Vec::new();
    for p in parts {
        let (pos, extra) = match p.split_once('+') {
            Some((a, b)) => (a, b),
            None => (p, "0"),
        };
        let pos: usize = pos.parse().map_err(|_| format!("bad meta position `{p}`"))?;
        let extra: usize = extra.parse().map_err(|_| format!("bad meta position `{p}`"))?;
        if pos == 0 || pos > ind.arity {
            return Err(format!("meta position {pos} out of range for {ind}"));
        }
        args.push(MetaArg { pos, extra });
    }
    if args.is_empty() {
        return Err(format!("no meta positions given for {ind}"));
    }
    Ok(MetaSpec {
        name: ind.name,
        arity: ind.arity,
        args,
    })
}

/// Rewrites the `[files]` section: drops `removed`, appends `added`.
pub fn rewrite_files(text: &str, added: &[String], removed: &[String]) -> String {
    let mut out = String::new();
    let mut in_files = false;
    let mut saw_files = false;
    let mut pending_added = !added.is_empty();
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    for (i, line) in lines.iter().enumerate() {
        let trimmed = strip_comment(line).trim();
        let is_header = trimmed.starts_with('[') && trimmed.ends_with(']');
        if is_header && in_files && pending_added {
            push_files(&mut out, added);
            pending_added = false;
        }
        if is_header {
            in_files = trimmed == "[files]";
            saw_files |= in_files;
        }
        if in_files && !is_header && removed.iter().any(|r| r == trimmed) {
            continue;
        }
        if !line.ends_with('\n') && i + 1 == lines.len() {
            out.push_str(line);
            out.push('\n');
        } else {
            out.push_str(line);
        }
    }
    if pending_added {
        if !saw_files {
            out.push_str("[files]\n");
        }
        push_files(&mut out, added);
    }
    out
}

fn push_files(out: &mut String, files: &[String]) {
    // keep added entries ahead of trailing blank lines
    let trimmed_len = out.trim_end_matches('\n').len();
    let tail = out[trimmed_len..].to_string();
    out.truncate(trimmed_len);
    if !out.is_empty() {
        out.push('\n');
    }
    for f in files {
        out.push_str(f);
        out.push('\n');
    }
    if tail.len() > 1 {
        out.push_str(&tail[1..]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let m = Manifest::parse(
            "# project\n[files]\nsrc/reader.pl\n\n[roots]\nmake_reader/3\nm:p/1 # entry\n[meta]\nmaplist/2 1+1\n",
        )
        .unwrap();
        assert_eq!(m.files, ["src/reader.pl"]);
        let roots = m.roots.unwrap();
        assert_eq!(roots[0], Indicator::new(None, "make_reader", 3));
        assert_eq!(roots[1], Indicator::new(Some("m"), "p", 1));
        assert_eq!(m.meta[0].args, [MetaArg { pos: 1, extra: 1 }]);
    }

    #[test]
    fn missing_roots_section_is_none() {
        let m = Manifest::parse("[files]\na.pl\n").unwrap();
        assert!(m.roots.is_none());
        let m = Manifest::parse("[files]\na.pl\n[roots]\n").unwrap();
        assert_eq!(m.roots, Some(vec![]));
    }

    #[test]
    fn rejects_garbage() {
        assert!(Manifest::parse("a.pl\n").is_err());
        assert!(Manifest::parse("[bogus]\n").is_err());
        assert!(Manifest::parse("[roots]\nfoo\n").is_err());
        assert!(Manifest::parse("[meta]\nfoo/1 2\n").is_err());
    }

    #[test]
    fn meta_config_overrides_defaults() {
        let m = Manifest::parse("[meta]\ncall/1 1\nmaplist/3 1+2\n").unwrap();
        let t = m.meta_table();
        assert_eq!(t.iter().filter(|s| s.name == "call" && s.arity == 1).count(), 1);
        assert!(t.iter().any(|s| s.name == "maplist"));
    }

    #[test]
    fn rewrite_files_section() {
        let text = "[files]\na.pl\nb.pl\n\n[roots]\nmain/0\n";
        let out = rewrite_files(text, &["c.pl".into()], &["a.pl".into()]);
        assert_eq!(out, "[files]\nb.pl\nc.pl\n\n[roots]\nmain/0\n");
        let out = rewrite_files("[files]\na.pl", &["c.pl".into()], &[]);
        assert_eq!(out, "[files]\na.pl\nc.pl\n");
        let out = rewrite_files("[roots]\nmain/0\n", &["c.pl".into()], &[]);
        assert_eq!(out, "[roots]\nmain/0\n[files]\nc.pl\n");
    }

    #[test]
    fn indicator_display_quotes() {
        assert_eq!(Indicator::parse("'hello world'/2").unwrap().to_string(), "'hello world'/2");
        assert_eq!(Indicator::parse("m:p/0").unwrap().to_string(), "m:p/0");
    }
}
