use similar::TextDiff;

use super::{apply_in_memory, EditError, EditSet};
use crate::model::Program;

/// Unified diff of everything the edit set would change, git style
/// (`a/` and `b/` prefixes), three lines of context. Applies with `patch -p1`.
pub fn unified_diff(es: &EditSet, program: &Program) -> Result<String, EditError> {
    let applied = apply_in_memory(es, program)?;
    let mut out = String::new();
    for ch in &applied.changes {
        let old = ch.old.as_deref().unwrap_or("");
        let new = ch.new.as_deref().unwrap_or("");
        let a = ch
            .old_path
            .as_ref()
            .map(|p| format!("a/{p}"))
            .unwrap_or_else(|| "/dev/null".into());
        let b = ch
            .new_path
            .as_ref()
            .map(|p| format!("b/{p}"))
            .unwrap_or_else(|| "/dev/null".into());
        if old == new {
            // pure rename
            if let (Some(from), Some(to)) = (&ch.old_path, &ch.new_path) {
                out.push_str(&format!("rename from {from}\nrename to {to}\n"));
            }
            continue;
        }
        let diff = TextDiff::from_lines(old, new);
        out.push_str(&diff.unified_diff().context_radius(3).header(&a, &b).to_string());
    }
    Ok(out)
}
