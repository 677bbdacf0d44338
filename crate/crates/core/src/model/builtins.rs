//! Curated builtin knowledge: which indicators are system predicates, which
//! are pure tests, and how tests negate.

/// Control constructs; never predicates.
pub fn is_control(name: &str, arity: usize) -> bool {
    matches!(
        (name, arity),
        (",", 2) | (";", 2) | ("->", 2) | ("*->", 2) | ("\\+", 1) | ("!", 0) | (":", 2)
    )
}

const BUILTINS: &[(&str, usize)] = &[
    ("true", 0),
    ("fail", 0),
    ("false", 0),
    ("otherwise", 0),
    ("halt", 0),
    ("halt", 1),
    ("nl", 0),
    ("nl", 1),
    ("=", 2),
    ("\\=", 2),
    ("==", 2),
    ("\\==", 2),
    ("@<", 2),
    ("@>", 2),
    ("@=<", 2),
    ("@>=", 2),
    ("compare", 3),
    ("=..", 2),
    ("is", 2),
    ("=:=", 2),
    ("=\\=", 2),
    ("<", 2),
    (">", 2),
    ("=<", 2),
    (">=", 2),
    ("var", 1),
    ("nonvar", 1),
    ("atom", 1),
    ("number", 1),
    ("integer", 1),
    ("float", 1),
    ("atomic", 1),
    ("compound", 1),
    ("callable", 1),
    ("is_list", 1),
    ("string", 1),
    ("ground", 1),
    ("functor", 3),
    ("arg", 3),
    ("copy_term", 2),
    ("atom_codes", 2),
    ("atom_chars", 2),
    ("atom_length", 2),
    ("atom_concat", 3),
    ("sub_atom", 5),
    ("char_code", 2),
    ("number_codes", 2),
    ("number_chars", 2),
    ("atom_number", 2),
    ("atom_string", 2),
    ("atom_to_term", 3),
    ("term_to_atom", 2),
    ("format", 1),
    ("format", 2),
    ("format", 3),
    ("write", 1),
    ("write", 2),
    ("writeln", 1),
    ("print", 1),
    ("writeq", 1),
    ("writeq", 2),
    ("write_canonical", 1),
    ("write_term", 2),
    ("write_term", 3),
    ("read", 1),
    ("read", 2),
    ("read_term", 2),
    ("read_term", 3),
    ("open", 3),
    ("open", 4),
    ("close", 1),
    ("close", 2),
    ("stream_position", 2),
    ("stream_position", 3),
    ("set_stream_position", 2),
    ("stream_property", 2),
    ("current_input", 1),
    ("current_output", 1),
    ("set_input", 1),
    ("set_output", 1),
    ("get_char", 1),
    ("get_char", 2),
    ("put_char", 1),
    ("put_char", 2),
    ("peek_char", 1),
    ("assert", 1),
    ("asserta", 1),
    ("assertz", 1),
    ("retract", 1),
    ("retractall", 1),
    ("abolish", 1),
    ("call", 1),
    ("call", 2),
    ("call", 3),
    ("call", 4),
    ("call", 5),
    ("call", 6),
    ("call", 7),
    ("call", 8),
    ("once", 1),
    ("ignore", 1),
    ("not", 1),
    ("findall", 3),
    ("findall", 4),
    ("bagof", 3),
    ("setof", 3),
    ("forall", 2),
    ("aggregate_all", 3),
    ("catch", 3),
    ("throw", 1),
    ("length", 2),
    ("append", 3),
    ("member", 2),
    ("memberchk", 2),
    ("reverse", 2),
    ("nth0", 3),
    ("nth1", 3),
    ("last", 2),
    ("msort", 2),
    ("sort", 2),
    ("sort", 4),
    ("keysort", 2),
    ("between", 3),
    ("succ", 2),
    ("plus", 3),
    ("maplist", 2),
    ("maplist", 3),
    ("maplist", 4),
    ("maplist", 5),
    ("nb_getval", 2),
    ("nb_setval", 2),
    ("b_getval", 2),
    ("b_setval", 2),
    ("tab", 1),
    ("op", 3),
    ("current_op", 3),
    ("dynamic", 1),
    ("discontiguous", 1),
    ("initialization", 1),
    ("ensure_loaded", 1),
    ("use_module", 1),
    ("use_module", 2),
    ("module", 2),
    ("number_vars", 3),
    ("numbervars", 3),
    ("tab", 2),
    ("char_type", 2),
    ("code_type", 2),
    ("sum_list", 2),
    ("sumlist", 2),
    ("max_list", 2),
    ("min_list", 2),
    ("list_to_set", 2),
    ("exclude", 3),
    ("include", 3),
    ("partition", 4),
    ("foldl", 4),
    ("foldl", 5),
    ("select", 3),
    ("selectchk", 3),
    ("subtract", 3),
    ("intersection", 3),
    ("union", 3),
    ("delete", 3),
    ("exclude", 3),
    ("string_concat", 3),
    ("string_chars", 2),
    ("string_codes", 2),
    ("string_to_atom", 2),
    ("number_string", 2),
    ("split_string", 4),
    ("term_variables", 2),
    ("tab", 1),
    ("get_time", 1),
    ("statistics", 2),
    ("garbage_collect", 0),
    ("consult", 1),
    ("repeat", 0),
];

pub fn is_builtin(name: &str, arity: usize) -> bool {
    BUILTINS.iter().any(|&(n, a)| n == name && a == arity)
}

/// Builtins that only test their arguments: they never bind variables and
/// succeed at most once.
pub fn is_binding_free_test(name: &str, arity: usize) -> bool {
    matches!(
        (name, arity),
        ("true", 0)
            | ("fail", 0)
            | ("false", 0)
            | ("==", 2)
            | ("\\==", 2)
            | ("=:=", 2)
            | ("=\\=", 2)
            | ("<", 2)
            | (">", 2)
            | ("=<", 2)
            | (">=", 2)
            | ("@<", 2)
            | ("@>", 2)
            | ("@=<", 2)
            | ("@>=", 2)
            | ("var", 1)
            | ("nonvar", 1)
            | ("atom", 1)
            | ("atomic", 1)
            | ("number", 1)
            | ("integer", 1)
            | ("float", 1)
            | ("compound", 1)
            | ("callable", 1)
            | ("is_list", 1)
            | ("ground", 1)
            | ("\\=", 2)
    )
}

/// The complementary test for a comparison or type check, when one exists.
pub fn negated_test(name: &str, arity: usize) -> Option<&'static str> {
    Some(match (name, arity) {
        ("==", 2) => "\\==",
        ("\\==", 2) => "==",
        ("=:=", 2) => "=\\=",
        ("=\\=", 2) => "=:=",
        ("<", 2) => ">=",
        (">=", 2) => "<",
        (">", 2) => "=<",
        ("=<", 2) => ">",
        ("@<", 2) => "@>=",
        ("@>=", 2) => "@<",
        ("@>", 2) => "@=<",
        ("@=<", 2) => "@>",
        ("var", 1) => "nonvar",
        ("nonvar", 1) => "var",
        ("true", 0) => "fail",
        ("fail", 0) => "true",
        ("false", 0) => "true",
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negation_is_an_involution_on_comparisons() {
        for op in ["==", "\\==", "=:=", "=\\=", "<", ">=", ">", "=<", "@<", "@>="] {
            let n = negated_test(op, 2).unwrap();
            assert_eq!(negated_test(n, 2), Some(op));
        }
    }

    #[test]
    fn unification_and_is_are_not_tests() {
        assert!(!is_binding_free_test("=", 2));
        assert!(!is_binding_free_test("is", 2));
        assert!(is_builtin("read", 2));
        assert!(is_builtin("stream_position", 2));
        assert!(is_control("!", 0));
    }
}
