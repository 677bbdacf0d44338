//! Refactorings as pure functions from a program snapshot and explicit
//! parameters to an `EditSet`. Nothing here touches the disk.

mod clause;
mod modules;
mod pred;
mod util;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{ArgPos, Location, Suggestion, SuggestionKind};
use crate::edit::EditSet;
use crate::model::Program;

pub use clause::{extract_predicate, invert_ite, output_after_commit, replace_cut_by_ite, unification_to_test};
pub use modules::{
    merge_modules, move_predicate, remove_duplicates, remove_import, rename_module, split_module, DupStrategy,
};
pub use pred::{
    add_argument, hide_predicates, remove_arguments, remove_dead, rename_functor, rename_predicate,
    reorder_arguments,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("name clash: {0}")]
    NameClash(String),
    #[error("selection is not a goal run at conjunction level: {0}")]
    NonContiguousSelection(String),
    #[error("selection contains a cut")]
    CutInSelection,
    #[error("occurrences differ: {0}")]
    OccurrenceMismatch(String),
    #[error("{0} is not exported")]
    NotExported(String),
    #[error("{0} is not dead")]
    NotDead(String),
    #[error("{0} cannot be hidden: {1}")]
    NotHideable(String, String),
    #[error("import cycle would be created: {0}")]
    ImportCycleCreated(String),
    #[error("argument {1} of {0} is not erasable")]
    NotErasable(String, usize),
    #[error("{0} already exists")]
    ArityCollision(String),
    #[error("{name} is a builtin and cannot be renamed; {hint}")]
    RenamesBuiltin { name: String, hint: String },
    #[error("{0} is defined in more than one of the merged modules")]
    DefinitionClash(String),
    #[error("no call path from {0} to {1}")]
    NoPath(String, String),
    #[error("variable {0} does not occur in a clause body of {1}")]
    VariableNotFound(String, String),
    #[error("not a permutation of 1..{0}: {1}")]
    NotAPermutation(usize, String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("{0} has more than one cut")]
    MultipleCuts(String),
    #[error("no if-then-else at {0}")]
    NotAnIte(String),
    #[error("no unification at {0}")]
    NotAUnification(String),
    #[error("no clause of {0} contains a cut")]
    NoCutInClause(String),
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("unknown module {0}")]
    UnknownModule(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
}

impl TransformError {
    pub fn name(&self) -> &'static str {
        match self {
            TransformError::NameClash(_) => "NameClash",
            TransformError::NonContiguousSelection(_) => "NonContiguousSelection",
            TransformError::CutInSelection => "CutInSelection",
            TransformError::OccurrenceMismatch(_) => "OccurrenceMismatch",
            TransformError::NotExported(_) => "NotExported",
            TransformError::NotDead(_) => "NotDead",
            TransformError::NotHideable(..) => "NotHideable",
            TransformError::ImportCycleCreated(_) => "ImportCycleCreated",
            TransformError::NotErasable(..) => "NotErasable",
            TransformError::ArityCollision(_) => "ArityCollision",
            TransformError::RenamesBuiltin { .. } => "RenamesBuiltin",
            TransformError::DefinitionClash(_) => "DefinitionClash",
            TransformError::NoPath(..) => "NoPath",
            TransformError::VariableNotFound(..) => "VariableNotFound",
            TransformError::NotAPermutation(..) => "NotAPermutation",
            TransformError::NotApplicable(_) => "NotApplicable",
            TransformError::MultipleCuts(_) => "MultipleCuts",
            TransformError::NotAnIte(_) => "NotAnIte",
            TransformError::NotAUnification(_) => "NotAUnification",
            TransformError::NoCutInClause(_) => "NoCutInClause",
            TransformError::UnknownPredicate(_) => "UnknownPredicate",
            TransformError::UnknownModule(_) => "UnknownModule",
            TransformError::BadParams(_) => "BadParams",
        }
    }

    /// Parameter problems as opposed to failed refactoring preconditions.
    pub fn is_bad_params(&self) -> bool {
        matches!(self, TransformError::BadParams(_))
    }
}

/// A transform with its parameters, as accepted by the CLI and the service.
/// Predicates are given as indicators (`name/arity` or `module:name/arity`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "transform", rename_all = "snake_case")]
pub enum TransformRequest {
    ExtractPredicate {
        occurrences: Vec<Location>,
        name: String,
        #[serde(default)]
        module: Option<String>,
    },
    HidePredicates {
        targets: Vec<String>,
        #[serde(default)]
        force: bool,
    },
    RemoveDead {
        targets: Vec<String>,
        #[serde(default)]
        force: bool,
    },
    RemoveDuplicates {
        group: Vec<String>,
        strategy: DupStrategy,
    },
    RemoveArguments {
        positions: Vec<ArgPos>,
    },
    RemoveImport {
        location: Location,
    },
    RenamePredicate {
        pred: String,
        new_name: String,
    },
    RenameFunctor {
        functor: String,
        new_name: String,
        #[serde(default)]
        occurrences: Option<Vec<Location>>,
    },
    RenameModule {
        module: String,
        new_name: String,
        #[serde(default)]
        file: Option<String>,
    },
    MergeModules {
        modules: Vec<String>,
        new_name: String,
        file: String,
    },
    SplitModule {
        module: String,
        part_b: Vec<String>,
        name_b: String,
        file_b: String,
    },
    MovePredicate {
        pred: String,
        target: String,
    },
    AddArgument {
        caller: String,
        callee: String,
        seed: String,
        #[serde(default)]
        position: Option<usize>,
        #[serde(default)]
        clause: Option<usize>,
    },
    ReorderArguments {
        pred: String,
        permutation: Vec<usize>,
    },
    ReplaceCutByIte {
        pred: String,
    },
    InvertIte {
        location: Location,
    },
    UnificationToTest {
        location: Location,
        #[serde(default = "default_test")]
        test: String,
    },
    OutputAfterCommit {
        pred: String,
        positions: Vec<usize>,
    },
}

fn default_test() -> String {
    "==".into()
}

impl TransformRequest {
    pub fn name(&self) -> &'static str {
        match self {
            TransformRequest::ExtractPredicate { .. } => "extract_predicate",
            TransformRequest::HidePredicates { .. } => "hide_predicates",
            TransformRequest::RemoveDead { .. } => "remove_dead",
            TransformRequest::RemoveDuplicates { .. } => "remove_duplicates",
            TransformRequest::RemoveArguments { .. } => "remove_arguments",
            TransformRequest::RemoveImport { .. } => "remove_import",
            TransformRequest::RenamePredicate { .. } => "rename_predicate",
            TransformRequest::RenameFunctor { .. } => "rename_functor",
            TransformRequest::RenameModule { .. } => "rename_module",
            TransformRequest::MergeModules { .. } => "merge_modules",
            TransformRequest::SplitModule { .. } => "split_module",
            TransformRequest::MovePredicate { .. } => "move_predicate",
            TransformRequest::AddArgument { .. } => "add_argument",
            TransformRequest::ReorderArguments { .. } => "reorder_arguments",
            TransformRequest::ReplaceCutByIte { .. } => "replace_cut_by_ite",
            TransformRequest::InvertIte { .. } => "invert_ite",
            TransformRequest::UnificationToTest { .. } => "unification_to_test",
            TransformRequest::OutputAfterCommit { .. } => "output_after_commit",
        }
    }
}

/// Runs a transform request against a program.
pub fn run(program: &Program, req: &TransformRequest) -> Result<EditSet, TransformError> {
    use util::find_pred;
    match req {
        TransformRequest::ExtractPredicate {
            occurrences,
            name,
            module,
        } => extract_predicate(program, occurrences, name, module.as_deref()),
        TransformRequest::HidePredicates { targets, force } => {
            let ids = targets.iter().map(|t| find_pred(program, t)).collect::<Result<Vec<_>, _>>()?;
            hide_predicates(program, &ids, *force)
        }
        TransformRequest::RemoveDead { targets, force } => {
            let ids = targets.iter().map(|t| find_pred(program, t)).collect::<Result<Vec<_>, _>>()?;
            remove_dead(program, &ids, *force)
        }
        TransformRequest::RemoveDuplicates { group, strategy } => {
            let ids = group.iter().map(|t| find_pred(program, t)).collect::<Result<Vec<_>, _>>()?;
            remove_duplicates(program, &ids, strategy)
        }
        TransformRequest::RemoveArguments { positions } => {
            let set: BTreeSet<ArgPos> = positions.iter().cloned().collect();
            remove_arguments(program, &set)
        }
        TransformRequest::RemoveImport { location } => remove_import(program, location),
        TransformRequest::RenamePredicate { pred, new_name } => {
            let id = match find_pred(program, pred) {
                Ok(id) => id,
                Err(e) => return Err(pred::builtin_rename_error(pred).unwrap_or(e)),
            };
            rename_predicate(program, &id, new_name)
        }
        TransformRequest::RenameFunctor {
            functor,
            new_name,
            occurrences,
        } => {
            let ind = crate::model::Indicator::parse(functor).map_err(TransformError::BadParams)?;
            rename_functor(program, &ind.name, ind.arity, new_name, occurrences.as_deref())
        }
        TransformRequest::RenameModule { module, new_name, file } => {
            rename_module(program, module, new_name, file.as_deref())
        }
        TransformRequest::MergeModules { modules, new_name, file } => {
            merge_modules(program, modules, new_name, file)
        }
        TransformRequest::SplitModule {
            module,
            part_b,
            name_b,
            file_b,
        } => {
            let ids = part_b.iter().map(|t| find_pred(program, t)).collect::<Result<Vec<_>, _>>()?;
            split_module(program, module, &ids, name_b, file_b)
        }
        TransformRequest::MovePredicate { pred, target } => {
            move_predicate(program, &find_pred(program, pred)?, target)
        }
        TransformRequest::AddArgument {
            caller,
            callee,
            seed,
            position,
            clause,
        } => add_argument(
            program,
            &find_pred(program, caller)?,
            &find_pred(program, callee)?,
            seed,
            *position,
            *clause,
        ),
        TransformRequest::ReorderArguments { pred, permutation } => {
            reorder_arguments(program, &find_pred(program, pred)?, permutation)
        }
        TransformRequest::ReplaceCutByIte { pred } => replace_cut_by_ite(program, &find_pred(program, pred)?),
        TransformRequest::InvertIte { location } => invert_ite(program, location),
        TransformRequest::UnificationToTest { location, test } => unification_to_test(program, location, test),
        TransformRequest::OutputAfterCommit { pred, positions } => {
            output_after_commit(program, &find_pred(program, pred)?, positions)
        }
    }
}

/// The transform that carries out a suggestion, with default choices
/// (first member kept, proposed names).
pub fn from_suggestion(s: &Suggestion) -> Option<TransformRequest> {
    let pl = &s.payload;
    let pred_of = |v: &serde_json::Value| -> Option<String> {
        let id: crate::model::PredId = serde_json::from_value(v.clone()).ok()?;
        Some(id.to_string())
    };
    Some(match s.kind {
        SuggestionKind::DeadCode => TransformRequest::RemoveDead {
            targets: vec![pred_of(&pl["pred"])?],
            force: false,
        },
        SuggestionKind::DuplicateGroup => {
            let members: Vec<String> = pl["members"].as_array()?.iter().filter_map(pred_of).collect();
            TransformRequest::RemoveDuplicates {
                strategy: DupStrategy::Keep {
                    keep: members.first()?.clone(),
                },
                group: members,
            }
        }
        SuggestionKind::CommonSequence => {
            let occurrences = pl["occurrences"]
                .as_array()?
                .iter()
                .map(|o| {
                    Some(Location {
                        file: o["file"].as_str()?.to_string(),
                        start: o["start"].as_u64()? as usize,
                        end: o["end"].as_u64()? as usize,
                    })
                })
                .collect::<Option<Vec<_>>>()?;
            TransformRequest::ExtractPredicate {
                occurrences,
                name: pl["proposed_name"].as_str()?.to_string(),
                module: None,
            }
        }
        SuggestionKind::RedundantArgs => {
            let pred: crate::model::PredId = serde_json::from_value(pl["pred"].clone()).ok()?;
            let positions = pl["positions"]
                .as_array()?
                .iter()
                .map(|i| {
                    Some(ArgPos {
                        pred: pred.clone(),
                        index: i.as_u64()? as usize,
                    })
                })
                .collect::<Option<Vec<_>>>()?;
            TransformRequest::RemoveArguments { positions }
        }
        SuggestionKind::UnusedImport => TransformRequest::RemoveImport {
            location: s.span.clone()?,
        },
        SuggestionKind::HideableExport => TransformRequest::HidePredicates {
            targets: vec![pred_of(&pl["pred"])?],
            force: false,
        },
        SuggestionKind::CutReplaceable => TransformRequest::ReplaceCutByIte {
            pred: pred_of(&pl["pred"])?,
        },
        SuggestionKind::UnificationAsTest => TransformRequest::UnificationToTest {
            location: s.span.clone()?,
            test: default_test(),
        },
        SuggestionKind::OutputBeforeCommit => TransformRequest::OutputAfterCommit {
            pred: pred_of(&pl["pred"])?,
            positions: pl["positions"]
                .as_array()?
                .iter()
                .map(|v| v.as_u64().map(|x| x as usize))
                .collect::<Option<Vec<_>>>()?,
        },
        SuggestionKind::InvertibleIte => TransformRequest::InvertIte {
            location: s.span.clone()?,
        },
    })
}
