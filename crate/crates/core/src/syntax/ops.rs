use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpType {
    Xfx,
    Xfy,
    Yfx,
    Fy,
    Fx,
    Xf,
    Yf,
}

impl OpType {
    pub fn is_prefix(self) -> bool {
        matches!(self, OpType::Fy | OpType::Fx)
    }

    pub fn is_infix(self) -> bool {
        matches!(self, OpType::Xfx | OpType::Xfy | OpType::Yfx)
    }

    pub fn is_postfix(self) -> bool {
        matches!(self, OpType::Xf | OpType::Yf)
    }
}

impl FromStr for OpType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "xfx" => OpType::Xfx,
            "xfy" => OpType::Xfy,
            "yfx" => OpType::Yfx,
            "fy" => OpType::Fy,
            "fx" => OpType::Fx,
            "xf" => OpType::Xf,
            "yf" => OpType::Yf,
            _ => return Err(()),
        })
    }
}

impl fmt::Display for OpType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OpType::Xfx => "xfx",
            OpType::Xfy => "xfy",
            OpType::Yfx => "yfx",
            OpType::Fy => "fy",
            OpType::Fx => "fx",
            OpType::Xf => "xf",
            OpType::Yf => "yf",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpDef {
    pub priority: u16,
    pub kind: OpType,
}

impl OpDef {
    /// Maximum priorities of the (left, right) operands of an infix operator.
    pub fn infix_arg_priorities(self) -> (u16, u16) {
        let p = self.priority;
        match self.kind {
            OpType::Xfx => (p - 1, p - 1),
            OpType::Xfy => (p - 1, p),
            OpType::Yfx => (p, p - 1),
            _ => unreachable!("not an infix operator"),
        }
    }

    pub fn prefix_arg_priority(self) -> u16 {
        match self.kind {
            OpType::Fy => self.priority,
            _ => self.priority - 1,
        }
    }

    pub fn postfix_arg_priority(self) -> u16 {
        match self.kind {
            OpType::Yf => self.priority,
            _ => self.priority - 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct OpSlots {
    prefix: Option<OpDef>,
    infix: Option<OpDef>,
    postfix: Option<OpDef>,
}

/// Operator definitions, keyed by name. Prefix, infix and postfix
/// definitions of one name coexist.
#[derive(Debug, Clone)]
pub struct OperatorTable {
    ops: HashMap<String, OpSlots>,
}

const ISO_OPS: &[(u16, OpType, &[&str])] = &[
    (1200, OpType::Xfx, &[":-", "-->"]),
    (1200, OpType::Fx, &[":-", "?-"]),
    (1100, OpType::Xfy, &[";"]),
    (1105, OpType::Xfy, &["|"]),
    (1050, OpType::Xfy, &["->", "*->"]),
    (1000, OpType::Xfy, &[","]),
    (990, OpType::Xfx, &[":="]),
    (900, OpType::Fy, &["\\+"]),
    (
        700,
        OpType::Xfx,
        &[
            "=", "\\=", "==", "\\==", "@<", "@>", "@=<", "@>=", "=..", "is", "=:=", "=\\=", "<",
            ">", "=<", ">=", ">:<", ":<", "as",
        ],
    ),
    (600, OpType::Xfy, &[":"]),
    (500, OpType::Yfx, &["+", "-", "/\\", "\\/", "xor"]),
    (400, OpType::Yfx, &["*", "/", "//", "rem", "mod", "div", "<<", ">>", "divmod", "rdiv"]),
    (200, OpType::Xfx, &["**"]),
    (200, OpType::Xfy, &["^"]),
    (200, OpType::Fy, &["-", "+", "\\"]),
    (1150, OpType::Fx, &["dynamic", "discontiguous", "initialization", "meta_predicate", "module_transparent", "multifile", "public", "table"]),
];

impl Default for OperatorTable {
    fn default() -> Self {
        let mut t = OperatorTable {
            ops: HashMap::new(),
        };
        for (p, k, names) in ISO_OPS {
            for n in names.iter() {
                t.add(n, *p, *k);
            }
        }
        t
    }
}

impl OperatorTable {
    pub fn empty() -> Self {
        OperatorTable {
            ops: HashMap::new(),
        }
    }

    /// Adds or replaces a definition; priority 0 removes it (as `op/3` does).
    pub fn add(&mut self, name: &str, priority: u16, kind: OpType) {
        let slots = self.ops.entry(name.to_string()).or_default();
        let def = (priority > 0).then_some(OpDef { priority, kind });
        if kind.is_prefix() {
            slots.prefix = def;
        } else if kind.is_infix() {
            slots.infix = def;
        } else {
            slots.postfix = def;
        }
    }

    pub fn prefix(&self, name: &str) -> Option<OpDef> {
        self.ops.get(name).and_then(|s| s.prefix)
    }

    pub fn infix(&self, name: &str) -> Option<OpDef> {
        self.ops.get(name).and_then(|s| s.infix)
    }

    pub fn postfix(&self, name: &str) -> Option<OpDef> {
        self.ops.get(name).and_then(|s| s.postfix)
    }

    pub fn is_op(&self, name: &str) -> bool {
        self.ops
            .get(name)
            .is_some_and(|s| s.prefix.is_some() || s.infix.is_some() || s.postfix.is_some())
    }
}
