use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::frac::AtomNode;

/// Jet and auxiliary coordinates. The declaration order is the global
/// coordinate order used for wedge signs and monomial ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Var {
    X,
    Y,
    P,
    Q,
    U,
    C1,
    C2,
    C3,
}

impl Var {
    pub const ALL: [Var; 8] = [Var::X, Var::Y, Var::P, Var::Q, Var::U, Var::C1, Var::C2, Var::C3];
    /// The jet coordinates of J², in order.
    pub const JET: [Var; 4] = [Var::X, Var::Y, Var::P, Var::Q];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::P => "p",
            Var::Q => "q",
            Var::U => "u",
            Var::C1 => "c1",
            Var::C2 => "c2",
            Var::C3 => "c3",
        }
    }

    pub fn from_name(s: &str) -> Option<Var> {
        Var::ALL.iter().copied().find(|v| v.name() == s)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// FNV-1a, used for atom ordering so that output is stable across runs and toolchains.
pub(crate) struct Fnv(u64);

impl Default for Fnv {
    fn default() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
}

impl Hasher for Fnv {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
}

/// An opaque kernel (radical or elementary function application).
#[derive(Clone)]
pub struct Atom(pub(crate) Arc<AtomNode>);

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.hash == other.0.hash && self.0.kind == other.0.kind)
    }
}
impl Eq for Atom {}

impl Hash for Atom {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0
            .depth
            .cmp(&other.0.depth)
            .then(self.0.hash.cmp(&other.0.hash))
            .then_with(|| self.0.kind.cmp(&other.0.kind))
    }
}
impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.kind)
    }
}

/// Polynomial generator: variables first, then parameters, then atoms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Gen {
    Var(Var),
    Param(Arc<str>),
    Atom(Atom),
}

impl Gen {
    pub(crate) fn depth(&self) -> u32 {
        match self {
            Gen::Atom(a) => a.0.depth,
            _ => 0,
        }
    }
}
