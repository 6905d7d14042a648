use std::fmt;

use crate::encoder::Lit;

pub(super) type Var = u32;

/// Packed literal: `var << 1 | negated`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(super) struct L(pub u32);

impl L {
    #[inline]
    pub fn new(var: Var, positive: bool) -> Self {
        L(var << 1 | u32::from(!positive))
    }

    #[inline]
    pub fn var(self) -> Var {
        self.0 >> 1
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for L {
    type Output = L;

    #[inline]
    fn not(self) -> L {
        L(self.0 ^ 1)
    }
}

impl From<Lit> for L {
    fn from(l: Lit) -> Self {
        L::new(l.var as Var, l.positive)
    }
}

impl fmt::Debug for L {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "{}", self.var())
        } else {
            write!(f, "-{}", self.var())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum LBool {
    False,
    True,
    Undef,
}

impl LBool {
    #[inline]
    pub fn from_bool(b: bool) -> Self {
        if b {
            LBool::True
        } else {
            LBool::False
        }
    }

    #[inline]
    pub fn negate_if(self, flip: bool) -> Self {
        match (self, flip) {
            (LBool::Undef, _) => LBool::Undef,
            (v, false) => v,
            (LBool::True, true) => LBool::False,
            (LBool::False, true) => LBool::True,
        }
    }
}
