//! Extended reals `[-inf, +inf]` with Moreau lower and upper additions.
//!
//! IEEE arithmetic yields NaN for `inf - inf`. Convex analysis resolves that
//! case in two ways: the *lower* addition sends it to `-inf` (used inside
//! suprema), the *upper* addition sends it to `+inf` (used inside infima).
//! [`ExtReal`] keeps the infinities as explicit tags so that neither
//! convention is ever left to the floating-point unit.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Serialize};

/// An element of `[-inf, +inf]`. There is no NaN state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

pub use ExtReal::{NegInf, PosInf};

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Builds an extended real from a float. IEEE infinities become the
    /// infinity tags and `-0.0` is folded into `0.0`.
    ///
    /// Panics on NaN.
    pub fn new(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN is not an extended real");
        if x == f64::INFINITY {
            PosInf
        } else if x == f64::NEG_INFINITY {
            NegInf
        } else if x == 0.0 {
            ExtReal::Finite(0.0)
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_pos_inf(self) -> bool {
        matches!(self, PosInf)
    }

    pub fn is_neg_inf(self) -> bool {
        matches!(self, NegInf)
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Converts back to a float, mapping the tags to IEEE infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            PosInf => f64::INFINITY,
        }
    }

    /// Moreau lower addition: `(+inf) + (-inf) = -inf`.
    pub fn lower_add(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (NegInf, _) | (_, NegInf) => NegInf,
            (PosInf, _) | (_, PosInf) => PosInf,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::new(a + b),
        }
    }

    /// Moreau upper addition: `(+inf) + (-inf) = +inf`.
    pub fn upper_add(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::new(a + b),
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }
}

/// Moreau lower addition as a free function.
pub fn lower_add(u: ExtReal, v: ExtReal) -> ExtReal {
    u.lower_add(v)
}

/// Moreau upper addition as a free function.
pub fn upper_add(u: ExtReal, v: ExtReal) -> ExtReal {
    u.upper_add(v)
}

pub fn neg(u: ExtReal) -> ExtReal {
    -u
}

impl Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> ExtReal {
        match self {
            NegInf => PosInf,
            PosInf => NegInf,
            ExtReal::Finite(v) => ExtReal::new(-v),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::new(x)
    }
}

impl PartialEq for ExtReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            // constructors rule out NaN, so the float comparison is total
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b).unwrap(),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegInf => write!(f, "-inf"),
            PosInf => write!(f, "+inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
        }
    }
}

/// Supremum of a sequence; `-inf` for an empty one.
pub fn sup<I: IntoIterator<Item = ExtReal>>(it: I) -> ExtReal {
    it.into_iter().fold(NegInf, ExtReal::max)
}

/// Infimum of a sequence; `+inf` for an empty one.
pub fn inf<I: IntoIterator<Item = ExtReal>>(it: I) -> ExtReal {
    it.into_iter().fold(PosInf, ExtReal::min)
}
