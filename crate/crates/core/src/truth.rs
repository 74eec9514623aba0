//! Three-valued verdicts for relations that finite data can only approximate.

use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    Holds,
    Fails,
    Unknown,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::Holds
        } else {
            Truth::Fails
        }
    }

    /// Kleene conjunction: any `Fails` wins, then any `Unknown`.
    pub fn and(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::Fails, _) | (_, Truth::Fails) => Truth::Fails,
            (Truth::Holds, Truth::Holds) => Truth::Holds,
            _ => Truth::Unknown,
        }
    }

    pub fn or(self, other: Truth) -> Truth {
        !((!self).and(!other))
    }

    pub fn is_decisive(self) -> bool {
        self != Truth::Unknown
    }
}

impl Not for Truth {
    type Output = Truth;
    fn not(self) -> Truth {
        match self {
            Truth::Holds => Truth::Fails,
            Truth::Fails => Truth::Holds,
            Truth::Unknown => Truth::Unknown,
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::Holds => "holds",
            Truth::Fails => "fails",
            Truth::Unknown => "unknown",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::Truth::*;

    #[test]
    fn kleene_tables() {
        assert_eq!(Holds.and(Holds), Holds);
        assert_eq!(Holds.and(Unknown), Unknown);
        assert_eq!(Unknown.and(Fails), Fails);
        assert_eq!(Fails.or(Unknown), Unknown);
        assert_eq!(Fails.or(Holds), Holds);
        assert_eq!(!Unknown, Unknown);
    }
}
