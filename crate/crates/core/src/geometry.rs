//! Routing geometries and their parameters.
//!
//! Identifiers are binary strings of length `d`, so a fully populated
//! overlay holds `N = 2^d` nodes. Bits are numbered `1..=d` from the most
//! significant end.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{RcmError, Result};

/// Largest identifier length the analytic engine accepts. `2^d` must stay a
/// finite `f64`.
pub const MAX_ANALYTIC_D: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    /// Plaxton-style prefix tree: bits corrected strictly left to right.
    Tree,
    /// CAN-style hypercube: any differing bit may be corrected.
    Hypercube,
    /// Kademlia-style XOR metric.
    Xor,
    /// Randomized Chord ring.
    Ring,
    /// Symphony small-world ring.
    Symphony,
}

impl GeometryKind {
    pub const ALL: [GeometryKind; 5] = [
        GeometryKind::Tree,
        GeometryKind::Hypercube,
        GeometryKind::Xor,
        GeometryKind::Ring,
        GeometryKind::Symphony,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeometryKind::Tree => "tree",
            GeometryKind::Hypercube => "hypercube",
            GeometryKind::Xor => "xor",
            GeometryKind::Ring => "ring",
            GeometryKind::Symphony => "symphony",
        }
    }

    /// Whether nodes at routing distance `h` number `C(d, h)` (bit-correcting
    /// geometries) rather than `2^(h-1)` (ring-like geometries).
    pub fn has_binomial_profile(self) -> bool {
        matches!(
            self,
            GeometryKind::Tree | GeometryKind::Hypercube | GeometryKind::Xor
        )
    }
}

impl fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeometryKind {
    type Err = RcmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tree" | "plaxton" => Ok(GeometryKind::Tree),
            "hypercube" | "can" => Ok(GeometryKind::Hypercube),
            "xor" | "kademlia" => Ok(GeometryKind::Xor),
            "ring" | "chord" => Ok(GeometryKind::Ring),
            "symphony" | "small-world" | "smallworld" => Ok(GeometryKind::Symphony),
            other => Err(RcmError::Config(format!("unknown geometry '{other}'"))),
        }
    }
}

/// A routing geometry together with the parameters that shape it.
///
/// `k_n` and `k_s` only matter for [`GeometryKind::Symphony`]; they are kept
/// (and validated) for the other kinds too so a spec can be re-targeted with
/// [`GeometrySpec::with_d`] or compared field-by-field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeometrySpec {
    kind: GeometryKind,
    d: u32,
    k_n: u32,
    k_s: u32,
}

impl GeometrySpec {
    pub fn new(kind: GeometryKind, d: u32) -> Result<Self> {
        Self::with_symphony_degree(kind, d, 1, 1)
    }

    pub fn with_symphony_degree(kind: GeometryKind, d: u32, k_n: u32, k_s: u32) -> Result<Self> {
        if d == 0 || d > MAX_ANALYTIC_D {
            return Err(RcmError::InvalidDimension {
                d,
                max: MAX_ANALYTIC_D,
            });
        }
        if kind == GeometryKind::Symphony && (k_n == 0 || k_s == 0) {
            return Err(RcmError::InvalidSymphonyDegree { k_n, k_s });
        }
        Ok(GeometrySpec { kind, d, k_n, k_s })
    }

    pub fn tree(d: u32) -> Result<Self> {
        Self::new(GeometryKind::Tree, d)
    }

    pub fn hypercube(d: u32) -> Result<Self> {
        Self::new(GeometryKind::Hypercube, d)
    }

    pub fn xor(d: u32) -> Result<Self> {
        Self::new(GeometryKind::Xor, d)
    }

    pub fn ring(d: u32) -> Result<Self> {
        Self::new(GeometryKind::Ring, d)
    }

    pub fn symphony(d: u32, k_n: u32, k_s: u32) -> Result<Self> {
        Self::with_symphony_degree(GeometryKind::Symphony, d, k_n, k_s)
    }

    /// Same geometry and degree parameters at a different identifier length.
    pub fn with_d(&self, d: u32) -> Result<Self> {
        Self::with_symphony_degree(self.kind, d, self.k_n, self.k_s)
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn k_n(&self) -> u32 {
        self.k_n
    }

    pub fn k_s(&self) -> u32 {
        self.k_s
    }

    /// `N = 2^d` as a float; exact for every accepted `d`.
    pub fn node_count_f64(&self) -> f64 {
        (self.d as f64).exp2()
    }

    /// `N = 2^d` when it fits in a `u64`.
    pub fn node_count(&self) -> Option<u64> {
        1u64.checked_shl(self.d)
    }
}

impl fmt::Display for GeometrySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GeometryKind::Symphony => write!(
                f,
                "symphony(d={}, k_n={}, k_s={})",
                self.d, self.k_n, self.k_s
            ),
            kind => write!(f, "{kind}(d={})", self.d),
        }
    }
}
