use serde::Serialize;

use crate::geometry::GeometrySpec;

/// Profiles up to this identifier length are kept as exact integer counts.
pub const EXACT_PROFILE_MAX_D: u32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "form", content = "values", rename_all = "lowercase")]
pub enum ProfileCounts {
    /// `n(1..=d)` as node counts.
    Exact(Vec<u64>),
    /// `n(1..=d) / 2^d`.
    Normalized(Vec<f64>),
}

/// Number of nodes at each routing distance `h = 1..=d` from a root node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceProfile {
    d: u32,
    counts: ProfileCounts,
}

impl DistanceProfile {
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn counts(&self) -> &ProfileCounts {
        &self.counts
    }

    pub fn is_normalized(&self) -> bool {
        matches!(self.counts, ProfileCounts::Normalized(_))
    }

    pub fn exact_counts(&self) -> Option<&[u64]> {
        match &self.counts {
            ProfileCounts::Exact(c) => Some(c),
            ProfileCounts::Normalized(_) => None,
        }
    }

    /// `n(h)` in the profile's own units (a count, or a fraction of `2^d`).
    pub fn value(&self, h: u32) -> Option<f64> {
        let idx = (h as usize).checked_sub(1)?;
        match &self.counts {
            ProfileCounts::Exact(c) => c.get(idx).map(|&n| n as f64),
            ProfileCounts::Normalized(w) => w.get(idx).copied(),
        }
    }

    /// Values `n(1..=d)` in the profile's own units.
    pub fn values(&self) -> Vec<f64> {
        match &self.counts {
            ProfileCounts::Exact(c) => c.iter().map(|&n| n as f64).collect(),
            ProfileCounts::Normalized(w) => w.clone(),
        }
    }

    /// `Σ n(h)`: `2^d - 1` for exact profiles, `1 - 2^-d` for normalized ones.
    pub fn total(&self) -> f64 {
        match &self.counts {
            ProfileCounts::Exact(c) => c.iter().sum::<u64>() as f64,
            ProfileCounts::Normalized(w) => w.iter().sum(),
        }
    }
}

/// `n(h) = C(d, h)` for bit-correcting geometries, `2^(h-1)` for rings.
pub fn distance_profile(spec: &GeometrySpec) -> DistanceProfile {
    let d = spec.d();
    let binomial = spec.kind().has_binomial_profile();
    let counts = if d <= EXACT_PROFILE_MAX_D {
        let counts = if binomial {
            binomial_row(d)
        } else {
            (1..=d).map(|h| 1u64 << (h - 1)).collect()
        };
        ProfileCounts::Exact(counts)
    } else {
        let weights = if binomial {
            normalized_binomial_row(d)
        } else {
            (1..=d).map(|h| (h as f64 - 1.0 - d as f64).exp2()).collect()
        };
        ProfileCounts::Normalized(weights)
    };
    DistanceProfile { d, counts }
}

/// `C(d, 1..=d)`, exact for `d <= 62`.
fn binomial_row(d: u32) -> Vec<u64> {
    let mut row = Vec::with_capacity(d as usize);
    let mut c: u64 = 1;
    for h in 1..=d as u64 {
        // C(d,h) = C(d,h-1) * (d-h+1) / h; the division is exact.
        c = c * (d as u64 - h + 1) / h;
        row.push(c);
    }
    row
}

/// `C(d, h) / 2^d` for `h = 1..=d`.
///
/// The binomial is carried in floating point (finite up to `d = 1029`) and
/// scaled by an exact power of two, so each weight carries only the rounding
/// of the running product.
fn normalized_binomial_row(d: u32) -> Vec<f64> {
    let scale = (-(d as f64)).exp2();
    let mut row = Vec::with_capacity(d as usize);
    let mut c = 1.0f64;
    for h in 1..=d {
        c = c * (d - h + 1) as f64 / h as f64;
        row.push(c * scale);
    }
    row
}
