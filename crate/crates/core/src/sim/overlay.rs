use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{RcmError, Result};
use crate::geometry::{GeometryKind, GeometrySpec};

/// Largest identifier length the simulator materializes.
pub const MAX_SIM_D: u32 = 20;

/// What a routing-table slot is for. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NeighborRole {
    /// Prefix-table entry `i`: shares bits `1..i-1`, differs at bit `i`.
    Bucket(u32),
    /// Hypercube link across dimension `i`.
    Dimension(u32),
    /// Ring finger `i`, clockwise offset in `[2^(i-1), 2^i)`.
    Finger(u32),
    /// Symphony near neighbour at clockwise offset `i`.
    Near(u32),
    /// Symphony long-range link `i`.
    Shortcut(u32),
}

/// A fully populated overlay: every `d`-bit identifier hosts a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Overlay {
    spec: GeometrySpec,
    degree: usize,
    /// Node-major neighbour table, `degree` entries per node.
    table: Vec<u32>,
    build_seed: u64,
}

impl Overlay {
    /// Wraps a hand-written neighbour table. Rows must have the geometry's
    /// degree and reference existing nodes; geometric invariants are checked
    /// separately by [`Overlay::validate`].
    pub fn from_rows(spec: GeometrySpec, rows: Vec<Vec<u32>>) -> Result<Self> {
        let n = checked_node_count(&spec)?;
        let degree = degree_of(&spec);
        if rows.len() != n as usize {
            return Err(RcmError::MalformedOverlay(format!(
                "expected {n} rows, got {}",
                rows.len()
            )));
        }
        let mut table = Vec::with_capacity(n as usize * degree);
        for (v, row) in rows.into_iter().enumerate() {
            if row.len() != degree {
                return Err(RcmError::MalformedOverlay(format!(
                    "node {v} has {} neighbours, expected {degree}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|&&u| u >= n) {
                return Err(RcmError::MalformedOverlay(format!(
                    "node {v} links to {bad}, outside 0..{n}"
                )));
            }
            table.extend(row);
        }
        Ok(Overlay {
            spec,
            degree,
            table,
            build_seed: 0,
        })
    }

    pub fn spec(&self) -> &GeometrySpec {
        &self.spec
    }

    pub fn node_count(&self) -> u32 {
        (self.table.len() / self.degree) as u32
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn build_seed(&self) -> u64 {
        self.build_seed
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        let start = v as usize * self.degree;
        &self.table[start..start + self.degree]
    }

    pub fn role(&self, slot: usize) -> NeighborRole {
        let i = slot as u32 + 1;
        match self.spec.kind() {
            GeometryKind::Tree | GeometryKind::Xor => NeighborRole::Bucket(i),
            GeometryKind::Hypercube => NeighborRole::Dimension(i),
            GeometryKind::Ring => NeighborRole::Finger(i),
            GeometryKind::Symphony => {
                if i <= self.spec.k_n() {
                    NeighborRole::Near(i)
                } else {
                    NeighborRole::Shortcut(i - self.spec.k_n())
                }
            }
        }
    }

    /// Checks every node's table against the geometry's structural rules.
    pub fn validate(&self) -> Result<()> {
        let d = self.spec.d();
        let n = self.node_count();
        let mask = n - 1;
        for v in 0..n {
            for (slot, &u) in self.neighbors(v).iter().enumerate() {
                let fail = |reason: String| RcmError::OverlayInvariant { node: v, reason };
                let offset = u.wrapping_sub(v) & mask;
                match self.role(slot) {
                    NeighborRole::Bucket(i) => {
                        if (v ^ u) >> (d - i) != 1 {
                            return Err(fail(format!(
                                "bucket {i} neighbour {u} does not first differ at bit {i}"
                            )));
                        }
                    }
                    NeighborRole::Dimension(i) => {
                        if v ^ u != 1 << (d - i) {
                            return Err(fail(format!("dimension {i} neighbour {u} is not one flip away")));
                        }
                    }
                    NeighborRole::Finger(i) => {
                        let lo = 1u64 << (i - 1);
                        let hi = 1u64 << i;
                        if !(lo..hi).contains(&(offset as u64)) {
                            return Err(fail(format!("finger {i} offset {offset} outside [{lo}, {hi})")));
                        }
                    }
                    NeighborRole::Near(i) => {
                        if offset != i & mask {
                            return Err(fail(format!("near neighbour {i} at offset {offset}")));
                        }
                    }
                    NeighborRole::Shortcut(i) => {
                        if offset == 0 {
                            return Err(fail(format!("shortcut {i} points back at its owner")));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn checked_node_count(spec: &GeometrySpec) -> Result<u32> {
    if spec.d() > MAX_SIM_D {
        return Err(RcmError::SimulationTooLarge {
            d: spec.d(),
            max: MAX_SIM_D,
        });
    }
    Ok(1u32 << spec.d())
}

fn degree_of(spec: &GeometrySpec) -> usize {
    match spec.kind() {
        GeometryKind::Symphony => (spec.k_n() + spec.k_s()) as usize,
        _ => spec.d() as usize,
    }
}

/// Materializes the overlay for `spec`. Randomized choices (prefix-table
/// suffixes, finger offsets, shortcut lengths) are drawn from `build_seed`.
pub fn build_overlay(spec: &GeometrySpec, build_seed: u64) -> Result<Overlay> {
    let n = checked_node_count(spec)?;
    let d = spec.d();
    let mask = n - 1;
    if spec.kind() == GeometryKind::Symphony && spec.k_n() >= n {
        return Err(RcmError::TooManyNearNeighbors {
            kind: spec.kind(),
            nodes: n as u64,
            k_n: spec.k_n(),
        });
    }
    let degree = degree_of(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(build_seed);
    let mut table = Vec::with_capacity(n as usize * degree);

    for v in 0..n {
        match spec.kind() {
            GeometryKind::Tree | GeometryKind::Xor => {
                for i in 1..=d {
                    let bit = d - i;
                    let low = (1u32 << bit) - 1;
                    let prefix = (v ^ (1 << bit)) & !low;
                    let suffix = if bit == 0 { 0 } else { rng.gen::<u32>() & low };
                    table.push(prefix | suffix);
                }
            }
            GeometryKind::Hypercube => {
                table.extend((1..=d).map(|i| v ^ (1 << (d - i))));
            }
            GeometryKind::Ring => {
                for i in 1..=d {
                    let offset = rng.gen_range((1u32 << (i - 1))..=((1u32 << i) - 1));
                    table.push(v.wrapping_add(offset) & mask);
                }
            }
            GeometryKind::Symphony => {
                table.extend((1..=spec.k_n()).map(|j| v.wrapping_add(j) & mask));
                for _ in 0..spec.k_s() {
                    let length = harmonic_length(&mut rng, d);
                    table.push(v.wrapping_add(length) & mask);
                }
            }
        }
    }

    Ok(Overlay {
        spec: *spec,
        degree,
        table,
        build_seed,
    })
}

/// `floor(N^u)` for `u ~ U[0, 1)`, clamped to `[1, N-1]`: each scale
/// `[2^j, 2^(j+1))` is hit with probability `1/d`.
fn harmonic_length<R: Rng>(rng: &mut R, d: u32) -> u32 {
    let u: f64 = rng.gen();
    let max = (1u32 << d) - 1;
    ((d as f64 * u).exp2().floor() as u32).clamp(1, max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercube_root_neighbours() {
        let o = build_overlay(&GeometrySpec::hypercube(3).unwrap(), 0).unwrap();
        let mut got = o.neighbors(0b011).to_vec();
        got.sort_unstable();
        assert_eq!(got, vec![0b001, 0b010, 0b111]);
    }

    #[test]
    fn first_finger_is_successor() {
        for seed in 0..20 {
            let o = build_overlay(&GeometrySpec::ring(3).unwrap(), seed).unwrap();
            assert_eq!(o.neighbors(0)[0], 1);
            assert_eq!(o.role(0), NeighborRole::Finger(1));
        }
    }

    #[test]
    fn xor_buckets_flip_their_bit() {
        let o = build_overlay(&GeometrySpec::xor(10).unwrap(), 7).unwrap();
        for v in 0..o.node_count() {
            let first = o.neighbors(v)[0];
            assert_eq!((v ^ first) >> 9, 1, "node {v}");
        }
        o.validate().unwrap();
    }

    #[test]
    fn all_geometries_validate() {
        for kind in GeometryKind::ALL {
            for d in [1u32, 2, 5, 10] {
                let spec = GeometrySpec::new(kind, d).unwrap();
                let o = build_overlay(&spec, 99).unwrap();
                assert_eq!(o.node_count(), 1 << d);
                o.validate().unwrap_or_else(|e| panic!("{kind} d={d}: {e}"));
            }
        }
        let spec = GeometrySpec::symphony(10, 3, 4).unwrap();
        let o = build_overlay(&spec, 5).unwrap();
        assert_eq!(o.degree(), 7);
        assert_eq!(o.role(2), NeighborRole::Near(3));
        assert_eq!(o.role(3), NeighborRole::Shortcut(1));
        o.validate().unwrap();
    }

    #[test]
    fn build_is_seed_deterministic() {
        let spec = GeometrySpec::symphony(12, 1, 2).unwrap();
        assert_eq!(build_overlay(&spec, 3).unwrap(), build_overlay(&spec, 3).unwrap());
        assert_ne!(build_overlay(&spec, 3).unwrap(), build_overlay(&spec, 4).unwrap());
    }

    #[test]
    fn rejects_large_overlays() {
        let spec = GeometrySpec::ring(21).unwrap();
        assert!(matches!(
            build_overlay(&spec, 0),
            Err(RcmError::SimulationTooLarge { d: 21, .. })
        ));
    }

    #[test]
    fn rejects_near_set_larger_than_ring() {
        let spec = GeometrySpec::symphony(2, 4, 1).unwrap();
        assert!(matches!(
            build_overlay(&spec, 0),
            Err(RcmError::TooManyNearNeighbors { .. })
        ));
    }

    #[test]
    fn validate_catches_bad_bucket() {
        let spec = GeometrySpec::xor(2).unwrap();
        // node 0's bucket-1 entry must start with 1
        let rows = vec![vec![1, 1], vec![2, 0], vec![0, 3], vec![1, 2]];
        let o = Overlay::from_rows(spec, rows).unwrap();
        assert!(matches!(o.validate(), Err(RcmError::OverlayInvariant { node: 0, .. })));
    }

    #[test]
    fn harmonic_lengths_cover_every_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = 12;
        let mut per_scale = [0u32; 12];
        let draws = 120_000;
        for _ in 0..draws {
            let l = harmonic_length(&mut rng, d);
            assert!((1..4096).contains(&l));
            per_scale[31 - l.leading_zeros() as usize] += 1;
        }
        // 1/d per scale; 10000 expected, sd ~ 96
        for (j, &c) in per_scale.iter().enumerate() {
            assert!((c as i64 - 10_000).abs() < 600, "scale {j}: {c}");
        }
    }
}
