//! Greedy, no-back-tracking forwarding for each geometry.
//!
//! Every hop must strictly decrease the geometry's distance to the
//! destination, so a route can never revisit a node. A route that meets a
//! node with no live, strictly-closer neighbour is dropped.

use serde::Serialize;

use super::failure::FailurePattern;
use super::overlay::Overlay;
use crate::error::{RcmError, Result};
use crate::geometry::GeometryKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// No live neighbour makes progress.
    DeadEnd,
    /// Aborted after `4 N` hops.
    HopCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RouteOutcome {
    Delivered { hops: u32 },
    Failed { reason: FailureReason, hops: u32 },
}

impl RouteOutcome {
    pub fn is_delivered(&self) -> bool {
        matches!(self, RouteOutcome::Delivered { .. })
    }
}

/// Routes one message from `src` to `dst` over live nodes only.
pub fn route(overlay: &Overlay, pattern: &FailurePattern, src: u32, dst: u32) -> Result<RouteOutcome> {
    let n = overlay.node_count();
    if pattern.len() != n as usize {
        return Err(RcmError::InvalidRoute(format!(
            "failure pattern covers {} nodes, overlay has {n}",
            pattern.len()
        )));
    }
    if src >= n || dst >= n {
        return Err(RcmError::InvalidRoute(format!("endpoint outside 0..{n}")));
    }
    if src == dst {
        return Err(RcmError::InvalidRoute("source equals destination".into()));
    }
    if !pattern.is_alive(src) || !pattern.is_alive(dst) {
        return Err(RcmError::InvalidRoute("endpoints must be alive".into()));
    }

    let d = overlay.spec().d();
    let mask = n - 1;
    let hop_cap = 4 * n;
    let step: fn(&Overlay, &FailurePattern, u32, u32, u32, u32) -> Option<u32> =
        match overlay.spec().kind() {
            GeometryKind::Tree => tree_step,
            GeometryKind::Hypercube => hypercube_step,
            GeometryKind::Xor => xor_step,
            GeometryKind::Ring | GeometryKind::Symphony => clockwise_step,
        };

    let mut current = src;
    let mut hops = 0;
    while current != dst {
        if hops >= hop_cap {
            return Ok(RouteOutcome::Failed {
                reason: FailureReason::HopCap,
                hops,
            });
        }
        match step(overlay, pattern, current, dst, d, mask) {
            Some(next) => {
                current = next;
                hops += 1;
            }
            None => {
                return Ok(RouteOutcome::Failed {
                    reason: FailureReason::DeadEnd,
                    hops,
                })
            }
        }
    }
    Ok(RouteOutcome::Delivered { hops })
}

/// 1-based index of the leftmost bit where `a` and `b` differ.
fn leftmost_difference(a: u32, b: u32, d: u32) -> u32 {
    d - (31 - (a ^ b).leading_zeros())
}

/// Only the entry correcting the leftmost differing bit may be used.
fn tree_step(o: &Overlay, p: &FailurePattern, cur: u32, dst: u32, d: u32, _: u32) -> Option<u32> {
    let i = leftmost_difference(cur, dst, d);
    let next = o.neighbors(cur)[i as usize - 1];
    p.is_alive(next).then_some(next)
}

/// Any live neighbour across a differing dimension; lowest index first.
fn hypercube_step(o: &Overlay, p: &FailurePattern, cur: u32, dst: u32, d: u32, _: u32) -> Option<u32> {
    let diff = cur ^ dst;
    o.neighbors(cur)
        .iter()
        .enumerate()
        .find(|&(slot, &u)| diff >> (d - 1 - slot as u32) & 1 == 1 && p.is_alive(u))
        .map(|(_, &u)| u)
}

/// Live neighbour with the smallest XOR distance, if strictly closer.
fn xor_step(o: &Overlay, p: &FailurePattern, cur: u32, dst: u32, _: u32, _: u32) -> Option<u32> {
    let mut best = cur ^ dst;
    let mut next = None;
    for &u in o.neighbors(cur) {
        let dist = u ^ dst;
        if dist < best && p.is_alive(u) {
            best = dist;
            next = Some(u);
        }
    }
    next
}

/// Live link landing closest to `dst` without passing it, clockwise.
fn clockwise_step(o: &Overlay, p: &FailurePattern, cur: u32, dst: u32, _: u32, mask: u32) -> Option<u32> {
    let remaining = dst.wrapping_sub(cur) & mask;
    let mut best = remaining;
    let mut next = None;
    for &u in o.neighbors(cur) {
        let offset = u.wrapping_sub(cur) & mask;
        if offset == 0 || offset > remaining {
            continue;
        }
        let left = remaining - offset;
        if left < best && p.is_alive(u) {
            best = left;
            next = Some(u);
        }
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometrySpec;
    use crate::sim::overlay::build_overlay;

    #[test]
    fn xor_detour_around_dead_bucket() {
        // 010 -> 101 with 111 dead: 010 -> 000 -> 110 -> 100 -> 101.
        let spec = GeometrySpec::xor(3).unwrap();
        let mut rows = vec![vec![0u32; 3]; 8];
        rows[0b010] = vec![0b111, 0b000, 0b011];
        rows[0b000] = vec![0b110, 0b011, 0b001];
        rows[0b110] = vec![0b001, 0b100, 0b111];
        rows[0b100] = vec![0b010, 0b110, 0b101];
        // Remaining rows only need to be structurally valid.
        rows[0b001] = vec![0b100, 0b011, 0b000];
        rows[0b011] = vec![0b111, 0b001, 0b010];
        rows[0b101] = vec![0b000, 0b110, 0b100];
        rows[0b111] = vec![0b000, 0b101, 0b110];
        let overlay = Overlay::from_rows(spec, rows).unwrap();
        overlay.validate().unwrap();
        let pattern = FailurePattern::with_dead(8, &[0b111]).unwrap();
        assert_eq!(
            route(&overlay, &pattern, 0b010, 0b101).unwrap(),
            RouteOutcome::Delivered { hops: 4 }
        );
        // 011 is still strictly closer (110 < 111): 010 -> 011 -> 001 -> 100 -> 101.
        let pattern = FailurePattern::with_dead(8, &[0b111, 0b000]).unwrap();
        assert_eq!(
            route(&overlay, &pattern, 0b010, 0b101).unwrap(),
            RouteOutcome::Delivered { hops: 4 }
        );
        let pattern = FailurePattern::with_dead(8, &[0b111, 0b000, 0b011]).unwrap();
        assert_eq!(
            route(&overlay, &pattern, 0b010, 0b101).unwrap(),
            RouteOutcome::Failed {
                reason: FailureReason::DeadEnd,
                hops: 0
            }
        );
    }

    #[test]
    fn tree_drops_on_dead_prefix_hop() {
        let spec = GeometrySpec::tree(3).unwrap();
        let overlay = build_overlay(&spec, 1).unwrap();
        let next = overlay.neighbors(0b000)[0];
        if next == 0b111 {
            return;
        }
        let pattern = FailurePattern::with_dead(8, &[next]).unwrap();
        let out = route(&overlay, &pattern, 0b000, 0b111).unwrap();
        assert_eq!(
            out,
            RouteOutcome::Failed {
                reason: FailureReason::DeadEnd,
                hops: 0
            }
        );
    }

    #[test]
    fn hypercube_routes_around_failures() {
        let spec = GeometrySpec::hypercube(3).unwrap();
        let overlay = build_overlay(&spec, 0).unwrap();
        // 011 -> 100: 111 dead, so correct bit 2 first (011 -> 001).
        let pattern = FailurePattern::with_dead(8, &[0b111]).unwrap();
        assert_eq!(
            route(&overlay, &pattern, 0b011, 0b100).unwrap(),
            RouteOutcome::Delivered { hops: 3 }
        );
        // All three first hops dead.
        let pattern = FailurePattern::with_dead(8, &[0b111, 0b001, 0b010]).unwrap();
        assert!(!route(&overlay, &pattern, 0b011, 0b100).unwrap().is_delivered());
    }

    #[test]
    fn ring_never_overshoots() {
        let spec = GeometrySpec::ring(4).unwrap();
        let overlay = build_overlay(&spec, 3).unwrap();
        let all = FailurePattern::all_alive(16);
        for src in 0..16 {
            for dst in 0..16 {
                if src == dst {
                    continue;
                }
                let out = route(&overlay, &all, src, dst).unwrap();
                assert!(out.is_delivered());
            }
        }
        // Only the successor survives around node 0: must walk 1 step at a time.
        let dead: Vec<u32> = overlay.neighbors(0)[1..].to_vec();
        let pattern = FailurePattern::with_dead(16, &dead).unwrap();
        let out = route(&overlay, &pattern, 0, 1).unwrap();
        assert_eq!(out, RouteOutcome::Delivered { hops: 1 });
    }

    #[test]
    fn zero_failure_all_pairs_deliver() {
        for kind in GeometryKind::ALL {
            let spec = GeometrySpec::new(kind, 6).unwrap();
            let overlay = build_overlay(&spec, 17).unwrap();
            let all = FailurePattern::all_alive(64);
            for src in 0..64 {
                for dst in 0..64 {
                    if src != dst {
                        let out = route(&overlay, &all, src, dst).unwrap();
                        assert!(out.is_delivered(), "{kind} {src}->{dst}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let spec = GeometrySpec::ring(3).unwrap();
        let overlay = build_overlay(&spec, 0).unwrap();
        let all = FailurePattern::all_alive(8);
        assert!(route(&overlay, &all, 2, 2).is_err());
        assert!(route(&overlay, &all, 2, 9).is_err());
        let pattern = FailurePattern::with_dead(8, &[5]).unwrap();
        assert!(route(&overlay, &pattern, 2, 5).is_err());
        assert!(route(&overlay, &FailurePattern::all_alive(4), 0, 1).is_err());
    }
}
