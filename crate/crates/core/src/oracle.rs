//! Brute-force ground truth for small instances.

use crate::colgen::{PricingMethod, PricingResult};
use crate::cost::{design_cost, lru_cost, LruDesign};
use crate::error::{Error, Result};
use crate::instance::{SuccessorSets, SystemInstance};
use crate::sets::{canonical_cmp_sets, VertexSet};

/// Default size limit of [`oracle_optimal_design`].
pub const DESIGN_CAP: usize = 13;
/// Default size limit of [`oracle_price`].
pub const PRICE_CAP: usize = 18;

/// Optimal partition into connected LRUs.
///
/// Partitions are built by repeatedly choosing the block that holds the
/// smallest remaining vertex; results for each remaining set are memoised.
/// Among equal-cost partitions the lexicographically smallest canonical form
/// wins.
pub fn oracle_optimal_design(inst: &SystemInstance, h: &SuccessorSets, cap: usize) -> Result<LruDesign> {
    let n = inst.num_vertices();
    if n > cap || n > 24 {
        return Err(Error::InstanceTooLarge(format!("{n} vertices exceed the oracle cap of {}", cap.min(24))));
    }
    if n == 0 {
        return Ok(LruDesign { lrus: Vec::new(), pi: 0.0 });
    }
    let size = 1usize << n;
    let mut omega = vec![f64::NAN; size];
    for mask in 1..size {
        let q = VertexSet(mask as u128);
        if inst.is_connected_set(q) {
            omega[mask] = lru_cost(inst, h, q)?.omega;
        }
    }
    let mut best = vec![f64::INFINITY; size];
    let mut parts: Vec<Vec<VertexSet>> = vec![Vec::new(); size];
    best[0] = 0.0;
    for mask in 1..size {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        // blocks = low | (any submask of rest)
        let mut sub = rest;
        loop {
            let block = sub | low;
            if !omega[block].is_nan() {
                let cost = omega[block] + best[mask ^ block];
                let better = cost < best[mask] || {
                    cost == best[mask] && {
                        let mut cand = vec![VertexSet(block as u128)];
                        cand.extend_from_slice(&parts[mask ^ block]);
                        canonical_cmp_sets(&cand, &parts[mask]).is_lt()
                    }
                };
                if better {
                    best[mask] = cost;
                    let mut cand = vec![VertexSet(block as u128)];
                    cand.extend_from_slice(&parts[mask ^ block]);
                    parts[mask] = cand;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    design_cost(inst, h, &parts[size - 1])
}

/// Minimal reduced cost over every nonempty subset, connected or not.
pub fn oracle_price(inst: &SystemInstance, h: &SuccessorSets, duals: &[f64], cap: usize) -> Result<PricingResult> {
    let n = inst.num_vertices();
    if n > cap || n > 24 {
        return Err(Error::InstanceTooLarge(format!("{n} vertices exceed the pricing oracle cap of {}", cap.min(24))));
    }
    let mut best: Option<(f64, VertexSet)> = None;
    for mask in 1u128..1 << n {
        let q = VertexSet(mask);
        let rc = lru_cost(inst, h, q)?.omega - q.iter().map(|v| duals[v]).sum::<f64>();
        let better = match best {
            None => true,
            Some((b, s)) => rc < b || (rc == b && q.canonical_cmp(s).is_lt()),
        };
        if better {
            best = Some((rc, q));
        }
    }
    let (reduced_cost, column) = best.ok_or(Error::EmptyLru)?;
    Ok(PricingResult { column, reduced_cost, method: PricingMethod::Oracle })
}
