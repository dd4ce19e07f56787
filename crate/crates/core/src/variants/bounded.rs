//! Bounded-cardinality meet-in-the-middle beam.
//!
//! Every beam candidate tracks how many items it takes; include branches
//! that would exceed the budget `k` are discarded at expansion, and the
//! final anchor/right-sum pairing only considers combinations within
//! budget. The sign-flip transform is bypassed: taking is what the budget
//! meters, so exclusion must stay free. In the canonical setting (target
//! zero over symmetric items) the transform is the identity anyway, and
//! the empty subset is excluded from the answer there.
//!
//! With `k >= n` nothing is ever pruned and the run reproduces the
//! unconstrained pipeline on the raw (untransformed) items.

use alloc::vec::Vec;

use crate::beam::distance;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::mitm::{
    bucket_random_select, mesh_from_survivors, split_point, AnchorMesh, DecisionMask, MitmResult,
    PhaseBTrace, SplitRule, PHASE_A_STREAM,
};
use crate::rng::{mix64, SplitMix64};

/// A partial solution: running sum and number of items taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundedCandidate {
    pub sum: i64,
    pub taken: u32,
}

/// Result of a bounded solve: the usual solve fields plus the cardinality
/// and the subset itself.
#[derive(Debug, Clone)]
pub struct BoundedMitmResult {
    pub result: MitmResult,
    /// Number of items in the returned subset; always at most `k`, and at
    /// least 1 when the target is zero.
    pub cardinality: usize,
    /// Index subset realizing the reported error.
    pub subset: Vec<usize>,
}

struct Cand {
    sum: i64,
    taken: u32,
    mask: DecisionMask,
}

/// Phase A with take counting; include branches beyond the budget are
/// dropped. Randomness consumption matches the unconstrained mesh build
/// whenever nothing is pruned.
fn bounded_phase_a(
    left_items: &[i64],
    target: i64,
    width: usize,
    bound: i64,
    k: usize,
    seed: u64,
) -> Result<(AnchorMesh, Vec<u32>)> {
    let delta = (bound / width as i64).max(1);
    let half = bound / 2;
    let mut rng = SplitMix64::new(seed);
    let n_left = left_items.len();
    let mut kept: Vec<(i64, (DecisionMask, u32))> =
        alloc::vec![(0, (DecisionMask::new(n_left), 0))];
    for (i, &s) in left_items.iter().enumerate() {
        let mut expanded: Vec<(i64, (DecisionMask, u32))> = Vec::with_capacity(kept.len() * 2);
        expanded.extend(kept.iter().cloned());
        for (x, (mask, taken)) in &kept {
            let y = x.checked_add(s).ok_or(Error::Overflow)?;
            if (taken + 1) as usize <= k && -half <= y && y <= half {
                let mut m = mask.clone();
                m.set(i);
                expanded.push((y, (m, taken + 1)));
            }
        }
        kept = bucket_random_select(expanded, half, delta, width, &mut rng);
    }
    kept.sort_by_key(|a| a.0);
    let survivors: Vec<(i64, (DecisionMask, u32))> = kept
        .into_iter()
        .enumerate()
        .filter(|(i, _)| i % 2 == 0)
        .map(|(_, c)| c)
        .collect();
    let mut anchors = Vec::with_capacity(survivors.len());
    let mut masks = Vec::with_capacity(survivors.len());
    let mut counts = Vec::with_capacity(survivors.len());
    for (a, (mask, taken)) in survivors {
        anchors.push(a);
        masks.push(mask);
        counts.push(taken);
    }
    Ok((mesh_from_survivors(delta, target, anchors, masks)?, counts))
}

fn dedup_candidates(mut cands: Vec<Cand>) -> Vec<Cand> {
    // Per sum, keep the lowest cardinality (then the smallest mask, for
    // determinism).
    cands.sort_by(|a, b| (a.sum, a.taken, &a.mask).cmp(&(b.sum, b.taken, &b.mask)));
    cands.dedup_by(|a, b| a.sum == b.sum);
    cands
}

fn expand_bounded(beam: &[Cand], item: i64, item_index: usize, limit: u32) -> Result<Vec<Cand>> {
    let mut expanded: Vec<Cand> = Vec::with_capacity(beam.len() * 2);
    for c in beam {
        expanded.push(Cand {
            sum: c.sum,
            taken: c.taken,
            mask: c.mask.clone(),
        });
        if c.taken < limit {
            let y = c.sum.checked_add(item).ok_or(Error::Overflow)?;
            let mut m = c.mask.clone();
            m.set(item_index);
            expanded.push(Cand {
                sum: y,
                taken: c.taken + 1,
                mask: m,
            });
        }
    }
    Ok(dedup_candidates(expanded))
}

fn filter_by_flags(expanded: Vec<Cand>, keep: &[bool]) -> Vec<Cand> {
    expanded
        .into_iter()
        .zip(keep)
        .filter(|(_, keep)| **keep)
        .map(|(c, _)| c)
        .collect()
}

/// Solves with at most `k` taken items. The returned subset is nonempty
/// whenever the target is zero.
pub fn bounded_mitm_solve(
    instance: &Instance,
    width: usize,
    k: usize,
    seed: u64,
) -> Result<BoundedMitmResult> {
    if k < 1 {
        return Err(Error::Infeasible(k));
    }
    let n = instance.len();
    if n < 2 {
        return Err(Error::invalid("mitm needs at least two items"));
    }
    if width < 4 {
        return Err(Error::invalid("mitm needs width >= 4"));
    }
    let canonical = instance.target == 0;
    let n_left = split_point(n, width, SplitRule::log_default());
    let (mesh, counts) = bounded_phase_a(
        &instance.items[..n_left],
        instance.target,
        width,
        instance.bound,
        k,
        mix64(seed, PHASE_A_STREAM),
    )?;
    if mesh.is_sparse() {
        return bounded_fallback(instance, width, k, canonical, n_left);
    }
    let min_count = *counts.iter().min().expect("mesh has anchors");
    let limit = k as u32 - min_count;
    let right_items = &instance.items[n_left..];
    let delta = mesh.bucket_width() as u64;

    let mut beam = alloc::vec![Cand {
        sum: 0,
        taken: 0,
        mask: DecisionMask::new(right_items.len()),
    }];
    let mut trace = PhaseBTrace::default();
    for (i, &s) in right_items.iter().enumerate() {
        let expanded = expand_bounded(&beam, s, i, limit)?;
        let scored: Vec<(u64, usize)> = expanded
            .iter()
            .map(|c| mesh.nearest_residual(c.sum))
            .collect();
        let hit = scored.iter().any(|&(d, _)| d <= delta);
        if hit && trace.t_hit.is_none() {
            trace.t_hit = Some(i + 1);
        }
        let mut keep = alloc::vec![false; expanded.len()];
        if !hit {
            // Pre-hit: w smallest by (distance, cardinality, sum).
            let mut order: Vec<usize> = (0..expanded.len()).collect();
            order.sort_by_key(|&j| (scored[j].0, expanded[j].taken, expanded[j].sum));
            for &j in order.iter().take(width) {
                keep[j] = true;
            }
        } else {
            // Post-hit: best (distance, cardinality, sum) per Voronoi cell.
            let mut best: Vec<Option<(u64, u32, usize)>> = alloc::vec![None; mesh.len()];
            for (j, c) in expanded.iter().enumerate() {
                let (d, cell) = scored[j];
                let key = (d, c.taken, j);
                if best[cell].is_none_or(|b| key < b) {
                    best[cell] = Some(key);
                }
            }
            for (_, _, j) in best.into_iter().flatten() {
                keep[j] = true;
            }
        }
        beam = filter_by_flags(expanded, &keep);
        let mut occupied = alloc::vec![false; mesh.len()];
        let mut gap = u64::MAX;
        for c in &beam {
            let (d, cell) = mesh.nearest_residual(c.sum);
            gap = gap.min(d);
            occupied[cell] = true;
        }
        trace.cells_filled.push(occupied.iter().filter(|&&o| o).count());
        trace.gap_history.push(gap);
    }

    // Final selection over feasible (candidate, anchor) pairs.
    let mut best: Option<(u64, u32, i64, i64, usize, usize)> = None;
    for (ci, c) in beam.iter().enumerate() {
        for (ai, (&a, &count)) in mesh.anchors().iter().zip(&counts).enumerate() {
            let total_card = count + c.taken;
            if total_card as usize > k || (canonical && total_card == 0) {
                continue;
            }
            let r = mesh.residuals()[ai];
            let d = distance(c.sum, r);
            let key = (d, total_card, c.sum, a, ai, ci);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    let (d, total_card, x_star, anchor, anchor_index, cand_index) =
        best.ok_or(Error::Infeasible(k))?;
    let best_total = anchor.checked_add(x_star).ok_or(Error::Overflow)?;
    debug_assert_eq!(distance(best_total, instance.target), d);
    let cand = &beam[cand_index];
    let mut subset = mesh.mask(anchor_index).indices();
    subset.extend(cand.mask.indices().into_iter().map(|i| i + n_left));
    debug_assert_eq!(subset.len(), total_card as usize);
    Ok(BoundedMitmResult {
        result: MitmResult {
            best_total,
            error: d,
            phase_b_best: x_star,
            anchor,
            anchor_index,
            n_left,
            fallback: false,
            trace,
            elapsed_ns: 0,
        },
        cardinality: total_card as usize,
        subset,
    })
}

/// Plain cardinality-tracked beam over all items, used when the mesh is
/// too sparse.
fn bounded_fallback(
    instance: &Instance,
    width: usize,
    k: usize,
    canonical: bool,
    n_left: usize,
) -> Result<BoundedMitmResult> {
    let target = instance.target;
    let n = instance.len();
    let mut beam = alloc::vec![Cand {
        sum: 0,
        taken: 0,
        mask: DecisionMask::new(n),
    }];
    for (i, &s) in instance.items.iter().enumerate() {
        let mut expanded = expand_bounded(&beam, s, i, k as u32)?;
        if expanded.len() > width {
            expanded.sort_by_key(|c| (distance(c.sum, target), c.taken, c.sum));
            expanded.truncate(width);
            expanded.sort_by_key(|c| c.sum);
        }
        beam = expanded;
    }
    let best = beam
        .iter()
        .filter(|c| !(canonical && c.taken == 0))
        .min_by_key(|c| (distance(c.sum, target), c.taken, c.sum))
        .ok_or(Error::Infeasible(k))?;
    debug_assert_eq!(best.mask.count_ones(), best.taken as usize);
    Ok(BoundedMitmResult {
        result: MitmResult {
            best_total: best.sum,
            error: distance(best.sum, target),
            phase_b_best: best.sum,
            anchor: 0,
            anchor_index: 0,
            n_left,
            fallback: true,
            trace: PhaseBTrace::default(),
            elapsed_ns: 0,
        },
        cardinality: best.taken as usize,
        subset: best.mask.indices(),
    })
}
