//! Checkpointed forward search and backward subset reconstruction.
//!
//! The forward pass stores the beam at layer 0, every `m = floor(sqrt(n))`
//! layers, and layer `n`. Reconstruction walks backward one checkpoint
//! window at a time, recomputing at most `m` layers with parent links, so
//! peak memory is `O(w * sqrt(n))` while total time stays `O(n * w)`-ish
//! (each layer is recomputed at most twice).
//!
//! The machinery is generic over the per-layer trim rule so the
//! meet-in-the-middle search can reuse it for its residual-guided phase.

use alloc::vec::Vec;

use crate::beam::{distance, expand_sums, BeamState};
use crate::error::{Error, Result};

/// Deterministic per-layer trimming: maps the expanded (sorted,
/// deduplicated) candidate sums to the kept sums, sorted ascending.
///
/// Replay safety requires the rule to be a pure function of the expanded
/// set, so recomputing a window reproduces the forward pass bit-exactly.
pub(crate) trait TrimRule {
    fn trim(&self, expanded: Vec<i64>) -> Vec<i64>;
}

/// The closest-subset-sum rule: keep the `width` sums nearest `target`,
/// ties to the smaller sum.
pub(crate) struct ClosestTrim {
    pub target: i64,
    pub width: usize,
}

impl TrimRule for ClosestTrim {
    fn trim(&self, mut expanded: Vec<i64>) -> Vec<i64> {
        if expanded.len() > self.width {
            expanded.select_nth_unstable_by_key(self.width - 1, |&x| {
                (distance(x, self.target), x)
            });
            expanded.truncate(self.width);
            expanded.sort_unstable();
        }
        expanded
    }
}

/// Beam snapshots at layer 0, every `interval`-th layer, and the final
/// layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointLog {
    interval: usize,
    layers: usize,
    snapshots: Vec<(usize, Vec<i64>)>,
}

impl CheckpointLog {
    pub(crate) fn new(n: usize) -> Self {
        let interval = n.isqrt().max(1);
        CheckpointLog {
            interval,
            layers: n,
            snapshots: alloc::vec![(0, alloc::vec![0])],
        }
    }

    pub(crate) fn record(&mut self, layer: usize, beam: &[i64]) {
        if layer.is_multiple_of(self.interval) || layer == self.layers {
            self.snapshots.push((layer, beam.to_vec()));
        }
    }

    /// Snapshot spacing `m = floor(sqrt(n))`.
    pub fn interval(&self) -> usize {
        self.interval
    }

    /// Number of forward layers `n`.
    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshot_layers(&self) -> impl Iterator<Item = usize> + '_ {
        self.snapshots.iter().map(|(l, _)| *l)
    }

    pub fn snapshot(&self, layer: usize) -> Option<&[i64]> {
        self.snapshots
            .iter()
            .find(|(l, _)| *l == layer)
            .map(|(_, b)| b.as_slice())
    }

    pub fn final_snapshot(&self) -> &[i64] {
        &self.snapshots.last().expect("log holds layer 0").1
    }
}

/// Runs the forward beam under `rule`, snapshotting per the checkpoint
/// schedule. Returns the final beam and the log.
pub(crate) fn forward_checkpointed<R: TrimRule>(
    items: &[i64],
    rule: &R,
) -> Result<(Vec<i64>, CheckpointLog)> {
    let n = items.len();
    let mut log = CheckpointLog::new(n);
    let mut beam = alloc::vec![0i64];
    for (i, &s) in items.iter().enumerate() {
        beam = rule.trim(expand_sums(&beam, s)?);
        log.record(i + 1, &beam);
    }
    Ok((beam, log))
}

/// Recovers an index set summing exactly to `best` by backward window
/// replay under the same `rule` that produced `log`.
pub(crate) fn reconstruct_checkpointed<R: TrimRule>(
    items: &[i64],
    best: i64,
    log: &CheckpointLog,
    rule: &R,
) -> Result<Vec<usize>> {
    if log.final_snapshot().binary_search(&best).is_err() {
        return Err(Error::UnreachableSum(best));
    }
    let keys: Vec<usize> = log.snapshot_layers().collect();
    let mut taken: Vec<usize> = Vec::new();
    let mut current = best;
    for pair in keys.windows(2).rev() {
        let (start, end) = (pair[0], pair[1]);
        // Replay the window, storing per layer the kept sums with their
        // preferred parent link (predecessor sum, took-item flag).
        let mut window: Vec<Vec<(i64, bool)>> = Vec::with_capacity(end - start);
        let mut beam = log
            .snapshot(start)
            .expect("window start is a snapshot layer")
            .to_vec();
        for layer in start + 1..=end {
            let item = items[layer - 1];
            let kept = rule.trim(expand_sums(&beam, item)?);
            let links = kept
                .iter()
                .map(|&x| {
                    // Prefer the not-taken parent when both reproduce x.
                    if beam.binary_search(&x).is_ok() {
                        (x, false)
                    } else {
                        (x, true)
                    }
                })
                .collect();
            window.push(links);
            beam = kept;
        }
        debug_assert_eq!(
            beam,
            log.snapshot(end).expect("window end is a snapshot layer"),
            "window replay diverged from the forward pass"
        );
        // Backtrack through the window.
        for layer in (start + 1..=end).rev() {
            let links = &window[layer - 1 - start];
            let took = match links.binary_search_by_key(&current, |&(x, _)| x) {
                Ok(idx) => links[idx].1,
                Err(_) => return Err(Error::UnreachableSum(current)),
            };
            if took {
                taken.push(layer - 1);
                current = current
                    .checked_sub(items[layer - 1])
                    .ok_or(Error::UnreachableSum(current))?;
            }
        }
    }
    if current != 0 {
        return Err(Error::UnreachableSum(current));
    }
    taken.reverse();
    Ok(taken)
}

/// Closest-subset-sum forward pass with checkpoints.
///
/// The best sum matches [`crate::beam::closest_beam_search`] bit-exactly:
/// both use the same expansion, deduplication, and tie rules.
pub fn forward_with_checkpoints(
    items: &[i64],
    target: i64,
    width: usize,
) -> Result<(i64, CheckpointLog)> {
    if items.is_empty() {
        return Err(Error::invalid("forward pass needs at least one item"));
    }
    if width < 1 {
        return Err(Error::invalid("beam width must be >= 1"));
    }
    let rule = ClosestTrim { target, width };
    let (beam, log) = forward_checkpointed(items, &rule)?;
    let best = BeamState::from_candidates(beam, width, target).best_for(target);
    Ok((best, log))
}

/// Recovers the index set behind `best_sum` from a closest-subset-sum
/// checkpoint log. The returned indices satisfy
/// `sum(items[i] for i in result) == best_sum` exactly.
pub fn reconstruct_subset(
    items: &[i64],
    target: i64,
    width: usize,
    best_sum: i64,
    log: &CheckpointLog,
) -> Result<Vec<usize>> {
    let rule = ClosestTrim { target, width };
    reconstruct_checkpointed(items, best_sum, log, &rule)
}
