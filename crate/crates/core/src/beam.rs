//! Width-bounded beam search primitives.
//!
//! [`generic_beam`] is the generic level-by-level search over a pluggable
//! successor/score pair (score is maximized). [`closest_beam_search`] is
//! the closest-subset-sum specialization: partial sums expand by
//! include/exclude of each item and each layer keeps the `w` sums nearest
//! the target.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// |x - t| without overflow, as an unsigned 64-bit distance.
#[inline]
pub fn distance(x: i64, t: i64) -> u64 {
    (x as i128 - t as i128).unsigned_abs() as u64
}

/// Generic beam search, maximizing `score`.
///
/// Each level expands every beam state via `succ`, keeps the top
/// `min(w, |successors|)` by score, and tracks the best-scoring state seen
/// anywhere. The loop ends when `done` holds on the beam or no state has a
/// successor. Ties in score preserve generation order.
pub fn generic_beam<S, K, FS, FK, FD>(
    init: S,
    mut succ: FS,
    mut score: FK,
    mut done: FD,
    w: usize,
) -> S
where
    S: Clone,
    K: Ord,
    FS: FnMut(&S) -> Vec<S>,
    FK: FnMut(&S) -> K,
    FD: FnMut(&[S]) -> bool,
{
    assert!(w >= 1, "beam width must be >= 1");
    let mut best_score = score(&init);
    let mut best = init.clone();
    let mut beam = alloc::vec![init];
    while !beam.is_empty() && !done(&beam) {
        let mut scored: Vec<(K, S)> = Vec::new();
        for s in &beam {
            for child in succ(s) {
                let k = score(&child);
                scored.push((k, child));
            }
        }
        if scored.is_empty() {
            break;
        }
        // Stable sort: equal scores keep generation order.
        scored.sort_by(|a, b| b.0.cmp(&a.0));
        scored.truncate(w);
        if scored[0].0 > best_score {
            best = scored[0].1.clone();
            best_score = score(&best);
        }
        beam = scored.into_iter().map(|(_, s)| s).collect();
    }
    best
}

/// A width-bounded set of candidate partial sums.
///
/// Candidates are kept sorted ascending and duplicate-free; after every
/// trim the set holds at most `width` sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeamState {
    candidates: Vec<i64>,
    width: usize,
}

impl BeamState {
    /// The beam `{0}`: only the empty subset.
    pub fn root(width: usize) -> Self {
        assert!(width >= 1, "beam width must be >= 1");
        BeamState {
            candidates: alloc::vec![0],
            width,
        }
    }

    /// Builds a beam from arbitrary sums; sorts, deduplicates, and keeps
    /// the `width` sums closest to `t`.
    pub fn from_candidates(sums: Vec<i64>, width: usize, t: i64) -> Self {
        assert!(width >= 1, "beam width must be >= 1");
        let mut candidates = sums;
        candidates.sort_unstable();
        candidates.dedup();
        let candidates = trim_closest(candidates, t, width);
        BeamState { candidates, width }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn candidates(&self) -> &[i64] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// The candidate minimizing (|x - t|, x).
    pub fn best_for(&self, t: i64) -> i64 {
        debug_assert!(!self.candidates.is_empty());
        self.candidates
            .iter()
            .copied()
            .min_by_key(|&x| (distance(x, t), x))
            .expect("beam is never empty")
    }

    pub fn min_distance(&self, t: i64) -> u64 {
        self.candidates
            .iter()
            .map(|&x| distance(x, t))
            .min()
            .expect("beam is never empty")
    }
}

/// Keeps the `w` sums of a sorted, deduplicated list with smallest
/// (|x - t|, x); the result is sorted ascending.
fn trim_closest(mut sums: Vec<i64>, t: i64, w: usize) -> Vec<i64> {
    if sums.len() > w {
        sums.select_nth_unstable_by_key(w - 1, |&x| (distance(x, t), x));
        sums.truncate(w);
        sums.sort_unstable();
    }
    sums
}

/// Expands a sorted, deduplicated candidate list by one item (union of the
/// kept and shifted copies) with overflow checking.
pub(crate) fn expand_sums(beam: &[i64], item: i64) -> Result<Vec<i64>> {
    let mut expanded = Vec::with_capacity(beam.len() * 2);
    expanded.extend_from_slice(beam);
    for &x in beam {
        expanded.push(x.checked_add(item).ok_or(Error::Overflow)?);
    }
    expanded.sort_unstable();
    expanded.dedup();
    Ok(expanded)
}

/// One layer of the closest-subset-sum beam: expand `beam` by `s`, then
/// keep the `width` sums nearest `t` (ties to the smaller sum).
pub fn expand_and_trim(beam: &BeamState, s: i64, t: i64, width: usize) -> Result<BeamState> {
    assert!(!beam.is_empty(), "beam must be nonempty");
    let expanded = expand_sums(&beam.candidates, s)?;
    let candidates = trim_closest(expanded, t, width);
    Ok(BeamState { candidates, width })
}

/// Beam search for the subset sum closest to `t`.
///
/// Starts from `{0}` and applies [`expand_and_trim`] once per item.
/// Returns the best sum in the final beam and the beam itself. With empty
/// `items` the only subset is the empty one, so the best sum is 0.
pub fn closest_beam_search(items: &[i64], t: i64, width: usize) -> Result<(i64, BeamState)> {
    let mut beam = BeamState::root(width);
    for &s in items {
        let next = expand_and_trim(&beam, s, t, width)?;
        // Supersets before trimming plus nearest-first trimming make the
        // layer minimum non-increasing.
        debug_assert!(next.min_distance(t) <= beam.min_distance(t));
        beam = next;
    }
    Ok((beam.best_for(t), beam))
}
