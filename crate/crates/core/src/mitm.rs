//! Meet-in-the-middle beam search.
//!
//! The items are split into a short left prefix and a long right
//! remainder. Phase A expands the left items with one-candidate-per-bucket
//! trimming over `[-B/2, B/2]`, producing an anchor mesh with spacing at
//! least `Δ = floor(B/w)` after every second anchor is deleted. Phase B
//! runs a width-`w` beam over the right items scored by distance to the
//! residual targets `T - a`: before any candidate is within `Δ` of a
//! residual it keeps the `w` closest candidates, afterwards it keeps one
//! best representative per residual Voronoi cell. The answer is the best
//! anchor/right-sum pair.
//!
//! Inputs are symmetrized first (see [`crate::instance::symmetrize`]), so
//! the error reported on the transformed instance equals the error of the
//! desymmetrized subset on the original one.

use alloc::vec::Vec;

use crate::beam::{distance, expand_sums};
use crate::error::{Error, Result};
use crate::instance::{symmetrize, Instance, SymmetrizationRecord};
use crate::reconstruct::{
    forward_with_checkpoints, reconstruct_checkpointed, reconstruct_subset, CheckpointLog,
    TrimRule,
};
use crate::rng::{mix64, SplitMix64};

/// Seed stream indices used by the solver pipeline. The bounded variant
/// shares them so an unbinding cardinality budget reproduces the
/// unconstrained run bit-exactly.
pub(crate) const SYM_STREAM: u64 = 1;
pub(crate) const PHASE_A_STREAM: u64 = 2;

/// How many items feed Phase A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitRule {
    /// Split at `floor(n/2)`.
    Half,
    /// Split at a fixed index (clamped to `[1, n-1]`).
    Fixed(usize),
    /// Split at `floor(c * log2(w))`, clamped to `[1, n-1]`.
    LogWidth(f64),
}

impl SplitRule {
    /// The default logarithmic split, `floor(4 * log2(w))`.
    pub fn log_default() -> Self {
        SplitRule::LogWidth(4.0)
    }
}

impl core::fmt::Display for SplitRule {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SplitRule::Half => write!(f, "half"),
            SplitRule::Fixed(k) => write!(f, "fixed:{k}"),
            SplitRule::LogWidth(c) => write!(f, "logw:{c}"),
        }
    }
}

impl core::str::FromStr for SplitRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "half" {
            return Ok(SplitRule::Half);
        }
        if let Some(k) = s.strip_prefix("fixed:") {
            let k: usize = k
                .parse()
                .map_err(|_| Error::invalid("fixed split wants an integer index"))?;
            return Ok(SplitRule::Fixed(k));
        }
        if let Some(c) = s.strip_prefix("logw:") {
            let c: f64 = c
                .parse()
                .map_err(|_| Error::invalid("log split wants a numeric coefficient"))?;
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::invalid("log split coefficient must be positive"));
            }
            return Ok(SplitRule::LogWidth(c));
        }
        Err(Error::invalid(
            "split rule must be half, fixed:K, or logw:C",
        ))
    }
}

/// Resolves the number of left items for a split rule; always in
/// `[1, n-1]`.
pub fn split_point(n: usize, width: usize, rule: SplitRule) -> usize {
    debug_assert!(n >= 2);
    debug_assert!(width >= 1);
    let raw = match rule {
        SplitRule::Half => n / 2,
        SplitRule::Fixed(k) => k,
        SplitRule::LogWidth(c) => {
            debug_assert!(c > 0.0);
            let v = libm::floor(c * libm::log2(width as f64));
            if v < 0.0 {
                0
            } else if v >= n as f64 {
                n
            } else {
                v as usize
            }
        }
    };
    raw.clamp(1, n - 1)
}

/// Which left items a Phase A anchor takes, as a bitmask.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DecisionMask {
    bits: Vec<u64>,
    len: usize,
}

impl DecisionMask {
    pub fn new(len: usize) -> Self {
        DecisionMask {
            bits: alloc::vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }
}

/// Phase A width-control variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseAVariant {
    /// One uniformly random candidate per nonempty bucket.
    BucketRandom,
    /// Sort the unique candidate sums and keep `w` evenly spaced
    /// representatives.
    EquiSample,
}

/// 0-based bucket of `x` over `[-half, half]` with bucket width `delta`;
/// the top boundary folds into the last bucket.
#[inline]
pub(crate) fn bucket_of(x: i64, half: i64, delta: i64, width: usize) -> usize {
    debug_assert!(x >= -half && x <= half);
    (((x + half) / delta) as usize).min(width - 1)
}

/// One-per-bucket random selection over candidates carrying a payload.
/// Buckets are visited in ascending order, so the output is sorted by sum
/// and randomness consumption is deterministic.
pub(crate) fn bucket_random_select<P>(
    candidates: Vec<(i64, P)>,
    half: i64,
    delta: i64,
    width: usize,
    rng: &mut SplitMix64,
) -> Vec<(i64, P)> {
    let mut buckets: Vec<Vec<(i64, P)>> = Vec::with_capacity(width);
    buckets.resize_with(width, Vec::new);
    for c in candidates {
        let j = bucket_of(c.0, half, delta, width);
        buckets[j].push(c);
    }
    let mut kept = Vec::new();
    for mut bucket in buckets {
        if !bucket.is_empty() {
            let pick = rng.below(bucket.len() as u64) as usize;
            kept.push(bucket.swap_remove(pick));
        }
    }
    kept
}

/// Keeps at most `width` unique sums by snapping an evenly spaced value
/// grid over [min, max] to the nearest candidates. Where candidates
/// cluster, several grid points collapse onto one representative, so the
/// kept set can be smaller than `width`.
fn equi_sample_select<P>(mut candidates: Vec<(i64, P)>, width: usize) -> Vec<(i64, P)> {
    candidates.sort_by_key(|a| a.0);
    candidates.dedup_by(|a, b| a.0 == b.0);
    let m = candidates.len();
    if m <= width {
        return candidates;
    }
    let lo = candidates[0].0 as i128;
    let hi = candidates[m - 1].0 as i128;
    let span = (width - 1) as i128;
    let mut keep = alloc::vec![false; m];
    for t in 0..width as i128 {
        let grid = lo + (hi - lo) * t / span;
        let pos = candidates.partition_point(|c| (c.0 as i128) < grid);
        // Nearest candidate to the grid point; ties to the smaller sum.
        let idx = match (pos.checked_sub(1), pos) {
            (Some(l), r) if r < m => {
                if grid - candidates[l].0 as i128 <= candidates[r].0 as i128 - grid {
                    l
                } else {
                    r
                }
            }
            (Some(l), _) => l,
            (None, r) => r,
        };
        keep[idx] = true;
    }
    candidates
        .into_iter()
        .zip(keep)
        .filter(|(_, keep)| *keep)
        .map(|(c, _)| c)
        .collect()
}

/// The Phase A anchor mesh: surviving anchors over `[-B/2, B/2]`, their
/// residual targets `T - a`, and per-anchor decision masks over the left
/// items.
#[derive(Debug, Clone)]
pub struct AnchorMesh {
    bucket_width: i64,
    anchors: Vec<i64>,
    residuals: Vec<i64>,
    masks: Vec<DecisionMask>,
    /// Residuals sorted ascending with their anchor index, for binary
    /// search.
    sorted_residuals: Vec<(i64, usize)>,
}

impl AnchorMesh {
    pub(crate) fn from_parts(
        bucket_width: i64,
        anchors: Vec<i64>,
        residuals: Vec<i64>,
        masks: Vec<DecisionMask>,
    ) -> Self {
        debug_assert_eq!(anchors.len(), residuals.len());
        debug_assert_eq!(anchors.len(), masks.len());
        let mut sorted_residuals: Vec<(i64, usize)> =
            residuals.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        sorted_residuals.sort_unstable();
        AnchorMesh {
            bucket_width,
            anchors,
            residuals,
            masks,
            sorted_residuals,
        }
    }

    /// Bucket width `Δ = max(1, floor(B/w))`.
    pub fn bucket_width(&self) -> i64 {
        self.bucket_width
    }

    /// Surviving anchors, sorted ascending.
    pub fn anchors(&self) -> &[i64] {
        &self.anchors
    }

    /// Residual targets `T - a`, parallel to [`Self::anchors`].
    pub fn residuals(&self) -> &[i64] {
        &self.residuals
    }

    pub fn mask(&self, anchor_index: usize) -> &DecisionMask {
        &self.masks[anchor_index]
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Fewer than two anchors survived; the solver falls back to a plain
    /// beam in that case.
    pub fn is_sparse(&self) -> bool {
        self.len() < 2
    }

    /// Distance from `x` to the nearest residual and that residual's
    /// anchor index; equidistant ties go to the smaller residual.
    pub fn nearest_residual(&self, x: i64) -> (u64, usize) {
        let sr = &self.sorted_residuals;
        debug_assert!(!sr.is_empty());
        let pos = sr.partition_point(|&(r, _)| r < x);
        let mut best: Option<(u64, usize)> = None;
        for p in [pos.wrapping_sub(1), pos] {
            if let Some(&(r, idx)) = sr.get(p) {
                let d = distance(x, r);
                // Strict improvement only: the lower residual is visited
                // first, so ties stay with it.
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, idx));
                }
            }
        }
        best.expect("mesh holds at least one residual")
    }
}

/// Builds the Phase A anchor mesh from the left items.
///
/// Each layer expands by include/exclude, restricts to `[-B/2, B/2]`, and
/// keeps one candidate per bucket (random or equi-sampled). After the last
/// layer, anchors at even positions (1-based positions 2, 4, ...) of the
/// sorted list are deleted, which guarantees consecutive survivors differ
/// by at least `Δ`; residuals and decision masks are computed for the
/// survivors.
pub fn phase_a_build_mesh(
    left_items: &[i64],
    target: i64,
    width: usize,
    bound: i64,
    seed: u64,
    variant: PhaseAVariant,
) -> Result<AnchorMesh> {
    if left_items.is_empty() {
        return Err(Error::invalid("phase A needs at least one item"));
    }
    if width < 4 {
        return Err(Error::invalid("phase A needs width >= 4"));
    }
    if bound < 1 {
        return Err(Error::invalid("bound B must be >= 1"));
    }
    let delta = (bound / width as i64).max(1);
    let half = bound / 2;
    let mut rng = SplitMix64::new(seed);
    let n_left = left_items.len();
    let mut kept: Vec<(i64, DecisionMask)> = alloc::vec![(0, DecisionMask::new(n_left))];
    for (i, &s) in left_items.iter().enumerate() {
        let mut expanded: Vec<(i64, DecisionMask)> = Vec::with_capacity(kept.len() * 2);
        // Exclude branches first: kept candidates are always inside the box.
        expanded.extend(kept.iter().cloned());
        for (x, mask) in &kept {
            let y = x.checked_add(s).ok_or(Error::Overflow)?;
            if -half <= y && y <= half {
                let mut taken = mask.clone();
                taken.set(i);
                expanded.push((y, taken));
            }
        }
        kept = match variant {
            PhaseAVariant::BucketRandom => {
                bucket_random_select(expanded, half, delta, width, &mut rng)
            }
            PhaseAVariant::EquiSample => equi_sample_select(expanded, width),
        };
    }
    kept.sort_by_key(|a| a.0);
    let survivors: Vec<(i64, DecisionMask)> = kept
        .into_iter()
        .enumerate()
        .filter(|(i, _)| i % 2 == 0)
        .map(|(_, c)| c)
        .collect();

    let mut anchors = Vec::with_capacity(survivors.len());
    let mut masks = Vec::with_capacity(survivors.len());
    for (a, mask) in survivors {
        anchors.push(a);
        masks.push(mask);
    }
    #[cfg(debug_assertions)]
    {
        if variant == PhaseAVariant::BucketRandom {
            // One-per-bucket selection plus even deletion guarantees this;
            // equi-sampling gives no spacing bound.
            for pair in anchors.windows(2) {
                debug_assert!(pair[1] - pair[0] >= delta, "anchor spacing below delta");
            }
        }
        for (a, mask) in anchors.iter().zip(&masks) {
            let sum: i64 = mask.indices().iter().map(|&i| left_items[i]).sum();
            debug_assert_eq!(sum, *a, "mask does not reproduce its anchor");
        }
        debug_assert!(anchors.iter().all(|&a| -half <= a && a <= half));
    }
    mesh_from_survivors(delta, target, anchors, masks)
}

/// Builds a mesh from sorted surviving anchors, computing residuals with
/// overflow checks.
pub(crate) fn mesh_from_survivors(
    bucket_width: i64,
    target: i64,
    anchors: Vec<i64>,
    masks: Vec<DecisionMask>,
) -> Result<AnchorMesh> {
    let mut residuals = Vec::with_capacity(anchors.len());
    for &a in &anchors {
        residuals.push(target.checked_sub(a).ok_or(Error::Overflow)?);
    }
    Ok(AnchorMesh::from_parts(bucket_width, anchors, residuals, masks))
}

/// Per-layer diagnostics of the residual-guided beam.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhaseBTrace {
    /// First layer (1-based) whose expanded set had a candidate within `Δ`
    /// of a residual; `None` if the run never hit.
    pub t_hit: Option<usize>,
    /// Occupied residual Voronoi cells after each layer's trim.
    pub cells_filled: Vec<usize>,
    /// Minimum candidate-to-residual distance after each layer's trim.
    pub gap_history: Vec<u64>,
}

/// Residual-guided trim rule over an anchor mesh. Pure function of the
/// expanded set, so checkpoint replay reproduces the forward pass.
pub(crate) struct MeshTrim<'a> {
    pub mesh: &'a AnchorMesh,
    pub width: usize,
}

fn select_residual_guided(
    mesh: &AnchorMesh,
    width: usize,
    expanded: &[i64],
) -> (Vec<i64>, bool) {
    let delta = mesh.bucket_width() as u64;
    let mut scored: Vec<(u64, usize, i64)> = expanded
        .iter()
        .map(|&x| {
            let (d, idx) = mesh.nearest_residual(x);
            (d, idx, x)
        })
        .collect();
    let hit = scored.iter().any(|&(d, _, _)| d <= delta);
    let kept = if !hit {
        // Pre-hit regime: the w candidates nearest any residual.
        if scored.len() > width {
            scored.select_nth_unstable_by_key(width - 1, |&(d, _, x)| (d, x));
            scored.truncate(width);
        }
        let mut kept: Vec<i64> = scored.into_iter().map(|(_, _, x)| x).collect();
        kept.sort_unstable();
        kept
    } else {
        // Post-hit regime: one best representative per residual Voronoi
        // cell. `expanded` ascends, so ties keep the smaller sum.
        let mut best: Vec<Option<(u64, i64)>> = alloc::vec![None; mesh.len()];
        for (d, idx, x) in scored {
            match best[idx] {
                Some((bd, _)) if bd <= d => {}
                _ => best[idx] = Some((d, x)),
            }
        }
        let mut kept: Vec<i64> = best.into_iter().flatten().map(|(_, x)| x).collect();
        kept.sort_unstable();
        kept
    };
    (kept, hit)
}

impl TrimRule for MeshTrim<'_> {
    fn trim(&self, expanded: Vec<i64>) -> Vec<i64> {
        select_residual_guided(self.mesh, self.width, &expanded).0
    }
}

fn phase_b_run(
    right_items: &[i64],
    mesh: &AnchorMesh,
    width: usize,
) -> Result<(Vec<i64>, PhaseBTrace, CheckpointLog)> {
    debug_assert!(!mesh.is_empty());
    let mut log = CheckpointLog::new(right_items.len());
    let mut beam = alloc::vec![0i64];
    let mut trace = PhaseBTrace::default();
    for (i, &s) in right_items.iter().enumerate() {
        let expanded = expand_sums(&beam, s)?;
        let (kept, hit) = select_residual_guided(mesh, width, &expanded);
        if hit && trace.t_hit.is_none() {
            trace.t_hit = Some(i + 1);
        }
        beam = kept;
        log.record(i + 1, &beam);
        let mut occupied = alloc::vec![false; mesh.len()];
        let mut gap = u64::MAX;
        for &x in &beam {
            let (d, idx) = mesh.nearest_residual(x);
            gap = gap.min(d);
            occupied[idx] = true;
        }
        let filled = occupied.iter().filter(|&&c| c).count();
        if let Some(&prev_gap) = trace.gap_history.last() {
            debug_assert!(gap <= prev_gap, "gap increased across a layer");
        }
        if let (Some(t), Some(&prev_filled)) = (trace.t_hit, trace.cells_filled.last()) {
            if i + 1 > t {
                debug_assert!(filled >= prev_filled, "a filled cell was vacated");
            }
        }
        trace.cells_filled.push(filled);
        trace.gap_history.push(gap);
    }
    Ok((beam, trace, log))
}

fn best_in_beam(beam: &[i64], mesh: &AnchorMesh) -> (i64, u64, usize) {
    debug_assert!(!beam.is_empty());
    let mut best: Option<(u64, i64, usize)> = None;
    for &x in beam {
        let (d, idx) = mesh.nearest_residual(x);
        // beam ascends, so strict comparison keeps the smaller sum on ties.
        if best.is_none_or(|(bd, bx, _)| (d, x) < (bd, bx)) {
            best = Some((d, x, idx));
        }
    }
    let (d, x, idx) = best.expect("beam is never empty");
    (x, d, idx)
}

/// Residual-guided beam over the right items.
///
/// Returns the best right-half sum (minimizing distance to the residual
/// set), the final beam, and the per-layer trace. Tie-breaking is
/// deterministic, so the `seed` parameter is reserved and currently
/// unused.
pub fn phase_b_search(
    right_items: &[i64],
    mesh: &AnchorMesh,
    width: usize,
    _seed: u64,
) -> Result<(i64, Vec<i64>, PhaseBTrace)> {
    if mesh.is_empty() {
        return Err(Error::invalid("phase B needs at least one residual"));
    }
    let (beam, trace, _) = phase_b_run(right_items, mesh, width)?;
    let (x_star, _, _) = best_in_beam(&beam, mesh);
    Ok((x_star, beam, trace))
}

/// Outcome of one meet-in-the-middle solve.
#[derive(Debug, Clone)]
pub struct MitmResult {
    /// Chosen anchor plus best right-half sum.
    pub best_total: i64,
    /// `|best_total - T|` on the symmetrized instance; equals the error of
    /// the desymmetrized subset on the original instance.
    pub error: u64,
    /// Best right-half sum `x*`.
    pub phase_b_best: i64,
    /// Chosen anchor `a*`.
    pub anchor: i64,
    /// Index of `a*` in the mesh (0 on fallback).
    pub anchor_index: usize,
    /// Resolved split point.
    pub n_left: usize,
    /// True when the mesh was too sparse and the solver ran a plain beam
    /// over all items instead.
    pub fallback: bool,
    pub trace: PhaseBTrace,
    /// Wall-clock time of the solve; zero unless a timing harness fills
    /// it in.
    pub elapsed_ns: u64,
}

/// A solve plus everything needed to reconstruct the chosen subset.
#[derive(Debug, Clone)]
pub struct MitmOutput {
    pub result: MitmResult,
    pub record: SymmetrizationRecord,
    pub transformed: Instance,
    pub mesh: Option<AnchorMesh>,
    /// Phase B checkpoints over the right items, or plain-beam checkpoints
    /// over all items on fallback.
    pub checkpoints: CheckpointLog,
    pub width: usize,
}

/// Full meet-in-the-middle solve keeping reconstruction artifacts.
pub fn mitm_solve_full(
    instance: &Instance,
    width: usize,
    rule: SplitRule,
    seed: u64,
    variant: PhaseAVariant,
) -> Result<MitmOutput> {
    let n = instance.len();
    if n < 2 {
        return Err(Error::invalid("mitm needs at least two items"));
    }
    if width < 4 {
        return Err(Error::invalid("mitm needs width >= 4"));
    }
    let (transformed, record) = symmetrize(instance, mix64(seed, SYM_STREAM))?;
    let n_left = split_point(n, width, rule);
    let mesh = phase_a_build_mesh(
        &transformed.items[..n_left],
        transformed.target,
        width,
        transformed.bound,
        mix64(seed, PHASE_A_STREAM),
        variant,
    )?;
    if mesh.is_sparse() {
        let (best, log) =
            forward_with_checkpoints(&transformed.items, transformed.target, width)?;
        let error = distance(best, transformed.target);
        return Ok(MitmOutput {
            result: MitmResult {
                best_total: best,
                error,
                phase_b_best: best,
                anchor: 0,
                anchor_index: 0,
                n_left,
                fallback: true,
                trace: PhaseBTrace::default(),
                elapsed_ns: 0,
            },
            record,
            transformed,
            mesh: Some(mesh),
            checkpoints: log,
            width,
        });
    }
    let right = &transformed.items[n_left..];
    let (beam, trace, log) = phase_b_run(right, &mesh, width)?;
    let (x_star, d, anchor_index) = best_in_beam(&beam, &mesh);
    let anchor = mesh.anchors()[anchor_index];
    let best_total = anchor.checked_add(x_star).ok_or(Error::Overflow)?;
    debug_assert_eq!(distance(best_total, transformed.target), d);
    Ok(MitmOutput {
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
        record,
        transformed,
        mesh: Some(mesh),
        checkpoints: log,
        width,
    })
}

/// Meet-in-the-middle solve returning just the result.
pub fn mitm_solve(
    instance: &Instance,
    width: usize,
    rule: SplitRule,
    seed: u64,
    variant: PhaseAVariant,
) -> Result<MitmResult> {
    Ok(mitm_solve_full(instance, width, rule, seed, variant)?.result)
}

/// Recovers the original-index subset behind a solve.
///
/// Left indices come from the chosen anchor's decision mask, right indices
/// from checkpointed replay of Phase B; the union is mapped back through
/// the symmetrization record. The returned subset's sum satisfies
/// `|sum - T_original| == result.error` exactly.
pub fn mitm_reconstruct(output: &MitmOutput) -> Result<Vec<usize>> {
    let t = &output.transformed;
    let transformed_subset: Vec<usize> = if output.result.fallback {
        reconstruct_subset(
            &t.items,
            t.target,
            output.width,
            output.result.best_total,
            &output.checkpoints,
        )?
    } else {
        let mesh = output
            .mesh
            .as_ref()
            .ok_or_else(|| Error::invalid("missing mesh in solve output"))?;
        let mut subset = mesh.mask(output.result.anchor_index).indices();
        let rule = MeshTrim {
            mesh,
            width: output.width,
        };
        let right = reconstruct_checkpointed(
            &t.items[output.result.n_left..],
            output.result.phase_b_best,
            &output.checkpoints,
            &rule,
        )?;
        subset.extend(right.into_iter().map(|i| i + output.result.n_left));
        subset
    };
    crate::instance::desymmetrize_subset(&output.record, &transformed_subset)
}
