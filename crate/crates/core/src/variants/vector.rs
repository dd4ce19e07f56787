//! d-dimensional vector subset sum: minimize the Euclidean norm of
//! (subset vector sum - target).
//!
//! The meet-in-the-middle beam adapts with three changes: Phase A buckets
//! become hypercube cells (`g = floor(w^(1/d))` per axis, side
//! `ceil(B/g)`), scoring and Voronoi assignment use squared Euclidean
//! distance in 128-bit integer arithmetic, and symmetrization negates
//! flipped item vectors coordinate-wise. Even-cell deletion generalizes to
//! a d-dimensional checkerboard: cells whose per-axis index sum is even
//! are dropped, preserving cell-size separation between survivors.
//!
//! `d = 1` delegates to the scalar solver, so both paths produce identical
//! errors on identical seeds.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::mitm::{mitm_solve, split_point, PhaseAVariant, SplitRule, SYM_STREAM};
use crate::mitm::PHASE_A_STREAM;
use crate::rng::{mix64, SplitMix64};

type Point = Vec<i64>;

/// A vector subset sum instance.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VectorInstance {
    #[cfg_attr(feature = "serde", serde(rename = "d"))]
    pub dim: usize,
    #[cfg_attr(feature = "serde", serde(rename = "B"))]
    pub bound: i64,
    pub target: Vec<i64>,
    pub vectors: Vec<Vec<i64>>,
}

impl VectorInstance {
    pub fn new(dim: usize, bound: i64, target: Vec<i64>, vectors: Vec<Vec<i64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        if dim > 8 {
            return Err(Error::invalid("dimension above the d <= 8 guard"));
        }
        if bound < 1 {
            return Err(Error::invalid("bound B must be >= 1"));
        }
        if target.len() != dim {
            return Err(Error::invalid("target dimension mismatch"));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::invalid("vector dimension mismatch"));
            }
            if v.iter().any(|&c| c == i64::MIN || c.unsigned_abs() > bound.unsigned_abs()) {
                return Err(Error::invalid("coordinate magnitude exceeds bound B"));
            }
        }
        Ok(VectorInstance {
            dim,
            bound,
            target,
            vectors,
        })
    }

    /// Uniform coordinates on `[-B, B]` with a planted Bernoulli-subset
    /// target, so an exact solution exists.
    pub fn generate_uniform(dim: usize, n: usize, bound: i64, seed: u64) -> Result<Self> {
        let mut rng = SplitMix64::new(mix64(seed, 0));
        let vectors: Vec<Point> = (0..n)
            .map(|_| (0..dim).map(|_| rng.range_i64(-bound, bound)).collect())
            .collect();
        let mut pick = SplitMix64::new(mix64(seed, 1));
        let mut target = alloc::vec![0i64; dim];
        for v in &vectors {
            if pick.next_bool() {
                for (t, &c) in target.iter_mut().zip(v) {
                    *t = t.checked_add(c).ok_or(Error::Overflow)?;
                }
            }
        }
        VectorInstance::new(dim, bound, target, vectors)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Squared Euclidean error of a candidate sum point.
    pub fn error_sq_of(&self, point: &[i64]) -> u128 {
        dist_sq(point, &self.target)
    }
}

pub(crate) fn dist_sq(a: &[i64], b: &[i64]) -> u128 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as i128 - y as i128;
            (d * d) as u128
        })
        .sum()
}

fn add_points(a: &[i64], b: &[i64]) -> Result<Point> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x.checked_add(y).ok_or(Error::Overflow))
        .collect()
}

fn sub_points(a: &[i64], b: &[i64]) -> Result<Point> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x.checked_sub(y).ok_or(Error::Overflow))
        .collect()
}

/// Largest `g >= 1` with `g^d <= w`.
fn int_root(w: usize, d: usize) -> usize {
    let mut g = libm::pow(w as f64, 1.0 / d as f64) as usize;
    g = g.max(1);
    while pow_fits(g + 1, d, w) {
        g += 1;
    }
    while g > 1 && !pow_fits(g, d, w) {
        g -= 1;
    }
    g
}

fn pow_fits(g: usize, d: usize, w: usize) -> bool {
    let mut acc: u128 = 1;
    for _ in 0..d {
        acc = acc.saturating_mul(g as u128);
        if acc > w as u128 {
            return false;
        }
    }
    acc <= w as u128
}

/// How nearest-residual queries are answered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NearestIndexKind {
    /// Grid hashing when the residual set is large (more than `4 * 2^d`
    /// points), linear scan otherwise.
    #[default]
    Auto,
    Linear,
    Grid,
}

/// Exact nearest-residual index over integer points; ties go to the
/// lexicographically smaller residual.
enum NearestIndex<'a> {
    Linear {
        residuals: &'a [Point],
    },
    Grid {
        residuals: &'a [Point],
        cell: i64,
        origin: Vec<i64>,
        extents: Vec<i64>,
        occupied: BTreeMap<u64, Vec<usize>>,
    },
}

impl<'a> NearestIndex<'a> {
    fn build(residuals: &'a [Point], cell: i64, dim: usize, kind: NearestIndexKind) -> Self {
        debug_assert!(!residuals.is_empty());
        let use_grid = match kind {
            NearestIndexKind::Linear => false,
            NearestIndexKind::Grid => true,
            NearestIndexKind::Auto => residuals.len() > 4 << dim,
        };
        if !use_grid {
            return NearestIndex::Linear { residuals };
        }
        let mut origin = alloc::vec![i64::MAX; dim];
        let mut max = alloc::vec![i64::MIN; dim];
        for r in residuals {
            for a in 0..dim {
                origin[a] = origin[a].min(r[a]);
                max[a] = max[a].max(r[a]);
            }
        }
        // Coarsen the cell so the grid holds O(count) cells per axis;
        // query cost stays bounded however small the requested cell is.
        let per_axis = int_root(residuals.len().max(1), dim).max(1) as i64 * 2;
        let cell = (0..dim).fold(cell.max(1), |c, a| {
            c.max((max[a] - origin[a]) / per_axis + 1)
        });
        let extents: Vec<i64> = (0..dim)
            .map(|a| (max[a] - origin[a]) / cell + 1)
            .collect();
        let mut occupied: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, r) in residuals.iter().enumerate() {
            let id = cell_id(&cell_coords(r, &origin, cell, &extents), &extents);
            occupied.entry(id).or_default().push(i);
        }
        NearestIndex::Grid {
            residuals,
            cell,
            origin,
            extents,
            occupied,
        }
    }

    fn nearest(&self, q: &[i64]) -> (u128, usize) {
        match self {
            NearestIndex::Linear { residuals } => linear_nearest(residuals, q),
            NearestIndex::Grid {
                residuals,
                cell,
                origin,
                extents,
                occupied,
            } => grid_nearest(residuals, *cell, origin, extents, occupied, q),
        }
    }
}

fn better(
    residuals: &[Point],
    best: Option<(u128, usize)>,
    d: u128,
    idx: usize,
) -> Option<(u128, usize)> {
    match best {
        None => Some((d, idx)),
        Some((bd, bi)) => {
            if d < bd || (d == bd && residuals[idx] < residuals[bi]) {
                Some((d, idx))
            } else {
                Some((bd, bi))
            }
        }
    }
}

fn linear_nearest(residuals: &[Point], q: &[i64]) -> (u128, usize) {
    let mut best = None;
    for (i, r) in residuals.iter().enumerate() {
        best = better(residuals, best, dist_sq(q, r), i);
    }
    best.expect("residual set is nonempty")
}

fn cell_coords(p: &[i64], origin: &[i64], cell: i64, extents: &[i64]) -> Vec<i64> {
    p.iter()
        .zip(origin)
        .zip(extents)
        .map(|((&x, &o), &e)| ((x - o).div_euclid(cell)).clamp(0, e - 1))
        .collect()
}

fn cell_id(coords: &[i64], extents: &[i64]) -> u64 {
    let mut id: u64 = 0;
    for (&c, &e) in coords.iter().zip(extents) {
        id = id * e as u64 + c as u64;
    }
    id
}

fn grid_nearest(
    residuals: &[Point],
    cell: i64,
    origin: &[i64],
    extents: &[i64],
    occupied: &BTreeMap<u64, Vec<usize>>,
    q: &[i64],
) -> (u128, usize) {
    let dim = origin.len();
    // Queries outside the bounding box would ring-search through mostly
    // empty cells; an exact linear scan is cheaper there.
    let outside = (0..dim).any(|a| {
        let c = (q[a] - origin[a]).div_euclid(cell);
        c < 0 || c >= extents[a]
    });
    if outside {
        return linear_nearest(residuals, q);
    }
    let qc = cell_coords(q, origin, cell, extents);
    let max_radius = (0..dim)
        .map(|a| qc[a].max(extents[a] - 1 - qc[a]))
        .max()
        .unwrap_or(0);
    let mut best: Option<(u128, usize)> = None;
    let mut cells_seen = 0usize;
    let mut offsets = alloc::vec![0i64; dim];
    for radius in 0..=max_radius {
        // Enumerate the shell at Chebyshev distance exactly `radius`.
        for o in offsets.iter_mut() {
            *o = -radius;
        }
        'shell: loop {
            if offsets.iter().any(|o| o.abs() == radius) {
                let coords: Option<Vec<i64>> = (0..dim)
                    .map(|a| {
                        let c = qc[a] + offsets[a];
                        (c >= 0 && c < extents[a]).then_some(c)
                    })
                    .collect();
                if let Some(coords) = coords {
                    if let Some(points) = occupied.get(&cell_id(&coords, extents)) {
                        cells_seen += 1;
                        for &i in points {
                            best = better(residuals, best, dist_sq(q, &residuals[i]), i);
                        }
                    }
                }
            }
            // Odometer increment over [-radius, radius]^d.
            let mut a = 0;
            loop {
                if a == dim {
                    break 'shell;
                }
                offsets[a] += 1;
                if offsets[a] > radius {
                    offsets[a] = -radius;
                    a += 1;
                } else {
                    break;
                }
            }
        }
        if cells_seen == occupied.len() {
            // Every point has been examined.
            break;
        }
        if let Some((best_d2, _)) = best {
            // All cells beyond this shell are at least `margin` away on
            // some axis; once that exceeds the best distance, no closer or
            // tied point remains outside.
            let margin = (0..dim)
                .map(|a| {
                    let lo = origin[a] + (qc[a] - radius) * cell;
                    let hi = origin[a] + (qc[a] + radius + 1) * cell;
                    (q[a] as i128 - lo as i128 + 1).min(hi as i128 - q[a] as i128)
                })
                .min()
                .unwrap_or(0);
            if margin > 0 && (margin * margin) as u128 > best_d2 {
                break;
            }
        }
    }
    best.expect("grid search exhausts all occupied cells")
}

struct VectorMesh {
    cell: i64,
    anchors: Vec<Point>,
    residuals: Vec<Point>,
}

fn vector_phase_a(
    left: &[Point],
    target: &[i64],
    width: usize,
    bound: i64,
    dim: usize,
    seed: u64,
) -> Result<VectorMesh> {
    let g = int_root(width, dim);
    let cell = (bound + g as i64 - 1) / g as i64;
    let half = bound / 2;
    let extents = alloc::vec![g as i64; dim];
    let origin = alloc::vec![-half; dim];
    let mut rng = SplitMix64::new(seed);
    let mut kept: Vec<Point> = alloc::vec![alloc::vec![0i64; dim]];
    for v in left {
        let mut cells: BTreeMap<u64, Vec<Point>> = BTreeMap::new();
        let mut insert = |p: Point| {
            let id = cell_id(&cell_coords(&p, &origin, cell, &extents), &extents);
            cells.entry(id).or_default().push(p);
        };
        for p in &kept {
            insert(p.clone());
        }
        for p in &kept {
            let y = add_points(p, v)?;
            if y.iter().all(|&c| -half <= c && c <= half) {
                insert(y);
            }
        }
        kept = cells
            .into_values()
            .map(|mut bucket| {
                let pick = rng.below(bucket.len() as u64) as usize;
                bucket.swap_remove(pick)
            })
            .collect();
    }
    // Checkerboard deletion: drop cells with an even per-axis index sum.
    let mut anchors: Vec<Point> = kept
        .into_iter()
        .filter(|p| {
            let coords = cell_coords(p, &origin, cell, &extents);
            coords.iter().sum::<i64>() % 2 != 0
        })
        .collect();
    anchors.sort_unstable();
    let residuals: Result<Vec<Point>> = anchors.iter().map(|a| sub_points(target, a)).collect();
    Ok(VectorMesh {
        cell,
        anchors,
        residuals: residuals?,
    })
}

/// Result of a vector solve.
#[derive(Debug, Clone)]
pub struct VectorMitmResult {
    pub best_total: Vec<i64>,
    /// Squared Euclidean error (exact).
    pub error_sq: u128,
    /// Euclidean error.
    pub error: f64,
    pub phase_b_best: Vec<i64>,
    pub anchor: Vec<i64>,
    pub n_left: usize,
    pub fallback: bool,
}

fn dedup_points(mut points: Vec<Point>) -> Vec<Point> {
    points.sort_unstable();
    points.dedup();
    points
}

fn expand_points(beam: &[Point], v: &[i64]) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(beam.len() * 2);
    out.extend(beam.iter().cloned());
    for p in beam {
        out.push(add_points(p, v)?);
    }
    Ok(dedup_points(out))
}

fn keep_smallest(mut scored: Vec<(u128, Point)>, width: usize) -> Vec<Point> {
    scored.sort_unstable();
    scored.truncate(width);
    dedup_points(scored.into_iter().map(|(_, p)| p).collect())
}

/// Vector meet-in-the-middle solve with the default (auto) residual index.
pub fn vector_mitm_solve(
    vinst: &VectorInstance,
    width: usize,
    rule: SplitRule,
    seed: u64,
) -> Result<VectorMitmResult> {
    vector_mitm_solve_with_index(vinst, width, rule, seed, NearestIndexKind::Auto)
}

/// Vector meet-in-the-middle solve with an explicit nearest-residual
/// index choice.
pub fn vector_mitm_solve_with_index(
    vinst: &VectorInstance,
    width: usize,
    rule: SplitRule,
    seed: u64,
    index: NearestIndexKind,
) -> Result<VectorMitmResult> {
    let n = vinst.len();
    if n < 2 {
        return Err(Error::invalid("mitm needs at least two items"));
    }
    if width < 4 {
        return Err(Error::invalid("mitm needs width >= 4"));
    }
    if vinst.dim == 1 {
        let items: Vec<i64> = vinst.vectors.iter().map(|v| v[0]).collect();
        let inst = Instance::new(items, vinst.bound, vinst.target[0], None)?;
        let r = mitm_solve(&inst, width, rule, seed, PhaseAVariant::BucketRandom)?;
        return Ok(VectorMitmResult {
            best_total: alloc::vec![r.best_total],
            error_sq: (r.error as u128) * (r.error as u128),
            error: r.error as f64,
            phase_b_best: alloc::vec![r.phase_b_best],
            anchor: alloc::vec![r.anchor],
            n_left: r.n_left,
            fallback: r.fallback,
        });
    }
    let dim = vinst.dim;
    // Symmetrize: flip whole item vectors with probability 1/2.
    let mut rng = SplitMix64::new(mix64(seed, SYM_STREAM));
    let mut items: Vec<Point> = Vec::with_capacity(n);
    let mut target = vinst.target.clone();
    for v in &vinst.vectors {
        if rng.next_bool() {
            target = sub_points(&target, v)?;
            items.push(v.iter().map(|&c| -c).collect());
        } else {
            items.push(v.clone());
        }
    }
    let n_left = split_point(n, width, rule);
    let mesh = vector_phase_a(
        &items[..n_left],
        &target,
        width,
        vinst.bound,
        dim,
        mix64(seed, PHASE_A_STREAM),
    )?;
    if mesh.anchors.len() < 2 {
        return vector_fallback(&items, &target, width, n_left, dim);
    }
    let nn = NearestIndex::build(&mesh.residuals, mesh.cell, dim, index);
    let threshold = (mesh.cell as u128) * (mesh.cell as u128);
    let mut beam: Vec<Point> = alloc::vec![alloc::vec![0i64; dim]];
    for v in &items[n_left..] {
        let expanded = expand_points(&beam, v)?;
        let scored: Vec<(u128, usize)> = expanded.iter().map(|p| nn.nearest(p)).collect();
        let hit = scored.iter().any(|&(d, _)| d <= threshold);
        beam = if !hit {
            keep_smallest(
                scored
                    .iter()
                    .zip(&expanded)
                    .map(|(&(d, _), p)| (d, p.clone()))
                    .collect(),
                width,
            )
        } else {
            let mut best: Vec<Option<(u128, usize)>> = alloc::vec![None; mesh.residuals.len()];
            for (j, &(d, cell)) in scored.iter().enumerate() {
                // `expanded` ascends lexicographically, so strict
                // improvement keeps the smaller point on ties.
                if best[cell].is_none_or(|(bd, _)| d < bd) {
                    best[cell] = Some((d, j));
                }
            }
            let kept: Vec<Point> = best
                .into_iter()
                .flatten()
                .map(|(_, j)| expanded[j].clone())
                .collect();
            dedup_points(kept)
        };
    }
    let (x_star, d_sq, idx) = {
        let mut best: Option<(u128, &Point, usize)> = None;
        for p in &beam {
            let (d, idx) = nn.nearest(p);
            let replace = match &best {
                None => true,
                Some((bd, bp, _)) => d < *bd || (d == *bd && p < *bp),
            };
            if replace {
                best = Some((d, p, idx));
            }
        }
        let (d, p, idx) = best.expect("beam is never empty");
        (p.clone(), d, idx)
    };
    let anchor = mesh.anchors[idx].clone();
    let best_total = add_points(&anchor, &x_star)?;
    let error_sq = dist_sq(&best_total, &target);
    debug_assert_eq!(error_sq, d_sq);
    Ok(VectorMitmResult {
        error: libm::sqrt(error_sq as f64),
        best_total,
        error_sq,
        phase_b_best: x_star,
        anchor,
        n_left,
        fallback: false,
    })
}

/// Plain vector beam over all items, scored by distance to the target.
fn vector_fallback(
    items: &[Point],
    target: &[i64],
    width: usize,
    n_left: usize,
    dim: usize,
) -> Result<VectorMitmResult> {
    let mut beam: Vec<Point> = alloc::vec![alloc::vec![0i64; dim]];
    for v in items {
        let expanded = expand_points(&beam, v)?;
        beam = keep_smallest(
            expanded
                .into_iter()
                .map(|p| (dist_sq(&p, target), p))
                .collect(),
            width,
        );
    }
    let best = beam
        .iter()
        .map(|p| (dist_sq(p, target), p.clone()))
        .min()
        .expect("beam is never empty");
    Ok(VectorMitmResult {
        error: libm::sqrt(best.0 as f64),
        best_total: best.1.clone(),
        error_sq: best.0,
        phase_b_best: best.1,
        anchor: alloc::vec![0; dim],
        n_left,
        fallback: true,
    })
}
