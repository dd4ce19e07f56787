//! Instance generation and the sign-flip symmetrization transform.
//!
//! Weights are sampled i.i.d. from one of five families, in either a
//! symmetric form (support `[-B, B]`) or a nonnegative form (`[0, B]`).
//! Continuous families are rounded half-away-from-zero to integers and
//! then clipped to the support, so every sampled value is bit-exactly
//! inside the declared interval.
//!
//! Symmetrization flips an independent fair coin per index; flipped items
//! are negated and the target is shifted by their original sum. Taking a
//! flipped item in the transformed instance corresponds to *not* taking it
//! in the original one, so achievable errors are preserved exactly.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::{mix64, SplitMix64};

/// Weight distribution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Family {
    Uniform,
    Normal,
    Lognormal,
    Bimodal,
    StudentT,
}

/// Support interval of the sampled weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Support {
    /// Values in `[-B, B]`.
    Symmetric,
    /// Values in `[0, B]`.
    Nonnegative,
}

/// A weight distribution: family, support, Student-t degrees of freedom,
/// and the magnitude bound `B`.
///
/// Fixed parameterization relative to `B`: Normal is `N(0, (B/3)^2)`;
/// Bimodal is an equal mixture of normals with sd `B/10` centered at
/// `±B/3` (symmetric) or `{0, B}` (nonnegative); Student-t is scaled by
/// `B/4`; Lognormal has log-sd 1 with median `B/8`, signed uniformly at
/// random in the symmetric form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistributionSpec {
    pub family: Family,
    pub support: Support,
    /// Degrees of freedom; only meaningful for [`Family::StudentT`].
    /// `nu = 1` is the Cauchy distribution.
    #[cfg_attr(feature = "serde", serde(default = "default_nu"))]
    pub nu: u32,
    /// Magnitude bound, in weight units.
    #[cfg_attr(feature = "serde", serde(rename = "B"))]
    pub bound: i64,
}

#[cfg(feature = "serde")]
fn default_nu() -> u32 {
    2
}

impl DistributionSpec {
    pub fn new(family: Family, support: Support, bound: i64) -> Self {
        DistributionSpec {
            family,
            support,
            nu: 2,
            bound,
        }
    }

    pub fn with_nu(mut self, nu: u32) -> Self {
        self.nu = nu;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.bound < 1 {
            return Err(Error::invalid("distribution bound B must be >= 1"));
        }
        if self.nu < 1 {
            return Err(Error::invalid("student-t degrees of freedom must be >= 1"));
        }
        Ok(())
    }

    /// Short machine-readable tag, e.g. `uniform-symmetric` or
    /// `student_t1-symmetric`.
    pub fn tag(&self) -> String {
        use core::fmt::Write;
        let mut s = String::new();
        let fam = match self.family {
            Family::Uniform => "uniform",
            Family::Normal => "normal",
            Family::Lognormal => "lognormal",
            Family::Bimodal => "bimodal",
            Family::StudentT => "student_t",
        };
        s.push_str(fam);
        if self.family == Family::StudentT {
            let _ = write!(s, "{}", self.nu);
        }
        s.push('-');
        s.push_str(match self.support {
            Support::Symmetric => "symmetric",
            Support::Nonnegative => "nonnegative",
        });
        s
    }

    fn interval(&self) -> (i64, i64) {
        match self.support {
            Support::Symmetric => (-self.bound, self.bound),
            Support::Nonnegative => (0, self.bound),
        }
    }
}

/// Rounds half away from zero, then clips to `[lo, hi]`.
///
/// Infinite inputs saturate at the clip boundaries; this is how extreme
/// Cauchy draws end up exactly at `±B`.
fn round_clip(x: f64, lo: i64, hi: i64) -> i64 {
    let r = libm::round(x);
    (r as i64).clamp(lo, hi)
}

/// Samples `n` weights from `spec`. Deterministic in `(spec, n, seed)`.
pub fn sample_items(spec: &DistributionSpec, n: usize, seed: u64) -> Result<Vec<i64>> {
    spec.validate()?;
    let (lo, hi) = spec.interval();
    let b = spec.bound as f64;
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let v = match spec.family {
            Family::Uniform => rng.range_i64(lo, hi),
            Family::Normal => {
                let x = rng.normal() * (b / 3.0);
                let x = if spec.support == Support::Nonnegative {
                    libm::fabs(x)
                } else {
                    x
                };
                round_clip(x, lo, hi)
            }
            Family::Lognormal => {
                // Median B/8 with unit log-sd.
                let mag = (b / 8.0) * libm::exp(rng.normal());
                match spec.support {
                    Support::Nonnegative => round_clip(mag, lo, hi),
                    Support::Symmetric => {
                        let signed = if rng.next_bool() { mag } else { -mag };
                        round_clip(signed, lo, hi)
                    }
                }
            }
            Family::Bimodal => {
                let (m0, m1) = match spec.support {
                    Support::Symmetric => (-b / 3.0, b / 3.0),
                    Support::Nonnegative => (0.0, b),
                };
                let mode = if rng.next_bool() { m1 } else { m0 };
                round_clip(mode + rng.normal() * (b / 10.0), lo, hi)
            }
            Family::StudentT => {
                let z = rng.normal();
                let mut chi2 = 0.0;
                for _ in 0..spec.nu {
                    let g = rng.normal();
                    chi2 += g * g;
                }
                let t = z / libm::sqrt(chi2 / spec.nu as f64);
                let x = t * (b / 4.0);
                let x = if spec.support == Support::Nonnegative {
                    libm::fabs(x)
                } else {
                    x
                };
                round_clip(x, lo, hi)
            }
        };
        out.push(v);
    }
    Ok(out)
}

/// How the target of an instance is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetRule {
    /// Sum of a Bernoulli(1/2) subset of the items; the subset is returned
    /// as the planted solution, so an exact answer always exists.
    RandomSubset,
    /// `T = round(f * sum(items))` for `f` in `(0, 1]`; no planted subset.
    TailFraction(f64),
}

impl core::fmt::Display for TargetRule {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TargetRule::RandomSubset => write!(f, "random"),
            TargetRule::TailFraction(frac) => write!(f, "tail:{frac}"),
        }
    }
}

impl core::str::FromStr for TargetRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "random" {
            return Ok(TargetRule::RandomSubset);
        }
        if let Some(frac) = s.strip_prefix("tail:") {
            let frac: f64 = frac
                .parse()
                .map_err(|_| Error::invalid("tail target wants a numeric fraction"))?;
            if !(frac > 0.0 && frac <= 1.0) {
                return Err(Error::invalid("tail fraction must lie in (0, 1]"));
            }
            return Ok(TargetRule::TailFraction(frac));
        }
        Err(Error::invalid("target rule must be random or tail:F"))
    }
}

fn checked_total(items: &[i64]) -> Result<i64> {
    let mut acc: i64 = 0;
    for &x in items {
        acc = acc.checked_add(x).ok_or(Error::Overflow)?;
    }
    Ok(acc)
}

/// Sums `items` over the given indices, with overflow and bounds checks.
pub fn subset_sum(items: &[i64], subset: &[usize]) -> Result<i64> {
    let mut acc: i64 = 0;
    for &i in subset {
        let x = *items
            .get(i)
            .ok_or_else(|| Error::invalid("subset index out of range"))?;
        acc = acc.checked_add(x).ok_or(Error::Overflow)?;
    }
    Ok(acc)
}

/// Draws a target for `items` under `rule`.
///
/// Returns the target and, for [`TargetRule::RandomSubset`], the planted
/// index set whose sum equals the target exactly.
pub fn make_target(
    items: &[i64],
    rule: TargetRule,
    seed: u64,
) -> Result<(i64, Option<Vec<usize>>)> {
    match rule {
        TargetRule::RandomSubset => {
            if items.is_empty() {
                return Err(Error::invalid("random-subset target needs nonempty items"));
            }
            let mut rng = SplitMix64::new(seed);
            let mut planted = Vec::new();
            let mut total: i64 = 0;
            for (i, &x) in items.iter().enumerate() {
                if rng.next_bool() {
                    planted.push(i);
                    total = total.checked_add(x).ok_or(Error::Overflow)?;
                }
            }
            Ok((total, Some(planted)))
        }
        TargetRule::TailFraction(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::invalid("tail fraction must lie in (0, 1]"));
            }
            let total = checked_total(items)?;
            let t = libm::round(f * total as f64) as i64;
            Ok((t, None))
        }
    }
}

/// A subset sum instance: weights, magnitude bound, target, and an
/// optional planted solution.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Instance {
    pub items: Vec<i64>,
    #[cfg_attr(feature = "serde", serde(rename = "B"))]
    pub bound: i64,
    pub target: i64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub planted: Option<Vec<usize>>,
}

impl Instance {
    /// Builds an instance, validating every documented invariant.
    pub fn new(
        items: Vec<i64>,
        bound: i64,
        target: i64,
        planted: Option<Vec<usize>>,
    ) -> Result<Self> {
        if bound < 1 {
            return Err(Error::invalid("instance bound B must be >= 1"));
        }
        if items.len() as u64 > 1 << 62 {
            return Err(Error::invalid("instance size exceeds 2^62 guard"));
        }
        if items.iter().any(|&x| x == i64::MIN || x.unsigned_abs() > bound.unsigned_abs()) {
            return Err(Error::invalid("item magnitude exceeds bound B"));
        }
        if let Some(p) = &planted {
            if subset_sum(&items, p)? != target {
                return Err(Error::invalid("planted subset does not sum to target"));
            }
        }
        Ok(Instance {
            items,
            bound,
            target,
            planted,
        })
    }

    /// Samples items then draws a target; the two stages use independent
    /// streams derived from `seed`.
    pub fn generate(spec: &DistributionSpec, n: usize, rule: TargetRule, seed: u64) -> Result<Self> {
        let items = sample_items(spec, n, mix64(seed, 0))?;
        let (target, planted) = make_target(&items, rule, mix64(seed, 1))?;
        Ok(Instance {
            items,
            bound: spec.bound,
            target,
            planted,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// |sum - target| as an unsigned 64-bit distance.
    pub fn error_of(&self, sum: i64) -> u64 {
        (sum as i128 - self.target as i128).unsigned_abs() as u64
    }
}

/// Bookkeeping for one symmetrization: which indices were flipped and how
/// the target moved.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymmetrizationRecord {
    pub flipped: Vec<bool>,
    pub original_target: i64,
    pub new_target: i64,
}

impl SymmetrizationRecord {
    pub fn flipped_indices(&self) -> Vec<usize> {
        self.flipped
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Flips each index independently with probability 1/2, negating flipped
/// items and shifting the target by their original sum.
///
/// For any subset `V'` of the transformed instance,
/// `|sum'(V') - T'| = |sum(V) - T|` where `V = V' Δ flipped`, so the
/// achievable error profile is unchanged.
pub fn symmetrize(instance: &Instance, seed: u64) -> Result<(Instance, SymmetrizationRecord)> {
    let mut rng = SplitMix64::new(seed);
    let n = instance.len();
    let mut flipped = Vec::with_capacity(n);
    let mut items = Vec::with_capacity(n);
    let mut shift: i64 = 0;
    for &x in &instance.items {
        let f = rng.next_bool();
        flipped.push(f);
        if f {
            shift = shift.checked_add(x).ok_or(Error::Overflow)?;
            items.push(x.checked_neg().ok_or(Error::Overflow)?);
        } else {
            items.push(x);
        }
    }
    let new_target = instance.target.checked_sub(shift).ok_or(Error::Overflow)?;
    let record = SymmetrizationRecord {
        flipped,
        original_target: instance.target,
        new_target,
    };
    let planted = instance
        .planted
        .as_ref()
        .map(|p| xor_subset(p, &record.flipped));
    let out = Instance {
        items,
        bound: instance.bound,
        target: new_target,
        planted,
    };
    #[cfg(debug_assertions)]
    if let Some(p) = &out.planted {
        debug_assert_eq!(subset_sum(&out.items, p).unwrap(), out.target);
    }
    Ok((out, record))
}

fn xor_subset(subset: &[usize], flipped: &[bool]) -> Vec<usize> {
    let mut member = alloc::vec![false; flipped.len()];
    for &i in subset {
        member[i] = true;
    }
    (0..flipped.len()).filter(|&i| member[i] ^ flipped[i]).collect()
}

/// Maps a subset of the transformed instance back to original indices via
/// symmetric difference with the flipped set.
pub fn desymmetrize_subset(record: &SymmetrizationRecord, subset: &[usize]) -> Result<Vec<usize>> {
    if subset.iter().any(|&i| i >= record.flipped.len()) {
        return Err(Error::invalid("subset index out of range"));
    }
    Ok(xor_subset(subset, &record.flipped))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(family: Family, support: Support, b: i64) -> DistributionSpec {
        DistributionSpec::new(family, support, b)
    }

    #[test]
    fn rejects_bad_parameters() {
        let s = spec(Family::Uniform, Support::Symmetric, 0);
        assert!(sample_items(&s, 3, 1).is_err());
        let s = spec(Family::StudentT, Support::Symmetric, 10).with_nu(0);
        assert!(sample_items(&s, 3, 1).is_err());
    }

    #[test]
    fn zero_count_yields_empty() {
        let s = spec(Family::Normal, Support::Nonnegative, 100);
        assert!(sample_items(&s, 0, 9).unwrap().is_empty());
    }

    #[test]
    fn all_families_respect_support() {
        let b = 1_000_000;
        for family in [
            Family::Uniform,
            Family::Normal,
            Family::Lognormal,
            Family::Bimodal,
            Family::StudentT,
        ] {
            for support in [Support::Symmetric, Support::Nonnegative] {
                for nu in [1, 2] {
                    let s = spec(family, support, b).with_nu(nu);
                    let items = sample_items(&s, 2000, 11).unwrap();
                    let (lo, hi) = s.interval();
                    assert!(
                        items.iter().all(|&x| x >= lo && x <= hi),
                        "{:?} out of [{lo},{hi}]",
                        s.tag()
                    );
                }
            }
        }
    }

    #[test]
    fn uniform_paper_scale() {
        let s = spec(Family::Uniform, Support::Symmetric, 1_000_000_000_000);
        let items = sample_items(&s, 200, 1).unwrap();
        assert_eq!(items.len(), 200);
        assert!(items.iter().all(|&x| x.abs() <= 1_000_000_000_000));
    }

    #[test]
    fn uniform_sample_mean_near_zero() {
        // CLT bound computed from Var = B^2/3.
        let b = 1_000_000i64;
        let n = 100_000usize;
        let s = spec(Family::Uniform, Support::Symmetric, b);
        let items = sample_items(&s, n, 7).unwrap();
        let mean = items.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
        let tol = 3.0 * (b as f64) / libm::sqrt(3.0 * n as f64);
        assert!(mean.abs() <= tol, "mean {mean} tol {tol}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = spec(Family::Lognormal, Support::Symmetric, 1_000_000_000);
        assert_eq!(
            sample_items(&s, 500, 77).unwrap(),
            sample_items(&s, 500, 77).unwrap()
        );
    }

    #[test]
    fn random_subset_target_is_plantable() {
        let items = alloc::vec![5i64, -3, 8];
        // Enumerate all 8 subsets: every returned target must be among them.
        let mut feasible = Vec::new();
        for mask in 0u32..8 {
            let sum: i64 = (0..3).filter(|i| mask >> i & 1 == 1).map(|i| items[i]).sum();
            feasible.push(sum);
        }
        for seed in 0..32 {
            let (t, planted) = make_target(&items, TargetRule::RandomSubset, seed).unwrap();
            let planted = planted.unwrap();
            assert!(feasible.contains(&t));
            assert_eq!(subset_sum(&items, &planted).unwrap(), t);
        }
        // Some seed produces the {0, 2} subset with sum 13.
        let hit = (0..1000).any(|seed| {
            let (t, p) = make_target(&items, TargetRule::RandomSubset, seed).unwrap();
            t == 13 && p.unwrap() == alloc::vec![0, 2]
        });
        assert!(hit);
        // And some seed produces the empty subset with sum 0.
        let empty = (0..1000).any(|seed| {
            let (t, p) = make_target(&items, TargetRule::RandomSubset, seed).unwrap();
            t == 0 && p.unwrap().is_empty()
        });
        assert!(empty);
    }

    #[test]
    fn tail_fraction_target() {
        let items = alloc::vec![4i64; 100];
        let (t, planted) = make_target(&items, TargetRule::TailFraction(0.75), 0).unwrap();
        assert_eq!(t, 300);
        assert!(planted.is_none());
        assert!(make_target(&items, TargetRule::TailFraction(0.0), 0).is_err());
        assert!(make_target(&items, TargetRule::TailFraction(1.5), 0).is_err());
    }

    #[test]
    fn symmetrize_identity_and_full_flip() {
        let inst = Instance::new(alloc::vec![3, -2, 7], 10, 5, None).unwrap();
        // Hunt seeds with no flips and with all flips (n = 3, so both are common).
        let mut saw_none = false;
        let mut saw_all = false;
        for seed in 0..200 {
            let (out, rec) = symmetrize(&inst, seed).unwrap();
            if rec.flipped.iter().all(|&f| !f) {
                assert_eq!(out.items, inst.items);
                assert_eq!(out.target, inst.target);
                saw_none = true;
            }
            if rec.flipped.iter().all(|&f| f) {
                assert_eq!(out.items, alloc::vec![-3, 2, -7]);
                assert_eq!(out.target, 5 - (3 - 2 + 7));
                saw_all = true;
            }
        }
        assert!(saw_none && saw_all);
    }

    #[test]
    fn desymmetrize_examples() {
        let rec = SymmetrizationRecord {
            flipped: alloc::vec![false, false, false, false],
            original_target: 0,
            new_target: 0,
        };
        assert_eq!(desymmetrize_subset(&rec, &[1, 3]).unwrap(), alloc::vec![1, 3]);
        let rec = SymmetrizationRecord {
            flipped: alloc::vec![false, true, false, false],
            original_target: 0,
            new_target: 0,
        };
        assert_eq!(desymmetrize_subset(&rec, &[1, 3]).unwrap(), alloc::vec![3]);
        let rec = SymmetrizationRecord {
            flipped: alloc::vec![true, false, true],
            original_target: 0,
            new_target: 0,
        };
        assert_eq!(desymmetrize_subset(&rec, &[]).unwrap(), alloc::vec![0, 2]);
        assert!(desymmetrize_subset(&rec, &[5]).is_err());
    }

    #[test]
    fn symmetrize_preserves_error_profile_exhaustively() {
        // For n = 10, over all 2^n subsets, the multiset of |sum - T| values
        // must be identical before and after the transform.
        let spec = spec(Family::Uniform, Support::Nonnegative, 1000);
        let items = sample_items(&spec, 10, 3).unwrap();
        let (t, _) = make_target(&items, TargetRule::RandomSubset, 4).unwrap();
        let inst = Instance::new(items.clone(), 1000, t, None).unwrap();
        let (out, rec) = symmetrize(&inst, 99).unwrap();

        let n = items.len();
        let mut before: Vec<u64> = Vec::new();
        let mut after: Vec<u64> = Vec::new();
        for mask in 0u32..1 << n {
            let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            before.push(inst.error_of(subset_sum(&inst.items, &subset).unwrap()));
            after.push(out.error_of(subset_sum(&out.items, &subset).unwrap()));
            // And the per-subset mapping preserves the error exactly.
            let mapped = desymmetrize_subset(&rec, &subset).unwrap();
            assert_eq!(
                inst.error_of(subset_sum(&inst.items, &mapped).unwrap()),
                out.error_of(subset_sum(&out.items, &subset).unwrap())
            );
        }
        before.sort_unstable();
        after.sort_unstable();
        assert_eq!(before, after);
    }

    #[test]
    fn instance_validation() {
        assert!(Instance::new(alloc::vec![11], 10, 0, None).is_err());
        assert!(Instance::new(alloc::vec![1], 0, 0, None).is_err());
        assert!(Instance::new(alloc::vec![1, 2], 10, 4, Some(alloc::vec![0])).is_err());
        assert!(Instance::new(alloc::vec![1, 2], 10, 3, Some(alloc::vec![0, 1])).is_ok());
    }
}
