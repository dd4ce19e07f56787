//! Exact minimum-error oracle.
//!
//! Small instances (n <= 24) are solved by half enumeration: both halves
//! are enumerated, the right half is sorted, and a binary search per left
//! sum finds the closest completion. Larger instances with small total
//! mass (sum of |items| <= 10^7) fall back to an offset dynamic program
//! over reachable sums that handles negatives. Beyond both limits the
//! instance is rejected.

use alloc::vec::Vec;

use crate::error::{Error, Result};

const MAX_ENUM_N: usize = 24;
const MAX_DP_MASS: u64 = 10_000_000;

/// Exact optimum of `min over subsets |sum - T|` with a witness subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub min_error: u64,
    pub witness: Vec<usize>,
}

/// Computes the exact minimum error and a witness subset.
pub fn exact_min_error(items: &[i64], target: i64) -> Result<OracleResult> {
    if items.len() <= MAX_ENUM_N {
        return half_enumeration(items, target);
    }
    let mass: u64 = items.iter().map(|&x| x.unsigned_abs()).sum();
    if mass <= MAX_DP_MASS {
        return offset_dp(items, target);
    }
    Err(Error::OracleTooLarge {
        max_n: MAX_ENUM_N,
        max_mass: MAX_DP_MASS,
    })
}

/// Enumerates all subset sums of `items` as (sum, inclusion mask) pairs.
fn enumerate_half(items: &[i64]) -> Result<Vec<(i64, u32)>> {
    let n = items.len();
    let mut out = Vec::with_capacity(1 << n);
    out.push((0i64, 0u32));
    for (i, &x) in items.iter().enumerate() {
        let len = out.len();
        for j in 0..len {
            let (s, m) = out[j];
            out.push((s.checked_add(x).ok_or(Error::Overflow)?, m | 1 << i));
        }
    }
    Ok(out)
}

fn half_enumeration(items: &[i64], target: i64) -> Result<OracleResult> {
    let mid = items.len() / 2;
    let left = enumerate_half(&items[..mid])?;
    let mut right = enumerate_half(&items[mid..])?;
    right.sort_unstable();
    let mut best: Option<(u64, u32, u32)> = None;
    for &(ls, lm) in &left {
        let want = target as i128 - ls as i128;
        let pos = right.partition_point(|&(r, _)| (r as i128) < want);
        for p in [pos.wrapping_sub(1), pos] {
            if let Some(&(rs, rm)) = right.get(p) {
                let total = ls as i128 + rs as i128;
                let d = (total - target as i128).unsigned_abs() as u64;
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, lm, rm));
                }
            }
        }
        if matches!(best, Some((0, _, _))) {
            break;
        }
    }
    let (min_error, lm, rm) = best.expect("halves always contain the empty sum");
    let mut witness: Vec<usize> = (0..mid).filter(|i| lm >> i & 1 == 1).collect();
    witness.extend((0..items.len() - mid).filter(|i| rm >> i & 1 == 1).map(|i| i + mid));
    Ok(OracleResult { min_error, witness })
}

/// Fixed-size bitset over sum offsets.
struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    fn new(len: usize) -> Self {
        BitSet {
            words: alloc::vec![0; len.div_ceil(64)],
            len,
        }
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// `self |= other << shift` for `shift >= 0`, reporting which bits are
    /// newly set through `on_new`.
    fn or_shifted_left(&mut self, other: &[u64], shift: usize, mut on_new: impl FnMut(usize)) {
        let (words, bits) = (shift / 64, shift % 64);
        for w in (0..self.words.len()).rev() {
            if w < words {
                break;
            }
            let mut v = other[w - words] << bits;
            if bits > 0 && w > words {
                v |= other[w - words - 1] >> (64 - bits);
            }
            let new = v & !self.words[w];
            if new != 0 {
                self.words[w] |= new;
                report_bits(new, w, self.len, &mut on_new);
            }
        }
    }

    /// `self |= other >> shift`, reporting newly set bits.
    fn or_shifted_right(&mut self, other: &[u64], shift: usize, mut on_new: impl FnMut(usize)) {
        let (words, bits) = (shift / 64, shift % 64);
        for w in 0..self.words.len() {
            let src = w + words;
            if src >= other.len() {
                break;
            }
            let mut v = other[src] >> bits;
            if bits > 0 && src + 1 < other.len() {
                v |= other[src + 1] << (64 - bits);
            }
            let new = v & !self.words[w];
            if new != 0 {
                self.words[w] |= new;
                report_bits(new, w, self.len, &mut on_new);
            }
        }
    }
}

fn report_bits(mut word: u64, word_index: usize, len: usize, on_new: &mut impl FnMut(usize)) {
    while word != 0 {
        let b = word.trailing_zeros() as usize;
        let idx = word_index * 64 + b;
        if idx < len {
            on_new(idx);
        }
        word &= word - 1;
    }
}

fn offset_dp(items: &[i64], target: i64) -> Result<OracleResult> {
    let neg: u64 = items
        .iter()
        .filter(|&&x| x < 0)
        .map(|&x| x.unsigned_abs())
        .sum();
    let pos: u64 = items.iter().filter(|&&x| x > 0).map(|&x| x as u64).sum();
    let range = (neg + pos) as usize;
    let zero = neg as usize;
    let mut reachable = BitSet::new(range + 1);
    reachable.set(zero);
    // First item index that reached each offset; u32::MAX marks the base.
    let mut first_reached: Vec<u32> = alloc::vec![u32::MAX; range + 1];
    for (i, &x) in items.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let snapshot = reachable.words.clone();
        let record = |idx: usize| idx;
        let _ = record;
        if x > 0 {
            reachable.or_shifted_left(&snapshot, x as usize, |idx| {
                first_reached[idx] = i as u32;
            });
        } else {
            reachable.or_shifted_right(&snapshot, x.unsigned_abs() as usize, |idx| {
                first_reached[idx] = i as u32;
            });
        }
    }
    // Nearest reachable offset to the target.
    let target_off = target as i128 + zero as i128;
    let found = if target_off < 0 {
        (0..=range).find(|&p| reachable.get(p))
    } else if target_off > range as i128 {
        (0..=range).rev().find(|&p| reachable.get(p))
    } else {
        let center = target_off as usize;
        (0..=range)
            .map(|d| [center.checked_sub(d), center.checked_add(d)])
            .flat_map(|pair| pair.into_iter().flatten())
            .find(|&p| p <= range && reachable.get(p))
    };
    let found = found.expect("the empty sum is always reachable");
    let sum = found as i128 - zero as i128;
    let min_error = (sum - target as i128).unsigned_abs() as u64;
    // Backtrack: first-reach item indices strictly decrease along the
    // chain, so this terminates with a valid 0/1 witness.
    let mut witness = Vec::new();
    let mut at = found;
    while at != zero {
        let i = first_reached[at];
        debug_assert_ne!(i, u32::MAX, "non-base offset without a first-reach item");
        witness.push(i as usize);
        at = (at as i128 - items[i as usize] as i128) as usize;
    }
    witness.sort_unstable();
    witness.dedup();
    Ok(OracleResult { min_error, witness })
}
