//! Approximate minimum over candidates reachable only through an imperfect
//! pairwise comparison.

use crate::error::{Error, Result};

/// Answer of a two-way comparison between `(first, second)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoWay {
    First,
    Second,
}

/// Answer of a three-way comparison; `Unknown` means "too close to call".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeWay {
    First,
    Second,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinResult {
    pub index: usize,
    /// Number of comparator invocations.
    pub comparisons: u64,
}

/// Comparator invocations spent by a completed run.
pub fn comparison_count(run: &MinResult) -> u64 {
    run.comparisons
}

/// `max(1, ceil(log2(log2(max(n, 4)))))`.
pub fn log_log(n: usize) -> usize {
    let n = n.max(4) as f64;
    (n.log2().log2().ceil() as usize).max(1)
}

/// Keeps a champion and replaces it only when a challenger is reported
/// nearer with certainty. Uses exactly `len - 1` comparisons.
pub fn scan_min<F>(indices: &[usize], mut cmp: F) -> Result<MinResult>
where
    F: FnMut(usize, usize) -> ThreeWay,
{
    let (&first, rest) = indices.split_first().ok_or(Error::Empty)?;
    let mut champion = first;
    let mut comparisons = 0;
    for &challenger in rest {
        comparisons += 1;
        if cmp(champion, challenger) == ThreeWay::Second {
            champion = challenger;
        }
    }
    Ok(MinResult {
        index: champion,
        comparisons,
    })
}

/// Recursive square-root partition tournament.
///
/// A set of more than two candidates is cut into `ceil(sqrt(s))` contiguous
/// blocks of `ceil(s / blocks)` (the last possibly smaller); block winners
/// are found recursively and then play a round robin. The winner with most
/// wins is returned, ties going to the lowest index.
pub fn tournament_min<F>(indices: &[usize], mut cmp: F) -> Result<MinResult>
where
    F: FnMut(usize, usize) -> TwoWay,
{
    if indices.is_empty() {
        return Err(Error::Empty);
    }
    let mut comparisons = 0;
    let index = recurse(indices, &mut cmp, &mut comparisons);
    Ok(MinResult { index, comparisons })
}

fn recurse<F>(s: &[usize], cmp: &mut F, count: &mut u64) -> usize
where
    F: FnMut(usize, usize) -> TwoWay,
{
    match s {
        [only] => *only,
        [a, b] => {
            *count += 1;
            match cmp(*a, *b) {
                TwoWay::First => *a,
                TwoWay::Second => *b,
            }
        }
        _ => {
            let blocks = (s.len() as f64).sqrt().ceil() as usize;
            let size = s.len().div_ceil(blocks);
            let winners: Vec<usize> = s.chunks(size).map(|c| recurse(c, cmp, count)).collect();
            let mut wins = vec![0u32; winners.len()];
            for i in 0..winners.len() {
                for j in i + 1..winners.len() {
                    *count += 1;
                    match cmp(winners[i], winners[j]) {
                        TwoWay::First => wins[i] += 1,
                        TwoWay::Second => wins[j] += 1,
                    }
                }
            }
            let mut best = 0;
            for k in 1..winners.len() {
                if wins[k] > wins[best] || (wins[k] == wins[best] && winners[k] < winners[best]) {
                    best = k;
                }
            }
            winners[best]
        }
    }
}
