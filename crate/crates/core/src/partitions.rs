//! Set-partition combinatorics.
//!
//! Every cumulant formula in this crate sums a product over the blocks of a
//! set partition of `[m]`, and the summand only depends on the block sizes.
//! We therefore group partitions by their block-size multiset and carry the
//! exact number of set partitions sharing each multiset.

use crate::error::{AceError, Result};

/// Largest `m` accepted by the exact routines. `Bell(20)` and `20!` fit
/// comfortably in `u128`.
pub const MAX_PARTITION_ORDER: usize = 20;

/// A multiset of block sizes together with the number of set partitions of
/// `[m]` that have exactly these block sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSizeProfile {
    /// Block sizes, sorted in non-increasing order.
    pub sizes: Vec<usize>,
    /// Number of set partitions with this block-size multiset.
    pub multiplicity: u128,
}

impl BlockSizeProfile {
    /// Sum of block sizes.
    pub fn order(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Number of blocks `|π|`.
    pub fn block_count(&self) -> usize {
        self.sizes.len()
    }
}

/// Whether to attach the `(-1)^{#blocks}` factor in [`partition_weighted_sum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSign {
    /// Multiply each term by `(-1)^{|π|}`.
    Alternating,
    /// No sign factor.
    Unsigned,
}

fn check_order(m: usize) -> Result<()> {
    if m > MAX_PARTITION_ORDER {
        return Err(AceError::Capacity {
            what: "partition order",
            value: m,
            max: MAX_PARTITION_ORDER,
        });
    }
    Ok(())
}

/// Exact `k!` for `k <= 20`.
pub(crate) fn factorial_u128(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// `m!` as a float, exact for `m <= 20` (well inside the 53-bit mantissa up
/// to 18!, and correctly rounded beyond).
pub fn factorial(m: usize) -> f64 {
    factorial_u128(m) as f64
}

fn multiplicity(m: usize, sizes: &[usize]) -> u128 {
    // m! / prod_j (j!)^{c_j} c_j!
    let mut denom: u128 = 1;
    let mut i = 0;
    while i < sizes.len() {
        let j = sizes[i];
        let mut c = 0;
        while i < sizes.len() && sizes[i] == j {
            c += 1;
            i += 1;
        }
        denom *= factorial_u128(j).pow(c as u32) * factorial_u128(c);
    }
    factorial_u128(m) / denom
}

/// All block-size profiles of `[m]`, in descending lexicographic order of
/// the (non-increasing) size lists. `m = 0` yields the single empty profile.
pub fn block_size_profiles(m: usize) -> Result<Vec<BlockSizeProfile>> {
    check_order(m)?;
    let mut out = Vec::new();
    let mut current = Vec::new();
    integer_partitions(m, m, &mut current, &mut |sizes| {
        out.push(BlockSizeProfile {
            sizes: sizes.to_vec(),
            multiplicity: multiplicity(m, sizes),
        })
    });
    Ok(out)
}

// Emits integer partitions of `remaining` with parts <= `max_part`, largest
// parts first, which gives descending lexicographic order.
fn integer_partitions(
    remaining: usize,
    max_part: usize,
    current: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if remaining == 0 {
        emit(current);
        return;
    }
    for part in (1..=max_part.min(remaining)).rev() {
        current.push(part);
        integer_partitions(remaining - part, part, current, emit);
        current.pop();
    }
}

/// Bell number `B(m)`: the number of set partitions of `[m]`.
pub fn bell_number(m: usize) -> Result<u128> {
    Ok(block_size_profiles(m)?
        .iter()
        .map(|p| p.multiplicity)
        .sum())
}

/// `Σ_{π ∈ Π_m} [(-1)^{|π|}] Π_{B ∈ π} weight(|B|)`, where `weights[j - 1]`
/// holds `weight(j)`.
pub fn partition_weighted_sum(m: usize, weights: &[f64], sign: BlockSign) -> Result<f64> {
    check_order(m)?;
    if weights.len() < m {
        return Err(AceError::InvalidArgument(format!(
            "weights given for orders 1..={} but order {m} requested",
            weights.len()
        )));
    }
    let total = block_size_profiles(m)?
        .iter()
        .map(|profile| {
            let product: f64 = profile.sizes.iter().map(|&j| weights[j - 1]).product();
            let signed = match sign {
                BlockSign::Alternating if profile.block_count() % 2 == 1 => -product,
                _ => product,
            };
            profile.multiplicity as f64 * signed
        })
        .sum();
    Ok(total)
}
