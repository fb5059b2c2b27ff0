//! Decision regions and bit positions of Gray-coded M-PAM.
//!
//! For a K-bit PAM labeled by the standard binary reflected Gray code, the
//! k-th labeling bit partitions the received axis into 2^(k-1) + 1 intervals
//! that alternate between deciding `1` and `0`. All levels are exact integer
//! multiples of the half symbol spacing d; d itself only enters when the
//! closed-form BER is evaluated, so everything here is integer arithmetic.
//!
//! Two independent routes produce the same layout: the analytic boundary
//! function [`delta`] with its index grids, and a brute-force run scan of the
//! constructed sequence ([`brute_force_layout`]). Their equality is the
//! central self-check of the crate.

use std::fmt;

use crate::graycode::{self, GrayCodeSequence};
use crate::{Error, Result};

/// Largest K accepted by the brute-force scan.
pub const MAX_BRUTE_FORCE_BITS: u32 = 12;

/// An amplitude level in units of d, possibly unbounded.
///
/// Finite region endpoints are even integers; finite symbol positions are odd
/// integers. The ordering places `NegInf` below every finite value and
/// `PosInf` above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedLevel {
    NegInf,
    Finite(i64),
    PosInf,
}

impl ExtendedLevel {
    pub fn as_f64(self) -> f64 {
        match self {
            ExtendedLevel::NegInf => f64::NEG_INFINITY,
            ExtendedLevel::Finite(v) => v as f64,
            ExtendedLevel::PosInf => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            ExtendedLevel::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for ExtendedLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedLevel::NegInf => write!(f, "-inf"),
            ExtendedLevel::Finite(v) => write!(f, "{v}"),
            ExtendedLevel::PosInf => write!(f, "+inf"),
        }
    }
}

/// A point on the index grid the boundary function is evaluated on.
///
/// Stored in quarter units so that the half- and three-quarter-step entries
/// of the position index grids are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GridCoordinate {
    quarters: i64,
}

impl GridCoordinate {
    pub const fn from_int(v: i64) -> Self {
        Self { quarters: 4 * v }
    }

    /// Builds a coordinate from quarter units (e.g. -3 for -3/4).
    pub const fn from_quarters(quarters: i64) -> Self {
        Self { quarters }
    }

    pub const fn quarters(self) -> i64 {
        self.quarters
    }

    /// The coordinate 2x + c for integer c.
    const fn double_plus(self, c: i64) -> Self {
        Self {
            quarters: 2 * self.quarters + 4 * c,
        }
    }
}

impl fmt::Display for GridCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.quarters % 4 == 0 {
            write!(f, "{}", self.quarters / 4)
        } else {
            write!(f, "{}/4", self.quarters)
        }
    }
}

/// Half-open interval [lower, upper) in units of d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lower: ExtendedLevel,
    pub upper: ExtendedLevel,
}

impl Interval {
    /// Membership under the lower <= r < upper convention.
    pub fn contains(&self, r: f64) -> bool {
        self.lower.as_f64() <= r && r < self.upper.as_f64()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lower, self.upper)
    }
}

/// Decision regions and symbol positions of one labeling bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitLayout {
    pub bits_per_symbol: u32,
    pub bit_index: u32,
    pub regions_one: Vec<Interval>,
    pub regions_zero: Vec<Interval>,
    pub positions_one: Vec<i64>,
    pub positions_zero: Vec<i64>,
}

fn validate_pair(bits_per_symbol: u32, bit_index: u32) -> Result<()> {
    if !(1..=graycode::MAX_BITS).contains(&bits_per_symbol) {
        return Err(Error::Domain(format!(
            "bits per symbol must be in 1..={}, got {bits_per_symbol}",
            graycode::MAX_BITS
        )));
    }
    if !(1..=bits_per_symbol).contains(&bit_index) {
        return Err(Error::Domain(format!(
            "bit index must be in 1..={bits_per_symbol}, got {bit_index}"
        )));
    }
    Ok(())
}

/// The boundary function: maps a grid coordinate to the region endpoint
/// -2^K (1 - 2^(1-k)) + x 2^(K-k+2) in units of d, with x = -1 and
/// x = 2^(k-1) mapping to the unbounded ends.
pub fn delta(x: GridCoordinate, bits_per_symbol: u32, bit_index: u32) -> Result<ExtendedLevel> {
    validate_pair(bits_per_symbol, bit_index)?;
    let (kk, k) = (bits_per_symbol, bit_index);
    let q = x.quarters();
    let top = 4i64 << (k - 1); // 2^(k-1) in quarter units
    if q < -4 || q > top {
        return Err(Error::Domain(format!(
            "grid coordinate {x} outside [-1, 2^{}]",
            k - 1
        )));
    }
    if q == -4 {
        return Ok(ExtendedLevel::NegInf);
    }
    if q == top {
        return Ok(ExtendedLevel::PosInf);
    }
    // x * 2^(K-k+2) = q * 2^(K-k); exact for every quarter-unit x since k <= K.
    let v = (q << (kk - k)) - (1i64 << kk) + (2i64 << (kk - k));
    Ok(ExtendedLevel::Finite(v))
}

/// Index grid for the bit-1 regions: -1, then 0 .. 2^(k-2) - 1 for k >= 2.
fn region_indices_one(bit_index: u32) -> Vec<GridCoordinate> {
    let mut v = vec![GridCoordinate::from_int(-1)];
    if bit_index >= 2 {
        v.extend((0..1i64 << (bit_index - 2)).map(GridCoordinate::from_int));
    }
    v
}

/// Index grid for the bit-0 regions: -1, then 0 .. 2^(k-2) - 2 for k >= 2.
fn region_indices_zero(bit_index: u32) -> Vec<GridCoordinate> {
    let mut v = vec![GridCoordinate::from_int(-1)];
    if bit_index >= 2 {
        v.extend((0..(1i64 << (bit_index - 2)) - 1).map(GridCoordinate::from_int));
    }
    v
}

/// Index grid for the bit-1 positions: -3/4, then 0 .. 2^(k-2) - 1. The -3/4
/// head makes 2x + 1 = -1/2, which bounds the leftmost region at -2^K.
fn position_indices_one(bit_index: u32) -> Vec<GridCoordinate> {
    let mut v = vec![GridCoordinate::from_quarters(-3)];
    if bit_index >= 2 {
        v.extend((0..1i64 << (bit_index - 2)).map(GridCoordinate::from_int));
    }
    v
}

/// The decision regions of bit k: bit-1 intervals bounded by consecutive odd
/// and even grid points, bit-0 intervals by consecutive even and odd ones.
pub fn region_sets(bits_per_symbol: u32, bit_index: u32) -> Result<(Vec<Interval>, Vec<Interval>)> {
    validate_pair(bits_per_symbol, bit_index)?;
    let ones = region_indices_one(bit_index)
        .into_iter()
        .map(|p| {
            Ok(Interval {
                lower: delta(p.double_plus(1), bits_per_symbol, bit_index)?,
                upper: delta(p.double_plus(2), bits_per_symbol, bit_index)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let zeros = region_indices_zero(bit_index)
        .into_iter()
        .map(|p| {
            Ok(Interval {
                lower: delta(p.double_plus(2), bits_per_symbol, bit_index)?,
                upper: delta(p.double_plus(3), bits_per_symbol, bit_index)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((ones, zeros))
}

/// Length, in units of d, of the region starting at grid point `x` once the
/// unbounded ends are capped at +-2^K. `x` must be an element of the
/// augmented grid (-1/2, 0, 1, ..., 2^(k-1) - 1, 2^(k-1) - 1/2) other than
/// the last.
pub fn region_length(x: GridCoordinate, bits_per_symbol: u32, bit_index: u32) -> Result<i64> {
    validate_pair(bits_per_symbol, bit_index)?;
    let (kk, k) = (bits_per_symbol, bit_index);
    let q = x.quarters();
    let last_int = (1i64 << (k - 1)) - 1; // largest integer grid entry
    let top_q = (4i64 << (k - 1)) - 2; // 2^(k-1) - 1/2 in quarters
    let successor_q = if q == -2 {
        0
    } else if q >= 0 && q % 4 == 0 && q / 4 <= last_int {
        if q / 4 == last_int {
            top_q
        } else {
            q + 4
        }
    } else {
        return Err(Error::Domain(format!(
            "{x} is not a region grid point with a successor for k = {k}"
        )));
    };
    // (successor - x) * 2^(K-k+2), computed in quarter units.
    Ok((successor_q - q) << (kk - k))
}

/// The symbol positions carrying bit value 1 and 0: each capped region of one
/// bit value is filled with consecutive odd levels starting just above its
/// lower boundary.
pub fn position_sets(bits_per_symbol: u32, bit_index: u32) -> Result<(Vec<i64>, Vec<i64>)> {
    validate_pair(bits_per_symbol, bit_index)?;
    let fill = |start: GridCoordinate| -> Result<Vec<i64>> {
        let base = delta(start, bits_per_symbol, bit_index)?
            .finite()
            .expect("capped region boundaries are finite");
        let len = region_length(start, bits_per_symbol, bit_index)?;
        Ok((0..len / 2).map(|j| base + 2 * j + 1).collect())
    };
    let mut ones = Vec::with_capacity(1 << (bits_per_symbol - 1));
    for x in position_indices_one(bit_index) {
        ones.extend(fill(x.double_plus(1))?);
    }
    let mut zeros = Vec::with_capacity(1 << (bits_per_symbol - 1));
    for x in region_indices_zero(bit_index) {
        zeros.extend(fill(x.double_plus(2))?);
    }
    Ok((ones, zeros))
}

/// The full analytic layout of one bit.
pub fn analytic_layout(bits_per_symbol: u32, bit_index: u32) -> Result<BitLayout> {
    let (regions_one, regions_zero) = region_sets(bits_per_symbol, bit_index)?;
    let (positions_one, positions_zero) = position_sets(bits_per_symbol, bit_index)?;
    Ok(BitLayout {
        bits_per_symbol,
        bit_index,
        regions_one,
        regions_zero,
        positions_one,
        positions_zero,
    })
}

/// Layout of bit k under an arbitrary labeling: codeword i sits at level
/// -2^n + 1 + 2i, regions are maximal runs of equal bit value with
/// boundaries at the run midpoints and unbounded extremes.
pub fn layout_from_labeling(seq: &GrayCodeSequence, bit_index: u32) -> Result<BitLayout> {
    let n = seq.bits();
    if !(1..=n).contains(&bit_index) {
        return Err(Error::Domain(format!(
            "bit index must be in 1..={n}, got {bit_index}"
        )));
    }
    let m = seq.len();
    let level = |i: usize| -(m as i64) + 1 + 2 * i as i64;
    let mut regions_one = Vec::new();
    let mut regions_zero = Vec::new();
    let mut positions_one = Vec::new();
    let mut positions_zero = Vec::new();
    let mut start = 0usize;
    for i in 0..m {
        let bit = seq.bit(i, bit_index);
        if bit == 1 {
            positions_one.push(level(i));
        } else {
            positions_zero.push(level(i));
        }
        let run_ends = i + 1 == m || seq.bit(i + 1, bit_index) != bit;
        if run_ends {
            let lower = if start == 0 {
                ExtendedLevel::NegInf
            } else {
                ExtendedLevel::Finite(level(start) - 1)
            };
            let upper = if i + 1 == m {
                ExtendedLevel::PosInf
            } else {
                ExtendedLevel::Finite(level(i) + 1)
            };
            let interval = Interval { lower, upper };
            if bit == 1 {
                regions_one.push(interval);
            } else {
                regions_zero.push(interval);
            }
            start = i + 1;
        }
    }
    Ok(BitLayout {
        bits_per_symbol: n,
        bit_index,
        regions_one,
        regions_zero,
        positions_one,
        positions_zero,
    })
}

/// Brute-force oracle: the layout of bit k read off the constructed standard
/// sequence instead of the analytic formulas.
pub fn brute_force_layout(bits_per_symbol: u32, bit_index: u32) -> Result<BitLayout> {
    if bits_per_symbol > MAX_BRUTE_FORCE_BITS {
        return Err(Error::Domain(format!(
            "brute-force scan supports up to {MAX_BRUTE_FORCE_BITS} bits, got {bits_per_symbol}"
        )));
    }
    validate_pair(bits_per_symbol, bit_index)?;
    layout_from_labeling(&graycode::brgc(bits_per_symbol)?, bit_index)
}

/// Value of the k-th column of the standard K-bit labeling at slot `i`,
/// computed arithmetically from the run-length pattern.
#[inline]
pub(crate) fn column_bit(bits_per_symbol: u32, bit_index: u32, slot: i64) -> u8 {
    let shift = bits_per_symbol - bit_index;
    (1 - (((slot + (1i64 << shift)) >> (shift + 1)) & 1)) as u8
}

/// Decides bit k from a received amplitude `r` in units of d.
///
/// Membership follows the lower <= r < upper convention on every region; for
/// k = 1 the tie at r = 0 decodes as 1. The unbounded end regions extend to
/// +-infinity.
///
/// Panics if the (K, k) pair is invalid; `r` must be finite.
pub fn decide_bit(r: f64, bits_per_symbol: u32, bit_index: u32) -> u8 {
    assert!(
        validate_pair(bits_per_symbol, bit_index).is_ok(),
        "invalid (K, k) = ({bits_per_symbol}, {bit_index})"
    );
    if bit_index == 1 {
        return u8::from(r <= 0.0);
    }
    let m = 1i64 << bits_per_symbol;
    // Slot i covers [-2^K + 2i, -2^K + 2i + 2); saturating cast + clamp folds
    // the unbounded end regions onto the outermost slots.
    let slot = (((r + m as f64) / 2.0).floor() as i64).clamp(0, m - 1);
    column_bit(bits_per_symbol, bit_index, slot)
}
