//! Binary reflected Gray code sequences and their bit structure.
//!
//! The standard sequence starts from the 1-bit sequence `(1, 0)`; each wider
//! sequence prefixes the previous one with `1` and its reflection with `0`.
//! Permuting bit positions and/or complementing bits turns the standard
//! sequence into any of the other Gray labelings; those transforms preserve
//! the Gray property (and the overall PAM BER, which is what makes the
//! standard sequence a sufficient basis for the closed-form analysis).

use std::fmt;

use crate::{Error, Result};

/// Largest supported codeword width. Keeps every 2^n enumeration cheap;
/// wider requests are rejected instead of silently crawling.
pub const MAX_BITS: u32 = 16;

/// An ordered list of 2^n distinct n-bit codewords.
///
/// Codewords are stored as integers with labeling bit 1 (the leftmost bit
/// `b_1`) in the most significant position. Codeword `i` (0-based) labels the
/// i-th leftmost constellation amplitude: the first half of the sequence sits
/// on the negative levels, the second half on the positive ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayCodeSequence {
    n: u32,
    words: Vec<u32>,
}

impl GrayCodeSequence {
    /// Builds a sequence from raw codewords, validating count, width, and
    /// distinctness. The words do not have to form a Gray sequence; arbitrary
    /// labelings are allowed so the generic BER path can consume them.
    pub fn from_words(n: u32, words: Vec<u32>) -> Result<Self> {
        if !(1..=MAX_BITS).contains(&n) {
            return Err(Error::Domain(format!(
                "codeword width must be in 1..={MAX_BITS}, got {n}"
            )));
        }
        if words.len() != 1usize << n {
            return Err(Error::Domain(format!(
                "expected {} codewords, got {}",
                1usize << n,
                words.len()
            )));
        }
        if words.iter().any(|&w| w >> n != 0) {
            return Err(Error::Domain(format!("codeword wider than {n} bits")));
        }
        let mut seen = vec![false; 1 << n];
        for &w in &words {
            if seen[w as usize] {
                return Err(Error::Domain(format!(
                    "duplicate codeword {w:0width$b}",
                    width = n as usize
                )));
            }
            seen[w as usize] = true;
        }
        Ok(Self { n, words })
    }

    /// Bits per codeword.
    pub fn bits(&self) -> u32 {
        self.n
    }

    /// Number of codewords (always 2^n).
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Codewords as packed integers, leftmost labeling bit most significant.
    pub fn words(&self) -> &[u32] {
        &self.words
    }

    /// Value of labeling bit `k` (1-based from the left) of codeword `i`.
    pub fn bit(&self, i: usize, k: u32) -> u8 {
        debug_assert!(k >= 1 && k <= self.n);
        ((self.words[i] >> (self.n - k)) & 1) as u8
    }

    /// Codeword `i` rendered as a binary string of width n.
    pub fn word_string(&self, i: usize) -> String {
        format!("{:0width$b}", self.words[i], width = self.n as usize)
    }
}

impl fmt::Display for GrayCodeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", self.word_string(i))?;
        }
        Ok(())
    }
}

/// Builds the standard n-bit binary reflected Gray code sequence.
///
/// The 1-bit sequence is `(1, 0)`; each step prefixes the current sequence
/// with `1` and appends the reflected sequence prefixed with `0`.
pub fn brgc(n: u32) -> Result<GrayCodeSequence> {
    if !(1..=MAX_BITS).contains(&n) {
        return Err(Error::Domain(format!(
            "codeword width must be in 1..={MAX_BITS}, got {n}"
        )));
    }
    let mut words: Vec<u32> = vec![1, 0];
    for m in 2..=n {
        let prefix = 1u32 << (m - 1);
        let mut next = Vec::with_capacity(words.len() * 2);
        next.extend(words.iter().map(|&w| w | prefix));
        next.extend(words.iter().rev());
        words = next;
    }
    Ok(GrayCodeSequence { n, words })
}

/// A bit relabeling: a permutation of the bit positions followed by
/// complementation under a mask.
///
/// `permutation[j]` is the 1-based source position feeding output position
/// `j + 1`; `complement_mask[j]` complements output position `j + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTransform {
    permutation: Vec<u32>,
    complement_mask: Vec<u8>,
}

impl LabelTransform {
    pub fn new(permutation: Vec<u32>, complement_mask: Vec<u8>) -> Result<Self> {
        let n = permutation.len();
        if n == 0 || n > MAX_BITS as usize {
            return Err(Error::Domain(format!(
                "permutation length must be in 1..={MAX_BITS}, got {n}"
            )));
        }
        if complement_mask.len() != n {
            return Err(Error::Domain(format!(
                "complement mask has {} bits, permutation acts on {n}",
                complement_mask.len()
            )));
        }
        let mut seen = vec![false; n];
        for &p in &permutation {
            if p < 1 || p as usize > n || seen[p as usize - 1] {
                return Err(Error::Domain(format!(
                    "permutation {permutation:?} is not a bijection on 1..={n}"
                )));
            }
            seen[p as usize - 1] = true;
        }
        if complement_mask.iter().any(|&b| b > 1) {
            return Err(Error::Domain(
                "complement mask entries must be 0 or 1".into(),
            ));
        }
        Ok(Self {
            permutation,
            complement_mask,
        })
    }

    /// The transform that maps every sequence to itself.
    pub fn identity(n: u32) -> Self {
        Self {
            permutation: (1..=n).collect(),
            complement_mask: vec![0; n as usize],
        }
    }

    /// Number of bit positions the transform acts on.
    pub fn bits(&self) -> u32 {
        self.permutation.len() as u32
    }

    pub fn permutation(&self) -> &[u32] {
        &self.permutation
    }

    pub fn complement_mask(&self) -> &[u8] {
        &self.complement_mask
    }

    /// The transform undoing `self`: applying both in sequence is the
    /// identity.
    pub fn inverse(&self) -> Self {
        let n = self.permutation.len();
        let mut inv_perm = vec![0u32; n];
        for (j, &src) in self.permutation.iter().enumerate() {
            // output j+1 reads input src, so the inverse's output src reads j+1
            inv_perm[src as usize - 1] = j as u32 + 1;
        }
        let mask = (0..n)
            .map(|j| self.complement_mask[inv_perm[j] as usize - 1])
            .collect();
        Self {
            permutation: inv_perm,
            complement_mask: mask,
        }
    }
}

/// Applies a permutation/complementation transform to every codeword.
///
/// Output bit `j` takes input bit `permutation[j]`, then the complement mask
/// is XORed on. The Gray property is preserved.
pub fn apply_transform(seq: &GrayCodeSequence, t: &LabelTransform) -> Result<GrayCodeSequence> {
    let n = seq.bits();
    if t.bits() != n {
        return Err(Error::Domain(format!(
            "transform acts on {} bits, sequence has {n}",
            t.bits()
        )));
    }
    let words = seq
        .words
        .iter()
        .map(|&w| {
            let mut out = 0u32;
            for (j, (&src, &c)) in t.permutation.iter().zip(&t.complement_mask).enumerate() {
                let bit = (w >> (n - src)) & 1;
                out |= (bit ^ u32::from(c)) << (n - 1 - j as u32);
            }
            out
        })
        .collect();
    Ok(GrayCodeSequence { n, words })
}

/// The k-th bit of every codeword of the standard K-bit sequence, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitColumn {
    pub bits_per_symbol: u32,
    pub bit_index: u32,
    pub values: Vec<u8>,
}

/// Builds the k-th bit column of the standard K-bit sequence from its
/// run-length pattern, without constructing the sequence itself.
///
/// For k = 1 the column is 2^(K-1) ones followed by 2^(K-1) zeros. For k >= 2
/// it is 2^(K-k) ones, then 2^(k-1) - 1 alternating runs of 2^(K-k+1) bits
/// starting with zeros, then 2^(K-k) ones; the column is its own reversal.
pub fn bit_column(bits_per_symbol: u32, bit_index: u32) -> Result<BitColumn> {
    let (kk, k) = (bits_per_symbol, bit_index);
    if !(1..=MAX_BITS).contains(&kk) {
        return Err(Error::Domain(format!(
            "bits per symbol must be in 1..={MAX_BITS}, got {kk}"
        )));
    }
    if !(1..=kk).contains(&k) {
        return Err(Error::Domain(format!(
            "bit index must be in 1..={kk}, got {k}"
        )));
    }
    let mut values = Vec::with_capacity(1usize << kk);
    if k == 1 {
        let half = 1usize << (kk - 1);
        values.extend(std::iter::repeat_n(1u8, half));
        values.extend(std::iter::repeat_n(0u8, half));
    } else {
        let end_run = 1usize << (kk - k);
        let mid_run = end_run * 2;
        values.extend(std::iter::repeat_n(1u8, end_run));
        for r in 0..(1usize << (k - 1)) - 1 {
            let v = (r % 2) as u8; // runs alternate 0, 1, 0, ..., 0
            values.extend(std::iter::repeat_n(v, mid_run));
        }
        values.extend(std::iter::repeat_n(1u8, end_run));
    }
    Ok(BitColumn {
        bits_per_symbol: kk,
        bit_index: k,
        values,
    })
}

/// True iff every adjacent codeword pair (and, when `cyclic`, the
/// last-to-first pair) differs in exactly one bit.
pub fn is_gray(seq: &GrayCodeSequence, cyclic: bool) -> bool {
    let w = seq.words();
    let linear = w.windows(2).all(|p| (p[0] ^ p[1]).count_ones() == 1);
    if cyclic {
        linear && (w[w.len() - 1] ^ w[0]).count_ones() == 1
    } else {
        linear
    }
}
