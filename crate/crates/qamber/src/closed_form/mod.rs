//! Closed-form bit-error rates.
//!
//! The PAM expression averages, over every symbol position carrying one bit
//! value, the Gaussian probability mass falling into the decision regions of
//! the opposite value; each region contributes the difference of two erfc
//! terms. The QAM expression conditions on a fixed phase rotation: the
//! rotated constellation leaks a cross-channel component into each axis, so
//! every term additionally averages over the interfering axis's amplitudes.
//!
//! All probabilities returned here fold the per-bit average into the
//! prefactor, so total BERs are plain sums over bit indices. The per-axis
//! amplitude scale enters through alpha = d / sqrt(N0).

mod erf;

use std::fmt;

use crate::graycode::GrayCodeSequence;
use crate::pam_layout::{self, BitLayout, ExtendedLevel, Interval};
use crate::{Error, Result};

pub use erf::erfc;

/// Largest K accepted for a PAM link; matches the brute-force oracle range.
pub const MAX_PAM_BITS: u32 = 12;
/// Largest per-axis bit count accepted for a QAM link.
pub const MAX_QAM_AXIS_BITS: u32 = 8;

/// An M-PAM link: K = log2(M) labeling bits at a linear Eb/N0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PamConfig {
    bits_per_symbol: u32,
    ebn0: f64,
}

impl PamConfig {
    pub fn new(bits_per_symbol: u32, ebn0: f64) -> Result<Self> {
        if !(1..=MAX_PAM_BITS).contains(&bits_per_symbol) {
            return Err(Error::Domain(format!(
                "PAM bits per symbol must be in 1..={MAX_PAM_BITS}, got {bits_per_symbol}"
            )));
        }
        if !(ebn0 > 0.0 && ebn0.is_finite()) {
            return Err(Error::Domain(format!("Eb/N0 must be positive, got {ebn0}")));
        }
        Ok(Self {
            bits_per_symbol,
            ebn0,
        })
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn ebn0(&self) -> f64 {
        self.ebn0
    }
}

/// A rectangular MI x MQ QAM link with a fixed phase-noise angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QamConfig {
    i_bits: u32,
    q_bits: u32,
    ebn0: f64,
    theta: f64,
}

impl QamConfig {
    pub fn new(i_bits: u32, q_bits: u32, ebn0: f64, theta: f64) -> Result<Self> {
        for (axis, bits) in [("I", i_bits), ("Q", q_bits)] {
            if !(1..=MAX_QAM_AXIS_BITS).contains(&bits) {
                return Err(Error::Domain(format!(
                    "QAM {axis}-axis bit count must be in 1..={MAX_QAM_AXIS_BITS}, got {bits}"
                )));
            }
        }
        if !(ebn0 > 0.0 && ebn0.is_finite()) {
            return Err(Error::Domain(format!("Eb/N0 must be positive, got {ebn0}")));
        }
        if !(theta.is_finite() && theta.abs() <= std::f64::consts::PI) {
            return Err(Error::Domain(format!(
                "phase-noise angle must lie in [-pi, pi], got {theta}"
            )));
        }
        Ok(Self {
            i_bits,
            q_bits,
            ebn0,
            theta,
        })
    }

    pub fn i_bits(&self) -> u32 {
        self.i_bits
    }

    pub fn q_bits(&self) -> u32 {
        self.q_bits
    }

    pub fn ebn0(&self) -> f64 {
        self.ebn0
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.i_bits + self.q_bits
    }
}

/// The spacing-to-noise ratio alpha = d / sqrt(N0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedSpacing {
    pub alpha: f64,
}

/// alpha for M-PAM: energy normalization gives d = sqrt(3 K Eb / (M^2 - 1)).
pub fn pam_alpha(bits_per_symbol: u32, ebn0: f64) -> NormalizedSpacing {
    assert!((1..=31).contains(&bits_per_symbol), "invalid K");
    assert!(ebn0 > 0.0, "Eb/N0 must be positive");
    let m_sq = (1u64 << (2 * bits_per_symbol)) as f64;
    NormalizedSpacing {
        alpha: (3.0 * bits_per_symbol as f64 * ebn0 / (m_sq - 1.0)).sqrt(),
    }
}

/// alpha for rectangular QAM with equal per-axis spacing:
/// d = sqrt(3 (mI + mQ) Eb / (MI^2 + MQ^2 - 2)).
pub fn qam_alpha(i_bits: u32, q_bits: u32, ebn0: f64) -> NormalizedSpacing {
    assert!(
        (1..=15).contains(&i_bits) && (1..=15).contains(&q_bits),
        "invalid axis bits"
    );
    assert!(ebn0 > 0.0, "Eb/N0 must be positive");
    let mi_sq = (1u64 << (2 * i_bits)) as f64;
    let mq_sq = (1u64 << (2 * q_bits)) as f64;
    NormalizedSpacing {
        alpha: (3.0 * (i_bits + q_bits) as f64 * ebn0 / (mi_sq + mq_sq - 2.0)).sqrt(),
    }
}

/// The rotated-observation kernel erfc(alpha (x + y cos(phi) + z sin(phi))).
/// An infinite `x` propagates to the erfc limits.
pub fn psi(alpha: f64, x: f64, y: f64, z: f64, phi: f64) -> f64 {
    psi_cs(alpha, x, y, z, phi.cos(), phi.sin())
}

/// [`psi`] with the rotation factors precomputed; the QAM sums hoist the
/// trigonometry out of their inner loops.
#[inline]
fn psi_cs(alpha: f64, x: f64, y: f64, z: f64, cos_phi: f64, sin_phi: f64) -> f64 {
    erfc(alpha * (x + y * cos_phi + z * sin_phi))
}

/// Neumaier compensated accumulator; the bit sums add up to millions of
/// non-negative terms spanning hundreds of orders of magnitude.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

fn boundary_arg(alpha: f64, boundary: ExtendedLevel, position: i64) -> f64 {
    match boundary {
        ExtendedLevel::NegInf => f64::NEG_INFINITY,
        ExtendedLevel::PosInf => f64::INFINITY,
        ExtendedLevel::Finite(b) => alpha * (b - position) as f64,
    }
}

fn add_pam_pairs(acc: &mut CompensatedSum, alpha: f64, positions: &[i64], regions: &[Interval]) {
    for &a in positions {
        for r in regions {
            let term =
                erfc(boundary_arg(alpha, r.lower, a)) - erfc(boundary_arg(alpha, r.upper, a));
            acc.add(term);
        }
    }
}

/// Sum over wrong-region/position pairs of erfc differences, no prefactor.
fn pam_error_terms(layout: &BitLayout, alpha: f64) -> f64 {
    let mut acc = CompensatedSum::default();
    add_pam_pairs(&mut acc, alpha, &layout.positions_zero, &layout.regions_one);
    add_pam_pairs(&mut acc, alpha, &layout.positions_one, &layout.regions_zero);
    acc.value()
}

/// BER of labeling bit k of a Gray-coded M-PAM over AWGN.
///
/// The 1/K bit average is folded into the prefactor 1/(2 M K), so the total
/// PAM BER is the plain sum of this value over k.
pub fn pam_bit_ber(bits_per_symbol: u32, bit_index: u32, ebn0: f64) -> f64 {
    let layout =
        pam_layout::analytic_layout(bits_per_symbol, bit_index).expect("invalid (K, k) pair");
    let alpha = pam_alpha(bits_per_symbol, ebn0).alpha;
    let m = (1u64 << bits_per_symbol) as f64;
    pam_error_terms(&layout, alpha) / (2.0 * m * bits_per_symbol as f64)
}

/// Total BER of a Gray-coded M-PAM over AWGN.
pub fn pam_ber(bits_per_symbol: u32, ebn0: f64) -> f64 {
    (1..=bits_per_symbol)
        .map(|k| pam_bit_ber(bits_per_symbol, k, ebn0))
        .sum()
}

/// Total PAM BER for an arbitrary labeling, using run-scanned layouts
/// instead of the analytic region formulas.
///
/// For any permutation/complementation of the standard sequence this agrees
/// with [`pam_ber`]; it exists precisely so that claim can be tested.
pub fn generic_labeled_pam_ber(seq: &GrayCodeSequence, ebn0: f64) -> f64 {
    let kk = seq.bits();
    let alpha = pam_alpha(kk, ebn0).alpha;
    let m = seq.len() as f64;
    (1..=kk)
        .map(|k| {
            let layout = pam_layout::layout_from_labeling(seq, k).expect("k in range");
            pam_error_terms(&layout, alpha) / (2.0 * m * kk as f64)
        })
        .sum()
}

/// Cross-channel term sum for one rotated axis, no prefactor.
///
/// `cross_levels` is the interfering axis's symbol count; the interference
/// amplitudes are z_sign * (2q + 1) for q = -M/2 .. M/2 - 1.
fn qam_error_terms(
    layout: &BitLayout,
    alpha: f64,
    cross_levels: i64,
    z_sign: f64,
    theta: f64,
) -> f64 {
    let (sin_t, cos_t) = theta.sin_cos();
    let mut acc = CompensatedSum::default();
    let mut add_pairs = |positions: &[i64], regions: &[Interval]| {
        for &a in positions {
            let y = -(a as f64);
            for r in regions {
                let lo = r.lower.as_f64();
                let hi = r.upper.as_f64();
                for q in -(cross_levels / 2)..(cross_levels / 2) {
                    let z = z_sign * (2 * q + 1) as f64;
                    acc.add(
                        psi_cs(alpha, lo, y, z, cos_t, sin_t)
                            - psi_cs(alpha, hi, y, z, cos_t, sin_t),
                    );
                }
            }
        }
    };
    add_pairs(&layout.positions_zero, &layout.regions_one);
    add_pairs(&layout.positions_one, &layout.regions_zero);
    acc.value()
}

/// Conditional BER of bit k of the I-channel labeling, given the phase
/// rotation in `cfg`. The per-symbol bit average is folded into the
/// prefactor 1/(2 (mI + mQ) MI MQ).
pub fn qam_bit_ber_i(cfg: &QamConfig, bit_index: u32) -> Result<f64> {
    if !(1..=cfg.i_bits).contains(&bit_index) {
        return Err(Error::Domain(format!(
            "I-channel bit index must be in 1..={}, got {bit_index}",
            cfg.i_bits
        )));
    }
    let layout = pam_layout::analytic_layout(cfg.i_bits, bit_index)?;
    let alpha = qam_alpha(cfg.i_bits, cfg.q_bits, cfg.ebn0).alpha;
    let (mi, mq) = (1i64 << cfg.i_bits, 1i64 << cfg.q_bits);
    let terms = qam_error_terms(&layout, alpha, mq, 1.0, cfg.theta);
    Ok(terms / (2.0 * cfg.bits_per_symbol() as f64 * (mi * mq) as f64))
}

/// Conditional BER of bit k of the Q-channel labeling; mirror of
/// [`qam_bit_ber_i`] with the interfering amplitudes entering as -(2i + 1).
pub fn qam_bit_ber_q(cfg: &QamConfig, bit_index: u32) -> Result<f64> {
    if !(1..=cfg.q_bits).contains(&bit_index) {
        return Err(Error::Domain(format!(
            "Q-channel bit index must be in 1..={}, got {bit_index}",
            cfg.q_bits
        )));
    }
    let layout = pam_layout::analytic_layout(cfg.q_bits, bit_index)?;
    let alpha = qam_alpha(cfg.i_bits, cfg.q_bits, cfg.ebn0).alpha;
    let (mi, mq) = (1i64 << cfg.i_bits, 1i64 << cfg.q_bits);
    let terms = qam_error_terms(&layout, alpha, mi, -1.0, cfg.theta);
    Ok(terms / (2.0 * cfg.bits_per_symbol() as f64 * (mi * mq) as f64))
}

/// Total conditional BER of a rectangular QAM for the fixed phase-noise
/// angle in `cfg`: the sum of every I- and Q-channel bit error rate.
pub fn qam_conditional_ber(cfg: &QamConfig) -> f64 {
    let i_sum: f64 = (1..=cfg.i_bits)
        .map(|k| qam_bit_ber_i(cfg, k).expect("k in range"))
        .sum();
    let q_sum: f64 = (1..=cfg.q_bits)
        .map(|k| qam_bit_ber_q(cfg, k).expect("k in range"))
        .sum();
    i_sum + q_sum
}

/// A constellation family, without the link-quality parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constellation {
    Pam { bits_per_symbol: u32 },
    Qam { i_bits: u32, q_bits: u32 },
}

impl Constellation {
    pub fn bits_per_symbol(&self) -> u32 {
        match *self {
            Constellation::Pam { bits_per_symbol } => bits_per_symbol,
            Constellation::Qam { i_bits, q_bits } => i_bits + q_bits,
        }
    }

    /// Closed-form BER at a linear Eb/N0 and phase-noise angle. PAM carries
    /// no quadrature component, so it only accepts theta = 0.
    pub fn ber(&self, ebn0: f64, theta: f64) -> Result<f64> {
        match *self {
            Constellation::Pam { bits_per_symbol } => {
                if theta != 0.0 {
                    return Err(Error::Domain(
                        "phase noise applies to QAM constellations only".into(),
                    ));
                }
                let cfg = PamConfig::new(bits_per_symbol, ebn0)?;
                Ok(pam_ber(cfg.bits_per_symbol(), cfg.ebn0()))
            }
            Constellation::Qam { i_bits, q_bits } => {
                let cfg = QamConfig::new(i_bits, q_bits, ebn0, theta)?;
                Ok(qam_conditional_ber(&cfg))
            }
        }
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Constellation::Pam { bits_per_symbol } => write!(f, "pam:{bits_per_symbol}"),
            Constellation::Qam { i_bits, q_bits } => {
                write!(f, "qam:{}x{}", 1u64 << i_bits, 1u64 << q_bits)
            }
        }
    }
}

impl std::str::FromStr for Constellation {
    type Err = Error;

    /// Parses `pam:K` (K = bits per symbol) or `qam:MIxMQ` (MI, MQ = symbol
    /// counts, powers of two).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Domain(format!(
                "invalid constellation spec '{s}' (expected pam:K or qam:MIxMQ)"
            ))
        };
        if let Some(k) = s.strip_prefix("pam:") {
            let bits_per_symbol: u32 = k.parse().map_err(|_| bad())?;
            return Ok(Constellation::Pam { bits_per_symbol });
        }
        if let Some(rest) = s.strip_prefix("qam:") {
            let (mi, mq) = rest.split_once('x').ok_or_else(bad)?;
            let mi: u64 = mi.parse().map_err(|_| bad())?;
            let mq: u64 = mq.parse().map_err(|_| bad())?;
            for m in [mi, mq] {
                if m < 2 || !m.is_power_of_two() {
                    return Err(Error::Domain(format!(
                        "QAM side {m} must be a power of two >= 2"
                    )));
                }
            }
            return Ok(Constellation::Qam {
                i_bits: mi.trailing_zeros(),
                q_bits: mq.trailing_zeros(),
            });
        }
        Err(bad())
    }
}

/// One evaluated point of a BER curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub ebn0_db: f64,
    pub ber: f64,
}

/// A closed-form BER curve over an Eb/N0 grid, for one constellation and
/// phase-noise angle.
#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub constellation: Constellation,
    pub theta: f64,
    pub points: Vec<CurvePoint>,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Evaluates the closed form pointwise over a strictly increasing dB grid.
pub fn ber_curve(
    constellation: Constellation,
    theta: f64,
    ebn0_db_grid: &[f64],
) -> Result<BerCurve> {
    if ebn0_db_grid.is_empty() {
        return Err(Error::Domain("Eb/N0 grid is empty".into()));
    }
    if ebn0_db_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "Eb/N0 grid must be strictly increasing".into(),
        ));
    }
    let points = ebn0_db_grid
        .iter()
        .map(|&db| {
            Ok(CurvePoint {
                ebn0_db: db,
                ber: constellation.ber(db_to_linear(db), theta)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BerCurve {
        constellation,
        theta,
        points,
    })
}

/// Locates the Eb/N0 (dB) at which a curve crosses the target BER:
/// log-linear interpolation between the bracketing grid points seeds a
/// bisection on the closed form, refined to |BER - target| <= 1e-6 target.
fn crossing_db(curve: &BerCurve, target_ber: f64) -> Result<f64> {
    let pts = &curve.points;
    let bracket = pts
        .windows(2)
        .find(|w| w[0].ber >= target_ber && target_ber >= w[1].ber)
        .ok_or_else(|| {
            Error::Bracket(format!(
                "{} at theta = {} rad never crosses BER {target_ber:e} on the grid",
                curve.constellation, curve.theta
            ))
        })?;
    let (mut lo, mut hi) = (bracket[0].ebn0_db, bracket[1].ebn0_db);
    let eval = |db: f64| {
        curve
            .constellation
            .ber(db_to_linear(db), curve.theta)
            .expect("curve configuration already validated")
    };
    // interpolation seed on log10(BER) vs dB, when both endpoints allow it
    let mut probe =
        if bracket[0].ber > 0.0 && bracket[1].ber > 0.0 && bracket[0].ber != bracket[1].ber {
            let t = (target_ber.log10() - bracket[0].ber.log10())
                / (bracket[1].ber.log10() - bracket[0].ber.log10());
            (lo + t * (hi - lo)).clamp(lo, hi)
        } else {
            0.5 * (lo + hi)
        };
    for _ in 0..200 {
        let ber = eval(probe);
        if ((ber - target_ber) / target_ber).abs() <= 1e-6 || hi - lo < 1e-13 {
            return Ok(probe);
        }
        if ber > target_ber {
            lo = probe;
        } else {
            hi = probe;
        }
        probe = 0.5 * (lo + hi);
    }
    Ok(probe)
}

/// The Eb/N0 (dB) gap between two curves at a target BER: how much more
/// energy the impaired link needs to reach the same error rate.
pub fn loss_at(reference: &BerCurve, impaired: &BerCurve, target_ber: f64) -> Result<f64> {
    if !(target_ber > 0.0 && target_ber < 1.0) {
        return Err(Error::Domain(format!(
            "target BER must lie in (0, 1), got {target_ber}"
        )));
    }
    Ok(crossing_db(impaired, target_ber)? - crossing_db(reference, target_ber)?)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // frozen reference digits
mod tests {
    use super::*;
    use crate::graycode::{apply_transform, brgc, LabelTransform};

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol * want.abs().max(1e-300),
            "got {got:e}, want {want:e}"
        );
    }

    // The printed expressions evaluate unbounded regions through erfc limits
    // (2 - erfc(-x)), which caps their absolute accuracy near 1e-16; the
    // analytic-reduction identities therefore hold on an absolute scale.
    fn assert_abs(got: f64, want: f64, tol: f64) {
        assert!((got - want).abs() <= tol, "got {got:e}, want {want:e}");
    }

    #[test]
    fn pam_alpha_examples() {
        assert_close(pam_alpha(1, 1.0).alpha, 1.0, 1e-15);
        assert_close(pam_alpha(2, 5.0).alpha, 2f64.sqrt(), 1e-15);
        assert_close(pam_alpha(3, 10.0).alpha, (90f64 / 63.0).sqrt(), 1e-15);
    }

    #[test]
    fn qam_alpha_examples() {
        assert_close(qam_alpha(1, 1, 7.3).alpha, 7.3f64.sqrt(), 1e-15);
        assert_close(qam_alpha(2, 2, 5.0).alpha, 2f64.sqrt(), 1e-15);
        assert_close(qam_alpha(3, 2, 1.0).alpha, (15f64 / 78.0).sqrt(), 1e-15);
    }

    #[test]
    fn psi_reductions() {
        assert_close(psi(1.3, 0.5, 0.7, 5.0, 0.0), erfc(1.3 * 1.2), 1e-15);
        assert_eq!(psi(1.0, 1.0, -1.0, 5.0, 0.0), 1.0);
        assert_close(
            psi(2.0, 0.0, 0.0, 1.0, std::f64::consts::FRAC_PI_2),
            erfc(2.0),
            1e-12,
        );
        assert_eq!(psi(1.0, f64::NEG_INFINITY, 3.0, -2.0, 0.3), 2.0);
        assert_eq!(psi(1.0, f64::INFINITY, 3.0, -2.0, 0.3), 0.0);
    }

    #[test]
    fn binary_pam_reduces_to_antipodal() {
        for e in [0.1, 1.0, 10.0] {
            assert_abs(pam_bit_ber(1, 1, e), 0.5 * erfc(e.sqrt()), 1e-12);
            assert_abs(pam_ber(1, e), 0.5 * erfc(e.sqrt()), 1e-12);
        }
        assert_close(pam_ber(1, 1.0), 0.078649603525142565, 1e-14);
    }

    #[test]
    fn pam_bit_ber_reference_values() {
        // 40-digit evaluations of the quadruple sum, frozen before the build
        assert_close(pam_bit_ber(3, 1, 10.0), 0.0037903893275430991, 5e-14);
        assert_close(pam_bit_ber(3, 2, 10.0), 0.0075807786550861969, 5e-14);
        assert_close(pam_bit_ber(3, 3, 10.0), 0.015161540814935863, 5e-14);
    }

    #[test]
    fn pam_ber_reference_values() {
        assert_close(pam_ber(2, 4.0), 0.027614371357891662, 5e-14);
        assert_close(pam_ber(3, 10.0), 0.026532708797565159, 5e-14);
        assert_close(pam_ber(4, 15.848931924611133), 0.05207582227232495, 5e-14);
    }

    #[test]
    fn pam_bit_ber_vanishes_at_high_snr() {
        assert!(pam_bit_ber(3, 2, 1e9) < 1e-200);
    }

    #[test]
    fn generic_labeling_matches_analytic_route() {
        for e in [0.5, 4.0, 25.0] {
            for kk in 1..=4u32 {
                let seq = brgc(kk).unwrap();
                assert_close(generic_labeled_pam_ber(&seq, e), pam_ber(kk, e), 1e-13);
            }
        }
    }

    #[test]
    fn transformed_labeling_has_same_ber() {
        let g3 = brgc(3).unwrap();
        let t = LabelTransform::new(vec![3, 2, 1], vec![0, 1, 0]).unwrap();
        let g3p = apply_transform(&g3, &t).unwrap();
        for e in [0.3, 2.0, 12.0] {
            assert_close(
                generic_labeled_pam_ber(&g3p, e),
                generic_labeled_pam_ber(&g3, e),
                1e-13,
            );
        }
    }

    #[test]
    fn qam_bit_i_matches_hand_reduction_for_qpsk() {
        // For 4-QAM the printed sum collapses to
        // (erfc(a(cos+sin)) + erfc(a(cos-sin))) / 8 per bit.
        let theta = std::f64::consts::FRAC_PI_8;
        let cfg = QamConfig::new(1, 1, 2.5, theta).unwrap();
        let alpha = 2.5f64.sqrt();
        let want = (erfc(alpha * (theta.cos() + theta.sin()))
            + erfc(alpha * (theta.cos() - theta.sin())))
            / 8.0;
        let got = qam_bit_ber_i(&cfg, 1).unwrap();
        assert_close(got, want, 1e-14);
        assert_close(got, 0.028712955587612882, 5e-14);
        // the Q bit sees the same rotation by symmetry
        assert_close(qam_bit_ber_q(&cfg, 1).unwrap(), want, 1e-14);
    }

    #[test]
    fn qam_bit_rejects_out_of_range_index() {
        let cfg = QamConfig::new(2, 1, 4.0, 0.0).unwrap();
        assert!(qam_bit_ber_i(&cfg, 0).is_err());
        assert!(qam_bit_ber_i(&cfg, 3).is_err());
        assert!(qam_bit_ber_q(&cfg, 2).is_err());
    }

    #[test]
    fn qam_theta_sign_symmetry() {
        for (mi, mq) in [(1, 1), (2, 2), (3, 2), (3, 3)] {
            for theta in [0.01, std::f64::consts::FRAC_PI_6, 1.0] {
                let plus = QamConfig::new(mi, mq, 8.0, theta).unwrap();
                let minus = QamConfig::new(mi, mq, 8.0, -theta).unwrap();
                assert!(
                    (qam_conditional_ber(&plus) - qam_conditional_ber(&minus)).abs() <= 1e-12,
                    "mi={mi} mq={mq} theta={theta}"
                );
                for k in 1..=mi {
                    let a = qam_bit_ber_i(&plus, k).unwrap();
                    let b = qam_bit_ber_i(&minus, k).unwrap();
                    assert!((a - b).abs() <= 1e-12, "I bit {k} at {mi}x{mq}");
                }
                for k in 1..=mq {
                    let a = qam_bit_ber_q(&plus, k).unwrap();
                    let b = qam_bit_ber_q(&minus, k).unwrap();
                    assert!((a - b).abs() <= 1e-12, "Q bit {k} at {mi}x{mq}");
                }
            }
        }
    }

    #[test]
    fn qam_square_axes_agree_at_zero_theta() {
        let cfg = QamConfig::new(3, 3, 12.0, 0.0).unwrap();
        for k in 1..=3 {
            assert_close(
                qam_bit_ber_i(&cfg, k).unwrap(),
                qam_bit_ber_q(&cfg, k).unwrap(),
                1e-15,
            );
        }
    }

    #[test]
    fn qam_zero_theta_decouples_into_pam_sums() {
        // Independent reconstruction: per-axis erfc sums assembled directly
        // from the layouts, divided by the QAM bit count.
        for (mi, mq) in [(2u32, 2u32), (3, 2), (3, 1)] {
            let cfg = QamConfig::new(mi, mq, 6.0, 0.0).unwrap();
            let alpha = qam_alpha(mi, mq, 6.0).alpha;
            let axis_sum = |bits: u32| -> f64 {
                (1..=bits)
                    .map(|k| {
                        let layout = pam_layout::analytic_layout(bits, k).unwrap();
                        pam_error_terms(&layout, alpha) / (2.0 * (1u64 << bits) as f64)
                    })
                    .sum::<f64>()
            };
            let manual = (axis_sum(mi) + axis_sum(mq)) / (mi + mq) as f64;
            assert!(
                (qam_conditional_ber(&cfg) - manual).abs() <= 1e-12,
                "mi={mi} mq={mq}"
            );
        }
    }

    #[test]
    fn qpsk_reduces_to_antipodal_at_zero_theta() {
        for e in [0.1, 1.0, 10.0] {
            let cfg = QamConfig::new(1, 1, e, 0.0).unwrap();
            assert!((qam_conditional_ber(&cfg) - 0.5 * erfc(e.sqrt())).abs() <= 1e-12);
        }
    }

    #[test]
    fn qam_reference_values() {
        let cases = [
            (
                1u32,
                1u32,
                2.5,
                std::f64::consts::FRAC_PI_8,
                0.057425911175225763,
            ),
            (
                2,
                2,
                10.0,
                std::f64::consts::PI / 36.0,
                0.0047284767213594152,
            ),
            (
                3,
                2,
                10.0,
                std::f64::consts::PI / 180.0,
                0.016756697086494879,
            ),
            (
                3,
                3,
                39.810717055349734,
                std::f64::consts::PI / 180.0,
                0.00032331876142800698,
            ),
            (
                5,
                5,
                63.09573444801933,
                std::f64::consts::PI / 180.0,
                0.041452788732798494,
            ),
            (
                5,
                1,
                100.0,
                std::f64::consts::PI / 180.0,
                0.018973207165640708,
            ),
        ];
        for (mi, mq, e, theta, want) in cases {
            let cfg = QamConfig::new(mi, mq, e, theta).unwrap();
            assert_close(qam_conditional_ber(&cfg), want, 5e-13);
        }
    }

    #[test]
    fn constellation_parsing_round_trips() {
        for s in ["pam:3", "qam:8x8", "qam:32x2", "qam:2x2"] {
            let c: Constellation = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        assert_eq!(
            "qam:16x4".parse::<Constellation>().unwrap(),
            Constellation::Qam {
                i_bits: 4,
                q_bits: 2
            }
        );
        for s in ["qam:8", "qam:3x2", "qam:0x2", "psk:8", "pam:x", "qam:8x8x8"] {
            assert!(s.parse::<Constellation>().is_err(), "{s}");
        }
    }

    #[test]
    fn curve_matches_qpsk_closed_form() {
        let c: Constellation = "qam:2x2".parse().unwrap();
        let curve = ber_curve(c, 0.0, &[0.0, 5.0, 10.0]).unwrap();
        let want = [
            0.078649603525142565,
            0.0059538671477786595,
            3.8721082155220418e-6,
        ];
        for (p, w) in curve.points.iter().zip(want) {
            assert_abs(p.ber, w, 1e-12);
        }
    }

    #[test]
    fn curves_decrease_at_zero_theta() {
        // strictly decreasing until the value underflows f64, constant zero after
        let grid: Vec<f64> = (0..=60).map(|i| i as f64 * 0.5).collect();
        for spec in [
            "pam:1", "pam:2", "pam:3", "pam:4", "pam:5", "pam:6", "qam:2x2", "qam:8x8", "qam:16x4",
        ] {
            let c: Constellation = spec.parse().unwrap();
            let curve = ber_curve(c, 0.0, &grid).unwrap();
            for w in curve.points.windows(2) {
                assert!(
                    w[1].ber < w[0].ber || w[0].ber == 0.0,
                    "{spec} not decreasing at {} dB",
                    w[1].ebn0_db
                );
            }
        }
    }

    #[test]
    fn impaired_curve_dominates_clean_curve() {
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.5).collect();
        let c: Constellation = "qam:8x8".parse().unwrap();
        let clean = ber_curve(c, 0.0, &grid).unwrap();
        let impaired = ber_curve(c, std::f64::consts::PI / 180.0, &grid).unwrap();
        for (a, b) in clean.points.iter().zip(&impaired.points) {
            assert!(b.ber > a.ber, "at {} dB", a.ebn0_db);
        }
    }

    #[test]
    fn curve_rejects_bad_grids() {
        let c: Constellation = "qam:2x2".parse().unwrap();
        assert!(matches!(ber_curve(c, 0.0, &[]), Err(Error::Domain(_))));
        assert!(ber_curve(c, 0.0, &[1.0, 1.0]).is_err());
        assert!(ber_curve(c, 0.0, &[2.0, 1.0]).is_err());
        let p: Constellation = "pam:2".parse().unwrap();
        assert!(ber_curve(p, 0.1, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn loss_of_identical_curves_is_zero() {
        let c: Constellation = "qam:2x2".parse().unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.5).collect();
        let a = ber_curve(c, 0.0, &grid).unwrap();
        let b = a.clone();
        assert_eq!(loss_at(&a, &b, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn loss_reports_unbracketed_target() {
        // 1024-QAM at theta = 5 degrees floors around 0.125
        let c: Constellation = "qam:32x32".parse().unwrap();
        let grid: Vec<f64> = (0..=120).map(|i| i as f64 * 0.5).collect();
        let clean = ber_curve(c, 0.0, &grid).unwrap();
        let impaired = ber_curve(c, 5f64.to_radians(), &grid).unwrap();
        assert!(matches!(
            loss_at(&clean, &impaired, 1e-3),
            Err(Error::Bracket(_))
        ));
        assert!(matches!(
            loss_at(&clean, &impaired, 2.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn compensated_sum_handles_cancellation_scales() {
        let mut acc = CompensatedSum::default();
        for _ in 0..10 {
            acc.add(1e16);
            acc.add(1.0);
            acc.add(-1e16);
        }
        assert_eq!(acc.value(), 10.0);
    }
}

#[cfg(test)]
mod prop_tests {
    use super::*;
    use crate::pam_layout;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn pam_probabilities_stay_in_unit_interval(
            kk in 1u32..=8,
            kq in 0u32..8,
            e in 0.01f64..200.0,
        ) {
            let k = kq % kk + 1;
            let p = pam_bit_ber(kk, k, e);
            prop_assert!((0.0..=1.0).contains(&p));
            let total = pam_ber(kk, e);
            prop_assert!((0.0..=1.0).contains(&total));
        }

        #[test]
        fn qam_probability_and_term_sign(
            mi in 1u32..=4,
            mq in 1u32..=4,
            e in 0.01f64..200.0,
            theta in -3.1f64..3.1,
        ) {
            let cfg = QamConfig::new(mi, mq, e, theta).unwrap();
            let total = qam_conditional_ber(&cfg);
            prop_assert!((0.0..=1.0).contains(&total));

            // every erfc difference is non-negative: the upper boundary
            // argument exceeds the lower one for the same position
            let alpha = qam_alpha(mi, mq, e).alpha;
            let k = mi; // deepest layout has the most regions
            let (ones, zeros) = pam_layout::region_sets(mi, k).unwrap();
            let (pos_one, pos_zero) = pam_layout::position_sets(mi, k).unwrap();
            for (positions, regions) in [(&pos_zero, &ones), (&pos_one, &zeros)] {
                for &a in positions.iter() {
                    for r in regions.iter() {
                        for q in -(1i64 << (mq - 1))..(1i64 << (mq - 1)) {
                            let z = (2 * q + 1) as f64;
                            let term = psi(alpha, r.lower.as_f64(), -(a as f64), z, theta)
                                - psi(alpha, r.upper.as_f64(), -(a as f64), z, theta);
                            prop_assert!(term >= 0.0, "negative term {term:e}");
                        }
                    }
                }
            }
        }
    }
}
