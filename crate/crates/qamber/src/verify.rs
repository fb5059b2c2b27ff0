//! Self-check suites behind `qamber verify`.
//!
//! The checks re-derive results along independent routes and compare: the
//! analytic layouts against the brute-force scan, the run-length bit columns
//! against the constructed sequences, the generic labeling BER against the
//! analytic one, and the QAM rotation symmetries. A fault can be injected
//! into the layout comparison to demonstrate that the harness actually
//! detects mismatches.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::closed_form::{
    erfc, generic_labeled_pam_ber, pam_ber, qam_alpha, qam_conditional_ber, QamConfig,
};
use crate::graycode::{self, LabelTransform};
use crate::montecarlo::{simulate, LinkConfig, SimJob};
use crate::pam_layout::{self, BitLayout, ExtendedLevel};
use crate::{Error, Result};

/// Result of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn pass(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: true,
            detail: detail.into(),
        }
    }

    fn fail(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: false,
            detail: detail.into(),
        }
    }
}

/// Deliberate corruption applied inside the checks, to prove they can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FaultInjection {
    #[default]
    None,
    /// Shifts every finite analytic region boundary by +2, simulating a
    /// mutated constant in the boundary function.
    DeltaOffset,
}

/// Runs every check up to the given PAM width. `max_k` must lie in
/// 1..=[`pam_layout::MAX_BRUTE_FORCE_BITS`].
pub fn run_checks(max_k: u32, fault: FaultInjection) -> Result<Vec<CheckOutcome>> {
    if !(1..=pam_layout::MAX_BRUTE_FORCE_BITS).contains(&max_k) {
        return Err(Error::Domain(format!(
            "max K must be in 1..={}, got {max_k}",
            pam_layout::MAX_BRUTE_FORCE_BITS
        )));
    }
    Ok(vec![
        check_gray_property(max_k),
        check_bit_columns(max_k),
        check_layout_oracle(max_k, fault),
        check_region_count(max_k),
        check_positions_and_decisions(max_k),
        check_labeling_invariance(max_k),
        check_theta_symmetry(),
        check_theta_zero_decoupling(),
        check_erfc_references(),
        check_simulator_determinism(),
    ])
}

fn check_gray_property(max_k: u32) -> CheckOutcome {
    const NAME: &str = "gray-property";
    for n in 1..=max_k {
        let seq = graycode::brgc(n).expect("valid width");
        if !graycode::is_gray(&seq, true) {
            return CheckOutcome::fail(NAME, format!("brgc({n}) is not cyclically Gray"));
        }
        let mut words = seq.words().to_vec();
        words.sort_unstable();
        words.dedup();
        if words.len() != seq.len() {
            return CheckOutcome::fail(NAME, format!("brgc({n}) has duplicate codewords"));
        }
    }
    CheckOutcome::pass(NAME, format!("cyclic Gray and distinct for n <= {max_k}"))
}

fn check_bit_columns(max_k: u32) -> CheckOutcome {
    const NAME: &str = "bit-column-pattern";
    for kk in 1..=max_k {
        let seq = graycode::brgc(kk).expect("valid width");
        for k in 1..=kk {
            let column = graycode::bit_column(kk, k).expect("valid pair");
            let from_seq: Vec<u8> = (0..seq.len()).map(|i| seq.bit(i, k)).collect();
            if column.values != from_seq {
                return CheckOutcome::fail(
                    NAME,
                    format!("run-length column differs from the sequence at K={kk} k={k}"),
                );
            }
            if k >= 2 {
                let mut reversed = column.values.clone();
                reversed.reverse();
                if reversed != column.values {
                    return CheckOutcome::fail(
                        NAME,
                        format!("column K={kk} k={k} is not palindromic"),
                    );
                }
            }
        }
    }
    CheckOutcome::pass(
        NAME,
        format!("columns match the construction for K <= {max_k}"),
    )
}

fn shift_layout(layout: &mut BitLayout, offset: i64) {
    let shift = |level: &mut ExtendedLevel| {
        if let ExtendedLevel::Finite(v) = level {
            *v += offset;
        }
    };
    for interval in layout
        .regions_one
        .iter_mut()
        .chain(&mut layout.regions_zero)
    {
        shift(&mut interval.lower);
        shift(&mut interval.upper);
    }
}

fn check_layout_oracle(max_k: u32, fault: FaultInjection) -> CheckOutcome {
    const NAME: &str = "layout-oracle-equivalence";
    for kk in 1..=max_k {
        for k in 1..=kk {
            let mut analytic = pam_layout::analytic_layout(kk, k).expect("valid pair");
            if fault == FaultInjection::DeltaOffset {
                shift_layout(&mut analytic, 2);
            }
            let brute = pam_layout::brute_force_layout(kk, k).expect("valid pair");
            if analytic != brute {
                return CheckOutcome::fail(
                    NAME,
                    format!("analytic and brute-force layouts differ at K={kk} k={k}"),
                );
            }
        }
    }
    CheckOutcome::pass(NAME, format!("layouts identical for K <= {max_k}"))
}

fn check_region_count(max_k: u32) -> CheckOutcome {
    const NAME: &str = "region-count";
    for kk in 1..=max_k {
        for k in 1..=kk {
            let (ones, zeros) = pam_layout::region_sets(kk, k).expect("valid pair");
            if ones.len() + zeros.len() != (1 << (k - 1)) + 1 {
                return CheckOutcome::fail(
                    NAME,
                    format!("region count is not 2^(k-1)+1 at K={kk} k={k}"),
                );
            }
        }
    }
    CheckOutcome::pass(NAME, format!("2^(k-1)+1 regions for K <= {max_k}"))
}

fn check_positions_and_decisions(max_k: u32) -> CheckOutcome {
    const NAME: &str = "position-decision-consistency";
    for kk in 1..=max_k {
        let seq = graycode::brgc(kk).expect("valid width");
        for k in 1..=kk {
            let (ones, zeros) = pam_layout::position_sets(kk, k).expect("valid pair");
            let mut all: Vec<i64> = ones.iter().chain(&zeros).copied().collect();
            all.sort_unstable();
            let want: Vec<i64> = (0..1i64 << kk).map(|i| -(1i64 << kk) + 1 + 2 * i).collect();
            if all != want {
                return CheckOutcome::fail(
                    NAME,
                    format!("positions do not partition the odd levels at K={kk} k={k}"),
                );
            }
            for (i, _) in seq.words().iter().enumerate() {
                let level = -(1i64 << kk) + 1 + 2 * i as i64;
                if pam_layout::decide_bit(level as f64, kk, k) != seq.bit(i, k) {
                    return CheckOutcome::fail(
                        NAME,
                        format!(
                            "decide_bit disagrees with the labeling at K={kk} k={k} level={level}"
                        ),
                    );
                }
            }
        }
    }
    CheckOutcome::pass(
        NAME,
        format!("positions and decisions consistent for K <= {max_k}"),
    )
}

fn random_transform(rng: &mut ChaCha12Rng, n: u32) -> LabelTransform {
    let mut perm: Vec<u32> = (1..=n).collect();
    perm.shuffle(rng);
    let mask: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1)).collect();
    LabelTransform::new(perm, mask).expect("generated transform is valid")
}

fn check_labeling_invariance(max_k: u32) -> CheckOutcome {
    const NAME: &str = "labeling-invariance";
    let mut rng = ChaCha12Rng::seed_from_u64(0x5EED1AB);
    let top = max_k.min(4);
    for kk in 1..=top {
        let base = graycode::brgc(kk).expect("valid width");
        for e in [0.8, 6.0] {
            let reference = pam_ber(kk, e);
            for _ in 0..50 {
                let t = random_transform(&mut rng, kk);
                let relabeled = graycode::apply_transform(&base, &t).expect("same width");
                let got = generic_labeled_pam_ber(&relabeled, e);
                if (got - reference).abs() > 1e-12 {
                    return CheckOutcome::fail(
                        NAME,
                        format!(
                            "transformed labeling BER differs by {:e} at K={kk}",
                            got - reference
                        ),
                    );
                }
            }
        }
    }
    CheckOutcome::pass(
        NAME,
        format!("50 random relabelings per K <= {top} agree to 1e-12"),
    )
}

fn check_theta_symmetry() -> CheckOutcome {
    const NAME: &str = "theta-symmetry";
    for (mi, mq) in [(1u32, 1u32), (2, 2), (3, 2), (3, 3)] {
        for theta in [0.02, 0.4, std::f64::consts::FRAC_PI_3] {
            let plus = QamConfig::new(mi, mq, 9.0, theta).expect("valid cfg");
            let minus = QamConfig::new(mi, mq, 9.0, -theta).expect("valid cfg");
            let gap = (qam_conditional_ber(&plus) - qam_conditional_ber(&minus)).abs();
            if gap > 1e-12 {
                return CheckOutcome::fail(
                    NAME,
                    format!("BER(theta) != BER(-theta) by {gap:e} at {mi}x{mq}"),
                );
            }
        }
    }
    CheckOutcome::pass(NAME, "conditional BER is even in theta")
}

fn check_theta_zero_decoupling() -> CheckOutcome {
    const NAME: &str = "theta-zero-decoupling";
    for (mi, mq) in [(1u32, 1u32), (2, 2), (3, 2), (4, 1)] {
        let e = 7.5;
        let cfg = QamConfig::new(mi, mq, e, 0.0).expect("valid cfg");
        let alpha = qam_alpha(mi, mq, e).alpha;
        let arg = |level: ExtendedLevel, a: i64| match level {
            ExtendedLevel::Finite(b) => alpha * (b - a) as f64,
            ExtendedLevel::NegInf => f64::NEG_INFINITY,
            ExtendedLevel::PosInf => f64::INFINITY,
        };
        // per-axis PAM bit sums assembled from the layouts and erfc alone
        let axis_sum = |bits: u32| -> f64 {
            (1..=bits)
                .map(|k| {
                    let (r1, r0) = pam_layout::region_sets(bits, k).expect("valid pair");
                    let (a1, a0) = pam_layout::position_sets(bits, k).expect("valid pair");
                    let mut sum = 0.0;
                    for (positions, regions) in [(&a0, &r1), (&a1, &r0)] {
                        for &a in positions.iter() {
                            for r in regions.iter() {
                                sum += erfc(arg(r.lower, a)) - erfc(arg(r.upper, a));
                            }
                        }
                    }
                    sum / (2.0 * (1u64 << bits) as f64)
                })
                .sum::<f64>()
        };
        let manual = (axis_sum(mi) + axis_sum(mq)) / (mi + mq) as f64;
        let gap = (qam_conditional_ber(&cfg) - manual).abs();
        if gap > 1e-12 {
            return CheckOutcome::fail(
                NAME,
                format!("theta=0 QAM BER differs from per-axis PAM sums by {gap:e} at {mi}x{mq}"),
            );
        }
    }
    CheckOutcome::pass(NAME, "theta=0 QAM BER equals the per-axis PAM sums")
}

#[allow(clippy::excessive_precision)] // frozen reference digits
fn check_erfc_references() -> CheckOutcome {
    const NAME: &str = "erfc-reference";
    let table = [
        (0.0, 1.0),
        (1.0, 0.15729920705028513),
        (-1.0, 1.8427007929497149),
        (5.0, 1.5374597944280349e-12),
    ];
    for (x, want) in table {
        let got = erfc(x);
        if ((got - want) / want).abs() > 1e-12 {
            return CheckOutcome::fail(NAME, format!("erfc({x}) = {got:e}, want {want:e}"));
        }
    }
    if erfc(f64::NEG_INFINITY) != 2.0 || erfc(f64::INFINITY) != 0.0 {
        return CheckOutcome::fail(NAME, "erfc limits are wrong");
    }
    CheckOutcome::pass(NAME, "reference values reproduced to 1e-12")
}

fn check_simulator_determinism() -> CheckOutcome {
    const NAME: &str = "simulator-determinism";
    let cfg = QamConfig::new(2, 1, 4.0, 0.05).expect("valid cfg");
    let job = SimJob {
        link: LinkConfig::Qam(cfg),
        n_bits: 60_000,
        seed: 1,
    };
    let a = simulate(&job).expect("valid job");
    let b = simulate(&job).expect("valid job");
    if a != b {
        return CheckOutcome::fail(NAME, "two runs of the same job differ");
    }
    let p = qam_conditional_ber(&cfg);
    let sigma = (p * (1.0 - p) / a.bits as f64).sqrt();
    if (a.estimate() - p).abs() > 4.0 * sigma {
        return CheckOutcome::fail(
            NAME,
            format!(
                "smoke estimate {} is far from the closed form {p}",
                a.estimate()
            ),
        );
    }
    CheckOutcome::pass(
        NAME,
        "repeat runs identical, smoke estimate near the closed form",
    )
}
