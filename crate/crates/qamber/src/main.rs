//! Command-line front end: Gray code listings, PAM bit layouts, BER curves,
//! phase-noise loss measurement, and the self-check suites.
//!
//! Exit codes: 0 success, 1 failed checks, 2 invalid arguments or domain
//! errors, 3 Monte Carlo budget below the minimum, 4 target BER unreachable.
//! Data goes to stdout, diagnostics to stderr.

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qamber::closed_form::{ber_curve, db_to_linear, loss_at, Constellation, PamConfig, QamConfig};
use qamber::graycode::{apply_transform, brgc, LabelTransform};
use qamber::montecarlo::{simulate, LinkConfig, SimJob, MIN_BITS};
use qamber::pam_layout::analytic_layout;
use qamber::verify::{run_checks, FaultInjection};
use qamber::Error;

#[derive(Parser)]
#[command(
    name = "qamber",
    version,
    about = "Closed-form and Monte Carlo bit-error rates of Gray-coded PAM and rectangular QAM under phase noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the codewords of an n-bit binary reflected Gray code sequence,
    /// optionally relabeled by a bit permutation and complement mask.
    Gray {
        /// Bits per codeword (1..=16).
        n: u32,
        /// Comma-separated source position for each output bit, e.g. 3,2,1.
        #[arg(long, value_name = "P1,P2,...")]
        permute: Option<String>,
        /// Bit string marking which output positions to complement, e.g. 010.
        #[arg(long, value_name = "BITS")]
        complement: Option<String>,
    },
    /// Dump the decision regions and symbol positions of one PAM labeling
    /// bit as CSV, in units of d (-inf/+inf for the unbounded ends).
    Regions {
        /// Bits per symbol K.
        bits_per_symbol: u32,
        /// Labeling bit index k (1-based from the left).
        bit_index: u32,
    },
    /// Evaluate a BER curve over an Eb/N0 grid and emit CSV; optionally add
    /// a Monte Carlo estimate per grid point.
    Curve {
        /// Constellation spec: pam:K or qam:MIxMQ (symbol counts).
        spec: String,
        /// Phase-noise angle in degrees (QAM only).
        #[arg(long, default_value_t = 0.0)]
        theta_deg: f64,
        /// First Eb/N0 grid point in dB.
        #[arg(long)]
        from: f64,
        /// Last Eb/N0 grid point in dB.
        #[arg(long)]
        to: f64,
        /// Grid step in dB.
        #[arg(long)]
        step: f64,
        /// Which BER columns to compute.
        #[arg(long, value_enum, default_value_t = Mode::Closed)]
        mode: Mode,
        /// Monte Carlo bit budget per grid point (>= 10000; rounded up to a
        /// whole number of symbols).
        #[arg(long, default_value_t = 1e6)]
        bits: f64,
        /// Monte Carlo seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Measure the Eb/N0 loss (dB) at a target BER between the phase-noise
    /// curve and the clean curve of the same constellation.
    Loss {
        /// Constellation spec: pam:K or qam:MIxMQ (symbol counts).
        spec: String,
        /// Phase-noise angle in degrees.
        #[arg(long)]
        theta_deg: f64,
        /// Target BER, e.g. 1e-3.
        #[arg(long)]
        target: f64,
    },
    /// Run the self-check suites and print one PASS/FAIL line per check.
    Verify {
        /// Largest PAM width checked (1..=12).
        #[arg(long, default_value_t = 8)]
        max_k: u32,
        /// Inject a deliberate fault to prove the checks can fail
        /// (supported: delta-offset).
        #[arg(long, hide = true, value_name = "FAULT")]
        inject_fault: Option<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Closed form only.
    Closed,
    /// Closed form plus Monte Carlo columns.
    Mc,
    /// Same as mc.
    Both,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Domain(_) => 2,
        Error::Budget(_) => 3,
        Error::Bracket(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// Honors QAMBER_THREADS (0 or unset = automatic thread count).
fn configure_threads() {
    let Ok(raw) = std::env::var("QAMBER_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(0) => {}
        Ok(n) => {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        Err(_) => {
            eprintln!("warning: ignoring non-integer QAMBER_THREADS value '{raw}'");
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Gray {
            n,
            permute,
            complement,
        } => cmd_gray(n, permute, complement),
        Command::Regions {
            bits_per_symbol,
            bit_index,
        } => cmd_regions(bits_per_symbol, bit_index),
        Command::Curve {
            spec,
            theta_deg,
            from,
            to,
            step,
            mode,
            bits,
            seed,
        } => cmd_curve(&spec, theta_deg, from, to, step, mode, bits, seed),
        Command::Loss {
            spec,
            theta_deg,
            target,
        } => cmd_loss(&spec, theta_deg, target),
        Command::Verify {
            max_k,
            inject_fault,
        } => cmd_verify(max_k, inject_fault.as_deref()),
    }
}

fn parse_permutation(raw: &str) -> Result<Vec<u32>, Error> {
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| Error::Domain(format!("invalid permutation entry '{part}'")))
        })
        .collect()
}

fn parse_complement(raw: &str) -> Result<Vec<u8>, Error> {
    raw.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Domain(format!(
                "invalid complement mask character '{c}'"
            ))),
        })
        .collect()
}

fn cmd_gray(
    n: u32,
    permute: Option<String>,
    complement: Option<String>,
) -> Result<ExitCode, Error> {
    let mut seq = brgc(n)?;
    if permute.is_some() || complement.is_some() {
        let permutation = match permute {
            Some(raw) => parse_permutation(&raw)?,
            None => (1..=n).collect(),
        };
        let mask = match complement {
            Some(raw) => parse_complement(&raw)?,
            None => vec![0; n as usize],
        };
        let transform = LabelTransform::new(permutation, mask)?;
        seq = apply_transform(&seq, &transform)?;
    }
    println!("{seq}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_regions(bits_per_symbol: u32, bit_index: u32) -> Result<ExitCode, Error> {
    let layout = analytic_layout(bits_per_symbol, bit_index)?;
    println!("kind,bit,lower,upper,position");
    for (bit, regions) in [(1u8, &layout.regions_one), (0u8, &layout.regions_zero)] {
        for r in regions {
            println!("region,{bit},{},{},", r.lower, r.upper);
        }
    }
    for (bit, positions) in [(1u8, &layout.positions_one), (0u8, &layout.positions_zero)] {
        for p in positions {
            println!("position,{bit},,,{p}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn grid_points(from: f64, to: f64, step: f64) -> Result<Vec<f64>, Error> {
    if !from.is_finite() || !to.is_finite() || !step.is_finite() || step <= 0.0 {
        return Err(Error::Domain(
            "grid bounds must be finite with step > 0".into(),
        ));
    }
    if to < from {
        return Err(Error::Domain(format!(
            "grid start {from} exceeds stop {to}"
        )));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize;
    if count > 1_000_000 {
        return Err(Error::Domain("grid has more than a million points".into()));
    }
    Ok((0..=count).map(|i| from + i as f64 * step).collect())
}

fn link_config(constellation: Constellation, ebn0: f64, theta: f64) -> Result<LinkConfig, Error> {
    Ok(match constellation {
        Constellation::Pam { bits_per_symbol } => {
            LinkConfig::Pam(PamConfig::new(bits_per_symbol, ebn0)?)
        }
        Constellation::Qam { i_bits, q_bits } => {
            LinkConfig::Qam(QamConfig::new(i_bits, q_bits, ebn0, theta)?)
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_curve(
    spec: &str,
    theta_deg: f64,
    from: f64,
    to: f64,
    step: f64,
    mode: Mode,
    bits: f64,
    seed: u64,
) -> Result<ExitCode, Error> {
    let constellation: Constellation = spec.parse()?;
    let theta = theta_deg.to_radians();
    let grid = grid_points(from, to, step)?;
    let curve = ber_curve(constellation, theta, &grid)?;

    let with_mc = mode != Mode::Closed;
    let requested_bits = if with_mc {
        if !bits.is_finite() || bits < 0.0 {
            return Err(Error::Domain(format!("invalid bit budget {bits}")));
        }
        let requested = bits.round() as u64;
        if requested < MIN_BITS {
            return Err(Error::Budget(format!(
                "bit budget {requested} is below the minimum {MIN_BITS}"
            )));
        }
        requested
    } else {
        0
    };

    println!("ebn0_db,theta_rad,constellation,ber_closed,ber_mc,mc_errors,mc_bits");
    for (index, point) in curve.points.iter().enumerate() {
        print!("{},{theta},{constellation},{}", point.ebn0_db, point.ber);
        if with_mc {
            let bits_per_symbol = u64::from(constellation.bits_per_symbol());
            let n_bits = requested_bits.div_ceil(bits_per_symbol) * bits_per_symbol;
            let job = SimJob {
                link: link_config(constellation, db_to_linear(point.ebn0_db), theta)?,
                n_bits,
                seed: seed.wrapping_add(index as u64),
            };
            let estimate = simulate(&job)?;
            println!(
                ",{},{},{}",
                estimate.estimate(),
                estimate.errors,
                estimate.bits
            );
        } else {
            println!(",,,");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_loss(spec: &str, theta_deg: f64, target: f64) -> Result<ExitCode, Error> {
    let constellation: Constellation = spec.parse()?;
    let theta = theta_deg.to_radians();
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain(format!(
            "target BER must lie in (0, 1), got {target}"
        )));
    }
    let mut stop_db = 40.0;
    loop {
        let grid = grid_points(0.0, stop_db, 0.25)?;
        let reference = ber_curve(constellation, 0.0, &grid)?;
        let impaired = ber_curve(constellation, theta, &grid)?;
        match loss_at(&reference, &impaired, target) {
            Ok(loss) => {
                println!("{loss:.2}");
                return Ok(ExitCode::SUCCESS);
            }
            Err(Error::Bracket(_)) if stop_db < 60.0 => stop_db = 60.0,
            Err(err) => return Err(err),
        }
    }
}

fn cmd_verify(max_k: u32, inject_fault: Option<&str>) -> Result<ExitCode, Error> {
    let fault = match inject_fault {
        None => FaultInjection::None,
        Some("delta-offset") => FaultInjection::DeltaOffset,
        Some(other) => {
            return Err(Error::Domain(format!(
                "unknown fault '{other}' (supported: delta-offset)"
            )))
        }
    };
    let reports = run_checks(max_k, fault)?;
    let mut all_passed = true;
    for report in &reports {
        let tag = if report.passed { "PASS" } else { "FAIL" };
        all_passed &= report.passed;
        println!("{tag} {}: {}", report.name, report.detail);
    }
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
