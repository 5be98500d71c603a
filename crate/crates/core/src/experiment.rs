//! Monte Carlo estimation of Eve's correct-guess probability.
//!
//! A cell is one `(case, γ)` pair. Its repeats are independent secure bit
//! exchanges whose streams are addressed by the repeat index, so cells can be
//! evaluated sequentially here or split across threads by a caller (see
//! [`run_repeat`] and [`aggregate`]) with identical results.
//!
//! The cell seed depends on the user seed, the case and γ but not on the
//! temperature: the points of a temperature sweep reuse the same draws,
//! scaled. This keeps sweep curves smooth and makes the sweep point at the
//! operating temperature identical to the matching table cell.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand_core::RngCore;

use crate::attack::{run_bit_exchange, simulate_wire, BitExchangeOutcome, ExchangeStreams, LoopSetup};
use crate::circuit::{parallel_resistance, BitChoice, BitSituation, ResistorPair, SecureSituation};
use crate::error::{check_positive, Error, Result};
use crate::noise::{johnson_msv, total_distortion, NoiseSource, NonlinearityParams};
use crate::rng::{derive_seed, stream_id, stream_rng, StreamRole};
use crate::stats::RunningStats;

const EXPERIMENT_TAG: u64 = 0x6578_7065;
const SCATTER_TAG: u64 = 0x7363_6174;

/// Default seed used by the CLI when none is given.
pub const DEFAULT_SEED: u64 = 20_211_104;

/// Named distortion cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseLabel {
    Ideal,
    D2,
    D3,
    D23,
}

impl CaseLabel {
    pub const ALL: [Self; 4] = [Self::Ideal, Self::D2, Self::D3, Self::D23];
    pub const NONLINEAR: [Self; 3] = [Self::D2, Self::D3, Self::D23];

    /// Reference coefficients for the case.
    pub fn params(self) -> NonlinearityParams {
        match self {
            CaseLabel::Ideal => NonlinearityParams::IDEAL,
            CaseLabel::D2 => NonlinearityParams::D2,
            CaseLabel::D3 => NonlinearityParams::D3,
            CaseLabel::D23 => NonlinearityParams::D23,
        }
    }

    /// The case whose zero pattern matches `(b, c)`.
    pub fn classify(params: &NonlinearityParams) -> Self {
        match (params.b() != 0.0, params.c() != 0.0) {
            (false, false) => CaseLabel::Ideal,
            (true, false) => CaseLabel::D2,
            (false, true) => CaseLabel::D3,
            (true, true) => CaseLabel::D23,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::Ideal => "ideal",
            CaseLabel::D2 => "d2",
            CaseLabel::D3 => "d3",
            CaseLabel::D23 => "d23",
        }
    }

    fn tag(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseLabel {
    type Err = UnknownCase;

    fn from_str(s: &str) -> core::result::Result<Self, UnknownCase> {
        CaseLabel::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or(UnknownCase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownCase;

impl fmt::Display for UnknownCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected one of: ideal, d2, d3, d23")
    }
}

/// Parameters of one Monte Carlo cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub pair: ResistorPair,
    pub t_eff: f64,
    pub bandwidth: f64,
    pub params: NonlinearityParams,
    pub gamma: usize,
    pub repeats: usize,
    pub seed: u64,
    pub case: CaseLabel,
    /// Draw all four situations and discard HH/LL instead of sampling
    /// HL/LH directly.
    pub protocol_faithful: bool,
}

impl ExperimentConfig {
    /// 100 kΩ / 10 kΩ at 10¹⁸ K over 500 Hz, γ = 1000, 1000 repeats.
    pub fn reference(case: CaseLabel) -> Self {
        Self {
            pair: ResistorPair::new(1e5, 1e4).expect("reference pair is ordered"),
            t_eff: 1e18,
            bandwidth: 500.0,
            params: case.params(),
            gamma: 1000,
            repeats: 1000,
            seed: DEFAULT_SEED,
            case,
            protocol_faithful: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("t_eff", self.t_eff)?;
        check_positive("bandwidth", self.bandwidth)?;
        if self.gamma == 0 {
            return Err(Error::ZeroSamples { name: "gamma" });
        }
        if self.repeats == 0 {
            return Err(Error::ZeroSamples { name: "repeats" });
        }
        if CaseLabel::classify(&self.params) != self.case {
            return Err(Error::CaseMismatch {
                label: self.case.as_str(),
                b: self.params.b(),
                c: self.params.c(),
            });
        }
        Ok(())
    }

    /// Same cell with a case's reference coefficients.
    pub fn with_case(self, case: CaseLabel) -> Self {
        Self {
            case,
            params: case.params(),
            ..self
        }
    }

    pub fn with_gamma(self, gamma: usize) -> Self {
        Self { gamma, ..self }
    }

    pub fn with_t_eff(self, t_eff: f64) -> Self {
        Self { t_eff, ..self }
    }

    pub fn cell_seed(&self) -> u64 {
        derive_seed(self.seed, &[EXPERIMENT_TAG, self.case.tag(), self.gamma as u64])
    }

    pub fn loop_setup(&self) -> LoopSetup {
        LoopSetup {
            pair: self.pair,
            t_eff: self.t_eff,
            bandwidth: self.bandwidth,
            params: self.params,
            gamma: self.gamma,
            seed: self.cell_seed(),
        }
    }

    /// RMS wire voltage of a secure situation in the linear scheme.
    pub fn secure_wire_rms(&self) -> f64 {
        let r_p = parallel_resistance(self.pair.r_h(), self.pair.r_l())
            .expect("pair resistances are positive");
        libm::sqrt(johnson_msv(self.t_eff, r_p, self.bandwidth))
    }

    /// TD of the generator amplifier driven by the `R_H` source.
    pub fn reference_distortion(&self) -> Result<f64> {
        let reference = NoiseSource::new(self.t_eff, self.pair.r_h(), self.bandwidth, 0)?;
        Ok(total_distortion(&self.params, &reference))
    }
}

/// One repeat: the exchange and how many insecure periods preceded it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepeatOutcome {
    pub outcome: BitExchangeOutcome,
    pub discarded: u32,
}

fn streams_for(repeat: u64, attempt: u32) -> ExchangeStreams {
    ExchangeStreams {
        alice: stream_id(repeat, attempt, StreamRole::AliceNoise),
        bob: stream_id(repeat, attempt, StreamRole::BobNoise),
        tie: stream_id(repeat, attempt, StreamRole::TieBreak),
    }
}

fn choice(bit: bool) -> BitChoice {
    if bit {
        BitChoice::High
    } else {
        BitChoice::Low
    }
}

/// Simulates repeat number `repeat` of the cell. Pure in `(config, repeat)`.
pub fn run_repeat(config: &ExperimentConfig, repeat: u64) -> Result<RepeatOutcome> {
    let setup = config.loop_setup();
    let mut attempt = 0u32;
    let truth = loop {
        let mut rng = stream_rng(setup.seed, stream_id(repeat, attempt, StreamRole::Situation));
        let word = rng.next_u32();
        if !config.protocol_faithful {
            break if word & 1 == 1 { BitSituation::HL } else { BitSituation::LH };
        }
        let drawn = BitSituation::new(choice(word & 1 == 1), choice(word & 2 == 2));
        if drawn.is_secure() {
            break drawn;
        }
        attempt += 1;
    };
    let outcome = run_bit_exchange(&setup, truth, &streams_for(repeat, attempt))?;
    Ok(RepeatOutcome {
        outcome,
        discarded: attempt,
    })
}

/// Statistics of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    /// Fraction of exchanges Eve guessed correctly.
    pub p_hat: f64,
    /// Binomial standard error `sqrt(p̂(1−p̂)/N)`.
    pub sigma: f64,
    /// Eve's bit error, `1 − p̂`.
    pub epsilon: f64,
    pub n_secure: usize,
    pub n_discarded: u64,
    pub total_distortion: f64,
    /// Mean over exchanges of Eve's measured power.
    pub mean_power: f64,
    pub mean_power_std_err: f64,
}

/// Folds repeat outcomes, in repeat order, into a report.
pub fn aggregate<I>(config: &ExperimentConfig, repeats: I) -> Result<ExperimentReport>
where
    I: IntoIterator<Item = RepeatOutcome>,
{
    let mut correct = 0usize;
    let mut n = 0usize;
    let mut discarded = 0u64;
    let mut power = RunningStats::new();
    for r in repeats {
        n += 1;
        correct += usize::from(r.outcome.correct);
        discarded += u64::from(r.discarded);
        power.push(r.outcome.mean_power);
    }
    if n == 0 {
        return Err(Error::ZeroSamples { name: "repeats" });
    }
    let p_hat = correct as f64 / n as f64;
    Ok(ExperimentReport {
        config: *config,
        p_hat,
        sigma: libm::sqrt(p_hat * (1.0 - p_hat) / n as f64),
        epsilon: 1.0 - p_hat,
        n_secure: n,
        n_discarded: discarded,
        total_distortion: config.reference_distortion()?,
        mean_power: power.mean(),
        mean_power_std_err: power.std_err(),
    })
}

/// Runs every repeat of a cell in order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let outcomes = (0..config.repeats as u64)
        .map(|r| run_repeat(config, r))
        .collect::<Result<Vec<_>>>()?;
    aggregate(config, outcomes)
}

/// Gammas of the reference table.
pub const TABLE_GAMMAS: [usize; 4] = [10, 20, 100, 1000];

/// Cells of a case × γ table, case-major.
pub fn table_configs(
    base: &ExperimentConfig,
    gammas: &[usize],
    cases: &[CaseLabel],
) -> Vec<ExperimentConfig> {
    cases
        .iter()
        .flat_map(|&case| gammas.iter().map(move |&g| base.with_case(case).with_gamma(g)))
        .collect()
}

pub fn run_table1(
    base: &ExperimentConfig,
    gammas: &[usize],
    cases: &[CaseLabel],
) -> Result<Vec<ExperimentReport>> {
    table_configs(base, gammas, cases)
        .iter()
        .map(run_experiment)
        .collect()
}

/// One temperature of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub case: CaseLabel,
    pub gamma: usize,
    pub t_eff: f64,
    /// RMS wire voltage of a secure situation at `t_eff`.
    pub u_w_rms: f64,
    pub p_hat: f64,
    pub sigma: f64,
    pub epsilon: f64,
}

impl SweepPoint {
    pub fn from_report(report: &ExperimentReport) -> Self {
        Self {
            case: report.config.case,
            gamma: report.config.gamma,
            t_eff: report.config.t_eff,
            u_w_rms: report.config.secure_wire_rms(),
            p_hat: report.p_hat,
            sigma: report.sigma,
            epsilon: report.epsilon,
        }
    }
}

/// `per_decade` points per decade from `t_min` up to and including `t_max`.
pub fn log_grid(t_min: f64, t_max: f64, per_decade: usize) -> Result<Vec<f64>> {
    check_positive("t_min", t_min)?;
    check_positive("t_max", t_max)?;
    if per_decade == 0 {
        return Err(Error::ZeroSamples { name: "per_decade" });
    }
    if t_max < t_min {
        return Err(Error::NotPositive {
            name: "t_max - t_min",
            value: t_max - t_min,
        });
    }
    let steps = libm::round(libm::log10(t_max / t_min) * per_decade as f64) as usize;
    Ok((0..=steps)
        .map(|i| t_min * libm::pow(10.0, i as f64 / per_decade as f64))
        .collect())
}

/// Cells of a sweep, γ-major then ascending temperature order as given.
pub fn sweep_configs(
    base: &ExperimentConfig,
    t_grid: &[f64],
    gammas: &[usize],
) -> Vec<ExperimentConfig> {
    gammas
        .iter()
        .flat_map(|&g| t_grid.iter().map(move |&t| base.with_gamma(g).with_t_eff(t)))
        .collect()
}

pub fn run_sweep(
    base: &ExperimentConfig,
    t_grid: &[f64],
    gammas: &[usize],
) -> Result<Vec<SweepPoint>> {
    sweep_configs(base, t_grid, gammas)
        .iter()
        .map(|c| run_experiment(c).map(|r| SweepPoint::from_report(&r)))
        .collect()
}

/// One `(u_w, i_w)` point for an IU scatter plot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterSample {
    pub case: CaseLabel,
    pub situation: SecureSituation,
    pub step: usize,
    pub u_w: f64,
    pub i_w: f64,
}

/// `points` consecutive wire samples for HL followed by LH.
///
/// Uses its own seed family, so it does not replay any table cell.
pub fn export_scatter(config: &ExperimentConfig, points: usize) -> Result<Vec<ScatterSample>> {
    if points == 0 {
        return Ok(Vec::new());
    }
    let mut setup = config.loop_setup();
    setup.gamma = points;
    setup.seed = derive_seed(config.seed, &[SCATTER_TAG, config.case.tag()]);
    let mut out = Vec::with_capacity(2 * points);
    for (k, situation) in SecureSituation::BOTH.into_iter().enumerate() {
        let wire = simulate_wire(&setup, situation.situation(), &streams_for(k as u64, 0))?;
        out.extend(wire.iter().enumerate().map(|(step, (u_w, i_w))| ScatterSample {
            case: config.case,
            situation,
            step,
            u_w,
            i_w,
        }));
    }
    Ok(out)
}
