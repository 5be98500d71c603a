//! Eve's passive nonlinearity attack.
//!
//! Eve samples the wire voltage and current over a bit-exchange period,
//! averages their product and reads the sign: positive power means Alice is
//! hotter, which for positive nonlinear coefficients means Alice holds `R_H`
//! (HL); negative means LH.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::circuit::{
    analytic_mean_power, loop_step, solve_loop, BitSituation, ResistorPair, SecureSituation,
    WireTrace,
};
use crate::error::{check_positive, Error, Result};
use crate::noise::{apply_nonlinearity, generate_trace, johnson_msv, NoiseSource, NonlinearityParams};
use crate::rng::stream_rng;
use crate::stats::RunningStats;

/// Everything needed to simulate one bit exchange apart from the situation
/// and the stream ids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSetup {
    pub pair: ResistorPair,
    pub t_eff: f64,
    pub bandwidth: f64,
    pub params: NonlinearityParams,
    /// Time steps per bit-exchange period (Eve sees the same steps).
    pub gamma: usize,
    pub seed: u64,
}

impl LoopSetup {
    pub fn validate(&self) -> Result<()> {
        check_positive("t_eff", self.t_eff)?;
        check_positive("bandwidth", self.bandwidth)?;
        if self.gamma == 0 {
            return Err(Error::ZeroSamples { name: "gamma" });
        }
        Ok(())
    }

    /// The two generators connected in `situation`, Alice first.
    pub fn sources(&self, situation: BitSituation) -> Result<(NoiseSource, NoiseSource)> {
        let (r_a, r_b) = self.pair.resistances(situation);
        Ok((
            NoiseSource::new(self.t_eff, r_a, self.bandwidth, self.seed)?,
            NoiseSource::new(self.t_eff, r_b, self.bandwidth, self.seed)?,
        ))
    }

    /// Analytic `<P_w>` for `situation` under this setup's nonlinearity.
    pub fn expected_power(&self, situation: BitSituation) -> f64 {
        let (r_a, r_b) = self.pair.resistances(situation);
        analytic_mean_power(
            r_a,
            r_b,
            johnson_msv(self.t_eff, r_a, self.bandwidth),
            johnson_msv(self.t_eff, r_b, self.bandwidth),
            &self.params,
        )
    }
}

/// Stream ids used by one exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExchangeStreams {
    pub alice: u64,
    pub bob: u64,
    /// Only consumed when the measured power is exactly zero.
    pub tie: u64,
}

/// Result of one simulated secure bit exchange as seen by Eve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitExchangeOutcome {
    pub truth: SecureSituation,
    pub mean_power: f64,
    pub guess: SecureSituation,
    pub correct: bool,
}

impl BitExchangeOutcome {
    pub fn new(truth: SecureSituation, mean_power: f64, guess: SecureSituation) -> Self {
        Self {
            truth,
            mean_power,
            guess,
            correct: guess == truth,
        }
    }
}

/// Arithmetic mean of `u_w i_w` over the trace.
pub fn mean_power(trace: &WireTrace) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(trace.iter().map(|(u, i)| u * i).sum::<f64>() / trace.len() as f64)
}

/// The public sign rule. A power of exactly zero carries no information and
/// is settled with one fair coin from `tie`.
pub fn guess_bit<R: RngCore>(power: f64, tie: &mut R) -> SecureSituation {
    if power > 0.0 {
        SecureSituation::HL
    } else if power < 0.0 {
        SecureSituation::LH
    } else if tie.next_u32() & 1 == 1 {
        SecureSituation::HL
    } else {
        SecureSituation::LH
    }
}

/// Draws both generators, distorts them, and solves the loop.
pub fn simulate_wire(
    setup: &LoopSetup,
    situation: BitSituation,
    streams: &ExchangeStreams,
) -> Result<WireTrace> {
    setup.validate()?;
    let (alice, bob) = setup.sources(situation)?;
    let u_a = apply_nonlinearity(&generate_trace(&alice, setup.gamma, streams.alice)?, &setup.params);
    let u_b = apply_nonlinearity(&generate_trace(&bob, setup.gamma, streams.bob)?, &setup.params);
    solve_loop(&u_a, &u_b, alice.resistance(), bob.resistance())
}

/// One secure bit exchange followed by Eve's guess.
pub fn run_bit_exchange(
    setup: &LoopSetup,
    truth: BitSituation,
    streams: &ExchangeStreams,
) -> Result<BitExchangeOutcome> {
    let secure = truth.secure().ok_or(Error::InsecureSituation(truth))?;
    let wire = simulate_wire(setup, truth, streams)?;
    let power = mean_power(&wire)?;
    let guess = guess_bit(power, &mut stream_rng(setup.seed, streams.tie));
    Ok(BitExchangeOutcome::new(secure, power, guess))
}

/// Per-step statistics of `u_w i_w` without materialising the traces.
///
/// Draws exactly the samples [`simulate_wire`] would, so the mean equals the
/// one [`run_bit_exchange`] measures on the same streams.
pub fn power_statistics(
    setup: &LoopSetup,
    situation: BitSituation,
    streams: &ExchangeStreams,
) -> Result<RunningStats> {
    setup.validate()?;
    let (alice, bob) = setup.sources(situation)?;
    let (r_a, r_b) = (alice.resistance(), bob.resistance());
    let params = setup.params;
    Ok(alice
        .stream(streams.alice)
        .zip(bob.stream(streams.bob))
        .take(setup.gamma)
        .map(|(a, b)| {
            let (u, i) = loop_step(params.transfer(a), params.transfer(b), r_a, r_b);
            u * i
        })
        .collect())
}

/// Whether Eve's raw guesses are the key or its complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyOrientation {
    AsIs,
    Inverted,
}

impl KeyOrientation {
    pub fn flipped(self) -> Self {
        match self {
            KeyOrientation::AsIs => KeyOrientation::Inverted,
            KeyOrientation::Inverted => KeyOrientation::AsIs,
        }
    }
}

/// Key bits as Eve reconstructs them (HL = 1, LH = 0 after orientation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessedKey {
    pub bits: Vec<u8>,
    pub orientation: KeyOrientation,
}

impl GuessedKey {
    /// The complementary key, as Eve would test when she does not know the
    /// sign of the coefficients.
    pub fn inverted(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| b ^ 1).collect(),
            orientation: self.orientation.flipped(),
        }
    }

    /// Fraction of positions that agree with `truth`.
    pub fn agreement(&self, truth: &[u8]) -> f64 {
        let n = self.bits.len().min(truth.len());
        if n == 0 {
            return 0.0;
        }
        let same = self.bits.iter().zip(truth).filter(|(a, b)| a == b).count();
        same as f64 / n as f64
    }
}

/// Turns guesses into a key. Eve knows the coefficients, so she evaluates
/// the expected HL power sign and inverts the raw bits when it is negative.
pub fn extract_key(outcomes: &[BitExchangeOutcome], setup: &LoopSetup) -> Result<GuessedKey> {
    if outcomes.is_empty() {
        return Err(Error::NoOutcomes);
    }
    let raw = GuessedKey {
        bits: outcomes.iter().map(|o| o.guess.bit()).collect(),
        orientation: KeyOrientation::AsIs,
    };
    if setup.expected_power(BitSituation::HL) < 0.0 {
        Ok(raw.inverted())
    } else {
        Ok(raw)
    }
}
