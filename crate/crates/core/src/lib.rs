//! Simulation core for the Kirchhoff-law-Johnson-noise (KLJN) key exchange
//! with nonlinear noise generators, and the passive power-flow attack that
//! exploits the nonlinearity.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs and a 64-bit seed: random draws come from ChaCha
//! streams addressed by `(seed, stream_id)`, so results do not depend on how
//! work is scheduled across threads. IO, parallel scheduling and the CLI live
//! in the `kljn-lab` crate.
//!
//! Module map:
//!
//! * [`noise`]: Johnson-calibrated Gaussian sources, the cubic transfer
//!   function of the generator amplifier, total distortion.
//! * [`circuit`]: the two-resistor loop, wire voltage/current, the analytic
//!   mean-power oracle.
//! * [`attack`]: Eve's mean-power measurement, sign rule and key extraction.
//! * [`experiment`]: Monte Carlo repeats, correct-guess statistics, sweeps and
//!   scatter exports.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod attack;
pub mod circuit;
mod error;
pub mod experiment;
pub mod noise;
pub mod rng;
pub mod stats;

pub use attack::{
    extract_key, guess_bit, mean_power, power_statistics, run_bit_exchange, simulate_wire, BitExchangeOutcome, ExchangeStreams,
    GuessedKey, KeyOrientation, LoopSetup,
};
pub use circuit::{
    analytic_mean_power, expected_wire_msv, parallel_resistance, solve_loop, BitChoice,
    BitSituation, ResistorPair, SecureSituation, WireTrace,
};
pub use error::{Error, Result};
pub use experiment::{
    export_scatter, run_experiment, run_sweep, run_table1, CaseLabel, ExperimentConfig,
    ExperimentReport, ScatterSample, SweepPoint,
};
pub use noise::{
    apply_nonlinearity, empirical_total_distortion, generate_trace, johnson_mean_square,
    total_distortion, NoiseSource, NoiseTrace, NonlinearityParams, BOLTZMANN,
};
