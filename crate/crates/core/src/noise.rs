//! Johnson-calibrated noise sources and the generator nonlinearity.

use alloc::vec::Vec;
use core::ops::Deref;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_finite, check_positive, Error, Result};
use crate::rng::stream_rng;

/// Boltzmann constant in J/K, at the precision the simulator is calibrated to.
pub const BOLTZMANN: f64 = 1.38e-23;

/// `4 k T R Δf` without validation.
pub(crate) fn johnson_msv(t_eff: f64, resistance: f64, bandwidth: f64) -> f64 {
    4.0 * BOLTZMANN * t_eff * resistance * bandwidth
}

/// A resistor emulated at an effective temperature over a noise bandwidth.
///
/// The seed addresses the source's family of random streams; see
/// [`NoiseSource::stream`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSource {
    t_eff: f64,
    resistance: f64,
    bandwidth: f64,
    seed: u64,
}

impl NoiseSource {
    pub fn new(t_eff: f64, resistance: f64, bandwidth: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            t_eff: check_positive("t_eff", t_eff)?,
            resistance: check_positive("resistance", resistance)?,
            bandwidth: check_positive("bandwidth", bandwidth)?,
            seed,
        })
    }

    pub fn t_eff(&self) -> f64 {
        self.t_eff
    }

    pub fn resistance(&self) -> f64 {
        self.resistance
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Mean-square open-circuit voltage, `4 k T_eff R Δf_B`.
    pub fn mean_square(&self) -> f64 {
        johnson_msv(self.t_eff, self.resistance, self.bandwidth)
    }

    /// Lazily drawn samples of one stream. Collecting the first `γ` items
    /// gives exactly [`generate_trace`]'s output.
    pub fn stream(&self, stream_id: u64) -> NoiseStream {
        NoiseStream {
            rng: stream_rng(self.seed, stream_id),
            sigma: libm::sqrt(self.mean_square()),
        }
    }
}

/// Infinite iterator of zero-mean Gaussian samples with Johnson variance.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
    sigma: f64,
}

impl Iterator for NoiseStream {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        Some(self.sigma * z)
    }
}

/// `(a, b, c)` of the amplifier transfer `u* = a (u + b u² + c u³)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearityParams {
    a: f64,
    b: f64,
    c: f64,
}

impl NonlinearityParams {
    pub const IDEAL: Self = Self { a: 1.0, b: 0.0, c: 0.0 };
    /// Quadratic-only distortion used in the reference demonstrations.
    pub const D2: Self = Self { a: 1.0, b: 6e-3, c: 0.0 };
    /// Cubic-only distortion used in the reference demonstrations.
    pub const D3: Self = Self { a: 1.0, b: 0.0, c: 5e-5 };
    /// Both orders combined.
    pub const D23: Self = Self { a: 1.0, b: 1e-6, c: 5e-5 };

    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        Ok(Self {
            a: check_positive("a", a)?,
            b: check_finite("b", b)?,
            c: check_finite("c", c)?,
        })
    }

    /// Unit-gain transfer with the given second and third order terms.
    pub fn with_unit_gain(b: f64, c: f64) -> Result<Self> {
        Self::new(1.0, b, c)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    #[inline]
    pub fn transfer(&self, u: f64) -> f64 {
        self.a * (u + u * u * (self.b + self.c * u))
    }

    pub fn is_linear(&self) -> bool {
        self.b == 0.0 && self.c == 0.0
    }
}

impl Default for NonlinearityParams {
    fn default() -> Self {
        Self::IDEAL
    }
}

/// Per-step voltages of one generator over a bit-exchange period.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrace {
    samples: Vec<f64>,
}

impl NoiseTrace {
    /// Wraps samples; rejects empty or non-finite input.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyTrace);
        }
        if let Some(&bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::NotFinite { name: "sample", value: bad });
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Mean of the squared samples.
    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|u| u * u).sum::<f64>() / self.samples.len() as f64
    }
}

impl Deref for NoiseTrace {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.samples
    }
}

/// Open-circuit mean-square voltage of `source`.
pub fn johnson_mean_square(source: &NoiseSource) -> f64 {
    source.mean_square()
}

/// Draws `gamma` i.i.d. Gaussian samples from stream `stream_id` of `source`.
pub fn generate_trace(source: &NoiseSource, gamma: usize, stream_id: u64) -> Result<NoiseTrace> {
    if gamma == 0 {
        return Err(Error::ZeroSamples { name: "gamma" });
    }
    Ok(NoiseTrace {
        samples: source.stream(stream_id).take(gamma).collect(),
    })
}

/// Passes every sample through the amplifier transfer.
pub fn apply_nonlinearity(trace: &NoiseTrace, params: &NonlinearityParams) -> NoiseTrace {
    NoiseTrace {
        samples: trace.samples.iter().map(|&u| params.transfer(u)).collect(),
    }
}

/// Total distortion of the amplifier when driven by `reference`, evaluated
/// with the Gaussian moments `<U⁴> = 3σ⁴` and `<U⁶> = 15σ⁶`:
///
/// `TD = sqrt(<(B U²)²> + <(C U³)²>) / <U²>`.
///
/// The denominator is the mean square, not the rms, so the quadratic term is
/// independent of σ while the cubic term grows linearly with σ.
pub fn total_distortion(params: &NonlinearityParams, reference: &NoiseSource) -> f64 {
    let s2 = reference.mean_square();
    let (b, c) = (params.b, params.c);
    let numerator = 3.0 * b * b * s2 * s2 + 15.0 * c * c * s2 * s2 * s2;
    libm::sqrt(numerator) / s2
}

/// The same ratio with each moment estimated from an undistorted trace.
pub fn empirical_total_distortion(params: &NonlinearityParams, trace: &NoiseTrace) -> f64 {
    let n = trace.len() as f64;
    let (mut u2, mut u4, mut u6) = (0.0, 0.0, 0.0);
    for &u in trace.iter() {
        let sq = u * u;
        u2 += sq;
        u4 += sq * sq;
        u6 += sq * sq * sq;
    }
    let (u2, u4, u6) = (u2 / n, u4 / n, u6 / n);
    let (b, c) = (params.b, params.c);
    libm::sqrt(b * b * u4 + c * c * u6) / u2
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rh_source(seed: u64) -> NoiseSource {
        NoiseSource::new(1e18, 1e5, 500.0, seed).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn johnson_values() {
        assert!(rel(johnson_mean_square(&rh_source(0)), 2760.0) < 1e-12);
        let rl = NoiseSource::new(1e18, 1e4, 500.0, 0).unwrap();
        assert!(rel(johnson_mean_square(&rl), 276.0) < 1e-12);
        assert!(rel(johnson_mean_square(&rh_source(0)).sqrt(), 52.5357) < 1e-5);
        let hot = NoiseSource::new(4e18, 1e5, 500.0, 0).unwrap();
        assert!(rel(hot.mean_square(), 4.0 * 2760.0) < 1e-12);
        assert!(rel(hot.mean_square().sqrt(), 2.0 * 2760f64.sqrt()) < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_source_parameters() {
        assert!(NoiseSource::new(0.0, 1e5, 500.0, 0).is_err());
        assert!(NoiseSource::new(1e18, -1.0, 500.0, 0).is_err());
        assert!(NoiseSource::new(1e18, 1e5, f64::NAN, 0).is_err());
        assert!(NonlinearityParams::new(0.0, 0.0, 0.0).is_err());
        assert!(NonlinearityParams::new(1.0, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn zero_gamma_rejected() {
        assert_eq!(
            generate_trace(&rh_source(0), 0, 0),
            Err(Error::ZeroSamples { name: "gamma" })
        );
    }

    #[test]
    fn traces_are_reproducible() {
        let s = rh_source(99);
        assert_eq!(generate_trace(&s, 257, 5).unwrap(), generate_trace(&s, 257, 5).unwrap());
        assert_ne!(generate_trace(&s, 257, 5).unwrap(), generate_trace(&s, 257, 6).unwrap());
    }

    #[test]
    fn trace_calibration_and_gaussianity() {
        let gamma = 1_000_000;
        let s = rh_source(2024);
        let t = generate_trace(&s, gamma, 0).unwrap();
        let n = gamma as f64;
        let ms = t.mean_square();
        // sd(U²) = √2 σ²
        let se = 2f64.sqrt() * 2760.0 / n.sqrt();
        assert!(rel(ms, 2760.0) < 0.01);
        assert!((ms - 2760.0).abs() < 3.0 * se, "ms={ms} se={se}");

        let mean = t.iter().sum::<f64>() / n;
        let var = t.iter().map(|u| (u - mean).powi(2)).sum::<f64>() / n;
        let skew = t.iter().map(|u| (u - mean).powi(3)).sum::<f64>() / n / var.powf(1.5);
        let kurt = t.iter().map(|u| (u - mean).powi(4)).sum::<f64>() / n / (var * var) - 3.0;
        assert!(skew.abs() < 0.02, "skew={skew}");
        assert!(kurt.abs() < 0.05, "excess kurtosis={kurt}");
    }

    #[test]
    fn adjacent_streams_are_uncorrelated() {
        let gamma = 1_000_000;
        let s = rh_source(7);
        let x = generate_trace(&s, gamma, 11).unwrap();
        let y = generate_trace(&s, gamma, 12).unwrap();
        let sxy: f64 = x.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        let rho = sxy / (x.mean_square() * y.mean_square()).sqrt() / gamma as f64;
        assert!(rho.abs() < 5.0 / (gamma as f64).sqrt(), "rho={rho}");
    }

    #[test]
    fn nonlinearity_examples() {
        let t = NoiseTrace::new(alloc::vec![10.0, -3.0, 0.25]).unwrap();
        assert_eq!(apply_nonlinearity(&t, &NonlinearityParams::IDEAL), t);
        let d2 = NonlinearityParams::with_unit_gain(6e-3, 0.0).unwrap();
        assert!((apply_nonlinearity(&t, &d2)[0] - 10.6).abs() < 1e-12);
        let gain = NonlinearityParams::new(2.0, 0.0, 0.0).unwrap();
        let doubled: Vec<f64> = t.iter().map(|u| 2.0 * u).collect();
        assert_eq!(apply_nonlinearity(&t, &gain).samples(), &doubled[..]);
    }

    #[test]
    fn distortion_of_reference_cases() {
        let s = rh_source(0);
        assert_eq!(total_distortion(&NonlinearityParams::IDEAL, &s), 0.0);
        // √3·B, independent of σ
        let d2 = total_distortion(&NonlinearityParams::D2, &s);
        assert!(rel(d2, 3f64.sqrt() * 6e-3) < 1e-12);
        let rl = NoiseSource::new(3e17, 1e4, 500.0, 0).unwrap();
        assert!(rel(total_distortion(&NonlinearityParams::D2, &rl), d2) < 1e-12);
        // √15·C·σ
        let d3 = total_distortion(&NonlinearityParams::D3, &s);
        assert!(rel(d3, 15f64.sqrt() * 5e-5 * 2760f64.sqrt()) < 1e-12);
        assert!((d3 - 0.0102).abs() < 1e-4);
        let d23 = total_distortion(&NonlinearityParams::D23, &s);
        assert!((d23 - 0.0102).abs() < 1e-4);
        assert!(d23 > d3);
    }

    #[test]
    fn empirical_distortion_tracks_analytic() {
        let s = rh_source(31);
        let t = generate_trace(&s, 1_000_000, 0).unwrap();
        for p in [NonlinearityParams::D2, NonlinearityParams::D3, NonlinearityParams::D23] {
            let a = total_distortion(&p, &s);
            let e = empirical_total_distortion(&p, &t);
            assert!(rel(e, a) < 0.02, "{p:?}: empirical {e} analytic {a}");
        }
    }

    proptest! {
        #[test]
        fn linear_transfer_is_scaling(a in 1e-3f64..1e3, u in -1e4f64..1e4) {
            let p = NonlinearityParams::new(a, 0.0, 0.0).unwrap();
            prop_assert_eq!(p.transfer(u), a * u);
        }

        #[test]
        fn distortion_even_and_monotone(
            b in -1e-2f64..1e-2,
            c in -1e-4f64..1e-4,
            scale in 1.01f64..10.0,
        ) {
            let s = rh_source(0);
            let td = |b: f64, c: f64| {
                total_distortion(&NonlinearityParams::with_unit_gain(b, c).unwrap(), &s)
            };
            let base = td(b, c);
            prop_assert_eq!(base, td(-b, c));
            prop_assert_eq!(base, td(b, -c));
            prop_assert_eq!(base == 0.0, b == 0.0 && c == 0.0);
            if b != 0.0 {
                prop_assert!(td(b * scale, c) > base);
            }
            if c != 0.0 {
                prop_assert!(td(b, c * scale) > base);
            }
        }
    }
}
