//! The KLJN loop: two parties, each with a resistor and its noise
//! generator, joined by an ideal wire.
//!
//! Polarity: positive wire current flows from Alice toward Bob, so a positive
//! `<u_w i_w>` is net power delivered from Alice to Bob.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{check_positive, Error, Result};
use crate::noise::{johnson_msv, NoiseTrace, NonlinearityParams};

/// Which of the two resistors a party connected for the period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BitChoice {
    High,
    Low,
}

impl BitChoice {
    pub fn letter(self) -> char {
        match self {
            BitChoice::High => 'H',
            BitChoice::Low => 'L',
        }
    }
}

/// Alice's and Bob's choices, written Alice first (`HL` = Alice high).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitSituation {
    pub alice: BitChoice,
    pub bob: BitChoice,
}

impl BitSituation {
    pub const HH: Self = Self::new(BitChoice::High, BitChoice::High);
    pub const HL: Self = Self::new(BitChoice::High, BitChoice::Low);
    pub const LH: Self = Self::new(BitChoice::Low, BitChoice::High);
    pub const LL: Self = Self::new(BitChoice::Low, BitChoice::Low);
    pub const ALL: [Self; 4] = [Self::HH, Self::HL, Self::LH, Self::LL];

    pub const fn new(alice: BitChoice, bob: BitChoice) -> Self {
        Self { alice, bob }
    }

    /// HL and LH produce the same wire statistics in the linear scheme.
    pub fn is_secure(&self) -> bool {
        self.alice != self.bob
    }

    pub fn secure(&self) -> Option<SecureSituation> {
        match (self.alice, self.bob) {
            (BitChoice::High, BitChoice::Low) => Some(SecureSituation::HL),
            (BitChoice::Low, BitChoice::High) => Some(SecureSituation::LH),
            _ => None,
        }
    }
}

impl fmt::Display for BitSituation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.alice.letter(), self.bob.letter())
    }
}

/// A situation that yields a key bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SecureSituation {
    HL,
    LH,
}

impl SecureSituation {
    pub const BOTH: [Self; 2] = [Self::HL, Self::LH];

    pub fn situation(self) -> BitSituation {
        match self {
            SecureSituation::HL => BitSituation::HL,
            SecureSituation::LH => BitSituation::LH,
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            SecureSituation::HL => SecureSituation::LH,
            SecureSituation::LH => SecureSituation::HL,
        }
    }

    /// Public bit convention: HL is 1, LH is 0.
    pub fn bit(self) -> u8 {
        match self {
            SecureSituation::HL => 1,
            SecureSituation::LH => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SecureSituation::HL => "HL",
            SecureSituation::LH => "LH",
        }
    }
}

impl fmt::Display for SecureSituation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<SecureSituation> for BitSituation {
    fn from(s: SecureSituation) -> Self {
        s.situation()
    }
}

/// The `R_H`, `R_L` pair each party owns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResistorPair {
    r_h: f64,
    r_l: f64,
}

impl ResistorPair {
    pub fn new(r_h: f64, r_l: f64) -> Result<Self> {
        if r_h.is_finite() && r_l.is_finite() && r_h > r_l && r_l > 0.0 {
            Ok(Self { r_h, r_l })
        } else {
            Err(Error::ResistorOrder { r_h, r_l })
        }
    }

    pub fn r_h(&self) -> f64 {
        self.r_h
    }

    pub fn r_l(&self) -> f64 {
        self.r_l
    }

    pub fn resistance(&self, choice: BitChoice) -> f64 {
        match choice {
            BitChoice::High => self.r_h,
            BitChoice::Low => self.r_l,
        }
    }

    /// `(r_alice, r_bob)` for a situation.
    pub fn resistances(&self, situation: BitSituation) -> (f64, f64) {
        (self.resistance(situation.alice), self.resistance(situation.bob))
    }
}

/// Wire voltage and current, one pair per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct WireTrace {
    u_w: Vec<f64>,
    i_w: Vec<f64>,
}

impl WireTrace {
    pub fn new(u_w: Vec<f64>, i_w: Vec<f64>) -> Result<Self> {
        if u_w.len() != i_w.len() {
            return Err(Error::LengthMismatch {
                left: u_w.len(),
                right: i_w.len(),
            });
        }
        Ok(Self { u_w, i_w })
    }

    pub fn voltage(&self) -> &[f64] {
        &self.u_w
    }

    pub fn current(&self) -> &[f64] {
        &self.i_w
    }

    pub fn len(&self) -> usize {
        self.u_w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_w.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.u_w.iter().copied().zip(self.i_w.iter().copied())
    }
}

/// `R_A R_B / (R_A + R_B)`.
pub fn parallel_resistance(r_a: f64, r_b: f64) -> Result<f64> {
    check_positive("r_a", r_a)?;
    check_positive("r_b", r_b)?;
    Ok(r_a * r_b / (r_a + r_b))
}

/// Mean-square wire voltage the linear scheme produces in `situation`.
pub fn expected_wire_msv(
    pair: &ResistorPair,
    situation: BitSituation,
    t_eff: f64,
    bandwidth: f64,
) -> Result<f64> {
    let (r_a, r_b) = pair.resistances(situation);
    let r_p = parallel_resistance(r_a, r_b)?;
    Ok(johnson_msv(
        check_positive("t_eff", t_eff)?,
        r_p,
        check_positive("bandwidth", bandwidth)?,
    ))
}

/// Kirchhoff's laws for one step: returns `(u_w, i_w)`.
#[inline]
pub fn loop_step(u_a: f64, u_b: f64, r_a: f64, r_b: f64) -> (f64, f64) {
    let r_loop = r_a + r_b;
    let i_w = (u_a - u_b) / r_loop;
    let u_w = (u_a * r_b + u_b * r_a) / r_loop;
    (u_w, i_w)
}

/// Wire voltage and current for two generator output traces.
pub fn solve_loop(
    u_star_alice: &NoiseTrace,
    u_star_bob: &NoiseTrace,
    r_a: f64,
    r_b: f64,
) -> Result<WireTrace> {
    if u_star_alice.len() != u_star_bob.len() {
        return Err(Error::LengthMismatch {
            left: u_star_alice.len(),
            right: u_star_bob.len(),
        });
    }
    check_positive("r_a", r_a)?;
    check_positive("r_b", r_b)?;
    let (u_w, i_w) = u_star_alice
        .iter()
        .zip(u_star_bob.iter())
        .map(|(&a, &b)| loop_step(a, b, r_a, r_b))
        .unzip();
    Ok(WireTrace { u_w, i_w })
}

/// Closed-form `<u_w i_w>` when each party drives a zero-mean Gaussian of
/// variance `sigma2_*` through `params`.
///
/// With `m = <u*>` and `M = <u*²>` per party,
/// `P = [r_b M_A − r_a M_B + (r_a − r_b) m_A m_B] / (r_a + r_b)²`, where for
/// unit gain `m = Bσ²` and `M = σ² + 6Cσ⁴ + 3B²σ⁴ + 15C²σ⁶`.
pub fn analytic_mean_power(
    r_a: f64,
    r_b: f64,
    sigma2_a: f64,
    sigma2_b: f64,
    params: &NonlinearityParams,
) -> f64 {
    let (b, c) = (params.b(), params.c());
    let moments = |s2: f64| {
        let m = b * s2;
        let big_m = s2 + (6.0 * c + 3.0 * b * b) * s2 * s2 + 15.0 * c * c * s2 * s2 * s2;
        (m, big_m)
    };
    let (m_a, big_m_a) = moments(sigma2_a);
    let (m_b, big_m_b) = moments(sigma2_b);
    let r_loop = r_a + r_b;
    let gain2 = params.a() * params.a();
    // grouped so that swapping the parties negates the result exactly
    let cross = (r_a - r_b) * (m_a * m_b);
    gain2 * ((r_b * big_m_a - r_a * big_m_b) + cross) / (r_loop * r_loop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseSource;
    use alloc::vec;
    use proptest::prelude::*;

    fn fig_pair() -> ResistorPair {
        ResistorPair::new(1e5, 1e4).unwrap()
    }

    #[test]
    fn parallel_examples() {
        assert!((parallel_resistance(1e5, 1e4).unwrap() - 9090.909090909).abs() < 1e-6);
        assert_eq!(parallel_resistance(1e5, 1e5).unwrap(), 5e4);
        assert_eq!(parallel_resistance(3.0, 3.0).unwrap(), 1.5);
        assert!(parallel_resistance(0.0, 1.0).is_err());
        assert!(parallel_resistance(1.0, -2.0).is_err());
    }

    #[test]
    fn pair_order_enforced() {
        assert!(ResistorPair::new(1e4, 1e5).is_err());
        assert!(ResistorPair::new(1e4, 1e4).is_err());
        assert!(ResistorPair::new(1e4, 0.0).is_err());
    }

    #[test]
    fn secure_only_for_mixed_choices() {
        let secure: Vec<_> = BitSituation::ALL.iter().map(|s| s.is_secure()).collect();
        assert_eq!(secure, vec![false, true, true, false]);
        assert_eq!(BitSituation::HL.secure(), Some(SecureSituation::HL));
        assert_eq!(BitSituation::LL.secure(), None);
        assert_eq!(alloc::format!("{}", BitSituation::LH), "LH");
    }

    #[test]
    fn three_levels() {
        let p = fig_pair();
        let msv = |s| expected_wire_msv(&p, s, 1e18, 500.0).unwrap();
        assert!((msv(BitSituation::HH) - 1380.0).abs() < 1e-9);
        assert!((msv(BitSituation::HL) - 250.909090909).abs() < 1e-6);
        assert_eq!(msv(BitSituation::HL), msv(BitSituation::LH));
        assert!((msv(BitSituation::LL) - 138.0).abs() < 1e-9);
    }

    #[test]
    fn loop_examples() {
        let a = NoiseTrace::new(vec![11.0]).unwrap();
        let b = NoiseTrace::new(vec![0.0]).unwrap();
        let w = solve_loop(&a, &b, 1e5, 1e4).unwrap();
        assert!((w.current()[0] - 1e-4).abs() < 1e-18);
        assert!((w.voltage()[0] - 1.0).abs() < 1e-12);

        let same = NoiseTrace::new(vec![3.0, -2.0, 0.5]).unwrap();
        let w = solve_loop(&same, &same, 1e5, 1e4).unwrap();
        assert!(w.current().iter().all(|&i| i == 0.0));
        for (u, x) in w.voltage().iter().zip(same.iter()) {
            assert!((u - x).abs() < 1e-12);
        }

        let short = NoiseTrace::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(
            solve_loop(&same, &short, 1.0, 1.0),
            Err(Error::LengthMismatch { left: 3, right: 2 })
        );
    }

    #[test]
    fn ideal_power_is_zero() {
        for s in BitSituation::ALL {
            let (ra, rb) = fig_pair().resistances(s);
            let sa = NoiseSource::new(1e18, ra, 500.0, 0).unwrap().mean_square();
            let sb = NoiseSource::new(1e18, rb, 500.0, 0).unwrap().mean_square();
            let p = analytic_mean_power(ra, rb, sa, sb, &NonlinearityParams::IDEAL);
            // rounding only
            assert!(p.abs() < 1e-18, "{s}: {p}");
        }
    }

    #[test]
    fn d2_hl_power_positive_and_even_in_b() {
        let (ra, rb) = fig_pair().resistances(BitSituation::HL);
        let p = analytic_mean_power(ra, rb, 2760.0, 276.0, &NonlinearityParams::D2);
        assert!(p > 0.0);
        let neg = NonlinearityParams::with_unit_gain(-6e-3, 0.0).unwrap();
        let q = analytic_mean_power(ra, rb, 2760.0, 276.0, &neg);
        assert!((p - q).abs() <= 1e-12 * p.abs());
    }

    #[test]
    fn d3_power_sign_follows_c() {
        let (ra, rb) = fig_pair().resistances(BitSituation::HL);
        let pos = analytic_mean_power(ra, rb, 2760.0, 276.0, &NonlinearityParams::D3);
        let neg_c = NonlinearityParams::with_unit_gain(0.0, -5e-5).unwrap();
        let neg = analytic_mean_power(ra, rb, 2760.0, 276.0, &neg_c);
        assert!(pos > 0.0 && neg < 0.0);
    }

    proptest! {
        #[test]
        fn loop_equations_hold(
            ua in prop::collection::vec(-1e3f64..1e3, 1..32),
            ub_seed in -1e3f64..1e3,
            ra in 1.0f64..1e6,
            rb in 1.0f64..1e6,
        ) {
            let ub: Vec<f64> = ua.iter().map(|x| x * 0.37 + ub_seed).collect();
            let a = NoiseTrace::new(ua).unwrap();
            let b = NoiseTrace::new(ub).unwrap();
            let w = solve_loop(&a, &b, ra, rb).unwrap();
            for ((&x, &y), (u, i)) in a.iter().zip(b.iter()).zip(w.iter()) {
                let scale = x.abs().max(y.abs()).max(1.0);
                prop_assert!((x - i * ra - u).abs() < 1e-9 * scale);
                prop_assert!((u - y - i * rb).abs() < 1e-9 * scale);
            }
            // relabelling the two ends negates the current only
            let swapped = solve_loop(&b, &a, rb, ra).unwrap();
            for ((u, i), (su, si)) in w.iter().zip(swapped.iter()) {
                prop_assert!((u - su).abs() <= 1e-12 * u.abs().max(1.0));
                prop_assert_eq!(i, -si);
            }
        }

        #[test]
        fn level_ordering(rl in 1.0f64..1e6, ratio in 1.0001f64..1e3) {
            let p = ResistorPair::new(rl * ratio, rl).unwrap();
            let msv = |s| expected_wire_msv(&p, s, 1e18, 500.0).unwrap();
            prop_assert!(msv(BitSituation::HH) > msv(BitSituation::HL));
            prop_assert_eq!(msv(BitSituation::HL), msv(BitSituation::LH));
            prop_assert!(msv(BitSituation::LH) > msv(BitSituation::LL));
        }

        #[test]
        fn power_antisymmetric_under_party_swap(
            ra in 1.0f64..1e6, rb in 1.0f64..1e6,
            sa in 1e-3f64..1e4, sb in 1e-3f64..1e4,
            b in -1e-2f64..1e-2, c in -1e-4f64..1e-4,
        ) {
            let params = NonlinearityParams::with_unit_gain(b, c).unwrap();
            let p = analytic_mean_power(ra, rb, sa, sb, &params);
            let q = analytic_mean_power(rb, ra, sb, sa, &params);
            prop_assert_eq!(p, -q);
        }
    }
}
