//! Closed-form entropy bounds and key-length formulas.
//!
//! All key lengths are in bits. `N` signals are split into `m` sampled in the
//! `W` basis and `n = N - m` measured in `Z` for raw output.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

/// Alphabet size `d >= 2` for the `d`-ary entropy functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Alphabet(u64);

impl Alphabet {
    pub const BINARY: Alphabet = Alphabet(2);

    pub fn new(d: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid(format!("alphabet size must be >= 2, got {d}")));
        }
        Ok(Alphabet(d))
    }

    pub fn size(self) -> u64 {
        self.0
    }

    fn ln(self) -> f64 {
        (self.0 as f64).ln()
    }
}

/// `x ln x` with the `0 ln 0 = 0` convention.
fn x_ln_x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `h_d(x) = x log_d(d-1) - x log_d(x) - (1-x) log_d(1-x)` for `x` in `[0, 1]`.
pub fn d_ary_entropy(x: f64, d: Alphabet) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("entropy argument {x} outside [0, 1]")));
    }
    let alternatives = ((d.0 - 1) as f64).ln();
    Ok((x * alternatives - x_ln_x(x) - x_ln_x(1.0 - x)) / d.ln())
}

/// Binary entropy `h_2`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    d_ary_entropy(x, Alphabet::BINARY)
}

/// Extended `d`-ary entropy: 0 below 0, `h_d` on `[0, 1 - 1/d]`, 1 above.
pub fn extended_d_ary_entropy(x: f64, d: Alphabet) -> f64 {
    let knee = 1.0 - 1.0 / d.0 as f64;
    if x < 0.0 {
        0.0
    } else if x > knee {
        1.0
    } else {
        d_ary_entropy(x, d).expect("x in [0, 1 - 1/d]")
    }
}

/// Fraction of symbols in `q` that differ from `reference`.
pub fn relative_hamming_weight<T: PartialEq>(q: &[T], reference: &T) -> Result<f64> {
    if q.is_empty() {
        return Err(Error::invalid("relative Hamming weight of an empty string"));
    }
    let weight = q.iter().filter(|s| *s != reference).count();
    Ok(weight as f64 / q.len() as f64)
}

fn check_split(total: u64, sample: u64) -> Result<()> {
    if sample == 0 || sample >= total {
        return Err(Error::invalid(format!(
            "sample size must satisfy 0 < m < N, got m = {sample}, N = {total}"
        )));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Sampling error `delta = sqrt((N + 2) ln(2 / eps^2) / (m N))`.
pub fn sampling_delta(total: u64, sample: u64, eps: f64) -> Result<f64> {
    check_split(total, sample)?;
    check_eps(eps)?;
    let (n, m) = (total as f64, sample as f64);
    Ok(((n + 2.0) * (2.0 / (eps * eps)).ln() / (m * n)).sqrt())
}

fn check_overlap(c: f64) -> Result<()> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::invalid(format!("overlap must lie in (0, 1], got {c}")));
    }
    Ok(())
}

/// Key length from the standard relation, `n (-log2 c - 2 h_2(Q))`.
pub fn standard_eur_key_length(n: u64, c: f64, q: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("key length needs n >= 1"));
    }
    check_overlap(c)?;
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::invalid(format!("noise Q must lie in [0, 0.5], got {q}")));
    }
    Ok(n as f64 * (-c.log2() - 2.0 * binary_entropy(q)?))
}

/// Lower bound on the smooth min-entropy from the standard relation,
/// `-log2 c - H_max`.
pub fn standard_eur_bound(h_max: f64, c: f64) -> Result<f64> {
    check_overlap(c)?;
    Ok(-c.log2() - h_max)
}

/// Trace-distance bound after privacy amplification, `2^{-(h_min - ell)/2} + 2 eps`.
pub fn security_distance_bound(h_min: f64, ell: f64, eps: f64) -> f64 {
    (-(h_min - ell) / 2.0).exp2() + 2.0 * eps
}

/// Smoothing parameter `2 eps + 2 eps^{1/3}`.
pub fn smoothing_epsilon(eps: f64) -> f64 {
    2.0 * eps + 2.0 * eps.cbrt()
}

/// Distance to an ideal string, `5 eps + 4 eps^{1/3}`.
pub fn closeness_epsilon(eps: f64) -> f64 {
    5.0 * eps + 4.0 * eps.cbrt()
}

/// Probability `eps^{1/3}` with which the sampling bound may fail.
pub fn failure_probability(eps: f64) -> f64 {
    eps.cbrt()
}

/// Draws an observed relative weight `Binomial(m, q) / m`.
pub fn sampled_relative_weight<R: Rng + ?Sized>(rng: &mut R, sample: u64, q: f64) -> Result<f64> {
    let binomial = Binomial::new(sample, q)
        .map_err(|e| Error::invalid(format!("binomial({sample}, {q}): {e}")))?;
    Ok(binomial.sample(rng) as f64 / sample as f64)
}

/// Parameters for one evaluation of the sampling-based key length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyRateInput {
    /// `N`, total signals.
    pub total: u64,
    /// `m`, signals sampled in `W`.
    pub sample: u64,
    /// Observed relative Hamming weight `w(q)`.
    pub w_q: f64,
    pub eps: f64,
    /// Walker positions `P`; the state dimension is `2P`.
    pub positions: usize,
    /// `max_z P(|w0> -> z)`.
    pub gamma: f64,
    /// Overlap `c` for the standard-relation comparison.
    pub overlap: f64,
}

impl KeyRateInput {
    /// Default `overlap` is 1, the value for the walk POVM pair.
    pub fn new(
        total: u64,
        sample: u64,
        w_q: f64,
        eps: f64,
        positions: usize,
        gamma: f64,
    ) -> Result<Self> {
        let input = Self {
            total,
            sample,
            w_q,
            eps,
            positions,
            gamma,
            overlap: 1.0,
        };
        input.validate()?;
        Ok(input)
    }

    pub fn with_overlap(mut self, overlap: f64) -> Result<Self> {
        check_overlap(overlap)?;
        self.overlap = overlap;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_split(self.total, self.sample)?;
        check_eps(self.eps)?;
        check_overlap(self.overlap)?;
        if !(0.0..=1.0).contains(&self.w_q) {
            return Err(Error::invalid(format!("w(q) = {} outside [0, 1]", self.w_q)));
        }
        if self.positions < 2 {
            return Err(Error::invalid(format!("need P >= 2, got {}", self.positions)));
        }
        let floor = 1.0 / self.positions as f64;
        if !(self.gamma >= floor - 1e-12 && self.gamma <= 1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "gamma = {} outside [1/P, 1] for P = {}",
                self.gamma, self.positions
            )));
        }
        Ok(())
    }

    /// `n = N - m`.
    pub fn raw_signals(&self) -> u64 {
        self.total - self.sample
    }

    /// State dimension `D = 2P`.
    pub fn dimension(&self) -> u64 {
        2 * self.positions as u64
    }
}

/// Evaluated key lengths and security parameters for one [`KeyRateInput`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyRateRow {
    pub input: KeyRateInput,
    pub delta: f64,
    pub eta_q: f64,
    pub ell_new: f64,
    pub ell_standard: f64,
    /// `ell_new / N`.
    pub rate_new: f64,
    pub eps_closeness: f64,
    pub eps_smooth: f64,
}

/// Sampling-based key length
/// `ell = -eta log2(gamma) - n H_D(w + delta) / log_D(2) - 2 log2(1/eps)`
/// with `eta = (N - m)(1 - w - delta)` clamped at zero and `D = 2P`.
pub fn sampling_key_length(input: &KeyRateInput) -> Result<KeyRateRow> {
    input.validate()?;
    let n = input.raw_signals();
    let delta = sampling_delta(input.total, input.sample, input.eps)?;
    let eta_q = (n as f64 * (1.0 - input.w_q - delta)).max(0.0);

    let d = Alphabet::new(input.dimension())?;
    let log_d_of_2 = std::f64::consts::LN_2 / d.ln();
    let noise_term = n as f64 * extended_d_ary_entropy(input.w_q + delta, d) / log_d_of_2;
    let ell_new = -eta_q * input.gamma.log2() - noise_term - 2.0 * (1.0 / input.eps).log2();

    // Q in the standard formula is capped at 1/2, where h_2 peaks.
    let ell_standard = standard_eur_key_length(n, input.overlap, input.w_q.min(0.5))?;

    Ok(KeyRateRow {
        input: *input,
        delta,
        eta_q,
        ell_new,
        ell_standard,
        rate_new: ell_new / input.total as f64,
        eps_closeness: closeness_epsilon(input.eps),
        eps_smooth: smoothing_epsilon(input.eps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values below were evaluated with mpmath at 40 digits.
    const H2_OF_0_11: f64 = 0.499_915_958_164_527_995_6;
    const DELTA_1E6_1E5_1E7: f64 = 0.018_146_460_905_960_024_09;
    const STANDARD_1000_HALF_005: f64 = 427.206_085_768_087_742_5;
    const DISTANCE_60_1E10: f64 = 1.131_322_574_615_478_515_625e-9;

    fn d(n: u64) -> Alphabet {
        Alphabet::new(n).unwrap()
    }

    #[test]
    fn binary_entropy_values() {
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((binary_entropy(0.11).unwrap() - H2_OF_0_11).abs() < 1e-14);
        for k in [2, 3, 10, 102] {
            assert_eq!(d_ary_entropy(0.0, d(k)).unwrap(), 0.0);
        }
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
    }

    #[test]
    fn entropy_rejects_out_of_range() {
        assert!(d_ary_entropy(-0.01, d(3)).is_err());
        assert!(d_ary_entropy(1.5, d(3)).is_err());
        assert!(Alphabet::new(1).is_err());
    }

    #[test]
    fn binary_entropy_symmetry() {
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            assert!((binary_entropy(x).unwrap() - binary_entropy(1.0 - x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn extended_entropy_pieces() {
        assert_eq!(extended_d_ary_entropy(-0.2, d(2)), 0.0);
        assert_eq!(extended_d_ary_entropy(0.99, d(2)), 1.0);
        for k in [2, 3, 6, 102] {
            let knee = 1.0 - 1.0 / k as f64;
            assert!((extended_d_ary_entropy(knee, d(k)) - 1.0).abs() < 1e-12);
            assert!((d_ary_entropy(knee, d(k)).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn extended_entropy_is_monotone() {
        for k in [2, 5, 102] {
            let mut prev = f64::NEG_INFINITY;
            for i in -100..=1100 {
                let y = extended_d_ary_entropy(i as f64 / 1000.0, d(k));
                assert!(y >= prev - 1e-15 && (0.0..=1.0).contains(&y));
                prev = y;
            }
        }
    }

    #[test]
    fn hamming_weights() {
        assert_eq!(relative_hamming_weight(&[0, 0, 0, 0], &0).unwrap(), 0.0);
        assert_eq!(relative_hamming_weight(&[0, 1, 0, 1], &0).unwrap(), 0.5);
        assert_eq!(relative_hamming_weight(&[2u8, 1, 0, 2], &0).unwrap(), 0.75);
        assert!(relative_hamming_weight::<u8>(&[], &0).is_err());
    }

    #[test]
    fn sampling_delta_value_and_monotonicity() {
        let got = sampling_delta(1_000_000, 100_000, 1e-7).unwrap();
        assert!((got - DELTA_1E6_1E5_1E7).abs() / DELTA_1E6_1E5_1E7 < 1e-12);
        assert!(sampling_delta(1000, 200, 1e-3).unwrap() < sampling_delta(1000, 100, 1e-3).unwrap());
        let smallest = sampling_delta(1000, 999, 1e-3).unwrap();
        for m in 1..999 {
            assert!(sampling_delta(1000, m, 1e-3).unwrap() > smallest);
        }
    }

    #[test]
    fn sampling_delta_domain() {
        assert!(sampling_delta(10, 0, 0.1).is_err());
        assert!(sampling_delta(10, 10, 0.1).is_err());
        assert!(sampling_delta(10, 5, 0.0).is_err());
        assert!(sampling_delta(10, 5, 1.0).is_err());
    }

    #[test]
    fn standard_key_length_cases() {
        assert!(standard_eur_key_length(100, 1.0, 0.01).unwrap() < 0.0);
        assert_eq!(standard_eur_key_length(100, 1.0, 0.0).unwrap(), 0.0);
        let got = standard_eur_key_length(1000, 0.5, 0.05).unwrap();
        assert!((got - STANDARD_1000_HALF_005).abs() < 1e-9);
        assert!(standard_eur_key_length(100, 0.0, 0.1).is_err());
        assert!(standard_eur_key_length(100, 0.5, 0.6).is_err());
        assert!(standard_eur_key_length(0, 0.5, 0.1).is_err());
    }

    #[test]
    fn security_distance_cases() {
        assert!((security_distance_bound(30.0, 10.0, 0.0) - 2f64.powi(-10)).abs() < 1e-18);
        assert_eq!(security_distance_bound(5.0, 5.0, 0.0), 1.0);
        let got = security_distance_bound(70.0, 10.0, 1e-10);
        assert!((got - DISTANCE_60_1E10).abs() / DISTANCE_60_1E10 < 1e-12);
    }

    #[test]
    fn standard_bound_cases() {
        assert_eq!(standard_eur_bound(0.3, 1.0).unwrap(), -0.3);
        assert_eq!(standard_eur_bound(0.0, 0.5).unwrap(), 1.0);
        assert!((standard_eur_bound(1.5, 2f64.powi(-7)).unwrap() - 5.5).abs() < 1e-12);
        assert!(standard_eur_bound(0.0, 0.0).is_err());
    }

    #[test]
    fn epsilon_accounting() {
        let eps = 1e-7;
        let row = sampling_key_length(&KeyRateInput::new(10_000, 1_000, 0.0, eps, 5, 0.5).unwrap())
            .unwrap();
        assert_eq!(row.eps_smooth, 2.0 * eps + 2.0 * eps.cbrt());
        assert_eq!(row.eps_closeness, 5.0 * eps + 4.0 * eps.cbrt());
        assert!((failure_probability(1e-9) - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn trivial_gamma_never_yields_key() {
        for &(w, total) in &[(0.0, 1_000_000u64), (0.1, 10_000), (0.3, 100_000)] {
            let row = sampling_key_length(&KeyRateInput::new(total, total / 10, w, 1e-7, 4, 1.0).unwrap())
                .unwrap();
            assert!(row.ell_new <= 0.0);
        }
    }

    #[test]
    fn noiseless_limit() {
        // As N grows with w = 0, delta -> 0 and ell -> -n log2(gamma) - 2 log2(1/eps).
        let (total, eps, gamma) = (10_000_000_000u64, 1e-7, 0.2);
        let input = KeyRateInput::new(total, total / 10, 0.0, eps, 5, gamma).unwrap();
        let row = sampling_key_length(&input).unwrap();
        let n = input.raw_signals() as f64;
        let limit = -n * gamma.log2() - 2.0 * (1.0 / eps).log2();
        assert!(((row.ell_new - limit) / limit).abs() < 0.01);
        assert!(row.delta < 1e-3);
    }

    #[test]
    fn eta_is_clamped() {
        let row = sampling_key_length(&KeyRateInput::new(100, 10, 0.9, 1e-7, 3, 0.5).unwrap()).unwrap();
        assert_eq!(row.eta_q, 0.0);
        let row = sampling_key_length(&KeyRateInput::new(1_000_000, 100_000, 0.05, 1e-7, 3, 0.5).unwrap())
            .unwrap();
        assert!((row.eta_q - 900_000.0 * (1.0 - 0.05 - row.delta)).abs() < 1e-6);
    }

    #[test]
    fn key_length_monotonicity() {
        let base = |w: f64, gamma: f64, total: u64| {
            sampling_key_length(&KeyRateInput::new(total, total / 10, w, 1e-7, 11, gamma).unwrap())
                .unwrap()
                .ell_new
        };
        for total in [10_000u64, 1_000_000] {
            for w in [0.0, 0.05, 0.1, 0.2] {
                let mut prev = f64::INFINITY;
                for k in 0..=20 {
                    let gamma = 1.0 / 11.0 + k as f64 * (1.0 - 1.0 / 11.0) / 20.0;
                    let ell = base(w, gamma, total);
                    assert!(ell <= prev + 1e-9);
                    prev = ell;
                }
            }
            let mut prev = f64::INFINITY;
            for k in 0..=40 {
                let ell = base(k as f64 * 0.01, 0.3, total);
                assert!(ell <= prev + 1e-9);
                prev = ell;
            }
        }
        // Fixed m/N: the rate always improves with N; ell itself only once it is positive.
        let rate = |w: f64, total: u64| base(w, 0.3, total) / total as f64;
        for w in [0.0, 0.05, 0.15, 0.2] {
            let mut prev = f64::NEG_INFINITY;
            for total in [1_000u64, 10_000, 100_000, 1_000_000, 10_000_000] {
                let r = rate(w, total);
                assert!(r >= prev, "w = {w}, N = {total}");
                prev = r;
            }
        }
        let mut prev = 0.0;
        for total in [100_000u64, 1_000_000, 10_000_000] {
            let ell = base(0.05, 0.3, total);
            assert!(ell > 0.0 && ell >= prev);
            prev = ell;
        }
        assert!(base(0.05, 0.3, 10_000) < base(0.05, 0.3, 1_000), "negative ell grows in magnitude");
    }

    #[test]
    fn input_validation() {
        assert!(KeyRateInput::new(100, 0, 0.0, 1e-7, 5, 0.5).is_err());
        assert!(KeyRateInput::new(100, 100, 0.0, 1e-7, 5, 0.5).is_err());
        assert!(KeyRateInput::new(100, 10, 1.2, 1e-7, 5, 0.5).is_err());
        assert!(KeyRateInput::new(100, 10, 0.0, 0.0, 5, 0.5).is_err());
        assert!(KeyRateInput::new(100, 10, 0.0, 1e-7, 5, 0.1).is_err());
        assert!(KeyRateInput::new(100, 10, 0.0, 1e-7, 5, 1.1).is_err());
        let input = KeyRateInput::new(100, 10, 0.0, 1e-7, 5, 0.2).unwrap();
        assert_eq!(input.raw_signals(), 90);
        assert!(input.with_overlap(0.0).is_err());
    }

    #[test]
    fn binomial_draws_are_fractions() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let w = sampled_relative_weight(&mut rng, 500, 0.15).unwrap();
            assert!((0.0..=1.0).contains(&w));
        }
        assert_eq!(sampled_relative_weight(&mut rng, 500, 0.0).unwrap(), 0.0);
        assert!(sampled_relative_weight(&mut rng, 10, 1.5).is_err());
    }
}
