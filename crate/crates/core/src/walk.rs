//! Hadamard walk on a cycle of `P` positions.
//!
//! Basis states `|c, x>` (coin `c`, position `x`) live at flat index
//! `c * P + x`. Coin-0 amplitudes are the `alpha_x`, coin-1 amplitudes the
//! `beta_x`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{kron, matmul, vector_norm, ComplexMatrix};

/// Normalization tolerance for walk states.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coin {
    Zero,
    One,
}

impl Coin {
    pub fn index(self) -> usize {
        match self {
            Coin::Zero => 0,
            Coin::One => 1,
        }
    }
}

impl TryFrom<u8> for Coin {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        match value {
            0 => Ok(Coin::Zero),
            1 => Ok(Coin::One),
            other => Err(Error::invalid(format!("coin must be 0 or 1, got {other}"))),
        }
    }
}

/// Initial basis state and walk time a [`WalkState`] was evolved from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Origin {
    pub coin: Coin,
    pub position: usize,
    pub steps: usize,
}

/// Normalized pure state on coin (x) position, dimension `2P`.
#[derive(Clone, Debug)]
pub struct WalkState {
    positions: usize,
    amplitudes: Vec<Complex64>,
    origin: Option<Origin>,
}

impl WalkState {
    /// Wraps raw amplitudes; fails unless there are `2P` of them with unit norm.
    pub fn from_amplitudes(positions: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if positions < 2 {
            return Err(Error::invalid(format!("need P >= 2 positions, got {positions}")));
        }
        if amplitudes.len() != 2 * positions {
            return Err(Error::invalid(format!(
                "walk state on P = {positions} needs {} amplitudes, got {}",
                2 * positions,
                amplitudes.len()
            )));
        }
        let norm = vector_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("walk state has norm {norm}, expected 1")));
        }
        Ok(Self {
            positions,
            amplitudes,
            origin: None,
        })
    }

    pub fn basis(coin: Coin, position: usize, positions: usize) -> Result<Self> {
        check_positions(positions)?;
        if position >= positions {
            return Err(Error::invalid(format!(
                "position {position} out of range 0..{positions}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 2 * positions];
        amplitudes[flat_index(coin, position, positions)] = Complex64::new(1.0, 0.0);
        Ok(Self {
            positions,
            amplitudes,
            origin: Some(Origin {
                coin,
                position,
                steps: 0,
            }),
        })
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn dim(&self) -> usize {
        2 * self.positions
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `alpha_x`, the coin-0 amplitude at position `x`.
    pub fn alpha(&self, x: usize) -> Complex64 {
        self.amplitudes[x]
    }

    /// `beta_x`, the coin-1 amplitude at position `x`.
    pub fn beta(&self, x: usize) -> Complex64 {
        self.amplitudes[self.positions + x]
    }

    pub fn origin(&self) -> Option<Origin> {
        self.origin
    }

    pub fn norm(&self) -> f64 {
        vector_norm(&self.amplitudes)
    }
}

/// Probability of finding the walker at each position.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionDistribution {
    pub probs: Vec<f64>,
}

impl PositionDistribution {
    pub fn positions(&self) -> usize {
        self.probs.len()
    }

    /// Largest probability and the lowest position attaining it.
    pub fn max(&self) -> (usize, f64) {
        self.probs
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, p)| if p > best.1 { (i, p) } else { best })
    }
}

pub fn flat_index(coin: Coin, position: usize, positions: usize) -> usize {
    coin.index() * positions + position
}

fn check_positions(positions: usize) -> Result<()> {
    if positions < 2 {
        return Err(Error::invalid(format!("need P >= 2 positions, got {positions}")));
    }
    Ok(())
}

/// 2x2 Hadamard coin.
pub fn hadamard() -> ComplexMatrix {
    let s = FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]]).expect("2x2")
}

/// Conditional shift on the cycle: `|0,x> -> |0,x+1>`, `|1,x> -> |1,x-1>` (mod P).
pub fn shift_operator(positions: usize) -> Result<ComplexMatrix> {
    check_positions(positions)?;
    let p = positions;
    let mut s = ComplexMatrix::zeros(2 * p, 2 * p);
    for x in 0..p {
        let from0 = flat_index(Coin::Zero, x, p);
        let from1 = flat_index(Coin::One, x, p);
        s[(flat_index(Coin::Zero, (x + 1) % p, p), from0)] = Complex64::new(1.0, 0.0);
        s[(flat_index(Coin::One, (x + p - 1) % p, p), from1)] = Complex64::new(1.0, 0.0);
    }
    Ok(s)
}

/// One walk step `W = S (H (x) I_P)`.
pub fn walk_operator(positions: usize) -> Result<ComplexMatrix> {
    let s = shift_operator(positions)?;
    let coin = kron(&hadamard(), &ComplexMatrix::identity(positions));
    matmul(&s, &coin)
}

/// `W^T |c0, x0>`, by `T` repeated matrix-vector products.
pub fn evolve(coin: Coin, position: usize, positions: usize, steps: usize) -> Result<WalkState> {
    let start = WalkState::basis(coin, position, positions)?;
    if steps == 0 {
        return Ok(start);
    }
    let w = walk_operator(positions)?;
    let mut amplitudes = start.amplitudes;
    for _ in 0..steps {
        amplitudes = w.apply(&amplitudes)?;
    }
    Ok(WalkState {
        positions,
        amplitudes,
        origin: Some(Origin {
            coin,
            position,
            steps,
        }),
    })
}

/// The honest state `|w_0> = W^T |0, 0>`.
pub fn honest_state(positions: usize, steps: usize) -> Result<WalkState> {
    evolve(Coin::Zero, 0, positions, steps)
}

/// `probs[z] = |alpha_z|^2 + |beta_z|^2`.
pub fn position_distribution(state: &WalkState) -> PositionDistribution {
    let probs = (0..state.positions)
        .map(|z| state.alpha(z).norm_sqr() + state.beta(z).norm_sqr())
        .collect();
    PositionDistribution { probs }
}

/// `gamma = max_z P(|w> -> z)`.
pub fn gamma(state: &WalkState) -> f64 {
    position_distribution(state).max().1
}
