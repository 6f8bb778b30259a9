//! Ring configurations, game parameters, schedules and the full-state
//! transition matrices of games A and B.
//!
//! A configuration of `n` players is encoded as an integer whose bit `i - 1`
//! holds the status of player `i` (1 = winner, 0 = loser). Player 0 is
//! player `n` and player `n + 1` is player 1.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::TransitionMatrix;
use crate::scalar::Scalar;

/// Largest ring for which full `2ⁿ`-state matrices are built.
pub const MAX_FULL_STATE_N: usize = 20;

/// Largest ring the bit encoding supports.
pub const MAX_RING: usize = 63;

pub(crate) fn check_ring(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("ring size {n} is below 3")));
    }
    if n > MAX_RING {
        return Err(Error::InvalidParameter(format!("ring size {n} exceeds {MAX_RING}")));
    }
    Ok(())
}

/// Statuses of all players on the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    n: usize,
    bits: u64,
}

impl Configuration {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        check_ring(n)?;
        if bits >> n != 0 {
            return Err(Error::InvalidParameter(format!(
                "encoding {bits} has bits beyond player {n}"
            )));
        }
        Ok(Self { n, bits })
    }

    /// Builds from the statuses `x₁ … x_N`.
    pub fn from_statuses(statuses: &[u8]) -> Result<Self> {
        let mut bits = 0u64;
        for (i, &s) in statuses.iter().enumerate() {
            match s {
                0 => {}
                1 => bits |= 1 << i,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "status {s} of player {} is not 0 or 1",
                        i + 1
                    )))
                }
            }
        }
        Self::new(statuses.len(), bits)
    }

    pub fn all_losers(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn all_winners(n: usize) -> Result<Self> {
        Self::new(n, full_mask(n))
    }

    /// The alternating configuration `x_i = (i + phase) mod 2`.
    pub fn alternating(n: usize, phase: u8) -> Result<Self> {
        let statuses: Vec<u8> = (1..=n).map(|i| ((i + phase as usize) % 2) as u8).collect();
        Self::from_statuses(&statuses)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn encode(&self) -> u64 {
        self.bits
    }

    /// Status of player `i` (1-based, circular).
    pub fn status(&self, i: isize) -> u8 {
        let idx = (i - 1).rem_euclid(self.n as isize) as usize;
        ((self.bits >> idx) & 1) as u8
    }

    pub fn statuses(&self) -> Vec<u8> {
        (1..=self.n as isize).map(|i| self.status(i)).collect()
    }

    /// `2·x_{i−1} + x_{i+1}` for player `i`.
    pub fn neighbor_index(&self, i: usize) -> Result<u8> {
        if i == 0 || i > self.n {
            return Err(Error::InvalidParameter(format!(
                "player {i} outside 1..={}",
                self.n
            )));
        }
        Ok(neighbor_index_raw(self.n, self.bits, i - 1))
    }

    /// The configuration with player `i` flipped.
    pub fn flipped(&self, i: usize) -> Result<Self> {
        if i == 0 || i > self.n {
            return Err(Error::InvalidParameter(format!(
                "player {i} outside 1..={}",
                self.n
            )));
        }
        Ok(Self {
            n: self.n,
            bits: self.bits ^ (1 << (i - 1)),
        })
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.statuses() {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Neighbor index of the player stored at bit `bit` (0-based).
#[inline]
pub(crate) fn neighbor_index_raw(n: usize, state: u64, bit: usize) -> u8 {
    let left = (bit + n - 1) % n;
    let right = (bit + 1) % n;
    (2 * ((state >> left) & 1) + ((state >> right) & 1)) as u8
}

/// Win probabilities `(p₀, p₁, p₂, p₃)` indexed by neighbor status.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector<T> {
    p: [T; 4],
}

impl<T: Scalar> ParamVector<T> {
    pub fn new(p: [T; 4]) -> Result<Self> {
        for (m, pm) in p.iter().enumerate() {
            if pm.is_negative() || *pm > T::one() {
                return Err(Error::InvalidParameter(format!(
                    "p{m} = {pm} is outside [0, 1]"
                )));
            }
        }
        Ok(Self { p })
    }

    /// `(p₀, p₁, p₁, p₃)`.
    pub fn symmetric(p0: T, p1: T, p3: T) -> Result<Self> {
        Self::new([p0, p1.clone(), p1, p3])
    }

    /// Game A: every coin is fair.
    pub fn fair() -> Self {
        let half = T::from_ratio(1, 2);
        Self {
            p: [half.clone(), half.clone(), half.clone(), half],
        }
    }

    pub fn parse(texts: &[&str]) -> Result<Self> {
        match texts {
            [a, b, c, d] => Self::new([
                T::parse_probability(a)?,
                T::parse_probability(b)?,
                T::parse_probability(c)?,
                T::parse_probability(d)?,
            ]),
            [a, b, c] => {
                Self::symmetric(T::parse_probability(a)?, T::parse_probability(b)?, T::parse_probability(c)?)
            }
            _ => Err(Error::InvalidParameter(format!(
                "expected 3 or 4 probabilities, got {}",
                texts.len()
            ))),
        }
    }

    pub fn p(&self, m: usize) -> &T {
        &self.p[m]
    }

    pub fn q(&self, m: usize) -> T {
        T::one() - self.p[m].clone()
    }

    pub fn as_array(&self) -> &[T; 4] {
        &self.p
    }

    pub fn has_equal_middle(&self) -> bool {
        self.p[1] == self.p[2]
    }

    /// `(q₃, q₂, q₁, q₀)`, the parameters of the win/loss-swapped game.
    pub fn coupled(&self) -> Self {
        Self {
            p: [self.q(3), self.q(2), self.q(1), self.q(0)],
        }
    }

    /// `p̂ₘ = γ/2 + (1 − γ)pₘ`, the one-step law of the γ-mixture of A and B.
    pub fn mixed_with_fair(&self, gamma: &T) -> Result<Self> {
        check_mixture_weight(gamma)?;
        let half = T::from_ratio(1, 2);
        let one_minus = T::one() - gamma.clone();
        let p = std::array::from_fn(|m| {
            gamma.clone() * half.clone() + one_minus.clone() * self.p[m].clone()
        });
        Ok(Self { p })
    }

    pub fn to_f64(&self) -> ParamVector<f64> {
        ParamVector {
            p: std::array::from_fn(|m| self.p[m].to_f64()),
        }
    }
}

pub(crate) fn check_mixture_weight<T: Scalar>(gamma: &T) -> Result<()> {
    if !gamma.is_positive() || *gamma >= T::one() {
        return Err(Error::InvalidPattern(format!(
            "mixture weight {gamma} is outside (0, 1)"
        )));
    }
    Ok(())
}

impl<T: Scalar> fmt::Display for ParamVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.p[0], self.p[1], self.p[2], self.p[3])
    }
}

/// Which game is played on each turn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatternSpec {
    /// Always game B.
    GameB,
    /// `AʳBˢ` repeated forever.
    Pattern { r: usize, s: usize },
    /// Each turn: A with probability γ, otherwise B.
    Mixture { gamma: f64 },
}

impl PatternSpec {
    pub fn pattern(r: usize, s: usize) -> Result<Self> {
        if r == 0 || s == 0 {
            return Err(Error::InvalidPattern(format!(
                "[{r},{s}] needs r >= 1 and s >= 1"
            )));
        }
        Ok(Self::Pattern { r, s })
    }

    pub fn mixture(gamma: f64) -> Result<Self> {
        check_mixture_weight(&gamma)?;
        Ok(Self::Mixture { gamma })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::GameB => Ok(()),
            Self::Pattern { r, s } => Self::pattern(r, s).map(|_| ()),
            Self::Mixture { gamma } => Self::mixture(gamma).map(|_| ()),
        }
    }

    /// The six patterns with `r + s ≤ 4`, in table column order.
    pub fn table_patterns() -> Vec<Self> {
        [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1)]
            .into_iter()
            .map(|(r, s)| Self::Pattern { r, s })
            .collect()
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GameB => write!(f, "B"),
            Self::Pattern { r, s } => write!(f, "[{r},{s}]"),
            Self::Mixture { gamma } => write!(f, "({gamma},{})", 1.0 - gamma),
        }
    }
}

/// One row of `P_B` (or `Ṗ_B` when `signed`), columns in flip order with the
/// diagonal last. The diagonal is accumulated term by term before any use of
/// `qₘ = 1 − pₘ`; `signed` negates every `qₘ` term.
pub(crate) fn game_b_row<T: Scalar>(
    n: usize,
    state: u64,
    params: &ParamVector<T>,
    signed: bool,
    n_inv: &T,
) -> Vec<(usize, T)> {
    let mut row = Vec::with_capacity(n + 1);
    let mut diagonal = T::zero();
    for bit in 0..n {
        let m = neighbor_index_raw(n, state, bit) as usize;
        let win = params.p(m).clone() * n_inv.clone();
        let mut loss = params.q(m) * n_inv.clone();
        if signed {
            loss = -loss;
        }
        let target = (state ^ (1 << bit)) as usize;
        if (state >> bit) & 1 == 0 {
            row.push((target, win));
            diagonal = diagonal + loss;
        } else {
            row.push((target, loss));
            diagonal = diagonal + win;
        }
    }
    row.push((state as usize, diagonal));
    row
}

fn build_full<T: Scalar>(n: usize, params: &ParamVector<T>, signed: bool) -> Result<TransitionMatrix<T>> {
    check_ring(n)?;
    if n > MAX_FULL_STATE_N {
        return Err(Error::InvalidParameter(format!(
            "full-state matrices are limited to n <= {MAX_FULL_STATE_N}"
        )));
    }
    let n_inv = T::one() / T::from_usize(n);
    let rows = (0..1u64 << n)
        .map(|state| game_b_row(n, state, params, signed, &n_inv))
        .collect();
    Ok(TransitionMatrix::from_rows(rows, !signed))
}

/// The `2ⁿ × 2ⁿ` one-step matrix of game B.
pub fn build_game_b<T: Scalar>(n: usize, params: &ParamVector<T>) -> Result<TransitionMatrix<T>> {
    build_full(n, params, false)
}

/// Game B with all coins fair.
pub fn build_game_a<T: Scalar>(n: usize) -> Result<TransitionMatrix<T>> {
    build_full(n, &ParamVector::fair(), false)
}

/// Payoff-signed `Ṗ_B`: the `qₘ` terms of `P_B` negated, so `Ṗ_B · 1` is the
/// expected one-turn payoff from each state.
pub fn build_game_b_signed<T: Scalar>(
    n: usize,
    params: &ParamVector<T>,
) -> Result<TransitionMatrix<T>> {
    build_full(n, params, true)
}
