//! Mean profit per turn to the whole ensemble.
//!
//! For the schedule `AʳBˢ` the mean is read off the reduced chain:
//!
//! ```text
//! μ[r,s] = 1/(r+s) · Σ_{v<s} π̄ P̄_Aʳ P̄_Bᵛ Ṗ̄_B 1
//! ```
//!
//! where `π̄` is stationary for `P̄_Aʳ P̄_Bˢ` and `Ṗ̄_B 1` is the expected
//! payoff of one game-B turn from each class. Game A contributes nothing
//! because its signed matrix has zero row sums. The unreduced formula
//! ([`full_state_mean`]) and the three-player closed forms
//! ([`closed_form_n3`]) are kept as independent checks.


use crate::error::{Error, Result};
use crate::game::{
    build_game_a, build_game_b, build_game_b_signed, check_mixture_weight, ParamVector, PatternSpec,
};
use crate::matrix::{dense_pattern_product, TransitionMatrix};
use crate::scalar::Scalar;
use crate::stationary::{
    classify_boundary, pattern_stationary_in, solve_dense, solve_stationary, ReducibleCase,
    SolverMethod, StationaryResult,
};
use crate::symmetry::{build_classes, reduced_game_b, QuotientModel, ReducedGames, SymmetryGroup};

/// Largest ring accepted by the unreduced oracle.
pub const FULL_STATE_ORACLE_MAX_N: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ProfitReport<T> {
    pub mu: T,
    pub pattern: PatternSpec,
    pub n: usize,
    pub params: ParamVector<T>,
    pub group: SymmetryGroup,
    pub case_id: u8,
    /// Stationary residual; 0 when the mean is forced without solving.
    pub residual: f64,
    pub class_count: usize,
    pub method: Option<SolverMethod>,
}

/// A quotient model reused across many parameter points with the same ring
/// and group.
#[derive(Debug, Clone)]
pub struct MeanCalculator {
    model: QuotientModel,
}

impl MeanCalculator {
    pub fn new(n: usize, group: SymmetryGroup) -> Result<Self> {
        Ok(Self {
            model: build_classes(n, group)?,
        })
    }

    pub fn model(&self) -> &QuotientModel {
        &self.model
    }

    fn report<T: Scalar>(
        &self,
        mu: T,
        pattern: PatternSpec,
        params: &ParamVector<T>,
        case_id: u8,
        stationary: Option<&StationaryResult<T>>,
    ) -> ProfitReport<T> {
        ProfitReport {
            mu,
            pattern,
            n: self.model.n(),
            params: params.clone(),
            group: self.model.group(),
            case_id,
            residual: stationary.map_or(0.0, |s| s.residual),
            class_count: self.model.class_count(),
            method: stationary.map(|s| s.method),
        }
    }

    /// `μ[r,s]`
    pub fn pattern<T: Scalar>(&self, params: &ParamVector<T>, r: usize, s: usize) -> Result<ProfitReport<T>> {
        let spec = PatternSpec::pattern(r, s)?;
        let case = classify_boundary(params, self.model.n())?;
        let games = ReducedGames::build(&self.model, params)?;
        let stationary = pattern_stationary_in(&games, &case, r, s)?;
        let payoff = games.b_signed.row_sums();
        let mut w = stationary.pi.clone();
        for _ in 0..r {
            w = games.a.left_mul(&w)?;
        }
        let mut total = T::zero();
        for v in 0..s {
            total = total + dot(&w, &payoff);
            if v + 1 < s {
                w = games.b.left_mul(&w)?;
            }
        }
        let mu = total / T::from_usize(r + s);
        Ok(self.report(mu, spec, params, case.case_id, Some(&stationary)))
    }

    /// `μ_B`, always playing game B.
    pub fn game_b<T: Scalar>(&self, params: &ParamVector<T>) -> Result<ProfitReport<T>> {
        let case = classify_boundary(params, self.model.n())?;
        self.model.group().check_compatible(params)?;
        match case.case_id {
            2 => return Ok(self.report(-T::one(), PatternSpec::GameB, params, 2, None)),
            4 => return Ok(self.report(T::one(), PatternSpec::GameB, params, 4, None)),
            6 => return Err(absorbing_both_ends()),
            _ => {}
        }
        let games = ReducedGames::build(&self.model, params)?;
        let excluded = b_exclusions(&case).excluded_classes(&self.model)?;
        let stationary = solve_stationary(&games.b, &excluded)?;
        let mu = dot(&stationary.pi, &games.b_signed.row_sums());
        Ok(self.report(mu, PatternSpec::GameB, params, case.case_id, Some(&stationary)))
    }

    /// `μ(γ,1−γ)` from the one-step matrix `γP̄_A + (1 − γ)P̄_B`.
    pub fn mixture<T: Scalar>(&self, params: &ParamVector<T>, gamma: &T) -> Result<ProfitReport<T>> {
        check_mixture_weight(gamma)?;
        let rest = T::one() - gamma.clone();
        let games = ReducedGames::build(&self.model, params)?;
        let a_signed = reduced_game_b(&self.model, &ParamVector::fair(), true)?;
        let mixed = TransitionMatrix::affine_combination(gamma, &games.a, &rest, &games.b)?;
        let stationary = solve_stationary(&mixed, &[])?;
        let payoff: Vec<T> = a_signed
            .row_sums()
            .into_iter()
            .zip(games.b_signed.row_sums())
            .map(|(da, db)| gamma.clone() * da + rest.clone() * db)
            .collect();
        let mu = dot(&stationary.pi, &payoff);
        let spec = PatternSpec::Mixture {
            gamma: gamma.to_f64(),
        };
        Ok(self.report(mu, spec, params, 0, Some(&stationary)))
    }

    pub fn mean<T: Scalar>(&self, params: &ParamVector<T>, pattern: &PatternSpec) -> Result<ProfitReport<T>> {
        match *pattern {
            PatternSpec::GameB => self.game_b(params),
            PatternSpec::Pattern { r, s } => self.pattern(params, r, s),
            PatternSpec::Mixture { gamma } => self.mixture(params, &T::from_f64(gamma)),
        }
    }
}

fn absorbing_both_ends() -> Error {
    Error::NonErgodic("with p0 = 0 and p3 = 1 game B is absorbed at all losers or all winners".into())
}

/// Game B alone never visits the alternating states' exclusion; only the
/// all-losers / all-winners exclusions carry over.
fn b_exclusions(case: &ReducibleCase) -> ReducibleCase {
    match case.case_id {
        1 | 3 | 5 => case.clone(),
        _ => ReducibleCase {
            case_id: case.case_id,
            excluded_states: vec![],
        },
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// `μ[r,s]` with the group chosen from the parameters (dihedral iff p₁ = p₂).
pub fn mean_pattern<T: Scalar>(n: usize, params: &ParamVector<T>, r: usize, s: usize) -> Result<ProfitReport<T>> {
    MeanCalculator::new(n, SymmetryGroup::auto(n, params))?.pattern(params, r, s)
}

pub fn mean_pattern_with_group<T: Scalar>(
    n: usize,
    params: &ParamVector<T>,
    r: usize,
    s: usize,
    group: SymmetryGroup,
) -> Result<ProfitReport<T>> {
    MeanCalculator::new(n, group)?.pattern(params, r, s)
}

/// `μ_B`. Forced to −1 / +1 when all losers / all winners absorb.
pub fn mean_game_b<T: Scalar>(n: usize, params: &ParamVector<T>) -> Result<ProfitReport<T>> {
    MeanCalculator::new(n, SymmetryGroup::auto(n, params))?.game_b(params)
}

/// `μ(γ,1−γ)` through the mixed one-step matrix.
pub fn mean_mixture<T: Scalar>(n: usize, params: &ParamVector<T>, gamma: &T) -> Result<ProfitReport<T>> {
    MeanCalculator::new(n, SymmetryGroup::auto(n, params))?.mixture(params, gamma)
}

/// `μ(γ,1−γ)` as `μ_B` at `p̂ₘ = γ/2 + (1 − γ)pₘ`.
pub fn mean_mixture_by_substitution<T: Scalar>(
    n: usize,
    params: &ParamVector<T>,
    gamma: &T,
) -> Result<ProfitReport<T>> {
    let hat = params.mixed_with_fair(gamma)?;
    let mut report = mean_game_b(n, &hat)?;
    report.pattern = PatternSpec::Mixture {
        gamma: gamma.to_f64(),
    };
    report.params = params.clone();
    Ok(report)
}

pub fn mean<T: Scalar>(n: usize, params: &ParamVector<T>, pattern: &PatternSpec) -> Result<ProfitReport<T>> {
    MeanCalculator::new(n, SymmetryGroup::auto(n, params))?.mean(params, pattern)
}

/// The mean computed on all `2ⁿ` configurations with no symmetry reduction.
pub fn full_state_mean<T: Scalar>(n: usize, params: &ParamVector<T>, pattern: &PatternSpec) -> Result<T> {
    if n > FULL_STATE_ORACLE_MAX_N {
        return Err(Error::InvalidParameter(format!(
            "the unreduced oracle is limited to n <= {FULL_STATE_ORACLE_MAX_N}"
        )));
    }
    pattern.validate()?;
    let b = build_game_b(n, params)?;
    let b_signed = build_game_b_signed(n, params)?;
    let payoff = b_signed.row_sums();
    match *pattern {
        PatternSpec::GameB => {
            let case = classify_boundary(params, n)?;
            match case.case_id {
                2 => return Ok(-T::one()),
                4 => return Ok(T::one()),
                6 => return Err(absorbing_both_ends()),
                _ => {}
            }
            let stationary = solve_dense(&b.to_dense(), &b_exclusions(&case).excluded_indices())?;
            Ok(dot(&stationary.pi, &payoff))
        }
        PatternSpec::Pattern { r, s } => {
            let case = classify_boundary(params, n)?;
            let a = build_game_a(n)?;
            let product = dense_pattern_product(&a, r, &b, s)?;
            let stationary = solve_dense(&product, &case.excluded_indices())?;
            let mut w = stationary.pi;
            for _ in 0..r {
                w = a.left_mul(&w)?;
            }
            let mut total = T::zero();
            for _ in 0..s {
                total = total + dot(&w, &payoff);
                w = b.left_mul(&w)?;
            }
            Ok(total / T::from_usize(r + s))
        }
        PatternSpec::Mixture { gamma } => {
            let gamma = T::from_f64(gamma);
            let rest = T::one() - gamma.clone();
            let a = build_game_a(n)?;
            let mixed = TransitionMatrix::affine_combination(&gamma, &a, &rest, &b)?;
            let stationary = solve_dense(&mixed.to_dense(), &[])?;
            Ok(rest * dot(&stationary.pi, &payoff))
        }
    }
}

/// Three-player closed forms (with `p₂ = p₁`) for game B and the patterns
/// `[1,1]`, `[1,2]`, `[2,1]`.
pub fn closed_form_n3<T: Scalar>(params: &ParamVector<T>, pattern: &PatternSpec) -> Result<T> {
    if !params.has_equal_middle() {
        return Err(Error::InvalidParameter("closed forms need p1 = p2".into()));
    }
    let c = |k: i64| T::from_usize(k as usize);
    let p0 = params.p(0).clone();
    let p1 = params.p(1).clone();
    let p3 = params.p(3).clone();
    let (q0, q1, q3) = (params.q(0), params.q(1), params.q(3));

    let (num, den) = match *pattern {
        PatternSpec::GameB => (
            p1.clone() * (p0.clone() + q3.clone()) - q3.clone(),
            p0.clone() * p1.clone() + c(2) * p0.clone() * q3.clone() + q1 * q3,
        ),
        PatternSpec::Pattern { r: 1, s: 1 } => (
            c(5) * (c(2) * p1.clone() * (c(3) + p0.clone() + q3.clone()) - c(3) * q0 - c(5) * q3.clone()),
            c(2) * (c(17)
                + c(15) * p0.clone()
                + c(4) * p0.clone() * p1.clone()
                + c(8) * p0 * q3.clone()
                + c(4) * p1 * p3
                + c(4) * q1
                + c(19) * q3),
        ),
        PatternSpec::Pattern { r: 2, s: 1 } => (
            c(38) * (p1.clone() * (c(12) + p0.clone() + q3.clone()) - c(6) * q0 - c(7) * q3.clone()),
            c(3) * (c(367)
                + c(111) * p0.clone()
                + c(8) * p0.clone() * p1.clone()
                + c(16) * p0 * q3.clone()
                + c(8) * p1 * p3
                + c(8) * q1
                + c(119) * q3),
        ),
        PatternSpec::Pattern { r: 1, s: 2 } => one_two(&p0, &p1, &p3),
        _ => {
            return Err(Error::InvalidPattern(format!(
                "no three-player closed form for {pattern}"
            )))
        }
    };
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

fn one_two<T: Scalar>(p0: &T, p1: &T, p3: &T) -> (T, T) {
    let c = |k: i64| {
        if k < 0 {
            -T::from_usize((-k) as usize)
        } else {
            T::from_usize(k as usize)
        }
    };
    let p0 = p0.clone();
    let p1 = p1.clone();
    let p3 = p3.clone();
    let p0p0 = p0.clone() * p0.clone();
    let p3p3 = p3.clone() * p3.clone();
    let p0p3 = p0.clone() * p3.clone();
    let gap = T::one() - p0.clone() - p3.clone();

    let constant = c(-494) + c(287) * p0.clone() - c(51) * p0p0.clone() + c(181) * p3.clone()
        - c(13) * p0p3.clone()
        - c(12) * p0p0.clone() * p3.clone()
        + c(142) * p3p3.clone()
        - c(40) * p0.clone() * p3p3.clone();
    let linear = c(520) + c(61) * p0.clone() - c(65) * p0p0.clone() - c(113) * p3.clone()
        + c(130) * p0p3.clone()
        - c(28) * p0p0.clone() * p3.clone()
        - c(65) * p3p3.clone()
        + c(28) * p0.clone() * p3p3.clone();
    let quadratic = c(2) * gap.clone() * (c(13) + c(7) * p0.clone() - c(7) * p3.clone());
    let num = c(2)
        * (constant + linear * p1.clone() - quadratic * p1.clone() * p1.clone());

    let den_constant = c(494) + c(335) * p0.clone() - c(154) * p0p0.clone() - c(157) * p3.clone()
        - c(64) * p0p3.clone()
        + c(32) * p0p0.clone() * p3.clone()
        - c(130) * p3p3.clone()
        - c(64) * p0.clone() * p3p3.clone()
        + c(32) * p0p0 * p3p3;
    let den_linear =
        c(2) * gap.clone() * (c(89) - c(8) * p0.clone() + c(16) * p3.clone() - c(16) * p0p3);
    let den_quadratic = c(8) * gap.clone() * gap;
    let den = c(3)
        * (den_constant - den_linear * p1.clone() + den_quadratic * p1.clone() * p1);
    (num, den)
}
