//! Stationary distributions of (reduced) chains, including the boundary
//! parameter regimes where some configurations are transient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{check_ring, Configuration, ParamVector};
use crate::matrix::{dense_pattern_product, DenseMatrix, TransitionMatrix};
use crate::scalar::Scalar;
use crate::symmetry::{build_classes, QuotientModel, ReducedGames, SymmetryGroup};

/// Chains up to this dimension are solved by dense elimination.
pub const DENSE_LIMIT: usize = 2000;

/// Largest accepted `‖πP − π‖∞` in float mode.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Boundary regime of the parameters together with the configurations that
/// are transient for `P_Aʳ P_Bˢ` in that regime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducibleCase {
    /// 0 for interior parameters, 1–6 for the handled boundary regimes.
    pub case_id: u8,
    pub excluded_states: Vec<Configuration>,
}

/// Classifies `(p₀, p₁, p₂, p₃)`:
///
/// | case | boundary        | transient for `P_Aʳ P_Bˢ`             |
/// |------|-----------------|---------------------------------------|
/// | 0    | none            | –                                     |
/// | 1    | p₀ = 1          | all losers                            |
/// | 2    | p₀ = 0          | – (all losers absorbing for B alone)  |
/// | 3    | p₃ = 0          | all winners                           |
/// | 4    | p₃ = 1          | – (all winners absorbing for B alone) |
/// | 5    | p₀ = 1, p₃ = 0  | all losers, all winners               |
/// | 6    | p₀ = 0, p₃ = 1  | both alternating states when n even   |
///
/// `p₁` and `p₂` must lie strictly inside (0, 1).
pub fn classify_boundary<T: Scalar>(params: &ParamVector<T>, n: usize) -> Result<ReducibleCase> {
    check_ring(n)?;
    let zero = T::zero();
    let one = T::one();
    for m in [1, 2] {
        let p = params.p(m);
        if *p == zero || *p == one {
            return Err(Error::UnsupportedBoundary(format!("p{m} = {p}")));
        }
    }
    #[derive(PartialEq)]
    enum Edge {
        Zero,
        Inner,
        One,
    }
    let edge = |p: &T| {
        if *p == zero {
            Edge::Zero
        } else if *p == one {
            Edge::One
        } else {
            Edge::Inner
        }
    };
    let losers = Configuration::all_losers(n)?;
    let winners = Configuration::all_winners(n)?;
    let (case_id, excluded_states) = match (edge(params.p(0)), edge(params.p(3))) {
        (Edge::Inner, Edge::Inner) => (0, vec![]),
        (Edge::One, Edge::Inner) => (1, vec![losers]),
        (Edge::Zero, Edge::Inner) => (2, vec![]),
        (Edge::Inner, Edge::Zero) => (3, vec![winners]),
        (Edge::Inner, Edge::One) => (4, vec![]),
        (Edge::One, Edge::Zero) => (5, vec![losers, winners]),
        (Edge::Zero, Edge::One) if n % 2 == 0 => (
            6,
            vec![Configuration::alternating(n, 1)?, Configuration::alternating(n, 0)?],
        ),
        (Edge::Zero, Edge::One) => (6, vec![]),
        _ => {
            return Err(Error::UnsupportedBoundary(format!(
                "p0 = {}, p3 = {}",
                params.p(0),
                params.p(3)
            )))
        }
    };
    Ok(ReducibleCase {
        case_id,
        excluded_states,
    })
}

impl ReducibleCase {
    /// Class indices of the excluded configurations.
    pub fn excluded_classes(&self, model: &QuotientModel) -> Result<Vec<usize>> {
        let mut classes = self
            .excluded_states
            .iter()
            .map(|x| model.class_of(x))
            .collect::<Result<Vec<_>>>()?;
        classes.sort_unstable();
        classes.dedup();
        Ok(classes)
    }

    /// Excluded configurations as full-state indices.
    pub fn excluded_indices(&self) -> Vec<usize> {
        self.excluded_states.iter().map(|x| x.encode() as usize).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    DenseElimination,
    PowerIteration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryResult<T> {
    pub pi: Vec<T>,
    /// States carrying the distribution (everything not excluded).
    pub support: Vec<usize>,
    pub method: SolverMethod,
    /// `‖πP − π‖∞`
    pub residual: f64,
}

fn support_of(dim: usize, excluded: &[usize]) -> Result<Vec<usize>> {
    if let Some(&bad) = excluded.iter().find(|&&e| e >= dim) {
        return Err(Error::SizeMismatch {
            expected: dim,
            found: bad,
        });
    }
    Ok((0..dim).filter(|i| !excluded.contains(i)).collect())
}

fn check_rows<T: Scalar>(rows: impl Iterator<Item = T>) -> Result<()> {
    let one = T::one();
    for (row, sum) in rows.enumerate() {
        if !sum.approx_eq(&one, 1e-9) {
            return Err(Error::NonStochastic {
                row,
                sum: sum.to_f64(),
            });
        }
    }
    Ok(())
}

/// Solves `π(P − I) = 0`, `Σπ = 1` on the support by Gaussian elimination
/// with partial pivoting (exact in rational mode).
pub fn solve_dense<T: Scalar>(p: &DenseMatrix<T>, excluded: &[usize]) -> Result<StationaryResult<T>> {
    let dim = p.dim();
    check_rows((0..dim).map(|i| p.row(i).iter().fold(T::zero(), |a, v| a + v.clone())))?;
    let support = support_of(dim, excluded)?;
    let k = support.len();
    if k == 0 {
        return Err(Error::InvalidParameter("every state is excluded".into()));
    }
    // Row i of the system is column support[i] of Pᵀ − I; the last equation
    // is replaced by the normalization.
    let mut a = vec![T::zero(); k * (k + 1)];
    let w = k + 1;
    for (i, &si) in support.iter().enumerate().take(k - 1) {
        for (j, &sj) in support.iter().enumerate() {
            let mut v = p.get(sj, si).clone();
            if i == j {
                v = v - T::one();
            }
            a[i * w + j] = v;
        }
    }
    for j in 0..k {
        a[(k - 1) * w + j] = T::one();
    }
    a[(k - 1) * w + k] = T::one();

    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| {
                a[x * w + col]
                    .abs()
                    .to_f64()
                    .total_cmp(&a[y * w + col].abs().to_f64())
            })
            .expect("nonempty pivot range");
        if a[pivot * w + col].is_zero() {
            return Err(Error::SolverFailure {
                method: "dense elimination",
                residual: f64::INFINITY,
                iterations: col,
            });
        }
        if pivot != col {
            for j in 0..w {
                a.swap(pivot * w + j, col * w + j);
            }
        }
        let inv = T::one() / a[col * w + col].clone();
        for row in 0..k {
            if row == col || a[row * w + col].is_zero() {
                continue;
            }
            let factor = a[row * w + col].clone() * inv.clone();
            for j in col..w {
                let sub = factor.clone() * a[col * w + j].clone();
                a[row * w + j] = a[row * w + j].clone() - sub;
            }
        }
    }
    let mut pi = vec![T::zero(); dim];
    for (i, &s) in support.iter().enumerate() {
        pi[s] = a[i * w + k].clone() / a[i * w + i].clone();
    }
    let residual = dense_residual(p, &pi);
    let exact_ok = !T::EXACT || residual == 0.0;
    if !exact_ok || residual > RESIDUAL_TOLERANCE {
        return Err(Error::SolverFailure {
            method: "dense elimination",
            residual,
            iterations: k,
        });
    }
    Ok(StationaryResult {
        pi,
        support,
        method: SolverMethod::DenseElimination,
        residual,
    })
}

fn dense_residual<T: Scalar>(p: &DenseMatrix<T>, pi: &[T]) -> f64 {
    let dim = p.dim();
    let mut out = vec![T::zero(); dim];
    for (i, pi_i) in pi.iter().enumerate() {
        if pi_i.is_zero() {
            continue;
        }
        for (j, v) in p.row(i).iter().enumerate() {
            out[j] = out[j].clone() + pi_i.clone() * v.clone();
        }
    }
    out.iter()
        .zip(pi)
        .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy)]
pub struct PowerOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-13,
            max_iterations: 1_000_000,
        }
    }
}

/// Power iteration on the product `F₁ F₂ ⋯ F_k` of sparse stochastic
/// factors, which is never formed. Starts uniform on the support and stops
/// when successive iterates differ by less than the tolerance.
pub fn power_iteration<T: Scalar>(
    factors: &[&TransitionMatrix<T>],
    excluded: &[usize],
    opts: &PowerOptions,
) -> Result<StationaryResult<T>> {
    let dim = factors
        .first()
        .ok_or_else(|| Error::InvalidParameter("no factors".into()))?
        .dim();
    for f in factors {
        if f.dim() != dim {
            return Err(Error::SizeMismatch {
                expected: dim,
                found: f.dim(),
            });
        }
        check_rows(f.row_sums().into_iter())?;
    }
    let support = support_of(dim, excluded)?;
    let start = T::one() / T::from_usize(support.len());
    let mut pi = vec![T::zero(); dim];
    for &s in &support {
        pi[s] = start.clone();
    }
    let mut residual = f64::INFINITY;
    for iteration in 1..=opts.max_iterations {
        let mut next = pi.clone();
        for f in factors {
            next = f.left_mul(&next)?;
        }
        let total = next.iter().fold(T::zero(), |a, v| a + v.clone());
        for v in &mut next {
            *v = v.clone() / total.clone();
        }
        residual = next
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64())
            .fold(0.0, f64::max);
        pi = next;
        if residual < opts.tolerance {
            return Ok(StationaryResult {
                pi,
                support,
                method: SolverMethod::PowerIteration,
                residual,
            });
        }
        if !residual.is_finite() {
            return Err(Error::SolverFailure {
                method: "power iteration",
                residual,
                iterations: iteration,
            });
        }
    }
    Err(Error::SolverFailure {
        method: "power iteration",
        residual,
        iterations: opts.max_iterations,
    })
}

/// Stationary distribution of one chain, zero on `excluded`.
pub fn solve_stationary<T: Scalar>(
    pbar: &TransitionMatrix<T>,
    excluded: &[usize],
) -> Result<StationaryResult<T>> {
    if !pbar.is_stochastic() {
        return Err(Error::NonStochastic {
            row: 0,
            sum: f64::NAN,
        });
    }
    if T::EXACT || pbar.dim() <= DENSE_LIMIT {
        solve_dense(&pbar.to_dense(), excluded)
    } else {
        power_iteration(&[pbar], excluded, &PowerOptions::default())
    }
}

/// Stationary distribution of `P̄_Aʳ P̄_Bˢ` on prebuilt reduced games.
pub fn pattern_stationary_in<T: Scalar>(
    games: &ReducedGames<'_, T>,
    case: &ReducibleCase,
    r: usize,
    s: usize,
) -> Result<StationaryResult<T>> {
    if r == 0 || s == 0 {
        return Err(Error::InvalidPattern(format!("[{r},{s}] needs r, s >= 1")));
    }
    let excluded = case.excluded_classes(games.model)?;
    if T::EXACT || games.model.class_count() <= DENSE_LIMIT {
        let product = dense_pattern_product(&games.a, r, &games.b, s)?;
        solve_dense(&product, &excluded)
    } else {
        let mut factors = vec![&games.a; r];
        factors.extend(std::iter::repeat_n(&games.b, s));
        power_iteration(&factors, &excluded, &PowerOptions::default())
    }
}

/// Stationary distribution of the reduced pattern chain `P̄_Aʳ P̄_Bˢ`.
pub fn pattern_stationary<T: Scalar>(
    n: usize,
    params: &ParamVector<T>,
    r: usize,
    s: usize,
    group: SymmetryGroup,
) -> Result<StationaryResult<T>> {
    let case = classify_boundary(params, n)?;
    let model = build_classes(n, group)?;
    let games = ReducedGames::build(&model, params)?;
    pattern_stationary_in(&games, &case, r, s)
}
