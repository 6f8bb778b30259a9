//! Rotation and reflection symmetry of the player ring.
//!
//! Game B commutes with every rotation of the ring, and with reflections too
//! when `p₁ = p₂`. A [`QuotientModel`] partitions the `2ⁿ` configurations
//! into orbits (binary necklaces or bracelets) and lumps any invariant
//! matrix onto them:
//!
//! ```text
//! P̄([x],[y]) = Σ_{y' ~ y} P(x, y')
//! ```
//!
//! evaluated at the canonical representative `x` of each class. Lumping is
//! multiplicative for invariant matrices, so products of reduced factors are
//! the reduced products.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    build_game_a, build_game_b, build_game_b_signed, check_ring, full_mask, game_b_row, Configuration,
    ParamVector,
};
use crate::matrix::{DenseMatrix, TransitionMatrix};
use crate::scalar::Scalar;

/// Largest ring for which the orbit table (`2ⁿ` entries) is built.
pub const MAX_QUOTIENT_N: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Cyclic,
    Dihedral,
}

/// Rotations of an `n`-ring, optionally with reflections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymmetryGroup {
    pub kind: GroupKind,
    pub n: usize,
}

/// `x ↦ x_σ` with `σ(i) = ρ(i) + shift`, where `ρ` reverses the ring when
/// `reflect` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub shift: usize,
    pub reflect: bool,
}

impl GroupElement {
    pub const IDENTITY: Self = Self {
        shift: 0,
        reflect: false,
    };
}

impl SymmetryGroup {
    pub fn cyclic(n: usize) -> Self {
        Self {
            kind: GroupKind::Cyclic,
            n,
        }
    }

    pub fn dihedral(n: usize) -> Self {
        Self {
            kind: GroupKind::Dihedral,
            n,
        }
    }

    /// Dihedral when the parameters allow it, cyclic otherwise.
    pub fn auto<T: Scalar>(n: usize, params: &ParamVector<T>) -> Self {
        if params.has_equal_middle() {
            Self::dihedral(n)
        } else {
            Self::cyclic(n)
        }
    }

    pub fn order(&self) -> usize {
        match self.kind {
            GroupKind::Cyclic => self.n,
            GroupKind::Dihedral => 2 * self.n,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        let reflections: &[bool] = match self.kind {
            GroupKind::Cyclic => &[false],
            GroupKind::Dihedral => &[false, true],
        };
        reflections.iter().flat_map(move |&reflect| {
            (0..self.n).map(move |shift| GroupElement { shift, reflect })
        })
    }

    /// Errors unless the group is a symmetry of game B with these parameters.
    pub fn check_compatible<T: Scalar>(&self, params: &ParamVector<T>) -> Result<()> {
        if self.kind == GroupKind::Dihedral && !params.has_equal_middle() {
            return Err(Error::GroupNotAllowed);
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn act_raw(n: usize, g: GroupElement, state: u64) -> u64 {
    let mut x = state;
    if g.reflect {
        x = x.reverse_bits() >> (64 - n);
    }
    if g.shift != 0 {
        x = ((x >> g.shift) | (x << (n - g.shift))) & full_mask(n);
    }
    x
}

/// Applies a group element to a configuration.
pub fn act(g: GroupElement, x: &Configuration) -> Result<Configuration> {
    if g.shift >= x.n() {
        return Err(Error::SizeMismatch {
            expected: x.n(),
            found: g.shift,
        });
    }
    Configuration::new(x.n(), act_raw(x.n(), g, x.encode()))
}

/// Orbit partition of `{0,1}ⁿ` under a symmetry group.
#[derive(Debug, Clone)]
pub struct QuotientModel {
    group: SymmetryGroup,
    reps: Vec<u64>,
    sizes: Vec<usize>,
    class_of: Vec<u32>,
}

/// Enumerates the orbits; classes are ordered by their representative, the
/// smallest encoding in the orbit.
pub fn build_classes(n: usize, group: SymmetryGroup) -> Result<QuotientModel> {
    check_ring(n)?;
    if n > MAX_QUOTIENT_N {
        return Err(Error::InvalidParameter(format!(
            "orbit tables are limited to n <= {MAX_QUOTIENT_N}"
        )));
    }
    if group.n != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: group.n,
        });
    }
    let states = 1usize << n;
    let mut class_of = vec![u32::MAX; states];
    let mut reps = Vec::new();
    let mut sizes = Vec::new();
    let elements: Vec<GroupElement> = group.elements().collect();
    for x in 0..states {
        if class_of[x] != u32::MAX {
            continue;
        }
        let id = reps.len() as u32;
        let mut size = 0;
        for &g in &elements {
            let y = act_raw(n, g, x as u64) as usize;
            if class_of[y] == u32::MAX {
                class_of[y] = id;
                size += 1;
            }
        }
        reps.push(x as u64);
        sizes.push(size);
    }
    Ok(QuotientModel {
        group,
        reps,
        sizes,
        class_of,
    })
}

impl QuotientModel {
    pub fn n(&self) -> usize {
        self.group.n
    }

    pub fn group(&self) -> SymmetryGroup {
        self.group
    }

    pub fn class_count(&self) -> usize {
        self.reps.len()
    }

    pub fn representative(&self, class: usize) -> Configuration {
        Configuration::new(self.n(), self.reps[class]).expect("representative fits the ring")
    }

    pub fn representatives(&self) -> &[u64] {
        &self.reps
    }

    /// `|[x]|` for each class.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn class_of(&self, x: &Configuration) -> Result<usize> {
        if x.n() != self.n() {
            return Err(Error::SizeMismatch {
                expected: self.n(),
                found: x.n(),
            });
        }
        Ok(self.class_of[x.encode() as usize] as usize)
    }

    pub fn class_of_raw(&self, state: u64) -> usize {
        self.class_of[state as usize] as usize
    }

    /// `π(x) = π̄([x]) / |[x]|` over all `2ⁿ` configurations.
    pub fn lift<T: Scalar>(&self, pi_bar: &[T]) -> Result<Vec<T>> {
        if pi_bar.len() != self.class_count() {
            return Err(Error::SizeMismatch {
                expected: self.class_count(),
                found: pi_bar.len(),
            });
        }
        let sizes: Vec<T> = self.sizes.iter().map(|&s| T::from_usize(s)).collect();
        Ok(self
            .class_of
            .iter()
            .map(|&c| pi_bar[c as usize].clone() / sizes[c as usize].clone())
            .collect())
    }
}

/// Scratch space for summing one row's entries per class.
struct Lumper<T> {
    acc: Vec<T>,
    seen: Vec<bool>,
    touched: Vec<usize>,
}

impl<T: Scalar> Lumper<T> {
    fn new(classes: usize) -> Self {
        Self {
            acc: vec![T::zero(); classes],
            seen: vec![false; classes],
            touched: Vec::new(),
        }
    }

    fn lump(&mut self, q: &QuotientModel, entries: impl Iterator<Item = (usize, T)>) -> Vec<(usize, T)> {
        for (y, v) in entries {
            let c = q.class_of[y] as usize;
            if !self.seen[c] {
                self.seen[c] = true;
                self.touched.push(c);
            }
            self.acc[c] = self.acc[c].clone() + v;
        }
        self.touched.sort_unstable();
        let row = self
            .touched
            .iter()
            .map(|&c| {
                self.seen[c] = false;
                (c, std::mem::replace(&mut self.acc[c], T::zero()))
            })
            .collect();
        self.touched.clear();
        row
    }
}

/// Lumps an invariant full-state matrix onto the classes.
pub fn quotient<T: Scalar>(p: &TransitionMatrix<T>, q: &QuotientModel) -> Result<TransitionMatrix<T>> {
    let states = 1usize << q.n();
    if p.dim() != states {
        return Err(Error::SizeMismatch {
            expected: states,
            found: p.dim(),
        });
    }
    let mut lumper = Lumper::new(q.class_count());
    let rows = q
        .reps
        .iter()
        .map(|&x| lumper.lump(q, p.row(x as usize).iter().map(|(j, v)| (*j, v.clone()))))
        .collect();
    Ok(TransitionMatrix::from_rows(rows, p.is_stochastic()))
}

/// Dense counterpart of [`quotient`].
pub fn quotient_dense<T: Scalar>(p: &DenseMatrix<T>, q: &QuotientModel) -> Result<DenseMatrix<T>> {
    let states = 1usize << q.n();
    if p.dim() != states {
        return Err(Error::SizeMismatch {
            expected: states,
            found: p.dim(),
        });
    }
    let k = q.class_count();
    let mut out = DenseMatrix::<T>::zeros(k);
    for (c, &x) in q.reps.iter().enumerate() {
        for (y, v) in p.row(x as usize).iter().enumerate() {
            let d = q.class_of[y] as usize;
            let sum = out.get(c, d).clone() + v.clone();
            out.set(c, d, sum);
        }
    }
    Ok(out)
}

/// `P̄_B` (or the signed `Ṗ̄_B`) assembled class by class from the
/// representatives, without materializing the `2ⁿ`-state matrix.
pub fn reduced_game_b<T: Scalar>(
    q: &QuotientModel,
    params: &ParamVector<T>,
    signed: bool,
) -> Result<TransitionMatrix<T>> {
    q.group.check_compatible(params)?;
    let n = q.n();
    let n_inv = T::one() / T::from_usize(n);
    let mut lumper = Lumper::new(q.class_count());
    let rows = q
        .reps
        .iter()
        .map(|&x| lumper.lump(q, game_b_row(n, x, params, signed, &n_inv).into_iter()))
        .collect();
    Ok(TransitionMatrix::from_rows(rows, !signed))
}

/// Rings up to this size lump the full-state matrices; larger rings build
/// the reduced matrices directly from class representatives.
pub const FULL_STATE_LUMPING_MAX_N: usize = 10;

/// `P̄_A`, `P̄_B` and `Ṗ̄_B` on one quotient.
#[derive(Debug, Clone)]
pub struct ReducedGames<'m, T> {
    pub model: &'m QuotientModel,
    pub a: TransitionMatrix<T>,
    pub b: TransitionMatrix<T>,
    pub b_signed: TransitionMatrix<T>,
}

impl<'m, T: Scalar> ReducedGames<'m, T> {
    pub fn build(model: &'m QuotientModel, params: &ParamVector<T>) -> Result<Self> {
        model.group.check_compatible(params)?;
        let n = model.n();
        let fair = ParamVector::fair();
        let (a, b, b_signed) = if n <= FULL_STATE_LUMPING_MAX_N {
            (
                quotient(&build_game_a(n)?, model)?,
                quotient(&build_game_b(n, params)?, model)?,
                quotient(&build_game_b_signed(n, params)?, model)?,
            )
        } else {
            (
                reduced_game_b(model, &fair, false)?,
                reduced_game_b(model, params, false)?,
                reduced_game_b(model, params, true)?,
            )
        };
        Ok(Self {
            model,
            a,
            b,
            b_signed,
        })
    }
}

/// Checks `P(x_σ, y_σ) = P(x, y)` on every nonzero entry. Exhaustive when
/// `2ⁿ · |G| ≤ samples`; otherwise `samples` random `(σ, x)` rows are checked.
pub fn check_invariance<T: Scalar>(p: &TransitionMatrix<T>, g: SymmetryGroup, samples: usize) -> bool {
    let n = g.n;
    if n < 3 || n > MAX_QUOTIENT_N || p.dim() != 1 << n {
        return false;
    }
    const TOL: f64 = 1e-12;
    let elements: Vec<GroupElement> = g.elements().collect();
    let row_ok = |x: usize, sigma: GroupElement| {
        let xs = act_raw(n, sigma, x as u64) as usize;
        let src = p.row(x);
        let dst = p.row(xs);
        let nonzero = |r: &[(usize, T)]| r.iter().filter(|(_, v)| !v.is_zero()).count();
        nonzero(src) == nonzero(dst)
            && src.iter().all(|(y, v)| {
                let ys = act_raw(n, sigma, *y as u64) as usize;
                p.get(xs, ys).approx_eq(v, TOL)
            })
    };
    if p.dim().saturating_mul(elements.len()) <= samples {
        (0..p.dim()).all(|x| elements.iter().all(|&s| row_ok(x, s)))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_6a11);
        (0..samples).all(|_| {
            let x = rng.random_range(0..p.dim());
            let s = elements[rng.random_range(0..elements.len())];
            row_ok(x, s)
        })
    }
}
