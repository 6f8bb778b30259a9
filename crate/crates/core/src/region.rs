//! Parrondo and anti-Parrondo regions of the `(p0, p3, p1)` cube, with
//! `p2 = p1` throughout.
//!
//! A point is Parrondo when `μ_B ≤ 0 < μ` and anti-Parrondo when
//! `μ < 0 ≤ μ_B`, where `μ` is the mean of the combined schedule. The map
//! `Λ(p0, p1, p3) = (1 − p3, 1 − p1, 1 − p0)` exchanges the two regions.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ParamVector, PatternSpec};
use crate::means::MeanCalculator;
use crate::montecarlo::stream_rng;
use crate::scalar::Scalar;
use crate::symmetry::SymmetryGroup;

/// Means within this distance of zero count as zero.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Parrondo,
    AntiParrondo,
    Neither,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Parrondo => "parrondo",
            Label::AntiParrondo => "anti_parrondo",
            Label::Neither => "neither",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub p0: f64,
    pub p3: f64,
    pub p1: f64,
    pub mu_b: f64,
    pub mu_pattern: f64,
    pub label: Label,
}

fn sign<T: Scalar>(x: &T) -> i8 {
    let zero = T::zero();
    if T::EXACT {
        if *x > zero {
            1
        } else if *x < zero {
            -1
        } else {
            0
        }
    } else {
        let v = x.to_f64();
        if v.abs() <= TIE_TOLERANCE {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    }
}

fn label_from_signs(b: i8, m: i8) -> Label {
    if b <= 0 && m > 0 {
        Label::Parrondo
    } else if b >= 0 && m < 0 {
        Label::AntiParrondo
    } else {
        Label::Neither
    }
}

/// Label from already computed means, with the tie tolerance applied.
pub fn label_of(mu_b: f64, mu_pattern: f64) -> Label {
    label_from_signs(sign(&mu_b), sign(&mu_pattern))
}

pub fn classify_point<T: Scalar>(p0: T, p1: T, p3: T, pattern: &PatternSpec, n: usize) -> Result<RegionPoint> {
    let calc = MeanCalculator::new(n, SymmetryGroup::dihedral(n))?;
    classify_point_with(&calc, p0, p1, p3, pattern)
}

/// [`classify_point`] reusing a prepared calculator.
pub fn classify_point_with<T: Scalar>(
    calc: &MeanCalculator,
    p0: T,
    p1: T,
    p3: T,
    pattern: &PatternSpec,
) -> Result<RegionPoint> {
    let params = ParamVector::symmetric(p0, p1, p3)?;
    let mu_b = calc.game_b(&params)?.mu;
    let mu = calc.mean(&params, pattern)?.mu;
    let [p0, p1, _, p3] = params.as_array().clone();
    Ok(RegionPoint {
        p0: p0.to_f64(),
        p3: p3.to_f64(),
        p1: p1.to_f64(),
        mu_b: mu_b.to_f64(),
        mu_pattern: mu.to_f64(),
        label: label_from_signs(sign(&mu_b), sign(&mu)),
    })
}

/// The involution `Λ(p0, p1, p3) = (1 − p3, 1 − p1, 1 − p0)`.
pub fn symmetry_map<T: Scalar>(p0: &T, p1: &T, p3: &T) -> (T, T, T) {
    let one = T::one();
    (one.clone() - p3.clone(), one.clone() - p1.clone(), one - p0.clone())
}

/// Axis-aligned box in `(p0, p3, p1)` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subcube {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Subcube {
    pub const UNIT: Subcube = Subcube {
        lo: [0.0; 3],
        hi: [1.0; 3],
    };

    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        for k in 0..3 {
            if !(0.0 <= lo[k] && lo[k] < hi[k] && hi[k] <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "subcube axis {k} must satisfy 0 <= lo < hi <= 1, got [{}, {}]",
                    lo[k], hi[k]
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|k| self.hi[k] - self.lo[k]).product()
    }

    /// Midpoint of cell `i` of `res` along axis `k`.
    fn midpoint(&self, k: usize, i: usize, res: usize) -> f64 {
        self.lo[k] + (i as f64 + 0.5) * (self.hi[k] - self.lo[k]) / res as f64
    }
}

impl Default for Subcube {
    fn default() -> Self {
        Self::UNIT
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub n: usize,
    pub pattern: PatternSpec,
    pub resolution: usize,
    pub subcube: Subcube,
    /// Points were evaluated at their Λ images.
    pub reflected: bool,
    /// Indexed by `(i0 * res + i3) * res + i1`.
    pub points: Vec<RegionPoint>,
    pub cell_volume: f64,
    pub parrondo_volume: f64,
    pub anti_parrondo_volume: f64,
    /// Volume of cells on the region's boundary; the grid cannot resolve
    /// the region more finely than this.
    pub parrondo_error: f64,
    pub anti_parrondo_error: f64,
}

impl ScanResult {
    pub fn index(&self, i0: usize, i3: usize, i1: usize) -> usize {
        (i0 * self.resolution + i3) * self.resolution + i1
    }

    pub fn count(&self, label: Label) -> usize {
        self.points.iter().filter(|p| p.label == label).count()
    }

    /// Connected components of `label` cells under face adjacency.
    pub fn components(&self, label: Label) -> usize {
        let res = self.resolution;
        let mut seen = vec![false; self.points.len()];
        let mut stack = Vec::new();
        let mut components = 0;
        for start in 0..self.points.len() {
            if seen[start] || self.points[start].label != label {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(idx) = stack.pop() {
                for nb in neighbors(idx, res) {
                    if !seen[nb] && self.points[nb].label == label {
                        seen[nb] = true;
                        stack.push(nb);
                    }
                }
            }
        }
        components
    }

    fn boundary_cells(&self, label: Label) -> usize {
        (0..self.points.len())
            .filter(|&idx| {
                let inside = self.points[idx].label == label;
                neighbors(idx, self.resolution).any(|nb| (self.points[nb].label == label) != inside)
            })
            .count()
    }
}

fn neighbors(idx: usize, res: usize) -> impl Iterator<Item = usize> {
    let coords = [idx / (res * res), (idx / res) % res, idx % res];
    let strides = [res * res, res, 1];
    (0..3).flat_map(move |k| {
        let down = (coords[k] > 0).then(|| idx - strides[k]);
        let up = (coords[k] + 1 < res).then(|| idx + strides[k]);
        down.into_iter().chain(up)
    })
}

pub fn scan(n: usize, pattern: &PatternSpec, resolution: usize, subcube: Option<Subcube>) -> Result<ScanResult> {
    scan_with(n, pattern, resolution, subcube, false)
}

/// Midpoint-rule scan. With `reflect`, each grid point is evaluated at its
/// Λ image, which should swap the two regions.
pub fn scan_with(
    n: usize,
    pattern: &PatternSpec,
    resolution: usize,
    subcube: Option<Subcube>,
    reflect: bool,
) -> Result<ScanResult> {
    if resolution < 2 {
        return Err(Error::InvalidParameter("resolution must be at least 2".into()));
    }
    pattern.validate()?;
    let cube = subcube.unwrap_or_default();
    let calc = MeanCalculator::new(n, SymmetryGroup::dihedral(n))?;
    let res = resolution;
    let points = (0..res * res * res)
        .into_par_iter()
        .map(|idx| {
            let p0 = cube.midpoint(0, idx / (res * res), res);
            let p3 = cube.midpoint(1, (idx / res) % res, res);
            let p1 = cube.midpoint(2, idx % res, res);
            let (p0, p1, p3) = if reflect {
                symmetry_map(&p0, &p1, &p3)
            } else {
                (p0, p1, p3)
            };
            classify_point_with(&calc, p0, p1, p3, pattern)
        })
        .collect::<Result<Vec<_>>>()?;
    let cell_volume = cube.volume() / (res * res * res) as f64;
    let mut result = ScanResult {
        n,
        pattern: *pattern,
        resolution,
        subcube: cube,
        reflected: reflect,
        points,
        cell_volume,
        parrondo_volume: 0.0,
        anti_parrondo_volume: 0.0,
        parrondo_error: 0.0,
        anti_parrondo_error: 0.0,
    };
    result.parrondo_volume = result.count(Label::Parrondo) as f64 * cell_volume;
    result.anti_parrondo_volume = result.count(Label::AntiParrondo) as f64 * cell_volume;
    result.parrondo_error = result.boundary_cells(Label::Parrondo) as f64 * cell_volume;
    result.anti_parrondo_error = result.boundary_cells(Label::AntiParrondo) as f64 * cell_volume;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionVolumes {
    pub samples: usize,
    pub parrondo: f64,
    pub anti_parrondo: f64,
    pub parrondo_se: f64,
    pub anti_parrondo_se: f64,
    /// Standard error of `parrondo − anti_parrondo`, from the paired
    /// per-sample differences.
    pub difference_se: f64,
}

fn proportion(hits: usize, samples: usize) -> (f64, f64) {
    let p = hits as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

/// Monte Carlo volumes of both regions from uniform points of the open cube.
pub fn region_volumes_mc(n: usize, pattern: &PatternSpec, samples: usize, seed: u64) -> Result<RegionVolumes> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let calc = MeanCalculator::new(n, SymmetryGroup::dihedral(n))?;
    let mut rng = stream_rng(seed, 0);
    let points: Vec<[f64; 3]> = (0..samples).map(|_| open_unit_point(&mut rng)).collect();
    let labels = points
        .par_iter()
        .map(|&[p0, p1, p3]| classify_point_with(&calc, p0, p1, p3, pattern).map(|pt| pt.label))
        .collect::<Result<Vec<_>>>()?;
    let (parrondo, parrondo_se) = proportion(labels.iter().filter(|&&l| l == Label::Parrondo).count(), samples);
    let (anti, anti_se) = proportion(labels.iter().filter(|&&l| l == Label::AntiParrondo).count(), samples);
    let diff = parrondo - anti;
    let second_moment = (parrondo + anti) - diff * diff;
    let difference_se = (second_moment.max(0.0) / samples as f64).sqrt();
    Ok(RegionVolumes {
        samples,
        parrondo,
        anti_parrondo: anti,
        parrondo_se,
        anti_parrondo_se: anti_se,
        difference_se,
    })
}

/// Uniform `(p0, p1, p3)` avoiding the faces of the cube.
fn open_unit_point<R: Rng>(rng: &mut R) -> [f64; 3] {
    let mut draw = || loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    };
    [draw(), draw(), draw()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// Conditions a through d, in order.
    pub holds: [bool; 4],
    pub in_union: bool,
    pub p_bar: f64,
    /// Probabilities the conditions were evaluated at.
    pub evaluated_at: [f64; 4],
}

fn max_of<T: Scalar>(values: &[T]) -> T {
    values.iter().skip(1).fold(values[0].clone(), |m, v| if *v > m { v.clone() } else { m })
}

fn min_of<T: Scalar>(values: &[T]) -> T {
    values.iter().skip(1).fold(values[0].clone(), |m, v| if *v < m { v.clone() } else { m })
}

/// Sufficient conditions for ergodicity of the infinite-lattice spin system.
/// With `gamma`, they are evaluated at the mixed probabilities
/// `γ/2 + (1 − γ) p_m`.
pub fn ergodicity_conditions<T: Scalar>(params: &ParamVector<T>, gamma: Option<&T>) -> Result<ConditionReport> {
    let params = match gamma {
        Some(g) => params.mixed_with_fair(g)?,
        None => params.clone(),
    };
    let [p0, p1, p2, p3] = params.as_array().clone();
    let zero = T::zero();
    let one = T::one();
    let two = T::from_ratio(2, 1);

    let a = max_of(&[(p0.clone() - p1.clone()).abs(), (p2.clone() - p3.clone()).abs()])
        + max_of(&[(p0.clone() - p2.clone()).abs(), (p1.clone() - p3.clone()).abs()])
        < one;

    let lo = min_of(&[p0.clone(), p3.clone()]);
    let hi = max_of(&[p0.clone(), p3.clone()]);
    let b = zero < lo
        && lo <= min_of(&[p1.clone(), p2.clone()])
        && max_of(&[p1.clone(), p2.clone()]) <= hi
        && hi < one;

    let combo = p1.clone() + p2.clone() - p3.clone();
    let half_p0 = p0.clone() / two.clone();
    let c = max_of(&[p1.clone(), p2.clone(), p3.clone(), combo.clone()]) - p3.clone() < half_p0
        && half_p0 < min_of(&[p1.clone(), p2.clone(), p3.clone(), combo]);

    let p_bar = (p0.clone() + p1.clone() + p2.clone() + p3.clone()) / T::from_ratio(4, 1);
    let lower = max_of(&[two.clone() * p_bar.clone() - one.clone(), zero]);
    let upper = min_of(&[two * p_bar.clone(), one]);
    let d = [&p0, &p1, &p2, &p3].iter().all(|p| lower < **p && **p < upper);

    let holds = [a, b, c, d];
    Ok(ConditionReport {
        holds,
        in_union: holds.iter().any(|&h| h),
        p_bar: p_bar.to_f64(),
        evaluated_at: [p0.to_f64(), p1.to_f64(), p2.to_f64(), p3.to_f64()],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVolumes {
    pub samples: usize,
    /// Conditions a through d, then their union.
    pub estimates: [f64; 5],
    pub standard_errors: [f64; 5],
}

/// Monte Carlo volumes of the condition regions in the `(p0, p1, p3)` cube
/// with `p2 = p1`.
pub fn condition_volumes(samples: usize, seed: u64) -> Result<ConditionVolumes> {
    if samples < 10_000 {
        return Err(Error::InvalidParameter("condition volumes need at least 10^4 samples".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let mut hits = [0usize; 5];
    for _ in 0..samples {
        let [p0, p1, p3] = open_unit_point(&mut rng);
        let report = ergodicity_conditions(&ParamVector::symmetric(p0, p1, p3)?, None)?;
        for (k, &h) in report.holds.iter().enumerate() {
            hits[k] += h as usize;
        }
        hits[4] += report.in_union as usize;
    }
    let mut estimates = [0.0; 5];
    let mut standard_errors = [0.0; 5];
    for k in 0..5 {
        (estimates[k], standard_errors[k]) = proportion(hits[k], samples);
    }
    Ok(ConditionVolumes {
        samples,
        estimates,
        standard_errors,
    })
}
