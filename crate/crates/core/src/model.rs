//! Product weights, tensorized eigenvalues, and the closed-form weighted sums
//! used by the rate analysis.
//!
//! A [`ProblemModel`] is a pair of positive non-increasing sequences: per
//! coordinate weights `gamma_1 >= gamma_2 >= ... > 0` with `gamma_1 <= 1`,
//! and a univariate spectrum `lambda_1 >= lambda_2 >= ... > 0`. The model
//! works entirely in spectral coordinates: the operator attached to the
//! approximation problem has one eigenvalue per [`Term`] `(u, j)`, namely the
//! score `gamma_u * prod_i lambda_{j_i}` with `gamma_u = prod_{i in u} gamma_i`.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::numeric::{exp, ln, powf, Interval, KahanSum};
use crate::sequences::DecreasingSequence;

/// Above this interaction order, scores are accumulated as sums of logs to
/// dodge underflow; below it, plain ordered products keep small-term scores
/// bit-reproducible against hand computation.
const LOG_SPACE_ORDER: usize = 16;

/// An index pair `(u, j)`: a finite strictly increasing set of coordinates
/// and one eigen-index per coordinate. The empty term `(∅, ())` plays the
/// role of the constant component and has score 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    coords: Vec<u32>,
    indices: Vec<u32>,
}

impl Term {
    pub fn new(coords: Vec<u32>, indices: Vec<u32>) -> Result<Self> {
        if coords.len() != indices.len() {
            return Err(Error::InvalidArgument(
                "coordinate set and eigen-index list must have equal length".into(),
            ));
        }
        if coords.iter().any(|&c| c == 0) || indices.iter().any(|&j| j == 0) {
            return Err(Error::InvalidArgument(
                "coordinates and eigen-indices start at 1".into(),
            ));
        }
        if coords.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "coordinate set must be strictly increasing".into(),
            ));
        }
        Ok(Self { coords, indices })
    }

    pub fn empty() -> Self {
        Self {
            coords: Vec::new(),
            indices: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    /// `max u`, with `max ∅ = 0`.
    pub fn max_coord(&self) -> u32 {
        self.coords.last().copied().unwrap_or(0)
    }

    /// `|u|`.
    pub fn order(&self) -> usize {
        self.coords.len()
    }

    /// Concatenation of two terms on disjoint coordinate sets.
    pub fn product(&self, other: &Term) -> Result<Term> {
        let mut pairs: Vec<(u32, u32)> = self
            .coords
            .iter()
            .copied()
            .zip(self.indices.iter().copied())
            .chain(other.coords.iter().copied().zip(other.indices.iter().copied()))
            .collect();
        pairs.sort_unstable_by_key(|&(c, _)| c);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument(
                "term product requires disjoint coordinate sets".into(),
            ));
        }
        let (coords, indices) = pairs.into_iter().unzip();
        Ok(Term { coords, indices })
    }
}

impl Ord for Term {
    /// Canonical order: `(max u, u lexicographic, j lexicographic)`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.max_coord()
            .cmp(&other.max_coord())
            .then_with(|| self.coords.cmp(&other.coords))
            .then_with(|| self.indices.cmp(&other.indices))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A `(gamma, lambda)` pair defining the spectral scores of the problem.
#[derive(Debug, Clone)]
pub struct ProblemModel {
    gamma: DecreasingSequence,
    lambda: DecreasingSequence,
    /// Records whether the supplied `lambda` is the per-coordinate block
    /// spectrum (excluding the constant eigenfunction). Informational only;
    /// the empty term is always scored 1 separately.
    pub lambda_is_block_spectrum: bool,
}

impl ProblemModel {
    /// Validates the normalization `gamma_1 <= 1`, positivity at the first
    /// index, and that the lambda decay rate exceeds 1 (trace-class spectrum).
    pub fn new(gamma: DecreasingSequence, lambda: DecreasingSequence) -> Result<Self> {
        let g1 = gamma.eval(1)?;
        if !(g1 > 0.0) {
            return Err(Error::InvalidModel("gamma_1 must be positive".into()));
        }
        if g1 > 1.0 {
            return Err(Error::InvalidModel(format!(
                "gamma_1 = {g1} violates the normalization gamma_1 <= 1"
            )));
        }
        let l1 = lambda.eval(1)?;
        if !(l1 > 0.0) {
            return Err(Error::InvalidModel("lambda_1 must be positive".into()));
        }
        if !(lambda.decay_low() > 1.0) {
            return Err(Error::InvalidModel(format!(
                "lambda must have lower decay rate > 1 (summable trace), got {}",
                lambda.decay_low()
            )));
        }
        Ok(Self {
            gamma,
            lambda,
            lambda_is_block_spectrum: true,
        })
    }

    pub fn with_block_spectrum_flag(mut self, flag: bool) -> Self {
        self.lambda_is_block_spectrum = flag;
        self
    }

    pub fn gamma_seq(&self) -> &DecreasingSequence {
        &self.gamma
    }

    pub fn lambda_seq(&self) -> &DecreasingSequence {
        &self.lambda
    }

    /// `gamma_k`. Indices past the representable range of the family are
    /// treated as weight zero: such values sit below the smallest positive
    /// float, so they can never clear a positive threshold anyway.
    pub fn gamma(&self, k: u64) -> f64 {
        self.gamma.eval(k).unwrap_or(0.0)
    }

    /// `lambda_j`, with the same convention as [`gamma`](Self::gamma).
    pub fn lambda(&self, j: u64) -> f64 {
        self.lambda.eval(j).unwrap_or(0.0)
    }

    /// Spot-check monotonicity of both sequences on `[1, horizon]`.
    pub fn validate_monotone(&self, horizon: u64) -> Result<()> {
        self.gamma.check_monotone(1, horizon)?;
        self.lambda.check_monotone(1, horizon)
    }

    /// Product weight `gamma_u = prod_{i in u} gamma_i`; empty product is 1.
    pub fn product_weight(&self, coords: &[u32]) -> f64 {
        if coords.len() > LOG_SPACE_ORDER {
            let mut s = KahanSum::new();
            for &c in coords {
                s.add(ln(self.gamma(c as u64)));
            }
            return exp(s.value());
        }
        let mut p = 1.0;
        for &c in coords {
            p *= self.gamma(c as u64);
        }
        p
    }

    /// Score `gamma_u * prod_i lambda_{j_i}`: the eigenvalue attached to the
    /// term. Factors are multiplied in ascending coordinate order,
    /// weight and eigenvalue interleaved.
    pub fn term_score(&self, t: &Term) -> f64 {
        if t.order() > LOG_SPACE_ORDER {
            let mut s = KahanSum::new();
            for (&c, &j) in t.coords.iter().zip(&t.indices) {
                s.add(ln(self.gamma(c as u64)));
                s.add(ln(self.lambda(j as u64)));
            }
            return exp(s.value());
        }
        let mut p = 1.0;
        for (&c, &j) in t.coords.iter().zip(&t.indices) {
            p *= self.gamma(c as u64);
            p *= self.lambda(j as u64);
        }
        p
    }

    /// Exact closed form of `sum_{k in u subseteq [k]} gamma_u^{1/tau} * C^{|u|}`
    /// for product weights:
    /// `C * gamma_k^{1/tau} * prod_{i<k} (1 + C * gamma_i^{1/tau})`.
    pub fn weighted_subset_sum(&self, tau: f64, c_tau: f64, k: u32) -> Result<f64> {
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument("tau must be positive".into()));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        let inv = 1.0 / tau;
        let mut p = c_tau * powf(self.gamma(k as u64), inv);
        for i in 1..k {
            p *= 1.0 + c_tau * powf(self.gamma(i as u64), inv);
        }
        Ok(p)
    }

    /// Certified bracket for `C_gamma = prod_{j >= 1} (1 + gamma_j^c)`, the
    /// sum of `gamma_v^c` over all finite coordinate sets v (empty set
    /// included).
    ///
    /// The leading factors are multiplied directly; the log of the remaining
    /// product is bracketed through `x - x^2/2 <= ln(1+x) <= x` applied to
    /// the certified tail sums of `gamma^c` and `gamma^{2c}`. The scan point
    /// doubles until the bracket's relative width drops below `rel_tol`.
    pub fn c_gamma_bracket(&self, c: f64, rel_tol: f64) -> Result<Interval> {
        if !(c > 0.0) || !(c < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "auxiliary exponent c must lie in (0, 1), got {c}"
            )));
        }
        if !(rel_tol > 0.0) {
            return Err(Error::InvalidArgument("rel_tol must be positive".into()));
        }
        let target = ln(1.0 + rel_tol);
        let mut scan_to: u64 = 64;
        let mut log_prod = KahanSum::new();
        let mut done: u64 = 0;
        loop {
            for j in (done + 1)..=scan_to {
                let g = self.gamma(j);
                if g > 0.0 {
                    log_prod.add(ln(1.0 + powf(g, c)));
                }
            }
            done = scan_to;
            // The tail bracket of sum gamma^c must be tight in absolute
            // terms; size the relative request from a rough pass.
            let t1_rough = self.gamma.tail_power_bounds(scan_to, c, 0.01)?;
            let rel1 = (0.45 * target / t1_rough.hi.max(f64::MIN_POSITIVE)).min(0.01);
            let t1 = self.gamma.tail_power_bounds(scan_to, c, rel1)?;
            let t2 = self.gamma.tail_power_bounds(scan_to, 2.0 * c, 0.25)?;
            let ln_lo = log_prod.value() + (t1.lo - 0.5 * t2.hi).max(0.0);
            let ln_hi = log_prod.value() + t1.hi;
            if ln_hi - ln_lo <= target {
                let lo = exp(ln_lo) * (1.0 - 1e-13);
                let hi = exp(ln_hi) * (1.0 + 1e-13);
                return Ok(Interval::new(lo, hi));
            }
            if scan_to >= 1 << 26 {
                return Err(Error::DivergentConstant(
                    "C_gamma tail bound failed to shrink below the requested tolerance".into(),
                ));
            }
            scan_to *= 2;
        }
    }

    /// Midpoint convenience wrapper around [`c_gamma_bracket`](Self::c_gamma_bracket).
    pub fn c_gamma_constant(&self, c: f64, rel_tol: f64) -> Result<f64> {
        Ok(self.c_gamma_bracket(c, rel_tol)?.midpoint())
    }

    /// Rigorous bracket for the weight tail `sum_{j > cut} gamma_j^{power}`.
    pub fn tail_weight_sum(&self, cut: u64, power: f64) -> Result<Interval> {
        self.gamma.tail_power_bounds(cut, power, 1e-9)
    }
}

/// Short human-readable label for a model, used in diagnostics.
pub fn model_label(model: &ProblemModel) -> String {
    format!(
        "gamma={}, lambda={}",
        model.gamma_seq().name(),
        model.lambda_seq().name()
    )
}
