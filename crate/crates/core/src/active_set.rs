//! Exact enumeration of the optimal information set: all index pairs `(u, j)`
//! whose score `gamma_u * lambda_{u,j}` exceeds `eps^2`, together with level
//! slices, per-level counts, the top level, and the largest excluded score.
//!
//! # Enumeration
//!
//! Terms are generated by a depth-first tree in which a node appends
//! coordinates strictly larger than any it already holds, and scans all
//! eigen-indices of the appended coordinate before moving to the next one.
//! Every `(u, j)` is reached exactly once. Monotonicity of both sequences
//! makes the tree prunable: within a coordinate the scores fall with the
//! eigen-index, and across coordinates the first-index scores fall with the
//! coordinate.
//!
//! Scores are not globally monotone along the tree when `lambda_1 > 1`
//! (appending a coordinate `k` multiplies by `gamma_k * lambda_1`, which may
//! exceed one). The search therefore prunes on `score * gain(k)`, where
//! `gain(k)` bounds the largest factor any completion using coordinates
//! `>= k` can still contribute. With `lambda_1 <= 1` the gain is identically
//! one and the search reduces to the plain threshold DFS.
//!
//! The same bound makes the reported `largest_excluded_score` exact: a
//! subtree is abandoned only when no descendant can beat the best excluded
//! score seen so far, so the final value is the true maximum score over all
//! excluded terms.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::error::{Error, Result};
use crate::model::{ProblemModel, Term};

/// Knobs for [`enumerate_active_set`].
#[derive(Debug, Clone, Copy)]
pub struct EnumerationOptions {
    /// Hard cap on retained terms; exceeding it is an error, never a silent
    /// truncation.
    pub term_budget: u64,
    /// Whether the empty term (score 1) is accounted in the output set.
    /// Membership semantics elsewhere are unaffected.
    pub include_empty_term: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            term_budget: 10_000_000,
            include_empty_term: true,
        }
    }
}

/// The enumerated set `{(u, j) : score > eps^2}` with level bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet {
    /// The error demand the set was built for.
    pub epsilon: f64,
    terms: Vec<Term>,
    level_counts: BTreeMap<u32, u64>,
    /// Largest coordinate used by any retained term (0 when only the empty
    /// term is present).
    pub m_eps: u32,
    /// Exact maximum score over all excluded terms; always `<= eps^2`.
    pub largest_excluded_score: f64,
    /// Whether the empty term is accounted in `terms` and `level_counts`.
    pub includes_empty_term: bool,
}

impl ActiveSet {
    /// Retained terms in canonical order `(max u, u lex, j lex)`.
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn total_terms(&self) -> u64 {
        self.terms.len() as u64
    }

    /// `n_k` for `k >= 1`; level 0 counts the empty term when included.
    pub fn level_count(&self, k: u32) -> u64 {
        self.level_counts.get(&k).copied().unwrap_or(0)
    }

    pub fn level_counts(&self) -> &BTreeMap<u32, u64> {
        &self.level_counts
    }

    /// Exact worst-case error of the truncation this set induces.
    pub fn worst_case_error(&self) -> f64 {
        crate::numeric::sqrt(self.largest_excluded_score)
    }
}

struct Dfs<'a> {
    model: &'a ProblemModel,
    eps_sq: f64,
    term_budget: u64,
    visit_budget: u64,
    epsilon: f64,
    retained: Vec<Term>,
    best_excluded: f64,
    visited: u64,
}

impl<'a> Dfs<'a> {
    /// `gain(k)`: product over `k' >= k` of `max(1, gamma_{k'} * lambda_1)`.
    /// Only a bounded prefix of coordinates can contribute factors above one.
    fn gain_from(gains: &[f64], k: u64) -> f64 {
        if k == 0 || k > gains.len() as u64 {
            1.0
        } else {
            gains[(k - 1) as usize]
        }
    }

    fn budget_error(&self) -> Error {
        Error::BudgetExceeded {
            epsilon: self.epsilon,
            retained: self.retained.len() as u64,
            visited: self.visited,
            budget: self.term_budget,
        }
    }

    fn expand(
        &mut self,
        gains: &[f64],
        coords: &mut Vec<u32>,
        indices: &mut Vec<u32>,
        score: f64,
        from_k: u64,
    ) -> Result<()> {
        let l1 = self.model.lambda(1);
        let mut k = from_k;
        loop {
            let gk = self.model.gamma(k);
            if gk <= 0.0 {
                break;
            }
            let base = score * gk;
            let first = base * l1;
            if first * Self::gain_from(gains, k + 1) <= self.best_excluded {
                // No term or frontier improvement can come from coordinate k
                // or beyond (first-index scores fall with k).
                break;
            }
            let mut idx: u64 = 1;
            loop {
                let lam = self.model.lambda(idx);
                if lam <= 0.0 {
                    break;
                }
                let s = base * lam;
                self.visited += 1;
                if self.visited > self.visit_budget {
                    return Err(self.budget_error());
                }
                let deeper = s * Self::gain_from(gains, k + 1);
                if s > self.eps_sq {
                    coords.push(k as u32);
                    indices.push(idx as u32);
                    if self.retained.len() as u64 >= self.term_budget {
                        return Err(self.budget_error());
                    }
                    self.retained
                        .push(Term::new(coords.clone(), indices.clone()).expect("dfs terms canonical"));
                    self.expand(gains, coords, indices, s, k + 1)?;
                    coords.pop();
                    indices.pop();
                } else {
                    if s > self.best_excluded {
                        self.best_excluded = s;
                    }
                    if deeper > self.best_excluded {
                        // Rejected node whose completions could still qualify
                        // or raise the frontier (only possible when gains
                        // exceed one).
                        coords.push(k as u32);
                        indices.push(idx as u32);
                        self.expand(gains, coords, indices, s, k + 1)?;
                        coords.pop();
                        indices.pop();
                    }
                    if s <= self.eps_sq && s * Self::gain_from(gains, k + 1) <= self.best_excluded {
                        break;
                    }
                }
                idx += 1;
            }
            k += 1;
        }
        Ok(())
    }
}

fn build_gains(model: &ProblemModel) -> Result<Vec<f64>> {
    let l1 = model.lambda(1);
    let mut kstar: u64 = 0;
    while model.gamma(kstar + 1) * l1 > 1.0 {
        kstar += 1;
        if kstar > 1 << 20 {
            return Err(Error::InvalidModel(
                "gamma_k * lambda_1 stays above 1 for over 2^20 coordinates".into(),
            ));
        }
    }
    let mut gains = vec![1.0f64; kstar as usize];
    let mut acc = 1.0;
    for k in (1..=kstar).rev() {
        acc *= model.gamma(k) * l1;
        gains[(k - 1) as usize] = acc;
    }
    Ok(gains)
}

pub(crate) fn enumerate_by_threshold(
    model: &ProblemModel,
    eps_sq: f64,
    epsilon: f64,
    opts: &EnumerationOptions,
) -> Result<ActiveSet> {
    let gains = build_gains(model)?;
    let mut dfs = Dfs {
        model,
        eps_sq,
        term_budget: opts.term_budget,
        visit_budget: opts.term_budget.saturating_mul(8).max(1 << 20),
        epsilon,
        retained: Vec::new(),
        // A threshold at or above 1 excludes the empty term itself.
        best_excluded: if eps_sq >= 1.0 { 1.0 } else { 0.0 },
        visited: 0,
    };
    let mut coords = Vec::new();
    let mut indices = Vec::new();
    dfs.expand(&gains, &mut coords, &mut indices, 1.0, 1)?;

    let mut terms = dfs.retained;
    // The empty term has score 1; it belongs to the set iff the threshold
    // sits strictly below that.
    if opts.include_empty_term && eps_sq < 1.0 {
        terms.push(Term::empty());
    }
    terms.sort_unstable();

    let mut level_counts: BTreeMap<u32, u64> = BTreeMap::new();
    let mut m_eps = 0u32;
    for t in &terms {
        let lvl = t.max_coord();
        *level_counts.entry(lvl).or_insert(0) += 1;
        if lvl > m_eps {
            m_eps = lvl;
        }
    }
    Ok(ActiveSet {
        epsilon,
        terms,
        level_counts,
        m_eps,
        largest_excluded_score: dfs.best_excluded,
        includes_empty_term: opts.include_empty_term,
    })
}

/// Enumerate `{(u, j) : gamma_u lambda_{u,j} > eps^2}` plus the empty term.
///
/// `eps >= 1` yields the empty set with `largest_excluded_score = 1` (the
/// empty algorithm; even the constant component is dropped and the worst-case
/// error is 1). `eps <= 0` is rejected.
pub fn enumerate_active_set(
    model: &ProblemModel,
    eps: f64,
    opts: &EnumerationOptions,
) -> Result<ActiveSet> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "eps must be a positive finite real, got {eps}"
        )));
    }
    if eps >= 1.0 {
        return Ok(ActiveSet {
            epsilon: eps,
            terms: Vec::new(),
            level_counts: BTreeMap::new(),
            m_eps: 0,
            largest_excluded_score: 1.0,
            includes_empty_term: false,
        });
    }
    enumerate_by_threshold(model, eps * eps, eps, opts)
}

/// `n̄_k = |{j : gamma_k lambda_j > eps^2}|` by exponential-then-binary
/// search on the monotone spectrum.
pub fn single_coordinate_count(model: &ProblemModel, eps: f64, k: u32) -> u64 {
    let eps_sq = eps * eps;
    let gk = model.gamma(k as u64);
    if gk <= 0.0 || !(gk * model.lambda(1) > eps_sq) {
        return 0;
    }
    // Invariant: qualifies(lo), !qualifies(hi).
    let qualifies = |j: u64| gk * model.lambda(j) > eps_sq;
    let mut lo: u64 = 1;
    let mut hi: u64 = 2;
    while qualifies(hi) {
        lo = hi;
        hi = hi.saturating_mul(2);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if qualifies(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Largest coordinate `k` with `gamma_k lambda_1 > eps^2`; 0 when no
/// nonempty term qualifies. This is the single-coordinate characterization
/// of the top level; it coincides with [`ActiveSet::m_eps`] whenever
/// `lambda_1 <= 1` (with larger spectra a multi-coordinate term can reach
/// past it).
pub fn max_level(model: &ProblemModel, eps: f64) -> u64 {
    let eps_sq = eps * eps;
    let l1 = model.lambda(1);
    let qualifies = |k: u64| model.gamma(k) * l1 > eps_sq;
    if !qualifies(1) {
        return 0;
    }
    let mut lo: u64 = 1;
    let mut hi: u64 = 2;
    while qualifies(hi) {
        lo = hi;
        hi = hi.saturating_mul(2);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if qualifies(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Level slice `M(eps, k)`: retained terms whose largest coordinate is
/// exactly `k`, by filtering the full enumeration.
pub fn level_slice(
    model: &ProblemModel,
    eps: f64,
    k: u32,
    opts: &EnumerationOptions,
) -> Result<Vec<Term>> {
    let aset = enumerate_active_set(model, eps, opts)?;
    Ok(aset
        .terms()
        .iter()
        .filter(|t| t.max_coord() == k)
        .cloned()
        .collect())
}

/// Level slice built by the largest-coordinate recursion: `M(eps, k)` is the
/// single-coordinate part `{(k, j)}` united with products of `({k}, j)` and
/// lower slices at rescaled thresholds. Candidate membership is always tested
/// on the full canonical score (the multiplicative form of the rescaled
/// threshold), so the two construction routes agree bit-exactly.
pub fn level_slice_recursive(model: &ProblemModel, eps: f64, k: u32) -> Result<Vec<Term>> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument("eps must be positive and finite".into()));
    }
    let eps_sq = eps * eps;
    let mut out = Vec::new();
    slice_rec(model, eps_sq, k, &[], &mut out)?;
    out.sort_unstable();
    Ok(out)
}

/// Collect terms of `M` with largest inner coordinate `k`, to be completed by
/// the fixed `outer` coordinate/index pairs (all strictly larger than `k`).
fn slice_rec(
    model: &ProblemModel,
    eps_sq: f64,
    k: u32,
    outer: &[(u32, u32)],
    out: &mut Vec<Term>,
) -> Result<()> {
    if k == 0 {
        return Ok(());
    }
    let full_term = |inner: &Term| -> Result<Term> {
        let (oc, oi): (Vec<u32>, Vec<u32>) = outer.iter().copied().unzip();
        inner.product(&Term::new(oc, oi)?)
    };
    // Single-coordinate part.
    let mut j: u32 = 1;
    loop {
        let inner = Term::new(vec![k], vec![j])?;
        let t = full_term(&inner)?;
        if model.term_score(&t) > eps_sq {
            out.push(t);
        } else {
            break;
        }
        j += 1;
    }
    // Cross parts: ({k}, j) x M(., l) for l < k.
    if k >= 2 {
        let mut j: u32 = 1;
        loop {
            if model.lambda(j as u64) <= 0.0 {
                break;
            }
            let mut outer_next: Vec<(u32, u32)> = Vec::with_capacity(outer.len() + 1);
            outer_next.push((k, j));
            outer_next.extend_from_slice(outer);
            let before = out.len();
            for l in 1..k {
                slice_rec(model, eps_sq, l, &outer_next, out)?;
            }
            if out.len() == before {
                // Every lower slice is empty at this index; larger j only
                // shrinks the scores.
                break;
            }
            j += 1;
        }
    }
    Ok(())
}

/// Result of the exhaustive capped scan, the test oracle for enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceSet {
    /// Retained terms in canonical order (empty term included for `eps < 1`).
    pub terms: Vec<Term>,
    /// Maximum score over everything excluded: rejected in-cap candidates and
    /// the first out-of-cap extensions.
    pub largest_excluded_score: f64,
}

/// Exhaustive scan of all `(u, j)` with `u ⊆ [max_coord]` and `j_i <=
/// max_index`, retaining scores above `eps^2`. Requires the normalized regime
/// `lambda_1 <= 1` so that scores only fall along subset extension, which is
/// what makes the cap checks sound:
/// a clipped true term would force `gamma_{max_coord+1} * lambda_1 > eps^2`
/// or `gamma_1 * lambda_{max_index+1} > eps^2`, and either is reported as
/// unsound truncation.
pub fn brute_force_active_set(
    model: &ProblemModel,
    eps: f64,
    max_coord: u32,
    max_index: u32,
    budget: u64,
) -> Result<BruteForceSet> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument("eps must be positive and finite".into()));
    }
    if eps >= 1.0 {
        return Ok(BruteForceSet {
            terms: Vec::new(),
            largest_excluded_score: 1.0,
        });
    }
    if max_coord == 0 || max_index == 0 {
        return Err(Error::InvalidArgument("caps must be >= 1".into()));
    }
    if model.lambda(1) > 1.0 || model.gamma(1) * model.lambda(1) > 1.0 {
        return Err(Error::InvalidArgument(
            "brute-force oracle requires the normalized regime lambda_1 <= 1".into(),
        ));
    }
    let eps_sq = eps * eps;
    // Cap soundness: nothing outside the caps may qualify.
    let beyond_coord = model.gamma(max_coord as u64 + 1) * model.lambda(1);
    if beyond_coord > eps_sq {
        return Err(Error::TruncationUnsound(format!(
            "coordinate cap {max_coord} clips the set: gamma_{{{}}}*lambda_1 = {beyond_coord} > eps^2",
            max_coord + 1
        )));
    }
    let beyond_index = model.gamma(1) * model.lambda(max_index as u64 + 1);
    if beyond_index > eps_sq {
        return Err(Error::TruncationUnsound(format!(
            "index cap {max_index} clips the set: gamma_1*lambda_{{{}}} = {beyond_index} > eps^2",
            max_index + 1
        )));
    }

    let mut scan = BruteScan {
        model,
        eps_sq,
        max_coord,
        max_index,
        budget,
        visited: 0,
        terms: Vec::new(),
        frontier: beyond_coord.max(beyond_index),
    };
    let mut subset = Vec::new();
    scan.subsets(&mut subset, 1.0, 1)?;
    scan.terms.push(Term::empty());
    scan.terms.sort_unstable();
    Ok(BruteForceSet {
        terms: scan.terms,
        largest_excluded_score: scan.frontier,
    })
}

struct BruteScan<'a> {
    model: &'a ProblemModel,
    eps_sq: f64,
    max_coord: u32,
    max_index: u32,
    budget: u64,
    visited: u64,
    terms: Vec<Term>,
    frontier: f64,
}

impl<'a> BruteScan<'a> {
    /// Visit every subset of `[max_coord]` extending `subset` with larger
    /// coordinates; `all_ones` is the canonical fold of the all-ones term on
    /// `subset`, the best score any of its index grids can reach.
    fn subsets(&mut self, subset: &mut Vec<u32>, all_ones: f64, from: u32) -> Result<()> {
        if !subset.is_empty() {
            let mut indices = Vec::with_capacity(subset.len());
            self.index_grid(subset, &mut indices, 1.0, 0)?;
        }
        for c in from..=self.max_coord {
            let extended = (all_ones * self.model.gamma(c as u64)) * self.model.lambda(1);
            if !(extended > self.eps_sq) {
                // The all-ones term on subset+{c} is itself excluded and
                // dominates everything under larger coordinates or deeper
                // supersets.
                if extended > self.frontier {
                    self.frontier = extended;
                }
                break;
            }
            subset.push(c);
            self.subsets(subset, extended, c + 1)?;
            subset.pop();
        }
        Ok(())
    }

    /// Scan eigen-index vectors for the fixed subset, position by position,
    /// using the canonical score fold.
    fn index_grid(&mut self, subset: &[u32], indices: &mut Vec<u32>, acc: f64, pos: usize) -> Result<()> {
        if pos == subset.len() {
            self.terms
                .push(Term::new(subset.to_vec(), indices.clone()).expect("scan terms canonical"));
            return Ok(());
        }
        // Best completion of the remaining positions uses index 1 everywhere;
        // in the normalized regime every factor is <= 1, so the partial fold
        // with ones appended bounds every deeper score.
        let g = self.model.gamma(subset[pos] as u64);
        for j in 1..=self.max_index {
            self.visited += 1;
            if self.visited > self.budget {
                return Err(Error::BudgetExceeded {
                    epsilon: crate::numeric::sqrt(self.eps_sq),
                    retained: self.terms.len() as u64,
                    visited: self.visited,
                    budget: self.budget,
                });
            }
            let here = (acc * g) * self.model.lambda(j as u64);
            let mut bound = here;
            for &c in &subset[pos + 1..] {
                bound = (bound * self.model.gamma(c as u64)) * self.model.lambda(1);
            }
            if !(bound > self.eps_sq) {
                if bound > self.frontier {
                    self.frontier = bound;
                }
                break;
            }
            indices.push(j);
            self.index_grid(subset, indices, here, pos + 1)?;
            indices.pop();
        }
        Ok(())
    }
}
