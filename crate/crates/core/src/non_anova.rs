//! Transfer of the optimal truncation machinery to spaces whose underlying
//! decomposition is not orthogonal in L2: auxiliary power-scaled weights, the
//! rescaling isometry on spectral coefficients, a certified-error
//! approximation built on the auxiliary weights, witness-function error lower
//! bounds, and the rate comparison between the two regimes.

use crate::active_set::{enumerate_active_set, ActiveSet, EnumerationOptions};
use crate::cost::{algorithm_cost, CostFunction, CostMode};
use crate::engine::{CoefficientFunction, RateBounds};
use crate::error::{Error, Result};
use crate::model::ProblemModel;
#[cfg(test)]
use crate::model::Term;
use crate::numeric::{powf, sqrt, Interval, KahanSum};
use crate::sequences::DecreasingSequence;
use alloc::format;

/// A base model together with the rescaled weights `gamma_j^{1-c}` and the
/// certified constant `C_gamma = sum_v gamma_v^c` carried by the error
/// transfer.
#[derive(Debug, Clone)]
pub struct AuxiliaryModel {
    /// The `(gamma^{1-c}, lambda)` model the truncation actually runs on.
    aux: ProblemModel,
    pub c: f64,
    pub c_gamma: Interval,
}

impl AuxiliaryModel {
    pub fn model(&self) -> &ProblemModel {
        &self.aux
    }
}

/// Admissible range for the auxiliary exponent: `(1/d_low_gamma, 1)`, open on
/// both sides. With infinite weight decay the left endpoint is 0.
pub fn admissible_c_range(model: &ProblemModel) -> (f64, f64) {
    let d = model.gamma_seq().decay_low();
    let left = if d.is_finite() { 1.0 / d } else { 0.0 };
    (left, 1.0)
}

/// Midpoint default for the auxiliary exponent.
pub fn default_c(model: &ProblemModel) -> f64 {
    let (lo, hi) = admissible_c_range(model);
    0.5 * (lo + hi)
}

/// Build the auxiliary model for exponent `c`, certifying `C_gamma` to the
/// requested relative tolerance. Fails when `c` leaves the admissible range
/// or the constant's series diverges.
pub fn build_auxiliary(model: &ProblemModel, c: f64, rel_tol: f64) -> Result<AuxiliaryModel> {
    let (lo, hi) = admissible_c_range(model);
    if !(c > lo) || !(c < hi) {
        return Err(Error::InvalidArgument(format!(
            "auxiliary exponent c = {c} outside the admissible range ({lo}, {hi})"
        )));
    }
    let c_gamma = model.c_gamma_bracket(c, rel_tol)?;
    let scaled_kind = model
        .gamma_seq()
        .kind()
        .pow_scale(1.0 - c)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "weight family {} is not closed under power scaling",
                model.gamma_seq().name()
            ))
        })?;
    let scale_claim = |v: f64| if v.is_finite() { v * (1.0 - c) } else { v };
    let gamma_hat = DecreasingSequence::new(scaled_kind)?.with_claimed_decay(
        Some(scale_claim(model.gamma_seq().decay_low())),
        Some(scale_claim(model.gamma_seq().decay_up())),
    );
    let aux = ProblemModel::new(gamma_hat, model.lambda_seq().clone())?;
    Ok(AuxiliaryModel { aux, c, c_gamma })
}

/// Direction of the rescaling isometry on coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiDirection {
    Forward,
    Inverse,
}

/// Rescaling isometry in coefficient form: the coefficient on a term with
/// coordinate set `u` is multiplied by `gamma_u^{-c/2}` (forward) or
/// `gamma_u^{c/2}` (inverse). Forward then inverse restores the input up to
/// roundoff.
pub fn phi_transform(
    f: &CoefficientFunction,
    model: &ProblemModel,
    c: f64,
    direction: PhiDirection,
) -> CoefficientFunction {
    let sign = match direction {
        PhiDirection::Forward => -0.5 * c,
        PhiDirection::Inverse => 0.5 * c,
    };
    let mut out = CoefficientFunction::new();
    for (t, &coeff) in f.iter() {
        let gu = model.product_weight(t.coords());
        out.set(t.clone(), coeff * powf(gu, sign));
    }
    out
}

/// Squared norm of the same spectral function measured against the rescaled
/// weights: each squared coefficient picks up the factor `gamma_u^c`. Never
/// exceeds the base-space norm when every weight is at most one.
pub fn norm_sq_in_aux(f: &CoefficientFunction, model: &ProblemModel, c: f64) -> f64 {
    let mut s = KahanSum::new();
    for (t, &coeff) in f.iter() {
        let gu = model.product_weight(t.coords());
        s.add(coeff * coeff * powf(gu, c));
    }
    s.value()
}

/// A truncation run on the auxiliary weights with the error certificate the
/// transfer carries: the nominal demand and the conservative bound
/// `sqrt(C_gamma) * eps`. Both readings are reported; the bound is never
/// silently claimed to be the nominal demand.
#[derive(Debug, Clone)]
pub struct NonAnovaApproximation {
    pub c: f64,
    pub c_gamma: Interval,
    pub nominal_eps: f64,
    /// `sqrt(C_gamma.hi) * nominal_eps`.
    pub certified_error_bound: f64,
    pub cost_nss: f64,
    pub active_set: ActiveSet,
}

/// Enumerate the optimal set for the auxiliary weights at demand `eps` and
/// attach the certified error bound and its nested-sampling cost.
pub fn certified_non_anova_approximation(
    model: &ProblemModel,
    eps: f64,
    costfn: &CostFunction,
    c: Option<f64>,
    rel_tol: f64,
    opts: &EnumerationOptions,
) -> Result<NonAnovaApproximation> {
    let c = c.unwrap_or_else(|| default_c(model));
    let auxm = build_auxiliary(model, c, rel_tol)?;
    let active_set = enumerate_active_set(auxm.model(), eps, opts)?;
    let cost_nss = algorithm_cost(&active_set, costfn, CostMode::Nss);
    Ok(NonAnovaApproximation {
        c,
        c_gamma: auxm.c_gamma,
        nominal_eps: eps,
        certified_error_bound: sqrt(auxm.c_gamma.hi) * eps,
        cost_nss,
        active_set,
    })
}

/// Rate window for the non-orthogonal regime: the weight decay loses one in
/// the numerator, and the upper bound divides by `2s` rather than `2(1+s)`.
pub fn non_anova_rate_bounds(
    d_lambda_low: f64,
    d_gamma_low: f64,
    d_gamma_up: f64,
    s: f64,
) -> Result<RateBounds> {
    if !(d_lambda_low > 1.0) || !(d_gamma_low > 1.0) || !(s > 0.0) {
        return Err(Error::InvalidArgument(
            "rate bounds need d_lambda_low > 1, d_gamma_low > 1, s > 0".into(),
        ));
    }
    if !d_gamma_up.is_finite() || d_gamma_up < d_gamma_low {
        return Err(Error::InvalidArgument(
            "d_gamma_up must be finite and >= d_gamma_low".into(),
        ));
    }
    let cap = d_lambda_low / 2.0;
    let lower = cap.min((d_gamma_low - 1.0) / (2.0 * (1.0 + s)));
    let upper = cap.min((d_gamma_up - 1.0) / (2.0 * s));
    let recip = |r: f64| if r > 0.0 { 1.0 / r } else { f64::INFINITY };
    Ok(RateBounds {
        lower,
        upper,
        tract_exp_lower: recip(upper),
        tract_exp_upper: recip(lower),
    })
}

/// Rigorous interval for the squared L2 norm of the tail witness function:
/// `(h_norm_sq - c1^2) * (sum_{j>L} gamma_j^2 / sum_{j>L} gamma_j)
///  + c1^2 * sum_{j>L} gamma_j`,
/// from bracketed tail sums.
pub fn witness_norm(model: &ProblemModel, h_l2_norm_sq: f64, c1: f64, cut: u64) -> Result<Interval> {
    if c1 == 0.0 || !c1.is_finite() {
        return Err(Error::InvalidArgument(
            "the witness construction needs a nonzero mean c1".into(),
        ));
    }
    let bsq = c1 * c1;
    if !(h_l2_norm_sq >= bsq) {
        return Err(Error::InvalidArgument(format!(
            "h_l2_norm_sq = {h_l2_norm_sq} below c1^2 = {bsq} contradicts Cauchy-Schwarz"
        )));
    }
    let t1 = model.tail_weight_sum(cut, 1.0)?;
    let t2 = model.tail_weight_sum(cut, 2.0)?;
    if t1.hi == 0.0 {
        return Ok(Interval::point(0.0));
    }
    let a = h_l2_norm_sq - bsq;
    let ratio_lo = if t1.hi > 0.0 { t2.lo / t1.hi } else { 0.0 };
    let ratio_hi = if t1.lo > 0.0 {
        t2.hi / t1.lo
    } else if t2.hi == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(Interval::new(
        a * ratio_lo + bsq * t1.lo,
        a * ratio_hi + bsq * t1.hi,
    ))
}

/// Witness-based error lower bound at an information budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessBound {
    /// `sup { k : $(k) <= budget }`; every coordinate the algorithm can
    /// afford to touch lies in `[1, level_cutoff]`.
    pub level_cutoff: u64,
    pub norm_sq: Interval,
    /// `sqrt(norm_sq.lo)`: no algorithm within budget beats this error.
    pub error_lower_bound: f64,
    /// `|c1| * sqrt(tail weight sum)`: the witness value of the companion
    /// integration problem.
    pub integration_witness: Interval,
}

/// Map a budget to the last affordable level and evaluate the witness there.
pub fn witness_lower_bound(
    model: &ProblemModel,
    costfn: &CostFunction,
    budget: f64,
    h_l2_norm_sq: f64,
    c1: f64,
) -> Result<WitnessBound> {
    if !(budget >= costfn.eval(0)) {
        return Err(Error::InvalidArgument(format!(
            "budget {budget} below $(0) = {}",
            costfn.eval(0)
        )));
    }
    // Largest k with $(k) <= budget; L = 0 when even level 1 is unaffordable.
    let affordable = |k: u64| costfn.eval(k.min(u32::MAX as u64) as u32) <= budget;
    let cutoff = if !affordable(1) {
        0
    } else {
        let mut lo: u64 = 1;
        let mut hi: u64 = 2;
        while affordable(hi) && hi <= u32::MAX as u64 {
            lo = hi;
            hi = hi.saturating_mul(2);
        }
        if affordable(hi) {
            // A cost function that stops growing (a clamped table) can leave
            // every level affordable; the cutoff is then undefined.
            return Err(Error::InvalidArgument(
                "cost function admits unboundedly many affordable levels; witness cutoff undefined"
                    .into(),
            ));
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if affordable(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let norm_sq = witness_norm(model, h_l2_norm_sq, c1, cutoff)?;
    let t1 = model.tail_weight_sum(cutoff, 1.0)?;
    let c1a = crate::numeric::abs(c1);
    Ok(WitnessBound {
        level_cutoff: cutoff,
        norm_sq,
        error_lower_bound: sqrt(norm_sq.lo),
        integration_witness: Interval::new(c1a * sqrt(t1.lo), c1a * sqrt(t1.hi)),
    })
}

/// The two closed-form rates compared at equal regular weight decay
/// `d_gamma`, and whether the orthogonal-decomposition rate is strictly
/// larger (which happens exactly for `1 < d_gamma < 1 + s`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonGap {
    pub anova_rate: f64,
    pub non_anova_upper: f64,
    pub strict: bool,
}

pub fn comparison_gap(d_gamma: f64, d_lambda_low: f64, s: f64) -> Result<ComparisonGap> {
    if !(d_gamma > 1.0) || !(d_lambda_low > 1.0) || !(s > 0.0) {
        return Err(Error::InvalidArgument(
            "comparison needs d_gamma > 1, d_lambda_low > 1, s > 0".into(),
        ));
    }
    let cap = d_lambda_low / 2.0;
    Ok(ComparisonGap {
        anova_rate: cap.min(d_gamma / (2.0 * (1.0 + s))),
        non_anova_upper: cap.min((d_gamma - 1.0) / (2.0 * s)),
        strict: d_gamma < 1.0 + s,
    })
}
