//! Positive non-increasing null sequences together with finite-sample
//! polynomial decay-rate estimators, partial power sums, sandwich-constant
//! reports, and certified tail brackets.
//!
//! A sequence is described by a closed-form kind rather than an opaque
//! closure so that evaluation is deterministic, serializable, and so that
//! tail sums can be bracketed rigorously from an analytic envelope.
//!
//! The decay estimators work on the local slope `-ln x_n / ln n`. For an
//! exact power law `x_n = c * n^{-a}` every slope equals `a + ln(1/c)/ln n`,
//! so both the min-based and the max-based estimator converge to `a` as the
//! smallest sampled index grows. Convergence is one-sided only for exact
//! power laws; for general sequences the estimates are finite-sample stand-ins
//! for liminf/limsup quantities and the caller picks the sample points.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;
use core::f64::consts::LN_2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{exp, ln, powf, Interval, KahanSum};

/// Closed-form sequence families. The serialized form is
/// `{"kind": "...", "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum SequenceKind {
    /// `x_n = scale * n^{-exponent}`
    Power { scale: f64, exponent: f64 },
    /// `x_n = scale * n^{-exponent} * ln(n+1)^{log_exponent}`
    PowerLog {
        scale: f64,
        exponent: f64,
        log_exponent: f64,
    },
    /// `x_n = scale * ratio^n` with `0 < ratio < 1`
    Geometric { scale: f64, ratio: f64 },
    /// The piecewise-constant block sequence `y_n = 2^{-e_k}` on `[b_k, b_{k+1})`
    /// with `e_1 = 0` and `e_{k+1} = 2^{e_k} + 1`; the first block is clipped
    /// to start at index 1.
    RemarkBlock,
    /// Explicit finite table; indices beyond the table have value 0
    /// (finite support convention for weight sequences).
    Table { values: Vec<f64> },
}

/// Block boundaries and exponents of the remark-block sequence, restricted to
/// what fits in `u64`. Block `i` covers `[starts[i], starts[i+1])` with value
/// `2^{-exps[i]}`; the last block extends to `u64::MAX` because the next
/// boundary `2^{e_5}+1` is not representable.
const REMARK_STARTS: [u64; 5] = [1, 2, 5, 33, 8_589_934_593];
const REMARK_EXPS: [u64; 5] = [0, 2, 5, 33, 8_589_934_593];

/// Largest index at which the remark-block sequence still has a positive
/// `f64` value (`2^{-33}`); from the next block on the value underflows.
pub const REMARK_EVAL_LIMIT: u64 = REMARK_STARTS[4] - 1;

/// The first four downward jumps of the remark-block sequence, i.e. the block
/// starts past the clipped initial block. Slopes sampled here witness the
/// infinite upper decay rate.
pub fn remark_block_jumps() -> [u64; 4] {
    [REMARK_STARTS[1], REMARK_STARTS[2], REMARK_STARTS[3], REMARK_STARTS[4]]
}

impl SequenceKind {
    fn validate(&self) -> Result<()> {
        match self {
            SequenceKind::Power { scale, exponent } => {
                if !(*scale > 0.0) || !(*exponent > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "power sequence needs scale > 0 and exponent > 0, got scale={scale}, exponent={exponent}"
                    )));
                }
            }
            SequenceKind::PowerLog { scale, exponent, .. } => {
                if !(*scale > 0.0) || !(*exponent > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "power_log sequence needs scale > 0 and exponent > 0, got scale={scale}, exponent={exponent}"
                    )));
                }
            }
            SequenceKind::Geometric { scale, ratio } => {
                if !(*scale > 0.0) || !(*ratio > 0.0) || !(*ratio < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "geometric sequence needs scale > 0 and ratio in (0,1), got scale={scale}, ratio={ratio}"
                    )));
                }
            }
            SequenceKind::RemarkBlock => {}
            SequenceKind::Table { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidArgument("table sequence must be non-empty".into()));
                }
                if !(values[0] > 0.0) {
                    return Err(Error::InvalidArgument("table sequence must start positive".into()));
                }
                for w in values.windows(2) {
                    if !(w[1] <= w[0]) || w[1] < 0.0 {
                        return Err(Error::InvalidSequence(
                            "table sequence must be non-increasing and non-negative".into(),
                        ));
                    }
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument("table sequence must be finite".into()));
                }
            }
        }
        Ok(())
    }

    fn default_name(&self) -> String {
        match self {
            SequenceKind::Power { scale, exponent } => format!("power({scale},{exponent})"),
            SequenceKind::PowerLog {
                scale,
                exponent,
                log_exponent,
            } => format!("power_log({scale},{exponent},{log_exponent})"),
            SequenceKind::Geometric { scale, ratio } => format!("geometric({scale},{ratio})"),
            SequenceKind::RemarkBlock => "remark_block".into(),
            SequenceKind::Table { values } => format!("table(len={})", values.len()),
        }
    }

    /// Analytic lower and upper polynomial decay rates of the family.
    fn analytic_decay(&self) -> (f64, f64) {
        match self {
            SequenceKind::Power { exponent, .. } => (*exponent, *exponent),
            // Logarithmic factors do not move the polynomial decay rate.
            SequenceKind::PowerLog { exponent, .. } => (*exponent, *exponent),
            SequenceKind::Geometric { .. } => (f64::INFINITY, f64::INFINITY),
            SequenceKind::RemarkBlock => (1.0, f64::INFINITY),
            SequenceKind::Table { .. } => (f64::INFINITY, f64::INFINITY),
        }
    }

    /// The same family with every value raised to the power `e > 0`, when the
    /// family is closed under that operation.
    pub fn pow_scale(&self, e: f64) -> Option<SequenceKind> {
        match self {
            SequenceKind::Power { scale, exponent } => Some(SequenceKind::Power {
                scale: powf(*scale, e),
                exponent: exponent * e,
            }),
            SequenceKind::PowerLog {
                scale,
                exponent,
                log_exponent,
            } => Some(SequenceKind::PowerLog {
                scale: powf(*scale, e),
                exponent: exponent * e,
                log_exponent: log_exponent * e,
            }),
            SequenceKind::Geometric { scale, ratio } => Some(SequenceKind::Geometric {
                scale: powf(*scale, e),
                ratio: powf(*ratio, e),
            }),
            SequenceKind::Table { values } => Some(SequenceKind::Table {
                values: values.iter().map(|&v| powf(v, e)).collect(),
            }),
            SequenceKind::RemarkBlock => None,
        }
    }
}

/// A lazily evaluable positive non-increasing null sequence with a label and
/// optional claimed decay rates (claims override the analytic rates, which is
/// how finite tables stand in for infinite fixtures in tests).
#[derive(Debug, Clone, PartialEq)]
pub struct DecreasingSequence {
    kind: SequenceKind,
    name: String,
    claimed_decay_low: Option<f64>,
    claimed_decay_up: Option<f64>,
}

impl DecreasingSequence {
    pub fn new(kind: SequenceKind) -> Result<Self> {
        kind.validate()?;
        let name = kind.default_name();
        Ok(Self {
            kind,
            name,
            claimed_decay_low: None,
            claimed_decay_up: None,
        })
    }

    pub fn power(scale: f64, exponent: f64) -> Result<Self> {
        Self::new(SequenceKind::Power { scale, exponent })
    }

    pub fn power_log(scale: f64, exponent: f64, log_exponent: f64) -> Result<Self> {
        Self::new(SequenceKind::PowerLog {
            scale,
            exponent,
            log_exponent,
        })
    }

    pub fn geometric(scale: f64, ratio: f64) -> Result<Self> {
        Self::new(SequenceKind::Geometric { scale, ratio })
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        Self::new(SequenceKind::Table { values })
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_claimed_decay(mut self, low: Option<f64>, up: Option<f64>) -> Self {
        self.claimed_decay_low = low;
        self.claimed_decay_up = up;
        self
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Evaluate `x_n` for `n >= 1`. Deterministic: repeated calls return
    /// bit-identical values.
    pub fn eval(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("sequence indices start at 1".into()));
        }
        let nf = n as f64;
        match &self.kind {
            SequenceKind::Power { scale, exponent } => Ok(scale * powf(nf, -exponent)),
            SequenceKind::PowerLog {
                scale,
                exponent,
                log_exponent,
            } => Ok(scale * powf(nf, -exponent) * powf(ln(nf + 1.0), *log_exponent)),
            SequenceKind::Geometric { scale, ratio } => Ok(scale * powf(*ratio, nf)),
            SequenceKind::RemarkBlock => {
                let e = remark_exponent(n);
                if e > 1074 {
                    // 2^{-e} underflows even the subnormal range.
                    return Err(Error::OutOfRange {
                        index: n,
                        limit: REMARK_EVAL_LIMIT,
                    });
                }
                Ok(powf(2.0, -(e as f64)))
            }
            SequenceKind::Table { values } => {
                let i = (n - 1) as usize;
                Ok(if i < values.len() { values[i] } else { 0.0 })
            }
        }
    }

    /// Natural log of `x_n`, computed in log space where the family allows it.
    /// Stays finite far past the underflow range of [`eval`](Self::eval):
    /// e.g. the remark-block sequence is log-evaluable at every `u64` index.
    /// Returns `-inf` for zero table entries.
    pub fn log_eval(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("sequence indices start at 1".into()));
        }
        let nf = n as f64;
        match &self.kind {
            SequenceKind::Power { scale, exponent } => Ok(ln(*scale) - exponent * ln(nf)),
            SequenceKind::PowerLog {
                scale,
                exponent,
                log_exponent,
            } => Ok(ln(*scale) - exponent * ln(nf) + log_exponent * ln(ln(nf + 1.0))),
            SequenceKind::Geometric { scale, ratio } => Ok(ln(*scale) + nf * ln(*ratio)),
            SequenceKind::RemarkBlock => Ok(-(remark_exponent(n) as f64) * LN_2),
            SequenceKind::Table { .. } => {
                let v = self.eval(n)?;
                Ok(ln(v))
            }
        }
    }

    /// Effective lower decay rate: the claimed value if declared, otherwise
    /// the analytic rate of the family.
    pub fn decay_low(&self) -> f64 {
        self.claimed_decay_low.unwrap_or(self.kind.analytic_decay().0)
    }

    /// Effective upper decay rate.
    pub fn decay_up(&self) -> f64 {
        self.claimed_decay_up.unwrap_or(self.kind.analytic_decay().1)
    }

    /// Verify monotone non-increase on `[from, to]` by scanning log values.
    pub fn check_monotone(&self, from: u64, to: u64) -> Result<()> {
        let mut prev = self.log_eval(from.max(1))?;
        for n in (from.max(1) + 1)..=to {
            let cur = self.log_eval(n)?;
            if cur > prev {
                return Err(Error::InvalidSequence(format!(
                    "{} increases at index {n}",
                    self.name
                )));
            }
            prev = cur;
        }
        Ok(())
    }

    /// Rigorous bracket for the tail `sum_{j > cut} x_j^{power}`.
    ///
    /// Pure power families use the midpoint-rule bracket (quadratic
    /// convergence in the scan point); geometric, table, and block families
    /// are exact; log-corrected families fall back to a first-order
    /// integral bracket. The scan point is doubled until the bracket's
    /// relative width drops below `rel_tol`, the series is provably
    /// divergent, or a scan cap is reached (the returned interval is
    /// rigorous either way, just wider than requested past the cap).
    pub fn tail_power_bounds(&self, cut: u64, power: f64, rel_tol: f64) -> Result<Interval> {
        if !(power > 0.0) {
            return Err(Error::InvalidArgument("tail power must be positive".into()));
        }
        match &self.kind {
            SequenceKind::Table { values } => {
                let mut s = KahanSum::new();
                for (i, &v) in values.iter().enumerate() {
                    if (i as u64) + 1 > cut && v > 0.0 {
                        s.add(powf(v, power));
                    }
                }
                let v = s.value();
                if v == 0.0 {
                    return Ok(Interval::point(0.0));
                }
                Ok(Interval::new(v * (1.0 - 1e-14), v * (1.0 + 1e-14)))
            }
            SequenceKind::Geometric { scale, ratio } => {
                // Exact geometric tail: c^p r^{p(cut+1)} / (1 - r^p).
                let rp = powf(*ratio, power);
                let head = powf(*scale, power) * powf(rp, (cut + 1) as f64);
                let v = head / (1.0 - rp);
                Ok(Interval::new(v * (1.0 - 1e-13), v * (1.0 + 1e-13)))
            }
            SequenceKind::RemarkBlock => {
                if !(power > 1.0) {
                    return Err(Error::DivergentConstant(
                        "remark-block tails converge only for power > 1".into(),
                    ));
                }
                // Exact over the stored blocks, geometric dominate beyond.
                let mut s = KahanSum::new();
                for i in 0..REMARK_STARTS.len() {
                    let b_start = REMARK_STARTS[i].max(cut + 1);
                    let b_end = if i + 1 < REMARK_STARTS.len() {
                        REMARK_STARTS[i + 1]
                    } else {
                        // Last stored block: its true width is astronomically
                        // larger than u64, but each term is 2^{-e_5 * power}
                        // which underflows; account it in the tail bound below.
                        REMARK_STARTS[i]
                    };
                    if b_start < b_end {
                        let count = (b_end - b_start) as f64;
                        let term = exp(-(REMARK_EXPS[i] as f64) * LN_2 * power);
                        s.add(count * term);
                    }
                }
                // All blocks from e_5 on: sum_k 2^{e_k(1-power)} <= geometric.
                let e5 = REMARK_EXPS[4] as f64;
                let top = exp(e5 * (1.0 - power) * LN_2);
                let hi_tail = top / (1.0 - exp((1.0 - power) * LN_2)) + f64::MIN_POSITIVE;
                let lo = s.value();
                Ok(Interval::new(lo * (1.0 - 1e-13), (lo + hi_tail) * (1.0 + 1e-13)))
            }
            SequenceKind::Power { scale, exponent } => {
                let a = exponent * power;
                if a <= 1.0 {
                    return Err(Error::DivergentConstant(format!(
                        "sum of {}^{power} diverges (exponent {a} <= 1)",
                        self.name
                    )));
                }
                Ok(power_tail_midpoint(powf(*scale, power), a, cut, rel_tol))
            }
            SequenceKind::PowerLog { .. } => {
                let env = self.power_envelope(power)?;
                self.bracket_by_envelope(cut, power, rel_tol, env)
            }
        }
    }

    /// Analytic envelope `x_j^power <= env_scale * j^{-env_exp}` for all
    /// j >= 1 of a log-corrected power family, with `env_exp > 1` certifying
    /// convergence.
    fn power_envelope(&self, power: f64) -> Result<(f64, f64)> {
        let SequenceKind::PowerLog {
            scale,
            exponent,
            log_exponent,
        } = &self.kind
        else {
            unreachable!("envelope only requested for log-corrected kinds");
        };
        let m = log_exponent * power;
        let base = powf(*scale, power);
        if m <= 0.0 {
            // ln(n+1)^m <= ln(2)^m for n >= 1 when m <= 0.
            let a = exponent * power;
            if a <= 1.0 {
                return Err(Error::DivergentConstant(format!(
                    "sum of {}^{power} diverges (envelope exponent {a} <= 1)",
                    self.name
                )));
            }
            Ok((base * powf(LN_2, m), a))
        } else {
            // ln(1+j) <= 2*sqrt(2j), so ln^m costs m/2 in the exponent.
            let a = exponent * power - m / 2.0;
            if a <= 1.0 {
                return Err(Error::DivergentConstant(format!(
                    "cannot certify convergence of {}^{power}: envelope exponent {a} <= 1",
                    self.name
                )));
            }
            Ok((base * powf(2.0 * powf(2.0, 0.5), m), a))
        }
    }

    fn bracket_by_envelope(
        &self,
        cut: u64,
        power: f64,
        rel_tol: f64,
        (env_scale, env_exp): (f64, f64),
    ) -> Result<Interval> {
        // integral of the envelope over [x, inf)
        let env_tail = |x: f64| env_scale * powf(x, 1.0 - env_exp) / (env_exp - 1.0);
        // With a positive log exponent the terms rise before they fall; the
        // remainder bound needs a non-increasing range, which holds from
        // ln(t+1) > log_exponent / exponent on.
        let mono_from = match &self.kind {
            SequenceKind::PowerLog {
                exponent,
                log_exponent,
                ..
            } if *log_exponent > 0.0 => exp(log_exponent / exponent) as u64 + 1,
            _ => 0,
        };
        let mut scan_to = (cut + 64).max(mono_from).next_power_of_two();
        let mut partial = KahanSum::new();
        let mut summed_to = cut;
        loop {
            for j in (summed_to + 1)..=scan_to {
                let x = self.eval(j)?;
                if x > 0.0 {
                    partial.add(powf(x, power));
                }
            }
            summed_to = scan_to;
            // Remainder past scan_to: between 0 and f(scan_to+1) + integral.
            let f_next = powf(self.eval(scan_to + 1)?, power);
            let hi_rem = f_next + env_tail((scan_to + 1) as f64);
            let lo = partial.value();
            let hi = lo + hi_rem;
            if hi == 0.0 {
                return Ok(Interval::point(0.0));
            }
            if hi_rem <= rel_tol * lo.max(f64::MIN_POSITIVE) || scan_to >= 1 << 22 {
                let lo = lo * (1.0 - 1e-13);
                let hi = hi * (1.0 + 1e-13);
                return Ok(Interval::new(lo, hi));
            }
            scan_to *= 2;
        }
    }
}

/// Midpoint-rule bracket for `sum_{j > cut} s * j^{-a}` with `a > 1`.
///
/// For convex `f`, `f(j)` underestimates the cell integral over
/// `[j-1/2, j+1/2]` by at most `max f''/24`, so with `x = n + 1/2`:
///
/// `mid - err <= sum_{j > n} f(j) <= mid`,
/// `mid = s * x^{1-a}/(a-1)`,
/// `err = (f''(x) - s*(x^{-a})') / 24 = s*(a(a+1)x^{-a-2} + a x^{-a-1})/24`.
///
/// Leading terms are summed directly and the scan point doubles until the
/// bracket is relatively tighter than `rel_tol`; the error term falls two
/// orders faster than the tail, so a short scan suffices even for tight
/// tolerances.
fn power_tail_midpoint(s: f64, a: f64, cut: u64, rel_tol: f64) -> Interval {
    let rem = |n: u64| -> (f64, f64) {
        let x = n as f64 + 0.5;
        let mid = s * powf(x, 1.0 - a) / (a - 1.0);
        let err = s * (a * (a + 1.0) * powf(x, -a - 2.0) + a * powf(x, -a - 1.0)) / 24.0;
        ((mid - err).max(0.0), mid)
    };
    let mut partial = KahanSum::new();
    let mut summed_to = cut;
    let mut scan_to = cut;
    loop {
        for j in (summed_to + 1)..=scan_to {
            partial.add(s * powf(j as f64, -a));
        }
        summed_to = scan_to;
        let (rem_lo, rem_hi) = rem(scan_to);
        let lo = partial.value() + rem_lo;
        let hi = partial.value() + rem_hi;
        if hi - lo <= rel_tol * lo.max(f64::MIN_POSITIVE) || scan_to >= 1 << 22 {
            return Interval::new(lo * (1.0 - 1e-13), hi * (1.0 + 1e-13));
        }
        scan_to = (scan_to + 64).next_power_of_two();
    }
}

/// Block exponent `e_k` of the remark-block sequence at index `n >= 1`.
fn remark_exponent(n: u64) -> u64 {
    let mut e = REMARK_EXPS[0];
    for i in 0..REMARK_STARTS.len() {
        if n >= REMARK_STARTS[i] {
            e = REMARK_EXPS[i];
        } else {
            break;
        }
    }
    e
}

/// The piecewise-constant example sequence with jumps at 2, 5, 33, 2^33+1.
/// Lower decay rate 1, upper decay rate infinite.
pub fn remark_block_sequence() -> DecreasingSequence {
    DecreasingSequence::new(SequenceKind::RemarkBlock)
        .expect("remark block kind is always valid")
        .with_claimed_decay(Some(1.0), Some(f64::INFINITY))
}

/// Default sample set for the decay estimators: dyadic indices
/// `2, 4, ..., <= horizon`, with the horizon itself appended when it is not a
/// power of two. Slopes at n = 1 are undefined, so sampling starts at 2.
pub fn dyadic_sample_points(horizon: u64) -> Vec<u64> {
    let mut pts = Vec::new();
    let mut p = 2u64;
    while p <= horizon {
        pts.push(p);
        if p > horizon / 2 {
            break;
        }
        p *= 2;
    }
    if pts.last() != Some(&horizon) && horizon >= 2 {
        pts.push(horizon);
    }
    pts
}

fn validated_slopes(
    seq: &DecreasingSequence,
    horizon: u64,
    sample_points: &[u64],
) -> Result<Vec<f64>> {
    if sample_points.is_empty() {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    let mut pts: Vec<u64> = sample_points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts[0] < 2 || *pts.last().unwrap() > horizon {
        return Err(Error::InvalidArgument(format!(
            "sample points must lie in [2, horizon={horizon}]"
        )));
    }
    let mut slopes = Vec::with_capacity(pts.len());
    let mut prev_log: Option<f64> = None;
    for &n in &pts {
        let lx = seq.log_eval(n)?;
        if !lx.is_finite() && lx < 0.0 {
            return Err(Error::InvalidSequence(format!(
                "{} is not positive at index {n}",
                seq.name()
            )));
        }
        if let Some(p) = prev_log {
            // Monotone on the sampled range is a precondition of the slope
            // characterization.
            if lx > p {
                return Err(Error::InvalidSequence(format!(
                    "{} increases on the sampled range at index {n}",
                    seq.name()
                )));
            }
        }
        prev_log = Some(lx);
        slopes.push(-lx / ln(n as f64));
    }
    Ok(slopes)
}

/// Finite-sample estimate of the lower polynomial decay rate: the minimum of
/// the local slopes `-ln x_n / ln n` over the sample points.
pub fn estimate_decay_low(
    seq: &DecreasingSequence,
    horizon: u64,
    sample_points: &[u64],
) -> Result<f64> {
    let slopes = validated_slopes(seq, horizon, sample_points)?;
    Ok(slopes.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Finite-sample estimate of the upper polynomial decay rate: the maximum of
/// the local slopes over the sample points. Always >= the low estimate on the
/// same sample set.
pub fn estimate_decay_up(
    seq: &DecreasingSequence,
    horizon: u64,
    sample_points: &[u64],
) -> Result<f64> {
    let slopes = validated_slopes(seq, horizon, sample_points)?;
    Ok(slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Partial sum `sum_{j <= n_terms} x_j^{1/alpha}`, accumulated in ascending
/// index order with compensated summation.
pub fn partial_power_sum(seq: &DecreasingSequence, alpha: f64, n_terms: u64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument("alpha must be positive".into()));
    }
    if n_terms < 1 {
        return Err(Error::InvalidArgument("need at least one term".into()));
    }
    let inv = 1.0 / alpha;
    let mut s = KahanSum::new();
    for j in 1..=n_terms {
        let x = seq.eval(j)?;
        if x > 0.0 {
            s.add(powf(x, inv));
        }
    }
    Ok(s.value())
}

/// Constants of the two-sided comparison `n^{-p1} <= x_n <= n^{-p2}` over a
/// finite range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    /// `min_n x_n n^{p1}` over `[1, horizon]`.
    pub c_low: f64,
    /// Index attaining `c_low`.
    pub c_low_at: u64,
    /// `max_n x_n n^{p2}` over `[1, horizon]`.
    pub c_up: f64,
    /// Index attaining `c_up`.
    pub c_up_at: u64,
    /// True iff `c_low > 0` and `c_up` is finite. Trivially true on finite
    /// ranges of positive sequences; the informative part is how the
    /// constants move as the horizon doubles.
    pub holds: bool,
}

/// Scan `[1, horizon]` for the sandwich constants with `p1 > p2 > 0`.
/// Extending the horizon can only shrink `c_low` and grow `c_up`.
pub fn check_sandwich(
    seq: &DecreasingSequence,
    p1: f64,
    p2: f64,
    horizon: u64,
) -> Result<SandwichReport> {
    if !(p1 > p2) || !(p2 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sandwich exponents need p1 > p2 > 0, got p1={p1}, p2={p2}"
        )));
    }
    if horizon < 1 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    let mut c_low = f64::INFINITY;
    let mut c_low_at = 1;
    let mut c_up = f64::NEG_INFINITY;
    let mut c_up_at = 1;
    for n in 1..=horizon {
        let x = seq.eval(n)?;
        let nf = n as f64;
        let low_val = x * powf(nf, p1);
        let up_val = x * powf(nf, p2);
        if low_val < c_low {
            c_low = low_val;
            c_low_at = n;
        }
        if up_val > c_up {
            c_up = up_val;
            c_up_at = n;
        }
    }
    Ok(SandwichReport {
        c_low,
        c_low_at,
        c_up,
        c_up_at,
        holds: c_low > 0.0 && c_up.is_finite(),
    })
}
