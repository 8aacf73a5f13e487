//! Information-cost accounting. A functional whose representer lives in the
//! coordinate set `u` is priced `$(max u)` under nested subspace sampling and
//! `$(|u|)` under unrestricted subspace sampling, with `max ∅ = 0` and a
//! non-decreasing cost function `$ : N_0 -> [1, inf)`.

use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

use crate::active_set::ActiveSet;
use crate::error::{Error, Result};
use crate::model::Term;
use crate::numeric::{powf, KahanSum};

/// Which subspace-sampling price a functional pays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    Nss,
    Unrestricted,
}

impl fmt::Display for CostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostMode::Nss => write!(f, "nss"),
            CostMode::Unrestricted => write!(f, "unrestricted"),
        }
    }
}

/// Non-decreasing cost function on level indices.
///
/// The polynomial form is `$(k) = max(1, k)^s`, which keeps `$(0) = 1` (the
/// empty term stays costable) while growing like `k^s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostFunction {
    Poly { s: f64 },
    /// Explicit values for `$(0), $(1), ...`; levels past the table clamp to
    /// the last entry.
    Table { values: Vec<f64> },
}

impl CostFunction {
    pub fn poly(s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidCost("polynomial exponent must be positive".into()));
        }
        Ok(CostFunction::Poly { s })
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidCost("cost table must be non-empty".into()));
        }
        if values.iter().any(|v| !(*v >= 1.0) || !v.is_finite()) {
            return Err(Error::InvalidCost("cost values must be finite and >= 1".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidCost("cost table must be non-decreasing".into()));
        }
        Ok(CostFunction::Table { values })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CostFunction::Poly { s } => {
                Self::poly(*s)?;
            }
            CostFunction::Table { values } => {
                Self::table(values.clone())?;
            }
        }
        Ok(())
    }

    /// `$(k)`.
    pub fn eval(&self, k: u32) -> f64 {
        match self {
            CostFunction::Poly { s } => powf((k.max(1)) as f64, *s),
            CostFunction::Table { values } => {
                let i = (k as usize).min(values.len() - 1);
                values[i]
            }
        }
    }

    /// The polynomial growth exponent, when the function has one.
    pub fn poly_exponent(&self) -> Option<f64> {
        match self {
            CostFunction::Poly { s } => Some(*s),
            CostFunction::Table { .. } => None,
        }
    }
}

/// Price of the single functional attached to a term.
pub fn term_cost(costfn: &CostFunction, t: &Term, mode: CostMode) -> f64 {
    match mode {
        CostMode::Nss => costfn.eval(t.max_coord()),
        CostMode::Unrestricted => costfn.eval(t.order() as u32),
    }
}

/// Total information cost of an enumerated set: one functional per retained
/// term. Accumulated level-ascending (NSS) or order-ascending (unrestricted)
/// with compensated summation, so totals are reproducible.
pub fn algorithm_cost(aset: &ActiveSet, costfn: &CostFunction, mode: CostMode) -> f64 {
    let mut sum = KahanSum::new();
    match mode {
        CostMode::Nss => {
            for (&level, &count) in aset.level_counts() {
                sum.add(count as f64 * costfn.eval(level));
            }
        }
        CostMode::Unrestricted => {
            // Group by interaction order; canonical term order is not
            // order-ascending, so bucket first.
            let mut by_order: alloc::collections::BTreeMap<u32, u64> = alloc::collections::BTreeMap::new();
            for t in aset.terms() {
                *by_order.entry(t.order() as u32).or_insert(0) += 1;
            }
            for (&ord, &count) in &by_order {
                sum.add(count as f64 * costfn.eval(ord));
            }
        }
    }
    sum.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::active_set::{enumerate_active_set, EnumerationOptions};
    use crate::model::ProblemModel;
    use crate::sequences::DecreasingSequence;
    use alloc::vec;

    #[test]
    fn term_cost_examples() {
        let sq = CostFunction::poly(2.0).unwrap();
        let t = Term::new(vec![1, 2, 7], vec![1, 1, 1]).unwrap();
        assert_eq!(term_cost(&sq, &t, CostMode::Nss), 49.0);
        assert_eq!(term_cost(&sq, &t, CostMode::Unrestricted), 9.0);
        assert_eq!(term_cost(&sq, &Term::empty(), CostMode::Nss), 1.0);
        assert_eq!(term_cost(&sq, &Term::empty(), CostMode::Unrestricted), 1.0);
    }

    #[test]
    fn cost_function_guards() {
        assert!(CostFunction::poly(0.0).is_err());
        assert!(CostFunction::table(vec![]).is_err());
        assert!(CostFunction::table(vec![0.5]).is_err());
        assert!(CostFunction::table(vec![2.0, 1.0]).is_err());
        let t = CostFunction::table(vec![1.0, 1.0, 4.0]).unwrap();
        assert_eq!(t.eval(0), 1.0);
        assert_eq!(t.eval(2), 4.0);
        assert_eq!(t.eval(9), 4.0);
    }

    #[test]
    fn nss_dominates_unrestricted_per_term() {
        let lin = CostFunction::poly(1.0).unwrap();
        let terms = [
            Term::empty(),
            Term::new(vec![3], vec![5]).unwrap(),
            Term::new(vec![1, 4, 9], vec![2, 1, 7]).unwrap(),
        ];
        for t in &terms {
            assert!(term_cost(&lin, t, CostMode::Nss) >= term_cost(&lin, t, CostMode::Unrestricted));
        }
    }

    #[test]
    fn cost_ignores_eigen_indices() {
        let lin = CostFunction::poly(1.0).unwrap();
        let a = Term::new(vec![2, 5], vec![1, 1]).unwrap();
        let b = Term::new(vec![2, 5], vec![9, 3]).unwrap();
        for mode in [CostMode::Nss, CostMode::Unrestricted] {
            assert_eq!(term_cost(&lin, &a, mode), term_cost(&lin, &b, mode));
        }
    }

    #[test]
    fn worked_instance_cost() {
        let m = ProblemModel::new(
            DecreasingSequence::power(1.0, 2.0).unwrap(),
            DecreasingSequence::power(1.0, 2.0).unwrap(),
        )
        .unwrap();
        let aset = enumerate_active_set(&m, 0.1, &EnumerationOptions::default()).unwrap();
        let lin = CostFunction::poly(1.0).unwrap();
        assert_eq!(algorithm_cost(&aset, &lin, CostMode::Nss), 162.0);

        // Additivity over the level partition.
        let mut parts = 0.0;
        for (&lvl, &cnt) in aset.level_counts() {
            parts += cnt as f64 * lin.eval(lvl);
        }
        assert_eq!(parts, 162.0);

        // Per-term sum agrees with the grouped sum.
        let direct: f64 = aset
            .terms()
            .iter()
            .map(|t| term_cost(&lin, t, CostMode::Nss))
            .sum();
        assert_eq!(direct, 162.0);
    }

    #[test]
    fn two_term_instance_cost() {
        let m = ProblemModel::new(
            DecreasingSequence::geometric(1.0, 0.25).unwrap(),
            DecreasingSequence::power(1.0, 2.0).unwrap(),
        )
        .unwrap();
        let eps = crate::numeric::sqrt(0.1);
        let aset = enumerate_active_set(&m, eps, &EnumerationOptions::default()).unwrap();
        let lin = CostFunction::poly(1.0).unwrap();
        assert_eq!(algorithm_cost(&aset, &lin, CostMode::Nss), 2.0);
        // Empty enumeration costs nothing.
        let empty = enumerate_active_set(&m, 1.0, &EnumerationOptions::default()).unwrap();
        assert_eq!(algorithm_cost(&empty, &lin, CostMode::Nss), 0.0);
    }
}
