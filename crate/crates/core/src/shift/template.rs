use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed-form integer sequence `k -> c * k^a * b^k`, the only growth
/// family schedules may use. Restricting to this family keeps every
/// asymptotic ratio below decidable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub coeff: u64,
    pub poly: u32,
    pub base: u64,
}

impl Template {
    pub fn constant(c: u64) -> Self {
        Template {
            coeff: c,
            poly: 0,
            base: 1,
        }
    }

    pub fn new(coeff: u64, poly: u32, base: u64) -> Result<Self> {
        if coeff == 0 || base == 0 {
            return Err(Error::Invalid(
                "template needs coeff >= 1, base >= 1".into(),
            ));
        }
        Ok(Template { coeff, poly, base })
    }

    /// Value at round `k` (1-based). Saturates on overflow far beyond any
    /// materializable horizon.
    pub fn eval(&self, k: u64) -> u128 {
        let kp = (0..self.poly)
            .try_fold(1u128, |acc, _| acc.checked_mul(k as u128))
            .unwrap_or(u128::MAX);
        let bk = (0..k)
            .try_fold(1u128, |acc, _| acc.checked_mul(self.base as u128))
            .unwrap_or(u128::MAX);
        (self.coeff as u128)
            .checked_mul(kp)
            .and_then(|v| v.checked_mul(bk))
            .unwrap_or(u128::MAX)
    }

    /// Product of two templates, the growth of per-round totals.
    pub fn product(&self, other: &Template) -> Template {
        Template {
            coeff: self.coeff.saturating_mul(other.coeff),
            poly: self.poly + other.poly,
            base: self.base.saturating_mul(other.base),
        }
    }

    /// Growth grade for limit comparison: base first, then polynomial degree.
    fn grade(&self) -> (u64, u32) {
        (self.base, self.poly)
    }

    /// Limit of `self(k) / sum_{j<k} other(j)` as `k -> inf`.
    pub fn ratio_to_partial_sums(&self, other: &Template) -> RatioLimit {
        // Partial sums of c k^a b^k grow like c k^a b^k / (b-1) when b > 1
        // and like c k^(a+1) / (a+1) when b = 1.
        let (sum_base, sum_poly, sum_coeff) = if other.base > 1 {
            (
                other.base,
                other.poly,
                other.coeff as f64 / (other.base as f64 - 1.0),
            )
        } else {
            (
                1,
                other.poly + 1,
                other.coeff as f64 / (other.poly as f64 + 1.0),
            )
        };
        let (nb, na) = self.grade();
        match (nb.cmp(&sum_base), na.cmp(&sum_poly)) {
            (std::cmp::Ordering::Less, _) => RatioLimit::Zero,
            (std::cmp::Ordering::Greater, _) => RatioLimit::Infinite,
            (std::cmp::Ordering::Equal, std::cmp::Ordering::Less) => RatioLimit::Zero,
            (std::cmp::Ordering::Equal, std::cmp::Ordering::Greater) => RatioLimit::Infinite,
            (std::cmp::Ordering::Equal, std::cmp::Ordering::Equal) => {
                RatioLimit::Finite(self.coeff as f64 / sum_coeff)
            }
        }
    }
}

/// Limit classification of template ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioLimit {
    Zero,
    Finite(f64),
    Infinite,
}

impl RatioLimit {
    pub fn is_zero(&self) -> bool {
        matches!(self, RatioLimit::Zero)
    }

    /// Lower bound on the limit, with infinity mapped to `f64::INFINITY`.
    pub fn lower_bound(&self) -> f64 {
        match self {
            RatioLimit::Zero => 0.0,
            RatioLimit::Finite(v) => *v,
            RatioLimit::Infinite => f64::INFINITY,
        }
    }
}
