//! Counts stored as natural logarithms.
//!
//! Fiber sizes routinely exceed anything a machine integer or `f64` can hold
//! directly, so every count in this crate lives as `ln(count)` together with
//! an explicit zero flag.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Factorials up to this bound are formed by direct `f64` products; above it
/// the Stirling series takes over.
const DIRECT_FACTORIAL_MAX: u64 = 170;

/// Binomials whose smaller side is at most this size are summed term by term,
/// which avoids cancellation between large log-factorials.
const DIRECT_BINOMIAL_MAX: u64 = 64;

/// A nonnegative count represented by its natural logarithm.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LogCount {
    ln_value: f64,
    is_zero: bool,
}

impl LogCount {
    pub const ZERO: LogCount = LogCount {
        ln_value: 0.0,
        is_zero: true,
    };

    pub const ONE: LogCount = LogCount {
        ln_value: 0.0,
        is_zero: false,
    };

    /// Wraps an already-logged positive quantity.
    pub fn from_ln(ln_value: f64) -> Self {
        LogCount {
            ln_value,
            is_zero: false,
        }
    }

    /// `ln(value)`; zero maps to the zero state. Negative inputs are a bug.
    pub fn from_value(value: f64) -> Self {
        debug_assert!(value >= 0.0, "counts are nonnegative");
        if value == 0.0 {
            Self::ZERO
        } else {
            Self::from_ln(value.ln())
        }
    }

    pub fn from_u64(value: u64) -> Self {
        Self::from_value(value as f64)
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    /// Natural log of the count; `None` for a zero count.
    pub fn ln(&self) -> Option<f64> {
        (!self.is_zero).then_some(self.ln_value)
    }

    /// Natural log, with zero mapped to negative infinity for display.
    pub fn ln_or_neg_inf(&self) -> f64 {
        if self.is_zero {
            f64::NEG_INFINITY
        } else {
            self.ln_value
        }
    }

    pub fn log10(&self) -> Option<f64> {
        self.ln().map(|v| v / std::f64::consts::LN_10)
    }

    /// The count itself; overflows to infinity for large counts.
    pub fn value(&self) -> f64 {
        if self.is_zero {
            0.0
        } else {
            self.ln_value.exp()
        }
    }

    /// Quotient `self / other`. Dividing by zero is an error in the caller;
    /// here it yields `None`.
    pub fn checked_div(self, other: LogCount) -> Option<LogCount> {
        if other.is_zero {
            None
        } else if self.is_zero {
            Some(Self::ZERO)
        } else {
            Some(Self::from_ln(self.ln_value - other.ln_value))
        }
    }

    /// Mantissa/exponent rendering such as `1.26e16988`.
    pub fn scientific(&self) -> String {
        match self.log10() {
            None => "0".to_string(),
            Some(l10) => {
                let exp = l10.floor();
                let mantissa = 10f64.powf(l10 - exp);
                format!("{mantissa:.2}e{exp:.0}")
            }
        }
    }
}

impl PartialEq for LogCount {
    fn eq(&self, other: &Self) -> bool {
        match (self.is_zero, other.is_zero) {
            (true, true) => true,
            (false, false) => self.ln_value == other.ln_value,
            _ => false,
        }
    }
}

impl fmt::Display for LogCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ln() {
            None => write!(f, "0"),
            Some(v) => write!(f, "exp({v})"),
        }
    }
}

impl std::ops::Mul for LogCount {
    type Output = LogCount;
    fn mul(self, rhs: LogCount) -> LogCount {
        log_mul(self, rhs)
    }
}

impl std::iter::Product for LogCount {
    fn product<I: Iterator<Item = LogCount>>(iter: I) -> LogCount {
        iter.fold(LogCount::ONE, log_mul)
    }
}

pub fn log_mul(a: LogCount, b: LogCount) -> LogCount {
    if a.is_zero || b.is_zero {
        LogCount::ZERO
    } else {
        LogCount::from_ln(a.ln_value + b.ln_value)
    }
}

/// `ln(exp(a) + exp(b))` on counts.
pub fn log_add(a: LogCount, b: LogCount) -> LogCount {
    match (a.ln(), b.ln()) {
        (None, _) => b,
        (_, None) => a,
        (Some(x), Some(y)) => {
            let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
            LogCount::from_ln(hi + (lo - hi).exp().ln_1p())
        }
    }
}

/// `ln(n!)`.
pub fn log_factorial(n: u64) -> LogCount {
    LogCount::from_ln(ln_factorial(n))
}

pub(crate) fn ln_factorial(n: u64) -> f64 {
    if n <= DIRECT_FACTORIAL_MAX {
        FACTORIAL_TABLE.with(|t| t[n as usize])
    } else {
        stirling_ln_factorial(n)
    }
}

thread_local! {
    static FACTORIAL_TABLE: [f64; DIRECT_FACTORIAL_MAX as usize + 1] = {
        let mut table = [0.0; DIRECT_FACTORIAL_MAX as usize + 1];
        let mut product = 1.0f64;
        for (k, slot) in table.iter_mut().enumerate().skip(1) {
            product *= k as f64;
            *slot = product.ln();
        }
        table
    };
}

/// `ln Γ(n+1)` via the Stirling series; five correction terms leave a
/// truncation error far below `f64` resolution for `n > 170`.
fn stirling_ln_factorial(n: u64) -> f64 {
    let x = (n + 1) as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// `ln C(n, k)`; zero outside `0 <= k <= n`.
pub fn log_binomial(n: u64, k: i64) -> LogCount {
    if k < 0 || k as u64 > n {
        return LogCount::ZERO;
    }
    LogCount::from_ln(ln_binomial(n, k as u64))
}

/// `ln C(n, k)` for `k <= n`.
pub(crate) fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    if k <= DIRECT_BINOMIAL_MAX {
        // ln prod_{i<k} (n-i)/(i+1), grouped to limit rounding.
        let mut acc = 0.0;
        let mut chunk = 1.0f64;
        for i in 0..k {
            chunk *= (n - i) as f64 / (i + 1) as f64;
            if !(1e-200..=1e200).contains(&chunk) {
                acc += chunk.ln();
                chunk = 1.0;
            }
        }
        acc + chunk.ln()
    } else {
        ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
    }
}

/// `C(n, 2)` as an integer.
pub fn choose2(n: u64) -> u64 {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2
    }
}
