//! Exact binomial probabilities, convolution tails, and classical
//! Chernoff-type deviation bounds.
//!
//! The activation threshold `r` is small, so every quantity we need reduces
//! to a handful of point masses plus single-binomial tails. Point masses are
//! seeded in log space and extended by the multiplicative recurrence
//! `pmf(k+1) = pmf(k) * (n-k)/(k+1) * p/(1-p)`, which keeps the sums stable
//! for n up to 1e7 and p down to 1e-7. Small upper tails are summed directly
//! (never as `1 - lower`) so values near zero keep full relative precision.

use crate::error::{Error, Result};

/// ln C(n, k). O(min(k, n-k)) term summation; exact enough for the k ranges
/// used here (k below a few thousand).
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    let mut acc = 0.0f64;
    for i in 0..k {
        acc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    acc
}

/// ln P(Bin(n, p) = k).
pub fn ln_binom_pmf(n: u64, p: f64, k: u64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    if k > n {
        return f64::NEG_INFINITY;
    }
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()
}

/// P(Bin(n, p) = k).
pub fn binom_pmf(n: u64, p: f64, k: u64) -> f64 {
    ln_binom_pmf(n, p, k).exp()
}

/// P(Bin(n, p) >= k), computed to full relative precision on both flanks.
pub fn binom_upper_tail(n: u64, p: f64, k: u64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    let mean = n as f64 * p;
    let ratio_step = p / (1.0 - p);
    if (k as f64) <= mean {
        // Tail is order one; the complementary sum below the mean is the
        // small side and loses nothing.
        let mut term = binom_pmf(n, p, 0);
        let mut acc = term;
        for j in 0..k - 1 {
            term *= (n - j) as f64 / (j + 1) as f64 * ratio_step;
            acc += term;
        }
        (1.0 - acc).max(0.0)
    } else {
        // Mean below k: sum the tail itself; terms decay geometrically.
        let mut term = binom_pmf(n, p, k);
        let mut acc = term;
        let mut j = k;
        while j < n {
            term *= (n - j) as f64 / (j + 1) as f64 * ratio_step;
            acc += term;
            j += 1;
            if term <= acc * 1e-18 {
                break;
            }
        }
        acc.min(1.0)
    }
}

/// P(Bin(n, p) <= k).
pub fn binom_lower_tail(n: u64, p: f64, k: u64) -> f64 {
    if k >= n {
        return 1.0;
    }
    let mean = n as f64 * p;
    if (k as f64) >= mean {
        (1.0 - binom_upper_tail(n, p, k + 1)).max(0.0)
    } else {
        let mut term = binom_pmf(n, p, 0);
        let mut acc = term;
        let ratio_step = p / (1.0 - p);
        for j in 0..k {
            term *= (n - j) as f64 / (j + 1) as f64 * ratio_step;
            acc += term;
        }
        acc.min(1.0)
    }
}

/// P(Bin(n1, p1) + Bin(n2, p2) >= r) for independent summands.
///
/// Partitioned on the first summand: `sum_{h<r} pmf1(h) * P(X2 >= r-h) +
/// P(X1 >= r)`. With r small this is r+1 stable terms.
pub fn convolution_upper_tail(n1: u64, p1: f64, n2: u64, p2: f64, r: u32) -> f64 {
    let r = r as u64;
    if r == 0 {
        return 1.0;
    }
    let mut acc = binom_upper_tail(n1, p1, r);
    for h in 0..r {
        let w = binom_pmf(n1, p1, h);
        if w > 0.0 {
            acc += w * binom_upper_tail(n2, p2, r - h);
        }
    }
    acc.min(1.0)
}

/// Rate function `H(x) = 1 - x + x ln x` with `H(0) = 1`.
pub fn rate_h(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        1.0 - x + x * x.ln()
    }
}

/// Which deviation inequality to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailDirection {
    /// P(Bin >= k) <= exp(-mu H(k/mu)), valid for k >= mu.
    Upper,
    /// P(Bin <= k) <= exp(-mu H(k/mu)), valid for k <= mu.
    Lower,
    /// P(Bin >= k) <= exp(-(k/2) ln(k/mu)), valid for k >= e^2 mu.
    UpperFar,
}

impl TailDirection {
    pub fn name(self) -> &'static str {
        match self {
            TailDirection::Upper => "upper",
            TailDirection::Lower => "lower",
            TailDirection::UpperFar => "upper-far",
        }
    }
}

/// Exponential bound on a binomial tail with mean `mu = m q`.
///
/// Requires `0 < k < m` and `q` in (0, 1); rejects directions inconsistent
/// with the position of `k` relative to the mean.
pub fn binomial_tail_bound(m: u64, q: f64, k: f64, direction: TailDirection) -> Result<f64> {
    if m == 0 || !(0.0 < q && q < 1.0) || !k.is_finite() || k <= 0.0 || k >= m as f64 {
        return Err(Error::Domain(format!(
            "tail bound needs 0 < k < m and q in (0,1); got m = {m}, q = {q}, k = {k}"
        )));
    }
    let mu = m as f64 * q;
    let consistent = match direction {
        TailDirection::Upper => k >= mu,
        TailDirection::Lower => k <= mu,
        TailDirection::UpperFar => k >= std::f64::consts::E.powi(2) * mu,
    };
    if !consistent {
        return Err(Error::BoundDirection {
            direction: direction.name(),
            k,
            mean: mu,
        });
    }
    let bound = match direction {
        TailDirection::Upper | TailDirection::Lower => (-mu * rate_h(k / mu)).exp(),
        TailDirection::UpperFar => (-(k / 2.0) * (k / mu).ln()).exp(),
    };
    Ok(bound)
}
