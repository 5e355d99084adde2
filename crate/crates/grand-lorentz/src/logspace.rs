//! Log-space accumulation primitives.
//!
//! Weighted integrands like `t^(1/p + eps)` span hundreds of orders of
//! magnitude once `t` reaches `2^-40`, so every sum and power in this crate
//! is carried as a natural logarithm and exponentiated once at the end.

/// `ln(exp(a) + exp(b))` without overflow; `-inf` acts as the additive zero.
#[inline]
pub(crate) fn lse_pair(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Running log-space sum.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSum {
    total: f64,
}

impl LogSum {
    pub fn new() -> Self {
        Self {
            total: f64::NEG_INFINITY,
        }
    }

    pub fn add_ln(&mut self, ln_term: f64) {
        self.total = lse_pair(self.total, ln_term);
    }

    pub fn ln_total(&self) -> f64 {
        self.total
    }
}

/// `ln` of the integral over `[u0, u1]` of the exponential of the chord
/// through `(u0, l0)` and `(u1, l1)`.
///
/// Exact for integrands of the form `C * exp(-c u)`, i.e. pure powers of
/// `t = exp(-u)`, which is what every weight in this crate reduces to on an
/// interval where the profile factor is constant. Falls back to an ordinary
/// trapezoid when one endpoint is zero.
pub(crate) fn loglinear_segment(u0: f64, l0: f64, u1: f64, l1: f64) -> f64 {
    debug_assert!(u1 > u0);
    let d = u1 - u0;
    match (l0 == f64::NEG_INFINITY, l1 == f64::NEG_INFINITY) {
        (true, true) => f64::NEG_INFINITY,
        (true, false) | (false, true) => {
            // one-sided zero: arithmetic trapezoid (h0 + h1) / 2 * d
            lse_pair(l0, l1) - std::f64::consts::LN_2 + d.ln()
        }
        (false, false) => {
            let s = (l1 - l0) / d;
            if s == 0.0 {
                l0 + d.ln()
            } else {
                // exp(max) (1 - exp(-|s| d)) / |s|, safe for any magnitude
                let x = s.abs() * d;
                l0.max(l1) + (-(-x).exp_m1()).ln() - s.abs().ln()
            }
        }
    }
}

/// `ln` of `integral_{u0}^{inf} exp(l0 - c (u - u0)) du = exp(l0) / c`.
///
/// The analytic tail of a pure power segment reaching `t = 0`. Divergent
/// (`+inf`) when `c <= 0`.
pub(crate) fn exponential_tail(l0: f64, c: f64) -> f64 {
    if l0 == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if c <= 0.0 {
        f64::INFINITY
    } else {
        l0 - c.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_matches_naive_in_safe_range() {
        let v = lse_pair(1.0, 2.5);
        assert!((v - (1.0f64.exp() + 2.5f64.exp()).ln()).abs() < 1e-12);
        assert_eq!(lse_pair(f64::NEG_INFINITY, 3.0), 3.0);
        assert_eq!(
            lse_pair(f64::NEG_INFINITY, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn lse_survives_large_magnitudes() {
        let v = lse_pair(1234.0, 1232.0);
        assert!((v - (1234.0 + (-2.0f64).exp().ln_1p())).abs() < 1e-12);
    }

    #[test]
    fn segment_exact_for_pure_exponential() {
        // integral of exp(-3u) over [0.2, 1.7]
        let h = |u: f64| (-3.0 * u).exp();
        let exact = (h(0.2) - h(1.7)) / 3.0;
        let got = loglinear_segment(0.2, h(0.2).ln(), 1.7, h(1.7).ln()).exp();
        assert!((got - exact).abs() < 1e-14 * exact);
    }

    #[test]
    fn segment_constant_integrand() {
        let got = loglinear_segment(1.0, 0.0, 3.0, 0.0).exp();
        assert!((got - 2.0).abs() < 1e-14);
    }

    #[test]
    fn segment_zero_endpoints() {
        assert_eq!(
            loglinear_segment(0.0, f64::NEG_INFINITY, 1.0, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
        // one zero endpoint: trapezoid of (0 + e)/2 over unit width
        let got = loglinear_segment(0.0, f64::NEG_INFINITY, 1.0, 1.0).exp();
        assert!((got - 1.0f64.exp() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn tail_of_power_segment() {
        // integral over [2, inf) of exp(-0.5 u): exact 2 exp(-1)
        let got = exponential_tail(-0.5f64 * 2.0, 0.5).exp();
        assert!((got - 2.0 * (-1.0f64).exp()).abs() < 1e-14);
        assert_eq!(exponential_tail(0.0, 0.0), f64::INFINITY);
    }
}
