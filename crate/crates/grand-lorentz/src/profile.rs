//! One-dimensional non-increasing profiles on `(0, 1]`.
//!
//! Separable rearrangements are products of two such profiles, and the 1-D
//! grand Lebesgue norms consume one directly. Step profiles carry their
//! breakpoints so integrals and suprema can treat each piece exactly; the
//! power-log profile `t^{-a} |ln t|^g` covers the analytic families.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::{exponential_tail, loglinear_segment, lse_pair, LogSum};
use crate::quadrature::LogGrid;

/// A non-increasing profile on `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AxisProfile {
    /// Constant value `c >= 0`.
    Constant(f64),
    /// Piecewise constant: `levels[i]` on `(breaks[i-1], breaks[i]]` with
    /// `breaks[0] > 0`, `breaks` strictly increasing, and the last break at 1.
    /// Levels must be non-increasing.
    Steps { breaks: Vec<f64>, levels: Vec<f64> },
    /// `exp(t_exp * u) * max(u, u_clamp)^(log_exp)` with `u = -ln t`.
    ///
    /// For `log_exp < 0` the raw factor `u^(log_exp)` blows up at `t = 1`,
    /// so the logarithm is frozen at its stationary point
    /// `u_clamp = -log_exp / t_exp`, below which the profile follows the
    /// pure power `t^(-t_exp)` times a constant. For `t <= exp(-u_clamp)`
    /// the profile agrees with the unclamped formula.
    PowerLog {
        t_exp: f64,
        log_exp: f64,
        u_clamp: f64,
    },
}

impl AxisProfile {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::NegativeValue {
                row: 0,
                col: 0,
                value: c,
            });
        }
        Ok(Self::Constant(c))
    }

    /// Indicator of `(0, edge]`.
    pub fn indicator(edge: f64) -> Result<Self> {
        if !(edge > 0.0 && edge <= 1.0) {
            return Err(Error::OutOfDomain(edge, edge));
        }
        if edge == 1.0 {
            return Self::constant(1.0);
        }
        Self::steps(vec![edge, 1.0], vec![1.0, 0.0])
    }

    pub fn steps(breaks: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if breaks.is_empty() || breaks.len() != levels.len() {
            return Err(Error::Csv("steps need matching breaks and levels".into()));
        }
        let mut prev = 0.0;
        for &b in &breaks {
            if !(b > prev && b <= 1.0) {
                return Err(Error::OutOfDomain(b, b));
            }
            prev = b;
        }
        if (breaks.last().unwrap() - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfDomain(*breaks.last().unwrap(), 1.0));
        }
        for (i, w) in levels.windows(2).enumerate() {
            if w[1] > w[0] {
                return Err(Error::NonMonotone(breaks[i]));
            }
        }
        for (i, &v) in levels.iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::NegativeValue {
                    row: 0,
                    col: i,
                    value: v,
                });
            }
        }
        Ok(Self::Steps { breaks, levels })
    }

    /// `t^(-t_exp) * |ln t|^(log_exp)`, clamped near `t = 1` when needed.
    pub fn power_log(t_exp: f64, log_exp: f64) -> Result<Self> {
        if !(t_exp >= 0.0 && t_exp.is_finite() && log_exp.is_finite()) {
            return Err(Error::NonPositiveExponent(t_exp));
        }
        let u_clamp = if log_exp < 0.0 {
            if t_exp == 0.0 {
                // strictly decreasing in u everywhere: not a rearrangement
                return Err(Error::NonMonotone(1.0));
            }
            -log_exp / t_exp
        } else {
            0.0
        };
        Ok(Self::PowerLog {
            t_exp,
            log_exp,
            u_clamp,
        })
    }

    /// Value at `t in (0, 1]`.
    pub fn value(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::OutOfDomain(t, t));
        }
        // piecewise levels are returned as stored, with no ln/exp round trip
        Ok(match self {
            Self::Constant(c) => *c,
            Self::Steps { breaks, levels } => {
                let idx = breaks.partition_point(|&b| b < t);
                levels[idx.min(levels.len() - 1)]
            }
            Self::PowerLog { .. } => self.ln_value_unchecked(t).exp(),
        })
    }

    pub(crate) fn ln_value_unchecked(&self, t: f64) -> f64 {
        match self {
            Self::Constant(c) => c.ln(),
            Self::Steps { breaks, levels } => {
                let idx = breaks.partition_point(|&b| b < t);
                let idx = idx.min(levels.len() - 1);
                levels[idx].ln()
            }
            Self::PowerLog {
                t_exp,
                log_exp,
                u_clamp,
            } => {
                let u = -t.ln();
                if *log_exp == 0.0 {
                    // avoid 0 * ln(0) at t = 1
                    t_exp * u
                } else {
                    t_exp * u + log_exp * u.max(*u_clamp).ln()
                }
            }
        }
    }

    /// Pieces as `(t_lo, t_hi, level)` covering `(0, 1]`, ascending in `t`,
    /// for the piecewise-constant variants. `None` for smooth profiles.
    pub(crate) fn pieces(&self) -> Option<Vec<(f64, f64, f64)>> {
        match self {
            Self::Constant(c) => Some(vec![(0.0, 1.0, *c)]),
            Self::Steps { breaks, levels } => {
                let mut out = Vec::with_capacity(levels.len());
                let mut lo = 0.0;
                for (b, v) in breaks.iter().zip(levels) {
                    out.push((lo, *b, *v));
                    lo = *b;
                }
                Some(out)
            }
            Self::PowerLog { .. } => None,
        }
    }

    /// Sampled monotonicity check: non-increasing in `t` on a log-spaced set.
    pub fn is_non_increasing(&self, samples: usize) -> bool {
        let n = samples.max(16);
        let u_max = 60.0 * std::f64::consts::LN_2;
        let mut prev = f64::NEG_INFINITY;
        // ascending u = descending t; values must be non-decreasing in u
        for k in 0..n {
            let u = u_max * k as f64 / (n - 1) as f64;
            let v = self.ln_value_unchecked((-u).exp());
            if v < prev - 1e-9 * prev.abs().max(1.0) {
                return false;
            }
            prev = v;
        }
        true
    }

    pub(crate) fn scaled_max(&self) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Steps { levels, .. } => levels[0],
            Self::PowerLog { .. } => f64::INFINITY,
        }
    }
}

/// Per-axis weight `t^(t_exp) * |ln t|^(log_exp)` applied inside a norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct AxisWeight {
    pub t_exp: f64,
    pub log_exp: f64,
}

impl AxisWeight {
    pub fn power(t_exp: f64) -> Self {
        Self {
            t_exp,
            log_exp: 0.0,
        }
    }

    pub fn ln_at_u(&self, u: f64) -> f64 {
        if self.log_exp == 0.0 {
            -self.t_exp * u
        } else {
            -self.t_exp * u + self.log_exp * u.ln()
        }
    }
}

/// Outcome of a one-axis weighted integral in log space.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AxisIntegral {
    /// `ln` of the computed integral; `+inf` when it diverges exactly.
    pub ln_value: f64,
    /// Share of the value carried at or beyond the `t_min` cutoff.
    pub tail_frac: f64,
    /// Whether the sub-`t_min` mass is included exactly in `ln_value`.
    pub tail_exact: bool,
    /// True when a non-integrable singularity at `t = 1` was cut off.
    pub head_truncated: bool,
}

/// `ln` of `∫ e^(-a u) u^b du` over `[u_a, u_b]`, `u_b` possibly infinite.
///
/// Exact for `b = 0`. For `b != 0` the interval is subdivided at roughly the
/// grid spacing `du` and each subinterval is integrated by the log-linear
/// rule; the portion beyond `u_cut` is left out and returned separately as
/// an estimate. A head singularity (`u_a = 0`, `b <= -1`) is truncated at
/// the first subdivision point.
pub(crate) fn power_log_interval_ln(
    a: f64,
    b: f64,
    u_a: f64,
    u_b: f64,
    du: f64,
    u_cut: f64,
) -> AxisIntegral {
    if b == 0.0 {
        let (ln_value, tail_ln) = if u_b.is_infinite() {
            if a <= 0.0 {
                (f64::INFINITY, f64::NEG_INFINITY)
            } else {
                // split at the cutoff so the sub-cutoff share can be reported
                let split = u_cut.max(u_a);
                let tail = exponential_tail(-a * split, a);
                if u_a >= u_cut {
                    (tail, tail)
                } else {
                    let head = loglinear_segment(u_a, -a * u_a, split, -a * split);
                    (lse_pair(head, tail), tail)
                }
            }
        } else {
            (
                loglinear_segment(u_a, -a * u_a, u_b, -a * u_b),
                f64::NEG_INFINITY,
            )
        };
        let tail_frac = if ln_value.is_finite() {
            (tail_ln - ln_value).exp()
        } else {
            0.0
        };
        return AxisIntegral {
            ln_value,
            tail_frac,
            tail_exact: true,
            head_truncated: false,
        };
    }

    // numeric path for b != 0
    let hi = if u_b.is_infinite() { u_cut } else { u_b.min(u_cut) };
    let mut head_truncated = false;
    let mut acc = LogSum::new();
    let mut last_pair: Option<((f64, f64), (f64, f64))> = None;
    let mut lo = u_a;
    if u_a == 0.0 {
        let first = du.min(hi);
        if b <= -1.0 {
            head_truncated = true;
        } else {
            // ∫_0^w u^b e^(-au) du ~ w^(b+1)/(b+1) e^(-aw): exact for the
            // pure power, first order in a*w otherwise
            acc.add_ln(-a * first + (b + 1.0) * first.ln() - (b + 1.0).ln());
        }
        lo = first;
    }
    if hi > lo {
        let n_seg = ((hi - lo) / du).ceil().max(1.0) as usize;
        let step = (hi - lo) / n_seg as f64;
        let ln_h = |u: f64| -a * u + b * u.ln();
        let mut u_prev = lo;
        let mut l_prev = ln_h(lo);
        for k in 1..=n_seg {
            let u = lo + step * k as f64;
            let l = ln_h(u);
            acc.add_ln(loglinear_segment(u_prev, l_prev, u, l));
            last_pair = Some(((u_prev, l_prev), (u, l)));
            u_prev = u;
            l_prev = l;
        }
    }
    let ln_value = acc.ln_total();
    let beyond = u_b.is_infinite() || u_b > u_cut;
    let tail_frac = if beyond && ln_value > f64::NEG_INFINITY {
        (tail_extrapolation_ln(last_pair) - ln_value).exp().min(1.0)
    } else {
        0.0
    };
    AxisIntegral {
        ln_value,
        tail_frac,
        tail_exact: !beyond,
        head_truncated,
    }
}

/// Beyond-cutoff mass estimated by extending the final segment's
/// exponential decay; a non-decaying end slope means the unseen tail
/// dominates and the share saturates at one.
fn tail_extrapolation_ln(last: Option<((f64, f64), (f64, f64))>) -> f64 {
    let Some(((u0, l0), (u1, l1))) = last else {
        return f64::NEG_INFINITY;
    };
    if l1 == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if l0 == f64::NEG_INFINITY {
        return l1; // no slope information; assume one more segment's worth
    }
    let slope = (l1 - l0) / (u1 - u0);
    if slope >= 0.0 {
        f64::INFINITY
    } else {
        l1 - (-slope).ln()
    }
}

/// `ln` of `∫ (weight(t) * profile(t))^q dt/t` over `(0, t_max]`, the
/// sub-`t_min` mass handled analytically where the integrand is a pure
/// power.
///
/// Piecewise-constant profiles are integrated piece by piece — exactly when
/// the weight has no logarithmic factor — while smooth profiles go through
/// the log-linear composite rule on the grid nodes.
pub(crate) fn axis_integral(
    profile: &AxisProfile,
    weight: AxisWeight,
    q: f64,
    grid: &LogGrid,
) -> AxisIntegral {
    axis_integral_mode(profile, weight, q, grid, true)
}

/// As [`axis_integral`], but with `extend_tail = false` the domain is hard
/// truncated at `t_min` — used for integrals whose lower limit is a genuine
/// parameter rather than a numerical cutoff.
pub(crate) fn axis_integral_mode(
    profile: &AxisProfile,
    weight: AxisWeight,
    q: f64,
    grid: &LogGrid,
    extend_tail: bool,
) -> AxisIntegral {
    let (u_min, u_max) = grid.u_range();
    let du = grid.u_step();
    let a = q * weight.t_exp;
    let b = q * weight.log_exp;

    if let Some(pieces) = profile.pieces() {
        let mut acc = LogSum::new();
        let mut tail_frac_num = f64::NEG_INFINITY;
        let mut tail_exact = true;
        let mut head_truncated = false;
        for (t_lo, t_hi, level) in pieces {
            if level == 0.0 {
                continue;
            }
            // piece in u: [(-ln t_hi), (-ln t_lo)) clipped to the window
            let ua = (-t_hi.ln()).max(u_min);
            let mut ub = if t_lo == 0.0 { f64::INFINITY } else { -t_lo.ln() };
            if !extend_tail {
                ub = ub.min(u_max);
            }
            if ub <= ua {
                continue;
            }
            let part = power_log_interval_ln(a, b, ua, ub, du, u_max);
            let ln_piece = q * level.ln() + part.ln_value;
            if ln_piece == f64::INFINITY {
                return AxisIntegral {
                    ln_value: f64::INFINITY,
                    tail_frac: 1.0,
                    tail_exact: false,
                    head_truncated,
                };
            }
            acc.add_ln(ln_piece);
            if part.tail_frac > 0.0 {
                tail_frac_num =
                    lse_pair(tail_frac_num, part.ln_value + part.tail_frac.ln() + q * level.ln());
                tail_exact &= part.tail_exact;
            }
            head_truncated |= part.head_truncated;
        }
        let ln_value = acc.ln_total();
        let tail_frac = if ln_value.is_finite() && extend_tail {
            (tail_frac_num - ln_value).exp()
        } else {
            0.0
        };
        return AxisIntegral {
            ln_value,
            tail_frac,
            tail_exact: tail_exact || !extend_tail,
            head_truncated,
        };
    }

    // smooth profile: composite log-linear rule over the grid nodes plus the
    // profile's kink, if any
    let mut nodes = grid.u_nodes();
    if let AxisProfile::PowerLog { u_clamp, .. } = profile {
        if *u_clamp > u_min && *u_clamp < u_max {
            nodes.push(*u_clamp);
            nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
        }
    }
    // effective log-exponent at u -> 0: the profile's own log factor counts
    // only when it is not frozen there by the clamp
    let b_head = match profile {
        AxisProfile::PowerLog {
            log_exp, u_clamp, ..
        } if *u_clamp == 0.0 => b + q * log_exp,
        _ => b,
    };
    let ln_h = |u: f64| -> f64 {
        let t = (-u).exp();
        q * (weight.ln_at_u(u) + profile.ln_value_unchecked(t))
    };
    let mut acc = LogSum::new();
    let mut head_truncated = false;
    let mut last_pair: Option<((f64, f64), (f64, f64))> = None;
    let mut start = 0;
    if u_min == 0.0 && b_head != 0.0 {
        start = 1;
        let u1 = nodes[1];
        if b_head <= -1.0 {
            // non-integrable at t = 1: cut the first subinterval off
            head_truncated = true;
        } else {
            // u^{b_head} profile near 0: h(u1) u1 / (b_head + 1) closes the
            // head exactly for the pure power shape
            acc.add_ln(ln_h(u1) + u1.ln() - (b_head + 1.0).ln());
        }
    }
    let mut prev: Option<(f64, f64)> = None;
    for &u in &nodes[start..] {
        let l = ln_h(u.max(f64::MIN_POSITIVE));
        if let Some((u0, l0)) = prev {
            if u > u0 {
                acc.add_ln(loglinear_segment(u0, l0, u, l));
                last_pair = Some(((u0, l0), (u, l)));
            }
        }
        prev = Some((u, l));
    }
    let ln_value = acc.ln_total();
    let tail_frac = if ln_value.is_finite() && extend_tail {
        (tail_extrapolation_ln(last_pair) - ln_value).exp().min(1.0)
    } else {
        0.0
    };
    AxisIntegral {
        ln_value,
        tail_frac,
        tail_exact: !extend_tail,
        head_truncated,
    }
}

/// `ln` of `sup_t weight(t) * profile(t)` over the grid's `t` range together
/// with the attaining `t`.
///
/// The weights used by the weak norms are non-increasing in `u`, so on a
/// constant piece the supremum sits at the piece's right edge in `t`; smooth
/// profiles are scanned on the grid nodes.
pub(crate) fn axis_weighted_sup(
    profile: &AxisProfile,
    ln_weight: impl Fn(f64) -> f64,
    grid: &LogGrid,
) -> (f64, f64) {
    let (u_min, u_max) = grid.u_range();
    let mut best = (f64::NEG_INFINITY, 1.0);
    let mut consider = |u: f64, ln_profile: f64| {
        if ln_profile == f64::NEG_INFINITY {
            return;
        }
        let v = ln_profile + ln_weight(u);
        if v > best.0 {
            best = (v, (-u).exp());
        }
    };
    if let Some(pieces) = profile.pieces() {
        for (_, t_hi, level) in pieces {
            if level == 0.0 {
                continue;
            }
            let ua = (-t_hi.ln()).max(u_min);
            if ua > u_max {
                continue;
            }
            consider(ua, level.ln());
        }
        // deepest visible point, in case the weight grows with u
        consider(u_max, profile.ln_value_unchecked((-u_max).exp()));
    } else {
        let mut nodes = grid.u_nodes();
        if let AxisProfile::PowerLog { u_clamp, .. } = profile {
            if *u_clamp > u_min && *u_clamp < u_max {
                nodes.push(*u_clamp);
            }
        }
        for u in nodes {
            consider(u, profile.ln_value_unchecked((-u).exp()));
        }
    }
    best
}
