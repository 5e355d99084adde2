//! Nested integrals against the multiplicative measure `dt/t` and their
//! dyadic-sum counterparts.
//!
//! The substitution `t = exp(-u)` turns `dt/t` into `du` on a uniform grid,
//! so all rules below work on equally spaced `u` nodes. The `Trapezoid` rule
//! interpolates the *logarithm* of the integrand linearly between nodes and
//! integrates the resulting exponential exactly; it therefore reproduces
//! pure power integrands `t^c` to machine precision at any resolution.
//! `Midpoint` is an ordinary midpoint rule kept for cross-checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::{loglinear_segment, LogSum};
use crate::params::ParamPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuadratureRule {
    Trapezoid,
    Midpoint,
}

/// Log-spaced evaluation grid on `(t_min, t_max]`.
///
/// Nodes are `t_k = exp(-u_k)` with `u_k` uniform on `[-ln t_max, -ln t_min]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub nodes: usize,
    pub rule: QuadratureRule,
}

/// Default truncation depth: `t_min = 2^-40`.
pub const DEFAULT_T_MIN: f64 = 1.0 / (1u64 << 40) as f64;
/// Default node count per axis.
pub const DEFAULT_NODES: usize = 4096;
/// Default relative tolerance for refinement convergence.
pub const DEFAULT_REL_TOL: f64 = 1e-4;

impl LogGrid {
    pub fn new(t_min: f64, nodes: usize) -> Result<Self> {
        Self::with_cap(t_min, 1.0, nodes)
    }

    pub fn with_cap(t_min: f64, t_max: f64, nodes: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_min < 1.0) {
            return Err(Error::InvalidGrid(format!(
                "t_min must lie in (0,1), got {t_min}"
            )));
        }
        if !(t_max > t_min && t_max <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "t_max must lie in (t_min, 1], got {t_max}"
            )));
        }
        if nodes < 16 {
            return Err(Error::InvalidGrid(format!(
                "need at least 16 nodes, got {nodes}"
            )));
        }
        Ok(Self {
            t_min,
            t_max,
            nodes,
            rule: QuadratureRule::Trapezoid,
        })
    }

    pub fn with_rule(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    /// `u` runs over `[-ln t_max, -ln t_min]`.
    pub fn u_range(&self) -> (f64, f64) {
        (-self.t_max.ln(), -self.t_min.ln())
    }

    pub fn u_step(&self) -> f64 {
        let (u_lo, u_hi) = self.u_range();
        (u_hi - u_lo) / (self.nodes - 1) as f64
    }

    /// Uniform `u` nodes, ascending (so `t` descending from `t_max` to `t_min`).
    pub fn u_nodes(&self) -> Vec<f64> {
        let (u_lo, _) = self.u_range();
        let du = self.u_step();
        (0..self.nodes).map(|k| u_lo + du * k as f64).collect()
    }

    /// One refinement level: double the node count and square `t_min`,
    /// deepening the truncation while keeping the node spacing.
    pub fn refined(&self) -> Self {
        let t_min = (self.t_min * self.t_min).max(f64::MIN_POSITIVE * 1e4);
        Self {
            t_min,
            t_max: self.t_max,
            nodes: self.nodes * 2,
            rule: self.rule,
        }
    }
}

impl Default for LogGrid {
    fn default() -> Self {
        Self {
            t_min: DEFAULT_T_MIN,
            t_max: 1.0,
            nodes: DEFAULT_NODES,
            rule: QuadratureRule::Trapezoid,
        }
    }
}

/// Truncation depth for dyadic sums: indices run over `m in {-depth, ..., 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DyadicTruncation {
    pub depth: u32,
}

impl DyadicTruncation {
    pub fn new(depth: u32) -> Result<Self> {
        if depth < 8 {
            return Err(Error::InvalidGrid(format!(
                "dyadic truncation depth must be >= 8, got {depth}"
            )));
        }
        Ok(Self { depth })
    }
}

impl Default for DyadicTruncation {
    fn default() -> Self {
        Self { depth: 60 }
    }
}

fn ln_checked(g: &impl Fn(f64, f64) -> f64, t1: f64, t2: f64) -> Result<f64> {
    let v = g(t1, t2);
    if v.is_nan() || v.is_infinite() || v < 0.0 {
        return Err(Error::NonFiniteIntegrand(t1, t2));
    }
    Ok(v.ln())
}

/// Composite approximation of
/// `( ∫ ( ∫ g(t1,t2)^{q1} dt1/t1 )^{q2/q1} dt2/t2 )^{1/q2}`
/// over `(t_min, t_max]^2`, the inner integral running in `t1`.
///
/// `g` is the weighted integrand itself; the `q` powers are applied here, in
/// log space. Deterministic for a fixed grid.
pub fn nested_log_integral(
    g: impl Fn(f64, f64) -> f64,
    q: ParamPair,
    grid: &LogGrid,
) -> Result<f64> {
    if !q.is_finite() {
        return Err(Error::InvalidGrid(
            "nested integral requires finite q".into(),
        ));
    }
    let u = grid.u_nodes();
    let du = grid.u_step();
    let (q1, q2) = (q.a, q.b);

    // Evaluation abscissas per axis depend on the rule: node values for the
    // trapezoid, midpoints for the midpoint rule.
    let samples: Vec<f64> = match grid.rule {
        QuadratureRule::Trapezoid => u.clone(),
        QuadratureRule::Midpoint => u.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect(),
    };

    // ln of the inner integral at each t2 sample.
    let mut ln_inner = Vec::with_capacity(samples.len());
    for &u2 in &samples {
        let t2 = (-u2).exp();
        let mut acc = LogSum::new();
        match grid.rule {
            QuadratureRule::Trapezoid => {
                let mut prev: Option<(f64, f64)> = None;
                for &u1 in &u {
                    let t1 = (-u1).exp();
                    let l = q1 * ln_checked(&g, t1, t2)?;
                    if let Some((u_prev, l_prev)) = prev {
                        acc.add_ln(loglinear_segment(u_prev, l_prev, u1, l));
                    }
                    prev = Some((u1, l));
                }
            }
            QuadratureRule::Midpoint => {
                for &um in &samples {
                    let t1 = (-um).exp();
                    let l = q1 * ln_checked(&g, t1, t2)?;
                    acc.add_ln(l + du.ln());
                }
            }
        }
        ln_inner.push(acc.ln_total());
    }

    // Outer integral of inner^{q2/q1} against dt2/t2.
    let mut acc = LogSum::new();
    match grid.rule {
        QuadratureRule::Trapezoid => {
            for k in 1..samples.len() {
                let l0 = (q2 / q1) * ln_inner[k - 1];
                let l1 = (q2 / q1) * ln_inner[k];
                acc.add_ln(loglinear_segment(samples[k - 1], l0, samples[k], l1));
            }
        }
        QuadratureRule::Midpoint => {
            for &li in &ln_inner {
                acc.add_ln((q2 / q1) * li + du.ln());
            }
        }
    }

    let ln_value = acc.ln_total() / q2;
    let value = ln_value.exp();
    if value.is_infinite() {
        return Err(Error::Overflow);
    }
    Ok(value)
}

/// Truncated nested dyadic sum
/// `( Σ_{m2} ( Σ_{m1} g(m1,m2)^{τ1} )^{τ2/τ1} )^{1/τ2}`
/// with both indices running over `{-depth, ..., 0}`, accumulated in log
/// space. The inner sum runs in `m1`, mirroring the continuous nesting.
pub fn dyadic_nested_sum(
    g: impl Fn(i64, i64) -> f64,
    tau: ParamPair,
    trunc: DyadicTruncation,
) -> Result<f64> {
    if !tau.is_finite() {
        return Err(Error::InvalidGrid("dyadic sum requires finite tau".into()));
    }
    let (t1, t2) = (tau.a, tau.b);
    let lo = -(trunc.depth as i64);
    let mut outer = LogSum::new();
    for m2 in lo..=0 {
        let mut inner = LogSum::new();
        for m1 in lo..=0 {
            let v = g(m1, m2);
            if v.is_nan() || v.is_infinite() || v < 0.0 {
                return Err(Error::NonFiniteTerm(m1, m2));
            }
            inner.add_ln(t1 * v.ln());
        }
        outer.add_ln((t2 / t1) * inner.ln_total());
    }
    let value = (outer.ln_total() / t2).exp();
    if value.is_infinite() {
        return Err(Error::Overflow);
    }
    Ok(value)
}

/// Run `f` over a resolution schedule until the relative change between
/// consecutive levels drops below `rel_tol`.
///
/// Returns the first stabilized value with `converged = true`, or the last
/// computed value with `converged = false` when the schedule is exhausted.
pub fn refine_until(
    f: impl Fn(&LogGrid) -> Result<f64>,
    schedule: &[LogGrid],
    rel_tol: f64,
) -> Result<(f64, bool)> {
    let Some(first) = schedule.first() else {
        return Err(Error::EmptySchedule);
    };
    let mut prev = f(first)?;
    for grid in &schedule[1..] {
        let next = f(grid)?;
        let scale = prev.abs().max(next.abs());
        if scale == 0.0 || (next - prev).abs() <= rel_tol * scale {
            return Ok((next, true));
        }
        prev = next;
    }
    Ok((prev, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_grid() -> LogGrid {
        LogGrid::default()
    }

    // Oracle: per-axis closed form for g = t1^a * t2^b,
    //   value = (1/(a q1))^{1/q1} * (1/(b q2))^{1/q2}.
    fn separable_power_value(a: f64, b: f64, q1: f64, q2: f64) -> f64 {
        (1.0 / (a * q1)).powf(1.0 / q1) * (1.0 / (b * q2)).powf(1.0 / q2)
    }

    #[test]
    fn product_weight_integrates_to_one() {
        let v = nested_log_integral(
            |t1, t2| t1 * t2,
            ParamPair::new(1.0, 1.0).unwrap(),
            &default_grid(),
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-6, "got {v}");
    }

    #[test]
    fn zero_integrand_gives_zero() {
        let v = nested_log_integral(
            |_, _| 0.0,
            ParamPair::new(2.0, 3.0).unwrap(),
            &default_grid(),
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn separable_powers_match_closed_form() {
        let (a, b) = (0.7, 0.3);
        let q = ParamPair::new(2.0, 3.0).unwrap();
        let v = nested_log_integral(|t1, t2| t1.powf(a) * t2.powf(b), q, &default_grid()).unwrap();
        let expected = separable_power_value(a, b, q.a, q.b);
        assert!(
            (v - expected).abs() < 1e-6 * expected,
            "got {v}, expected {expected}"
        );
    }

    #[test]
    fn midpoint_rule_agrees_on_smooth_integrand() {
        let q = ParamPair::new(1.0, 1.0).unwrap();
        let grid_mid = default_grid().with_rule(QuadratureRule::Midpoint);
        let v = nested_log_integral(|t1, t2| t1 * t2, q, &grid_mid).unwrap();
        assert!((v - 1.0).abs() < 1e-4, "got {v}");
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let err = nested_log_integral(
            |t1, _| 1.0 / (t1 - t1), // NaN everywhere
            ParamPair::new(1.0, 1.0).unwrap(),
            &default_grid(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFiniteIntegrand(_, _)));
    }

    #[test]
    fn monotone_integrand_dominance() {
        let q = ParamPair::new(2.0, 1.5).unwrap();
        let grid = LogGrid::new(1e-8, 256).unwrap();
        let lo = nested_log_integral(|t1, t2| t1 * t2, q, &grid).unwrap();
        let hi = nested_log_integral(|t1, t2| t1 * t2 + 0.2 * t1, q, &grid).unwrap();
        assert!(lo <= hi);
    }

    #[test]
    fn homogeneity_in_the_integrand() {
        let q = ParamPair::new(2.0, 3.0).unwrap();
        let grid = LogGrid::new(1e-8, 256).unwrap();
        let base = nested_log_integral(|t1, t2| t1.powf(0.4) * t2.powf(0.9), q, &grid).unwrap();
        let scaled =
            nested_log_integral(|t1, t2| 7.5 * t1.powf(0.4) * t2.powf(0.9), q, &grid).unwrap();
        assert!((scaled - 7.5 * base).abs() < 1e-10 * scaled);
    }

    #[test]
    fn geometric_dyadic_sum() {
        let v = dyadic_nested_sum(
            |m1, m2| 2f64.powi(m1 as i32) * 2f64.powi(m2 as i32),
            ParamPair::new(1.0, 1.0).unwrap(),
            DyadicTruncation::new(40).unwrap(),
        )
        .unwrap();
        assert!((v - 4.0).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn zero_dyadic_sum() {
        let v = dyadic_nested_sum(
            |_, _| 0.0,
            ParamPair::new(2.0, 2.0).unwrap(),
            DyadicTruncation::default(),
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn single_atom_dyadic_sum() {
        let v = dyadic_nested_sum(
            |m1, m2| if m1 == 0 && m2 == 0 { 1.0 } else { 0.0 },
            ParamPair::new(2.0, 3.0).unwrap(),
            DyadicTruncation::default(),
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    // The dyadic sum and the continuous integral of a common power weight
    // stay within the two-sided factor 2^{(1/p1+1) + (1/p2+1)}.
    #[test]
    fn dyadic_and_continuous_routes_agree_within_bracket() {
        for (p1, p2, eps) in [(1.0, 1.0, 1.0), (2.0, 2.0, 0.5), (1.0, 3.0, 0.25)] {
            let a1 = 1.0 / p1 + eps;
            let a2 = 1.0 / p2 + eps;
            let q = ParamPair::new(1.0, 1.0).unwrap();
            let cont = nested_log_integral(
                |t1: f64, t2: f64| t1.powf(a1) * t2.powf(a2),
                q,
                &LogGrid::new(DEFAULT_T_MIN, 2048).unwrap(),
            )
            .unwrap();
            let dyad = dyadic_nested_sum(
                |m1, m2| 2f64.powf(m1 as f64 * a1) * 2f64.powf(m2 as f64 * a2),
                q,
                DyadicTruncation::default(),
            )
            .unwrap();
            let bracket = 2f64.powf((1.0 / p1 + 1.0) + (1.0 / p2 + 1.0));
            let ratio = dyad / cont;
            assert!(
                ratio <= bracket && ratio >= 1.0 / bracket,
                "ratio {ratio} outside bracket {bracket} for p=({p1},{p2}), eps={eps}"
            );
        }
    }

    #[test]
    fn refine_until_constant_sequence() {
        let schedule = [
            LogGrid::new(1e-6, 64).unwrap(),
            LogGrid::new(1e-6, 128).unwrap(),
            LogGrid::new(1e-6, 256).unwrap(),
        ];
        let (v, ok) = refine_until(|_| Ok(1.25), &schedule, 1e-3).unwrap();
        assert!(ok);
        assert_eq!(v, 1.25);
    }

    #[test]
    fn refine_until_decaying_sequence() {
        // value(M) = 1 + 1/M stabilizes once 1/M changes by < rel_tol.
        let schedule: Vec<LogGrid> = (0..8)
            .map(|k| LogGrid::new(1e-6, 64 << k).unwrap())
            .collect();
        let (v, ok) = refine_until(
            |g| Ok(1.0 + 1.0 / g.nodes as f64),
            &schedule,
            1e-3,
        )
        .unwrap();
        assert!(ok);
        assert!((v - 1.0).abs() < 1e-2);
    }

    #[test]
    fn refine_until_divergent_sequence() {
        let schedule: Vec<LogGrid> = (0..5)
            .map(|k| LogGrid::new(1e-6, 64 << k).unwrap())
            .collect();
        let (_, ok) = refine_until(|g| Ok(g.nodes as f64), &schedule, 1e-3).unwrap();
        assert!(!ok);
    }

    #[test]
    fn refine_until_empty_schedule() {
        assert!(matches!(
            refine_until(|_| Ok(0.0), &[], 1e-3),
            Err(Error::EmptySchedule)
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(LogGrid::new(0.0, 64).is_err());
        assert!(LogGrid::new(0.5, 8).is_err());
        assert!(LogGrid::with_cap(0.5, 0.25, 64).is_err());
        assert!(DyadicTruncation::new(4).is_err());
    }
}
