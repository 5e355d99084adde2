//! The norm functionals: classical anisotropic Lorentz, grand Lorentz in
//! all three regimes, logarithmic-weight forms, the dyadic discretization,
//! and the one-dimensional grand Lebesgue norms.
//!
//! Every evaluator runs at the requested grid and once more at the refined
//! grid (double the nodes, squared `t_min`); the `converged` flag records
//! whether the value stabilized and no truncated singularity or unseen tail
//! mass was detected. Divergence that is exact — an analytically infinite
//! integral — comes back as [`Error::Diverged`]; divergence that only shows
//! up under refinement is reported as `converged = false` so callers can
//! treat it as data.

use std::cell::RefCell;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluate::{
    dyadic_samples, finish_dyadic, finish_grid_nested, nested_ln, prepare_dyadic_rows,
    prepare_grid_rows, sup_ln, NestedOutcome,
};
use crate::params::{GrandParams, ParamPair, Regime, ThetaPair};
use crate::profile::{axis_integral, axis_integral_mode, axis_weighted_sup, AxisProfile, AxisWeight};
use crate::quadrature::{DyadicTruncation, LogGrid, DEFAULT_REL_TOL};
use crate::rearrange::Rearrangement2D;
use crate::search::{
    coordinate_search, log_spaced, search_1d, EpsBox, SearchConfig, SearchGoal, SearchOutcome,
};

/// Result of a norm evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormResult {
    pub value: f64,
    /// Extremal `(eps1, eps2)` for the grand norms (or `(1/k1, 1/k2)` for
    /// the dyadic form); `None` for norms without a perturbation parameter.
    pub extremal_eps: Option<(f64, f64)>,
    pub converged: bool,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Resolution levels evaluated.
    pub grid_levels: u32,
    /// Share of the value carried at or below the truncation depth.
    pub tail_fraction: f64,
    /// Objective evaluations spent in the extremal search.
    pub eps_evaluations: usize,
}

impl Diagnostics {
    fn plain(tail_fraction: f64) -> Self {
        Self {
            grid_levels: 2,
            tail_fraction,
            eps_evaluations: 0,
        }
    }
}

fn require_finite(pair: ParamPair, what: &str) -> Result<()> {
    if !pair.is_finite() {
        return Err(Error::InvalidGrid(format!("{what} must be finite")));
    }
    Ok(())
}

fn finish_value(ln_value: f64) -> Result<f64> {
    if ln_value == f64::INFINITY {
        return Err(Error::Diverged);
    }
    let v = ln_value.exp();
    if v.is_infinite() {
        return Err(Error::Overflow);
    }
    Ok(v)
}

fn stable(v0: f64, v1: f64, rel_tol: f64) -> bool {
    let scale = v0.abs().max(v1.abs());
    scale == 0.0 || (v1 - v0).abs() <= rel_tol * scale
}

fn outcome_converged(out: &NestedOutcome, rel_ok: bool, rel_tol: f64) -> bool {
    rel_ok && !out.head_truncated && (out.tail_exact || out.tail_fraction <= rel_tol)
}

/// Classical anisotropic Lorentz quasinorm
/// `( ∫ ( ∫ (t1^{1/p1} t2^{1/p2} r)^{q1} dt1/t1 )^{q2/q1} dt2/t2 )^{1/q2}`.
pub fn lorentz_norm(
    r: &Rearrangement2D,
    p: ParamPair,
    q: ParamPair,
    grid: &LogGrid,
) -> Result<NormResult> {
    require_finite(p, "p")?;
    require_finite(q, "q")?;
    let (b1, b2) = p.recip();
    let eval = |g: &LogGrid| nested_ln(r, AxisWeight::power(b1), AxisWeight::power(b2), (q.a, q.b), g);
    let out0 = eval(grid);
    let out1 = eval(&grid.refined());
    let value = finish_value(out1.ln_value)?;
    let rel_ok = stable(out0.ln_value.exp(), value, DEFAULT_REL_TOL);
    Ok(NormResult {
        value,
        extremal_eps: None,
        converged: outcome_converged(&out1, rel_ok, DEFAULT_REL_TOL),
        diagnostics: Diagnostics::plain(out1.tail_fraction),
    })
}

/// Weak (q = inf) anisotropic Lorentz norm:
/// `sup_t t1^{1/p1} t2^{1/p2} r(t1, t2)` over the grid window.
pub fn weak_lorentz_norm(r: &Rearrangement2D, p: ParamPair, grid: &LogGrid) -> Result<NormResult> {
    let (b1, b2) = p.recip();
    let eval = |g: &LogGrid| sup_ln(r, &|u| -b1 * u, &|u| -b2 * u, g);
    let (ln0, _) = eval(grid);
    let (ln1, _) = eval(&grid.refined());
    if ln1 == f64::INFINITY {
        return Err(Error::NonFiniteValue { row: 0, col: 0 });
    }
    let value = ln1.exp();
    Ok(NormResult {
        value,
        extremal_eps: None,
        converged: stable(ln0.exp(), value, DEFAULT_REL_TOL),
        diagnostics: Diagnostics::plain(0.0),
    })
}

/// Signed epsilon offset per regime: `+1` for the sup forms, `-1` for the
/// inf form.
fn regime_sign(regime: Regime) -> f64 {
    match regime {
        Regime::PosTheta | Regime::PosThetaPInf => 1.0,
        Regime::NegTheta => -1.0,
    }
}

fn regime_goal(regime: Regime) -> SearchGoal {
    match regime {
        Regime::PosTheta | Regime::PosThetaPInf => SearchGoal::Maximize,
        Regime::NegTheta => SearchGoal::Minimize,
    }
}

struct GrandEval {
    ln_value: f64,
    arg: (f64, f64),
    evaluations: usize,
}

/// The grand norm objective `eps^theta * I(eps)` at one point, in log
/// space — the quantity the extremal search ranges over.
pub(crate) fn grand_objective_ln(
    r: &Rearrangement2D,
    gp: &GrandParams,
    eps: (f64, f64),
    grid: &LogGrid,
) -> f64 {
    let (b1, b2) = gp.weight_base();
    let sign = regime_sign(gp.regime);
    let nested = nested_ln(
        r,
        AxisWeight::power(b1 + sign * eps.0),
        AxisWeight::power(b2 + sign * eps.1),
        (gp.q.a, gp.q.b),
        grid,
    );
    gp.theta.t1 * eps.0.ln() + gp.theta.t2 * eps.1.ln() + nested.ln_value
}

/// One full extremal search of the grand norm objective at a fixed grid.
fn grand_search(
    r: &Rearrangement2D,
    gp: &GrandParams,
    hi: (f64, f64),
    grid: &LogGrid,
    cfg: &SearchConfig,
) -> Result<GrandEval> {
    let (b1, b2) = gp.weight_base();
    let sign = regime_sign(gp.regime);
    let goal = regime_goal(gp.regime);
    let (th1, th2) = (gp.theta.t1, gp.theta.t2);
    let (q1, q2) = (gp.q.a, gp.q.b);
    let bounds = EpsBox::new((0.0, 0.0), hi)?;

    match r {
        Rearrangement2D::Separable { scale, axis1, axis2 } => {
            if *scale == 0.0 {
                return Ok(GrandEval {
                    ln_value: f64::NEG_INFINITY,
                    arg: (hi.0, hi.1),
                    evaluations: 0,
                });
            }
            let floor = bounds.floor();
            let obj1 = |e: f64| {
                th1 * e.ln()
                    + axis_integral(axis1, AxisWeight::power(b1 + sign * e), q1, grid).ln_value / q1
            };
            let obj2 = |e: f64| {
                th2 * e.ln()
                    + axis_integral(axis2, AxisWeight::power(b2 + sign * e), q2, grid).ln_value / q2
            };
            let o1 = search_1d(obj1, floor.0, hi.0, cfg, goal)?;
            let o2 = search_1d(obj2, floor.1, hi.1, cfg, goal)?;
            Ok(GrandEval {
                ln_value: scale.ln() + o1.ln_value + o2.ln_value,
                arg: (o1.arg.0, o2.arg.0),
                evaluations: o1.evaluations + o2.evaluations,
            })
        }
        Rearrangement2D::Grid { n1, n2, values } => {
            // rows of the inner integral depend on eps1 only; cache them
            let cache: RefCell<Option<(f64, crate::evaluate::PreparedRows)>> = RefCell::new(None);
            let obj = |e1: f64, e2: f64| -> f64 {
                let mut slot = cache.borrow_mut();
                let rebuild = slot.as_ref().is_none_or(|(key, _)| *key != e1);
                if rebuild {
                    let rows = prepare_grid_rows(
                        values,
                        *n1,
                        *n2,
                        AxisWeight::power(b1 + sign * e1),
                        q1,
                        grid,
                    );
                    *slot = Some((e1, rows));
                }
                let rows = &slot.as_ref().unwrap().1;
                let nested = finish_grid_nested(
                    rows,
                    *n2,
                    AxisWeight::power(b2 + sign * e2),
                    (q1, q2),
                    grid,
                );
                th1 * e1.ln() + th2 * e2.ln() + nested.ln_value
            };
            let out = coordinate_search(obj, &bounds, cfg, goal)?;
            Ok(GrandEval {
                ln_value: out.ln_value,
                arg: out.arg,
                evaluations: out.evaluations,
            })
        }
    }
}

/// Grand Lorentz quasinorm. Per regime:
/// sup over `eps in (0,1]^2` of `eps^theta` times the nested integral with
/// weight exponents `1/p + eps` (or `eps` alone when `p = inf`); for
/// negative `theta`, inf over `eps in (0, 1/p]` with exponents `1/p - eps`.
///
/// `q = (inf, inf)` routes to [`grand_weak_norm`].
pub fn grand_norm(
    r: &Rearrangement2D,
    gp: &GrandParams,
    grid: &LogGrid,
    cfg: &SearchConfig,
) -> Result<NormResult> {
    grand_norm_over(r, gp, None, grid, cfg)
}

/// Grand norm with the epsilon box truncated at `delta` componentwise —
/// the restricted-range form. `delta` must lie inside the regime's own box.
pub fn grand_norm_restricted(
    r: &Rearrangement2D,
    gp: &GrandParams,
    delta: (f64, f64),
    grid: &LogGrid,
    cfg: &SearchConfig,
) -> Result<NormResult> {
    grand_norm_over(r, gp, Some(delta), grid, cfg)
}

fn grand_norm_over(
    r: &Rearrangement2D,
    gp: &GrandParams,
    delta: Option<(f64, f64)>,
    grid: &LogGrid,
    cfg: &SearchConfig,
) -> Result<NormResult> {
    let gp = gp.validate()?;
    if gp.is_weak() {
        return grand_weak_norm(r, &gp, grid, cfg);
    }
    let hi = match delta {
        None => gp.eps_hi(),
        Some(d) => {
            let full = gp.eps_hi();
            if !(d.0 > 0.0 && d.1 > 0.0 && d.0 <= full.0 && d.1 <= full.1) {
                return Err(Error::InvalidGrid(format!(
                    "restricted box {d:?} must lie inside the regime box {full:?}"
                )));
            }
            d
        }
    };
    let cfg = cfg.validated()?;
    let fine = grid.refined();
    let e0 = grand_search(r, &gp, hi, grid, &cfg)?;
    let e1 = grand_search(r, &gp, hi, &fine, &cfg)?;
    let value = finish_value(e1.ln_value)?;
    let rel_ok = stable(e0.ln_value.exp(), value, DEFAULT_REL_TOL);
    // diagnostics at the extremum
    let sign = regime_sign(gp.regime);
    let (b1, b2) = gp.weight_base();
    let at_ext = nested_ln(
        r,
        AxisWeight::power(b1 + sign * e1.arg.0),
        AxisWeight::power(b2 + sign * e1.arg.1),
        (gp.q.a, gp.q.b),
        &fine,
    );
    Ok(NormResult {
        value,
        extremal_eps: Some(e1.arg),
        converged: outcome_converged(&at_ext, rel_ok, DEFAULT_REL_TOL),
        diagnostics: Diagnostics {
            grid_levels: 2,
            tail_fraction: at_ext.tail_fraction,
            eps_evaluations: e0.evaluations + e1.evaluations,
        },
    })
}

/// Weak-form grand norm (q = inf): sup-sup over `eps` and `t` in the sup
/// regimes, inf-sup in the negative regime.
pub fn grand_weak_norm(
    r: &Rearrangement2D,
    gp: &GrandParams,
    grid: &LogGrid,
    cfg: &SearchConfig,
) -> Result<NormResult> {
    let gp = gp.validate()?;
    if !gp.is_weak() {
        return grand_norm(r, &gp, grid, cfg);
    }
    let cfg = cfg.validated()?;
    let (b1, b2) = gp.weight_base();
    let sign = regime_sign(gp.regime);
    let goal = regime_goal(gp.regime);
    let (th1, th2) = (gp.theta.t1, gp.theta.t2);
    let hi = gp.eps_hi();
    let bounds = EpsBox::new((0.0, 0.0), hi)?;

    let run = |g: &LogGrid| -> Result<SearchOutcome> {
        match r {
            Rearrangement2D::Separable { scale, axis1, axis2 } => {
                if *scale == 0.0 {
                    return Ok(SearchOutcome {
                        arg: hi,
                        ln_value: f64::NEG_INFINITY,
                        evaluations: 0,
                    });
                }
                let floor = bounds.floor();
                let obj1 = |e: f64| {
                    th1 * e.ln() + axis_weighted_sup(axis1, |u| -(b1 + sign * e) * u, g).0
                };
                let obj2 = |e: f64| {
                    th2 * e.ln() + axis_weighted_sup(axis2, |u| -(b2 + sign * e) * u, g).0
                };
                let o1 = search_1d(obj1, floor.0, hi.0, &cfg, goal)?;
                let o2 = search_1d(obj2, floor.1, hi.1, &cfg, goal)?;
                Ok(SearchOutcome {
                    arg: (o1.arg.0, o2.arg.0),
                    ln_value: scale.ln() + o1.ln_value + o2.ln_value,
                    evaluations: o1.evaluations + o2.evaluations,
                })
            }
            Rearrangement2D::Grid { .. } => {
                let obj = |e1: f64, e2: f64| {
                    let (s, _) = sup_ln(
                        r,
                        &|u| -(b1 + sign * e1) * u,
                        &|u| -(b2 + sign * e2) * u,
                        g,
                    );
                    th1 * e1.ln() + th2 * e2.ln() + s
                };
                coordinate_search(obj, &bounds, &cfg, goal)
            }
        }
    };

    let o0 = run(grid)?;
    let o1 = run(&grid.refined())?;
    let value = finish_value(o1.ln_value)?;
    Ok(NormResult {
        value,
        extremal_eps: Some(o1.arg),
        converged: stable(o0.ln_value.exp(), value, DEFAULT_REL_TOL),
        diagnostics: Diagnostics {
            grid_levels: 2,
            tail_fraction: 0.0,
            eps_evaluations: o0.evaluations + o1.evaluations,
        },
    })
}

/// Which form of the logarithmic weight to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LogWeightVariant {
    /// `t^{1/p} / |ln t|^theta` as printed; unbounded near `t = 1` whenever
    /// the rearrangement stays positive there.
    Literal,
    /// The exact constrained factor `sup_{0 < eps <= 1} eps^theta t^eps`,
    /// namely `m^theta t^m` with `m = min(1, theta/|ln t|)`; bounded
    /// everywhere and comparable to the literal weight away from `t = 1`.
    Guarded,
}

/// Weak norm with the logarithmic weight,
/// `sup_t (t1^{1/p1} t2^{1/p2} / (|ln t1|^{th1} |ln t2|^{th2})) r(t1,t2)`
/// in the literal variant.
pub fn log_weight_weak_norm(
    r: &Rearrangement2D,
    p: ParamPair,
    theta: ThetaPair,
    grid: &LogGrid,
    variant: LogWeightVariant,
) -> Result<NormResult> {
    require_finite(p, "p")?;
    if !(theta.t1 > 0.0 && theta.t2 > 0.0) {
        return Err(Error::NonPositiveExponent(theta.t1.min(theta.t2)));
    }
    let (b1, b2) = p.recip();
    let literal = |b: f64, th: f64| move |u: f64| -b * u - th * u.ln();
    let guarded = |b: f64, th: f64| {
        move |u: f64| {
            let m = if u <= th { 1.0 } else { th / u };
            th * m.ln() - m * u - b * u
        }
    };
    let eval = |g: &LogGrid| match variant {
        LogWeightVariant::Literal => sup_ln(r, &literal(b1, theta.t1), &literal(b2, theta.t2), g),
        LogWeightVariant::Guarded => sup_ln(r, &guarded(b1, theta.t1), &guarded(b2, theta.t2), g),
    };
    let (ln0, _) = eval(grid);
    let (ln1, _) = eval(&grid.refined());
    if ln1 == f64::INFINITY || ln1.is_nan() {
        return Err(Error::NonFiniteValue { row: 0, col: 0 });
    }
    let value = ln1.exp();
    Ok(NormResult {
        value,
        extremal_eps: None,
        converged: stable(ln0.exp(), value, DEFAULT_REL_TOL),
        diagnostics: Diagnostics::plain(0.0),
    })
}

/// Side of the two-sided integral comparison with logarithmic weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundSide {
    /// Weight `t^{1/p} / |ln t|^theta` — the upper comparison integral.
    UpperForPosTheta,
    /// Weight `t^{1/p} |ln t|^theta` — the lower comparison integral.
    LowerForNegTheta,
}

/// Nested integral with the logarithmic weight attached.
pub fn log_weight_integral_bound(
    r: &Rearrangement2D,
    p: ParamPair,
    q: ParamPair,
    theta: ThetaPair,
    side: BoundSide,
    grid: &LogGrid,
) -> Result<NormResult> {
    require_finite(p, "p")?;
    require_finite(q, "q")?;
    if !(theta.t1 > 0.0 && theta.t2 > 0.0) {
        return Err(Error::NonPositiveExponent(theta.t1.min(theta.t2)));
    }
    let s = match side {
        BoundSide::UpperForPosTheta => -1.0,
        BoundSide::LowerForNegTheta => 1.0,
    };
    let (b1, b2) = p.recip();
    let w1 = AxisWeight {
        t_exp: b1,
        log_exp: s * theta.t1,
    };
    let w2 = AxisWeight {
        t_exp: b2,
        log_exp: s * theta.t2,
    };
    let eval = |g: &LogGrid| nested_ln(r, w1, w2, (q.a, q.b), g);
    let out0 = eval(grid);
    let out1 = eval(&grid.refined());
    let value = finish_value(out1.ln_value)?;
    let rel_ok = stable(out0.ln_value.exp(), value, DEFAULT_REL_TOL);
    Ok(NormResult {
        value,
        extremal_eps: None,
        converged: outcome_converged(&out1, rel_ok, DEFAULT_REL_TOL),
        diagnostics: Diagnostics::plain(out1.tail_fraction),
    })
}

/// Stationary point of `eps^|theta| t^(eps sign theta)` in `eps`:
/// `|theta| / |ln t|`, undefined at `t = 1`.
pub fn optimal_epsilon(theta: f64, t: f64) -> Result<f64> {
    if theta == 0.0 || !theta.is_finite() {
        return Err(Error::NonPositiveExponent(theta));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::TAtOne(t));
    }
    Ok(theta.abs() / t.ln().abs())
}

/// As [`optimal_epsilon`], clamped to the upper edge of the admissible box.
pub fn optimal_epsilon_clamped(theta: f64, t: f64, hi: f64) -> Result<f64> {
    Ok(optimal_epsilon(theta, t)?.min(hi))
}

/// Dyadic-sum form of the grand norm: for the sup regimes,
/// `sup_{k > 1} k^{-theta} ( Σ_{m2} ( Σ_{m1} (2^{m1(1/p1+1/k1)} 2^{m2(1/p2+1/k2)}
/// r(2^{m1}, 2^{m2}))^{τ1} )^{τ2/τ1} )^{1/τ2}`, and the matching inf form
/// with exponents `1/p - 1/k`. The search runs over `x = 1/k in (0, 1]`,
/// mirroring the epsilon box, and `extremal_eps` stores `(1/k1, 1/k2)`.
pub fn dyadic_grand_norm(
    r: &Rearrangement2D,
    gp: &GrandParams,
    tau: ParamPair,
    trunc: DyadicTruncation,
    cfg: &SearchConfig,
) -> Result<NormResult> {
    let gp = gp.validate()?;
    require_finite(gp.p, "p")?;
    require_finite(tau, "tau")?;
    let cfg = cfg.validated()?;
    let (b1, b2) = gp.weight_base();
    let sign = regime_sign(gp.regime);
    let goal = regime_goal(gp.regime);
    let (th1, th2) = (gp.theta.t1, gp.theta.t2);
    let bounds = EpsBox::new((0.0, 0.0), (1.0, 1.0))?;

    let run = |depth: u32| -> Result<(SearchOutcome, f64)> {
        let samples = dyadic_samples(r, depth)?;
        let cache: RefCell<Option<(f64, Vec<f64>)>> = RefCell::new(None);
        let obj = |x1: f64, x2: f64| -> f64 {
            let a1 = b1 + sign * x1;
            let a2 = b2 + sign * x2;
            let mut slot = cache.borrow_mut();
            let rebuild = slot.as_ref().is_none_or(|(key, _)| *key != x1);
            if rebuild {
                let rows = prepare_dyadic_rows(&samples, depth, a1, tau.a);
                *slot = Some((x1, rows));
            }
            let rows = &slot.as_ref().unwrap().1;
            let (ln_sum, _) = finish_dyadic(&samples, rows, depth, a1, a2, (tau.a, tau.b));
            th1 * x1.ln() + th2 * x2.ln() + ln_sum
        };
        let out = coordinate_search(obj, &bounds, &cfg, goal)?;
        // tail share at the extremum
        let a1 = b1 + sign * out.arg.0;
        let a2 = b2 + sign * out.arg.1;
        let rows = prepare_dyadic_rows(&samples, depth, a1, tau.a);
        let (_, tail) = finish_dyadic(&samples, &rows, depth, a1, a2, (tau.a, tau.b));
        Ok((out, tail))
    };

    let (o0, _) = run(trunc.depth)?;
    let (o1, tail) = run(trunc.depth * 2)?;
    let value = finish_value(o1.ln_value)?;
    let rel_ok = stable(o0.ln_value.exp(), value, DEFAULT_REL_TOL);
    Ok(NormResult {
        value,
        extremal_eps: Some(o1.arg),
        converged: rel_ok && tail <= DEFAULT_REL_TOL,
        diagnostics: Diagnostics {
            grid_levels: 2,
            tail_fraction: tail,
            eps_evaluations: o0.evaluations + o1.evaluations,
        },
    })
}

/// Form of the one-dimensional grand Lebesgue norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GrandLebesgueForm {
    /// `sup_{0 < eps < p-1} eps^theta ||f||_{p - eps}` with `|Omega| = 1`.
    EpsSup,
    /// `sup_{0 < s < 1} (1 - ln s)^{-theta/p} ( ∫_s^1 f*(t)^p dt )^{1/p}`.
    LogChar,
}

/// One-dimensional grand Lebesgue norm of a non-increasing profile.
pub fn grand_lebesgue_1d(
    f_star: &AxisProfile,
    p: f64,
    theta: f64,
    form: GrandLebesgueForm,
    grid: &LogGrid,
) -> Result<NormResult> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::NonPositiveExponent(p));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::NonPositiveExponent(theta));
    }
    let cfg = SearchConfig::default();
    match form {
        GrandLebesgueForm::EpsSup => {
            let run = |g: &LogGrid| -> Result<SearchOutcome> {
                // ||f||_{p-eps}^{p-eps} = ∫ f*(t)^{p-eps} dt = ∫ (f* t^{1/(p-eps)})^{p-eps} dt/t
                let obj = |e: f64| {
                    let q = p - e;
                    let a = axis_integral(f_star, AxisWeight::power(1.0 / q), q, g);
                    theta * e.ln() + a.ln_value / q
                };
                search_1d(obj, 1e-6f64.min((p - 1.0) * 0.5), p - 1.0, &cfg, SearchGoal::Maximize)
            };
            let o0 = run(grid)?;
            let o1 = run(&grid.refined())?;
            let value = finish_value(o1.ln_value)?;
            Ok(NormResult {
                value,
                extremal_eps: Some(o1.arg),
                converged: stable(o0.ln_value.exp(), value, DEFAULT_REL_TOL),
                diagnostics: Diagnostics {
                    grid_levels: 2,
                    tail_fraction: 0.0,
                    eps_evaluations: o0.evaluations + o1.evaluations,
                },
            })
        }
        GrandLebesgueForm::LogChar => {
            let run = |g: &LogGrid| -> Result<(f64, f64)> {
                let (_, u_max) = g.u_range();
                let du = g.u_step();
                let mut best = (f64::NEG_INFINITY, 1.0);
                for s_u in log_spaced(du.min(u_max * 0.5), u_max, g.nodes.min(1024)) {
                    let s = (-s_u).exp();
                    let window = LogGrid::with_cap(
                        s,
                        1.0,
                        ((s_u / du).ceil() as usize).clamp(16, g.nodes),
                    )?;
                    let a = axis_integral_mode(
                        f_star,
                        AxisWeight::power(1.0 / p),
                        p,
                        &window,
                        false,
                    );
                    let v = -(theta / p) * (1.0 - s.ln()).ln() + a.ln_value / p;
                    if v > best.0 {
                        best = (v, s);
                    }
                }
                Ok(best)
            };
            let (ln0, _) = run(grid)?;
            let (ln1, arg) = run(&grid.refined())?;
            let value = finish_value(ln1)?;
            Ok(NormResult {
                value,
                extremal_eps: Some((arg, arg)),
                converged: stable(ln0.exp(), value, DEFAULT_REL_TOL),
                diagnostics: Diagnostics {
                    grid_levels: 2,
                    tail_fraction: 0.0,
                    eps_evaluations: 0,
                },
            })
        }
    }
}
