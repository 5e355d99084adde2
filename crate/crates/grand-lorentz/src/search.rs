//! Extremal parameter search over the epsilon box.
//!
//! A coarse log-spaced scan guards against multimodality, then golden-section
//! passes refine one coordinate at a time. Objectives are handled in log
//! space; non-finite values are skipped (a `+inf` objective settles a
//! maximization outright, since refinement cannot improve on a divergent
//! branch).

use serde::Serialize;

use crate::error::{Error, Result};

/// Admissible epsilon rectangle: lower corner exclusive, upper inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsBox {
    pub lo: (f64, f64),
    pub hi: (f64, f64),
}

impl EpsBox {
    pub fn new(lo: (f64, f64), hi: (f64, f64)) -> Result<Self> {
        if !(hi.0 > 0.0 && hi.1 > 0.0 && lo.0 < hi.0 && lo.1 < hi.1 && lo.0 >= 0.0 && lo.1 >= 0.0)
        {
            return Err(Error::InvalidGrid(format!(
                "epsilon box must satisfy 0 <= lo < hi, got lo={lo:?} hi={hi:?}"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Searchable floor per axis: the scan starts at `1e-6` unless the box
    /// forces otherwise.
    pub(crate) fn floor(&self) -> (f64, f64) {
        let f = |lo: f64, hi: f64| (1e-6f64).min(hi * 0.5).max(lo * (1.0 + 1e-12)).max(1e-12);
        (f(self.lo.0, self.hi.0), f(self.lo.1, self.hi.1))
    }
}

/// Grid scan plus golden-section refinement settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    /// Coarse log-spaced nodes per axis.
    pub coarse_nodes: usize,
    /// Cyclic coordinate refinement passes.
    pub refine_passes: usize,
    /// Objective evaluations per golden-section run.
    pub golden_evals: usize,
    /// Early-stop tolerance between passes.
    pub rel_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            coarse_nodes: 64,
            refine_passes: 3,
            golden_evals: 48,
            rel_tol: 1e-6,
        }
    }
}

impl SearchConfig {
    pub fn validated(self) -> Result<Self> {
        if self.coarse_nodes < 16 {
            return Err(Error::InvalidGrid(format!(
                "need at least 16 coarse nodes, got {}",
                self.coarse_nodes
            )));
        }
        if self.refine_passes < 1 {
            return Err(Error::InvalidGrid(
                "need at least one refinement pass".into(),
            ));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SearchGoal {
    Maximize,
    Minimize,
}

impl SearchGoal {
    fn better(&self, candidate: f64, incumbent: f64) -> bool {
        match self {
            SearchGoal::Maximize => candidate > incumbent,
            SearchGoal::Minimize => candidate < incumbent,
        }
    }

    /// Comparison score with NaN and the goal's absorbing value pushed to
    /// the losing end.
    fn score(&self, v: f64) -> f64 {
        if v.is_nan() {
            return match self {
                SearchGoal::Maximize => f64::NEG_INFINITY,
                SearchGoal::Minimize => f64::INFINITY,
            };
        }
        v
    }
}

/// A candidate counts unless it is NaN or `+inf`. A zero objective
/// (`ln = -inf`) is a legitimate value — the norm of the zero function —
/// while `+inf` marks a divergent branch and is handled by the callers.
fn usable(_goal: SearchGoal, v: f64) -> bool {
    !v.is_nan() && v < f64::INFINITY
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SearchOutcome {
    pub arg: (f64, f64),
    pub ln_value: f64,
    pub evaluations: usize,
}

pub(crate) fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            // pin the endpoints: `exp(ln ..)` round trips can overshoot the
            // admissible box by an ulp
            if k == 0 {
                lo
            } else if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Golden-section refinement on `[lo, hi]`, carried out in log scale.
/// Returns the best evaluated point, which may be an endpoint of the
/// original bracket.
fn golden_1d(
    f: &mut impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    evals: usize,
    goal: SearchGoal,
) -> (f64, f64, usize) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut best: Option<(f64, f64)> = None;
    let mut used = 0;

    let mut sample = |x: f64, best: &mut Option<(f64, f64)>| -> f64 {
        let e = x.exp().clamp(lo, hi);
        let v = f(e);
        if usable(goal, v) && best.is_none_or(|(_, bv)| goal.better(v, bv)) {
            *best = Some((e, v));
        }
        v
    };

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = sample(x1, &mut best);
    let mut f2 = sample(x2, &mut best);
    used += 2;

    while used < evals && (b - a) > 1e-13 {
        let keep_left = goal.better(goal.score(f1), goal.score(f2))
            || goal.score(f1) == goal.score(f2);
        if keep_left {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = sample(x1, &mut best);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = sample(x2, &mut best);
        }
        used += 1;
    }
    match best {
        Some((x, v)) => (x, v, used),
        None => (f64::NAN, goal.score(f64::NAN), used),
    }
}

/// One-dimensional search: coarse log-spaced scan over `[floor, hi]` then a
/// golden-section pass between the best node's neighbours. Endpoints are
/// evaluated exactly, so boundary optima are hit without bias.
pub(crate) fn search_1d(
    mut f: impl FnMut(f64) -> f64,
    floor: f64,
    hi: f64,
    cfg: &SearchConfig,
    goal: SearchGoal,
) -> Result<SearchOutcome> {
    let nodes = log_spaced(floor, hi, cfg.coarse_nodes);
    let mut evals = 0;
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in nodes.iter().enumerate() {
        let v = f(x);
        evals += 1;
        if goal == SearchGoal::Maximize && v == f64::INFINITY {
            return Ok(SearchOutcome {
                arg: (x, x),
                ln_value: f64::INFINITY,
                evaluations: evals,
            });
        }
        if usable(goal, v) && best.is_none_or(|(_, bv)| goal.better(v, bv)) {
            best = Some((i, v));
        }
    }
    let Some((idx, mut val)) = best else {
        return Err(Error::SearchFailed);
    };
    let mut arg = nodes[idx];
    let lo_n = nodes[idx.saturating_sub(1)];
    let hi_n = nodes[(idx + 1).min(nodes.len() - 1)];
    if hi_n > lo_n {
        let (x, v, used) = golden_1d(&mut f, lo_n, hi_n, cfg.golden_evals, goal);
        evals += used;
        if !x.is_nan() && goal.better(v, val) {
            arg = x;
            val = v;
        }
    }
    Ok(SearchOutcome {
        arg: (arg, arg),
        ln_value: val,
        evaluations: evals,
    })
}

/// Two-dimensional coordinate search over the epsilon box: full coarse scan,
/// then cyclic per-axis golden-section passes with a shrinking bracket.
pub(crate) fn coordinate_search(
    mut f: impl FnMut(f64, f64) -> f64,
    bounds: &EpsBox,
    cfg: &SearchConfig,
    goal: SearchGoal,
) -> Result<SearchOutcome> {
    let floor = bounds.floor();
    let nodes1 = log_spaced(floor.0, bounds.hi.0, cfg.coarse_nodes);
    let nodes2 = log_spaced(floor.1, bounds.hi.1, cfg.coarse_nodes);
    let mut evals = 0;
    let mut best: Option<((f64, f64), f64)> = None;
    for &e1 in &nodes1 {
        for &e2 in &nodes2 {
            let v = f(e1, e2);
            evals += 1;
            if goal == SearchGoal::Maximize && v == f64::INFINITY {
                return Ok(SearchOutcome {
                    arg: (e1, e2),
                    ln_value: f64::INFINITY,
                    evaluations: evals,
                });
            }
            if usable(goal, v) && best.is_none_or(|(_, bv)| goal.better(v, bv)) {
                best = Some(((e1, e2), v));
            }
        }
    }
    let Some(((mut a1, mut a2), mut val)) = best else {
        return Err(Error::SearchFailed);
    };

    // one coarse step on either side of the incumbent, shrinking per pass
    let step1 = (bounds.hi.0 / floor.0).powf(1.0 / (cfg.coarse_nodes - 1) as f64);
    let step2 = (bounds.hi.1 / floor.1).powf(1.0 / (cfg.coarse_nodes - 1) as f64);
    for pass in 0..cfg.refine_passes {
        let shrink = 1.0 / (1u64 << pass.min(32)) as f64;
        let before = val;

        let w1 = step1.powf(shrink);
        let lo1 = (a1 / w1).max(floor.0);
        let hi1 = (a1 * w1).min(bounds.hi.0);
        if hi1 > lo1 {
            let mut g = |e: f64| f(e, a2);
            let (x, v, used) = golden_1d(&mut g, lo1, hi1, cfg.golden_evals, goal);
            evals += used;
            if !x.is_nan() && goal.better(v, val) {
                a1 = x;
                val = v;
            }
        }

        let w2 = step2.powf(shrink);
        let lo2 = (a2 / w2).max(floor.1);
        let hi2 = (a2 * w2).min(bounds.hi.1);
        if hi2 > lo2 {
            let mut g = |e: f64| f(a1, e);
            let (x, v, used) = golden_1d(&mut g, lo2, hi2, cfg.golden_evals, goal);
            evals += used;
            if !x.is_nan() && goal.better(v, val) {
                a2 = x;
                val = v;
            }
        }

        if (val - before).abs() <= cfg.rel_tol * before.abs().max(1e-300) {
            break;
        }
    }
    Ok(SearchOutcome {
        arg: (a1, a2),
        ln_value: val,
        evaluations: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_maximum() {
        // ln objective ln(e1) - e1 + ln(e2) - e2 peaks at (1, 1)
        let f = |e1: f64, e2: f64| e1.ln() - e1 + e2.ln() - e2;
        let bounds = EpsBox::new((0.0, 0.0), (2.0, 2.0)).unwrap();
        let out =
            coordinate_search(f, &bounds, &SearchConfig::default(), SearchGoal::Maximize).unwrap();
        assert!((out.arg.0 - 1.0).abs() < 1e-5, "arg {:?}", out.arg);
        assert!((out.arg.1 - 1.0).abs() < 1e-5);
        assert!((out.ln_value + 2.0).abs() < 1e-10);
    }

    #[test]
    fn boundary_maximum_is_hit_exactly() {
        let f = |e1: f64, e2: f64| e1.ln() + e2.ln();
        let bounds = EpsBox::new((0.0, 0.0), (1.0, 1.0)).unwrap();
        let out =
            coordinate_search(f, &bounds, &SearchConfig::default(), SearchGoal::Maximize).unwrap();
        assert_eq!(out.arg, (1.0, 1.0));
        assert_eq!(out.ln_value, 0.0);
    }

    #[test]
    fn interior_minimum() {
        // ln of 1/(e (1-e)) per axis, minimized at e = 1/2 with value 16
        let axis = |e: f64| -(e.ln() + (1.0 - e).ln());
        let obj = |e1: f64, e2: f64| axis(e1) + axis(e2);
        let bounds = EpsBox::new((0.0, 0.0), (1.0, 1.0)).unwrap();
        let out =
            coordinate_search(obj, &bounds, &SearchConfig::default(), SearchGoal::Minimize)
                .unwrap();
        assert!((out.arg.0 - 0.5).abs() < 1e-5);
        assert!((out.arg.1 - 0.5).abs() < 1e-5);
        assert!((out.ln_value - 16.0f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn all_nan_objective_fails() {
        let bounds = EpsBox::new((0.0, 0.0), (1.0, 1.0)).unwrap();
        let err = coordinate_search(
            |_, _| f64::NAN,
            &bounds,
            &SearchConfig::default(),
            SearchGoal::Maximize,
        )
        .unwrap_err();
        assert_eq!(err, Error::SearchFailed);
    }

    #[test]
    fn infinite_objective_skipped_in_minimization() {
        // +inf at the left half, finite valley at 0.25
        let obj = |e1: f64, e2: f64| {
            if e1 < 0.1 {
                f64::INFINITY
            } else {
                (e1.ln() - (0.25f64).ln()).powi(2) + e2
            }
        };
        let bounds = EpsBox::new((0.0, 0.0), (1.0, 1.0)).unwrap();
        let out =
            coordinate_search(obj, &bounds, &SearchConfig::default(), SearchGoal::Minimize)
                .unwrap();
        assert!((out.arg.0 - 0.25).abs() < 1e-3);
    }

    #[test]
    fn one_dimensional_boundary_sup() {
        let out = search_1d(
            |e| e.ln(),
            1e-6,
            1.0,
            &SearchConfig::default(),
            SearchGoal::Maximize,
        )
        .unwrap();
        assert_eq!(out.arg.0, 1.0);
    }
}
