//! Shared evaluation engine behind the norm functionals.
//!
//! Grid rearrangements are piecewise constant, so the nested integral
//! collapses to closed-form power integrals per cell: per row, a weighted
//! sum of column-cell integrals, then one pass over row cells. Separable
//! rearrangements factor into two one-axis integrals. Either way the work
//! per epsilon is linear in the number of cells or grid nodes, which is what
//! makes the extremal search affordable.

use crate::logspace::LogSum;
use crate::profile::{axis_integral, power_log_interval_ln, AxisIntegral, AxisWeight};
use crate::quadrature::LogGrid;
use crate::rearrange::Rearrangement2D;

/// Outcome of a nested weighted integral, in log space.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NestedOutcome {
    pub ln_value: f64,
    pub tail_fraction: f64,
    pub tail_exact: bool,
    pub head_truncated: bool,
}

impl NestedOutcome {
    fn zero() -> Self {
        Self {
            ln_value: f64::NEG_INFINITY,
            tail_fraction: 0.0,
            tail_exact: true,
            head_truncated: false,
        }
    }
}

/// Cell edges of a uniform `n`-cell axis in `u = -ln t`, restricted to the
/// grid window. Cell `j` covers `(j/n, (j+1)/n]`, so `u` runs from
/// `-ln((j+1)/n)` up to `-ln(j/n)` (infinite for `j = 0`).
fn cell_u_interval(j: usize, n: usize, u_min: f64) -> Option<(f64, f64)> {
    let t_hi = (j + 1) as f64 / n as f64;
    let u_a = (-t_hi.ln()).max(u_min);
    let u_b = if j == 0 {
        f64::INFINITY
    } else {
        -(j as f64 / n as f64).ln()
    };
    (u_b > u_a).then_some((u_a, u_b))
}

/// Per-cell integrals of `e^(-a u) u^b` along one grid axis.
fn grid_axis_integrals(n: usize, a: f64, b: f64, grid: &LogGrid) -> Vec<Option<AxisIntegral>> {
    let (u_min, u_max) = grid.u_range();
    let du = grid.u_step();
    (0..n)
        .map(|j| {
            cell_u_interval(j, n, u_min).map(|(ua, ub)| power_log_interval_ln(a, b, ua, ub, du, u_max))
        })
        .collect()
}

/// Rows of the inner integral for a grid rearrangement: for each row `i`,
/// `ln Σ_j v_ij^q1 E_j` where `E_j` is the column-cell integral.
pub(crate) struct PreparedRows {
    pub ln_rows: Vec<f64>,
    pub ln_rows_tail: Vec<f64>,
    pub head_truncated: bool,
    pub tail_exact: bool,
}

pub(crate) fn prepare_grid_rows(
    values: &[f64],
    n1: usize,
    n2: usize,
    w1: AxisWeight,
    q1: f64,
    grid: &LogGrid,
) -> PreparedRows {
    let cells = grid_axis_integrals(n1, q1 * w1.t_exp, q1 * w1.log_exp, grid);
    let mut ln_rows = Vec::with_capacity(n2);
    let mut ln_rows_tail = Vec::with_capacity(n2);
    let mut head_truncated = false;
    let mut tail_exact = true;
    for i in 0..n2 {
        let mut acc = LogSum::new();
        let mut tail = LogSum::new();
        let mut diverged = false;
        for (j, cell) in cells.iter().enumerate() {
            let Some(part) = cell else { continue };
            let v = values[i * n1 + j];
            if v == 0.0 {
                continue;
            }
            if part.ln_value == f64::INFINITY {
                diverged = true;
                break;
            }
            let ln_term = q1 * v.ln() + part.ln_value;
            acc.add_ln(ln_term);
            if part.tail_frac > 0.0 {
                tail.add_ln(ln_term + part.tail_frac.ln());
                tail_exact &= part.tail_exact;
            }
            head_truncated |= part.head_truncated;
        }
        if diverged {
            ln_rows.push(f64::INFINITY);
            ln_rows_tail.push(f64::NEG_INFINITY);
        } else {
            ln_rows.push(acc.ln_total());
            ln_rows_tail.push(tail.ln_total());
        }
    }
    PreparedRows {
        ln_rows,
        ln_rows_tail,
        head_truncated,
        tail_exact,
    }
}

/// Finish the nested integral: combine prepared rows with the outer-axis
/// cell integrals.
pub(crate) fn finish_grid_nested(
    rows: &PreparedRows,
    n2: usize,
    w2: AxisWeight,
    q: (f64, f64),
    grid: &LogGrid,
) -> NestedOutcome {
    let (q1, q2) = q;
    let cells = grid_axis_integrals(n2, q2 * w2.t_exp, q2 * w2.log_exp, grid);
    let mut acc = LogSum::new();
    let mut tail = LogSum::new();
    let mut head_truncated = rows.head_truncated;
    let mut tail_exact = rows.tail_exact;
    for (i, cell) in cells.iter().enumerate() {
        let Some(part) = cell else { continue };
        let ln_i = rows.ln_rows[i];
        if ln_i == f64::NEG_INFINITY {
            continue;
        }
        if ln_i == f64::INFINITY || part.ln_value == f64::INFINITY {
            return NestedOutcome {
                ln_value: f64::INFINITY,
                tail_fraction: 0.0,
                tail_exact: false,
                head_truncated,
            };
        }
        let ln_term = (q2 / q1) * ln_i + part.ln_value;
        acc.add_ln(ln_term);
        // outer-axis tail share, plus the first-order share inherited from
        // the inner integrals
        if part.tail_frac > 0.0 {
            tail.add_ln(ln_term + part.tail_frac.ln());
            tail_exact &= part.tail_exact;
        }
        let ln_i_tail = rows.ln_rows_tail[i];
        if ln_i_tail > f64::NEG_INFINITY {
            tail.add_ln((q2 / q1).ln() + (q2 / q1 - 1.0) * ln_i + ln_i_tail + part.ln_value);
        }
        head_truncated |= part.head_truncated;
    }
    let ln_outer = acc.ln_total();
    let tail_fraction = if ln_outer.is_finite() {
        ((tail.ln_total() - ln_outer).exp() / q2).min(1.0)
    } else {
        0.0
    };
    NestedOutcome {
        ln_value: ln_outer / q2,
        tail_fraction,
        tail_exact,
        head_truncated,
    }
}

/// Nested weighted integral of a rearrangement:
/// `( ∫ ( ∫ (w1(t1) w2(t2) r)^{q1} dt1/t1 )^{q2/q1} dt2/t2 )^{1/q2}`.
pub(crate) fn nested_ln(
    r: &Rearrangement2D,
    w1: AxisWeight,
    w2: AxisWeight,
    q: (f64, f64),
    grid: &LogGrid,
) -> NestedOutcome {
    let (q1, q2) = q;
    match r {
        Rearrangement2D::Grid { n1, n2, values } => {
            let rows = prepare_grid_rows(values, *n1, *n2, w1, q1, grid);
            finish_grid_nested(&rows, *n2, w2, q, grid)
        }
        Rearrangement2D::Separable { scale, axis1, axis2 } => {
            if *scale == 0.0 {
                return NestedOutcome::zero();
            }
            let a = axis_integral(axis1, w1, q1, grid);
            let b = axis_integral(axis2, w2, q2, grid);
            if a.ln_value == f64::INFINITY || b.ln_value == f64::INFINITY {
                return NestedOutcome {
                    ln_value: f64::INFINITY,
                    tail_fraction: 0.0,
                    tail_exact: false,
                    head_truncated: a.head_truncated || b.head_truncated,
                };
            }
            NestedOutcome {
                ln_value: scale.ln() + a.ln_value / q1 + b.ln_value / q2,
                tail_fraction: (a.tail_frac / q1 + b.tail_frac / q2).min(1.0),
                tail_exact: a.tail_exact && b.tail_exact,
                head_truncated: a.head_truncated || b.head_truncated,
            }
        }
    }
}

/// Weighted supremum of a rearrangement over the grid window:
/// `sup_t w1(t1) w2(t2) r(t1, t2)`, with the attaining point.
///
/// The axis weights must be non-increasing in `u` on constant pieces (every
/// weak-norm weight here is), so piecewise profiles contribute their piece
/// edges as candidates; smooth profiles are scanned on the nodes.
pub(crate) fn sup_ln(
    r: &Rearrangement2D,
    ln_w1: &dyn Fn(f64) -> f64,
    ln_w2: &dyn Fn(f64) -> f64,
    grid: &LogGrid,
) -> (f64, (f64, f64)) {
    match r {
        Rearrangement2D::Grid { n1, n2, values } => {
            let (u_min, u_max) = grid.u_range();
            let edge_u = |j: usize, n: usize| -> Option<f64> {
                let t_hi = (j + 1) as f64 / n as f64;
                let u = (-t_hi.ln()).max(u_min);
                (u <= u_max).then_some(u)
            };
            let u1: Vec<Option<f64>> = (0..*n1).map(|j| edge_u(j, *n1)).collect();
            let u2: Vec<Option<f64>> = (0..*n2).map(|i| edge_u(i, *n2)).collect();
            let w1: Vec<Option<f64>> = u1.iter().map(|u| u.map(ln_w1)).collect();
            let w2: Vec<Option<f64>> = u2.iter().map(|u| u.map(ln_w2)).collect();
            let mut best = (f64::NEG_INFINITY, (1.0, 1.0));
            for i in 0..*n2 {
                let (Some(wi), Some(ui)) = (w2[i], u2[i]) else { continue };
                for j in 0..*n1 {
                    let (Some(wj), Some(uj)) = (w1[j], u1[j]) else { continue };
                    let v = values[i * n1 + j];
                    if v == 0.0 {
                        continue;
                    }
                    let cand = v.ln() + wi + wj;
                    if cand > best.0 {
                        best = (cand, ((-uj).exp(), (-ui).exp()));
                    }
                }
            }
            best
        }
        Rearrangement2D::Separable { scale, axis1, axis2 } => {
            if *scale == 0.0 {
                return (f64::NEG_INFINITY, (1.0, 1.0));
            }
            let (s1, t1) = crate::profile::axis_weighted_sup(axis1, ln_w1, grid);
            let (s2, t2) = crate::profile::axis_weighted_sup(axis2, ln_w2, grid);
            if s1 == f64::NEG_INFINITY || s2 == f64::NEG_INFINITY {
                return (f64::NEG_INFINITY, (t1, t2));
            }
            (scale.ln() + s1 + s2, (t1, t2))
        }
    }
}

/// Log-values `ln r(2^{m1}, 2^{m2})` for `m` in `{-depth, .., 0}^2`,
/// row-major with `m1` fastest.
pub(crate) fn dyadic_samples(
    r: &Rearrangement2D,
    depth: u32,
) -> crate::error::Result<Vec<f64>> {
    let d = depth as i64;
    let side = (d + 1) as usize;
    let mut out = Vec::with_capacity(side * side);
    for m2 in -d..=0 {
        let t2 = 2f64.powi(m2 as i32);
        for m1 in -d..=0 {
            let t1 = 2f64.powi(m1 as i32);
            let v = r.evaluate(t1, t2)?;
            if v.is_nan() || v.is_infinite() {
                return Err(crate::error::Error::NonFiniteTerm(m1, m2));
            }
            out.push(v.ln());
        }
    }
    Ok(out)
}

/// Inner dyadic sums per `m2` for a fixed first-axis exponent `a1`:
/// `S[m2] = ln Σ_{m1} (2^{m1 a1} r(2^{m1}, 2^{m2}))^{τ1}`.
pub(crate) fn prepare_dyadic_rows(samples: &[f64], depth: u32, a1: f64, tau1: f64) -> Vec<f64> {
    let d = depth as i64;
    let side = (d + 1) as usize;
    let ln2 = std::f64::consts::LN_2;
    (0..side)
        .map(|row| {
            let mut acc = LogSum::new();
            for (col, m1) in (-d..=0).enumerate() {
                let ln_r = samples[row * side + col];
                if ln_r == f64::NEG_INFINITY {
                    continue;
                }
                acc.add_ln(tau1 * (m1 as f64 * a1 * ln2 + ln_r));
            }
            acc.ln_total()
        })
        .collect()
}

/// Outer dyadic sum: combines prepared rows with the second-axis exponent.
/// Returns `(ln_value, tail_fraction)` where the tail is the share carried
/// by the deepest index block (`m1 = -depth` or `m2 = -depth`).
pub(crate) fn finish_dyadic(
    samples: &[f64],
    rows: &[f64],
    depth: u32,
    a1: f64,
    a2: f64,
    tau: (f64, f64),
) -> (f64, f64) {
    let d = depth as i64;
    let side = (d + 1) as usize;
    let ln2 = std::f64::consts::LN_2;
    let (t1, t2) = tau;
    let mut acc = LogSum::new();
    for (row, m2) in (-d..=0).enumerate() {
        if rows[row] == f64::NEG_INFINITY {
            continue;
        }
        acc.add_ln((t2 / t1) * (rows[row] + t1 * (m2 as f64 * a2 * ln2)));
    }
    let ln_total = acc.ln_total();
    if !ln_total.is_finite() {
        return (ln_total / t2, 0.0);
    }
    // share of the boundary block in the outer sum
    let mut tail = LogSum::new();
    // m2 = -d row
    if rows[0] > f64::NEG_INFINITY {
        tail.add_ln((t2 / t1) * (rows[0] + t1 * (-(d as f64) * a2 * ln2)));
    }
    // m1 = -d column, first-order inside each row
    for (row, m2) in (-d..=0).enumerate().skip(1) {
        let ln_r = samples[row * side];
        if ln_r == f64::NEG_INFINITY || rows[row] == f64::NEG_INFINITY {
            continue;
        }
        let ln_col_term = t1 * ((-(d as f64)) * a1 * ln2 + ln_r);
        tail.add_ln(
            (t2 / t1).ln()
                + (t2 / t1 - 1.0) * (rows[row] + t1 * (m2 as f64 * a2 * ln2))
                + ln_col_term
                + t1 * (m2 as f64 * a2 * ln2),
        );
    }
    let frac = ((tail.ln_total() - ln_total).exp() / t2).min(1.0);
    (ln_total / t2, frac)
}
