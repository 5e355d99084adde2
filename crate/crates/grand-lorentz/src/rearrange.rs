//! Functions on the unit square and their iterated decreasing rearrangement.
//!
//! Grid functions are piecewise constant on a uniform `N1 x N2` partition of
//! `[0,1]^2`, so the iterated rearrangement — sort in the first variable,
//! then in the second — is an exact two-stage sort rather than a quadrature
//! problem. Analytic rearrangements are separable products of axis profiles
//! and exist to reach depths (`t` down to `2^-60`) no grid can.

use std::io::BufRead;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ParamPair, ThetaPair};
use crate::profile::AxisProfile;

/// Non-negative samples on the unit square, piecewise constant on a uniform
/// grid. Rows are indexed by the second variable, columns by the first;
/// every cell has area `1/(n1*n2)` so the total measure is one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction2D {
    n1: usize,
    n2: usize,
    values: Vec<f64>, // row-major, len n1 * n2
}

impl GridFunction2D {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n2 = rows.len();
        if n2 == 0 {
            return Err(Error::Csv("grid needs at least one row".into()));
        }
        let n1 = rows[0].len();
        if n1 == 0 {
            return Err(Error::Csv("grid needs at least one column".into()));
        }
        let mut values = Vec::with_capacity(n1 * n2);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n1 {
                return Err(Error::ShapeMismatch {
                    expected_rows: n2,
                    expected_cols: n1,
                    rows: n2,
                    cols: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v.is_nan() || v.is_infinite() {
                    return Err(Error::NonFiniteValue { row: i, col: j });
                }
                if v < 0.0 {
                    return Err(Error::NegativeValue {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                values.push(v);
            }
        }
        Ok(Self { n1, n2, values })
    }

    /// Parse the CSV grid format: a header line `N1,N2`, then `N2` lines of
    /// `N1` comma-separated non-negative reals.
    pub fn from_csv(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader
            .lines()
            .map(|l| l.map_err(|e| Error::Csv(e.to_string())));
        let header = lines
            .next()
            .ok_or_else(|| Error::Csv("empty input".into()))??;
        let dims: Vec<&str> = header.trim().split(',').collect();
        if dims.len() != 2 {
            return Err(Error::Csv(format!(
                "header must be `n1,n2`, got `{header}`"
            )));
        }
        let n1: usize = dims[0]
            .trim()
            .parse()
            .map_err(|_| Error::Csv(format!("bad n1 `{}`", dims[0])))?;
        let n2: usize = dims[1]
            .trim()
            .parse()
            .map_err(|_| Error::Csv(format!("bad n2 `{}`", dims[1])))?;
        let mut rows = Vec::with_capacity(n2);
        for _ in 0..n2 {
            let line = lines
                .next()
                .ok_or_else(|| Error::Csv(format!("expected {n2} data rows")))??;
            let row: Vec<f64> = line
                .trim()
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Csv(format!("bad value `{s}`")))
                })
                .collect::<Result<_>>()?;
            if row.len() != n1 {
                return Err(Error::Csv(format!(
                    "expected {n1} values per row, got {}",
                    row.len()
                )));
            }
            rows.push(row);
        }
        Self::new(rows)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n1..(i + 1) * self.n1]
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n2).map(|i| self.row(i).to_vec()).collect()
    }
}

fn sort_desc(v: &mut [f64]) {
    v.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
}

fn two_stage_sort(rows: &mut [Vec<f64>]) {
    for row in rows.iter_mut() {
        sort_desc(row);
    }
    let n1 = rows[0].len();
    let mut column = Vec::with_capacity(rows.len());
    for j in 0..n1 {
        column.clear();
        column.extend(rows.iter().map(|r| r[j]));
        sort_desc(&mut column);
        for (i, r) in rows.iter_mut().enumerate() {
            r[j] = column[i];
        }
    }
}

/// An iterated decreasing rearrangement on `(0,1]^2`: non-increasing in each
/// variable for the other one fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Rearrangement2D {
    /// Exactly rearranged grid values; entry `(i, j)` covers the cell
    /// `(j/n1, (j+1)/n1] x (i/n2, (i+1)/n2]`.
    Grid { n1: usize, n2: usize, values: Vec<f64> },
    /// `scale * axis1(t1) * axis2(t2)` with non-increasing factors.
    Separable {
        scale: f64,
        axis1: AxisProfile,
        axis2: AxisProfile,
    },
}

/// Two-stage sort of a grid function: each row (first variable) into
/// non-increasing order, then each column of the intermediate matrix.
/// The output is exactly the iterated rearrangement of the piecewise
/// constant input.
pub fn iterated_rearrangement(f: &GridFunction2D) -> Rearrangement2D {
    let mut rows = f.to_rows();
    two_stage_sort(&mut rows);
    Rearrangement2D::Grid {
        n1: f.n1,
        n2: f.n2,
        values: rows.into_iter().flatten().collect(),
    }
}

/// Replays the two-stage sort on `f` and compares with `r` entry by entry,
/// which also certifies that `r` and `f` carry the same value multisets
/// row-wise and column-wise.
pub fn equimeasurable_check(f: &GridFunction2D, r: &Rearrangement2D) -> Result<bool> {
    let Rearrangement2D::Grid { n1, n2, values } = r else {
        return Err(Error::ShapeMismatch {
            expected_rows: f.n2,
            expected_cols: f.n1,
            rows: 0,
            cols: 0,
        });
    };
    if (*n1, *n2) != (f.n1, f.n2) {
        return Err(Error::ShapeMismatch {
            expected_rows: f.n2,
            expected_cols: f.n1,
            rows: *n2,
            cols: *n1,
        });
    }
    let mut rows = f.to_rows();
    two_stage_sort(&mut rows);
    let sorted: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(sorted == *values)
}

impl Rearrangement2D {
    pub fn constant(c: f64) -> Result<Self> {
        Ok(Self::Separable {
            scale: AxisProfile::constant(c)?.scaled_max(),
            axis1: AxisProfile::constant(1.0)?,
            axis2: AxisProfile::constant(1.0)?,
        })
    }

    /// Indicator of the rectangle `(0, a1] x (0, a2]`.
    pub fn indicator(a1: f64, a2: f64) -> Result<Self> {
        Ok(Self::Separable {
            scale: 1.0,
            axis1: AxisProfile::indicator(a1)?,
            axis2: AxisProfile::indicator(a2)?,
        })
    }

    pub fn separable(scale: f64, axis1: AxisProfile, axis2: AxisProfile) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::NegativeValue {
                row: 0,
                col: 0,
                value: scale,
            });
        }
        Ok(Self::Separable { scale, axis1, axis2 })
    }

    /// Value at `(t1, t2)` with right-closed cells for the grid kind.
    pub fn evaluate(&self, t1: f64, t2: f64) -> Result<f64> {
        if !(t1 > 0.0 && t1 <= 1.0 && t2 > 0.0 && t2 <= 1.0) {
            return Err(Error::OutOfDomain(t1, t2));
        }
        match self {
            Self::Grid { n1, n2, values } => {
                let j = cell_index(t1, *n1);
                let i = cell_index(t2, *n2);
                Ok(values[i * n1 + j])
            }
            Self::Separable { scale, axis1, axis2 } => {
                Ok(scale * axis1.value(t1)? * axis2.value(t2)?)
            }
        }
    }

    /// Checks the defining monotonicity: exactly for grids, on a log-spaced
    /// sample for separable profiles.
    pub fn is_monotone(&self) -> bool {
        match self {
            Self::Grid { n1, n2, values } => {
                for i in 0..*n2 {
                    for j in 0..*n1 {
                        let v = values[i * n1 + j];
                        if j + 1 < *n1 && values[i * n1 + j + 1] > v {
                            return false;
                        }
                        if i + 1 < *n2 && values[(i + 1) * n1 + j] > v {
                            return false;
                        }
                    }
                }
                true
            }
            Self::Separable { axis1, axis2, .. } => {
                axis1.is_non_increasing(512) && axis2.is_non_increasing(512)
            }
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Self::Grid { n1, n2, values } => Self::Grid {
                n1: *n1,
                n2: *n2,
                values: values.iter().map(|v| v * c).collect(),
            },
            Self::Separable { scale, axis1, axis2 } => Self::Separable {
                scale: scale * c,
                axis1: axis1.clone(),
                axis2: axis2.clone(),
            },
        }
    }
}

fn cell_index(t: f64, n: usize) -> usize {
    // right-closed cells: cell j covers (j/n, (j+1)/n]
    let idx = (t * n as f64).ceil() as usize;
    idx.saturating_sub(1).min(n - 1)
}

/// The power-log analytic family
/// `|ln t1|^(g1) |ln t2|^(g2) * t1^(-e1) t2^(-e2)` with
/// `g_i = theta_i - 1/r_i - delta_i` and `e_i` defaulting to `1/p_i`.
///
/// One printed form of this family carries `r_i/p_i` in the power of `t`
/// instead of `1/p_i`; pass the exponent explicitly through
/// [`analytic_power_log`] to get that variant. Negative `g_i` makes the raw
/// formula non-monotone near `t = 1`; the profile freezes the logarithmic
/// factor there (see [`AxisProfile::PowerLog`]) and a sampled monotonicity
/// check still guards the result.
pub fn analytic_example1(
    p: ParamPair,
    r: ParamPair,
    theta: ThetaPair,
    delta: ThetaPair,
) -> Result<Rearrangement2D> {
    if !(theta.t1 > 0.0 && theta.t2 > 0.0) {
        return Err(Error::NonPositiveExponent(theta.t1.min(theta.t2)));
    }
    if !(delta.t1 > 0.0 && delta.t2 > 0.0) {
        return Err(Error::NonPositiveExponent(delta.t1.min(delta.t2)));
    }
    let g1 = theta.t1 - 1.0 / r.a - delta.t1;
    let g2 = theta.t2 - 1.0 / r.b - delta.t2;
    analytic_power_log((1.0 / p.a, 1.0 / p.b), (g1, g2))
}

/// Separable `t^(-e) |ln t|^(g)` rearrangement with explicit exponents.
pub fn analytic_power_log(t_exps: (f64, f64), log_exps: (f64, f64)) -> Result<Rearrangement2D> {
    let axis1 = AxisProfile::power_log(t_exps.0, log_exps.0)?;
    let axis2 = AxisProfile::power_log(t_exps.1, log_exps.1)?;
    for (axis, t_exp) in [(&axis1, t_exps.0), (&axis2, t_exps.1)] {
        if !axis.is_non_increasing(512) {
            return Err(Error::NonMonotone(t_exp));
        }
    }
    Rearrangement2D::separable(1.0, axis1, axis2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(rows: Vec<Vec<f64>>) -> GridFunction2D {
        GridFunction2D::new(rows).unwrap()
    }

    fn grid_values(r: &Rearrangement2D) -> Vec<f64> {
        match r {
            Rearrangement2D::Grid { values, .. } => values.clone(),
            _ => panic!("expected grid"),
        }
    }

    #[test]
    fn small_case_hand_sort() {
        let f = grid(vec![vec![3.0, 1.0], vec![0.0, 2.0]]);
        let r = iterated_rearrangement(&f);
        assert_eq!(grid_values(&r), vec![3.0, 1.0, 2.0, 0.0]);

        let f = grid(vec![vec![1.0, 3.0], vec![2.0, 0.0]]);
        let r = iterated_rearrangement(&f);
        assert_eq!(grid_values(&r), vec![3.0, 1.0, 2.0, 0.0]);
    }

    #[test]
    fn constant_grid_is_fixed_point() {
        let f = grid(vec![vec![2.5; 3]; 4]);
        let r = iterated_rearrangement(&f);
        assert_eq!(grid_values(&r), vec![2.5; 12]);
    }

    #[test]
    fn evaluate_right_closed_cells() {
        let f = grid(vec![vec![3.0, 1.0], vec![0.0, 2.0]]);
        let r = iterated_rearrangement(&f);
        assert_eq!(r.evaluate(0.25, 0.25).unwrap(), 3.0);
        assert_eq!(r.evaluate(0.5, 0.5).unwrap(), 3.0);
        assert_eq!(r.evaluate(0.75, 0.25).unwrap(), 1.0);
        assert!(r.evaluate(0.0, 0.5).is_err());
        assert!(r.evaluate(0.5, 1.5).is_err());
    }

    #[test]
    fn evaluate_analytic_kinds() {
        let c = Rearrangement2D::constant(1.0).unwrap();
        assert_eq!(c.evaluate(0.5, 0.9).unwrap(), 1.0);

        let ind = Rearrangement2D::indicator(0.25, 0.5).unwrap();
        assert_eq!(ind.evaluate(0.3, 0.4).unwrap(), 0.0);
        assert_eq!(ind.evaluate(0.25, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn equimeasurable_accepts_the_rearrangement_and_rejects_raw_input() {
        let f = grid(vec![vec![3.0, 1.0], vec![0.0, 2.0]]);
        let r = iterated_rearrangement(&f);
        assert!(equimeasurable_check(&f, &r).unwrap());

        let not_sorted = Rearrangement2D::Grid {
            n1: 2,
            n2: 2,
            values: vec![3.0, 1.0, 0.0, 2.0],
        };
        assert!(!equimeasurable_check(&f, &not_sorted).unwrap());

        let c = grid(vec![vec![1.0; 2]; 2]);
        let rc = iterated_rearrangement(&c);
        assert!(equimeasurable_check(&c, &rc).unwrap());

        let wrong_shape = Rearrangement2D::Grid {
            n1: 3,
            n2: 2,
            values: vec![0.0; 6],
        };
        assert!(matches!(
            equimeasurable_check(&f, &wrong_shape),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn example1_closed_form_values() {
        let p = ParamPair::new(1.0, 1.0).unwrap();
        let rp = ParamPair::new(1.0, 1.0).unwrap();
        let theta = ThetaPair::new(2.0, 2.0).unwrap();
        let delta = ThetaPair::new(0.5, 0.5).unwrap();
        let r = analytic_example1(p, rp, theta, delta).unwrap();

        // log exponent 0.5 per axis; at t = e^-1 the value is e per axis
        let t = (-1.0f64).exp();
        let v = r.evaluate(t, t).unwrap();
        let expect = std::f64::consts::E * std::f64::consts::E;
        assert!((v - expect).abs() < 1e-12 * expect);

        let t4 = (-4.0f64).exp();
        let v = r.evaluate(t4, t4).unwrap();
        let expect = 4.0 * (8.0f64).exp();
        assert!((v - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn example1_reduces_to_pure_power_when_log_exponent_vanishes() {
        let p = ParamPair::new(1.0, 1.0).unwrap();
        let rp = ParamPair::new(1.0, 1.0).unwrap();
        let theta = ThetaPair::new(1.5, 1.5).unwrap();
        let delta = ThetaPair::new(0.5, 0.5).unwrap();
        let r = analytic_example1(p, rp, theta, delta).unwrap();
        let t = 0.37;
        let v = r.evaluate(t, t).unwrap();
        let expect = (t * t).powf(-1.0);
        assert!((v - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn csv_round_trip() {
        let text = "2,3\n3,1\n0,2\n1,1\n";
        let f = GridFunction2D::from_csv(text.as_bytes()).unwrap();
        assert_eq!(f.shape(), (2, 3));
        assert_eq!(f.row(1), &[0.0, 2.0]);

        assert!(GridFunction2D::from_csv("2,2\n1,2\n".as_bytes()).is_err());
        assert!(GridFunction2D::from_csv("2,1\n1,x\n".as_bytes()).is_err());
        assert!(GridFunction2D::from_csv("2,1\n-1,2\n".as_bytes()).is_err());
    }

    fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..8, 1usize..8).prop_flat_map(|(n1, n2)| {
            proptest::collection::vec(proptest::collection::vec(0.0f64..100.0, n1), n2)
        })
    }

    proptest! {
        #[test]
        fn rearrangement_is_monotone_and_value_preserving(rows in matrix_strategy()) {
            let f = grid(rows.clone());
            let r = iterated_rearrangement(&f);
            prop_assert!(r.is_monotone());

            // global multiset preserved
            let mut before: Vec<f64> = rows.into_iter().flatten().collect();
            let mut after = grid_values(&r);
            before.sort_by(|a, b| a.partial_cmp(b).unwrap());
            after.sort_by(|a, b| a.partial_cmp(b).unwrap());
            prop_assert_eq!(before, after);
        }

        #[test]
        fn rearrangement_is_idempotent(rows in matrix_strategy()) {
            let f = grid(rows);
            let r = iterated_rearrangement(&f);
            let again = iterated_rearrangement(&GridFunction2D::new(
                match &r {
                    Rearrangement2D::Grid { n1, n2, values } =>
                        (0..*n2).map(|i| values[i * n1..(i + 1) * n1].to_vec()).collect(),
                    _ => unreachable!(),
                }
            ).unwrap());
            prop_assert_eq!(r, again);
        }

        #[test]
        fn rearrangement_commutes_with_scaling(rows in matrix_strategy(), c in 0.0f64..50.0) {
            let f = grid(rows.clone());
            let scaled_rows: Vec<Vec<f64>> =
                rows.iter().map(|r| r.iter().map(|v| v * c).collect()).collect();
            let fs = grid(scaled_rows);
            let r = iterated_rearrangement(&f).scaled(c);
            let rs = iterated_rearrangement(&fs);
            prop_assert_eq!(grid_values(&r), grid_values(&rs));
        }
    }
}
