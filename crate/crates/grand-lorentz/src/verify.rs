//! Empirical verification of the embedding and equivalence statements.
//!
//! Each check evaluates a pair of norms over a registered family of test
//! functions, reports the per-function ratios and their maximum (the
//! empirical embedding constant), and re-runs everything at two further
//! grid refinements: a constant that keeps drifting is reported as
//! inconclusive, never as passed. Divergent members become recorded
//! failures rather than aborts — functions outside a space are data.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::{
    dyadic_grand_norm, grand_norm, grand_norm_restricted, grand_objective_ln, grand_weak_norm,
    log_weight_weak_norm, lorentz_norm, weak_lorentz_norm, LogWeightVariant, NormResult,
};
use crate::params::{GrandParams, ParamPair, ThetaPair};
use crate::profile::AxisProfile;
use crate::quadrature::{DyadicTruncation, LogGrid};
use crate::rearrange::{analytic_example1, iterated_rearrangement, GridFunction2D, Rearrangement2D};
use crate::search::SearchConfig;

/// A named, deterministic family of rearrangements.
#[derive(Debug, Clone)]
pub struct TestFamily {
    pub name: String,
    pub description: String,
    pub members: Vec<FamilyMember>,
}

#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub label: String,
    pub rearrangement: Rearrangement2D,
}

impl TestFamily {
    fn new(name: &str, description: &str, members: Vec<FamilyMember>) -> Self {
        Self {
            name: name.into(),
            description: description.into(),
            members,
        }
    }
}

fn member(label: String, rearrangement: Rearrangement2D) -> FamilyMember {
    debug_assert!(rearrangement.is_monotone(), "family member {label} not monotone");
    FamilyMember {
        label,
        rearrangement,
    }
}

/// Deterministic 64-bit generator for the seeded families.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[lo, hi)`.
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let x = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * x
    }
}

fn constants_family() -> TestFamily {
    let values = [1.0, 0.5, 2.0, 5.0, 0.1, 10.0, 0.037, 3.25];
    TestFamily::new(
        "constants",
        "constant functions on the unit square",
        values
            .iter()
            .map(|&c| member(format!("constant={c}"), Rearrangement2D::constant(c).unwrap()))
            .collect(),
    )
}

fn indicators_family() -> TestFamily {
    let e = std::f64::consts::E;
    let sides: [(f64, f64); 12] = [
        (0.5, 0.5),
        (0.25, 0.25),
        (0.25, 0.0625),
        (1.0 / e, 1.0 / e),
        (e.powi(-2), e.powi(-2)),
        (e.powi(-3), 1.0 / e),
        (2f64.powi(-6), 2f64.powi(-2)),
        (2f64.powi(-8), 2f64.powi(-8)),
        (2f64.powi(-10), 2f64.powi(-5)),
        (0.75, 0.5),
        (2f64.powi(-3), 2f64.powi(-7)),
        (2f64.powi(-5), 2f64.powi(-5)),
    ];
    TestFamily::new(
        "indicators",
        "indicators of rectangles anchored at the origin, log-spaced sides",
        sides
            .iter()
            .map(|&(a1, a2)| {
                member(
                    format!("indicator=({a1:.6e},{a2:.6e})"),
                    Rearrangement2D::indicator(a1, a2).unwrap(),
                )
            })
            .collect(),
    )
}

fn random_grid(rng: &mut SplitMix64, n1: usize, n2: usize) -> Rearrangement2D {
    let rows: Vec<Vec<f64>> = (0..n2)
        .map(|_| (0..n1).map(|_| rng.uniform(0.0, 8.0)).collect())
        .collect();
    iterated_rearrangement(&GridFunction2D::new(rows).unwrap())
}

fn random_dyadic_steps(rng: &mut SplitMix64, blocks: usize) -> Rearrangement2D {
    let axis = |rng: &mut SplitMix64| {
        let mut levels: Vec<f64> = (0..=blocks).map(|_| rng.uniform(0.05, 4.0)).collect();
        levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut breaks: Vec<f64> = (0..blocks).map(|j| 2f64.powi(-(blocks as i32) + j as i32)).collect();
        breaks.push(1.0);
        AxisProfile::steps(breaks, levels).unwrap()
    };
    let a1 = axis(rng);
    let a2 = axis(rng);
    Rearrangement2D::separable(1.0, a1, a2).unwrap()
}

fn steps_family() -> TestFamily {
    let mut rng = SplitMix64(0x5eed_0001);
    let mut members = Vec::new();
    for (k, n) in [(0usize, 4usize), (1, 8), (2, 16), (3, 8), (4, 16), (5, 4)] {
        members.push(member(format!("grid-steps-{k}"), random_grid(&mut rng, n, n)));
    }
    for k in 0..6 {
        members.push(member(
            format!("dyadic-steps-{k}"),
            random_dyadic_steps(&mut rng, 8),
        ));
    }
    TestFamily::new(
        "steps",
        "random non-increasing step functions: rearranged uniform grids and separable dyadic staircases",
        members,
    )
}

fn power_log_family() -> TestFamily {
    // subcritical power: t^(-0.3) stays inside every space the harness
    // tests (p <= 3.33), so ratios are informative rather than vacuous; the
    // critical exponent t^(-1/p) is probed separately by `verify_example1`
    let mut members = Vec::new();
    for &g1 in &[-0.5, 0.25, 1.0] {
        for &g2 in &[-0.5, 0.25, 1.0] {
            members.push(member(
                format!("power-log g=({g1},{g2})"),
                crate::rearrange::analytic_power_log((0.3, 0.3), (g1, g2)).unwrap(),
            ));
        }
    }
    TestFamily::new(
        "power-log",
        "analytic profiles t^(-0.3) |ln t|^g per axis over a lattice of log exponents",
        members,
    )
}

/// The four registered families: constants, rectangle indicators, random
/// steps, and the analytic power-log lattice.
pub fn standard_families() -> Vec<TestFamily> {
    vec![
        constants_family(),
        indicators_family(),
        steps_family(),
        power_log_family(),
    ]
}

/// Serializable descriptor of a norm, used both to evaluate it and to echo
/// the exact functional into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum NormKind {
    Lorentz {
        p: ParamPair,
        q: ParamPair,
    },
    WeakLorentz {
        p: ParamPair,
    },
    Grand {
        p: ParamPair,
        q: ParamPair,
        theta: ThetaPair,
    },
    GrandWeak {
        p: ParamPair,
        theta: ThetaPair,
    },
    GrandRestricted {
        p: ParamPair,
        q: ParamPair,
        theta: ThetaPair,
        delta: (f64, f64),
    },
    DyadicGrand {
        p: ParamPair,
        tau: ParamPair,
        theta: ThetaPair,
        depth: u32,
    },
    LogWeightWeak {
        p: ParamPair,
        theta: ThetaPair,
        guarded: bool,
    },
}

impl NormKind {
    pub fn evaluate(
        &self,
        r: &Rearrangement2D,
        grid: &LogGrid,
        cfg: &SearchConfig,
    ) -> Result<NormResult> {
        match self {
            NormKind::Lorentz { p, q } => lorentz_norm(r, *p, *q, grid),
            NormKind::WeakLorentz { p } => weak_lorentz_norm(r, *p, grid),
            NormKind::Grand { p, q, theta } => {
                let gp = GrandParams::new(*p, *q, *theta)?;
                grand_norm(r, &gp, grid, cfg)
            }
            NormKind::GrandWeak { p, theta } => {
                let gp = GrandParams::new(
                    *p,
                    ParamPair::new(f64::INFINITY, f64::INFINITY)?,
                    *theta,
                )?;
                grand_weak_norm(r, &gp, grid, cfg)
            }
            NormKind::GrandRestricted { p, q, theta, delta } => {
                let gp = GrandParams::new(*p, *q, *theta)?;
                grand_norm_restricted(r, &gp, *delta, grid, cfg)
            }
            NormKind::DyadicGrand { p, tau, theta, depth } => {
                let gp = GrandParams::new(*p, *tau, *theta)?;
                dyadic_grand_norm(r, &gp, *tau, DyadicTruncation::new(*depth)?, cfg)
            }
            NormKind::LogWeightWeak { p, theta, guarded } => log_weight_weak_norm(
                r,
                *p,
                *theta,
                grid,
                if *guarded {
                    LogWeightVariant::Guarded
                } else {
                    LogWeightVariant::Literal
                },
            ),
        }
    }
}

/// Evaluation settings echoed into every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportSettings {
    pub grid: LogGrid,
    pub search: SearchConfig,
    /// Grid refinements for the stability check (two doublings).
    pub stability_levels: u32,
}

impl Default for ReportSettings {
    fn default() -> Self {
        Self {
            grid: LogGrid::new(crate::quadrature::DEFAULT_T_MIN, 512).unwrap(),
            search: SearchConfig {
                coarse_nodes: 48,
                refine_passes: 2,
                golden_evals: 32,
                rel_tol: 1e-6,
            },
            stability_levels: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberOutcome {
    pub index: usize,
    pub label: String,
    pub left_value: Option<f64>,
    pub right_value: Option<f64>,
    /// `left / right` at the finest level.
    pub ratio: Option<f64>,
    pub converged: bool,
    /// Counted toward the empirical constant. Members whose norms did not
    /// converge — typically functions outside one of the spaces — stay in
    /// the report as data but are excluded here.
    pub included: bool,
    pub error: Option<String>,
}

/// Report of one embedding check: per-member ratios, the empirical constant
/// and its drift across grid refinements.
#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingReport {
    pub left: NormKind,
    pub right: NormKind,
    pub family: String,
    pub settings: ReportSettings,
    pub members: Vec<MemberOutcome>,
    /// Empirical constant: max ratio over the included members at the
    /// finest level.
    pub c_hat: Option<f64>,
    /// One constant per refinement level, coarse to fine.
    pub c_hat_levels: Vec<f64>,
    /// Under 5% drift between consecutive levels.
    pub stable: bool,
    /// Hard errors (divergent or failed evaluations).
    pub failures: Vec<String>,
    /// Members left out of the constant, with the reason.
    pub excluded: Vec<String>,
    pub notes: Vec<String>,
}

impl EmbeddingReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// All members finite with ratios at most `bound` (with slack for the
    /// search resolution).
    pub fn ratios_at_most(&self, bound: f64) -> bool {
        self.members
            .iter()
            .all(|m| m.ratio.is_some_and(|r| r <= bound))
    }
}

const STABILITY_DRIFT: f64 = 0.05;

/// Evaluate `left / right` for every family member at each refinement
/// level; the empirical constant is the maximal ratio.
pub fn check_embedding(
    left: &NormKind,
    right: &NormKind,
    family: &TestFamily,
    settings: &ReportSettings,
) -> Result<EmbeddingReport> {
    if family.members.is_empty() {
        return Err(Error::FamilyEmpty(family.name.clone()));
    }
    let levels: Vec<LogGrid> = {
        let mut g = settings.grid;
        let mut out = vec![g];
        for _ in 1..settings.stability_levels.max(1) {
            g = g.refined();
            out.push(g);
        }
        out
    };

    // per member, per level: (left, right, converged) or an error string
    type LevelValues = Vec<std::result::Result<(f64, f64, bool), String>>;
    let evaluated: Vec<LevelValues> = family
        .members
        .par_iter()
        .map(|m| {
            levels
                .iter()
                .map(|grid| {
                    let l = left.evaluate(&m.rearrangement, grid, &settings.search);
                    let r = right.evaluate(&m.rearrangement, grid, &settings.search);
                    match (l, r) {
                        (Ok(lv), Ok(rv)) => Ok((
                            lv.value,
                            rv.value,
                            lv.converged && rv.converged,
                        )),
                        (Err(e), _) => Err(format!("left: {e}")),
                        (_, Err(e)) => Err(format!("right: {e}")),
                    }
                })
                .collect()
        })
        .collect();

    let finest = levels.len() - 1;
    let mut members = Vec::with_capacity(family.members.len());
    let mut failures = Vec::new();
    let mut excluded = Vec::new();
    let mut c_hat_levels = vec![f64::NEG_INFINITY; levels.len()];
    let mut any_included = false;
    for (idx, (m, per_level)) in family.members.iter().zip(&evaluated).enumerate() {
        match &per_level[finest] {
            Ok((lv, rv, conv)) => {
                let ratio = if *rv > 0.0 {
                    Some(lv / rv)
                } else if *lv == 0.0 {
                    None // 0/0: ratio carries no information
                } else {
                    Some(f64::INFINITY)
                };
                let included = *conv && ratio.is_some_and(f64::is_finite);
                if included {
                    any_included = true;
                    for (level, res) in per_level.iter().enumerate() {
                        if let Ok((l, r, _)) = res {
                            if *r > 0.0 && l / r > c_hat_levels[level] {
                                c_hat_levels[level] = l / r;
                            }
                        }
                    }
                } else if ratio == Some(f64::INFINITY) {
                    failures.push(format!(
                        "member {idx} ({}): infinite ratio (right norm is zero)",
                        m.label
                    ));
                } else {
                    excluded.push(format!(
                        "member {idx} ({}): norm did not converge under refinement \
                         (outside the space or truncation-limited)",
                        m.label
                    ));
                }
                members.push(MemberOutcome {
                    index: idx,
                    label: m.label.clone(),
                    left_value: Some(*lv),
                    right_value: Some(*rv),
                    ratio,
                    converged: *conv,
                    included,
                    error: None,
                });
            }
            Err(e) => {
                failures.push(format!("member {idx} ({}): {e}", m.label));
                members.push(MemberOutcome {
                    index: idx,
                    label: m.label.clone(),
                    left_value: None,
                    right_value: None,
                    ratio: None,
                    converged: false,
                    included: false,
                    error: Some(e.clone()),
                });
            }
        }
    }

    let have_constant = any_included && c_hat_levels.iter().all(|c| c.is_finite());
    let stable = have_constant
        && c_hat_levels
            .windows(2)
            .all(|w| (w[1] - w[0]).abs() <= STABILITY_DRIFT * w[0].abs().max(f64::MIN_POSITIVE));
    let c_hat = have_constant.then(|| c_hat_levels[finest]);
    Ok(EmbeddingReport {
        left: left.clone(),
        right: right.clone(),
        family: family.name.clone(),
        settings: *settings,
        members,
        c_hat,
        c_hat_levels: if have_constant { c_hat_levels } else { vec![] },
        stable,
        failures,
        excluded,
        notes: vec![],
    })
}

/// Both embeddings of the chain: the classical norm sits between the grand
/// norms with negative and positive exponent.
#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    /// `L -> GL^theta`: ratios `||f||_{GL^theta} / ||f||_L`, at most one.
    pub right_embedding: EmbeddingReport,
    /// `GL^{-theta} -> L`: finite stable constant.
    pub left_embedding: EmbeddingReport,
}

impl ChainReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Chain check at given `(p, q, theta)` with `theta > 0`.
pub fn verify_theorem1(
    p: ParamPair,
    q: ParamPair,
    theta: ThetaPair,
    family: &TestFamily,
    settings: &ReportSettings,
) -> Result<ChainReport> {
    // theta = 0 is allowed: all three spaces coincide and the chain is
    // trivially verified
    if !(theta.t1 >= 0.0 && theta.t2 >= 0.0) {
        return Err(Error::ParameterRelationViolated(
            "theta must be non-negative componentwise".into(),
        ));
    }
    let lorentz = NormKind::Lorentz { p, q };
    let grand_pos = NormKind::Grand { p, q, theta };
    let grand_neg = NormKind::Grand {
        p,
        q,
        theta: ThetaPair::new(-theta.t1, -theta.t2)?,
    };
    let right_embedding = check_embedding(&grand_pos, &lorentz, family, settings)?;
    let left_embedding = check_embedding(&lorentz, &grand_neg, family, settings)?;
    Ok(ChainReport {
        right_embedding,
        left_embedding,
    })
}

/// The `p = q` corollary of the chain.
pub fn verify_theorem1_corollary(
    p: ParamPair,
    theta: ThetaPair,
    family: &TestFamily,
    settings: &ReportSettings,
) -> Result<ChainReport> {
    verify_theorem1(p, p, theta, family, settings)
}

/// Monotonicity in the grand exponent: `theta <= s` embeds `GL^theta` into
/// `GL^s` with constant one. Verifies the embedding and the pointwise
/// objective dominance on a shared epsilon grid.
pub fn verify_theorem3(
    p: ParamPair,
    q: ParamPair,
    theta: ThetaPair,
    s: ThetaPair,
    family: &TestFamily,
    settings: &ReportSettings,
) -> Result<EmbeddingReport> {
    if !(theta.t1 >= 0.0 && theta.t2 >= 0.0 && theta.t1 <= s.t1 && theta.t2 <= s.t2) {
        return Err(Error::ParameterRelationViolated(
            "need 0 <= theta <= s componentwise".into(),
        ));
    }
    let left = NormKind::Grand { p, q, theta: s };
    let right = NormKind::Grand { p, q, theta };
    let mut report = check_embedding(&left, &right, family, settings)?;

    // pointwise dominance of the epsilon objectives on a shared grid
    let gp_s = GrandParams::new(p, q, s)?;
    let gp_t = GrandParams::new(p, q, theta)?;
    let eps_nodes = crate::search::log_spaced(1e-6, 1.0, 16);
    let mut violations = 0usize;
    for m in &family.members {
        for &e1 in &eps_nodes {
            for &e2 in &eps_nodes {
                let hi = grand_objective_ln(&m.rearrangement, &gp_t, (e1, e2), &settings.grid);
                let lo = grand_objective_ln(&m.rearrangement, &gp_s, (e1, e2), &settings.grid);
                if lo > hi + 1e-9 {
                    violations += 1;
                }
            }
        }
    }
    if violations > 0 {
        report
            .failures
            .push(format!("objective dominance violated at {violations} grid points"));
    } else {
        report.notes.push(format!(
            "epsilon-objective dominance verified on {}x{} shared grid points per member",
            eps_nodes.len(),
            eps_nodes.len()
        ));
    }
    Ok(report)
}

/// Monotonicity in the inner integral exponents: `q < rq` embeds
/// `GL^theta_{p,q}` into `GL^theta_{p,rq}`.
pub fn verify_theorem4(
    p: ParamPair,
    q: ParamPair,
    rq: ParamPair,
    theta: ThetaPair,
    family: &TestFamily,
    settings: &ReportSettings,
) -> Result<EmbeddingReport> {
    if !(q.a < rq.a && q.b < rq.b) {
        return Err(Error::ParameterRelationViolated(
            "need q < rq componentwise".into(),
        ));
    }
    let left = NormKind::Grand { p, q: rq, theta };
    let right = NormKind::Grand { p, q, theta };
    check_embedding(&left, &right, family, settings)
}

/// Restricting the epsilon range to `(0, delta]` changes the norm by at
/// most the factor `eta^|theta|` per axis, where `eta` rescales `delta` to
/// the full box edge. Ratios are `full / restricted`.
pub fn verify_theorem5(
    p: ParamPair,
    q: ParamPair,
    theta: ThetaPair,
    delta: (f64, f64),
    family: &TestFamily,
    settings: &ReportSettings,
) -> Result<EmbeddingReport> {
    let gp = GrandParams::new(p, q, theta)?;
    let full_hi = gp.eps_hi();
    if !(delta.0 > 0.0 && delta.1 > 0.0 && delta.0 <= full_hi.0 && delta.1 <= full_hi.1) {
        return Err(Error::ParameterRelationViolated(format!(
            "delta {delta:?} must lie inside the regime box {full_hi:?}"
        )));
    }
    let left = NormKind::Grand { p, q, theta };
    let right = NormKind::GrandRestricted { p, q, theta, delta };
    let mut report = check_embedding(&left, &right, family, settings)?;

    let eta = (full_hi.0 / delta.0, full_hi.1 / delta.1);
    let positive = theta.t1 >= 0.0;
    let bound = eta.0.powf(theta.t1.abs()) * eta.1.powf(theta.t2.abs());
    let slack = 1.0 + 1e-6;
    for m in &report.members {
        let Some(ratio) = m.ratio else { continue };
        // sup regime: restricted <= full <= eta^theta * restricted;
        // inf regime: full <= restricted <= eta^|theta| * full
        let ok = if positive {
            ratio >= 1.0 / slack && ratio <= bound * slack
        } else {
            ratio <= slack && ratio >= 1.0 / (bound * slack)
        };
        if !ok {
            report.failures.push(format!(
                "member {} ({}): ratio {ratio} outside the rescaling bound [{}, {}]",
                m.index,
                m.label,
                if positive { 1.0 / slack } else { 1.0 / (bound * slack) },
                if positive { bound * slack } else { slack },
            ));
        }
    }
    report.notes.push(format!(
        "rescaling factors eta = ({:.6}, {:.6}), bound eta^|theta| = {bound:.6}",
        eta.0, eta.1
    ));
    Ok(report)
}

/// Trading integral exponents against the grand exponent: with
/// `lambda - theta = 1/q - 1/tau` componentwise, `q < tau`, and
/// `theta < lambda`, the `tau`-norm with exponent `theta` dominates the
/// `q`-norm with exponent `lambda`.
pub fn verify_theorem6(
    p: ParamPair,
    q: ParamPair,
    tau: ParamPair,
    theta: ThetaPair,
    lam: ThetaPair,
    family: &TestFamily,
    settings: &ReportSettings,
) -> Result<EmbeddingReport> {
    if !(theta.t1 < lam.t1 && theta.t2 < lam.t2) {
        return Err(Error::ParameterRelationViolated(
            "need theta < lambda componentwise".into(),
        ));
    }
    if !(q.a < tau.a && q.b < tau.b) {
        return Err(Error::ParameterRelationViolated(
            "need q < tau componentwise".into(),
        ));
    }
    let rel1 = (lam.t1 - theta.t1) - (1.0 / q.a - 1.0 / tau.a);
    let rel2 = (lam.t2 - theta.t2) - (1.0 / q.b - 1.0 / tau.b);
    if rel1.abs() > 1e-12 || rel2.abs() > 1e-12 {
        return Err(Error::ParameterRelationViolated(format!(
            "lambda - theta must equal 1/q - 1/tau per axis (off by {rel1:.3e}, {rel2:.3e})"
        )));
    }
    let left = NormKind::Grand { p, q, theta: lam };
    let right = NormKind::Grand { p, q: tau, theta };
    check_embedding(&left, &right, family, settings)
}

/// Dyadic-sum versus continuous grand norm, member by member, against the
/// two-sided bracket `2^((1/p1 + e1 + 1) + (1/p2 + e2 + 1))` evaluated at
/// the found extremal parameters.
#[derive(Debug, Clone, Serialize)]
pub struct DyadicComparison {
    pub index: usize,
    pub label: String,
    pub continuous: f64,
    pub dyadic: f64,
    pub ratio: f64,
    pub bracket: f64,
    pub within: bool,
    pub tail_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DyadicReport {
    pub p: ParamPair,
    pub tau: ParamPair,
    pub theta: ThetaPair,
    pub depth: u32,
    pub family: String,
    pub settings: ReportSettings,
    pub members: Vec<DyadicComparison>,
    pub failures: Vec<String>,
    pub all_within: bool,
    pub max_tail_fraction: f64,
}

impl DyadicReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

pub fn verify_theorem7(
    p: ParamPair,
    tau: ParamPair,
    theta: ThetaPair,
    depth: u32,
    family: &TestFamily,
    settings: &ReportSettings,
) -> Result<DyadicReport> {
    if family.members.is_empty() {
        return Err(Error::FamilyEmpty(family.name.clone()));
    }
    let gp = GrandParams::new(p, tau, theta)?;
    let trunc = DyadicTruncation::new(depth)?;
    let (rb1, rb2) = p.recip();
    let results: Vec<std::result::Result<DyadicComparison, String>> = family
        .members
        .par_iter()
        .enumerate()
        .map(|(index, m)| {
            let cont = grand_norm(&m.rearrangement, &gp, &settings.grid, &settings.search)
                .map_err(|e| format!("member {index} ({}): continuous: {e}", m.label))?;
            let dyad = dyadic_grand_norm(&m.rearrangement, &gp, tau, trunc, &settings.search)
                .map_err(|e| format!("member {index} ({}): dyadic: {e}", m.label))?;
            if cont.value == 0.0 && dyad.value == 0.0 {
                return Err(format!("member {index} ({}): zero norms", m.label));
            }
            let (ce1, ce2) = cont.extremal_eps.unwrap_or((1.0, 1.0));
            let (de1, de2) = dyad.extremal_eps.unwrap_or((1.0, 1.0));
            let e1 = ce1.max(de1);
            let e2 = ce2.max(de2);
            let bracket = 2f64.powf((rb1 + e1 + 1.0) + (rb2 + e2 + 1.0));
            let ratio = dyad.value / cont.value;
            Ok(DyadicComparison {
                index,
                label: m.label.clone(),
                continuous: cont.value,
                dyadic: dyad.value,
                ratio,
                bracket,
                within: ratio <= bracket && ratio >= 1.0 / bracket,
                tail_fraction: dyad.diagnostics.tail_fraction,
            })
        })
        .collect();

    let mut members = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(c) => members.push(c),
            Err(e) => failures.push(e),
        }
    }
    let all_within = failures.is_empty() && members.iter().all(|c| c.within);
    let max_tail_fraction = members
        .iter()
        .map(|c| c.tail_fraction)
        .fold(0.0f64, f64::max);
    Ok(DyadicReport {
        p,
        tau,
        theta,
        depth,
        family: family.name.clone(),
        settings: *settings,
        members,
        failures,
        all_within,
        max_tail_fraction,
    })
}

/// Membership probe for the analytic power-log family.
#[derive(Debug, Clone, Serialize)]
pub struct Example1Outcome {
    pub value: f64,
    pub extremal_eps: Option<(f64, f64)>,
    /// Relative drift between the two refinement levels.
    pub drift: f64,
    /// Finite and stable under refinement of both the grid and the search.
    pub member: bool,
    /// Raised when `delta` sits close to the divergence boundary.
    pub near_critical: bool,
}

/// True membership requires a finite norm that moves less than 5% when the
/// quadrature deepens and the epsilon search doubles its resolution.
pub fn verify_example1(
    p: ParamPair,
    rpar: ParamPair,
    theta: ThetaPair,
    delta: ThetaPair,
    settings: &ReportSettings,
) -> Result<Example1Outcome> {
    let r = analytic_example1(p, rpar, theta, delta)?;
    let gp = GrandParams::new(p, rpar, theta)?;
    let coarse = grand_norm(&r, &gp, &settings.grid, &settings.search)?;
    let denser = SearchConfig {
        coarse_nodes: settings.search.coarse_nodes * 2,
        ..settings.search
    };
    let fine = grand_norm(&r, &gp, &settings.grid.refined(), &denser)?;
    let drift = (fine.value - coarse.value).abs() / coarse.value.abs().max(f64::MIN_POSITIVE);
    let member = fine.value.is_finite() && drift < STABILITY_DRIFT;
    let near_critical = delta.t1.min(delta.t2) <= 0.05;
    Ok(Example1Outcome {
        value: fine.value,
        extremal_eps: fine.extremal_eps,
        drift,
        member,
        near_critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_settings() -> ReportSettings {
        ReportSettings {
            grid: LogGrid::new(crate::quadrature::DEFAULT_T_MIN, 256).unwrap(),
            search: SearchConfig {
                coarse_nodes: 32,
                refine_passes: 2,
                golden_evals: 24,
                rel_tol: 1e-6,
            },
            stability_levels: 3,
        }
    }

    #[test]
    fn families_are_monotone_and_sized() {
        let fams = standard_families();
        assert_eq!(fams.len(), 4);
        let total: usize = fams.iter().map(|f| f.members.len()).sum();
        assert!(total >= 40, "only {total} members registered");
        for f in &fams {
            for m in &f.members {
                assert!(m.rearrangement.is_monotone(), "{} / {}", f.name, m.label);
            }
        }
    }

    #[test]
    fn families_are_deterministic() {
        let a = standard_families();
        let b = standard_families();
        for (fa, fb) in a.iter().zip(&b) {
            for (ma, mb) in fa.members.iter().zip(&fb.members) {
                assert_eq!(ma.rearrangement, mb.rearrangement);
            }
        }
    }

    #[test]
    fn identity_embedding_has_constant_one() {
        let p = ParamPair::new(2.0, 2.0).unwrap();
        let q = ParamPair::new(2.0, 2.0).unwrap();
        let kind = NormKind::Lorentz { p, q };
        let family = indicators_family();
        let report = check_embedding(&kind, &kind, &family, &small_settings()).unwrap();
        assert!(report.stable);
        let c = report.c_hat.unwrap();
        assert!((c - 1.0).abs() < 1e-12, "c_hat = {c}");
        for m in &report.members {
            assert!((m.ratio.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_family_is_rejected() {
        let fam = TestFamily::new("empty", "", vec![]);
        let p = ParamPair::new(2.0, 2.0).unwrap();
        let kind = NormKind::WeakLorentz { p };
        assert!(matches!(
            check_embedding(&kind, &kind, &fam, &small_settings()),
            Err(Error::FamilyEmpty(_))
        ));
    }

    #[test]
    fn theorem3_gate_and_equal_exponents() {
        let p = ParamPair::new(2.0, 2.0).unwrap();
        let q = ParamPair::new(2.0, 2.0).unwrap();
        let th = ThetaPair::new(1.0, 1.0).unwrap();
        // theta > s violates the gate
        let s_bad = ThetaPair::new(0.5, 0.5).unwrap();
        assert!(matches!(
            verify_theorem3(p, q, th, s_bad, &constants_family(), &small_settings()),
            Err(Error::ParameterRelationViolated(_))
        ));
        // theta = s: identical spaces, constant exactly one
        let report =
            verify_theorem3(p, q, th, th, &constants_family(), &small_settings()).unwrap();
        assert!(report.failures.is_empty());
        assert!((report.c_hat.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn theorem1_zero_theta_chain_is_trivial() {
        let p = ParamPair::new(2.0, 2.0).unwrap();
        let chain = verify_theorem1(
            p,
            p,
            ThetaPair::new(0.0, 0.0).unwrap(),
            &indicators_family(),
            &small_settings(),
        )
        .unwrap();
        // all three norms coincide up to the epsilon floor
        for m in &chain.right_embedding.members {
            assert!((m.ratio.unwrap() - 1.0).abs() < 1e-3);
        }
        for m in &chain.left_embedding.members {
            assert!((m.ratio.unwrap() - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn theorem3_zero_theta_ratios_stay_below_one() {
        let p = ParamPair::new(2.0, 2.0).unwrap();
        let q = ParamPair::new(2.0, 2.0).unwrap();
        let rep = verify_theorem3(
            p,
            q,
            ThetaPair::new(0.0, 0.0).unwrap(),
            ThetaPair::new(1.0, 1.0).unwrap(),
            &indicators_family(),
            &small_settings(),
        )
        .unwrap();
        assert!(rep.failures.is_empty(), "{:?}", rep.failures);
        assert!(rep.c_hat.unwrap() <= 1.0 + 1e-6);
    }

    #[test]
    fn theorem5_full_box_delta_changes_nothing() {
        let p = ParamPair::new(2.0, 2.0).unwrap();
        let q = ParamPair::new(2.0, 2.0).unwrap();
        let th = ThetaPair::new(1.0, 1.0).unwrap();
        let rep = verify_theorem5(p, q, th, (1.0, 1.0), &constants_family(), &small_settings())
            .unwrap();
        for m in &rep.members {
            assert!((m.ratio.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn theorem6_constants_match_the_closed_form() {
        // for constants the norms factor per axis; dense scans of the
        // closed-form objectives give an independent ratio oracle
        let axis_sup = |p: f64, q: f64, th: f64| -> f64 {
            let mut best = 0.0f64;
            for k in 0..100_000 {
                let eps = 1e-6f64.powf(1.0 - k as f64 / 99_999.0);
                best = best.max(eps.powf(th) / ((1.0 / p + eps) * q).powf(1.0 / q));
            }
            best
        };
        let (p, q, tau) = (2.0, 1.0, 2.0);
        let (th, lam) = (1.0, 1.5); // lam - th = 1/q - 1/tau = 0.5
        let expect = (axis_sup(p, q, lam) / axis_sup(p, tau, th)).powi(2);

        let pp = ParamPair::new(p, p).unwrap();
        let rep = verify_theorem6(
            pp,
            ParamPair::new(q, q).unwrap(),
            ParamPair::new(tau, tau).unwrap(),
            ThetaPair::new(th, th).unwrap(),
            ThetaPair::new(lam, lam).unwrap(),
            &constants_family(),
            &small_settings(),
        )
        .unwrap();
        for m in &rep.members {
            let ratio = m.ratio.unwrap();
            assert!(
                (ratio - expect).abs() < 1e-4 * expect,
                "ratio {ratio} vs closed form {expect}"
            );
        }
    }

    #[test]
    fn theorem5_negative_regime_bounds() {
        // restricted >= full for the infimum; ratio full/restricted within
        // [1/eta^|theta|, 1] with eta = (1/p)/delta = 2
        let p = ParamPair::new(2.0, 2.0).unwrap();
        let q = ParamPair::new(2.0, 2.0).unwrap();
        let th = ThetaPair::new(-1.0, -1.0).unwrap();
        let rep = verify_theorem5(p, q, th, (0.25, 0.25), &constants_family(), &small_settings())
            .unwrap();
        assert!(rep.failures.is_empty(), "{:?}", rep.failures);
        assert!(rep.stable);
        for m in &rep.members {
            let ratio = m.ratio.unwrap();
            assert!(ratio <= 1.0 + 1e-6 && ratio >= 0.25 / (1.0 + 1e-6), "ratio {ratio}");
        }
        // delta equal to the box edge restricts nothing
        let rep = verify_theorem5(p, q, th, (0.5, 0.5), &constants_family(), &small_settings())
            .unwrap();
        for m in &rep.members {
            assert!((m.ratio.unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn theorem1_corollary_sets_q_to_p() {
        let p = ParamPair::new(2.0, 2.0).unwrap();
        let th = ThetaPair::new(1.0, 1.0).unwrap();
        let chain = verify_theorem1_corollary(p, th, &constants_family(), &small_settings())
            .unwrap();
        assert!(chain.right_embedding.ratios_at_most(1.0 + 1e-9));
        assert!(chain.left_embedding.stable);
        match &chain.right_embedding.left {
            NormKind::Grand { q, .. } => assert_eq!(*q, p),
            other => panic!("unexpected norm kind {other:?}"),
        }
    }

    #[test]
    fn every_norm_kind_evaluates() {
        let s = small_settings();
        let r = crate::rearrange::Rearrangement2D::indicator(0.25, 0.25).unwrap();
        let p = ParamPair::new(2.0, 2.0).unwrap();
        let q = ParamPair::new(2.0, 2.0).unwrap();
        let th = ThetaPair::new(1.0, 1.0).unwrap();
        let kinds = [
            NormKind::Lorentz { p, q },
            NormKind::WeakLorentz { p },
            NormKind::Grand { p, q, theta: th },
            NormKind::GrandWeak { p, theta: th },
            NormKind::GrandRestricted { p, q, theta: th, delta: (0.5, 0.5) },
            NormKind::DyadicGrand { p, tau: q, theta: th, depth: 32 },
            NormKind::LogWeightWeak { p, theta: th, guarded: true },
        ];
        for kind in kinds {
            let out = kind.evaluate(&r, &s.grid, &s.search).unwrap();
            assert!(out.value.is_finite() && out.value > 0.0, "{kind:?}");
        }
    }

    #[test]
    fn theorem6_relation_gate() {
        let p = ParamPair::new(2.0, 2.0).unwrap();
        let q = ParamPair::new(1.0, 1.0).unwrap();
        let tau = ParamPair::new(2.0, 2.0).unwrap();
        let th = ThetaPair::new(1.0, 1.0).unwrap();
        let lam_bad = ThetaPair::new(1.25, 1.25).unwrap(); // 1/q - 1/tau = 0.5
        assert!(matches!(
            verify_theorem6(p, q, tau, th, lam_bad, &constants_family(), &small_settings()),
            Err(Error::ParameterRelationViolated(_))
        ));
    }
}
