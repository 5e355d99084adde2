//! Exponent pairs, regime selection, and validation.
//!
//! Every norm in this crate is driven by a triple `(p, q, theta)` of
//! two-component exponent vectors. The sign pattern of `theta` together
//! with finiteness of `p` selects one of three regimes; anything else is
//! rejected up front so the norm evaluators never see an undefined
//! combination.

use serde::Serialize;

use crate::error::{Error, Result};

/// A two-component exponent vector with components in `(0, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamPair {
    pub a: f64,
    pub b: f64,
}

impl ParamPair {
    /// Both components must be strictly positive; `f64::INFINITY` is allowed.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        for c in [a, b] {
            if c.is_nan() || c <= 0.0 {
                return Err(Error::NonPositiveExponent(c));
            }
        }
        Ok(Self { a, b })
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }

    pub fn is_infinite(&self) -> bool {
        self.a.is_infinite() && self.b.is_infinite()
    }

    /// Componentwise reciprocal, with `1/inf = 0`.
    pub fn recip(&self) -> (f64, f64) {
        (self.a.recip(), self.b.recip())
    }
}

/// A two-component real exponent vector; components may be negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaPair {
    pub t1: f64,
    pub t2: f64,
}

impl ThetaPair {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        for c in [t1, t2] {
            if !c.is_finite() {
                return Err(Error::NonFiniteValue { row: 0, col: 0 });
            }
        }
        Ok(Self { t1, t2 })
    }

    pub fn is_nonnegative(&self) -> bool {
        self.t1 >= 0.0 && self.t2 >= 0.0
    }

    pub fn is_negative(&self) -> bool {
        self.t1 < 0.0 && self.t2 < 0.0
    }
}

/// The three defined parameter regimes.
///
/// * `PosTheta` — `theta >= 0` componentwise, `p` finite; the norm takes a
///   supremum over `eps in (0,1]^2` with weight exponent `1/p + eps`.
/// * `PosThetaPInf` — `theta > 0` componentwise and `p = (inf, inf)`; the
///   weight exponent is `eps` alone.
/// * `NegTheta` — `theta < 0` componentwise, `p` finite; the norm takes an
///   infimum over `eps in (0, 1/p]` with weight exponent `1/p - eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    PosTheta,
    PosThetaPInf,
    NegTheta,
}

/// Full descriptor of a grand norm: `(p, q, theta)` plus the derived regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrandParams {
    pub p: ParamPair,
    pub q: ParamPair,
    pub theta: ThetaPair,
    pub regime: Regime,
}

impl GrandParams {
    /// Resolve the regime or report the violated constraint.
    ///
    /// Mixed-sign `theta` and mixed finite/infinite `p` or `q` are rejected
    /// rather than given ad hoc semantics.
    pub fn new(p: ParamPair, q: ParamPair, theta: ThetaPair) -> Result<Self> {
        if !(theta.is_nonnegative() || theta.is_negative()) {
            return Err(Error::MixedThetaSigns(theta.t1, theta.t2));
        }
        if !p.is_finite() && !p.is_infinite() {
            return Err(Error::MixedPInfinity(p.a, p.b));
        }
        if !q.is_finite() && !q.is_infinite() {
            return Err(Error::MixedQInfinity(q.a, q.b));
        }
        let regime = if p.is_infinite() {
            if theta.t1 > 0.0 && theta.t2 > 0.0 {
                Regime::PosThetaPInf
            } else {
                return Err(Error::InfPWithNonPosTheta);
            }
        } else if theta.is_nonnegative() {
            Regime::PosTheta
        } else {
            Regime::NegTheta
        };
        Ok(Self { p, q, theta, regime })
    }

    /// Re-run the regime resolution; idempotent on already-valid parameters.
    pub fn validate(self) -> Result<Self> {
        Self::new(self.p, self.q, self.theta)
    }

    /// True when `q = (inf, inf)`, which routes evaluation to the weak form.
    pub fn is_weak(&self) -> bool {
        self.q.is_infinite()
    }

    /// Base weight exponent per axis: `1/p` in the finite-`p` regimes, `0`
    /// when `p` is infinite.
    pub fn weight_base(&self) -> (f64, f64) {
        self.p.recip()
    }

    /// Upper corner of the admissible epsilon box: `(1,1)` for the sup
    /// regimes, `(1/p1, 1/p2)` for the inf regime.
    pub fn eps_hi(&self) -> (f64, f64) {
        match self.regime {
            Regime::PosTheta | Regime::PosThetaPInf => (1.0, 1.0),
            Regime::NegTheta => self.p.recip(),
        }
    }
}

/// Componentwise Hölder conjugate: `1/p + 1/p' = 1`, with `1' = inf` and
/// `inf' = 1`. Requires both components `>= 1`.
pub fn conjugate(p: ParamPair) -> Result<ParamPair> {
    let conj = |x: f64| -> Result<f64> {
        if x < 1.0 {
            return Err(Error::ComponentBelowOne(x));
        }
        if x == 1.0 {
            Ok(f64::INFINITY)
        } else if x.is_infinite() {
            Ok(1.0)
        } else {
            Ok(x / (x - 1.0))
        }
    };
    ParamPair::new(conj(p.a)?, conj(p.b)?)
}
