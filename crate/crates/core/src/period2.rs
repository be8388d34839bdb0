//! Period-2 boundary fields for the three-state model.
//!
//! With `q = 3`, a field that alternates between `h¹` on even generations
//! and `h²` on odd ones solves the recursion iff `z = (e^{h¹₁}, e^{h¹₂},
//! e^{h²₁}, e^{h²₂})` is a fixed point of [`Period2System`]. On the invariant set
//! `I = {z₁ = z₂, z₃ = z₄}` this collapses to the scalar pair
//! `x = f(y), y = f(x)` with
//!
//! ```text
//! f(x) = [((θ+1)x + 1) / (2x + θ)]^k
//! ```
//!
//! Non-trivial solutions are the roots of `h(x) = ln f(x) - ln g(x)` where
//! `g = f⁻¹` lives on `(θ₁, θ₂) = (((θ+1)/2)^k, θ^{-k})`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Period2Error {
    #[error("theta must be positive and finite, got {0}")]
    InvalidTheta(f64),
    #[error("sign relations need 0 < theta < 1, got {0}")]
    NotAntiferromagnetic(f64),
    #[error("order k = {k} is too small, need k >= {min}")]
    InvalidOrder { k: u32, min: u32 },
    #[error("z components must be positive and finite, got {0:?}")]
    NonPositive([f64; 4]),
    #[error("x = {x} must be positive and finite")]
    InvalidPoint { x: f64 },
    #[error("x = {x} lies outside the open interval ({lower}, {upper})")]
    OutsideDomain { x: f64, lower: f64, upper: f64 },
    #[error("evaluation at x = {0} hit the domain edge")]
    EdgeSingularity(f64),
    #[error("polynomial has no non-zero coefficient")]
    ZeroPolynomial,
}

/// Relative margin kept from the endpoints of `(θ₁, θ₂)` by [`ScalarMap::h_eval`].
pub const EDGE_MARGIN: f64 = 1e-12;

/// `(k - 2) / (k + 1)`; below it the period-2 pair exists.
pub fn theta_cr(k: u32) -> Result<f64, Period2Error> {
    if k < 3 {
        return Err(Period2Error::InvalidOrder { k, min: 3 });
    }
    Ok((k - 2) as f64 / (k + 1) as f64)
}

fn check_theta(theta: f64) -> Result<(), Period2Error> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Period2Error::InvalidTheta(theta))
    }
}

fn check_order(k: u32) -> Result<(), Period2Error> {
    if k >= 1 {
        Ok(())
    } else {
        Err(Period2Error::InvalidOrder { k, min: 1 })
    }
}

/// `(θ a + b + 1) / (a + b + θ)` written as `1 + (θ-1)(a-1)/(a+b+θ)`.
///
/// The second form makes the comparisons with 1 (and between the two
/// components) exact in floating point.
#[inline]
fn ratio(theta: f64, a: f64, b: f64) -> f64 {
    1.0 + (theta - 1.0) * (a - 1.0) / (a + b + theta)
}

/// Exponentiated period-2 fields `(z₁, z₂, z₃, z₄)`, all positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZVector([f64; 4]);

impl ZVector {
    pub fn new(z: [f64; 4]) -> Result<Self, Period2Error> {
        if z.iter().all(|&c| c > 0.0 && c.is_finite()) {
            Ok(Self(z))
        } else {
            Err(Period2Error::NonPositive(z))
        }
    }

    /// The point `(x, x, y, y)` of the invariant set.
    pub fn on_invariant_set(point: ScalarPoint) -> Result<Self, Period2Error> {
        Self::new([point.x, point.x, point.y, point.y])
    }

    pub fn components(&self) -> [f64; 4] {
        self.0
    }

    /// Fields `(h¹₁, h¹₂, h²₁, h²₂)`.
    pub fn log_fields(&self) -> [f64; 4] {
        self.0.map(f64::ln)
    }

    /// Distance to `I` in the max norm, relative to the component size.
    pub fn invariant_set_defect(&self) -> f64 {
        let [a, b, c, d] = self.0;
        let rel = |u: f64, v: f64| (u - v).abs() / u.abs().max(v.abs());
        rel(a, b).max(rel(c, d))
    }

    pub fn max_abs_diff(&self, other: &ZVector) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for ZVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A point `(x, y)` on the invariant set: `z₁ = z₂ = x`, `z₃ = z₄ = y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarPoint {
    pub x: f64,
    pub y: f64,
}

impl ScalarPoint {
    pub fn new(x: f64, y: f64) -> Result<Self, Period2Error> {
        for v in [x, y] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Period2Error::InvalidPoint { x: v });
            }
        }
        Ok(Self { x, y })
    }
}

/// The four-component period-2 map for fixed `θ` and `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Period2System {
    theta: f64,
    k: u32,
}

impl Period2System {
    pub fn new(theta: f64, k: u32) -> Result<Self, Period2Error> {
        check_theta(theta)?;
        check_order(k)?;
        Ok(Self { theta, k })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    pub fn apply(&self, z: &ZVector) -> Result<ZVector, Period2Error> {
        let [z1, z2, z3, z4] = z.0;
        let t = self.theta;
        let k = self.k as i32;
        ZVector::new([
            ratio(t, z3, z4).powi(k),
            ratio(t, z4, z3).powi(k),
            ratio(t, z1, z2).powi(k),
            ratio(t, z2, z1).powi(k),
        ])
    }
}

/// One application of the period-2 system.
pub fn system6_map(z: &ZVector, theta: f64, k: u32) -> Result<ZVector, Period2Error> {
    Period2System::new(theta, k)?.apply(z)
}

/// Which of the three sign relations hold for one step `z_in -> z_out`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignRelations {
    /// `sign(z₁' - z₂') = -sign(z₃ - z₄)`.
    pub ordering: bool,
    /// `z₃ >= 1 ⇒ z₁' <= 1` and `z₃ <= 1 ⇒ z₁' >= 1`.
    pub first: bool,
    /// Same for `z₄` and `z₂'`.
    pub second: bool,
}

impl SignRelations {
    pub fn all(&self) -> bool {
        self.ordering && self.first && self.second
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn opposite_side_of_one(input: f64, output: f64) -> bool {
    (input < 1.0 || output <= 1.0) && (input > 1.0 || output >= 1.0)
}

/// Checks the antiferromagnetic sign relations for `z_out = map(z_in)`.
pub fn proposition_sign_check(z_in: &ZVector, z_out: &ZVector, theta: f64) -> Result<SignRelations, Period2Error> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Period2Error::NotAntiferromagnetic(theta));
    }
    let [_, _, a3, a4] = z_in.0;
    let [b1, b2, _, _] = z_out.0;
    Ok(SignRelations {
        ordering: sign(b1 - b2) == -sign(a3 - a4),
        first: opposite_side_of_one(a3, b1),
        second: opposite_side_of_one(a4, b2),
    })
}

/// Endpoints of the domain of `g = f⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaDomain {
    /// `((θ+1)/2)^k`, the limit of `f` at infinity.
    pub theta_1: f64,
    /// `θ^{-k}`, the value of `f` at zero.
    pub theta_2: f64,
}

impl ThetaDomain {
    pub fn new(theta: f64, k: u32) -> Result<Self, Period2Error> {
        check_theta(theta)?;
        check_order(k)?;
        let k = k as f64;
        Ok(Self {
            theta_1: (k * ((theta + 1.0) / 2.0).ln()).exp(),
            theta_2: (-k * theta.ln()).exp(),
        })
    }

    /// Smaller endpoint. For `θ > 1` the endpoints swap order.
    pub fn lower(&self) -> f64 {
        self.theta_1.min(self.theta_2)
    }

    pub fn upper(&self) -> f64 {
        self.theta_1.max(self.theta_2)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lower() && x < self.upper()
    }
}

/// Value of `h` together with whether the argument had to be clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub x: f64,
    pub value: f64,
    pub at_edge: bool,
}

/// The scalar reduction on the invariant set: `f`, `g = f⁻¹`, `h` and `h'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMap {
    theta: f64,
    k: u32,
    domain: ThetaDomain,
}

impl ScalarMap {
    pub fn new(theta: f64, k: u32) -> Result<Self, Period2Error> {
        let domain = ThetaDomain::new(theta, k)?;
        Ok(Self { theta, k, domain })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    pub fn domain(&self) -> ThetaDomain {
        self.domain
    }

    fn check_positive(x: f64) -> Result<(), Period2Error> {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(Period2Error::InvalidPoint { x })
        }
    }

    fn check_domain(&self, x: f64) -> Result<(), Period2Error> {
        Self::check_positive(x)?;
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Period2Error::OutsideDomain {
                x,
                lower: self.domain.lower(),
                upper: self.domain.upper(),
            })
        }
    }

    /// `(θ-1)(x-1)/(2x+θ)`, so that `f(x) = (1 + this)^k`.
    fn f_offset(&self, x: f64) -> f64 {
        (self.theta - 1.0) * (x - 1.0) / (2.0 * x + self.theta)
    }

    pub fn f(&self, x: f64) -> Result<f64, Period2Error> {
        Self::check_positive(x)?;
        Ok((1.0 + self.f_offset(x)).powi(self.k as i32))
    }

    fn ln_f(&self, x: f64) -> f64 {
        self.k as f64 * self.f_offset(x).ln_1p()
    }

    /// `(1 - θu, 2u - θ - 1)` for `u = x^{1/k}`. The second factor is
    /// formed as `2(u - 1) + (1 - θ)` so both equal `1 - θ` exactly at `x = 1`.
    fn g_factors(&self, x: f64) -> (f64, f64) {
        let u = (x.ln() / self.k as f64).exp();
        (1.0 - self.theta * u, 2.0 * (u - 1.0) + (1.0 - self.theta))
    }

    /// `g(x) = (1 - θu) / (2u - θ - 1)` with `u = x^{1/k}`.
    pub fn g(&self, x: f64) -> Result<f64, Period2Error> {
        self.check_domain(x)?;
        let (a, b) = self.g_factors(x);
        let g = a / b;
        if g > 0.0 && g.is_finite() {
            Ok(g)
        } else {
            Err(Period2Error::EdgeSingularity(x))
        }
    }

    fn ln_g(&self, x: f64) -> f64 {
        let (a, b) = self.g_factors(x);
        a.abs().ln() - b.abs().ln()
    }

    /// `h(x) = ln f(x) - ln g(x)`.
    pub fn h(&self, x: f64) -> Result<f64, Period2Error> {
        self.check_domain(x)?;
        let v = self.ln_f(x) - self.ln_g(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Period2Error::EdgeSingularity(x))
        }
    }

    /// ```text
    /// h'(x) = (θ-1)(θ+2)/k · ( k² / (((θ+1)x+1)(2x+θ))
    ///                         - 1 / (u^{k-1} (2u-θ-1)(1-θu)) )
    /// ```
    pub fn h_prime(&self, x: f64) -> Result<f64, Period2Error> {
        self.check_domain(x)?;
        let t = self.theta;
        let kf = self.k as f64;
        let (a, b) = self.g_factors(x);
        let u_pow = ((kf - 1.0) * x.ln() / kf).exp();
        let first = kf * kf / (((t + 1.0) * x + 1.0) * (2.0 * x + t));
        let second = 1.0 / (u_pow * a * b);
        let v = (t - 1.0) * (t + 2.0) / kf * (first - second);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Period2Error::EdgeSingularity(x))
        }
    }

    /// Moves `x` at least [`EDGE_MARGIN`] (relative) inside the domain.
    /// The flag reports whether it had to move.
    pub fn clamp(&self, x: f64) -> (f64, bool) {
        let lo = self.domain.lower() * (1.0 + EDGE_MARGIN);
        let hi = self.domain.upper() * (1.0 - EDGE_MARGIN);
        if x < lo {
            (lo, true)
        } else if x > hi {
            (hi, true)
        } else {
            (x, false)
        }
    }

    /// `h` on the closed domain, clamping points at (or within the margin
    /// of) an endpoint instead of returning an infinity.
    pub fn h_eval(&self, x: f64) -> Result<Evaluation, Period2Error> {
        Self::check_positive(x)?;
        if x < self.domain.lower() || x > self.domain.upper() {
            return Err(Period2Error::OutsideDomain {
                x,
                lower: self.domain.lower(),
                upper: self.domain.upper(),
            });
        }
        let (cx, at_edge) = self.clamp(x);
        Ok(Evaluation {
            x: cx,
            value: self.h(cx)?,
            at_edge,
        })
    }
}

pub fn f_scalar(x: f64, theta: f64, k: u32) -> Result<f64, Period2Error> {
    ScalarMap::new(theta, k)?.f(x)
}

pub fn g_scalar(x: f64, theta: f64, k: u32) -> Result<f64, Period2Error> {
    ScalarMap::new(theta, k)?.g(x)
}

pub fn h_scalar(x: f64, theta: f64, k: u32) -> Result<f64, Period2Error> {
    ScalarMap::new(theta, k)?.h(x)
}

pub fn h_prime(x: f64, theta: f64, k: u32) -> Result<f64, Period2Error> {
    ScalarMap::new(theta, k)?.h_prime(x)
}

/// One monomial `coeff · y^degree`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub degree: u32,
    pub coeff: f64,
}

/// Numerator polynomial of `h'` in `y = x^{1/k}`, by descending degree:
///
/// ```text
/// p(y) = 2(θ+1) y^{2k} + 2θk² y^{k+1} - (k²-1)(θ²+θ+2) y^k + k²(θ+1) y^{k-1} + θ
/// ```
pub fn p_coefficients(theta: f64, k: u32) -> Result<Vec<Term>, Period2Error> {
    check_theta(theta)?;
    if k < 3 {
        return Err(Period2Error::InvalidOrder { k, min: 3 });
    }
    let kf = k as f64;
    let k2 = kf * kf;
    Ok(vec![
        Term {
            degree: 2 * k,
            coeff: 2.0 * (theta + 1.0),
        },
        Term {
            degree: k + 1,
            coeff: 2.0 * theta * k2,
        },
        Term {
            degree: k,
            coeff: -(k2 - 1.0) * (theta * theta + theta + 2.0),
        },
        Term {
            degree: k - 1,
            coeff: k2 * (theta + 1.0),
        },
        Term {
            degree: 0,
            coeff: theta,
        },
    ])
}

pub fn eval_sparse(terms: &[Term], y: f64) -> f64 {
    terms.iter().map(|t| t.coeff * y.powi(t.degree as i32)).sum()
}

/// Sign changes of the coefficient sequence ordered by descending degree,
/// zeros skipped. Upper bound on the number of positive roots.
pub fn descartes_positive_root_bound(terms: &[Term]) -> Result<usize, Period2Error> {
    let mut ordered: Vec<Term> = terms.iter().copied().filter(|t| t.coeff != 0.0).collect();
    if ordered.is_empty() {
        return Err(Period2Error::ZeroPolynomial);
    }
    ordered.sort_by_key(|t| std::cmp::Reverse(t.degree));
    Ok(ordered
        .windows(2)
        .filter(|w| (w[0].coeff > 0.0) != (w[1].coeff > 0.0))
        .count())
}
