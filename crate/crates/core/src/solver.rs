//! Root finding for the scalar period-2 equation.
//!
//! [`scan_brackets`] and [`bisect`] are generic. [`find_h_roots`] applies
//! them to `h(x) = ln f(x) - ln g(x)` on `(θ₁, θ₂)`:
//!
//! * the known root `x = 1` is divided out, so the scan sees
//!   `d(x) = h(x) / (x - 1)` (with `d(1) = h'(1)`) and cannot confuse the
//!   trivial root with a neighbouring one;
//! * `(θ₁, 1]` is sampled uniformly in `ln(x - θ₁)` and `[1, θ₂)` uniformly in
//!   `ln x`, which resolves roots that hug `θ₁` when `θ` is small and the
//!   huge upper endpoint `θ^{-k}`;
//! * `x = 1` is injected analytically afterwards.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::numeric::rel_diff;
use crate::period2::{theta_cr, Period2Error, ScalarMap, ThetaDomain, ZVector};

/// Default number of scan nodes used by [`find_h_roots`].
pub const DEFAULT_GRID: usize = 4001;
/// Relative distance kept from `θ₁` and `θ₂` while scanning.
pub const DOMAIN_CLAMP: f64 = 1e-9;
/// Roots closer than this (relative) are merged.
pub const MERGE_DISTANCE: f64 = 1e-7;
/// Below this distance from 1 the deflated function is replaced by `h'(1)`.
const DEFLATION_GUARD: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("[{lo}, {hi}] is not a bracket (f = {f_lo}, {f_hi})")]
    InvalidBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("bisection stopped after {iterations} iterations with bracket [{lo}, {hi}]")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },
    #[error("function is not finite at x = {0}")]
    NonFinite(f64),
    #[error("root enumeration needs 0 < theta < 1, got {0}")]
    ThetaOutOfRange(f64),
    #[error("scan grid needs at least {min} nodes, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error(transparent)]
    Period2(#[from] Period2Error),
}

/// Interval with function values of opposite sign (one of them may be 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

fn opposite(a: f64, b: f64) -> bool {
    (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) || (a == 0.0 && b != 0.0)
}

impl Bracket {
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self, SolverError> {
        let ok = lo < hi && [lo, hi, f_lo, f_hi].iter().all(|v| v.is_finite()) && opposite(f_lo, f_hi);
        if ok {
            Ok(Self { lo, hi, f_lo, f_hi })
        } else {
            Err(SolverError::InvalidBracket { lo, hi, f_lo, f_hi })
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// One bracket per sign change of `f` on `grid` uniform nodes over
/// `[lo, hi]` (endpoints included). Non-finite values break the chain, so a
/// singular node never bounds a bracket. A node where `f` is exactly zero
/// closes the bracket to its left.
pub fn scan_brackets<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, grid: usize) -> Vec<Bracket> {
    if lo.is_nan() || hi.is_nan() || lo >= hi || grid < 2 {
        return Vec::new();
    }
    let node = |i: usize| {
        if i == grid - 1 {
            hi
        } else {
            lo + (hi - lo) * (i as f64 / (grid - 1) as f64)
        }
    };
    let mut out = Vec::new();
    let mut prev = (node(0), f(node(0)));
    for i in 1..grid {
        let x = node(i);
        let v = f(x);
        let (px, pv) = prev;
        if pv.is_finite() && v.is_finite() {
            let change = (pv < 0.0 && v > 0.0) || (pv > 0.0 && v < 0.0) || (v == 0.0 && pv != 0.0);
            let leading_zero = i == 1 && pv == 0.0 && v != 0.0;
            if change || leading_zero {
                out.push(Bracket {
                    lo: px,
                    hi: x,
                    f_lo: pv,
                    f_hi: v,
                });
            }
        }
        prev = (x, v);
    }
    out
}

/// Bisection. Stops when `|f(mid)| <= tol_f`, when the bracket is narrower
/// than `tol_x · max(1, |mid|)`, or when no float lies strictly inside it
/// (then the endpoint with the smaller `|f|` is returned).
pub fn bisect<F: Fn(f64) -> f64>(
    f: F,
    bracket: &Bracket,
    tol_x: f64,
    tol_f: f64,
    max_iter: usize,
) -> Result<f64, SolverError> {
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        mut f_hi,
    } = *bracket;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    for _ in 0..max_iter {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            return Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi });
        }
        if hi - lo <= tol_x * mid.abs().max(1.0) {
            return Ok(mid);
        }
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(SolverError::NonFinite(mid));
        }
        if fm.abs() <= tol_f {
            return Ok(mid);
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    Err(SolverError::NoConvergence {
        iterations: max_iter,
        lo,
        hi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootKind {
    /// `x = 1`: the translation-invariant measure.
    TranslationInvariant,
    /// One half of a period-2 orbit.
    Period2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub x: f64,
    /// `|h(x)|`.
    pub residual: f64,
    /// Scan bracket in `x`; absent for the analytically injected `x = 1`.
    pub bracket: Option<Bracket>,
    pub kind: RootKind,
}

/// Period-2 orbit `x₀ < 1 < x₂` with `f(x₀) = x₂`, `f(x₂) = x₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitPair {
    pub low: f64,
    pub high: f64,
    /// `|f(low) - high|`.
    pub image_gap: f64,
    /// `|f(f(low)) - low|`.
    pub closure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RootFlags {
    /// Two roots were closer than [`MERGE_DISTANCE`] and got merged.
    pub near_degenerate: bool,
    /// A bracket touched a clamped domain endpoint.
    pub domain_edge: bool,
    /// Roots below and above 1 do not pair up.
    pub unpaired: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub k: u32,
    pub theta: f64,
    pub theta_cr: f64,
    pub domain: ThetaDomain,
    /// Ascending.
    pub roots: Vec<Root>,
    pub pairs: Vec<OrbitPair>,
    pub flags: RootFlags,
}

impl RootReport {
    pub fn count(&self) -> usize {
        self.roots.len()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.x).collect()
    }

    /// `(translation-invariant, period-2)` root counts.
    pub fn classification(&self) -> (usize, usize) {
        let ti = self
            .roots
            .iter()
            .filter(|r| r.kind == RootKind::TranslationInvariant)
            .count();
        (ti, self.roots.len() - ti)
    }
}

/// Pairs roots below 1 with roots above 1, nesting outwards: the smallest
/// low root goes with the largest high root (`f` is decreasing).
pub fn pair_roots(xs: &[f64]) -> (Vec<(f64, f64)>, bool) {
    let lows: Vec<f64> = xs.iter().copied().filter(|&x| x < 1.0).collect();
    let highs: Vec<f64> = xs.iter().copied().filter(|&x| x > 1.0).rev().collect();
    let pairs = lows.iter().copied().zip(highs.iter().copied()).collect();
    (pairs, lows.len() != highs.len())
}

/// [`pair_roots`] plus the orbit diagnostics `|f(x₀) - x₂|` and
/// `|f(f(x₀)) - x₀|` for each pair.
pub fn orbit_pairs(map: &ScalarMap, xs: &[f64]) -> Result<(Vec<OrbitPair>, bool), Period2Error> {
    let (raw, unpaired) = pair_roots(xs);
    let pairs = raw
        .into_iter()
        .map(|(low, high)| {
            let image = map.f(low)?;
            Ok(OrbitPair {
                low,
                high,
                image_gap: (image - high).abs(),
                closure: (map.f(image)? - low).abs(),
            })
        })
        .collect::<Result<Vec<_>, Period2Error>>()?;
    Ok((pairs, unpaired))
}

/// All roots of `h` on `(θ₁, θ₂)` for `0 < θ < 1`, `k >= 3`.
pub fn find_h_roots(theta: f64, k: u32, grid: usize) -> Result<RootReport, SolverError> {
    find_h_roots_with(theta, k, grid, Execution::default())
}

pub fn find_h_roots_with(theta: f64, k: u32, grid: usize, exec: Execution) -> Result<RootReport, SolverError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(SolverError::ThetaOutOfRange(theta));
    }
    let crit = theta_cr(k)?;
    if grid < 5 {
        return Err(SolverError::GridTooSmall { min: 5, got: grid });
    }
    let map = ScalarMap::new(theta, k)?;
    let domain = map.domain();
    let (t1, t2) = (domain.theta_1, domain.theta_2);
    let slope_at_one = map.h_prime(1.0)?;

    let deflated = |x: f64| -> f64 {
        if (x - 1.0).abs() < DEFLATION_GUARD {
            slope_at_one
        } else {
            map.h(x).map(|h| h / (x - 1.0)).unwrap_or(f64::NAN)
        }
    };

    let per_side = grid.div_ceil(2);
    let left_x = |s: f64| t1 + s.exp();
    let right_x = |s: f64| s.exp();
    let (left_lo, left_hi) = ((t1 * DOMAIN_CLAMP).ln(), (1.0 - t1).ln());
    let (right_lo, right_hi) = (0.0, (t2 * (1.0 - DOMAIN_CLAMP)).ln());

    let mut edge_hit = false;
    let mut brackets = Vec::new();
    for (side, lo, hi) in [(0, left_lo, left_hi), (1, right_lo, right_hi)] {
        let to_x = |s: f64| if side == 0 { left_x(s) } else { right_x(s) };
        for b in scan_brackets(|s| deflated(to_x(s)), lo, hi, per_side) {
            if (side == 0 && b.lo == lo) || (side == 1 && b.hi == hi) {
                edge_hit = true;
            }
            brackets.push(Bracket {
                lo: to_x(b.lo),
                hi: to_x(b.hi),
                f_lo: b.f_lo,
                f_hi: b.f_hi,
            });
        }
    }

    let refined = exec.map_slice(&brackets, |b| {
        bisect(deflated, b, 0.0, 0.0, 400).and_then(|x| {
            let residual = map.h(x)?.abs();
            Ok(Root {
                x,
                residual,
                bracket: Some(*b),
                kind: RootKind::Period2,
            })
        })
    });
    let mut roots = refined.into_iter().collect::<Result<Vec<_>, _>>()?;
    roots.push(Root {
        x: 1.0,
        residual: 0.0,
        bracket: None,
        kind: RootKind::TranslationInvariant,
    });
    roots.sort_by(|a, b| a.x.total_cmp(&b.x));

    let mut flags = RootFlags {
        domain_edge: edge_hit,
        ..RootFlags::default()
    };
    let mut merged: Vec<Root> = Vec::with_capacity(roots.len());
    for r in roots {
        match merged.last_mut() {
            Some(prev) if rel_diff(prev.x, r.x) <= MERGE_DISTANCE => {
                flags.near_degenerate = true;
                let keep_new = r.kind == RootKind::TranslationInvariant
                    || (prev.kind != RootKind::TranslationInvariant && r.residual < prev.residual);
                if keep_new {
                    *prev = r;
                }
            }
            _ => merged.push(r),
        }
    }

    let xs: Vec<f64> = merged.iter().map(|r| r.x).collect();
    let (pairs, unpaired) = orbit_pairs(&map, &xs)?;
    flags.unpaired = unpaired;

    Ok(RootReport {
        k,
        theta,
        theta_cr: crit,
        domain,
        roots: merged,
        pairs,
        flags,
    })
}

/// Result of [`fixed_point_iterate`].
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub point: ZVector,
    /// Number of even (two-step) iterations performed.
    pub iterations: usize,
    /// `‖map(point) - point‖∞ <= tol`.
    pub converged: bool,
    /// Settled on a fixed point of `map ∘ map` that `map` itself moves.
    pub two_cycle: bool,
    /// `‖map(point) - point‖∞`.
    pub residual: f64,
    /// Start point followed by every even iterate.
    pub trace: Vec<ZVector>,
}

/// Iterates the even-step map `z ↦ map(map(z))` from `z0`.
///
/// Stops as soon as `‖map(z) - z‖∞ <= tol` (converged), or when the even
/// step no longer moves `z` while the single step still does by more than
/// `100 · tol` (a genuine 2-cycle of `map`), or after `max_iter` even steps.
pub fn fixed_point_iterate<F>(map: F, z0: ZVector, tol: f64, max_iter: usize) -> Result<FixedPoint, SolverError>
where
    F: Fn(&ZVector) -> Result<ZVector, Period2Error>,
{
    let mut z = z0;
    let mut trace = vec![z0];
    for iterations in 0..=max_iter {
        let once = map(&z)?;
        let residual = once.max_abs_diff(&z);
        if residual <= tol {
            return Ok(FixedPoint {
                point: z,
                iterations,
                converged: true,
                two_cycle: false,
                residual,
                trace,
            });
        }
        if iterations == max_iter {
            return Ok(FixedPoint {
                point: z,
                iterations,
                converged: false,
                two_cycle: false,
                residual,
                trace,
            });
        }
        let twice = map(&once)?;
        let moved = twice.max_abs_diff(&z);
        z = twice;
        trace.push(z);
        if moved <= tol && residual > 100.0 * tol {
            let residual = map(&z)?.max_abs_diff(&z);
            return Ok(FixedPoint {
                point: z,
                iterations: iterations + 1,
                converged: false,
                two_cycle: true,
                residual,
                trace,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}
