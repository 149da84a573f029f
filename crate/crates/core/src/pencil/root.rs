use serde::{Deserialize, Serialize};

use super::MetzlerPencil;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Positive,
    Negative,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Positive => 1.0,
            Side::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbsenceReason {
    ZetaNegativeThroughoutDomain,
    DomainSideEmpty,
    ZetaPositiveAtBoundaryUnreachable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootOptions {
    /// Bound on |zeta(A(root))|.
    pub tol_root: f64,
    /// Bracket width at which bisection stops.
    pub tol_x: f64,
    /// Fraction of the strip width kept clear of a finite endpoint.
    pub edge_margin: f64,
    /// Scan limit on an unbounded side.
    pub max_extent: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions { tol_root: 1e-10, tol_x: 1e-12, edge_margin: 1e-6, max_extent: 1e12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootResult {
    pub side: Side,
    pub exists: bool,
    pub value: Option<f64>,
    pub zeta_residual: Option<f64>,
    pub bracket: Option<[f64; 2]>,
    pub reason_if_absent: Option<AbsenceReason>,
}

impl RootResult {
    fn absent(side: Side, reason: AbsenceReason) -> Self {
        RootResult { side, exists: false, value: None, zeta_residual: None, bracket: None, reason_if_absent: Some(reason) }
    }
}

/// Root of s -> zeta(A(s)) on one side of the origin.
///
/// Relies on convexity: zeta is negative at 0, so there is at most one
/// sign change on each side.
pub fn find_root(p: &MetzlerPencil, side: Side, opts: &RootOptions) -> Result<RootResult> {
    let z0 = p.zeta_at(0.0)?;
    if z0 >= 0.0 {
        return Err(Error::NonnegativeZetaAtOrigin(z0));
    }
    let dir = side.sign();
    let strip = p.domain();
    let extent = match side {
        Side::Positive => strip.right,
        Side::Negative => -strip.left,
    };
    if extent <= 0.0 {
        return Ok(RootResult::absent(side, AbsenceReason::DomainSideEmpty));
    }
    let limit = if extent.is_finite() {
        let width = if strip.width().is_finite() { strip.width() } else { extent };
        extent - opts.edge_margin * width
    } else {
        opts.max_extent
    };

    let zeta = |x: f64| p.zeta_at(dir * x);
    let mut inner = (0.0, z0);
    let mut x = if extent.is_finite() { 0.1f64.min(extent / 16.0) } else { 0.1 };
    let outer = loop {
        let at_limit = x >= limit;
        if at_limit {
            x = limit;
        }
        let zx = zeta(x)?;
        if zx == 0.0 {
            return Ok(RootResult {
                side,
                exists: true,
                value: Some(dir * x),
                zeta_residual: Some(0.0),
                bracket: Some(sorted(dir * inner.0, dir * x)),
                reason_if_absent: None,
            });
        }
        if zx > 0.0 {
            break (x, zx);
        }
        if at_limit {
            let reason = if zx.abs() <= opts.tol_root {
                AbsenceReason::ZetaPositiveAtBoundaryUnreachable
            } else {
                AbsenceReason::ZetaNegativeThroughoutDomain
            };
            return Ok(RootResult::absent(side, reason));
        }
        inner = (x, zx);
        x *= 2.0;
    };

    let (mut a, mut fa) = inner;
    let (mut b, mut fb) = outer;
    while (b - a).abs() > opts.tol_x * a.abs().max(1.0) {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = zeta(m)?;
        if fm == 0.0 {
            a = m;
            fa = fm;
            b = m;
            fb = fm;
            break;
        }
        if fm < 0.0 {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    let mut best = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
    if fb != fa {
        let s = a - fa * (b - a) / (fb - fa);
        if s > a && s < b {
            let fs = zeta(s)?;
            if fs.abs() < best.1.abs() {
                best = (s, fs);
            }
        }
    }
    if best.1.abs() > opts.tol_root {
        return Err(Error::RootNotConverged { value: dir * best.0, residual: best.1.abs() });
    }
    Ok(RootResult {
        side,
        exists: true,
        value: Some(dir * best.0),
        zeta_residual: Some(best.1.abs()),
        bracket: Some(sorted(dir * a, dir * b)),
        reason_if_absent: None,
    })
}

fn sorted(a: f64, b: f64) -> [f64; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}
