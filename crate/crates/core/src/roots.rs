//! Inverse-temperature root finding shared by both back ends.

use crate::error::{Error, Result};

/// Solution of the energy-matching condition for the inverse temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSolution {
    pub beta: f64,
    /// Set when `beta < 0`: the positive-temperature condition
    /// `E ≤ Tr(H)/d` is violated.
    pub negative_temperature: bool,
}

/// Solves `energy(β) = target` for a strictly decreasing `energy`.
///
/// Bracket `[−64, 64]`, doubled until it straddles the root, bisected to
/// `1e-12` relative width, then polished by guarded Newton steps. The final
/// residual must be `≤ 1e-10 · max(1, |target|)`.
pub(crate) fn solve_decreasing<E, D>(energy: E, derivative: D, target: f64) -> Result<BetaSolution>
where
    E: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let tol = 1e-10 * target.abs().max(1.0);
    let resid = |b: f64| energy(b) - target;

    let (mut lo, mut hi) = (-64.0f64, 64.0f64);
    while resid(lo) < 0.0 {
        lo *= 2.0;
        if lo < -1e15 {
            return Err(Error::BetaNotConverged {
                residual: resid(lo).abs(),
            });
        }
    }
    while resid(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::BetaNotConverged {
                residual: resid(hi).abs(),
            });
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let r = resid(mid);
        if r == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * mid.abs().max(1.0) {
            break;
        }
    }
    let mut beta = 0.5 * (lo + hi);
    let mut r = resid(beta);
    for _ in 0..4 {
        if r.abs() <= 1e-3 * tol {
            break;
        }
        let d = derivative(beta);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let cand = beta - r / d;
        if !(cand >= lo - 1e-9 && cand <= hi + 1e-9) {
            break;
        }
        let rc = resid(cand);
        if rc.abs() >= r.abs() {
            break;
        }
        beta = cand;
        r = rc;
    }
    if !(r.abs() <= tol) {
        return Err(Error::BetaNotConverged { residual: r.abs() });
    }
    Ok(BetaSolution {
        beta,
        negative_temperature: beta < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        let s = solve_decreasing(|b| -3.0 * b, |_| -3.0, 1.5).unwrap();
        assert!((s.beta + 0.5).abs() < 1e-12);
        assert!(s.negative_temperature);
    }

    #[test]
    fn expands_bracket() {
        let s = solve_decreasing(|b| -b / 1000.0, |_| -1e-3, -0.2).unwrap();
        assert!((s.beta - 200.0).abs() < 1e-7);
    }
}
