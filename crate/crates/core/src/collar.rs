//! Closed-form collar toolkit: half-widths, equidistant lengths, and the
//! two injectivity-radius identities valid inside the collar of a short
//! closed geodesic.
//!
//! The short regime is core length `L <= 2 asinh(1)`; every function below
//! evaluates outside it as well, but [`CollarData::in_short_regime`] and the
//! `OutOfRegime` errors keep callers honest about where the identities are
//! actually theorems.

use crate::error::{GeomError, Result};
use serde::{Deserialize, Serialize};

/// Threshold `2 asinh(1)` below which a closed geodesic counts as short.
pub fn short_regime_threshold() -> f64 {
    2.0 * 1.0f64.asinh()
}

/// Core length and half-width of a collar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollarData {
    pub core_length: f64,
    pub half_width: f64,
}

impl CollarData {
    pub fn new(core_length: f64) -> Result<Self> {
        if !(core_length > 0.0 && core_length.is_finite()) {
            return Err(GeomError::DomainError(format!(
                "core length must be positive, got {core_length}"
            )));
        }
        Ok(Self {
            core_length,
            half_width: half_width(core_length),
        })
    }

    /// Whether the core is short enough for the collar identities.
    pub fn in_short_regime(&self) -> bool {
        self.core_length <= short_regime_threshold()
    }
}

/// Collar half-width `asinh(1 / sinh(L/2))`; strictly decreasing in `L`.
pub fn half_width(core_length: f64) -> f64 {
    (1.0 / (core_length / 2.0).sinh()).asinh()
}

/// Length `L cosh(rho)` of the equidistant circle at signed distance `rho`
/// from the core. Errors outside the collar.
pub fn equidistant_length(core_length: f64, rho: f64) -> Result<f64> {
    let w = half_width(core_length);
    if rho.abs() > w {
        return Err(GeomError::OutsideCollar {
            rho,
            half_width: w,
        });
    }
    Ok(core_length * rho.cosh())
}

/// Length of each boundary circle of the collar:
/// `(L / sinh(L/2)) sqrt(1 + sinh^2(L/2))`, at most `2 sqrt 2` in the short
/// regime.
pub fn collar_boundary_length(core_length: f64) -> f64 {
    let sh = (core_length / 2.0).sinh();
    core_length / sh * (1.0 + sh * sh).sqrt()
}

/// Injectivity radius at collar points from the distance `d` to the collar
/// boundary: `asinh(cosh(L/2) cosh d - sinh d)`.
pub fn inj_from_boundary_distance(core_length: f64, d: f64) -> Result<f64> {
    let w = half_width(core_length);
    if core_length > short_regime_threshold() {
        return Err(GeomError::OutOfRegime(format!(
            "core length {core_length} > 2 asinh(1)"
        )));
    }
    if !(-1e-12..=w + 1e-12).contains(&d) {
        return Err(GeomError::ParameterOutOfRange {
            value: d,
            min: 0.0,
            max: w,
        });
    }
    let d = d.max(0.0);
    Ok(((core_length / 2.0).cosh() * d.cosh() - d.sinh()).asinh())
}

/// Injectivity radius at collar points from the distance `s` to the core:
/// `asinh(sinh(L/2) cosh s)`; equals `L/2` at `s = 0` and increases in `s`.
pub fn inj_from_core_distance(core_length: f64, s: f64) -> Result<f64> {
    let w = half_width(core_length);
    if core_length > short_regime_threshold() {
        return Err(GeomError::OutOfRegime(format!(
            "core length {core_length} > 2 asinh(1)"
        )));
    }
    if !(-1e-12..=w + 1e-12).contains(&s) {
        return Err(GeomError::ParameterOutOfRange {
            value: s,
            min: 0.0,
            max: w,
        });
    }
    let s = s.max(0.0);
    Ok(((core_length / 2.0).sinh() * s.cosh()).asinh())
}

/// Inverse of [`inj_from_core_distance`] in `s`: core distance at which the
/// collar formula yields the target injectivity radius. Used by samplers.
pub fn core_distance_for_inj(core_length: f64, target_inj: f64) -> Result<f64> {
    let ratio = target_inj.sinh() / (core_length / 2.0).sinh();
    if ratio < 1.0 {
        return Err(GeomError::DomainError(format!(
            "target inj {target_inj} below L/2 = {}",
            core_length / 2.0
        )));
    }
    let s = ratio.acosh();
    let w = half_width(core_length);
    if s > w + 1e-12 {
        return Err(GeomError::OutsideCollar {
            rho: s,
            half_width: w,
        });
    }
    Ok(s.min(w))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_ASINH_1: f64 = 1.762747174039086;

    #[test]
    fn half_width_special_values() {
        // sinh(L/2) = 1 at L = 2 asinh(1): half-width equals asinh(1).
        let l = 2.0 * 1.0f64.asinh();
        assert!((half_width(l) - 1.0f64.asinh()).abs() < 1e-14);
        // Frozen direct evaluation at L = 8.
        assert!((half_width(8.0) - 0.036635374743696300).abs() < 1e-15);
    }

    #[test]
    fn half_width_small_core_asymptotic() {
        // e^{w(L)} ~ 4/L as L -> 0, checked at L = 1e-6 with 1% slack.
        let l = 1e-6;
        let ratio = half_width(l).exp() * l / 4.0;
        assert!((ratio - 1.0).abs() < 0.01);
    }

    #[test]
    fn half_width_strictly_decreasing() {
        let mut prev = f64::INFINITY;
        for k in 1..=1000 {
            let l = 0.01 * k as f64;
            let w = half_width(l);
            assert!(w < prev);
            prev = w;
        }
    }

    #[test]
    fn equidistant_length_values() {
        assert!((equidistant_length(0.8, 0.0).unwrap() - 0.8).abs() < 1e-15);
        // L = 1, rho = 1 -> cosh(1).
        assert!((equidistant_length(1.0, 1.0).unwrap() - 1.0f64.cosh()).abs() < 1e-14);
        // At the half-width the equidistant circle is the collar boundary.
        let l = 0.6;
        let w = half_width(l);
        assert!(
            (equidistant_length(l, w).unwrap() - collar_boundary_length(l)).abs() < 1e-12
        );
        assert!(matches!(
            equidistant_length(1.0, 5.0),
            Err(GeomError::OutsideCollar { .. })
        ));
    }

    #[test]
    fn boundary_length_limit_and_bound() {
        // L -> 0: L/sinh(L/2) -> 2 and the sqrt factor -> 1.
        assert!((collar_boundary_length(1e-8) - 2.0).abs() < 1e-8);
        // At L = 2 asinh(1): value 2 sqrt(2) asinh(1), frozen.
        let at_top = collar_boundary_length(TWO_ASINH_1);
        assert!((at_top - 2.4929009605609221).abs() < 1e-12);
        assert!(at_top <= 2.0 * 2.0f64.sqrt());
        // Bounded by 2 sqrt 2 and increasing across the short regime.
        let mut prev = 0.0;
        for k in 1..=500 {
            let l = TWO_ASINH_1 * k as f64 / 500.0;
            let b = collar_boundary_length(l);
            assert!(b <= 2.0 * 2.0f64.sqrt() + 1e-12);
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn inj_formulas_at_anchors() {
        let l = 0.9;
        // d = 0 (collar boundary): asinh(cosh(L/2)) >= asinh(1).
        let at_boundary = inj_from_boundary_distance(l, 0.0).unwrap();
        assert!((at_boundary - (l / 2.0).cosh().asinh()).abs() < 1e-14);
        assert!(at_boundary >= 1.0f64.asinh());
        // s = 0 (on the core): L/2.
        assert!((inj_from_core_distance(l, 0.0).unwrap() - l / 2.0).abs() < 1e-14);
        // s = half-width: asinh(cosh(L/2)) via sinh^2 + 1 = cosh^2.
        let w = half_width(l);
        assert!(
            (inj_from_core_distance(l, w).unwrap() - (l / 2.0).cosh().asinh()).abs() < 1e-12
        );
        // L = 2 asinh(1), d = 0 -> asinh(sqrt 2).
        let v = inj_from_boundary_distance(TWO_ASINH_1, 0.0).unwrap();
        assert!((v - 2.0f64.sqrt().asinh()).abs() < 1e-12);
    }

    #[test]
    fn inj_formulas_consistent_on_grid() {
        // Both identities express the same injectivity radius:
        // boundary-distance form at w - s agrees with core-distance form at s.
        for i in 1..=40 {
            let l = TWO_ASINH_1 * i as f64 / 40.0;
            let w = half_width(l);
            for j in 0..=40 {
                let s = w * j as f64 / 40.0;
                let a = inj_from_boundary_distance(l, w - s).unwrap();
                let b = inj_from_core_distance(l, s).unwrap();
                assert!((a - b).abs() < 1e-9, "L={l} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn inj_from_core_monotone_in_s() {
        let l = 0.5;
        let w = half_width(l);
        let mut prev = 0.0;
        for j in 0..=100 {
            let s = w * j as f64 / 100.0;
            let v = inj_from_core_distance(l, s).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn out_of_regime_errors() {
        assert!(matches!(
            inj_from_core_distance(3.0, 0.0),
            Err(GeomError::OutOfRegime(_))
        ));
        assert!(matches!(
            inj_from_boundary_distance(3.0, 0.0),
            Err(GeomError::OutOfRegime(_))
        ));
    }

    #[test]
    fn collar_data_invariants() {
        let cd = CollarData::new(0.5).unwrap();
        assert!((cd.half_width - (1.0 / 0.25f64.sinh()).asinh()).abs() < 1e-12);
        assert!(cd.in_short_regime());
        assert!(cd.half_width >= 1.0f64.asinh());
        assert!(!CollarData::new(4.0).unwrap().in_short_regime());
        assert!(CollarData::new(-1.0).is_err());
    }

    #[test]
    fn core_distance_inverts_inj_formula() {
        let l = 0.5;
        for k in 0..50 {
            let target = l / 2.0 + (1.0f64.asinh() - l / 2.0) * k as f64 / 49.0;
            let s = core_distance_for_inj(l, target).unwrap();
            let back = inj_from_core_distance(l, s).unwrap();
            assert!((back - target).abs() < 1e-10);
        }
        assert!(core_distance_for_inj(0.5, 0.1).is_err());
    }
}
