//! Electron-bubble energy over the scaling family of a regular polygon and
//! the equilibrium scale solving its quartic stationarity equation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{solve_lambda1, triangulate_with, TriangulateOptions};
use crate::geometry::Polygon;

/// Energy coefficients together with the spectral and perimeter data of the
/// reference polygon: the regular n-gon of area pi.
///
/// Units are abstract; physical constants enter only through the
/// coefficients. A negative pressure (suction) must be requested explicitly
/// because the energy then loses coercivity and an equilibrium may not exist.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BubbleParams {
    pub psi: f64,
    pub sigma: f64,
    pub pressure: f64,
    pub n: usize,
    pub lambda_pn: f64,
    pub perim_pn: f64,
}

impl BubbleParams {
    /// Validated parameters with non-negative pressure.
    pub fn new(
        psi: f64,
        sigma: f64,
        pressure: f64,
        n: usize,
        lambda_pn: f64,
        perim_pn: f64,
    ) -> Result<Self> {
        if pressure < 0.0 {
            return Err(Error::DomainError(
                "negative pressure requires allowing_negative_pressure".into(),
            ));
        }
        Self::allowing_negative_pressure(psi, sigma, pressure, n, lambda_pn, perim_pn)
    }

    /// Same validation but permits suction; `equilibrium_scale` then
    /// re-checks that a stationary point exists.
    pub fn allowing_negative_pressure(
        psi: f64,
        sigma: f64,
        pressure: f64,
        n: usize,
        lambda_pn: f64,
        perim_pn: f64,
    ) -> Result<Self> {
        if !(psi > 0.0) || !(sigma > 0.0) {
            return Err(Error::DomainError(format!(
                "psi and sigma must be positive, got {psi} and {sigma}"
            )));
        }
        if !pressure.is_finite() {
            return Err(Error::DomainError("pressure must be finite".into()));
        }
        if n < 3 {
            return Err(Error::DomainError(format!("polygon order must be >= 3, got {n}")));
        }
        if !(lambda_pn > 0.0) || !(perim_pn > 0.0) {
            return Err(Error::DomainError(format!(
                "eigenvalue and perimeter must be positive, got {lambda_pn} and {perim_pn}"
            )));
        }
        Ok(BubbleParams { psi, sigma, pressure, n, lambda_pn, perim_pn })
    }

    /// Builds the reference data from scratch: perimeter from geometry,
    /// eigenvalue from a graded finite-element solve at `refine`.
    pub fn from_regular_polygon(
        psi: f64,
        sigma: f64,
        pressure: f64,
        n: usize,
        refine: usize,
    ) -> Result<Self> {
        let poly = Polygon::regular_with_area(n, PI)?;
        let opts = TriangulateOptions { grade_vertices: true };
        let sol = solve_lambda1(triangulate_with(&poly, refine, opts)?)?;
        Self::allowing_negative_pressure(psi, sigma, pressure, n, sol.lambda1, poly.perimeter())
    }
}

/// Total energy of the bubble scaled by `scale`: eigenvalue term falling as
/// the inverse square, surface term linear, pressure term quadratic.
pub fn energy(params: &BubbleParams, scale: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::DomainError(format!("scale must be positive, got {scale}")));
    }
    Ok(params.psi * params.lambda_pn / (scale * scale)
        + params.sigma * params.perim_pn * scale
        + params.pressure * PI * scale * scale)
}

/// Derivative of the energy in the scale variable.
pub fn energy_slope(params: &BubbleParams, scale: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::DomainError(format!("scale must be positive, got {scale}")));
    }
    Ok(-2.0 * params.psi * params.lambda_pn / (scale * scale * scale)
        + params.sigma * params.perim_pn
        + 2.0 * params.pressure * PI * scale)
}

/// The equilibrium scale: the positive root of
/// `-2*psi*lambda/(sigma*perim) + a^3 + (2*pressure*pi/(sigma*perim))*a^4`,
/// which carries the sign of the energy slope for a > 0. Found by bracketed
/// Newton; for non-negative pressure the root is unique, for suction the
/// first sign change (the local minimum) is returned when one exists.
pub fn equilibrium_scale(params: &BubbleParams) -> Result<f64> {
    let surface = params.sigma * params.perim_pn;
    let c0 = 2.0 * params.psi * params.lambda_pn / surface;
    let c4 = 2.0 * params.pressure * PI / surface;
    let p = |a: f64| c4 * a * a * a * a + a * a * a - c0;
    let dp = |a: f64| 4.0 * c4 * a * a * a + 3.0 * a * a;

    let (mut lo, mut hi);
    if params.pressure >= 0.0 {
        // p is strictly increasing on a > 0 and p(c0^{1/3}) >= 0.
        lo = (0.5 * c0).cbrt() / 2.0;
        hi = 2.0 * c0.cbrt() + 1.0;
        // When the pressure term dominates, the root drops below the
        // documented bracket; widen downward until the signs straddle.
        while p(lo) > 0.0 {
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(Error::NoEquilibrium("bracket collapsed toward zero".into()));
            }
        }
    } else {
        // Suction: p rises to its stationary point and falls forever after;
        // an equilibrium exists only if the peak reaches zero.
        let a_peak = -3.0 / (4.0 * c4);
        if p(a_peak) < 0.0 {
            return Err(Error::NoEquilibrium(format!(
                "suction {} overwhelms the eigenvalue term, no stationary scale",
                params.pressure
            )));
        }
        hi = a_peak;
        lo = 0.5 * a_peak;
        while p(lo) >= 0.0 {
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(Error::NoEquilibrium("bracket collapsed toward zero".into()));
            }
        }
    }

    // Safeguarded Newton: keep the bracket, bisect whenever the step leaves
    // it. Seed at the pressureless closed form.
    let mut a = c0.cbrt().clamp(lo, hi);
    for _ in 0..200 {
        let f = p(a);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = a;
        } else {
            hi = a;
        }
        let d = dp(a);
        let mut next = if d != 0.0 { a - f / d } else { 0.5 * (lo + hi) };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - a).abs() <= 1e-15 * a.abs() {
            a = next;
            break;
        }
        a = next;
    }

    if p(a).abs() > 1e-12 * c0.max(1.0) {
        return Err(Error::SolverError(format!(
            "equilibrium iteration stalled at residual {}",
            p(a)
        )));
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_params(psi: f64, sigma: f64, pressure: f64, lambda: f64, perim: f64) -> BubbleParams {
        BubbleParams::allowing_negative_pressure(psi, sigma, pressure, 64, lambda, perim).unwrap()
    }

    #[test]
    fn energy_blows_up_at_both_ends() {
        let p = scalar_params(1.0, 1.0, 0.5, 5.7832, 6.2832);
        let mid = energy(&p, 1.0).unwrap();
        assert!(energy(&p, 1e-6).unwrap() > mid * 1e6);
        assert!(energy(&p, 1e6).unwrap() > mid * 1e6);
        assert!(energy(&p, 0.0).is_err());
        assert!(energy(&p, -1.0).is_err());
    }

    #[test]
    fn pressureless_minimum_is_the_cubic_root() {
        let p = scalar_params(1.0, 1.0, 0.0, 5.7832, 6.2832);
        let a = equilibrium_scale(&p).unwrap();
        let closed = (2.0 * 5.7832 / 6.2832f64).cbrt();
        assert!((a - closed).abs() < 1e-12, "a {a} closed {closed}");
        assert!((a - 1.2259).abs() < 1e-3);
        assert!(energy_slope(&p, a).unwrap().abs() < 1e-10);
    }

    #[test]
    fn constructed_unit_root_is_recovered() {
        // 2*psi*lambda/(sigma*perim) = 1 + 2*pressure*pi/(sigma*perim)
        // makes a = 1 an exact root of the quartic.
        let p = scalar_params(1.0, 1.0, 0.5 / PI, 1.0, 1.0);
        let a = equilibrium_scale(&p).unwrap();
        assert!((a - 1.0).abs() < 1e-12, "a {a}");
    }

    #[test]
    fn parameters_are_validated() {
        assert!(BubbleParams::new(0.0, 1.0, 0.0, 64, 1.0, 1.0).is_err());
        assert!(BubbleParams::new(1.0, -1.0, 0.0, 64, 1.0, 1.0).is_err());
        assert!(BubbleParams::new(1.0, 1.0, -0.1, 64, 1.0, 1.0).is_err());
        assert!(BubbleParams::new(1.0, 1.0, 0.0, 2, 1.0, 1.0).is_err());
        assert!(BubbleParams::new(1.0, 1.0, 0.0, 64, 0.0, 1.0).is_err());
        assert!(BubbleParams::allowing_negative_pressure(1.0, 1.0, -0.1, 64, 1.0, 1.0).is_ok());
    }

    #[test]
    fn equilibrium_moves_with_the_coefficients() {
        let mut prev = 0.0;
        for psi in [0.5, 1.0, 2.0, 4.0] {
            let p = scalar_params(psi, 1.0, 0.5, 5.7832, 6.2832);
            let a = equilibrium_scale(&p).unwrap();
            assert!(a > prev, "psi {psi}: {a} vs {prev}");
            prev = a;
        }
        let mut prev = f64::INFINITY;
        for pressure in [0.0, 0.5, 1.0, 2.0] {
            let p = scalar_params(1.0, 1.0, pressure, 5.7832, 6.2832);
            let a = equilibrium_scale(&p).unwrap();
            assert!(a < prev, "pressure {pressure}: {a} vs {prev}");
            prev = a;
        }
    }

    #[test]
    fn suction_enlarges_the_bubble_until_no_equilibrium_remains() {
        // With sigma*perim = 1 and 2*psi*lambda = 1 the quartic is
        // c4*a^4 + a^3 - 1; its peak reaches zero only for |c4| <= 0.472.
        let base = scalar_params(0.5, 1.0, 0.0, 1.0, 1.0);
        let a0 = equilibrium_scale(&base).unwrap();
        assert!((a0 - 1.0).abs() < 1e-12);

        let mild = scalar_params(0.5, 1.0, -0.4 / (2.0 * PI), 1.0, 1.0);
        let a = equilibrium_scale(&mild).unwrap();
        assert!(a > 1.0 && a < 1.875, "a {a}");
        assert!(energy_slope(&mild, a).unwrap().abs() < 1e-10);

        let strong = scalar_params(0.5, 1.0, -0.6 / (2.0 * PI), 1.0, 1.0);
        assert!(matches!(equilibrium_scale(&strong), Err(Error::NoEquilibrium(_))));
    }

    #[test]
    fn dominant_pressure_still_brackets_the_root() {
        // Far outside the documented bracket: the widening loop must find
        // the sign change and the stationarity check must still hold.
        let p = scalar_params(1e-6, 1.0, 50.0, 1.0, 1.0);
        let a = equilibrium_scale(&p).unwrap();
        assert!(a > 0.0);
        assert!(energy_slope(&p, a).unwrap().abs() < 1e-8);
    }
}
