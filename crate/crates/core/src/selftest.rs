//! Built-in diagnostics runnable without any reference data.
//!
//! Each check exercises one structural identity: the Wiener-Hopf
//! factorization residual at strip points, the Brownian closed-form factors,
//! Laplace inversion of known pairs, mirror symmetry of prices, and the
//! Gaussian European closed forms.

use num_complex::Complex64;

use crate::contours::{
    default_contour_set, select_step, BromwichContour, BromwichGrid, ContourVariant,
    CorridorGeometry, InversionMethod,
};
use crate::engine::PayoffSpec;
use crate::error::PricingError;
use crate::european::{euro_call, euro_digital, normal_cdf};
use crate::laplace::{gwr_nodes, invert_gwr, invert_sinh, GWR_TERMS};
use crate::levy::{LevyModel, I};
use crate::pricing::{price, PriceRequest};
use crate::wiener_hopf::FactorEngine;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check<F>(name: &'static str, f: F) -> CheckResult
where
    F: FnOnce() -> Result<String, String>,
{
    match f() {
        Ok(detail) => CheckResult { name, passed: true, detail },
        Err(detail) => CheckResult { name, passed: false, detail },
    }
}

fn benchmark_geometry() -> CorridorGeometry {
    CorridorGeometry { h_minus: -0.05, h_plus: 0.05, dist_minus: 0.01, dist_plus: 0.01 }
}

fn wiener_hopf_identity() -> Result<String, String> {
    let model = LevyModel::kobol_with_m2(1.2, 1.0, -2.0, 0.1, 0.0).map_err(|e| e.to_string())?;
    let set = default_contour_set(
        &model,
        &benchmark_geometry(),
        0.25,
        InversionMethod::Gwr,
        ContourVariant::A,
        1e-15,
    )
    .map_err(|e| e.to_string())?;
    let factors = FactorEngine::new(&model, &set).map_err(|e| e.to_string())?;

    let mut qs: Vec<Complex64> = [1.0, 5.0, 25.0].iter().map(|&q| Complex64::new(q, 0.0)).collect();
    for t in [0.004, 0.25, 1.0] {
        qs.extend(gwr_nodes(t, GWR_TERMS).into_iter().map(|q| Complex64::new(q, 0.0)));
    }
    let points = [
        Complex64::new(0.0, 0.0),
        Complex64::new(3.0, 0.0),
        Complex64::new(-7.0, 0.1),
        Complex64::new(40.0, -0.2),
    ];
    let mut worst = 0.0f64;
    for &q in &qs {
        for &xi in &points {
            let p = factors.phi_plus_at(&set, q, xi).map_err(|e| e.to_string())?;
            let m = factors.phi_minus_at(&set, q, xi).map_err(|e| e.to_string())?;
            let w = 1.0 + model.psi(xi).map_err(|e| e.to_string())? / q;
            worst = worst.max((p * m * w - 1.0).norm());
        }
    }
    if worst <= 1e-12 {
        Ok(format!("worst residual {worst:.3e} over {} q values", qs.len()))
    } else {
        Err(format!("residual {worst:.3e} exceeds 1e-12"))
    }
}

fn brownian_factors() -> Result<String, String> {
    let sigma = 0.3;
    let model = LevyModel::gaussian(sigma, 0.0).map_err(|e| e.to_string())?;
    let set = default_contour_set(
        &model,
        &benchmark_geometry(),
        0.25,
        InversionMethod::Gwr,
        ContourVariant::A,
        1e-15,
    )
    .map_err(|e| e.to_string())?;
    let factors = FactorEngine::new(&model, &set).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for q in [1.0f64, 4.0, 25.0] {
        let kappa = (2.0 * q).sqrt() / sigma;
        for &xi in &[Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(-5.0, 0.3)] {
            let qc = Complex64::new(q, 0.0);
            let got = factors.phi_plus_at(&set, qc, xi).map_err(|e| e.to_string())?;
            let want = kappa / (kappa - I * xi);
            worst = worst.max((got - want).norm());
            let got = factors.phi_minus_at(&set, qc, xi).map_err(|e| e.to_string())?;
            let want = kappa / (kappa + I * xi);
            worst = worst.max((got - want).norm());
        }
    }
    if worst <= 1e-12 {
        Ok(format!("worst deviation {worst:.3e}"))
    } else {
        Err(format!("deviation {worst:.3e} exceeds 1e-12"))
    }
}

fn laplace_grid(maturity: f64) -> Result<BromwichGrid, PricingError> {
    let omega = std::f64::consts::PI / 5.0;
    let sigma = 1.0f64.max(1.0 / maturity);
    let b = 0.5 * sigma / omega.sin();
    let contour = BromwichContour::new(sigma, b, omega)?;
    let zeta = select_step(0.5 * omega.min(std::f64::consts::FRAC_PI_2 - omega), 1e-15);
    let decay = maturity * b * omega.sin();
    let lambda = (2.0 * ((10.0f64 / 1e-15).ln() + 5.0) / decay).ln().max(1.0);
    Ok(BromwichGrid::build(contour, zeta, (lambda / zeta).ceil() as usize))
}

fn laplace_pairs() -> Result<String, String> {
    let one = Complex64::new(1.0, 0.0);
    let mut worst_sinh = 0.0f64;
    let mut worst_gwr = 0.0f64;
    for maturity in [0.25, 1.0, 3.0] {
        let grid = laplace_grid(maturity).map_err(|e| e.to_string())?;
        let v = invert_sinh(&grid, maturity, |q| Ok(one / q)).map_err(|e| e.to_string())?;
        worst_sinh = worst_sinh.max((v - 1.0).abs());
        let v = invert_sinh(&grid, maturity, |q| Ok(one / (q + 1.0))).map_err(|e| e.to_string())?;
        worst_sinh = worst_sinh.max((v - (-maturity).exp()).abs());
        let v = invert_sinh(&grid, maturity, |q| Ok(one / (q * q))).map_err(|e| e.to_string())?;
        worst_sinh = worst_sinh.max((v - maturity).abs() / maturity.max(1.0));

        let r = invert_gwr(maturity, GWR_TERMS, |q| Ok(1.0 / (q + 1.0))).map_err(|e| e.to_string())?;
        worst_gwr = worst_gwr.max((r.value - (-maturity).exp()).abs());
    }
    if worst_sinh <= 1e-12 && worst_gwr <= 1e-6 {
        Ok(format!("sinh {worst_sinh:.3e}, gwr {worst_gwr:.3e}"))
    } else {
        Err(format!("sinh {worst_sinh:.3e} (limit 1e-12), gwr {worst_gwr:.3e} (limit 1e-6)"))
    }
}

fn mirror_symmetry() -> Result<String, String> {
    let model = LevyModel::kobol_with_m2(1.2, 1.0, -2.0, 0.1, 0.0).map_err(|e| e.to_string())?;
    let spots = vec![-0.03, 0.0, 0.02];
    let req = PriceRequest::new(model, PayoffSpec::NoTouch, -0.05, 0.05, 0.25, spots.clone());
    let direct = price(&req).map_err(|e| e.to_string())?;
    let mirrored = PriceRequest::new(
        model.mirrored(),
        PayoffSpec::NoTouch,
        -0.05,
        0.05,
        0.25,
        spots.iter().map(|x| -x).collect(),
    );
    let flipped = price(&mirrored).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (a, b) in direct.spots.iter().zip(&flipped.spots) {
        worst = worst.max((a.value - b.value).abs());
    }
    if worst <= 1e-12 {
        Ok(format!("worst mismatch {worst:.3e}"))
    } else {
        Err(format!("mismatch {worst:.3e} exceeds 1e-12"))
    }
}

fn european_oracles() -> Result<String, String> {
    let sigma = 0.25;
    let mu = 0.03;
    let model = LevyModel::gaussian(sigma, mu).map_err(|e| e.to_string())?;
    let t = 0.5f64;
    let a = 0.01f64;
    let mut worst = 0.0f64;
    for x in [-0.2, 0.0, 0.15] {
        let got = euro_digital(&model, t, x, a).map_err(|e| e.to_string())?;
        let want = normal_cdf((a - x - mu * t) / (sigma * t.sqrt()));
        worst = worst.max((got - want).abs());

        let got = euro_call(&model, t, x, a).map_err(|e| e.to_string())?;
        let m = x + mu * t;
        let v = sigma * t.sqrt();
        let d2 = (m - a) / v;
        let want = (m + 0.5 * v * v).exp() * normal_cdf(d2 + v) - a.exp() * normal_cdf(d2);
        worst = worst.max((got - want).abs());
    }
    if worst <= 1e-10 {
        Ok(format!("worst deviation {worst:.3e}"))
    } else {
        Err(format!("deviation {worst:.3e} exceeds 1e-10"))
    }
}

pub fn run_selftests() -> Vec<CheckResult> {
    vec![
        check("wiener-hopf-identity", wiener_hopf_identity),
        check("brownian-factors", brownian_factors),
        check("laplace-pairs", laplace_pairs),
        check("mirror-symmetry", mirror_symmetry),
        check("european-oracles", european_oracles),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_selftests_pass() {
        for r in run_selftests() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
