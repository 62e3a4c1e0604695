//! Characteristic exponents of the supported Levy models and analyticity metadata.
//!
//! The workhorse is the KoBoL (CGMY) family of tempered-stable processes,
//! `psi(xi) = -i mu xi + psi0(xi)` with
//! `psi0(xi) = c+ G(-nu+)((-lm)^nu+ - (-lm - i xi)^nu+) + c- G(-nu-)(lp^nu- - (lp + i xi)^nu-)`.
//! A Brownian model is included as a closed-form oracle for the Wiener-Hopf
//! factor quadratures; it is not wired into the CLI pricing path.

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::PricingError;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    KoBoL,
    Gaussian,
}

/// Levy model parameters. For KoBoL: order `nu` in (0,2)\{1}, steepness
/// `lambda_minus < 0 < lambda_plus`, jump intensities `c_plus`, `c_minus`,
/// drift `mu`. For the Gaussian test model only `sigma` and `mu` are used.
#[derive(Debug, Clone, Copy)]
pub struct LevyModel {
    pub kind: ModelKind,
    pub nu_plus: f64,
    pub nu_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub mu: f64,
    pub sigma: f64,
}

/// Strip and cone bounds within which `psi` extends analytically, consumed by
/// contour selection.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticityInfo {
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub gamma_prime_minus: f64,
    pub gamma_prime_plus: f64,
    pub nu: f64,
}

/// Strip bounds used for the Gaussian model, whose exponent is entire.
const GAUSSIAN_STRIP: f64 = 1.0e6;

impl LevyModel {
    /// Symmetric KoBoL: `nu_plus = nu_minus = nu`, `c_plus = c_minus = c`.
    pub fn kobol(nu: f64, lambda_plus: f64, lambda_minus: f64, c: f64, mu: f64) -> Result<Self, PricingError> {
        Self::kobol_asymmetric(nu, nu, lambda_plus, lambda_minus, c, c, mu)
    }

    /// General KoBoL with distinct orders and intensities per jump side.
    pub fn kobol_asymmetric(
        nu_plus: f64,
        nu_minus: f64,
        lambda_plus: f64,
        lambda_minus: f64,
        c_plus: f64,
        c_minus: f64,
        mu: f64,
    ) -> Result<Self, PricingError> {
        for (name, nu) in [("nu_plus", nu_plus), ("nu_minus", nu_minus)] {
            if !(0.0 < nu && nu < 2.0) || nu == 1.0 {
                return Err(PricingError::Domain(format!(
                    "{name} must lie in (0,2) and differ from 1, got {nu}"
                )));
            }
        }
        if !(lambda_minus < 0.0 && 0.0 < lambda_plus) {
            return Err(PricingError::Domain(format!(
                "need lambda_minus < 0 < lambda_plus, got ({lambda_minus}, {lambda_plus})"
            )));
        }
        if c_plus <= 0.0 || c_minus <= 0.0 {
            return Err(PricingError::Domain("jump intensities must be positive".into()));
        }
        Ok(Self {
            kind: ModelKind::KoBoL,
            nu_plus,
            nu_minus,
            lambda_plus,
            lambda_minus,
            c_plus,
            c_minus,
            mu,
            sigma: 0.0,
        })
    }

    /// Symmetric KoBoL calibrated so that `psi''(0) = m2`.
    pub fn kobol_with_m2(nu: f64, lambda_plus: f64, lambda_minus: f64, m2: f64, mu: f64) -> Result<Self, PricingError> {
        let c = calibrate_c(nu, lambda_plus, lambda_minus, m2)?;
        Self::kobol(nu, lambda_plus, lambda_minus, c, mu)
    }

    /// Brownian motion with volatility `sigma` and drift `mu`.
    pub fn gaussian(sigma: f64, mu: f64) -> Result<Self, PricingError> {
        if sigma < 0.0 {
            return Err(PricingError::Domain("sigma must be nonnegative".into()));
        }
        Ok(Self {
            kind: ModelKind::Gaussian,
            nu_plus: 2.0,
            nu_minus: 2.0,
            lambda_plus: GAUSSIAN_STRIP,
            lambda_minus: -GAUSSIAN_STRIP,
            c_plus: 0.0,
            c_minus: 0.0,
            mu,
            sigma,
        })
    }

    /// Mirror of the process, `X -> -X`.
    pub fn mirrored(&self) -> Self {
        Self {
            kind: self.kind,
            nu_plus: self.nu_minus,
            nu_minus: self.nu_plus,
            lambda_plus: -self.lambda_minus,
            lambda_minus: -self.lambda_plus,
            c_plus: self.c_minus,
            c_minus: self.c_plus,
            mu: -self.mu,
            sigma: self.sigma,
        }
    }

    fn on_cut(&self, xi: Complex64) -> bool {
        if self.kind == ModelKind::Gaussian {
            return false;
        }
        xi.re == 0.0 && (xi.im >= self.lambda_plus || xi.im <= self.lambda_minus)
    }

    /// `psi0(xi)`: the drift-free part of the characteristic exponent.
    pub fn psi0(&self, xi: Complex64) -> Result<Complex64, PricingError> {
        if self.on_cut(xi) {
            return Err(PricingError::Domain(format!("xi = {xi} lies on an imaginary-axis cut")));
        }
        match self.kind {
            ModelKind::Gaussian => Ok(0.5 * self.sigma * self.sigma * xi * xi),
            ModelKind::KoBoL => {
                let lp = self.lambda_plus;
                let lm = self.lambda_minus;
                let up = self.c_plus
                    * gamma(-self.nu_plus)
                    * (cpowf(Complex64::new(-lm, 0.0), self.nu_plus) - cpowf(-lm - I * xi, self.nu_plus));
                let dn = self.c_minus
                    * gamma(-self.nu_minus)
                    * (cpowf(Complex64::new(lp, 0.0), self.nu_minus) - cpowf(lp + I * xi, self.nu_minus));
                Ok(up + dn)
            }
        }
    }

    /// Full characteristic exponent `psi(xi) = -i mu xi + psi0(xi)`.
    pub fn psi(&self, xi: Complex64) -> Result<Complex64, PricingError> {
        Ok(-I * self.mu * xi + self.psi0(xi)?)
    }

    /// `psi(-i)`; zero iff pricing at r = 0 is arbitrage-free for `S = e^X`.
    pub fn riskfree_residual(&self) -> Result<f64, PricingError> {
        let xi = Complex64::new(0.0, -1.0);
        if self.kind == ModelKind::KoBoL && self.lambda_minus > -1.0 {
            return Err(PricingError::Domain(format!(
                "psi(-i) requires lambda_minus <= -1, got {}",
                self.lambda_minus
            )));
        }
        Ok(self.psi(xi)?.re)
    }

    pub fn analyticity(&self) -> AnalyticityInfo {
        match self.kind {
            ModelKind::KoBoL => AnalyticityInfo {
                mu_minus: self.lambda_minus,
                mu_plus: self.lambda_plus,
                gamma_minus: -std::f64::consts::FRAC_PI_2,
                gamma_plus: std::f64::consts::FRAC_PI_2,
                gamma_prime_minus: -std::f64::consts::FRAC_PI_2,
                gamma_prime_plus: std::f64::consts::FRAC_PI_2,
                nu: self.nu_plus.max(self.nu_minus),
            },
            ModelKind::Gaussian => AnalyticityInfo {
                mu_minus: -GAUSSIAN_STRIP,
                mu_plus: GAUSSIAN_STRIP,
                gamma_minus: -std::f64::consts::FRAC_PI_4,
                gamma_plus: std::f64::consts::FRAC_PI_4,
                gamma_prime_minus: -std::f64::consts::FRAC_PI_4,
                gamma_prime_plus: std::f64::consts::FRAC_PI_4,
                nu: 2.0,
            },
        }
    }

    /// Coefficient of the power-type asymptotics `psi0(rho e^{i phi}) ~ c_inf(phi) rho^nu`
    /// (symmetric KoBoL only; metadata, not used for step selection).
    pub fn c_infinity(&self, phi: f64) -> Option<Complex64> {
        if self.kind != ModelKind::KoBoL || self.nu_plus != self.nu_minus || self.c_plus != self.c_minus {
            return None;
        }
        let nu = self.nu_plus;
        let scale = -2.0 * self.c_plus * gamma(-nu) * (nu * std::f64::consts::FRAC_PI_2).cos();
        Some(scale * (I * nu * phi).exp())
    }
}

/// Principal-branch complex power with a real exponent; `0^nu = 0` for `nu > 0`.
fn cpowf(base: Complex64, exponent: f64) -> Complex64 {
    if base.re == 0.0 && base.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    base.powf(exponent)
}

/// Intensity `c = c+ = c-` giving `psi''(0) = m2` for the symmetric KoBoL exponent:
/// `psi''(0) = c Gamma(2-nu) ((-lambda_minus)^{nu-2} + lambda_plus^{nu-2})`.
pub fn calibrate_c(nu: f64, lambda_plus: f64, lambda_minus: f64, m2: f64) -> Result<f64, PricingError> {
    if !(0.0 < nu && nu < 2.0) || nu == 1.0 {
        return Err(PricingError::Domain(format!("nu must lie in (0,2)\\{{1}}, got {nu}")));
    }
    if m2 <= 0.0 {
        return Err(PricingError::Domain("m2 must be positive".into()));
    }
    let denom = gamma(2.0 - nu) * ((-lambda_minus).powf(nu - 2.0) + lambda_plus.powf(nu - 2.0));
    Ok(m2 / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn table_model(nu: f64) -> LevyModel {
        LevyModel::kobol_with_m2(nu, 1.0, -2.0, 0.1, 0.0).unwrap()
    }

    /// Finite-difference second derivative of psi along the real axis.
    fn psi_second_fd(model: &LevyModel, h: f64) -> f64 {
        let f = |x: f64| model.psi(Complex64::new(x, 0.0)).unwrap();
        let num = f(h) - 2.0 * f(0.0) + f(-h);
        (num / (h * h)).re
    }

    #[test]
    fn psi_vanishes_at_zero() {
        for nu in [0.2, 0.8, 1.2] {
            let m = table_model(nu);
            let v = m.psi(Complex64::new(0.0, 0.0)).unwrap();
            assert!(v.norm() < 1e-15, "psi(0) = {v}");
        }
    }

    #[test]
    fn psi_at_minus_i_cancels_for_table_parameters() {
        // 2^nu - 1 + 1 - 2^nu = 0 with lambda_plus = 1, lambda_minus = -2.
        let m = table_model(1.2);
        let v = m.psi(Complex64::new(0.0, -1.0)).unwrap();
        assert!(v.norm() < 1e-14, "psi(-i) = {v}");
        assert_abs_diff_eq!(m.riskfree_residual().unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn riskfree_residual_drift_and_gaussian() {
        let m = LevyModel::kobol_with_m2(0.8, 1.0, -2.0, 0.1, 0.02).unwrap();
        assert_abs_diff_eq!(m.riskfree_residual().unwrap(), -0.02, epsilon = 1e-14);
        let g = LevyModel::gaussian(0.3, 0.0).unwrap();
        assert_abs_diff_eq!(g.riskfree_residual().unwrap(), -0.5 * 0.09, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_exponent_is_brownian() {
        let g = LevyModel::gaussian(0.4, 0.0).unwrap();
        let xi = Complex64::new(1.3, -0.2);
        let expect = 0.5 * 0.16 * xi * xi;
        assert!((g.psi(xi).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn calibration_matches_closed_form_and_finite_difference() {
        let nu = 1.2;
        let c = calibrate_c(nu, 1.0, -2.0, 0.1).unwrap();
        let expect = 0.1 / (gamma(2.0 - nu) * ((2.0f64).powf(nu - 2.0) + 1.0));
        assert_abs_diff_eq!(c, expect, epsilon = 1e-15);
        for nu in [0.2, 0.8, 1.2] {
            let m = table_model(nu);
            assert_abs_diff_eq!(psi_second_fd(&m, 1e-3), 0.1, epsilon = 1e-7);
        }
    }

    #[test]
    fn calibration_linear_in_m2() {
        let c1 = calibrate_c(0.8, 1.0, -2.0, 0.1).unwrap();
        let c2 = calibrate_c(0.8, 1.0, -2.0, 0.2).unwrap();
        assert_abs_diff_eq!(c2, 2.0 * c1, epsilon = 1e-15);
    }

    #[test]
    fn cut_points_rejected() {
        let m = table_model(1.2);
        assert!(m.psi(Complex64::new(0.0, 1.0)).is_err());
        assert!(m.psi(Complex64::new(0.0, -2.5)).is_err());
        assert!(m.psi(Complex64::new(0.0, 0.5)).is_ok());
    }

    #[test]
    fn analyticity_metadata() {
        let info = table_model(1.2).analyticity();
        assert_eq!(info.mu_minus, -2.0);
        assert_eq!(info.mu_plus, 1.0);
        assert_abs_diff_eq!(info.gamma_plus, std::f64::consts::FRAC_PI_2);
        let g = LevyModel::gaussian(0.1, 0.0).unwrap().analyticity();
        assert_abs_diff_eq!(g.gamma_plus, std::f64::consts::FRAC_PI_4);
        assert_eq!(table_model(0.2).analyticity().nu, 0.2);
    }

    #[test]
    fn psi_real_on_inner_imaginary_segment() {
        let m = table_model(1.2);
        for y in [-1.9, -0.5, 0.3, 0.9] {
            let v = m.psi(Complex64::new(0.0, y)).unwrap();
            assert!(v.im.abs() < 1e-13, "psi(i{y}) = {v}");
        }
    }

    proptest! {
        #[test]
        fn conjugate_symmetry(re in -30.0f64..30.0, im in -1.9f64..0.9, nu_idx in 0usize..3) {
            prop_assume!(re.abs() > 1e-12);
            let m = table_model([0.2, 0.8, 1.2][nu_idx]);
            let xi = Complex64::new(re, im);
            let a = m.psi(-xi.conj()).unwrap();
            let b = m.psi(xi).unwrap().conj();
            let scale = 1.0f64.max(a.norm());
            prop_assert!((a - b).norm() / scale < 1e-13);
        }
    }
}
