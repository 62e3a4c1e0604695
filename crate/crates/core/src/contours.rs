//! Sinh-deformed integration contours and truncated trapezoid grids.
//!
//! The xi-plane contours are images of `chi(y) = i omega1 + b sinh(i omega + y)`;
//! the Bromwich contour in the q-plane is `sigma_l + i b_l sinh(i omega_l + y)`.
//! Steps and truncations follow the usual simplified-trapezoid-rule heuristics:
//! the discretization error decays like `exp(-2 pi d / zeta)` with `d` the
//! half-width of the strip of analyticity in the y-coordinate, and the
//! truncation of integrands carrying `exp(i dist * xi)` decays
//! double-exponentially in y.

use num_complex::Complex64;

use crate::error::PricingError;
use crate::levy::{LevyModel, I};

/// Real part below which a complex exponential is flushed to zero.
pub const EXP_UNDERFLOW: f64 = -745.0;
/// Real part above which a complex exponential is treated as a contour failure.
pub const EXP_OVERFLOW: f64 = 700.0;

/// `exp(z)` with the underflow/overflow policy of the engine: silent zero below
/// the f64 range, hard error above it (a growing exponential means a
/// misoriented contour and would corrupt the Cauchy matrices).
pub fn guarded_exp(z: Complex64) -> Result<Complex64, PricingError> {
    if z.re < EXP_UNDERFLOW {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if z.re > EXP_OVERFLOW {
        return Err(PricingError::Contour(format!(
            "exponential overflow: Re(z) = {:.3e} on a supposedly decaying direction",
            z.re
        )));
    }
    Ok(z.exp())
}

/// Conformal map `chi(y) = i omega1 + b sinh(i omega + y)`.
#[derive(Debug, Clone, Copy)]
pub struct SinhContour {
    pub omega1: f64,
    pub b: f64,
    pub omega: f64,
}

impl SinhContour {
    /// Point and map derivative at parameter `y`.
    pub fn map_point(&self, y: f64) -> (Complex64, Complex64) {
        map_point(self, y)
    }

    /// Apex ordinate `omega1 + b sin(omega)`.
    pub fn apex(&self) -> f64 {
        self.omega1 + self.b * self.omega.sin()
    }
}

/// Uniform trapezoid grid `y_k = zeta k`, `k = -n_half..=n_half` on a sinh contour.
#[derive(Debug, Clone)]
pub struct ContourGrid {
    pub contour: SinhContour,
    pub zeta: f64,
    pub n_half: usize,
    pub ys: Vec<f64>,
    pub points: Vec<Complex64>,
    pub derivs: Vec<Complex64>,
}

impl ContourGrid {
    pub fn build(contour: SinhContour, zeta: f64, n_half: usize) -> Self {
        let mut ys = Vec::with_capacity(2 * n_half + 1);
        let mut points = Vec::with_capacity(2 * n_half + 1);
        let mut derivs = Vec::with_capacity(2 * n_half + 1);
        for k in -(n_half as i64)..=(n_half as i64) {
            let y = zeta * k as f64;
            let (xi, der) = map_point(&contour, y);
            ys.push(y);
            points.push(xi);
            derivs.push(der);
        }
        Self { contour, zeta, n_half, ys, points, derivs }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Point and map derivative of `chi(y) = i omega1 + b sinh(i omega + y)`.
pub fn map_point(contour: &SinhContour, y: f64) -> (Complex64, Complex64) {
    let arg = Complex64::new(y, contour.omega);
    let xi = I * contour.omega1 + contour.b * arg.sinh();
    let der = contour.b * arg.cosh();
    (xi, der)
}

/// Deformed Bromwich contour `q(y) = sigma_l + i b_l sinh(i omega_l + y)`.
#[derive(Debug, Clone, Copy)]
pub struct BromwichContour {
    pub sigma_l: f64,
    pub b_l: f64,
    pub omega_l: f64,
}

impl BromwichContour {
    pub fn new(sigma_l: f64, b_l: f64, omega_l: f64) -> Result<Self, PricingError> {
        if sigma_l <= 0.0 || b_l <= 0.0 || !(0.0 < omega_l && omega_l < std::f64::consts::FRAC_PI_2) {
            return Err(PricingError::Contour(format!(
                "invalid Bromwich parameters (sigma_l={sigma_l}, b_l={b_l}, omega_l={omega_l})"
            )));
        }
        if sigma_l - b_l * omega_l.sin() <= 0.0 {
            return Err(PricingError::Contour(
                "Bromwich apex sigma_l - b_l sin(omega_l) must stay in the right half-plane".into(),
            ));
        }
        Ok(Self { sigma_l, b_l, omega_l })
    }

    pub fn map_point(&self, y: f64) -> (Complex64, Complex64) {
        let arg = Complex64::new(y, self.omega_l);
        let q = self.sigma_l + I * self.b_l * arg.sinh();
        let der = I * self.b_l * arg.cosh();
        (q, der)
    }
}

/// Half grid `y_k = zeta k`, `k = 0..=n` for the Bromwich integral; the
/// negative half is recovered from the conjugate symmetry of the transform.
#[derive(Debug, Clone)]
pub struct BromwichGrid {
    pub contour: BromwichContour,
    pub zeta: f64,
    pub n: usize,
    pub qs: Vec<Complex64>,
    pub coshes: Vec<Complex64>,
}

impl BromwichGrid {
    pub fn build(contour: BromwichContour, zeta: f64, n: usize) -> Self {
        let mut qs = Vec::with_capacity(n + 1);
        let mut coshes = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let y = zeta * k as f64;
            let arg = Complex64::new(y, contour.omega_l);
            qs.push(contour.sigma_l + I * contour.b_l * arg.sinh());
            coshes.push(arg.cosh());
        }
        Self { contour, zeta, n, qs, coshes }
    }
}

/// Step from the strip half-width `d` of the integrand in the y-coordinate:
/// `zeta = 2 pi d / ln(1/eps')` with `eps' = eps/10`, so `exp(-2 pi d/zeta) <= eps'`.
pub fn select_step(d: f64, eps: f64) -> f64 {
    2.0 * std::f64::consts::PI * d / (10.0 / eps).ln()
}

/// Truncation for integrands decaying like `exp(-b dist kappa sin|omega| e^y)`:
/// smallest Lambda with `exp(-b dist kappa sin|omega| e^Lambda) < eps`, plus the
/// matching point count `N = ceil(Lambda/zeta)`.
pub fn select_truncation(
    b: f64,
    omega: f64,
    distance: f64,
    eps: f64,
    kappa: f64,
    zeta: f64,
) -> Result<(f64, usize), PricingError> {
    if distance <= 0.0 {
        return Err(PricingError::Contour(format!(
            "truncation rule needs a positive barrier distance, got {distance}"
        )));
    }
    let denom = b * distance * kappa * omega.abs().sin();
    let lambda = ((1.0 / eps).ln() / denom).ln().max(1.0);
    let n = (lambda / zeta).ceil() as usize;
    Ok((lambda, n))
}

/// Which Laplace-inversion back-end the contour set must support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionMethod {
    SinhLaplace,
    Gwr,
}

/// Two internally consistent deformation families used for dual-run error control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourVariant {
    A,
    B,
}

/// Geometric inputs driving truncation: barriers plus the smallest distances
/// from any requested spot (or strike) to each barrier.
#[derive(Debug, Clone, Copy)]
pub struct CorridorGeometry {
    pub h_minus: f64,
    pub h_plus: f64,
    /// min over requested points of (x - h_minus), also capped by (a - h_minus).
    pub dist_minus: f64,
    /// min over requested points of (h_plus - x), also capped by (h_plus - a).
    pub dist_plus: f64,
}

/// The full grid family for one engine run.
#[derive(Debug, Clone)]
pub struct ContourSet {
    pub l_plus: ContourGrid,
    pub l_minus: ContourGrid,
    pub l_plus_fine: ContourGrid,
    pub l_minus_fine: ContourGrid,
    pub bromwich: Option<BromwichGrid>,
}

struct VariantParams {
    omega_plus: f64,
    omega_minus: f64,
    apex_frac: f64,
    kappa: f64,
    eps_scale: f64,
    omega_l: f64,
    apex_frac_l: f64,
}

fn variant_params(variant: ContourVariant) -> VariantParams {
    match variant {
        ContourVariant::A => VariantParams {
            omega_plus: std::f64::consts::FRAC_PI_4,
            omega_minus: -std::f64::consts::FRAC_PI_4,
            apex_frac: 0.25,
            kappa: 0.4,
            eps_scale: 1.0,
            // nu_max |omega| + pi/2 + omega_l must stay below pi, otherwise the
            // winding of 1 + psi/q can reach the negative real axis on the wings
            omega_l: std::f64::consts::PI / 6.0,
            apex_frac_l: 0.5,
        },
        ContourVariant::B => VariantParams {
            omega_plus: 0.55,
            omega_minus: -0.55,
            apex_frac: 0.3,
            kappa: 0.3,
            eps_scale: 0.2,
            omega_l: std::f64::consts::PI / 5.0,
            apex_frac_l: 1.0 / 3.0,
        },
    }
}

/// Strip half-width available for rotating `omega` before the deformed contour
/// family leaves its admissible region; halved as a branch-safety margin.
fn strip_half_width(omega: f64) -> f64 {
    0.5 * (std::f64::consts::FRAC_PI_2 - omega.abs()).min(omega.abs())
}

/// Truncation for the fine factor grids: the log-kernel integrand decays only
/// like `|xi_max| nu ln|eta| / |eta|` past the largest target point, so Lambda
/// is found by marching until the tail bound clears `eps`.
fn fine_lambda(xi_max: f64, nu: f64, b1: f64, eps: f64) -> f64 {
    let target = eps * 0.1;
    let mut lambda: f64 = 3.0;
    while lambda < 60.0 {
        let h = 0.5 * b1 * lambda.exp();
        let tail = xi_max.max(1.0) * nu.max(0.5) * (h.ln() + 1.0) / (2.0 * std::f64::consts::PI * h);
        if tail < target {
            break;
        }
        lambda += 0.25;
    }
    lambda
}

/// Default deformation family for a model/payoff geometry.
///
/// Apexes sit at `i apex_frac mu_pm` inside the strip; `b` is sized from the
/// apex so the wings exit through the analyticity cones; the fine grids halve
/// the step and extend the truncation to cover the slowly decaying
/// log-kernel of the factor integrals.
pub fn default_contour_set(
    model: &LevyModel,
    geom: &CorridorGeometry,
    maturity: f64,
    method: InversionMethod,
    variant: ContourVariant,
    eps: f64,
) -> Result<ContourSet, PricingError> {
    let info = model.analyticity();
    if method == InversionMethod::SinhLaplace && info.nu < 1.0 && model.mu != 0.0 {
        return Err(PricingError::Contour(format!(
            "sinh-accelerated Laplace inversion is unavailable for nu = {} < 1 with drift mu = {}; use GWR",
            info.nu, model.mu
        )));
    }
    if geom.dist_minus <= 0.0 || geom.dist_plus <= 0.0 || geom.h_minus >= geom.h_plus {
        return Err(PricingError::Contour("corridor geometry must have positive barrier distances".into()));
    }
    let p = variant_params(variant);
    let eps = eps * p.eps_scale;

    // wide strips (the Gaussian one is effectively unbounded) must not push
    // the apex to where |psi(i apex)| dwarfs q and 1 + psi/q lands on the cut;
    // the minus apex additionally stays above the payoff pole at -i
    let apex_plus = (p.apex_frac * info.mu_plus).min(1.0);
    let apex_minus = (p.apex_frac * info.mu_minus).max(-0.9);
    let b_plus = apex_plus / p.omega_plus.sin();
    let b_minus = apex_minus / p.omega_minus.sin();

    let plus = SinhContour { omega1: 0.0, b: b_plus, omega: p.omega_plus };
    let minus = SinhContour { omega1: 0.0, b: b_minus, omega: p.omega_minus };

    // Main grids: step from the strip width, truncation from the closest
    // decay-driving distance (spot-to-barrier or corridor width).
    let zeta_plus = select_step(strip_half_width(p.omega_plus), eps);
    let zeta_minus = select_step(strip_half_width(p.omega_minus), eps);
    let dist_plus = geom.dist_minus.min(geom.h_plus - geom.h_minus);
    let dist_minus = geom.dist_plus.min(geom.h_plus - geom.h_minus);
    let (lambda_plus, n_plus) = select_truncation(b_plus, p.omega_plus, dist_plus, eps, p.kappa, zeta_plus)?;
    let (lambda_minus, n_minus) = select_truncation(b_minus, p.omega_minus, dist_minus, eps, p.kappa, zeta_minus)?;

    let l_plus = ContourGrid::build(plus, zeta_plus, n_plus);
    let l_minus = ContourGrid::build(minus, zeta_minus, n_minus);

    // Fine grids for the Wiener-Hopf factor integrals.
    let xi_max = l_plus
        .points
        .iter()
        .chain(l_minus.points.iter())
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    let zeta1_plus = 0.5 * zeta_plus;
    let zeta1_minus = 0.5 * zeta_minus;
    let lam1_plus = fine_lambda(xi_max, info.nu, b_plus, eps).max(1.3 * lambda_plus);
    let lam1_minus = fine_lambda(xi_max, info.nu, b_minus, eps).max(1.3 * lambda_minus);
    let l_plus_fine = ContourGrid::build(plus, zeta1_plus, (lam1_plus / zeta1_plus).ceil() as usize);
    let l_minus_fine = ContourGrid::build(minus, zeta1_minus, (lam1_minus / zeta1_minus).ceil() as usize);

    let bromwich = match method {
        InversionMethod::Gwr => None,
        InversionMethod::SinhLaplace => {
            // the floor keeps the apex clear of the pole of the corrected
            // transform at q = 0, which otherwise narrows the strip the step
            // choice assumes; e^{sigma T} stays far from amplifying round-off
            let sigma_l = 2.0f64.max(1.0 / maturity);
            // apex sigma_l - b_l sin(omega_l) = apex_frac_l * sigma_l
            let b_l = sigma_l * (1.0 - p.apex_frac_l) / p.omega_l.sin();
            let contour = BromwichContour::new(sigma_l, b_l, p.omega_l)?;
            let d_l = 0.5 * p.omega_l.min(std::f64::consts::FRAC_PI_2 - p.omega_l);
            let zeta_l = select_step(d_l, eps);
            let decay = maturity * b_l * p.omega_l.sin();
            let lambda_l = (2.0 * ((10.0 / eps).ln() + 5.0) / decay).ln().max(1.0);
            let n_l = (lambda_l / zeta_l).ceil() as usize;
            Some(BromwichGrid::build(contour, zeta_l, n_l))
        }
    };

    let set = ContourSet { l_plus, l_minus, l_plus_fine, l_minus_fine, bromwich };
    validate_separation(&set)?;
    Ok(set)
}

/// Checks that the plus grids lie strictly above the minus grids with margin
/// growing like `|eta|` (needed for the Fubini/Cauchy-kernel bounds).
fn validate_separation(set: &ContourSet) -> Result<(), PricingError> {
    let apex_minus = set.l_minus.contour.apex();
    let apex_plus = set.l_plus.contour.apex();
    if apex_minus >= 0.0 || apex_plus <= 0.0 {
        return Err(PricingError::Contour(format!(
            "contour apexes must straddle zero, got ({apex_minus}, {apex_plus})"
        )));
    }
    let mut c = f64::INFINITY;
    for eta in &set.l_plus.points {
        let sep = (eta.im - apex_minus) / (1.0 + eta.norm());
        c = c.min(sep);
    }
    for xi in &set.l_minus.points {
        let sep = (apex_plus - xi.im) / (1.0 + xi.norm());
        c = c.min(sep);
    }
    if c <= 0.0 {
        return Err(PricingError::Contour(format!("contour separation constant is nonpositive ({c})")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn map_point_basics() {
        let c = SinhContour { omega1: 0.0, b: 1.0, omega: 0.0 };
        let (xi, der) = map_point(&c, 0.0);
        assert!(xi.norm() < 1e-16);
        assert!((der - Complex64::new(1.0, 0.0)).norm() < 1e-16);

        let c = SinhContour { omega1: 0.0, b: 1.0, omega: std::f64::consts::FRAC_PI_4 };
        let (xi, der) = map_point(&c, 0.0);
        assert_abs_diff_eq!(xi.im, (std::f64::consts::FRAC_PI_4).sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(xi.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(der.re, (std::f64::consts::FRAC_PI_4).cos(), epsilon = 1e-15);
    }

    #[test]
    fn map_reflection_identity() {
        // chi(-y) = -conj(chi(y)) for real b, omega, omega1.
        let c = SinhContour { omega1: 0.2, b: 0.7, omega: 0.6 };
        for y in [0.3, 1.7, 4.0] {
            let (a, _) = map_point(&c, -y);
            let (b, _) = map_point(&c, y);
            assert!((a + b.conj()).norm() < 1e-15 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn truncation_closed_form() {
        let eps = 1e-15;
        let (lambda, _n) =
            select_truncation(1.0, std::f64::consts::FRAC_PI_4, 0.01, eps, 0.4, 0.05).unwrap();
        let expect = ((1.0f64 / eps).ln() / (0.01 * 0.4 * (std::f64::consts::FRAC_PI_4).sin())).ln();
        assert_abs_diff_eq!(lambda, expect, epsilon = 1e-12);
        assert!((expect - 9.4).abs() < 0.1);
        // the defining inequality holds
        let decay = (-(0.01 * 0.4 * (std::f64::consts::FRAC_PI_4).sin()) * lambda.exp()).exp();
        assert!(decay <= eps * (1.0 + 1e-9));
        // doubly-logarithmic growth in 1/eps
        let (lambda2, _) =
            select_truncation(1.0, std::f64::consts::FRAC_PI_4, 0.01, 1e-30, 0.4, 0.05).unwrap();
        assert!(lambda2 > lambda && lambda2 < lambda + 1.0);
    }

    #[test]
    fn truncation_rejects_zero_distance() {
        assert!(select_truncation(1.0, 0.5, 0.0, 1e-12, 0.4, 0.05).is_err());
    }

    #[test]
    fn step_selection() {
        let zeta = select_step(0.5, 1e-15);
        assert_abs_diff_eq!(zeta, std::f64::consts::PI / (1e16f64).ln(), epsilon = 1e-12);
        assert!((-2.0 * std::f64::consts::PI * 0.5 / zeta).exp() <= 1e-16 * 1.0001);
        // proportional in d, log-ratio in eps
        assert_abs_diff_eq!(select_step(1.0, 1e-15), 2.0 * zeta, epsilon = 1e-15);
        let ratio = select_step(0.5, 1e-8) / zeta;
        assert!(ratio > 1.6 && ratio < 2.0);
    }

    #[test]
    fn kappa_choice_changes_n_mildly() {
        let (_, n4) = select_truncation(0.35, 0.6, 0.01, 1e-15, 0.4, 0.05).unwrap();
        let (_, n3) = select_truncation(0.35, 0.6, 0.01, 1e-15, 0.3, 0.05).unwrap();
        assert!(n3 >= n4 && n3 - n4 < 10);
    }

    #[test]
    fn default_set_for_table_model() {
        let model = crate::levy::LevyModel::kobol_with_m2(1.2, 1.0, -2.0, 0.1, 0.0).unwrap();
        let geom = CorridorGeometry { h_minus: -0.05, h_plus: 0.05, dist_minus: 0.01, dist_plus: 0.01 };
        for variant in [ContourVariant::A, ContourVariant::B] {
            let set =
                default_contour_set(&model, &geom, 0.25, InversionMethod::SinhLaplace, variant, 1e-15).unwrap();
            assert!(set.l_plus.contour.apex() > 0.0 && set.l_plus.contour.apex() < 1.0);
            assert!(set.l_minus.contour.apex() < 0.0 && set.l_minus.contour.apex() > -2.0);
            assert!(set.l_plus_fine.zeta < set.l_plus.zeta);
            assert!(set.l_plus_fine.len() > set.l_plus.len());
            assert!(set.bromwich.is_some());
        }
    }

    #[test]
    fn sinh_laplace_rejected_for_low_order_with_drift() {
        let model = crate::levy::LevyModel::kobol_with_m2(0.2, 1.0, -2.0, 0.1, 0.02).unwrap();
        let geom = CorridorGeometry { h_minus: -0.05, h_plus: 0.05, dist_minus: 0.01, dist_plus: 0.01 };
        let err = default_contour_set(&model, &geom, 0.25, InversionMethod::SinhLaplace, ContourVariant::A, 1e-15);
        assert!(err.is_err());
        assert!(default_contour_set(&model, &geom, 0.25, InversionMethod::Gwr, ContourVariant::A, 1e-15).is_ok());
    }

    #[test]
    fn guarded_exp_policy() {
        assert_eq!(guarded_exp(Complex64::new(-800.0, 3.0)).unwrap(), Complex64::new(0.0, 0.0));
        assert!(guarded_exp(Complex64::new(710.0, 0.0)).is_err());
        assert!((guarded_exp(Complex64::new(0.0, 1.0)).unwrap() - Complex64::new(0.0, 1.0).exp()).norm() < 1e-15);
    }
}
