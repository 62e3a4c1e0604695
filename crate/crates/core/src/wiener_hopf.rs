//! Wiener-Hopf factorization of `q / (q + psi(xi))` by sinh-contour quadrature.
//!
//! The plus factor is analytic above the minus contour and is recovered from
//! `ln phi+_q(xi) = (zeta1 / 2 pi i) sum_k xi ln(1 + psi(eta_k)/q) der_k / (eta_k (xi - eta_k))`
//! over the fine minus grid; the minus factor is the mirror image over the fine
//! plus grid with the opposite sign. Each factor is only ever evaluated by
//! quadrature at targets on the *opposite* contour, where the Cauchy kernel is
//! smooth; values on a factor's own contour come from the factorization
//! identity `phi+ phi- (1 + psi/q) = 1`, which is exact.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::contours::{ContourGrid, ContourSet};
use crate::error::PricingError;
use crate::levy::{LevyModel, I};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Factor values for one Laplace argument `q`, on the main grids.
#[derive(Debug, Clone)]
pub struct FactorValues {
    pub q: Complex64,
    /// `phi+_q` at the main plus-grid points (direct quadrature).
    pub phi_plus_on_plus: Vec<Complex64>,
    /// `phi-_q` at the main minus-grid points (direct quadrature).
    pub phi_minus_on_minus: Vec<Complex64>,
    /// `phi-_q` at the main plus-grid points (via the factorization identity).
    pub phi_minus_on_plus: Vec<Complex64>,
    /// `phi+_q` at the main minus-grid points (via the factorization identity).
    pub phi_plus_on_minus: Vec<Complex64>,
    /// `(phi-/phi+)_q` at the main plus-grid points.
    pub ratio_mp_on_plus: Vec<Complex64>,
    /// `(phi+/phi-)_q` at the main minus-grid points.
    pub ratio_pm_on_minus: Vec<Complex64>,
    /// `phi-_q(-i)`, needed for the call payoff.
    pub phi_minus_at_minus_i: Complex64,
}

/// Precomputed, q-independent state for factor evaluation on a contour set.
pub struct FactorEngine {
    model: LevyModel,
    pub psi_main_plus: Vec<Complex64>,
    pub psi_main_minus: Vec<Complex64>,
    psi_fine_plus: Vec<Complex64>,
    psi_fine_minus: Vec<Complex64>,
    /// Rows: main plus targets; columns: fine minus sources. Includes the
    /// quadrature prefactor `zeta1 / (2 pi i)` and the map derivative.
    kern_plus: DMatrix<Complex64>,
    /// Rows: main minus targets; columns: fine plus sources, with the mirror sign.
    kern_minus: DMatrix<Complex64>,
    /// Single row for the target `-i` over the fine plus grid.
    kern_minus_at_minus_i: DVector<Complex64>,
}

fn psi_on_grid(model: &LevyModel, grid: &ContourGrid) -> Result<Vec<Complex64>, PricingError> {
    grid.points.iter().map(|&xi| model.psi(xi)).collect()
}

/// Kernel row entries `pref * xi der_k / (eta_k (xi - eta_k))` for one target.
fn kernel_row(xi: Complex64, fine: &ContourGrid, pref: Complex64, out: &mut [Complex64]) {
    for (k, (&eta, &der)) in fine.points.iter().zip(&fine.derivs).enumerate() {
        out[k] = pref * xi * der / (eta * (xi - eta));
    }
}

fn build_kernel(targets: &ContourGrid, fine: &ContourGrid, sign: f64) -> DMatrix<Complex64> {
    let pref = Complex64::new(0.0, -sign * fine.zeta / TWO_PI); // sign/(2 pi i) = -sign i/(2 pi)
    let mut m = DMatrix::zeros(targets.len(), fine.len());
    let mut row = vec![Complex64::default(); fine.len()];
    for (j, &xi) in targets.points.iter().enumerate() {
        kernel_row(xi, fine, pref, &mut row);
        for (k, &v) in row.iter().enumerate() {
            m[(j, k)] = v;
        }
    }
    m
}

/// `ln(1 + psi(eta_k)/q)` along a grid, with the branch-safety check: the
/// piecewise-linear path through the values must keep off `(-inf, 0]`, else the
/// principal logarithm is discontinuous along the contour and the factor is
/// garbage. A failure means the contour family winds too far for this `q`.
pub fn log_one_plus_psi_over_q(
    psi: &[Complex64],
    q: Complex64,
    label: &str,
) -> Result<Vec<Complex64>, PricingError> {
    let mut vals = Vec::with_capacity(psi.len());
    let mut prev: Option<Complex64> = None;
    for &p in psi {
        let w = 1.0 + p / q;
        if w.im == 0.0 && w.re <= 0.0 {
            return Err(PricingError::Contour(format!(
                "1 + psi/q hit the branch cut on {label} (q = {q})"
            )));
        }
        if let Some(a) = prev {
            if (a.im > 0.0) != (w.im > 0.0) {
                let t = a.im / (a.im - w.im);
                let re_cross = a.re + t * (w.re - a.re);
                if re_cross <= 0.0 {
                    return Err(PricingError::Contour(format!(
                        "1 + psi/q winds across the negative real axis on {label} (q = {q})"
                    )));
                }
            }
        }
        prev = Some(w);
        vals.push(w.ln());
    }
    Ok(vals)
}

impl FactorEngine {
    pub fn new(model: &LevyModel, set: &ContourSet) -> Result<Self, PricingError> {
        let psi_main_plus = psi_on_grid(model, &set.l_plus)?;
        let psi_main_minus = psi_on_grid(model, &set.l_minus)?;
        let psi_fine_plus = psi_on_grid(model, &set.l_plus_fine)?;
        let psi_fine_minus = psi_on_grid(model, &set.l_minus_fine)?;
        let kern_plus = build_kernel(&set.l_plus, &set.l_minus_fine, 1.0);
        let kern_minus = build_kernel(&set.l_minus, &set.l_plus_fine, -1.0);
        let pref = Complex64::new(0.0, set.l_plus_fine.zeta / TWO_PI); // -1/(2 pi i)
        let mut row = vec![Complex64::default(); set.l_plus_fine.len()];
        kernel_row(-I, &set.l_plus_fine, pref, &mut row);
        let kern_minus_at_minus_i = DVector::from_vec(row);
        Ok(Self {
            model: *model,
            psi_main_plus,
            psi_main_minus,
            psi_fine_plus,
            psi_fine_minus,
            kern_plus,
            kern_minus,
            kern_minus_at_minus_i,
        })
    }

    /// All factor values needed by the barrier engine for one `q`.
    pub fn factors_at(&self, q: Complex64) -> Result<FactorValues, PricingError> {
        let log_fine_minus = log_one_plus_psi_over_q(&self.psi_fine_minus, q, "fine minus grid")?;
        let log_fine_plus = log_one_plus_psi_over_q(&self.psi_fine_plus, q, "fine plus grid")?;
        log_one_plus_psi_over_q(&self.psi_main_plus, q, "main plus grid")?;
        log_one_plus_psi_over_q(&self.psi_main_minus, q, "main minus grid")?;

        let vm = DVector::from_vec(log_fine_minus);
        let vp = DVector::from_vec(log_fine_plus);
        let phi_plus_on_plus: Vec<Complex64> = (&self.kern_plus * &vm).iter().map(|z| z.exp()).collect();
        let phi_minus_on_minus: Vec<Complex64> = (&self.kern_minus * &vp).iter().map(|z| z.exp()).collect();
        let phi_minus_at_minus_i = self.kern_minus_at_minus_i.dot(&vp).exp();

        let mut phi_minus_on_plus = Vec::with_capacity(phi_plus_on_plus.len());
        let mut ratio_mp_on_plus = Vec::with_capacity(phi_plus_on_plus.len());
        for (&phi, &psi) in phi_plus_on_plus.iter().zip(&self.psi_main_plus) {
            let w = 1.0 + psi / q;
            phi_minus_on_plus.push(1.0 / (w * phi));
            ratio_mp_on_plus.push(1.0 / (w * phi * phi));
        }
        let mut phi_plus_on_minus = Vec::with_capacity(phi_minus_on_minus.len());
        let mut ratio_pm_on_minus = Vec::with_capacity(phi_minus_on_minus.len());
        for (&phi, &psi) in phi_minus_on_minus.iter().zip(&self.psi_main_minus) {
            let w = 1.0 + psi / q;
            phi_plus_on_minus.push(1.0 / (w * phi));
            ratio_pm_on_minus.push(1.0 / (w * phi * phi));
        }

        Ok(FactorValues {
            q,
            phi_plus_on_plus,
            phi_minus_on_minus,
            phi_minus_on_plus,
            phi_plus_on_minus,
            ratio_mp_on_plus,
            ratio_pm_on_minus,
            phi_minus_at_minus_i,
        })
    }

    /// Direct quadrature of `phi+_q` at an arbitrary point above the minus
    /// contour. Used by tests and diagnostics; the hot path goes through
    /// `factors_at`.
    pub fn phi_plus_at(
        &self,
        set: &ContourSet,
        q: Complex64,
        xi: Complex64,
    ) -> Result<Complex64, PricingError> {
        let logs = log_one_plus_psi_over_q(&self.psi_fine_minus, q, "fine minus grid")?;
        let pref = Complex64::new(0.0, -set.l_minus_fine.zeta / TWO_PI);
        let mut row = vec![Complex64::default(); set.l_minus_fine.len()];
        kernel_row(xi, &set.l_minus_fine, pref, &mut row);
        let s: Complex64 = row.iter().zip(&logs).map(|(&a, &b)| a * b).sum();
        Ok(s.exp())
    }

    /// Direct quadrature of `phi-_q` at an arbitrary point below the plus contour.
    pub fn phi_minus_at(
        &self,
        set: &ContourSet,
        q: Complex64,
        xi: Complex64,
    ) -> Result<Complex64, PricingError> {
        let logs = log_one_plus_psi_over_q(&self.psi_fine_plus, q, "fine plus grid")?;
        let pref = Complex64::new(0.0, set.l_plus_fine.zeta / TWO_PI);
        let mut row = vec![Complex64::default(); set.l_plus_fine.len()];
        kernel_row(xi, &set.l_plus_fine, pref, &mut row);
        let s: Complex64 = row.iter().zip(&logs).map(|(&a, &b)| a * b).sum();
        Ok(s.exp())
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contours::{select_step, SinhContour};

    /// Contour set built by hand: apexes at +-apex, fine grids with the long
    /// truncation demanded by the slowly decaying log kernel.
    fn manual_set(apex_plus: f64, apex_minus: f64, lambda: f64, lambda_fine: f64) -> ContourSet {
        let omega = std::f64::consts::FRAC_PI_4;
        let plus = SinhContour { omega1: 0.0, b: apex_plus / omega.sin(), omega };
        let minus = SinhContour { omega1: 0.0, b: -apex_minus / omega.sin(), omega: -omega };
        let zeta = select_step(0.5 * (std::f64::consts::FRAC_PI_2 - omega).min(omega), 1e-15);
        let zeta1 = 0.5 * zeta;
        ContourSet {
            l_plus: ContourGrid::build(plus, zeta, (lambda / zeta).ceil() as usize),
            l_minus: ContourGrid::build(minus, zeta, (lambda / zeta).ceil() as usize),
            l_plus_fine: ContourGrid::build(plus, zeta1, (lambda_fine / zeta1).ceil() as usize),
            l_minus_fine: ContourGrid::build(minus, zeta1, (lambda_fine / zeta1).ceil() as usize),
            bromwich: None,
        }
    }

    fn kobol_engine() -> (LevyModel, ContourSet, FactorEngine) {
        let model = LevyModel::kobol_with_m2(1.2, 1.0, -2.0, 0.1, 0.0).unwrap();
        let set = manual_set(0.25, -0.5, 6.0, 40.0);
        let engine = FactorEngine::new(&model, &set).unwrap();
        (model, set, engine)
    }

    #[test]
    fn brownian_factors_match_closed_form() {
        let sigma = 0.3;
        let model = LevyModel::gaussian(sigma, 0.0).unwrap();
        let set = manual_set(0.5, -0.5, 4.0, 32.0);
        let engine = FactorEngine::new(&model, &set).unwrap();
        for q in [Complex64::new(2.0, 0.0), Complex64::new(1.5, 2.0)] {
            let kappa = (2.0 * q).sqrt() / sigma;
            let f = engine.factors_at(q).unwrap();
            for (i, &xi) in set.l_plus.points.iter().enumerate() {
                let exact = kappa / (kappa - I * xi);
                let got = f.phi_plus_on_plus[i];
                assert!(
                    (got - exact).norm() < 1e-10 * exact.norm().max(1e-3),
                    "phi+({xi}) = {got}, want {exact} at q={q}"
                );
            }
            for (i, &xi) in set.l_minus.points.iter().enumerate() {
                let exact = kappa / (kappa + I * xi);
                let got = f.phi_minus_on_minus[i];
                assert!(
                    (got - exact).norm() < 1e-10 * exact.norm().max(1e-3),
                    "phi-({xi}) = {got}, want {exact} at q={q}"
                );
            }
            let exact = kappa / (kappa + I * (-I));
            assert!((f.phi_minus_at_minus_i - exact).norm() < 1e-10);
        }
    }

    #[test]
    fn factorization_identity_between_contours() {
        // Independent quadratures of both factors at strip points multiply
        // back to 1/(1 + psi/q).
        let (model, set, engine) = kobol_engine();
        for q in [Complex64::new(4.0, 0.0), Complex64::new(1.0, 1.5)] {
            for xi in [
                Complex64::new(0.0, 0.0),
                Complex64::new(3.7, 0.0),
                Complex64::new(-12.0, -0.1),
                Complex64::new(0.4, 0.2),
            ] {
                let p = engine.phi_plus_at(&set, q, xi).unwrap();
                let m = engine.phi_minus_at(&set, q, xi).unwrap();
                let w = 1.0 + model.psi(xi).unwrap() / q;
                let res = (p * m * w - 1.0).norm();
                assert!(res < 1e-12, "identity residual {res:.3e} at xi={xi}, q={q}");
            }
        }
    }

    #[test]
    fn factors_decay_at_infinity_like_the_symbol() {
        // phi+ phi- = q/(q+psi) -> 0, and for a symmetric model both factors
        // carry half the decay: |phi+(iA)| ~ |q/psi(iA)|^(1/2).
        let (model, set, engine) = kobol_engine();
        let q = Complex64::new(3.0, 0.0);
        let a = 4.0e3;
        let hi = engine.phi_plus_at(&set, q, Complex64::new(a, 0.0)).unwrap();
        let lo = engine.phi_minus_at(&set, q, Complex64::new(-a, 0.0)).unwrap();
        let symbol = (q / (q + model.psi(Complex64::new(a, 0.0)).unwrap())).norm();
        assert!(hi.norm() < 10.0 * symbol.sqrt(), "phi+({a}) = {hi}");
        assert!(lo.norm() < 10.0 * symbol.sqrt(), "phi-({}) = {lo}", -a);
    }

    #[test]
    fn mirror_symmetry() {
        // For the mirrored process, phi+ and phi- swap with xi -> -xi.
        let model = LevyModel::kobol_asymmetric(1.2, 1.2, 1.0, -2.0, 0.0412, 0.0608, 0.0).unwrap();
        let mirrored = model.mirrored();
        let set = manual_set(0.25, -0.5, 6.0, 40.0);
        let set_m = manual_set(0.5, -0.25, 6.0, 40.0);
        let engine = FactorEngine::new(&model, &set).unwrap();
        let engine_m = FactorEngine::new(&mirrored, &set_m).unwrap();
        let q = Complex64::new(2.0, 0.5);
        for xi in [Complex64::new(1.3, 0.0), Complex64::new(-0.4, 0.1)] {
            let a = engine.phi_plus_at(&set, q, xi).unwrap();
            let b = engine_m.phi_minus_at(&set_m, q, -xi).unwrap();
            assert!((a - b).norm() < 1e-12, "mirror: {a} vs {b}");
        }
    }

    #[test]
    fn cross_values_agree_with_direct_quadrature() {
        // The identity-based cross values on the main grids must match an
        // independent quadrature from displaced fine contours.
        let (_, set, engine) = kobol_engine();
        let displaced = manual_set(0.35, -0.65, 6.0, 40.0);
        let engine_d = FactorEngine::new(engine.model(), &displaced).unwrap();
        let q = Complex64::new(2.5, 0.0);
        let f = engine.factors_at(q).unwrap();
        // Only apex-region targets: on the wings the displaced contour runs
        // parallel to the target contour, so that quadrature (unlike anything
        // the engine computes) loses accuracy there.
        let mid = set.l_minus.len() / 2;
        for idx in [mid - 8, mid, mid + 5] {
            let xi = set.l_minus.points[idx];
            let direct = engine_d.phi_plus_at(&displaced, q, xi).unwrap();
            let got = f.phi_plus_on_minus[idx];
            assert!(
                (got - direct).norm() < 1e-10 * direct.norm(),
                "phi+ cross at {xi}: {got} vs {direct}"
            );
        }
    }

    #[test]
    fn winding_check_rejects_crossing_path() {
        let psi = vec![
            Complex64::new(-3.0, 0.4),
            Complex64::new(-3.0, -0.4),
        ];
        let q = Complex64::new(1.0, 0.0);
        assert!(log_one_plus_psi_over_q(&psi, q, "test").is_err());
        let psi_ok = vec![Complex64::new(3.0, 0.4), Complex64::new(3.0, -0.4)];
        assert!(log_one_plus_psi_over_q(&psi_ok, q, "test").is_ok());
    }

    #[test]
    fn factors_on_own_contour_satisfy_identity_exactly() {
        let (model, set, engine) = kobol_engine();
        let q = Complex64::new(1.7, 0.9);
        let f = engine.factors_at(q).unwrap();
        for (i, &xi) in set.l_plus.points.iter().enumerate() {
            let w = 1.0 + model.psi(xi).unwrap() / q;
            let res = (f.phi_plus_on_plus[i] * f.phi_minus_on_plus[i] * w - 1.0).norm();
            assert!(res < 1e-14);
            let ratio = f.phi_minus_on_plus[i] / f.phi_plus_on_plus[i];
            assert!((ratio - f.ratio_mp_on_plus[i]).norm() < 1e-14 * ratio.norm());
        }
    }
}
