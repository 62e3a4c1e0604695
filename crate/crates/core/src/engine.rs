//! The double-barrier correction transform.
//!
//! For each Laplace argument `q` the corridor problem is solved by an
//! alternating sequence of one-barrier corrections: transfer operators carry a
//! transform supported on one side of the corridor across to the other,
//! picking up the factor ratio and a barrier-width exponential each pass. The
//! alternating series either converges fast enough to truncate or is summed
//! exactly in closed form through the resolvent `(I - A)^{-1}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::contours::ContourSet;
use crate::error::PricingError;
use crate::levy::{LevyModel, I};
use crate::wiener_hopf::{FactorEngine, FactorValues};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Payoff of the double-barrier contract, all knocked out on touching either
/// barrier. Strikes are in log-price, like the barriers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PayoffSpec {
    /// Pays 1 at maturity if neither barrier was touched.
    NoTouch,
    /// Pays 1 at maturity if additionally `X_T <= strike`.
    DigitalPut { strike: f64 },
    /// Pays `(e^{X_T} - e^strike)^+` if neither barrier was touched.
    Call { strike: f64 },
}

/// How the alternating series over barrier passes is summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMode {
    /// Plain truncation after `terms` one-barrier corrections.
    Truncated { terms: usize },
    /// Exact summation via `(I - A)^{-1}`.
    Resolvent { solve: ResolventSolve },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventSolve {
    /// LU solve against the two right-hand sides.
    LinearSolve,
    /// Explicit inverse; kept for cross-checking the solve path.
    Inverse,
}

pub const DEFAULT_SERIES_TERMS: usize = 9;

/// The Fourier data of the barrier correction for one `q`: a component on each
/// main grid plus the weights that turn them into a value at a spot.
#[derive(Debug, Clone)]
pub struct CorrectionTransform {
    /// `(zeta-/2pi) W+(xi-_j) phi+_q(xi-_j) der-_j` over the main minus grid.
    minus_part: Vec<Complex64>,
    /// `(zeta+/2pi) W-(xi+_k) phi-_q(xi+_k) der+_k` over the main plus grid.
    plus_part: Vec<Complex64>,
}

pub struct BarrierEngine {
    model: LevyModel,
    pub set: ContourSet,
    pub factors: FactorEngine,
    h_minus: f64,
    h_plus: f64,
    /// `1/(xi+_k - xi-_j)`, rows over the minus grid.
    cauchy_mp: DMatrix<Complex64>,
    /// `1/(xi-_k - xi+_j)`, rows over the plus grid.
    cauchy_pm: DMatrix<Complex64>,
}

/// The alternating series diverges when increments grow persistently; three
/// consecutive growths is the abort rule.
pub(crate) fn diverging(norms: &[f64]) -> bool {
    norms.windows(4).any(|w| w[1] > w[0] && w[2] > w[1] && w[3] > w[2])
}

fn infinity_norm(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl BarrierEngine {
    pub fn new(
        model: &LevyModel,
        h_minus: f64,
        h_plus: f64,
        set: ContourSet,
    ) -> Result<Self, PricingError> {
        if h_minus >= h_plus {
            return Err(PricingError::Domain(format!(
                "need h_minus < h_plus, got ({h_minus}, {h_plus})"
            )));
        }
        let factors = FactorEngine::new(model, &set)?;
        let np = set.l_plus.len();
        let nm = set.l_minus.len();
        let mut cauchy_mp = DMatrix::zeros(nm, np);
        for (j, &xi) in set.l_minus.points.iter().enumerate() {
            for (k, &eta) in set.l_plus.points.iter().enumerate() {
                cauchy_mp[(j, k)] = Complex64::new(1.0, 0.0) / (eta - xi);
            }
        }
        let mut cauchy_pm = DMatrix::zeros(np, nm);
        for (j, &xi) in set.l_plus.points.iter().enumerate() {
            for (k, &eta) in set.l_minus.points.iter().enumerate() {
                cauchy_pm[(j, k)] = Complex64::new(1.0, 0.0) / (eta - xi);
            }
        }
        Ok(Self {
            model: *model,
            set,
            factors,
            h_minus,
            h_plus,
            cauchy_mp,
            cauchy_pm,
        })
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn barriers(&self) -> (f64, f64) {
        (self.h_minus, self.h_plus)
    }

    fn validate_payoff(&self, payoff: &PayoffSpec) -> Result<(), PricingError> {
        let strike = match payoff {
            PayoffSpec::NoTouch => return Ok(()),
            PayoffSpec::DigitalPut { strike } | PayoffSpec::Call { strike } => *strike,
        };
        if !(self.h_minus < strike && strike < self.h_plus) {
            return Err(PricingError::Domain(format!(
                "strike {strike} must lie inside the corridor ({}, {})",
                self.h_minus, self.h_plus
            )));
        }
        Ok(())
    }

    /// Transfer matrices for one `q`: `K_mp` carries a plus-grid transform to
    /// the minus grid across the corridor width, `K_pm` the reverse.
    fn transfer_matrices(&self, f: &FactorValues) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        let dh = self.h_plus - self.h_minus;
        let sp = &self.set.l_plus;
        let sm = &self.set.l_minus;
        let mut k_mp = self.cauchy_mp.clone();
        for (k, (&xi, &der)) in sp.points.iter().zip(&sp.derivs).enumerate() {
            let col = sp.zeta / TWO_PI * (I * dh * xi).exp() * f.ratio_mp_on_plus[k] * der;
            for j in 0..k_mp.nrows() {
                k_mp[(j, k)] *= col;
            }
        }
        let mut k_pm = self.cauchy_pm.clone();
        for (k, (&xi, &der)) in sm.points.iter().zip(&sm.derivs).enumerate() {
            let col = sm.zeta / TWO_PI * (-I * dh * xi).exp() * f.ratio_pm_on_minus[k] * der;
            for j in 0..k_pm.nrows() {
                k_pm[(j, k)] *= col;
            }
        }
        (k_mp, k_pm)
    }

    /// First-pass transforms `W+_1` on the minus grid and `W-_1` on the plus
    /// grid for the given payoff.
    fn initial_pair(
        &self,
        f: &FactorValues,
        payoff: &PayoffSpec,
    ) -> (DVector<Complex64>, DVector<Complex64>) {
        let sp = &self.set.l_plus;
        let sm = &self.set.l_minus;
        match payoff {
            PayoffSpec::NoTouch => {
                let wp = DVector::from_iterator(sm.len(), sm.points.iter().map(|&xi| -I / xi));
                let wm = DVector::from_iterator(sp.len(), sp.points.iter().map(|&xi| I / xi));
                (wp, wm)
            }
            PayoffSpec::DigitalPut { strike } => {
                let wplus_src = DVector::from_iterator(
                    sp.len(),
                    sp.points.iter().zip(&sp.derivs).enumerate().map(|(k, (&xi, &der))| {
                        sp.zeta / TWO_PI * (I * (self.h_plus - strike) * xi).exp()
                            * f.phi_minus_on_plus[k]
                            * der
                            / xi
                    }),
                );
                let wp = -(&self.cauchy_mp * wplus_src);
                let wminus_src = DVector::from_iterator(
                    sm.len(),
                    sm.points.iter().zip(&sm.derivs).enumerate().map(|(k, (&xi, &der))| {
                        sm.zeta / TWO_PI * (I * (self.h_minus - strike) * xi).exp()
                            * f.phi_plus_on_minus[k]
                            * der
                            / xi
                    }),
                );
                let mut wm = &self.cauchy_pm * wminus_src;
                for (j, &xi) in sp.points.iter().enumerate() {
                    wm[j] += I / xi;
                }
                (wp, wm)
            }
            PayoffSpec::Call { strike } => {
                let ea = strike.exp();
                let wplus_src = DVector::from_iterator(
                    sp.len(),
                    sp.points.iter().zip(&sp.derivs).enumerate().map(|(k, (&xi, &der))| {
                        I * ea * sp.zeta / TWO_PI
                            * (I * (self.h_plus - strike) * xi).exp()
                            * f.phi_minus_on_plus[k]
                            * der
                            / (xi * (xi + I))
                    }),
                );
                let mut wp = -(&self.cauchy_mp * wplus_src);
                let lead = f.phi_minus_at_minus_i * self.h_plus.exp();
                for (j, &xi) in sm.points.iter().enumerate() {
                    wp[j] += lead / (I * xi - 1.0) - ea / (I * xi);
                }
                let wminus_src = DVector::from_iterator(
                    sm.len(),
                    sm.points.iter().zip(&sm.derivs).enumerate().map(|(k, (&xi, &der))| {
                        I * ea * sm.zeta / TWO_PI
                            * (I * (self.h_minus - strike) * xi).exp()
                            * f.phi_plus_on_minus[k]
                            * der
                            / (xi * (xi + I))
                    }),
                );
                let wm = &self.cauchy_pm * wminus_src;
                (wp, wm)
            }
        }
    }

    /// Sums `sum_{j>=1} (-1)^j W_j` on both grids.
    fn sum_series(
        &self,
        k_mp: &DMatrix<Complex64>,
        k_pm: &DMatrix<Complex64>,
        w_plus_1: DVector<Complex64>,
        w_minus_1: DVector<Complex64>,
        mode: SeriesMode,
        q: Complex64,
    ) -> Result<(DVector<Complex64>, DVector<Complex64>), PricingError> {
        match mode {
            SeriesMode::Truncated { terms } => {
                let mut sum_p = -&w_plus_1;
                let mut sum_m = -&w_minus_1;
                let mut wp = w_plus_1;
                let mut wm = w_minus_1;
                let mut norms = vec![infinity_norm(&wp).max(infinity_norm(&wm))];
                let mut sign = 1.0;
                for _ in 2..=terms {
                    let wp_next = (k_mp * &wm) * I;
                    let wm_next = (k_pm * &wp) * (-I);
                    wp = wp_next;
                    wm = wm_next;
                    norms.push(infinity_norm(&wp).max(infinity_norm(&wm)));
                    if diverging(&norms) {
                        return Err(PricingError::Divergence(format!(
                            "one-barrier corrections grow at q = {q}; corridor too narrow for truncated summation"
                        )));
                    }
                    sum_p += &wp * Complex64::new(sign, 0.0);
                    sum_m += &wm * Complex64::new(sign, 0.0);
                    sign = -sign;
                }
                Ok((sum_p, sum_m))
            }
            SeriesMode::Resolvent { solve } => {
                // W_{j+2} = A W_j with A+ = K_mp K_pm and A- = K_pm K_mp, so the
                // alternating tail telescopes to (I - A)^{-1} (W_2 - W_1).
                let a_plus = k_mp * k_pm;
                let a_minus = k_pm * k_mp;
                let rho = spectral_radius_estimate(&a_plus);
                if rho >= 1.0 {
                    return Err(PricingError::Divergence(format!(
                        "resolvent spectral radius estimate {rho:.4} >= 1 at q = {q}"
                    )));
                }
                let w_plus_2 = (k_mp * &w_minus_1) * I;
                let w_minus_2 = (k_pm * &w_plus_1) * (-I);
                let rhs_p = w_plus_2 - w_plus_1;
                let rhs_m = w_minus_2 - w_minus_1;
                let sum_p = resolvent_apply(a_plus, rhs_p, solve, q)?;
                let sum_m = resolvent_apply(a_minus, rhs_m, solve, q)?;
                Ok((sum_p, sum_m))
            }
        }
    }

    /// Fourier data of the barrier correction `V1` at one `q`.
    pub fn correction_transform(
        &self,
        f: &FactorValues,
        payoff: &PayoffSpec,
        mode: SeriesMode,
    ) -> Result<CorrectionTransform, PricingError> {
        self.validate_payoff(payoff)?;
        let (k_mp, k_pm) = self.transfer_matrices(f);
        let (w1p, w1m) = self.initial_pair(f, payoff);
        let (sum_p, sum_m) = self.sum_series(&k_mp, &k_pm, w1p, w1m, mode, f.q)?;
        let sm = &self.set.l_minus;
        let sp = &self.set.l_plus;
        let minus_part = sum_p
            .iter()
            .enumerate()
            .map(|(j, &w)| sm.zeta / TWO_PI * w * f.phi_plus_on_minus[j] * sm.derivs[j])
            .collect();
        let plus_part = sum_m
            .iter()
            .enumerate()
            .map(|(k, &w)| sp.zeta / TWO_PI * w * f.phi_minus_on_plus[k] * sp.derivs[k])
            .collect();
        Ok(CorrectionTransform { minus_part, plus_part })
    }

    /// Evaluates the correction transform at a log-spot inside the corridor.
    ///
    /// The value is `q` times the Laplace transform of the correction; the
    /// inversion layer divides the full transform by `q`, which also turns the
    /// European constant payoff into `1/q`.
    pub fn transform_at(&self, t: &CorrectionTransform, x: f64) -> Complex64 {
        let mut acc = Complex64::default();
        for (j, &xi) in self.set.l_minus.points.iter().enumerate() {
            acc += t.minus_part[j] * (I * (x - self.h_plus) * xi).exp();
        }
        for (k, &xi) in self.set.l_plus.points.iter().enumerate() {
            acc += t.plus_part[k] * (I * (x - self.h_minus) * xi).exp();
        }
        acc
    }

    /// Full per-q pipeline: factors, series, transform.
    pub fn transform_for_q(
        &self,
        q: Complex64,
        payoff: &PayoffSpec,
        mode: SeriesMode,
    ) -> Result<CorrectionTransform, PricingError> {
        let f = self.factors.factors_at(q)?;
        self.correction_transform(&f, payoff, mode)
    }
}

/// Power-iteration estimate of the spectral radius, deterministic start.
fn spectral_radius_estimate(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut v = DVector::from_element(n, Complex64::new(1.0, 0.0));
    let mut rho = 0.0;
    for _ in 0..25 {
        let w = a * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        rho = norm / v.norm();
        v = w / Complex64::new(norm, 0.0);
    }
    rho
}

fn resolvent_apply(
    a: DMatrix<Complex64>,
    rhs: DVector<Complex64>,
    solve: ResolventSolve,
    q: Complex64,
) -> Result<DVector<Complex64>, PricingError> {
    let n = a.nrows();
    let mut m = -a;
    for i in 0..n {
        m[(i, i)] += Complex64::new(1.0, 0.0);
    }
    match solve {
        ResolventSolve::LinearSolve => m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| PricingError::Singular(format!("I - A is singular at q = {q}"))),
        ResolventSolve::Inverse => {
            let inv = m
                .try_inverse()
                .ok_or_else(|| PricingError::Singular(format!("I - A is singular at q = {q}")))?;
            Ok(inv * rhs)
        }
    }
}
