//! Laplace-transform inversion back-ends.
//!
//! Two routes from `f~(q)` back to `f(T)`: a trapezoid rule on a sinh-deformed
//! Bromwich contour (machine precision when `f~` admits the deformation) and
//! the Gaver-Wynn-Rho algorithm on the real axis (slower convergence, but only
//! needs `f~` at real points, which keeps every inner contour undeformed in q).

use num_complex::Complex64;

use crate::contours::BromwichGrid;
use crate::error::PricingError;

/// Number of Wynn-rho rows; the transform is sampled at `2 * GWR_TERMS` points.
pub const GWR_TERMS: usize = 8;

/// Result of a Gaver-Wynn-Rho extrapolation. `degraded` flags a near-zero
/// denominator in the rho table, in which case `value` comes from the last
/// completed even column instead of the full table.
#[derive(Debug, Clone, Copy)]
pub struct GwrResult {
    pub value: f64,
    pub degraded: bool,
}

/// Bromwich integral on a sinh-deformed contour by the trapezoid rule. The
/// transform is evaluated only on the upper half grid; the lower half is
/// folded in through `f~(conj q) = conj f~(q)`.
pub fn invert_sinh<F>(grid: &BromwichGrid, maturity: f64, mut ev: F) -> Result<f64, PricingError>
where
    F: FnMut(Complex64) -> Result<Complex64, PricingError>,
{
    let mut samples = Vec::with_capacity(grid.qs.len());
    for &q in &grid.qs {
        samples.push(ev(q)?);
    }
    Ok(invert_sinh_samples(grid, maturity, &samples))
}

/// Same quadrature with the transform values already in hand; `samples[k]`
/// must equal `f~(q_k)` on the half grid of `grid`.
pub fn invert_sinh_samples(grid: &BromwichGrid, maturity: f64, samples: &[Complex64]) -> f64 {
    assert_eq!(samples.len(), grid.qs.len());
    let mut acc = 0.0;
    for (k, (&q, &fv)) in grid.qs.iter().zip(samples).enumerate() {
        let w = if k == 0 { 0.5 } else { 1.0 };
        let term = (maturity * q).exp() * fv * grid.coshes[k];
        acc += w * term.re;
    }
    grid.zeta * grid.contour.b_l / std::f64::consts::PI * acc
}

/// Real evaluation points `q_k = k ln 2 / T`, `k = 1..=2m`, required by
/// `invert_gwr_samples` with `m` rho rows.
pub fn gwr_nodes(maturity: f64, m: usize) -> Vec<f64> {
    let step = std::f64::consts::LN_2 / maturity;
    (1..=2 * m).map(|k| k as f64 * step).collect()
}

/// Gaver-Wynn-Rho inversion from samples at `gwr_nodes(maturity, m)`.
///
/// Gaver functionals `G_n = (ln2/T) n C(2n,n) sum_j (-1)^j C(n,j) f~((n+j) ln2/T)`
/// converge to `f(T)` only logarithmically; the Wynn rho table accelerates the
/// sequence, and the value in the highest completed even column is returned.
pub fn invert_gwr_samples(samples: &[f64], maturity: f64) -> Result<GwrResult, PricingError> {
    if samples.len() < 2 || samples.len() % 2 != 0 {
        return Err(PricingError::Domain(format!(
            "GWR needs an even number of samples >= 2, got {}",
            samples.len()
        )));
    }
    let m = samples.len() / 2;
    let step = std::f64::consts::LN_2 / maturity;

    let mut gaver = Vec::with_capacity(m);
    for n in 1..=m {
        let mut s = 0.0;
        let mut binom = 1.0; // C(n, j)
        for j in 0..=n {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binom * samples[n + j - 1];
            binom *= (n - j) as f64 / (j + 1) as f64;
        }
        // n * C(2n, n) = (2n)! / (n! (n-1)!)
        let mut c2n = 1.0;
        for i in 0..n {
            c2n *= (2 * n - i) as f64 / (i + 1) as f64;
        }
        gaver.push(step * n as f64 * c2n * s);
    }

    // Wynn rho: rho[-1] = 0, rho[0] = G; column k has m - k entries.
    let mut prev_prev = vec![0.0; m + 1];
    let mut prev = gaver.clone();
    let mut best = prev[0];
    let mut degraded = false;
    for k in 1..m {
        let len = m - k;
        let mut col = Vec::with_capacity(len);
        for n in 0..len {
            let denom = prev[n + 1] - prev[n];
            let scale = prev[n].abs().max(prev[n + 1].abs()).max(1e-300);
            if denom.abs() < 1e-14 * scale {
                degraded = true;
                break;
            }
            col.push(prev_prev[n + 1] + k as f64 / denom);
        }
        if col.len() < len {
            break;
        }
        if k % 2 == 0 {
            best = col[0];
        }
        prev_prev = prev;
        prev = col;
    }
    Ok(GwrResult { value: best, degraded })
}

/// Convenience wrapper evaluating the transform itself at the GWR nodes.
pub fn invert_gwr<F>(maturity: f64, m: usize, mut ev: F) -> Result<GwrResult, PricingError>
where
    F: FnMut(f64) -> Result<f64, PricingError>,
{
    let mut samples = Vec::with_capacity(2 * m);
    for q in gwr_nodes(maturity, m) {
        samples.push(ev(q)?);
    }
    invert_gwr_samples(&samples, maturity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contours::{select_step, BromwichContour};

    fn test_grid_with_sigma(maturity: f64, sigma: f64) -> BromwichGrid {
        let omega = std::f64::consts::PI / 5.0;
        let b = 0.5 * sigma / omega.sin();
        let contour = BromwichContour::new(sigma, b, omega).unwrap();
        let d = 0.5 * omega.min(std::f64::consts::FRAC_PI_2 - omega);
        let zeta = select_step(d, 1e-15);
        let decay = maturity * b * omega.sin();
        let lambda = (2.0 * ((10.0f64 / 1e-15).ln() + 5.0) / decay).ln().max(1.0);
        BromwichGrid::build(contour, zeta, (lambda / zeta).ceil() as usize)
    }

    fn test_grid(maturity: f64) -> BromwichGrid {
        test_grid_with_sigma(maturity, 1.0f64.max(1.0 / maturity))
    }

    #[test]
    fn sinh_known_pairs() {
        for maturity in [0.25, 1.0, 3.0] {
            let grid = test_grid(maturity);
            let one = Complex64::new(1.0, 0.0);
            let v = invert_sinh(&grid, maturity, |q| Ok(one / q)).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "1/q at T={maturity}: {v}");
            let v = invert_sinh(&grid, maturity, |q| Ok(one / (q + 1.0))).unwrap();
            assert!((v - (-maturity).exp()).abs() < 1e-12, "1/(q+1) at T={maturity}: {v}");
            let v = invert_sinh(&grid, maturity, |q| Ok(one / (q * q))).unwrap();
            assert!((v - maturity).abs() < 1e-12 * maturity.max(1.0), "1/q^2 at T={maturity}: {v}");
            // poles at +-i squeeze the strip of the default contour; a larger
            // abscissa keeps the deformation clear of them
            let wide = test_grid_with_sigma(maturity, 4.0f64.max(1.0 / maturity));
            let v = invert_sinh(&wide, maturity, |q| Ok(q / (q * q + 1.0))).unwrap();
            assert!((v - maturity.cos()).abs() < 1e-11, "q/(q^2+1) at T={maturity}: {v}");
        }
    }

    #[test]
    fn sinh_step_refinement_is_converged() {
        let maturity = 0.5;
        let coarse = test_grid(maturity);
        let fine = BromwichGrid::build(coarse.contour, 0.5 * coarse.zeta, 2 * coarse.n);
        let f = |q: Complex64| Ok(Complex64::new(1.0, 0.0) / (q + 2.0));
        let a = invert_sinh(&coarse, maturity, f).unwrap();
        let b = invert_sinh(&fine, maturity, f).unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn gwr_known_pairs() {
        for maturity in [0.25, 1.0, 3.0] {
            let r = invert_gwr(maturity, GWR_TERMS, |q| Ok(1.0 / q)).unwrap();
            assert!((r.value - 1.0).abs() < 1e-8, "1/q at T={maturity}: {}", r.value);
            let r = invert_gwr(maturity, GWR_TERMS, |q| Ok(1.0 / (q + 1.0))).unwrap();
            assert!(
                (r.value - (-maturity).exp()).abs() < 1e-6,
                "1/(q+1) at T={maturity}: {}",
                r.value
            );
            let r = invert_gwr(maturity, GWR_TERMS, |q| Ok(1.0 / (q * q))).unwrap();
            assert!((r.value - maturity).abs() < 1e-6 * maturity.max(1.0), "1/q^2: {}", r.value);
        }
    }

    #[test]
    fn gwr_oscillatory_pair_is_harder_but_converges() {
        let maturity = 1.0;
        let r = invert_gwr(maturity, GWR_TERMS, |q| Ok(q / (q * q + 1.0))).unwrap();
        assert!((r.value - maturity.cos()).abs() < 1e-4, "cos pair: {}", r.value);
    }

    #[test]
    fn gwr_nodes_layout() {
        let nodes = gwr_nodes(2.0, 3);
        assert_eq!(nodes.len(), 6);
        assert!((nodes[0] - std::f64::consts::LN_2 / 2.0).abs() < 1e-16);
        assert!((nodes[5] - 6.0 * std::f64::consts::LN_2 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn gwr_degrades_gracefully_on_constant_sequence() {
        // f~ = 0 gives identical Gaver functionals and zero rho denominators.
        let r = invert_gwr_samples(&[0.0; 16], 1.0).unwrap();
        assert!(r.degraded);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn gwr_rejects_odd_sample_count() {
        assert!(invert_gwr_samples(&[1.0, 2.0, 3.0], 1.0).is_err());
    }
}
