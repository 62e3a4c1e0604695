//! Orchestration: grids, per-q engine runs, Laplace inversion, European part.
//!
//! `price` resolves the method (sinh-accelerated Bromwich unless the model
//! forces GWR), builds the contour family, walks the Laplace nodes in parallel
//! and assembles `V = V_euro + V1` per spot. With `dual_run` the whole
//! computation is repeated under an independently parameterized deformation
//! family and the discrepancy is reported as the error estimate.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::contours::{
    default_contour_set, ContourSet, ContourVariant, CorridorGeometry, InversionMethod,
};
use crate::engine::{BarrierEngine, PayoffSpec, ResolventSolve, SeriesMode, DEFAULT_SERIES_TERMS};
use crate::error::PricingError;
use crate::european::{euro_call, euro_constant, euro_digital};
use crate::laplace::{gwr_nodes, invert_gwr_samples, invert_sinh_samples, GWR_TERMS};
use crate::levy::LevyModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    SinhLaplace,
    Gwr,
    Auto,
}

#[derive(Debug, Clone)]
pub struct PriceRequest {
    pub model: LevyModel,
    pub payoff: PayoffSpec,
    pub h_minus: f64,
    pub h_plus: f64,
    pub maturity: f64,
    pub spots: Vec<f64>,
    pub method: Method,
    pub tolerance: f64,
    pub dual_run: bool,
    /// Override for the series summation; `None` selects automatically from
    /// maturity and model order.
    pub series: Option<SeriesMode>,
}

impl PriceRequest {
    pub fn new(
        model: LevyModel,
        payoff: PayoffSpec,
        h_minus: f64,
        h_plus: f64,
        maturity: f64,
        spots: Vec<f64>,
    ) -> Self {
        Self {
            model,
            payoff,
            h_minus,
            h_plus,
            maturity,
            spots,
            method: Method::Auto,
            tolerance: 1e-15,
            dual_run: false,
            series: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpotPrice {
    pub x: f64,
    pub value: f64,
    /// True when the spot is on or outside a barrier (the option is worthless).
    pub knocked: bool,
    /// |variant A - variant B| when dual-run was requested.
    pub error_estimate: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct GridSizes {
    pub n_laplace: usize,
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_plus_fine: usize,
    pub n_minus_fine: usize,
}

#[derive(Debug, Clone)]
pub struct PriceReport {
    pub spots: Vec<SpotPrice>,
    pub method_used: Method,
    pub series_used: SeriesMode,
    /// Set when the GWR rho table hit a degenerate denominator.
    pub degraded: bool,
    pub grids: GridSizes,
    pub wall_time: std::time::Duration,
}

fn validate(req: &PriceRequest) -> Result<(), PricingError> {
    if req.maturity <= 0.0 {
        return Err(PricingError::Domain("maturity must be positive".into()));
    }
    if req.h_minus >= req.h_plus {
        return Err(PricingError::Domain(format!(
            "need h_minus < h_plus, got ({}, {})",
            req.h_minus, req.h_plus
        )));
    }
    if !(req.tolerance > 0.0 && req.tolerance < 1e-3) {
        return Err(PricingError::Domain(format!(
            "tolerance must lie in (0, 1e-3), got {}",
            req.tolerance
        )));
    }
    if req.spots.is_empty() {
        return Err(PricingError::Domain("at least one spot is required".into()));
    }
    Ok(())
}

fn resolve_method(req: &PriceRequest) -> Method {
    match req.method {
        Method::Auto => {
            let nu = req.model.analyticity().nu;
            if nu < 1.0 && req.model.mu != 0.0 {
                Method::Gwr
            } else {
                Method::SinhLaplace
            }
        }
        m => m,
    }
}

fn resolve_series(req: &PriceRequest) -> SeriesMode {
    if let Some(mode) = req.series {
        return mode;
    }
    let nu = req.model.analyticity().nu;
    let resolvent = if nu >= 1.0 { req.maturity >= 1.0 } else { req.maturity >= 3.0 };
    if resolvent {
        SeriesMode::Resolvent { solve: ResolventSolve::LinearSolve }
    } else {
        SeriesMode::Truncated { terms: DEFAULT_SERIES_TERMS }
    }
}

fn geometry(req: &PriceRequest, inside: &[f64]) -> CorridorGeometry {
    let mut dist_minus = f64::INFINITY;
    let mut dist_plus = f64::INFINITY;
    for &x in inside {
        dist_minus = dist_minus.min(x - req.h_minus);
        dist_plus = dist_plus.min(req.h_plus - x);
    }
    if let PayoffSpec::DigitalPut { strike } | PayoffSpec::Call { strike } = req.payoff {
        dist_minus = dist_minus.min(strike - req.h_minus);
        dist_plus = dist_plus.min(req.h_plus - strike);
    }
    CorridorGeometry {
        h_minus: req.h_minus,
        h_plus: req.h_plus,
        dist_minus,
        dist_plus,
    }
}

struct RunOutcome {
    corrections: Vec<f64>,
    degraded: bool,
}

/// Inverts the barrier-correction transform for every inside spot under one
/// contour family.
fn run_correction(
    req: &PriceRequest,
    inside: &[f64],
    method: Method,
    series: SeriesMode,
    variant: ContourVariant,
) -> Result<RunOutcome, PricingError> {
    let inversion = match method {
        Method::SinhLaplace => InversionMethod::SinhLaplace,
        Method::Gwr => InversionMethod::Gwr,
        Method::Auto => unreachable!("method resolved before running"),
    };
    let geom = geometry(req, inside);
    let set = default_contour_set(&req.model, &geom, req.maturity, inversion, variant, req.tolerance)?;
    let engine = BarrierEngine::new(&req.model, req.h_minus, req.h_plus, set)?;
    match method {
        Method::SinhLaplace => {
            let grid = engine.set.bromwich.clone().expect("sinh method builds a Bromwich grid");
            let per_q: Result<Vec<Vec<Complex64>>, PricingError> = grid
                .qs
                .par_iter()
                .map(|&q| {
                    let t = engine.transform_for_q(q, &req.payoff, series)?;
                    Ok(inside.iter().map(|&x| engine.transform_at(&t, x) / q).collect())
                })
                .collect();
            let per_q = per_q?;
            let corrections = inside
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    let samples: Vec<Complex64> = per_q.iter().map(|row| row[i]).collect();
                    invert_sinh_samples(&grid, req.maturity, &samples)
                })
                .collect();
            Ok(RunOutcome { corrections, degraded: false })
        }
        Method::Gwr => {
            let nodes = gwr_nodes(req.maturity, GWR_TERMS);
            let per_q: Result<Vec<Vec<f64>>, PricingError> = nodes
                .par_iter()
                .map(|&q| {
                    let q = Complex64::new(q, 0.0);
                    let t = engine.transform_for_q(q, &req.payoff, series)?;
                    Ok(inside.iter().map(|&x| engine.transform_at(&t, x).re / q.re).collect())
                })
                .collect();
            let per_q = per_q?;
            let mut corrections = Vec::with_capacity(inside.len());
            let mut degraded = false;
            for i in 0..inside.len() {
                let samples: Vec<f64> = per_q.iter().map(|row| row[i]).collect();
                let r = invert_gwr_samples(&samples, req.maturity)?;
                degraded |= r.degraded;
                corrections.push(r.value);
            }
            Ok(RunOutcome { corrections, degraded })
        }
        Method::Auto => unreachable!(),
    }
}

fn european_part(req: &PriceRequest, x: f64) -> Result<f64, PricingError> {
    match req.payoff {
        PayoffSpec::NoTouch => Ok(euro_constant()),
        PayoffSpec::DigitalPut { strike } => euro_digital(&req.model, req.maturity, x, strike),
        PayoffSpec::Call { strike } => {
            // the lead term of the call correction contributes the forward
            // exactly (residue at -i gives e^x/(q + psi(-i))), so the
            // European part enters net of the forward
            let euro = euro_call(&req.model, req.maturity, x, strike)?;
            let forward = (x - req.maturity * req.model.riskfree_residual()?).exp();
            Ok(euro - forward)
        }
    }
}

fn grid_sizes(req: &PriceRequest, inside: &[f64], method: Method) -> Result<GridSizes, PricingError> {
    let inversion = match method {
        Method::SinhLaplace => InversionMethod::SinhLaplace,
        _ => InversionMethod::Gwr,
    };
    let set: ContourSet = default_contour_set(
        &req.model,
        &geometry(req, inside),
        req.maturity,
        inversion,
        ContourVariant::A,
        req.tolerance,
    )?;
    Ok(GridSizes {
        n_laplace: set.bromwich.as_ref().map_or(2 * GWR_TERMS, |b| b.qs.len()),
        n_plus: set.l_plus.len(),
        n_minus: set.l_minus.len(),
        n_plus_fine: set.l_plus_fine.len(),
        n_minus_fine: set.l_minus_fine.len(),
    })
}

pub fn price(req: &PriceRequest) -> Result<PriceReport, PricingError> {
    let start = std::time::Instant::now();
    validate(req)?;
    let mut method = resolve_method(req);
    let series = resolve_series(req);

    let inside: Vec<f64> = req
        .spots
        .iter()
        .copied()
        .filter(|&x| req.h_minus < x && x < req.h_plus)
        .collect();

    let mut degraded = false;
    let values: Vec<(f64, Option<f64>)> = if inside.is_empty() {
        Vec::new()
    } else {
        let first = match run_correction(req, &inside, method, series, ContourVariant::A) {
            Ok(out) => out,
            Err(PricingError::Divergence(_) | PricingError::Contour(_)) if req.method == Method::Auto && method == Method::SinhLaplace => {
                // the sinh deformation failed for this parameter set; the GWR
                // nodes are real and far less demanding
                method = Method::Gwr;
                run_correction(req, &inside, method, series, ContourVariant::A)?
            }
            Err(e) => return Err(e),
        };
        degraded |= first.degraded;
        let second = if req.dual_run {
            let out = run_correction(req, &inside, method, series, ContourVariant::B)?;
            degraded |= out.degraded;
            Some(out.corrections)
        } else {
            None
        };
        inside
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let euro = european_part(req, x)?;
                let v = euro + first.corrections[i];
                let est = second.as_ref().map(|b| (first.corrections[i] - b[i]).abs());
                Ok((v, est))
            })
            .collect::<Result<_, PricingError>>()?
    };

    let mut spot_iter = inside.iter().zip(values).peekable();
    let spots = req
        .spots
        .iter()
        .map(|&x| {
            if req.h_minus < x && x < req.h_plus {
                let (_, (v, est)) = spot_iter.next().expect("inside spots align");
                SpotPrice { x, value: v, knocked: false, error_estimate: est }
            } else {
                SpotPrice { x, value: 0.0, knocked: true, error_estimate: Some(0.0).filter(|_| req.dual_run) }
            }
        })
        .collect();

    Ok(PriceReport {
        spots,
        method_used: method,
        series_used: series,
        degraded,
        grids: grid_sizes(req, if inside.is_empty() { &req.spots } else { &inside }, method)?,
        wall_time: start.elapsed(),
    })
}

/// One row of a priced curve.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub x: f64,
    pub value: f64,
    /// `V / (x - h_minus)^{nu/2}`, the near-barrier normalization.
    pub normalized: Option<f64>,
}

/// Prices on a dense interior grid of `n` points, optionally emitting the
/// normalized column that exposes the `(x - h_minus)^{nu/2}` edge behavior.
pub fn price_curve(
    req: &PriceRequest,
    n: usize,
    normalize: bool,
) -> Result<Vec<CurvePoint>, PricingError> {
    if n == 0 {
        return Err(PricingError::Domain("curve needs at least one point".into()));
    }
    let width = req.h_plus - req.h_minus;
    let xs: Vec<f64> = (1..=n).map(|i| req.h_minus + width * i as f64 / (n + 1) as f64).collect();
    let mut dense = req.clone();
    dense.spots = xs;
    let report = price(&dense)?;
    let nu = req.model.analyticity().nu;
    Ok(report
        .spots
        .iter()
        .map(|s| CurvePoint {
            x: s.x,
            value: s.value,
            normalized: normalize.then(|| s.value / (s.x - req.h_minus).powf(0.5 * nu)),
        })
        .collect())
}
