//! Pricing of continuously monitored double-barrier options under KoBoL-type
//! Levy processes.
//!
//! The Laplace transform of the price in maturity is computed in the Fourier
//! dual of the log-spot via an operator form of Wiener-Hopf factorization
//! discretized on sinh-deformed contours; the transform is inverted either on
//! a deformed Bromwich contour (sinh acceleration) or by the Gaver-Wynn-Rho
//! algorithm.

pub mod config;
pub mod contours;
pub mod engine;
pub mod error;
pub mod european;
pub mod laplace;
pub mod levy;
pub mod pricing;
pub mod selftest;
pub mod tables;
pub mod wiener_hopf;

pub use contours::{
    default_contour_set, BromwichContour, BromwichGrid, ContourGrid, ContourSet, ContourVariant,
    CorridorGeometry, InversionMethod, SinhContour,
};
pub use error::PricingError;
pub use levy::{LevyModel, ModelKind};
pub use pricing::{price, price_curve, CurvePoint, Method, PriceReport, PriceRequest, SpotPrice};
