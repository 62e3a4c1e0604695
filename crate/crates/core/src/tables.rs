//! Built-in reference tables for the benchmark parameter set.
//!
//! All six tables share the model family `m2 = 0.1`, `lambda_plus = 1`,
//! `lambda_minus = -2`, `mu = 0` with barriers at `h = +-0.05` and spots
//! `x in {-0.04, -0.02, 0, 0.02, 0.04}`; they differ in the process order
//! `nu`, the payoff, and the maturities tabulated.

use crate::engine::PayoffSpec;
use crate::levy::LevyModel;
use crate::pricing::PriceRequest;

pub const SPOTS: [f64; 5] = [-0.04, -0.02, 0.0, 0.02, 0.04];
pub const H_MINUS: f64 = -0.05;
pub const H_PLUS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferencePayoff {
    NoTouch,
    DigitalPut,
    Call,
}

pub struct ReferenceTable {
    pub name: &'static str,
    pub nu: f64,
    pub payoff: ReferencePayoff,
    pub strike: f64,
    /// `(maturity, values at SPOTS)` rows.
    pub rows: &'static [(f64, [f64; 5])],
}

impl ReferenceTable {
    pub fn model(&self) -> Result<LevyModel, crate::error::PricingError> {
        LevyModel::kobol_with_m2(self.nu, 1.0, -2.0, 0.1, 0.0)
    }

    pub fn payoff_spec(&self) -> PayoffSpec {
        match self.payoff {
            ReferencePayoff::NoTouch => PayoffSpec::NoTouch,
            ReferencePayoff::DigitalPut => PayoffSpec::DigitalPut { strike: self.strike },
            ReferencePayoff::Call => PayoffSpec::Call { strike: self.strike },
        }
    }

    pub fn request(&self, maturity: f64) -> Result<PriceRequest, crate::error::PricingError> {
        Ok(PriceRequest::new(
            self.model()?,
            self.payoff_spec(),
            H_MINUS,
            H_PLUS,
            maturity,
            SPOTS.to_vec(),
        ))
    }
}

pub const TABLES: &[ReferenceTable] = &[
    ReferenceTable {
        name: "table1",
        nu: 1.2,
        payoff: ReferencePayoff::NoTouch,
        strike: 0.0,
        rows: &[
            (0.004, [
                0.944232464403407,
                0.984791837906914,
                0.988695065999628,
                0.985130282346314,
                0.945243176095013,
            ]),
            (0.25, [
                0.0925697509133228,
                0.183597478719832,
                0.216239237263554,
                0.187081211429371,
                0.0961682820257716,
            ]),
            (1.0, [
                0.000488706725350729,
                0.000970205697557125,
                0.00114386828643243,
                0.000989805061225368,
                0.000508651147353323,
            ]),
        ],
    },
    ReferenceTable {
        name: "table2",
        nu: 0.2,
        payoff: ReferencePayoff::NoTouch,
        strike: 0.0,
        rows: &[
            (0.004, [
                0.997159234166403,
                0.99785039353072,
                0.997988709856923,
                0.997873055193352,
                0.997205955464661,
            ]),
            (0.25, [
                0.837255746301533,
                0.872998705974284,
                0.880407965481731,
                0.87420738492834,
                0.83967624398896,
            ]),
            (3.0, [
                0.133264677579268,
                0.179416477579805,
                0.192359856627979,
                0.181619873768539,
                0.136797832249264,
            ]),
        ],
    },
    ReferenceTable {
        name: "table3",
        nu: 1.2,
        payoff: ReferencePayoff::DigitalPut,
        strike: -0.01,
        rows: &[
            (0.004, [
                0.936033131420221,
                0.942743923266939,
                0.0407165015135701,
                0.00756840253469884,
                0.00309395728748227,
            ]),
            (0.25, [
                0.0367167500936684,
                0.0706406957622098,
                0.0786094461300362,
                0.0641355992734415,
                0.0319013015638287,
            ]),
            (1.0, [
                0.000177771957381001,
                0.000352921137775741,
                0.000416090671743419,
                0.000360047453580148,
                0.000185024416500812,
            ]),
        ],
    },
    ReferenceTable {
        name: "table4",
        nu: 0.2,
        payoff: ReferencePayoff::DigitalPut,
        strike: -0.01,
        rows: &[
            (0.004, [
                0.996564411171869,
                0.99657921660561,
                0.00112224938146623,
                0.000499111365249944,
                0.00031397891513379,
            ]),
            (0.25, [
                0.806048752314656,
                0.808342339586413,
                0.0564741685789332,
                0.0263104606596591,
                0.0165845924903516,
            ]),
            (3.0, [
                0.0826482000571708,
                0.0963948765801401,
                0.064756560941078,
                0.0445502961594203,
                0.0292378743031199,
            ]),
        ],
    },
    ReferenceTable {
        name: "table5",
        nu: 1.2,
        payoff: ReferencePayoff::Call,
        strike: 0.0,
        rows: &[
            (0.004, [
                0.0000824404624213168,
                0.000204166217898571,
                0.00191177395953069,
                0.0197639609828199,
                0.0376099511198009,
            ]),
            (0.25, [
                0.00082409621567,
                0.00169255391432158,
                0.00212237950197215,
                0.00195192815759268,
                0.0010370403093618,
            ]),
            (1.0, [
                4.80103589597936e-6,
                9.53128787591073e-6,
                0.0000112373996155185,
                9.72392418717438e-6,
                4.99704769890697e-6,
            ]),
            (3.0, [
                4.074629523e-12,
                8.089334758e-12,
                9.537398649e-12,
                8.252398764e-12,
                4.240829909e-12,
            ]),
        ],
    },
    ReferenceTable {
        name: "table6",
        nu: 0.2,
        payoff: ReferencePayoff::Call,
        strike: 0.0,
        rows: &[
            (0.004, [
                8.77581627294074e-6,
                0.0000140126705130402,
                0.0000365669756568704,
                0.0201495491781489,
                0.0406572530052907,
            ]),
            (0.25, [
                0.000461949526934386,
                0.000737018983172683,
                0.001757476257127,
                0.0171789730510928,
                0.032229359938136,
            ]),
            (3.0, [
                0.00080243923836716,
                0.00124070584073691,
                0.00182400986139031,
                0.00268682684255628,
                0.00274066739944123,
            ]),
            (5.0, [
                0.000327733526265667,
                0.000493515765859709,
                0.000630026253687271,
                0.000720082418558615,
                0.000595670818077265,
            ]),
        ],
    },
];

pub fn lookup(name: &str) -> Option<&'static ReferenceTable> {
    TABLES.iter().find(|t| t.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_finds_all_and_rejects_unknown() {
        for t in TABLES {
            assert!(lookup(t.name).is_some());
            assert!(!t.rows.is_empty());
            t.model().unwrap();
        }
        assert!(lookup("table7").is_none());
    }

    #[test]
    fn requests_build_for_every_row() {
        for t in TABLES {
            for (maturity, values) in t.rows {
                let req = t.request(*maturity).unwrap();
                assert_eq!(req.spots.len(), values.len());
            }
        }
    }
}
