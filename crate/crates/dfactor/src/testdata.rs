//! Datum constructors shared by the unit tests.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::fe::{DeltaFactor, FunctionalEquationDatum, GammaFactor};

pub fn zeta_datum() -> FunctionalEquationDatum {
    FunctionalEquationDatum::new(
        "zeta",
        PI.powf(-0.5),
        Complex64::new(1.0, 0.0),
        vec![GammaFactor::new(0.5, Complex64::new(0.0, 0.0))],
    )
    .unwrap()
}

pub fn synthetic_theta_datum() -> FunctionalEquationDatum {
    FunctionalEquationDatum::new(
        "synthetic-theta",
        1.0,
        Complex64::new(1.0, 0.0),
        vec![GammaFactor::new(1.0, Complex64::new(0.5, 3.0))],
    )
    .unwrap()
}

pub fn dirichlet5_datum() -> FunctionalEquationDatum {
    FunctionalEquationDatum::new(
        "dirichlet-5-odd",
        (5.0 / PI).sqrt(),
        Complex64::new(0.8506508083520399, 0.5257311121191336),
        vec![GammaFactor::new(0.5, Complex64::new(0.5, 0.0))],
    )
    .unwrap()
}

pub fn zeta_squared_datum() -> FunctionalEquationDatum {
    FunctionalEquationDatum::new(
        "zeta2",
        1.0 / PI,
        Complex64::new(1.0, 0.0),
        vec![
            GammaFactor::new(0.5, Complex64::new(0.0, 0.0)),
            GammaFactor::new(0.5, Complex64::new(0.0, 0.0)),
        ],
    )
    .unwrap()
}

pub fn zeta_delta() -> DeltaFactor {
    DeltaFactor::new(zeta_datum()).unwrap()
}

pub fn synthetic_theta_delta() -> DeltaFactor {
    DeltaFactor::new(synthetic_theta_datum()).unwrap()
}

pub fn dirichlet5_delta() -> DeltaFactor {
    DeltaFactor::new(dirichlet5_datum()).unwrap()
}

pub fn zeta_squared_delta() -> DeltaFactor {
    DeltaFactor::new(zeta_squared_datum()).unwrap()
}
