//! Functional-equation data and their derived invariants.
//!
//! A datum is the tuple `(Q, ω, {(λ_j, μ_j)})` appearing in
//!
//! ```text
//! Δ(s) = ω · Q^(1-2s) · ∏_j Γ(λ_j (1-s) + conj(μ_j)) / Γ(λ_j s + μ_j).
//! ```
//!
//! Different data can produce the same Δ, so the datum is treated as
//! authoritative and never canonicalized; the quantities that *are* invariant
//! (degree, λQ², ξ = η + iΘ) live in [`DerivedInvariants`] together with the
//! unit-modulus constant ω* of the Stirling asymptotic and the calibrated
//! height t0 above which that asymptotic is trusted.

use num_complex::Complex64;
use thiserror::Error;

use crate::special;

/// Relative Δ-error at σ = 1/2 below which the Stirling asymptotic is
/// considered usable; t0 is the first grid height that reaches it.
pub const CALIBRATION_REL_TOL: f64 = 1e-1;

const CALIBRATION_GRID_START: f64 = 10.0;
const CALIBRATION_GRID_FACTOR: f64 = 1.25;
const CALIBRATION_GRID_CEILING: f64 = 1e7;

const OMEGA_MODULUS_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DatumError {
    #[error("invalid datum ({field}): {message}")]
    InvalidDatum { field: String, message: String },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error(
        "asymptotic calibration stalled: relative error still above {tol:e} at t = {t:e}"
    )]
    CalibrationFailed { tol: f64, t: f64 },
}

/// One factor Γ(λs + μ) of the denominator product (the numerator factor
/// Γ(λ(1-s) + conj(μ)) is implied by the same pair).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaFactor {
    pub lambda: f64,
    pub mu: Complex64,
}

impl GammaFactor {
    pub fn new(lambda: f64, mu: Complex64) -> Self {
        Self { lambda, mu }
    }
}

/// The tuple `(Q, ω, {(λ_j, μ_j)})` defining a Δ-factor.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalEquationDatum {
    pub name: String,
    pub q: f64,
    pub omega: Complex64,
    pub gamma_factors: Vec<GammaFactor>,
}

impl FunctionalEquationDatum {
    /// Builds and validates a datum. Constraints: `Q > 0`, every `λ_j > 0`,
    /// every `Re μ_j ≥ 0`, `ω` on the unit circle (within 1e-12, so computed
    /// root numbers are accepted), at least one Γ-factor, and degree
    /// `d = 2 Σ λ_j ≥ 1`.
    pub fn new(
        name: impl Into<String>,
        q: f64,
        omega: Complex64,
        gamma_factors: Vec<GammaFactor>,
    ) -> Result<Self, DatumError> {
        let datum = Self {
            name: name.into(),
            q,
            omega,
            gamma_factors,
        };
        datum.validate()?;
        Ok(datum)
    }

    pub fn validate(&self) -> Result<(), DatumError> {
        let invalid = |field: String, message: String| {
            Err(DatumError::InvalidDatum { field, message })
        };
        if !(self.q > 0.0 && self.q.is_finite()) {
            return invalid("q".into(), format!("Q must be a positive real, got {}", self.q));
        }
        if !self.omega.is_finite() || (self.omega.norm() - 1.0).abs() > OMEGA_MODULUS_TOL {
            return invalid(
                "omega".into(),
                format!("|omega| must equal 1 within 1e-12, got |omega| = {}", self.omega.norm()),
            );
        }
        if self.gamma_factors.is_empty() {
            return invalid("gamma_factors".into(), "at least one Gamma-factor is required".into());
        }
        for (j, f) in self.gamma_factors.iter().enumerate() {
            if !(f.lambda > 0.0 && f.lambda.is_finite()) {
                return invalid(
                    format!("gamma_factors[{j}].lambda"),
                    format!("lambda must be a positive real, got {}", f.lambda),
                );
            }
            if !f.mu.is_finite() || f.mu.re < 0.0 {
                return invalid(
                    format!("gamma_factors[{j}].mu"),
                    format!("mu must be finite with Re mu >= 0, got {}", f.mu),
                );
            }
        }
        let degree: f64 = 2.0 * self.gamma_factors.iter().map(|f| f.lambda).sum::<f64>();
        if degree < 1.0 {
            return invalid(
                "degree".into(),
                format!("degree d = 2 sum(lambda_j) must be >= 1, got {degree}"),
            );
        }
        Ok(())
    }

    /// The datum of the conjugate function: `μ_j -> conj(μ_j)`,
    /// `ω -> conj(ω)`; Q and the λ_j are unchanged. Applying it twice is the
    /// identity, and it negates Θ while preserving d, λ, λQ², and η.
    pub fn conjugate(&self) -> Self {
        Self {
            name: self.name.clone(),
            q: self.q,
            omega: self.omega.conj(),
            gamma_factors: self
                .gamma_factors
                .iter()
                .map(|f| GammaFactor::new(f.lambda, f.mu.conj()))
                .collect(),
        }
    }

    pub fn degree(&self) -> f64 {
        2.0 * self.gamma_factors.iter().map(|f| f.lambda).sum::<f64>()
    }
}

/// Datum-independent invariants of the underlying function, plus the
/// calibrated validity threshold of the Stirling asymptotic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedInvariants {
    /// Degree d = 2 Σ λ_j.
    pub degree: f64,
    /// λ = ∏ λ_j^(2 λ_j).
    pub lambda: f64,
    /// The conductor-like quantity λQ² inside ℓ(t) = log(λQ² |t|^d).
    pub lambda_q2: f64,
    /// Real part of ξ = 2 Σ (μ_j - 1/2).
    pub eta: f64,
    /// Imaginary part of ξ; drives the ±(Θ/2π) log T counting asymmetry.
    pub theta: f64,
    /// Unit-modulus constant of the Stirling asymptotic:
    /// ω* = ω · exp(-(πi/4)(d + 2η)) · ∏ λ_j^(-2i Im μ_j).
    pub omega_star: Complex64,
    /// Smallest height on the calibration grid at which the asymptotic Δ
    /// matches the exact Δ to [`CALIBRATION_REL_TOL`] at σ = 1/2.
    pub t0: f64,
}

impl DerivedInvariants {
    /// ℓ(t) = log(λQ² |t|^d), the local a-point density (spacing 2π/ℓ).
    /// Even in t; strictly increasing on t > 0.
    pub fn ell(&self, t: f64) -> Result<f64, DatumError> {
        if t == 0.0 || !t.is_finite() {
            return Err(DatumError::DomainError(format!(
                "ell(t) requires finite t != 0, got {t}"
            )));
        }
        Ok(self.lambda_q2.ln() + self.degree * t.abs().ln())
    }
}

/// ψ(t) = log t / log log t, the error-budget scale of the counting formula.
pub fn psi(t: f64) -> Result<f64, DatumError> {
    if !(t >= 3.0) {
        return Err(DatumError::DomainError(format!(
            "psi(t) requires t >= 3, got {t}"
        )));
    }
    Ok(t.ln() / t.ln().ln())
}

fn invariants_without_t0(datum: &FunctionalEquationDatum) -> DerivedInvariants {
    let degree = datum.degree();
    let mut lambda = 1.0;
    let mut xi = Complex64::new(0.0, 0.0);
    let mut mu_twist = Complex64::new(1.0, 0.0);
    for f in &datum.gamma_factors {
        lambda *= f.lambda.powf(2.0 * f.lambda);
        xi += 2.0 * (f.mu - 0.5);
        // λ^(-2i Im μ) = exp(-2i Im(μ) log λ), a pure phase.
        mu_twist *= Complex64::from_polar(1.0, -2.0 * f.mu.im * f.lambda.ln());
    }
    let omega_star = datum.omega
        * Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4 * (degree + 2.0 * xi.re))
        * mu_twist;
    DerivedInvariants {
        degree,
        lambda,
        lambda_q2: lambda * datum.q * datum.q,
        eta: xi.re,
        theta: xi.im,
        omega_star,
        t0: f64::NAN,
    }
}

fn calibrate_t0(
    datum: &FunctionalEquationDatum,
    inv: &DerivedInvariants,
) -> Result<f64, DatumError> {
    let mut t = CALIBRATION_GRID_START;
    while t <= CALIBRATION_GRID_CEILING {
        let s = Complex64::new(0.5, t);
        let exact = special::delta_exact_for(datum, s).map_err(|e| {
            DatumError::DomainError(format!("calibration evaluation failed at t = {t}: {e}"))
        })?;
        let asym = special::delta_asymptotic_upper(inv, s);
        if (exact - asym).norm() <= CALIBRATION_REL_TOL * exact.norm() {
            return Ok(t);
        }
        t *= CALIBRATION_GRID_FACTOR;
    }
    Err(DatumError::CalibrationFailed {
        tol: CALIBRATION_REL_TOL,
        t,
    })
}

/// Computes all invariants, including the calibrated t0. Deterministic, and
/// independent of the ordering of the Γ-factors.
pub fn derive_invariants(
    datum: &FunctionalEquationDatum,
) -> Result<DerivedInvariants, DatumError> {
    datum.validate()?;
    let mut inv = invariants_without_t0(datum);
    debug_assert!((inv.omega_star.norm() - 1.0).abs() <= 1e-12);
    inv.t0 = calibrate_t0(datum, &inv)?;
    Ok(inv)
}

/// A validated datum bundled with its invariants; the evaluation, a-point,
/// and counting APIs hang off this type. Immutable after construction.
#[derive(Clone, Debug)]
pub struct DeltaFactor {
    datum: FunctionalEquationDatum,
    inv: DerivedInvariants,
    /// ω* of the conjugate datum, used to evaluate the asymptotic at t < 0
    /// through Δ(conj(s)) = conj(Δ_conj(s)).
    conj_omega_star: Complex64,
}

impl DeltaFactor {
    pub fn new(datum: FunctionalEquationDatum) -> Result<Self, DatumError> {
        let inv = derive_invariants(&datum)?;
        let conj_omega_star = invariants_without_t0(&datum.conjugate()).omega_star;
        Ok(Self {
            datum,
            inv,
            conj_omega_star,
        })
    }

    pub fn datum(&self) -> &FunctionalEquationDatum {
        &self.datum
    }

    pub fn invariants(&self) -> &DerivedInvariants {
        &self.inv
    }

    pub(crate) fn conj_omega_star(&self) -> Complex64 {
        self.conj_omega_star
    }

    /// The Δ-factor of the conjugate function. Its a-points at height γ are
    /// the reflections of this factor's conj(a)-points at height -γ.
    pub fn conjugate(&self) -> Self {
        let inv = DerivedInvariants {
            theta: -self.inv.theta,
            omega_star: self.conj_omega_star,
            ..self.inv
        };
        Self {
            datum: self.datum.conjugate(),
            inv,
            conj_omega_star: self.inv.omega_star,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testdata::{
        dirichlet5_datum, synthetic_theta_datum, zeta_datum, zeta_squared_datum,
    };
    use std::f64::consts::PI;

    #[test]
    fn zeta_invariants() {
        let inv = derive_invariants(&zeta_datum()).unwrap();
        assert_eq!(inv.degree, 1.0);
        assert!((inv.lambda - 0.5).abs() < 1e-15);
        assert!((inv.lambda_q2 - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(inv.eta, -1.0);
        assert_eq!(inv.theta, 0.0);
        let expected = Complex64::from_polar(1.0, PI / 4.0);
        assert!((inv.omega_star - expected).norm() < 1e-14);
        assert_eq!(inv.t0, 10.0);
    }

    #[test]
    fn synthetic_theta_invariants() {
        let inv = derive_invariants(&synthetic_theta_datum()).unwrap();
        assert_eq!(inv.degree, 2.0);
        assert_eq!(inv.lambda, 1.0);
        assert_eq!(inv.lambda_q2, 1.0);
        assert_eq!(inv.eta, 0.0);
        assert_eq!(inv.theta, 6.0);
        assert!((inv.omega_star - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        // The 1/t error constant here is ~(Im mu)^2 = 9, so calibration walks
        // ten grid steps: 10 * 1.25^10.
        assert!((inv.t0 - 93.13225746154785).abs() < 1e-10);
    }

    #[test]
    fn dirichlet5_invariants() {
        let inv = derive_invariants(&dirichlet5_datum()).unwrap();
        assert_eq!(inv.degree, 1.0);
        assert!((inv.lambda_q2 - 5.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(inv.eta, 0.0);
        assert_eq!(inv.theta, 0.0);
        let expected = Complex64::new(0.9732489894677302, -0.2297529205473612);
        assert!((inv.omega_star - expected).norm() < 1e-12);
        assert_eq!(inv.t0, 10.0);
    }

    #[test]
    fn zeta_squared_invariants() {
        let inv = derive_invariants(&zeta_squared_datum()).unwrap();
        assert_eq!(inv.degree, 2.0);
        assert!((inv.lambda - 0.25).abs() < 1e-15);
        assert!((inv.lambda_q2 - 0.25 / (PI * PI)).abs() < 1e-16);
        assert_eq!(inv.eta, -2.0);
        assert_eq!(inv.theta, 0.0);
        assert!((inv.omega_star - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        assert_eq!(inv.t0, 10.0);
    }

    #[test]
    fn invariants_ignore_factor_order() {
        let datum = FunctionalEquationDatum::new(
            "pair",
            1.0,
            Complex64::new(1.0, 0.0),
            vec![
                GammaFactor::new(0.5, Complex64::new(0.2, 1.0)),
                GammaFactor::new(0.75, Complex64::new(0.1, -0.5)),
            ],
        )
        .unwrap();
        let swapped = FunctionalEquationDatum::new(
            "pair",
            1.0,
            Complex64::new(1.0, 0.0),
            vec![
                GammaFactor::new(0.75, Complex64::new(0.1, -0.5)),
                GammaFactor::new(0.5, Complex64::new(0.2, 1.0)),
            ],
        )
        .unwrap();
        let a = derive_invariants(&datum).unwrap();
        let b = derive_invariants(&swapped).unwrap();
        assert!((a.lambda - b.lambda).abs() < 1e-15);
        assert!((a.omega_star - b.omega_star).norm() < 1e-14);
        assert_eq!(a.degree, b.degree);
    }

    #[test]
    fn rejects_bad_data() {
        let err = FunctionalEquationDatum::new(
            "halfdeg",
            1.0,
            Complex64::new(1.0, 0.0),
            vec![GammaFactor::new(0.25, Complex64::new(0.0, 0.0))],
        )
        .unwrap_err();
        assert!(matches!(err, DatumError::InvalidDatum { ref field, .. } if field == "degree"));

        assert!(FunctionalEquationDatum::new(
            "badq",
            -1.0,
            Complex64::new(1.0, 0.0),
            vec![GammaFactor::new(0.5, Complex64::new(0.0, 0.0))],
        )
        .is_err());

        assert!(FunctionalEquationDatum::new(
            "badomega",
            1.0,
            Complex64::new(0.5, 0.0),
            vec![GammaFactor::new(0.5, Complex64::new(0.0, 0.0))],
        )
        .is_err());

        assert!(FunctionalEquationDatum::new(
            "badmu",
            1.0,
            Complex64::new(1.0, 0.0),
            vec![GammaFactor::new(0.5, Complex64::new(-0.1, 0.0))],
        )
        .is_err());

        assert!(
            FunctionalEquationDatum::new("empty", 1.0, Complex64::new(1.0, 0.0), vec![]).is_err()
        );
    }

    #[test]
    fn ell_values() {
        let inv = derive_invariants(&zeta_datum()).unwrap();
        assert!(inv.ell(2.0 * PI).unwrap().abs() < 1e-15);
        assert!(inv.ell(-2.0 * PI).unwrap().abs() < 1e-15);
        assert!(inv.ell(0.0).is_err());

        let synth = derive_invariants(&synthetic_theta_datum()).unwrap();
        assert!((synth.ell(10.0).unwrap() - 100.0f64.ln()).abs() < 1e-12);

        // Strictly increasing on t > 0.
        let mut prev = inv.ell(1.0).unwrap();
        for k in 1..40 {
            let cur = inv.ell(1.0 + k as f64).unwrap();
            assert!(cur > prev);
            prev = cur;
        }
    }

    #[test]
    fn psi_values() {
        let e = std::f64::consts::E;
        assert!((psi(e.powf(e)).unwrap() - e).abs() < 1e-12);
        assert!((psi(100.0).unwrap() - 3.0154738238809906).abs() < 1e-12);
        assert!(psi(2.0).is_err());
    }

    #[test]
    fn conjugation_is_an_involution_and_flips_theta() {
        let datum = synthetic_theta_datum();
        let conj = datum.conjugate();
        assert_eq!(conj.gamma_factors[0].mu, Complex64::new(0.5, -3.0));
        assert_eq!(conj.conjugate(), datum);

        let delta = DeltaFactor::new(datum).unwrap();
        let cdelta = delta.conjugate();
        assert_eq!(cdelta.invariants().theta, -6.0);
        assert_eq!(cdelta.invariants().degree, 2.0);
        assert_eq!(cdelta.invariants().eta, 0.0);
        assert_eq!(cdelta.invariants().t0, delta.invariants().t0);
        // omega* of the conjugate datum round-trips.
        assert!((cdelta.conjugate().invariants().omega_star
            - delta.invariants().omega_star)
            .norm()
            < 1e-14);
    }
}
