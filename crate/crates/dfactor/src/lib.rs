//! Value distribution of Δ-factors of Riemann-type functional equations.
//!
//! A function `L` in the extended Selberg class satisfies an asymmetrical
//! functional equation
//!
//! ```text
//! L(s) = Δ_L(s) · conj(L)(1 - s),      conj(L)(s) := conj(L(conj(s))),
//! ```
//!
//! where the Δ-factor
//!
//! ```text
//! Δ_L(s) = ω · Q^(1-2s) · ∏_j Γ(λ_j (1-s) + conj(μ_j)) / Γ(λ_j s + μ_j)
//! ```
//!
//! is built from a datum `(Q, ω, {(λ_j, μ_j)})`. Although the datum is not
//! unique, the degree `d = 2 Σ λ_j`, the conductor-like quantity `λQ²`, and
//! the shift `ξ = η + iΘ = 2 Σ (μ_j - 1/2)` are invariants of `L`, and they
//! control everything this crate computes:
//!
//! * [`special`] evaluates `Δ` and `Δ'/Δ` exactly (log-space Γ quotients) and
//!   through their Stirling-type asymptotics.
//! * [`apoints`] locates the nontrivial solutions of `Δ(s) = a`, certifies
//!   completeness with an argument-principle contour count, and compares
//!   counting functions against the Riemann-von Mangoldt main terms.
//! * [`sums`] forms exponential sums over located a-points: the Landau-type
//!   explicit formula, Weyl sums with star discrepancy, and the mean value
//!   `Σ L(δ_a)`.
//! * [`lfun`] supplies concrete strip evaluators (ζ, Hurwitz ζ, Dirichlet
//!   L-functions, power products) and the built-in catalog.
//!
//! The cluster line is the heart of the picture: a-points of height γ sit at
//!
//! ```text
//! β_a ≈ 1/2 - log|a| / ℓ(γ),        ℓ(t) = log(λQ² |t|^d),
//! ```
//!
//! so for |a| ≠ 1 they approach the critical line like 1/log γ, from a side
//! determined by |a|. Seeding, counting, and all error budgets in this crate
//! are phrased in terms of ℓ and of ψ(t) = log t / log log t.
//!
//! # Example
//!
//! ```
//! use dfactor::fe::{DeltaFactor, FunctionalEquationDatum, GammaFactor};
//! use num_complex::Complex64;
//!
//! // The datum of the Riemann zeta function: Γ_R(s) = π^(-s/2) Γ(s/2).
//! let datum = FunctionalEquationDatum::new(
//!     "zeta",
//!     std::f64::consts::PI.powf(-0.5),
//!     Complex64::new(1.0, 0.0),
//!     vec![GammaFactor::new(0.5, Complex64::new(0.0, 0.0))],
//! )?;
//! let delta = DeltaFactor::new(datum)?;
//!
//! let inv = delta.invariants();
//! assert_eq!(inv.degree, 1.0);
//! assert!((inv.lambda_q2 - 1.0 / std::f64::consts::TAU).abs() < 1e-15);
//!
//! // On the critical line the Δ-factor has modulus one.
//! let z = delta.delta_exact(Complex64::new(0.5, 30.0))?;
//! assert!((z.norm() - 1.0).abs() < 1e-12);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod apoints;
pub mod fe;
pub mod lfun;
pub mod special;
pub mod sums;

#[cfg(test)]
pub(crate) mod testdata;

pub use fe::{DeltaFactor, DerivedInvariants, FunctionalEquationDatum, GammaFactor};

pub(crate) mod util {
    use num_complex::Complex64;

    /// Neumaier-compensated accumulator; the running error of a plain fold
    /// over ~10³ terms of size ~10⁴ would otherwise eat into the phase budget.
    #[derive(Clone, Copy, Debug, Default)]
    pub struct CompensatedSum {
        sum: f64,
        comp: f64,
    }

    impl CompensatedSum {
        pub fn add(&mut self, x: f64) {
            let t = self.sum + x;
            if self.sum.abs() >= x.abs() {
                self.comp += (self.sum - t) + x;
            } else {
                self.comp += (x - t) + self.sum;
            }
            self.sum = t;
        }

        pub fn value(&self) -> f64 {
            self.sum + self.comp
        }
    }

    #[derive(Clone, Copy, Debug, Default)]
    pub struct ComplexSum {
        re: CompensatedSum,
        im: CompensatedSum,
    }

    impl ComplexSum {
        pub fn add(&mut self, z: Complex64) {
            self.re.add(z.re);
            self.im.add(z.im);
        }

        pub fn value(&self) -> Complex64 {
            Complex64::new(self.re.value(), self.im.value())
        }
    }
}
