//! Locating, refining, counting, and certifying the nontrivial a-points of a
//! Δ-factor.
//!
//! For a ≠ 0 the solutions of Δ(s) = a in the upper half-plane line up along
//! the cluster curve
//!
//! ```text
//! β_a(γ) ≈ 1/2 - log|a| / ℓ(γ),
//! ```
//!
//! with consecutive ordinates about 2π/ℓ(γ) apart. Because the asymptotic
//! phase
//!
//! ```text
//! φ(γ) = -γ ℓ(γ) + dγ - Θ log γ + arg ω*
//! ```
//!
//! is strictly decreasing for γ ≥ t0 (φ'(γ) = -ℓ(γ) - Θ/γ < 0), each a-point
//! belongs to a well-defined phase branch k with φ(γ) ≈ arg(a) - 2πk. Seeding
//! solves that equation by bisection, Newton refinement polishes against the
//! exact Δ, and an argument-principle contour count over the same window
//! certifies that no point was missed. Counts use half-open windows
//! (t_lo, t_hi]; boundaries that fall within 1e-4 of a spacing of an ordinate
//! are nudged to the midpoint of the two neighboring ordinates first, so
//! window splits always add exactly.
//!
//! Windows with t_hi ≤ -t0 are handled through the reflection
//! Δ(conj s) = conj(Δ_conj(s)): the a-points at negative heights are the
//! mirrored conj(a)-points of the conjugate Δ-factor.

use num_complex::Complex64;
use thiserror::Error;

use crate::fe::{DeltaFactor, DerivedInvariants};
use crate::special::SpecialError;
use crate::util::ComplexSum;

/// Default absolute residual target |Δ(δ) - a| for Newton refinement.
pub const DEFAULT_NEWTON_TOL: f64 = 1e-11;

/// Newton iteration budget; seeds sit within half a spacing of their root,
/// so convergence beyond ~8 iterations signals a defective seed.
pub const MAX_NEWTON_ITERATIONS: u32 = 50;

/// Two refined points merge when their coordinates agree to this resolution.
const DEDUP_GAMMA_SCALE: f64 = 1e-8;
const DEDUP_BETA_TOL: f64 = 1e-8;

/// Boundary ordinates closer than this fraction of a spacing trigger the
/// deterministic midpoint shift.
const BOUNDARY_TOL_FRACTION: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum ApointsError {
    #[error("a must be a nonzero finite complex number")]
    ZeroAError,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error(
        "Newton iteration from seed k = {seed_index} (gamma ~ {gamma:.6}) stalled at \
         residual {residual:.3e} after {iters} iterations"
    )]
    NoConvergence {
        seed_index: i64,
        gamma: f64,
        residual: f64,
        iters: u32,
    },
    #[error(
        "Newton iterate from seed k = {seed_index} escaped the containment band \
         (reached sigma = {sigma:.6})"
    )]
    EscapedStrip { seed_index: i64, sigma: f64 },
    #[error(
        "certification mismatch on ({t_lo}, {t_hi}]: {found} refined points vs \
         contour count {counted} (after one re-seeding pass)"
    )]
    CertificationMismatch {
        t_lo: f64,
        t_hi: f64,
        found: usize,
        counted: i64,
    },
    #[error("winding quadrature inconclusive: {0}")]
    QuadratureInconclusive(String),
    #[error(
        "point set on ({t_lo}, {t_hi}] does not cover |t - gamma| <= {radius:.6} around t = {t}"
    )]
    InsufficientWindow {
        t: f64,
        radius: f64,
        t_lo: f64,
        t_hi: f64,
    },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Starting guess for one a-point, on phase branch `index`.
#[derive(Clone, Copy, Debug)]
pub struct Seed {
    pub beta: f64,
    pub gamma: f64,
    pub index: i64,
}

/// One refined nontrivial a-point δ_a = β_a + iγ_a.
///
/// β_a lies in (0,1) once ℓ(γ) > 2|log|a||; below that height the cluster
/// curve legitimately leaves the critical strip (|a| > 1 pushes points left,
/// |a| < 1 right), and such points are reported as found.
#[derive(Clone, Copy, Debug)]
pub struct APoint {
    pub beta: f64,
    pub gamma: f64,
    /// |Δ(δ) - a| at the accepted iterate.
    pub residual: f64,
    pub newton_iters: u32,
    /// Phase-branch index recovered from the refined ordinate:
    /// k = round((arg a - φ(γ)) / 2π).
    pub seed_index: i64,
}

/// Sorted, deduplicated a-points over one certified window (t_lo, t_hi].
#[derive(Clone, Debug)]
pub struct APointSet {
    pub datum_name: String,
    pub a: Complex64,
    /// Effective window bounds (after any boundary shift).
    pub t_lo: f64,
    pub t_hi: f64,
    pub points: Vec<APoint>,
}

impl APointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV serialization: provenance header comments, then one row per point
    /// with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# datum = {}\n", self.datum_name));
        out.push_str(&format!("# a = {:.16e} {:+.16e}i\n", self.a.re, self.a.im));
        out.push_str(&format!(
            "# window = ({:.16e}, {:.16e}]\n",
            self.t_lo, self.t_hi
        ));
        out.push_str("k,gamma,beta,residual,newton_iters\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{}\n",
                p.seed_index, p.gamma, p.beta, p.residual, p.newton_iters
            ));
        }
        out
    }
}

/// Counting rectangle for the argument principle.
#[derive(Clone, Copy, Debug)]
pub struct Rect {
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct FindOptions {
    /// Residual target passed to every refinement.
    pub newton_tol: f64,
}

impl Default for FindOptions {
    fn default() -> Self {
        Self {
            newton_tol: DEFAULT_NEWTON_TOL,
        }
    }
}

/// Which of the two counting functions N_± the prediction refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Main terms of the Riemann-von Mangoldt-type counting formula,
///
/// ```text
/// N_±(T) ≈ (d/2π) T log T + ((log λQ² - d)/2π) T ± (Θ/2π) log T,
/// ```
///
/// valid up to O(ψ(T)); a enters only that error term. Because the count
/// below t0 is unknown to the library, comparisons should always difference
/// two predictions against two counted windows.
pub fn rvm_prediction(inv: &DerivedInvariants, t: f64, sign: Sign) -> f64 {
    let tau = std::f64::consts::TAU;
    inv.degree / tau * t * t.ln()
        + (inv.lambda_q2.ln() - inv.degree) / tau * t
        + sign.factor() * inv.theta / tau * t.ln()
}

fn validate_a(a: Complex64) -> Result<(), ApointsError> {
    if a == Complex64::new(0.0, 0.0) || !a.is_finite() {
        return Err(ApointsError::ZeroAError);
    }
    Ok(())
}

/// Half-width constant of the counting rectangle: c = 2(|log|a|| + 1) keeps
/// the cluster curve strictly inside σ ∈ [1 - α(t), α(t)] with
/// α(t) = 1/2 + c/ℓ(t).
fn alpha_constant(a: Complex64) -> f64 {
    2.0 * (a.norm().ln().abs() + 1.0)
}

impl DeltaFactor {
    fn ell_checked(&self, t: f64) -> Result<f64, ApointsError> {
        let ell = self
            .invariants()
            .ell(t)
            .map_err(|e| ApointsError::DomainError(e.to_string()))?;
        if ell <= 0.0 {
            return Err(ApointsError::DomainError(format!(
                "ell({t}) = {ell} <= 0: the phase is not monotone this low"
            )));
        }
        Ok(ell)
    }

    /// Local ordinate spacing 2π/ℓ(t).
    fn spacing(&self, t: f64) -> Result<f64, ApointsError> {
        Ok(std::f64::consts::TAU / self.ell_checked(t)?)
    }

    /// Asymptotic phase φ(γ) of Δ on the cluster curve (σ-independent).
    fn phase_at(&self, gamma: f64) -> Result<f64, ApointsError> {
        let inv = self.invariants();
        let ell = self.ell_checked(gamma)?;
        Ok(-gamma * ell + inv.degree * gamma - inv.theta * gamma.ln()
            + inv.omega_star.arg())
    }

    /// Canonical phase-branch index of an ordinate.
    fn branch_index(&self, a: Complex64, gamma: f64) -> Result<i64, ApointsError> {
        let k = (a.arg() - self.phase_at(gamma)?) / std::f64::consts::TAU;
        Ok(k.round() as i64)
    }

    fn cluster_beta(&self, a: Complex64, gamma: f64) -> Result<f64, ApointsError> {
        Ok(0.5 - a.norm().ln() / self.ell_checked(gamma)?)
    }

    /// Seeds on phase branches `resolution` times finer than 2π; resolution 1
    /// is the production spacing, resolution 2 the re-seeding fallback.
    fn seeds_at_resolution(
        &self,
        a: Complex64,
        t_lo: f64,
        t_hi: f64,
        resolution: u32,
    ) -> Result<Vec<Seed>, ApointsError> {
        let step = std::f64::consts::TAU / resolution as f64;
        let theta_a = a.arg();
        let phi_lo = self.phase_at(t_lo)?;
        let phi_hi = self.phase_at(t_hi)?;
        debug_assert!(phi_lo >= phi_hi);
        let k_min = ((theta_a - phi_lo) / step).ceil() as i64;
        let k_max = ((theta_a - phi_hi) / step).floor() as i64;
        let mut seeds = Vec::new();
        for k in k_min..=k_max {
            let target = theta_a - step * k as f64;
            if !(phi_hi..=phi_lo).contains(&target) {
                continue;
            }
            // phi is strictly decreasing, so plain bisection is exact.
            let mut lo = t_lo;
            let mut hi = t_hi;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if self.phase_at(mid)? >= target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let gamma = 0.5 * (lo + hi);
            seeds.push(Seed {
                beta: self.cluster_beta(a, gamma)?,
                gamma,
                index: k,
            });
        }
        Ok(seeds)
    }

    /// One seed per phase branch of Δ(s) = a crossing [t_lo, t_hi]: the
    /// ordinate guess solves φ(γ) = arg(a) - 2πk by bisection, the abscissa
    /// guess is the cluster curve 1/2 - log|a|/ℓ(γ). Consecutive seeds are
    /// ~2π/ℓ(γ) apart.
    pub fn seed_apoints(
        &self,
        a: Complex64,
        t_lo: f64,
        t_hi: f64,
    ) -> Result<Vec<Seed>, ApointsError> {
        validate_a(a)?;
        let t0 = self.invariants().t0;
        if !(t_lo >= t0) {
            return Err(ApointsError::DomainError(format!(
                "seeding requires t_lo >= t0 = {t0}, got {t_lo}"
            )));
        }
        if !(t_hi >= t_lo) || !t_hi.is_finite() {
            return Err(ApointsError::DomainError(format!(
                "invalid window [{t_lo}, {t_hi}]"
            )));
        }
        self.seeds_at_resolution(a, t_lo, t_hi, 1)
    }

    /// Newton refinement of one seed against the exact Δ, with the step
    /// Δ' = Δ · (Δ'/Δ) and damping: steps are capped at half a spacing and
    /// the abscissa is confined to the counting band
    /// |σ - 1/2| ≤ max(1/4, c/ℓ(γ)); wandering past twice that band aborts.
    pub fn refine_apoint(
        &self,
        a: Complex64,
        seed: Seed,
        tol: f64,
    ) -> Result<APoint, ApointsError> {
        validate_a(a)?;
        if !(tol >= 1e-12) {
            return Err(ApointsError::DomainError(format!(
                "refinement tolerance must be >= 1e-12, got {tol}"
            )));
        }
        let ell = self.ell_checked(seed.gamma)?;
        let band = (alpha_constant(a) / ell).max(0.25);
        let step_cap = std::f64::consts::PI / ell;
        let mut s = Complex64::new(seed.beta, seed.gamma);
        let mut residual = f64::INFINITY;
        for iter in 0..MAX_NEWTON_ITERATIONS {
            let value = self.delta_exact(s)?;
            let f = value - a;
            residual = f.norm();
            if residual <= tol {
                return Ok(APoint {
                    beta: s.re,
                    gamma: s.im,
                    residual,
                    newton_iters: iter,
                    seed_index: self.branch_index(a, s.im)?,
                });
            }
            let log_deriv = self.delta_log_deriv_exact(s)?;
            let mut step = -f / (value * log_deriv);
            let norm = step.norm();
            if !norm.is_finite() {
                break;
            }
            if norm > step_cap {
                step *= step_cap / norm;
            }
            s += step;
            let dev = s.re - 0.5;
            if dev.abs() > 2.0 * band {
                return Err(ApointsError::EscapedStrip {
                    seed_index: seed.index,
                    sigma: s.re,
                });
            }
            if dev.abs() > band {
                s.re = 0.5 + dev.signum() * band;
            }
        }
        Err(ApointsError::NoConvergence {
            seed_index: seed.index,
            gamma: seed.gamma,
            residual,
            iters: MAX_NEWTON_ITERATIONS,
        })
    }

    /// Moves a window boundary off any ordinate: if the nearest a-point
    /// ordinate g is within 1e-4 of a spacing, returns the midpoint of g and
    /// the next ordinate above, so no ordinate lies within the shift and the
    /// assignment of boundary-hugging points to windows is deterministic.
    pub fn shift_boundary(&self, a: Complex64, t: f64) -> Result<f64, ApointsError> {
        validate_a(a)?;
        let t0 = self.invariants().t0;
        if !(t >= t0) {
            return Err(ApointsError::DomainError(format!(
                "boundary shift requires t >= t0 = {t0}, got {t}"
            )));
        }
        let spacing = self.spacing(t)?;
        let tol = BOUNDARY_TOL_FRACTION * spacing;
        let lo = (t - 3.0 * spacing).max(t0);
        let hi = t + 3.0 * spacing;
        let mut ordinates = Vec::new();
        for seed in self.seeds_at_resolution(a, lo, hi, 1)? {
            match self.refine_apoint(a, seed, DEFAULT_NEWTON_TOL) {
                Ok(p) => ordinates.push(p.gamma),
                Err(ApointsError::NoConvergence { .. }) | Err(ApointsError::EscapedStrip { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        ordinates.sort_by(f64::total_cmp);
        let nearest = ordinates
            .iter()
            .copied()
            .min_by(|x, y| (x - t).abs().total_cmp(&(y - t).abs()));
        let Some(g) = nearest else { return Ok(t) };
        if (g - t).abs() >= tol {
            return Ok(t);
        }
        let next = ordinates.iter().copied().find(|&x| x > g);
        let next = match next {
            Some(x) => x,
            // The neighbor above was outside the scan; one spacing is a safe
            // stand-in since only the midpoint's clearance matters.
            None => g + spacing,
        };
        Ok(0.5 * (g + next))
    }

    /// Counting rectangle for the window: vertical sides at σ = α and 1 - α
    /// with α = 1/2 + c/ℓ(t_lo) and c = 2(|log|a|| + 1), so the cluster curve
    /// (widest at the window bottom) stays strictly inside and |Δ| - |a| is
    /// bounded away from zero on both sides.
    pub fn certification_rect(
        &self,
        a: Complex64,
        t_lo: f64,
        t_hi: f64,
    ) -> Result<Rect, ApointsError> {
        validate_a(a)?;
        let alpha = 0.5 + alpha_constant(a) / self.ell_checked(t_lo)?;
        Ok(Rect {
            sigma_lo: 1.0 - alpha,
            sigma_hi: alpha,
            t_lo,
            t_hi,
        })
    }

    /// Argument-principle count of a-points inside the rectangle: the
    /// winding number of Δ(s) - a along the boundary, computed by adaptive
    /// phase tracking (segments split until each turns less than π/2). The
    /// result must land within 0.1 of an integer.
    ///
    /// The rectangle must avoid a-points (use [`DeltaFactor::shift_boundary`]
    /// for the horizontal sides) and poles of Δ; above t0 the poles of every
    /// Γ-quotient lie at fixed heights Im s = -Im μ_j/λ_j below the window.
    pub fn count_argument_principle(
        &self,
        a: Complex64,
        rect: Rect,
    ) -> Result<i64, ApointsError> {
        validate_a(a)?;
        if !(rect.t_lo > 0.0 && rect.t_hi > rect.t_lo)
            || !(rect.sigma_lo < rect.sigma_hi)
            || !rect.sigma_lo.is_finite()
            || !rect.sigma_hi.is_finite()
            || !rect.t_hi.is_finite()
        {
            return Err(ApointsError::DomainError(format!("invalid rectangle {rect:?}")));
        }
        let corners = [
            Complex64::new(rect.sigma_hi, rect.t_lo),
            Complex64::new(rect.sigma_hi, rect.t_hi),
            Complex64::new(rect.sigma_lo, rect.t_hi),
            Complex64::new(rect.sigma_lo, rect.t_lo),
        ];
        // Phase speed along any side is at most ~|Δ'/Δ| ~ ℓ(t_hi) + O(1);
        // seeding the subdivision at that density leaves the adaptive pass
        // only exceptional splits.
        let speed = self.ell_checked(rect.t_hi)? + 2.0;
        let mut total = 0.0;
        for i in 0..4 {
            total += self.side_winding(a, corners[i], corners[(i + 1) % 4], speed)?;
        }
        let winding = total / std::f64::consts::TAU;
        let rounded = winding.round();
        if (winding - rounded).abs() > 0.1 {
            return Err(ApointsError::QuadratureInconclusive(format!(
                "winding {winding:.6} is not within 0.1 of an integer on {rect:?}"
            )));
        }
        Ok(rounded as i64)
    }

    fn side_winding(
        &self,
        a: Complex64,
        from: Complex64,
        to: Complex64,
        speed: f64,
    ) -> Result<f64, ApointsError> {
        let f = |s: Complex64| -> Result<Complex64, ApointsError> {
            let v = self.delta_exact(s)? - a;
            if v.norm() <= 1e-13 * (1.0 + a.norm()) {
                return Err(ApointsError::QuadratureInconclusive(format!(
                    "contour passes through an a-point near s = {s}"
                )));
            }
            Ok(v)
        };
        let length = (to - from).norm();
        let n0 = ((length * speed * 4.0 / std::f64::consts::PI).ceil() as usize).max(4);
        // Stack of parameter intervals with endpoint values; split while a
        // segment turns more than π/2 so no whole rotation can hide inside.
        let mut stack: Vec<(f64, f64, Complex64, Complex64)> = Vec::with_capacity(n0 + 16);
        let mut prev_u = 0.0;
        let mut prev_f = f(from)?;
        for i in 1..=n0 {
            let u = i as f64 / n0 as f64;
            let fu = f(from + (to - from) * u)?;
            stack.push((prev_u, u, prev_f, fu));
            prev_u = u;
            prev_f = fu;
        }
        let mut total = 0.0;
        let mut evals = 0usize;
        while let Some((u0, u1, f0, f1)) = stack.pop() {
            let turn = (f1 / f0).arg();
            if turn.abs() <= std::f64::consts::FRAC_PI_2 {
                total += turn;
                continue;
            }
            if u1 - u0 < 1e-13 {
                return Err(ApointsError::QuadratureInconclusive(format!(
                    "phase jump of {turn:.3} rad unresolved near s = {}",
                    from + (to - from) * (0.5 * (u0 + u1))
                )));
            }
            evals += 1;
            if evals > 2_000_000 {
                return Err(ApointsError::QuadratureInconclusive(
                    "subdivision budget exhausted".into(),
                ));
            }
            let um = 0.5 * (u0 + u1);
            let fm = f(from + (to - from) * um)?;
            stack.push((u0, um, f0, fm));
            stack.push((um, u1, fm, f1));
        }
        Ok(total)
    }

    /// The complete, certified set of a-points with ordinate in
    /// (t_lo, t_hi]. Requires t_lo ≥ t0, or t_hi ≤ -t0 for the mirrored
    /// negative window. Refined points are sorted, deduplicated, filtered to
    /// the (shift-adjusted) window, and checked against the contour count;
    /// one re-seeding pass at doubled phase resolution runs before a mismatch
    /// is reported.
    pub fn find_apoints(
        &self,
        a: Complex64,
        t_lo: f64,
        t_hi: f64,
        opts: &FindOptions,
    ) -> Result<APointSet, ApointsError> {
        validate_a(a)?;
        if !(t_lo < t_hi) || !t_lo.is_finite() || !t_hi.is_finite() {
            return Err(ApointsError::DomainError(format!(
                "invalid window [{t_lo}, {t_hi}]"
            )));
        }
        let t0 = self.invariants().t0;
        if t_hi <= -t0 {
            let mirrored = self
                .conjugate()
                .find_apoints(a.conj(), -t_hi, -t_lo, opts)?;
            let mut points: Vec<APoint> = mirrored
                .points
                .iter()
                .rev()
                .map(|p| APoint {
                    beta: p.beta,
                    gamma: -p.gamma,
                    residual: p.residual,
                    newton_iters: p.newton_iters,
                    seed_index: p.seed_index,
                })
                .collect();
            // Mirroring maps the half-open window (|hi|, |lo|] to
            // [-|lo|, -|hi|); re-impose (t_lo, t_hi] on this side.
            let lo_eff = -mirrored.t_hi;
            let hi_eff = -mirrored.t_lo;
            points.retain(|p| p.gamma > lo_eff && p.gamma <= hi_eff);
            return Ok(APointSet {
                datum_name: self.datum().name.clone(),
                a,
                t_lo: lo_eff,
                t_hi: hi_eff,
                points,
            });
        }
        if !(t_lo >= t0) {
            return Err(ApointsError::DomainError(format!(
                "window [{t_lo}, {t_hi}] must satisfy t_lo >= t0 = {t0} or t_hi <= -t0"
            )));
        }

        let lo_eff = self.shift_boundary(a, t_lo)?;
        let hi_eff = self.shift_boundary(a, t_hi)?;
        let margin_lo = (lo_eff - 2.0 * self.spacing(lo_eff)?).max(t0);
        let margin_hi = hi_eff + 2.0 * self.spacing(hi_eff)?;

        let mut points = self.refine_window(a, margin_lo, margin_hi, lo_eff, hi_eff, 1, opts)?;
        let rect = self.certification_rect(a, lo_eff, hi_eff)?;
        let mut counted = self.count_argument_principle(a, rect)?;
        if counted != points.len() as i64 {
            let mut extra =
                self.refine_window(a, margin_lo, margin_hi, lo_eff, hi_eff, 2, opts)?;
            points.append(&mut extra);
            points.sort_by(|p, q| p.gamma.total_cmp(&q.gamma));
            points = dedup_points(points);
            counted = self.count_argument_principle(a, rect)?;
            if counted != points.len() as i64 {
                return Err(ApointsError::CertificationMismatch {
                    t_lo: lo_eff,
                    t_hi: hi_eff,
                    found: points.len(),
                    counted,
                });
            }
        }
        Ok(APointSet {
            datum_name: self.datum().name.clone(),
            a,
            t_lo: lo_eff,
            t_hi: hi_eff,
            points,
        })
    }

    fn refine_window(
        &self,
        a: Complex64,
        seed_lo: f64,
        seed_hi: f64,
        keep_lo: f64,
        keep_hi: f64,
        resolution: u32,
        opts: &FindOptions,
    ) -> Result<Vec<APoint>, ApointsError> {
        let mut points = Vec::new();
        for seed in self.seeds_at_resolution(a, seed_lo, seed_hi, resolution)? {
            match self.refine_apoint(a, seed, opts.newton_tol) {
                Ok(p) => {
                    if p.gamma > keep_lo && p.gamma <= keep_hi {
                        points.push(p);
                    }
                }
                // A marginal seed may fail without the set being incomplete;
                // the certification count is the arbiter.
                Err(ApointsError::NoConvergence { .. })
                | Err(ApointsError::EscapedStrip { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        points.sort_by(|p, q| p.gamma.total_cmp(&q.gamma));
        Ok(dedup_points(points))
    }

    /// Residual of the fractional decomposition of Δ'/(Δ - a) at s: the full
    /// expression minus the singular part Σ 1/(s - δ_a) over a-points with
    /// |t - γ_a| ≤ 1/log log t. The theory bounds this by O(log t), which the
    /// tests fit empirically.
    pub fn fractional_decomposition_residual(
        &self,
        a: Complex64,
        s: Complex64,
        window: &APointSet,
    ) -> Result<Complex64, ApointsError> {
        validate_a(a)?;
        if window.a != a || window.datum_name != self.datum().name {
            return Err(ApointsError::DomainError(format!(
                "point set is for datum {} with a = {}, not {} with a = {a}",
                window.datum_name,
                window.a,
                self.datum().name
            )));
        }
        let t = s.im;
        if !(t > std::f64::consts::E) {
            return Err(ApointsError::DomainError(format!(
                "fractional decomposition needs t > e, got {t}"
            )));
        }
        let radius = 1.0 / t.ln().ln();
        if t - radius < window.t_lo || t + radius > window.t_hi {
            return Err(ApointsError::InsufficientWindow {
                t,
                radius,
                t_lo: window.t_lo,
                t_hi: window.t_hi,
            });
        }
        let value = self.delta_exact(s)?;
        let log_deriv = self.delta_log_deriv_exact(s)?;
        let full = log_deriv * value / (value - a);
        let mut local = ComplexSum::default();
        for p in &window.points {
            if (t - p.gamma).abs() <= radius {
                local.add((s - Complex64::new(p.beta, p.gamma)).inv());
            }
        }
        Ok(full - local.value())
    }
}

fn dedup_points(sorted: Vec<APoint>) -> Vec<APoint> {
    let mut out: Vec<APoint> = Vec::with_capacity(sorted.len());
    for p in sorted {
        if let Some(last) = out.last_mut() {
            let gamma_tol = DEDUP_GAMMA_SCALE / last.gamma.abs().max(1.0).ln().max(1.0);
            if (p.gamma - last.gamma).abs() < gamma_tol
                && (p.beta - last.beta).abs() < DEDUP_BETA_TOL
            {
                if p.residual < last.residual {
                    *last = p;
                }
                continue;
            }
        }
        out.push(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testdata::{dirichlet5_delta, synthetic_theta_delta, zeta_delta};

    fn two() -> Complex64 {
        Complex64::new(2.0, 0.0)
    }

    #[test]
    fn seed_count_matches_phase_decrement() {
        let delta = zeta_delta();
        let ell50 = delta.invariants().ell(50.0).unwrap();
        let window = 3.0 * std::f64::consts::TAU / ell50;
        let seeds = delta
            .seed_apoints(Complex64::new(1.0, 0.0), 50.0, 50.0 + window)
            .unwrap();
        assert_eq!(seeds.len(), 3);
        assert_eq!(seeds[0].index + 1, seeds[1].index);
        // |a| = 1 puts every seed on the critical line.
        for s in &seeds {
            assert_eq!(s.beta, 0.5);
        }
        // Consecutive seeds sit about one spacing apart.
        let spacing = std::f64::consts::TAU / ell50;
        for pair in seeds.windows(2) {
            let gap = pair[1].gamma - pair[0].gamma;
            assert!((gap / spacing - 1.0).abs() < 0.2, "gap {gap} vs spacing {spacing}");
        }
    }

    #[test]
    fn seed_rejects_bad_input() {
        let delta = zeta_delta();
        assert!(matches!(
            delta.seed_apoints(Complex64::new(0.0, 0.0), 50.0, 60.0),
            Err(ApointsError::ZeroAError)
        ));
        assert!(matches!(
            delta.seed_apoints(two(), 5.0, 60.0),
            Err(ApointsError::DomainError(_))
        ));
    }

    #[test]
    fn refinement_hits_oracle_coordinates() {
        let delta = zeta_delta();
        let set = delta
            .find_apoints(two(), 10.0, 100.0, &FindOptions::default())
            .unwrap();
        assert_eq!(set.len(), 29);
        let expected = [
            (-0.163526839037034732, 17.8574067829662203),
            (-0.0310639875624134059, 23.1749456257529407),
            (0.0324684639878149317, 27.672846486946942),
            (0.0718808029882476963, 31.7197645806081056),
            (0.0995118496961992158, 35.4684907698190573),
            (0.120334515190810388, 39.0002222532100187),
        ];
        for (i, (beta, gamma)) in expected.iter().enumerate() {
            assert!(
                (set.points[i].beta - beta).abs() < 1e-9,
                "beta[{i}] = {}, expected {beta}",
                set.points[i].beta
            );
            assert!(
                (set.points[i].gamma - gamma).abs() < 1e-9,
                "gamma[{i}] = {}, expected {gamma}",
                set.points[i].gamma
            );
            assert_eq!(set.points[i].seed_index, i as i64);
        }
        let last = set.points.last().unwrap();
        assert!((last.gamma - 99.9946415870399507).abs() < 1e-9);
        for p in &set.points {
            assert!(p.residual <= DEFAULT_NEWTON_TOL);
            assert!(p.newton_iters <= 8, "{} iterations at gamma {}", p.newton_iters, p.gamma);
        }
    }

    #[test]
    fn refinement_rejects_loose_tolerance() {
        let delta = zeta_delta();
        let seed = delta.seed_apoints(two(), 50.0, 52.0).unwrap()[0];
        assert!(matches!(
            delta.refine_apoint(two(), seed, 1e-13),
            Err(ApointsError::DomainError(_))
        ));
    }

    #[test]
    fn gram_points_are_the_one_points_of_zeta() {
        // For a = 1 the ordinates solve the classical Gram condition
        // theta_RS(gamma) = pi k (phase of Delta = 0 mod 2pi).
        let delta = zeta_delta();
        let set = delta
            .find_apoints(Complex64::new(1.0, 0.0), 10.0, 40.0, &FindOptions::default())
            .unwrap();
        let gram = [
            17.845599540503203,
            23.170282701123278,
            27.670182217939895,
            31.717979953,
            35.467184297,
            38.999209964,
        ];
        assert_eq!(set.len(), 6);
        for (p, g) in set.points.iter().zip(gram) {
            assert!((p.gamma - g).abs() < 1e-6, "gamma {} vs Gram {g}", p.gamma);
            assert!((p.beta - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn counts_match_census_for_several_targets() {
        let delta = zeta_delta();
        for (a, expected) in [
            (Complex64::new(0.0, 1.0), 29),
            (Complex64::new(-3.0, 0.0), 29),
        ] {
            let set = delta
                .find_apoints(a, 10.0, 100.0, &FindOptions::default())
                .unwrap();
            assert_eq!(set.len(), expected, "a = {a}");
        }
        let d5 = dirichlet5_delta();
        let set = d5
            .find_apoints(two(), 10.0, 100.0, &FindOptions::default())
            .unwrap();
        assert_eq!(set.len(), 52);
    }

    #[test]
    fn winding_count_is_additive() {
        let delta = zeta_delta();
        let total = delta
            .count_argument_principle(
                two(),
                delta.certification_rect(two(), 10.0, 100.0).unwrap(),
            )
            .unwrap();
        assert_eq!(total, 29);
        let low = delta
            .count_argument_principle(
                two(),
                delta.certification_rect(two(), 10.0, 55.0).unwrap(),
            )
            .unwrap();
        let high = delta
            .count_argument_principle(
                two(),
                delta.certification_rect(two(), 55.0, 100.0).unwrap(),
            )
            .unwrap();
        assert_eq!(low + high, total);
    }

    #[test]
    fn empty_window_has_no_points() {
        let delta = zeta_delta();
        let set = delta
            .find_apoints(two(), 10.0, 10.0 + 1e-6, &FindOptions::default())
            .unwrap();
        assert!(set.is_empty());
        let rect = delta.certification_rect(two(), 10.0, 10.0 + 1e-6).unwrap();
        assert_eq!(delta.count_argument_principle(two(), rect).unwrap(), 0);
    }

    #[test]
    fn negative_window_mirrors_positive_for_self_conjugate_data() {
        let delta = zeta_delta();
        let pos = delta
            .find_apoints(two(), 20.0, 60.0, &FindOptions::default())
            .unwrap();
        let neg = delta
            .find_apoints(two(), -60.0, -20.0, &FindOptions::default())
            .unwrap();
        assert_eq!(pos.len(), neg.len());
        for (p, q) in pos.points.iter().zip(neg.points.iter().rev()) {
            assert!((p.gamma + q.gamma).abs() < 1e-9);
            assert!((p.beta - q.beta).abs() < 1e-9);
        }
    }

    #[test]
    fn negative_window_points_satisfy_the_equation() {
        let delta = synthetic_theta_delta();
        let t0 = delta.invariants().t0;
        let set = delta
            .find_apoints(two(), -(t0 + 30.0), -t0, &FindOptions::default())
            .unwrap();
        assert!(!set.is_empty());
        let mut prev = f64::NEG_INFINITY;
        for p in &set.points {
            assert!(p.gamma > prev);
            prev = p.gamma;
            let v = delta.delta_exact(Complex64::new(p.beta, p.gamma)).unwrap();
            assert!((v - two()).norm() <= DEFAULT_NEWTON_TOL);
        }
    }

    #[test]
    fn beta_recentering_decays_like_inverse_gamma_ell() {
        let delta = zeta_delta();
        let set = delta
            .find_apoints(two(), 10.0, 400.0, &FindOptions::default())
            .unwrap();
        for p in &set.points {
            let ell = delta.invariants().ell(p.gamma).unwrap();
            let predicted = 0.5 - 2.0f64.ln() / ell;
            assert!(
                (p.beta - predicted).abs() <= 2.0 / (p.gamma * ell),
                "gamma = {}: recentred residual {}",
                p.gamma,
                (p.beta - predicted).abs()
            );
        }
    }

    #[test]
    fn refined_points_are_simple() {
        let delta = zeta_delta();
        let set = delta
            .find_apoints(two(), 10.0, 100.0, &FindOptions::default())
            .unwrap();
        for p in &set.points {
            let s = Complex64::new(p.beta, p.gamma);
            let deriv = (delta.delta_exact(s).unwrap()
                * delta.delta_log_deriv_exact(s).unwrap())
            .norm();
            let ell = delta.invariants().ell(p.gamma).unwrap();
            assert!(deriv > ell * two().norm() / 2.0);
        }
    }

    #[test]
    fn rvm_prediction_values() {
        let delta = zeta_delta();
        let pred = rvm_prediction(delta.invariants(), 100.0, Sign::Plus);
        assert!((pred - 28.127343587325348).abs() < 1e-9);

        let synth = synthetic_theta_delta();
        for &t in &[200.0, 800.0] {
            let plus = rvm_prediction(synth.invariants(), t, Sign::Plus);
            let minus = rvm_prediction(synth.invariants(), t, Sign::Minus);
            assert!((plus - minus - 6.0 / std::f64::consts::PI * t.ln()).abs() < 1e-10);
        }
        let sym = dirichlet5_delta();
        assert_eq!(
            rvm_prediction(sym.invariants(), 500.0, Sign::Plus),
            rvm_prediction(sym.invariants(), 500.0, Sign::Minus)
        );
    }

    #[test]
    fn fractional_decomposition_residual_is_logarithmic() {
        let delta = zeta_delta();
        let set = delta
            .find_apoints(two(), 10.0, 100.0, &FindOptions::default())
            .unwrap();
        // Far from the cluster line.
        let s = Complex64::new(2.0, 55.0);
        let r = delta
            .fractional_decomposition_residual(two(), s, &set)
            .unwrap();
        assert!(r.norm() <= 20.0 * 55.0f64.ln(), "residual {}", r.norm());
        // Right next to an a-point the subtracted pole keeps it bounded.
        let p = set.points[15];
        let near = Complex64::new(p.beta + 1e-3, p.gamma);
        let r = delta
            .fractional_decomposition_residual(two(), near, &set)
            .unwrap();
        assert!(r.norm() <= 20.0 * p.gamma.ln(), "residual {}", r.norm());
    }

    #[test]
    fn fractional_decomposition_requires_coverage() {
        let delta = zeta_delta();
        let set = delta
            .find_apoints(two(), 10.0, 100.0, &FindOptions::default())
            .unwrap();
        let s = Complex64::new(0.5, 99.9);
        assert!(matches!(
            delta.fractional_decomposition_residual(two(), s, &set),
            Err(ApointsError::InsufficientWindow { .. })
        ));
        let other = Complex64::new(0.0, 1.0);
        assert!(matches!(
            delta.fractional_decomposition_residual(other, Complex64::new(0.5, 55.0), &set),
            Err(ApointsError::DomainError(_))
        ));
    }

    #[test]
    fn csv_serialization_shape() {
        let delta = zeta_delta();
        let set = delta
            .find_apoints(two(), 17.0, 24.0, &FindOptions::default())
            .unwrap();
        let csv = set.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "# datum = zeta");
        assert!(lines.next().unwrap().starts_with("# a = 2.0000000000000000e0"));
        assert!(lines.next().unwrap().starts_with("# window = ("));
        assert_eq!(lines.next().unwrap(), "k,gamma,beta,residual,newton_iters");
        assert_eq!(lines.count(), set.len());
    }
}
