//! Concrete Dirichlet series behind the Δ-factors: Euler-Maclaurin
//! evaluators for ζ and Hurwitz ζ, Dirichlet L-functions with their
//! character tables and Gauss-sum root numbers, power products, and the
//! built-in catalog.
//!
//! Evaluators target absolute accuracy `tol` (default 1e-10) on the band
//! σ ∈ [-1, 3], |t| ≤ 1e4, which covers the critical strip uses here with
//! margin. The truncation height N ≈ max(20, 2|t|) keeps every Bernoulli
//! correction term decaying by at least (1/π)² per order.

use num_complex::Complex64;
use thiserror::Error;

use crate::fe::{DatumError, DeltaFactor, FunctionalEquationDatum, GammaFactor};
use crate::special::digamma;
use crate::util::ComplexSum;

/// Default absolute accuracy target for all evaluators.
pub const DEFAULT_EVAL_TOL: f64 = 1e-10;

/// Dirichlet coefficients stored per catalog entry: f(1)..f(128).
pub const COEFFICIENT_COUNT: usize = 128;

/// Character tables are built explicitly, so the modulus stays small.
pub const MAX_MODULUS: u64 = 100;

const EVAL_SIGMA_LO: f64 = -1.0;
const EVAL_SIGMA_HI: f64 = 3.0;
const EVAL_HEIGHT_CAP: f64 = 1e4;

/// B_{2k}/(2k)! for k = 1..12.
const EM_COEFFS: [f64; 12] = [
    0.08333333333333333,
    -0.001388888888888889,
    3.306878306878307e-5,
    -8.267195767195768e-7,
    2.08767569878681e-8,
    -5.284190138687493e-10,
    1.3382536530684679e-11,
    -3.3896802963225827e-13,
    8.586062056277845e-15,
    -2.174868698558062e-16,
    5.5090028283602295e-18,
    -1.3954464685812522e-19,
];

#[derive(Debug, Error)]
pub enum LfunError {
    #[error("pole at s = {s}")]
    PoleError { s: Complex64 },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("bad character: {0}")]
    BadCharacter(String),
    #[error("unknown catalog entry '{0}'")]
    UnknownEntry(String),
    #[error("'{0}' carries a Delta-factor only; no Dirichlet coefficients or evaluator")]
    CoefficientsUnavailable(String),
    #[error(transparent)]
    Datum(#[from] DatumError),
    #[error(transparent)]
    Special(#[from] crate::special::SpecialError),
}

fn real_pow(base: f64, exponent: Complex64) -> Complex64 {
    (exponent * base.ln()).exp()
}

fn check_eval_domain(s: Complex64) -> Result<(), LfunError> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(LfunError::PoleError { s });
    }
    if !(EVAL_SIGMA_LO..=EVAL_SIGMA_HI).contains(&s.re) || !s.re.is_finite() {
        return Err(LfunError::DomainError(format!(
            "sigma = {} outside the evaluator band [{EVAL_SIGMA_LO}, {EVAL_SIGMA_HI}]",
            s.re
        )));
    }
    if !(s.im.abs() <= EVAL_HEIGHT_CAP) {
        return Err(LfunError::DomainError(format!(
            "|t| = {} above the evaluator height cap {EVAL_HEIGHT_CAP}",
            s.im.abs()
        )));
    }
    Ok(())
}

/// Hurwitz ζ(s, w) for w ∈ (0, 1] by Euler-Maclaurin summation:
///
/// ```text
/// ζ(s,w) = Σ_{n<N} (n+w)^{-s} + z^{1-s}/(s-1) + z^{-s}/2
///        + Σ_{k=1}^{12} B_{2k}/(2k)! (s)_{2k-1} z^{-s-2k+1},    z = N + w,
/// ```
///
/// with N = max(20, 2|t|) and early exit once a correction term drops below
/// tol/100 (or starts growing, the asymptotic turning point).
pub fn eval_hurwitz(s: Complex64, w: f64, tol: f64) -> Result<Complex64, LfunError> {
    if !(w > 0.0 && w <= 1.0) {
        return Err(LfunError::DomainError(format!(
            "Hurwitz parameter w must lie in (0, 1], got {w}"
        )));
    }
    if !(tol > 0.0) {
        return Err(LfunError::DomainError(format!("tolerance must be positive, got {tol}")));
    }
    check_eval_domain(s)?;
    let n = 20usize.max((2.0 * s.im.abs()).ceil() as usize);
    let mut sum = ComplexSum::default();
    for k in 0..n {
        sum.add(real_pow(k as f64 + w, -s));
    }
    let z = n as f64 + w;
    sum.add(real_pow(z, Complex64::new(1.0, 0.0) - s) / (s - 1.0));
    sum.add(0.5 * real_pow(z, -s));
    let mut pochhammer = s;
    let mut zpow = real_pow(z, -s - 1.0);
    let mut previous = f64::INFINITY;
    for k in 1..=EM_COEFFS.len() {
        let term = EM_COEFFS[k - 1] * pochhammer * zpow;
        let magnitude = term.norm();
        if magnitude > previous {
            break;
        }
        sum.add(term);
        if magnitude < 0.01 * tol {
            break;
        }
        previous = magnitude;
        pochhammer *= (s + (2 * k - 1) as f64) * (s + (2 * k) as f64);
        zpow /= z * z;
    }
    Ok(sum.value())
}

/// Riemann ζ(s) = ζ(s, 1).
pub fn eval_zeta(s: Complex64, tol: f64) -> Result<Complex64, LfunError> {
    eval_hurwitz(s, 1.0, tol)
}

/// One Dirichlet character mod q, stored as its explicit value table.
///
/// Characters are indexed by the mixed-radix encoding of their exponent
/// tuple against fixed generators of (Z/q)*: the 2-part components first
/// (generator -1, then 5, for moduli divisible by 8; the single generator 3
/// mod 4), then one primitive root per odd prime power in ascending order.
/// Index 0 is always the principal character.
#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    modulus: u64,
    index: u64,
    values: Vec<Complex64>,
    conductor: u64,
    odd: bool,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn pow_mod(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

/// Order of a cyclic component of (Z/q)* together with its generator and
/// the prime-power modulus it lives in.
#[derive(Clone, Copy, Debug)]
struct CyclicComponent {
    modulus: u64,
    generator: u64,
    order: u64,
}

fn euler_phi_prime_power(p: u64, e: u32) -> u64 {
    p.pow(e - 1) * (p - 1)
}

fn primitive_root(p: u64, e: u32) -> u64 {
    let q = p.pow(e);
    let phi = euler_phi_prime_power(p, e);
    'g: for g in 2..q {
        if gcd(g, q) != 1 {
            continue;
        }
        // g generates iff no proper-divisor power is 1.
        for d in 1..phi {
            if phi % d == 0 && pow_mod(g, d, q) == 1 {
                continue 'g;
            }
        }
        return g;
    }
    unreachable!("every odd prime power and 4 has a primitive root");
}

fn unit_group_components(q: u64) -> Vec<CyclicComponent> {
    let mut components = Vec::new();
    let mut remaining = q;
    let mut two_exp = 0u32;
    while remaining % 2 == 0 {
        remaining /= 2;
        two_exp += 1;
    }
    match two_exp {
        0 | 1 => {}
        2 => components.push(CyclicComponent {
            modulus: 4,
            generator: 3,
            order: 2,
        }),
        e => {
            let m = 1u64 << e;
            components.push(CyclicComponent {
                modulus: m,
                generator: m - 1,
                order: 2,
            });
            components.push(CyclicComponent {
                modulus: m,
                generator: 5,
                order: 1u64 << (e - 2),
            });
        }
    }
    let mut p = 3u64;
    while p * p <= remaining || remaining > 1 {
        if remaining % p == 0 {
            let mut e = 0u32;
            while remaining % p == 0 {
                remaining /= p;
                e += 1;
            }
            components.push(CyclicComponent {
                modulus: p.pow(e),
                generator: primitive_root(p, e),
                order: euler_phi_prime_power(p, e),
            });
        }
        p += 2;
        if remaining == 1 {
            break;
        }
    }
    components
}

/// Discrete logarithm of m against one component, by brute force; for the
/// two-generator 2-part the -1 exponent is resolved first.
fn component_dlog(component: &CyclicComponent, paired_sign: Option<u64>, m: u64) -> u64 {
    let q = component.modulus;
    let target = m % q;
    let mut value = 1u64;
    for j in 0..component.order {
        let adjusted = match paired_sign {
            Some(sign_exp) => value * pow_mod(q - 1, sign_exp, q) % q,
            None => value,
        };
        if adjusted == target {
            return j;
        }
        value = value * component.generator % q;
    }
    unreachable!("unit not generated; component decomposition is exhaustive")
}

impl DirichletCharacter {
    /// Builds the character of the given index mod q; rejects the principal
    /// character and any character induced from a proper divisor modulus.
    pub fn build(q: u64, index: u64) -> Result<Self, LfunError> {
        if q < 2 || q > MAX_MODULUS {
            return Err(LfunError::DomainError(format!(
                "modulus must lie in [2, {MAX_MODULUS}], got {q}"
            )));
        }
        let components = unit_group_components(q);
        let phi: u64 = components.iter().map(|c| c.order).product();
        if index >= phi {
            return Err(LfunError::DomainError(format!(
                "character index {index} out of range [0, {phi}) for modulus {q}"
            )));
        }
        if index == 0 {
            return Err(LfunError::BadCharacter(format!(
                "index 0 mod {q} is the principal character"
            )));
        }
        let mut exponents = Vec::with_capacity(components.len());
        let mut rest = index;
        for c in &components {
            exponents.push(rest % c.order);
            rest /= c.order;
        }

        let tau = std::f64::consts::TAU;
        let mut values = vec![Complex64::new(0.0, 0.0); q as usize];
        for m in 1..q {
            if gcd(m, q) != 1 {
                continue;
            }
            let mut phase = 0.0f64;
            let mut i = 0usize;
            while i < components.len() {
                let c = &components[i];
                // A two-generator 2-part occupies two consecutive slots.
                if c.generator == c.modulus - 1 && c.modulus >= 8 {
                    let five = &components[i + 1];
                    let mut found = false;
                    'sign: for sign_exp in 0..2u64 {
                        let mut value = 1u64;
                        for j in 0..five.order {
                            if value * pow_mod(c.modulus - 1, sign_exp, c.modulus) % c.modulus
                                == m % c.modulus
                            {
                                phase += exponents[i] as f64 * sign_exp as f64 / c.order as f64;
                                phase += exponents[i + 1] as f64 * j as f64 / five.order as f64;
                                found = true;
                                break 'sign;
                            }
                            value = value * five.generator % c.modulus;
                        }
                    }
                    debug_assert!(found);
                    i += 2;
                } else {
                    let j = component_dlog(c, None, m);
                    phase += exponents[i] as f64 * j as f64 / c.order as f64;
                    i += 1;
                }
            }
            values[m as usize] = Complex64::from_polar(1.0, tau * phase.fract());
        }

        let conductor = conductor_of(q, &values);
        if conductor != q {
            return Err(LfunError::BadCharacter(format!(
                "index {index} mod {q} is induced from modulus {conductor}, not primitive"
            )));
        }
        let odd = (values[(q - 1) as usize] - Complex64::new(1.0, 0.0)).norm() > 1e-9;
        Ok(Self {
            modulus: q,
            index,
            values,
            conductor,
            odd,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_odd(&self) -> bool {
        self.odd
    }

    pub fn value(&self, n: u64) -> Complex64 {
        self.values[(n % self.modulus) as usize]
    }

    /// τ(χ) = Σ_m χ(m) e^{2πi m/q}.
    pub fn gauss_sum(&self) -> Complex64 {
        let q = self.modulus as f64;
        let mut sum = ComplexSum::default();
        for m in 1..self.modulus {
            let chi = self.values[m as usize];
            if chi == Complex64::new(0.0, 0.0) {
                continue;
            }
            sum.add(chi * Complex64::from_polar(1.0, std::f64::consts::TAU * m as f64 / q));
        }
        sum.value()
    }

    /// Root number ω = τ(χ) / (i^δ √q), δ = 0 for even χ and 1 for odd;
    /// unit modulus exactly when χ is primitive.
    pub fn root_number(&self) -> Complex64 {
        let denominator = if self.odd {
            Complex64::new(0.0, (self.modulus as f64).sqrt())
        } else {
            Complex64::new((self.modulus as f64).sqrt(), 0.0)
        };
        self.gauss_sum() / denominator
    }

    /// The conjugate character (exponents negated componentwise).
    pub fn conjugate(&self) -> Self {
        let values = self.values.iter().map(|v| v.conj()).collect();
        let components = unit_group_components(self.modulus);
        let mut rest = self.index;
        let mut conj_index = 0u64;
        let mut radix = 1u64;
        for c in &components {
            let a = rest % c.order;
            rest /= c.order;
            conj_index += ((c.order - a) % c.order) * radix;
            radix *= c.order;
        }
        Self {
            modulus: self.modulus,
            index: conj_index,
            values,
            conductor: self.conductor,
            odd: self.odd,
        }
    }
}

fn conductor_of(q: u64, values: &[Complex64]) -> u64 {
    'd: for d in 1..=q {
        if q % d != 0 {
            continue;
        }
        for m in 1..q {
            if gcd(m, q) == 1
                && m % d == 1
                && (values[m as usize] - Complex64::new(1.0, 0.0)).norm() > 1e-9
            {
                continue 'd;
            }
        }
        return d;
    }
    q
}

fn dirichlet_l_with(chi: &DirichletCharacter, s: Complex64, tol: f64) -> Result<Complex64, LfunError> {
    let q = chi.modulus;
    if s == Complex64::new(1.0, 0.0) {
        // L(1, χ) = -(1/q) Σ χ(m) ψ(m/q), finite for non-principal χ.
        let mut sum = ComplexSum::default();
        for m in 1..q {
            let value = chi.value(m);
            if value == Complex64::new(0.0, 0.0) {
                continue;
            }
            sum.add(value * digamma(Complex64::new(m as f64 / q as f64, 0.0))?);
        }
        return Ok(-sum.value() / q as f64);
    }
    let prefactor = real_pow(q as f64, -s);
    let per_term = (tol / (q as f64 * prefactor.norm())).max(1e-13);
    let mut sum = ComplexSum::default();
    for m in 1..=q {
        let value = chi.value(m);
        if value == Complex64::new(0.0, 0.0) {
            continue;
        }
        sum.add(value * eval_hurwitz(s, m as f64 / q as f64, per_term)?);
    }
    Ok(prefactor * sum.value())
}

/// L(s, χ) = q^{-s} Σ_{m=1}^{q} χ(m) ζ(s, m/q) for the primitive
/// non-principal character of the given index mod q; s = 1 goes through the
/// digamma closed form instead.
pub fn eval_dirichlet_l(
    q: u64,
    character_index: u64,
    s: Complex64,
    tol: f64,
) -> Result<Complex64, LfunError> {
    let chi = DirichletCharacter::build(q, character_index)?;
    dirichlet_l_with(&chi, s, tol)
}

/// Product of powers of base values: Π L_i(s)^{e_i}.
pub fn eval_power_product(
    bases: &[LFunction],
    exponents: &[u32],
    s: Complex64,
    tol: f64,
) -> Result<Complex64, LfunError> {
    if bases.is_empty() || bases.len() != exponents.len() {
        return Err(LfunError::DomainError(format!(
            "need matching nonempty bases/exponents, got {} and {}",
            bases.len(),
            exponents.len()
        )));
    }
    if exponents.iter().any(|&e| e == 0) {
        return Err(LfunError::DomainError("exponents must be >= 1".into()));
    }
    let mut product = Complex64::new(1.0, 0.0);
    for (base, &e) in bases.iter().zip(exponents) {
        product *= base.evaluate(s, tol)?.powi(e as i32);
    }
    Ok(product)
}

/// Phragmén-Lindelöf growth exponent of |L(σ+it)| in |t|:
///
/// ```text
/// d/2 + (2A - d)σ   on [0, 1/2],
/// 2A(1 - σ)         on [1/2, 1],
/// 0                 on σ ≥ 1,
/// ```
///
/// continuous at the breakpoints. σ < 0 extrapolates the first branch; the
/// second tuple slot flags that case.
pub fn growth_exponent(sigma: f64, growth_a: f64, degree: f64) -> (f64, bool) {
    if sigma >= 1.0 {
        (0.0, false)
    } else if sigma >= 0.5 {
        (2.0 * growth_a * (1.0 - sigma), false)
    } else {
        (
            degree / 2.0 + (2.0 * growth_a - degree) * sigma,
            sigma < 0.0,
        )
    }
}

/// How an [`LFunction`] produces values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvaluatorKind {
    /// Euler-Maclaurin ζ.
    Zeta,
    /// q^{-s} Σ χ(m) ζ(s, m/q) over a stored character table.
    HurwitzDirichlet,
    /// Product of powers of other entries.
    PowerProduct,
    /// Truncated Dirichlet series over config-supplied coefficients;
    /// trustworthy only well right of the convergence abscissa (σ ≥ 2).
    CoefficientList,
    /// No evaluator and no coefficients; only the Δ-factor is usable.
    DeltaOnly,
}

/// A member of the extended Selberg class: a functional-equation datum with
/// its Δ-factor, the Dirichlet coefficients f(1)..f(128) where known, a
/// growth exponent A with L(1/2+it) ≪ |t|^{A+ε}, and an evaluator.
#[derive(Clone, Debug)]
pub struct LFunction {
    name: String,
    delta: DeltaFactor,
    kind: EvaluatorKind,
    coefficients: Option<Vec<Complex64>>,
    growth_a: f64,
    character: Option<DirichletCharacter>,
    factors: Vec<(LFunction, u32)>,
}

impl LFunction {
    fn zeta_entry() -> Result<Self, LfunError> {
        let datum = FunctionalEquationDatum::new(
            "zeta",
            std::f64::consts::PI.sqrt().recip(),
            Complex64::new(1.0, 0.0),
            vec![GammaFactor::new(0.5, Complex64::new(0.0, 0.0))],
        )?;
        Ok(Self {
            name: "zeta".into(),
            delta: DeltaFactor::new(datum)?,
            kind: EvaluatorKind::Zeta,
            coefficients: Some(vec![Complex64::new(1.0, 0.0); COEFFICIENT_COUNT]),
            growth_a: 13.0 / 84.0,
            character: None,
            factors: Vec::new(),
        })
    }

    fn dirichlet_entry(name: &str, q: u64, index: u64) -> Result<Self, LfunError> {
        let chi = DirichletCharacter::build(q, index)?;
        let omega = chi.root_number();
        let mu = if chi.is_odd() { 0.5 } else { 0.0 };
        let datum = FunctionalEquationDatum::new(
            name,
            (q as f64 / std::f64::consts::PI).sqrt(),
            omega,
            vec![GammaFactor::new(0.5, Complex64::new(mu, 0.0))],
        )?;
        let delta = DeltaFactor::new(datum)?;
        let coefficients = (1..=COEFFICIENT_COUNT as u64).map(|n| chi.value(n)).collect();
        let entry = Self {
            name: name.into(),
            delta,
            kind: EvaluatorKind::HurwitzDirichlet,
            coefficients: Some(coefficients),
            growth_a: entry_degree_quarter(1.0),
            character: Some(chi),
            factors: Vec::new(),
        };
        entry.verify_root_number()?;
        Ok(entry)
    }

    /// The Gauss-sum root number is checked against the functional equation
    /// L(s) = Δ(s) conj(L̄(1-s̄)) at one strip point rather than trusted.
    fn verify_root_number(&self) -> Result<(), LfunError> {
        let s = Complex64::new(0.5, 20.0);
        let residual = self.functional_equation_residual(s, DEFAULT_EVAL_TOL)?;
        if !(residual <= 1e-8) {
            return Err(LfunError::DomainError(format!(
                "root number of '{}' fails the functional equation: residual {residual:.3e}",
                self.name
            )));
        }
        Ok(())
    }

    /// Composite of Π L_i^{e_i}: Γ-factor multiset union with multiplicity,
    /// Q and ω products, coefficient Dirichlet convolution, and A summed.
    pub fn power_product(
        name: impl Into<String>,
        factors: Vec<(LFunction, u32)>,
    ) -> Result<Self, LfunError> {
        let name = name.into();
        if factors.is_empty() {
            return Err(LfunError::DomainError("empty power product".into()));
        }
        if factors.iter().any(|(_, e)| *e == 0) {
            return Err(LfunError::DomainError("exponents must be >= 1".into()));
        }
        let mut q = 1.0f64;
        let mut omega = Complex64::new(1.0, 0.0);
        let mut gamma_factors = Vec::new();
        let mut growth_a = 0.0;
        let mut coefficients = Some(vec![Complex64::new(0.0, 0.0); COEFFICIENT_COUNT]);
        if let Some(c) = coefficients.as_mut() {
            c[0] = Complex64::new(1.0, 0.0);
        }
        for (base, e) in &factors {
            let datum = base.datum();
            for _ in 0..*e {
                q *= datum.q;
                omega *= datum.omega;
                gamma_factors.extend_from_slice(&datum.gamma_factors);
                coefficients = match (coefficients, base.coefficients.as_ref()) {
                    (Some(acc), Some(f)) => Some(convolve(&acc, f)),
                    _ => None,
                };
            }
            growth_a += *e as f64 * base.growth_a;
        }
        let datum = FunctionalEquationDatum::new(name.clone(), q, omega, gamma_factors)?;
        Ok(Self {
            name,
            delta: DeltaFactor::new(datum)?,
            kind: EvaluatorKind::PowerProduct,
            coefficients,
            growth_a,
            character: None,
            factors,
        })
    }

    /// Entry over config-supplied coefficients f(1..N); the evaluator is the
    /// bare truncated series, so values are only meaningful for σ ≥ 2.
    pub fn from_coefficients(
        name: impl Into<String>,
        datum: FunctionalEquationDatum,
        coefficients: Vec<Complex64>,
        growth_a: Option<f64>,
    ) -> Result<Self, LfunError> {
        let name = name.into();
        if coefficients.is_empty() {
            return Err(LfunError::DomainError(format!(
                "'{name}' needs at least f(1)"
            )));
        }
        let degree = datum.degree();
        Ok(Self {
            name,
            delta: DeltaFactor::new(datum)?,
            kind: EvaluatorKind::CoefficientList,
            coefficients: Some(coefficients),
            growth_a: growth_a.unwrap_or_else(|| entry_degree_quarter(degree)),
            character: None,
            factors: Vec::new(),
        })
    }

    /// Entry with a Δ-factor but no Dirichlet series; every coefficient or
    /// evaluation request reports CoefficientsUnavailable.
    pub fn delta_only(
        name: impl Into<String>,
        datum: FunctionalEquationDatum,
        growth_a: Option<f64>,
    ) -> Result<Self, LfunError> {
        let name = name.into();
        let degree = datum.degree();
        Ok(Self {
            name,
            delta: DeltaFactor::new(datum)?,
            kind: EvaluatorKind::DeltaOnly,
            coefficients: None,
            growth_a: growth_a.unwrap_or_else(|| entry_degree_quarter(degree)),
            character: None,
            factors: Vec::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn datum(&self) -> &FunctionalEquationDatum {
        self.delta.datum()
    }

    pub fn delta(&self) -> &DeltaFactor {
        &self.delta
    }

    pub fn kind(&self) -> EvaluatorKind {
        self.kind
    }

    pub fn growth_a(&self) -> f64 {
        self.growth_a
    }

    /// f(1).
    pub fn leading(&self) -> Result<Complex64, LfunError> {
        self.coefficient(1)
    }

    pub fn coefficient(&self, n: u64) -> Result<Complex64, LfunError> {
        let Some(coefficients) = self.coefficients.as_ref() else {
            return Err(LfunError::CoefficientsUnavailable(self.name.clone()));
        };
        if n == 0 || n > coefficients.len() as u64 {
            return Err(LfunError::DomainError(format!(
                "coefficient index {n} outside the stored range 1..={}",
                coefficients.len()
            )));
        }
        Ok(coefficients[(n - 1) as usize])
    }

    pub fn coefficients(&self) -> Result<&[Complex64], LfunError> {
        self.coefficients
            .as_deref()
            .ok_or_else(|| LfunError::CoefficientsUnavailable(self.name.clone()))
    }

    /// L(s) to absolute accuracy ~tol, dispatched on the evaluator kind.
    pub fn evaluate(&self, s: Complex64, tol: f64) -> Result<Complex64, LfunError> {
        match self.kind {
            EvaluatorKind::Zeta => eval_zeta(s, tol),
            EvaluatorKind::HurwitzDirichlet => {
                let chi = self.character.as_ref().expect("dirichlet entry has a character");
                dirichlet_l_with(chi, s, tol)
            }
            EvaluatorKind::PowerProduct => {
                let mut product = Complex64::new(1.0, 0.0);
                for (base, e) in &self.factors {
                    product *= base.evaluate(s, tol)?.powi(*e as i32);
                }
                Ok(product)
            }
            EvaluatorKind::CoefficientList => {
                if s.re < 2.0 {
                    return Err(LfunError::DomainError(format!(
                        "coefficient-list evaluation needs sigma >= 2, got {}",
                        s.re
                    )));
                }
                let coefficients = self.coefficients()?;
                let mut sum = ComplexSum::default();
                for (i, f) in coefficients.iter().enumerate() {
                    sum.add(f * real_pow((i + 1) as f64, -s));
                }
                Ok(sum.value())
            }
            EvaluatorKind::DeltaOnly => {
                Err(LfunError::CoefficientsUnavailable(self.name.clone()))
            }
        }
    }

    /// The dual entry L̄ with conjugated coefficients and conjugated datum.
    pub fn conjugate(&self) -> Result<Self, LfunError> {
        match self.kind {
            EvaluatorKind::Zeta => Ok(self.clone()),
            EvaluatorKind::HurwitzDirichlet => {
                let chi = self.character.as_ref().expect("dirichlet entry has a character");
                let conj = chi.conjugate();
                Self::dirichlet_entry(&self.name, conj.modulus(), conj.index())
            }
            EvaluatorKind::PowerProduct => {
                let mut factors = Vec::with_capacity(self.factors.len());
                for (base, e) in &self.factors {
                    factors.push((base.conjugate()?, *e));
                }
                Self::power_product(self.name.clone(), factors)
            }
            EvaluatorKind::CoefficientList => Self::from_coefficients(
                self.name.clone(),
                self.datum().conjugate(),
                self.coefficients()?.iter().map(|f| f.conj()).collect(),
                Some(self.growth_a),
            ),
            EvaluatorKind::DeltaOnly => {
                Self::delta_only(self.name.clone(), self.datum().conjugate(), Some(self.growth_a))
            }
        }
    }

    /// |L(s) - Δ(s) conj(L̄(1-s̄))|, the defect of the functional equation;
    /// bounded by the combined evaluator tolerances for a correct datum.
    pub fn functional_equation_residual(&self, s: Complex64, tol: f64) -> Result<f64, LfunError> {
        let lhs = self.evaluate(s, tol)?;
        let dual = self.conjugate()?;
        let reflected = dual.evaluate(Complex64::new(1.0, 0.0) - s.conj(), tol)?;
        let delta = self.delta.delta_exact(s)?;
        Ok((lhs - delta * reflected.conj()).norm())
    }
}

fn entry_degree_quarter(degree: f64) -> f64 {
    degree / 4.0
}

fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().min(b.len());
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 1..=n {
        let mut sum = ComplexSum::default();
        for d in 1..=n {
            if i % d == 0 && i / d <= n {
                sum.add(a[d - 1] * b[i / d - 1]);
            }
            if d * d > i {
                break;
            }
            // divisors come in pairs (d, i/d); handle the cofactor once.
            if i % d == 0 {
                let cod = i / d;
                if cod != d && cod <= n && d > 1 {
                    // already covered when the loop reaches cod
                }
            }
        }
        out[i - 1] = sum.value();
    }
    out
}

/// Names accepted by [`catalog_get`], alphabetical.
pub fn catalog_names() -> &'static [&'static str] {
    &["dirichlet-5-odd", "synthetic-theta", "zeta", "zeta2"]
}

/// Built-in entries:
///
/// - `zeta`: ζ with f(n) ≡ 1 and the proven subconvexity exponent
///   A = 13/84;
/// - `zeta2`: ζ² as a power product, f(n) the divisor function, A = 13/42;
/// - `dirichlet-5-odd`: L(s, χ) for the character mod 5 with χ(2) = i, root
///   number computed from its Gauss sum and verified at load;
/// - `synthetic-theta`: a datum with Θ = 6 (single Γ-factor, λ = 1,
///   μ = 1/2 + 3i) and no Dirichlet series, for Δ-level experiments only.
pub fn catalog_get(name: &str) -> Result<LFunction, LfunError> {
    match name {
        "zeta" => LFunction::zeta_entry(),
        "zeta2" => {
            let zeta = LFunction::zeta_entry()?;
            let mut entry = LFunction::power_product("zeta2", vec![(zeta, 2)])?;
            entry.growth_a = 13.0 / 42.0;
            Ok(entry)
        }
        "dirichlet-5-odd" => LFunction::dirichlet_entry("dirichlet-5-odd", 5, 1),
        "synthetic-theta" => {
            let datum = FunctionalEquationDatum::new(
                "synthetic-theta",
                1.0,
                Complex64::new(1.0, 0.0),
                vec![GammaFactor::new(1.0, Complex64::new(0.5, 3.0))],
            )?;
            LFunction::delta_only("synthetic-theta", datum, None)
        }
        other => Err(LfunError::UnknownEntry(other.to_string())),
    }
}
