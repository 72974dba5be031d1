//! Tempered distributions as finite sums of catalog atoms, and the pairing
//! engine `(e^{iat} F, psi)` used by every transform in this crate.
//!
//! Two atom families are supported: Dirac derivatives `w * delta_c^{(k)}`
//! paired in closed form, and densities `w * poly(t) * base(t) * e^{ibt}`
//! paired by adaptive quadrature with analytic tail truncation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadConfig, QuadOutcome};
use crate::serde_complex;

/// Catalog of density base shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseKind {
    /// `exp(-t^2 / (2 sigma^2))`
    Gaussian { sigma: f64 },
    /// `exp(-lambda |t|)`
    Laplace { lambda: f64 },
    /// `cos(b t)`
    Cosine { b: f64 },
    /// `sin(b t)`
    Sine { b: f64 },
    /// `1`
    Constant,
    /// `1` on `[-a, a]`, `0` elsewhere
    Indicator { a: f64 },
    /// `max(0, 1 - |t|/a)`
    Triangle { a: f64 },
}

/// Decay classification of a base, used to pick truncation bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayClass {
    /// Supported on `[-a, a]`.
    Compact(f64),
    /// Bounded by `exp(-t^2/(2 sigma^2))`.
    Gaussian(f64),
    /// Bounded by `exp(-lambda |t|)`.
    Exponential(f64),
    /// No decay (constant / trigonometric).
    None,
}

impl BaseKind {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            BaseKind::Gaussian { sigma } => (-t * t / (2.0 * sigma * sigma)).exp(),
            BaseKind::Laplace { lambda } => (-lambda * t.abs()).exp(),
            BaseKind::Cosine { b } => (b * t).cos(),
            BaseKind::Sine { b } => (b * t).sin(),
            BaseKind::Constant => 1.0,
            BaseKind::Indicator { a } => {
                if t.abs() <= a {
                    1.0
                } else {
                    0.0
                }
            }
            BaseKind::Triangle { a } => (1.0 - t.abs() / a).max(0.0),
        }
    }

    pub fn decay(&self) -> DecayClass {
        match *self {
            BaseKind::Gaussian { sigma } => DecayClass::Gaussian(sigma),
            BaseKind::Laplace { lambda } => DecayClass::Exponential(lambda),
            BaseKind::Indicator { a } | BaseKind::Triangle { a } => DecayClass::Compact(a),
            _ => DecayClass::None,
        }
    }

    /// Interior points where the base is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            BaseKind::Laplace { .. } => vec![0.0],
            BaseKind::Indicator { a } => vec![-a, a],
            BaseKind::Triangle { a } => vec![-a, 0.0, a],
            _ => Vec::new(),
        }
    }

    pub fn is_even(&self) -> bool {
        !matches!(self, BaseKind::Sine { .. })
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, BaseKind::Indicator { .. })
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            BaseKind::Gaussian { sigma } => sigma > 0.0 && sigma.is_finite(),
            BaseKind::Laplace { lambda } => lambda > 0.0 && lambda.is_finite(),
            BaseKind::Indicator { a } | BaseKind::Triangle { a } => a > 0.0 && a.is_finite(),
            BaseKind::Cosine { b } | BaseKind::Sine { b } => b.is_finite(),
            BaseKind::Constant => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDistribution {
                reason: format!("base parameter out of range: {self:?}"),
            })
        }
    }
}

/// `w * delta_c^{(k)}`, optionally modulated by `e^{ibt}`.
///
/// Pairing rule: `(delta_c^{(k)}, psi) = (-1)^k psi^{(k)}(c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiracAtom {
    pub location: f64,
    #[serde(default)]
    pub derivative_order: u32,
    #[serde(with = "serde_complex")]
    pub weight: Complex64,
    #[serde(default)]
    pub modulation: f64,
}

/// `w * poly(t) * base(t) * e^{ibt}` as a regular tempered distribution.
///
/// `growth_degree` is the declared polynomial growth exponent: the smallest
/// `p` with `|poly * base| <= C (1+|t|)^p`. For non-decaying bases it must
/// equal the polynomial degree; decaying and compactly supported bases may
/// declare any `p` up to the polynomial degree (usually 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityAtom {
    pub base: BaseKind,
    /// Polynomial prefactor coefficients, ascending powers. Empty means 1.
    #[serde(default)]
    pub poly: Vec<f64>,
    #[serde(with = "serde_complex")]
    pub weight: Complex64,
    #[serde(default)]
    pub growth_degree: u32,
    #[serde(default)]
    pub modulation: f64,
}

impl DensityAtom {
    /// Effective degree of the polynomial prefactor.
    pub fn poly_degree(&self) -> u32 {
        self.poly
            .iter()
            .rposition(|&c| c != 0.0)
            .map(|d| d as u32)
            .unwrap_or(0)
    }

    fn poly_eval(&self, t: f64) -> f64 {
        if self.poly.is_empty() {
            return 1.0;
        }
        let mut acc = 0.0;
        for &c in self.poly.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    fn poly_eval_c(&self, t: Complex64) -> Complex64 {
        if self.poly.is_empty() {
            return Complex64::new(1.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.poly.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// Absolute coefficients of the prefactor, used by tail bounds.
    fn poly_abs(&self) -> Vec<f64> {
        if self.poly.is_empty() {
            vec![1.0]
        } else {
            self.poly.iter().map(|c| c.abs()).collect()
        }
    }

    /// Pointwise value `w * poly(t) * base(t) * e^{ibt}`.
    pub fn value_at(&self, t: f64) -> Complex64 {
        let phase = Complex64::from_polar(1.0, self.modulation * t);
        self.weight * self.poly_eval(t) * self.base.eval(t) * phase
    }

    pub fn is_real_even(&self) -> bool {
        let poly_even = self
            .poly
            .iter()
            .enumerate()
            .all(|(i, &c)| i % 2 == 0 || c == 0.0);
        self.base.is_even() && self.weight.im == 0.0 && self.modulation == 0.0 && poly_even
    }

    pub fn is_bounded(&self) -> bool {
        match self.base.decay() {
            DecayClass::None => self.poly_degree() == 0,
            _ => true,
        }
    }

    fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !self.poly.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidDistribution {
                reason: "non-finite polynomial coefficient".into(),
            });
        }
        let d = self.poly_degree();
        match self.base.decay() {
            DecayClass::None => {
                if self.growth_degree != d {
                    return Err(Error::InvalidDistribution {
                        reason: format!(
                            "growth_degree {} must equal polynomial degree {} for non-decaying base {:?}",
                            self.growth_degree, d, self.base
                        ),
                    });
                }
            }
            _ => {
                if self.growth_degree > d {
                    return Err(Error::InvalidDistribution {
                        reason: format!(
                            "growth_degree {} exceeds polynomial degree {}",
                            self.growth_degree, d
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// One atom of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Atom {
    Dirac(DiracAtom),
    Density(DensityAtom),
}

impl Atom {
    pub fn weight(&self) -> Complex64 {
        match self {
            Atom::Dirac(d) => d.weight,
            Atom::Density(d) => d.weight,
        }
    }

    fn validate(&self) -> Result<()> {
        let w = self.weight();
        if !w.re.is_finite() || !w.im.is_finite() {
            return Err(Error::InvalidDistribution {
                reason: "non-finite atom weight".into(),
            });
        }
        let m = match self {
            Atom::Dirac(d) => d.modulation,
            Atom::Density(d) => d.modulation,
        };
        if !m.is_finite() {
            return Err(Error::InvalidDistribution {
                reason: "non-finite modulation".into(),
            });
        }
        match self {
            Atom::Dirac(d) => {
                if !d.location.is_finite() {
                    return Err(Error::InvalidDistribution {
                        reason: "non-finite Dirac location".into(),
                    });
                }
                Ok(())
            }
            Atom::Density(d) => d.validate(),
        }
    }
}

/// A finite sum of atoms; the object `F` every checker operates on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Distribution {
    atoms: Vec<Atom>,
}

impl Distribution {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution {
                reason: "atom list must be non-empty".into(),
            });
        }
        for a in &atoms {
            a.validate()?;
        }
        Ok(Distribution { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Certified upper bound on the S'-order: `k` for `delta^{(k)}`,
    /// `growth_degree + 2` for densities, max over atoms.
    pub fn order_bound(&self) -> u32 {
        self.atoms
            .iter()
            .map(|a| match a {
                Atom::Dirac(d) => d.derivative_order,
                Atom::Density(d) => d.growth_degree + 2,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn has_dirac(&self) -> bool {
        self.atoms.iter().any(|a| matches!(a, Atom::Dirac(_)))
    }

    /// Pointwise value; only meaningful when every atom is a density.
    pub fn value_at(&self, t: f64) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| match a {
                Atom::Density(d) => d.value_at(t),
                Atom::Dirac(_) => Complex64::new(0.0, 0.0),
            })
            .sum()
    }
}

/// A pairing value together with its absolute-weight companion (the same
/// pairing of `sum |w_j| atom_j`, a magnitude reference for thresholds) and
/// a conservative numerical error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Pairing {
    pub value: Complex64,
    pub companion: Complex64,
    pub error: f64,
}

impl Pairing {
    pub fn scale(&self) -> f64 {
        self.companion.norm()
    }
}

/// Gaussian mixture `sum_l c_l exp(-(x-p_l)^2 / (2 w_l^2))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianMixture {
    pub components: Vec<MixtureComponent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    #[serde(with = "serde_complex")]
    pub amplitude: Complex64,
    pub center: f64,
    pub width: f64,
}

impl GaussianMixture {
    pub fn eval(&self, x: f64) -> Complex64 {
        self.components
            .iter()
            .map(|c| {
                let u = x - c.center;
                c.amplitude * (-u * u / (2.0 * c.width * c.width)).exp()
            })
            .sum()
    }

    /// j-th derivative at `x`, via the polynomial recurrence
    /// `P <- P' - P (x - p)/w^2` applied per component.
    pub fn derivative_at(&self, x: f64, j: u32) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for c in &self.components {
            let w2 = c.width * c.width;
            // Polynomial in u = x - p, ascending coefficients.
            let mut p: Vec<f64> = vec![1.0];
            for _ in 0..j {
                let mut next = vec![0.0; p.len() + 1];
                for (i, &ci) in p.iter().enumerate() {
                    if i >= 1 {
                        next[i - 1] += ci * i as f64; // P'
                    }
                    next[i + 1] -= ci / w2; // -P u / w^2
                }
                p = next;
            }
            let u = x - c.center;
            let mut horner = 0.0;
            for &ci in p.iter().rev() {
                horner = horner * u + ci;
            }
            total += c.amplitude * horner * (-u * u / (2.0 * w2)).exp();
        }
        total
    }

    fn max_extent(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.center.abs() + 8.0 * c.width)
            .fold(0.0, f64::max)
    }

    /// Upper bound for `int_T^inf t^j |mixture(t)| dt`, per component via
    /// shifted Gaussian tails.
    fn tail_bound(&self, j: u32, t: f64) -> f64 {
        let mut total = 0.0;
        for c in &self.components {
            let p = c.center.abs();
            if t <= p + c.width {
                return f64::INFINITY;
            }
            // int_T^inf t^j e^{-(t-p)^2/(2w^2)} dt <= sum_i C(j,i) p^{j-i} G_i(w, T-p)
            let mut binom = 1.0f64;
            let mut s = 0.0;
            for i in 0..=j {
                s += binom * p.powi((j - i) as i32) * quad::gauss_tail(i, c.width, t - p);
                binom *= (j - i) as f64 / (i + 1) as f64;
            }
            total += c.amplitude.norm() * s;
        }
        total
    }
}

/// A test function `phi` as a Gaussian mixture with complex amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunction {
    pub components: Vec<MixtureComponent>,
}

impl TestFunction {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDistribution {
                reason: "test function must have at least one component".into(),
            });
        }
        for c in &components {
            if !(c.width > 0.0) || !c.width.is_finite() || !c.center.is_finite() {
                return Err(Error::InvalidDistribution {
                    reason: "test function component parameters out of range".into(),
                });
            }
            if !c.amplitude.re.is_finite() || !c.amplitude.im.is_finite() {
                return Err(Error::InvalidDistribution {
                    reason: "non-finite test function amplitude".into(),
                });
            }
        }
        Ok(TestFunction { components })
    }

    /// Closed-form `phi * phi^star` (Gaussian convolution identity); again a
    /// Gaussian mixture, no quadrature involved.
    pub fn autocorrelation(&self) -> GaussianMixture {
        let mut components = Vec::with_capacity(self.components.len() * self.components.len());
        for l in &self.components {
            for m in &self.components {
                let vsum = l.width * l.width + m.width * m.width;
                let amp = l.amplitude
                    * m.amplitude.conj()
                    * (2.0 * std::f64::consts::PI * l.width * l.width * m.width * m.width / vsum)
                        .sqrt();
                components.push(MixtureComponent {
                    amplitude: amp,
                    center: l.center - m.center,
                    width: vsum.sqrt(),
                });
            }
        }
        GaussianMixture { components }
    }
}

/// Closed-form kernel a density is paired against.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelForm {
    /// `(z - t)^{-power}`
    CauchyPower { z: Complex64, power: u32 },
    /// `y / (pi (t^2 + y^2))`
    Poisson { y: f64 },
    /// A Gaussian mixture (test-function pairing).
    Mixture(GaussianMixture),
}

/// Kernel plus the modulation `e^{i omega t}` folded into the integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelDescriptor {
    pub form: KernelForm,
    pub modulation: f64,
}

impl KernelForm {
    fn eval(&self, t: f64) -> Complex64 {
        match self {
            KernelForm::CauchyPower { z, power } => (z - t).powi(-(*power as i32)),
            KernelForm::Poisson { y } => {
                Complex64::new(y / (std::f64::consts::PI * (t * t + y * y)), 0.0)
            }
            KernelForm::Mixture(m) => m.eval(t),
        }
    }

    /// Abscissa of the pole (or center of variation) on the real line.
    fn pole_abscissa(&self) -> f64 {
        match self {
            KernelForm::CauchyPower { z, .. } => z.re,
            KernelForm::Poisson { .. } => 0.0,
            KernelForm::Mixture(_) => 0.0,
        }
    }

    /// Length scale over which the kernel varies.
    fn scale(&self) -> f64 {
        match self {
            KernelForm::CauchyPower { z, .. } => z.norm().max(1.0),
            KernelForm::Poisson { y } => y.abs().max(1.0),
            KernelForm::Mixture(m) => m.max_extent().max(1.0),
        }
    }

    /// sup |K(t)| over the two rays `|t| >= T`.
    fn sup_beyond(&self, t: f64) -> f64 {
        match self {
            KernelForm::CauchyPower { z, power } => {
                let d_right = (Complex64::new(t, 0.0) - z).norm();
                let d_left = (Complex64::new(-t, 0.0) - z).norm();
                d_right.min(d_left).powi(-(*power as i32))
            }
            KernelForm::Poisson { y } => y.abs() / (std::f64::consts::PI * (t * t + y * y)),
            KernelForm::Mixture(m) => m
                .components
                .iter()
                .map(|c| {
                    let d = (t - c.center.abs()).max(0.0);
                    c.amplitude.norm() * (-d * d / (2.0 * c.width * c.width)).exp()
                })
                .sum(),
        }
    }
}

// One exponential component of a trigonometric base split.
struct SplitComponent {
    coeff: Complex64,
    extra_freq: f64,
}

// Residual base after pulling out complex exponentials.
#[derive(Clone, Copy)]
enum ResidualBase {
    One,
    Shape(BaseKind),
}

impl ResidualBase {
    fn eval(&self, t: f64) -> f64 {
        match self {
            ResidualBase::One => 1.0,
            ResidualBase::Shape(b) => b.eval(t),
        }
    }

    fn decay(&self) -> DecayClass {
        match self {
            ResidualBase::One => DecayClass::None,
            ResidualBase::Shape(b) => b.decay(),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            ResidualBase::One => Vec::new(),
            ResidualBase::Shape(b) => b.kinks(),
        }
    }

    /// Entire continuation off the real axis, where it exists.
    fn eval_c(&self, t: Complex64) -> Complex64 {
        match self {
            ResidualBase::One => Complex64::new(1.0, 0.0),
            ResidualBase::Shape(BaseKind::Gaussian { sigma }) => {
                (-t * t / (2.0 * sigma * sigma)).exp()
            }
            _ => unreachable!("complex continuation only used for entire bases"),
        }
    }

    /// Whether the base extends to an entire function (contour shifts are
    /// valid for these).
    fn is_entire(&self) -> bool {
        matches!(
            self,
            ResidualBase::One | ResidualBase::Shape(BaseKind::Gaussian { .. })
        )
    }
}

fn split_base(kind: BaseKind) -> (Vec<SplitComponent>, ResidualBase) {
    match kind {
        BaseKind::Cosine { b } => (
            vec![
                SplitComponent {
                    coeff: Complex64::new(0.5, 0.0),
                    extra_freq: b,
                },
                SplitComponent {
                    coeff: Complex64::new(0.5, 0.0),
                    extra_freq: -b,
                },
            ],
            ResidualBase::One,
        ),
        BaseKind::Sine { b } => (
            vec![
                SplitComponent {
                    coeff: Complex64::new(0.0, -0.5),
                    extra_freq: b,
                },
                SplitComponent {
                    coeff: Complex64::new(0.0, 0.5),
                    extra_freq: -b,
                },
            ],
            ResidualBase::One,
        ),
        BaseKind::Constant => (
            vec![SplitComponent {
                coeff: Complex64::new(1.0, 0.0),
                extra_freq: 0.0,
            }],
            ResidualBase::One,
        ),
        other => (
            vec![SplitComponent {
                coeff: Complex64::new(1.0, 0.0),
                extra_freq: 0.0,
            }],
            ResidualBase::Shape(other),
        ),
    }
}

/// Analytic bound for the two tails `int_{|t|>=T} |poly * residual * K| dt`.
fn tail_bound(
    poly_abs: &[f64],
    residual: ResidualBase,
    kernel: &KernelForm,
    t: f64,
) -> f64 {
    match residual.decay() {
        DecayClass::Compact(a) => {
            if t >= a {
                0.0
            } else {
                f64::INFINITY
            }
        }
        DecayClass::Gaussian(sigma) => {
            let sup = kernel.sup_beyond(t);
            let env: f64 = poly_abs
                .iter()
                .enumerate()
                .map(|(j, &c)| c * quad::gauss_tail(j as u32, sigma, t))
                .sum();
            2.0 * sup * env
        }
        DecayClass::Exponential(lambda) => {
            let sup = kernel.sup_beyond(t);
            let env: f64 = poly_abs
                .iter()
                .enumerate()
                .map(|(j, &c)| c * quad::exp_tail(j as u32, lambda, t))
                .sum();
            2.0 * sup * env
        }
        DecayClass::None => match kernel {
            KernelForm::CauchyPower { z, power } => {
                let x = z.re.abs();
                if t <= 2.0 * x + 1.0 {
                    return f64::INFINITY;
                }
                let mut total = 0.0;
                for (j, &c) in poly_abs.iter().enumerate() {
                    if *power < j as u32 + 2 {
                        return f64::INFINITY;
                    }
                    total += c * quad::power_tail(j as u32, x, *power, t);
                }
                2.0 * total
            }
            KernelForm::Poisson { y } => {
                let mut total = 0.0;
                for (j, &c) in poly_abs.iter().enumerate() {
                    if j > 0 {
                        return f64::INFINITY;
                    }
                    total += c * y.abs() / std::f64::consts::PI * quad::power_tail(0, 0.0, 2, t);
                }
                2.0 * total
            }
            KernelForm::Mixture(m) => {
                let mut total = 0.0;
                for (j, &c) in poly_abs.iter().enumerate() {
                    total += c * m.tail_bound(j as u32, t);
                }
                2.0 * total
            }
        },
    }
}


/// A quadrature part is acceptable when it converged or when its estimate
/// sits at the f64 conditioning floor of its own integrand mass.
fn at_floor(out: &QuadOutcome) -> bool {
    out.converged || out.error <= 200.0 * f64::EPSILON * out.resabs
}

/// Grow the truncation radius until the analytic tail bound drops below a
/// tenth of the absolute target.
fn choose_truncation(
    poly_abs: &[f64],
    residual: ResidualBase,
    kernel: &KernelForm,
    mut t: f64,
    cfg: &QuadConfig,
) -> Result<(f64, f64)> {
    let mut tail = tail_bound(poly_abs, residual, kernel, t);
    if matches!(residual.decay(), DecayClass::Compact(_)) {
        return Ok((t, tail));
    }
    let tail_target = cfg.target_abs / 10.0;
    let mut iterations = 0;
    while tail > tail_target {
        t *= 2.0;
        iterations += 1;
        if iterations > 64 || t > 1e14 {
            return Err(Error::QuadratureFailure {
                context: "tail truncation bound does not reach target".into(),
                estimate: tail,
                target: tail_target,
                evals: 0,
            });
        }
        tail = tail_bound(poly_abs, residual, kernel, t);
    }
    Ok((t, tail))
}

/// Integrate one exponential component of a density atom.
fn integrate_component(
    atom: &DensityAtom,
    residual: ResidualBase,
    omega: f64,
    kernel: &KernelForm,
    cfg: &QuadConfig,
) -> Result<QuadOutcome> {
    // Near-axis Cauchy kernels make the real-axis integrand cancel
    // catastrophically for light-spectrum bases; entire bases take a
    // contour shifted away from the pole instead. The depth trades the
    // modulation growth e^{|omega| c} against the gained pole distance
    // (optimum near q/|omega| - |Im z|); when the pole is already far the
    // real-axis path is better conditioned and is kept.
    if let KernelForm::CauchyPower { z, power } = kernel {
        if residual.is_entire() {
            let cap = match residual {
                ResidualBase::Shape(BaseKind::Gaussian { sigma }) => 2.0 * sigma,
                _ => 2.0,
            };
            let optimal = *power as f64 / omega.abs().max(1e-9) - z.im.abs();
            let depth_mag = optimal.clamp(0.0, cap);
            if depth_mag > 0.05 {
                return integrate_component_shifted(
                    atom, residual, omega, *z, *power, depth_mag, cfg,
                );
            }
        }
    }

    let poly_abs = atom.poly_abs();
    let phase = |t: f64| Complex64::from_polar(1.0, omega * t);
    let mut integrand =
        |t: f64| Complex64::new(atom.poly_eval(t) * residual.eval(t), 0.0) * phase(t) * kernel.eval(t);

    let degree = atom.poly_degree();
    let kernel_scale = kernel.scale();
    // Mixture kernels decay superexponentially, so a bounded oscillation
    // never needs ray summation.
    let oscillatory = matches!(residual.decay(), DecayClass::None)
        && omega != 0.0
        && !matches!(kernel, KernelForm::Mixture(_));

    if oscillatory {
        // Central window clears the kernel's pole region; the rays are summed
        // as half-period panels with series acceleration.
        let t0 = (2.0 * kernel.pole_abscissa().abs() + 2.0)
            .max(16.0)
            .max(2.0 * (degree as f64 + 4.0));
        let part_cfg = QuadConfig {
            target_rel: cfg.target_rel,
            target_abs: cfg.target_abs / 4.0,
            max_evals: cfg.max_evals / 3,
        };
        let mut breaks = residual.kinks();
        breaks.push(kernel.pole_abscissa());
        breaks.push(0.0);
        let central = quad::adaptive(&mut integrand, -t0, t0, &breaks, &part_cfg);

        let right = quad::oscillatory_ray(&mut integrand, t0, omega, &part_cfg, 512);
        let mut neg_integrand = |u: f64| {
            let t = -u;
            Complex64::new(atom.poly_eval(t) * residual.eval(t), 0.0) * phase(t) * kernel.eval(t)
        };
        let left = quad::oscillatory_ray(&mut neg_integrand, t0, -omega, &part_cfg, 512);

        let value = central.value + right.value + left.value;
        let error = central.error + right.error + left.error;
        let evals = central.evals + right.evals + left.evals;
        let converged = at_floor(&central) && at_floor(&right) && at_floor(&left);
        return Ok(QuadOutcome {
            value,
            error,
            evals,
            converged,
            resabs: central.resabs + right.resabs + left.resabs,
        });
    }

    // Plain path: truncate where the analytic tail bound is subordinate,
    // then integrate adaptively on the real axis.
    let start = match residual.decay() {
        DecayClass::Compact(a) => a,
        DecayClass::Gaussian(sigma) => (8.0 * sigma).max(2.0 * kernel_scale + 2.0),
        DecayClass::Exponential(_) => (2.0 * kernel_scale + 2.0).max(16.0),
        DecayClass::None => (2.0 * kernel_scale + 2.0)
            .max(16.0)
            .max(2.0 * (degree as f64 + 4.0)),
    };
    let (t, tail) = choose_truncation(&poly_abs, residual, kernel, start, cfg)?;

    let mut breaks = residual.kinks();
    breaks.push(kernel.pole_abscissa());
    breaks.push(0.0);
    breaks.push(kernel_scale);
    breaks.push(-kernel_scale);
    let out = quad::adaptive(&mut integrand, -t, t, &breaks, cfg);
    Ok(QuadOutcome {
        value: out.value,
        error: out.error + tail,
        evals: out.evals,
        converged: at_floor(&out),
        resabs: out.resabs,
    })
}

/// Contour-shifted evaluation for entire bases against the Cauchy kernel.
///
/// The real line is deformed into: real-axis tails or oscillatory rays
/// beyond `[-T, T]`, two short vertical legs at `-T` and `T`, and a
/// horizontal segment at `Im t = depth` with the sign chosen away from the
/// pole. Off the axis the integrand keeps its modulus (no cancellation),
/// while the original path passes within `|Im z|` of the pole.
fn integrate_component_shifted(
    atom: &DensityAtom,
    residual: ResidualBase,
    omega: f64,
    z: Complex64,
    power: u32,
    depth_mag: f64,
    cfg: &QuadConfig,
) -> Result<QuadOutcome> {
    let q = power as i32;
    let degree = atom.poly_degree();
    let poly_abs = atom.poly_abs();
    let depth = if z.im > 0.0 { -depth_mag } else { depth_mag };

    let f = |t: Complex64| -> Complex64 {
        atom.poly_eval_c(t)
            * residual.eval_c(t)
            * (Complex64::new(0.0, omega) * t).exp()
            * (z - t).powi(-q)
    };

    // Central window; beyond it either analytic tails (decaying residual or
    // omega = 0) or oscillatory real-axis rays.
    let kernel_form = KernelForm::CauchyPower { z, power };
    let (t0, tail, rays) = match residual.decay() {
        DecayClass::Gaussian(sigma) => {
            let start = (8.0 * sigma).max(2.0 * z.re.abs() + 2.0);
            let (t, tail) = choose_truncation(&poly_abs, residual, &kernel_form, start, cfg)?;
            (t, tail, false)
        }
        DecayClass::None => {
            let t0 = (2.0 * z.re.abs() + 2.0)
                .max(16.0)
                .max(2.0 * (degree as f64 + 4.0));
            if omega == 0.0 {
                let (t, tail) = choose_truncation(&poly_abs, residual, &kernel_form, t0, cfg)?;
                (t, tail, false)
            } else {
                (t0, 0.0, true)
            }
        }
        _ => unreachable!("shifted path requires an entire base"),
    };

    let part_cfg = QuadConfig {
        target_rel: cfg.target_rel,
        target_abs: cfg.target_abs / 6.0,
        max_evals: cfg.max_evals / 4,
    };

    // Horizontal segment at Im t = depth.
    let mut horizontal = |u: f64| f(Complex64::new(u, depth));
    let breaks = [z.re, 0.0];
    let central = quad::adaptive(&mut horizontal, -t0, t0, &breaks, &part_cfg);

    // Vertical legs: t = +-t0 + i depth s, s in [0, 1]; the right leg runs
    // back up to the real axis, hence the sign flip.
    let leg_cfg = QuadConfig {
        target_rel: cfg.target_rel,
        target_abs: cfg.target_abs / 6.0,
        max_evals: cfg.max_evals / 8,
    };
    let i_depth = Complex64::new(0.0, depth);
    let mut left_leg = |s: f64| f(Complex64::new(-t0, depth * s)) * i_depth;
    let left = quad::adaptive(&mut left_leg, 0.0, 1.0, &[], &leg_cfg);
    let mut right_leg = |s: f64| f(Complex64::new(t0, depth * s)) * i_depth;
    let right = quad::adaptive(&mut right_leg, 0.0, 1.0, &[], &leg_cfg);

    let mut value = central.value + left.value - right.value;
    let mut error = central.error + left.error + right.error + tail;
    let mut evals = central.evals + left.evals + right.evals;
    let mut resabs = central.resabs + left.resabs + right.resabs;
    let mut converged = at_floor(&central) && at_floor(&left) && at_floor(&right);

    if rays {
        let phase = |t: f64| Complex64::from_polar(1.0, omega * t);
        let mut pos_ray =
            |t: f64| Complex64::new(atom.poly_eval(t) * residual.eval(t), 0.0) * phase(t) * kernel_form.eval(t);
        let r = quad::oscillatory_ray(&mut pos_ray, t0, omega, &part_cfg, 512);
        let mut neg_ray = |u: f64| {
            let t = -u;
            Complex64::new(atom.poly_eval(t) * residual.eval(t), 0.0) * phase(t) * kernel_form.eval(t)
        };
        let l = quad::oscillatory_ray(&mut neg_ray, t0, -omega, &part_cfg, 512);
        value += r.value + l.value;
        error += r.error + l.error;
        evals += r.evals + l.evals;
        resabs += r.resabs + l.resabs;
        converged = converged && at_floor(&r) && at_floor(&l);
    }

    Ok(QuadOutcome {
        value,
        error,
        evals,
        converged,
        resabs,
    })
}

/// Integrate a density atom (weight included) against a kernel descriptor.
///
/// The returned error estimate satisfies
/// `error <= target_abs + target_rel * |value|`; otherwise the call fails
/// with `QuadratureFailure`.
pub fn integrate_density(
    atom: &DensityAtom,
    kernel: &KernelDescriptor,
    cfg: &QuadConfig,
) -> Result<(Complex64, f64)> {
    atom.validate()?;
    check_margin(atom, &kernel.form)?;
    let (value, error) = integrate_density_unit(atom, kernel, cfg)?;
    let value = value * atom.weight;
    let error = error * atom.weight.norm();
    let allowed = cfg.target_abs + cfg.target_rel * value.norm();
    if error > allowed {
        return Err(Error::QuadratureFailure {
            context: "error estimate exceeds the integrate_density contract".into(),
            estimate: error,
            target: allowed,
            evals: 0,
        });
    }
    Ok((value, error))
}

/// Unit-weight version used by the pairing loops.
fn integrate_density_unit(
    atom: &DensityAtom,
    kernel: &KernelDescriptor,
    cfg: &QuadConfig,
) -> Result<(Complex64, f64)> {
    let (components, residual) = split_base(atom.base);
    let n = components.len() as f64;
    let comp_cfg = QuadConfig {
        target_rel: cfg.target_rel / 2.0,
        target_abs: cfg.target_abs / (2.0 * n),
        max_evals: cfg.max_evals / components.len(),
    };
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evals = 0;
    for comp in &components {
        let omega = kernel.modulation + atom.modulation + comp.extra_freq;
        let out = integrate_component(atom, residual, omega, &kernel.form, &comp_cfg)?;
        if !out.converged {
            return Err(Error::QuadratureFailure {
                context: format!("density pairing did not converge (base {:?})", atom.base),
                estimate: out.error,
                target: comp_cfg.threshold(out.value.norm()),
                evals: out.evals,
            });
        }
        value += comp.coeff * out.value;
        error += comp.coeff.norm() * out.error;
        evals += out.evals;
    }
    let _ = evals;
    Ok((value, error))
}

/// Integrability margin for polynomially growing densities against the
/// Cauchy kernel: `power - growth_degree >= 3`.
fn check_margin(atom: &DensityAtom, kernel: &KernelForm) -> Result<()> {
    if !matches!(atom.base.decay(), DecayClass::None) {
        return Ok(());
    }
    match kernel {
        KernelForm::CauchyPower { power, .. } => {
            if *power < atom.growth_degree + 3 {
                return Err(Error::InsufficientPower {
                    power: *power,
                    growth_degree: atom.growth_degree,
                    margin: 3,
                });
            }
        }
        KernelForm::Poisson { .. } => {
            if atom.growth_degree > 0 {
                return Err(Error::InsufficientPower {
                    power: 2,
                    growth_degree: atom.growth_degree,
                    margin: 2,
                });
            }
        }
        KernelForm::Mixture(_) => {}
    }
    Ok(())
}

/// Rising factorial `q (q+1) ... (q+j-1)`.
fn rising(q: u32, j: u32) -> f64 {
    (0..j).map(|i| (q + i) as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut b = 1.0f64;
    for i in 0..k {
        b *= (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// Closed-form Dirac pairing against the modulated Cauchy kernel, unit
/// weight: `(-1)^k d^k/dt^k [ e^{i alpha t} (z-t)^{-q} ]` at `t = c`,
/// by the Leibniz rule (each t-derivative of `(z-t)^{-q}` raises the power).
fn dirac_pair_cauchy(atom: &DiracAtom, a: f64, z: Complex64, power: u32) -> Complex64 {
    let alpha = a + atom.modulation;
    let c = atom.location;
    let k = atom.derivative_order;
    let phase = Complex64::from_polar(1.0, alpha * c);
    let base_inv = (z - c).inv();
    let mut kernel_pow = base_inv.powi(power as i32);
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..=k {
        // j-th kernel derivative: rising(q, j) (z-c)^{-(q+j)}
        let trig = Complex64::new(0.0, alpha).powu(k - j);
        sum += binomial(k, j) * trig * rising(power, j) * kernel_pow;
        kernel_pow *= base_inv;
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * phase * sum
}

/// Closed-form Dirac pairing against a Gaussian mixture, unit weight:
/// `(-1)^k d^k/dt^k [ e^{i alpha t} psi(t) ]` at `t = c`.
fn dirac_pair_mixture(atom: &DiracAtom, psi: &GaussianMixture) -> Complex64 {
    let alpha = atom.modulation;
    let c = atom.location;
    let k = atom.derivative_order;
    let phase = Complex64::from_polar(1.0, alpha * c);
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..=k {
        let trig = Complex64::new(0.0, alpha).powu(k - j);
        sum += binomial(k, j) * trig * psi.derivative_at(c, j);
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * phase * sum
}

/// The pairing `(e^{iat} F_t, (z - t)^{-power})`, without the `i/pi`
/// prefactor. Dirac atoms are evaluated in closed form, densities by
/// adaptive quadrature.
pub fn pair_cauchy_kernel(
    dist: &Distribution,
    a: f64,
    z: Complex64,
    power: u32,
    cfg: &QuadConfig,
) -> Result<Pairing> {
    if z.im == 0.0 {
        return Err(Error::PoleOnAxis { re: z.re, im: z.im });
    }
    if power == 0 {
        return Err(Error::InvalidConfig {
            reason: "kernel power must be at least 1".into(),
        });
    }
    let kernel = KernelDescriptor {
        form: KernelForm::CauchyPower { z, power },
        modulation: a,
    };
    pair_with_kernel(dist, &kernel, cfg)
}

/// The pairing `(F, phi * phi^star)` for a Gaussian-mixture test function.
pub fn pair_test_function(
    dist: &Distribution,
    phi: &TestFunction,
    cfg: &QuadConfig,
) -> Result<Pairing> {
    let psi = phi.autocorrelation();
    let kernel = KernelDescriptor {
        form: KernelForm::Mixture(psi),
        modulation: 0.0,
    };
    pair_with_kernel(dist, &kernel, cfg)
}

/// Shared pairing loop: unit atom values combined with true weights for the
/// value and absolute weights for the companion.
pub(crate) fn pair_with_kernel(
    dist: &Distribution,
    kernel: &KernelDescriptor,
    cfg: &QuadConfig,
) -> Result<Pairing> {
    for atom in dist.atoms() {
        if let Atom::Density(d) = atom {
            check_margin(d, &kernel.form)?;
        }
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut companion = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for atom in dist.atoms() {
        let (unit, err) = match (atom, &kernel.form) {
            (Atom::Dirac(d), KernelForm::CauchyPower { z, power }) => {
                (dirac_pair_cauchy(d, kernel.modulation, *z, *power), 0.0)
            }
            (Atom::Dirac(d), KernelForm::Mixture(psi)) => (dirac_pair_mixture(d, psi), 0.0),
            (Atom::Dirac(_), KernelForm::Poisson { .. }) => {
                return Err(Error::UnsupportedDistribution {
                    reason: "Poisson transform requires density atoms only".into(),
                })
            }
            (Atom::Density(d), _) => integrate_density_unit(d, kernel, cfg)?,
        };
        let w = atom.weight();
        value += w * unit;
        companion += w.norm() * unit;
        error += w.norm() * err;
    }
    Ok(Pairing {
        value,
        companion,
        error,
    })
}
