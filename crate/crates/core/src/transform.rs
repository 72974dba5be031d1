//! The generalized Cauchy transform, its exact imaginary-axis derivatives,
//! the Cauchy smoothing of compactly supported densities, a Plemelj-type
//! boundary-limit residual, and the Poisson transform on the imaginary axis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distribution::{
    pair_cauchy_kernel, pair_with_kernel, Atom, DecayClass, DensityAtom, Distribution,
    KernelDescriptor, KernelForm, Pairing,
};
use crate::error::{Error, Result};
use crate::quad::{self, QuadConfig};

/// Parameters of the two-modulation transform family: the half-order `n`
/// (`2n` must dominate the S'-order bound of the distribution) and the two
/// distinct modulation frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyParams {
    n: u32,
    a1: f64,
    a2: f64,
}

impl CauchyParams {
    pub fn new(n: u32, a1: f64, a2: f64) -> Result<Self> {
        if !(a1.is_finite() && a2.is_finite()) || a1 == a2 {
            return Err(Error::InvalidConfig {
                reason: format!("modulations must be finite and distinct, got ({a1}, {a2})"),
            });
        }
        Ok(CauchyParams { n, a1, a2 })
    }

    /// Auto-select `n = ceil(order_bound / 2)`.
    pub fn for_distribution(dist: &Distribution, a1: f64, a2: f64) -> Result<Self> {
        let m = dist.order_bound();
        Self::new(m.div_ceil(2), a1, a2)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn modulation(&self, j: u8) -> Result<f64> {
        match j {
            1 => Ok(self.a1),
            2 => Ok(self.a2),
            _ => Err(Error::InvalidConfig {
                reason: format!("modulation index must be 1 or 2, got {j}"),
            }),
        }
    }

    /// Check `2n >= order_bound(F)`.
    pub fn validate_for(&self, dist: &Distribution) -> Result<()> {
        let m = dist.order_bound();
        if 2 * self.n < m {
            return Err(Error::InvalidConfig {
                reason: format!("2n = {} is below the order bound {m}", 2 * self.n),
            });
        }
        Ok(())
    }
}

/// One evaluated axis derivative `d^s/dy^s F_j(iy)` with its magnitude
/// reference and error estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AxisSample {
    pub modulation_index: u8,
    pub y: f64,
    pub s: u32,
    #[serde(with = "crate::serde_complex")]
    pub value: Complex64,
    /// Natural log of |value|; stays finite when `value` itself overflows
    /// (factorial ratios beyond 2n+s > 150 are carried in log space).
    pub ln_magnitude: f64,
    pub phase: f64,
    pub scale: f64,
    pub error: f64,
}

/// The factorial-free core pairing `(e^{ia_j t} F, (y + it)^{-(2n+s+1)})`
/// whose sign pattern drives the monotonicity tests.
#[derive(Debug, Clone, Copy)]
pub struct AxisCore {
    pub core: Complex64,
    pub companion: Complex64,
    pub error: f64,
}

impl AxisCore {
    pub fn scale(&self) -> f64 {
        self.companion.norm()
    }
}

/// Exact `i^q`.
fn i_pow(q: u32) -> Complex64 {
    match q % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `(2n+s)! / (2n)!` as a float; valid for `2n + s <= 150`.
fn factorial_ratio(two_n: u32, s: u32) -> f64 {
    (1..=s).map(|i| (two_n + i) as f64).product()
}

fn ln_factorial_ratio(two_n: u32, s: u32) -> f64 {
    (1..=s).map(|i| ((two_n + i) as f64).ln()).sum()
}

/// The transform `F_j(z) = (-1)^n (i/pi) (e^{i a_j t} F, (z-t)^{-(2n+1)})`.
pub fn cauchy_transform(
    dist: &Distribution,
    params: &CauchyParams,
    j: u8,
    z: Complex64,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    params.validate_for(dist)?;
    let a = params.modulation(j)?;
    let pairing = pair_cauchy_kernel(dist, a, z, 2 * params.n + 1, cfg)?;
    let sign = if params.n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * Complex64::new(0.0, 1.0) / std::f64::consts::PI * pairing.value)
}

/// Core pairing on the imaginary axis. Note `(y + it)^{-q} = i^q (iy - t)^{-q}`,
/// so the axis kernel is an exact rotation of the Cauchy kernel at `z = iy`.
pub fn axis_core(
    dist: &Distribution,
    params: &CauchyParams,
    j: u8,
    y: f64,
    s: u32,
    cfg: &QuadConfig,
) -> Result<AxisCore> {
    if y == 0.0 {
        return Err(Error::PoleOnAxis { re: 0.0, im: 0.0 });
    }
    params.validate_for(dist)?;
    let a = params.modulation(j)?;
    let q = 2 * params.n + s + 1;
    let rot = i_pow(q);
    let pairing = pair_cauchy_kernel(dist, a, Complex64::new(0.0, y), q, cfg)?;
    Ok(AxisCore {
        core: rot * pairing.value,
        companion: rot * pairing.companion,
        error: pairing.error,
    })
}

/// Full axis derivative per the exact differentiation identity:
/// `d^s/dy^s F_j(iy) = ((-1)^s / pi) ((2n+s)!/(2n)!) (e^{ia_j t} F, (y+it)^{-(2n+s+1)})`.
pub fn axis_derivative(
    dist: &Distribution,
    params: &CauchyParams,
    j: u8,
    y: f64,
    s: u32,
    cfg: &QuadConfig,
) -> Result<AxisSample> {
    let ac = axis_core(dist, params, j, y, s, cfg)?;
    Ok(axis_sample_from_core(params, j, y, s, &ac))
}

/// Scale a core pairing into the full derivative value; factored out so the
/// checker can derive samples from already computed cores.
pub fn axis_sample_from_core(
    params: &CauchyParams,
    j: u8,
    y: f64,
    s: u32,
    ac: &AxisCore,
) -> AxisSample {
    let pi = std::f64::consts::PI;
    let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
    let two_n = 2 * params.n;
    if two_n + s <= 150 {
        let fr = factorial_ratio(two_n, s);
        let value = sign / pi * fr * ac.core;
        AxisSample {
            modulation_index: j,
            y,
            s,
            value,
            ln_magnitude: value.norm().ln(),
            phase: value.arg(),
            scale: fr / pi * ac.scale(),
            error: fr / pi * ac.error,
        }
    } else {
        // Log-space route: the factorial ratio would overflow f64.
        let ln_fr = ln_factorial_ratio(two_n, s);
        let ln_mag = ln_fr - pi.ln() + ac.core.norm().ln();
        let mut phase = ac.core.arg();
        if sign < 0.0 {
            phase += pi;
            if phase > pi {
                phase -= 2.0 * pi;
            }
        }
        let value = Complex64::from_polar(ln_mag.exp(), phase);
        AxisSample {
            modulation_index: j,
            y,
            s,
            value,
            ln_magnitude: ln_mag,
            phase,
            scale: (ln_fr - pi.ln() + ac.scale().max(f64::MIN_POSITIVE).ln()).exp(),
            error: (ln_fr - pi.ln() + ac.error.max(f64::MIN_POSITIVE).ln()).exp(),
        }
    }
}

/// The Cauchy smoothing `u~(t, y) = (i/pi) int u(x) (x + iy - t)^{-(m+1)} dx`
/// of a compactly supported density atom.
pub fn cauchy_smooth(
    atom: &DensityAtom,
    m: u32,
    y: f64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    if y == 0.0 {
        return Err(Error::PoleOnAxis { re: t, im: 0.0 });
    }
    if !matches!(atom.base.decay(), DecayClass::Compact(_)) {
        return Err(Error::UnsupportedDistribution {
            reason: "cauchy_smooth requires a compactly supported base".into(),
        });
    }
    smoothed_derivative_atom(atom, m, y, t, 0, cfg)
}

/// `d^p/dt^p u~(t, y)` by exact kernel power raising:
/// each t-derivative multiplies by `(m+p)` and raises the kernel power.
fn smoothed_derivative_atom(
    atom: &DensityAtom,
    m: u32,
    y: f64,
    t: f64,
    p: u32,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    // (x + iy - t)^{-r} = (-1)^r ((t - iy) - x)^{-r}
    let r = m + p + 1;
    let z = Complex64::new(t, -y);
    let kernel = KernelDescriptor {
        form: KernelForm::CauchyPower { z, power: r },
        modulation: 0.0,
    };
    let (v, _err) = crate::distribution::integrate_density(atom, &kernel, cfg)?;
    let parity = if r % 2 == 0 { 1.0 } else { -1.0 };
    let fr = factorial_ratio(m, p);
    Ok(Complex64::new(0.0, 1.0) / std::f64::consts::PI * parity * fr * v)
}

/// The fixed smooth bump `exp(-1/(1-x^2))` on `(-1, 1)`, with closed-form
/// first and second derivatives.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmoothBump;

impl SmoothBump {
    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - x * x)).exp()
        }
    }

    /// Derivatives up to order 2: with g = 1/(1-x^2),
    /// u' = -2xg^2 u and u'' = (4x^2 g^4 - 2g^2 - 8x^2 g^3) u.
    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        if x.abs() >= 1.0 {
            return 0.0;
        }
        let g = 1.0 / (1.0 - x * x);
        let u = (-g).exp();
        match order {
            0 => u,
            1 => -2.0 * x * g * g * u,
            2 => (4.0 * x * x * g.powi(4) - 2.0 * g * g - 8.0 * x * x * g.powi(3)) * u,
            _ => panic!("bump derivatives implemented for order <= 2"),
        }
    }

    /// `u~(t, y)` derivative of order `p`, kernel power raised exactly.
    fn smoothed_derivative(
        &self,
        m: u32,
        y: f64,
        t: f64,
        p: u32,
        cfg: &QuadConfig,
    ) -> Result<Complex64> {
        let r = m + p + 1;
        let mut integrand = |x: f64| {
            Complex64::new(self.eval(x), 0.0) * (Complex64::new(x - t, y)).powi(-(r as i32))
        };
        let mut breaks = vec![-0.5, 0.0, 0.5];
        if t.abs() < 1.0 {
            breaks.push(t);
            breaks.push(t - y.abs());
            breaks.push(t + y.abs());
        }
        let out = quad::adaptive(&mut integrand, -1.0, 1.0, &breaks, cfg);
        if !out.converged {
            return Err(Error::QuadratureFailure {
                context: "bump smoothing integral did not converge".into(),
                estimate: out.error,
                target: cfg.threshold(out.value.norm()),
                evals: out.evals,
            });
        }
        let fr = factorial_ratio(m, p);
        Ok(Complex64::new(0.0, 1.0) / std::f64::consts::PI * fr * out.value)
    }
}

/// Max over the grid and derivative orders `p <= m` of the weighted Plemelj
/// defect `(1+|t|)^m |d^p/dt^p [ (u~(t,y) - u~(t,-y))/2 - u^{(m)}(t)/m! ]|`.
pub fn plemelj_residual(
    bump: &SmoothBump,
    m: u32,
    y: f64,
    t_grid: &[f64],
    cfg: &QuadConfig,
) -> Result<f64> {
    if m > 1 {
        return Err(Error::UnsupportedOrder { m });
    }
    if !(y > 0.0) {
        return Err(Error::InvalidConfig {
            reason: format!("plemelj_residual requires y > 0, got {y}"),
        });
    }
    let m_fact = 1.0; // m! = 1 for m in {0, 1}
    let mut worst = 0.0f64;
    for &t in t_grid {
        for p in 0..=m {
            let upper = bump.smoothed_derivative(m, y, t, p, cfg)?;
            let lower = bump.smoothed_derivative(m, -y, t, p, cfg)?;
            let jump = 0.5 * (upper - lower);
            let target = bump.derivative(t, m + p) / m_fact;
            let defect = (jump - target).norm();
            let weight = (1.0 + t.abs()).powi(m as i32);
            worst = worst.max(weight * defect);
        }
    }
    Ok(worst)
}

/// Default grid for the Plemelj suite: 401 uniform points on [-8, 8].
pub fn default_plemelj_grid() -> Vec<f64> {
    let n = 401;
    (0..n)
        .map(|i| -8.0 + 16.0 * i as f64 / (n - 1) as f64)
        .collect()
}

/// Poisson transform on the imaginary axis,
/// `u_f(0, y) = (1/pi) int y/(t^2 + y^2) f(t) dt`.
pub fn poisson_axis(dist: &Distribution, y: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::InvalidConfig {
            reason: format!("poisson_axis requires y > 0, got {y}"),
        });
    }
    if dist.has_dirac() {
        return Err(Error::UnsupportedDistribution {
            reason: "Poisson transform requires density atoms only".into(),
        });
    }
    for atom in dist.atoms() {
        if let Atom::Density(d) = atom {
            if !d.is_real_even() {
                return Err(Error::UnsupportedDistribution {
                    reason: "Poisson transform requires real even atoms".into(),
                });
            }
            if !d.is_bounded() {
                return Err(Error::UnsupportedDistribution {
                    reason: "Poisson transform requires bounded atoms".into(),
                });
            }
        }
    }
    let kernel = KernelDescriptor {
        form: KernelForm::Poisson { y },
        modulation: 0.0,
    };
    let p: Pairing = pair_with_kernel(dist, &kernel, cfg)?;
    if p.value.im.abs() > 1e-12 * p.scale().max(1.0) {
        return Err(Error::QuadratureFailure {
            context: "Poisson transform produced a non-negligible imaginary part".into(),
            estimate: p.value.im.abs(),
            target: 1e-12,
            evals: 0,
        });
    }
    Ok(p.value.re)
}

/// Relative defect of the Laplace-kernel identity
/// `int_0^inf x^q e^{-yx} e^{-ixt} dx = q!/(y+it)^{q+1}` for `y > 0`, and of
/// its negative-axis counterpart
/// `int_{-inf}^0 x^q e^{-yx} e^{-ixt} dx = -q!/(y+it)^{q+1}` for `y < 0`,
/// with the left side evaluated by adaptive quadrature.
pub fn laplace_kernel_identity_residual(q: u32, y: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
    if y == 0.0 {
        return Err(Error::InvalidConfig {
            reason: "kernel identity needs y != 0".into(),
        });
    }
    let rate = y.abs();
    // Truncate where the Gamma tail bound drops below the absolute target.
    let mut upper = 16.0 / rate * (q as f64 + 1.0);
    let mut guard = 0;
    while quad::exp_tail(q, rate, upper) > cfg.target_abs / 10.0 {
        upper *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::QuadratureFailure {
                context: "kernel identity tail bound stalled".into(),
                estimate: quad::exp_tail(q, rate, upper),
                target: cfg.target_abs / 10.0,
                evals: 0,
            });
        }
    }
    let q_fact: f64 = (1..=q).map(|i| i as f64).product();
    let denom = Complex64::new(y, t).powi(q as i32 + 1);
    let closed = if y > 0.0 {
        q_fact / denom
    } else {
        -q_fact / denom
    };

    // The integrand mass is q!/|y|^{q+1}, possibly orders of magnitude above
    // |closed| through oscillatory cancellation. The error estimator cannot
    // report below ~50 eps times that mass, so the absolute target sits just
    // above this floor; the actual defect stays near eps * mass.
    let mass = q_fact / rate.powi(q as i32 + 1);
    let run_cfg = QuadConfig {
        target_rel: cfg.target_rel.max(1e-10),
        target_abs: cfg
            .target_abs
            .max(1e-9 * closed.norm())
            .max(150.0 * f64::EPSILON * mass),
        max_evals: cfg.max_evals,
    };
    let mut integrand = |x: f64| {
        Complex64::new(x.powi(q as i32) * (-y * x).exp(), 0.0)
            * Complex64::from_polar(1.0, -x * t)
    };
    let (lo, hi) = if y > 0.0 { (0.0, upper) } else { (-upper, 0.0) };
    let out = quad::adaptive(&mut integrand, lo, hi, &[], &run_cfg);
    if !out.converged {
        return Err(Error::QuadratureFailure {
            context: "kernel identity quadrature did not converge".into(),
            estimate: out.error,
            target: run_cfg.threshold(out.value.norm()),
            evals: out.evals,
        });
    }
    Ok((out.value - closed).norm() / closed.norm())
}

/// Nested vs iterated evaluation of the smoothing interchange identity
/// `(F, u~(., y)) = (i/pi) int (F_t, (x+iy-t)^{-(m+1)}) u(x) dx`.
/// Returns (nested, iterated).
pub fn interchange_pair(
    smoothing: &DensityAtom,
    dist: &Distribution,
    m: u32,
    y: f64,
    cfg: &QuadConfig,
) -> Result<(Complex64, Complex64)> {
    let support = match smoothing.base.decay() {
        DecayClass::Compact(a) => a,
        _ => {
            return Err(Error::UnsupportedDistribution {
                reason: "interchange suite requires a compactly supported smoothing atom".into(),
            })
        }
    };

    // Nested: pair F with the function t -> u~(t, y).
    let outer_cfg = QuadConfig {
        target_rel: cfg.target_rel.max(1e-9),
        target_abs: cfg.target_abs.max(1e-11),
        max_evals: cfg.max_evals,
    };
    let inner_cfg = QuadConfig {
        target_rel: 1e-11,
        target_abs: 1e-13,
        max_evals: 60_000,
    };
    let mut nested = Complex64::new(0.0, 0.0);
    for atom in dist.atoms() {
        match atom {
            Atom::Dirac(d) => {
                if d.derivative_order > 0 || d.modulation != 0.0 {
                    return Err(Error::UnsupportedDistribution {
                        reason: "interchange suite supports plain Dirac atoms only".into(),
                    });
                }
                nested += d.weight * cauchy_smooth(smoothing, m, y, d.location, &inner_cfg)?;
            }
            Atom::Density(d) => {
                let reach = match d.base.decay() {
                    DecayClass::Compact(a) => a,
                    DecayClass::Gaussian(sigma) => 10.0 * sigma,
                    DecayClass::Exponential(lambda) => 42.0 / lambda,
                    DecayClass::None => {
                        return Err(Error::UnsupportedDistribution {
                            reason: "interchange suite requires decaying density atoms".into(),
                        })
                    }
                };
                let half = reach + support + 2.0;
                let mut integrand = |t: f64| -> Complex64 {
                    let smooth = cauchy_smooth(smoothing, m, y, t, &inner_cfg)
                        .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                    d.value_at(t) * smooth
                };
                let out = quad::adaptive(&mut integrand, -half, half, &[0.0], &outer_cfg);
                if !out.converged {
                    return Err(Error::QuadratureFailure {
                        context: "nested interchange integral did not converge".into(),
                        estimate: out.error,
                        target: outer_cfg.threshold(out.value.norm()),
                        evals: out.evals,
                    });
                }
                nested += out.value;
            }
        }
    }

    // Iterated: outer integral in x over the smoothing support, inner pairing
    // of F against the Cauchy kernel at z = x + iy.
    let mut iterated_integrand = |x: f64| -> Complex64 {
        let z = Complex64::new(x, y);
        let inner = pair_cauchy_kernel(dist, 0.0, z, m + 1, &inner_cfg)
            .map(|p| p.value)
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        smoothing.value_at(x) * inner
    };
    let out = quad::adaptive(
        &mut iterated_integrand,
        -support,
        support,
        &[0.0],
        &outer_cfg,
    );
    if !out.converged || !out.value.re.is_finite() {
        return Err(Error::QuadratureFailure {
            context: "iterated interchange integral did not converge".into(),
            estimate: out.error,
            target: outer_cfg.threshold(out.value.norm()),
            evals: out.evals,
        });
    }
    let iterated = Complex64::new(0.0, 1.0) / std::f64::consts::PI * out.value;
    Ok((nested, iterated))
}

/// Discrete Cauchy-Riemann defect of the transform at `z` on a 5-point
/// stencil: the two difference quotients of an analytic function must agree.
/// Returns `(residual, |value at z|)`.
pub fn analyticity_residual(
    dist: &Distribution,
    params: &CauchyParams,
    j: u8,
    z: Complex64,
    h: f64,
    cfg: &QuadConfig,
) -> Result<(f64, f64)> {
    let f = |zz: Complex64| cauchy_transform(dist, params, j, zz, cfg);
    let center = f(z)?;
    let dx = (f(z + h)? - f(z - h)?) / (2.0 * h);
    let dy = (f(z + Complex64::new(0.0, h))? - f(z - Complex64::new(0.0, h))?)
        / Complex64::new(0.0, 2.0 * h);
    Ok(((dx - dy).norm(), center.norm()))
}
