//! Complete/absolute monotonicity testers over exact axis derivatives, plus
//! the classical alternating forward-difference test for sampled functions.
//!
//! Sign testing works on the factorial-free core pairing: the positive
//! constant `(2n+s)!/((2n)! pi)` in the exact derivative formula never flips
//! a sign, so thresholds stay well conditioned across derivative orders.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_complex;

/// Evaluation grid on a half-axis, always described by positive endpoints;
/// the absolute-monotonicity sweep mirrors it to negative `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub y_min: f64,
    pub y_max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            y_min: 1e-2,
            y_max: 1e2,
            count: 25,
            spacing: Spacing::Log,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.y_min > 0.0 && self.y_max > self.y_min && self.count >= 2) {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "grid requires 0 < y_min < y_max and count >= 2, got [{}, {}] x {}",
                    self.y_min, self.y_max, self.count
                ),
            });
        }
        Ok(())
    }

    /// Grid points on the positive half-axis, ascending.
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        match self.spacing {
            Spacing::Linear => (0..n)
                .map(|i| {
                    self.y_min + (self.y_max - self.y_min) * i as f64 / (n - 1) as f64
                })
                .collect(),
            Spacing::Log => {
                let (lo, hi) = (self.y_min.ln(), self.y_max.ln());
                (0..n)
                    .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
                    .collect()
            }
        }
    }
}

/// Verdict thresholds: `theta = abs + rel * scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-7,
            abs: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        if self.rel < 0.0 || self.abs < 0.0 || (self.rel == 0.0 && self.abs == 0.0) {
            return Err(Error::InvalidConfig {
                reason: "tolerance components must be nonnegative and not both zero".into(),
            });
        }
        Ok(())
    }

    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneStatus {
    Pass,
    Fail,
    Inconclusive,
}

/// A point where the tested inequality is violated beyond threshold. The
/// stored value is the sign-folded quantity actually tested, so a witness
/// always shows `Re(value) < -threshold` or `|Im(value)| > threshold`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Witness {
    pub y: f64,
    pub s: u32,
    #[serde(with = "serde_complex")]
    pub value: Complex64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneVerdict {
    pub status: MonotoneStatus,
    pub witnesses: Vec<Witness>,
    pub grid: GridSpec,
    pub s_max: u32,
    /// Grid points whose evaluation failed outright; any entry here keeps a
    /// witness-free sweep from passing.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

/// One evaluated test point handed to the verdict logic.
#[derive(Debug, Clone, Copy)]
pub struct AxisEval {
    /// Factorial-free core pairing value.
    pub core: Complex64,
    /// Magnitude reference for the relative threshold.
    pub scale: f64,
    /// Numerical error estimate on `core`.
    pub error: f64,
}

/// Source of axis evaluations for the monotonicity sweeps.
pub trait AxisProvider {
    fn eval(&self, y: f64, s: u32) -> Result<AxisEval>;
}

impl<F: Fn(f64, u32) -> Result<AxisEval>> AxisProvider for F {
    fn eval(&self, y: f64, s: u32) -> Result<AxisEval> {
        self(y, s)
    }
}

// Shared sweep. `sign(s)` folds the tested quantity so that the required
// inequality is always `Re(sign * core) >= -theta` and `|Im| <= theta`.
// A point whose evaluation errors out is recorded and treated like an
// undecidable point: it can downgrade a pass to inconclusive but never
// erases sound witnesses found elsewhere.
fn monotone_sweep<P: AxisProvider>(
    provider: &P,
    ys: &[f64],
    s_max: u32,
    tol: &Tolerance,
    grid: GridSpec,
    sign: impl Fn(u32) -> f64,
) -> Result<MonotoneVerdict> {
    let mut witnesses = Vec::new();
    let mut diagnostics = Vec::new();
    let mut questionable = false;
    for &y in ys {
        for s in 0..=s_max {
            let e = match provider.eval(y, s) {
                Ok(e) => e,
                Err(err) => {
                    diagnostics.push(format!("y={y:.6e} s={s}: {err}"));
                    continue;
                }
            };
            let theta = tol.threshold(e.scale);
            let tested = sign(s) * e.core;
            let re_violated = tested.re < -theta;
            let im_violated = tested.im.abs() > theta;
            if re_violated || im_violated {
                // Sound negative verdicts require the numerical error to be
                // dominated by the threshold.
                if e.error <= 0.5 * theta {
                    witnesses.push(Witness {
                        y,
                        s,
                        value: tested,
                        threshold: theta,
                    });
                } else {
                    questionable = true;
                }
            } else {
                // Error interval overlapping a threshold leaves the point
                // undecided.
                if tested.re - e.error < -theta || tested.im.abs() + e.error > theta {
                    questionable = true;
                }
            }
        }
    }
    let status = if !witnesses.is_empty() {
        MonotoneStatus::Fail
    } else if questionable || !diagnostics.is_empty() {
        MonotoneStatus::Inconclusive
    } else {
        MonotoneStatus::Pass
    };
    witnesses.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.s.cmp(&b.s)));
    Ok(MonotoneVerdict {
        status,
        witnesses,
        grid,
        s_max,
        diagnostics,
    })
}

/// Complete monotonicity on (0, inf): for every grid `y > 0` and `s <= s_max`
/// the folded core `(-1)^s D(y, s)` reduces to `+core`, which must be real
/// and nonnegative within threshold.
pub fn cm_exact<P: AxisProvider>(
    provider: &P,
    grid: &GridSpec,
    s_max: u32,
    tol: &Tolerance,
) -> Result<MonotoneVerdict> {
    grid.validate()?;
    tol.validate()?;
    let ys = grid.points();
    monotone_sweep(provider, &ys, s_max, tol, *grid, |_| 1.0)
}

/// Absolute monotonicity of `-F~` on (-inf, 0): every derivative of `-F~`
/// must be nonnegative, i.e. `-D(y, s) >= 0`, which folds to
/// `(-1)^{s+1} core >= 0` on the mirrored grid.
pub fn am_exact<P: AxisProvider>(
    provider: &P,
    grid: &GridSpec,
    s_max: u32,
    tol: &Tolerance,
) -> Result<MonotoneVerdict> {
    grid.validate()?;
    tol.validate()?;
    let ys: Vec<f64> = grid.points().into_iter().map(|y| -y).collect();
    monotone_sweep(provider, &ys, s_max, tol, *grid, |s| {
        if s % 2 == 0 {
            -1.0
        } else {
            1.0
        }
    })
}

/// Alternating forward-difference test on uniform samples:
/// `(-1)^k Delta_h^k f(y_i) >= -theta` for all admissible `i` and `k <= k_max`.
pub fn cm_finite_diff(
    samples: &[(f64, f64)],
    k_max: u32,
    tol: &Tolerance,
) -> Result<MonotoneVerdict> {
    tol.validate()?;
    if samples.len() < k_max as usize + 1 {
        return Err(Error::InvalidConfig {
            reason: format!(
                "need at least k_max + 1 = {} samples, got {}",
                k_max + 1,
                samples.len()
            ),
        });
    }
    let h = samples[1].0 - samples[0].0;
    for w in samples.windows(2) {
        let step = w[1].0 - w[0].0;
        if (step - h).abs() > 1e-9 * h.abs().max(1.0) {
            return Err(Error::NonUniformGrid {
                expected: h,
                found: step,
            });
        }
    }
    let scale = samples
        .iter()
        .map(|&(_, f)| f.abs())
        .fold(0.0f64, f64::max);
    let theta = tol.threshold(scale);

    let mut witnesses = Vec::new();
    // Difference table: row k holds Delta^k f at each admissible index.
    let mut row: Vec<f64> = samples.iter().map(|&(_, f)| f).collect();
    for k in 1..=k_max {
        for i in 0..row.len() - 1 {
            row[i] = row[i + 1] - row[i];
        }
        row.pop();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for (i, &d) in row.iter().enumerate() {
            let tested = sign * d;
            if tested < -theta {
                witnesses.push(Witness {
                    y: samples[i].0,
                    s: k,
                    value: Complex64::new(tested, 0.0),
                    threshold: theta,
                });
            }
        }
    }
    let status = if witnesses.is_empty() {
        MonotoneStatus::Pass
    } else {
        MonotoneStatus::Fail
    };
    witnesses.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.s.cmp(&b.s)));
    Ok(MonotoneVerdict {
        status,
        witnesses,
        grid: GridSpec {
            y_min: samples[0].0.max(f64::MIN_POSITIVE),
            y_max: samples[samples.len() - 1].0,
            count: samples.len(),
            spacing: Spacing::Linear,
        },
        s_max: k_max,
        diagnostics: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn exact(core: Complex64, scale: f64) -> Result<AxisEval> {
        Ok(AxisEval {
            core,
            scale,
            error: 0.0,
        })
    }

    // delta_0 with n = 0: core(y, s) = 1/y^{s+1}; CM-positive on y > 0 and
    // AM-positive on y < 0 after folding.
    fn dirac_core(y: f64, s: u32) -> Result<AxisEval> {
        let v = y.powi(-(s as i32) - 1);
        exact(Complex64::new(v, 0.0), v.abs())
    }

    #[test]
    fn dirac_passes_both_sweeps() {
        let grid = GridSpec::default();
        let tol = Tolerance::default();
        let cm = cm_exact(&dirac_core, &grid, 8, &tol).unwrap();
        assert_eq!(cm.status, MonotoneStatus::Pass);
        assert!(cm.witnesses.is_empty());
        let am = am_exact(&dirac_core, &grid, 8, &tol).unwrap();
        assert_eq!(am.status, MonotoneStatus::Pass);
    }

    #[test]
    fn zero_distribution_passes() {
        let zero = |_: f64, _: u32| exact(Complex64::new(0.0, 0.0), 0.0);
        let grid = GridSpec::default();
        let tol = Tolerance::default();
        assert_eq!(
            cm_exact(&zero, &grid, 8, &tol).unwrap().status,
            MonotoneStatus::Pass
        );
        assert_eq!(
            am_exact(&zero, &grid, 8, &tol).unwrap().status,
            MonotoneStatus::Pass
        );
    }

    #[test]
    fn negative_dirac_fails_both() {
        let neg = |y: f64, s: u32| {
            let v = -y.powi(-(s as i32) - 1);
            exact(Complex64::new(v, 0.0), v.abs())
        };
        let grid = GridSpec::default();
        let tol = Tolerance::default();
        let cm = cm_exact(&neg, &grid, 4, &tol).unwrap();
        assert_eq!(cm.status, MonotoneStatus::Fail);
        assert!(cm
            .witnesses
            .iter()
            .all(|w| w.value.re < -w.threshold || w.value.im.abs() > w.threshold));
        // s = 0 at the grid head must be among the witnesses
        assert!(cm.witnesses.iter().any(|w| w.s == 0 && w.y < 0.02));
        let am = am_exact(&neg, &grid, 4, &tol).unwrap();
        assert_eq!(am.status, MonotoneStatus::Fail);
        assert!(am.witnesses.iter().any(|w| w.s == 0));
    }

    #[test]
    fn imaginary_leak_is_decisive() {
        let leaky = |y: f64, _: u32| {
            exact(
                Complex64::new(1.0 / y.abs(), 0.37 / y.abs()),
                1.0 / y.abs(),
            )
        };
        let grid = GridSpec::default();
        let tol = Tolerance::default();
        let cm = cm_exact(&leaky, &grid, 2, &tol).unwrap();
        assert_eq!(cm.status, MonotoneStatus::Fail);
        assert!(cm.witnesses.iter().all(|w| w.value.im.abs() > w.threshold));
    }

    #[test]
    fn large_error_estimates_yield_inconclusive() {
        let noisy = |y: f64, _: u32| {
            Ok(AxisEval {
                core: Complex64::new(-1.0 / y, 0.0),
                scale: 1.0 / y,
                error: 1.0 / y, // violation present but unsound
            })
        };
        let grid = GridSpec::default();
        let tol = Tolerance::default();
        let v = cm_exact(&noisy, &grid, 1, &tol).unwrap();
        assert_eq!(v.status, MonotoneStatus::Inconclusive);
    }

    #[test]
    fn positive_scaling_invariance_rel_only() {
        let tol = Tolerance {
            rel: 1e-7,
            abs: 0.0,
        };
        let grid = GridSpec::default();
        let base = |y: f64, s: u32| {
            let v = if s == 0 { -1.0 / y } else { 1.0 / y };
            exact(Complex64::new(v, 0.0), 1.0 / y)
        };
        let scaled = |y: f64, s: u32| {
            let v = if s == 0 { -1.0 / y } else { 1.0 / y };
            exact(Complex64::new(737.0 * v, 0.0), 737.0 / y)
        };
        let v1 = cm_exact(&base, &grid, 3, &tol).unwrap();
        let v2 = cm_exact(&scaled, &grid, 3, &tol).unwrap();
        assert_eq!(v1.status, v2.status);
        let k1: Vec<(f64, u32)> = v1.witnesses.iter().map(|w| (w.y, w.s)).collect();
        let k2: Vec<(f64, u32)> = v2.witnesses.iter().map(|w| (w.y, w.s)).collect();
        assert_eq!(k1, k2);
    }

    #[test]
    fn finite_diff_exponential_passes() {
        let samples: Vec<(f64, f64)> = (0..40).map(|i| {
            let y = 0.1 + 0.1 * i as f64;
            (y, (-y).exp())
        }).collect();
        let v = cm_finite_diff(&samples, 6, &Tolerance::default()).unwrap();
        assert_eq!(v.status, MonotoneStatus::Pass);
    }

    #[test]
    fn finite_diff_linear_fails_at_k1() {
        let samples: Vec<(f64, f64)> = (0..20).map(|i| {
            let y = 0.1 + 0.1 * i as f64;
            (y, y)
        }).collect();
        let v = cm_finite_diff(&samples, 3, &Tolerance::default()).unwrap();
        assert_eq!(v.status, MonotoneStatus::Fail);
        assert!(v.witnesses.iter().any(|w| w.s == 1));
    }

    #[test]
    fn finite_diff_reciprocal_passes() {
        let samples: Vec<(f64, f64)> = (0..60).map(|i| {
            let y = 0.05 * (i + 1) as f64;
            (y, 1.0 / (1.0 + y))
        }).collect();
        let v = cm_finite_diff(&samples, 6, &Tolerance::default()).unwrap();
        assert_eq!(v.status, MonotoneStatus::Pass);
    }

    #[test]
    fn finite_diff_rejects_nonuniform() {
        let samples = vec![(0.1, 1.0), (0.2, 0.9), (0.4, 0.8)];
        assert!(matches!(
            cm_finite_diff(&samples, 1, &Tolerance::default()),
            Err(Error::NonUniformGrid { .. })
        ));
    }

    #[test]
    fn sine_core_fails_via_imaginary_part() {
        // core for the sine density at a = 0 is -i pi e^{-y} i^q-rotated; the
        // dominant feature is a persistent imaginary part at small y.
        let sine = |y: f64, s: u32| {
            let q = 3 + s; // n = 1
            let fact: f64 = (1..q).map(|i| i as f64).product();
            let v = Complex64::new(0.0, -PI * (-y.abs()).exp() / fact);
            exact(v, v.norm())
        };
        let grid = GridSpec::default();
        let tol = Tolerance::default();
        let cm = cm_exact(&sine, &grid, 4, &tol).unwrap();
        assert_eq!(cm.status, MonotoneStatus::Fail);
    }

    #[test]
    fn refinement_keeps_failures() {
        let neg = |y: f64, s: u32| {
            let v = -y.powi(-(s as i32) - 1);
            exact(Complex64::new(v, 0.0), v.abs())
        };
        let tol = Tolerance::default();
        let coarse = GridSpec {
            count: 5,
            ..GridSpec::default()
        };
        let fine = GridSpec {
            count: 50,
            ..GridSpec::default()
        };
        let v_coarse = cm_exact(&neg, &coarse, 2, &tol).unwrap();
        let v_fine = cm_exact(&neg, &fine, 6, &tol).unwrap();
        assert_eq!(v_coarse.status, MonotoneStatus::Fail);
        assert_eq!(v_fine.status, MonotoneStatus::Fail);
        assert!(v_fine.witnesses.len() >= v_coarse.witnesses.len());
    }
}
