//! End-to-end verdict pipelines: the two-modulation monotonicity checker,
//! the characteristic-function test over the Poisson axis, and
//! cross-validation against the independent oracles.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::monotone::{
    am_exact, cm_exact, cm_finite_diff, AxisEval, GridSpec, MonotoneStatus, MonotoneVerdict,
    Tolerance,
};
use crate::oracle::{fourier_truth, quadratic_form_truth, GroundTruth, PdVerdict};
use crate::quad::QuadConfig;
use crate::transform::{axis_core, poisson_axis, AxisSample, CauchyParams};

/// Checker configuration. `n = None` selects the certified order bound
/// automatically (`n = ceil(order_bound / 2)`); an explicit `n` may
/// overshoot the bound but never undershoot it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    pub a1: f64,
    pub a2: f64,
    pub n: Option<u32>,
    pub grid: GridSpec,
    pub s_max: u32,
    pub tol: Tolerance,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            a1: 0.0,
            a2: 1.0,
            n: None,
            grid: GridSpec::default(),
            s_max: 8,
            tol: Tolerance::default(),
        }
    }
}

impl CheckConfig {
    pub fn params_for(&self, dist: &Distribution) -> Result<CauchyParams> {
        self.grid.validate()?;
        self.tol.validate()?;
        let params = match self.n {
            Some(n) => CauchyParams::new(n, self.a1, self.a2)?,
            None => CauchyParams::for_distribution(dist, self.a1, self.a2)?,
        };
        params.validate_for(dist)?;
        Ok(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisSide {
    Positive,
    Negative,
}

/// One of the monotonicity sub-verdicts (modulation j, axis side). A failed
/// evaluation leaves `verdict` empty and records the error text.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubVerdict {
    pub modulation_index: u8,
    pub axis: AxisSide,
    pub verdict: Option<MonotoneVerdict>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overall {
    NotPd,
    ConsistentPd,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    Theorem13,
    Theorem12,
}

/// Aggregated report: configuration echo, sub-verdicts, overall verdict and
/// the raw axis samples for export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub mode: CheckMode,
    pub config: CheckConfig,
    pub resolved_n: u32,
    pub sub_verdicts: Vec<SubVerdict>,
    pub overall: Overall,
    pub samples: Vec<AxisSample>,
    pub diagnostics: Vec<String>,
}

/// Overall verdict from sub-verdict statuses: any failure is decisive, all
/// passes are consistent, anything else (including evaluation errors) is
/// inconclusive.
pub fn aggregate(statuses: &[Option<MonotoneStatus>]) -> Overall {
    if statuses
        .iter()
        .any(|s| matches!(s, Some(MonotoneStatus::Fail)))
    {
        Overall::NotPd
    } else if !statuses.is_empty()
        && statuses
            .iter()
            .all(|s| matches!(s, Some(MonotoneStatus::Pass)))
    {
        Overall::ConsistentPd
    } else {
        Overall::Inconclusive
    }
}

// Key for the precomputed sample cache; y is keyed by its exact bits.
fn key(j: u8, y: f64, s: u32) -> (u8, u64, u32) {
    (j, y.to_bits(), s)
}

/// Run the full two-modulation monotonicity checker: complete monotonicity
/// of the transform on the positive imaginary axis and absolute
/// monotonicity of its negation on the negative axis, for both modulations.
pub fn check_theorem13(
    dist: &Distribution,
    config: &CheckConfig,
    quad: &QuadConfig,
) -> Result<CheckReport> {
    let params = config.params_for(dist)?;
    let ys_pos = config.grid.points();
    let mut tasks: Vec<(u8, f64, u32)> = Vec::new();
    for j in [1u8, 2] {
        for &y in &ys_pos {
            for s in 0..=config.s_max {
                tasks.push((j, y, s));
                tasks.push((j, -y, s));
            }
        }
    }

    // Grid points are independent; evaluate each core once, in parallel.
    let evaluated: Vec<((u8, u64, u32), Result<crate::transform::AxisCore>)> = tasks
        .par_iter()
        .map(|&(j, y, s)| (key(j, y, s), axis_core(dist, &params, j, y, s, quad)))
        .collect();
    let cache: HashMap<(u8, u64, u32), Result<crate::transform::AxisCore>> =
        evaluated.into_iter().collect();

    let mut sub_verdicts = Vec::with_capacity(4);
    let diagnostics = Vec::new();
    for j in [1u8, 2] {
        for axis in [AxisSide::Positive, AxisSide::Negative] {
            let provider = |y: f64, s: u32| -> Result<AxisEval> {
                let cached = cache
                    .get(&key(j, y, s))
                    .cloned()
                    .unwrap_or_else(|| axis_core(dist, &params, j, y, s, quad));
                cached.map(|ac| AxisEval {
                    core: ac.core,
                    scale: ac.scale(),
                    error: ac.error,
                })
            };
            let outcome = match axis {
                AxisSide::Positive => cm_exact(&provider, &config.grid, config.s_max, &config.tol),
                AxisSide::Negative => am_exact(&provider, &config.grid, config.s_max, &config.tol),
            };
            match outcome {
                Ok(verdict) => sub_verdicts.push(SubVerdict {
                    modulation_index: j,
                    axis,
                    verdict: Some(verdict),
                    error: None,
                }),
                Err(e) => sub_verdicts.push(SubVerdict {
                    modulation_index: j,
                    axis,
                    verdict: None,
                    error: Some(e.to_string()),
                }),
            }
        }
    }

    // Export the full axis derivative at every successfully evaluated point,
    // in a stable (j, y, s) order, reusing the computed cores.
    let mut sorted_tasks = tasks.clone();
    sorted_tasks.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut samples = Vec::new();
    let mut diagnostics = diagnostics;
    for (j, y, s) in sorted_tasks {
        match cache.get(&key(j, y, s)) {
            Some(Ok(ac)) => {
                samples.push(crate::transform::axis_sample_from_core(&params, j, y, s, ac))
            }
            Some(Err(e)) => diagnostics.push(format!("sample j={j} y={y:.6e} s={s}: {e}")),
            None => {}
        }
    }

    let statuses: Vec<Option<MonotoneStatus>> = sub_verdicts
        .iter()
        .map(|sv| sv.verdict.as_ref().map(|v| v.status))
        .collect();
    Ok(CheckReport {
        mode: CheckMode::Theorem13,
        config: config.clone(),
        resolved_n: params.n(),
        sub_verdicts,
        overall: aggregate(&statuses),
        samples,
        diagnostics,
    })
}

/// Characteristic-function test: for a bounded continuous even real `f`
/// with `f(0) = 1`, sample the Poisson extension `u_f(0, y)` on a uniform
/// grid and apply the alternating finite-difference test (single CM
/// condition, positive axis only).
pub fn check_theorem12(
    dist: &Distribution,
    config: &CheckConfig,
    strict_normalization: bool,
    quad: &QuadConfig,
) -> Result<CheckReport> {
    config.grid.validate()?;
    config.tol.validate()?;
    if dist.has_dirac() {
        return Err(Error::UnsupportedDistribution {
            reason: "characteristic-function test requires density atoms only".into(),
        });
    }
    for atom in dist.atoms() {
        if let crate::distribution::Atom::Density(d) = atom {
            if !d.is_real_even() || !d.is_bounded() || !d.base.is_continuous() {
                return Err(Error::UnsupportedDistribution {
                    reason: format!(
                        "characteristic-function test requires bounded continuous even real atoms, got {:?}",
                        d.base
                    ),
                });
            }
        }
    }
    let f0 = dist.value_at(0.0).re;
    if strict_normalization && (f0 - 1.0).abs() > 1e-9 {
        return Err(Error::NormalizationError {
            value: f0,
            tolerance: 1e-9,
        });
    }

    // Uniform grid: the finite-difference test needs equal spacing.
    let n = config.grid.count;
    let ys: Vec<f64> = (0..n)
        .map(|i| {
            config.grid.y_min
                + (config.grid.y_max - config.grid.y_min) * i as f64 / (n - 1) as f64
        })
        .collect();
    let values: Vec<Result<f64>> = ys
        .par_iter()
        .map(|&y| poisson_axis(dist, y, quad))
        .collect();
    let mut samples_pairs = Vec::with_capacity(n);
    let mut diagnostics = Vec::new();
    for (&y, v) in ys.iter().zip(values.into_iter()) {
        match v {
            Ok(u) => samples_pairs.push((y, u)),
            Err(e) => diagnostics.push(format!("poisson_axis(y={y}): {e}")),
        }
    }

    let k_max = config.s_max.min(samples_pairs.len() as u32 - 1).min(8);
    let verdict = if diagnostics.is_empty() {
        Some(cm_finite_diff(&samples_pairs, k_max, &config.tol)?)
    } else {
        None
    };
    let samples: Vec<AxisSample> = samples_pairs
        .iter()
        .map(|&(y, u)| AxisSample {
            modulation_index: 1,
            y,
            s: 0,
            value: Complex64::new(u, 0.0),
            ln_magnitude: u.abs().ln(),
            phase: if u >= 0.0 { 0.0 } else { std::f64::consts::PI },
            scale: u.abs(),
            error: 0.0,
        })
        .collect();

    let statuses: Vec<Option<MonotoneStatus>> =
        vec![verdict.as_ref().map(|v| v.status)];
    let sub_verdicts = vec![SubVerdict {
        modulation_index: 1,
        axis: AxisSide::Positive,
        verdict,
        error: if diagnostics.is_empty() {
            None
        } else {
            Some(diagnostics.join("; "))
        },
    }];
    Ok(CheckReport {
        mode: CheckMode::Theorem12,
        config: config.clone(),
        resolved_n: 0,
        sub_verdicts,
        overall: aggregate(&statuses),
        samples,
        diagnostics,
    })
}

/// Checker verdict side by side with the two oracles. `consistent` is false
/// only on a hard contradiction: checker refutes what the Fourier catalog
/// certifies, or checker finds no violation where the catalog refutes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossValidation {
    pub checker: Overall,
    pub fourier: GroundTruth,
    pub quadratic: GroundTruth,
    pub consistent: bool,
}

pub fn cross_validate(
    dist: &Distribution,
    config: &CheckConfig,
    trials: u64,
    seed: u64,
    quad: &QuadConfig,
) -> Result<CrossValidation> {
    let report = check_theorem13(dist, config, quad)?;
    let fourier = fourier_truth(dist)?;
    let quadratic = quadratic_form_truth(dist, trials, seed, &config.tol, quad)?;
    let consistent = !matches!(
        (report.overall, fourier.pd),
        (Overall::NotPd, PdVerdict::Yes) | (Overall::ConsistentPd, PdVerdict::No)
    );
    Ok(CrossValidation {
        checker: report.overall,
        fourier,
        quadratic,
        consistent,
    })
}
