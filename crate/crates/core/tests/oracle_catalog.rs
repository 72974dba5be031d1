//! Oracle concordance over the whole fixture catalog: the Fourier catalog
//! and the quadratic-form search must never contradict each other, and the
//! quadratic-form search must find every catalog refutation quickly.

use num_complex::Complex64;
use pdcheck_core::distribution::{Atom, BaseKind, DensityAtom, DiracAtom, Distribution};
use pdcheck_core::monotone::Tolerance;
use pdcheck_core::oracle::{fourier_truth, quadratic_form_truth, PdVerdict};
use pdcheck_core::quad::QuadConfig;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn dirac(location: f64, order: u32, weight: Complex64) -> Atom {
    Atom::Dirac(DiracAtom {
        location,
        derivative_order: order,
        weight,
        modulation: 0.0,
    })
}

fn density(base: BaseKind, poly: Vec<f64>, growth: u32, modulation: f64) -> Atom {
    Atom::Density(DensityAtom {
        base,
        poly,
        weight: c64(1.0, 0.0),
        growth_degree: growth,
        modulation,
    })
}

/// Positive-definite side of the catalog.
pub fn pd_fixtures() -> Vec<(&'static str, Distribution)> {
    vec![
        (
            "dirac0",
            Distribution::new(vec![dirac(0.0, 0, c64(1.0, 0.0))]).unwrap(),
        ),
        (
            "gaussian",
            Distribution::new(vec![density(BaseKind::Gaussian { sigma: 1.0 }, vec![], 0, 0.0)])
                .unwrap(),
        ),
        (
            "laplace",
            Distribution::new(vec![density(BaseKind::Laplace { lambda: 1.0 }, vec![], 0, 0.0)])
                .unwrap(),
        ),
        (
            "cosine",
            Distribution::new(vec![density(BaseKind::Cosine { b: 1.0 }, vec![], 0, 0.0)])
                .unwrap(),
        ),
        (
            "triangle",
            Distribution::new(vec![density(BaseKind::Triangle { a: 1.0 }, vec![], 0, 0.0)])
                .unwrap(),
        ),
        (
            "dirac_comb",
            Distribution::new(vec![
                dirac(0.0, 0, c64(2.0, 0.0)),
                dirac(1.0, 0, c64(1.0, 0.0)),
                dirac(-1.0, 0, c64(1.0, 0.0)),
            ])
            .unwrap(),
        ),
        (
            "modulated_gaussian",
            Distribution::new(vec![density(BaseKind::Gaussian { sigma: 1.0 }, vec![], 0, 3.0)])
                .unwrap(),
        ),
    ]
}

/// Refutable side of the catalog.
pub fn non_pd_fixtures() -> Vec<(&'static str, Distribution)> {
    vec![
        (
            "neg_dirac",
            Distribution::new(vec![dirac(0.0, 0, c64(-1.0, 0.0))]).unwrap(),
        ),
        (
            "sine",
            Distribution::new(vec![density(BaseKind::Sine { b: 1.0 }, vec![], 0, 0.0)]).unwrap(),
        ),
        (
            "indicator",
            Distribution::new(vec![density(BaseKind::Indicator { a: 1.0 }, vec![], 0, 0.0)])
                .unwrap(),
        ),
        (
            "t_squared",
            Distribution::new(vec![density(
                BaseKind::Constant,
                vec![0.0, 0.0, 1.0],
                2,
                0.0,
            )])
            .unwrap(),
        ),
        (
            "t_gaussian",
            Distribution::new(vec![density(
                BaseKind::Gaussian { sigma: 1.0 },
                vec![0.0, 1.0],
                0,
                0.0,
            )])
            .unwrap(),
        ),
        (
            "dirac_prime",
            Distribution::new(vec![dirac(0.0, 1, c64(1.0, 0.0))]).unwrap(),
        ),
    ]
}

#[test]
fn fourier_catalog_verdicts() {
    for (name, f) in pd_fixtures() {
        let t = fourier_truth(&f).unwrap();
        assert_eq!(t.pd, PdVerdict::Yes, "{name}: {}", t.reason);
    }
    for (name, f) in non_pd_fixtures() {
        let t = fourier_truth(&f).unwrap();
        assert_eq!(t.pd, PdVerdict::No, "{name}: {}", t.reason);
        assert!(t.evidence.is_some(), "{name} must carry evidence");
    }
}

#[test]
fn quadratic_oracle_refutes_catalog_within_256_trials() {
    let tol = Tolerance::default();
    let cfg = QuadConfig::default();
    for (name, f) in non_pd_fixtures() {
        let t = quadratic_form_truth(&f, 256, 0, &tol, &cfg).unwrap();
        assert_eq!(t.pd, PdVerdict::No, "{name} not refuted: {}", t.reason);
        println!("{name}: {}", t.reason);
    }
}

#[test]
fn quadratic_oracle_never_refutes_pd_fixtures() {
    let tol = Tolerance::default();
    let cfg = QuadConfig::default();
    let fixtures = pd_fixtures();
    // 10^4 aggregate trials at seed 0, split across the PD catalog.
    let per_fixture = 10_000 / fixtures.len() as u64 + 1;
    for (name, f) in fixtures {
        let t = quadratic_form_truth(&f, per_fixture, 0, &tol, &cfg).unwrap();
        assert_eq!(t.pd, PdVerdict::Unknown, "{name} wrongly refuted: {}", t.reason);
    }
}
