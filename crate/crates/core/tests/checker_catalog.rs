//! Checker concordance over the fixture catalog with default settings.

use num_complex::Complex64;
use pdcheck_core::checker::{check_theorem13, CheckConfig, Overall};
use pdcheck_core::distribution::{Atom, BaseKind, DensityAtom, DiracAtom, Distribution};
use pdcheck_core::quad::QuadConfig;
use std::time::Instant;

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

#[test]
fn catalog_verdicts_default_grid() {
    let config = CheckConfig::default();
    let quad = QuadConfig::default();

    let pd: Vec<(&str, Distribution)> = vec![
        ("dirac0", Distribution::new(vec![dirac(0.0, 0, c64(1.0, 0.0))]).unwrap()),
        (
            "gaussian",
            Distribution::new(vec![density(BaseKind::Gaussian { sigma: 1.0 }, vec![], 0, 0.0)]).unwrap(),
        ),
        (
            "laplace",
            Distribution::new(vec![density(BaseKind::Laplace { lambda: 1.0 }, vec![], 0, 0.0)]).unwrap(),
        ),
        (
            "cosine",
            Distribution::new(vec![density(BaseKind::Cosine { b: 1.0 }, vec![], 0, 0.0)]).unwrap(),
        ),
        (
            "triangle",
            Distribution::new(vec![density(BaseKind::Triangle { a: 1.0 }, vec![], 0, 0.0)]).unwrap(),
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
            Distribution::new(vec![density(BaseKind::Gaussian { sigma: 1.0 }, vec![], 0, 3.0)]).unwrap(),
        ),
    ];
    let non_pd: Vec<(&str, Distribution)> = vec![
        ("neg_dirac", Distribution::new(vec![dirac(0.0, 0, c64(-1.0, 0.0))]).unwrap()),
        (
            "sine",
            Distribution::new(vec![density(BaseKind::Sine { b: 1.0 }, vec![], 0, 0.0)]).unwrap(),
        ),
        (
            "indicator",
            Distribution::new(vec![density(BaseKind::Indicator { a: 1.0 }, vec![], 0, 0.0)]).unwrap(),
        ),
        (
            "t_squared",
            Distribution::new(vec![density(BaseKind::Constant, vec![0.0, 0.0, 1.0], 2, 0.0)]).unwrap(),
        ),
        (
            "t_gaussian",
            Distribution::new(vec![density(BaseKind::Gaussian { sigma: 1.0 }, vec![0.0, 1.0], 0, 0.0)]).unwrap(),
        ),
        ("dirac_prime", Distribution::new(vec![dirac(0.0, 1, c64(1.0, 0.0))]).unwrap()),
    ];

    for (name, f) in &pd {
        let t0 = Instant::now();
        let report = check_theorem13(f, &config, &quad).unwrap();
        println!("{name}: {:?} in {:.2?}", report.overall, t0.elapsed());
        for sv in &report.sub_verdicts {
            if let Some(v) = &sv.verdict {
                if !v.diagnostics.is_empty() {
                    println!(
                        "  j={} {:?}: {} diagnostics, first: {}",
                        sv.modulation_index,
                        sv.axis,
                        v.diagnostics.len(),
                        v.diagnostics[0]
                    );
                }
            } else {
                println!("  j={} {:?}: ERROR {:?}", sv.modulation_index, sv.axis, sv.error);
            }
        }
        assert_eq!(report.overall, Overall::ConsistentPd, "{name}");
    }
    for (name, f) in &non_pd {
        let t0 = Instant::now();
        let report = check_theorem13(f, &config, &quad).unwrap();
        println!("{name}: {:?} in {:.2?}", report.overall, t0.elapsed());
        assert_eq!(report.overall, Overall::NotPd, "{name}");
        let has_witness = report
            .sub_verdicts
            .iter()
            .filter_map(|sv| sv.verdict.as_ref())
            .any(|v| !v.witnesses.is_empty());
        assert!(has_witness, "{name} must record witnesses");
    }
}
