use std::f64::consts::PI;

use seashell_core::forward_oracle::{
    asymptotic_omega, eigenvalues, norming_constants, roundtrip, roundtrip_options, spectral_data,
    Potential, PotentialSpec, ROUNDTRIP_GRID,
};
use seashell_core::reconstruction::{reconstruct, ReconstructOptions, Shift};

#[test]
fn constant_potential_shifts_the_free_spectrum() {
    let spec = PotentialSpec::new(Potential::Constant { value: 0.7 }, 0.0, 0.0);
    let ev = eigenvalues(&spec, 12).unwrap();
    let nc = norming_constants(&spec, &ev).unwrap();
    for (n, (l, a)) in ev.iter().zip(&nc).enumerate() {
        assert!((l - (n * n) as f64 - 0.7).abs() < 1e-9, "lambda[{n}] = {l}");
        let free = if n == 0 { PI } else { PI / 2.0 };
        assert!((a - free).abs() < 1e-9, "alpha[{n}] = {a}");
    }
}

#[test]
fn omega_identity_from_eigenvalue_tail() {
    let specs = [
        PotentialSpec::new(Potential::Step { height: 1.5 }, 0.3, -0.2),
        PotentialSpec::new(Potential::Hat { height: -1.0 }, 0.0, 0.4),
        PotentialSpec::new(
            Potential::Cosine {
                amplitude: 0.5,
                k: 3,
            },
            -0.1,
            0.1,
        ),
    ];
    for spec in &specs {
        let est = asymptotic_omega(spec, 40, 80).unwrap();
        assert!(
            (est - spec.omega()).abs() < 1e-3,
            "{est} vs {}",
            spec.omega()
        );
    }
}

#[test]
fn zero_and_constant_round_trips() {
    for q in [Potential::Zero, Potential::Constant { value: -0.4 }] {
        let spec = PotentialSpec::new(q, 0.0, 0.0);
        for n in [10, 30] {
            let r = roundtrip(&spec, n, ROUNDTRIP_GRID, roundtrip_options()).unwrap();
            assert!(r.e_n <= 1e-6, "N = {n}: e_N = {}", r.e_n);
        }
    }
}

#[test]
fn tail_shift_recovers_constant_exactly_enough() {
    let spec = PotentialSpec::new(Potential::Constant { value: 1.25 }, 0.0, 0.0);
    let data = spectral_data(&spec, 16).unwrap();
    let opts = ReconstructOptions {
        shift: Shift::Tail,
        ..Default::default()
    };
    let rec = reconstruct(&data, 300, opts).unwrap();
    assert!((rec.varpi - 1.25).abs() < 1e-8);
    for q in &rec.q {
        assert!((q - 1.25).abs() < 1e-6, "q = {q}");
    }
    assert!(rec.h.abs() < 1e-8 && rec.big_h.abs() < 1e-8);
}
