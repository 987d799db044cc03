use num_complex::Complex64;
use proptest::prelude::*;

use wigner_udm::config::{parse_wavefunction_csv, RunConfig};
use wigner_udm::grid::Axis;
use wigner_udm::oracles::{wigner_transform_direct, QuadratureSpec};
use wigner_udm::output::format_number;
use wigner_udm::state::{coeffs_from_samples, density_from_coeffs, wigner_grid, SampledWavefunction};
use wigner_udm::udm::{udm_element, PhasePoint};
use wigner_udm::{CoefficientVector, OscillatorParams, PolyIndexPair};

fn state(n_max: usize) -> impl Strategy<Value = CoefficientVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n_max + 1)
        .prop_filter("nonzero", |c| c.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|c| CoefficientVector::normalize(c.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

fn params() -> impl Strategy<Value = OscillatorParams> {
    (0.5f64..2.0, 0.5f64..2.0, 0.5f64..2.0).prop_map(|(h, m, w)| OscillatorParams::new(h, m, w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_matches_transform(n in 0usize..=6, k in 0usize..=6, x in -2.5f64..2.5, p in -2.5f64..2.5, params in params()) {
        let pt = PhasePoint { x, p };
        let w = udm_element(PolyIndexPair::new(n, k).unwrap(), pt, &params).unwrap();
        let o = wigner_transform_direct(n, k, pt, &params, &QuadratureSpec::trapezoid(513)).unwrap();
        prop_assert!((w - o.value).norm() < 1e-8 / params.hbar(), "{w} vs {}", o.value);
    }

    #[test]
    fn projection_recovers_coefficients(c in (0usize..=5).prop_flat_map(state)) {
        let params = OscillatorParams::natural();
        let axis = Axis::new(-12.0, 12.0, 481).unwrap();
        let psi = SampledWavefunction::from_fn(axis, |x| c.psi_x(x, &params));
        let back = coeffs_from_samples(&psi, &params, 8).unwrap();
        for (i, b) in back.coeffs().iter().enumerate() {
            let want = c.coeffs().get(i).copied().unwrap_or_default();
            prop_assert!((b - want).norm() < 1e-10);
        }
    }

    #[test]
    fn csv_round_trip(c in (0usize..=4).prop_flat_map(state)) {
        let params = OscillatorParams::natural();
        let axis = Axis::new(-10.0, 10.0, 201).unwrap();
        let mut text = String::from("x,re,im\n");
        for x in axis.nodes() {
            let v = c.psi_x(x, &params);
            text.push_str(&format!("{},{},{}\n", format_number(x), format_number(v.re), format_number(v.im)));
        }
        let psi = parse_wavefunction_csv(&text).unwrap();
        prop_assert_eq!(psi.axis.len(), 201);
        for (x, v) in axis.nodes().zip(&psi.values) {
            prop_assert_eq!(*v, c.psi_x(x, &params));
        }
    }

    #[test]
    fn grid_is_real_and_integrates_to_one(c in (0usize..=3).prop_flat_map(state)) {
        let params = OscillatorParams::natural();
        let axis = Axis::new(-8.0, 8.0, 81).unwrap();
        let g = wigner_grid(&density_from_coeffs(&c).unwrap(), axis, axis, &params).unwrap();
        prop_assert!((g.integrate() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn config_serialization_round_trip() {
    let text = r#"{
        "params": {"hbar": 0.5, "mass": 2.0, "omega": 1.5},
        "state": {"coefficients": [[0.6, 0.0], [0.0, 0.8]]},
        "potential": {"coeffs": [0, 0.1, 0, 0, 0.2], "omega_ref": 1.5},
        "grid": {"x_min": -2, "x_max": 2, "nx": 9, "p_min": -3, "p_max": 3, "np": 13},
        "output": {"path": "w.json", "format": "json"},
        "fixture": {"kind": "gaussian", "sigma": 0.7}
    }"#;
    let cfg = RunConfig::from_json(text).unwrap();
    let back = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(cfg, back);
}
