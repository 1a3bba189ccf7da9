use proptest::prelude::*;
use trcopt_core::fom::{fom, IdealProfile, SolarSpectrum};
use trcopt_core::{Spectrum, WavelengthGrid};

fn solar(values: &[f64]) -> SolarSpectrum {
    let grid = WavelengthGrid::default();
    SolarSpectrum::from_spectrum(Spectrum::new(grid, values.to_vec()).unwrap()).unwrap()
}

fn spectrum(values: Vec<f64>) -> Spectrum {
    Spectrum::new(WavelengthGrid::default(), values).unwrap()
}

fn arrays() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(0.1f64..2.0, 441),
        prop::collection::vec(0.0f64..0.9, 441),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn raising_transmission_lowers_fom((s, t) in arrays(), at in 0usize..441, bump in 0.01f64..0.1) {
        let ideal = IdealProfile::default();
        let s = solar(&s);
        let base = fom(&spectrum(t.clone()), &ideal, &s).unwrap();
        let mut raised = t;
        raised[at] += bump;
        let after = fom(&spectrum(raised), &ideal, &s).unwrap();
        prop_assert!(after < base, "{base} -> {after} at {}", WavelengthGrid::default().at(at));
    }

    #[test]
    fn uniform_solar_rescaling_is_invisible((s, t) in arrays(), scale in 0.01f64..100.0) {
        let ideal = IdealProfile::default();
        let a = fom(&spectrum(t.clone()), &ideal, &solar(&s)).unwrap();
        let b = fom(&spectrum(t), &ideal, &solar(&s).scaled(scale)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn ideal_window_scores_zero(s in prop::collection::vec(0.0f64..2.0, 441)) {
        prop_assume!(s.iter().any(|v| *v > 0.0));
        let ideal = IdealProfile::default();
        let s = solar(&s);
        prop_assert_eq!(fom(&ideal.spectrum(s.grid()), &ideal, &s).unwrap(), 0.0);
    }
}

#[test]
fn doubling_solar_gives_identical_fom() {
    let s: Vec<f64> = (0..441).map(|i| 1.0 + (i as f64 * 0.1).sin().abs()).collect();
    let t = spectrum((0..441).map(|i| (i as f64 * 0.05).cos().abs()).collect());
    let ideal = IdealProfile::default();
    let doubled: Vec<f64> = s.iter().map(|v| v * 2.0).collect();
    assert_eq!(fom(&t, &ideal, &solar(&s)).unwrap(), fom(&t, &ideal, &solar(&doubled)).unwrap());
}
