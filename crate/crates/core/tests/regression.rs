use proptest::prelude::*;
use trcopt_core::convergence::{
    analyze, averaged_constituents, fit_averaged_piecewise, fit_piecewise, fit_polynomial, initiation_point,
    mean_curve, piecewise_model, Method, Series,
};

fn cycles(n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(|c| c as f64)
}

/// Continuous piecewise-linear least squares in the hat-function basis,
/// solved through the normal equations by Gaussian elimination.
fn hat_fit(t: &[f64], y: &[f64], nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    let hat = |j: usize, x: f64| -> f64 {
        let left = if j > 0 { nodes[j - 1] } else { f64::NEG_INFINITY };
        let right = if j + 1 < m { nodes[j + 1] } else { f64::INFINITY };
        let c = nodes[j];
        if x <= c && x >= left {
            if j == 0 { 1.0 } else { (x - left) / (c - left) }
        } else if x > c && x <= right {
            if j + 1 == m { 1.0 } else { (right - x) / (right - c) }
        } else {
            0.0
        }
    };
    let mut a = vec![vec![0.0; m + 1]; m];
    for (&x, &v) in t.iter().zip(y) {
        let row: Vec<f64> = (0..m).map(|j| hat(j, x)).collect();
        for i in 0..m {
            for j in 0..m {
                a[i][j] += row[i] * row[j];
            }
            a[i][m] += row[i] * v;
        }
    }
    for col in 0..m {
        let pivot = (col..m).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
        a.swap(col, pivot);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=m {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let values: Vec<f64> = (0..m).map(|i| a[i][m] / a[i][i]).collect();
    t.iter()
        .map(|&x| (0..m).map(|j| values[j] * hat(j, x)).sum())
        .collect()
}

#[test]
fn piecewise_matches_independent_solver_on_step_data() {
    let s = Series::from_fn(cycles(1000), |c| if c <= 500.0 { 10.0 } else { 0.0 }).unwrap();
    let t: Vec<f64> = s.cycles.iter().map(|c| c / 1000.0).collect();
    for (pieces, offset) in [(5, 0.0), (20, 0.4), (7, 0.5)] {
        let model = piecewise_model(&s, pieces, offset).unwrap();
        let mut nodes = vec![t[0]];
        nodes.extend(&model.knots);
        nodes.push(t[t.len() - 1]);
        let oracle = hat_fit(&t, &s.values, &nodes);
        let fit = fit_piecewise(&s, pieces, offset).unwrap();
        for (i, (a, b)) in fit.values.iter().zip(&oracle).enumerate() {
            assert!((a - b).abs() < 1e-8, "pieces {pieces} offset {offset} cycle {}: {a} vs {b}", i + 1);
        }
    }
}

#[test]
fn step_data_five_pieces_reference_values() {
    // regular 5-piece grid: the third segment straddles the step, the rest are flat
    let s = Series::from_fn(cycles(1000), |c| if c <= 500.0 { 10.0 } else { 0.0 }).unwrap();
    let fit = fit_piecewise(&s, 5, 0.0).unwrap();
    assert!((fit.values[0] - 10.0).abs() < 0.5);
    assert!(fit.values[999].abs() < 0.5);
    let g = initiation_point(&fit, -3.0).unwrap();
    assert!((300.0..=500.0).contains(&g), "{g}");
    let slope_mid = fit.gradients[500];
    assert!(slope_mid < -20.0, "{slope_mid}");
}

#[test]
fn linear_data_recovered_by_every_method() {
    let s = Series::from_fn(cycles(600), |c| 7.0 - 0.004 * c).unwrap();
    for m in [Method::Polynomial(3), Method::Polynomial(5), Method::Piecewise(5), Method::Piecewise(100), Method::Averaged] {
        let curve = m.fit(&s).unwrap();
        for ((v, g), c) in curve.values.iter().zip(&curve.gradients).zip(&s.cycles) {
            assert!((v - (7.0 - 0.004 * c)).abs() < 1e-6, "{m}: value at {c}");
            assert!((g + 4.0).abs() < 1e-6, "{m}: gradient {g} at {c}");
        }
    }
}

#[test]
fn averaged_is_exact_mean_of_constituents() {
    let s = Series::from_fn(cycles(800), |c| 10.0 * (-c / 300.0).exp() + (c * 0.37).sin()).unwrap();
    let parts = averaged_constituents(&s).unwrap();
    assert_eq!(parts.len(), 5);
    let avg = fit_averaged_piecewise(&s).unwrap();
    for i in 0..s.len() {
        let v = parts.iter().fold(0.0, |a, p| a + p.values[i]) / 5.0;
        let g = parts.iter().fold(0.0, |a, p| a + p.gradients[i]) / 5.0;
        assert_eq!(avg.values[i], v);
        assert_eq!(avg.gradients[i], g);
    }
    assert_eq!(mean_curve(&parts).unwrap(), avg);
}

#[test]
fn poly3_reports_negative_gradient_from_first_cycle() {
    // long run with a short plateau, as in a 5000-cycle trajectory
    let s = Series::from_fn(cycles(5000), |c| {
        if c <= 500.0 { 15.0 } else { 1.0 + 14.0 * (-(c - 500.0) / 300.0).exp() }
    })
    .unwrap();
    let curve = fit_polynomial(&s, 3).unwrap();
    assert!(curve.gradients[0] < 0.0, "{}", curve.gradients[0]);
    let avg = fit_averaged_piecewise(&s).unwrap();
    // the averaged fit does not signal convergence at the start
    assert!(avg.gradients[0] > -3.0, "{}", avg.gradients[0]);
    assert!(curve.gradients[0] <= -3.0, "{}", curve.gradients[0]);
}

#[test]
fn plateau_then_decay_profile() {
    let s = Series::from_fn(cycles(2000), |c| {
        if c <= 500.0 { 15.0 } else { 1.0 + 14.0 * (-(c - 500.0) / 300.0).exp() }
    })
    .unwrap();
    let (curve, report) = analyze(&s, Method::Averaged, -3.0).unwrap();
    // flat well before the knee; the fit rings a little within one segment of it
    let early = curve.gradients[..250].iter().fold(0.0f64, |a, g| a.max(g.abs()));
    assert!(early < 0.5, "plateau gradient {early}");
    assert!(curve.gradients[..400].iter().all(|&g| g > -3.0));
    let after = curve.gradients[500..700].iter().copied().fold(f64::INFINITY, f64::min);
    assert!(after < -10.0, "{after}");
    let start = report.initiation_cycle.unwrap();
    assert!((400.0..=600.0).contains(&start), "{start}");
}

fn trace() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..20.0, 120..300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn piecewise_fit_is_continuous(values in trace(), pieces in 1usize..12, offset in 0.0f64..0.99) {
        let s = Series::new(cycles(values.len()).collect(), values).unwrap();
        let m = piecewise_model(&s, pieces, offset).unwrap();
        for (j, &k) in m.knots.iter().enumerate() {
            let (a0, b0) = m.segments[j];
            let (a1, b1) = m.segments[j + 1];
            let left = a0 + b0 * k;
            prop_assert!((left - (a1 + b1 * k)).abs() <= 1e-9 * left.abs().max(1.0));
        }
    }

    #[test]
    fn initiation_moves_later_as_threshold_tightens(values in trace(), t1 in -50.0f64..0.0, dt in 0.0f64..50.0) {
        let s = Series::new(cycles(values.len()).collect(), values).unwrap();
        let curve = fit_averaged_piecewise(&s).unwrap();
        let loose = initiation_point(&curve, t1);
        let strict = initiation_point(&curve, t1 - dt);
        match (loose, strict) {
            (Some(a), Some(b)) => prop_assert!(a <= b),
            (None, Some(_)) => prop_assert!(false, "stricter threshold crossed first"),
            _ => {}
        }
    }

    #[test]
    fn averaged_equals_mean_for_random_traces(values in trace()) {
        let s = Series::new(cycles(values.len()).collect(), values).unwrap();
        prop_assert_eq!(fit_averaged_piecewise(&s).unwrap(), mean_curve(&averaged_constituents(&s).unwrap()).unwrap());
    }
}
