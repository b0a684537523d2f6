use num_complex::Complex64;
use proptest::prelude::*;

use spectral_synthesis::fourier::{check_support, convolve, DEFAULT_SUPPORT_TOL};
use spectral_synthesis::inequalities::{lp_norm, verify_indicator_bound, verify_support_bound};
use spectral_synthesis::recovery::{FeasibleSet, RecoveryProblem};
use spectral_synthesis::{forward, inverse, Exponent, FreqSet, GridShape, Signal, Spectrum};

fn grid() -> impl Strategy<Value = GridShape> {
    (2usize..=9, 1usize..=3)
        .prop_filter("at most 256 points", |(n, d)| n.pow(*d as u32) <= 256)
        .prop_map(|(n, d)| GridShape::new(n, d).unwrap())
}

fn signal_on(shape: GridShape) -> impl Strategy<Value = Signal> {
    prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), shape.len())
        .prop_map(move |v| Signal::new(shape, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap())
}

/// A signal with spectrum on a random nonempty set, and that set.
fn band_limited() -> impl Strategy<Value = (Signal, FreqSet)> {
    grid().prop_flat_map(|shape| {
        (
            prop::collection::vec(any::<bool>(), shape.len()),
            prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), shape.len()),
        )
            .prop_filter_map("nonempty set", move |(mask, coeffs)| {
                let members: Vec<usize> = (0..shape.len()).filter(|&i| mask[i]).collect();
                if members.is_empty() {
                    return None;
                }
                let set = FreqSet::new(shape, members).unwrap();
                let spec = Spectrum::from_fn(shape, |m| {
                    if set.contains(m) {
                        Complex64::new(coeffs[m].0, coeffs[m].1)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                Some((inverse(&spec), set))
            })
    })
}

fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_undoes_forward(f in grid().prop_flat_map(signal_on)) {
        prop_assert!(close(inverse(&forward(&f)).values(), f.values(), 1e-10));
    }

    #[test]
    fn plancherel(f in grid().prop_flat_map(signal_on)) {
        let a = lp_norm(&f, Exponent::TWO);
        let spectrum = forward(&f);
        let b: f64 = spectrum.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn convolution_becomes_scaled_product(
        (f, g) in grid().prop_flat_map(|s| (signal_on(s), signal_on(s)))
    ) {
        let shape = f.shape();
        let lhs = forward(&convolve(&f, &g).unwrap());
        let (ff, fg) = (forward(&f), forward(&g));
        let scale = (shape.len() as f64).sqrt();
        let rhs: Vec<Complex64> = ff.values().iter().zip(fg.values()).map(|(a, b)| a * b * scale).collect();
        let tol = 1e-9 * rhs.iter().map(|v| v.norm()).fold(1.0, f64::max);
        prop_assert!(close(lhs.values(), &rhs, tol));
    }

    #[test]
    fn band_limited_signals_respect_both_bounds((f, set) in band_limited(), p in prop::sample::select(vec![2.0, 2.5, 4.0, 7.0])) {
        check_support(&f, &set, DEFAULT_SUPPORT_TOL).unwrap();
        let p = Exponent::new(p).unwrap();
        prop_assert!(verify_support_bound(&f, &set, p).unwrap().holds());
        prop_assert!(verify_indicator_bound(&f, &set, p).unwrap().holds());
    }

    #[test]
    fn indicator_bound_holds_below_two((f, set) in band_limited(), p in 1.0f64..2.0) {
        let p = Exponent::new(p).unwrap();
        prop_assert!(verify_indicator_bound(&f, &set, p).unwrap().holds());
    }

    #[test]
    fn feasible_points_keep_the_observed_spectrum(
        f in grid().prop_flat_map(signal_on),
        raw_hidden in prop::collection::vec(0usize..256, 1..6),
        theta_seed in prop::collection::vec(-2.0f64..2.0, 12),
    ) {
        let shape = f.shape();
        let real = Signal::from_real(shape, &f.real_parts()).unwrap();
        let hidden: Vec<usize> = raw_hidden.into_iter().map(|m| m % shape.len()).collect();
        let set = FreqSet::new(shape, hidden).unwrap();
        prop_assume!(set.symmetrized().len() < shape.len());
        let problem = RecoveryProblem::from_signal(&real, &set, Exponent::TWO, 1.0).unwrap();
        let feasible = FeasibleSet::new(&problem).unwrap();
        let theta: Vec<f64> = (0..feasible.dim()).map(|j| theta_seed[j % theta_seed.len()]).collect();
        let g = feasible.signal_at(&theta);
        let spectrum = forward(&g);
        let observed = forward(&real);
        for m in 0..shape.len() {
            if !problem.hidden().contains(m) {
                prop_assert!((spectrum.get(m) - observed.get(m)).norm() <= 1e-9);
            }
        }
        prop_assert!(g.is_real(1e-12));
    }
}
