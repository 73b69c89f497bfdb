use std::f64::consts::TAU;

use mcinterp::error_analysis::{Pattern, Scheme};
use mcinterp::generic::{gn1_reconstruct, gn2_reconstruct, GenericGrid};
use mcinterp::image::{clamp_intensity, crt_correct, metrics, median_filter, GrayImage, Psnr};
use mcinterp::recurrent::{rn1_reconstruct, RecurrentGrid};
use mcinterp::{SpectralSupport, TrigPolynomial};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn poly_strategy(max_len: usize) -> impl Strategy<Value = TrigPolynomial> {
    (-40i64..=20, 1..=max_len).prop_flat_map(|(n_lo, len)| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(move |c| {
            let s = SpectralSupport::with_len(n_lo, len).unwrap();
            TrigPolynomial::new(s, c.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
        })
    })
}

/// Sorted nodes with circular gaps of at least a fifth of the mean spacing.
fn grid_strategy(m: usize) -> impl Strategy<Value = GenericGrid> {
    prop::collection::vec(0.0f64..0.8, m).prop_map(move |jitter| {
        let h = TAU / m as f64;
        GenericGrid::new(jitter.iter().enumerate().map(|(j, u)| (j as f64 + u) * h).collect()).unwrap()
    })
}

fn image_strategy() -> impl Strategy<Value = GrayImage> {
    (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
        prop::collection::vec(0u8..=255, w * h)
            .prop_map(move |px| GrayImage::new(w, h, px.into_iter().map(f64::from).collect()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(p in poly_strategy(32)) {
        let q = 1024;
        let quad: f64 = (0..q).map(|j| p.eval(TAU * j as f64 / q as f64).norm_sqr()).sum::<f64>() / q as f64;
        prop_assert!((p.norm_l2().powi(2) - quad).abs() <= 1e-9 * quad.max(1e-300));
    }

    #[test]
    fn hilbert_twice_negates_off_dc(p in poly_strategy(32)) {
        let hh = p.hilbert().hilbert();
        for n in p.support().iter() {
            let want = if n == 0 { Complex64::new(0.0, 0.0) } else { -p.coeff(n) };
            prop_assert!((hh.coeff(n) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn eval_dense_matches_naive(p in poly_strategy(48), extra in 0usize..40) {
        let n = p.support().len() + extra;
        let v = p.eval_dense(n).unwrap();
        for (j, x) in v.iter().enumerate() {
            prop_assert!((x - p.eval(TAU * j as f64 / n as f64)).norm() < 1e-11);
        }
    }

    #[test]
    fn shift_preserves_norm(p in poly_strategy(16), tau in 0.0f64..TAU) {
        prop_assert!((p.shift(tau).norm_l2() - p.norm_l2()).abs() < 1e-12);
    }

    #[test]
    fn gn1_exact(m in 2usize..24, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = TAU / m as f64;
        let g = GenericGrid::new((0..m).map(|j| (j as f64 + rng.gen_range(0.0..0.8)) * h).collect()).unwrap();
        let s = SpectralSupport::with_len(-(m as i64 / 2), m).unwrap();
        let f = TrigPolynomial::from_fn(s, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let vals: Vec<_> = g.nodes().iter().map(|&t| f.eval(t)).collect();
        prop_assert!(gn1_reconstruct(&g, s, &vals).unwrap().max_coeff_diff(&f) < 1e-8);
    }

    #[test]
    fn gn2_interpolates_arbitrary_data(g in (2usize..10).prop_flat_map(grid_strategy), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m0 = g.len();
        let vals: Vec<Complex64> = (0..m0).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let ders: Vec<Complex64> = (0..m0).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let rec = gn2_reconstruct(&g, 1 - m0 as i64, &vals, &ders).unwrap();
        let d = rec.derivative();
        for p in 0..m0 {
            let t = g.nodes()[p];
            prop_assert!((rec.eval(t) - vals[p]).norm() < 1e-8);
            prop_assert!((d.eval(t) - ders[p]).norm() < 1e-8);
        }
    }

    #[test]
    fn rn1_interpolates_arbitrary_data(m0 in 2usize..16, frac in 0.1f64..0.9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = frac * TAU / m0 as f64;
        let grid = RecurrentGrid::rn1(m0, alpha).unwrap();
        let a: Vec<Complex64> = (0..m0).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let b: Vec<Complex64> = (0..m0).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let rec = rn1_reconstruct(&grid, grid.default_support(), &a, &b).unwrap();
        for p in 0..m0 {
            let t = TAU * p as f64 / m0 as f64;
            prop_assert!((rec.eval(t) - a[p]).norm() < 1e-9);
            prop_assert!((rec.eval(t + alpha) - b[p]).norm() < 1e-9);
        }
    }

    #[test]
    fn er_at_least_one(seed in any::<u64>(), which in 0usize..6, n in 9i64..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scheme = Scheme::benchmark(Pattern::ALL[which], 16, &mut rng).unwrap();
        prop_assert!(scheme.er(n).unwrap() >= 1.0);
        prop_assert!(scheme.er(-n).unwrap() >= 1.0);
    }

    #[test]
    fn clamp_idempotent_and_bounded(v in -1e4f64..1e4) {
        let z = clamp_intensity(v);
        prop_assert_eq!(clamp_intensity(z), z);
        prop_assert!((0.0..=255.0).contains(&z));
    }

    #[test]
    fn crt_reports_termination_honestly(img in image_strategy(), max_iters in 0usize..6) {
        // Adjacent extrema can swap forever, so convergence is reported rather than assumed.
        let out = crt_correct(&img, max_iters);
        let again = crt_correct(&out.image, 1);
        if out.converged {
            prop_assert_eq!(again.iterations, 0);
        } else {
            prop_assert_eq!(out.iterations, max_iters);
            prop_assert_eq!(again.iterations, 1);
        }
    }

    #[test]
    fn median_matches_sorted_window(img in image_strategy()) {
        let out = median_filter(&img, None).unwrap();
        let (w, h) = (img.width() as isize, img.height() as isize);
        for y in 0..h {
            for x in 0..w {
                let mut win = Vec::new();
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        win.push(img.get((y + dy).clamp(0, h - 1) as usize, (x + dx).clamp(0, w - 1) as usize));
                    }
                }
                win.sort_by(|a, b| a.partial_cmp(b).unwrap());
                prop_assert_eq!(out.get(y as usize, x as usize), win[4]);
            }
        }
    }

    #[test]
    fn metric_sanity(a in image_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = GrayImage::from_fn(a.width(), a.height(), |_, _| rng.gen_range(0..=255) as f64).unwrap();
        if let Ok(m) = metrics(&a, &b) {
            prop_assert!((-1.0..=1.0).contains(&m.cc));
            prop_assert_eq!(m.delta == 0.0, a == b);
            prop_assert_eq!(m.psnr == Psnr::Identical, a == b);
        }
    }
}
