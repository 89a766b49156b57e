use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use geobal::config::parse_config;
use geobal::dynamics::apply_a;
use geobal::experiments::{fit_line, ToyModel};
use geobal::interactions::{apply_b, GridConvolver};
use geobal::lattice::{random_state, Domain, Frame, Lattice, SpectralState};
use geobal::modes::apply_l;
use geobal::snapshot::{read_snapshot, snapshot_string};

fn lattice(l: [f64; 3], kmax: f64) -> Arc<Lattice> {
    Lattice::new(Domain::new(l[0], l[1], l[2]).unwrap(), kmax).unwrap()
}

fn state(lat: &Arc<Lattice>, seed: u64) -> SpectralState {
    random_state(lat, &mut ChaCha8Rng::seed_from_u64(seed), |k| 1.0 / (1.0 + k * k))
}

fn lengths() -> impl Strategy<Value = [f64; 3]> {
    [3.0f64..9.0, 3.0f64..9.0, 2.0f64..9.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reality_projection_is_idempotent(l in lengths(), seed in any::<u64>()) {
        let lat = lattice(l, 2.5);
        let s = state(&lat, seed);
        prop_assert!(s.check_reality() <= 1e-15 * s.l2_norm().max(1.0));
        prop_assert_eq!(s.enforce_reality(), s.clone());
        let p = s.materialize_partners();
        prop_assert!(p.check_reality() <= 1e-15 * s.l2_norm().max(1.0));
    }

    #[test]
    fn slow_and_fast_parts_recompose(l in lengths(), seed in any::<u64>()) {
        let lat = lattice(l, 2.5);
        let s = state(&lat, seed);
        let back = s.slow_part().add(&s.fast_part());
        prop_assert_eq!(back, s.clone());
        prop_assert!(s.slow_part().coeff_inner(&s.fast_part()).norm() == 0.0);
    }

    #[test]
    fn snapshot_round_trip(l in lengths(), seed in any::<u64>(), t in -10.0f64..10.0, lab in any::<bool>()) {
        let lat = lattice(l, 2.0);
        let mut s = state(&lat, seed);
        s.set_time(t);
        if lab {
            s = s.to_frame(Frame::Lab, 0.1);
        }
        let r = read_snapshot(&snapshot_string(&s)).unwrap();
        prop_assert_eq!(r.frame(), s.frame());
        prop_assert_eq!(r.time().to_bits(), s.time().to_bits());
        prop_assert_eq!(r.coeffs(), s.coeffs());
    }

    #[test]
    fn frame_change_is_an_isometry(seed in any::<u64>(), t in -5.0f64..5.0, eps in 0.01f64..1.0) {
        let lat = lattice([6.0, 6.0, 6.0], 2.5);
        let mut s = state(&lat, seed);
        s.set_time(t);
        let lab = s.to_frame(Frame::Lab, eps);
        prop_assert!((lab.l2_norm() - s.l2_norm()).abs() <= 1e-14 * s.l2_norm());
        let back = lab.to_frame(Frame::Rotated, eps);
        for (a, b) in back.coeffs().iter().zip(s.coeffs()) {
            prop_assert!((a - b).norm() <= 1e-14 * s.l2_norm());
        }
        prop_assert!(lab.check_reality() <= 1e-14 * s.l2_norm());
    }

    #[test]
    fn transfer_up_and_down_is_identity(seed in any::<u64>()) {
        let small = lattice([6.0, 6.5, 4.0], 2.0);
        let big = lattice([6.0, 6.5, 4.0], 3.5);
        let s = state(&small, seed);
        let round = s.transfer(&big).unwrap().transfer(&small).unwrap();
        prop_assert_eq!(round, s);
    }

    #[test]
    fn operator_identities(l in lengths(), seed in any::<u64>(), mu in 0.01f64..2.0) {
        let lat = lattice(l, 2.5);
        let vol = lat.domain().volume();
        let w = state(&lat, seed);
        let h = state(&lat, seed.wrapping_add(1));
        let w2 = vol * w.l2_norm().powi(2);
        prop_assert!(w.l2_inner(&apply_l(&w)).norm() <= 1e-12 * w2);
        let b = apply_b(&h, &w, None).unwrap();
        prop_assert!(w.l2_inner(&b).re.abs() <= 1e-10 * vol.sqrt() * h.sobolev_norm(1.0) * w2);
        let g2 = vol * w.sobolev_norm(1.0).powi(2);
        prop_assert!((w.l2_inner(&apply_a(&w, mu)) - mu * g2).norm() <= 1e-12 * mu * g2);
    }

    #[test]
    fn grid_product_matches_direct_sum(seed in any::<u64>(), t in 0.0f64..3.0, eps in 0.05f64..1.0) {
        let lat = lattice([2.0 * std::f64::consts::PI; 3], 2.5);
        let w = state(&lat, seed);
        let h = state(&lat, seed ^ 0x55);
        let conv = GridConvolver::new(&lat);
        let direct = apply_b(&h, &w, Some((t, eps))).unwrap();
        let grid = conv.apply(&h, &w, Some((t, eps))).unwrap();
        let err = direct.sub(&grid).l2_norm();
        prop_assert!(err <= 1e-12 * direct.l2_norm().max(1e-300));
    }

    #[test]
    fn toy_trajectory_approaches_slow_point(eps in 0.01f64..0.5, mu in 0.1f64..2.0, fr in -2.0f64..2.0, fi in -2.0f64..2.0) {
        let m = ToyModel::new(eps, mu, Complex64::new(fr, fi)).unwrap();
        let u = m.slow_point();
        prop_assert!((Complex64::new(eps * mu, 1.0) * u - eps * Complex64::new(fr, fi)).norm() <= 1e-14);
        let run = m.run(Complex64::new(1.0, -1.0), 2.0, 0.01).unwrap();
        for pair in run.windows(2) {
            prop_assert!(pair[1].dist <= pair[0].dist * (1.0 + 1e-12) + 1e-15);
        }
        for s in &run {
            prop_assert!((s.x - s.exact).norm() <= 1e-12 * s.exact.norm().max(1.0));
        }
    }

    #[test]
    fn line_fit_recovers_exact_lines(a in -5.0f64..5.0, b in -5.0f64..5.0, n in 2usize..10) {
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * 0.7 - 1.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        prop_assert!((fit.slope - a).abs() <= 1e-10 && (fit.intercept - b).abs() <= 1e-10);
    }

    #[test]
    fn config_echo_round_trips(
        k in 1.0f64..8.0, eps in 1e-4f64..1.0, mu in 0.0f64..3.0, seed in any::<u32>(),
        dt in 1e-4f64..0.1, kappa in proptest::option::of(1.0f64..6.0),
    ) {
        let mut text = format!(
            "seed = {seed}\n[domain]\nk_max = {k:?}\n[physics]\nepsilon = {eps:?}\nmu = {mu:?}\n[solver]\ndt = {dt:?}\n"
        );
        if let Some(kappa) = kappa {
            text.push_str(&format!("[manifold]\nkappa = {kappa:?}\n"));
        }
        let c = parse_config(&text).unwrap();
        let again = parse_config(&c.echo()).unwrap();
        prop_assert_eq!(&again, &c);
        prop_assert_eq!(again.echo(), c.echo());
    }
}
