use cycling_lab::experiments::analysis::{circular_mode, resultant_length, wrapped_histogram};
use cycling_lab::kernel::{eig_sandwich, gap_bound, laplace_identity, principal_eigs, KernelEstimate};
use cycling_lab::model::{BenchmarkParams, PolarModel};
use cycling_lab::numerics::{circ_diff, frac};
use cycling_lab::sim::{batch_sample, SimConfig};
use cycling_lab::theory::{cycling_profile, wrapped_cdf, DEFAULT_SERIES_TOL};
use proptest::prelude::*;

fn kernel() -> impl Strategy<Value = KernelEstimate> {
    (2usize..6)
        .prop_flat_map(|n| (prop::collection::vec(0.05f64..1.0, n * n), prop::collection::vec(0.3f64..1.0, n)))
        .prop_map(|(w, keep)| {
            let n = keep.len();
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let row = &w[i * n..(i + 1) * n];
                    let s: f64 = row.iter().sum();
                    row.iter().map(|x| x / s * keep[i]).collect()
                })
                .collect();
            KernelEstimate::from_matrix(&rows).unwrap()
        })
}

proptest! {
    #[test]
    fn frac_lies_in_unit_interval(x in -1e6f64..1e6) {
        let f = frac(x);
        prop_assert!((0.0..1.0).contains(&f));
        prop_assert!(((x - f) - (x - f).round()).abs() < 1e-6);
    }

    #[test]
    fn circ_diff_is_a_short_lift(a in -50.0f64..50.0, b in -50.0f64..50.0) {
        let d = circ_diff(a, b);
        prop_assert!((-0.5..0.5).contains(&d));
        let k = a - b - d;
        prop_assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn histogram_has_unit_mass(values in prop::collection::vec(-20.0f64..20.0, 1..400), bins in 2usize..80) {
        let h = wrapped_histogram(&values, 1.0 / bins as f64);
        prop_assert_eq!(h.len(), bins);
        prop_assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let m = circular_mode(&h, 1);
        prop_assert!((0.0..1.0).contains(&m));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&resultant_length(&values)));
    }

    #[test]
    fn wrapped_cdf_is_a_cdf(lt in 0.2f64..8.0, c in -3.0f64..3.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(wrapped_cdf(lt, c, 0.0).abs() < 1e-12);
        prop_assert!((wrapped_cdf(lt, c, 1.0) - 1.0).abs() < 1e-10);
        prop_assert!(wrapped_cdf(lt, c, lo) <= wrapped_cdf(lt, c, hi) + 1e-12);
        prop_assert!((wrapped_cdf(lt, c + 1.0, hi) - wrapped_cdf(lt, c, hi)).abs() < 1e-10);
    }

    #[test]
    fn profile_is_positive_and_periodic(lt in 0.2f64..12.0, x in -3.0f64..3.0) {
        let q = cycling_profile(lt, x, DEFAULT_SERIES_TOL);
        prop_assert!(q > 0.0);
        prop_assert!((cycling_profile(lt, x + 1.0, DEFAULT_SERIES_TOL) - q).abs() < 1e-11);
    }

    #[test]
    fn spectral_bounds_hold(k in kernel()) {
        let s = principal_eigs(&k).unwrap();
        prop_assert!(s.lambda0 > 0.0 && s.lambda0 <= 1.0 + 1e-12);
        prop_assert!(s.lambda1_mod <= s.lambda0 + 1e-9);
        let all: Vec<usize> = (0..k.n()).collect();
        for n in [1, 2, 4] {
            prop_assert!(eig_sandwich(&k, s.lambda0, &all, n).unwrap().holds);
        }
        let g = gap_bound(&k, s.lambda0, &all).unwrap();
        prop_assert!(g.bound + 1e-12 >= s.lambda1_mod);
        prop_assert!(laplace_identity(&k, &[0], 0.0).unwrap().residual < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn exit_samples_are_consistent(seed in any::<u64>(), sigma in 0.4f64..0.7) {
        let m = PolarModel::benchmark(BenchmarkParams::default()).unwrap();
        let cfg = SimConfig { sigma, dt: 5e-3, master_seed: seed, max_phase: 8.0, ..Default::default() };
        let batch = batch_sample(&m, &cfg, 0.0, 40, Some(1)).unwrap();
        prop_assert_eq!(batch.samples.len(), 40);
        for (i, s) in batch.samples.iter().enumerate() {
            prop_assert_eq!(s.path_index, i as u64);
            prop_assert!((0.0..1.0).contains(&s.fraction));
            prop_assert!((s.winding as f64 + s.fraction - s.phi_tau).abs() < 1e-9);
            prop_assert!(s.tau_time >= 0.0);
            if let Some(p) = s.phi_tau_minus {
                prop_assert!(p <= s.phi_tau);
            }
            if s.censored {
                prop_assert!(s.phi_tau >= cfg.max_phase - 1e-9);
            }
        }
    }
}
