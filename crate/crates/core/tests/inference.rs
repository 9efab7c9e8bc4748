use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use svmpc::inference::{
    ksd_estimate, particle_mean, posterior_score, svgd_step, KernelSpec, ParamBox, ParticleSet, PosteriorModel, SignMode,
    SvgdConfig,
};
use svmpc::Result;

fn wide_box(d: usize) -> ParamBox {
    ParamBox::new(vec![-10.0; d], vec![10.0; d]).unwrap()
}

fn config(alpha: f64, kernel: KernelSpec) -> SvgdConfig {
    SvgdConfig {
        step_size: alpha,
        kernel,
        ..SvgdConfig::default()
    }
}

/// Adversarial posterior `exp(gap)` equal to a standard normal on the box.
fn std_normal(d: usize) -> PosteriorModel<impl Fn(&[f64]) -> Result<f64> + Sync> {
    PosteriorModel::new(wide_box(d), |t: &[f64]| Ok(-0.5 * t.iter().map(|x| x * x).sum::<f64>()))
}

fn moments(p: &ParticleSet) -> (f64, f64) {
    let v: Vec<f64> = p.iter().map(|t| t[0]).collect();
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, var.sqrt())
}

#[test]
fn kernel_closed_forms() {
    let rbf = KernelSpec::Rbf { bandwidth: 1.0 };
    assert_eq!(rbf.eval(&[0.3, 0.2], &[0.3, 0.2]).unwrap(), 1.0);
    assert_abs_diff_eq!(rbf.eval(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
    let imq = KernelSpec::imq_default();
    assert_abs_diff_eq!(imq.eval(&[1.0, 1.0, 1.0], &[0.0; 3]).unwrap(), 0.5, epsilon = 1e-15);
    assert_eq!(KernelSpec::Constant.eval(&[4.0], &[-2.0]).unwrap(), 1.0);

    assert_abs_diff_eq!(rbf.grad(&[1.0], &[0.0]).unwrap()[0], -2.0 * (-1.0f64).exp(), epsilon = 1e-15);
    for k in [rbf, imq, KernelSpec::Constant] {
        assert_eq!(k.grad(&[0.4, -1.0], &[0.4, -1.0]).unwrap(), vec![0.0, 0.0]);
    }
    assert!(rbf.eval(&[1.0], &[1.0, 2.0]).is_err());
    assert!(imq.grad(&[1.0], &[1.0, 2.0]).is_err());
}

fn kernel_strategy() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (0.2f64..5.0).prop_map(|h| KernelSpec::Rbf { bandwidth: h }),
        (0.2f64..3.0, 0.1f64..2.0).prop_map(|(b, d)| KernelSpec::Imq { bandwidth: b, decay: d }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Analytic kernel gradient against a central difference of the kernel.
    #[test]
    fn kernel_gradient_matches_finite_difference(
        kernel in kernel_strategy(),
        a in prop::collection::vec(-2.0f64..2.0, 3),
        b in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let g = kernel.grad(&a, &b).unwrap();
        let h = 1e-5;
        for i in 0..3 {
            let mut ap = a.clone();
            let mut am = a.clone();
            ap[i] += h;
            am[i] -= h;
            let fd = (kernel.eval(&ap, &b).unwrap() - kernel.eval(&am, &b).unwrap()) / (2.0 * h);
            let scale = g[i].abs().max(1e-3);
            prop_assert!((fd - g[i]).abs() / scale < 1e-6, "coord {i}: fd {fd} vs {}", g[i]);
        }
    }

    /// Random quadratic gap in d = 3 against its analytic gradient.
    #[test]
    fn posterior_score_matches_analytic_gradient(
        diag in prop::collection::vec(0.1f64..3.0, 3),
        off in prop::collection::vec(-0.5f64..0.5, 3),
        center in prop::collection::vec(-1.0f64..1.0, 3),
        theta in prop::collection::vec(-2.0f64..2.0, 3),
        favoring in any::<bool>(),
    ) {
        let a = [
            [diag[0], off[0], off[1]],
            [off[0], diag[1], off[2]],
            [off[1], off[2], diag[2]],
        ];
        let gap = |t: &[f64]| -> Result<f64> {
            let mut v = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    v += 0.5 * (t[i] - center[i]) * a[i][j] * (t[j] - center[j]);
                }
            }
            Ok(v)
        };
        let model = PosteriorModel::new(ParamBox::new(vec![-5.0; 3], vec![5.0; 3]).unwrap(), gap);
        let mut cfg = SvgdConfig::default();
        if favoring {
            cfg.sign_mode = SignMode::Favoring;
        }
        let s = posterior_score(&theta, &model, &cfg).unwrap();
        for i in 0..3 {
            let analytic: f64 = (0..3).map(|j| a[i][j] * (theta[j] - center[j])).sum();
            let expected = cfg.sign_mode.sign() * analytic;
            prop_assert!((s[i] - expected).abs() < 1e-4, "coord {i}: {} vs {expected}", s[i]);
        }
    }

    #[test]
    fn svgd_is_permutation_equivariant(
        rows in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 2..8),
        kernel in kernel_strategy(),
        shift in 1usize..7,
    ) {
        let model = std_normal(2);
        let cfg = config(0.1, kernel);
        let n = rows.len();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let a = svgd_step(&ParticleSet::from_rows(rows, wide_box(2)).unwrap(), &model, &kernel, &cfg).unwrap();
        let b = svgd_step(&ParticleSet::from_rows(permuted, wide_box(2)).unwrap(), &model, &kernel, &cfg).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            for (x, y) in a.particle(i).iter().zip(b.particle(k)) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn particles_stay_in_the_box(
        seed in any::<u64>(),
        alpha in 0.01f64..5.0,
        steps in 1usize..30,
        kernel in prop_oneof![kernel_strategy(), Just(KernelSpec::Constant)],
    ) {
        // A steep linear potential pushes everything against the upper face.
        let bounds = ParamBox::new(vec![0.3, 0.3], vec![1.0, 1.0]).unwrap();
        let model = PosteriorModel::new(bounds.clone(), |t: &[f64]| Ok(50.0 * t[0] - 20.0 * t[1]));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = ParticleSet::sample_uniform(6, bounds.clone(), &mut rng).unwrap();
        let cfg = config(alpha, kernel);
        for _ in 0..steps {
            p = svgd_step(&p, &model, &kernel, &cfg).unwrap();
            for t in p.iter() {
                prop_assert!(bounds.contains(t));
                prop_assert!(t.iter().all(|v| v.is_finite()));
            }
        }
    }
}

#[test]
fn constant_kernel_is_parallel_gradient_ascent() {
    let bounds = wide_box(2);
    let gap = |t: &[f64]| Ok((t[0] - 1.0).powi(2) * 0.3 + t[1].sin());
    let model = PosteriorModel::new(bounds.clone(), gap);
    let cfg = config(0.05, KernelSpec::Constant);
    let rows = vec![vec![0.1, 0.2], vec![-1.5, 2.0], vec![3.0, -0.7]];
    let p = ParticleSet::from_rows(rows.clone(), bounds).unwrap();
    let next = svgd_step(&p, &model, &KernelSpec::Constant, &cfg).unwrap();
    for (i, row) in rows.iter().enumerate() {
        let s = posterior_score(row, &model, &cfg).unwrap();
        let expected: Vec<f64> = row.iter().zip(&s).map(|(t, g)| t + 0.05 * g).collect();
        assert_eq!(next.particle(i), expected.as_slice());
    }
}

#[test]
fn single_particle_moves_along_its_score() {
    let model = PosteriorModel::new(wide_box(1), |t: &[f64]| Ok((t[0] - 1.0).powi(2)));
    for kernel in [KernelSpec::default(), KernelSpec::imq_default(), KernelSpec::Constant] {
        let cfg = config(0.1, kernel);
        let p = ParticleSet::from_rows(vec![vec![2.0]], wide_box(1)).unwrap();
        let s = posterior_score(&[2.0], &model, &cfg).unwrap()[0];
        assert_abs_diff_eq!(s, 2.0, epsilon = 1e-6);
        let next = svgd_step(&p, &model, &kernel, &cfg).unwrap();
        let k_self = kernel.eval(&[2.0], &[2.0]).unwrap();
        assert_abs_diff_eq!(next.particle(0)[0], 2.0 + 0.1 * k_self * s, epsilon = 1e-12);
    }
}

#[test]
fn coincident_particles_receive_identical_updates() {
    let model = std_normal(2);
    let kernel = KernelSpec::default();
    let p = ParticleSet::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5], vec![-1.0, 2.0]], wide_box(2)).unwrap();
    let next = svgd_step(&p, &model, &kernel, &config(0.2, kernel)).unwrap();
    assert_eq!(next.particle(0), next.particle(1));
    assert_ne!(next.particle(0), next.particle(2));
}

#[test]
fn flat_gap_gives_zero_score() {
    let model = PosteriorModel::new(wide_box(2), |_: &[f64]| Ok(4.2));
    assert_eq!(posterior_score(&[0.3, -0.1], &model, &SvgdConfig::default()).unwrap(), vec![0.0, 0.0]);
}

/// Long-run moments of the particle flow on a standard normal target.
#[test]
fn svgd_recovers_standard_normal_moments() {
    let model = std_normal(1);
    let kernel = KernelSpec::Rbf { bandwidth: 1.0 };
    let cfg = config(0.05, kernel);
    let bounds = wide_box(1);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows: Vec<Vec<f64>> = (0..50).map(|_| vec![rand::Rng::random_range(&mut rng, -4.0..-1.0)]).collect();
    let mut p = ParticleSet::from_rows(rows, bounds).unwrap();
    let ksd0 = ksd_estimate(&p, &model, &kernel, &cfg).unwrap();
    for _ in 0..2000 {
        p = svgd_step(&p, &model, &kernel, &cfg).unwrap();
    }
    let (m, s) = moments(&p);
    assert!(m.abs() < 0.05, "mean {m}");
    assert!((s - 1.0).abs() < 0.1, "std {s}");
    let ksd1 = ksd_estimate(&p, &model, &kernel, &cfg).unwrap();
    assert!(ksd1 < ksd0, "ksd {ksd0} -> {ksd1}");
}

#[test]
fn ksd_at_the_mode_is_the_trace_term() {
    let model = std_normal(1);
    let p = ParticleSet::from_rows(vec![vec![0.0]], wide_box(1)).unwrap();
    let v = ksd_estimate(&p, &model, &KernelSpec::default(), &SvgdConfig::default()).unwrap();
    assert_abs_diff_eq!(v, 2.0, epsilon = 1e-9);
}

#[test]
fn ksd_of_exact_samples_is_small() {
    let model = std_normal(1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..500).map(|_| vec![StandardNormal.sample(&mut rng)]).collect();
    let p = ParticleSet::from_rows(rows, wide_box(1)).unwrap();
    for kernel in [KernelSpec::default(), KernelSpec::imq_default()] {
        let v = ksd_estimate(&p, &model, &kernel, &SvgdConfig::default()).unwrap();
        assert!(v < 0.1, "{} ksd {v}", kernel.name());
    }
}

#[test]
fn ksd_ranks_displaced_particles_higher() {
    let model = std_normal(1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let matched: Vec<Vec<f64>> = (0..20).map(|_| vec![StandardNormal.sample(&mut rng)]).collect();
    let far = vec![vec![5.0]; 20];
    let cfg = SvgdConfig::default();
    for kernel in [KernelSpec::default(), KernelSpec::imq_default()] {
        let a = ksd_estimate(&ParticleSet::from_rows(matched.clone(), wide_box(1)).unwrap(), &model, &kernel, &cfg).unwrap();
        let b = ksd_estimate(&ParticleSet::from_rows(far.clone(), wide_box(1)).unwrap(), &model, &kernel, &cfg).unwrap();
        assert!(b > a, "{}: far {b} vs matched {a}", kernel.name());
        assert!(a >= -1e-10);
    }
}

#[test]
fn ksd_rejects_constant_kernel() {
    let model = std_normal(1);
    let p = ParticleSet::from_rows(vec![vec![0.0]], wide_box(1)).unwrap();
    assert!(matches!(
        ksd_estimate(&p, &model, &KernelSpec::Constant, &SvgdConfig::default()),
        Err(svmpc::Error::UnsupportedKernel(_))
    ));
}

#[test]
fn particle_mean_examples() {
    let b = ParamBox::new(vec![0.0, 0.0], vec![5.0, 5.0]).unwrap();
    let p = ParticleSet::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]], b.clone()).unwrap();
    assert_eq!(particle_mean(&p), vec![2.0, 3.0]);
    let one = ParticleSet::from_rows(vec![vec![1.5, 0.5]], b).unwrap();
    assert_eq!(particle_mean(&one), vec![1.5, 0.5]);

    let prior = ParamBox::new(vec![0.3, 0.3], vec![1.0, 1.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let drawn = ParticleSet::sample_uniform(5, prior.clone(), &mut rng).unwrap();
    assert!(prior.contains(&particle_mean(&drawn)));
}
