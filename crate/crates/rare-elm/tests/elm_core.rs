use proptest::prelude::*;
use rare_elm::elm::{
    constrained_minimize, evaluate, gradient_d, hessian_d, jacobi_solve, objective_d, scheme_a_problem, scheme_a_run,
    two_density_run, KnownConstant, LinearConstraints, SchemeAOptions, SolverOptions, WeightMatrix,
};
use rare_elm::estimators::sample_stats;
use rare_elm::{ProblemSpec, RandomStream};

/// Random weights with roughly a fifth of the off-source entries zero.
fn random_matrix(s: usize, per: usize, seed: u64) -> WeightMatrix {
    let mut rng = RandomStream::new(seed, 0);
    let n = s * per;
    let sources: Vec<usize> = (0..n).map(|j| j % s).collect();
    let mut log_w = Vec::with_capacity(s * n);
    for &src in &sources {
        for t in 0..s {
            let v = 6.0 * rng.uniform() - 3.0;
            log_w.push(if t != src && rng.uniform() < 0.2 {
                f64::NEG_INFINITY
            } else {
                v
            });
        }
    }
    WeightMatrix::from_log_columns(s, log_w, sources).unwrap()
}

fn lambdas_of(w: &WeightMatrix) -> Vec<f64> {
    w.counts().iter().map(|&c| c as f64 / w.n() as f64).collect()
}

fn log_sum_exp(v: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn matrix_strategy() -> impl Strategy<Value = (WeightMatrix, Vec<f64>)> {
    (2usize..6, 3usize..25, any::<u64>(), 0u64..u64::MAX).prop_map(|(s, per, seed, zseed)| {
        let w = random_matrix(s, per, seed);
        let mut r = RandomStream::new(zseed, 1);
        let z = (0..s).map(|_| 8.0 * r.uniform() - 4.0).collect();
        (w, z)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn objective_is_translation_invariant((w, z) in matrix_strategy(), c in -5.0f64..5.0) {
        let lam = lambdas_of(&w);
        let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
        let a = objective_d(&w, &z, &lam).unwrap();
        let b = objective_d(&w, &shifted, &lam).unwrap();
        prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{} vs {}", a, b);
        let e = evaluate(&w, &z, &lam, true).unwrap();
        prop_assert!(e.gradient.sum().abs() < 1e-12);
        let h = e.hessian.unwrap();
        for i in 0..w.s() {
            prop_assert!(h.row(i).sum().abs() < 1e-12);
        }
    }

    #[test]
    fn objective_is_convex((w, z1) in matrix_strategy(), zseed in any::<u64>(), theta in 0.0f64..1.0) {
        let lam = lambdas_of(&w);
        let mut r = RandomStream::new(zseed, 2);
        let z2: Vec<f64> = (0..w.s()).map(|_| 8.0 * r.uniform() - 4.0).collect();
        let mid: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
        let dm = objective_d(&w, &mid, &lam).unwrap();
        let d1 = objective_d(&w, &z1, &lam).unwrap();
        let d2 = objective_d(&w, &z2, &lam).unwrap();
        prop_assert!(dm <= theta * d1 + (1.0 - theta) * d2 + 1e-10);
    }

    #[test]
    fn derivatives_match_central_differences((w, z) in matrix_strategy()) {
        let lam = lambdas_of(&w);
        let s = w.s();
        let g = gradient_d(&w, &z, &lam).unwrap();
        let h = hessian_d(&w, &z, &lam).unwrap();
        let bump = |v: &[f64], i: usize, d: f64| {
            let mut out = v.to_vec();
            out[i] += d;
            out
        };
        let eps = 1e-5;
        for (i, gi) in g.iter().enumerate() {
            let fd = (objective_d(&w, &bump(&z, i, eps), &lam).unwrap()
                - objective_d(&w, &bump(&z, i, -eps), &lam).unwrap())
                / (2.0 * eps);
            prop_assert!((fd - gi).abs() < 1e-6 * (1.0 + gi.abs()), "grad {}: {} vs {}", i, fd, gi);
        }
        let eps = 1e-4;
        for j in 0..s {
            let gp = gradient_d(&w, &bump(&z, j, eps), &lam).unwrap();
            let gm = gradient_d(&w, &bump(&z, j, -eps), &lam).unwrap();
            for i in 0..s {
                let fd = (gp[i] - gm[i]) / (2.0 * eps);
                prop_assert!((fd - h[(i, j)]).abs() < 1e-5 * (1.0 + h[(i, j)].abs()), "hess {},{}: {} vs {}", i, j, fd, h[(i, j)]);
            }
        }
    }
}

#[test]
fn jacobi_and_optimizer_agree_on_scheme_a_matrices() {
    // Settings where every block overlaps the others both ways, so the
    // homogeneous-only maximizer is finite.
    let settings = [
        (0.2, 1e4, true),
        (0.5, 100.0, true),
        (0.1, 1e10, false),
        (0.2, 1e4, false),
        (0.5, 100.0, false),
    ];
    for k in 0..20u64 {
        let (alpha, gamma, include_f3) = settings[k as usize % settings.len()];
        let spec = ProblemSpec::new(10, alpha, gamma).unwrap();
        let opts = SchemeAOptions::equal(1000, include_f3);
        let p = scheme_a_problem(&spec, &opts, &RandomStream::new(100 + k, 0)).unwrap();
        let lam = p.sequence.lambdas();
        let known = p.sequence.reference();
        let sol = constrained_minimize(
            &p.weights,
            &lam,
            &LinearConstraints::homogeneous(&lam),
            known,
            SolverOptions::default(),
        )
        .unwrap();
        let jac = jacobi_solve(&p.weights, &p.sequence.counts(), known, 1e-13).unwrap();
        for (t, (a, b)) in sol.ell_hat.iter().zip(&jac).enumerate() {
            assert!(rel(*a, *b) < 1e-6, "matrix {k}, density {t}: {a} vs {b}");
        }
    }
}

#[test]
fn solution_satisfies_moment_matching() {
    let spec = ProblemSpec::new(10, 0.9, 30.0).unwrap();
    let opts = SchemeAOptions::equal(2000, true);
    let p = scheme_a_problem(&spec, &opts, &RandomStream::new(9, 0)).unwrap();
    let lam = p.sequence.lambdas();
    let sol = constrained_minimize(
        &p.weights,
        &lam,
        &p.sequence.default_constraints(),
        p.sequence.reference(),
        SolverOptions::default(),
    )
    .unwrap();
    let w = &p.weights;
    let log_n: Vec<f64> = w.counts().iter().map(|&c| (c as f64).ln()).collect();
    let log_den: Vec<f64> = (0..w.n())
        .map(|j| log_sum_exp((0..w.s()).map(|k| log_n[k] + w.log_entry(k, j) - sol.log_ell_hat[k])))
        .collect();
    // f₃ and f_s appear in no constraint row besides the homogeneous one.
    for t in [2, 3] {
        let lhs = log_sum_exp((0..w.n()).map(|j| w.log_entry(t, j) - log_den[j]));
        assert!(
            rel(lhs.exp(), sol.ell_hat[t]) < 1e-6,
            "density {t}: {} vs {}",
            lhs.exp(),
            sol.ell_hat[t]
        );
    }
}

#[test]
fn two_density_recovers_the_weibull_tail() {
    for &(alpha, gamma) in &[(0.5, 4.0), (1.0, 3.0), (0.2, 10.0)] {
        let spec = ProblemSpec::new(1, alpha, gamma).unwrap();
        let root = RandomStream::new(12, 0);
        let runs: Vec<f64> = (0..30)
            .map(|k| two_density_run(&spec, 2000, &root.substream(k)).unwrap().ell_s)
            .collect();
        let (mean, sd) = sample_stats(&runs);
        let exact = (-f64::powf(gamma, alpha)).exp();
        let se = sd / 30f64.sqrt();
        assert!(
            (mean - exact).abs() < 3.0 * se,
            "({alpha}, {gamma}): {mean} vs {exact} (se {se})"
        );
    }
}

#[test]
fn known_constants_are_reproduced_exactly() {
    let spec = ProblemSpec::new(10, 0.2, 1e4).unwrap();
    let r = scheme_a_run(&spec, &SchemeAOptions::equal(2000, true), &RandomStream::new(13, 0)).unwrap();
    let l1 = 10f64.ln() - 1e4f64.powf(0.2);
    assert!((r.solution.log_ell_hat[0] - l1).abs() < 1e-12);
    assert!(r.solution.log_ell_hat[1].abs() < 1e-9);
    assert!(r.ell_s > 0.0 && r.ell_s < 1.0);
}

#[test]
fn disconnected_support_is_rejected() {
    let rows = vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]];
    let w = WeightMatrix::from_rows(&rows, vec![0, 0, 1, 1]).unwrap();
    let lam = [0.5, 0.5];
    let r = constrained_minimize(
        &w,
        &lam,
        &LinearConstraints::homogeneous(&lam),
        KnownConstant::new(0, 1.0),
        SolverOptions::default(),
    );
    assert!(matches!(r, Err(rare_elm::Error::Disconnected(_))));
}
