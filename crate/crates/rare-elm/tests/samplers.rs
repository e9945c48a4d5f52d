use proptest::prelude::*;
use rare_elm::elm::{check_connectivity, scheme_a_problem, SchemeAOptions};
use rare_elm::samplers::{
    build_marginal_table, gibbs_f3, gibbs_fs, gibbs_lower_bound_density, gibbs_scheme_b, marginal_ratio, row_sum,
    sample_f1, sample_f2, MarginalTable,
};
use rare_elm::{ProblemSpec, RandomStream};

fn batch_mean_se(xs: &[f64], batches: usize) -> (f64, f64) {
    let size = xs.len() / batches;
    let means: Vec<f64> = xs
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let k = means.len() as f64;
    let m = means.iter().sum::<f64>() / k;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (k - 1.0);
    (m, (var / k).sqrt())
}

#[test]
fn every_block_respects_its_support() {
    for &(d, alpha, gamma) in &[(2, 0.5, 10.0), (5, 0.2, 1e4), (10, 0.9, 30.0), (3, 1.0, 0.5)] {
        let spec = ProblemSpec::new(d, alpha, gamma).unwrap();
        let rng = RandomStream::new(77, d as u64);
        let fs = gibbs_fs(&spec, 2000, &mut rng.substream(0)).unwrap();
        assert!(fs.rows().all(|x| row_sum(x) >= gamma && x.iter().all(|&v| v >= 0.0)));
        let f3 = gibbs_f3(&spec, 2000, &mut rng.substream(1)).unwrap();
        assert!(f3
            .rows()
            .all(|x| row_sum(x) >= gamma && x.iter().all(|&v| v < gamma && v >= 0.0)));
        let f1 = sample_f1(&spec, 2000, &mut rng.substream(2)).unwrap();
        assert!(f1.rows().all(|x| x.iter().any(|&v| v >= gamma)));
        let table = build_marginal_table(&spec, &fs, 0.5, true, &mut rng.substream(3)).unwrap();
        let lo = table.sorted_constants(0)[0];
        let f2 = sample_f2(&table, 2000, &mut rng.substream(4)).unwrap();
        assert!(f2
            .rows()
            .all(|x| x.iter().all(|&v| v >= lo) && marginal_ratio(&table, x) > 0.0));
        let b = gibbs_scheme_b(&spec, 2000, &mut rng.substream(5)).unwrap();
        for y in b.rows() {
            assert!(y.windows(2).all(|p| p[0] <= p[1]));
            assert!(y.iter().map(|v| v.powf(1.0 / alpha)).sum::<f64>() >= gamma * (1.0 - 1e-12));
        }
    }
}

#[test]
fn default_starts_are_feasible_for_awkward_thresholds() {
    let mut rng = RandomStream::new(41, 0);
    for d in [3, 7, 10, 13] {
        for &alpha in &[0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
            for &gamma in &[0.7, 1.1, 30.0, 31.7, 1e3 / 3.0, 1e10] {
                let spec = ProblemSpec::new(d, alpha, gamma).unwrap();
                gibbs_fs(&spec, 2, &mut rng).unwrap();
                gibbs_f3(&spec, 2, &mut rng).unwrap();
                gibbs_scheme_b(&spec, 2, &mut rng).unwrap();
            }
        }
    }
}

#[test]
fn scheme_a_support_graph_is_connected() {
    for &(alpha, gamma) in &[(0.2, 1e4), (0.9, 30.0), (0.1, 1e10)] {
        let spec = ProblemSpec::new(10, alpha, gamma).unwrap();
        for include_f3 in [false, true] {
            let p = scheme_a_problem(
                &spec,
                &SchemeAOptions::equal(2000, include_f3),
                &RandomStream::new(5, 0),
            )
            .unwrap();
            let c = check_connectivity(&p.weights);
            assert!(c.connected, "alpha {alpha}: {:?}", c.components);
        }
    }
}

#[test]
fn near_unconditioned_chain_matches_conditional_mean() {
    let gamma = 0.01;
    let spec = ProblemSpec::new(2, 1.0, gamma).unwrap();
    let block = gibbs_fs(&spec, 200_000, &mut RandomStream::new(31, 0)).unwrap();
    let xs: Vec<f64> = block.rows().map(|r| r[0]).collect();
    let (mean, se) = batch_mean_se(&xs, 100);
    // X₁ + X₂ ~ Gamma(2, 1) given S ≥ γ, and E[X₁ | S] = S/2.
    let exact = (gamma * gamma + 2.0 * gamma + 2.0) / (2.0 * (1.0 + gamma));
    assert!((mean - exact).abs() < 3.0 * se, "{mean} vs {exact} (se {se})");
}

#[test]
fn linearized_chain_reduces_to_exponential_order_statistics() {
    let n = 100_000;
    let d = 4;
    let betas = vec![1.0; d];
    let block = gibbs_lower_bound_density(&betas, 1e-12, n, &mut RandomStream::new(8, 0)).unwrap();
    let mut rng = RandomStream::new(8, 1);
    let mut sorted: Vec<Vec<f64>> = (0..d).map(|_| Vec::with_capacity(n)).collect();
    for _ in 0..n {
        let mut e: Vec<f64> = (0..d).map(|_| -rng.uniform_pos().ln()).collect();
        e.sort_by(f64::total_cmp);
        for (i, v) in e.into_iter().enumerate() {
            sorted[i].push(v);
        }
    }
    let crit = 1.628 * (2.0 / n as f64).sqrt();
    for i in 0..d {
        let chain: Vec<f64> = block.rows().map(|r| r[i]).collect();
        let ks = two_sample_ks(chain, sorted[i].clone());
        assert!(ks < crit, "order statistic {i}: KS {ks} vs {crit}");
    }
}

fn two_sample_ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut best) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

fn brute_ratio(constants: &[f64], alpha: f64, x: &[f64]) -> f64 {
    let m = constants.len() as f64;
    x.iter()
        .map(|&xi| {
            constants
                .iter()
                .filter(|&&c| xi >= c)
                .map(|c| c.powf(alpha).exp())
                .sum::<f64>()
                / m
        })
        .product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn marginal_ratio_matches_brute_force(
        alpha in 0.1f64..1.0,
        rows in 1usize..40,
        seed in 0u64..10_000,
        x in proptest::collection::vec(0.0f64..8.0, 3),
    ) {
        let d = 3;
        let spec = ProblemSpec::new(d, alpha, 6.0).unwrap();
        let mut rng = RandomStream::new(seed, 0);
        let constants: Vec<f64> = (0..rows * d).map(|_| 6.0 * rng.uniform()).collect();
        let table = MarginalTable::from_constants(&spec, constants.clone(), rows).unwrap();
        let got = marginal_ratio(&table, &x);
        let want = brute_ratio(&constants, alpha, &x);
        if want == 0.0 {
            prop_assert_eq!(got, 0.0);
        } else {
            prop_assert!((got / want - 1.0).abs() < 1e-12, "{} vs {}", got, want);
        }
    }
}
