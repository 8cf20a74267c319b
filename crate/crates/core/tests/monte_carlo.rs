use fou_bounds::bounds::{
    fbm_sup_bound, tail_bound, variance_exact, EntropyMethod, ModelConfig, Regime,
};
use fou_bounds::experiments::{
    estimate_mean_sup, estimate_tail, estimate_variance_at, ExperimentSpec, Process,
};
use fou_bounds::sim::{
    fou_from_fbm, sample_fbm, FbmSampler, SamplerConfig, SamplingMethod, TimeGrid,
};

const PATHS: usize = 100_000;

fn spec(h: f64, t: f64, grid_n: usize, seed: u64) -> ExperimentSpec {
    let cfg = ModelConfig::new(h, t, 1.0).unwrap();
    let mut s = ExperimentSpec::new(cfg, vec![], PATHS, vec![grid_n]);
    s.sampler = SamplerConfig::new(SamplingMethod::CirculantEmbedding, seed);
    s
}

#[test]
fn fou_variance_at_one_matches_quadrature() {
    let s = spec(0.7, 1.0, 1025, 3);
    let est = estimate_variance_at(&s, 1024, 1025).unwrap();
    let exact = variance_exact(&s.cfg, 1.0).unwrap();
    assert!(
        (est.mean - exact).abs() <= 3.0 * est.stderr,
        "{} +/- {} vs {exact}",
        est.mean,
        est.stderr
    );
}

#[test]
fn self_similarity_of_the_supremum() {
    let unit = estimate_mean_sup(&spec(0.7, 1.0, 1025, 11), Process::Fbm, 1025).unwrap();
    let scaled = estimate_mean_sup(&spec(0.7, 3.0, 1025, 12), Process::Fbm, 1025).unwrap();
    let factor = 3f64.powf(0.7);
    let combined_se = (scaled.stderr.powi(2) + (factor * unit.stderr).powi(2)).sqrt();
    assert!(
        (scaled.mean - factor * unit.mean).abs() <= 3.0 * combined_se,
        "{} vs {}",
        scaled.mean,
        factor * unit.mean
    );
}

#[test]
fn smooth_fbm_respects_the_debicki_bound() {
    let est = estimate_mean_sup(&spec(0.9, 1.0, 1025, 5), Process::Fbm, 1025).unwrap();
    let bound = fbm_sup_bound(0.9, 1.0, EntropyMethod::Debicki).unwrap().value;
    assert!(est.mean <= bound + 3.0 * est.stderr, "{} > {bound}", est.mean);
}

#[test]
fn low_barrier_tail_estimate_is_below_the_clamped_bound() {
    let s = spec(0.5, 1.0, 4097, 0);
    let p = estimate_tail(&s, 2.0, 4097).unwrap();
    // u = 2 sits below the threshold, so the bound is the trivial 1.
    let bound = tail_bound(&s.cfg, 2.0, Regime::Theorem1HalfToOne).unwrap_or(1.0).min(1.0);
    assert!(p.mean - 3.0 * p.stderr <= bound);
}

#[test]
fn samplers_agree_on_the_supremum_distribution() {
    let grid = TimeGrid::new(1.0, 65).unwrap();
    let mut means = Vec::new();
    for method in [SamplingMethod::Cholesky, SamplingMethod::CirculantEmbedding] {
        let sampler = FbmSampler::new(&grid, 0.3, &SamplerConfig::new(method, 21)).unwrap();
        let sups = sampler.map_paths(21, 50_000, |p| p.iter().copied().fold(0.0, f64::max));
        let n = sups.len() as f64;
        let mean = sups.iter().sum::<f64>() / n;
        let var = sups.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        means.push((mean, (var / n).sqrt()));
    }
    let (a, b) = (means[0], means[1]);
    let se = (a.1 * a.1 + b.1 * b.1).sqrt();
    assert!((a.0 - b.0).abs() <= 3.0 * se, "{a:?} vs {b:?}");
}

#[test]
fn fou_path_is_linear_in_eps_for_sampled_paths() {
    let grid = TimeGrid::new(2.0, 129).unwrap();
    let cfg = SamplerConfig::new(SamplingMethod::Cholesky, 4);
    for path in sample_fbm(&grid, 0.4, &cfg, 5).unwrap() {
        let one = fou_from_fbm(&path, 1.5);
        let two = fou_from_fbm(&path, 3.0);
        for (x, y) in one.values.iter().zip(&two.values) {
            assert_eq!(2.0 * x, *y);
        }
    }
}
