use doob_fiducial::engine::{step, ChainState};
use doob_fiducial::models::{copula_df_step, normalmv_step, uniform2_step, DfGrid, ModelSpec, DEFAULT_CLAMP};
use doob_fiducial::special::normal_cdf;
use proptest::prelude::*;

fn scalar_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::normal(0.7).unwrap(),
        ModelSpec::gamma(2.5).unwrap(),
        ModelSpec::gamma(0.4).unwrap(),
        ModelSpec::exponential(),
        ModelSpec::uniform(),
    ]
}

fn innovation_for(model: &ModelSpec, u: f64) -> f64 {
    match model.name() {
        "normal" => doob_fiducial::special::normal_quantile(u),
        "uniform" => u,
        _ => -u.ln() * 3.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn step_matches_additive_decomposition(
        which in 0usize..5,
        t in 1e-3f64..1e3,
        u in 1e-12f64..(1.0 - 1e-12),
        m in 1u64..1_000_000,
    ) {
        let model = &scalar_models()[which];
        let z = innovation_for(model, u);
        let next = step(model, &ChainState::scalar(m, t), z, m).unwrap().as_scalar().unwrap();
        let phi = model.transform().unwrap();
        let g = model.increment(t, z, m).unwrap();
        let recomposed = phi.inverse(phi.forward(t) + g);
        let scale = next.abs().max(t.abs());
        prop_assert!((next - recomposed).abs() <= 1e-12 * scale, "{} t={t} z={z} m={m}: {next} vs {recomposed}", model.name());
    }

    #[test]
    fn positive_families_stay_positive(
        which in 1usize..5,
        t in 1e-300f64..1e300,
        u in 1e-15f64..(1.0 - 1e-15),
        m in 1u64..10_000_000,
    ) {
        let model = &scalar_models()[which];
        let z = innovation_for(model, u);
        let next = step(model, &ChainState::scalar(m, t), z, m).unwrap();
        prop_assert!(next.as_scalar().unwrap() > 0.0);
        prop_assert_eq!(next.m, m + 1);
    }

    #[test]
    fn bivariate_scale_coordinates_stay_positive(
        mean in -1e3f64..1e3,
        var in 1e-6f64..1e6,
        z in -40.0f64..40.0,
        u in 1e-15f64..(1.0 - 1e-15),
        m in 2u64..1_000_000,
    ) {
        let s = normalmv_step(mean, var, z, m, None).unwrap();
        prop_assert!(s.variance > 0.0);
        let (_, b) = uniform2_step(mean, var, u, m).unwrap();
        prop_assert!(b > 0.0);
    }

    #[test]
    fn copula_update_preserves_monotonicity(
        rho in 0.01f64..0.99,
        a in 0.0f64..0.99,
        z in -8.0f64..8.0,
        shift in -3.0f64..3.0,
        spread in 0.1f64..5.0,
    ) {
        let xs: Vec<f64> = (0..200).map(|i| -10.0 + 0.1 * i as f64).collect();
        let fs = xs.iter().map(|&x| normal_cdf((x - shift) / spread)).collect();
        let grid = DfGrid::new(xs, fs, DEFAULT_CLAMP).unwrap();
        let next = copula_df_step(&grid, z, rho, a).unwrap();
        prop_assert!(next.is_valid());
        prop_assert!(next.fs().windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn uniform_families_are_not_martingales() {
    use doob_fiducial::models::uniform1_mean_factor;
    for m in 2..100_000u64 {
        assert!(uniform1_mean_factor(m) < 1.0, "m={m}");
    }
    assert!(!ModelSpec::uniform().is_martingale());
    assert!(!ModelSpec::uniform_location_scale().is_martingale());
}
