//! Significance tests, resampling intervals and cross-seed summaries.

mod bootstrap;
mod delong;
mod effect;
mod mcnemar;
mod sweep;

pub use bootstrap::{
    bootstrap_ci, bootstrap_ci_with, bootstrap_distribution, hanley_mcneil_se, percentile_interval,
    resample_rng, BootstrapConfig, ConfidenceInterval, Resampler, ScoreTable, Statistic,
    Stratification,
};
pub use delong::{delong_paired, PairedTestResult};
pub use effect::{bonferroni, cohens_d, EffectSize};
pub use mcnemar::{discordant_counts, mcnemar, mcnemar_from_predictions, McNemarResult};
pub use sweep::{
    cross_seed_aggregate, parse_seed_summary, ArmAggregate, PairedDelta, PerSeed, SeedSweep,
    METRIC_KEYS,
};

/// Upper tail of a chi-square with one degree of freedom.
pub fn chi2_1df_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    libm::erfc((x / 2.0).sqrt())
}

/// Two-sided standard-normal p-value for `z`.
pub fn normal_two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_reference_values() {
        // 3.841458820694124 is the 95th chi-square(1) quantile.
        assert!((chi2_1df_survival(3.841_458_820_694_124) - 0.05).abs() < 1e-14);
        assert!((normal_two_sided_p(1.959_963_984_540_054) - 0.05).abs() < 1e-14);
        assert_eq!(normal_two_sided_p(0.0), 1.0);
        assert_eq!(chi2_1df_survival(0.0), 1.0);
    }
}
