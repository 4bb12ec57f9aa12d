//! The shipped experiment recipes stay parseable, valid, and tied to the
//! acceptance parameters.

use std::path::PathBuf;

use emptyball::exec::Exec;
use emptyball::pipeline::config::{ConfigFile, EstimatorKind};
use emptyball::pipeline::{direct_grid, estimate_factorized};
use emptyball::Regime;

fn recipe(name: &str) -> ConfigFile {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    ConfigFile::from_path(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn all_shipped_recipes_resolve() {
    for name in [
        "thm1.toml",
        "thm2_d2.toml",
        "thm3_d3.toml",
        "thm4_stable.toml",
        "thm5_subcritical.toml",
    ] {
        let cfg = recipe(name)
            .resolve()
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(!cfg.n_list.is_empty() && !cfg.r_list.is_empty());
    }
}

#[test]
fn thm1_recipe_matches_the_d1_criterion() {
    let cfg = recipe("thm1.toml").resolve().unwrap();
    assert_eq!(cfg.law.regime(), Regime::CriticalFiniteVar);
    assert_eq!(cfg.d, 1);
    assert_eq!(cfg.n_list, vec![100, 200, 400]);
    assert_eq!(cfg.r_list, vec![0.5]);
    assert_eq!(cfg.fields, 2000);
    assert_eq!(cfg.eps_trunc, 1e-3);
    assert_eq!(cfg.estimator, EstimatorKind::Direct);
    assert_eq!(cfg.policy.a(400), 400.0);
}

/// Slow cross-validation over the d = 1 recipes: the direct and factorized
/// 95% intervals must overlap (both estimate the same finite-n tail).
/// Direct simulation of the d >= 2 recipes is computationally out of reach
/// (the window holds ~1e5 ancestors per field), so those stay
/// factorized-only. Run with `cargo test -- --ignored`.
#[test]
#[ignore = "several minutes; run explicitly"]
fn d1_recipes_direct_factorized_cis_overlap() {
    for name in ["thm1.toml", "thm4_stable.toml", "thm5_subcritical.toml"] {
        let mut cfg = recipe(name).resolve().unwrap();
        if cfg.budget < 100_000 {
            cfg.budget = 400_000;
        }
        for &n in &cfg.n_list.clone() {
            for &r in &cfg.r_list.clone() {
                let d = direct_grid(&cfg, n, &[r], Exec::default())
                    .unwrap()
                    .pop()
                    .unwrap();
                let f = estimate_factorized(&cfg, n, r, Exec::default()).unwrap();
                assert!(
                    f.ci_lo <= d.ci_hi && d.ci_lo <= f.ci_hi,
                    "{name} (n={n}, r={r}): direct [{}, {}] vs factorized [{}, {}]",
                    d.ci_lo,
                    d.ci_hi,
                    f.ci_lo,
                    f.ci_hi
                );
            }
        }
        println!("[recipes] {name}: direct and factorized CIs overlap on the whole grid");
    }
}
