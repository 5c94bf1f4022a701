//! Acceptance suite: one test per criterion, each printing its own
//! pass/fail line through the harness. Trial counts, tolerances, and
//! runtime limits are pinned here.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use dwls::harness::{run_experiment, ExperimentConfig};
use dwls::verify::{
    acyclic_exactness_check, band_recursion_check, banded_decay_check, equivalence_check,
    init_contraction_check, monotone_sandwich_check, riemann_property_checks, covariance_accuracy_check,
    estimate_accuracy_check, Check,
};

const SEED: u64 = 20240901;

fn assert_clean(check: &Check, budget: Option<Duration>, elapsed: Duration) {
    println!("{check}");
    assert!(check.pass(), "{} had {} failures (worst {:.3e})", check.name, check.failures, check.worst);
    if let Some(budget) = budget {
        assert!(elapsed <= budget, "{} took {elapsed:?}, budget {budget:?}", check.name);
    }
}

/// Trees solve exactly in diameter + 1 rounds: 50 random trees of 5 to 30
/// nodes with state dimensions 1 to 3, every node within 1e-9 relative of
/// the dense oracle, in under 10 seconds.
#[test]
fn criterion_01_acyclic_exactness() {
    let start = Instant::now();
    let check = acyclic_exactness_check(SEED, 50);
    assert_eq!(check.trials, 50);
    assert_clean(&check, Some(Duration::from_secs(10)), start.elapsed());
}

/// Beliefs at node 1 equal node-1 WLS on the collapsed unrolling, on 30
/// loopy networks of at most 12 nodes, for all rounds up to 6, within 1e-9.
#[test]
fn criterion_02_representation_equivalence() {
    let check = equivalence_check(SEED, 30, 6);
    assert_eq!(check.trials, 30);
    assert_clean(&check, None, Duration::ZERO);
}

/// Covariance bound: on 30 generated contraction networks,
/// `‖Cov₁ᵂᴸˢ − Q₁⁻¹(N)‖ ≤ varpi ρ^{l₁}` for every N in `[l₁+1, l₁+10]`.
#[test]
fn criterion_03_covariance_accuracy_bound() {
    let check = covariance_accuracy_check(SEED, 30);
    assert_eq!(check.trials, 30);
    assert_clean(&check, None, Duration::ZERO);
}

/// Estimate bound: same protocol on networks with `κ < 1`,
/// `‖x̂₁(N) − x̂₁ᵂᴸˢ‖ ≤ (2χ̄/(1−κ)) κ^{l₁+1}`.
#[test]
fn criterion_04_estimate_accuracy_bound() {
    let check = estimate_accuracy_check(SEED, 30);
    assert_eq!(check.trials, 30);
    assert_clean(&check, None, Duration::ZERO);
}

/// Initialization contraction: 20 admissible initialization pairs,
/// `δ(Q₁(N,ℚ₁), Q₁(N,ℚ₂)) ≤ ρ^{N−1} δ̄` for N up to 8.
#[test]
fn criterion_05_initialization_contraction() {
    let check = init_contraction_check(SEED, 20, 8);
    assert_eq!(check.trials, 20);
    assert_clean(&check, None, Duration::ZERO);
}

/// Monotone sandwich: zero-initialized information grows, maximal shrinks,
/// and the oracle covariance sits inside the round-(l₁+1) bracket, all with
/// PSD slack no worse than -1e-9.
#[test]
fn criterion_06_monotone_sandwich() {
    let check = monotone_sandwich_check(SEED, 12);
    assert_clean(&check, None, Duration::ZERO);
}

/// Riemannian metric properties 1 through 6: 200 randomized trials each at
/// tolerance 1e-8, zero failures.
#[test]
fn criterion_07_riemannian_properties() {
    for check in riemann_property_checks(SEED, 200, 1e-8) {
        assert_eq!(check.trials, 200, "{}", check.name);
        assert_clean(&check, None, Duration::ZERO);
    }
}

/// Block-tridiagonal recursion matches dense inversion on 100 random SPD
/// systems (up to 8 blocks of size up to 4) to 1e-9, and the banded-inverse
/// decay envelope holds on 50 random instances.
#[test]
fn criterion_08_band_recursion_oracle() {
    let recursion = band_recursion_check(SEED, 100);
    assert_eq!(recursion.trials, 100);
    assert_clean(&recursion, None, Duration::ZERO);
    let decay = banded_decay_check(SEED + 1, 50);
    assert_eq!(decay.trials, 50);
    assert_clean(&decay, None, Duration::ZERO);
}

/// Convergence race on the 60-node desk-scale network: the estimator
/// reaches combined mismatch 1e-6 within 15 rounds and strictly before the
/// block-Jacobi baseline, in under 30 seconds.
#[test]
fn criterion_09_convergence_speed() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let summary = run_experiment(&ExperimentConfig::desk_scale(SEED), dir.path()).unwrap();
    let elapsed = start.elapsed();
    let dwls = summary.dwls_rounds_to_1e6;
    let jacobi = summary.jacobi_rounds_to_1e6;
    let pass = matches!(dwls, Some(d) if d <= 15 && jacobi.is_none_or(|j| d < j));
    println!(
        "{} criterion_09_convergence_speed: dwls_rounds={dwls:?} jacobi_rounds={jacobi:?} elapsed={elapsed:?}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "dwls {dwls:?} vs jacobi {jacobi:?}");
    assert!(elapsed <= Duration::from_secs(30), "took {elapsed:?}");
}

/// Depth-decay figure: on the desk-scale network, every applicable row of
/// the per-depth files sits under its accuracy bound, and the per-depth
/// mismatch maxima do not increase with depth.
#[test]
fn criterion_10_depth_decay() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_experiment(&ExperimentConfig::desk_scale(SEED), dir.path()).unwrap();
    for (path, label) in [
        (&summary.depth_cov_csv, "cov"),
        (&summary.depth_est_csv, "est"),
    ] {
        let text = std::fs::read_to_string(path).unwrap();
        let mut maxima: BTreeMap<usize, f64> = BTreeMap::new();
        let mut applicable_rows = 0;
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            let depth: usize = fields[1].parse().unwrap();
            let mismatch: f64 = fields[2].parse().unwrap();
            let bound: f64 = fields[3].parse().unwrap();
            let applicable: bool = fields[4].parse().unwrap();
            if applicable {
                applicable_rows += 1;
                assert!(
                    mismatch <= bound,
                    "{label}: node {} at depth {depth}: mismatch {mismatch:e} > bound {bound:e}",
                    fields[0]
                );
            }
            let entry = maxima.entry(depth).or_insert(0.0);
            *entry = entry.max(mismatch);
        }
        assert!(applicable_rows > 0, "{label}: no applicable rows");
        let depths: Vec<usize> = maxima.keys().copied().collect();
        assert!(depths.len() >= 3, "{label}: expected a spread of depths, got {depths:?}");
        for pair in depths.windows(2) {
            assert!(
                maxima[&pair[1]] <= maxima[&pair[0]],
                "{label}: per-depth max rose from depth {} ({:e}) to {} ({:e})",
                pair[0],
                maxima[&pair[0]],
                pair[1],
                maxima[&pair[1]]
            );
        }
        println!("PASS criterion_10_depth_decay[{label}]: depths {depths:?}");
    }
}
