//! Acceptance suite: every release criterion as one test, each printing a
//! PASS/FAIL line. The expensive per-function curves are computed once and
//! shared across criteria.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use gshift::analysis::{
    multiplier_identity_check, verify_coincidence_from_curves, verify_jackson_from_curves,
};
use gshift::approx::best_approx;
use gshift::polybasis::JacobiIndex;
use gshift::shift::{operator_norm_probe, selftest, KernelSpec};
use gshift::space::{corpus, corpus_member, SigmaWeight, WeightParams};
use gshift::{FunctionCurves64, Resolution};

const RES: Resolution = Resolution {
    shift_nodes: 256,
    norm_nodes: 512,
    sup_samples: 513,
    fj_nodes: 512,
};

const SINGULAR_LABELS: [&str; 8] = [
    "abs_x_pow_0.5",
    "abs_x_pow_1",
    "abs_x_pow_1.5",
    "abs_x_minus_half_pow_0.5",
    "abs_x_minus_half_pow_1",
    "abs_x_minus_half_pow_1.5",
    "trunc_pow_0.5",
    "trunc_pow_1",
];

fn weights() -> [(&'static str, WeightParams<f64>); 3] {
    [
        ("inf_1", WeightParams::sup(1.0)),
        ("2_1", WeightParams::new(2.0, 1.0).unwrap()),
        ("1_0.75", WeightParams::new(1.0, 0.75).unwrap()),
    ]
}

type CurveMap = BTreeMap<(String, String), FunctionCurves64>;

fn curves_cache() -> &'static CurveMap {
    static CACHE: OnceLock<CurveMap> = OnceLock::new();
    CACHE.get_or_init(|| {
        let spec = KernelSpec::reference();
        let ns = gshift::analysis::default_n_grid(64);
        let mut map = CurveMap::new();
        for (wkey, w) in weights() {
            for f in corpus::<f64>() {
                let curves = gshift::analysis::compute_curves(&spec, &f, &w, &ns, &RES)
                    .unwrap_or_else(|e| panic!("curves for {} at {}: {}", f.label(), wkey, e));
                map.insert((wkey.to_string(), f.label().to_string()), curves);
            }
        }
        map
    })
}

#[test]
fn acceptance_1_kernel_gate() {
    let start = Instant::now();
    let report = selftest(&KernelSpec::<f64>::reference(), &RES);
    let elapsed = start.elapsed();
    let pass = report.pass
        && report.max_err_identity <= 1e-8
        && report.max_err_unit <= 1e-8
        && report.max_err_product <= 1e-7
        && elapsed.as_secs() <= 30;
    println!(
        "ACCEPTANCE 1 kernel gate: {} (identity {:.2e}, unit {:.2e}, product {:.2e}, {:.1?})",
        if pass { "PASS" } else { "FAIL" },
        report.max_err_identity,
        report.max_err_unit,
        report.max_err_product,
        elapsed
    );
    assert!(pass, "{:?} in {:?}", report, elapsed);
}

#[test]
fn acceptance_2_multiplier_identity() {
    let start = Instant::now();
    let spec = KernelSpec::<f64>::reference();
    let degrees: Vec<usize> = (0..=8).collect();
    let ys = [-0.5, 0.0, 0.5, 0.9];
    let members = [
        "abs_x_minus_half_pow_0.5",
        "abs_x_minus_half_pow_1",
        "abs_x_minus_half_pow_1.5",
        "trunc_pow_0.5",
        "trunc_pow_1",
    ];
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for label in members {
        let f = corpus_member::<f64>(label).unwrap();
        let report = multiplier_identity_check(&spec, &f, &degrees, &ys, &RES).unwrap();
        assert!(report.pass, "{}: {:?}", label, report);
        worst = worst.max(report.max_rel_err);
        checked += report.pairs_checked;
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-6 && elapsed.as_secs() <= 60;
    println!(
        "ACCEPTANCE 2 multiplier identity: {} (max rel err {:.2e} over {} pairs, {:.1?})",
        if pass { "PASS" } else { "FAIL" },
        worst,
        checked,
        elapsed
    );
    assert!(pass, "worst {:e} in {:?}", worst, elapsed);
}

#[test]
fn acceptance_3_operator_norm_bound() {
    let spec = KernelSpec::<f64>::reference();
    let w = WeightParams::sup(1.0);
    let members = corpus::<f64>();
    let base = operator_norm_probe(&spec, &w, &members, &RES).unwrap();
    let doubled = operator_norm_probe(&spec, &w, &members, &RES.doubled()).unwrap();
    let drift = (base.max_ratio - doubled.max_ratio).abs() / doubled.max_ratio;
    let pass = base.max_ratio.is_finite() && base.max_ratio <= 10.0 && drift <= 0.05;
    println!(
        "ACCEPTANCE 3 norm bound: {} (constant {:.4}, drift under doubling {:.2e})",
        if pass { "PASS" } else { "FAIL" },
        base.max_ratio,
        drift
    );
    assert!(pass, "constant {} drift {}", base.max_ratio, drift);
}

#[test]
fn acceptance_4_jackson_ratios() {
    let cache = curves_cache();
    let mut worst_quotient = 0.0f64;
    for (wkey, _) in weights() {
        for f in corpus::<f64>() {
            let curves = &cache[&(wkey.to_string(), f.label().to_string())];
            let report = verify_jackson_from_curves(curves);
            assert!(
                report.pass,
                "jackson {} at {}: early {} late {}",
                f.label(),
                wkey,
                report.max_early,
                report.max_late
            );
            if !report.degenerate && report.max_early > 0.0 && report.max_late > 0.0 {
                worst_quotient = worst_quotient.max(report.max_late / report.max_early);
            }
        }
    }
    let pass = worst_quotient <= 1.2;
    println!(
        "ACCEPTANCE 4 Jackson ratios: {} (worst late/early quotient {:.3} over 3 weights x 10 functions)",
        if pass { "PASS" } else { "FAIL" },
        worst_quotient
    );
    assert!(pass, "worst quotient {}", worst_quotient);
}

/// The coincidence check runs on the full corpus at the headline verify
/// configuration (p, alpha) = (inf, 1).
#[test]
fn acceptance_5_coincidence() {
    let start = Instant::now();
    let cache = curves_cache();
    let mut in_hyp = 0usize;
    let mut agreements = 0usize;
    let mut worst_gap = 0.0f64;
    for f in corpus::<f64>() {
        let curves = &cache[&("inf_1".to_string(), f.label().to_string())];
        let report = verify_coincidence_from_curves(curves);
        if report.in_hypothesis {
            in_hyp += 1;
            let le = report.lambda_e.unwrap().lambda;
            let lh = report.lambda_h.unwrap().lambda;
            worst_gap = worst_gap.max((le - lh).abs());
            assert_eq!(
                report.coincide,
                Some(true),
                "{}: lambda_E {} lambda_H {}",
                f.label(),
                le,
                lh
            );
            agreements += 1;
        } else {
            // only the analytic members may fall outside the window
            assert!(
                f.label() == "exp_x" || f.label() == "poly_degree7",
                "{} unexpectedly out of hypothesis",
                f.label()
            );
        }
    }
    // every singular corpus member sits inside the exponent window
    for label in SINGULAR_LABELS {
        let curves = &cache[&("inf_1".to_string(), label.to_string())];
        let report = verify_coincidence_from_curves(curves);
        assert!(report.in_hypothesis, "{} fell out of hypothesis", label);
        assert_eq!(report.coincide, Some(true), "{}", label);
    }
    let elapsed = start.elapsed();
    let pass = agreements == in_hyp && in_hyp == 8 && elapsed.as_secs() <= 300;
    println!(
        "ACCEPTANCE 5 coincidence: {} ({} of {} in-hypothesis members agree within 0.15, worst gap {:.3}, {:.1?})",
        if pass { "PASS" } else { "FAIL" },
        agreements,
        in_hyp,
        worst_gap,
        elapsed
    );
    assert!(pass, "{} / {} in {:?}", agreements, in_hyp, elapsed);
}

#[test]
fn acceptance_6_solver_oracle() {
    let sigma = SigmaWeight::<f64>::one_minus_x_squared();
    let w0 = WeightParams::sup(0.0);
    let square = gshift::space::FunctionHandle::new("square", |x: f64| x * x);
    let (_, err) = best_approx(&square, 2, &w0, &sigma, &RES).unwrap();
    let oracle_ok = (err - 0.5).abs() <= 1e-6;

    let poly = corpus_member::<f64>("poly_degree7").unwrap();
    let mut exact_ok = true;
    for w in [WeightParams::sup(1.0), WeightParams::new(2.0, 1.0).unwrap(), w0] {
        let (_, e) = best_approx(&poly, 8, &w, &sigma, &RES).unwrap();
        exact_ok &= e <= 1e-10;
    }

    let cache = curves_cache();
    let mut monotone_ok = true;
    for (wkey, _) in weights() {
        for f in corpus::<f64>() {
            let curves = &cache[&(wkey.to_string(), f.label().to_string())];
            monotone_ok &= curves
                .errors
                .errors
                .windows(2)
                .all(|p| p[1] <= p[0] + 1e-9);
        }
    }
    let pass = oracle_ok && exact_ok && monotone_ok;
    println!(
        "ACCEPTANCE 6 solver oracle: {} (best linear error for x^2 = {:.8}, exact reproduction {}, monotone {})",
        if pass { "PASS" } else { "FAIL" },
        err,
        exact_ok,
        monotone_ok
    );
    assert!(pass);
}

#[test]
fn acceptance_7_negative_controls() {
    // corrupting sigma (squaring it) must break the kernel gate
    let mut squared = KernelSpec::<f64>::reference();
    squared.sigma = SigmaWeight::new(2.0, 2.0).unwrap();
    let gate = selftest(&squared, &RES);
    let sigma_detected = !gate.pass && gate.max_err_unit > 1e-8;

    // shifting the y-family by one must break the multiplier identity
    let mut shifted = KernelSpec::<f64>::reference();
    shifted.idx_y = JacobiIndex::new(1.0, 5.0).unwrap();
    let f = corpus_member::<f64>("abs_x_minus_half_pow_1").unwrap();
    let report =
        multiplier_identity_check(&shifted, &f, &[1, 2, 3, 4], &[-0.5, 0.5], &RES).unwrap();
    let idx_detected = !report.pass && report.max_rel_err > 1e-6;
    // and the product formula in the gate catches it too
    let gate2 = selftest(&shifted, &RES);
    let idx_detected_by_gate = !gate2.pass && gate2.max_err_product > 1e-8;

    let pass = sigma_detected && idx_detected && idx_detected_by_gate;
    println!(
        "ACCEPTANCE 7 negative controls: {} (squared sigma unit err {:.2e}; wrong y-family rel err {:.2e}, product err {:.2e})",
        if pass { "PASS" } else { "FAIL" },
        gate.max_err_unit,
        report.max_rel_err,
        gate2.max_err_product
    );
    assert!(pass);
}

#[test]
fn acceptance_8_determinism() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("kernel.conf"),
        "sigma = one-minus-x-squared\nco_exponent = 2\nidx_x_a = 2\nidx_x_b = 2\nidx_y_a = 0\nidx_y_b = 4\n",
    )
    .unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        "kernel_spec = kernel.conf\np = inf\nalpha = 1.0\nfunctions = abs_x_pow_1,exp_x\nn_max = 8\n\
         [resolution]\nshift_nodes = 64\nnorm_nodes = 128\nsup_samples = 129\nfj_nodes = 128\n",
    )
    .unwrap();
    let mut snapshots: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for sub in ["a", "b"] {
        let outdir = dir.path().join(sub);
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_gshift"))
            .args([
                "--config",
                cfg.to_str().unwrap(),
                "--output",
                outdir.to_str().unwrap(),
                "--force",
                "curves",
            ])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{:?}", out);
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&outdir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        snapshots.push(files);
    }
    let identical = snapshots[0] == snapshots[1];
    println!(
        "ACCEPTANCE 8 determinism: {} ({} files byte-identical across repeated runs)",
        if identical { "PASS" } else { "FAIL" },
        snapshots[0].len()
    );
    assert!(identical);
}
