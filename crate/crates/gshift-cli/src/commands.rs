use std::io::Write as _;

use gshift::analysis::{
    compute_curves, default_n_grid, multiplier_identity_check, verify_coincidence_from_curves,
    verify_direct_from_curves, verify_inverse_from_curves, verify_jackson_from_curves,
    ClassMembershipReport, JacksonReport, MultiplierReport, RateComparisonReport,
};
use gshift::modulus::modulus_curve;
use gshift::approx::error_sequence;
use gshift::shift::{operator_norm_probe, selftest, ProbeReport, SelfTestReport};
use gshift::space::{admissible_for, corpus, corpus_member, Theorem};
use gshift::Result;

use crate::config::RunContext;
use crate::output;
use crate::CmdOutcome;

/// Corpus members used for the multiplier-identity certification: the
/// asymmetric singular members, whose Fourier-Jacobi coefficients decay
/// slowly enough to carry signal at every degree up to 8.
const MULTIPLIER_MEMBERS: [&str; 5] = [
    "abs_x_minus_half_pow_0.5",
    "abs_x_minus_half_pow_1",
    "abs_x_minus_half_pow_1.5",
    "trunc_pow_0.5",
    "trunc_pow_1",
];
const MULTIPLIER_YS: [f64; 4] = [-0.5, 0.0, 0.5, 0.9];

#[derive(serde::Serialize)]
struct SelftestOutput {
    kernel_fingerprint: String,
    selftest: SelfTestReport<f64>,
    /// Max over probe members of the asymmetry | ||tau_{-t} f - f|| -
    /// ||tau_t f - f|| |; justifies covering only positive t in the
    /// modulus grids.
    shift_symmetry: Option<f64>,
    probe: Option<ProbeReport<f64>>,
    probe_skipped: Option<String>,
}

pub fn cmd_selftest(run: &RunContext) -> Result<CmdOutcome> {
    let report = selftest(&run.spec, &run.res);
    println!(
        "selftest: identity {:.3e}, unit {:.3e}, product {:.3e} -> {}",
        report.max_err_identity,
        report.max_err_unit,
        report.max_err_product,
        if report.pass { "PASS" } else { "FAIL" }
    );
    let shift_symmetry = if report.pass {
        let w = gshift::space::WeightParams::new(2.0, 1.0).expect("valid probe weight");
        let mut worst = 0.0f64;
        for label in ["trunc_pow_0.5", "abs_x_minus_half_pow_1"] {
            let f = corpus_member::<f64>(label).expect("fixed member exists");
            worst = worst.max(gshift::modulus::symmetry_probe(&run.spec, &f, &w, &run.res)?);
        }
        println!("shift symmetry probe: max asymmetry {:.3e}", worst);
        Some(worst)
    } else {
        None
    };
    let (probe, probe_skipped) = if report.pass {
        if admissible_for(&run.w, Theorem::Jackson) {
            let members = corpus::<f64>();
            let probe = operator_norm_probe(&run.spec, &run.w, &members, &run.res)?;
            println!(
                "norm probe at ({}): empirical constant {:.6} (worst: {} at t={})",
                run.w.label(),
                probe.max_ratio,
                probe.worst_label,
                probe.worst_t
            );
            (Some(probe), None)
        } else {
            let reason = format!("({}) is outside the admissible region", run.w.label());
            println!("norm probe skipped: {}", reason);
            (None, Some(reason))
        }
    } else {
        (None, Some("kernel gate failed; probe skipped".into()))
    };
    output::write_json(
        &run.output_dir.join("selftest_report.json"),
        &SelftestOutput {
            kernel_fingerprint: run.fingerprint.clone(),
            selftest: report,
            shift_symmetry,
            probe,
            probe_skipped,
        },
    )?;
    if report.pass {
        run.write_stamp()?;
        Ok(CmdOutcome::Ok)
    } else {
        Ok(CmdOutcome::CheckFailed)
    }
}

#[derive(serde::Serialize)]
struct CurvesManifest {
    kernel_fingerprint: String,
    n_values: Vec<usize>,
    deltas: Vec<f64>,
    written: Vec<String>,
    failures: Vec<(String, String)>,
}

pub fn cmd_curves(run: &RunContext) -> Result<CmdOutcome> {
    run.ensure_stamp()?;
    let ns = default_n_grid(run.n_max);
    let deltas: Vec<f64> = match &run.deltas {
        Some(d) => d.clone(),
        None => ns.iter().rev().map(|&n| 1.0 / n as f64).collect(),
    };
    let mut manifest = CurvesManifest {
        kernel_fingerprint: run.fingerprint.clone(),
        n_values: ns.clone(),
        deltas: deltas.clone(),
        written: Vec::new(),
        failures: Vec::new(),
    };
    let mut dat: Vec<u8> = Vec::new();
    writeln!(dat, "# kernel_fingerprint={}", run.fingerprint)?;
    let mut plotted: Vec<String> = Vec::new();
    for label in &run.functions {
        let f = corpus_member::<f64>(label).expect("labels validated at config load");
        let result = (|| -> Result<()> {
            let seq = error_sequence(&f, &ns, &run.w, &run.spec.sigma, &run.res)?;
            let curve = modulus_curve(&run.spec, &f, &run.w, &deltas, &run.res)?;
            let mut buf = Vec::new();
            seq.write_csv(&mut buf, Some(&run.fingerprint))?;
            let err_name = format!("{}.errors.csv", label);
            output::write_text(
                &run.output_dir.join(&err_name),
                std::str::from_utf8(&buf).expect("csv is utf-8"),
            )?;
            let mut buf = Vec::new();
            curve.write_csv(&mut buf, Some(&run.fingerprint))?;
            let mod_name = format!("{}.modulus.csv", label);
            output::write_text(
                &run.output_dir.join(&mod_name),
                std::str::from_utf8(&buf).expect("csv is utf-8"),
            )?;
            writeln!(dat, "# f={} (n, error)", label)?;
            for (n, e) in seq.n_values.iter().zip(&seq.errors) {
                writeln!(dat, "{} {}", n, e)?;
            }
            writeln!(dat)?;
            writeln!(dat)?;
            writeln!(dat, "# f={} (delta, omega)", label)?;
            for (d, o) in curve.deltas.iter().zip(&curve.omegas) {
                writeln!(dat, "{} {}", d, o)?;
            }
            writeln!(dat)?;
            writeln!(dat)?;
            manifest.written.push(err_name);
            manifest.written.push(mod_name);
            plotted.push(label.clone());
            Ok(())
        })();
        match result {
            Ok(()) => println!("curves {}: ok", label),
            Err(err) => {
                println!("curves {}: FAILED ({})", label, err);
                manifest.failures.push((label.clone(), err.to_string()));
            }
        }
    }
    output::write_text(
        &run.output_dir.join("curves.dat"),
        std::str::from_utf8(&dat).expect("dat is utf-8"),
    )?;
    output::write_text(
        &run.output_dir.join("curves.gp"),
        &format!(
            "# kernel_fingerprint={}\n{}",
            run.fingerprint,
            plot_script_two_blocks(&plotted)
        ),
    )?;
    output::write_json(&run.output_dir.join("curves_manifest.json"), &manifest)?;
    if manifest.failures.is_empty() {
        Ok(CmdOutcome::Ok)
    } else {
        Ok(CmdOutcome::CheckFailed)
    }
}

/// Plot script matching the two-blocks-per-function layout of curves.dat.
fn plot_script_two_blocks(labels: &[String]) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script for the measured curves\n");
    s.push_str("set terminal pngcairo size 1200,500\n");
    s.push_str("set output 'curves.png'\n");
    s.push_str("set multiplot layout 1,2\n");
    s.push_str("set logscale xy\n");
    s.push_str("set xlabel 'n'\nset ylabel 'E_n'\n");
    if labels.is_empty() {
        s.push_str("# nothing to plot\n");
        return s;
    }
    s.push_str("plot \\\n");
    for (i, label) in labels.iter().enumerate() {
        s.push_str(&format!(
            "  'curves.dat' index {} using 1:2 with linespoints title '{}'{}\n",
            2 * i,
            label,
            if i + 1 == labels.len() { "" } else { ", \\" }
        ));
    }
    s.push_str("set xlabel 'delta'\nset ylabel 'omega'\n");
    s.push_str("plot \\\n");
    for (i, label) in labels.iter().enumerate() {
        s.push_str(&format!(
            "  'curves.dat' index {} using 1:2 with linespoints title '{}'{}\n",
            2 * i + 1,
            label,
            if i + 1 == labels.len() { "" } else { ", \\" }
        ));
    }
    s.push_str("unset multiplot\n");
    s
}

#[derive(serde::Serialize)]
struct FunctionVerify {
    label: String,
    jackson: Option<JacksonReport<f64>>,
    inverse: Option<RateComparisonReport<f64>>,
    direct: Option<RateComparisonReport<f64>>,
    coincidence: Option<ClassMembershipReport<f64>>,
}

#[derive(serde::Serialize)]
struct VerifyOutput {
    kernel_fingerprint: String,
    p: f64,
    alpha: f64,
    jackson_admissible: bool,
    theorems_admissible: bool,
    multiplier: MultiplierReport<f64>,
    functions: Vec<FunctionVerify>,
    all_pass: bool,
}

pub fn cmd_verify(run: &RunContext) -> Result<CmdOutcome> {
    run.ensure_stamp()?;
    let ns = default_n_grid(run.n_max);
    let jackson_adm = admissible_for(&run.w, Theorem::Jackson);
    let theorems_adm = admissible_for(&run.w, Theorem::Coincidence);

    // kernel-level multiplier identity, independent of (p, alpha)
    let mut multiplier_worst: Option<MultiplierReport<f64>> = None;
    for label in MULTIPLIER_MEMBERS {
        let f = corpus_member::<f64>(label).expect("fixed member exists");
        let degrees: Vec<usize> = (0..=8).collect();
        let report = multiplier_identity_check(&run.spec, &f, &degrees, &MULTIPLIER_YS, &run.res)?;
        let worse = match &multiplier_worst {
            None => true,
            Some(prev) => report.max_rel_err > prev.max_rel_err,
        };
        if worse {
            multiplier_worst = Some(report);
        }
    }
    let multiplier = multiplier_worst.expect("at least one member checked");
    println!(
        "multiplier identity: max relative error {:.3e} over {} pairs -> {}",
        multiplier.max_rel_err,
        multiplier.pairs_checked,
        if multiplier.pass { "PASS" } else { "FAIL" }
    );

    let mut all_pass = multiplier.pass;
    let mut functions = Vec::new();
    let mut summary = format!(
        "# kernel_fingerprint={}\nlabel,check,status,pass,lambda_e,lambda_h,detail\n",
        run.fingerprint
    );
    for label in &run.functions {
        let f = corpus_member::<f64>(label).expect("labels validated at config load");
        let mut entry = FunctionVerify {
            label: label.clone(),
            jackson: None,
            inverse: None,
            direct: None,
            coincidence: None,
        };
        if jackson_adm || theorems_adm {
            let curves = compute_curves(&run.spec, &f, &run.w, &ns, &run.res)?;
            if jackson_adm {
                let report = verify_jackson_from_curves(&curves);
                let status = if report.degenerate { "degenerate" } else { "ok" };
                println!(
                    "jackson {}: {} (early {:.3}, late {:.3})",
                    label,
                    if report.pass { "PASS" } else { "FAIL" },
                    report.max_early,
                    report.max_late
                );
                summary.push_str(&format!(
                    "{},jackson,{},{},,,max_early={} max_late={}\n",
                    label, status, report.pass, report.max_early, report.max_late
                ));
                all_pass &= report.pass;
                entry.jackson = Some(report);
            } else {
                println!("jackson {}: skipped (inadmissible)", label);
                summary.push_str(&format!("{},jackson,skipped,true,,,\n", label));
            }
            if theorems_adm {
                let inverse = verify_inverse_from_curves(&curves);
                let direct = verify_direct_from_curves(&curves);
                let coincidence = verify_coincidence_from_curves(&curves);
                for (name, rep) in [("inverse", &inverse), ("direct", &direct)] {
                    let status = if rep.in_hypothesis { "ok" } else { "out-of-hypothesis" };
                    println!(
                        "{} {}: {} ({})",
                        name,
                        label,
                        if rep.pass { "PASS" } else { "FAIL" },
                        rep.detail
                    );
                    summary.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        label,
                        name,
                        status,
                        rep.pass,
                        rep.lambda_e.map(|r| r.lambda.to_string()).unwrap_or_default(),
                        rep.lambda_h.map(|r| r.lambda.to_string()).unwrap_or_default(),
                        rep.detail
                    ));
                    all_pass &= rep.pass;
                }
                let coin_pass = coincidence.coincide != Some(false);
                let status = if coincidence.in_hypothesis { "ok" } else { "out-of-hypothesis" };
                println!(
                    "coincidence {}: {}",
                    label,
                    match coincidence.coincide {
                        Some(true) => "PASS",
                        Some(false) => "FAIL",
                        None => "skipped (out of hypothesis)",
                    }
                );
                summary.push_str(&format!(
                    "{},coincidence,{},{},{},{},tolerance={}\n",
                    label,
                    status,
                    coin_pass,
                    coincidence.lambda_e.map(|r| r.lambda.to_string()).unwrap_or_default(),
                    coincidence.lambda_h.map(|r| r.lambda.to_string()).unwrap_or_default(),
                    coincidence.tolerance
                ));
                all_pass &= coin_pass;
                entry.inverse = Some(inverse);
                entry.direct = Some(direct);
                entry.coincidence = Some(coincidence);
            } else {
                println!("inverse/direct/coincidence {}: skipped (inadmissible)", label);
                summary.push_str(&format!("{},inverse,skipped,true,,,\n", label));
                summary.push_str(&format!("{},direct,skipped,true,,,\n", label));
                summary.push_str(&format!("{},coincidence,skipped,true,,,\n", label));
            }
        } else {
            println!("{}: all checks skipped (inadmissible weight)", label);
            for check in ["jackson", "inverse", "direct", "coincidence"] {
                summary.push_str(&format!("{},{},skipped,true,,,\n", label, check));
            }
        }
        functions.push(entry);
    }

    output::write_json(
        &run.output_dir.join("verify_report.json"),
        &VerifyOutput {
            kernel_fingerprint: run.fingerprint.clone(),
            p: run.w.p,
            alpha: run.w.alpha,
            jackson_admissible: jackson_adm,
            theorems_admissible: theorems_adm,
            multiplier,
            functions,
            all_pass,
        },
    )?;
    output::write_text(&run.output_dir.join("verify_summary.csv"), &summary)?;
    println!("verify: {}", if all_pass { "PASS" } else { "FAIL" });
    Ok(if all_pass {
        CmdOutcome::Ok
    } else {
        CmdOutcome::CheckFailed
    })
}
