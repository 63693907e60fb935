//! Output rendering: JSON mirrors the core types field for field (complex
//! scalars as `[re, im]` pairs), CSV uses the column contracts declared by
//! the core modules, floats print in their shortest round-trip form.

use purcell_core::{
    DecayReport, EffectiveMatrix, EpReport, ReproduceRow, SlowMode, Spectrum, SystemConfig,
};
use serde_json::{json, Value};

pub fn spectrum_json(cfg: &SystemConfig, m: &EffectiveMatrix, spec: &Spectrum) -> Value {
    let labels: Vec<String> = m.basis_labels().iter().map(|b| b.to_string()).collect();
    let matrix: Vec<[f64; 2]> = m.entries().iter().map(|z| [z.re, z.im]).collect();
    let (min_gap, max_overlap) = purcell_core::coalescence(spec);
    json!({
        "kappa": cfg.kappa,
        "dim": m.dim(),
        "basis": labels,
        "matrix": matrix,
        "spectrum": spec,
        "min_gap": min_gap,
        "max_overlap": max_overlap,
    })
}

pub fn spectrum_csv(spec: &Spectrum) -> String {
    let dim = spec.dim();
    let mut out = String::from("index,lambda_re,lambda_im");
    for i in 0..dim {
        out.push_str(&format!(",v{i}_re,v{i}_im"));
    }
    out.push('\n');
    for k in 0..dim {
        let lambda = spec.eigenvalues()[k];
        out.push_str(&format!("{k},{},{}", lambda.re, lambda.im));
        for z in spec.eigenvector(k).iter() {
            out.push_str(&format!(",{},{}", z.re, z.im));
        }
        out.push('\n');
    }
    out
}

pub fn rates_json(report: &DecayReport, slow: &Result<SlowMode, String>) -> Value {
    match slow {
        Ok(mode) => json!({ "decay": report, "slow_mode": mode }),
        Err(e) => json!({ "decay": report, "slow_mode": Value::Null, "slow_mode_error": e }),
    }
}

pub fn rates_csv(report: &DecayReport, slow: &Result<SlowMode, String>) -> String {
    let mut out = String::from(
        "extracted_rate,fit_start,fit_end,rms_log_residual,formula,closed_form_prediction,relative_deviation,slow_mode_rate,slow_mode_overlap\n",
    );
    out.push_str(&format!(
        "{},{},{},{},{}",
        report.extracted_rate,
        report.fit_window.0,
        report.fit_window.1,
        report.rms_log_residual,
        report.formula
    ));
    match report.closed_form_prediction {
        Some(p) => out.push_str(&format!(",{p}")),
        None => out.push(','),
    }
    match report.relative_deviation {
        Some(d) => out.push_str(&format!(",{d}")),
        None => out.push(','),
    }
    match slow {
        Ok(mode) => out.push_str(&format!(",{},{}\n", mode.rate, mode.overlap)),
        Err(_) => out.push_str(",,\n"),
    }
    out
}

pub fn ep_csv(report: &EpReport) -> String {
    let mut out =
        String::from("order,kappa,gamma_b,gamma_c,g_b,min_gap,max_overlap,splitting_exponent\n");
    out.push_str(&format!(
        "{},{},{}",
        report.order, report.kappa, report.gamma_b
    ));
    match report.gamma_c {
        Some(g) => out.push_str(&format!(",{g}")),
        None => out.push(','),
    }
    out.push_str(&format!(
        ",{},{},{},{}\n",
        report.g_b, report.min_gap, report.max_overlap, report.splitting_exponent
    ));
    out
}

pub fn reproduce_csv(rows: &[ReproduceRow]) -> String {
    let mut out = String::from(
        "scenario,quoted_ratio,exact_ratio,closed_form_ratio,fitted_ratio,closed_form_deviation,fit_deviation\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.scenario,
            r.quoted_ratio,
            r.exact_ratio,
            r.closed_form_ratio,
            r.fitted_ratio,
            r.closed_form_deviation,
            r.fit_deviation
        ));
    }
    out
}

pub fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json serialization");
    s.push('\n');
    s
}
