use std::path::Path;

use serde::Serialize;
use tarry_core::lowerbound::{box_sweep, disjointness_check, BoxSweepRow, DisjointnessReport};
use tarry_core::output::{format_float, to_json};
use tarry_core::poly::{alpha_inverse, critical_threshold, monomial_count};
use tarry_core::quad::osc_integral;
use tarry_core::theta::{growth_diagnostic, parseval_check, theta_truncated, GrowthReport};
use tarry_core::variety::{
    gram_split, gram_upper_bound, residual, thin_shell_measure, translate_solution, GramSplit, ShellWeight,
};
use tarry_core::{CoeffVector, PointConfig, PolySpec, ThetaEstimate};

use crate::args::*;
use crate::error::CliError;

/// Rendered output of one run.
pub struct Rendered(pub String);

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a Command,
    result: T,
}

fn json<T: Serialize>(cmd: &Command, result: T) -> Result<Rendered, CliError> {
    let mut text = to_json(&Envelope { config: cmd, result }).map_err(|e| CliError::Compute(e.to_string()))?;
    text.push('\n');
    Ok(Rendered(text))
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Rendered, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Compute(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Compute(e.to_string()))?;
    Ok(Rendered(String::from_utf8(bytes).expect("csv output is UTF-8")))
}

fn no_csv(common: &Common, name: &str) -> Result<(), CliError> {
    if common.format == Format::Csv {
        return Err(CliError::Input(format!("{name} has no CSV form; CSV is only emitted for sweeps")));
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(CliError::Input(format!("{} is empty", path.display())));
    }
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("cannot parse {}: {e}", path.display())))
}

const THETA_HEADER: [&str; 8] = ["n", "m", "k", "R", "value", "std_error", "n_samples", "seed"];

fn theta_row(e: &ThetaEstimate) -> Vec<String> {
    vec![
        e.n.to_string(),
        e.m.to_string(),
        e.k.to_string(),
        format_float(e.radius),
        format_float(e.value),
        format_float(e.std_error),
        e.n_samples.to_string(),
        e.seed.to_string(),
    ]
}

pub fn run(cmd: &Command) -> Result<Rendered, CliError> {
    match cmd {
        Command::Exponent(a) => exponent(cmd, a),
        Command::Integral(a) => integral(cmd, a),
        Command::Theta(a) => theta(cmd, a),
        Command::Parseval(a) => parseval(cmd, a),
        Command::Gram(a) => gram(cmd, a),
        Command::Thinshell(a) => thinshell(cmd, a),
        Command::Boxes(a) => boxes(cmd, a),
        Command::Diagnose(a) => diagnose(cmd, a),
    }
}

#[derive(Serialize)]
struct ExponentReport {
    #[serde(rename = "N")]
    big_n: usize,
    threshold: u64,
    alpha_inverse: u64,
    /// `k` with `4k ≤ threshold`.
    divergent_k: Vec<u64>,
    smallest_convergent_k: u64,
}

fn exponent(cmd: &Command, a: &ExponentArgs) -> Result<Rendered, CliError> {
    no_csv(&a.common, "exponent")?;
    let threshold = critical_threshold(a.n, a.m)?;
    let last = threshold / 4;
    json(
        cmd,
        ExponentReport {
            big_n: monomial_count(a.n, a.m)?,
            threshold,
            alpha_inverse: alpha_inverse(a.n, a.m)?,
            divergent_k: (1..=last).collect(),
            smallest_convergent_k: last + 1,
        },
    )
}

fn integral(cmd: &Command, a: &IntegralArgs) -> Result<Rendered, CliError> {
    no_csv(&a.common, "integral")?;
    let f: PolySpec = read_json(&a.poly)?;
    json(cmd, osc_integral(&f, a.tol)?)
}

fn theta(cmd: &Command, a: &ThetaArgs) -> Result<Rendered, CliError> {
    let estimates = a
        .radius
        .iter()
        .map(|&r| theta_truncated(a.n, a.m, a.k, r, a.samples, a.common.seed, a.tol))
        .collect::<Result<Vec<_>, _>>()?;
    match a.common.format {
        Format::Json => json(cmd, estimates),
        Format::Csv => csv_table(&THETA_HEADER, estimates.iter().map(theta_row)),
    }
}

#[derive(Serialize)]
struct ParsevalReport {
    value: f64,
    /// The limiting mass under the `e^{2πi·}` kernel.
    plancherel_constant: f64,
    deviation: f64,
    /// Which candidate limit, `1` or `4π²`, lies closer to the value.
    closest_candidate: &'static str,
}

fn parseval(cmd: &Command, a: &ParsevalArgs) -> Result<Rendered, CliError> {
    no_csv(&a.common, "parseval")?;
    let value = parseval_check(a.gamma, a.radius, a.tol)?;
    let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
    json(
        cmd,
        ParsevalReport {
            value,
            plancherel_constant: 1.0,
            deviation: value - 1.0,
            closest_candidate: if (value - 1.0).abs() <= (value - four_pi_sq).abs() {
                "1"
            } else {
                "4pi^2"
            },
        },
    )
}

#[derive(Serialize)]
struct GramReport {
    #[serde(rename = "G0")]
    g0: f64,
    hadamard_bound: f64,
    upper_bound: f64,
    within_upper_bound: bool,
    /// Max-norm of the system residual; zero for solutions.
    residual_max: f64,
    translated_g0: f64,
    translation_rel_diff: Option<f64>,
    scaled_g0: f64,
    scaled_predicted: f64,
    scaling_rel_diff: Option<f64>,
    split: GramSplit,
    superadditive: bool,
}

fn rel_diff(a: f64, b: f64) -> Option<f64> {
    (b != 0.0).then(|| (a - b).abs() / b.abs())
}

fn gram(cmd: &Command, a: &GramArgs) -> Result<Rendered, CliError> {
    no_csv(&a.common, "gram")?;
    let cfg: PointConfig = read_json(&a.points)?;
    let split = gram_split(&cfg, a.n, a.m)?;
    let g0 = split.full.g0;
    let translated = gram_split(&translate_solution(&cfg, a.shift[0], a.shift[1]), a.n, a.m)?.full.g0;
    let scaled = gram_split(&cfg.scaled(a.scale), a.n, a.m)?.full.g0;
    let predicted = a.scale.powi(2 * alpha_inverse(a.n, a.m)? as i32) * g0;
    let upper = gram_upper_bound(a.n, a.m, cfg.k())?;
    json(
        cmd,
        GramReport {
            g0,
            hadamard_bound: split.full.hadamard_bound,
            upper_bound: upper,
            within_upper_bound: g0 <= upper,
            residual_max: residual(&cfg, a.n, a.m)?.max_abs(),
            translated_g0: translated,
            translation_rel_diff: rel_diff(translated, g0),
            scaled_g0: scaled,
            scaled_predicted: predicted,
            scaling_rel_diff: rel_diff(scaled, predicted),
            superadditive: split.superadditive(),
            split,
        },
    )
}

fn thinshell(cmd: &Command, a: &ThinshellArgs) -> Result<Rendered, CliError> {
    no_csv(&a.common, "thinshell")?;
    let dim = monomial_count(a.n, a.m)?;
    let target = if a.target.is_empty() {
        CoeffVector::zeros(dim)
    } else {
        CoeffVector::from_vec(a.target.clone())
    };
    let weight = match a.weight {
        Weight::None => ShellWeight::None,
        Weight::SqrtG0 => ShellWeight::SqrtG0,
    };
    json(cmd, thin_shell_measure(a.n, a.m, a.k, &target, a.h, a.samples, a.common.seed, weight)?)
}

#[derive(Serialize)]
struct BoxesReport {
    disjointness: DisjointnessReport,
    sweep: Vec<BoxSweepRow>,
    all_margins_nonpositive: bool,
}

fn boxes(cmd: &Command, a: &BoxesArgs) -> Result<Rendered, CliError> {
    let sweep = box_sweep(a.n, a.m, a.k, &a.scales, a.beta_samples, a.common.seed)?;
    match a.common.format {
        Format::Json => json(
            cmd,
            BoxesReport {
                disjointness: disjointness_check(a.n, a.m, a.k, &a.scales)?,
                all_margins_nonpositive: sweep.iter().all(|r| r.margin_max <= 0.0),
                sweep,
            },
        ),
        Format::Csv => csv_table(
            &["P", "nu", "mu", "volume", "margin_max"],
            sweep.iter().map(|r| {
                vec![
                    r.p.to_string(),
                    r.nu.to_string(),
                    r.mu.to_string(),
                    format_float(r.volume),
                    format_float(r.margin_max),
                ]
            }),
        ),
    }
}

fn diagnose(cmd: &Command, a: &DiagnoseArgs) -> Result<Rendered, CliError> {
    let report: GrowthReport = growth_diagnostic(a.n, a.m, a.k, &a.radii, a.samples, a.common.seed, a.tol)?;
    match a.common.format {
        Format::Json => json(cmd, report),
        Format::Csv => csv_table(&THETA_HEADER, report.values.iter().map(theta_row)),
    }
}
