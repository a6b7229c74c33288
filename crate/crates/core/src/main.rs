//! Command-line surface: sampled MSE curves, threshold sweeps, and pulse
//! spectrum design, emitted as CSV/JSON with dB/GHz/ns units at the
//! boundary (SI units internally).

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use toa_mie::bounds::{alb_b, alb_z, BoundVariant};
use toa_mie::config;
use toa_mie::design::{
    design_fixed_bandwidth, design_free_bandwidth, exhaustive_search_reference,
    DesignConstraints, LambdaMethod, MsePrediction,
};
use toa_mie::mc::{simulate_mle_mse, McConfig};
use toa_mie::mse::{
    crlb, ecrlb, max_mse, mse_ana, mse_ana_env, mse_num_curve, CurveLabel,
};
use toa_mie::mvn::MvnConfig;
use toa_mie::pulse::{build_acr, intervals_auto, AcrModel, EstimationSetup, PulseSpec};
use toa_mie::threshold::{
    rho_am1_analytic, rho_am2_analytic, rho_as_analytic, thresholds_numeric, Alphas,
};
use toa_mie::{db_to_lin, lin_to_db};

#[derive(Parser)]
#[command(
    name = "toa-mie",
    about = "Time-of-arrival estimation MSE, SNR thresholds, and pulse spectrum design"
)]
struct Cli {
    /// Base seed for all stochastic components.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit MSE-vs-SNR curves for a preset as CSV.
    Curves(CurvesArgs),
    /// Sweep thresholds against gamma (baseband) or lambda (passband) as CSV.
    Thresholds(ThresholdsArgs),
    /// Solve the spectrum design problem; JSON output.
    Design(DesignArgs),
}

#[derive(Args)]
struct CurvesArgs {
    /// Built-in preset name (baseband, passband) or name from --preset-file.
    #[arg(long, default_value = "baseband")]
    preset: String,
    /// TOML file with additional presets.
    #[arg(long)]
    preset_file: Option<PathBuf>,
    #[arg(long, default_value_t = -20.0)]
    snr_min_db: f64,
    #[arg(long, default_value_t = 60.0)]
    snr_max_db: f64,
    #[arg(long, default_value_t = 1.0)]
    step_db: f64,
    /// Add a Monte Carlo curve with this many trials per SNR point.
    #[arg(long)]
    mc_trials: Option<usize>,
    /// QMC points per interval-probability evaluation.
    #[arg(long, default_value_t = 2048)]
    mvn_points: usize,
}

#[derive(Args)]
struct ThresholdsArgs {
    /// Sweep variable: gamma (a priori time-bandwidth) or lambda (f_c/B).
    #[arg(long, value_parser = ["gamma", "lambda"])]
    sweep: String,
    #[arg(long)]
    min: f64,
    #[arg(long)]
    max: f64,
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    /// Skip the numeric rows (analytic only; much faster).
    #[arg(long, default_value_t = false)]
    analytic_only: bool,
    #[arg(long, default_value_t = 2048)]
    mvn_points: usize,
}

#[derive(Args)]
struct DesignArgs {
    /// Available SNR in dB.
    #[arg(long)]
    rho0_db: f64,
    /// Band as fl:fh in GHz, e.g. 3.1:10.6.
    #[arg(long)]
    band: String,
    /// Fixed bandwidth in GHz (omit for the free-bandwidth problem).
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Use the closed-form threshold curve for lambda0 instead of the
    /// numeric MSE curve.
    #[arg(long, default_value_t = false)]
    analytic_lambda0: bool,
    /// Also run the exhaustive grid search and report it.
    #[arg(long, default_value_t = false)]
    exhaustive: bool,
    #[arg(long, default_value_t = 4096)]
    mvn_points: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Curves(a) => cmd_curves(a, cli.seed),
        Command::Thresholds(a) => cmd_thresholds(a, cli.seed),
        Command::Design(a) => cmd_design(a, cli.seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

type AnyError = Box<dyn std::error::Error>;

fn resolve_preset(name: &str, file: &Option<PathBuf>) -> Result<config::Preset, AnyError> {
    if let Some(path) = file {
        let presets = config::load_presets(path)?;
        if let Some(p) = presets.get(name) {
            return Ok(*p);
        }
    }
    config::builtin(name).ok_or_else(|| format!("unknown preset '{name}'").into())
}

fn emit_rows(
    out: &mut impl Write,
    grid_db: &[f64],
    values: &[f64],
    label: CurveLabel,
) -> Result<(), AnyError> {
    for (db, e) in grid_db.iter().zip(values) {
        writeln!(
            out,
            "{:.4},{:e},{:e},{:.6},{}",
            db,
            e,
            e.sqrt(),
            e.sqrt() * 1e12,
            label.as_str()
        )?;
    }
    Ok(())
}

fn cmd_curves(a: &CurvesArgs, seed: u64) -> Result<(), AnyError> {
    let preset = resolve_preset(&a.preset, &a.preset_file)?;
    let acr = build_acr(&preset.pulse);
    let setup = preset.setup;
    let mut grid_db = Vec::new();
    let mut v = a.snr_min_db;
    while v <= a.snr_max_db + 1e-9 {
        grid_db.push(v);
        v += a.step_db;
    }
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    writeln!(out, "snr_db,mse_s2,rmse_s,sqrt_mse_ps,label")?;

    let col = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        grid_db.iter().map(|&db| f(db_to_lin(db))).collect()
    };
    emit_rows(&mut out, &grid_db, &col(&|r| crlb(&acr, r).unwrap()), CurveLabel::Crlb)?;
    emit_rows(&mut out, &grid_db, &col(&|r| ecrlb(&acr, r).unwrap()), CurveLabel::Ecrlb)?;
    emit_rows(&mut out, &grid_db, &col(&|_| max_mse(&setup)), CurveLabel::MaxMse)?;
    emit_rows(&mut out, &grid_db, &col(&|r| mse_ana(&acr, r).unwrap()), CurveLabel::EAna)?;
    if acr.is_oscillating() {
        emit_rows(
            &mut out,
            &grid_db,
            &col(&|r| mse_ana_env(&acr, r).unwrap()),
            CurveLabel::EAnaEnv,
        )?;
    }
    let z1: Vec<f64> = grid_db
        .iter()
        .map(|&db| alb_z(&acr, &setup, db_to_lin(db), BoundVariant::V1))
        .collect::<Result<_, _>>()?;
    emit_rows(&mut out, &grid_db, &z1, CurveLabel::Z1)?;
    let b1: Vec<f64> = grid_db
        .iter()
        .map(|&db| alb_b(&acr, &setup, db_to_lin(db), BoundVariant::V1))
        .collect::<Result<_, _>>()?;
    emit_rows(&mut out, &grid_db, &b1, CurveLabel::B1)?;

    let iv = intervals_auto(&acr, &setup)?;
    let cfg = MvnConfig {
        points: a.mvn_points,
        randomizations: 4,
        seed,
    };
    let e_num = mse_num_curve(&acr, &setup, &iv, &grid_db, &cfg)?;
    emit_rows(&mut out, &grid_db, &e_num.mse, CurveLabel::ENum)?;

    if let Some(trials) = a.mc_trials {
        let mc = McConfig::for_setup(&acr, &setup, trials, seed)?;
        let mcv: Vec<f64> = grid_db
            .iter()
            .map(|&db| simulate_mle_mse(&acr, &setup, db_to_lin(db), &mc).map(|(m, _)| m))
            .collect::<Result<_, _>>()?;
        emit_rows(&mut out, &grid_db, &mcv, CurveLabel::MonteCarlo)?;
    }
    Ok(())
}

fn fmt_opt(db: Option<f64>) -> String {
    db.map(|v| format!("{v:.2}")).unwrap_or_default()
}

fn cmd_thresholds(a: &ThresholdsArgs, seed: u64) -> Result<(), AnyError> {
    let alphas = Alphas::default();
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    writeln!(
        out,
        "sweep_var,value,rho_pr_db,rho_am1_db,rho_am2_db,rho_as_db,provenance"
    )?;
    let mut value = a.min;
    while value <= a.max + 1e-9 {
        let (acr, setup): (AcrModel, EstimationSetup) = match a.sweep.as_str() {
            "gamma" => {
                let acr = build_acr(&PulseSpec::baseband_gaussian(1e-9)?);
                let t = value / acr.bandwidth;
                (acr, EstimationSetup::new(0.0, -t / 2.0, t / 2.0)?)
            }
            _ => {
                let acr = toa_mie::threshold::gaussian_family_acr(value);
                let t_w = acr.spec.t_w;
                (acr, EstimationSetup::new(0.0, -2.0 * t_w, 1.5 * t_w)?)
            }
        };
        if !a.analytic_only {
            let iv = intervals_auto(&acr, &setup)?;
            let grid_db: Vec<f64> = (0..=48).map(|i| 8.0 + 0.5 * i as f64).collect();
            let cfg = MvnConfig {
                points: a.mvn_points,
                randomizations: 4,
                seed,
            };
            let curve = mse_num_curve(&acr, &setup, &iv, &grid_db, &cfg)?;
            let ts = thresholds_numeric(&curve, &acr, &setup, alphas);
            writeln!(
                out,
                "{},{:.4},{},{},{},{},numeric:e_num",
                a.sweep,
                value,
                fmt_opt(ts.rho_pr_db()),
                fmt_opt(ts.rho_am1_db()),
                fmt_opt(ts.rho_am2_db()),
                fmt_opt(ts.rho_as_db()),
            )?;
        }
        let ana_as = rho_as_analytic(&acr, alphas).ok().map(lin_to_db);
        let (ana_am1, ana_am2) = if acr.is_oscillating() {
            (
                rho_am1_analytic(&acr, alphas).ok().map(lin_to_db),
                rho_am2_analytic(&acr, alphas).ok().map(lin_to_db),
            )
        } else {
            (None, None)
        };
        writeln!(
            out,
            "{},{:.4},,{},{},{},analytic",
            a.sweep,
            value,
            fmt_opt(ana_am1),
            fmt_opt(ana_am2),
            fmt_opt(ana_as),
        )?;
        value += a.step;
    }
    Ok(())
}

fn cmd_design(a: &DesignArgs, seed: u64) -> Result<(), AnyError> {
    let (fl, fh) = a
        .band
        .split_once(':')
        .ok_or("band must be fl:fh in GHz")
        .and_then(|(l, h)| {
            Ok((
                l.parse::<f64>().map_err(|_| "bad band")?,
                h.parse::<f64>().map_err(|_| "bad band")?,
            ))
        })?;
    let constraints = DesignConstraints::new(
        fl * 1e9,
        fh * 1e9,
        a.bandwidth.map(|b| b * 1e9),
        db_to_lin(a.rho0_db),
    )?;
    let method = if a.analytic_lambda0 {
        LambdaMethod::Analytic
    } else {
        LambdaMethod::NumericCurve
    };
    let cfg = MvnConfig {
        points: a.mvn_points,
        randomizations: 4,
        seed,
    };
    let sol = if a.bandwidth.is_some() {
        design_fixed_bandwidth(&constraints, method, &cfg)?
    } else {
        design_free_bandwidth(&constraints, method, &cfg)?
    };
    let mut obj = serde_json::json!({
        "B0_GHz": sol.b0 / 1e9,
        "fc0_GHz": sol.f_c0 / 1e9,
        "lambda0": sol.lambda0,
        "regime": sol.regime,
        "rmse_ps": sol.rmse() * 1e12,
    });
    match sol.mse {
        MsePrediction::Point(e) => {
            obj["mse_ps2"] = serde_json::json!(e * 1e24);
        }
        MsePrediction::Interval(lo, hi) => {
            obj["mse_interval_ps2"] = serde_json::json!([lo * 1e24, hi * 1e24]);
        }
    }
    if a.exhaustive {
        let cap = sol.lambda0.map(|l| l + 3.0).unwrap_or(5.0);
        let ex = exhaustive_search_reference(&constraints, 0.2e9, 0.1e9, cap, &cfg)?;
        obj["exhaustive"] = serde_json::json!({
            "B1_GHz": ex.b1 / 1e9,
            "fc1_GHz": ex.f_c1 / 1e9,
            "lambda1": ex.lambda1,
            "e1_ps2": ex.e1 * 1e24,
        });
    }
    println!("{}", serde_json::to_string_pretty(&obj)?);
    Ok(())
}
