//! Command-line front end: model/config ingestion, signal I/O, and the four
//! workflows (simulate, coefficient extraction, identification, round-trip
//! audit). Every numeric result comes straight from the library; this binary
//! only parses, dispatches, and serializes.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use focir::ecm_models::{
    randles_state_space, randles_tf_coeffs, to_state_space, BranchParams, FoEcmParams,
    RandlesParams, Resistance,
};
use focir::frac_core::FractionalOrder;
use focir::ident_engine::{
    invert_randles, invert_single_cpe, invert_two_cpe, Classification, IdentifiabilityResult,
    InversionConfig,
};
use focir::ss_sim::simulate;
use focir::tf_builder::{
    coefficient_map, randles_coefficient_map, CoefficientVector, StructureTag,
};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "focir",
    version,
    about = "Fractional-order circuit simulation and identifiability"
)]
struct Cli {
    /// JSON file overriding run defaults (horizon, tolerances, truncation window).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a model against a current profile.
    Simulate {
        /// Model JSON: {"ts", "r_inf", "branches": [{"r": number|"inf", "c", "alpha"}]}.
        #[arg(long)]
        model: PathBuf,
        /// Input CSV with header `time,current`, sampled uniformly at the model ts.
        #[arg(long)]
        input: PathBuf,
        /// Output CSV `time,current,voltage`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit the transfer-function coefficient vector of a model.
    Coeffs {
        #[arg(long)]
        model: PathBuf,
        /// Truncation horizon T (falls back to the config file).
        #[arg(long)]
        horizon: Option<usize>,
        /// Output JSON {"structure", "ts", "T", "f", "g"}.
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover circuit parameters from a coefficient vector.
    Identify {
        /// Coefficient JSON as written by `coeffs`.
        #[arg(long)]
        coeffs: PathBuf,
        /// Override the consistency / residual acceptance tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Forward-map a model, invert, and audit the recovery error.
    Roundtrip {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
        /// Maximum relative parameter error accepted (default depends on structure).
        #[arg(long)]
        tol: Option<f64>,
    },
}

/// Failure categories mapped onto the exit-code contract:
/// 1 tolerance failure, 2 input error, 3 inversion failure.
enum Failure {
    Tolerance(String),
    Input(String),
    Inversion(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Tolerance(_) => 1,
            Failure::Input(_) => 2,
            Failure::Inversion(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Tolerance(m) | Failure::Input(m) | Failure::Inversion(m) => m,
        }
    }
}

fn input_err<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{context}: {e}"))
}

#[derive(Deserialize)]
struct ModelFile {
    ts: f64,
    r_inf: f64,
    branches: Vec<BranchFile>,
}

#[derive(Deserialize)]
struct BranchFile {
    r: ResistanceFile,
    c: f64,
    alpha: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ResistanceFile {
    Finite(f64),
    Open(String),
}

/// A single branch with alpha = 1 is the integer-order Randles circuit; any
/// other branch set must have all orders strictly inside (0, 1).
enum Model {
    Randles { params: RandlesParams, ts: f64 },
    Fractional(FoEcmParams),
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    let text = fs::read_to_string(path).map_err(input_err(&format!("{}", path.display())))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(input_err("model schema"))?;
    let lib = input_err("model");

    if file.branches.len() == 1 && file.branches[0].alpha == 1.0 {
        let b = &file.branches[0];
        let r = match b.r {
            ResistanceFile::Finite(v) => v,
            ResistanceFile::Open(_) => {
                return Err(Failure::Input(
                    "an open resistor is not supported at alpha = 1".into(),
                ))
            }
        };
        if !(file.ts.is_finite() && file.ts > 0.0) {
            return Err(Failure::Input(format!(
                "ts must be positive, got {}",
                file.ts
            )));
        }
        let params = RandlesParams::new(file.r_inf, r, b.c).map_err(lib)?;
        log::info!("parsed Randles model (ts = {})", file.ts);
        return Ok(Model::Randles {
            params,
            ts: file.ts,
        });
    }

    let branches = file
        .branches
        .iter()
        .map(|b| {
            let r = match &b.r {
                ResistanceFile::Finite(v) => Resistance::Finite(*v),
                ResistanceFile::Open(s) if s == "inf" => Resistance::Open,
                ResistanceFile::Open(s) => {
                    return Err(Failure::Input(format!(
                        "resistance must be a number or \"inf\", got \"{s}\""
                    )))
                }
            };
            let alpha = FractionalOrder::new(b.alpha).map_err(input_err("model"))?;
            BranchParams::new(r, b.c, alpha).map_err(input_err("model"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let params = FoEcmParams::new(file.r_inf, branches, file.ts).map_err(lib)?;
    log::info!(
        "parsed fractional model with {} branch(es) (ts = {})",
        params.branches().len(),
        params.ts()
    );
    Ok(Model::Fractional(params))
}

#[derive(Deserialize, Default)]
struct RunConfig {
    horizon: Option<usize>,
    #[serde(default)]
    tolerances: HashMap<String, f64>,
    truncation_window: Option<usize>,
}

impl RunConfig {
    fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(input_err(&format!("{}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(input_err("config schema"))?;
        if let Some(t) = cfg.horizon {
            if t < 2 {
                return Err(Failure::Input(format!(
                    "config horizon must be >= 2, got {t}"
                )));
            }
        }
        for (name, &v) in &cfg.tolerances {
            if !(v.is_finite() && v > 0.0) {
                return Err(Failure::Input(format!(
                    "tolerance {name} must be positive, got {v}"
                )));
            }
        }
        Ok(cfg)
    }

    fn inversion_config(&self) -> InversionConfig {
        let mut cfg = InversionConfig::default();
        for (name, &v) in &self.tolerances {
            match name.as_str() {
                "alpha_root_tol" => cfg.alpha_root_tol = v,
                "alpha_match_tol" => cfg.alpha_match_tol = v,
                "consistency_tol" => cfg.consistency_tol = v,
                "residual_accept" => cfg.residual_accept = v,
                "roundtrip" => {}
                other => log::warn!("ignoring unknown tolerance {other}"),
            }
        }
        cfg
    }

    fn horizon(&self, arg: Option<usize>) -> Result<usize, Failure> {
        let t = arg
            .or(self.horizon)
            .ok_or_else(|| Failure::Input("a horizon is required (--horizon or config)".into()))?;
        if t < 2 {
            return Err(Failure::Input(format!("horizon must be >= 2, got {t}")));
        }
        Ok(t)
    }
}

fn read_current_csv(path: &Path, ts: f64) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let mut reader =
        csv::Reader::from_path(path).map_err(input_err(&format!("{}", path.display())))?;
    let headers = reader.headers().map_err(input_err("input csv"))?.clone();
    if headers.len() < 2 || &headers[0] != "time" || &headers[1] != "current" {
        return Err(Failure::Input(format!(
            "input csv must have header `time,current`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut times = Vec::new();
    let mut currents = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(input_err("input csv"))?;
        let parse = |field: &str, name: &str| {
            field.trim().parse::<f64>().map_err(|e| {
                Failure::Input(format!(
                    "input csv row {}: bad {name} `{field}`: {e}",
                    k + 1
                ))
            })
        };
        times.push(parse(&record[0], "time")?);
        currents.push(parse(&record[1], "current")?);
    }
    if times.is_empty() {
        return Err(Failure::Input("input csv has no samples".into()));
    }
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        if ((dt - ts) / ts).abs() > 1e-6 {
            return Err(Failure::Input(format!(
                "non-uniform sampling at row {k}: dt = {dt}, model ts = {ts}"
            )));
        }
    }
    Ok((times, currents))
}

fn cmd_simulate(model: &Path, input: &Path, out: &Path, cfg: &RunConfig) -> Result<(), Failure> {
    let model = load_model(model)?;
    let ts = match &model {
        Model::Randles { ts, .. } => *ts,
        Model::Fractional(p) => p.ts(),
    };
    let (times, u) = read_current_csv(input, ts)?;
    let depth = u.len().max(2);
    let sys = match &model {
        Model::Randles { params, ts } => randles_state_space(params, *ts, depth),
        Model::Fractional(params) => to_state_space(params, depth),
    }
    .map_err(input_err("model"))?;
    let x0 = vec![0.0; sys.dim()];
    let trace = simulate(&sys, &u, &x0, cfg.truncation_window).map_err(input_err("simulation"))?;

    let mut writer =
        csv::Writer::from_path(out).map_err(input_err(&format!("{}", out.display())))?;
    writer
        .write_record(["time", "current", "voltage"])
        .map_err(input_err("output csv"))?;
    for k in 0..u.len() {
        writer
            .write_record([
                times[k].to_string(),
                u[k].to_string(),
                trace.y[k].to_string(),
            ])
            .map_err(input_err("output csv"))?;
    }
    writer.flush().map_err(input_err("output csv"))?;
    log::info!("wrote {} samples", u.len());
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct CoeffsFile {
    structure: String,
    ts: f64,
    #[serde(rename = "T")]
    t: usize,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl CoeffsFile {
    fn from_vector(cv: &CoefficientVector) -> Self {
        let (f, g) = cv.blocks();
        Self {
            structure: cv.structure().as_str().to_string(),
            ts: cv.ts(),
            t: cv.horizon(),
            f: f.to_vec(),
            g: g.to_vec(),
        }
    }
}

fn model_coefficients(model: &Model, t: usize) -> Result<CoefficientVector, Failure> {
    match model {
        Model::Randles { params, ts } => randles_coefficient_map(params, *ts),
        Model::Fractional(params) => {
            if params.branches().len() > 2 {
                return Err(Failure::Input(format!(
                    "coefficient extraction supports at most two branches, got {}",
                    params.branches().len()
                )));
            }
            coefficient_map(params, t)
        }
    }
    .map_err(input_err("model"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(input_err("serialization"))?;
    fs::write(path, text + "\n").map_err(input_err(&format!("{}", path.display())))
}

fn cmd_coeffs(
    model: &Path,
    horizon: Option<usize>,
    out: &Path,
    cfg: &RunConfig,
) -> Result<(), Failure> {
    let model = load_model(model)?;
    let t = cfg.horizon(horizon)?;
    let cv = model_coefficients(&model, t)?;
    write_json(out, &CoeffsFile::from_vector(&cv))
}

#[derive(Serialize)]
struct IdentifyOut {
    structure: String,
    classification: String,
    /// Each solution flattened as [R_inf, R_1.., C_1.., alpha_1..], sorted by
    /// ascending alpha_1.
    solutions: Vec<Vec<f64>>,
    residuals: Vec<f64>,
}

fn run_inversion(file: &CoeffsFile, cfg: &InversionConfig) -> Result<IdentifyOut, Failure> {
    let inv_err = |e: focir::Error| Failure::Inversion(format!("inversion: {e}"));
    match file.structure.as_str() {
        "randles" => {
            if file.f.len() != 2 || file.g.len() != 1 {
                return Err(Failure::Input(format!(
                    "randles expects 2 f and 1 g coefficients, got {} and {}",
                    file.f.len(),
                    file.g.len()
                )));
            }
            let p = invert_randles(file.f[0], file.f[1], file.g[0], file.ts).map_err(inv_err)?;
            let (f1, f0, g0) = randles_tf_coeffs(&p, file.ts).map_err(inv_err)?;
            let residual = [(f1, file.f[0]), (f0, file.f[1]), (g0, file.g[0])]
                .iter()
                .map(|&(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(1e-12))
                .fold(0.0, f64::max);
            Ok(IdentifyOut {
                structure: file.structure.clone(),
                classification: Classification::GloballyIdentifiable.to_string(),
                solutions: vec![vec![p.r_inf, p.r1, p.c1]],
                residuals: vec![residual],
            })
        }
        "single_cpe" | "two_cpe" => {
            let tag = if file.structure == "single_cpe" {
                StructureTag::SingleCpe
            } else {
                StructureTag::TwoCpe
            };
            let mut values = file.f.clone();
            values.extend_from_slice(&file.g);
            let cv = CoefficientVector::new(values, tag, file.t, file.ts);
            let result = if tag == StructureTag::SingleCpe {
                invert_single_cpe(&cv, cfg)
            } else {
                invert_two_cpe(&cv, cfg)
            }
            .map_err(inv_err)?;
            Ok(identify_out(&file.structure, &result))
        }
        other => Err(Failure::Input(format!(
            "unsupported structure tag `{other}`"
        ))),
    }
}

fn identify_out(structure: &str, result: &IdentifiabilityResult) -> IdentifyOut {
    IdentifyOut {
        structure: structure.to_string(),
        classification: result.classification.to_string(),
        solutions: result.solutions.iter().map(|s| s.theta()).collect(),
        residuals: result.residuals.clone(),
    }
}

fn cmd_identify(
    coeffs: &Path,
    tol: Option<f64>,
    out: &Path,
    cfg: &RunConfig,
) -> Result<(), Failure> {
    let text = fs::read_to_string(coeffs).map_err(input_err(&format!("{}", coeffs.display())))?;
    let file: CoeffsFile = serde_json::from_str(&text).map_err(input_err("coeffs schema"))?;
    let mut inv_cfg = cfg.inversion_config();
    if let Some(tol) = tol {
        inv_cfg.consistency_tol = tol;
        inv_cfg.residual_accept = tol;
    }
    let result = run_inversion(&file, &inv_cfg)?;
    log::info!(
        "{}: {} solution(s), {}",
        result.structure,
        result.solutions.len(),
        result.classification
    );
    write_json(out, &result)
}

#[derive(Serialize)]
struct RoundtripReport {
    structure: String,
    classification: String,
    solutions: usize,
    /// Max relative error of the closest solution against the true parameters.
    best_error: f64,
    tolerance: f64,
    pass: bool,
}

fn cmd_roundtrip(
    model: &Path,
    horizon: Option<usize>,
    tol: Option<f64>,
    cfg: &RunConfig,
) -> Result<(), Failure> {
    let model = load_model(model)?;
    let t = cfg.horizon(horizon)?;
    let cv = model_coefficients(&model, t)?;
    let file = CoeffsFile::from_vector(&cv);
    let result = run_inversion(&file, &cfg.inversion_config())?;

    let truth = match &model {
        Model::Randles { params, .. } => vec![params.r_inf, params.r1, params.c1],
        Model::Fractional(params) => params.theta(),
    };
    let best_error = result
        .solutions
        .iter()
        .map(|s| {
            truth
                .iter()
                .zip(s)
                .map(|(&a, &b)| (a - b).abs() / a.abs().max(b.abs()).max(1e-12))
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    let tolerance = tol
        .or_else(|| cfg.tolerances.get("roundtrip").copied())
        .unwrap_or(match file.structure.as_str() {
            "randles" => 1e-9,
            "single_cpe" => 1e-6,
            _ => 1e-4,
        });
    let pass = best_error <= tolerance;
    let report = RoundtripReport {
        structure: result.structure.clone(),
        classification: result.classification.clone(),
        solutions: result.solutions.len(),
        best_error,
        tolerance,
        pass,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(input_err("serialization"))?
    );
    if pass {
        Ok(())
    } else {
        Err(Failure::Tolerance(format!(
            "round-trip error {best_error:.3e} exceeds tolerance {tolerance:.3e}"
        )))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Simulate { model, input, out } => cmd_simulate(model, input, out, &cfg),
        Command::Coeffs {
            model,
            horizon,
            out,
        } => cmd_coeffs(model, *horizon, out, &cfg),
        Command::Identify { coeffs, tol, out } => cmd_identify(coeffs, *tol, out, &cfg),
        Command::Roundtrip {
            model,
            horizon,
            tol,
        } => cmd_roundtrip(model, *horizon, *tol, &cfg),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FOCIR_LOG", "error")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            std::process::exit(failure.code());
        }
    }
}
