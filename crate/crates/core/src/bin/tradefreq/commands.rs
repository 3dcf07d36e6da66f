//! Subcommand handlers: resolve parameters, run a pipeline, write output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use tradefreq::experiments::{run_empirical, run_mc_experiment, CostSpec, McExperimentSpec};
use tradefreq::fbm::{sample_path, FbmConfig, FbmMethod};
use tradefreq::hurst::{default_levels, fit_scaling};
use tradefreq::ingest::{load_price_csv, CsvSchema, SpacingPolicy, TimeAxis};
use tradefreq::laziness::{LazinessMode, LazinessSpec};
use tradefreq::model::{optimize_deterministic, DeterministicParams, DEFAULT_LEVEL_CAP};
use tradefreq::output;
use tradefreq::stochastic::{
    delta_star_closed_form, kappa_from_sigma, solve_foc_latency, statics_closed_form,
    OptimalInterval, StochasticParams,
};
use tradefreq::{Error, Result};

use crate::config::{required, resolve_output, to_u32, to_usize, Config, OUTPUT_DIR_ENV};
use crate::{
    Common, EmpiricalArgs, EstimateHurstArgs, LazinessArgs, McArgs, OptimizeDetArgs,
    OptimizeFbmArgs, SchemaArgs, SimulateArgs,
};

#[derive(Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

struct Session {
    config: Config,
    format: Format,
    output: Option<PathBuf>,
}

impl Session {
    fn open(common: &Common, name: &str, default_format: Format) -> Result<Self> {
        let config = match &common.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let format = match common.format.clone().or(config.string("format")?) {
            None => default_format,
            Some(f) => match f.as_str() {
                "json" => Format::Json,
                "csv" => Format::Csv,
                other => {
                    return Err(invalid(
                        "format",
                        format!("unknown format `{other}` (json, csv)"),
                    ))
                }
            },
        };
        let explicit = common
            .output
            .clone()
            .or(config.string("output")?.map(PathBuf::from));
        let ext = match format {
            Format::Json => "json",
            Format::Csv => "csv",
        };
        let env_dir = std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from);
        let output = resolve_output(explicit, &format!("{name}.{ext}"), env_dir);
        Ok(Session {
            config,
            format,
            output,
        })
    }

    fn writer(&self, path: Option<&Path>) -> Result<Box<dyn Write>> {
        match path {
            None => Ok(Box::new(std::io::stdout().lock())),
            Some(p) => {
                let f = File::create(p).map_err(|source| Error::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                Ok(Box::new(BufWriter::new(f)))
            }
        }
    }

    /// Writes the result. JSON embeds the effective config; CSV stays plain
    /// data and, when written to a file, gets a `<file>.meta.json` sidecar.
    fn emit<C: Serialize, R: Serialize>(
        &self,
        command: &str,
        config: &C,
        result: &R,
        csv: impl FnOnce(&mut dyn Write) -> Result<()>,
    ) -> Result<()> {
        let meta = Meta {
            command,
            version: env!("CARGO_PKG_VERSION"),
            format: self.format,
            config,
        };
        let out = self.output.as_deref();
        let io_err = |p: Option<&Path>, source| Error::Io {
            path: p.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
            source,
        };
        match self.format {
            Format::Json => {
                let mut w = self.writer(out)?;
                output::write_json(&mut w, &Envelope { meta, result })?;
                w.flush().map_err(|e| io_err(out, e))
            }
            Format::Csv => {
                let mut w = self.writer(out)?;
                csv(&mut w)?;
                w.flush().map_err(|e| io_err(out, e))?;
                if let Some(p) = out {
                    let mut side = p.as_os_str().to_owned();
                    side.push(".meta.json");
                    let side = PathBuf::from(side);
                    let mut w = self.writer(Some(&side))?;
                    output::write_json(&mut w, &meta)?;
                    w.flush().map_err(|e| io_err(Some(&side), e))?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Serialize)]
struct Meta<'a, C> {
    command: &'a str,
    version: &'a str,
    format: Format,
    config: &'a C,
}

#[derive(Serialize)]
struct Envelope<'a, C, R> {
    meta: Meta<'a, C>,
    result: &'a R,
}

fn parse_method(s: Option<String>) -> Result<FbmMethod> {
    s.map_or(Ok(FbmMethod::Circulant), |m| m.parse())
}

fn resolve_laziness(a: &LazinessArgs, cfg: &Config, default: LazinessSpec) -> Result<LazinessSpec> {
    let mode = match a.laziness_mode.clone().or(cfg.string("laziness-mode")?) {
        Some(m) => m.parse::<LazinessMode>()?,
        None => default.mode,
    };
    let spec = LazinessSpec {
        mode,
        base: a
            .laziness_base
            .or(cfg.f64("laziness-base")?)
            .unwrap_or(default.base),
        scale: a
            .laziness_scale
            .or(cfg.f64("laziness-scale")?)
            .unwrap_or(default.scale),
        exponent: a
            .laziness_exponent
            .or(cfg.f64("laziness-exponent")?)
            .unwrap_or(default.exponent),
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Serialize)]
struct SchemaEcho {
    input: PathBuf,
    schema: CsvSchema,
    levels: Option<u32>,
}

fn resolve_schema(a: &SchemaArgs, cfg: &Config) -> Result<SchemaEcho> {
    let d = CsvSchema::default();
    let spacing = match a.spacing.clone().or(cfg.string("spacing")?).as_deref() {
        None | Some("reject") => SpacingPolicy::Reject,
        Some("resample-locf") => SpacingPolicy::ResampleLocf,
        Some(o) => {
            return Err(invalid(
                "spacing",
                format!("unknown policy `{o}` (reject, resample-locf)"),
            ))
        }
    };
    let time_axis = match a.time_axis.clone().or(cfg.string("time-axis")?).as_deref() {
        None | Some("timestamp") => TimeAxis::Timestamp,
        Some("observation") => TimeAxis::Observation,
        Some(o) => {
            return Err(invalid(
                "time-axis",
                format!("unknown axis `{o}` (timestamp, observation)"),
            ))
        }
    };
    let input = required(
        a.input.clone().or(cfg.string("input")?.map(PathBuf::from)),
        "input",
    )?;
    let levels = a
        .levels
        .or(cfg.u64("levels")?)
        .map(|v| to_u32(v, "levels"))
        .transpose()?;
    Ok(SchemaEcho {
        input,
        schema: CsvSchema {
            date_column: a
                .date_column
                .clone()
                .or(cfg.string("date-column")?)
                .unwrap_or(d.date_column),
            price_column: a
                .price_column
                .clone()
                .or(cfg.string("price-column")?)
                .unwrap_or(d.price_column),
            log_transform: a
                .log_transform
                .or(cfg.bool("log-transform")?)
                .unwrap_or(d.log_transform),
            spacing,
            time_axis,
        },
        levels,
    })
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let s = Session::open(&a.common, "simulate", Format::Csv)?;
    let c = &s.config;
    let cfg = FbmConfig {
        hurst: required(a.hurst.or(c.f64("hurst")?), "hurst")?,
        sigma: a.sigma.or(c.f64("sigma")?).unwrap_or(1.0),
        drift: a.drift.or(c.f64("drift")?).unwrap_or(0.0),
        n_steps: to_usize(required(a.n.or(c.u64("n")?), "n")?, "n")?,
        horizon: a.horizon.or(c.f64("horizon")?).unwrap_or(1.0),
        method: parse_method(a.method.or(c.string("method")?))?,
        seed: a.seed.or(c.u64("seed")?).unwrap_or(0),
    };
    let path = sample_path(&cfg)?;
    s.emit("simulate", &cfg, &path, |w| {
        output::write_path_csv(w, &path)
    })
}

pub fn optimize_det(a: OptimizeDetArgs) -> Result<()> {
    let s = Session::open(&a.common, "optimize-det", Format::Json)?;
    let c = &s.config;
    let laziness = resolve_laziness(&a.laziness, c, LazinessSpec::none())?;
    let cap = a
        .level_cap
        .or(c.u64("level-cap")?)
        .map_or(Ok(DEFAULT_LEVEL_CAP), |v| to_u32(v, "level-cap"))?;
    let p = DeterministicParams::new(
        required(a.horizon.or(c.f64("horizon")?), "horizon")?,
        required(a.roughness.or(c.f64("roughness")?), "roughness")?,
        a.micro.or(c.f64("micro")?).unwrap_or(0.0),
        a.spread.or(c.f64("spread")?).unwrap_or(0.0),
        laziness,
    )?
    .with_level_cap(cap)?;
    let curve = optimize_deterministic(&p)?;
    s.emit("optimize-det", &p, &curve, |w| {
        output::write_curve_csv(w, &curve)
    })
}

#[derive(Serialize)]
struct FbmOptimum {
    cost_free: OptimalInterval,
    latency: OptimalInterval,
    statics: tradefreq::stochastic::ClosedFormStatics,
}

pub fn optimize_fbm(a: OptimizeFbmArgs) -> Result<()> {
    let s = Session::open(&a.common, "optimize-fbm", Format::Json)?;
    let c = &s.config;
    let hurst = required(a.hurst.or(c.f64("hurst")?), "hurst")?;
    let kappa = match (a.kappa, a.sigma) {
        (Some(_), Some(_)) => {
            return Err(invalid("kappa", "pass at most one of --kappa and --sigma"))
        }
        (Some(k), None) => k,
        (None, Some(sig)) => kappa_from_sigma(sig, hurst)?,
        (None, None) => match (c.f64("kappa")?, c.f64("sigma")?) {
            (Some(_), Some(_)) => return Err(invalid("kappa", "config sets both kappa and sigma")),
            (Some(k), None) => k,
            (None, Some(sig)) => kappa_from_sigma(sig, hurst)?,
            (None, None) => return Err(invalid("kappa", "required: pass --kappa or --sigma")),
        },
    };
    let p = StochasticParams::new(
        hurst,
        kappa,
        required(a.spread.or(c.f64("spread")?), "spread")?,
        a.horizon.or(c.f64("horizon")?).unwrap_or(1.0),
        resolve_laziness(&a.laziness, c, LazinessSpec::none())?,
    )?;
    let free = p.without_latency();
    let result = FbmOptimum {
        cost_free: delta_star_closed_form(&free)?,
        latency: solve_foc_latency(&p)?,
        statics: statics_closed_form(&free)?,
    };
    s.emit("optimize-fbm", &p, &result, |w| {
        let mut out = csv::Writer::from_writer(w);
        let fmt_err = |e: csv::Error| Error::Format(e.to_string());
        out.write_record([
            "solution",
            "delta_star",
            "n_star",
            "m_star_rounded",
            "foc_residual",
            "second_order_value",
            "second_order_analytic",
            "method",
            "iterations",
        ])
        .map_err(fmt_err)?;
        for (name, o) in [
            ("cost-free", &result.cost_free),
            ("latency", &result.latency),
        ] {
            let method =
                serde_json::to_value(o.method).map_err(|e| Error::Format(e.to_string()))?;
            out.write_record([
                name.to_string(),
                output::format_float(o.delta_star),
                output::format_float(o.n_star),
                o.m_star_rounded.to_string(),
                output::format_float(o.foc_residual),
                output::format_float(o.second_order_value),
                output::format_float(o.second_order_analytic),
                method.as_str().unwrap_or_default().to_string(),
                o.iterations.to_string(),
            ])
            .map_err(fmt_err)?;
        }
        out.flush().map_err(|e| Error::Format(e.to_string()))
    })
}

pub fn estimate_hurst(a: EstimateHurstArgs) -> Result<()> {
    let s = Session::open(&a.common, "estimate-hurst", Format::Json)?;
    let mut echo = resolve_schema(&a.schema, &s.config)?;
    let path = load_price_csv(&echo.input, &echo.schema)?;
    let levels = *echo.levels.get_or_insert_with(|| default_levels(&path));
    let fit = fit_scaling(&path, levels)?;
    s.emit("estimate-hurst", &echo, &fit, |w| {
        output::write_hurst_csv(w, &fit)
    })
}

pub fn mc_experiment(a: McArgs) -> Result<()> {
    let s = Session::open(&a.common, "mc-experiment", Format::Json)?;
    let c = &s.config;
    let d = McExperimentSpec::default();
    let hurst_values = match a.hurst_values {
        Some(v) => crate::config::parse_f64_list(&v).map_err(|r| invalid("hurst-values", r))?,
        None => c.f64_list("hurst-values")?.unwrap_or(d.hurst_values),
    };
    let spec = McExperimentSpec {
        hurst_values,
        m_lo: a
            .m_lo
            .or(c.u64("m-lo")?)
            .map_or(Ok(d.m_lo), |v| to_u32(v, "m-lo"))?,
        m_hi: a
            .m_hi
            .or(c.u64("m-hi")?)
            .map_or(Ok(d.m_hi), |v| to_u32(v, "m-hi"))?,
        kappa: a.kappa.or(c.f64("kappa")?).unwrap_or(d.kappa),
        spread: a.spread.or(c.f64("spread")?).unwrap_or(d.spread),
        horizon: a.horizon.or(c.f64("horizon")?).unwrap_or(d.horizon),
        laziness: resolve_laziness(&a.laziness, c, d.laziness)?,
        n_paths: a
            .n_paths
            .or(c.u64("n-paths")?)
            .map_or(Ok(d.n_paths), |v| to_usize(v, "n-paths"))?,
        seed: a.seed.or(c.u64("seed")?).unwrap_or(d.seed),
        method: match a.method.or(c.string("method")?) {
            Some(m) => m.parse()?,
            None => d.method,
        },
    };
    let result = run_mc_experiment(&spec)?;
    s.emit("mc-experiment", &spec, &result.records, |w| {
        output::write_mc_csv(w, &result)
    })
}

#[derive(Serialize)]
struct EmpiricalEcho {
    #[serde(flatten)]
    schema: SchemaEcho,
    costs: CostSpec,
}

pub fn empirical(a: EmpiricalArgs) -> Result<()> {
    let s = Session::open(&a.common, "empirical", Format::Json)?;
    let c = &s.config;
    let d = CostSpec::default();
    let costs = CostSpec {
        spread: a.spread.or(c.f64("spread")?).unwrap_or(d.spread),
        scale: a
            .laziness_scale
            .or(c.f64("laziness-scale")?)
            .unwrap_or(d.scale),
        exponent: a
            .laziness_exponent
            .or(c.f64("laziness-exponent")?)
            .unwrap_or(d.exponent),
    };
    costs.laziness().validate()?;
    let echo = EmpiricalEcho {
        schema: resolve_schema(&a.schema, c)?,
        costs,
    };
    let result = run_empirical(
        &echo.schema.input,
        &echo.schema.schema,
        &costs,
        echo.schema.levels,
    )?;
    s.emit("empirical", &echo, &result, |w| {
        output::write_empirical_csv(w, &result)
    })
}
