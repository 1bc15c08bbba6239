use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use hyperpark::experiments::{default_laws, run_suite};
use hyperpark::harmonic::{
    g_product, mean_turn_deficit, mean_turn_deficit_finite, modulated_G, modulated_mean_distance, G_RELATIVE_ERROR,
};
use hyperpark::mellin::log_periodic_profile;
use hyperpark::model::DEFAULT_EPS;
use hyperpark::sim::{
    generate_deterministic_network, generate_poisson_network, monte_carlo_outcomes, write_outcomes_csv, NetworkKind,
};
use hyperpark::{
    mean_distance_analytic, variance_analytic, CityConfig, Depth, McSummary, ModulationLaw, RngStream, Scenario,
    Strategy,
};
use serde_json::json;

use crate::args::{AnalyticArgs, Format, ModelArgs, NetworkArgs, ProfileArgs, Quantity, SimulateArgs, VerifyArgs};
use crate::config::FileConfig;
use crate::error::CliError;
use crate::manifest::Manifest;

/// Model parameters after merging flags, config file and defaults.
struct Model {
    p: f64,
    length: f64,
    lambdas: Vec<f64>,
    grid_echo: Option<String>,
    depth: Depth,
    law: Option<ModulationLaw>,
    eps: f64,
}

impl Model {
    fn resolve(args: &ModelArgs, file: &FileConfig, default_depth: Depth) -> Result<Self, CliError> {
        let (lambdas, grid_echo) = match (args.lambda, &args.lambda_grid) {
            (_, Some(g)) => (g.0.values(), Some(format!("{}:{}:{}", num(g.0.anchor), num(g.0.ratio), g.0.count))),
            (Some(l), None) => (vec![l], None),
            (None, None) => (file.lambda.into_iter().collect(), None),
        };
        let law = match args.modulation {
            Some(spec) => spec.0,
            None => file.modulation()?.flatten(),
        };
        Ok(Self {
            p: args.p.or(file.p).unwrap_or(0.5),
            length: args.length.or(file.length).unwrap_or(1.0),
            lambdas,
            grid_echo,
            depth: match args.kmax {
                Some(d) => d,
                None => file.k_max()?.unwrap_or(default_depth),
            },
            law,
            eps: args.eps.unwrap_or(DEFAULT_EPS),
        })
    }

    fn city(&self, lambda: f64) -> Result<CityConfig<f64>, CliError> {
        Ok(CityConfig::new(self.p, self.length, lambda, self.depth)?.with_eps(self.eps)?)
    }

    fn single_lambda(&self) -> Result<f64, CliError> {
        match self.lambdas.as_slice() {
            [l] => Ok(*l),
            [] => Err(CliError::Usage("--lambda is required".into())),
            _ => Err(CliError::Usage("this command takes a single --lambda".into())),
        }
    }

    fn params(&self) -> Vec<(&'static str, String)> {
        let lambda = match &self.grid_echo {
            Some(g) => ("lambda_grid", g.clone()),
            None => ("lambda", self.lambdas.iter().map(|&l| num(l)).collect::<Vec<_>>().join(",")),
        };
        vec![
            ("p", num(self.p)),
            ("L", num(self.length)),
            lambda,
            ("k_max", self.depth.to_string()),
            ("modulation", self.law.map_or("none".into(), |l| l.to_string())),
            ("eps", num(self.eps)),
        ]
    }
}

/// Shortest round-trip form, switching to exponent notation for very large or small values.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

pub fn analytic(args: &AnalyticArgs, file: &FileConfig, seed: u64) -> Result<(), CliError> {
    let model = Model::resolve(&args.model, file, Depth::Infinite)?;
    let mut params = model.params();
    let name = match args.quantity {
        Quantity::Mean => "mean",
        Quantity::Variance => "variance",
        Quantity::TurnsMean => "turns-mean",
        Quantity::SmallG => "g",
        Quantity::BigG => "G",
    };
    params.insert(0, ("quantity", name.into()));
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    let column = match args.quantity {
        Quantity::SmallG | Quantity::BigG => {
            let x = args.x.ok_or_else(|| CliError::Usage(format!("--quantity {name} needs --x")))?;
            params.push(("x", num(x)));
            let alpha = (1.0 - model.p) / 4.0;
            if args.quantity == Quantity::SmallG {
                let e = g_product(x, alpha, model.eps)?;
                rows.push((x, e.value, e.truncation_bound));
            } else {
                let law = model.law.ok_or_else(|| CliError::Usage("--quantity G needs --modulation".into()))?;
                let v = modulated_G(x, &law)?;
                rows.push((x, v, G_RELATIVE_ERROR * v));
            }
            "x"
        }
        _ => {
            if model.lambdas.is_empty() {
                return Err(CliError::Usage("--lambda or --lambda-grid is required".into()));
            }
            for &lambda in &model.lambdas {
                let cfg = model.city(lambda)?;
                let e = match (args.quantity, model.law) {
                    (Quantity::Mean, None) => mean_distance_analytic(&cfg)?,
                    (Quantity::Mean, Some(law)) => modulated_mean_distance(&cfg, &law, model.eps)?,
                    (Quantity::Variance, None) => variance_analytic(&cfg)?,
                    (Quantity::TurnsMean, None) => match cfg.depth() {
                        Depth::Infinite => mean_turn_deficit(cfg.rho(), cfg.alpha(), model.eps)?,
                        Depth::Finite(k) => {
                            let v = mean_turn_deficit_finite(cfg.rho(), cfg.alpha(), k)?;
                            hyperpark::HarmonicEval { value: v, truncation_bound: 0.0, terms_used: k as usize }
                        }
                    },
                    (q, Some(_)) => {
                        return Err(CliError::Usage(format!("--quantity {q:?} does not support --modulation")))
                    }
                    _ => unreachable!("g and G handled above"),
                };
                rows.push((lambda, e.value, e.truncation_bound));
            }
            "lambda"
        }
    };
    let manifest = Manifest { schema: "hyperpark/analytic v1", command: "analytic", params, seed };
    let mut out = manifest.header();
    let _ = writeln!(out, "{column},value,trunc_bound");
    for (a, v, b) in rows {
        let _ = writeln!(out, "{a:?},{v:?},{b:?}");
    }
    emit(&out, None)
}

fn summary_line(s: &McSummary) -> String {
    format!(
        "# summary: reps={} mean={:?} se={:?} variance={:?} se_variance={:?} parked_fraction={:?} exited_fraction={:?} deficit_mean={:?} deficit_se={:?}",
        s.reps,
        s.mean,
        s.se_mean,
        s.variance,
        s.se_variance,
        s.parked_fraction,
        s.exited_fraction,
        s.deficit_mean,
        s.deficit_se
    )
}

pub fn simulate(args: &SimulateArgs, file: &FileConfig, seed: u64) -> Result<(), CliError> {
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let model = Model::resolve(&args.model, file, Depth::Finite(25))?;
    let strategy = match args.strategy {
        Some(s) => s,
        None => file.strategy()?.unwrap_or(Strategy::Jumpless),
    };
    let cfg = model.city(model.single_lambda()?)?;
    let scenario = Scenario::new(cfg, strategy, model.law, args.terminal)?;
    let outcomes = monte_carlo_outcomes(&scenario, args.reps, seed)?;
    let summary = McSummary::from_outcomes(&outcomes, scenario.k_max());

    let mut params = model.params();
    params.extend([
        ("strategy", strategy.to_string()),
        ("terminal", args.terminal.to_string()),
        ("reps", args.reps.to_string()),
    ]);
    let manifest = Manifest { schema: "hyperpark/outcomes v1", command: "simulate", params, seed };
    let mut buf = manifest.header().into_bytes();
    if !args.summary_only {
        write_outcomes_csv(&mut buf, &outcomes)?;
    }
    writeln!(buf, "{}", summary_line(&summary))?;
    let text = String::from_utf8(buf).expect("utf-8 output");
    emit(&text, args.out.as_deref())
}

/// Returns whether every check passed.
pub fn verify(args: &VerifyArgs, file: &FileConfig, seed: u64) -> Result<bool, CliError> {
    let p = args.p.or(file.p).unwrap_or(0.5);
    let length = args.length.or(file.length).unwrap_or(1.0);
    let depth = match args.kmax {
        Some(d) => d,
        None => file.k_max()?.unwrap_or(Depth::Finite(hyperpark::experiments::VERIFY_DEPTH)),
    };
    let cfg = CityConfig::new(p, length, 1.0, depth)?;
    let plan = args.preset.plan(&cfg, seed)?;
    let laws = default_laws();
    let reports = run_suite(args.suite, &cfg, &laws, &plan)?;
    let passed = reports.iter().all(|r| r.passed());
    let manifest = Manifest {
        schema: "hyperpark/verify v1",
        command: "verify",
        params: vec![
            ("suite", format!("{:?}", args.suite).to_lowercase()),
            ("preset", args.preset.to_string()),
            ("p", num(p)),
            ("L", num(length)),
            ("k_max", depth.to_string()),
            ("reps", plan.reps.to_string()),
        ],
        seed,
    };
    let text = match args.format {
        Format::Json => {
            let value = json!({ "manifest": manifest.to_json(), "passed": passed, "reports": reports });
            serde_json::to_string_pretty(&value).expect("report serializes") + "\n"
        }
        Format::Text => {
            let mut out = manifest.header();
            for r in &reports {
                out.push_str(&r.to_text());
            }
            let _ = writeln!(out, "# result: {}", if passed { "PASS" } else { "FAIL" });
            out
        }
    };
    emit(&text, None)?;
    Ok(passed)
}

pub fn profile(args: &ProfileArgs, file: &FileConfig, seed: u64) -> Result<(), CliError> {
    let p = args.p.or(file.p).unwrap_or(0.5);
    let length = args.length.or(file.length).unwrap_or(1.0);
    let cfg = CityConfig::new(p, length, 1.0, Depth::Infinite)?;
    let prof = log_periodic_profile(&cfg, args.x0, args.samples)?;
    let mut rows: Vec<(f64, f64)> = prof.phase().into_iter().zip(prof.relative.iter().copied()).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let manifest = Manifest {
        schema: "hyperpark/profile v1",
        command: "profile",
        params: vec![
            ("p", num(p)),
            ("L", num(length)),
            ("x0", num(args.x0)),
            ("samples", args.samples.to_string()),
            ("period", num(prof.period)),
            ("prefactor", num(prof.prefactor)),
        ],
        seed,
    };
    let mut out = manifest.header();
    let _ = writeln!(out, "log_x_mod_period,relative_oscillation");
    for (phase, rel) in rows {
        let _ = writeln!(out, "{phase:?},{rel:?}");
    }
    emit(&out, None)
}

pub fn network(args: &NetworkArgs, file: &FileConfig, seed: u64) -> Result<(), CliError> {
    let model = Model::resolve(&args.model, file, Depth::Finite(6))?;
    let lambda = model.lambdas.first().copied().unwrap_or(1.0);
    let cfg = model.city(lambda)?;
    let echo = model.params().iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ");
    let text = match NetworkKind::from(args.kind) {
        NetworkKind::Deterministic => generate_deterministic_network(&cfg)?.to_text(&echo, None),
        NetworkKind::Poisson => {
            generate_poisson_network(&cfg, &mut RngStream::new(seed, 0).rng())?.to_text(&echo, Some(seed))
        }
    };
    emit(&text, None)
}
