//! One runner per subcommand: load config, run the core operation, write the
//! report (and grids), translate outcomes into exit codes.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context as _};
use caloric::approx::{
    fit_fixed_poles, greedy_fit, riemann_approximate, sup_error, BoxPair, RationalHeatSolution,
};
use caloric::colehopf::{burgers_residual_fd, compose, heat_to_burgers, BurgersField};
use caloric::fields::{make_field, EvalError, HeatField};
use caloric::kernel::{phi, phi_derivative, DerivativeOrder, SpacetimePoint};
use caloric::runge::{
    diaz_check_with_resolution, jones_check_with_resolution, validate_pole_set, DiazVerdict,
    JonesVerdict,
};
use caloric::universal::{
    burgers_universal_series, burgers_universal_translates, ladder, universal_series,
    universal_translates, Dictionary, Rung, SeriesGeometry, UniversalError,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self};
use crate::report::{write_grid_csv, write_json, write_report, Figure};

#[derive(clap::Subcommand, Clone, Copy)]
pub enum Command {
    /// Evaluate the heat kernel (or a derivative) on a grid, to CSV.
    KernelEval,
    /// Cutoff/Riemann-sum rational approximation over a box pair.
    ApproxRiemann,
    /// Least-squares fit over a fixed candidate pole set.
    ApproxFit,
    /// Transform a caloric field to the Burgers side and sample it.
    BurgersTransform,
    /// Compose two Burgers solutions and check the residual oracle.
    BurgersCompose,
    /// Finite-difference Burgers residual at given points.
    BurgersResidual,
    /// Inductive two-set ladder with per-rung certificates.
    UniversalLadder,
    /// Greedy universal series over a pole sequence.
    UniversalSeries,
    /// Entire field with prescribed translate behaviour.
    UniversalTranslates,
    /// Single-region slice condition.
    RungeJones,
    /// Nested-pair slice condition.
    RungeDiaz,
    /// Pole-set coverage of slice components.
    PolesValidate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::KernelEval => "kernel-eval",
            Command::ApproxRiemann => "approx-riemann",
            Command::ApproxFit => "approx-fit",
            Command::BurgersTransform => "burgers-transform",
            Command::BurgersCompose => "burgers-compose",
            Command::BurgersResidual => "burgers-residual",
            Command::UniversalLadder => "universal-ladder",
            Command::UniversalSeries => "universal-series",
            Command::UniversalTranslates => "universal-translates",
            Command::RungeJones => "runge-jones",
            Command::RungeDiaz => "runge-diaz",
            Command::PolesValidate => "poles-validate",
        }
    }
}

pub struct Context {
    pub out_dir: PathBuf,
    pub threads: usize,
    pub verbose: bool,
    pub command: &'static str,
}

impl Context {
    fn pool(&self) -> anyhow::Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .context("building thread pool")
    }

    fn note(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("[{}] {}", self.command, msg.as_ref());
        }
    }
}

pub enum Outcome {
    Success,
    CertifiedFailure,
}

#[derive(Serialize)]
struct FailureReport<C: Serialize> {
    command: String,
    status: &'static str,
    detail: String,
    config: C,
}

fn certified_failure<C: Serialize>(
    ctx: &Context,
    config: &C,
    status: &'static str,
    detail: String,
) -> anyhow::Result<Outcome> {
    let report = FailureReport {
        command: ctx.command.to_string(),
        status,
        detail,
        config,
    };
    write_report(&ctx.out_dir, ctx.command, &report)?;
    Ok(Outcome::CertifiedFailure)
}

pub fn run(command: Command, config_path: &Path, ctx: &Context) -> anyhow::Result<Outcome> {
    match command {
        Command::KernelEval => kernel_eval(config_path, ctx),
        Command::ApproxRiemann => approx_riemann(config_path, ctx),
        Command::ApproxFit => approx_fit(config_path, ctx),
        Command::BurgersTransform => burgers_transform(config_path, ctx),
        Command::BurgersCompose => burgers_compose(config_path, ctx),
        Command::BurgersResidual => burgers_residual(config_path, ctx),
        Command::UniversalLadder => universal_ladder(config_path, ctx),
        Command::UniversalSeries => universal_series_cmd(config_path, ctx),
        Command::UniversalTranslates => universal_translates_cmd(config_path, ctx),
        Command::RungeJones => runge_jones(config_path, ctx),
        Command::RungeDiaz => runge_diaz(config_path, ctx),
        Command::PolesValidate => poles_validate(config_path, ctx),
    }
}

/// Evaluates `f` over the grid inside the context's thread pool; results are
/// ordered by grid index, so threading never changes the output.
fn parallel_values<F>(
    ctx: &Context,
    points: &[SpacetimePoint<f64>],
    f: F,
) -> anyhow::Result<Vec<Result<f64, EvalError<f64>>>>
where
    F: Fn(&SpacetimePoint<f64>) -> Result<f64, EvalError<f64>> + Sync,
{
    let pool = ctx.pool()?;
    Ok(pool.install(|| points.par_iter().map(&f).collect()))
}

fn collect_values(results: Vec<Result<f64, EvalError<f64>>>) -> Result<Vec<f64>, EvalError<f64>> {
    results.into_iter().collect()
}

// ---------------------------------------------------------------------------

fn kernel_eval(config_path: &Path, ctx: &Context) -> anyhow::Result<Outcome> {
    let cfg: config::KernelEvalConfig = config::load(config_path)?;
    if cfg.grid.space_dim() != cfg.n {
        return Err(anyhow!(
            "grid has {} space axes but n = {}",
            cfg.grid.space_dim(),
            cfg.n
        ));
    }
    let points = cfg.grid.points()?;
    ctx.note(format!("evaluating {} grid points", points.len()));
    let order = cfg
        .derivative
        .as_ref()
        .map(|d| DerivativeOrder::new(d.j, d.alpha.clone()));
    // Ceilings and dimensions are validated once up front; afterwards the
    // evaluation is total over the homogeneous grid.
    if let Some(d) = &order {
        phi_derivative(&points[0], d).map_err(|e| anyhow!("{e}"))?;
    }
    let values = collect_values(parallel_values(ctx, &points, |p| match &order {
        None => Ok(phi(p)),
        Some(d) => Ok(phi_derivative(p, d).expect("order validated up front")),
    })?)
    .map_err(|e| anyhow!("{e}"))?;

    #[derive(Serialize)]
    struct Report {
        command: String,
        points: usize,
        sup_value: Figure,
        csv: String,
        config: config::KernelEvalConfig,
    }
    let sup = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let csv = write_grid_csv(&ctx.out_dir, ctx.command, "grid", &points, &values)?;
    write_report(
        &ctx.out_dir,
        ctx.command,
        &Report {
            command: ctx.command.into(),
            points: points.len(),
            sup_value: Figure::new(sup),
            csv: csv.file_name().unwrap().to_string_lossy().into_owned(),
            config: cfg,
        },
    )?;
    Ok(Outcome::Success)
}

// ---------------------------------------------------------------------------

fn approx_riemann(config_path: &Path, ctx: &Context) -> anyhow::Result<Outcome> {
    let cfg: config::ApproxRiemannConfig = config::load(config_path)?;
    if cfg.meshes.is_empty() {
        return Err(anyhow!("mesh schedule must be nonempty"));
    }
    let target = make_field(&cfg.target).map_err(|e| anyhow!("{e}"))?;
    let boxes = BoxPair::new(cfg.k.clone(), cfg.u.clone()).map_err(|e| anyhow!("{e}"))?;
    let grid = boxes.inner().uniform_grid(cfg.eval_grid_per_axis);

    #[derive(Serialize)]
    struct MeshRun {
        mesh: f64,
        cell_count: usize,
        sup_error: Figure,
    }
    #[derive(Serialize)]
    struct Report {
        command: String,
        runs: Vec<MeshRun>,
        poles_outside_k: bool,
        monotone_decreasing: bool,
        config: config::ApproxRiemannConfig,
    }

    let mut runs = Vec::new();
    let mut poles_outside_k = true;
    let mut last: Option<(RationalHeatSolution<f64>, f64)> = None;
    for &mesh in &cfg.meshes {
        let (solution, info) =
            riemann_approximate(&target, &boxes, mesh).map_err(|e| anyhow!("{e}"))?;
        for term in &solution.terms {
            if boxes.inner().contains(&term.pole) {
                poles_outside_k = false;
            }
        }
        let err = sup_error(&solution, &target, &grid).map_err(|e| anyhow!("{e}"))?;
        ctx.note(format!(
            "mesh {mesh}: {} cells, sup error {err:.3e}",
            info.cell_count
        ));
        runs.push(MeshRun {
            mesh,
            cell_count: info.cell_count,
            sup_error: Figure::new(err),
        });
        last = Some((solution, err));
    }
    let monotone = runs
        .windows(2)
        .all(|w| w[1].sup_error.raw <= w[0].sup_error.raw * 1.05);
    let (solution, final_err) = last.unwrap();
    write_json(&ctx.out_dir, ctx.command, "solution", &solution)?;
    let tolerance = cfg.tolerance;
    write_report(
        &ctx.out_dir,
        ctx.command,
        &Report {
            command: ctx.command.into(),
            runs,
            poles_outside_k,
            monotone_decreasing: monotone,
            config: cfg,
        },
    )?;
    if let Some(tol) = tolerance {
        if final_err > tol {
            return Ok(Outcome::CertifiedFailure);
        }
    }
    Ok(Outcome::Success)
}

// ---------------------------------------------------------------------------

fn approx_fit(config_path: &Path, ctx: &Context) -> anyhow::Result<Outcome> {
    let cfg: config::ApproxFitConfig = config::load(config_path)?;
    let samples: Vec<(SpacetimePoint<f64>, f64)> = match &cfg.samples {
        config::SamplesSpec::Inline(rows) => rows
            .iter()
            .map(|row| (row.point.clone(), row.value))
            .collect(),
        config::SamplesSpec::FromField { target, grid } => {
            let field = make_field(target).map_err(|e| anyhow!("{e}"))?;
            let points = grid.points()?;
            let values = collect_values(parallel_values(ctx, &points, |p| field.value(p))?)
                .map_err(|e| anyhow!("{e}"))?;
            points.into_iter().zip(values).collect()
        }
        config::SamplesSpec::Csv { csv } => {
            let base = config_path.parent().unwrap_or(Path::new("."));
            crate::report::read_samples_csv(&base.join(csv))?
        }
    };
    ctx.note(format!("{} samples", samples.len()));

    #[derive(Serialize)]
    struct Report {
        command: String,
        mode: &'static str,
        rms_residual: Figure,
        sup_residual: Figure,
        kept_columns: Vec<usize>,
        dropped_columns: Vec<usize>,
        selected: Option<Vec<usize>>,
        terms: usize,
        config: config::ApproxFitConfig,
    }

    let (solution, report) = match &cfg.greedy {
        None => {
            let (solution, fit) =
                fit_fixed_poles(&samples, &cfg.poles, cfg.reg).map_err(|e| anyhow!("{e}"))?;
            let terms = solution.terms.len();
            (
                solution,
                Report {
                    command: ctx.command.into(),
                    mode: "least-squares",
                    rms_residual: Figure::new(fit.rms_residual),
                    sup_residual: Figure::new(fit.sup_residual),
                    kept_columns: fit.kept_columns,
                    dropped_columns: fit.dropped_columns,
                    selected: None,
                    terms,
                    config: cfg.clone(),
                },
            )
        }
        Some(greedy) => {
            let grid: Vec<SpacetimePoint<f64>> = samples.iter().map(|(p, _)| p.clone()).collect();
            let target = SampledTarget { samples: &samples };
            let (solution, g) = greedy_fit(
                &target,
                &grid,
                &cfg.poles,
                greedy.max_terms,
                greedy.tol,
                cfg.reg,
            )
            .map_err(|e| anyhow!("{e}"))?;
            let terms = solution.terms.len();
            let rms = {
                let mut acc = 0.0;
                for (p, v) in &samples {
                    let d = solution.value(p).map_err(|e| anyhow!("{e}"))? - v;
                    acc += d * d;
                }
                (acc / samples.len() as f64).sqrt()
            };
            (
                solution,
                Report {
                    command: ctx.command.into(),
                    mode: "greedy",
                    rms_residual: Figure::new(rms),
                    sup_residual: Figure::new(g.achieved_sup_residual),
                    kept_columns: Vec::new(),
                    dropped_columns: Vec::new(),
                    selected: Some(g.selected),
                    terms,
                    config: cfg.clone(),
                },
            )
        }
    };
    write_json(&ctx.out_dir, ctx.command, "solution", &solution)?;
    let sup = report.sup_residual.raw;
    write_report(&ctx.out_dir, ctx.command, &report)?;
    if let Some(greedy) = &cfg.greedy {
        if sup > greedy.tol {
            return Ok(Outcome::CertifiedFailure);
        }
    }
    Ok(Outcome::Success)
}

/// Adapter exposing point samples as an evaluable target for the greedy fit.
/// Gradients are never requested on the sample path.
struct SampledTarget<'a> {
    samples: &'a [(SpacetimePoint<f64>, f64)],
}

impl HeatField<f64> for SampledTarget<'_> {
    fn dim(&self) -> usize {
        self.samples[0].0.dim()
    }

    fn value(&self, p: &SpacetimePoint<f64>) -> Result<f64, EvalError<f64>> {
        self.samples
            .iter()
            .find(|(q, _)| q == p)
            .map(|(_, v)| *v)
            .ok_or_else(|| EvalError::OutsideValidity { point: p.clone() })
    }

    fn spatial_gradient(&self, p: &SpacetimePoint<f64>) -> Result<Vec<f64>, EvalError<f64>> {
        Err(EvalError::OutsideValidity { point: p.clone() })
    }

    fn time_derivative(&self, p: &SpacetimePoint<f64>) -> Result<f64, EvalError<f64>> {
        Err(EvalError::OutsideValidity { point: p.clone() })
    }

    fn validity(&self) -> caloric::runge::Region<f64> {
        caloric::runge::Region::full(self.dim() + 1)
    }
}

// ---------------------------------------------------------------------------

fn burgers_transform(config_path: &Path, ctx: &Context) -> anyhow::Result<Outcome> {
    let cfg: config::BurgersTransformConfig = config::load(config_path)?;
    let heat = make_field(&cfg.heat_field).map_err(|e| anyhow!("{e}"))?;
    let field = heat_to_burgers(cfg.map.clone(), heat);
    let points = cfg.grid.points()?;
    let results = parallel_values(ctx, &points, |p| field.value(p))?;
    match collect_values(results) {
        Err(EvalError::DomainViolation { value, point }) => certified_failure(
            ctx,
            &cfg,
            "domain_violation",
            format!(
                "value {value} leaves the inverse domain{}",
                point.map(|p| format!(" at {p}")).unwrap_or_default()
            ),
        ),
        Err(e) => Err(anyhow!("{e}")),
        Ok(values) => {
            #[derive(Serialize)]
            struct Report {
                command: String,
                points: usize,
                sup_value: Figure,
                max_residual: Option<Figure>,
                csv: String,
                config: config::BurgersTransformConfig,
            }
            let sup = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let mut max_residual = None;
            if let Some(h) = cfg.residual_h {
                let mut worst = 0.0f64;
                for p in &points {
                    match burgers_residual_fd(&field, p, h) {
                        Ok(r) => worst = worst.max(r.abs()),
                        Err(EvalError::DomainViolation { value, point }) => {
                            return certified_failure(
                                ctx,
                                &cfg,
                                "domain_violation",
                                format!(
                                    "residual stencil left the inverse domain (value {value}{})",
                                    point.map(|p| format!(" at {p}")).unwrap_or_default()
                                ),
                            )
                        }
                        Err(e) => return Err(anyhow!("{e}")),
                    }
                }
                max_residual = Some(Figure::new(worst));
            }
            let csv = write_grid_csv(&ctx.out_dir, ctx.command, "grid", &points, &values)?;
            write_report(
                &ctx.out_dir,
                ctx.command,
                &Report {
                    command: ctx.command.into(),
                    points: points.len(),
                    sup_value: Figure::new(sup),
                    max_residual,
                    csv: csv.file_name().unwrap().to_string_lossy().into_owned(),
                    config: cfg,
                },
            )?;
            Ok(Outcome::Success)
        }
    }
}

// ---------------------------------------------------------------------------

fn burgers_compose(config_path: &Path, ctx: &Context) -> anyhow::Result<Outcome> {
    let cfg: config::BurgersComposeConfig = config::load(config_path)?;
    let p1 = heat_to_burgers(
        cfg.map.clone(),
        make_field(&cfg.p1).map_err(|e| anyhow!("{e}"))?,
    );
    let p2 = heat_to_burgers(
        cfg.map.clone(),
        make_field(&cfg.p2).map_err(|e| anyhow!("{e}"))?,
    );
    let composed = compose(&p1, &p2).map_err(|e| anyhow!("{e}"))?;
    let points = cfg.grid.points()?;
    let values = match collect_values(parallel_values(ctx, &points, |p| composed.value(p))?) {
        Err(EvalError::DomainViolation { value, point }) => {
            return certified_failure(
                ctx,
                &cfg,
                "domain_violation",
                format!(
                    "value {value} leaves the inverse domain{}",
                    point.map(|p| format!(" at {p}")).unwrap_or_default()
                ),
            )
        }
        Err(e) => return Err(anyhow!("{e}")),
        Ok(v) => v,
    };

    #[derive(Serialize)]
    struct ResidualRow {
        point: SpacetimePoint<f64>,
        residual: Figure,
    }
    #[derive(Serialize)]
    struct Report {
        command: String,
        points: usize,
        sup_value: Figure,
        residuals: Vec<ResidualRow>,
        max_residual: Figure,
        csv: String,
        config: config::BurgersComposeConfig,
    }
    let mut residuals = Vec::new();
    let mut max_residual = 0.0f64;
    for p in &cfg.residual_points {
        match burgers_residual_fd(&composed, p, cfg.h) {
            Ok(r) => {
                max_residual = max_residual.max(r.abs());
                residuals.push(ResidualRow {
                    point: p.clone(),
                    residual: Figure::new(r),
                });
            }
            Err(EvalError::DomainViolation { value, point }) => {
                return certified_failure(
                    ctx,
                    &cfg,
                    "domain_violation",
                    format!(
                        "residual stencil left the inverse domain (value {value}{})",
                        point.map(|p| format!(" at {p}")).unwrap_or_default()
                    ),
                )
            }
            Err(e) => return Err(anyhow!("{e}")),
        }
    }
    let sup = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let csv = write_grid_csv(&ctx.out_dir, ctx.command, "grid", &points, &values)?;
    let tolerance = cfg.residual_tolerance;
    write_report(
        &ctx.out_dir,
        ctx.command,
        &Report {
            command: ctx.command.into(),
            points: points.len(),
            sup_value: Figure::new(sup),
            residuals,
            max_residual: Figure::new(max_residual),
            csv: csv.file_name().unwrap().to_string_lossy().into_owned(),
            config: cfg,
        },
    )?;
    if let Some(tol) = tolerance {
        if max_residual > tol {
            return Ok(Outcome::CertifiedFailure);
        }
    }
    Ok(Outcome::Success)
}

// ---------------------------------------------------------------------------

fn burgers_residual(config_path: &Path, ctx: &Context) -> anyhow::Result<Outcome> {
    let cfg: config::BurgersResidualConfig = config::load(config_path)?;
    let field = heat_to_burgers(
        cfg.map.clone(),
        make_field(&cfg.heat_field).map_err(|e| anyhow!("{e}"))?,
    );
    #[derive(Serialize)]
    struct ResidualRow {
        point: SpacetimePoint<f64>,
        residual: Figure,
    }
    #[derive(Serialize)]
    struct Report {
        command: String,
        residuals: Vec<ResidualRow>,
        max_residual: Figure,
        config: config::BurgersResidualConfig,
    }
    let mut rows = Vec::new();
    let mut max_residual = 0.0f64;
    for p in &cfg.points {
        match burgers_residual_fd(&field, p, cfg.h) {
            Ok(r) => {
                max_residual = max_residual.max(r.abs());
                rows.push(ResidualRow {
                    point: p.clone(),
                    residual: Figure::new(r),
                });
            }
            Err(EvalError::DomainViolation { value, point }) => {
                return certified_failure(
                    ctx,
                    &cfg,
                    "domain_violation",
                    format!(
                        "residual stencil left the inverse domain (value {value}{})",
                        point.map(|p| format!(" at {p}")).unwrap_or_default()
                    ),
                )
            }
            Err(e) => return Err(anyhow!("{e}")),
        }
    }
    let tolerance = cfg.tolerance;
    write_report(
        &ctx.out_dir,
        ctx.command,
        &Report {
            command: ctx.command.into(),
            residuals: rows,
            max_residual: Figure::new(max_residual),
            config: cfg,
        },
    )?;
    if let Some(tol) = tolerance {
        if max_residual > tol {
            return Ok(Outcome::CertifiedFailure);
        }
    }
    Ok(Outcome::Success)
}

// ---------------------------------------------------------------------------

fn universal_ladder(config_path: &Path, ctx: &Context) -> anyhow::Result<Outcome> {
    let cfg: config::UniversalLadderConfig = config::load(config_path)?;
    let mut rungs = Vec::new();
    for spec in &cfg.rungs {
        rungs.push(Rung {
            set: spec.set.clone(),
            target: make_field(&spec.target).map_err(|e| anyhow!("{e}"))?,
            tolerance: spec.tolerance,
        });
    }
    let n = rungs
        .first()
        .map(|r| r.set.dim())
        .ok_or_else(|| anyhow!("need at least one rung"))?;
    let dict = Dictionary::build(n, &cfg.dictionary);
    ctx.note(format!("{} dictionary members", dict.len()));
    match ladder(&rungs, &dict, &cfg.config) {
        Ok(outcome) => {
            #[derive(Serialize)]
            struct Report {
                command: String,
                steps: Vec<caloric::universal::LadderStep<f64>>,
                certificates: Vec<caloric::universal::RungCertificate<f64>>,
                all_certified: bool,
                config: config::UniversalLadderConfig,
            }
            let all = outcome.certificates.iter().all(|c| c.certified);
            write_report(
                &ctx.out_dir,
                ctx.command,
                &Report {
                    command: ctx.command.into(),
                    steps: outcome.steps,
                    certificates: outcome.certificates,
                    all_certified: all,
                    config: cfg,
                },
            )?;
            Ok(if all {
                Outcome::Success
            } else {
                Outcome::CertifiedFailure
            })
        }
        Err(UniversalError::BudgetMissed {
            step,
            achieved,
            budget,
        }) => certified_failure(
            ctx,
            &cfg,
            "budget_missed",
            format!("step {step}: achieved {achieved:.6e}, budget {budget:.6e}"),
        ),
        Err(e) => Err(anyhow!("{e}")),
    }
}

// ---------------------------------------------------------------------------

fn universal_series_cmd(config_path: &Path, ctx: &Context) -> anyhow::Result<Outcome> {
    let cfg: config::UniversalSeriesConfig = config::load(config_path)?;
    if cfg.targets.len() != cfg.tolerances.len() {
        return Err(anyhow!("need one tolerance per target"));
    }
    let poles = cfg.pole_sequence()?;
    let grid = cfg.grid.points()?;
    let geometry = match &cfg.geometry {
        Some(geo) => Some(SeriesGeometry {
            k_boxes: geo.k_boxes.clone(),
            u: geo.u.clone().validated().map_err(|e| anyhow!("{e}"))?,
            raster_resolution: geo.resolution,
        }),
        None => None,
    };
    let mut heat_targets = Vec::new();
    for spec in &cfg.targets {
        heat_targets.push(make_field(spec).map_err(|e| anyhow!("{e}"))?);
    }
    ctx.note(format!(
        "{} targets, {} poles, {} grid points",
        heat_targets.len(),
        poles.len(),
        grid.len()
    ));

    #[derive(Serialize)]
    struct Report {
        command: String,
        markers: Vec<usize>,
        coefficients: Vec<f64>,
        certificates: Vec<caloric::universal::TargetCertificate<f64>>,
        burgers_certificates: Option<Vec<caloric::universal::BurgersCertificate<f64>>>,
        config: config::UniversalSeriesConfig,
    }

    let result = match &cfg.map {
        None => universal_series(
            &heat_targets,
            &grid,
            &poles,
            &cfg.tolerances,
            geometry.as_ref(),
            &cfg.options,
        )
        .map(|heat| (heat, None)),
        Some(map) => {
            let targets: Vec<BurgersField<f64>> = heat_targets
                .iter()
                .map(|h| heat_to_burgers(map.clone(), h.clone()))
                .collect();
            burgers_universal_series(
                &targets,
                &grid,
                &poles,
                &cfg.tolerances,
                geometry.as_ref(),
                &cfg.options,
            )
            .map(|out| (out.heat, Some(out.certificates)))
        }
    };
    match result {
        Ok((heat, burgers_certs)) => {
            write_report(
                &ctx.out_dir,
                ctx.command,
                &Report {
                    command: ctx.command.into(),
                    markers: heat.markers.clone(),
                    coefficients: heat.coefficients.clone(),
                    certificates: heat.certificates.clone(),
                    burgers_certificates: burgers_certs,
                    config: cfg,
                },
            )?;
            Ok(Outcome::Success)
        }
        Err(UniversalError::BlockExhausted {
            target,
            achieved,
            tol,
        }) => certified_failure(
            ctx,
            &cfg,
            "block_exhausted",
            format!("target {target}: achieved {achieved:.6e}, tolerance {tol:.6e}"),
        ),
        Err(UniversalError::PoleSetRejected { uncovered }) => certified_failure(
            ctx,
            &cfg,
            "pole_set_rejected",
            format!("{uncovered} slice component(s) contain no pole"),
        ),
        Err(UniversalError::Eval(EvalError::DomainViolation { value, point })) => {
            certified_failure(
                ctx,
                &cfg,
                "domain_violation",
                format!(
                    "partial sum leaves the inverse domain (value {value}{})",
                    point.map(|p| format!(" at {p}")).unwrap_or_default()
                ),
            )
        }
        Err(e) => Err(anyhow!("{e}")),
    }
}

// ---------------------------------------------------------------------------

fn universal_translates_cmd(config_path: &Path, ctx: &Context) -> anyhow::Result<Outcome> {
    let cfg: config::UniversalTranslatesConfig = config::load(config_path)?;
    let mut heat_targets = Vec::new();
    for spec in &cfg.targets {
        heat_targets.push(make_field(spec).map_err(|e| anyhow!("{e}"))?);
    }
    let dict = Dictionary::build(cfg.n, &cfg.dictionary);

    #[derive(Serialize)]
    struct Report {
        command: String,
        centers: Vec<SpacetimePoint<f64>>,
        steps: Vec<caloric::universal::LadderStep<f64>>,
        certificates: Vec<caloric::universal::RungCertificate<f64>>,
        burgers_certificates: Option<Vec<caloric::universal::BurgersCertificate<f64>>>,
        all_certified: bool,
        config: config::UniversalTranslatesConfig,
    }

    let result = match &cfg.map {
        None => universal_translates(&heat_targets, &cfg.radii, &dict, &cfg.config, cfg.n)
            .map(|out| (out, None)),
        Some(map) => {
            let targets: Vec<BurgersField<f64>> = heat_targets
                .iter()
                .map(|h| heat_to_burgers(map.clone(), h.clone()))
                .collect();
            burgers_universal_translates(&targets, &cfg.radii, &dict, &cfg.config, cfg.n)
                .map(|out| (out.heat, Some(out.certificates)))
        }
    };
    match result {
        Ok((heat, burgers_certs)) => {
            let all = heat.certificates.iter().all(|c| c.certified);
            write_report(
                &ctx.out_dir,
                ctx.command,
                &Report {
                    command: ctx.command.into(),
                    centers: heat.centers,
                    steps: heat.steps,
                    certificates: heat.certificates,
                    burgers_certificates: burgers_certs,
                    all_certified: all,
                    config: cfg,
                },
            )?;
            Ok(if all {
                Outcome::Success
            } else {
                Outcome::CertifiedFailure
            })
        }
        Err(UniversalError::BudgetMissed {
            step,
            achieved,
            budget,
        }) => certified_failure(
            ctx,
            &cfg,
            "budget_missed",
            format!("step {step}: achieved {achieved:.6e}, budget {budget:.6e}"),
        ),
        Err(UniversalError::Eval(EvalError::DomainViolation { value, point })) => {
            certified_failure(
                ctx,
                &cfg,
                "domain_violation",
                format!(
                    "field leaves the inverse domain (value {value}{})",
                    point.map(|p| format!(" at {p}")).unwrap_or_default()
                ),
            )
        }
        Err(e) => Err(anyhow!("{e}")),
    }
}

// ---------------------------------------------------------------------------

fn runge_jones(config_path: &Path, ctx: &Context) -> anyhow::Result<Outcome> {
    let cfg: config::RungeJonesConfig = config::load(config_path)?;
    let region = cfg.region.clone().validated().map_err(|e| anyhow!("{e}"))?;
    let verdict =
        jones_check_with_resolution(&region, cfg.resolution).map_err(|e| anyhow!("{e}"))?;

    #[derive(Serialize)]
    struct Report {
        command: String,
        verdict: JonesVerdict<f64>,
        slice_method: &'static str,
        config: config::RungeJonesConfig,
    }
    let method = if region.space_dim() == 1 {
        "exact-intervals"
    } else {
        "raster (approximate)"
    };
    let runge = verdict.is_runge();
    write_report(
        &ctx.out_dir,
        ctx.command,
        &Report {
            command: ctx.command.into(),
            verdict,
            slice_method: method,
            config: cfg,
        },
    )?;
    Ok(if runge {
        Outcome::Success
    } else {
        Outcome::CertifiedFailure
    })
}

fn runge_diaz(config_path: &Path, ctx: &Context) -> anyhow::Result<Outcome> {
    let cfg: config::RungeDiazConfig = config::load(config_path)?;
    let omega1 = cfg.omega1.clone().validated().map_err(|e| anyhow!("{e}"))?;
    let omega2 = cfg.omega2.clone().validated().map_err(|e| anyhow!("{e}"))?;
    let verdict =
        diaz_check_with_resolution(&omega1, &omega2, cfg.resolution).map_err(|e| anyhow!("{e}"))?;

    #[derive(Serialize)]
    struct Report {
        command: String,
        verdict: DiazVerdict<f64>,
        slice_method: &'static str,
        config: config::RungeDiazConfig,
    }
    let method = if omega1.space_dim() == 1 {
        "exact-intervals"
    } else {
        "raster (approximate)"
    };
    let ok = verdict.is_satisfied();
    write_report(
        &ctx.out_dir,
        ctx.command,
        &Report {
            command: ctx.command.into(),
            verdict,
            slice_method: method,
            config: cfg,
        },
    )?;
    Ok(if ok {
        Outcome::Success
    } else {
        Outcome::CertifiedFailure
    })
}

fn poles_validate(config_path: &Path, ctx: &Context) -> anyhow::Result<Outcome> {
    let cfg: config::PolesValidateConfig = config::load(config_path)?;
    let u = cfg.u.clone().validated().map_err(|e| anyhow!("{e}"))?;
    let poles = cfg.pole_sequence()?;
    let verdict =
        validate_pole_set(&cfg.k_boxes, &u, &poles, cfg.resolution).map_err(|e| anyhow!("{e}"))?;

    #[derive(Serialize)]
    struct Report {
        command: String,
        valid: bool,
        uncovered: Vec<caloric::runge::UncoveredComponent<f64>>,
        config: config::PolesValidateConfig,
    }
    let valid = verdict.valid;
    write_report(
        &ctx.out_dir,
        ctx.command,
        &Report {
            command: ctx.command.into(),
            valid,
            uncovered: verdict.uncovered,
            config: cfg,
        },
    )?;
    Ok(if valid {
        Outcome::Success
    } else {
        Outcome::CertifiedFailure
    })
}
