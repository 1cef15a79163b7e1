//! Per-subcommand JSON config schemas. Violations are reported with a JSON
//! pointer into the offending document.

use std::path::Path;

use anyhow::{anyhow, Context as _};
use caloric::approx::PoleSet;
use caloric::colehopf::ColeHopfMap;
use caloric::fields::FieldSpec;
use caloric::geom::AaBox;
use caloric::kernel::SpacetimePoint;
use caloric::runge::Region;
use caloric::universal::{Compactum, DictionaryConfig, LadderConfig, SeriesOptions};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Parses a config file, turning serde errors into JSON-pointer messages.
pub fn load<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let pointer = path_to_pointer(&err.path().to_string());
        anyhow!("config error at {pointer}: {}", err.inner())
    })
}

fn path_to_pointer(path: &str) -> String {
    if path == "." {
        return "/".to_string();
    }
    let mut out = String::new();
    for segment in path.split('.') {
        // serde_path_to_error renders list indices as `name[3]`.
        let mut rest = segment;
        while let Some(open) = rest.find('[') {
            let (head, tail) = rest.split_at(open);
            if !head.is_empty() {
                out.push('/');
                out.push_str(head);
            }
            let close = tail.find(']').unwrap_or(tail.len());
            out.push('/');
            out.push_str(&tail[1..close]);
            rest = &tail[(close + 1).min(tail.len())..];
        }
        if !rest.is_empty() {
            out.push('/');
            out.push_str(rest);
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Rectangular evaluation grid, time axis first.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t: AxisSpec,
    pub x: Vec<AxisSpec>,
}

impl GridSpec {
    pub fn space_dim(&self) -> usize {
        self.x.len()
    }

    pub fn points(&self) -> anyhow::Result<Vec<SpacetimePoint<f64>>> {
        if self.x.is_empty() {
            return Err(anyhow!("grid needs at least one space axis"));
        }
        let mut lo = vec![self.t.min];
        let mut hi = vec![self.t.max];
        let mut counts = vec![self.t.count.max(1)];
        for axis in &self.x {
            lo.push(axis.min);
            hi.push(axis.max);
            counts.push(axis.count.max(1));
        }
        let b = AaBox { lo, hi };
        b.check().map_err(|reason| anyhow!("bad grid: {reason}"))?;
        Ok(b.grid(&counts))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEvalConfig {
    pub n: usize,
    pub grid: GridSpec,
    #[serde(default)]
    pub derivative: Option<DerivativeSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivativeSpec {
    pub j: u32,
    pub alpha: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxRiemannConfig {
    pub target: FieldSpec<f64>,
    pub k: AaBox<f64>,
    pub u: AaBox<f64>,
    /// Mesh schedule; the report carries one entry per mesh, the emitted
    /// solution belongs to the last (finest) one.
    pub meshes: Vec<f64>,
    #[serde(default = "default_eval_grid")]
    pub eval_grid_per_axis: usize,
    /// Optional sup-error gate on the finest mesh; missing it exits 2.
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_eval_grid() -> usize {
    21
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SamplesSpec {
    Inline(Vec<SampleRow>),
    FromField {
        target: FieldSpec<f64>,
        grid: GridSpec,
    },
    Csv {
        csv: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRow {
    pub point: SpacetimePoint<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreedySpec {
    pub max_terms: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxFitConfig {
    pub samples: SamplesSpec,
    pub poles: PoleSet<f64>,
    #[serde(default = "default_reg")]
    pub reg: f64,
    #[serde(default)]
    pub greedy: Option<GreedySpec>,
    #[serde(default)]
    pub seed: Option<u64>,
}

pub fn default_reg() -> f64 {
    caloric::approx::DEFAULT_SVD_THRESHOLD
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurgersTransformConfig {
    pub map: ColeHopfMap<f64>,
    /// Underlying caloric field of the solution (the transform's heat side).
    pub heat_field: FieldSpec<f64>,
    pub grid: GridSpec,
    #[serde(default)]
    pub residual_h: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurgersComposeConfig {
    pub map: ColeHopfMap<f64>,
    pub p1: FieldSpec<f64>,
    pub p2: FieldSpec<f64>,
    pub grid: GridSpec,
    #[serde(default)]
    pub residual_points: Vec<SpacetimePoint<f64>>,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub residual_tolerance: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_h() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurgersResidualConfig {
    pub map: ColeHopfMap<f64>,
    pub heat_field: FieldSpec<f64>,
    pub points: Vec<SpacetimePoint<f64>>,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RungSpec {
    pub set: Compactum<f64>,
    pub target: FieldSpec<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniversalLadderConfig {
    pub rungs: Vec<RungSpec>,
    #[serde(default)]
    pub dictionary: DictionaryConfig<f64>,
    #[serde(default)]
    pub config: LadderConfig<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesGeometrySpec {
    pub k_boxes: Vec<AaBox<f64>>,
    pub u: Region<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

pub fn default_resolution() -> usize {
    caloric::runge::DEFAULT_RASTER_RESOLUTION
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniversalSeriesConfig {
    pub targets: Vec<FieldSpec<f64>>,
    pub tolerances: Vec<f64>,
    pub grid: GridSpec,
    #[serde(default)]
    pub poles: Vec<SpacetimePoint<f64>>,
    /// Alternative to `poles`: a deterministic pole grid, time-major order.
    #[serde(default)]
    pub pole_grid: Option<GridSpec>,
    #[serde(default)]
    pub geometry: Option<SeriesGeometrySpec>,
    #[serde(default)]
    pub options: SeriesOptions<f64>,
    /// With a map present the run transports through the transform and adds
    /// Burgers-side certificates.
    #[serde(default)]
    pub map: Option<ColeHopfMap<f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl UniversalSeriesConfig {
    pub fn pole_sequence(&self) -> anyhow::Result<Vec<SpacetimePoint<f64>>> {
        match (&self.pole_grid, self.poles.is_empty()) {
            (Some(grid), true) => grid.points(),
            (None, false) => Ok(self.poles.clone()),
            (Some(_), false) => Err(anyhow!("give either poles or pole_grid, not both")),
            (None, true) => Err(anyhow!("need poles or pole_grid")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniversalTranslatesConfig {
    pub targets: Vec<FieldSpec<f64>>,
    pub radii: Vec<f64>,
    pub n: usize,
    #[serde(default)]
    pub dictionary: DictionaryConfig<f64>,
    #[serde(default)]
    pub config: LadderConfig<f64>,
    #[serde(default)]
    pub map: Option<ColeHopfMap<f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RungeJonesConfig {
    pub region: Region<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RungeDiazConfig {
    pub omega1: Region<f64>,
    pub omega2: Region<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolesValidateConfig {
    pub k_boxes: Vec<AaBox<f64>>,
    pub u: Region<f64>,
    #[serde(default)]
    pub poles: Vec<SpacetimePoint<f64>>,
    #[serde(default)]
    pub pole_grid: Option<GridSpec>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl PolesValidateConfig {
    pub fn pole_sequence(&self) -> anyhow::Result<Vec<SpacetimePoint<f64>>> {
        match (&self.pole_grid, self.poles.is_empty()) {
            (Some(grid), true) => grid.points(),
            (None, _) => Ok(self.poles.clone()),
            (Some(_), false) => Err(anyhow!("give either poles or pole_grid, not both")),
        }
    }
}
