//! Desk-scale universal constructions: simultaneous entire approximation on
//! escaping compacta (the inductive ladder), entire fields with prescribed
//! translate behaviour, greedy universal series of kernel poles, and their
//! transports to the Burgers side.
//!
//! Everything here is a finite prefix of a countable construction, so every
//! run returns explicit certificates: per-step achieved errors against the
//! budgeted tolerances, evaluated on stored grids.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::{greedy_fit, ApproxError, PoleSet, RationalHeatSolution};
use crate::colehopf::{BurgersField, ColeHopfError};
use crate::fields::{EntireDictionaryMember, EvalError, Field, HeatField};
use crate::geom::AaBox;
use crate::kernel::{KernelTerm, SpacetimePoint};
use crate::linalg::{truncated_lstsq, ColMatrix};
use crate::num::{cast, Real};
use crate::runge::{validate_pole_set, Region, RungeError};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum UniversalError<T: Real> {
    #[error("dictionary too small: achieved sup errors {sup_target} / {sup_zero} exceed tolerance {tol}")]
    DictionaryTooSmall { sup_target: T, sup_zero: T, tol: T },
    #[error("budget missed at ladder step {step}: achieved {achieved}, budget {budget}")]
    BudgetMissed { step: usize, achieved: T, budget: T },
    #[error("pole sequence exhausted on target {target}: achieved {achieved}, tolerance {tol}")]
    BlockExhausted { target: usize, achieved: T, tol: T },
    #[error("invalid rungs: {reason}")]
    InvalidRungs { reason: String },
    #[error("pole set rejected: {uncovered} slice component(s) contain no pole")]
    PoleSetRejected { uncovered: usize },
    #[error(transparent)]
    Eval(#[from] EvalError<T>),
    #[error(transparent)]
    Approx(#[from] ApproxError<T>),
    #[error(transparent)]
    Transform(#[from] ColeHopfError<T>),
    #[error(transparent)]
    Runge(#[from] RungeError<T>),
}

// ---------------------------------------------------------------------------
// Dictionary
// ---------------------------------------------------------------------------

/// Grid parameters for the entire-solution dictionary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DictionaryConfig<T> {
    pub k_max: T,
    pub k_step: T,
    pub max_polynomial_degree: u32,
    pub exponentials: bool,
    pub trig: bool,
    pub polynomials: bool,
}

impl<T: Real> Default for DictionaryConfig<T> {
    fn default() -> Self {
        Self {
            k_max: cast(3.0),
            k_step: cast(0.5),
            max_polynomial_degree: 8,
            exponentials: true,
            trig: true,
            polynomials: true,
        }
    }
}

/// Finite family of exactly caloric entire solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary<T> {
    pub members: Vec<EntireDictionaryMember<T>>,
}

impl<T: Real> Dictionary<T> {
    /// Deterministic member order: exponentials (lexicographic k), then
    /// cosines and sines over canonical nonzero k (first nonzero component
    /// positive, since the other sign duplicates them), then heat
    /// polynomials by degree (space dimension 1 only).
    pub fn build(n: usize, config: &DictionaryConfig<T>) -> Self {
        let axis = k_axis(config.k_max, config.k_step);
        let grid = k_grid(&axis, n);
        let mut members = Vec::new();
        if config.exponentials {
            for k in &grid {
                members.push(EntireDictionaryMember::Exponential { k: k.clone() });
            }
        }
        if config.trig {
            let canonical: Vec<&Vec<T>> = grid
                .iter()
                .filter(|k| {
                    k.iter()
                        .find(|v| **v != T::zero())
                        .map(|v| *v > T::zero())
                        .unwrap_or(false)
                })
                .collect();
            for k in &canonical {
                members.push(EntireDictionaryMember::TrigCos { k: (*k).clone() });
            }
            for k in &canonical {
                members.push(EntireDictionaryMember::TrigSin { k: (*k).clone() });
            }
        }
        if config.polynomials && n == 1 {
            for degree in 0..=config.max_polynomial_degree {
                members.push(EntireDictionaryMember::HeatPolynomial { degree });
            }
        }
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Linear combination as an evaluable field, skipping zero coefficients.
    pub fn combination(&self, coefficients: &[T]) -> Field<T> {
        let parts: Vec<Field<T>> = self
            .members
            .iter()
            .zip(coefficients)
            .filter(|(_, c)| **c != T::zero())
            .map(|(m, c)| Field::Member(m.clone()).scaled(*c))
            .collect();
        if parts.is_empty() {
            let dim = self.members.first().map(|m| m.dim()).unwrap_or(1);
            Field::zero(dim)
        } else {
            Field::Sum(parts)
        }
    }
}

fn k_axis<T: Real>(k_max: T, k_step: T) -> Vec<T> {
    let count = (cast::<T>(2.0) * k_max / k_step)
        .round()
        .to_usize()
        .unwrap_or(0);
    (0..=count)
        .map(|i| {
            if i == count {
                k_max
            } else {
                -k_max + k_step * cast(i as f64)
            }
        })
        .collect()
}

fn k_grid<T: Real>(axis: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut k = prefix.clone();
                k.push(v);
                next.push(k);
            }
        }
        out = next;
    }
    out
}

// ---------------------------------------------------------------------------
// Compacta and rungs
// ---------------------------------------------------------------------------

/// Closed ball or box in space-time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Compactum<T> {
    Ball {
        center: SpacetimePoint<T>,
        radius: T,
    },
    Box {
        b: AaBox<T>,
    },
}

impl<T: Real> Compactum<T> {
    pub fn dim(&self) -> usize {
        match self {
            Compactum::Ball { center, .. } => center.dim(),
            Compactum::Box { b } => b.dim() - 1,
        }
    }

    /// `sup |(t,x)|` over the set.
    pub fn norm_sup(&self) -> T {
        match self {
            Compactum::Ball { center, radius } => center.norm() + *radius,
            Compactum::Box { b } => {
                let mut sup_sq = T::zero();
                for c in 0..b.dim() {
                    let m = b.lo[c].abs().max(b.hi[c].abs());
                    sup_sq += m * m;
                }
                sup_sq.sqrt()
            }
        }
    }

    /// `inf |(t,x)|` over the set.
    pub fn norm_inf(&self) -> T {
        match self {
            Compactum::Ball { center, radius } => (center.norm() - *radius).max(T::zero()),
            Compactum::Box { b } => {
                let mut inf_sq = T::zero();
                for c in 0..b.dim() {
                    let below = b.lo[c].max(T::zero());
                    let above = (-b.hi[c]).max(T::zero());
                    let d = below.max(above);
                    inf_sq += d * d;
                }
                inf_sq.sqrt()
            }
        }
    }

    pub fn contains(&self, p: &SpacetimePoint<T>) -> bool {
        match self {
            Compactum::Ball { center, radius } => p.minus(center).norm() <= *radius,
            Compactum::Box { b } => b.contains(p),
        }
    }

    /// Regular grid restricted to the set (bounding-box grid filtered by
    /// membership; the center is used if the filter would leave nothing).
    pub fn grid(&self, per_axis: usize) -> Vec<SpacetimePoint<T>> {
        match self {
            Compactum::Ball { center, radius } => {
                let dim = center.dim() + 1;
                let coords = center.coords();
                let b = AaBox {
                    lo: coords.iter().map(|&c| c - *radius).collect(),
                    hi: coords.iter().map(|&c| c + *radius).collect(),
                };
                let pts: Vec<SpacetimePoint<T>> = b
                    .grid(&vec![per_axis; dim])
                    .into_iter()
                    .filter(|p| self.contains(p))
                    .collect();
                if pts.is_empty() {
                    vec![center.clone()]
                } else {
                    pts
                }
            }
            Compactum::Box { b } => b.uniform_grid(per_axis),
        }
    }
}

/// One rung of the ladder: a compact set, the target caloric on it, and the
/// tolerance to certify there.
#[derive(Debug, Clone)]
pub struct Rung<T> {
    pub set: Compactum<T>,
    pub target: Field<T>,
    pub tolerance: T,
}

// ---------------------------------------------------------------------------
// Two-set fit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoSetReport<T> {
    pub sup_target_error: T,
    pub sup_zero_error: T,
    pub rank: usize,
}

/// Fitted combination, its dictionary coefficients, and the achieved errors.
pub type TwoSetFit<T> = (Field<T>, Vec<T>, TwoSetReport<T>);

/// Least-squares fit of a dictionary combination matching `target` on
/// `grid_a` and zero on `grid_b`, solved by truncated SVD on the stacked
/// system with the two blocks weighted to contribute equally. Errors out as
/// `DictionaryTooSmall` (reporting the achieved errors) when either sup
/// error exceeds `tol`.
pub fn two_set_entire_fit<T: Real, F: HeatField<T>>(
    target: &F,
    grid_a: &[SpacetimePoint<T>],
    grid_b: &[SpacetimePoint<T>],
    dict: &Dictionary<T>,
    reg: T,
    tol: T,
) -> Result<TwoSetFit<T>, UniversalError<T>> {
    assert!(!grid_a.is_empty(), "target grid must be nonempty");
    let rows = grid_a.len() + grid_b.len();
    let w_a = (cast::<T>(grid_a.len() as f64)).sqrt().recip();
    let w_b = if grid_b.is_empty() {
        T::one()
    } else {
        (cast::<T>(grid_b.len() as f64)).sqrt().recip()
    };

    let mut columns: Vec<Vec<T>> = Vec::with_capacity(dict.len());
    for member in &dict.members {
        let mut col = Vec::with_capacity(rows);
        for p in grid_a {
            col.push(member.value(p) * w_a);
        }
        for p in grid_b {
            col.push(member.value(p) * w_b);
        }
        columns.push(col);
    }
    let mut b = Vec::with_capacity(rows);
    for p in grid_a {
        b.push(target.value(p)? * w_a);
    }
    for _ in grid_b {
        b.push(T::zero());
    }

    let a = ColMatrix::from_columns(rows, &columns);
    let sol = truncated_lstsq(&a, &b, reg);
    let combination = dict.combination(&sol.coefficients);

    let mut sup_a = T::zero();
    for p in grid_a {
        let d = (combination.value(p)? - target.value(p)?).abs();
        sup_a = sup_a.max(d);
    }
    let mut sup_b = T::zero();
    for p in grid_b {
        sup_b = sup_b.max(combination.value(p)?.abs());
    }
    if sup_a > tol || sup_b > tol {
        return Err(UniversalError::DictionaryTooSmall {
            sup_target: sup_a,
            sup_zero: sup_b,
            tol,
        });
    }
    Ok((
        combination,
        sol.coefficients,
        TwoSetReport {
            sup_target_error: sup_a,
            sup_zero_error: sup_b,
            rank: sol.rank,
        },
    ))
}

// ---------------------------------------------------------------------------
// Ladder
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LadderConfig<T> {
    pub grid_per_axis: usize,
    /// Grid density on the enclosing zero balls; should resolve the shortest
    /// dictionary wavelength or corrections may wiggle between the nodes.
    pub zero_grid_per_axis: usize,
    pub svd_threshold: T,
}

impl<T: Real> Default for LadderConfig<T> {
    fn default() -> Self {
        Self {
            grid_per_axis: 7,
            zero_grid_per_axis: 7,
            svd_threshold: cast(1e-10),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderStep<T> {
    pub step: usize,
    pub budget: T,
    pub sup_target_error: T,
    pub sup_zero_error: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RungCertificate<T> {
    pub rung: usize,
    pub tolerance: T,
    pub achieved: T,
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct LadderOutcome<T> {
    /// The entire field `Σ h_i` (a dictionary combination).
    pub field: Field<T>,
    pub steps: Vec<LadderStep<T>>,
    pub certificates: Vec<RungCertificate<T>>,
}

/// Inductive simultaneous approximation: step `j` fits an entire correction
/// `h_j` to `u_j - Σ_{i<j} h_i` on `K_j` while pinning it near zero on the
/// enclosing ball `B_{j-1}`, with budget `ε_j / 2^j` on both sets. The step
/// budgets telescope so the final sum is within `ε_j` of `u_j` on each `K_j`;
/// the returned certificates assert that bound directly on the rung grids.
pub fn ladder<T: Real>(
    rungs: &[Rung<T>],
    dict: &Dictionary<T>,
    config: &LadderConfig<T>,
) -> Result<LadderOutcome<T>, UniversalError<T>> {
    validate_rungs(rungs)?;
    let dim = rungs[0].set.dim();

    // Enclosing balls: radius strictly between consecutive rungs, placed at
    // the quarter point to leave the next rung breathing room for the fit.
    let quarter = cast::<T>(0.25);
    let radii: Vec<T> = (0..rungs.len().saturating_sub(1))
        .map(|j| {
            let sup = rungs[j].set.norm_sup();
            sup + (rungs[j + 1].set.norm_inf() - sup) * quarter
        })
        .collect();
    let origin = SpacetimePoint::new(T::zero(), vec![T::zero(); dim]);

    let rung_grids: Vec<Vec<SpacetimePoint<T>>> = rungs
        .iter()
        .map(|r| r.set.grid(config.grid_per_axis))
        .collect();

    let mut corrections: Vec<Field<T>> = Vec::new();
    let mut steps = Vec::new();
    for (j, rung) in rungs.iter().enumerate() {
        let step_no = j + 1;
        let budget = rung.tolerance / cast(f64::powi(2.0, step_no as i32));
        // Residual target: u_j minus the corrections so far.
        let mut parts = vec![rung.target.clone()];
        for h in &corrections {
            parts.push(h.clone().scaled(-T::one()));
        }
        let residual_target = Field::Sum(parts);
        let zero_grid: Vec<SpacetimePoint<T>> = if j == 0 {
            Vec::new()
        } else {
            Compactum::Ball {
                center: origin.clone(),
                radius: radii[j - 1],
            }
            .grid(config.zero_grid_per_axis)
        };
        let fit = two_set_entire_fit(
            &residual_target,
            &rung_grids[j],
            &zero_grid,
            dict,
            config.svd_threshold,
            budget,
        );
        let (h_j, _, report) = match fit {
            Ok(ok) => ok,
            Err(UniversalError::DictionaryTooSmall {
                sup_target,
                sup_zero,
                ..
            }) => {
                return Err(UniversalError::BudgetMissed {
                    step: step_no,
                    achieved: sup_target.max(sup_zero),
                    budget,
                })
            }
            Err(e) => return Err(e),
        };
        steps.push(LadderStep {
            step: step_no,
            budget,
            sup_target_error: report.sup_target_error,
            sup_zero_error: report.sup_zero_error,
        });
        corrections.push(h_j);
    }

    let field = Field::Sum(corrections);
    let mut certificates = Vec::new();
    for (j, rung) in rungs.iter().enumerate() {
        let mut achieved = T::zero();
        for p in &rung_grids[j] {
            let d = (field.value(p)? - rung.target.value(p)?).abs();
            achieved = achieved.max(d);
        }
        certificates.push(RungCertificate {
            rung: j + 1,
            tolerance: rung.tolerance,
            achieved,
            certified: achieved < rung.tolerance,
        });
    }
    Ok(LadderOutcome {
        field,
        steps,
        certificates,
    })
}

fn validate_rungs<T: Real>(rungs: &[Rung<T>]) -> Result<(), UniversalError<T>> {
    if rungs.is_empty() {
        return Err(UniversalError::InvalidRungs {
            reason: "need at least one rung".into(),
        });
    }
    let dim = rungs[0].set.dim();
    for (j, r) in rungs.iter().enumerate() {
        if r.set.dim() != dim || r.target.dim() != dim {
            return Err(UniversalError::InvalidRungs {
                reason: format!("rung {} has mismatched dimensions", j + 1),
            });
        }
        if !(r.tolerance > T::zero()) {
            return Err(UniversalError::InvalidRungs {
                reason: format!("rung {} tolerance must be positive", j + 1),
            });
        }
    }
    for j in 0..rungs.len().saturating_sub(1) {
        if !(rungs[j].set.norm_sup() < rungs[j + 1].set.norm_inf()) {
            return Err(UniversalError::InvalidRungs {
                reason: format!(
                    "rungs {} and {} are not escaping: sup {} !< inf {}",
                    j + 1,
                    j + 2,
                    rungs[j].set.norm_sup(),
                    rungs[j + 1].set.norm_inf()
                ),
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Universal translates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TranslatesOutcome<T> {
    pub field: Field<T>,
    pub centers: Vec<SpacetimePoint<T>>,
    pub steps: Vec<LadderStep<T>>,
    pub certificates: Vec<RungCertificate<T>>,
}

/// Builds one entire field whose translates by the returned centers match
/// the given targets: ball `K_j` of radius `R_j` is centered at `a_j` along
/// the first space axis (offsets `o_1 = R_1 + 1`,
/// `o_{j+1} = o_j + 2(R_j + R_{j+1}) + 1`), carries the target translated by
/// `a_j`, and is certified to tolerance `1/j`.
pub fn universal_translates<T: Real>(
    targets: &[Field<T>],
    radii: &[T],
    dict: &Dictionary<T>,
    config: &LadderConfig<T>,
    dim: usize,
) -> Result<TranslatesOutcome<T>, UniversalError<T>> {
    if targets.len() != radii.len() {
        return Err(UniversalError::InvalidRungs {
            reason: "need one radius per target".into(),
        });
    }
    if targets.is_empty() {
        return Ok(TranslatesOutcome {
            field: Field::zero(dim),
            centers: Vec::new(),
            steps: Vec::new(),
            certificates: Vec::new(),
        });
    }
    let two = cast::<T>(2.0);
    let mut centers = Vec::with_capacity(targets.len());
    let mut offset = radii[0] + T::one();
    for (j, &r) in radii.iter().enumerate() {
        if j > 0 {
            offset = offset + two * (radii[j - 1] + r) + T::one();
        }
        let mut x = vec![T::zero(); dim];
        x[0] = offset;
        centers.push(SpacetimePoint::new(T::zero(), x));
    }
    let rungs: Vec<Rung<T>> = targets
        .iter()
        .zip(radii)
        .zip(&centers)
        .enumerate()
        .map(|(j, ((target, &radius), center))| Rung {
            set: Compactum::Ball {
                center: center.clone(),
                radius,
            },
            target: target.clone().translated(center.clone()),
            tolerance: T::one() / cast((j + 1) as f64),
        })
        .collect();
    let outcome = ladder(&rungs, dict, config)?;
    Ok(TranslatesOutcome {
        field: outcome.field,
        centers,
        steps: outcome.steps,
        certificates: outcome.certificates,
    })
}

// ---------------------------------------------------------------------------
// Universal series
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeriesOptions<T> {
    pub svd_threshold: T,
    /// Cap on the terms any single target may consume; 0 means "all that
    /// remain".
    pub max_terms_per_target: usize,
}

impl<T: Real> Default for SeriesOptions<T> {
    fn default() -> Self {
        Self {
            svd_threshold: cast(1e-10),
            max_terms_per_target: 0,
        }
    }
}

/// Pole-coverage geometry for validating the pole sequence before fitting.
#[derive(Debug, Clone)]
pub struct SeriesGeometry<T> {
    pub k_boxes: Vec<AaBox<T>>,
    pub u: Region<T>,
    pub raster_resolution: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetCertificate<T> {
    pub target: usize,
    pub tolerance: T,
    pub sup_error: T,
    /// Coefficient range `[start, end)` this target appended.
    pub start_index: usize,
    pub end_index: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesOutcome<T> {
    /// Coefficients `c_1 .. c_{j_M}` of the pole sequence prefix.
    pub coefficients: Vec<T>,
    /// Markers `j_1 <= j_2 <= ...`, one per target.
    pub markers: Vec<usize>,
    pub certificates: Vec<TargetCertificate<T>>,
    pub dim: usize,
}

impl<T: Real> SeriesOutcome<T> {
    /// Partial sum `Σ_{j <= upto} c_j Φ(· - q_j)` as a rational solution.
    pub fn partial_solution(
        &self,
        poles: &[SpacetimePoint<T>],
        upto: usize,
    ) -> RationalHeatSolution<T> {
        let terms: Vec<KernelTerm<T>> = self.coefficients[..upto]
            .iter()
            .zip(poles)
            .filter(|(c, _)| **c != T::zero())
            .map(|(&c, q)| KernelTerm::simple(q.clone(), c))
            .collect();
        RationalHeatSolution {
            dim: self.dim,
            terms,
        }
    }
}

/// Greedy universal series: processes targets in order, extending the
/// coefficient sequence over the next unused block of the pole sequence
/// until the partial sum is within each target's tolerance on the grid.
/// Earlier coefficients are frozen; later blocks deliberately overwrite the
/// approximation of earlier targets (partial-sum visits, not convergence).
pub fn universal_series<T: Real>(
    targets: &[Field<T>],
    grid: &[SpacetimePoint<T>],
    poles: &[SpacetimePoint<T>],
    tolerances: &[T],
    geometry: Option<&SeriesGeometry<T>>,
    options: &SeriesOptions<T>,
) -> Result<SeriesOutcome<T>, UniversalError<T>> {
    assert_eq!(targets.len(), tolerances.len(), "one tolerance per target");
    assert!(!grid.is_empty(), "evaluation grid must be nonempty");
    let dim = grid[0].dim();

    if let Some(geo) = geometry {
        let verdict = validate_pole_set(&geo.k_boxes, &geo.u, poles, geo.raster_resolution)?;
        if !verdict.valid {
            return Err(UniversalError::PoleSetRejected {
                uncovered: verdict.uncovered.len(),
            });
        }
    }

    let mut coefficients: Vec<T> = Vec::new();
    let mut markers: Vec<usize> = Vec::new();
    let mut certificates = Vec::new();
    let mut used = 0usize;

    for (m, target) in targets.iter().enumerate() {
        let tol = tolerances[m];
        let start = used;
        // Residual target: target minus the frozen partial sum.
        let partial = partial_field(&coefficients, poles, dim);
        let residual = Field::Sum(vec![target.clone(), partial.scaled(-T::one())]);

        let mut sup = T::zero();
        for p in grid {
            sup = sup.max(residual.value(p)?.abs());
        }
        if sup > tol {
            let remaining = &poles[used..];
            if remaining.is_empty() {
                return Err(UniversalError::BlockExhausted {
                    target: m,
                    achieved: sup,
                    tol,
                });
            }
            let max_terms = if options.max_terms_per_target == 0 {
                remaining.len()
            } else {
                options.max_terms_per_target.min(remaining.len())
            };
            let (block, report) = greedy_fit(
                &residual,
                grid,
                &PoleSet::simple(remaining.to_vec()),
                max_terms,
                tol,
                options.svd_threshold,
            )?;
            if report.achieved_sup_residual > tol {
                return Err(UniversalError::BlockExhausted {
                    target: m,
                    achieved: report.achieved_sup_residual,
                    tol,
                });
            }
            let max_rel = report.selected.iter().copied().max().unwrap_or(0);
            let block_len = max_rel + 1;
            coefficients.resize(used + block_len, T::zero());
            for (rel, term) in report.selected.iter().zip(&block.terms) {
                coefficients[used + rel] = term.coefficient;
            }
            used += block_len;
        }
        markers.push(used);

        // Certify the full partial sum against the target.
        let partial = partial_field(&coefficients, poles, dim);
        let mut achieved = T::zero();
        for p in grid {
            achieved = achieved.max((partial.value(p)? - target.value(p)?).abs());
        }
        certificates.push(TargetCertificate {
            target: m,
            tolerance: tol,
            sup_error: achieved,
            start_index: start,
            end_index: used,
        });
    }

    Ok(SeriesOutcome {
        coefficients,
        markers,
        certificates,
        dim,
    })
}

fn partial_field<T: Real>(coefficients: &[T], poles: &[SpacetimePoint<T>], dim: usize) -> Field<T> {
    let terms: Vec<Field<T>> = coefficients
        .iter()
        .zip(poles)
        .filter(|(c, _)| **c != T::zero())
        .map(|(&c, q)| Field::Pole(KernelTerm::simple(q.clone(), c)))
        .collect();
    if terms.is_empty() {
        Field::zero(dim)
    } else {
        Field::Sum(terms)
    }
}

// ---------------------------------------------------------------------------
// Burgers transports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BurgersCertificate<T> {
    pub target: usize,
    pub heat_sup_error: T,
    pub p_sup_error: T,
    /// `sup |(U⁻¹)'|` over the u-values met on the grid.
    pub inverse_derivative_bound: T,
}

#[derive(Debug, Clone)]
pub struct BurgersSeriesOutcome<T> {
    pub heat: SeriesOutcome<T>,
    pub certificates: Vec<BurgersCertificate<T>>,
}

/// Universal series on the Burgers side: targets are transported through
/// `U`, the heat-side series runs as usual, and the composed partial products
/// equal `U⁻¹` of the heat-side partial sums (exactly, when `U₀ = 0`). Every
/// partial sum at a marker must stay inside the domain of the inverse on the
/// grid.
pub fn burgers_universal_series<T: Real>(
    targets: &[BurgersField<T>],
    grid: &[SpacetimePoint<T>],
    poles: &[SpacetimePoint<T>],
    tolerances: &[T],
    geometry: Option<&SeriesGeometry<T>>,
    options: &SeriesOptions<T>,
) -> Result<BurgersSeriesOutcome<T>, UniversalError<T>> {
    let map = shared_constant_map(targets)?;
    let heat_targets: Vec<Field<T>> = targets.iter().map(|t| t.heat.clone()).collect();
    let heat = universal_series(&heat_targets, grid, poles, tolerances, geometry, options)?;

    let mut certificates = Vec::new();
    for (m, cert) in heat.certificates.iter().enumerate() {
        let partial = heat.partial_solution(poles, heat.markers[m]);
        let mut p_sup = T::zero();
        let mut bound = T::zero();
        for q in grid {
            let u_partial = partial.value(q)?;
            if !map.domain_valid(u_partial) {
                return Err(UniversalError::Eval(EvalError::DomainViolation {
                    value: u_partial,
                    point: Some(q.clone()),
                }));
            }
            let p_partial = map.inverse(u_partial)?;
            let p_target = targets[m].value(q)?;
            p_sup = p_sup.max((p_partial - p_target).abs());
            for u in [u_partial, targets[m].heat.value(q)?] {
                let p_val = map.inverse(u)?;
                bound = bound.max(map.forward_derivative(p_val).recip().abs());
            }
        }
        certificates.push(BurgersCertificate {
            target: m,
            heat_sup_error: cert.sup_error,
            p_sup_error: p_sup,
            inverse_derivative_bound: bound,
        });
    }
    Ok(BurgersSeriesOutcome { heat, certificates })
}

#[derive(Debug, Clone)]
pub struct BurgersTranslatesOutcome<T> {
    pub heat: TranslatesOutcome<T>,
    pub certificates: Vec<BurgersCertificate<T>>,
}

/// Universal translates on the Burgers side, by the same transport.
pub fn burgers_universal_translates<T: Real>(
    targets: &[BurgersField<T>],
    radii: &[T],
    dict: &Dictionary<T>,
    config: &LadderConfig<T>,
    dim: usize,
) -> Result<BurgersTranslatesOutcome<T>, UniversalError<T>> {
    let map = if targets.is_empty() {
        None
    } else {
        Some(shared_constant_map(targets)?)
    };
    let heat_targets: Vec<Field<T>> = targets.iter().map(|t| t.heat.clone()).collect();
    let heat = universal_translates(&heat_targets, radii, dict, config, dim)?;

    let mut certificates = Vec::new();
    if let Some(map) = map {
        for (j, target) in targets.iter().enumerate() {
            let set = Compactum::Ball {
                center: heat.centers[j].clone(),
                radius: radii[j],
            };
            let grid = set.grid(config.grid_per_axis);
            let mut p_sup = T::zero();
            let mut h_sup = T::zero();
            let mut bound = T::zero();
            for q in &grid {
                let u_value = heat.field.value(q)?;
                if !map.domain_valid(u_value) {
                    return Err(UniversalError::Eval(EvalError::DomainViolation {
                        value: u_value,
                        point: Some(q.clone()),
                    }));
                }
                let local = q.minus(&heat.centers[j]);
                let u_target = target.heat.value(&local)?;
                h_sup = h_sup.max((u_value - u_target).abs());
                let p_value = map.inverse(u_value)?;
                let p_target = target.value(&local)?;
                p_sup = p_sup.max((p_value - p_target).abs());
                for u in [u_value, u_target] {
                    let p_val = map.inverse(u)?;
                    bound = bound.max(map.forward_derivative(p_val).recip().abs());
                }
            }
            certificates.push(BurgersCertificate {
                target: j,
                heat_sup_error: h_sup,
                p_sup_error: p_sup,
                inverse_derivative_bound: bound,
            });
        }
    }
    Ok(BurgersTranslatesOutcome { heat, certificates })
}

fn shared_constant_map<T: Real>(
    targets: &[BurgersField<T>],
) -> Result<crate::colehopf::ColeHopfMap<T>, UniversalError<T>> {
    let Some(first) = targets.first() else {
        return Err(UniversalError::InvalidRungs {
            reason: "need at least one target".into(),
        });
    };
    if first.map.a.as_constant().is_none() {
        return Err(UniversalError::Transform(
            ColeHopfError::NonConstantCoefficient,
        ));
    }
    for t in &targets[1..] {
        if t.map != first.map {
            return Err(UniversalError::Transform(ColeHopfError::MapMismatch));
        }
    }
    Ok(first.map.clone())
}
