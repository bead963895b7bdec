//! Experiment drivers: refinement studies on the icosphere, the sampled
//! inequality checks for the dual weights, and the primal/dual comparison.
//!
//! Every report is deterministic: meshes are traversed in sorted edge
//! order, and random sampling runs in fixed-size shards, each with its own
//! ChaCha stream derived from the seed, merged in shard order.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::curvature::{
    associated_mean_curvature, vertex_curvatures, vertex_mean_curvature,
    vertex_mean_curvature_by_rotation, Candidate, CurvatureError, TangentSphereSection,
};
use crate::hodge::{hodge_star, BasisBlade};
use crate::laplacian::{
    assemble, associated_weight, associated_weights, dual_angles, dual_term, solve_dirichlet,
    tet_dual_weights, tet_primal_term, tet_primal_weights, tri_cotan_weight, tri_cotan_weights,
    DirichletProblem, LaplacianError,
};
use crate::mesh::{
    cube_tets, dihedral_between, icosphere, jitter_interior, planar_disk, planar_grid, random_fan,
    regular_tet, EdgeKey, MeshError, TetMesh, TriMesh,
};
use crate::par::{self, Execution};
use crate::series::{
    candidate_series, flat_decay_check, flat_grid, order_gap, transformed_taylor, DEFAULT_DEGREE,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Laplacian(#[from] LaplacianError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error("invalid level range {0}..={1}: need at least two levels")]
    Levels(u32, u32),
    #[error("sample count must be positive")]
    NoSamples,
}

// ---------------------------------------------------------------------------
// Refinement reports

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRow {
    pub level: u32,
    pub delta: f64,
    pub median_dev: f64,
    pub max_dev: f64,
    #[serde(skip)]
    pub excluded_edges: usize,
    /// Largest algebraic residual, for experiments that check an identity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub experiment: String,
    pub mesh: String,
    pub levels: Vec<LevelRow>,
    /// Least-squares slope of `ln median_dev` against `ln δ`; `None` when a
    /// median is zero.
    pub slope: Option<f64>,
    pub pass: bool,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,delta,median_dev,max_dev,excluded_edges");
        let residual = self.levels.iter().any(|r| r.max_residual.is_some());
        if residual {
            out.push_str(",max_residual");
        }
        out.push('\n');
        for r in &self.levels {
            let _ = write!(
                out,
                "{},{:.17e},{:.17e},{:.17e},{}",
                r.level, r.delta, r.median_dev, r.max_dev, r.excluded_edges
            );
            if residual {
                let _ = write!(out, ",{:.17e}", r.max_residual.unwrap_or(f64::NAN));
            }
            out.push('\n');
        }
        out
    }

    pub fn deltas_decrease(&self) -> bool {
        self.levels.windows(2).all(|w| w[1].delta < w[0].delta)
    }

    pub fn medians_decrease(&self) -> bool {
        self.levels
            .windows(2)
            .all(|w| w[1].median_dev < w[0].median_dev)
    }
}

/// Median of a non-empty list (mean of the two middle values for even
/// length).
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() || ys.iter().chain(xs).any(|v| *v <= 0.0) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

fn check_levels(k0: u32, k1: u32) -> Result<(), AnalysisError> {
    if k1 <= k0 {
        return Err(AnalysisError::Levels(k0, k1));
    }
    Ok(())
}

/// Slope window for the flattening of the sphere's dihedral angles.
pub const WSTAR_SLOPE_RANGE: (f64, f64) = (1.5, 2.5);

/// `|sin²(θ/2) − 1|` over the interior edges of a mesh, plus the number of
/// boundary edges skipped.
fn wstar_deviations(mesh: &TriMesh, exec: Execution) -> Result<(Vec<f64>, usize), AnalysisError> {
    let keys = mesh.edge_keys();
    let dihedrals = par::map(exec, &keys, |&e| mesh.dihedral_angle(e));
    let mut devs = Vec::with_capacity(keys.len());
    let mut excluded = 0;
    for d in dihedrals {
        match d?.interior() {
            Some(t) => devs.push(((0.5 * t).sin().powi(2) - 1.0).abs()),
            None => excluded += 1,
        }
    }
    Ok((devs, excluded))
}

fn level_row(level: u32, mesh: &TriMesh, mut devs: Vec<f64>, excluded: usize) -> LevelRow {
    let max_dev = devs.iter().copied().fold(0.0, f64::max);
    LevelRow {
        level,
        delta: mesh.mean_edge_length(),
        median_dev: median(&mut devs),
        max_dev,
        excluded_edges: excluded,
        max_residual: None,
    }
}

/// Refinement study of the factor `sin²(θ/2)` on icosphere levels
/// `k0..=k1`. Passes when `δ` and the median deviation both decrease
/// strictly and the log-log slope lies in [`WSTAR_SLOPE_RANGE`].
pub fn wstar_convergence(
    k0: u32,
    k1: u32,
    exec: Execution,
) -> Result<ConvergenceReport, AnalysisError> {
    check_levels(k0, k1)?;
    let mut levels = Vec::new();
    for k in k0..=k1 {
        let mesh = icosphere(k)?;
        let (devs, excluded) = wstar_deviations(&mesh, exec)?;
        levels.push(level_row(k, &mesh, devs, excluded));
    }
    let slope = loglog_slope(
        &levels.iter().map(|r| r.delta).collect::<Vec<_>>(),
        &levels.iter().map(|r| r.median_dev).collect::<Vec<_>>(),
    );
    let mut report = ConvergenceReport {
        experiment: "wstar".into(),
        mesh: format!("icosphere {k0}..{k1}"),
        levels,
        slope,
        pass: false,
    };
    report.pass = report.deltas_decrease()
        && report.medians_decrease()
        && slope.is_some_and(|s| (WSTAR_SLOPE_RANGE.0..=WSTAR_SLOPE_RANGE.1).contains(&s));
    Ok(report)
}

/// Control run of the same factor on flat `2^k × 2^k` grids: every
/// interior edge is flat, so every deviation must vanish.
pub fn wstar_planar_control(
    k0: u32,
    k1: u32,
    exec: Execution,
) -> Result<ConvergenceReport, AnalysisError> {
    check_levels(k0, k1)?;
    let mut levels = Vec::new();
    for k in k0..=k1 {
        let mesh = planar_grid(1 << k)?;
        let (devs, excluded) = wstar_deviations(&mesh, exec)?;
        levels.push(level_row(k, &mesh, devs, excluded));
    }
    let pass = levels.iter().all(|r| r.max_dev == 0.0);
    Ok(ConvergenceReport {
        experiment: "wstar-planar-control".into(),
        mesh: format!("grid 2^{k0}..2^{k1}"),
        levels,
        slope: None,
        pass,
    })
}

/// Residual allowed in the decomposition `w̃ = tangential + curvature`.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-12;

/// Per edge of each icosphere level: the associated weight of order `n`
/// against its two parts computed independently, the cotangent weight
/// `½(cot α + cot β)` and the associated curvature, each scaled by
/// `|e|(n−1)/(4n)`. The deviation columns track the curvature part
/// `sinⁿ(θ/2)cos(θ/2)`, which must shrink with refinement.
pub fn associated_vs_cotan(
    k0: u32,
    k1: u32,
    n: u32,
    exec: Execution,
) -> Result<ConvergenceReport, AnalysisError> {
    check_levels(k0, k1)?;
    let mut levels = Vec::new();
    for k in k0..=k1 {
        let mesh = icosphere(k)?;
        let keys = mesh.edge_keys();
        let rows = par::map(exec, &keys, |&e| decomposition(&mesh, e, n));
        let mut residual: f64 = 0.0;
        let mut terms = Vec::with_capacity(rows.len());
        for r in rows {
            let (res, term) = r?;
            residual = residual.max(res);
            terms.push(term);
        }
        let mut row = level_row(k, &mesh, terms, 0);
        row.max_residual = Some(residual);
        levels.push(row);
    }
    let slope = loglog_slope(
        &levels.iter().map(|r| r.delta).collect::<Vec<_>>(),
        &levels.iter().map(|r| r.median_dev).collect::<Vec<_>>(),
    );
    let mut report = ConvergenceReport {
        experiment: format!("associated-vs-cotan-n{n}"),
        mesh: format!("icosphere {k0}..{k1}"),
        levels,
        slope,
        pass: false,
    };
    report.pass = report.deltas_decrease()
        && report.medians_decrease()
        && report
            .levels
            .iter()
            .all(|r| r.max_residual.is_some_and(|x| x <= DECOMPOSITION_TOLERANCE));
    Ok(report)
}

/// `(|w̃ − (tangential + curvature)|, sinⁿ(θ/2)cos(θ/2))` at one edge.
fn decomposition(mesh: &TriMesh, e: EdgeKey, n: u32) -> Result<(f64, f64), AnalysisError> {
    let theta = mesh
        .dihedral_angle(e)?
        .interior()
        .ok_or(MeshError::BoundaryEdge(e))?;
    let scale = mesh.edge_length(e) * (n as f64 - 1.0) / (4.0 * n as f64);
    let tangential = scale * tri_cotan_weight(mesh, e)?;
    let h = associated_mean_curvature(theta, n)?;
    let w = associated_weight(mesh, e, n)?;
    Ok(((w - (tangential + scale * h)).abs(), h * (n as f64 - 1.0)))
}

/// Area-normalised vertex curvature `|H_v|/(A_v/3)` against the unit
/// sphere's value 2. The deviation columns are relative errors; the run
/// passes when the median error decreases strictly and ends at most
/// `final_tolerance`.
pub fn sphere_curvature_convergence(
    k0: u32,
    k1: u32,
    final_tolerance: f64,
    exec: Execution,
) -> Result<ConvergenceReport, AnalysisError> {
    check_levels(k0, k1)?;
    let mut levels = Vec::new();
    for k in k0..=k1 {
        let mesh = icosphere(k)?;
        let errs: Vec<f64> = vertex_curvatures(&mesh, exec)?
            .iter()
            .map(|c| (c.h_vec.norm() / (c.one_ring_area / 3.0) - 2.0).abs() / 2.0)
            .collect();
        levels.push(level_row(k, &mesh, errs, 0));
    }
    let slope = loglog_slope(
        &levels.iter().map(|r| r.delta).collect::<Vec<_>>(),
        &levels.iter().map(|r| r.median_dev).collect::<Vec<_>>(),
    );
    let mut report = ConvergenceReport {
        experiment: "sphere-vertex-curvature".into(),
        mesh: format!("icosphere {k0}..{k1}"),
        levels,
        slope,
        pass: false,
    };
    report.pass = report.medians_decrease()
        && report
            .levels
            .last()
            .is_some_and(|r| r.median_dev <= final_tolerance);
    Ok(report)
}

/// Largest `|H_cot − H_rot|` over the interior vertices of `mesh`, where
/// `H_cot` is the cotangent area gradient and `H_rot` the edge-by-edge
/// accumulation of face rotations.
pub fn curvature_equivalence(mesh: &TriMesh) -> Result<f64, AnalysisError> {
    let mut worst: f64 = 0.0;
    for v in 0..mesh.vertex_count() {
        if mesh.is_boundary_vertex(v) || mesh.vertex_faces(v).is_empty() {
            continue;
        }
        let a = vertex_mean_curvature(mesh, v)?.h_vec;
        let b = vertex_mean_curvature_by_rotation(mesh, v)?;
        worst = worst.max((a - b).norm());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Inequalities

/// Samples per shard; fixed so the result does not depend on thread count.
pub const SHARD_SIZE: usize = 1 << 14;

/// Angles stay this far from the singular points of `cot` and `1/cos`.
pub const ANGLE_MARGIN: f64 = 0.05;

/// Relative slack allowed before a sample counts as a violation.
pub const INEQ_TOLERANCE: f64 = 1e-12;

/// Violation rows kept per claim.
pub const MAX_EXAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimResult {
    pub name: &'static str,
    pub domain: &'static str,
    pub samples: usize,
    pub violations: usize,
    pub examples: Vec<Violation>,
    /// Smallest `(rhs − lhs)/max(1, |lhs|, |rhs|)` seen.
    pub min_slack: f64,
}

impl ClaimResult {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Smallest sampled obtuse `θ` with `B ≤ 0` in one `(α, β)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theta0Cell {
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
    pub samples: usize,
    pub min_theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub seed: u64,
    pub samples: usize,
    /// Statements that must hold on their domains.
    pub claims: Vec<ClaimResult>,
    /// Statements outside their derivation domain, reported only.
    pub diagnostics: Vec<ClaimResult>,
    /// `|A − B|` at the equality configurations `α = β`.
    pub equality_residual: f64,
    pub theta0: Vec<Theta0Cell>,
    pub pass: bool,
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

/// `K = B = 2 cot α cot β / cos θ − (cot²α + cot²β)`.
pub fn k_term(alpha: f64, beta: f64, theta: f64) -> f64 {
    let (a, b) = (cot(alpha), cot(beta));
    2.0 * a * b / theta.cos() - (a * a + b * b)
}

/// `A = 2(1/cos θ − 1)·cotmean²`.
pub fn a_term(alpha: f64, beta: f64, theta: f64) -> f64 {
    let m = 0.5 * (cot(alpha) + cot(beta));
    2.0 * (1.0 / theta.cos() - 1.0) * m * m
}

/// Closed form `A − B = (1 + cos θ)/(2 cos θ)·(cot α − cot β)²`.
pub fn a_minus_b(alpha: f64, beta: f64, theta: f64) -> f64 {
    let c = theta.cos();
    (1.0 + c) / (2.0 * c) * (cot(alpha) - cot(beta)).powi(2)
}

/// Smallest obtuse `θ` with `B ≤ 0`: `π/2` when `cot α cot β ≥ 0`,
/// otherwise `arccos(−2|cot α cot β|/(cot²α + cot²β))`.
pub fn theta0(alpha: f64, beta: f64) -> f64 {
    let (a, b) = (cot(alpha), cot(beta));
    if a * b >= 0.0 {
        return PI / 2.0;
    }
    (-2.0 * (a * b).abs() / (a * a + b * b)).acos()
}

#[derive(Clone, Copy)]
enum ThetaDomain {
    /// `[lo, hi]`
    Range(f64, f64),
    /// `[max(lo, θ₀(α, β)), π]`
    AboveTheta0(f64),
}

struct ClaimSpec {
    name: &'static str,
    domain: &'static str,
    theta: ThetaDomain,
    /// `(lhs, rhs)` of `lhs ≤ rhs`.
    sides: fn(f64, f64, f64) -> (f64, f64),
}

fn am_gm(alpha: f64, beta: f64, _: f64) -> (f64, f64) {
    let (a, b) = (cot(alpha), cot(beta));
    // the chain a·b ≤ |a||b| ≤ (a² + b²)/2 checked as its weakest link
    let first = a * b - (a * b).abs();
    let second = (a * b).abs() - 0.5 * (a * a + b * b);
    (first.max(second), 0.0)
}

fn upper_averaged(alpha: f64, beta: f64, theta: f64) -> (f64, f64) {
    let m = 0.5 * (cot(alpha) + cot(beta));
    (
        k_term(alpha, beta, theta).abs(),
        2.0 * (1.0 / theta.cos() - 1.0).abs() * m * m,
    )
}

fn upper_max_form(alpha: f64, beta: f64, theta: f64) -> (f64, f64) {
    let (a, b) = (cot(alpha), cot(beta));
    let m = (a * a + b * b).max((2.0 * a * b).abs());
    (
        k_term(alpha, beta, theta).abs(),
        (1.0 / theta.cos() - 1.0).abs() * m,
    )
}

fn claim_a_le_b(alpha: f64, beta: f64, theta: f64) -> (f64, f64) {
    (a_term(alpha, beta, theta), k_term(alpha, beta, theta))
}

fn young_step(alpha: f64, beta: f64, theta: f64) -> (f64, f64) {
    // 2ab ≤ a² + b² with a = |m|^{1/2}, b = |tan(θ/2)|·|m|^{3/2}
    let m = (0.5 * (cot(alpha) + cot(beta))).abs();
    let t = ((1.0 - theta.cos()) / theta.sin()).abs();
    (2.0 * t * m * m, m + t * t * m * m * m)
}

const OBTUSE_LO: f64 = PI / 2.0 + ANGLE_MARGIN;
const ACUTE: ThetaDomain = ThetaDomain::Range(ANGLE_MARGIN, PI / 2.0 - ANGLE_MARGIN);

fn claims() -> Vec<ClaimSpec> {
    vec![
        ClaimSpec {
            name: "am-gm-chain",
            domain: "α, β ∈ (0.05, π−0.05)",
            theta: ThetaDomain::Range(ANGLE_MARGIN, PI - ANGLE_MARGIN),
            sides: am_gm,
        },
        ClaimSpec {
            name: "upper-averaged",
            domain: "θ ∈ [max(π/2+0.05, θ₀(α,β)), π] (B ≤ 0)",
            theta: ThetaDomain::AboveTheta0(OBTUSE_LO),
            sides: upper_averaged,
        },
        ClaimSpec {
            name: "upper-max-form-obtuse",
            domain: "θ ∈ [π/2+0.05, π]",
            theta: ThetaDomain::Range(OBTUSE_LO, PI),
            sides: upper_max_form,
        },
        ClaimSpec {
            name: "claim-a-le-b",
            domain: "θ ∈ [π/2+0.05, π]",
            theta: ThetaDomain::Range(OBTUSE_LO, PI),
            sides: claim_a_le_b,
        },
        ClaimSpec {
            name: "young-step",
            domain: "θ ∈ (0.05, π−0.05)",
            theta: ThetaDomain::Range(ANGLE_MARGIN, PI - ANGLE_MARGIN),
            sides: young_step,
        },
    ]
}

fn diagnostic_claims() -> Vec<ClaimSpec> {
    vec![
        ClaimSpec {
            name: "upper-averaged-all-obtuse",
            domain: "θ ∈ [π/2+0.05, π], no B ≤ 0 restriction",
            theta: ThetaDomain::Range(OBTUSE_LO, PI),
            sides: upper_averaged,
        },
        ClaimSpec {
            name: "upper-max-form-acute",
            domain: "θ ∈ (0.05, π/2−0.05)",
            theta: ACUTE,
            sides: upper_max_form,
        },
    ]
}

fn draw(rng: &mut ChaCha8Rng, domain: ThetaDomain) -> (f64, f64, f64) {
    let alpha = rng.random_range(ANGLE_MARGIN..PI - ANGLE_MARGIN);
    let beta = rng.random_range(ANGLE_MARGIN..PI - ANGLE_MARGIN);
    let theta = match domain {
        ThetaDomain::Range(lo, hi) => rng.random_range(lo..=hi),
        ThetaDomain::AboveTheta0(lo) => {
            let start = lo.max(theta0(alpha, beta));
            rng.random_range(start..=PI)
        }
    };
    (alpha, beta, theta)
}

fn run_claim(
    spec: &ClaimSpec,
    stream: u64,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> ClaimResult {
    let shards = samples.div_ceil(SHARD_SIZE);
    let parts = par::map_range(exec, shards, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((stream << 32) | s as u64);
        let count = SHARD_SIZE.min(samples - s * SHARD_SIZE);
        let mut violations = 0usize;
        let mut examples = Vec::new();
        let mut min_slack = f64::INFINITY;
        for _ in 0..count {
            let (alpha, beta, theta) = draw(&mut rng, spec.theta);
            let (lhs, rhs) = (spec.sides)(alpha, beta, theta);
            let slack = (rhs - lhs) / 1f64.max(lhs.abs()).max(rhs.abs());
            min_slack = min_slack.min(slack);
            if slack < -INEQ_TOLERANCE {
                violations += 1;
                if examples.len() < MAX_EXAMPLES {
                    examples.push(Violation {
                        alpha,
                        beta,
                        theta,
                        lhs,
                        rhs,
                    });
                }
            }
        }
        (count, violations, examples, min_slack)
    });
    let mut out = ClaimResult {
        name: spec.name,
        domain: spec.domain,
        samples: 0,
        violations: 0,
        examples: Vec::new(),
        min_slack: f64::INFINITY,
    };
    for (count, violations, examples, min_slack) in parts {
        out.samples += count;
        out.violations += violations;
        out.min_slack = out.min_slack.min(min_slack);
        for e in examples {
            if out.examples.len() < MAX_EXAMPLES {
                out.examples.push(e);
            }
        }
    }
    out
}

/// Cells per angle axis of the `θ₀` probe.
pub const THETA0_CELLS: usize = 6;

fn probe_theta0(samples: usize, seed: u64, exec: Execution) -> Vec<Theta0Cell> {
    let width = (PI - 2.0 * ANGLE_MARGIN) / THETA0_CELLS as f64;
    let per_cell = (samples / (THETA0_CELLS * THETA0_CELLS)).max(1);
    let cells: Vec<(usize, usize)> = (0..THETA0_CELLS)
        .flat_map(|i| (0..THETA0_CELLS).map(move |j| (i, j)))
        .collect();
    par::map(exec, &cells, |&(i, j)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((0xff << 32) | (i * THETA0_CELLS + j) as u64);
        let a0 = ANGLE_MARGIN + i as f64 * width;
        let b0 = ANGLE_MARGIN + j as f64 * width;
        let mut min_theta: Option<f64> = None;
        for _ in 0..per_cell {
            let alpha = rng.random_range(a0..a0 + width);
            let beta = rng.random_range(b0..b0 + width);
            let theta = rng.random_range(OBTUSE_LO..=PI);
            if k_term(alpha, beta, theta) <= 0.0 {
                min_theta = Some(min_theta.map_or(theta, |m: f64| m.min(theta)));
            }
        }
        Theta0Cell {
            alpha: (a0, a0 + width),
            beta: (b0, b0 + width),
            samples: per_cell,
            min_theta,
        }
    })
}

/// Residual of `A = B` over a grid of `α = β` and obtuse `θ`, including
/// `α = β = π/3, θ = 2π/3`.
pub fn equality_case_residual() -> f64 {
    let mut worst: f64 = 0.0;
    let mut check = |alpha: f64, theta: f64| {
        let direct = a_term(alpha, alpha, theta) - k_term(alpha, alpha, theta);
        let scale = 1f64.max(a_term(alpha, alpha, theta).abs());
        worst = worst
            .max(direct.abs() / scale)
            .max(a_minus_b(alpha, alpha, theta).abs());
    };
    check(PI / 3.0, 2.0 * PI / 3.0);
    for i in 0..50 {
        for j in 0..50 {
            let alpha = ANGLE_MARGIN + (PI - 2.0 * ANGLE_MARGIN) * i as f64 / 49.0;
            let theta = OBTUSE_LO + (PI - OBTUSE_LO) * j as f64 / 49.0;
            check(alpha, theta);
        }
    }
    worst
}

/// Samples every claim `samples` times. Passes when the asserted claims
/// have no violations and the equality configurations hold to `1e−10`.
pub fn inequality_checks(
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<InequalityReport, AnalysisError> {
    if samples == 0 {
        return Err(AnalysisError::NoSamples);
    }
    let claims: Vec<ClaimResult> = claims()
        .iter()
        .enumerate()
        .map(|(i, c)| run_claim(c, i as u64, samples, seed, exec))
        .collect();
    let diagnostics: Vec<ClaimResult> = diagnostic_claims()
        .iter()
        .enumerate()
        .map(|(i, c)| run_claim(c, 100 + i as u64, samples, seed, exec))
        .collect();
    let equality_residual = equality_case_residual();
    let pass = claims.iter().all(ClaimResult::passed) && equality_residual <= 1e-10;
    Ok(InequalityReport {
        seed,
        samples,
        claims,
        diagnostics,
        equality_residual,
        theta0: probe_theta0(samples.min(360_000), seed, exec),
        pass,
    })
}

// ---------------------------------------------------------------------------
// Primal against dual

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightComparison {
    pub edge: (usize, usize),
    pub primal: f64,
    /// Full dual weight `Σ_t (w_ijkl + w_ijlk)`.
    pub dual: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    /// `Σ_t w_ijkl − primal`: the per-tet term comparison.
    pub term_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualPrimalReport {
    pub rows: Vec<WeightComparison>,
    pub primal_kernel: f64,
    pub dual_kernel: f64,
    pub primal_scale: f64,
    pub dual_scale: f64,
    pub primal_symmetric: bool,
    pub dual_symmetric: bool,
}

impl DualPrimalReport {
    /// Both kernels within `1e−10` of their diagonal scale and both
    /// matrices exactly symmetric.
    pub fn diagnostics_pass(&self) -> bool {
        self.primal_kernel <= 1e-10 * self.primal_scale
            && self.dual_kernel <= 1e-10 * self.dual_scale
            && self.primal_symmetric
            && self.dual_symmetric
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("edge_i,edge_j,primal,dual,abs_diff,rel_diff,term_diff\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                r.edge.0, r.edge.1, r.primal, r.dual, r.abs_diff, r.rel_diff, r.term_diff
            );
        }
        let _ = writeln!(
            out,
            "# primal kernel {:.3e} (scale {:.3e}) symmetric {}; dual kernel {:.3e} (scale {:.3e}) symmetric {}",
            self.primal_kernel,
            self.primal_scale,
            self.primal_symmetric,
            self.dual_kernel,
            self.dual_scale,
            self.dual_symmetric
        );
        out
    }
}

pub fn dual_vs_primal_report(
    mesh: &TetMesh,
    exec: Execution,
) -> Result<DualPrimalReport, AnalysisError> {
    let primal = tet_primal_weights(mesh, exec)?;
    let dual = tet_dual_weights(mesh, exec)?;
    let rows = primal
        .iter()
        .map(|(e, p)| {
            let d = dual.get(e).expect("same edge set");
            let abs_diff = (d - p).abs();
            let scale = p.abs().max(d.abs());
            WeightComparison {
                edge: (e.i(), e.j()),
                primal: p,
                dual: d,
                abs_diff,
                rel_diff: if scale > 0.0 { abs_diff / scale } else { 0.0 },
                term_diff: 0.5 * d - p,
            }
        })
        .collect();
    let lp = assemble(&primal, mesh.vertex_count())?;
    let ld = assemble(&dual, mesh.vertex_count())?;
    Ok(DualPrimalReport {
        rows,
        primal_kernel: lp.kernel_residual(),
        dual_kernel: ld.kernel_residual(),
        primal_scale: lp.max_abs_diagonal(),
        dual_scale: ld.max_abs_diagonal(),
        primal_symmetric: lp.is_symmetric(),
        dual_symmetric: ld.is_symmetric(),
    })
}

// ---------------------------------------------------------------------------
// Verification suite

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self { name, pass, detail }
    }

    fn failed(name: &'static str, err: impl std::fmt::Display) -> Self {
        Self::new(name, false, format!("error: {err}"))
    }
}

fn hodge_check() -> Check {
    let cases: [(&[usize], &[usize], i8); 3] = [
        (&[3], &[1, 2, 4, 5], 1),
        (&[1, 3], &[2, 4, 5], -1),
        (&[1, 2, 4], &[3, 5], -1),
    ];
    let ok = cases.iter().all(|&(b, star, sign)| {
        let s = hodge_star(&BasisBlade::new(5, b, 1).expect("valid blade"));
        s.indices() == star && s.sign() == sign
    });
    let double = (1..=8usize).all(|m| {
        (0u32..1 << m).all(|mask| {
            let idx: Vec<usize> = (1..=m).filter(|i| mask & (1 << (i - 1)) != 0).collect();
            let b = BasisBlade::new(m, &idx, 1).expect("valid blade");
            let ss = hodge_star(&hodge_star(&b));
            let k = idx.len();
            ss.indices() == b.indices()
                && ss.sign()
                    == if (k * (m - k)).is_multiple_of(2) {
                        1
                    } else {
                        -1
                    }
        })
    });
    Check::new(
        "hodge",
        ok && double,
        format!("R5 example {ok}, double star m<=8 {double}"),
    )
}

fn regular_tet_check() -> Check {
    let mesh = regular_tet();
    let p = mesh.tet_points(0);
    let expect = 1.0 / (12.0 * 2f64.sqrt());
    let primal = tet_primal_term(&p, 0, 1);
    let (len, theta, alpha, beta) = dual_angles(&p, 0, 1);
    let dual = dual_term(len, theta, alpha, beta);
    let dihedral = dihedral_between(&p[0], &p[1], &p[2], &p[3]);
    let err = (primal - expect)
        .abs()
        .max((dual - expect).abs())
        .max((dihedral - (1.0f64 / 3.0).acos()).abs());
    Check::new(
        "regular-tet",
        err <= 1e-12,
        format!("primal {primal:.12} dual {dual:.12} max error {err:.2e}"),
    )
}

fn table1_check() -> Check {
    let e = std::f64::consts::E;
    let expect = [
        (
            Candidate::F,
            [1.0 / e, 1.0 / e, -3.0 / (8.0 * e), -1.0 / (24.0 * e)],
        ),
        (Candidate::G, [1.0, 1.0, -0.75, -5.0 / 12.0]),
    ];
    let mut err: f64 = 0.0;
    for (c, coeffs) in expect {
        match candidate_series(c, DEFAULT_DEGREE) {
            Ok(s) => {
                let t = transformed_taylor(&s);
                for (k, want) in coeffs.iter().enumerate() {
                    err = err.max((t.coeff(k) - want).abs());
                }
            }
            Err(e) => return Check::failed("taylor-table-1", e),
        }
    }
    let grid = flat_grid(0.005, 40);
    let flat = [Candidate::P, Candidate::Q]
        .iter()
        .all(|&c| flat_decay_check(c, &grid).passed);
    Check::new(
        "taylor-table-1",
        err <= 1e-10 && flat,
        format!("max coefficient error {err:.2e}, p/q flat {flat}"),
    )
}

fn table2_check() -> Check {
    let mut degrees_ok = true;
    for n in 2..=10 {
        match order_gap(n, DEFAULT_DEGREE) {
            Ok((d, _)) => degrees_ok &= d == n as usize,
            Err(e) => return Check::failed("taylor-table-2", e),
        }
    }
    let (_, c10) = order_gap(10, DEFAULT_DEGREE).expect("n = 10 is in range");
    let rel = (c10 + 1.0 / 9216.0).abs() * 9216.0;
    Check::new(
        "taylor-table-2",
        degrees_ok && rel <= 1e-10,
        format!("degrees n for n in 2..10 {degrees_ok}, c10 relative error {rel:.2e}"),
    )
}

fn report_check(name: &'static str, r: Result<ConvergenceReport, AnalysisError>) -> Check {
    match r {
        Ok(r) => {
            let last = r.levels.last().map_or(f64::NAN, |l| l.median_dev);
            let slope = r.slope.map_or("none".into(), |s| format!("{s:.3}"));
            Check::new(
                name,
                r.pass,
                format!("final median {last:.3e}, slope {slope}"),
            )
        }
        Err(e) => Check::failed(name, e),
    }
}

fn equivalence_check(exec: Execution, seed: u64) -> Check {
    let mut meshes = Vec::new();
    match icosphere(2) {
        Ok(m) => meshes.push(m),
        Err(e) => return Check::failed("curvature-equivalence", e),
    }
    for i in 0..100u64 {
        match random_fan(
            5 + (i % 8) as usize,
            seed.wrapping_mul(1000).wrapping_add(i),
        ) {
            Ok(m) => meshes.push(m),
            Err(e) => return Check::failed("curvature-equivalence", e),
        }
    }
    let worst = par::map(exec, &meshes, curvature_equivalence);
    let mut max: f64 = 0.0;
    for w in worst {
        match w {
            Ok(w) => max = max.max(w),
            Err(e) => return Check::failed("curvature-equivalence", e),
        }
    }
    Check::new(
        "curvature-equivalence",
        max <= 1e-10,
        format!("max |H_cot - H_rot| {max:.2e} over 101 meshes"),
    )
}

/// Boundary-linear data on a jittered planar disk: the cotangent
/// Dirichlet solve must reproduce the linear function in the interior.
pub fn linear_precision_error(rings: usize, seed: u64) -> Result<f64, AnalysisError> {
    let mesh = jitter_interior(&planar_disk(rings)?, 0.1, seed)?;
    let f = |p: &crate::Vec3| 0.3 + 1.7 * p.x - 0.9 * p.y;
    let weights = tri_cotan_weights(&mesh, Execution::Sequential)?;
    let l = assemble(&weights, mesh.vertex_count())?;
    let boundary = (0..mesh.vertex_count())
        .filter(|&v| mesh.is_boundary_vertex(v))
        .map(|v| (v, f(mesh.vertex(v))))
        .collect();
    let solution = solve_dirichlet(&DirichletProblem::new(l, boundary)?)?;
    Ok(solution
        .values
        .iter()
        .enumerate()
        .map(|(v, x)| (x - f(mesh.vertex(v))).abs())
        .fold(0.0, f64::max))
}

fn laplacian_check(exec: Execution) -> Result<Check, AnalysisError> {
    let precision = linear_precision_error(4, 3)?;
    let sphere = icosphere(2)?;
    let cube = cube_tets(2)?;
    let mut all = vec![
        tri_cotan_weights(&sphere, exec)?,
        associated_weights(&sphere, 2, exec)?,
        tet_primal_weights(&cube, exec)?,
        tet_dual_weights(&cube, exec)?,
    ];
    all.push(tri_cotan_weights(&planar_disk(3)?, exec)?);
    let mut ok = precision <= 1e-8;
    let mut worst: f64 = 0.0;
    for w in &all {
        let n = w.iter().map(|(e, _)| e.j() + 1).max().unwrap_or(0);
        let l = assemble(w, n)?;
        let ratio = l.kernel_residual() / l.max_abs_diagonal().max(f64::MIN_POSITIVE);
        worst = worst.max(ratio);
        ok &= ratio <= 1e-10 && l.is_symmetric();
    }
    Ok(Check::new(
        "linear-precision",
        ok,
        format!("interior error {precision:.2e}, worst |L1|/scale {worst:.2e}"),
    ))
}

fn tangent_sphere_check() -> Check {
    let mut tangency: f64 = 0.0;
    let mut radius: f64 = 0.0;
    for i in 1..1000 {
        let theta = PI * i as f64 / 1000.0;
        match TangentSphereSection::new(theta, 1.3) {
            Ok(s) => {
                tangency = tangency.max(s.tangency_residuals().into_iter().fold(0.0, f64::max));
                let want = (0.5 * theta).tan() * 1.3 / 2.0;
                radius = radius.max((s.h - want).abs() / want.max(1.0));
            }
            Err(e) => return Check::failed("tangent-sphere", e),
        }
    }
    Check::new(
        "tangent-sphere",
        tangency <= 1e-10 && radius <= 1e-12,
        format!("tangency residual {tangency:.2e}, radius error {radius:.2e}"),
    )
}

/// Samples per claim used by [`verification_suite`].
pub const VERIFY_SAMPLES: usize = 1_000_000;

/// Every numerical check of the crate in one run, in a fixed order.
pub fn verification_suite(seed: u64, samples: usize, exec: Execution) -> Vec<Check> {
    let mut checks = vec![
        hodge_check(),
        regular_tet_check(),
        table1_check(),
        table2_check(),
    ];
    checks.push(report_check("wstar", wstar_convergence(1, 4, exec)));
    checks.push(report_check(
        "wstar-planar-control",
        wstar_planar_control(1, 4, exec),
    ));
    checks.push(report_check(
        "associated-decomposition",
        associated_vs_cotan(1, 4, 2, exec),
    ));
    checks.push(match inequality_checks(samples, seed, exec) {
        Ok(r) => {
            let violations: usize = r.claims.iter().map(|c| c.violations).sum();
            Check::new(
                "inequalities",
                r.pass,
                format!(
                    "{} claims x {} samples, {violations} violations, equality residual {:.2e}",
                    r.claims.len(),
                    r.samples,
                    r.equality_residual
                ),
            )
        }
        Err(e) => Check::failed("inequalities", e),
    });
    checks.push(equivalence_check(exec, seed));
    checks.push(report_check(
        "sphere-curvature",
        sphere_curvature_convergence(2, 4, 0.1, exec),
    ));
    checks.push(laplacian_check(exec).unwrap_or_else(|e| Check::failed("linear-precision", e)));
    checks.push(tangent_sphere_check());
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;

    #[test]
    fn median_and_slope() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        let xs = [1.0, 0.5, 0.25];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&xs, &[1.0, 0.0, 1.0]).is_none());
    }

    #[test]
    fn wstar_on_sphere_and_plane() {
        let r = wstar_convergence(1, 3, Execution::Parallel).unwrap();
        assert!(r.deltas_decrease() && r.medians_decrease());
        let s = r.slope.unwrap();
        assert!((1.5..=2.5).contains(&s), "{s}");
        assert!(r.pass);
        let c = wstar_planar_control(1, 3, Execution::Parallel).unwrap();
        assert!(c.pass);
        assert!(c.levels.iter().all(|l| l.excluded_edges > 0));
        assert!(wstar_convergence(2, 2, Execution::Parallel).is_err());
    }

    #[test]
    fn report_formats() {
        let r = wstar_convergence(1, 2, Execution::Sequential).unwrap();
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["experiment"], "wstar");
        assert_eq!(json["levels"].as_array().unwrap().len(), 2);
        for key in ["level", "delta", "median_dev", "max_dev"] {
            assert!(json["levels"][0].get(key).is_some(), "{key}");
        }
        assert!(json.get("slope").is_some() && json.get("pass").is_some());
        let csv = r.to_csv();
        assert!(csv.starts_with("level,delta,median_dev,max_dev,excluded_edges\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn decomposition_is_exact() {
        let r = associated_vs_cotan(1, 3, 2, Execution::Parallel).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn sphere_curvature_study() {
        let r = sphere_curvature_convergence(2, 3, 0.1, Execution::Parallel).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn rotation_equivalence_on_fans() {
        for seed in 0..20 {
            let fan = random_fan(5 + seed as usize % 6, seed).unwrap();
            assert!(curvature_equivalence(&fan).unwrap() < 1e-10);
        }
    }

    #[test]
    fn claim_algebra() {
        for &(a, b, t) in &[(0.4, 1.9, 2.0), (1.2, 1.3, 2.8), (2.5, 0.3, 1.7)] {
            let direct = a_term(a, b, t) - k_term(a, b, t);
            assert!((direct - a_minus_b(a, b, t)).abs() < 1e-12);
        }
        assert!(a_minus_b(PI / 3.0, PI / 3.0, 2.0 * PI / 3.0).abs() < 1e-15);
        assert!(equality_case_residual() < 1e-10);
        // B vanishes at θ₀ when the cotangents have opposite signs
        let (a, b) = (0.7, 2.2);
        assert!(k_term(a, b, theta0(a, b)).abs() < 1e-12);
        assert_eq!(theta0(0.7, 1.1), PI / 2.0);
        // at θ = π/2 the dual term carries cot θ = 0
        assert_eq!(
            crate::laplacian::dual_term(1.0, PI / 2.0, 0.5, 0.5) * 0.0,
            0.0
        );
    }

    #[test]
    fn inequalities_small_run() {
        let r = inequality_checks(50_000, 1, Execution::Parallel).unwrap();
        for c in &r.claims {
            assert_eq!(c.violations, 0, "{}: {:?}", c.name, c.examples);
            assert_eq!(c.samples, 50_000);
        }
        assert!(r.pass);
        let outside = &r.diagnostics[0];
        assert!(outside.violations > 0);
        let acute = &r.diagnostics[1];
        assert!(acute.violations > 0);
        assert_eq!(r.theta0.len(), THETA0_CELLS * THETA0_CELLS);
    }

    #[test]
    fn inequality_runs_are_deterministic() {
        let a = inequality_checks(40_000, 7, Execution::Sequential).unwrap();
        let b = inequality_checks(40_000, 7, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let c = inequality_checks(40_000, 8, Execution::Parallel).unwrap();
        assert_ne!(a.claims[4].min_slack, c.claims[4].min_slack);
    }

    #[test]
    fn primal_dual_comparison() {
        let r = dual_vs_primal_report(&regular_tet(), Execution::Sequential).unwrap();
        assert_eq!(r.rows.len(), 6);
        for row in &r.rows {
            assert!(row.term_diff.abs() < 1e-15);
        }
        assert!(r.diagnostics_pass());
        let skew = TetMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.3, 0.1, 0.0),
                Vec3::new(0.2, 0.9, 0.1),
                Vec3::new(0.3, 0.2, 1.1),
            ],
            vec![[0, 1, 2, 3]],
        )
        .unwrap();
        let r = dual_vs_primal_report(&skew, Execution::Sequential).unwrap();
        assert!(r.rows.iter().any(|row| row.term_diff.abs() > 1e-3));
        let csv = r.to_csv();
        assert!(csv.starts_with("edge_i,edge_j,primal,dual"));
        let cube = crate::mesh::cube_tets(2).unwrap();
        assert!(dual_vs_primal_report(&cube, Execution::Parallel)
            .unwrap()
            .diagnostics_pass());
    }

    #[test]
    fn suite_passes() {
        let checks = verification_suite(1, 20_000, Execution::Parallel);
        assert_eq!(checks.len(), 12);
        for c in &checks {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
    }
}
