//! Command-line front end.
//!
//! Data goes to `-o PATH` or standard output; diagnostics go to standard
//! error. Exit codes: 0 success, 1 invalid invocation or input, 2 a check
//! or computation failed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    associated_vs_cotan, dual_vs_primal_report, sphere_curvature_convergence, verification_suite,
    wstar_convergence, wstar_planar_control, ConvergenceReport, VERIFY_SAMPLES,
};
use crate::curvature::{edge_curvatures, vertex_curvatures};
use crate::laplacian::{
    associated_weights, tet_dual_weights, tet_primal_weights, tri_cotan_weights, EdgeWeights,
};
use crate::mesh::io::{read_off, read_tetgen, save_tetgen, to_off_string};
use crate::mesh::{
    cube_tets, icosphere, planar_disk, planar_grid, regular_tet, two_triangle_hinge, TetMesh,
    TriMesh,
};
use crate::par::Execution;
use crate::series::{candidate_table, order_gap_table, DEFAULT_DEGREE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "dualap",
    version,
    about = "Discrete Laplacians and edge mean curvatures"
)]
pub struct Cli {
    /// Run every loop on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated mesh (OFF for surfaces, TetGen .node/.ele for volumes).
    Gen(GenArgs),
    /// Per-edge Laplacian weights as CSV.
    Weights(WeightsArgs),
    /// Edge and vertex mean curvatures as CSV.
    Curvature(CurvatureArgs),
    /// Refinement study on icosphere levels.
    Converge(ConvergeArgs),
    /// Taylor tables of the curvature candidates.
    Taylor(TaylorArgs),
    /// Run the numerical verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("shape").required(true).multiple(false)))]
pub struct GenArgs {
    /// Icosphere subdivision level.
    #[arg(long, value_name = "LEVEL", group = "shape")]
    pub icosphere: Option<u32>,
    /// Regular tetrahedron with unit edges.
    #[arg(long, group = "shape")]
    pub regular_tet: bool,
    /// Unit cube split into N³ cells of six tetrahedra.
    #[arg(long, value_name = "N", group = "shape")]
    pub cube_tets: Option<usize>,
    /// Two unit triangles meeting at dihedral angle THETA.
    #[arg(
        long,
        value_name = "THETA",
        group = "shape",
        allow_hyphen_values = true
    )]
    pub hinge: Option<f64>,
    /// Hexagonal planar disk with R rings.
    #[arg(long, value_name = "R", group = "shape")]
    pub disk: Option<usize>,
    /// Planar unit-square grid with N × N cells.
    #[arg(long, value_name = "N", group = "shape")]
    pub grid: Option<usize>,
    /// Output path; surfaces may go to standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    TriCotan,
    TetPrimal,
    TetDual,
    Assoc,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    /// Input mesh: .off, or a TetGen .node/.ele base path.
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    /// Order n of the associated scheme.
    #[arg(long, default_value_t = 2)]
    pub order: u32,
    /// Emit the primal against dual comparison instead (tet input only).
    #[arg(long)]
    pub compare: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    /// Input surface mesh (.off).
    #[arg(short, long)]
    pub input: PathBuf,
    /// Orders of the associated curvature columns.
    #[arg(long = "order", default_values_t = [2u32])]
    pub orders: Vec<u32>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// `|sin²(θ/2) − 1|` on icospheres.
    Wstar,
    /// The same factor on flat grids.
    Planar,
    /// Associated weight decomposition on icospheres.
    Assoc,
    /// Vertex curvature against the unit sphere.
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long, value_enum, default_value_t = Experiment::Wstar)]
    pub experiment: Experiment,
    /// Level range `K0:K1`.
    #[arg(long, default_value = "1:4", value_parser = parse_levels)]
    pub levels: (u32, u32),
    /// Order of the associated experiment.
    #[arg(long, default_value_t = 2)]
    pub order: u32,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TaylorArgs {
    /// 1: candidate coefficients, 2: order gaps of the associated family.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub table: u8,
    /// Truncation degree of the series.
    #[arg(long, default_value_t = DEFAULT_DEGREE)]
    pub degree: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run every check (currently the only mode).
    #[arg(long, required = true)]
    pub all: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Samples per inequality claim.
    #[arg(long, default_value_t = VERIFY_SAMPLES)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn parse_levels(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected K0:K1, got `{s}`"))?;
    let k0: u32 = a.trim().parse().map_err(|_| format!("bad level `{a}`"))?;
    let k1: u32 = b.trim().parse().map_err(|_| format!("bad level `{b}`"))?;
    if k1 <= k0 {
        return Err(format!("need K0 < K1, got {k0}:{k1}"));
    }
    Ok((k0, k1))
}

/// Failure of one invocation, tagged with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn failed(message: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_FAILED,
            message: message.to_string(),
        }
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Runs a parsed command. `Ok` carries the exit code of commands that
/// report a failed check without an error.
pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match &cli.command {
        Command::Gen(a) => gen(a).map(|_| EXIT_OK),
        Command::Weights(a) => weights(a, exec).map(|_| EXIT_OK),
        Command::Curvature(a) => curvature(a, exec).map(|_| EXIT_OK),
        Command::Converge(a) => converge(a, exec),
        Command::Taylor(a) => taylor(a),
        Command::Verify(a) => verify(a, exec),
    }
}

fn emit(output: Option<&Path>, data: &str) -> Result<(), CliError> {
    match output {
        Some(p) => std::fs::write(p, data)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(data.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::usage(format!("cannot write to standard output: {e}")))
        }
    }
}

fn gen(a: &GenArgs) -> Result<(), CliError> {
    let tri = if let Some(k) = a.icosphere {
        Some(icosphere(k))
    } else if let Some(t) = a.hinge {
        Some(two_triangle_hinge(t))
    } else if let Some(r) = a.disk {
        Some(planar_disk(r))
    } else {
        a.grid.map(planar_grid)
    };
    if let Some(mesh) = tri {
        let mesh = mesh.map_err(CliError::usage)?;
        return emit(a.output.as_deref(), &to_off_string(&mesh));
    }
    let tet = if a.regular_tet {
        regular_tet()
    } else {
        cube_tets(a.cube_tets.expect("clap requires one shape")).map_err(CliError::usage)?
    };
    let path = a.output.as_deref().ok_or_else(|| {
        CliError::usage("tetrahedral meshes need -o BASE (writes BASE.node and BASE.ele)")
    })?;
    save_tetgen(&tet, path).map_err(CliError::usage)?;
    Ok(())
}

enum Input {
    Surface(TriMesh),
    Volume(TetMesh),
}

fn read_input(path: &Path) -> Result<Input, CliError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("off") => read_off(path).map(Input::Surface).map_err(CliError::usage),
        Some("node") | Some("ele") | None => read_tetgen(path)
            .map(Input::Volume)
            .map_err(CliError::usage),
        Some(other) => Err(CliError::usage(format!(
            "unknown mesh extension `.{other}` for {}: use .off or a TetGen .node/.ele path",
            path.display()
        ))),
    }
}

fn weights_csv(w: &EdgeWeights) -> String {
    let scheme = w.scheme().to_string();
    let mut out = String::from("edge_i,edge_j,scheme,weight\n");
    for (e, v) in w.iter() {
        let _ = writeln!(out, "{},{},{scheme},{v:.17e}", e.i(), e.j());
    }
    out
}

fn weights(a: &WeightsArgs, exec: Execution) -> Result<(), CliError> {
    let input = read_input(&a.input)?;
    if a.compare {
        let Input::Volume(mesh) = input else {
            return Err(CliError::usage("--compare needs a tetrahedral mesh"));
        };
        let report = dual_vs_primal_report(&mesh, exec).map_err(CliError::failed)?;
        return emit(a.output.as_deref(), &report.to_csv());
    }
    let w = match (a.scheme, input) {
        (SchemeArg::TriCotan, Input::Surface(m)) => tri_cotan_weights(&m, exec),
        (SchemeArg::Assoc, Input::Surface(m)) => {
            if a.order < 2 {
                return Err(CliError::usage(format!(
                    "--order must be at least 2, got {}",
                    a.order
                )));
            }
            associated_weights(&m, a.order, exec)
        }
        (SchemeArg::TetPrimal, Input::Volume(m)) => tet_primal_weights(&m, exec),
        (SchemeArg::TetDual, Input::Volume(m)) => tet_dual_weights(&m, exec),
        (s, _) => {
            let need = match s {
                SchemeArg::TriCotan | SchemeArg::Assoc => "a surface (.off)",
                _ => "a tetrahedral (.node/.ele)",
            };
            return Err(CliError::usage(format!(
                "scheme {} needs {need} mesh",
                s.to_possible_value()
                    .expect("no skipped variants")
                    .get_name()
            )));
        }
    }
    .map_err(CliError::failed)?;
    emit(a.output.as_deref(), &weights_csv(&w))
}

fn curvature(a: &CurvatureArgs, exec: Execution) -> Result<(), CliError> {
    let Input::Surface(mesh) = read_input(&a.input)? else {
        return Err(CliError::usage("curvature needs a surface mesh (.off)"));
    };
    if let Some(n) = a.orders.iter().find(|&&n| n < 2) {
        return Err(CliError::usage(format!(
            "--order must be at least 2, got {n}"
        )));
    }
    let edges = edge_curvatures(&mesh, &a.orders, exec).map_err(CliError::failed)?;
    let vertices = vertex_curvatures(&mesh, exec).map_err(CliError::failed)?;
    let mut out = String::from("i,j,theta,H_edge,H_recip");
    for n in &a.orders {
        let _ = write!(out, ",H_assoc_{n}");
    }
    out.push('\n');
    for c in &edges {
        let _ = write!(
            out,
            "{},{},{:.17e},{:.17e},{}",
            c.edge.i(),
            c.edge.j(),
            c.theta,
            c.h_edge,
            c.h_recip
        );
        for (_, h) in &c.h_assoc {
            let _ = write!(out, ",{h:.17e}");
        }
        out.push('\n');
    }
    out.push_str("\nv,Hx,Hy,Hz,ring_area\n");
    for v in &vertices {
        let _ = writeln!(
            out,
            "{},{:.17e},{:.17e},{:.17e},{:.17e}",
            v.vertex, v.h_vec.x, v.h_vec.y, v.h_vec.z, v.one_ring_area
        );
    }
    emit(a.output.as_deref(), &out)
}

fn converge(a: &ConvergeArgs, exec: Execution) -> Result<i32, CliError> {
    let (k0, k1) = a.levels;
    let report: ConvergenceReport = match a.experiment {
        Experiment::Wstar => wstar_convergence(k0, k1, exec),
        Experiment::Planar => wstar_planar_control(k0, k1, exec),
        Experiment::Assoc => {
            if a.order < 2 {
                return Err(CliError::usage(format!(
                    "--order must be at least 2, got {}",
                    a.order
                )));
            }
            associated_vs_cotan(k0, k1, a.order, exec)
        }
        Experiment::Sphere => sphere_curvature_convergence(k0, k1, 0.1, exec),
    }
    .map_err(CliError::usage)?;
    let data = match a.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
        Format::Text => return Err(CliError::usage("converge writes csv or json")),
    };
    emit(a.output.as_deref(), &data)?;
    if report.pass {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "converge: {} did not meet its acceptance test",
            report.experiment
        );
        Ok(EXIT_FAILED)
    }
}

/// Orders listed in the order-gap table.
pub const TABLE2_ORDERS: [u32; 11] = [2, 3, 4, 5, 6, 7, 8, 9, 10, 50, 100];

fn taylor(a: &TaylorArgs) -> Result<i32, CliError> {
    if a.degree < 4 {
        return Err(CliError::usage(format!(
            "--degree must be at least 4, got {}",
            a.degree
        )));
    }
    let csv = a.format == Format::Csv;
    if a.format == Format::Json {
        return Err(CliError::usage("taylor writes text or csv"));
    }
    let mut out = String::new();
    let mut pass = true;
    if a.table == 1 {
        let cols = 4;
        if csv {
            out.push_str("curvature,at_zero,c0,c1,c2,c3,prefactor,flat\n");
        } else {
            let _ = writeln!(
                out,
                "{:<10} {:>10} {:>22} {:>22} {:>22} {:>22}  note",
                "curvature", "at 0", "c0", "c1", "c2", "c3"
            );
        }
        for row in candidate_table(a.degree) {
            let coeffs: Vec<String> = match &row.taylor {
                Some(t) => (0..cols).map(|k| format!("{:.15e}", t.coeff(k))).collect(),
                None => vec![String::new(); cols],
            };
            let note = match (row.prefactor, row.flat) {
                (Some(p), Some(f)) => {
                    pass &= f;
                    format!("{p}, flat {}", if f { "yes" } else { "NO" })
                }
                _ => String::new(),
            };
            if csv {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    row.name,
                    row.at_zero,
                    coeffs.join(","),
                    row.prefactor.unwrap_or(""),
                    row.flat.map_or(String::new(), |f| f.to_string())
                );
            } else {
                let _ = writeln!(
                    out,
                    "{:<10} {:>10} {:>22} {:>22} {:>22} {:>22}  {note}",
                    row.name,
                    match row.at_zero {
                        crate::ExtReal::Finite(v) => format!("{v:.6}"),
                        crate::ExtReal::Infinite => "inf".into(),
                    },
                    coeffs[0],
                    coeffs[1],
                    coeffs[2],
                    coeffs[3]
                );
            }
        }
    } else {
        let rows = order_gap_table(&TABLE2_ORDERS, a.degree).map_err(CliError::failed)?;
        if csv {
            out.push_str("n,leading_degree,coefficient,fitted_slope,sign\n");
        } else {
            let _ = writeln!(
                out,
                "{:>4} {:>8} {:>24} {:>12} {:>5}",
                "n", "degree", "coefficient", "slope", "sign"
            );
        }
        for r in rows {
            let coeff = r.coeff.map_or(String::new(), |c| format!("{c:.15e}"));
            let slope = r
                .slope
                .as_ref()
                .map_or(String::new(), |s| format!("{:.4}", s.slope));
            let sign = match (r.coeff, &r.slope) {
                (Some(c), _) => c.signum(),
                (None, Some(s)) => s.sign,
                _ => f64::NAN,
            };
            pass &= r.degree == r.n as usize && sign < 0.0;
            let sign = if sign < 0.0 { "-" } else { "+" };
            if csv {
                let _ = writeln!(out, "{},{},{coeff},{slope},{sign}", r.n, r.degree);
            } else {
                let _ = writeln!(
                    out,
                    "{:>4} {:>8} {coeff:>24} {slope:>12} {sign:>5}",
                    r.n, r.degree
                );
            }
        }
    }
    emit(a.output.as_deref(), &out)?;
    Ok(if pass { EXIT_OK } else { EXIT_FAILED })
}

fn verify(a: &VerifyArgs, exec: Execution) -> Result<i32, CliError> {
    if a.samples == 0 {
        return Err(CliError::usage("--samples must be positive"));
    }
    let checks = verification_suite(a.seed, a.samples, exec);
    let data = match a.format {
        Format::Json => serde_json::to_string_pretty(&checks).expect("checks serialise") + "\n",
        Format::Text | Format::Csv => {
            let mut out = String::new();
            for c in &checks {
                let _ = writeln!(
                    out,
                    "[{}] {}: {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            out
        }
    };
    emit(a.output.as_deref(), &data)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed == 0 {
        Ok(EXIT_OK)
    } else {
        eprintln!("verify: {failed} of {} checks failed", checks.len());
        Ok(EXIT_FAILED)
    }
}
