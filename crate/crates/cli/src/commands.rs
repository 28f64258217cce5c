use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use gradmesh::error_analysis::{
    convergence_sweep, equidistribution_stats, h1_error, ring_stats_csv, uniform_sweep,
    ConvergenceTable,
};
use gradmesh::grading::verify::{
    bdd_ledger_check, distance_monotonicity_violations, verify_first_loop, verify_marked_bound,
    verify_size_lemma, verify_size_lemma_scaled, FirstLoopReport, SizeLemmaReport,
};
use gradmesh::grading::{grade, ComplexityLedger, GradingParams, GradingRun};
use gradmesh::mesh::io::{read_text, to_text, write_vtk};
use gradmesh::mesh::Mesh;
use gradmesh::singular::{
    bound_check, check_constraints, kellogg_residual, kellogg_solve, misaligned_kinks,
    AngularConfig, Cutoff, KelloggSolution, SingularTermConfig,
};
use serde::Serialize;

use crate::config::{Experiment, Verifiers};
use crate::{CliError, ExportFormat};

#[derive(Clone, Debug, Serialize)]
struct Check {
    name: &'static str,
    enabled: bool,
    passed: bool,
    detail: String,
}

impl Check {
    fn new(name: &'static str, enabled: bool, passed: bool, detail: String) -> Self {
        Self {
            name,
            enabled,
            passed,
            detail,
        }
    }

    fn failed(&self) -> bool {
        self.enabled && !self.passed
    }
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        let tag = match (c.enabled, c.passed) {
            (false, _) => "skip",
            (true, true) => "pass",
            (true, false) => "FAIL",
        };
        println!("[{tag}] {}: {}", c.name, c.detail);
    }
}

/// True when every enabled check passed; otherwise names the report.
fn conclude(checks: &[Check], report: &Path) -> bool {
    let failed: Vec<&str> = checks.iter().filter(|c| c.failed()).map(|c| c.name).collect();
    if failed.is_empty() {
        true
    } else {
        eprintln!(
            "verification failed ({}); see {}",
            failed.join(", "),
            report.display()
        );
        false
    }
}

fn output_dir(exp: &Experiment) -> Result<PathBuf, CliError> {
    let dir = exp.output_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write_file(dir: &Path, name: &str, data: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, data).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).context("serializing report")?;
    text.push('\n');
    write_file(dir, name, text)
}

fn vtk_bytes(mesh: &Mesh) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    write_vtk(mesh, &mut out)?;
    Ok(out)
}

fn warn_misaligned_kinks(exp: &Experiment) {
    for (i, term) in exp.problem.terms.iter().enumerate() {
        let bad = misaligned_kinks(term, &exp.mesh);
        if !bad.is_empty() {
            let angles: Vec<String> = bad.iter().map(|a| format!("{a:.6}")).collect();
            eprintln!(
                "warning: singular term {i} has kinks at angles [{}] that do not follow initial mesh edges",
                angles.join(", ")
            );
        }
    }
}

fn params_for(exp: &Experiment, delta: f64) -> Result<GradingParams, CliError> {
    let cfg = &exp.config;
    Ok(GradingParams::from_terms(delta, cfg.p, &exp.problem.terms, cfg.sharp)?)
}

fn first_loop_check(enabled: bool, f: Option<&FirstLoopReport>) -> Check {
    match f {
        Some(f) => Check::new(
            "first_loop",
            enabled,
            f.passed(),
            format!(
                "{} rounds (bound {:.3}), {} marks (bound {:.1}), largest area {:.4e} (limit {:.4e})",
                f.rounds, f.rounds_bound, f.total_marks, f.marks_bound, f.max_area, f.area_limit
            ),
        ),
        None => Check::new("first_loop", false, false, "no ledger available".into()),
    }
}

fn grading_checks(
    verifiers: Verifiers,
    first_loop: Option<&FirstLoopReport>,
    size: &SizeLemmaReport,
    mesh: &Mesh,
    params: &GradingParams,
) -> Vec<Check> {
    let control = verify_size_lemma_scaled(mesh, params, 1.1);
    let monotone = distance_monotonicity_violations(mesh, &params.singular_points);
    vec![
        first_loop_check(verifiers.first_loop, first_loop),
        Check::new(
            "size_lemma",
            verifiers.size_lemma,
            size.passed(),
            format!(
                "{} violations over {} leaves and {} levels",
                size.violations.len(),
                size.leaves_checked,
                size.levels + 1
            ),
        ),
        Check::new(
            "conformity",
            verifiers.conformity,
            mesh.is_conforming(),
            format!("{} leaves", mesh.leaf_count()),
        ),
        Check::new(
            "distance_monotonicity",
            verifiers.distance_monotonicity,
            monotone.is_empty(),
            format!("{} parent/child pairs out of order", monotone.len()),
        ),
        Check::new(
            "negative_control",
            verifiers.negative_control,
            !control.violations.is_empty(),
            format!(
                "{} violations with the exponent scaled by 1.1",
                control.violations.len()
            ),
        ),
    ]
}

#[derive(Serialize)]
struct GradeSummary {
    delta: f64,
    p: u32,
    gamma: f64,
    k: u32,
    initial_leaves: usize,
    final_leaves: usize,
    total_marks: usize,
    max_marked_constant: f64,
    total_constant: f64,
    bdd_ratio: f64,
    checks: Vec<Check>,
}

struct Graded {
    mesh: Mesh,
    run: GradingRun,
    size: SizeLemmaReport,
    summary: GradeSummary,
}

fn run_grading(exp: &Experiment) -> Result<Graded, CliError> {
    let delta = exp.single_delta()?;
    let params = params_for(exp, delta)?;
    warn_misaligned_kinks(exp);
    let mut mesh = exp.mesh.clone();
    let run = grade(&mut mesh, &params)?;
    let size = verify_size_lemma(&mesh, &params);
    let marked = verify_marked_bound(&run.ledger, &params);
    let checks = grading_checks(exp.config.verifiers, Some(&run.first_loop), &size, &mesh, &params);
    println!(
        "delta {delta}, p {}, gamma {:.6}, K {}: {} -> {} leaves, {} marks",
        params.p,
        params.gamma,
        params.k,
        run.ledger.initial_leaves,
        mesh.leaf_count(),
        run.ledger.total_marks()
    );
    let summary = GradeSummary {
        delta,
        p: params.p,
        gamma: params.gamma,
        k: params.k,
        initial_leaves: run.ledger.initial_leaves,
        final_leaves: mesh.leaf_count(),
        total_marks: run.ledger.total_marks(),
        max_marked_constant: marked.max_constant,
        total_constant: marked.total_constant,
        bdd_ratio: bdd_ledger_check(&run.ledger).ratio,
        checks,
    };
    Ok(Graded {
        mesh,
        run,
        size,
        summary,
    })
}

/// Grades the configured mesh for one `δ` and writes the mesh, the
/// ledger and the size-lemma report.
pub fn grade_cmd(exp: &Experiment) -> Result<bool, CliError> {
    let g = run_grading(exp)?;
    let dir = output_dir(exp)?;
    write_file(&dir, "mesh.txt", to_text(&g.mesh))?;
    write_file(&dir, "mesh.vtk", vtk_bytes(&g.mesh)?)?;
    write_file(&dir, "ledger.csv", g.run.ledger.to_csv())?;
    let report = write_file(&dir, "size_lemma.csv", g.size.to_csv())?;
    write_json(&dir, "summary.json", &g.summary)?;
    print_checks(&g.summary.checks);
    println!("wrote mesh.txt, mesh.vtk, ledger.csv, size_lemma.csv, summary.json to {}", dir.display());
    Ok(conclude(&g.summary.checks, &report))
}

#[derive(Serialize)]
struct TermBounds {
    term: usize,
    gamma_bar: f64,
    value_constant: f64,
    grad_constant: f64,
    within_rule: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    mesh: PathBuf,
    ledger: Option<PathBuf>,
    delta: f64,
    p: u32,
    gamma: f64,
    k: u32,
    leaves: usize,
    max_marked_constant: Option<f64>,
    total_constant: Option<f64>,
    bdd_ratio: Option<f64>,
    marked_constants: Vec<(u32, f64)>,
    term_bounds: Vec<TermBounds>,
    checks: Vec<Check>,
}

fn load_mesh(path: &Path) -> Result<Mesh, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    read_text(std::io::BufReader::new(file))
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Re-runs the verifiers on a saved mesh, and on its ledger when one is
/// available, for the `δ` and terms of the config.
pub fn verify_cmd(
    exp: &Experiment,
    mesh_path: Option<&Path>,
    ledger_path: Option<&Path>,
) -> Result<bool, CliError> {
    let delta = exp.single_delta()?;
    let params = params_for(exp, delta)?;
    let dir = exp.output_dir();
    let mesh_path = mesh_path.map_or_else(|| dir.join("mesh.txt"), Path::to_path_buf);
    if !mesh_path.is_file() {
        return Err(CliError::Usage(format!(
            "no saved mesh at {}; run `gradmesh grade` first or pass --mesh",
            mesh_path.display()
        )));
    }
    let mesh = load_mesh(&mesh_path)?;
    params.validate_for(&mesh)?;
    // A ledger next to the mesh is picked up unless one is given.
    let ledger_path = match ledger_path {
        Some(p) => Some(p.to_path_buf()),
        None => Some(mesh_path.with_file_name("ledger.csv")).filter(|p| p.is_file()),
    };
    let ledger = match &ledger_path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", p.display())))?;
            Some(
                ComplexityLedger::from_csv(&text)
                    .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
            )
        }
        None => None,
    };

    // Later refinement only shrinks leaves, so the final mesh still has to
    // meet the first loop's area limit.
    let max_area = mesh.leaves().map(|t| mesh.area(t)).fold(0.0, f64::max);
    let first = ledger.as_ref().map(|l| {
        verify_first_loop(&l.rows, &params, mesh.domain_area(), mesh.max_initial_area(), max_area)
    });
    let size = verify_size_lemma(&mesh, &params);
    let mut checks = grading_checks(exp.config.verifiers, first.as_ref(), &size, &mesh, &params);
    if let Some(l) = &ledger {
        let broken = l.identity_violations().len();
        let matches = l.final_leaves() == mesh.leaf_count() && l.initial_leaves == mesh.initial_count();
        checks.push(Check::new(
            "ledger",
            true,
            broken == 0 && matches,
            format!(
                "{broken} rows break the cardinality identity; ledger ends at {} leaves, mesh has {}",
                l.final_leaves(),
                mesh.leaf_count()
            ),
        ));
    }
    let term_bounds: Vec<TermBounds> = exp
        .problem
        .terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let b = bound_check(t, params.gamma, 32);
            TermBounds {
                term: i,
                gamma_bar: params.gamma,
                value_constant: b.value_constant,
                grad_constant: b.grad_constant,
                within_rule: b.within_rule,
            }
        })
        .collect();
    checks.push(Check::new(
        "decay_bounds",
        true,
        term_bounds.iter().all(|b| b.within_rule && b.grad_constant.is_finite()),
        format!("{} terms sampled against gamma {:.6}", term_bounds.len(), params.gamma),
    ));

    let marked = ledger.as_ref().map(|l| verify_marked_bound(l, &params));
    let report = VerifyReport {
        mesh: mesh_path,
        ledger: ledger_path,
        delta,
        p: params.p,
        gamma: params.gamma,
        k: params.k,
        leaves: mesh.leaf_count(),
        max_marked_constant: marked.as_ref().map(|m| m.max_constant),
        total_constant: marked.as_ref().map(|m| m.total_constant),
        bdd_ratio: ledger.as_ref().map(|l| bdd_ledger_check(l).ratio),
        marked_constants: marked.map(|m| m.constants).unwrap_or_default(),
        term_bounds,
        checks,
    };
    let dir = output_dir(exp)?;
    write_file(&dir, "verify_size_lemma.csv", size.to_csv())?;
    let path = write_json(&dir, "verify.json", &report)?;
    print_checks(&report.checks);
    println!("wrote verify_size_lemma.csv, verify.json to {}", dir.display());
    Ok(conclude(&report.checks, &path))
}

const GRADING_HEADER: &str = "delta,k,leaves,cardinality,first_loop_passed,size_lemma_violations,control_violations,max_marked_constant,total_constant,bdd_ratio,conforming,flagged_elements,spread";

fn grading_csv(table: &ConvergenceTable) -> String {
    let mut s = format!("{GRADING_HEADER}\n");
    for r in &table.rows {
        let Some(g) = &r.grading else { continue };
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{:.6e},{:.6e},{:.6},{},{},{:.6e}\n",
            r.delta,
            r.k,
            r.leaves,
            r.cardinality,
            g.first_loop_passed,
            g.size_lemma_violations,
            g.control_violations,
            g.max_marked_constant,
            g.total_constant,
            g.bdd_ratio,
            g.conforming,
            r.flagged_elements,
            r.spread
        ));
    }
    s
}

#[derive(Serialize)]
struct ConvergeSummary {
    p: u32,
    deltas: Vec<f64>,
    slope: Option<f64>,
    slope_threshold: f64,
    uniform_slope: Option<f64>,
    checks: Vec<Check>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Runs the graded sweep, fits the error slope and checks it against the
/// configured threshold.
pub fn converge_cmd(exp: &Experiment) -> Result<bool, CliError> {
    let deltas = exp.sweep()?;
    let cfg = &exp.config;
    let opts = exp.error_options();
    warn_misaligned_kinks(exp);
    let table = convergence_sweep(&exp.mesh, &exp.problem, cfg.p, &deltas, cfg.sharp, &opts)?;
    let threshold = exp.slope_threshold();
    let v = cfg.verifiers;
    let rows: Vec<_> = table.rows.iter().filter_map(|r| r.grading.as_ref()).collect();
    let count = |f: &dyn Fn(&&gradmesh::error_analysis::GradingSummary) -> bool| {
        rows.iter().filter(|g| f(g)).count()
    };
    let mut checks = vec![
        Check::new(
            "slope",
            true,
            table.slope <= threshold,
            format!("fitted slope {:.4} against threshold {threshold}", table.slope),
        ),
        Check::new(
            "first_loop",
            v.first_loop,
            count(&|g| !g.first_loop_passed) == 0,
            format!("{} sweep entries over their bound", count(&|g| !g.first_loop_passed)),
        ),
        Check::new(
            "size_lemma",
            v.size_lemma,
            count(&|g| g.size_lemma_violations > 0) == 0,
            format!(
                "{} violations in total",
                rows.iter().map(|g| g.size_lemma_violations).sum::<usize>()
            ),
        ),
        Check::new(
            "conformity",
            v.conformity,
            count(&|g| !g.conforming) == 0,
            format!("{} non-conforming meshes", count(&|g| !g.conforming)),
        ),
        Check::new(
            "negative_control",
            v.negative_control,
            count(&|g| g.control_violations == 0) == 0,
            format!("{} sweep entries where the control found nothing", count(&|g| g.control_violations == 0)),
        ),
    ];

    // Ring statistics of the finest graded mesh.
    let finest = *deltas.last().expect("sweep is non-empty");
    let params = params_for(exp, finest)?;
    let mut mesh = exp.mesh.clone();
    grade(&mut mesh, &params)?;
    let report = h1_error(&mesh, cfg.p, &exp.problem, &opts)?;
    let rings = equidistribution_stats(&report, params.k, params.d);

    let dir = output_dir(exp)?;
    let path = write_file(&dir, "convergence.csv", table.to_csv())?;
    write_file(&dir, "grading.csv", grading_csv(&table))?;
    write_file(&dir, "rings.csv", ring_stats_csv(&rings))?;
    let mut uniform_slope = None;
    if cfg.compare_uniform {
        let uniform = uniform_sweep(&exp.mesh, &exp.problem, cfg.p, &deltas, &opts)?;
        write_file(&dir, "uniform.csv", uniform.to_csv())?;
        uniform_slope = finite(uniform.slope);
        checks.push(Check::new(
            "uniform_slower",
            true,
            uniform.slope > table.slope,
            format!("uniform slope {:.4} against graded {:.4}", uniform.slope, table.slope),
        ));
    }
    let summary = ConvergeSummary {
        p: cfg.p,
        deltas,
        slope: finite(table.slope),
        slope_threshold: threshold,
        uniform_slope,
        checks,
    };
    write_json(&dir, "summary.json", &summary)?;
    print!("{}", table.to_csv());
    print_checks(&summary.checks);
    println!("wrote results to {}", dir.display());
    Ok(conclude(&summary.checks, &path))
}

#[derive(Serialize)]
struct KelloggOutput {
    solution: KelloggSolution,
    residuals: [f64; 3],
    term: SingularTermConfig,
}

/// Solves for the checkerboard coefficients and prints a term block that
/// can be pasted into a config.
pub fn kellogg_cmd(gamma: f64) -> Result<bool, CliError> {
    let solution = kellogg_solve(gamma)?;
    check_constraints(&solution)?;
    let out = KelloggOutput {
        solution,
        residuals: kellogg_residual(gamma, [solution.r, solution.rho, solution.sigma]),
        term: SingularTermConfig {
            center: [0.0, 0.0],
            c: 1.0,
            k: 0,
            gamma: Some(gamma),
            angular: AngularConfig::Kellogg,
            cutoff: Cutoff::One,
            reference_angle: 0.0,
        },
    };
    println!("{}", serde_json::to_string_pretty(&out).context("serializing solution")?);
    Ok(true)
}

pub fn export_cmd(mesh_path: &Path, format: ExportFormat, output: Option<&Path>) -> Result<bool, CliError> {
    let mesh = load_mesh(mesh_path)?;
    let bytes = match format {
        ExportFormat::Text => to_text(&mesh).into_bytes(),
        ExportFormat::Vtk => vtk_bytes(&mesh)?,
    };
    match output {
        Some(path) => {
            fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            std::io::stdout().write_all(&bytes).context("writing to stdout")?;
        }
    }
    Ok(true)
}
