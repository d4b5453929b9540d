//! A fully resolved invocation. Jobs are what manifests store, so running
//! one twice writes the same bytes.

use std::path::Path;

use anyhow::Context;
use minvset::correspondence::{
    detect_affine_ifs, family_operator, one_point_sets, operator_from_affine_ifs, phi, psi,
};
use minvset::dynamics::{convergence_study, existence_check, minimal_invariant_set};
use minvset::julia::{cross_validate_m1, is_nonexceptional, rational_from_operator};
use minvset::{
    AffineMap, Complex64, ComplexPoly, DiffOperator, ExistenceReport, IterationConfig,
    IterationStatus, Mode, OnePointReport, SpherePoint,
};
use serde::{Deserialize, Serialize};

use crate::output::{to_json, write_csv, write_json, write_png};
use crate::spec::{BiPolySpec, Coef, OperatorSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Job {
    Classify {
        operator: OperatorSpec,
        n: usize,
    },
    Iterate {
        operator: OperatorSpec,
        n: usize,
        mode: Mode,
        config: IterationConfig,
        png: Option<[u32; 2]>,
    },
    Julia {
        operator: OperatorSpec,
        config: IterationConfig,
        png: Option<[u32; 2]>,
    },
    Converge {
        operator: OperatorSpec,
        degrees: Vec<usize>,
        config: IterationConfig,
        png: Option<[u32; 2]>,
    },
    Psi {
        operator: OperatorSpec,
        n: usize,
    },
    Phi {
        bipoly: BiPolySpec,
        k: usize,
    },
    OnePoint {
        operator: OperatorSpec,
        n: usize,
        tol: f64,
    },
    Family {
        m: usize,
        n: usize,
        q: Vec<Coef>,
    },
    IfsBuild {
        maps: Vec<[Coef; 2]>,
        scale: Coef,
    },
    IfsDetect {
        operator: OperatorSpec,
        n: usize,
        tol: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub rng_seed: Option<u64>,
    pub job: Job,
}

impl Manifest {
    pub fn new(job: Job) -> Self {
        let rng_seed = match &job {
            Job::Iterate { config, .. }
            | Job::Julia { config, .. }
            | Job::Converge { config, .. } => Some(config.rng_seed),
            _ => None,
        };
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng_seed,
            job,
        }
    }
}

/// What a run hands back to `main`: text for stdout and the exit code.
pub struct Outcome {
    pub stdout: Option<String>,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: Option<String>) -> Self {
        Outcome { stdout, code: 0 }
    }
}

pub fn status_code(s: IterationStatus) -> i32 {
    match s {
        IterationStatus::Converged => 0,
        IterationStatus::Unbounded => 2,
        IterationStatus::Empty => 3,
        IterationStatus::MaxIterReached => 4,
    }
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

#[derive(Serialize)]
struct ClassifyReport {
    name: Option<String>,
    order: Option<usize>,
    fuchs: i64,
    exactly_solvable: bool,
    nondegenerate: bool,
    n: usize,
    spectrum: Option<Vec<[f64; 2]>>,
    existence: Option<ExistenceReport>,
    fundamental_polygon: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct IterateReport {
    status: IterationStatus,
    steps: usize,
    points: usize,
    escaped_fraction: f64,
    r_max: f64,
    deltas: Vec<f64>,
}

#[derive(Serialize)]
struct RationalJson {
    num: Vec<[f64; 2]>,
    den: Vec<[f64; 2]>,
    cancelled: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct JuliaReport {
    rational: RationalJson,
    nonexceptional: bool,
    exceptional_points: Vec<String>,
    reason: String,
    boundary_case: bool,
    /// Present when R is exceptional: the finite exceptional points, each a
    /// candidate minimal set besides the Julia cloud.
    minimal_candidates: Option<Vec<[f64; 2]>>,
    julia_points: usize,
    julia_start: [f64; 2],
    repelling_start: bool,
    julia_rounds: usize,
    julia_converged: bool,
    engine_status: IterationStatus,
    engine_points: usize,
    hausdorff: f64,
    threshold: f64,
    passed: bool,
    report: String,
}

#[derive(Serialize)]
struct ConvergeRowJson {
    n: usize,
    sup_out: f64,
    coverage: f64,
    status: IterationStatus,
    steps: usize,
    points: usize,
}

#[derive(Serialize)]
struct ConvergeReport {
    polygon: Vec<[f64; 2]>,
    rows: Vec<ConvergeRowJson>,
    coverage_decreasing: bool,
    sup_out_decreasing: bool,
}

#[derive(Serialize)]
struct PsiReport {
    n: usize,
    psi: BiPolySpec,
}

#[derive(Serialize)]
struct OnePointJson {
    n: usize,
    report: OnePointReport,
}

#[derive(Serialize)]
struct IfsReport {
    n: usize,
    maps: Option<Vec<AffineMap>>,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn sphere(p: &SpherePoint) -> String {
    match p {
        SpherePoint::Infinity => "inf".into(),
        SpherePoint::Finite(z) => format!("{z}"),
    }
}

/// Runs the job. File outputs go to `out` when given; every file-writing
/// run also leaves `manifest.json` there.
pub fn run(job: &Job, out: Option<&Path>) -> anyhow::Result<Outcome> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_json(&dir.join("manifest.json"), &Manifest::new(job.clone()))?;
    }
    let file = |name: &str| out.map(|d| d.join(name));
    let emit = |name: &str, text: String| -> anyhow::Result<Outcome> {
        if let Some(p) = file(name) {
            std::fs::write(&p, &text).with_context(|| format!("writing {}", p.display()))?;
        }
        Ok(Outcome::ok(Some(text)))
    };

    match job {
        Job::Classify { operator, n } => {
            let t = operator.operator()?;
            let es = t.is_exactly_solvable()?;
            let report = ClassifyReport {
                name: operator.name.clone(),
                order: t.order(),
                fuchs: t.fuchs_index()?,
                exactly_solvable: es,
                nondegenerate: t.is_nondegenerate()?,
                n: *n,
                spectrum: t.symbol_eigenvalues(*n).ok().map(|s| pairs(&s.lambdas)),
                existence: if es {
                    existence_check(&t, *n).ok()
                } else {
                    None
                },
                fundamental_polygon: t.fundamental_polygon().ok().map(|p| pairs(&p.vertices)),
            };
            emit("classify.json", to_json(&report)?)
        }
        Job::Iterate {
            operator,
            n,
            mode,
            config,
            png,
        } => {
            let dir = out.expect("iterate writes files");
            let t = operator.operator()?;
            let run = minimal_invariant_set(&t, *n, *mode, config)?;
            write_csv(&dir.join("cloud.csv"), run.cloud.points())?;
            if let Some(size) = png {
                write_png(&dir.join("cloud.png"), run.cloud.points(), *size)?;
            }
            let report = IterateReport {
                status: run.status,
                steps: run.steps,
                points: run.cloud.len(),
                escaped_fraction: run.escaped_fraction,
                r_max: run.r_max,
                deltas: run.deltas.clone(),
            };
            write_json(&dir.join("report.json"), &report)?;
            Ok(Outcome {
                stdout: Some(format!(
                    "{:?} after {} steps, {} points\n",
                    run.status,
                    run.steps,
                    run.cloud.len()
                )),
                code: status_code(run.status),
            })
        }
        Job::Julia {
            operator,
            config,
            png,
        } => {
            let dir = out.expect("julia writes files");
            let t = operator.operator()?;
            let r = rational_from_operator(&t)?;
            let exc = is_nonexceptional(&r)?;
            let cv = cross_validate_m1(&t, config)?;
            write_csv(&dir.join("julia.csv"), cv.julia.cloud.points())?;
            write_csv(&dir.join("engine.csv"), cv.engine.points())?;
            if let Some(size) = png {
                write_png(&dir.join("julia.png"), cv.julia.cloud.points(), *size)?;
            }
            let finite_exceptional: Vec<Complex64> = exc
                .exceptional_points
                .iter()
                .filter_map(|p| match p {
                    SpherePoint::Finite(z) => Some(*z),
                    SpherePoint::Infinity => None,
                })
                .collect();
            let report = JuliaReport {
                rational: RationalJson {
                    num: pairs(r.num.coeffs()),
                    den: pairs(r.den.coeffs()),
                    cancelled: pairs(&r.cancelled),
                },
                nonexceptional: exc.nonexceptional,
                exceptional_points: exc.exceptional_points.iter().map(sphere).collect(),
                reason: exc.reason.clone(),
                boundary_case: exc.boundary_case,
                minimal_candidates: (!exc.nonexceptional).then(|| pairs(&finite_exceptional)),
                julia_points: cv.julia.cloud.len(),
                julia_start: [cv.julia.start.re, cv.julia.start.im],
                repelling_start: cv.julia.repelling_start,
                julia_rounds: cv.julia.rounds,
                julia_converged: cv.julia.converged,
                engine_status: cv.engine_status,
                engine_points: cv.engine.len(),
                hausdorff: cv.hausdorff,
                threshold: cv.threshold,
                passed: cv.passed,
                report: cv.report.clone(),
            };
            write_json(&dir.join("julia.json"), &report)?;
            Ok(Outcome::ok(Some(format!("{}\n", cv.report))))
        }
        Job::Converge {
            operator,
            degrees,
            config,
            png,
        } => {
            let dir = out.expect("converge writes files");
            let t = operator.operator()?;
            let polygon = t.fundamental_polygon()?;
            let rows = convergence_study(&t, degrees, config)?;
            let mut table = String::from("n,sup_out,coverage\n");
            for row in &rows {
                table.push_str(&format!(
                    "{},{:.16e},{:.16e}\n",
                    row.n, row.sup_out, row.coverage
                ));
                write_csv(
                    &dir.join(format!("cloud_n{}.csv", row.n)),
                    row.report.cloud.points(),
                )?;
                if let Some(size) = png {
                    write_png(
                        &dir.join(format!("cloud_n{}.png", row.n)),
                        row.report.cloud.points(),
                        *size,
                    )?;
                }
            }
            std::fs::write(dir.join("converge.csv"), &table)?;
            let coverage: Vec<f64> = rows.iter().map(|r| r.coverage).collect();
            let sup_out: Vec<f64> = rows.iter().map(|r| r.sup_out).collect();
            let report = ConvergeReport {
                polygon: pairs(&polygon.vertices),
                rows: rows
                    .iter()
                    .map(|r| ConvergeRowJson {
                        n: r.n,
                        sup_out: r.sup_out,
                        coverage: r.coverage,
                        status: r.report.status,
                        steps: r.report.steps,
                        points: r.report.cloud.len(),
                    })
                    .collect(),
                coverage_decreasing: strictly_decreasing(&coverage),
                sup_out_decreasing: strictly_decreasing(&sup_out),
            };
            write_json(&dir.join("converge.json"), &report)?;
            Ok(Outcome::ok(Some(table)))
        }
        Job::Psi { operator, n } => {
            let b = psi(&operator.operator()?, *n);
            emit(
                "psi.json",
                to_json(&PsiReport {
                    n: *n,
                    psi: BiPolySpec::from_bipoly(&b),
                })?,
            )
        }
        Job::Phi { bipoly, k } => {
            let t = phi(&bipoly.bipoly()?, *k)?;
            emit(
                "operator.json",
                to_json(&OperatorSpec::from_operator(&t, None))?,
            )
        }
        Job::OnePoint { operator, n, tol } => {
            let report = one_point_sets(&operator.operator()?, *n, *tol)?;
            emit("one_point.json", to_json(&OnePointJson { n: *n, report })?)
        }
        Job::Family { m, n, q } => {
            let q = ComplexPoly::new(q.iter().map(|c| c.value()).collect());
            let t = family_operator(*m, *n, &q)?;
            let name = format!("F_{{{m},{n}}}");
            emit(
                "operator.json",
                to_json(&OperatorSpec::from_operator(&t, Some(name)))?,
            )
        }
        Job::IfsBuild { maps, scale } => {
            let maps: Vec<AffineMap> = maps
                .iter()
                .map(|[a, b]| AffineMap::new(a.value(), b.value()))
                .collect();
            let t: DiffOperator = operator_from_affine_ifs(&maps, scale.value())?;
            emit(
                "operator.json",
                to_json(&OperatorSpec::from_operator(&t, None))?,
            )
        }
        Job::IfsDetect { operator, n, tol } => {
            let maps = detect_affine_ifs(&psi(&operator.operator()?, *n), *n, *tol);
            emit("ifs.json", to_json(&IfsReport { n: *n, maps })?)
        }
    }
}
