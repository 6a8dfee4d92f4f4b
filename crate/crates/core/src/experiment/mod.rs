//! Configuration-driven sweeps over wavenumber, degree and mesh size with
//! CSV output.

mod config;
mod presets;

use std::time::Instant;

use rayon::prelude::*;

use crate::analysis::{fit_rate, ErrorReport};
use crate::assembly::{LsWeights, SolveStrategy};
use crate::error::{Error, Result};
use crate::mesh::{geometric_refine, n_lambda, uniform_interval_mesh, DomainId, Mesh};
use crate::methods::{
    approx_error, flux_for, infsup_constant, solve_fem, solve_least_squares, solve_nodally_exact_1d, solve_pwdg,
    ExactSolution, ProblemSpec, SolverOptions,
};
use crate::spaces::{h1_space, pum_space, trefftz_space};
use crate::C64;

pub use config::{ConfigError, ExactKind, ExperimentConfig, MeshSweep, Method};
pub use presets::{list_presets, preset, Preset, PRESETS};

/// Exact CSV header.
pub const CSV_HEADER: &str = "method,domain,k,h,p,L,sigma,dofs,n_lambda,err_h1semi_rel,err_l2_rel,err_1k_rel,err_dg,j_value,nodal_max,gamma_n,solve_residual,wall_ms";

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "HELMHOLTZ_THREADS";

/// One run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub k: f64,
    pub p: usize,
    pub layers: usize,
    /// Target mesh size, or elements per unit length for [`MeshSweep::Elements`].
    pub mesh_param: MeshParam,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshParam {
    H(f64),
    Elements(usize),
}

/// Result row; `failure` is set when the run did not produce a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub method: Method,
    pub domain: DomainId,
    pub k: f64,
    pub h: f64,
    pub p: usize,
    pub layers: usize,
    pub sigma: Option<f64>,
    pub report: ErrorReport,
    pub wall_ms: Option<f64>,
    pub note: Option<String>,
    pub failure: Option<String>,
}

/// All rows of a sweep in expansion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub rows: Vec<Row>,
}

impl Outcome {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failure.is_some()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER.split(',')).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.csv_fields()).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("fields are UTF-8")
    }

    /// Slopes of the primary metric along each series of the sweep.
    pub fn slopes(&self) -> Vec<SeriesSlope> {
        series_slopes(&self.rows)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl Row {
    /// Field values in [`CSV_HEADER`] order.
    pub fn csv_fields(&self) -> Vec<String> {
        let r = &self.report;
        let failed = self.failure.is_some();
        let metric = |v: Option<f64>| if failed { String::new() } else { opt(v) };
        let mut f = vec![
            self.method.name().to_string(),
            self.domain.to_string(),
            self.k.to_string(),
            if self.h > 0.0 {
                format!("{:e}", self.h)
            } else {
                String::new()
            },
            self.p.to_string(),
            self.layers.to_string(),
            self.sigma.map(|v| v.to_string()).unwrap_or_default(),
            if r.dofs == 0 { String::new() } else { r.dofs.to_string() },
            if r.n_lambda > 0.0 {
                format!("{:e}", r.n_lambda)
            } else {
                String::new()
            },
        ];
        f.extend(
            [
                r.h1_semi_rel,
                r.l2_rel,
                r.norm_1k_rel,
                r.dg_norm,
                r.j_value,
                r.nodal_max,
                r.gamma_n,
            ]
            .map(metric),
        );
        f.push(if failed {
            "error".to_string()
        } else {
            opt(r.solve_residual)
        });
        f.push(opt(self.wall_ms));
        f
    }
}

/// Fitted slope of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSlope {
    pub label: String,
    pub axis: &'static str,
    pub slope: f64,
    pub r2: f64,
}

/// Groups `(key, point)` pairs by key, in order of first appearance.
fn group<K: PartialEq>(items: impl Iterator<Item = (K, (f64, f64))>) -> Vec<(K, Vec<(f64, f64)>)> {
    let mut out: Vec<(K, Vec<(f64, f64)>)> = Vec::new();
    for (key, pt) in items {
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push(pt),
            None => out.push((key, vec![pt])),
        }
    }
    out
}

fn series_slopes(rows: &[Row]) -> Vec<SeriesSlope> {
    let ok: Vec<&Row> = rows.iter().filter(|r| r.failure.is_none()).collect();
    let mut out = Vec::new();
    if ok.iter().any(|r| r.method == Method::Infsup) {
        let groups = group(
            ok.iter()
                .filter_map(|r| r.report.gamma_n.map(|g| ((r.p, r.layers), (r.k, g)))),
        );
        for ((p, _), pts) in groups {
            if let Ok(f) = fit_rate(&pts) {
                out.push(SeriesSlope {
                    label: format!("infsup p={p}"),
                    axis: "k",
                    slope: f.slope,
                    r2: f.r2,
                });
            }
        }
        return out;
    }
    let measured: Vec<(&Row, f64)> = ok
        .iter()
        .filter_map(|r| r.report.h1_semi_rel.or(r.report.dg_norm).map(|m| (*r, m)))
        .collect();
    let name = ok.first().map(|r| r.method.name()).unwrap_or("");
    for ((k, p, l), pts) in group(
        measured
            .iter()
            .map(|(r, m)| ((r.k, r.p, r.layers), (r.report.n_lambda, *m))),
    ) {
        if let Ok(f) = fit_rate(&pts) {
            let label = format!("{name} k={k} p={p} L={l}");
            out.push(SeriesSlope {
                label,
                axis: "n_lambda",
                slope: f.slope,
                r2: f.r2,
            });
        }
    }
    if out.is_empty() {
        for ((k, h, l), pts) in group(measured.iter().map(|(r, m)| ((r.k, r.h, r.layers), (r.p as f64, *m)))) {
            if let Ok(f) = fit_rate(&pts) {
                let label = format!("{name} k={k} h={h:.4} L={l}");
                out.push(SeriesSlope {
                    label,
                    axis: "p",
                    slope: f.slope,
                    r2: f.r2,
                });
            }
        }
    }
    out
}

impl ExperimentConfig {
    /// Runs in deterministic order: `k`, then `L`, then `p`, then the mesh sweep.
    pub fn jobs(&self) -> Vec<Job> {
        let mut out = Vec::new();
        for &k in &self.k {
            for &layers in &self.layers {
                for &p in &self.p {
                    let params: Vec<MeshParam> = match &self.mesh {
                        MeshSweep::H(hs) => hs.iter().map(|&h| MeshParam::H(h)).collect(),
                        MeshSweep::Elements(ns) => ns.iter().map(|&n| MeshParam::Elements(n)).collect(),
                        MeshSweep::KhOverP(rs) => rs.iter().map(|&r| MeshParam::H(r * p as f64 / k)).collect(),
                    };
                    for mesh_param in params {
                        out.push(Job {
                            k,
                            p,
                            layers,
                            mesh_param,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn problem(&self, k: f64) -> ProblemSpec {
        let exact = match self.exact {
            ExactKind::Model1d => Some(ExactSolution::Model1d { k }),
            ExactKind::Pw2d => Some(ExactSolution::pw2d(k)),
            ExactKind::BesselSingular => Some(ExactSolution::BesselSingular { k }),
            ExactKind::None => None,
        };
        ProblemSpec {
            domain: self.domain,
            k,
            source: C64::new(self.source, 0.0),
            exact,
            robin_sign: self.robin_sign,
            neumann_at_reentrant: self.neumann_reentrant,
        }
    }

    fn mesh_for(&self, problem: &ProblemSpec, job: &Job) -> Result<Mesh> {
        let grading = (job.layers > 0).then_some((self.sigma, job.layers));
        match job.mesh_param {
            MeshParam::H(h) => problem.mesh(h, grading),
            MeshParam::Elements(n) => {
                if problem.dim() == 1 {
                    let m = uniform_interval_mesh(n)?;
                    match grading {
                        Some((s, l)) => geometric_refine(&m, &[[0.0, 0.0]], s, l),
                        None => Ok(m),
                    }
                } else {
                    problem.mesh(1.0 / n as f64, grading)
                }
            }
        }
    }

    fn options(&self) -> SolverOptions {
        SolverOptions {
            strategy: self.strategy,
            quad_degree: self.quad_degree,
            keep_system: false,
        }
    }

    /// Execute one job.
    pub fn run_job(&self, job: &Job) -> Row {
        let start = Instant::now();
        let mut row = Row {
            method: self.method,
            domain: self.domain,
            k: job.k,
            h: 0.0,
            p: job.p,
            layers: job.layers,
            sigma: (job.layers > 0).then_some(self.sigma),
            report: ErrorReport::default(),
            wall_ms: None,
            note: None,
            failure: None,
        };
        match self.execute(job) {
            Ok((report, note)) => {
                row.h = report.h;
                row.p = report.p;
                row.report = report;
                row.note = note;
            }
            Err(e) => row.failure = Some(e.to_string()),
        }
        if self.timing {
            row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        }
        row
    }

    fn execute(&self, job: &Job) -> Result<(ErrorReport, Option<String>)> {
        let problem = self.problem(job.k);
        let k = job.k;
        let options = self.options();
        match self.method {
            Method::NodalExact => {
                let MeshParam::Elements(n) = job.mesh_param else {
                    return Err(Error::Unsupported("the nodally exact method takes `n_elements`".into()));
                };
                Ok((solve_nodally_exact_1d(&problem, n, &options)?.report, None))
            }
            Method::Fem => {
                let mesh = self.mesh_for(&problem, job)?;
                let space = h1_space(mesh, job.p)?;
                Ok((solve_fem(&problem, &space, &options)?.report, None))
            }
            Method::Pum => {
                let mesh = self.mesh_for(&problem, job)?;
                let space = pum_space(mesh, self.basis.basis(job.p, k)?)?;
                Ok((solve_fem(&problem, &space, &options)?.report, None))
            }
            Method::LeastSquares => {
                let mesh = self.mesh_for(&problem, job)?;
                let mut weights = LsWeights::standard(&mesh, k);
                if let Some(w) = self.w1 {
                    weights.w1.iter_mut().for_each(|x| *x = w);
                }
                if let Some(w) = self.w2 {
                    weights.w2.iter_mut().for_each(|x| *x = w);
                }
                let space = trefftz_space(mesh, self.basis.basis(job.p, k)?)?;
                Ok((
                    solve_least_squares(&problem, &space, Some(&weights), &options)?.report,
                    None,
                ))
            }
            Method::Pwdg => {
                let mesh = self.mesh_for(&problem, job)?;
                let space = trefftz_space(mesh, self.basis.basis(job.p, k)?)?;
                let flux = flux_for(self.flux, &space, k);
                Ok((solve_pwdg(&problem, &space, &flux, &options)?.report, None))
            }
            Method::Infsup => {
                let mesh = self.mesh_for(&problem, job)?;
                let space = h1_space(mesh, job.p)?;
                let gamma = infsup_constant(&problem, &space)?;
                let dofs = space.clone().eliminate_dirichlet()?.n_dofs;
                let report = ErrorReport {
                    method: "infsup".into(),
                    k,
                    h: space.mesh.h,
                    p: job.p,
                    dofs,
                    n_lambda: n_lambda(dofs, k, space.mesh.dim),
                    gamma_n: Some(gamma),
                    ..ErrorReport::default()
                };
                Ok((report, None))
            }
            Method::Approx => {
                let mesh = self.mesh_for(&problem, job)?;
                let space = trefftz_space(mesh, self.basis.basis(job.p, k)?)?;
                let target = problem
                    .exact
                    .clone()
                    .ok_or_else(|| Error::Unsupported("no target".into()))?;
                let cutoff = match self.strategy {
                    SolveStrategy::TruncatedSvd { cutoff } => cutoff,
                    _ => SolveStrategy::DEFAULT_CUTOFF,
                };
                let a = approx_error(&target, &space, k, cutoff)?;
                let report = ErrorReport {
                    method: "approx".into(),
                    k,
                    h: a.h,
                    p: a.p,
                    dofs: a.dofs,
                    n_lambda: n_lambda(a.dofs, k, 2),
                    h1_semi_rel: Some(a.h1_semi_rel),
                    l2_rel: Some(a.l2_rel),
                    norm_1k_rel: Some(a.norm_1k_rel),
                    solve_residual: Some(a.residual),
                    ..ErrorReport::default()
                };
                let note = (!a.reliable).then(|| format!("k={k} p={} h={:e}: projection unreliable", a.p, a.h));
                Ok((report, note))
            }
        }
    }

    /// Worker count: environment, then config, then available cores.
    pub fn worker_count(&self) -> usize {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .or(self.threads)
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
    }

    /// Run every job on a worker pool; rows come back in job order.
    pub fn run(&self) -> Result<Outcome> {
        faer::set_global_parallelism(faer::Par::Seq);
        let jobs = self.jobs();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.worker_count())
            .build()
            .map_err(|e| Error::Unsupported(format!("cannot start worker pool: {e}")))?;
        let rows = pool.install(|| jobs.par_iter().map(|j| self.run_job(j)).collect());
        Ok(Outcome { rows })
    }
}

/// Text dump of the built-in mesh of `domain`, optionally graded.
pub fn mesh_dump(domain: DomainId, h: f64, grading: Option<(f64, usize)>) -> Result<String> {
    let problem = ProblemSpec::homogeneous(domain, 1.0, 1.0);
    let problem = ProblemSpec {
        neumann_at_reentrant: domain == DomainId::LShape,
        ..problem
    };
    Ok(crate::mesh::write_mesh(&problem.mesh(h, grading)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_has_the_documented_columns() {
        assert_eq!(CSV_HEADER.split(',').count(), 18);
        let c = ExperimentConfig::parse("preset = nodal_exact_1d\nn_elements = 20\n").unwrap();
        let out = c.run().unwrap();
        let csv = out.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 18);
        assert_eq!(row[0], "nodal_exact");
        assert!(row[14].parse::<f64>().unwrap() < 1e-8);
        assert_eq!(row[17], "");
    }

    #[test]
    fn jobs_follow_list_order() {
        let c = ExperimentConfig::parse("method = infsup\ndomain = interval\nk = 8,4\np = 1,2\nkh_over_p = 0.25\n")
            .unwrap();
        let jobs = c.jobs();
        assert_eq!(jobs.len(), 4);
        assert_eq!(jobs[0].k, 8.0);
        assert_eq!(jobs[1].p, 2);
        assert_eq!(jobs[1].mesh_param, MeshParam::H(0.25 * 2.0 / 8.0));
    }

    #[test]
    fn failures_keep_their_row() {
        // kh >= pi makes the nodally exact basis undefined
        let c = ExperimentConfig::parse("method = nodal_exact\ndomain = interval\nk = 100\nn_elements = 10\n").unwrap();
        let out = c.run().unwrap();
        assert_eq!(out.failures(), 1);
        let fields = out.rows[0].csv_fields();
        assert_eq!(fields.len(), 18);
        assert_eq!(fields[16], "error");
        assert!(out.to_csv().lines().nth(1).unwrap().contains(",error,"));
    }

    #[test]
    fn presets_parse() {
        for p in PRESETS {
            let c = ExperimentConfig::parse(&format!("preset = {}\n", p.name)).unwrap();
            assert!(!c.jobs().is_empty(), "{}", p.name);
        }
        assert!(list_presets().contains("lshape_singular"));
    }
}
