//! End-to-end solvers: conforming Galerkin FEM, Trefftz Least Squares and
//! plane-wave DG. Each returns the discrete solution with an [`ErrorReport`].

mod exact;
mod study;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{dg_errors, dg_norm, error_degree, ls_functional, nodal_max_error, volume_errors, ErrorReport};
use crate::assembly::{
    assemble_galerkin, assemble_least_squares, assemble_pwdg, effective_degree, infsup_probe, solve, BoundaryFn,
    ComplexSystem, FluxParams, FluxPreset, GalerkinOptions, LsWeights, SolveStrategy, SourceFn,
};
use crate::error::{param, Error, Result};
use crate::mesh::{
    geometric_refine, n_lambda, triangulate, uniform_interval_mesh, BoundaryTag, DomainId, Mesh, Point, Polygon,
};
use crate::spaces::{nodally_exact_space_1d, DiscreteSpace};
use crate::C64;

pub use exact::{ExactSolution, SINGULAR_ORDER};
pub use study::{
    approx_error, approx_study, near_unity_error, scale_resolution_check, ApproxMode, ApproxPoint, ResolutionConstants,
    ScaleResolution, WaveFamily,
};

/// Smallest admissible wavenumber.
pub const K0: f64 = 1.0;

/// Boundary value problem `-Delta u - k^2 u = f` with
/// `d_n u + s i k u = g` on Robin sides and `d_n u = g` on Neumann sides.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub domain: DomainId,
    pub k: f64,
    /// Constant volume source.
    pub source: C64,
    /// Boundary data are taken from the exact solution; without one, `g = 0`.
    pub exact: Option<ExactSolution>,
    /// `s` in the Robin condition.
    pub robin_sign: f64,
    /// L-shape only: Neumann sides at the re-entrant corner.
    pub neumann_at_reentrant: bool,
}

impl ProblemSpec {
    /// `-u'' - k^2 u = 1`, `u(0) = 0`, `u'(1) - i k u(1) = 0`.
    pub fn model_1d(k: f64) -> Self {
        ProblemSpec {
            domain: DomainId::UnitInterval,
            k,
            source: C64::new(1.0, 0.0),
            exact: Some(ExactSolution::Model1d { k }),
            robin_sign: -1.0,
            neumann_at_reentrant: false,
        }
    }

    /// Plane wave `exp(i k (x - y) / sqrt 2)` on the unit square, `d_n u + i k u = g`.
    pub fn plane_wave_square(k: f64) -> Self {
        Self::plane_wave(DomainId::UnitSquare, k, ExactSolution::pw2d(k))
    }

    /// Homogeneous problem on a 2D domain with Robin data from `exact`.
    pub fn plane_wave(domain: DomainId, k: f64, exact: ExactSolution) -> Self {
        ProblemSpec {
            domain,
            k,
            source: C64::new(0.0, 0.0),
            exact: Some(exact),
            robin_sign: 1.0,
            neumann_at_reentrant: false,
        }
    }

    /// `J_{2/3}(k r) cos(2 phi / 3)` on the L-shape: Neumann at the re-entrant
    /// corner and `d_n u - i k u = g` elsewhere.
    pub fn lshape_singular(k: f64) -> Self {
        ProblemSpec {
            domain: DomainId::LShape,
            k,
            source: C64::new(0.0, 0.0),
            exact: Some(ExactSolution::BesselSingular { k }),
            robin_sign: -1.0,
            neumann_at_reentrant: true,
        }
    }

    /// Zero source and zero boundary data.
    pub fn homogeneous(domain: DomainId, k: f64, robin_sign: f64) -> Self {
        ProblemSpec {
            domain,
            k,
            source: C64::new(0.0, 0.0),
            exact: None,
            robin_sign,
            neumann_at_reentrant: false,
        }
    }

    pub fn dim(&self) -> usize {
        match self.domain {
            DomainId::UnitInterval => 1,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k >= K0) || !self.k.is_finite() {
            return Err(param("k", format!("wavenumber must be at least {K0}, got {}", self.k)));
        }
        if self.robin_sign != 1.0 && self.robin_sign != -1.0 {
            return Err(param("robin_sign", format!("must be 1 or -1, got {}", self.robin_sign)));
        }
        Ok(())
    }

    /// Mesh of the domain with mesh size at most `h`, optionally graded
    /// geometrically with `(sigma, layers)` towards the singular corners.
    pub fn mesh(&self, h: f64, grading: Option<(f64, usize)>) -> Result<Mesh> {
        if !(h > 0.0) {
            return Err(param("h", format!("must be positive, got {h}")));
        }
        let coarse = match self.domain {
            DomainId::UnitInterval => uniform_interval_mesh(((1.0 / h) - 1e-9).ceil().max(1.0) as usize)?,
            id => triangulate(&Polygon::builtin(id, self.neumann_at_reentrant)?, h)?,
        };
        match grading {
            None | Some((_, 0)) => Ok(coarse),
            Some((sigma, layers)) => {
                let corners: Vec<Point> = match self.domain {
                    DomainId::UnitInterval => vec![[0.0, 0.0]],
                    DomainId::UnitSquare => Polygon::unit_square().vertices,
                    DomainId::LShape => vec![[0.0, 0.0]],
                };
                geometric_refine(&coarse, &corners, sigma, layers)
            }
        }
    }

    /// Boundary data `g(x, n, tag)` derived from the exact solution.
    pub fn boundary_data(&self, x: Point, n: Point, tag: BoundaryTag) -> C64 {
        let Some(u) = &self.exact else {
            return C64::new(0.0, 0.0);
        };
        let (v, g) = u.eval(x);
        let dn = g[0] * n[0] + g[1] * n[1];
        match tag {
            BoundaryTag::Robin => dn + C64::new(0.0, self.robin_sign * self.k) * v,
            BoundaryTag::Neumann => dn,
            BoundaryTag::Dirichlet => v,
        }
    }

    /// Largest relative residual `|-Delta u - k^2 u - f|` of the exact
    /// solution at `samples` random interior points (Laplacian by central
    /// differences of the analytic gradient).
    pub fn verify_exact(&self, samples: usize, seed: u64) -> Result<f64> {
        let Some(u) = &self.exact else {
            return Err(param("exact", "problem has no exact solution"));
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(samples);
        while points.len() < samples {
            let x: Point = match self.domain {
                DomainId::UnitInterval => [rng.gen_range(0.05..0.95), 0.0],
                DomainId::UnitSquare => [rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)],
                DomainId::LShape => [rng.gen_range(-0.95..0.95), rng.gen_range(-0.95..0.95)],
            };
            let outside = self.domain == DomainId::LShape && x[0] > -0.05 && x[1] < 0.05;
            if !outside {
                points.push(x);
            }
        }
        let step = 1e-5;
        let k2 = self.k * self.k;
        let mut worst: f64 = 0.0;
        for x in points {
            let (v, gv) = u.eval(x);
            let mut lap = C64::new(0.0, 0.0);
            for d in 0..self.dim() {
                let (mut xp, mut xm) = (x, x);
                xp[d] += step;
                xm[d] -= step;
                lap += (u.eval(xp).1[d] - u.eval(xm).1[d]) / (2.0 * step);
            }
            let res = (-lap - k2 * v - self.source).norm();
            let scale = k2 * v.norm() + self.source.norm() + self.k * (gv[0].norm_sqr() + gv[1].norm_sqr()).sqrt();
            worst = worst.max(res / scale.max(f64::MIN_POSITIVE));
        }
        Ok(worst)
    }
}

/// Knobs shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub strategy: SolveStrategy,
    /// Volume quadrature override for conforming methods.
    pub quad_degree: Option<usize>,
    /// Keep the assembled system in the returned [`Run`].
    pub keep_system: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            strategy: SolveStrategy::Auto,
            quad_degree: None,
            keep_system: false,
        }
    }
}

/// Result of one solve.
#[derive(Debug, Clone)]
pub struct Run {
    pub space: DiscreteSpace,
    pub coeffs: Vec<C64>,
    pub report: ErrorReport,
    pub system: Option<ComplexSystem>,
    /// `|Im A_N(u_N, u_N) - ||u_N||_DG^2| / ||u_N||_DG^2` for DG runs.
    pub coercivity_residual: Option<f64>,
}

fn base_report(space: &DiscreteSpace, k: f64, method: &str) -> ErrorReport {
    ErrorReport {
        method: method.to_string(),
        k,
        h: space.mesh.h,
        p: space.degree(),
        dofs: space.n_dofs,
        n_lambda: n_lambda(space.n_dofs, k, space.mesh.dim),
        ..ErrorReport::default()
    }
}

fn check_domain(problem: &ProblemSpec, space: &DiscreteSpace) -> Result<()> {
    if space.mesh.dim != problem.dim() {
        return Err(Error::Unsupported(format!(
            "a {}D space cannot discretize the {} problem",
            space.mesh.dim, problem.domain
        )));
    }
    Ok(())
}

fn fill_volume_errors(
    problem: &ProblemSpec,
    space: &DiscreteSpace,
    coeffs: &[C64],
    report: &mut ErrorReport,
) -> Result<()> {
    if let Some(u) = &problem.exact {
        let degree = error_degree(space, problem.k)?;
        let ve = volume_errors(space, coeffs, &|x| u.eval(x), degree, u.singular_point())?;
        report.h1_semi_rel = Some(ve.h1_semi_rel());
        report.l2_rel = Some(ve.l2_rel());
        report.norm_1k_rel = Some(ve.norm_1k_rel(problem.k));
    }
    Ok(())
}

/// Conforming Galerkin solve of `B(u_N, v) = l(v)`; Dirichlet facets are
/// eliminated.
pub fn solve_fem(problem: &ProblemSpec, space: &DiscreteSpace, options: &SolverOptions) -> Result<Run> {
    problem.validate()?;
    check_domain(problem, space)?;
    if !space.conforming {
        return Err(Error::Unsupported(format!(
            "FEM needs a conforming space, got {}",
            space.kind
        )));
    }
    let space = space.clone().eliminate_dirichlet()?;
    let source = problem.source;
    let f = move |_: Point| source;
    let g = |x: Point, n: Point, tag: BoundaryTag| problem.boundary_data(x, n, tag);
    let f_arg: Option<SourceFn> = if source != C64::new(0.0, 0.0) { Some(&f) } else { None };
    let g_arg: Option<BoundaryFn> = if problem.exact.is_some() { Some(&g) } else { None };
    let galerkin = GalerkinOptions {
        robin_sign: problem.robin_sign,
        quad_degree: options.quad_degree,
        with_gram: false,
    };
    let system = assemble_galerkin(&space, problem.k, f_arg, g_arg, galerkin)?;
    let solution = solve(&system, options.strategy)?;
    let mut report = base_report(&space, problem.k, &system.method);
    report.solve_residual = Some(solution.residual);
    fill_volume_errors(problem, &space, &solution.x, &mut report)?;
    Ok(Run {
        space,
        coeffs: solution.x,
        report,
        system: options.keep_system.then_some(system),
        coercivity_residual: None,
    })
}

/// Galerkin solve on the nodally exact space over `n_elements` uniform elements.
pub fn solve_nodally_exact_1d(problem: &ProblemSpec, n_elements: usize, options: &SolverOptions) -> Result<Run> {
    if problem.domain != DomainId::UnitInterval {
        return Err(Error::Unsupported("the nodally exact space is one-dimensional".into()));
    }
    let mesh = uniform_interval_mesh(n_elements)?;
    let space = nodally_exact_space_1d(mesh, problem.k)?;
    let mut run = solve_fem(problem, &space, options)?;
    if let Some(u) = &problem.exact {
        run.report.nodal_max = Some(nodal_max_error(&run.space, &run.coeffs, &|x| u.eval(x))?);
    }
    Ok(run)
}

fn check_trefftz(problem: &ProblemSpec, space: &DiscreteSpace) -> Result<()> {
    problem.validate()?;
    check_domain(problem, space)?;
    if problem.source != C64::new(0.0, 0.0) {
        return Err(Error::Unsupported("Trefftz methods need f = 0".into()));
    }
    if problem.robin_sign != 1.0 {
        return Err(Error::Unsupported(
            "Trefftz methods use the condition d_n u + i k u = g".into(),
        ));
    }
    if let Some(u) = &problem.exact {
        if !u.is_homogeneous() && !matches!(u, ExactSolution::Custom { .. }) {
            return Err(Error::Unsupported(format!(
                "{} does not solve the homogeneous equation",
                u.id()
            )));
        }
    }
    Ok(())
}

/// Minimizer of the Least Squares functional over a Trefftz space.
pub fn solve_least_squares(
    problem: &ProblemSpec,
    space: &DiscreteSpace,
    weights: Option<&LsWeights>,
    options: &SolverOptions,
) -> Result<Run> {
    check_trefftz(problem, space)?;
    let k = problem.k;
    let standard = LsWeights::standard(&space.mesh, k);
    let weights = weights.unwrap_or(&standard);
    let g = |x: Point, n: Point, tag: BoundaryTag| problem.boundary_data(x, n, tag);
    let system = assemble_least_squares(space, k, Some(&g), weights)?;
    let solution = solve(&system, options.strategy)?;
    let mut report = base_report(space, k, "least_squares");
    report.solve_residual = Some(solution.residual);
    report.j_value = Some(ls_functional(space, &solution.x, k, Some(&g), weights)?);
    fill_volume_errors(problem, space, &solution.x, &mut report)?;
    Ok(Run {
        space: space.clone(),
        coeffs: solution.x,
        report,
        system: options.keep_system.then_some(system),
        coercivity_residual: None,
    })
}

/// `min_j J(v_j) - J(u_N)` over `candidates` random perturbations `v_j` of
/// a Least Squares solution, with sizes spread over four decades.
pub fn ls_minimality_margin(
    problem: &ProblemSpec,
    run: &Run,
    weights: Option<&LsWeights>,
    candidates: usize,
    seed: u64,
) -> Result<f64> {
    let k = problem.k;
    let standard = LsWeights::standard(&run.space.mesh, k);
    let weights = weights.unwrap_or(&standard);
    let g = |x: Point, n: Point, tag: BoundaryTag| problem.boundary_data(x, n, tag);
    let j0 = ls_functional(&run.space, &run.coeffs, k, Some(&g), weights)?;
    let scale = run.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut margin = f64::INFINITY;
    for j in 0..candidates {
        let size = scale * 10f64.powf(-3.0 * (j as f64) / (candidates.max(2) - 1) as f64);
        let v: Vec<C64> = run
            .coeffs
            .iter()
            .map(|c| c + size * C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        margin = margin.min(ls_functional(&run.space, &v, k, Some(&g), weights)? - j0);
    }
    Ok(margin)
}

/// Flux parameters of `preset` for `space` (effective degree `(dim - 1) / 2`).
pub fn flux_for(preset: FluxPreset, space: &DiscreteSpace, k: f64) -> FluxParams {
    FluxParams::from_preset(preset, &space.mesh, k, effective_degree(space))
}

/// Plane-wave DG solve of `A_N(u_N, v) = l(v)`.
pub fn solve_pwdg(
    problem: &ProblemSpec,
    space: &DiscreteSpace,
    flux: &FluxParams,
    options: &SolverOptions,
) -> Result<Run> {
    check_trefftz(problem, space)?;
    let k = problem.k;
    let g = |x: Point, n: Point, tag: BoundaryTag| problem.boundary_data(x, n, tag);
    let g_arg: Option<BoundaryFn> = if problem.exact.is_some() { Some(&g) } else { None };
    let system = assemble_pwdg(space, k, g_arg, flux)?;
    let solution = solve(&system, options.strategy)?;
    let mut report = base_report(space, k, "pwdg");
    report.solve_residual = Some(solution.residual);
    if let Some(u) = &problem.exact {
        let (dg, plus) = dg_errors(space, &solution.x, flux, k, &|x| u.eval(x))?;
        report.dg_norm = Some(dg);
        report.dg_plus_norm = Some(plus);
    }
    fill_volume_errors(problem, space, &solution.x, &mut report)?;
    let norm_sq = dg_norm(space, &solution.x, flux, k)?.powi(2);
    let im = system.a.form(&solution.x, &solution.x).im;
    let coercivity_residual = if norm_sq > 0.0 {
        (im - norm_sq).abs() / norm_sq
    } else {
        im.abs()
    };
    Ok(Run {
        space: space.clone(),
        coeffs: solution.x,
        report,
        system: options.keep_system.then_some(system),
        coercivity_residual: Some(coercivity_residual),
    })
}

/// Discrete inf-sup constant of the Galerkin form on `space` in the
/// `(1,k)` norm.
pub fn infsup_constant(problem: &ProblemSpec, space: &DiscreteSpace) -> Result<f64> {
    problem.validate()?;
    check_domain(problem, space)?;
    let space = space.clone().eliminate_dirichlet()?;
    let galerkin = GalerkinOptions {
        robin_sign: problem.robin_sign,
        quad_degree: None,
        with_gram: true,
    };
    let system = assemble_galerkin(&space, problem.k, None, None, galerkin)?;
    let gram = system
        .gram
        .as_ref()
        .ok_or_else(|| Error::LinearAlgebra("missing Gram matrix".into()))?;
    infsup_probe(&system.a, gram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{h1_space, trefftz_space, PlaneWaveBasis};

    #[test]
    fn exact_solutions_solve_their_problems() {
        for problem in [
            ProblemSpec::model_1d(10.0),
            ProblemSpec::plane_wave_square(20.0),
            ProblemSpec::lshape_singular(3.0),
        ] {
            let r = problem.verify_exact(20, 1).unwrap();
            assert!(r < 1e-8, "{:?}: {r}", problem.exact);
        }
    }

    #[test]
    fn wrong_exact_solution_is_detected() {
        let mut problem = ProblemSpec::model_1d(10.0);
        problem.source = C64::new(2.0, 0.0);
        assert!(problem.verify_exact(20, 1).unwrap() > 1e-3);
    }

    #[test]
    fn rejects_small_wavenumber() {
        let problem = ProblemSpec::model_1d(0.1);
        let space = h1_space(uniform_interval_mesh(4).unwrap(), 1).unwrap();
        assert!(matches!(
            solve_fem(&problem, &space, &SolverOptions::default()),
            Err(Error::Parameter { name: "k", .. })
        ));
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let problem = ProblemSpec::homogeneous(DomainId::UnitSquare, 5.0, 1.0);
        let mesh = problem.mesh(0.25, None).unwrap();
        let run = solve_fem(&problem, &h1_space(mesh.clone(), 2).unwrap(), &SolverOptions::default()).unwrap();
        assert!(run.coeffs.iter().all(|c| c.norm() == 0.0));
        let space = trefftz_space(mesh, PlaneWaveBasis::new(5, 5.0).unwrap()).unwrap();
        let flux = flux_for(FluxPreset::Uwvf, &space, 5.0);
        let run = solve_pwdg(&problem, &space, &flux, &SolverOptions::default()).unwrap();
        assert!(run.coeffs.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn trefftz_methods_reject_sources() {
        let problem = ProblemSpec::model_1d(4.0);
        let mesh = ProblemSpec::plane_wave_square(4.0).mesh(0.5, None).unwrap();
        let space = trefftz_space(mesh, PlaneWaveBasis::new(5, 4.0).unwrap()).unwrap();
        assert!(solve_least_squares(&problem, &space, None, &SolverOptions::default()).is_err());
    }

    #[test]
    fn mesh_sizes_and_grading() {
        let problem = ProblemSpec::lshape_singular(1.0);
        let m = problem.mesh(0.25, None).unwrap();
        assert!(m.h <= 0.25 * 2f64.sqrt() + 1e-12);
        let g = problem.mesh(0.25, Some((0.125, 3))).unwrap();
        assert!(g.min_element_diameter() < m.min_element_diameter());
        assert_eq!(ProblemSpec::model_1d(1.0).mesh(0.1, None).unwrap().n_elements(), 10);
    }
}
