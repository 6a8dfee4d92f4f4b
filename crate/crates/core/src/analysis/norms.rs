use crate::assembly::{element_rule, skeleton_rule, volume_degree, BoundaryFn, FluxParams, LsWeights};
use crate::error::{Error, Result};
use crate::mesh::{dist, BoundaryTag, Mesh, Point};
use crate::numerics::quad_triangle;
use crate::spaces::DiscreteSpace;
use crate::C64;

/// Value and gradient of a function at a point.
pub type Exact<'a> = &'a (dyn Fn(Point) -> (C64, [C64; 2]) + Sync);

/// Radius of the disk around a singular point left out of error quadrature.
pub const SINGULAR_CUTOFF: f64 = 1e-8;

/// Absolute errors and exact-solution norms from one quadrature sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VolumeErrors {
    pub h1_semi: f64,
    pub l2: f64,
    pub exact_h1_semi: f64,
    pub exact_l2: f64,
}

impl VolumeErrors {
    pub fn h1_semi_rel(&self) -> f64 {
        ratio(self.h1_semi, self.exact_h1_semi)
    }

    pub fn l2_rel(&self) -> f64 {
        ratio(self.l2, self.exact_l2)
    }

    /// Relative error in `||v||_{1,k}^2 = k^2 ||v||^2 + |v|_1^2`.
    pub fn norm_1k_rel(&self, k: f64) -> f64 {
        let err = (k * k * self.l2 * self.l2 + self.h1_semi * self.h1_semi).sqrt();
        let ex = (k * k * self.exact_l2 * self.exact_l2 + self.exact_h1_semi * self.exact_h1_semi).sqrt();
        ratio(err, ex)
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        a
    }
}

/// Quadrature degree used for error integrals: two above assembly.
pub fn error_degree(space: &DiscreteSpace, k: f64) -> Result<usize> {
    Ok((volume_degree(space, k, None)? + 2).min(40))
}

/// Quadrature points of element `e`, subdividing geometrically towards
/// `corner` when it is a vertex of `e`; the innermost triangle of
/// diameter below [`SINGULAR_CUTOFF`] is dropped.
fn graded_rule(mesh: &Mesh, e: usize, degree: usize, corner: Option<Point>) -> Result<Vec<(Point, f64)>> {
    let Some(c) = corner else {
        return element_rule(mesh, e, degree);
    };
    if mesh.dim != 2 {
        return element_rule(mesh, e, degree);
    }
    let pts = mesh.element_points(e);
    let tol = 1e-12 * mesh.h;
    let Some(pos) = pts.iter().position(|&p| dist(p, c) <= tol) else {
        return element_rule(mesh, e, degree);
    };
    let rule = quad_triangle(degree)?;
    let (mut a, mut b) = (pts[(pos + 1) % 3], pts[(pos + 2) % 3]);
    let c = pts[pos];
    let mut out = Vec::new();
    let push_tri = |p0: Point, p1: Point, p2: Point, out: &mut Vec<(Point, f64)>| {
        let jac = ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0])).abs();
        for (xi, w) in rule.iter() {
            let x = [
                p0[0] + xi[0] * (p1[0] - p0[0]) + xi[1] * (p2[0] - p0[0]),
                p0[1] + xi[0] * (p1[1] - p0[1]) + xi[1] * (p2[1] - p0[1]),
            ];
            out.push((x, w * jac));
        }
    };
    while dist(c, a).max(dist(c, b)) > SINGULAR_CUTOFF {
        let a2 = [0.5 * (c[0] + a[0]), 0.5 * (c[1] + a[1])];
        let b2 = [0.5 * (c[0] + b[0]), 0.5 * (c[1] + b[1])];
        push_tri(a2, a, b, &mut out);
        push_tri(a2, b, b2, &mut out);
        a = a2;
        b = b2;
    }
    Ok(out)
}

/// `|u - u_N|_{H^1}`, `||u - u_N||_{L^2}` and the norms of `u`, elementwise.
pub fn volume_errors(
    space: &DiscreteSpace,
    coeffs: &[C64],
    exact: Exact,
    degree: usize,
    singular: Option<Point>,
) -> Result<VolumeErrors> {
    if coeffs.len() != space.n_dofs {
        return Err(Error::Dimension {
            expected: space.n_dofs,
            got: coeffs.len(),
        });
    }
    let mesh = &*space.mesh;
    let mut out = VolumeErrors::default();
    let (mut h1, mut l2, mut eh1, mut el2) = (0.0, 0.0, 0.0, 0.0);
    for e in 0..mesh.n_elements() {
        for (x, w) in graded_rule(mesh, e, degree, singular)? {
            let (u, gu) = exact(x);
            let (uh, guh) = space.evaluate_unchecked(coeffs, x, e);
            l2 += (u - uh).norm_sqr() * w;
            h1 += ((gu[0] - guh[0]).norm_sqr() + (gu[1] - guh[1]).norm_sqr()) * w;
            el2 += u.norm_sqr() * w;
            eh1 += (gu[0].norm_sqr() + gu[1].norm_sqr()) * w;
        }
    }
    out.h1_semi = h1.sqrt();
    out.l2 = l2.sqrt();
    out.exact_h1_semi = eh1.sqrt();
    out.exact_l2 = el2.sqrt();
    Ok(out)
}

/// `max_i |u_N(x_i) - u(x_i)|` over mesh nodes.
pub fn nodal_max_error(space: &DiscreteSpace, coeffs: &[C64], exact: Exact) -> Result<f64> {
    let mesh = &*space.mesh;
    let mut worst: f64 = 0.0;
    let mut seen = vec![false; mesh.n_nodes()];
    for e in 0..mesh.n_elements() {
        for &n in mesh.element(e) {
            if seen[n] {
                continue;
            }
            seen[n] = true;
            let x = mesh.nodes[n];
            let uh = space.evaluate_unchecked(coeffs, x, e).0;
            worst = worst.max((uh - exact(x).0).norm());
        }
    }
    Ok(worst)
}

/// Piecewise function: value and gradient on element `e` at `x`.
pub type Piecewise<'a> = &'a (dyn Fn(usize, Point) -> (C64, [C64; 2]) + Sync);

/// Squared DG norm and the extra terms of the DG+ norm of a piecewise field.
fn dg_parts(space: &DiscreteSpace, k: f64, flux: &FluxParams, field: Piecewise) -> Result<(f64, f64)> {
    let mesh = &*space.mesh;
    flux.validate(mesh)?;
    let (mut dg, mut plus) = (0.0, 0.0);
    for (f, edge) in mesh.edges.iter().enumerate() {
        let n = edge.normal;
        for (x, w) in skeleton_rule(space, k, f)? {
            let (u1, g1) = field(edge.elements.0, x);
            let dn1 = g1[0] * n[0] + g1[1] * n[1];
            match edge.elements.1 {
                Some(e2) => {
                    let (u2, g2) = field(e2, x);
                    let dn2 = g2[0] * n[0] + g2[1] * n[1];
                    let (alpha, beta) = (flux.alpha[f], flux.beta[f]);
                    dg += (beta / k * (dn1 - dn2).norm_sqr() + k * alpha * (u1 - u2).norm_sqr()) * w;
                    let avg = 0.5 * (u1 + u2);
                    let avg_g = [0.5 * (g1[0] + g2[0]), 0.5 * (g1[1] + g2[1])];
                    plus += (k / beta * avg.norm_sqr() + (avg_g[0].norm_sqr() + avg_g[1].norm_sqr()) / (k * alpha)) * w;
                }
                None => {
                    let delta = flux.delta[f];
                    dg += (delta / k * dn1.norm_sqr() + k * (1.0 - delta) * u1.norm_sqr()) * w;
                    plus += k / delta * u1.norm_sqr() * w;
                }
            }
        }
    }
    Ok((dg, plus))
}

fn discrete<'a>(
    space: &'a DiscreteSpace,
    coeffs: &[C64],
) -> Result<impl Fn(usize, Point) -> (C64, [C64; 2]) + Sync + 'a> {
    if coeffs.len() != space.n_dofs {
        return Err(Error::Dimension {
            expected: space.n_dofs,
            got: coeffs.len(),
        });
    }
    let coeffs = coeffs.to_vec();
    Ok(move |e: usize, x: Point| space.evaluate_unchecked(&coeffs, x, e))
}

/// `||v||_DG` with
/// `||v||_DG^2 = 1/k ||beta^1/2 [grad v]||^2 + k ||alpha^1/2 [v]||^2` on interior edges
/// `+ 1/k ||delta^1/2 d_n v||^2 + k ||(1-delta)^1/2 v||^2` on the boundary.
pub fn dg_norm(space: &DiscreteSpace, coeffs: &[C64], flux: &FluxParams, k: f64) -> Result<f64> {
    let field = discrete(space, coeffs)?;
    Ok(dg_parts(space, k, flux, &field)?.0.sqrt())
}

/// `||v||_{DG,+}`: the DG norm plus `k ||beta^-1/2 {v}||^2 + 1/k ||alpha^-1/2 {grad v}||^2`
/// on interior edges and `k ||delta^-1/2 v||^2` on the boundary.
pub fn dg_plus_norm(space: &DiscreteSpace, coeffs: &[C64], flux: &FluxParams, k: f64) -> Result<f64> {
    let field = discrete(space, coeffs)?;
    let (dg, plus) = dg_parts(space, k, flux, &field)?;
    Ok((dg + plus).sqrt())
}

/// `||u - v||_DG` for a smooth `u` given in closed form.
pub fn dg_error(space: &DiscreteSpace, coeffs: &[C64], flux: &FluxParams, k: f64, exact: Exact) -> Result<f64> {
    Ok(dg_errors(space, coeffs, flux, k, exact)?.0)
}

/// `(||u - v||_DG, ||u - v||_{DG,+})` for a smooth `u` given in closed form.
pub fn dg_errors(space: &DiscreteSpace, coeffs: &[C64], flux: &FluxParams, k: f64, exact: Exact) -> Result<(f64, f64)> {
    let field = discrete(space, coeffs)?;
    let diff = |e: usize, x: Point| {
        let (u, g) = exact(x);
        let (v, gv) = field(e, x);
        (u - v, [g[0] - gv[0], g[1] - gv[1]])
    };
    let (dg, plus) = dg_parts(space, k, flux, &diff)?;
    Ok((dg.sqrt(), (dg + plus).sqrt()))
}

/// Least Squares functional evaluated by quadrature of its definition.
pub fn ls_functional(
    space: &DiscreteSpace,
    coeffs: &[C64],
    k: f64,
    g: Option<BoundaryFn>,
    weights: &LsWeights,
) -> Result<f64> {
    let mesh = &*space.mesh;
    let field = discrete(space, coeffs)?;
    let mut j = 0.0;
    for (f, edge) in mesh.edges.iter().enumerate() {
        let n = edge.normal;
        let (w1, w2) = (weights.w1[f], weights.w2[f]);
        for (x, w) in skeleton_rule(space, k, f)? {
            let (u1, g1) = field(edge.elements.0, x);
            let dn1 = g1[0] * n[0] + g1[1] * n[1];
            match edge.elements.1 {
                Some(e2) => {
                    let (u2, g2) = field(e2, x);
                    let dn2 = g2[0] * n[0] + g2[1] * n[1];
                    j += (w1 * w1 * (u1 - u2).norm_sqr() + w2 * w2 * (dn1 - dn2).norm_sqr()) * w;
                }
                None => {
                    let tag = edge.tag.unwrap_or(BoundaryTag::Robin);
                    let tv = match tag {
                        BoundaryTag::Neumann => dn1,
                        _ => dn1 + C64::new(0.0, k) * u1,
                    };
                    let gx = g.map_or(C64::new(0.0, 0.0), |g| g(x, n, tag));
                    j += w2 * w2 * (gx - tv).norm_sqr() * w;
                }
            }
        }
    }
    Ok(j)
}

/// `sum_{E_B} w2^2 ||g||^2`, the constant part of the Least Squares functional.
pub fn ls_data_norm_sq(space: &DiscreteSpace, k: f64, g: BoundaryFn, weights: &LsWeights) -> Result<f64> {
    let mesh = &*space.mesh;
    let mut s = 0.0;
    for &f in &mesh.boundary_edges {
        let edge = &mesh.edges[f];
        let tag = edge.tag.unwrap_or(BoundaryTag::Robin);
        for (x, w) in skeleton_rule(space, k, f)? {
            s += weights.w2[f].powi(2) * g(x, edge.normal, tag).norm_sqr() * w;
        }
    }
    Ok(s)
}

/// `sum_K int_{dK} v sigma.n` for piecewise `v` and piecewise vector field
/// `sigma`, summed element by element (the left side of the DG magic formula).
pub fn element_boundary_sum(
    mesh: &Mesh,
    degree: usize,
    v: &dyn Fn(usize, Point) -> C64,
    sigma: &dyn Fn(usize, Point) -> [C64; 2],
) -> Result<C64> {
    let rule = crate::numerics::gauss_interval_for_degree(degree)?;
    let mut total = C64::new(0.0, 0.0);
    for e in 0..mesh.n_elements() {
        for &f in mesh.element_facets(e) {
            let edge = &mesh.edges[f];
            let n = mesh.outward_normal(e, f);
            for (t, w) in rule.iter() {
                let x = edge.point(mesh, t[0]);
                let s = sigma(e, x);
                total += v(e, x) * (s[0] * n[0] + s[1] * n[1]) * w * edge.length;
            }
        }
    }
    Ok(total)
}

/// Right side of the DG magic formula:
/// `int_{E_I} [v].{sigma} + {v}[sigma] + int_{E_B} [v].{sigma}`.
pub fn skeleton_sum(
    mesh: &Mesh,
    degree: usize,
    v: &dyn Fn(usize, Point) -> C64,
    sigma: &dyn Fn(usize, Point) -> [C64; 2],
) -> Result<C64> {
    let rule = crate::numerics::gauss_interval_for_degree(degree)?;
    let mut total = C64::new(0.0, 0.0);
    for edge in &mesh.edges {
        let n = edge.normal;
        let e1 = edge.elements.0;
        for (t, w) in rule.iter() {
            let x = edge.point(mesh, t[0]);
            let wl = w * edge.length;
            let (v1, s1) = (v(e1, x), sigma(e1, x));
            match edge.elements.1 {
                Some(e2) => {
                    let (v2, s2) = (v(e2, x), sigma(e2, x));
                    // [v] = (v1 - v2) n, {sigma}; {v}, [sigma] = (s1 - s2).n
                    let jump_v_avg_s = (v1 - v2) * (0.5 * (s1[0] + s2[0]) * n[0] + 0.5 * (s1[1] + s2[1]) * n[1]);
                    let avg_v_jump_s = 0.5 * (v1 + v2) * ((s1[0] - s2[0]) * n[0] + (s1[1] - s2[1]) * n[1]);
                    total += (jump_v_avg_s + avg_v_jump_s) * wl;
                }
                None => {
                    total += v1 * (s1[0] * n[0] + s1[1] * n[1]) * wl;
                }
            }
        }
    }
    Ok(total)
}
