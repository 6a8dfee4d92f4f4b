use super::{BoundaryFn, ComplexSystem, SourceFn, SystemMatrix};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh, Point};
use crate::numerics::{gauss_interval_for_degree, oscillatory_degree, quad_triangle};
use crate::spaces::{DiscreteSpace, LocalBasis, ELIMINATED};
use crate::C64;

/// Extra degrees added to oscillatory quadrature rules.
const OSC_MARGIN: usize = 6;
const MAX_TRIANGLE_DEGREE: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GalerkinOptions {
    /// `s` in the Robin condition `d_n u + s i k u = g`.
    pub robin_sign: f64,
    /// Volume quadrature degree; `None` picks it from the basis.
    pub quad_degree: Option<usize>,
    /// Also assemble the `(1,k)` Gram matrix.
    pub with_gram: bool,
}

impl Default for GalerkinOptions {
    fn default() -> Self {
        GalerkinOptions {
            robin_sign: 1.0,
            quad_degree: None,
            with_gram: false,
        }
    }
}

/// Degree of the product of two basis functions, when polynomial.
fn product_degree(space: &DiscreteSpace) -> Option<usize> {
    match space.basis {
        LocalBasis::Polynomial { p } => Some(2 * p),
        _ => None,
    }
}

/// Volume quadrature degree for `space`, honouring an override.
pub fn volume_degree(space: &DiscreteSpace, k: f64, degree: Option<usize>) -> Result<usize> {
    let h = space.mesh.h;
    let natural = match &space.basis {
        LocalBasis::Polynomial { p } => 2 * p + 2,
        LocalBasis::NodallyExact { k } => oscillatory_degree(2, 2.0 * k, h) + OSC_MARGIN,
        LocalBasis::Pum(e) => oscillatory_degree(2, 2.0 * e.k().max(k), h) + OSC_MARGIN,
        LocalBasis::Trefftz(e) => oscillatory_degree(0, 2.0 * e.k().max(k), h) + OSC_MARGIN,
    };
    let chosen = match degree {
        Some(d) => {
            if let Some(required) = product_degree(space) {
                if d < required {
                    return Err(Error::QuadratureDegree {
                        configured: d,
                        required,
                    });
                }
            }
            d
        }
        None => natural,
    };
    Ok(if space.mesh.dim == 2 {
        chosen.min(MAX_TRIANGLE_DEGREE)
    } else {
        chosen
    })
}

/// Volume quadrature points and weights of element `e`.
pub(crate) fn element_rule(mesh: &Mesh, e: usize, degree: usize) -> Result<Vec<(Point, f64)>> {
    if mesh.dim == 1 {
        let el = mesh.element(e);
        let (a, b) = (mesh.nodes[el[0]][0], mesh.nodes[el[1]][0]);
        let rule = gauss_interval_for_degree(degree)?;
        Ok(rule
            .iter()
            .map(|(t, w)| ([a + t[0] * (b - a), 0.0], w * (b - a)))
            .collect())
    } else {
        let rule = quad_triangle(degree.clamp(1, MAX_TRIANGLE_DEGREE))?;
        let jac = 2.0 * mesh.element_measure(e);
        Ok(rule
            .iter()
            .map(|(xi, w)| (mesh.map_to_element(e, xi), w * jac))
            .collect())
    }
}

/// `c_stiff (grad u, grad v) + c_mass (u, v)` over all elements, with the
/// load `(f, v)` when `f` is given.
fn volume_terms(
    space: &DiscreteSpace,
    degree: usize,
    c_stiff: f64,
    c_mass: f64,
    f: Option<SourceFn>,
) -> Result<(Vec<(usize, usize, C64)>, Vec<C64>)> {
    let mesh = &*space.mesh;
    let n = space.local_dim();
    let mut triplets = Vec::with_capacity(mesh.n_elements() * n * n);
    let mut rhs = vec![C64::new(0.0, 0.0); space.n_dofs];
    let mut vals = vec![C64::new(0.0, 0.0); n];
    let mut grads = vec![[C64::new(0.0, 0.0); 2]; n];
    let mut local = vec![C64::new(0.0, 0.0); n * n];
    let mut local_rhs = vec![C64::new(0.0, 0.0); n];
    for e in 0..mesh.n_elements() {
        local.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        local_rhs.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for (x, w) in element_rule(mesh, e, degree)? {
            space.eval_local(e, x, &mut vals, &mut grads);
            for i in 0..n {
                let (vi, gi) = (vals[i].conj(), [grads[i][0].conj(), grads[i][1].conj()]);
                for j in 0..n {
                    let s = grads[j][0] * gi[0] + grads[j][1] * gi[1];
                    local[i * n + j] += (s * c_stiff + vals[j] * vi * c_mass) * w;
                }
            }
            if let Some(f) = f {
                let fx = f(x);
                for i in 0..n {
                    local_rhs[i] += fx * vals[i].conj() * w;
                }
            }
        }
        let dofs = space.element_dofs(e);
        for i in 0..n {
            if dofs[i] == ELIMINATED {
                continue;
            }
            rhs[dofs[i]] += local_rhs[i];
            for j in 0..n {
                if dofs[j] != ELIMINATED {
                    triplets.push((dofs[i], dofs[j], local[i * n + j]));
                }
            }
        }
    }
    Ok((triplets, rhs))
}

/// Quadrature on boundary facet `f`: points, weights.
pub(crate) fn facet_rule(mesh: &Mesh, f: usize, degree: usize) -> Result<Vec<(Point, f64)>> {
    let edge = &mesh.edges[f];
    if mesh.dim == 1 {
        return Ok(vec![(mesh.nodes[edge.nodes[0]], 1.0)]);
    }
    let rule = gauss_interval_for_degree(degree)?;
    Ok(rule
        .iter()
        .map(|(t, w)| (edge.point(mesh, t[0]), w * edge.length))
        .collect())
}

fn boundary_degree(space: &DiscreteSpace, k: f64) -> usize {
    match &space.basis {
        LocalBasis::Polynomial { p } => 2 * p + 2,
        LocalBasis::NodallyExact { .. } => 0,
        LocalBasis::Pum(e) | LocalBasis::Trefftz(e) => {
            let hmax = space
                .mesh
                .boundary_edges
                .iter()
                .map(|&b| space.mesh.edges[b].length)
                .fold(0.0, f64::max);
            oscillatory_degree(2, 2.0 * e.k().max(k), hmax) + OSC_MARGIN
        }
    }
}

/// `c * int_{Robin} u v` plus the load `int_{Robin or Neumann} g v`.
fn boundary_terms(
    space: &DiscreteSpace,
    k: f64,
    c: C64,
    g: Option<BoundaryFn>,
) -> Result<(Vec<(usize, usize, C64)>, Vec<C64>)> {
    let mesh = &*space.mesh;
    let n = space.local_dim();
    let degree = boundary_degree(space, k);
    let mut triplets = Vec::new();
    let mut rhs = vec![C64::new(0.0, 0.0); space.n_dofs];
    let mut vals = vec![C64::new(0.0, 0.0); n];
    let mut grads = vec![[C64::new(0.0, 0.0); 2]; n];
    for &f in &mesh.boundary_edges {
        let edge = &mesh.edges[f];
        let tag = edge.tag.unwrap_or(BoundaryTag::Robin);
        if tag == BoundaryTag::Dirichlet {
            continue;
        }
        let e = edge.elements.0;
        let dofs = space.element_dofs(e);
        for (x, w) in facet_rule(mesh, f, degree)? {
            space.eval_local(e, x, &mut vals, &mut grads);
            if tag == BoundaryTag::Robin && c != C64::new(0.0, 0.0) {
                for i in 0..n {
                    if dofs[i] == ELIMINATED {
                        continue;
                    }
                    for j in 0..n {
                        if dofs[j] != ELIMINATED {
                            triplets.push((dofs[i], dofs[j], c * vals[j] * vals[i].conj() * w));
                        }
                    }
                }
            }
            if let Some(g) = g {
                let gx = g(x, edge.normal, tag);
                for i in 0..n {
                    if dofs[i] != ELIMINATED {
                        rhs[dofs[i]] += gx * vals[i].conj() * w;
                    }
                }
            }
        }
    }
    Ok((triplets, rhs))
}

/// `(u, v)_{L^2}`.
pub fn assemble_mass(space: &DiscreteSpace, k: f64) -> Result<SystemMatrix> {
    let degree = volume_degree(space, k, None)?;
    let (t, _) = volume_terms(space, degree, 0.0, 1.0, None)?;
    Ok(SystemMatrix::Sparse {
        n: space.n_dofs,
        triplets: t,
    })
}

/// `(grad u, grad v)_{L^2}`.
pub fn assemble_stiffness(space: &DiscreteSpace, k: f64) -> Result<SystemMatrix> {
    let degree = volume_degree(space, k, None)?;
    let (t, _) = volume_terms(space, degree, 1.0, 0.0, None)?;
    Ok(SystemMatrix::Sparse {
        n: space.n_dofs,
        triplets: t,
    })
}

/// `(u, v)_{L^2(Robin boundary)}`.
pub fn assemble_boundary_mass(space: &DiscreteSpace, k: f64) -> Result<SystemMatrix> {
    let (t, _) = boundary_terms(space, k, C64::new(1.0, 0.0), None)?;
    Ok(SystemMatrix::Sparse {
        n: space.n_dofs,
        triplets: t,
    })
}

/// Gram matrix of `k^2 (u, v) + (grad u, grad v)`.
pub fn assemble_gram_1k(space: &DiscreteSpace, k: f64) -> Result<SystemMatrix> {
    let degree = volume_degree(space, k, None)?;
    let (t, _) = volume_terms(space, degree, 1.0, k * k, None)?;
    Ok(SystemMatrix::Sparse {
        n: space.n_dofs,
        triplets: t,
    })
}

/// Conforming Galerkin system of
/// `B(u, v) = (grad u, grad v) - k^2 (u, v) + s i k (u, v)_{Robin}`,
/// `l(v) = (f, v) + (g, v)_{Robin and Neumann}`.
pub fn assemble_galerkin(
    space: &DiscreteSpace,
    k: f64,
    f: Option<SourceFn>,
    g: Option<BoundaryFn>,
    options: GalerkinOptions,
) -> Result<ComplexSystem> {
    if !space.conforming {
        return Err(Error::Unsupported(format!(
            "Galerkin assembly needs a conforming space, got {}",
            space.kind
        )));
    }
    if !(k > 0.0) {
        return Err(crate::error::param(
            "k",
            format!("wavenumber must be positive, got {k}"),
        ));
    }
    let degree = volume_degree(space, k, options.quad_degree)?;
    let (mut triplets, mut rhs) = volume_terms(space, degree, 1.0, -k * k, f)?;
    let (bt, brhs) = boundary_terms(space, k, C64::new(0.0, options.robin_sign * k), g)?;
    triplets.extend(bt);
    for (r, b) in rhs.iter_mut().zip(brhs) {
        *r += b;
    }
    let gram = if options.with_gram {
        Some(assemble_gram_1k(space, k)?)
    } else {
        None
    };
    Ok(ComplexSystem {
        a: SystemMatrix::Sparse {
            n: space.n_dofs,
            triplets,
        },
        rhs,
        gram,
        method: space.kind.to_string(),
        k,
        h: space.mesh.h,
        p: space.degree(),
    })
}
