//! Assembly of sesquilinear forms and the complex linear algebra around
//! them.
//!
//! Forms are linear in the first argument and conjugate-linear in the
//! second; matrices store `A[i][j] = a(b_j, b_i)`, so `v^H A u = a(u, v)`.

mod galerkin;
mod trefftz;

use std::fmt::Write as _;

use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Mat, Side};

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Point};
use crate::C64;

pub use galerkin::{
    assemble_boundary_mass, assemble_galerkin, assemble_gram_1k, assemble_mass, assemble_stiffness, volume_degree,
    GalerkinOptions,
};
pub use trefftz::{assemble_least_squares, assemble_pwdg, edge_degree, FluxParams, FluxPreset, LsWeights};

pub(crate) use galerkin::element_rule;
pub(crate) use trefftz::{effective_degree, skeleton_rule};

/// Volume source `f(x)`.
pub type SourceFn<'a> = &'a (dyn Fn(Point) -> C64 + Sync);
/// Boundary data `g(x, n, tag)` with `n` the outward unit normal.
pub type BoundaryFn<'a> = &'a (dyn Fn(Point, Point, BoundaryTag) -> C64 + Sync);

/// Square complex matrix in triplet or dense form.
#[derive(Debug, Clone)]
pub enum SystemMatrix {
    /// Entries with repeated indices are summed.
    Sparse {
        n: usize,
        triplets: Vec<(usize, usize, C64)>,
    },
    Dense(Mat<C64>),
}

impl SystemMatrix {
    pub fn dim(&self) -> usize {
        match self {
            SystemMatrix::Sparse { n, .. } => *n,
            SystemMatrix::Dense(m) => m.nrows(),
        }
    }

    pub fn to_dense(&self) -> Mat<C64> {
        match self {
            SystemMatrix::Dense(m) => m.clone(),
            SystemMatrix::Sparse { n, triplets } => {
                let mut m = Mat::<C64>::zeros(*n, *n);
                for &(i, j, v) in triplets {
                    m[(i, j)] += v;
                }
                m
            }
        }
    }

    pub fn to_sparse(&self) -> Result<SparseColMat<usize, C64>> {
        let n = self.dim();
        let trip: Vec<Triplet<usize, usize, C64>> = match self {
            SystemMatrix::Sparse { triplets, .. } => triplets.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect(),
            SystemMatrix::Dense(m) => {
                let mut t = Vec::new();
                for j in 0..n {
                    for i in 0..n {
                        let v = m[(i, j)];
                        if v != C64::new(0.0, 0.0) {
                            t.push(Triplet::new(i, j, v));
                        }
                    }
                }
                t
            }
        };
        SparseColMat::try_new_from_triplets(n, n, &trip).map_err(|e| Error::LinearAlgebra(format!("{e:?}")))
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut y = vec![C64::new(0.0, 0.0); n];
        match self {
            SystemMatrix::Sparse { triplets, .. } => {
                for &(i, j, v) in triplets {
                    y[i] += v * x[j];
                }
            }
            SystemMatrix::Dense(m) => {
                for j in 0..n {
                    for i in 0..n {
                        y[i] += m[(i, j)] * x[j];
                    }
                }
            }
        }
        y
    }

    /// `v^H A u`, the form evaluated at `(u, v)`.
    pub fn form(&self, u: &[C64], v: &[C64]) -> C64 {
        let au = self.matvec(u);
        v.iter().zip(&au).map(|(a, b)| a.conj() * b).sum()
    }

    /// `alpha * self + beta * other` for matrices of equal size.
    pub fn combine(&self, alpha: f64, other: &SystemMatrix, beta: C64) -> SystemMatrix {
        match (self, other) {
            (SystemMatrix::Sparse { n, triplets: a }, SystemMatrix::Sparse { triplets: b, .. }) => {
                let mut t: Vec<(usize, usize, C64)> = a.iter().map(|&(i, j, v)| (i, j, v * alpha)).collect();
                t.extend(b.iter().map(|&(i, j, v)| (i, j, v * beta)));
                SystemMatrix::Sparse { n: *n, triplets: t }
            }
            _ => {
                let a = self.to_dense();
                let b = other.to_dense();
                SystemMatrix::Dense(Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
                    a[(i, j)] * alpha + b[(i, j)] * beta
                }))
            }
        }
    }
}

/// Assembled linear system of one method.
#[derive(Debug, Clone)]
pub struct ComplexSystem {
    pub a: SystemMatrix,
    pub rhs: Vec<C64>,
    /// Gram matrix of the `(1,k)` inner product, when requested.
    pub gram: Option<SystemMatrix>,
    pub method: String,
    pub k: f64,
    pub h: f64,
    pub p: usize,
}

impl ComplexSystem {
    pub fn n(&self) -> usize {
        self.rhs.len()
    }

    /// `||A x - rhs|| / ||rhs||` (absolute when `rhs = 0`).
    pub fn residual(&self, x: &[C64]) -> f64 {
        relative_residual(&self.a, x, &self.rhs)
    }

    /// Plain-text dump: `N`, then `N` rows of `re,im` pairs separated by
    /// spaces, then the right-hand side as one row.
    pub fn dump(&self) -> String {
        let m = self.a.to_dense();
        let n = self.n();
        let mut out = String::new();
        let _ = writeln!(out, "{n}");
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| format!("{:?},{:?}", m[(i, j)].re, m[(i, j)].im))
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        let rhs: Vec<String> = self.rhs.iter().map(|z| format!("{:?},{:?}", z.re, z.im)).collect();
        let _ = writeln!(out, "{}", rhs.join(" "));
        out
    }
}

pub fn relative_residual(a: &SystemMatrix, x: &[C64], rhs: &[C64]) -> f64 {
    let ax = a.matvec(x);
    let r: f64 = ax.iter().zip(rhs).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
    let b: f64 = rhs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if b > 0.0 {
        r / b
    } else {
        r
    }
}

/// Largest size handled by dense factorizations.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveStrategy {
    /// Dense LU for dense matrices, sparse LU otherwise.
    Auto,
    SparseLu,
    DenseLu,
    /// Minimum-norm least-squares solution discarding singular values below
    /// `cutoff * sigma_max`.
    TruncatedSvd {
        cutoff: f64,
    },
}

impl SolveStrategy {
    pub const DEFAULT_CUTOFF: f64 = 1e-12;
}

impl std::str::FromStr for SolveStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SolveStrategy::Auto),
            "sparse_lu" => Ok(SolveStrategy::SparseLu),
            "dense_lu" => Ok(SolveStrategy::DenseLu),
            "truncated_svd" => Ok(SolveStrategy::TruncatedSvd {
                cutoff: SolveStrategy::DEFAULT_CUTOFF,
            }),
            other => Err(Error::Parse(format!("unknown solver strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<C64>,
    pub residual: f64,
}

pub fn solve(system: &ComplexSystem, strategy: SolveStrategy) -> Result<Solution> {
    solve_matrix(&system.a, &system.rhs, strategy)
}

pub fn solve_matrix(a: &SystemMatrix, rhs: &[C64], strategy: SolveStrategy) -> Result<Solution> {
    let n = a.dim();
    if rhs.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: rhs.len(),
        });
    }
    if n == 0 {
        return Ok(Solution {
            x: vec![],
            residual: 0.0,
        });
    }
    let strategy = match (strategy, a) {
        (SolveStrategy::Auto, SystemMatrix::Dense(_)) => SolveStrategy::DenseLu,
        (SolveStrategy::Auto, SystemMatrix::Sparse { .. }) => SolveStrategy::SparseLu,
        (s, _) => s,
    };
    let b = Col::<C64>::from_fn(n, |i| rhs[i]);
    let x: Vec<C64> = match strategy {
        SolveStrategy::SparseLu => {
            let sp = a.to_sparse()?;
            let lu = sp.sp_lu().map_err(|_| Error::Singular)?;
            let x = faer::linalg::solvers::Solve::solve(&lu, &b);
            (0..n).map(|i| x[i]).collect()
        }
        SolveStrategy::DenseLu => {
            if n > DENSE_LIMIT {
                return Err(Error::Unsupported(format!(
                    "dense LU limited to N <= {DENSE_LIMIT}, got {n}"
                )));
            }
            let m = a.to_dense();
            let lu = m.partial_piv_lu();
            let u = lu.U();
            let diag: Vec<f64> = (0..n).map(|i| u[(i, i)].norm()).collect();
            let max = diag.iter().cloned().fold(0.0, f64::max);
            let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
            if !(max > 0.0) || min <= 1e-15 * max {
                return Err(Error::Singular);
            }
            let x = faer::linalg::solvers::Solve::solve(&lu, &b);
            (0..n).map(|i| x[i]).collect()
        }
        SolveStrategy::TruncatedSvd { cutoff } => {
            if n > DENSE_LIMIT {
                return Err(Error::Unsupported(format!(
                    "SVD limited to N <= {DENSE_LIMIT}, got {n}"
                )));
            }
            truncated_svd_solve(&a.to_dense(), rhs, cutoff)?
        }
        SolveStrategy::Auto => unreachable!(),
    };
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular);
    }
    let residual = relative_residual(a, &x, rhs);
    Ok(Solution { x, residual })
}

fn truncated_svd_solve(m: &Mat<C64>, rhs: &[C64], cutoff: f64) -> Result<Vec<C64>> {
    let n = m.nrows();
    let svd = m
        .svd()
        .map_err(|e| Error::LinearAlgebra(format!("SVD failed: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let smax = s[0].re;
    let mut x = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        let sj = s[j].re;
        if sj <= cutoff * smax || sj == 0.0 {
            continue;
        }
        // (u_j^H b) / s_j
        let mut c = C64::new(0.0, 0.0);
        for i in 0..n {
            c += u[(i, j)].conj() * rhs[i];
        }
        c /= sj;
        for i in 0..n {
            x[i] += v[(i, j)] * c;
        }
    }
    Ok(x)
}

/// Discrete inf-sup constant `sigma_min(L^{-1} B L^{-H})` with `M = L L^H`.
pub fn infsup_probe(b: &SystemMatrix, m: &SystemMatrix) -> Result<f64> {
    let n = b.dim();
    if m.dim() != n {
        return Err(Error::Dimension {
            expected: n,
            got: m.dim(),
        });
    }
    if n > DENSE_LIMIT {
        return Err(Error::Unsupported(format!(
            "inf-sup probe limited to N <= {DENSE_LIMIT}, got {n}"
        )));
    }
    let md = m.to_dense();
    let llt = md.llt(Side::Lower).map_err(|_| Error::NotPositiveDefinite)?;
    let l = llt.L();
    let mut x = b.to_dense();
    l.solve_lower_triangular_in_place(x.as_mut());
    let mut z = x.adjoint().to_owned();
    l.solve_lower_triangular_in_place(z.as_mut());
    let sv = z
        .singular_values()
        .map_err(|e| Error::LinearAlgebra(format!("SVD failed: {e:?}")))?;
    Ok(sv.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Hermitian and positive definite (Cholesky succeeds)?
pub fn is_hermitian_pd(m: &SystemMatrix, tol: f64) -> bool {
    let d = m.to_dense();
    let n = d.nrows();
    let scale = (0..n).map(|i| d[(i, i)].norm()).fold(0.0, f64::max);
    for i in 0..n {
        for j in 0..n {
            if (d[(i, j)] - d[(j, i)].conj()).norm() > tol * scale {
                return false;
            }
        }
    }
    d.llt(Side::Lower).is_ok()
}
