//! P1 finite elements for the Neumann Laplacian.
//!
//! Stiffness and consistent mass matrices are assembled in element order so
//! the output is bit-reproducible. The smallest nonzero eigenvalue is found on
//! the mass-orthogonal complement of the constants: a dense generalized
//! eigensolve for small meshes, block shift-and-invert subspace iteration
//! with a sparse Cholesky factor otherwise.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mesh::TriangleMesh;
use super::GridFunction;
use crate::error::{Error, Result};

/// Meshes with at most this many nodes use the dense solver.
pub const DENSE_NODE_LIMIT: usize = 800;
/// Relative residual `‖Kx − μMx‖ / (μ ‖Mx‖)` required of the eigenpair.
pub const RESIDUAL_TARGET: f64 = 1e-8;
const BLOCK: usize = 8;
const MAX_ITERATIONS: usize = 500;
const START_SEED: u64 = 0x5eed_f00d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Dense,
    ShiftInvert,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub mu2: f64,
    pub residual: f64,
    pub eigenvector: GridFunction,
    pub dof: usize,
    pub method: SolveMethod,
    pub iterations: usize,
}

/// Per-element gradients of the three hat functions and the element area.
pub(crate) fn element_gradients(mesh: &TriangleMesh, e: usize) -> ([[f64; 2]; 3], f64) {
    let [a, b, c] = mesh.element_points(e);
    let area = mesh.element_area(e);
    let inv = 1.0 / (2.0 * area);
    let g = [
        [(b[1] - c[1]) * inv, (c[0] - b[0]) * inv],
        [(c[1] - a[1]) * inv, (a[0] - c[0]) * inv],
        [(a[1] - b[1]) * inv, (b[0] - a[0]) * inv],
    ];
    (g, area)
}

/// Stiffness and consistent mass matrices.
pub fn assemble(mesh: &TriangleMesh) -> (CscMatrix<f64>, CscMatrix<f64>) {
    let n = mesh.nodes().len();
    let mut k = CooMatrix::new(n, n);
    let mut m = CooMatrix::new(n, n);
    for (e, el) in mesh.elements().iter().enumerate() {
        let (g, area) = element_gradients(mesh, e);
        for i in 0..3 {
            for j in 0..3 {
                let kij = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                let mij = area / 12.0 * if i == j { 2.0 } else { 1.0 };
                k.push(el[i], el[j], kij);
                m.push(el[i], el[j], mij);
            }
        }
    }
    (CscMatrix::from(&k), CscMatrix::from(&m))
}

fn spmv(a: &CscMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    let mut y = DVector::zeros(a.nrows());
    for (j, col) in a.col_iter().enumerate() {
        let xj = x[j];
        for (&i, &v) in col.row_indices().iter().zip(col.values()) {
            y[i] += v * xj;
        }
    }
    y
}

fn spmm(a: &CscMatrix<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut y = DMatrix::zeros(a.nrows(), x.ncols());
    for c in 0..x.ncols() {
        let col = spmv(a, &x.column(c).into_owned());
        y.set_column(c, &col);
    }
    y
}

/// Removes the mass-weighted mean from every column.
fn deflate(x: &mut DMatrix<f64>, m_ones: &DVector<f64>, total: f64) {
    for mut col in x.column_iter_mut() {
        let mean = m_ones.dot(&col) / total;
        col.add_scalar_mut(-mean);
    }
}

/// Relative residual of `(mu, x)`.
pub fn eigen_residual(k: &CscMatrix<f64>, m: &CscMatrix<f64>, mu: f64, x: &DVector<f64>) -> f64 {
    let kx = spmv(k, x);
    let mx = spmv(m, x);
    (&kx - &mx * mu).norm() / (mu.abs() * mx.norm())
}

/// Scales to unit mass norm with the largest entry positive.
fn normalize(x: &mut DVector<f64>, m: &CscMatrix<f64>) {
    let mnorm = x.dot(&spmv(m, x)).sqrt();
    *x /= mnorm;
    let imax = x.iamax();
    if x[imax] < 0.0 {
        x.neg_mut();
    }
}

/// Smallest eigenpair of the pencil `(A, B)` with `B` symmetric positive
/// definite, both small and dense. Returns eigenvalues ascending and
/// `B`-orthonormal eigenvectors.
fn small_generalized(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let bs = (b + b.transpose()) * 0.5;
    let chol = bs.cholesky().ok_or_else(|| Error::LinearAlgebra("mass block is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::LinearAlgebra("singular Cholesky factor".into()))?;
    let reduced = &linv * a * linv.transpose();
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let eig = SymmetricEigen::new(reduced);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(a.nrows(), order.len());
    for (c, &i) in order.iter().enumerate() {
        let w = eig.eigenvectors.column(i);
        vectors.set_column(c, &(linv.transpose() * w));
    }
    Ok((values, vectors))
}

/// Dense generalized eigensolve; the second smallest eigenvalue is `μ₂`.
pub fn neumann_mu2_dense(mesh: &TriangleMesh) -> Result<EigenResult> {
    let (k, m) = assemble(mesh);
    let n = k.nrows();
    let kd = DMatrix::from(&k);
    let md = DMatrix::from(&m);
    let (values, vectors) = small_generalized(&kd, &md)?;
    let mu2 = values[1];
    let mut x = vectors.column(1).into_owned();
    let ones = DVector::from_element(n, 1.0);
    let m_ones = spmv(&m, &ones);
    let total = m_ones.sum();
    let shift = m_ones.dot(&x) / total;
    x.add_scalar_mut(-shift);
    normalize(&mut x, &m);
    let residual = eigen_residual(&k, &m, mu2, &x);
    if !(residual <= RESIDUAL_TARGET) {
        return Err(Error::EigenNotConverged { iterations: 1, residual });
    }
    Ok(EigenResult {
        mu2,
        residual,
        eigenvector: GridFunction::from_values(x.as_slice().to_vec()),
        dof: n,
        method: SolveMethod::Dense,
        iterations: 1,
    })
}

/// Block shift-and-invert subspace iteration with Rayleigh–Ritz, restricted
/// to the mass-orthogonal complement of the constants.
pub fn neumann_mu2_sparse(mesh: &TriangleMesh) -> Result<EigenResult> {
    let (k, m) = assemble(mesh);
    let n = k.nrows();
    let b = BLOCK.min(n - 1);
    let (lo, hi) = mesh.bbox();
    let diam2 = (hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2);
    let sigma = 1.0 / diam2;
    let shifted = &k + &(&m * sigma);
    let chol = CscCholesky::factor(&shifted).map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let ones = DVector::from_element(n, 1.0);
    let m_ones = spmv(&m, &ones);
    let total = m_ones.sum();

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x = DMatrix::from_fn(n, b, |_, _| rng.random::<f64>() - 0.5);
    deflate(&mut x, &m_ones, total);
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let mut y = chol.solve(&spmm(&m, &x));
        deflate(&mut y, &m_ones, total);
        let q = y.qr().q();
        let kq = spmm(&k, &q);
        let mq = spmm(&m, &q);
        let (values, vectors) = small_generalized(&(q.transpose() * &kq), &(q.transpose() * &mq))?;
        x = &q * &vectors;
        let mut v = x.column(0).into_owned();
        normalize(&mut v, &m);
        residual = eigen_residual(&k, &m, values[0], &v);
        if residual <= RESIDUAL_TARGET * 1e-2 || (residual <= RESIDUAL_TARGET && it >= 3) {
            return Ok(EigenResult {
                mu2: values[0],
                residual,
                eigenvector: GridFunction::from_values(v.as_slice().to_vec()),
                dof: n,
                method: SolveMethod::ShiftInvert,
                iterations: it,
            });
        }
    }
    Err(Error::EigenNotConverged { iterations: MAX_ITERATIONS, residual })
}

/// First nontrivial Neumann eigenvalue of the P1 discretization.
pub fn neumann_mu2(mesh: &TriangleMesh) -> Result<EigenResult> {
    if mesh.nodes().len() <= DENSE_NODE_LIMIT {
        neumann_mu2_dense(mesh)
    } else {
        neumann_mu2_sparse(mesh)
    }
}

/// Discrete Poincaré constant `μ₂^{−1/2}`.
pub fn poincare_constant_p2(mesh: &TriangleMesh) -> Result<f64> {
    Ok(neumann_mu2(mesh)?.mu2.powf(-0.5))
}

#[cfg(test)]
mod tests {
    use super::super::mesh::{mesh_domain, DomainSpec};
    use super::*;
    use std::f64::consts::PI;

    fn square(h: f64) -> TriangleMesh {
        mesh_domain(&DomainSpec::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, h).unwrap()
    }

    #[test]
    fn mass_sums_to_area_and_stiffness_kills_constants() {
        let mesh = mesh_domain(&DomainSpec::Star { delta: 1.0 }, 0.2).unwrap();
        let (k, m) = assemble(&mesh);
        let ones = DVector::from_element(k.nrows(), 1.0);
        assert!((ones.dot(&spmv(&m, &ones)) - mesh.area()).abs() < 1e-12);
        assert!(spmv(&k, &ones).amax() < 1e-12);
    }

    #[test]
    fn dense_and_sparse_agree() {
        let mesh = square(0.1);
        let d = neumann_mu2_dense(&mesh).unwrap();
        let s = neumann_mu2_sparse(&mesh).unwrap();
        assert!((d.mu2 - s.mu2).abs() < 1e-8 * d.mu2);
        assert!(d.residual <= RESIDUAL_TARGET && s.residual <= RESIDUAL_TARGET);
    }

    #[test]
    fn square_converges_from_above_second_order() {
        let mus: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&h| neumann_mu2(&square(h)).unwrap().mu2).collect();
        let exact = PI * PI;
        assert!(mus.iter().all(|&mu| mu > exact));
        assert!(mus.windows(2).all(|w| w[1] <= w[0]));
        for w in mus.windows(2) {
            let ratio = (w[0] - exact) / (w[1] - exact);
            assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
        }
        assert!((mus[2] - exact) / exact < 0.01);
    }

    #[test]
    fn eigenvector_is_mean_free() {
        let mesh = square(0.05);
        let r = neumann_mu2(&mesh).unwrap();
        let (_, m) = assemble(&mesh);
        let x = DVector::from_vec(r.eigenvector.values().to_vec());
        let ones = DVector::from_element(x.len(), 1.0);
        assert!(ones.dot(&spmv(&m, &x)).abs() <= 1e-10);
    }

    #[test]
    fn rectangle_and_disk_values() {
        let rect = mesh_domain(&DomainSpec::Rectangle { lo: [0.0, 0.0], hi: [2.0, 1.0] }, 0.05).unwrap();
        let mu = neumann_mu2(&rect).unwrap().mu2;
        assert!((mu - PI * PI / 4.0).abs() / (PI * PI / 4.0) < 0.01);
        let disk = mesh_domain(&DomainSpec::Disk { radius: 1.0, center: [0.0, 0.0] }, 0.05).unwrap();
        let mu = neumann_mu2(&disk).unwrap().mu2;
        assert!((mu - 3.38994).abs() / 3.38994 < 0.02);
        assert!((poincare_constant_p2(&disk).unwrap() - 0.54323).abs() / 0.54323 < 0.02);
    }
}
