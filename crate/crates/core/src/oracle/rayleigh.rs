//! Discrete Rayleigh quotients `∫|∇f|^p / ∫|f|^p` for P1 functions.
//!
//! Gradients are exact per element. The `∫|f|^p` integrals and the mean
//! constraint `∫|f|^{p−2} f = 0` use the three edge midpoints of each
//! element with weight `area/3`. The rule is exact for quadratics, so at
//! `p = 2` the denominator equals the consistent mass form.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fem::{element_gradients, neumann_mu2};
use super::mesh::TriangleMesh;
use super::GridFunction;
use crate::error::{require_p, Error, Result};
use crate::numeric::bisect;

/// Relative tolerance on the mean constraint.
pub const CONSTRAINT_TOL: f64 = 1e-8;
/// Label attached to every minimizer output.
pub const ESTIMATE_LABEL: &str = "estimate, not certificate";

/// Quadrature points of the mesh: `(weight, node a, node b)`, evaluated at
/// the midpoint of edge `ab`.
pub fn quadrature_points(mesh: &TriangleMesh) -> Vec<(f64, usize, usize)> {
    let mut q = Vec::with_capacity(3 * mesh.elements().len());
    for (e, el) in mesh.elements().iter().enumerate() {
        let w = mesh.element_area(e) / 3.0;
        for k in 0..3 {
            q.push((w, el[k], el[(k + 1) % 3]));
        }
    }
    q
}

fn phi(t: f64, p: f64) -> f64 {
    t.abs().powf(p - 2.0) * t
}

fn check_len(mesh: &TriangleMesh, f: &GridFunction) -> Result<()> {
    if f.len() != mesh.nodes().len() {
        return Err(Error::LengthMismatch { expected: mesh.nodes().len(), found: f.len() });
    }
    Ok(())
}

/// `Σ w |f_q|^{p−2} f_q` together with the scale `Σ w |f_q|^{p−1}`.
fn constraint_parts(quad: &[(f64, usize, usize)], v: &[f64], p: f64, shift: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut scale = 0.0;
    for &(w, a, b) in quad {
        let t = 0.5 * (v[a] + v[b]) - shift;
        sum += w * phi(t, p);
        scale += w * t.abs().powf(p - 1.0);
    }
    (sum, scale)
}

/// Value of the discrete constraint `∫|f|^{p−2} f`.
pub fn constraint_value(mesh: &TriangleMesh, f: &GridFunction, p: f64) -> Result<f64> {
    check_len(mesh, f)?;
    Ok(constraint_parts(&quadrature_points(mesh), f.values(), p, 0.0).0)
}

/// Shifts `f` by the constant that makes the discrete constraint vanish.
pub fn project_constraint(mesh: &TriangleMesh, f: &GridFunction, p: f64) -> Result<GridFunction> {
    require_p(p)?;
    check_len(mesh, f)?;
    let quad = quadrature_points(mesh);
    let v = f.values();
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    if !(hi > lo) {
        return Err(Error::ConstantFunction);
    }
    let c = bisect(|c| constraint_parts(&quad, v, p, c).0, lo, hi, 1e-15 * (hi - lo).max(hi.abs()))
        .expect("constraint changes sign between min and max");
    Ok(GridFunction::from_values(v.iter().map(|x| x - c).collect()))
}

/// `∫|∇f|^p / ∫|f|^p`. With `project` the constraint is enforced by a
/// constant shift first; otherwise a violated constraint is an error.
pub fn rayleigh_quotient(mesh: &TriangleMesh, f: &GridFunction, p: f64, project: bool) -> Result<f64> {
    require_p(p)?;
    check_len(mesh, f)?;
    let quad = quadrature_points(mesh);
    let owned;
    let f = if project {
        owned = project_constraint(mesh, f, p)?;
        &owned
    } else {
        let (sum, scale) = constraint_parts(&quad, f.values(), p, 0.0);
        if sum.abs() > CONSTRAINT_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::ConstraintViolated(sum));
        }
        f
    };
    let (num, den) = quotient_parts(mesh, &quad, f.values(), p);
    if !(num > 0.0) || !(den > 0.0) {
        return Err(Error::ConstantFunction);
    }
    Ok(num / den)
}

fn quotient_parts(mesh: &TriangleMesh, quad: &[(f64, usize, usize)], v: &[f64], p: f64) -> (f64, f64) {
    let mut num = 0.0;
    for (e, el) in mesh.elements().iter().enumerate() {
        let (g, area) = element_gradients(mesh, e);
        let gx = g[0][0] * v[el[0]] + g[1][0] * v[el[1]] + g[2][0] * v[el[2]];
        let gy = g[0][1] * v[el[0]] + g[1][1] * v[el[1]] + g[2][1] * v[el[2]];
        num += area * gx.hypot(gy).powf(p);
    }
    let den = quad.iter().map(|&(w, a, b)| w * (0.5 * (v[a] + v[b])).abs().powf(p)).sum();
    (num, den)
}

/// Gradient of the quotient with respect to nodal values.
fn quotient_gradient(mesh: &TriangleMesh, quad: &[(f64, usize, usize)], v: &[f64], p: f64) -> (f64, Vec<f64>) {
    let (num, den) = quotient_parts(mesh, quad, v, p);
    let r = num / den;
    let mut g = vec![0.0; v.len()];
    for (e, el) in mesh.elements().iter().enumerate() {
        let (gr, area) = element_gradients(mesh, e);
        let gx = gr[0][0] * v[el[0]] + gr[1][0] * v[el[1]] + gr[2][0] * v[el[2]];
        let gy = gr[0][1] * v[el[0]] + gr[1][1] * v[el[1]] + gr[2][1] * v[el[2]];
        let mag = gx.hypot(gy);
        if mag == 0.0 {
            continue;
        }
        let c = p * area * mag.powf(p - 2.0);
        for k in 0..3 {
            g[el[k]] += c * (gx * gr[k][0] + gy * gr[k][1]);
        }
    }
    for &(w, a, b) in quad {
        let t = 0.5 * (v[a] + v[b]);
        let d = -r * p * w * phi(t, p) * 0.5;
        g[a] += d;
        g[b] += d;
    }
    for x in &mut g {
        *x /= den;
    }
    (r, g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerResult {
    /// Smallest quotient found: an upper estimate of the discrete `μ_p`.
    pub estimate: f64,
    pub p: f64,
    pub iterations: usize,
    pub final_step: f64,
    pub starts: usize,
    pub label: String,
}

/// Number of random starts besides the `p = 2` eigenvector.
pub const RANDOM_STARTS: usize = 2;

fn low_frequency_start(mesh: &TriangleMesh, rng: &mut ChaCha8Rng) -> GridFunction {
    let (lo, hi) = mesh.bbox();
    let coef: Vec<f64> = (0..9).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    GridFunction::from_values(
        mesh.nodes()
            .iter()
            .map(|x| {
                let u = (x[0] - lo[0]) / (hi[0] - lo[0]);
                let v = (x[1] - lo[1]) / (hi[1] - lo[1]);
                let mut s = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        if k + l > 0 {
                            let pi = std::f64::consts::PI;
                            s += coef[3 * k + l] * (k as f64 * pi * u).cos() * (l as f64 * pi * v).cos();
                        }
                    }
                }
                s
            })
            .collect(),
    )
}

/// Normalized gradient descent with backtracking from the `p = 2`
/// eigenvector and seeded random starts, re-projecting the constraint after
/// every step. The result is an upper estimate of the discrete `μ_p`.
pub fn minimize_rayleigh_p(mesh: &TriangleMesh, p: f64, iterations: usize, seed: u64) -> Result<MinimizerResult> {
    require_p(p)?;
    let quad = quadrature_points(mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![neumann_mu2(mesh)?.eigenvector];
    for _ in 0..RANDOM_STARTS {
        starts.push(low_frequency_start(mesh, &mut rng));
    }
    let per_start = (iterations / starts.len()).max(1);
    let mut best = f64::INFINITY;
    let mut used = 0;
    let mut final_step = 0.0;
    for start in &starts {
        let mut u = project_constraint(mesh, start, p)?.values().to_vec();
        let mut step = 0.1;
        let (mut r, mut g) = quotient_gradient(mesh, &quad, &u, p);
        for _ in 0..per_start {
            used += 1;
            let amp = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if gmax == 0.0 || step < 1e-14 {
                break;
            }
            let trial: Vec<f64> = u.iter().zip(&g).map(|(x, d)| x - step * amp * d / gmax).collect();
            let trial = match project_constraint(mesh, &GridFunction::from_values(trial), p) {
                Ok(t) => t.values().to_vec(),
                Err(_) => {
                    step *= 0.5;
                    continue;
                }
            };
            let (rt, gt) = quotient_gradient(mesh, &quad, &trial, p);
            if rt.is_finite() && rt < r {
                u = trial;
                r = rt;
                g = gt;
                step *= 1.2;
            } else {
                step *= 0.5;
            }
        }
        if r < best {
            best = r;
            final_step = step;
        }
    }
    Ok(MinimizerResult {
        estimate: best,
        p,
        iterations: used,
        final_step,
        starts: starts.len(),
        label: ESTIMATE_LABEL.into(),
    })
}
