//! First variations of the objectives with respect to the phase field,
//! assembled as nodal force vectors for the gradient flow.
//!
//! Sign convention: the assembled step force is
//! `F_j = -(gamma/eps) int f(phi) phi_j - sigma1 dD_mean - sigma2 dRM
//!  - sigma3 dD_T`, so that a small step decreases the composite objective
//! `gamma E_eps + sigma1 D_mean + sigma2 RM + sigma3 D_T`. The torsion
//! variation already carries the `1/mu_norm` factor of the Prandtl
//! convention (see the rigidity module), so `sigma3` multiplies it
//! directly.

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::mesh::{quadrature_points, Mesh};
use crate::phase_field::{double_well_derivative, MaterialParams};
use crate::rigidity::{element_mean, prandtl_residual, CenteredFrame};

/// Nodal force vector: entry j is the functional tested against basis
/// function j.
pub type ForceVector = Vec<f64>;

/// Variations of the three second moments. Each entry j of a returned
/// vector is `dD[phi_j]` with the centering correction
/// `b_k = (1/m) int x_k phi_j` included.
pub fn var_moments(
    mesh: &Mesh,
    phi: &[f64],
    params: &MaterialParams,
    frame: &CenteredFrame,
) -> Result<(ForceVector, ForceVector, ForceVector)> {
    let n = mesh.num_nodes();
    let c = params.c;
    let quad4 = quadrature_points(4)?;
    let quad2 = quadrature_points(2)?;

    // w2_j = int x2hat^2 phi_j, w3_j, w23_j (quartic integrands: order 4)
    let mut w2 = vec![0.0; n];
    let mut w3 = vec![0.0; n];
    let mut w23 = vec![0.0; n];
    // q2_j = int x2 phi_j, q3_j (order 2)
    let mut q2 = vec![0.0; n];
    let mut q3 = vec![0.0; n];
    // first moments of u in hatted coordinates (vanish by centering)
    let mut i2 = 0.0;
    let mut i3 = 0.0;

    for e in 0..mesh.num_elements() {
        let geo = mesh.element_geometry(e)?;
        let tri = mesh.elements[e];
        let p = mesh.element_coords(e);
        for (lambda, w) in &quad4 {
            let mut x = 0.0;
            let mut y = 0.0;
            for i in 0..3 {
                x += lambda[i] * p[i][0];
                y += lambda[i] * p[i][1];
            }
            let h = frame.hat([x, y]);
            let wa = w * geo.area;
            for i in 0..3 {
                let basis = lambda[i];
                w2[tri[i]] += wa * basis * h[0] * h[0];
                w3[tri[i]] += wa * basis * h[1] * h[1];
                w23[tri[i]] += wa * basis * h[0] * h[1];
            }
        }
        for (lambda, w) in &quad2 {
            let mut uq = 0.0;
            let mut x = 0.0;
            let mut y = 0.0;
            for i in 0..3 {
                uq += lambda[i] * (phi[tri[i]] * (1.0 - c) + c);
                x += lambda[i] * p[i][0];
                y += lambda[i] * p[i][1];
            }
            let h = frame.hat([x, y]);
            let wa = w * geo.area;
            for i in 0..3 {
                q2[tri[i]] += wa * lambda[i] * x;
                q3[tri[i]] += wa * lambda[i] * y;
            }
            i2 += wa * uq * h[0];
            i3 += wa * uq * h[1];
        }
    }

    let m = frame.u_mass;
    let s = 1.0 - c;
    let d2: ForceVector = (0..n).map(|j| s * (w2[j] - 2.0 * i2 / m * q2[j])).collect();
    let d3: ForceVector = (0..n).map(|j| s * (w3[j] - 2.0 * i3 / m * q3[j])).collect();
    let d23: ForceVector = (0..n)
        .map(|j| s * (w23[j] - (i3 / m * q2[j] + i2 / m * q3[j])))
        .collect();
    Ok((d2, d3, d23))
}

/// dD_mean = e_pref (dDx2 + dDx3) / 2
pub fn var_dmean(
    var_dx2: &[f64],
    var_dx3: &[f64],
    params: &MaterialParams,
) -> ForceVector {
    let e = params.e_pref();
    var_dx2
        .iter()
        .zip(var_dx3)
        .map(|(a, b)| e * 0.5 * (a + b))
        .collect()
}

/// Regularized variation of RM with smoothing parameter `theta1 > 0`.
pub fn var_rm(
    var_dx2: &[f64],
    var_dx3: &[f64],
    var_dx2x3: &[f64],
    moments: (f64, f64, f64),
    params: &MaterialParams,
    theta1: f64,
) -> Result<ForceVector> {
    if !(theta1 > 0.0) {
        return Err(Error::Usage(format!("theta1 must be positive, got {theta1}")));
    }
    let (dx2, dx3, dx2x3) = moments;
    let diff = dx2 - dx3;
    let denom = 2.0 * (diff * diff + 4.0 * dx2x3 * dx2x3 + theta1).sqrt();
    let e = params.e_pref();
    Ok((0..var_dx2.len())
        .map(|j| e * (diff * (var_dx2[j] - var_dx3[j]) + 4.0 * dx2x3 * var_dx2x3[j]) / denom)
        .collect())
}

/// Adjoint variation of the torsional rigidity:
/// entry j = int (1-c)/(mu_norm u^2) |grad Phi|^2 phi_j, with the density
/// taken elementwise constant as in the Prandtl assembly. All entries are
/// nonnegative. Rejects a stale stress function.
pub fn var_dt(
    mesh: &Mesh,
    phi: &[f64],
    params: &MaterialParams,
    phi_stress: &[f64],
) -> Result<ForceVector> {
    let u: Vec<f64> = phi
        .iter()
        .map(|&p| p * (1.0 - params.c) + params.c)
        .collect();
    let residual = prandtl_residual(mesh, &u, params, phi_stress)?;
    if residual > 1e-6 {
        return Err(Error::Usage(format!(
            "stale Prandtl solution: residual {residual:.3e}"
        )));
    }
    let mut force = vec![0.0; mesh.num_nodes()];
    let s = 1.0 - params.c;
    for e in 0..mesh.num_elements() {
        let geo = mesh.element_geometry(e)?;
        let tri = mesh.elements[e];
        let mut gx = 0.0;
        let mut gy = 0.0;
        for i in 0..3 {
            gx += phi_stress[tri[i]] * geo.grad_shape[i][0];
            gy += phi_stress[tri[i]] * geo.grad_shape[i][1];
        }
        let u_e = element_mean(mesh, &u, e);
        let weight = s / (params.mu_norm * u_e * u_e) * (gx * gx + gy * gy) * geo.area / 3.0;
        for &node in &tri {
            force[node] += weight;
        }
    }
    Ok(force)
}

/// Explicit well force of the interface energy:
/// entry j = (1/eps) int f(I_h phi) phi_j, midpoint rule. The gradient part
/// enters the step implicitly through the tau*gamma*K term.
pub fn var_energy_well(mesh: &Mesh, phi: &[f64], eps: f64) -> Result<ForceVector> {
    if !(eps > 0.0) {
        return Err(Error::Usage(format!("eps must be positive, got {eps}")));
    }
    let mut force = vec![0.0; mesh.num_nodes()];
    for e in 0..mesh.num_elements() {
        let geo = mesh.element_geometry(e)?;
        let tri = mesh.elements[e];
        let v = [phi[tri[0]], phi[tri[1]], phi[tri[2]]];
        for i in 0..3 {
            let j = (i + 1) % 3;
            let f_mid = double_well_derivative(0.5 * (v[i] + v[j]));
            // midpoint carries weight area/3; each adjacent basis is 1/2
            let contrib = f_mid * geo.area / 6.0 / eps;
            force[tri[i]] += contrib;
            force[tri[j]] += contrib;
        }
    }
    Ok(force)
}

/// Objective weights of one flow step.
#[derive(Debug, Clone, Copy)]
pub struct Weights {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub gamma: f64,
}

/// Combine the explicit variations into the step right-hand side
/// `F_tilde = (tau/eps) F + M phi_n`, with Dirichlet entries zeroed.
/// `scale` is the full explicit factor tau/eps of the accelerated flow.
#[allow(clippy::too_many_arguments)]
pub fn assemble_total_force(
    mesh: &Mesh,
    mass: &SparseMatrix,
    phi_n: &[f64],
    well: &[f64],
    d_mean: &[f64],
    rm: &[f64],
    dt: &[f64],
    weights: &Weights,
    scale: f64,
) -> Result<ForceVector> {
    let n = mesh.num_nodes();
    let m_phi = mass.mul_vec(phi_n);
    let mut out = vec![0.0; n];
    for j in 0..n {
        let f_j = -weights.gamma * well[j]
            - weights.sigma1 * d_mean[j]
            - weights.sigma2 * rm[j]
            - weights.sigma3 * dt[j];
        out[j] = scale * f_j + m_phi[j];
        if !out[j].is_finite() {
            return Err(Error::Numerical(format!("non-finite force entry at node {j}")));
        }
    }
    for &i in &mesh.boundary_nodes {
        out[i] = 0.0;
    }
    Ok(out)
}
