//! The design variable: nodal phase field, the affine density map, the
//! quartic double well and the Ginzburg-Landau interface energy.

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::mesh::Mesh;

/// Two-material parameters. `c` is the softness ratio of the weak phase,
/// `e_pref` the Young-type prefactor mu(3 lambda + 2 mu)/(lambda + mu) of
/// the bending terms.
#[derive(Debug, Clone, Copy)]
pub struct MaterialParams {
    pub c: f64,
    pub mu_norm: f64,
    pub lambda_norm: f64,
}

impl MaterialParams {
    pub fn new(c: f64, mu_norm: f64, lambda_norm: f64) -> Result<MaterialParams> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::Config(format!("softness ratio c must be in (0,1], got {c}")));
        }
        if !(mu_norm > 0.0) {
            return Err(Error::Config(format!("mu_norm must be positive, got {mu_norm}")));
        }
        if !(lambda_norm >= 0.0) {
            return Err(Error::Config(format!(
                "lambda_norm must be nonnegative, got {lambda_norm}"
            )));
        }
        Ok(MaterialParams {
            c,
            mu_norm,
            lambda_norm,
        })
    }

    /// mu (3 lambda + 2 mu) / (lambda + mu)
    pub fn e_pref(&self) -> f64 {
        self.mu_norm * (3.0 * self.lambda_norm + 2.0 * self.mu_norm)
            / (self.lambda_norm + self.mu_norm)
    }
}

/// Nodal phase field with its mass target m = m1 |S|.
#[derive(Debug, Clone)]
pub struct PhaseField {
    pub values: Vec<f64>,
    pub mass_target: f64,
}

impl PhaseField {
    pub fn new(values: Vec<f64>, mass_target: f64) -> PhaseField {
        PhaseField {
            values,
            mass_target,
        }
    }

    /// Lumped-mass integral of the nodal interpolant.
    pub fn mass(&self, lumped: &[f64]) -> f64 {
        dot(lumped, &self.values)
    }
}

/// Density map u = phi (1 - c) + c, so u ranges over [c, 1].
pub fn density_from_phase(phi: &[f64], params: &MaterialParams) -> Vec<f64> {
    phi.iter().map(|&p| p * (1.0 - params.c) + params.c).collect()
}

/// F(phi) = phi^2 (1 - phi)^2 / 4
pub fn double_well(phi: f64) -> f64 {
    0.25 * phi * phi * (1.0 - phi) * (1.0 - phi)
}

/// f(phi) = (2 phi^3 - 3 phi^2 + phi) / 2 = F'(phi)
pub fn double_well_derivative(phi: f64) -> f64 {
    0.5 * (2.0 * phi * phi * phi - 3.0 * phi * phi + phi)
}

/// E_eps = int (eps/2) |grad I_h phi|^2 + (1/eps) F(I_h phi).
///
/// The gradient is elementwise constant; the well term uses the order-2
/// midpoint rule on the nodal interpolant.
pub fn ginzburg_landau_energy(mesh: &Mesh, phi: &[f64], eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Usage(format!("eps must be positive, got {eps}")));
    }
    let mut energy = 0.0;
    for e in 0..mesh.num_elements() {
        let geo = mesh.element_geometry(e)?;
        let tri = mesh.elements[e];
        let v = [phi[tri[0]], phi[tri[1]], phi[tri[2]]];
        let mut gx = 0.0;
        let mut gy = 0.0;
        for i in 0..3 {
            gx += v[i] * geo.grad_shape[i][0];
            gy += v[i] * geo.grad_shape[i][1];
        }
        energy += 0.5 * eps * (gx * gx + gy * gy) * geo.area;
        let mut well = 0.0;
        for i in 0..3 {
            let mid = 0.5 * (v[i] + v[(i + 1) % 3]);
            well += double_well(mid) / 3.0;
        }
        energy += well * geo.area / eps;
    }
    Ok(energy)
}

/// Truncate to [0,1] and reset boundary nodes to 0.
pub fn clamp_to_box(mesh: &Mesh, phi: &mut [f64]) {
    for v in phi.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    for &i in &mesh.boundary_nodes {
        phi[i] = 0.0;
    }
}
