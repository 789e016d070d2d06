//! Semi-implicit pseudo-time stepping: each step solves the
//! mass-constrained saddle system
//! `(M + tau gamma K) phi + lambda L = F_tilde`, `L . phi = m`,
//! then clamps to [0,1] and re-projects the mass.

use crate::error::{Error, Result};
use crate::linalg::{
    assemble_lumped_mass, assemble_mass, assemble_stiffness_unit, dot, solve_saddle,
    SaddleSystem, SparseMatrix,
};
use crate::mesh::{generate_disk_mesh, Mesh};
use crate::phase_field::{
    clamp_to_box, density_from_phase, ginzburg_landau_energy, MaterialParams, PhaseField,
};
use crate::rigidity::{self, RigidityReport};
use crate::sensitivity::{
    assemble_total_force, var_dmean, var_dt, var_energy_well, var_moments, var_rm, Weights,
};

/// Stability bound used only to warn: tau <= K_STAB * eps^3 is the safe
/// regime; larger steps may lose monotone energy decay.
pub const K_STAB: f64 = 1.0;

/// Full description of one optimization run.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub gamma: f64,
    pub eps: f64,
    pub tau: f64,
    pub c: f64,
    pub mu_norm: f64,
    pub lambda_norm: f64,
    /// Stiff-phase volume fraction, in (0,1).
    pub m1: f64,
    /// Disk domain radius.
    pub radius: f64,
    /// Radius of the circular initial condition.
    pub inner_radius: f64,
    /// Ellipticity of the initial level set: semi-axes
    /// inner_radius*(1 +/- e). Zero keeps the circle; a small nonzero value
    /// deterministically selects a symmetry-broken local solution.
    pub init_ellipticity: f64,
    pub target_elements: usize,
    pub max_steps: usize,
    /// Stationarity tolerance on ||phi^{n+1} - phi^n||_{L^2} / tau.
    pub stat_tol: f64,
    /// RM smoothing parameter; when absent, 1e-8 * Dx2^2 is used each step.
    pub theta1: Option<f64>,
}

impl FlowConfig {
    /// Check invariants; returns non-fatal warnings (currently only the
    /// time-step stability bound).
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.eps > 0.0) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.tau > 0.0) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.m1 > 0.0 && self.m1 < 1.0) {
            return Err(Error::Config(format!("m1 must be in (0,1), got {}", self.m1)));
        }
        if !(self.stat_tol > 0.0) {
            return Err(Error::Config(format!(
                "stat_tol must be positive, got {}",
                self.stat_tol
            )));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::Config(format!("gamma must be nonnegative, got {}", self.gamma)));
        }
        if !(self.radius > 0.0 && self.inner_radius > 0.0 && self.inner_radius < self.radius) {
            return Err(Error::Config(format!(
                "need 0 < inner_radius < radius, got {} and {}",
                self.inner_radius, self.radius
            )));
        }
        if !(self.init_ellipticity.abs() < 1.0) {
            return Err(Error::Config(format!(
                "init_ellipticity must be in (-1,1), got {}",
                self.init_ellipticity
            )));
        }
        MaterialParams::new(self.c, self.mu_norm, self.lambda_norm)?;
        let mut warnings = Vec::new();
        let bound = K_STAB * self.eps.powi(3);
        if self.tau > bound {
            warnings.push(format!(
                "tau = {:.3e} exceeds the stability scale {:.3e} (K_stab * eps^3); \
                 energy decay is not guaranteed",
                self.tau, bound
            ));
        }
        Ok(warnings)
    }

    pub fn material(&self) -> MaterialParams {
        // validated in validate(); unwrap is safe afterwards
        MaterialParams::new(self.c, self.mu_norm, self.lambda_norm).expect("validated params")
    }

    pub fn weights(&self) -> Weights {
        Weights {
            sigma1: self.sigma1,
            sigma2: self.sigma2,
            sigma3: self.sigma3,
            gamma: self.gamma,
        }
    }
}

/// One convergence-history record.
#[derive(Debug, Clone, Copy)]
pub struct HistoryRow {
    pub step: usize,
    pub t: f64,
    pub d_mean: f64,
    pub rm: f64,
    pub d_t: f64,
    pub e_eps: f64,
    pub j_eps: f64,
    pub mass: f64,
    /// ||phi^n - phi^{n-1}||_{L^2} / tau; 0 for the initial row.
    pub residual: f64,
}

impl HistoryRow {
    /// Composite objective of a report/energy pair under the given weights.
    pub fn composite(report: &RigidityReport, e_eps: f64, w: &Weights) -> f64 {
        w.gamma * e_eps + w.sigma1 * report.d_mean + w.sigma2 * report.rm + w.sigma3 * report.d_t
    }
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub step: usize,
    pub phi: PhaseField,
    pub history: Vec<HistoryRow>,
    pub stationary: bool,
}

/// Mesh-fixed matrices, assembled once per run.
pub struct Workspace {
    pub mass: SparseMatrix,
    pub lumped: Vec<f64>,
    /// M + tau gamma K with Dirichlet rows/columns eliminated.
    pub s_hat: SparseMatrix,
    /// Constraint vector: lumped mass with boundary entries zeroed.
    pub b: Vec<f64>,
}

impl Workspace {
    pub fn build(mesh: &Mesh, config: &FlowConfig) -> Workspace {
        let mass = assemble_mass(mesh);
        let stiffness = assemble_stiffness_unit(mesh);
        let lumped = assemble_lumped_mass(mesh);
        let mut s_hat = mass.add_scaled(&stiffness, config.tau * config.gamma);
        let bc: Vec<usize> = mesh.boundary_nodes.iter().copied().collect();
        s_hat.eliminate_dirichlet(&bc);
        let mut b = lumped.clone();
        for &i in &mesh.boundary_nodes {
            b[i] = 0.0;
        }
        Workspace {
            mass,
            lumped,
            s_hat,
            b,
        }
    }
}

/// Shift-and-clamp projection onto `{phi in [0,1], boundary 0, L.phi = m}`
/// by bisection on a uniform additive multiplier.
pub fn project_mass(mesh: &Mesh, lumped: &[f64], phi: &mut [f64], target: f64) -> Result<()> {
    let attainable: f64 = (0..phi.len())
        .filter(|i| !mesh.is_boundary(*i))
        .map(|i| lumped[i])
        .sum();
    if target < -1e-12 || target > attainable + 1e-12 {
        return Err(Error::Config(format!(
            "mass target {target} outside attainable range [0, {attainable}]"
        )));
    }
    let mass_at = |shift: f64, phi: &[f64]| -> f64 {
        (0..phi.len())
            .filter(|i| !mesh.is_boundary(*i))
            .map(|i| lumped[i] * (phi[i] + shift).clamp(0.0, 1.0))
            .sum()
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass_at(mid, phi) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let shift = 0.5 * (lo + hi);
    for i in 0..phi.len() {
        phi[i] = if mesh.is_boundary(i) {
            0.0
        } else {
            (phi[i] + shift).clamp(0.0, 1.0)
        };
    }
    let achieved = dot(lumped, phi);
    if (achieved - target).abs() > 1e-9 {
        return Err(Error::Numerical(format!(
            "mass projection stalled: reached {achieved}, target {target}"
        )));
    }
    Ok(())
}

/// Smoothed indicator of a centered circle, projected onto the mass
/// constraint.
pub fn initial_condition(
    mesh: &Mesh,
    m1: f64,
    inner_radius: f64,
    eps: f64,
) -> Result<PhaseField> {
    initial_condition_elliptic(mesh, m1, inner_radius, eps, 0.0)
}

/// Like `initial_condition`, but with the level set stretched to an
/// ellipse with semi-axes inner_radius*(1+e) and inner_radius*(1-e).
pub fn initial_condition_elliptic(
    mesh: &Mesh,
    m1: f64,
    inner_radius: f64,
    eps: f64,
    ellipticity: f64,
) -> Result<PhaseField> {
    if !(m1 > 0.0 && m1 < 1.0) {
        return Err(Error::Config(format!("m1 must be in (0,1), got {m1}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }
    if !(ellipticity.abs() < 1.0) {
        return Err(Error::Config(format!(
            "ellipticity must be in (-1,1), got {ellipticity}"
        )));
    }
    let (a, b) = (1.0 + ellipticity, 1.0 - ellipticity);
    let mut phi: Vec<f64> = mesh
        .nodes
        .iter()
        .map(|p| {
            let r = ((p[0] / a) * (p[0] / a) + (p[1] / b) * (p[1] / b)).sqrt();
            0.5 * (1.0 - ((r - inner_radius) / (2f64.sqrt() * eps)).tanh())
        })
        .collect();
    for &i in &mesh.boundary_nodes {
        phi[i] = 0.0;
    }
    let lumped = assemble_lumped_mass(mesh);
    let target = m1 * mesh.total_area();
    project_mass(mesh, &lumped, &mut phi, target)?;
    Ok(PhaseField::new(phi, target))
}

fn record_row(
    mesh: &Mesh,
    config: &FlowConfig,
    state: &mut FlowState,
    residual: f64,
) -> Result<()> {
    let params = config.material();
    let u = density_from_phase(&state.phi.values, &params);
    let report = rigidity::evaluate(mesh, &u, &params)?;
    let e_eps = ginzburg_landau_energy(mesh, &state.phi.values, config.eps)?;
    let lumped = assemble_lumped_mass(mesh);
    let row = HistoryRow {
        step: state.step,
        t: state.step as f64 * config.tau,
        d_mean: report.d_mean,
        rm: report.rm,
        d_t: report.d_t,
        e_eps,
        j_eps: HistoryRow::composite(&report, e_eps, &config.weights()),
        mass: state.phi.mass(&lumped),
        residual,
    };
    state.history.push(row);
    Ok(())
}

/// One semi-implicit step; appends a history row.
pub fn step(mesh: &Mesh, workspace: &Workspace, config: &FlowConfig, state: &mut FlowState) -> Result<f64> {
    let params = config.material();
    let phi_n = state.phi.values.clone();
    let u = density_from_phase(&phi_n, &params);
    let frame = rigidity::centered_frame(mesh, &u)?;
    let moments = rigidity::bending_moments(mesh, &u, &frame)?;
    let (d2, d3, d23) = var_moments(mesh, &phi_n, &params, &frame)?;
    let dm = var_dmean(&d2, &d3, &params);
    let theta1 = config.theta1.unwrap_or(1e-8 * moments.0 * moments.0);
    let rm = var_rm(&d2, &d3, &d23, moments, &params, theta1)?;
    let stress = rigidity::solve_prandtl(mesh, &u, &params)?;
    let dt = var_dt(mesh, &phi_n, &params, &stress)?;
    let well = var_energy_well(mesh, &phi_n, config.eps)?;
    let f_tilde = assemble_total_force(
        mesh,
        &workspace.mass,
        &phi_n,
        &well,
        &dm,
        &rm,
        &dt,
        &config.weights(),
        config.tau / config.eps,
    )?;
    let system = SaddleSystem {
        s_hat: &workspace.s_hat,
        b: &workspace.b,
        rhs: &f_tilde,
        constraint_value: state.phi.mass_target,
    };
    let (mut next, _multiplier) = solve_saddle(&system, crate::linalg::CG_TOL)?;
    clamp_to_box(mesh, &mut next);
    project_mass(mesh, &workspace.lumped, &mut next, state.phi.mass_target)?;
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite phase field at step {}", state.step + 1)));
    }
    let mut diff2 = 0.0;
    for i in 0..next.len() {
        let d = next[i] - phi_n[i];
        diff2 += workspace.lumped[i] * d * d;
    }
    let residual = diff2.sqrt() / config.tau;
    state.phi.values = next;
    state.step += 1;
    record_row(mesh, config, state, residual)?;
    Ok(residual)
}

/// Drive the flow to stationarity or `max_steps`. The callback sees the
/// state after every appended history row (including the initial one) and
/// may write snapshots.
pub fn run_with<F>(mesh: &Mesh, config: &FlowConfig, mut on_row: F) -> Result<FlowState>
where
    F: FnMut(&Mesh, &FlowState) -> Result<()>,
{
    config.validate()?;
    let workspace = Workspace::build(mesh, config);
    let phi = initial_condition_elliptic(
        mesh,
        config.m1,
        config.inner_radius,
        config.eps,
        config.init_ellipticity,
    )?;
    let mut state = FlowState {
        step: 0,
        phi,
        history: Vec::new(),
        stationary: false,
    };
    record_row(mesh, config, &mut state, 0.0)?;
    on_row(mesh, &state)?;
    for _ in 0..config.max_steps {
        let residual = step(mesh, &workspace, config, &mut state)?;
        on_row(mesh, &state)?;
        if residual < config.stat_tol {
            state.stationary = true;
            break;
        }
    }
    Ok(state)
}

/// Build the disk mesh from the config and run the flow on it.
pub fn run(config: &FlowConfig) -> Result<(Mesh, FlowState)> {
    let mesh = generate_disk_mesh(config.radius, config.target_elements)?;
    let state = run_with(&mesh, config, |_, _| Ok(()))?;
    Ok((mesh, state))
}

/// Largest objective increase between consecutive steps, with the offending
/// steps flagged when the increase exceeds 1e-10 * |J|.
#[derive(Debug, Clone)]
pub struct DescentReport {
    pub max_increase: f64,
    pub flagged_steps: Vec<usize>,
}

pub fn energy_monitor(history: &[HistoryRow]) -> Result<DescentReport> {
    if history.len() < 2 {
        return Err(Error::Usage(
            "energy monitor needs at least two history rows".into(),
        ));
    }
    let mut max_increase = f64::NEG_INFINITY;
    let mut flagged = Vec::new();
    for w in history.windows(2) {
        let increase = w[1].j_eps - w[0].j_eps;
        max_increase = max_increase.max(increase);
        if increase > 1e-10 * w[0].j_eps.abs().max(1e-300) {
            flagged.push(w[1].step);
        }
    }
    Ok(DescentReport {
        max_increase,
        flagged_steps: flagged,
    })
}
