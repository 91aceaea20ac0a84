//! Linearly implicit time stepping with step-size control and detection of
//! the three ways a maximal solution can end.
//!
//! One step freezes `a(u^n)` and `g(u^n)` and solves, species by species,
//!
//! ```text
//! (I + dt A_s(u^n) - dt g_ii(u^n)) u_i^{n+1} = u_i^n + dt sum_{j != i} g_ij(u^n) u_j^n
//! ```
//!
//! Off-diagonal reaction couplings are taken explicitly so every species needs
//! one symmetric solve.

use serde::{Deserialize, Serialize};

use crate::fields::{dist_to_state_boundary, norms, Field};
use crate::geometry::Mesh;
use crate::linalg::{solve_banded, solve_pcg, CsrMatrix};
use crate::models::{eval_coefficients, eval_reaction_matrices, ModelSpec};
use crate::operators::assemble_as;
use crate::{Error, Result};

/// Growth factor applied to `dt` after an accepted step.
pub const DT_GROWTH: f64 = 1.2;
/// Length of the trailing window used by the Cauchy test on the proxy norm.
pub const CAUCHY_WINDOW: usize = 10;
/// Relative fluctuation above which the trailing window counts as non-Cauchy.
pub const CAUCHY_FLUCTUATION: f64 = 0.5;

const CG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NewtonMode {
    Off,
    On { max_iters: usize, tol: f64 },
}

impl NewtonMode {
    pub fn default_on() -> Self {
        NewtonMode::On { max_iters: 10, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_final: f64,
    pub newton: NewtonMode,
    /// Exit threshold on the distance of the state to the boundary of `X`.
    pub delta_x: f64,
    /// Exit threshold on the `W^2_p` proxy norm.
    pub norm_max: f64,
    pub p: f64,
}

impl SolverConfig {
    /// Fixed step `dt` with default thresholds and `p = 6`.
    pub fn fixed(t_final: f64, dt: f64) -> Self {
        SolverConfig {
            dt_init: dt,
            dt_min: dt * 1e-6,
            dt_max: dt,
            t_final,
            newton: NewtonMode::Off,
            delta_x: 1e-6,
            norm_max: 1e8,
            p: 6.0,
        }
    }

    /// Checks every field, collecting all violations. `dimension` is the
    /// spatial dimension of the domain the run will use.
    pub fn validate(&self, dimension: usize) -> Result<()> {
        let mut problems = Vec::new();
        let positive = |v: f64| v > 0.0 && v.is_finite();
        for (name, v) in [
            ("dt_init", self.dt_init),
            ("dt_min", self.dt_min),
            ("dt_max", self.dt_max),
            ("t_final", self.t_final),
            ("delta_x", self.delta_x),
            ("norm_max", self.norm_max),
        ] {
            if !positive(v) {
                problems.push(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            problems.push(format!(
                "need dt_min <= dt_init <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt_init, self.dt_max
            ));
        }
        let m = dimension as f64;
        if !(self.p > m + 2.0 && self.p.is_finite()) {
            problems.push(format!("p must exceed m + 2 = {} for a {dimension}-dimensional domain, got {}", m + 2.0, self.p));
        }
        if let NewtonMode::On { max_iters, tol } = self.newton {
            if max_iters == 0 || !positive(tol) {
                problems.push(format!("newton needs max_iters >= 1 and tol > 0, got {max_iters} / {tol}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::ParameterDomain(problems.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub t: f64,
    pub u: Field,
    /// Step size proposed for the next step.
    pub dt: f64,
    pub step_count: usize,
    /// Rejected attempts accumulated over the run.
    pub rejections: usize,
}

impl SimulationState {
    pub fn new(u: Field, config: &SolverConfig) -> Self {
        SimulationState {
            t: 0.0,
            u,
            dt: config.dt_init,
            step_count: 0,
            rejections: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceTrigger {
    Threshold,
    NonCauchyTail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExitStatus {
    CompletedBudget { t_final: f64 },
    StateBoundaryApproach { t: f64, min_dist: f64 },
    NormDivergence { t: f64, norm: f64, trigger: DivergenceTrigger },
    StepCollapse { t: f64, dt: f64 },
}

impl ExitStatus {
    pub fn name(&self) -> &'static str {
        match self {
            ExitStatus::CompletedBudget { .. } => "completed_budget",
            ExitStatus::StateBoundaryApproach { .. } => "state_boundary_approach",
            ExitStatus::NormDivergence { .. } => "norm_divergence",
            ExitStatus::StepCollapse { .. } => "step_collapse",
        }
    }

    pub fn time(&self) -> f64 {
        match *self {
            ExitStatus::CompletedBudget { t_final } => t_final,
            ExitStatus::StateBoundaryApproach { t, .. }
            | ExitStatus::NormDivergence { t, .. }
            | ExitStatus::StepCollapse { t, .. } => t,
        }
    }
}

/// Quantities the exit detectors look at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub min_dist: f64,
    pub norm: f64,
}

pub fn diagnose(u: &Field, model: &ModelSpec, mesh: &Mesh, p: f64) -> Result<Diagnostics> {
    Ok(Diagnostics {
        min_dist: dist_to_state_boundary(u, &model.state_space),
        norm: norms::weighted_sobolev_norm(u, mesh, 2, p)?,
    })
}

/// Runs the detectors in the order budget, state boundary, norm divergence
/// and returns the first that fires. `window` holds the trailing proxy norms,
/// most recent last.
pub fn detect_exit(state: &SimulationState, diag: &Diagnostics, config: &SolverConfig, window: &[f64]) -> Option<ExitStatus> {
    if state.t >= config.t_final * (1.0 - 1e-12) {
        return Some(ExitStatus::CompletedBudget { t_final: config.t_final });
    }
    if diag.min_dist < config.delta_x {
        return Some(ExitStatus::StateBoundaryApproach {
            t: state.t,
            min_dist: diag.min_dist,
        });
    }
    if !(diag.norm <= config.norm_max) {
        return Some(ExitStatus::NormDivergence {
            t: state.t,
            norm: diag.norm,
            trigger: DivergenceTrigger::Threshold,
        });
    }
    if window.len() >= CAUCHY_WINDOW && state.dt < 10.0 * config.dt_min {
        let tail = &window[window.len() - CAUCHY_WINDOW..];
        let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        if mean > 0.0 && (hi - lo) / mean > CAUCHY_FLUCTUATION {
            return Some(ExitStatus::NormDivergence {
                t: state.t,
                norm: diag.norm,
                trigger: DivergenceTrigger::NonCauchyTail,
            });
        }
    }
    None
}

/// Solves `(I + dt A - dt diag_shift) x = rhs` in volume-symmetrized form.
/// The constant-mode correction afterwards removes the residual's mean, so
/// pure diffusion conserves `sum vol x` to roundoff.
fn solve_species(a: &CsrMatrix, vol: &[f64], reaction_diag: &[f64], rhs: &[f64], dt: f64, dim: usize, guess: &[f64]) -> Result<Vec<f64>> {
    let scale: Vec<f64> = vol.iter().map(|v| dt * v).collect();
    let shift: Vec<f64> = vol.iter().zip(reaction_diag).map(|(v, g)| v * (1.0 - dt * g)).collect();
    let k = a.scale_rows_and_shift(&scale, &shift);
    let b: Vec<f64> = rhs.iter().zip(vol).map(|(r, v)| r * v).collect();
    let mut x = if dim == 1 {
        solve_banded(&k, &b)?
    } else {
        solve_pcg(&k, &b, guess, CG_TOL, 20 * k.n.max(100))?
    };
    let kx = k.mul_vec(&x)?;
    let residual: f64 = b.iter().zip(&kx).map(|(bi, ki)| bi - ki).sum();
    let column_sum: f64 = shift.iter().sum();
    if column_sum.abs() > 0.0 {
        let c = residual / column_sum;
        x.iter_mut().for_each(|xi| *xi += c);
    }
    Ok(x)
}

/// One frozen-coefficient solve from `u_old`, with coefficients taken at `frozen`.
fn linear_update(u_old: &Field, frozen: &Field, model: &ModelSpec, mesh: &Mesh, dt: f64) -> Result<Field> {
    let n = model.n_species;
    let coefficients = eval_coefficients(model, frozen, mesh)?;
    let g = eval_reaction_matrices(model, frozen, mesh)?;
    let vol = mesh.volumes();
    let mut species = Vec::with_capacity(n);
    for (i, a) in coefficients.iter().enumerate() {
        let op = assemble_as(a, mesh)?;
        let mut diag = vec![0.0; mesh.n_cells()];
        let mut rhs = u_old.species(i);
        for c in 0..mesh.n_cells() {
            let block = &g[c * n * n..(c + 1) * n * n];
            diag[c] = block[i * n + i];
            for j in (0..n).filter(|&j| j != i) {
                rhs[c] += dt * block[i * n + j] * frozen.get(c, j);
            }
        }
        species.push(solve_species(&op.matrix, &vol, &diag, &rhs, dt, mesh.dimension(), &frozen.species(i))?);
    }
    Field::from_species(mesh, &species)
}

fn inside(u: &Field, model: &ModelSpec) -> bool {
    u.is_valid() && (0..u.n_cells()).all(|c| model.state_space.contains(u.cell(c)))
}

/// Outcome of one attempt at a fixed `dt`: `None` means reject.
fn attempt(u: &Field, model: &ModelSpec, mesh: &Mesh, dt: f64, newton: NewtonMode) -> Result<Option<Field>> {
    let first = match linear_update(u, u, model, mesh, dt) {
        Ok(v) => v,
        Err(Error::LinearSolver(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if !inside(&first, model) {
        return Ok(None);
    }
    let NewtonMode::On { max_iters, tol } = newton else {
        return Ok(Some(first));
    };
    // Fixed-point iteration on the fully implicit residual, each sweep using
    // the frozen-coefficient solve at the current iterate.
    let mut x = first;
    let mut last_increment = f64::INFINITY;
    for _ in 0..max_iters {
        let next = match linear_update(u, &x, model, mesh, dt) {
            Ok(v) => v,
            Err(Error::LinearSolver(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        if !inside(&next, model) {
            return Ok(None);
        }
        let increment = next.sub(&x).max_abs();
        x = next;
        if increment <= tol * x.max_abs().max(1.0) {
            return Ok(Some(x));
        }
        if increment >= last_increment {
            return Ok(None);
        }
        last_increment = increment;
    }
    Ok(None)
}

/// Advances by one accepted step, halving `dt` on every rejection. The last
/// step is shortened to land on `t_final`.
pub fn step(state: &SimulationState, model: &ModelSpec, mesh: &Mesh, config: &SolverConfig) -> Result<SimulationState> {
    let mut proposal = state.dt;
    let mut rejections = state.rejections;
    loop {
        let remaining = config.t_final - state.t;
        let clamped = proposal >= remaining;
        let dt = if clamped { remaining } else { proposal };
        if let Some(u) = attempt(&state.u, model, mesh, dt, config.newton)? {
            let next_dt = if clamped { proposal } else { (proposal * DT_GROWTH).min(config.dt_max) };
            return Ok(SimulationState {
                t: if clamped { config.t_final } else { state.t + dt },
                u,
                dt: next_dt,
                step_count: state.step_count + 1,
                rejections,
            });
        }
        rejections += 1;
        proposal = dt * 0.5;
        if proposal < config.dt_min {
            return Err(Error::StepCollapse { t: state.t, dt: proposal });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub norm: f64,
    pub min_dist: f64,
    pub rejections: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// `(t, u)` at every `stride`-th step, starting with the initial data.
    pub trajectory: Vec<(f64, Field)>,
    pub exit: ExitStatus,
    pub log: Vec<StepRecord>,
    pub final_state: SimulationState,
}

impl RunOutput {
    pub fn steps(&self) -> usize {
        self.final_state.step_count
    }
}

fn admissible(u0: &Field, model: &ModelSpec, mesh: &Mesh, config: &SolverConfig) -> Result<Diagnostics> {
    u0.check(mesh)?;
    if u0.n_species() != model.n_species {
        return Err(Error::DimensionMismatch {
            expected: model.n_species,
            got: u0.n_species(),
        });
    }
    if !inside(u0, model) {
        return Err(Error::InadmissibleInitialData("initial data leave the state space".into()));
    }
    let diag = diagnose(u0, model, mesh, config.p)?;
    if !(diag.min_dist > config.delta_x) {
        return Err(Error::InadmissibleInitialData(format!(
            "distance {:e} to the state-space boundary does not exceed delta_x = {:e}",
            diag.min_dist, config.delta_x
        )));
    }
    if !diag.norm.is_finite() {
        return Err(Error::InadmissibleInitialData("W^2_p norm is not finite".into()));
    }
    Ok(diag)
}

/// Integrates from `u0` until one exit detector fires or `dt` collapses.
pub fn run(u0: &Field, model: &ModelSpec, mesh: &Mesh, config: &SolverConfig, stride: usize) -> Result<RunOutput> {
    config.validate(mesh.dimension())?;
    let stride = stride.max(1);
    let diag = admissible(u0, model, mesh, config)?;
    let mut state = SimulationState::new(u0.clone(), config);
    let mut trajectory = vec![(0.0, u0.clone())];
    let mut log = vec![StepRecord {
        step: 0,
        t: 0.0,
        dt: state.dt,
        norm: diag.norm,
        min_dist: diag.min_dist,
        rejections: 0,
    }];
    let mut window = vec![diag.norm];
    let exit = loop {
        state = match step(&state, model, mesh, config) {
            Ok(next) => next,
            Err(Error::StepCollapse { t, dt }) => break ExitStatus::StepCollapse { t, dt },
            Err(e) => return Err(e),
        };
        let diag = diagnose(&state.u, model, mesh, config.p)?;
        log.push(StepRecord {
            step: state.step_count,
            t: state.t,
            dt: state.dt,
            norm: diag.norm,
            min_dist: diag.min_dist,
            rejections: state.rejections,
        });
        if state.step_count % stride == 0 {
            trajectory.push((state.t, state.u.clone()));
        }
        window.push(diag.norm);
        if window.len() > CAUCHY_WINDOW {
            window.remove(0);
        }
        if let Some(exit) = detect_exit(&state, &diag, config, &window) {
            break exit;
        }
    };
    Ok(RunOutput {
        trajectory,
        exit,
        log,
        final_state: state,
    })
}

/// Norm used to compare two trajectories in [`lipschitz_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeNorm {
    /// Discrete `W^2_p(Omega; s)` with the configured `p`.
    Sobolev,
    /// `(sum vol u^2)^{1/2}`.
    VolumeL2,
}

fn probe_norm(u: &Field, mesh: &Mesh, p: f64, norm: ProbeNorm) -> Result<f64> {
    match norm {
        ProbeNorm::Sobolev => norms::weighted_sobolev_norm(u, mesh, 2, p),
        ProbeNorm::VolumeL2 => norms::weighted_lp_norm(u, mesh, 2.0),
    }
}

/// `max_{t <= T} |u(t) - v(t)| / |u0 - v0|` over the step times of two runs
/// on a common fixed grid. Identical data give 0.
pub fn lipschitz_probe(
    u0: &Field,
    v0: &Field,
    t_final: f64,
    model: &ModelSpec,
    mesh: &Mesh,
    config: &SolverConfig,
    norm: ProbeNorm,
) -> Result<f64> {
    let initial = probe_norm(&u0.sub(v0), mesh, config.p, norm)?;
    if initial == 0.0 {
        return Ok(0.0);
    }
    let config = SolverConfig {
        t_final,
        ..config.clone()
    };
    let ru = run(u0, model, mesh, &config, 1)?;
    let rv = run(v0, model, mesh, &config, 1)?;
    for r in [&ru, &rv] {
        if !matches!(r.exit, ExitStatus::CompletedBudget { .. }) {
            return Err(Error::EarlyExit(format!("{:?}", r.exit)));
        }
    }
    if ru.trajectory.len() != rv.trajectory.len()
        || ru.trajectory.iter().zip(&rv.trajectory).any(|(a, b)| a.0 != b.0)
    {
        return Err(Error::EarlyExit("probe runs took different time grids".into()));
    }
    let mut ratio = 0.0_f64;
    for ((_, a), (_, b)) in ru.trajectory.iter().zip(&rv.trajectory) {
        ratio = ratio.max(probe_norm(&a.sub(b), mesh, config.p, norm)? / initial);
    }
    Ok(ratio)
}
