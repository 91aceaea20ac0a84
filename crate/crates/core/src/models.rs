//! Quasilinear model systems: diffusion coefficients `a_i(x, u)` and reaction
//! matrices `g(x, u)` with `f(u) = g(u) u`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::fields::{Field, StateSpaceX};
use crate::geometry::Mesh;
use crate::{Error, Result};

/// `(x, u) -> a_i(x, u)`.
pub type CoefficientFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
/// `(x, u, g)`: writes the row-major `n x n` reaction matrix into `g`.
pub type ReactionFn = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;
/// `(x, u) -> g(x, u)` for scalar equations.
pub type ScalarReactionFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Function of position only; constants are kept separate so they can be
/// validated without probing.
#[derive(Clone)]
pub enum SpatialCoef {
    Constant(f64),
    Function(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl SpatialCoef {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            SpatialCoef::Constant(c) => *c,
            SpatialCoef::Function(f) => f(x),
        }
    }
}

impl From<f64> for SpatialCoef {
    fn from(c: f64) -> Self {
        SpatialCoef::Constant(c)
    }
}

#[derive(Clone)]
pub struct ModelSpec {
    pub name: String,
    pub n_species: usize,
    pub state_space: StateSpaceX,
    pub diffusion: Vec<CoefficientFn>,
    pub reaction: ReactionFn,
    /// Per-species degeneracy exponents; `None` uses the global `s`.
    pub per_species_s: Option<Vec<f64>>,
    /// Scalar parameters, echoed into run manifests.
    pub params: BTreeMap<String, f64>,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("n_species", &self.n_species)
            .field("state_space", &self.state_space)
            .field("per_species_s", &self.per_species_s)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl ModelSpec {
    pub fn with_state_space(mut self, x: StateSpaceX) -> Result<Self> {
        if x.n_species() != self.n_species {
            return Err(Error::ParameterDomain(format!(
                "state box has {} components, model has {} species",
                x.n_species(),
                self.n_species
            )));
        }
        self.state_space = x;
        Ok(self)
    }

    pub fn with_per_species_s(mut self, s: Vec<f64>) -> Result<Self> {
        if s.len() != self.n_species || s.iter().any(|v| !(*v >= 1.0 && v.is_finite())) {
            return Err(Error::ParameterDomain(format!(
                "per-species exponents must be {} values in [1, inf), got {s:?}",
                self.n_species
            )));
        }
        self.per_species_s = Some(s);
        Ok(self)
    }

    fn check_state(&self, cell: usize, state: &[f64]) -> Result<()> {
        if self.state_space.contains(state) {
            return Ok(());
        }
        let species = state
            .iter()
            .enumerate()
            .position(|(i, v)| !(*v > self.state_space.lower[i] && *v < self.state_space.upper[i]))
            .unwrap_or(0);
        Err(Error::StateOutsideX {
            cell,
            species,
            value: state[species],
        })
    }

    /// Diffusion coefficient of species `i` at one point.
    pub fn coefficient(&self, species: usize, x: &[f64], state: &[f64]) -> f64 {
        (self.diffusion[species])(x, state)
    }

    /// Row-major reaction matrix at one point.
    pub fn reaction_matrix(&self, x: &[f64], state: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n_species * self.n_species];
        (self.reaction)(x, state, &mut g);
        g
    }
}

/// Per-species coefficient fields `a_i(x, u(x))`.
pub fn eval_coefficients(model: &ModelSpec, u: &Field, mesh: &Mesh) -> Result<Vec<Vec<f64>>> {
    u.check(mesh)?;
    let n = model.n_species;
    let mut out = vec![vec![0.0; mesh.n_cells()]; n];
    for (c, cell) in mesh.cells.iter().enumerate() {
        let state = u.cell(c);
        model.check_state(c, state)?;
        for (i, field) in out.iter_mut().enumerate() {
            let value = model.coefficient(i, &cell.position, state);
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonpositiveCoefficient { cell: c, value });
            }
            field[c] = value;
        }
    }
    Ok(out)
}

/// Cell-major reaction matrices `g(x, u(x))`, `n x n` per cell.
pub fn eval_reaction_matrices(model: &ModelSpec, u: &Field, mesh: &Mesh) -> Result<Vec<f64>> {
    u.check(mesh)?;
    let n = model.n_species;
    let mut out = vec![0.0; mesh.n_cells() * n * n];
    for (c, cell) in mesh.cells.iter().enumerate() {
        let state = u.cell(c);
        model.check_state(c, state)?;
        (model.reaction)(&cell.position, state, &mut out[c * n * n..(c + 1) * n * n]);
    }
    Ok(out)
}

/// `f = g u` cell by cell with frozen reaction matrices.
pub fn apply_reaction(matrices: &[f64], u: &Field) -> Field {
    let n = u.n_species();
    let mut f = u.scaled(0.0);
    for c in 0..u.n_cells() {
        let g = &matrices[c * n * n..(c + 1) * n * n];
        let state = u.cell(c);
        for i in 0..n {
            let value = (0..n).map(|j| g[i * n + j] * state[j]).sum();
            f.set(c, i, value);
        }
    }
    f
}

/// `f(u) = g(u) u`.
pub fn eval_reaction(model: &ModelSpec, u: &Field, mesh: &Mesh) -> Result<Field> {
    let g = eval_reaction_matrices(model, u, mesh)?;
    Ok(apply_reaction(&g, u))
}

/// Diffusive logistic equation: constant diffusivity `alpha`, `g(u) = lambda - a u`.
pub fn builtin_logistic(alpha: f64, lambda: f64, a: f64) -> Result<ModelSpec> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::ParameterDomain(format!("logistic diffusivity must be positive, got {alpha}")));
    }
    if !(a >= 0.0 && a.is_finite()) || !lambda.is_finite() {
        return Err(Error::ParameterDomain(format!(
            "logistic needs finite lambda and a >= 0, got lambda = {lambda}, a = {a}"
        )));
    }
    let params = BTreeMap::from([
        ("alpha".to_string(), alpha),
        ("lambda".to_string(), lambda),
        ("a".to_string(), a),
    ]);
    Ok(ModelSpec {
        name: "logistic".into(),
        n_species: 1,
        state_space: StateSpaceX::positive(1),
        diffusion: vec![Arc::new(move |_, _| alpha)],
        reaction: Arc::new(move |_, u, g| g[0] = lambda - a * u[0]),
        per_species_s: None,
        params,
    })
}

/// Porous-medium type equation with `a(u) = u^alpha`, `alpha != 0`, and reaction `g(x, u) u`.
pub fn builtin_porous_media(alpha: f64, g: ScalarReactionFn) -> Result<ModelSpec> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::ParameterDomain(format!(
            "porous-media exponent must be finite and nonzero, got {alpha}"
        )));
    }
    Ok(ModelSpec {
        name: "porous_media".into(),
        n_species: 1,
        state_space: StateSpaceX::positive(1),
        diffusion: vec![Arc::new(move |_, u| u[0].powf(alpha))],
        reaction: Arc::new(move |x, u, out| out[0] = g(x, u[0])),
        per_species_s: None,
        params: BTreeMap::from([("alpha".to_string(), alpha)]),
    })
}

/// Porous medium with a constant growth rate, `g == rate`.
pub fn builtin_porous_media_linear(alpha: f64, rate: f64) -> Result<ModelSpec> {
    let mut model = builtin_porous_media(alpha, Arc::new(move |_, _| rate))?;
    model.params.insert("growth".into(), rate);
    Ok(model)
}

/// Coefficients of the two-population system
///
/// ```text
/// u_t - div_s((a + u^alpha v^beta) grad_s u) = (a0 + a1 u + a2 v) u
/// v_t - div_s((b + u^gamma v^delta) grad_s v) = (b0 + b1 v + b2 u) v
/// ```
#[derive(Clone)]
pub struct TwoPopulationParams {
    pub a: SpatialCoef,
    pub b: SpatialCoef,
    pub a0: SpatialCoef,
    pub a1: SpatialCoef,
    pub a2: SpatialCoef,
    pub b0: SpatialCoef,
    pub b1: SpatialCoef,
    pub b2: SpatialCoef,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl TwoPopulationParams {
    /// Constant coefficients with no reaction.
    pub fn constant(a: f64, b: f64, exponents: [f64; 4]) -> Self {
        TwoPopulationParams {
            a: a.into(),
            b: b.into(),
            a0: 0.0.into(),
            a1: 0.0.into(),
            a2: 0.0.into(),
            b0: 0.0.into(),
            b1: 0.0.into(),
            b2: 0.0.into(),
            alpha: exponents[0],
            beta: exponents[1],
            gamma: exponents[2],
            delta: exponents[3],
        }
    }

    pub fn with_reaction(mut self, a: [f64; 3], b: [f64; 3]) -> Self {
        self.a0 = a[0].into();
        self.a1 = a[1].into();
        self.a2 = a[2].into();
        self.b0 = b[0].into();
        self.b1 = b[1].into();
        self.b2 = b[2].into();
        self
    }

    /// Swaps the roles of the two species.
    pub fn swapped(&self) -> Self {
        TwoPopulationParams {
            a: self.b.clone(),
            b: self.a.clone(),
            a0: self.b0.clone(),
            a1: self.b1.clone(),
            a2: self.b2.clone(),
            b0: self.a0.clone(),
            b1: self.a1.clone(),
            b2: self.a2.clone(),
            alpha: self.delta,
            beta: self.gamma,
            gamma: self.beta,
            delta: self.alpha,
        }
    }
}

/// Two-population model on `X = (0, inf)^2`. The base diffusivities `a, b`
/// must be nonnegative; function-valued ones are checked at `probe_points`.
pub fn builtin_two_population(params: TwoPopulationParams, probe_points: &[Vec<f64>]) -> Result<ModelSpec> {
    for (name, coef) in [("a", &params.a), ("b", &params.b)] {
        let bad = match coef {
            SpatialCoef::Constant(c) => (!(*c >= 0.0)).then_some(*c),
            SpatialCoef::Function(f) => probe_points.iter().map(|x| f(x)).find(|v| !(*v >= 0.0)),
        };
        if let Some(value) = bad {
            return Err(Error::ParameterDomain(format!(
                "two-population base diffusivity {name} must be >= 0, found {value}"
            )));
        }
    }
    let mut scalars = BTreeMap::new();
    let named = [
        ("a", &params.a),
        ("b", &params.b),
        ("a0", &params.a0),
        ("a1", &params.a1),
        ("a2", &params.a2),
        ("b0", &params.b0),
        ("b1", &params.b1),
        ("b2", &params.b2),
    ];
    for (name, coef) in named {
        if let SpatialCoef::Constant(c) = coef {
            scalars.insert(name.to_string(), *c);
        }
    }
    for (name, v) in [
        ("alpha", params.alpha),
        ("beta", params.beta),
        ("gamma", params.gamma),
        ("delta", params.delta),
    ] {
        scalars.insert(name.to_string(), v);
    }
    let p1 = params.clone();
    let p2 = params.clone();
    let pr = params;
    Ok(ModelSpec {
        name: "two_population".into(),
        n_species: 2,
        state_space: StateSpaceX::positive(2),
        diffusion: vec![
            Arc::new(move |x, s| p1.a.eval(x) + s[0].powf(p1.alpha) * s[1].powf(p1.beta)),
            Arc::new(move |x, s| p2.b.eval(x) + s[0].powf(p2.gamma) * s[1].powf(p2.delta)),
        ],
        reaction: Arc::new(move |x, s, g| {
            g[0] = pr.a0.eval(x) + pr.a1.eval(x) * s[0] + pr.a2.eval(x) * s[1];
            g[1] = 0.0;
            g[2] = 0.0;
            g[3] = pr.b0.eval(x) + pr.b1.eval(x) * s[1] + pr.b2.eval(x) * s[0];
        }),
        per_species_s: None,
        params: scalars,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainSpec, WeightProfile};

    fn mesh() -> Mesh {
        let d = DomainSpec::interval(2.0, 0.5).unwrap();
        let w = WeightProfile::new(0.5, 1.0).unwrap();
        Mesh::build(&d, &w, 6, 6, 2.0).unwrap()
    }

    #[test]
    fn porous_media_coefficients() {
        let m = mesh();
        for (alpha, u, expected) in [(1.0, 3.0, 3.0), (-1.0, 2.0, 0.5), (2.0, 0.1, 0.01), (1.0, 2.0, 2.0)] {
            let model = builtin_porous_media_linear(alpha, 0.0).unwrap();
            let a = eval_coefficients(&model, &Field::constant(&m, &[u]), &m).unwrap();
            assert!(a[0].iter().all(|v| (v - expected).abs() < 1e-15));
        }
        assert!(builtin_porous_media_linear(0.0, 1.0).is_err());
    }

    #[test]
    fn logistic_coefficients_and_reaction() {
        let m = mesh();
        let model = builtin_logistic(0.7, 1.0, 1.0).unwrap();
        let u = Field::constant(&m, &[1.0]);
        assert!(eval_coefficients(&model, &u, &m).unwrap()[0].iter().all(|v| *v == 0.7));
        assert!(eval_reaction(&model, &u, &m).unwrap().values().iter().all(|v| *v == 0.0));
        let growth = builtin_logistic(1.0, 1.0, 0.0).unwrap();
        assert_eq!(growth.reaction_matrix(&[0.3], &[5.0]), vec![1.0]);
        let decay = builtin_logistic(1.0, -0.5, 0.0).unwrap();
        assert_eq!(decay.reaction_matrix(&[0.3], &[5.0]), vec![-0.5]);
        assert!(builtin_logistic(0.0, 1.0, 1.0).is_err());
        assert!(builtin_logistic(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn state_outside_x_is_rejected() {
        let m = mesh();
        let model = builtin_logistic(1.0, 1.0, 1.0).unwrap();
        let mut u = Field::constant(&m, &[0.5]);
        u.set(4, 0, -0.1);
        assert!(matches!(
            eval_coefficients(&model, &u, &m),
            Err(Error::StateOutsideX { cell: 4, species: 0, .. })
        ));
        assert!(eval_reaction(&model, &u, &m).is_err());
        let whole = model.with_state_space(StateSpaceX::whole(1)).unwrap();
        let zero = Field::constant(&m, &[0.0]);
        assert!(eval_reaction(&whole, &zero, &m).unwrap().values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn two_population_values() {
        let m = mesh();
        let params = TwoPopulationParams::constant(0.1, 0.1, [1.0, 1.0, 1.0, 1.0])
            .with_reaction([1.0, -1.0, 0.0], [0.5, 0.0, 0.0]);
        let model = builtin_two_population(params, &[]).unwrap();
        let a = eval_coefficients(&model, &Field::constant(&m, &[1.0, 1.0]), &m).unwrap();
        assert!(a[0].iter().all(|v| (v - 1.1).abs() < 1e-15));
        let f = eval_reaction(&model, &Field::constant(&m, &[0.5, 1.0]), &m).unwrap();
        assert!((0..m.n_cells()).all(|c| (f.get(c, 0) - 0.25).abs() < 1e-15));

        let flat = TwoPopulationParams::constant(1.0, 1.0, [0.0; 4]);
        let model = builtin_two_population(flat, &[]).unwrap();
        let a = eval_coefficients(&model, &Field::constant(&m, &[0.3, 7.0]), &m).unwrap();
        assert!(a.iter().flatten().all(|v| *v == 2.0));
    }

    #[test]
    fn two_population_accepts_predator_prey_and_small_data() {
        let m = mesh();
        let params = TwoPopulationParams::constant(0.5, 0.5, [0.0; 4]).with_reaction([1.0, 0.0, -1.0], [-0.5, 0.0, 1.0]);
        let model = builtin_two_population(params, &[]).unwrap();
        let tiny = Field::constant(&m, &[1e-9, 1e-9]);
        assert!(eval_coefficients(&model, &tiny, &m).is_ok());
    }

    #[test]
    fn two_population_rejects_negative_base() {
        let neg = TwoPopulationParams::constant(-0.1, 1.0, [0.0; 4]);
        assert!(builtin_two_population(neg, &[]).is_err());
        let mut f = TwoPopulationParams::constant(1.0, 1.0, [0.0; 4]);
        f.b = SpatialCoef::Function(Arc::new(|x: &[f64]| x[0] - 0.5));
        assert!(builtin_two_population(f.clone(), &[vec![0.0]]).is_err());
        assert!(builtin_two_population(f, &[vec![1.0]]).is_ok());
    }
}
