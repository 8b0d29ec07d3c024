//! Bundled dynamical systems: Lorenz'96 with analytic Jacobian, the evenly
//! distributed measurement matrix, and small LTI/LTV test systems.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::math;
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// A nonlinear (or linear time-varying) vector field with analytic Jacobian
/// and a linear output map `y = C(t) x`.
pub trait DynamicalModel {
    /// State dimension n.
    fn dim(&self) -> usize;

    /// Input dimension m (0 for autonomous benchmarks).
    fn input_dim(&self) -> usize {
        0
    }

    /// Output dimension p.
    fn output_dim(&self) -> usize;

    /// Vector field f(t, x, u).
    fn rhs(&self, t: f64, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64>;

    /// Jacobian of f with respect to x, evaluated at (t, x, u).
    fn jacobian(&self, t: f64, x: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64>;

    /// Output matrix C(t), p-by-n.
    fn output_matrix(&self, t: f64) -> DMatrix<f64>;

    /// Short identifier used for CLI selection and file names.
    fn tag(&self) -> &str;

    /// `sup_i sup_x ||H_{f_i}(x, u)||` when known in closed form (0 for
    /// linear systems, sqrt(2) for Lorenz'96).
    fn hessian_norm_bound(&self) -> Option<f64> {
        None
    }

    /// Default initial state for experiments.
    fn default_initial_state(&self) -> DVector<f64> {
        DVector::zeros(self.dim())
    }
}

/// Lorenz'96: `dz_i/dt = (z_{i+1} - z_{i-2}) z_{i-1} - z_i + F` with cyclic
/// indices (`z_0 = z_n`, `z_{-1} = z_{n-1}`, `z_{n+1} = z_1`).
pub fn lorenz96_rhs(z: &DVector<f64>, forcing: f64) -> Result<DVector<f64>> {
    let n = z.len();
    if n < 4 {
        return Err(Error::ModelDimension { n, min: 4 });
    }
    let mut dz = DVector::zeros(n);
    for i in 0..n {
        let ip1 = (i + 1) % n;
        let im1 = (i + n - 1) % n;
        let im2 = (i + n - 2) % n;
        dz[i] = (z[ip1] - z[im2]) * z[im1] - z[i] + forcing;
    }
    Ok(dz)
}

/// Analytic Jacobian of [`lorenz96_rhs`]; row i has nonzeros at the cyclic
/// offsets i-2, i-1, i, i+1.
pub fn lorenz96_jacobian(z: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = z.len();
    if n < 4 {
        return Err(Error::ModelDimension { n, min: 4 });
    }
    let mut j = DMatrix::zeros(n, n);
    for i in 0..n {
        let ip1 = (i + 1) % n;
        let im1 = (i + n - 1) % n;
        let im2 = (i + n - 2) % n;
        j[(i, im2)] += -z[im1];
        j[(i, im1)] += z[ip1] - z[im2];
        j[(i, i)] += -1.0;
        j[(i, ip1)] += z[im1];
    }
    Ok(j)
}

/// Measurement matrix with p single-state rows distributed with equal
/// distance over the n states: row j (1-based) selects state (j-1)*floor(n/p)+1.
pub fn paper_output_matrix(n: usize, p: usize) -> Result<DMatrix<f64>> {
    if p == 0 || p > n {
        return Err(Error::OutputDimension { p, n });
    }
    let d = n / p;
    let mut c = DMatrix::zeros(p, n);
    for row in 0..p {
        c[(row, row * d)] = 1.0;
    }
    Ok(c)
}

/// Benchmark initial condition `z_i(0) = sin(2 pi (i-1) / n)`.
pub fn paper_initial_condition(n: usize) -> DVector<f64> {
    DVector::from_fn(n, |i, _| {
        math::sin(i as f64 / n as f64 * 2.0 * core::f64::consts::PI)
    })
}

/// Lorenz'96 benchmark model with the evenly distributed output matrix.
#[derive(Debug, Clone)]
pub struct Lorenz96 {
    n: usize,
    forcing: f64,
    p: usize,
}

impl Lorenz96 {
    pub fn new(n: usize, forcing: f64, p: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::ModelDimension { n, min: 4 });
        }
        if p == 0 || p > n {
            return Err(Error::OutputDimension { p, n });
        }
        Ok(Self { n, forcing, p })
    }

    pub fn forcing(&self) -> f64 {
        self.forcing
    }
}

impl DynamicalModel for Lorenz96 {
    fn dim(&self) -> usize {
        self.n
    }

    fn output_dim(&self) -> usize {
        self.p
    }

    fn rhs(&self, _t: f64, x: &DVector<f64>, _u: &DVector<f64>) -> DVector<f64> {
        lorenz96_rhs(x, self.forcing).expect("dimension validated at construction")
    }

    fn jacobian(&self, _t: f64, x: &DVector<f64>, _u: &DVector<f64>) -> DMatrix<f64> {
        lorenz96_jacobian(x).expect("dimension validated at construction")
    }

    fn output_matrix(&self, _t: f64) -> DMatrix<f64> {
        paper_output_matrix(self.n, self.p).expect("dimensions validated at construction")
    }

    fn tag(&self) -> &str {
        "lorenz96"
    }

    fn hessian_norm_bound(&self) -> Option<f64> {
        // Each component has Hessian v e^T + e v^T with v = e_{i+1} - e_{i-2}
        // orthogonal to e = e_{i-1}; its spectral norm is ||v|| ||e|| = sqrt(2).
        Some(math::sqrt(2.0))
    }

    fn default_initial_state(&self) -> DVector<f64> {
        paper_initial_condition(self.n)
    }
}

type CoefficientFn = dyn Fn(f64) -> DMatrix<f64> + Send + Sync;

/// Linear time-varying test system `dx/dt = A(t) x`, `y = C x`.
pub struct LtvModel {
    tag: String,
    a: Box<CoefficientFn>,
    c: DMatrix<f64>,
    x0: DVector<f64>,
}

impl LtvModel {
    pub fn new(
        tag: impl Into<String>,
        a: Box<CoefficientFn>,
        c: DMatrix<f64>,
        x0: DVector<f64>,
    ) -> Self {
        Self {
            tag: tag.into(),
            a,
            c,
            x0,
        }
    }

    /// Coefficient matrix A(t).
    pub fn coefficient(&self, t: f64) -> DMatrix<f64> {
        (self.a)(t)
    }

    /// Double integrator with the first state measured.
    pub fn double_integrator() -> Self {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        Self::new(
            "double_integrator",
            Box::new(move |_| a.clone()),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DVector::from_element(2, 1.0),
        )
    }

    /// Scalar system `dx/dt = x/(1+t)`: dichotomy spectrum {0}, yet every
    /// finite-window upper Bohl estimate is strictly positive.
    pub fn scalar_counterexample() -> Self {
        Self::new(
            "scalar_counterexample",
            Box::new(|t| DMatrix::from_element(1, 1, 1.0 / (1.0 + t))),
            DMatrix::identity(1, 1),
            DVector::from_element(1, 1.0),
        )
    }

    /// Diagonal LTI system with the given rates; fully measured.
    pub fn diag_lti(rates: &[f64]) -> Self {
        let n = rates.len();
        let a = DMatrix::from_diagonal(&DVector::from_row_slice(rates));
        Self::new(
            "diag_lti",
            Box::new(move |_| a.clone()),
            DMatrix::identity(n, n),
            DVector::from_element(n, 1.0),
        )
    }

    /// Random-coefficient sinusoidal LTV system: a fixed diagonal plus
    /// seeded sinusoidal couplings. The catalog instance (dim 4, seed
    /// [`SINUSOIDAL_CATALOG_SEED`]) has two non-negative upper Bohl
    /// exponents (j* = 2), and the first two states are measured.
    pub fn sinusoidal(dim: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        // Well-separated baseline rates; for dim 4 this is (1.0, 0.2, -0.6, -1.4).
        let base: Vec<f64> = (0..dim)
            .map(|i| 1.0 - 2.4 * i as f64 / (dim as f64 - 1.0).max(1.0))
            .collect();
        let mut amp = DMatrix::zeros(dim, dim);
        let mut freq = DMatrix::zeros(dim, dim);
        let mut phase = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    amp[(i, j)] = 0.2 * (2.0 * rng.uniform01() - 1.0);
                    freq[(i, j)] = 0.5 + 2.5 * rng.uniform01();
                    phase[(i, j)] = 2.0 * core::f64::consts::PI * rng.uniform01();
                }
            }
        }
        let diag = DVector::from_vec(base);
        let a = move |t: f64| {
            let mut m = DMatrix::from_diagonal(&diag);
            for i in 0..dim {
                for j in 0..dim {
                    if i != j {
                        m[(i, j)] = amp[(i, j)] * math::sin(freq[(i, j)] * t + phase[(i, j)]);
                    }
                }
            }
            m
        };
        let p = 2.min(dim);
        let mut c = DMatrix::zeros(p, dim);
        for row in 0..p {
            c[(row, row)] = 1.0;
        }
        Self::new("sin_ltv", Box::new(a), c, DVector::from_element(dim, 1.0))
    }
}

impl DynamicalModel for LtvModel {
    fn dim(&self) -> usize {
        self.c.ncols()
    }

    fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    fn rhs(&self, t: f64, x: &DVector<f64>, _u: &DVector<f64>) -> DVector<f64> {
        (self.a)(t) * x
    }

    fn jacobian(&self, t: f64, _x: &DVector<f64>, _u: &DVector<f64>) -> DMatrix<f64> {
        (self.a)(t)
    }

    fn output_matrix(&self, _t: f64) -> DMatrix<f64> {
        self.c.clone()
    }

    fn tag(&self) -> &str {
        &self.tag
    }

    fn hessian_norm_bound(&self) -> Option<f64> {
        Some(0.0)
    }

    fn default_initial_state(&self) -> DVector<f64> {
        self.x0.clone()
    }
}

/// Fixed seed of the catalog sinusoidal LTV instance.
pub const SINUSOIDAL_CATALOG_SEED: u64 = 2;

/// The bundled test-model catalog: double integrator, the scalar
/// counterexample, diag(2, -1), and the seeded 4-state sinusoidal LTV.
pub fn test_models() -> Vec<Box<dyn DynamicalModel + Send + Sync>> {
    vec![
        Box::new(LtvModel::double_integrator()),
        Box::new(LtvModel::scalar_counterexample()),
        Box::new(LtvModel::diag_lti(&[2.0, -1.0])),
        Box::new(LtvModel::sinusoidal(4, SINUSOIDAL_CATALOG_SEED)),
    ]
}

/// Maximum relative deviation between the analytic Jacobian and a central
/// finite-difference Jacobian (step 1e-6) of `rhs`, over `points` seeded
/// random states. Used both in tests and by the `verify` command.
pub fn jacobian_consistency(model: &dyn DynamicalModel, seed: u64, points: usize) -> f64 {
    let n = model.dim();
    let u = DVector::zeros(model.input_dim());
    let mut rng = SplitMix64::new(seed);
    let fd_step = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let t = 5.0 * rng.uniform01();
        let x = DVector::from_fn(n, |_, _| 4.0 * (2.0 * rng.uniform01() - 1.0));
        let analytic = model.jacobian(t, &x, &u);
        let mut fd = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += fd_step;
            xm[j] -= fd_step;
            let df = (model.rhs(t, &xp, &u) - model.rhs(t, &xm, &u)) / (2.0 * fd_step);
            fd.column_mut(j).copy_from(&df);
        }
        let rel = (&analytic - &fd).norm() / analytic.norm().max(1.0);
        worst = worst.max(rel);
    }
    worst
}
