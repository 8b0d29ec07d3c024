//! Deterministic fixed-step integration of vector and matrix ODEs.
//!
//! The integrators here are intentionally plain: classical RK4 on a uniform
//! grid, with the final step shortened when the horizon is not an integer
//! multiple of the step so windowed averages always land exactly on `tf`.
//! [`projected_matrix_step`] combines one RK4 step of a matrix flow with a
//! modified Gram-Schmidt re-orthonormalization, the projected integration
//! scheme used to keep subspace frames orthonormal after every step.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Numerical rank cutoff for a column norm during Gram-Schmidt elimination.
const RANK_EPS: f64 = 1e-300;

/// Uniform integration grid: step `h` over `[t0, tf]`.
///
/// The number of full steps is `round((tf - t0)/h)` when that product matches
/// the horizon; otherwise the grid uses `floor` full steps plus one shortened
/// final step landing exactly on `tf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSpec {
    h: f64,
    t0: f64,
    tf: f64,
    steps: usize,
}

impl StepSpec {
    pub fn new(h: f64, t0: f64, tf: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidStepSize { h });
        }
        if !(t0.is_finite() && tf.is_finite() && tf >= t0) {
            return Err(Error::InvalidHorizon { t0, tf });
        }
        let span = tf - t0;
        let ratio = span / h;
        let rounded = libm::round(ratio);
        let steps = if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            rounded as usize
        } else {
            // Partial final step.
            ratio as usize + 1
        };
        Ok(Self { h, t0, tf, steps })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    /// Number of integration steps (= number of grid points minus one).
    pub fn num_steps(&self) -> usize {
        self.steps
    }

    /// Grid time of sample `i` (`0..=num_steps`); the last sample is `tf`.
    pub fn time_at(&self, i: usize) -> f64 {
        if i >= self.steps {
            self.tf
        } else {
            self.t0 + i as f64 * self.h
        }
    }
}

/// Times and states produced by [`integrate`].
///
/// `times` is uniform with step `h` up to floating-point accumulation
/// (`|dt - h| <= 1e-12 * (1 + |t|)`), except for a possibly shortened final
/// interval when the horizon is not a multiple of `h`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory has at least one sample")
    }
}

fn check_finite(v: &DVector<f64>, t: f64) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteDerivative { t })
    }
}

/// One classical 4-stage Runge-Kutta step for `dx/dt = f(t, x)`.
pub fn rk4_step<F>(f: &F, t: f64, x: &DVector<f64>, h: f64) -> Result<DVector<f64>>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidStepSize { h });
    }
    let half = 0.5 * h;
    let k1 = f(t, x);
    check_finite(&k1, t)?;
    let k2 = f(t + half, &(x + half * &k1));
    check_finite(&k2, t + half)?;
    let k3 = f(t + half, &(x + half * &k2));
    check_finite(&k3, t + half)?;
    let k4 = f(t + h, &(x + h * &k3));
    check_finite(&k4, t + h)?;
    Ok(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Repeated [`rk4_step`] over the grid of `spec`, recording every sample.
///
/// `tap` is invoked after each accepted step with the new `(t, x)`.
pub fn integrate_with<F, T>(
    f: &F,
    spec: &StepSpec,
    x0: &DVector<f64>,
    mut tap: T,
) -> Result<Trajectory>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
    T: FnMut(f64, &DVector<f64>),
{
    let mut times = Vec::with_capacity(spec.num_steps() + 1);
    let mut states = Vec::with_capacity(spec.num_steps() + 1);
    let mut x = x0.clone();
    times.push(spec.t0());
    states.push(x.clone());
    for i in 0..spec.num_steps() {
        let t = spec.time_at(i);
        let t_next = spec.time_at(i + 1);
        x = rk4_step(f, t, &x, t_next - t)?;
        tap(t_next, &x);
        times.push(t_next);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states })
}

/// [`integrate_with`] without a per-step callback.
pub fn integrate<F>(f: &F, spec: &StepSpec, x0: &DVector<f64>) -> Result<Trajectory>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    integrate_with(f, spec, x0, |_, _| {})
}

/// Modified Gram-Schmidt factorization `M = Q R` with orthonormal `Q` and
/// upper-triangular `R` whose diagonal is positive (the uniqueness
/// convention used everywhere in this crate).
pub fn modified_gram_schmidt(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (n, k) = m.shape();
    if k > n {
        return Err(Error::DimensionMismatch {
            context: "modified_gram_schmidt: more columns than rows",
        });
    }
    let mut q = m.clone();
    let mut r = DMatrix::<f64>::zeros(k, k);
    for j in 0..k {
        for i in 0..j {
            let proj = q.column(i).dot(&q.column(j));
            r[(i, j)] = proj;
            let qi = q.column(i).clone_owned();
            q.column_mut(j).axpy(-proj, &qi, 1.0);
        }
        let norm = q.column(j).norm();
        if !(norm.is_finite() && norm > RANK_EPS) {
            return Err(Error::SingularMatrix { column: j });
        }
        r[(j, j)] = norm;
        q.column_mut(j).scale_mut(1.0 / norm);
    }
    Ok((q, r))
}

fn check_finite_matrix(m: &DMatrix<f64>, t: f64) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteDerivative { t })
    }
}

/// One RK4 step of a matrix flow `dQ/dt = rhs(t, Q)` followed by modified
/// Gram-Schmidt; returns the orthonormalized Q factor only.
pub fn projected_matrix_step<F>(
    rhs: &F,
    t: f64,
    q: &DMatrix<f64>,
    h: f64,
) -> Result<DMatrix<f64>>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidStepSize { h });
    }
    let half = 0.5 * h;
    let k1 = rhs(t, q);
    check_finite_matrix(&k1, t)?;
    let k2 = rhs(t + half, &(q + half * &k1));
    check_finite_matrix(&k2, t + half)?;
    let k3 = rhs(t + half, &(q + half * &k2));
    check_finite_matrix(&k3, t + half)?;
    let k4 = rhs(t + h, &(q + h * &k3));
    check_finite_matrix(&k4, t + h)?;
    let advanced = q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    match modified_gram_schmidt(&advanced) {
        Ok((qn, _)) => Ok(qn),
        Err(Error::SingularMatrix { column }) => Err(Error::FrameCollapse { t, column }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    
    #[test]
    fn rk4_zero_field_fixed_point() {
        let f = |_t: f64, _x: &DVector<f64>| DVector::zeros(2);
        let x = DVector::from_row_slice(&[1.0, 2.0]);
        let out = rk4_step(&f, 0.0, &x, 0.1).unwrap();
        assert_eq!(out, x);
    }

    #[test]
    fn rk4_scalar_decay_matches_hand_evaluated_stages() {
        // f(x) = -x, h = 0.1: the RK4 polynomial 1 - h + h^2/2 - h^3/6 + h^4/24.
        let f = |_t: f64, x: &DVector<f64>| -x.clone();
        let out = rk4_step(&f, 0.0, &DVector::from_row_slice(&[1.0]), 0.1).unwrap();
        assert_abs_diff_eq!(out[0], 0.9048375, epsilon = 1e-15);
    }

    #[test]
    fn rk4_exact_on_double_integrator() {
        let f = |_t: f64, x: &DVector<f64>| DVector::from_row_slice(&[x[1], 0.0]);
        let out = rk4_step(&f, 0.0, &DVector::from_row_slice(&[0.0, 1.0]), 0.5).unwrap();
        assert_eq!(out[0], 0.5);
        assert_eq!(out[1], 1.0);
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        // Halving h shrinks the endpoint error on dx/dt = -x over [0,1] by ~16.
        let f = |_t: f64, x: &DVector<f64>| -x.clone();
        let endpoint = |h: f64| {
            let spec = StepSpec::new(h, 0.0, 1.0).unwrap();
            integrate(&f, &spec, &DVector::from_row_slice(&[1.0])).unwrap().final_state()[0]
        };
        let exact = (-1.0f64).exp();
        let e1 = (endpoint(0.1) - exact).abs();
        let e2 = (endpoint(0.05) - exact).abs();
        let ratio = e1 / e2;
        assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rk4_rejects_non_finite_derivative() {
        let f = |_t: f64, x: &DVector<f64>| DVector::from_row_slice(&[1.0 / (x[0] - 1.0)]);
        let err = rk4_step(&f, 2.0, &DVector::from_row_slice(&[1.0]), 0.1).unwrap_err();
        assert_eq!(err, Error::NonFiniteDerivative { t: 2.0 });
    }

    #[test]
    fn integrate_zero_field_constant() {
        let f = |_t: f64, _x: &DVector<f64>| DVector::zeros(2);
        let spec = StepSpec::new(0.25, 0.0, 1.0).unwrap();
        let x0 = DVector::from_row_slice(&[3.0, -1.0]);
        let traj = integrate(&f, &spec, &x0).unwrap();
        assert_eq!(traj.len(), 5);
        for s in &traj.states {
            assert_eq!(s, &x0);
        }
    }

    #[test]
    fn integrate_scalar_linear_growth() {
        // dx/dt = x/(1+t), x(0) = 1 has solution x(t) = 1 + t.
        let f = |t: f64, x: &DVector<f64>| x / (1.0 + t);
        let spec = StepSpec::new(1e-3, 0.0, 9.0).unwrap();
        let traj = integrate(&f, &spec, &DVector::from_row_slice(&[1.0])).unwrap();
        let x_end = traj.final_state()[0];
        assert!((x_end - 10.0).abs() / 10.0 < 1e-6, "x_end {x_end}");
    }

    #[test]
    fn integrate_grid_is_uniform() {
        let f = |_t: f64, x: &DVector<f64>| -x.clone();
        let spec = StepSpec::new(0.005, 0.0, 5.0).unwrap();
        let traj = integrate(&f, &spec, &DVector::from_row_slice(&[1.0])).unwrap();
        assert_eq!(traj.len(), 1001);
        for w in traj.times.windows(2) {
            assert!((w[1] - w[0] - 0.005).abs() <= 1e-12 * (1.0 + w[1].abs()));
        }
        assert_eq!(*traj.times.last().unwrap(), 5.0);
    }

    #[test]
    fn integrate_partial_final_step_lands_on_tf() {
        let f = |_t: f64, _x: &DVector<f64>| DVector::from_row_slice(&[1.0]);
        let spec = StepSpec::new(0.4, 0.0, 1.0).unwrap();
        assert_eq!(spec.num_steps(), 3);
        let traj = integrate(&f, &spec, &DVector::from_row_slice(&[0.0])).unwrap();
        assert_eq!(*traj.times.last().unwrap(), 1.0);
        assert_abs_diff_eq!(traj.final_state()[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn integrate_tap_sees_every_step() {
        let f = |_t: f64, _x: &DVector<f64>| DVector::from_row_slice(&[1.0]);
        let spec = StepSpec::new(0.25, 0.0, 1.0).unwrap();
        let mut seen = Vec::new();
        integrate_with(&f, &spec, &DVector::from_row_slice(&[0.0]), |t, _| seen.push(t)).unwrap();
        assert_eq!(seen, vec![0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn mgs_identity() {
        let m = DMatrix::<f64>::identity(3, 3);
        let (q, r) = modified_gram_schmidt(&m).unwrap();
        assert_eq!(q, DMatrix::identity(3, 3));
        assert_eq!(r, DMatrix::identity(3, 3));
    }

    #[test]
    fn mgs_scaled_orthogonal_columns() {
        let m = DMatrix::from_row_slice(3, 2, &[2.0, 0.0, 0.0, 0.0, 0.0, 3.0]);
        let (q, r) = modified_gram_schmidt(&m).unwrap();
        let q_expect = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(q, q_expect);
        assert_eq!(r, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]));
    }

    #[test]
    fn mgs_rank_deficient_reports_column() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        let err = modified_gram_schmidt(&m).unwrap_err();
        assert_eq!(err, Error::SingularMatrix { column: 1 });
    }

    #[test]
    fn projected_step_zero_field_identity() {
        let q0 = DMatrix::<f64>::identity(4, 2);
        let rhs = |_t: f64, _q: &DMatrix<f64>| DMatrix::zeros(4, 2);
        let q1 = projected_matrix_step(&rhs, 0.0, &q0, 0.01).unwrap();
        assert_eq!(q1, q0);
    }

    #[test]
    fn projected_step_tracks_rotation_flow() {
        // dQ/dt = S Q with constant skew S has solution exp(S t) Q0; the
        // projected integrator must follow it to fourth order.
        let s = DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 1.0, -0.5, -1.0, 0.0, 0.3, 0.5, -0.3, 0.0],
        );
        let q0 = DMatrix::<f64>::identity(3, 3);
        let rhs = |_t: f64, q: &DMatrix<f64>| &s * q;
        let h = 0.01;
        let steps = 100;
        let mut q = q0.clone();
        for i in 0..steps {
            q = projected_matrix_step(&rhs, i as f64 * h, &q, h).unwrap();
        }
        let exact = (&s * (h * steps as f64)).exp() * q0;
        let err = (&q - &exact).norm();
        assert!(err < 1e-6, "rotation flow error {err}");
    }

    #[test]
    fn projected_step_orthogonality_drift_stays_tiny() {
        // Full QR flow for a constant A over 10^4 steps.
        let a = DMatrix::from_row_slice(2, 2, &[0.3, 1.0, -0.2, -0.5]);
        let rhs = |_t: f64, q: &DMatrix<f64>| {
            let m = q.transpose() * &a * q;
            let mut s = DMatrix::zeros(2, 2);
            s[(1, 0)] = m[(1, 0)];
            s[(0, 1)] = -m[(1, 0)];
            q * s
        };
        let mut q = DMatrix::<f64>::identity(2, 2);
        let h = 1e-3;
        let mut worst: f64 = 0.0;
        for i in 0..10_000 {
            q = projected_matrix_step(&rhs, i as f64 * h, &q, h).unwrap();
            let defect = (q.transpose() * &q - DMatrix::identity(2, 2)).norm();
            worst = worst.max(defect);
        }
        assert!(worst <= 1e-10, "orthogonality drift {worst}");
    }
}
