//! Reduced-order Riccati propagation and subspace observers.
//!
//! The extended subspace observer (ESO) co-integrates the state estimate, a
//! k-dimensional orthonormal frame evolving under the reduced QR flow of the
//! Jacobian along the estimate, and a k-by-k differential Riccati matrix
//! driven by the triangularized coefficient block `B1` and the projected
//! output matrix `C Q`. The feedback gain `L = Q P1 (C Q)^T` acts only inside
//! the span of the frame, so the Riccati equation is solved on the
//! unstable/neutral subspace instead of the full state space. The full-order
//! extended Kalman-Bucy filter (EKBF) is included as the baseline it reduces
//! to when `k = n`.

use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::models::DynamicalModel;
use crate::ode::{modified_gram_schmidt, StepSpec};
use crate::spectral::{split_skew_triangular, SubspaceFrame};
use crate::{Error, Result};

/// k-by-k Riccati matrix and its constant symmetric forcing term.
#[derive(Debug, Clone)]
pub struct ReducedRiccati {
    pub p1: DMatrix<f64>,
    pub g1: DMatrix<f64>,
}

impl ReducedRiccati {
    pub fn new(p1: DMatrix<f64>, g1: DMatrix<f64>) -> Self {
        Self { p1, g1 }
    }

    /// `P1(0) = p_scale * I`, `G1 = g_scale * I`.
    pub fn scaled_identity(k: usize, p_scale: f64, g_scale: f64) -> Self {
        Self {
            p1: p_scale * DMatrix::identity(k, k),
            g1: g_scale * DMatrix::identity(k, k),
        }
    }

    pub fn k(&self) -> usize {
        self.p1.nrows()
    }
}

/// n-by-n Riccati matrix and forcing for the full-order EKBF.
#[derive(Debug, Clone)]
pub struct FullRiccati {
    pub p: DMatrix<f64>,
    pub g: DMatrix<f64>,
}

impl FullRiccati {
    pub fn new(p: DMatrix<f64>, g: DMatrix<f64>) -> Self {
        Self { p, g }
    }

    pub fn scaled_identity(n: usize, p_scale: f64, g_scale: f64) -> Self {
        Self {
            p: p_scale * DMatrix::identity(n, n),
            g: g_scale * DMatrix::identity(n, n),
        }
    }
}

/// State of the extended subspace observer between steps.
#[derive(Debug, Clone)]
pub struct ObserverState {
    pub x_hat: DVector<f64>,
    pub frame: SubspaceFrame,
    pub riccati: ReducedRiccati,
    /// Cached gain `L = Q P1 (C Q)^T`, consistent with the fields above.
    pub gain: DMatrix<f64>,
}

impl ObserverState {
    /// Assembles a state and caches the gain for the output matrix `c`.
    pub fn new(
        x_hat: DVector<f64>,
        frame: SubspaceFrame,
        riccati: ReducedRiccati,
        c: &DMatrix<f64>,
    ) -> Result<Self> {
        if frame.k() != riccati.k() || x_hat.len() != frame.n() || c.ncols() != frame.n() {
            return Err(Error::DimensionMismatch {
                context: "observer state assembly",
            });
        }
        let gain = observer_gain(&frame, &riccati.p1, c)?;
        Ok(Self {
            x_hat,
            frame,
            riccati,
            gain,
        })
    }

    /// `||L - Q P1 (C Q)^T||`, for invariant checks.
    pub fn gain_defect(&self, c: &DMatrix<f64>) -> f64 {
        let expect = observer_gain(&self.frame, &self.riccati.p1, c)
            .expect("dimensions validated at construction");
        (&self.gain - expect).norm()
    }
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}

/// Right-hand side of the reduced Riccati equation
/// `B1 P1 + P1 B1^T - P1 Cbar^T Cbar P1 + G1`, explicitly symmetrized.
pub fn riccati_rhs(
    b1: &DMatrix<f64>,
    cbar: &DMatrix<f64>,
    p1: &DMatrix<f64>,
    g1: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let k = p1.nrows();
    if b1.nrows() != k || b1.ncols() != k || cbar.ncols() != k || g1.nrows() != k || g1.ncols() != k
    {
        return Err(Error::DimensionMismatch {
            context: "riccati_rhs",
        });
    }
    let bp = b1 * p1;
    let cp = cbar * p1;
    let rhs = &bp + bp.transpose() - cp.transpose() * &cp + g1;
    Ok(symmetrize(&rhs))
}

/// Subspace observer gain `L = Q P1 (C Q)^T`; its columns lie in span(Q).
pub fn observer_gain(
    frame: &SubspaceFrame,
    p1: &DMatrix<f64>,
    c: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if c.ncols() != frame.n() || p1.nrows() != frame.k() || p1.ncols() != frame.k() {
        return Err(Error::DimensionMismatch {
            context: "observer_gain",
        });
    }
    let cbar = c * frame.matrix();
    Ok(frame.matrix() * (p1 * cbar.transpose()))
}

struct EsoStageDerivative {
    dx: DVector<f64>,
    dp: DMatrix<f64>,
    dq: DMatrix<f64>,
}

fn eso_stage(
    model: &dyn DynamicalModel,
    u: &DVector<f64>,
    y: &DVector<f64>,
    t: f64,
    x_hat: &DVector<f64>,
    p1: &DMatrix<f64>,
    q: &DMatrix<f64>,
    g1: &DMatrix<f64>,
) -> Result<EsoStageDerivative> {
    let a = model.jacobian(t, x_hat, u);
    let c = model.output_matrix(t);
    let m = q.transpose() * &a * q;
    let (_, b1) = split_skew_triangular(&m);
    let cbar = &c * q;
    let gain = q * (p1 * cbar.transpose());
    let innovation = y - &c * x_hat;
    let dx = model.rhs(t, x_hat, u) + &gain * innovation;
    if !dx.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteDerivative { t });
    }
    let dp = riccati_rhs(&b1, &cbar, p1, g1)?;
    let dq = &a * q - q * &b1;
    Ok(EsoStageDerivative { dx, dp, dq })
}

/// One step of the extended subspace observer: stage-consistent RK4 on the
/// coupled `(x_hat, P1, Q)` system with the Jacobian re-evaluated at every
/// stage estimate and the measurement `y` held constant over the step. The
/// frame is re-orthonormalized, `P1` symmetrized, and the gain refreshed at
/// `t + h`.
pub fn eso_step(
    model: &dyn DynamicalModel,
    u: &DVector<f64>,
    y: &DVector<f64>,
    state: &ObserverState,
    t: f64,
    h: f64,
) -> Result<ObserverState> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidStepSize { h });
    }
    let g1 = &state.riccati.g1;
    let x = &state.x_hat;
    let p = &state.riccati.p1;
    let q = state.frame.matrix();
    let half = 0.5 * h;

    let k1 = eso_stage(model, u, y, t, x, p, q, g1)?;
    let k2 = eso_stage(
        model,
        u,
        y,
        t + half,
        &(x + half * &k1.dx),
        &(p + half * &k1.dp),
        &(q + half * &k1.dq),
        g1,
    )?;
    let k3 = eso_stage(
        model,
        u,
        y,
        t + half,
        &(x + half * &k2.dx),
        &(p + half * &k2.dp),
        &(q + half * &k2.dq),
        g1,
    )?;
    let k4 = eso_stage(
        model,
        u,
        y,
        t + h,
        &(x + h * &k3.dx),
        &(p + h * &k3.dp),
        &(q + h * &k3.dq),
        g1,
    )?;

    let x_next = x + (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    let p_next = symmetrize(&(p + (h / 6.0) * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp)));
    let q_advanced = q + (h / 6.0) * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    let q_next = match modified_gram_schmidt(&q_advanced) {
        Ok((qn, _)) => qn,
        Err(Error::SingularMatrix { column }) => return Err(Error::FrameCollapse { t, column }),
        Err(e) => return Err(e),
    };
    let frame = SubspaceFrame::new(q_next)?;
    let riccati = ReducedRiccati::new(p_next, g1.clone());
    ObserverState::new(x_next, frame, riccati, &model.output_matrix(t + h))
}

/// One step of the full-order extended Kalman-Bucy filter: stage-consistent
/// RK4 on the coupled `(x_hat, P)` system with gain `P C^T`.
pub fn ekbf_step(
    model: &dyn DynamicalModel,
    u: &DVector<f64>,
    y: &DVector<f64>,
    x_hat: &DVector<f64>,
    riccati: &FullRiccati,
    t: f64,
    h: f64,
) -> Result<(DVector<f64>, FullRiccati)> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidStepSize { h });
    }
    let g = &riccati.g;
    let stage = |t: f64,
                 x: &DVector<f64>,
                 p: &DMatrix<f64>|
     -> Result<(DVector<f64>, DMatrix<f64>)> {
        let a = model.jacobian(t, x, u);
        let c = model.output_matrix(t);
        let innovation = y - &c * x;
        let dx = model.rhs(t, x, u) + p * c.transpose() * innovation;
        if !dx.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteDerivative { t });
        }
        let ap = &a * p;
        let cp = &c * p;
        let dp = symmetrize(&(&ap + ap.transpose() - cp.transpose() * &cp + g));
        Ok((dx, dp))
    };
    let half = 0.5 * h;
    let x = x_hat;
    let p = &riccati.p;
    let (dx1, dp1) = stage(t, x, p)?;
    let (dx2, dp2) = stage(t + half, &(x + half * &dx1), &(p + half * &dp1))?;
    let (dx3, dp3) = stage(t + half, &(x + half * &dx2), &(p + half * &dp2))?;
    let (dx4, dp4) = stage(t + h, &(x + h * &dx3), &(p + h * &dp3))?;
    let x_next = x + (h / 6.0) * (dx1 + 2.0 * dx2 + 2.0 * dx3 + dx4);
    let p_next = symmetrize(&(p + (h / 6.0) * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4)));
    Ok((x_next, FullRiccati::new(p_next, g.clone())))
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn symmetric_eig_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in eig.eigenvalues.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Monitoring thresholds for observer runs.
#[derive(Debug, Clone, Copy)]
pub struct RunMonitor {
    /// Abort with [`Error::Divergence`] when the error norm exceeds this.
    pub divergence_threshold: f64,
    /// Attempt a Cholesky factorization of `P1` every this many steps and
    /// abort with [`Error::DefinitenessLoss`] when it fails.
    pub definiteness_check_every: usize,
}

impl Default for RunMonitor {
    fn default() -> Self {
        Self {
            divergence_threshold: 1e6,
            definiteness_check_every: 100,
        }
    }
}

/// One co-integrated step of truth and observer: the combined
/// `(x, x_hat, P1, Q)` system advances through one stage-consistent RK4 step
/// with the measurement evaluated at every stage of the truth state
/// (continuous-measurement semantics). Trajectories of the system are then
/// trajectories of the observer to machine precision.
pub fn eso_costep(
    model: &dyn DynamicalModel,
    u: &DVector<f64>,
    truth: &DVector<f64>,
    state: &ObserverState,
    t: f64,
    h: f64,
) -> Result<(DVector<f64>, ObserverState)> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidStepSize { h });
    }
    let g1 = &state.riccati.g1;
    let xh = &state.x_hat;
    let p = &state.riccati.p1;
    let q = state.frame.matrix();
    let half = 0.5 * h;

    let stage = |t: f64,
                 x: &DVector<f64>,
                 xh: &DVector<f64>,
                 p: &DMatrix<f64>,
                 q: &DMatrix<f64>|
     -> Result<(DVector<f64>, EsoStageDerivative)> {
        let dx = model.rhs(t, x, u);
        if !dx.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteDerivative { t });
        }
        let y = model.output_matrix(t) * x;
        Ok((dx, eso_stage(model, u, &y, t, xh, p, q, g1)?))
    };

    let (dt1, k1) = stage(t, truth, xh, p, q)?;
    let (dt2, k2) = stage(
        t + half,
        &(truth + half * &dt1),
        &(xh + half * &k1.dx),
        &(p + half * &k1.dp),
        &(q + half * &k1.dq),
    )?;
    let (dt3, k3) = stage(
        t + half,
        &(truth + half * &dt2),
        &(xh + half * &k2.dx),
        &(p + half * &k2.dp),
        &(q + half * &k2.dq),
    )?;
    let (dt4, k4) = stage(
        t + h,
        &(truth + h * &dt3),
        &(xh + h * &k3.dx),
        &(p + h * &k3.dp),
        &(q + h * &k3.dq),
    )?;

    let truth_next = truth + (h / 6.0) * (dt1 + 2.0 * dt2 + 2.0 * dt3 + dt4);
    let x_next = xh + (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    let p_next = symmetrize(&(p + (h / 6.0) * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp)));
    let q_advanced = q + (h / 6.0) * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    let q_next = match modified_gram_schmidt(&q_advanced) {
        Ok((qn, _)) => qn,
        Err(Error::SingularMatrix { column }) => return Err(Error::FrameCollapse { t, column }),
        Err(e) => return Err(e),
    };
    let frame = SubspaceFrame::new(q_next)?;
    let riccati = ReducedRiccati::new(p_next, g1.clone());
    let obs = ObserverState::new(x_next, frame, riccati, &model.output_matrix(t + h))?;
    Ok((truth_next, obs))
}

/// Runs the ESO co-integrated with the truth trajectory.
///
/// `on_step` receives every grid point (including `t0`) with the current
/// truth state and observer state. Aborts with [`Error::Divergence`] or
/// [`Error::DefinitenessLoss`] per the monitor settings.
pub fn run_eso<F>(
    model: &dyn DynamicalModel,
    truth0: &DVector<f64>,
    observer0: ObserverState,
    spec: &StepSpec,
    monitor: &RunMonitor,
    mut on_step: F,
) -> Result<(DVector<f64>, ObserverState)>
where
    F: FnMut(f64, &DVector<f64>, &ObserverState),
{
    let u = DVector::zeros(model.input_dim());
    let mut truth = truth0.clone();
    let mut obs = observer0;
    on_step(spec.t0(), &truth, &obs);
    for i in 0..spec.num_steps() {
        let t = spec.time_at(i);
        let h = spec.time_at(i + 1) - t;
        let (truth_next, obs_next) = eso_costep(model, &u, &truth, &obs, t, h)?;
        truth = truth_next;
        obs = obs_next;
        let t_next = spec.time_at(i + 1);
        let err_norm = (&truth - &obs.x_hat).norm();
        if err_norm > monitor.divergence_threshold {
            return Err(Error::Divergence {
                t: t_next,
                norm: err_norm,
            });
        }
        if monitor.definiteness_check_every > 0
            && (i + 1) % monitor.definiteness_check_every == 0
            && Cholesky::new(obs.riccati.p1.clone()).is_none()
        {
            return Err(Error::DefinitenessLoss { t: t_next });
        }
        on_step(t_next, &truth, &obs);
    }
    Ok((truth, obs))
}

/// One co-integrated truth + EKBF step (same measurement semantics as
/// [`eso_costep`]).
pub fn ekbf_costep(
    model: &dyn DynamicalModel,
    u: &DVector<f64>,
    truth: &DVector<f64>,
    x_hat: &DVector<f64>,
    riccati: &FullRiccati,
    t: f64,
    h: f64,
) -> Result<(DVector<f64>, DVector<f64>, FullRiccati)> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidStepSize { h });
    }
    let g = &riccati.g;
    type Stage = (DVector<f64>, DVector<f64>, DMatrix<f64>);
    let stage = |t: f64,
                 x: &DVector<f64>,
                 xh: &DVector<f64>,
                 p: &DMatrix<f64>|
     -> Result<Stage> {
        let dx = model.rhs(t, x, u);
        let a = model.jacobian(t, xh, u);
        let c = model.output_matrix(t);
        let innovation = &c * x - &c * xh;
        let dxh = model.rhs(t, xh, u) + p * c.transpose() * innovation;
        if !dx.iter().all(|v| v.is_finite()) || !dxh.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteDerivative { t });
        }
        let ap = &a * p;
        let cp = &c * p;
        let dp = symmetrize(&(&ap + ap.transpose() - cp.transpose() * &cp + g));
        Ok((dx, dxh, dp))
    };
    let half = 0.5 * h;
    let p = &riccati.p;
    let (dt1, dx1, dp1) = stage(t, truth, x_hat, p)?;
    let (dt2, dx2, dp2) = stage(
        t + half,
        &(truth + half * &dt1),
        &(x_hat + half * &dx1),
        &(p + half * &dp1),
    )?;
    let (dt3, dx3, dp3) = stage(
        t + half,
        &(truth + half * &dt2),
        &(x_hat + half * &dx2),
        &(p + half * &dp2),
    )?;
    let (dt4, dx4, dp4) = stage(
        t + h,
        &(truth + h * &dt3),
        &(x_hat + h * &dx3),
        &(p + h * &dp3),
    )?;
    let truth_next = truth + (h / 6.0) * (dt1 + 2.0 * dt2 + 2.0 * dt3 + dt4);
    let x_next = x_hat + (h / 6.0) * (dx1 + 2.0 * dx2 + 2.0 * dx3 + dx4);
    let p_next = symmetrize(&(p + (h / 6.0) * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4)));
    Ok((truth_next, x_next, FullRiccati::new(p_next, g.clone())))
}

/// Runs the EKBF co-integrated with the truth trajectory (same protocol as
/// [`run_eso`]).
pub fn run_ekbf<F>(
    model: &dyn DynamicalModel,
    truth0: &DVector<f64>,
    x_hat0: &DVector<f64>,
    riccati0: FullRiccati,
    spec: &StepSpec,
    monitor: &RunMonitor,
    mut on_step: F,
) -> Result<(DVector<f64>, DVector<f64>, FullRiccati)>
where
    F: FnMut(f64, &DVector<f64>, &DVector<f64>, &FullRiccati),
{
    let u = DVector::zeros(model.input_dim());
    let mut truth = truth0.clone();
    let mut x_hat = x_hat0.clone();
    let mut riccati = riccati0;
    on_step(spec.t0(), &truth, &x_hat, &riccati);
    for i in 0..spec.num_steps() {
        let t = spec.time_at(i);
        let h = spec.time_at(i + 1) - t;
        let (truth_next, x_next, r_next) = ekbf_costep(model, &u, &truth, &x_hat, &riccati, t, h)?;
        truth = truth_next;
        x_hat = x_next;
        riccati = r_next;
        let t_next = spec.time_at(i + 1);
        let err_norm = (&truth - &x_hat).norm();
        if err_norm > monitor.divergence_threshold {
            return Err(Error::Divergence {
                t: t_next,
                norm: err_norm,
            });
        }
        on_step(t_next, &truth, &x_hat, &riccati);
    }
    Ok((truth, x_hat, riccati))
}

/// Co-integrates the full n-by-n Riccati equation (in triangularized
/// coordinates, with forcing `blockdiag(G1, 0)` and initial value
/// `blockdiag(P1(t0), 0)`) together with the reduced k-by-k Riccati
/// equation, and returns the largest Frobenius deviation
/// `||P(t) - blockdiag(P1(t), 0)||` over the grid.
pub fn full_riccati_projection_check(
    model: &dyn DynamicalModel,
    x0: &DVector<f64>,
    k: usize,
    p1_0: &DMatrix<f64>,
    g1: &DMatrix<f64>,
    spec: &StepSpec,
) -> Result<f64> {
    let n = model.dim();
    if k == 0 || k > n || p1_0.nrows() != k || g1.nrows() != k {
        return Err(Error::DimensionMismatch {
            context: "full_riccati_projection_check",
        });
    }
    let u = DVector::zeros(model.input_dim());
    let mut g_full = DMatrix::zeros(n, n);
    g_full.view_mut((0, 0), (k, k)).copy_from(g1);

    let mut x = x0.clone();
    let mut q = DMatrix::<f64>::identity(n, n);
    let mut p_full = DMatrix::zeros(n, n);
    p_full.view_mut((0, 0), (k, k)).copy_from(p1_0);
    let mut p_red = p1_0.clone();

    type Stage = (DVector<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>);
    let stage = |t: f64,
                 x: &DVector<f64>,
                 q: &DMatrix<f64>,
                 p: &DMatrix<f64>,
                 p1: &DMatrix<f64>|
     -> Result<Stage> {
        let a = model.jacobian(t, x, &u);
        let c = model.output_matrix(t);
        let dx = model.rhs(t, x, &u);
        if !dx.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteDerivative { t });
        }
        let m = q.transpose() * &a * q;
        let (_, b) = split_skew_triangular(&m);
        let dq = &a * q - q * &b;
        let cbar = &c * q;
        let bp = &b * p;
        let cp = &cbar * p;
        let dp = &bp + bp.transpose() - cp.transpose() * &cp + &g_full;
        let b1 = b.view((0, 0), (k, k)).clone_owned();
        let cbar1 = cbar.view((0, 0), (c.nrows(), k)).clone_owned();
        let dp1 = riccati_rhs(&b1, &cbar1, p1, g1)?;
        Ok((dx, dq, symmetrize(&dp), dp1))
    };

    let deviation = |p: &DMatrix<f64>, p1: &DMatrix<f64>| -> f64 {
        let mut block = DMatrix::zeros(n, n);
        block.view_mut((0, 0), (k, k)).copy_from(p1);
        (p - block).norm()
    };

    let mut worst = deviation(&p_full, &p_red);
    for i in 0..spec.num_steps() {
        let t = spec.time_at(i);
        let h = spec.time_at(i + 1) - t;
        let half = 0.5 * h;
        let (dx1, dq1, dp1, dr1) = stage(t, &x, &q, &p_full, &p_red)?;
        let (dx2, dq2, dp2, dr2) = stage(
            t + half,
            &(&x + half * &dx1),
            &(&q + half * &dq1),
            &(&p_full + half * &dp1),
            &(&p_red + half * &dr1),
        )?;
        let (dx3, dq3, dp3, dr3) = stage(
            t + half,
            &(&x + half * &dx2),
            &(&q + half * &dq2),
            &(&p_full + half * &dp2),
            &(&p_red + half * &dr2),
        )?;
        let (dx4, dq4, dp4, dr4) = stage(
            t + h,
            &(&x + h * &dx3),
            &(&q + h * &dq3),
            &(&p_full + h * &dp3),
            &(&p_red + h * &dr3),
        )?;
        x += (h / 6.0) * (dx1 + 2.0 * dx2 + 2.0 * dx3 + dx4);
        let q_adv = &q + (h / 6.0) * (dq1 + 2.0 * dq2 + 2.0 * dq3 + dq4);
        q = match modified_gram_schmidt(&q_adv) {
            Ok((qn, _)) => qn,
            Err(Error::SingularMatrix { column }) => {
                return Err(Error::FrameCollapse { t, column })
            }
            Err(e) => return Err(e),
        };
        p_full = symmetrize(&(&p_full + (h / 6.0) * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4)));
        p_red = symmetrize(&(&p_red + (h / 6.0) * (dr1 + 2.0 * dr2 + 2.0 * dr3 + dr4)));
        let dev = deviation(&p_full, &p_red);
        if dev > worst {
            worst = dev;
        }
    }
    Ok(worst)
}

/// Empirical check of the convergence-theorem assumptions along a run.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    /// Largest spectral norm of the Jacobian over the supplied samples.
    pub sup_jacobian_norm: f64,
    /// Smallest eigenvalue of `P1` seen over the run.
    pub min_eig_p1: f64,
    /// Largest eigenvalue of `P1` seen over the run.
    pub max_eig_p1: f64,
    /// Taylor-remainder constant `kappa = sup_i ||H_{f_i}|| / 2` when the
    /// model's Hessian bound is known in closed form.
    pub kappa: Option<f64>,
}

/// Samples the Jacobian norm along trajectory states and folds in the
/// eigenvalue track of `P1` recorded during a run.
pub fn assumption_probe(
    model: &dyn DynamicalModel,
    times: &[f64],
    states: &[DVector<f64>],
    p1_eig_track: &[(f64, f64)],
) -> AssumptionReport {
    let u = DVector::zeros(model.input_dim());
    let mut sup_norm: f64 = 0.0;
    for (&t, x) in times.iter().zip(states) {
        let a = model.jacobian(t, x, &u);
        let spectral_norm = a.singular_values()[0];
        sup_norm = sup_norm.max(spectral_norm);
    }
    let mut min_eig = f64::INFINITY;
    let mut max_eig = f64::NEG_INFINITY;
    for &(lo, hi) in p1_eig_track {
        min_eig = min_eig.min(lo);
        max_eig = max_eig.max(hi);
    }
    AssumptionReport {
        sup_jacobian_norm: sup_norm,
        min_eig_p1: min_eig,
        max_eig_p1: max_eig,
        kappa: model.hessian_norm_bound().map(|b| 0.5 * b),
    }
}

/// Error norms of a completed observer run on the grid of `spec`.
pub fn error_norms(truth: &[DVector<f64>], estimates: &[DVector<f64>]) -> Vec<f64> {
    truth
        .iter()
        .zip(estimates)
        .map(|(x, xh)| (x - xh).norm())
        .collect()
}
