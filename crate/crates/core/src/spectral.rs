//! Continuous QR flow along a trajectory and spectral estimation.
//!
//! A [`SubspaceFrame`] holds the leading `k` orthonormal directions of a
//! triangularizing change of coordinates. Evolving it with the reduced QR
//! flow while sampling the diagonal of the triangularized coefficient matrix
//! yields a [`DiagonalRecord`], from which Lyapunov exponents (full-horizon
//! averages) and Bohl exponent estimates (extrema of sliding-window averages
//! of length `H`) are computed. Any finite `H` can only widen the true
//! dichotomy spectral interval, so the window extremes bracket the Lyapunov
//! exponent of the same direction.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::models::DynamicalModel;
use crate::ode::{modified_gram_schmidt, StepSpec};
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Orthonormality tolerance enforced on frames.
pub const FRAME_TOL: f64 = 1e-10;

/// An n-by-k matrix with orthonormal columns evolving under the reduced QR flow.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceFrame {
    q: DMatrix<f64>,
}

impl SubspaceFrame {
    /// Wraps a matrix, rejecting it when `||Q^T Q - I|| > 1e-10`.
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        let defect = orthogonality_defect(&q);
        if defect > FRAME_TOL {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(Self { q })
    }

    /// The first k columns of the n-by-n identity.
    pub fn identity(n: usize, k: usize) -> Self {
        Self {
            q: DMatrix::identity(n, k),
        }
    }

    /// Haar-like random frame: the Q factor of a seeded standard-Gaussian
    /// n-by-k matrix under the positive-diagonal QR convention.
    pub fn random(n: usize, k: usize, rng: &mut SplitMix64) -> Self {
        let g = rng.gaussian_matrix(n, k);
        let (q, _) = modified_gram_schmidt(&g).expect("Gaussian matrix is full rank");
        Self { q }
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn k(&self) -> usize {
        self.q.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.q
    }

    /// `||Q^T Q - I||`.
    pub fn orthogonality_defect(&self) -> f64 {
        orthogonality_defect(&self.q)
    }
}

fn orthogonality_defect(q: &DMatrix<f64>) -> f64 {
    let k = q.ncols();
    (q.transpose() * q - DMatrix::<f64>::identity(k, k)).norm()
}

/// Splits `M = Q^T A Q` into the skew part `S1` (strict lower triangle
/// mirrored) and the upper-triangular part `B1 = M - S1`. The strict lower
/// triangle of `B1` cancels exactly, entry by entry.
pub(crate) fn split_skew_triangular(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let k = m.nrows();
    let mut s = DMatrix::zeros(k, k);
    let mut b = DMatrix::zeros(k, k);
    for i in 0..k {
        b[(i, i)] = m[(i, i)];
        for j in 0..i {
            s[(i, j)] = m[(i, j)];
            s[(j, i)] = -m[(i, j)];
            b[(j, i)] = m[(j, i)] + m[(i, j)];
        }
    }
    (s, b)
}

fn projected_coefficient(frame: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != frame.nrows() || a.ncols() != frame.nrows() {
        return Err(Error::DimensionMismatch {
            context: "coefficient matrix vs frame",
        });
    }
    Ok(frame.transpose() * a * frame)
}

/// Skew-symmetric k-by-k matrix with `s_ij = q_i^T A q_j` for `i > j`.
pub fn skew_lower(frame: &SubspaceFrame, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = projected_coefficient(frame.matrix(), a)?;
    Ok(split_skew_triangular(&m).0)
}

/// Upper-triangular `B1 = Q^T A Q - S1`; its strict lower triangle is zero
/// by construction.
pub fn b1(frame: &SubspaceFrame, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = projected_coefficient(frame.matrix(), a)?;
    Ok(split_skew_triangular(&m).1)
}

/// Right-hand side of the reduced QR flow,
/// `(I - Q Q^T) A Q + Q S1`, evaluated as `A Q - Q B1`.
pub fn reduced_qr_rhs(frame: &SubspaceFrame, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let q = frame.matrix();
    let m = projected_coefficient(q, a)?;
    let (_, b) = split_skew_triangular(&m);
    Ok(a * q - q * b)
}

/// Per-direction samples of the triangularized diagonal
/// `b_ii(t) = q_i^T(t) A(t) q_i(t)` on a uniform grid, together with their
/// running trapezoidal integrals `F_i(t)`.
#[derive(Debug, Clone)]
pub struct DiagonalRecord {
    pub times: Vec<f64>,
    /// `b[i][j]`: direction i sampled at `times[j]`.
    pub b: Vec<Vec<f64>>,
    /// `cumulative[i][j] = integral of b_i from times[0] to times[j]`
    /// (trapezoidal); `cumulative[i][0] = 0`.
    pub cumulative: Vec<Vec<f64>>,
}

impl DiagonalRecord {
    fn with_capacity(k: usize, samples: usize) -> Self {
        Self {
            times: Vec::with_capacity(samples),
            b: vec![Vec::with_capacity(samples); k],
            cumulative: vec![Vec::with_capacity(samples); k],
        }
    }

    fn push(&mut self, t: f64, diag: &[f64]) {
        let first = self.times.is_empty();
        let dt = if first {
            0.0
        } else {
            t - *self.times.last().expect("non-empty")
        };
        for (i, &v) in diag.iter().enumerate() {
            if first {
                self.cumulative[i].push(0.0);
            } else {
                let prev_b = *self.b[i].last().expect("non-empty");
                let prev_f = *self.cumulative[i].last().expect("non-empty");
                self.cumulative[i].push(prev_f + 0.5 * dt * (prev_b + v));
            }
            self.b[i].push(v);
        }
        self.times.push(t);
    }

    pub fn k(&self) -> usize {
        self.b.len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Grid step (from the first interval).
    pub fn step(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    fn index_at_time(&self, t: f64) -> usize {
        let h = self.step();
        if h <= 0.0 {
            return 0;
        }
        let idx = libm::round((t - self.times[0]) / h) as usize;
        idx.min(self.times.len() - 1)
    }
}

/// Evolves the reduced QR flow along the model trajectory started at `x0`
/// (co-integrated with the frame) and records the triangularized diagonal.
///
/// At each RK4 stage the coefficient matrix is the model Jacobian at the
/// stage estimate of the base state; the frame is re-orthonormalized by
/// modified Gram-Schmidt after every step.
pub fn evolve_spectral(
    model: &dyn DynamicalModel,
    x0: &DVector<f64>,
    frame0: &SubspaceFrame,
    spec: &StepSpec,
) -> Result<(DiagonalRecord, SubspaceFrame)> {
    if frame0.n() != model.dim() {
        return Err(Error::DimensionMismatch {
            context: "frame rows vs model dimension",
        });
    }
    let k = frame0.k();
    let u = DVector::zeros(model.input_dim());
    let mut x = x0.clone();
    let mut q = frame0.matrix().clone();
    let mut rec = DiagonalRecord::with_capacity(k, spec.num_steps() + 1);

    // Stage derivative of the coupled (x, Q) flow; returns the projected
    // coefficient diagonal so the caller can sample it at grid points.
    let stage = |t: f64,
                 x: &DVector<f64>,
                 q: &DMatrix<f64>|
     -> Result<(DVector<f64>, DMatrix<f64>, Vec<f64>)> {
        let a = model.jacobian(t, x, &u);
        let dx = model.rhs(t, x, &u);
        if !dx.iter().all(|v| v.is_finite()) || !a.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteDerivative { t });
        }
        let m = q.transpose() * &a * q;
        let (_, b) = split_skew_triangular(&m);
        let dq = &a * q - q * &b;
        let diag = (0..k).map(|i| m[(i, i)]).collect();
        Ok((dx, dq, diag))
    };

    for step_idx in 0..=spec.num_steps() {
        let t = spec.time_at(step_idx);
        let (dx1, dq1, diag) = stage(t, &x, &q)?;
        rec.push(t, &diag);
        if step_idx == spec.num_steps() {
            break;
        }
        let h = spec.time_at(step_idx + 1) - t;
        let half = 0.5 * h;
        let (dx2, dq2, _) = stage(t + half, &(&x + half * &dx1), &(&q + half * &dq1))?;
        let (dx3, dq3, _) = stage(t + half, &(&x + half * &dx2), &(&q + half * &dq2))?;
        let (dx4, dq4, _) = stage(t + h, &(&x + h * &dx3), &(&q + h * &dq3))?;
        x += (h / 6.0) * (dx1 + 2.0 * dx2 + 2.0 * dx3 + dx4);
        let q_adv = &q + (h / 6.0) * (dq1 + 2.0 * dq2 + 2.0 * dq3 + dq4);
        q = match modified_gram_schmidt(&q_adv) {
            Ok((qn, _)) => qn,
            Err(Error::SingularMatrix { column }) => {
                return Err(Error::FrameCollapse { t, column })
            }
            Err(e) => return Err(e),
        };
    }
    Ok((rec, SubspaceFrame { q }))
}

/// Full-horizon time averages `(F_i(T) - F_i(burn_in)) / (T - burn_in)`.
pub fn lyapunov_exponents(rec: &DiagonalRecord, burn_in: f64) -> Result<Vec<f64>> {
    if rec.len() < 2 {
        return Err(Error::EmptyWindow);
    }
    let start = rec.index_at_time(rec.times[0] + burn_in);
    let end = rec.len() - 1;
    let span = rec.times[end] - rec.times[start];
    if span <= 0.0 {
        return Err(Error::EmptyWindow);
    }
    Ok((0..rec.k())
        .map(|i| (rec.cumulative[i][end] - rec.cumulative[i][start]) / span)
        .collect())
}

/// Extremes of sliding-window averages of length `H` over all grid-aligned
/// start times in `[burn_in, T - H]`: per direction `(min, max)`.
pub fn bohl_exponents(rec: &DiagonalRecord, window: f64, burn_in: f64) -> Result<Vec<(f64, f64)>> {
    if rec.len() < 2 {
        return Err(Error::EmptyWindow);
    }
    let h = rec.step();
    let ratio = window / h;
    let wsteps = libm::round(ratio) as usize;
    if wsteps == 0 || (ratio - libm::round(ratio)).abs() > 1e-6 * ratio.max(1.0) {
        return Err(Error::WindowOffGrid { window, h });
    }
    let start = rec.index_at_time(rec.times[0] + burn_in);
    let last_start = rec.len().checked_sub(wsteps + 1);
    let usable = rec.times[rec.len() - 1] - rec.times[start];
    match last_start {
        Some(ls) if ls >= start => {}
        _ => return Err(Error::WindowTooLong { window, usable }),
    }
    if usable + 1e-9 * window < window {
        return Err(Error::WindowTooLong { window, usable });
    }
    let last_start = last_start.expect("checked above");
    let mut out = Vec::with_capacity(rec.k());
    for i in 0..rec.k() {
        let f = &rec.cumulative[i];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for t0 in start..=last_start {
            let span = rec.times[t0 + wsteps] - rec.times[t0];
            let w = (f[t0 + wsteps] - f[t0]) / span;
            if w < lo {
                lo = w;
            }
            if w > hi {
                hi = w;
            }
        }
        out.push((lo, hi));
    }
    Ok(out)
}

/// Smallest `j` such that every upper Bohl exponent after position `j`
/// (1-based) is below `-threshold`; `k` when even the last one is not.
pub fn count_unstable(upper_bohl: &[f64], threshold: f64) -> usize {
    upper_bohl
        .iter()
        .rposition(|&u| u >= -threshold)
        .map(|i| i + 1)
        .unwrap_or(0)
}

/// Per-direction Lyapunov exponents and Bohl interval endpoints for a set of
/// window lengths, plus the unstable-direction count `j*` taken from the
/// longest window.
#[derive(Debug, Clone)]
pub struct SpectralEstimate {
    pub lyapunov: Vec<f64>,
    /// `(H, per-direction (lower, upper))`, in the caller's window order.
    pub bohl: Vec<(f64, Vec<(f64, f64)>)>,
    pub j_star: usize,
    pub threshold: f64,
    pub burn_in: f64,
}

impl SpectralEstimate {
    pub fn from_record(
        rec: &DiagonalRecord,
        windows: &[f64],
        burn_in: f64,
        threshold: f64,
    ) -> Result<Self> {
        let lyapunov = lyapunov_exponents(rec, burn_in)?;
        let mut bohl = Vec::with_capacity(windows.len());
        for &window in windows {
            bohl.push((window, bohl_exponents(rec, window, burn_in)?));
        }
        let j_star = bohl
            .iter()
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, pairs)| {
                let upper: Vec<f64> = pairs.iter().map(|&(_, hi)| hi).collect();
                count_unstable(&upper, threshold)
            })
            .unwrap_or(0);
        Ok(Self {
            lyapunov,
            bohl,
            j_star,
            threshold,
            burn_in,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::LtvModel;
    use approx::assert_abs_diff_eq;

    fn frame_of(m: DMatrix<f64>) -> SubspaceFrame {
        SubspaceFrame::new(m).unwrap()
    }

    #[test]
    fn skew_lower_vanishes_for_identity_coefficient() {
        let q = frame_of(DMatrix::identity(4, 2));
        let s = skew_lower(&q, &DMatrix::identity(4, 4)).unwrap();
        assert_eq!(s, DMatrix::zeros(2, 2));
    }

    #[test]
    fn skew_lower_reproduces_skew_coefficient() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, -1.0, -2.0, 0.0, 0.5, 1.0, -0.5, 0.0]);
        let q = frame_of(DMatrix::identity(3, 3));
        let s = skew_lower(&q, &a).unwrap();
        assert_eq!(s, a);
    }

    #[test]
    fn skew_lower_two_by_two() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        let q = frame_of(DMatrix::identity(2, 2));
        let s = skew_lower(&q, &a).unwrap();
        assert_eq!(s, DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]));
    }

    #[test]
    fn b1_diagonal_coefficient() {
        let a = DMatrix::from_diagonal(&DVector::from_row_slice(&[3.0, -1.0, 0.5, 2.0]));
        let q = frame_of(DMatrix::identity(4, 2));
        let b = b1(&q, &a).unwrap();
        assert_eq!(b, DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -1.0]));
    }

    #[test]
    fn b1_symmetric_full_frame_moves_lower_up() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, -1.0, 0.5, 3.0, 0.5, 4.0]);
        let q = frame_of(DMatrix::identity(3, 3));
        let b = b1(&q, &a).unwrap();
        for i in 0..3 {
            assert_eq!(b[(i, i)], a[(i, i)]);
            for j in 0..i {
                assert_eq!(b[(i, j)], 0.0);
                assert_eq!(b[(j, i)], 2.0 * a[(i, j)]);
            }
        }
    }

    #[test]
    fn reduced_rhs_full_frame_matches_full_flow() {
        // For k = n the projector vanishes and the rhs collapses to Q S.
        let a = DMatrix::from_row_slice(3, 3, &[0.1, 1.0, 0.0, -0.3, 0.2, 0.7, 0.5, 0.0, -0.4]);
        let mut rng = SplitMix64::new(5);
        let q = SubspaceFrame::random(3, 3, &mut rng);
        let rhs = reduced_qr_rhs(&q, &a).unwrap();
        let s = skew_lower(&q, &a).unwrap();
        let expect = q.matrix() * s;
        assert!((&rhs - &expect).norm() < 1e-13);
    }

    #[test]
    fn reduced_rhs_vanishes_for_scaled_identity() {
        let a = 3.5 * DMatrix::<f64>::identity(5, 5);
        let mut rng = SplitMix64::new(9);
        let q = SubspaceFrame::random(5, 2, &mut rng);
        let rhs = reduced_qr_rhs(&q, &a).unwrap();
        assert!(rhs.norm() < 1e-13, "norm {}", rhs.norm());
    }

    #[test]
    fn reduced_rhs_lies_in_tangent_space() {
        // Q^T dQ must be skew-symmetric for an orthonormal-frame flow.
        let mut rng = SplitMix64::new(123);
        let a = rng.gaussian_matrix(5, 5);
        let q = SubspaceFrame::random(5, 2, &mut rng);
        let rhs = reduced_qr_rhs(&q, &a).unwrap();
        let tangent = q.matrix().transpose() * &rhs;
        assert!((&tangent + tangent.transpose()).norm() < 1e-12);
    }

    #[test]
    fn frame_rejects_non_orthonormal() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            SubspaceFrame::new(m),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn evolve_constant_diagonal_coefficient() {
        let model = LtvModel::diag_lti(&[2.0, -1.0]);
        let spec = StepSpec::new(0.01, 0.0, 2.0).unwrap();
        let (rec, frame) = evolve_spectral(
            &model,
            &DVector::from_element(2, 1.0),
            &SubspaceFrame::identity(2, 2),
            &spec,
        )
        .unwrap();
        for j in 0..rec.len() {
            assert_abs_diff_eq!(rec.b[0][j], 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(rec.b[1][j], -1.0, epsilon = 1e-12);
        }
        assert!(frame.orthogonality_defect() <= FRAME_TOL);
    }

    #[test]
    fn evolve_scalar_counterexample_diagonal_is_exact() {
        let model = LtvModel::scalar_counterexample();
        let spec = StepSpec::new(0.01, 0.0, 5.0).unwrap();
        let (rec, _) = evolve_spectral(
            &model,
            &DVector::from_element(1, 1.0),
            &SubspaceFrame::identity(1, 1),
            &spec,
        )
        .unwrap();
        for (j, &t) in rec.times.iter().enumerate() {
            assert_abs_diff_eq!(rec.b[0][j], 1.0 / (1.0 + t), epsilon = 1e-12);
        }
    }

    #[test]
    fn cumulative_is_trapezoidal() {
        let model = LtvModel::scalar_counterexample();
        let spec = StepSpec::new(0.1, 0.0, 1.0).unwrap();
        let (rec, _) = evolve_spectral(
            &model,
            &DVector::from_element(1, 1.0),
            &SubspaceFrame::identity(1, 1),
            &spec,
        )
        .unwrap();
        assert_eq!(rec.cumulative[0][0], 0.0);
        let mut acc = 0.0;
        for j in 1..rec.len() {
            acc += 0.5 * (rec.times[j] - rec.times[j - 1]) * (rec.b[0][j - 1] + rec.b[0][j]);
            assert_abs_diff_eq!(rec.cumulative[0][j], acc, epsilon = 1e-15);
        }
    }

    #[test]
    fn lyapunov_constant_diagonal() {
        let model = LtvModel::diag_lti(&[2.0, -1.0]);
        let spec = StepSpec::new(0.01, 0.0, 10.0).unwrap();
        let (rec, _) = evolve_spectral(
            &model,
            &DVector::from_element(2, 1.0),
            &SubspaceFrame::identity(2, 2),
            &spec,
        )
        .unwrap();
        let lam = lyapunov_exponents(&rec, 1.0).unwrap();
        assert_abs_diff_eq!(lam[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lam[1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn lyapunov_counterexample_decays_to_zero() {
        let model = LtvModel::scalar_counterexample();
        let spec = StepSpec::new(0.01, 0.0, 1500.0).unwrap();
        let (rec, _) = evolve_spectral(
            &model,
            &DVector::from_element(1, 1.0),
            &SubspaceFrame::identity(1, 1),
            &spec,
        )
        .unwrap();
        let lam = lyapunov_exponents(&rec, 0.0).unwrap();
        // (1/T) ln(1+T) at T = 1500.
        assert!(lam[0].abs() <= 0.005, "lambda {}", lam[0]);
        assert_abs_diff_eq!(lam[0], (1501.0f64).ln() / 1500.0, epsilon = 1e-6);
    }

    #[test]
    fn bohl_constant_collapses_to_point() {
        let model = LtvModel::diag_lti(&[0.7]);
        let spec = StepSpec::new(0.01, 0.0, 20.0).unwrap();
        let (rec, _) = evolve_spectral(
            &model,
            &DVector::from_element(1, 1.0),
            &SubspaceFrame::identity(1, 1),
            &spec,
        )
        .unwrap();
        for window in [1.0, 5.0, 10.0] {
            let pairs = bohl_exponents(&rec, window, 0.0).unwrap();
            assert_abs_diff_eq!(pairs[0].0, 0.7, epsilon = 1e-12);
            assert_abs_diff_eq!(pairs[0].1, 0.7, epsilon = 1e-12);
        }
    }

    #[test]
    fn bohl_counterexample_upper_matches_closed_form() {
        // sup over t0 of the H-window average of 1/(1+t) is ln(1+H)/H at t0 = 0.
        let model = LtvModel::scalar_counterexample();
        let spec = StepSpec::new(1e-3, 0.0, 100.0).unwrap();
        let (rec, _) = evolve_spectral(
            &model,
            &DVector::from_element(1, 1.0),
            &SubspaceFrame::identity(1, 1),
            &spec,
        )
        .unwrap();
        let pairs = bohl_exponents(&rec, 10.0, 0.0).unwrap();
        assert_abs_diff_eq!(pairs[0].1, (11.0f64).ln() / 10.0, epsilon = 1e-7);
        assert!(pairs[0].1 > 0.0);
    }

    #[test]
    fn bohl_window_errors() {
        let model = LtvModel::diag_lti(&[0.0]);
        let spec = StepSpec::new(0.1, 0.0, 5.0).unwrap();
        let (rec, _) = evolve_spectral(
            &model,
            &DVector::from_element(1, 1.0),
            &SubspaceFrame::identity(1, 1),
            &spec,
        )
        .unwrap();
        assert!(matches!(
            bohl_exponents(&rec, 10.0, 0.0),
            Err(Error::WindowTooLong { .. })
        ));
        assert!(matches!(
            bohl_exponents(&rec, 0.05, 0.0),
            Err(Error::WindowOffGrid { .. })
        ));
        assert!(matches!(
            bohl_exponents(&rec, 3.0, 4.0),
            Err(Error::WindowTooLong { .. })
        ));
    }

    #[test]
    fn count_unstable_sign_scan() {
        assert_eq!(count_unstable(&[1.5, 0.3, -0.2, -0.5], 0.0), 2);
        assert_eq!(count_unstable(&[-0.1, -0.2], 0.0), 0);
        assert_eq!(count_unstable(&[1.0, -0.5, 0.2], 0.0), 3);
        assert_eq!(count_unstable(&[], 0.0), 0);
        // Threshold widens the non-negative classification.
        assert_eq!(count_unstable(&[0.5, -0.01, -0.5], 0.02), 2);
    }

    #[test]
    fn containment_holds_when_horizon_is_window_multiple() {
        // With (T - burn_in) an integer multiple of H, the full-horizon
        // average is a mean of disjoint window averages, so it must lie
        // between the window extremes.
        let model = LtvModel::sinusoidal(3, 77);
        let spec = StepSpec::new(0.01, 0.0, 110.0).unwrap();
        let mut rng = SplitMix64::new(4);
        let frame = SubspaceFrame::random(3, 3, &mut rng);
        let (rec, _) = evolve_spectral(&model, &DVector::from_element(3, 1.0), &frame, &spec)
            .unwrap();
        let burn = 10.0;
        let lam = lyapunov_exponents(&rec, burn).unwrap();
        for window in [10.0, 25.0, 50.0] {
            let pairs = bohl_exponents(&rec, window, burn).unwrap();
            for i in 0..3 {
                assert!(
                    pairs[i].0 <= lam[i] + 1e-10 && lam[i] <= pairs[i].1 + 1e-10,
                    "direction {i}, H {window}: {} <= {} <= {} violated",
                    pairs[i].0,
                    lam[i],
                    pairs[i].1
                );
            }
        }
    }

    #[test]
    fn window_doubling_cannot_widen() {
        let model = LtvModel::sinusoidal(3, 31);
        let spec = StepSpec::new(0.01, 0.0, 120.0).unwrap();
        let mut rng = SplitMix64::new(8);
        let frame = SubspaceFrame::random(3, 3, &mut rng);
        let (rec, _) = evolve_spectral(&model, &DVector::from_element(3, 1.0), &frame, &spec)
            .unwrap();
        let narrow = bohl_exponents(&rec, 10.0, 0.0).unwrap();
        let wide = bohl_exponents(&rec, 20.0, 0.0).unwrap();
        for i in 0..3 {
            assert!(wide[i].0 >= narrow[i].0 - 1e-12);
            assert!(wide[i].1 <= narrow[i].1 + 1e-12);
        }
    }

    #[test]
    fn estimate_bundles_windows_and_j_star() {
        let model = LtvModel::diag_lti(&[2.0, -1.0]);
        let spec = StepSpec::new(0.01, 0.0, 30.0).unwrap();
        let (rec, _) = evolve_spectral(
            &model,
            &DVector::from_element(2, 1.0),
            &SubspaceFrame::identity(2, 2),
            &spec,
        )
        .unwrap();
        let est = SpectralEstimate::from_record(&rec, &[5.0, 10.0], 0.0, 0.0).unwrap();
        assert_eq!(est.j_star, 1);
        assert_eq!(est.bohl.len(), 2);
        assert_abs_diff_eq!(est.lyapunov[0], 2.0, epsilon = 1e-12);
    }
}
