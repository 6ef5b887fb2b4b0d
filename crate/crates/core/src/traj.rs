//! Jerk-minimizing polynomial splines through planned viewpoints.
//!
//! Each axis solves the same equality-constrained quadratic program:
//! minimize the integrated squared jerk plus a soft waypoint penalty,
//! subject to the prescribed initial position/velocity/acceleration and
//! C0/C1/C2 continuity at the interior knots. Segments are parameterized
//! in local time, which keeps the basis well-conditioned for K = 5 and up.
//! The solution comes from a direct solve of the first-order optimality
//! (saddle-point) system; only equality constraints exist, so no general
//! QP machinery is needed.

use nalgebra::{DMatrix, DVector};

use crate::geom::Vec3;
use crate::{Error, Result};

/// Equality-constrained QP over the stacked per-segment coefficients of one
/// axis. The quadratic structure is shared by all three axes; only the
/// linear cost and the constraint right-hand side differ.
#[derive(Debug, Clone)]
pub struct QpProblem {
    /// Knot times `t_0..t_N`, strictly increasing.
    pub times: Vec<f64>,
    /// Polynomial order K; each segment has K+1 coefficients.
    pub poly_order: usize,
    pub rho: f64,
    pub waypoints: Vec<Vec3>,
    pub initial_state: [Vec3; 3],
    /// `Q`: symmetric PSD quadratic cost, shared across axes.
    pub cost_matrix: DMatrix<f64>,
    /// Per-axis linear cost `c` in `1/2 p^T Q p + c^T p`.
    pub linear_costs: [DVector<f64>; 3],
    /// Equality constraints `A p = b`, `A` shared across axes.
    pub constraint_matrix: DMatrix<f64>,
    pub constraint_rhs: [DVector<f64>; 3],
}

/// Row of the monomial basis (or its `order`-th derivative) at local time.
fn basis_row(k: usize, local_t: f64, order: usize) -> DVector<f64> {
    let mut row = DVector::zeros(k + 1);
    for p in order..=k {
        let mut coeff = 1.0;
        for f in (p - order + 1)..=p {
            coeff *= f as f64;
        }
        row[p] = coeff * local_t.powi((p - order) as i32);
    }
    row
}

/// Gram matrix of the squared third derivative over one segment,
/// `G[j][k] = j(j-1)(j-2) k(k-1)(k-2) T^(j+k-5) / (j+k-5)` for `j,k >= 3`.
fn jerk_gram(k: usize, duration: f64) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(k + 1, k + 1);
    for j in 3..=k {
        let cj = (j * (j - 1) * (j - 2)) as f64;
        for l in 3..=k {
            let cl = (l * (l - 1) * (l - 2)) as f64;
            let pow = (j + l - 5) as i32;
            g[(j, l)] = cj * cl * duration.powi(pow) / pow as f64;
        }
    }
    g
}

/// Assembles the spline QP for the given waypoints and knot times.
///
/// `times` has one more entry than `waypoints`; waypoint i is soft-tracked
/// at `times[i+1]`. Hard constraints pin the initial state at `times[0]`
/// and C2 continuity at every interior knot.
pub fn build_qp(
    waypoints: &[Vec3],
    times: &[f64],
    initial_state: [Vec3; 3],
    poly_order: usize,
    rho: f64,
) -> Result<QpProblem> {
    if poly_order < 5 {
        return Err(Error::BadTrajectory(format!(
            "polynomial order {poly_order} < 5 cannot satisfy the initial state plus continuity"
        )));
    }
    if rho <= 0.0 {
        return Err(Error::BadTrajectory("waypoint weight rho must be positive".into()));
    }
    if waypoints.is_empty() || times.len() != waypoints.len() + 1 {
        return Err(Error::BadTrajectory(format!(
            "{} waypoints need {} knot times, got {}",
            waypoints.len(),
            waypoints.len() + 1,
            times.len()
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadTrajectory("knot times must be strictly increasing".into()));
    }

    let k = poly_order;
    let segments = waypoints.len();
    let dim = segments * (k + 1);

    let mut quad = DMatrix::zeros(dim, dim); // H = H_jerk + rho * sum b b^T
    let mut lin = [DVector::zeros(dim), DVector::zeros(dim), DVector::zeros(dim)];
    for (i, w) in waypoints.iter().enumerate() {
        let duration = times[i + 1] - times[i];
        let offset = i * (k + 1);
        let mut block = quad.view_mut((offset, offset), (k + 1, k + 1));
        block += jerk_gram(k, duration);

        let mut b = DVector::zeros(dim);
        b.rows_mut(offset, k + 1).copy_from(&basis_row(k, duration, 0));
        quad += rho * &b * b.transpose();
        for axis in 0..3 {
            lin[axis] -= 2.0 * rho * w[axis] * &b;
        }
    }
    let cost_matrix = 2.0 * quad;

    let n_rows = 3 * segments; // 3 initial + 3 per interior knot
    let mut a = DMatrix::zeros(n_rows, dim);
    let mut rhs = [
        DVector::zeros(n_rows),
        DVector::zeros(n_rows),
        DVector::zeros(n_rows),
    ];
    for order in 0..3 {
        a.view_mut((order, 0), (1, k + 1))
            .copy_from(&basis_row(k, 0.0, order).transpose());
        for axis in 0..3 {
            rhs[axis][order] = initial_state[order][axis];
        }
    }
    for i in 1..segments {
        let duration = times[i] - times[i - 1];
        let left = (i - 1) * (k + 1);
        let right = i * (k + 1);
        for order in 0..3 {
            let row = 3 * i + order;
            a.view_mut((row, left), (1, k + 1))
                .copy_from(&basis_row(k, duration, order).transpose());
            a.view_mut((row, right), (1, k + 1))
                .copy_from(&(-basis_row(k, 0.0, order)).transpose());
        }
    }

    Ok(QpProblem {
        times: times.to_vec(),
        poly_order,
        rho,
        waypoints: waypoints.to_vec(),
        initial_state,
        cost_matrix,
        linear_costs: lin,
        constraint_matrix: a,
        constraint_rhs: rhs,
    })
}

/// Piecewise-polynomial position trajectory on `[t_0, t_N]`.
///
/// `coefficients[i][k]` is the vector coefficient of `(t - t_i)^k` on
/// segment i. Yaw is not stored here: the heading rule is myopic, so
/// consumers derive it from the sampled position and the live target
/// center via [`yaw_profile`] / [`YawTracker`].
#[derive(Debug, Clone)]
pub struct SplineTrajectory {
    pub times: Vec<f64>,
    pub coefficients: Vec<Vec<Vec3>>,
}

impl SplineTrajectory {
    pub fn from_coefficients(times: Vec<f64>, coefficients: Vec<Vec<Vec3>>) -> Result<Self> {
        if times.len() != coefficients.len() + 1 || coefficients.is_empty() {
            return Err(Error::BadTrajectory("segment/knot count mismatch".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::BadTrajectory("knot times must be strictly increasing".into()));
        }
        Ok(Self {
            times,
            coefficients,
        })
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Segment index active at time `t`; the end boundary maps to the last
    /// segment.
    fn segment_at(&self, t: f64) -> Result<usize> {
        let (t0, t1) = (self.start_time(), self.end_time());
        if t < t0 - 1e-9 || t > t1 + 1e-9 {
            return Err(Error::OutOfDomain { t, t0, t1 });
        }
        let idx = match self
            .times
            .binary_search_by(|knot| knot.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        Ok(idx.min(self.coefficients.len() - 1))
    }

    /// Evaluates the given derivative of one segment at local time.
    pub fn eval_segment(&self, segment: usize, local_t: f64, order: usize) -> Vec3 {
        let coeffs = &self.coefficients[segment];
        let mut value = Vec3::zeros();
        for (p, c) in coeffs.iter().enumerate().skip(order) {
            let mut factor = 1.0;
            for f in (p - order + 1)..=p {
                factor *= f as f64;
            }
            value += c * factor * local_t.powi((p - order) as i32);
        }
        value
    }

    /// Position (order 0) or derivative (1..3) at absolute time `t`.
    pub fn eval(&self, t: f64, order: usize) -> Result<Vec3> {
        let seg = self.segment_at(t)?;
        Ok(self.eval_segment(seg, t - self.times[seg], order))
    }
}

/// See [`SplineTrajectory::eval`].
pub fn eval_spline(traj: &SplineTrajectory, t: f64, order: usize) -> Result<Vec3> {
    traj.eval(t, order)
}

/// Solves the spline QP through its first-order optimality system
/// `[Q A^T; A 0] [p; nu] = [-c; b]`, one solve per axis.
///
/// Rank deficiency is reported, not regularized away: the solve fails if
/// the factorization breaks down or the relative residual exceeds 1e-8.
pub fn solve_spline(problem: &QpProblem) -> Result<SplineTrajectory> {
    let dim = problem.cost_matrix.nrows();
    let m = problem.constraint_matrix.nrows();
    let total = dim + m;

    let mut kkt = DMatrix::zeros(total, total);
    kkt.view_mut((0, 0), (dim, dim)).copy_from(&problem.cost_matrix);
    kkt.view_mut((0, dim), (dim, m))
        .copy_from(&problem.constraint_matrix.transpose());
    kkt.view_mut((dim, 0), (m, dim))
        .copy_from(&problem.constraint_matrix);
    let lu = kkt.clone().full_piv_lu();

    let k = problem.poly_order;
    let segments = problem.waypoints.len();
    let mut coefficients = vec![vec![Vec3::zeros(); k + 1]; segments];
    #[allow(clippy::needless_range_loop)]
    for axis in 0..3 {
        let mut rhs = DVector::zeros(total);
        rhs.rows_mut(0, dim)
            .copy_from(&(-&problem.linear_costs[axis]));
        rhs.rows_mut(dim, m).copy_from(&problem.constraint_rhs[axis]);
        let solution = lu
            .solve(&rhs)
            .ok_or(Error::SingularSystem(f64::INFINITY))?;
        let residual = (&kkt * &solution - &rhs).norm() / (1.0 + rhs.norm());
        if !residual.is_finite() || residual > 1e-8 {
            return Err(Error::SingularSystem(residual));
        }
        for seg in 0..segments {
            for p in 0..=k {
                coefficients[seg][p][axis] = solution[seg * (k + 1) + p];
            }
        }
    }
    SplineTrajectory::from_coefficients(problem.times.clone(), coefficients)
}

/// The QP objective of a solved trajectory: closed-form jerk energy plus
/// the weighted waypoint misses. Used for logging and regression checks.
pub fn spline_objective(problem: &QpProblem, traj: &SplineTrajectory) -> f64 {
    let k = problem.poly_order;
    let mut energy = 0.0;
    for (i, coeffs) in traj.coefficients.iter().enumerate() {
        let gram = jerk_gram(k, problem.times[i + 1] - problem.times[i]);
        for axis in 0..3 {
            let p = DVector::from_iterator(k + 1, coeffs.iter().map(|c| c[axis]));
            energy += (p.transpose() * &gram * &p)[(0, 0)];
        }
    }
    let mut penalty = 0.0;
    for (i, w) in problem.waypoints.iter().enumerate() {
        let x = traj
            .eval(problem.times[i + 1], 0)
            .expect("knot inside domain");
        penalty += (x - w).norm_squared();
    }
    energy + problem.rho * penalty
}

/// Myopic heading: point the optical axis at the target's horizontal
/// bearing. `None` when the target is (nearly) directly overhead.
pub fn yaw_profile(position: Vec3, target_center: Vec3) -> Option<f64> {
    let dx = target_center.x - position.x;
    let dy = target_center.y - position.y;
    if (dx * dx + dy * dy).sqrt() <= 1e-6 {
        return None;
    }
    Some(dy.atan2(dx))
}

/// Unwraps a sampled yaw sequence into a continuous profile and holds the
/// previous value through degenerate (overhead) samples.
#[derive(Debug, Clone, Default)]
pub struct YawTracker {
    current: Option<f64>,
}

impl YawTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, position: Vec3, target_center: Vec3) -> f64 {
        match (yaw_profile(position, target_center), self.current) {
            (Some(raw), Some(prev)) => {
                let mut delta = (raw - prev) % std::f64::consts::TAU;
                if delta > std::f64::consts::PI {
                    delta -= std::f64::consts::TAU;
                } else if delta < -std::f64::consts::PI {
                    delta += std::f64::consts::TAU;
                }
                let unwrapped = prev + delta;
                self.current = Some(unwrapped);
                unwrapped
            }
            (Some(raw), None) => {
                self.current = Some(raw);
                raw
            }
            (None, prev) => prev.unwrap_or(0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn straight_line_instance() -> QpProblem {
        let waypoints = vec![
            Vec3::new(1.0, 0.5, 0.0),
            Vec3::new(2.0, 1.0, 0.5),
            Vec3::new(3.0, 1.5, 1.0),
        ];
        let times = vec![0.0, 1.0, 2.0, 3.0];
        build_qp(
            &waypoints,
            &times,
            [Vec3::zeros(), Vec3::zeros(), Vec3::zeros()],
            5,
            100.0,
        )
        .unwrap()
    }

    #[test]
    fn constraint_row_counts() {
        let single = build_qp(
            &[Vec3::new(1.0, 0.0, 0.0)],
            &[0.0, 1.0],
            [Vec3::zeros(); 3],
            5,
            10.0,
        )
        .unwrap();
        assert_eq!(single.constraint_matrix.nrows(), 3);
        assert_eq!(single.constraint_matrix.ncols(), 6);

        let double = build_qp(
            &[Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)],
            &[0.0, 1.0, 2.0],
            [Vec3::zeros(); 3],
            5,
            10.0,
        )
        .unwrap();
        assert_eq!(double.constraint_matrix.nrows(), 6);
        assert_eq!(double.constraint_matrix.ncols(), 12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let w = [Vec3::zeros()];
        assert!(matches!(
            build_qp(&w, &[0.0, 1.0], [Vec3::zeros(); 3], 4, 10.0),
            Err(Error::BadTrajectory(_))
        ));
        assert!(matches!(
            build_qp(&w, &[1.0, 1.0], [Vec3::zeros(); 3], 5, 10.0),
            Err(Error::BadTrajectory(_))
        ));
        assert!(matches!(
            build_qp(&w, &[2.0, 1.0], [Vec3::zeros(); 3], 5, 10.0),
            Err(Error::BadTrajectory(_))
        ));
        // knot count must be one more than the waypoint count
        assert!(matches!(
            build_qp(&w, &[0.0, 1.0, 2.0], [Vec3::zeros(); 3], 5, 10.0),
            Err(Error::BadTrajectory(_))
        ));
        assert!(matches!(
            build_qp(&[], &[0.0], [Vec3::zeros(); 3], 5, 10.0),
            Err(Error::BadTrajectory(_))
        ));
    }

    #[test]
    fn singular_system_is_reported() {
        let mut qp = build_qp(
            &[Vec3::new(1.0, 0.0, 0.0)],
            &[0.0, 1.0],
            [Vec3::zeros(); 3],
            5,
            10.0,
        )
        .unwrap();
        // contradictory duplicate of the position constraint makes the
        // optimality system inconsistent
        let row = qp.constraint_matrix.row(0).into_owned();
        let m = qp.constraint_matrix.nrows();
        qp.constraint_matrix = qp.constraint_matrix.clone().insert_row(m, 0.0);
        qp.constraint_matrix.row_mut(m).copy_from(&row);
        for axis in 0..3 {
            let old = qp.constraint_rhs[axis].clone();
            qp.constraint_rhs[axis] = old.insert_row(m, 1.0 + axis as f64);
        }
        assert!(matches!(solve_spline(&qp), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn quadratic_polynomials_have_zero_jerk_cost() {
        // x(t) = 1 + 2t + 3t^2 has zero third derivative
        let g = jerk_gram(5, 1.7);
        let p = DVector::from_vec(vec![1.0, 2.0, 3.0, 0.0, 0.0, 0.0]);
        assert_eq!((p.transpose() * &g * &p)[(0, 0)], 0.0);
        // cost matrix is symmetric
        let qp = straight_line_instance();
        let asym = (&qp.cost_matrix - qp.cost_matrix.transpose()).norm();
        assert!(asym < 1e-12);
    }

    #[test]
    fn stationary_problem_yields_constant_spline() {
        let p0 = Vec3::new(2.0, -1.0, 3.0);
        let qp = build_qp(
            &[p0, p0],
            &[0.0, 1.0, 2.0],
            [p0, Vec3::zeros(), Vec3::zeros()],
            5,
            100.0,
        )
        .unwrap();
        let traj = solve_spline(&qp).unwrap();
        for t in [0.0, 0.37, 1.0, 1.9, 2.0] {
            assert_relative_eq!(traj.eval(t, 0).unwrap(), p0, epsilon = 1e-7);
            assert!(traj.eval(t, 1).unwrap().norm() < 1e-7);
        }
        assert!(spline_objective(&qp, &traj) < 1e-10);
    }

    #[test]
    fn initial_state_and_continuity() {
        let init = [
            Vec3::new(0.1, -0.2, 0.3),
            Vec3::new(0.5, 0.0, -0.1),
            Vec3::new(0.0, 0.2, 0.0),
        ];
        let qp = build_qp(
            &[Vec3::new(1.0, 1.0, 1.0), Vec3::new(2.0, 0.0, 1.5), Vec3::new(2.5, -1.0, 1.0)],
            &[0.0, 1.0, 2.5, 3.5],
            init,
            5,
            100.0,
        )
        .unwrap();
        let traj = solve_spline(&qp).unwrap();
        for (order, expected) in init.iter().enumerate() {
            assert_relative_eq!(traj.eval(0.0, order).unwrap(), *expected, epsilon = 1e-6);
        }
        // evaluate both sides of each interior knot
        for i in 1..traj.coefficients.len() {
            let left_duration = traj.times[i] - traj.times[i - 1];
            for order in 0..3 {
                let left = traj.eval_segment(i - 1, left_duration, order);
                let right = traj.eval_segment(i, 0.0, order);
                assert_relative_eq!(left, right, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn tight_rho_hits_waypoints() {
        let waypoints = vec![Vec3::new(1.0, 2.0, 0.5), Vec3::new(0.0, 3.0, 1.0)];
        let qp = build_qp(&waypoints, &[0.0, 1.0, 2.0], [Vec3::zeros(); 3], 5, 1e6).unwrap();
        let traj = solve_spline(&qp).unwrap();
        for (i, w) in waypoints.iter().enumerate() {
            let miss = (traj.eval(qp.times[i + 1], 0).unwrap() - w).norm();
            assert!(miss < 1e-2, "waypoint {i} missed by {miss}");
        }
    }

    #[test]
    fn waypoint_error_monotone_in_rho() {
        let waypoints = vec![
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(3.0, 0.0, 1.0),
            Vec3::new(4.0, -2.0, 0.5),
        ];
        let times = vec![0.0, 1.0, 2.0, 3.0];
        let init = [Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::zeros()];
        let mut last = f64::INFINITY;
        for rho in [1.0, 10.0, 100.0, 1e4] {
            let qp = build_qp(&waypoints, &times, init, 5, rho).unwrap();
            let traj = solve_spline(&qp).unwrap();
            let err: f64 = waypoints
                .iter()
                .enumerate()
                .map(|(i, w)| (traj.eval(times[i + 1], 0).unwrap() - w).norm_squared())
                .sum();
            assert!(err <= last + 1e-12, "rho {rho}: {err} > {last}");
            last = err;
        }
    }

    #[test]
    fn solution_beats_projected_perturbations() {
        use rand::{Rng, SeedableRng};
        let qp = straight_line_instance();
        let traj = solve_spline(&qp).unwrap();
        let base = spline_objective(&qp, &traj);

        // null-space projector of the constraints
        let a = &qp.constraint_matrix;
        let aat = a * a.transpose();
        let aat_inv = aat.clone().try_inverse().expect("constraints full rank");
        let dim = qp.cost_matrix.nrows();
        let projector = DMatrix::identity(dim, dim) - a.transpose() * aat_inv * a;

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let k = qp.poly_order;
        for _ in 0..100 {
            let mut perturbed = traj.clone();
            for axis in 0..3 {
                let delta = DVector::from_iterator(dim, (0..dim).map(|_| rng.random_range(-0.05..0.05)));
                let feasible_delta = &projector * delta;
                for seg in 0..perturbed.coefficients.len() {
                    for p in 0..=k {
                        perturbed.coefficients[seg][p][axis] += feasible_delta[seg * (k + 1) + p];
                    }
                }
            }
            let perturbed_cost = spline_objective(&qp, &perturbed);
            assert!(perturbed_cost >= base - 1e-9, "{perturbed_cost} < {base}");
        }
    }

    #[test]
    fn eval_hand_polynomial() {
        // single segment: x(t) = (1, 0, 0) + (0, 2, 0) t
        let traj = SplineTrajectory::from_coefficients(
            vec![0.0, 1.0],
            vec![vec![
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 2.0, 0.0),
                Vec3::zeros(),
                Vec3::zeros(),
                Vec3::zeros(),
                Vec3::zeros(),
            ]],
        )
        .unwrap();
        assert_relative_eq!(traj.eval(0.5, 0).unwrap(), Vec3::new(1.0, 1.0, 0.0));
        assert_relative_eq!(traj.eval(0.5, 1).unwrap(), Vec3::new(0.0, 2.0, 0.0));
        assert_relative_eq!(traj.eval(0.5, 2).unwrap(), Vec3::zeros());
        // end boundary maps into the last segment
        assert!(traj.eval(1.0, 0).is_ok());
        assert!(matches!(traj.eval(1.1, 0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(traj.eval(-0.1, 0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn yaw_axis_cases() {
        assert_relative_eq!(
            yaw_profile(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0)).unwrap(),
            0.0
        );
        assert_relative_eq!(
            yaw_profile(Vec3::zeros(), Vec3::new(0.0, 1.0, 0.0)).unwrap(),
            std::f64::consts::FRAC_PI_2
        );
        assert!(yaw_profile(Vec3::zeros(), Vec3::new(0.0, 0.0, 5.0)).is_none());
    }

    #[test]
    fn yaw_unwraps_around_orbit() {
        let mut tracker = YawTracker::new();
        let mut last = None;
        for i in 0..=720 {
            let a = i as f64 * std::f64::consts::PI / 180.0;
            let pos = Vec3::new(5.0 * a.cos(), 5.0 * a.sin(), 2.0);
            let yaw = tracker.update(pos, Vec3::zeros());
            if let Some(prev) = last {
                let step: f64 = yaw - prev;
                assert!(step.abs() < std::f64::consts::PI, "jump at {i}: {step}");
            }
            last = Some(yaw);
        }
        // two full orbits unwrap to ~4*pi of accumulated yaw change
        assert!((last.unwrap() - (std::f64::consts::PI + 4.0 * std::f64::consts::PI)).abs() < 1e-6);
    }

    #[test]
    fn yaw_holds_through_degenerate_sample() {
        let mut tracker = YawTracker::new();
        let y1 = tracker.update(Vec3::new(-3.0, 0.0, 1.0), Vec3::zeros());
        let held = tracker.update(Vec3::new(0.0, 0.0, 5.0), Vec3::zeros());
        assert_eq!(y1, held);
    }

    #[test]
    fn joint_and_independent_axis_solves_agree() {
        // block-diagonal 3-axis KKT assembled in one system
        let qp = straight_line_instance();
        let traj = solve_spline(&qp).unwrap();

        let dim = qp.cost_matrix.nrows();
        let m = qp.constraint_matrix.nrows();
        let total = 3 * (dim + m);
        let mut kkt = DMatrix::zeros(total, total);
        let mut rhs = DVector::zeros(total);
        for axis in 0..3 {
            let off = axis * (dim + m);
            kkt.view_mut((off, off), (dim, dim)).copy_from(&qp.cost_matrix);
            kkt.view_mut((off, off + dim), (dim, m))
                .copy_from(&qp.constraint_matrix.transpose());
            kkt.view_mut((off + dim, off), (m, dim))
                .copy_from(&qp.constraint_matrix);
            rhs.rows_mut(off, dim).copy_from(&(-&qp.linear_costs[axis]));
            rhs.rows_mut(off + dim, m).copy_from(&qp.constraint_rhs[axis]);
        }
        let joint = kkt.full_piv_lu().solve(&rhs).unwrap();
        let k = qp.poly_order;
        for axis in 0..3 {
            let off = axis * (dim + m);
            for seg in 0..traj.coefficients.len() {
                for p in 0..=k {
                    let independent = traj.coefficients[seg][p][axis];
                    let jointly = joint[off + seg * (k + 1) + p];
                    assert!((independent - jointly).abs() < 1e-9);
                }
            }
        }
    }
}
