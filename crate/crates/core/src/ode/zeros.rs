use super::Trajectory;

const SUBSAMPLES: usize = 10;

/// Zeros of `u` along a trajectory, using a tolerance of
/// `1e-12 * max(1, max|u|)`.
pub fn count_zeros(traj: &Trajectory) -> usize {
    count_zeros_with_tol(traj, 1e-12 * traj.max_abs().max(1.0))
}

/// Zeros of `u` sampled at ten points per step. A maximal run of samples with
/// `|u| <= tol` counts as one zero; otherwise each sign change between
/// consecutive samples counts as one.
pub fn count_zeros_with_tol(traj: &Trajectory, tol: f64) -> usize {
    let mut count = 0;
    let mut prev_sign = 0i8;
    let mut in_zero_run = false;
    let mut visit = |v: f64| {
        if v.abs() <= tol {
            if !in_zero_run {
                count += 1;
                in_zero_run = true;
            }
            prev_sign = 0;
        } else {
            let s = if v > 0.0 { 1 } else { -1 };
            if prev_sign != 0 && s != prev_sign {
                count += 1;
            }
            prev_sign = s;
            in_zero_run = false;
        }
    };
    for i in 0..traj.steps() {
        visit(traj.u[i]);
        for k in 1..SUBSAMPLES {
            visit(traj.eval_step(i, k as f64 / SUBSAMPLES as f64).u);
        }
    }
    visit(*traj.u.last().expect("nonempty"));
    count
}
