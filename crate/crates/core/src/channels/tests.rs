use super::*;
use crate::evolve::{smooth_cutoff, BoundaryMode};
use proptest::prelude::*;

fn tail(r: f64, a: f64, p: i32) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        smooth_cutoff(r, a) * r.powi(-p)
    }
}

fn state(grid: &RadialGrid, f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> FieldState {
    FieldState::from_fn(Formulation::U5d, grid, 0.0, f, g).unwrap()
}

fn close(x: f64, y: f64, rel: f64) -> bool {
    (x - y).abs() <= rel * y.abs().max(1e-300)
}

#[test]
fn newton_value_lies_on_the_plane() {
    let grid = RadialGrid::new(40.0, 8000).unwrap();
    let p = project(&state(&grid, |r| tail(r, 1.0, 3), |_| 0.0), &grid, 1.0).unwrap();
    assert!(close(p.norm_pi_sq, 3.0, 2e-3), "{p:?}");
    assert!(p.norm_perp_sq <= 1e-10 * p.norm_pi_sq, "{p:?}");
    assert!(close(p.c1, 1.0, 1e-12));
    assert_eq!(p.c2, 0.0);
    assert!(close(p.closed_form_pi_sq, 3.0, 1e-12));
}

#[test]
fn newton_velocity_lies_on_the_plane() {
    let grid = RadialGrid::new(40.0, 8000).unwrap();
    let p = project(&state(&grid, |_| 0.0, |r| tail(r, 1.0, 3)), &grid, 1.0).unwrap();
    assert!(close(p.norm_pi_sq, 1.0, 1e-4), "{p:?}");
    assert!(p.norm_perp_sq <= 1e-10, "{p:?}");
    assert!(close(p.closed_form_pi_sq, 1.0, 1e-4));
}

#[test]
fn faster_velocity_splits() {
    let grid = RadialGrid::new(40.0, 8000).unwrap();
    let p = project(&state(&grid, |_| 0.0, |r| tail(r, 1.0, 4)), &grid, 1.0).unwrap();
    // the r⁻⁴ tail beyond r_max is continued as r⁻³, so the plane part is
    // slightly overweighted
    assert!(close(p.norm_pi_sq, 0.25, 2e-3), "{p:?}");
    assert!(close(p.norm_perp_sq, 1.0 / 12.0, 2e-2), "{p:?}");
    assert!(close(p.closed_form_pi_sq, p.norm_pi_sq, 2e-3));
}

#[test]
fn projection_radius_must_be_inside() {
    let grid = RadialGrid::new(10.0, 200).unwrap();
    let d = state(&grid, |_| 0.0, |_| 0.0);
    for a in [0.0, -1.0, 10.0, 11.0, f64::NAN] {
        assert!(project(&d, &grid, a).is_err(), "a = {a}");
    }
}

#[test]
fn zero_data_projects_to_zero() {
    let grid = RadialGrid::new(10.0, 200).unwrap();
    let p = project(&FieldState::zero(Formulation::U5d, &grid, 0.0), &grid, 2.0).unwrap();
    assert_eq!((p.c1, p.c2, p.norm_pi_sq, p.norm_perp_sq), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn zero_data_has_no_channel() {
    let grid = RadialGrid::new(16.0, 320).unwrap();
    let d = FieldState::zero(Formulation::U5d, &grid, 0.0);
    let rep = channel_experiment(&d, &grid, 1.0, 10.0, &EvolveOptions::default()).unwrap();
    assert_eq!(rep.rows.len(), CHANNEL_SAMPLES + 1);
    for row in &rep.rows {
        assert_eq!((row.ext_plus, row.ext_minus, row.ratio), (0.0, 0.0, 0.0));
    }
    assert_eq!(rep.terminal_max, 0.0);
    assert_eq!(rep.ratio, 0.0);
    assert_eq!(rep.energy_ratio, 0.0);
}

#[test]
fn channel_needs_room() {
    let grid = RadialGrid::new(10.0, 200).unwrap();
    let d = FieldState::zero(Formulation::U5d, &grid, 0.0);
    let opts = EvolveOptions::default();
    assert!(channel_experiment(&d, &grid, 1.0, 9.0, &opts).is_err());
    assert!(channel_experiment(&d, &grid, 0.0, 5.0, &opts).is_err());
    assert!(channel_experiment(&d, &grid, 1.0, 0.0, &opts).is_err());
}

#[test]
fn bump_radiates_a_fixed_fraction() {
    let grid = RadialGrid::new(16.0, 1600).unwrap();
    let bump = |r: f64| {
        if r > 2.0 && r < 3.0 {
            (4.0 * (r - 2.0) * (3.0 - r)).powi(4)
        } else {
            0.0
        }
    };
    let d = state(&grid, bump, |_| 0.0);
    let rep = channel_experiment(&d, &grid, 1.0, 10.0, &EvolveOptions::default()).unwrap();
    assert!(rep.ratio >= 0.1, "{}", rep.ratio);
    assert!(rep.plateau);
    assert_eq!(rep.forward_termination, Termination::Completed);
    assert!(rep.rows.iter().all(|r| r.ratio.is_finite()));
}

/// Largest deviation from `exact(t, r)` on `r ≥ a + t` over the snapshots.
fn exterior_error(traj: &Trajectory, grid: &RadialGrid, a: f64, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    for s in &traj.snapshots {
        for j in 0..grid.len() {
            let r = grid.r(j);
            if r >= a + s.time.abs() {
                worst = worst.max((s.value[j] - exact(s.time, r)).abs());
            }
        }
    }
    worst
}

fn plane_run(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> (RadialGrid, Trajectory) {
    let grid = RadialGrid::new(12.0, 4800).unwrap();
    let opts = EvolveOptions {
        output_times: (1..10).map(f64::from).collect(),
        boundary: BoundaryMode::None,
        ..Default::default()
    };
    let traj = evolve(EquationKind::Free5d, &state(&grid, f, g), &grid, 10.0, &opts).unwrap();
    (grid, traj)
}

#[test]
fn newton_value_stays_static_outside_the_cone() {
    let (grid, traj) = plane_run(|r| tail(r, 1.0, 3), |_| 0.0);
    let err = exterior_error(&traj, &grid, 1.0, |_, r| r.powi(-3));
    assert!(err <= 1e-6, "{err:e}");
}

#[test]
fn newton_velocity_grows_linearly_outside_the_cone() {
    let (grid, traj) = plane_run(|_| 0.0, |r| tail(r, 1.0, 3));
    let err = exterior_error(&traj, &grid, 1.0, |t, r| t * r.powi(-3));
    assert!(err <= 1e-6, "{err:e}");
}

#[test]
fn key_inequality_on_zero_trajectory() {
    let grid = RadialGrid::new(10.0, 200).unwrap();
    let opts = EvolveOptions {
        output_times: vec![1.0],
        ..Default::default()
    };
    let d = FieldState::zero(Formulation::U5d, &grid, 0.0);
    let traj = evolve(EquationKind::Free5d, &d, &grid, 2.0, &opts).unwrap();
    let rows = key_inequality_report(&traj, &grid, &[1.0, 2.0]).unwrap();
    assert_eq!(rows.len(), 6);
    for row in rows {
        assert_eq!((row.lhs, row.rhs, row.ratio), (0.0, 0.0, 0.0));
    }
}

#[test]
fn key_inequality_vanishes_on_the_plane() {
    let grid = RadialGrid::new(20.0, 2000).unwrap();
    let opts = EvolveOptions {
        output_times: vec![0.5],
        ..Default::default()
    };
    let d = state(&grid, |r| 0.3 * tail(r, 2.0, 3), |r| 0.1 * tail(r, 2.0, 3));
    let traj = evolve(EquationKind::Free5d, &d, &grid, 1.0, &opts).unwrap();
    let rows = key_inequality_report(&traj, &grid, &[2.0, 4.0]).unwrap();
    for row in rows.iter().filter(|row| row.t == 0.0) {
        // rhs·R = ‖π_R u‖³
        assert!(row.lhs <= 1e-5 * (row.rhs * row.r).cbrt(), "{row:?}");
        assert!(row.rhs > 0.0);
    }
}

#[test]
fn decay_of_pure_newton_tail_is_flat() {
    let grid = RadialGrid::new(40.0, 4000).unwrap();
    let d = decay_diagnostics(&state(&grid, |r| tail(r, 1.0, 3), |_| 0.0), &grid, (5.0, 30.0)).unwrap();
    assert!(close(d.ell0, 1.0, 1e-12));
    assert_eq!(d.v0_slope, None);
    assert_eq!(d.v1_slope, None);
}

#[test]
fn decay_residual_exponent() {
    let grid = RadialGrid::new(40.0, 8000).unwrap();
    let u0 = |r: f64| tail(r, 1.0, 3) + tail(r, 1.0, 7);
    let d = decay_diagnostics(&state(&grid, u0, |_| 0.0), &grid, (5.0, 30.0)).unwrap();
    assert!((d.ell0 - 1.0).abs() < 1e-3, "{}", d.ell0);
    let slope = d.v0_slope.unwrap();
    assert!((slope + 4.0).abs() < 0.05, "{slope}");
}

#[test]
fn decay_of_velocity_moment() {
    let grid = RadialGrid::new(200.0, 20000).unwrap();
    let d = decay_diagnostics(&state(&grid, |_| 0.0, |r| tail(r, 1.0, 5)), &grid, (2.0, 20.0)).unwrap();
    let slope = d.v1_slope.unwrap();
    assert!((slope + 2.0).abs() < 0.01, "{slope}");
    let j = 500; // r = 5
    let r = grid.r(j);
    let exact = r.powi(-2) / 3.0;
    assert!((d.v1[j] - exact).abs() <= d.v1_tail_bound + 1e-4 * exact);
}

#[test]
fn decay_window_is_checked() {
    let grid = RadialGrid::new(10.0, 100).unwrap();
    let d = FieldState::zero(Formulation::U5d, &grid, 0.0);
    assert!(decay_diagnostics(&d, &grid, (0.0, 5.0)).is_err());
    assert!(decay_diagnostics(&d, &grid, (5.0, 4.0)).is_err());
    assert!(decay_diagnostics(&d, &grid, (5.0, 11.0)).is_err());
    assert!(decay_diagnostics(&d, &grid, (5.0, 5.05)).is_err());
}

fn bump_sum(coeffs: &[(f64, f64, f64)]) -> impl Fn(f64) -> f64 + '_ {
    move |r| {
        coeffs
            .iter()
            .map(|&(c, m, w)| c * (-((r - m) / w).powi(2)).exp())
            .sum()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pythagoras(
        fs in proptest::collection::vec((-1.0f64..1.0, 0.5f64..8.0, 0.3f64..2.0), 1..4),
        gs in proptest::collection::vec((-1.0f64..1.0, 0.5f64..8.0, 0.3f64..2.0), 1..4),
        a in 0.3f64..6.0,
    ) {
        let grid = RadialGrid::new(12.0, 600).unwrap();
        let d = state(&grid, bump_sum(&fs), bump_sum(&gs));
        let p = project(&d, &grid, a).unwrap();
        let total = p.norm_pi_sq + p.norm_perp_sq;
        prop_assert!((total - p.exterior_norm_sq).abs() <= 1e-8 * p.exterior_norm_sq.max(1e-300));
        prop_assert!(p.norm_pi_sq >= 0.0 && p.norm_perp_sq >= 0.0);
    }

    #[test]
    fn projection_is_idempotent(
        fs in proptest::collection::vec((-1.0f64..1.0, 0.5f64..8.0, 0.3f64..2.0), 1..4),
        gs in proptest::collection::vec((-1.0f64..1.0, 0.5f64..8.0, 0.3f64..2.0), 1..4),
        a in 0.3f64..6.0,
    ) {
        let grid = RadialGrid::new(12.0, 600).unwrap();
        let d = state(&grid, bump_sum(&fs), bump_sum(&gs));
        let p = project(&d, &grid, a).unwrap();
        let again = project(&p.plane_part(&grid, 0.0), &grid, a).unwrap();
        prop_assert!(again.norm_perp_sq <= 1e-10 * again.norm_pi_sq);
        prop_assert!((again.c1 - p.c1).abs() <= 1e-12 * p.c1.abs().max(1e-300));
        prop_assert!((again.c2 - p.c2).abs() <= 1e-12 * p.c2.abs().max(1e-300));
    }
}
