//! Derivatives and flows checked numerically against RK4 trajectories.

use std::f64::consts::FRAC_PI_2;

use plaidy_core::arith::poly_normalize;
use plaidy_core::ast::{AssignmentList, BoolExpr, OdeSystem, RealExpr, RelOp, Variable};
use plaidy_core::diff::{bool_derivative, lie_derivative};
use plaidy_core::eval::{eval_bool, eval_real, ode_flow};
use plaidy_core::syntax::{parse_formula, parse_real, Scope};
use plaidy_core::Environment;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const X: Variable = Variable(0);
const Y: Variable = Variable(1);
const Z: Variable = Variable(2);

fn scope() -> Scope {
    Scope::with_vars(&["x", "y", "z", "c"])
}

fn circle_system() -> OdeSystem {
    let sc = scope();
    let eqs = AssignmentList::new(vec![(X, parse_real("-y", &sc).unwrap()), (Y, parse_real("x", &sc).unwrap())]).unwrap();
    OdeSystem::new(eqs, BoolExpr::Top).unwrap()
}

/// Maximum drift of `x^2 + y^2 - c^2` along the rotation flow from `(c, 0)`.
pub fn circle_drift(c: f64) -> f64 {
    let start = Environment::zero().with(&[(X, c), (Y, 0.0)]);
    let flow = ode_flow(&circle_system(), &start, FRAC_PI_2, 1e-3).unwrap();
    assert!(flow.domain_violated_at.is_none());
    let (t_end, _) = flow.trajectory.last().unwrap();
    assert!((t_end - FRAC_PI_2).abs() < 1e-12);
    flow.trajectory
        .iter()
        .map(|(_, e)| (e.lookup(X).powi(2) + e.lookup(Y).powi(2) - c * c).abs())
        .fold(0.0, f64::max)
}

pub fn rk4_preserves_the_circle() {
    for c in [1.0, 2.0] {
        let drift = circle_drift(c);
        assert!(drift <= 1e-6, "c = {c}: drift {drift:e}");
    }
}

pub fn rk4_matches_closed_forms() {
    let start = Environment::zero().with(&[(X, 1.0), (Y, 0.0)]);
    let end = ode_flow(&circle_system(), &start, FRAC_PI_2, 1e-3).unwrap().end_env;
    assert!(end.lookup(X).abs() < 1e-6 && (end.lookup(Y) - 1.0).abs() < 1e-6);

    let sc = scope();
    let c = Variable(3);
    let eqs = AssignmentList::new(vec![(X, parse_real("-c", &sc).unwrap()), (Y, RealExpr::int(0))]).unwrap();
    let sys = OdeSystem::new(eqs, BoolExpr::Top).unwrap();
    let start = Environment::zero().with(&[(Y, 3.0), (c, 3.0)]);
    let end = ode_flow(&sys, &start, 1.0, 1e-3).unwrap().end_env;
    assert!((end.lookup(X) + 3.0).abs() < 1e-9);
    assert_eq!(end.lookup(Y), 3.0);
}

/// A random polynomial of degree at most 3 in x, y, z.
fn polynomial(rng: &mut ChaCha8Rng) -> RealExpr {
    let mut p = RealExpr::int(rng.gen_range(-3..=3));
    for _ in 0..rng.gen_range(1..=4) {
        let mut m = RealExpr::int(rng.gen_range(-3..=3));
        let degree = rng.gen_range(1..=3);
        for _ in 0..degree {
            m = m * RealExpr::var([X, Y, Z][rng.gen_range(0..3)]);
        }
        p = p + m;
    }
    p
}

/// A random affine vector field on x and y, sometimes with z as a
/// parameter.
fn affine_system(rng: &mut ChaCha8Rng) -> OdeSystem {
    let mut field = || {
        let mut r = RealExpr::int(rng.gen_range(-2..=2));
        for v in [X, Y, Z] {
            let k = rng.gen_range(-2..=2);
            if k != 0 {
                r = r + RealExpr::int(k) * RealExpr::var(v);
            }
        }
        r
    };
    let eqs = AssignmentList::new(vec![(X, field()), (Y, field())]).unwrap();
    OdeSystem::new(eqs, BoolExpr::Top).unwrap()
}

fn small_env(rng: &mut ChaCha8Rng) -> Environment {
    let mut value = || rng.gen_range(-1.0..1.0);
    Environment::zero().with(&[(X, value()), (Y, value()), (Z, value())])
}

pub fn lie_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // Central differences carry an h^2 truncation error; at h = 1e-3 it
    // reaches 1e-3 on the steeper cubics, so the grid is 1e-4.
    let step = 1e-4;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let r = polynomial(&mut rng);
        let sys = affine_system(&mut rng);
        let lie = lie_derivative(&r, &sys).unwrap();
        let flow = ode_flow(&sys, &small_env(&mut rng), 0.5, step).unwrap();
        let traj = &flow.trajectory;
        for i in (1..traj.len() - 1).step_by((traj.len() - 2) / 10).take(10) {
            let fd = (eval_real(&r, &traj[i + 1].1).unwrap() - eval_real(&r, &traj[i - 1].1).unwrap()) / (2.0 * step);
            let symbolic = eval_real(&lie, &traj[i].1).unwrap();
            worst = worst.max((fd - symbolic).abs());
        }
    }
    assert!(worst <= 1e-4, "worst finite-difference error {worst:e}");
}

pub fn lie_derivative_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let (r1, r2) = (polynomial(&mut rng), polynomial(&mut rng));
        let a = RealExpr::int(rng.gen_range(-4..=4));
        let sys = affine_system(&mut rng);
        let lhs = lie_derivative(&(a.clone() * r1.clone() + r2.clone()), &sys).unwrap();
        let rhs = a * lie_derivative(&r1, &sys).unwrap() + lie_derivative(&r2, &sys).unwrap();
        assert_eq!(poly_normalize(&lhs).unwrap(), poly_normalize(&rhs).unwrap());
    }
}

pub fn circle_derivative_is_the_rotation_identity() {
    let sc = scope();
    let d = bool_derivative(&parse_formula("x^2 + y^2 = c^2", &sc).unwrap(), &circle_system()).unwrap();
    let BoolExpr::Rel(RelOp::Eq, l, r) = &d else { panic!("{d:?}") };
    let expected = parse_real("2*x*(-y) + 2*y*x", &sc).unwrap();
    assert_eq!(poly_normalize(&(l.clone() - r.clone())).unwrap(), poly_normalize(&expected).unwrap());
    assert!(poly_normalize(&expected).unwrap().is_zero());
    let xy = lie_derivative(&parse_real("x*y", &sc).unwrap(), &circle_system()).unwrap();
    assert_eq!(poly_normalize(&xy).unwrap(), poly_normalize(&parse_real("-y^2 + x^2", &sc).unwrap()).unwrap());
}

fn holds_with_slack(b: &BoolExpr, e: &Environment) -> bool {
    match b {
        BoolExpr::Rel(op, l, r) => {
            let d = eval_real(l, e).unwrap() - eval_real(r, e).unwrap();
            let tol = 1e-6;
            match op {
                RelOp::Eq => d.abs() <= tol,
                RelOp::Ne => d.abs() > 0.0 || d.abs() <= tol,
                RelOp::Lt => d < tol,
                RelOp::Le => d <= tol,
                RelOp::Gt => d > -tol,
                RelOp::Ge => d >= -tol,
            }
        }
        BoolExpr::And(p, q) => holds_with_slack(p, e) && holds_with_slack(q, e),
        BoolExpr::Or(p, q) => holds_with_slack(p, e) || holds_with_slack(q, e),
        other => panic!("not generated: {other:?}"),
    }
}

/// Whenever the derivative condition holds along a sampled flow and the
/// formula holds initially, it holds at the end of the flow.
pub fn differential_invariants_hold_along_flows() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let ops = [RelOp::Eq, RelOp::Ne, RelOp::Lt, RelOp::Le, RelOp::Gt, RelOp::Ge];
    let mut exercised = 0;
    for _ in 0..400 {
        let sys = if rng.gen_bool(0.3) { circle_system() } else { affine_system(&mut rng) };
        let atom = |rng: &mut ChaCha8Rng| {
            let r = if rng.gen_bool(0.5) { polynomial(rng) } else { RealExpr::var(X) * RealExpr::var(X) + RealExpr::var(Y) * RealExpr::var(Y) };
            BoolExpr::rel(ops[rng.gen_range(0..6)], r, RealExpr::int(rng.gen_range(-2..=2)))
        };
        let b = if rng.gen_bool(0.3) { BoolExpr::and(atom(&mut rng), atom(&mut rng)) } else { atom(&mut rng) };
        let d = bool_derivative(&b, &sys).unwrap();
        let start = small_env(&mut rng);
        if !eval_bool(&b, &start, None).unwrap() {
            continue;
        }
        let flow = ode_flow(&sys, &start, 1.0, 1e-3).unwrap();
        if !flow.trajectory.iter().all(|(_, e)| eval_bool(&d, e, None).unwrap()) {
            continue;
        }
        exercised += 1;
        assert!(holds_with_slack(&b, &flow.end_env), "{b:?} fails after a flow of {sys:?} from {start:?}");
    }
    assert!(exercised >= 30, "only {exercised} non-vacuous cases");
}

/// Lists the cases for runners without the test harness and wraps each
/// one as a test.
macro_rules! cases {
    ($($name:ident),* $(,)?) => {
        #[allow(dead_code)]
        pub const CASES: &[(&str, fn())] = &[$((stringify!($name), $name)),*];

        mod case {
            $(#[test]
            fn $name() {
                super::$name()
            })*
        }
    };
}

cases!(rk4_preserves_the_circle, rk4_matches_closed_forms, lie_derivatives_match_finite_differences, lie_derivative_is_linear, circle_derivative_is_the_rotation_identity, differential_invariants_hold_along_flows);
