mod common;

use common::{relay_problem, rng, Coeffs};
use rand::Rng;
use wsee::global::{
    dc_split_f, dinkelbach_solve, lifted_feasible, parametric_f, polyblock_maximize, polyblock_maximize_set,
    project_to_boundary, ratio_parts, DinkelbachConfig, GlobalStatus, LiftedPoint, PolyblockConfig, PolyblockStatus,
};
use wsee::{InterferenceNetwork, PowerModel, WseeProblem};

fn ordered_pair(rng: &mut impl Rng, c: &Coeffs) -> (Vec<f64>, Vec<f64>) {
    let a = c.interior_point(rng);
    let b: Vec<f64> = a.iter().zip(&c.pmax).map(|(x, m)| x + rng.gen::<f64>() * (m - x)).collect();
    (a, b)
}

#[test]
fn ratio_identity_and_edge_cases() {
    let mut r = rng(31);
    for _ in 0..300 {
        let c = Coeffs::random(&mut r, 3);
        let prob = c.problem();
        let p = c.interior_point(&mut r);
        let parts = ratio_parts(&prob, &p).unwrap();
        assert!((parts.ratio() - c.wsee(&p)).abs() <= 1e-10 * c.wsee(&p));
        let zero = ratio_parts(&prob, &[0.0; 3]).unwrap();
        assert_eq!(zero.numerator, 0.0);
        assert!((zero.denominator - c.pc.iter().product::<f64>()).abs() <= 1e-15 * zero.denominator);
    }
    let c = Coeffs::random(&mut r, 1);
    let prob = c.problem();
    let parts = ratio_parts(&prob, &c.pmax).unwrap();
    assert!((parts.numerator - c.w[0] * c.rate(&c.pmax, 0)).abs() <= 1e-15 * parts.numerator);
    assert!((parts.denominator - (c.phi[0] * c.pmax[0] + c.pc[0])).abs() <= 1e-15 * parts.denominator);
}

#[test]
fn parametric_values() {
    let mut r = rng(32);
    for _ in 0..100 {
        let c = Coeffs::random(&mut r, 3);
        let prob = c.problem();
        let p = c.interior_point(&mut r);
        let parts = ratio_parts(&prob, &p).unwrap();
        assert_eq!(parametric_f(&prob, &p, 0.0).unwrap(), parts.numerator);
        let at_self = parametric_f(&prob, &p, prob.wsee(&p).unwrap()).unwrap();
        assert!(at_self.abs() <= 1e-12 * parts.numerator);
    }
    let c = Coeffs::random(&mut r, 2);
    assert!(parametric_f(&c.problem(), &c.pmax, -1.0).is_err());
}

#[test]
fn split_reproduces_f_and_is_monotone() {
    let mut r = rng(33);
    for i in 0..1000 {
        let c = Coeffs::random(&mut r, 2 + i % 3);
        let prob = c.problem();
        let lambda = r.gen::<f64>() * 2.0 * prob.wsee(&c.pmax).unwrap();
        let split = dc_split_f(&prob, lambda).unwrap();
        let (lo, hi) = ordered_pair(&mut r, &c);
        let (a, b) = (split.eval(&lo).unwrap(), split.eval(&hi).unwrap());
        assert!(a.increasing <= b.increasing && a.decreasing <= b.decreasing, "pair {i}");
        let f = parametric_f(&prob, &lo, lambda).unwrap();
        assert!((a.difference() - f).abs() <= 1e-10 * a.increasing.max(a.decreasing).max(1.0));

        let origin = split.eval(&vec![0.0; c.users()]).unwrap();
        assert_eq!(origin.increasing, 0.0);
        let pc: f64 = c.pc.iter().product();
        assert!((origin.decreasing - lambda * pc).abs() <= 1e-15 * (lambda * pc).max(1e-300));
    }
}

#[test]
fn lifted_set_corners() {
    let mut r = rng(34);
    let c = Coeffs::random(&mut r, 2);
    let prob = c.problem();
    let lambda = prob.wsee(&c.pmax).unwrap();
    let lift = dc_split_f(&prob, lambda).unwrap().lift();
    let corner = lift.upper_corner();
    let top = LiftedPoint { p: vec![0.0; 2], t: corner[2] };
    assert!(lifted_feasible(&prob, lambda, &top).unwrap());
    let full = LiftedPoint { p: c.pmax.clone(), t: 0.0 };
    assert!(lifted_feasible(&prob, lambda, &full).unwrap());
    let above = LiftedPoint { p: c.pmax.clone(), t: 1e-9 };
    assert!(!lifted_feasible(&prob, lambda, &above).unwrap());
    let outside = LiftedPoint { p: vec![c.pmax[0] * 1.01, 0.0], t: 0.0 };
    assert!(!lifted_feasible(&prob, lambda, &outside).unwrap());
}

#[test]
fn projection_brackets_the_boundary() {
    let mut r = rng(35);
    for _ in 0..100 {
        let c = Coeffs::random(&mut r, 2);
        let prob = c.problem();
        let lift = dc_split_f(&prob, prob.wsee(&c.pmax).unwrap()).unwrap().lift();
        let corner = lift.upper_corner();
        let v: Vec<f64> = corner.iter().map(|x| x * r.gen_range(0.2..1.0)).collect();
        let tol = 1e-9;
        let proj = project_to_boundary(|z| lift.contains(z), &v, tol);
        let at = |mu: f64| v.iter().map(|x| mu * x).collect::<Vec<_>>();
        assert!(lift.contains(&at(proj.lo)));
        if proj.hi < 1.0 {
            assert!(!lift.contains(&at(proj.hi)));
            assert!(proj.hi - proj.lo <= tol * proj.hi);
        }
    }
}

#[test]
fn polyblock_linear_program() {
    let res = polyblock_maximize(|z| z[0] + 2.0 * z[1], |z| z[0] + z[1] <= 1.0, &[1.0, 1.0], &PolyblockConfig::default()).unwrap();
    assert_eq!(res.status, PolyblockStatus::Converged);
    assert!(res.value >= 2.0 * (1.0 - 1e-4));
    assert!(res.upper_bound >= 2.0);
}

#[test]
fn polyblock_traces_are_monotone() {
    let f = |z: &[f64]| z[0] * z[1] + z[2];
    let feasible = |z: &[f64]| z.iter().map(|x| x * x).sum::<f64>() <= 1.0;
    let res = polyblock_maximize(f, feasible, &[1.0, 1.0, 1.0], &PolyblockConfig::default()).unwrap();
    for w in res.bound_trace.windows(2) {
        assert!(w[1] <= w[0]);
    }
    for w in res.incumbent_trace.windows(2) {
        assert!(w[1] >= w[0]);
    }
    for (u, v) in res.bound_trace.iter().zip(&res.incumbent_trace) {
        assert!(u >= v);
    }
    assert!(feasible(&res.point));
}

#[test]
fn lifted_problem_against_grid() {
    for (realization, db) in [(0, -20.0), (1, -10.0), (2, 0.0)] {
        let prob = relay_problem(2, realization, db);
        let lambda = prob.wsee(&prob.project(&[prob.pmax()[0] * 0.5; 2])).unwrap();
        let lift = dc_split_f(&prob, lambda).unwrap().lift();
        let corner = lift.upper_corner();
        let cfg = PolyblockConfig::default();
        let res = polyblock_maximize_set(|z| lift.objective(z), &lift, &corner, None, &cfg).unwrap();
        assert_eq!(res.status, PolyblockStatus::Converged);
        assert!(lift.contains(&res.point));

        let (n, nt) = (400, 100);
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                let p = [corner[0] * i as f64 / (n - 1) as f64, corner[1] * j as f64 / (n - 1) as f64];
                for l in (0..nt).rev() {
                    let z = [p[0], p[1], corner[2] * l as f64 / (nt - 1) as f64];
                    if lift.contains(&z) {
                        best = best.max(lift.objective(&z));
                        break;
                    }
                }
            }
        }
        let slack = cfg.tol * res.value.abs().max(1.0);
        assert!(best <= res.upper_bound + 1e-12, "grid {best} above bound {}", res.upper_bound);
        assert!(res.value >= best - slack, "value {} below grid {best}", res.value);
    }
}

#[test]
fn grid_argmax_of_ratio_and_objective_agree() {
    let prob = relay_problem(2, 3, -10.0);
    let n = 200;
    let pm = prob.pmax()[0];
    let mut best_f = (0.0, f64::NEG_INFINITY);
    let mut best_r = (0.0, f64::NEG_INFINITY);
    for i in 0..n {
        for j in 0..n {
            let p = [pm * i as f64 / (n - 1) as f64, pm * j as f64 / (n - 1) as f64];
            let f = prob.wsee(&p).unwrap();
            let q = ratio_parts(&prob, &p).unwrap().ratio();
            let key = (i * n + j) as f64;
            if f > best_f.1 {
                best_f = (key, f);
            }
            if q > best_r.1 {
                best_r = (key, q);
            }
        }
    }
    assert_eq!(best_f.0, best_r.0);
    assert!((best_f.1 - best_r.1).abs() <= 1e-12 * best_f.1);
}

#[test]
fn single_user_global_matches_grid() {
    for (theta, sigma2, pmax) in [(1.0, 1.0, 10.0), (0.5, 0.01, 0.1), (2.0, 0.1, 1.0)] {
        let net = InterferenceNetwork::new(vec![theta], vec![vec![0.0]], vec![sigma2]).unwrap();
        let prob = WseeProblem::new(net, PowerModel::uniform(1, 2.5, 1.0).unwrap(), vec![1.0], vec![pmax]).unwrap();
        let res = dinkelbach_solve(&prob, &DinkelbachConfig::default()).unwrap();
        let n = 1_000_000;
        let grid = (0..n)
            .map(|j| prob.wsee(&[pmax * j as f64 / (n - 1) as f64]).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(res.status, GlobalStatus::Converged);
        assert!((res.f_star - grid).abs() <= 1e-5 * grid, "{} vs {grid}", res.f_star);
    }
}

#[test]
fn dinkelbach_trace_properties() {
    for r in 0..6 {
        let prob = relay_problem(2, r, -20.0 + 2.0 * r as f64);
        let cfg = DinkelbachConfig::default();
        let res = dinkelbach_solve(&prob, &cfg).unwrap();
        assert_eq!(res.status, GlobalStatus::Converged);
        for w in res.trace.windows(2) {
            assert!(w[1].lambda > w[0].lambda);
            assert!(w[0].f_value > cfg.eps);
        }
        for rec in &res.trace {
            assert!(rec.f_value >= 0.0);
            assert!(rec.upper_bound >= rec.incumbent);
        }
        assert!(res.trace.last().unwrap().f_value <= cfg.eps);
        assert_eq!(res.outer_iters, res.trace.len());
        assert_eq!(res.inner_iters_total, res.trace.iter().map(|t| t.inner_iters).sum::<usize>());

        // Restarting at the solution needs one parametric solve.
        let again = dinkelbach_solve(&prob, &DinkelbachConfig { p0: Some(res.p_star.clone()), ..cfg }).unwrap();
        assert_eq!(again.outer_iters, 1);
        assert!(again.f_star >= res.f_star);
    }
}

#[test]
fn trace_csv_has_one_row_per_outer_iteration() {
    let prob = relay_problem(2, 0, -10.0);
    let res = dinkelbach_solve(&prob, &DinkelbachConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    res.write_trace_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), res.outer_iters + 1);
    assert!(text.starts_with("outer,lambda,f_value"));
}

#[test]
fn budgets_are_reported() {
    let prob = relay_problem(2, 0, 0.0);
    let cfg = DinkelbachConfig {
        inner: PolyblockConfig {
            max_iters: 50,
            ..PolyblockConfig::default()
        },
        ..DinkelbachConfig::default()
    };
    let res = dinkelbach_solve(&prob, &cfg).unwrap();
    assert_eq!(res.status, GlobalStatus::BudgetExhausted);
    assert_eq!(res.trace.last().unwrap().inner_status, PolyblockStatus::IterationLimit);
    assert!(res.f_star >= prob.wsee(prob.pmax()).unwrap());
    assert!(dinkelbach_solve(&prob, &DinkelbachConfig { eps: 0.0, ..DinkelbachConfig::default() }).is_err());
}
