use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::ldp::relative_entropy;

fn num_q() -> DiscreteMeasure {
    DiscreteMeasure::new(vec![0.0, 0.1, 1.0], vec![0.799, 0.2, 0.001]).unwrap()
}

fn brute_density(p: &DiscreteMeasure) -> f64 {
    let (x, w) = (p.points(), p.weights());
    let mut total = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            total += w[i] * w[j] * x[i].min(x[j]);
        }
    }
    total
}

fn random_measure(rng: &mut ChaCha8Rng, n: usize) -> DiscreteMeasure {
    let mut points: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let weights: Vec<f64> = points.iter().map(|_| rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    DiscreteMeasure::new(points, weights.into_iter().map(|w| w / total).collect()).unwrap()
}

#[test]
fn density_examples() {
    let point = DiscreteMeasure::new(vec![0.37], vec![1.0]).unwrap();
    assert_eq!(edge_density_functional(&point), 0.37);
    let m = 1000;
    let grid = DiscreteMeasure::new((0..m).map(|i| (i as f64 + 0.5) / m as f64).collect(), vec![1.0 / m as f64; m]).unwrap();
    assert!((edge_density_functional(&grid) - 1.0 / 3.0).abs() < 1.0 / m as f64);
    let q = num_q();
    assert!((edge_density_functional(&q) - brute_density(&q)).abs() < 1e-15);
}

#[test]
fn density_and_gradient_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let p = random_measure(&mut rng, 12);
        assert!((edge_density_functional(&p) - brute_density(&p)).abs() < 1e-12);
        let grad = edge_density_gradient(&p);
        for (k, g) in grad.iter().enumerate() {
            let brute: f64 = 2.0 * p.points().iter().zip(p.weights()).map(|(x, w)| w * x.min(p.points()[k])).sum::<f64>();
            assert!((g - brute).abs() < 1e-12);
        }
    }
}

#[test]
fn reference_measure_examples() {
    let q = reference_measure_from_model(3.0, 3.0, 1.0, 64).unwrap();
    let atom = *q.weights().last().unwrap();
    assert!((atom - (-3.0f64).exp()).abs() < 1e-15);
    assert!((q.points().last().unwrap() - (1.0 - (-3.0f64).exp())).abs() < 1e-15);
    assert_eq!(q.weights().iter().sum::<f64>(), 1.0);
    let long = reference_measure_from_model(30.0, 30.0, 1.0, 16).unwrap();
    assert!(*long.weights().last().unwrap() < 1e-13);
    assert!(reference_measure_from_model(3.0, 6.0, 1.0, 64).is_err());
    assert!(reference_measure_from_model(3.0, 3.0, 1.0, 1).is_err());
}

#[test]
fn inactive_lower_constraint_returns_reference() {
    let q = num_q();
    let e_q = edge_density_functional(&q);
    let s = solve_lower(&VariationalProblem::new(q.clone(), e_q + 0.01, Direction::AtMost).unwrap()).unwrap();
    assert_eq!(s.p, q);
    assert_eq!(s.rate, 0.0);
}

#[test]
fn singleton_support_is_infeasible_below_its_point() {
    let q = DiscreteMeasure::new(vec![0.5], vec![1.0]).unwrap();
    let err = solve_lower(&VariationalProblem::new(q, 0.3, Direction::AtMost).unwrap()).unwrap_err();
    assert!(matches!(err, Error::Infeasible(_)));
    let err = solve_upper(&VariationalProblem::new(num_q(), 1.0, Direction::AtLeast).unwrap(), Multistart::default());
    assert!(err.is_ok());
    let q = DiscreteMeasure::new(vec![0.0, 0.5], vec![0.5, 0.5]).unwrap();
    let err = solve_upper(&VariationalProblem::new(q, 0.6, Direction::AtLeast).unwrap(), Multistart::default());
    assert!(matches!(err, Err(Error::Infeasible(_))));
}

#[test]
fn extreme_target_gives_point_mass() {
    let sols = solve_upper(&VariationalProblem::new(num_q(), 1.0, Direction::AtLeast).unwrap(), Multistart::default()).unwrap();
    assert_eq!(sols.len(), 1);
    assert_eq!(sols[0].p.weights(), &[0.0, 0.0, 1.0]);
    assert!((sols[0].rate - (-(0.001f64).ln())).abs() < 1e-12);
}

#[test]
fn lower_tail_solution_satisfies_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let q = random_measure(&mut rng, 8);
        let (lo, _) = attainable_range(&q);
        let e_q = edge_density_functional(&q);
        let e_star = lo + 0.5 * (e_q - lo);
        let problem = VariationalProblem::new(q.clone(), e_star, Direction::AtMost).unwrap();
        let s = solve_lower(&problem).unwrap();
        assert!(s.converged, "{s:?}");
        assert!(edge_density_functional(&s.p) <= e_star + 1e-8);
        assert!(kkt_residual(&problem, &s.p, s.multiplier.unwrap()) < 1e-6);
        assert!(s.multiplier.unwrap() > 0.0);
        assert!((s.rate - relative_entropy(&s.p, &q).unwrap().value()).abs() < 1e-12);
        assert!((s.p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn lower_tail_beats_random_feasible_points() {
    let q = num_q();
    let problem = VariationalProblem::new(q.clone(), 0.002, Direction::AtMost).unwrap();
    let s = solve_lower(&problem).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let w: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
        let p = q.with_weights(w).unwrap();
        if edge_density_functional(&p) <= 0.002 {
            assert!(relative_entropy(&p, &q).unwrap().value() >= s.rate - 1e-12);
        }
    }
}

#[test]
fn upper_tail_finds_both_minima_near_the_crossing() {
    let problem = VariationalProblem::new(num_q(), 0.085, Direction::AtLeast).unwrap();
    let sols = solve_upper(&problem, Multistart { starts: 64, seed: 1 }).unwrap();
    assert_eq!(sols.len(), 2, "{sols:?}");
    let p1 = [0.0782, 0.9159, 0.0059];
    let p2 = [0.3728, 0.4020, 0.2252];
    let near = |target: &[f64]| sols.iter().any(|s| sup_distance(s.p.weights(), target) < 5e-3);
    assert!(near(&p1) && near(&p2), "{sols:?}");
    for s in &sols {
        assert!(s.converged);
        assert!(s.constraint_value >= 0.085 - 1e-8);
        assert!(kkt_residual(&problem, &s.p, s.multiplier.unwrap()) < 1e-6);
    }
}

#[test]
fn two_atom_reference_has_one_minimum() {
    let q = DiscreteMeasure::new(vec![0.2, 0.9], vec![0.7, 0.3]).unwrap();
    let e_star = 0.6;
    let sols = solve_upper(&VariationalProblem::new(q.clone(), e_star, Direction::AtLeast).unwrap(), Multistart::default()).unwrap();
    assert_eq!(sols.len(), 1);
    // One-dimensional scan of the feasible weights on the upper atom.
    let best = (0..=200_000)
        .map(|i| i as f64 / 200_000.0)
        .filter_map(|w| {
            let p = q.with_weights(vec![1.0 - w, w]).unwrap();
            (edge_density_functional(&p) >= e_star).then(|| relative_entropy(&p, &q).unwrap().value())
        })
        .fold(f64::INFINITY, f64::min);
    assert!((sols[0].rate - best).abs() < 1e-4, "{} vs {best}", sols[0].rate);
}

#[test]
fn feasible_region_of_lower_tail_is_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let q = num_q();
    let e_star = 0.05;
    let mut checked = 0;
    while checked < 2000 {
        let draw = |rng: &mut ChaCha8Rng| q.with_weights((0..3).map(|_| rng.random::<f64>()).collect()).unwrap();
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        let (ea, eb) = (edge_density_functional(&a), edge_density_functional(&b));
        // Independent copies: E[min(X1, X2)] <= sqrt(e(P1) e(P2)).
        let cross: f64 = 2.0 * a.weights()[1] * b.weights()[1] * 0.1 / 2.0
            + a.weights()[1] * b.weights()[2] * 0.1
            + a.weights()[2] * b.weights()[1] * 0.1
            + a.weights()[2] * b.weights()[2];
        assert!(cross <= (ea * eb).sqrt() + 1e-15);
        if ea <= e_star && eb <= e_star {
            let mid: Vec<f64> = a.weights().iter().zip(b.weights()).map(|(x, y)| 0.5 * (x + y)).collect();
            assert!(edge_density_functional(&q.with_weights(mid).unwrap()) <= e_star + 1e-15);
            checked += 1;
        }
    }
}

#[test]
fn rate_curve_has_crossing_branches() {
    let grid: Vec<f64> = (0..=20).map(|i| 0.06 + 0.0025 * i as f64).collect();
    let curve = rate_curve(&num_q(), &grid, Direction::AtLeast, Multistart { starts: 16, seed: 5 }).unwrap();
    let crossings = curve.crossings();
    assert!(
        crossings.iter().any(|&(lo, hi, _, _)| lo >= 0.075 && hi <= 0.095),
        "{crossings:?}"
    );
    for b in 0..curve.branches {
        let rates: Vec<f64> = curve.branch(b).map(|r| r.rate).collect();
        assert!(rates.windows(2).all(|w| w[1] >= w[0] - 1e-9), "branch {b}: {rates:?}");
    }
    let mut csv = Vec::new();
    curve.write_csv(&mut csv).unwrap();
    assert!(String::from_utf8(csv).unwrap().starts_with("estar,branch,rate\n"));
}

#[test]
fn lower_rate_curve_is_flat_above_the_reference_density() {
    let q = num_q();
    let e_q = edge_density_functional(&q);
    let grid = [e_q * 0.5, e_q * 0.9, e_q * 1.1, e_q * 2.0];
    let curve = rate_curve(&q, &grid, Direction::AtMost, Multistart::default()).unwrap();
    let rates: Vec<f64> = curve.rows.iter().map(|r| r.rate).collect();
    assert!(rates[0] > rates[1] && rates[1] > 0.0);
    assert_eq!(&rates[2..], &[0.0, 0.0]);
}



