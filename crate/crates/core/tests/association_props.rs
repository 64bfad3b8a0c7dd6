use netsense::association::{AssociationHypothesis, AssociationProblem, DEFAULT_FEAS_TOL_M};
use netsense::rng::child_rng;
use netsense::scene::{random_scene, true_distance, Bounds, Point2, Scene};
use rand::seq::SliceRandom;

/// Exact distances with each station's list shuffled; returns the problem and
/// the true hypothesis (slot k is the target behind station 1's k-th distance).
fn shuffled_problem(scene: &Scene, seed: u64) -> (AssociationProblem, AssociationHypothesis, Vec<Point2>) {
    let mut rng = child_rng(seed, 99);
    let bs: Vec<Point2> = scene.base_stations().map(|a| a.position).collect();
    let k = scene.targets.len();
    let mut orders = Vec::new();
    let mut distances = Vec::new();
    for a in &bs {
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(&mut rng);
        distances
            .push(order.iter().map(|&t| true_distance(*a, scene.targets[t].position)).collect::<Vec<_>>());
        orders.push(order);
    }
    // slot k holds target orders[0][k]; station m lists that target at position inv_m
    let permutations = orders
        .iter()
        .map(|o| (0..k).map(|slot| o.iter().position(|&t| t == orders[0][slot]).unwrap()).collect())
        .collect();
    let truth = orders[0].iter().map(|&t| scene.targets[t].position).collect();
    (AssociationProblem::from_points(bs, distances).unwrap(), AssociationHypothesis { permutations }, truth)
}

fn instance(seed: u64) -> Scene {
    let m = 3 + (seed % 3) as usize;
    let k = 1 + ((seed / 3) % 4) as usize;
    random_scene(m, k, Bounds::square(300.0), -10.0, seed).unwrap()
}

#[test]
fn truth_is_always_feasible_with_exact_ranges() {
    for seed in 0..200 {
        let scene = instance(seed);
        let (p, truth_hyp, truth) = shuffled_problem(&scene, seed);
        let sols = p.enumerate(DEFAULT_FEAS_TOL_M).unwrap().solutions;
        let hit = sols
            .iter()
            .find(|s| s.hypothesis == truth_hyp)
            .unwrap_or_else(|| panic!("seed {seed}: truth missing"));
        assert!(hit.max_residual_m < 1e-6);
        for (e, t) in hit.estimates.iter().zip(&truth) {
            assert!(true_distance(e.position, *t) < 1e-6);
        }
    }
}

#[test]
fn bnb_enumeration_matches_exhaustive_set() {
    for seed in 0..150 {
        let scene = instance(seed);
        let (p, _, _) = shuffled_problem(&scene, seed);
        let a = p.enumerate(DEFAULT_FEAS_TOL_M).unwrap().solutions;
        let b = p.enumerate_bnb(DEFAULT_FEAS_TOL_M).unwrap();
        assert_eq!(a, b, "seed {seed}");
    }
}

#[test]
fn station_order_does_not_move_targets() {
    for seed in 0..100 {
        let scene = instance(seed);
        let bs: Vec<Point2> = scene.base_stations().map(|a| a.position).collect();
        let dist = |a: &Point2| -> Vec<f64> {
            scene.targets.iter().map(|t| true_distance(*a, t.position)).collect()
        };
        let forward = AssociationProblem::from_points(bs.clone(), bs.iter().map(dist).collect()).unwrap();
        let mut rev = bs.clone();
        rev[1..].reverse();
        let reversed = AssociationProblem::from_points(rev.clone(), rev.iter().map(dist).collect()).unwrap();
        let a = forward.solve(DEFAULT_FEAS_TOL_M).unwrap();
        let b = reversed.solve(DEFAULT_FEAS_TOL_M).unwrap();
        for (x, y) in a.estimates.iter().zip(&b.estimates) {
            assert!(true_distance(x.position, y.position) < 1e-6, "seed {seed}");
        }
    }
}

#[test]
fn noisy_bnb_matches_exhaustive() {
    use netsense::association::noisy_feas_tol;
    use rand_distr::{Distribution, Normal};
    for (seed, sigma) in (0..300u64).zip([0.01, 0.05, 0.2].into_iter().cycle()) {
        let scene = instance(seed);
        let bs: Vec<Point2> = scene.base_stations().map(|a| a.position).collect();
        let mut rng = child_rng(seed, 7);
        let noise = Normal::new(0.0, sigma).unwrap();
        let d = bs
            .iter()
            .map(|a| {
                scene
                    .targets
                    .iter()
                    .map(|t| (true_distance(*a, t.position) + noise.sample(&mut rng)).max(0.0))
                    .collect()
            })
            .collect();
        let m = bs.len();
        let p = AssociationProblem::from_points(bs, d).unwrap();
        let tol = noisy_feas_tol(sigma, m);
        match (p.solve(tol), p.solve_bnb(tol)) {
            (Ok(a), Ok(b)) => assert_eq!(a, b, "seed {seed}"),
            (Err(_), Err(_)) => {}
            (a, b) => panic!("seed {seed}: {a:?} vs {b:?}"),
        }
    }
}
