use expost_core::identification::*;
use expost_core::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lot(v: &[f64]) -> Lottery {
    Lottery::new(v.to_vec()).unwrap()
}

fn shifted(a: &Lottery, d: &[f64]) -> Lottery {
    lot(&a.as_slice().iter().zip(d).map(|(x, y)| x + y).collect::<Vec<_>>())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = dot(v, v).sqrt();
    v.iter().map(|x| x / n).collect()
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    dot(&unit(a), &unit(b)).clamp(-1.0, 1.0).acos()
}

fn random_lottery(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// Random direction in the span of `basis`, scaled to length `len`.
fn random_direction(rng: &mut ChaCha8Rng, basis: &[Vec<f64>], len: f64) -> Vec<f64> {
    let n = basis[0].len();
    let mut d = vec![0.0; n];
    for b in basis {
        let c: f64 = rng.random_range(-1.0..1.0);
        for i in 0..n {
            d[i] += c * b[i];
        }
    }
    let nd = dot(&d, &d).sqrt();
    d.iter().map(|x| x * len / nd).collect()
}

fn small() -> Representation {
    id_small_1().into_inner()
}

fn uniform4() -> Lottery {
    Lottery::uniform(4)
}

/// Game value by enumerating every square support pair and keeping the best feasible
/// row strategy.
fn game_value_by_enumeration(m: &[f64], rows: usize, cols: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let subsets = |n: usize| (1u32..(1 << n)).map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect::<Vec<_>>());
    for rs in subsets(rows) {
        for cs in subsets(cols).filter(|c| c.len() == rs.len()) {
            let s = rs.len();
            // Unknowns: x over rs, then v. Equations: x' M[rs, c] - v = 0 for c in cs, sum x = 1.
            let a = DMatrix::from_fn(s + 1, s + 1, |i, j| match (i < s, j < s) {
                (true, true) => m[rs[j] * cols + cs[i]],
                (true, false) => -1.0,
                (false, true) => 1.0,
                (false, false) => 0.0,
            });
            let b = DVector::from_fn(s + 1, |i, _| if i == s { 1.0 } else { 0.0 });
            let Some(sol) = a.lu().solve(&b) else { continue };
            let x: Vec<f64> = (0..s).map(|i| sol[i]).collect();
            let v = sol[s];
            if x.iter().any(|&xi| xi < -1e-12) {
                continue;
            }
            let feasible = (0..cols).all(|c| (0..s).map(|i| x[i] * m[rs[i] * cols + c]).sum::<f64>() >= v - 1e-9);
            if feasible {
                best = best.max(v);
            }
        }
    }
    best
}

/// Regret by scanning hull weights on a grid with `steps` subdivisions.
fn regret_by_hull_scan(rep: &Representation, a: &Lottery, a1: &[Lottery], steps: usize) -> f64 {
    let k = rep.extremes().len();
    let mut best = f64::NEG_INFINITY;
    let mut eval = |w: &[f64]| {
        let v: Vec<f64> = (0..a.len()).map(|i| (0..k).map(|j| w[j] * rep.extremes()[j][i]).sum()).collect();
        let va = dot(&v, a.as_slice());
        let vb = a1.iter().map(|b| dot(&v, b.as_slice())).fold(f64::NEG_INFINITY, f64::max);
        best = best.max(va - vb);
    };
    match k {
        2 => (0..=steps).for_each(|i| {
            let t = i as f64 / steps as f64;
            eval(&[t, 1.0 - t]);
        }),
        3 => {
            for i in 0..=steps {
                for j in 0..=(steps - i) {
                    let (x, y) = (i as f64 / steps as f64, j as f64 / steps as f64);
                    eval(&[x, y, 1.0 - x - y]);
                }
            }
        }
        _ => unreachable!(),
    }
    best
}

#[test]
fn game_solver_matches_support_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..400 {
        let rows = rng.random_range(1..=4);
        let cols = rng.random_range(1..=4);
        let m: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-3.0..3.0)).collect();
        let sol = solve_matrix_game(&m, rows, cols);
        let oracle = game_value_by_enumeration(&m, rows, cols);
        assert!((sol.value - oracle).abs() < 1e-9, "{} vs {oracle} on {m:?}", sol.value);
        // Both strategies guarantee the value.
        for c in 0..cols {
            let g: f64 = (0..rows).map(|r| sol.row_strategy[r] * m[r * cols + c]).sum();
            assert!(g >= sol.value - 1e-9);
        }
        for r in 0..rows {
            let g: f64 = (0..cols).map(|c| sol.col_strategy[c] * m[r * cols + c]).sum();
            assert!(g <= sol.value + 1e-9);
        }
    }
}

#[test]
fn regret_matches_hull_scan_and_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..60u64 {
        let k = 2 + (seed as usize % 2);
        let rep = random_regular_representation(seed, k).unwrap().into_inner();
        let n = rep.space().len();
        let a = lot(&random_lottery(&mut rng, n));
        let mut a1: Vec<Lottery> = vec![a.clone()];
        for _ in 0..rng.random_range(0..4) {
            a1.push(lot(&random_lottery(&mut rng, n)));
        }
        let exact = regret_value(&rep, &a, &a1).unwrap();
        let steps = if k == 2 { 20_000 } else { 300 };
        let scan = regret_by_hull_scan(&rep, &a, &a1, steps);
        // Utilities lie in [0, 1], so the scan error is at most 2 / steps per coordinate.
        assert!(exact >= scan - 1e-12, "exact {exact} below scan {scan}");
        assert!(exact - scan <= 4.0 / steps as f64, "exact {exact} scan {scan}");
        // Exact comparison against the enumerated game over extremes and menu items.
        let m: Vec<f64> = rep
            .extremes()
            .iter()
            .flat_map(|e| a1.iter().map(|b| dot(e, a.as_slice()) - dot(e, b.as_slice())).collect::<Vec<_>>())
            .collect();
        let enumerated = game_value_by_enumeration(&m, k, a1.len());
        assert!((exact - enumerated).abs() < 1e-8);
    }
}

#[test]
fn regret_examples() {
    let rep = small();
    let a = uniform4();
    assert_eq!(regret_value(&rep, &a, &[a.clone()]).unwrap(), 0.0);
    let worse = shifted(&a, &[0.1, -0.1, 0.0, 0.0]);
    assert!(regret_value(&rep, &a, &[a.clone(), worse]).unwrap().abs() < 1e-12);
    let b = shifted(&a, &[-0.1, 0.1, 0.0, 0.0]);
    let r = regret_value(&rep, &a, &[a.clone(), b.clone()]).unwrap();
    assert!((r + 0.1).abs() < 1e-12, "{r}");
    assert!((r - regret_by_hull_scan(&rep, &a, &[a.clone(), b], 10_000)).abs() < 1e-12);
    assert!(matches!(regret_value(&rep, &a, &[]), Err(Error::Domain(_))));
}

#[test]
fn oracle_choice_examples() {
    let rep = small();
    let a = uniform4();
    // Unforced menus reveal the material ranking.
    let up = shifted(&a, &[-0.1, 0.1, 0.0, 0.0]);
    assert_eq!(oracle_choice(&rep, &[a.clone(), up.clone()], &[a.clone(), up.clone()]).unwrap(), vec![1]);
    // Dominance under every extreme and under u.
    let down = shifted(&a, &[0.1, -0.1, 0.0, 0.0]);
    let x = lot(&[0.0, 0.0, 0.0, 1.0]);
    let menu = [a.clone(), down.clone(), x];
    assert_eq!(oracle_choice(&rep, &[a.clone(), down.clone()], &menu).unwrap(), vec![0]);
    // Mismatched marginals and non-subset menus are rejected.
    let other = lot(&[0.5, 0.2, 0.2, 0.1]);
    assert!(matches!(oracle_choice(&rep, &[a.clone(), other.clone()], &[a.clone(), other]), Err(Error::Domain(_))));
    assert!(matches!(oracle_choice(&rep, &[a.clone(), up], &[a.clone()]), Err(Error::Domain(_))));
    // The oracle answers the same as the free function.
    let oracle = ChoiceOracle::new(rep.clone());
    assert_eq!(oracle.choose(&[a.clone(), down.clone()], &menu).unwrap(), vec![0]);
}

#[test]
fn adding_a_forgone_option_flips_the_choice() {
    let rep = small();
    let oracle = ChoiceOracle::new(rep.clone());
    let a = uniform4();
    let p = shifted(&a, &[-0.1, 0.1, 0.0, 0.0]);
    let cfg = ProbeConfig::default();
    let mut found = false;
    for eps in cfg_eps(&cfg) {
        let q = p.mix(&a, eps);
        if let MattersVerdict::Yes { x, b } = matters_for(&oracle, &q, &a, &cfg).unwrap() {
            // Direct evaluation of the two menus.
            let before = oracle_choice(&rep, &[a.clone(), b.clone()], &[a.clone(), b.clone(), x.clone()]).unwrap();
            let after = oracle_choice(&rep, &[a.clone(), b.clone()], &[a.clone(), b.clone(), x, q]).unwrap();
            assert!(before.contains(&0));
            assert!(!after.contains(&0));
            found = true;
            break;
        }
    }
    assert!(found);
}

fn cfg_eps(cfg: &ProbeConfig) -> Vec<f64> {
    (0..cfg.eps_levels).map(|i| 0.5f64.powi(i as i32)).collect()
}

#[test]
fn matters_for_examples() {
    let oracle = ChoiceOracle::new(small());
    let a = uniform4();
    let cfg = ProbeConfig::default();
    assert_eq!(matters_for(&oracle, &a, &a, &cfg).unwrap(), MattersVerdict::NoWithinBudget);
    let inside = shifted(&a, &[0.1, -0.1, 0.0, 0.0]);
    assert_eq!(matters_for(&oracle, &inside, &a, &cfg).unwrap(), MattersVerdict::NoWithinBudget);
    let corner = lot(&[1.0, 0.0, 0.0, 0.0]);
    assert!(matches!(matters_for(&oracle, &a, &corner, &cfg), Err(Error::Precondition(_))));
}

#[test]
fn inner_membership_examples() {
    let oracle = ChoiceOracle::new(small());
    let a = uniform4();
    let probe = MembershipMode::Probe(ProbeConfig::default());
    for mode in [MembershipMode::GroundTruth, probe] {
        assert!(inner_cone_membership(&oracle, &a, &a, mode).unwrap());
        assert!(inner_cone_membership(&oracle, &a, &shifted(&a, &[0.1, -0.1, 0.0, 0.0]), mode).unwrap());
        assert!(!inner_cone_membership(&oracle, &a, &shifted(&a, &[-0.1, 0.1, 0.0, 0.0]), mode).unwrap());
    }
}

#[test]
fn outer_probe_examples() {
    let rep = small();
    let oracle = ChoiceOracle::new(rep.clone());
    let a = uniform4();
    let cfg = ProbeConfig::default();
    assert!(outer_probe(&oracle, &a, &a, &cfg).unwrap());
    let dominant = shifted(&a, &[-0.1, 0.1, 0.0, 0.0]);
    assert!(!outer_probe(&oracle, &a, &dominant, &cfg).unwrap());
    let moved = lot(&[0.3, 0.3, 0.2, 0.2]);
    assert!(matches!(outer_probe(&oracle, &a, &moved, &cfg), Err(Error::Domain(_))));
    // Blends around the boundary match the dot-product oracle.
    let basis = rep.space().block_tangent_basis();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..200 {
        let p = shifted(&a, &random_direction(&mut rng, &basis, 0.1));
        let probe = outer_probe(&oracle, &a, &p, &ProbeConfig { seed: i, ..cfg }).unwrap();
        assert_eq!(probe, ground_truth_outer(&rep, &a, &p), "direction {i}");
    }
}

#[test]
fn material_preference_examples() {
    let rep = small();
    let oracle = ChoiceOracle::new(rep.clone());
    let a = uniform4();
    let pref = recover_material_preference(&oracle, &[a.clone(), a.clone()]).unwrap();
    assert!(pref.indifferent(0, 1));

    let basis = rep.space().block_tangent_basis();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let probes: Vec<Lottery> =
        (0..12)
        .map(|_| {
            let len = rng.random_range(0.01..0.2);
            shifted(&a, &random_direction(&mut rng, &basis, len))
        })
        .collect();
    let pref = recover_material_preference(&oracle, &probes).unwrap();
    let u = |p: &Lottery| dot(rep.u(), p.as_slice());
    for i in 0..probes.len() {
        for j in 0..probes.len() {
            assert_eq!(pref.weak[i][j], u(&probes[i]) >= u(&probes[j]) - 1e-10);
        }
    }
    for w in pref.order.windows(2) {
        assert!(u(&probes[w[0]]) >= u(&probes[w[1]]) - 1e-10);
    }

    // Mixtures sit strictly between strictly ranked probes.
    for (i, j) in [(0, 1), (2, 3), (4, 5), (6, 7)] {
        let (b, d) = if pref.strictly_prefers(i, j) { (i, j) } else { (j, i) };
        if !pref.strictly_prefers(b, d) {
            continue;
        }
        for lam in [0.1, 0.5, 0.9] {
            let mid = probes[b].mix(&probes[d], lam);
            let trio = recover_material_preference(&oracle, &[probes[b].clone(), mid, probes[d].clone()]).unwrap();
            assert!(trio.strictly_prefers(0, 1) && trio.strictly_prefers(1, 2));
        }
    }
    let moved = lot(&[0.3, 0.3, 0.2, 0.2]);
    assert!(recover_material_preference(&oracle, &[a, moved]).is_err());
}

fn truth_normals(rep: &Representation) -> Vec<Vec<f64>> {
    rep.extremes().iter().map(|e| unit(&rep.space().project_tangent(e))).collect()
}

fn max_normal_error(rep: &Representation, normals: &[Vec<f64>]) -> f64 {
    truth_normals(rep)
        .iter()
        .map(|t| normals.iter().map(|n| angle(t, n)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

#[test]
fn cone_recovery_on_a_segment() {
    let rep = small();
    let oracle = ChoiceOracle::new(rep.clone());
    let cfg = ConeConfig { samples: 2000, ..ConeConfig::default() };
    let cone = recover_rationale_cone(&oracle, &uniform4(), &cfg).unwrap();
    assert_eq!(cone.normals.len(), 2);
    assert!(max_normal_error(&rep, &cone.normals) < 1e-2);
    // Up to per-extreme constants, the normals point along the extremes.
    let fit = affine_alignment(rep.extremes(), &cone.normals).unwrap();
    assert!(fit.max_angle < 1e-2, "{fit:?}");
}

#[test]
fn cone_recovery_is_scale_invariant() {
    let rep = random_regular_representation(4, 3).unwrap().into_inner();
    let scaled = rep.transformed(3.5, 0.0, &[0.0; 3]).unwrap();
    let a = Lottery::uniform(6);
    let cfg = ConeConfig::default();
    let c1 = recover_rationale_cone(&ChoiceOracle::new(rep.clone()), &a, &cfg).unwrap();
    let c2 = recover_rationale_cone(&ChoiceOracle::new(scaled), &a, &cfg).unwrap();
    assert_eq!(c1.normals.len(), c2.normals.len());
    for (x, y) in c1.normals.iter().zip(&c2.normals) {
        assert!(angle(x, y) < 1e-6);
    }
    assert!(max_normal_error(&rep, &c1.normals) < 1e-2);
}

#[test]
fn cone_recovery_needs_a_nontrivial_cone() {
    let space = OutcomeSpace::with_sizes(&[2, 2]).unwrap();
    let u = vec![0.0, 1.0, 0.5, 1.0];
    let rep = Representation::new(space, 0.5, u.clone(), vec![u]).unwrap();
    let oracle = ChoiceOracle::new(rep);
    let err = recover_rationale_cone(&oracle, &uniform4(), &ConeConfig { samples: 100, ..ConeConfig::default() });
    assert!(matches!(err, Err(Error::UnderDetermined(_))));
}

#[test]
fn affine_equivalence_examples() {
    let rep = small();
    let twice = rep.transformed(2.0, 0.7, &[1.0, -3.0]).unwrap();
    assert!(verify_affine_equivalence(&rep, &twice));
    assert!(!verify_affine_equivalence(&rep, &rep.with_gamma(0.4).unwrap()));
    let mut ext = rep.extremes().to_vec();
    ext[1][2] += 0.3;
    let bent = Representation::new(rep.space().clone(), rep.gamma(), rep.u().to_vec(), ext).unwrap();
    assert!(!verify_affine_equivalence(&rep, &bent));
    // Reordered extremes still match.
    let mut swapped = rep.extremes().to_vec();
    swapped.swap(0, 1);
    let swapped = Representation::new(rep.space().clone(), rep.gamma(), rep.u().to_vec(), swapped).unwrap();
    assert!(verify_affine_equivalence(&rep, &swapped));
    // A negative scale is not allowed.
    let flipped = rep.transformed(1.0, 0.0, &[0.0, 0.0]).unwrap();
    let neg = Representation::new(
        rep.space().clone(),
        rep.gamma(),
        flipped.u().iter().map(|x| -x).collect(),
        flipped.extremes().iter().map(|e| e.iter().map(|x| -x).collect()).collect(),
    )
    .unwrap();
    assert!(!verify_affine_equivalence(&rep, &neg));
}

#[test]
fn equivalent_representations_generate_the_same_choices() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for seed in 0..5u64 {
        let rep = random_regular_representation(seed, 3).unwrap().into_inner();
        let other = rep.transformed(0.3 + seed as f64, -1.0, &[2.0, 0.5, -4.0]).unwrap();
        assert!(verify_affine_equivalence(&rep, &other));
        let a = Lottery::uniform(6);
        let basis = rep.space().block_tangent_basis();
        for _ in 0..300 {
            let b = shifted(&a, &random_direction(&mut rng, &basis, 0.08));
            let a1 = vec![a.clone(), b.clone(), lot(&random_lottery(&mut rng, 6)), lot(&random_lottery(&mut rng, 6))];
            let a2 = [a.clone(), b];
            assert_eq!(oracle_choice(&rep, &a2, &a1).unwrap(), oracle_choice(&other, &a2, &a1).unwrap());
        }
    }
}

#[test]
fn gamma_is_recovered_on_the_small_instance() {
    for (gamma, tol) in [(0.5, 0.01), (0.25, 0.01)] {
        let rep = small().with_gamma(gamma).unwrap();
        let oracle = ChoiceOracle::new(rep.clone());
        let rec = recover_representation(&oracle, &uniform4(), &ConeConfig::default(), &GammaConfig::default()).unwrap();
        assert!((rec.gamma.gamma - gamma).abs() <= tol, "gamma {gamma}: {:?}", rec.gamma.gamma);
        assert_eq!(rec.gamma.disagreements, 0);
        // The rebuilt extremes match the true ones up to scale and constants.
        let fit = affine_alignment(rep.extremes(), rec.representation.extremes()).unwrap();
        assert!(fit.max_angle < 1e-2 && fit.relative_residual < 1e-2, "{fit:?}");
        // The material direction is the marginal-preserving part of u.
        let u1 = rep.space().project_block_tangent(rep.u());
        assert!(angle(&u1, &rec.material) < 1e-6);
    }
}

#[test]
fn outer_probe_matches_ground_truth_with_four_extremes() {
    let rep = random_regular_representation(2, 4).unwrap().into_inner();
    let oracle = ChoiceOracle::new(rep.clone());
    let a = Lottery::uniform(6);
    let basis = rep.space().block_tangent_basis();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1500 {
        let p = shifted(&a, &random_direction(&mut rng, &basis, 0.5 * a.min_entry()));
        let probe = outer_probe(&oracle, &a, &p, &ProbeConfig::default()).unwrap();
        assert_eq!(probe, outer_ground_truth(&oracle, &a, &p), "{:?}", p.as_slice());
    }
}

#[test]
fn gamma_is_recovered_with_thin_facets() {
    // Representations with four extremes whose outer cones have facets that random
    // boundary directions rarely reach.
    for seed in [2u64, 14] {
        let rep = random_regular_representation(seed, 4).unwrap().into_inner();
        let oracle = ChoiceOracle::new(rep.clone());
        let cone = ConeConfig { seed, ..ConeConfig::default() };
        let gamma = GammaConfig { seed, ..GammaConfig::default() };
        let rec = recover_representation(&oracle, &Lottery::uniform(6), &cone, &gamma).unwrap();
        assert!((rec.gamma.gamma - rep.gamma()).abs() <= 1e-2, "seed {seed}: {} vs {}", rec.gamma.gamma, rep.gamma());
    }
}

#[test]
fn refinement_recovers_facets_missed_by_the_first_fit() {
    // (representation seed, search seed) pairs where the first fit finds three of four facets.
    for (rep_seed, seed) in [(14u64, 2u64), (17, 2), (8, 7)] {
        let rep = random_regular_representation(rep_seed, 4).unwrap().into_inner();
        let oracle = ChoiceOracle::new(rep.clone());
        let a = Lottery::uniform(6);
        let unrefined = ConeConfig { seed, refine_rounds: 0, ..ConeConfig::default() };
        assert_eq!(recover_rationale_cone(&oracle, &a, &unrefined).unwrap().normals.len(), 3);
        let cone = recover_rationale_cone(&oracle, &a, &ConeConfig { seed, ..ConeConfig::default() }).unwrap();
        assert_eq!(cone.normals.len(), 4, "representation {rep_seed}");
        for e in rep.extremes() {
            let t = unit(&rep.space().project_tangent(e));
            let best = cone.normals.iter().map(|n| angle(&t, n)).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-6, "representation {rep_seed}: {best}");
        }
    }
}

#[test]
fn gamma_estimate_is_precise_when_the_battery_is_flat() {
    // The menu battery leaves a wide band of equally good weights here; the facet ratios
    // pin the weight down far more tightly.
    let rep = random_regular_representation(0, 2).unwrap().into_inner();
    let oracle = ChoiceOracle::new(rep.clone());
    for seed in 1..4u64 {
        let cone = ConeConfig { seed, ..ConeConfig::default() };
        let gamma = GammaConfig { seed, ..GammaConfig::default() };
        let rec = recover_representation(&oracle, &Lottery::uniform(6), &cone, &gamma).unwrap();
        assert!((rec.gamma.gamma - rep.gamma()).abs() <= 1e-4, "seed {seed}: {} vs {}", rec.gamma.gamma, rep.gamma());
    }
}

#[test]
fn gamma_is_unidentified_without_rationale_variety() {
    let space = OutcomeSpace::with_sizes(&[2, 2]).unwrap();
    let u = vec![0.0, 1.0, 0.5, 1.0];
    let rep = Representation::new(space.clone(), 0.5, u.clone(), vec![u.clone()]).unwrap();
    let oracle = ChoiceOracle::new(rep);
    let a = uniform4();
    let material = recover_material_direction(&oracle, &a).unwrap();
    // The only cone such an agent exhibits is the material half-space.
    let cone = RecoveredCone { normals: vec![unit(&space.project_tangent(&u))], boundary: vec![], members: 0, non_members: 0 };
    let est = estimate_gamma(&oracle, &a, &material, &cone, &GammaConfig::default());
    assert!(matches!(est, Err(Error::Unidentified(_))), "{est:?}");
}

#[test]
fn probes_are_sound_on_random_representations() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..6u64 {
        let rep = random_regular_representation(seed, 2 + seed as usize % 3).unwrap().into_inner();
        let oracle = ChoiceOracle::new(rep.clone());
        let a = Lottery::uniform(6);
        let basis = rep.space().tangent_basis();
        let mut members = 0;
        while members < 25 {
            let p = shifted(&a, &random_direction(&mut rng, &basis, 0.08));
            if !ground_truth_inner(&rep, &a, &p) {
                continue;
            }
            members += 1;
            let cfg = ProbeConfig { random_budget: 64, seed: members, ..ProbeConfig::default() };
            assert!(inner_cone_membership(&oracle, &a, &p, MembershipMode::Probe(cfg)).unwrap());
        }
    }
}

#[test]
fn cone_laws_hold_on_random_representations() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..40u64 {
        let rep = random_regular_representation(seed, 2 + seed as usize % 3).unwrap().into_inner();
        let a = lot(&random_lottery(&mut rng, 6));
        // Vertex law: `a` is in both closed cones and never strictly below itself.
        assert!(ground_truth_inner(&rep, &a, &a));
        assert!(ground_truth_outer(&rep, &a, &a));
        let strictly_below = |p: &Lottery| rep.extremes().iter().all(|e| dot(e, a.as_slice()) - dot(e, p.as_slice()) > 0.0);
        assert!(!strictly_below(&a));
        // Nonemptiness of the open cone: some profile mixture loses under every extreme,
        // which the enumerated game over profiles and extremes certifies by a positive value.
        let m: Vec<f64> = (0..6)
            .flat_map(|z| rep.extremes().iter().map(move |e| (z, e)))
            .map(|(z, e)| dot(e, a.as_slice()) - e[z])
            .collect();
        assert!(game_value_by_enumeration(&m, 6, rep.extremes().len()) > 0.0, "seed {seed}");
        // Convexity of the closed inner cone on sampled member pairs.
        let basis = rep.space().tangent_basis();
        let members: Vec<Lottery> = (0..400)
            .filter_map(|_| {
                let d = random_direction(&mut rng, &basis, 0.5 * a.min_entry());
                let p = shifted(&a, &d);
                ground_truth_inner(&rep, &a, &p).then_some(p)
            })
            .collect();
        for w in members.windows(2) {
            assert!(ground_truth_inner(&rep, &a, &w[0].mix(&w[1], rng.random_range(0.0..1.0))));
        }
    }
}

#[test]
fn regularity_checks_reject_bad_representations() {
    let space = OutcomeSpace::with_sizes(&[2, 2]).unwrap();
    let v1 = vec![0.0, 1.0, 0.0, 2.0];
    let v2 = vec![0.0, 1.0, 1.0, 0.0];
    let mid = vec![0.0, 1.0, 0.5, 1.0];
    let make = |g: f64, u: Vec<f64>, ext: Vec<Vec<f64>>| {
        RegularRepresentation::new(Representation::new(space.clone(), g, u, ext).unwrap())
    };
    assert!(make(0.5, mid.clone(), vec![v1.clone(), v2.clone()]).is_ok());
    assert!(make(0.0, mid.clone(), vec![v1.clone(), v2.clone()]).is_err());
    assert!(make(0.5, mid.clone(), vec![mid.clone()]).is_err());
    // u at an endpoint is not in the relative interior.
    assert!(make(0.5, v1.clone(), vec![v1.clone(), v2.clone()]).is_err());
    // A block-constant shift of a rescaled extreme is a free distortion.
    let distorted: Vec<f64> = v1.iter().enumerate().map(|(i, x)| 2.0 * x + if i < 2 { 1.0 } else { -1.0 }).collect();
    let u: Vec<f64> = v1.iter().zip(&distorted).map(|(x, y)| 0.5 * (x + y)).collect();
    assert!(make(0.5, u, vec![v1, distorted]).is_err());
    assert!(Lottery::new(vec![0.5, 0.6]).is_err());
    assert!(Representation::new(space, 1.0, mid.clone(), vec![mid]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unforced_binary_choice_follows_material_utility(seed in 0u64..10_000, scale in 0.001f64..0.2) {
        let rep = random_regular_representation(seed % 50, 2 + (seed % 3) as usize).unwrap().into_inner();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Lottery::uniform(6);
        let b = shifted(&a, &random_direction(&mut rng, &rep.space().block_tangent_basis(), scale));
        let c = oracle_choice(&rep, &[a.clone(), b.clone()], &[a.clone(), b.clone()]).unwrap();
        let gap = dot(rep.u(), b.as_slice()) - dot(rep.u(), a.as_slice());
        prop_assert_eq!(c, if gap > 0.0 { vec![1] } else { vec![0] });
    }

    #[test]
    fn regret_is_never_positive_when_a_is_forgone(seed in 0u64..10_000) {
        let rep = random_regular_representation(seed % 50, 3).unwrap().into_inner();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = lot(&random_lottery(&mut rng, 6));
        let b = lot(&random_lottery(&mut rng, 6));
        let r = regret_value(&rep, &a, &[a.clone(), b]).unwrap();
        prop_assert!(r <= 1e-12);
    }
}
