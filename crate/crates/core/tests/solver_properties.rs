mod common;

use common::{default_problem, random_oracle_instance};
use fleetplan::rp_model::{build_rp_with, BuildOptions, ConstraintFamily, RpProblem};
use fleetplan::solver::{
    brute_force_oracle, solve_exact, solve_heuristic, validate, ExactLimits, PlanSolution, SolveStatus,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn both_agree(p: &RpProblem) -> (PlanSolution, PlanSolution) {
    let exact = solve_exact(p, &ExactLimits::default());
    let oracle = brute_force_oracle(p).unwrap();
    assert_eq!(
        exact.status.has_plan(),
        oracle.status.has_plan(),
        "feasibility differs: exact {:?}, oracle {:?}",
        exact.status,
        oracle.status
    );
    if oracle.status.has_plan() {
        assert_eq!(exact.status, SolveStatus::Optimal);
        assert_eq!(exact.objective, oracle.objective);
    }
    (exact, oracle)
}

#[test]
fn exact_matches_oracle_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut feasible = 0;
    for _ in 0..150 {
        let p = random_oracle_instance(&mut rng);
        let (exact, oracle) = both_agree(&p);
        if oracle.status.has_plan() {
            feasible += 1;
            assert!(validate(&p, &exact).is_ok(), "{:?}", validate(&p, &exact));
            assert!(validate(&p, &oracle).is_ok());
        }
        let greedy = solve_heuristic(&p, 3);
        if greedy.status.has_plan() {
            assert!(validate(&p, &greedy).is_ok(), "{:?}", validate(&p, &greedy));
            assert!(greedy.objective >= oracle.objective);
        }
    }
    // the suite must exercise the optimizing path, not just infeasibility
    assert!(feasible >= 50, "only {feasible} feasible instances");
}

#[test]
fn solver_plans_satisfy_the_linear_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..60 {
        let p = random_oracle_instance(&mut rng);
        let sol = solve_exact(&p, &ExactLimits::default());
        if !sol.status.has_plan() {
            continue;
        }
        let inst = build_rp_with(p.clone(), BuildOptions::default()).unwrap();
        let x = inst.assignment(&sol.path_indices(&p), &sol.d, &sol.battery);
        let bad = inst.model.violations(&x, 1e-6);
        assert!(bad.is_empty(), "{bad:?}");
        assert_eq!(inst.model.objective_value(&x), sol.objective as f64);
        checked += 1;
    }
    assert!(checked > 10);
}

/// Without `d[t+1] <= d[t]` the cheapest feasible flags for any plan still
/// sum to at least the oracle optimum, and the optimal plan stays feasible.
#[test]
fn canonical_row_does_not_change_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..40 {
        let p = random_oracle_instance(&mut rng);
        let oracle = brute_force_oracle(&p).unwrap();
        if !oracle.status.has_plan() {
            continue;
        }
        let loose = build_rp_with(p.clone(), BuildOptions { canonicalize: false }).unwrap();
        assert!(loose.model.rows.iter().all(|r| r.family != ConstraintFamily::Canonical));
        let paths = oracle.path_indices(&p);
        let x = loose.assignment(&paths, &oracle.d, &oracle.battery);
        assert!(loose.model.violations(&x, 1e-6).is_empty());

        // clear flags one at a time while the loose model allows it
        let mut d = vec![true; p.horizon];
        for t in 0..p.horizon {
            d[t] = false;
            let x = loose.assignment(&paths, &d, &oracle.battery);
            if !loose.model.violations(&x, 1e-6).is_empty() {
                d[t] = true;
            }
        }
        let cheapest = d.iter().filter(|&&f| f).count();
        assert_eq!(cheapest, oracle.objective);
    }
}

#[test]
fn mutated_solutions_are_rejected() {
    let p = default_problem(3, 3, 1, 1.0, 9);
    let good = solve_exact(&p, &ExactLimits::default());
    assert!(validate(&p, &good).is_ok());

    let mut teleport = good.clone();
    teleport.paths[0][3] = teleport.paths[0][1];
    teleport.paths[0][2] = fleetplan::terrain::Cell::new(2, 2);
    assert!(validate(&p, &teleport).cites(ConstraintFamily::Neighborhood));

    let mut battery = good.clone();
    battery.battery[0][4] += 1.0;
    assert!(validate(&p, &battery).cites(ConstraintFamily::BatteryUpdate));

    let mut short = good.clone();
    short.paths[0][8] = short.paths[0][7];
    assert!(validate(&p, &short).cites(ConstraintFamily::FinalCoverage));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn more_resources_never_hurt(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_oracle_instance(&mut rng);
        let base = solve_exact(&p, &ExactLimits::default());

        let mut richer = p.clone();
        for r in richer.robots.iter_mut() {
            r.battery_init_j = (r.battery_init_j * 2.0).min(richer.profile.battery_capacity_j);
        }
        let rich = solve_exact(&richer, &ExactLimits::default());
        if base.status.has_plan() {
            prop_assert!(rich.status.has_plan());
            prop_assert!(rich.objective <= base.objective);
        }

        if p.horizon < 5 {
            // every epoch drains the baseline, so the extra epoch is funded
            let mut longer = p.clone();
            longer.horizon += 1;
            let extra = longer.baseline_j();
            for r in longer.robots.iter_mut() {
                r.battery_init_j += extra;
            }
            let long = solve_exact(&longer, &ExactLimits::default());
            if base.status.has_plan() {
                prop_assert!(long.status.has_plan());
                prop_assert!(long.objective <= base.objective);
            }
        }
    }

    #[test]
    fn exact_output_is_reproducible(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_oracle_instance(&mut rng);
        let a = solve_exact(&p, &ExactLimits::default());
        let b = solve_exact(&p, &ExactLimits::default());
        prop_assert_eq!(a.to_json(), b.to_json());
    }
}
