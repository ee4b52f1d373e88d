mod common;

use common::{brute_force_optimum, oracle_instance, TOL};
use svcauction_core::{check_feasibility, plan_throughput, solve_p1_exact, solve_p1_greedy, SizeLimits};

#[test]
fn exact_matches_brute_force() {
    for seed in 0..100 {
        let inst = oracle_instance(seed);
        let plan = solve_p1_exact(&inst, SizeLimits::default()).unwrap();
        assert!(check_feasibility(&inst, &plan).unwrap().pass, "seed {seed}");
        let exact = plan_throughput(&plan, &inst);
        let oracle = brute_force_optimum(&inst);
        assert!(
            (exact - oracle).abs() <= TOL,
            "seed {seed}: exact {exact} oracle {oracle}"
        );
    }
}

#[test]
fn exact_dominates_greedy() {
    for seed in 0..100 {
        let inst = oracle_instance(seed);
        let exact = plan_throughput(&solve_p1_exact(&inst, SizeLimits::default()).unwrap(), &inst);
        let greedy = plan_throughput(&solve_p1_greedy(&inst), &inst);
        assert!(
            exact + TOL >= greedy,
            "seed {seed}: exact {exact} greedy {greedy}"
        );
    }
}
