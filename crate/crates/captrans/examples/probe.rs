use captrans::instance::{appendix_example_scaled, ExampleScale};
use captrans::model::{build, Variant};
use captrans::solver::{solve_lp, solve_milp, LpStatus, SolverConfig};

fn main() {
    let reduced = appendix_example_scaled(ExampleScale {
        simulated_periods: 6, reported_periods: 4, candidates_per_technology: Some(3),
    });
    let model = build(&reduced, Variant::Spwt);
    let lp = solve_lp(&model);
    println!("spwt root LP: {:?} obj {:.2} iters {} infeas {:.3e}",
        lp.status, lp.objective, lp.iterations, lp.infeasibility);
    if lp.status == LpStatus::Optimal {
        let cfg = SolverConfig { gap: 1e-3, time_limit: 600.0, ..Default::default() };
        let res = solve_milp(&model, &cfg).unwrap();
        println!("spwt MILP: {:?} obj {:?} gap {:?} nodes {}", res.status, res.objective, res.gap, res.nodes);
    }
    let taxed = build(&reduced, Variant::Spt);
    let cfg = SolverConfig { gap: 1e-3, time_limit: 600.0, ..Default::default() };
    let res = solve_milp(&taxed, &cfg).unwrap();
    println!("spt MILP: {:?} obj {:?} gap {:?} nodes {}", res.status, res.objective, res.gap, res.nodes);
}
