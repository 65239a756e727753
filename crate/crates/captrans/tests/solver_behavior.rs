//! Solver behavior on generated instances: oracle agreement, warm starts,
//! interchange files, and the solver-level invariants.

mod common;

use captrans::model::{build, Variant};
use captrans::solver::{
    brute_force_oracle, export_lp_file, import_external_solution, parse_lp_file, solve_lp,
    solve_milp, verify_lp_round_trip, write_solution_file, LpStatus, MilpStatus, SolverConfig,
    DEFAULT_BINARY_LIMIT,
};
use common::tiny_instance;

fn quick_config() -> SolverConfig {
    SolverConfig {
        gap: 1e-9,
        time_limit: 120.0,
        ..SolverConfig::default()
    }
}

#[test]
fn oracle_and_search_agree_on_a_seed_batch() {
    let mut feasible = 0;
    let mut infeasible = 0;
    for seed in 0..12 {
        let instance = tiny_instance(seed);
        let model = build(&instance, Variant::Spt);
        let oracle = brute_force_oracle(&model, DEFAULT_BINARY_LIMIT)
            .unwrap_or_else(|e| panic!("seed {seed}: oracle failed: {e}"));
        let search = solve_milp(&model, &quick_config()).unwrap();
        match oracle.status {
            MilpStatus::Optimal => {
                feasible += 1;
                let reference = oracle.objective.unwrap();
                let found = search
                    .objective
                    .unwrap_or_else(|| panic!("seed {seed}: search found nothing, oracle {reference}"));
                let rel = (found - reference).abs() / reference.abs().max(1.0);
                assert!(
                    rel <= 1e-6,
                    "seed {seed}: search {found} vs oracle {reference} (rel {rel:.2e})"
                );
            }
            MilpStatus::Infeasible => {
                infeasible += 1;
                assert_eq!(
                    search.status,
                    MilpStatus::Infeasible,
                    "seed {seed}: oracle infeasible, search {:?}",
                    search.status
                );
            }
            other => panic!("seed {seed}: unexpected oracle status {other:?}"),
        }
    }
    assert!(feasible >= 6, "generator produced too few feasible cases");
    println!("oracle agreement: {feasible} feasible, {infeasible} infeasible");
}

#[test]
fn lp_relaxation_bounds_the_integer_optimum() {
    for seed in [1, 3, 5] {
        let instance = tiny_instance(seed);
        let model = build(&instance, Variant::Spt);
        let lp = solve_lp(&model);
        if lp.status != LpStatus::Optimal {
            continue;
        }
        if let Ok(oracle) = brute_force_oracle(&model, DEFAULT_BINARY_LIMIT) {
            if let Some(milp_obj) = oracle.objective {
                assert!(
                    lp.objective <= milp_obj + 1e-6 * milp_obj.abs().max(1.0),
                    "seed {seed}: LP {} above MILP {milp_obj}",
                    lp.objective
                );
            }
        }
    }
}

#[test]
fn untaxed_objective_never_exceeds_taxed() {
    for seed in 0..8 {
        let instance = tiny_instance(seed);
        let taxed = solve_milp(&build(&instance, Variant::Spt), &quick_config()).unwrap();
        let untaxed = solve_milp(&build(&instance, Variant::Spwt), &quick_config()).unwrap();
        match (untaxed.objective, taxed.objective) {
            (Some(u), Some(t)) => {
                assert!(u <= t + 1e-9, "seed {seed}: untaxed {u} > taxed {t}");
            }
            (None, None) => {}
            other => panic!("seed {seed}: variants disagree on feasibility: {other:?}"),
        }
    }
}

#[test]
fn solution_files_round_trip_through_import() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..6 {
        let instance = tiny_instance(seed);
        let model = build(&instance, Variant::Spt);
        let result = solve_milp(&model, &quick_config()).unwrap();
        let Some(plan) = result.plan else { continue };
        let path = dir.path().join(format!("plan-{seed}.sol"));
        write_solution_file(&model, &plan.raw, plan.objective, &path).unwrap();
        let imported = import_external_solution(&path, &model).unwrap();
        assert!(
            (imported.objective - plan.objective).abs()
                <= 1e-6 * plan.objective.abs().max(1.0),
            "seed {seed}: objective drifted through the file"
        );
    }
}

#[test]
fn truncated_and_fractional_solution_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (model, plan) = (0..10)
        .find_map(|seed| {
            let instance = tiny_instance(seed);
            let model = build(&instance, Variant::Spt);
            let result = solve_milp(&model, &quick_config()).unwrap();
            result.plan.map(|plan| (model, plan))
        })
        .expect("some tiny seed is feasible");
    let path = dir.path().join("plan.sol");
    write_solution_file(&model, &plan.raw, plan.objective, &path).unwrap();

    // Truncate mid-line.
    let text = std::fs::read_to_string(&path).unwrap();
    let cut = text.len() - 5;
    let broken = dir.path().join("broken.sol");
    std::fs::write(&broken, &text[..cut]).unwrap();
    assert!(import_external_solution(&broken, &model).is_err());

    // Make one binary fractional.
    let fractional = dir.path().join("fractional.sol");
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let target = lines
        .iter()
        .position(|l| {
            l.starts_with("X_")
                && l.split_whitespace()
                    .nth(1)
                    .and_then(|v| v.parse::<f64>().ok())
                    .is_some_and(|v| v > 0.9)
        })
        .expect("some transition is active");
    let name = lines[target].split_whitespace().next().unwrap().to_string();
    lines[target] = format!("{name} 0.5");
    std::fs::write(&fractional, lines.join("\n")).unwrap();
    let err = import_external_solution(&fractional, &model).unwrap_err();
    assert!(err.to_string().contains("fractional"), "{err}");
}

#[test]
fn lp_export_round_trips_and_parses() {
    let dir = tempfile::tempdir().unwrap();
    let instance = tiny_instance(2);
    let model = build(&instance, Variant::Spt);
    let path = dir.path().join("model.lp");
    verify_lp_round_trip(&model, &path).unwrap();
    let parsed = parse_lp_file(&path).unwrap();
    assert_eq!(parsed.rows.len(), model.num_rows());
    assert!(parsed.minimize);
    assert_eq!(parsed.binaries.len(), model.binary_count());
}

#[test]
fn export_detects_name_collisions() {
    use captrans::instance::{Instance, Machine, MachinePool};
    // Two machine ids that sanitize to the same LP name.
    let base = tiny_instance(4);
    let mut machines: Vec<Machine> = base.machines.clone();
    if machines.len() == 1 {
        machines.push(Machine {
            id: "m2".into(),
            technology: machines[0].technology.clone(),
            ..machines[0].clone()
        });
    }
    machines[0].id = "m-1".into();
    machines[1].id = "m_1".into();
    machines[1].technology = machines[0].technology.clone();
    let mut items = base.items.clone();
    for item in &mut items {
        item.production_rate = vec![item.production_rate[0].max(1.0); 2];
        item.production_emission = vec![item.production_emission[0]; 2];
    }
    let mut costs = base.costs.clone();
    let widen = |v: &mut Vec<f64>| {
        let first = v[0];
        *v = vec![first; 2];
    };
    widen(&mut costs.investment);
    widen(&mut costs.labor);
    widen(&mut costs.hiring);
    widen(&mut costs.firing);
    widen(&mut costs.salvage_rate);
    costs.maintenance = vec![costs.maintenance[0].clone(); 2];
    for row in &mut costs.production {
        let first = row[0];
        *row = vec![first; 2];
    }
    let instance = Instance::new(
        base.horizon.clone(),
        machines,
        items,
        vec![base.technologies[0].id.clone()],
        costs,
        base.options,
    )
    .unwrap();
    let model = build(&instance, Variant::Spt);
    let dir = tempfile::tempdir().unwrap();
    let err = export_lp_file(&model, dir.path().join("clash.lp")).unwrap_err();
    assert!(err.to_string().contains("collision"), "{err}");
}

#[test]
fn oracle_rejects_oversized_models() {
    let instance = tiny_instance(0);
    let model = build(&instance, Variant::Spt);
    let err = brute_force_oracle(&model, 1).unwrap_err();
    assert!(err.to_string().contains("limit"), "{err}");
}

#[test]
fn search_is_deterministic() {
    let instance = tiny_instance(3);
    let model = build(&instance, Variant::Spt);
    let config = quick_config();
    let a = solve_milp(&model, &config).unwrap();
    let b = solve_milp(&model, &config).unwrap();
    assert_eq!(a.nodes, b.nodes);
    assert_eq!(a.objective, b.objective);
    match (a.plan, b.plan) {
        (Some(pa), Some(pb)) => assert_eq!(pa.raw, pb.raw),
        (None, None) => {}
        _ => panic!("determinism violated"),
    }
}
