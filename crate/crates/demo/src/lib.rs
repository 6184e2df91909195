//! Browser bindings. Every function takes and returns JSON strings so the
//! page can stay plain JavaScript.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use hitset_core::dataset::{generate_instance, trajectory_for, DEFAULT_B, DEFAULT_COVER_EPSILON};
use hitset_core::engine::{dual_variables, run_general, verify_dual_feasibility, AlgoConfig};
use hitset_core::forge::{derive_seed, Family};
use hitset_core::neural::verify_replication;
use hitset_core::oracle::solve_optimal;
use hitset_core::{HittingSetInstance, Task};

/// Instances up to this many elements are solved exactly for the ratio display.
pub const EXACT_LIMIT: usize = 40;
const EXACT_BUDGET_MS: u64 = 2_000;

fn parse_instance(json: &str) -> Result<HittingSetInstance, String> {
    serde_json::from_str(json).map_err(|e| format!("bad instance: {e}"))
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Draws an instance; retries a few seeds for families that can reject.
pub fn generate(task: &str, family: &str, size: usize, seed: u64) -> Result<String, String> {
    let task: Task = task.parse().map_err(err)?;
    let family: Family = family.parse().map_err(err)?;
    for attempt in 0..64 {
        let s = derive_seed(seed, attempt);
        if let Some(inst) = generate_instance(task, family, size, s, DEFAULT_B).map_err(err)? {
            let inst = inst.with_id(format!("{task}-{}-{size}-{seed}", family.as_str()));
            return serde_json::to_string(&inst).map_err(err);
        }
    }
    Err(format!("no {} graph with {size} nodes found", family.as_str()))
}

/// Runs an algorithm and reports the trajectory, the dual solution and,
/// for small instances, the optimum.
///
/// `algo` is `pd`, `pd-uniform` or `cover`.
pub fn trajectory(instance_json: &str, algo: &str, epsilon: f64) -> Result<String, String> {
    let inst = parse_instance(instance_json)?;
    let traj = match algo {
        "pd" | "pd-uniform" => run_general(
            &inst,
            &AlgoConfig {
                uniform: algo == "pd-uniform",
                epsilon,
                ..AlgoConfig::default()
            },
        )
        .map_err(err)?,
        "cover" if inst.task() == Task::Mhs => {
            return Err("the cover algorithm needs a vertex or set cover instance".into())
        }
        "cover" => trajectory_for(&inst, epsilon).map_err(err)?,
        other => return Err(format!("unknown algorithm {other}")),
    };
    let y = dual_variables(&traj, &inst).map_err(err)?;
    let dual = verify_dual_feasibility(&inst, &y, 1e-9).map_err(err)?;
    let optimal = if inst.n_elements() <= EXACT_LIMIT {
        let opt = solve_optimal(&inst, EXACT_BUDGET_MS).map_err(err)?;
        json!({ "chosen": opt.chosen, "weight": opt.weight, "status": opt.status })
    } else {
        Value::Null
    };
    let out = json!({
        "trajectory": traj,
        "dual": y,
        "dual_report": dual,
        "optimal": optimal,
        "max_set_size": inst.max_set_size(),
    });
    Ok(out.to_string())
}

/// Compares the analytic network against the algorithm step by step.
pub fn replication(instance_json: &str, hidden_dim: usize) -> Result<String, String> {
    let inst = parse_instance(instance_json)?;
    let report = verify_replication(&inst, hidden_dim, 1e-6).map_err(err)?;
    serde_json::to_string(&report).map_err(err)
}

#[wasm_bindgen(js_name = generateInstance)]
pub fn generate_instance_js(task: &str, family: &str, size: usize, seed: u32) -> Result<String, JsError> {
    generate(task, family, size, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = runTrajectory)]
pub fn run_trajectory_js(instance_json: &str, algo: &str, epsilon: f64) -> Result<String, JsError> {
    trajectory(instance_json, algo, epsilon).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = verifyReplication)]
pub fn verify_replication_js(instance_json: &str, hidden_dim: usize) -> Result<String, JsError> {
    replication(instance_json, hidden_dim).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = defaultCoverEpsilon)]
pub fn default_cover_epsilon() -> f64 {
    DEFAULT_COVER_EPSILON
}
