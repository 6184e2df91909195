//! Dataset generation and replay.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::records::{write_records, DatasetRecord, Split, SCHEMA_VERSION};
use crate::engine::{run_cover_msc, run_cover_mvc, run_general, AlgoConfig, Trajectory};
use crate::forge::{
    derive_seed, gen_3con_planar, gen_ba, gen_ba_bipartite, gen_er, gen_lobster, gen_star,
    sample_weights, Family,
};
use crate::instance::{from_set_cover, from_vertex_cover, HittingSetInstance, Task};
use crate::numfmt::to_json_line;
use crate::oracle::{solve_optimal, DEFAULT_BUDGET_MS};
use crate::{Error, Result};

pub const DEFAULT_COVER_EPSILON: f64 = 0.1;
pub const DEFAULT_B: usize = 5;
pub const TRAIN_FRACTION: f64 = 0.9;
/// Most attachments per new node in Barabási–Albert graphs.
pub const BA_MAX_ATTACH: usize = 10;

/// Parameters of one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSpec {
    pub task: Task,
    pub family: Family,
    pub size: usize,
    pub count: usize,
    pub seed: u64,
    pub with_optimal: bool,
    /// Relaxation of the cover algorithms used for vertex and set cover.
    pub epsilon: f64,
    /// RHS degree of bipartite instances.
    pub b: usize,
    pub oracle_budget_ms: u64,
    /// Put every record in the test split instead of train/val.
    pub test: bool,
}

impl BuildSpec {
    pub fn new(task: Task, family: Family, size: usize, count: usize, seed: u64) -> Self {
        Self {
            task,
            family,
            size,
            count,
            seed,
            with_optimal: false,
            epsilon: DEFAULT_COVER_EPSILON,
            b: DEFAULT_B,
            oracle_budget_ms: DEFAULT_BUDGET_MS,
            test: false,
        }
    }

    fn split_of(&self, index: usize) -> Split {
        if self.test {
            Split::Test
        } else if index < (self.count as f64 * TRAIN_FRACTION).round() as usize {
            Split::Train
        } else {
            Split::Val
        }
    }

    fn stem(&self) -> String {
        format!("{}_{}_{}", self.task, self.family.as_str(), self.size)
    }
}

/// Draws one instance of `task` on a `family` graph with `size` nodes.
///
/// Vertex cover works on the plain graph families; set cover and hitting set
/// use the bipartite family, whose LHS nodes are the weighted elements and
/// whose RHS nodes are the universe items (set cover) or sets (hitting set).
/// Returns `None` when the family's rejection sampler gives up.
pub fn generate_instance(
    task: Task,
    family: Family,
    size: usize,
    seed: u64,
    b: usize,
) -> Result<Option<HittingSetInstance>> {
    let graph_seed = derive_seed(seed, 0);
    let weights = sample_weights(size, derive_seed(seed, 1));
    if (task == Task::Mvc) == (family == Family::BaBipartite) {
        return Err(Error::Unsupported(format!(
            "task {task} on family {}",
            family.as_str()
        )));
    }
    let instance = match task {
        Task::Mvc => {
            let graph = match family {
                Family::Ba => {
                    if size < 2 {
                        return Err(Error::InvalidConfig(format!(
                            "ba graphs need at least 2 nodes, got {size}"
                        )));
                    }
                    gen_ba(size, 1, BA_MAX_ATTACH.min(size - 1), graph_seed)?
                }
                Family::Er => gen_er(size, 0.2, 0.8, graph_seed)?,
                Family::Star => gen_star(size, graph_seed)?,
                Family::Lobster => gen_lobster(size, graph_seed)?,
                Family::TriconnPlanar => match gen_3con_planar(size, graph_seed)? {
                    Some(g) => g,
                    None => return Ok(None),
                },
                Family::BaBipartite => unreachable!(),
            };
            from_vertex_cover(size, &graph.edges, weights)?
        }
        Task::Msc => {
            let bip = gen_ba_bipartite(size, size, b, graph_seed)?;
            from_set_cover(size, &bip.lhs_adj(), weights)?
        }
        Task::Mhs => {
            let bip = gen_ba_bipartite(size, size, b, graph_seed)?;
            HittingSetInstance::new("mhs", Task::Mhs, weights, bip.rhs_adj)?
        }
    };
    Ok(Some(instance))
}

/// The algorithm whose trajectory is stored for `task`.
pub fn trajectory_for(instance: &HittingSetInstance, epsilon: f64) -> Result<Trajectory> {
    match instance.task() {
        Task::Mvc => run_cover_mvc(instance, epsilon),
        Task::Msc => run_cover_msc(instance, epsilon),
        Task::Mhs => run_general(instance, &AlgoConfig::uniform()),
    }
}

fn label(spec: &BuildSpec, instance: HittingSetInstance) -> Result<DatasetRecord> {
    let trajectory = trajectory_for(&instance, spec.epsilon)?;
    let optimal = if spec.with_optimal {
        Some(solve_optimal(&instance, spec.oracle_budget_ms)?)
    } else {
        None
    };
    Ok(DatasetRecord {
        schema: SCHEMA_VERSION,
        split: Split::Train,
        instance,
        trajectory,
        optimal,
    })
}

/// Builds `spec.count` records. Instances are drawn sequentially from seeds
/// derived from `spec.seed`; labelling runs in parallel when enabled.
pub fn build_records(spec: &BuildSpec) -> Result<Vec<DatasetRecord>> {
    let max_candidates = spec.count.saturating_mul(10).saturating_add(100);
    let mut instances = Vec::with_capacity(spec.count);
    let mut candidate = 0u64;
    while instances.len() < spec.count {
        if candidate as usize >= max_candidates {
            return Err(Error::Unsupported(format!(
                "only {} of {} {} graphs found after {max_candidates} attempts",
                instances.len(),
                spec.count,
                spec.family.as_str()
            )));
        }
        let instance_seed = derive_seed(spec.seed, candidate);
        candidate += 1;
        let Some(inst) =
            generate_instance(spec.task, spec.family, spec.size, instance_seed, spec.b)?
        else {
            continue;
        };
        let j = instances.len();
        let mut inst = inst
            .with_id(format!(
                "{}-{}-{}-s{}-{j:05}",
                spec.task,
                spec.family.as_str(),
                spec.size,
                spec.seed
            ))
            .with_meta("family", spec.family.as_str())
            .with_meta("size", spec.size)
            .with_meta("dataset_seed", spec.seed)
            .with_meta("instance_seed", instance_seed);
        if spec.family == Family::BaBipartite {
            inst = inst.with_meta("b", spec.b);
        }
        instances.push(inst);
    }

    #[cfg(feature = "parallel")]
    let labelled: Vec<Result<DatasetRecord>> = {
        use rayon::prelude::*;
        instances.into_par_iter().map(|i| label(spec, i)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let labelled: Vec<Result<DatasetRecord>> =
        instances.into_iter().map(|i| label(spec, i)).collect();

    labelled
        .into_iter()
        .enumerate()
        .map(|(j, rec)| {
            rec.map(|mut r| {
                r.split = spec.split_of(j);
                r
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub name: String,
    pub split: Split,
    pub records: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub params: BuildSpec,
    pub train_fraction: f64,
    pub files: Vec<ManifestFile>,
}

/// Writes one file per split plus `<stem>.manifest.json` into `dir`.
/// Returns the paths written, manifest last.
pub fn write_dataset(
    dir: impl AsRef<Path>,
    spec: &BuildSpec,
    records: &[DatasetRecord],
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    let mut files = Vec::new();
    for split in [Split::Train, Split::Val, Split::Test] {
        let part: Vec<&DatasetRecord> = records.iter().filter(|r| r.split == split).collect();
        if part.is_empty() {
            continue;
        }
        let mut bytes = Vec::new();
        write_records(&mut bytes, &part)?;
        let name = format!("{}_{}.jsonl", spec.stem(), split.as_str());
        let path = dir.join(&name);
        std::fs::write(&path, &bytes)?;
        files.push(ManifestFile {
            name,
            split,
            records: part.len(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        paths.push(path);
    }
    let manifest = Manifest {
        schema: SCHEMA_VERSION,
        params: spec.clone(),
        train_fraction: TRAIN_FRACTION,
        files,
    };
    let path = dir.join(format!("{}.manifest.json", spec.stem()));
    std::fs::write(&path, to_json_line(&manifest)? + "\n")?;
    paths.push(path);
    Ok(paths)
}

/// Outcome of re-running a stored record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub trajectory_matches: bool,
    pub optimal_consistent: bool,
    pub detail: Option<String>,
}

impl ReplayReport {
    pub fn ok(&self) -> bool {
        self.trajectory_matches && self.optimal_consistent
    }
}

const REPLAY_TOL: f64 = 1e-9;

fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= REPLAY_TOL)
}

/// Re-runs the stored algorithm configuration and compares every step.
/// A stored optimum must be feasible and no heavier than the algorithm.
pub fn replay_verify(record: &DatasetRecord) -> Result<ReplayReport> {
    let fresh = run_general(&record.instance, &record.trajectory.config)?;
    let stored = &record.trajectory;
    let mut detail = None;
    if fresh.steps.len() != stored.steps.len() {
        detail = Some(format!(
            "{} steps stored, {} on replay",
            stored.steps.len(),
            fresh.steps.len()
        ));
    } else if let Some(i) = fresh.steps.iter().zip(&stored.steps).position(|(a, b)| {
        a.x != b.x
            || !close(&a.r, &b.r)
            || !close(&a.delta, &b.delta)
            || match (a.uniform_delta, b.uniform_delta) {
                (Some(x), Some(y)) => (x - y).abs() > REPLAY_TOL,
                (None, None) => false,
                _ => true,
            }
    }) {
        detail = Some(format!("step {i} differs on replay"));
    } else if fresh.final_solution.chosen != stored.final_solution.chosen
        || (fresh.final_solution.weight - stored.final_solution.weight).abs() > REPLAY_TOL
    {
        detail = Some("final solution differs on replay".to_string());
    }
    let trajectory_matches = detail.is_none();

    let optimal_consistent = match &record.optimal {
        None => true,
        Some(opt) => {
            let feasible = crate::instance::is_hitting_set(&record.instance, &opt.chosen)?;
            let weight = crate::instance::solution_weight(&record.instance, &opt.chosen)?;
            let ok = feasible
                && (weight - opt.weight).abs() <= REPLAY_TOL
                && opt.weight <= stored.final_solution.weight + REPLAY_TOL;
            if !ok && detail.is_none() {
                detail = Some("stored optimum is infeasible or worse than the algorithm".into());
            }
            ok
        }
    };
    Ok(ReplayReport {
        trajectory_matches,
        optimal_consistent,
        detail,
    })
}
