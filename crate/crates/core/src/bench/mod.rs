//! Scoring model solutions against the algorithm, greedy feasibility repair,
//! and MILP warm-start export.

mod export;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

pub use export::{export_lp, export_mst, parse_lp, parse_mst};

use crate::dataset::SolutionRecord;
use crate::engine::active_sets;
use crate::instance::{HittingSetInstance, Solution};
use crate::{Error, Result};

/// Completes `partial` to a hitting set by repeatedly adding the element of an
/// unhit set with the largest `r_e / d_e` (lowest index on ties).
///
/// `r` and `d` are taken as given and not updated between additions.
pub fn greedy_cleanup(
    instance: &HittingSetInstance,
    partial: &Solution,
    r: &[f64],
    d: &[usize],
) -> Result<Solution> {
    let n = instance.n_elements();
    if r.len() != n || d.len() != n {
        return Err(Error::Mismatch(format!(
            "cleanup got {} residuals and {} degrees for {n} elements",
            r.len(),
            d.len()
        )));
    }
    let mut chosen = partial.mask(n);
    loop {
        let active = active_sets(instance, &chosen);
        if !active.iter().any(|&a| a) {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for (t, set) in instance.sets().iter().enumerate() {
            if !active[t] {
                continue;
            }
            for &e in set {
                if d[e] == 0 {
                    return Err(Error::InvalidConfig(format!(
                        "element {e} lies in unhit set {t} but has degree 0"
                    )));
                }
                let score = r[e] / d[e] as f64;
                let better = match best {
                    None => true,
                    Some((b, s)) => score > s || (score == s && e < b),
                };
                if better {
                    best = Some((e, score));
                }
            }
        }
        let (e, _) = best.expect("an unhit set is non-empty");
        chosen[e] = true;
    }
    Solution::new(instance, (0..n).filter(|&e| chosen[e]).collect())
}

/// Ratio statistics for one instance size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRatio {
    pub size: usize,
    pub n_seeds: usize,
    pub n_instances: usize,
    /// Mean over seeds of the per-seed mean ratio.
    pub mean: f64,
    /// Population standard deviation of the per-seed means.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub sizes: Vec<SizeRatio>,
    pub n_instances: usize,
    pub feasibility_rate: f64,
    pub cleanup_rate: f64,
}

/// `model / algo`, with `0 / 0` counted as a perfect match.
pub fn weight_ratio(model: f64, algo: f64) -> f64 {
    if model == 0.0 && algo == 0.0 {
        1.0
    } else {
        model / algo
    }
}

/// Model-to-algorithm weight ratios grouped by instance size.
///
/// Records are matched by id. Within a size, per-instance ratios are averaged
/// per dataset seed, and the report gives the mean and standard deviation of
/// those seed averages.
pub fn ratio_report(model: &[SolutionRecord], algo: &[SolutionRecord]) -> Result<RatioReport> {
    if model.len() != algo.len() {
        return Err(Error::Mismatch(format!(
            "{} model solutions but {} algorithm solutions",
            model.len(),
            algo.len()
        )));
    }
    let mut by_id: HashMap<&str, &SolutionRecord> = HashMap::with_capacity(algo.len());
    for rec in algo {
        if by_id.insert(rec.id.as_str(), rec).is_some() {
            return Err(Error::Mismatch(format!("duplicate algorithm id {}", rec.id)));
        }
    }
    // size -> seed -> ratios
    let mut groups: BTreeMap<usize, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    let mut feasible = 0usize;
    let mut cleaned = 0usize;
    for rec in model {
        let base = by_id
            .remove(rec.id.as_str())
            .ok_or_else(|| Error::Mismatch(format!("no algorithm solution for id {}", rec.id)))?;
        feasible += rec.feasible as usize;
        cleaned += rec.cleanup_used as usize;
        groups
            .entry(rec.size)
            .or_default()
            .entry(rec.dataset_seed)
            .or_default()
            .push(weight_ratio(rec.weight, base.weight));
    }
    let sizes = groups
        .into_iter()
        .map(|(size, seeds)| {
            let n_instances = seeds.values().map(Vec::len).sum();
            let means: Vec<f64> = seeds
                .values()
                .map(|r| r.iter().sum::<f64>() / r.len() as f64)
                .collect();
            let k = means.len() as f64;
            let mean = means.iter().sum::<f64>() / k;
            let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / k;
            SizeRatio {
                size,
                n_seeds: means.len(),
                n_instances,
                mean,
                std: var.sqrt(),
            }
        })
        .collect();
    let total = model.len();
    let rate = |count: usize| if total == 0 { 0.0 } else { count as f64 / total as f64 };
    Ok(RatioReport {
        sizes,
        n_instances: total,
        feasibility_rate: rate(feasible),
        cleanup_rate: rate(cleaned),
    })
}
