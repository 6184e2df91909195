//! Hitting-set instances and the reductions that produce them.
//!
//! An instance is a weighted ground set `E = {0, .., n-1}` plus a family of
//! non-empty subsets. A solution is a set of elements intersecting every
//! subset. Vertex cover maps vertices to elements and edges to 2-element
//! subsets; set cover maps the cover family to elements and each universe
//! item to the subset of family members containing it.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result};

/// Problem the instance was reduced from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Mvc,
    Msc,
    Mhs,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Mvc => "mvc",
            Task::Msc => "msc",
            Task::Mhs => "mhs",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mvc" => Ok(Task::Mvc),
            "msc" => Ok(Task::Msc),
            "mhs" => Ok(Task::Mhs),
            other => Err(Error::InvalidConfig(format!("unknown task `{other}`"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    id: String,
    task: Task,
    n_elements: usize,
    weights: Vec<f64>,
    sets: Vec<Vec<usize>>,
    #[serde(default)]
    meta: BTreeMap<String, Value>,
}

/// A validated, canonical hitting-set instance.
///
/// Set members are strictly increasing and duplicate sets are removed (first
/// occurrence kept), so two instances built from the same data compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct HittingSetInstance {
    id: String,
    task: Task,
    weights: Vec<f64>,
    sets: Vec<Vec<usize>>,
    meta: BTreeMap<String, Value>,
    /// `incidence[e]` lists the sets containing `e`, in increasing order.
    incidence: Vec<Vec<usize>>,
}

impl HittingSetInstance {
    pub fn new(
        id: impl Into<String>,
        task: Task,
        weights: Vec<f64>,
        sets: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = weights.len();
        if let Some((e, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidInstance(format!(
                "weight of element {e} is {w}, expected finite and >= 0"
            )));
        }
        let mut seen = HashSet::new();
        let mut canonical = Vec::with_capacity(sets.len());
        for (t, mut set) in sets.into_iter().enumerate() {
            if set.is_empty() {
                return Err(Error::Infeasible(format!("set {t} is empty")));
            }
            set.sort_unstable();
            set.dedup();
            if let Some(&bad) = set.iter().find(|&&e| e >= n) {
                return Err(Error::InvalidInstance(format!(
                    "set {t} contains element {bad}, but there are only {n} elements"
                )));
            }
            if seen.insert(set.clone()) {
                canonical.push(set);
            }
        }
        let mut incidence = vec![Vec::new(); n];
        for (t, set) in canonical.iter().enumerate() {
            for &e in set {
                incidence[e].push(t);
            }
        }
        Ok(Self {
            id: id.into(),
            task,
            weights,
            sets: canonical,
            meta: BTreeMap::new(),
            incidence,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.meta.insert(key.into(), value.into());
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn n_elements(&self) -> usize {
        self.weights.len()
    }

    pub fn n_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn meta(&self) -> &BTreeMap<String, Value> {
        &self.meta
    }

    /// Sets containing element `e`.
    pub fn sets_of(&self, e: usize) -> &[usize] {
        &self.incidence[e]
    }

    /// Largest set cardinality, the approximation factor of the primal-dual
    /// algorithm with exact tightness.
    pub fn max_set_size(&self) -> usize {
        self.sets.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Copy of the instance with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for w in &mut out.weights {
            *w *= factor;
        }
        out
    }

    /// Copy of the instance with new weights; structure is unchanged.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.n_elements() {
            return Err(Error::Mismatch(format!(
                "{} weights for {} elements",
                weights.len(),
                self.n_elements()
            )));
        }
        let mut out = Self::new(self.id.clone(), self.task, weights, self.sets.clone())?;
        out.meta = self.meta.clone();
        Ok(out)
    }

    /// Equality on everything except `meta`.
    pub fn same_structure(&self, other: &Self) -> bool {
        self.id == other.id
            && self.task == other.task
            && self.weights == other.weights
            && self.sets == other.sets
    }

    fn check_indices(&self, chosen: &[usize]) -> Result<()> {
        let n = self.n_elements();
        if let Some(&index) = chosen.iter().find(|&&e| e >= n) {
            return Err(Error::IndexOutOfRange { index, n });
        }
        Ok(())
    }
}

impl TryFrom<RawInstance> for HittingSetInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        if raw.weights.len() != raw.n_elements {
            return Err(Error::InvalidInstance(format!(
                "n_elements is {} but {} weights given",
                raw.n_elements,
                raw.weights.len()
            )));
        }
        let mut inst = Self::new(raw.id, raw.task, raw.weights, raw.sets)?;
        inst.meta = raw.meta;
        Ok(inst)
    }
}

impl From<HittingSetInstance> for RawInstance {
    fn from(inst: HittingSetInstance) -> Self {
        RawInstance {
            id: inst.id,
            task: inst.task,
            n_elements: inst.weights.len(),
            weights: inst.weights,
            sets: inst.sets,
            meta: inst.meta,
        }
    }
}

/// A chosen element set together with its total weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub chosen: Vec<usize>,
    pub weight: f64,
}

impl Solution {
    /// Builds a solution from element indices; sorts them and sums weights.
    pub fn new(instance: &HittingSetInstance, mut chosen: Vec<usize>) -> Result<Self> {
        chosen.sort_unstable();
        let weight = solution_weight(instance, &chosen)?;
        Ok(Self { chosen, weight })
    }

    pub fn empty() -> Self {
        Self {
            chosen: Vec::new(),
            weight: 0.0,
        }
    }

    /// Membership mask over the instance's elements.
    pub fn mask(&self, n_elements: usize) -> Vec<bool> {
        let mut mask = vec![false; n_elements];
        for &e in &self.chosen {
            mask[e] = true;
        }
        mask
    }
}

/// Vertex cover as hitting set: one element per vertex, one 2-set per edge.
pub fn from_vertex_cover(
    n_vertices: usize,
    edges: &[(usize, usize)],
    weights: Vec<f64>,
) -> Result<HittingSetInstance> {
    if weights.len() != n_vertices {
        return Err(Error::InvalidInstance(format!(
            "{} weights for {n_vertices} vertices",
            weights.len()
        )));
    }
    let mut sets = Vec::with_capacity(edges.len());
    for &(u, v) in edges {
        if u == v {
            return Err(Error::InvalidInstance(format!("self-loop at vertex {u}")));
        }
        if u >= n_vertices || v >= n_vertices {
            return Err(Error::InvalidInstance(format!(
                "edge ({u}, {v}) has an endpoint outside 0..{n_vertices}"
            )));
        }
        sets.push(vec![u, v]);
    }
    HittingSetInstance::new("mvc", Task::Mvc, weights, sets)
}

/// Set cover as hitting set: elements are the family members, and universe
/// item `u` becomes the set of members containing `u`.
pub fn from_set_cover(
    n_universe: usize,
    family: &[Vec<usize>],
    weights: Vec<f64>,
) -> Result<HittingSetInstance> {
    if weights.len() != family.len() {
        return Err(Error::InvalidInstance(format!(
            "{} weights for a family of {} sets",
            weights.len(),
            family.len()
        )));
    }
    let mut covering = vec![Vec::new(); n_universe];
    for (s, members) in family.iter().enumerate() {
        for &u in members {
            if u >= n_universe {
                return Err(Error::InvalidInstance(format!(
                    "family set {s} contains item {u} outside 0..{n_universe}"
                )));
            }
            covering[u].push(s);
        }
    }
    if let Some(u) = covering.iter().position(Vec::is_empty) {
        return Err(Error::Infeasible(format!(
            "universe item {u} is not covered by any family set"
        )));
    }
    HittingSetInstance::new("msc", Task::Msc, weights, covering)
}

/// True iff every set of the instance intersects `chosen`.
pub fn is_hitting_set(instance: &HittingSetInstance, chosen: &[usize]) -> Result<bool> {
    instance.check_indices(chosen)?;
    let mask = {
        let mut m = vec![false; instance.n_elements()];
        for &e in chosen {
            m[e] = true;
        }
        m
    };
    Ok(instance
        .sets()
        .iter()
        .all(|set| set.iter().any(|&e| mask[e])))
}

/// Sum of weights over `chosen`, accumulated in the given order.
pub fn solution_weight(instance: &HittingSetInstance, chosen: &[usize]) -> Result<f64> {
    instance.check_indices(chosen)?;
    let mut seen = vec![false; instance.n_elements()];
    let mut total = 0.0;
    for &e in chosen {
        if std::mem::replace(&mut seen[e], true) {
            return Err(Error::DuplicateIndex(e));
        }
        total += instance.weights()[e];
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle() -> HittingSetInstance {
        from_vertex_cover(3, &[(0, 1), (1, 2), (2, 0)], vec![1.0; 3]).unwrap()
    }

    #[test]
    fn vertex_cover_reduction() {
        let inst = triangle();
        assert_eq!(inst.n_elements(), 3);
        assert_eq!(inst.n_sets(), 3);
        assert!(inst.sets().iter().all(|s| s.len() == 2));
        assert_eq!(inst.task(), Task::Mvc);

        let single = from_vertex_cover(2, &[(0, 1)], vec![1.0, 3.0]).unwrap();
        assert_eq!(single.sets(), &[vec![0, 1]]);
    }

    #[test]
    fn parallel_edges_are_deduplicated() {
        let inst = from_vertex_cover(4, &[(0, 1), (1, 0), (1, 2)], vec![1.0; 4]).unwrap();
        assert_eq!(inst.n_sets(), 2);
        assert!(inst.sets_of(3).is_empty());
    }

    #[test]
    fn vertex_cover_rejects_bad_edges() {
        assert!(matches!(
            from_vertex_cover(3, &[(1, 1)], vec![1.0; 3]),
            Err(Error::InvalidInstance(_))
        ));
        assert!(matches!(
            from_vertex_cover(3, &[(0, 3)], vec![1.0; 3]),
            Err(Error::InvalidInstance(_))
        ));
    }

    #[test]
    fn set_cover_reduction() {
        let inst = from_set_cover(2, &[vec![0], vec![1], vec![0, 1]], vec![1.0; 3]).unwrap();
        assert_eq!(inst.n_elements(), 3);
        assert_eq!(inst.sets(), &[vec![0, 2], vec![1, 2]]);
        assert_eq!(inst.task(), Task::Msc);

        let one = from_set_cover(1, &[vec![0]], vec![2.0]).unwrap();
        assert_eq!(one.sets(), &[vec![0]]);

        assert!(matches!(
            from_set_cover(2, &[vec![0]], vec![1.0]),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn empty_set_is_infeasible() {
        assert!(matches!(
            HittingSetInstance::new("x", Task::Mhs, vec![1.0], vec![vec![]]),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn rejects_negative_or_nan_weights() {
        assert!(HittingSetInstance::new("x", Task::Mhs, vec![-1.0], vec![vec![0]]).is_err());
        assert!(HittingSetInstance::new("x", Task::Mhs, vec![f64::NAN], vec![vec![0]]).is_err());
        assert!(HittingSetInstance::new("x", Task::Mhs, vec![0.0], vec![vec![0]]).is_ok());
    }

    #[test]
    fn hitting_set_checks() {
        let inst = triangle();
        assert!(is_hitting_set(&inst, &[0, 1]).unwrap());
        assert!(is_hitting_set(&inst, &[0, 1, 2]).unwrap());
        assert!(!is_hitting_set(&inst, &[0]).unwrap());
        let single = from_vertex_cover(2, &[(0, 1)], vec![1.0, 3.0]).unwrap();
        assert!(!is_hitting_set(&single, &[]).unwrap());
        assert!(is_hitting_set(&single, &[5]).is_err());
    }

    #[test]
    fn weights_of_solutions() {
        let inst =
            HittingSetInstance::new("w", Task::Mhs, vec![0.5, 0.25], vec![vec![0, 1]]).unwrap();
        assert_eq!(solution_weight(&inst, &[0, 1]).unwrap(), 0.75);
        assert_eq!(solution_weight(&inst, &[]).unwrap(), 0.0);
        let single = from_vertex_cover(2, &[(0, 1)], vec![1.0, 3.0]).unwrap();
        assert_eq!(solution_weight(&single, &[1]).unwrap(), 3.0);
        assert!(matches!(
            solution_weight(&inst, &[0, 0]),
            Err(Error::DuplicateIndex(0))
        ));
    }

    fn arb_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (2usize..9).prop_flat_map(|n| {
            let edge = (0..n, 0..n).prop_filter("no loops", |(u, v)| u != v);
            (Just(n), proptest::collection::vec(edge, 0..20))
        })
    }

    proptest! {
        #[test]
        fn hitting_set_iff_vertex_cover((n, edges) in arb_graph(), mask in 0u32..512) {
            let inst = from_vertex_cover(n, &edges, vec![1.0; n]).unwrap();
            let chosen: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
            let covers = edges.iter().all(|&(u, v)| mask >> u & 1 == 1 || mask >> v & 1 == 1);
            prop_assert_eq!(is_hitting_set(&inst, &chosen).unwrap(), covers);
        }

        #[test]
        fn serde_round_trip_is_canonical((n, edges) in arb_graph(), seed in 0u64..1000) {
            let weights: Vec<f64> = (0..n).map(|i| ((i as u64 * 7919 + seed) % 97) as f64 / 97.0).collect();
            let inst = from_vertex_cover(n, &edges, weights).unwrap().with_meta("seed", seed);
            let text = crate::numfmt::to_json_line(&inst).unwrap();
            let back: HittingSetInstance = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(&back, &inst);
            let again = crate::numfmt::to_json_line(&back).unwrap();
            prop_assert_eq!(again, text);
        }
    }
}
