//! The general primal-dual approximation algorithm with trajectory recording.
//!
//! Each element keeps a residual weight `r_e = w_e - Σ_{T ∋ e} y_T`. A
//! timestep raises the dual variable of every unhit set `T` by
//! `δ_T = min_{e ∈ T} r_e / d_e`, where `d_e` counts the unhit sets containing
//! `e`, subtracts the raised duals from the residuals, and then adds every
//! element whose residual dropped to `max(tight_tol, ε·w_e)` or below. With the
//! uniform rule all unhit sets are raised by the same `Δ = min_T δ_T` instead.
//!
//! One recorded step corresponds to one dual update followed by the tightness
//! pass. Step 0 is the initial state, where zero-weight elements are already
//! tight.

use serde::{Deserialize, Serialize};

use crate::instance::{HittingSetInstance, Solution, Task};
use crate::{Error, Result};

pub const DEFAULT_TIGHT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgoConfig {
    /// Raise all unhit duals by the common minimum increment.
    pub uniform: bool,
    /// Relaxed tightness: `e` is added once `r_e <= ε·w_e`.
    pub epsilon: f64,
    pub tight_tol: f64,
    /// Cap on dual-update steps; `None` means `|E|`.
    pub max_steps: Option<usize>,
}

impl Default for AlgoConfig {
    fn default() -> Self {
        Self {
            uniform: false,
            epsilon: 0.0,
            tight_tol: DEFAULT_TIGHT_TOL,
            max_steps: None,
        }
    }
}

impl AlgoConfig {
    pub fn uniform() -> Self {
        Self {
            uniform: true,
            ..Self::default()
        }
    }

    pub fn relaxed(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in [0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.tight_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tight_tol must be positive, got {}",
                self.tight_tol
            )));
        }
        Ok(())
    }

    fn step_cap(&self, n_elements: usize) -> usize {
        self.max_steps.unwrap_or(n_elements.max(1))
    }

    /// Residual at or below which element `e` with weight `w` is tight.
    pub fn tight_threshold(&self, w: f64) -> f64 {
        self.tight_tol.max(self.epsilon * w)
    }
}

/// Snapshot of the algorithm after one timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Inclusion flags (cumulative).
    pub x: Vec<u8>,
    /// Residual weights.
    pub r: Vec<f64>,
    /// Per-set increments of this step, 0 for sets hit before the step.
    pub delta: Vec<f64>,
    /// Common increment under the uniform rule.
    #[serde(rename = "Delta", default, skip_serializing_if = "Option::is_none")]
    pub uniform_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub config: AlgoConfig,
    pub steps: Vec<StepRecord>,
    pub final_solution: Solution,
}

impl Trajectory {
    /// Number of dual-update steps (excludes the initial record).
    pub fn n_updates(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }
}

/// Sets not hit by the elements flagged in `x`.
pub fn active_sets(instance: &HittingSetInstance, chosen: &[bool]) -> Vec<bool> {
    instance
        .sets()
        .iter()
        .map(|set| !set.iter().any(|&e| chosen[e]))
        .collect()
}

/// Number of active sets containing each element.
pub fn active_degrees(instance: &HittingSetInstance, set_active: &[bool]) -> Vec<usize> {
    (0..instance.n_elements())
        .map(|e| {
            instance
                .sets_of(e)
                .iter()
                .filter(|&&t| set_active[t])
                .count()
        })
        .collect()
}

/// Mutable algorithm state; [`AlgoState::step`] advances one timestep.
#[derive(Debug, Clone)]
pub struct AlgoState<'a> {
    instance: &'a HittingSetInstance,
    config: AlgoConfig,
    pub residuals: Vec<f64>,
    pub degrees: Vec<usize>,
    pub chosen: Vec<bool>,
    pub set_active: Vec<bool>,
    pub t: usize,
}

impl<'a> AlgoState<'a> {
    /// Initial state with the zero-weight pre-pass applied.
    pub fn new(instance: &'a HittingSetInstance, config: AlgoConfig) -> Result<Self> {
        config.validate()?;
        let residuals = instance.weights().to_vec();
        let chosen = residuals
            .iter()
            .zip(instance.weights())
            .map(|(&r, &w)| r <= config.tight_threshold(w))
            .collect::<Vec<_>>();
        let set_active = active_sets(instance, &chosen);
        let degrees = active_degrees(instance, &set_active);
        Ok(Self {
            instance,
            config,
            residuals,
            degrees,
            chosen,
            set_active,
            t: 0,
        })
    }

    pub fn config(&self) -> &AlgoConfig {
        &self.config
    }

    pub fn is_done(&self) -> bool {
        !self.set_active.iter().any(|&a| a)
    }

    pub fn record(&self, delta: Vec<f64>, uniform_delta: Option<f64>) -> StepRecord {
        StepRecord {
            x: self.chosen.iter().map(|&c| c as u8).collect(),
            r: self.residuals.clone(),
            delta,
            uniform_delta,
        }
    }

    /// Record of the current state before any update.
    pub fn initial_record(&self) -> StepRecord {
        self.record(
            vec![0.0; self.instance.n_sets()],
            self.config.uniform.then_some(0.0),
        )
    }

    /// One dual update plus the tightness pass. Returns the step record and
    /// the number of newly added elements.
    pub fn step(&mut self) -> (StepRecord, usize) {
        let inst = self.instance;
        let mut delta = vec![0.0; inst.n_sets()];
        for (t, set) in inst.sets().iter().enumerate() {
            if !self.set_active[t] {
                continue;
            }
            // every member of an active set is unchosen with degree >= 1
            delta[t] = set
                .iter()
                .map(|&e| self.residuals[e] / self.degrees[e] as f64)
                .fold(f64::INFINITY, f64::min);
        }

        let uniform_delta = if self.config.uniform {
            let big = delta
                .iter()
                .zip(&self.set_active)
                .filter(|(_, &a)| a)
                .map(|(&d, _)| d)
                .fold(f64::INFINITY, f64::min);
            for e in 0..inst.n_elements() {
                if !self.chosen[e] {
                    self.residuals[e] -= self.degrees[e] as f64 * big;
                }
            }
            Some(big)
        } else {
            for e in 0..inst.n_elements() {
                if self.chosen[e] {
                    continue;
                }
                let raised: f64 = inst
                    .sets_of(e)
                    .iter()
                    .filter(|&&t| self.set_active[t])
                    .map(|&t| delta[t])
                    .sum();
                self.residuals[e] -= raised;
            }
            None
        };

        let mut added = 0;
        for e in 0..inst.n_elements() {
            if !self.chosen[e]
                && self.residuals[e] <= self.config.tight_threshold(inst.weights()[e])
            {
                self.chosen[e] = true;
                added += 1;
            }
        }
        self.set_active = active_sets(inst, &self.chosen);
        self.degrees = active_degrees(inst, &self.set_active);
        self.t += 1;
        (self.record(delta, uniform_delta), added)
    }

    pub fn solution(&self) -> Result<Solution> {
        let chosen = (0..self.chosen.len()).filter(|&e| self.chosen[e]).collect();
        Solution::new(self.instance, chosen)
    }
}

/// Runs the primal-dual algorithm to completion and records every step.
pub fn run_general(instance: &HittingSetInstance, config: &AlgoConfig) -> Result<Trajectory> {
    let mut state = AlgoState::new(instance, *config)?;
    let cap = config.step_cap(instance.n_elements());
    let mut steps = vec![state.initial_record()];
    while !state.is_done() {
        if state.t >= cap {
            return Err(Error::IncompleteTrajectory { steps: state.t });
        }
        let (record, _) = state.step();
        steps.push(record);
    }
    Ok(Trajectory {
        config: *config,
        steps,
        final_solution: state.solution()?,
    })
}

fn run_cover(instance: &HittingSetInstance, task: Task, epsilon: f64) -> Result<Trajectory> {
    if instance.task() != task {
        return Err(Error::InvalidConfig(format!(
            "cover algorithm for {task} called on a {} instance",
            instance.task()
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "cover algorithm needs epsilon in (0, 1), got {epsilon}"
        )));
    }
    run_general(instance, &AlgoConfig::relaxed(epsilon))
}

/// ε-relaxed cover algorithm for vertex cover; `2/(1-ε)`-approximate.
///
/// All remaining vertices update their residuals simultaneously from the
/// increments of the current round before any deletion takes effect.
pub fn run_cover_mvc(instance: &HittingSetInstance, epsilon: f64) -> Result<Trajectory> {
    run_cover(instance, Task::Mvc, epsilon)
}

/// Hypergraph version of [`run_cover_mvc`]; `r/(1-ε)`-approximate with `r`
/// the largest set size.
pub fn run_cover_msc(instance: &HittingSetInstance, epsilon: f64) -> Result<Trajectory> {
    run_cover(instance, Task::Msc, epsilon)
}

/// Accumulated dual variables `y_T` implied by a trajectory.
pub fn dual_variables(trajectory: &Trajectory, instance: &HittingSetInstance) -> Result<Vec<f64>> {
    let n_sets = instance.n_sets();
    let n = instance.n_elements();
    for (i, step) in trajectory.steps.iter().enumerate() {
        if step.delta.len() != n_sets || step.x.len() != n || step.r.len() != n {
            return Err(Error::Mismatch(format!(
                "step {i} has shape (x {}, r {}, delta {}) but instance has {n} elements and {n_sets} sets",
                step.x.len(),
                step.r.len(),
                step.delta.len()
            )));
        }
    }
    let mut y = vec![0.0; n_sets];
    for pair in trajectory.steps.windows(2) {
        let (prev, step) = (&pair[0], &pair[1]);
        match step.uniform_delta {
            Some(big) => {
                let prev_chosen: Vec<bool> = prev.x.iter().map(|&v| v == 1).collect();
                for (t, active) in active_sets(instance, &prev_chosen).into_iter().enumerate() {
                    if active {
                        y[t] += big;
                    }
                }
            }
            None => {
                for (yt, d) in y.iter_mut().zip(&step.delta) {
                    *yt += d;
                }
            }
        }
    }
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    pub feasible: bool,
    /// Largest `Σ_{T ∋ e} y_T - w_e`, clamped at 0.
    pub max_violation: f64,
    pub dual_objective: f64,
}

/// Checks `Σ_{T ∋ e} y_T <= w_e + tol` for every element.
pub fn verify_dual_feasibility(
    instance: &HittingSetInstance,
    y: &[f64],
    tol: f64,
) -> Result<DualReport> {
    if y.len() != instance.n_sets() {
        return Err(Error::Mismatch(format!(
            "{} dual values for {} sets",
            y.len(),
            instance.n_sets()
        )));
    }
    if let Some(t) = y.iter().position(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "dual value of set {t} is {}, expected finite and >= 0",
            y[t]
        )));
    }
    let mut max_violation: f64 = 0.0;
    for (e, &w) in instance.weights().iter().enumerate() {
        let load: f64 = instance.sets_of(e).iter().map(|&t| y[t]).sum();
        max_violation = max_violation.max(load - w);
    }
    Ok(DualReport {
        feasible: max_violation <= tol,
        max_violation,
        dual_objective: y.iter().sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{from_set_cover, from_vertex_cover, is_hitting_set};
    use proptest::prelude::*;

    fn singleton() -> HittingSetInstance {
        HittingSetInstance::new("one", Task::Mhs, vec![1.0], vec![vec![0]]).unwrap()
    }

    fn triangle() -> HittingSetInstance {
        from_vertex_cover(3, &[(0, 1), (1, 2), (2, 0)], vec![1.0; 3]).unwrap()
    }

    fn path() -> HittingSetInstance {
        from_vertex_cover(3, &[(0, 1), (1, 2)], vec![1.0; 3]).unwrap()
    }

    /// Straight-line transcription of one round used as an independent check
    /// of the stepper: degrees counted from scratch, no shared helpers.
    fn reference_round(
        inst: &HittingSetInstance,
        r: &mut [f64],
        chosen: &mut [bool],
        uniform: bool,
    ) -> (Vec<f64>, Option<f64>) {
        let hit = |set: &Vec<usize>, chosen: &[bool]| set.iter().any(|&e| chosen[e]);
        let violated: Vec<usize> = (0..inst.n_sets())
            .filter(|&t| !hit(&inst.sets()[t], chosen))
            .collect();
        let deg = |e: usize| {
            violated
                .iter()
                .filter(|&&t| inst.sets()[t].contains(&e))
                .count() as f64
        };
        let mut delta = vec![0.0; inst.n_sets()];
        for &t in &violated {
            delta[t] = inst.sets()[t]
                .iter()
                .map(|&e| r[e] / deg(e))
                .fold(f64::INFINITY, f64::min);
        }
        let big = violated
            .iter()
            .map(|&t| delta[t])
            .fold(f64::INFINITY, f64::min);
        let degs: Vec<f64> = (0..inst.n_elements()).map(deg).collect();
        for e in 0..inst.n_elements() {
            if chosen[e] {
                continue;
            }
            if uniform {
                r[e] -= degs[e] * big;
            } else {
                r[e] -= violated
                    .iter()
                    .filter(|&&t| inst.sets()[t].contains(&e))
                    .map(|&t| delta[t])
                    .sum::<f64>();
            }
        }
        for e in 0..inst.n_elements() {
            if !chosen[e] && r[e] <= 1e-9 {
                chosen[e] = true;
            }
        }
        (delta, uniform.then_some(big))
    }

    #[test]
    fn singleton_trace() {
        let tr = run_general(&singleton(), &AlgoConfig::default()).unwrap();
        assert_eq!(tr.steps.len(), 2);
        let s = &tr.steps[1];
        assert_eq!(s.delta, vec![1.0]);
        assert_eq!(s.r, vec![0.0]);
        assert_eq!(s.x, vec![1]);
        assert_eq!(tr.final_solution.chosen, vec![0]);
        assert_eq!(tr.final_solution.weight, 1.0);
    }

    #[test]
    fn triangle_trace() {
        let inst = triangle();
        let tr = run_general(&inst, &AlgoConfig::default()).unwrap();
        assert_eq!(tr.n_updates(), 1);
        assert_eq!(tr.steps[1].delta, vec![0.5; 3]);
        assert_eq!(tr.steps[1].r, vec![0.0; 3]);
        assert_eq!(tr.final_solution.chosen, vec![0, 1, 2]);
        assert_eq!(tr.final_solution.weight, 3.0);
        assert_eq!(dual_variables(&tr, &inst).unwrap(), vec![0.5; 3]);

        let mut r = inst.weights().to_vec();
        let mut chosen = vec![false; 3];
        let (delta, _) = reference_round(&inst, &mut r, &mut chosen, false);
        assert_eq!(delta, tr.steps[1].delta);
        assert_eq!(r, tr.steps[1].r);
    }

    #[test]
    fn path_uniform_trace() {
        let inst = path();
        let tr = run_general(&inst, &AlgoConfig::uniform()).unwrap();
        assert_eq!(tr.n_updates(), 1);
        let s = &tr.steps[1];
        assert_eq!(s.delta, vec![0.5, 0.5]);
        assert_eq!(s.uniform_delta, Some(0.5));
        assert_eq!(s.r, vec![0.5, 0.0, 0.5]);
        assert_eq!(tr.final_solution.chosen, vec![1]);
        assert_eq!(tr.final_solution.weight, 1.0);
        assert_eq!(dual_variables(&tr, &inst).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn cover_mvc_traces() {
        let edge = from_vertex_cover(2, &[(0, 1)], vec![1.0, 3.0]).unwrap();
        let tr = run_cover_mvc(&edge, 0.1).unwrap();
        assert_eq!(tr.steps[1].delta, vec![1.0]);
        assert_eq!(tr.steps[1].r, vec![0.0, 2.0]);
        assert_eq!(tr.final_solution.chosen, vec![0]);
        assert_eq!(tr.final_solution.weight, 1.0);

        let tri = run_cover_mvc(&triangle(), 0.1).unwrap();
        assert_eq!(tri.n_updates(), 1);
        assert_eq!(tri.final_solution.weight, 3.0);
        assert!(tri.final_solution.weight <= 2.0 / 0.9 * 2.0);

        let mut w = vec![1.0; 5];
        w[0] = 0.1;
        let star = from_vertex_cover(5, &[(0, 1), (0, 2), (0, 3), (0, 4)], w).unwrap();
        let tr = run_cover_mvc(&star, 0.1).unwrap();
        assert_eq!(tr.final_solution.chosen, vec![0]);
        assert!((tr.final_solution.weight - 0.1).abs() < 1e-15);
    }

    #[test]
    fn cover_rejects_bad_arguments() {
        assert!(matches!(
            run_cover_mvc(&triangle(), 0.0),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            run_cover_msc(&triangle(), 0.1),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn cover_msc_traces() {
        let only = from_set_cover(2, &[vec![0, 1]], vec![1.0]).unwrap();
        assert_eq!(run_cover_msc(&only, 0.1).unwrap().final_solution.chosen, vec![0]);

        let inst = from_set_cover(2, &[vec![0], vec![1], vec![0, 1]], vec![1.0; 3]).unwrap();
        let tr = run_cover_msc(&inst, 0.1).unwrap();
        // brute force optimum is S_2 with weight 1
        assert!(tr.final_solution.weight <= 2.0 / 0.9 * 1.0);
        assert!(is_hitting_set(&inst, &tr.final_solution.chosen).unwrap());
    }

    #[test]
    fn dual_feasibility_reports() {
        let tri = triangle();
        let rep = verify_dual_feasibility(&tri, &[0.5; 3], 1e-9).unwrap();
        assert!(rep.feasible);
        assert_eq!(rep.dual_objective, 1.5);

        let one = singleton();
        let rep = verify_dual_feasibility(&one, &[1.0], 1e-9).unwrap();
        assert!(rep.feasible);
        assert_eq!(rep.max_violation, 0.0);

        let rep = verify_dual_feasibility(&one, &[1.1], 1e-9).unwrap();
        assert!(!rep.feasible);
        assert!((rep.max_violation - 0.1).abs() < 1e-12);

        assert!(verify_dual_feasibility(&one, &[-0.1], 1e-9).is_err());
        assert!(verify_dual_feasibility(&one, &[0.1, 0.2], 1e-9).is_err());
    }

    #[test]
    fn zero_weights_are_prechosen() {
        let inst = from_vertex_cover(3, &[(0, 1), (1, 2)], vec![1.0, 0.0, 1.0]).unwrap();
        let tr = run_general(&inst, &AlgoConfig::default()).unwrap();
        assert_eq!(tr.steps.len(), 1);
        assert_eq!(tr.steps[0].x, vec![0, 1, 0]);
        assert_eq!(tr.final_solution.chosen, vec![1]);
    }

    #[test]
    fn empty_family_needs_no_steps() {
        let inst = HittingSetInstance::new("e", Task::Mhs, vec![1.0, 2.0], vec![]).unwrap();
        let tr = run_general(&inst, &AlgoConfig::default()).unwrap();
        assert_eq!(tr.steps.len(), 1);
        assert!(tr.final_solution.chosen.is_empty());
    }

    #[test]
    fn step_cap_is_enforced() {
        let inst = path();
        let cfg = AlgoConfig {
            max_steps: Some(0),
            ..AlgoConfig::default()
        };
        assert!(matches!(
            run_general(&inst, &cfg),
            Err(Error::IncompleteTrajectory { steps: 0 })
        ));
    }

    fn arb_instance() -> impl Strategy<Value = HittingSetInstance> {
        (2usize..10).prop_flat_map(|n| {
            let set = proptest::collection::btree_set(0..n, 1..=n.min(4))
                .prop_map(|s| s.into_iter().collect::<Vec<_>>());
            (
                proptest::collection::vec(0.01f64..1.0, n),
                proptest::collection::vec(set, 1..12),
            )
                .prop_map(|(w, sets)| HittingSetInstance::new("p", Task::Mhs, w, sets).unwrap())
        })
    }

    proptest! {
        #[test]
        fn stepper_matches_reference(inst in arb_instance(), uniform in any::<bool>()) {
            let cfg = AlgoConfig { uniform, ..AlgoConfig::default() };
            let tr = run_general(&inst, &cfg).unwrap();
            let mut r = inst.weights().to_vec();
            let mut chosen = vec![false; inst.n_elements()];
            for step in &tr.steps[1..] {
                let (delta, big) = reference_round(&inst, &mut r, &mut chosen, uniform);
                prop_assert_eq!(&delta, &step.delta);
                prop_assert_eq!(big, step.uniform_delta);
                prop_assert_eq!(&r, &step.r);
                let x: Vec<u8> = chosen.iter().map(|&c| c as u8).collect();
                prop_assert_eq!(&x, &step.x);
            }
        }

        #[test]
        fn feasible_progressing_and_monotone(inst in arb_instance(), uniform in any::<bool>(), eps in prop_oneof![Just(0.0), 0.01f64..0.5]) {
            let cfg = AlgoConfig { uniform, epsilon: eps, ..AlgoConfig::default() };
            let tr = run_general(&inst, &cfg).unwrap();
            prop_assert!(is_hitting_set(&inst, &tr.final_solution.chosen).unwrap());
            prop_assert!(tr.n_updates() <= inst.n_elements());
            for pair in tr.steps.windows(2) {
                let added = pair[1].x.iter().zip(&pair[0].x).filter(|(a, b)| a > b).count();
                prop_assert!(added >= 1);
                for e in 0..inst.n_elements() {
                    prop_assert!(pair[1].x[e] >= pair[0].x[e]);
                    prop_assert!(pair[1].r[e] <= pair[0].r[e]);
                    prop_assert!(pair[1].r[e] >= -1e-9);
                }
            }
        }

        #[test]
        fn residual_identity(inst in arb_instance(), uniform in any::<bool>()) {
            let cfg = AlgoConfig { uniform, ..AlgoConfig::default() };
            let tr = run_general(&inst, &cfg).unwrap();
            for k in 1..tr.steps.len() {
                let prefix = Trajectory {
                    config: cfg,
                    steps: tr.steps[..=k].to_vec(),
                    final_solution: tr.final_solution.clone(),
                };
                let y = dual_variables(&prefix, &inst).unwrap();
                let prev = &tr.steps[k - 1];
                for e in 0..inst.n_elements() {
                    if prev.x[e] == 1 {
                        continue;
                    }
                    let load: f64 = inst.sets_of(e).iter().map(|&t| y[t]).sum();
                    prop_assert!((tr.steps[k].r[e] - (inst.weights()[e] - load)).abs() <= 1e-9);
                }
            }
            let y = dual_variables(&tr, &inst).unwrap();
            prop_assert!(verify_dual_feasibility(&inst, &y, 1e-9).unwrap().feasible);
        }

        #[test]
        fn scale_equivariance(inst in arb_instance(), uniform in any::<bool>(), c in 0.1f64..10.0) {
            let cfg = AlgoConfig { uniform, ..AlgoConfig::default() };
            let base = run_general(&inst, &cfg).unwrap();
            let cfg_scaled = AlgoConfig { tight_tol: cfg.tight_tol * c, ..cfg };
            let scaled = run_general(&inst.scaled(c), &cfg_scaled).unwrap();
            prop_assert_eq!(base.steps.len(), scaled.steps.len());
            for (a, b) in base.steps.iter().zip(&scaled.steps) {
                prop_assert_eq!(&a.x, &b.x);
                for (ra, rb) in a.r.iter().zip(&b.r) {
                    prop_assert!((ra * c - rb).abs() <= 1e-9 * c);
                }
                for (da, db) in a.delta.iter().zip(&b.delta) {
                    prop_assert!((da * c - db).abs() <= 1e-9 * c);
                }
            }
            prop_assert_eq!(base.final_solution.chosen, scaled.final_solution.chosen);
        }
    }
}
