//! Bipartite message-passing network over elements and sets.
//!
//! One forward step encodes every active element from its residual and
//! degree, sends messages element → set with min aggregation, optionally
//! pools all sets into a virtual node (uniform rule), sends messages back
//! set → element with sum aggregation, and decodes `x̂`, `r̂`, `δ̂` and `Δ̂`:
//!
//! ```text
//! h_e   = f_r(ln r_e)                     h_d = f_d(ln d_e | ln(d_e + 1))
//! h_T   = min_{e ∈ T} g_e(h_e ‖ h_d)      g_e = l2 ∘ act ∘ l1
//! h_z   = min_T h_T                        (uniform only)
//! agg_e = Σ_{T ∋ e} h_T  |  d_e · h_z
//! h_e'  = g_u(act(h_e) + pre_bias ‖ agg_e)
//! x̂_e  = sigmoid(q_x(h_e') / temperature), r̂_e = q_r(h_e'), δ̂_T = q_δ(h_T), Δ̂ = q_Δ(h_z)
//! ```
//!
//! [`analytic_weights`] sets the parameters so that every decoded quantity
//! equals the corresponding quantity of the primal-dual engine.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bench::greedy_cleanup;
use crate::engine::{active_degrees, active_sets, run_general, AlgoConfig, Trajectory, DEFAULT_TIGHT_TOL};
use crate::forge::rng_for;
use crate::instance::{HittingSetInstance, Solution, Task};
use crate::{Error, Result};

/// Residuals are clamped to this before taking logarithms.
pub const MIN_LOG_INPUT: f64 = 1e-12;
/// Sigmoid temperature of the analytic x-decoder.
pub const ANALYTIC_TEMPERATURE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Elu,
    Relu,
}

impl Activation {
    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Elu => "elu",
            Activation::Relu => "relu",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Elu if v > 0.0 => v,
            Activation::Elu => v.exp_m1(),
            Activation::Relu => v.max(0.0),
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elu" => Ok(Activation::Elu),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::InvalidConfig(format!("unknown activation {other:?}"))),
        }
    }
}

/// How element degrees enter the degree encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeTransform {
    /// `ln d`, used by the analytic construction.
    Log,
    /// `ln(d + 1)`, used by trained models.
    Log1p,
}

impl DegreeTransform {
    pub fn as_str(self) -> &'static str {
        match self {
            DegreeTransform::Log => "log",
            DegreeTransform::Log1p => "log1p",
        }
    }

    fn apply(self, d: usize) -> f64 {
        match self {
            DegreeTransform::Log => (d as f64).ln(),
            DegreeTransform::Log1p => (d as f64).ln_1p(),
        }
    }
}

impl std::str::FromStr for DegreeTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(DegreeTransform::Log),
            "log1p" => Ok(DegreeTransform::Log1p),
            other => Err(Error::InvalidConfig(format!(
                "unknown degree transform {other:?}"
            ))),
        }
    }
}

/// Dense row-major matrix. Vectors are stored as a single row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Names and shapes of all tensors for hidden size `h`.
pub fn tensor_shapes(h: usize) -> Vec<(&'static str, usize, usize)> {
    vec![
        ("f_r.weight", h, 1),
        ("f_r.bias", 1, h),
        ("f_d.weight", h, 1),
        ("f_d.bias", 1, h),
        ("g_e.l1.weight", h, 2 * h),
        ("g_e.l1.bias", 1, h),
        ("g_e.l2.weight", h, h),
        ("g_e.l2.bias", 1, h),
        ("g_u.pre_bias", 1, h),
        ("g_u.weight", h, 2 * h),
        ("g_u.bias", 1, h),
        ("q_x.weight", 1, h),
        ("q_x.bias", 1, 1),
        ("q_r.weight", 1, h),
        ("q_r.bias", 1, 1),
        ("q_delta.weight", 1, h),
        ("q_delta.bias", 1, 1),
        ("q_Delta.weight", 1, h),
        ("q_Delta.bias", 1, 1),
    ]
}

/// Parameters and architecture settings of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelWeights {
    pub hidden_dim: usize,
    pub uniform: bool,
    pub activation: Activation,
    pub degree_transform: DegreeTransform,
    /// The x-decoder computes `sigmoid(q_x(h) / temperature)`.
    pub temperature: f64,
    pub decode_threshold: f64,
    pub tensors: BTreeMap<String, Tensor>,
}

impl ModelWeights {
    /// Checks tensor names, shapes and finiteness.
    pub fn validate(&self) -> Result<()> {
        let h = self.hidden_dim;
        if h == 0 {
            return Err(Error::InvalidConfig("hidden_dim must be at least 1".into()));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if !(self.decode_threshold > 0.0 && self.decode_threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "decode_threshold must lie in (0, 1), got {}",
                self.decode_threshold
            )));
        }
        let shapes = tensor_shapes(h);
        for (name, rows, cols) in &shapes {
            let t = self
                .tensors
                .get(*name)
                .ok_or_else(|| Error::InvalidConfig(format!("missing tensor {name}")))?;
            if (t.rows, t.cols) != (*rows, *cols) || t.data.len() != rows * cols {
                return Err(Error::InvalidConfig(format!(
                    "tensor {name} has shape {}x{} ({} values), expected {rows}x{cols}",
                    t.rows,
                    t.cols,
                    t.data.len()
                )));
            }
            if t.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!("tensor {name} has non-finite entries")));
            }
        }
        if let Some(extra) = self
            .tensors
            .keys()
            .find(|k| !shapes.iter().any(|(name, _, _)| name == k))
        {
            return Err(Error::InvalidConfig(format!("unexpected tensor {extra}")));
        }
        Ok(())
    }

    fn zeroed(hidden_dim: usize, uniform: bool) -> Self {
        let tensors = tensor_shapes(hidden_dim)
            .into_iter()
            .map(|(name, r, c)| (name.to_string(), Tensor::zeros(r, c)))
            .collect();
        Self {
            hidden_dim,
            uniform,
            activation: Activation::Elu,
            degree_transform: DegreeTransform::Log1p,
            temperature: 1.0,
            decode_threshold: 0.5,
            tensors,
        }
    }

    fn tensor_mut(&mut self, name: &str) -> &mut Tensor {
        self.tensors.get_mut(name).expect("known tensor name")
    }

    /// Randomly initialised weights, uniform in `±1/sqrt(fan_in)`.
    pub fn random(hidden_dim: usize, uniform: bool, seed: u64) -> Result<Self> {
        if hidden_dim == 0 {
            return Err(Error::InvalidConfig("hidden_dim must be at least 1".into()));
        }
        let mut w = Self::zeroed(hidden_dim, uniform);
        let mut rng = rng_for(seed);
        for (name, _, _) in tensor_shapes(hidden_dim) {
            let fan_in = match name {
                "f_r.weight" | "f_r.bias" | "f_d.weight" | "f_d.bias" => 1,
                "g_e.l1.weight" | "g_e.l1.bias" | "g_u.weight" | "g_u.bias" => 2 * hidden_dim,
                _ => hidden_dim,
            };
            let bound = 1.0 / (fan_in as f64).sqrt();
            for v in &mut w.tensor_mut(name).data {
                *v = rng.gen_range(-bound..=bound);
            }
        }
        Ok(w)
    }
}

/// Weights under which the network replays the primal-dual engine with
/// `ε = 0`. Only coordinate 0 of each hidden vector carries information.
pub fn analytic_weights(hidden_dim: usize, uniform: bool) -> Result<ModelWeights> {
    if hidden_dim == 0 {
        return Err(Error::InvalidConfig("hidden_dim must be at least 1".into()));
    }
    let h = hidden_dim;
    let mut w = ModelWeights::zeroed(h, uniform);
    w.degree_transform = DegreeTransform::Log;
    w.temperature = ANALYTIC_TEMPERATURE;
    // encoders keep ln r and ln d in coordinate 0
    w.tensor_mut("f_r.weight").set(0, 0, 1.0);
    w.tensor_mut("f_d.weight").set(0, 0, 1.0);
    // g_e: ELU(ln r - ln d) + 1 = r / d for r <= d
    w.tensor_mut("g_e.l1.weight").set(0, 0, 1.0);
    w.tensor_mut("g_e.l1.weight").set(0, h, -1.0);
    w.tensor_mut("g_e.l2.weight").set(0, 0, 1.0);
    w.tensor_mut("g_e.l2.bias").set(0, 0, 1.0);
    // g_u: ELU(ln r) + 1 = r, then r - aggregated increments
    w.tensor_mut("g_u.pre_bias").set(0, 0, 1.0);
    w.tensor_mut("g_u.weight").set(0, 0, 1.0);
    w.tensor_mut("g_u.weight").set(0, h, -1.0);
    // x-decoder fires when r <= tight_tol
    w.tensor_mut("q_x.weight").set(0, 0, -1.0);
    w.tensor_mut("q_x.bias").set(0, 0, DEFAULT_TIGHT_TOL);
    for name in ["q_r.weight", "q_delta.weight", "q_Delta.weight"] {
        w.tensor_mut(name).set(0, 0, 1.0);
    }
    Ok(w)
}

struct Linear<'a> {
    weight: &'a Tensor,
    bias: &'a Tensor,
}

impl Linear<'_> {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.weight.rows)
            .map(|i| {
                let dot: f64 = self.weight.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
                dot + self.bias.data[i]
            })
            .collect()
    }
}

/// Borrowed view of validated weights.
struct Network<'a> {
    weights: &'a ModelWeights,
    f_r: Linear<'a>,
    f_d: Linear<'a>,
    g_e1: Linear<'a>,
    g_e2: Linear<'a>,
    g_u_pre_bias: &'a Tensor,
    g_u: Linear<'a>,
    q_x: Linear<'a>,
    q_r: Linear<'a>,
    q_delta: Linear<'a>,
    q_big_delta: Linear<'a>,
}

impl<'a> Network<'a> {
    fn new(weights: &'a ModelWeights) -> Result<Self> {
        weights.validate()?;
        let t = |name: &str| &weights.tensors[name];
        let lin = |prefix: &str| Linear {
            weight: t(&format!("{prefix}.weight")),
            bias: t(&format!("{prefix}.bias")),
        };
        Ok(Self {
            weights,
            f_r: lin("f_r"),
            f_d: lin("f_d"),
            g_e1: lin("g_e.l1"),
            g_e2: lin("g_e.l2"),
            g_u_pre_bias: t("g_u.pre_bias"),
            g_u: lin("g_u"),
            q_x: lin("q_x"),
            q_r: lin("q_r"),
            q_delta: lin("q_delta"),
            q_big_delta: lin("q_Delta"),
        })
    }

    fn act(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|&x| self.weights.activation.apply(x)).collect()
    }

    fn encode_residual(&self, r: f64) -> Vec<f64> {
        self.f_r.apply(&[r.max(MIN_LOG_INPUT).ln()])
    }

    fn encode_degree(&self, d: usize) -> Vec<f64> {
        self.f_d.apply(&[self.weights.degree_transform.apply(d)])
    }

    fn edge_message(&self, h_e: &[f64], h_d: &[f64]) -> Vec<f64> {
        let joined = [h_e, h_d].concat();
        self.g_e2.apply(&self.act(&self.g_e1.apply(&joined)))
    }

    fn update(&self, h_e: &[f64], agg: &[f64]) -> Vec<f64> {
        let pre: Vec<f64> = self
            .act(h_e)
            .iter()
            .zip(&self.g_u_pre_bias.data)
            .map(|(a, b)| a + b)
            .collect();
        self.g_u.apply(&[pre.as_slice(), agg].concat())
    }

    fn decode_x(&self, h: &[f64]) -> f64 {
        sigmoid(self.q_x.apply(h)[0] / self.weights.temperature)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Elementwise minimum of the active members' messages for every active set;
/// inactive sets get a zero vector.
pub(crate) fn min_aggregate(
    instance: &HittingSetInstance,
    messages: &[Vec<f64>],
    element_active: &[bool],
    set_active: &[bool],
    dim: usize,
) -> Result<Vec<Vec<f64>>> {
    instance
        .sets()
        .iter()
        .enumerate()
        .map(|(t, set)| {
            if !set_active[t] {
                return Ok(vec![0.0; dim]);
            }
            let mut acc: Option<Vec<f64>> = None;
            for &e in set.iter().filter(|&&e| element_active[e]) {
                match acc.as_mut() {
                    None => acc = Some(messages[e].clone()),
                    Some(a) => {
                        for (x, &m) in a.iter_mut().zip(&messages[e]) {
                            *x = x.min(m);
                        }
                    }
                }
            }
            acc.ok_or_else(|| {
                Error::Mismatch(format!("active set {t} has no active members"))
            })
        })
        .collect()
}

/// Sum of active neighbouring sets' vectors for every active element; masked
/// elements get a zero vector.
pub(crate) fn sum_aggregate(
    instance: &HittingSetInstance,
    set_vectors: &[Vec<f64>],
    element_active: &[bool],
    set_active: &[bool],
    dim: usize,
) -> Vec<Vec<f64>> {
    (0..instance.n_elements())
        .map(|e| {
            let mut acc = vec![0.0; dim];
            if element_active[e] {
                for &t in instance.sets_of(e).iter().filter(|&&t| set_active[t]) {
                    for (a, &v) in acc.iter_mut().zip(&set_vectors[t]) {
                        *a += v;
                    }
                }
            }
            acc
        })
        .collect()
}

/// Inputs of one forward step.
#[derive(Debug, Clone, Copy)]
pub struct StepInput<'a> {
    pub r: &'a [f64],
    pub degrees: &'a [usize],
    pub chosen: &'a [bool],
    pub set_active: &'a [bool],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutput {
    pub x_hat: Vec<f64>,
    pub r_hat: Vec<f64>,
    pub delta_hat: Vec<f64>,
    #[serde(rename = "Delta_hat", default, skip_serializing_if = "Option::is_none")]
    pub uniform_delta_hat: Option<f64>,
}

/// One message-passing round.
///
/// An element takes part iff it is not chosen and lies in an active set.
/// Masked elements keep their input residual and report `x̂ = 1` if chosen,
/// else 0. Inactive sets report `δ̂ = 0`.
pub fn forward_step(
    weights: &ModelWeights,
    instance: &HittingSetInstance,
    input: StepInput<'_>,
) -> Result<StepOutput> {
    let net = Network::new(weights)?;
    forward_with(&net, instance, input)
}

fn forward_with(
    net: &Network<'_>,
    instance: &HittingSetInstance,
    input: StepInput<'_>,
) -> Result<StepOutput> {
    let n = instance.n_elements();
    let m = instance.n_sets();
    if input.r.len() != n || input.degrees.len() != n || input.chosen.len() != n {
        return Err(Error::Mismatch(format!(
            "step input has {} residuals, {} degrees, {} flags for {n} elements",
            input.r.len(),
            input.degrees.len(),
            input.chosen.len()
        )));
    }
    if input.set_active.len() != m {
        return Err(Error::Mismatch(format!(
            "{} set flags for {m} sets",
            input.set_active.len()
        )));
    }
    let element_active: Vec<bool> = (0..n)
        .map(|e| !input.chosen[e] && input.degrees[e] >= 1)
        .collect();
    if !input.set_active.iter().any(|&a| a) || !element_active.iter().any(|&a| a) {
        return Err(Error::EmptyStep);
    }
    let h = net.weights.hidden_dim;

    let mut h_e = vec![Vec::new(); n];
    let mut messages = vec![Vec::new(); n];
    for e in (0..n).filter(|&e| element_active[e]) {
        h_e[e] = net.encode_residual(input.r[e]);
        let h_d = net.encode_degree(input.degrees[e]);
        messages[e] = net.edge_message(&h_e[e], &h_d);
    }
    let h_t = min_aggregate(instance, &messages, &element_active, input.set_active, h)?;

    let (agg, uniform_delta_hat) = if net.weights.uniform {
        let mut h_z = vec![f64::INFINITY; h];
        for (_, v) in h_t.iter().enumerate().filter(|(t, _)| input.set_active[*t]) {
            for (z, &x) in h_z.iter_mut().zip(v) {
                *z = z.min(x);
            }
        }
        // every active set forwards h_z to its elements
        let relay: Vec<Vec<f64>> = vec![h_z.clone(); m];
        let agg = sum_aggregate(instance, &relay, &element_active, input.set_active, h);
        (agg, Some(net.q_big_delta.apply(&h_z)[0]))
    } else {
        (
            sum_aggregate(instance, &h_t, &element_active, input.set_active, h),
            None,
        )
    };

    let mut x_hat = vec![0.0; n];
    let mut r_hat = input.r.to_vec();
    for e in 0..n {
        if element_active[e] {
            let h_new = net.update(&h_e[e], &agg[e]);
            x_hat[e] = net.decode_x(&h_new);
            r_hat[e] = net.q_r.apply(&h_new)[0];
        } else if input.chosen[e] {
            x_hat[e] = 1.0;
        }
    }
    let delta_hat = (0..m)
        .map(|t| {
            if input.set_active[t] {
                net.q_delta.apply(&h_t[t])[0]
            } else {
                0.0
            }
        })
        .collect();
    Ok(StepOutput {
        x_hat,
        r_hat,
        delta_hat,
        uniform_delta_hat,
    })
}

/// How decoded probabilities become inclusion decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeRule {
    /// Add every active element with `x̂ >= decode_threshold`.
    Threshold,
    /// Add the single active element with the largest `x̂`.
    Argmax,
}

impl DecodeRule {
    /// Threshold for vertex and set cover, argmax for hitting set.
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Mvc | Task::Msc => DecodeRule::Threshold,
            Task::Mhs => DecodeRule::Argmax,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RolloutConfig {
    pub decode: DecodeRule,
    /// Cap on processor steps; `None` means `|E|`.
    pub max_steps: Option<usize>,
}

impl RolloutConfig {
    pub fn for_task(task: Task) -> Self {
        Self {
            decode: DecodeRule::for_task(task),
            max_steps: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum RolloutMode<'a> {
    /// Feed the ground-truth `r` and `x` of this trajectory at every step.
    TeacherForced(&'a Trajectory),
    /// Feed back the model's own decisions and residuals.
    FreeRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedStep {
    /// Decisions after decoding this step (cumulative).
    pub x: Vec<u8>,
    pub x_hat: Vec<f64>,
    pub r_hat: Vec<f64>,
    pub delta_hat: Vec<f64>,
    #[serde(rename = "Delta_hat", default, skip_serializing_if = "Option::is_none")]
    pub uniform_delta_hat: Option<f64>,
}

impl PredictedStep {
    fn new(o: StepOutput, chosen: &[bool]) -> Self {
        Self {
            x: chosen.iter().map(|&c| c as u8).collect(),
            x_hat: o.x_hat,
            r_hat: o.r_hat,
            delta_hat: o.delta_hat,
            uniform_delta_hat: o.uniform_delta_hat,
        }
    }
}

/// Model rollout; `steps[0]` is the initial state, mirroring [`Trajectory`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedTrajectory {
    pub steps: Vec<PredictedStep>,
    pub final_solution: Solution,
    pub cleanup_used: bool,
}

impl PredictedTrajectory {
    pub fn n_updates(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }
}

fn decode(rule: DecodeRule, threshold: f64, x_hat: &[f64], chosen: &mut [bool], eligible: &[bool]) {
    match rule {
        DecodeRule::Threshold => {
            for e in 0..chosen.len() {
                if eligible[e] && x_hat[e] >= threshold {
                    chosen[e] = true;
                }
            }
        }
        DecodeRule::Argmax => {
            let mut best: Option<usize> = None;
            for e in (0..chosen.len()).filter(|&e| eligible[e]) {
                if best.is_none_or(|b| x_hat[e] > x_hat[b]) {
                    best = Some(e);
                }
            }
            if let Some(e) = best {
                chosen[e] = true;
            }
        }
    }
}

fn initial_step(weights: &ModelWeights, instance: &HittingSetInstance, chosen: &[bool]) -> PredictedStep {
    PredictedStep {
        x: chosen.iter().map(|&c| c as u8).collect(),
        x_hat: chosen.iter().map(|&c| c as u8 as f64).collect(),
        r_hat: instance.weights().to_vec(),
        delta_hat: vec![0.0; instance.n_sets()],
        uniform_delta_hat: weights.uniform.then_some(0.0),
    }
}

/// Runs the network over an instance until every set is hit or the step cap
/// is reached. Infeasible end states are completed by [`greedy_cleanup`].
pub fn rollout(
    weights: &ModelWeights,
    instance: &HittingSetInstance,
    mode: RolloutMode<'_>,
    config: &RolloutConfig,
) -> Result<PredictedTrajectory> {
    let net = Network::new(weights)?;
    let n = instance.n_elements();
    let cap = config.max_steps.unwrap_or(n.max(1));
    let threshold = weights.decode_threshold;

    let (steps, chosen, r) = match mode {
        RolloutMode::FreeRun => {
            let mut chosen: Vec<bool> = instance
                .weights()
                .iter()
                .map(|&w| w <= DEFAULT_TIGHT_TOL)
                .collect();
            let mut r = instance.weights().to_vec();
            let mut steps = vec![initial_step(weights, instance, &chosen)];
            let mut set_active = active_sets(instance, &chosen);
            let mut t = 0;
            while set_active.iter().any(|&a| a) && t < cap {
                let degrees = active_degrees(instance, &set_active);
                let out = forward_with(
                    &net,
                    instance,
                    StepInput {
                        r: &r,
                        degrees: &degrees,
                        chosen: &chosen,
                        set_active: &set_active,
                    },
                )?;
                let eligible: Vec<bool> =
                    (0..n).map(|e| !chosen[e] && degrees[e] >= 1).collect();
                decode(config.decode, threshold, &out.x_hat, &mut chosen, &eligible);
                for e in (0..n).filter(|&e| eligible[e]) {
                    r[e] = out.r_hat[e].clamp(0.0, instance.weights()[e]);
                }
                steps.push(PredictedStep::new(out, &chosen));
                set_active = active_sets(instance, &chosen);
                t += 1;
            }
            (steps, chosen, r)
        }
        RolloutMode::TeacherForced(trajectory) => {
            check_trajectory(instance, trajectory)?;
            let first = &trajectory.steps[0];
            let mut chosen: Vec<bool> = first.x.iter().map(|&v| v == 1).collect();
            let mut r = first.r.clone();
            let mut steps = vec![initial_step(weights, instance, &chosen)];
            for (k, pair) in trajectory.steps.windows(2).enumerate() {
                if k >= cap {
                    break;
                }
                let prev = &pair[0];
                let prev_chosen: Vec<bool> = prev.x.iter().map(|&v| v == 1).collect();
                let set_active = active_sets(instance, &prev_chosen);
                let degrees = active_degrees(instance, &set_active);
                let out = forward_with(
                    &net,
                    instance,
                    StepInput {
                        r: &prev.r,
                        degrees: &degrees,
                        chosen: &prev_chosen,
                        set_active: &set_active,
                    },
                )?;
                let eligible: Vec<bool> =
                    (0..n).map(|e| !prev_chosen[e] && degrees[e] >= 1).collect();
                chosen = prev_chosen;
                decode(config.decode, threshold, &out.x_hat, &mut chosen, &eligible);
                r = prev.r.clone();
                for e in (0..n).filter(|&e| eligible[e]) {
                    r[e] = out.r_hat[e].clamp(0.0, instance.weights()[e]);
                }
                steps.push(PredictedStep::new(out, &chosen));
            }
            (steps, chosen, r)
        }
    };

    let partial = Solution::new(instance, (0..n).filter(|&e| chosen[e]).collect())?;
    let set_active = active_sets(instance, &chosen);
    let cleanup_used = set_active.iter().any(|&a| a);
    let final_solution = if cleanup_used {
        let degrees = active_degrees(instance, &set_active);
        greedy_cleanup(instance, &partial, &r, &degrees)?
    } else {
        partial
    };
    Ok(PredictedTrajectory {
        steps,
        final_solution,
        cleanup_used,
    })
}

fn check_trajectory(instance: &HittingSetInstance, trajectory: &Trajectory) -> Result<()> {
    let (n, m) = (instance.n_elements(), instance.n_sets());
    let Some(first) = trajectory.steps.first() else {
        return Err(Error::Mismatch("trajectory has no steps".into()));
    };
    for (i, s) in trajectory.steps.iter().enumerate() {
        if s.x.len() != n || s.r.len() != n || s.delta.len() != m {
            return Err(Error::Mismatch(format!(
                "trajectory step {i} does not match instance {} ({n} elements, {m} sets)",
                instance.id()
            )));
        }
    }
    if first.r != instance.weights() {
        return Err(Error::Mismatch(format!(
            "trajectory starts from residuals other than the weights of {}",
            instance.id()
        )));
    }
    Ok(())
}

/// Largest deviations between the analytic model and the engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationReport {
    pub id: String,
    pub hidden_dim: usize,
    pub uniform: bool,
    pub max_err_x: f64,
    pub max_err_r: f64,
    pub max_err_delta: f64,
    #[serde(rename = "max_err_Delta")]
    pub max_err_uniform_delta: f64,
    pub engine_steps: usize,
    pub model_steps: usize,
    pub solutions_equal: bool,
    pub passed: bool,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Runs the engine and the analytic model in lockstep on `instance`.
///
/// Weights are first divided by their maximum so that all residual ratios are
/// at most 1; reported residual and increment errors are scaled back. Hitting
/// set instances use the uniform rule, cover instances the per-set rule, both
/// with exact tightness. Decisions are decoded with the threshold rule since
/// the algorithm adds every tight element at once.
pub fn verify_replication(
    instance: &HittingSetInstance,
    hidden_dim: usize,
    tol: f64,
) -> Result<ReplicationReport> {
    let scale = instance.weights().iter().cloned().fold(0.0, f64::max);
    let scaled = if scale > 0.0 {
        instance.scaled(1.0 / scale)
    } else {
        instance.clone()
    };
    let unscale = if scale > 0.0 { scale } else { 1.0 };
    let config = AlgoConfig {
        uniform: instance.task() == Task::Mhs,
        ..AlgoConfig::default()
    };
    let trajectory = run_general(&scaled, &config)?;
    let weights = analytic_weights(hidden_dim, config.uniform)?;
    let predicted = rollout(
        &weights,
        &scaled,
        RolloutMode::FreeRun,
        &RolloutConfig {
            decode: DecodeRule::Threshold,
            max_steps: None,
        },
    )?;

    let mut report = ReplicationReport {
        id: instance.id().to_string(),
        hidden_dim,
        uniform: config.uniform,
        max_err_x: 0.0,
        max_err_r: 0.0,
        max_err_delta: 0.0,
        max_err_uniform_delta: 0.0,
        engine_steps: trajectory.n_updates(),
        model_steps: predicted.n_updates(),
        solutions_equal: false,
        passed: false,
    };
    for (truth, pred) in trajectory.steps.iter().zip(&predicted.steps) {
        let decoded: Vec<f64> = pred.x.iter().map(|&v| v as f64).collect();
        let x: Vec<f64> = truth.x.iter().map(|&v| v as f64).collect();
        report.max_err_x = report.max_err_x.max(max_abs_diff(&decoded, &x));
        report.max_err_r = report.max_err_r.max(max_abs_diff(&pred.r_hat, &truth.r) * unscale);
        report.max_err_delta = report
            .max_err_delta
            .max(max_abs_diff(&pred.delta_hat, &truth.delta) * unscale);
        if let (Some(a), Some(b)) = (pred.uniform_delta_hat, truth.uniform_delta) {
            report.max_err_uniform_delta =
                report.max_err_uniform_delta.max((a - b).abs() * unscale);
        }
    }
    report.solutions_equal = !predicted.cleanup_used
        && predicted.final_solution.chosen == trajectory.final_solution.chosen;
    report.passed = report.solutions_equal
        && report.engine_steps == report.model_steps
        && report.max_err_x <= tol
        && report.max_err_r <= tol
        && report.max_err_delta <= tol
        && report.max_err_uniform_delta <= tol;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_general;
    use crate::instance::from_vertex_cover;
    use proptest::prelude::*;
    use rand::Rng;

    fn triangle() -> HittingSetInstance {
        from_vertex_cover(3, &[(0, 1), (1, 2), (0, 2)], vec![1.0, 1.0, 1.0]).unwrap()
    }

    fn random_instance(seed: u64, n: usize, task: Task) -> HittingSetInstance {
        let mut rng = rng_for(seed);
        let m = rng.gen_range(1..2 * n);
        let sets: Vec<Vec<usize>> = (0..m)
            .map(|_| {
                let k = rng.gen_range(1..=3.min(n));
                (0..k).map(|_| rng.gen_range(0..n)).collect()
            })
            .collect();
        let weights = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        HittingSetInstance::new(format!("r{seed}"), task, weights, sets).unwrap()
    }

    #[test]
    fn edge_message_divides_residual_by_degree() {
        let w = analytic_weights(1, false).unwrap();
        let net = Network::new(&w).unwrap();
        let msg = net.edge_message(&[1f64.ln()], &[2f64.ln()]);
        assert!((msg[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn decoders_read_coordinate_zero() {
        for h in [1, 4, 32] {
            let w = analytic_weights(h, true).unwrap();
            let net = Network::new(&w).unwrap();
            let mut v = vec![0.0; h];
            v[0] = 0.375;
            assert_eq!(net.q_r.apply(&v)[0], 0.375);
            assert_eq!(net.q_delta.apply(&v)[0], 0.375);
            assert_eq!(net.q_big_delta.apply(&v)[0], 0.375);
            assert!(net.decode_x(&v) < 1e-100);
            v[0] = 0.0;
            assert_eq!(net.decode_x(&v), 1.0);
        }
    }

    #[test]
    fn single_element_step() {
        let inst = HittingSetInstance::new("one", Task::Mhs, vec![1.0], vec![vec![0]]).unwrap();
        let w = analytic_weights(4, false).unwrap();
        let out = forward_step(
            &w,
            &inst,
            StepInput {
                r: &[1.0],
                degrees: &[1],
                chosen: &[false],
                set_active: &[true],
            },
        )
        .unwrap();
        assert!((out.delta_hat[0] - 1.0).abs() < 1e-15);
        assert!(out.r_hat[0].abs() < 1e-15);
        assert!(out.x_hat[0] >= w.decode_threshold);
    }

    #[test]
    fn triangle_step_matches_engine() {
        let inst = triangle();
        let traj = run_general(&inst, &AlgoConfig::default()).unwrap();
        let w = analytic_weights(8, false).unwrap();
        let out = forward_step(
            &w,
            &inst,
            StepInput {
                r: &[1.0; 3],
                degrees: &[2; 3],
                chosen: &[false; 3],
                set_active: &[true; 3],
            },
        )
        .unwrap();
        let step = &traj.steps[1];
        assert!(max_abs_diff(&out.r_hat, &step.r) <= 1e-9);
        assert!(max_abs_diff(&out.delta_hat, &step.delta) <= 1e-9);
        for (p, &x) in out.x_hat.iter().zip(&step.x) {
            assert_eq!((*p >= 0.5) as u8, x);
        }
    }

    #[test]
    fn random_weights_give_probabilities() {
        for seed in 0..20 {
            let inst = random_instance(seed, 10, Task::Mhs);
            let w = ModelWeights::random(16, seed % 2 == 0, seed).unwrap();
            let n = inst.n_elements();
            let active = vec![true; inst.n_sets()];
            let degrees = active_degrees(&inst, &active);
            let out = forward_step(
                &w,
                &inst,
                StepInput {
                    r: inst.weights(),
                    degrees: &degrees,
                    chosen: &vec![false; n],
                    set_active: &active,
                },
            )
            .unwrap();
            assert!(out.x_hat.iter().all(|p| (0.0..=1.0).contains(p)));
            assert!(out.r_hat.iter().chain(&out.delta_hat).all(|v| v.is_finite()));
            assert_eq!(out.uniform_delta_hat.is_some(), w.uniform);
        }
    }

    #[test]
    fn all_masked_is_an_error() {
        let inst = triangle();
        let w = analytic_weights(1, false).unwrap();
        let err = forward_step(
            &w,
            &inst,
            StepInput {
                r: &[1.0; 3],
                degrees: &[0; 3],
                chosen: &[true; 3],
                set_active: &[false; 3],
            },
        );
        assert!(matches!(err, Err(Error::EmptyStep)));
    }

    #[test]
    fn path_uniform_free_run() {
        let inst = from_vertex_cover(3, &[(0, 1), (1, 2)], vec![1.0; 3]).unwrap();
        let w = analytic_weights(2, true).unwrap();
        for decode in [DecodeRule::Threshold, DecodeRule::Argmax] {
            let pred = rollout(
                &w,
                &inst,
                RolloutMode::FreeRun,
                &RolloutConfig {
                    decode,
                    max_steps: None,
                },
            )
            .unwrap();
            assert_eq!(pred.final_solution.chosen, vec![1]);
            assert_eq!(pred.n_updates(), 1);
            assert!(!pred.cleanup_used);
        }
    }

    #[test]
    fn zero_weights_need_no_steps() {
        let inst = from_vertex_cover(3, &[(0, 1), (1, 2)], vec![0.0; 3]).unwrap();
        let w = analytic_weights(1, false).unwrap();
        let pred = rollout(&w, &inst, RolloutMode::FreeRun, &RolloutConfig::for_task(Task::Mvc))
            .unwrap();
        assert_eq!(pred.final_solution.chosen, vec![0, 1, 2]);
        assert_eq!(pred.n_updates(), 0);
    }

    #[test]
    fn triangle_replicates() {
        let report = verify_replication(&triangle(), 4, 1e-9).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.max_err_r <= 1e-9 && report.max_err_delta <= 1e-9);
        let halved = verify_replication(&triangle().scaled(0.5), 4, 1e-9).unwrap();
        assert!(halved.passed, "{halved:?}");
    }

    #[test]
    fn teacher_forcing_with_analytic_weights_reproduces_trajectory() {
        for seed in 0..30 {
            let task = [Task::Mvc, Task::Msc, Task::Mhs][seed as usize % 3];
            let inst = random_instance(seed, 12, task);
            let config = AlgoConfig {
                uniform: task == Task::Mhs,
                ..AlgoConfig::default()
            };
            let traj = run_general(&inst, &config).unwrap();
            let w = analytic_weights(3, config.uniform).unwrap();
            let cfg = RolloutConfig {
                decode: DecodeRule::Threshold,
                max_steps: None,
            };
            let pred = rollout(&w, &inst, RolloutMode::TeacherForced(&traj), &cfg).unwrap();
            assert_eq!(pred.steps.len(), traj.steps.len());
            for (p, s) in pred.steps.iter().zip(&traj.steps) {
                assert!(max_abs_diff(&p.r_hat, &s.r) <= 1e-9);
                assert!(max_abs_diff(&p.delta_hat, &s.delta) <= 1e-9);
            }
            assert_eq!(pred.final_solution, traj.final_solution);
        }
    }

    #[test]
    fn teacher_forcing_rejects_foreign_trajectory() {
        let traj = run_general(&triangle(), &AlgoConfig::default()).unwrap();
        let other = random_instance(3, 5, Task::Mhs);
        let w = analytic_weights(1, false).unwrap();
        let err = rollout(
            &w,
            &other,
            RolloutMode::TeacherForced(&traj),
            &RolloutConfig::for_task(Task::Mhs),
        );
        assert!(matches!(err, Err(Error::Mismatch(_))));
    }

    #[test]
    fn validation_catches_bad_shapes() {
        let mut w = analytic_weights(2, false).unwrap();
        w.tensors.insert("q_x.bias".into(), Tensor::zeros(1, 2));
        assert!(w.validate().is_err());
        let mut w = analytic_weights(2, false).unwrap();
        w.tensors.remove("g_u.weight");
        assert!(w.validate().is_err());
        let mut w = analytic_weights(2, false).unwrap();
        w.tensor_mut("f_r.bias").data[1] = f64::NAN;
        assert!(w.validate().is_err());
        assert!(analytic_weights(0, false).is_err());
    }

    fn brute_min(
        inst: &HittingSetInstance,
        msgs: &[Vec<f64>],
        elem: &[bool],
        set_active: &[bool],
        dim: usize,
    ) -> Vec<Option<Vec<f64>>> {
        (0..inst.n_sets())
            .map(|t| {
                if !set_active[t] {
                    return Some(vec![0.0; dim]);
                }
                let mut out: Option<Vec<f64>> = None;
                for e in 0..inst.n_elements() {
                    if elem[e] && inst.sets()[t].contains(&e) {
                        let v = out.get_or_insert(vec![f64::INFINITY; dim]);
                        for k in 0..dim {
                            v[k] = v[k].min(msgs[e][k]);
                        }
                    }
                }
                out
            })
            .collect()
    }

    proptest! {
        #[test]
        fn aggregations_match_brute_force(seed in 0u64..10_000, dim in 1usize..5) {
            let inst = random_instance(seed, 9, Task::Mhs);
            let mut rng = rng_for(seed ^ 0xABCD);
            let n = inst.n_elements();
            let elem: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.8)).collect();
            let set_active: Vec<bool> = inst.sets().iter()
                .map(|s| rng.gen_bool(0.7) && s.iter().any(|&e| elem[e])).collect();
            let msgs: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect();
            let fast = min_aggregate(&inst, &msgs, &elem, &set_active, dim).unwrap();
            let slow = brute_min(&inst, &msgs, &elem, &set_active, dim);
            for (f, s) in fast.iter().zip(&slow) {
                prop_assert_eq!(Some(f.clone()), s.clone());
            }
            let sums = sum_aggregate(&inst, &fast, &elem, &set_active, dim);
            for e in 0..n {
                for k in 0..dim {
                    let mut want = 0.0;
                    if elem[e] {
                        for t in 0..inst.n_sets() {
                            if set_active[t] && inst.sets()[t].contains(&e) {
                                want += fast[t][k];
                            }
                        }
                    }
                    prop_assert!((sums[e][k] - want).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn hidden_dim_does_not_change_rollouts(seed in 0u64..5_000) {
            let task = [Task::Mvc, Task::Msc, Task::Mhs][(seed % 3) as usize];
            let inst = random_instance(seed, 10, task);
            let uniform = task == Task::Mhs;
            let cfg = RolloutConfig::for_task(task);
            let base = rollout(&analytic_weights(1, uniform).unwrap(), &inst, RolloutMode::FreeRun, &cfg).unwrap();
            for h in [4, 32] {
                let other = rollout(&analytic_weights(h, uniform).unwrap(), &inst, RolloutMode::FreeRun, &cfg).unwrap();
                prop_assert_eq!(&other, &base);
            }
        }

        #[test]
        fn replication_on_random_instances(seed in 0u64..5_000) {
            let task = [Task::Mvc, Task::Msc, Task::Mhs][(seed % 3) as usize];
            let inst = random_instance(seed, 10, task);
            let report = verify_replication(&inst, 2, 1e-6).unwrap();
            prop_assert!(report.passed, "{:?}", report);
        }

        #[test]
        fn permutation_equivariance(seed in 0u64..5_000) {
            let inst = random_instance(seed, 8, Task::Mhs);
            let n = inst.n_elements();
            let m = inst.n_sets();
            let mut rng = rng_for(seed + 1);
            let mut perm: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
            let mut set_perm: Vec<usize> = (0..m).collect();
            rand::seq::SliceRandom::shuffle(set_perm.as_mut_slice(), &mut rng);
            // element e moves to perm[e]; set t moves to set_perm[t]
            let mut weights = vec![0.0; n];
            for e in 0..n {
                weights[perm[e]] = inst.weights()[e];
            }
            let mut sets = vec![Vec::new(); m];
            for t in 0..m {
                sets[set_perm[t]] = inst.sets()[t].iter().map(|&e| perm[e]).collect();
            }
            let moved = HittingSetInstance::new("p", Task::Mhs, weights, sets).unwrap();
            for uniform in [false, true] {
                let w = ModelWeights::random(6, uniform, seed).unwrap();
                let chosen: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.2)).collect();
                let active = active_sets(&inst, &chosen);
                if !active.iter().any(|&a| a) {
                    continue;
                }
                let degrees = active_degrees(&inst, &active);
                let out = forward_step(&w, &inst, StepInput {
                    r: inst.weights(), degrees: &degrees, chosen: &chosen, set_active: &active,
                }).unwrap();
                let mut chosen_p = vec![false; n];
                for e in 0..n { chosen_p[perm[e]] = chosen[e]; }
                let active_p = active_sets(&moved, &chosen_p);
                let degrees_p = active_degrees(&moved, &active_p);
                let out_p = forward_step(&w, &moved, StepInput {
                    r: moved.weights(), degrees: &degrees_p, chosen: &chosen_p, set_active: &active_p,
                }).unwrap();
                for e in 0..n {
                    prop_assert!((out.x_hat[e] - out_p.x_hat[perm[e]]).abs() <= 1e-12);
                    prop_assert!((out.r_hat[e] - out_p.r_hat[perm[e]]).abs() <= 1e-12);
                }
                for t in 0..m {
                    prop_assert!((out.delta_hat[t] - out_p.delta_hat[set_perm[t]]).abs() <= 1e-12);
                }
                match (out.uniform_delta_hat, out_p.uniform_delta_hat) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12),
                    (None, None) => {}
                    _ => prop_assert!(false),
                }
            }
        }

        #[test]
        fn decisions_are_monotone_in_free_runs(seed in 0u64..5_000) {
            let task = [Task::Mvc, Task::Msc, Task::Mhs][(seed % 3) as usize];
            let inst = random_instance(seed, 10, task);
            let w = ModelWeights::random(8, task == Task::Mhs, seed).unwrap();
            let pred = rollout(&w, &inst, RolloutMode::FreeRun, &RolloutConfig::for_task(task)).unwrap();
            for pair in pred.steps.windows(2) {
                for e in 0..inst.n_elements() {
                    prop_assert!(pair[1].x[e] >= pair[0].x[e]);
                    if pair[0].x[e] == 1 {
                        prop_assert_eq!(pair[1].x_hat[e], 1.0);
                    }
                }
            }
            let last = &pred.steps.last().unwrap().x;
            let final_mask = pred.final_solution.mask(inst.n_elements());
            for e in 0..inst.n_elements() {
                prop_assert!(last[e] == 0 || final_mask[e]);
            }
            prop_assert!(is_feasible(&inst, &pred.final_solution));
        }
    }

    fn is_feasible(inst: &HittingSetInstance, sol: &Solution) -> bool {
        crate::instance::is_hitting_set(inst, &sol.chosen).unwrap()
    }
}
