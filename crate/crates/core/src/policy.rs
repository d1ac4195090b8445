//! Recognition and decision policies.
//!
//! Both are row-stochastic tables: recognition maps observation classes to
//! representation tokens, decision maps tokens to actions.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::env::{check_len, check_row, FiniteEnv};
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RecognitionVariant {
    Tabular,
    /// Correct token with probability `1 - delta`, uniform token otherwise.
    NoisyIdentity { delta: f64 },
    /// Token is the time phase (initial / odd / even step).
    TimestampParity,
    /// Deterministic relabelling produced by a pre-filter.
    FilterComposed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMode {
    /// Uses the per-state wrong-action probabilities `δ/3 + δ/2` and
    /// `2δ/3 + δ/2` of the three-state worked example verbatim (first-order
    /// combination of recognition and decision error).
    FirstOrder,
    /// Composes recognition noise with a uniform action mixture of weight `δ` exactly.
    ExactComposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecisionVariant {
    Tabular,
    DeltaOptimal { delta: f64, base: Vec<usize>, mode: DeltaMode },
    Mixture { p: f64 },
}

/// Memoryless recognition policy `ρ′ ∈ Δ(Z)^X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRecognition", into = "RawRecognition")]
pub struct RecognitionPolicy {
    n_tokens: usize,
    kernel: Vec<Vec<f64>>,
    variant: RecognitionVariant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRecognition {
    pub n_obs: usize,
    pub n_tokens: usize,
    pub kernel: Vec<Vec<f64>>,
    #[serde(default = "tabular_recognition")]
    pub variant: RecognitionVariant,
}

fn tabular_recognition() -> RecognitionVariant {
    RecognitionVariant::Tabular
}

impl TryFrom<RawRecognition> for RecognitionPolicy {
    type Error = Error;

    fn try_from(raw: RawRecognition) -> Result<Self> {
        check_len("kernel", raw.n_obs, raw.kernel.len())?;
        RecognitionPolicy::new(raw.n_tokens, raw.kernel, raw.variant)
    }
}

impl From<RecognitionPolicy> for RawRecognition {
    fn from(p: RecognitionPolicy) -> Self {
        RawRecognition { n_obs: p.kernel.len(), n_tokens: p.n_tokens, kernel: p.kernel, variant: p.variant }
    }
}

fn validate_kernel(n_cols: usize, kernel: &[Vec<f64>]) -> Result<()> {
    if kernel.is_empty() || n_cols == 0 {
        return Err(Error::Invalid(String::from("policy kernel must be non-empty")));
    }
    for (i, row) in kernel.iter().enumerate() {
        check_len(&format!("kernel[{i}]"), n_cols, row.len())?;
        check_row(|| format!("kernel[{i}]"), row)?;
    }
    Ok(())
}

fn one_hot(n: usize, i: usize) -> Vec<f64> {
    let mut row = vec![0.0; n];
    row[i] = 1.0;
    row
}

impl RecognitionPolicy {
    pub fn new(n_tokens: usize, kernel: Vec<Vec<f64>>, variant: RecognitionVariant) -> Result<Self> {
        validate_kernel(n_tokens, &kernel)?;
        Ok(RecognitionPolicy { n_tokens, kernel, variant })
    }

    pub fn identity(n: usize) -> Self {
        RecognitionPolicy {
            n_tokens: n,
            kernel: (0..n).map(|i| one_hot(n, i)).collect(),
            variant: RecognitionVariant::Tabular,
        }
    }

    /// Deterministic map from observation class to token.
    pub fn from_map(n_tokens: usize, map: &[usize], variant: RecognitionVariant) -> Result<Self> {
        if let Some(&z) = map.iter().find(|&&z| z >= n_tokens) {
            return Err(Error::DimensionMismatch { axis: "tokens", left: z + 1, right: n_tokens });
        }
        Self::new(n_tokens, map.iter().map(|&z| one_hot(n_tokens, z)).collect(), variant)
    }

    /// With probability `1 − δ` the token equals the class, otherwise it is
    /// uniform over all `n` tokens.
    pub fn noisy_identity(n: usize, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::OutOfRange { name: "delta", value: delta, range: "[0, 1]" });
        }
        let off = delta / n as f64;
        let kernel = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 - delta + off } else { off }).collect())
            .collect();
        Ok(RecognitionPolicy { n_tokens: n, kernel, variant: RecognitionVariant::NoisyIdentity { delta } })
    }

    pub fn n_obs(&self) -> usize {
        self.kernel.len()
    }

    pub fn n_tokens(&self) -> usize {
        self.n_tokens
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    pub fn row(&self, obs: usize) -> &[f64] {
        &self.kernel[obs]
    }

    pub fn variant(&self) -> &RecognitionVariant {
        &self.variant
    }

    /// Per-state token distribution `Σ_x ω(x|s) ρ′(z|x)`.
    pub fn state_token_kernel(&self, env: &FiniteEnv) -> Result<Vec<Vec<f64>>> {
        if env.n_obs() != self.n_obs() {
            return Err(Error::DimensionMismatch { axis: "observations", left: env.n_obs(), right: self.n_obs() });
        }
        Ok((0..env.n_states())
            .map(|s| {
                let mut row = vec![0.0; self.n_tokens];
                for (x, px) in env.omega(s).iter().enumerate() {
                    if *px == 0.0 {
                        continue;
                    }
                    for (z, pz) in self.kernel[x].iter().enumerate() {
                        row[z] += px * pz;
                    }
                }
                row
            })
            .collect())
    }
}

/// Decision policy `π ∈ Δ(A)^Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDecision", into = "RawDecision")]
pub struct DecisionPolicy {
    n_actions: usize,
    kernel: Vec<Vec<f64>>,
    variant: DecisionVariant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDecision {
    pub n_tokens: usize,
    pub n_actions: usize,
    pub kernel: Vec<Vec<f64>>,
    #[serde(default = "tabular_decision")]
    pub variant: DecisionVariant,
}

fn tabular_decision() -> DecisionVariant {
    DecisionVariant::Tabular
}

impl TryFrom<RawDecision> for DecisionPolicy {
    type Error = Error;

    fn try_from(raw: RawDecision) -> Result<Self> {
        check_len("kernel", raw.n_tokens, raw.kernel.len())?;
        DecisionPolicy::new(raw.n_actions, raw.kernel, raw.variant)
    }
}

impl From<DecisionPolicy> for RawDecision {
    fn from(p: DecisionPolicy) -> Self {
        RawDecision { n_tokens: p.kernel.len(), n_actions: p.n_actions, kernel: p.kernel, variant: p.variant }
    }
}

impl DecisionPolicy {
    pub fn new(n_actions: usize, kernel: Vec<Vec<f64>>, variant: DecisionVariant) -> Result<Self> {
        validate_kernel(n_actions, &kernel)?;
        Ok(DecisionPolicy { n_actions, kernel, variant })
    }

    pub fn deterministic(n_actions: usize, actions: &[usize]) -> Result<Self> {
        if let Some(&a) = actions.iter().find(|&&a| a >= n_actions) {
            return Err(Error::DimensionMismatch { axis: "actions", left: a + 1, right: n_actions });
        }
        Self::new(n_actions, actions.iter().map(|&a| one_hot(n_actions, a)).collect(), DecisionVariant::Tabular)
    }

    pub fn uniform(n_tokens: usize, n_actions: usize) -> Self {
        let row = vec![1.0 / n_actions as f64; n_actions];
        DecisionPolicy { n_actions, kernel: vec![row; n_tokens], variant: DecisionVariant::Tabular }
    }

    /// Forced random actions: each row becomes `(1 − p)·π(z) + p·Uniform(A)`.
    pub fn mixture(&self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange { name: "p", value: p, range: "[0, 1]" });
        }
        let u = p / self.n_actions as f64;
        let kernel = self.kernel.iter().map(|row| row.iter().map(|q| (1.0 - p) * q + u).collect()).collect();
        Ok(DecisionPolicy { n_actions: self.n_actions, kernel, variant: DecisionVariant::Mixture { p } })
    }

    /// δ-optimal decision policy around the deterministic `base` table.
    ///
    /// `ExactComposition` is the action mixture with weight `δ`. `FirstOrder`
    /// instead targets per-state wrong-action probabilities equal to the
    /// recognition error plus `δ/2` and solves for the token-level table that
    /// realises them through `rho`. This needs two actions, `|Z| = |S|` with
    /// token `i` standing for state `i`, and an invertible state-token kernel.
    pub fn delta_optimal(
        env: &FiniteEnv,
        rho: &RecognitionPolicy,
        base: &[usize],
        delta: f64,
        mode: DeltaMode,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::OutOfRange { name: "delta", value: delta, range: "[0, 1]" });
        }
        let greedy = Self::deterministic(env.n_actions(), base)?;
        if greedy.n_tokens() != rho.n_tokens() {
            return Err(Error::DimensionMismatch { axis: "tokens", left: rho.n_tokens(), right: greedy.n_tokens() });
        }
        let variant = DecisionVariant::DeltaOptimal { delta, base: base.to_vec(), mode };
        let kernel = match mode {
            DeltaMode::ExactComposition => greedy.mixture(delta)?.kernel,
            DeltaMode::FirstOrder => {
                if env.n_actions() != 2 {
                    return Err(Error::Invalid(String::from("first-order δ-optimal policy needs exactly two actions")));
                }
                if rho.n_tokens() != env.n_states() {
                    return Err(Error::DimensionMismatch { axis: "tokens vs states", left: rho.n_tokens(), right: env.n_states() });
                }
                let k = rho.state_token_kernel(env)?;
                // target[s][a]: probability of action a in state s
                let target: Vec<Vec<f64>> = (0..env.n_states())
                    .map(|s| {
                        let right = base[s];
                        let rec_wrong: f64 = (0..rho.n_tokens()).filter(|&z| base[z] != right).map(|z| k[s][z]).sum();
                        let wrong = rec_wrong + delta / 2.0;
                        let mut row = vec![wrong; 2];
                        row[right] = 1.0 - wrong;
                        row
                    })
                    .collect();
                let mut kernel = linalg::solve_many(&k, &target)?;
                for row in &mut kernel {
                    for q in row.iter_mut() {
                        if *q < -1e-9 || *q > 1.0 + 1e-9 {
                            return Err(Error::Invalid(String::from(
                                "first-order δ-optimal policy is not realisable for this δ",
                            )));
                        }
                        *q = q.clamp(0.0, 1.0);
                    }
                    let sum: f64 = row.iter().sum();
                    row.iter_mut().for_each(|q| *q /= sum);
                }
                kernel
            }
        };
        Self::new(env.n_actions(), kernel, variant)
    }

    pub fn n_tokens(&self) -> usize {
        self.kernel.len()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    pub fn row(&self, token: usize) -> &[f64] {
        &self.kernel[token]
    }

    pub fn variant(&self) -> &DecisionVariant {
        &self.variant
    }

    /// Greedy action table if the policy is deterministic.
    pub fn as_deterministic(&self) -> Option<Vec<usize>> {
        self.kernel.iter().map(|row| row.iter().position(|q| *q == 1.0)).collect()
    }
}
