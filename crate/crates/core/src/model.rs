//! The q-state Potts model on a finite Cayley ball.
//!
//! Energies count monochromatic edges, `H(σ) = -J · #{⟨x,y⟩ : σ(x) = σ(y)}`,
//! and the finite-volume measure on `V_n` carries boundary fields on the
//! outer sphere only:
//!
//! ```text
//! μ_n(σ) ∝ exp(-β H_n(σ) + Σ_{x ∈ W_n} h_{σ(x), x})
//! ```
//!
//! Fields live in `R^{q-1}`: state `q - 1` (zero-based) is the reference
//! state whose field component is fixed at 0. Since `exp(-β H) = θ^{#mono}`
//! with `θ = exp(Jβ)`, every quantity here depends on the couplings only
//! through `θ`.
//!
//! Exhaustive enumeration ([`finite_volume_measure`], [`check_consistency`])
//! is an exact oracle for the boundary-field recursion [`propagate_fields`].

use rand::Rng;
use thiserror::Error;

use crate::exec::Execution;
use crate::numeric::{log_sum_exp, neumaier_sum, softmax};
use crate::tree::{FiniteTree, TreeError};

/// Largest configuration space the enumeration routines will walk.
pub const MAX_CONFIGURATIONS: u64 = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("field vector has {got} components, expected q - 1 = {expected}")]
    FieldLength { expected: usize, got: usize },
    #[error("field vector has a non-finite component")]
    NonFiniteField,
    #[error("expected {expected} field vectors, got {got}")]
    FieldCount { expected: usize, got: usize },
    #[error("configuration covers {got} vertices, tree has {expected}")]
    IncompleteConfiguration { expected: usize, got: usize },
    #[error("spin {spin} at vertex {vertex} is not a state in 0..{q}")]
    InvalidSpin { vertex: usize, spin: usize, q: usize },
    #[error("enumeration of {q}^{vertices} configurations exceeds the limit of {MAX_CONFIGURATIONS}")]
    EnumerationTooLarge { q: usize, vertices: usize },
    #[error("recursion map left its domain: {0}")]
    Domain(String),
    #[error("non-finite weight in enumeration")]
    NonFiniteWeight,
    #[error("consistency needs depth >= 1")]
    DepthTooSmall,
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Order, state count and couplings. `theta = exp(coupling * beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub k: usize,
    pub q: usize,
    pub coupling: f64,
    pub beta: f64,
    pub theta: f64,
}

impl ModelParams {
    pub fn from_coupling(k: usize, q: usize, coupling: f64, beta: f64) -> Result<Self, ModelError> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(ModelError::InvalidParams(format!("beta must be positive, got {beta}")));
        }
        if !coupling.is_finite() {
            return Err(ModelError::InvalidParams(format!(
                "coupling must be finite, got {coupling}"
            )));
        }
        Self::build(k, q, coupling, beta, (coupling * beta).exp())
    }

    /// Activity given directly; back-fills `beta = 1`, `coupling = ln θ`.
    pub fn from_theta(k: usize, q: usize, theta: f64) -> Result<Self, ModelError> {
        Self::build(k, q, theta.ln(), 1.0, theta)
    }

    fn build(k: usize, q: usize, coupling: f64, beta: f64, theta: f64) -> Result<Self, ModelError> {
        if k < 1 {
            return Err(ModelError::InvalidParams(format!("k must be >= 1, got {k}")));
        }
        if q < 2 {
            return Err(ModelError::InvalidParams(format!("q must be >= 2, got {q}")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(ModelError::InvalidParams(format!(
                "theta must be positive and finite, got {theta}"
            )));
        }
        Ok(Self {
            k,
            q,
            coupling,
            beta,
            theta,
        })
    }

    pub fn ln_theta(&self) -> f64 {
        self.theta.ln()
    }

    /// `J < 0`, equivalently `θ < 1`.
    pub fn is_antiferromagnetic(&self) -> bool {
        self.theta < 1.0
    }
}

/// Boundary field `(h_1, ..., h_{q-1})`; the reference component is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector(Vec<f64>);

impl FieldVector {
    pub fn new(components: Vec<f64>) -> Result<Self, ModelError> {
        if components.iter().any(|c| !c.is_finite()) {
            return Err(ModelError::NonFiniteField);
        }
        Ok(Self(components))
    }

    pub fn zeros(q: usize) -> Self {
        Self(vec![0.0; q.saturating_sub(1)])
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Field felt by state `s`, with the reference state at 0.
    pub fn state_field(&self, s: usize) -> f64 {
        self.0.get(s).copied().unwrap_or(0.0)
    }

    fn check_len(&self, q: usize) -> Result<(), ModelError> {
        if self.0.len() == q - 1 {
            Ok(())
        } else {
            Err(ModelError::FieldLength {
                expected: q - 1,
                got: self.0.len(),
            })
        }
    }
}

impl std::ops::Index<usize> for FieldVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Spin assignment `x -> σ(x) ∈ {0, ..., q-1}` over the vertices `0..len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration(Vec<usize>);

impl Configuration {
    pub fn new(spins: Vec<usize>, q: usize) -> Result<Self, ModelError> {
        if let Some((vertex, &spin)) = spins.iter().enumerate().find(|(_, &s)| s >= q) {
            return Err(ModelError::InvalidSpin { vertex, spin, q });
        }
        Ok(Self(spins))
    }

    pub fn spins(&self) -> &[usize] {
        &self.0
    }

    /// Mixed-radix code with vertex 0 as the least significant digit.
    pub fn encode(&self, q: usize) -> usize {
        self.0.iter().rev().fold(0, |acc, &s| acc * q + s)
    }

    pub fn decode(mut code: usize, q: usize, len: usize) -> Self {
        let mut spins = Vec::with_capacity(len);
        for _ in 0..len {
            spins.push(code % q);
            code /= q;
        }
        Self(spins)
    }
}

/// Number of monochromatic edges among the first `prefix` vertices.
fn monochromatic_edges(tree: &FiniteTree, spins: &[usize], prefix: usize) -> usize {
    (1..prefix)
        .filter(|&c| {
            let p = tree.parent_of(c).expect("non-root vertex has a parent");
            spins[p] == spins[c]
        })
        .count()
}

/// `H(σ) = -J · (number of monochromatic edges)`.
pub fn hamiltonian(tree: &FiniteTree, config: &Configuration, params: &ModelParams) -> Result<f64, ModelError> {
    if config.0.len() != tree.len() {
        return Err(ModelError::IncompleteConfiguration {
            expected: tree.len(),
            got: config.0.len(),
        });
    }
    Ok(-params.coupling * monochromatic_edges(tree, &config.0, tree.len()) as f64)
}

fn configuration_count(q: usize, vertices: usize) -> Result<usize, ModelError> {
    let too_large = ModelError::EnumerationTooLarge { q, vertices };
    let count = (q as u64)
        .checked_pow(u32::try_from(vertices).map_err(|_| too_large.clone())?)
        .filter(|&c| c <= MAX_CONFIGURATIONS)
        .ok_or(too_large)?;
    Ok(count as usize)
}

fn check_fields(fields: &[FieldVector], expected: usize, q: usize) -> Result<(), ModelError> {
    if fields.len() != expected {
        return Err(ModelError::FieldCount {
            expected,
            got: fields.len(),
        });
    }
    fields.iter().try_for_each(|h| h.check_len(q))
}

/// Exact finite-volume distribution over all `q^{|V_n|}` configurations.
#[derive(Debug, Clone)]
pub struct MeasureTable {
    q: usize,
    vertices: usize,
    probs: Vec<f64>,
}

impl MeasureTable {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probabilities indexed by [`Configuration::encode`].
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, config: &Configuration) -> Option<f64> {
        if config.0.len() != self.vertices || config.0.iter().any(|&s| s >= self.q) {
            return None;
        }
        self.probs.get(config.encode(self.q)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Configuration, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(code, &p)| (Configuration::decode(code, self.q, self.vertices), p))
    }
}

const CHUNK: usize = 1 << 12;

/// Log-weights of every configuration on `V_n`, in code order.
fn log_weights(
    tree: &FiniteTree,
    boundary: &[FieldVector],
    params: &ModelParams,
    exec: Execution,
) -> Result<Vec<f64>, ModelError> {
    let q = params.q;
    let len = tree.len();
    let count = configuration_count(q, len)?;
    let ln_theta = params.ln_theta();
    let leaves = tree.leaves();

    let chunks = exec.map_range(count.div_ceil(CHUNK), |chunk| {
        let start = chunk * CHUNK;
        let end = (start + CHUNK).min(count);
        let mut spins = Configuration::decode(start, q, len).0;
        let mut out = Vec::with_capacity(end - start);
        for _ in start..end {
            let mono = monochromatic_edges(tree, &spins, len) as f64;
            let field: f64 = leaves.clone().zip(boundary).map(|(x, h)| h.state_field(spins[x])).sum();
            out.push(ln_theta * mono + field);
            // odometer, vertex 0 fastest
            for s in spins.iter_mut() {
                *s += 1;
                if *s < q {
                    break;
                }
                *s = 0;
            }
        }
        out
    });
    let weights: Vec<f64> = chunks.into_iter().flatten().collect();
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(ModelError::NonFiniteWeight);
    }
    Ok(weights)
}

/// Exhaustive finite-volume measure on the whole tree `V_n`, with
/// `boundary[i]` the field on the `i`-th vertex of `W_n`.
pub fn finite_volume_measure(
    tree: &FiniteTree,
    boundary: &[FieldVector],
    params: &ModelParams,
) -> Result<MeasureTable, ModelError> {
    finite_volume_measure_with(tree, boundary, params, Execution::default())
}

pub fn finite_volume_measure_with(
    tree: &FiniteTree,
    boundary: &[FieldVector],
    params: &ModelParams,
    exec: Execution,
) -> Result<MeasureTable, ModelError> {
    check_fields(boundary, tree.leaves().len(), params.q)?;
    let logw = log_weights(tree, boundary, params, exec)?;
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logw.iter().map(|&l| (l - max).exp()).collect();
    let mut sorted = weights.clone();
    sorted.sort_by(f64::total_cmp);
    let z = neumaier_sum(sorted);
    Ok(MeasureTable {
        q: params.q,
        vertices: tree.len(),
        probs: weights.into_iter().map(|w| w / z).collect(),
    })
}

/// The recursion map `F(h, θ)`:
///
/// ```text
/// F_i = ln( ((θ-1) e^{h_i} + Σ_j e^{h_j} + 1) / (θ + Σ_j e^{h_j}) )
/// ```
///
/// The numerator is evaluated as `θ e^{h_i} + Σ_{j≠i} e^{h_j} + 1`, which is
/// positive for every `θ > 0`; both sides go through log-sum-exp.
pub fn f_map(h: &FieldVector, params: &ModelParams) -> Result<FieldVector, ModelError> {
    h.check_len(params.q)?;
    let ln_theta = params.ln_theta();
    let hs = h.components();

    let mut den_terms = Vec::with_capacity(hs.len() + 1);
    den_terms.push(ln_theta);
    den_terms.extend_from_slice(hs);
    let den = log_sum_exp(&den_terms);

    let mut num_terms = Vec::with_capacity(hs.len() + 1);
    let mut out = Vec::with_capacity(hs.len());
    for i in 0..hs.len() {
        num_terms.clear();
        num_terms.extend(
            hs.iter()
                .enumerate()
                .map(|(j, &hj)| if j == i { ln_theta + hj } else { hj }),
        );
        num_terms.push(0.0);
        let fi = log_sum_exp(&num_terms) - den;
        if !fi.is_finite() {
            return Err(ModelError::Domain(format!("F_{} is not finite at h = {:?}", i + 1, hs)));
        }
        out.push(fi);
    }
    Ok(FieldVector(out))
}

/// Runs `h_x = Σ_{y ∈ S(x)} F(h_y, θ)` from the leaves up. `leaf_fields[i]`
/// sits on the `i`-th vertex of `W_n`; the result holds one field per vertex.
pub fn propagate_fields(
    tree: &FiniteTree,
    leaf_fields: &[FieldVector],
    params: &ModelParams,
) -> Result<Vec<FieldVector>, ModelError> {
    let leaves = tree.leaves();
    check_fields(leaf_fields, leaves.len(), params.q)?;
    let mut fields = vec![FieldVector::zeros(params.q); tree.len()];
    for (x, h) in leaves.clone().zip(leaf_fields) {
        fields[x] = h.clone();
    }
    let mut acc = vec![0.0; params.q - 1];
    for x in (0..leaves.start).rev() {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for &y in tree.children(x)? {
            let fy = f_map(&fields[y], params)?;
            acc.iter_mut().zip(fy.components()).for_each(|(a, f)| *a += f);
        }
        fields[x] = FieldVector::new(acc.clone())?;
    }
    Ok(fields)
}

/// Brute-force check of the compatibility condition between `μ_n` and
/// `μ_{n-1}`: the maximum over `σ ∈ Φ^{V_{n-1}}` of
/// `|Σ_ω μ_n(σ ∨ ω) - μ_{n-1}(σ)|`.
///
/// `fields` holds one vector per vertex of the tree; `μ_n` reads the ones on
/// `W_n`, `μ_{n-1}` the ones on `W_{n-1}`. Every boundary configuration `ω`
/// is visited; nothing here uses the product structure of the sum.
pub fn check_consistency(tree: &FiniteTree, fields: &[FieldVector], params: &ModelParams) -> Result<f64, ModelError> {
    check_consistency_with(tree, fields, params, Execution::default())
}

pub fn check_consistency_with(
    tree: &FiniteTree,
    fields: &[FieldVector],
    params: &ModelParams,
    exec: Execution,
) -> Result<f64, ModelError> {
    let n = tree.depth();
    if n == 0 {
        return Err(ModelError::DepthTooSmall);
    }
    check_fields(fields, tree.len(), params.q)?;
    let q = params.q;
    configuration_count(q, tree.len())?;

    let inner = tree.ball_len(n - 1)?;
    let outer_sphere = tree.level_range(n - 1)?;
    let leaves: Vec<usize> = tree.leaves().collect();
    let leaf_parent: Vec<usize> = leaves
        .iter()
        .map(|&y| tree.parent_of(y).expect("leaf has a parent"))
        .collect();
    let ln_theta = params.ln_theta();
    let inner_count = configuration_count(q, inner)?;

    let rows: Vec<(f64, f64)> = exec.map_range(inner_count, |code| {
        let sigma = Configuration::decode(code, q, inner).0;
        let base = ln_theta * monochromatic_edges(tree, &sigma, inner) as f64;

        let prev: f64 = outer_sphere.clone().map(|x| fields[x].state_field(sigma[x])).sum();

        // per-leaf weights, shifted by their maximum
        let mut shift = 0.0;
        let mut table = vec![0.0; leaves.len() * q];
        for (j, (&y, &p)) in leaves.iter().zip(&leaf_parent).enumerate() {
            let row = &mut table[j * q..(j + 1) * q];
            for (s, w) in row.iter_mut().enumerate() {
                *w = fields[y].state_field(s) + if s == sigma[p] { ln_theta } else { 0.0 };
            }
            let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            row.iter_mut().for_each(|w| *w = (*w - m).exp());
            shift += m;
        }
        let total = sum_over_boundary(&table, leaves.len(), q);
        (base + shift + total.ln(), base + prev)
    });

    let (next, prev): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    if next.iter().chain(&prev).any(|v| !v.is_finite()) {
        return Err(ModelError::NonFiniteWeight);
    }
    let marginal = softmax(&next);
    let previous = softmax(&prev);
    Ok(marginal
        .iter()
        .zip(&previous)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// `Σ_ω Π_j table[j][ω_j]` over all `q^leaves` boundary configurations,
/// walking them with an odometer and cached prefix products.
fn sum_over_boundary(table: &[f64], leaves: usize, q: usize) -> f64 {
    let mut digits = vec![0usize; leaves];
    let mut prefix = vec![1.0; leaves + 1];
    for j in 0..leaves {
        prefix[j + 1] = prefix[j] * table[j * q];
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    loop {
        let v = prefix[leaves];
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;

        let mut j = leaves;
        loop {
            if j == 0 {
                return sum + comp;
            }
            j -= 1;
            digits[j] += 1;
            if digits[j] < q {
                break;
            }
            digits[j] = 0;
        }
        for i in j..leaves {
            prefix[i + 1] = prefix[i] * table[i * q + digits[i]];
        }
    }
}

/// `count` field vectors with components uniform in `[-amplitude, amplitude]`.
pub fn random_fields<R: Rng + ?Sized>(count: usize, q: usize, amplitude: f64, rng: &mut R) -> Vec<FieldVector> {
    (0..count)
        .map(|_| FieldVector((0..q - 1).map(|_| rng.gen_range(-amplitude..=amplitude)).collect()))
        .collect()
}
