//! Binary C-SVM trained on a precomputed Gram matrix with SMO.
//!
//! Working pairs are the maximal violating pair of the dual; ties between
//! equally violating indices go to the earliest index of a seeded
//! permutation, so a fixed seed gives a bit-identical model.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hash::fnv1a64;
use crate::kernel::Gram;

/// Curvature used when the Gram matrix is not strictly PD along a direction.
const TAU: f64 = 1e-12;
/// Largest tolerated `|G_ij - G_ji|`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvmError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("no training examples")]
    Empty,
    #[error("gram matrix is {gram}x{gram} but {labels} labels were given")]
    LengthMismatch { gram: usize, labels: usize },
    #[error("label at index {index} is {value}, expected +1 or -1")]
    InvalidLabel { index: usize, value: i8 },
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("gram matrix is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),
    #[error("solver did not converge within {0} iterations")]
    NotConverged(usize),
    #[error("kernel row has {found} entries, model has {expected} support vectors")]
    RowLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TrainConfig {
    pub c: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// Dual coefficients at or below this are not kept as support vectors.
    pub eps: f64,
    /// Iteration cap, in multiples of the training-set size.
    pub max_passes: usize,
    pub seed: u64,
    /// Multiplier on `c` for positive examples.
    pub positive_weight: f64,
    /// Multiplier on `c` for negative examples.
    pub negative_weight: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-3,
            eps: 1e-9,
            max_passes: 10_000,
            seed: 0,
            positive_weight: 1.0,
            negative_weight: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), SvmError> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.c) {
            return Err(SvmError::InvalidConfig("C must be positive"));
        }
        if !positive(self.tol) {
            return Err(SvmError::InvalidConfig("tol must be positive"));
        }
        if !positive(self.eps) {
            return Err(SvmError::InvalidConfig("eps must be positive"));
        }
        if self.max_passes == 0 {
            return Err(SvmError::InvalidConfig("max_passes must be at least 1"));
        }
        if !positive(self.positive_weight) || !positive(self.negative_weight) {
            return Err(SvmError::InvalidConfig("class weights must be positive"));
        }
        Ok(())
    }

    fn upper_bound(&self, y: f64) -> f64 {
        self.c * if y > 0.0 { self.positive_weight } else { self.negative_weight }
    }
}

/// Dual expansion `f(x) = sum_i coef_i K(sv_i, x) + bias`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainedModel {
    /// Training indices with a non-negligible dual variable, ascending.
    pub support_indices: Vec<usize>,
    /// `alpha_i * y_i` for each support index.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    /// Fingerprint of the kernel configuration that built the Gram matrix.
    pub kernel_fingerprint: String,
    /// FNV-1a digest of the Gram matrix, labels and training settings.
    pub checksum: String,
    pub n_train: usize,
    pub iterations: usize,
    pub dual_objective: f64,
}

impl TrainedModel {
    /// Dual variable of training example `i` (0 if it is not a support vector).
    pub fn alpha(&self, i: usize) -> f64 {
        self.support_indices
            .binary_search(&i)
            .map(|p| self.dual_coefs[p].abs())
            .unwrap_or(0.0)
    }

    /// Decision value from a kernel row over the whole training set.
    pub fn decision_full(&self, train_row: &[f64]) -> Result<f64, SvmError> {
        if train_row.len() != self.n_train {
            return Err(SvmError::RowLength { expected: self.n_train, found: train_row.len() });
        }
        Ok(self
            .support_indices
            .iter()
            .zip(&self.dual_coefs)
            .map(|(&i, c)| c * train_row[i])
            .sum::<f64>()
            + self.bias)
    }
}

/// `sum_i dual_coefs[i] * kernel_row[i] + bias`, with `kernel_row` in support order.
pub fn decision(model: &TrainedModel, kernel_row: &[f64]) -> Result<f64, SvmError> {
    if kernel_row.len() != model.dual_coefs.len() {
        return Err(SvmError::RowLength { expected: model.dual_coefs.len(), found: kernel_row.len() });
    }
    Ok(model.dual_coefs.iter().zip(kernel_row).map(|(c, k)| c * k).sum::<f64>() + model.bias)
}

pub fn train_smo(gram: &Gram, labels: &[i8], cfg: &TrainConfig) -> Result<TrainedModel, SvmError> {
    solve(gram, labels, cfg, None)
}

/// Like [`train_smo`], also returning the dual objective after every step
/// (the first entry is the objective at `alpha = 0`).
pub fn train_smo_traced(gram: &Gram, labels: &[i8], cfg: &TrainConfig) -> Result<(TrainedModel, Vec<f64>), SvmError> {
    let mut trace = Vec::new();
    let model = solve(gram, labels, cfg, Some(&mut trace))?;
    Ok((model, trace))
}

fn check_inputs(gram: &Gram, labels: &[i8]) -> Result<Vec<f64>, SvmError> {
    let n = gram.len();
    if n == 0 {
        return Err(SvmError::Empty);
    }
    if labels.len() != n {
        return Err(SvmError::LengthMismatch { gram: n, labels: labels.len() });
    }
    let mut y = Vec::with_capacity(n);
    for (index, &value) in labels.iter().enumerate() {
        match value {
            1 => y.push(1.0),
            -1 => y.push(-1.0),
            _ => return Err(SvmError::InvalidLabel { index, value }),
        }
    }
    if y.iter().all(|&v| v > 0.0) || y.iter().all(|&v| v < 0.0) {
        return Err(SvmError::SingleClass);
    }
    let asym = gram.max_asymmetry();
    if !(asym <= SYMMETRY_TOLERANCE) {
        return Err(SvmError::NotSymmetric(asym));
    }
    Ok(y)
}

fn checksum(gram: &Gram, labels: &[i8], cfg: &TrainConfig) -> String {
    let mut bytes = Vec::with_capacity(gram.len() * gram.len() * 8 + labels.len() + 64);
    for i in 0..gram.len() {
        for v in gram.row(i) {
            bytes.extend_from_slice(&v.to_bits().to_le_bytes());
        }
    }
    bytes.extend(labels.iter().map(|&l| l as u8));
    let settings = format!(
        "{}|{}|{}|{}|{}|{}|{}",
        cfg.c, cfg.tol, cfg.eps, cfg.max_passes, cfg.seed, cfg.positive_weight, cfg.negative_weight
    );
    bytes.extend_from_slice(settings.as_bytes());
    format!("{:016x}", fnv1a64(&bytes))
}

struct Dual<'a> {
    gram: &'a Gram,
    y: Vec<f64>,
    ub: Vec<f64>,
    alpha: Vec<f64>,
    /// Gradient of `1/2 a'Qa - e'a` with `Q_ij = y_i y_j K_ij`.
    grad: Vec<f64>,
}

impl Dual<'_> {
    fn q(&self, i: usize, j: usize) -> f64 {
        self.y[i] * self.y[j] * self.gram.get(i, j)
    }

    fn in_up(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] < self.ub[t]
        } else {
            self.alpha[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.ub[t]
        }
    }

    fn objective(&self) -> f64 {
        0.5 * self.alpha.iter().zip(&self.grad).map(|(a, g)| a * (1.0 - g)).sum::<f64>()
    }

    /// `(i, m, j, M)`: the maximal violating pair and the extreme values of
    /// `-y_t G_t` over the up and low sets.
    fn select(&self, order: &[usize]) -> (Option<usize>, f64, Option<usize>, f64) {
        let (mut i, mut m) = (None, f64::NEG_INFINITY);
        let (mut j, mut big_m) = (None, f64::INFINITY);
        for &t in order {
            let v = -self.y[t] * self.grad[t];
            if self.in_up(t) && v > m {
                i = Some(t);
                m = v;
            }
            if self.in_low(t) && v < big_m {
                j = Some(t);
                big_m = v;
            }
        }
        (i, m, j, big_m)
    }

    fn step(&mut self, i: usize, j: usize) {
        let (ci, cj) = (self.ub[i], self.ub[j]);
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if self.y[i] != self.y[j] {
            let mut quad = self.q(i, i) + self.q(j, j) + 2.0 * self.q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let mut quad = self.q(i, i) + self.q(j, j) - 2.0 * self.q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..self.alpha.len() {
            self.grad[t] += self.q(t, i) * di + self.q(t, j) * dj;
        }
    }

    fn bias(&self, m: f64, big_m: f64) -> f64 {
        let (mut sum, mut free) = (0.0, 0usize);
        for t in 0..self.alpha.len() {
            if self.alpha[t] > 0.0 && self.alpha[t] < self.ub[t] {
                sum += -self.y[t] * self.grad[t];
                free += 1;
            }
        }
        if free > 0 {
            sum / free as f64
        } else {
            match (m.is_finite(), big_m.is_finite()) {
                (true, true) => 0.5 * (m + big_m),
                (true, false) => m,
                (false, true) => big_m,
                (false, false) => 0.0,
            }
        }
    }
}

fn solve(gram: &Gram, labels: &[i8], cfg: &TrainConfig, mut trace: Option<&mut Vec<f64>>) -> Result<TrainedModel, SvmError> {
    cfg.validate()?;
    let y = check_inputs(gram, labels)?;
    let n = y.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));

    let ub = y.iter().map(|&v| cfg.upper_bound(v)).collect();
    let mut dual = Dual { gram, y, ub, alpha: vec![0.0; n], grad: vec![-1.0; n] };
    let cap = cfg.max_passes.saturating_mul(n);
    let mut objective = 0.0;
    if let Some(t) = trace.as_deref_mut() {
        t.push(objective);
    }
    let mut iterations = 0;
    let (m, big_m) = loop {
        let (i, m, j, big_m) = dual.select(&order);
        let (Some(i), Some(j)) = (i, j) else {
            break (m, big_m);
        };
        if m - big_m <= cfg.tol {
            break (m, big_m);
        }
        if iterations >= cap {
            return Err(SvmError::NotConverged(iterations));
        }
        dual.step(i, j);
        iterations += 1;
        let next = dual.objective();
        debug_assert!(
            next >= objective - 1e-9 * (1.0 + objective.abs()),
            "dual objective decreased from {objective} to {next}"
        );
        objective = next;
        if let Some(t) = trace.as_deref_mut() {
            t.push(objective);
        }
    };

    let bias = dual.bias(m, big_m);
    let mut support_indices = Vec::new();
    let mut dual_coefs = Vec::new();
    for t in 0..n {
        if dual.alpha[t] > cfg.eps {
            support_indices.push(t);
            dual_coefs.push(dual.alpha[t] * dual.y[t]);
        }
    }
    Ok(TrainedModel {
        support_indices,
        dual_coefs,
        bias,
        kernel_fingerprint: String::from(gram.fingerprint()),
        checksum: checksum(gram, labels, cfg),
        n_train: n,
        iterations,
        dual_objective: dual.objective(),
    })
}
