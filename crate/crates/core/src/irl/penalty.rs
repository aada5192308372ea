//! Training sets and the pairwise reward-smoothness penalty.

use crate::error::{check_dim, Error, Result};
use crate::math::dot;
use crate::mdp::{RewardVector, Trajectory};

use super::similarity::Similarity;

/// Expert trajectories, unsupervised trajectories and the symmetric
/// similarity matrix over their union (experts first).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    expert: Vec<Trajectory>,
    unsupervised: Vec<Trajectory>,
    /// Row-major `n × n` with `n = l + u`.
    similarity: Vec<f64>,
    expert_mean_fc: Vec<f64>,
}

impl TrainingSet {
    /// Builds the set and precomputes the similarity matrix with `kernel`.
    pub fn new(
        expert: Vec<Trajectory>,
        unsupervised: Vec<Trajectory>,
        kernel: &Similarity,
    ) -> Result<Self> {
        let n = expert.len() + unsupervised.len();
        let all: Vec<&Trajectory> = expert.iter().chain(&unsupervised).collect();
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            matrix[i * n + i] = kernel.eval(all[i], all[i])?;
            for j in i + 1..n {
                let s = kernel.eval(all[i], all[j])?;
                matrix[i * n + j] = s;
                matrix[j * n + i] = s;
            }
        }
        Self::with_matrix(expert, unsupervised, matrix)
    }

    /// Uses a caller-supplied similarity matrix, which must be symmetric with
    /// entries in `[0, 1]`.
    pub fn with_matrix(
        expert: Vec<Trajectory>,
        unsupervised: Vec<Trajectory>,
        similarity: Vec<f64>,
    ) -> Result<Self> {
        if expert.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let n = expert.len() + unsupervised.len();
        check_dim(n * n, similarity.len())?;
        let d = expert[0].feature_count().len();
        for t in expert.iter().chain(&unsupervised) {
            check_dim(d, t.feature_count().len())?;
        }
        for i in 0..n {
            for j in 0..n {
                let s = similarity[i * n + j];
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::InvalidSimilarity(format!(
                        "entry ({i}, {j}) = {s} outside [0, 1]"
                    )));
                }
                if s != similarity[j * n + i] {
                    return Err(Error::InvalidSimilarity(format!(
                        "entries ({i}, {j}) and ({j}, {i}) differ"
                    )));
                }
            }
        }
        let mut mean = vec![0.0; d];
        for t in &expert {
            for (m, f) in mean.iter_mut().zip(t.feature_count()) {
                *m += f;
            }
        }
        let l = expert.len() as f64;
        mean.iter_mut().for_each(|m| *m /= l);
        Ok(TrainingSet {
            expert,
            unsupervised,
            similarity,
            expert_mean_fc: mean,
        })
    }

    pub fn expert(&self) -> &[Trajectory] {
        &self.expert
    }

    pub fn unsupervised(&self) -> &[Trajectory] {
        &self.unsupervised
    }

    /// All trajectories, experts first.
    pub fn trajectories(&self) -> impl Iterator<Item = &Trajectory> {
        self.expert.iter().chain(&self.unsupervised)
    }

    pub fn len(&self) -> usize {
        self.expert.len() + self.unsupervised.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_features(&self) -> usize {
        self.expert_mean_fc.len()
    }

    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        self.similarity[i * self.len() + j]
    }

    /// `f* = (1/l) Σ f_{ζ*}`.
    pub fn expert_mean_fc(&self) -> &[f64] {
        &self.expert_mean_fc
    }

    fn rewards(&self, theta: &RewardVector) -> Result<Vec<f64>> {
        check_dim(self.n_features(), theta.dim())?;
        Ok(self
            .trajectories()
            .map(|t| dot(theta.as_slice(), t.feature_count()))
            .collect())
    }
}

/// `R(θ) = 1/(2(l+u)) Σ_{ζ,ζ'} s(ζ,ζ') (θᵀ(f_ζ - f_ζ'))²` over all ordered pairs.
pub fn pairwise_penalty(theta: &RewardVector, ts: &TrainingSet) -> Result<f64> {
    if ts.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let r = ts.rewards(theta)?;
    let n = r.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let diff = r[i] - r[j];
            total += ts.similarity(i, j) * diff * diff;
        }
    }
    Ok(total / (2.0 * n as f64))
}

/// `∇R(θ) = 1/(l+u) Σ_{ζ,ζ'} s(ζ,ζ') θᵀΔf Δf` with `Δf = f_ζ - f_ζ'`.
///
/// With a symmetric `s` this collapses to `2/(l+u) Σ_i c_i f_i` where
/// `c_i = Σ_j s_ij (r_i - r_j)`, which is `O(n² + n d)`.
pub fn penalty_gradient(theta: &RewardVector, ts: &TrainingSet) -> Result<Vec<f64>> {
    if ts.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let r = ts.rewards(theta)?;
    let n = r.len();
    let scale = 2.0 / n as f64;
    let mut grad = vec![0.0; ts.n_features()];
    for (i, traj) in ts.trajectories().enumerate() {
        let c: f64 = (0..n).map(|j| ts.similarity(i, j) * (r[i] - r[j])).sum();
        if c == 0.0 {
            continue;
        }
        for (g, f) in grad.iter_mut().zip(traj.feature_count()) {
            *g += scale * c * f;
        }
    }
    Ok(grad)
}
