//! Thermodynamic diagnostics of a topic solution.
//!
//! The N·T entries of Φ are treated as microstates. Those above the 1/N
//! threshold give the density of states ρ = n_high / (N·T), the energy
//! E = −ln(P/T) where P is their total probability, and the entropy
//! S = ln ρ. With the chaos reference at zero, the free energy is
//! Λ_F = E − T·S, and the deformation parameter q = 1/T yields
//!
//! * Rényi: Λ_F / (T − 1)
//! * Tsallis: (e^{(q−1)·Rényi} − 1) / (q − 1)
//!
//! Direct Rényi/Tsallis forms on an explicit distribution are provided as
//! well; they use the textbook signs, under which
//! `tsallis = (e^{(1−q)·renyi} − 1) / (1 − q)`.

use serde::Serialize;
use thiserror::Error;

use crate::model::PhiMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    /// No microstate lies above the threshold, so ρ = 0 and the logs blow up.
    #[error("degenerate solution: {0}")]
    Degenerate(String),
    #[error("entropy diverges at q = 1")]
    Divergence,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}

/// Microstates strictly above 1/N and their total probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighProbStats {
    pub n_high: usize,
    pub prob_mass: f64,
}

pub fn count_high_prob(phi: &PhiMatrix) -> HighProbStats {
    let threshold = 1.0 / phi.words() as f64;
    let mut stats = HighProbStats {
        n_high: 0,
        prob_mass: 0.0,
    };
    for &p in phi.values() {
        if p > threshold {
            stats.n_high += 1;
            stats.prob_mass += p;
        }
    }
    stats
}

/// ρ = n_high / (N·T). `n_high` is real so run-averaged counts can be used.
pub fn density_of_states(n_high: f64, words: usize, topics: usize) -> f64 {
    n_high / (words as f64 * topics as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergy {
    pub energy: f64,
    pub entropy: f64,
    pub free_energy: f64,
}

/// E = −ln(P/T), S = ln(n_high/(N·T)), Λ_F = E − T·S.
pub fn free_energy(
    prob_mass: f64,
    n_high: f64,
    words: usize,
    topics: usize,
) -> Result<FreeEnergy, EntropyError> {
    if n_high.is_nan() || n_high <= 0.0 || prob_mass.is_nan() || prob_mass <= 0.0 {
        return Err(EntropyError::Degenerate(format!(
            "n_high = {n_high}, probability mass = {prob_mass}"
        )));
    }
    let t = topics as f64;
    let energy = 0.0 - (prob_mass / t).ln();
    let entropy = density_of_states(n_high, words, topics).ln();
    Ok(FreeEnergy {
        energy,
        entropy,
        free_energy: energy - t * entropy,
    })
}

/// Relative Shannon entropy ln ρ.
pub fn shannon_from_density(rho: f64) -> Result<f64, EntropyError> {
    if rho.is_nan() || rho <= 0.0 {
        return Err(EntropyError::Degenerate(format!("density of states {rho}")));
    }
    Ok(rho.ln())
}

pub fn renyi_from_free_energy(free_energy: f64, topics: usize) -> Result<f64, EntropyError> {
    if topics < 2 {
        return Err(EntropyError::Divergence);
    }
    Ok(free_energy / (topics as f64 - 1.0))
}

/// (e^{(q−1)·renyi} − 1) / (q − 1).
pub fn tsallis_from_renyi(renyi: f64, q: f64) -> Result<f64, EntropyError> {
    if q == 1.0 {
        return Err(EntropyError::Divergence);
    }
    Ok(((q - 1.0) * renyi).exp_m1() / (q - 1.0))
}

/// A probability vector summing to one within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    p: Vec<f64>,
}

impl DiscreteDistribution {
    pub const SUM_TOL: f64 = 1e-12;

    pub fn new(p: Vec<f64>) -> Result<Self, EntropyError> {
        if p.is_empty() {
            return Err(EntropyError::InvalidDistribution("no states".into()));
        }
        if let Some(v) = p.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(EntropyError::InvalidDistribution(format!("entry {v}")));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > Self::SUM_TOL {
            return Err(EntropyError::InvalidDistribution(format!("sums to {s}")));
        }
        Ok(Self { p })
    }

    pub fn uniform(states: usize) -> Self {
        Self {
            p: vec![1.0 / states as f64; states],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    /// Σ p^q − 1, evaluated as Σ p·expm1((q−1) ln p) so it stays accurate
    /// as q approaches 1.
    fn power_sum_excess(&self, q: f64) -> f64 {
        self.p
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * ((q - 1.0) * p.ln()).exp_m1())
            .sum()
    }

    /// −Σ p ln p.
    pub fn shannon(&self) -> f64 {
        -self
            .p
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }
}

/// ln(Σ p^q) / (1 − q).
pub fn renyi_direct(p: &DiscreteDistribution, q: f64) -> Result<f64, EntropyError> {
    if q == 1.0 {
        return Err(EntropyError::Divergence);
    }
    Ok(p.power_sum_excess(q).ln_1p() / (1.0 - q))
}

/// (1 − Σ p^q) / (q − 1).
pub fn tsallis_direct(p: &DiscreteDistribution, q: f64) -> Result<f64, EntropyError> {
    if q == 1.0 {
        return Err(EntropyError::Divergence);
    }
    Ok(-p.power_sum_excess(q) / (q - 1.0))
}

/// Classical Shannon entropy −Σ p ln p of the microstate distribution
/// p_wt = φ_wt / T.
pub fn classical_shannon(phi: &PhiMatrix) -> f64 {
    let t = phi.topics() as f64;
    -phi.values()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| {
            let p = v / t;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Every diagnostic for one topic solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyPoint {
    pub topics: usize,
    /// Count of microstates above 1/N; fractional for run averages.
    pub n_high: f64,
    pub rho: f64,
    pub prob_mass: f64,
    pub energy: f64,
    pub free_energy: f64,
    /// ln ρ.
    pub shannon: f64,
    /// −Σ p ln p over p_wt = φ_wt / T.
    pub shannon_classical: f64,
    pub renyi: f64,
    pub tsallis: f64,
    pub q: f64,
}

impl EntropyPoint {
    /// Composes the diagnostics from the raw threshold statistics.
    pub fn from_stats(
        n_high: f64,
        prob_mass: f64,
        words: usize,
        topics: usize,
        shannon_classical: f64,
    ) -> Result<Self, EntropyError> {
        if topics < 2 {
            return Err(EntropyError::Divergence);
        }
        let rho = density_of_states(n_high, words, topics);
        let fe = free_energy(prob_mass, n_high, words, topics)?;
        let shannon = shannon_from_density(rho)?;
        let renyi = renyi_from_free_energy(fe.free_energy, topics)?;
        let q = 1.0 / topics as f64;
        let tsallis = tsallis_from_renyi(renyi, q)?;
        Ok(Self {
            topics,
            n_high,
            rho,
            prob_mass,
            energy: fe.energy,
            free_energy: fe.free_energy,
            shannon,
            shannon_classical,
            renyi,
            tsallis,
            q,
        })
    }
}

pub fn evaluate_solution(phi: &PhiMatrix) -> Result<EntropyPoint, EntropyError> {
    let stats = count_high_prob(phi);
    EntropyPoint::from_stats(
        stats.n_high as f64,
        stats.prob_mass,
        phi.words(),
        phi.topics(),
        classical_shannon(phi),
    )
}
