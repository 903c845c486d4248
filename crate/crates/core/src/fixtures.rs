//! Small reference tensors and a planted-ability generator for tests and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::tensor::ResponseTensor;

/// Three models, eight questions, one trial: two questions with pattern (0,1,1), three with
/// (1,0,0) and three with (1,1,0). Mean accuracy ranks 0 > 1 > 2 while Bradley-Terry ranks
/// 1 > 0 > 2.
pub fn fix_a() -> ResponseTensor {
    let patterns: [[u8; 3]; 8] = [
        [0, 1, 1],
        [0, 1, 1],
        [1, 0, 0],
        [1, 0, 0],
        [1, 0, 0],
        [1, 1, 0],
        [1, 1, 0],
        [1, 1, 0],
    ];
    let mut flat = Vec::with_capacity(24);
    for l in 0..3 {
        flat.extend(patterns.iter().map(|p| p[l]));
    }
    ResponseTensor::binary(3, 8, 1, flat).expect("fixture is well formed")
}

/// FIX-A with every trial duplicated `trials` times.
pub fn fix_a_trials(trials: usize) -> ResponseTensor {
    fix_a().replicate_trials(trials).expect("positive trial count")
}

/// Every outcome is 1.
pub fn fix_b(models: usize, questions: usize, trials: usize) -> ResponseTensor {
    ResponseTensor::binary(models, questions, trials, vec![1; models * questions * trials])
        .expect("positive dimensions")
}

/// Two models; model 0 always correct, model 1 always wrong.
pub fn fix_c(questions: usize, trials: usize) -> ResponseTensor {
    let block = questions * trials;
    let mut flat = vec![1u8; block];
    flat.extend(std::iter::repeat_n(0u8, block));
    ResponseTensor::binary(2, questions, trials, flat).expect("positive dimensions")
}

/// Synthetic Rasch data: `P(R_lmn = 1) = sigmoid(ability_l - difficulty_m)` with standard
/// normal difficulties. Returns the tensor together with the planted abilities.
pub fn planted_rasch(
    abilities: &[f64],
    questions: usize,
    trials: usize,
    seed: u64,
) -> (ResponseTensor, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let difficulties: Vec<f64> = (0..questions).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut flat = Vec::with_capacity(abilities.len() * questions * trials);
    for &a in abilities {
        for &b in &difficulties {
            let p = 1.0 / (1.0 + (-(a - b)).exp());
            for _ in 0..trials {
                flat.push(u8::from(rng.random::<f64>() < p));
            }
        }
    }
    let r = ResponseTensor::binary(abilities.len(), questions, trials, flat).expect("positive dimensions");
    (r, abilities.to_vec())
}

/// Evenly spaced abilities on `[-spread, spread]`, listed in a scrambled order so that model
/// index carries no information.
pub fn spread_abilities(models: usize, spread: f64) -> Vec<f64> {
    let mut out: Vec<f64> = (0..models)
        .map(|i| {
            if models == 1 {
                0.0
            } else {
                -spread + 2.0 * spread * i as f64 / (models - 1) as f64
            }
        })
        .collect();
    // fixed interleave: evens ascending, odds descending
    let (mut evens, mut odds): (Vec<_>, Vec<_>) = out.drain(..).enumerate().partition(|(i, _)| i % 2 == 0);
    odds.reverse();
    evens.extend(odds);
    evens.into_iter().map(|(_, a)| a).collect()
}

/// Uniformly random binary tensor.
pub fn random_binary(models: usize, questions: usize, trials: usize, seed: u64) -> ResponseTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flat = (0..models * questions * trials)
        .map(|_| u8::from(rng.random::<bool>()))
        .collect();
    ResponseTensor::binary(models, questions, trials, flat).expect("positive dimensions")
}
