//! Seeded random instances for fuzzing: states, POVMs, networks, models.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::network::LinearNetwork;
use crate::nlhs::{NlhsModel, ResponseTable, SeparableDecomposition};
use crate::operator::{c, Dims, QOperator};
use crate::povm::Povm;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ginibre<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Full-rank random density matrix (Hilbert-Schmidt measure).
pub fn random_density<R: Rng>(dims: &Dims, rng: &mut R) -> QOperator {
    random_density_rank(dims, dims.total(), rng)
}

pub fn random_density_rank<R: Rng>(dims: &Dims, rank: usize, rng: &mut R) -> QOperator {
    let g = ginibre(dims.total(), rank.max(1), rng);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    QOperator::new(m / c(t), dims.clone()).expect("square by construction")
}

pub fn random_pure<R: Rng>(dims: &Dims, rng: &mut R) -> QOperator {
    random_density_rank(dims, 1, rng)
}

/// Random POVM with `outcomes` effects, labelled `0..outcomes`.
pub fn random_povm<R: Rng>(dims: &Dims, outcomes: usize, rng: &mut R) -> Povm {
    let raw: Vec<QOperator> = (0..outcomes)
        .map(|_| {
            let g = ginibre(dims.total(), dims.total(), rng);
            QOperator::new(&g * g.adjoint(), dims.clone()).expect("square")
        })
        .collect();
    let mut sum = QOperator::zeros(dims);
    for r in &raw {
        sum.add_scaled(r, 1.0).expect("same dims");
    }
    let inv_sqrt = sum.hermitian_map(|l| 1.0 / l.sqrt()).expect("hermitian");
    let effects = raw
        .iter()
        .map(|r| {
            let m = inv_sqrt.matrix() * r.matrix() * inv_sqrt.matrix();
            let m = (&m + m.adjoint()) * c(0.5);
            QOperator::new(m, dims.clone()).expect("square")
        })
        .collect();
    Povm::new(effects).expect("valid by construction")
}

/// Random point of the probability simplex (flat Dirichlet).
pub fn random_distribution<R: Rng>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Random line network with `n` parties; local dims in `2..=max_dim`,
/// central POVMs with 2 or 3 outcomes.
pub fn random_network<R: Rng>(n: usize, max_dim: usize, rng: &mut R) -> LinearNetwork {
    assert!(n >= 3 && max_dim >= 2);
    let local: Vec<usize> = (0..2 * (n - 1)).map(|_| rng.random_range(2..=max_dim)).collect();
    let sources = (0..n - 1)
        .map(|i| random_density(&Dims::new(vec![local[2 * i], local[2 * i + 1]]).unwrap(), rng))
        .collect();
    let measurements = (0..n - 2)
        .map(|i| {
            let outcomes = rng.random_range(2..=3);
            random_povm(&Dims::new(vec![local[2 * i + 1], local[2 * i + 2]]).unwrap(), outcomes, rng)
        })
        .collect();
    LinearNetwork::new(sources, measurements).expect("valid by construction")
}

/// Random separable decomposition with `terms` product terms.
pub fn random_separable<R: Rng>(left: usize, right: usize, terms: usize, rng: &mut R) -> SeparableDecomposition {
    let weights = random_distribution(terms, rng);
    let l = Dims::new(vec![left]).unwrap();
    let r = Dims::new(vec![right]).unwrap();
    let lefts = (0..terms).map(|_| random_density(&l, rng)).collect();
    let rights = (0..terms).map(|_| random_density(&r, rng)).collect();
    SeparableDecomposition::new(weights, lefts, rights).expect("valid by construction")
}

/// Random NLHS model on `n` parties with at most `max_hidden` hidden values
/// per source and endpoint dimensions in `2..=3`.
pub fn random_nlhs_model<R: Rng>(n: usize, max_hidden: usize, rng: &mut R) -> NlhsModel {
    assert!(n >= 3 && max_hidden >= 1);
    let hidden: Vec<Vec<f64>> = (0..n - 1)
        .map(|_| {
            let k = rng.random_range(1..=max_hidden);
            random_distribution(k, rng)
        })
        .collect();
    let responses = (0..n - 2)
        .map(|j| {
            let outcomes = rng.random_range(2..=3);
            let probs = (0..hidden[j].len())
                .map(|_| (0..hidden[j + 1].len()).map(|_| random_distribution(outcomes, rng)).collect())
                .collect();
            ResponseTable::new((0..outcomes).collect(), probs).expect("valid by construction")
        })
        .collect();
    let da = Dims::new(vec![rng.random_range(2..=3)]).unwrap();
    let dz = Dims::new(vec![rng.random_range(2..=3)]).unwrap();
    let left = (0..hidden[0].len()).map(|_| random_density(&da, rng)).collect();
    let right = (0..hidden[n - 2].len()).map(|_| random_density(&dz, rng)).collect();
    NlhsModel::new(hidden, responses, left, right).expect("valid by construction")
}
