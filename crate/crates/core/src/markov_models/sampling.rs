//! Deterministic, chunked sampling of `F` under `mu`.
//!
//! Samples are produced in fixed-size chunks; chunk `c` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `c`. The output therefore
//! depends only on `(seed, n)`, never on how many threads ran the chunks.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson as PoissonDist, StandardNormal};
use rayon::prelude::*;

use super::{CompiledPoly, CubeFunction, Poisson, PoissonFunction};
use crate::rational::{to_f64, Rational};

pub const SAMPLE_CHUNK: usize = 1 << 16;

/// One atom of an exactly enumerated distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub value: Rational,
    pub probability: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoissonSamples {
    pub values: Vec<f64>,
    /// Draws discarded because they landed outside the valid lattice region.
    pub rejected: u64,
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn chunked<T: Send>(n: usize, work: impl Fn(usize, usize) -> Vec<T> + Sync) -> Vec<T> {
    let chunks = n.div_ceil(SAMPLE_CHUNK);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = SAMPLE_CHUNK.min(n - c * SAMPLE_CHUNK);
            work(c, len)
        })
        .collect();
    parts.into_iter().flatten().collect()
}

/// Evaluates `f` at `n` independent standard Gaussian points in `R^dim`.
pub fn sample_ou_with<F>(dim: usize, n: usize, seed: u64, f: F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    chunked(n, |c, len| {
        let mut rng = chunk_rng(seed, c);
        let mut x = vec![0.0; dim];
        (0..len)
            .map(|_| {
                for xi in x.iter_mut() {
                    *xi = rng.sample(StandardNormal);
                }
                f(&x)
            })
            .collect()
    })
}

/// `n` draws of `draw`, chunked and seeded like every other sampler here.
pub fn sample_iid<D>(n: usize, seed: u64, draw: D) -> Vec<f64>
where
    D: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    chunked(n, |c, len| {
        let mut rng = chunk_rng(seed, c);
        (0..len).map(|_| draw(&mut rng)).collect()
    })
}

pub fn sample_ou(f: &CompiledPoly, n: usize, seed: u64) -> Vec<f64> {
    sample_ou_with(f.dimension(), n, seed, |x| f.eval_f64(x))
}

/// Uniform random cube points; prefer [`cube_distribution`] when feasible.
pub fn sample_cube(f: &CubeFunction, n: usize, seed: u64) -> Vec<f64> {
    let values: Vec<f64> = (0..f.len()).map(|x| f.value_f64(x)).collect();
    let points = f.len();
    chunked(n, |c, len| {
        let mut rng = chunk_rng(seed, c);
        (0..len).map(|_| values[rng.random_range(0..points)]).collect()
    })
}

/// The exact law of `F` under the uniform measure, atoms sorted by value.
pub fn cube_distribution(f: &CubeFunction) -> Vec<Atom> {
    let mut counts: BTreeMap<Rational, u64> = BTreeMap::new();
    for x in 0..f.len() {
        *counts.entry(f.value(x)).or_insert(0) += 1;
    }
    let total = Rational::from_integer((f.len() as u64).into());
    counts
        .into_iter()
        .map(|(value, c)| Atom {
            value,
            probability: Rational::from_integer(c.into()) / &total,
        })
        .collect()
}

/// Draws `j ~ Poisson(theta)` and keeps those inside `f`'s valid region.
pub fn sample_poisson(
    model: &Poisson,
    f: &PoissonFunction,
    n: usize,
    seed: u64,
) -> PoissonSamples {
    let theta = to_f64(model.theta());
    let dist = PoissonDist::new(theta).expect("intensity is positive");
    let values: Vec<f64> = f.valid_values().iter().map(to_f64).collect();
    let limit = values.len();
    let chunks = n.div_ceil(SAMPLE_CHUNK);
    let per_chunk: Vec<(Vec<f64>, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = SAMPLE_CHUNK.min(n - c * SAMPLE_CHUNK);
            let mut rng = chunk_rng(seed, c);
            let mut out = Vec::with_capacity(len);
            let mut rejected = 0u64;
            while out.len() < len {
                let j = dist.sample(&mut rng) as usize;
                if j < limit {
                    out.push(values[j]);
                } else {
                    rejected += 1;
                    if limit == 0 {
                        break;
                    }
                }
            }
            (out, rejected)
        })
        .collect();
    let mut samples = PoissonSamples {
        values: Vec::with_capacity(n),
        rejected: 0,
    };
    for (v, r) in per_chunk {
        samples.values.extend(v);
        samples.rejected += r;
    }
    samples
}
