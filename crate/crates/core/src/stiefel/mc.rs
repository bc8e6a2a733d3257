use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Samples drawn per independent stream; fixes the work split, so results do
/// not depend on the number of threads.
pub const CHUNK: usize = 1024;

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
}

impl McEstimate {
    pub fn exact(value: f64) -> Self {
        McEstimate { estimate: value, stderr: 0.0, n: 0 }
    }

    /// `|estimate - target| <= sigmas · stderr` (with a floor for exact estimates).
    pub fn agrees_with(&self, target: f64, sigmas: f64) -> bool {
        (self.estimate - target).abs() <= sigmas * self.stderr + 1e-12 * target.abs().max(1.0)
    }

    pub fn z_score(&self, target: f64) -> f64 {
        if self.stderr == 0.0 {
            return if self.estimate == target { 0.0 } else { f64::INFINITY };
        }
        (self.estimate - target) / self.stderr
    }
}

/// Independent generator for one stream of a seeded computation.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Running sums for several simultaneous estimators.
#[derive(Debug, Clone)]
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    n: usize,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Moments { sum: vec![0.0; dim], sum_sq: vec![0.0; dim], n: 0 }
    }

    fn merge(&mut self, other: &Moments) {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
        self.n += other.n;
    }

    fn finish(&self) -> Vec<McEstimate> {
        let n = self.n as f64;
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(&s, &sq)| {
                let mean = s / n;
                let var = if self.n > 1 { ((sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
                McEstimate { estimate: mean, stderr: (var / n).sqrt(), n: self.n }
            })
            .collect()
    }
}

/// Average of `dim` simultaneous sample functions over `n` draws.
///
/// `sample` writes one draw of every estimator into its output slice; draws
/// in the same call share randomness, which is how paired estimators (and
/// their differences) are formed.
pub fn monte_carlo_many<F>(seed: u64, n: usize, dim: usize, sample: F) -> Vec<McEstimate>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    assert!(n >= 1, "Monte-Carlo needs at least one sample");
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let mut m = Moments::new(dim);
            let mut buf = vec![0.0; dim];
            for _ in c * CHUNK..((c + 1) * CHUNK).min(n) {
                sample(&mut rng, &mut buf);
                for (i, &v) in buf.iter().enumerate() {
                    m.sum[i] += v;
                    m.sum_sq[i] += v * v;
                }
                m.n += 1;
            }
            m
        })
        .collect();
    let mut total = Moments::new(dim);
    for p in &partials {
        total.merge(p);
    }
    total.finish()
}

pub fn monte_carlo<F>(seed: u64, n: usize, sample: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    monte_carlo_many(seed, n, 1, |rng, out| out[0] = sample(rng))[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn uniform_mean() {
        let est = monte_carlo(3, 100_000, |rng| rng.random::<f64>());
        assert!(est.agrees_with(0.5, 4.0), "{est:?}");
        assert!((est.stderr - (1.0f64 / 12.0 / 1e5).sqrt()).abs() < 1e-4);
        assert_eq!(est.n, 100_000);
    }

    #[test]
    fn independent_of_thread_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| monte_carlo(11, 10_000, |rng| rng.random::<f64>().powi(3)))
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn paired_difference_has_smaller_error() {
        let est = monte_carlo_many(5, 20_000, 3, |rng, out| {
            let u: f64 = rng.random();
            let noise: f64 = rng.random::<f64>() * 1e-3;
            out[0] = u;
            out[1] = u + noise;
            out[2] = out[1] - out[0];
        });
        assert!(est[2].stderr < est[0].stderr / 100.0);
    }
}
