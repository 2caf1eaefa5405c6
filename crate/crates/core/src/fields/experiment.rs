use rayon::prelude::*;

use super::renormalize::{norming, renormalize, NormingRegime};
use super::simulate::{subordinate, Method, Sampler, Subordinator};
use crate::error::Result;
use crate::spectral::Correlation;

/// Monte Carlo of renormalized block sums: every replicate simulates a fresh box of
/// `blocks` blocks of side `block` per axis from its own random stream.
#[derive(Debug, Clone)]
pub struct BlockExperiment {
    pub correlation: Correlation,
    pub subordinator: Subordinator,
    pub method: Method,
    pub block: usize,
    pub blocks: usize,
    pub regime: NormingRegime,
}

#[derive(Debug, Clone)]
pub struct BlockSamples {
    pub norming: f64,
    /// `values[replicate][block]`, blocks in row-major order.
    pub values: Vec<Vec<f64>>,
}

impl BlockSamples {
    /// The block at flat index `b` across replicates.
    pub fn block(&self, b: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[b]).collect()
    }
}

impl BlockExperiment {
    pub fn run(&self, seed: u64, replicates: usize) -> Result<BlockSamples> {
        let a_n = norming(&self.correlation, self.block, self.regime)?;
        let side = self.block * self.blocks;
        let shape = vec![side; self.correlation.nu()];
        let sampler = Sampler::new(&self.correlation, &shape, self.method)?;
        let values = (0..replicates as u64)
            .into_par_iter()
            .map(|r| {
                let x = sampler.sample(seed, r);
                let xi = subordinate(&x, &self.subordinator);
                renormalize(&xi, self.block, a_n).map(|z| z.values)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockSamples { norming: a_n, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::variance_exact;
    use crate::hermite::HermiteExpansion;
    use crate::spectral::CorrelationModel;
    use crate::stats::moments;

    #[test]
    fn mc_variance_matches_exact() {
        let corr = Correlation::PowerLaw(CorrelationModel::power_law_with_amplitude(1, 0.3, 0.5).unwrap());
        let h = HermiteExpansion::pure(2);
        let exp = BlockExperiment {
            correlation: corr,
            subordinator: Subordinator::Hermite(h.clone()),
            method: Method::CirculantEmbedding,
            block: 64,
            blocks: 1,
            regime: NormingRegime::Noncentral { k: 2 },
        };
        let s = exp.run(11, 2000).unwrap();
        let m = moments(&s.block(0)).unwrap();
        let want = variance_exact(&corr, &h, 64, s.norming).unwrap();
        assert!(m.variance.within(want, 4.0), "{:?} vs {want}", m.variance);
    }

    #[test]
    fn independent_of_thread_count() {
        let corr = Correlation::PowerLaw(CorrelationModel::power_law_with_amplitude(1, 0.5, 0.5).unwrap());
        let exp = BlockExperiment {
            correlation: corr,
            subordinator: Subordinator::Hermite(HermiteExpansion::pure(2)),
            method: Method::CirculantEmbedding,
            block: 16,
            blocks: 2,
            regime: NormingRegime::Central,
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| exp.run(3, 50).unwrap());
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| exp.run(3, 50).unwrap());
        assert_eq!(one.values, many.values);
    }
}
