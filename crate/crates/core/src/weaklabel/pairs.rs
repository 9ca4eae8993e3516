use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::CorpusPartition;
use crate::scorer::ScoreTable;
use crate::stats::MeanStd;
use crate::{Error, Result};

/// Pairs simulated per independently seeded chunk.
const CHUNK: u64 = 8192;

/// Monte-Carlo estimate of P(score(x) > score(y)) for x supportive and y
/// not-supportive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRate {
    pub scorer: String,
    pub rate: f64,
    pub wins: u64,
    pub n_pairs: u64,
    pub seed: u64,
}

fn side_scores<'a>(
    table: &ScoreTable,
    k: usize,
    ids: impl Iterator<Item = &'a String>,
) -> Result<Vec<f64>> {
    ids.map(|id| table.score(id, k)).collect()
}

/// Counts strict wins over pairs drawn uniformly with replacement.
pub fn pairwise_rate(
    table: &ScoreTable,
    part: &CorpusPartition,
    scorer: &str,
    n_pairs: u64,
    seed: u64,
) -> Result<PairRate> {
    let k = table.scorer_index(scorer)?;
    let sup = side_scores(table, k, part.supportive.iter())?;
    let not = side_scores(table, k, part.not_supportive.iter())?;
    pairwise_rate_from_scores(scorer, &sup, &not, n_pairs, seed)
}

pub fn pairwise_rate_from_scores(
    scorer: &str,
    supportive: &[f64],
    not_supportive: &[f64],
    n_pairs: u64,
    seed: u64,
) -> Result<PairRate> {
    if supportive.is_empty() || not_supportive.is_empty() {
        return Err(Error::InsufficientData(format!(
            "pair rate needs both sides nonempty (supportive {}, not-supportive {})",
            supportive.len(),
            not_supportive.len()
        )));
    }
    if n_pairs == 0 {
        return Err(Error::Config("n_pairs must be positive".into()));
    }
    let chunks = n_pairs.div_ceil(CHUNK);
    let wins: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = CHUNK.min(n_pairs - c * CHUNK);
            let mut w = 0u64;
            for _ in 0..len {
                let x = supportive[rng.gen_range(0..supportive.len())];
                let y = not_supportive[rng.gen_range(0..not_supportive.len())];
                w += u64::from(x > y);
            }
            w
        })
        .sum();
    Ok(PairRate {
        scorer: scorer.to_string(),
        rate: wins as f64 / n_pairs as f64,
        wins,
        n_pairs,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatedRate {
    pub scorer: String,
    pub runs: Vec<PairRate>,
    pub mean: f64,
    /// Population standard deviation over runs.
    pub std: f64,
}

/// `runs` independent estimates with seeds `base_seed + i`.
pub fn repeated_rate(
    table: &ScoreTable,
    part: &CorpusPartition,
    scorer: &str,
    n_pairs: u64,
    runs: usize,
    base_seed: u64,
) -> Result<RepeatedRate> {
    if runs < 1 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    let k = table.scorer_index(scorer)?;
    let sup = side_scores(table, k, part.supportive.iter())?;
    let not = side_scores(table, k, part.not_supportive.iter())?;
    let results: Vec<PairRate> = (0..runs as u64)
        .map(|i| pairwise_rate_from_scores(scorer, &sup, &not, n_pairs, base_seed.wrapping_add(i)))
        .collect::<Result<_>>()?;
    let rates: Vec<f64> = results.iter().map(|r| r.rate).collect();
    let ms = MeanStd::of(&rates).expect("runs >= 1");
    Ok(RepeatedRate {
        scorer: scorer.to_string(),
        runs: results,
        mean: ms.mean,
        std: ms.std,
    })
}
