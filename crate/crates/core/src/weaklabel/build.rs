use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Example, Provenance, WeakDataset};
use crate::corpus::{CleanText, CorpusPartition, Polarity};
use crate::scorer::{rank, Direction, ScoreTable};
use crate::{Error, Result};

/// Cleaned text for every id a builder may touch.
pub type TextIndex = HashMap<String, CleanText>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InformedConfig {
    pub top_k: usize,
    pub neg_per_list: usize,
    pub bottom_frac: f64,
    /// Scorers whose rankings are combined, in order.
    pub scorers: Vec<String>,
}

impl Default for InformedConfig {
    fn default() -> Self {
        Self {
            top_k: 1000,
            neg_per_list: 500,
            bottom_frac: 0.8,
            scorers: vec!["hope".into(), "empathy".into()],
        }
    }
}

impl InformedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_k == 0 || self.neg_per_list == 0 {
            return Err(Error::Config(
                "top_k and neg_per_list must be positive".into(),
            ));
        }
        if !(self.bottom_frac > 0.0 && self.bottom_frac < 1.0) {
            return Err(Error::Config(format!(
                "bottom_frac {} is not in (0, 1)",
                self.bottom_frac
            )));
        }
        if self.scorers.is_empty() {
            return Err(Error::Config(
                "informed sampling needs at least one scorer".into(),
            ));
        }
        Ok(())
    }

    /// Number of leading ranks excluded from negative sampling for a list of
    /// length `n`; the bottom is `n - floor(bottom_frac * n)` onward.
    pub fn bottom_start(&self, n: usize) -> usize {
        n - (self.bottom_frac * n as f64).floor() as usize
    }
}

fn text_of<'a>(texts: &'a TextIndex, id: &str) -> Result<&'a CleanText> {
    texts
        .get(id)
        .ok_or_else(|| Error::InsufficientData(format!("no text for tweet `{id}`")))
}

fn shortfall(what: &str, need: usize, have: usize) -> Error {
    Error::InsufficientData(format!(
        "{what}: need {need}, have {have} (short by {})",
        need - have
    ))
}

/// One RNG per named draw so that adding a draw never shifts another.
fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform sample of `k` items without replacement, in draw order.
fn sample<T: Clone>(items: &[T], k: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    index::sample(rng, items.len(), k)
        .into_iter()
        .map(|i| items[i].clone())
        .collect()
}

/// Informed sampling: positives are the top `top_k` supportive posts under
/// each scorer, negatives a uniform sample from the low-scoring tail of each
/// not-supportive ranking. Texts are deduplicated within and across classes.
pub fn build_informed(
    table: &ScoreTable,
    part: &CorpusPartition,
    texts: &TextIndex,
    config: &InformedConfig,
    seed: u64,
) -> Result<WeakDataset> {
    config.validate()?;
    let n_sup = part.supportive.len();
    let n_not = part.not_supportive.len();
    if n_sup < config.top_k {
        return Err(shortfall(
            "supportive posts for the top lists",
            config.top_k,
            n_sup,
        ));
    }
    let bottom_len = n_not - config.bottom_start(n_not);
    if bottom_len < config.neg_per_list {
        return Err(shortfall(
            "not-supportive posts in the bottom of each ranking",
            config.neg_per_list,
            bottom_len,
        ));
    }

    let mut positives: Vec<(String, Vec<String>)> = Vec::new();
    let mut pos_slot: HashMap<String, usize> = HashMap::new();
    for scorer in &config.scorers {
        let ranked = rank(
            table,
            scorer,
            part.supportive.iter().map(String::as_str),
            Direction::Descending,
        )?;
        for id in ranked.into_iter().take(config.top_k) {
            match pos_slot.get(&id) {
                Some(&i) => positives[i].1.push(scorer.clone()),
                None => {
                    pos_slot.insert(id.clone(), positives.len());
                    positives.push((id, vec![scorer.clone()]));
                }
            }
        }
    }

    let mut negatives: Vec<(String, Vec<String>)> = Vec::new();
    let mut neg_slot: HashMap<String, usize> = HashMap::new();
    for (k, scorer) in config.scorers.iter().enumerate() {
        let ranked = rank(
            table,
            scorer,
            part.not_supportive.iter().map(String::as_str),
            Direction::Descending,
        )?;
        let bottom = &ranked[config.bottom_start(n_not)..];
        // kept in rank order
        let mut picks = index::sample(
            &mut rng_for(seed, k as u64),
            bottom.len(),
            config.neg_per_list,
        )
        .into_vec();
        picks.sort_unstable();
        for id in picks.into_iter().map(|i| bottom[i].clone()) {
            match neg_slot.get(&id) {
                Some(&i) => negatives[i].1.push(scorer.clone()),
                None => {
                    neg_slot.insert(id.clone(), negatives.len());
                    negatives.push((id, vec![scorer.clone()]));
                }
            }
        }
    }

    let mut ds = WeakDataset::new("informed", seed, config_map(config));
    ds.config.insert(
        "n_positive_candidates".into(),
        (config.top_k * config.scorers.len()).to_string(),
    );
    let mut seen: HashSet<String> = HashSet::new();
    for (id, via) in positives {
        let text = text_of(texts, &id)?.text.clone();
        if seen.insert(text.clone()) {
            ds.examples.push(Example {
                id,
                text,
                label: Some(Polarity::Supportive),
                provenance: Provenance::InformedPositive,
                via,
            });
        }
    }
    for (id, via) in negatives {
        let text = text_of(texts, &id)?.text.clone();
        if seen.insert(text.clone()) {
            ds.examples.push(Example {
                id,
                text,
                label: Some(Polarity::NotSupportive),
                provenance: Provenance::InformedNegative,
                via,
            });
        }
    }
    Ok(ds)
}

fn config_map(c: &InformedConfig) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("top_k".to_string(), c.top_k.to_string()),
        ("neg_per_list".to_string(), c.neg_per_list.to_string()),
        ("bottom_frac".to_string(), format!("{:?}", c.bottom_frac)),
        ("scorers".to_string(), c.scorers.join(",")),
    ])
}

/// Uniform samples of `n_pos` supportive and `n_neg` not-supportive posts,
/// labeled by hashtag side alone.
pub fn build_hashtag_baseline(
    part: &CorpusPartition,
    texts: &TextIndex,
    n_pos: usize,
    n_neg: usize,
    seed: u64,
) -> Result<WeakDataset> {
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Config(format!(
            "hashtag baseline needs positive class sizes, got n_pos={n_pos} n_neg={n_neg}"
        )));
    }
    let sup: Vec<&String> = part.supportive.iter().collect();
    let not: Vec<&String> = part.not_supportive.iter().collect();
    if sup.len() < n_pos {
        return Err(shortfall("supportive posts", n_pos, sup.len()));
    }
    if not.len() < n_neg {
        return Err(shortfall("not-supportive posts", n_neg, not.len()));
    }
    let config = BTreeMap::from([
        ("n_pos".to_string(), n_pos.to_string()),
        ("n_neg".to_string(), n_neg.to_string()),
    ]);
    let mut ds = WeakDataset::new("hashtag", seed, config);
    let draws = [
        (
            sample(&sup, n_pos, &mut rng_for(seed, 0)),
            Polarity::Supportive,
            Provenance::HashtagPositive,
        ),
        (
            sample(&not, n_neg, &mut rng_for(seed, 1)),
            Polarity::NotSupportive,
            Provenance::HashtagNegative,
        ),
    ];
    for (ids, label, provenance) in draws {
        for id in ids {
            ds.examples.push(Example {
                id: id.clone(),
                text: text_of(texts, id)?.text.clone(),
                label: Some(label),
                provenance,
                via: Vec::new(),
            });
        }
    }
    Ok(ds)
}

/// Uniform sample of `n` posts from both partition sides, unlabeled.
pub fn build_eval_sample(
    part: &CorpusPartition,
    texts: &TextIndex,
    n: usize,
    seed: u64,
) -> Result<WeakDataset> {
    if n == 0 {
        return Err(Error::Config(
            "evaluation sample size must be positive".into(),
        ));
    }
    let pool: Vec<&String> = part.supportive.union(&part.not_supportive).collect();
    if pool.len() < n {
        return Err(shortfall(
            "posts in the supportive and not-supportive sides",
            n,
            pool.len(),
        ));
    }
    let config = BTreeMap::from([("n".to_string(), n.to_string())]);
    let mut ds = WeakDataset::new("eval", seed, config);
    for id in sample(&pool, n, &mut rng_for(seed, 0)) {
        ds.examples.push(Example {
            id: id.clone(),
            text: text_of(texts, id)?.text.clone(),
            label: None,
            provenance: Provenance::Gold,
            via: Vec::new(),
        });
    }
    Ok(ds)
}

/// Removes evaluation posts from every side so weak labels never see them.
pub fn exclude(part: &CorpusPartition, held_out: &WeakDataset) -> CorpusPartition {
    let ids: BTreeSet<String> = held_out.ids();
    part.without(&ids)
}
