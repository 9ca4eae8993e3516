use std::path::Path;

use supportive::corpus::write_corpus;
use supportive::synth::{
    empathy_seed, generate_corpus, gold_training_set, hope_seed, write_labeled, SynthConfig,
};

use crate::artifacts::write;
use crate::error::CliError;

/// Writes a synthetic corpus, its ground truth, scorer seed files, a gold
/// training file and a ready-to-run `pipeline.toml` into `dir`.
pub fn write_fixture(dir: &Path, n_tweets: usize, seed: u64) -> Result<(), CliError> {
    if n_tweets == 0 {
        return Err(CliError::Config("--tweets must be positive".into()));
    }
    let c = generate_corpus(&SynthConfig {
        n_tweets,
        seed,
        ..SynthConfig::default()
    });
    std::fs::create_dir_all(dir.join("seeds"))
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
    write_corpus(dir.join("corpus.jsonl"), &c.records)?;
    let mut truth = String::from("id\tlabel\n");
    for (id, t) in &c.truth {
        truth.push_str(&format!("{id}\t{}\n", u8::from(*t)));
    }
    write(&dir.join("truth.tsv"), &truth)?;
    write_labeled(
        dir.join("seeds/hope.jsonl"),
        &hope_seed(1000, seed.wrapping_add(1)),
    )?;
    write_labeled(
        dir.join("seeds/empathy.jsonl"),
        &empathy_seed(1000, seed.wrapping_add(2)),
    )?;
    write_labeled(
        dir.join("supervised.jsonl"),
        &gold_training_set(2000, seed.wrapping_add(3)),
    )?;

    // small corpora cannot fill the full-size top lists
    let (top_k, neg, eval) = if n_tweets >= 20_000 {
        (1000, 500, 1000)
    } else {
        let k = (n_tweets / 25).clamp(2, 200);
        (k, k / 2, (n_tweets / 10).clamp(10, 500))
    };
    let config = format!(
        r#"corpus = "corpus.jsonl"
output_dir = "out"
truth = "truth.tsv"
supervised_train = "supervised.jsonl"
min_tokens = 10
top_k = {top_k}
neg_per_list = {neg}
bottom_frac = 0.8
eval_size = {eval}
n_pairs = 100000
runs = 5

[split]
train = 0.9
validation = 0.1

[seeds]
master = {seed}

[[scorers]]
name = "hope"
train = "seeds/hope.jsonl"

[[scorers]]
name = "empathy"
train = "seeds/empathy.jsonl"

# An external scorer speaks the line protocol on stdin and stdout:
# [[scorers]]
# name = "empathy"
# command = ["{{self}}", "serve-scorer", "--model", "path/to/empathy.model"]
"#
    );
    write(&dir.join("pipeline.toml"), &config)
}
