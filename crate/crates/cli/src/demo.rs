//! Small synthetic corpus for smoke runs.
//!
//! Word vectors are drawn around one random center per topic, and each
//! phrase embedding is the normed mean of its non-stop words.

use std::collections::{HashMap, HashSet};

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simnerve_core::corpus::compose_phrase_from_text;
use simnerve_core::{Interaction, InteractionSet};

pub const DIMENSION: usize = 8;

const TOPICS: &[&[&str]] = &[
    &["light", "lights", "lamp", "bulb", "dim", "bright"],
    &["door", "lock", "unlock", "motion", "camera", "detected", "opened"],
    &["rain", "temperature", "weather", "forecast", "sun", "hot"],
    &["phone", "call", "sms", "notify", "answered", "message"],
    &["music", "speaker", "play", "song", "volume"],
    &["plant", "soil", "moisture", "water", "dry"],
];

const STOP_WORDS: &[&str] = &["if", "then", "and", "by", "a", "the", "on", "at", "to", "is", "me", "turn", "send", "when"];

/// `(if, then)` phrase pairs; every content word belongs to a topic.
const RULES: &[(&str, &str)] = &[
    ("motion detected at door", "turn on lights"),
    ("door opened", "turn on lamp"),
    ("door unlock", "lights bright"),
    ("camera motion detected", "notify phone"),
    ("door opened", "send sms message"),
    ("lock door", "notify phone message"),
    ("rain forecast", "notify phone"),
    ("temperature hot", "send message"),
    ("weather forecast rain", "sms me"),
    ("soil moisture dry", "call phone"),
    ("plant soil dry", "notify message"),
    ("soil moisture dry", "water plant"),
    ("plant dry", "water soil"),
    ("phone call answered", "play music"),
    ("phone call", "speaker volume"),
    ("sms message", "play song"),
    ("play music", "dim lights"),
    ("song play", "lamp dim"),
    ("speaker play", "bulb bright"),
    ("sun", "dim lamp"),
    ("sun hot", "lights dim"),
    ("rain", "lock door"),
    ("temperature", "lock"),
    ("light bright", "lamp bright"),
    ("lamp dim", "bulb dim"),
    ("phone message", "sms notify"),
    ("door lock", "unlock door"),
    ("rain weather", "forecast rain"),
    ("music song", "play song"),
    ("soil water", "plant moisture"),
];

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

pub fn demo_corpus(seed: u64) -> Result<InteractionSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |rng: &mut ChaCha8Rng| -> f64 {
        // Box–Muller on (0, 1] uniforms.
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut vocabulary: HashMap<String, Vec<f64>> = HashMap::new();
    for words in TOPICS {
        let center = unit((0..DIMENSION).map(|_| gauss(&mut rng)).collect());
        for w in *words {
            let v = center.iter().map(|c| c + 0.35 * gauss(&mut rng)).collect();
            vocabulary.insert(w.to_string(), unit(v));
        }
    }
    let stop: HashSet<String> = STOP_WORDS.iter().map(|s| s.to_string()).collect();
    let interactions = RULES
        .iter()
        .enumerate()
        .map(|(k, (i, t))| {
            let iv = compose_phrase_from_text(i, &vocabulary, &stop)?;
            let tv = compose_phrase_from_text(t, &vocabulary, &stop)?;
            Ok(Interaction::new(k as i64 + 1, *i, *t, iv, tv)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InteractionSet::new(interactions)?)
}

pub const DEMO_CONFIG: &str = "\
# simnerve pipeline on the bundled demo corpus.
input = \"demo_corpus.csv\"
lens = \"pca\"
resolution = 2
gain = 2.0
histogram_bins = 10
min_component_size = 1
gamma = 1.0
louvain_seed = 0
layout_iterations = 200
layout_seed = 0
focal_ids = [1, 14]
top = 3
low_threshold = \"mean\"
max_model = 2
output_dir = \"out\"
";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_unit_interactions() {
        let set = demo_corpus(0).unwrap();
        assert_eq!(set.len(), 30);
        assert_eq!(set.dimension(), DIMENSION);
    }

    #[test]
    fn deterministic() {
        let a = demo_corpus(0).unwrap();
        let b = demo_corpus(0).unwrap();
        assert_eq!(a.interactions(), b.interactions());
    }
}
