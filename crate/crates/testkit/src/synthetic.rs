//! Templated stand-in corpus for exercising the training pipeline.
//!
//! Sensational and neutral headlines are filled from separate word pools
//! with a shared pool of filler words, and a fraction of labels is flipped.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BAIT_TEMPLATES: &[&str] = &[
    "you won't believe what this {n} did with {t}",
    "{k} {p} that will make you {v}",
    "this {a} trick will change how you {v} forever",
    "here's why everyone is {v} about this {n}",
    "which {n} are you based on your {t}",
    "the reason this {n} {v} will shock you",
    "{k} signs you are secretly a {n} person",
    "people can't stop {v} over this {a} {n}",
    "what happens next with this {n} is {a}",
    "only true fans can name these {k} {p}",
];

const NEWS_TEMPLATES: &[&str] = &[
    "{o} {r} {m} amid {c}",
    "{o} approves {m} after {c}",
    "{m} {r} in {g} as {c} continues",
    "{o} delays vote on {m}",
    "{g} {o} announces {m} plan",
    "report finds {c} in {g} {m}",
    "{o} and {o} reach agreement on {m}",
    "{m} rises for {k} straight months in {g}",
];

const POOLS: &[(&str, &[&str])] = &[
    (
        "{n}",
        &[
            "dog",
            "cat",
            "teacher",
            "grandma",
            "baby",
            "chef",
            "couple",
            "celebrity",
            "toddler",
            "neighbour",
        ],
    ),
    (
        "{t}",
        &[
            "star sign",
            "coffee order",
            "favourite snack",
            "birth month",
            "pizza topping",
            "playlist",
        ],
    ),
    (
        "{k}",
        &["7", "11", "13", "17", "19", "21", "23", "27", "31"],
    ),
    (
        "{p}",
        &[
            "photos",
            "tweets",
            "facts",
            "secrets",
            "moments",
            "struggles",
            "hacks",
            "reasons",
        ],
    ),
    (
        "{v}",
        &[
            "cry",
            "laugh",
            "obsessing",
            "freaking out",
            "rethink everything",
            "smile",
            "scream",
        ],
    ),
    (
        "{a}",
        &[
            "simple",
            "weird",
            "adorable",
            "incredible",
            "hilarious",
            "unbelievable",
            "genius",
        ],
    ),
    (
        "{o}",
        &[
            "parliament",
            "senate",
            "ministry",
            "council",
            "court",
            "regulators",
            "union",
            "treasury",
        ],
    ),
    (
        "{r}",
        &[
            "holds", "cuts", "raises", "reviews", "suspends", "extends", "reports",
        ],
    ),
    (
        "{m}",
        &[
            "interest rates",
            "budget",
            "tariffs",
            "rail funding",
            "water rights",
            "pension reform",
            "exports",
            "housing permits",
        ],
    ),
    (
        "{c}",
        &[
            "inflation concerns",
            "lengthy debate",
            "supply shortages",
            "weak demand",
            "strike action",
            "drought",
        ],
    ),
    (
        "{g}",
        &[
            "northern", "coastal", "rural", "eastern", "regional", "national",
        ],
    ),
];

fn fill(template: &str, rng: &mut impl Rng) -> String {
    let mut out = template.to_owned();
    for (slot, words) in POOLS {
        while let Some(pos) = out.find(slot) {
            let word = words.choose(rng).expect("non-empty pool");
            out.replace_range(pos..pos + slot.len(), word);
        }
    }
    out
}

/// `n` headlines with labels (1 = sensational), balanced, with
/// `noise` of the labels flipped.
pub fn corpus(n: usize, noise: f64, seed: u64) -> Vec<(String, u8)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let bait = i % 2 == 0;
            let templates = if bait { BAIT_TEMPLATES } else { NEWS_TEMPLATES };
            let text = fill(templates.choose(&mut rng).expect("templates"), &mut rng);
            let label = u8::from(bait ^ rng.gen_bool(noise));
            (text, label)
        })
        .collect()
}
