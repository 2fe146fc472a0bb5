//! Seeded synthetic review corpus.
//!
//! The generator is deterministic for a given seed and size. For `n` reviews:
//!
//! - Ratings: exactly `round(0.5 n)` positive (4 or 5 stars), `round(0.3 n)`
//!   negative (1 or 2 stars) and the remainder neutral (3 stars), shuffled.
//! - Duplicates: `round(0.06 n)` rows (12 of 200) repeat an earlier review of the
//!   same class under a fresh id, sometimes re-cased or re-spaced. All other
//!   rows are distinct under the dedup key.
//! - Planted phrases, per unique review of the class:
//!   - positive: "friendly staff" with probability 0.40, "great pilot" 0.30;
//!   - negative: "long wait" 0.45, "cancellation refund" 0.15.
//! - Every review also gets one or two filler sentences from its class pool and
//!   one visit-detail sentence.

use std::collections::HashSet;
use std::io::{self, Write};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{normalize_text, ReviewRecord};
use crate::insights::SentimentClass;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_REVIEWS: usize = 200;

pub const FRIENDLY_STAFF_RATE: f64 = 0.40;
pub const GREAT_PILOT_RATE: f64 = 0.30;
pub const LONG_WAIT_RATE: f64 = 0.45;
pub const CANCELLATION_REFUND_RATE: f64 = 0.15;
pub const DUPLICATE_FRACTION: f64 = 0.06;

const FRIENDLY_STAFF: &[&str] =
    &["Friendly staff and a great pilot.", "The friendly staff made us feel safe.", "Very friendly staff at check-in."];
const GREAT_PILOT: &[&str] = &[
    "Great pilot, smooth flight!",
    "We had a great pilot who knew the city.",
    "Our great pilot warned us before every turn.",
];
const LONG_WAIT: &[&str] = &[
    "We had a long wait before boarding.",
    "Long wait in a crowded waiting area.",
    "Long wait and no updates from anyone.",
];
const CANCELLATION_REFUND: &[&str] =
    &["Still waiting on our cancellation refund.", "The cancellation refund took six weeks."];

const POSITIVE_FILLER: &[&str] = &[
    "Booking online was quick and easy.",
    "The safety briefing was thorough and clear.",
    "We used a discount coupon from their website.",
    "The views of the skyline were breathtaking.",
    "The guided tour covered every famous landmark.",
    "The helicopter looked clean and well maintained.",
    "Highly recommend this tour to everyone.",
    "Best experience of our trip!",
    "The pilot pointed out every landmark along the route.",
    "Barely any wait at check-in.",
];
const NEGATIVE_FILLER: &[&str] = &[
    "The waiting area was cramped and hot.",
    "Windows were scratched so visibility was poor.",
    "Our flight was delayed twice without explanation.",
    "Way overpriced for such a short ride.",
    "Check-in was disorganized and slow.",
    "They asked for our weight in front of everyone.",
    "The headset did not work during the flight.",
    "The staff seemed rushed and distracted.",
];
const NEUTRAL_FILLER: &[&str] = &[
    "The flight lasted about fifteen minutes.",
    "It was okay, nothing special.",
    "Parking was available nearby.",
    "We flew at 5 p.m. and the weather was fine.",
    "The staff weighed everyone before boarding.",
    "Had to wait a bit but it was fine.",
    "Prices are similar to other tours in the area.",
];

const WEEKDAYS: &[&str] = &["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"];
const DAYPARTS: &[&str] = &["morning", "afternoon", "evening"];
const COMPANIONS: &[&str] = &["my wife", "my husband", "two friends", "our kids", "my parents", "coworkers"];
const SOURCES: &[&str] = &["tripsite", "mapsreview", "socialfeed"];

fn class_counts(n: usize) -> (usize, usize, usize) {
    let pos = (n as f64 * 0.5).round() as usize;
    let neg = ((n as f64 * 0.3).round() as usize).min(n - pos);
    (pos, neg, n - pos - neg)
}

fn compose(rng: &mut ChaCha8Rng, class: SentimentClass) -> String {
    let mut parts: Vec<&str> = Vec::new();
    let filler = match class {
        SentimentClass::Positive => {
            if rng.gen_bool(FRIENDLY_STAFF_RATE) {
                parts.push(FRIENDLY_STAFF.choose(rng).unwrap());
            }
            if rng.gen_bool(GREAT_PILOT_RATE) {
                parts.push(GREAT_PILOT.choose(rng).unwrap());
            }
            POSITIVE_FILLER
        }
        SentimentClass::Negative => {
            if rng.gen_bool(LONG_WAIT_RATE) {
                parts.push(LONG_WAIT.choose(rng).unwrap());
            }
            if rng.gen_bool(CANCELLATION_REFUND_RATE) {
                parts.push(CANCELLATION_REFUND.choose(rng).unwrap());
            }
            NEGATIVE_FILLER
        }
        SentimentClass::Neutral => NEUTRAL_FILLER,
    };
    let extra = rng.gen_range(1..=2);
    parts.extend(filler.choose_multiple(rng, extra));
    parts.shuffle(rng);
    let detail = format!(
        "We went on a {} {} with {}.",
        WEEKDAYS.choose(rng).unwrap(),
        DAYPARTS.choose(rng).unwrap(),
        COMPANIONS.choose(rng).unwrap()
    );
    let mut text = parts.join(" ");
    text.push(' ');
    text.push_str(&detail);
    text
}

fn rating_for(rng: &mut ChaCha8Rng, class: SentimentClass) -> u8 {
    match class {
        SentimentClass::Positive => rng.gen_range(4..=5),
        SentimentClass::Negative => rng.gen_range(1..=2),
        SentimentClass::Neutral => 3,
    }
}

/// Generate `n` reviews from `seed`. See the module docs for the planting rates.
pub fn generate(seed: u64, n: usize) -> Vec<ReviewRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pos, neg, neu) = class_counts(n);
    let mut labels: Vec<SentimentClass> = std::iter::repeat_n(SentimentClass::Positive, pos)
        .chain(std::iter::repeat_n(SentimentClass::Negative, neg))
        .chain(std::iter::repeat_n(SentimentClass::Neutral, neu))
        .collect();
    labels.shuffle(&mut rng);

    // A duplicate may sit at any position whose class already appeared earlier.
    let mut seen_class = HashSet::new();
    let candidates: Vec<usize> =
        labels.iter().enumerate().filter(|(_, c)| !seen_class.insert(**c)).map(|(i, _)| i).collect();
    let dups = ((n as f64 * DUPLICATE_FRACTION).round() as usize).min(candidates.len());
    let dup_positions: HashSet<usize> =
        index::sample(&mut rng, candidates.len(), dups).into_iter().map(|i| candidates[i]).collect();

    let mut used_texts = HashSet::new();
    let mut out: Vec<ReviewRecord> = Vec::with_capacity(n);
    let mut originals: Vec<usize> = Vec::new();
    for (i, &class) in labels.iter().enumerate() {
        let review_id = format!("R{:04}", i + 1);
        let source = Some(SOURCES.choose(&mut rng).unwrap().to_string());
        let date =
            Some(format!("{}-{:02}-{:02}", rng.gen_range(2015..=2024), rng.gen_range(1..=12), rng.gen_range(1..=28)));
        if dup_positions.contains(&i) {
            let same_class: Vec<usize> = originals.iter().copied().filter(|&j| labels_of(&out[j]) == class).collect();
            let &j = same_class.choose(&mut rng).expect("earlier review of the same class");
            let text = match rng.gen_range(0..3) {
                0 => out[j].text.clone(),
                1 => out[j].text.to_uppercase(),
                _ => format!("  {}  ", out[j].text.replace(' ', "   ")),
            };
            out.push(ReviewRecord { review_id, rating: out[j].rating, text, source, date });
            continue;
        }
        let text = loop {
            let candidate = compose(&mut rng, class);
            if used_texts.insert(normalize_text(&candidate)) {
                break candidate;
            }
        };
        let rating = rating_for(&mut rng, class);
        originals.push(out.len());
        out.push(ReviewRecord { review_id, rating, text, source, date });
    }
    out
}

fn labels_of(r: &ReviewRecord) -> SentimentClass {
    crate::insights::classify_rating(r.rating).expect("generated rating in range")
}

pub fn write_csv<W: Write>(records: &[ReviewRecord], out: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["review_id", "rating", "text", "source", "date"])?;
    for r in records {
        w.write_record([
            r.review_id.as_str(),
            &r.rating.to_string(),
            &r.text,
            r.source.as_deref().unwrap_or(""),
            r.date.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()
}

pub fn write_jsonl<W: Write>(records: &[ReviewRecord], mut out: W) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_seed() {
        assert_eq!(generate(7, 50), generate(7, 50));
        assert_ne!(generate(7, 50), generate(8, 50));
    }

    #[test]
    fn class_split_is_exact() {
        let reviews = generate(DEFAULT_SEED, DEFAULT_REVIEWS);
        assert_eq!(reviews.len(), 200);
        let count = |lo: u8, hi: u8| reviews.iter().filter(|r| (lo..=hi).contains(&r.rating)).count();
        assert_eq!((count(4, 5), count(1, 2), count(3, 3)), (100, 60, 40));
    }

    #[test]
    fn tiny_sizes() {
        assert!(generate(1, 0).is_empty());
        assert_eq!(generate(1, 1).len(), 1);
        assert_eq!(generate(1, 3).len(), 3);
    }
}
