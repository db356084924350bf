use std::collections::BTreeSet;

use super::TargetOpinionPair;

/// Word lists driving [`naive_extract_pairs`].
///
/// A token is adjective-like when it is in `adjectives`, or ends with one of
/// `adjective_suffixes` and is at least three characters longer than the suffix.
/// A token is noun-like when it is alphabetic and not adjective-like, a stop
/// word, or a negation. Entries of `collocations` are merged into one token first
/// and always count as nouns.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractorConfig {
    pub adjectives: BTreeSet<String>,
    pub adjective_suffixes: Vec<String>,
    pub collocations: Vec<String>,
    pub negations: BTreeSet<String>,
    pub stop_words: BTreeSet<String>,
}

fn set(words: &[&str]) -> BTreeSet<String> {
    words.iter().map(|s| s.to_string()).collect()
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig {
            adjectives: set(&[
                "good", "great", "bad", "best", "worst", "new", "old", "nice", "poor", "perfect",
                "awesome", "terrible", "horrible", "amazing", "excellent", "fast", "slow", "big",
                "small", "long", "short", "cheap", "expensive", "gorgeous", "ugly", "crappy",
                "sexy", "cool", "fine", "happy", "sad", "lovely", "solid", "weak", "strong",
            ]),
            adjective_suffixes: ["able", "ible", "ful", "ous", "ive", "less", "ish"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            collocations: ["battery life", "picture quality", "sound quality", "customer service", "touch screen", "screen size"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            negations: set(&[
                "not", "no", "never", "don't", "doesn't", "didn't", "isn't", "wasn't", "aren't",
                "can't", "cannot", "won't", "dont", "doesnt", "isnt", "cant",
            ]),
            stop_words: set(&[
                "a", "an", "the", "this", "that", "my", "your", "his", "her", "its", "our",
                "their", "is", "are", "was", "were", "be", "and", "or", "but", "of", "to", "in",
                "on", "at", "for", "with", "i", "you", "it", "so", "very", "really",
            ]),
        }
    }
}

impl ExtractorConfig {
    fn is_adjective(&self, tok: &str) -> bool {
        if self.stop_words.contains(tok) || self.negations.contains(tok) {
            return false;
        }
        self.adjectives.contains(tok)
            || self
                .adjective_suffixes
                .iter()
                .any(|s| tok.ends_with(s.as_str()) && tok.len() >= s.len() + 3)
    }

    fn is_noun(&self, tok: &str) -> bool {
        !tok.is_empty()
            && tok.chars().all(|c| c.is_alphabetic())
            && !self.is_adjective(tok)
            && !self.stop_words.contains(tok)
            && !self.negations.contains(tok)
    }
}

fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter(|t| !(t.starts_with('#') || t.starts_with('@') || t.starts_with("http")))
        .map(|t| {
            t.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
                .to_lowercase()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Best-effort pairs from adjacent adjective-noun tokens.
///
/// An adjective directly preceded by a negation yields a negated pair.
pub fn naive_extract_pairs(text: &str, config: &ExtractorConfig) -> Vec<TargetOpinionPair> {
    let raw = tokenize(text);
    let collocations: Vec<Vec<&str>> = config
        .collocations
        .iter()
        .map(|c| c.split_whitespace().collect())
        .collect();
    // (token, is_collocation)
    let mut tokens: Vec<(String, bool)> = Vec::with_capacity(raw.len());
    let mut i = 0;
    while i < raw.len() {
        let best = collocations
            .iter()
            .filter(|c| !c.is_empty() && i + c.len() <= raw.len() && raw[i..i + c.len()].iter().zip(c.iter()).all(|(a, b)| a == b))
            .max_by_key(|c| c.len());
        match best {
            Some(c) if c.len() > 1 => {
                tokens.push((c.join(" "), true));
                i += c.len();
            }
            _ => {
                tokens.push((raw[i].clone(), false));
                i += 1;
            }
        }
    }

    let mut pairs = Vec::new();
    for w in 0..tokens.len().saturating_sub(1) {
        let (adj, adj_colloc) = &tokens[w];
        let (noun, noun_colloc) = &tokens[w + 1];
        if *adj_colloc || !config.is_adjective(adj) {
            continue;
        }
        if !(*noun_colloc || config.is_noun(noun)) {
            continue;
        }
        let negated = w > 0 && config.negations.contains(&tokens[w - 1].0);
        pairs.push(TargetOpinionPair {
            target: noun.clone(),
            opinion: adj.clone(),
            negated,
        });
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjective_noun() {
        let cfg = ExtractorConfig::default();
        assert_eq!(naive_extract_pairs("great camera", &cfg), vec![TargetOpinionPair::new("camera", "great")]);
        assert!(naive_extract_pairs("camera", &cfg).is_empty());
        assert!(naive_extract_pairs("", &cfg).is_empty());
    }

    #[test]
    fn collocation_is_one_target() {
        let cfg = ExtractorConfig::default();
        assert_eq!(
            naive_extract_pairs("the perfect picture quality", &cfg),
            vec![TargetOpinionPair::new("picture quality", "perfect")]
        );
    }

    #[test]
    fn negation_and_suffix() {
        let cfg = ExtractorConfig::default();
        let pairs = naive_extract_pairs("Not reliable service, wonderful screen!", &cfg);
        assert_eq!(pairs.len(), 2);
        assert!(pairs[0].negated && pairs[0].opinion == "reliable" && pairs[0].target == "service");
        assert!(!pairs[1].negated && pairs[1].opinion == "wonderful");
    }

    #[test]
    fn never_empty_strings() {
        let cfg = ExtractorConfig::default();
        for text in ["great !!! camera", "great #camera", "... great", "good good good"] {
            for p in naive_extract_pairs(text, &cfg) {
                assert!(!p.target.is_empty() && !p.opinion.is_empty());
            }
        }
    }
}
