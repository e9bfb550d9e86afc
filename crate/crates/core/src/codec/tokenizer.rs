//! Word-level tokenizer over the templater's closed vocabulary.

use std::collections::HashMap;

use crate::world::{AttributeSchema, Catalog};

use super::templater::Lexicon;

pub const PAD: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
pub const UNK: u32 = 3;

/// Lowercases and splits into words; sentence punctuation becomes its own
/// token, apostrophes stay inside words (`robot's`).
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.to_lowercase().chars() {
        if c.is_alphanumeric() || c == '\'' {
            word.push(c);
        } else {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            if matches!(c, '.' | ',' | '!' | '?') {
                out.push(c.to_string());
            }
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

/// Closed word vocabulary: every word producible by the templater, every
/// object type name, every attribute value token, plus specials.
#[derive(Debug, Clone)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    pub fn build(schema: &AttributeSchema, catalog: &Catalog, lexicon: &Lexicon) -> Self {
        let mut words = std::collections::BTreeSet::new();
        for template in lexicon.all_templates() {
            let cleaned = template
                .replace("{a}", " ")
                .replace("{b}", " ")
                .replace("{v}", " ")
                .replace("{adv}", " ");
            words.extend(tokenize(&cleaned));
        }
        for t in catalog.iter() {
            words.insert(t.name.to_lowercase());
        }
        for spec in schema.iter() {
            for tok in &spec.vocab {
                words.extend(tokenize(&tok.to_lowercase()));
            }
        }
        let mut tokens: Vec<String> = vec![
            "[pad]".to_string(),
            "[bos]".to_string(),
            "[eos]".to_string(),
            "[unk]".to_string(),
        ];
        tokens.extend(words);
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: u32) -> &str {
        self.tokens
            .get(id as usize)
            .map(String::as_str)
            .unwrap_or("[unk]")
    }

    pub fn encode(&self, text: &str) -> Vec<u32> {
        tokenize(text).iter().map(|t| self.id(t)).collect()
    }

    pub fn decode(&self, ids: &[u32]) -> String {
        let mut out = String::new();
        for &id in ids {
            if id == PAD || id == BOS || id == EOS {
                continue;
            }
            let tok = self.token(id);
            if matches!(tok, "." | "," | "!" | "?") {
                out.push_str(tok);
            } else {
                if !out.is_empty() {
                    out.push(' ');
                }
                out.push_str(tok);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::builtin_lexicon;
    use crate::world::{builtin_catalog, builtin_schema};

    #[test]
    fn tokenize_keeps_apostrophes_and_splits_punctuation() {
        assert_eq!(
            tokenize("The vase is now in the robot's hand."),
            vec!["the", "vase", "is", "now", "in", "the", "robot's", "hand", "."]
        );
        assert_eq!(tokenize("6 to 8 ft away"), vec!["6", "to", "8", "ft", "away"]);
    }

    #[test]
    fn vocabulary_is_closed_over_templater_output() {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let lex = builtin_lexicon();
        let vocab = Vocab::build(schema, catalog, lex);
        assert!(vocab.len() > 200 && vocab.len() < 2000, "{}", vocab.len());
        // every object name is a single known token
        for t in catalog.iter() {
            assert_ne!(vocab.id(&t.name.to_lowercase()), UNK, "{}", t.name);
        }
        for word in ["throws", "hard", "shattered", "roomtemp", "nothing"] {
            assert_ne!(vocab.id(word), UNK, "{word}");
        }
        assert_eq!(vocab.id("zygomorphic"), UNK);
        // ids round-trip
        let ids = vocab.encode("the robot throws the vase hard.");
        let text = vocab.decode(&ids);
        assert_eq!(text, "the robot throws the vase hard.");
    }

    #[test]
    fn vocabulary_is_deterministic() {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let lex = builtin_lexicon();
        let a = Vocab::build(schema, catalog, lex);
        let b = Vocab::build(schema, catalog, lex);
        assert_eq!(a.tokens, b.tokens);
    }
}
