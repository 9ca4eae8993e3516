use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Minimum token count for a post to enter any classifier-driven sampling.
pub const DEFAULT_MIN_TOKENS: usize = 10;

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S+").unwrap());
static MENTION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[@＠][\p{L}\p{M}\p{N}_]+").unwrap());
static HASHTAG: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[#＃][\p{L}\p{M}\p{N}_]+").unwrap());
// Pictographs, skin-tone modifiers, regional indicators, ZWJ, variation
// selectors, the keycap mark and tag characters. Digits, `#` and `*` carry the
// Unicode Emoji property too but are text, so they are not listed.
static EMOJI: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"[\p{Extended_Pictographic}\p{Emoji_Modifier}\p{Regional_Indicator}\x{200D}\x{FE0E}\x{FE0F}\x{20E3}\x{E0020}-\x{E007F}]",
    )
    .unwrap()
});
static APOSTROPHE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"['’‘`]").unwrap());
static PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[\p{P}\p{S}\p{C}]+").unwrap());

/// Normalized post body: lowercase, no hashtags, mentions, urls, emoji or
/// punctuation, single spaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CleanText {
    pub text: String,
    pub tokens: Vec<String>,
    pub token_count: usize,
}

impl CleanText {
    /// Builds a value from text that is already normalized (e.g. read back
    /// from a dataset file).
    pub fn from_normalized(text: &str) -> Self {
        let tokens: Vec<String> = text.split_whitespace().map(String::from).collect();
        Self {
            text: tokens.join(" "),
            token_count: tokens.len(),
            tokens,
        }
    }
}

pub fn clean(raw_text: &str) -> CleanText {
    let s = URL.replace_all(raw_text, " ");
    let s = MENTION.replace_all(&s, " ");
    let s = HASHTAG.replace_all(&s, " ");
    let s = EMOJI.replace_all(&s, " ");
    let s = s.to_lowercase();
    let s = APOSTROPHE.replace_all(&s, "");
    let s = PUNCT.replace_all(&s, " ");
    CleanText::from_normalized(&s)
}

pub fn passes_length_filter(ct: &CleanText, min_tokens: usize) -> bool {
    ct.token_count >= min_tokens
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strips_entities() {
        let c = clean("Prayers for India #IndiaNeedsOxygen @user https://t.co/x");
        assert_eq!(c.text, "prayers for india");
        assert_eq!(c.token_count, 3);
        assert_eq!(c.tokens, vec!["prayers", "for", "india"]);
    }

    #[test]
    fn empty_input() {
        let c = clean("");
        assert_eq!(c.text, "");
        assert_eq!(c.token_count, 0);
        assert!(c.tokens.is_empty());
    }

    #[test]
    fn punctuation() {
        let c = clean("Get well soon, India!!!");
        assert_eq!(c.text, "get well soon india");
        assert_eq!(c.token_count, 4);
        assert_eq!(
            clean("we're rivals not enemies.").text,
            "were rivals not enemies"
        );
    }

    #[test]
    fn emoji_and_flags() {
        let c = clean("Stay strong 💪🏽 India 🇮🇳❤️ 👨‍👩‍👧");
        assert_eq!(c.text, "stay strong india");
        // digits are kept even though they carry the emoji property
        assert_eq!(clean("Covid 19 #1").text, "covid 19");
    }

    #[test]
    fn url_variants_and_fullwidth_sigils() {
        let c = clean("see WWW.example.com/a and HTTP://x.y ＃tag ＠who ok");
        assert_eq!(c.text, "see and ok");
    }

    #[test]
    fn length_filter_boundaries() {
        let ten = CleanText::from_normalized("a b c d e f g h i j");
        let nine = CleanText::from_normalized("a b c d e f g h i");
        assert!(passes_length_filter(&ten, DEFAULT_MIN_TOKENS));
        assert!(!passes_length_filter(&nine, DEFAULT_MIN_TOKENS));
        assert!(passes_length_filter(&clean(""), 0));
    }

    proptest! {
        #[test]
        fn clean_is_idempotent(s in "\\PC{0,80}") {
            let once = clean(&s);
            let twice = clean(&once.text);
            prop_assert_eq!(&once.text, &twice.text);
            prop_assert_eq!(once.token_count, once.tokens.len());
        }

        #[test]
        fn output_has_no_entity_markers(
            words in proptest::collection::vec("[A-Za-z]{1,8}", 0..6),
            tag in "[A-Za-z]{1,10}",
            user in "[a-z_]{1,10}",
        ) {
            let raw = format!("{} #{tag} @{user} https://t.co/{user} 😀", words.join(" "));
            let c = clean(&raw);
            prop_assert!(!c.text.contains('#'));
            prop_assert!(!c.text.contains('@'));
            prop_assert!(!c.text.contains('😀'));
            prop_assert_eq!(c.token_count, words.len());
        }
    }
}
