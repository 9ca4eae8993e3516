use serde::{Deserialize, Serialize};

use super::TweetRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Country {
    India,
    Pakistan,
    Other,
    Unknown,
}

impl Country {
    pub fn from_code(code: &str) -> Self {
        match code.trim().to_ascii_uppercase().as_str() {
            "IN" => Country::India,
            "PK" => Country::Pakistan,
            "" => Country::Unknown,
            _ => Country::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Country::India => "india",
            Country::Pakistan => "pakistan",
            Country::Other => "other",
            Country::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "india" => Country::India,
            "pakistan" => Country::Pakistan,
            "other" => Country::Other,
            "unknown" => Country::Unknown,
            _ => return None,
        })
    }
}

/// Which evidence produced a country label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvidenceSource {
    Geo,
    Emoji,
    Both,
    None,
}

impl EvidenceSource {
    pub fn as_str(self) -> &'static str {
        match self {
            EvidenceSource::Geo => "geo",
            EvidenceSource::Emoji => "emoji",
            EvidenceSource::Both => "both",
            EvidenceSource::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountryLabel {
    pub value: Country,
    pub source: EvidenceSource,
    /// False only when geo and flag evidence are both present and disagree.
    pub consistent: bool,
}

/// Country codes of every flag emoji (regional-indicator pair) in `text`.
pub fn flags_in(text: &str) -> Vec<String> {
    const BASE: u32 = 0x1F1E6;
    let letter = |c: char| {
        let cp = c as u32;
        (BASE..BASE + 26)
            .contains(&cp)
            .then(|| char::from(b'A' + (cp - BASE) as u8))
    };
    let mut out = Vec::new();
    let mut pending: Option<char> = None;
    for c in text.chars() {
        match (letter(c), pending) {
            (Some(second), Some(first)) => {
                out.push([first, second].iter().collect());
                pending = None;
            }
            (Some(first), None) => pending = Some(first),
            (None, _) => pending = None,
        }
    }
    out
}

/// Flag evidence reduced to India, Pakistan or "both flags shown".
#[derive(Clone, Copy, PartialEq)]
enum FlagSignal {
    Absent,
    One(Country),
    Ambiguous,
}

fn flag_signal(flags: &[String]) -> FlagSignal {
    let india = flags.iter().any(|f| f.eq_ignore_ascii_case("IN"));
    let pakistan = flags.iter().any(|f| f.eq_ignore_ascii_case("PK"));
    match (india, pakistan) {
        (true, true) => FlagSignal::Ambiguous,
        (true, false) => FlagSignal::One(Country::India),
        (false, true) => FlagSignal::One(Country::Pakistan),
        (false, false) => FlagSignal::Absent,
    }
}

/// Geo location wins over profile flags; flags only speak for India and
/// Pakistan.
pub fn infer_country(record: &TweetRecord) -> CountryLabel {
    let geo = record.geo_country.as_deref().map(Country::from_code);
    let flags = flag_signal(&record.profile_flags);
    match (geo, flags) {
        (Some(g), FlagSignal::Absent) => CountryLabel {
            value: g,
            source: EvidenceSource::Geo,
            consistent: true,
        },
        (Some(g), FlagSignal::One(f)) => CountryLabel {
            value: g,
            source: EvidenceSource::Both,
            consistent: g == f,
        },
        (Some(g), FlagSignal::Ambiguous) => CountryLabel {
            value: g,
            source: EvidenceSource::Both,
            consistent: false,
        },
        (None, FlagSignal::One(f)) => CountryLabel {
            value: f,
            source: EvidenceSource::Emoji,
            consistent: true,
        },
        (None, FlagSignal::Ambiguous) => CountryLabel {
            value: Country::Unknown,
            source: EvidenceSource::Emoji,
            consistent: true,
        },
        (None, FlagSignal::Absent) => CountryLabel {
            value: Country::Unknown,
            source: EvidenceSource::None,
            consistent: true,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn record(geo: Option<&str>, flags: &[&str]) -> TweetRecord {
        TweetRecord {
            id: "1".into(),
            raw_text: String::new(),
            hashtags: vec![],
            mentions: vec![],
            urls: vec![],
            like_count: 0,
            retweet_count: 0,
            geo_country: geo.map(String::from),
            profile_flags: flags.iter().map(|s| s.to_string()).collect(),
            timestamp: chrono::Utc.with_ymd_and_hms(2021, 4, 22, 0, 0, 0).unwrap(),
        }
    }

    #[test]
    fn geo_only() {
        let l = infer_country(&record(Some("IN"), &[]));
        assert_eq!(l.value, Country::India);
        assert_eq!(l.source, EvidenceSource::Geo);
        assert!(l.consistent);
    }

    #[test]
    fn emoji_only() {
        let l = infer_country(&record(None, &["PK"]));
        assert_eq!(l.value, Country::Pakistan);
        assert_eq!(l.source, EvidenceSource::Emoji);
    }

    #[test]
    fn disagreement_keeps_geo() {
        let l = infer_country(&record(Some("IN"), &["PK"]));
        assert_eq!(l.value, Country::India);
        assert_eq!(l.source, EvidenceSource::Both);
        assert!(!l.consistent);
    }

    #[test]
    fn both_flags_without_geo_is_unknown() {
        let l = infer_country(&record(None, &["IN", "PK"]));
        assert_eq!(l.value, Country::Unknown);
        assert!(l.consistent);
    }

    #[test]
    fn other_geo_and_foreign_flags() {
        assert_eq!(
            infer_country(&record(Some("US"), &[])).value,
            Country::Other
        );
        let l = infer_country(&record(None, &["US"]));
        assert_eq!(
            (l.value, l.source),
            (Country::Unknown, EvidenceSource::None)
        );
    }

    #[test]
    fn flag_decoding() {
        assert_eq!(flags_in("Ali 🇵🇰 | 🇮🇳"), vec!["PK", "IN"]);
        assert!(flags_in("no flags").is_empty());
        // an unpaired indicator is ignored
        assert_eq!(flags_in("🇵 x 🇺🇸"), vec!["US"]);
    }

    proptest! {
        #[test]
        fn agreeing_evidence_is_consistent(pk in any::<bool>()) {
            let code = if pk { "PK" } else { "IN" };
            let l = infer_country(&record(Some(code), &[code]));
            prop_assert_eq!(l.source, EvidenceSource::Both);
            prop_assert!(l.consistent);
        }

        #[test]
        fn inconsistency_requires_both_sources(
            geo in proptest::option::of("(IN|PK|US)"),
            flags in proptest::collection::vec("(IN|PK|US)", 0..3),
        ) {
            let flags: Vec<&str> = flags.iter().map(String::as_str).collect();
            let l = infer_country(&record(geo.as_deref(), &flags));
            if !l.consistent {
                prop_assert_eq!(l.source, EvidenceSource::Both);
            }
        }
    }
}
