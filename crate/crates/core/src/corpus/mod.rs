//! Streaming JSONL corpus operations: host matching against a domain set,
//! filtering, exact deduplication, and corpus statistics.

mod dedup;
mod filter;

use std::borrow::Cow;
use std::collections::HashSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{normalize_host, DomainSet};

pub use dedup::{dedup_file, dedup_stream, DedupStats};
pub use filter::{filter_file, filter_stream, CheckpointSpec, FilterStats};

/// Extracts and normalizes the host of a URL.
pub fn host_of(url: &str) -> Result<String> {
    let trimmed = url.trim();
    // Require something scheme-like or at least a plausible bare host; plain
    // prose ("not a url") must fail rather than normalize into nonsense.
    if trimmed.contains(char::is_whitespace) {
        return Err(Error::Normalize {
            input: url.to_string(),
            msg: "whitespace in URL".to_string(),
        });
    }
    normalize_host(trimmed)
}

/// How hosts are compared against the domain set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    Exact,
    /// Member domains also match their subdomains ("a.b.com" matches member
    /// "b.com" but "xb.com" does not).
    #[default]
    Suffix,
}

impl MatchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchMode::Exact => "exact",
            MatchMode::Suffix => "suffix",
        }
    }
}

impl std::str::FromStr for MatchMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(MatchMode::Exact),
            "suffix" => Ok(MatchMode::Suffix),
            other => Err(Error::Contract(format!(
                "unknown match mode {other:?} (expected \"exact\" or \"suffix\")"
            ))),
        }
    }
}

/// Returns the set member a normalized host matches, if any.
///
/// In suffix mode the host itself is tried first, then each parent domain at
/// a label boundary, so the most specific member wins.
pub fn matching_member<'s>(host: &str, set: &'s DomainSet, mode: MatchMode) -> Option<&'s str> {
    let lookup = |h: &str| -> Option<&'s str> {
        set.members()
            .binary_search_by(|m| m.as_str().cmp(h))
            .ok()
            .map(|i| set.members()[i].as_str())
    };
    match mode {
        MatchMode::Exact => lookup(host),
        MatchMode::Suffix => {
            if let Some(m) = lookup(host) {
                return Some(m);
            }
            let mut rest = host;
            while let Some(dot) = rest.find('.') {
                rest = &rest[dot + 1..];
                if let Some(m) = lookup(rest) {
                    return Some(m);
                }
            }
            None
        }
    }
}

/// Whether a normalized host belongs to the set under the given mode.
pub fn matches(host: &str, set: &DomainSet, mode: MatchMode) -> bool {
    matching_member(host, set, mode).is_some()
}

/// Pluggable token counting; the active counter's name is stamped into all
/// stats outputs so numbers are never compared across counters by accident.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TokenCounter {
    /// Maximal runs of non-whitespace characters.
    #[default]
    Whitespace,
    /// UTF-8 byte length.
    Bytes,
}

impl TokenCounter {
    pub fn name(self) -> &'static str {
        match self {
            TokenCounter::Whitespace => "whitespace",
            TokenCounter::Bytes => "bytes",
        }
    }

    pub fn count(self, text: &str) -> u64 {
        match self {
            TokenCounter::Whitespace => {
                let mut tokens = 0u64;
                let mut in_token = false;
                for c in text.chars() {
                    if c.is_whitespace() {
                        in_token = false;
                    } else if !in_token {
                        in_token = true;
                        tokens += 1;
                    }
                }
                tokens
            }
            TokenCounter::Bytes => text.len() as u64,
        }
    }
}

impl std::str::FromStr for TokenCounter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "whitespace" => Ok(TokenCounter::Whitespace),
            "bytes" => Ok(TokenCounter::Bytes),
            other => Err(Error::Contract(format!(
                "unknown token counter {other:?} (expected \"whitespace\" or \"bytes\")"
            ))),
        }
    }
}

/// The two fields every corpus record must carry; all other fields ride
/// along untouched because emission reuses the raw input line.
#[derive(Deserialize)]
struct RecordView<'a> {
    #[serde(borrow)]
    url: Cow<'a, str>,
    #[serde(borrow)]
    text: Cow<'a, str>,
}

fn parse_record(line: &[u8]) -> Option<RecordView<'_>> {
    serde_json::from_slice::<RecordView>(line).ok()
}

/// Per-corpus row of a stats report (dataset-comparison table shape).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub name: String,
    /// JSON-valid records.
    pub examples: u64,
    /// Token total over all valid records.
    pub tokens: u64,
    /// Distinct normalized URL hosts over records with a parseable URL.
    pub unique_hosts: u64,
    /// Lines that failed JSON parsing or lacked url/text.
    pub records_rejected_unparseable: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub token_counter: String,
    pub corpora: Vec<CorpusRow>,
}

/// Single streaming pass over one corpus.
pub fn corpus_stats(
    mut reader: impl BufRead,
    name: &str,
    counter: TokenCounter,
) -> Result<CorpusRow> {
    let mut row = CorpusRow {
        name: name.to_string(),
        examples: 0,
        tokens: 0,
        unique_hosts: 0,
        records_rejected_unparseable: 0,
    };
    let mut hosts: HashSet<String> = HashSet::new();
    let mut line = Vec::new();
    loop {
        line.clear();
        if crate::ioutil::next_line(&mut reader, &mut line)
            .map_err(Error::from)?
            .is_none()
        {
            break;
        }
        let content = crate::ioutil::trim_line_end(&line);
        if content.is_empty() {
            continue;
        }
        match parse_record(content) {
            Some(record) => {
                row.examples += 1;
                row.tokens += counter.count(&record.text);
                if let Ok(host) = host_of(&record.url) {
                    hosts.insert(host);
                }
            }
            None => row.records_rejected_unparseable += 1,
        }
    }
    row.unique_hosts = hosts.len() as u64;
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn host_of_examples() {
        assert_eq!(
            host_of("https://blog.krebs.example/post?1").unwrap(),
            "blog.krebs.example"
        );
        assert!(host_of("not a url").is_err());
        assert!(host_of("").is_err());
    }

    #[test]
    fn host_of_fuzz_never_panics_and_matches_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(31337);
        let schemes = ["http", "https", "ftp"];
        let tlds = ["com", "org", "net", "io"];
        for _ in 0..10_000 {
            // Well-formed URL with a known host.
            let label_count = rng.gen_range(1..=3);
            let host = (0..label_count)
                .map(|_| {
                    let len = rng.gen_range(1..=10);
                    (0..len)
                        .map(|_| char::from(b'a' + rng.gen_range(0..26)))
                        .collect::<String>()
                })
                .collect::<Vec<_>>()
                .join(".")
                + "."
                + tlds[rng.gen_range(0..tlds.len())];
            let scheme = schemes[rng.gen_range(0..schemes.len())];
            let port = if rng.gen_bool(0.3) {
                format!(":{}", rng.gen_range(1..65535))
            } else {
                String::new()
            };
            let path = if rng.gen_bool(0.7) {
                format!("/p{}?q={}", rng.gen_range(0..100), rng.gen_range(0..100))
            } else {
                String::new()
            };
            let url = format!("{scheme}://{host}{port}{path}");
            assert_eq!(host_of(&url).unwrap(), host);

            // Garbage must not panic.
            let len = rng.gen_range(0..40);
            let junk: String = (0..len)
                .map(|_| char::from(rng.gen_range(0x20u8..0x7f)))
                .collect();
            let _ = host_of(&junk);
        }
    }

    #[test]
    fn match_modes() {
        let set = DomainSet::from_hosts(["b.com"]).unwrap();
        assert!(matches("a.b.com", &set, MatchMode::Suffix));
        assert!(!matches("a.b.com", &set, MatchMode::Exact));
        assert!(!matches("xb.com", &set, MatchMode::Suffix));
        assert!(matches("b.com", &set, MatchMode::Exact));
        // exact implies suffix
        let hosts = ["b.com", "a.b.com", "xb.com", "c.org", "deep.a.b.com"];
        for h in hosts {
            if matches(h, &set, MatchMode::Exact) {
                assert!(matches(h, &set, MatchMode::Suffix));
            }
        }
    }

    #[test]
    fn most_specific_member_wins() {
        let set = DomainSet::from_hosts(["c.com", "b.c.com"]).unwrap();
        assert_eq!(
            matching_member("a.b.c.com", &set, MatchMode::Suffix),
            Some("b.c.com")
        );
        assert_eq!(
            matching_member("x.c.com", &set, MatchMode::Suffix),
            Some("c.com")
        );
    }

    #[test]
    fn token_counter_examples() {
        let c = TokenCounter::Whitespace;
        assert_eq!(c.count(""), 0);
        assert_eq!(c.count("a  b\tc\n"), 3);
        assert_eq!(c.count("   "), 0);
        assert_eq!(c.count("one"), 1);
        assert_eq!(TokenCounter::Bytes.count("héllo"), 6);
    }

    #[test]
    fn token_counter_matches_reference_on_random_strings() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        let alphabet: Vec<char> = "ab cd\te\nf  ghé\u{00a0}x".chars().collect();
        for _ in 0..1000 {
            let len = rng.gen_range(0..200);
            let s: String = (0..len)
                .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
                .collect();
            // Independent reference: the standard library's splitter.
            let reference = s.split_whitespace().count() as u64;
            assert_eq!(TokenCounter::Whitespace.count(&s), reference, "on {s:?}");
        }
    }

    #[test]
    fn corpus_stats_counts_and_additivity() {
        let a = "{\"url\":\"http://a.com/x\",\"text\":\"one two\"}\n\
                 {\"url\":\"http://b.com/\",\"text\":\"three\"}\n";
        let b = "{\"url\":\"http://a.com/y\",\"text\":\"four five six\"}\n\
                 garbage line\n";
        let counter = TokenCounter::Whitespace;
        let row_a = corpus_stats(a.as_bytes(), "a", counter).unwrap();
        let row_b = corpus_stats(b.as_bytes(), "b", counter).unwrap();
        let concat = format!("{a}{b}");
        let row_ab = corpus_stats(concat.as_bytes(), "ab", counter).unwrap();
        assert_eq!(row_a.examples, 2);
        assert_eq!(row_a.tokens, 3);
        assert_eq!(row_a.unique_hosts, 2);
        assert_eq!(row_b.examples, 1);
        assert_eq!(row_b.records_rejected_unparseable, 1);
        assert_eq!(row_ab.examples, row_a.examples + row_b.examples);
        assert_eq!(row_ab.tokens, row_a.tokens + row_b.tokens);
        assert_eq!(
            row_ab.records_rejected_unparseable,
            row_a.records_rejected_unparseable + row_b.records_rejected_unparseable
        );
        // unique hosts deduplicate across the concatenation
        assert_eq!(row_ab.unique_hosts, 2);
    }

    #[test]
    fn corpus_stats_empty_is_zero() {
        let row = corpus_stats(&b""[..], "empty", TokenCounter::Whitespace).unwrap();
        assert_eq!(row.examples, 0);
        assert_eq!(row.tokens, 0);
        assert_eq!(row.unique_hosts, 0);
        assert_eq!(row.records_rejected_unparseable, 0);
    }

    #[test]
    fn corpus_stats_report_shape_at_reduced_scale() {
        // Dataset-comparison shape: a corpus of 2,866 records (1/1000 of the
        // published row) must produce a row with every column present.
        let mut text = String::new();
        for i in 0..2866 {
            text.push_str(&format!(
                "{{\"url\":\"http://site{}.example/p{i}\",\"text\":\"tok tok tok\"}}\n",
                i % 100
            ));
        }
        let row = corpus_stats(text.as_bytes(), "sample", TokenCounter::Whitespace).unwrap();
        let report = CorpusReport {
            token_counter: TokenCounter::Whitespace.name().to_string(),
            corpora: vec![row],
        };
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["corpora"][0]["examples"], 2866);
        assert_eq!(json["corpora"][0]["tokens"], 3 * 2866);
        assert_eq!(json["corpora"][0]["unique_hosts"], 100);
        assert!(json["token_counter"].is_string());
    }

    #[test]
    fn record_parse_requires_url_and_text() {
        assert!(parse_record(br#"{"url":"http://a.com","text":"x"}"#).is_some());
        assert!(parse_record(br#"{"url":"http://a.com"}"#).is_none());
        assert!(parse_record(br#"{"text":"x"}"#).is_none());
        assert!(parse_record(b"not json").is_none());
        // Extra fields ride along.
        assert!(parse_record(br#"{"url":"u","text":"t","id":7,"meta":{"a":1}}"#).is_some());
    }
}
