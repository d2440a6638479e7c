//! Host name normalization and the reversed-label convention used by
//! hyperlink-graph vertex files ("www.example.org" is stored as
//! "org.example.www").

use crate::error::{Error, Result};

fn normalize_error(input: &str, msg: &str) -> Error {
    Error::Normalize {
        input: input.to_string(),
        msg: msg.to_string(),
    }
}

/// Normalizes a raw host or URL down to a bare lowercase host name:
/// scheme, userinfo, port, path/query/fragment, and a trailing dot are
/// stripped. Errors when no plausible host remains.
pub fn normalize_host(raw: &str) -> Result<String> {
    let s = raw.trim();
    if s.is_empty() {
        return Err(normalize_error(raw, "empty input"));
    }
    let s = match s.find("://") {
        Some(i) => &s[i + 3..],
        None => s,
    };
    let authority_end = s.find(['/', '?', '#']).unwrap_or(s.len());
    let authority = &s[..authority_end];
    let host_port = match authority.rfind('@') {
        Some(i) => &authority[i + 1..],
        None => authority,
    };
    let host = match host_port.rfind(':') {
        Some(i) if host_port[i + 1..].chars().all(|c| c.is_ascii_digit()) => &host_port[..i],
        Some(_) => return Err(normalize_error(raw, "unexpected ':' in host")),
        None => host_port,
    };
    let host = host.strip_suffix('.').unwrap_or(host);
    if host.is_empty() {
        return Err(normalize_error(raw, "no host remains after stripping"));
    }
    for c in host.chars() {
        if c.is_whitespace() || matches!(c, '/' | ':' | '@' | '?' | '#' | '[' | ']' | '\\') {
            return Err(normalize_error(raw, &format!("invalid character {c:?}")));
        }
    }
    for label in host.split('.') {
        if label.is_empty() {
            return Err(normalize_error(raw, "empty label"));
        }
    }
    Ok(host.to_lowercase())
}

/// Reverses the dot-separated labels of a host:
/// "www.example.org" ⟷ "org.example.www". Involutive.
pub fn reverse_host(host: &str) -> String {
    let mut labels: Vec<&str> = host.split('.').collect();
    labels.reverse();
    labels.join(".")
}
