//! Shared reader for the `key = value` artifact format with `[section]` blocks.

use std::str::FromStr;

#[derive(Debug, Default)]
pub(crate) struct Section {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl Section {
    pub fn get(&self, key: &str) -> Result<&str, String> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| format!("missing {key} in [{}]", self.name))
    }
}

/// The header line, then a nameless head section and the bracketed ones.
pub(crate) fn parse_sections(text: &str, header: &str) -> Result<(Section, Vec<Section>), String> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some(header) {
        return Err(format!("expected header {header:?}"));
    }
    let mut head = Section::default();
    let mut sections: Vec<Section> = Vec::new();
    for line in lines {
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            sections.push(Section { name: name.to_string(), entries: Vec::new() });
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("bad line {line:?}"))?;
        let kv = (k.trim().to_string(), v.trim().to_string());
        sections.last_mut().unwrap_or(&mut head).entries.push(kv);
    }
    Ok((head, sections))
}

pub(crate) fn num<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("bad value {s:?}"))
}

/// `-` stands for an absent value.
pub(crate) fn maybe<T: FromStr>(s: &str) -> Result<Option<T>, String> {
    if s == "-" {
        Ok(None)
    } else {
        num(s).map(Some)
    }
}

pub(crate) fn list<T: FromStr>(s: &str) -> Result<Vec<T>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|t| num(t.trim())).collect()
}

pub(crate) fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

pub(crate) fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}
