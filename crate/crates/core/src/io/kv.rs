//! Flat `key = value` text with `#` comments.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Parsed key-value file. Keys may repeat; order is kept.
#[derive(Debug, Clone)]
pub struct KvFile {
    path: PathBuf,
    entries: Vec<Entry>,
}

impl KvFile {
    pub fn parse(text: &str, path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.clone(),
                line: i + 1,
                msg: format!("expected 'key = value', got '{line}'"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    path: path.clone(),
                    line: i + 1,
                    msg: "empty key".into(),
                });
            }
            entries.push(Entry {
                line: i + 1,
                key: key.to_string(),
                value: value.trim().to_string(),
            });
        }
        Ok(KvFile { path, entries })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn error(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            msg: msg.into(),
        }
    }

    /// Rejects keys outside `allowed` and repeats of single-valued keys.
    pub fn check_keys(&self, allowed: &[&str], repeatable: &[&str]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !allowed.contains(&e.key.as_str()) {
                return Err(self.error(e.line, format!("unknown key '{}'", e.key)));
            }
            if !repeatable.contains(&e.key.as_str()) && !seen.insert(e.key.as_str()) {
                return Err(self.error(e.line, format!("duplicate key '{}'", e.key)));
            }
        }
        Ok(())
    }

    fn find(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().rev().find(|e| e.key == key)
    }

    pub fn has(&self, key: &str) -> bool {
        self.find(key).is_some()
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.find(key)
            .map(|e| {
                e.value
                    .parse::<T>()
                    .map_err(|err| self.error(e.line, format!("bad value for '{key}': {err}")))
            })
            .transpose()
    }

    pub fn get_or<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(key)?.ok_or_else(|| self.error(0, format!("missing required key '{key}'")))
    }

    /// Every value of a repeatable key, with its line number.
    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key == key)
    }

    /// Splits a comma-separated value into exactly `n` trimmed fields.
    pub fn fields<'a>(&self, entry: &'a Entry, n: usize) -> Result<Vec<&'a str>> {
        let parts: Vec<&str> = entry.value.split(',').map(str::trim).collect();
        if parts.len() != n {
            return Err(self.error(
                entry.line,
                format!("'{}' needs {n} comma-separated fields, got {}", entry.key, parts.len()),
            ));
        }
        Ok(parts)
    }

    pub fn parse_field<T>(&self, entry: &Entry, what: &str, s: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        s.parse::<T>()
            .map_err(|err| self.error(entry.line, format!("bad {what} '{s}': {err}")))
    }

    /// Runs a fallible constructor and pins any error to `line`. Line 0
    /// stands for the file as a whole: the error keeps its kind and gains
    /// the file name.
    pub fn at_line<T>(&self, line: usize, r: Result<T>) -> Result<T> {
        let path = self.path.display();
        r.map_err(|e| match e {
            Error::Parse { .. } | Error::Io { .. } | Error::Format { .. } => e,
            other if line > 0 => self.error(line, other.to_string()),
            Error::InvalidLayout(m) => Error::InvalidLayout(format!("{path}: {m}")),
            Error::InvalidInput(m) => Error::InvalidInput(format!("{path}: {m}")),
            Error::Missing(m) => Error::Missing(format!("{path}: {m}")),
            other => other,
        })
    }
}

/// Accumulates `key = value` lines.
#[derive(Debug, Default)]
pub struct KvWriter {
    out: String,
}

impl KvWriter {
    pub fn new() -> Self {
        KvWriter::default()
    }

    pub fn comment(&mut self, text: &str) -> &mut Self {
        self.out.push_str("# ");
        self.out.push_str(text);
        self.out.push('\n');
        self
    }

    pub fn put(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.out.push_str(&format!("{key} = {value}\n"));
        self
    }

    pub fn blank(&mut self) -> &mut Self {
        self.out.push('\n');
        self
    }

    pub fn finish(self) -> String {
        self.out
    }
}
