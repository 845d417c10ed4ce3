//! Strict, line-aware reader over TOML documents.
//!
//! Every lookup is recorded so that leftover keys can be reported as unknown
//! (or as unit mismatches when only the unit suffix is wrong or missing).

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;

use toml::de::{DeTable, DeValue};
use toml::Spanned;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    Syntax,
    UnknownKey,
    UnitMismatch,
    MissingRequired,
    OutOfRange,
    WrongType,
    Io,
}

/// A single configuration problem located by key path and line.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub path: String,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: `{}`: {} ({:?})", self.line, self.path, self.message, self.kind)
    }
}

pub(crate) struct Source<'s> {
    line_starts: Vec<usize>,
    _text: &'s str,
}

impl<'s> Source<'s> {
    pub fn new(text: &'s str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        Self { line_starts, _text: text }
    }

    pub fn line(&self, offset: usize) -> usize {
        match self.line_starts.binary_search(&offset) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
    }
}

/// Parses `text`, returning the root table or a syntax diagnostic.
pub(crate) fn parse_document(text: &str) -> Result<Spanned<DeTable<'_>>, Diagnostic> {
    DeTable::parse(text).map_err(|e| {
        let src = Source::new(text);
        let line = e.span().map(|s| src.line(s.start)).unwrap_or(0);
        Diagnostic {
            kind: DiagnosticKind::Syntax,
            path: String::new(),
            line,
            message: e.message().trim().to_string(),
        }
    })
}

pub(crate) struct TableReader<'a, 'i> {
    src: &'a Source<'a>,
    path: String,
    line: usize,
    table: &'a DeTable<'i>,
    used: RefCell<BTreeSet<String>>,
    /// Suffixed keys that were asked for, used to diagnose unit mistakes.
    suffixed: RefCell<Vec<(String, String)>>,
    diags: &'a RefCell<Vec<Diagnostic>>,
}

const UNIT_SUFFIXES: [&str; 12] = [
    "_Hz", "_m", "_W", "_dB", "_dBm", "_K", "_a0", "_ea0", "_s", "_mps", "_per_s", "_GHz",
];

impl<'a, 'i> TableReader<'a, 'i> {
    pub fn new(
        src: &'a Source<'a>,
        path: impl Into<String>,
        table: &'a Spanned<DeTable<'i>>,
        diags: &'a RefCell<Vec<Diagnostic>>,
    ) -> Self {
        Self {
            src,
            path: path.into(),
            line: src.line(table.span().start),
            table: table.get_ref(),
            used: RefCell::default(),
            suffixed: RefCell::default(),
            diags,
        }
    }

    fn full(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{}", self.path, key)
        }
    }

    pub fn line(&self) -> usize {
        self.line
    }

    pub fn push(&self, kind: DiagnosticKind, key: &str, line: usize, message: impl Into<String>) {
        self.diags.borrow_mut().push(Diagnostic {
            kind,
            path: self.full(key),
            line,
            message: message.into(),
        });
    }

    fn lookup(&self, key: &str) -> Option<&'a Spanned<DeValue<'i>>> {
        self.used.borrow_mut().insert(key.to_string());
        if let Some(suffix) = UNIT_SUFFIXES.iter().find(|s| key.ends_with(*s)) {
            let base = key.trim_end_matches(suffix).to_string();
            self.suffixed.borrow_mut().push((base, key.to_string()));
        }
        self.table.iter().find(|(k, _)| k.get_ref().as_ref() == key).map(|(_, v)| v)
    }

    pub fn has(&self, key: &str) -> bool {
        self.table.iter().any(|(k, _)| k.get_ref().as_ref() == key)
    }

    pub fn value_line(&self, key: &str) -> usize {
        self.table
            .iter()
            .find(|(k, _)| k.get_ref().as_ref() == key)
            .map(|(k, _)| self.src.line(k.span().start))
            .unwrap_or(self.line)
    }

    fn as_f64(&self, key: &str, v: &Spanned<DeValue<'i>>) -> Option<f64> {
        let parsed = match v.get_ref() {
            DeValue::Float(f) => f.as_str().replace('_', "").parse::<f64>().ok(),
            DeValue::Integer(i) => {
                i64::from_str_radix(&i.as_str().replace('_', ""), i.radix()).ok().map(|x| x as f64)
            }
            _ => None,
        };
        if parsed.is_none() {
            self.push(
                DiagnosticKind::WrongType,
                key,
                self.src.line(v.span().start),
                format!("expected a number, found {}", v.get_ref().type_str()),
            );
        }
        parsed
    }

    pub fn f64(&self, key: &str) -> Option<f64> {
        let v = self.lookup(key)?;
        self.as_f64(key, v)
    }

    pub fn req_f64(&self, key: &str) -> Option<f64> {
        if !self.has(key) {
            self.lookup(key);
            self.missing(key);
            return None;
        }
        self.f64(key)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> (f64, bool) {
        match self.f64(key) {
            Some(x) => (x, true),
            None => (default, false),
        }
    }

    pub fn f64_array(&self, key: &str) -> Option<Vec<f64>> {
        let v = self.lookup(key)?;
        match v.get_ref() {
            DeValue::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items.iter() {
                    out.push(self.as_f64(key, item)?);
                }
                Some(out)
            }
            other => {
                self.push(
                    DiagnosticKind::WrongType,
                    key,
                    self.src.line(v.span().start),
                    format!("expected an array of numbers, found {}", other.type_str()),
                );
                None
            }
        }
    }

    pub fn int(&self, key: &str) -> Option<i64> {
        let v = self.lookup(key)?;
        match v.get_ref() {
            DeValue::Integer(i) => i64::from_str_radix(&i.as_str().replace('_', ""), i.radix()).ok(),
            other => {
                self.push(
                    DiagnosticKind::WrongType,
                    key,
                    self.src.line(v.span().start),
                    format!("expected an integer, found {}", other.type_str()),
                );
                None
            }
        }
    }

    pub fn string(&self, key: &str) -> Option<String> {
        let v = self.lookup(key)?;
        match v.get_ref() {
            DeValue::String(s) => Some(s.to_string()),
            other => {
                self.push(
                    DiagnosticKind::WrongType,
                    key,
                    self.src.line(v.span().start),
                    format!("expected a string, found {}", other.type_str()),
                );
                None
            }
        }
    }

    pub fn boolean(&self, key: &str) -> Option<bool> {
        let v = self.lookup(key)?;
        match v.get_ref() {
            DeValue::Boolean(b) => Some(*b),
            other => {
                self.push(
                    DiagnosticKind::WrongType,
                    key,
                    self.src.line(v.span().start),
                    format!("expected a boolean, found {}", other.type_str()),
                );
                None
            }
        }
    }

    pub fn table(&self, key: &str) -> Option<TableReader<'a, 'i>> {
        let v = self.lookup(key)?;
        match v.get_ref() {
            DeValue::Table(_) => Some(self.child(key, v)),
            other => {
                self.push(
                    DiagnosticKind::WrongType,
                    key,
                    self.src.line(v.span().start),
                    format!("expected a table, found {}", other.type_str()),
                );
                None
            }
        }
    }

    fn child(&self, key: &str, v: &'a Spanned<DeValue<'i>>) -> TableReader<'a, 'i> {
        let DeValue::Table(t) = v.get_ref() else { unreachable!() };
        TableReader {
            src: self.src,
            path: self.full(key),
            line: self.src.line(v.span().start),
            table: t,
            used: RefCell::default(),
            suffixed: RefCell::default(),
            diags: self.diags,
        }
    }

    /// Array of tables (`[[key]]`).
    pub fn tables(&self, key: &str) -> Vec<TableReader<'a, 'i>> {
        let Some(v) = self.lookup(key) else { return Vec::new() };
        match v.get_ref() {
            DeValue::Array(items) => items
                .iter()
                .enumerate()
                .filter_map(|(i, item)| match item.get_ref() {
                    DeValue::Table(_) => Some(self.child(&format!("{key}[{i}]"), item)),
                    other => {
                        self.push(
                            DiagnosticKind::WrongType,
                            key,
                            self.src.line(item.span().start),
                            format!("expected a table, found {}", other.type_str()),
                        );
                        None
                    }
                })
                .collect(),
            other => {
                self.push(
                    DiagnosticKind::WrongType,
                    key,
                    self.src.line(v.span().start),
                    format!("expected an array of tables, found {}", other.type_str()),
                );
                Vec::new()
            }
        }
    }

    pub fn missing(&self, key: &str) {
        self.push(DiagnosticKind::MissingRequired, key, self.line, "required key is missing");
    }

    pub fn out_of_range(&self, key: &str, message: impl Into<String>) {
        self.push(DiagnosticKind::OutOfRange, key, self.value_line(key), message);
    }

    /// Reports every key that was never looked up.
    pub fn finish(self) {
        let used = self.used.borrow();
        let suffixed = self.suffixed.borrow();
        for (k, _) in self.table.iter() {
            let key = k.get_ref().as_ref();
            if used.contains(key) {
                continue;
            }
            let line = self.src.line(k.span().start);
            let stem = UNIT_SUFFIXES
                .iter()
                .find(|s| key.ends_with(*s))
                .map(|s| key.trim_end_matches(s))
                .unwrap_or(key);
            if let Some((_, expected)) = suffixed.iter().find(|(base, _)| base == key || base == stem) {
                self.push(
                    DiagnosticKind::UnitMismatch,
                    key,
                    line,
                    format!("missing or wrong unit suffix; expected `{expected}`"),
                );
            } else {
                self.push(DiagnosticKind::UnknownKey, key, line, "unknown key");
            }
        }
    }
}
