use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Label = u32;

pub const EPSILON: Label = 0;
pub const EPSILON_SYMBOL: &str = "<eps>";

/// Shared, immutable symbol table handle.
pub type Symbols = Arc<SymbolTable>;

/// Bijection between token strings and dense label ids. Id 0 is always `<eps>`.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    symbols: Vec<String>,
    index: HashMap<String, Label>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialEq for SymbolTable {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Eq for SymbolTable {}

impl SymbolTable {
    pub fn new() -> Self {
        let mut index = HashMap::new();
        index.insert(EPSILON_SYMBOL.to_string(), EPSILON);
        SymbolTable {
            symbols: vec![EPSILON_SYMBOL.to_string()],
            index,
        }
    }

    pub fn from_symbols<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut table = Self::new();
        for s in symbols {
            table.add(s.as_ref());
        }
        table
    }

    /// Adds `symbol` if absent and returns its id.
    pub fn add(&mut self, symbol: &str) -> Label {
        if let Some(&id) = self.index.get(symbol) {
            return id;
        }
        let id = self.symbols.len() as Label;
        self.symbols.push(symbol.to_string());
        self.index.insert(symbol.to_string(), id);
        id
    }

    pub fn get(&self, symbol: &str) -> Option<Label> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, label: Label) -> Option<&str> {
        self.symbols.get(label as usize).map(String::as_str)
    }

    /// Number of symbols including epsilon.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.len() <= 1
    }

    pub fn contains(&self, label: Label) -> bool {
        (label as usize) < self.symbols.len()
    }

    /// Non-epsilon `(label, symbol)` pairs in id order.
    pub fn iter(&self) -> impl Iterator<Item = (Label, &str)> {
        self.symbols
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, s)| (i as Label, s.as_str()))
    }

    pub fn labels_of(&self, tokens: &[&str]) -> Result<Vec<Label>> {
        tokens
            .iter()
            .map(|t| {
                self.get(t)
                    .ok_or_else(|| Error::SymbolMismatch(format!("unknown symbol {t:?}")))
            })
            .collect()
    }

    pub fn symbols_of(&self, labels: &[Label]) -> Vec<&str> {
        labels
            .iter()
            .map(|&l| self.symbol(l).unwrap_or("<?>"))
            .collect()
    }

    pub fn into_shared(self) -> Symbols {
        Arc::new(self)
    }

    /// `token<TAB>id` per line, in id order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.symbols.iter().enumerate() {
            let _ = writeln!(out, "{s}\t{i}");
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut symbols = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (Some(tok), Some(id), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(n + 1, "expected `token<TAB>id`"));
            };
            let id: usize = id
                .parse()
                .map_err(|_| Error::parse(n + 1, format!("bad id {id:?}")))?;
            if id != symbols.len() {
                return Err(Error::parse(n + 1, "symbol ids must be dense and ascending"));
            }
            symbols.push(tok.to_string());
        }
        if symbols.first().map(String::as_str) != Some(EPSILON_SYMBOL) {
            return Err(Error::parse(1, "id 0 must be <eps>"));
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i as Label).is_some() {
                return Err(Error::parse(i + 1, format!("duplicate symbol {s:?}")));
            }
        }
        Ok(SymbolTable { symbols, index })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_is_reserved() {
        let t = SymbolTable::from_symbols(["a", "b", "a"]);
        assert_eq!(t.get("<eps>"), Some(0));
        assert_eq!(t.get("a"), Some(1));
        assert_eq!(t.get("b"), Some(2));
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn text_round_trip() {
        let t = SymbolTable::from_symbols(["x", "<wb>", "y"]);
        let text = t.to_text();
        assert_eq!(text, "<eps>\t0\nx\t1\n<wb>\t2\ny\t3\n");
        assert_eq!(SymbolTable::parse_text(&text).unwrap(), t);
    }

    #[test]
    fn rejects_sparse_ids() {
        assert!(SymbolTable::parse_text("<eps>\t0\na\t2\n").is_err());
        assert!(SymbolTable::parse_text("a\t0\n").is_err());
    }
}
