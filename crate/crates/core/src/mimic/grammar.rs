//! Mimic grammar files: parsing and validation.
//!
//! ```text
//! # comment
//! start:
//! | Dear <name> ~;
//! | Hello <name> ~!
//! name:
//! | Friend
//! | Colleague
//! ```
//!
//! A block opens with `name:`; each following `| ` line is one alternative.
//! Tokens are whitespace-separated. `<x>` references production `x`; a token
//! starting with `~` is glued to the previous token without a space. The
//! first production is the start symbol.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::code::ChoiceCode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Terminal {
    pub text: String,
    pub glue: bool,
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.glue {
            write!(f, "~{}", self.text)
        } else {
            f.write_str(&self.text)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Symbol {
    Terminal(Terminal),
    NonTerminal(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    pub name: String,
    pub alternatives: Vec<Vec<Symbol>>,
    /// 1-based line of the `name:` header.
    pub line: usize,
}

/// One problem found by [`MimicGrammar::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub production: String,
    pub alternative: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.alternative {
            Some(a) => write!(f, "{} alternative {}: {}", self.production, a, self.message),
            None => write!(f, "{}: {}", self.production, self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MimicGrammar {
    productions: Vec<Production>,
    index: HashMap<String, usize>,
    codes: Vec<ChoiceCode>,
}

fn parse_token(tok: &str, line: usize) -> Result<Symbol> {
    let syntax = |msg: String| Error::Format(format!("grammar line {line}: {msg}"));
    if let Some(inner) = tok.strip_prefix('<') {
        let name = inner
            .strip_suffix('>')
            .ok_or_else(|| syntax(format!("unterminated reference {tok:?}")))?;
        if name.is_empty() {
            return Err(syntax("empty reference <>".into()));
        }
        return Ok(Symbol::NonTerminal(name.to_string()));
    }
    if let Some(text) = tok.strip_prefix('~') {
        if text.is_empty() {
            return Err(syntax("glue marker ~ without token".into()));
        }
        return Ok(Symbol::Terminal(Terminal { text: text.into(), glue: true }));
    }
    Ok(Symbol::Terminal(Terminal { text: tok.into(), glue: false }))
}

impl MimicGrammar {
    /// Parses grammar text without validating it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut productions: Vec<Production> = Vec::new();
        let mut index = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('|') {
                let current = productions.last_mut().ok_or_else(|| {
                    Error::Format(format!("grammar line {line}: alternative before any production"))
                })?;
                let symbols = rest
                    .split_whitespace()
                    .map(|t| parse_token(t, line))
                    .collect::<Result<Vec<_>>>()?;
                current.alternatives.push(symbols);
            } else if let Some(name) = trimmed.strip_suffix(':') {
                let name = name.trim();
                let ok = !name.is_empty()
                    && name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-');
                if !ok {
                    return Err(Error::Format(format!("grammar line {line}: bad production name {name:?}")));
                }
                if index.insert(name.to_string(), productions.len()).is_some() {
                    return Err(Error::Format(format!("grammar line {line}: duplicate production {name:?}")));
                }
                productions.push(Production {
                    name: name.to_string(),
                    alternatives: Vec::new(),
                    line,
                });
            } else {
                return Err(Error::Format(format!(
                    "grammar line {line}: expected `name:` or `| alternative`, got {trimmed:?}"
                )));
            }
        }
        if productions.is_empty() {
            return Err(Error::Format("grammar line 1: no productions".into()));
        }
        if let Some(p) = productions.iter().find(|p| p.alternatives.is_empty()) {
            return Err(Error::Format(format!("grammar line {}: production {:?} has no alternatives", p.line, p.name)));
        }
        let codes = productions.iter().map(|p| ChoiceCode::new(p.alternatives.len())).collect();
        Ok(MimicGrammar { productions, index, codes })
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn start(&self) -> usize {
        0
    }

    pub(crate) fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub(crate) fn code(&self, production: usize) -> &ChoiceCode {
        &self.codes[production]
    }

    pub(crate) fn glue_tokens(&self) -> BTreeSet<&str> {
        self.terminals().filter(|t| t.glue).map(|t| t.text.as_str()).collect()
    }

    fn terminals(&self) -> impl Iterator<Item = &Terminal> {
        self.productions
            .iter()
            .flat_map(|p| p.alternatives.iter().flatten())
            .filter_map(|s| match s {
                Symbol::Terminal(t) => Some(t),
                Symbol::NonTerminal(_) => None,
            })
    }

    /// Leading terminal of each alternative's derivations, per production.
    /// Only meaningful once references resolve and there is no left recursion.
    pub(crate) fn first_sets(&self) -> Vec<Vec<BTreeSet<Terminal>>> {
        let mut nt_first: Vec<BTreeSet<Terminal>> = vec![BTreeSet::new(); self.productions.len()];
        loop {
            let mut changed = false;
            for (i, p) in self.productions.iter().enumerate() {
                for alt in &p.alternatives {
                    let add: Vec<Terminal> = match alt.first() {
                        Some(Symbol::Terminal(t)) => vec![t.clone()],
                        Some(Symbol::NonTerminal(n)) => match self.lookup(n) {
                            Some(j) => nt_first[j].iter().cloned().collect(),
                            None => vec![],
                        },
                        None => vec![],
                    };
                    for t in add {
                        changed |= nt_first[i].insert(t);
                    }
                }
            }
            if !changed {
                break;
            }
        }
        self.productions
            .iter()
            .map(|p| {
                p.alternatives
                    .iter()
                    .map(|alt| match alt.first() {
                        Some(Symbol::Terminal(t)) => BTreeSet::from([t.clone()]),
                        Some(Symbol::NonTerminal(n)) => {
                            self.lookup(n).map(|j| nt_first[j].clone()).unwrap_or_default()
                        }
                        None => BTreeSet::new(),
                    })
                    .collect()
            })
            .collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut push = |p: &Production, alt: Option<usize>, message: String| {
            violations.push(Violation {
                production: p.name.clone(),
                alternative: alt,
                message,
            })
        };

        let mut unresolved = false;
        for p in &self.productions {
            for (a, alt) in p.alternatives.iter().enumerate() {
                if alt.is_empty() {
                    push(p, Some(a), "empty alternative".into());
                }
                for s in alt {
                    if let Symbol::NonTerminal(n) = s {
                        if self.lookup(n).is_none() {
                            unresolved = true;
                            push(p, Some(a), format!("undefined nonterminal <{n}>"));
                        }
                    }
                }
            }
        }

        let n = self.productions.len();
        let refs = |i: usize, only_first: bool, only_alt0: bool| -> Vec<usize> {
            let p = &self.productions[i];
            let alts: Vec<&Vec<Symbol>> = if only_alt0 {
                p.alternatives.iter().take(1).collect()
            } else {
                p.alternatives.iter().collect()
            };
            alts.into_iter()
                .flat_map(|alt| {
                    let syms: Vec<&Symbol> = if only_first { alt.iter().take(1).collect() } else { alt.iter().collect() };
                    syms.into_iter().filter_map(|s| match s {
                        Symbol::NonTerminal(name) => self.lookup(name),
                        _ => None,
                    })
                })
                .collect()
        };
        let graph = |only_first: bool, only_alt0: bool| -> Vec<Vec<usize>> {
            (0..n).map(|i| refs(i, only_first, only_alt0)).collect()
        };

        let left = graph(true, false);
        let mut left_recursive = false;
        for i in 0..n {
            if reaches(&left, i, i) {
                left_recursive = true;
                push(&self.productions[i], None, "left recursion".into());
            }
        }

        let zero = graph(false, true);
        for i in 0..n {
            if reaches(&zero, i, i) {
                push(
                    &self.productions[i],
                    None,
                    "alternative 0 does not terminate (zero-bit padding would never end)".into(),
                );
            }
        }

        if !unresolved && !left_recursive {
            let firsts = self.first_sets();
            for (i, p) in self.productions.iter().enumerate() {
                if p.alternatives.len() < 2 {
                    continue;
                }
                for a in 0..p.alternatives.len() {
                    for b in a + 1..p.alternatives.len() {
                        let shared: Vec<String> =
                            firsts[i][a].intersection(&firsts[i][b]).map(|t| t.to_string()).collect();
                        if !shared.is_empty() {
                            push(
                                p,
                                Some(b),
                                format!("LL(1) conflict with alternative {a} on {}", shared.join(", ")),
                            );
                        }
                    }
                }
            }
        }

        let full = graph(false, false);
        let reachable: Vec<usize> = (0..n).filter(|&j| j == 0 || reaches(&full, 0, j)).collect();
        let start = &self.productions[0];
        if !reachable.iter().any(|&j| self.productions[j].alternatives.len() >= 2) {
            push(start, None, "no choice point reachable from the start symbol; grammar carries no bits".into());
        }
        if !reachable.iter().any(|&j| reaches(&full, j, j)) {
            push(start, None, "no recursive continuation reachable from the start symbol".into());
        }

        let glue = self.glue_tokens();
        let mut seen = BTreeSet::new();
        for p in &self.productions {
            for (a, alt) in p.alternatives.iter().enumerate() {
                for s in alt {
                    let Symbol::Terminal(t) = s else { continue };
                    if !seen.insert(t.clone()) {
                        continue;
                    }
                    let clash = glue
                        .iter()
                        .find(|g| t.text.ends_with(**g) && !(t.glue && t.text == **g));
                    if let Some(g) = clash {
                        push(p, Some(a), format!("token {t} ends with glued token ~{g}; text would not re-tokenize"));
                    }
                }
            }
        }

        ValidationReport { violations }
    }

    /// Parses and validates; any violation becomes an error.
    pub fn load(text: &str) -> Result<Self> {
        let g = Self::parse(text)?;
        g.ensure_valid()?;
        Ok(g)
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::Usage(format!("invalid grammar:\n{report}")))
        }
    }
}

/// Is `to` reachable from `from` by one or more edges?
fn reaches(graph: &[Vec<usize>], from: usize, to: usize) -> bool {
    let mut seen = vec![false; graph.len()];
    let mut stack: Vec<usize> = graph[from].clone();
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        if !std::mem::replace(&mut seen[v], true) {
            stack.extend(&graph[v]);
        }
    }
    false
}
