//! Alphabets, fixed-length strings, Hamming distance and the two diversity
//! measures built on it.
//!
//! Tokens are arbitrary non-empty runs of printable non-whitespace
//! characters, so reduction alphabets such as `a:1:2` or `[n] ∪ {0}` need no
//! escaping. Strings store symbol indices into their alphabet.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a token inside its [`Alphabet`].
pub type Symbol = u32;

#[derive(Debug, Clone)]
pub struct Alphabet {
    tokens: Vec<String>,
    index: HashMap<String, Symbol>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    pub fn new<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if tokens.is_empty() {
            return Err(Error::InvalidInput(
                "alphabet must contain at least one token".into(),
            ));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            if tok.is_empty() || tok.chars().any(|c| c.is_whitespace() || c.is_control()) {
                return Err(Error::InvalidInput(format!("bad alphabet token {tok:?}")));
            }
            if tok.starts_with('#') {
                return Err(Error::InvalidInput(format!(
                    "token {tok:?} collides with comment syntax"
                )));
            }
            if index.insert(tok.clone(), i as Symbol).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate alphabet token {tok:?}"
                )));
            }
        }
        Ok(Alphabet { tokens, index })
    }

    /// One token per character of `chars`.
    pub fn from_chars(chars: &str) -> Result<Self> {
        Self::new(chars.chars().map(String::from))
    }

    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, sym: Symbol) -> &str {
        &self.tokens[sym as usize]
    }

    pub fn symbol(&self, token: &str) -> Option<Symbol> {
        self.index.get(token).copied()
    }

    /// True when every token is a single character, in which case strings
    /// may be written without separators.
    pub fn is_single_char(&self) -> bool {
        self.tokens.iter().all(|t| t.chars().count() == 1)
    }

    /// Split one line of text into tokens of this alphabet.
    pub fn tokenize(&self, line: &str) -> Result<Vec<Symbol>> {
        let line = line.trim();
        let pieces: Vec<&str> = if line.split_whitespace().nth(1).is_some() {
            line.split_whitespace().collect()
        } else if self.is_single_char() {
            line.char_indices()
                .map(|(i, c)| &line[i..i + c.len_utf8()])
                .collect()
        } else if line.is_empty() {
            Vec::new()
        } else {
            vec![line]
        };
        pieces
            .into_iter()
            .map(|p| {
                self.symbol(p).ok_or_else(|| {
                    Error::InvalidInput(format!("token {p:?} is not in the alphabet"))
                })
            })
            .collect()
    }

    pub(crate) fn render(&self, symbols: &[Symbol]) -> String {
        let sep = if self.is_single_char() { "" } else { " " };
        symbols
            .iter()
            .map(|&s| self.token(s))
            .collect::<Vec<_>>()
            .join(sep)
    }

    pub(crate) fn header_line(&self) -> String {
        format!("alphabet {}", self.tokens.join(" "))
    }
}

/// A string over a shared alphabet.
#[derive(Clone)]
pub struct RString {
    alphabet: Arc<Alphabet>,
    symbols: Vec<Symbol>,
}

impl RString {
    pub fn new(alphabet: Arc<Alphabet>, symbols: Vec<Symbol>) -> Result<Self> {
        let sigma = alphabet.size() as Symbol;
        if let Some(&bad) = symbols.iter().find(|&&s| s >= sigma) {
            return Err(Error::InvalidInput(format!(
                "symbol index {bad} out of range for alphabet of size {sigma}"
            )));
        }
        Ok(RString { alphabet, symbols })
    }

    pub fn parse(alphabet: &Arc<Alphabet>, text: &str) -> Result<Self> {
        let symbols = alphabet.tokenize(text)?;
        Ok(RString {
            alphabet: Arc::clone(alphabet),
            symbols,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn same_alphabet(&self, other: &RString) -> bool {
        Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet
    }
}

impl PartialEq for RString {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols && self.same_alphabet(other)
    }
}

impl Eq for RString {}

impl Hash for RString {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.symbols.hash(state);
    }
}

impl PartialOrd for RString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order of token indices.
impl Ord for RString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.symbols.cmp(&other.symbols)
    }
}

impl fmt::Display for RString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.alphabet.render(&self.symbols))
    }
}

impl fmt::Debug for RString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_string())
    }
}

/// Equi-length set of pairwise distinct strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringSet {
    alphabet: Arc<Alphabet>,
    members: Vec<RString>,
    r: usize,
}

impl StringSet {
    pub fn new(alphabet: Arc<Alphabet>, members: Vec<RString>) -> Result<Self> {
        let r = members.first().map_or(0, RString::len);
        let mut seen = std::collections::HashSet::with_capacity(members.len());
        for m in &members {
            if m.alphabet.as_ref() != alphabet.as_ref() {
                return Err(Error::AlphabetMismatch);
            }
            if m.len() != r {
                return Err(Error::LengthMismatch {
                    left: r,
                    right: m.len(),
                });
            }
            if !seen.insert(m.symbols.clone()) {
                return Err(Error::InvalidInput(format!("duplicate string {m}")));
            }
        }
        Ok(StringSet {
            alphabet,
            members,
            r,
        })
    }

    /// Convenience constructor for single-character alphabets.
    pub fn from_strs(alphabet: &str, members: &[&str]) -> Result<Self> {
        let alphabet = Arc::new(Alphabet::from_chars(alphabet)?);
        let members = members
            .iter()
            .map(|m| RString::parse(&alphabet, m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, members)
    }

    /// Parse the string-set file format. Duplicated lines are an error.
    pub fn parse(text: &str) -> Result<Self> {
        let (alphabet, members) = parse_string_list(text)?;
        Self::new(alphabet, members)
    }

    pub fn to_text(&self) -> String {
        write_string_list(&self.alphabet, &self.members)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn members(&self) -> &[RString] {
        &self.members
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `||L||`, the total length of all members.
    pub fn total_length(&self) -> usize {
        self.members.len() * self.r
    }

    pub fn contains(&self, x: &RString) -> bool {
        self.members.iter().any(|m| m == x)
    }

    /// Members sorted lexicographically.
    pub fn sorted(&self) -> Vec<RString> {
        let mut v = self.members.clone();
        v.sort();
        v
    }
}

fn strip_comment(line: &str) -> &str {
    let line = line.trim();
    if line.starts_with('#') {
        return "";
    }
    match line.find(" #").or_else(|| line.find("\t#")) {
        Some(pos) => line[..pos].trim_end(),
        None => line,
    }
}

/// Parse the string-set file format without requiring equal lengths or
/// distinct members (LCS inputs are arbitrary strings).
pub fn parse_string_list(text: &str) -> Result<(Arc<Alphabet>, Vec<RString>)> {
    let mut alphabet: Option<Arc<Alphabet>> = None;
    let mut members = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            line: lineno + 1,
            msg,
        };
        match &alphabet {
            None => {
                let mut words = line.split_whitespace();
                if words.next() != Some("alphabet") {
                    return Err(parse_err("expected `alphabet <tok> ...` header".into()));
                }
                let a = Alphabet::new(words).map_err(|e| parse_err(e.to_string()))?;
                alphabet = Some(Arc::new(a));
            }
            Some(a) => {
                let s = RString::parse(a, line).map_err(|e| parse_err(e.to_string()))?;
                members.push(s);
            }
        }
    }
    let alphabet = alphabet.ok_or(Error::Parse {
        line: 0,
        msg: "missing alphabet header".into(),
    })?;
    Ok((alphabet, members))
}

pub fn write_string_list(alphabet: &Alphabet, members: &[RString]) -> String {
    let mut out = alphabet.header_line();
    out.push('\n');
    for m in members {
        out.push_str(&m.to_string());
        out.push('\n');
    }
    out
}

/// A diversity value; `Infinite` is the minimum over an empty set of pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Diversity {
    Finite(u64),
    Infinite,
}

impl Diversity {
    pub fn meets(self, delta: u64) -> bool {
        match self {
            Diversity::Finite(v) => v >= delta,
            Diversity::Infinite => true,
        }
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Diversity::Finite(v) => Some(v),
            Diversity::Infinite => None,
        }
    }
}

impl fmt::Display for Diversity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diversity::Finite(v) => write!(f, "{v}"),
            Diversity::Infinite => f.write_str("inf"),
        }
    }
}

pub fn hamming(x: &RString, y: &RString) -> Result<usize> {
    if !x.same_alphabet(y) {
        return Err(Error::AlphabetMismatch);
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(hamming_symbols(&x.symbols, &y.symbols))
}

#[inline]
pub(crate) fn hamming_symbols(x: &[Symbol], y: &[Symbol]) -> usize {
    x.iter().zip(y).filter(|(a, b)| a != b).count()
}

fn check_family(xs: &[RString]) -> Result<()> {
    if let Some(first) = xs.first() {
        for x in &xs[1..] {
            if !first.same_alphabet(x) {
                return Err(Error::AlphabetMismatch);
            }
            if x.len() != first.len() {
                return Err(Error::LengthMismatch {
                    left: first.len(),
                    right: x.len(),
                });
            }
        }
    }
    Ok(())
}

/// Sum of pairwise Hamming distances.
pub fn div_sum(xs: &[RString]) -> Result<u64> {
    check_family(xs)?;
    let mut total = 0u64;
    for (i, a) in xs.iter().enumerate() {
        for b in &xs[i + 1..] {
            total += hamming_symbols(&a.symbols, &b.symbols) as u64;
        }
    }
    Ok(total)
}

/// Minimum pairwise Hamming distance; infinite for fewer than two strings.
pub fn div_min(xs: &[RString]) -> Result<Diversity> {
    check_family(xs)?;
    let mut best = Diversity::Infinite;
    for (i, a) in xs.iter().enumerate() {
        for b in &xs[i + 1..] {
            let d = Diversity::Finite(hamming_symbols(&a.symbols, &b.symbols) as u64);
            best = best.min(d);
        }
    }
    Ok(best)
}

/// ℓ1 embedding with every coordinate doubled, so entries are 0 or 1 and
/// the ℓ1 distance between two embeddings is twice the Hamming distance.
pub fn l1_embed_doubled(x: &RString) -> Vec<u32> {
    let sigma = x.alphabet.size();
    let mut v = vec![0u32; x.len() * sigma];
    for (pos, &s) in x.symbols.iter().enumerate() {
        v[pos * sigma + s as usize] = 1;
    }
    v
}

/// ℓ1 embedding over any numeric scalar: one block of σ coordinates per
/// position, holding 1/2 at the symbol's index and 0 elsewhere.
pub fn l1_embed<T: Num + Clone>(x: &RString) -> Vec<T> {
    let half = T::one() / (T::one() + T::one());
    l1_embed_doubled(x)
        .into_iter()
        .map(|b| if b == 1 { half.clone() } else { T::zero() })
        .collect()
}

/// ℓ1 distance between two equal-length vectors.
pub fn l1_distance<T: Num + PartialOrd + Clone>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).fold(T::zero(), |acc, (x, y)| {
        let diff = if x > y {
            x.clone() - y.clone()
        } else {
            y.clone() - x.clone()
        };
        acc + diff
    }))
}
