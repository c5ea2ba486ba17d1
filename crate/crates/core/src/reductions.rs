//! Hardness constructions as executable instance transformations:
//! 3-dimensional matching and clique into diverse string set, and any
//! diverse string set into diverse LCS of two strings.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::{pairs, Mode};
use crate::strings::{write_string_list, Alphabet, RString, StringSet, Symbol};

/// 3DM instance over `A = B = C = [n]`; triples are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeDmInstance {
    pub n: usize,
    pub triples: Vec<[u32; 3]>,
}

impl ThreeDmInstance {
    pub fn new(n: usize, triples: Vec<[u32; 3]>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for t in &triples {
            if t.iter().any(|&x| x == 0 || x as usize > n) {
                return Err(Error::InvalidInput(format!("triple {t:?} leaves [1, {n}]")));
            }
            if !seen.insert(*t) {
                return Err(Error::InvalidInput(format!("duplicate triple {t:?}")));
            }
        }
        Ok(ThreeDmInstance { n, triples })
    }

    /// `n <int>` header, then one triple `x y z` per line.
    pub fn parse(text: &str) -> Result<Self> {
        let (n, rows) = parse_header_and_rows(text, 3)?;
        Self::new(n, rows.into_iter().map(|r| [r[0], r[1], r[2]]).collect())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for t in &self.triples {
            out.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
        }
        out
    }
}

/// Simple undirected graph on vertices `1..=n`; edges stored as `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UGraph {
    pub n: usize,
    pub edges: BTreeSet<(u32, u32)>,
}

impl UGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidInput(format!("self-loop at {a}")));
            }
            if a == 0 || b == 0 || a as usize > n || b as usize > n {
                return Err(Error::InvalidInput(format!(
                    "edge ({a}, {b}) leaves [1, {n}]"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(UGraph { n, edges: set })
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// `n <int>` header, then one edge `i j` per line.
    pub fn parse(text: &str) -> Result<Self> {
        let (n, rows) = parse_header_and_rows(text, 2)?;
        Self::new(n, rows.into_iter().map(|r| (r[0], r[1])))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for (a, b) in &self.edges {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }
}

fn parse_header_and_rows(text: &str, width: usize) -> Result<(usize, Vec<Vec<u32>>)> {
    let mut n = None;
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            line: lineno + 1,
            msg,
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        if n.is_none() {
            match words.as_slice() {
                ["n", v] => n = Some(v.parse::<usize>().map_err(|e| err(e.to_string()))?),
                _ => return Err(err("expected `n <int>` header".into())),
            }
            continue;
        }
        if words.len() != width {
            return Err(err(format!("expected {width} integers")));
        }
        let row = words
            .iter()
            .map(|w| w.parse::<u32>().map_err(|e| err(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = n.ok_or(Error::Parse {
        line: 0,
        msg: "missing `n` header".into(),
    })?;
    Ok((n, rows))
}

/// A diverse-string-set instance produced by a reduction.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub strings: StringSet,
    pub k: usize,
    pub delta_min: u64,
    pub delta_sum: u64,
}

/// Each triple becomes a 3-string over position-tagged tokens `a:v`,
/// `b:v`, `c:v`; a perfect matching is a max-min 3-diverse set of size n.
pub fn reduce_3dm(inst: &ThreeDmInstance) -> Result<Reduced> {
    if inst.n == 0 || inst.triples.is_empty() {
        return Err(Error::InvalidInput(
            "3DM needs n ≥ 1 and a non-empty family".into(),
        ));
    }
    let n = inst.n;
    let tokens = ["a", "b", "c"]
        .iter()
        .flat_map(|p| (1..=n).map(move |v| format!("{p}:{v}")));
    let alphabet = Arc::new(Alphabet::new(tokens)?);
    let members = inst
        .triples
        .iter()
        .map(|t| {
            let syms: Vec<Symbol> = (0..3).map(|pos| (pos * n) as Symbol + t[pos] - 1).collect();
            RString::new(Arc::clone(&alphabet), syms)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Reduced {
        strings: StringSet::new(alphabet, members)?,
        k: n,
        delta_min: 3,
        delta_sum: 3 * pairs(n) as u64,
    })
}

/// Unordered vertex pairs of `[n]` in lexicographic order; these index
/// the positions of the clique strings.
pub fn pair_positions(n: usize) -> Vec<(u32, u32)> {
    let n = n as u32;
    (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .collect()
}

/// String `S_i` holds `0` at pair `e` when `i ∈ e` and `e` is a non-edge,
/// and `i` elsewhere. Two strings differ everywhere exactly when their
/// vertices are adjacent, so K-cliques are max-min sets at `Δ = r`.
///
/// For `n = 2` without the edge both strings coincide; the result is
/// deduplicated, which cannot change any decision at `Δ = r ≥ 1`.
pub fn reduce_clique(g: &UGraph, k: usize) -> Result<Reduced> {
    if g.n < 2 || k == 0 || k > g.n {
        return Err(Error::InvalidInput(format!(
            "need n ≥ 2 and 1 ≤ K ≤ n, got n = {}, K = {k}",
            g.n
        )));
    }
    let alphabet = Arc::new(Alphabet::new((0..=g.n).map(|v| v.to_string()))?);
    let positions = pair_positions(g.n);
    let mut seen = BTreeSet::new();
    let mut members = Vec::new();
    for i in 1..=g.n as u32 {
        let syms: Vec<Symbol> = positions
            .iter()
            .map(|&(a, b)| {
                if (a == i || b == i) && !g.has_edge(a, b) {
                    0
                } else {
                    i
                }
            })
            .collect();
        if seen.insert(syms.clone()) {
            members.push(RString::new(Arc::clone(&alphabet), syms)?);
        }
    }
    let r = positions.len() as u64;
    Ok(Reduced {
        strings: StringSet::new(alphabet, members)?,
        k,
        delta_min: r,
        delta_sum: r * pairs(k) as u64,
    })
}

/// Lengths `(|A_i|, |Ā_i|, |B̄_i|, |B_i|)` of the padding segments of
/// block `i` (1-based) when `s` strings are encoded with unit stretch.
pub fn segment_lengths(s: usize, i: usize) -> Result<(usize, usize, usize, usize)> {
    if i == 0 || i > s {
        return Err(Error::InvalidInput(format!(
            "segment index {i} outside [1, {s}]"
        )));
    }
    Ok((s - i + 1, i - 1, s - i, i))
}

/// Smallest stretch for which the encoding is provably exact:
/// `(s−1)·r + 1`.
///
/// A common subsequence that mixes padding from two blocks drops at least
/// one stretched padding unit (`stretch` symbols) against a full `T_i`,
/// while it can pick up at most `(s−1)·r` extra symbols of the original
/// strings. With stretch 1 and `r ≥ 2` this already fails, e.g. for
/// `{000, 011, 101, 110}`.
pub fn safe_stretch(s: usize, r: usize) -> usize {
    s.saturating_sub(1) * r + 1
}

/// Two strings whose LCS set is `{T_i = P_i · X_i · Q_i}`, with the
/// threshold shifted so that decisions carry over.
#[derive(Debug, Clone)]
pub struct LcsEncoding {
    pub alphabet: Arc<Alphabet>,
    pub s1: RString,
    pub s2: RString,
    /// `T_1, ..., T_s` in input order.
    pub padded: Vec<RString>,
    pub s: usize,
    pub r: usize,
    /// Every padding index is a block of this many distinct symbols.
    pub stretch: usize,
    pub k: usize,
    pub mode: Mode,
    pub delta: u64,
    pub shifted_delta: u64,
}

impl LcsEncoding {
    /// `|P_i| = |Q_i|`.
    pub fn pad(&self) -> usize {
        self.stretch * self.s
    }

    /// Two-string string-set file with the shifted threshold as a comment.
    pub fn to_text(&self) -> String {
        let mut out = format!("# DELTA_SHIFTED {}\n", self.shifted_delta);
        out.push_str(&write_string_list(
            &self.alphabet,
            &[self.s1.clone(), self.s2.clone()],
        ));
        out
    }

    pub fn inputs(&self) -> [RString; 2] {
        [self.s1.clone(), self.s2.clone()]
    }
}

/// Threshold for the encoded instance: every pair of distinct padded
/// strings gains exactly `2·pad`.
pub fn shifted_threshold(mode: Mode, delta: u64, pad: usize, k: usize) -> u64 {
    match mode {
        Mode::MaxMin => delta + 2 * pad as u64,
        Mode::MaxSum => delta + 2 * pad as u64 * pairs(k) as u64,
    }
}

/// LCS encoding with [`safe_stretch`].
pub fn encode_as_lcs(set: &StringSet, k: usize, delta: u64, mode: Mode) -> Result<LcsEncoding> {
    encode_as_lcs_stretched(set, k, delta, mode, safe_stretch(set.len(), set.r()))
}

/// LCS encoding whose padding indices are blocks of `stretch` symbols.
/// Stretch 1 is the textbook construction with `|P_i| = s`.
pub fn encode_as_lcs_stretched(
    set: &StringSet,
    k: usize,
    delta: u64,
    mode: Mode,
    stretch: usize,
) -> Result<LcsEncoding> {
    let s = set.len();
    if s < 2 {
        return Err(Error::InvalidInput(
            "LCS encoding needs at least two strings".into(),
        ));
    }
    if stretch == 0 {
        return Err(Error::InvalidInput("stretch must be positive".into()));
    }
    let pad = stretch * s;
    let sigma = set.alphabet().size();
    let mut tokens: Vec<String> = set.alphabet().tokens().to_vec();
    for p in ["a", "b"] {
        for i in 1..=s {
            for j in 1..=pad {
                tokens.push(format!("{p}:{i}:{j}"));
            }
        }
    }
    let alphabet = Arc::new(Alphabet::new(tokens).map_err(|_| {
        Error::InvalidInput("alphabet already uses padding tokens of the form a:i:j / b:i:j".into())
    })?);
    let a_sym = |i: usize, j: usize| (sigma + (i - 1) * pad + (j - 1)) as Symbol;
    let b_sym = |i: usize, j: usize| (sigma + s * pad + (i - 1) * pad + (j - 1)) as Symbol;

    let mut a_seg = Vec::with_capacity(s);
    let mut w_seg = Vec::with_capacity(s);
    let mut b_seg = Vec::with_capacity(s);
    let mut padded = Vec::with_capacity(s);
    for (idx, x) in set.members().iter().enumerate() {
        let i = idx + 1;
        let p: Vec<Symbol> = (1..=pad).map(|j| a_sym(i, j)).collect();
        let q: Vec<Symbol> = (1..=pad).map(|j| b_sym(i, j)).collect();
        let (a_len, _, bbar_len, _) = segment_lengths(s, i)?;
        let (a, abar) = p.split_at(a_len * stretch);
        let (bbar, b) = q.split_at(bbar_len * stretch);
        let mut w = abar.to_vec();
        w.extend_from_slice(x.symbols());
        w.extend_from_slice(bbar);
        a_seg.push(a.to_vec());
        b_seg.push(b.to_vec());
        w_seg.push(w);
        let mut t = p.clone();
        t.extend_from_slice(x.symbols());
        t.extend_from_slice(&q);
        padded.push(t);
    }
    let s1: Vec<Symbol> = a_seg
        .iter()
        .chain(&w_seg)
        .chain(&b_seg)
        .flatten()
        .copied()
        .collect();
    let s2: Vec<Symbol> = padded.iter().rev().flatten().copied().collect();
    let rs = |v: Vec<Symbol>| RString::new(Arc::clone(&alphabet), v);
    Ok(LcsEncoding {
        s1: rs(s1)?,
        s2: rs(s2)?,
        padded: padded.into_iter().map(rs).collect::<Result<Vec<_>>>()?,
        alphabet: Arc::clone(&alphabet),
        s,
        r: set.r(),
        stretch,
        k,
        mode,
        delta,
        shifted_delta: shifted_threshold(mode, delta, pad, k),
    })
}
