//! Brute-force reference implementations.
//!
//! Everything here enumerates the defining quantifier directly and shares
//! no code with the DAG, DP or local-search modules (distances are
//! recomputed locally). Budgets make an oracle fail loudly instead of
//! returning a partial answer.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::problem::{Mode, Semantics};
use crate::reductions::{ThreeDmInstance, UGraph};
use crate::strings::{Diversity, RString, StringSet, Symbol};

/// Limits for exhaustive searches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_candidates: usize,
    pub max_tuples: u64,
    pub max_subsequences: u64,
    pub time_limit: Duration,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_candidates: 1_000_000,
            max_tuples: 1_000_000,
            max_subsequences: 1 << 20,
            time_limit: Duration::from_secs(10),
        }
    }
}

impl OracleBudget {
    /// Default budget with the time ceiling taken from `DIVSTR_BUDGET_MS`
    /// when set.
    pub fn from_env() -> Self {
        let mut b = Self::default();
        if let Some(ms) = std::env::var("DIVSTR_BUDGET_MS")
            .ok()
            .and_then(|v| v.parse::<u64>().ok())
        {
            b.time_limit = Duration::from_millis(ms);
        }
        b
    }
}

struct Clock {
    start: Instant,
    limit: Duration,
    ticks: u64,
}

impl Clock {
    fn new(budget: &OracleBudget) -> Self {
        Clock {
            start: Instant::now(),
            limit: budget.time_limit,
            ticks: 0,
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.ticks += 1;
        if self.ticks % 4096 == 0 && self.start.elapsed() > self.limit {
            return Err(Error::Budget(format!("oracle exceeded {:?}", self.limit)));
        }
        Ok(())
    }
}

fn distance(x: &[Symbol], y: &[Symbol]) -> u64 {
    let mut d = 0;
    for i in 0..x.len() {
        if x[i] != y[i] {
            d += 1;
        }
    }
    d
}

fn diversity_of(mode: Mode, pick: &[&[Symbol]]) -> Diversity {
    let mut sum = 0u64;
    let mut min = Diversity::Infinite;
    for i in 0..pick.len() {
        for j in i + 1..pick.len() {
            let d = distance(pick[i], pick[j]);
            sum += d;
            min = min.min(Diversity::Finite(d));
        }
    }
    match mode {
        Mode::MaxMin => min,
        Mode::MaxSum => Diversity::Finite(sum),
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let mut acc: u128 = 1;
    for i in 0..k.min(n) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    if k > n {
        0
    } else {
        acc as u64
    }
}

/// Advance a non-decreasing (tuple) or strictly increasing (set) index
/// vector in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize, repeat: bool) -> bool {
    let k = idx.len();
    for pos in (0..k).rev() {
        let cap = if repeat { n - 1 } else { n - k + pos };
        if idx[pos] < cap {
            idx[pos] += 1;
            for later in pos + 1..k {
                idx[later] = if repeat { idx[pos] } else { idx[later - 1] + 1 };
            }
            return true;
        }
    }
    false
}

/// Outcome of an exhaustive diversity search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteOutcome {
    pub decision: bool,
    /// `None` when no selection exists (set semantics with `|L| < K`).
    pub optimum: Option<Diversity>,
    pub witness: Option<Vec<RString>>,
}

/// Enumerate every K-multiset (tuple semantics) or K-subset (set
/// semantics) of `set` and report the best diversity; ties go to the
/// lexicographically first selection.
pub fn brute_diverse(
    set: &StringSet,
    k: usize,
    delta: u64,
    mode: Mode,
    semantics: Semantics,
    budget: &OracleBudget,
) -> Result<BruteOutcome> {
    if k == 0 {
        return Err(Error::InvalidInput("K must be positive".into()));
    }
    let members = set.sorted();
    let n = members.len();
    let repeat = semantics == Semantics::Tuple;
    let count = if repeat {
        binomial((n + k - 1) as u64, k as u64)
    } else {
        binomial(n as u64, k as u64)
    };
    if count > budget.max_tuples {
        return Err(Error::Budget(format!(
            "{count} selections exceed the tuple budget"
        )));
    }
    if n == 0 || (!repeat && n < k) {
        return Ok(BruteOutcome {
            decision: false,
            optimum: None,
            witness: None,
        });
    }
    let mut clock = Clock::new(budget);
    let mut idx: Vec<usize> = if repeat { vec![0; k] } else { (0..k).collect() };
    let mut best: Option<(Diversity, Vec<usize>)> = None;
    loop {
        clock.tick()?;
        let pick: Vec<&[Symbol]> = idx.iter().map(|&i| members[i].symbols()).collect();
        let div = diversity_of(mode, &pick);
        if best.as_ref().is_none_or(|(b, _)| div > *b) {
            best = Some((div, idx.clone()));
        }
        if !next_combination(&mut idx, n, repeat) {
            break;
        }
    }
    let (optimum, arg) = best.expect("at least one selection");
    Ok(BruteOutcome {
        decision: optimum.meets(delta),
        optimum: Some(optimum),
        witness: Some(arg.into_iter().map(|i| members[i].clone()).collect()),
    })
}

pub fn is_subsequence(x: &[Symbol], y: &[Symbol]) -> bool {
    let mut it = y.iter();
    x.iter().all(|c| it.any(|d| d == c))
}

/// All distinct longest common subsequences of two strings.
pub fn brute_lcs_set(s1: &RString, s2: &RString, budget: &OracleBudget) -> Result<StringSet> {
    brute_lcs_set_many(&[s1.clone(), s2.clone()], budget)
}

/// All distinct longest common subsequences of `strings`.
///
/// Enumerates every subsequence of the shortest string when there are at
/// most `max_subsequences` of them; longer inputs fall back to an
/// exhaustive memoised recursion over suffix tuples, bounded by
/// `max_candidates` stored strings.
pub fn brute_lcs_set_many(strings: &[RString], budget: &OracleBudget) -> Result<StringSet> {
    let shortest = strings
        .iter()
        .min_by_key(|s| s.len())
        .ok_or_else(|| Error::InvalidInput("need at least one string".into()))?;
    let alphabet = Arc::clone(shortest.alphabet());
    let found = if shortest.len() < 64 && (1u64 << shortest.len()) <= budget.max_subsequences {
        lcs_by_subsequences(shortest.symbols(), strings, budget)?
    } else {
        lcs_by_recursion(strings, budget)?
    };
    let members = found
        .into_iter()
        .map(|v| RString::new(Arc::clone(&alphabet), v))
        .collect::<Result<Vec<_>>>()?;
    StringSet::new(alphabet, members)
}

fn lcs_by_subsequences(
    base: &[Symbol],
    strings: &[RString],
    budget: &OracleBudget,
) -> Result<BTreeSet<Vec<Symbol>>> {
    let mut clock = Clock::new(budget);
    let mut best_len = 0;
    let mut found = BTreeSet::new();
    for mask in 0u64..(1u64 << base.len()) {
        clock.tick()?;
        let len = mask.count_ones() as usize;
        if len < best_len {
            continue;
        }
        let sub: Vec<Symbol> = (0..base.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| base[i])
            .collect();
        if strings.iter().all(|s| is_subsequence(&sub, s.symbols())) {
            if len > best_len {
                best_len = len;
                found.clear();
            }
            found.insert(sub);
        }
    }
    Ok(found)
}

type Memo = HashMap<Vec<usize>, Rc<BTreeSet<Vec<Symbol>>>>;

fn lcs_by_recursion(strings: &[RString], budget: &OracleBudget) -> Result<BTreeSet<Vec<Symbol>>> {
    let seqs: Vec<&[Symbol]> = strings.iter().map(|s| s.symbols()).collect();
    let mut memo: Memo = HashMap::new();
    let mut stored = 0usize;
    let mut clock = Clock::new(budget);
    let start = vec![0usize; seqs.len()];
    let out = suffix_lcs(&seqs, &start, &mut memo, &mut stored, budget, &mut clock)?;
    Ok((*out).clone())
}

fn suffix_lcs(
    seqs: &[&[Symbol]],
    pos: &[usize],
    memo: &mut Memo,
    stored: &mut usize,
    budget: &OracleBudget,
    clock: &mut Clock,
) -> Result<Rc<BTreeSet<Vec<Symbol>>>> {
    if let Some(hit) = memo.get(pos) {
        return Ok(Rc::clone(hit));
    }
    clock.tick()?;
    let result: BTreeSet<Vec<Symbol>> = if seqs.iter().zip(pos).any(|(s, &p)| p == s.len()) {
        std::iter::once(Vec::new()).collect()
    } else {
        let c = seqs[0][pos[0]];
        if seqs.iter().zip(pos).all(|(s, &p)| s[p] == c) {
            let next: Vec<usize> = pos.iter().map(|p| p + 1).collect();
            let tail = suffix_lcs(seqs, &next, memo, stored, budget, clock)?;
            tail.iter()
                .map(|t| {
                    let mut v = Vec::with_capacity(t.len() + 1);
                    v.push(c);
                    v.extend_from_slice(t);
                    v
                })
                .collect()
        } else {
            let mut best_len = 0;
            let mut acc = BTreeSet::new();
            for k in 0..pos.len() {
                let mut next = pos.to_vec();
                next[k] += 1;
                let sub = suffix_lcs(seqs, &next, memo, stored, budget, clock)?;
                let len = sub.iter().next().map_or(0, Vec::len);
                if len > best_len {
                    best_len = len;
                    acc.clear();
                }
                if len == best_len {
                    acc.extend(sub.iter().cloned());
                }
            }
            acc
        }
    };
    *stored += result.len();
    if *stored > budget.max_candidates {
        return Err(Error::Budget(format!(
            "more than {} stored subsequences",
            budget.max_candidates
        )));
    }
    let rc = Rc::new(result);
    memo.insert(pos.to_vec(), Rc::clone(&rc));
    Ok(rc)
}

/// Member of `set` maximising the summed distance to `refs`; ties go to
/// the lexicographically least member.
pub fn brute_farthest(
    set: &StringSet,
    refs: &[RString],
    budget: &OracleBudget,
) -> Result<(RString, u64)> {
    brute_farthest_excluding(set, refs, &[], budget)?
        .ok_or_else(|| Error::InvalidInput("empty string set".into()))
}

/// As [`brute_farthest`] but skipping every member listed in `exclude`.
pub fn brute_farthest_excluding(
    set: &StringSet,
    refs: &[RString],
    exclude: &[RString],
    budget: &OracleBudget,
) -> Result<Option<(RString, u64)>> {
    if set.len() > budget.max_candidates {
        return Err(Error::Budget(format!(
            "{} candidates exceed the budget",
            set.len()
        )));
    }
    let mut best: Option<(RString, u64)> = None;
    for y in set.sorted() {
        if exclude.iter().any(|e| e.symbols() == y.symbols()) {
            continue;
        }
        let score: u64 = refs
            .iter()
            .map(|x| distance(x.symbols(), y.symbols()))
            .sum();
        if best.as_ref().is_none_or(|(_, b)| score > *b) {
            best = Some((y, score));
        }
    }
    Ok(best)
}

/// Does `inst` contain `n` triples that pairwise disagree in every coordinate?
pub fn brute_matching_3dm(inst: &ThreeDmInstance, budget: &OracleBudget) -> Result<bool> {
    let f = inst.triples.len();
    let n = inst.n;
    if n == 0 {
        return Ok(true);
    }
    if f < n {
        return Ok(false);
    }
    if binomial(f as u64, n as u64) > budget.max_tuples {
        return Err(Error::Budget("too many candidate sub-families".into()));
    }
    let mut clock = Clock::new(budget);
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        clock.tick()?;
        let disjoint = (0..n).all(|a| {
            (a + 1..n).all(|b| (0..3).all(|c| inst.triples[idx[a]][c] != inst.triples[idx[b]][c]))
        });
        if disjoint {
            return Ok(true);
        }
        if !next_combination(&mut idx, f, false) {
            return Ok(false);
        }
    }
}

/// Does `g` contain a clique on `k` vertices?
pub fn brute_clique(g: &UGraph, k: usize, budget: &OracleBudget) -> Result<bool> {
    if k == 0 {
        return Ok(true);
    }
    if k > g.n {
        return Ok(false);
    }
    if binomial(g.n as u64, k as u64) > budget.max_tuples {
        return Err(Error::Budget("too many vertex subsets".into()));
    }
    let mut clock = Clock::new(budget);
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        clock.tick()?;
        let complete =
            (0..k).all(|a| (a + 1..k).all(|b| g.has_edge(idx[a] as u32 + 1, idx[b] as u32 + 1)));
        if complete {
            return Ok(true);
        }
        if !next_combination(&mut idx, g.n, false) {
            return Ok(false);
        }
    }
}
