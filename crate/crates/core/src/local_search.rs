//! Max-Sum approximation for unbounded K: the farthest-string DP, swap
//! local search on top of it, and the PTAS dispatch between local search
//! and the exact solver.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dag::{SigmaDag, VertexId};
use crate::error::{Error, Result};
use crate::exact::{optimize, SolveOptions};
use crate::problem::{Mode, Semantics};
use crate::strings::{div_sum, hamming_symbols, Diversity, RString, Symbol};
use crate::Rational;

fn check_refs(g: &SigmaDag, refs: &[RString]) -> Result<()> {
    for x in refs {
        if **x.alphabet() != **g.alphabet() {
            return Err(Error::AlphabetMismatch);
        }
        if x.len() != g.r() {
            return Err(Error::LengthMismatch {
                left: g.r(),
                right: x.len(),
            });
        }
    }
    Ok(())
}

/// String of L(G) maximising the summed distance to `refs`, tracked up to
/// `cap`. Returns the string and its (capped) value.
pub fn farthest_string(g: &SigmaDag, refs: &[RString], cap: u64) -> Result<(RString, u64)> {
    farthest_string_excluding(g, refs, cap, &[])?
        .ok_or_else(|| Error::InvalidInput("language is empty".into()))
}

/// As [`farthest_string`], restricted to strings not listed in `exclude`.
/// `None` when every string of L(G) is excluded.
///
/// Each state carries one bit per excluded string, set while the path read
/// so far still equals that string's prefix; a path reaching the sink with
/// any bit set spells an excluded string.
pub fn farthest_string_excluding(
    g: &SigmaDag,
    refs: &[RString],
    cap: u64,
    exclude: &[RString],
) -> Result<Option<(RString, u64)>> {
    check_refs(g, refs)?;
    check_refs(g, exclude)?;
    if exclude.len() > 64 {
        return Err(Error::InvalidInput("at most 64 excluded strings".into()));
    }
    let all: u64 = if exclude.len() == 64 {
        u64::MAX
    } else {
        (1u64 << exclude.len()) - 1
    };
    type State = (VertexId, u64, u64);
    let mut layers: Vec<Vec<(State, usize, Symbol)>> = vec![vec![((g.source(), 0, all), 0, 0)]];
    for d in 0..g.r() {
        let mut seen: HashSet<State> = HashSet::new();
        let mut next = Vec::new();
        for (pi, &((v, z, mask), _, _)) in layers[d].iter().enumerate() {
            for e in g.out_edges(v) {
                let gain = refs.iter().filter(|x| x.symbols()[d] != e.label).count() as u64;
                let mut m = mask;
                for (i, x) in exclude.iter().enumerate() {
                    if x.symbols()[d] != e.label {
                        m &= !(1u64 << i);
                    }
                }
                let state = (e.to, (z + gain).min(cap), m);
                if seen.insert(state) {
                    next.push((state, pi, e.label));
                }
            }
        }
        layers.push(next);
    }
    let last = layers.last().unwrap();
    let Some(best) = last
        .iter()
        .filter(|(s, _, _)| s.2 == 0)
        .map(|(s, _, _)| s.1)
        .max()
    else {
        return Ok(None);
    };
    let mut winner: Option<Vec<Symbol>> = None;
    for (i, (s, _, _)) in last.iter().enumerate() {
        if s.2 != 0 || s.1 != best {
            continue;
        }
        let mut row = Vec::with_capacity(g.r());
        let mut at = i;
        for layer in layers[1..].iter().rev() {
            let (_, prev, c) = layer[at];
            row.push(c);
            at = prev;
        }
        row.reverse();
        if winner.as_ref().is_none_or(|w| row < *w) {
            winner = Some(row);
        }
    }
    Ok(Some((g.rstring(winner.unwrap()), best)))
}

/// Outer iterations of the local search for K strings:
/// ⌈K(K−1)/(K+1) · ln((K+2)(K−1)²/4)⌉, and 0 when K ≤ 2.
pub fn iteration_budget(k: usize) -> u64 {
    if k <= 2 {
        return 0;
    }
    let kf = k as f64;
    let v = kf * (kf - 1.0) / (kf + 1.0) * ((kf + 2.0) * (kf - 1.0).powi(2) / 4.0).ln();
    v.ceil().max(0.0) as u64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalSearchState {
    pub current: Vec<RString>,
    pub iteration: u64,
    pub budget: u64,
    pub swaps: u64,
}

impl LocalSearchState {
    pub fn value(&self) -> u64 {
        div_sum(&self.current).expect("members share one alphabet and length")
    }
}

/// Fail unless L(G) has at least `k` distinct strings.
fn require_distinct(g: &SigmaDag, k: usize) -> Result<()> {
    let en = g.enumerate(k);
    if en.strings.len() < k {
        return Err(Error::Infeasible {
            needed: k,
            available: en.strings.len(),
        });
    }
    Ok(())
}

/// K distinct strings from seeded random source-to-sink walks, topped up
/// from the lexicographic enumeration when the walks keep colliding.
pub fn initial_selection(g: &SigmaDag, k: usize, seed: u64) -> Result<Vec<RString>> {
    require_distinct(g, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<RString> = Vec::with_capacity(k);
    let attempts = 20 * k + 100;
    for _ in 0..attempts {
        if picked.len() == k {
            break;
        }
        let mut v = g.source();
        let mut row = Vec::with_capacity(g.r());
        while v != g.sink() {
            let outs = g.out_edges(v);
            let e = outs[rng.gen_range(0..outs.len())];
            row.push(e.label);
            v = e.to;
        }
        let s = g.rstring(row);
        if !picked.contains(&s) {
            picked.push(s);
        }
    }
    if picked.len() < k {
        for s in g.enumerate(2 * k).strings {
            if picked.len() == k {
                break;
            }
            if !picked.contains(&s) {
                picked.push(s);
            }
        }
    }
    Ok(picked)
}

/// Swap local search for Max-Sum: each round tries to replace every
/// member by the farthest string outside the current selection, keeping a
/// swap only when it strictly increases the total.
pub fn local_search_maxsum(g: &SigmaDag, k: usize, seed: u64) -> Result<LocalSearchState> {
    if k == 0 {
        return Err(Error::InvalidInput("K must be positive".into()));
    }
    let current = initial_selection(g, k, seed)?;
    let mut state = LocalSearchState {
        current,
        iteration: 0,
        budget: iteration_budget(k),
        swaps: 0,
    };
    let cap = (g.r() * k.saturating_sub(1)) as u64;
    while state.iteration < state.budget {
        state.iteration += 1;
        let mut swapped = false;
        for i in 0..k {
            let others: Vec<RString> = state
                .current
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, x)| x.clone())
                .collect();
            let Some((y, score)) = farthest_string_excluding(g, &others, cap, &state.current)?
            else {
                // |L(G)| = K: nothing to swap in
                return Ok(state);
            };
            let incumbent: u64 = others
                .iter()
                .map(|x| hamming_symbols(x.symbols(), state.current[i].symbols()) as u64)
                .sum();
            if score > incumbent {
                let before = state.value();
                state.current[i] = y;
                state.swaps += 1;
                swapped = true;
                debug_assert!(state.value() > before);
            }
        }
        if !swapped {
            // local optimum; further rounds would repeat this one
            break;
        }
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PtasBranch {
    Exact,
    LocalSearch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtasOutcome {
    pub strings: Vec<RString>,
    pub value: u64,
    pub branch: PtasBranch,
}

/// (1−ε)-approximate Max-Sum selection of K distinct strings. Solves
/// exactly when K < 2/ε, otherwise runs the local search, whose
/// (1−2/K) guarantee is then at least 1−ε.
pub fn ptas_maxsum(g: &SigmaDag, k: usize, eps: Rational, seed: u64) -> Result<PtasOutcome> {
    if k == 0 {
        return Err(Error::InvalidInput("K must be positive".into()));
    }
    if eps <= Rational::from(0) || eps >= Rational::from(1) {
        return Err(Error::InvalidInput(format!(
            "ε must lie in (0, 1), got {eps}"
        )));
    }
    require_distinct(g, k)?;
    if Rational::from(k as i64) * eps < Rational::from(2) {
        let opts = SolveOptions {
            semantics: Semantics::Set,
            max_states: None,
        };
        let best = optimize(g, k, Mode::MaxSum, opts)?.ok_or(Error::Infeasible {
            needed: k,
            available: g.enumerate(k).strings.len(),
        })?;
        let value = match best.value {
            Diversity::Finite(v) => v,
            Diversity::Infinite => unreachable!("max-sum values are finite"),
        };
        let strings = best.result.witness.expect("YES carries a witness");
        return Ok(PtasOutcome {
            strings,
            value,
            branch: PtasBranch::Exact,
        });
    }
    let state = local_search_maxsum(g, k, seed)?;
    Ok(PtasOutcome {
        value: state.value(),
        strings: state.current,
        branch: PtasBranch::LocalSearch,
    })
}

/// Parse a decimal such as `0.25` or a fraction such as `1/4`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::InvalidInput(format!("not a rational number: {text:?}"));
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let neg = int.starts_with('-');
    let int_val: i64 = if int.is_empty() || int == "-" {
        0
    } else {
        int.parse().map_err(|_| bad())?
    };
    let scale = 10i64.pow(frac.len() as u32);
    let frac_val: i64 = if frac.is_empty() {
        0
    } else {
        frac.parse().map_err(|_| bad())?
    };
    let frac_val = if neg { -frac_val } else { frac_val };
    Ok(Rational::new(int_val * scale + frac_val, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_diverse, brute_farthest, brute_farthest_excluding, OracleBudget};
    use crate::strings::StringSet;
    use proptest::prelude::*;

    const TABLE1: [&str; 6] = ["ABADD", "ABAEE", "ABBDD", "ABBEE", "ABCDD", "ABCEE"];

    fn table1() -> StringSet {
        StringSet::from_strs("ABCDE", &TABLE1).unwrap()
    }

    fn fig1() -> SigmaDag {
        SigmaDag::from_strings(&table1()).unwrap()
    }

    fn p(g: &SigmaDag, t: &str) -> RString {
        RString::parse(g.alphabet(), t).unwrap()
    }

    #[test]
    fn farthest_fixtures() {
        let g = fig1();
        let (y, v) = farthest_string(&g, &[p(&g, "ABADD")], 5).unwrap();
        assert_eq!(v, 3);
        assert!(["ABBEE", "ABCEE"].contains(&y.to_string().as_str()));
        let (y, v) = farthest_string(&g, &[p(&g, "ABADD"), p(&g, "ABBEE")], 10).unwrap();
        assert_eq!(v, 4);
        assert!(["ABCDD", "ABCEE"].contains(&y.to_string().as_str()));
        assert_eq!(farthest_string(&g, &[], 3).unwrap().1, 0);
        assert_eq!(farthest_string(&g, &[p(&g, "ABADD")], 1).unwrap().1, 1);
    }

    #[test]
    fn exclusion_removes_candidates() {
        let g = fig1();
        let all: Vec<RString> = TABLE1.iter().map(|t| p(&g, t)).collect();
        assert!(farthest_string_excluding(&g, &[], 5, &all)
            .unwrap()
            .is_none());
        let (y, v) = farthest_string_excluding(&g, &[p(&g, "ABADD")], 5, &all[3..4])
            .unwrap()
            .unwrap();
        assert_eq!((y.to_string(), v), ("ABCEE".to_string(), 3));
    }

    #[test]
    fn rejects_foreign_references() {
        let g = fig1();
        let other = StringSet::from_strs("AB", &["AB"]).unwrap();
        assert!(farthest_string(&g, &other.members()[..1], 4).is_err());
    }

    #[test]
    fn budget_values() {
        assert_eq!(iteration_budget(1), 0);
        assert_eq!(iteration_budget(2), 0);
        // 3·2/4 · ln(5·4/4) = 1.5 · ln 5 ≈ 2.41
        assert_eq!(iteration_budget(3), 3);
        // 4·3/5 · ln(6·9/4) = 2.4 · ln 13.5 ≈ 6.25
        assert_eq!(iteration_budget(4), 7);
    }

    #[test]
    fn local_search_fixtures() {
        let g = fig1();
        for seed in 0..5 {
            let six = local_search_maxsum(&g, 6, seed).unwrap();
            assert_eq!(six.value(), 30);
            let one = local_search_maxsum(&g, 1, seed).unwrap();
            assert_eq!(one.current.len(), 1);
            assert_eq!(one.value(), 0);
            let three = local_search_maxsum(&g, 3, seed).unwrap();
            assert!(three.value() >= 3);
            assert_eq!(
                StringSet::new(Arc::clone(g.alphabet()), three.current.clone())
                    .unwrap()
                    .len(),
                3
            );
        }
        assert!(matches!(
            local_search_maxsum(&g, 7, 0),
            Err(Error::Infeasible {
                needed: 7,
                available: 6
            })
        ));
    }

    #[test]
    fn ptas_fixtures() {
        let g = fig1();
        let exact = ptas_maxsum(&g, 3, Rational::new(1, 10), 0).unwrap();
        assert_eq!((exact.branch, exact.value), (PtasBranch::Exact, 7));
        let approx = ptas_maxsum(&g, 3, Rational::new(7, 10), 0).unwrap();
        assert_eq!(approx.branch, PtasBranch::LocalSearch);
        assert!(approx.value >= 3);
        let single = ptas_maxsum(&g, 1, Rational::new(1, 2), 0).unwrap();
        assert_eq!((single.branch, single.value), (PtasBranch::Exact, 0));
        assert!(ptas_maxsum(&g, 2, Rational::from(1), 0).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("0.1").unwrap(), Rational::new(1, 10));
        assert_eq!(parse_rational("1/3").unwrap(), Rational::new(1, 3));
        assert_eq!(parse_rational(".5").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), Rational::new(-1, 4));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    use std::sync::Arc;

    fn instance() -> impl Strategy<Value = (StringSet, usize)> {
        (2u32..=4, 1usize..=6)
            .prop_flat_map(|(sigma, r)| {
                (
                    Just(sigma),
                    prop::collection::btree_set(prop::collection::vec(0..sigma, r), 1..=12),
                    0usize..=3,
                )
            })
            .prop_map(|(sigma, rows, nrefs)| {
                let strs: Vec<String> = rows
                    .iter()
                    .map(|row| row.iter().map(|&c| (b'a' + c as u8) as char).collect())
                    .collect();
                let refs: Vec<&str> = strs.iter().map(String::as_str).collect();
                (
                    StringSet::from_strs(&"abcd"[..sigma as usize], &refs).unwrap(),
                    nrefs,
                )
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn farthest_matches_oracle((l, nrefs) in instance(), pick in any::<u64>()) {
            let g = SigmaDag::from_strings(&l).unwrap();
            let members = l.sorted();
            let refs: Vec<RString> =
                (0..nrefs).map(|i| members[(pick as usize).wrapping_add(i * 7) % members.len()].clone()).collect();
            let (y, v) = farthest_string(&g, &refs, (g.r() * refs.len()) as u64).unwrap();
            let (_, want) = brute_farthest(&l, &refs, &OracleBudget::default()).unwrap();
            prop_assert_eq!(v, want);
            prop_assert!(l.contains(&y));
            let excl = &members[..members.len().min(2)];
            let got = farthest_string_excluding(&g, &refs, (g.r() * refs.len()) as u64, excl).unwrap();
            let want = brute_farthest_excluding(&l, &refs, excl, &OracleBudget::default()).unwrap();
            prop_assert_eq!(got.map(|x| x.1), want.map(|x| x.1));
        }

        #[test]
        fn ptas_meets_guarantee((l, _) in instance(), k in 1usize..=4, seed in 0u64..4) {
            prop_assume!(l.len() >= k);
            let g = SigmaDag::from_strings(&l).unwrap();
            let opt = brute_diverse(&l, k, 0, Mode::MaxSum, Semantics::Set, &OracleBudget::default())
                .unwrap().optimum.unwrap().finite().unwrap();
            for eps in [Rational::new(1, 10), Rational::new(3, 10), Rational::new(1, 2), Rational::new(9, 10)] {
                let out = ptas_maxsum(&g, k, eps, seed).unwrap();
                let floor = ((Rational::from(1) - eps) * Rational::from(opt as i64)).ceil().to_integer() as u64;
                prop_assert!(out.value >= floor, "value {} < {} (opt {}, eps {})", out.value, floor, opt, eps);
                prop_assert_eq!(out.strings.len(), k);
                prop_assert_eq!(StringSet::new(Arc::clone(l.alphabet()), out.strings.clone()).unwrap().len(), k);
                prop_assert_eq!(div_sum(&out.strings).unwrap(), out.value);
            }
        }
    }
}
