//! Color coding for the parameters (K, r).
//!
//! Each repetition colors the alphabet with k = rK colors, builds the trie
//! of colored strings (vertex correspondence φ back into G), runs the exact
//! DP on that trie and pulls a colored witness back to real strings.
//! Distinct colors imply distinct symbols, so colored distances never
//! exceed true ones and every pulled-back witness re-verifies.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dag::{Edge, RawDag, SigmaDag, VertexId};
use crate::error::{Error, Result};
use crate::exact::{solve, SolveOptions, SolveResult, SolveStats};
use crate::problem::{max_threshold, Mode};
use crate::strings::{div_min, div_sum, Alphabet, Diversity, RString, Symbol};

/// A map from alphabet symbols to colors `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<u32>,
    k: usize,
    seed: u64,
}

impl Coloring {
    pub fn new(colors: Vec<u32>, k: usize) -> Result<Self> {
        if k == 0 || colors.iter().any(|&c| c as usize >= k) {
            return Err(Error::InvalidInput(format!("colors must lie in 0..{k}")));
        }
        Ok(Coloring { colors, k, seed: 0 })
    }

    pub fn color(&self, sym: Symbol) -> u32 {
        self.colors[sym as usize]
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_injective(&self) -> bool {
        let distinct: BTreeSet<u32> = self.colors.iter().copied().collect();
        distinct.len() == self.colors.len()
    }

    /// Alphabet of the colors, rendered `1..=k`.
    pub fn color_alphabet(&self) -> Alphabet {
        Alphabet::new((1..=self.k).map(|c| c.to_string())).expect("distinct color tokens")
    }
}

/// Uniform random coloring of `alphabet` with `k` colors; a pure function
/// of the arguments.
pub fn random_coloring(alphabet: &Alphabet, k: usize, seed: u64) -> Result<Coloring> {
    coloring_for_repetition(alphabet, k, seed, 0)
}

/// The coloring used by repetition `rep` of [`fpt_solve`]: ChaCha8 seeded
/// with `seed`, one stream per repetition.
pub fn coloring_for_repetition(
    alphabet: &Alphabet,
    k: usize,
    seed: u64,
    rep: u64,
) -> Result<Coloring> {
    if k == 0 {
        return Err(Error::InvalidInput("need at least one color".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    let colors = (0..alphabet.size())
        .map(|_| rng.gen_range(0..k as u32))
        .collect();
    Ok(Coloring { colors, k, seed })
}

/// The trie of colored strings of G with its leaves merged into one sink,
/// plus φ: trie vertex → G-vertices reached by the same color prefix.
#[derive(Debug, Clone)]
pub struct ColoredTrie {
    pub dag: SigmaDag,
    pub phi: Vec<Vec<VertexId>>,
}

/// Trie nodes, edges and φ before validation. The sink is the last node.
/// With `shared_visited` a G-vertex is expanded only once across the whole
/// layer, as in the textbook formulation; kept for the regression test
/// showing it loses strings.
fn colored_trie_parts(
    g: &SigmaDag,
    c: &Coloring,
    shared_visited: bool,
) -> (Vec<BTreeSet<VertexId>>, Vec<Edge>) {
    const SINK: usize = usize::MAX;
    let r = g.r();
    let mut phi: Vec<BTreeSet<VertexId>> = vec![BTreeSet::from([g.source()])];
    let mut edges: Vec<(usize, u32, usize)> = Vec::new();
    let mut frontier = vec![0usize];
    let mut sink_phi = BTreeSet::new();
    for d in 0..r {
        let mut next = Vec::new();
        let mut visited = BTreeSet::new();
        for &u in &frontier {
            let mut goto: BTreeMap<u32, usize> = BTreeMap::new();
            let members: Vec<VertexId> = phi[u].iter().copied().collect();
            for v in members {
                if shared_visited && !visited.insert(v) {
                    continue;
                }
                for e in g.out_edges(v) {
                    let col = c.color(e.label);
                    let child = *goto.entry(col).or_insert_with(|| {
                        if d + 1 == r {
                            SINK
                        } else {
                            phi.push(BTreeSet::new());
                            next.push(phi.len() - 1);
                            phi.len() - 1
                        }
                    });
                    if child == SINK {
                        sink_phi.insert(e.to);
                    } else {
                        phi[child].insert(e.to);
                    }
                }
            }
            edges.extend(goto.into_iter().map(|(col, child)| (u, col, child)));
        }
        frontier = next;
    }
    let sink = phi.len();
    phi.push(sink_phi);
    let edges = edges
        .into_iter()
        .map(|(u, col, child)| Edge {
            from: u as VertexId,
            label: col,
            to: if child == SINK { sink } else { child } as VertexId,
        })
        .collect();
    (phi, edges)
}

/// Build the colored trie H of G under `c`; L(H) = c(L(G)).
pub fn build_colored_trie(g: &SigmaDag, c: &Coloring) -> Result<ColoredTrie> {
    if let Some(bad) = (0..g.alphabet().size() as Symbol).find(|&s| s as usize >= c.colors.len()) {
        return Err(Error::InvalidInput(format!(
            "coloring does not cover symbol {bad}"
        )));
    }
    let (phi, edges) = colored_trie_parts(g, c, false);
    let mut raw = RawDag::new(Arc::new(c.color_alphabet()));
    raw.names = (0..phi.len()).map(|i| format!("h{i}")).collect();
    raw.edges = edges;
    raw.source = Some(0);
    raw.sink = Some((phi.len() - 1) as VertexId);
    raw.declared_r = Some(g.r());
    let dag = SigmaDag::from_raw(raw)?;
    Ok(ColoredTrie {
        dag,
        phi: phi.into_iter().map(|s| s.into_iter().collect()).collect(),
    })
}

/// Lexicographically least string of L(G) whose coloring is `colored`,
/// found along the trie path of `colored` (restricted to φ).
pub fn pull_back(
    g: &SigmaDag,
    trie: &ColoredTrie,
    c: &Coloring,
    colored: &[Symbol],
) -> Option<RString> {
    let r = g.r();
    if colored.len() != r {
        return None;
    }
    let mut path = vec![trie.dag.source()];
    for &col in colored {
        let at = *path.last().unwrap();
        let next = trie.dag.out_edges(at).iter().find(|e| e.label == col)?.to;
        path.push(next);
    }
    let n = g.vertex_count();
    // feasible[d][v]: v ∈ φ(path[d]) and the colored suffix from d is spelled by some v–t path
    let mut feasible = vec![vec![false; n]; r + 1];
    feasible[r][g.sink() as usize] = true;
    for d in (0..r).rev() {
        for &v in &trie.phi[path[d] as usize] {
            feasible[d][v as usize] = g
                .out_edges(v)
                .iter()
                .any(|e| c.color(e.label) == colored[d] && feasible[d + 1][e.to as usize]);
        }
    }
    if !feasible[0][g.source() as usize] {
        return None;
    }
    let mut current = vec![g.source()];
    let mut row = Vec::with_capacity(r);
    for d in 0..r {
        let ok = |e: &&Edge| c.color(e.label) == colored[d] && feasible[d + 1][e.to as usize];
        let label = current
            .iter()
            .flat_map(|&v| g.out_edges(v).iter().filter(ok))
            .map(|e| e.label)
            .min()?;
        let next: BTreeSet<VertexId> = current
            .iter()
            .flat_map(|&v| g.out_edges(v).iter().filter(ok))
            .filter(|e| e.label == label)
            .map(|e| e.to)
            .collect();
        row.push(label);
        current = next.into_iter().collect();
    }
    Some(g.rstring(row))
}

/// Success probability of one repetition: k!/k^k for k = rK colors.
pub fn colorful_probability(r: usize, k: usize) -> f64 {
    let colors = (r * k) as f64;
    let ln_fact: f64 = (1..=r * k).map(|i| (i as f64).ln()).sum();
    (ln_fact - colors * colors.ln()).exp()
}

/// ⌈ln(100)/p⌉ repetitions (one-sided error ≤ 1%), capped at `cap`.
pub fn default_repetitions(r: usize, k: usize, cap: u64) -> u64 {
    let p = colorful_probability(r, k);
    let reps = (100f64.ln() / p).ceil();
    if !reps.is_finite() || reps > cap as f64 {
        cap
    } else {
        (reps as u64).max(1)
    }
}

pub const DEFAULT_REPETITION_CAP: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FptOptions {
    /// `None` picks [`default_repetitions`] with [`DEFAULT_REPETITION_CAP`].
    pub repetitions: Option<u64>,
    pub threads: usize,
    pub max_states: Option<usize>,
}

impl Default for FptOptions {
    fn default() -> Self {
        FptOptions {
            repetitions: None,
            threads: 1,
            max_states: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FptStats {
    pub colors: usize,
    pub repetitions_budget: u64,
    pub repetitions_run: u64,
    pub verification_failures: u64,
    pub max_trie_size: usize,
    pub states: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FptResult {
    pub result: SolveResult,
    pub stats: FptStats,
}

struct Repetition {
    witness: Option<Vec<RString>>,
    achieved: Option<Diversity>,
    failed_verification: bool,
    trie_size: usize,
    dp: SolveStats,
}

fn run_repetition(
    g: &SigmaDag,
    k: usize,
    delta: u64,
    mode: Mode,
    seed: u64,
    rep: u64,
    colors: usize,
    max_states: Option<usize>,
) -> Result<Repetition> {
    let c = coloring_for_repetition(g.alphabet(), colors, seed, rep)?;
    let trie = build_colored_trie(g, &c)?;
    let opts = SolveOptions {
        max_states,
        ..SolveOptions::default()
    };
    let res = solve(&trie.dag, k, delta, mode, opts)?;
    let mut out = Repetition {
        witness: None,
        achieved: None,
        failed_verification: false,
        trie_size: trie.dag.size(),
        dp: res.stats,
    };
    let Some(colored) = res.witness else {
        return Ok(out);
    };
    let pulled: Option<Vec<RString>> = colored
        .iter()
        .map(|x| pull_back(g, &trie, &c, x.symbols()))
        .collect();
    let Some(pulled) = pulled else {
        out.failed_verification = true;
        return Ok(out);
    };
    let achieved = match mode {
        Mode::MaxMin => div_min(&pulled)?,
        Mode::MaxSum => Diversity::Finite(div_sum(&pulled)?),
    };
    if achieved.meets(delta) {
        out.witness = Some(pulled);
        out.achieved = Some(achieved);
    } else {
        out.failed_verification = true;
    }
    Ok(out)
}

/// Randomized one-sided decision: YES answers carry a re-verified witness,
/// NO may be a false negative with probability ≤ (1−p)^repetitions.
/// The outcome is a function of `seed` and the repetition count only;
/// `threads` changes speed, not results.
pub fn fpt_solve(
    g: &SigmaDag,
    k: usize,
    delta: u64,
    mode: Mode,
    seed: u64,
    opts: FptOptions,
) -> Result<FptResult> {
    if k == 0 {
        return Err(Error::InvalidInput("K must be positive".into()));
    }
    let r = g.r();
    let colors = r * k;
    let budget = opts
        .repetitions
        .unwrap_or_else(|| default_repetitions(r, k, DEFAULT_REPETITION_CAP));
    let mut stats = FptStats {
        colors,
        repetitions_budget: budget,
        ..FptStats::default()
    };
    let no = |stats| FptResult {
        result: SolveResult {
            decision: false,
            witness: None,
            achieved: None,
            stats: SolveStats::default(),
        },
        stats,
    };
    if delta > max_threshold(mode, r, k) && !(mode == Mode::MaxMin && k == 1) {
        return Ok(no(stats));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let chunk = (opts.threads.max(1) * 4) as u64;
    let mut start = 0u64;
    while start < budget {
        let end = (start + chunk).min(budget);
        let batch: Vec<Result<Repetition>> = if opts.threads > 1 {
            pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|rep| {
                        run_repetition(g, k, delta, mode, seed, rep, colors, opts.max_states)
                    })
                    .collect()
            })
        } else {
            (start..end)
                .map(|rep| run_repetition(g, k, delta, mode, seed, rep, colors, opts.max_states))
                .collect()
        };
        for rep in batch {
            let rep = rep?;
            stats.repetitions_run += 1;
            stats.max_trie_size = stats.max_trie_size.max(rep.trie_size);
            stats.states += rep.dp.states;
            if rep.failed_verification {
                stats.verification_failures += 1;
            }
            if let Some(witness) = rep.witness {
                let result = SolveResult {
                    decision: true,
                    witness: Some(witness),
                    achieved: rep.achieved,
                    stats: rep.dp,
                };
                return Ok(FptResult { result, stats });
            }
        }
        start = end;
    }
    Ok(no(stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::solve_maxmin;
    use crate::strings::StringSet;
    use proptest::prelude::*;

    const TABLE1: [&str; 6] = ["ABADD", "ABAEE", "ABBDD", "ABBEE", "ABCDD", "ABCEE"];

    fn fig1() -> SigmaDag {
        SigmaDag::from_strings(&StringSet::from_strs("ABCDE", &TABLE1).unwrap()).unwrap()
    }

    fn names(g: &SigmaDag) -> Vec<String> {
        g.enumerate(usize::MAX)
            .strings
            .iter()
            .map(|x| x.to_string())
            .collect()
    }

    #[test]
    fn colorings_are_reproducible() {
        let a = Alphabet::from_chars("ABCDE").unwrap();
        assert_eq!(
            random_coloring(&a, 3, 7).unwrap(),
            random_coloring(&a, 3, 7).unwrap()
        );
        assert!(random_coloring(&a, 1, 9)
            .unwrap()
            .colors()
            .iter()
            .all(|&c| c == 0));
        assert!(random_coloring(&a, 0, 0).is_err());
    }

    #[test]
    fn injective_rate_matches_k_factorial_over_k_to_the_k() {
        let a = Alphabet::from_chars("ABCDE").unwrap();
        let hits = (0..10_000u64)
            .filter(|&s| random_coloring(&a, 5, s).unwrap().is_injective())
            .count();
        let rate = hits as f64 / 10_000.0;
        assert!((rate - 120.0 / 3125.0).abs() < 0.05, "{rate}");
    }

    #[test]
    fn collapsing_coloring() {
        let g = fig1();
        let c = Coloring::new(vec![0, 0, 0, 1, 1], 2).unwrap();
        let h = build_colored_trie(&g, &c).unwrap();
        assert_eq!(names(&h.dag), ["11122"]);
        assert_eq!(h.dag.size(), 5);
        assert_eq!(h.phi[h.dag.source() as usize], vec![g.source()]);
        let x = pull_back(&g, &h, &c, &[0, 0, 0, 1, 1]).unwrap();
        assert_eq!(x.to_string(), "ABADD");
    }

    #[test]
    fn injective_coloring_keeps_the_language() {
        let g = fig1();
        let c = Coloring::new(vec![0, 1, 2, 3, 4], 5).unwrap();
        let h = build_colored_trie(&g, &c).unwrap();
        assert_eq!(h.dag.enumerate(usize::MAX).strings.len(), 6);
    }

    #[test]
    fn shared_visited_loses_strings() {
        // s -a-> v, s -b-> v, v -x-> t, v -y-> t: L = {ax, ay, bx, by}
        let text = "dag 2\nalphabet a b x y\nvertex s\nvertex v\nvertex t\n\
                    edge s a v\nedge s b v\nedge v x t\nedge v y t\nsource s\nsink t\n";
        let g = SigmaDag::parse(text).unwrap();
        let c = Coloring::new(vec![0, 1, 2, 3], 4).unwrap();
        let h = build_colored_trie(&g, &c).unwrap();
        assert_eq!(h.dag.enumerate(usize::MAX).strings.len(), 4);
        // the second trie node at depth 1 shares v with the first and is never expanded
        let (phi, edges) = colored_trie_parts(&g, &c, true);
        let expanded: BTreeSet<VertexId> = edges.iter().map(|e| e.from).collect();
        let stranded = (1..phi.len() - 1)
            .filter(|&u| !expanded.contains(&(u as VertexId)))
            .count();
        assert_eq!(stranded, 1);
    }

    #[test]
    fn trie_size_bound_and_its_counterexample() {
        let g = fig1();
        // one color: a single path of r edges exceeds k^r = 1
        let one = build_colored_trie(&g, &Coloring::new(vec![0; 5], 1).unwrap()).unwrap();
        assert_eq!(one.dag.size(), g.r());
        for seed in 0..50 {
            let colors = g.r() * 2;
            let c = random_coloring(g.alphabet(), colors, seed).unwrap();
            let h = build_colored_trie(&g, &c).unwrap();
            let geometric: usize = (1..=g.r()).map(|d| colors.pow(d as u32)).sum();
            assert!(h.dag.size() <= geometric);
            assert!(h.dag.size() <= colors.pow(g.r() as u32));
        }
    }

    #[test]
    fn fpt_fixtures() {
        let g = fig1();
        let yes = fpt_solve(&g, 2, 3, Mode::MaxMin, 0, FptOptions::default()).unwrap();
        assert!(yes.result.decision);
        assert!(div_min(yes.result.witness.as_ref().unwrap())
            .unwrap()
            .meets(3));
        assert_eq!(yes.stats.verification_failures, 0);
        let no = fpt_solve(
            &g,
            3,
            2,
            Mode::MaxMin,
            0,
            FptOptions {
                repetitions: Some(200),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!no.result.decision);
        assert_eq!(no.stats.repetitions_run, 200);
        for mode in [Mode::MaxMin, Mode::MaxSum] {
            assert!(
                fpt_solve(&g, 1, 0, mode, 0, FptOptions::default())
                    .unwrap()
                    .result
                    .decision
            );
        }
    }

    #[test]
    fn threads_do_not_change_results() {
        let g = fig1();
        for seed in 0..4 {
            let one = fpt_solve(&g, 3, 7, Mode::MaxSum, seed, FptOptions::default()).unwrap();
            let four = fpt_solve(
                &g,
                3,
                7,
                Mode::MaxSum,
                seed,
                FptOptions {
                    threads: 4,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(one, four);
        }
    }

    #[test]
    fn repetition_defaults() {
        assert!((colorful_probability(1, 1) - 1.0).abs() < 1e-12);
        assert!((colorful_probability(1, 5) - 120.0 / 3125.0).abs() < 1e-12);
        assert_eq!(default_repetitions(1, 1, 100), 5);
        assert_eq!(default_repetitions(10, 10, 1000), 1000);
    }

    fn instance() -> impl Strategy<Value = StringSet> {
        (2u32..=3, 1usize..=3)
            .prop_flat_map(|(sigma, r)| {
                (
                    Just(sigma),
                    prop::collection::btree_set(prop::collection::vec(0..sigma, r), 1..=6),
                )
            })
            .prop_map(|(sigma, rows)| {
                let strs: Vec<String> = rows
                    .iter()
                    .map(|row| row.iter().map(|&c| (b'a' + c as u8) as char).collect())
                    .collect();
                let refs: Vec<&str> = strs.iter().map(String::as_str).collect();
                StringSet::from_strs(&"abc"[..sigma as usize], &refs).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn colored_language_is_the_image((l, seed) in (instance(), any::<u64>()), k in 1usize..=4) {
            let g = SigmaDag::from_strings(&l).unwrap();
            let c = random_coloring(g.alphabet(), k, seed).unwrap();
            let h = build_colored_trie(&g, &c).unwrap();
            let got: BTreeSet<Vec<Symbol>> =
                h.dag.enumerate(usize::MAX).strings.iter().map(|x| x.symbols().to_vec()).collect();
            let want: BTreeSet<Vec<Symbol>> =
                l.members().iter().map(|x| x.symbols().iter().map(|&s| c.color(s)).collect()).collect();
            prop_assert_eq!(&got, &want);
            for colored in &want {
                let x = pull_back(&g, &h, &c, colored).unwrap();
                prop_assert!(l.contains(&x));
                let recolored: Vec<Symbol> = x.symbols().iter().map(|&s| c.color(s)).collect();
                prop_assert_eq!(&recolored, colored);
                let least = l.sorted().into_iter().find(|y| {
                    y.symbols().iter().map(|&s| c.color(s)).collect::<Vec<_>>() == *colored
                }).unwrap();
                prop_assert_eq!(x, least);
            }
        }

        #[test]
        fn never_a_false_yes(l in instance(), k in 2usize..=3, delta in 0u64..=3, seed in any::<u64>()) {
            let g = SigmaDag::from_strings(&l).unwrap();
            let exact = solve_maxmin(&g, k, delta).unwrap().decision;
            let fpt = fpt_solve(&g, k, delta, Mode::MaxMin, seed, FptOptions { repetitions: Some(20), ..Default::default() }).unwrap();
            prop_assert_eq!(fpt.stats.verification_failures, 0);
            prop_assert!(exact || !fpt.result.decision);
        }
    }
}
