//! Σ-DAG for the set of all longest common subsequences of `m` strings.
//!
//! The m-dimensional prefix grid carries a match edge wherever all strings
//! agree on the next symbol and an ε edge along each axis. Forward and
//! backward LCS tables keep exactly the edges that lie on some longest
//! path, so every remaining source-to-sink path spells an LCS. ε-removal
//! then yields an ordinary Σ-DAG.

use std::collections::HashMap;
use std::sync::Arc;

use crate::dag::{Edge, RawDag, SigmaDag, VertexId};
use crate::error::{Error, Result};
use crate::strings::{Alphabet, RString, Symbol};

/// Edge of a [`GridDag`]; `label == None` marks an ε edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridEdge {
    pub from: VertexId,
    pub label: Option<Symbol>,
    pub to: VertexId,
}

/// Grid graph over prefix-length tuples, possibly with ε edges.
#[derive(Debug, Clone)]
pub struct GridDag {
    pub alphabet: Arc<Alphabet>,
    pub coords: Vec<Vec<usize>>,
    pub edges: Vec<GridEdge>,
    pub source: VertexId,
    pub sink: VertexId,
}

struct Grid<'a> {
    strings: Vec<&'a [Symbol]>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl<'a> Grid<'a> {
    fn new(strings: &'a [RString]) -> Result<Self> {
        let first = strings
            .first()
            .ok_or_else(|| Error::InvalidInput("need at least one string".into()))?;
        if strings.iter().any(|s| !s.same_alphabet(first)) {
            return Err(Error::AlphabetMismatch);
        }
        let dims: Vec<usize> = strings.iter().map(|s| s.len() + 1).collect();
        let mut strides = vec![1usize; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Budget("LCS grid does not fit in memory".into()))?;
        Ok(Grid {
            strings: strings.iter().map(|s| s.symbols()).collect(),
            dims,
            strides,
            total,
        })
    }

    fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut c = vec![0; self.dims.len()];
        for k in 0..self.dims.len() {
            c[k] = idx / self.strides[k];
            idx %= self.strides[k];
        }
        c
    }

    /// Symbol shared by all strings at the given 0-based positions.
    fn common(&self, pos: &[usize]) -> Option<Symbol> {
        let c = self.strings[0][pos[0]];
        self.strings
            .iter()
            .zip(pos)
            .all(|(s, &p)| s[p] == c)
            .then_some(c)
    }

    /// `forward[i]` = lcs of the prefixes ending before coordinate tuple `i`.
    fn forward(&self) -> Vec<u32> {
        let diag: usize = self.strides.iter().sum();
        let mut f = vec![0u32; self.total];
        for idx in 0..self.total {
            let c = self.coords(idx);
            if c.iter().any(|&x| x == 0) {
                continue;
            }
            let prev: Vec<usize> = c.iter().map(|&x| x - 1).collect();
            f[idx] = if self.common(&prev).is_some() {
                f[idx - diag] + 1
            } else {
                self.strides.iter().map(|&s| f[idx - s]).max().unwrap_or(0)
            };
        }
        f
    }

    /// `backward[i]` = lcs of the suffixes starting at coordinate tuple `i`.
    fn backward(&self) -> Vec<u32> {
        let diag: usize = self.strides.iter().sum();
        let mut b = vec![0u32; self.total];
        for idx in (0..self.total).rev() {
            let c = self.coords(idx);
            if c.iter().zip(&self.dims).any(|(&x, &d)| x + 1 == d) {
                continue;
            }
            b[idx] = if self.common(&c).is_some() {
                b[idx + diag] + 1
            } else {
                self.strides.iter().map(|&s| b[idx + s]).max().unwrap_or(0)
            };
        }
        b
    }
}

/// Length of a longest common subsequence of all `strings`.
pub fn lcs_length(strings: &[RString]) -> Result<usize> {
    let grid = Grid::new(strings)?;
    Ok(*grid.forward().last().unwrap() as usize)
}

/// The grid restricted to vertices and edges on longest paths, together
/// with the LCS length. Vertices are allocated only when optimal.
pub fn optimal_grid(strings: &[RString]) -> Result<(GridDag, usize)> {
    let grid = Grid::new(strings)?;
    let f = grid.forward();
    let b = grid.backward();
    let lcs = f[grid.total - 1];
    let optimal = |idx: usize| f[idx] + b[idx] == lcs;
    let diag: usize = grid.strides.iter().sum();

    let mut ids: HashMap<usize, VertexId> = HashMap::new();
    let mut coords = Vec::new();
    let mut id_of = |idx: usize, coords: &mut Vec<Vec<usize>>| -> VertexId {
        *ids.entry(idx).or_insert_with(|| {
            coords.push(grid.coords(idx));
            (coords.len() - 1) as VertexId
        })
    };

    let mut edges = Vec::new();
    for idx in 0..grid.total {
        if !optimal(idx) {
            continue;
        }
        let u = id_of(idx, &mut coords);
        let c = grid.coords(idx);
        for k in 0..c.len() {
            if c[k] + 1 < grid.dims[k] {
                let w = idx + grid.strides[k];
                if optimal(w) && f[w] == f[idx] {
                    let v = id_of(w, &mut coords);
                    edges.push(GridEdge {
                        from: u,
                        label: None,
                        to: v,
                    });
                }
            }
        }
        if c.iter().zip(&grid.dims).all(|(&x, &d)| x + 1 < d) {
            if let Some(sym) = grid.common(&c) {
                let w = idx + diag;
                if f[idx] + 1 + b[w] == lcs {
                    let v = id_of(w, &mut coords);
                    edges.push(GridEdge {
                        from: u,
                        label: Some(sym),
                        to: v,
                    });
                }
            }
        }
    }
    let source = id_of(0, &mut coords);
    let sink = id_of(grid.total - 1, &mut coords);
    let alphabet = Arc::clone(strings[0].alphabet());
    Ok((
        GridDag {
            alphabet,
            coords,
            edges,
            source,
            sink,
        },
        lcs as usize,
    ))
}

/// Σ-DAG whose language is exactly the set of longest common subsequences.
pub fn build_lcs_dag(strings: &[RString]) -> Result<SigmaDag> {
    let (grid, lcs) = optimal_grid(strings)?;
    if lcs == 0 {
        return Err(Error::NoLcs);
    }
    epsilon_removal(&grid)
}

/// Remove ε edges by forward closure, drop useless vertices, merge all
/// accepting vertices into one sink and collapse equivalent vertices.
pub fn epsilon_removal(grid: &GridDag) -> Result<SigmaDag> {
    let n = grid.coords.len();
    let mut eps: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut labeled: Vec<Vec<(Symbol, VertexId)>> = vec![Vec::new(); n];
    for e in &grid.edges {
        match e.label {
            None => eps[e.from as usize].push(e.to),
            Some(c) => labeled[e.from as usize].push((c, e.to)),
        }
    }

    // anchors: the source and every target of a labeled edge
    let mut anchor_id: HashMap<VertexId, usize> = HashMap::new();
    let mut anchors: Vec<VertexId> = Vec::new();
    let mut out: Vec<Vec<(Symbol, usize)>> = Vec::new();
    let mut accepting: Vec<bool> = Vec::new();
    let mut queue = vec![grid.source];
    anchor_id.insert(grid.source, 0);
    anchors.push(grid.source);
    let mut head = 0;
    while head < queue.len() {
        let a = queue[head];
        head += 1;
        let mut seen = vec![false; n];
        let mut stack = vec![a];
        seen[a as usize] = true;
        let mut arcs = Vec::new();
        let mut accepts = false;
        while let Some(v) = stack.pop() {
            accepts |= v == grid.sink;
            for &(c, x) in &labeled[v as usize] {
                let id = *anchor_id.entry(x).or_insert_with(|| {
                    anchors.push(x);
                    queue.push(x);
                    anchors.len() - 1
                });
                arcs.push((c, id));
            }
            for &w in &eps[v as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        arcs.sort_unstable();
        arcs.dedup();
        out.push(arcs);
        accepting.push(accepts);
    }

    let m = anchors.len();
    if accepting[0] && out[0].is_empty() {
        return Err(Error::NoLcs);
    }
    // keep anchors that can still reach an accepting anchor
    let mut alive = accepting.clone();
    loop {
        let mut changed = false;
        for a in 0..m {
            if !alive[a] && out[a].iter().any(|&(_, b)| alive[b]) {
                alive[a] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if !alive[0] {
        return Err(Error::InvalidInput("grid spells no string".into()));
    }
    if (0..m).any(|a| accepting[a] && out[a].iter().any(|&(_, b)| alive[b])) {
        return Err(Error::InvalidInput(
            "grid language is not equi-length".into(),
        ));
    }

    let name = |v: VertexId| {
        let c = &grid.coords[v as usize];
        format!(
            "v{}",
            c.iter().map(usize::to_string).collect::<Vec<_>>().join("_")
        )
    };
    let mut raw = RawDag::new(Arc::clone(&grid.alphabet));
    let mut new_id = vec![VertexId::MAX; m];
    for a in 0..m {
        if alive[a] && !accepting[a] {
            new_id[a] = raw.add_vertex(name(anchors[a]));
        }
    }
    let sink = raw.add_vertex(name(grid.sink));
    for a in 0..m {
        if accepting[a] {
            new_id[a] = sink;
        }
    }
    for a in 0..m {
        if !alive[a] || accepting[a] {
            continue;
        }
        for &(c, b) in &out[a] {
            if alive[b] {
                raw.edges.push(Edge {
                    from: new_id[a],
                    label: c,
                    to: new_id[b],
                });
            }
        }
    }
    raw.source = Some(new_id[0]);
    raw.sink = Some(sink);
    let dag = SigmaDag::from_raw(raw)?;
    Ok(dag.merge_equivalent())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{self, OracleBudget};
    use crate::strings::StringSet;
    use proptest::prelude::*;

    fn parse(alpha: &str, xs: &[&str]) -> Vec<RString> {
        let a = Arc::new(Alphabet::from_chars(alpha).unwrap());
        xs.iter().map(|x| RString::parse(&a, x).unwrap()).collect()
    }

    fn language(g: &SigmaDag) -> Vec<String> {
        g.enumerate(10_000)
            .strings
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn lcs_length_examples() {
        assert_eq!(
            lcs_length(&parse("ABCDE", &["ABABCDDEE", "ABCBAEEDD"])).unwrap(),
            5
        );
        assert_eq!(lcs_length(&parse("ABC", &["ABCAB", "ABCAB"])).unwrap(), 5);
        assert_eq!(
            lcs_length(&parse("ABC", &["ABC", "ACB", "CAB"])).unwrap(),
            2
        );
        assert!(lcs_length(&[]).is_err());
    }

    #[test]
    fn table1_language() {
        let g = build_lcs_dag(&parse("ABCDE", &["ABABCDDEE", "ABCBAEEDD"])).unwrap();
        assert_eq!(g.r(), 5);
        assert_eq!(
            language(&g),
            ["ABADD", "ABAEE", "ABBDD", "ABBEE", "ABCDD", "ABCEE"]
        );
    }

    #[test]
    fn identical_and_small_inputs() {
        let g = build_lcs_dag(&parse("AB", &["AB", "AB", "AB"])).unwrap();
        assert_eq!(language(&g), ["AB"]);
        let g = build_lcs_dag(&parse("ABC", &["ABC", "ACB"])).unwrap();
        assert_eq!(language(&g), ["AB", "AC"]);
        assert_eq!(
            build_lcs_dag(&parse("AB", &["AA", "BB"])).unwrap_err(),
            Error::NoLcs
        );
    }

    fn manual_grid(edges: &[(u32, Option<u32>, u32)], n: usize) -> GridDag {
        GridDag {
            alphabet: Arc::new(Alphabet::from_chars("A").unwrap()),
            coords: (0..n).map(|i| vec![i]).collect(),
            edges: edges
                .iter()
                .map(|&(from, label, to)| GridEdge { from, label, to })
                .collect(),
            source: 0,
            sink: (n - 1) as VertexId,
        }
    }

    #[test]
    fn epsilon_path_collapses_to_one_edge() {
        let g = epsilon_removal(&manual_grid(
            &[(0, None, 1), (1, Some(0), 2), (2, None, 3)],
            4,
        ))
        .unwrap();
        assert_eq!(g.size(), 1);
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(language(&g), ["A"]);
    }

    #[test]
    fn parallel_epsilon_branches_share_label() {
        // 0 -ε-> 1 -ε-> 3, 0 -ε-> 2 -ε-> 3, 3 -A-> 4
        let grid = manual_grid(
            &[
                (0, None, 1),
                (0, None, 2),
                (1, None, 3),
                (2, None, 3),
                (3, Some(0), 4),
            ],
            5,
        );
        let g = epsilon_removal(&grid).unwrap();
        assert_eq!(language(&g), ["A"]);
        assert_eq!(g.size(), 1);
    }

    #[test]
    fn epsilon_only_grid_has_no_lcs() {
        assert_eq!(
            epsilon_removal(&manual_grid(&[(0, None, 1)], 2)).unwrap_err(),
            Error::NoLcs
        );
    }

    #[test]
    fn figure_intermediate_preserves_language() {
        let s = parse("ABCDE", &["ABABCDDEE", "ABCBAEEDD"]);
        let (grid, lcs) = optimal_grid(&s).unwrap();
        assert_eq!(lcs, 5);
        assert!(grid.edges.iter().any(|e| e.label.is_none()));
        let g = epsilon_removal(&grid).unwrap();
        assert_eq!(language(&g).len(), 6);
    }

    fn instance() -> impl Strategy<Value = (u32, Vec<Vec<u32>>)> {
        (1u32..=3, 1usize..=3).prop_flat_map(|(sigma, m)| {
            let s = proptest::collection::vec(proptest::collection::vec(0..sigma, 1..=8), m);
            (Just(sigma), s)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]
        #[test]
        fn matches_brute_force_lcs_set((_sigma, raw) in instance()) {
            let a = Arc::new(Alphabet::from_chars("abc").unwrap());
            let s: Vec<RString> = raw.into_iter().map(|v| RString::new(Arc::clone(&a), v).unwrap()).collect();
            let lcs = lcs_length(&s).unwrap();
            let expected = oracle::brute_lcs_set_many(&s, &OracleBudget::default()).unwrap();
            match build_lcs_dag(&s) {
                Err(Error::NoLcs) => prop_assert_eq!(lcs, 0),
                Err(e) => prop_assert!(false, "unexpected error {e}"),
                Ok(g) => {
                    prop_assert_eq!(g.r(), lcs);
                    let got = g.language(1_000_000).unwrap();
                    prop_assert_eq!(got.sorted(), expected.sorted());
                    for x in got.members() {
                        for y in &s {
                            prop_assert!(oracle::is_subsequence(x.symbols(), y.symbols()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn brute_force_set_type_is_a_string_set() {
        let s = parse("ABC", &["ABC", "ACB"]);
        let set: StringSet = oracle::brute_lcs_set_many(&s, &OracleBudget::default()).unwrap();
        assert_eq!(set.len(), 2);
    }
}
