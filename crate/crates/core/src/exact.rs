//! Layer-synchronous DP over K-tuples of source-rooted paths.
//!
//! A state at depth `d` is a tuple of vertices in `V_d` together with the
//! truncated pairwise distances of the K path labels read so far (a
//! [`WeightMatrix`] for max-min, a single running sum for max-sum). Only
//! reachable states that can still meet Δ are stored, one parent record
//! each.

use std::collections::HashMap;
use std::hash::Hash;

use num_traits::{PrimInt, Unsigned};
use serde::{Deserialize, Serialize};

use crate::dag::{SigmaDag, VertexId};
use crate::error::{Error, Result};
use crate::problem::{max_threshold, pairs, Mode, Semantics};
use crate::strings::{div_min, div_sum, Diversity, RString, Symbol};

/// Upper-triangular K×K matrix of distances truncated at Δ, stored row by
/// row without the diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightMatrix<C> {
    k: usize,
    entries: Box<[C]>,
}

impl<C: PrimInt + Unsigned> WeightMatrix<C> {
    pub fn zero(k: usize) -> Self {
        WeightMatrix {
            k,
            entries: vec![C::zero(); pairs(k)].into_boxed_slice(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.k);
        i * (2 * self.k - i - 1) / 2 + (j - i - 1)
    }

    /// Entry for the pair `i < j`.
    pub fn get(&self, i: usize, j: usize) -> C {
        self.entries[self.index(i, j)]
    }

    pub fn entries(&self) -> &[C] {
        &self.entries
    }

    /// Smallest entry, `None` for K < 2.
    pub fn min_entry(&self) -> Option<C> {
        self.entries.iter().copied().min()
    }
}

/// DP key: endpoint tuple, truncated distance cells and, under set
/// semantics, a bitmask of pairs already known to differ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Key<C> {
    verts: Box<[VertexId]>,
    cells: Box<[C]>,
    distinct: u64,
}

#[derive(Debug, Clone)]
struct Parent {
    prev: usize,
    labels: Box<[Symbol]>,
}

/// One layer of reached patterns.
#[derive(Debug, Clone)]
struct Layer<C> {
    keys: Vec<Key<C>>,
    parents: Vec<Parent>,
}

/// Reached states per depth with their parent records.
#[derive(Debug, Clone)]
pub struct PatternTable<C> {
    layers: Vec<Layer<C>>,
}

impl<C: PrimInt + Unsigned> PatternTable<C> {
    /// Number of stored states at depth `d`.
    pub fn layer_size(&self, d: usize) -> usize {
        self.layers[d].keys.len()
    }

    pub fn total_states(&self) -> usize {
        self.layers.iter().map(|l| l.keys.len()).sum()
    }

    /// Largest cell over all stored states.
    pub fn max_cell(&self) -> Option<C> {
        self.layers
            .iter()
            .flat_map(|l| l.keys.iter())
            .flat_map(|k| k.cells.iter().copied())
            .max()
    }

    /// Weight matrices stored at depth `d` (max-min tables only).
    pub fn matrices(&self, d: usize, k: usize) -> Vec<WeightMatrix<C>> {
        self.layers[d]
            .keys
            .iter()
            .map(|key| WeightMatrix {
                k,
                entries: key.cells.clone(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    /// States stored over all layers.
    pub states: usize,
    /// Largest single layer.
    pub peak_layer: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub decision: bool,
    pub witness: Option<Vec<RString>>,
    /// Untruncated diversity of the witness.
    pub achieved: Option<Diversity>,
    pub stats: SolveStats,
}

impl SolveResult {
    fn no(stats: SolveStats) -> Self {
        SolveResult {
            decision: false,
            witness: None,
            achieved: None,
            stats,
        }
    }
}

/// Knobs shared by every entry point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub semantics: Semantics,
    /// Fail with [`Error::Budget`] once more states than this are stored.
    pub max_states: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            semantics: Semantics::Tuple,
            max_states: None,
        }
    }
}

/// Decide Max-Min Diverse String Set over K-tuples of paths.
pub fn solve_maxmin(g: &SigmaDag, k: usize, delta: u64) -> Result<SolveResult> {
    solve(g, k, delta, Mode::MaxMin, SolveOptions::default())
}

/// Decide Max-Sum Diverse String Set over K-tuples of paths.
pub fn solve_maxsum(g: &SigmaDag, k: usize, delta: u64) -> Result<SolveResult> {
    solve(g, k, delta, Mode::MaxSum, SolveOptions::default())
}

/// Either mode, with the cell width picked from Δ.
pub fn solve(
    g: &SigmaDag,
    k: usize,
    delta: u64,
    mode: Mode,
    opts: SolveOptions,
) -> Result<SolveResult> {
    if k == 0 {
        return Err(Error::InvalidInput("K must be positive".into()));
    }
    if opts.semantics == Semantics::Set && pairs(k) > 64 {
        return Err(Error::InvalidInput(
            "set semantics supports at most 64 pairs (K ≤ 11)".into(),
        ));
    }
    let top = max_threshold(mode, g.r(), k);
    if delta > top && !(mode == Mode::MaxMin && k == 1) {
        return Ok(SolveResult::no(SolveStats::default()));
    }
    let delta = delta.min(top);
    if delta <= u8::MAX as u64 {
        solve_with::<u8>(g, k, delta, mode, opts).map(|(res, _)| res)
    } else if delta <= u16::MAX as u64 {
        solve_with::<u16>(g, k, delta, mode, opts).map(|(res, _)| res)
    } else {
        solve_with::<u32>(g, k, delta, mode, opts).map(|(res, _)| res)
    }
}

/// The DP with an explicit cell type; also returns the table. Δ must fit
/// in `C` and not exceed the largest meaningful threshold.
pub fn solve_with<C>(
    g: &SigmaDag,
    k: usize,
    delta: u64,
    mode: Mode,
    opts: SolveOptions,
) -> Result<(SolveResult, PatternTable<C>)>
where
    C: PrimInt + Unsigned + Hash,
{
    if k == 0 {
        return Err(Error::InvalidInput("K must be positive".into()));
    }
    let cap = C::from(delta)
        .ok_or_else(|| Error::InvalidInput(format!("Δ={delta} does not fit the cell type")))?;
    let set = opts.semantics == Semantics::Set;
    let npairs = pairs(k);
    let ncells = match mode {
        Mode::MaxMin => npairs,
        Mode::MaxSum => 1,
    };
    let full_mask: u64 = if npairs == 64 {
        u64::MAX
    } else {
        (1u64 << npairs) - 1
    };

    let start = Key {
        verts: vec![g.source(); k].into_boxed_slice(),
        cells: vec![C::zero(); ncells].into_boxed_slice(),
        distinct: 0,
    };
    let mut layers = vec![Layer {
        keys: vec![start],
        parents: vec![Parent {
            prev: 0,
            labels: Box::new([]),
        }],
    }];
    let mut stats = SolveStats {
        states: 1,
        peak_layer: 1,
    };

    for d in 0..g.r() {
        // positions still to be read after this step
        let remaining = (g.r() - d - 1) as u64;
        let prev = layers.last().unwrap();
        let mut index: HashMap<Key<C>, usize> = HashMap::new();
        let mut next = Layer {
            keys: Vec::new(),
            parents: Vec::new(),
        };
        let mut choice = vec![0usize; k];
        for (pi, key) in prev.keys.iter().enumerate() {
            let outs: Vec<_> = key.verts.iter().map(|&v| g.out_edges(v)).collect();
            choice.iter_mut().for_each(|c| *c = 0);
            loop {
                let labels: Box<[Symbol]> = (0..k).map(|i| outs[i][choice[i]].label).collect();
                let mut cells = key.cells.clone();
                let mut distinct = key.distinct;
                let mut bit = 0;
                let mut added = 0u64;
                for i in 0..k {
                    for j in i + 1..k {
                        if labels[i] != labels[j] {
                            match mode {
                                Mode::MaxMin => cells[bit] = (cells[bit] + C::one()).min(cap),
                                Mode::MaxSum => added += 1,
                            }
                            if set {
                                distinct |= 1 << bit;
                            }
                        }
                        bit += 1;
                    }
                }
                if mode == Mode::MaxSum {
                    let room = (cap - cells[0]).to_u64().unwrap();
                    cells[0] = cells[0] + C::from(added.min(room)).unwrap();
                }
                // drop states that cannot reach Δ even if every later position differs
                let alive = match mode {
                    Mode::MaxMin => cells
                        .iter()
                        .all(|c| c.to_u64().unwrap() + remaining >= delta),
                    Mode::MaxSum => cells[0].to_u64().unwrap() + npairs as u64 * remaining >= delta,
                };
                let verts: Box<[VertexId]> = (0..k).map(|i| outs[i][choice[i]].to).collect();
                let new_key = Key {
                    verts,
                    cells,
                    distinct,
                };
                if alive && !index.contains_key(&new_key) {
                    index.insert(new_key.clone(), next.keys.len());
                    next.keys.push(new_key);
                    next.parents.push(Parent { prev: pi, labels });
                }
                // odometer over the product of out-edge lists
                let mut pos = k;
                let exhausted = loop {
                    if pos == 0 {
                        break true;
                    }
                    pos -= 1;
                    choice[pos] += 1;
                    if choice[pos] < outs[pos].len() {
                        break false;
                    }
                    choice[pos] = 0;
                };
                if exhausted {
                    break;
                }
            }
        }
        stats.states += next.keys.len();
        stats.peak_layer = stats.peak_layer.max(next.keys.len());
        if let Some(limit) = opts.max_states {
            if stats.states > limit {
                return Err(Error::Budget(format!("DP stored more than {limit} states")));
            }
        }
        layers.push(next);
    }

    let last = layers.last().unwrap();
    let accept = |key: &Key<C>| {
        if set && key.distinct != full_mask {
            return false;
        }
        match mode {
            Mode::MaxMin => key.cells.iter().all(|&c| c >= cap),
            Mode::MaxSum => key.cells[0] >= cap,
        }
    };
    let Some(hit) = last.keys.iter().position(accept) else {
        return Ok((SolveResult::no(stats), PatternTable { layers }));
    };

    let mut rows: Vec<Vec<Symbol>> = vec![Vec::with_capacity(g.r()); k];
    let mut at = hit;
    for layer in layers[1..].iter().rev() {
        let parent = &layer.parents[at];
        for (row, &c) in rows.iter_mut().zip(parent.labels.iter()) {
            row.push(c);
        }
        at = parent.prev;
    }
    let witness: Vec<RString> = rows
        .into_iter()
        .map(|mut row| {
            row.reverse();
            g.rstring(row)
        })
        .collect();
    let achieved = match mode {
        Mode::MaxMin => div_min(&witness)?,
        Mode::MaxSum => Diversity::Finite(div_sum(&witness)?),
    };
    debug_assert!(achieved.meets(delta));
    let res = SolveResult {
        decision: true,
        witness: Some(witness),
        achieved: Some(achieved),
        stats,
    };
    Ok((res, PatternTable { layers }))
}

/// Result of [`optimize`]: the best threshold found and the solver run
/// that certifies it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Optimum {
    pub value: Diversity,
    pub result: SolveResult,
    pub calls: usize,
}

/// Largest Δ answered YES, by binary search over `[0, max_threshold]`.
/// Returns `None` when even Δ = 0 is infeasible (set semantics with fewer
/// than K strings).
pub fn optimize(g: &SigmaDag, k: usize, mode: Mode, opts: SolveOptions) -> Result<Option<Optimum>> {
    let mut calls = 1;
    let base = solve(g, k, 0, mode, opts)?;
    if !base.decision {
        return Ok(None);
    }
    if mode == Mode::MaxMin && k == 1 {
        return Ok(Some(Optimum {
            value: Diversity::Infinite,
            result: base,
            calls,
        }));
    }
    let (mut lo, mut hi) = (0u64, max_threshold(mode, g.r(), k));
    let mut best = base;
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        calls += 1;
        let res = solve(g, k, mid, mode, opts)?;
        if res.decision {
            lo = mid;
            best = res;
        } else {
            hi = mid - 1;
        }
    }
    Ok(Some(Optimum {
        value: Diversity::Finite(lo),
        result: best,
        calls,
    }))
}
