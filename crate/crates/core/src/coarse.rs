//! Exact supercell coarse-graining between elementary rules.
//!
//! A projection `P` maps each `N`-cell block to one bit. Rule `A` coarse-grains
//! to rule `B` under `P` when projecting after `N` fine steps of `A` equals one
//! step of `B` on the projected ring. After `N` steps a radius-1 rule's block
//! of `N` cells depends only on the `3N` cells of itself and its two neighbor
//! blocks, so enumerating all `2^(3N)` three-block windows decides the
//! question exactly.
//!
//! Blocks are encoded with the leftmost cell in the most significant bit, the
//! same convention as the `4l + 2c + r` neighborhood index.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;

use crate::classify::InfoClass;
use crate::eca::{representatives, Configuration, RuleCode};
use crate::error::{Error, Result};

pub const MAX_SUPERCELL: usize = 5;

/// Block-to-bit map; bit `p` of `table` is the image of pattern `p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Projection {
    supercell: usize,
    table: u32,
}

impl Projection {
    pub fn new(supercell: usize, table: u32) -> Result<Self> {
        if supercell == 0 || supercell > MAX_SUPERCELL {
            return Err(Error::InvalidSupercell(supercell));
        }
        let patterns = 1u64 << supercell;
        if patterns < 32 && (table as u64) >> patterns != 0 {
            return Err(Error::InvalidProjection { supercell, table });
        }
        Ok(Self { supercell, table })
    }

    pub fn identity() -> Self {
        Self {
            supercell: 1,
            table: 0b10,
        }
    }

    /// Black iff any cell in the block is black.
    pub fn or(supercell: usize) -> Result<Self> {
        Self::new(supercell, Self::full_mask(supercell)? & !1)
    }

    /// Black iff every cell in the block is black.
    pub fn and(supercell: usize) -> Result<Self> {
        let top = (1u32 << supercell) - 1;
        Self::new(supercell, 1 << top)
    }

    fn full_mask(supercell: usize) -> Result<u32> {
        if supercell == 0 || supercell > MAX_SUPERCELL {
            return Err(Error::InvalidSupercell(supercell));
        }
        Ok(if supercell == 5 {
            u32::MAX
        } else {
            (1u32 << (1u32 << supercell)) - 1
        })
    }

    pub fn supercell(&self) -> usize {
        self.supercell
    }

    pub fn table(&self) -> u32 {
        self.table
    }

    pub fn patterns(&self) -> usize {
        1 << self.supercell
    }

    #[inline]
    pub fn apply(&self, pattern: u32) -> bool {
        (self.table >> pattern) & 1 == 1
    }

    pub fn is_surjective(&self) -> bool {
        self.table != 0 && Some(self.table) != Self::full_mask(self.supercell).ok()
    }

    /// The table as `0`/`1` characters in pattern-index order.
    pub fn bit_string(&self) -> String {
        (0..self.patterns() as u32)
            .map(|p| if self.apply(p) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bit_string(s: &str) -> Result<Self> {
        let n = s.len();
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::Parse(format!("projection needs 2^N bits, got {n}")));
        }
        let mut table = 0u32;
        for (p, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => table |= 1 << p,
                other => return Err(Error::Parse(format!("bad projection bit {other:?}"))),
            }
        }
        Self::new(n.trailing_zeros() as usize, table)
    }

    /// Applies `self` to blocks of `inner` outputs: the result acts on
    /// supercells of `inner.supercell * self.supercell` fine cells.
    pub fn compose_over(&self, inner: &Projection) -> Result<Projection> {
        let n1 = inner.supercell;
        let n2 = self.supercell;
        let total = n1 * n2;
        if total > MAX_SUPERCELL {
            return Err(Error::InvalidSupercell(total));
        }
        let mut table = 0u32;
        for pattern in 0..1u32 << total {
            let mut coarse = 0u32;
            for j in 0..n2 {
                let shift = n1 * (n2 - 1 - j);
                let block = (pattern >> shift) & ((1 << n1) - 1);
                coarse = (coarse << 1) | inner.apply(block) as u32;
            }
            if self.apply(coarse) {
                table |= 1 << pattern;
            }
        }
        Projection::new(total, table)
    }
}

impl fmt::Debug for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Projection(N={}, {})", self.supercell, self.bit_string())
    }
}

/// Projects each `N`-cell block of a ring onto one coarse cell.
pub fn coarse_project(cfg: &Configuration, p: &Projection) -> Result<Configuration> {
    let n = p.supercell;
    let width = cfg.width();
    if width % n != 0 {
        return Err(Error::NotDivisible { width, supercell: n });
    }
    let cells: Vec<bool> = (0..width / n)
        .map(|j| {
            let pattern = (0..n).fold(0u32, |acc, i| (acc << 1) | cfg.get(j * n + i) as u32);
            p.apply(pattern)
        })
        .collect();
    Configuration::from_bools(&cells)
}

/// Steps an open block of `width` cells (leftmost in the MSB) once; the result
/// has `width - 2` cells.
#[inline]
fn step_open_block(rule: RuleCode, block: u32, width: usize) -> u32 {
    let table = rule.table();
    let mut out = 0u32;
    for i in 0..width - 2 {
        let nb = (block >> (width - 3 - i)) & 0b111;
        out = (out << 1) | table[nb as usize] as u32;
    }
    out
}

/// Middle supercell after `N` steps of `rule` on an open `3N`-cell window.
pub fn evolve_window(rule: RuleCode, window: u32, supercell: usize) -> u32 {
    let mut block = window;
    let mut width = 3 * supercell;
    for _ in 0..supercell {
        block = step_open_block(rule, block, width);
        width -= 2;
    }
    block
}

/// Per-window data shared by every projection at one supercell size.
struct WindowTable {
    supercell: usize,
    left: Vec<u8>,
    center: Vec<u8>,
    right: Vec<u8>,
    result: Vec<u8>,
}

impl WindowTable {
    fn new(rule: RuleCode, supercell: usize) -> Self {
        let count = 1usize << (3 * supercell);
        let mask = (1u32 << supercell) - 1;
        let mut t = WindowTable {
            supercell,
            left: Vec::with_capacity(count),
            center: Vec::with_capacity(count),
            right: Vec::with_capacity(count),
            result: Vec::with_capacity(count),
        };
        for w in 0..count as u32 {
            t.left.push(((w >> (2 * supercell)) & mask) as u8);
            t.center.push(((w >> supercell) & mask) as u8);
            t.right.push((w & mask) as u8);
            t.result.push(evolve_window(rule, w, supercell) as u8);
        }
        t
    }

    fn induce(&self, p: &Projection) -> Induced {
        debug_assert_eq!(p.supercell, self.supercell);
        let mut seen: [Option<(bool, u32)>; 8] = [None; 8];
        for w in 0..self.result.len() {
            let nb = neighborhood(
                p.apply(self.left[w] as u32),
                p.apply(self.center[w] as u32),
                p.apply(self.right[w] as u32),
            );
            let out = p.apply(self.result[w] as u32);
            match seen[nb] {
                None => seen[nb] = Some((out, w as u32)),
                Some((prev, first)) if prev != out => {
                    return Induced::Inconsistent {
                        first,
                        second: w as u32,
                    }
                }
                Some(_) => {}
            }
        }
        let mut code = 0u8;
        for (nb, entry) in seen.iter().enumerate() {
            // Surjective projections realize every coarse neighborhood.
            if entry.expect("coarse neighborhood realized").0 {
                code |= 1 << nb;
            }
        }
        Induced::Rule(RuleCode::new(code))
    }
}

#[inline]
fn neighborhood(l: bool, c: bool, r: bool) -> usize {
    crate::eca::neighborhood_index(l, c, r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Induced {
    Rule(RuleCode),
    /// Two `3N`-cell windows with equal projected neighborhoods but different
    /// projected outcomes.
    Inconsistent {
        first: u32,
        second: u32,
    },
}

pub fn induced_coarse_rule(rule_a: RuleCode, p: &Projection) -> Result<Induced> {
    if !p.is_surjective() {
        return Err(Error::NonSurjectiveProjection);
    }
    Ok(WindowTable::new(rule_a, p.supercell).induce(p))
}

/// Exact check by enumeration of all `2^(3N)` windows.
pub fn verify_coarse_graining(rule_a: RuleCode, rule_b: RuleCode, p: &Projection) -> Result<bool> {
    Ok(induced_coarse_rule(rule_a, p)? == Induced::Rule(rule_b))
}

/// Trajectory check on a random ring of `coarse_width * N` cells: the
/// projection of every `N`-th fine row must equal the coarse evolution.
pub fn verify_dynamically<R: Rng + ?Sized>(
    rule_a: RuleCode,
    rule_b: RuleCode,
    p: &Projection,
    coarse_width: usize,
    coarse_steps: usize,
    rng: &mut R,
) -> Result<bool> {
    if coarse_width < 3 {
        return Err(Error::InvalidWidth { width: coarse_width });
    }
    let n = p.supercell;
    let cells: Vec<bool> = (0..coarse_width * n).map(|_| rng.gen::<bool>()).collect();
    let mut fine = Configuration::from_bools(&cells)?;
    let mut coarse = coarse_project(&fine, p)?;
    for _ in 0..coarse_steps {
        for _ in 0..n {
            fine = fine.step(rule_a)?;
        }
        coarse = coarse.step(rule_b)?;
        if coarse_project(&fine, p)? != coarse {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A verified transition `rule_a -> rule_b` under `projection`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoarseGrainingMap {
    pub rule_a: RuleCode,
    pub rule_b: RuleCode,
    pub projection: Projection,
}

impl CoarseGrainingMap {
    pub fn target_representative(&self) -> RuleCode {
        self.rule_b.representative()
    }

    pub fn verify(&self) -> Result<bool> {
        verify_coarse_graining(self.rule_a, self.rule_b, &self.projection)
    }
}

/// Every surjective projection at supercell size `n`, in table order.
pub fn surjective_projections(n: usize) -> Result<Vec<Projection>> {
    let full = Projection::full_mask(n)?;
    (1..full).map(|t| Projection::new(n, t)).collect()
}

/// All consistent maps from `rule_a` for `N` in `2..=n_max`, ordered by
/// (N, table).
pub fn search_transitions(rule_a: RuleCode, n_max: usize) -> Result<Vec<CoarseGrainingMap>> {
    search_transitions_range(rule_a, 2, n_max)
}

pub fn search_transitions_range(rule_a: RuleCode, n_min: usize, n_max: usize) -> Result<Vec<CoarseGrainingMap>> {
    if n_min == 0 || n_max > 4 || n_min > n_max {
        return Err(Error::InvalidSupercell(n_max));
    }
    let mut maps = Vec::new();
    for n in n_min..=n_max {
        let windows = WindowTable::new(rule_a, n);
        let found: Vec<CoarseGrainingMap> = surjective_projections(n)?
            .into_par_iter()
            .filter_map(|p| match windows.induce(&p) {
                Induced::Rule(rule_b) => Some(CoarseGrainingMap {
                    rule_a,
                    rule_b,
                    projection: p,
                }),
                Induced::Inconsistent { .. } => None,
            })
            .collect();
        maps.extend(found);
    }
    Ok(maps)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: RuleCode,
    pub to: RuleCode,
    /// Smallest (N, table) witness.
    pub witness: CoarseGrainingMap,
    pub witness_count: usize,
}

impl Edge {
    pub fn is_self_loop(&self) -> bool {
        self.from == self.to
    }

    pub fn targets_zero(&self) -> bool {
        self.to == RuleCode::new(0)
    }

    /// `rep_a,rep_b,N,projection_bits`.
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.from,
            self.to,
            self.witness.projection.supercell(),
            self.witness.projection.bit_string()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionGraph {
    pub nodes: Vec<RuleCode>,
    pub edges: Vec<Edge>,
}

impl TransitionGraph {
    /// Groups maps by (source representative, target representative).
    pub fn from_maps(nodes: Vec<RuleCode>, maps: impl IntoIterator<Item = CoarseGrainingMap>) -> Self {
        let mut grouped: BTreeMap<(RuleCode, RuleCode), (CoarseGrainingMap, usize)> = BTreeMap::new();
        for m in maps {
            let key = (m.rule_a.representative(), m.target_representative());
            grouped
                .entry(key)
                .and_modify(|(w, c)| {
                    *c += 1;
                    let better = (m.projection.supercell(), m.projection.table())
                        < (w.projection.supercell(), w.projection.table());
                    if better {
                        *w = m;
                    }
                })
                .or_insert((m, 1));
        }
        let edges = grouped
            .into_iter()
            .map(|((from, to), (witness, witness_count))| Edge {
                from,
                to,
                witness,
                witness_count,
            })
            .collect();
        Self { nodes, edges }
    }

    pub fn edge(&self, from: RuleCode, to: RuleCode) -> Option<&Edge> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }

    /// Edges between distinct representatives, optionally keeping rule-0 targets.
    pub fn visible_edges(&self, show_zero: bool) -> impl Iterator<Item = &Edge> {
        self.edges
            .iter()
            .filter(move |e| !e.is_self_loop() && (show_zero || !e.targets_zero()))
    }
}

pub fn build_transition_graph(n_max: usize) -> Result<TransitionGraph> {
    build_transition_graph_for(&representatives(), n_max)
}

pub fn build_transition_graph_for(rules: &[RuleCode], n_max: usize) -> Result<TransitionGraph> {
    let maps = rules
        .iter()
        .map(|&r| search_transitions(r, n_max))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransitionGraph::from_maps(
        representatives(),
        maps.into_iter().flatten(),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub edge: Edge,
    pub from_class: InfoClass,
    pub to_class: InfoClass,
}

/// Edges whose target sits higher in I1 < I2 < I3 than their source.
pub fn validate_hierarchy(
    graph: &TransitionGraph,
    class_of: impl Fn(RuleCode) -> Option<InfoClass>,
) -> Result<Vec<Violation>> {
    let mut violations = Vec::new();
    for edge in graph.edges.iter().filter(|e| !e.is_self_loop()) {
        let from_class = class_of(edge.from).ok_or(Error::MissingClass(edge.from.code()))?;
        let to_class = class_of(edge.to).ok_or(Error::MissingClass(edge.to.code()))?;
        if to_class > from_class {
            violations.push(Violation {
                edge: edge.clone(),
                from_class,
                to_class,
            });
        }
    }
    Ok(violations)
}
