//! Elementary cellular automaton dynamics on periodic rings, plus the
//! conjugation/reflection symmetry group acting on rules and configurations.

use std::fmt;
use std::str::FromStr;

use crate::bits::PackedBits;
use crate::error::{Error, Result};

/// `RULE_TABLE[rule][n]` is the output for neighborhood index `n = 4l + 2c + r`.
static RULE_TABLE: [[bool; 8]; 256] = build_rule_table();

const fn build_rule_table() -> [[bool; 8]; 256] {
    let mut table = [[false; 8]; 256];
    let mut rule = 0;
    while rule < 256 {
        let mut n = 0;
        while n < 8 {
            table[rule][n] = (rule >> n) & 1 == 1;
            n += 1;
        }
        rule += 1;
    }
    table
}

/// An elementary rule under Wolfram numbering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleCode(u8);

impl RuleCode {
    pub const fn new(code: u8) -> Self {
        Self(code)
    }

    pub const fn code(self) -> u8 {
        self.0
    }

    /// Iterates all 256 rules in numeric order.
    pub fn all() -> impl Iterator<Item = RuleCode> {
        (0..=255u8).map(RuleCode)
    }

    #[inline]
    pub fn output(self, l: bool, c: bool, r: bool) -> bool {
        RULE_TABLE[self.0 as usize][neighborhood_index(l, c, r)]
    }

    #[inline]
    pub fn table(self) -> &'static [bool; 8] {
        &RULE_TABLE[self.0 as usize]
    }

    pub fn conjugate(self) -> Self {
        let mut code = 0u8;
        for n in 0..8 {
            if !self.table()[7 - n] {
                code |= 1 << n;
            }
        }
        Self(code)
    }

    pub fn reflect(self) -> Self {
        let mut code = 0u8;
        for n in 0..8usize {
            let mirrored = ((n & 1) << 2) | (n & 2) | ((n >> 2) & 1);
            if self.table()[mirrored] {
                code |= 1 << n;
            }
        }
        Self(code)
    }

    pub fn transform(self, s: Symmetry) -> Self {
        match s {
            Symmetry::Identity => self,
            Symmetry::Conjugate => self.conjugate(),
            Symmetry::Reflect => self.reflect(),
            Symmetry::ConjugateReflect => self.conjugate().reflect(),
        }
    }

    /// The rule's orbit under the symmetry group, sorted and deduplicated.
    pub fn equivalence_set(self) -> Vec<RuleCode> {
        let mut set: Vec<RuleCode> = Symmetry::ALL.iter().map(|&s| self.transform(s)).collect();
        set.sort_unstable();
        set.dedup();
        set
    }

    /// Lowest-numbered member of the equivalence set.
    pub fn representative(self) -> Self {
        Symmetry::ALL
            .iter()
            .map(|&s| self.transform(s))
            .min()
            .expect("symmetry group is non-empty")
    }

    pub fn is_representative(self) -> bool {
        self.representative() == self
    }
}

impl From<u8> for RuleCode {
    fn from(code: u8) -> Self {
        Self(code)
    }
}

impl fmt::Display for RuleCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for RuleCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .parse::<u8>()
            .map(RuleCode)
            .map_err(|_| Error::Parse(format!("rule must be an integer in 0..=255, got {s:?}")))
    }
}

#[inline]
pub fn neighborhood_index(l: bool, c: bool, r: bool) -> usize {
    ((l as usize) << 2) | ((c as usize) << 1) | (r as usize)
}

/// Sorted minimal representatives of all 88 equivalence classes.
pub fn representatives() -> Vec<RuleCode> {
    RuleCode::all().filter(|r| r.is_representative()).collect()
}

/// Black/white conjugation and left/right reflection.
///
/// Encoded as two flag bits (conjugate = 1, reflect = 2) so that composition
/// is XOR; the declaration order doubles as the tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symmetry {
    Identity = 0,
    Conjugate = 1,
    Reflect = 2,
    ConjugateReflect = 3,
}

impl Symmetry {
    pub const ALL: [Symmetry; 4] = [
        Symmetry::Identity,
        Symmetry::Conjugate,
        Symmetry::Reflect,
        Symmetry::ConjugateReflect,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn compose(self, other: Symmetry) -> Symmetry {
        Self::ALL[self.index() ^ other.index()]
    }

    pub fn conjugates(self) -> bool {
        self.index() & 1 == 1
    }

    pub fn reflects(self) -> bool {
        self.index() & 2 == 2
    }

    pub fn name(self) -> &'static str {
        match self {
            Symmetry::Identity => "identity",
            Symmetry::Conjugate => "conjugate",
            Symmetry::Reflect => "reflect",
            Symmetry::ConjugateReflect => "conjugate_reflect",
        }
    }
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A binary ring state. Cell indices wrap modulo the width.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    cells: PackedBits,
}

impl Configuration {
    pub fn zeros(width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidWidth { width });
        }
        Ok(Self {
            cells: PackedBits::zeros(width),
        })
    }

    pub fn from_bools(cells: &[bool]) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidWidth { width: 0 });
        }
        Ok(Self {
            cells: PackedBits::from_bools(cells),
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.cells.len()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.cells.get(i)
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.cells.set(i, value);
    }

    pub fn count_black(&self) -> usize {
        self.cells.count_ones()
    }

    pub fn packed(&self) -> &PackedBits {
        &self.cells
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.cells.to_bools()
    }

    pub fn conjugated(&self) -> Self {
        Self {
            cells: self.cells.not(),
        }
    }

    pub fn reflected(&self) -> Self {
        Self {
            cells: self.cells.reversed(),
        }
    }

    pub fn transform(&self, s: Symmetry) -> Self {
        let mut out = self.clone();
        if s.conjugates() {
            out = out.conjugated();
        }
        if s.reflects() {
            out = out.reflected();
        }
        out
    }

    /// One synchronous update on the ring.
    pub fn step(&self, rule: RuleCode) -> Result<Self> {
        let width = self.width();
        if width < 3 {
            return Err(Error::InvalidWidth { width });
        }
        Ok(self.step_unchecked(rule))
    }

    fn step_unchecked(&self, rule: RuleCode) -> Self {
        let left = self.cells.rotate_from_left();
        let right = self.cells.rotate_from_right();
        let table = rule.table();
        let mut out = PackedBits::zeros(self.width());
        let (lw, cw, rw) = (left.words(), self.cells.words(), right.words());
        for (j, o) in out.words_mut().iter_mut().enumerate() {
            let (l, c, r) = (lw[j], cw[j], rw[j]);
            let mut acc = 0u64;
            for (n, &on) in table.iter().enumerate() {
                if on {
                    let ml = if n & 4 != 0 { l } else { !l };
                    let mc = if n & 2 != 0 { c } else { !c };
                    let mr = if n & 1 != 0 { r } else { !r };
                    acc |= ml & mc & mr;
                }
            }
            *o = acc;
        }
        out.clear_tail();
        Self { cells: out }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.cells.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration({self})")
    }
}

impl FromStr for Configuration {
    type Err = Error;

    /// Accepts `0`/`1` characters (also `.`/`#` and `□`/`■`).
    fn from_str(s: &str) -> Result<Self> {
        let cells = s
            .trim()
            .chars()
            .map(|ch| match ch {
                '0' | '.' | '□' => Ok(false),
                '1' | '#' | '■' => Ok(true),
                other => Err(Error::Parse(format!("unexpected cell character {other:?}"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Self::from_bools(&cells)
    }
}

/// A full history: `rows[0]` is the input and `rows[t + 1] = step(rows[t])`.
///
/// The analysis window drops the input row and the first `burn_in` generated
/// rows, leaving `steps - burn_in` rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpacetimeField {
    rule: RuleCode,
    burn_in: usize,
    rows: Vec<Configuration>,
}

impl SpacetimeField {
    pub fn evolve(input: &Configuration, rule: RuleCode, steps: usize, burn_in: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::ZeroSteps);
        }
        if burn_in >= steps {
            return Err(Error::InvalidBurnIn { burn_in, steps });
        }
        if input.width() < 3 {
            return Err(Error::InvalidWidth { width: input.width() });
        }
        let mut rows = Vec::with_capacity(steps + 1);
        rows.push(input.clone());
        for t in 0..steps {
            let next = rows[t].step_unchecked(rule);
            rows.push(next);
        }
        Ok(Self { rule, burn_in, rows })
    }

    pub fn rule(&self) -> RuleCode {
        self.rule
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    pub fn steps(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn width(&self) -> usize {
        self.rows[0].width()
    }

    pub fn rows(&self) -> &[Configuration] {
        &self.rows
    }

    pub fn window(&self) -> &[Configuration] {
        &self.rows[self.burn_in + 1..]
    }

    pub fn transform(&self, s: Symmetry) -> Self {
        Self {
            rule: self.rule.transform(s),
            burn_in: self.burn_in,
            rows: self.rows.iter().map(|r| r.transform(s)).collect(),
        }
    }
}
