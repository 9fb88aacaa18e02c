//! Plug-in transfer entropy between binary cell time series and the
//! patch-averaged statistic over a space-time window.
//!
//! Joint symbols are packed as `next << (k + l) | target_history << l |
//! source_history`, with the most recent sample in the lowest bit of each
//! history. The per-pair histogram and the all-pairs matrix path share
//! one fixed-point accumulation, so both produce identical bits.

use std::fmt;

use crate::bits::PackedBits;
use crate::eca::SpacetimeField;
use crate::error::{Error, Result};

/// Largest supported `1 + k + l`; keeps joint histograms at most 2^16 bins.
pub const MAX_JOINT_BITS: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum BiasCorrection {
    #[default]
    None,
    /// Adds `(bins - 1) / (2 n ln 2)` to each of the four entropies that make up TE.
    MillerMadow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TeConfig {
    /// Target history length.
    pub k: usize,
    /// Source history length.
    pub l: usize,
    pub bias_correction: BiasCorrection,
}

impl Default for TeConfig {
    fn default() -> Self {
        Self {
            k: 1,
            l: 1,
            bias_correction: BiasCorrection::None,
        }
    }
}

impl TeConfig {
    pub fn new(k: usize, l: usize) -> Result<Self> {
        let cfg = Self {
            k,
            l,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.l == 0 || 1 + self.k + self.l > MAX_JOINT_BITS {
            return Err(Error::InvalidHistory { k: self.k, l: self.l });
        }
        Ok(())
    }

    pub fn max_history(&self) -> usize {
        self.k.max(self.l)
    }

    /// Number of joint samples taken from a series of `len` points.
    pub fn usable_samples(&self, len: usize) -> usize {
        len.saturating_sub(self.max_history())
    }

    fn joint_bins(&self) -> usize {
        1 << (1 + self.k + self.l)
    }
}

/// Fixed-point scale for log terms. Integer accumulation makes every sum
/// independent of bin order.
const LOG_SCALE: f64 = (1u64 << 60) as f64;

/// Reusable buffers for [`te_from_counts`].
#[derive(Default)]
pub struct TeScratch {
    /// `logs[i] = round(log2(i) * LOG_SCALE)`.
    logs: Vec<i128>,
    hist: Vec<u64>,
    next_hist: Vec<u64>,
    hist_src: Vec<u64>,
    joint: Vec<(usize, u64)>,
}

impl TeScratch {
    fn ensure_logs(&mut self, n: u64) {
        let n = n as usize;
        if self.logs.len() <= n {
            let start = self.logs.len();
            self.logs
                .extend((start..=n).map(|i| ((i.max(1) as f64).log2() * LOG_SCALE).round() as i128));
        }
    }
}

/// Target-only marginals: `hist[history]` and `next_hist[next << k | history]`.
fn target_marginals(cfg: &TeConfig, next_hist: &[u64], hist: &mut Vec<u64>) {
    let nx = 1usize << cfg.k;
    hist.clear();
    hist.resize(nx, 0);
    for (state, &c) in next_hist.iter().enumerate() {
        hist[state & (nx - 1)] += c;
    }
}

/// Sums the plug-in terms for the nonzero joint bins in `scratch.joint`,
/// given all three marginals. Bins where the source adds nothing
/// (`c * h == hs * nh`) contribute exactly zero.
fn te_from_parts(cfg: &TeConfig, n: u64, scratch: &mut TeScratch) -> f64 {
    if n == 0 {
        return 0.0;
    }
    scratch.ensure_logs(n);
    let (k, l) = (cfg.k, cfg.l);
    let xs_mask = (1usize << (k + l)) - 1;
    let TeScratch {
        logs,
        hist,
        next_hist,
        hist_src,
        joint,
    } = scratch;
    let mut total: i128 = 0;
    for &(idx, c) in joint.iter() {
        let xs = idx & xs_mask;
        let xh = xs >> l;
        let state = ((idx >> (k + l)) << k) | xh;
        let (h, hs, nh) = (hist[xh], hist_src[xs], next_hist[state]);
        if c as u128 * h as u128 == hs as u128 * nh as u128 {
            continue;
        }
        let ratio = logs[c as usize] + logs[h as usize] - logs[hs as usize] - logs[nh as usize];
        total += c as i128 * ratio;
    }
    let nf = n as f64;
    let mut te = total as f64 / LOG_SCALE / nf;

    if cfg.bias_correction == BiasCorrection::MillerMadow {
        let occupied = |v: &[u64]| v.iter().filter(|&&c| c > 0).count() as f64;
        let bins = occupied(next_hist) - occupied(hist) - joint.len() as f64 + occupied(hist_src);
        te += bins / (2.0 * nf * std::f64::consts::LN_2);
    }
    te.max(0.0)
}

/// Estimates TE in bits from a joint histogram laid out as described in the
/// module docs.
///
/// Terms are accumulated in fixed point, so relabeling symbols (which only
/// permutes bins) leaves the result bit-identical.
pub fn te_from_counts(counts: &[u64], cfg: &TeConfig, scratch: &mut TeScratch) -> f64 {
    let (k, l) = (cfg.k, cfg.l);
    debug_assert_eq!(counts.len(), cfg.joint_bins());
    let xs_mask = (1usize << (k + l)) - 1;

    scratch.next_hist.clear();
    scratch.next_hist.resize(2 << k, 0);
    scratch.hist_src.clear();
    scratch.hist_src.resize(1 << (k + l), 0);
    scratch.joint.clear();
    let mut n = 0;
    for (idx, &c) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
        let xs = idx & xs_mask;
        scratch.next_hist[((idx >> (k + l)) << k) | (xs >> l)] += c;
        scratch.hist_src[xs] += c;
        scratch.joint.push((idx, c));
        n += c;
    }
    target_marginals(cfg, &scratch.next_hist, &mut scratch.hist);
    te_from_parts(cfg, n, scratch)
}

/// Joint histogram for one (target, source) pair of equal-length series.
pub fn joint_counts(target: &[bool], source: &[bool], cfg: &TeConfig) -> Result<Vec<u64>> {
    cfg.validate()?;
    if target.len() != source.len() {
        return Err(Error::LengthMismatch {
            target: target.len(),
            source_len: source.len(),
        });
    }
    let needed = cfg.max_history() + 1;
    if target.len() < needed {
        return Err(Error::SeriesTooShort {
            len: target.len(),
            needed,
        });
    }
    Ok(joint_counts_by(target.len(), |t| target[t], |t| source[t], cfg))
}

fn joint_counts_by(
    len: usize,
    target: impl Fn(usize) -> bool,
    source: impl Fn(usize) -> bool,
    cfg: &TeConfig,
) -> Vec<u64> {
    let (k, l) = (cfg.k, cfg.l);
    let mut counts = vec![0u64; cfg.joint_bins()];
    for t in cfg.max_history() - 1..len - 1 {
        let mut xh = 0usize;
        for j in 0..k {
            xh |= (target(t - j) as usize) << j;
        }
        let mut yh = 0usize;
        for j in 0..l {
            yh |= (source(t - j) as usize) << j;
        }
        let idx = ((target(t + 1) as usize) << (k + l)) | (xh << l) | yh;
        counts[idx] += 1;
    }
    counts
}

/// Plug-in transfer entropy from `source` to `target`, in bits.
pub fn transfer_entropy(target: &[bool], source: &[bool], cfg: &TeConfig) -> Result<f64> {
    let counts = joint_counts(target, source, cfg)?;
    Ok(te_from_counts(&counts, cfg, &mut TeScratch::default()))
}

/// Directed TE between every ordered pair of cells. Row = source, column = target.
#[derive(Clone, Debug, PartialEq)]
pub struct TeMatrix {
    width: usize,
    values: Vec<f64>,
}

impl TeMatrix {
    pub fn from_values(width: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), width * width, "matrix must be width x width");
        Self { width, values }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, source: usize, target: usize) -> f64 {
        self.values[source * self.width + target]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Patch-averaged transfer entropy in bits.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct MeanTe(pub f64);

impl MeanTe {
    pub fn bits(self) -> f64 {
        self.0
    }
}

impl fmt::Display for MeanTe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Mean over all entries, summed in sorted order so any relabeling of cells
/// gives the same bits.
pub fn mean_te(m: &TeMatrix) -> MeanTe {
    if m.values.is_empty() {
        return MeanTe(0.0);
    }
    let mut sorted = m.values.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    MeanTe(sorted.iter().sum::<f64>() / sorted.len() as f64)
}

/// Per-cell time series over the analysis window, one packed vector per column.
pub fn window_columns(field: &SpacetimeField) -> Vec<PackedBits> {
    let window = field.window();
    let mut cols = vec![PackedBits::zeros(window.len()); field.width()];
    for (t, row) in window.iter().enumerate() {
        for (j, &word) in row.packed().words().iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let bit = w.trailing_zeros() as usize;
                cols[j * 64 + bit].set(t, true);
                w &= w - 1;
            }
        }
    }
    cols
}

fn check_window(field: &SpacetimeField, cfg: &TeConfig) -> Result<()> {
    cfg.validate()?;
    let needed = cfg.max_history() + 1;
    let len = field.window().len();
    if len < needed {
        return Err(Error::SeriesTooShort { len, needed });
    }
    Ok(())
}

/// TE for every ordered pair on the post-burn-in window, self-pairs included.
pub fn te_matrix(field: &SpacetimeField, cfg: &TeConfig) -> Result<TeMatrix> {
    check_window(field, cfg)?;
    Ok(te_matrix_fast(&window_columns(field), cfg))
}

/// Per-pair reference path; exposed for cross-checking the all-pairs path.
pub fn te_matrix_histogram(cols: &[PackedBits], cfg: &TeConfig) -> TeMatrix {
    let w = cols.len();
    let len = cols.first().map_or(0, |c| c.len());
    let mut scratch = TeScratch::default();
    let mut values = vec![0.0; w * w];
    for (y, src) in cols.iter().enumerate() {
        for (x, tgt) in cols.iter().enumerate() {
            let counts = joint_counts_by(len, |t| tgt.get(t), |t| src.get(t), cfg);
            values[y * w + x] = te_from_counts(&counts, cfg, &mut scratch);
        }
    }
    TeMatrix::from_values(w, values)
}

/// Per-sample symbols of one column: `next << k | target_history` and the
/// source history, both with the most recent sample in the low bit.
fn column_states(col: &PackedBits, cfg: &TeConfig) -> (Vec<u16>, Vec<u16>) {
    let (k, l) = (cfg.k, cfg.l);
    let m = cfg.max_history();
    let samples = col.len() - m;
    let bits = col.to_bools();
    let mut target = Vec::with_capacity(samples);
    let mut source = Vec::with_capacity(samples);
    for t in m - 1..col.len() - 1 {
        let history = |len: usize| (0..len).fold(0u16, |acc, j| acc | (bits[t - j] as u16) << j);
        target.push((bits[t + 1] as u16) << k | history(k));
        source.push(history(l));
    }
    (target, source)
}

/// All-pairs path: symbols are precomputed per column, so each pair costs one
/// pass of histogram increments over the samples.
fn te_matrix_fast(cols: &[PackedBits], cfg: &TeConfig) -> TeMatrix {
    let (k, l) = (cfg.k, cfg.l);
    let w = cols.len();
    let states: Vec<(Vec<u16>, Vec<u16>)> = cols.iter().map(|c| column_states(c, cfg)).collect();
    let samples = states.first().map_or(0, |s| s.0.len());
    let n = samples as u64;
    let xs_mask = (1usize << (k + l)) - 1;

    let mut scratch = TeScratch::default();
    let mut counts = vec![0u32; cfg.joint_bins()];
    let mut values = vec![0.0; w * w];
    for (x, (tstates, _)) in states.iter().enumerate() {
        scratch.next_hist.clear();
        scratch.next_hist.resize(2 << k, 0);
        for &s in tstates {
            scratch.next_hist[s as usize] += 1;
        }
        target_marginals(cfg, &scratch.next_hist, &mut scratch.hist);
        let shifted: Vec<usize> = tstates.iter().map(|&s| (s as usize) << l).collect();
        for (y, (_, sstates)) in states.iter().enumerate() {
            for (&t, &s) in shifted.iter().zip(sstates) {
                counts[t | s as usize] += 1;
            }
            scratch.hist_src.clear();
            scratch.hist_src.resize(1 << (k + l), 0);
            scratch.joint.clear();
            for (idx, c) in counts.iter_mut().enumerate() {
                if *c > 0 {
                    scratch.hist_src[idx & xs_mask] += *c as u64;
                    scratch.joint.push((idx, *c as u64));
                    *c = 0;
                }
            }
            values[y * w + x] = te_from_parts(cfg, n, &mut scratch);
        }
    }
    TeMatrix::from_values(w, values)
}
