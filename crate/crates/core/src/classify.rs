//! Input ensembles, symmetry-maximized patch TE, and assignment of the
//! information classes I1/I2/I3.
//!
//! For every representative the single-cell input gives `te1`; each ensemble
//! input gives one `te_r`. The largest relative departure of any `te_r` from
//! `te1` separates rules whose TE is driven by the input (I2) from rules whose
//! TE stays low (I1). Rules whose single-cell TE already exceeds the highest
//! value seen for any Wolfram class I or II rule are I3.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::eca::{representatives, Configuration, RuleCode, SpacetimeField, Symmetry};
use crate::error::{Error, Result};
use crate::info::{mean_te, te_matrix, MeanTe, TeConfig};
use crate::labels::{LabelTable, WolframClass};
use crate::seed::{derive_seed, input_rng};

pub const REFERENCE_TE_THRESHOLD: f64 = 0.024;
pub const DEFAULT_CHANGE_THRESHOLD: f64 = 10.0;
pub const DEFAULT_ZERO_FLOOR: f64 = 1e-6;
pub const DEFAULT_MASTER_SEED: u64 = 0x00ec_a1f0;
/// Target and source history lengths (k, l) used by experiments. With k = 1
/// the globally periodic class II rules carry more apparent transfer than the
/// chaotic ones; a five-step target history absorbs that periodicity.
pub const EXPERIMENT_HISTORY: (usize, usize) = (5, 2);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InfoClass {
    I1,
    I2,
    I3,
}

impl InfoClass {
    pub fn as_str(self) -> &'static str {
        match self {
            InfoClass::I1 => "I1",
            InfoClass::I2 => "I2",
            InfoClass::I3 => "I3",
        }
    }
}

impl fmt::Display for InfoClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InfoClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I1" => Ok(InfoClass::I1),
            "I2" => Ok(InfoClass::I2),
            "I3" => Ok(InfoClass::I3),
            other => Err(Error::Parse(format!("unknown information class {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    /// Every cell i.i.d. uniform.
    Random,
    /// Black-cell counts spread evenly from 2 to `width / 2`, positions uniform.
    StructuredDensity,
}

impl EnsembleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnsembleKind::Random => "random",
            EnsembleKind::StructuredDensity => "density",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub width: usize,
    pub steps: usize,
    pub burn_in: usize,
    pub n_inputs: usize,
    pub te: TeConfig,
    pub master_seed: u64,
    pub ensemble: EnsembleKind,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            width: 101,
            steps: 250,
            burn_in: 50,
            n_inputs: 20,
            te: TeConfig {
                k: EXPERIMENT_HISTORY.0,
                l: EXPERIMENT_HISTORY.1,
                ..TeConfig::default()
            },
            master_seed: DEFAULT_MASTER_SEED,
            ensemble: EnsembleKind::Random,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width < 3 {
            return Err(Error::InvalidWidth { width: self.width });
        }
        if self.width % 2 == 0 {
            return Err(Error::EvenWidth { width: self.width });
        }
        if self.steps == 0 {
            return Err(Error::ZeroSteps);
        }
        if self.burn_in >= self.steps {
            return Err(Error::InvalidBurnIn {
                burn_in: self.burn_in,
                steps: self.steps,
            });
        }
        if self.n_inputs == 0 {
            return Err(Error::Empty);
        }
        self.te.validate()?;
        let needed = self.te.max_history() + 1;
        let len = self.steps - self.burn_in;
        if len < needed {
            return Err(Error::SeriesTooShort { len, needed });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassificationThresholds {
    pub te_threshold: f64,
    pub change_threshold: f64,
    pub zero_floor: f64,
}

impl ClassificationThresholds {
    pub fn with_te_threshold(te_threshold: f64) -> Self {
        Self {
            te_threshold,
            change_threshold: DEFAULT_CHANGE_THRESHOLD,
            zero_floor: DEFAULT_ZERO_FLOOR,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.te_threshold > 0.0 && self.change_threshold > 1.0 && self.zero_floor > 0.0
    }
}

impl Default for ClassificationThresholds {
    fn default() -> Self {
        Self::with_te_threshold(REFERENCE_TE_THRESHOLD)
    }
}

/// One black cell at the center of an otherwise white ring of odd width.
pub fn single_cell_input(width: usize) -> Result<Configuration> {
    if width % 2 == 0 {
        return Err(Error::EvenWidth { width });
    }
    let mut cfg = Configuration::zeros(width)?;
    cfg.set(width / 2, true);
    Ok(cfg)
}

pub fn random_input(width: usize, seed: u64) -> Result<Configuration> {
    let mut rng = input_rng(seed);
    let cells: Vec<bool> = (0..width).map(|_| rng.gen::<bool>()).collect();
    Configuration::from_bools(&cells)
}

/// Exactly `n_black` black cells at uniformly chosen distinct positions.
pub fn structured_input(width: usize, n_black: usize, seed: u64) -> Result<Configuration> {
    if n_black > width {
        return Err(Error::BlackCountOutOfRange { n_black, width });
    }
    let mut cfg = Configuration::zeros(width)?;
    let mut rng = input_rng(seed);
    for i in sample(&mut rng, width, n_black).into_iter() {
        cfg.set(i, true);
    }
    Ok(cfg)
}

/// Black-cell counts for a structured ensemble of `n` inputs: evenly spaced
/// from 2 to `width / 2`, rounded. For width 101 and 20 inputs this is
/// 2, 5, 7, 10, 12, ..., 47, 50.
pub fn density_counts(width: usize, n: usize) -> Vec<usize> {
    let lo = 2.0f64.min((width / 2) as f64);
    let hi = (width / 2) as f64;
    if n == 1 {
        return vec![lo as usize];
    }
    (0..n)
        .map(|i| (lo + i as f64 * (hi - lo) / (n - 1) as f64).round() as usize)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleInput {
    pub kind: EnsembleKind,
    pub index: usize,
    pub seed: u64,
    pub n_black: usize,
    pub config: Configuration,
}

/// The inputs used for one representative. Seeds depend only on the master
/// seed, the representative and the input index.
pub fn build_ensemble(cfg: &ExperimentConfig, representative: RuleCode) -> Result<Vec<EnsembleInput>> {
    let rep = representative.representative();
    let counts = density_counts(cfg.width, cfg.n_inputs);
    (0..cfg.n_inputs)
        .map(|index| {
            let seed = derive_seed(cfg.master_seed, rep.code(), index as u32, 0);
            let config = match cfg.ensemble {
                EnsembleKind::Random => random_input(cfg.width, seed)?,
                EnsembleKind::StructuredDensity => structured_input(cfg.width, counts[index], seed)?,
            };
            Ok(EnsembleInput {
                kind: cfg.ensemble,
                index,
                seed,
                n_black: config.count_black(),
                config,
            })
        })
        .collect()
}

pub fn patch_mean_te(rule: RuleCode, input: &Configuration, cfg: &ExperimentConfig) -> Result<MeanTe> {
    let field = SpacetimeField::evolve(input, rule, cfg.steps, cfg.burn_in)?;
    Ok(mean_te(&te_matrix(&field, &cfg.te)?))
}

/// Maximum patch TE over the allowed input transforms, with the arg-max.
/// Ties keep the earliest symmetry in `Symmetry::ALL` order.
pub fn symmetry_max_te(
    rule: RuleCode,
    input: &Configuration,
    cfg: &ExperimentConfig,
    allowed: &[Symmetry],
) -> Result<(MeanTe, Symmetry)> {
    let mut order = allowed.to_vec();
    order.sort_unstable();
    order.dedup();
    let mut best: Option<(MeanTe, Symmetry)> = None;
    for s in order {
        let te = patch_mean_te(rule, &input.transform(s), cfg)?;
        if best.is_none_or(|(b, _)| te.bits() > b.bits()) {
            best = Some((te, s));
        }
    }
    best.ok_or(Error::Empty)
}

/// Symmetries searched for the single-cell input, which is reflection symmetric.
pub const SINGLE_CELL_SYMMETRIES: [Symmetry; 2] = [Symmetry::Identity, Symmetry::Conjugate];

/// `max_r |te_r - te1| / max(te1, zero_floor)`.
pub fn max_normalized_change(te1: f64, te_r: &[f64], zero_floor: f64) -> f64 {
    let denom = te1.max(zero_floor);
    te_r.iter().map(|&r| (r - te1).abs() / denom).fold(0.0, f64::max)
}

/// High single-cell TE is I3; otherwise a change of at least the change
/// threshold is I2; everything else is I1.
///
/// With `te1` below the zero floor, any `te_r` above the TE threshold gives a
/// normalized change far beyond the change threshold, so such rules land in I2.
pub fn assign_class(te1: f64, max_change: f64, thresholds: &ClassificationThresholds) -> InfoClass {
    if te1 > thresholds.te_threshold {
        InfoClass::I3
    } else if max_change >= thresholds.change_threshold {
        InfoClass::I2
    } else {
        InfoClass::I1
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleCellResult {
    pub representative: RuleCode,
    pub te1: MeanTe,
    pub symmetry: Symmetry,
}

/// Largest single-cell TE over representatives labeled Wolfram I or II.
pub fn compute_te_threshold(singles: &[SingleCellResult], labels: &LabelTable<WolframClass>) -> Result<f64> {
    let mut threshold: Option<f64> = None;
    for s in singles {
        let class = labels
            .get(s.representative)
            .ok_or(Error::MissingLabel(s.representative.code()))?;
        if matches!(class, WolframClass::I | WolframClass::II) {
            threshold = Some(threshold.map_or(s.te1.bits(), |t| t.max(s.te1.bits())));
        }
    }
    threshold.ok_or(Error::Empty)
}

/// Single-cell pass over the given rules, in input order.
pub fn single_cell_pass(rules: &[RuleCode], cfg: &ExperimentConfig) -> Result<Vec<SingleCellResult>> {
    cfg.validate()?;
    let input = single_cell_input(cfg.width)?;
    rules
        .par_iter()
        .map(|&rule| {
            let (te1, symmetry) = symmetry_max_te(rule, &input, cfg, &SINGLE_CELL_SYMMETRIES)?;
            Ok(SingleCellResult {
                representative: rule,
                te1,
                symmetry,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleResult {
    pub rule: RuleCode,
    pub inputs: Vec<EnsembleInput>,
    pub te_r: Vec<MeanTe>,
    pub symmetries: Vec<Symmetry>,
}

/// Ensemble pass: every (rule, input) pair is an independent task; results are
/// reassembled in (rule, input) order.
pub fn ensemble_pass(rules: &[RuleCode], cfg: &ExperimentConfig) -> Result<Vec<EnsembleResult>> {
    cfg.validate()?;
    let ensembles: Vec<Vec<EnsembleInput>> = rules.iter().map(|&r| build_ensemble(cfg, r)).collect::<Result<_>>()?;
    let tasks: Vec<(usize, usize)> = (0..rules.len())
        .flat_map(|i| (0..cfg.n_inputs).map(move |j| (i, j)))
        .collect();
    let values: Vec<(MeanTe, Symmetry)> = tasks
        .par_iter()
        .map(|&(i, j)| symmetry_max_te(rules[i], &ensembles[i][j].config, cfg, &Symmetry::ALL))
        .collect::<Result<_>>()?;
    Ok(rules
        .iter()
        .zip(ensembles)
        .enumerate()
        .map(|(i, (&rule, inputs))| {
            let slice = &values[i * cfg.n_inputs..(i + 1) * cfg.n_inputs];
            EnsembleResult {
                rule,
                inputs,
                te_r: slice.iter().map(|v| v.0).collect(),
                symmetries: slice.iter().map(|v| v.1).collect(),
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationRecord {
    pub representative: RuleCode,
    pub wolfram_class: WolframClass,
    pub te1: MeanTe,
    pub te1_symmetry: Symmetry,
    pub te_r: Vec<MeanTe>,
    pub te_r_symmetries: Vec<Symmetry>,
    pub input_seeds: Vec<u64>,
    pub max_change: f64,
    pub info_class: InfoClass,
}

impl ClassificationRecord {
    pub fn te_r_min(&self) -> f64 {
        self.te_r.iter().map(|t| t.bits()).fold(f64::INFINITY, f64::min)
    }

    pub fn te_r_max(&self) -> f64 {
        self.te_r.iter().map(|t| t.bits()).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub ensemble: EnsembleKind,
    pub thresholds: ClassificationThresholds,
    pub records: Vec<ClassificationRecord>,
}

impl Classification {
    pub fn class_of(&self, rule: RuleCode) -> Option<InfoClass> {
        let rep = rule.representative();
        self.records
            .iter()
            .find(|r| r.representative == rep)
            .map(|r| r.info_class)
    }

    pub fn record(&self, rule: RuleCode) -> Option<&ClassificationRecord> {
        let rep = rule.representative();
        self.records.iter().find(|r| r.representative == rep)
    }

    pub fn members(&self, class: InfoClass) -> Vec<RuleCode> {
        self.records
            .iter()
            .filter(|r| r.info_class == class)
            .map(|r| r.representative)
            .collect()
    }

    /// Representatives with high single-cell TE that also change by at least
    /// the change threshold. Expected to be empty.
    pub fn l_shape_violations(&self) -> Vec<RuleCode> {
        self.records
            .iter()
            .filter(|r| r.te1.bits() > self.thresholds.te_threshold && r.max_change >= self.thresholds.change_threshold)
            .map(|r| r.representative)
            .collect()
    }
}

/// Combines a single-cell pass and an ensemble pass over the same rules.
pub fn combine(
    singles: &[SingleCellResult],
    ensemble: &[EnsembleResult],
    kind: EnsembleKind,
    labels: &LabelTable<WolframClass>,
    thresholds: ClassificationThresholds,
) -> Result<Classification> {
    let records = singles
        .iter()
        .zip(ensemble)
        .map(|(s, e)| {
            debug_assert_eq!(s.representative, e.rule);
            let te_r: Vec<f64> = e.te_r.iter().map(|t| t.bits()).collect();
            let max_change = max_normalized_change(s.te1.bits(), &te_r, thresholds.zero_floor);
            Ok(ClassificationRecord {
                representative: s.representative,
                wolfram_class: labels
                    .get(s.representative)
                    .ok_or(Error::MissingLabel(s.representative.code()))?,
                te1: s.te1,
                te1_symmetry: s.symmetry,
                te_r: e.te_r.clone(),
                te_r_symmetries: e.symmetries.clone(),
                input_seeds: e.inputs.iter().map(|i| i.seed).collect(),
                max_change,
                info_class: assign_class(s.te1.bits(), max_change, &thresholds),
            })
        })
        .collect::<Result<_>>()?;
    Ok(Classification {
        ensemble: kind,
        thresholds,
        records,
    })
}

/// Full classification of the 88 representatives with a run-derived TE threshold.
pub fn run_classification(cfg: &ExperimentConfig, labels: &LabelTable<WolframClass>) -> Result<Classification> {
    let reps = representatives();
    let singles = single_cell_pass(&reps, cfg)?;
    let threshold = compute_te_threshold(&singles, labels)?;
    let ensemble = ensemble_pass(&reps, cfg)?;
    combine(
        &singles,
        &ensemble,
        cfg.ensemble,
        labels,
        ClassificationThresholds::with_te_threshold(threshold),
    )
}

/// Classifies any rule (not only representatives) against fixed thresholds,
/// using its representative's ensemble seeds.
pub fn classify_rule(
    rule: RuleCode,
    cfg: &ExperimentConfig,
    thresholds: &ClassificationThresholds,
) -> Result<InfoClass> {
    cfg.validate()?;
    let (te1, _) = symmetry_max_te(rule, &single_cell_input(cfg.width)?, cfg, &SINGLE_CELL_SYMMETRIES)?;
    let te_r = build_ensemble(cfg, rule)?
        .iter()
        .map(|input| symmetry_max_te(rule, &input.config, cfg, &Symmetry::ALL).map(|v| v.0.bits()))
        .collect::<Result<Vec<f64>>>()?;
    let change = max_normalized_change(te1.bits(), &te_r, thresholds.zero_floor);
    Ok(assign_class(te1.bits(), change, thresholds))
}
