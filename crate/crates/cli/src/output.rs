//! Text outputs: classification table, figure point files, space-time dumps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use eca_infodyn_core::classify::{Classification, InfoClass, SingleCellResult};
use eca_infodyn_core::{RuleCode, SpacetimeField};

pub const CLASSIFICATION_FILE: &str = "classification.csv";
pub const FIG1A_FILE: &str = "fig1a_single_cell.csv";
pub const FIG1B_FILE: &str = "fig1b_random_input.csv";
pub const FIG2_FILE: &str = "fig2_change_vs_te1.csv";

pub const CLASSIFICATION_HEADER: &str =
    "representative,wolfram_class,te1_bits,te_r_min,te_r_max,max_norm_change,info_class,chosen_symmetries";

/// One row per record; symmetries are `single|input0;input1;...`.
pub fn classification_csv(c: &Classification) -> String {
    let mut out = String::from(CLASSIFICATION_HEADER);
    out.push('\n');
    for r in &c.records {
        let ensemble: Vec<&str> = r.te_r_symmetries.iter().map(|s| s.name()).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}|{}",
            r.representative,
            r.wolfram_class,
            r.te1.bits(),
            r.te_r_min(),
            r.te_r_max(),
            r.max_change,
            r.info_class,
            r.te1_symmetry.name(),
            ensemble.join(";")
        )
        .expect("writing to String");
    }
    out
}

pub fn single_cell_csv(singles: &[SingleCellResult]) -> String {
    let mut out = String::from("rule,te_bits\n");
    for s in singles {
        writeln!(out, "{},{}", s.representative, s.te1.bits()).expect("writing to String");
    }
    out
}

/// Patch TE for the first ensemble input of each record.
pub fn first_input_csv(c: &Classification) -> String {
    let mut out = String::from("rule,te_bits\n");
    for r in &c.records {
        if let Some(te) = r.te_r.first() {
            writeln!(out, "{},{}", r.representative, te.bits()).expect("writing to String");
        }
    }
    out
}

pub fn change_csv(c: &Classification) -> String {
    let mut out = String::from("rule,te1_bits,max_norm_change\n");
    for r in &c.records {
        writeln!(out, "{},{},{}", r.representative, r.te1.bits(), r.max_change).expect("writing to String");
    }
    out
}

/// Reads `representative -> info_class` from a classification CSV.
pub fn read_classification(path: &Path) -> Result<BTreeMap<RuleCode, InfoClass>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let cols: Vec<&str> = header.split(',').collect();
    let (Some(rep_col), Some(class_col)) = (
        cols.iter().position(|&c| c == "representative"),
        cols.iter().position(|&c| c == "info_class"),
    ) else {
        bail!("{} lacks representative/info_class columns", path.display());
    };
    let mut map = BTreeMap::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        let get = |c: usize| {
            fields
                .get(c)
                .copied()
                .with_context(|| format!("{} line {}: missing column", path.display(), i + 2))
        };
        let rule: RuleCode = get(rep_col)?.parse()?;
        let class: InfoClass = get(class_col)?.parse()?;
        map.insert(rule.representative(), class);
    }
    Ok(map)
}

pub fn field_text(field: &SpacetimeField) -> String {
    let mut out = String::with_capacity(field.rows().len() * (field.width() + 1));
    for row in field.rows() {
        out.push_str(&row.to_string());
        out.push('\n');
    }
    out
}

pub const PACKED_MAGIC: [u8; 4] = *b"ECAF";

/// 16-byte header (magic, width, steps, flags; little-endian u32s; the low
/// byte of flags is the rule) followed by one `ceil(width / 8)`-byte row per
/// time step, cell `i` at bit `i % 8` of byte `i / 8`.
pub fn field_packed(field: &SpacetimeField) -> Vec<u8> {
    let width = field.width();
    let row_bytes = width.div_ceil(8);
    let mut out = Vec::with_capacity(16 + row_bytes * field.rows().len());
    out.extend_from_slice(&PACKED_MAGIC);
    out.extend_from_slice(&(width as u32).to_le_bytes());
    out.extend_from_slice(&(field.steps() as u32).to_le_bytes());
    out.extend_from_slice(&(field.rule().code() as u32).to_le_bytes());
    for row in field.rows() {
        let mut bytes = vec![0u8; row_bytes];
        for i in (0..width).filter(|&i| row.get(i)) {
            bytes[i / 8] |= 1 << (i % 8);
        }
        out.extend_from_slice(&bytes);
    }
    out
}
