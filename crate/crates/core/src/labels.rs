//! Bundled label tables keyed by equivalence-class representative.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::classify::InfoClass;
use crate::eca::{representatives, RuleCode};
use crate::error::{Error, Result};

pub const WOLFRAM_CLASSES: &str = include_str!("../assets/wolfram_classes.txt");
pub const REFERENCE_INFO_CLASSES: &str = include_str!("../assets/reference_info_classes.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WolframClass {
    I,
    II,
    III,
    IV,
}

impl WolframClass {
    pub fn as_str(self) -> &'static str {
        match self {
            WolframClass::I => "I",
            WolframClass::II => "II",
            WolframClass::III => "III",
            WolframClass::IV => "IV",
        }
    }
}

impl fmt::Display for WolframClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WolframClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" => Ok(WolframClass::I),
            "II" => Ok(WolframClass::II),
            "III" => Ok(WolframClass::III),
            "IV" => Ok(WolframClass::IV),
            other => Err(Error::Parse(format!("unknown Wolfram class {other:?}"))),
        }
    }
}

/// A `rule -> label` table over representatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelTable<T> {
    labels: BTreeMap<RuleCode, T>,
}

impl<T: Copy> LabelTable<T> {
    pub fn get(&self, rule: RuleCode) -> Option<T> {
        self.labels.get(&rule.representative()).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (RuleCode, T)> + '_ {
        self.labels.iter().map(|(&r, &t)| (r, t))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn members(&self, label: T) -> Vec<RuleCode>
    where
        T: PartialEq,
    {
        self.iter().filter(|&(_, t)| t == label).map(|(r, _)| r).collect()
    }
}

impl<T: Copy + FromStr<Err = Error>> LabelTable<T> {
    /// Parses `<rule> <label>` lines; `#` starts a comment. Every key must be a
    /// representative and every representative must be present.
    pub fn parse(text: &str) -> Result<Self> {
        let mut labels = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(rule), Some(label), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("line {}: expected `<rule> <label>`", lineno + 1)));
            };
            let rule: RuleCode = rule.parse()?;
            if !rule.is_representative() {
                return Err(Error::Parse(format!(
                    "line {}: rule {rule} is not a class representative",
                    lineno + 1
                )));
            }
            if labels.insert(rule, label.parse()?).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate rule {rule}", lineno + 1)));
            }
        }
        if let Some(missing) = representatives().into_iter().find(|r| !labels.contains_key(r)) {
            return Err(Error::MissingLabel(missing.code()));
        }
        Ok(Self { labels })
    }
}

pub fn wolfram_labels() -> LabelTable<WolframClass> {
    LabelTable::parse(WOLFRAM_CLASSES).expect("bundled Wolfram table is valid")
}

pub fn reference_classification() -> LabelTable<InfoClass> {
    LabelTable::parse(REFERENCE_INFO_CLASSES).expect("bundled reference table is valid")
}
