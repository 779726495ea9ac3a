//! Per-language entity tables: surface forms grouped by mask category.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Entity category, one per mask token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MaskCategory {
    /// Target groups.
    G,
    /// Target individuals.
    I,
    /// Target countries.
    CT,
    /// Hate terms.
    HT,
    /// Political groups.
    P,
    /// Countries mentioned without being the target.
    NT,
}

impl MaskCategory {
    pub const ALL: [MaskCategory; 6] = [
        MaskCategory::G,
        MaskCategory::I,
        MaskCategory::CT,
        MaskCategory::HT,
        MaskCategory::P,
        MaskCategory::NT,
    ];

    /// Default overlap tie-break order.
    pub const DEFAULT_PRIORITY: [MaskCategory; 6] = [
        MaskCategory::HT,
        MaskCategory::I,
        MaskCategory::G,
        MaskCategory::CT,
        MaskCategory::P,
        MaskCategory::NT,
    ];

    pub fn code(self) -> &'static str {
        match self {
            MaskCategory::G => "G",
            MaskCategory::I => "I",
            MaskCategory::CT => "CT",
            MaskCategory::HT => "HT",
            MaskCategory::P => "P",
            MaskCategory::NT => "NT",
        }
    }

    pub fn mask_token(self) -> &'static str {
        match self {
            MaskCategory::G => "<MASK-G>",
            MaskCategory::I => "<MASK-I>",
            MaskCategory::CT => "<MASK-CT>",
            MaskCategory::HT => "<MASK-HT>",
            MaskCategory::P => "<MASK-P>",
            MaskCategory::NT => "<MASK-NT>",
        }
    }

    pub fn from_mask_token(token: &str) -> Option<MaskCategory> {
        MaskCategory::ALL.into_iter().find(|c| c.mask_token() == token)
    }
}

impl fmt::Display for MaskCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for MaskCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MaskCategory::ALL
            .into_iter()
            .find(|c| c.code() == s)
            .ok_or_else(|| format!("unknown category code {s:?}"))
    }
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("line {line}: unknown category code {code:?}")]
    UnknownCategory { line: u64, code: String },
    #[error("line {line}: empty surface")]
    EmptySurface { line: u64 },
    #[error("duplicate surfaces: {}", format_duplicates(.0))]
    Duplicates(Vec<(MaskCategory, String)>),
    #[error("no built-in table for language {0:?}")]
    UnknownLanguage(String),
}

fn format_duplicates(dups: &[(MaskCategory, String)]) -> String {
    dups.iter()
        .map(|(c, s)| format!("{c}:{s}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Gazetteer for one language. Every category key is always present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityTable {
    pub lang: String,
    entries: BTreeMap<MaskCategory, Vec<String>>,
}

impl EntityTable {
    pub fn empty(lang: impl Into<String>) -> Self {
        EntityTable {
            lang: lang.into(),
            entries: MaskCategory::ALL.into_iter().map(|c| (c, Vec::new())).collect(),
        }
    }

    /// Builds a table from (category, surface) pairs, enforcing the table invariants.
    pub fn from_entries<I, S>(lang: impl Into<String>, entries: I) -> Result<Self, TableError>
    where
        I: IntoIterator<Item = (MaskCategory, S)>,
        S: Into<String>,
    {
        let mut table = EntityTable::empty(lang);
        let mut dups = Vec::new();
        for (idx, (category, surface)) in entries.into_iter().enumerate() {
            let surface = surface.into().trim().to_string();
            if surface.is_empty() {
                return Err(TableError::EmptySurface { line: idx as u64 + 1 });
            }
            let list = table.entries.get_mut(&category).expect("all categories present");
            if list.contains(&surface) {
                dups.push((category, surface));
            } else {
                list.push(surface);
            }
        }
        if dups.is_empty() {
            Ok(table)
        } else {
            Err(TableError::Duplicates(dups))
        }
    }

    pub fn surfaces(&self, category: MaskCategory) -> &[String] {
        &self.entries[&category]
    }

    pub fn iter(&self) -> impl Iterator<Item = (MaskCategory, &str)> {
        self.entries
            .iter()
            .flat_map(|(c, list)| list.iter().map(move |s| (*c, s.as_str())))
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(["category", "surface"]).unwrap();
        for (category, surface) in self.iter() {
            writer.write_record([category.code(), surface]).unwrap();
        }
        String::from_utf8(writer.into_inner().unwrap()).unwrap()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), TableError> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|source| TableError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Parses the CSV entity-table format (`category,surface`, `#` comments).
pub fn parse_entity_table(lang: &str, text: &str) -> Result<EntityTable, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| TableError::Csv {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let code = record.get(0).unwrap_or("");
        let category: MaskCategory = code.parse().map_err(|_| TableError::UnknownCategory {
            line,
            code: code.to_string(),
        })?;
        let surface = record.get(1).unwrap_or("").trim();
        if surface.is_empty() {
            return Err(TableError::EmptySurface { line });
        }
        pairs.push((category, surface.to_string()));
    }
    EntityTable::from_entries(lang, pairs)
}

/// Loads a table file. The language tag is taken from the file stem
/// (`hi.csv` -> `hi`).
pub fn load_entity_table(path: impl AsRef<Path>) -> Result<EntityTable, TableError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| TableError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let lang = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default();
    parse_entity_table(lang, &text)
}

const BUILTIN_EN: &str = include_str!("../data/tables/en.csv");
const BUILTIN_HI: &str = include_str!("../data/tables/hi.csv");
const BUILTIN_VI: &str = include_str!("../data/tables/vi.csv");

/// Example tables shipped with the crate for `en`, `hi` and `vi`.
pub fn builtin(lang: &str) -> Result<EntityTable, TableError> {
    let text = match lang {
        "en" => BUILTIN_EN,
        "hi" => BUILTIN_HI,
        "vi" => BUILTIN_VI,
        other => return Err(TableError::UnknownLanguage(other.to_string())),
    };
    parse_entity_table(lang, text)
}

pub type TableStats = BTreeMap<MaskCategory, usize>;

pub fn table_stats(table: &EntityTable) -> TableStats {
    MaskCategory::ALL
        .into_iter()
        .map(|c| (c, table.surfaces(c).len()))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    /// Categories with source entries but no target entries.
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty() && self.warnings.is_empty()
    }
}

/// Checks that every category masked in the source can be substituted from
/// the target, and warns about surfaces filed under more than one category.
pub fn validate_pair(source: &EntityTable, target: &EntityTable) -> ValidationReport {
    let mut report = ValidationReport::default();
    for category in MaskCategory::ALL {
        if !source.surfaces(category).is_empty() && target.surfaces(category).is_empty() {
            report.errors.push(format!(
                "category {category} has {} source entries but no target entries",
                source.surfaces(category).len()
            ));
        }
    }
    for (side, table) in [("source", source), ("target", target)] {
        let mut homes: BTreeMap<&str, Vec<MaskCategory>> = BTreeMap::new();
        for (category, surface) in table.iter() {
            homes.entry(surface).or_default().push(category);
        }
        for (surface, cats) in homes.into_iter().filter(|(_, c)| c.len() > 1) {
            let codes: Vec<&str> = cats.iter().map(|c| c.code()).collect();
            report.warnings.push(format!(
                "{side} surface {surface:?} appears in categories {}",
                codes.join(", ")
            ));
        }
    }
    report
}

/// Case-folded lookup from surface to category, used by attribution.
pub fn folded_surfaces(table: &EntityTable) -> HashMap<String, MaskCategory> {
    table.iter().map(|(c, s)| (s.to_lowercase(), c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn top_three(lang: &str) -> (usize, usize, usize) {
        let stats = table_stats(&builtin(lang).unwrap());
        (stats[&MaskCategory::HT], stats[&MaskCategory::G], stats[&MaskCategory::I])
    }

    #[test]
    fn builtin_tables_match_published_counts() {
        assert_eq!(top_three("en"), (56, 140, 24));
        assert_eq!(top_three("hi"), (19, 21, 28));
        assert_eq!(top_three("vi"), (23, 26, 13));
    }

    #[test]
    fn unknown_category_is_rejected() {
        let err = parse_entity_table("en", "category,surface\nXX,foo\n").unwrap_err();
        assert!(matches!(err, TableError::UnknownCategory { ref code, .. } if code == "XX"));
    }

    #[test]
    fn duplicates_are_all_listed() {
        let text = "category,surface\nHT,a\nHT,a\nG,b\nG,b\nG,c\n";
        match parse_entity_table("en", text).unwrap_err() {
            TableError::Duplicates(d) => assert_eq!(
                d,
                vec![(MaskCategory::HT, "a".to_string()), (MaskCategory::G, "b".to_string())]
            ),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn empty_surface_is_rejected() {
        let err = parse_entity_table("en", "category,surface\nHT,\n").unwrap_err();
        assert!(matches!(err, TableError::EmptySurface { .. }));
    }

    #[test]
    fn comments_and_multiword_surfaces() {
        let text = "# curated list\ncategory,surface\n# groups\nP,\"party, national\"\nI,Bhagat Singh\n";
        let table = parse_entity_table("hi", text).unwrap();
        assert_eq!(table.surfaces(MaskCategory::P), ["party, national"]);
        assert_eq!(table.surfaces(MaskCategory::I), ["Bhagat Singh"]);
    }

    #[test]
    fn stats_of_small_tables() {
        assert!(table_stats(&EntityTable::empty("x")).values().all(|&n| n == 0));
        let one_each = EntityTable::from_entries(
            "x",
            MaskCategory::ALL.into_iter().map(|c| (c, format!("s{}", c.code()))),
        )
        .unwrap();
        assert!(table_stats(&one_each).values().all(|&n| n == 1));
    }

    #[test]
    fn csv_round_trip() {
        let table = builtin("hi").unwrap();
        let again = parse_entity_table("hi", &table.to_csv()).unwrap();
        assert_eq!(table, again);
    }

    #[test]
    fn stats_match_raw_line_counts() {
        for lang in ["en", "hi", "vi"] {
            let raw = match lang {
                "en" => BUILTIN_EN,
                "hi" => BUILTIN_HI,
                _ => BUILTIN_VI,
            };
            let stats = table_stats(&builtin(lang).unwrap());
            for category in MaskCategory::ALL {
                let prefix = format!("{},", category.code());
                let lines = raw.lines().filter(|l| l.starts_with(&prefix)).count();
                assert_eq!(stats[&category], lines, "{lang} {category}");
            }
        }
    }

    #[test]
    fn validate_pair_reports() {
        let source = EntityTable::from_entries("en", [(MaskCategory::P, "party"), (MaskCategory::HT, "x")]).unwrap();
        let target = EntityTable::from_entries("hi", [(MaskCategory::HT, "y")]).unwrap();
        let report = validate_pair(&source, &target);
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0].contains("category P"));

        assert!(validate_pair(&source, &source).is_empty());

        let dup = EntityTable::from_entries(
            "hi",
            [(MaskCategory::I, "Owaisi"), (MaskCategory::P, "Owaisi"), (MaskCategory::HT, "y")],
        )
        .unwrap();
        let report = validate_pair(&dup, &dup);
        assert!(report.is_ok());
        assert!(report.warnings.iter().any(|w| w.contains("Owaisi")));
    }
}
