//! Male/female first-name pairing.
//!
//! Each name is placed in a plane by (primary-gender count, secondary-gender
//! count). Male-primary and female-primary names are matched one-to-one by
//! minimum total Euclidean distance in that plane, which balances frequency
//! against gender-specificity.

pub mod hungarian;

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::text::titlecase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameRecord {
    pub name: String,
    pub male_count: u64,
    pub female_count: u64,
}

impl NameRecord {
    pub fn total(&self) -> u64 {
        self.male_count + self.female_count
    }

    /// Primary gender is the more frequent one; exact ties count as male.
    pub fn plane_point(&self) -> (PlanePoint, Gender) {
        if self.male_count >= self.female_count {
            (
                PlanePoint {
                    primary: self.male_count as f64,
                    secondary: self.female_count as f64,
                },
                Gender::Male,
            )
        } else {
            (
                PlanePoint {
                    primary: self.female_count as f64,
                    secondary: self.male_count as f64,
                },
                Gender::Female,
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub primary: f64,
    pub secondary: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisTransform {
    Raw,
    #[default]
    Log1p,
}

impl AxisTransform {
    fn apply(self, p: PlanePoint) -> (f64, f64) {
        match self {
            AxisTransform::Raw => (p.primary, p.secondary),
            AxisTransform::Log1p => (p.primary.ln_1p(), p.secondary.ln_1p()),
        }
    }
}

/// Per-name counts aggregated over all input rows. Names are Titlecased.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NameTable {
    records: BTreeMap<String, NameRecord>,
}

impl NameTable {
    pub fn add(&mut self, name: &str, gender: Gender, count: u64) {
        let name = titlecase(name.trim());
        let rec = self
            .records
            .entry(name.clone())
            .or_insert_with(|| NameRecord {
                name,
                male_count: 0,
                female_count: 0,
            });
        match gender {
            Gender::Male => rec.male_count += count,
            Gender::Female => rec.female_count += count,
        }
    }

    pub fn get(&self, name: &str) -> Option<&NameRecord> {
        self.records.get(&titlecase(name))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records with a positive total, in name order.
    pub fn records(&self) -> impl Iterator<Item = &NameRecord> {
        self.records.values().filter(|r| r.total() > 0)
    }

    /// Reads `name,sex,count` rows. A header line is detected by a
    /// non-numeric count field and skipped.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut table = NameTable::default();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::parse(line_no, "expected 'name,sex,count'"));
            }
            let count = match fields[2].parse::<u64>() {
                Ok(c) => c,
                Err(_) if line_no == 1 => continue,
                Err(_) => {
                    return Err(Error::parse(line_no, format!("bad count '{}'", fields[2])))
                }
            };
            let gender = match fields[1] {
                "M" | "m" => Gender::Male,
                "F" | "f" => Gender::Female,
                other => return Err(Error::parse(line_no, format!("unknown sex code '{other}'"))),
            };
            if fields[0].is_empty() {
                return Err(Error::parse(line_no, "empty name"));
            }
            table.add(fields[0], gender, count);
        }
        Ok(table)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for r in self.records() {
            if r.male_count > 0 {
                writeln!(w, "{},M,{}", r.name, r.male_count)?;
            }
            if r.female_count > 0 {
                writeln!(w, "{},F,{}", r.name, r.female_count)?;
            }
        }
        Ok(())
    }
}

pub fn build_cost_matrix(
    males: &[PlanePoint],
    females: &[PlanePoint],
    transform: AxisTransform,
) -> Result<Vec<f64>> {
    if males.len() != females.len() || males.is_empty() {
        return Err(Error::invalid(format!(
            "need equal, non-empty name lists (got {} and {})",
            males.len(),
            females.len()
        )));
    }
    let f: Vec<(f64, f64)> = females.iter().map(|p| transform.apply(*p)).collect();
    let rows = par::map(males, |m| {
        let (mx, my) = transform.apply(*m);
        f.iter()
            .map(|(fx, fy)| ((mx - fx).powi(2) + (my - fy).powi(2)).sqrt())
            .collect::<Vec<_>>()
    });
    Ok(rows.concat())
}

/// Fixed symmetric male/female name bijection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NamePairing {
    pairs: Vec<(String, String)>,
    lookup: HashMap<String, String>,
}

impl NamePairing {
    pub fn new(pairs: Vec<(String, String)>) -> Result<Self> {
        let mut lookup = HashMap::with_capacity(pairs.len() * 2);
        for (m, f) in &pairs {
            if m == f {
                return Err(Error::invalid(format!("'{m}' paired with itself")));
            }
            for (a, b) in [(m, f), (f, m)] {
                if lookup.insert(a.clone(), b.clone()).is_some() {
                    return Err(Error::Duplicate(a.clone()));
                }
            }
        }
        Ok(Self { pairs, lookup })
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn counterpart(&self, name: &str) -> Option<&str> {
        self.lookup.get(name).map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup.contains_key(name)
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(m), Some(f), None) if !m.is_empty() && !f.is_empty() => {
                    pairs.push((m.to_string(), f.to_string()))
                }
                _ => return Err(Error::parse(i + 1, "expected 'male<TAB>female'")),
            }
        }
        Self::new(pairs)
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for (m, f) in &self.pairs {
            writeln!(w, "{m}\t{f}")?;
        }
        Ok(())
    }
}

/// Most frequent `n` names per primary gender, by total count then name.
fn top_names(table: &NameTable, gender: Gender, n: usize) -> Vec<(&NameRecord, PlanePoint)> {
    let mut group: Vec<(&NameRecord, PlanePoint)> = table
        .records()
        .filter_map(|r| {
            let (p, g) = r.plane_point();
            (g == gender).then_some((r, p))
        })
        .collect();
    group.sort_by(|a, b| b.0.total().cmp(&a.0.total()).then(a.0.name.cmp(&b.0.name)));
    group.truncate(n);
    group
}

/// Pairs the `n_per_gender` most frequent names of each primary gender.
/// The result is ordered by descending male-name total count.
pub fn match_names(
    table: &NameTable,
    n_per_gender: usize,
    transform: AxisTransform,
) -> Result<NamePairing> {
    let males = top_names(table, Gender::Male, n_per_gender);
    let females = top_names(table, Gender::Female, n_per_gender);
    if n_per_gender == 0 || males.len() < n_per_gender || females.len() < n_per_gender {
        return Err(Error::invalid(format!(
            "need {n_per_gender} names per gender; table has {} male-primary and {} female-primary",
            males.len(),
            females.len()
        )));
    }
    let mp: Vec<PlanePoint> = males.iter().map(|(_, p)| *p).collect();
    let fp: Vec<PlanePoint> = females.iter().map(|(_, p)| *p).collect();
    let cost = build_cost_matrix(&mp, &fp, transform)?;
    let assignment = hungarian::solve(&cost, n_per_gender)?;
    let pairs = males
        .iter()
        .zip(&assignment.columns)
        .map(|((m, _), &j)| (m.name.clone(), females[j].0.name.clone()))
        .collect();
    NamePairing::new(pairs)
}
