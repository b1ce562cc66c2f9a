//! The three worked Pac-Man tables, as plain text or CSV.

use std::fmt;
use std::str::FromStr;

use crate::decisions::DecisionRule;
use crate::error::{Error, Result};
use crate::outcomes::OutcomeSet;
use crate::perm::{ParameterVector, Permutation};
use crate::tendency::{counterexample_rows, counterexample_table, COUNTEREXAMPLE_SETS};

pub const PACMAN_OUTCOMES: [&str; 3] = ["ghost", "apple", "cherry"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableId {
    PermuteStates,
    Rationalities,
    Counterexample,
}

impl TableId {
    pub const ALL: [TableId; 3] = [
        TableId::PermuteStates,
        TableId::Rationalities,
        TableId::Counterexample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableId::PermuteStates => "permute-states",
            TableId::Rationalities => "rationalities",
            TableId::Counterexample => "counterexample",
        }
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown table `{s}`")))
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub id: TableId,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// First column left-aligned, the rest right-aligned, two-space gutters.
    pub fn to_text(&self) -> String {
        let cols = self.header.len();
        let width = |i: usize| {
            std::iter::once(&self.header)
                .chain(&self.rows)
                .map(|r| r[i].chars().count())
                .max()
                .unwrap_or(0)
        };
        let widths: Vec<usize> = (0..cols).map(width).collect();
        let line = |cells: &[String]| -> String {
            let mut out = String::new();
            for (i, cell) in cells.iter().enumerate() {
                let pad = widths[i] - cell.chars().count();
                if i == 0 {
                    out.push_str(cell);
                    out.push_str(&" ".repeat(pad));
                } else {
                    out.push_str("  ");
                    out.push_str(&" ".repeat(pad));
                    out.push_str(cell);
                }
            }
            out.trim_end().to_string()
        };
        let mut out = line(&self.header);
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (cols - 1)));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            writer.write_record(row).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
    }
}

/// Integers print bare; other values get three decimals with trailing zeros
/// and the leading zero dropped (`0.5` prints as `.5`).
pub fn format_cell(v: f64) -> String {
    if v.fract() == 0.0 {
        return format!("{}", v as i64);
    }
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    strip_leading_zero(s)
}

/// Three decimals kept as printed, so `0.00005` shows as `.000`; a value that
/// rounds to one prints as `1`.
pub fn format_rounded(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "1.000" {
        return "1".into();
    }
    if s == "-0.000" {
        return ".000".into();
    }
    strip_leading_zero(&s)
}

fn strip_leading_zero(s: &str) -> String {
    match s.strip_prefix("0.") {
        Some(rest) => format!(".{rest}"),
        None => match s.strip_prefix("-0.") {
            Some(rest) => format!("-.{rest}"),
            None => s.to_string(),
        },
    }
}

fn tuple(v: &ParameterVector) -> String {
    let parts: Vec<String> = v.as_slice().iter().map(|x| format_cell(*x)).collect();
    format!("({})", parts.join(","))
}

fn pacman_units() -> Result<(OutcomeSet, Vec<OutcomeSet>)> {
    let c = OutcomeSet::units("C", 3, &[0, 1, 2])?;
    let singles = (0..3)
        .map(|i| OutcomeSet::units(PACMAN_OUTCOMES[i], 3, &[i]))
        .collect::<Result<Vec<_>>>()?;
    Ok((c, singles))
}

fn permute_states() -> Result<Table> {
    let (c, singles) = pacman_units()?;
    let swaps = [
        ("ghost<->apple", Permutation::transposition(3, 0, 1)?),
        ("ghost<->cherry", Permutation::transposition(3, 0, 2)?),
    ];
    let mut rows = Vec::new();
    for (name, base) in [("u", [10, 5, 0]), ("u'", [10, 0, 5])] {
        let u = ParameterVector::from_ints(&base);
        let mut variants = vec![(name.to_string(), u.clone())];
        for (label, phi) in &swaps {
            variants.push((format!("({label}) {name}"), phi.act_vector(&u)?));
        }
        for (label, v) in variants {
            let mut row = vec![label];
            row.extend(v.as_slice().iter().map(|x| format_cell(*x)));
            let mut best = Vec::new();
            for (i, s) in singles.iter().enumerate() {
                if DecisionRule::Optimal.evaluate(s, &c, &v)? == 1.0 {
                    best.push(PACMAN_OUTCOMES[i]);
                }
            }
            row.push(best.join("/"));
            rows.push(row);
        }
    }
    let mut header = vec!["utility function".to_string()];
    header.extend(PACMAN_OUTCOMES.iter().map(|s| s.to_string()));
    header.push("argmax".into());
    Ok(Table {
        id: TableId::PermuteStates,
        header,
        rows,
    })
}

/// Column order of the rationalities table.
pub const RATIONALITY_COLUMNS: [[i64; 3]; 6] = [
    [10, 5, 0],
    [10, 0, 5],
    [5, 10, 0],
    [5, 0, 10],
    [0, 10, 5],
    [0, 5, 10],
];

type CellFormat = fn(f64) -> String;

fn rationalities() -> Result<Table> {
    let (c, singles) = pacman_units()?;
    let ghost_apple = singles[0].union(&singles[1])?.renamed("{ghost,apple}");
    let cherry = singles[2].clone().renamed("{cherry}");
    let rules: [(&str, DecisionRule, CellFormat); 4] = [
        ("Optimal", DecisionRule::Optimal, format_cell),
        ("AntiOptimal", DecisionRule::AntiOptimal, format_cell),
        (
            "Boltzmann[T=1]",
            DecisionRule::Boltzmann { temperature: 1.0 },
            format_rounded,
        ),
        (
            "Satisficer[t=3]",
            DecisionRule::Satisficer { threshold: 3.0 },
            format_cell,
        ),
    ];
    let columns: Vec<ParameterVector> = RATIONALITY_COLUMNS
        .iter()
        .map(|u| ParameterVector::from_ints(u))
        .collect();
    let mut rows = Vec::new();
    for (name, rule, fmt) in &rules {
        for x in [&ghost_apple, &cherry] {
            let mut row = vec![format!("{name}({} | C, u')", x.name())];
            for u in &columns {
                row.push(fmt(rule.evaluate(x, &c, u)?));
            }
            rows.push(row);
        }
    }
    let mut header = vec!["f(X | C, u')".to_string()];
    header.extend(columns.iter().map(tuple));
    Ok(Table {
        id: TableId::Rationalities,
        header,
        rows,
    })
}

fn counterexample() -> Result<Table> {
    let f = counterexample_table();
    let mut rows = Vec::new();
    for (label, theta) in counterexample_rows() {
        let mut row = vec![format!("{label} = {}", tuple(&theta))];
        for set in COUNTEREXAMPLE_SETS {
            let v = f.get(set, &theta).ok_or_else(|| Error::MissingTableEntry {
                set: set.into(),
                theta: theta.clone().into_inner(),
            })?;
            row.push(format_cell(v));
        }
        rows.push(row);
    }
    let mut header = vec!["theta".to_string()];
    header.extend(COUNTEREXAMPLE_SETS.iter().map(|s| format!("f({{{s}}})")));
    Ok(Table {
        id: TableId::Counterexample,
        header,
        rows,
    })
}

pub fn reproduce_table(id: TableId) -> Result<Table> {
    match id {
        TableId::PermuteStates => permute_states(),
        TableId::Rationalities => rationalities(),
        TableId::Counterexample => counterexample(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_formats() {
        assert_eq!(format_cell(1.0), "1");
        assert_eq!(format_cell(0.0), "0");
        assert_eq!(format_cell(0.5), ".5");
        assert_eq!(format_cell(2.0), "2");
        assert_eq!(format_cell(-3.0), "-3");
        assert_eq!(format_rounded(0.99995), "1");
        assert_eq!(format_rounded(4.5e-5), ".000");
        assert_eq!(format_rounded(0.00669), ".007");
        assert_eq!(format_rounded(0.9933), ".993");
    }

    #[test]
    fn ids_parse() {
        for id in TableId::ALL {
            assert_eq!(id.name().parse::<TableId>().unwrap(), id);
        }
        assert!("table4".parse::<TableId>().is_err());
    }

    #[test]
    fn argmax_column() {
        let t = reproduce_table(TableId::PermuteStates).unwrap();
        let argmax: Vec<&str> = t.rows.iter().map(|r| r[4].as_str()).collect();
        assert_eq!(
            argmax,
            ["ghost", "apple", "cherry", "ghost", "apple", "cherry"]
        );
    }

    #[test]
    fn boltzmann_rows() {
        let t = reproduce_table(TableId::Rationalities).unwrap();
        assert_eq!(t.rows[4][1..], ["1", ".993", "1", ".007", ".993", ".007"]);
        assert_eq!(
            t.rows[5][1..],
            [".000", ".007", ".000", ".993", ".007", ".993"]
        );
    }
}
