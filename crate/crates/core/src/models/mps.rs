//! MPS text export and import.
//!
//! The fixed layout limits names to 8 characters, so columns and rows are
//! renamed `C0000001`, `R0000001`, ... and the mapping back to model names is
//! returned next to the text. The free layout keeps model names.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{MipModel, Sense, VarKind, Variable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MpsFormat {
    Fixed,
    Free,
}

impl std::str::FromStr for MpsFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mps" | "fixed" => Ok(Self::Fixed),
            "free" | "free-mps" => Ok(Self::Free),
            other => Err(Error::Unsupported(format!("model format {other}"))),
        }
    }
}

/// Short name to model name, in emission order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameMap {
    pub columns: Vec<(String, String)>,
    pub rows: Vec<(String, String)>,
}

impl NameMap {
    fn lookup(pairs: &[(String, String)]) -> HashMap<&str, &str> {
        pairs.iter().map(|(s, l)| (s.as_str(), l.as_str())).collect()
    }
}

const OBJ: &str = "OBJ";

/// Writes `model` as MPS text. The map is empty for the free layout.
pub fn export_model(model: &MipModel, format: MpsFormat) -> (String, NameMap) {
    let mut map = NameMap::default();
    let (cols, rows): (Vec<String>, Vec<String>) = match format {
        MpsFormat::Free => (
            model.vars.iter().map(|v| v.name.clone()).collect(),
            model.rows.iter().map(|r| r.name.clone()).collect(),
        ),
        MpsFormat::Fixed => {
            let cols: Vec<String> = (0..model.vars.len()).map(|i| format!("C{:07}", i + 1)).collect();
            let rows: Vec<String> = (0..model.rows.len()).map(|i| format!("R{:07}", i + 1)).collect();
            map.columns = cols.iter().cloned().zip(model.vars.iter().map(|v| v.name.clone())).collect();
            map.rows = rows.iter().cloned().zip(model.rows.iter().map(|r| r.name.clone())).collect();
            (cols, rows)
        }
    };
    let field = |s: &str| match format {
        MpsFormat::Fixed => format!("{s:<8}"),
        MpsFormat::Free => s.to_string(),
    };
    let num = |x: f64| {
        let s = format!("{x}");
        match format {
            MpsFormat::Fixed => format!("{s:>12}"),
            MpsFormat::Free => s,
        }
    };
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.vars.len()];
    for (ri, r) in model.rows.iter().enumerate() {
        for &(j, c) in &r.coeffs {
            by_col[j].push((ri, c));
        }
    }

    let mut out = String::new();
    let name = if model.name.is_empty() { "MODEL" } else { model.name.as_str() };
    let _ = writeln!(out, "NAME          {name}");
    out += "ROWS\n";
    let _ = writeln!(out, " N  {OBJ}");
    for (r, n) in model.rows.iter().zip(&rows) {
        let s = match r.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(out, " {s}  {n}");
    }
    out += "COLUMNS\n";
    let mut in_int = false;
    for (j, v) in model.vars.iter().enumerate() {
        let is_int = v.kind == VarKind::Binary;
        if is_int != in_int {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    {}  'MARKER'                 {tag}", field("MARKER"));
            in_int = is_int;
        }
        let mut entries: Vec<(&str, f64)> = Vec::new();
        if v.objective != 0.0 {
            entries.push((OBJ, v.objective));
        }
        for &(ri, c) in &by_col[j] {
            entries.push((rows[ri].as_str(), c));
        }
        if entries.is_empty() {
            // keep the column declared
            entries.push((OBJ, 0.0));
        }
        for pair in entries.chunks(2) {
            let mut line = format!("    {}  {}  {}", field(&cols[j]), field(pair[0].0), num(pair[0].1));
            if let Some(&(rn, c)) = pair.get(1) {
                let _ = write!(line, "   {}  {}", field(rn), num(c));
            }
            out += line.trim_end();
            out += "\n";
        }
    }
    if in_int {
        let _ = writeln!(out, "    {}  'MARKER'                 'INTEND'", field("MARKER"));
    }
    out += "RHS\n";
    for (r, n) in model.rows.iter().zip(&rows) {
        if r.rhs != 0.0 {
            let _ = writeln!(out, "    {}  {}  {}", field("RHS"), field(n), num(r.rhs));
        }
    }
    out += "BOUNDS\n";
    for (v, n) in model.vars.iter().zip(&cols) {
        match v.kind {
            VarKind::Binary => {
                let _ = writeln!(out, " BV {}  {}", field("BND"), field(n));
            }
            VarKind::Continuous => {
                if v.lower != 0.0 {
                    let _ = writeln!(out, " LO {}  {}  {}", field("BND"), field(n), num(v.lower));
                }
                if v.upper.is_finite() {
                    let _ = writeln!(out, " UP {}  {}  {}", field("BND"), field(n), num(v.upper));
                }
            }
        }
    }
    out += "ENDATA\n";
    (out, map)
}

/// Parses MPS text from either layout. With a map, short names are translated
/// back to model names. The makespan column is the one with a nonzero
/// objective coefficient.
pub fn import_model(text: &str, map: Option<&NameMap>) -> Result<MipModel> {
    let col_names = map.map(|m| NameMap::lookup(&m.columns)).unwrap_or_default();
    let row_names = map.map(|m| NameMap::lookup(&m.rows)).unwrap_or_default();
    let col_name = |s: &str| col_names.get(s).map_or_else(|| s.to_string(), |l| l.to_string());
    let row_name = |s: &str| row_names.get(s).map_or_else(|| s.to_string(), |l| l.to_string());
    let bad = |line: usize, msg: &str| Error::Mps(format!("line {}: {msg}", line + 1));
    let parse = |line: usize, s: &str| s.parse::<f64>().map_err(|_| bad(line, &format!("bad number {s}")));

    let mut model = MipModel::new("");
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut obj_row = String::new();
    let mut section = "";
    let mut in_int = false;
    let mut marked_int: Vec<bool> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let tok: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') {
            section = match tok[0] {
                "NAME" => {
                    model.name = tok.get(1).unwrap_or(&"").to_string();
                    "NAME"
                }
                "ROWS" => "ROWS",
                "COLUMNS" => "COLUMNS",
                "RHS" => "RHS",
                "BOUNDS" => "BOUNDS",
                "RANGES" => return Err(bad(ln, "RANGES section is not supported")),
                "ENDATA" => break,
                other => return Err(bad(ln, &format!("unknown section {other}"))),
            };
            continue;
        }
        match section {
            "ROWS" => {
                let [s, n] = tok[..] else { return Err(bad(ln, "expected sense and name")) };
                let sense = match s {
                    "N" => {
                        if obj_row.is_empty() {
                            obj_row = n.to_string();
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    _ => return Err(bad(ln, &format!("unknown row sense {s}"))),
                };
                row_index.insert(n.to_string(), model.rows.len());
                model.add_row(row_name(n), Vec::new(), sense, 0.0);
            }
            "COLUMNS" => {
                if tok.len() >= 3 && tok[1] == "'MARKER'" {
                    in_int = tok[2] == "'INTORG'";
                    continue;
                }
                if tok.len() != 3 && tok.len() != 5 {
                    return Err(bad(ln, "expected 3 or 5 fields"));
                }
                let j = *col_index.entry(tok[0].to_string()).or_insert_with(|| {
                    marked_int.push(in_int);
                    model.add_var(
                        Variable {
                            name: col_name(tok[0]),
                            kind: VarKind::Continuous,
                            lower: 0.0,
                            upper: f64::INFINITY,
                            objective: 0.0,
                        },
                        None,
                    )
                });
                for pair in tok[1..].chunks(2) {
                    let c = parse(ln, pair[1])?;
                    if pair[0] == obj_row {
                        model.vars[j].objective = c;
                    } else {
                        let ri = *row_index.get(pair[0]).ok_or_else(|| bad(ln, "unknown row"))?;
                        model.rows[ri].coeffs.push((j, c));
                    }
                }
            }
            "RHS" => {
                let pairs = if tok.len() % 2 == 1 { &tok[1..] } else { &tok[..] };
                for pair in pairs.chunks(2) {
                    if pair.len() != 2 {
                        return Err(bad(ln, "dangling RHS field"));
                    }
                    if pair[0] == obj_row {
                        continue;
                    }
                    let ri = *row_index.get(pair[0]).ok_or_else(|| bad(ln, "unknown row"))?;
                    model.rows[ri].rhs = parse(ln, pair[1])?;
                }
            }
            "BOUNDS" => {
                if tok.len() < 3 {
                    return Err(bad(ln, "short bound line"));
                }
                let j = *col_index.get(tok[2]).ok_or_else(|| bad(ln, "unknown column"))?;
                let v = &mut model.vars[j];
                let val = tok.get(3).map(|s| parse(ln, s)).transpose()?;
                match tok[0] {
                    "BV" => {
                        v.kind = VarKind::Binary;
                        v.lower = 0.0;
                        v.upper = 1.0;
                    }
                    "LO" => v.lower = val.ok_or_else(|| bad(ln, "missing value"))?,
                    "UP" => v.upper = val.ok_or_else(|| bad(ln, "missing value"))?,
                    "FX" => {
                        let x = val.ok_or_else(|| bad(ln, "missing value"))?;
                        v.lower = x;
                        v.upper = x;
                    }
                    "FR" => {
                        v.lower = f64::NEG_INFINITY;
                        v.upper = f64::INFINITY;
                    }
                    "MI" => v.lower = f64::NEG_INFINITY,
                    "PL" => v.upper = f64::INFINITY,
                    other => return Err(bad(ln, &format!("unsupported bound type {other}"))),
                }
            }
            _ => return Err(bad(ln, "data line outside a section")),
        }
    }
    for (j, int) in marked_int.into_iter().enumerate() {
        let v = &mut model.vars[j];
        if int && v.lower == 0.0 && (v.upper == 1.0 || v.upper.is_infinite()) {
            v.kind = VarKind::Binary;
            v.upper = 1.0;
        }
    }
    model.makespan = model.vars.iter().position(|v| v.objective != 0.0).unwrap_or(0);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::InstanceBuilder;
    use crate::models::build_full;

    fn two_packets() -> MipModel {
        let inst = InstanceBuilder::new(2)
            .nodes(&[5, 0])
            .arc(0, 1, 1, 1)
            .packets(0, 1, 2)
            .build();
        build_full(&inst)
    }

    #[test]
    fn fixed_round_trip() {
        let m = two_packets();
        let (text, map) = export_model(&m, MpsFormat::Fixed);
        assert!(text.lines().all(|l| l.len() <= 61), "{text}");
        let back = import_model(&text, Some(&map)).unwrap();
        assert_eq!(back.vars.len(), m.vars.len());
        assert_eq!(back.rows.len(), m.rows.len());
        assert_eq!(back.num_binaries(), m.num_binaries());
        assert_eq!(back.canonical(), m.canonical());
    }

    #[test]
    fn free_round_trip() {
        let m = two_packets();
        let (text, map) = export_model(&m, MpsFormat::Free);
        assert!(map.columns.is_empty());
        let back = import_model(&text, None).unwrap();
        assert_eq!(back.canonical(), m.canonical());
    }

    #[test]
    fn objective_only_model() {
        let inst = InstanceBuilder::new(3).nodes(&[0, 0]).arc(0, 1, 1, 1).build();
        let m = build_full(&inst);
        let (text, map) = export_model(&m, MpsFormat::Fixed);
        let back = import_model(&text, Some(&map)).unwrap();
        assert_eq!(back.vars.len(), 1);
        assert!(back.rows.is_empty());
    }

    #[test]
    fn format_names() {
        assert_eq!("mps".parse::<MpsFormat>().unwrap(), MpsFormat::Fixed);
        assert!("lp".parse::<MpsFormat>().is_err());
    }
}
