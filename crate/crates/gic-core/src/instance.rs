//! MILP instances: MPS parsing, the `Ax ≥ b, x ≥ 0` standard form, and the
//! known-optima table.
//!
//! Every number read from a file is kept as an exact rational. The standard
//! form carries float copies for the simplex and rational copies for the
//! oracle.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Magnitudes at or above this are read as infinite bounds.
const MPS_INFINITY: f64 = 1e30;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("optima table line {line}: {msg}")]
    Optima { line: usize, msg: String },
}

fn perr(line: usize, msg: impl Into<String>) -> InstanceError {
    InstanceError::Parse { line, msg: msg.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub name: String,
    pub sense: Sense,
    pub coefs: Vec<(usize, BigRational)>,
    pub rhs: BigRational,
    /// MPS range value, applied with the usual sign rules.
    pub range: Option<BigRational>,
}

impl Row {
    /// Finite `(lower, upper)` activity limits implied by sense, rhs and range.
    pub fn activity_limits(&self) -> (Option<BigRational>, Option<BigRational>) {
        let b = self.rhs.clone();
        match (&self.sense, &self.range) {
            (Sense::Ge, None) => (Some(b), None),
            (Sense::Le, None) => (None, Some(b)),
            (Sense::Eq, None) => (Some(b.clone()), Some(b)),
            (Sense::Ge, Some(r)) => (Some(b.clone()), Some(b + r.abs())),
            (Sense::Le, Some(r)) => (Some(b.clone() - r.abs()), Some(b)),
            (Sense::Eq, Some(r)) if r.is_negative() => (Some(b.clone() + r), Some(b)),
            (Sense::Eq, Some(r)) => (Some(b.clone()), Some(b + r)),
        }
    }
}

/// A MILP in the form it was read: `min cᵀx + offset` over general rows and
/// bounds. `None` bounds are infinite.
#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub rows: Vec<Row>,
    pub col_names: Vec<String>,
    pub objective: Vec<BigRational>,
    pub obj_offset: BigRational,
    pub lower: Vec<Option<BigRational>>,
    pub upper: Vec<Option<BigRational>>,
    pub integer: Vec<bool>,
}

impl Instance {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.col_names.len()
    }
}

/// Parses a decimal literal (`-1.25e+3`, `.5`, `7.`) exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (neg, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mant, exp) = match body.find(['e', 'E', 'd', 'D']) {
        Some(p) => (&body[..p], body[p + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(p) => (&mant[..p], &mant[p + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().ok()?;
    if neg {
        num = -num;
    }
    let e = exp - frac_part.len() as i64;
    if e.unsigned_abs() > 400 {
        return None;
    }
    let ten = BigInt::from(10);
    let scale = num_traits::pow(ten, e.unsigned_abs() as usize);
    Some(if e >= 0 {
        BigRational::from_integer(num * scale)
    } else {
        BigRational::new(num, scale)
    })
}

fn parse_number(tok: &str, line: usize) -> Result<BigRational, InstanceError> {
    parse_rational(tok).ok_or_else(|| perr(line, format!("bad number '{tok}'")))
}

/// Bound value that may be infinite. Returns `None` for ±∞.
fn parse_bound(tok: &str, line: usize) -> Result<Option<BigRational>, InstanceError> {
    let low = tok.to_ascii_lowercase();
    if matches!(low.trim_start_matches(['+', '-']), "inf" | "infinity") {
        return Ok(None);
    }
    let v = parse_number(tok, line)?;
    if v.abs().to_f64().unwrap_or(f64::INFINITY) >= MPS_INFINITY {
        Ok(None)
    } else {
        Ok(Some(v))
    }
}

fn is_infinite(tok: &str) -> bool {
    let low = tok.to_ascii_lowercase();
    let t = low.trim_start_matches(['+', '-']);
    t == "inf" || t == "infinity" || t.parse::<f64>().map_or(false, |v| v.abs() >= MPS_INFINITY)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    None,
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

enum RowRef {
    Objective,
    Free,
    Row(usize),
}

/// Reads an MPS file (fixed or free format, whitespace-separated fields).
pub fn parse_mps(path: &Path) -> Result<Instance, InstanceError> {
    let mut text = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_mps_str(&stem, &text)
}

/// Parses MPS text; `default_name` is used when the NAME card is blank.
pub fn parse_mps_str(default_name: &str, text: &str) -> Result<Instance, InstanceError> {
    let mut name = default_name.to_string();
    let mut section = Section::None;
    let mut maximize = false;
    let mut obj_row: Option<String> = None;
    let mut row_index: HashMap<String, RowRef> = HashMap::new();
    let mut rows: Vec<Row> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut col_names: Vec<String> = Vec::new();
    let mut objective: Vec<BigRational> = Vec::new();
    let mut obj_offset = BigRational::zero();
    let mut integer: Vec<bool> = Vec::new();
    let mut lower: Vec<Option<BigRational>> = Vec::new();
    let mut upper: Vec<Option<BigRational>> = Vec::new();
    let mut upper_set: Vec<bool> = Vec::new();
    let mut seen_entries: std::collections::HashSet<(usize, usize)> = Default::default();
    let mut obj_seen: std::collections::HashSet<usize> = Default::default();
    let mut in_integer_block = false;
    let mut saw_rows = false;
    let mut saw_columns = false;
    let mut rhs_set: Option<String> = None;
    let mut range_set: Option<String> = None;
    let mut bound_set: Option<String> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if !line.starts_with([' ', '\t']) {
            let head = toks[0].to_ascii_uppercase();
            section = match head.as_str() {
                "NAME" => {
                    if toks.len() > 1 {
                        name = toks[1].to_string();
                    }
                    Section::Name
                }
                "OBJSENSE" => {
                    if toks.len() > 1 {
                        maximize = parse_objsense(toks[1], line_no)?;
                    }
                    Section::ObjSense
                }
                "OBJSENSE MAX" => Section::ObjSense,
                "ROWS" => {
                    saw_rows = true;
                    Section::Rows
                }
                "COLUMNS" => {
                    saw_columns = true;
                    Section::Columns
                }
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                "SOS" | "SOS1" | "SOS2" => {
                    return Err(perr(line_no, "SOS records are not supported"));
                }
                other => return Err(perr(line_no, format!("unknown section '{other}'"))),
            };
            if section == Section::End {
                break;
            }
            continue;
        }
        match section {
            Section::None | Section::Name | Section::End => {
                return Err(perr(line_no, "data line outside of a section"));
            }
            Section::ObjSense => maximize = parse_objsense(toks[0], line_no)?,
            Section::Rows => {
                if toks.len() < 2 {
                    return Err(perr(line_no, "ROWS entry needs a type and a name"));
                }
                let rname = toks[1].to_string();
                if row_index.contains_key(&rname) {
                    return Err(perr(line_no, format!("duplicate row '{rname}'")));
                }
                let sense = match toks[0].to_ascii_uppercase().as_str() {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(rname.clone());
                            row_index.insert(rname, RowRef::Objective);
                        } else {
                            row_index.insert(rname, RowRef::Free);
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    t => return Err(perr(line_no, format!("unknown row type '{t}'"))),
                };
                row_index.insert(rname.clone(), RowRef::Row(rows.len()));
                rows.push(Row {
                    name: rname,
                    sense,
                    coefs: Vec::new(),
                    rhs: BigRational::zero(),
                    range: None,
                });
            }
            Section::Columns => {
                if toks.len() >= 3 && toks[1].trim_matches('\'').eq_ignore_ascii_case("MARKER") {
                    let kind = toks[2].trim_matches('\'').to_ascii_uppercase();
                    match kind.as_str() {
                        "INTORG" => in_integer_block = true,
                        "INTEND" => in_integer_block = false,
                        _ => return Err(perr(line_no, format!("unknown marker '{kind}'"))),
                    }
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(perr(line_no, "COLUMNS entry needs 3 or 5 fields"));
                }
                let cname = toks[0];
                let j = match col_index.get(cname) {
                    Some(&j) => j,
                    None => {
                        let j = col_names.len();
                        col_index.insert(cname.to_string(), j);
                        col_names.push(cname.to_string());
                        objective.push(BigRational::zero());
                        integer.push(in_integer_block);
                        lower.push(Some(BigRational::zero()));
                        upper.push(None);
                        upper_set.push(false);
                        j
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let v = parse_number(pair[1], line_no)?;
                    match row_index.get(pair[0]) {
                        None => {
                            return Err(perr(line_no, format!("unknown row '{}'", pair[0])));
                        }
                        Some(RowRef::Free) => {}
                        Some(RowRef::Objective) => {
                            if !obj_seen.insert(j) {
                                return Err(perr(
                                    line_no,
                                    format!("duplicate entry for column '{cname}' in the objective"),
                                ));
                            }
                            objective[j] = v;
                        }
                        Some(&RowRef::Row(i)) => {
                            if !seen_entries.insert((i, j)) {
                                return Err(perr(
                                    line_no,
                                    format!("duplicate entry for column '{cname}' in row '{}'", pair[0]),
                                ));
                            }
                            if !v.is_zero() {
                                rows[i].coefs.push((j, v));
                            }
                        }
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let fields: &[&str] = match toks.len() {
                    2 | 4 => &toks[..],
                    3 | 5 => {
                        let set = if section == Section::Rhs { &mut rhs_set } else { &mut range_set };
                        match set {
                            None => *set = Some(toks[0].to_string()),
                            Some(s) if s != toks[0] => continue,
                            _ => {}
                        }
                        &toks[1..]
                    }
                    _ => return Err(perr(line_no, "RHS/RANGES entry has a wrong field count")),
                };
                for pair in fields.chunks(2) {
                    let v = parse_number(pair[1], line_no)?;
                    match row_index.get(pair[0]) {
                        None => {
                            return Err(perr(line_no, format!("unknown row '{}'", pair[0])));
                        }
                        Some(RowRef::Free) => {}
                        Some(RowRef::Objective) => {
                            if section == Section::Rhs {
                                obj_offset = -v;
                            }
                        }
                        Some(&RowRef::Row(i)) => {
                            if section == Section::Rhs {
                                rows[i].rhs = v;
                            } else {
                                rows[i].range = Some(v);
                            }
                        }
                    }
                }
            }
            Section::Bounds => {
                let kind = toks[0].to_ascii_uppercase();
                let needs_value = !matches!(kind.as_str(), "FR" | "MI" | "PL" | "BV");
                let expected_with_set = if needs_value { 4 } else { 3 };
                let rest: &[&str] = if toks.len() == expected_with_set {
                    match &bound_set {
                        None => bound_set = Some(toks[1].to_string()),
                        Some(s) if s != toks[1] => continue,
                        _ => {}
                    }
                    &toks[2..]
                } else if toks.len() == expected_with_set - 1 {
                    &toks[1..]
                } else if !needs_value && toks.len() == expected_with_set + 1 {
                    // Some writers put a value on BV/FR/MI/PL; ignore it.
                    &toks[2..3]
                } else {
                    return Err(perr(line_no, "BOUNDS entry has a wrong field count"));
                };
                let cname = rest[0];
                let j = *col_index
                    .get(cname)
                    .ok_or_else(|| perr(line_no, format!("unknown column '{cname}'")))?;
                let val = rest.get(1).copied();
                match kind.as_str() {
                    "UP" => {
                        let v = val.unwrap();
                        let b = parse_bound(v, line_no)?;
                        if let Some(u) = &b {
                            if u.is_negative() && lower[j].as_ref().map_or(false, |l| l.is_zero()) {
                                log::warn!("line {line_no}: negative upper bound on '{cname}' with zero lower bound; lower bound set to -inf");
                                lower[j] = None;
                            }
                        }
                        upper[j] = b;
                        upper_set[j] = true;
                    }
                    "LO" => {
                        let v = val.unwrap();
                        lower[j] = if is_infinite(v) && v.starts_with('-') {
                            None
                        } else {
                            parse_bound(v, line_no)?
                        };
                    }
                    "FX" => {
                        let v = parse_number(val.unwrap(), line_no)?;
                        lower[j] = Some(v.clone());
                        upper[j] = Some(v);
                        upper_set[j] = true;
                    }
                    "FR" => {
                        lower[j] = None;
                        upper[j] = None;
                        upper_set[j] = true;
                    }
                    "MI" => lower[j] = None,
                    "PL" => {
                        upper[j] = None;
                        upper_set[j] = true;
                    }
                    "BV" => {
                        lower[j] = Some(BigRational::zero());
                        upper[j] = Some(BigRational::one());
                        upper_set[j] = true;
                        integer[j] = true;
                    }
                    "LI" => {
                        lower[j] = parse_bound(val.unwrap(), line_no)?;
                        integer[j] = true;
                    }
                    "UI" => {
                        upper[j] = parse_bound(val.unwrap(), line_no)?;
                        upper_set[j] = true;
                        integer[j] = true;
                    }
                    "SC" => return Err(perr(line_no, "semi-continuous bounds are not supported")),
                    other => return Err(perr(line_no, format!("unknown bound type '{other}'"))),
                }
            }
        }
    }
    if !saw_rows || (rows.is_empty() && obj_row.is_none()) {
        return Err(perr(text.lines().count().max(1), "empty or missing ROWS section"));
    }
    if !saw_columns {
        return Err(perr(text.lines().count().max(1), "missing COLUMNS section"));
    }
    // Integer columns without an explicit upper bound are binary (MIPLIB convention).
    for j in 0..col_names.len() {
        if integer[j] && !upper_set[j] && upper[j].is_none() {
            upper[j] = Some(BigRational::one());
        }
    }
    if maximize {
        for c in objective.iter_mut() {
            *c = -c.clone();
        }
        obj_offset = -obj_offset;
    }
    Ok(Instance {
        name,
        rows,
        col_names,
        objective,
        obj_offset,
        lower,
        upper,
        integer,
    })
}

fn parse_objsense(tok: &str, line: usize) -> Result<bool, InstanceError> {
    match tok.to_ascii_uppercase().as_str() {
        "MAX" | "MAXIMIZE" => Ok(true),
        "MIN" | "MINIMIZE" => Ok(false),
        t => Err(perr(line, format!("unknown objective sense '{t}'"))),
    }
}

/// Where a standard-form row came from.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RowOrigin {
    /// Original row, negated when it was a `≤` side.
    Row { index: usize, negated: bool },
    /// `−x_j ≥ −(u_j − l_j)` from a finite upper bound.
    UpperBound { col: usize },
    /// A row appended later, such as a cut.
    Appended { index: usize },
}

/// Maps a standard-form column back: `x_orig = shift + x` or `shift − x`.
#[derive(Clone, Debug)]
pub struct ColumnMap {
    pub shift: BigRational,
    pub flipped: bool,
}

/// Rational copy of the standard form.
#[derive(Clone, Debug)]
pub struct ExactForm {
    pub a: Vec<Vec<(usize, BigRational)>>,
    pub b: Vec<BigRational>,
    pub c: Vec<BigRational>,
    pub obj_offset: BigRational,
}

/// `min cᵀx + offset` subject to `Ax ≥ b`, `x ≥ 0`.
///
/// Hyperplanes are indexed like the simplex's extended variables: id `j < n`
/// is the bound `x_j ≥ 0`, id `n + i` is row `i`.
#[derive(Clone, Debug)]
pub struct StandardForm {
    pub name: String,
    pub col_names: Vec<String>,
    pub row_names: Vec<String>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub obj_offset: f64,
    pub integer: Vec<bool>,
    pub col_map: Vec<ColumnMap>,
    pub row_origin: Vec<RowOrigin>,
    pub exact: ExactForm,
}

/// A hyperplane `aᵀx = b` whose halfspace `aᵀx ≥ b` is valid for `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    pub id: usize,
    pub a: Vec<f64>,
    pub b: f64,
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Converts to `Ax ≥ b, x ≥ 0`, shifting lower bounds and flipping columns
/// that only have an upper bound. Integer columns get their bounds rounded
/// inward so that the shift stays integral.
pub fn to_standard_form(inst: &Instance) -> Result<StandardForm, InstanceError> {
    let n = inst.num_cols();
    let mut col_map = Vec::with_capacity(n);
    let mut width: Vec<Option<BigRational>> = Vec::with_capacity(n);
    for j in 0..n {
        let (mut lo, mut up) = (inst.lower[j].clone(), inst.upper[j].clone());
        if inst.integer[j] {
            lo = lo.map(|v| v.ceil());
            up = up.map(|v| v.floor());
        }
        match (lo, up) {
            (Some(l), u) => {
                width.push(u.map(|u| u - &l));
                col_map.push(ColumnMap { shift: l, flipped: false });
            }
            (None, Some(u)) => {
                width.push(None);
                col_map.push(ColumnMap { shift: u, flipped: true });
            }
            (None, None) => {
                return Err(InstanceError::Unsupported(format!(
                    "column '{}' is free; the standard form needs a finite bound",
                    inst.col_names[j]
                )));
            }
        }
    }
    let sign = |j: usize| -> BigRational {
        if col_map[j].flipped {
            -BigRational::one()
        } else {
            BigRational::one()
        }
    };
    let mut ea: Vec<Vec<(usize, BigRational)>> = Vec::new();
    let mut eb: Vec<BigRational> = Vec::new();
    let mut row_origin = Vec::new();
    let mut row_names = Vec::new();
    for (i, row) in inst.rows.iter().enumerate() {
        let shifted: Vec<(usize, BigRational)> =
            row.coefs.iter().map(|(j, v)| (*j, v * sign(*j))).collect();
        let offset: BigRational = row
            .coefs
            .iter()
            .map(|(j, v)| v * &col_map[*j].shift)
            .fold(BigRational::zero(), |a, b| a + b);
        let (lo, up) = row.activity_limits();
        if let Some(l) = lo {
            ea.push(shifted.clone());
            eb.push(l - &offset);
            row_origin.push(RowOrigin::Row { index: i, negated: false });
            row_names.push(row.name.clone());
        }
        if let Some(u) = up {
            ea.push(shifted.iter().map(|(j, v)| (*j, -v)).collect());
            eb.push(-(u - &offset));
            row_origin.push(RowOrigin::Row { index: i, negated: true });
            row_names.push(if row.sense == Sense::Le {
                row.name.clone()
            } else {
                format!("{}_le", row.name)
            });
        }
    }
    for j in 0..n {
        if let Some(w) = &width[j] {
            ea.push(vec![(j, -BigRational::one())]);
            eb.push(-w.clone());
            row_origin.push(RowOrigin::UpperBound { col: j });
            row_names.push(format!("{}_ub", inst.col_names[j]));
        }
    }
    let ec: Vec<BigRational> = (0..n).map(|j| &inst.objective[j] * sign(j)).collect();
    let eoff = inst
        .objective
        .iter()
        .zip(&col_map)
        .map(|(c, cm)| c * &cm.shift)
        .fold(inst.obj_offset.clone(), |a, b| a + b);
    let exact = ExactForm {
        a: ea,
        b: eb,
        c: ec,
        obj_offset: eoff,
    };
    Ok(StandardForm::from_exact(
        inst.name.clone(),
        inst.col_names.clone(),
        row_names,
        inst.integer.clone(),
        col_map,
        row_origin,
        exact,
    ))
}

impl StandardForm {
    fn from_exact(
        name: String,
        col_names: Vec<String>,
        row_names: Vec<String>,
        integer: Vec<bool>,
        col_map: Vec<ColumnMap>,
        row_origin: Vec<RowOrigin>,
        exact: ExactForm,
    ) -> Self {
        let n = col_names.len();
        let a = exact
            .a
            .iter()
            .map(|row| {
                let mut d = vec![0.0; n];
                for (j, v) in row {
                    d[*j] = to_f64(v);
                }
                d
            })
            .collect();
        StandardForm {
            name,
            col_names,
            row_names,
            a,
            b: exact.b.iter().map(to_f64).collect(),
            c: exact.c.iter().map(to_f64).collect(),
            obj_offset: to_f64(&exact.obj_offset),
            integer,
            col_map,
            row_origin,
            exact,
        }
    }

    /// Builds a standard form directly from rational `Ax ≥ b` data.
    pub fn from_rational_rows(
        name: &str,
        a: Vec<Vec<BigRational>>,
        b: Vec<BigRational>,
        c: Vec<BigRational>,
        integer: Vec<bool>,
    ) -> Self {
        let n = c.len();
        let m = a.len();
        let sparse = a
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .collect()
            })
            .collect();
        StandardForm::from_exact(
            name.to_string(),
            (0..n).map(|j| format!("x{}", j + 1)).collect(),
            (0..m).map(|i| format!("r{}", i + 1)).collect(),
            integer,
            (0..n)
                .map(|_| ColumnMap {
                    shift: BigRational::zero(),
                    flipped: false,
                })
                .collect(),
            (0..m).map(|i| RowOrigin::Row { index: i, negated: false }).collect(),
            ExactForm {
                a: sparse,
                b,
                c,
                obj_offset: BigRational::zero(),
            },
        )
    }

    pub fn num_cols(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    /// Rows plus one nonnegativity bound per column.
    pub fn num_hyperplanes(&self) -> usize {
        self.num_cols() + self.num_rows()
    }

    pub fn hyperplane(&self, id: usize) -> Hyperplane {
        let n = self.num_cols();
        if id < n {
            let mut a = vec![0.0; n];
            a[id] = 1.0;
            Hyperplane { id, a, b: 0.0 }
        } else {
            Hyperplane {
                id,
                a: self.a[id - n].clone(),
                b: self.b[id - n],
            }
        }
    }

    /// Name of hyperplane `id` for traces and reports.
    pub fn hyperplane_name(&self, id: usize) -> String {
        let n = self.num_cols();
        if id < n {
            format!("{}>=0", self.col_names[id])
        } else {
            self.row_names[id - n].clone()
        }
    }

    /// Copy with extra float rows `aᵀx ≥ b` appended; the rational copy gets
    /// the exact binary values of the floats.
    pub fn with_rows(&self, rows: &[(Vec<f64>, f64)]) -> StandardForm {
        let mut out = self.clone();
        for (k, (a, b)) in rows.iter().enumerate() {
            let sparse: Vec<(usize, BigRational)> = a
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, v)| (j, BigRational::from_float(*v).unwrap_or_else(BigRational::zero)))
                .collect();
            out.exact.a.push(sparse);
            out.exact
                .b
                .push(BigRational::from_float(*b).unwrap_or_else(BigRational::zero));
            out.a.push(a.clone());
            out.b.push(*b);
            out.row_origin.push(RowOrigin::Appended { index: k });
            out.row_names.push(format!("cut{k}"));
        }
        out
    }

    /// LP `min cᵀx, Ax ≥ b, x ≥ 0` for the simplex.
    pub fn lp_problem(&self) -> crate::lp::LpProblem {
        let m = self.num_rows();
        crate::lp::LpProblem::from_dense_rows(&self.a, &self.b, &vec![false; m], &self.c)
    }

    /// Original-space point of a standard-form point.
    pub fn to_original(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.col_map)
            .map(|(v, cm)| {
                let s = to_f64(&cm.shift);
                if cm.flipped {
                    s - v
                } else {
                    s + v
                }
            })
            .collect()
    }

    /// Standard-form point of an original-space point.
    pub fn from_original(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.col_map)
            .map(|(v, cm)| {
                let s = to_f64(&cm.shift);
                if cm.flipped {
                    s - v
                } else {
                    v - s
                }
            })
            .collect()
    }

    /// Objective value including the constant from shifts.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.obj_offset
    }

    /// Rewrites `aᵀx ≥ b` over standard-form columns in original columns.
    pub fn inequality_to_original(&self, a: &[f64], b: f64) -> (Vec<f64>, f64) {
        let mut coef = Vec::with_capacity(a.len());
        let mut rhs = b;
        for (aj, cm) in a.iter().zip(&self.col_map) {
            let s = to_f64(&cm.shift);
            if cm.flipped {
                coef.push(-aj);
                rhs -= aj * s;
            } else {
                coef.push(*aj);
                rhs += aj * s;
            }
        }
        (coef, rhs)
    }
}

/// Known LP and IP optimal values keyed by instance name.
#[derive(Clone, Debug, Default)]
pub struct KnownOptima {
    pub entries: BTreeMap<String, (f64, f64)>,
}

impl KnownOptima {
    /// Looks up `name`, falling back to a case-insensitive match.
    pub fn get(&self, name: &str) -> Option<(f64, f64)> {
        self.entries.get(name).copied().or_else(|| {
            self.entries
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case(name))
                .map(|(_, v)| *v)
        })
    }
}

impl fmt::Display for KnownOptima {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name,opt_lp,opt_ip")?;
        for (k, (lp, ip)) in &self.entries {
            writeln!(f, "{k},{lp},{ip}")?;
        }
        Ok(())
    }
}

/// Reads a `name,opt_lp,opt_ip` table.
pub fn load_known_optima(path: &Path) -> Result<KnownOptima, InstanceError> {
    let f = std::fs::File::open(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_known_optima(f)
}

/// Reads a `name,opt_lp,opt_ip` table from any reader. A header line is
/// optional; an empty input yields an empty table.
pub fn parse_known_optima<R: Read>(reader: R) -> Result<KnownOptima, InstanceError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut out = KnownOptima::default();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 1;
        let rec = rec.map_err(|e| InstanceError::Optima { line, msg: e.to_string() })?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if k == 0 && rec.get(0).map_or(false, |f| f.eq_ignore_ascii_case("name")) {
            continue;
        }
        if rec.len() != 3 {
            return Err(InstanceError::Optima {
                line,
                msg: format!("expected 3 fields, found {}", rec.len()),
            });
        }
        let num = |i: usize| -> Result<f64, InstanceError> {
            rec[i].parse::<f64>().map_err(|_| InstanceError::Optima {
                line,
                msg: format!("non-numeric value '{}'", &rec[i]),
            })
        };
        out.entries.insert(rec[0].to_string(), (num(1)?, num(2)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_rational("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_rational("-1.25e2").unwrap(), q(-125, 1));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert_eq!(parse_rational("7.").unwrap(), q(7, 1));
        assert_eq!(parse_rational("2E-3").unwrap(), q(1, 500));
        assert!(parse_rational("abc").is_none());
        assert!(parse_rational("").is_none());
    }

    const TOY: &str = "NAME toy
ROWS
 N obj
 L c1
 E c2
 G c3
COLUMNS
    MARKER 'MARKER' 'INTORG'
    x obj 1 c1 1
    x c2 1
    MARKER 'MARKER' 'INTEND'
    y obj -2 c1 1
    y c3 1
RHS
    rhs c1 1 c2 3
    rhs obj 5
BOUNDS
 LO bnd y -1
 UP bnd y 4
ENDATA
";

    #[test]
    fn parses_sections_and_markers() {
        let inst = parse_mps_str("t", TOY).unwrap();
        assert_eq!(inst.name, "toy");
        assert_eq!(inst.num_rows(), 3);
        assert_eq!(inst.num_cols(), 2);
        assert!(inst.integer[0] && !inst.integer[1]);
        // integer column without bounds is binary
        assert_eq!(inst.upper[0], Some(q(1, 1)));
        assert_eq!(inst.lower[1], Some(q(-1, 1)));
        assert_eq!(inst.obj_offset, q(-5, 1));
    }

    #[test]
    fn standard_form_flips_splits_and_shifts() {
        let inst = parse_mps_str("t", TOY).unwrap();
        let sf = to_standard_form(&inst).unwrap();
        // c1 (<=) -> 1 row, c2 (=) -> 2 rows, c3 (>=) -> 1 row, ub x, ub y
        assert_eq!(sf.num_rows(), 6);
        assert_eq!(sf.a[0], vec![-1.0, -1.0]);
        // y = -1 + y', so c1: -x - y' >= -1 - 1
        assert_eq!(sf.b[0], -2.0);
        assert_eq!(sf.a[1], vec![1.0, 0.0]);
        assert_eq!(sf.b[1], 3.0);
        assert_eq!(sf.a[2], vec![-1.0, 0.0]);
        assert_eq!(sf.b[2], -3.0);
        assert_eq!(sf.b[5], -5.0);
        assert_eq!(sf.num_hyperplanes(), 8);
        let x = [1.0, 2.0];
        let orig = sf.to_original(&x);
        assert_eq!(orig, vec![1.0, 1.0]);
        let c_orig = 1.0 * orig[0] - 2.0 * orig[1] - 5.0;
        assert!((sf.objective_value(&x) - c_orig).abs() < 1e-12);
    }

    #[test]
    fn errors_name_the_line() {
        let bad = "NAME x\nROWS\n N obj\n L c1\nCOLUMNS\n    x obj 1 c1 1\n    x c1 2\nENDATA\n";
        match parse_mps_str("x", bad) {
            Err(InstanceError::Parse { line, msg }) => {
                assert_eq!(line, 7);
                assert!(msg.contains("duplicate"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let empty = "NAME x\nROWS\nCOLUMNS\nENDATA\n";
        assert!(matches!(parse_mps_str("x", empty), Err(InstanceError::Parse { .. })));
        let sos = "NAME x\nROWS\n N obj\nSOS\n S1 SOS s1 1\nENDATA\n";
        assert!(matches!(parse_mps_str("x", sos), Err(InstanceError::Parse { line: 4, .. })));
    }

    #[test]
    fn free_column_is_unsupported() {
        let txt = "NAME x\nROWS\n N obj\n G c1\nCOLUMNS\n    x obj 1 c1 1\nRHS\n    rhs c1 1\nBOUNDS\n FR bnd x\nENDATA\n";
        let inst = parse_mps_str("x", txt).unwrap();
        assert!(matches!(to_standard_form(&inst), Err(InstanceError::Unsupported(_))));
    }

    #[test]
    fn optima_table() {
        let t = parse_known_optima("name,opt_lp,opt_ip\np0033,2520.571739,3089\n".as_bytes()).unwrap();
        assert_eq!(t.get("p0033"), Some((2520.571739, 3089.0)));
        assert!(t.get("bm23").is_none());
        assert!(parse_known_optima("".as_bytes()).unwrap().entries.is_empty());
        assert!(parse_known_optima("x,a,b\n".as_bytes()).is_err());
    }
}
