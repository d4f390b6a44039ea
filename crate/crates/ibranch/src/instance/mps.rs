//! Free-format MPS reading and writing.
//!
//! Supported sections: `NAME`, `ROWS` (N/L/G/E), `COLUMNS` with
//! `'INTORG'`/`'INTEND'` markers, `RHS`, `RANGES`, `BOUNDS`
//! (LO, UP, FX, BV, MI, PL, LI, UI) and `ENDATA`. Comment lines start
//! with `*`; section headers start in the first column, data lines are
//! indented. RHS entries on the objective row (objective constants) are
//! ignored since the data model carries no constant term.

use super::MipInstance;
use std::collections::HashMap;
use std::fmt;

/// MPS parse failure, carrying the 1-based source line when known.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsError {
    pub line: usize,
    pub message: String,
}

impl MpsError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        MpsError {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for MpsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "mps: {}", self.message)
        } else {
            write!(f, "mps line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for MpsError {}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Start,
    Name,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    Endata,
}

impl Section {
    fn header(word: &str) -> Option<Section> {
        match word {
            "NAME" => Some(Section::Name),
            "ROWS" => Some(Section::Rows),
            "COLUMNS" => Some(Section::Columns),
            "RHS" => Some(Section::Rhs),
            "RANGES" => Some(Section::Ranges),
            "BOUNDS" => Some(Section::Bounds),
            "ENDATA" => Some(Section::Endata),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RowSense {
    Less,
    Greater,
    Equal,
}

struct Parser {
    name: String,
    obj_row: Option<String>,
    row_index: HashMap<String, usize>,
    senses: Vec<RowSense>,
    col_index: HashMap<String, usize>,
    objective: Vec<f64>,
    columns: Vec<Vec<(usize, f64)>>,      // per row, in arrival order
    seen: HashMap<(usize, usize), usize>, // (row+1 | 0 = objective, col) -> line
    obj_seen: HashMap<usize, usize>,
    rhs: Vec<Option<f64>>,
    ranges: Vec<Option<f64>>,
    var_lower: Vec<f64>,
    var_upper: Vec<f64>,
    integer: Vec<bool>,
    in_integer_block: bool,
}

impl Parser {
    fn new() -> Self {
        Parser {
            name: String::new(),
            obj_row: None,
            row_index: HashMap::new(),
            senses: Vec::new(),
            col_index: HashMap::new(),
            objective: Vec::new(),
            columns: Vec::new(),
            seen: HashMap::new(),
            obj_seen: HashMap::new(),
            rhs: Vec::new(),
            ranges: Vec::new(),
            var_lower: Vec::new(),
            var_upper: Vec::new(),
            integer: Vec::new(),
            in_integer_block: false,
        }
    }

    fn intern_column(&mut self, name: &str) -> usize {
        if let Some(&j) = self.col_index.get(name) {
            return j;
        }
        let j = self.col_index.len();
        self.col_index.insert(name.to_string(), j);
        self.objective.push(0.0);
        self.var_lower.push(0.0);
        self.var_upper.push(f64::INFINITY);
        self.integer.push(self.in_integer_block);
        j
    }

    fn parse_number(&self, token: &str, line: usize) -> Result<f64, MpsError> {
        match token.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(MpsError::at(
                line,
                format!("expected a numeric value, found `{token}`"),
            )),
        }
    }

    fn row_line(&mut self, tokens: &[&str], line: usize) -> Result<(), MpsError> {
        if tokens.len() != 2 {
            return Err(MpsError::at(
                line,
                "ROWS entries take the form `<type> <name>`",
            ));
        }
        let name = tokens[1];
        if self.obj_row.as_deref() == Some(name) || self.row_index.contains_key(name) {
            return Err(MpsError::at(line, format!("duplicate row name `{name}`")));
        }
        match tokens[0] {
            "N" => {
                if self.obj_row.is_some() {
                    return Err(MpsError::at(line, "multiple N rows are not supported"));
                }
                self.obj_row = Some(name.to_string());
            }
            sense @ ("L" | "G" | "E") => {
                let k = self.senses.len();
                self.row_index.insert(name.to_string(), k);
                self.senses.push(match sense {
                    "L" => RowSense::Less,
                    "G" => RowSense::Greater,
                    _ => RowSense::Equal,
                });
                self.columns.push(Vec::new());
                self.rhs.push(None);
                self.ranges.push(None);
            }
            other => {
                return Err(MpsError::at(line, format!("unknown row type `{other}`")));
            }
        }
        Ok(())
    }

    fn column_line(&mut self, tokens: &[&str], line: usize) -> Result<(), MpsError> {
        if tokens.contains(&"'MARKER'") {
            if tokens.contains(&"'INTORG'") {
                self.in_integer_block = true;
                return Ok(());
            }
            if tokens.contains(&"'INTEND'") {
                self.in_integer_block = false;
                return Ok(());
            }
            return Err(MpsError::at(
                line,
                "marker line without 'INTORG' or 'INTEND'",
            ));
        }
        if tokens.len() != 3 && tokens.len() != 5 {
            return Err(MpsError::at(
                line,
                "COLUMNS entries take the form `<col> <row> <value> [<row> <value>]`",
            ));
        }
        let j = self.intern_column(tokens[0]);
        for pair in tokens[1..].chunks(2) {
            let value = self.parse_number(pair[1], line)?;
            let row_name = pair[0];
            if self.obj_row.as_deref() == Some(row_name) {
                if let Some(prev) = self.obj_seen.insert(j, line) {
                    return Err(MpsError::at(
                        line,
                        format!(
                            "duplicate objective entry for column `{}` (first on line {prev})",
                            tokens[0]
                        ),
                    ));
                }
                self.objective[j] = value;
            } else if let Some(&k) = self.row_index.get(row_name) {
                if let Some(prev) = self.seen.insert((k + 1, j), line) {
                    return Err(MpsError::at(
                        line,
                        format!(
                            "duplicate entry for column `{}` in row `{row_name}` (first on line {prev})",
                            tokens[0]
                        ),
                    ));
                }
                if value != 0.0 {
                    self.columns[k].push((j, value));
                }
            } else {
                return Err(MpsError::at(line, format!("unknown row `{row_name}`")));
            }
        }
        Ok(())
    }

    /// RHS and RANGES lines share one shape; an even token count means the
    /// optional set name was omitted.
    fn valued_pairs<'a>(
        &self,
        tokens: &'a [&'a str],
        line: usize,
        what: &str,
    ) -> Result<&'a [&'a str], MpsError> {
        let rest = if tokens.len().is_multiple_of(2) {
            tokens
        } else {
            &tokens[1..]
        };
        if rest.is_empty() || rest.len() > 4 {
            return Err(MpsError::at(
                line,
                format!("{what} entries take the form `[<set>] <row> <value> [<row> <value>]`"),
            ));
        }
        Ok(rest)
    }

    fn rhs_line(&mut self, tokens: &[&str], line: usize) -> Result<(), MpsError> {
        let rest = self.valued_pairs(tokens, line, "RHS")?;
        for pair in rest.chunks(2) {
            let value = self.parse_number(pair[1], line)?;
            let row_name = pair[0];
            if self.obj_row.as_deref() == Some(row_name) {
                // Objective constant: not representable, ignored.
                continue;
            }
            let &k = self
                .row_index
                .get(row_name)
                .ok_or_else(|| MpsError::at(line, format!("unknown row `{row_name}`")))?;
            if self.rhs[k].is_some() {
                return Err(MpsError::at(
                    line,
                    format!("duplicate RHS entry for row `{row_name}`"),
                ));
            }
            self.rhs[k] = Some(value);
        }
        Ok(())
    }

    fn ranges_line(&mut self, tokens: &[&str], line: usize) -> Result<(), MpsError> {
        let rest = self.valued_pairs(tokens, line, "RANGES")?;
        for pair in rest.chunks(2) {
            let value = self.parse_number(pair[1], line)?;
            let row_name = pair[0];
            let &k = self
                .row_index
                .get(row_name)
                .ok_or_else(|| MpsError::at(line, format!("unknown row `{row_name}`")))?;
            if self.ranges[k].is_some() {
                return Err(MpsError::at(
                    line,
                    format!("duplicate RANGES entry for row `{row_name}`"),
                ));
            }
            self.ranges[k] = Some(value);
        }
        Ok(())
    }

    fn bounds_line(&mut self, tokens: &[&str], line: usize) -> Result<(), MpsError> {
        if tokens.is_empty() {
            return Ok(());
        }
        let kind = tokens[0];
        let valued = matches!(kind, "LO" | "UP" | "FX" | "LI" | "UI");
        let (var_name, value) = match (valued, tokens.len()) {
            (true, 4) => (tokens[2], Some(self.parse_number(tokens[3], line)?)),
            (true, 3) => (tokens[1], Some(self.parse_number(tokens[2], line)?)),
            (false, 3) => (tokens[2], None),
            (false, 2) => (tokens[1], None),
            _ => {
                return Err(MpsError::at(
                    line,
                    format!("malformed BOUNDS entry of type `{kind}`"),
                ));
            }
        };
        let &j = self
            .col_index
            .get(var_name)
            .ok_or_else(|| MpsError::at(line, format!("unknown column `{var_name}`")))?;
        match kind {
            "LO" => self.var_lower[j] = value.unwrap(),
            "UP" => self.var_upper[j] = value.unwrap(),
            "FX" => {
                self.var_lower[j] = value.unwrap();
                self.var_upper[j] = value.unwrap();
            }
            "LI" => {
                self.var_lower[j] = value.unwrap();
                self.integer[j] = true;
            }
            "UI" => {
                self.var_upper[j] = value.unwrap();
                self.integer[j] = true;
            }
            "BV" => {
                self.var_lower[j] = 0.0;
                self.var_upper[j] = 1.0;
                self.integer[j] = true;
            }
            "MI" => self.var_lower[j] = f64::NEG_INFINITY,
            "PL" => self.var_upper[j] = f64::INFINITY,
            other => {
                return Err(MpsError::at(
                    line,
                    format!("unsupported bound type `{other}`"),
                ));
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<MipInstance, MpsError> {
        let m = self.senses.len();
        let mut row_lower = Vec::with_capacity(m);
        let mut row_upper = Vec::with_capacity(m);
        for k in 0..m {
            let rhs = self.rhs[k].unwrap_or(0.0);
            let (mut lo, mut hi) = match self.senses[k] {
                RowSense::Less => (f64::NEG_INFINITY, rhs),
                RowSense::Greater => (rhs, f64::INFINITY),
                RowSense::Equal => (rhs, rhs),
            };
            if let Some(r) = self.ranges[k] {
                match self.senses[k] {
                    RowSense::Less => lo = rhs - r.abs(),
                    RowSense::Greater => hi = rhs + r.abs(),
                    RowSense::Equal => {
                        if r >= 0.0 {
                            hi = rhs + r;
                        } else {
                            lo = rhs + r;
                        }
                    }
                }
            }
            row_lower.push(lo);
            row_upper.push(hi);
        }
        for row in &mut self.columns {
            row.sort_by_key(|&(j, _)| j);
        }
        let inst = MipInstance {
            name: self.name,
            objective: self.objective,
            rows: self.columns,
            row_lower,
            row_upper,
            var_lower: self.var_lower,
            var_upper: self.var_upper,
            integer: self.integer,
        };
        inst.validate().map_err(|e| {
            MpsError::at(0, format!("parsed file violates instance invariants: {e}"))
        })?;
        Ok(inst)
    }
}

/// Parses a free-format MPS document into a [`MipInstance`].
pub fn parse_mps(text: &str) -> Result<MipInstance, MpsError> {
    let mut parser = Parser::new();
    let mut section = Section::Start;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        let is_header = !raw.starts_with(|c: char| c.is_whitespace());
        if is_header {
            let next = Section::header(tokens[0]).ok_or_else(|| {
                MpsError::at(line, format!("unknown section header `{}`", tokens[0]))
            })?;
            if next <= section {
                return Err(MpsError::at(
                    line,
                    format!("section `{}` out of order", tokens[0]),
                ));
            }
            if next == Section::Name {
                parser.name = tokens.get(1).unwrap_or(&"").to_string();
            }
            section = next;
            continue;
        }
        match section {
            Section::Rows => parser.row_line(&tokens, line)?,
            Section::Columns => parser.column_line(&tokens, line)?,
            Section::Rhs => parser.rhs_line(&tokens, line)?,
            Section::Ranges => parser.ranges_line(&tokens, line)?,
            Section::Bounds => parser.bounds_line(&tokens, line)?,
            Section::Start | Section::Name => {
                return Err(MpsError::at(line, "data before the ROWS section"));
            }
            Section::Endata => {
                return Err(MpsError::at(line, "data after ENDATA"));
            }
        }
    }
    if section < Section::Rows {
        return Err(MpsError::at(0, "missing ROWS section"));
    }
    parser.finish()
}

/// Renders `v` so that parsing the text recovers the identical `f64`.
fn fmt_value(v: f64) -> String {
    format!("{v}")
}

/// Writes an instance as free-format MPS text.
///
/// Rows and columns are emitted under canonical names (`R<k>`, `X<j>`,
/// objective `OBJ`), so `parse_mps(write_mps(inst))` reproduces `inst`
/// field for field. The emission order is fixed, making the output a
/// deterministic function of the instance.
#[allow(clippy::needless_range_loop)]
pub fn write_mps(inst: &MipInstance) -> String {
    let n = inst.num_vars();
    let m = inst.num_rows();
    let mut out = String::new();
    if inst.name.is_empty() {
        out.push_str("NAME\n");
    } else {
        out.push_str(&format!("NAME          {}\n", inst.name));
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Emit {
        Equal(f64),
        Less(f64),
        Greater(f64),
        Range { rhs: f64, range: f64 },
    }
    let emits: Vec<Emit> = (0..m)
        .map(|k| {
            let lo = inst.row_lower[k];
            let hi = inst.row_upper[k];
            if lo == hi {
                Emit::Equal(lo)
            } else if lo.is_finite() && hi.is_finite() {
                Emit::Range {
                    rhs: hi,
                    range: hi - lo,
                }
            } else if hi.is_finite() {
                Emit::Less(hi)
            } else {
                Emit::Greater(lo)
            }
        })
        .collect();

    out.push_str("ROWS\n");
    out.push_str(" N  OBJ\n");
    for (k, emit) in emits.iter().enumerate() {
        let sense = match emit {
            Emit::Equal(_) => 'E',
            Emit::Less(_) | Emit::Range { .. } => 'L',
            Emit::Greater(_) => 'G',
        };
        out.push_str(&format!(" {sense}  R{k}\n"));
    }

    // Column-major view of the row-major storage.
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (k, row) in inst.rows.iter().enumerate() {
        for &(j, v) in row {
            cols[j].push((k, v));
        }
    }

    out.push_str("COLUMNS\n");
    let mut integer_open = false;
    for j in 0..n {
        if inst.integer[j] != integer_open {
            let marker = if inst.integer[j] {
                "'INTORG'"
            } else {
                "'INTEND'"
            };
            out.push_str(&format!("    MARKER    'MARKER'    {marker}\n"));
            integer_open = inst.integer[j];
        }
        let mut emitted = false;
        if inst.objective[j] != 0.0 {
            out.push_str(&format!(
                "    X{j}  OBJ  {}\n",
                fmt_value(inst.objective[j])
            ));
            emitted = true;
        }
        for &(k, v) in &cols[j] {
            out.push_str(&format!("    X{j}  R{k}  {}\n", fmt_value(v)));
            emitted = true;
        }
        if !emitted {
            // Register otherwise-empty columns; zero entries are dropped on
            // parse, so this only records the variable's existence.
            out.push_str(&format!("    X{j}  OBJ  0\n"));
        }
    }
    if integer_open {
        out.push_str("    MARKER    'MARKER'    'INTEND'\n");
    }

    out.push_str("RHS\n");
    for (k, emit) in emits.iter().enumerate() {
        let rhs = match emit {
            Emit::Equal(v) | Emit::Less(v) | Emit::Greater(v) => *v,
            Emit::Range { rhs, .. } => *rhs,
        };
        if rhs != 0.0 {
            out.push_str(&format!("    RHS  R{k}  {}\n", fmt_value(rhs)));
        }
    }

    if emits.iter().any(|e| matches!(e, Emit::Range { .. })) {
        out.push_str("RANGES\n");
        for (k, emit) in emits.iter().enumerate() {
            if let Emit::Range { range, .. } = emit {
                out.push_str(&format!("    RNG  R{k}  {}\n", fmt_value(*range)));
            }
        }
    }

    let mut bounds = String::new();
    for j in 0..n {
        let lo = inst.var_lower[j];
        let hi = inst.var_upper[j];
        if lo == hi {
            bounds.push_str(&format!(" FX BND  X{j}  {}\n", fmt_value(lo)));
            continue;
        }
        if lo == f64::NEG_INFINITY {
            bounds.push_str(&format!(" MI BND  X{j}\n"));
        } else if lo != 0.0 {
            bounds.push_str(&format!(" LO BND  X{j}  {}\n", fmt_value(lo)));
        }
        if hi.is_finite() {
            bounds.push_str(&format!(" UP BND  X{j}  {}\n", fmt_value(hi)));
        }
    }
    if !bounds.is_empty() {
        out.push_str("BOUNDS\n");
        out.push_str(&bounds);
    }

    out.push_str("ENDATA\n");
    out
}
