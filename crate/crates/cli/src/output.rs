//! CSV tables with a reproducibility stamp.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    /// fixed number of decimals
    Fixed(f64, usize),
    Int(i64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// trailing `# …` summary lines
    pub footer: Vec<String>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), footer: Vec::new() }
    }
}

/// `x` to `digits` significant digits, shortest form, like C's `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> Result<String, CliError> {
    if !x.is_finite() {
        return Err(CliError::Numerical(format!("non-finite value {x} in output")));
    }
    if x == 0.0 {
        return Ok("0".into());
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let out = if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    };
    Ok(out)
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn format_cell(cell: &Cell, digits: usize) -> Result<String, CliError> {
    Ok(match cell {
        Cell::Num(x) => format_sig(*x, digits)?,
        Cell::Fixed(x, d) => {
            if !x.is_finite() {
                return Err(CliError::Numerical(format!("non-finite value {x} in output")));
            }
            // avoid "-0.00"
            let s = format!("{x:.d$}");
            if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
                s.trim_start_matches('-').to_string()
            } else {
                s
            }
        }
        Cell::Int(i) => i.to_string(),
        Cell::Text(t) => t.clone(),
    })
}

/// Full file contents: stamp, column header, rows, footer.
pub fn render(table: &Table, stamp: &str, digits: usize) -> Result<String, CliError> {
    let mut out = String::new();
    writeln!(out, "# xyrange {} {}", env!("CARGO_PKG_VERSION"), table.name).unwrap();
    for line in stamp.lines() {
        writeln!(out, "# {line}").unwrap();
    }
    writeln!(out, "{}", table.columns.join(",")).unwrap();
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|c| format_cell(c, digits)).collect::<Result<_, _>>()?;
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    for line in &table.footer {
        writeln!(out, "# {line}").unwrap();
    }
    Ok(out)
}

pub fn write_tables(dir: &Path, tables: &[Table], stamp: &str, digits: usize) -> Result<Vec<String>, CliError> {
    // render everything first so a NaN never leaves a partial set of files
    let rendered: Vec<(String, String)> =
        tables.iter().map(|t| Ok((format!("{}.csv", t.name), render(t, stamp, digits)?))).collect::<Result<_, CliError>>()?;
    fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    for (name, body) in rendered {
        fs::write(dir.join(&name), body)?;
        names.push(name);
    }
    Ok(names)
}
