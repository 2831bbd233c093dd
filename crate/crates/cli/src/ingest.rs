//! Reading p-values and emitted envelope tables back from text.

use std::path::Path;
use std::str::FromStr;

use fdp_core::{FdpError, StepFunction};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    /// CSV when the first non-blank line is not a number, lines otherwise
    #[default]
    Auto,
    /// one real number per line
    Lines,
    /// a single column with a header row
    Csv,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(InputFormat::Auto),
            "lines" => Ok(InputFormat::Lines),
            "csv" => Ok(InputFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected auto, lines or csv)")),
        }
    }
}

pub fn ingest(path: &Path, format: InputFormat) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_pvalues(&text, format, &path.display().to_string())
}

fn unquote(field: &str) -> &str {
    let field = field.trim();
    field
        .strip_prefix('"')
        .and_then(|f| f.strip_suffix('"'))
        .unwrap_or(field)
        .trim()
}

/// Parses p-values, skipping blank lines. Every value must be a finite real
/// in [0, 1]; failures name the 1-based line.
pub fn parse_pvalues(text: &str, format: InputFormat, source_name: &str) -> CliResult<Vec<f64>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    let has_header = match format {
        InputFormat::Lines => false,
        InputFormat::Csv => true,
        InputFormat::Auto => lines
            .peek()
            .is_some_and(|(_, l)| unquote(l).parse::<f64>().is_err()),
    };
    if has_header {
        lines.next();
    }
    let err = |line: usize, message: String| CliError::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };
    let mut pvalues = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        if has_header && raw.contains(',') {
            return Err(err(line, "expected a single column".into()));
        }
        let field = unquote(raw);
        let p: f64 = field
            .parse()
            .map_err(|_| err(line, format!("`{field}` is not a number")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(err(line, format!("{field} is not a p-value in [0, 1]")));
        }
        pvalues.push(p);
    }
    if pvalues.is_empty() {
        return Err(FdpError::EmptyInput(format!("{source_name} contains no p-values")).into());
    }
    Ok(pvalues)
}

/// An envelope table as written by `fdp envelope`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeTable {
    pub t: Vec<f64>,
    pub gamma_bar: Vec<f64>,
    /// empty for the exact envelope
    pub v: Vec<Option<f64>>,
    pub count_bound: Vec<f64>,
}

impl EnvelopeTable {
    /// Γ̄ as a step function with the given value left of the first knot.
    pub fn gamma_bar_step(&self, initial: f64) -> CliResult<StepFunction> {
        Ok(StepFunction::new(initial, self.t.iter().copied().zip(self.gamma_bar.iter().copied()))?)
    }
}

/// Reads the first table of an envelope CSV (the rows before any blank line).
pub fn parse_envelope_csv(text: &str) -> CliResult<EnvelopeTable> {
    let err = |line: usize, message: String| CliError::Parse {
        source_name: "envelope table".into(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == crate::output::ENVELOPE_HEADER => {}
        _ => return Err(err(1, format!("expected header `{}`", crate::output::ENVELOPE_HEADER))),
    }
    let mut table = EnvelopeTable {
        t: Vec::new(),
        gamma_bar: Vec::new(),
        v: Vec::new(),
        count_bound: Vec::new(),
    };
    for (i, raw) in lines {
        if raw.trim().is_empty() {
            break;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(err(i + 1, format!("expected 4 fields, found {}", fields.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(i + 1, format!("`{s}` is not a number")));
        table.t.push(num(fields[0])?);
        table.gamma_bar.push(num(fields[1])?);
        table.v.push(if fields[2].is_empty() { None } else { Some(num(fields[2])?) });
        table.count_bound.push(num(fields[3])?);
    }
    Ok(table)
}
