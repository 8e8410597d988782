//! File formats and output plumbing.
//!
//! Edge-list files are UTF-8 text, one record per line, two tab-separated
//! fields. `parent<TAB>child` declares an edge; `id<TAB>-` declares a node
//! without requiring edges (how isolated nodes are written). Node ids are
//! arbitrary non-empty tab-free strings, except `-`, which is reserved.
//! Value files use the same shape: `id<TAB>value` with a decimal float.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use dagfdr::dag::{build_dag, Dag};

/// Errors split by exit code: invalid input exits 2, internal failures 1.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Internal(String),
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(msg) | CliError::Internal(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<dagfdr::Error> for CliError {
    fn from(error: dagfdr::Error) -> Self {
        match error {
            // a base procedure breaking monotonicity is a bug, not bad input
            dagfdr::Error::NonMonotoneBase { .. } => CliError::Internal(error.to_string()),
            _ => CliError::Invalid(error.to_string()),
        }
    }
}

pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

/// Formats a float with 17 significant digits, locale-independent, so every
/// value round-trips exactly.
pub fn fmt_full(value: f64) -> String {
    format!("{value:.16e}")
}

/// External node ids in index order plus the reverse lookup.
#[derive(Debug, Clone)]
pub struct NodeTable {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl NodeTable {
    fn new() -> Self {
        Self {
            ids: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Builds a table from an already-deduplicated id list (file order).
    pub fn from_ids(ids: &[String]) -> Self {
        let mut table = Self::new();
        for id in ids {
            table.intern(id);
        }
        table
    }

    fn intern(&mut self, id: &str) -> usize {
        if let Some(&existing) = self.index.get(id) {
            return existing;
        }
        let assigned = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), assigned);
        assigned
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn lookup(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|error| invalid(format!("{}: {error}", path.display())))
}

fn split_line<'a>(
    path: &Path,
    number: usize,
    line: &'a str,
) -> Result<(&'a str, &'a str), CliError> {
    let mut parts = line.split('\t');
    let first = parts.next().unwrap_or("");
    let second = parts.next().ok_or_else(|| {
        invalid(format!(
            "{}:{number}: expected two tab-separated fields",
            path.display()
        ))
    })?;
    if parts.next().is_some() {
        return Err(invalid(format!(
            "{}:{number}: expected two tab-separated fields, found more",
            path.display()
        )));
    }
    if first.is_empty() || second.is_empty() {
        return Err(invalid(format!("{}:{number}: empty field", path.display())));
    }
    Ok((first, second))
}

/// Parses an edge-list file into a node table, a built graph, and the edges.
/// Node indices follow first appearance in the file.
pub fn parse_dag_file(path: &Path) -> Result<(NodeTable, Dag), CliError> {
    let text = read_text(path)?;
    let mut table = NodeTable::new();
    let mut edges = Vec::new();
    for (offset, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let number = offset + 1;
        let (parent, child) = split_line(path, number, line)?;
        if parent == "-" {
            return Err(invalid(format!(
                "{}:{number}: '-' is reserved and cannot name a node",
                path.display()
            )));
        }
        let parent_index = table.intern(parent);
        if child == "-" {
            continue; // bare declaration
        }
        let child_index = table.intern(child);
        edges.push((parent_index, child_index));
    }
    let dag = build_dag(table.len(), &edges).map_err(CliError::from)?;
    Ok((table, dag))
}

/// Parses an `id<TAB>value` file, preserving file order.
pub fn parse_value_file(path: &Path, unit_interval: bool) -> Result<Vec<(String, f64)>, CliError> {
    let text = read_text(path)?;
    let mut entries = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (offset, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let number = offset + 1;
        let (id, field) = split_line(path, number, line)?;
        if id == "-" {
            return Err(invalid(format!(
                "{}:{number}: '-' is reserved and cannot name a node",
                path.display()
            )));
        }
        let value: f64 = field.parse().map_err(|_| {
            invalid(format!(
                "{}:{number}: cannot parse '{field}' as a number",
                path.display()
            ))
        })?;
        if !value.is_finite() {
            return Err(invalid(format!(
                "{}:{number}: non-finite value",
                path.display()
            )));
        }
        if unit_interval && !(0.0..=1.0).contains(&value) {
            return Err(invalid(format!(
                "{}:{number}: value {value} outside [0, 1]",
                path.display()
            )));
        }
        if let Some(previous) = seen.insert(id.to_string(), number) {
            return Err(invalid(format!(
                "{}:{number}: duplicate id '{id}' (first at line {previous})",
                path.display()
            )));
        }
        entries.push((id.to_string(), value));
    }
    Ok(entries)
}

/// Index-aligns parsed `(id, value)` entries to a node table: every node must
/// receive exactly one value and every id must name a node.
pub fn align_values(
    path: &Path,
    entries: &[(String, f64)],
    table: &NodeTable,
    what: &str,
) -> Result<Vec<f64>, CliError> {
    let mut values: Vec<Option<f64>> = vec![None; table.len()];
    for (id, value) in entries {
        let index = table.lookup(id).ok_or_else(|| {
            invalid(format!(
                "{}: {what} file names '{id}', which is not a node of the graph",
                path.display()
            ))
        })?;
        values[index] = Some(*value);
    }
    for (index, slot) in values.iter().enumerate() {
        if slot.is_none() {
            return Err(invalid(format!(
                "{}: node '{}' has no {what}",
                path.display(),
                table.id(index)
            )));
        }
    }
    Ok(values
        .into_iter()
        .map(|slot| slot.expect("checked"))
        .collect())
}

/// Canonical edge-list text for a graph: one declaration line per node in
/// index order, then every edge. Re-parsing reproduces the same node order
/// and therefore an identical graph.
pub fn emit_edges(table: &NodeTable, dag: &Dag) -> String {
    let mut out = String::new();
    for i in 0..dag.m() {
        out.push_str(table.id(i));
        out.push_str("\t-\n");
    }
    for (parent, child) in dag.edges() {
        out.push_str(table.id(parent));
        out.push('\t');
        out.push_str(table.id(child));
        out.push('\n');
    }
    out
}

/// Opens `--out` (or standard output) for writing.
pub fn open_output(out: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(|error| CliError::Internal(format!("{}: {error}", path.display())))?;
            Ok(Box::new(file))
        }
        None => Ok(Box::new(std::io::stdout())),
    }
}
