//! Buffered outputs that reach disk only after every command step succeeded.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Tsv,
}

impl Format {
    pub fn sep(self) -> char {
        match self {
            Format::Csv => ',',
            Format::Tsv => '\t',
        }
    }

    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
        }
    }
}

/// Delimited table with a header row.
pub struct Table {
    sep: char,
    text: String,
}

impl Table {
    pub fn new<S: AsRef<str>>(format: Format, header: &[S]) -> Self {
        let mut t = Self { sep: format.sep(), text: String::new() };
        t.row(header);
        t
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        let sep = self.sep.to_string();
        let line: Vec<&str> = fields.iter().map(AsRef::as_ref).collect();
        self.text.push_str(&line.join(&sep));
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// Files staged in memory, keyed by name inside the output directory.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    /// Write everything to temporary files first, then rename them into place.
    pub fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
        fs::create_dir_all(&self.dir).map_err(|e| io(&self.dir, e))?;
        let mut staged = Vec::new();
        for (name, bytes) in &self.files {
            let mut tmp = NamedTempFile::new_in(&self.dir).map_err(|e| io(&self.dir, e))?;
            tmp.write_all(bytes).map_err(|e| io(tmp.path(), e))?;
            staged.push((tmp, self.dir.join(name)));
        }
        let mut written = Vec::new();
        for (tmp, dest) in staged {
            tmp.persist(&dest).map_err(|e| io(&dest, e.error))?;
            written.push(dest);
        }
        Ok(written)
    }
}
