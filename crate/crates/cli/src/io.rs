use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sigpde_core::csv_io::{load_csv_labeled, load_csv_path};
use sigpde_core::{Error, GramMatrix, LabeledSeries, Layout, Result};

/// A CSV source: a file, or standard input when given as `-`.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Path(PathBuf),
    Stdin,
}

impl FromStr for Input {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(if s == "-" {
            Input::Stdin
        } else {
            Input::Path(PathBuf::from(s))
        })
    }
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Input::Path(p) => write!(f, "{}", p.display()),
            Input::Stdin => write!(f, "<stdin>"),
        }
    }
}

impl Input {
    pub fn load(&self, layout: Layout) -> Result<Vec<LabeledSeries>> {
        match self {
            Input::Path(p) => load_csv_path(p, layout),
            Input::Stdin => load_csv_labeled(io::stdin().lock(), layout).map_err(|e| {
                Error::Input(format!("<stdin>: {e}"))
            }),
        }
    }

    /// Standard input can only be consumed once.
    pub fn check_single_stdin(inputs: &[Option<&Input>]) -> Result<()> {
        let n = inputs.iter().flatten().filter(|i| **i == &Input::Stdin).count();
        if n > 1 {
            return Err(Error::Input("only one input may be read from stdin".into()));
        }
        Ok(())
    }
}

/// Destination of a command's result. Output is assembled in memory and
/// written in one go, so a failing command leaves no partial file behind.
pub struct Output {
    path: Option<PathBuf>,
}

impl Output {
    pub fn new(path: Option<PathBuf>) -> Self {
        Self { path }
    }

    pub fn write_str(&self, s: &str) -> Result<()> {
        self.write_with(|w| Ok(w.write_all(s.as_bytes())?))
    }

    pub fn write_with(&self, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        match &self.path {
            Some(p) => fs::write(p, &buf).map_err(|e| Error::File {
                path: p.clone(),
                message: e.to_string(),
            }),
            None => {
                let mut out = io::stdout().lock();
                match out.write_all(&buf).and_then(|_| out.flush()) {
                    // A closed pipe (`| head`) is the reader's choice, not a failure.
                    Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                    other => Ok(other?),
                }
            }
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn read_gram(path: &Path) -> Result<GramMatrix> {
    GramMatrix::read_csv(open(path)?).map_err(|e| match e {
        Error::Parse { .. } | Error::Input(_) | Error::Shape(_) | Error::Io(_) => Error::File {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
        other => other,
    })
}

/// A single numeric column. `#` comments and a non-numeric header line are
/// skipped; if the file has several columns, the last one is used.
pub fn read_column(path: &Path) -> Result<Vec<f64>> {
    read_column_from(open(path)?).map_err(|e| Error::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn read_column_from<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut seen_line = false;
    for (k, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let field = t.rsplit(',').next().unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            _ if !seen_line => {}
            _ => {
                return Err(Error::Parse {
                    line: k as u64 + 1,
                    message: format!("not a finite number: {field:?}"),
                })
            }
        }
        seen_line = true;
    }
    if out.is_empty() {
        return Err(Error::Input("no values".into()));
    }
    Ok(out)
}

pub fn write_column(w: &mut dyn Write, name: &str, values: &[f64]) -> Result<()> {
    writeln!(w, "{name}")?;
    for v in values {
        writeln!(w, "{v:?}")?;
    }
    Ok(())
}
