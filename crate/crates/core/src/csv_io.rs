//! CSV ingestion and export of time series.
//!
//! Two layouts are supported, both UTF-8 with `,` separators and `.` decimals:
//!
//! * **wide**: header `t,c1,...,cd`, one series per file;
//! * **long**: header `series_id,t,c1,...,cd`, any number of series, grouped
//!   by id in order of first appearance.
//!
//! Lines starting with `#` are comments and are skipped on input.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Wide,
    Long,
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wide" => Ok(Layout::Wide),
            "long" => Ok(Layout::Long),
            other => Err(Error::Input(format!(
                "unknown layout {other:?} (expected wide or long)"
            ))),
        }
    }
}

/// A series together with the id it carried in a long-layout file.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub id: String,
    pub series: TimeSeries,
}

struct Pending {
    id: String,
    first_line: u64,
    last_line: u64,
    times: Vec<f64>,
    values: Vec<f64>,
}

/// Reads every series from `reader`.
pub fn load_csv<R: Read>(reader: R, layout: Layout) -> Result<Vec<TimeSeries>> {
    Ok(load_csv_labeled(reader, layout)?
        .into_iter()
        .map(|l| l.series)
        .collect())
}

/// Like [`load_csv`] but opens `path`, prefixing errors with it.
pub fn load_csv_path(path: &Path, layout: Layout) -> Result<Vec<LabeledSeries>> {
    let file = File::open(path).map_err(|e| Error::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    load_csv_labeled(file, layout).map_err(|e| Error::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_csv_labeled<R: Read>(reader: R, layout: Layout) -> Result<Vec<LabeledSeries>> {
    // Comments are filtered here rather than by the csv reader so that
    // reported line numbers match the file.
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records().filter(|r| match r {
        Ok(rec) => !rec.get(0).is_some_and(|f| f.starts_with('#')),
        Err(_) => true,
    });

    let headers = match records.next() {
        Some(r) => r?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty input, expected a header".into(),
            })
        }
    };
    let header_line = headers.position().map(|p| p.line()).unwrap_or(1);
    let lead = match layout {
        Layout::Wide => &["t"][..],
        Layout::Long => &["series_id", "t"][..],
    };
    let ok = headers.len() > lead.len()
        && lead.iter().zip(headers.iter()).all(|(want, got)| *want == got);
    if !ok {
        let expected = match layout {
            Layout::Wide => "t,c1,...,cd",
            Layout::Long => "series_id,t,c1,...,cd",
        };
        return Err(Error::Parse {
            line: header_line,
            message: format!(
                "malformed header {:?}, expected {expected}",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let width = headers.len();
    let dim = width - lead.len();

    let mut groups: Vec<Pending> = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let parse = |k: usize| -> Result<f64> {
            let raw = &record[k];
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("field {} is not a finite number: {raw:?}", k + 1),
                })
        };
        let (id, t_col) = match layout {
            Layout::Wide => (String::new(), 0),
            Layout::Long => (record[0].to_string(), 1),
        };
        let t = parse(t_col)?;
        let group = match groups.iter().position(|g| g.id == id) {
            Some(k) => &mut groups[k],
            None => {
                groups.push(Pending {
                    id,
                    first_line: line,
                    last_line: line,
                    times: Vec::new(),
                    values: Vec::new(),
                });
                groups.last_mut().unwrap()
            }
        };
        if let Some(&prev) = group.times.last() {
            if t <= prev {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "time {t} does not increase past {prev} (previous sample on line {})",
                        group.last_line
                    ),
                });
            }
        }
        group.times.push(t);
        for k in t_col + 1..width {
            group.values.push(parse(k)?);
        }
        group.last_line = line;
    }

    if groups.is_empty() {
        return Err(Error::Parse {
            line: header_line,
            message: "no data rows".into(),
        });
    }
    groups
        .into_iter()
        .map(|g| {
            let series = TimeSeries::new(g.times, g.values, dim).map_err(|e| Error::Parse {
                line: g.first_line,
                message: e.to_string(),
            })?;
            Ok(LabeledSeries { id: g.id, series })
        })
        .collect()
}

/// Writes series in the given layout. Wide output accepts exactly one series.
///
/// Numbers use the shortest representation that round-trips exactly.
pub fn write_csv<W: Write>(writer: W, series: &[LabeledSeries], layout: Layout) -> Result<()> {
    let dim = match series.first() {
        Some(s) => s.series.dim(),
        None => return Err(Error::Input("nothing to write".into())),
    };
    if series.iter().any(|s| s.series.dim() != dim) {
        return Err(Error::Shape("series of differing dimensions".into()));
    }
    if layout == Layout::Wide && series.len() != 1 {
        return Err(Error::Input(format!(
            "wide layout holds one series, got {}",
            series.len()
        )));
    }
    let mut wtr = csv::WriterBuilder::new().from_writer(writer);
    let mut header: Vec<String> = match layout {
        Layout::Wide => vec!["t".into()],
        Layout::Long => vec!["series_id".into(), "t".into()],
    };
    header.extend((1..=dim).map(|k| format!("c{k}")));
    wtr.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for s in series {
        for (t, sample) in s.series.times().iter().zip(s.series.samples()) {
            row.clear();
            if layout == Layout::Long {
                row.push(s.id.clone());
            }
            row.push(format_number(*t));
            row.extend(sample.iter().map(|v| format_number(*v)));
            wtr.write_record(&row)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub(crate) fn format_number(v: f64) -> String {
    format!("{v:?}")
}
