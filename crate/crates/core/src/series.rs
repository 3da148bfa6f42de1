//! Aligned realizations and forecast tracks, plus the CSV schema used to
//! move them in and out of the library.
//!
//! The CSV layout is a header row followed by one row per time point. The
//! column `y` holds realizations, an optional column `t` holds timestamp
//! labels, and every other column is a forecast track. Values are written
//! with 17 significant digits so that a write/read cycle is lossless.

use std::io::{Read, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries {
    y: Vec<f64>,
    tracks: Vec<Track>,
    timestamps: Option<Vec<String>>,
}

impl PairedSeries {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptySample);
        }
        check_finite("y", &y)?;
        Ok(Self {
            y,
            tracks: Vec::new(),
            timestamps: None,
        })
    }

    /// Builder-style track insertion. Replaces an existing track of the same name.
    pub fn with_track(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        self.insert_track(name, values)?;
        Ok(self)
    }

    pub fn insert_track(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.y.len() {
            return Err(Error::LengthMismatch {
                track: name,
                len: values.len(),
                expected: self.y.len(),
            });
        }
        check_finite(&name, &values)?;
        match self.tracks.iter_mut().find(|t| t.name == name) {
            Some(t) => t.values = values,
            None => self.tracks.push(Track { name, values }),
        }
        Ok(())
    }

    pub fn with_timestamps(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.y.len() {
            return Err(Error::LengthMismatch {
                track: "t".into(),
                len: labels.len(),
                expected: self.y.len(),
            });
        }
        self.timestamps = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn track_names(&self) -> Vec<&str> {
        self.tracks.iter().map(|t| t.name.as_str()).collect()
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    pub fn track(&self, name: &str) -> Result<&[f64]> {
        self.tracks
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.values.as_slice())
            .ok_or_else(|| Error::UnknownTrack(name.to_string()))
    }

    /// Subtracts the sample mean from `y` and from every track.
    pub fn centered(&self) -> Self {
        let center = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| x - m).collect::<Vec<_>>()
        };
        Self {
            y: center(&self.y),
            tracks: self
                .tracks
                .iter()
                .map(|t| Track {
                    name: t.name.clone(),
                    values: center(&t.values),
                })
                .collect(),
            timestamps: self.timestamps.clone(),
        }
    }

    /// Rows `start..start + len`, keeping every track aligned.
    pub fn window(&self, start: usize, len: usize) -> Self {
        let r = start..start + len;
        Self {
            y: self.y[r.clone()].to_vec(),
            tracks: self
                .tracks
                .iter()
                .map(|t| Track {
                    name: t.name.clone(),
                    values: t.values[r.clone()].to_vec(),
                })
                .collect(),
            timestamps: self.timestamps.as_ref().map(|ts| ts[r.clone()].to_vec()),
        }
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let y_col = headers
            .iter()
            .position(|h| h.trim() == "y")
            .ok_or(Error::Malformed {
                row: 1,
                column: "y".into(),
                message: "required column `y` is missing".into(),
            })?;
        let t_col = headers.iter().position(|h| h.trim() == "t");
        let track_cols: Vec<(usize, String)> = headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != y_col && Some(*i) != t_col)
            .map(|(i, h)| (i, h.trim().to_string()))
            .collect();

        let mut y = Vec::new();
        let mut labels = Vec::new();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); track_cols.len()];
        for (idx, record) in rdr.records().enumerate() {
            // header is line 1
            let row = idx + 2;
            let record = record?;
            if record.len() != headers.len() {
                return Err(Error::Malformed {
                    row,
                    column: String::new(),
                    message: format!("expected {} fields, found {}", headers.len(), record.len()),
                });
            }
            y.push(parse_field(&record, y_col, "y", row)?);
            if let Some(tc) = t_col {
                labels.push(record[tc].to_string());
            }
            for ((col, name), out) in track_cols.iter().zip(columns.iter_mut()) {
                out.push(parse_field(&record, *col, name, row)?);
            }
        }
        if y.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut series = PairedSeries::new(y)?;
        for ((_, name), values) in track_cols.into_iter().zip(columns) {
            series.insert_track(name, values)?;
        }
        if t_col.is_some() {
            series = series.with_timestamps(labels)?;
        }
        Ok(series)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = Vec::with_capacity(self.tracks.len() + 2);
        if self.timestamps.is_some() {
            header.push("t".to_string());
        }
        header.push("y".to_string());
        header.extend(self.tracks.iter().map(|t| t.name.clone()));
        wtr.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = Vec::with_capacity(header.len());
            if let Some(ts) = &self.timestamps {
                rec.push(ts[i].clone());
            }
            rec.push(format_full(self.y[i]));
            rec.extend(self.tracks.iter().map(|t| format_full(t.values[i])));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_full(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_field(record: &csv::StringRecord, col: usize, name: &str, row: usize) -> Result<f64> {
    let raw = record[col].trim();
    let v: f64 = raw.parse().map_err(|_| Error::Malformed {
        row,
        column: name.to_string(),
        message: format!("cannot parse `{raw}` as a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFinite {
            column: name.to_string(),
            row,
        });
    }
    Ok(v)
}

fn check_finite(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite {
            column: name.to_string(),
            row: i,
        }),
        None => Ok(()),
    }
}
