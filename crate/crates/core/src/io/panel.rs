use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::estimate::{Subject, SubjectPanel};
use crate::model::{BinarySeries, ExogMatrix, ModelSpec};

/// `column>cut` rule turning a numeric covariate into a 0/1 indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub column: String,
    pub cut: f64,
}

impl FromStr for Threshold {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let Some((column, cut)) = s.split_once('>') else {
            return invalid(format!("threshold {s:?} must look like column>cut"));
        };
        let column = column.trim();
        let cut: f64 = cut.trim().parse().map_err(|_| Error::InvalidArgument(format!("threshold cut {cut:?} is not a number")))?;
        if column.is_empty() || !cut.is_finite() {
            return invalid(format!("threshold {s:?} must look like column>cut"));
        }
        Ok(Self { column: column.to_string(), cut })
    }
}

/// One subject's rows from a panel file.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelSubject {
    pub id: String,
    pub y: Vec<u8>,
    /// `T × l`, row-major; empty when the file has no covariates.
    pub x: Vec<f64>,
}

/// In-memory image of a panel CSV: `subject,t,y[,x1..xl]`, subjects in file
/// order, `t` running `1..T` within each subject.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PanelData {
    pub covariates: Vec<String>,
    pub subjects: Vec<PanelSubject>,
}

impl PanelData {
    pub fn n_rows(&self) -> usize {
        self.subjects.iter().map(|s| s.y.len()).sum()
    }

    /// Applies `x := 1[x > cut]` to the named column.
    pub fn apply_threshold(&mut self, th: &Threshold) -> Result<()> {
        let l = self.covariates.len();
        let Some(j) = self.covariates.iter().position(|c| *c == th.column) else {
            return invalid(format!("threshold column {:?} not found among covariates {:?}", th.column, self.covariates));
        };
        for s in &mut self.subjects {
            for row in s.x.chunks_mut(l) {
                row[j] = if row[j] > th.cut { 1.0 } else { 0.0 };
            }
        }
        Ok(())
    }

    /// Keeps only the named covariates, in the given order.
    pub fn select_covariates(&mut self, names: &[String]) -> Result<()> {
        let l = self.covariates.len();
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.covariates
                    .iter()
                    .position(|c| c == n)
                    .ok_or_else(|| Error::InvalidArgument(format!("covariate {n:?} not found among {:?}", self.covariates)))
            })
            .collect::<Result<_>>()?;
        for s in &mut self.subjects {
            s.x = s.x.chunks(l.max(1)).take(s.y.len()).flat_map(|row| idx.iter().map(|&j| row[j])).collect();
            if idx.is_empty() {
                s.x.clear();
            }
        }
        self.covariates = names.to_vec();
        Ok(())
    }

    /// LAR(p)/LARX(p) panel using every covariate column.
    pub fn to_panel(&self, p: usize) -> Result<SubjectPanel> {
        let l = self.covariates.len();
        let spec = ModelSpec::new(p, l)?;
        let subjects = self
            .subjects
            .iter()
            .map(|s| {
                let exog = if l == 0 { None } else { Some(ExogMatrix::new(s.y.len(), l, s.x.clone())?) };
                Ok(Subject::new(s.id.clone(), BinarySeries::new(s.y.clone())?, exog))
            })
            .collect::<Result<Vec<_>>>()?;
        SubjectPanel::new(spec, subjects)
    }

    /// Panel file image of in-memory subjects; covariate names default to
    /// `x1..xl`.
    pub fn from_subjects(subjects: &[Subject], covariates: Option<Vec<String>>) -> Result<Self> {
        let l = subjects.first().and_then(|s| s.exog.as_ref()).map_or(0, |x| x.cols());
        let covariates = covariates.unwrap_or_else(|| (1..=l).map(|j| format!("x{j}")).collect());
        if covariates.len() != l {
            return invalid(format!("{} covariate names for {l} columns", covariates.len()));
        }
        let subjects = subjects
            .iter()
            .map(|s| {
                let x = match &s.exog {
                    Some(m) if m.cols() == l => m.data().to_vec(),
                    None if l == 0 => Vec::new(),
                    _ => return invalid(format!("subject {:?} has inconsistent covariates", s.id)),
                };
                Ok(PanelSubject { id: s.id.clone(), y: s.series.values().to_vec(), x })
            })
            .collect::<Result<_>>()?;
        Ok(Self { covariates, subjects })
    }
}

fn parse_err<T>(line: u64, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line: line as usize, message: message.into() })
}

/// Parses a panel CSV. Errors carry the 1-based line number (header is
/// line 1).
pub fn read_panel<R: Read>(reader: R) -> Result<PanelData> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names.len() < 3 || names[0] != "subject" || names[1] != "t" || names[2] != "y" {
        return parse_err(1, format!("header must start with subject,t,y; found {}", names.join(",")));
    }
    let covariates: Vec<String> = names[3..].iter().map(|s| s.to_string()).collect();
    for (j, c) in covariates.iter().enumerate() {
        if c.is_empty() || covariates[..j].contains(c) || ["subject", "t", "y"].contains(&c.as_str()) {
            return parse_err(1, format!("bad or duplicate covariate name {c:?}"));
        }
    }
    let l = covariates.len();

    let mut data = PanelData { covariates, subjects: Vec::new() };
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 + l {
            return parse_err(line, format!("expected {} fields, found {}", 3 + l, rec.len()));
        }
        let id = &rec[0];
        if id.is_empty() {
            return parse_err(line, "empty subject id");
        }
        let t: usize = rec[1].parse().or_else(|_| parse_err(line, format!("time index {:?} is not a positive integer", &rec[1])))?;
        let y: u8 = match &rec[2] {
            "0" => 0,
            "1" => 1,
            other => return parse_err(line, format!("response {other:?} is not 0 or 1")),
        };

        let new_subject = data.subjects.last().is_none_or(|s| s.id != id);
        if new_subject {
            if data.subjects.iter().any(|s| s.id == id) {
                return parse_err(line, format!("rows of subject {id:?} are not contiguous"));
            }
            data.subjects.push(PanelSubject { id: id.to_string(), y: Vec::new(), x: Vec::new() });
        }
        let subj = data.subjects.last_mut().expect("pushed above");
        let expected = subj.y.len() + 1;
        if t != expected {
            return parse_err(line, format!("subject {id:?}: expected t = {expected}, found {t}"));
        }
        subj.y.push(y);
        for j in 0..l {
            let raw = &rec[3 + j];
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => subj.x.push(v),
                _ => return parse_err(line, format!("covariate {:?} value {raw:?} is not a finite number", data.covariates[j])),
            }
        }
    }
    if data.subjects.is_empty() {
        return parse_err(1, "panel has no data rows");
    }
    Ok(data)
}

/// Writes LF-terminated UTF-8 CSV with shortest round-trip float formatting.
pub fn write_panel<W: Write>(writer: W, data: &PanelData) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let mut header = vec!["subject".to_string(), "t".into(), "y".into()];
    header.extend(data.covariates.iter().cloned());
    w.write_record(&header)?;
    let l = data.covariates.len();
    let mut rec: Vec<String> = Vec::with_capacity(3 + l);
    for s in &data.subjects {
        for (i, &y) in s.y.iter().enumerate() {
            rec.clear();
            rec.push(s.id.clone());
            rec.push((i + 1).to_string());
            rec.push(y.to_string());
            rec.extend(s.x[i * l..(i + 1) * l].iter().map(|v| format!("{v}")));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}
