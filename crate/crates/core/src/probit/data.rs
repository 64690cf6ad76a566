use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const PIMA_HEADER: [&str; 4] = ["type", "glu", "bp", "ped"];
static BUNDLED_PIMA: &str = include_str!("../../data/pima_te.csv");

/// Binary responses with a dense design matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbitData {
    n: usize,
    k: usize,
    x: Vec<f64>,
    y: Vec<bool>,
    columns: Vec<String>,
}

impl ProbitData {
    pub fn new(x: Vec<f64>, k: usize, y: Vec<bool>, columns: Vec<String>) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::input("no observations"));
        }
        if k == 0 || x.len() != n * k {
            return Err(Error::input(format!(
                "design has {} values, expected {n} rows x {k} columns",
                x.len()
            )));
        }
        if columns.len() != k {
            return Err(Error::input(format!("{} column names for {k} columns", columns.len())));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite design value in row {}", i / k + 1)));
        }
        Ok(ProbitData { n, k, x, y, columns })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.x.chunks_exact(self.k)
    }

    pub fn y(&self) -> &[bool] {
        &self.y
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// `XᵀX`
    pub fn gram(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.k, self.k);
        for r in self.rows() {
            for a in 0..self.k {
                for b in 0..=a {
                    g[(a, b)] += r[a] * r[b];
                }
            }
        }
        for a in 0..self.k {
            for b in 0..a {
                g[(b, a)] = g[(a, b)];
            }
        }
        g
    }

    /// The same observations with column `j` removed.
    pub fn without_column(&self, j: usize) -> Result<ProbitData> {
        if j >= self.k || self.k == 1 {
            return Err(Error::param(format!("cannot drop column {j} of {}", self.k)));
        }
        let x = self
            .rows()
            .flat_map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v))
            .collect();
        let columns = self
            .columns
            .iter()
            .enumerate()
            .filter(|(c, _)| *c != j)
            .map(|(_, s)| s.clone())
            .collect();
        ProbitData::new(x, self.k - 1, self.y.clone(), columns)
    }
}

/// Reads a Pima CSV (`type,glu,bp,ped`; type ∈ {0,1}).
pub fn load_pima(path: impl AsRef<Path>) -> Result<ProbitData> {
    let path = path.as_ref();
    let mut text = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_pima(&text, &path.display().to_string())
}

/// The 332-row Pima test partition shipped with the crate.
pub fn bundled_pima() -> ProbitData {
    parse_pima(BUNDLED_PIMA, "bundled pima_te.csv").expect("bundled Pima file is valid")
}

pub fn parse_pima(text: &str, origin: &str) -> Result<ProbitData> {
    if text.trim().is_empty() {
        return Err(Error::input(format!("{origin}: empty file")));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .quoting(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::input(format!("{origin}: unreadable header: {e}")))?
        .clone();
    if header.iter().collect::<Vec<_>>() != PIMA_HEADER {
        return Err(Error::input(format!(
            "{origin}: header must be `{}`, got `{}`",
            PIMA_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        // data rows are numbered from 1; the header is line 1 of the file
        let row = idx + 1;
        let record = record.map_err(|e| Error::input(format!("{origin}: row {row}: {e}")))?;
        if record.len() != PIMA_HEADER.len() {
            return Err(Error::input(format!(
                "{origin}: row {row}: expected {} fields, got {}",
                PIMA_HEADER.len(),
                record.len()
            )));
        }
        let label = match &record[0] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::input(format!(
                    "{origin}: row {row}: type must be 0 or 1, got `{other}`"
                )))
            }
        };
        for (field, name) in record.iter().zip(PIMA_HEADER).skip(1) {
            let v: f64 = field.parse().map_err(|_| {
                Error::input(format!("{origin}: row {row}: `{name}` is not a number: `{field}`"))
            })?;
            if !v.is_finite() {
                return Err(Error::input(format!("{origin}: row {row}: `{name}` is not finite")));
            }
            x.push(v);
        }
        y.push(label);
    }
    if y.is_empty() {
        return Err(Error::input(format!("{origin}: no data rows")));
    }
    ProbitData::new(
        x,
        PIMA_HEADER.len() - 1,
        y,
        PIMA_HEADER[1..].iter().map(|s| s.to_string()).collect(),
    )
}
