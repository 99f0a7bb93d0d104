//! Reading estimation data from CSV files with header `x1..xp,t,y`.

use std::path::Path;

use ace_core::Dataset;
use ndarray::{Array1, Array2};

use crate::error::{CliError, CliResult};

fn check_header(header: &csv::StringRecord) -> CliResult<usize> {
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    let bad = || {
        CliError::Data {
            line: 1,
            message: format!("header must be x1,...,xp,t,y with p >= 1, got {:?}", names.join(",")),
        }
    };
    if names.len() < 3 || names[names.len() - 2] != "t" || names[names.len() - 1] != "y" {
        return Err(bad());
    }
    let p = names.len() - 2;
    for (j, name) in names[..p].iter().enumerate() {
        if *name != format!("x{}", j + 1) {
            return Err(bad());
        }
    }
    Ok(p)
}

fn line_of(e: &csv::Error) -> u64 {
    e.position().map_or(0, |p| p.line())
}

/// Parse a dataset from any reader.
pub fn read_dataset<R: std::io::Read>(reader: R) -> CliResult<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| CliError::Data {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let p = check_header(&header)?;

    let mut values = Vec::new();
    let mut rows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Data {
            line: line_of(&e),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |pos| pos.line());
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| CliError::Data {
                line,
                message: format!("column {:?}: {cell:?} is not a number", &header[j]),
            })?;
            if !v.is_finite() {
                return Err(CliError::Data {
                    line,
                    message: format!("column {:?}: non-finite value {cell:?}", &header[j]),
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    let all = Array2::from_shape_vec((rows, p + 2), values).expect("record lengths checked by the reader");
    let x = all.slice(ndarray::s![.., ..p]).to_owned();
    let t: Array1<f64> = all.column(p).to_owned();
    let y: Array1<f64> = all.column(p + 1).to_owned();
    Ok(Dataset::new(x, t, y)?)
}

pub fn load_dataset(path: &Path) -> CliResult<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_dataset(std::io::BufReader::new(file))
}

/// Write `data` in the format [`read_dataset`] accepts.
pub fn write_dataset<W: std::io::Write>(writer: W, data: &Dataset) -> CliResult<()> {
    let to_io = |e: csv::Error| CliError::io(Path::new("<csv>"), std::io::Error::other(e));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let mut header: Vec<String> = (1..=data.dim()).map(|j| format!("x{j}")).collect();
    header.push("t".into());
    header.push("y".into());
    w.write_record(&header).map_err(to_io)?;
    for i in 0..data.len() {
        let mut row: Vec<String> = data.x.row(i).iter().map(f64::to_string).collect();
        row.push(data.t[i].to_string());
        row.push(data.y[i].to_string());
        w.write_record(&row).map_err(to_io)?;
    }
    w.flush().map_err(|e| CliError::io(Path::new("<csv>"), e))
}
