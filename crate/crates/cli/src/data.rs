//! File formats: one-column series CSVs, draws CSVs and density grids.
//!
//! Every number is written with 17 significant digits so that values survive
//! a write/read cycle bit for bit.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mar_core::sampler::Draw;
use mar_core::summary::parameter_traces;
use mar_core::{MarSpec, TimeSeries};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Raw values of a one-column CSV with an optional single header line.
pub fn read_column<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut values = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.with_context(|| format!("CSV row {}", i + 1))?;
        if record.len() != 1 {
            bail!("row {} has {} columns; the input must have exactly one", i + 1, record.len());
        }
        let field = &record[0];
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => {} // header
            Err(_) => bail!("row {}: {field:?} is not a number", i + 1),
        }
    }
    Ok(values)
}

/// Applies the explicit transforms: logs first, then first differences.
pub fn transform(values: Vec<f64>, log: bool, difference: bool) -> Result<TimeSeries> {
    let values = if log {
        if let Some(v) = values.iter().find(|v| **v <= 0.0) {
            bail!("log transform needs positive data, found {v}");
        }
        values.iter().map(|v| v.ln()).collect()
    } else {
        values
    };
    let series = TimeSeries::new(values).map_err(|e| anyhow!("{e}"))?;
    if difference {
        series.differenced().map_err(|e| anyhow!("{e}"))
    } else {
        Ok(series)
    }
}

pub fn read_series(path: &Path, log: bool, difference: bool) -> Result<(TimeSeries, usize)> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let raw = read_column(file).with_context(|| format!("reading {}", path.display()))?;
    let n = raw.len();
    Ok((transform(raw, log, difference)?, n))
}

pub fn write_series(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["y"])?;
    for v in series.values() {
        w.write_record([fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one row per draw: `lambda` followed by the named parameter traces.
pub fn write_draws<W: Write>(writer: W, draws: &[Draw]) -> Result<()> {
    let traces = parameter_traces(draws).map_err(|e| anyhow!("{e}"))?;
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["lambda".to_string()];
    header.extend(traces.iter().map(|(n, _)| n.clone()));
    w.write_record(&header)?;
    for (i, d) in draws.iter().enumerate() {
        let mut row = vec![fmt_f64(d.lambda)];
        row.extend(traces.iter().map(|(_, t)| fmt_f64(t[i])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads draws written by [`write_draws`]; orders come from the header.
pub fn read_draws<R: Read>(reader: R) -> Result<Vec<Draw>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let layout = DrawLayout::from_header(&header)?;
    let mut draws = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row: Vec<f64> = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| anyhow!("draws row {}: {f:?} is not a number", i + 1)))
            .collect::<Result<_>>()?;
        if row.len() != header.len() {
            bail!("draws row {} has {} fields, expected {}", i + 1, row.len(), header.len());
        }
        draws.push(layout.draw(&row)?);
    }
    Ok(draws)
}

pub fn read_draws_file(path: &Path) -> Result<Vec<Draw>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_draws(file).with_context(|| format!("reading {}", path.display()))
}

/// Column positions of every parameter in a draws header.
struct DrawLayout {
    lambda: usize,
    weight: Vec<usize>,
    mean: Vec<usize>,
    shift: Vec<usize>,
    ar: Vec<Vec<usize>>,
    scale: Vec<usize>,
}

impl DrawLayout {
    fn from_header(header: &[String]) -> Result<Self> {
        let find = |name: &str| {
            header.iter().position(|h| h == name).ok_or_else(|| anyhow!("draws header lacks column {name:?}"))
        };
        let g = (1..).take_while(|c| header.iter().any(|h| *h == format!("pi_{c}"))).count();
        if g == 0 {
            bail!("draws header has no pi_1 column");
        }
        let mut layout = DrawLayout {
            lambda: find("lambda")?,
            weight: Vec::new(),
            mean: Vec::new(),
            shift: Vec::new(),
            ar: Vec::new(),
            scale: Vec::new(),
        };
        for c in 1..=g {
            layout.weight.push(find(&format!("pi_{c}"))?);
            layout.mean.push(find(&format!("mu_{c}"))?);
            layout.shift.push(find(&format!("phi_{c}_0"))?);
            let p = (1..).take_while(|i| header.iter().any(|h| *h == format!("phi_{c}_{i}"))).count();
            layout.ar.push((1..=p).map(|i| find(&format!("phi_{c}_{i}"))).collect::<Result<_>>()?);
            layout.scale.push(find(&format!("sigma_{c}"))?);
        }
        Ok(layout)
    }

    fn draw(&self, row: &[f64]) -> Result<Draw> {
        let pick = |cols: &[usize]| cols.iter().map(|&c| row[c]).collect::<Vec<_>>();
        let spec = MarSpec::new(
            pick(&self.weight),
            pick(&self.shift),
            self.ar.iter().map(|cols| pick(cols)).collect(),
            pick(&self.scale),
        )
        .map_err(|e| anyhow!("{e}"))?;
        Ok(Draw { spec, means: pick(&self.mean), lambda: row[self.lambda] })
    }
}

/// Writes `header` then one row per index of the equally long `columns`.
pub fn write_columns(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    let n = columns.first().map_or(0, |c| c.len());
    for i in 0..n {
        w.write_record(columns.iter().map(|c| fmt_f64(c[i])))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(file, value)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use mar_core::presets;

    #[test]
    fn header_is_optional() {
        assert_eq!(read_column("y\n1\n2.5\n".as_bytes()).unwrap(), vec![1.0, 2.5]);
        assert_eq!(read_column("1\n2.5\n".as_bytes()).unwrap(), vec![1.0, 2.5]);
        assert!(read_column("y\n1\nx\n".as_bytes()).is_err());
        assert!(read_column("1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn transforms_are_explicit_and_ordered() {
        let s = transform(vec![1.0, std::f64::consts::E, 1.0], true, true).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.values()[0] - 1.0).abs() < 1e-15);
        assert!(transform(vec![1.0, -1.0], true, false).is_err());
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.718281828459045e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn draws_round_trip_exactly() {
        let b = presets::model_b();
        let draws: Vec<Draw> = (0..5)
            .map(|i| {
                let mut d = Draw { spec: b.clone(), means: vec![0.1 * i as f64, 1.0 / 3.0, -0.7], lambda: 1.0 / 7.0 };
                d.lambda += i as f64;
                d
            })
            .collect();
        let mut buf = Vec::new();
        write_draws(&mut buf, &draws).unwrap();
        assert_eq!(read_draws(buf.as_slice()).unwrap(), draws);
    }
}
