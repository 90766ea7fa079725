//! CSV and JSON-lines serialization of result records. CSV numbers use
//! 17 significant digits; lines end in `\n`.

use std::io::{self, Write};

use super::run::ResultRecord;

const TAIL: [&str; 10] = [
    "observable",
    "wv_re",
    "wv_im",
    "mean_q",
    "mean_p",
    "success_prob",
    "fit_re",
    "fit_im",
    "residual",
    "error",
];

pub fn csv_header(param_names: &[String]) -> Vec<String> {
    let mut header = vec!["scenario".to_string()];
    header.extend(param_names.iter().cloned());
    header.extend(TAIL.iter().map(|s| s.to_string()));
    header
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// One row per (record, observable); a record without observables still gets
/// one row carrying its meter readout and fit.
pub fn write_csv<W: Write>(out: W, records: &[ResultRecord]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let names: Vec<String> = records
        .first()
        .map(|r| r.params.iter().map(|(k, _)| k.clone()).collect())
        .unwrap_or_default();
    w.write_record(csv_header(&names))?;
    for r in records {
        let observables: Vec<Option<&super::ObservableValue>> = if r.weak_values.is_empty() {
            vec![None]
        } else {
            r.weak_values.iter().map(Some).collect()
        };
        for obs in observables {
            let mut row = vec![r.scenario.clone()];
            row.extend(r.params.iter().map(|(_, v)| num(*v)));
            row.push(obs.map(|o| o.observable.clone()).unwrap_or_default());
            row.push(opt(obs.map(|o| o.re)));
            row.push(opt(obs.map(|o| o.im)));
            row.push(opt(r.readout.map(|m| m.mean_q)));
            row.push(opt(r.readout.map(|m| m.mean_p)));
            row.push(opt(r.readout.map(|m| m.success_probability)));
            row.push(opt(r.fit.map(|f| f.re)));
            row.push(opt(r.fit.map(|f| f.im)));
            row.push(opt(r.fit.map(|f| f.residual)));
            row.push(r.error.clone().unwrap_or_default());
            w.write_record(&row)?;
        }
    }
    w.flush()
}

/// One JSON object per line. Floats use the shortest text that parses back to
/// the same bits.
pub fn write_records<W: Write>(mut out: W, records: &[ResultRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
