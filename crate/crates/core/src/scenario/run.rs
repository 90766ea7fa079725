use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::{param_label, ScenarioDoc, ScenarioError};
use crate::dynamics::{self, MeasurementOutcome};
use crate::meter::{make_meter, MeterReadout};
use crate::optics;
use crate::weakvalue::{weak_value, ObservableCatalog};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableValue {
    pub observable: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitRecord {
    pub re: f64,
    pub im: f64,
    pub a_re: f64,
    pub a_im: f64,
    pub residual: f64,
}

/// One parameter point of a scenario. Angles are reported in units of pi.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub scenario: String,
    #[serde(serialize_with = "ordered_params")]
    pub params: Vec<(String, f64)>,
    pub weak_values: Vec<ObservableValue>,
    pub readout: Option<MeterReadout>,
    pub fit: Option<FitRecord>,
    pub provenance: String,
    pub error: Option<String>,
}

fn ordered_params<S: Serializer>(params: &[(String, f64)], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(params.len()))?;
    for (k, v) in params {
        map.serialize_entry(k, v)?;
    }
    map.end()
}

/// Evaluate every sweep point in parallel; records come back in sweep order.
/// Computation failures land in the record's `error` field.
pub fn run_scenario(doc: &ScenarioDoc) -> std::result::Result<Vec<ResultRecord>, ScenarioError> {
    doc.validate()?;
    let names = doc.param_names();
    let provenance = doc.provenance_hash();
    let points = doc.points()?;
    Ok(points
        .par_iter()
        .map(|point| {
            let params = names
                .iter()
                .map(|path| (param_label(path).to_string(), point.numeric(path).unwrap_or(f64::NAN)))
                .collect();
            let mut record = ResultRecord {
                scenario: doc.name.clone(),
                params,
                weak_values: Vec::new(),
                readout: None,
                fit: None,
                provenance: provenance.clone(),
                error: None,
            };
            if let Err(e) = evaluate(point, &mut record) {
                record.error = Some(e.to_string());
            }
            record
        })
        .collect())
}

fn evaluate(point: &ScenarioDoc, record: &mut ResultRecord) -> Result<()> {
    let pre = optics::prepare_state(point.preselect.state, &point.preselect.params())?;
    let post = optics::prepare_state(point.postselect.state, &point.postselect.params())?;
    let gprime_t = point.coupling.map(|c| c.g_prime * c.t).unwrap_or(0.0);
    let catalog = ObservableCatalog::new(gprime_t);
    for &id in &point.observables {
        let wv = weak_value(&pre, &post, &catalog.operator(id))?;
        record.weak_values.push(ObservableValue {
            observable: id.as_str().to_string(),
            re: wv.value.re,
            im: wv.value.im,
        });
    }
    if let Some(coupling) = &point.coupling {
        let meter = make_meter(point.meter.n, point.meter.delta)?;
        let MeasurementOutcome { readout, fit, .. } = dynamics::measure(&coupling.spec(), &pre, &post, &meter)?;
        record.readout = Some(readout);
        record.fit = Some(FitRecord {
            re: fit.A_fit.re,
            im: fit.A_fit.im,
            a_re: fit.a_fit.re,
            a_im: fit.a_fit.im,
            residual: fit.residual,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{bundle, parse_scenario};
    use super::*;

    #[test]
    fn cheshire_bundle_quartet() {
        let doc = parse_scenario(bundle("cheshire").unwrap()).unwrap();
        let records = run_scenario(&doc).unwrap();
        assert_eq!(records.len(), 1);
        let values: Vec<f64> = records[0].weak_values.iter().map(|v| v.re).collect();
        for (v, e) in values.iter().zip([1.0, 0.0, 0.0, 1.0]) {
            assert!((v - e).abs() < 1e-12);
        }
        assert!(records[0].error.is_none());
    }

    #[test]
    fn sweep_with_degenerate_point() {
        let text = r#"
name = "noisy"
observables = ["sigma_z"]
preselect = { state = "noisy_in" }
postselect = { state = "noisy_f", alpha = 0.0 }

[sweep.alpha]
start = 0.0
stop = 0.5
steps = 3
"#;
        let records = run_scenario(&parse_scenario(text).unwrap()).unwrap();
        assert_eq!(records.len(), 3);
        assert!(records[0].error.is_none() && records[1].error.is_none());
        assert!(records[2].error.as_deref().unwrap().contains("degenerate"));
        assert_eq!(records[1].params, vec![("alpha".to_string(), 0.25)]);
        assert!((records[1].weak_values[0].im - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disembodiment_sweep_count() {
        let text = r#"
name = "sweep"
observables = ["sigma_z_R"]
preselect = { state = "disembody_in", theta = 0.5 }
postselect = { state = "disembody_f", alpha = 0.25 }

[sweep.theta]
start = 0.2
stop = 2.8
steps = 9
"#;
        let records = run_scenario(&parse_scenario(text).unwrap()).unwrap();
        assert_eq!(records.len(), 9);
        for r in &records {
            let theta = r.params[0].1 * std::f64::consts::PI;
            let expected = (theta / 2.0).tan();
            assert!((r.weak_values[0].re - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let doc = parse_scenario(bundle("noisy_spin_orbit").unwrap()).unwrap();
        assert_eq!(run_scenario(&doc).unwrap(), run_scenario(&doc).unwrap());
    }
}
