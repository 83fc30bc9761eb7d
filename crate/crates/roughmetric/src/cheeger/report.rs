//! Deficit reports: JSON documents and CSV summary rows binding the four
//! energies, the combined deficit, the closed-form prediction, the carried
//! error bounds and the verdict into one serializable record.

use serde::Serialize;

use crate::cheeger::energy::{
    cheeger_energy, energy_over, ex2_decomposition, ex3_decomposition, hilbertian_verdict,
    parallelogram_deficit, Energy, WugEvaluator,
};
use crate::cheeger::ex3::Ex3Parts;
use crate::cheeger::region::{volume, Measured, Region};
use crate::error::{Error, Result};
use crate::exact;
use crate::fields::MetricField;

pub const REPORT_SCHEMA: &str = "cheeger-report/v1";

pub const CHEEGER_CSV_HEADER: &str =
    "field,n,ch1,ch2,ch3,ch4,deficit,prediction,error,verdict,margin";

/// A measured quantity as serialized: float value, optional exact value as
/// a lossless `p/q` string, and the propagated error bound.
#[derive(Clone, Debug, Serialize)]
pub struct ReportNumber {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub error: f64,
}

impl From<&Measured> for ReportNumber {
    fn from(m: &Measured) -> Self {
        ReportNumber {
            value: m.value,
            exact: m.exact.as_ref().map(exact::format),
            error: m.error,
        }
    }
}

/// One deficit computation, ready for `to_json` / `csv_row`.
#[derive(Clone, Debug, Serialize)]
pub struct CheegerReport {
    pub schema: &'static str,
    pub field: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    pub decomposition: String,
    pub energies: Vec<ReportNumber>,
    pub deficit: ReportNumber,
    pub prediction: ReportNumber,
    /// Total unresolved mass: quadrature bounds plus the hierarchy tail.
    pub tail_bound: f64,
    pub tolerance: f64,
    pub verdict: String,
    pub margin: f64,
}

impl CheegerReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Diagnostic(format!("report serialization: {e}")))
    }

    pub fn csv_row(&self) -> String {
        let n = self.n.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.field,
            n,
            self.energies[0].value,
            self.energies[1].value,
            self.energies[2].value,
            self.energies[3].value,
            self.deficit.value,
            self.prediction.value,
            self.deficit.error,
            self.verdict,
            self.margin,
        )
    }
}

fn assemble(
    field: &str,
    n: Option<u32>,
    energies: [Energy; 4],
    prediction: Measured,
    tolerance: f64,
) -> Result<CheegerReport> {
    let deficit = parallelogram_deficit(&energies)?;
    let verdict = hilbertian_verdict(&deficit, tolerance);
    let margin = deficit.value.abs() - tolerance - deficit.error;
    Ok(CheegerReport {
        schema: REPORT_SCHEMA,
        field: field.into(),
        n,
        decomposition: energies[0].decomposition.clone(),
        energies: energies.iter().map(|e| ReportNumber::from(&e.measured)).collect(),
        deficit: ReportNumber::from(&deficit),
        prediction: ReportNumber::from(&prediction),
        tail_bound: deficit.error,
        tolerance,
        verdict: verdict.as_str().into(),
        margin,
    })
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(Error::Parameter(format!(
            "tolerance must be a finite non-negative float, got {tolerance}"
        )));
    }
    Ok(())
}

/// Full deficit report for the cube-cutoff pair construction. Energies and
/// deficit are exact rationals in even dimension; the prediction is minus
/// half the weighted bad-set volume, and the two must agree exactly.
pub fn ex2_report(field: &MetricField, tolerance: f64) -> Result<CheegerReport> {
    check_tolerance(tolerance)?;
    if !matches!(field, MetricField::Ex2 { .. }) {
        return Err(Error::Parameter(
            "pair-construction reports need the cube-localized channel field".into(),
        ));
    }
    let regions = ex2_decomposition();
    let mut energies = Vec::with_capacity(4);
    for i in 1..=4u8 {
        energies.push(energy_over(field, &WugEvaluator::Ex2Table { i }, &regions)?);
    }
    let energies: [Energy; 4] = energies.try_into().expect("four energies");
    let prediction = volume(field, &Region::BadSet)?.scale_ratio(-1, 2);
    assemble("EX2", None, energies, prediction, tolerance)
}

/// Deficit reports for the column functions at each requested window, with
/// the collar integrals computed once and shared across windows.
pub fn ex3_deficit_series(
    field: &MetricField,
    ns: &[u32],
    tolerance: f64,
) -> Result<Vec<CheegerReport>> {
    check_tolerance(tolerance)?;
    let h = match field {
        MetricField::Ex3 { hierarchy } => hierarchy,
        _ => {
            return Err(Error::Parameter(
                "column reports need the ball-hierarchy field".into(),
            ))
        }
    };
    if ns.is_empty() {
        return Err(Error::Parameter("no window indices requested".into()));
    }
    let parts = Ex3Parts::new(h)?;
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        if n == 0 {
            return Err(Error::Parameter("window index n must be at least 1".into()));
        }
        let regions = ex3_decomposition(n);
        let tag = regions
            .iter()
            .map(|r| r.label())
            .collect::<Vec<_>>()
            .join(" + ");
        // The collar integrals are window-independent; take them from the
        // shared cache and run only the inner regions per window.
        let mut energies = Vec::with_capacity(4);
        for i in 1..=4u8 {
            let wug = WugEvaluator::Ex3Column { i, n };
            let mut total = Measured::zero();
            for r in &regions[..regions.len() - 1] {
                total = total.add(&cheeger_energy(field, &wug, r)?.measured);
            }
            let (cv, ce) = parts.collar_energy(i);
            total = total.add(&Measured::approx(cv, ce));
            energies.push(Energy {
                measured: total,
                decomposition: tag.clone(),
            });
        }
        let energies: [Energy; 4] = energies.try_into().expect("four energies");
        let prediction = parts.deficit_prediction(n);
        out.push(assemble("EX3", Some(n), energies, prediction, tolerance)?);
    }
    Ok(out)
}

/// Single-window column report.
pub fn ex3_report(field: &MetricField, n: u32, tolerance: f64) -> Result<CheegerReport> {
    Ok(ex3_deficit_series(field, &[n], tolerance)?
        .pop()
        .expect("one report"))
}
