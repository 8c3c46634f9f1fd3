//! Hardness versus copper content: per-alloy Brinell means drawn from the
//! graph with one SPARQL join.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::vocabulary::steel;
use crate::{ns, CoreError, Dataspace, Result};

/// Aggregate for one alloy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlloySummary {
    pub alloy: String,
    pub samples: usize,
    pub mean_brinell: f64,
    /// Mean copper content over the samples, wt.%.
    pub copper: f64,
    /// Set on the alloy with the highest mean hardness.
    pub hardest: bool,
}

/// The query used by [`hardness_by_alloy`]; one row per hardness item.
pub fn hardness_query() -> String {
    format!(
        "SELECT ?item ?alloy ?hb ?cu WHERE {{
  ?item <{m}> ?c . ?c a <{comp}> . ?c <{v}> ?alloy .
  ?item <{m}> ?h . ?h a <{hb}> . ?h <{v}> ?hb .
  ?item <{m}> ?k . ?k a <{cu}> . ?k <{v}> ?cu .
}}",
        m = ns::HAS_METADATUM,
        v = ns::VALUE,
        comp = steel::TEST_PIECE_COMPOSITION,
        hb = steel::BRINELL_HARDNESS,
        cu = steel::COPPER_CONTENT,
    )
}

/// Groups hardness measurements by alloy, sorted by alloy name. Rows with
/// non-numeric hardness or copper values are rejected.
pub fn hardness_by_alloy(ds: &Dataspace) -> Result<Vec<AlloySummary>> {
    let solutions = ds.sparql(&hardness_query())?;
    // alloy -> (hardness values, copper values)
    let mut groups: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for row in solutions.bindings() {
        let number = |var: &str| {
            row.get(var)
                .and_then(|t| t.as_literal())
                .and_then(|l| l.as_f64())
                .ok_or_else(|| CoreError::Invalid(format!("non-numeric ?{var} in hardness row")))
        };
        let alloy = row
            .get("alloy")
            .and_then(|t| t.as_literal())
            .map(|l| l.lexical().to_string())
            .ok_or_else(|| CoreError::Invalid("composition is not a literal".into()))?;
        let (hb, cu) = (number("hb")?, number("cu")?);
        let g = groups.entry(alloy).or_default();
        g.0.push(hb);
        g.1.push(cu);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut out: Vec<AlloySummary> = groups
        .into_iter()
        .map(|(alloy, (hb, cu))| AlloySummary {
            alloy,
            samples: hb.len(),
            mean_brinell: mean(&hb),
            copper: mean(&cu),
            hardest: false,
        })
        .collect();
    if let Some(best) = out
        .iter_mut()
        .max_by(|a, b| a.mean_brinell.total_cmp(&b.mean_brinell))
    {
        best.hardest = true;
    }
    Ok(out)
}
