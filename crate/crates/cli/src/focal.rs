use anyhow::Result;
use serde::Serialize;
use simnerve_core::opportunity::{color_network, highlight_and_classify, ContiguityClassification};
use simnerve_core::{FocalReport, MapperNetwork};

/// JSON body of a focal query: the ranked lists plus, when a network is
/// supplied, the contiguity split at both thresholds.
#[derive(Debug, Serialize)]
pub struct FocalDocument {
    pub focal_id: i64,
    pub if_text: String,
    pub then_text: String,
    pub within: f64,
    pub r_functional_cc: Option<f64>,
    pub exploitation: Vec<simnerve_core::opportunity::Candidate>,
    pub exploration: Vec<simnerve_core::opportunity::Candidate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional_contiguity: Option<ContiguityClassification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_capacity_contiguity: Option<ContiguityClassification>,
}

pub fn focal_document(
    report: &FocalReport,
    network: Option<&MapperNetwork>,
    functional_threshold: f64,
    cross_capacity_threshold: f64,
) -> Result<FocalDocument> {
    let (functional_contiguity, cross_capacity_contiguity) = match network {
        Some(net) => {
            let f = color_network(net, &report.functional_values())?;
            let c = color_network(net, &report.cross_capacity_values())?;
            (
                Some(highlight_and_classify(net, &f, functional_threshold, report.focal_id)),
                Some(highlight_and_classify(net, &c, cross_capacity_threshold, report.focal_id)),
            )
        }
        None => (None, None),
    };
    Ok(FocalDocument {
        focal_id: report.focal_id,
        if_text: report.focal_if_text.clone(),
        then_text: report.focal_then_text.clone(),
        within: report.within_focal,
        r_functional_cc: report.r_functional_cc,
        exploitation: report.exploitation.clone(),
        exploration: report.exploration.clone(),
        functional_contiguity,
        cross_capacity_contiguity,
    })
}
