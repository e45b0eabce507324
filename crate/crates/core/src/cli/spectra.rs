// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::{write_json, SpectraArgs, EXIT_OK};
use crate::error::{Error, Result};
use crate::graph::SimpleGraph;
use crate::io::parse_graph_argument;
use crate::spectral::{
    check_cheeger_sandwich, eigendecompose, laplacian, CheegerResult, CHEEGER_MAX_N,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectraReport {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    /// Laplacian eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub max_degree: usize,
    pub cheeger: Option<CheegerResult>,
    pub isoperimetric_number: Option<f64>,
    /// `pass`, `fail`, or `skipped: <reason>`.
    pub sandwich: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

pub fn spectra_report(g: &SimpleGraph) -> Result<SpectraReport> {
    if g.n() > CHEEGER_MAX_N {
        return Err(Error::SizeLimit(format!(
            "spectra computes the exact Cheeger constant, limited to {CHEEGER_MAX_N} vertices (got {})",
            g.n()
        )));
    }
    let eigenvalues = if g.n() == 0 {
        Vec::new()
    } else {
        eigendecompose(&laplacian(g))?.eigenvalues
    };
    let mut report = SpectraReport {
        n: g.n(),
        edges: g.to_one_based(),
        eigenvalues,
        max_degree: g.max_degree(),
        cheeger: None,
        isoperimetric_number: None,
        sandwich: String::new(),
        lower: None,
        upper: None,
    };
    if g.n() < 2 {
        report.sandwich = "skipped: fewer than two vertices".into();
    } else if !g.is_connected() {
        report.cheeger = Some(crate::spectral::cheeger_constant(g)?);
        report.isoperimetric_number = report.cheeger.as_ref().map(|c| c.value());
        report.sandwich = "skipped: disconnected".into();
    } else {
        let s = check_cheeger_sandwich(g)?;
        report.isoperimetric_number = Some(s.isoperimetric_number);
        report.cheeger = Some(s.cheeger);
        report.lower = Some(s.lower);
        report.upper = Some(s.upper);
        report.sandwich = if s.pass { "pass" } else { "fail" }.into();
    }
    Ok(report)
}

pub(super) fn cmd_spectra(args: &SpectraArgs) -> Result<u8> {
    let g = parse_graph_argument(&args.graph)?;
    let report = spectra_report(&g)?;
    write_json(args.out.as_deref(), &report)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_three() {
        let r = spectra_report(&SimpleGraph::path(3)).unwrap();
        let want = [0.0, 1.0, 3.0];
        assert!(r
            .eigenvalues
            .iter()
            .zip(want)
            .all(|(a, b)| (a - b).abs() < 1e-10));
        assert_eq!(r.isoperimetric_number, Some(1.0));
        assert_eq!(r.cheeger.unwrap().witness, vec![0]);
        assert_eq!(r.sandwich, "pass");
    }

    #[test]
    fn disconnected_and_oversized() {
        let r = spectra_report(&SimpleGraph::empty(3)).unwrap();
        assert_eq!(r.sandwich, "skipped: disconnected");
        assert!(matches!(
            spectra_report(&SimpleGraph::path(21)),
            Err(Error::SizeLimit(_))
        ));
    }
}
