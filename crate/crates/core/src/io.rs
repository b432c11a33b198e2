//! JSON file formats shared by the command-line tool.
//!
//! Numbers are written by `serde_json`, which emits the shortest decimal that
//! parses back to the same `f64`, so every file round-trips exactly. Unknown
//! fields are ignored so that outputs carrying extra context (such as a run
//! configuration) can be fed back in.

use serde::{Deserialize, Serialize};

use crate::duality::{FarkasCertificate, TransportPlan};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::measures::{DiscreteMeasure, FrameReport, GaussianMeasure};
use crate::semidiscrete::{PowerDiagram, Reference, SemiDiscreteCoupling};

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<Matrix> {
    Matrix::from_rows(rows).map_err(|e| Error::arg(format!("{what}: {e}")))
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::arg(format!("malformed JSON: {e}")))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("file types serialize infallibly")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub dim: usize,
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl MeasureFile {
    pub fn into_measure(self) -> Result<DiscreteMeasure> {
        let mu = DiscreteMeasure::new(self.atoms, self.weights)?;
        if mu.dim() != self.dim {
            return Err(Error::arg(format!("declared dim {} but atoms have dimension {}", self.dim, mu.dim())));
        }
        Ok(mu)
    }
}

impl From<&DiscreteMeasure> for MeasureFile {
    fn from(mu: &DiscreteMeasure) -> Self {
        MeasureFile { dim: mu.dim(), atoms: mu.atoms().to_vec(), weights: mu.weights().to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianFile {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl GaussianFile {
    pub fn into_measure(self) -> Result<GaussianMeasure> {
        GaussianMeasure::new(self.mean, matrix(&self.cov, "cov")?)
    }
}

impl From<&GaussianMeasure> for GaussianFile {
    fn from(g: &GaussianMeasure) -> Self {
        GaussianFile { mean: g.mean().to_vec(), cov: g.covariance().to_rows() }
    }
}

/// Either measure format, told apart by its fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyMeasureFile {
    Discrete(MeasureFile),
    Gaussian(GaussianFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReportFile {
    pub lower: f64,
    pub upper: f64,
    pub second_moment: f64,
    pub is_frame: bool,
    pub pd_threshold: f64,
}

impl From<&FrameReport> for FrameReportFile {
    fn from(r: &FrameReport) -> Self {
        FrameReportFile {
            lower: r.lower_bound,
            upper: r.upper_bound,
            second_moment: r.second_moment,
            is_frame: r.is_frame,
            pd_threshold: r.pd_threshold(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub coupling: Vec<Vec<f64>>,
    pub row_weights: Vec<f64>,
    pub col_weights: Vec<f64>,
}

impl From<&TransportPlan> for PlanFile {
    fn from(p: &TransportPlan) -> Self {
        PlanFile {
            coupling: p.coupling().to_rows(),
            row_weights: p.row_measure().weights().to_vec(),
            col_weights: p.col_measure().weights().to_vec(),
        }
    }
}

impl PlanFile {
    /// Rebuilds the plan over the given measures; the stored weights must match theirs.
    pub fn into_plan(self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<TransportPlan> {
        let same = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12);
        if !same(&self.row_weights, mu.weights()) || !same(&self.col_weights, nu.weights()) {
            return Err(Error::arg("plan weights do not match the measures"));
        }
        TransportPlan::new(mu.clone(), nu.clone(), matrix(&self.coupling, "coupling")?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub b: Vec<Vec<f64>>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl From<&FarkasCertificate> for CertificateFile {
    fn from(c: &FarkasCertificate) -> Self {
        CertificateFile { b: c.b.to_rows(), u: c.u.clone(), v: c.v.clone() }
    }
}

impl CertificateFile {
    pub fn into_certificate(self) -> Result<FarkasCertificate> {
        Ok(FarkasCertificate { b: matrix(&self.b, "b")?, u: self.u, v: self.v })
    }
}

/// `{"pairs": [[x, y], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairsFile {
    pub pairs: Vec<(Vec<f64>, Vec<f64>)>,
}

impl PairsFile {
    pub fn split(self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        self.pairs.into_iter().unzip()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceFile {
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl ReferenceFile {
    pub fn into_reference(self) -> Result<Reference> {
        match self {
            ReferenceFile::Gaussian { mean, cov } => Reference::gaussian(GaussianFile { mean, cov }.into_measure()?),
            ReferenceFile::Box { lower, upper } => Reference::uniform_box(lower, upper),
        }
    }
}

impl From<&Reference> for ReferenceFile {
    fn from(r: &Reference) -> Self {
        match r {
            Reference::Gaussian(g) => ReferenceFile::Gaussian { mean: g.mean().to_vec(), cov: g.covariance().to_rows() },
            Reference::UniformBox { lower, upper } => ReferenceFile::Box { lower: lower.clone(), upper: upper.clone() },
        }
    }
}

/// Sites and target masses; the reference defaults to a standard Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SitesFile {
    pub sites: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceFile>,
}

impl SitesFile {
    pub fn reference(&self) -> Result<Reference> {
        match &self.reference {
            Some(r) => r.clone().into_reference(),
            None => {
                let d = self.sites.first().map_or(0, Vec::len);
                if d == 0 {
                    return Err(Error::arg("no sites given"));
                }
                Reference::standard_gaussian(d)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingFile {
    pub sites: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub targets: Vec<f64>,
    pub achieved: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
    pub reference: ReferenceFile,
}

impl From<&SemiDiscreteCoupling> for CouplingFile {
    fn from(c: &SemiDiscreteCoupling) -> Self {
        CouplingFile {
            sites: c.diagram.sites().to_vec(),
            weights: c.diagram.weights().to_vec(),
            targets: c.targets.clone(),
            achieved: c.achieved.clone(),
            seed: c.seed,
            samples: c.sample_count,
            reference: c.diagram.reference().into(),
        }
    }
}

impl CouplingFile {
    pub fn diagram(&self) -> Result<PowerDiagram> {
        PowerDiagram::new(self.sites.clone(), self.weights.clone(), self.reference.clone().into_reference()?)
    }
}
