use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use pframe::duality::{canonical_dual, find_transport_dual, TransportDual};
use pframe::geodesics::{gaussian_path, gaussian_w2, geodesic_profile};
use pframe::io::{
    parse, to_json, AnyMeasureFile, CertificateFile, CouplingFile, FrameReportFile, GaussianFile, MeasureFile,
    PairsFile, PlanFile, SitesFile,
};
use pframe::measures::SecondMoments;
use pframe::semidiscrete::{adapt_weights, analysis, synthesis, ADAPT_TOL};
use pframe::transport::{is_cyclically_monotone, wasserstein2};
use pframe::{DiscreteMeasure, Error, GaussianMeasure};

use crate::{Command, GlobalOpts};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
    pub detail: Option<String>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() { EXIT_INPUT } else { EXIT_NUMERIC };
        let detail = match &e {
            Error::AdaptationStalled { iterations, max_error, weights } => Some(to_json(&json!({
                "iterations": iterations,
                "max_error": max_error,
                "best_weights": weights,
            }))),
            _ => None,
        };
        Failure { code, message: e.to_string(), detail }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Everything needed to reproduce a run, echoed into every JSON output.
#[derive(Debug, Serialize)]
struct RunConfig<'a> {
    command: &'static str,
    inputs: Vec<&'a Path>,
    #[serde(flatten)]
    opts: &'a GlobalOpts,
}

fn read_text(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("cannot read {}: {e}", path.display()),
        detail: None,
    })
}

fn read<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Outcome<T> {
    parse(&read_text(path)?).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
        detail: None,
    })
}

fn read_measure(path: &Path) -> Outcome<DiscreteMeasure> {
    Ok(read::<MeasureFile>(path)?.into_measure()?)
}

fn read_gaussian(path: &Path) -> Outcome<GaussianMeasure> {
    Ok(read::<GaussianFile>(path)?.into_measure()?)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Outcome<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure {
            code: EXIT_INPUT,
            message: format!("cannot write {}: {e}", path.display()),
            detail: None,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Merges `body` (a JSON object) with the config echo and writes it.
fn emit_json(body: impl Serialize, config: &RunConfig, out: Option<&PathBuf>) -> Outcome<()> {
    let mut value = serde_json::to_value(body).expect("outputs serialize");
    let obj = value.as_object_mut().expect("outputs are JSON objects");
    obj.insert("config".into(), serde_json::to_value(config).expect("config serializes"));
    emit(&(to_json(&value) + "\n"), out)
}

fn name(command: &Command) -> &'static str {
    match command {
        Command::FrameReport { .. } => "frame-report",
        Command::CanonicalDual { .. } => "canonical-dual",
        Command::TransportDual { .. } => "transport-dual",
        Command::Wasserstein { .. } => "wasserstein",
        Command::Monotone { .. } => "monotone",
        Command::GeodesicProfile { .. } => "geodesic-profile",
        Command::GaussianW2 { .. } => "gaussian-w2",
        Command::GaussianPath { .. } => "gaussian-path",
        Command::SemidiscreteAdapt { .. } => "semidiscrete-adapt",
        Command::Reconstruct { .. } => "reconstruct",
    }
}

pub fn run(command: &Command, opts: &GlobalOpts) -> Outcome<()> {
    let inputs: Vec<&Path> = match command {
        Command::FrameReport { measure } | Command::CanonicalDual { measure } => vec![measure],
        Command::TransportDual { mu, nu } | Command::Wasserstein { mu, nu } | Command::GeodesicProfile { mu, nu } => {
            vec![mu, nu]
        }
        Command::Monotone { pairs } => vec![pairs],
        Command::GaussianW2 { g0, g1 } | Command::GaussianPath { g0, g1 } => vec![g0, g1],
        Command::SemidiscreteAdapt { sites } => vec![sites],
        Command::Reconstruct { coupling, phi, psi } => {
            let mut v: Vec<&Path> = vec![coupling, phi];
            v.extend(psi.as_deref());
            v
        }
    };
    let config = RunConfig { command: name(command), inputs, opts };
    let out = opts.out.as_ref();

    match command {
        Command::FrameReport { measure } => {
            let report = match read::<AnyMeasureFile>(measure)? {
                AnyMeasureFile::Discrete(m) => m.into_measure()?.frame_report(),
                AnyMeasureFile::Gaussian(g) => g.into_measure()?.frame_report(),
            };
            emit_json(FrameReportFile::from(&report), &config, out)
        }
        Command::CanonicalDual { measure } => {
            let dual = canonical_dual(&read_measure(measure)?)?;
            emit_json(MeasureFile::from(&dual), &config, out)
        }
        Command::TransportDual { mu, nu } => {
            let (mu, nu) = (read_measure(mu)?, read_measure(nu)?);
            let body = match find_transport_dual(&mu, &nu)? {
                TransportDual::Dual(plan) => json!({
                    "status": "dual",
                    "plan": PlanFile::from(&plan),
                    "cross_moment": plan.cross_moment().to_rows(),
                }),
                TransportDual::NotDual(cert) => json!({
                    "status": "not-dual",
                    "certificate": CertificateFile::from(&cert),
                    "min_pair_slack": cert.min_pair_slack(&mu, &nu),
                    "objective": cert.objective(&mu, &nu),
                }),
            };
            emit_json(body, &config, out)
        }
        Command::Wasserstein { mu, nu } => {
            let ot = wasserstein2(&read_measure(mu)?, &read_measure(nu)?)?;
            let body = json!({
                "w2_squared": ot.distance_squared,
                "w2": ot.distance(),
                "permutation": ot.permutation,
                "plan": PlanFile::from(&ot.plan),
            });
            emit_json(body, &config, out)
        }
        Command::Monotone { pairs } => {
            let (xs, ys) = read::<PairsFile>(pairs)?.split();
            let check = is_cyclically_monotone(&xs, &ys)?;
            emit_json(json!({ "monotone": check.monotone, "witness": check.witness }), &config, out)
        }
        Command::GeodesicProfile { mu, nu } => {
            let profile = geodesic_profile(&read_measure(mu)?, &read_measure(nu)?, opts.grid)?;
            // CSV goes to --out; the summary with the config echo goes to stdout
            match out {
                Some(_) => {
                    emit(&profile.to_csv(), out)?;
                    let summary = json!({
                        "all_frames": profile.all_frames,
                        "min_lower_bound": profile.min_lower_bound(),
                        "additivity_defect": profile.additivity_defect,
                        "rows": profile.ts.len(),
                    });
                    emit_json(summary, &config, None)
                }
                None => emit(&profile.to_csv(), None),
            }
        }
        Command::GaussianW2 { g0, g1 } => {
            let w = gaussian_w2(&read_gaussian(g0)?, &read_gaussian(g1)?)?;
            emit_json(json!({ "w2_squared": w, "w2": w.sqrt() }), &config, out)
        }
        Command::GaussianPath { g0, g1 } => {
            let path = gaussian_path(&read_gaussian(g0)?, &read_gaussian(g1)?, opts.grid)?;
            let body = json!({
                "map": path.map.to_rows(),
                "ts": path.ts,
                "lower_bounds": path.lower_bounds,
                "upper_bounds": path.upper_bounds,
                "all_frames": path.all_frames(),
            });
            emit_json(body, &config, out)
        }
        Command::SemidiscreteAdapt { sites } => {
            let file = read::<SitesFile>(sites)?;
            let reference = file.reference()?;
            let coupling = adapt_weights(
                file.sites,
                file.targets,
                reference,
                opts.samples,
                opts.seed,
                opts.tol.unwrap_or(ADAPT_TOL),
            )?;
            let mut body = serde_json::to_value(CouplingFile::from(&coupling)).expect("serializes");
            body["iterations"] = Value::from(coupling.iterations);
            body["max_error"] = Value::from(coupling.max_error());
            emit_json(body, &config, out)
        }
        Command::Reconstruct { coupling, phi, psi } => {
            let coupling = read::<CouplingFile>(coupling)?;
            let diagram = coupling.diagram()?;
            let phi = read_measure(phi)?;
            if phi.len() != diagram.len() {
                return Err(Error::InvalidArgument(format!(
                    "analysis frame has {} atoms for {} sites",
                    phi.len(),
                    diagram.len()
                ))
                .into());
            }
            let psi_atoms = match psi {
                Some(p) => read_measure(p)?.atoms().to_vec(),
                None => {
                    let weighted = DiscreteMeasure::new(phi.atoms().to_vec(), coupling.targets.clone())?;
                    canonical_dual(&weighted)?.atoms().to_vec()
                }
            };
            let samples = diagram.reference().sample(opts.samples, opts.seed)?;
            let d = phi.dim();
            let mut operator = vec![vec![0.0; d]; d];
            let mut max_error: f64 = 0.0;
            for k in 0..d {
                let mut e = vec![0.0; d];
                e[k] = 1.0;
                let f = analysis(&e, &diagram, phi.atoms(), &samples)?;
                let z = synthesis(&f, &diagram, &psi_atoms, &samples)?;
                for (l, zl) in z.iter().enumerate() {
                    operator[l][k] = *zl;
                    max_error = max_error.max((zl - if l == k { 1.0 } else { 0.0 }).abs());
                }
            }
            let body = json!({
                "operator": operator,
                "max_error": max_error,
                "masses": diagram.cell_masses(&samples),
            });
            emit_json(body, &config, out)
        }
    }
}
