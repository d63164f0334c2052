//! Scenario and observation file ingestion.
//!
//! Rationals are JSON strings (`"p/q"` or an integer literal) so that no
//! binary float enters the pipeline.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use pcsamp_core::inference::ObservationSet;
use pcsamp_core::rational::parse_rational;
use pcsamp_core::sampler::{enumerate_atlas, PatternAtlas, SamplingPattern};
use pcsamp_core::signal::{Region, SignalSpec};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(rename = "T")]
    t: String,
    regions: Vec<RawRegion>,
    #[serde(default)]
    observations: Option<RawObservations>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    g: String,
    n: u32,
    f: String,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawObservations {
    Keyword(String),
    List(Vec<Vec<u32>>),
}

/// Observation files hold a bare list of count vectors, or any object with
/// an `observations` list (such as `patterns --format json` output).
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ObservationFile {
    List(Vec<Vec<u32>>),
    Wrapped { observations: Vec<Vec<u32>> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObservationSource {
    All,
    List(Vec<SamplingPattern>),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: SignalSpec,
    pub observations: ObservationSource,
}

impl Scenario {
    pub fn atlas(&self) -> Result<PatternAtlas, CliError> {
        enumerate_atlas(&self.spec).map_err(|e| CliError::invalid(e.to_string()))
    }

    /// Observation set from `choice` (`"all"` or a file path), falling back
    /// to the scenario's own `observations` entry, then to the full atlas.
    /// Listed patterns must occur in the atlas of the spec.
    pub fn observations(&self, choice: Option<&str>) -> Result<ObservationSet, CliError> {
        let source = match choice {
            Some("all") => ObservationSource::All,
            Some(path) => ObservationSource::List(load_observation_file(Path::new(path))?),
            None => self.observations.clone(),
        };
        let atlas = self.atlas()?;
        let amplitudes = self.spec.amplitudes();
        match source {
            ObservationSource::All => Ok(ObservationSet::from_atlas(&atlas, amplitudes)),
            ObservationSource::List(patterns) => {
                let set = ObservationSet::new(patterns, amplitudes)
                    .map_err(|e| CliError::invalid(format!("observations: {e}")))?;
                if let Some(p) = set.patterns().iter().find(|p| !atlas.contains(p)) {
                    return Err(CliError::inconsistent(format!(
                        "InconsistentObservations: pattern {p} is not produced by any grid offset"
                    )));
                }
                Ok(set)
            }
        }
    }
}

fn rational(field: &str, text: &str) -> Result<pcsamp_core::Rational, CliError> {
    parse_rational(text).map_err(|_| {
        CliError::invalid(format!(
            "{field}: \"{text}\" is not an exact rational (expected \"p/q\" or an integer)"
        ))
    })
}

fn patterns(list: Vec<Vec<u32>>) -> Vec<SamplingPattern> {
    list.into_iter().map(SamplingPattern).collect()
}

pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let raw: RawScenario =
        serde_json::from_str(text).map_err(|e| CliError::invalid(format!("scenario: {e}")))?;
    let t = rational("T", &raw.t)?;
    let mut regions = Vec::with_capacity(raw.regions.len());
    for (k, r) in raw.regions.iter().enumerate() {
        let i = k + 1;
        regions.push(Region::new(
            rational(&format!("regions[{i}].g"), &r.g)?,
            r.n,
            rational(&format!("regions[{i}].f"), &r.f)?,
        ));
    }
    let spec = SignalSpec::new(regions, t).map_err(|e| CliError::invalid(e.to_string()))?;
    let observations = match raw.observations {
        None => ObservationSource::All,
        Some(RawObservations::Keyword(k)) if k == "all" => ObservationSource::All,
        Some(RawObservations::Keyword(k)) => {
            return Err(CliError::invalid(format!(
                "observations: expected \"all\" or a list of count vectors, got \"{k}\""
            )))
        }
        Some(RawObservations::List(list)) => ObservationSource::List(patterns(list)),
    };
    Ok(Scenario { spec, observations })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

pub fn load_observation_file(path: &Path) -> Result<Vec<SamplingPattern>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let file: ObservationFile = serde_json::from_str(&text)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    Ok(match file {
        ObservationFile::List(list) | ObservationFile::Wrapped { observations: list } => {
            patterns(list)
        }
    })
}
