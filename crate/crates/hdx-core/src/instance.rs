//! Instance ingestion from JSON files and built-in generators.
//!
//! The on-disk format lists top faces with weights:
//!
//! ```json
//! {"d": 2, "ground_set_size": 3,
//!  "top_faces": [{"elements": [0, 1], "weight": 1.0},
//!                {"elements": [1, 2], "weight": 2.0}]}
//! ```
//!
//! Generator specs are compact strings such as `complete:n=6,d=4`,
//! `random:n=7,d=3,seed=5,sigma=1.5`, and `matroid-complete:m=4`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::complex::{Face, PureSimplicialComplex};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TopFaceEntry {
    pub elements: Vec<usize>,
    pub weight: f64,
}

/// The JSON instance format.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub d: usize,
    pub ground_set_size: usize,
    pub top_faces: Vec<TopFaceEntry>,
}

impl InstanceFile {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    /// Validates and builds the complex. JSON itself cannot carry NaN or
    /// infinities; nonpositive or malformed weights and faces are rejected
    /// by construction.
    pub fn into_complex(self) -> Result<PureSimplicialComplex> {
        let mut tops = Vec::with_capacity(self.top_faces.len());
        for entry in self.top_faces {
            tops.push((Face::new(entry.elements)?, entry.weight));
        }
        PureSimplicialComplex::from_top_faces(self.d, self.ground_set_size, tops)
    }

    pub fn from_complex(complex: &PureSimplicialComplex) -> Self {
        let top = complex.level(complex.dimension());
        InstanceFile {
            d: complex.dimension(),
            ground_set_size: complex.ground_set_size(),
            top_faces: top
                .faces()
                .iter()
                .zip(top.weights())
                .map(|(f, &w)| TopFaceEntry {
                    elements: f.elements().to_vec(),
                    weight: w,
                })
                .collect(),
        }
    }
}

/// A built-in instance generator.
#[derive(Clone, Debug, PartialEq)]
pub enum GenerateSpec {
    Complete {
        n: usize,
        d: usize,
    },
    Random {
        n: usize,
        d: usize,
        seed: u64,
        sigma: f64,
    },
    /// Spanning trees of the complete graph `K_m` with unit weights.
    MatroidComplete {
        m: usize,
    },
}

fn parse_fields(body: &str, spec: &str) -> Result<Vec<(String, String)>> {
    body.split(',')
        .map(|kv| {
            let (key, value) = kv.split_once('=').ok_or_else(|| {
                Error::Parse(format!("expected key=value in generator spec '{spec}'"))
            })?;
            Ok((key.trim().to_string(), value.trim().to_string()))
        })
        .collect()
}

fn take_field<T: FromStr>(fields: &[(String, String)], key: &str, spec: &str) -> Result<Option<T>> {
    for (k, v) in fields {
        if k == key {
            return v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Parse(format!("bad value for '{key}' in '{spec}'")));
        }
    }
    Ok(None)
}

fn require_field<T: FromStr>(fields: &[(String, String)], key: &str, spec: &str) -> Result<T> {
    take_field(fields, key, spec)?
        .ok_or_else(|| Error::Parse(format!("generator spec '{spec}' is missing '{key}'")))
}

impl FromStr for GenerateSpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let (kind, body) = spec.split_once(':').ok_or_else(|| {
            Error::Parse(format!(
                "expected 'kind:key=value,...' in generator spec '{spec}'"
            ))
        })?;
        let fields = parse_fields(body, spec)?;
        let known = |allowed: &[&str]| -> Result<()> {
            for (k, _) in &fields {
                if !allowed.contains(&k.as_str()) {
                    return Err(Error::Parse(format!(
                        "unknown field '{k}' in generator spec '{spec}'"
                    )));
                }
            }
            Ok(())
        };
        match kind.trim() {
            "complete" => {
                known(&["n", "d"])?;
                Ok(GenerateSpec::Complete {
                    n: require_field(&fields, "n", spec)?,
                    d: require_field(&fields, "d", spec)?,
                })
            }
            "random" => {
                known(&["n", "d", "seed", "sigma"])?;
                Ok(GenerateSpec::Random {
                    n: require_field(&fields, "n", spec)?,
                    d: require_field(&fields, "d", spec)?,
                    seed: require_field(&fields, "seed", spec)?,
                    sigma: take_field(&fields, "sigma", spec)?.unwrap_or(1.0),
                })
            }
            "matroid-complete" => {
                known(&["m"])?;
                Ok(GenerateSpec::MatroidComplete {
                    m: require_field(&fields, "m", spec)?,
                })
            }
            other => Err(Error::Parse(format!(
                "unknown generator kind '{other}' (expected complete, random, or matroid-complete)"
            ))),
        }
    }
}

impl fmt::Display for GenerateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenerateSpec::Complete { n, d } => write!(f, "complete:n={n},d={d}"),
            GenerateSpec::Random { n, d, seed, sigma } => {
                write!(f, "random:n={n},d={d},seed={seed},sigma={sigma}")
            }
            GenerateSpec::MatroidComplete { m } => write!(f, "matroid-complete:m={m}"),
        }
    }
}

impl GenerateSpec {
    pub fn build(&self) -> Result<PureSimplicialComplex> {
        match *self {
            GenerateSpec::Complete { n, d } => PureSimplicialComplex::complete(n, d),
            GenerateSpec::Random { n, d, seed, sigma } => {
                PureSimplicialComplex::random_weighted_complete(n, d, sigma, seed)
            }
            GenerateSpec::MatroidComplete { m } => {
                if m < 2 {
                    return Err(Error::InvalidParameter(
                        "matroid-complete needs m ≥ 2".to_string(),
                    ));
                }
                let mut edges = Vec::new();
                for i in 0..m {
                    for j in (i + 1)..m {
                        edges.push((i, j));
                    }
                }
                PureSimplicialComplex::graphic_matroid_bases(&edges)
            }
        }
    }
}

/// Where an instance comes from; used verbatim in report descriptors.
#[derive(Clone, Debug)]
pub enum InstanceSource {
    File(PathBuf),
    Generated(GenerateSpec),
}

impl InstanceSource {
    pub fn label(&self) -> String {
        match self {
            InstanceSource::File(path) => format!("file:{}", path.display()),
            InstanceSource::Generated(spec) => spec.to_string(),
        }
    }

    pub fn load(&self) -> Result<PureSimplicialComplex> {
        match self {
            InstanceSource::File(path) => InstanceFile::from_path(path)?.into_complex(),
            InstanceSource::Generated(spec) => spec.build(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let c = PureSimplicialComplex::random_weighted_complete(5, 3, 1.0, 2).unwrap();
        let file = InstanceFile::from_complex(&c);
        let text = serde_json::to_string(&file).unwrap();
        let back = InstanceFile::from_json_str(&text)
            .unwrap()
            .into_complex()
            .unwrap();
        assert_eq!(back.dimension(), c.dimension());
        assert_eq!(back.level_sizes(), c.level_sizes());
        for k in 0..=c.dimension() {
            for (a, b) in back.level(k).weights().iter().zip(c.level(k).weights()) {
                assert!((a - b).abs() <= 1e-15 * b.abs());
            }
        }
    }

    #[test]
    fn json_ingestion_and_validation() {
        let good = r#"{"d": 2, "ground_set_size": 3,
            "top_faces": [{"elements": [0,1], "weight": 1.0},
                          {"elements": [1,2], "weight": 2.0}]}"#;
        let c = InstanceFile::from_json_str(good)
            .unwrap()
            .into_complex()
            .unwrap();
        assert_eq!(c.dimension(), 2);
        assert_eq!(c.level_sizes(), vec![1, 3, 2]);

        let mixed = r#"{"d": 2, "ground_set_size": 3,
            "top_faces": [{"elements": [0,1], "weight": 1.0},
                          {"elements": [0,1,2], "weight": 1.0}]}"#;
        assert!(matches!(
            InstanceFile::from_json_str(mixed).unwrap().into_complex(),
            Err(Error::Purity(_))
        ));

        let bad_weight = r#"{"d": 2, "ground_set_size": 3,
            "top_faces": [{"elements": [0,1], "weight": -1.0}]}"#;
        assert!(InstanceFile::from_json_str(bad_weight)
            .unwrap()
            .into_complex()
            .is_err());

        assert!(matches!(
            InstanceFile::from_json_str("{\"d\": 2}"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            InstanceFile::from_json_str("not json"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn generator_spec_parsing() {
        assert_eq!(
            "complete:n=6,d=4".parse::<GenerateSpec>().unwrap(),
            GenerateSpec::Complete { n: 6, d: 4 }
        );
        assert_eq!(
            "random:n=7,d=3,seed=5".parse::<GenerateSpec>().unwrap(),
            GenerateSpec::Random {
                n: 7,
                d: 3,
                seed: 5,
                sigma: 1.0
            }
        );
        assert_eq!(
            "random:n=7,d=3,seed=5,sigma=2.5"
                .parse::<GenerateSpec>()
                .unwrap(),
            GenerateSpec::Random {
                n: 7,
                d: 3,
                seed: 5,
                sigma: 2.5
            }
        );
        assert_eq!(
            "matroid-complete:m=4".parse::<GenerateSpec>().unwrap(),
            GenerateSpec::MatroidComplete { m: 4 }
        );

        for bad in [
            "complete",
            "complete:n=6",
            "complete:n=6,d=4,extra=1",
            "random:n=7,d=3",
            "unknown:n=1",
            "complete:n=x,d=4",
        ] {
            assert!(bad.parse::<GenerateSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn generator_specs_build_and_round_trip_labels() {
        for text in [
            "complete:n=5,d=3",
            "random:n=6,d=3,seed=9,sigma=1.5",
            "matroid-complete:m=4",
        ] {
            let spec: GenerateSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
            let c = spec.build().unwrap();
            assert!(c.dimension() >= 2);
        }
        // Spanning trees of K_4: 16 of them, dimension 3.
        let spec: GenerateSpec = "matroid-complete:m=4".parse().unwrap();
        let c = spec.build().unwrap();
        assert_eq!(c.dimension(), 3);
        assert_eq!(c.level(3).len(), 16);
    }
}
