//! Instance files: JSON with every rational written as a `"num/den"` string.

use std::fmt;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::expectation::ExpectationOperator;
use crate::hahn_jordan::{self, ComponentCharge};
use crate::lattice::{PartitionAlgebra, RieszElement};
use crate::rational::{self, Rational};
use crate::representation::StrongFunctional;

pub const DEFAULT_DEPTH: u32 = 10;

/// A rejected instance, located by JSON pointer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputError {
    pub pointer: String,
    pub message: String,
}

impl InputError {
    pub fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() {
            "/"
        } else {
            &self.pointer
        };
        write!(f, "invalid instance at {at}: {}", self.message)
    }
}

impl std::error::Error for InputError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct RawInstance {
    dimension: usize,
    weights: Vec<String>,
    expectation_partition: Vec<Vec<usize>>,
    #[serde(default)]
    algebra_atoms: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    charge: Option<Vec<String>>,
    #[serde(default)]
    density: Option<Vec<String>>,
    #[serde(default)]
    functional: Option<RawFunctional>,
    #[serde(default)]
    options: RawOptions,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum RawFunctional {
    Density { y: Vec<String> },
    Matrix { rows: Vec<Vec<String>> },
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptions {
    theta: Option<String>,
    depth: Option<u32>,
    oracle: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Options {
    pub theta: Rational,
    pub depth: u32,
    pub oracle: bool,
}

/// A validated instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub operator: ExpectationOperator,
    pub algebra: PartitionAlgebra,
    pub charge: Option<ComponentCharge>,
    pub density: Option<RieszElement>,
    pub functional: Option<StrongFunctional>,
    pub options: Options,
    /// `sha256:` followed by the hex digest of the raw bytes.
    pub digest: String,
}

impl Instance {
    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// The explicit charge, or else `p ↦ T(p·density)`.
    pub fn charge_or_density(&self) -> Option<ComponentCharge> {
        if let Some(c) = &self.charge {
            return Some(c.clone());
        }
        self.density.as_ref().map(|f| {
            ComponentCharge::from_density(&self.operator, f, self.algebra.clone())
                .expect("algebra refinement checked at parse time")
        })
    }
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1")))
            }
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    out
}

fn parse_vec(pointer: &str, values: &[String]) -> Result<Vec<Rational>, InputError> {
    values
        .iter()
        .enumerate()
        .map(|(i, s)| {
            rational::parse(s).map_err(|e| InputError::new(format!("{pointer}/{i}"), e.to_string()))
        })
        .collect()
}

fn check_len(pointer: &str, found: usize, expected: usize) -> Result<(), InputError> {
    if found == expected {
        Ok(())
    } else {
        Err(InputError::new(
            pointer,
            format!("expected {expected} entries, found {found}"),
        ))
    }
}

fn partition(
    pointer: &str,
    n: usize,
    atoms: Vec<Vec<usize>>,
) -> Result<PartitionAlgebra, InputError> {
    PartitionAlgebra::new(n, atoms).map_err(|e| InputError::new(pointer, e.to_string()))
}

pub fn parse_instance(bytes: &[u8]) -> Result<Instance, InputError> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| InputError::new("", format!("not UTF-8: {e}")))?;
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawInstance = serde_path_to_error::deserialize(de)
        .map_err(|e| InputError::new(pointer_of(e.path()), e.inner().to_string()))?;

    let n = raw.dimension;
    if n == 0 {
        return Err(InputError::new("/dimension", "dimension must be positive"));
    }
    check_len("/weights", raw.weights.len(), n)?;
    let weights = parse_vec("/weights", &raw.weights)?;
    if let Some(i) = weights.iter().position(|w| w <= &Rational::default()) {
        return Err(InputError::new(
            format!("/weights/{i}"),
            "weights must be strictly positive",
        ));
    }
    let blocks = partition("/expectationPartition", n, raw.expectation_partition)?;
    let operator = ExpectationOperator::new(blocks, weights)
        .map_err(|e| InputError::new("/weights", e.to_string()))?;

    let algebra = match raw.algebra_atoms {
        Some(atoms) => partition("/algebraAtoms", n, atoms)?,
        None => PartitionAlgebra::discrete(n),
    };
    if let Err(e) = algebra.enclosing_blocks(operator.partition()) {
        return Err(InputError::new("/algebraAtoms", e.to_string()));
    }

    let charge = match raw.charge {
        Some(values) => {
            check_len("/charge", values.len(), algebra.num_atoms())?;
            let values = parse_vec("/charge", &values)?;
            Some(
                ComponentCharge::new(algebra.clone(), operator.partition().clone(), values)
                    .map_err(|e| InputError::new("/charge", e.to_string()))?,
            )
        }
        None => None,
    };

    let density = match raw.density {
        Some(values) => {
            check_len("/density", values.len(), n)?;
            Some(RieszElement::new(parse_vec("/density", &values)?))
        }
        None => None,
    };

    let functional = match raw.functional {
        Some(RawFunctional::Density { y }) => {
            check_len("/functional/y", y.len(), n)?;
            let y = RieszElement::new(parse_vec("/functional/y", &y)?);
            Some(StrongFunctional::density(&operator, y).expect("length checked"))
        }
        Some(RawFunctional::Matrix { rows }) => {
            check_len("/functional/rows", rows.len(), n)?;
            let mut parsed = Vec::with_capacity(n);
            for (i, row) in rows.iter().enumerate() {
                let pointer = format!("/functional/rows/{i}");
                check_len(&pointer, row.len(), n)?;
                parsed.push(parse_vec(&pointer, row)?);
            }
            Some(
                StrongFunctional::from_matrix(&operator, parsed)
                    .map_err(|e| InputError::new("/functional/rows", e.to_string()))?,
            )
        }
        None => None,
    };

    let theta = match raw.options.theta {
        Some(s) => {
            rational::parse(&s).map_err(|e| InputError::new("/options/theta", e.to_string()))?
        }
        None => hahn_jordan::default_theta(),
    };
    if theta <= Rational::from_integer(1.into()) {
        return Err(InputError::new(
            "/options/theta",
            Error::InvalidTheta(rational::format(&theta)).to_string(),
        ));
    }
    let depth = raw.options.depth.unwrap_or(DEFAULT_DEPTH);
    if depth == 0 {
        return Err(InputError::new(
            "/options/depth",
            Error::InvalidDepth.to_string(),
        ));
    }

    Ok(Instance {
        operator,
        algebra,
        charge,
        density,
        functional,
        options: Options {
            theta,
            depth,
            oracle: raw.options.oracle.unwrap_or(false),
        },
        digest: digest(bytes),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn parse(s: &str) -> Result<Instance, InputError> {
        parse_instance(s.as_bytes())
    }

    #[test]
    fn minimal_instance() {
        let inst = parse(r#"{"dimension":2,"weights":["1/1","1"],"expectationPartition":[[0,1]]}"#)
            .unwrap();
        assert_eq!(inst.dim(), 2);
        assert_eq!(inst.algebra.num_atoms(), 2);
        assert_eq!(
            inst.options,
            Options {
                theta: int(2),
                depth: 10,
                oracle: false
            }
        );
        assert!(inst.digest.starts_with("sha256:"));
        assert_eq!(inst.digest.len(), 7 + 64);
    }

    #[test]
    fn overlapping_blocks() {
        let err = parse(
            r#"{"dimension":3,"weights":["1","1","1"],"expectationPartition":[[0,1],[1,2]]}"#,
        )
        .unwrap_err();
        assert_eq!(err.pointer, "/expectationPartition");
    }

    #[test]
    fn zero_weight() {
        let err = parse(r#"{"dimension":2,"weights":["1","0/1"],"expectationPartition":[[0,1]]}"#)
            .unwrap_err();
        assert_eq!(err.pointer, "/weights/1");
        assert!(err.message.contains("weights must be strictly positive"));
    }

    #[test]
    fn syntax_and_unknown_fields() {
        let err = parse(r#"{"dimension":2,"weights":["1","x"],"expectationPartition":[[0,1]]}"#)
            .unwrap_err();
        assert_eq!(err.pointer, "/weights/1");
        let err = parse(
            r#"{"dimension":2,"weights":["1","1"],"expectationPartition":[[0,1]],"extra":1}"#,
        )
        .unwrap_err();
        assert!(err.message.contains("extra"), "{err}");
        let err = parse(r#"{"dimension":2,"weights":["1",3],"expectationPartition":[[0,1]]}"#)
            .unwrap_err();
        assert_eq!(err.pointer, "/weights/1");
        assert!(parse("{").is_err());
    }

    #[test]
    fn refinement_and_lengths() {
        let base =
            r#""dimension":4,"weights":["1","1","1","1"],"expectationPartition":[[0,1],[2,3]]"#;
        let err = parse(&format!(r#"{{{base},"algebraAtoms":[[0,2],[1],[3]]}}"#)).unwrap_err();
        assert_eq!(err.pointer, "/algebraAtoms");
        let err = parse(&format!(r#"{{{base},"charge":["1","2"]}}"#)).unwrap_err();
        assert_eq!(err.pointer, "/charge");
        let err = parse(&format!(r#"{{{base},"options":{{"theta":"1"}}}}"#)).unwrap_err();
        assert_eq!(err.pointer, "/options/theta");
        let err = parse(&format!(r#"{{{base},"options":{{"depth":0}}}}"#)).unwrap_err();
        assert_eq!(err.pointer, "/options/depth");
    }

    #[test]
    fn functionals() {
        let base = r#""dimension":2,"weights":["1","1"],"expectationPartition":[[0,1]]"#;
        let inst = parse(&format!(
            r#"{{{base},"functional":{{"type":"density","y":["1","-2"]}}}}"#
        ))
        .unwrap();
        assert_eq!(
            inst.functional.unwrap().exact_represent().unwrap(),
            RieszElement::from_ints(&[1, -2])
        );
        let ok = parse(&format!(
            r#"{{{base},"functional":{{"type":"matrix","rows":[["1/2","-1"],["1/2","-1"]]}}}}"#
        ))
        .unwrap();
        assert_eq!(
            ok.functional.unwrap().exact_represent().unwrap(),
            RieszElement::from_ints(&[1, -2])
        );
        let err = parse(&format!(
            r#"{{{base},"functional":{{"type":"matrix","rows":[["1","0"],["0","1"]]}}}}"#
        ))
        .unwrap_err();
        assert!(err.message.contains("range violation"), "{err}");
        let err = parse(&format!(r#"{{{base},"functional":{{"type":"other"}}}}"#)).unwrap_err();
        assert!(err.pointer.starts_with("/functional"), "{err}");
    }

    #[test]
    fn digest_tracks_bytes() {
        assert_ne!(digest(b"a"), digest(b"b"));
        assert_eq!(
            digest(b""),
            "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
