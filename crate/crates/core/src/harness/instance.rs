//! Plain-text instance files.
//!
//! ```text
//! # optional comments
//! kind=cube dim=2
//! 1/2 0
//! -3/4 5/2
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::{GeometryError, Kind, RatPoint, UnitObject};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("missing `kind=... dim=...` header")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("object {index} does not match the header ({kind} in dimension {dim})")]
    Heterogeneous { index: usize, kind: Kind, dim: usize },
    #[error("dimension must be positive")]
    ZeroDimension,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceFile {
    pub kind: Kind,
    pub dim: usize,
    pub objects: Vec<UnitObject>,
}

impl InstanceFile {
    pub fn new(kind: Kind, dim: usize, objects: Vec<UnitObject>) -> Result<Self, InstanceError> {
        if dim == 0 {
            return Err(InstanceError::ZeroDimension);
        }
        if let Some(index) = objects.iter().position(|o| o.kind != kind || o.dim() != dim) {
            return Err(InstanceError::Heterogeneous { index, kind, dim });
        }
        Ok(Self { kind, dim, objects })
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }
}

fn parse_header(text: &str, line: usize) -> Result<(Kind, usize), InstanceError> {
    let err = |message: String| InstanceError::Parse { line, message };
    let (mut kind, mut dim) = (None, None);
    for field in text.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| err(format!("malformed header field `{field}`")))?;
        match key {
            "kind" => kind = Some(value.parse::<Kind>().map_err(|e| err(e.to_string()))?),
            "dim" => dim = Some(value.parse::<usize>().map_err(|_| err(format!("invalid dimension `{value}`")))?),
            _ => return Err(err(format!("unknown header field `{key}`"))),
        }
    }
    match (kind, dim) {
        (Some(_), Some(0)) => Err(InstanceError::ZeroDimension),
        (Some(k), Some(d)) => Ok((k, d)),
        _ => Err(err("header needs both kind and dim".into())),
    }
}

impl FromStr for InstanceFile {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut header = None;
        let mut objects = Vec::new();
        for (i, raw) in s.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let Some((kind, dim)) = header else {
                header = Some(parse_header(text, line)?);
                continue;
            };
            let center: RatPoint = text.parse().map_err(|e: GeometryError| InstanceError::Parse {
                line,
                message: e.to_string(),
            })?;
            if center.dim() != dim {
                return Err(InstanceError::Parse {
                    line,
                    message: format!("expected {dim} coordinates, found {}", center.dim()),
                });
            }
            objects.push(UnitObject::new(kind, center));
        }
        let (kind, dim) = header.ok_or(InstanceError::MissingHeader)?;
        Ok(Self { kind, dim, objects })
    }
}

impl fmt::Display for InstanceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            Kind::Ball => "ball",
            Kind::Hypercube => "cube",
        };
        writeln!(f, "kind={kind} dim={}", self.dim)?;
        for o in &self.objects {
            writeln!(f, "{}", o.center)?;
        }
        Ok(())
    }
}
