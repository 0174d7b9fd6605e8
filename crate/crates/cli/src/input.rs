//! Reading system, map and diagram files.

use std::fs;
use std::path::Path;

use afenv::system::RawSystem;
use afenv::{BratteliDiagram, DirectSystem, RegularMap, SystemError};
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::error::CliError;
use crate::export;

/// JSON pointer for a deserialization path.
fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                out.push_str(&key.replace('~', "~0").replace('/', "~1"))
            }
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn from_value<T: DeserializeOwned>(value: Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| CliError::Schema {
        pointer: pointer(e.path()),
        message: e.inner().to_string(),
    })
}

fn read_value(path: &Path) -> Result<Value, CliError> {
    let text = read(path)?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| CliError::Schema {
        pointer: pointer(e.path()),
        message: e.inner().to_string(),
    })
}

/// Either a whole system or a single map, as the file provides.
pub enum MapSource {
    System(RawSystem),
    Map(RegularMap),
}

impl MapSource {
    pub fn maps(&self) -> &[RegularMap] {
        match self {
            MapSource::System(s) => &s.maps,
            MapSource::Map(f) => std::slice::from_ref(f),
        }
    }
}

/// Reads a system file without deciding its maps, or a single map file.
pub fn parse_maps(path: &Path) -> Result<MapSource, CliError> {
    let value = read_value(path)?;
    if value.get("images").is_some() {
        Ok(MapSource::Map(from_value(value)?))
    } else {
        Ok(MapSource::System(from_value(value)?))
    }
}

/// Reads and validates a system file; every map must be of compression type.
pub fn parse_system_file(path: &Path) -> Result<DirectSystem, CliError> {
    let raw: RawSystem = from_value(read_value(path)?)?;
    validate(raw)
}

pub fn validate(raw: RawSystem) -> Result<DirectSystem, CliError> {
    let maps = raw.maps.clone();
    DirectSystem::new(raw.spaces, raw.maps, raw.tail).map_err(|e| match e {
        SystemError::NotCompressionType { stage, obstruction } => CliError::NotCompressionType {
            pointer: format!("/maps/{stage}"),
            message: format!("map {stage} is not of compression type"),
            obstruction: Box::new(export::witness(&maps[stage], &obstruction)),
        },
        SystemError::ShapeMismatch(k) => CliError::Validation {
            pointer: format!("/maps/{k}"),
            message: e.to_string(),
        },
        other => CliError::Validation {
            pointer: String::new(),
            message: other.to_string(),
        },
    })
}

pub fn parse_diagram_file(path: &Path) -> Result<BratteliDiagram, CliError> {
    from_value(read_value(path)?)
}
