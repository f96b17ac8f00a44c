//! The layer-polymorphic spatial object: the one node type that flows through
//! every level of a pipeline, whether it stands for a pixel, a point, a
//! segment, a contour, or a whole orbit.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// What a [`SpatialObject`] stands for. Serialized as a plain string so graph
/// JSON stays readable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObjectKind {
    Pixel,
    Point,
    Segment,
    Contour,
    Junction,
    Region,
    Orbit,
    Other(String),
}

impl ObjectKind {
    pub fn as_str(&self) -> &str {
        match self {
            ObjectKind::Pixel => "pixel",
            ObjectKind::Point => "point",
            ObjectKind::Segment => "segment",
            ObjectKind::Contour => "contour",
            ObjectKind::Junction => "junction",
            ObjectKind::Region => "region",
            ObjectKind::Orbit => "orbit",
            ObjectKind::Other(s) => s,
        }
    }
}

impl From<&str> for ObjectKind {
    fn from(s: &str) -> Self {
        match s {
            "pixel" => ObjectKind::Pixel,
            "point" => ObjectKind::Point,
            "segment" => ObjectKind::Segment,
            "contour" => ObjectKind::Contour,
            "junction" => ObjectKind::Junction,
            "region" => ObjectKind::Region,
            "orbit" => ObjectKind::Orbit,
            other => ObjectKind::Other(other.to_string()),
        }
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ObjectKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ObjectKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(ObjectKind::from(s.as_str()))
    }
}

/// A single property value. `Int` is tried before `Real` on deserialization,
/// so `2` round-trips as an integer and `2.0` as a real.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PropValue {
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
    List(Vec<PropValue>),
}

impl PropValue {
    /// Numeric view: both `Int` and `Real` read as `f64`.
    pub fn as_real(&self) -> Option<f64> {
        match self {
            PropValue::Int(i) => Some(*i as f64),
            PropValue::Real(r) => Some(*r),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            PropValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            PropValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            PropValue::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl From<bool> for PropValue {
    fn from(v: bool) -> Self {
        PropValue::Bool(v)
    }
}
impl From<i64> for PropValue {
    fn from(v: i64) -> Self {
        PropValue::Int(v)
    }
}
impl From<usize> for PropValue {
    fn from(v: usize) -> Self {
        PropValue::Int(v as i64)
    }
}
impl From<f64> for PropValue {
    fn from(v: f64) -> Self {
        PropValue::Real(v)
    }
}
impl From<&str> for PropValue {
    fn from(v: &str) -> Self {
        PropValue::Text(v.to_string())
    }
}
impl From<String> for PropValue {
    fn from(v: String) -> Self {
        PropValue::Text(v)
    }
}
impl From<Vec<PropValue>> for PropValue {
    fn from(v: Vec<PropValue>) -> Self {
        PropValue::List(v)
    }
}

/// Property map. A `BTreeMap` so serialization order — and with it every JSON
/// artifact the library emits — is deterministic.
pub type Props = BTreeMap<String, PropValue>;

/// A geometric object at any level of description.
///
/// `geom` is an ordered list of coordinate tuples (2-D or 3-D). A pixel or a
/// point carries one tuple; a segment carries its ordered path; a contour its
/// chained outline. Everything else about the object lives in `props`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialObject {
    pub kind: ObjectKind,
    pub geom: Vec<Vec<f64>>,
    pub props: Props,
}

impl SpatialObject {
    pub fn new(kind: ObjectKind, geom: Vec<Vec<f64>>) -> Self {
        SpatialObject {
            kind,
            geom,
            props: Props::new(),
        }
    }

    /// Builder-style property attachment.
    pub fn with_prop(mut self, key: &str, value: impl Into<PropValue>) -> Self {
        self.props.insert(key.to_string(), value.into());
        self
    }

    pub fn prop(&self, key: &str) -> Option<&PropValue> {
        self.props.get(key)
    }

    pub fn real_prop(&self, key: &str) -> Option<f64> {
        self.props.get(key).and_then(PropValue::as_real)
    }

    pub fn int_prop(&self, key: &str) -> Option<i64> {
        self.props.get(key).and_then(PropValue::as_int)
    }

    /// The i-th geometry tuple as a 2-D point, if it has at least 2 coordinates.
    pub fn point2(&self, i: usize) -> Option<[f64; 2]> {
        self.geom.get(i).and_then(|c| {
            if c.len() >= 2 {
                Some([c[0], c[1]])
            } else {
                None
            }
        })
    }

    /// All geometry tuples as 2-D points; `None` if any tuple is too short.
    pub fn points2(&self) -> Option<Vec<[f64; 2]>> {
        (0..self.geom.len()).map(|i| self.point2(i)).collect()
    }
}
