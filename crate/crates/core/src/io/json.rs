//! Schema-versioned JSON with every float written to 17 significant digits.

use std::io;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum JsonError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("expected a {expected} document, found {found}")]
    Kind { expected: String, found: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub schema: u32,
    pub kind: String,
    pub data: T,
}

/// Compact output; finite floats as `d.dddddddddddddddde±x`, others as `null`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SignificantDigits;

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Serialize any value with the float formatter.
pub fn to_string<T: Serialize>(value: &T) -> Result<String, JsonError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// A `{"schema":1,"kind":…,"data":…}` document followed by a newline.
pub fn document<T: Serialize>(kind: &str, data: &T) -> Result<String, JsonError> {
    let mut s = to_string(&Document { schema: SCHEMA_VERSION, kind: kind.to_string(), data })?;
    s.push('\n');
    Ok(s)
}

pub fn read_document<T: DeserializeOwned>(kind: &str, s: &str) -> Result<T, JsonError> {
    let doc: Document<serde_json::Value> = serde_json::from_str(s)?;
    if doc.schema != SCHEMA_VERSION {
        return Err(JsonError::Schema(doc.schema));
    }
    if doc.kind != kind {
        return Err(JsonError::Kind { expected: kind.into(), found: doc.kind });
    }
    Ok(serde_json::from_value(doc.data)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::{AngleValue, RationalAngle};
    use crate::comb_type::CombType;
    use crate::tiles::{tile_sample, TileGrid, TileReport};

    #[test]
    fn angles_and_types() {
        assert_eq!(to_string(&RationalAngle::new(3, 8).unwrap()).unwrap(), r#"{"rational":[3,8]}"#);
        assert_eq!(to_string(&AngleValue::Real(0.5)).unwrap(), r#"{"real":5.0000000000000000e-1}"#);
        let c = CombType::new(vec![3, 1, 3, 2], false).unwrap();
        assert_eq!(to_string(&c).unwrap(), r#"{"word":[2,3,1,3],"cyclic":false}"#);
    }

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-300, -2.5e17] {
            let s = to_string(&x).unwrap();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(to_string(&f64::INFINITY).unwrap(), "null");
    }

    #[test]
    fn tile_report_round_trip() {
        let c = CombType::new(vec![1, 2, 3, 1, 2, 3], false).unwrap();
        let r = tile_sample(&c, TileGrid::centered(1.0, 0.1, 4), crate::par::Execution::Sequential).unwrap();
        let s = document("tile", &r).unwrap();
        let back: TileReport = read_document("tile", &s).unwrap();
        assert_eq!(back, r);
        assert!(matches!(read_document::<TileReport>("orbit", &s), Err(JsonError::Kind { .. })));
    }
}
