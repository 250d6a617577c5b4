//! Instance file I/O.
//!
//! Instances are UTF-8 JSON with top-level keys `name`, `n`, `a`, `b`, `Q`,
//! `u`, `constraints`, and optional free-form `meta`. Non-finite values
//! survive serialization as the strings `"inf"` / `"-inf"`; everything else
//! is a plain JSON number, so writing then reading reproduces all finite
//! fields bit-exactly.

use std::fs;
use std::path::Path;

use crate::types::Instance;
use crate::{Error, Result};

/// Serde adapter for a single `f64` with the `"inf"` convention.
pub mod num {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            v.serialize(ser)
        } else if *v == f64::INFINITY {
            "inf".serialize(ser)
        } else if *v == f64::NEG_INFINITY {
            "-inf".serialize(ser)
        } else {
            Err(serde::ser::Error::custom("NaN is not serializable"))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum NumOrStr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        match NumOrStr::deserialize(de)? {
            NumOrStr::Num(x) => Ok(x),
            NumOrStr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(D::Error::custom(format!(
                    "expected number or inf, got \"{other}\""
                ))),
            },
        }
    }
}

/// Serde adapter for `Vec<f64>` with the `"inf"` convention.
pub mod num_vec {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = ser.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&Wrap(*x))?;
        }
        seq.end()
    }

    struct Wrap(f64);
    impl serde::Serialize for Wrap {
        fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
            super::num::serialize(&self.0, ser)
        }
    }

    #[derive(Deserialize)]
    struct Unwrap(#[serde(with = "super::num")] f64);

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<f64>, D::Error> {
        let raw = Vec::<Unwrap>::deserialize(de)?;
        Ok(raw.into_iter().map(|w| w.0).collect())
    }
}

/// Serde adapter for `Vec<Vec<f64>>` with the `"inf"` convention.
pub mod num_mat {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<f64>], ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = ser.serialize_seq(Some(v.len()))?;
        for row in v {
            seq.serialize_element(&Row(row))?;
        }
        seq.end()
    }

    struct Row<'a>(&'a [f64]);
    impl serde::Serialize for Row<'_> {
        fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
            super::num_vec::serialize(self.0, ser)
        }
    }

    #[derive(Deserialize)]
    struct Unwrap(#[serde(with = "super::num_vec")] Vec<f64>);

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let raw = Vec::<Unwrap>::deserialize(de)?;
        Ok(raw.into_iter().map(|w| w.0).collect())
    }
}

/// Reads and validates an instance file.
pub fn read_instance<P: AsRef<Path>>(path: P) -> Result<Instance> {
    let text = fs::read_to_string(path)?;
    let inst: Instance = serde_json::from_str(&text).map_err(|e| Error::Parse {
        field: e.to_string(),
        msg: "instance file does not match the schema".into(),
    })?;
    inst.validate()?;
    Ok(inst)
}

/// Serializes an instance to its canonical JSON text.
pub fn instance_to_string(inst: &Instance) -> Result<String> {
    inst.validate()?;
    let mut text = serde_json::to_string_pretty(inst)?;
    text.push('\n');
    Ok(text)
}

/// Writes an instance file; the output is deterministic for identical data.
pub fn write_instance<P: AsRef<Path>>(inst: &Instance, path: P) -> Result<()> {
    fs::write(path, instance_to_string(inst)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{LinearConstraint, Sense};

    fn sample() -> Instance {
        Instance {
            name: "sample".into(),
            n: 2,
            a: vec![1.0, -0.25],
            b: vec![-2.0, 0.125],
            q: vec![vec![2.0, -1.0], vec![-1.0, 3.0]],
            u: vec![1.0, f64::INFINITY],
            constraints: vec![LinearConstraint {
                coeffs_x: vec![1.0, 1.0],
                coeffs_y: vec![0.0, 0.0],
                sense: Sense::Le,
                rhs: 1.0,
            }],
            meta: None,
        }
    }

    #[test]
    fn round_trip_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let inst = sample();
        write_instance(&inst, &path).unwrap();
        let back = read_instance(&path).unwrap();
        assert_eq!(back.name, inst.name);
        assert_eq!(back.a, inst.a);
        assert_eq!(back.b, inst.b);
        assert_eq!(back.q, inst.q);
        assert_eq!(back.u, inst.u);
        assert_eq!(back.constraints, inst.constraints);
        // writing again yields identical bytes
        let s1 = instance_to_string(&inst).unwrap();
        let s2 = instance_to_string(&back).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn infinity_survives_as_string() {
        let s = instance_to_string(&sample()).unwrap();
        assert!(s.contains("\"inf\""));
    }

    #[test]
    fn asymmetric_q_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(
            &path,
            r#"{"name":"bad","n":2,"a":[0,0],"b":[0,0],
               "Q":[[1.0,0.5],[0.4,1.0]],"u":[1,1],"constraints":[]}"#,
        )
        .unwrap();
        let err = read_instance(&path).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "Q"));
    }

    #[test]
    fn minimal_file_parses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("min.json");
        std::fs::write(
            &path,
            r#"{"name":"m","n":1,"a":[1],"b":[-2],"Q":[[2]],"u":[1],"constraints":[]}"#,
        )
        .unwrap();
        let inst = read_instance(&path).unwrap();
        assert_eq!(inst.n, 1);
        assert_eq!(inst.q[0][0], 2.0);
    }
}
