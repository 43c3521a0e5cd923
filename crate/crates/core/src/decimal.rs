//! Serde adapters that write integers as decimal strings.
//!
//! Wire formats carry every integer as a string so 64-bit JSON consumers
//! never truncate them.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

use crate::WideInt;

pub fn serialize<S: Serializer>(v: &WideInt, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<WideInt, D::Error> {
    let s = <std::borrow::Cow<'de, str>>::deserialize(d)?;
    parse(&s).map_err(D::Error::custom)
}

pub(crate) fn parse(s: &str) -> Result<WideInt, String> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("invalid decimal integer {s:?}"));
    }
    s.parse()
        .map_err(|e| format!("invalid decimal integer {s:?}: {e}"))
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<WideInt>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<WideInt>, D::Error> {
        let s = Option::<std::borrow::Cow<'de, str>>::deserialize(d)?;
        s.map(|s| parse(&s).map_err(D::Error::custom)).transpose()
    }
}

pub mod vec {
    use serde::ser::SerializeSeq;

    use super::*;

    pub fn serialize<S: Serializer>(v: &[WideInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<WideInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse(s).map_err(D::Error::custom))
            .collect()
    }
}
