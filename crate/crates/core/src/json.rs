//! Small serde helpers shared by the file formats.

use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

/// A non-negative integer that is written as a JSON number when it fits in
/// `u64` and as a decimal string otherwise. Both forms are accepted on input.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent(pub BigUint);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_u64() {
            Some(v) => s.serialize_u64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Exponent;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative integer or a string of decimal digits")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Exponent, E> {
                Ok(Exponent(v.into()))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Exponent, E> {
                u64::try_from(v)
                    .map(|v| Exponent(v.into()))
                    .map_err(|_| E::custom("negative integer"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Exponent, E> {
                v.parse::<BigUint>()
                    .map(Exponent)
                    .map_err(|_| E::custom(format!("invalid integer string `{v}`")))
            }
        }
        d.deserialize_any(V)
    }
}

pub fn uint_value(n: &BigUint) -> Value {
    match n.to_u64() {
        Some(v) => Value::from(v),
        None => Value::from(n.to_string()),
    }
}

/// `serialize_with` adapter writing a [`BigUint`] like [`Exponent`].
pub fn serialize_uint<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    uint_value(n).serialize(s)
}
