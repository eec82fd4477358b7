//! Serializers writing big integers as decimal strings.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

pub fn dec<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn dec_pair_opt<S: Serializer>(v: &Option<(BigUint, BigUint)>, s: S) -> Result<S::Ok, S::Error> {
    v.as_ref()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .serialize(s)
}

/// A map with non-string keys as a list of `{key, count}` rows.
pub fn rows<K: Serialize, S: Serializer>(v: &BTreeMap<K, BigUint>, s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Row<'a, K> {
        key: &'a K,
        count: String,
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (key, c) in v {
        seq.serialize_element(&Row { key, count: c.to_string() })?;
    }
    seq.end()
}
