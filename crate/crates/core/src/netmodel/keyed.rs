//! Serde adapter writing `BTreeMap<RequestKey, V>` as a JSON list of
//! `{ "buyer_id", "index", "value" }` entries, since JSON object keys must be
//! strings.

use std::collections::BTreeMap;

use serde::de::Deserializer;
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use super::RequestKey;

#[derive(Serialize)]
struct EntryRef<'a, V> {
    buyer_id: u32,
    index: u32,
    value: &'a V,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry<V> {
    buyer_id: u32,
    index: u32,
    value: V,
}

pub fn serialize<S, V>(map: &BTreeMap<RequestKey, V>, serializer: S) -> Result<S::Ok, S::Error>
where
    S: Serializer,
    V: Serialize,
{
    let mut seq = serializer.serialize_seq(Some(map.len()))?;
    for (key, value) in map {
        seq.serialize_element(&EntryRef {
            buyer_id: key.buyer_id,
            index: key.index,
            value,
        })?;
    }
    seq.end()
}

pub fn deserialize<'de, D, V>(deserializer: D) -> Result<BTreeMap<RequestKey, V>, D::Error>
where
    D: Deserializer<'de>,
    V: Deserialize<'de>,
{
    let entries: Vec<Entry<V>> = Vec::deserialize(deserializer)?;
    let mut map = BTreeMap::new();
    for entry in entries {
        let key = RequestKey::new(entry.buyer_id, entry.index);
        if map.insert(key, entry.value).is_some() {
            return Err(serde::de::Error::custom(format!(
                "duplicate entry for request {key}"
            )));
        }
    }
    Ok(map)
}
