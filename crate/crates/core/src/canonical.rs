//! Canonical JSON: object keys sorted, no insignificant whitespace.
//!
//! Everything that is compared byte-for-byte (snapshots, event payloads,
//! exported graphs) goes through here.

use serde::Serialize;

use crate::error::Result;

/// Serialize with sorted keys. `serde_json::Value` keeps maps in a
/// `BTreeMap`, so a round-trip through it fixes the key order.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let value = serde_json::to_value(value)?;
    Ok(serde_json::to_string(&value)?)
}

pub fn to_string_pretty<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let value = serde_json::to_value(value)?;
    Ok(serde_json::to_string_pretty(&value)?)
}

pub fn to_value<T: Serialize + ?Sized>(value: &T) -> serde_json::Value {
    // Every type we hand in here is plain data with string keys.
    serde_json::to_value(value).expect("canonical value")
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    #[test]
    fn keys_are_sorted() {
        let mut m = HashMap::new();
        m.insert("zeta", 1);
        m.insert("alpha", 2);
        m.insert("mid", 3);
        assert_eq!(super::to_string(&m).unwrap(), r#"{"alpha":2,"mid":3,"zeta":1}"#);
    }
}
