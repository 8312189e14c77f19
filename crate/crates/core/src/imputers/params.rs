use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Typed reader over a method's hyperparameter map. Every key must be
/// consumed; leftovers are reported by [`Params::finish`].
pub struct Params<'a> {
    method: &'a str,
    map: Map<String, Value>,
}

impl<'a> Params<'a> {
    pub fn new(method: &'a str, map: &Map<String, Value>) -> Self {
        Params {
            method,
            map: map.clone(),
        }
    }

    fn err(&self, message: String) -> Error {
        Error::InvalidParam {
            method: self.method.to_string(),
            message,
        }
    }

    pub fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .or_else(|| v.as_str().and_then(|s| s.parse().ok()))
                .map(|x| x as usize)
                .ok_or_else(|| self.err(format!("`{key}` must be a non-negative integer, got {v}"))),
        }
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .or_else(|| v.as_str().and_then(|s| s.parse().ok()))
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| self.err(format!("`{key}` must be a finite number, got {v}"))),
        }
    }

    pub fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            None => Ok(()),
            Some(k) => Err(self.err(format!("unknown parameter `{k}`"))),
        }
    }
}

/// Parses `key=value` pairs (CLI style) into a parameter map. Values that
/// parse as JSON numbers become numbers; anything else stays a string.
pub fn parse_kv_pairs<S: AsRef<str>>(pairs: &[S]) -> Result<Map<String, Value>> {
    let mut map = Map::new();
    for pair in pairs {
        let pair = pair.as_ref();
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("parameter `{pair}` is not of the form key=value")))?;
        let value = serde_json::from_str::<Value>(v)
            .ok()
            .filter(Value::is_number)
            .unwrap_or_else(|| Value::String(v.to_string()));
        map.insert(k.trim().to_string(), value);
    }
    Ok(map)
}
