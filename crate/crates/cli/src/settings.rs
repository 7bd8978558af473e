//! Layered settings: command-line flags over a `key=value` config file over
//! built-in defaults. Every value a command reads is recorded so the
//! effective configuration can be echoed next to the output.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::Failure;

#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    used: BTreeMap<String, String>,
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let file = match path {
            None => BTreeMap::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::io(format!("{}: {e}", p.display())))?;
                parse_config(&text).map_err(Failure::usage)?
            }
        };
        Ok(Settings {
            file,
            used: BTreeMap::new(),
        })
    }

    /// Flag if given, else the config file entry, else `default`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, Failure>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match (flag, self.file.get(key)) {
            (Some(v), _) => v,
            (None, Some(text)) => text
                .parse()
                .map_err(|e| Failure::usage(format!("config key {key}={text}: {e}")))?,
            (None, None) => default,
        };
        self.used.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Like [`get`](Self::get) with no default; absent means `None`.
    pub fn get_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, Failure>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match (flag, self.file.get(key)) {
            (Some(v), _) => Some(v),
            (None, Some(text)) => Some(
                text.parse()
                    .map_err(|e| Failure::usage(format!("config key {key}={text}: {e}")))?,
            ),
            (None, None) => None,
        };
        if let Some(v) = &value {
            self.used.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    /// Like [`get_opt`](Self::get_opt) for strings, echoed only as `<set>`.
    pub fn get_secret(&mut self, key: &str, flag: Option<String>) -> Option<String> {
        let value = flag.or_else(|| self.file.get(key).cloned());
        if value.is_some() {
            self.used.insert(key.to_string(), "<set>".to_string());
        }
        value
    }

    pub fn record(&mut self, key: &str, value: impl Display) {
        self.used.insert(key.to_string(), value.to_string());
    }

    pub fn effective(&self) -> &BTreeMap<String, String> {
        &self.used
    }

    pub fn to_text(&self) -> String {
        self.used
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.used).expect("string map serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let mut s = Settings {
            file: parse_config("# comment\na = 30.5\nsteps=5\n").unwrap(),
            used: BTreeMap::new(),
        };
        assert_eq!(s.get("a", Some(28.0), 27.0).unwrap(), 28.0);
        assert_eq!(s.get("steps", None, 10usize).unwrap(), 5);
        assert_eq!(s.get("dt", None, 1e-3).unwrap(), 1e-3);
        assert_eq!(s.to_text(), "a=28\ndt=0.001\nsteps=5\n");
        assert!(s.get::<usize>("a", None, 0).is_err());
        assert!(parse_config("novalue").is_err());
    }
}
