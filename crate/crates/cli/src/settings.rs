//! Flat `key = value` settings with layered overrides.
//!
//! Resolution order, later wins: built-in defaults, `--config` file,
//! `--set key=value`, dedicated flags.

use std::collections::BTreeMap;
use std::fmt::{self, Display, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};

/// Bad input from the command line or a config file. Exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

/// One documented key: name, default (empty means "must be supplied") and
/// description.
pub type SettingKey = (&'static str, String, &'static str);

#[derive(Debug, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
    /// Keys starting with this prefix are accepted without a default.
    open_prefix: Option<&'static str>,
}

impl Settings {
    pub fn new(keys: &[SettingKey], open_prefix: Option<&'static str>) -> Self {
        Self {
            values: keys.iter().map(|(k, v, _)| (k.to_string(), v.clone())).collect(),
            open_prefix,
        }
    }

    fn accepts(&self, key: &str) -> bool {
        self.values.contains_key(key) || self.open_prefix.is_some_and(|p| key.starts_with(p))
    }

    fn assign(&mut self, key: &str, value: &str, origin: &str) -> Result<()> {
        if !self.accepts(key) {
            let known: Vec<&str> = self.values.keys().map(String::as_str).collect();
            return usage(format!("{origin}: unknown key {key:?} (known keys: {})", known.join(", ")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn merge_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return usage(format!("{origin}:{}: expected `key = value`, got {raw:?}", n + 1));
            };
            self.assign(key.trim(), value.trim(), &format!("{origin}:{}", n + 1))?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        self.merge_text(&text, &path.display().to_string())
    }

    /// Applies `key=value` overrides.
    pub fn merge_pairs(&mut self, pairs: &[String]) -> Result<()> {
        for pair in pairs {
            let Some((key, value)) = pair.split_once('=') else {
                return usage(format!("--set expects key=value, got {pair:?}"));
            };
            self.assign(key.trim(), value.trim(), "--set")?;
        }
        Ok(())
    }

    pub fn flag(&mut self, key: &str, value: Option<impl Display>) {
        if let Some(v) = value {
            debug_assert!(self.accepts(key), "flag for undeclared key {key}");
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    pub fn raw(&self, key: &str) -> Result<&str> {
        match self.values.get(key).map(String::as_str) {
            Some("") | None => usage(format!("missing required setting `{key}`")),
            Some(v) => Ok(v),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        let raw = self.raw(key)?;
        raw.parse()
            .or_else(|e| usage(format!("setting `{key}`: cannot parse {raw:?}: {e}")))
    }

    /// Entries under the open prefix, in key order.
    pub fn prefixed(&self) -> Vec<(&str, &str)> {
        let Some(prefix) = self.open_prefix else { return Vec::new() };
        self.values
            .iter()
            .filter(|(k, _)| k.starts_with(prefix))
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect()
    }

    /// Every resolved value in the same format the config file accepts.
    pub fn render(&self, command: &str) -> String {
        let mut out = format!("# resolved settings for `{command}`\n");
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// Help text listing every key with its default.
pub fn describe(keys: &[SettingKey]) -> String {
    let width = keys.iter().map(|k| k.0.len()).max().unwrap_or(0);
    let mut out = String::from("Settings (config file `key = value`, or --set key=value):\n");
    for (k, default, help) in keys {
        let default = if default.is_empty() { "required".to_string() } else { format!("default {default}") };
        let _ = writeln!(out, "  {k:width$}  {help} [{default}]");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys() -> Vec<SettingKey> {
        vec![
            ("epochs", "30".into(), ""),
            ("out", String::new(), ""),
        ]
    }

    #[test]
    fn layering() {
        let mut s = Settings::new(&keys(), None);
        s.merge_text("# comment\nepochs = 5  # trailing\n\n", "cfg").unwrap();
        assert_eq!(s.get::<usize>("epochs").unwrap(), 5);
        s.merge_pairs(&["epochs=7".into()]).unwrap();
        assert_eq!(s.get::<usize>("epochs").unwrap(), 7);
        s.flag("epochs", Some(9));
        s.flag("epochs", None::<usize>);
        assert_eq!(s.get::<usize>("epochs").unwrap(), 9);
    }

    #[test]
    fn errors_are_usage_errors() {
        let mut s = Settings::new(&keys(), None);
        for e in [
            s.clone().merge_text("nope = 1", "cfg").unwrap_err(),
            s.clone().merge_text("epochs 3", "cfg").unwrap_err(),
            s.raw("out").map(|_| ()).unwrap_err(),
        ] {
            assert!(e.downcast_ref::<UsageError>().is_some(), "{e}");
        }
        s.merge_text("epochs = many", "cfg").unwrap();
        assert!(s.get::<usize>("epochs").unwrap_err().downcast_ref::<UsageError>().is_some());
    }

    #[test]
    fn render_round_trips() {
        let mut s = Settings::new(&keys(), Some("component."));
        s.merge_text("out = dir\ncomponent.0 = 0 0.5 10 1 2", "cfg").unwrap();
        let mut t = Settings::new(&keys(), Some("component."));
        t.merge_text(&s.render("x"), "rendered").unwrap();
        assert_eq!(s.values, t.values);
        assert_eq!(t.prefixed(), vec![("component.0", "0 0.5 10 1 2")]);
    }
}
