//! Run configuration: defaults, then the TOML file, then command-line flags.

use std::path::{Path, PathBuf};

use glued_bessel::suite::Settings;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "GLUED_CONFIG";

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub settings: Settings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            threads: None,
            out: PathBuf::from("reports"),
            settings: Settings::default(),
        }
    }
}

/// Reads `path`. Besides the suite settings, the file may set `threads`
/// and `out`.
pub fn load(path: Option<&Path>) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    let Some(path) = path else { return Ok(cfg) };
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut table: toml::Table = text.parse().map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(v) = table.remove("threads") {
        let n = v.as_integer().filter(|n| *n > 0).ok_or("threads must be a positive integer")?;
        cfg.threads = Some(n as usize);
    }
    if let Some(v) = table.remove("out") {
        cfg.out = PathBuf::from(v.as_str().ok_or("out must be a string")?);
    }
    cfg.settings = toml::Value::Table(table)
        .try_into()
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(cfg)
}

/// `key=value` lines for every leaf of the settings, nested keys dotted.
pub fn echo(settings: &Settings) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
        match v {
            serde_json::Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, v, out);
                }
            }
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    if let Ok(v) = serde_json::to_value(settings) {
        walk("", &v, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(text: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("glued-cfg-{}-{}", std::process::id(), text.len()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("run.toml");
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn file_values_override_defaults() {
        let p = write("threads = 2\nout = \"x\"\nd = 4.0\natoms = 7\n[grid]\nx_max = 90.0\n");
        let cfg = load(Some(&p)).unwrap();
        assert_eq!(cfg.threads, Some(2));
        assert_eq!(cfg.out, PathBuf::from("x"));
        assert_eq!(cfg.settings.d, 4.0);
        assert_eq!(cfg.settings.atoms, 7);
        assert_eq!(cfg.settings.grid.x_max, 90.0);
        assert_eq!(cfg.settings.grid.h_min, Settings::default().grid.h_min);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(load(Some(&write("dd = 3.0\n"))).is_err());
        assert!(load(Some(&write("threads = 0\n"))).is_err());
        assert!(load(Some(Path::new("/nonexistent/run.toml"))).is_err());
    }

    #[test]
    fn echo_flattens_nested_settings() {
        let e = echo(&Settings::default());
        assert!(e.iter().any(|(k, v)| k == "d" && v == "3.0"));
        assert!(e.iter().any(|(k, _)| k == "grid.h_min"));
        assert!(e.iter().any(|(k, _)| k == "sandwich.c_max"));
    }
}
