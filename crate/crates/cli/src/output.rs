//! CSV and JSON report files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use glued_bessel::stochastic::RNG_ALGORITHM;
use glued_bessel::suite::{Settings, SuiteReport, Table};

use crate::config::echo;

pub struct Context<'a> {
    pub settings: &'a Settings,
    pub threads: usize,
}

/// Commented header echoing the configuration; the only place a
/// timestamp appears.
fn header(ctx: &Context, suite: &str, table: &Table) -> String {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut out = format!(
        "# suite={suite}\n# table={}\n# version={}\n# started_unix={stamp}\n# threads={}\n# rng={RNG_ALGORITHM}\n",
        table.name,
        env!("CARGO_PKG_VERSION"),
        ctx.threads
    );
    for (k, v) in echo(ctx.settings) {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out
}

/// Writes the tables and the JSON report. A target ending in `.csv` names
/// the file for the first table; anything else is a directory.
pub fn write(ctx: &Context, target: &Path, report: &SuiteReport) -> std::io::Result<Vec<PathBuf>> {
    let single = target.extension().is_some_and(|e| e == "csv");
    let dir = if single { target.parent().unwrap_or(Path::new(".")).to_path_buf() } else { target.to_path_buf() };
    if !dir.as_os_str().is_empty() {
        fs::create_dir_all(&dir)?;
    }
    let mut written = Vec::new();
    for (i, table) in report.tables.iter().enumerate() {
        let path = if single && i == 0 {
            target.to_path_buf()
        } else {
            dir.join(format!("{}-{}.csv", report.suite, table.name))
        };
        fs::write(&path, header(ctx, &report.suite, table) + &table.to_csv())?;
        written.push(path);
    }
    let json = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "threads": ctx.threads,
        "settings": ctx.settings,
        "report": report,
    });
    let path = dir.join(format!("{}.json", report.suite));
    fs::write(&path, serde_json::to_string_pretty(&json).unwrap_or_default() + "\n")?;
    written.push(path);
    Ok(written)
}
