use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::routes::RouteSamples;

/// SHA-256 of the effective configuration as compact JSON.
pub fn config_hash(cfg: &RunConfig) -> String {
    let json = serde_json::to_vec(cfg).expect("config serializes");
    Sha256::digest(&json).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Renders the table. Probabilities are clamped to `[0, 1]` here only.
pub fn render_csv(command: &str, cfg: &RunConfig, times: &[f64], samples: &[RouteSamples]) -> String {
    let mut out = String::new();
    let routes: Vec<_> = samples.iter().map(|s| s.route.name()).collect();
    let _ = writeln!(out, "# fracdecay {command}");
    let _ = writeln!(out, "# config_sha256 = {}", config_hash(cfg));
    let _ = writeln!(out, "# config = {}", serde_json::to_string(cfg).expect("config serializes"));
    let _ = writeln!(out, "# routes = {}", routes.join(","));
    out.push('t');
    for r in &routes {
        let _ = write!(out, ",{r}_re_amp,{r}_im_amp,{r}_prob,{r}_err");
    }
    out.push('\n');
    for (i, t) in times.iter().enumerate() {
        let _ = write!(out, "{t:e}");
        for s in samples {
            let a = s.amplitudes[i];
            let prob = s.probabilities[i].clamp(0.0, 1.0);
            let _ = write!(out, ",{:e},{:e},{:e},{:e}", a.re, a.im, prob, s.errors[i]);
        }
        out.push('\n');
    }
    out
}

/// Writes through a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
