use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use heatforms::record::EstimateRecord;
use heatforms::validation::ValidationReport;

use crate::CliError;

/// Writes to a temporary sibling and renames it into place, or prints to
/// stdout when no path is given.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        std::io::stdout().write_all(contents.as_bytes()).map_err(io_error)?;
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_error)?;
    tmp.write_all(contents.as_bytes()).map_err(io_error)?;
    tmp.as_file().sync_all().map_err(io_error)?;
    tmp.persist(path).map_err(|e| io_error(e.error))?;
    Ok(())
}

fn io_error(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub const RECORD_HEADER: &str =
    "estimator,manifold,form,q,t,n_paths,step,seed,window_delta,window_length,mean,std_error,oracle,z_score,wall_time_s";

pub fn record_row(r: &EstimateRecord) -> String {
    let (wd, wl) = match r.window {
        Some([d, l]) => (d.to_string(), l.to_string()),
        None => (String::new(), String::new()),
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.estimator,
        r.manifold,
        r.form,
        r.q,
        r.t,
        r.n_paths,
        r.step,
        r.seed,
        wd,
        wl,
        r.mean[0],
        r.std_error[0],
        opt(r.oracle),
        opt(r.z_score),
        opt(r.wall_time_s)
    )
}

pub fn records_csv(rows: &[(EstimateRecord, Option<f64>)], with_damping: bool) -> String {
    let mut out = String::from(RECORD_HEADER);
    if with_damping {
        out.push_str(",damping_error");
    }
    out.push('\n');
    for (r, damping) in rows {
        out.push_str(&record_row(r));
        if with_damping {
            let _ = write!(out, ",{}", opt(*damping));
        }
        out.push('\n');
    }
    out
}

pub fn report_csv(report: &ValidationReport) -> String {
    let mut out = String::from("suite,check,oracle,estimate,std_error,z_score,tolerance,pass\n");
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{},\"{}\",{},{},{},{},{},{}",
            c.suite,
            c.name,
            opt(c.oracle),
            c.estimate,
            opt(c.std_error),
            opt(c.z_score),
            c.tolerance,
            c.pass
        );
    }
    out
}
