//! Plain-text outputs. Numbers use Rust's shortest round-trip formatting,
//! which is locale-independent and never uses thousands separators.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cogrates::region::RegionEstimate;
use cogrates::Covariance;

use crate::CliError;

pub fn pareto_csv(points: &[[f64; 3]]) -> String {
    let mut s = String::from("R1,R2,R3\n");
    for p in points {
        let _ = writeln!(s, "{},{},{}", p[0], p[1], p[2]);
    }
    s
}

pub fn metrics_txt(est: &RegionEstimate) -> String {
    format!(
        "max_r1={}\nmax_r2={}\nmax_r3={}\nmax_sum={}\ndraws={}\ndraws_vacuous={}\nseed={}\n",
        est.max_r1, est.max_r2, est.max_r3, est.max_sum, est.draws_total, est.draws_vacuous, est.seed
    )
}

/// `header` then one `u,v` row per hull vertex (header only when empty).
pub fn slice_csv(header: &str, points: &[[f64; 2]]) -> String {
    let mut s = format!("{header}\n");
    for p in points {
        let _ = writeln!(s, "{},{}", p[0], p[1]);
    }
    s
}

pub fn sigma_csv(sigma: &Covariance) -> String {
    let mut s = sigma.names().join(",");
    s.push('\n');
    let n = sigma.dim();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{}", sigma.get(i, j))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Reads a covariance: a header row of variable names, then one row of
/// numbers per variable.
pub fn read_covariance(path: &Path) -> Result<Covariance, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let names: Vec<String> = rdr.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
    let mut data = Vec::with_capacity(names.len() * names.len());
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != names.len() {
            return Err(bad(format!("row {} has {} entries, expected {}", rows + 1, rec.len(), names.len())));
        }
        for field in rec.iter() {
            data.push(field.parse::<f64>().map_err(|_| bad(format!("not a number: `{field}`")))?);
        }
        rows += 1;
    }
    if rows != names.len() {
        return Err(bad(format!("{rows} rows for {} variables", names.len())));
    }
    Covariance::new(names, data).map_err(|e| bad(e.to_string()))
}
