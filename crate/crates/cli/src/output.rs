//! File emission: atomic writes (temp + rename in the destination
//! directory) and the CSV/JSON formats.  Numbers are printed with
//! `{:.16e}` (17 significant digits) so identical runs are byte-identical.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use iprox::algorithms::Trace;
use iprox::verify::{CheckRecord, SurfaceGrid, Status};

pub fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = PathBuf::from(dir);
    tmp.push(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per iterate: index, distance to the exact fixed point, step
/// residual (empty on row 0), proof-side error envelope, coordinates.
pub fn trace_csv(trace: &Trace) -> String {
    let dim = trace.iterates.first().map(|x| x.len()).unwrap_or(0);
    let mut s = String::from("k,dist_to_target,residual,bound_envelope");
    for i in 0..dim {
        s.push_str(&format!(",x{i}"));
    }
    s.push('\n');
    for (k, x) in trace.iterates.iter().enumerate() {
        let res = if k == 0 { String::new() } else { num(trace.residuals[k - 1]) };
        s.push_str(&format!("{k},{},{res},{}", num(trace.dist_to_target[k]), num(trace.bound_envelope[k])));
        for v in x {
            s.push_str(&format!(",{}", num(*v)));
        }
        s.push('\n');
    }
    s
}

/// Long-format surface table: one row per (L_g, mu/L_f) cell and algorithm.
pub fn surface_csv(grid: &SurfaceGrid) -> String {
    let mut s = String::from("l_g,mu_over_l_f,fb,pr,dr\n");
    for (i, lg) in grid.l_g.iter().enumerate() {
        for (j, r) in grid.ratios.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                num(*lg),
                num(*r),
                num(grid.fb[i][j]),
                num(grid.pr[i][j]),
                num(grid.dr[i][j])
            ));
        }
    }
    s
}

pub fn records_json(records: &[CheckRecord], seed: u64, filter: &str) -> String {
    let report = serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "filter": filter,
        "total": records.len(),
        "failed": records.iter().filter(|r| r.status == Status::Fail).count(),
        "records": records,
    });
    let mut s = serde_json::to_string_pretty(&report).expect("report serialization");
    s.push('\n');
    s
}
