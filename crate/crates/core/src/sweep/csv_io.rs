//! CSV persistence of sweep records. Floats carry 17 significant digits so
//! a write/read round trip is bit-exact.

use std::path::Path;

use crate::error::{Error, Result};
use crate::thermo::HeatFlowRecord;

pub const CSV_HEADER: [&str; 9] =
    ["phi", "omega_q_over_OmegaL", "P_L_natural", "P_R_natural", "P_L_watts", "P_R_watts", "residual", "min_eig", "method"];

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    Error::Csv { path: path.to_path_buf(), source }
}

/// Header plus one row per record, in the given order. Failed points are
/// written with NaN values.
pub fn write_csv(records: &[HeatFlowRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| csv_error(path, e))?;
    for r in records {
        let row = [
            fmt(r.phi),
            fmt(r.omega_q),
            fmt(r.p_l),
            fmt(r.p_r),
            fmt(r.p_l_si),
            fmt(r.p_r_si),
            fmt(r.residual),
            fmt(r.min_eig),
            r.method.clone(),
        ];
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|source| Error::File { path: path.to_path_buf(), source })
}

/// Records back from [`write_csv`] output. Rows with a NaN heat current
/// are marked failed.
pub fn read_csv(path: &Path) -> Result<Vec<HeatFlowRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Consistency(format!("{}: unexpected header `{}`", path.display(), header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    for (line, row) in r.records().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let num = |k: usize| -> Result<f64> {
            row[k].parse::<f64>().map_err(|_| {
                Error::Consistency(format!(
                    "{} row {}: `{}` is not a number in column {}",
                    path.display(),
                    line + 2,
                    &row[k],
                    CSV_HEADER[k]
                ))
            })
        };
        let p_l = num(2)?;
        out.push(HeatFlowRecord {
            phi: num(0)?,
            omega_q: num(1)?,
            p_l,
            p_r: num(3)?,
            p_l_si: num(4)?,
            p_r_si: num(5)?,
            residual: num(6)?,
            min_eig: num(7)?,
            method: row[8].to_string(),
            error: p_l.is_nan().then(|| "failed point".to_string()),
        });
    }
    Ok(out)
}
