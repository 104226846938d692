use std::io::{self, Write};

use super::SweepResult;

pub const CSV_HEADER: &str = "scheme,cell,sweep_param,sweep_value,mean_sum_rate_bps_hz,std_err,num_drops";

/// Nine significant digits in scientific notation.
fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Writes the header and one row per result, in the order given.
pub fn write_csv<W: Write>(results: &[SweepResult], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.scheme.as_str(),
            r.cell.as_str(),
            r.sweep.as_str(),
            sig9(r.sweep_value),
            sig9(r.mean_sum_rate),
            sig9(r.std_err),
            r.num_drops
        )?;
    }
    out.flush()
}
