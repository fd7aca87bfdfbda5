//! CSV export of sample traces and the metadata that accompanies them.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::schedule::IntegrationSchedule;

/// Writes one row per iteration (`iter, x0, x1, ...`).
pub fn write_samples_csv<W: Write>(writer: W, samples: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let d = samples.first().map_or(0, Vec::len);
    let mut header = vec!["iter".to_string()];
    header.extend((0..d).map(|j| format!("x{j}")));
    w.write_record(&header)?;
    for (i, s) in samples.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(s.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Metadata sidecar for a trace CSV.
#[derive(Debug, Clone, Serialize)]
pub struct TraceSidecar<'a> {
    pub sampler: &'static str,
    pub schedule: &'a IntegrationSchedule,
    pub seed: u64,
    pub chain: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::SpectralBounds;

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &[vec![1.0, -0.5], vec![0.25, 2.0]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "iter,x0,x1\n0,1,-0.5\n1,0.25,2\n");
    }

    #[test]
    fn sidecar_names_the_schedule() {
        let s = IntegrationSchedule::constant(2, SpectralBounds::new(1.0, 4.0).unwrap()).unwrap();
        let side = TraceSidecar { sampler: "ideal", schedule: &s, seed: 3, chain: 0, theta: None };
        let json = serde_json::to_string(&side).unwrap();
        assert!(json.contains("\"kind\":\"constant\"") && !json.contains("theta"));
    }
}
