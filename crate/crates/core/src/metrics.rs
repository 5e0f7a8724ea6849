//! Energy-quality metrics and batch summaries.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{QidaError, Result};

/// Percentage of the exact energy reached, `E / E_exact * 100`.
pub fn aqe(e: f64, e_exact: f64) -> Result<f64> {
    if e_exact == 0.0 {
        return Err(QidaError::Invalid("exact energy is zero".into()));
    }
    Ok(e / e_exact * 100.0)
}

/// Distance from the Néel energy relative to the exact gap, in percent.
pub fn rqe(e: f64, e_exact: f64, e_neel: f64) -> Result<f64> {
    let den = (e_exact - e_neel).abs();
    if den == 0.0 {
        return Err(QidaError::Invalid("exact and Néel energies coincide".into()));
    }
    Ok((e - e_neel).abs() / den * 100.0)
}

/// Mean absolute deviation from `best`.
pub fn deviation_metric(values: &[f64], best: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(QidaError::Invalid("empty batch".into()));
    }
    Ok(values.iter().map(|v| (v - best).abs()).sum::<f64>() / values.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub lattice: String,
    pub ansatz: String,
    pub runs: usize,
    pub e_avg: f64,
    /// Sample standard deviation (n - 1 in the denominator).
    pub e_std: f64,
    pub e_best: f64,
    pub aqe_avg: f64,
    pub aqe_best: f64,
    pub rqe_avg: f64,
    pub rqe_best: f64,
    pub med: f64,
    pub maed: f64,
    pub mred: f64,
    pub cnot_count: usize,
}

/// Summary over final energies of one batch; "best" is the lowest energy.
pub fn summarize(lattice: &str, ansatz: &str, energies: &[f64], e_exact: f64, e_neel: f64, cnot_count: usize) -> Result<MetricSummary> {
    if energies.is_empty() {
        return Err(QidaError::Invalid("empty batch".into()));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(QidaError::Invalid("batch contains non-finite energies".into()));
    }
    let n = energies.len() as f64;
    let e_avg = energies.iter().sum::<f64>() / n;
    let e_std = if energies.len() > 1 { (energies.iter().map(|e| (e - e_avg).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    let e_best = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let aqes = energies.iter().map(|&e| aqe(e, e_exact)).collect::<Result<Vec<_>>>()?;
    let rqes = energies.iter().map(|&e| rqe(e, e_exact, e_neel)).collect::<Result<Vec<_>>>()?;
    let aqe_best = aqe(e_best, e_exact)?;
    let rqe_best = rqe(e_best, e_exact, e_neel)?;
    Ok(MetricSummary {
        lattice: lattice.to_string(),
        ansatz: ansatz.to_string(),
        runs: energies.len(),
        e_avg,
        e_std,
        e_best,
        aqe_avg: aqes.iter().sum::<f64>() / n,
        aqe_best,
        rqe_avg: rqes.iter().sum::<f64>() / n,
        rqe_best,
        med: deviation_metric(energies, e_best)?,
        maed: deviation_metric(&aqes, aqe_best)?,
        mred: deviation_metric(&rqes, rqe_best)?,
        cnot_count,
    })
}

pub const CSV_HEADER: &str = "Lattice,Ansatz,E_avg,E_best,AQE_avg,RQE_avg,AQE_best,RQE_best,MED,MAED,MRED,E_std,CNOT,runs";

impl MetricSummary {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{}",
            self.lattice, self.ansatz, self.e_avg, self.e_best, self.aqe_avg, self.rqe_avg, self.aqe_best, self.rqe_best, self.med, self.maed, self.mred, self.e_std, self.cnot_count, self.runs
        )
    }
}

pub fn summaries_csv(rows: &[MetricSummary]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(s, "{}", r.csv_row());
    }
    s
}

/// Fixed-width table, percentages to 2 decimals.
pub fn summaries_table(rows: &[MetricSummary]) -> String {
    let mut s = format!(
        "{:<14} {:<10} {:>12} {:>8} {:>10} {:>8} {:>8} {:>8} {:>8} {:>9} {:>7} {:>7} {:>5}\n",
        "lattice", "ansatz", "E_avg", "E_std", "E_best", "AQE_avg", "RQE_avg", "AQE_bst", "RQE_bst", "MED", "MAED", "MRED", "CNOT"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<14} {:<10} {:>12.6} {:>8.4} {:>10.6} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>9.2e} {:>7.2} {:>7.2} {:>5}",
            r.lattice, r.ansatz, r.e_avg, r.e_std, r.e_best, r.aqe_avg, r.rqe_avg, r.aqe_best, r.rqe_best, r.med, r.maed, r.mred, r.cnot_count
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_two_values() {
        assert!((aqe(-6.362179, -6.691680).unwrap() - 95.08).abs() < 5e-3);
        assert!((rqe(-6.362179, -6.691680, -4.25).unwrap() - 86.51).abs() < 5e-3);
    }

    #[test]
    fn anchors() {
        assert_eq!(aqe(-3.0, -3.0).unwrap(), 100.0);
        assert_eq!(aqe(0.0, -3.0).unwrap(), 0.0);
        assert_eq!(rqe(-4.25, -6.69168, -4.25).unwrap(), 0.0);
        assert_eq!(rqe(-6.69168, -6.69168, -4.25).unwrap(), 100.0);
        assert!(aqe(1.0, 0.0).is_err());
        assert!(rqe(1.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn deviations() {
        assert_eq!(deviation_metric(&[2.0, 2.0], 2.0).unwrap(), 0.0);
        assert_eq!(deviation_metric(&[1.0, 3.0], 1.0).unwrap(), 1.0);
        assert!(deviation_metric(&[], 0.0).is_err());
    }

    #[test]
    fn summary_identities() {
        let e = [-6.30, -6.35, -6.10, -6.36];
        let s = summarize("3x4", "QIDA-SO4", &e, -6.69168, -4.25, 56).unwrap();
        assert_eq!(s.e_best, -6.36);
        assert!(s.e_best <= s.e_avg && s.aqe_best >= s.aqe_avg);
        assert!((s.maed - s.med * 100.0 / 6.69168).abs() < 1e-9);
        let std = (e.iter().map(|x| (x - s.e_avg).powi(2)).sum::<f64>() / 3.0).sqrt();
        assert!((s.e_std - std).abs() < 1e-15);
        let csv = summaries_csv(&[s]);
        assert!(csv.starts_with("Lattice,Ansatz,E_avg,E_best,AQE_avg,RQE_avg,AQE_best,RQE_best,MED,MAED,MRED"));
        assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), 14);
    }
}
