use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::ExperimentRecord;
use crate::error::{Error, Result};
use crate::mesh::{
    check_prime, empirical_marginal_distance, weil_points_interior, weil_symmetry_holds, MarginalTarget,
};

/// Marginal distribution and symmetry of Weil point sets along a prime sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeilConfig {
    pub primes: Vec<u64>,
    pub dimension: usize,
}

impl Default for WeilConfig {
    fn default() -> Self {
        Self {
            primes: vec![101, 359, 751, 1511],
            dimension: 2,
        }
    }
}

pub fn run_weil_study(config: &WeilConfig) -> Result<ExperimentRecord> {
    let start = Instant::now();
    if config.dimension == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    for &p in &config.primes {
        check_prime(p)?;
    }
    let d = config.dimension;
    let mut columns = vec!["prime".to_owned(), "count".to_owned()];
    columns.extend((1..=d).map(|j| format!("ks_z{j}")));
    columns.extend(["ks_max".to_owned(), "symmetry".to_owned()]);
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut record = ExperimentRecord::new("weil", config, &columns)?;
    for &p in &config.primes {
        let mesh = weil_points_interior(p, d)?;
        let ks: Vec<f64> = (0..d)
            .map(|j| empirical_marginal_distance(&mesh, j, MarginalTarget::Arcsine))
            .collect::<Result<_>>()?;
        let mut row = vec![p.into(), mesh.count().into()];
        row.extend(ks.iter().map(|&x| x.into()));
        row.push(ks.iter().copied().fold(0.0, f64::max).into());
        row.push(weil_symmetry_holds(p, d)?.into());
        record.push(row);
    }
    record.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_are_half_the_prime() {
        let rec = run_weil_study(&WeilConfig::default()).unwrap();
        let (count, sym) = (rec.column("count").unwrap(), rec.column("symmetry").unwrap());
        let counts: Vec<f64> = rec.rows.iter().map(|r| r[count].as_f64().unwrap()).collect();
        assert_eq!(counts, vec![50.0, 179.0, 375.0, 755.0]);
        assert!(rec.rows.iter().all(|r| r[sym] == true.into()));
    }

    #[test]
    fn composite_is_rejected() {
        let config = WeilConfig {
            primes: vec![101, 100],
            dimension: 2,
        };
        assert!(matches!(run_weil_study(&config), Err(Error::NotPrime(100))));
    }
}
