use std::io::Write;

use serde::{Deserialize, Serialize};

/// Mean and (population) standard deviation over episodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

/// Aggregate evaluation scores. TE-V is reported in cm/s, TE-P in m and the
/// angular scores in rad.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub episodes: usize,
    pub te_v: Stat,
    pub te_p: Stat,
    pub te_o: Stat,
    pub temp_s: Stat,
    pub spat_s: Stat,
}

impl MetricsReport {
    pub fn rows(&self) -> [(&'static str, &'static str, Stat); 5] {
        [
            ("te_v", "cm/s", self.te_v),
            ("te_p", "m", self.te_p),
            ("te_o", "rad", self.te_o),
            ("temp_s", "rad", self.temp_s),
            ("spat_s", "rad", self.spat_s),
        ]
    }

    pub fn write_csv<W: Write>(&self, out: W, run_hash: &str) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metric", "unit", "mean", "std", "episodes", "run_hash"])?;
        for (name, unit, s) in self.rows() {
            w.write_record([
                name.to_string(),
                unit.to_string(),
                format!("{:?}", s.mean),
                format!("{:?}", s.std),
                self.episodes.to_string(),
                run_hash.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
