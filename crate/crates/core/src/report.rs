//! Versioned persistence and report emission: schedules, certificates and
//! analysis results as JSON (`"format": 1`), series data as CSV. Output is
//! byte-deterministic for fixed inputs: ordered maps only, no timestamps.

use std::io::Write;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::birkhoff::BirkhoffReport;
use crate::entropy::KatokEstimate;
use crate::error::{Error, Result};
use crate::schedule::BlockSchedule;
use crate::synthesis::Certificate;

pub const FORMAT_VERSION: u32 = 1;

/// Versioned envelope for every file this crate writes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub format: u32,
    pub kind: String,
    pub payload: T,
}

impl<T: Serialize + DeserializeOwned> Envelope<T> {
    pub fn new(kind: &str, payload: T) -> Self {
        Envelope {
            format: FORMAT_VERSION,
            kind: kind.to_string(),
            payload,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_json()?.as_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let data = std::fs::read_to_string(path)?;
        let env: Envelope<T> = serde_json::from_str(&data)?;
        if env.format != FORMAT_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported format version {}",
                env.format
            )));
        }
        Ok(env)
    }
}

pub fn save_schedule(path: &Path, schedule: &BlockSchedule) -> Result<()> {
    Envelope::new("schedule", schedule.clone()).write(path)
}

pub fn load_schedule(path: &Path) -> Result<BlockSchedule> {
    Ok(Envelope::<BlockSchedule>::read(path)?.payload)
}

pub fn save_certificate(path: &Path, cert: &Certificate) -> Result<()> {
    Envelope::new("certificate", cert.clone()).write(path)
}

pub fn load_certificate(path: &Path) -> Result<Certificate> {
    Ok(Envelope::<Certificate>::read(path)?.payload)
}

/// Prefix Birkhoff averages as CSV rows `n,average`.
pub fn birkhoff_series_csv(report: &BirkhoffReport) -> String {
    let mut out = String::from("n,average\n");
    for (n, avg) in &report.series {
        out.push_str(&format!("{n},{avg:.12}\n"));
    }
    out
}

/// Katok counting table as CSV rows `n,count_log,ratio`.
pub fn katok_csv(est: &KatokEstimate) -> String {
    let mut out = String::from("n,count_log,ratio\n");
    for row in &est.rows {
        out.push_str(&format!(
            "{},{:.12},{:.12}\n",
            row.n, row.count_log, row.ratio
        ));
    }
    out
}

/// Cylinder table as CSV rows `word,weight`.
pub fn cylinders_csv(table: &crate::measure::CylinderMeasure) -> String {
    use num_traits::ToPrimitive;
    let mut out = String::from("word,weight\n");
    for (w, wt) in &table.weights {
        out.push_str(&format!("{w},{:.12}\n", wt.to_f64().unwrap_or(0.0)));
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::{SftDescr, Word};

    #[test]
    fn schedule_roundtrip() {
        let dir = std::env::temp_dir().join("omegalab-report-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s.json");
        let s = BlockSchedule::eventually_periodic(
            SftDescr::full(2),
            Word::empty(),
            Word::parse("01").unwrap(),
            3,
        )
        .unwrap();
        save_schedule(&path, &s).unwrap();
        let back = load_schedule(&path).unwrap();
        assert_eq!(s, back);
        // Byte-identical rewrite.
        let first = std::fs::read(&path).unwrap();
        save_schedule(&path, &back).unwrap();
        let second = std::fs::read(&path).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn version_gate() {
        let dir = std::env::temp_dir().join("omegalab-report-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.json");
        std::fs::write(
            &path,
            "{\"format\":9,\"kind\":\"schedule\",\"payload\":null}",
        )
        .unwrap();
        assert!(Envelope::<Option<u32>>::read(&path).is_err());
    }
}
