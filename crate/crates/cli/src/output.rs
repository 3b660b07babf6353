//! CSV and key=value summary formats.
//!
//! CSV numbers carry 17 significant digits so every f64 round-trips exactly.
//! Summary values use the shortest representation that round-trips, which is
//! also exact.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use tyc_core::analysis::{PointResult, ThresholdCurve};
use tyc_core::models::Species;
use tyc_core::ode::{EventLog, Sign, Status};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn create(dir: &Path, name: &str) -> io::Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

pub fn write_row(w: &mut impl Write, cells: &[String]) -> io::Result<()> {
    writeln!(w, "{}", cells.join(","))
}

pub fn header(species: &[Species], prefix: &str) -> Vec<String> {
    species.iter().map(|s| format!("{prefix}{}", s.symbol())).collect()
}

/// Summary lines for a finished run; `region` is `None` when it collapsed.
pub fn event_summary(status: Status, region: Option<&str>, events: &EventLog<f64>) -> Vec<(String, String)> {
    let mut kv = vec![
        ("status".to_string(), status.name().to_string()),
        ("region".to_string(), region.unwrap_or("Indeterminate").to_string()),
    ];
    for (c, sp) in events.species.iter().enumerate() {
        let iv = &events.negativity[c];
        let v = if iv.is_empty() {
            "none".to_string()
        } else {
            iv.iter()
                .map(|i| format!("{}:{}", i.start, i.end))
                .collect::<Vec<_>>()
                .join(";")
        };
        kv.push((format!("negativity.{}", sp.symbol()), v));
    }
    match &events.blowup {
        None => kv.push(("blowup".into(), "none".into())),
        Some(b) => {
            let opt = |x: Option<f64>| x.map_or("none".to_string(), |v| v.to_string());
            kv.push(("blowup".into(), "detected".into()));
            kv.push(("blowup_species".into(), b.species.symbol().into()));
            kv.push((
                "blowup_sign".into(),
                match b.sign {
                    Sign::PlusInfinity => "+inf",
                    Sign::MinusInfinity => "-inf",
                }
                .into(),
            ));
            kv.push(("blowup_t".into(), b.t_estimate.to_string()));
            kv.push(("blowup_method".into(), b.method.name().into()));
            kv.push(("blowup_t_cutoff".into(), opt(b.t_cutoff)));
            kv.push(("blowup_t_fit".into(), opt(b.t_fit)));
        }
    }
    kv
}

pub fn render(kv: &[(String, String)]) -> String {
    kv.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn threshold_cell(r: &PointResult<f64>) -> String {
    match r {
        PointResult::Found(th) => num(th.value),
        PointResult::Absent => "absent".into(),
        PointResult::Failed(_) => "failed".into(),
    }
}

/// Rows `f0m0,critical,boundary`, one per curve point.
pub fn write_curve(w: &mut impl Write, curve: &ThresholdCurve<f64>) -> io::Result<()> {
    for p in &curve.points {
        write_row(w, &[num(p.f0m0), threshold_cell(&p.result), curve.boundary.name().into()])?;
    }
    Ok(())
}
