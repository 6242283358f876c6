use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::metrics::{EnhancementSource, RunTrace, TraceRecord};
use crate::timing::{fmt_scaled, parse_scaled};

pub const TRACE_HEADER: &str =
    "iteration,best_digitized,best_intensity,enhancement,mutation_rate_num,cum_measurements,model_time_us";

/// Writes to a sibling temp file, then renames over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// One row per iteration; the initialization record is not written.
pub fn trace_to_csv(trace: &RunTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let time = r.model_time.map(|t| fmt_scaled(t, 1000)).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iteration,
            r.best_digitized,
            r.best_intensity,
            r.enhancement,
            r.mutation_rate_num,
            r.cum_measurements,
            time
        );
    }
    out
}

/// Parses a trace written by [`trace_to_csv`]. The baseline is recovered from
/// the first row; an empty `best_intensity` column marks enhancement taken
/// from detector readings.
pub fn trace_from_csv(text: &str, source_name: &str) -> Result<RunTrace> {
    let parse_err = |row: usize, message: String| Error::Parse {
        source_name: source_name.to_string(),
        row,
        message,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRACE_HEADER => {}
        Some(h) => return Err(parse_err(1, format!("unexpected header {h:?}"))),
        None => return Err(parse_err(1, "empty file".into())),
    }
    let mut records = Vec::new();
    let mut any_intensity = false;
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(parse_err(row, format!("expected 7 columns, found {}", cols.len())));
        }
        fn field<T: std::str::FromStr>(cols: &[&str], i: usize, name: &str) -> std::result::Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            cols[i].trim().parse().map_err(|e| format!("{name}: {e}"))
        }
        let rec = (|| -> std::result::Result<TraceRecord, String> {
            let best_intensity = if cols[2].trim().is_empty() {
                f64::NAN
            } else {
                field(&cols, 2, "best_intensity")?
            };
            let model_time = match cols[6].trim() {
                "" => None,
                t => Some(parse_scaled(t, 1000)?),
            };
            Ok(TraceRecord {
                iteration: field(&cols, 0, "iteration")?,
                best_digitized: field(&cols, 1, "best_digitized")?,
                best_intensity,
                enhancement: field(&cols, 3, "enhancement")?,
                mutation_rate_num: field(&cols, 4, "mutation_rate_num")?,
                cum_measurements: field(&cols, 5, "cum_measurements")?,
                model_time,
            })
        })()
        .map_err(|m| parse_err(row, m))?;
        let expected = records.len() as u64 + 1;
        if rec.iteration != expected {
            return Err(parse_err(row, format!("iteration {} where {expected} expected", rec.iteration)));
        }
        if !rec.enhancement.is_finite() || rec.enhancement < 0.0 {
            return Err(parse_err(row, format!("enhancement {} is not a finite nonnegative value", rec.enhancement)));
        }
        any_intensity |= !rec.best_intensity.is_nan();
        records.push(rec);
    }
    if records.is_empty() {
        return Err(parse_err(2, "trace has no iterations".into()));
    }
    let baseline = records
        .iter()
        .find(|r| r.enhancement > 0.0 && r.best_intensity > 0.0)
        .map_or(1.0, |r| r.best_intensity / r.enhancement);
    Ok(RunTrace {
        initial: None,
        records,
        baseline,
        n_g: None,
        enhancement_source: if any_intensity {
            EnhancementSource::Intensity
        } else {
            EnhancementSource::Digitized
        },
    })
}

pub fn micros(d: Duration) -> f64 {
    d.as_nanos() as f64 / 1e3
}

/// One named curve of (x, y) points.
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Minimal SVG line chart with axis labels and a legend.
pub fn svg_line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 400.0, 60.0, 20.0, 30.0, 45.0);
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts.filter(|p| p.0.is_finite() && p.1.is_finite()) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    y0 = y0.min(0.0);
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{ml},{mt} V{} H{}" fill="none" stroke="black"/>"#,
        h - mb,
        w - mr
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, px(fx), h - mb + 15.0, tick(fx));
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, ml - 5.0, py(fy) + 4.0, tick(fy));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (ml + w - mr) / 2.0, h - 8.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{0}" text-anchor="middle" transform="rotate(-90 14 {0})">{1}</text>"#,
        (mt + h - mb) / 2.0,
        escape(y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for &(x, y) in ser.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let _ = write!(d, "{}{:.2},{:.2}", if d.is_empty() { "M" } else { " L" }, px(x), py(y));
        }
        let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        let ly = mt + 10.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{2}" y="{3}">{4}</text>"#,
            w - mr - 120.0,
            w - mr - 100.0,
            w - mr - 95.0,
            ly + 4.0,
            escape(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.trunc() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tests::trace_from;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = trace_from(&[1.5, 0.1 + 0.2, 1e-300, 123456.789]);
        t.records[1].model_time = Some(Duration::from_nanos(7_376_001));
        let text = trace_to_csv(&t);
        let back = trace_from_csv(&text, "t.csv").unwrap();
        assert_eq!(back.records, t.records);
        assert_eq!(trace_to_csv(&back), text);
    }

    #[test]
    fn model_time_column_is_microseconds() {
        let mut t = trace_from(&[1.0]);
        t.records[0].model_time = Some(Duration::from_micros(8043));
        assert!(trace_to_csv(&t).ends_with(",8043\n"));
    }

    #[test]
    fn parse_errors_name_the_row() {
        let good = trace_to_csv(&trace_from(&[1.0, 2.0, 3.0]));
        let bad = good.replacen(",2,", ",x,", 1);
        match trace_from_csv(&bad, "t.csv").unwrap_err() {
            Error::Parse { row, .. } => assert_eq!(row, 3),
            e => panic!("{e}"),
        }
        let gap: String = good.lines().enumerate().filter(|(i, _)| *i != 2).map(|(_, l)| format!("{l}\n")).collect();
        assert!(matches!(trace_from_csv(&gap, "t").unwrap_err(), Error::Parse { row: 3, .. }));
        assert!(trace_from_csv("a,b\n", "t").is_err());
        assert!(trace_from_csv(&format!("{TRACE_HEADER}\n"), "t").is_err());
        let short = good.replacen(",1,", ",", 1);
        assert!(trace_from_csv(&short, "t").is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b/x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn svg_has_one_path_per_series() {
        let s = svg_line_plot(
            "t<1>",
            "k",
            "ζ",
            &[
                Series { name: "a".into(), points: vec![(1.0, 1.0), (2.0, 3.0)] },
                Series { name: "b".into(), points: vec![(1.0, 2.0)] },
            ],
        );
        assert!(s.starts_with("<svg"));
        assert_eq!(s.matches("stroke-width=\"1.5\"").count(), 2);
        assert!(s.contains("t&lt;1&gt;"));
    }
}
