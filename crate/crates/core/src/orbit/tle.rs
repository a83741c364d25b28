//! Two-line element set parsing and formatting.

use chrono::{DateTime, Duration, NaiveDate, Utc};
use thiserror::Error;

use super::OrbitalElements;

const TLE_LINE_LEN: usize = 69;
const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("TLE line {line}: {kind}")]
pub struct TleError {
    /// 1-based line number in the input text.
    pub line: usize,
    pub kind: TleErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TleErrorKind {
    #[error("expected {expected} characters, found {found}")]
    LineLength { expected: usize, found: usize },
    #[error("checksum mismatch: line says {stated}, computed {computed}")]
    Checksum { stated: u32, computed: u32 },
    #[error("field `{field}` is not numeric: {text:?}")]
    Field { field: &'static str, text: String },
    #[error("{0}")]
    Structure(String),
    #[error("{0}")]
    Elements(String),
}

/// Parses an ISO-8601 UTC timestamp used as the scenario's time origin.
pub fn parse_t0(text: &str) -> Result<DateTime<Utc>, chrono::ParseError> {
    DateTime::parse_from_rfc3339(text).map(|t| t.with_timezone(&Utc))
}

/// Parses every 2-line (or 3-line, with a name row) record in `text`.
///
/// Epochs are converted to seconds relative to `t0`; record order is preserved.
pub fn parse_tle(text: &str, t0: DateTime<Utc>) -> Result<Vec<OrbitalElements>, TleError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty())
        .collect();

    let mut out = Vec::new();
    let mut k = 0;
    while k < lines.len() {
        let (no, line) = lines[k];
        if !line.starts_with("1 ") {
            // Name row of a 3-line record.
            k += 1;
            if k >= lines.len() || !lines[k].1.starts_with("1 ") {
                return Err(TleError {
                    line: no,
                    kind: TleErrorKind::Structure("name row is not followed by line 1".into()),
                });
            }
            continue;
        }
        let Some(&(no2, line2)) = lines.get(k + 1) else {
            return Err(TleError {
                line: no,
                kind: TleErrorKind::Structure("line 1 is not followed by line 2".into()),
            });
        };
        out.push(parse_record(no, line, no2, line2, t0)?);
        k += 2;
    }
    Ok(out)
}

fn parse_record(
    no1: usize,
    line1: &str,
    no2: usize,
    line2: &str,
    t0: DateTime<Utc>,
) -> Result<OrbitalElements, TleError> {
    check_line(no1, line1, '1')?;
    check_line(no2, line2, '2')?;

    let sat1: u32 = field(no1, line1, 2, 7, "satellite number")?;
    let sat2: u32 = field(no2, line2, 2, 7, "satellite number")?;
    if sat1 != sat2 {
        return Err(TleError {
            line: no2,
            kind: TleErrorKind::Structure(format!(
                "satellite number {sat2} does not match line 1 ({sat1})"
            )),
        });
    }

    let year: i32 = field(no1, line1, 18, 20, "epoch year")?;
    let day: f64 = field(no1, line1, 20, 32, "epoch day")?;
    let year = if year < 57 { 2000 + year } else { 1900 + year };
    let epoch = tle_epoch(year, day).ok_or_else(|| TleError {
        line: no1,
        kind: TleErrorKind::Field {
            field: "epoch day",
            text: line1[20..32].to_string(),
        },
    })?;
    let epoch_offset = (epoch - t0)
        .num_nanoseconds()
        .map(|ns| ns as f64 * 1e-9)
        .ok_or_else(|| TleError {
            line: no1,
            kind: TleErrorKind::Structure("epoch too far from T0".into()),
        })?;

    let inclination: f64 = field(no2, line2, 8, 16, "inclination")?;
    let raan: f64 = field(no2, line2, 17, 25, "right ascension")?;
    let ecc_digits = &line2[26..33];
    if !ecc_digits.trim().chars().all(|c| c.is_ascii_digit()) {
        return Err(TleError {
            line: no2,
            kind: TleErrorKind::Field {
                field: "eccentricity",
                text: ecc_digits.to_string(),
            },
        });
    }
    let eccentricity: f64 = format!("0.{}", ecc_digits.trim())
        .parse()
        .map_err(|_| TleError {
            line: no2,
            kind: TleErrorKind::Field {
                field: "eccentricity",
                text: ecc_digits.to_string(),
            },
        })?;
    let arg_perigee: f64 = field(no2, line2, 34, 42, "argument of perigee")?;
    let mean_anomaly: f64 = field(no2, line2, 43, 51, "mean anomaly")?;
    let revs_per_day: f64 = field(no2, line2, 52, 63, "mean motion")?;

    let mean_motion = revs_per_day * std::f64::consts::TAU / SECONDS_PER_DAY;
    OrbitalElements::from_mean_motion(
        sat1,
        mean_motion,
        eccentricity,
        inclination.to_radians(),
        raan.to_radians(),
        arg_perigee.to_radians(),
        mean_anomaly.to_radians(),
        epoch_offset,
    )
    .map_err(|e| TleError {
        line: no2,
        kind: TleErrorKind::Elements(e.to_string()),
    })
}

fn check_line(no: usize, line: &str, expected_tag: char) -> Result<(), TleError> {
    if !line.is_ascii() || line.len() != TLE_LINE_LEN {
        return Err(TleError {
            line: no,
            kind: TleErrorKind::LineLength {
                expected: TLE_LINE_LEN,
                found: line.chars().count(),
            },
        });
    }
    if !line.starts_with(expected_tag) {
        return Err(TleError {
            line: no,
            kind: TleErrorKind::Structure(format!("expected line {expected_tag}")),
        });
    }
    let stated = line[68..69]
        .chars()
        .next()
        .and_then(|c| c.to_digit(10))
        .ok_or_else(|| TleError {
            line: no,
            kind: TleErrorKind::Field {
                field: "checksum",
                text: line[68..69].to_string(),
            },
        })?;
    let computed = checksum(&line[..68]);
    if stated != computed {
        return Err(TleError {
            line: no,
            kind: TleErrorKind::Checksum { stated, computed },
        });
    }
    Ok(())
}

/// Modulo-10 checksum: digits count at face value, each '-' counts as 1.
fn checksum(body: &str) -> u32 {
    body.chars()
        .map(|c| match c {
            '-' => 1,
            c => c.to_digit(10).unwrap_or(0),
        })
        .sum::<u32>()
        % 10
}

fn field<T: std::str::FromStr>(
    no: usize,
    line: &str,
    start: usize,
    end: usize,
    name: &'static str,
) -> Result<T, TleError> {
    let text = &line[start..end];
    text.trim().parse().map_err(|_| TleError {
        line: no,
        kind: TleErrorKind::Field {
            field: name,
            text: text.to_string(),
        },
    })
}

fn tle_epoch(year: i32, day_of_year: f64) -> Option<DateTime<Utc>> {
    if !(1.0..367.0).contains(&day_of_year) {
        return None;
    }
    let jan1 = NaiveDate::from_ymd_opt(year, 1, 1)?
        .and_hms_opt(0, 0, 0)?
        .and_utc();
    let nanos = ((day_of_year - 1.0) * SECONDS_PER_DAY * 1e9).round() as i64;
    Some(jan1 + Duration::nanoseconds(nanos))
}

/// Formats elements as a standard two-line element set (zero drag terms).
pub fn format_tle(el: &OrbitalElements, t0: DateTime<Utc>, designator: &str) -> (String, String) {
    let epoch = t0 + Duration::nanoseconds((el.epoch * 1e9).round() as i64);
    let year = epoch.format("%y").to_string();
    let jan1 =
        NaiveDate::from_ymd_opt(epoch.format("%Y").to_string().parse().unwrap_or(2000), 1, 1)
            .and_then(|d| d.and_hms_opt(0, 0, 0))
            .map(|d| d.and_utc())
            .unwrap_or(epoch);
    let day = 1.0 + (epoch - jan1).num_nanoseconds().unwrap_or(0) as f64 * 1e-9 / SECONDS_PER_DAY;

    let body1 = format!(
        "1 {:05}U {:<8} {}{:012.8}  .00000000  00000-0  00000-0 0  999",
        el.sat_id % 100_000,
        designator,
        year,
        day
    );
    let ecc = format!("{:.7}", el.eccentricity);
    let ecc_digits = ecc.trim_start_matches("0.");
    let revs_per_day = el.mean_motion * SECONDS_PER_DAY / std::f64::consts::TAU;
    let body2 = format!(
        "2 {:05} {:8.4} {:8.4} {} {:8.4} {:8.4} {:11.8}{:5}",
        el.sat_id % 100_000,
        wrap_degrees(el.inclination.to_degrees()),
        wrap_degrees(el.raan.to_degrees()),
        ecc_digits,
        wrap_degrees(el.arg_perigee.to_degrees()),
        wrap_degrees(el.mean_anomaly_at_epoch.to_degrees()),
        revs_per_day,
        1
    );
    let line1 = format!("{body1}{}", checksum(&body1));
    let line2 = format!("{body2}{}", checksum(&body2));
    (line1, line2)
}

fn wrap_degrees(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    // Avoid printing 360.0000 after rounding.
    if w >= 359.99995 {
        0.0
    } else {
        w
    }
}
