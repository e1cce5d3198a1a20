//! Text interchange formats: scalar-field CSV, diagram CSV, stable-diagram
//! CSV, and the vine debug dump.
//!
//! All numeric output goes through a fixed 9-significant-digit formatter so
//! repeated runs produce byte-identical files. Readers report the offending
//! line number on malformed input.

use serde::Serialize;
use thiserror::Error;

use crate::field::{FiltrationKind, ScalarField, ValueRange};
use crate::persistence::{Degree, PersistenceDiagram, PersistencePoint};
use crate::vineyard::{StableDiagram, StablePoint, Vine};

pub const DIAGRAM_CSV_HEADER: &str = "degree,birth,death,essential,scale,filtration";
pub const STABLE_CSV_HEADER: &str = "degree,birth,death,sigma,medial_scale,vine_id,filtration";

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing header line")]
    MissingHeader,
}

impl ReadError {
    fn at(line: usize, message: impl Into<String>) -> ReadError {
        ReadError::Malformed {
            line,
            message: message.into(),
        }
    }
}

/// Formats with exactly nine significant digits.
///
/// Values whose decimal exponent fits in [-4, 8] print in plain decimal,
/// anything smaller or larger falls back to scientific notation.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    let negative = x < 0.0;
    let magnitude = x.abs();
    let sci = format!("{:.8e}", magnitude);
    let (mantissa_text, exp_text) = sci.split_once('e').expect("e-format always has an exponent");
    let exponent: i32 = exp_text.parse().expect("exponent is an integer");
    let digits: String = mantissa_text.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 9);

    let body = if (-4..=8).contains(&exponent) {
        if exponent == 8 {
            digits
        } else if exponent >= 0 {
            let split = exponent as usize + 1;
            format!("{}.{}", &digits[..split], &digits[split..])
        } else {
            let zeros = "0".repeat((-exponent - 1) as usize);
            format!("0.{zeros}{digits}")
        }
    } else {
        format!("{}.{}e{}", &digits[..1], &digits[1..], exponent)
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Scalar-field CSV: `width,height` on the first line, then one row of
/// values per image row.
pub fn write_field_csv(field: &ScalarField) -> String {
    let mut out = String::new();
    out.push_str(&format!("{},{}\n", field.width(), field.height()));
    for row in 0..field.height() {
        let cells: Vec<String> = (0..field.width())
            .map(|col| fmt_sig9(field.get(row, col)))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn read_field_csv(text: &str) -> Result<ScalarField, ReadError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ReadError::MissingHeader)?;
    let (w_text, h_text) = header
        .split_once(',')
        .ok_or_else(|| ReadError::at(1, "expected `width,height`"))?;
    let width: usize = w_text
        .trim()
        .parse()
        .map_err(|_| ReadError::at(1, format!("bad width {w_text:?}")))?;
    let height: usize = h_text
        .trim()
        .parse()
        .map_err(|_| ReadError::at(1, format!("bad height {h_text:?}")))?;

    let mut values = Vec::with_capacity(width * height);
    let mut rows = 0usize;
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| ReadError::at(idx + 1, format!("bad value {cell:?}")))
            })
            .collect::<Result<_, _>>()?;
        if row.len() != width {
            return Err(ReadError::at(
                idx + 1,
                format!("expected {width} values, found {}", row.len()),
            ));
        }
        values.extend(row);
        rows += 1;
    }
    if rows != height {
        return Err(ReadError::at(
            rows + 1,
            format!("expected {height} rows, found {rows}"),
        ));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = if lo >= 0.0 && hi <= 1.0 {
        ValueRange::UNIT
    } else {
        ValueRange { lo, hi }
    };
    ScalarField::new(width, height, values, range)
        .map_err(|e| ReadError::at(1, e.to_string()))
}

/// Value as it will be read back from its 9-digit rendering.
fn quantize(x: f64) -> f64 {
    fmt_sig9(x).parse().expect("formatter output parses")
}

/// Diagram CSV in canonical row order.
///
/// Rows sort by the quantized values they actually display, so a file read
/// back and re-written reproduces itself byte for byte even when two points
/// differ only beyond the ninth significant digit.
pub fn write_diagram_csv(pd: &PersistenceDiagram) -> String {
    let mut points = pd.points.clone();
    points.sort_by(|a, b| {
        a.degree
            .cmp(&b.degree)
            .then(quantize(b.birth).total_cmp(&quantize(a.birth)))
            .then(quantize(b.death).total_cmp(&quantize(a.death)))
            .then(b.essential.cmp(&a.essential))
    });
    let mut out = String::from(DIAGRAM_CSV_HEADER);
    out.push('\n');
    for p in &points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.degree,
            fmt_sig9(p.birth),
            fmt_sig9(p.death),
            p.essential,
            pd.scale_index,
            pd.filtration
        ));
    }
    out
}

pub fn read_diagram_csv(text: &str) -> Result<PersistenceDiagram, ReadError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ReadError::MissingHeader)?;
    if header.trim() != DIAGRAM_CSV_HEADER {
        return Err(ReadError::at(1, format!("unexpected header {header:?}")));
    }

    let mut points = Vec::new();
    let mut scale: Option<u32> = None;
    let mut filtration: Option<FiltrationKind> = None;
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 6 {
            return Err(ReadError::at(
                line_no,
                format!("expected 6 columns, found {}", cells.len()),
            ));
        }
        let degree = cells[0]
            .trim()
            .parse::<u8>()
            .ok()
            .and_then(Degree::from_u8)
            .ok_or_else(|| ReadError::at(line_no, format!("bad degree {:?}", cells[0])))?;
        let birth = parse_float(cells[1], line_no, "birth")?;
        let death = parse_float(cells[2], line_no, "death")?;
        if birth < death {
            return Err(ReadError::at(
                line_no,
                format!("birth {birth} below death {death}"),
            ));
        }
        let essential = parse_bool(cells[3], line_no)?;
        let row_scale = cells[4]
            .trim()
            .parse::<u32>()
            .map_err(|_| ReadError::at(line_no, format!("bad scale {:?}", cells[4])))?;
        let row_filtration = FiltrationKind::parse(cells[5].trim())
            .ok_or_else(|| ReadError::at(line_no, format!("bad filtration {:?}", cells[5])))?;

        match scale {
            None => scale = Some(row_scale),
            Some(s) if s != row_scale => {
                return Err(ReadError::at(
                    line_no,
                    format!("mixed scales {s} and {row_scale} in one diagram"),
                ));
            }
            _ => {}
        }
        match filtration {
            None => filtration = Some(row_filtration),
            Some(f) if f != row_filtration => {
                return Err(ReadError::at(line_no, "mixed filtrations in one diagram"));
            }
            _ => {}
        }
        points.push(PersistencePoint {
            degree,
            birth,
            death,
            essential,
        });
    }
    Ok(PersistenceDiagram::new(
        points,
        scale.unwrap_or(1),
        filtration.unwrap_or(FiltrationKind::Intensity),
    ))
}

/// Stable-diagram CSV sorted by (degree, stability desc, birth desc),
/// comparing the quantized values the file will show.
pub fn write_stable_csv(stable: &StableDiagram) -> String {
    let mut points: Vec<&StablePoint> = stable.points.iter().collect();
    points.sort_by(|a, b| {
        a.point
            .degree
            .cmp(&b.point.degree)
            .then(quantize(b.stability).total_cmp(&quantize(a.stability)))
            .then(quantize(b.point.birth).total_cmp(&quantize(a.point.birth)))
            .then(a.vine_id.cmp(&b.vine_id))
    });
    let mut out = String::from(STABLE_CSV_HEADER);
    out.push('\n');
    for sp in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            sp.point.degree,
            fmt_sig9(sp.point.birth),
            fmt_sig9(sp.point.death),
            fmt_sig9(sp.stability),
            sp.medial_scale,
            sp.vine_id,
            stable.filtration
        ));
    }
    out
}

pub fn read_stable_csv(text: &str) -> Result<StableDiagram, ReadError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ReadError::MissingHeader)?;
    if header.trim() != STABLE_CSV_HEADER {
        return Err(ReadError::at(1, format!("unexpected header {header:?}")));
    }
    let mut points = Vec::new();
    let mut filtration: Option<FiltrationKind> = None;
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 7 {
            return Err(ReadError::at(
                line_no,
                format!("expected 7 columns, found {}", cells.len()),
            ));
        }
        let degree = cells[0]
            .trim()
            .parse::<u8>()
            .ok()
            .and_then(Degree::from_u8)
            .ok_or_else(|| ReadError::at(line_no, format!("bad degree {:?}", cells[0])))?;
        let birth = parse_float(cells[1], line_no, "birth")?;
        let death = parse_float(cells[2], line_no, "death")?;
        let stability = parse_float(cells[3], line_no, "sigma")?;
        let medial_scale = cells[4]
            .trim()
            .parse::<u32>()
            .map_err(|_| ReadError::at(line_no, format!("bad medial_scale {:?}", cells[4])))?;
        let vine_id = cells[5]
            .trim()
            .parse::<u32>()
            .map_err(|_| ReadError::at(line_no, format!("bad vine_id {:?}", cells[5])))?;
        let row_filtration = FiltrationKind::parse(cells[6].trim())
            .ok_or_else(|| ReadError::at(line_no, format!("bad filtration {:?}", cells[6])))?;
        match filtration {
            None => filtration = Some(row_filtration),
            Some(f) if f != row_filtration => {
                return Err(ReadError::at(line_no, "mixed filtrations in one diagram"));
            }
            _ => {}
        }
        points.push(StablePoint {
            point: PersistencePoint {
                degree,
                birth,
                death,
                essential: false,
            },
            stability,
            medial_scale,
            vine_id,
        });
    }
    Ok(StableDiagram {
        points,
        filtration: filtration.unwrap_or(FiltrationKind::Intensity),
    })
}

#[derive(Serialize)]
struct VineRecord {
    degree: u8,
    birth_scale: u32,
    death_scale: u32,
    sigma: f64,
    segments: Vec<(u32, f64, f64, f64, f64, f64)>,
}

/// Debug dump: one JSON object per vine, segments as
/// `[scale_from, b_from, d_from, b_to, d_to, distance]`.
pub fn write_vines_json(vines: &[Vine]) -> String {
    let records: Vec<VineRecord> = vines
        .iter()
        .map(|vine| VineRecord {
            degree: vine.degree.as_u8(),
            birth_scale: vine.birth_scale,
            death_scale: vine.death_scale,
            sigma: vine.stability(),
            segments: vine
                .segments
                .iter()
                .map(|s| {
                    (
                        s.scale_from,
                        s.point_from.birth,
                        s.point_from.death,
                        s.point_to.birth,
                        s.point_to.death,
                        s.distance,
                    )
                })
                .collect(),
        })
        .collect();
    serde_json::to_string_pretty(&records).expect("vine records always serialize")
}

fn parse_float(cell: &str, line: usize, what: &str) -> Result<f64, ReadError> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| ReadError::at(line, format!("bad {what} {cell:?}")))?;
    if !v.is_finite() {
        return Err(ReadError::at(line, format!("non-finite {what} {cell:?}")));
    }
    Ok(v)
}

fn parse_bool(cell: &str, line: usize) -> Result<bool, ReadError> {
    match cell.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(ReadError::at(line, format!("bad flag {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::compute_pd;

    #[test]
    fn formatter_pins_nine_significant_digits() {
        assert_eq!(fmt_sig9(0.0), "0.00000000");
        assert_eq!(fmt_sig9(1.0), "1.00000000");
        assert_eq!(fmt_sig9(0.5), "0.500000000");
        assert_eq!(fmt_sig9(60.0 / 255.0), "0.235294118");
        assert_eq!(fmt_sig9(-0.25), "-0.250000000");
        assert_eq!(fmt_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig9(123.456), "123.456000");
        assert_eq!(fmt_sig9(0.00012), "0.000120000000");
        assert_eq!(fmt_sig9(0.000012), "1.20000000e-5");
        assert_eq!(fmt_sig9(2.5e12), "2.50000000e12");
    }

    #[test]
    fn formatter_rounds_the_ninth_digit() {
        assert_eq!(fmt_sig9(2.0 / 3.0), "0.666666667");
        assert_eq!(fmt_sig9(0.9999999999), "1.00000000");
    }

    #[test]
    fn field_csv_round_trips() {
        let field = ScalarField::new(
            3,
            2,
            vec![0.0, 0.5, 1.0, 0.25, 0.125, 0.75],
            ValueRange::UNIT,
        )
        .unwrap();
        let text = write_field_csv(&field);
        assert_eq!(
            text,
            "3,2\n0.00000000,0.500000000,1.00000000\n0.250000000,0.125000000,0.750000000\n"
        );
        let back = read_field_csv(&text).unwrap();
        assert_eq!(back, field);
    }

    #[test]
    fn field_csv_reports_bad_rows() {
        let err = read_field_csv("2,1\n0.5,oops\n").unwrap_err();
        assert!(matches!(err, ReadError::Malformed { line: 2, .. }));
    }

    #[test]
    fn diagram_csv_round_trips_and_orders_rows() {
        let field = ScalarField::new(
            3,
            1,
            vec![0.8, 0.2, 0.8],
            ValueRange::UNIT,
        )
        .unwrap();
        let pd = compute_pd(&field, 2, FiltrationKind::Gradient);
        let text = write_diagram_csv(&pd);
        let expected = "degree,birth,death,essential,scale,filtration\n\
                        0,0.800000000,0.200000000,true,2,gradient\n\
                        0,0.800000000,0.200000000,false,2,gradient\n";
        assert_eq!(text, expected);
        let back = read_diagram_csv(&text).unwrap();
        assert_eq!(back, pd);
    }

    #[test]
    fn diagram_csv_rejects_malformed_lines() {
        let text = "degree,birth,death,essential,scale,filtration\n0,0.5,0.1,maybe,1,intensity\n";
        let err = read_diagram_csv(text).unwrap_err();
        assert!(matches!(err, ReadError::Malformed { line: 2, .. }));

        let text = "degree,birth,death,essential,scale,filtration\n7,0.5,0.1,true,1,intensity\n";
        assert!(read_diagram_csv(text).is_err());
    }

    #[test]
    fn stable_csv_round_trips() {
        let stable = StableDiagram {
            points: vec![
                StablePoint {
                    point: PersistencePoint::new(Degree::One, 0.5, 0.25, false),
                    stability: 0.875,
                    medial_scale: 2,
                    vine_id: 3,
                },
                StablePoint {
                    point: PersistencePoint::new(Degree::Zero, 0.75, 0.0, false),
                    stability: 0.9,
                    medial_scale: 2,
                    vine_id: 0,
                },
            ],
            filtration: FiltrationKind::Intensity,
        };
        let text = write_stable_csv(&stable);
        let expected = "degree,birth,death,sigma,medial_scale,vine_id,filtration\n\
                        0,0.750000000,0.00000000,0.900000000,2,0,intensity\n\
                        1,0.500000000,0.250000000,0.875000000,2,3,intensity\n";
        assert_eq!(text, expected);
        let back = read_stable_csv(&text).unwrap();
        assert_eq!(back.points.len(), 2);
        assert_eq!(back.points[0].vine_id, 0);
        assert_eq!(back.points[1].point.degree, Degree::One);
    }

    #[test]
    fn vine_json_lists_segments_as_arrays() {
        use crate::vineyard::VineSegment;
        let vine = Vine {
            degree: Degree::Zero,
            segments: vec![VineSegment {
                scale_from: 1,
                point_from: PersistencePoint::new(Degree::Zero, 0.9, 0.0, false),
                point_to: PersistencePoint::new(Degree::Zero, 0.8, 0.05, false),
                distance: 0.1118033988749895,
                pers_from: 0.9,
                pers_to: 0.75,
            }],
            birth_scale: 1,
            death_scale: 3,
        };
        let text = write_vines_json(&[vine]);
        assert!(text.contains("\"birth_scale\": 1"));
        assert!(text.contains("[\n        1,\n        0.9,\n        0.0,\n        0.8,\n        0.05,"));
    }
}
