//! Flag value parsers.

use std::f64::consts::PI;

/// A comma-separated flag value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct List<T>(pub Vec<T>);

/// Parses radians (`0.3`), pi literals (`pi`, `-pi/2`, `3pi/4`, `3*pi/4`,
/// `0.5pi`) or degrees (`10deg`, `10°`).
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = t.to_ascii_lowercase();
    if let Some(d) = lower.strip_suffix("deg").or_else(|| lower.strip_suffix('°')) {
        return Ok(parse_finite(d)?.to_radians());
    }
    let Some(pos) = lower.find("pi") else {
        return parse_finite(&t);
    };
    let head = lower[..pos].trim_end_matches('*');
    let tail = &lower[pos + 2..];
    let coef = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => parse_finite(h)?,
    };
    let den = match tail {
        "" => 1.0,
        d => match d.strip_prefix('/') {
            Some(d) => parse_finite(d)?,
            None => return Err(format!("cannot parse angle {s:?}")),
        },
    };
    if den == 0.0 {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(coef * PI / den)
}

fn parse_finite(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("{s:?} is not a finite number")),
    }
}

/// Comma-separated angles; the empty string is the empty list.
pub fn parse_angle_list(s: &str) -> Result<List<f64>, String> {
    split_list(s).map(parse_angle).collect::<Result<_, _>>().map(List)
}

/// Comma-separated numbers; the empty string is the empty list.
pub fn parse_number_list(s: &str) -> Result<List<f64>, String> {
    split_list(s).map(parse_finite).collect::<Result<_, _>>().map(List)
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty())
}

/// `NXxNYxNT`, e.g. `64x64x16`.
pub fn parse_size(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    if parts.len() != 3 {
        return Err(format!("size {s:?} is not NXxNYxNT"));
    }
    let dim = |p: &str| {
        p.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad dimension {p:?} in {s:?}"))
    };
    Ok((dim(parts[0])?, dim(parts[1])?, dim(parts[2])?))
}

/// Frame indices: `0,3,5-8` (ranges inclusive).
pub fn parse_frames(s: &str) -> Result<List<usize>, String> {
    let mut out = Vec::new();
    for part in split_list(s) {
        let idx = |p: &str| p.trim().parse::<usize>().map_err(|_| format!("bad frame index {p:?}"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (idx(a)?, idx(b)?);
                if a > b {
                    return Err(format!("descending frame range {part:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(idx(part)?),
        }
    }
    if out.is_empty() {
        return Err("empty frame list".to_string());
    }
    Ok(List(out))
}
