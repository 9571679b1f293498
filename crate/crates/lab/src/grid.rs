//! Value lists for sweeps: `a:b[:step]` ranges or comma-separated values.

/// Parses `"1:5"`, `"0.5:5:0.5"`, `"2"` or `"0.5,1,2"`. Ranges include both
/// ends; the default step is 1.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty value list".into());
    }
    let num = |t: &str| -> Result<f64, String> {
        let v: f64 = t
            .trim()
            .parse()
            .map_err(|_| format!("{:?} is not a number", t.trim()))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("{:?} is not finite", t.trim()))
        }
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let (a, b, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1.0),
            [a, b, st] => (num(a)?, num(b)?, num(st)?),
            _ => return Err(format!("range {s:?} must look like start:end or start:end:step")),
        };
        if step <= 0.0 {
            return Err(format!("range step must be positive, got {step}"));
        }
        if b < a {
            return Err(format!("range end {b} is below its start {a}"));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        if count > 10_000 {
            return Err(format!("range {s:?} has {count} values; the limit is 10000"));
        }
        Ok((0..count).map(|i| a + i as f64 * step).collect())
    } else {
        s.split(',').map(num).collect()
    }
}
