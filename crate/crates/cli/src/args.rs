use basinkernel::Complex64;

/// Parses `re,im` or a bare real `re`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let part = |p: &str| {
        p.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("expected a finite number, got {p:?} in {s:?}"))
    };
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(part(re)?, part(im)?)),
        None => Ok(Complex64::new(part(s)?, 0.0)),
    }
}

/// Parses a family member as `n:re,im`.
pub fn parse_member(s: &str) -> Result<(u32, Complex64), String> {
    let (n, a) = s
        .split_once(':')
        .ok_or_else(|| format!("expected n:re,im, got {s:?}"))?;
    let n = n
        .trim()
        .parse()
        .map_err(|_| format!("bad family index in {s:?}"))?;
    Ok((n, parse_complex(a)?))
}
