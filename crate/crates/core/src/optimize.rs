use crate::error::Result;

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping once the
/// bracket is shorter than `tol`. Returns the abscissa and value.
pub(crate) fn golden_section<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let (x, y) = golden_section(|x| Ok((x - 0.3).powi(2)), -1.0, 1.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-9);
        assert!(y < 1e-18);
    }

    #[test]
    fn boundary_minimum() {
        let (x, _) = golden_section(|x| Ok(x), 0.0, 1.0, 1e-8).unwrap();
        assert!(x < 1e-7);
    }
}
