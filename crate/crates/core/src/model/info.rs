use crate::error::{Error, Result};

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("lengths {} and {} differ", a.len(), b.len())));
    }
    Ok(())
}

/// Total variation distance, half the l1 distance.
pub fn tv_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    Ok(tv_unchecked(a, b))
}

pub(crate) fn tv_unchecked(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// KL(a || b) in nats. Returns +inf when a puts mass where b has none.
pub fn kl_divergence(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    let mut total = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        if x > 0.0 {
            if y <= 0.0 {
                return Ok(f64::INFINITY);
            }
            total += x * (x / y).ln();
        }
    }
    // Rounding can leave a tiny negative value when a == b up to fp noise.
    Ok(total.max(0.0))
}
