use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-6;

/// Mean negative log-probability of the target ids. Positions whose target
/// equals `pad` are left out of the mean.
pub fn cross_entropy(dists: &[Vec<f64>], targets: &[u32], pad: Option<u32>) -> Result<f64> {
    if dists.len() != targets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} distributions for {} targets",
            dists.len(),
            targets.len()
        )));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (position, (p, &t)) in dists.iter().zip(targets).enumerate() {
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL || p.iter().any(|&x| x < 0.0) {
            return Err(Error::ProbabilityNotNormalized { position, sum });
        }
        if Some(t) == pad {
            continue;
        }
        let prob = *p.get(t as usize).ok_or_else(|| {
            Error::ShapeMismatch(format!("target {t} outside a {}-way distribution", p.len()))
        })?;
        total -= prob.ln();
        count += 1;
    }
    Ok(if count == 0 { 0.0 } else { total / count as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certain_prediction_costs_nothing() {
        assert_eq!(cross_entropy(&[vec![0.0, 1.0, 0.0]], &[1], None).unwrap(), 0.0);
    }

    #[test]
    fn uniform_costs_log_vocab() {
        let v = 7;
        let loss = cross_entropy(&[vec![1.0 / v as f64; v]], &[3], None).unwrap();
        assert!((loss - (v as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn quarter_probability() {
        let loss = cross_entropy(&[vec![0.5, 0.25, 0.25]], &[1], None).unwrap();
        assert!((loss - 4f64.ln()).abs() < 1e-12);
        assert!((loss - 1.3863).abs() < 1e-4);
    }

    #[test]
    fn padding_is_excluded() {
        let d = vec![vec![0.5, 0.5], vec![0.25, 0.75]];
        let loss = cross_entropy(&d, &[0, 1], Some(0)).unwrap();
        assert!((loss - (-(0.75f64).ln())).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_is_rejected() {
        let err = cross_entropy(&[vec![0.5, 0.6]], &[0], None).unwrap_err();
        assert!(matches!(err, Error::ProbabilityNotNormalized { position: 0, .. }));
    }
}
