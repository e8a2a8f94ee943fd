use crate::{Error, Result};

/// Pearson correlation coefficient.
pub fn pcc(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() || y_true.len() < 2 {
        return Err(Error::Dimension(format!(
            "pcc needs two equal-length series of at least 2 values, got {} and {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    let n = y_true.len() as f64;
    let mt = y_true.iter().sum::<f64>() / n;
    let mp = y_pred.iter().sum::<f64>() / n;
    let (mut cov, mut vt, mut vp) = (0.0, 0.0, 0.0);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        cov += (t - mt) * (p - mp);
        vt += (t - mt) * (t - mt);
        vp += (p - mp) * (p - mp);
    }
    if vt == 0.0 {
        return Err(Error::UndefinedCorrelation("constant reference series".into()));
    }
    if vp == 0.0 {
        return Err(Error::UndefinedCorrelation("constant prediction series".into()));
    }
    Ok((cov / (vt * vp).sqrt()).clamp(-1.0, 1.0))
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Median of a non-empty slice (mean of the two central values for even length).
pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Population standard deviation.
pub fn std_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(pcc(&y, &y).unwrap(), 1.0);
        assert_eq!(pcc(&y, &[-1.0, -2.0, -3.0]).unwrap(), -1.0);
        let r = pcc(&y, &[1.0, 2.0, 4.0]).unwrap();
        // cov = 3, var_t = 2, var_p = 14/3 (sums of squares about the means)
        let expect = 3.0 / (2.0f64.sqrt() * (14.0f64 / 3.0).sqrt());
        assert!((r - expect).abs() < 1e-12);
        assert!((r - 0.982).abs() < 0.001);
        assert!(matches!(pcc(&[2.0, 2.0], &[1.0, 3.0]), Err(Error::UndefinedCorrelation(_))));
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
