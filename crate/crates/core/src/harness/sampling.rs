use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::inference::Copies;
use crate::qcore::random::Rng;

/// Relative frequencies (and counts) of N categorical draws from `p`, drawn as a
/// chain of conditional binomials. N = ∞ returns `p` itself and no counts.
pub fn multinomial_sample(p: &[f64], copies: Copies, rng: &mut Rng) -> Result<(Vec<f64>, Option<Vec<u64>>)> {
    let s: f64 = p.iter().sum();
    if p.is_empty() || (s - 1.0).abs() > 1e-9 || p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidProbabilities(format!("distribution sums to {s}")));
    }
    let n = match copies {
        Copies::Infinite => return Ok((p.iter().map(|x| x / s).collect(), None)),
        Copies::Finite(n) => n,
    };
    let mut counts = vec![0u64; p.len()];
    let mut left = n;
    let mut mass = 1.0f64;
    for (i, &pi) in p.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == p.len() {
            counts[i] = left;
            break;
        }
        let q = if mass > 0.0 { (pi / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(left, q).map_err(|e| Error::InvalidProbabilities(e.to_string()))?.sample(rng);
        counts[i] = k;
        left -= k;
        mass -= pi;
    }
    let freq = counts.iter().map(|&k| k as f64 / n as f64).collect();
    Ok((freq, Some(counts)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::rng_from_seed;

    #[test]
    fn noiseless_and_degenerate() {
        let mut rng = rng_from_seed(0);
        let p = [0.2, 0.3, 0.5];
        assert_eq!(multinomial_sample(&p, Copies::Infinite, &mut rng).unwrap().0, p.to_vec());
        let (f, c) = multinomial_sample(&[1.0, 0.0], Copies::Finite(100), &mut rng).unwrap();
        assert_eq!(f, vec![1.0, 0.0]);
        assert_eq!(c.unwrap(), vec![100, 0]);
        assert!(multinomial_sample(&[0.5, 0.6], Copies::Finite(10), &mut rng).is_err());
    }

    #[test]
    fn binomial_spread() {
        let mut rng = rng_from_seed(12);
        let n = 10_000u64;
        let reps = 100;
        let xs: Vec<f64> =
            (0..reps).map(|_| multinomial_sample(&[0.5, 0.5], Copies::Finite(n), &mut rng).unwrap().0[0]).collect();
        let mean = xs.iter().sum::<f64>() / reps as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
        let expect = (0.25 / n as f64).sqrt();
        // sampling error of a standard deviation estimate over 100 reps is about 7%
        assert!((sd - expect).abs() < 3.0 * expect / (2.0 * (reps as f64 - 1.0)).sqrt(), "{sd} {expect}");
    }
}
