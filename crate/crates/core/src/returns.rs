//! Price adjustment, log returns and median binarisation.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Adjusted close `close · adj_factor / ret_factor`.
pub fn adjust_price(close: f64, adj_factor: f64, ret_factor: f64) -> Result<f64> {
    if !(close > 0.0 && adj_factor > 0.0 && ret_factor > 0.0) {
        return Err(Error::Domain("price and adjustment factors must be positive"));
    }
    Ok(close * adj_factor / ret_factor)
}

/// `ln(p_t / p_{t−1})` for consecutive prices.
pub fn log_returns(prices: &[f64]) -> Result<Vec<f64>> {
    if prices.len() < 2 {
        return Err(Error::Domain("log returns need at least two prices"));
    }
    if prices.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::Domain("prices must be positive and finite"));
    }
    Ok(prices.windows(2).map(|w| libm::log(w[1] / w[0])).collect())
}

/// Median of a non-empty slice; the midpoint of the central pair for even
/// lengths.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("median of NaN"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        let (a, b) = (sorted[n / 2 - 1], sorted[n / 2]);
        a + (b - a) / 2.0
    })
}

/// Output of median binarisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Binarised {
    /// 1 where the return is strictly above the median.
    pub bits: Vec<u8>,
    /// The median used as the threshold.
    pub median: f64,
    /// Ties at the median pushed the ones/zeros imbalance above one.
    pub degenerate: bool,
}

/// Maps each return to 1 if it is strictly above the series median, else 0.
pub fn binarise_median(returns: &[f64]) -> Result<Binarised> {
    if returns.len() < 2 {
        return Err(Error::Domain("binarisation needs at least two returns"));
    }
    let median = median(returns)?;
    let bits: Vec<u8> = returns.iter().map(|&r| u8::from(r > median)).collect();
    let ones = bits.iter().filter(|&&b| b == 1).count();
    let zeros = bits.len() - ones;
    Ok(Binarised {
        bits,
        median,
        degenerate: ones.abs_diff(zeros) > 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn adjust_examples() {
        assert_eq!(adjust_price(100.0, 1.0, 1.0).unwrap(), 100.0);
        assert_eq!(adjust_price(100.0, 2.0, 1.0).unwrap(), 200.0);
        assert_eq!(adjust_price(50.0, 1.0, 1.25).unwrap(), 40.0);
        assert!(adjust_price(0.0, 1.0, 1.0).is_err());
        assert!(adjust_price(1.0, -1.0, 1.0).is_err());
        assert!(adjust_price(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn log_return_examples() {
        let r = log_returns(&[1.0, core::f64::consts::E]).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-15);
        assert_eq!(log_returns(&[3.0; 5]).unwrap(), vec![0.0; 4]);
        let r = log_returns(&[100.0, 110.0]).unwrap();
        assert!((r[0] - 0.09531017980432493).abs() < 1e-15);
        assert!(log_returns(&[1.0]).is_err());
        assert!(log_returns(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn binarise_examples() {
        let b = binarise_median(&[0.1, -0.2, 0.3, 0.05]).unwrap();
        assert!((b.median - 0.075).abs() < 1e-15);
        assert_eq!(b.bits, vec![1, 0, 1, 0]);
        assert!(!b.degenerate);

        let c = binarise_median(&[0.02; 6]).unwrap();
        assert_eq!(c.bits, vec![0; 6]);
        assert!(c.degenerate);

        assert!(binarise_median(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn distinct_values_binarise_balanced(values in proptest::collection::btree_set(-1_000_000i64..1_000_000, 2..300)) {
            let returns: Vec<f64> = values.into_iter().map(|v| v as f64 * 1e-6).collect();
            let b = binarise_median(&returns).unwrap();
            let ones = b.bits.iter().filter(|&&x| x == 1).count();
            prop_assert!(ones.abs_diff(b.bits.len() - ones) <= 1);
            prop_assert!(!b.degenerate);
        }
    }
}
