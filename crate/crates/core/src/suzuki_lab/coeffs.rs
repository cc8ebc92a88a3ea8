//! Odd Taylor coefficients of tanh in exact arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `tanh(x) = Σ_{n≥1} t_n x^{2n−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TanhCoefficients {
    pub exact: Vec<BigRational>,
    pub values: Vec<f64>,
}

impl TanhCoefficients {
    pub fn new(n_max: usize) -> Self {
        let tangent = tangent_numbers(n_max);
        let mut exact = Vec::with_capacity(n_max);
        let mut fact = BigInt::one();
        for (n, t) in tangent.into_iter().enumerate() {
            let k = 2 * n + 1;
            if k > 1 {
                fact *= BigInt::from(k - 1) * BigInt::from(k);
            }
            let sign = if n % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            exact.push(BigRational::new(sign * t, fact.clone()));
        }
        let values = exact.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect();
        TanhCoefficients { exact, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Tangent numbers `T_1, T_3, …, T_{2n−1}` (1, 2, 16, 272, …) by the
/// Knuth–Buckholtz recurrence on integers.
pub fn tangent_numbers(n: usize) -> Vec<BigInt> {
    if n == 0 {
        return Vec::new();
    }
    let mut t: Vec<BigInt> = (0..=n)
        .map(|k| if k == 0 { BigInt::one() } else { BigInt::zero() })
        .collect();
    // t[k] holds the k-th entry of the running row; after pass k, t[k] = T_{2k+1}.
    t[0] = BigInt::zero();
    t[1] = BigInt::one();
    for k in 2..=n {
        t[k] = BigInt::from(k - 1) * &t[k - 1];
    }
    for k in 2..=n {
        for j in k..=n {
            t[j] = BigInt::from(j - k) * &t[j - 1] + BigInt::from(j - k + 2) * &t[j];
        }
    }
    t.into_iter().skip(1).collect()
}

/// Bernoulli numbers `B_0 … B_m` (with `B_1 = −1/2`) from
/// `Σ_{j<k+1} C(k+1, j) B_j = 0`.
pub fn bernoulli_numbers(m: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(m + 1);
    b.push(BigRational::one());
    for k in 1..=m {
        let mut s = BigRational::zero();
        let mut binom = BigInt::one();
        for (j, bj) in b.iter().enumerate() {
            s += BigRational::from_integer(binom.clone()) * bj;
            binom = binom * BigInt::from(k + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-s / BigRational::from_integer(BigInt::from(k + 1)));
    }
    b
}

/// `(−1)^{n−1} 2^{2n}(2^{2n} − 1) B_n / (2n)!` with the unsigned convention
/// `B_n = |B_{2n}|`.
pub fn tanh_coefficient_bernoulli(n: usize) -> BigRational {
    let b = bernoulli_numbers(2 * n);
    let bn = b[2 * n].abs();
    let p = BigInt::one() << (2 * n);
    let fact: BigInt = (1..=2 * n).map(BigInt::from).product();
    let sign = if n % 2 == 1 { BigInt::one() } else { -BigInt::one() };
    BigRational::from_integer(sign * &p * (&p - BigInt::one())) * bn / BigRational::from_integer(fact)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn known_values() {
        let t = TanhCoefficients::new(5);
        assert_eq!(t.exact, vec![q(1, 1), q(-1, 3), q(2, 15), q(-17, 315), q(62, 2835)]);
        let tn: Vec<i64> = tangent_numbers(5).iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(tn, vec![1, 2, 16, 272, 7936]);
    }

    #[test]
    fn bernoulli_form_agrees() {
        let t = TanhCoefficients::new(12);
        for n in 1..=12 {
            assert_eq!(tanh_coefficient_bernoulli(n), t.exact[n - 1], "n={n}");
        }
    }

    #[test]
    fn series_matches_tanh() {
        let t = TanhCoefficients::new(30);
        let x: f64 = 0.4;
        let s: f64 = t
            .values
            .iter()
            .enumerate()
            .map(|(n, c)| c * x.powi(2 * n as i32 + 1))
            .sum();
        assert!((s - x.tanh()).abs() < 1e-15);
    }
}
