//! Toeplitz hashing for privacy amplification.
//!
//! The `l x n` matrix `T` has `T[i][j] = seed[i - j + n - 1]`, so the
//! `n + l - 1` seed bits fill its diagonals. The family is exactly
//! 2-universal: for `x != x'` a uniform seed gives a collision with
//! probability `2^-l`.

use rand::RngCore;

use crate::bits::BitString;
use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashSeed {
    n: usize,
    l: usize,
    bits: BitString,
}

impl HashSeed {
    pub fn new(n: usize, l: usize, bits: BitString) -> Result<Self, Error> {
        if l == 0 || l > n {
            return Err(Error::InvalidHashLength { n, l });
        }
        if bits.len() != n + l - 1 {
            return Err(Error::LengthMismatch {
                expected: n + l - 1,
                actual: bits.len(),
            });
        }
        Ok(Self { n, l, bits })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    /// Row `i` of `T`: `seed[i + n - 1], seed[i + n - 2], ..., seed[i]`.
    pub fn row(&self, i: usize) -> BitString {
        self.bits.slice(i, self.n).reversed()
    }
}

pub fn sample_hash_seed<R: RngCore + ?Sized>(n: usize, l: usize, rng: &mut R) -> Result<HashSeed, Error> {
    if l == 0 || l > n {
        return Err(Error::InvalidHashLength { n, l });
    }
    HashSeed::new(n, l, BitString::random(n + l - 1, rng))
}

/// `T(seed) x` over GF(2).
pub fn extract(x: &BitString, seed: &HashSeed) -> Result<BitString, Error> {
    if x.len() != seed.n {
        return Err(Error::LengthMismatch {
            expected: seed.n,
            actual: x.len(),
        });
    }
    let reversed = seed.bits.reversed();
    // Row i of T is reversed[l - 1 - i ..][..n].
    (0..seed.l)
        .map(|i| reversed.slice(seed.l - 1 - i, seed.n).dot(x))
        .collect()
}

/// `c XOR d`.
pub fn one_time_pad(c: &BitString, d: &BitString) -> Result<BitString, Error> {
    c.xor(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn dense_toeplitz(seed: &HashSeed) -> Vec<Vec<bool>> {
        let (n, l) = (seed.n(), seed.l());
        (0..l)
            .map(|i| (0..n).map(|j| seed.bits().get(i + n - 1 - j)).collect())
            .collect()
    }

    #[test]
    fn seed_lengths() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(sample_hash_seed(8, 1, &mut rng).unwrap().bits().len(), 8);
        assert_eq!(sample_hash_seed(250_000, 1, &mut rng).unwrap().bits().len(), 250_000);
        assert_eq!(sample_hash_seed(16, 4, &mut rng).unwrap().bits().len(), 19);
        assert!(sample_hash_seed(4, 5, &mut rng).is_err());
        assert!(sample_hash_seed(4, 0, &mut rng).is_err());
        let a = sample_hash_seed(30, 3, &mut ChaCha20Rng::seed_from_u64(5)).unwrap();
        let b = sample_hash_seed(30, 3, &mut ChaCha20Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_input_zero_output() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let seed = sample_hash_seed(100, 5, &mut rng).unwrap();
        assert_eq!(extract(&BitString::zeros(100), &seed).unwrap(), BitString::zeros(5));
        assert!(extract(&BitString::zeros(99), &seed).is_err());
    }

    #[test]
    fn single_bit_is_dot_with_first_row() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..50 {
            let seed = sample_hash_seed(77, 1, &mut rng).unwrap();
            let x = BitString::random(77, &mut rng);
            let first_row: BitString = dense_toeplitz(&seed)[0].iter().copied().collect();
            assert_eq!(extract(&x, &seed).unwrap().get(0), x.dot(&first_row).unwrap());
        }
    }

    #[test]
    fn pad_values() {
        let one = BitString::from_bits([true]);
        assert_eq!(one_time_pad(&one, &one).unwrap(), BitString::zeros(1));
        assert_eq!(one_time_pad(&one, &BitString::zeros(1)).unwrap(), one);
        assert!(one_time_pad(&one, &BitString::zeros(2)).is_err());
    }

    proptest! {
        #[test]
        fn matches_dense_matrix(s in any::<u64>(), n in 1usize..150, l in 1usize..10) {
            prop_assume!(l <= n);
            let mut rng = ChaCha20Rng::seed_from_u64(s);
            let seed = sample_hash_seed(n, l, &mut rng).unwrap();
            let x = BitString::random(n, &mut rng);
            let want: BitString = dense_toeplitz(&seed)
                .iter()
                .map(|row| row.iter().zip(x.iter()).filter(|(a, b)| **a && *b).count() % 2 == 1)
                .collect();
            prop_assert_eq!(extract(&x, &seed).unwrap(), want.clone());
            for i in 0..l {
                prop_assert_eq!(seed.row(i).iter().collect::<Vec<_>>(), dense_toeplitz(&seed)[i].clone());
            }
        }

        #[test]
        fn pad_is_involution(s in any::<u64>(), l in 1usize..64) {
            let mut rng = ChaCha20Rng::seed_from_u64(s);
            let c = BitString::random(l, &mut rng);
            let d = BitString::random(l, &mut rng);
            prop_assert_eq!(one_time_pad(&one_time_pad(&c, &d).unwrap(), &d).unwrap(), c);
        }
    }
}
