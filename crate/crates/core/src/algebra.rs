//! Prime-field arithmetic and dense univariate polynomials.

use crate::bits::{ceil_log2, BitReader, Bits};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("polynomials over GF({0}) and GF({1}) cannot be combined")]
    FieldMismatch(u64, u64),
    #[error("abscissa {0} appears twice")]
    DuplicateAbscissa(u64),
    #[error("invalid prime selection parameters: {0}")]
    BadParameters(String),
}

/// Deterministic Miller-Rabin, exact for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u64,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self, AlgebraError> {
        if is_prime(q) {
            Ok(PrimeField { q })
        } else {
            Err(AlgebraError::NotPrime(q))
        }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Bits needed to write one element.
    pub fn element_bits(&self) -> usize {
        ceil_log2(self.q)
    }

    pub fn reduce(&self, a: u64) -> u64 {
        a % self.q
    }

    pub fn from_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.q as i64) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.q as u128) as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.q - b % self.q)
    }

    pub fn neg(&self, a: u64) -> u64 {
        self.sub(0, a)
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.q)
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        pow_mod(a, e, self.q)
    }

    /// Multiplicative inverse of a nonzero element (Fermat).
    pub fn inv(&self, a: u64) -> u64 {
        assert!(!a.is_multiple_of(self.q), "zero has no inverse");
        self.pow(a, self.q - 2)
    }
}

/// Smallest prime `q` with `c·n·alpha < q <= 2·c·n·alpha`.
pub fn select_prime(n: u64, alpha: u64, c: u64) -> Result<PrimeField, AlgebraError> {
    if n == 0 || alpha == 0 || alpha > n || c < 2 {
        return Err(AlgebraError::BadParameters(format!(
            "need n >= 1, 1 <= alpha <= n, c >= 2; got n={n}, alpha={alpha}, c={c}"
        )));
    }
    let low = c
        .checked_mul(n)
        .and_then(|x| x.checked_mul(alpha))
        .ok_or_else(|| AlgebraError::BadParameters("c·n·alpha overflows".into()))?;
    (low + 1..=2 * low)
        .find(|&q| is_prime(q))
        .map(|q| PrimeField { q })
        .ok_or_else(|| AlgebraError::BadParameters(format!("no prime in ({low}, {}]", 2 * low)))
}

/// Dense polynomial, lowest degree first, without trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldPoly {
    field: PrimeField,
    coeffs: Vec<u64>,
}

impl FieldPoly {
    pub fn zero(field: PrimeField) -> Self {
        FieldPoly { field, coeffs: Vec::new() }
    }

    pub fn constant(field: PrimeField, c: u64) -> Self {
        Self::from_coeffs(field, vec![c])
    }

    /// The polynomial `x`.
    pub fn x(field: PrimeField) -> Self {
        Self::from_coeffs(field, vec![0, 1])
    }

    /// Reduces every coefficient into `[0, q)` and strips trailing zeros.
    pub fn from_coeffs(field: PrimeField, coeffs: Vec<u64>) -> Self {
        let mut coeffs: Vec<u64> = coeffs.into_iter().map(|c| field.reduce(c)).collect();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FieldPoly { field, coeffs }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn check(&self, other: &FieldPoly) -> Result<(), AlgebraError> {
        if self.field != other.field {
            return Err(AlgebraError::FieldMismatch(self.field.q, other.field.q));
        }
        Ok(())
    }

    pub fn add(&self, other: &FieldPoly) -> Result<FieldPoly, AlgebraError> {
        self.check(other)?;
        let f = self.field;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                f.add(a, b)
            })
            .collect();
        Ok(FieldPoly::from_coeffs(f, coeffs))
    }

    pub fn sub(&self, other: &FieldPoly) -> Result<FieldPoly, AlgebraError> {
        self.add(&other.scale(self.field.q - 1))
    }

    pub fn scale(&self, s: u64) -> FieldPoly {
        let f = self.field;
        FieldPoly::from_coeffs(f, self.coeffs.iter().map(|&c| f.mul(c, f.reduce(s))).collect())
    }

    pub fn mul(&self, other: &FieldPoly) -> Result<FieldPoly, AlgebraError> {
        self.check(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(FieldPoly::zero(self.field));
        }
        let f = self.field;
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Ok(FieldPoly::from_coeffs(f, out))
    }

    /// Horner evaluation.
    pub fn evaluate(&self, x: u64) -> u64 {
        let f = self.field;
        let x = f.reduce(x);
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Lagrange interpolation: the unique polynomial of degree below
    /// `points.len()` through every point.
    pub fn interpolate(field: PrimeField, points: &[(u64, u64)]) -> Result<FieldPoly, AlgebraError> {
        let f = field;
        let xs: Vec<u64> = points.iter().map(|&(x, _)| f.reduce(x)).collect();
        for (i, &xi) in xs.iter().enumerate() {
            if xs[..i].contains(&xi) {
                return Err(AlgebraError::DuplicateAbscissa(xi));
            }
        }
        let mut acc = FieldPoly::zero(f);
        for (i, &(_, yi)) in points.iter().enumerate() {
            let yi = f.reduce(yi);
            if yi == 0 {
                continue;
            }
            let mut basis = FieldPoly::constant(f, 1);
            let mut denom = 1;
            for (j, &xj) in xs.iter().enumerate() {
                if j == i {
                    continue;
                }
                let factor = FieldPoly::from_coeffs(f, vec![f.neg(xj), 1]);
                basis = basis.mul(&factor)?;
                denom = f.mul(denom, f.sub(xs[i], xj));
            }
            acc = acc.add(&basis.scale(f.mul(yi, f.inv(denom))))?;
        }
        Ok(acc)
    }

    /// Fixed-width encoding: exactly `len` coefficients of
    /// `field.element_bits()` bits each, lowest degree first.
    ///
    /// Panics if the polynomial has more than `len` coefficients.
    pub fn encode(&self, len: usize) -> Bits {
        assert!(self.coeffs.len() <= len, "polynomial does not fit in {len} coefficients");
        let w = self.field.element_bits();
        let mut out = Bits::new();
        for i in 0..len {
            out.push_uint(self.coeffs.get(i).copied().unwrap_or(0), w);
        }
        out
    }

    /// Inverse of [`encode`](Self::encode). Fails on short input or on a
    /// coefficient outside `[0, q)`.
    pub fn decode(field: PrimeField, len: usize, reader: &mut BitReader<'_>) -> Option<FieldPoly> {
        let w = field.element_bits();
        let mut coeffs = Vec::with_capacity(len);
        for _ in 0..len {
            let c = reader.read_uint(w)?;
            if c >= field.q {
                return None;
            }
            coeffs.push(c);
        }
        Some(FieldPoly::from_coeffs(field, coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn primality_matches_trial_division() {
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial_division(n), "{n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn prime_selection() {
        assert_eq!(select_prime(8, 2, 12).unwrap().modulus(), 193);
        assert_eq!(select_prime(1, 1, 2).unwrap().modulus(), 3);
        for n in 1..40 {
            for alpha in 1..=n {
                let q = select_prime(n, alpha, 12).unwrap().modulus();
                let low = 12 * n * alpha;
                assert!(q > low && q <= 2 * low);
                assert!((low + 1..q).all(|p| !trial_division(p)));
            }
        }
        assert!(select_prime(4, 5, 12).is_err());
        assert!(select_prime(4, 1, 1).is_err());
    }

    #[test]
    fn interpolation_examples() {
        let f = gf(7);
        let p = FieldPoly::interpolate(f, &[(1, 1), (2, 0), (3, 1)]).unwrap();
        // Brute force over all 7^3 quadratics.
        let mut hits = Vec::new();
        for c0 in 0..7 {
            for c1 in 0..7 {
                for c2 in 0..7 {
                    let ok = [(1u64, 1u64), (2, 0), (3, 1)]
                        .iter()
                        .all(|&(x, y)| (c0 + c1 * x + c2 * x * x) % 7 == y);
                    if ok {
                        hits.push(vec![c0, c1, c2]);
                    }
                }
            }
        }
        assert_eq!(hits, vec![vec![4, 3, 1]]);
        assert_eq!(p.coeffs(), &[4, 3, 1]);

        let c = FieldPoly::interpolate(gf(7), &[(5, 2)]).unwrap();
        assert_eq!(c.coeffs(), &[2]);
        let line = FieldPoly::interpolate(gf(5), &[(0, 0), (1, 1)]).unwrap();
        assert_eq!(line, FieldPoly::x(gf(5)));
        assert_eq!(
            FieldPoly::interpolate(gf(5), &[(1, 0), (6, 1)]),
            Err(AlgebraError::DuplicateAbscissa(1))
        );
    }

    #[test]
    fn evaluation_and_products() {
        let f = gf(193);
        let sq = FieldPoly::from_coeffs(f, vec![0, 0, 1]);
        assert_eq!(sq.evaluate(14), 3);
        assert_eq!(FieldPoly::zero(f).evaluate(77), 0);

        let g5 = gf(5);
        let a = FieldPoly::from_coeffs(g5, vec![1, 1]);
        let b = FieldPoly::from_coeffs(g5, vec![4, 1]);
        assert_eq!(a.mul(&b).unwrap().coeffs(), &[4, 0, 1]);
        assert!(a.mul(&FieldPoly::zero(g5)).unwrap().is_zero());
        assert_eq!(a.add(&sq), Err(AlgebraError::FieldMismatch(5, 193)));
    }

    #[test]
    fn encoding_roundtrip() {
        let f = gf(193);
        let p = FieldPoly::from_coeffs(f, vec![5, 0, 192]);
        let bits = p.encode(5);
        assert_eq!(bits.len(), 5 * 8);
        assert_eq!(FieldPoly::decode(f, 5, &mut bits.reader()), Some(p));
        let bad = Bits::from_uint(200, 8);
        assert_eq!(FieldPoly::decode(f, 1, &mut bad.reader()), None);
    }

    fn poly(q: u64, max_len: usize) -> impl Strategy<Value = FieldPoly> {
        proptest::collection::vec(0..q, 0..=max_len).prop_map(move |c| FieldPoly::from_coeffs(gf(q), c))
    }

    proptest! {
        #[test]
        fn interpolation_reproduces_points(
            q in prop::sample::select(vec![2u64, 3, 7, 97, 193, 1009]),
            raw in proptest::collection::vec((any::<u64>(), any::<u64>()), 1..12),
        ) {
            let f = gf(q);
            let mut pts: Vec<(u64, u64)> = Vec::new();
            for (x, y) in raw {
                let x = x % q;
                if !pts.iter().any(|&(px, _)| px == x) {
                    pts.push((x, y % q));
                }
            }
            let p = FieldPoly::interpolate(f, &pts).unwrap();
            prop_assert!(p.coeffs().len() <= pts.len());
            for &(x, y) in &pts {
                prop_assert_eq!(p.evaluate(x), y);
            }
        }

        #[test]
        fn mul_matches_pointwise_product(a in poly(97, 8), b in poly(97, 8), x in 0u64..97) {
            let f = gf(97);
            let prod = a.mul(&b).unwrap();
            prop_assert_eq!(prod.evaluate(x), f.mul(a.evaluate(x), b.evaluate(x)));
            if let (Some(da), Some(db)) = (a.degree(), b.degree()) {
                prop_assert_eq!(prod.degree(), Some(da + db));
            }
            prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        }

        #[test]
        fn distinct_polys_agree_on_few_points(
            q in prop::sample::select(vec![101u64, 307, 997]),
            d in 1usize..8,
            seed in any::<u64>(),
        ) {
            let f = gf(q);
            let mk = |s: u64| {
                FieldPoly::from_coeffs(f, (0..=d as u64).map(|i| s.wrapping_mul(2 * i + 1).rotate_left(i as u32 * 7) % q).collect())
            };
            let (a, b) = (mk(seed), mk(seed ^ 0x9e37_79b9_7f4a_7c15));
            prop_assume!(a != b);
            let agree = (0..q).filter(|&x| a.evaluate(x) == b.evaluate(x)).count();
            prop_assert!(agree <= d);
        }
    }
}
