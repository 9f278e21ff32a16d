//! Exact arithmetic in the finite field F_q, q = p^k.
//!
//! Elements are dense indices in 0..q-1. For k = 1 the index is the residue
//! itself; for k > 1 the element sum a_j t^j (a_j in F_p) has index
//! sum a_j p^j, i.e. radix-p coefficient packing. The modulus defining
//! F_{p^k} is the lexicographically least monic irreducible polynomial of
//! degree k over F_p, so two independently built fields of the same order
//! use the same element encoding.
//!
//! Arithmetic goes through full q x q lookup tables when q <= 256 and
//! through on-the-fly polynomial reduction above that.

use thiserror::Error;

/// Default cap on the field order. All desk-scale experiments use q <= 9;
/// the cap exists so a typo cannot allocate gigabyte tables.
pub const DEFAULT_ORDER_LIMIT: u64 = 1 << 16;

/// Orders up to this get full add/mul tables.
const TABLE_LIMIT: u64 = 256;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field order {q} exceeds the limit {limit}")]
    TooLarge { q: u128, limit: u64 },
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("division by zero")]
    DivisionByZero,
}

/// An element of F_q, identified by its dense index in 0..q-1.
///
/// Index 0 is the additive identity and index 1 the multiplicative one.
/// Elements carry no field reference; all arithmetic goes through [`Field`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElem(u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    pub fn index(self) -> u64 {
        u64::from(self.0)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>, // slot 0 unused
}

/// The field F_q with q = p^k, plus whatever precomputed state its order
/// warrants. Immutable after construction; all operations are pure.
pub struct Field {
    p: u64,
    k: u32,
    q: u64,
    /// Coefficients a_0..a_k (ascending degree, a_k = 1) of the defining
    /// modulus; empty when k = 1.
    modulus: Vec<u64>,
    tables: Option<Tables>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for Field {}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("k", &self.k)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .finish()
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Remainder of `a` divided by the monic polynomial `m`, both little-endian
/// coefficient vectors over F_p. `a` is consumed in place.
fn poly_rem(mut a: Vec<u64>, m: &[u64], p: u64) -> Vec<u64> {
    let dm = m.len() - 1;
    while a.len() > dm {
        let lead = *a.last().unwrap();
        let da = a.len() - 1;
        if lead != 0 {
            for j in 0..=dm {
                let idx = da - dm + j;
                a[idx] = (a[idx] + (p - lead % p) * m[j]) % p;
            }
        }
        a.pop();
    }
    a
}

fn poly_is_zero(a: &[u64]) -> bool {
    a.iter().all(|&c| c == 0)
}

/// True iff the monic polynomial `m` (degree >= 1) has no monic divisor of
/// degree 1..=deg(m)/2 over F_p. Trial division; only ever used at
/// construction time on degree-k candidates.
fn is_irreducible(m: &[u64], p: u64) -> bool {
    let k = m.len() - 1;
    for dd in 1..=k / 2 {
        let count = p.pow(dd as u32);
        for w in 0..count {
            let mut div = Vec::with_capacity(dd + 1);
            let mut v = w;
            for _ in 0..dd {
                div.push(v % p);
                v /= p;
            }
            div.push(1);
            if poly_is_zero(&poly_rem(m.to_vec(), &div, p)) {
                return false;
            }
        }
    }
    true
}

/// The canonical modulus: the lexicographically least monic irreducible
/// polynomial of degree k over F_p, comparing coefficient tuples
/// (a_{k-1}, ..., a_1, a_0). That tuple order coincides with the numeric
/// order of sum a_j p^j, so a single ascending scan finds it.
fn canonical_modulus(p: u64, k: u32) -> Vec<u64> {
    let count = p.pow(k);
    for v in 0..count {
        let mut m = Vec::with_capacity(k as usize + 1);
        let mut w = v;
        for _ in 0..k {
            m.push(w % p);
            w /= p;
        }
        m.push(1);
        if is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over F_p")
}

impl Field {
    /// Builds F_{p^k} under the default order limit.
    pub fn new(p: u64, k: u32) -> Result<Field, FieldError> {
        Field::with_limit(p, k, DEFAULT_ORDER_LIMIT)
    }

    /// Builds F_{p^k} with an explicit order cap.
    pub fn with_limit(p: u64, k: u32, limit: u64) -> Result<Field, FieldError> {
        if k == 0 {
            return Err(FieldError::ZeroDegree);
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let q128 = (p as u128).pow(k);
        if q128 > limit as u128 || q128 > u32::MAX as u128 {
            return Err(FieldError::TooLarge {
                q: q128,
                limit: limit.min(u32::MAX as u64),
            });
        }
        let q = q128 as u64;
        let modulus = if k == 1 {
            Vec::new()
        } else {
            canonical_modulus(p, k)
        };
        let mut field = Field {
            p,
            k,
            q,
            modulus,
            tables: None,
        };
        if q <= TABLE_LIMIT {
            field.build_tables();
        }
        Ok(field)
    }

    /// Builds the field of order q, factoring q = p^k first.
    pub fn from_order(q: u64) -> Result<Field, FieldError> {
        let (p, k) = factor_prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        Field::new(p, k)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    /// Coefficients a_0..a_k of the defining modulus; empty for k = 1.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// The element with the given index. Panics if out of range.
    pub fn elem(&self, index: u64) -> FieldElem {
        assert!(
            index < self.q,
            "element index {index} out of range for q={}",
            self.q
        );
        FieldElem(index as u32)
    }

    pub fn elems(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q as u32).map(FieldElem)
    }

    fn digits(&self, x: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.k as usize);
        let mut v = x;
        for _ in 0..self.k {
            out.push(v % self.p);
            v /= self.p;
        }
        out
    }

    fn pack(&self, digits: &[u64]) -> u64 {
        let mut v = 0;
        for &d in digits.iter().rev() {
            v = v * self.p + d;
        }
        v
    }

    fn add_raw(&self, a: u64, b: u64) -> u64 {
        if self.k == 1 {
            return (a + b) % self.p;
        }
        let da = self.digits(a);
        let db = self.digits(b);
        let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.pack(&sum)
    }

    fn neg_raw(&self, a: u64) -> u64 {
        if self.k == 1 {
            return (self.p - a) % self.p;
        }
        let da = self.digits(a);
        let neg: Vec<u64> = da.iter().map(|&x| (self.p - x) % self.p).collect();
        self.pack(&neg)
    }

    fn mul_raw(&self, a: u64, b: u64) -> u64 {
        if self.k == 1 {
            return (a * b) % self.p;
        }
        let da = self.digits(a);
        let db = self.digits(b);
        let k = self.k as usize;
        let mut conv = vec![0u64; 2 * k - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                conv[i + j] = (conv[i + j] + x * y) % self.p;
            }
        }
        let rem = poly_rem(conv, &self.modulus, self.p);
        let mut digits = rem;
        digits.resize(k, 0);
        self.pack(&digits)
    }

    fn build_tables(&mut self) {
        let q = self.q as usize;
        let mut add = vec![0u32; q * q];
        let mut mul = vec![0u32; q * q];
        let mut neg = vec![0u32; q];
        for a in 0..q as u64 {
            neg[a as usize] = self.neg_raw(a) as u32;
            for b in 0..q as u64 {
                add[(a * self.q + b) as usize] = self.add_raw(a, b) as u32;
                mul[(a * self.q + b) as usize] = self.mul_raw(a, b) as u32;
            }
        }
        // inv via Fermat, before tables exist only raw ops are available
        let mut inv = vec![0u32; q];
        for a in 1..q as u64 {
            inv[a as usize] = self.pow_raw(a, self.q - 2) as u32;
        }
        self.tables = Some(Tables { add, mul, neg, inv });
    }

    fn pow_raw(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        debug_assert!(a.index() < self.q && b.index() < self.q);
        match &self.tables {
            Some(t) => FieldElem(t.add[(a.index() * self.q + b.index()) as usize]),
            None => FieldElem(self.add_raw(a.index(), b.index()) as u32),
        }
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        debug_assert!(a.index() < self.q);
        match &self.tables {
            Some(t) => FieldElem(t.neg[a.index() as usize]),
            None => FieldElem(self.neg_raw(a.index()) as u32),
        }
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        debug_assert!(a.index() < self.q && b.index() < self.q);
        match &self.tables {
            Some(t) => FieldElem(t.mul[(a.index() * self.q + b.index()) as usize]),
            None => FieldElem(self.mul_raw(a.index(), b.index()) as u32),
        }
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        match &self.tables {
            Some(t) => Ok(FieldElem(t.inv[a.index() as usize])),
            None => Ok(FieldElem(self.pow_raw(a.index(), self.q - 2) as u32)),
        }
    }

    /// a^m for m >= 0, with a^0 = 1.
    pub fn pow(&self, a: FieldElem, m: u64) -> FieldElem {
        let mut acc = FieldElem::ONE;
        let mut base = a;
        let mut e = m;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

/// Writes q as p^k for prime p, or None if q is not a prime power.
pub fn factor_prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut m = q;
    let mut p = 0;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            p = d;
            while m % d == 0 {
                m /= d;
            }
            break;
        }
        d += 1;
    }
    if p == 0 {
        p = q; // q itself is prime
    } else if m != 1 {
        return None; // second prime factor
    }
    let mut k = 0;
    let mut v = q;
    while v > 1 {
        if v % p != 0 {
            return None;
        }
        v /= p;
        k += 1;
    }
    Some((p, k))
}
