//! Exact arithmetic in GF(p^k).
//!
//! An element is encoded as the integer `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`
//! whose base-p digits are the coefficients of its polynomial representative.
//! This encoding is also the total order used for every "least element"
//! tie-break elsewhere in the crate.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Encoded field element.
pub type Elem = u32;

/// Fields up to this size get full addition and multiplication tables.
const TABLE_LIMIT: u32 = 1024;
/// Fields up to this size get an inversion table.
const INV_TABLE_LIMIT: u32 = 1 << 16;
const MAX_FIELD_SIZE: u64 = 1 << 24;

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits a prime power into `(p, k)`.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while !q.is_multiple_of(p) {
        p += 1;
    }
    let (mut rest, mut k) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

// Polynomials over GF(p) as coefficient vectors, lowest degree first.

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let c = r[r.len() - 1] * lead_inv % p;
        for (i, &mi) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - c * mi % p) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let deg = modulus.len() - 1;
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut divisor = digits_of(low, p, d);
            divisor.push(1);
            if poly_rem(modulus, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn digits_of(mut x: u64, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((x % p as u64) as u32);
        x /= p as u64;
    }
    out
}

/// The least monic irreducible of degree `k`, ordering candidates by the
/// base-p integer formed from their lower coefficients.
pub fn least_irreducible(p: u32, k: u32) -> Vec<u32> {
    let count = (p as u64).pow(k);
    for low in 0..count {
        let mut m = digits_of(low, p, k as usize);
        m.push(1);
        if is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// GF(p^k) with an explicit irreducible modulus.
pub struct Field {
    p: u32,
    k: u32,
    size: u32,
    modulus: Vec<u32>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}) [{}]", self.p, self.k, self.descriptor())
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}

impl Eq for Field {}

impl Field {
    /// Builds GF(p^k). Without an explicit modulus the least monic
    /// irreducible of degree `k` is used.
    pub fn new(p: u32, k: u32, modulus: Option<&[u32]>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 {
            return Err(Error::InvalidField("extension degree must be at least 1".into()));
        }
        let size = (p as u64)
            .checked_pow(k)
            .filter(|&s| s <= MAX_FIELD_SIZE)
            .ok_or_else(|| Error::InvalidField(format!("GF({p}^{k}) is too large")))?
            as u32;
        let modulus = match modulus {
            Some(m) => {
                if m.len() != k as usize + 1 || m[k as usize] != 1 || m.iter().any(|&c| c >= p) {
                    return Err(Error::InvalidField(format!(
                        "modulus {m:?} is not a monic degree-{k} polynomial over GF({p})"
                    )));
                }
                if !is_irreducible(m, p) {
                    return Err(Error::ReducibleModulus(m.to_vec()));
                }
                m.to_vec()
            }
            None => least_irreducible(p, k),
        };
        let mut field = Field {
            p,
            k,
            size,
            modulus,
            add: Vec::new(),
            mul: Vec::new(),
            neg: Vec::new(),
            inv: Vec::new(),
        };
        field.neg = (0..size).map(|a| field.raw_neg(a)).collect();
        if size <= TABLE_LIMIT {
            let n = size as usize;
            let mut add = vec![0u16; n * n];
            let mut mul = vec![0u16; n * n];
            for a in 0..size {
                for b in 0..size {
                    add[a as usize * n + b as usize] = field.raw_add(a, b) as u16;
                    mul[a as usize * n + b as usize] = field.raw_mul(a, b) as u16;
                }
            }
            field.add = add;
            field.mul = mul;
        }
        if size <= INV_TABLE_LIMIT {
            let mut inv = vec![0u32; size as usize];
            for a in 1..size {
                if inv[a as usize] == 0 {
                    let b = field.pow(a, size as u64 - 2);
                    inv[a as usize] = b;
                    inv[b as usize] = a;
                }
            }
            field.inv = inv;
        }
        Ok(field)
    }

    /// Parses the `p k c_0 ... c_k` descriptor written by [`Field::descriptor`].
    pub fn from_descriptor(s: &str) -> Result<Self> {
        let nums = s
            .split_whitespace()
            .map(|t| t.parse::<u32>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if nums.len() < 3 || nums.len() != nums[1] as usize + 3 {
            return Err(Error::Parse(format!("malformed field descriptor {s:?}")));
        }
        Field::new(nums[0], nums[1], Some(&nums[2..]))
    }

    pub fn descriptor(&self) -> String {
        let mut s = format!("{} {}", self.p, self.k);
        for c in &self.modulus {
            s.push_str(&format!(" {c}"));
        }
        s
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of elements.
    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The class of `x`, which generates the field over GF(p).
    pub fn generator(&self) -> Elem {
        if self.k == 1 {
            (self.p - self.modulus[0]) % self.p
        } else {
            self.p
        }
    }

    pub fn digits(&self, a: Elem) -> Vec<u32> {
        digits_of(a as u64, self.p, self.k as usize)
    }

    pub fn from_digits(&self, digits: &[u32]) -> Elem {
        digits.iter().rev().fold(0, |acc, &d| acc * self.p + d % self.p)
    }

    pub fn check(&self, a: Elem) -> Result<Elem> {
        if a < self.size {
            Ok(a)
        } else {
            Err(Error::ElementOutOfRange(a))
        }
    }

    fn raw_add(&self, a: Elem, b: Elem) -> Elem {
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let (mut out, mut place) = (0, 1);
        for _ in 0..self.k {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    fn raw_neg(&self, a: Elem) -> Elem {
        if self.p == 2 {
            return a;
        }
        let digits: Vec<u32> = self
            .digits(a)
            .into_iter()
            .map(|d| (self.p - d) % self.p)
            .collect();
        self.from_digits(&digits)
    }

    fn raw_mul(&self, a: Elem, b: Elem) -> Elem {
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u32; 2 * self.k as usize - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        self.from_digits(&poly_rem(&prod, &self.modulus, self.p))
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if !self.add.is_empty() {
            self.add[(a * self.size + b) as usize] as Elem
        } else {
            self.raw_add(a, b)
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if !self.mul.is_empty() {
            self.mul[(a * self.size + b) as usize] as Elem
        } else {
            self.raw_mul(a, b)
        }
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::InverseOfZero);
        }
        Ok(self.inv_nonzero(a))
    }

    /// Inverse of an element the caller knows to be nonzero.
    #[inline]
    pub(crate) fn inv_nonzero(&self, a: Elem) -> Elem {
        debug_assert!(a != 0);
        if !self.inv.is_empty() {
            self.inv[a as usize]
        } else {
            self.pow(a, self.size as u64 - 2)
        }
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let (mut base, mut acc) = (a, 1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Evaluates a polynomial with prime-field coefficients at `x`.
    pub fn eval_prime_poly(&self, coeffs: &[u32], x: Elem) -> Elem {
        coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| self.add(self.mul(acc, x), c % self.p))
    }

    /// Dot product of two equal-length vectors.
    #[inline]
    pub fn dot(&self, a: &[Elem], b: &[Elem]) -> Elem {
        a.iter().zip(b).fold(0, |acc, (&x, &y)| {
            if x == 0 || y == 0 {
                acc
            } else {
                self.add(acc, self.mul(x, y))
            }
        })
    }
}

/// An embedding GF(p^a) -> GF(p^b) with `a | b`.
#[derive(Debug, Clone)]
pub struct SubfieldEmbedding {
    sub: Arc<Field>,
    sup: Arc<Field>,
    image: Vec<Elem>,
    preimage: Vec<Option<Elem>>,
}

impl SubfieldEmbedding {
    /// The generator of `sub` is sent to the least root of its minimal
    /// polynomial (the modulus of `sub`) inside `sup`.
    pub fn new(sub: Arc<Field>, sup: Arc<Field>) -> Result<Self> {
        if sub.p != sup.p || !sup.k.is_multiple_of(sub.k) {
            return Err(Error::IncompatibleFields(format!(
                "GF({}^{}) does not embed in GF({}^{})",
                sub.p, sub.k, sup.p, sup.k
            )));
        }
        let root = (0..sup.size)
            .find(|&z| sup.eval_prime_poly(&sub.modulus, z) == 0)
            .ok_or_else(|| Error::IncompatibleFields("no root of the sub-field modulus".into()))?;
        let image: Vec<Elem> = (0..sub.size)
            .map(|a| sup.eval_prime_poly(&sub.digits(a), root))
            .collect();
        let mut preimage = vec![None; sup.size as usize];
        for (a, &img) in image.iter().enumerate() {
            if preimage[img as usize].replace(a as Elem).is_some() {
                return Err(Error::IncompatibleFields("embedding is not injective".into()));
            }
        }
        let emb = SubfieldEmbedding {
            sub,
            sup,
            image,
            preimage,
        };
        if emb.sub.size <= 256 {
            emb.check_homomorphism()?;
        }
        Ok(emb)
    }

    fn check_homomorphism(&self) -> Result<()> {
        if self.image[0] != 0 || self.image[1] != 1 {
            return Err(Error::IncompatibleFields("embedding does not fix 0 and 1".into()));
        }
        for a in 0..self.sub.size {
            for b in 0..self.sub.size {
                let (ea, eb) = (self.apply(a), self.apply(b));
                if self.apply(self.sub.add(a, b)) != self.sup.add(ea, eb)
                    || self.apply(self.sub.mul(a, b)) != self.sup.mul(ea, eb)
                {
                    return Err(Error::IncompatibleFields(format!(
                        "embedding is not a homomorphism at ({a}, {b})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sub(&self) -> &Arc<Field> {
        &self.sub
    }

    pub fn sup(&self) -> &Arc<Field> {
        &self.sup
    }

    #[inline]
    pub fn apply(&self, a: Elem) -> Elem {
        self.image[a as usize]
    }

    /// The sub-field element mapping to `a`, if any.
    pub fn preimage(&self, a: Elem) -> Option<Elem> {
        self.preimage[a as usize]
    }

    /// Relative degree of the extension.
    pub fn degree(&self) -> u32 {
        self.sup.k / self.sub.k
    }
}

/// A basis of the big field over an embedded sub-field, with a full
/// coordinate table.
#[derive(Debug, Clone)]
pub struct BlowupBasis {
    embedding: SubfieldEmbedding,
    elements: Vec<Elem>,
    coords: Vec<Vec<Elem>>,
}

impl BlowupBasis {
    /// Power basis `1, g, ..., g^{n-1}` of the generator of the big field.
    pub fn power(embedding: SubfieldEmbedding) -> Result<Self> {
        let sup = embedding.sup.clone();
        let g = sup.generator();
        let elements = (0..embedding.degree()).map(|j| sup.pow(g, j as u64)).collect();
        BlowupBasis::new(embedding, elements)
    }

    pub fn new(embedding: SubfieldEmbedding, elements: Vec<Elem>) -> Result<Self> {
        let n = embedding.degree() as usize;
        if elements.len() != n {
            return Err(Error::IncompatibleFields(format!(
                "a basis needs {n} elements, got {}",
                elements.len()
            )));
        }
        let (sub, sup) = (embedding.sub.clone(), embedding.sup.clone());
        for &e in &elements {
            sup.check(e)?;
        }
        // Every combination sum_j c_j b_j is computed; the elements are
        // independent exactly when the combinations are pairwise distinct.
        let mut coords: Vec<Option<Vec<Elem>>> = vec![None; sup.size as usize];
        let mut c = vec![0u32; n];
        loop {
            let a = c.iter().zip(&elements).fold(0, |acc, (&cj, &bj)| {
                sup.add(acc, sup.mul(embedding.apply(cj), bj))
            });
            if coords[a as usize].replace(c.clone()).is_some() {
                return Err(Error::Degenerate(format!(
                    "{elements:?} is linearly dependent over GF({}^{})",
                    sub.p, sub.k
                )));
            }
            if !odometer(&mut c, sub.size) {
                break;
            }
        }
        let coords = coords.into_iter().map(|c| c.expect("bijective")).collect();
        Ok(BlowupBasis {
            embedding,
            elements,
            coords,
        })
    }

    pub fn embedding(&self) -> &SubfieldEmbedding {
        &self.embedding
    }

    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Sub-field coordinates of a big-field element.
    #[inline]
    pub fn coords(&self, a: Elem) -> &[Elem] {
        &self.coords[a as usize]
    }

    /// Inverse of [`BlowupBasis::coords`].
    pub fn combine(&self, c: &[Elem]) -> Elem {
        let sup = &self.embedding.sup;
        c.iter().zip(&self.elements).fold(0, |acc, (&cj, &bj)| {
            sup.add(acc, sup.mul(self.embedding.apply(cj), bj))
        })
    }

    /// Matrix of multiplication by `a` as a sub-field-linear map: column `j`
    /// holds the coordinates of `a * b_j`.
    pub fn blowup_matrix(&self, a: Elem) -> Result<Vec<Vec<Elem>>> {
        let sup = &self.embedding.sup;
        sup.check(a)?;
        let n = self.len();
        let mut m = vec![vec![0; n]; n];
        for (j, &bj) in self.elements.iter().enumerate() {
            for (i, &c) in self.coords(sup.mul(a, bj)).iter().enumerate() {
                m[i][j] = c;
            }
        }
        Ok(m)
    }
}

/// Advances a little-endian base-`base` counter; false on wrap-around.
pub(crate) fn odometer(c: &mut [u32], base: u32) -> bool {
    for d in c.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}
