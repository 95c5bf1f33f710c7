//! Exact arithmetic in GF(p^n), p^n <= 64.
//!
//! Elements are polynomials over Z_p reduced modulo a monic irreducible
//! of degree n, represented by constant-first coefficient vectors. The
//! canonical enumeration indexes element `i` by its base-p digits
//! (constant coefficient least significant), so index 0 is the additive
//! identity and index 1 the multiplicative identity. All arithmetic is
//! table-driven; tables are built once at construction.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest field size for which exhaustive invariant checks stay cheap.
pub const SIZE_CAP: usize = 64;

struct FieldCore {
    p: u64,
    n: usize,
    q: usize,
    /// Monic irreducible modulus, constant-first, length n + 1.
    modulus: Vec<u64>,
    add: Vec<usize>,
    mul: Vec<usize>,
    neg: Vec<usize>,
    inv: Vec<usize>,
    /// Field trace to Z_p, per element index.
    trace: Vec<u64>,
}

/// A finite field GF(p^n) with table-driven arithmetic.
///
/// Cloning is cheap; all clones share the same tables. Two fields
/// compare equal when they have the same p, n, and modulus, and their
/// elements are interchangeable in that case.
#[derive(Clone)]
pub struct Field(Arc<FieldCore>);

/// An element of a [`Field`], carried as a handle plus canonical index.
#[derive(Clone)]
pub struct FieldElement {
    field: Field,
    idx: usize,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.n == other.0.n && self.0.modulus == other.0.modulus
    }
}
impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.0.p, self.0.n)
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.idx == other.idx
    }
}
impl Eq for FieldElement {}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs())
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= p {
        if p % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Remainder of `a` divided by monic `m` over Z_p, constant-first.
fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let deg_m = m.len() - 1;
    let mut r: Vec<u64> = a.to_vec();
    while r.len() > deg_m {
        let lead = *r.last().unwrap() % p;
        let shift = r.len() - 1 - deg_m;
        if lead != 0 {
            for i in 0..=deg_m {
                let t = (lead * m[i]) % p;
                r[shift + i] = (r[shift + i] + p * p - t) % p;
            }
        }
        r.pop();
    }
    r.resize(deg_m.max(1), 0);
    r
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

/// Exhaustive irreducibility test: no monic divisor of degree
/// 1..=n/2. Adequate for the p^n <= 64 sizes in scope.
fn is_irreducible(m: &[u64], p: u64) -> bool {
    let n = m.len() - 1;
    if n == 1 {
        return true;
    }
    for deg in 1..=n / 2 {
        // Iterate monic candidates of this degree by their digit index.
        let count = (p as usize).pow(deg as u32);
        for idx in 0..count {
            let mut cand = digits(idx, p, deg);
            cand.push(1);
            if poly_rem(m, &cand, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn digits(mut idx: usize, p: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for d in out.iter_mut() {
        *d = (idx % p as usize) as u64;
        idx /= p as usize;
    }
    out
}

fn index_of(coeffs: &[u64], p: u64) -> usize {
    coeffs
        .iter()
        .rev()
        .fold(0usize, |acc, &c| acc * p as usize + c as usize)
}

impl Field {
    /// Build GF(p^n). If `modulus` is omitted, the lexicographically
    /// smallest monic irreducible of degree n (by canonical digit
    /// index) is selected, so repeat runs produce identical fields.
    pub fn new(p: u64, n: usize, modulus: Option<Vec<u64>>) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::NonPrimeP(p));
        }
        if n == 0 {
            return Err(Error::SchemaViolation("n must be positive".into()));
        }
        let q = (p as usize)
            .checked_pow(n as u32)
            .ok_or(Error::SizeTooLarge {
                size: usize::MAX,
                cap: SIZE_CAP,
            })?;
        if q > SIZE_CAP {
            return Err(Error::SizeTooLarge {
                size: q,
                cap: SIZE_CAP,
            });
        }
        let modulus = match modulus {
            Some(mut m) => {
                for c in m.iter_mut() {
                    *c %= p;
                }
                if m.len() != n + 1 || m[n] != 1 {
                    return Err(Error::SchemaViolation(format!(
                        "modulus must be monic of degree {n}"
                    )));
                }
                if !is_irreducible(&m, p) {
                    return Err(Error::ReducibleModulus { p });
                }
                m
            }
            None => Self::default_modulus(p, n),
        };

        let mut mul = vec![0usize; q * q];
        let mut add = vec![0usize; q * q];
        let mut neg = vec![0usize; q];
        for i in 0..q {
            let a = digits(i, p, n);
            neg[i] = index_of(
                &a.iter().map(|&c| (p - c) % p).collect::<Vec<_>>(),
                p,
            );
            for j in 0..q {
                let b = digits(j, p, n);
                let s: Vec<u64> = a.iter().zip(&b).map(|(&x, &y)| (x + y) % p).collect();
                add[i * q + j] = index_of(&s, p);
                let prod = poly_rem(&poly_mul(&a, &b, p), &modulus, p);
                mul[i * q + j] = index_of(&prod, p);
            }
        }
        let mut inv = vec![0usize; q];
        for i in 1..q {
            inv[i] = (1..q)
                .find(|&j| mul[i * q + j] == 1)
                .expect("nonzero element of a field has an inverse");
        }
        // Tr(a) = a + a^p + ... + a^(p^(n-1)), which lands in Z_p.
        let mut trace = vec![0u64; q];
        for i in 0..q {
            let mut acc = 0usize;
            let mut power = i;
            for _ in 0..n {
                acc = add[acc * q + power];
                let mut t = power;
                for _ in 1..p {
                    t = mul[t * q + power];
                }
                power = t;
            }
            let c = digits(acc, p, n);
            debug_assert!(c[1..].iter().all(|&x| x == 0), "trace must lie in Z_p");
            trace[i] = c[0];
        }

        Ok(Field(Arc::new(FieldCore {
            p,
            n,
            q,
            modulus,
            add,
            mul,
            neg,
            inv,
            trace,
        })))
    }

    /// The prime field Z_p.
    pub fn prime(p: u64) -> Result<Field> {
        Field::new(p, 1, None)
    }

    fn default_modulus(p: u64, n: usize) -> Vec<u64> {
        if n == 1 {
            return vec![0, 1];
        }
        let count = (p as usize).pow(n as u32);
        for idx in 0..count {
            let mut cand = digits(idx, p, n);
            cand.push(1);
            if is_irreducible(&cand, p) {
                return cand;
            }
        }
        unreachable!("an irreducible polynomial of every degree exists over Z_p")
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    /// Number of elements, d = p^n.
    pub fn size(&self) -> usize {
        self.0.q
    }

    /// Modulus polynomial, constant-first, monic of degree n.
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn zero(&self) -> FieldElement {
        self.element_at(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element_at(1)
    }

    /// Element with the given canonical index (panics out of range).
    pub fn element_at(&self, idx: usize) -> FieldElement {
        assert!(idx < self.0.q, "element index {idx} out of range");
        FieldElement {
            field: self.clone(),
            idx,
        }
    }

    /// Element from a constant-first coefficient list (entries reduced
    /// mod p; at most n coefficients).
    pub fn element(&self, coeffs: &[u64]) -> Result<FieldElement> {
        if coeffs.len() > self.0.n {
            return Err(Error::SchemaViolation(format!(
                "element needs at most {} coefficients",
                self.0.n
            )));
        }
        let mut c: Vec<u64> = coeffs.iter().map(|&x| x % self.0.p).collect();
        c.resize(self.0.n, 0);
        Ok(self.element_at(index_of(&c, self.0.p)))
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.0.q).map(move |i| self.element_at(i))
    }

    fn same_field(&self, a: &FieldElement, b: &FieldElement) -> Result<()> {
        if a.field != *self || b.field != *self {
            return Err(Error::MixedFields);
        }
        Ok(())
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.same_field(a, b)?;
        Ok(self.element_at(self.add_idx(a.idx, b.idx)))
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.same_field(a, b)?;
        Ok(self.element_at(self.add_idx(a.idx, self.neg_idx(b.idx))))
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.same_field(a, b)?;
        Ok(self.element_at(self.mul_idx(a.idx, b.idx)))
    }

    pub fn neg(&self, a: &FieldElement) -> Result<FieldElement> {
        self.same_field(a, a)?;
        Ok(self.element_at(self.neg_idx(a.idx)))
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        self.same_field(a, a)?;
        if a.idx == 0 {
            return Err(Error::InverseOfZero);
        }
        Ok(self.element_at(self.0.inv[a.idx]))
    }

    /// Field trace to Z_p: Tr(a) = sum over i of a^(p^i).
    pub fn trace(&self, a: &FieldElement) -> Result<u64> {
        self.same_field(a, a)?;
        Ok(self.0.trace[a.idx])
    }

    /// 2^-1 in the field; fails for characteristic 2.
    pub fn two_inverse(&self) -> Result<FieldElement> {
        if self.0.p == 2 {
            return Err(Error::CharacteristicTwo);
        }
        self.inv(&self.element(&[2]).expect("2 fits in one coefficient"))
    }

    /// Primitive p-th root of unity omega = exp(2 pi i / p).
    pub fn omega(&self) -> Complex64 {
        self.root_of_unity(1)
    }

    /// omega^k = exp(2 pi i k / p).
    pub fn root_of_unity(&self, k: u64) -> Complex64 {
        let angle = 2.0 * std::f64::consts::PI * (k % self.0.p) as f64 / self.0.p as f64;
        Complex64::new(angle.cos(), angle.sin())
    }

    // Index-level arithmetic for hot loops. Callers guarantee indices
    // come from this field's enumeration.
    pub(crate) fn add_idx(&self, a: usize, b: usize) -> usize {
        self.0.add[a * self.0.q + b]
    }
    pub(crate) fn mul_idx(&self, a: usize, b: usize) -> usize {
        self.0.mul[a * self.0.q + b]
    }
    pub(crate) fn neg_idx(&self, a: usize) -> usize {
        self.0.neg[a]
    }
    pub(crate) fn trace_idx(&self, a: usize) -> u64 {
        self.0.trace[a]
    }
}

impl FieldElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Canonical index in the field enumeration.
    pub fn index(&self) -> usize {
        self.idx
    }

    /// Constant-first coefficient vector of length n.
    pub fn coeffs(&self) -> Vec<u64> {
        digits(self.idx, self.field.0.p, self.field.0.n)
    }

    pub fn is_zero(&self) -> bool {
        self.idx == 0
    }
}
