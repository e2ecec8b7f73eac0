//! Pauli-string algebra and its action on the `2^N`-dimensional computational basis.
//!
//! Bit convention: qubit `i` is bit `i` of a basis-state index (little-endian).
//! A string is stored as an X mask, a Z mask and a sign, where a qubit present in
//! both masks carries a `Y` factor.

use std::fmt;
use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register `to_sparse` will materialize unless told otherwise.
pub const DEFAULT_MAX_QUBITS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Axis> {
        match c.to_ascii_uppercase() {
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            _ => None,
        }
    }
}

/// An exact phase `i^k`, `k` taken mod 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: i64) -> Phase {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        })
    }
}

/// A signed tensor product of single-qubit Pauli factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
    negative: bool,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= 64, "at most 64 qubits are supported");
        PauliString { n_qubits, x: 0, z: 0, negative: false }
    }

    /// Builds a string from `(qubit, axis)` factors. Repeated qubits are rejected.
    pub fn from_factors<I>(n_qubits: usize, factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Axis)>,
    {
        let mut p = PauliString::identity(n_qubits);
        for (q, axis) in factors {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            let bit = 1u64 << q;
            if (p.x | p.z) & bit != 0 {
                return Err(Error::parse("pauli string", format!("qubit {} appears twice", q + 1)));
            }
            match axis {
                Axis::X => p.x |= bit,
                Axis::Z => p.z |= bit,
                Axis::Y => {
                    p.x |= bit;
                    p.z |= bit;
                }
            }
        }
        Ok(p)
    }

    /// Same axis on every listed qubit.
    pub fn uniform(n_qubits: usize, axis: Axis, qubits: &[usize]) -> Result<Self> {
        Self::from_factors(n_qubits, qubits.iter().map(|&q| (q, axis)))
    }

    pub fn single(n_qubits: usize, qubit: usize, axis: Axis) -> Result<Self> {
        Self::from_factors(n_qubits, [(qubit, axis)])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn negated(mut self) -> Self {
        self.negative = !self.negative;
        self
    }

    pub fn with_sign(mut self, sign: i8) -> Self {
        self.negative = sign < 0;
        self
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn axis(&self, qubit: usize) -> Option<Axis> {
        let bit = 1u64 << qubit;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => None,
            (true, false) => Some(Axis::X),
            (false, true) => Some(Axis::Z),
            (true, true) => Some(Axis::Y),
        }
    }

    /// Non-identity factors in ascending qubit order.
    pub fn factors(&self) -> Vec<(usize, Axis)> {
        (0..self.n_qubits).filter_map(|q| self.axis(q).map(|a| (q, a))).collect()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|&q| (self.x | self.z) >> q & 1 == 1).collect()
    }

    /// Restriction to the qubits in `mask`, keeping the sign.
    pub fn restricted(&self, mask: u64) -> Self {
        PauliString { x: self.x & mask, z: self.z & mask, ..*self }
    }

    /// Conjugation by Hadamards on the qubits in `mask` (`X <-> Z`, `Y -> -Y`).
    pub fn hadamard_conjugated(&self, mask: u64) -> Self {
        let x = (self.x & !mask) | (self.z & mask);
        let z = (self.z & !mask) | (self.x & mask);
        let ys = (self.x & self.z & mask).count_ones();
        PauliString { n_qubits: self.n_qubits, x, z, negative: self.negative ^ (ys % 2 == 1) }
    }

    /// Sites where both strings act with distinct non-identity factors.
    pub fn anticommuting_sites(&self, other: &PauliString) -> u32 {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones()
    }

    /// Action on a basis state: `P|b> = c |b'>`.
    #[inline]
    pub fn action(&self, b: usize) -> (usize, Complex64) {
        let target = b ^ self.x as usize;
        let mut k = (self.x & self.z).count_ones() as i64;
        if (b as u64 & self.z).count_ones() % 2 == 1 {
            k += 2;
        }
        if self.negative {
            k += 2;
        }
        (target, Phase::from_exponent(k).to_complex())
    }

    /// Real matrix element `<b'|P|b>` for strings without `Y` factors.
    #[inline]
    pub fn real_action(&self, b: usize) -> (usize, f64) {
        debug_assert!(self.x & self.z == 0);
        let parity = (b as u64 & self.z).count_ones() % 2 == 1;
        let s = if parity ^ self.negative { -1.0 } else { 1.0 };
        (b ^ self.x as usize, s)
    }

    pub fn parse(text: &str, n_qubits: usize) -> Result<Self> {
        let text = text.trim();
        let (negative, body) = match text.chars().next() {
            Some('+') => (false, &text[1..]),
            Some('-') => (true, &text[1..]),
            _ => (false, text),
        };
        let mut factors = Vec::new();
        for tok in body.split_whitespace() {
            if tok.eq_ignore_ascii_case("I") {
                continue;
            }
            let mut chars = tok.chars();
            let axis = chars
                .next()
                .and_then(Axis::from_letter)
                .ok_or_else(|| Error::parse("pauli string", format!("bad factor `{tok}`")))?;
            let label: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::parse("pauli string", format!("bad qubit label in `{tok}`")))?;
            if label == 0 {
                return Err(Error::parse("pauli string", "qubit labels are 1-based"));
            }
            factors.push((label - 1, axis));
        }
        Ok(Self::from_factors(n_qubits, factors)?.with_sign(if negative { -1 } else { 1 }))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        let factors = self.factors();
        if factors.is_empty() {
            return f.write_str("I");
        }
        let parts: Vec<String> = factors.iter().map(|(q, a)| format!("{}{}", a.letter(), q + 1)).collect();
        f.write_str(&parts.join(" "))
    }
}

/// `a * b = phase * c`, with `c` returned with a `+` sign.
pub fn pauli_product(a: &PauliString, b: &PauliString) -> Result<(PauliString, Phase)> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::QubitMismatch { left: a.n_qubits, right: b.n_qubits });
    }
    let x = a.x ^ b.x;
    let z = a.z ^ b.z;
    let mut k = (a.x & a.z).count_ones() as i64 + (b.x & b.z).count_ones() as i64
        + 2 * (a.z & b.x).count_ones() as i64
        - (x & z).count_ones() as i64;
    if a.negative ^ b.negative {
        k += 2;
    }
    Ok((PauliString { n_qubits: a.n_qubits, x, z, negative: false }, Phase::from_exponent(k)))
}

/// Product of two commuting strings as a signed Hermitian string.
pub fn hermitian_product(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    let (c, phase) = pauli_product(a, b)?;
    if !phase.is_real() {
        return Err(Error::parse("pauli product", format!("{a} and {b} anticommute")));
    }
    Ok(if phase == Phase::MINUS_ONE { c.negated() } else { c })
}

pub fn commutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::QubitMismatch { left: a.n_qubits, right: b.n_qubits });
    }
    Ok(a.anticommuting_sites(b) % 2 == 0)
}

/// Matrix-free `P v`.
pub fn apply_pauli(p: &PauliString, v: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(p.n_qubits, v.len())?;
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (b, &amp) in v.iter().enumerate() {
        let (t, c) = p.action(b);
        out[t] = c * amp;
    }
    Ok(out)
}

/// `<v|P|v>` without materializing `P v`.
pub fn expectation(p: &PauliString, v: &[Complex64]) -> Result<Complex64> {
    check_len(p.n_qubits, v.len())?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, &amp) in v.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let (t, c) = p.action(b);
        acc += v[t].conj() * c * amp;
    }
    Ok(acc)
}

fn check_len(n_qubits: usize, len: usize) -> Result<()> {
    if n_qubits >= usize::BITS as usize || len != 1usize << n_qubits {
        return Err(Error::LengthMismatch { len, n_qubits });
    }
    Ok(())
}

pub fn to_sparse(p: &PauliString) -> Result<SparseOperator> {
    to_sparse_with_limit(p, DEFAULT_MAX_QUBITS)
}

pub fn to_sparse_with_limit(p: &PauliString, max_qubits: usize) -> Result<SparseOperator> {
    if p.n_qubits > max_qubits {
        return Err(Error::DimensionOverflow { n_qubits: p.n_qubits, max: max_qubits });
    }
    let dim = 1usize << p.n_qubits;
    let mut triplets = Vec::with_capacity(dim);
    for b in 0..dim {
        let (t, c) = p.action(b);
        triplets.push((t, b, c));
    }
    SparseOperator::from_triplets(dim, triplets)
}

/// Compressed-row complex matrix over a power-of-two dimensional space.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Duplicate coordinates are summed; exact zeros are dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Result<Self> {
        if !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!("operator dimension {dim} is not a power of two")));
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::InvalidState(format!("entry ({r}, {c}) outside dimension {dim}")));
            }
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        let mut kept_cols = Vec::with_capacity(cols.len());
        let mut kept_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v.norm_sqr() == 0.0 {
                continue;
            }
            row_ptr[r + 1] += 1;
            kept_cols.push(c);
            kept_vals.push(v);
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut op = SparseOperator { dim, row_ptr, cols: kept_cols, vals: kept_vals, hermitian: false };
        op.hermitian = op.check_hermitian(1e-12);
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.row(r).find(|&(cc, _)| cc == c).map(|(_, v)| v).unwrap_or_default()
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim).map(|r| self.row(r).map(|(c, a)| a * v[c]).sum()).collect()
    }

    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    fn check_hermitian(&self, tol: f64) -> bool {
        (0..self.dim).all(|r| self.row(r).all(|(c, v)| (self.get(c, r).conj() - v).norm() <= tol))
    }
}
