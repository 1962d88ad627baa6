//! Dense matrices and subspaces over F_p.
//!
//! Vectors are rows and matrices act from the right, `v -> v * g`.

use std::fmt;

use crate::fp::{FastMod, PrimeField};
use crate::{Error, Result};

#[inline]
fn inv_mod(a: u32, p: u32) -> u32 {
    let mut base = a % p;
    let mut e = p - 2;
    let mut acc = 1u32;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix(p={}, {}x{})", self.p, self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl FpMatrix {
    pub fn new(p: u32, rows: usize, cols: usize, data: Vec<u32>) -> Self {
        assert_eq!(rows * cols, data.len(), "shape does not match data length");
        let data = data.into_iter().map(|x| x % p).collect();
        Self { p, rows, cols, data }
    }

    /// Builds a matrix from signed entries, reducing them mod p.
    pub fn from_signed(p: u32, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let data = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), c);
                row.iter().map(|&x| x.rem_euclid(p as i64) as u32)
            })
            .collect();
        Self { p, rows: r, cols: c, data }
    }

    pub fn from_rows(p: u32, cols: usize, rows: &[Vec<u32>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols);
            data.extend(row.iter().map(|&x| x % p));
        }
        Self { p, rows: rows.len(), cols, data }
    }

    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        Self { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn diagonal(p: u32, diag: &[u32]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(p, n, n);
        for (i, &x) in diag.iter().enumerate() {
            m.data[i * n + i] = x % p;
        }
        m
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn matmul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.rows, "non-conformable product");
        assert_eq!(self.p, other.p);
        let p = self.p as u64;
        let mut out = vec![0u32; self.rows * other.cols];
        let mut acc = vec![0u64; other.cols];
        for r in 0..self.rows {
            acc.iter_mut().for_each(|x| *x = 0);
            for k in 0..self.cols {
                let a = self.get(r, k) as u64;
                if a == 0 {
                    continue;
                }
                for (c, slot) in acc.iter_mut().enumerate() {
                    *slot += a * other.get(k, c) as u64;
                }
            }
            for c in 0..other.cols {
                out[r * other.cols + c] = (acc[c] % p) as u32;
            }
        }
        FpMatrix { p: self.p, rows: self.rows, cols: other.cols, data: out }
    }

    /// Row vector times matrix.
    pub fn apply_row(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.rows);
        let p = self.p as u64;
        let mut acc = vec![0u64; self.cols];
        for (k, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (c, slot) in acc.iter_mut().enumerate() {
                *slot += a as u64 * self.get(k, c) as u64;
            }
        }
        acc.into_iter().map(|x| (x % p) as u32).collect()
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut m = Self::zeros(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.data[c * self.rows + r] = self.get(r, c);
            }
        }
        m
    }

    pub fn scale(&self, s: u32) -> FpMatrix {
        let p = self.p;
        FpMatrix {
            p,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * (s % p) % p).collect(),
        }
    }

    pub fn det(&self) -> u32 {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let p = self.p;
        let mut a = self.data.clone();
        let mut det = 1u32;
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| a[r * n + col] != 0) else {
                return 0;
            };
            if piv != col {
                for c in 0..n {
                    a.swap(piv * n + c, col * n + c);
                }
                det = (p - det) % p;
            }
            let pv = a[col * n + col];
            det = det * pv % p;
            let pinv = inv_mod(pv, p);
            for r in col + 1..n {
                let f = a[r * n + col] * pinv % p;
                if f == 0 {
                    continue;
                }
                for c in col..n {
                    a[r * n + c] = (a[r * n + c] + p * p - f * a[col * n + c] % p) % p;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<FpMatrix> {
        if !self.is_square() {
            return Err(Error::Singular);
        }
        let n = self.rows;
        let p = self.p;
        let w = 2 * n;
        let mut a = vec![0u32; n * w];
        for r in 0..n {
            for c in 0..n {
                a[r * w + c] = self.get(r, c);
            }
            a[r * w + n + r] = 1;
        }
        for col in 0..n {
            let piv = (col..n).find(|&r| a[r * w + col] != 0).ok_or(Error::Singular)?;
            if piv != col {
                for c in 0..w {
                    a.swap(piv * w + c, col * w + c);
                }
            }
            let pinv = inv_mod(a[col * w + col], p);
            for c in 0..w {
                a[col * w + c] = a[col * w + c] * pinv % p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * w + col];
                if f == 0 {
                    continue;
                }
                for c in 0..w {
                    a[r * w + c] = (a[r * w + c] + p * p - f * a[col * w + c]) % p;
                }
            }
        }
        let mut out = Self::zeros(p, n, n);
        for r in 0..n {
            for c in 0..n {
                out.data[r * n + c] = a[r * w + n + c];
            }
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        self.rref().dim()
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Canonical basis of the row space.
    pub fn rref(&self) -> SubspaceCanon {
        SubspaceCanon::from_rows(self.p, self.cols, &self.to_rows())
    }

    /// Kernel of `v -> v * self`, as a subspace of F_p^rows.
    pub fn left_kernel(&self) -> SubspaceCanon {
        // v M = 0  <=>  M^T v^T = 0, i.e. v is orthogonal to every column.
        SubspaceCanon::from_rows(self.p, self.rows, &self.transpose().to_rows()).orthogonal_complement()
    }
}

pub fn rref(m: &FpMatrix) -> SubspaceCanon {
    m.rref()
}

pub fn det(m: &FpMatrix) -> u32 {
    m.det()
}

pub fn inverse(m: &FpMatrix) -> Result<FpMatrix> {
    m.inverse()
}

pub fn matmul(a: &FpMatrix, b: &FpMatrix) -> FpMatrix {
    a.matmul(b)
}

/// Reduces `rows` in place to reduced row-echelon form and returns the
/// pivot columns. Zero rows are dropped.
pub fn rref_rows(p: u32, cols: usize, rows: &mut Vec<Vec<u32>>) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][col] % p != 0) else {
            continue;
        };
        rows.swap(r, piv);
        let pinv = inv_mod(rows[r][col], p);
        for x in rows[r].iter_mut() {
            *x = *x * pinv % p;
        }
        for i in 0..rows.len() {
            if i == r {
                continue;
            }
            let f = rows[i][col] % p;
            if f == 0 {
                continue;
            }
            for c in 0..cols {
                rows[i][c] = (rows[i][c] + p * p - f * rows[r][c]) % p;
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// A subspace of F_p^ambient stored by its reduced row-echelon basis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubspaceCanon {
    p: u32,
    ambient: usize,
    basis: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl fmt::Debug for SubspaceCanon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(p={}, ambient={}, basis={:?})", self.p, self.ambient, self.basis)
    }
}

impl SubspaceCanon {
    pub fn from_rows(p: u32, ambient: usize, rows: &[Vec<u32>]) -> Self {
        let mut basis: Vec<Vec<u32>> = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), ambient, "vector length does not match ambient dimension");
                r.iter().map(|&x| x % p).collect()
            })
            .collect();
        let pivots = rref_rows(p, ambient, &mut basis);
        Self { p, ambient, basis, pivots }
    }

    pub fn zero(p: u32, ambient: usize) -> Self {
        Self { p, ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(p: u32, ambient: usize) -> Self {
        Self::from_rows(p, ambient, &FpMatrix::identity(p, ambient).to_rows())
    }

    /// Span of the given standard basis vectors.
    pub fn coordinate(p: u32, ambient: usize, coords: &[usize]) -> Self {
        let rows: Vec<Vec<u32>> = coords
            .iter()
            .map(|&c| {
                let mut v = vec![0; ambient];
                v[c] = 1;
                v
            })
            .collect();
        Self::from_rows(p, ambient, &rows)
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn ambient(&self) -> usize {
        self.ambient
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Flattened basis entries; equal keys exactly for equal subspaces.
    pub fn key(&self) -> Vec<u32> {
        self.basis.iter().flatten().copied().collect()
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        rref_rows(self.p, self.ambient, &mut rows).len() == self.dim()
    }

    pub fn sum(&self, other: &SubspaceCanon) -> SubspaceCanon {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Self::from_rows(self.p, self.ambient, &rows)
    }

    pub fn intersection(&self, other: &SubspaceCanon) -> SubspaceCanon {
        self.orthogonal_complement()
            .sum(&other.orthogonal_complement())
            .orthogonal_complement()
    }

    /// All vectors orthogonal to `self` under the standard bilinear form.
    pub fn orthogonal_complement(&self) -> SubspaceCanon {
        let p = self.p;
        let m = self.ambient;
        let free: Vec<usize> = (0..m).filter(|c| !self.pivots.contains(c)).collect();
        let rows: Vec<Vec<u32>> = free
            .iter()
            .map(|&f| {
                let mut v = vec![0u32; m];
                v[f] = 1;
                for (r, &pc) in self.pivots.iter().enumerate() {
                    v[pc] = (p - self.basis[r][f]) % p;
                }
                v
            })
            .collect();
        Self::from_rows(p, m, &rows)
    }

    /// Image under the right action of an invertible matrix.
    pub fn act(&self, g: &FpMatrix) -> SubspaceCanon {
        let rows: Vec<Vec<u32>> = self.basis.iter().map(|r| g.apply_row(r)).collect();
        Self::from_rows(self.p, self.ambient, &rows)
    }
}

pub fn orthogonal_complement(s: &SubspaceCanon) -> SubspaceCanon {
    s.orthogonal_complement()
}

/// Number of `k`-dimensional subspaces of F_p^m.
pub fn gaussian_binomial(m: usize, k: usize, p: u32) -> u128 {
    if k > m {
        return 0;
    }
    let p = p as u128;
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..k {
        num *= p.pow((m - i) as u32) - 1;
        den *= p.pow((i + 1) as u32) - 1;
    }
    num / den
}

pub fn gl_order(n: usize, p: u32) -> u128 {
    checked_gl_order(n, p).expect("|GL(n, p)| fits in u128")
}

/// `|GL(n, p)|`, or `None` when it overflows `u128`.
pub fn checked_gl_order(n: usize, p: u32) -> Option<u128> {
    let p = p as u128;
    let pn = p.checked_pow(n as u32)?;
    (0..n).try_fold(1u128, |acc, i| acc.checked_mul(pn - p.pow(i as u32)))
}

/// A small generating set of GL(n, p).
pub fn gl_generators(n: usize, field: &PrimeField) -> Vec<FpMatrix> {
    let p = field.p();
    let mut diag = vec![1u32; n];
    diag[0] = field.generator();
    let mut gens = vec![FpMatrix::diagonal(p, &diag)];
    if n >= 2 {
        let mut cycle = FpMatrix::zeros(p, n, n);
        for i in 0..n - 1 {
            cycle.set(i, i + 1, 1);
        }
        cycle.set(n - 1, 0, p - 1);
        gens.push(cycle);
        let mut tv = FpMatrix::identity(p, n);
        tv.set(0, 1, 1);
        gens.push(tv);
    }
    gens
}

/// Perfect ranking of the `k`-dimensional subspaces of F_p^m onto
/// `0..gaussian_binomial(m, k, p)`.
///
/// Subspaces are grouped by pivot pattern (lexicographic in the pivot
/// columns); inside a pattern the free entries of the echelon basis, read
/// row by row, form a base-p number.
#[derive(Debug, Clone)]
pub struct GrassmannIndex {
    p: u32,
    m: usize,
    k: usize,
    patterns: Vec<Pattern>,
    by_mask: std::collections::HashMap<u32, usize>,
    /// Pattern number by pivot mask, filled when `m <= IMAGE_MAX_M`.
    mask_table: Vec<u32>,
    total: u64,
}

/// Size limits of [`GrassmannIndex::image`].
pub const IMAGE_MAX_K: usize = 4;
pub const IMAGE_MAX_M: usize = 16;

#[derive(Debug, Clone)]
struct Pattern {
    pivots: Vec<usize>,
    /// Free positions as (row, col), in reading order.
    free: Vec<(usize, usize)>,
    offset: u64,
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in start..m {
            if m - c < k - cur.len() {
                break;
            }
            cur.push(c);
            rec(c + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

impl GrassmannIndex {
    pub fn new(p: u32, m: usize, k: usize) -> Self {
        assert!(k <= m && m <= 32);
        let mut patterns = Vec::new();
        let mut by_mask = std::collections::HashMap::new();
        let mut offset = 0u64;
        for pivots in combinations(m, k) {
            let mut free = Vec::new();
            for (r, &pc) in pivots.iter().enumerate() {
                for c in pc + 1..m {
                    if !pivots.contains(&c) {
                        free.push((r, c));
                    }
                }
            }
            let mask = pivots.iter().fold(0u32, |acc, &c| acc | 1 << c);
            by_mask.insert(mask, patterns.len());
            let count = (p as u64).pow(free.len() as u32);
            patterns.push(Pattern { pivots, free, offset });
            offset += count;
        }
        let mut mask_table = Vec::new();
        if m <= IMAGE_MAX_M {
            mask_table = vec![u32::MAX; 1 << m];
            for (&mask, &i) in &by_mask {
                mask_table[mask as usize] = i as u32;
            }
        }
        Self { p, m, k, patterns, by_mask, mask_table, total: offset }
    }

    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn ambient(&self) -> usize {
        self.m
    }

    pub fn rank(&self, s: &SubspaceCanon) -> u64 {
        debug_assert_eq!(s.dim(), self.k);
        let mask = s.pivots().iter().fold(0u32, |acc, &c| acc | 1 << c);
        let pat = &self.patterns[self.by_mask[&mask]];
        let mut idx = 0u64;
        for &(r, c) in &pat.free {
            idx = idx * self.p as u64 + s.basis()[r][c] as u64;
        }
        pat.offset + idx
    }

    /// Index of the image of subspace `idx` under the row-major `m x m`
    /// matrix `mat`, which must be invertible. `inv` maps each residue to
    /// its inverse. Requires `k <= IMAGE_MAX_K` and `m <= IMAGE_MAX_M`.
    pub fn image(&self, idx: u64, mat: &[u32], fm: FastMod, inv: &[u32]) -> u64 {
        let (m, k, p) = (self.m, self.k, self.p);
        assert!(k <= IMAGE_MAX_K && m <= IMAGE_MAX_M);
        let pi = self.patterns.partition_point(|pt| pt.offset <= idx) - 1;
        let pat = &self.patterns[pi];
        let mut rest = idx - pat.offset;
        let mut rows = [[0u32; IMAGE_MAX_M]; IMAGE_MAX_K];
        for (r, &pc) in pat.pivots.iter().enumerate() {
            rows[r][pc] = 1;
        }
        for &(r, c) in pat.free.iter().rev() {
            if rest <= u32::MAX as u64 {
                let q = fm.quotient(rest as u32);
                rows[r][c] = rest as u32 - q * p;
                rest = q as u64;
            } else {
                rows[r][c] = (rest % p as u64) as u32;
                rest /= p as u64;
            }
        }
        let mut img = [[0u32; IMAGE_MAX_M]; IMAGE_MAX_K];
        for r in 0..k {
            for (c, &a) in rows[r][..m].iter().enumerate() {
                if a != 0 {
                    for (slot, &e) in img[r][..m].iter_mut().zip(&mat[c * m..(c + 1) * m]) {
                        *slot += a * e;
                    }
                }
            }
            for slot in img[r][..m].iter_mut() {
                *slot = fm.reduce(*slot);
            }
        }
        let mut mask = 0u32;
        let mut row = 0;
        for col in 0..m {
            if row == k {
                break;
            }
            let Some(piv) = (row..k).find(|&r| img[r][col] != 0) else { continue };
            img.swap(row, piv);
            let s = inv[img[row][col] as usize];
            for slot in img[row][..m].iter_mut() {
                *slot = fm.reduce(*slot * s);
            }
            for r in 0..k {
                let f = img[r][col];
                if r != row && f != 0 {
                    let (src, dst) = if r < row {
                        let (a, b) = img.split_at_mut(row);
                        (&b[0], &mut a[r])
                    } else {
                        let (a, b) = img.split_at_mut(r);
                        (&a[row], &mut b[0])
                    };
                    for (d, &x) in dst[..m].iter_mut().zip(&src[..m]) {
                        *d = fm.reduce(*d + (p - f) * x);
                    }
                }
            }
            mask |= 1 << col;
            row += 1;
        }
        assert_eq!(row, k, "matrix is singular on the subspace");
        let pat = &self.patterns[self.mask_table[mask as usize] as usize];
        let mut out = 0u64;
        for &(r, c) in &pat.free {
            out = out * p as u64 + img[r][c] as u64;
        }
        pat.offset + out
    }

    pub fn unrank(&self, idx: u64) -> SubspaceCanon {
        assert!(idx < self.total, "subspace index out of range");
        let pi = self.patterns.partition_point(|pt| pt.offset <= idx) - 1;
        let pat = &self.patterns[pi];
        let mut rest = idx - pat.offset;
        let mut basis = vec![vec![0u32; self.m]; self.k];
        for (r, &pc) in pat.pivots.iter().enumerate() {
            basis[r][pc] = 1;
        }
        for &(r, c) in pat.free.iter().rev() {
            basis[r][c] = (rest % self.p as u64) as u32;
            rest /= self.p as u64;
        }
        SubspaceCanon { p: self.p, ambient: self.m, basis, pivots: pat.pivots.clone() }
    }
}

/// Every `dim`-dimensional subspace of F_p^ambient, each once, in index order.
pub fn enumerate_subspaces(ambient: usize, dim: usize, p: u32) -> impl Iterator<Item = SubspaceCanon> {
    let idx = GrassmannIndex::new(p, ambient, dim);
    (0..idx.len()).map(move |i| idx.unrank(i))
}
