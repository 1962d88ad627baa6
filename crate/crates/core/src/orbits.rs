//! Orbits of matrix groups on vectors and subspaces of F_p^m.
//!
//! Points are numbered by a perfect index (base-p encoding for vectors,
//! [`GrassmannIndex`] for subspaces), so a dense bitset records visited
//! points. Orbits are discovered by scanning indices upwards, which makes
//! the first point of each orbit its minimal-index representative.

use std::collections::HashMap;

use crate::fp::FastMod;
use crate::matfp::{FpMatrix, GrassmannIndex, SubspaceCanon, IMAGE_MAX_K, IMAGE_MAX_M};
use crate::{Error, Result};

/// A group action on the points `0..size()` given by generator images.
pub trait Action: Sync {
    fn size(&self) -> u64;
    fn num_gens(&self) -> usize;
    fn apply(&self, x: u64, gen: usize) -> u64;
}

fn check_invertible(gens: &[FpMatrix], m: usize) -> Result<()> {
    for g in gens {
        if g.rows() != m || g.cols() != m {
            return Err(Error::Precondition(format!("generator is {}x{}, expected {m}x{m}", g.rows(), g.cols())));
        }
        if !g.is_invertible() {
            return Err(Error::Singular);
        }
    }
    Ok(())
}

/// Row vectors `v -> v g`; the point `x` is the vector with base-p digits
/// of `x`, first coordinate most significant. Point 0 is the zero vector.
pub struct VectorAction {
    p: u32,
    m: usize,
    gens: Vec<FpMatrix>,
}

impl VectorAction {
    pub fn new(p: u32, m: usize, gens: Vec<FpMatrix>) -> Result<Self> {
        check_invertible(&gens, m)?;
        Ok(Self { p, m, gens })
    }

    pub fn decode(&self, mut x: u64) -> Vec<u32> {
        let mut v = vec![0u32; self.m];
        for slot in v.iter_mut().rev() {
            *slot = (x % self.p as u64) as u32;
            x /= self.p as u64;
        }
        v
    }

    pub fn encode(&self, v: &[u32]) -> u64 {
        v.iter().fold(0u64, |acc, &c| acc * self.p as u64 + c as u64)
    }
}

impl Action for VectorAction {
    fn size(&self) -> u64 {
        (self.p as u64).pow(self.m as u32)
    }

    fn num_gens(&self) -> usize {
        self.gens.len()
    }

    fn apply(&self, x: u64, gen: usize) -> u64 {
        self.encode(&self.gens[gen].apply_row(&self.decode(x)))
    }
}

/// Subspaces of a fixed dimension under `U -> U g`, indexed by
/// [`GrassmannIndex`]. Dimension one uses a fast path without allocation
/// of echelon forms.
pub struct SubspaceAction {
    p: u32,
    m: usize,
    index: GrassmannIndex,
    gens: Vec<FpMatrix>,
    /// Offsets of the pivot patterns for one-dimensional subspaces.
    line_offsets: Vec<u64>,
    inv_table: Vec<u32>,
    /// Row-major generator entries for the line fast path.
    flat: Vec<Vec<u32>>,
    fm: FastMod,
}

const LINE_MAX: usize = 32;


impl SubspaceAction {
    pub fn new(p: u32, m: usize, dim: usize, gens: Vec<FpMatrix>) -> Result<Self> {
        check_invertible(&gens, m)?;
        if dim == 0 || dim >= m {
            return Err(Error::Precondition(format!("subspace dimension {dim} must lie strictly between 0 and {m}")));
        }
        let index = GrassmannIndex::new(p, m, dim);
        let mut line_offsets = Vec::with_capacity(m);
        let mut acc = 0u64;
        for c in 0..m {
            line_offsets.push(acc);
            acc += (p as u64).pow((m - 1 - c) as u32);
        }
        let mut inv_table = vec![0u32; p as usize];
        for x in 1..p {
            inv_table[x as usize] = (1..p).find(|&y| x * y % p == 1).unwrap();
        }
        let flat = gens.iter().map(|g| g.data().to_vec()).collect();
        Ok(Self { p, m, index, gens, line_offsets, inv_table, flat, fm: FastMod::new(p) })
    }

    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    pub fn subspace(&self, x: u64) -> SubspaceCanon {
        self.index.unrank(x)
    }

    pub fn rank(&self, s: &SubspaceCanon) -> u64 {
        self.index.rank(s)
    }

    fn line_rank(&self, v: &[u32]) -> u64 {
        let c = v.iter().position(|&x| x != 0).expect("nonzero vector");
        let s = self.inv_table[v[c] as usize];
        let mut idx = 0u64;
        for &x in &v[c + 1..] {
            idx = idx * self.p as u64 + (x * s % self.p) as u64;
        }
        self.line_offsets[c] + idx
    }

    /// Image of line `x` under generator `gen` on stack buffers.
    #[inline]
    fn line_apply(&self, x: u64, gen: usize) -> u64 {
        let (m, p, fm) = (self.m, self.p as u64, self.fm);
        let c = self.line_offsets.partition_point(|&o| o <= x) - 1;
        let mut rest = x - self.line_offsets[c];
        let mut v = [0u32; LINE_MAX];
        v[c] = 1;
        for slot in v[c + 1..m].iter_mut().rev() {
            if rest <= u32::MAX as u64 {
                let r = rest as u32;
                let q = fm.quotient(r);
                *slot = r - q * self.p;
                rest = q as u64;
            } else {
                *slot = (rest % p) as u32;
                rest /= p;
            }
        }
        let mat = &self.flat[gen];
        let mut acc = [0u32; LINE_MAX];
        for k in c..m {
            let a = v[k];
            if a != 0 {
                for (slot, &e) in acc[..m].iter_mut().zip(&mat[k * m..(k + 1) * m]) {
                    *slot += a * e;
                }
            }
        }
        let mut lead = m;
        for (k, slot) in acc[..m].iter_mut().enumerate() {
            *slot = fm.reduce(*slot);
            if lead == m && *slot != 0 {
                lead = k;
            }
        }
        let s = self.inv_table[acc[lead] as usize];
        let mut idx = 0u64;
        for &y in &acc[lead + 1..m] {
            idx = idx * p + fm.reduce(y * s) as u64;
        }
        self.line_offsets[lead] + idx
    }

    fn line_unrank(&self, x: u64) -> Vec<u32> {
        let c = self.line_offsets.partition_point(|&o| o <= x) - 1;
        let mut rest = x - self.line_offsets[c];
        let mut v = vec![0u32; self.m];
        v[c] = 1;
        for slot in v[c + 1..].iter_mut().rev() {
            *slot = (rest % self.p as u64) as u32;
            rest /= self.p as u64;
        }
        v
    }
}

impl Action for SubspaceAction {
    fn size(&self) -> u64 {
        self.index.len()
    }

    fn num_gens(&self) -> usize {
        self.gens.len()
    }

    fn apply(&self, x: u64, gen: usize) -> u64 {
        if self.index.dim() == 1 && self.m <= LINE_MAX {
            self.line_apply(x, gen)
        } else if self.index.dim() == 1 {
            let v = self.line_unrank(x);
            self.line_rank(&self.gens[gen].apply_row(&v))
        } else if self.index.dim() <= IMAGE_MAX_K && self.m <= IMAGE_MAX_M {
            self.index.image(x, &self.flat[gen], self.fm, &self.inv_table)
        } else {
            self.index.rank(&self.index.unrank(x).act(&self.gens[gen]))
        }
    }
}

/// Breadth-first spanning tree of one orbit.
#[derive(Clone, Debug, Default)]
pub struct OrbitTree {
    /// Points in discovery order; `order[0]` is the representative.
    pub order: Vec<u64>,
    /// For each position past the first: (position of predecessor, generator).
    pub parent: Vec<(u32, u32)>,
    pub position: HashMap<u64, u32>,
}

impl OrbitTree {
    /// Generator word from the representative to the point at `pos`.
    pub fn word_to(&self, mut pos: u32) -> Vec<usize> {
        let mut w = Vec::new();
        while pos != 0 {
            let (prev, g) = self.parent[pos as usize];
            w.push(g as usize);
            pos = prev;
        }
        w.reverse();
        w
    }
}

/// One orbit in a partition.
#[derive(Clone, Debug)]
pub struct OrbitInfo {
    pub rep: u64,
    pub size: u64,
    pub tree: Option<OrbitTree>,
}

struct Bitset(Vec<u64>);

impl Bitset {
    fn new(n: u64) -> Self {
        Bitset(vec![0; n.div_ceil(64) as usize])
    }

    #[inline]
    fn test_and_set(&mut self, i: u64) -> bool {
        let (w, b) = ((i / 64) as usize, i % 64);
        let old = self.0[w] >> b & 1 == 1;
        self.0[w] |= 1 << b;
        old
    }

    fn first_clear_from(&self, start: u64, n: u64) -> Option<u64> {
        let mut i = start;
        while i < n {
            let w = self.0[(i / 64) as usize];
            if w == u64::MAX && i % 64 == 0 {
                i += 64;
                continue;
            }
            if w >> (i % 64) & 1 == 0 {
                return Some(i);
            }
            i += 1;
        }
        None
    }
}

/// Partitions the points `start..size()` into orbits. Points below `start`
/// are excluded (used to skip the zero vector); the action must map them to
/// themselves. `want_tree(rep)` decides per orbit whether a spanning tree
/// is recorded.
pub fn partition<A: Action>(action: &A, start: u64, mut want_tree: impl FnMut(u64) -> bool) -> Vec<OrbitInfo> {
    let n = action.size();
    let mut seen = Bitset::new(n);
    let mut out = Vec::new();
    let mut cursor = start;
    let mut queue: Vec<u64> = Vec::new();
    while let Some(rep) = seen.first_clear_from(cursor, n) {
        cursor = rep + 1;
        seen.test_and_set(rep);
        let mut tree = want_tree(rep).then(|| OrbitTree {
            order: vec![rep],
            parent: vec![(0, 0)],
            position: HashMap::from([(rep, 0)]),
        });
        queue.clear();
        queue.push(rep);
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            for g in 0..action.num_gens() {
                let y = action.apply(x, g);
                if !seen.test_and_set(y) {
                    if let Some(t) = tree.as_mut() {
                        t.position.insert(y, t.order.len() as u32);
                        t.order.push(y);
                        t.parent.push((head as u32, g as u32));
                    }
                    queue.push(y);
                }
            }
            head += 1;
        }
        out.push(OrbitInfo { rep, size: queue.len() as u64, tree });
    }
    out
}

/// Orbit representatives and sizes only, level by level on the current
/// rayon pool. A frontier is held as a list while short and as a bitset
/// once it exceeds `size / 64` points, so memory stays within three
/// bitsets however large an orbit is.
pub fn partition_parallel<A: Action>(action: &A, start: u64) -> Vec<(u64, u64)> {
    partition_levels(action, start, (action.size() / 64).max(1024) as usize)
}

fn partition_levels<A: Action>(action: &A, start: u64, threshold: usize) -> Vec<(u64, u64)> {
    use rayon::prelude::*;
    use std::sync::atomic::{AtomicU64, Ordering};
    let n = action.size();
    let words = n.div_ceil(64) as usize;
    let bitset = || -> Vec<AtomicU64> { (0..words).map(|_| AtomicU64::new(0)).collect() };
    let seen = bitset();
    let mark = |set: &[AtomicU64], i: u64| -> bool {
        let bit = 1u64 << (i % 64);
        set[(i / 64) as usize].fetch_or(bit, Ordering::Relaxed) & bit == 0
    };
    let mut dense: Option<(Vec<AtomicU64>, Vec<AtomicU64>)> = None;
    let mut out = Vec::new();
    let mut cursor = start;
    while cursor < n {
        let w = seen[(cursor / 64) as usize].load(Ordering::Relaxed);
        if w == u64::MAX && cursor % 64 == 0 {
            cursor += 64;
            continue;
        }
        if w >> (cursor % 64) & 1 == 1 {
            cursor += 1;
            continue;
        }
        let rep = cursor;
        mark(&seen, rep);
        let mut frontier = vec![rep];
        let mut in_bits = false;
        let mut size = 1u64;
        loop {
            if !in_bits {
                let next: Vec<u64> = frontier
                    .par_iter()
                    .flat_map_iter(|&x| (0..action.num_gens()).map(move |g| action.apply(x, g)))
                    .filter(|&y| mark(&seen, y))
                    .collect();
                if next.is_empty() {
                    break;
                }
                size += next.len() as u64;
                if next.len() > threshold {
                    let (cur, _) = dense.get_or_insert_with(|| (bitset(), bitset()));
                    for &y in &next {
                        mark(cur, y);
                    }
                    in_bits = true;
                    frontier = Vec::new();
                } else {
                    frontier = next;
                }
            } else {
                let (cur, nxt) = dense.as_mut().expect("dense frontier allocated");
                let found: u64 = cur
                    .par_iter()
                    .enumerate()
                    .map(|(wi, word)| {
                        let mut bits = word.swap(0, Ordering::Relaxed);
                        let mut found = 0;
                        while bits != 0 {
                            let x = wi as u64 * 64 + bits.trailing_zeros() as u64;
                            bits &= bits - 1;
                            for g in 0..action.num_gens() {
                                let y = action.apply(x, g);
                                if mark(&seen, y) {
                                    mark(nxt, y);
                                    found += 1;
                                }
                            }
                        }
                        found
                    })
                    .sum();
                std::mem::swap(cur, nxt);
                if found == 0 {
                    break;
                }
                size += found;
                if found as usize <= threshold {
                    frontier = cur
                        .iter()
                        .enumerate()
                        .flat_map(|(wi, word)| {
                            let mut bits = word.swap(0, Ordering::Relaxed);
                            std::iter::from_fn(move || {
                                (bits != 0).then(|| {
                                    let x = wi as u64 * 64 + bits.trailing_zeros() as u64;
                                    bits &= bits - 1;
                                    x
                                })
                            })
                        })
                        .collect();
                    in_bits = false;
                }
            }
        }
        out.push((rep, size));
        cursor += 1;
    }
    out
}

/// Result of an orbit computation on vectors or subspaces.
#[derive(Clone, Debug)]
pub struct OrbitRun {
    /// Basis rows of each representative (a single row for vectors).
    pub representatives: Vec<Vec<Vec<u32>>>,
    pub orbit_sizes: Vec<u64>,
    pub trees: Vec<OrbitTree>,
    pub gens: Vec<FpMatrix>,
    pub p: u32,
    pub m: usize,
    /// 0 for vector orbits.
    pub dim: usize,
    /// Action index of each representative.
    pub rep_points: Vec<u64>,
}

/// Orbits on nonzero vectors. With `scalar_closure` the scalar matrices are
/// adjoined, so orbits correspond to orbits on projective points.
pub fn vector_orbits(gens: &[FpMatrix], m: usize, p: u32, scalar_closure: bool) -> Result<OrbitRun> {
    let mut all = gens.to_vec();
    if scalar_closure {
        let w = crate::fp::find_primitive_root(p)?;
        all.push(FpMatrix::identity(p, m).scale(w));
    }
    let action = VectorAction::new(p, m, all.clone())?;
    let infos = partition(&action, 1, |_| true);
    Ok(OrbitRun {
        representatives: infos.iter().map(|o| vec![action.decode(o.rep)]).collect(),
        orbit_sizes: infos.iter().map(|o| o.size).collect(),
        rep_points: infos.iter().map(|o| o.rep).collect(),
        trees: infos.into_iter().map(|o| o.tree.unwrap()).collect(),
        gens: all,
        p,
        m,
        dim: 0,
    })
}

/// Orbits on `dim`-dimensional subspaces of F_p^m.
pub fn subspace_orbits(gens: &[FpMatrix], dim: usize, m: usize, p: u32) -> Result<OrbitRun> {
    let action = SubspaceAction::new(p, m, dim, gens.to_vec())?;
    let infos = partition(&action, 0, |_| true);
    Ok(OrbitRun {
        representatives: infos.iter().map(|o| action.subspace(o.rep).basis().to_vec()).collect(),
        orbit_sizes: infos.iter().map(|o| o.size).collect(),
        rep_points: infos.iter().map(|o| o.rep).collect(),
        trees: infos.into_iter().map(|o| o.tree.unwrap()).collect(),
        gens: gens.to_vec(),
        p,
        m,
        dim,
    })
}

/// A group word: generator indices with an inversion flag, applied left
/// to right.
pub type Word = Vec<(usize, bool)>;

/// Evaluates a word on matrices.
pub fn eval_word(word: &[(usize, bool)], gens: &[FpMatrix]) -> FpMatrix {
    let m = gens[0].rows();
    let p = gens[0].p();
    word.iter().fold(FpMatrix::identity(p, m), |acc, &(g, inv)| {
        let x = if inv { gens[g].inverse().expect("generators are invertible") } else { gens[g].clone() };
        acc.matmul(&x)
    })
}

/// Schreier triples `(pos, gen, dest)` of a tree, skipping tree edges.
pub fn schreier_triples<'a, A: Action>(
    action: &'a A,
    tree: &'a OrbitTree,
) -> impl Iterator<Item = (u32, usize, u32)> + 'a {
    (0..tree.order.len() as u32).flat_map(move |pos| {
        (0..action.num_gens()).filter_map(move |g| {
            let y = action.apply(tree.order[pos as usize], g);
            let dest = tree.position[&y];
            let edge = dest != 0 && tree.parent[dest as usize] == (pos, g as u32);
            (!edge).then_some((pos, g, dest))
        })
    })
}

/// Schreier generators `t_x g t_{xg}^-1` of the stabilizer of a
/// representative, deduplicated by matrix value.
pub fn stabilizer_words(run: &OrbitRun, rep_index: usize) -> Result<Vec<Word>> {
    let tree = &run.trees[rep_index];
    let words = |pos: u32| -> Word { tree.word_to(pos).into_iter().map(|g| (g, false)).collect() };
    let mut seen: HashMap<Vec<u32>, ()> = HashMap::new();
    let mut out = Vec::new();
    let identity = FpMatrix::identity(run.p, run.m);
    let mut check = |w: Word| {
        let mat = eval_word(&w, &run.gens);
        if mat != identity && seen.insert(mat.data().to_vec(), ()).is_none() {
            out.push(w);
        }
    };
    if run.dim == 0 {
        let action = VectorAction::new(run.p, run.m, run.gens.clone())?;
        for (pos, g, dest) in schreier_triples(&action, tree) {
            check(schreier_word(&words(pos), g, &words(dest)));
        }
    } else {
        let action = SubspaceAction::new(run.p, run.m, run.dim, run.gens.clone())?;
        for (pos, g, dest) in schreier_triples(&action, tree) {
            check(schreier_word(&words(pos), g, &words(dest)));
        }
    }
    Ok(out)
}

fn schreier_word(tx: &Word, g: usize, ty: &Word) -> Word {
    let mut w = tx.clone();
    w.push((g, false));
    w.extend(ty.iter().rev().map(|&(h, inv)| (h, !inv)));
    w
}

/// All elements of the matrix group generated by `gens` (for oracles on
/// small groups).
pub fn closure(gens: &[FpMatrix], cap: usize) -> Result<Vec<FpMatrix>> {
    let m = gens[0].rows();
    let p = gens[0].p();
    let id = FpMatrix::identity(p, m);
    let mut seen: HashMap<Vec<u32>, ()> = HashMap::from([(id.data().to_vec(), ())]);
    let mut elems = vec![id];
    let mut head = 0;
    while head < elems.len() {
        for g in gens {
            let x = elems[head].matmul(g);
            if seen.insert(x.data().to_vec(), ()).is_none() {
                if elems.len() >= cap {
                    return Err(Error::ResourceCap(format!("matrix group exceeds {cap} elements")));
                }
                elems.push(x);
            }
        }
        head += 1;
    }
    Ok(elems)
}
