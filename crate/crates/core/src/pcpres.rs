//! Weighted power-commutator presentations with all relative orders `p`.
//!
//! Generators are zero-indexed. `power[i]` is the normal form of `a_i^p`
//! and `comm[j][i]` (for `j > i`) that of `[a_j, a_i] = a_j^-1 a_i^-1 a_j a_i`.
//! Normal forms are exponent vectors `a_0^e_0 ... a_{n-1}^e_{n-1}` with
//! entries in `0..p`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Normal form of a group element.
pub type ExponentWord = Vec<u32>;

/// Sparse word: `(generator, exponent)` pairs multiplied left to right.
pub type Letters = Vec<(usize, u32)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Definition {
    /// `a_k = a_i^p`
    Power { i: usize },
    /// `a_k = [a_j, a_i]`, `j > i`
    Comm { j: usize, i: usize },
}

/// Identifies a relation of a presentation.
pub type RelationLabel = Definition;

impl fmt::Display for Definition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Definition::Power { i } => write!(f, "a{}^p", i + 1),
            Definition::Comm { j, i } => write!(f, "[a{},a{}]", j + 1, i + 1),
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct PcPresentation {
    p: u32,
    n: usize,
    d: usize,
    power: Vec<ExponentWord>,
    comm: Vec<Vec<ExponentWord>>,
    weights: Vec<u32>,
    defs: Vec<Option<Definition>>,
    power_letters: Vec<Letters>,
    comm_letters: Vec<Vec<Letters>>,
}

impl fmt::Debug for PcPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PcPresentation(p={}, n={}, d={}, {})", self.p, self.n, self.d, self.relations_string())
    }
}

fn letters_of(w: &[u32]) -> Letters {
    w.iter().enumerate().filter(|(_, &e)| e != 0).map(|(i, &e)| (i, e)).collect()
}

/// Which side of a consistency test disagreed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TestWord {
    /// `(a_k a_j) a_i` vs `a_k (a_j a_i)`
    Associativity { k: usize, j: usize, i: usize },
    /// `(a_j^p) a_i` vs `a_j^(p-1) (a_j a_i)`
    PowerLeft { j: usize, i: usize },
    /// `a_j (a_i^p)` vs `(a_j a_i) a_i^(p-1)`
    PowerRight { j: usize, i: usize },
    /// `a_i (a_i^p)` vs `(a_i^p) a_i`
    PowerSelf { i: usize },
}

/// A failed consistency test with both normal forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inconsistency {
    pub test: TestWord,
    pub lhs: ExponentWord,
    pub rhs: ExponentWord,
}

impl PcPresentation {
    /// Builds a presentation from explicit tables; checks shapes, ranges and
    /// the power-commutator support conditions.
    pub fn new(
        p: u32,
        d: usize,
        power: Vec<ExponentWord>,
        comm: Vec<Vec<ExponentWord>>,
        weights: Vec<u32>,
        defs: Vec<Option<Definition>>,
    ) -> Result<Self> {
        crate::fp::check_prime(p)?;
        let n = power.len();
        let bad = |m: String| Err(Error::Malformed(m));
        if d > n || (n > 0 && d == 0) {
            return bad(format!("d={d} with n={n}"));
        }
        if comm.len() != n || weights.len() != n || defs.len() != n {
            return bad("table sizes disagree with generator count".into());
        }
        for (i, w) in power.iter().enumerate() {
            if w.len() != n {
                return bad(format!("power word {i} has length {}", w.len()));
            }
            if w.iter().any(|&x| x >= p) {
                return bad(format!("power word {i} has an exponent outside 0..p"));
            }
            if w[..=i].iter().any(|&x| x != 0) {
                return bad(format!("a{}^p involves generators not after a{}", i + 1, i + 1));
            }
        }
        for (j, row) in comm.iter().enumerate() {
            if row.len() != j {
                return bad(format!("commutator row {j} has {} entries", row.len()));
            }
            for (i, w) in row.iter().enumerate() {
                if w.len() != n || w.iter().any(|&x| x >= p) {
                    return bad(format!("commutator word [{j},{i}] malformed"));
                }
                if w[..=j].iter().any(|&x| x != 0) {
                    return bad(format!("[a{},a{}] involves generators not after a{}", j + 1, i + 1, j + 1));
                }
            }
        }
        for (k, def) in defs.iter().enumerate() {
            match *def {
                Some(Definition::Power { i }) if i >= k => return bad(format!("definition of a{} uses a later generator", k + 1)),
                Some(Definition::Comm { j, i }) if j >= k || i >= j => {
                    return bad(format!("definition of a{} is not [a_j,a_i] with i<j<k", k + 1))
                }
                _ => {}
            }
        }
        let power_letters = power.iter().map(|w| letters_of(w)).collect();
        let comm_letters = comm.iter().map(|row| row.iter().map(|w| letters_of(w)).collect()).collect();
        Ok(Self { p, n, d, power, comm, weights, defs, power_letters, comm_letters })
    }

    /// Elementary abelian group of rank `d`.
    pub fn elementary_abelian(p: u32, d: usize) -> Result<Self> {
        let power = vec![vec![0; d]; d];
        let comm = (0..d).map(|j| vec![vec![0; d]; j]).collect();
        Self::new(p, d, power, comm, vec![1; d], vec![None; d])
    }

    pub fn builder(p: u32, n: usize) -> PcBuilder {
        PcBuilder::new(p, n)
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    /// Number of generators; the order is `p^n`.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of weight-one generators (minimal generating number).
    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn definitions(&self) -> &[Option<Definition>] {
        &self.defs
    }

    pub fn power_rhs(&self, i: usize) -> &ExponentWord {
        &self.power[i]
    }

    /// Normal form of `[a_j, a_i]` for `j > i`.
    pub fn comm_rhs(&self, j: usize, i: usize) -> &ExponentWord {
        &self.comm[j][i]
    }

    pub fn relation_rhs(&self, label: RelationLabel) -> &ExponentWord {
        match label {
            Definition::Power { i } => &self.power[i],
            Definition::Comm { j, i } => &self.comm[j][i],
        }
    }

    /// All relation labels: powers first, then commutators ordered by `(j, i)`.
    pub fn relation_labels(&self) -> Vec<RelationLabel> {
        let mut out: Vec<RelationLabel> = (0..self.n).map(|i| Definition::Power { i }).collect();
        for j in 0..self.n {
            for i in 0..j {
                out.push(Definition::Comm { j, i });
            }
        }
        out
    }

    /// p-class, the largest weight.
    pub fn class(&self) -> u32 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    pub fn identity(&self) -> ExponentWord {
        vec![0; self.n]
    }

    pub fn generator(&self, i: usize) -> ExponentWord {
        let mut w = self.identity();
        w[i] = 1;
        w
    }

    pub fn order_exponent(&self) -> usize {
        self.n
    }

    /// Right-multiplies the normal form `e` by the letters of `word`.
    pub fn mul_letters(&self, e: &mut [u32], word: &[(usize, u32)]) {
        let p = self.p;
        let mut stack: Vec<(usize, u32)> = Vec::with_capacity(64);
        for &(g, m) in word.iter().rev() {
            push_letter(&mut stack, g, m, p);
        }
        while let Some((g, m)) = stack.pop() {
            let tail_clear = e[g + 1..].iter().all(|&x| x == 0);
            if tail_clear {
                let s = e[g] + m;
                if s >= p {
                    e[g] = s - p;
                    for &(h, x) in self.power_letters[g].iter().rev() {
                        stack.push((h, x));
                    }
                } else {
                    e[g] = s;
                }
                continue;
            }
            if m > 1 {
                stack.push((g, m - 1));
            }
            // e * a_g = prefix * a_g * suffix^(a_g), with a_h^(a_g) = a_h [a_h, a_g].
            for h in (g + 1..self.n).rev() {
                let eh = e[h];
                if eh == 0 {
                    continue;
                }
                e[h] = 0;
                let c = &self.comm_letters[h][g];
                if c.is_empty() {
                    stack.push((h, eh));
                } else {
                    for _ in 0..eh {
                        for &(x, y) in c.iter().rev() {
                            stack.push((x, y));
                        }
                        stack.push((h, 1));
                    }
                }
            }
            e[g] += 1;
            if e[g] == p {
                e[g] = 0;
                for &(h, x) in self.power_letters[g].iter().rev() {
                    stack.push((h, x));
                }
            }
        }
    }

    /// Normal form of an arbitrary word given as `(generator, exponent)` pairs.
    pub fn collect(&self, word: &[(usize, u32)]) -> ExponentWord {
        let mut e = self.identity();
        self.mul_letters(&mut e, word);
        e
    }

    pub fn multiply(&self, u: &[u32], v: &[u32]) -> ExponentWord {
        let mut e = u.to_vec();
        self.mul_letters(&mut e, &letters_of(v));
        e
    }

    pub fn inverse(&self, u: &[u32]) -> ExponentWord {
        let p = self.p;
        let mut c = u.to_vec();
        let mut x = self.identity();
        while let Some(i) = c.iter().position(|&v| v != 0) {
            let m = p - c[i];
            x[i] = m;
            self.mul_letters(&mut c, &[(i, m)]);
        }
        x
    }

    pub fn power(&self, u: &[u32], mut e: u64) -> ExponentWord {
        let mut acc = self.identity();
        let mut base = u.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.multiply(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.multiply(&base, &base);
            }
        }
        acc
    }

    /// `[u, v] = u^-1 v^-1 u v`
    pub fn commutator(&self, u: &[u32], v: &[u32]) -> ExponentWord {
        let uv = self.multiply(u, v);
        let vu = self.multiply(v, u);
        self.multiply(&self.inverse(&vu), &uv)
    }

    /// Runs every consistency test and returns all failures.
    pub fn consistency_failures(&self) -> Vec<Inconsistency> {
        let p = self.p;
        let n = self.n;
        let mut out = Vec::new();
        let unit = |i: usize| self.generator(i);
        for k in 0..n {
            for j in 0..k {
                let kj = self.multiply(&unit(k), &unit(j));
                for i in 0..j {
                    let lhs = self.multiply(&kj, &unit(i));
                    let ji = self.multiply(&unit(j), &unit(i));
                    let rhs = self.multiply(&unit(k), &ji);
                    if lhs != rhs {
                        out.push(Inconsistency { test: TestWord::Associativity { k, j, i }, lhs, rhs });
                    }
                }
            }
        }
        for j in 0..n {
            for i in 0..j {
                let ji = self.multiply(&unit(j), &unit(i));
                let lhs = self.multiply(&self.power[j], &unit(i));
                let mut rhs = self.identity();
                rhs[j] = p - 1;
                let rhs = self.multiply(&rhs, &ji);
                if lhs != rhs {
                    out.push(Inconsistency { test: TestWord::PowerLeft { j, i }, lhs, rhs });
                }
                let lhs = self.multiply(&unit(j), &self.power[i]);
                let mut rhs = ji.clone();
                self.mul_letters(&mut rhs, &[(i, p - 1)]);
                if lhs != rhs {
                    out.push(Inconsistency { test: TestWord::PowerRight { j, i }, lhs, rhs });
                }
            }
        }
        for i in 0..n {
            let lhs = self.multiply(&unit(i), &self.power[i]);
            let rhs = self.multiply(&self.power[i], &unit(i));
            if lhs != rhs {
                out.push(Inconsistency { test: TestWord::PowerSelf { i }, lhs, rhs });
            }
        }
        out
    }

    /// Consistency by the test-word family; on failure returns the first
    /// violated test.
    pub fn is_consistent(&self) -> std::result::Result<(), Inconsistency> {
        match self.consistency_failures().into_iter().next() {
            None => Ok(()),
            Some(f) => Err(f),
        }
    }

    /// Index of a normal form in `0..p^n`, first generator most significant.
    pub fn index_of(&self, w: &[u32]) -> usize {
        w.iter().fold(0usize, |acc, &x| acc * self.p as usize + x as usize)
    }

    pub fn word_of(&self, mut idx: usize) -> ExponentWord {
        let mut w = vec![0; self.n];
        for slot in w.iter_mut().rev() {
            *slot = (idx % self.p as usize) as u32;
            idx /= self.p as usize;
        }
        w
    }

    /// Group order `p^n` as a machine integer.
    pub fn order(&self) -> usize {
        (self.p as usize).pow(self.n as u32)
    }

    /// Exhaustive consistency check: the right multiplications by the
    /// generators must be permutations of the `p^n` normal forms that
    /// satisfy every defining relation. Then the permutation group is a
    /// quotient of the presented group acting transitively on `p^n` points,
    /// so the presented group has exactly `p^n` elements.
    pub fn exhaustive_check(&self) -> bool {
        let size = self.order();
        let p = self.p;
        let perms: Vec<Vec<u32>> = (0..self.n)
            .map(|g| {
                (0..size)
                    .map(|x| {
                        let mut e = self.word_of(x);
                        self.mul_letters(&mut e, &[(g, 1)]);
                        self.index_of(&e) as u32
                    })
                    .collect()
            })
            .collect();
        for perm in &perms {
            let mut seen = vec![false; size];
            for &y in perm {
                if std::mem::replace(&mut seen[y as usize], true) {
                    return false;
                }
            }
        }
        let apply = |x: u32, letters: &[(usize, u32)]| -> u32 {
            let mut y = x;
            for &(g, m) in letters {
                for _ in 0..m {
                    y = perms[g][y as usize];
                }
            }
            y
        };
        for x in 0..size as u32 {
            for i in 0..self.n {
                if apply(x, &[(i, p)]) != apply(x, &self.power_letters[i]) {
                    return false;
                }
                for j in i + 1..self.n {
                    // a_j a_i = a_i a_j [a_j, a_i]
                    let lhs = apply(x, &[(j, 1), (i, 1)]);
                    let mut rhs = apply(x, &[(i, 1), (j, 1)]);
                    rhs = apply(rhs, &self.comm_letters[j][i]);
                    if lhs != rhs {
                        return false;
                    }
                }
            }
        }
        let mut seen = vec![false; size];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for perm in &perms {
                let y = perm[x as usize];
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == size
    }

    /// Generator index sets of the lower exponent-p central series:
    /// entry `h` lists the generators of weight at least `h + 1`.
    pub fn p_central_series(&self) -> Vec<Vec<usize>> {
        (0..=self.class())
            .map(|h| (0..self.n).filter(|&i| self.weights[i] > h).collect())
            .collect()
    }

    /// True when `a_k` commutes with every generator and has trivial p-th power.
    pub fn is_central_of_order_p(&self, k: usize) -> bool {
        if self.power[k].iter().any(|&x| x != 0) {
            return false;
        }
        (0..self.n).all(|i| match i.cmp(&k) {
            std::cmp::Ordering::Less => self.comm[k][i].iter().all(|&x| x == 0),
            std::cmp::Ordering::Greater => self.comm[i][k].iter().all(|&x| x == 0),
            std::cmp::Ordering::Equal => true,
        })
    }

    /// Checks the weighting conditions. With `strict`, every definition
    /// must read `a_i^p = a_k` or `[a_j, a_i] = a_k` with `a_i` of weight
    /// one; otherwise a definition only needs `a_k` as the last symbol of
    /// its relation with exponent one, and weights need not be sorted past
    /// the weight-one prefix.
    pub fn check_weighted(&self, strict: bool) -> Result<()> {
        let bad = |m: String| Err(Error::Malformed(m));
        let w = &self.weights;
        if self.n == 0 {
            return Ok(());
        }
        let d = w.iter().filter(|&&x| x == 1).count();
        if d != self.d || w[..d].iter().any(|&x| x != 1) {
            return bad(format!("weights {w:?} must start with exactly d = {} ones", self.d));
        }
        if strict && w.windows(2).any(|x| x[0] > x[1]) {
            return bad(format!("weights {w:?} must be nondecreasing"));
        }
        for i in 0..self.n {
            for (k, &x) in self.power[i].iter().enumerate() {
                if x != 0 && w[k] < w[i] + 1 {
                    return bad(format!("a{}^p involves a{} of too small weight", i + 1, k + 1));
                }
            }
            for j in i + 1..self.n {
                for (k, &x) in self.comm[j][i].iter().enumerate() {
                    if x != 0 && w[k] < w[i] + w[j] {
                        return bad(format!("[a{},a{}] involves a{} of too small weight", j + 1, i + 1, k + 1));
                    }
                }
            }
        }
        for k in 0..self.n {
            match (w[k], self.defs[k]) {
                (1, None) => {}
                (1, Some(_)) => return bad(format!("a{} has weight one but a definition", k + 1)),
                (_, None) => return bad(format!("a{} has no definition", k + 1)),
                (wk, Some(def)) => {
                    let (rhs, natural, ok_kind) = match def {
                        Definition::Power { i } => (&self.power[i], w[i] + 1, true),
                        Definition::Comm { j, i } => (&self.comm[j][i], w[i] + w[j], w[i] == 1),
                    };
                    if natural != wk {
                        return bad(format!("weight of a{} disagrees with its definition {def}", k + 1));
                    }
                    if rhs[k] != 1 || rhs[k + 1..].iter().any(|&x| x != 0) {
                        return bad(format!("{def} does not end in a{}", k + 1));
                    }
                    if strict && (!ok_kind || rhs[..k].iter().any(|&x| x != 0)) {
                        return bad(format!("{def} is not a defining relation of a{}", k + 1));
                    }
                }
            }
        }
        Ok(())
    }

    /// Weights recomputed from the definitions; generators without a
    /// definition get weight one.
    pub fn weights_from_definitions(&self) -> Vec<u32> {
        let mut w = vec![1u32; self.n];
        for k in 0..self.n {
            w[k] = match self.defs[k] {
                None => 1,
                Some(Definition::Power { i }) => w[i] + 1,
                Some(Definition::Comm { j, i }) => w[i] + w[j],
            };
        }
        w
    }

    /// Quotient by the subgroup spanned by `subgroup`, whose elements must
    /// lie in the span of central generators of order `p`.
    ///
    /// Returns the quotient and, for each of its generators, the index of
    /// the generator it came from. Surviving generators keep their relative
    /// order, weights and definitions.
    pub fn quotient(&self, subgroup: &[ExponentWord]) -> Result<(PcPresentation, Vec<usize>)> {
        let p = self.p;
        let n = self.n;
        let central: Vec<bool> = (0..n).map(|k| self.is_central_of_order_p(k)).collect();
        for s in subgroup {
            if s.len() != n {
                return Err(Error::Precondition("subgroup element has wrong length".into()));
            }
            if let Some(k) = (0..n).find(|&k| s[k] % p != 0 && !central[k]) {
                return Err(Error::Precondition(format!(
                    "subgroup element involves a{}, which is not central of order p",
                    k + 1
                )));
            }
        }
        let mut rows: Vec<Vec<u32>> = subgroup.to_vec();
        let pivots = crate::matfp::rref_rows(p, n, &mut rows);
        let kept: Vec<usize> = (0..n).filter(|k| !pivots.contains(k)).collect();
        let mut new_index = vec![usize::MAX; n];
        for (t, &k) in kept.iter().enumerate() {
            new_index[k] = t;
        }
        // a_pivot = prod over free f of a_f^(-row[f])
        let reduce = |w: &[u32]| -> ExponentWord {
            let mut v = w.to_vec();
            for (r, &pc) in pivots.iter().enumerate() {
                let e = v[pc];
                if e == 0 {
                    continue;
                }
                v[pc] = 0;
                for c in 0..n {
                    if c != pc && rows[r][c] != 0 {
                        v[c] = (v[c] + p * p - e * rows[r][c]) % p;
                    }
                }
            }
            kept.iter().map(|&k| v[k]).collect()
        };
        let m = kept.len();
        let power: Vec<ExponentWord> = kept.iter().map(|&k| reduce(&self.power[k])).collect();
        let comm: Vec<Vec<ExponentWord>> = (0..m)
            .map(|jj| (0..jj).map(|ii| reduce(&self.comm[kept[jj]][kept[ii]])).collect())
            .collect();
        let weights: Vec<u32> = kept.iter().map(|&k| self.weights[k]).collect();
        let defs: Vec<Option<Definition>> = kept
            .iter()
            .map(|&k| {
                self.defs[k].and_then(|def| match def {
                    Definition::Power { i } if new_index[i] != usize::MAX => Some(Definition::Power { i: new_index[i] }),
                    Definition::Comm { j, i } if new_index[i] != usize::MAX && new_index[j] != usize::MAX => {
                        Some(Definition::Comm { j: new_index[j], i: new_index[i] })
                    }
                    _ => None,
                })
            })
            .collect();
        let d = kept.iter().filter(|&&k| self.weights[k] == 1).count();
        Ok((PcPresentation::new(p, d, power, comm, weights, defs)?, kept))
    }

    /// Same group with new weights and definitions.
    pub fn with_weighting(&self, weights: Vec<u32>, defs: Vec<Option<Definition>>) -> Result<Self> {
        let d = weights.iter().filter(|&&w| w == 1).count();
        PcPresentation::new(self.p, d, self.power.clone(), self.comm.clone(), weights, defs)
    }

    /// Nontrivial relations in `[a2,a1]=a3 a1^p=a4^2` notation.
    pub fn relations_string(&self) -> String {
        let fmt_word = |w: &[u32]| -> String {
            w.iter()
                .enumerate()
                .filter(|(_, &e)| e != 0)
                .map(|(k, &e)| if e == 1 { format!("a{}", k + 1) } else { format!("a{}^{}", k + 1, e) })
                .collect::<Vec<_>>()
                .join("")
        };
        let mut parts = Vec::new();
        for j in 0..self.n {
            for i in 0..j {
                if self.comm[j][i].iter().any(|&x| x != 0) {
                    parts.push(format!("[a{},a{}]={}", j + 1, i + 1, fmt_word(&self.comm[j][i])));
                }
            }
        }
        for i in 0..self.n {
            if self.power[i].iter().any(|&x| x != 0) {
                parts.push(format!("a{}^p={}", i + 1, fmt_word(&self.power[i])));
            }
        }
        if parts.is_empty() {
            "abelian of exponent p".into()
        } else {
            parts.join(" ")
        }
    }

    pub fn to_json(&self) -> PresentationJson {
        let mut commutators = Vec::new();
        for j in 0..self.n {
            for i in 0..j {
                if self.comm[j][i].iter().any(|&x| x != 0) {
                    commutators.push(CommJson { j, i, rhs: self.comm[j][i].clone() });
                }
            }
        }
        let definitions = self
            .defs
            .iter()
            .enumerate()
            .filter_map(|(gen, def)| {
                def.map(|def| match def {
                    Definition::Power { i } => DefJson { gen, kind: DefKind::Power, i, j: None },
                    Definition::Comm { j, i } => DefJson { gen, kind: DefKind::Comm, i, j: Some(j) },
                })
            })
            .collect();
        PresentationJson {
            p: self.p,
            n: self.n,
            d: self.d,
            powers: self.power.clone(),
            commutators,
            weights: self.weights.clone(),
            definitions,
        }
    }

    pub fn from_json(js: &PresentationJson) -> Result<Self> {
        let n = js.n;
        let p = js.p;
        crate::fp::check_prime(p)?;
        let bad = |m: &str| Err(Error::Malformed(m.to_string()));
        if js.powers.len() != n || js.weights.len() != n {
            return bad("powers and weights must have one entry per generator");
        }
        let mut comm: Vec<Vec<ExponentWord>> = (0..n).map(|j| vec![vec![0; n]; j]).collect();
        for c in &js.commutators {
            if c.i >= c.j || c.j >= n {
                return bad("commutator entries need i < j < n");
            }
            comm[c.j][c.i] = c.rhs.clone();
        }
        let mut defs = vec![None; n];
        for def in &js.definitions {
            if def.gen >= n {
                return bad("definition for a nonexistent generator");
            }
            defs[def.gen] = Some(match (def.kind, def.j) {
                (DefKind::Power, None) => Definition::Power { i: def.i },
                (DefKind::Comm, Some(j)) => Definition::Comm { j, i: def.i },
                _ => return bad("power definitions take only i, commutator definitions need j"),
            });
        }
        let pres = PcPresentation::new(p, js.d, js.powers.clone(), comm, js.weights.clone(), defs)?;
        pres.check_weighted(false)?;
        Ok(pres)
    }
}

fn push_letter(stack: &mut Vec<(usize, u32)>, g: usize, m: u32, p: u32) {
    let mut m = m;
    // letters above p - 1 are split so each chunk overflows at most once
    while m >= p {
        stack.push((g, p - 1));
        m -= p - 1;
    }
    if m > 0 {
        stack.push((g, m));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefKind {
    Power,
    Comm,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommJson {
    pub j: usize,
    pub i: usize,
    pub rhs: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefJson {
    pub gen: usize,
    pub kind: DefKind,
    pub i: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub j: Option<usize>,
}

/// Wire format of a presentation. Omitted commutators are trivial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationJson {
    pub p: u32,
    pub n: usize,
    pub d: usize,
    pub powers: Vec<Vec<u32>>,
    #[serde(default)]
    pub commutators: Vec<CommJson>,
    pub weights: Vec<u32>,
    #[serde(default)]
    pub definitions: Vec<DefJson>,
}

/// Assembles a presentation from its nontrivial relations and derives the
/// weighting: a generator is defined by a relation whose right-hand side is
/// exactly that generator, taking the candidate of largest weight.
#[derive(Debug, Clone)]
pub struct PcBuilder {
    p: u32,
    n: usize,
    power: Vec<ExponentWord>,
    comm: Vec<Vec<ExponentWord>>,
}

impl PcBuilder {
    pub fn new(p: u32, n: usize) -> Self {
        Self { p, n, power: vec![vec![0; n]; n], comm: (0..n).map(|j| vec![vec![0; n]; j]).collect() }
    }

    fn word(&self, letters: &[(usize, i64)]) -> ExponentWord {
        let mut w = vec![0u32; self.n];
        for &(k, e) in letters {
            w[k] = e.rem_euclid(self.p as i64) as u32;
        }
        w
    }

    /// `a_i^p = prod a_k^e`
    pub fn power(mut self, i: usize, rhs: &[(usize, i64)]) -> Self {
        self.power[i] = self.word(rhs);
        self
    }

    /// `[a_j, a_i] = prod a_k^e` for `j > i`
    pub fn comm(mut self, j: usize, i: usize, rhs: &[(usize, i64)]) -> Self {
        assert!(j > i, "commutators are given as [a_j, a_i] with j > i");
        self.comm[j][i] = self.word(rhs);
        self
    }

    pub fn build(self) -> Result<PcPresentation> {
        let n = self.n;
        let is_unit = |w: &[u32], k: usize| w[k] == 1 && w.iter().enumerate().all(|(t, &x)| t == k || x == 0);
        let mut weights = vec![1u32; n];
        let mut defs = vec![None; n];
        for k in 0..n {
            let mut best: Option<(u32, Definition)> = None;
            for i in 0..k {
                if is_unit(&self.power[i], k) {
                    let cand = (weights[i] + 1, Definition::Power { i });
                    if best.is_none_or(|b| cand.0 > b.0) {
                        best = Some(cand);
                    }
                }
                for j in i + 1..k {
                    if weights[i] == 1 && is_unit(&self.comm[j][i], k) {
                        let cand = (weights[i] + weights[j], Definition::Comm { j, i });
                        if best.is_none_or(|b| cand.0 > b.0) {
                            best = Some(cand);
                        }
                    }
                }
            }
            if let Some((w, def)) = best {
                weights[k] = w;
                defs[k] = Some(def);
            }
        }
        let d = weights.iter().filter(|&&w| w == 1).count();
        let pres = PcPresentation::new(self.p, d, self.power, self.comm, weights, defs)?;
        pres.check_weighted(true)?;
        Ok(pres)
    }
}
