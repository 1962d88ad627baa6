//! Acceptance criteria, one test per criterion. Every test writes a single
//! `PASS`/`FAIL` line straight to stderr so it shows up even when the
//! harness captures output, followed by indented detail lines.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use pgroupgen::action::extend_automorphism;
use pgroupgen::classify::{identify, Catalog};
use pgroupgen::pcpres::Definition;
use pgroupgen::{build_cover, classify, Automorphism, ClassifyOptions, FpMatrix, PcPresentation};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn report(criterion: &str, passed: bool, details: &[String]) {
    let mut text = format!("{} criterion {criterion}\n", if passed { "PASS" } else { "FAIL" });
    for d in details {
        text.push_str(&format!("      {d}\n"));
    }
    std::io::stderr().write_all(text.as_bytes()).unwrap();
}

fn catalog(p: u32) -> &'static Catalog {
    static FIVE: OnceLock<Catalog> = OnceLock::new();
    static SEVEN: OnceLock<Catalog> = OnceLock::new();
    static ELEVEN: OnceLock<Catalog> = OnceLock::new();
    let cell = match p {
        5 => &FIVE,
        7 => &SEVEN,
        11 => &ELEVEN,
        _ => unreachable!(),
    };
    cell.get_or_init(|| {
        let opts = ClassifyOptions { heavy_ok: true, ..Default::default() };
        classify(p, &opts).expect("classification runs")
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// ---------------------------------------------------------------------------
// criterion 1

#[test]
fn c1_catalog_counts() {
    let expected: [(u32, [u64; 5]); 3] =
        [(5, [1, 2, 5, 15, 77]), (7, [1, 2, 5, 15, 83]), (11, [1, 2, 5, 15, 87])];
    let mut ok = true;
    let mut details = Vec::new();
    for (p, want) in expected {
        let t = Instant::now();
        let got = catalog(p).counts();
        let good = got == want;
        ok &= good;
        details.push(format!("p = {p}: {got:?} (want {want:?}) in {:.1}s", t.elapsed().as_secs_f64()));
    }
    report("1 (catalog counts)", ok, &details);
    assert!(ok);
}

// ---------------------------------------------------------------------------
// criterion 2

/// Literal per-parent table: parent name, then (child order exponent, count).
fn criterion_two_table(p: u64) -> Vec<(&'static str, Vec<(usize, u64)>)> {
    vec![
        ("C_p^2", vec![(5, 1), (4, 3), (3, 3)]),
        ("D_p", vec![(4, 4), (5, p + 8)]),
        ("(p^4,7)", vec![(5, 3 + gcd(4, p - 1) + 2 * gcd(3, p - 1))]),
        ("C_{p^2}xC_p", vec![(4, 2), (5, 0)]),
        ("(p^4,5)", vec![(5, 2)]),
        ("(p^4,2)", vec![(5, 2)]),
        ("(p^4,3)", vec![(5, 9)]),
        ("(p^4,4)", vec![(5, 2)]),
        ("C_p^3", vec![(4, 4), (5, 14 + p)]),
        ("(p^4,11)", vec![(5, 3)]),
        ("(p^4,12)", vec![(5, 10)]),
        ("C_p^4", vec![(5, 6)]),
    ]
}

fn ids_by_name(cat: &Catalog) -> BTreeMap<String, Vec<usize>> {
    let mut out: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (id, name) in identify(cat).expect("identification runs") {
        out.entry(name).or_default().push(id);
    }
    out
}

#[test]
fn c2_descendants_per_parent() {
    let mut ok = true;
    let mut details = Vec::new();
    for p in [5u32, 7] {
        let cat = catalog(p);
        let names = ids_by_name(cat);
        for (name, rows) in criterion_two_table(p as u64) {
            let ids = names.get(name).cloned().unwrap_or_default();
            if ids.len() != 1 {
                ok = false;
                details.push(format!("p = {p}: {name} found {} times", ids.len()));
                continue;
            }
            for (n, want) in rows {
                let got = cat.children_of_order(ids[0], n) as u64;
                if got != want {
                    ok = false;
                    details.push(format!("p = {p}: {name} -> order p^{n}: got {got}, want {want}"));
                }
            }
        }
    }
    report("2 (descendants per parent)", ok, &details);
    assert!(ok, "{details:?}");
}

// ---------------------------------------------------------------------------
// criterion 3

fn is_abelian(g: &PcPresentation) -> bool {
    (0..g.n()).all(|j| (0..j).all(|i| g.comm_rhs(j, i).iter().all(|&x| x == 0)))
}

fn is_elementary(g: &PcPresentation) -> bool {
    is_abelian(g) && (0..g.n()).all(|i| g.power_rhs(i).iter().all(|&x| x == 0))
}

#[test]
fn c3_terminal_groups() {
    let want: BTreeSet<&str> =
        ["(p^4,6)", "(p^4,8)", "(p^4,9)", "(p^4,10)", "Q_p", "(p^4,13)", "(p^4,14)"].into_iter().collect();
    let mut ok = true;
    let mut details = Vec::new();
    for p in [5u32, 7] {
        let cat = catalog(p);
        let labels = identify(cat).unwrap();
        let mut found: BTreeSet<String> = BTreeSet::new();
        let mut terminal = 0;
        for id in 0..cat.groups.len() {
            let rec = &cat.groups[id];
            if rec.order_exponent >= 5 || is_elementary(&rec.presentation) {
                continue;
            }
            let cover = build_cover(&rec.presentation).unwrap();
            let has_children = cat.groups.iter().any(|g| g.parent_id == Some(id));
            if cover.is_extendable() != has_children && rec.order_exponent == 4 {
                ok = false;
                details.push(format!("p = {p}: group {id} nucleus disagrees with its children"));
            }
            if !cover.is_extendable() {
                terminal += 1;
                found.extend(labels[&id].split('|').map(str::to_string));
            }
        }
        let found_ref: BTreeSet<&str> = found.iter().map(String::as_str).collect();
        let good = found_ref == want && terminal == want.len();
        ok &= good;
        details.push(format!("p = {p}: {terminal} terminal groups {found_ref:?}"));
    }
    report("3 (terminal groups)", ok, &details);
    assert!(ok, "{details:?}");
}

// ---------------------------------------------------------------------------
// criterion 4: brute-force orbit oracles on plain integer arithmetic

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a] = b;
        }
    }

    /// Sorted class sizes.
    fn sizes(&mut self) -> Vec<u64> {
        let mut count: BTreeMap<usize, u64> = BTreeMap::new();
        for x in 0..self.0.len() {
            *count.entry(self.find(x)).or_default() += 1;
        }
        let mut v: Vec<u64> = count.into_values().collect();
        v.sort();
        v
    }
}

type M2 = [[u64; 2]; 2];

fn gl2(p: u64) -> Vec<M2> {
    let mut out = Vec::new();
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                for d in 0..p {
                    if (a * d + p * p - b * c) % p != 0 {
                        out.push([[a, b], [c, d]]);
                    }
                }
            }
        }
    }
    out
}

fn mul2(x: &M2, y: &M2, p: u64) -> M2 {
    let mut r = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = (x[i][0] * y[0][j] + x[i][1] * y[1][j]) % p;
        }
    }
    r
}

fn inv_mod(x: u64, p: u64) -> u64 {
    (1..p).find(|y| x * y % p == 1).unwrap()
}

fn det2(m: &M2, p: u64) -> u64 {
    (m[0][0] * m[1][1] + p * p - m[0][1] * m[1][0]) % p
}

fn inv2(m: &M2, p: u64) -> M2 {
    let di = inv_mod(det2(m, p), p);
    [[m[1][1] * di % p, (p - m[0][1]) * di % p], [(p - m[1][0]) * di % p, m[0][0] * di % p]]
}

fn enc2(m: &M2, p: u64) -> usize {
    (((m[0][0] * p + m[0][1]) * p + m[1][0]) * p + m[1][1]) as usize
}

fn dec2(x: usize, p: u64) -> M2 {
    let x = x as u64;
    [[x / (p * p * p), x / (p * p) % p], [x / p % p, x % p]]
}

/// Orbits on 2x2 matrices of `m -> s(g) g^-1 m g` over all `g` in GL(2,p)
/// and all scalars `s` in `scalars(g)`.
fn conjugation_orbits(p: u64, scalars: impl Fn(&M2) -> Vec<u64>) -> Vec<u64> {
    let n = (p * p * p * p) as usize;
    let mut uf = UnionFind::new(n);
    for g in gl2(p) {
        let gi = inv2(&g, p);
        let ss = scalars(&g);
        for x in 0..n {
            let c = mul2(&mul2(&gi, &dec2(x, p), p), &g, p);
            for &s in &ss {
                let y = [[c[0][0] * s % p, c[0][1] * s % p], [c[1][0] * s % p, c[1][1] * s % p]];
                uf.union(x, enc2(&y, p));
            }
        }
    }
    uf.sizes()
}

/// Orbits on F_p^3 of the row-vector action of the matrices
/// `[[u^2 v, -u^2 v^2 z, 0], [0, u v^2, 0], [0, 0, v]]`.
fn triangular_monomial_orbits(p: u64) -> Vec<u64> {
    let n = (p * p * p) as usize;
    let mut uf = UnionFind::new(n);
    for u in 1..p {
        for v in 1..p {
            for z in 0..p {
                let a = [
                    [u * u * v % p, (p - u * u % p * v % p * v % p * z % p) % p, 0],
                    [0, u * v * v % p, 0],
                    [0, 0, v],
                ];
                for x in 0..n as u64 {
                    let xv = [x / (p * p), x / p % p, x % p];
                    let y: Vec<u64> = (0..3).map(|c| (0..3).map(|r| xv[r] * a[r][c]).sum::<u64>() % p).collect();
                    uf.union(x as usize, ((y[0] * p + y[1]) * p + y[2]) as usize);
                }
            }
        }
    }
    uf.sizes()
}

fn kron2(a: &M2, b: &M2, p: u64) -> [[u64; 4]; 4] {
    let mut r = [[0; 4]; 4];
    for i in 0..2 {
        for k in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    r[2 * i + k][2 * j + l] = a[i][j] * b[k][l] % p;
                }
            }
        }
    }
    r
}

/// The group generated by `z (h^-1 (x) h)` with `h` upper unitriangular up
/// to the lower right entry, acting on `F_p^4 / <v2, v4>`.
fn kronecker_quotient_orbits(p: u64) -> Option<Vec<u64>> {
    let mut uf = UnionFind::new((p * p) as usize);
    for z in 1..p {
        for a in 0..p {
            for b in 1..p {
                let h = [[1, a], [0, b]];
                let k = kron2(&inv2(&h, p), &h, p);
                let k: Vec<Vec<u64>> = k.iter().map(|row| row.iter().map(|x| x * z % p).collect()).collect();
                // <v2, v4> must be invariant
                if k[1][0] != 0 || k[1][2] != 0 || k[3][0] != 0 || k[3][2] != 0 {
                    return None;
                }
                for x in 0..p {
                    for y in 0..p {
                        let img0 = (x * k[0][0] + y * k[2][0]) % p;
                        let img1 = (x * k[0][2] + y * k[2][2]) % p;
                        uf.union((x * p + y) as usize, (img0 * p + img1) as usize);
                    }
                }
            }
        }
    }
    Some(uf.sizes())
}

fn skew_orbits(p: u64) -> Vec<u64> {
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let n = p.pow(6) as usize;
    let decode = |mut x: u64| {
        let mut m = [[0u64; 4]; 4];
        for &(i, j) in pairs.iter().rev() {
            let e = x % p;
            x /= p;
            m[i][j] = e;
            m[j][i] = (p - e) % p;
        }
        m
    };
    let encode = |m: &[[u64; 4]; 4]| pairs.iter().fold(0u64, |acc, &(i, j)| acc * p + m[i][j]) as usize;
    let w = (2..p).find(|&x| (1..p - 1).all(|k| (0..k).fold(1, |acc, _| acc * x % p) != 1)).unwrap();
    let mut gens = Vec::new();
    let mut d = [[0u64; 4]; 4];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 1;
    }
    d[0][0] = w;
    gens.push(d);
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                let mut t = [[0u64; 4]; 4];
                for (r, row) in t.iter_mut().enumerate() {
                    row[r] = 1;
                }
                t[i][j] = 1;
                gens.push(t);
            }
        }
    }
    let mut uf = UnionFind::new(n);
    for x in 0..n {
        let m = decode(x as u64);
        for g in &gens {
            let mut y = [[0u64; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    let mut s = 0;
                    for k in 0..4 {
                        for l in 0..4 {
                            s += g[i][k] * m[k][l] * g[j][l];
                        }
                    }
                    y[i][j] = s % p;
                }
            }
            uf.union(x, encode(&y));
        }
    }
    uf.sizes()
}

/// Orbit sizes on nonzero vectors of `M(C_p^2)` under all extension
/// automorphisms computed by the engine.
fn cover_vector_orbits(p: u32) -> Vec<u64> {
    let g = PcPresentation::elementary_abelian(p, 2).unwrap();
    let cd = build_cover(&g).unwrap();
    let m = cd.multiplicator_dim();
    let pp = p as u64;
    let n = pp.pow(m as u32) as usize;
    let mut uf = UnionFind::new(n);
    for el in gl2(pp) {
        let rows: Vec<Vec<u32>> = el.iter().map(|r| r.iter().map(|&x| x as u32).collect()).collect();
        let alpha = Automorphism::new(&g, rows).unwrap();
        let phi = extend_automorphism(&cd, &alpha).unwrap();
        for x in 1..n {
            let v: Vec<u32> = (0..m).map(|k| (x as u64 / pp.pow((m - 1 - k) as u32) % pp) as u32).collect();
            let y = phi.apply_row(&v).iter().fold(0u64, |acc, &e| acc * pp + e as u64);
            uf.union(x, y as usize);
        }
    }
    let mut sizes = uf.sizes();
    // drop the zero vector, a fixed point
    let zero = sizes.iter().position(|&s| s == 1).unwrap();
    sizes.remove(zero);
    sizes
}

#[test]
fn c4_orbit_oracles() {
    let mut ok = true;
    let mut details = Vec::new();
    let mut check = |label: &str, p: u64, secs: f64, got: Vec<u64>, good: bool| {
        let good = good && secs < 10.0;
        ok &= good;
        details.push(format!(
            "{} {label} at p = {p}: {} orbits {got:?} in {secs:.2}s",
            if good { "ok " } else { "BAD" },
            got.len()
        ));
    };
    for p in [5u64, 7] {
        let t = Instant::now();
        let o = conjugation_orbits(p, |_| (1..p).collect());
        check("scaled conjugation on 2x2 matrices", p, t.elapsed().as_secs_f64(), o.clone(), o.len() as u64 == p + 5);

        let t = Instant::now();
        let o = conjugation_orbits(p, |g| vec![det2(g, p)]);
        check("determinant-twisted conjugation", p, t.elapsed().as_secs_f64(), o.clone(), o.len() as u64 == p + 7);

        let t = Instant::now();
        let o = triangular_monomial_orbits(p);
        let half = p * (p - 1) * (p - 1) / 2;
        let mut want = vec![1, (p - 1) * (p - 1), half, half, p - 1, p - 1, p * (p - 1)];
        want.sort();
        check("triangular monomial group on F_p^3", p, t.elapsed().as_secs_f64(), o.clone(), o == want);

        let t = Instant::now();
        let o = kronecker_quotient_orbits(p).unwrap_or_default();
        check("triangular quotient of h^-1 (x) h", p, t.elapsed().as_secs_f64(), o.clone(), o.len() == 3);

        let t = Instant::now();
        let o = skew_orbits(p);
        check("skew 4x4 forms", p, t.elapsed().as_secs_f64(), o.clone(), o.len() == 3);

        let t = Instant::now();
        let o = cover_vector_orbits(p as u32);
        let want = vec![p - 1, p * p - 1, (p - 1) * (p * p - 1)];
        check("vectors of M(C_p^2)", p, t.elapsed().as_secs_f64(), o.clone(), o == want);
    }
    report("4 (orbit oracles)", ok, &details);
    assert!(ok, "{details:?}");
}

// ---------------------------------------------------------------------------
// criterion 5

#[test]
fn c5_structural_invariants() {
    let cat = catalog(5);
    let mut ok = true;
    let mut details = Vec::new();
    let mut abelian = [0u64; 5];
    for (id, rec) in cat.groups.iter().enumerate() {
        let g = &rec.presentation;
        let consistent = if rec.order_exponent <= 4 { g.exhaustive_check() } else { g.is_consistent().is_ok() };
        if !consistent {
            ok = false;
            details.push(format!("group {id} is inconsistent"));
        }
        if g.n() != rec.order_exponent || g.class() != rec.p_class {
            ok = false;
            details.push(format!("group {id} has mismatched order or class"));
        }
        if rec.p_class as usize != rec.lineage.len() + 1 {
            ok = false;
            details.push(format!("group {id}: class {} at depth {}", rec.p_class, rec.lineage.len()));
        }
        if is_abelian(g) {
            abelian[rec.order_exponent - 1] += 1;
        }
    }
    if abelian != [1, 2, 3, 5, 7] {
        ok = false;
    }
    details.push(format!("{} groups checked, abelian per order {abelian:?}", cat.groups.len()));
    report("5 (structural invariants)", ok, &details);
    assert!(ok, "{details:?}");
}

// ---------------------------------------------------------------------------
// criterion 6

const P6: u32 = 5;

fn comm(j: usize, i: usize) -> Definition {
    Definition::Comm { j: j - 1, i: i - 1 }
}

fn pow(i: usize) -> Definition {
    Definition::Power { i: i - 1 }
}

fn m(rows: Vec<Vec<i64>>) -> FpMatrix {
    FpMatrix::from_signed(P6, &rows)
}

fn word(v: &[i64]) -> Vec<u32> {
    v.iter().map(|x| x.rem_euclid(P6 as i64) as u32).collect()
}

/// Random generator images with the expected matrix, or `None` when the
/// parameters are degenerate.
type Sampler = fn(&mut StdRng) -> Option<(Vec<Vec<u32>>, FpMatrix)>;

/// One closed form: the group, the basis of `M(G)` as relation labels, and a
/// sampler.
struct ClosedForm {
    name: &'static str,
    group: PcPresentation,
    basis: Vec<Definition>,
    sample: Sampler,
}

fn r(rng: &mut StdRng) -> i64 {
    rng.gen_range(0..P6 as i64)
}

fn nz(x: i64) -> bool {
    x.rem_euclid(P6 as i64) != 0
}

fn closed_forms() -> Vec<ClosedForm> {
    let b = |n| PcPresentation::builder(P6, n);
    vec![
        ClosedForm {
            name: "C_p^2",
            group: b(2).build().unwrap(),
            basis: vec![comm(2, 1), pow(1), pow(2)],
            sample: |rng| {
                let [m1, m2, m3, m4] = [r(rng), r(rng), r(rng), r(rng)];
                let d = m1 * m4 - m2 * m3;
                nz(d).then(|| {
                    (
                        vec![word(&[m1, m2]), word(&[m3, m4])],
                        m(vec![vec![d, 0, 0], vec![0, m1, m2], vec![0, m3, m4]]),
                    )
                })
            },
        },
        ClosedForm {
            name: "D_p",
            group: b(3).comm(1, 0, &[(2, 1)]).build().unwrap(),
            basis: vec![comm(3, 1), comm(3, 2), pow(1), pow(2)],
            sample: |rng| {
                let [u1, u2, u3, v1, v2, v3] = [r(rng), r(rng), r(rng), r(rng), r(rng), r(rng)];
                let d = u1 * v2 - v1 * u2;
                nz(d).then(|| {
                    (
                        vec![word(&[u1, u2, u3]), word(&[v1, v2, v3])],
                        m(vec![
                            vec![d * u1, d * u2, 0, 0],
                            vec![d * v1, d * v2, 0, 0],
                            vec![0, 0, u1, u2],
                            vec![0, 0, v1, v2],
                        ]),
                    )
                })
            },
        },
        ClosedForm {
            name: "(p^4,7)",
            group: b(4).comm(1, 0, &[(2, 1)]).comm(2, 0, &[(3, 1)]).build().unwrap(),
            basis: vec![comm(4, 1), comm(3, 2), pow(1), pow(2)],
            sample: |rng| {
                let [u1, u2, u3, u4, v2, v3, v4] = [r(rng), r(rng), r(rng), r(rng), r(rng), r(rng), r(rng)];
                nz(u1 * v2).then(|| {
                    (
                        vec![word(&[u1, u2, u3, u4]), word(&[0, v2, v3, v4])],
                        m(vec![
                            vec![u1 * u1 * u1 * v2, 0, 0, 0],
                            vec![0, u1 * v2 * v2, 0, 0],
                            vec![0, 0, u1, u2],
                            vec![0, 0, 0, v2],
                        ]),
                    )
                })
            },
        },
        ClosedForm {
            name: "C_p^3",
            group: b(3).build().unwrap(),
            basis: vec![comm(2, 1), comm(3, 1), comm(3, 2), pow(1), pow(2), pow(3)],
            sample: |rng| {
                let x: Vec<i64> = (0..9).map(|_| r(rng)).collect();
                let g = FpMatrix::from_signed(P6, &[x[0..3].to_vec(), x[3..6].to_vec(), x[6..9].to_vec()]);
                if !g.is_invertible() {
                    return None;
                }
                let minor = |a: usize, b: usize, c: usize, d: usize| x[a] * x[d] - x[c] * x[b];
                Some((
                    vec![word(&x[0..3]), word(&x[3..6]), word(&x[6..9])],
                    m(vec![
                        vec![minor(0, 1, 3, 4), minor(0, 2, 3, 5), minor(1, 2, 4, 5), 0, 0, 0],
                        vec![minor(0, 1, 6, 7), minor(0, 2, 6, 8), minor(1, 2, 7, 8), 0, 0, 0],
                        vec![minor(3, 4, 6, 7), minor(3, 5, 6, 8), minor(4, 5, 7, 8), 0, 0, 0],
                        vec![0, 0, 0, x[0], x[1], x[2]],
                        vec![0, 0, 0, x[3], x[4], x[5]],
                        vec![0, 0, 0, x[6], x[7], x[8]],
                    ]),
                ))
            },
        },
        ClosedForm {
            name: "(p^4,11)",
            group: b(4).power(0, &[(3, 1)]).build().unwrap(),
            basis: vec![pow(4), comm(2, 1), comm(3, 1), comm(3, 2), pow(2), pow(3)],
            sample: |rng| {
                let [u1, u2, u3, u4] = [r(rng), r(rng), r(rng), r(rng)];
                let [v2, v3, v4, w2, w3, w4] = [r(rng), r(rng), r(rng), r(rng), r(rng), r(rng)];
                (nz(u1) && nz(v2 * w3 - w2 * v3)).then(|| {
                    (
                        vec![word(&[u1, u2, u3, u4]), word(&[0, v2, v3, v4]), word(&[0, w2, w3, w4])],
                        m(vec![
                            vec![u1, 0, 0, 0, 0, 0],
                            vec![0, u1 * v2, u1 * v3, u2 * v3 - u3 * v2, 0, 0],
                            vec![0, u1 * w2, u1 * w3, u2 * w3 - u3 * w2, 0, 0],
                            vec![0, 0, 0, v2 * w3 - v3 * w2, 0, 0],
                            vec![v4, 0, 0, 0, v2, v3],
                            vec![w4, 0, 0, 0, w2, w3],
                        ]),
                    )
                })
            },
        },
        ClosedForm {
            name: "(p^4,12)",
            group: b(4).comm(1, 0, &[(3, 1)]).build().unwrap(),
            basis: vec![comm(4, 1), comm(4, 2), comm(3, 1), comm(3, 2), pow(1), pow(2), pow(3)],
            sample: |rng| {
                let [u1, u2, u3, u4] = [r(rng), r(rng), r(rng), r(rng)];
                let [v1, v2, v3, v4, w3, w4] = [r(rng), r(rng), r(rng), r(rng), r(rng), r(rng)];
                let d = u1 * v2 - v1 * u2;
                (nz(d) && nz(w3)).then(|| {
                    (
                        vec![word(&[u1, u2, u3, u4]), word(&[v1, v2, v3, v4]), word(&[0, 0, w3, w4])],
                        m(vec![
                            vec![d * u1, d * u2, 0, 0, 0, 0, 0],
                            vec![d * v1, d * v2, 0, 0, 0, 0, 0],
                            vec![u1 * w4, u2 * w4, u1 * w3, u2 * w3, 0, 0, 0],
                            vec![v1 * w4, v2 * w4, v1 * w3, v2 * w3, 0, 0, 0],
                            vec![0, 0, 0, 0, u1, u2, u3],
                            vec![0, 0, 0, 0, v1, v2, v3],
                            vec![0, 0, 0, 0, 0, 0, w3],
                        ]),
                    )
                })
            },
        },
    ]
}

#[test]
fn c6_closed_form_action_matrices() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut ok = true;
    let mut details = Vec::new();
    for cf in closed_forms() {
        let cd = build_cover(&cf.group).unwrap();
        let dim = cd.multiplicator_dim();
        // rows: the closed form's basis written in the engine's coordinates
        let e = FpMatrix::from_rows(P6, dim, &cf.basis.iter().map(|&l| cd.label_image(l)).collect::<Vec<_>>());
        if cf.basis.len() != dim || e.rank() != dim {
            ok = false;
            details.push(format!("{}: basis does not span M(G) of dimension {dim}", cf.name));
            continue;
        }
        let mut agree = 0;
        let mut samples = 0;
        while samples < 100 {
            let Some((images, want)) = (cf.sample)(&mut rng) else { continue };
            samples += 1;
            let alpha = match Automorphism::new(&cf.group, images) {
                Ok(a) => a,
                Err(err) => {
                    details.push(format!("{}: parameters give no automorphism: {err}", cf.name));
                    continue;
                }
            };
            let phi = extend_automorphism(&cd, &alpha).unwrap();
            if e.matmul(&phi) == want.matmul(&e) {
                agree += 1;
            }
        }
        ok &= agree == 100;
        details.push(format!("{}: {agree}/100 samples agree (dim M = {dim})", cf.name));
    }
    report("6 (closed-form action matrices)", ok, &details);
    assert!(ok, "{details:?}");
}
