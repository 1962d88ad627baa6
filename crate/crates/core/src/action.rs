//! Automorphisms of groups given by weighted presentations, their
//! extensions to p-covers, and the induced matrices on the multiplicator.
//!
//! Automorphisms act on the right: `compose(a, b)` is "first `a`, then
//! `b`". Matrices act on row vectors, so the matrix of `compose(a, b)` is
//! `matrix(a) * matrix(b)`.

use std::collections::HashMap;

use crate::matfp::{checked_gl_order, gl_generators, FpMatrix};
use crate::pcover::CoverData;
use crate::pcpres::{Definition, ExponentWord, PcPresentation};
use crate::{Error, PrimeField, Result};

/// An automorphism given by the images of the weight-one generators.
/// Images of the remaining generators are derived through the definitions
/// and cached.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Automorphism {
    full: Vec<ExponentWord>,
    d: usize,
}

impl std::fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Aut{:?}", self.images())
    }
}

/// Images of all generators of `g` under the endomorphism sending the
/// weight-one generators to `base`.
pub fn extend_images(g: &PcPresentation, base: &[ExponentWord]) -> Vec<ExponentWord> {
    let n = g.n();
    let mut full: Vec<ExponentWord> = base.to_vec();
    for k in base.len()..n {
        let def = g.definitions()[k].expect("generators past d carry definitions");
        let (u, rhs) = match def {
            Definition::Power { i } => (g.power(&full[i], g.p() as u64), g.power_rhs(i)),
            Definition::Comm { j, i } => (g.commutator(&full[j], &full[i]), g.comm_rhs(j, i)),
        };
        // rhs = v * a_k with v supported before k
        let mut v = rhs.clone();
        v[k] = 0;
        let v_img = apply_with(g, &full, &v);
        full.push(g.multiply(&g.inverse(&v_img), &u));
    }
    full
}

/// Evaluates the normal form `w` with generator images `imgs`.
fn apply_with(g: &PcPresentation, imgs: &[ExponentWord], w: &[u32]) -> ExponentWord {
    let mut e = g.identity();
    for (t, &x) in w.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let letters: Vec<(usize, u32)> =
            imgs[t].iter().enumerate().filter(|(_, &y)| y != 0).map(|(s, &y)| (s, y)).collect();
        for _ in 0..x {
            g.mul_letters(&mut e, &letters);
        }
    }
    e
}

impl Automorphism {
    /// Checked constructor.
    pub fn new(g: &PcPresentation, images: Vec<ExponentWord>) -> Result<Self> {
        let a = Self::new_unchecked(g, images);
        a.check(g)?;
        Ok(a)
    }

    /// Builds the map without verifying the relations.
    pub fn new_unchecked(g: &PcPresentation, images: Vec<ExponentWord>) -> Self {
        assert_eq!(images.len(), g.d(), "one image per weight-one generator");
        let full = extend_images(g, &images);
        Self { full, d: g.d() }
    }

    pub fn identity(g: &PcPresentation) -> Self {
        Self::new_unchecked(g, (0..g.d()).map(|i| g.generator(i)).collect())
    }

    /// Automorphism of an elementary abelian group from a matrix whose
    /// rows are the generator images.
    pub fn from_matrix(g: &PcPresentation, m: &FpMatrix) -> Result<Self> {
        Self::new(g, m.to_rows())
    }

    /// Images of the weight-one generators.
    pub fn images(&self) -> &[ExponentWord] {
        &self.full[..self.d]
    }

    pub fn full_images(&self) -> &[ExponentWord] {
        &self.full
    }

    pub fn apply(&self, g: &PcPresentation, w: &[u32]) -> ExponentWord {
        apply_with(g, &self.full, w)
    }

    /// First `self`, then `other`.
    pub fn compose(&self, g: &PcPresentation, other: &Automorphism) -> Automorphism {
        let images = self.images().iter().map(|w| other.apply(g, w)).collect();
        Self::new_unchecked(g, images)
    }

    /// The `x` with `x^self = y`, solved one weight layer at a time.
    pub fn preimage(&self, g: &PcPresentation, y: &[u32]) -> ExponentWord {
        let p = g.p();
        let weights = g.weights();
        let mut x = g.identity();
        for w in 1..=g.class() {
            let layer: Vec<usize> = (0..g.n()).filter(|&k| weights[k] == w).collect();
            let r = g.multiply(&g.inverse(&self.apply(g, &x)), y);
            let rho: Vec<u32> = layer.iter().map(|&k| r[k]).collect();
            if rho.iter().all(|&v| v == 0) {
                continue;
            }
            let rows: Vec<Vec<u32>> = layer.iter().map(|&k| layer.iter().map(|&t| self.full[k][t]).collect()).collect();
            let lmat = FpMatrix::from_rows(p, layer.len(), &rows);
            let sigma = lmat.inverse().expect("automorphisms act invertibly on each layer").apply_row(&rho);
            let step: Vec<(usize, u32)> =
                layer.iter().zip(sigma).filter(|(_, s)| *s != 0).map(|(&k, s)| (k, s)).collect();
            g.mul_letters(&mut x, &step);
        }
        x
    }

    pub fn inverse(&self, g: &PcPresentation) -> Automorphism {
        let images = (0..self.d).map(|i| self.preimage(g, &g.generator(i))).collect();
        Self::new_unchecked(g, images)
    }

    /// Matrix on the Frattini quotient `G / Phi(G)`.
    pub fn frattini_matrix(&self, g: &PcPresentation) -> FpMatrix {
        FpMatrix::from_rows(g.p(), self.d, &self.images().iter().map(|w| w[..self.d].to_vec()).collect::<Vec<_>>())
    }

    pub fn is_identity(&self, g: &PcPresentation) -> bool {
        (0..self.d).all(|i| self.full[i] == g.generator(i))
    }

    /// Verifies that the map respects every relation and is bijective.
    pub fn check(&self, g: &PcPresentation) -> Result<()> {
        if !self.frattini_matrix(g).is_invertible() {
            return Err(Error::NotAutomorphism("images do not generate the group".into()));
        }
        let defs: Vec<Definition> = g.definitions().iter().flatten().copied().collect();
        for label in g.relation_labels() {
            if defs.contains(&label) {
                continue;
            }
            let lhs = match label {
                Definition::Power { i } => g.power(&self.full[i], g.p() as u64),
                Definition::Comm { j, i } => g.commutator(&self.full[j], &self.full[i]),
            };
            if lhs != self.apply(g, g.relation_rhs(label)) {
                return Err(Error::NotAutomorphism(format!("relation {label} is not preserved")));
            }
        }
        Ok(())
    }

    /// Same images read in a bigger group whose first generators are those
    /// of the current one (a cover or descendant).
    pub fn lift_to(&self, target: &PcPresentation) -> Automorphism {
        let images = self
            .images()
            .iter()
            .map(|w| {
                let mut v = w.clone();
                v.resize(target.n(), 0);
                v
            })
            .collect();
        Self::new_unchecked(target, images)
    }
}

/// Automorphism group generators with the group order as bookkeeping.
#[derive(Clone, Debug)]
pub struct AutGroup {
    pub gens: Vec<Automorphism>,
    pub order: u128,
}

impl AutGroup {
    /// `GL(d, p)` acting on `C_p^d`.
    pub fn general_linear(g: &PcPresentation, field: &PrimeField) -> Result<Self> {
        let d = g.d();
        if g.n() != d {
            return Err(Error::Precondition("general linear automorphisms need an elementary abelian group".into()));
        }
        let gens = if d == 0 {
            Vec::new()
        } else {
            gl_generators(d, field).iter().map(|m| Automorphism::from_matrix(g, m)).collect::<Result<_>>()?
        };
        let order = checked_gl_order(d, g.p())
            .ok_or_else(|| Error::ResourceCap(format!("|GL({d}, {})| exceeds 128 bits", g.p())))?;
        Ok(Self { gens, order })
    }
}

/// One matrix on `M(G)` per automorphism generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperationImage {
    pub matrices: Vec<FpMatrix>,
}

/// Matrix of the extension automorphism of `alpha` restricted to `M(G)`.
pub fn extend_automorphism(cd: &CoverData, alpha: &Automorphism) -> Result<FpMatrix> {
    let lifted = alpha.lift_to(&cd.cover);
    let n = cd.parent_n;
    let mut rows = Vec::with_capacity(cd.multiplicator_dim());
    for &k in &cd.multiplicator_gens {
        let img = &lifted.full_images()[k];
        if img[..n].iter().any(|&x| x != 0) {
            return Err(Error::NotAutomorphism(format!("image of multiplicator generator a{} leaves M(G)", k + 1)));
        }
        rows.push(img[n..].to_vec());
    }
    let m = FpMatrix::from_rows(cd.p(), cd.multiplicator_dim(), &rows);
    if !m.is_invertible() {
        return Err(Error::NotAutomorphism("induced map on M(G) is singular".into()));
    }
    Ok(m)
}

pub fn operation_homomorphism(cd: &CoverData, auts: &AutGroup) -> Result<OperationImage> {
    let matrices = auts.gens.iter().map(|a| extend_automorphism(cd, a)).collect::<Result<_>>()?;
    Ok(OperationImage { matrices })
}

/// Transposes every matrix.
pub fn dual(img: &OperationImage) -> OperationImage {
    OperationImage { matrices: img.matrices.iter().map(FpMatrix::transpose).collect() }
}

/// Base and strong generating set for a group of automorphisms, using the
/// weight-one generators as base points.
pub struct StabChain<'a> {
    g: &'a PcPresentation,
    levels: Vec<Level>,
    strong: Vec<(Automorphism, Automorphism)>,
}

struct Level {
    base: ExponentWord,
    gens: Vec<usize>,
    points: Vec<ExponentWord>,
    index: HashMap<ExponentWord, usize>,
    /// Transversal element and its inverse for each point.
    trans: Vec<(Automorphism, Automorphism)>,
}

impl<'a> StabChain<'a> {
    pub fn new(g: &'a PcPresentation) -> Self {
        let id = Automorphism::identity(g);
        let levels = (0..g.d())
            .map(|i| {
                let base = g.generator(i);
                Level {
                    index: HashMap::from([(base.clone(), 0)]),
                    points: vec![base.clone()],
                    base,
                    gens: Vec::new(),
                    trans: vec![(id.clone(), id.clone())],
                }
            })
            .collect();
        Self { g, levels, strong: Vec::new() }
    }

    pub fn order(&self) -> u128 {
        self.levels.iter().map(|l| l.points.len() as u128).product()
    }

    pub fn strong_generators(&self) -> Vec<Automorphism> {
        self.strong.iter().map(|(a, _)| a.clone()).collect()
    }

    /// Sifts through the chain; returns the residue and its level when the
    /// element is not yet in the group.
    fn sift(&self, alpha: &Automorphism) -> Option<(Automorphism, usize)> {
        let mut a = alpha.clone();
        for (l, level) in self.levels.iter().enumerate() {
            let b = &a.images()[l];
            if *b == level.base {
                continue;
            }
            match level.index.get(b) {
                Some(&pos) => a = a.compose(self.g, &level.trans[pos].1),
                None => return Some((a, l)),
            }
        }
        None
    }

    fn add_strong(&mut self, a: Automorphism, level: usize) {
        let inv = a.inverse(self.g);
        let s = self.strong.len();
        self.strong.push((a, inv));
        for l in 0..=level {
            self.levels[l].gens.push(s);
            self.extend_orbit(l);
        }
    }

    fn extend_orbit(&mut self, l: usize) {
        let g = self.g;
        let level = &mut self.levels[l];
        let mut pos = 0;
        while pos < level.points.len() {
            for &s in &level.gens {
                let (gen, gen_inv) = &self.strong[s];
                let img = gen.apply(g, &level.points[pos]);
                if level.index.contains_key(&img) {
                    continue;
                }
                let (t, t_inv) = &level.trans[pos];
                let u = t.compose(g, gen);
                let u_inv = gen_inv.compose(g, t_inv);
                level.index.insert(img.clone(), level.points.len());
                level.points.push(img);
                level.trans.push((u, u_inv));
            }
            pos += 1;
        }
    }

    /// Adds `alpha` unless it already lies in the group. Returns whether the
    /// chain grew.
    pub fn insert(&mut self, alpha: &Automorphism) -> bool {
        match self.sift(alpha) {
            Some((res, l)) => {
                self.add_strong(res, l);
                true
            }
            None => false,
        }
    }

    /// Completes the chain by sifting Schreier generators until every one
    /// sifts through, or until `target` is reached.
    pub fn close(&mut self, target: Option<u128>) {
        let mut done: std::collections::HashSet<(usize, usize, usize)> = Default::default();
        loop {
            let mut grew = false;
            'levels: for l in (0..self.levels.len()).rev() {
                let mut pos = 0;
                while pos < self.levels[l].points.len() {
                    let gens = self.levels[l].gens.clone();
                    for s in gens {
                        if target.is_some_and(|t| self.order() >= t) {
                            return;
                        }
                        if !done.insert((l, pos, s)) {
                            continue;
                        }
                        let level = &self.levels[l];
                        let (t, _) = &level.trans[pos];
                        let gen = &self.strong[s].0;
                        let img = gen.apply(self.g, &level.points[pos]);
                        let &dest = level.index.get(&img).expect("orbit closed under its generators");
                        let sch = t.compose(self.g, gen).compose(self.g, &level.trans[dest].1);
                        if self.insert(&sch) {
                            grew = true;
                            break 'levels;
                        }
                    }
                    pos += 1;
                }
            }
            if !grew {
                return;
            }
        }
    }

    /// Builds the full chain of the group generated by `gens`.
    pub fn from_generators(g: &'a PcPresentation, gens: &[Automorphism], target: Option<u128>) -> Self {
        let mut chain = Self::new(g);
        for a in gens {
            if target.is_some_and(|t| chain.order() >= t) {
                break;
            }
            chain.insert(a);
        }
        chain.close(target);
        chain
    }

    /// Membership test.
    pub fn contains(&self, alpha: &Automorphism) -> bool {
        self.sift(alpha).is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcover::build_cover;
    use crate::matfp::gl_order;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn ea(p: u32, d: usize) -> PcPresentation {
        PcPresentation::elementary_abelian(p, d).unwrap()
    }

    fn d_p(p: u32) -> PcPresentation {
        PcPresentation::builder(p, 3).comm(1, 0, &[(2, 1)]).build().unwrap()
    }

    fn random_gl(p: u32, d: usize, rng: &mut StdRng) -> FpMatrix {
        loop {
            let rows: Vec<Vec<u32>> = (0..d).map(|_| (0..d).map(|_| rng.gen_range(0..p)).collect()).collect();
            let m = FpMatrix::from_rows(p, d, &rows);
            if m.is_invertible() {
                return m;
            }
        }
    }

    fn random_dp_aut(g: &PcPresentation, rng: &mut StdRng) -> Automorphism {
        let p = g.p();
        loop {
            let imgs: Vec<ExponentWord> = (0..2).map(|_| (0..3).map(|_| rng.gen_range(0..p)).collect()).collect();
            if let Ok(a) = Automorphism::new(g, imgs) {
                return a;
            }
        }
    }

    #[test]
    fn closed_form_on_cp2() {
        let mut rng = StdRng::seed_from_u64(7);
        let g = ea(5, 2);
        let cd = build_cover(&g).unwrap();
        for _ in 0..50 {
            let m = random_gl(5, 2, &mut rng);
            let a = Automorphism::from_matrix(&g, &m).unwrap();
            let got = extend_automorphism(&cd, &a).unwrap();
            let (m1, m2, m3, m4) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
            let want = FpMatrix::from_rows(5, 3, &[vec![m.det(), 0, 0], vec![0, m1, m2], vec![0, m3, m4]]);
            assert_eq!(got, want);
        }
    }

    #[test]
    fn identity_gives_identity_matrix() {
        for g in [ea(5, 3), d_p(7)] {
            let cd = build_cover(&g).unwrap();
            let m = extend_automorphism(&cd, &Automorphism::identity(&g)).unwrap();
            assert_eq!(m, FpMatrix::identity(g.p(), cd.multiplicator_dim()));
        }
    }

    #[test]
    fn homomorphism_property() {
        let mut rng = StdRng::seed_from_u64(11);
        for g in [ea(5, 2), d_p(5)] {
            let cd = build_cover(&g).unwrap();
            for _ in 0..30 {
                let (a, b) = if g.n() == 2 {
                    (
                        Automorphism::from_matrix(&g, &random_gl(5, 2, &mut rng)).unwrap(),
                        Automorphism::from_matrix(&g, &random_gl(5, 2, &mut rng)).unwrap(),
                    )
                } else {
                    (random_dp_aut(&g, &mut rng), random_dp_aut(&g, &mut rng))
                };
                let ab = a.compose(&g, &b);
                let lhs = extend_automorphism(&cd, &ab).unwrap();
                let rhs = extend_automorphism(&cd, &a).unwrap().matmul(&extend_automorphism(&cd, &b).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn nucleus_is_invariant() {
        let mut rng = StdRng::seed_from_u64(3);
        let g = d_p(5);
        let cd = build_cover(&g).unwrap();
        let n = cd.nucleus_subspace();
        for _ in 0..30 {
            let m = extend_automorphism(&cd, &random_dp_aut(&g, &mut rng)).unwrap();
            assert_eq!(n.act(&m), n);
        }
    }

    #[test]
    fn inverse_and_preimage() {
        let mut rng = StdRng::seed_from_u64(5);
        let g = d_p(7);
        for _ in 0..30 {
            let a = random_dp_aut(&g, &mut rng);
            let inv = a.inverse(&g);
            assert!(a.compose(&g, &inv).is_identity(&g));
            assert!(inv.compose(&g, &a).is_identity(&g));
        }
    }

    #[test]
    fn rejects_non_automorphism() {
        let g = d_p(5);
        // a1 -> a1, a2 -> a1 is not surjective
        assert!(Automorphism::new(&g, vec![vec![1, 0, 0], vec![1, 0, 0]]).is_err());
    }

    #[test]
    fn dual_is_an_involution() {
        let g = ea(5, 2);
        let cd = build_cover(&g).unwrap();
        let auts = AutGroup::general_linear(&g, &PrimeField::new(5).unwrap()).unwrap();
        let img = operation_homomorphism(&cd, &auts).unwrap();
        assert_eq!(img.matrices.len(), 3);
        assert!(img.matrices.iter().all(FpMatrix::is_invertible));
        assert_eq!(dual(&dual(&img)), img);
    }

    #[test]
    fn chain_of_gl_has_gl_order() {
        for (p, d) in [(5, 2), (7, 2), (5, 3)] {
            let g = ea(p, d);
            let auts = AutGroup::general_linear(&g, &PrimeField::new(p).unwrap()).unwrap();
            let chain = StabChain::from_generators(&g, &auts.gens, None);
            assert_eq!(chain.order(), gl_order(d, p));
        }
    }

    #[test]
    fn aut_dp_order_by_chain() {
        // every pair of images generating modulo a3 defines an automorphism
        let p = 5u32;
        let g = d_p(p);
        let mut gens = Vec::new();
        let f = PrimeField::new(p).unwrap();
        for m in gl_generators(2, &f) {
            let imgs = m.to_rows().into_iter().map(|mut r| {
                r.push(0);
                r
            });
            gens.push(Automorphism::new(&g, imgs.collect()).unwrap());
        }
        gens.push(Automorphism::new(&g, vec![vec![1, 0, 1], vec![0, 1, 0]]).unwrap());
        gens.push(Automorphism::new(&g, vec![vec![1, 0, 0], vec![0, 1, 1]]).unwrap());
        let chain = StabChain::from_generators(&g, &gens, None);
        assert_eq!(chain.order(), gl_order(2, p) * (p as u128).pow(2));
    }
}
