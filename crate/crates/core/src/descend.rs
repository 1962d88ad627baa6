//! Immediate descendants: quotients of the p-cover by allowable subgroups,
//! one per orbit of the automorphism group, with automorphism generators
//! lifted to each descendant that will be processed further.

use crate::action::{operation_homomorphism, AutGroup, Automorphism, StabChain};
use crate::matfp::{FpMatrix, SubspaceCanon};
use crate::orbits::{partition, partition_parallel, schreier_triples, OrbitInfo, SubspaceAction};
use crate::pcover::{build_cover, CoverData};
use crate::pcpres::{ExponentWord, PcPresentation, PresentationJson};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A group in the generation tree.
#[derive(Clone, Debug)]
pub struct DescendantRecord {
    pub presentation: PcPresentation,
    /// Catalog index of the parent; `None` for elementary abelian roots.
    pub parent_id: Option<usize>,
    pub order_exponent: usize,
    pub p_class: u32,
    /// Present when the group is itself to be used as a parent.
    pub auts: Option<AutGroup>,
    /// Allowable subgroup of the parent's multiplicator, in multiplicator
    /// coordinates.
    pub chosen_subgroup: Option<SubspaceCanon>,
    /// `(step, representative index)` per generation step from the root.
    pub lineage: Vec<(usize, u64)>,
}

impl DescendantRecord {
    /// Root `C_p^d` with `Aut = GL(d, p)`.
    pub fn root(p: u32, d: usize) -> Result<Self> {
        let mut r = Self::elementary(p, d)?;
        r.auts = Some(AutGroup::general_linear(&r.presentation, &crate::PrimeField::new(p)?)?);
        Ok(r)
    }

    /// Root `C_p^d` without automorphisms, for a leaf of the search.
    pub fn elementary(p: u32, d: usize) -> Result<Self> {
        Ok(Self {
            p_class: 1,
            order_exponent: d,
            presentation: PcPresentation::elementary_abelian(p, d)?,
            parent_id: None,
            auts: None,
            chosen_subgroup: None,
            lineage: Vec::new(),
        })
    }

    pub fn d(&self) -> usize {
        self.presentation.d()
    }

    pub fn to_json(&self) -> DescendantJson {
        DescendantJson {
            presentation: self.presentation.to_json(),
            parent: self.parent_id,
            class: Some(self.p_class),
            order_exponent: Some(self.order_exponent),
            automorphisms: self.auts.as_ref().map(|a| AutomorphismsJson {
                order: Some(a.order.to_string()),
                generators: a.gens.iter().map(|x| x.images().to_vec()).collect(),
            }),
        }
    }

    /// Reads a group to be used as a parent. Automorphism generators are
    /// checked and their group order recomputed; without them only
    /// elementary abelian groups are accepted, with `GL(d, p)`.
    pub fn from_json(js: &DescendantJson) -> Result<Self> {
        let g = PcPresentation::from_json(&js.presentation)?;
        let bad = |m: String| Err(Error::Malformed(m));
        if js.class.is_some_and(|c| c != g.class()) {
            return bad(format!("class {} given but the presentation has class {}", js.class.unwrap(), g.class()));
        }
        if js.order_exponent.is_some_and(|n| n != g.n()) {
            return bad(format!("order exponent does not match {} generators", g.n()));
        }
        let auts = match &js.automorphisms {
            Some(a) => {
                let gens: Vec<Automorphism> =
                    a.generators.iter().map(|imgs| Automorphism::new(&g, imgs.clone())).collect::<Result<_>>()?;
                let order = StabChain::from_generators(&g, &gens, None).order();
                if let Some(given) = &a.order {
                    if given.trim() != order.to_string() {
                        return bad(format!("automorphism group order {given} given but the generators give {order}"));
                    }
                }
                AutGroup { gens, order }
            }
            None if g.n() == g.d() => AutGroup::general_linear(&g, &crate::PrimeField::new(g.p())?)?,
            None => return bad("automorphism generators are required for a non-elementary group".into()),
        };
        Ok(Self {
            p_class: g.class(),
            order_exponent: g.n(),
            presentation: g,
            parent_id: js.parent,
            auts: Some(auts),
            chosen_subgroup: None,
            lineage: Vec::new(),
        })
    }
}

/// Generators of an automorphism group as images of the weight-one
/// generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomorphismsJson {
    /// Decimal, since it may exceed 64 bits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<String>,
    pub generators: Vec<Vec<ExponentWord>>,
}

/// A presentation with its place in the generation tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescendantJson {
    #[serde(flatten)]
    pub presentation: PresentationJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_exponent: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automorphisms: Option<AutomorphismsJson>,
}

#[derive(Clone, Debug)]
pub struct DescendOptions {
    /// Largest order exponent to produce.
    pub max_exponent: usize,
    /// Lift automorphisms to every descendant, not only those of order
    /// below `p^max_exponent`.
    pub always_lift: bool,
    /// Recompute each lifted automorphism group order by Schreier-Sims.
    pub verify_aut_orders: bool,
    /// Largest orbit problem (number of points) accepted.
    pub point_cap: u64,
    /// Largest number of strong generators accepted for a stabilizer.
    pub schreier_cap: usize,
    /// Problems with at least this many points run the parallel BFS.
    pub parallel_threshold: u64,
}

impl Default for DescendOptions {
    fn default() -> Self {
        Self {
            max_exponent: 5,
            always_lift: false,
            verify_aut_orders: false,
            point_cap: 10_000_000,
            schreier_cap: 4096,
            parallel_threshold: 1 << 20,
        }
    }
}

/// The subspace problem for one step: either subspaces `U` of dimension
/// `m - step` directly, or their annihilators of dimension `step` under
/// the inverse-transpose action.
struct StepProblem {
    action: SubspaceAction,
    dual: bool,
    m: usize,
    nucleus: SubspaceCanon,
    nucleus_perp: SubspaceCanon,
}

impl StepProblem {
    fn new(cd: &CoverData, mats: Vec<FpMatrix>, step: usize) -> Result<Self> {
        let m = cd.multiplicator_dim();
        let k = m - step;
        let dual = step < k;
        let mats = if dual {
            mats.iter().map(|g| g.inverse().map(|x| x.transpose())).collect::<Result<Vec<_>>>()?
        } else {
            mats
        };
        let dim = if dual { step } else { k };
        let nucleus = cd.nucleus_subspace();
        let nucleus_perp = nucleus.orthogonal_complement();
        Ok(Self { action: SubspaceAction::new(cd.p(), m, dim, mats)?, dual, m, nucleus, nucleus_perp })
    }

    /// `U` for the point `x`.
    fn subgroup(&self, x: u64) -> SubspaceCanon {
        let s = self.action.subspace(x);
        if self.dual {
            s.orthogonal_complement()
        } else {
            s
        }
    }

    /// `U + N = M`, tested on the point itself.
    fn allowable(&self, x: u64) -> bool {
        let s = self.action.subspace(x);
        if self.dual {
            s.intersection(&self.nucleus_perp).dim() == 0
        } else {
            s.sum(&self.nucleus).dim() == self.m
        }
    }
}

/// Quotient of the cover by an allowable subgroup.
pub fn make_descendant(cd: &CoverData, u: &SubspaceCanon) -> Result<PcPresentation> {
    let m = cd.multiplicator_dim();
    if u.ambient() != m || u.dim() >= m || u.sum(&cd.nucleus_subspace()).dim() != m {
        return Err(Error::Precondition("subgroup is not allowable".into()));
    }
    let words: Vec<ExponentWord> = u.basis().iter().map(|v| cd.to_cover_word(v)).collect();
    let (child, _) = cd.cover.quotient(&words)?;
    child.check_weighted(false)?;
    if let Err(f) = child.is_consistent() {
        return Err(Error::Internal(format!("descendant inconsistent at {:?}", f.test)));
    }
    Ok(child)
}

/// Orbit representatives of allowable subgroups of codimension `step`,
/// with orbit sizes.
pub fn allowable_reps(cd: &CoverData, mats: &[FpMatrix], step: usize) -> Result<Vec<(SubspaceCanon, u64)>> {
    if !cd.is_extendable() {
        return Err(Error::NotExtendable);
    }
    let m = cd.multiplicator_dim();
    if step == 0 || step > cd.nucleus_dim() {
        return Err(Error::Precondition(format!("step {step} outside 1..={}", cd.nucleus_dim())));
    }
    if step == m {
        return Ok(vec![(SubspaceCanon::zero(cd.p(), m), 1)]);
    }
    let prob = StepProblem::new(cd, mats.to_vec(), step)?;
    Ok(partition(&prob.action, 0, |_| false)
        .into_iter()
        .filter(|o| prob.allowable(o.rep))
        .map(|o| (prob.subgroup(o.rep), o.size))
        .collect())
}

/// Removes identity and repeated matrices; enough when only orbits matter.
fn distinct_nontrivial(mats: &[FpMatrix]) -> Vec<FpMatrix> {
    let mut out: Vec<FpMatrix> = Vec::new();
    for g in mats {
        let id = FpMatrix::identity(g.p(), g.rows());
        if *g != id && !out.contains(g) {
            out.push(g.clone());
        }
    }
    if out.is_empty() {
        out.extend(mats.first().cloned());
    }
    out
}

/// Stabilizer in the parent's automorphism group of the orbit
/// representative, from Schreier generators of a BFS tree, stopping once
/// the known order `|Aut(G)| / |orbit|` is reached.
fn stabilizer(
    g: &PcPresentation,
    auts: &AutGroup,
    action: &SubspaceAction,
    info: &OrbitInfo,
    cap: usize,
) -> Result<(Vec<Automorphism>, u128)> {
    let tree = info.tree.as_ref().expect("tree recorded for stabilizer orbits");
    if auts.order % info.size as u128 != 0 {
        return Err(Error::Internal(format!("orbit size {} does not divide |Aut| = {}", info.size, auts.order)));
    }
    let target = auts.order / info.size as u128;
    let gen_inv: Vec<Automorphism> = auts.gens.iter().map(|a| a.inverse(g)).collect();
    let id = Automorphism::identity(g);
    let mut trans: Vec<Automorphism> = Vec::with_capacity(tree.order.len());
    let mut trans_inv: Vec<Automorphism> = Vec::with_capacity(tree.order.len());
    trans.push(id.clone());
    trans_inv.push(id);
    for pos in 1..tree.order.len() {
        let (prev, s) = tree.parent[pos];
        trans.push(trans[prev as usize].compose(g, &auts.gens[s as usize]));
        trans_inv.push(gen_inv[s as usize].compose(g, &trans_inv[prev as usize]));
    }
    let mut chain = StabChain::new(g);
    for (pos, s, dest) in schreier_triples(action, tree) {
        if chain.order() >= target {
            break;
        }
        let sch = trans[pos as usize].compose(g, &auts.gens[s]).compose(g, &trans_inv[dest as usize]);
        chain.insert(&sch);
        if chain.strong_generators().len() > cap {
            return Err(Error::ResourceCap(format!("more than {cap} stabilizer generators")));
        }
    }
    if chain.order() < target {
        chain.close(Some(target));
    }
    if chain.order() != target {
        return Err(Error::Internal(format!(
            "stabilizer has order {} but orbit-stabilizer predicts {target}",
            chain.order()
        )));
    }
    Ok((chain.strong_generators(), target))
}

/// Automorphism group of `child = P(G)/U` from generators of the
/// stabilizer of `U` plus the central automorphisms `a_i -> a_i t` with `t`
/// in the last layer of `child`.
pub fn lift_automorphisms(
    parent: &PcPresentation,
    stab: &[Automorphism],
    stab_order: u128,
    child: &PcPresentation,
) -> Result<AutGroup> {
    let d = parent.d();
    let top: Vec<usize> = (parent.n()..child.n()).collect();
    let mut gens = Vec::with_capacity(stab.len() + d * top.len());
    for a in stab {
        let lifted = a.lift_to(child);
        lifted.check(child)?;
        gens.push(lifted);
    }
    for i in 0..d {
        for &t in &top {
            let mut images: Vec<ExponentWord> = (0..d).map(|j| child.generator(j)).collect();
            images[i][t] = 1;
            gens.push(Automorphism::new(child, images)?);
        }
    }
    let order = stab_order * (child.p() as u128).pow((d * top.len()) as u32);
    Ok(AutGroup { gens, order })
}

/// All immediate descendants of `parent` of order at most
/// `p^opts.max_exponent`, one per isomorphism class.
pub fn immediate_descendants(
    parent: &DescendantRecord,
    parent_id: Option<usize>,
    opts: &DescendOptions,
) -> Result<Vec<DescendantRecord>> {
    let g = &parent.presentation;
    let auts = parent
        .auts
        .as_ref()
        .ok_or_else(|| Error::Precondition("parent carries no automorphism group".into()))?;
    let cd = build_cover(g)?;
    if !cd.is_extendable() {
        return Ok(Vec::new());
    }
    let img = operation_homomorphism(&cd, auts)?;
    let m = cd.multiplicator_dim();
    let n = g.n();
    let mut out = Vec::new();
    let max_step = cd.nucleus_dim().min(opts.max_exponent.saturating_sub(n));
    for step in 1..=max_step {
        let lift = opts.always_lift || n + step < opts.max_exponent;
        let mut emit = |u: SubspaceCanon, rep: u64, auts_child: Option<(Vec<Automorphism>, u128)>| -> Result<()> {
            let child = make_descendant(&cd, &u)?;
            let auts = match auts_child {
                Some((stab, order)) => {
                    let a = lift_automorphisms(g, &stab, order, &child)?;
                    if opts.verify_aut_orders {
                        let got = StabChain::from_generators(&child, &a.gens, None).order();
                        if got != a.order {
                            return Err(Error::Internal(format!(
                                "lifted automorphism group has order {got}, expected {}",
                                a.order
                            )));
                        }
                    }
                    Some(a)
                }
                None => None,
            };
            let mut lineage = parent.lineage.clone();
            lineage.push((step, rep));
            out.push(DescendantRecord {
                order_exponent: child.n(),
                p_class: child.class(),
                presentation: child,
                parent_id,
                auts,
                chosen_subgroup: Some(u),
                lineage,
            });
            Ok(())
        };
        if step == m {
            // only U = 0, allowable because N = M here
            let stab = lift.then(|| (auts.gens.clone(), auts.order));
            emit(SubspaceCanon::zero(cd.p(), m), 0, stab)?;
            continue;
        }
        let mats = if lift { img.matrices.clone() } else { distinct_nontrivial(&img.matrices) };
        let prob = StepProblem::new(&cd, mats, step)?;
        let size = crate::orbits::Action::size(&prob.action);
        if size > opts.point_cap {
            return Err(Error::ResourceCap(format!(
                "orbit problem on {size} points exceeds the cap of {}",
                opts.point_cap
            )));
        }
        if lift {
            let infos = partition(&prob.action, 0, |x| prob.allowable(x));
            for info in infos.iter().filter(|o| prob.allowable(o.rep)) {
                let stab = stabilizer(g, auts, &prob.action, info, opts.schreier_cap)?;
                emit(prob.subgroup(info.rep), info.rep, Some(stab))?;
            }
        } else {
            let reps: Vec<u64> = if size >= opts.parallel_threshold {
                partition_parallel(&prob.action, 0).into_iter().map(|(r, _)| r).collect()
            } else {
                partition(&prob.action, 0, |_| false).into_iter().map(|o| o.rep).collect()
            };
            for rep in reps.into_iter().filter(|&x| prob.allowable(x)) {
                emit(prob.subgroup(rep), rep, None)?;
            }
        }
    }
    Ok(out)
}
