//! p-covers: the largest central elementary abelian extension of a group
//! that is still generated by `d` elements.
//!
//! Every non-definition relation `u = v` of the parent receives a new
//! central generator ("tail") `t`, giving `u = v t`. The consistency test
//! words are run once with all tails free; since tails are central of
//! order `p`, each discrepancy is a linear relation among them. Solving that
//! system leaves the multiplicator `M(G)`, and the survivors of weight
//! `c + 1` span the nucleus `N(G)`.

use serde::{Deserialize, Serialize};

use crate::matfp::{rref_rows, SubspaceCanon};
use crate::pcpres::{Definition, ExponentWord, PcPresentation, PresentationJson, RelationLabel};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverData {
    pub cover: PcPresentation,
    pub parent_n: usize,
    pub parent_class: u32,
    /// Cover generator indices spanning `M(G)`, in increasing order.
    pub multiplicator_gens: Vec<usize>,
    /// Cover generator indices spanning `N(G)`, a suffix of the above.
    pub nucleus_gens: Vec<usize>,
    pub tails_eliminated: usize,
    /// Tail attached to each non-definition relation of the parent, written
    /// in multiplicator coordinates.
    pub label_images: Vec<(RelationLabel, Vec<u32>)>,
}

/// Natural weight of the tail on a relation.
fn tail_weight(weights: &[u32], label: RelationLabel) -> u32 {
    match label {
        Definition::Power { i } => weights[i] + 1,
        Definition::Comm { j, i } => weights[i] + weights[j],
    }
}

/// Keep-preference among tails of equal weight, smaller is kept first:
/// commutators with a weight-one entry, then powers, then the rest.
fn keep_rank(weights: &[u32], label: RelationLabel) -> (u8, usize, usize) {
    match label {
        Definition::Comm { j, i } if weights[i] == 1 => (0, i, j),
        Definition::Power { i } => (1, i, 0),
        Definition::Comm { j, i } => (2, i, j),
    }
}

/// Position of a surviving tail in the multiplicator basis.
fn survivor_rank(weights: &[u32], label: RelationLabel) -> (u32, u8, usize, usize) {
    let w = tail_weight(weights, label);
    match label {
        Definition::Comm { j, i } => (w, 0, i, j),
        Definition::Power { i } => (w, 1, i, 0),
    }
}

/// Builds the p-cover presentation of a consistent weighted presentation.
pub fn build_cover(pres: &PcPresentation) -> Result<CoverData> {
    if let Err(f) = pres.is_consistent() {
        return Err(Error::Inconsistent(format!("{:?}", f.test)));
    }
    pres.check_weighted(false)?;
    let p = pres.p();
    let n = pres.n();
    let c = pres.class();
    let weights = pres.weights().to_vec();
    let definitions: Vec<RelationLabel> = pres.definitions().iter().flatten().copied().collect();
    let labels: Vec<RelationLabel> =
        pres.relation_labels().into_iter().filter(|l| !definitions.contains(l)).collect();
    let tcount = labels.len();
    debug_assert_eq!(tcount, pres.d() + n * (n - 1) / 2);

    // Extension with all tails free and central.
    let total = n + tcount;
    let widen = |w: &ExponentWord| -> ExponentWord {
        let mut v = w.clone();
        v.resize(total, 0);
        v
    };
    let mut power: Vec<ExponentWord> = (0..n).map(|i| widen(pres.power_rhs(i))).collect();
    let mut comm: Vec<Vec<ExponentWord>> =
        (0..n).map(|j| (0..j).map(|i| widen(pres.comm_rhs(j, i))).collect()).collect();
    for (t, &label) in labels.iter().enumerate() {
        match label {
            Definition::Power { i } => power[i][n + t] = 1,
            Definition::Comm { j, i } => comm[j][i][n + t] = 1,
        }
    }
    power.extend((0..tcount).map(|_| vec![0; total]));
    comm.extend((n..total).map(|j| vec![vec![0; total]; j]));
    let mut wts = weights.clone();
    wts.extend(labels.iter().map(|&l| tail_weight(&weights, l)));
    let mut defs = pres.definitions().to_vec();
    defs.extend(std::iter::repeat_n(None, tcount));
    let free = PcPresentation::new(p, pres.d(), power, comm, wts, defs)?;

    // Column order for elimination: weight ascending, least preferred first.
    let mut order: Vec<usize> = (0..tcount).collect();
    order.sort_by_key(|&t| {
        let (a, b, c2) = keep_rank(&weights, labels[t]);
        (tail_weight(&weights, labels[t]), std::cmp::Reverse((a, b, c2)))
    });
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for f in free.consistency_failures() {
        if f.lhs[..n] != f.rhs[..n] {
            return Err(Error::Internal(format!("consistency failure {:?} outside the tail space", f.test)));
        }
        let row: Vec<u32> = order.iter().map(|&t| (f.lhs[n + t] + p - f.rhs[n + t]) % p).collect();
        if row.iter().any(|&x| x != 0) {
            rows.push(row);
        }
    }
    let pivots = rref_rows(p, tcount, &mut rows);
    // Column positions of survivors, then their final numbering.
    let mut survivors: Vec<usize> = (0..tcount).filter(|col| !pivots.contains(col)).collect();
    survivors.sort_by_key(|&col| survivor_rank(&weights, labels[order[col]]));
    let m = survivors.len();
    let mut coord_of_col = vec![usize::MAX; tcount];
    for (s, &col) in survivors.iter().enumerate() {
        coord_of_col[col] = s;
    }
    // Each tail in multiplicator coordinates; a pivot tail equals minus the
    // rest of its row.
    let mut tail_vec = vec![vec![0u32; m]; tcount];
    for (col, &coord) in coord_of_col.iter().enumerate() {
        if coord != usize::MAX {
            tail_vec[order[col]][coord] = 1;
        }
    }
    for (r, &pc) in pivots.iter().enumerate() {
        let t = order[pc];
        for col in 0..tcount {
            if col != pc && rows[r][col] != 0 {
                let coord = coord_of_col[col];
                tail_vec[t][coord] = (tail_vec[t][coord] + p - rows[r][col]) % p;
            }
        }
    }

    let cn = n + m;
    let place = |w: &ExponentWord, tail: Option<&Vec<u32>>| -> ExponentWord {
        let mut v = w.clone();
        v.resize(cn, 0);
        if let Some(tv) = tail {
            for (s, &x) in tv.iter().enumerate() {
                v[n + s] = x;
            }
        }
        v
    };
    let tail_of = |label: RelationLabel| labels.iter().position(|&l| l == label).map(|t| &tail_vec[t]);
    let mut power: Vec<ExponentWord> =
        (0..n).map(|i| place(pres.power_rhs(i), tail_of(Definition::Power { i }))).collect();
    let mut comm: Vec<Vec<ExponentWord>> = (0..n)
        .map(|j| (0..j).map(|i| place(pres.comm_rhs(j, i), tail_of(Definition::Comm { j, i }))).collect())
        .collect();
    power.extend((0..m).map(|_| vec![0; cn]));
    comm.extend((n..cn).map(|j| vec![vec![0; cn]; j]));
    let mut wts = weights.clone();
    let mut defs = pres.definitions().to_vec();
    for &col in &survivors {
        let label = labels[order[col]];
        wts.push(tail_weight(&weights, label));
        defs.push(Some(label));
    }
    let cover = PcPresentation::new(p, pres.d(), power, comm, wts, defs)?;
    cover.check_weighted(false)?;
    if let Err(f) = cover.is_consistent() {
        return Err(Error::Internal(format!("cover still inconsistent at {:?}", f.test)));
    }

    let multiplicator_gens: Vec<usize> = (n..cn).collect();
    let nucleus_gens: Vec<usize> = (n..cn).filter(|&k| cover.weights()[k] == c + 1).collect();
    let label_images: Vec<(RelationLabel, Vec<u32>)> =
        labels.iter().zip(tail_vec.iter()).map(|(&l, v)| (l, v.clone())).collect();

    // The nucleus must also be the span of the top-weight relation tails,
    // and tails of still higher weight must vanish.
    let top: Vec<Vec<u32>> = label_images
        .iter()
        .filter(|(l, _)| tail_weight(&weights, *l) == c + 1)
        .map(|(_, v)| v.clone())
        .collect();
    let by_labels = SubspaceCanon::from_rows(p, m, &top);
    let by_weight = SubspaceCanon::from_rows(
        p,
        m,
        &nucleus_gens.iter().map(|&k| unit(m, k - n)).collect::<Vec<_>>(),
    );
    if by_labels != by_weight {
        return Err(Error::Internal("nucleus by weight disagrees with the span of top-weight tails".into()));
    }
    if label_images.iter().any(|(l, v)| tail_weight(&weights, *l) > c + 1 && v.iter().any(|&x| x != 0)) {
        return Err(Error::Internal("a tail of weight above c+1 survived".into()));
    }

    Ok(CoverData {
        cover,
        parent_n: n,
        parent_class: c,
        multiplicator_gens,
        nucleus_gens,
        tails_eliminated: tcount - m,
        label_images,
    })
}

fn unit(m: usize, k: usize) -> Vec<u32> {
    let mut v = vec![0; m];
    v[k] = 1;
    v
}

impl CoverData {
    pub fn p(&self) -> u32 {
        self.cover.p()
    }

    pub fn multiplicator_dim(&self) -> usize {
        self.multiplicator_gens.len()
    }

    pub fn nucleus_dim(&self) -> usize {
        self.nucleus_gens.len()
    }

    /// Extendable iff the nucleus is nontrivial.
    pub fn is_extendable(&self) -> bool {
        !self.nucleus_gens.is_empty()
    }

    /// `N(G)` as a subspace of `M(G)` in multiplicator coordinates.
    pub fn nucleus_subspace(&self) -> SubspaceCanon {
        let m = self.multiplicator_dim();
        let rows: Vec<Vec<u32>> = self.nucleus_gens.iter().map(|&k| unit(m, k - self.parent_n)).collect();
        SubspaceCanon::from_rows(self.p(), m, &rows)
    }

    /// Multiplicator coordinates lifted to cover exponent words.
    pub fn to_cover_word(&self, v: &[u32]) -> ExponentWord {
        let mut w = vec![0; self.cover.n()];
        w[self.parent_n..].copy_from_slice(v);
        w
    }

    /// Tail vector of a parent relation, zero for definitions.
    pub fn label_image(&self, label: RelationLabel) -> Vec<u32> {
        self.label_images
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| vec![0; self.multiplicator_dim()])
    }

    pub fn to_json(&self) -> CoverJson {
        CoverJson {
            presentation: self.cover.to_json(),
            multiplicator: self.multiplicator_gens.clone(),
            nucleus: self.nucleus_gens.clone(),
        }
    }
}

/// Cover presentation plus multiplicator and nucleus generator indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverJson {
    #[serde(flatten)]
    pub presentation: PresentationJson,
    pub multiplicator: Vec<usize>,
    pub nucleus: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ea(p: u32, d: usize) -> PcPresentation {
        PcPresentation::elementary_abelian(p, d).unwrap()
    }

    fn d_p(p: u32) -> PcPresentation {
        PcPresentation::builder(p, 3).comm(1, 0, &[(2, 1)]).build().unwrap()
    }

    fn q_p(p: u32) -> PcPresentation {
        PcPresentation::builder(p, 3).comm(1, 0, &[(2, 1)]).power(0, &[(2, 1)]).build().unwrap()
    }

    #[test]
    fn cover_of_cp2() {
        let cd = build_cover(&ea(5, 2)).unwrap();
        let g = &cd.cover;
        assert_eq!(g.n(), 5);
        assert_eq!(g.comm_rhs(1, 0), &vec![0, 0, 1, 0, 0]);
        assert_eq!(g.power_rhs(0), &vec![0, 0, 0, 1, 0]);
        assert_eq!(g.power_rhs(1), &vec![0, 0, 0, 0, 1]);
        assert_eq!(cd.multiplicator_gens, vec![2, 3, 4]);
        assert_eq!(cd.nucleus_gens, vec![2, 3, 4]);
        assert_eq!(cd.tails_eliminated, 0);
    }

    #[test]
    fn cover_of_dp() {
        for p in [5, 7] {
            let cd = build_cover(&d_p(p)).unwrap();
            assert_eq!(cd.cover.n(), 7);
            assert_eq!(cd.multiplicator_dim(), 4);
            assert_eq!(cd.nucleus_dim(), 2);
            // weight order puts the two power tails first
            assert_eq!(cd.label_image(Definition::Power { i: 0 }), vec![1, 0, 0, 0]);
            assert_eq!(cd.label_image(Definition::Power { i: 1 }), vec![0, 1, 0, 0]);
            assert_eq!(cd.label_image(Definition::Comm { j: 2, i: 0 }), vec![0, 0, 1, 0]);
            assert_eq!(cd.label_image(Definition::Comm { j: 2, i: 1 }), vec![0, 0, 0, 1]);
            assert_eq!(cd.nucleus_gens, vec![5, 6]);
            assert_eq!(cd.cover.class(), 3);
        }
    }

    #[test]
    fn cover_of_cp3() {
        let cd = build_cover(&ea(5, 3)).unwrap();
        assert_eq!(cd.cover.n(), 9);
        assert_eq!(cd.multiplicator_dim(), 6);
        assert_eq!(cd.multiplicator_gens, cd.nucleus_gens);
    }

    #[test]
    fn tail_count_before_elimination() {
        for g in [ea(5, 1), ea(5, 3), d_p(5), q_p(7)] {
            let cd = build_cover(&g).unwrap();
            let n = g.n();
            assert_eq!(cd.label_images.len(), g.d() + n * (n - 1) / 2);
            assert_eq!(cd.multiplicator_dim() + cd.tails_eliminated, cd.label_images.len());
        }
    }

    #[test]
    fn extendability() {
        assert!(!build_cover(&q_p(5)).unwrap().is_extendable());
        let c_p2_cp = PcPresentation::builder(5, 3).power(0, &[(2, 1)]).build().unwrap();
        let cd = build_cover(&c_p2_cp).unwrap();
        assert!(cd.is_extendable());
        assert_eq!(cd.nucleus_dim(), 1);
    }

    #[test]
    fn quotient_by_multiplicator_returns_parent() {
        for g in [ea(5, 2), d_p(5), q_p(5), ea(7, 3)] {
            let cd = build_cover(&g).unwrap();
            let basis: Vec<ExponentWord> =
                cd.multiplicator_gens.iter().map(|&k| cd.cover.generator(k)).collect();
            let (q, kept) = cd.cover.quotient(&basis).unwrap();
            assert_eq!(q, g);
            assert_eq!(kept, (0..g.n()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn rejects_inconsistent_input() {
        let mut power = vec![vec![0; 3]; 3];
        power[0] = vec![0, 1, 0];
        let mut comm: Vec<Vec<ExponentWord>> = (0..3).map(|j| vec![vec![0; 3]; j]).collect();
        comm[1][0] = vec![0, 0, 1];
        let bad = PcPresentation::new(
            5,
            1,
            power,
            comm,
            vec![1, 2, 3],
            vec![None, Some(Definition::Power { i: 0 }), Some(Definition::Comm { j: 1, i: 0 })],
        )
        .unwrap();
        assert!(matches!(build_cover(&bad), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn cover_json_has_extra_arrays() {
        let cd = build_cover(&ea(5, 2)).unwrap();
        let v = serde_json::to_value(cd.to_json()).unwrap();
        assert_eq!(v["multiplicator"], serde_json::json!([2, 3, 4]));
        assert_eq!(v["n"], serde_json::json!(5));
    }
}
