//! The generation driver: grow the trees of immediate descendants from the
//! elementary abelian groups up to order `p^max`, then check the catalog
//! against the known counts.

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::descend::{immediate_descendants, DescendOptions, DescendantRecord};
use crate::fp::{check_prime, gcd, PrimeField};
use crate::pcover::build_cover;
use crate::pcpres::{PcPresentation, PresentationJson};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub max_exponent: usize,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
    /// Lifts the point cap on orbit problems.
    pub heavy_ok: bool,
    /// Recompute every lifted automorphism group order.
    pub verify_aut_orders: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { max_exponent: 5, threads: None, heavy_ok: false, verify_aut_orders: false }
    }
}

#[derive(Clone, Debug)]
pub struct Catalog {
    pub p: u32,
    pub max_exponent: usize,
    /// Roots first, then each generation in discovery order.
    pub groups: Vec<DescendantRecord>,
    /// Nucleus dimension of every group that was expanded as a parent.
    pub nucleus_dims: Vec<Option<usize>>,
    /// Wall-clock seconds per phase.
    pub timings: Vec<(String, f64)>,
}

/// Number of groups of order `p^n` for `1 <= n <= 5`.
pub fn expected_count(p: u32, n: usize) -> u64 {
    let p64 = p as u64;
    match n {
        1 => 1,
        2 => 2,
        3 => 5,
        4 => 15,
        5 => 61 + 2 * p64 + gcd(4, p64 - 1) + 2 * gcd(3, p64 - 1),
        _ => panic!("no closed count for order p^{n}"),
    }
}

/// Number of abelian groups of order `p^n`, the partition numbers.
pub fn expected_abelian(n: usize) -> u64 {
    [1, 1, 2, 3, 5, 7][n]
}

pub fn classify(p: u32, opts: &ClassifyOptions) -> Result<Catalog> {
    check_prime(p)?;
    if !(1..=5).contains(&opts.max_exponent) {
        return Err(Error::Precondition(format!("order exponent {} outside 1..=5", opts.max_exponent)));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = opts.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Internal(e.to_string()))?;
    pool.install(|| classify_inner(p, opts))
}

fn classify_inner(p: u32, opts: &ClassifyOptions) -> Result<Catalog> {
    let max = opts.max_exponent;
    let dopts = DescendOptions {
        max_exponent: max,
        verify_aut_orders: opts.verify_aut_orders,
        point_cap: if opts.heavy_ok { u64::MAX } else { DescendOptions::default().point_cap },
        ..Default::default()
    };
    let mut timings = Vec::new();
    let start = Instant::now();
    let mut groups: Vec<DescendantRecord> = (1..=max)
        .map(|d| if d < max { DescendantRecord::root(p, d) } else { DescendantRecord::elementary(p, d) })
        .collect::<Result<_>>()?;
    let mut nucleus_dims = vec![None; groups.len()];
    let mut level: Vec<usize> = (0..groups.len()).filter(|&i| groups[i].order_exponent < max).collect();
    timings.push(("roots".to_string(), start.elapsed().as_secs_f64()));
    let mut class = 1;
    while !level.is_empty() {
        let t0 = Instant::now();
        let results: Vec<(usize, Vec<DescendantRecord>)> = level
            .par_iter()
            .map(|&id| {
                let parent = &groups[id];
                let nd = build_cover(&parent.presentation)?.nucleus_dim();
                Ok((nd, immediate_descendants(parent, Some(id), &dopts)?))
            })
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for (&id, (nd, kids)) in level.iter().zip(results) {
            nucleus_dims[id] = Some(nd);
            for mut kid in kids {
                let small = kid.order_exponent < max;
                if !small {
                    kid.auts = None;
                }
                groups.push(kid);
                nucleus_dims.push(None);
                if small {
                    next.push(groups.len() - 1);
                }
            }
        }
        timings.push((format!("class {} parents", class), t0.elapsed().as_secs_f64()));
        class += 1;
        level = next;
    }
    Ok(Catalog { p, max_exponent: max, groups, nucleus_dims, timings })
}

impl Catalog {
    /// Catalog indices of the groups of order `p^n`.
    pub fn of_order(&self, n: usize) -> Vec<usize> {
        (0..self.groups.len()).filter(|&i| self.groups[i].order_exponent == n).collect()
    }

    pub fn counts(&self) -> Vec<u64> {
        (1..=self.max_exponent).map(|n| self.of_order(n).len() as u64).collect()
    }

    /// Children of `id` of order `p^n`.
    pub fn children_of_order(&self, id: usize, n: usize) -> usize {
        self.groups.iter().filter(|g| g.parent_id == Some(id) && g.order_exponent == n).count()
    }

    /// Display order: by order, then generator number, then class, then
    /// discovery.
    pub fn display_order(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.groups.len()).collect();
        ids.sort_by_key(|&i| {
            let g = &self.groups[i];
            (g.order_exponent, g.d(), g.p_class, i)
        });
        ids
    }

    pub fn to_json(&self) -> CatalogJson {
        let groups = self
            .display_order()
            .into_iter()
            .map(|i| {
                let g = &self.groups[i];
                GroupJson {
                    id: i,
                    presentation: g.presentation.to_json(),
                    parent: g.parent_id,
                    class: g.p_class,
                    order_exponent: g.order_exponent,
                }
            })
            .collect();
        CatalogJson { p: self.p, max_exponent: self.max_exponent, counts: self.counts(), groups }
    }

    /// Plain-text listing grouped by order.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let mut current = 0;
        let mut index = 0;
        for i in self.display_order() {
            let g = &self.groups[i];
            if g.order_exponent != current {
                current = g.order_exponent;
                index = 0;
                out.push_str(&format!(
                    "order {}^{} ({} groups)\n{:>4} {:>5} {:>2} {:>5} {:>6}  relations\n",
                    self.p,
                    current,
                    self.of_order(current).len(),
                    "#",
                    "id",
                    "d",
                    "class",
                    "parent"
                ));
            }
            index += 1;
            let parent = g.parent_id.map_or("-".to_string(), |x| x.to_string());
            out.push_str(&format!(
                "{:>4} {:>5} {:>2} {:>5} {:>6}  {}\n",
                index,
                i,
                g.d(),
                g.p_class,
                parent,
                g.presentation.relations_string()
            ));
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupJson {
    pub id: usize,
    #[serde(flatten)]
    pub presentation: PresentationJson,
    pub parent: Option<usize>,
    pub class: u32,
    pub order_exponent: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogJson {
    pub p: u32,
    pub max_exponent: usize,
    pub counts: Vec<u64>,
    pub groups: Vec<GroupJson>,
}

/// Isomorphism invariants computed by brute force over the elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint {
    pub n: usize,
    pub d: usize,
    pub p_class: u32,
    pub abelian: bool,
    /// Exponent as a power of `p`.
    pub exponent: u32,
    pub pth_powers: usize,
    pub order_p_elements: usize,
    pub centre: usize,
    pub derived: usize,
    /// Sorted `(order exponent, centralizer size, count)` triples.
    pub order_centralizers: Vec<(u32, usize, usize)>,
}

fn subgroup_closure(g: &PcPresentation, gens: &[Vec<u32>]) -> usize {
    let mut seen: HashSet<Vec<u32>> = HashSet::from([g.identity()]);
    let mut queue = vec![g.identity()];
    let mut head = 0;
    while head < queue.len() {
        for s in gens {
            let y = g.multiply(&queue[head], s);
            if seen.insert(y.clone()) {
                queue.push(y);
            }
        }
        head += 1;
    }
    queue.len()
}

fn conjugacy_class_size(g: &PcPresentation, x: &[u32], gens: &[Vec<u32>]) -> usize {
    let mut seen: HashSet<Vec<u32>> = HashSet::from([x.to_vec()]);
    let mut queue = vec![x.to_vec()];
    let mut head = 0;
    while head < queue.len() {
        for a in gens {
            let y = g.multiply(&queue[head], &g.commutator(&queue[head], a));
            if seen.insert(y.clone()) {
                queue.push(y);
            }
        }
        head += 1;
    }
    queue.len()
}

pub fn fingerprint(g: &PcPresentation) -> Fingerprint {
    let p = g.p() as u64;
    let elems: Vec<Vec<u32>> = (0..g.order()).map(|x| g.word_of(x)).collect();
    let gens: Vec<Vec<u32>> = (0..g.d()).map(|i| g.generator(i)).collect();
    let id = g.identity();
    let mut exponent = 0;
    let mut powers: HashSet<Vec<u32>> = HashSet::new();
    let mut order_p = 0;
    let mut centre = 0;
    let mut comms: HashSet<Vec<u32>> = HashSet::new();
    let mut histogram: BTreeMap<(u32, usize), usize> = BTreeMap::new();
    for x in &elems {
        let xp = g.power(x, p);
        if xp == id {
            order_p += 1;
        }
        let mut e = 0;
        let mut y = x.clone();
        while y != id {
            y = g.power(&y, p);
            e += 1;
        }
        exponent = exponent.max(e);
        let cent = elems.len() / conjugacy_class_size(g, x, &gens);
        *histogram.entry((e, cent)).or_default() += 1;
        powers.insert(xp);
        let mut central = true;
        for a in &gens {
            let c = g.commutator(x, a);
            if c != id {
                central = false;
                comms.insert(c);
            }
        }
        if central {
            centre += 1;
        }
    }
    let comms: Vec<Vec<u32>> = comms.into_iter().collect();
    Fingerprint {
        n: g.n(),
        d: g.d(),
        p_class: g.class(),
        abelian: comms.is_empty(),
        exponent,
        pth_powers: powers.len(),
        order_p_elements: order_p,
        centre,
        derived: subgroup_closure(g, &comms),
        order_centralizers: histogram.into_iter().map(|((e, c), k)| (e, c, k)).collect(),
    }
}

/// Named groups of order `p^3` and `p^4` used to label catalog entries.
pub fn reference_groups(p: u32) -> Result<Vec<(String, PcPresentation)>> {
    let w = PrimeField::new(p)?.generator() as i64;
    let b = |n: usize| PcPresentation::builder(p, n);
    let list = vec![
        ("C_{p^3}", b(3).power(0, &[(1, 1)]).power(1, &[(2, 1)])),
        ("D_p", b(3).comm(1, 0, &[(2, 1)])),
        ("C_{p^2}xC_p", b(3).power(0, &[(2, 1)])),
        ("Q_p", b(3).comm(1, 0, &[(2, 1)]).power(0, &[(2, 1)])),
        ("C_p^3", b(3)),
        ("(p^4,1)", b(4).power(0, &[(1, 1)]).power(1, &[(2, 1)]).power(2, &[(3, 1)])),
        ("(p^4,2)", b(4).power(0, &[(2, 1)]).power(1, &[(3, 1)])),
        ("(p^4,3)", b(4).comm(1, 0, &[(2, 1)]).power(0, &[(3, 1)])),
        ("(p^4,4)", b(4).comm(1, 0, &[(3, 1)]).power(0, &[(2, 1)]).power(1, &[(3, 1)])),
        ("(p^4,5)", b(4).power(0, &[(2, 1)]).power(2, &[(3, 1)])),
        ("(p^4,6)", b(4).power(0, &[(2, 1)]).power(2, &[(3, 1)]).comm(1, 0, &[(3, 1)])),
        ("(p^4,7)", b(4).comm(1, 0, &[(2, 1)]).comm(2, 0, &[(3, 1)])),
        ("(p^4,8)", b(4).comm(1, 0, &[(2, 1)]).comm(2, 0, &[(3, 1)]).power(0, &[(3, 1)])),
        ("(p^4,9)", b(4).comm(1, 0, &[(2, 1)]).comm(2, 0, &[(3, 1)]).power(1, &[(3, 1)])),
        ("(p^4,10)", b(4).comm(1, 0, &[(2, 1)]).comm(2, 0, &[(3, 1)]).power(1, &[(3, w)])),
        ("(p^4,11)", b(4).power(0, &[(3, 1)])),
        ("(p^4,12)", b(4).comm(1, 0, &[(3, 1)])),
        ("(p^4,13)", b(4).comm(1, 0, &[(3, 1)]).power(0, &[(3, 1)])),
        ("(p^4,14)", b(4).comm(1, 0, &[(3, 1)]).power(2, &[(3, 1)])),
        ("C_p^4", b(4)),
    ];
    list.into_iter().map(|(name, bld)| Ok((name.to_string(), bld.build()?))).collect()
}

/// Expected numbers of immediate descendants by child order exponent.
///
/// D_p has eight isolated descendants of order `p^5` and two families of
/// `(p-1)/2` each, hence `p + 7`.
pub fn expected_descendants(p: u32) -> Vec<(&'static str, Vec<(usize, u64)>)> {
    let p64 = p as u64;
    vec![
        ("C_p^2", vec![(3, 3), (4, 3), (5, 1)]),
        ("D_p", vec![(4, 4), (5, p64 + 7)]),
        ("(p^4,7)", vec![(5, 3 + gcd(4, p64 - 1) + 2 * gcd(3, p64 - 1))]),
        ("C_{p^2}xC_p", vec![(4, 2), (5, 0)]),
        ("(p^4,5)", vec![(5, 2)]),
        ("(p^4,2)", vec![(5, 2)]),
        ("(p^4,3)", vec![(5, 9)]),
        ("(p^4,4)", vec![(5, 2)]),
        ("C_p^3", vec![(4, 4), (5, 14 + p64)]),
        ("(p^4,11)", vec![(5, 3)]),
        ("(p^4,12)", vec![(5, 10)]),
        ("C_p^4", vec![(5, 6)]),
    ]
}

/// Groups of order `p^5` by generator number and class, as
/// `((d, class), count)`.
pub fn expected_d_class_table(p: u32) -> Vec<((usize, u32), u64)> {
    let p64 = p as u64;
    vec![
        ((1, 5), 1),
        ((2, 2), 1),
        ((2, 3), p64 + 20),
        ((2, 4), gcd(4, p64 - 1) + 2 * gcd(3, p64 - 1) + 5),
        ((3, 2), p64 + 14),
        ((3, 3), 13),
        ((4, 2), 6),
        ((5, 1), 1),
    ]
}

/// Non-elementary groups without immediate descendants.
pub const EXPECTED_TERMINAL: [&str; 7] = ["(p^4,6)", "(p^4,8)", "(p^4,9)", "(p^4,10)", "Q_p", "(p^4,13)", "(p^4,14)"];

/// Labels catalog groups of order `p^3` and `p^4` by matching fingerprints
/// with [`reference_groups`]. Groups whose fingerprint is shared by several
/// references get all matching names joined by `|`.
pub fn identify(catalog: &Catalog) -> Result<BTreeMap<usize, String>> {
    let refs: Vec<(String, Fingerprint)> =
        reference_groups(catalog.p)?.into_iter().map(|(name, g)| (name, fingerprint(&g))).collect();
    let mut out = BTreeMap::new();
    for n in [2usize, 3, 4] {
        if n > catalog.max_exponent {
            continue;
        }
        for id in catalog.of_order(n) {
            let g = &catalog.groups[id].presentation;
            if n == 2 {
                out.insert(id, if g.class() == 1 { "C_p^2" } else { "C_{p^2}" }.to_string());
                continue;
            }
            let fp = fingerprint(g);
            let names: Vec<&str> = refs.iter().filter(|(_, f)| *f == fp).map(|(name, _)| name.as_str()).collect();
            out.insert(id, if names.is_empty() { "?".to_string() } else { names.join("|") });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub actual: String,
    /// `None` when the catalog does not reach far enough.
    pub passed: Option<bool>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn push(&mut self, name: impl Into<String>, expected: impl ToString, actual: impl ToString) {
        let (e, a) = (expected.to_string(), actual.to_string());
        let passed = Some(e == a);
        self.checks.push(Check { name: name.into(), expected: e, actual: a, passed });
    }

    fn skip(&mut self, name: impl Into<String>) {
        self.checks.push(Check { name: name.into(), expected: String::new(), actual: String::new(), passed: None });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed != Some(false))
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.passed == Some(false)).collect()
    }

    pub fn to_text(&self) -> String {
        self.checks
            .iter()
            .map(|c| match c.passed {
                Some(true) => format!("PASS  {}: {}\n", c.name, c.actual),
                Some(false) => format!("FAIL  {}: expected {}, got {}\n", c.name, c.expected, c.actual),
                None => format!("SKIP  {}\n", c.name),
            })
            .collect()
    }
}

/// Checks a catalog against the known counts and structural invariants.
pub fn verify(catalog: &Catalog) -> Result<VerifyReport> {
    let p = catalog.p;
    let mut r = VerifyReport::default();
    for n in 1..=5 {
        if n > catalog.max_exponent {
            r.skip(format!("groups of order p^{n}"));
            r.skip(format!("abelian groups of order p^{n}"));
            continue;
        }
        let ids = catalog.of_order(n);
        r.push(format!("groups of order p^{n}"), expected_count(p, n), ids.len());
        let abelian = ids.iter().filter(|&&i| is_abelian(&catalog.groups[i].presentation)).count();
        r.push(format!("abelian groups of order p^{n}"), expected_abelian(n), abelian);
    }
    let inconsistent = catalog
        .groups
        .iter()
        .filter(|g| {
            let pres = &g.presentation;
            let ok = if pres.n() <= 4 { pres.exhaustive_check() } else { pres.is_consistent().is_ok() };
            !ok
        })
        .count();
    r.push("inconsistent presentations", 0, inconsistent);
    let mut keys = HashSet::new();
    let repeated = catalog.groups.iter().filter(|g| !keys.insert((g.d(), g.lineage.clone()))).count();
    r.push("repeated lineage keys", 0, repeated);
    if catalog.max_exponent >= 5 {
        let mut cells: BTreeMap<(usize, u32), u64> = BTreeMap::new();
        for id in catalog.of_order(5) {
            let g = &catalog.groups[id];
            *cells.entry((g.d(), g.p_class)).or_default() += 1;
        }
        let fmt = |v: &[((usize, u32), u64)]| {
            v.iter().map(|((d, c), k)| format!("d={d},class={c}:{k}")).collect::<Vec<_>>().join(" ")
        };
        let actual: Vec<((usize, u32), u64)> = cells.into_iter().collect();
        r.push("order p^5 groups by (d, class)", fmt(&expected_d_class_table(p)), fmt(&actual));
    } else {
        r.skip("order p^5 groups by (d, class)");
    }
    let bad_class = catalog.groups.iter().filter(|g| g.p_class as usize != g.lineage.len() + 1).count();
    r.push("groups whose class differs from lineage depth + 1", 0, bad_class);

    let names = identify(catalog)?;
    let unnamed: Vec<usize> = names.iter().filter(|(_, n)| n.as_str() == "?").map(|(&i, _)| i).collect();
    r.push("unidentified groups of order p^3 and p^4", "[]", format!("{unnamed:?}"));
    let ids_named = |name: &str| -> Vec<usize> {
        names.iter().filter(|(_, n)| n.split('|').any(|x| x == name)).map(|(&i, _)| i).collect()
    };
    let roots: BTreeMap<usize, usize> =
        (0..catalog.groups.len()).filter(|&i| catalog.groups[i].parent_id.is_none()).map(|i| (catalog.groups[i].d(), i)).collect();
    for (name, per_order) in expected_descendants(p) {
        let ids: Vec<usize> = match name {
            "C_p^2" => roots.get(&2).into_iter().copied().collect(),
            "C_p^3" => roots.get(&3).into_iter().copied().collect(),
            "C_p^4" => roots.get(&4).into_iter().copied().collect(),
            _ => ids_named(name),
        };
        for (n, want) in per_order {
            let label = format!("descendants of {name} of order p^{n}");
            if n > catalog.max_exponent {
                r.skip(label);
                continue;
            }
            match ids.as_slice() {
                [id] => r.push(label, want, catalog.children_of_order(*id, n)),
                _ => r.push(label, format!("{want} (one parent)"), format!("{} parents matched", ids.len())),
            }
        }
    }
    if catalog.max_exponent >= 5 {
        let mut terminal: Vec<String> = Vec::new();
        for (&id, name) in &names {
            let g = &catalog.groups[id];
            if g.order_exponent >= 3 && !is_elementary(&g.presentation) && catalog.nucleus_dims[id] == Some(0) {
                terminal.push(name.clone());
            }
        }
        let terminal = expand_ambiguous(terminal);
        let mut want: Vec<String> = EXPECTED_TERMINAL.iter().map(|s| s.to_string()).collect();
        want.sort();
        r.push("terminal groups of order p^3 and p^4", want.join(", "), terminal.join(", "));
    } else {
        r.skip("terminal groups of order p^3 and p^4");
    }
    Ok(r)
}

/// Replaces a label `A|B|..` carried by exactly as many groups as it has
/// alternatives by the alternatives themselves, since the groups then
/// account for every name in the class. Returns the sorted result.
fn expand_ambiguous(labels: Vec<String>) -> Vec<String> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let mut out = Vec::new();
    for (label, c) in counts {
        let alts: Vec<&str> = label.split('|').collect();
        if alts.len() > 1 && alts.len() == c {
            out.extend(alts.into_iter().map(String::from));
        } else {
            out.extend(std::iter::repeat_n(label, c));
        }
    }
    out.sort();
    out
}

fn is_abelian(g: &PcPresentation) -> bool {
    (0..g.n()).all(|j| (0..j).all(|i| g.comm_rhs(j, i).iter().all(|&x| x == 0)))
}

fn is_elementary(g: &PcPresentation) -> bool {
    g.class() == 1
}
