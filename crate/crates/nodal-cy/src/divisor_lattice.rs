//! The 188 basic divisors, their node incidences and local classes, and the
//! rational divisor class model with its invariant subspaces.

use std::fmt;

use rustc_hash::FxHashMap;

use crate::group_engine::{Group, GroupElement, Subgroup};
use crate::linalg::{nullspace, rref};
use crate::scalars::{int, rat, FieldScalar, Rational};
use crate::threefold::{defining_quadrics, quadratic_monomials, Exponent, NodeTable, SparsePolynomial, NODE_COUNT};
use crate::{Error, Result};

pub const DIVISOR_COUNT: usize = 188;
pub const ORBIT_SIZES: [usize; 3] = [48, 12, 128];
pub const MODEL_RANK: usize = 31;
pub const FAMILY_RANKS: [usize; 3] = [12, 3, 16];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    D1,
    D2,
    D3,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::D1, Family::D2, Family::D3];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

/// Canonical identity of a divisor: the reduced echelon basis of the degree-2 part
/// of its ideal together with the ideal of the threefold.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DivisorKey(Vec<Vec<FieldScalar>>);

impl DivisorKey {
    pub fn rows(&self) -> &[Vec<FieldScalar>] {
        &self.0
    }
}

#[derive(Clone)]
pub struct BasicDivisor {
    pub generators: [SparsePolynomial; 2],
    pub family: Family,
    pub sign: Option<Sign>,
    key: DivisorKey,
}

impl fmt::Debug for BasicDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BasicDivisor")
            .field("family", &self.family)
            .field("sign", &self.sign)
            .field("generators", &self.generators)
            .finish()
    }
}

impl PartialEq for BasicDivisor {
    fn eq(&self, o: &Self) -> bool {
        self.key == o.key
    }
}

fn monomials(degree: u8) -> Vec<Exponent> {
    if degree == 0 {
        return vec![[0; 8]];
    }
    let mut out: Vec<Exponent> = Vec::new();
    for e in monomials(degree - 1) {
        let last = (0..8).rev().find(|&v| e[v] > 0).unwrap_or(0);
        for v in last..8 {
            let mut f = e;
            f[v] += 1;
            out.push(f);
        }
    }
    out
}

fn to_rows(polys: &[SparsePolynomial], monos: &[Exponent]) -> Vec<Vec<FieldScalar>> {
    let index: FxHashMap<Exponent, usize> = monos.iter().enumerate().map(|(k, e)| (*e, k)).collect();
    polys
        .iter()
        .map(|p| {
            let mut row = vec![FieldScalar::zero(); monos.len()];
            for (e, c) in p.terms() {
                row[index[e]] = c.clone();
            }
            row
        })
        .collect()
}

fn from_row(row: &[FieldScalar], monos: &[Exponent]) -> SparsePolynomial {
    SparsePolynomial::from_terms(row.iter().zip(monos).filter(|(c, _)| !c.is_zero()).map(|(c, e)| (c.clone(), *e)))
}

/// Reduces `v` modulo rows in reduced echelon form with the given pivots.
fn reduce(v: &mut [FieldScalar], rows: &[Vec<FieldScalar>], pivots: &[usize]) {
    for (row, &p) in rows.iter().zip(pivots) {
        if !v[p].is_zero() {
            let f = v[p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x = &*x - &(&f * r);
                }
            }
        }
    }
}

fn quadric_rows(gens: &[SparsePolynomial]) -> Vec<Vec<FieldScalar>> {
    let mut polys: Vec<SparsePolynomial> = defining_quadrics().to_vec();
    for g in gens {
        match g.degree() {
            Some(1) => polys.extend((0..8).map(|v| g.mul(&SparsePolynomial::var(v)))),
            Some(2) => polys.push(g.clone()),
            _ => {}
        }
    }
    to_rows(&polys, &quadratic_monomials())
}

/// Adds to the degree-2 ideal every candidate quadric q such that l*q lies in the
/// degree-3 part of the ideal for a linear form l not vanishing at one of `points`.
/// On an irreducible zero set containing `points` such q vanishes identically.
fn radical_closure(
    rows: &mut Vec<Vec<FieldScalar>>,
    candidates: &[SparsePolynomial],
    points: &[[FieldScalar; 8]],
) -> usize {
    let quad = quadratic_monomials();
    let cubic = monomials(3);
    let mut pivots = rref(rows);
    let mut added = 0;
    for q in candidates {
        let mut v = to_rows(std::slice::from_ref(q), &quad).remove(0);
        reduce(&mut v, rows, &pivots);
        if v.iter().all(FieldScalar::is_zero) {
            continue;
        }
        let gens: Vec<SparsePolynomial> = rows.iter().map(|r| from_row(r, &quad)).collect();
        let mut deg3: Vec<SparsePolynomial> = Vec::new();
        for g in &gens {
            deg3.extend((0..8).map(|x| g.mul(&SparsePolynomial::var(x))));
        }
        let mut k3 = to_rows(&deg3, &cubic);
        let p3 = rref(&mut k3);
        let residuals: Vec<Vec<FieldScalar>> = (0..8)
            .map(|x| {
                let mut r = to_rows(&[q.mul(&SparsePolynomial::var(x))], &cubic).remove(0);
                reduce(&mut r, &k3, &p3);
                r
            })
            .collect();
        let columns: Vec<Vec<FieldScalar>> =
            (0..cubic.len()).map(|c| residuals.iter().map(|r| r[c].clone()).collect()).collect();
        let forms = nullspace(&columns, 8);
        let nonvanishing = forms.iter().any(|l| {
            points.iter().any(|p| {
                let mut s = FieldScalar::zero();
                for x in 0..8 {
                    s = &s + &(&l[x] * &p[x]);
                }
                !s.is_zero()
            })
        });
        if nonvanishing {
            rows.push(v);
            pivots = rref(rows);
            added += 1;
        }
    }
    added
}

impl BasicDivisor {
    pub fn new(generators: [SparsePolynomial; 2], family: Family, sign: Option<Sign>) -> BasicDivisor {
        let generators = generators.map(|g| g.normalized());
        let mut rows = quadric_rows(&generators);
        rref(&mut rows);
        BasicDivisor { generators, family, sign, key: DivisorKey(rows) }
    }

    /// Completes the key with the quadrics that vanish on the zero set, found among
    /// images of the generators under elements preserving the incident nodes.
    pub fn close_radical(&mut self, group: &Group, nodes: &NodeTable) {
        let on: Vec<usize> =
            (0..NODE_COUNT).filter(|&a| self.passes_through(nodes.nodes[a].point.coords())).collect();
        let points: Vec<[FieldScalar; 8]> = on.iter().map(|&a| nodes.nodes[a].point.coords().clone()).collect();
        let mut candidates: Vec<SparsePolynomial> = Vec::new();
        let mut seen = rustc_hash::FxHashSet::default();
        for g in 0..group.order() as u32 {
            if !on.iter().all(|&a| on.contains(&nodes.image(g, a))) {
                continue;
            }
            for q in self.generators.iter().filter(|q| q.degree() == Some(2)) {
                let c = q.act(group.element(g)).normalized();
                if seen.insert(c.clone()) {
                    candidates.push(c);
                }
            }
        }
        radical_closure(&mut self.key.0, &candidates, &points);
    }

    pub fn key(&self) -> &DivisorKey {
        &self.key
    }

    /// Image under g, obtained by substituting g^-1 into the generators.
    pub fn act(&self, g: &GroupElement) -> BasicDivisor {
        let quad = quadratic_monomials();
        let images: Vec<SparsePolynomial> = self.key.0.iter().map(|r| from_row(r, &quad).act(g)).collect();
        let mut rows = to_rows(&images, &quad);
        rref(&mut rows);
        BasicDivisor {
            generators: self.generators.clone().map(|p| p.act(g).normalized()),
            family: self.family,
            sign: None,
            key: DivisorKey(rows),
        }
    }

    /// Every quadric of the degree-2 ideal vanishes at the point.
    pub fn passes_through(&self, coords: &[FieldScalar; 8]) -> bool {
        let monos = quadratic_monomials();
        self.key.0.iter().all(|row| {
            let mut s = FieldScalar::zero();
            for (c, e) in row.iter().zip(&monos) {
                if !c.is_zero() {
                    let mut t = c.clone();
                    for v in 0..8 {
                        for _ in 0..e[v] {
                            t = &t * &coords[v];
                        }
                    }
                    s = &s + &t;
                }
            }
            s.is_zero()
        })
    }

    pub fn name(&self) -> String {
        match self.sign {
            Some(Sign::Plus) => format!("{:?}+", self.family),
            Some(Sign::Minus) => format!("{:?}-", self.family),
            None => format!("{:?}", self.family),
        }
    }
}

/// D1+, D1-, D2+, D2-, D3+, D3- in this order.
pub fn seed_divisors() -> [BasicDivisor; 6] {
    use SparsePolynomial as P;
    let f = |n: i64| FieldScalar::from_ints([n, 0, 0, 0]);
    let (y0, y1, y2, y3, x0, x1, x2, x3) = (0, 1, 2, 3, 4, 5, 6, 7);
    let half_root2 = FieldScalar::new(int(0), rat(1, 2), int(0), int(0));
    let seed = |family: Family, sign: Sign| {
        let s = if sign == Sign::Plus { 1 } else { -1 };
        let pair = match family {
            Family::D1 => [P::var(x2).sub(&P::var(x3)), P::var(y1).add(&P::var(y3).scale(&f(s)))],
            Family::D2 => [
                P::monomial(f(1), &[x0, x2]).add(&P::monomial(f(1), &[x1, x3])),
                P::monomial(f(1), &[y0, y1]).add(&P::monomial(f(s), &[y2, y3])),
            ],
            Family::D3 => [
                P::var(x0).sub(&P::var(x1)).sub(&P::var(x2)).sub(&P::var(x3)),
                P::monomial(f(1), &[y1, x1])
                    .add(&P::monomial(f(1), &[y1, x3]))
                    .add(&P::monomial(&f(s) * &half_root2, &[y2, y3])),
            ],
        };
        BasicDivisor::new(pair, family, Some(sign))
    };
    [
        seed(Family::D1, Sign::Plus),
        seed(Family::D1, Sign::Minus),
        seed(Family::D2, Sign::Plus),
        seed(Family::D2, Sign::Minus),
        seed(Family::D3, Sign::Plus),
        seed(Family::D3, Sign::Minus),
    ]
}

/// Local class at the standard node of the six seed orbits under the ruling group.
pub fn seed_local_class(family: Family, sign: Sign) -> i64 {
    match (family, sign) {
        (Family::D1, Sign::Plus) | (Family::D2, Sign::Minus) | (Family::D3, Sign::Minus) => 1,
        _ => -1,
    }
}

/// The basic divisors with the action of every group element on them.
pub struct DivisorTable {
    pub divisors: Vec<BasicDivisor>,
    /// Indices of the six seeds in `divisors`, ordered as in `seed_divisors`.
    pub seeds: [usize; 6],
    perms: Vec<[u8; DIVISOR_COUNT]>,
    index: FxHashMap<DivisorKey, usize>,
}

impl DivisorTable {
    pub fn build(group: &Group, nodes: &NodeTable) -> Result<DivisorTable> {
        let mut seeds = seed_divisors();
        for d in seeds.iter_mut() {
            d.close_radical(group, nodes);
        }
        let mut divisors: Vec<BasicDivisor> = Vec::new();
        let mut index: FxHashMap<DivisorKey, usize> = FxHashMap::default();
        let mut seed_ids = [usize::MAX; 6];
        for (fam, pair) in [(0, [0, 1]), (1, [2, 3]), (2, [4, 5])] {
            let start = divisors.len();
            let first = seeds[pair[0]].clone();
            index.insert(first.key.clone(), divisors.len());
            divisors.push(first);
            let mut head = start;
            while head < divisors.len() {
                for g in group.generators() {
                    let d = divisors[head].act(g);
                    if !index.contains_key(&d.key) {
                        index.insert(d.key.clone(), divisors.len());
                        divisors.push(d);
                    }
                }
                head += 1;
            }
            let size = divisors.len() - start;
            if size != ORBIT_SIZES[fam] {
                return Err(Error::Consistency(format!(
                    "orbit of {} has {} divisors, expected {}",
                    seeds[pair[0]].name(),
                    size,
                    ORBIT_SIZES[fam]
                )));
            }
            for &s in &pair {
                let id = *index.get(&seeds[s].key).ok_or_else(|| {
                    Error::Consistency(format!("{} is not in the orbit of {}", seeds[s].name(), seeds[pair[0]].name()))
                })?;
                divisors[id].sign = seeds[s].sign;
                seed_ids[s] = id;
            }
        }
        if divisors.len() != DIVISOR_COUNT {
            return Err(Error::Consistency(format!("{} basic divisors", divisors.len())));
        }

        let gen_perm: Vec<[u8; DIVISOR_COUNT]> = group
            .generators()
            .iter()
            .map(|g| std::array::from_fn(|d| index[&divisors[d].act(g).key] as u8))
            .collect();
        let n = group.order();
        let mut perms = vec![[0u8; DIVISOR_COUNT]; n];
        perms[0] = std::array::from_fn(|d| d as u8);
        for id in 1..n {
            let (p, gi) = group.parent(id as u32);
            let (pp, sp) = (perms[p as usize], &gen_perm[gi as usize]);
            perms[id] = std::array::from_fn(|d| sp[pp[d] as usize]);
        }
        Ok(DivisorTable { divisors, seeds: seed_ids, perms, index })
    }

    pub fn id_of(&self, d: &BasicDivisor) -> Option<usize> {
        self.index.get(&d.key).copied()
    }

    /// g(D) for divisor ids.
    pub fn image(&self, g: u32, d: usize) -> usize {
        self.perms[g as usize][d] as usize
    }

    pub fn family_members(&self, family: Family) -> Vec<usize> {
        (0..DIVISOR_COUNT).filter(|&d| self.divisors[d].family == family).collect()
    }
}

/// Local class vectors of all basic divisors.
pub struct ClassGroupModel {
    /// `vectors[d][a]` is the local class of divisor d at node a.
    pub vectors: Vec<[i8; NODE_COUNT]>,
    pub incidence: Vec<[bool; NODE_COUNT]>,
    /// The ruling-group orbits of divisors through the standard node, each with its class;
    /// orbits mapped to themselves by a ruling-swapping element have class 0.
    pub eta_orbits: Vec<(Vec<usize>, i8)>,
}

impl ClassGroupModel {
    pub fn build(group: &Group, nodes: &NodeTable, table: &DivisorTable) -> Result<ClassGroupModel> {
        let incidence: Vec<[bool; NODE_COUNT]> = table
            .divisors
            .iter()
            .map(|d| std::array::from_fn(|a| d.passes_through(nodes.nodes[a].point.coords())))
            .collect();
        let eta = nodes.eta;
        let through: Vec<usize> = (0..DIVISOR_COUNT).filter(|&d| incidence[d][eta]).collect();
        let mut orbit_of = vec![usize::MAX; DIVISOR_COUNT];
        let mut eta_orbits: Vec<(Vec<usize>, i8)> = Vec::new();
        for &d in &through {
            if orbit_of[d] != usize::MAX {
                continue;
            }
            let mut orb: Vec<usize> = nodes.ruling_group.elements.iter().map(|&r| table.image(r, d)).collect();
            orb.sort_unstable();
            orb.dedup();
            let k = eta_orbits.len();
            for &e in &orb {
                orbit_of[e] = k;
            }
            eta_orbits.push((orb, 0));
        }
        // an orbit preserved by a ruling-swapping element has class equal to its negative
        let swapper = nodes
            .stabilizer
            .elements
            .iter()
            .copied()
            .filter(|&g| !nodes.ruling_group.contains(g))
            .collect::<Vec<_>>();
        for (orb, class) in eta_orbits.iter_mut() {
            let self_paired = swapper.iter().any(|&g| orb.contains(&table.image(g, orb[0])));
            *class = if self_paired { 0 } else { i8::MAX };
        }
        let seeds = seed_divisors();
        for (s, seed) in seeds.iter().enumerate() {
            let k = orbit_of[table.seeds[s]];
            if k == usize::MAX || eta_orbits[k].1 != i8::MAX {
                return Err(Error::Consistency(format!("seed {} does not head its own orbit", seed.name())));
            }
            eta_orbits[k].1 = seed_local_class(seed.family, seed.sign.expect("seed")) as i8;
        }
        let nonzero = eta_orbits.iter().filter(|(_, c)| *c != 0).count();
        if nonzero != 6 || eta_orbits.iter().any(|(_, c)| *c == i8::MAX) {
            return Err(Error::Consistency(format!(
                "{nonzero} ruling-group orbits with nonzero class through the standard node"
            )));
        }

        let mut vectors = vec![[0i8; NODE_COUNT]; DIVISOR_COUNT];
        for a in 0..NODE_COUNT {
            let t_inv = group.inv(nodes.nodes[a].transporter);
            for d in 0..DIVISOR_COUNT {
                if incidence[d][a] {
                    let e = table.image(t_inv, d);
                    vectors[d][a] = eta_orbits[orbit_of[e]].1;
                }
            }
        }
        Ok(ClassGroupModel { vectors, incidence, eta_orbits })
    }

    pub fn local_class(&self, d: usize, a: usize) -> i64 {
        self.vectors[d][a] as i64
    }

    pub fn rank_of(&self, ds: &[usize]) -> usize {
        rational_rank(ds.iter().map(|&d| self.vectors[d].iter().map(|&x| x as i64).collect()).collect())
    }

    pub fn image_rank(&self) -> usize {
        self.rank_of(&(0..DIVISOR_COUNT).collect::<Vec<_>>())
    }

    pub fn family_rank(&self, table: &DivisorTable, family: Family) -> usize {
        self.rank_of(&table.family_members(family))
    }

    /// Sums over G-orbits of basic divisors, with a representative of each orbit.
    pub fn orbit_sums(&self, table: &DivisorTable, sub: &Subgroup) -> Vec<(usize, Vec<i64>)> {
        let mut seen = [false; DIVISOR_COUNT];
        let mut out = Vec::new();
        for d in 0..DIVISOR_COUNT {
            if seen[d] {
                continue;
            }
            let mut sum = vec![0i64; NODE_COUNT];
            for &g in &sub.elements {
                let e = table.image(g, d);
                seen[e] = true;
                for (s, &x) in sum.iter_mut().zip(&self.vectors[e]) {
                    *s += x as i64;
                }
            }
            out.push((d, sum));
        }
        out
    }

    /// 1 + dimension of the G-fixed part of the local class image.
    pub fn invariant_dimension(&self, table: &DivisorTable, sub: &Subgroup) -> usize {
        1 + rational_rank(self.orbit_sums(table, sub).into_iter().map(|(_, v)| v).collect())
    }

    /// For every node of B outside A, an invariant combination with nonzero local class.
    pub fn projectivity_test(
        &self,
        table: &DivisorTable,
        sub: &Subgroup,
        class_a: &[usize],
        class_b: &[usize],
    ) -> Result<ProjectivityReport> {
        let covered = (0..NODE_COUNT).all(|a| class_a.contains(&a) || class_b.contains(&a));
        if !covered {
            return Err(Error::Precondition("classes A and B do not cover every node".into()));
        }
        let sums = self.orbit_sums(table, sub);
        let mut witnesses = Vec::new();
        let mut failing = Vec::new();
        for &a in class_b {
            if class_a.contains(&a) {
                continue;
            }
            match sums.iter().find(|(_, v)| v[a] != 0) {
                Some((d, _)) => witnesses.push((a, *d)),
                None => failing.push(a),
            }
        }
        Ok(ProjectivityReport { projective: failing.is_empty(), witnesses, failing })
    }

    /// The signed node permutation by which g acts on local class vectors.
    pub fn act_on_vector(&self, nodes: &NodeTable, g: u32, v: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; NODE_COUNT];
        for a in 0..NODE_COUNT {
            let s = if nodes.swaps_ruling(g, a) { -1 } else { 1 };
            out[nodes.image(g, a)] = s * v[a];
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectivityReport {
    pub projective: bool,
    /// (node, divisor whose G-orbit sum is nonzero there)
    pub witnesses: Vec<(usize, usize)>,
    pub failing: Vec<usize>,
}

pub fn rational_rank(rows: Vec<Vec<i64>>) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.into_iter().map(|r| r.into_iter().map(int).collect()).collect();
    rref(&mut m).len()
}
