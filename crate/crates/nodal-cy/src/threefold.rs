//! The complete intersection of four quadrics in P^7, its 96 nodes and their rulings.

use std::collections::BTreeMap;
use std::fmt;

use rustc_hash::FxHashMap;

use crate::group_engine::{notation_element, Group, GroupElement, MonomialMatrix, Subgroup, COORD_NAMES};
use crate::linalg::{nullspace, rank};
use crate::scalars::{int, FieldScalar};
use crate::{Error, Result};

pub const NODE_COUNT: usize = 96;

pub type Exponent = [u8; 8];

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SparsePolynomial {
    terms: BTreeMap<Exponent, FieldScalar>,
}

impl SparsePolynomial {
    pub fn zero() -> Self {
        SparsePolynomial::default()
    }

    pub fn from_terms<I: IntoIterator<Item = (FieldScalar, Exponent)>>(terms: I) -> Self {
        let mut p = SparsePolynomial::zero();
        for (c, e) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Product of the listed variables with coefficient `c`.
    pub fn monomial(c: FieldScalar, vars: &[usize]) -> Self {
        let mut e = [0u8; 8];
        for &v in vars {
            e[v] += 1;
        }
        SparsePolynomial::from_terms([(c, e)])
    }

    pub fn var(v: usize) -> Self {
        SparsePolynomial::monomial(FieldScalar::one(), &[v])
    }

    fn add_term(&mut self, e: Exponent, c: FieldScalar) {
        let entry = self.terms.entry(e).or_insert_with(FieldScalar::zero);
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &FieldScalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &Exponent) -> FieldScalar {
        self.terms.get(e).cloned().unwrap_or_else(FieldScalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial or a non-homogeneous one.
    pub fn degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|e| e.iter().map(|&x| x as u32).sum::<u32>());
        let d = degs.next()?;
        degs.all(|x| x == d).then_some(d)
    }

    pub fn add(&self, o: &SparsePolynomial) -> SparsePolynomial {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(*e, c.clone());
        }
        p
    }

    pub fn scale(&self, c: &FieldScalar) -> SparsePolynomial {
        SparsePolynomial::from_terms(self.terms.iter().map(|(e, x)| (c * x, *e)))
    }

    pub fn sub(&self, o: &SparsePolynomial) -> SparsePolynomial {
        self.add(&o.scale(&-FieldScalar::one()))
    }

    pub fn mul(&self, o: &SparsePolynomial) -> SparsePolynomial {
        let mut p = SparsePolynomial::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = std::array::from_fn(|k| e1[k] + e2[k]);
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    pub fn evaluate(&self, v: &[FieldScalar; 8]) -> FieldScalar {
        let mut total = FieldScalar::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for k in 0..8 {
                for _ in 0..e[k] {
                    t = &t * &v[k];
                }
            }
            total = &total + &t;
        }
        total
    }

    /// The polynomial x -> self(m x).
    pub fn substitute(&self, m: &MonomialMatrix) -> SparsePolynomial {
        let mut p = SparsePolynomial::zero();
        for (e, c) in &self.terms {
            let mut ne = [0u8; 8];
            let mut cc = c.clone();
            for j in 0..8 {
                let k = m.perm[j];
                ne[j] = e[k];
                for _ in 0..e[k] {
                    cc = &cc * &m.scale[j];
                }
            }
            p.add_term(ne, cc);
        }
        p
    }

    /// The image g.f = f o g^-1.
    pub fn act(&self, g: &GroupElement) -> SparsePolynomial {
        self.substitute(&g.inverse().matrix())
    }

    pub fn derivative(&self, v: usize) -> SparsePolynomial {
        SparsePolynomial::from_terms(self.terms.iter().filter(|(e, _)| e[v] > 0).map(|(e, c)| {
            let mut ne = *e;
            ne[v] -= 1;
            (c.scale(&int(e[v] as i64)), ne)
        }))
    }

    /// Scaled so the coefficient of the largest exponent is 1.
    pub fn normalized(&self) -> SparsePolynomial {
        match self.terms.iter().next_back() {
            None => self.clone(),
            Some((_, lead)) => self.scale(&lead.inverse()),
        }
    }
}

impl fmt::Debug for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let mono: Vec<String> = (0..8)
                    .filter(|&k| e[k] > 0)
                    .map(|k| if e[k] == 1 { COORD_NAMES[k].to_string() } else { format!("{}^{}", COORD_NAMES[k], e[k]) })
                    .collect();
                format!("({c})*{}", mono.join("*"))
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Exponent vectors of all quadratic monomials in a fixed order.
pub fn quadratic_monomials() -> Vec<Exponent> {
    let mut out = Vec::with_capacity(36);
    for a in 0..8 {
        for b in a..8 {
            let mut e = [0u8; 8];
            e[a] += 1;
            e[b] += 1;
            out.push(e);
        }
    }
    out
}

/// Y_k^2 - (X0^2 +- X1^2 +- X2^2 +- X3^2) for k = 0..3.
pub fn defining_quadrics() -> [SparsePolynomial; 4] {
    const SIGNS: [[i64; 4]; 4] = [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]];
    std::array::from_fn(|k| {
        let mut p = SparsePolynomial::monomial(FieldScalar::one(), &[k, k]);
        for (j, s) in SIGNS[k].iter().enumerate() {
            p = p.add(&SparsePolynomial::monomial(FieldScalar::from_ints([-s, 0, 0, 0]), &[4 + j, 4 + j]));
        }
        p
    })
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectivePoint {
    coords: [FieldScalar; 8],
}

impl ProjectivePoint {
    /// Rescales so the first nonzero coordinate is 1.
    pub fn new(coords: [FieldScalar; 8]) -> Result<Self> {
        let lead = coords
            .iter()
            .find(|c| !c.is_zero())
            .ok_or_else(|| Error::Precondition("all coordinates vanish".into()))?
            .inverse();
        Ok(ProjectivePoint { coords: coords.map(|c| &c * &lead) })
    }

    pub fn coords(&self) -> &[FieldScalar; 8] {
        &self.coords
    }

    /// [sqrt 2, 0, sqrt 2, 0, 1, 1, 0, 0]
    pub fn standard_node() -> Self {
        let r = FieldScalar::sqrt2;
        let (o, z) = (FieldScalar::one, FieldScalar::zero);
        ProjectivePoint::new([r(), z(), r(), z(), o(), o(), z(), z()]).expect("nonzero")
    }

    pub fn transform(&self, m: &MonomialMatrix) -> ProjectivePoint {
        ProjectivePoint::new(m.apply(&self.coords)).expect("monomial maps are invertible")
    }

    pub fn on_variety(&self) -> bool {
        defining_quadrics().iter().all(|f| f.evaluate(&self.coords).is_zero())
    }

    pub fn to_strings(&self) -> Vec<[String; 4]> {
        self.coords.iter().map(|c| c.to_strings()).collect()
    }
}

impl fmt::Debug for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

pub fn evaluate(p: &SparsePolynomial, pt: &ProjectivePoint) -> FieldScalar {
    p.evaluate(pt.coords())
}

fn jacobian(pt: &ProjectivePoint) -> Vec<Vec<FieldScalar>> {
    defining_quadrics()
        .iter()
        .map(|f| (0..8).map(|v| f.derivative(v).evaluate(pt.coords())).collect())
        .collect()
}

pub fn jacobian_rank(pt: &ProjectivePoint) -> Result<usize> {
    if !pt.on_variety() {
        return Err(Error::Precondition(format!("{pt:?} is not on the variety")));
    }
    Ok(rank(&jacobian(pt)))
}

/// Rank of the tangent cone quadric at a singular point with Jacobian rank 3, on the
/// Zariski tangent space. A node has rank 4.
pub fn tangent_cone_rank(pt: &ProjectivePoint) -> Result<usize> {
    let jac = jacobian(pt);
    if rank(&jac) != 3 {
        return Err(Error::Precondition("point is not singular with Jacobian rank 3".into()));
    }
    let transposed: Vec<Vec<FieldScalar>> = (0..8).map(|v| (0..4).map(|k| jac[k][v].clone()).collect()).collect();
    let lambda = nullspace(&transposed, 4).into_iter().next().expect("one relation among gradients");
    let quads = defining_quadrics();
    let mut hess = vec![vec![FieldScalar::zero(); 8]; 8];
    for (k, f) in quads.iter().enumerate() {
        for a in 0..8 {
            for b in 0..8 {
                let h = f.derivative(a).derivative(b).evaluate(pt.coords());
                hess[a][b] = &hess[a][b] + &(&lambda[k] * &h);
            }
        }
    }
    // the point itself spans the kernel of the Hessian on the tangent space
    let basis_rows = nullspace(&jac, 8);
    let restricted: Vec<Vec<FieldScalar>> = basis_rows
        .iter()
        .map(|u| {
            basis_rows
                .iter()
                .map(|w| {
                    let mut s = FieldScalar::zero();
                    for a in 0..8 {
                        for b in 0..8 {
                            s = &s + &(&(&u[a] * &hess[a][b]) * &w[b]);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    Ok(rank(&restricted))
}

#[derive(Clone, Debug)]
pub struct Node {
    pub id: usize,
    pub point: ProjectivePoint,
    /// Element id in the ambient group with transporter(eta) = point.
    pub transporter: u32,
}

/// Which group conjugacy is taken in when testing class A membership.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Ambient {
    #[default]
    G,
    H,
}

pub fn ruling_generators() -> Vec<GroupElement> {
    [
        "(Y0, Y3, Y2, Y1, X0, X1, X3, X2)",
        "(Y0, iY1, Y2, iY3, X1, X0, X3, X2)",
        "(Y2, Y3, Y0, Y1, X0, X1, -iX2, -iX3)",
        "(Y0, Y1, Y2, -Y3, X0, X1, X2, -X3)",
        "(Y0, -Y1, Y2, -Y3, X0, X1, X2, X3)",
        "(Y0, Y1, Y2, Y3, X0, X1, -X2, -X3)",
        "(2X0, 2X2, 2X1, 2X3, Y0, Y2, Y1, Y3)",
    ]
    .map(notation_element)
    .to_vec()
}

/// The involution whose conjugates define class A nodes.
pub fn sigma_a() -> GroupElement {
    notation_element("(Y0, -Y1, Y2, -Y3, X0, X1, -X2, -X3)")
}

/// Node data for every element of the ambient group: permutation of nodes and
/// ruling behaviour, both propagated along the closure tree.
pub struct NodeTable {
    pub nodes: Vec<Node>,
    pub eta: usize,
    pub stabilizer: Subgroup,
    pub ruling_group: Subgroup,
    perms: Vec<[u8; NODE_COUNT]>,
    swaps: Vec<u128>,
    point_index: FxHashMap<ProjectivePoint, usize>,
}

impl NodeTable {
    pub fn build(group: &Group) -> Result<NodeTable> {
        let eta_pt = ProjectivePoint::standard_node();
        let gens: Vec<MonomialMatrix> = group.generators().iter().map(|g| g.matrix()).collect();
        let gen_ids: Vec<u32> = group.generators().iter().map(|g| group.id_of(g).expect("generator")).collect();

        let mut points = vec![eta_pt.clone()];
        let mut trans = vec![0u32];
        let mut index: FxHashMap<ProjectivePoint, usize> = FxHashMap::default();
        index.insert(eta_pt.clone(), 0);
        let mut head = 0;
        while head < points.len() {
            for (m, &gid) in gens.iter().zip(&gen_ids) {
                let q = points[head].transform(m);
                if !index.contains_key(&q) {
                    index.insert(q.clone(), points.len());
                    trans.push(group.mul(gid, trans[head]));
                    points.push(q);
                }
            }
            head += 1;
            if points.len() > NODE_COUNT {
                return Err(Error::Consistency("orbit of the standard node exceeds 96 points".into()));
            }
        }
        if points.len() != NODE_COUNT {
            return Err(Error::Consistency(format!("orbit of the standard node has {} points", points.len())));
        }
        for p in &points {
            if jacobian_rank(p)? != 3 {
                return Err(Error::Consistency(format!("{p:?} has Jacobian rank other than 3")));
            }
        }
        if tangent_cone_rank(&eta_pt)? != 4 {
            return Err(Error::Consistency("the standard node is not an ordinary double point".into()));
        }

        let mut order: Vec<usize> = (0..NODE_COUNT).collect();
        order.sort_by(|&a, &b| points[a].cmp(&points[b]));
        let nodes: Vec<Node> = order
            .iter()
            .enumerate()
            .map(|(id, &k)| Node { id, point: points[k].clone(), transporter: trans[k] })
            .collect();
        let point_index: FxHashMap<ProjectivePoint, usize> =
            nodes.iter().map(|n| (n.point.clone(), n.id)).collect();
        let eta = point_index[&eta_pt];

        let ruling_ids: Vec<u32> =
            ruling_generators().iter().map(|g| group.require_id(g)).collect::<Result<_>>()?;
        let ruling_group = Subgroup::generate(group, &ruling_ids);

        let gen_perm: Vec<[u8; NODE_COUNT]> = gens
            .iter()
            .map(|m| std::array::from_fn(|a| point_index[&nodes[a].point.transform(m)] as u8))
            .collect();
        let gen_swap: Vec<u128> = gen_ids
            .iter()
            .zip(&gen_perm)
            .map(|(&s, perm)| {
                let mut bits = 0u128;
                for a in 0..NODE_COUNT {
                    let b = perm[a] as usize;
                    let c = group.mul(group.mul(group.inv(nodes[b].transporter), s), nodes[a].transporter);
                    if !ruling_group.contains(c) {
                        bits |= 1 << a;
                    }
                }
                bits
            })
            .collect();

        let n = group.order();
        let mut perms = vec![[0u8; NODE_COUNT]; n];
        let mut swaps = vec![0u128; n];
        perms[0] = std::array::from_fn(|a| a as u8);
        for id in 1..n {
            let (p, gi) = group.parent(id as u32);
            let (pp, ps) = (perms[p as usize], swaps[p as usize]);
            let (sp, ss) = (&gen_perm[gi as usize], gen_swap[gi as usize]);
            let mut perm = [0u8; NODE_COUNT];
            let mut bits = 0u128;
            for a in 0..NODE_COUNT {
                let b = pp[a] as usize;
                perm[a] = sp[b];
                if ((ps >> a) & 1) ^ ((ss >> b) & 1) == 1 {
                    bits |= 1 << a;
                }
            }
            perms[id] = perm;
            swaps[id] = bits;
        }

        let stab: Vec<u32> = (0..n as u32).filter(|&g| perms[g as usize][eta] as usize == eta).collect();
        let stabilizer = Subgroup::from_elements(group, stab);
        if stabilizer.order() * NODE_COUNT != n {
            return Err(Error::Consistency("orbit-stabilizer count fails".into()));
        }
        if ruling_group.order() != 128 || !ruling_group.is_subgroup_of(&stabilizer) || stabilizer.order() != 256 {
            return Err(Error::Consistency(format!(
                "ruling subgroup of order {} in a stabilizer of order {}",
                ruling_group.order(),
                stabilizer.order()
            )));
        }
        Ok(NodeTable { nodes, eta, stabilizer, ruling_group, perms, swaps, point_index })
    }

    pub fn node_of(&self, p: &ProjectivePoint) -> Option<usize> {
        self.point_index.get(p).copied()
    }

    /// g(a) for node ids.
    pub fn image(&self, g: u32, a: usize) -> usize {
        self.perms[g as usize][a] as usize
    }

    pub fn permutation(&self, g: u32) -> &[u8; NODE_COUNT] {
        &self.perms[g as usize]
    }

    /// True when t_{g a}^-1 g t_a lies outside the ruling subgroup.
    pub fn swaps_ruling(&self, g: u32, a: usize) -> bool {
        (self.swaps[g as usize] >> a) & 1 == 1
    }

    pub fn fixes(&self, g: u32, a: usize) -> bool {
        self.image(g, a) == a
    }

    pub fn preserves_ruling(&self, g: u32, a: usize) -> Result<bool> {
        if !self.fixes(g, a) {
            return Err(Error::Precondition(format!("element does not fix node {a}")));
        }
        Ok(!self.swaps_ruling(g, a))
    }

    pub fn fixed_nodes(&self, g: u32) -> Vec<usize> {
        (0..NODE_COUNT).filter(|&a| self.fixes(g, a)).collect()
    }

    /// Classes A and B of nodes for `sub`, with stabilizers taken inside `sub`.
    /// `conj_sigma_a` is the membership mask of the conjugacy class used for A.
    pub fn node_classes(&self, sub: &Subgroup, conj_sigma_a: &[bool]) -> (Vec<usize>, Vec<usize>) {
        let mut in_a = [false; NODE_COUNT];
        let mut in_b = [true; NODE_COUNT];
        for &g in &sub.elements {
            if g == 0 {
                continue;
            }
            let perm = &self.perms[g as usize];
            let sw = self.swaps[g as usize];
            for a in 0..NODE_COUNT {
                if perm[a] as usize == a {
                    if conj_sigma_a[g as usize] {
                        in_a[a] = true;
                    }
                    if (sw >> a) & 1 == 1 {
                        in_b[a] = false;
                    }
                }
            }
        }
        (
            (0..NODE_COUNT).filter(|&a| in_a[a]).collect(),
            (0..NODE_COUNT).filter(|&a| in_b[a]).collect(),
        )
    }
}
