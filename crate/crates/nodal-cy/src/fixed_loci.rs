//! Fixed loci of group elements and commuting sets of elements on the threefold,
//! classified into nodes, smooth points, rational and elliptic curves.

use std::collections::BTreeMap;

use num_integer::Integer;
use serde::Serialize;

use crate::group_engine::{Group, Lift, Subgroup};
use crate::linalg::{nullspace, rref};
use crate::scalars::{int, ExtScalar, FieldScalar, Rational, UnitScale};
use crate::threefold::{defining_quadrics, NodeTable};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ComponentKind {
    NodePoint,
    SmoothPoint,
    RationalCurve,
    EllipticCurve,
}

impl ComponentKind {
    pub fn is_curve(self) -> bool {
        matches!(self, ComponentKind::RationalCurve | ComponentKind::EllipticCurve)
    }
}

/// Reduced echelon basis of the linear span of a fixed curve.
pub type CurveKey = Vec<Vec<ExtScalar>>;

#[derive(Clone, Debug)]
pub struct FixedComponent {
    pub kind: ComponentKind,
    pub key: Option<CurveKey>,
    pub incidences: Vec<usize>,
    /// Points of this component lying on other components of the same locus.
    pub crossings: usize,
}

#[derive(Clone, Debug)]
pub struct EigencomponentReport {
    /// Eigenvalue of each generator's lift, in turns.
    pub character: Vec<Rational>,
    pub subspace_basis: Vec<[ExtScalar; 8]>,
    /// Coefficients of the four quadrics, diagonal in the basis above.
    pub restricted_system: Vec<Vec<ExtScalar>>,
    pub components: Vec<FixedComponent>,
    pub euler: i64,
    /// 0 for points, 1 for curves.
    pub dimension: usize,
}

#[derive(Clone, Debug)]
pub struct FixedLocus {
    pub generators: Vec<u32>,
    pub eigen: Vec<EigencomponentReport>,
    pub nodes: Vec<usize>,
    pub isolated_nodes: Vec<usize>,
}

impl FixedLocus {
    pub fn components(&self) -> impl Iterator<Item = &FixedComponent> {
        self.eigen.iter().flat_map(|e| e.components.iter())
    }

    pub fn is_empty(&self) -> bool {
        self.eigen.iter().all(|e| e.components.is_empty())
    }

    /// Euler number of the fixed set on the singular threefold.
    pub fn euler(&self) -> i64 {
        self.eigen.iter().map(|e| e.euler).sum()
    }

    pub fn count(&self, kind: ComponentKind) -> usize {
        self.components().filter(|c| c.kind == kind).count()
    }

    pub fn curve_keys(&self) -> Vec<CurveKey> {
        self.components().filter_map(|c| c.key.clone()).collect()
    }

    pub fn summary(&self) -> FixedSummary {
        FixedSummary {
            nodes: self.count(ComponentKind::NodePoint),
            fixed_nodes: self.nodes.len(),
            smooth_points: self.count(ComponentKind::SmoothPoint),
            rational_curves: self.count(ComponentKind::RationalCurve),
            elliptic_curves: self.count(ComponentKind::EllipticCurve),
            euler: self.euler(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FixedSummary {
    /// Nodes that are isolated points of the fixed set.
    pub nodes: usize,
    pub fixed_nodes: usize,
    pub smooth_points: usize,
    pub rational_curves: usize,
    pub elliptic_curves: usize,
    pub euler: i64,
}

fn zeta8() -> FieldScalar {
    FieldScalar::new(int(0), Rational::new(1.into(), 2.into()), int(0), Rational::new(1.into(), 2.into()))
}

fn ext_pow(x: &ExtScalar, n: u32) -> ExtScalar {
    let mut acc = ExtScalar::one();
    for _ in 0..n {
        acc = &acc * x;
    }
    acc
}

/// exp(2 pi i t) for t with 24 t integral.
pub fn root_of_unity(turns: &Rational) -> Result<ExtScalar> {
    let k = turns * int(24);
    if !k.is_integer() {
        return Err(Error::Unsupported(format!("root of unity of order {} is outside the field", turns.denom())));
    }
    let k = k.to_integer().mod_floor(&24.into());
    let k: u32 = k.try_into().expect("small exponent");
    // zeta24 = zeta8^3 omega^2
    let z8 = ExtScalar::from_field(zeta8());
    let w = ExtScalar::omega();
    let z24 = &ext_pow(&z8, 3) * &ext_pow(&w, 2);
    Ok(ext_pow(&z24, k))
}

fn reduce_turns(t: Rational) -> Rational {
    let f = t.floor();
    t - f
}

fn unit_to_ext(s: UnitScale) -> ExtScalar {
    ExtScalar::from_field(s.to_field())
}

fn diagonal_coefficients() -> [[FieldScalar; 8]; 4] {
    let quadrics = defining_quadrics();
    std::array::from_fn(|k| {
        std::array::from_fn(|i| {
            let mut e = [0u8; 8];
            e[i] = 2;
            quadrics[k].coefficient(&e)
        })
    })
}

/// Joint eigenvectors of the lifts, one per orbit of the permutation group and character.
fn joint_eigenvectors(lifts: &[Lift]) -> Result<BTreeMap<Vec<Rational>, Vec<[ExtScalar; 8]>>> {
    let mut seen = [false; 8];
    let mut out: BTreeMap<Vec<Rational>, Vec<[ExtScalar; 8]>> = BTreeMap::new();
    for start in 0..8 {
        if seen[start] {
            continue;
        }
        let mut orbit = vec![start];
        seen[start] = true;
        let mut head = 0;
        while head < orbit.len() {
            let j = orbit[head];
            for l in lifts {
                let k = l.perm[j] as usize;
                if !seen[k] {
                    seen[k] = true;
                    orbit.push(k);
                }
            }
            head += 1;
        }
        // candidate eigenvalues from each generator's cycle through the base point
        let mut candidates: Vec<Vec<Rational>> = Vec::new();
        for l in lifts {
            let mut prod = UnitScale::ONE;
            let mut j = start;
            let mut len = 0i64;
            loop {
                prod = prod.mul(l.scale[j]);
                j = l.perm[j] as usize;
                len += 1;
                if j == start {
                    break;
                }
            }
            if prod.r2 != 0 {
                return Err(Error::Consistency(format!("cycle scale product has magnitude sqrt(2)^{}", prod.r2)));
            }
            let a = Rational::new((prod.ipow as i64).into(), 4.into());
            candidates.push((0..len).map(|k| reduce_turns((&a + int(k)) / int(len))).collect());
        }
        let mut choice = vec![0usize; lifts.len()];
        'combos: loop {
            let chi: Vec<Rational> = choice.iter().enumerate().map(|(g, &c)| candidates[g][c].clone()).collect();
            let inv_lambda: Vec<ExtScalar> =
                chi.iter().map(|t| root_of_unity(&reduce_turns(-t.clone()))).collect::<Result<_>>()?;
            let mut v: [Option<ExtScalar>; 8] = Default::default();
            v[start] = Some(ExtScalar::one());
            let mut stack = vec![start];
            let mut consistent = true;
            while let Some(j) = stack.pop() {
                let xj = v[j].clone().expect("assigned");
                for (l, il) in lifts.iter().zip(&inv_lambda) {
                    let k = l.perm[j] as usize;
                    let val = &(&unit_to_ext(l.scale[j]) * &xj) * il;
                    match &v[k] {
                        Some(existing) => {
                            if *existing != val {
                                consistent = false;
                                break;
                            }
                        }
                        None => {
                            v[k] = Some(val);
                            stack.push(k);
                        }
                    }
                }
                if !consistent {
                    break;
                }
            }
            if consistent {
                let vec: [ExtScalar; 8] = std::array::from_fn(|j| v[j].clone().unwrap_or_else(ExtScalar::zero));
                out.entry(chi).or_default().push(vec);
            }
            // next combination
            let mut g = 0;
            loop {
                if g == choice.len() {
                    break 'combos;
                }
                choice[g] += 1;
                if choice[g] < candidates[g].len() {
                    break;
                }
                choice[g] = 0;
                g += 1;
            }
        }
    }
    Ok(out)
}

fn first_nonzero(v: &[ExtScalar; 8]) -> usize {
    v.iter().position(|x| !x.is_zero()).expect("nonzero vector")
}

/// Coordinates of x in the disjointly supported basis, or None if x is not in the span.
fn coordinates_in(basis: &[[ExtScalar; 8]], x: &[ExtScalar; 8]) -> Option<Vec<ExtScalar>> {
    let mut u = Vec::with_capacity(basis.len());
    let mut covered = [false; 8];
    for v in basis {
        let j = first_nonzero(v);
        let c = &x[j] * &v[j].inverse();
        for k in 0..8 {
            if !v[k].is_zero() {
                covered[k] = true;
                if x[k] != &c * &v[k] {
                    return None;
                }
            }
        }
        u.push(c);
    }
    (0..8).all(|k| covered[k] || x[k].is_zero()).then_some(u)
}

fn span_key(rows: Vec<Vec<ExtScalar>>) -> CurveKey {
    let mut rows = rows;
    rref(&mut rows);
    rows
}

/// Image of a curve key under a monomial lift.
pub fn transform_key(key: &CurveKey, lift: &Lift) -> CurveKey {
    let rows = key
        .iter()
        .map(|row| {
            let mut out = vec![ExtScalar::zero(); 8];
            for j in 0..8 {
                out[lift.perm[j] as usize] = &unit_to_ext(lift.scale[j]) * &row[j];
            }
            out
        })
        .collect();
    span_key(rows)
}

fn sign_patterns(n: usize) -> Vec<Vec<bool>> {
    (0..1usize << n).map(|m| (0..n).map(|b| m >> b & 1 == 1).collect()).collect()
}

fn analyse_eigenspace(
    character: Vec<Rational>,
    basis: Vec<[ExtScalar; 8]>,
    diag: &[[FieldScalar; 8]; 4],
    candidate_nodes: &[(usize, [ExtScalar; 8])],
) -> Result<EigencomponentReport> {
    let s = basis.len();
    let restricted: Vec<Vec<ExtScalar>> = (0..4)
        .map(|k| {
            basis
                .iter()
                .map(|v| {
                    let mut acc = ExtScalar::zero();
                    for j in 0..8 {
                        if !v[j].is_zero() {
                            acc = &acc + &(&ExtScalar::from_field(diag[k][j].clone()) * &(&v[j] * &v[j]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let kernel = nullspace(&restricted, s);
    let nodes_here: Vec<(usize, Vec<ExtScalar>)> = candidate_nodes
        .iter()
        .filter_map(|(a, x)| coordinates_in(&basis, x).map(|u| (*a, u)))
        .collect();
    let mut report = EigencomponentReport {
        character,
        subspace_basis: basis.clone(),
        restricted_system: restricted,
        components: Vec::new(),
        euler: 0,
        dimension: 0,
    };
    let point_components = |report: &mut EigencomponentReport, count: usize| {
        for (a, _) in &nodes_here {
            report.components.push(FixedComponent {
                kind: ComponentKind::NodePoint,
                key: None,
                incidences: vec![*a],
                crossings: 0,
            });
        }
        for _ in nodes_here.len()..count {
            report.components.push(FixedComponent {
                kind: ComponentKind::SmoothPoint,
                key: None,
                incidences: Vec::new(),
                crossings: 0,
            });
        }
        report.euler = count as i64;
    };
    match kernel.len() {
        0 => {}
        1 => {
            let nz = kernel[0].iter().filter(|x| !x.is_zero()).count();
            point_components(&mut report, 1 << (nz - 1));
        }
        2 => {
            let (p, q) = (&kernel[0], &kernel[1]);
            // proportionality classes of the columns (p_c, q_c)
            let mut classes: Vec<Vec<usize>> = Vec::new();
            for c in 0..s {
                if p[c].is_zero() && q[c].is_zero() {
                    continue;
                }
                match classes.iter_mut().find(|cl| {
                    let r = cl[0];
                    (&p[c] * &q[r]) == (&p[r] * &q[c])
                }) {
                    Some(cl) => cl.push(c),
                    None => classes.push(vec![c]),
                }
            }
            let m = classes.len();
            if m == 1 {
                point_components(&mut report, 1 << (classes[0].len() - 1));
                return Ok(report);
            }
            let kind = match m {
                2 | 3 => ComponentKind::RationalCurve,
                4 => ComponentKind::EllipticCurve,
                _ => return Err(Error::Unsupported(format!("fixed curve of {m} square classes (genus > 1)"))),
            };
            report.dimension = 1;
            // u_c = r_c u_rep with r_c^2 = ratio of the class coefficients
            let mut roots: Vec<Vec<ExtScalar>> = Vec::new();
            for cl in &classes {
                let r = cl[0];
                let mut rs = vec![ExtScalar::one()];
                for &c in &cl[1..] {
                    let ratio = if !p[r].is_zero() { &p[c] * &p[r].inverse() } else { &q[c] * &q[r].inverse() };
                    rs.push(ratio.sqrt().ok_or_else(|| {
                        Error::Unsupported("square root outside the coefficient field".into())
                    })?);
                }
                roots.push(rs);
            }
            let patterns: Vec<Vec<Vec<bool>>> = classes.iter().map(|cl| sign_patterns(cl.len() - 1)).collect();
            let sizes: Vec<usize> = patterns.iter().map(Vec::len).collect();
            let total: usize = sizes.iter().product();
            let points_per_fibre = 1usize << (m - 2);
            let crossings: usize = sizes.iter().filter(|&&n| n > 1).count() * points_per_fibre;
            for idx in 0..total {
                let mut rem = idx;
                let mut choice = Vec::with_capacity(m);
                for n in &sizes {
                    choice.push(rem % n);
                    rem /= n;
                }
                let mut rows = Vec::with_capacity(m);
                let mut factors: Vec<Option<ExtScalar>> = vec![None; s];
                for (i, cl) in classes.iter().enumerate() {
                    let signs = &patterns[i][choice[i]];
                    let mut row = vec![ExtScalar::zero(); 8];
                    for (t, &c) in cl.iter().enumerate() {
                        let mut r = roots[i][t].clone();
                        if t > 0 && signs[t - 1] {
                            r = -&r;
                        }
                        for j in 0..8 {
                            if !basis[c][j].is_zero() {
                                row[j] = &r * &basis[c][j];
                            }
                        }
                        factors[c] = Some(r);
                    }
                    rows.push(row);
                }
                let incidences = nodes_here
                    .iter()
                    .filter(|(_, u)| {
                        classes.iter().all(|cl| {
                            let rep = &u[cl[0]];
                            cl.iter().all(|&c| u[c] == &factors[c].clone().expect("set") * rep)
                        }) && (0..s).all(|c| factors[c].is_some() || u[c].is_zero())
                    })
                    .map(|(a, _)| *a)
                    .collect();
                report.components.push(FixedComponent { kind, key: Some(span_key(rows)), incidences, crossings });
            }
            let e_curve = if kind == ComponentKind::EllipticCurve { 0 } else { 2 };
            let mut euler = total as i64 * e_curve;
            for (i, &n) in sizes.iter().enumerate() {
                let others: usize = sizes.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &x)| x).product();
                euler -= ((n - 1) * others * points_per_fibre) as i64;
            }
            report.euler = euler;
        }
        k => return Err(Error::Unsupported(format!("fixed set of dimension {} in one eigenspace", k - 1))),
    }
    Ok(report)
}

fn node_vector(nodes: &NodeTable, a: usize) -> [ExtScalar; 8] {
    nodes.nodes[a].point.coords().clone().map(ExtScalar::from_field)
}

/// Common fixed set of the given elements, which must commute in the projective group.
pub fn common_fixed(group: &Group, nodes: &NodeTable, elements: &[u32]) -> Result<FixedLocus> {
    for (i, &a) in elements.iter().enumerate() {
        for &b in &elements[i + 1..] {
            if !group.commute(a, b) {
                return Err(Error::Precondition(format!("elements {a} and {b} do not commute")));
            }
        }
    }
    let lifts: Vec<Lift> = elements.iter().map(|&g| *group.element(g).lift()).collect();
    let diag = diagonal_coefficients();
    let fixed_nodes: Vec<usize> =
        (0..nodes.nodes.len()).filter(|&a| elements.iter().all(|&g| nodes.fixes(g, a))).collect();
    let candidates: Vec<(usize, [ExtScalar; 8])> = fixed_nodes.iter().map(|&a| (a, node_vector(nodes, a))).collect();
    let mut eigen = Vec::new();
    for (chi, basis) in joint_eigenvectors(&lifts)? {
        let report = analyse_eigenspace(chi, basis, &diag, &candidates)?;
        if !report.components.is_empty() {
            eigen.push(report);
        }
    }
    let isolated_nodes = eigen
        .iter()
        .filter(|e| e.dimension == 0)
        .flat_map(|e| e.components.iter())
        .filter(|c| c.kind == ComponentKind::NodePoint)
        .map(|c| c.incidences[0])
        .collect();
    let located: usize = eigen
        .iter()
        .flat_map(|e| e.components.iter())
        .filter(|c| c.kind == ComponentKind::NodePoint)
        .count()
        + eigen
            .iter()
            .filter(|e| e.dimension == 1)
            .map(|e| {
                let mut v: Vec<usize> = e.components.iter().flat_map(|c| c.incidences.iter().copied()).collect();
                v.sort_unstable();
                v.dedup();
                v.len()
            })
            .sum::<usize>();
    if located != fixed_nodes.len() {
        return Err(Error::Consistency(format!(
            "{} fixed nodes but {located} located in eigenspaces",
            fixed_nodes.len()
        )));
    }
    Ok(FixedLocus { generators: elements.to_vec(), eigen, nodes: fixed_nodes, isolated_nodes })
}

pub fn fixed_locus(group: &Group, nodes: &NodeTable, g: u32) -> Result<FixedLocus> {
    if group.element(g).is_identity() {
        return Err(Error::Precondition("the identity fixes everything".into()));
    }
    common_fixed(group, nodes, &[g])
}

/// Exact emptiness test without classifying components.
pub fn fixed_point_free(group: &Group, g: u32) -> Result<bool> {
    let diag = diagonal_coefficients();
    for (_, basis) in joint_eigenvectors(&[*group.element(g).lift()])? {
        let restricted: Vec<Vec<ExtScalar>> = (0..4)
            .map(|k| {
                basis
                    .iter()
                    .map(|v| {
                        let mut acc = ExtScalar::zero();
                        for j in 0..8 {
                            acc = &acc + &(&ExtScalar::from_field(diag[k][j].clone()) * &(&v[j] * &v[j]));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        if !nullspace(&restricted, basis.len()).is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Euler number of the fixed set on the small resolution. A single element replaces each
/// fixed node by two fixed points or a fixed line; a pair set keeps two points over a
/// node exactly when some element of the group isolates it, and nothing otherwise.
pub fn resolution_euler(locus: &FixedLocus, isolated_by_member: &dyn Fn(usize) -> bool) -> i64 {
    if locus.generators.len() == 1 {
        locus.euler() + locus.nodes.len() as i64
    } else {
        let isolated = locus.nodes.iter().filter(|&&a| isolated_by_member(a)).count() as i64;
        locus.euler() - locus.nodes.len() as i64 + 2 * isolated
    }
}

/// Whether no non-identity element of the subgroup has a fixed point; elements of
/// prime order suffice.
pub fn is_free(group: &Group, sub: &Subgroup) -> Result<bool> {
    for &g in &sub.elements {
        let n = group.order_of(g);
        if n == 1 {
            continue;
        }
        let is_prime = (2..n).all(|d| n % d != 0);
        if is_prime && !fixed_point_free(group, g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Counts of fixed components printed for the named elements, used when exact
/// classification is unavailable.
pub fn classification_fallback(group: &Group, ambient: &Subgroup, g: u32) -> Result<FixedSummary> {
    let catalog = [
        ("(Y0, Y1, Y2, Y3, -X0, -X1, -X2, -X3)", FixedSummary { nodes: 0, fixed_nodes: 0, smooth_points: 0, rational_curves: 0, elliptic_curves: 0, euler: 0 }),
        ("(Y0, -Y1, -Y2, Y3, X0, -X1, -X2, X3)", FixedSummary { nodes: 16, fixed_nodes: 16, smooth_points: 0, rational_curves: 0, elliptic_curves: 0, euler: 16 }),
        ("(Y0, -Y3, iY1, iY2, X3, X1, X0, X2)", FixedSummary { nodes: 0, fixed_nodes: 0, smooth_points: 4, rational_curves: 0, elliptic_curves: 1, euler: 4 }),
    ];
    for (text, summary) in catalog {
        let rep = group.require_id(&crate::group_engine::notation_element(text))?;
        if crate::group_engine::conjugacy_class(group, rep, ambient)?.contains(&g) {
            return Ok(summary);
        }
    }
    Err(Error::Unsupported(format!("element {g} is not in a cataloged class")))
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub representative: String,
    pub class_size: usize,
    pub kinds: FixedSummary,
    /// Node ids on each component of the representative's fixed set.
    pub node_incidences: Vec<Vec<usize>>,
    pub crossings: Vec<usize>,
}

/// Catalog entry for a conjugacy class, computed on its first element.
pub fn catalog_entry(group: &Group, nodes: &NodeTable, class: &[u32]) -> Result<CatalogEntry> {
    let rep = *class.first().ok_or_else(|| Error::Precondition("empty class".into()))?;
    let locus = fixed_locus(group, nodes, rep)?;
    Ok(CatalogEntry {
        representative: group.element(rep).notation(),
        class_size: class.len(),
        kinds: locus.summary(),
        node_incidences: locus.components().map(|c| c.incidences.clone()).collect(),
        crossings: locus.components().map(|c| c.crossings).collect(),
    })
}
