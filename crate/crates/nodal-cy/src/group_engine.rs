//! Monomial matrices over Q(i, sqrt 2), the projective groups they generate
//! modulo the scalars {1, i, -1, -i}, and subgroup enumeration.

use std::fmt;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::scalars::{FieldScalar, UnitScale};
use crate::{Error, Result};

pub const COORD_NAMES: [&str; 8] = ["Y0", "Y1", "Y2", "Y3", "X0", "X1", "X2", "X3"];

pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

/// Column j carries the single entry `scale[j]` in row `perm[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialMatrix {
    pub perm: [usize; 8],
    pub scale: [FieldScalar; 8],
}

impl MonomialMatrix {
    pub fn identity() -> Self {
        MonomialMatrix { perm: [0, 1, 2, 3, 4, 5, 6, 7], scale: std::array::from_fn(|_| FieldScalar::one()) }
    }

    pub fn is_valid(&self) -> bool {
        let mut seen = [false; 8];
        for &p in &self.perm {
            if p >= 8 || seen[p] {
                return false;
            }
            seen[p] = true;
        }
        self.scale.iter().all(|s| !s.is_zero())
    }

    /// `self * other`, i.e. apply `other` first.
    pub fn compose(&self, other: &MonomialMatrix) -> MonomialMatrix {
        MonomialMatrix {
            perm: std::array::from_fn(|j| self.perm[other.perm[j]]),
            scale: std::array::from_fn(|j| &self.scale[other.perm[j]] * &other.scale[j]),
        }
    }

    pub fn apply(&self, v: &[FieldScalar; 8]) -> [FieldScalar; 8] {
        let mut out: [FieldScalar; 8] = std::array::from_fn(|_| FieldScalar::zero());
        for j in 0..8 {
            out[self.perm[j]] = &self.scale[j] * &v[j];
        }
        out
    }

    pub fn scalar_mul(&self, c: &FieldScalar) -> MonomialMatrix {
        MonomialMatrix { perm: self.perm, scale: std::array::from_fn(|j| c * &self.scale[j]) }
    }

    /// `Some(c)` when the matrix is c times the identity.
    pub fn as_scalar(&self) -> Option<FieldScalar> {
        let id = (0..8).all(|j| self.perm[j] == j);
        (id && self.scale.iter().all(|s| *s == self.scale[0])).then(|| self.scale[0].clone())
    }

    pub fn to_lift(&self) -> Result<Lift> {
        if !self.is_valid() {
            return Err(Error::NotInGroup("not a monomial matrix".into()));
        }
        let mut scale = [UnitScale::ONE; 8];
        for j in 0..8 {
            scale[j] = UnitScale::from_field(&self.scale[j]).ok_or_else(|| {
                Error::NotInGroup(format!("scale {} is not of the form i^a sqrt(2)^b", self.scale[j]))
            })?;
        }
        Ok(Lift { perm: self.perm.map(|p| p as u8), scale })
    }

    /// Canonical element of the projective group, with the lift hint k such that
    /// i^k * self is the stored canonical lift.
    pub fn to_element(&self) -> Result<(GroupElement, u8)> {
        Ok(self.to_lift()?.normalized_magnitude()?.canonical())
    }
}

/// Compact monomial matrix with unit scales i^a sqrt(2)^b.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lift {
    pub perm: [u8; 8],
    pub scale: [UnitScale; 8],
}

impl Lift {
    pub const IDENTITY: Lift = Lift { perm: [0, 1, 2, 3, 4, 5, 6, 7], scale: [UnitScale::ONE; 8] };

    #[inline]
    pub fn compose(&self, o: &Lift) -> Lift {
        let mut perm = [0u8; 8];
        let mut scale = [UnitScale::ONE; 8];
        for j in 0..8 {
            let k = o.perm[j] as usize;
            perm[j] = self.perm[k];
            scale[j] = self.scale[k].mul(o.scale[j]);
        }
        Lift { perm, scale }
    }

    pub fn inverse(&self) -> Lift {
        let mut perm = [0u8; 8];
        let mut scale = [UnitScale::ONE; 8];
        for j in 0..8 {
            let p = self.perm[j] as usize;
            perm[p] = j as u8;
            scale[p] = self.scale[j].inv();
        }
        Lift { perm, scale }
    }

    pub fn times_i_power(&self, k: u8) -> Lift {
        let mut out = *self;
        for s in out.scale.iter_mut() {
            s.ipow = (s.ipow + k) % 4;
        }
        out
    }

    pub fn times_scale(&self, c: UnitScale) -> Lift {
        let mut out = *self;
        for s in out.scale.iter_mut() {
            *s = s.mul(c);
        }
        out
    }

    /// Rescales by a power of sqrt 2 so that the product of scale magnitudes is 1,
    /// which holds for every matrix of the ambient group.
    pub fn normalized_magnitude(&self) -> Result<Lift> {
        let total: i32 = self.scale.iter().map(|s| s.r2 as i32).sum();
        if total % 8 != 0 {
            return Err(Error::NotInGroup(format!("scale magnitudes multiply to sqrt(2)^{total}")));
        }
        Ok(self.times_scale(UnitScale::new(0, -total / 8)))
    }

    /// Canonical representative modulo {1, i, -1, -i}: the scale of column 0 is made
    /// lexicographically minimal among the four multiples, i.e. a negative real.
    #[inline]
    pub fn canonical(&self) -> (GroupElement, u8) {
        let k = (6 - self.scale[0].ipow) % 4;
        (GroupElement(self.times_i_power(k)), k)
    }

    pub fn is_identity_perm(&self) -> bool {
        self.perm == Lift::IDENTITY.perm
    }

    /// `Some(c)` when the lift is a scalar matrix.
    pub fn as_scalar(&self) -> Option<UnitScale> {
        (self.is_identity_perm() && self.scale.iter().all(|s| *s == self.scale[0])).then_some(self.scale[0])
    }

    pub fn to_matrix(&self) -> MonomialMatrix {
        MonomialMatrix { perm: self.perm.map(|p| p as usize), scale: self.scale.map(UnitScale::to_field) }
    }

    pub fn power(&self, n: u32) -> Lift {
        let mut acc = Lift::IDENTITY;
        for _ in 0..n {
            acc = self.compose(&acc);
        }
        acc
    }

    /// Coordinate-list notation: entry k reads `s*V` where new coordinate k = s * old V.
    pub fn notation(&self) -> String {
        let mut entries = vec![String::new(); 8];
        for m in 0..8 {
            let k = self.perm[m] as usize;
            let s = self.scale[m];
            let mut t = String::new();
            if s.ipow >= 2 {
                t.push('-');
            }
            if s.ipow % 2 == 1 {
                t.push('i');
            }
            let r2 = s.r2 as i32;
            // sqrt(2)^r2 written as 2^q, 2^q sqrt2, or sqrt2 / 2^q
            let (q, odd) = (r2.abs() / 2, r2.abs() % 2 == 1);
            if r2 > 0 && q > 0 {
                t.push_str(&(1u64 << q).to_string());
            }
            if odd {
                t.push_str("√2");
            }
            t.push_str(COORD_NAMES[m]);
            if r2 < 0 {
                t.push_str(&format!("/{}", 1u64 << (q + odd as i32)));
            }
            entries[k] = t;
        }
        format!("({})", entries.join(", "))
    }
}

/// Element of the projective group, stored as its canonical lift.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(Lift);

impl GroupElement {
    pub fn identity() -> Self {
        Lift::IDENTITY.canonical().0
    }

    pub fn lift(&self) -> &Lift {
        &self.0
    }

    /// Lift with the column 0 scale having i-power 0; used for display.
    pub fn display_lift(&self) -> Lift {
        let k = (4 - self.0.scale[0].ipow) % 4;
        self.0.times_i_power(k)
    }

    #[inline]
    pub fn mul(&self, o: &GroupElement) -> GroupElement {
        self.0.compose(&o.0).canonical().0
    }

    pub fn inverse(&self) -> GroupElement {
        self.0.inverse().canonical().0
    }

    pub fn matrix(&self) -> MonomialMatrix {
        self.0.to_matrix()
    }

    pub fn is_identity(&self) -> bool {
        self.0.as_scalar().is_some()
    }

    /// Order in the projective group.
    pub fn order(&self) -> u32 {
        let mut acc = self.0;
        let mut n = 1;
        while acc.as_scalar().is_none() {
            acc = self.0.compose(&acc);
            n += 1;
        }
        n
    }

    pub fn notation(&self) -> String {
        self.display_lift().notation()
    }

    /// Serialization: permutation followed by the eight scales as field-scalar strings.
    pub fn serialize(&self) -> String {
        let m = self.0.to_matrix();
        let perm: Vec<String> = m.perm.iter().map(|p| p.to_string()).collect();
        let scales: Vec<String> = m.scale.iter().map(|s| s.to_strings().join(" ")).collect();
        format!("{} | {}", perm.join(" "), scales.join(" ; "))
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.notation())
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.notation())
    }
}

fn parse_entry(tok: &str) -> Result<(usize, FieldScalar)> {
    let bad = || Error::Parse(format!("cannot read coordinate entry `{tok}`"));
    let mut s = tok.trim().replace(' ', "").replace('*', "").replace('·', "");
    let mut scale = FieldScalar::one();
    if let Some(rest) = s.strip_prefix('-') {
        scale = -&scale;
        s = rest.to_string();
    }
    let mut div = 1i64;
    if let Some((head, d)) = s.split_once('/') {
        div = d.parse().map_err(|_| bad())?;
        s = head.to_string();
    }
    let pos = s.find(['X', 'Y']).ok_or_else(bad)?;
    let (pre, var) = s.split_at(pos);
    let idx = COORD_NAMES.iter().position(|n| *n == var).ok_or_else(bad)?;
    let mut pre = pre.to_string();
    if let Some(rest) = pre.strip_prefix('i') {
        scale = &scale * &FieldScalar::i();
        pre = rest.to_string();
    }
    for root in ["√2", "sqrt2"] {
        if let Some(head) = pre.strip_suffix(root) {
            scale = &scale * &FieldScalar::sqrt2();
            pre = head.to_string();
        }
    }
    if !pre.is_empty() {
        let n: i64 = pre.parse().map_err(|_| bad())?;
        scale = scale.scale(&crate::scalars::int(n));
    }
    if div != 1 {
        scale = scale.scale(&crate::scalars::rat(1, div));
    }
    Ok((idx, scale))
}

/// Parses the coordinate-list notation, e.g. `(Y0, -iY1, Y2, -iY3, X1, X0, X3, X2)`
/// or `√2 · (X0, X1, X2, X3, Y0/2, Y1/2, Y2/2, Y3/2)`.
pub fn parse_notation(text: &str) -> Result<MonomialMatrix> {
    let text = text.trim();
    let open = text.find('(').ok_or_else(|| Error::Parse(format!("missing `(` in `{text}`")))?;
    let close = text.rfind(')').ok_or_else(|| Error::Parse(format!("missing `)` in `{text}`")))?;
    let prefix = text[..open].replace([' ', '*', '·'], "");
    let mut global = FieldScalar::one();
    match prefix.as_str() {
        "" => {}
        "√2" | "sqrt2" => global = FieldScalar::sqrt2(),
        "-" => global = -&global,
        other => return Err(Error::Parse(format!("unknown prefix `{other}`"))),
    }
    let toks: Vec<&str> = text[open + 1..close].split(',').collect();
    if toks.len() != 8 {
        return Err(Error::Parse(format!("expected 8 entries, got {}", toks.len())));
    }
    let mut perm = [usize::MAX; 8];
    let mut scale: [FieldScalar; 8] = std::array::from_fn(|_| FieldScalar::zero());
    for (k, tok) in toks.iter().enumerate() {
        let (m, s) = parse_entry(tok)?;
        if perm[m] != usize::MAX {
            return Err(Error::Parse(format!("variable {} used twice", COORD_NAMES[m])));
        }
        perm[m] = k;
        scale[m] = &global * &s;
    }
    Ok(MonomialMatrix { perm, scale })
}

/// Parses the raw form `p0 .. p7 | s0 ; .. ; s7` with each scale as four fractions.
pub fn parse_raw(text: &str) -> Result<MonomialMatrix> {
    let (p, s) = text.split_once('|').ok_or_else(|| Error::Parse("raw element needs `|`".into()))?;
    let perm: Vec<usize> = p
        .split_whitespace()
        .map(|x| x.parse().map_err(|_| Error::Parse(format!("bad index `{x}`"))))
        .collect::<Result<_>>()?;
    let scales: Vec<FieldScalar> = s
        .split(';')
        .map(|x| FieldScalar::from_strings(&x.split_whitespace().collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    if perm.len() != 8 || scales.len() != 8 {
        return Err(Error::Parse("raw element needs 8 indices and 8 scales".into()));
    }
    let m = MonomialMatrix { perm: perm.try_into().unwrap(), scale: scales.try_into().unwrap() };
    if !m.is_valid() {
        return Err(Error::Parse("raw element is not a monomial matrix".into()));
    }
    Ok(m)
}

pub fn parse_element_line(line: &str) -> Result<MonomialMatrix> {
    if line.contains('|') {
        parse_raw(line)
    } else {
        parse_notation(line)
    }
}

/// Reads one element per non-empty line; `#` starts a comment.
pub fn parse_generator_file(text: &str) -> Result<Vec<MonomialMatrix>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(parse_element_line)
        .collect()
}

pub fn notation_element(text: &str) -> GroupElement {
    parse_notation(text).and_then(|m| m.to_element()).expect("valid built-in element").0
}

/// U1, U2, T, J.
pub fn standard_generators() -> [MonomialMatrix; 4] {
    [
        "(Y0, Y1, Y3, Y2, X0, X3, X2, X1)",
        "(Y0, Y3, Y2, Y1, X0, X1, X3, X2)",
        "(Y0, -iY1, Y2, -iY3, X1, X0, X3, X2)",
        "√2 · (X0, X1, X2, X3, Y0/2, Y1/2, Y2/2, Y3/2)",
    ]
    .map(|s| parse_notation(s).expect("built-in generator"))
}

/// U1U2, U1T, U2T, J.
pub fn index_two_generators() -> [MonomialMatrix; 4] {
    let [u1, u2, t, j] = standard_generators();
    [u1.compose(&u2), u1.compose(&t), u2.compose(&t), j]
}

/// Finite projective group materialized by breadth-first closure.
pub struct Group {
    elements: Vec<GroupElement>,
    index: FxHashMap<GroupElement, u32>,
    parent: Vec<(u32, u8)>,
    generators: Vec<GroupElement>,
    inverse: Vec<u32>,
}

impl Group {
    /// Closure modulo scalars; `elements[id] = generators[g] * elements[parent]`.
    pub fn closure(generators: &[GroupElement], cap: usize) -> Result<Group> {
        let id = GroupElement::identity();
        let mut elements = vec![id];
        let mut index = FxHashMap::default();
        index.insert(id, 0u32);
        let mut parent = vec![(0u32, u8::MAX)];
        let mut head = 0;
        while head < elements.len() {
            let x = elements[head];
            for (gi, g) in generators.iter().enumerate() {
                let y = g.mul(&x);
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(y) {
                    if elements.len() >= cap {
                        return Err(Error::CapExceeded(cap));
                    }
                    e.insert(elements.len() as u32);
                    elements.push(y);
                    parent.push((head as u32, gi as u8));
                }
            }
            head += 1;
        }
        let inverse = elements.iter().map(|e| index[&e.inverse()]).collect();
        Ok(Group { elements, index, parent, generators: generators.to_vec(), inverse })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, id: u32) -> &GroupElement {
        &self.elements[id as usize]
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// `(parent id, generator index)`; the identity has generator index `u8::MAX`.
    pub fn parent(&self, id: u32) -> (u32, u8) {
        self.parent[id as usize]
    }

    pub fn id_of(&self, g: &GroupElement) -> Option<u32> {
        self.index.get(g).copied()
    }

    pub fn require_id(&self, g: &GroupElement) -> Result<u32> {
        self.id_of(g).ok_or_else(|| Error::NotInGroup(g.notation()))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.index[&self.elements[a as usize].mul(&self.elements[b as usize])]
    }

    pub fn inv(&self, a: u32) -> u32 {
        self.inverse[a as usize]
    }

    /// h g h^-1
    #[inline]
    pub fn conj(&self, h: u32, g: u32) -> u32 {
        self.mul(self.mul(h, g), self.inverse[h as usize])
    }

    pub fn commute(&self, a: u32, b: u32) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }

    pub fn order_of(&self, a: u32) -> u32 {
        self.elements[a as usize].order()
    }

    pub fn is_involution(&self, a: u32) -> bool {
        a != 0 && self.mul(a, a) == 0
    }

    pub fn all(&self) -> Subgroup {
        Subgroup {
            generators: self.generators.iter().map(|g| self.index[g]).collect(),
            elements: (0..self.order() as u32).collect(),
        }
    }
}

/// Subgroup of a materialized ambient group, stored as sorted element ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subgroup {
    pub generators: Vec<u32>,
    pub elements: Vec<u32>,
}

impl Subgroup {
    pub fn trivial() -> Subgroup {
        Subgroup { generators: vec![], elements: vec![0] }
    }

    pub fn generate(group: &Group, generators: &[u32]) -> Subgroup {
        let mut seen = FxHashSet::default();
        seen.insert(0u32);
        let mut elements = vec![0u32];
        let mut head = 0;
        while head < elements.len() {
            let x = elements[head];
            for &g in generators {
                let y = group.mul(g, x);
                if seen.insert(y) {
                    elements.push(y);
                }
            }
            head += 1;
        }
        elements.sort_unstable();
        Subgroup { generators: generators.to_vec(), elements }
    }

    pub fn from_elements(group: &Group, elements: Vec<u32>) -> Subgroup {
        let mut elements = elements;
        elements.sort_unstable();
        elements.dedup();
        let generators = minimal_generators(group, &elements);
        Subgroup { generators, elements }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: u32) -> bool {
        self.elements.binary_search(&g).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.elements.iter().all(|&g| other.contains(g))
    }

    pub fn conjugate(&self, group: &Group, h: u32) -> Subgroup {
        let mut elements: Vec<u32> = self.elements.iter().map(|&g| group.conj(h, g)).collect();
        elements.sort_unstable();
        Subgroup { generators: self.generators.iter().map(|&g| group.conj(h, g)).collect(), elements }
    }

    pub fn is_abelian(&self, group: &Group) -> bool {
        self.generators.iter().all(|&a| self.generators.iter().all(|&b| group.commute(a, b)))
    }

    pub fn is_elementary_abelian_2(&self, group: &Group) -> bool {
        self.is_abelian(group) && self.elements.iter().all(|&g| group.mul(g, g) == 0)
    }

    pub fn order_histogram(&self, group: &Group) -> Vec<(u32, usize)> {
        let mut h: FxHashMap<u32, usize> = FxHashMap::default();
        for &g in &self.elements {
            *h.entry(group.order_of(g)).or_default() += 1;
        }
        let mut v: Vec<_> = h.into_iter().collect();
        v.sort_unstable();
        v
    }

    pub fn involutions(&self, group: &Group) -> Vec<u32> {
        self.elements.iter().copied().filter(|&g| group.is_involution(g)).collect()
    }

    pub fn generator_elements<'a>(&'a self, group: &'a Group) -> impl Iterator<Item = &'a GroupElement> + 'a {
        self.generators.iter().map(move |&g| group.element(g))
    }
}

fn minimal_generators(group: &Group, elements: &[u32]) -> Vec<u32> {
    let mut gens = Vec::new();
    let mut span = Subgroup::trivial();
    for &g in elements {
        if !span.contains(g) {
            gens.push(g);
            span = Subgroup::generate(group, &gens);
        }
    }
    gens
}

/// Conjugation by each generator of an ambient subgroup, as permutations of element ids.
pub struct ConjugationAction {
    tables: Vec<Vec<u32>>,
}

impl ConjugationAction {
    pub fn new(group: &Group, ambient: &Subgroup) -> ConjugationAction {
        let tables = ambient
            .generators
            .iter()
            .map(|&h| (0..group.order() as u32).map(|g| group.conj(h, g)).collect())
            .collect();
        ConjugationAction { tables }
    }

    pub fn element_orbit(&self, g: u32) -> Vec<u32> {
        let mut seen = FxHashSet::default();
        seen.insert(g);
        let mut out = vec![g];
        let mut head = 0;
        while head < out.len() {
            let x = out[head];
            for t in &self.tables {
                let y = t[x as usize];
                if seen.insert(y) {
                    out.push(y);
                }
            }
            head += 1;
        }
        out.sort_unstable();
        out
    }

    /// Sorted element lists of all conjugates of `elements`.
    pub fn set_orbit(&self, elements: &[u32]) -> Vec<Vec<u32>> {
        let mut start = elements.to_vec();
        start.sort_unstable();
        let mut seen = FxHashSet::default();
        seen.insert(start.clone());
        let mut out = vec![start];
        let mut head = 0;
        while head < out.len() {
            for t in &self.tables {
                let mut y: Vec<u32> = out[head].iter().map(|&g| t[g as usize]).collect();
                y.sort_unstable();
                if seen.insert(y.clone()) {
                    out.push(y);
                }
            }
            head += 1;
        }
        out
    }
}

pub fn conjugacy_class(group: &Group, g: u32, ambient: &Subgroup) -> Result<Vec<u32>> {
    if !ambient.contains(g) {
        return Err(Error::NotInGroup(group.element(g).notation()));
    }
    Ok(ConjugationAction::new(group, ambient).element_orbit(g))
}

/// Conjugacy classes of involutions of `ambient`, each sorted, ordered by smallest id.
pub fn involution_classes(group: &Group, ambient: &Subgroup) -> Vec<Vec<u32>> {
    let action = ConjugationAction::new(group, ambient);
    let mut seen = FxHashSet::default();
    let mut classes = Vec::new();
    for g in ambient.involutions(group) {
        if seen.contains(&g) {
            continue;
        }
        let c = action.element_orbit(g);
        seen.extend(c.iter().copied());
        classes.push(c);
    }
    classes
}

pub fn subgroups_conjugate(group: &Group, a: &Subgroup, b: &Subgroup, ambient: &Subgroup) -> bool {
    if a.order() != b.order() || a.is_abelian(group) != b.is_abelian(group) {
        return false;
    }
    if a.order_histogram(group) != b.order_histogram(group) {
        return false;
    }
    ambient
        .elements
        .par_iter()
        .any(|&h| a.generators.iter().all(|&g| b.contains(group.conj(h, g))))
}

fn extend_by(group: &Group, a: &Subgroup, x: u32) -> Subgroup {
    let mut elements: Vec<u32> = a.elements.clone();
    elements.extend(a.elements.iter().map(|&g| group.mul(x, g)));
    elements.sort_unstable();
    let mut generators = a.generators.clone();
    generators.push(x);
    Subgroup { generators, elements }
}

/// Layered enumeration of subgroups up to conjugacy in `ambient`: each layer doubles
/// the order by adjoining x with x normalizing A and x^2 in A. `admissible(A, x)` filters
/// candidates and `cap` bounds the number of classes.
pub fn layered_classes(
    group: &Group,
    ambient: &Subgroup,
    max_order: usize,
    cap: usize,
    candidates: impl Fn(&Subgroup) -> Vec<u32> + Sync,
    admissible: impl Fn(&Subgroup, u32) -> bool + Sync,
) -> Result<Vec<Subgroup>> {
    let action = ConjugationAction::new(group, ambient);
    let mut seen: FxHashSet<Vec<u32>> = FxHashSet::default();
    let mut out = vec![Subgroup::trivial()];
    seen.insert(vec![0]);
    let mut layer = vec![Subgroup::trivial()];
    while !layer.is_empty() && layer[0].order() * 2 <= max_order {
        let mut next = Vec::new();
        for a in &layer {
            let cands: Vec<Subgroup> = candidates(a)
                .into_par_iter()
                .filter(|&x| !a.contains(x) && admissible(a, x))
                .map(|x| extend_by(group, a, x))
                .collect();
            for b in cands {
                if seen.contains(&b.elements) {
                    continue;
                }
                for k in action.set_orbit(&b.elements) {
                    seen.insert(k);
                }
                let b = Subgroup { generators: minimal_generators(group, &b.elements), elements: b.elements };
                next.push(b);
                if out.len() + next.len() > cap {
                    return Err(Error::BudgetExhausted(format!("more than {cap} subgroup classes")));
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    Ok(out)
}

/// Elementary abelian 2-subgroups of `ambient` up to conjugacy, the trivial group included.
pub fn elementary_abelian_2_subgroups(group: &Group, ambient: &Subgroup, cap: usize) -> Result<Vec<Subgroup>> {
    let invols = ambient.involutions(group);
    layered_classes(
        group,
        ambient,
        usize::MAX,
        cap,
        |a| invols.iter().copied().filter(|&x| a.generators.iter().all(|&g| group.commute(g, x))).collect(),
        |_, _| true,
    )
}

/// Normalizer of `a` inside `ambient`.
pub fn normalizer(group: &Group, a: &Subgroup, ambient: &Subgroup) -> Vec<u32> {
    ambient
        .elements
        .par_iter()
        .copied()
        .filter(|&h| a.generators.iter().all(|&g| a.contains(group.conj(h, g))))
        .collect()
}

/// 2-subgroups of `ambient` up to conjugacy whose involutions all satisfy `good`.
pub fn two_subgroups_with(
    group: &Group,
    ambient: &Subgroup,
    max_order: usize,
    cap: usize,
    good: impl Fn(u32) -> bool + Sync,
) -> Result<Vec<Subgroup>> {
    layered_classes(
        group,
        ambient,
        max_order,
        cap,
        |a| normalizer(group, a, ambient),
        |a, x| {
            if !a.contains(group.mul(x, x)) {
                return false;
            }
            a.elements.iter().all(|&g| {
                let y = group.mul(x, g);
                !group.is_involution(y) || good(y)
            })
        },
    )
}
