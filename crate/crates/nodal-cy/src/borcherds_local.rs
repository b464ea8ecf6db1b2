//! Local Borcherds products at the standard 0-dimensional cusp: the parabolic data,
//! Heegner divisors H(S, d), their automorphy cocycles and the relations among them.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::linalg::{nullspace, rank};
use crate::scalars::{int, rat, rat_to_string, Rational};
use crate::{Error, Result};

/// The symmetric matrix ((h0, h1), (h1, h2)).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymMat2 {
    pub h: [Rational; 3],
}

impl SymMat2 {
    pub fn new(h0: Rational, h1: Rational, h2: Rational) -> Self {
        SymMat2 { h: [h0, h1, h2] }
    }

    pub fn from_ints(h0: i64, h1: i64, h2: i64) -> Self {
        SymMat2::new(int(h0), int(h1), int(h2))
    }

    pub fn zero() -> Self {
        SymMat2::from_ints(0, 0, 0)
    }

    pub fn e11() -> Self {
        SymMat2::from_ints(1, 0, 0)
    }

    pub fn e22() -> Self {
        SymMat2::from_ints(0, 0, 1)
    }

    pub fn trace(&self) -> Rational {
        &self.h[0] + &self.h[2]
    }

    pub fn det(&self) -> Rational {
        &self.h[0] * &self.h[2] - &self.h[1] * &self.h[1]
    }

    pub fn add(&self, o: &SymMat2) -> SymMat2 {
        SymMat2 { h: std::array::from_fn(|k| &self.h[k] + &o.h[k]) }
    }

    pub fn sub(&self, o: &SymMat2) -> SymMat2 {
        SymMat2 { h: std::array::from_fn(|k| &self.h[k] - &o.h[k]) }
    }

    pub fn scale(&self, c: &Rational) -> SymMat2 {
        SymMat2 { h: std::array::from_fn(|k| &self.h[k] * c) }
    }

    pub fn neg(&self) -> SymMat2 {
        self.scale(&int(-1))
    }

    pub fn is_zero(&self) -> bool {
        self.h.iter().all(Zero::is_zero)
    }

    /// sigma(self * o), the trace of the product.
    pub fn pairing(&self, o: &SymMat2) -> Rational {
        &self.h[0] * &o.h[0] + int(2) * &self.h[1] * &o.h[1] + &self.h[2] * &o.h[2]
    }

    /// U * self * U^t, also written self[tU].
    pub fn transform(&self, u: &[[Rational; 2]; 2]) -> SymMat2 {
        let m = [[&self.h[0], &self.h[1]], [&self.h[1], &self.h[2]]];
        let entry = |i: usize, j: usize| {
            let mut s = Rational::zero();
            for k in 0..2 {
                for l in 0..2 {
                    s += &u[i][k] * m[k][l] * &u[j][l];
                }
            }
            s
        };
        SymMat2::new(entry(0, 0), entry(0, 1), entry(1, 1))
    }

    pub fn max_abs(&self) -> Rational {
        self.h.iter().map(|x| x.abs()).max().expect("three entries")
    }

    /// (8 h0, 4 h1, 4 h2), integral exactly for members of the dual lattice.
    pub fn dual_coordinates(&self) -> [Rational; 3] {
        [&self.h[0] * int(8), &self.h[1] * int(4), &self.h[2] * int(4)]
    }

    pub fn to_strings(&self) -> [String; 3] {
        self.h.clone().map(|x| rat_to_string(&x))
    }
}

impl fmt::Debug for SymMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({}, {}), ({}, {}))", self.h[0], self.h[1], self.h[1], self.h[2])
    }
}

/// Membership in the dual of the translation lattice: 8h0, 4h1, 4h2 integral.
pub fn membership_t_star(h: &SymMat2) -> bool {
    h.dual_coordinates().iter().all(|x| x.is_integer())
}

/// Membership in the translation lattice: t0 = 0 mod 8, t1 = 0 mod 2, t2 = 0 mod 4.
pub fn membership_t(t: &SymMat2) -> bool {
    let ok = |x: &Rational, m: i64| x.is_integer() && (x.to_integer() % m).is_zero();
    ok(&t.h[0], 8) && ok(&t.h[1], 2) && ok(&t.h[2], 4)
}

/// +1 when the trace is non-negative, -1 otherwise.
pub fn epsilon(h: &SymMat2) -> i64 {
    if h.trace().is_negative() {
        -1
    } else {
        1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnimodularU {
    pub m: [[i64; 2]; 2],
}

impl fmt::Debug for UnimodularU {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({}, {}), ({}, {}))", self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1])
    }
}

impl UnimodularU {
    pub fn new(m: [[i64; 2]; 2]) -> Result<Self> {
        let u = UnimodularU { m };
        if u.det().abs() != 1 {
            return Err(Error::Precondition(format!("{u:?} is not unimodular")));
        }
        Ok(u)
    }

    pub fn identity() -> Self {
        UnimodularU { m: [[1, 0], [0, 1]] }
    }

    pub fn det(&self) -> i64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// The congruences b = 0 mod 2, c = 0 mod 4 of the linear parabolic part.
    pub fn in_u(&self) -> bool {
        self.det().abs() == 1 && self.m[0][1] % 2 == 0 && self.m[1][0] % 4 == 0
    }

    pub fn mul(&self, o: &UnimodularU) -> UnimodularU {
        let m = std::array::from_fn(|i| std::array::from_fn(|j| (0..2).map(|k| self.m[i][k] * o.m[k][j]).sum()));
        UnimodularU { m }
    }

    pub fn inverse(&self) -> UnimodularU {
        let d = self.det();
        let [[a, b], [c, e]] = self.m;
        UnimodularU { m: [[e * d, -b * d], [-c * d, a * d]] }
    }

    pub fn transpose(&self) -> UnimodularU {
        UnimodularU { m: [[self.m[0][0], self.m[1][0]], [self.m[0][1], self.m[1][1]]] }
    }

    pub fn rational(&self) -> [[Rational; 2]; 2] {
        self.m.map(|r| r.map(int))
    }

    pub fn act(&self, h: &SymMat2) -> SymMat2 {
        h.transform(&self.rational())
    }
}

/// V0, V1, V2, V3.
pub fn u_generators() -> [UnimodularU; 4] {
    [
        UnimodularU { m: [[1, 0], [0, -1]] },
        UnimodularU { m: [[1, 2], [0, 1]] },
        UnimodularU { m: [[1, 0], [4, 1]] },
        UnimodularU { m: [[3, 2], [4, 3]] },
    ]
}

pub const GENERATOR_NAMES: [&str; 4] = ["V0", "V1", "V2", "V3"];

#[derive(Clone, PartialEq, Eq)]
pub struct HeegnerData {
    pub s: SymMat2,
    pub d: Rational,
}

impl fmt::Debug for HeegnerData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S = {:?}, d = {}", self.s, self.d)
    }
}

impl HeegnerData {
    pub fn new(s: SymMat2, d: Rational) -> Result<Self> {
        if !s.det().is_negative() {
            return Err(Error::Precondition(format!("det S = {} is not negative", s.det())));
        }
        if !membership_t_star(&s) {
            return Err(Error::Precondition(format!("{s:?} is not in the dual lattice")));
        }
        Ok(HeegnerData { s, d })
    }

    /// Data of the locus a z0 + b z1 + c z2 = e, with S the primitive dual-lattice
    /// matrix satisfying sigma(Z S) = d on it.
    pub fn from_locus(a: Rational, b: Rational, c: Rational, e: Rational) -> Result<Self> {
        let raw = SymMat2::new(a, b / int(2), c);
        let coords = raw.dual_coordinates();
        let denom = coords.iter().fold(num_bigint::BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let numer = coords.iter().fold(num_bigint::BigInt::zero(), |acc, x| acc.gcd(&(x * &denom).to_integer()));
        if numer.is_zero() {
            return Err(Error::Precondition("the locus equation is trivial".into()));
        }
        let g = Rational::new(numer, denom);
        let scale = g.recip();
        HeegnerData::new(raw.scale(&scale), e * scale)
    }

    /// sigma(S T) over the translation lattice is g Z; returns g.
    fn translation_pairing_gcd(&self) -> Rational {
        let coords = self.s.dual_coordinates();
        let denom = coords.iter().fold(num_bigint::BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let numer = coords.iter().fold(num_bigint::BigInt::zero(), |acc, x| acc.gcd(&(x * &denom).to_integer()));
        Rational::new(numer, denom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum DivisorName {
    D1Plus,
    D1Minus,
    D2Plus,
    D2Minus,
    D3Plus,
    D3Minus,
}

impl DivisorName {
    pub const MINUS: [DivisorName; 3] = [DivisorName::D1Minus, DivisorName::D2Minus, DivisorName::D3Minus];
    pub const ALL: [DivisorName; 6] = [
        DivisorName::D1Plus,
        DivisorName::D1Minus,
        DivisorName::D2Plus,
        DivisorName::D2Minus,
        DivisorName::D3Plus,
        DivisorName::D3Minus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DivisorName::D1Plus => "D1+",
            DivisorName::D1Minus => "D1-",
            DivisorName::D2Plus => "D2+",
            DivisorName::D2Minus => "D2-",
            DivisorName::D3Plus => "D3+",
            DivisorName::D3Minus => "D3-",
        }
    }

    /// Linear locus (a, b, c, e) of a z0 + b z1 + c z2 = e near the cusp.
    pub fn locus(self) -> [i64; 4] {
        match self {
            DivisorName::D1Plus => [0, 2, 4, 1],
            DivisorName::D1Minus => [0, 2, 0, 1],
            DivisorName::D2Plus => [1, 3, 2, 1],
            DivisorName::D2Minus => [1, 1, 0, 1],
            DivisorName::D3Plus => [1, -4, 3, 0],
            DivisorName::D3Minus => [1, 0, -1, 0],
        }
    }
}

/// Heegner data of the six seed divisors, derived from their loci.
pub fn heegner_data() -> BTreeMap<DivisorName, HeegnerData> {
    DivisorName::ALL
        .iter()
        .map(|&n| {
            let [a, b, c, e] = n.locus();
            (n, HeegnerData::from_locus(int(a), int(b), int(c), int(e)).expect("valid locus"))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleValue {
    pub h_u: SymMat2,
    /// C_U as a rotation count in Q/Z.
    pub c_turns: Rational,
    pub flip_count: usize,
}

impl CocycleValue {
    pub fn eight_h(&self) -> SymMat2 {
        self.h_u.scale(&int(8))
    }

    /// The normalization in which the printed cusp tables are stated: 4 H_U.
    pub fn tabulated(&self) -> SymMat2 {
        self.h_u.scale(&int(4))
    }
}

type DualPoint = [i64; 3];

fn to_dual(h: &SymMat2) -> DualPoint {
    h.dual_coordinates().map(|x| i64::try_from(x.to_integer()).expect("dual coordinate fits in i64"))
}

fn from_dual(p: &DualPoint) -> SymMat2 {
    SymMat2::new(rat(p[0], 8), rat(p[1], 4), rat(p[2], 4))
}

/// V H V^t in dual coordinates (8 h0, 4 h1, 4 h2); integral for V in the parabolic group.
fn act_dual(v: &UnimodularU, p: &DualPoint) -> DualPoint {
    let [[a, b], [c, d]] = v.m;
    let [x, y, z] = *p;
    [
        a * a * x + 4 * a * b * y + 2 * b * b * z,
        (a * c * x) / 2 + (a * d + b * c) * y + b * d * z,
        (c * c * x) / 2 + 2 * c * d * y + d * d * z,
    ]
}

fn orbit_within(s: &SymMat2, bound: i64) -> Vec<DualPoint> {
    let mut moves: Vec<UnimodularU> = Vec::new();
    for v in u_generators() {
        moves.push(v);
        moves.push(v.inverse());
    }
    let limit = [8 * bound, 4 * bound, 4 * bound];
    let start = to_dual(s);
    let mut seen = rustc_hash::FxHashSet::default();
    seen.insert(start);
    let mut out = vec![start];
    let mut head = 0;
    while head < out.len() {
        for m in &moves {
            let y = act_dual(m, &out[head]);
            if (0..3).all(|k| y[k].abs() <= limit[k]) && seen.insert(y) {
                out.push(y);
            }
        }
        head += 1;
    }
    out
}

/// Sign of sigma(Y H) for a reference point Y; zero counts as +1.
pub fn epsilon_at(h: &SymMat2, y: &SymMat2) -> i64 {
    if h.pairing(y).is_negative() {
        -1
    } else {
        1
    }
}

fn flip_set_within(data: &HeegnerData, u: &UnimodularU, bound: i64, y: &SymMat2) -> Vec<SymMat2> {
    let u_inv = u.inverse();
    let y_dual = y.h.clone().map(|x| x * int(2));
    // sigma(Y H) * 8 with H in dual coordinates
    let sign = |p: &DualPoint| {
        let v = &y_dual[0] * int(p[0]) / int(2) + &y_dual[1] * int(2 * p[1]) + &y_dual[2] * int(p[2]);
        if v.is_negative() {
            -1
        } else {
            1
        }
    };
    let mut out: Vec<SymMat2> = orbit_within(&data.s, bound)
        .into_iter()
        .filter(|p| sign(p) != sign(&act_dual(&u_inv, p)))
        .map(|p| from_dual(&p))
        .collect();
    out.sort();
    out
}

/// The finite set of orbit members H = S[tV] whose sign flips under tU^-1.
pub fn flip_set(data: &HeegnerData, u: &UnimodularU, budget: u64) -> Result<Vec<SymMat2>> {
    flip_set_at(data, u, budget, &SymMat2::from_ints(1, 0, 1))
}

fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().expect("finite")
}

/// Entry bound for H with det H = det S and sigma(Y_t H) = 0 somewhere on the segment
/// from y to U^-t y U^-1: |h| <= sqrt(2 |det S| det Y_t) / lambda_min(Y_t).
fn flip_region_bound(data: &HeegnerData, u: &UnimodularU, y: &SymMat2) -> f64 {
    let y2 = u.inverse().transpose().act(y);
    let c = to_f64(&data.s.det()).abs();
    let (a, b) = (y.h.clone().map(|x| to_f64(&x)), y2.h.clone().map(|x| to_f64(&x)));
    let mut worst: f64 = 0.0;
    for k in 0..=4096 {
        let t = k as f64 / 4096.0;
        let m: [f64; 3] = std::array::from_fn(|i| t * a[i] + (1.0 - t) * b[i]);
        let det = m[0] * m[2] - m[1] * m[1];
        let half_tr = (m[0] + m[2]) / 2.0;
        let lambda_min = half_tr - (half_tr * half_tr - det).max(0.0).sqrt();
        worst = worst.max((2.0 * c * det).sqrt() / lambda_min);
    }
    worst
}

/// As `flip_set`, with signs taken against the reference point `y`. The orbit is searched
/// within an entry bound starting at twice the flip region bound, doubled until two
/// widenings change nothing.
pub fn flip_set_at(data: &HeegnerData, u: &UnimodularU, budget: u64, y: &SymMat2) -> Result<Vec<SymMat2>> {
    let start = (2.0 * flip_region_bound(data, u, y) * 1.01).ceil().max(4.0);
    if !start.is_finite() || start > budget as f64 {
        return Err(Error::BudgetExhausted(format!("flip region exceeds entry bound {budget}")));
    }
    let mut bound = start as i64;
    let mut previous = flip_set_within(data, u, bound, y);
    let mut stable = 0;
    while stable < 2 {
        bound *= 2;
        if bound > budget as i64 {
            return Err(Error::BudgetExhausted(format!("flip set not stable below entry bound {budget}")));
        }
        let next = flip_set_within(data, u, bound, y);
        if next == previous {
            stable += 1;
        } else {
            stable = 0;
        }
        previous = next;
    }
    Ok(previous)
}

pub const DEFAULT_FLIP_BUDGET: u64 = 1 << 12;

/// H_U = -sum eps(H) H and C_U = (-1)^#flips exp(2 pi i d sum eps(H)).
pub fn cocycle(data: &HeegnerData, u: &UnimodularU, budget: u64) -> Result<CocycleValue> {
    cocycle_at(data, u, budget, &SymMat2::from_ints(1, 0, 1))
}

pub fn cocycle_at(data: &HeegnerData, u: &UnimodularU, budget: u64, y: &SymMat2) -> Result<CocycleValue> {
    let flips = flip_set_at(data, u, budget, y)?;
    let mut h_u = SymMat2::zero();
    let mut eps_sum = 0i64;
    for h in &flips {
        let e = epsilon_at(h, y);
        eps_sum += e;
        h_u = h_u.sub(&h.scale(&int(e)));
    }
    let turns = rat(flips.len() as i64, 2) + &data.d * int(eps_sum);
    let c_turns = &turns - turns.floor();
    Ok(CocycleValue { h_u, c_turns, flip_count: flips.len() })
}

/// Cocycle of Z -> e(sigma(Z H0)): U H0 U^t - H0.
pub fn trivial_cocycle(h0: &SymMat2, u: &UnimodularU) -> SymMat2 {
    u.act(h0).sub(h0)
}

/// A cocycle evaluated on V0..V3.
pub type CocycleTuple = [SymMat2; 4];

pub fn tuple_vector(t: &CocycleTuple) -> Vec<Rational> {
    t.iter().flat_map(|m| m.h.iter().cloned()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationReport {
    /// Rank of the rows modulo the trivial span.
    pub rank: usize,
    /// Each relation: coefficients of the rows, then of the trivial tuples.
    pub relations: Vec<Vec<Rational>>,
}

pub fn relation_rank(rows: &[CocycleTuple], trivial_span: &[CocycleTuple]) -> RelationReport {
    let all: Vec<Vec<Rational>> = rows.iter().chain(trivial_span).map(tuple_vector).collect();
    let triv: Vec<Vec<Rational>> = trivial_span.iter().map(tuple_vector).collect();
    let r = rank(&all) - rank(&triv);
    let columns: Vec<Vec<Rational>> = (0..12).map(|c| all.iter().map(|v| v[c].clone()).collect()).collect();
    RelationReport { rank: r, relations: nullspace(&columns, all.len()) }
}

/// Tuple of tabulated values 4 H_U of a divisor over V0..V3.
pub fn tabulated_tuple(data: &HeegnerData, budget: u64) -> Result<CocycleTuple> {
    let gens = u_generators();
    let mut out: Vec<SymMat2> = Vec::with_capacity(4);
    for u in &gens {
        out.push(cocycle(data, u, budget)?.tabulated());
    }
    Ok(out.try_into().expect("four generators"))
}

pub fn trivial_tuple(h0: &SymMat2) -> CocycleTuple {
    u_generators().map(|u| trivial_cocycle(h0, &u))
}

/// Some U in the linear parabolic group of order two with S[tU] = -S, and 2d in
/// the pairing lattice of S with the translations (modulo 2).
pub fn is_ramified(data: &HeegnerData, budget: i64) -> Result<bool> {
    if budget < 1 {
        return Err(Error::BudgetExhausted("empty search range".into()));
    }
    let minus = data.s.neg();
    let mut flip_exists = false;
    'search: for a in -budget..=budget {
        for b in -budget..=budget {
            // U = ((a, b), (c, -a)) with a^2 + bc = 1 squares to the identity, det -1
            let candidates: Vec<i64> = if b == 0 {
                if a * a != 1 {
                    continue;
                }
                (-budget..=budget).collect()
            } else if (1 - a * a) % b == 0 {
                vec![(1 - a * a) / b]
            } else {
                continue;
            };
            for c in candidates {
                let u = UnimodularU { m: [[a, b], [c, -a]] };
                if c.abs() <= budget && u.in_u() && u.act(&data.s) == minus {
                    flip_exists = true;
                    break 'search;
                }
            }
        }
    }
    if !flip_exists {
        return Ok(false);
    }
    let g = data.translation_pairing_gcd();
    let step = if g.is_zero() { int(2) } else { gcd_rational(&g, &int(2)) };
    Ok((int(2) * &data.d / step).is_integer())
}

fn gcd_rational(x: &Rational, y: &Rational) -> Rational {
    let denom = x.denom().lcm(y.denom());
    let a = (x * Rational::from_integer(denom.clone())).to_integer();
    let b = (y * Rational::from_integer(denom.clone())).to_integer();
    Rational::new(a.gcd(&b), denom)
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleEntry {
    /// Row-major 2x2 matrix.
    #[serde(rename = "eightH")]
    pub eight_h: [i64; 4],
    #[serde(rename = "literalEightH")]
    pub literal_eight_h: [i64; 4],
    #[serde(rename = "C_turns")]
    pub c_turns: String,
}

fn matrix_entries(h: &SymMat2) -> Result<[i64; 4]> {
    let e = |r: &Rational| -> Result<i64> {
        if !r.is_integer() {
            return Err(Error::Consistency(format!("non-integral table entry {r}")));
        }
        r.to_integer().try_into().map_err(|_| Error::Consistency("table entry out of range".into()))
    };
    Ok([e(&h.h[0])?, e(&h.h[1])?, e(&h.h[1])?, e(&h.h[2])?])
}

/// divisor -> generator -> values; `eight_h` uses the tabulated normalization.
pub fn cocycle_report(budget: u64) -> Result<BTreeMap<&'static str, BTreeMap<&'static str, CocycleEntry>>> {
    let data = heegner_data();
    let mut out = BTreeMap::new();
    for name in DivisorName::ALL {
        let mut row = BTreeMap::new();
        for (u, label) in u_generators().iter().zip(GENERATOR_NAMES) {
            let c = cocycle(&data[&name], u, budget)?;
            row.insert(
                label,
                CocycleEntry {
                    eight_h: matrix_entries(&c.tabulated())?,
                    literal_eight_h: matrix_entries(&c.eight_h())?,
                    c_turns: rat_to_string(&c.c_turns),
                },
            );
        }
        out.insert(name.label(), row);
    }
    Ok(out)
}
