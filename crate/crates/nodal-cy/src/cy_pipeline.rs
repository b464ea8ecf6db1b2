//! Per-subgroup verdicts and invariants of Calabi-Yau quotients: free action, the
//! weak and projective resolution criteria, stringy Euler numbers and Hodge numbers.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::fixed_loci::{
    common_fixed, fixed_locus, fixed_point_free, resolution_euler, transform_key, ComponentKind, CurveKey, FixedLocus,
};
use crate::group_engine::{
    conjugacy_class, elementary_abelian_2_subgroups, two_subgroups_with, Subgroup,
};
use crate::model::Model;
use crate::threefold::{sigma_a, NODE_COUNT};
use crate::{Error, Result};

/// Euler number of a small resolution of the threefold.
pub const BASE_EULER: i64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Ambient {
    G,
    H,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FixedStats {
    /// Elements with nonempty fixed set.
    pub elements_with_fixed_points: usize,
    /// G-classes of pointwise fixed curves.
    pub curve_classes: usize,
    /// G-classes of nodes that are isolated fixed points of some element.
    pub isolated_node_classes: usize,
    /// Classes of isolated smooth fixed points (elements of order three).
    pub point_classes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubgroupReport {
    pub generators: Vec<String>,
    pub order: usize,
    pub acts_freely: bool,
    pub weak_cy: bool,
    pub projective: bool,
    pub invariant_dimension: usize,
    pub h11: Option<i64>,
    pub h12: Option<i64>,
    pub euler: Option<i64>,
    pub fixed_summary: FixedStats,
    /// (node, basic divisor) pairs certifying projectivity.
    pub witnesses: Vec<(usize, usize)>,
}

impl SubgroupReport {
    pub fn is_complete(&self) -> bool {
        self.h11.is_some() && self.h12.is_some() && self.euler.is_some()
    }
}

struct Invariants {
    h11: i64,
    euler: i64,
    stats: FixedStats,
}

pub struct Pipeline<'m> {
    pub model: &'m Model,
    sigma_a_mask: Vec<bool>,
    loci: Mutex<FxHashMap<u32, Arc<FixedLocus>>>,
    pairs: Mutex<FxHashMap<[u32; 3], Arc<FixedLocus>>>,
    free: Mutex<FxHashMap<u32, bool>>,
}

impl<'m> Pipeline<'m> {
    pub fn new(model: &'m Model, ambient: Ambient) -> Result<Pipeline<'m>> {
        let g = &model.group;
        let sa = g.require_id(&sigma_a())?;
        let amb = match ambient {
            Ambient::G => g.all(),
            Ambient::H => model.h.clone(),
        };
        let mut mask = vec![false; g.order()];
        for x in conjugacy_class(g, sa, &amb)? {
            mask[x as usize] = true;
        }
        Ok(Pipeline {
            model,
            sigma_a_mask: mask,
            loci: Mutex::new(FxHashMap::default()),
            pairs: Mutex::new(FxHashMap::default()),
            free: Mutex::new(FxHashMap::default()),
        })
    }

    pub fn locus(&self, g: u32) -> Result<Arc<FixedLocus>> {
        if let Some(l) = self.loci.lock().expect("lock").get(&g) {
            return Ok(l.clone());
        }
        let l = Arc::new(fixed_locus(&self.model.group, &self.model.nodes, g)?);
        self.loci.lock().expect("lock").insert(g, l.clone());
        Ok(l)
    }

    pub fn pair_locus(&self, a: u32, b: u32) -> Result<Arc<FixedLocus>> {
        let mut key = [a, b, self.model.group.mul(a, b)];
        key.sort_unstable();
        if let Some(l) = self.pairs.lock().expect("lock").get(&key) {
            return Ok(l.clone());
        }
        let l = Arc::new(common_fixed(&self.model.group, &self.model.nodes, &[a, b])?);
        self.pairs.lock().expect("lock").insert(key, l.clone());
        Ok(l)
    }

    pub fn element_is_free(&self, g: u32) -> Result<bool> {
        if let Some(&f) = self.free.lock().expect("lock").get(&g) {
            return Ok(f);
        }
        let f = fixed_point_free(&self.model.group, g)?;
        self.free.lock().expect("lock").insert(g, f);
        Ok(f)
    }

    pub fn is_free(&self, sub: &Subgroup) -> Result<bool> {
        let g = &self.model.group;
        for &x in &sub.elements {
            let n = g.order_of(x);
            if n > 1 && (2..n).all(|d| n % d != 0) && !self.element_is_free(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn node_classes(&self, sub: &Subgroup) -> (Vec<usize>, Vec<usize>) {
        self.model.nodes.node_classes(sub, &self.sigma_a_mask)
    }

    pub fn weak_cy_test(&self, sub: &Subgroup) -> bool {
        let (a, b) = self.node_classes(sub);
        let mut covered = [false; NODE_COUNT];
        for x in a.into_iter().chain(b) {
            covered[x] = true;
        }
        covered.iter().all(|&c| c)
    }

    pub fn invariant_dimension(&self, sub: &Subgroup) -> usize {
        self.model.classes.invariant_dimension(&self.model.divisors, sub)
    }

    fn curve_orbits(&self, keys: BTreeSet<CurveKey>, acting: &Subgroup) -> usize {
        let g = &self.model.group;
        let mut seen: BTreeSet<CurveKey> = BTreeSet::new();
        let mut orbits = 0;
        for k in keys {
            if seen.contains(&k) {
                continue;
            }
            orbits += 1;
            for &x in &acting.elements {
                seen.insert(transform_key(&k, g.element(x).lift()));
            }
        }
        orbits
    }

    fn node_orbits(&self, nodes: &BTreeSet<usize>, acting: &Subgroup) -> usize {
        let mut seen = FxHashSet::default();
        let mut orbits = 0;
        for &a in nodes {
            if seen.contains(&a) {
                continue;
            }
            orbits += 1;
            for &x in &acting.elements {
                seen.insert(self.model.nodes.image(x, a));
            }
        }
        orbits
    }

    fn elementary_abelian_invariants(&self, sub: &Subgroup) -> Result<Invariants> {
        let g = &self.model.group;
        let invols: Vec<u32> = sub.elements.iter().copied().filter(|&x| x != 0).collect();
        let loci: Vec<Arc<FixedLocus>> = invols.iter().map(|&x| self.locus(x)).collect::<Result<_>>()?;
        let mut keys = BTreeSet::new();
        let mut isolated = BTreeSet::new();
        let mut sum_g = 0i64;
        for l in &loci {
            keys.extend(l.curve_keys());
            isolated.extend(l.isolated_nodes.iter().copied());
            sum_g += resolution_euler(l, &|_| true);
        }
        let mut sum_v = 0i64;
        for (i, &a) in invols.iter().enumerate() {
            for &b in &invols[i + 1..] {
                let c = g.mul(a, b);
                // each Klein subgroup once, from its two smallest elements
                if c < b {
                    continue;
                }
                let l = self.pair_locus(a, b)?;
                let iso = |n: usize| [a, b, c].iter().any(|&x| self.locus(x).map(|l| l.isolated_nodes.contains(&n)).unwrap_or(false));
                sum_v += resolution_euler(&l, &iso);
            }
        }
        let total = BASE_EULER + 3 * sum_g + 6 * sum_v;
        let order = sub.order() as i64;
        if total % order != 0 {
            return Err(Error::Consistency(format!("stringy sum {total} not divisible by {order}")));
        }
        let stats = FixedStats {
            elements_with_fixed_points: loci.iter().filter(|l| !l.is_empty()).count(),
            curve_classes: self.curve_orbits(keys, sub),
            isolated_node_classes: self.node_orbits(&isolated, sub),
            point_classes: 0,
        };
        let h11 = (self.invariant_dimension(sub) + stats.curve_classes + stats.isolated_node_classes) as i64;
        Ok(Invariants { h11, euler: total / order, stats })
    }

    /// Invariants of X/K computed in two steps, X/N with N free and normal of prime
    /// index p in K, then the residual cyclic group of order p acting on X/N.
    pub fn quotient_stage(&self, base: &Subgroup, ext: &Subgroup) -> Result<SubgroupReport> {
        if !base.is_subgroup_of(ext) {
            return Err(Error::Precondition("base group is not contained in the extension".into()));
        }
        if !self.is_free(base)? {
            return Err(Error::Precondition("base group does not act freely".into()));
        }
        let p = ext.order() / base.order();
        if ext.order() % base.order() != 0 || p < 2 || !(2..p).all(|d| p % d != 0) {
            return Err(Error::Precondition(format!("index {p} is not prime")));
        }
        let inv = self.stage_invariants(base, ext, p)?;
        self.finish(ext, Some(inv))
    }

    fn stage_invariants(&self, base: &Subgroup, ext: &Subgroup, p: usize) -> Result<Invariants> {
        let g = &self.model.group;
        let n = base.order() as i64;
        if p == 1 {
            return Ok(Invariants {
                h11: self.invariant_dimension(ext) as i64,
                euler: BASE_EULER / n,
                stats: FixedStats::default(),
            });
        }
        let k = *ext.elements.iter().find(|&&x| !base.contains(x)).expect("index > 1");
        let mut coset_e = 0i64;
        let mut keys = BTreeSet::new();
        let mut nodes = BTreeSet::new();
        let mut points = 0usize;
        let mut with_fixed = 0usize;
        // every non-trivial coset of the residual cyclic group
        let mut cosets = Vec::new();
        let mut c = k;
        for _ in 1..p {
            cosets.push(c);
            c = g.mul(c, k);
        }
        for (j, &rep) in cosets.iter().enumerate() {
            for &h in &base.elements {
                let x = g.mul(rep, h);
                if self.element_is_free(x)? {
                    continue;
                }
                let l = self.locus(x)?;
                with_fixed += 1;
                if j == 0 {
                    coset_e += resolution_euler(&l, &|_| true);
                }
                if p == 2 {
                    nodes.extend(l.isolated_nodes.iter().copied());
                } else if !l.nodes.is_empty() {
                    return Err(Error::Unsupported("residual element of odd order fixes a node".into()));
                }
                keys.extend(l.curve_keys());
                points += l.count(ComponentKind::SmoothPoint);
            }
        }
        if coset_e % n != 0 || points % (n as usize * (p - 1)) != 0 {
            return Err(Error::Consistency("fixed data not compatible with a free base action".into()));
        }
        let residual_e = coset_e / n;
        let base_e = BASE_EULER / n;
        let pi = p as i64;
        let total = base_e + (pi * pi - 1) * residual_e;
        if total % pi != 0 {
            return Err(Error::Consistency(format!("stage sum {total} not divisible by {p}")));
        }
        // curves fixed by the residual generator; its powers fix the same ones
        let curve_classes = self.curve_orbits(keys, ext);
        let point_classes = points / (n as usize * (p - 1));
        let node_classes = self.node_orbits(&nodes, ext);
        let stats = FixedStats {
            elements_with_fixed_points: with_fixed,
            curve_classes,
            isolated_node_classes: node_classes,
            point_classes,
        };
        let h11 = (self.invariant_dimension(ext) + (p - 1) * curve_classes + point_classes + node_classes) as i64;
        Ok(Invariants { h11, euler: total / pi, stats })
    }

    /// Free normal subgroups of prime index, as kernels of maps onto Z/p.
    fn free_prime_index_subgroups(&self, sub: &Subgroup) -> Result<Vec<Subgroup>> {
        let g = &self.model.group;
        let order = sub.order();
        let mut out = Vec::new();
        for p in [2usize, 3] {
            if order % p != 0 {
                continue;
            }
            let mut gens: Vec<u32> = sub.elements.iter().map(|&x| {
                let mut y = 0;
                for _ in 0..p {
                    y = g.mul(y, x);
                }
                y
            }).collect();
            for &a in &sub.generators {
                for &b in &sub.generators {
                    gens.push(g.mul(g.mul(a, b), g.mul(g.inv(a), g.inv(b))));
                }
            }
            gens.sort_unstable();
            gens.dedup();
            let frattini = Subgroup::generate(g, &gens);
            // hyperplanes through the Frattini-type subgroup: maximal subgroups containing it
            let mut seen: FxHashSet<Vec<u32>> = FxHashSet::default();
            seen.insert(frattini.elements.clone());
            let mut stack = vec![frattini];
            while let Some(m) = stack.pop() {
                if m.order() * p == order {
                    if self.is_free(&m)? {
                        out.push(m);
                    }
                    continue;
                }
                for &x in &sub.elements {
                    if m.contains(x) {
                        continue;
                    }
                    let mut ge = m.generators.clone();
                    ge.push(x);
                    let bigger = Subgroup::generate(g, &ge);
                    if bigger.order() < order && seen.insert(bigger.elements.clone()) {
                        stack.push(bigger);
                    }
                }
            }
        }
        Ok(out)
    }

    fn invariants(&self, sub: &Subgroup, free: bool) -> Result<Option<Invariants>> {
        let g = &self.model.group;
        if free {
            let n = sub.order() as i64;
            return Ok(Some(Invariants {
                h11: self.invariant_dimension(sub) as i64,
                euler: BASE_EULER / n,
                stats: FixedStats::default(),
            }));
        }
        if sub.is_elementary_abelian_2(g) {
            return self.elementary_abelian_invariants(sub).map(Some);
        }
        for base in self.free_prime_index_subgroups(sub)? {
            let p = sub.order() / base.order();
            match self.stage_invariants(&base, sub, p) {
                Ok(inv) => return Ok(Some(inv)),
                Err(Error::Unsupported(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(None)
    }

    fn finish(&self, sub: &Subgroup, inv: Option<Invariants>) -> Result<SubgroupReport> {
        let g = &self.model.group;
        let acts_freely = self.is_free(sub)?;
        let weak_cy = self.weak_cy_test(sub);
        let (a, b) = self.node_classes(sub);
        let (projective, witnesses) = if weak_cy {
            let r = self.model.classes.projectivity_test(&self.model.divisors, sub, &a, &b)?;
            (r.projective, r.witnesses)
        } else {
            (false, Vec::new())
        };
        let mut report = SubgroupReport {
            generators: sub.generators.iter().map(|&x| g.element(x).notation()).collect(),
            order: sub.order(),
            acts_freely,
            weak_cy,
            projective,
            invariant_dimension: self.invariant_dimension(sub),
            h11: None,
            h12: None,
            euler: None,
            fixed_summary: FixedStats::default(),
            witnesses,
        };
        if let Some(inv) = inv {
            if inv.euler % 2 != 0 {
                return Err(Error::Consistency(format!("odd Euler number {}", inv.euler)));
            }
            report.h11 = Some(inv.h11);
            report.h12 = Some(inv.h11 - inv.euler / 2);
            report.euler = Some(inv.euler);
            report.fixed_summary = inv.stats;
        }
        Ok(report)
    }

    /// Full report; Hodge numbers are filled in for free groups, elementary abelian
    /// 2-groups, and extensions of a free group by a cyclic group of prime order.
    pub fn report(&self, sub: &Subgroup) -> Result<SubgroupReport> {
        let h = &self.model.h;
        if !sub.is_subgroup_of(h) {
            return Err(Error::Precondition("group is not contained in the index-two subgroup".into()));
        }
        let free = self.is_free(sub)?;
        let inv = if self.weak_cy_test(sub) { self.invariants(sub, free)? } else { None };
        self.finish(sub, inv)
    }

    pub fn stringy_euler(&self, sub: &Subgroup) -> Result<i64> {
        self.report(sub)?.euler.ok_or_else(|| Error::Unsupported("no fixed-locus data for this group shape".into()))
    }

    pub fn divisor_class_number(&self, sub: &Subgroup) -> Result<i64> {
        self.report(sub)?.h11.ok_or_else(|| Error::Unsupported("no fixed-locus data for this group shape".into()))
    }

    pub fn hodge_pair(&self, sub: &Subgroup) -> Result<(i64, i64)> {
        let r = self.report(sub)?;
        match (r.h11, r.h12) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Unsupported("no fixed-locus data for this group shape".into())),
        }
    }

    /// Elementary abelian 2-subgroups with abelian preimage in the matrix group, up to
    /// conjugacy.
    pub fn elementary_abelian_census(&self, cap: usize) -> Result<Census> {
        let classes: Vec<Subgroup> = elementary_abelian_2_subgroups(&self.model.group, &self.model.h, cap)?
            .into_iter()
            .filter(|s| lifts_commute(&self.model.group, s))
            .collect();
        let reports: Vec<SubgroupReport> = classes.par_iter().map(|s| self.report(s)).collect::<Result<_>>()?;
        Ok(Census::new(reports))
    }

    /// Freely acting subgroups up to conjugacy, of order at most `max_order`.
    pub fn free_census(&self, max_order: usize, cap: usize) -> Result<Census> {
        let g = &self.model.group;
        let invols = self.model.h.involutions(g);
        let free_invols: FxHashSet<u32> = invols
            .par_iter()
            .map(|&x| self.element_is_free(x).map(|f| (x, f)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|p| p.1)
            .map(|p| p.0)
            .collect();
        let classes = two_subgroups_with(g, &self.model.h, max_order, cap, |x| free_invols.contains(&x))?;
        let reports: Vec<SubgroupReport> = classes.par_iter().map(|s| self.report(s)).collect::<Result<_>>()?;
        Ok(Census::new(reports))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Census {
    pub reports: Vec<SubgroupReport>,
}

impl Census {
    fn new(mut reports: Vec<SubgroupReport>) -> Census {
        reports.sort_by(|a, b| a.order.cmp(&b.order).then_with(|| a.generators.cmp(&b.generators)));
        Census { reports }
    }

    pub fn projective_count(&self) -> usize {
        self.reports.iter().filter(|r| r.projective).count()
    }

    /// Distinct (divisor class number, Euler number) pairs over weak models.
    pub fn class_euler_pairs(&self) -> BTreeSet<(i64, i64)> {
        self.reports
            .iter()
            .filter(|r| r.weak_cy)
            .filter_map(|r| Some((r.h11?, r.euler?)))
            .collect()
    }

    /// Distinct Hodge pairs over projective models.
    pub fn hodge_pairs(&self) -> BTreeSet<(i64, i64)> {
        self.reports.iter().filter(|r| r.projective).filter_map(|r| Some((r.h11?, r.h12?))).collect()
    }

    /// Per order: (classes, projective classes).
    pub fn by_order(&self) -> BTreeMap<usize, (usize, usize)> {
        let mut m = BTreeMap::new();
        for r in &self.reports {
            let e = m.entry(r.order).or_insert((0, 0));
            e.0 += 1;
            e.1 += r.projective as usize;
        }
        m
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("order,cl,e,h11,h12,free,weak_cy,projective\n");
        let opt = |x: Option<i64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.reports {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.order,
                opt(r.h11),
                opt(r.euler),
                opt(r.h11),
                opt(r.h12),
                r.acts_freely,
                r.weak_cy,
                r.projective
            ));
        }
        s
    }
}

/// Whether lifts of the generators commute as matrices, i.e. the preimage of the
/// subgroup in the matrix group is abelian.
pub fn lifts_commute(group: &crate::group_engine::Group, sub: &Subgroup) -> bool {
    let lifts: Vec<_> = sub.generators.iter().map(|&x| *group.element(x).lift()).collect();
    lifts.iter().enumerate().all(|(i, a)| lifts[i + 1..].iter().all(|b| a.compose(b) == b.compose(a)))
}
