//! Genus-2 theta constants with a certified truncation bound, and numeric checks of
//! the modular coordinates, the divisor loci near the standard cusp and the cusp value.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::f64::consts::PI;

use crate::threefold::defining_quadrics;
use crate::{Error, Result};

/// Characteristic [a1 a2; b1 b2]; entries are normally 0 or 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaCharacteristic {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl ThetaCharacteristic {
    pub const fn new(a: [u8; 2], b: [u8; 2]) -> Self {
        ThetaCharacteristic { a: [a[0] as f64, a[1] as f64], b: [b[0] as f64, b[1] as f64] }
    }
}

/// Point of the Siegel upper half space of degree 2, Z = ((z0, z1), (z1, z2)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SiegelPoint {
    pub z: [(f64, f64); 3],
}

impl SiegelPoint {
    pub fn new(z0: Complex64, z1: Complex64, z2: Complex64) -> Result<Self> {
        let p = SiegelPoint { z: [(z0.re, z0.im), (z1.re, z1.im), (z2.re, z2.im)] };
        if p.min_imag_eigenvalue() <= 0.0 {
            return Err(Error::Precondition(format!("Im Z is not positive definite at {p:?}")));
        }
        Ok(p)
    }

    pub fn entries(&self) -> [Complex64; 3] {
        self.z.map(|(re, im)| Complex64::new(re, im))
    }

    pub fn min_imag_eigenvalue(&self) -> f64 {
        let [(_, a), (_, b), (_, c)] = self.z;
        let half_tr = (a + c) / 2.0;
        half_tr - (half_tr * half_tr - (a * c - b * b)).max(0.0).sqrt()
    }

    pub fn scaled(&self, s: f64) -> SiegelPoint {
        SiegelPoint { z: self.z.map(|(re, im)| (re * s, im * s)) }
    }

    pub fn translated(&self, t: [f64; 3]) -> SiegelPoint {
        let mut z = self.z;
        for k in 0..3 {
            z[k].0 += t[k];
        }
        SiegelPoint { z }
    }

    pub fn identity_times_i() -> SiegelPoint {
        SiegelPoint { z: [(0.0, 1.0), (0.0, 0.0), (0.0, 1.0)] }
    }
}

/// Upper bound for the sum of |terms| with sup-norm |g| > n, given Im Z >= lambda.
fn tail_bound(lambda: f64, n: i64) -> f64 {
    let mut total = 0.0;
    let mut k = n + 1;
    loop {
        let r = k as f64 - 0.5;
        let term = 8.0 * k as f64 * (-PI * lambda * r * r).exp();
        total += term;
        if term < 1e-300 || term < total * 1e-18 {
            // remaining terms decay faster than a geometric series of ratio 1/2
            return total + term;
        }
        k += 1;
    }
}

/// Smallest radius whose tail bound is below tol.
pub fn truncation_radius(lambda: f64, tol: f64) -> i64 {
    let mut n = 1;
    while tail_bound(lambda, n) > tol {
        n += 1;
    }
    n
}

/// theta[a; b](s Z) = sum_g exp(pi i ((sZ)[g + a/2] + b.(g + a/2))), with |error| <= tol.
pub fn theta(ch: &ThetaCharacteristic, z: &SiegelPoint, scale: f64, tol: f64) -> Result<Complex64> {
    if tol <= 0.0 {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    let w = z.scaled(scale);
    let lambda = w.min_imag_eigenvalue();
    if lambda <= 0.0 {
        return Err(Error::Precondition(format!("Im Z is not positive definite at {z:?}")));
    }
    let n = truncation_radius(lambda, tol);
    let [z0, z1, z2] = w.entries();
    let mut sum = Complex64::new(0.0, 0.0);
    for g1 in -n..=n {
        let x = g1 as f64 + ch.a[0] / 2.0;
        for g2 in -n..=n {
            let y = g2 as f64 + ch.a[1] / 2.0;
            let q = z0 * x * x + z1 * (2.0 * x * y) + z2 * y * y + ch.b[0] * x + ch.b[1] * y;
            sum += (Complex64::i() * PI * q).exp();
        }
    }
    Ok(sum)
}

/// One-variable theta[a; b](z) = sum_n exp(pi i (z (n + a/2)^2 + b (n + a/2))).
pub fn theta1(a: f64, b: f64, z: Complex64, tol: f64) -> Result<Complex64> {
    if z.im <= 0.0 {
        return Err(Error::Precondition(format!("{z} is not in the upper half plane")));
    }
    let mut n = 1i64;
    while 4.0 * (-PI * z.im * (n as f64 - 0.5).powi(2)).exp() / (1.0 - (-PI * z.im).exp()) > tol {
        n += 1;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for g in -n..=n {
        let x = g as f64 + a / 2.0;
        sum += (Complex64::i() * PI * (z * x * x + b * x)).exp();
    }
    Ok(sum)
}

const EVEN: [[u8; 2]; 4] = [[0, 0], [1, 0], [0, 1], [1, 1]];

/// (Y0..Y3, X0..X3) = (theta[00; b](Z), theta[a; 00](2Z)).
pub fn coordinates(z: &SiegelPoint, tol: f64) -> Result<[Complex64; 8]> {
    let mut out = [Complex64::new(0.0, 0.0); 8];
    for (k, b) in EVEN.iter().enumerate() {
        out[k] = theta(&ThetaCharacteristic::new([0, 0], *b), z, 1.0, tol)?;
        out[4 + k] = theta(&ThetaCharacteristic::new(*b, [0, 0]), z, 2.0, tol)?;
    }
    Ok(out)
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Residuals of the four quadrics at v, relative to |v|^2.
pub fn quadric_residuals(v: &[Complex64; 8]) -> Vec<f64> {
    let scale = max_abs(v).powi(2);
    defining_quadrics()
        .iter()
        .map(|f| {
            let mut s = Complex64::new(0.0, 0.0);
            for (e, c) in f.terms() {
                let mut t = c.to_complex();
                for (k, &p) in e.iter().enumerate() {
                    t *= v[k].powu(p as u32);
                }
                s += t;
            }
            s.norm() / scale
        })
        .collect()
}

pub fn verify_variety_relations(z: &SiegelPoint, tol: f64) -> Result<f64> {
    let v = coordinates(z, tol * 1e-3)?;
    Ok(quadric_residuals(&v).into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LocusDivisor {
    D1Plus,
    D1Minus,
    D2Plus,
    D2Minus,
    D3Plus,
    D3Minus,
}

impl LocusDivisor {
    pub const ALL: [LocusDivisor; 6] = [
        LocusDivisor::D1Plus,
        LocusDivisor::D1Minus,
        LocusDivisor::D2Plus,
        LocusDivisor::D2Minus,
        LocusDivisor::D3Plus,
        LocusDivisor::D3Minus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            LocusDivisor::D1Plus => "D1+",
            LocusDivisor::D1Minus => "D1-",
            LocusDivisor::D2Plus => "D2+",
            LocusDivisor::D2Minus => "D2-",
            LocusDivisor::D3Plus => "D3+",
            LocusDivisor::D3Minus => "D3-",
        }
    }

    /// (a, b, c, e) for the locus a z0 + b z1 + c z2 = e.
    pub fn locus(self) -> [f64; 4] {
        match self {
            LocusDivisor::D1Plus => [0.0, 2.0, 4.0, 1.0],
            LocusDivisor::D1Minus => [0.0, 2.0, 0.0, 1.0],
            LocusDivisor::D2Plus => [1.0, 3.0, 2.0, 1.0],
            LocusDivisor::D2Minus => [1.0, 1.0, 0.0, 1.0],
            LocusDivisor::D3Plus => [1.0, -4.0, 3.0, 0.0],
            LocusDivisor::D3Minus => [1.0, 0.0, -1.0, 0.0],
        }
    }

    fn sign(self) -> f64 {
        match self {
            LocusDivisor::D1Plus | LocusDivisor::D2Plus | LocusDivisor::D3Plus => 1.0,
            _ => -1.0,
        }
    }
}

/// The two theta expressions cutting out the divisor, normalized by the size of their terms.
pub fn divisor_expressions(d: LocusDivisor, z: &SiegelPoint, tol: f64) -> Result<[f64; 2]> {
    let ch = ThetaCharacteristic::new;
    let t = |c: ThetaCharacteristic, s: f64| theta(&c, z, s, tol);
    let s = d.sign();
    let rel = |x: Complex64, y: Complex64| (x + y * s).norm() / x.norm().max(y.norm()).max(1e-300);
    Ok(match d {
        LocusDivisor::D1Plus | LocusDivisor::D1Minus => {
            let a = t(ch([1, 1], [0, 0]), 2.0)?;
            let x0 = t(ch([0, 0], [0, 0]), 2.0)?;
            [a.norm() / x0.norm(), rel(t(ch([1, 0], [0, 0]), 1.0)?, t(ch([1, 0], [0, 1]), 1.0)?)]
        }
        LocusDivisor::D2Plus | LocusDivisor::D2Minus => {
            let a = t(ch([0, 1], [0, 0]), 1.0)?;
            let y0 = t(ch([0, 0], [0, 0]), 1.0)?;
            let p = t(ch([0, 0], [0, 0]), 1.0)? * t(ch([1, 0], [0, 0]), 1.0)?;
            let q = t(ch([0, 0], [0, 1]), 1.0)? * t(ch([1, 0], [0, 1]), 1.0)?;
            [a.norm() / y0.norm(), rel(p, q)]
        }
        LocusDivisor::D3Plus | LocusDivisor::D3Minus => {
            let x1 = t(ch([1, 0], [0, 0]), 2.0)?;
            let x2 = t(ch([0, 1], [0, 0]), 2.0)?;
            let ab = t(ch([1, 0], [0, 0]), 1.0)? * t(ch([0, 0], [1, 0]), 0.5)?;
            let cd = t(ch([0, 0], [0, 1]), 1.0)? * t(ch([1, 0], [0, 1]), 1.0)?;
            [(x1 - x2).norm() / x1.norm().max(x2.norm()), rel(ab, cd)]
        }
    })
}

/// Whether z satisfies the linear locus equation of d to within 1e-12.
pub fn on_locus(d: LocusDivisor, z: &SiegelPoint) -> bool {
    let [a, b, c, e] = d.locus();
    let [z0, z1, z2] = z.entries();
    (z0 * a + z1 * b + z2 * c - e).norm() < 1e-12
}

pub fn verify_divisor_locus(d: LocusDivisor, z: &SiegelPoint, tol: f64) -> Result<bool> {
    let r = divisor_expressions(d, z, tol * 1e-3)?;
    Ok(r.iter().all(|&x| x <= tol))
}

/// Residual of theta[1/2;0](2z) theta[0;1](z) = e^{-pi i/4} theta[0;1](2z) theta[1/2;1](2z).
pub fn exercise_residual(z: Complex64, tol: f64, with_phase: bool) -> Result<f64> {
    let t = tol * 1e-3;
    let lhs = theta1(0.5, 0.0, z * 2.0, t)? * theta1(0.0, 1.0, z, t)?;
    let phase = if with_phase { Complex64::from_polar(1.0, -PI / 4.0) } else { Complex64::new(1.0, 0.0) };
    let rhs = phase * theta1(0.0, 1.0, z * 2.0, t)? * theta1(0.5, 1.0, z * 2.0, t)?;
    Ok((lhs - rhs).norm())
}

pub fn verify_exercise_identity(z: Complex64, tol: f64) -> Result<bool> {
    Ok(exercise_residual(z, tol, true)? <= tol)
}

/// The standard node in coordinate order: (sqrt2, 0, sqrt2, 0, 1, 1, 0, 0).
pub fn standard_node_vector() -> [f64; 8] {
    let r = std::f64::consts::SQRT_2;
    [r, 0.0, r, 0.0, 1.0, 1.0, 0.0, 0.0]
}

/// Distance of the theta vector at diag(i/t, it), scaled so X0 = 1, from the standard node.
pub fn cusp_limit_error(t: f64, tol: f64) -> Result<f64> {
    let z = SiegelPoint::new(Complex64::new(0.0, 1.0 / t), Complex64::new(0.0, 0.0), Complex64::new(0.0, t))?;
    let v = coordinates(&z, tol)?;
    let eta = standard_node_vector();
    Ok(v.iter().zip(eta).map(|(x, e)| (x / v[4] - e).norm()).fold(0.0, f64::max))
}

/// Random point with min eigenvalue of Im Z at least `min_eig`.
pub fn random_point(rng: &mut StdRng, min_eig: f64) -> SiegelPoint {
    loop {
        let z0 = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0));
        let z1 = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.4..0.4));
        let z2 = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0));
        if let Ok(p) = SiegelPoint::new(z0, z1, z2) {
            if p.min_imag_eigenvalue() >= min_eig {
                return p;
            }
        }
    }
}

/// Random point on the locus of d, solving the equation for z1 (or z0 when b = 0).
pub fn random_locus_point(d: LocusDivisor, rng: &mut StdRng, min_eig: f64) -> SiegelPoint {
    let [a, b, c, e] = d.locus();
    loop {
        let mut z = [0usize; 3].map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..8.0)));
        z[1] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5));
        if b != 0.0 {
            z[1] = (Complex64::new(e, 0.0) - z[0] * a - z[2] * c) / b;
        } else {
            z[0] = (Complex64::new(e, 0.0) - z[1] * b - z[2] * c) / a;
        }
        if let Ok(p) = SiegelPoint::new(z[0], z[1], z[2]) {
            if p.min_imag_eigenvalue() >= min_eig {
                return p;
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub sample: Vec<(f64, f64)>,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// All theta checks at `samples` random points each; negative controls are expected to fail
/// and are recorded with `pass` meaning "behaved as expected".
pub fn verification_report(seed: u64, samples: usize, tol: f64) -> Result<Vec<CheckRecord>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut push = |check: String, z: &SiegelPoint, residual: f64, pass: bool| {
        out.push(CheckRecord { check, sample: z.z.to_vec(), residual, tol, pass });
    };
    for _ in 0..samples {
        let z = random_point(&mut rng, 0.3);
        let r = verify_variety_relations(&z, tol)?;
        push("variety_relations".into(), &z, r, r <= tol);
        let mut v = coordinates(&z, tol * 1e-3)?;
        v[0] *= 1.0 + 1e-3;
        let r = quadric_residuals(&v).into_iter().fold(0.0, f64::max);
        push("variety_relations_perturbed_fails".into(), &z, r, r > tol);
    }
    let z = SiegelPoint::identity_times_i();
    let r = verify_variety_relations(&z, tol)?;
    push("variety_relations_at_i".into(), &z, r, r <= tol);
    for d in LocusDivisor::ALL {
        for _ in 0..samples {
            let z = random_locus_point(d, &mut rng, 0.3);
            let r = divisor_expressions(d, &z, tol * 1e-3)?.into_iter().fold(0.0, f64::max);
            push(format!("locus_{}", d.label()), &z, r, r <= tol);
        }
        let z = random_point(&mut rng, 0.3);
        let r = divisor_expressions(d, &z, tol * 1e-3)?.into_iter().fold(0.0, f64::max);
        push(format!("locus_{}_off_locus_fails", d.label()), &z, r, r > tol);
    }
    for z in [Complex64::new(0.0, 1.0), Complex64::new(1.0 / 3.0, 0.5)] {
        let p = SiegelPoint { z: [(z.re, z.im), (0.0, 0.0), (z.re, z.im)] };
        let r = exercise_residual(z, tol, true)?;
        push("exercise_identity".into(), &p, r, r <= tol);
        let r = exercise_residual(z, tol, false)?;
        push("exercise_identity_without_phase_fails".into(), &p, r, r > tol);
    }
    let mut last = f64::INFINITY;
    for t in [5.0, 10.0, 20.0] {
        let p = SiegelPoint { z: [(0.0, 1.0 / t), (0.0, 0.0), (0.0, t)] };
        let r = cusp_limit_error(t, tol)?;
        push(format!("cusp_limit_t{t}"), &p, r, r < last);
        last = r;
    }
    Ok(out)
}
