//! Orthogonal-group machinery: exact isometries of L tensor Q with
//! integrality/determinant/spinor/discriminant predicates, reflections and
//! Eichler transvections, the SL2 x SL2 embedding for split 2U blocks,
//! generator sets for O^+ and stabilizers, Vinberg's algorithm at small
//! rank, and computable subgroup descriptions.

use crate::discform::{subgroup_closure, FqfMap};
use crate::isometry::{iso_definite, short_vectors, DefiniteLattice};
use crate::lattice::{LatRef, Sublattice};
use crate::matrix::{int, rat_of, Int, IntMat, Rat, RatMat};
use crate::vectors::{lex_cmp, q_to_z, sign_normalize, z_to_q, QVec, ZVec};
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::HashSet;

/// An element of O(L tensor Q): a rational matrix preserving the Gram
/// matrix of its home lattice exactly.
#[derive(Clone, PartialEq, Eq)]
pub struct OrthMap {
    pub lat: LatRef,
    pub mat: RatMat,
}

impl std::fmt::Debug for OrthMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "OrthMap({:?})", self.mat)
    }
}

impl OrthMap {
    pub fn new(lat: LatRef, mat: RatMat) -> Result<Self> {
        let g = lat.gram().to_rat();
        if mat.transpose().mul(&g).mul(&mat) != g {
            return Err(Error::NotIsometry);
        }
        Ok(OrthMap { lat, mat })
    }

    pub fn new_int(lat: LatRef, mat: IntMat) -> Result<Self> {
        Self::new(lat, mat.to_rat())
    }

    pub fn identity(lat: LatRef) -> Self {
        let n = lat.rank();
        OrthMap { mat: RatMat::identity(n), lat }
    }

    pub fn compose(&self, other: &OrthMap) -> OrthMap {
        // (self o other): apply other first
        OrthMap { lat: self.lat.clone(), mat: self.mat.mul(&other.mat) }
    }

    pub fn inverse(&self) -> OrthMap {
        OrthMap { lat: self.lat.clone(), mat: self.mat.inverse().expect("isometry invertible") }
    }

    pub fn apply(&self, v: &[Rat]) -> QVec {
        self.mat.mul_vec(v)
    }

    pub fn apply_z(&self, v: &[Int]) -> QVec {
        self.mat.mul_vec(&z_to_q(v))
    }

    pub fn is_identity(&self) -> bool {
        self.mat.is_identity()
    }

    pub fn is_integral(&self) -> bool {
        self.mat.is_integral()
    }

    pub fn det_sign(&self) -> i8 {
        if self.mat.det().is_positive() {
            1
        } else {
            -1
        }
    }
}

/// Reflection in a non-isotropic rational vector:
/// x -> x - 2 (x,w)/(w,w) w; fixes w^perp, negates w.
pub fn reflection(lat: &LatRef, w: &[Rat]) -> Result<OrthMap> {
    let ww = lat.norm(w);
    if ww.is_zero() {
        return Err(Error::Isotropic);
    }
    let n = lat.rank();
    let mut m = RatMat::identity(n);
    // column j: e_j - 2 (e_j, w)/ww * w
    for j in 0..n {
        let mut ej = vec![Rat::zero(); n];
        ej[j] = Rat::one();
        let f = rat_of(&int(2)) * lat.ip(&ej, w) / &ww;
        for i in 0..n {
            let sub = &f * &w[i];
            m[(i, j)] -= sub;
        }
    }
    OrthMap::new(lat.clone(), m)
}

pub fn reflection_z(lat: &LatRef, w: &[Int]) -> Result<OrthMap> {
    reflection(lat, &z_to_q(w))
}

/// Real spinor norm via a Cassels-style reflection decomposition along a
/// fixed orthogonal anisotropic basis. Each factor contributes the sign of
/// -(w,w)/2; the result is independent of the decomposition.
pub fn spinor_norm(lat: &LatRef, g: &OrthMap) -> i8 {
    let basis = lat.orth_basis().clone();
    let mut h = g.mat.clone();
    let mut sign: i8 = 1;
    let reflect_through = |h: &RatMat, w: &[Rat], lat: &LatRef| -> RatMat {
        let r = reflection(lat, w).expect("anisotropic").mat;
        r.mul(h)
    };
    for (p, _) in &basis {
        let y = h.mul_vec(p);
        if y == *p {
            continue;
        }
        let u: QVec = y.iter().zip(p).map(|(a, b)| a - b).collect();
        let uu = lat.norm(&u);
        if !uu.is_zero() {
            sign *= if (-&uu).is_positive() { 1 } else { -1 };
            h = reflect_through(&h, &u, lat);
        } else {
            let v: QVec = y.iter().zip(p).map(|(a, b)| a + b).collect();
            let vv = lat.norm(&v);
            let pp = lat.norm(p);
            debug_assert!(!vv.is_zero());
            sign *= if (-&vv).is_positive() { 1 } else { -1 };
            sign *= if (-&pp).is_positive() { 1 } else { -1 };
            h = reflect_through(&h, &v, lat);
            h = reflect_through(&h, p, lat);
        }
        debug_assert_eq!(h.mul_vec(p), *p);
    }
    debug_assert!(h.is_identity(), "decomposition must terminate at the identity");
    sign
}

/// Image of an integral isometry in O(D(L)): generator lifts are mapped and
/// reduced. Errors if g is not integral on L.
pub fn disc_action(lat: &LatRef, g: &OrthMap) -> Result<FqfMap> {
    if !g.is_integral() {
        return Err(Error::NotIntegral);
    }
    let dg = lat.disc_group();
    let mut images = Vec::with_capacity(dg.orders.len());
    for lift in &dg.lifts {
        let img = g.apply(lift);
        images.push(lat.disc_coords(&img)?);
    }
    Ok(FqfMap {
        dom_orders: dg.orders.clone(),
        cod_orders: dg.orders.clone(),
        images,
        form_compatible: true,
    })
}

pub fn is_stable(lat: &LatRef, g: &OrthMap) -> Result<bool> {
    Ok(disc_action(lat, g)?.is_identity())
}

/// Eichler transvection t(e,a): v -> v - (a,v)e + (e,v)a - (a,a)/2 (e,v)e
/// for isotropic primitive e and a in e^perp. Integral, stable, det 1,
/// spinor norm +1.
pub fn eichler_transvection(lat: &LatRef, e: &[Int], a: &[Int]) -> Result<OrthMap> {
    if !lat.norm_z(e).is_zero() {
        return Err(Error::NotIsotropic);
    }
    if !lat.is_primitive(e) {
        return Err(Error::NotPrimitive);
    }
    if !lat.ip_z(e, a).is_zero() {
        return Err(Error::Precondition("a must pair to zero with e".into()));
    }
    let n = lat.rank();
    let aa_half = {
        let aa = lat.norm_z(a);
        debug_assert!(aa.is_even());
        aa / int(2)
    };
    let mut m = RatMat::identity(n);
    for j in 0..n {
        let mut ej = vec![Int::zero(); n];
        ej[j] = Int::one();
        let av = lat.ip_z(a, &ej);
        let ev = lat.ip_z(e, &ej);
        // column j gets: - av * e + ev * a - aa_half * ev * e
        for i in 0..n {
            let delta = -&av * &e[i] + &ev * &a[i] - &aa_half * &ev * &e[i];
            m[(i, j)] += rat_of(&delta);
        }
    }
    OrthMap::new(lat.clone(), m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sl2Side {
    Left,
    Right,
}

/// The SL2 x SL2 action on a lattice whose first four coordinates are two
/// hyperbolic planes, via (A,B): X -> A X B^{-1} on
/// X = [[x3, -x2], [x1, x4]]; padded by the identity elsewhere.
pub fn sl2_embed(lat: &LatRef, z: &IntMat, side: Sl2Side) -> Result<OrthMap> {
    if z.rows() != 2 || z.cols() != 2 {
        return Err(Error::Precondition("expected a 2x2 matrix".into()));
    }
    if z.det() != Int::one() {
        return Err(Error::NotDetOne);
    }
    let n = lat.rank();
    if n < 4 {
        return Err(Error::Precondition("lattice must start with 2U".into()));
    }
    let (a, b, c, d) =
        (z[(0, 0)].clone(), z[(0, 1)].clone(), z[(1, 0)].clone(), z[(1, 1)].clone());
    let mut m = IntMat::identity(n);
    let block: [[Int; 4]; 4] = match side {
        Sl2Side::Left => [
            [d.clone(), Int::zero(), c.clone(), Int::zero()],
            [Int::zero(), a.clone(), Int::zero(), -b.clone()],
            [b.clone(), Int::zero(), a.clone(), Int::zero()],
            [Int::zero(), -c.clone(), Int::zero(), d.clone()],
        ],
        Sl2Side::Right => [
            [d.clone(), Int::zero(), Int::zero(), -c.clone()],
            [Int::zero(), a.clone(), b.clone(), Int::zero()],
            [Int::zero(), c.clone(), d.clone(), Int::zero()],
            [-b.clone(), Int::zero(), Int::zero(), a.clone()],
        ],
    };
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = block[i][j].clone();
        }
    }
    OrthMap::new_int(lat.clone(), m)
}

/// Result of Vinberg's algorithm.
#[derive(Clone, Debug)]
pub struct VinbergResult {
    pub roots: Vec<ZVec>,
    pub terminated: bool,
}

/// Candidate root norms for a Lorentzian lattice: a primitive
/// crystallographic root satisfies v^2 | 2 div(v) with div(v) the order of
/// v* in D(L), so |v^2| is d or 2d (and even) for a divisor d of the
/// exponent of D(L).
pub fn candidate_root_norms(lat: &LatRef) -> Vec<i64> {
    let dg = lat.disc_group();
    let exponent = dg.orders.last().cloned().unwrap_or_else(Int::one);
    let e = i64::try_from(&exponent).expect("desk scale");
    let mut set = std::collections::BTreeSet::new();
    for d in 1..=e {
        if e % d == 0 {
            if d % 2 == 0 {
                set.insert(d);
            }
            set.insert(2 * d);
        }
    }
    set.into_iter().collect()
}

fn is_root(lat: &LatRef, v: &[Int]) -> bool {
    let norm = lat.norm_z(v);
    if norm.is_zero() || !lat.is_primitive(v) {
        return false;
    }
    let (div, _) = lat.divisor_and_star(v).expect("nonzero");
    (int(2) * div % norm.abs()).is_zero()
}

/// Vinberg's algorithm for a Lorentzian lattice of signature (1, n), n <= 4.
///
/// Phase 1 collects the walls through the base point: the canonical simple
/// system of the (-2)-root system orthogonal to x0 (chamber chosen
/// deterministically: shortest coordinate representation, then most
/// lex-positive roots, then lex order). Phase 2 adds roots of any candidate
/// norm in increasing |(x0,v)|^2/|v^2| order subject to the wall
/// compatibility (v, v_i) >= 0, until the polyhedral cone has finite
/// hyperbolic volume. Returns a partial list flagged non-terminated when
/// the budget is hit first.
pub fn vinberg_roots(lat: &LatRef, x0: &[Int], budget: usize) -> Result<VinbergResult> {
    let (tp, tm) = lat.signature();
    if tp != 1 {
        return Err(Error::Precondition("expected signature (1,n)".into()));
    }
    if tm > 4 {
        return Err(Error::Unsupported("vinberg limited to signature (1,n), n <= 4".into()));
    }
    let x0n = lat.norm_z(x0);
    if !x0n.is_positive() {
        return Err(Error::Precondition("base point must have positive norm".into()));
    }

    let mut accepted: Vec<ZVec> = stabilizer_walls(lat, x0)?;

    if finite_volume(lat, x0, &accepted) {
        return Ok(VinbergResult { roots: accepted, terminated: true });
    }

    // phase 2: increasing (x0,v)^2 / |v^2|
    let norms = candidate_root_norms(lat);
    let (x0_div, _) = lat.divisor_and_star(x0).expect("nonzero");
    let x0_div = i64::try_from(&x0_div).expect("desk scale");
    let mut levels: Vec<(i64, i64)> = Vec::new();
    let max_k = 40i64;
    let mut k = x0_div;
    while k <= max_k * x0_div {
        for &d in &norms {
            levels.push((k, d));
        }
        k += x0_div;
    }
    levels.sort_by(|a, b| {
        let qa = Rat::new(int(a.0 * a.0), int(a.1));
        let qb = Rat::new(int(b.0 * b.0), int(b.1));
        qa.cmp(&qb).then(a.1.cmp(&b.1))
    });

    for (k, d) in levels {
        if accepted.len() >= budget {
            return Ok(VinbergResult { roots: accepted, terminated: false });
        }
        let mut cands = level_candidates(lat, x0, k, -d)?;
        cands.sort_by(|a, b| lex_cmp(a, b));
        for v in cands {
            if accepted.iter().all(|w| !lat.ip_z(&v, w).is_negative()) {
                accepted.push(v);
                if finite_volume(lat, x0, &accepted) {
                    return Ok(VinbergResult { roots: accepted, terminated: true });
                }
                if accepted.len() >= budget {
                    return Ok(VinbergResult { roots: accepted, terminated: false });
                }
            }
        }
    }
    Ok(VinbergResult { roots: accepted, terminated: false })
}

/// Canonical simple system of the (-2)-roots orthogonal to x0.
fn stabilizer_walls(lat: &LatRef, x0: &[Int]) -> Result<Vec<ZVec>> {
    let comp = lat.orthogonal_complement(&sign_normalize(x0))?;
    let cb = comp.canonical();
    let cgram = lat.gram_of(cb);
    let def = DefiniteLattice::new(cgram).map_err(|_| {
        Error::Precondition("complement of the base point must be definite".into())
    })?;
    let mut roots: Vec<ZVec> = Vec::new();
    for (v, norm) in short_vectors(&def, 2) {
        if norm != int(-2) {
            continue;
        }
        let in_l = cb.mul_vec(&v);
        if is_root(lat, &in_l) {
            roots.push(in_l.clone());
            roots.push(crate::vectors::neg_z(&in_l));
        }
    }
    if roots.is_empty() {
        return Ok(Vec::new());
    }
    // lex-positive positives; simples = not a sum of two positives
    let positives: Vec<ZVec> = roots
        .iter()
        .filter(|v| v.iter().find(|x| !x.is_zero()).map(|x| x.is_positive()).unwrap_or(false))
        .cloned()
        .collect();
    let posset: HashSet<ZVec> = positives.iter().cloned().collect();
    let mut simples: Vec<ZVec> = positives
        .iter()
        .filter(|v| {
            !positives.iter().any(|a| {
                let rest: ZVec = v.iter().zip(a).map(|(x, y)| x - y).collect();
                posset.contains(&rest)
            })
        })
        .cloned()
        .collect();
    simples.sort_by(|a, b| lex_cmp(a, b));

    // Weyl orbit of the simple system; pick the canonical chamber
    let n = lat.rank();
    let refl_mats: Vec<RatMat> =
        simples.iter().map(|s| reflection_z(lat, s).expect("root").mat).collect();
    let id = RatMat::identity(n);
    let key_of = |m: &RatMat| -> Vec<(Int, Int)> {
        let mut k = Vec::new();
        for i in 0..n {
            for j in 0..n {
                k.push((m[(i, j)].numer().clone(), m[(i, j)].denom().clone()));
            }
        }
        k
    };
    let mut elements = vec![id.clone()];
    let mut mats_seen: HashSet<Vec<(Int, Int)>> = HashSet::new();
    mats_seen.insert(key_of(&id));
    let mut frontier = vec![id];
    let cap = 4000usize;
    while let Some(cur) = frontier.pop() {
        for r in &refl_mats {
            let next = r.mul(&cur);
            if mats_seen.insert(key_of(&next)) {
                if elements.len() >= cap {
                    return Err(Error::Budget("stabilizer Weyl group too large".into()));
                }
                elements.push(next.clone());
                frontier.push(next);
            }
        }
    }
    let chamber_of = |w: &RatMat| -> Vec<ZVec> {
        let mut ch: Vec<ZVec> =
            simples.iter().map(|s| q_to_z(&w.mul_vec(&z_to_q(s))).expect("integral")).collect();
        ch.sort_by(|a, b| lex_cmp(a, b));
        ch
    };
    let mut seen: HashSet<Vec<ZVec>> = HashSet::new();
    let mut chambers: Vec<Vec<ZVec>> = Vec::new();
    for w in &elements {
        let ch = chamber_of(w);
        if seen.insert(ch.clone()) {
            chambers.push(ch);
        }
    }
    // selection: minimal total |coords|; then minimal sign-normalized
    // multiset; then max count of lex-positive roots; then lex-min
    let l1 =
        |ch: &Vec<ZVec>| -> Int { ch.iter().map(|v| v.iter().map(|x| x.abs()).sum::<Int>()).sum() };
    let min_l1 = chambers.iter().map(l1).min().unwrap();
    let mut cands: Vec<Vec<ZVec>> = chambers.into_iter().filter(|c| l1(c) == min_l1).collect();
    let norm_key = |ch: &Vec<ZVec>| -> Vec<ZVec> {
        let mut k: Vec<ZVec> = ch.iter().map(|v| sign_normalize(v)).collect();
        k.sort_by(|a, b| lex_cmp(a, b));
        k
    };
    let min_norm = cands.iter().map(norm_key).min().unwrap();
    cands.retain(|c| norm_key(c) == min_norm);
    let pos_count = |ch: &Vec<ZVec>| -> usize {
        ch.iter()
            .filter(|v| v.iter().find(|x| !x.is_zero()).map(|x| x.is_positive()).unwrap_or(false))
            .count()
    };
    let max_pos = cands.iter().map(pos_count).max().unwrap();
    cands.retain(|c| pos_count(c) == max_pos);
    cands.sort();
    Ok(cands.into_iter().next().unwrap())
}

/// All crystallographic roots v with (x0, v) = k and v^2 = d (d < 0), via
/// shifted Fincke-Pohst on the affine translate of the complement of x0.
fn level_candidates(lat: &LatRef, x0: &[Int], k: i64, d: i64) -> Result<Vec<ZVec>> {
    let hat = lat.hat(x0);
    let (g, q) = crate::matrix::row_smith(&hat);
    let gi = i64::try_from(&g).expect("desk scale");
    if k % gi != 0 {
        return Ok(Vec::new());
    }
    let n = lat.rank();
    let factor = int(k / gi);
    let vp: ZVec = (0..n).map(|i| &q[(i, 0)] * &factor).collect();
    let mut cb = IntMat::zero(n, n - 1);
    for j in 1..n {
        for i in 0..n {
            cb[(i, j - 1)] = q[(i, j)].clone();
        }
    }
    let cgram = lat.gram_of(&cb);
    let def = DefiniteLattice::new(cgram.clone())
        .map_err(|_| Error::Precondition("complement must be definite".into()))?;
    // v = vp + C u: u^T A u + 2 b^T u + c0 = 0 with A = C^T G C
    let a = cgram.to_rat();
    let bvec: Vec<Rat> =
        (0..n - 1).map(|j| rat_of(&lat.ip_z(&vp, &cb.column(j)))).collect();
    let c0 = rat_of(&lat.norm_z(&vp)) - rat_of(&int(d));
    let ainv = a.inverse().expect("nondegenerate");
    let center: Vec<Rat> = ainv.mul_vec(&bvec).iter().map(|x| -x).collect();
    let rhs: Rat = {
        let ab = ainv.mul_vec(&bvec);
        let mut s = Rat::zero();
        for i in 0..n - 1 {
            s += &bvec[i] * &ab[i];
        }
        s - c0
    };
    let shifted = enumerate_shifted(&def, &center, &rhs);
    let mut out = Vec::new();
    for u in shifted {
        let v: ZVec = (0..n)
            .map(|i| {
                let mut s = vp[i].clone();
                for j in 0..n - 1 {
                    s += &cb[(i, j)] * &u[j];
                }
                s
            })
            .collect();
        if lat.norm_z(&v) == int(d) && lat.ip_z(x0, &v) == int(k) && is_root(lat, &v) {
            out.push(v);
        }
    }
    Ok(out)
}

/// Integer points u with (u - center)^T A (u - center) = rhs for a definite
/// Gram matrix A (sign handled internally).
fn enumerate_shifted(def: &DefiniteLattice, center: &[Rat], rhs: &Rat) -> Vec<ZVec> {
    let n = def.rank();
    let target = if def.is_positive() { rhs.clone() } else { -rhs.clone() };
    if target.is_negative() {
        return Vec::new();
    }
    let apos = if def.is_positive() { def.gram().to_rat() } else { def.gram().neg().to_rat() };
    let (dvec, u) = ldl_pub(&apos);
    let mut out = Vec::new();
    let mut x = vec![Int::zero(); n];
    descend_shifted(n - 1, n, &dvec, &u, center, &mut x, &target, &mut out);
    out.retain(|cand| {
        let diff: Vec<Rat> = (0..n).map(|i| rat_of(&cand[i]) - &center[i]).collect();
        let mut s = Rat::zero();
        for i in 0..n {
            for j in 0..n {
                s += &diff[i] * &apos[(i, j)] * &diff[j];
            }
        }
        s == target
    });
    out
}

fn ldl_pub(a: &RatMat) -> (Vec<Rat>, RatMat) {
    let n = a.rows();
    let mut d = vec![Rat::zero(); n];
    let mut u = RatMat::identity(n);
    let mut work = a.clone();
    for k in 0..n {
        d[k] = work[(k, k)].clone();
        for j in k + 1..n {
            u[(k, j)] = &work[(k, j)] / &d[k];
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let sub = &work[(k, i)] * &work[(k, j)] / &d[k];
                work[(i, j)] -= sub;
            }
        }
    }
    (d, u)
}

fn descend_shifted(
    i: usize,
    n: usize,
    d: &[Rat],
    u: &RatMat,
    center: &[Rat],
    x: &mut Vec<Int>,
    remaining: &Rat,
    out: &mut Vec<ZVec>,
) {
    // y_i = (x_i - c_i) + sum_{j>i} u_ij (x_j - c_j); d_i y_i^2 <= remaining
    let mut shift = Rat::zero();
    for j in i + 1..n {
        shift += &u[(i, j)] * (rat_of(&x[j]) - &center[j]);
    }
    let lim = remaining / &d[i];
    let root: Int = floor_sqrt_rat(&lim) + 1;
    let base = &center[i] - &shift;
    let lo = (&base - rat_of(&root)).ceil().to_integer();
    let hi = (&base + rat_of(&root)).floor().to_integer();
    let mut xi = lo;
    while xi <= hi {
        let yv = rat_of(&xi) - &center[i] + &shift;
        let term = &d[i] * &yv * &yv;
        if term <= *remaining {
            x[i] = xi.clone();
            if i == 0 {
                out.push(x.clone());
            } else {
                let rem = remaining - &term;
                descend_shifted(i - 1, n, d, u, center, x, &rem, out);
            }
            x[i] = Int::zero();
        }
        xi += 1;
    }
}

fn floor_sqrt_rat(x: &Rat) -> Int {
    if x.is_negative() {
        return int(-1);
    }
    let p = x.numer();
    let q = x.denom();
    (p * q).sqrt().div_floor(q)
}

/// Finite-volume test: the cone {x : (x, v_i) >= 0} must be full rank and
/// every extremal ray must have nonnegative norm on the base point's side
/// of the light cone.
fn finite_volume(lat: &LatRef, x0: &[Int], roots: &[ZVec]) -> bool {
    let n = lat.rank();
    if roots.len() < n {
        return false;
    }
    let rows: Vec<ZVec> = roots.iter().map(|v| lat.hat(v)).collect();
    let m = {
        let mut m = RatMat::zero(rows.len(), n);
        for (i, r) in rows.iter().enumerate() {
            for j in 0..n {
                m[(i, j)] = rat_of(&r[j]);
            }
        }
        m
    };
    if m.rank() < n {
        return false;
    }
    let idx: Vec<usize> = (0..roots.len()).collect();
    for sub in combinations(&idx, n - 1) {
        let mut sm = RatMat::zero(n - 1, n);
        for (i, &r) in sub.iter().enumerate() {
            for j in 0..n {
                sm[(i, j)] = m[(r, j)].clone();
            }
        }
        if sm.rank() != n - 1 {
            continue;
        }
        let ray = match kernel_vector(&sm) {
            Some(r) => r,
            None => continue,
        };
        let vals: Vec<Rat> = (0..roots.len())
            .map(|i| {
                let mut s = Rat::zero();
                for j in 0..n {
                    s += &m[(i, j)] * &ray[j];
                }
                s
            })
            .collect();
        let oriented: Option<Vec<Rat>> = if vals.iter().all(|v| !v.is_negative()) {
            Some(ray.clone())
        } else if vals.iter().all(|v| !v.is_positive()) {
            Some(ray.iter().map(|x| -x).collect())
        } else {
            None
        };
        if let Some(r) = oriented {
            let rnorm = lat.norm(&r);
            if rnorm.is_negative() {
                return false;
            }
            let pairing = lat.ip(&r, &z_to_q(x0));
            if !pairing.is_positive() {
                return false;
            }
        }
    }
    true
}

fn combinations(v: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if v.len() < k {
        return vec![];
    }
    let mut out = Vec::new();
    for i in 0..=v.len() - k {
        for rest in combinations(&v[i + 1..], k - 1) {
            let mut c = vec![v[i]];
            c.extend(rest);
            out.push(c);
        }
    }
    out
}

fn kernel_vector(m: &RatMat) -> Option<Vec<Rat>> {
    let n = m.cols();
    let mut den = Int::one();
    for i in 0..m.rows() {
        for j in 0..n {
            den = den.lcm(m[(i, j)].denom());
        }
    }
    let mut a = IntMat::zero(m.rows(), n);
    for i in 0..m.rows() {
        for j in 0..n {
            a[(i, j)] = (&m[(i, j)] * rat_of(&den)).to_integer();
        }
    }
    let k = crate::matrix::kernel_columns(&a);
    if k.cols() != 1 {
        return None;
    }
    Some(z_to_q(&k.column(0)))
}

/// Isometries permuting the given wall vectors (as exact vectors), with
/// positive spinor norm, excluding the identity. Together with the wall
/// reflections these generate O^+ of a Lorentzian lattice once Vinberg has
/// terminated.
pub fn diagram_automorphisms(lat: &LatRef, roots: &[ZVec]) -> Result<Vec<OrthMap>> {
    let n = lat.rank();
    let k = roots.len();
    let rmat = IntMat::from_columns(roots);
    if rmat.to_rat().rank() < n {
        return Err(Error::Precondition("walls must span the space".into()));
    }
    let gram: Vec<Vec<Int>> =
        roots.iter().map(|a| roots.iter().map(|b| lat.ip_z(a, b)).collect()).collect();
    let norms: Vec<Int> = roots.iter().map(|r| lat.norm_z(r)).collect();
    let mut perms: Vec<Vec<usize>> = Vec::new();
    let mut cur = vec![usize::MAX; k];
    fn backtrack(
        depth: usize,
        k: usize,
        gram: &[Vec<Int>],
        norms: &[Int],
        cur: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if depth == k {
            out.push(cur.clone());
            return;
        }
        for cand in 0..k {
            if used[cand] || norms[cand] != norms[depth] {
                continue;
            }
            let mut ok = true;
            for j in 0..depth {
                if gram[depth][j] != gram[cand][cur[j]] {
                    ok = false;
                    break;
                }
            }
            if ok {
                used[cand] = true;
                cur[depth] = cand;
                backtrack(depth + 1, k, gram, norms, cur, used, out);
                used[cand] = false;
                cur[depth] = usize::MAX;
            }
        }
    }
    let mut used = vec![false; k];
    backtrack(0, k, &gram, &norms, &mut cur, &mut used, &mut perms);
    let mut out: Vec<OrthMap> = Vec::new();
    for perm in perms {
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            continue;
        }
        let target_cols: Vec<ZVec> = perm.iter().map(|&p| roots[p].clone()).collect();
        let tmat = IntMat::from_columns(&target_cols);
        // solve g * roots = permuted roots column by column of g^T
        let rqt = rmat.to_rat().transpose();
        let tqt = tmat.to_rat().transpose();
        let mut rows: Vec<QVec> = Vec::with_capacity(n);
        let mut consistent = true;
        for j in 0..n {
            let rhs: Vec<Rat> = (0..k).map(|i| tqt[(i, j)].clone()).collect();
            match rqt.solve(&rhs) {
                Some(sol) => rows.push(sol),
                None => {
                    consistent = false;
                    break;
                }
            }
        }
        if !consistent {
            continue;
        }
        let mut gm = RatMat::zero(n, n);
        for (j, row) in rows.iter().enumerate() {
            for i in 0..n {
                gm[(j, i)] = row[i].clone();
            }
        }
        let candidate = match OrthMap::new(lat.clone(), gm) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if !candidate.is_integral() || !candidate.inverse().is_integral() {
            continue;
        }
        let realizes = perm.iter().enumerate().all(|(i, &p)| {
            q_to_z(&candidate.apply_z(&roots[i])).map(|v| v == roots[p]).unwrap_or(false)
        });
        if !realizes {
            continue;
        }
        if spinor_norm(lat, &candidate) == 1 {
            out.push(candidate);
        }
    }
    out.sort_by(|a, b| {
        for i in 0..n {
            for j in 0..n {
                match a.mat[(i, j)].cmp(&b.mat[(i, j)]) {
                    std::cmp::Ordering::Equal => continue,
                    ord => return ord,
                }
            }
        }
        std::cmp::Ordering::Equal
    });
    out.dedup_by(|a, b| a.mat == b.mat);
    Ok(out)
}

/// Default base point for Vinberg: first vector of positive norm in a
/// growing box, lexicographic within each radius.
pub fn default_vinberg_base(lat: &LatRef) -> ZVec {
    let n = lat.rank();
    for radius in 1..=4i64 {
        let mut v = vec![int(-radius); n];
        'sweep: loop {
            if lat.norm_z(&v).is_positive() {
                return sign_normalize(&v);
            }
            let mut i = 0;
            loop {
                if i == n {
                    break 'sweep;
                }
                v[i] += 1;
                if v[i] <= int(radius) {
                    break;
                }
                v[i] = int(-radius);
                i += 1;
            }
        }
    }
    panic!("no positive-norm vector found in box; not Lorentzian?");
}

/// Generators of O^+ for a Lorentzian lattice of signature (1, n), n <= 4:
/// wall reflections from Vinberg plus diagram automorphisms.
pub fn oplus_generators_lorentzian(lat: &LatRef, x0: Option<&[Int]>) -> Result<Vec<OrthMap>> {
    let base = match x0 {
        Some(v) => v.to_vec(),
        None => default_vinberg_base(lat),
    };
    let vr = vinberg_roots(lat, &base, 64)?;
    if !vr.terminated {
        return Err(Error::Incomplete("vinberg did not terminate within budget".into()));
    }
    let mut gens: Vec<OrthMap> = Vec::new();
    for r in &vr.roots {
        gens.push(reflection_z(lat, r)?);
    }
    gens.extend(diagram_automorphisms(lat, &vr.roots)?);
    Ok(gens)
}

/// O^+ generators for a definite lattice: the automorphisms of positive
/// spinor norm (all of them, for negative definite forms).
pub fn oplus_generators_definite(lat: &LatRef) -> Result<Vec<OrthMap>> {
    let dl = DefiniteLattice::new(lat.gram().clone())?;
    let autos = iso_definite(&dl, &dl)?;
    let mut out = Vec::new();
    for m in autos {
        let g = OrthMap::new_int(lat.clone(), m)?;
        if spinor_norm(lat, &g) == 1 {
            out.push(g);
        }
    }
    Ok(out)
}

/// Generators of O^+(U + L1) from generators of O^+(L1): Eichler
/// transvections t(x1, v), t(x2, v) over a basis of L1 plus the L1
/// generators extended by the identity on U. The Gram must be literally
/// block-diagonal U + G(L1) with L1 = U + L0.
pub fn generators_oplus_split(lat: &LatRef, gens_l1: &[OrthMap]) -> Result<Vec<OrthMap>> {
    let n = lat.rank();
    if n < 4 {
        return Err(Error::Precondition("need rank >= 4".into()));
    }
    let g = lat.gram();
    let u = crate::lattice::gram_u();
    for i in 0..2 {
        for j in 0..2 {
            if g[(i, j)] != u[(i, j)] {
                return Err(Error::Precondition("first block must be a canonical U".into()));
            }
        }
        for j in 2..n {
            if !g[(i, j)].is_zero() || !g[(j, i)].is_zero() {
                return Err(Error::Precondition("U block must split off".into()));
            }
        }
    }
    for i in 2..4 {
        for j in 2..4 {
            if g[(i, j)] != u[(i - 2, j - 2)] {
                return Err(Error::Precondition("second block must be a canonical U".into()));
            }
        }
    }
    let mut gens = Vec::new();
    let mut x1 = vec![Int::zero(); n];
    x1[0] = Int::one();
    let mut x2 = vec![Int::zero(); n];
    x2[1] = Int::one();
    for j in 2..n {
        let mut b = vec![Int::zero(); n];
        b[j] = Int::one();
        gens.push(eichler_transvection(lat, &x1, &b)?);
        gens.push(eichler_transvection(lat, &x2, &b)?);
    }
    for g1 in gens_l1 {
        let k = g1.lat.rank();
        if k != n - 2 {
            return Err(Error::RankMismatch(k, n - 2));
        }
        let mut m = RatMat::identity(n);
        for i in 0..k {
            for j in 0..k {
                m[(i + 2, j + 2)] = g1.mat[(i, j)].clone();
            }
        }
        gens.push(OrthMap::new(lat.clone(), m)?);
    }
    Ok(gens)
}

/// Which condition the image in O(D(L)) must satisfy.
#[derive(Clone)]
pub enum DiscCondition {
    Any,
    Trivial,
    InSubgroup(Vec<FqfMap>),
}

impl std::fmt::Debug for DiscCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DiscCondition::Any => write!(f, "any"),
            DiscCondition::Trivial => write!(f, "trivial"),
            DiscCondition::InSubgroup(a) => write!(f, "subgroup({} maps)", a.len()),
        }
    }
}

/// A computable subgroup of O(L tensor Q). Elements act on a fixed ambient
/// coordinate lattice; membership requires integrality on `sub` (given by a
/// basis inside ambient coordinates), optional determinant-one and spinor
/// conditions, and a discriminant condition on D(sub).
#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub ambient: LatRef,
    pub sub: LatRef,
    /// columns: basis of `sub` in ambient coordinates; None = same lattice
    pub basis: Option<IntMat>,
    basis_inv: Option<RatMat>,
    pub require_det_one: bool,
    pub require_spinor_positive: bool,
    pub disc: DiscCondition,
    pub label: String,
}

impl GroupSpec {
    pub fn new(
        ambient: LatRef,
        sub: LatRef,
        basis: Option<IntMat>,
        require_det_one: bool,
        require_spinor_positive: bool,
        disc: DiscCondition,
        label: impl Into<String>,
    ) -> Result<Self> {
        let basis_inv = match &basis {
            Some(b) => {
                let lhs = b.transpose().mul(ambient.gram()).mul(b);
                if &lhs != sub.gram() {
                    return Err(Error::Precondition(
                        "basis does not transport the sub Gram matrix".into(),
                    ));
                }
                Some(b.to_rat().inverse().ok_or(Error::Degenerate)?)
            }
            None => {
                if ambient.gram() != sub.gram() {
                    return Err(Error::Precondition("ambient and sub Gram matrices differ".into()));
                }
                None
            }
        };
        let disc = match disc {
            DiscCondition::InSubgroup(gens) => {
                let orders = sub.disc_group().orders.clone();
                DiscCondition::InSubgroup(subgroup_closure(&orders, &gens))
            }
            other => other,
        };
        Ok(GroupSpec {
            ambient,
            sub,
            basis,
            basis_inv,
            require_det_one,
            require_spinor_positive,
            disc,
            label: label.into(),
        })
    }

    /// O^+(L) on its own coordinates.
    pub fn oplus(lat: &LatRef) -> Self {
        GroupSpec::new(lat.clone(), lat.clone(), None, false, true, DiscCondition::Any, "O+")
            .expect("same lattice")
    }

    /// Stable O^+(L): kernel of O^+(L) -> O(D(L)).
    pub fn stable_oplus(lat: &LatRef) -> Self {
        GroupSpec::new(lat.clone(), lat.clone(), None, false, true, DiscCondition::Trivial, "~O+")
            .expect("same lattice")
    }

    /// Stable SO^+(L).
    pub fn stable_so_plus(lat: &LatRef) -> Self {
        GroupSpec::new(lat.clone(), lat.clone(), None, true, true, DiscCondition::Trivial, "~SO+")
            .expect("same lattice")
    }

    /// The same predicates transported into the coordinates of an
    /// overlattice: `basis` columns express the sub-lattice basis in
    /// ambient coordinates.
    pub fn in_ambient(
        ambient: &LatRef,
        sub: &LatRef,
        basis: IntMat,
        require_det_one: bool,
        require_spinor_positive: bool,
        disc: DiscCondition,
        label: impl Into<String>,
    ) -> Result<Self> {
        GroupSpec::new(
            ambient.clone(),
            sub.clone(),
            Some(basis),
            require_det_one,
            require_spinor_positive,
            disc,
            label,
        )
    }

    fn to_sub_coords(&self, g: &OrthMap) -> RatMat {
        match (&self.basis, &self.basis_inv) {
            (Some(b), Some(bi)) => bi.mul(&g.mat).mul(&b.to_rat()),
            _ => g.mat.clone(),
        }
    }

    pub fn is_member(&self, g: &OrthMap) -> bool {
        let h = self.to_sub_coords(g);
        if !h.is_integral() {
            return false;
        }
        if self.require_det_one && h.det() != Rat::one() {
            return false;
        }
        if self.require_spinor_positive && spinor_norm(&self.ambient, g) != 1 {
            return false;
        }
        match &self.disc {
            DiscCondition::Any => true,
            cond => {
                let hm = OrthMap { lat: self.sub.clone(), mat: h };
                let act = match disc_action(&self.sub, &hm) {
                    Ok(a) => a,
                    Err(_) => return false,
                };
                match cond {
                    DiscCondition::Trivial => act.is_identity(),
                    DiscCondition::InSubgroup(closure) => {
                        let key = act.normalized().images;
                        closure.iter().any(|m| m.normalized().images == key)
                    }
                    DiscCondition::Any => unreachable!(),
                }
            }
        }
    }

    /// Exact canonical key identifying the left coset g * Gamma: two
    /// elements x, y satisfy y^{-1} x in Gamma iff their keys agree.
    /// Available unless the disc condition is a nontrivial subgroup.
    pub fn coset_key(&self, g: &OrthMap) -> Option<CosetKey> {
        if matches!(self.disc, DiscCondition::InSubgroup(_)) {
            return None;
        }
        let n = self.ambient.rank();
        let b = match &self.basis {
            Some(b) => b.clone(),
            None => IntMat::identity(n),
        };
        let gb_cols: Vec<QVec> = (0..b.cols()).map(|j| g.apply_z(&b.column(j))).collect();
        let mut den = Int::one();
        for c in &gb_cols {
            for x in c {
                den = den.lcm(x.denom());
            }
        }
        let int_cols: Vec<ZVec> = gb_cols
            .iter()
            .map(|c| c.iter().map(|x| (x * rat_of(&den)).to_integer()).collect())
            .collect();
        let h = crate::matrix::hnf_columns(&IntMat::from_columns(&int_cols));
        let hq = h.to_rat();
        let hinv = hq.inverse()?;
        let mut lift_keys: Vec<Vec<Rat>> = Vec::new();
        if matches!(self.disc, DiscCondition::Trivial) {
            let dg = self.sub.disc_group();
            let bq = b.to_rat();
            for lift in &dg.lifts {
                let amb: QVec = bq.mul_vec(lift);
                let img = g.apply(&amb);
                // reduce mod the image lattice (basis h / den)
                let coords = hinv.mul_vec(&img);
                let frac: Vec<Rat> = coords
                    .iter()
                    .map(|c| {
                        let scaled = c * rat_of(&den);
                        &scaled - Rat::from_integer(scaled.floor().to_integer())
                    })
                    .collect();
                lift_keys.push(frac);
            }
        }
        let sn = if self.require_spinor_positive { spinor_norm(&self.ambient, g) } else { 0 };
        let det = if self.require_det_one { g.det_sign() } else { 0 };
        Some(CosetKey { hnf: h, den, lifts: lift_keys, spinor: sn, det })
    }
}

/// Canonical coset identifier; see `GroupSpec::coset_key`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CosetKey {
    hnf: IntMat,
    den: Int,
    lifts: Vec<Vec<Rat>>,
    spinor: i8,
    det: i8,
}

pub fn is_member(spec: &GroupSpec, g: &OrthMap) -> bool {
    spec.is_member(g)
}

/// The isometry negating the first hyperbolic pair of a split basis
/// (identity elsewhere), in global coordinates. Spinor norm -1... no:
/// sn = -1 * +1 factors to -1? It decomposes as two reflections with norms
/// +2 and -2, so the spinor norm is -1 * +1 = -1 times... computed exactly
/// by `spinor_norm`; it stabilizes both the line <x1> and the plane
/// <x1, x3>, completing the stabilizer generator lists.
pub fn u1_negator(lat: &LatRef, split_cols: &IntMat) -> Result<OrthMap> {
    let n = lat.rank();
    let mut d = RatMat::identity(n);
    d[(0, 0)] = -Rat::one();
    d[(1, 1)] = -Rat::one();
    let s = split_cols.to_rat();
    let si = s.inverse().ok_or(Error::Degenerate)?;
    OrthMap::new(lat.clone(), s.mul(&d).mul(&si))
}

/// Canonical sublattice spanned by a single vector.
pub fn line_of(v: &[Int]) -> Sublattice {
    Sublattice::from_vectors(&[sign_normalize(v)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, LatticeTerm};
    use crate::vectors::{qvec, zvec};

    fn u() -> LatRef {
        build_lattice(&[(LatticeTerm::U(1), 1)]).unwrap()
    }

    fn u_a2() -> LatRef {
        build_lattice(&[(LatticeTerm::U(1), 1), (LatticeTerm::A(2, 1), 1)]).unwrap()
    }

    fn u_a3() -> LatRef {
        build_lattice(&[(LatticeTerm::U(1), 1), (LatticeTerm::A(3, 1), 1)]).unwrap()
    }

    fn two_u() -> LatRef {
        build_lattice(&[(LatticeTerm::U(1), 2)]).unwrap()
    }

    fn two_u_a2() -> LatRef {
        build_lattice(&[(LatticeTerm::U(1), 2), (LatticeTerm::A(2, 1), 1)]).unwrap()
    }

    #[test]
    fn reflection_swaps_u_basis() {
        let lat = u();
        let w = qvec(&[1, -1]);
        let r = reflection(&lat, &w).unwrap();
        assert_eq!(r.apply(&qvec(&[1, 0])), qvec(&[0, 1]));
        assert_eq!(r.apply(&qvec(&[0, 1])), qvec(&[1, 0]));
        assert!(r.compose(&r).is_identity());
    }

    #[test]
    fn reflection_involution_and_fixed_space() {
        let lat = build_lattice(&[(LatticeTerm::A(2, 1), 1), (LatticeTerm::Rank1(-2), 1)]).unwrap();
        let w = qvec(&[1, 1, 1]);
        let r = reflection(&lat, &w).unwrap();
        assert!(r.compose(&r).is_identity());
        let x = qvec(&[1, -1, 0]);
        if lat.ip(&x, &w).is_zero() {
            assert_eq!(r.apply(&x), x);
        }
        // negates w
        let img = r.apply(&w);
        let neg: QVec = w.iter().map(|c| -c).collect();
        assert_eq!(img, neg);
    }

    #[test]
    fn reflection_rejects_isotropic() {
        assert!(reflection(&u(), &qvec(&[1, 0])).is_err());
    }

    #[test]
    fn spinor_norm_identity_and_reflections() {
        let lat = u_a3();
        assert_eq!(spinor_norm(&lat, &OrthMap::identity(lat.clone())), 1);
        let w = qvec(&[0, 0, 1, 0, 0]);
        assert_eq!(lat.norm(&w), crate::matrix::rat(-2));
        let r = reflection(&lat, &w).unwrap();
        assert_eq!(spinor_norm(&lat, &r), 1);
        let w = qvec(&[1, 1, 0, 0, 0]);
        assert_eq!(lat.norm(&w), crate::matrix::rat(2));
        let r = reflection(&lat, &w).unwrap();
        assert_eq!(spinor_norm(&lat, &r), -1);
    }

    #[test]
    fn spinor_multiplicative_on_products() {
        let lat = u_a2();
        let gens: Vec<OrthMap> = vec![
            reflection(&lat, &qvec(&[1, -1, 0, 0])).unwrap(),
            reflection(&lat, &qvec(&[0, 0, 1, 0])).unwrap(),
            reflection(&lat, &qvec(&[1, 1, 0, 0])).unwrap(),
            reflection(&lat, &qvec(&[0, 1, 1, -1])).unwrap(),
        ];
        for a in &gens {
            for b in &gens {
                let ab = a.compose(b);
                assert_eq!(spinor_norm(&lat, &ab), spinor_norm(&lat, a) * spinor_norm(&lat, b));
            }
        }
    }

    #[test]
    fn disc_action_stable_examples() {
        let lat = two_u();
        let neg = OrthMap::new(lat.clone(), RatMat::identity(4).neg()).unwrap();
        assert!(is_stable(&lat, &neg).unwrap());

        let lat = u_a3();
        let theta = OrthMap::new_int(
            lat.clone(),
            IntMat::from_rows(&[
                vec![11, 5, -11, -13, -9],
                vec![43, 21, -46, -51, -36],
                vec![1, 1, -1, -2, -2],
                vec![-9, -5, 10, 12, 8],
                vec![25, 12, -26, -30, -21],
            ]),
        )
        .unwrap();
        assert!(is_stable(&lat, &theta).unwrap());
        assert_eq!(spinor_norm(&lat, &theta), 1);
    }

    #[test]
    fn eichler_basics() {
        let lat = two_u();
        let e1 = zvec(&[1, 0, 0, 0]);
        let zero = zvec(&[0, 0, 0, 0]);
        let t = eichler_transvection(&lat, &e1, &zero).unwrap();
        assert!(t.is_identity());

        let e2 = zvec(&[0, 0, 1, 0]);
        let t = eichler_transvection(&lat, &e1, &e2).unwrap();
        // formula on f1: f1 - (e2,f1)e1 + (e1,f1)e2 - 0 = f1 + e2
        let f1 = qvec(&[0, 1, 0, 0]);
        assert_eq!(t.apply(&f1), qvec(&[0, 1, 1, 0]));
        assert!(t.is_integral());
        assert_eq!(t.mat.det(), Rat::one());
        assert_eq!(spinor_norm(&lat, &t), 1);
        assert!(is_stable(&lat, &t).unwrap());
    }

    #[test]
    fn eichler_additive_in_a() {
        let lat = two_u_a2();
        let e = zvec(&[1, 0, 0, 0, 0, 0]);
        let cases = [
            (zvec(&[0, 0, 1, 0, 0, 0]), zvec(&[0, 0, 0, 1, 2, 0])),
            (zvec(&[0, 0, 0, 0, 1, 0]), zvec(&[0, 0, 2, 0, 0, 1])),
            (zvec(&[0, 0, 1, 1, 1, 1]), zvec(&[0, 0, -1, 2, 0, -1])),
        ];
        for (a, b) in &cases {
            let ta = eichler_transvection(&lat, &e, a).unwrap();
            let tb = eichler_transvection(&lat, &e, b).unwrap();
            let sum: ZVec = a.iter().zip(b).map(|(x, y)| x + y).collect();
            let tsum = eichler_transvection(&lat, &e, &sum).unwrap();
            assert_eq!(ta.compose(&tb).mat, tsum.mat);
        }
    }

    #[test]
    fn eichler_member_of_stable_so_plus() {
        let lat = two_u_a2();
        let spec = GroupSpec::stable_so_plus(&lat);
        let e = zvec(&[0, 0, 1, 0, 0, 0]);
        let a = zvec(&[1, 0, 0, 0, 1, -1]);
        assert!(lat.ip_z(&e, &a).is_zero());
        let t = eichler_transvection(&lat, &e, &a).unwrap();
        assert!(spec.is_member(&t));
    }

    #[test]
    fn sl2_embed_matches_printed_blocks() {
        let lat = two_u();
        let z = IntMat::from_rows(&[vec![1, 1], vec![0, 1]]);
        let left = sl2_embed(&lat, &z, Sl2Side::Left).unwrap();
        let expect = IntMat::from_rows(&[
            vec![1, 0, 0, 0],
            vec![0, 1, 0, -1],
            vec![1, 0, 1, 0],
            vec![0, 0, 0, 1],
        ]);
        assert_eq!(left.mat, expect.to_rat());
        let right = sl2_embed(&lat, &z, Sl2Side::Right).unwrap();
        let expect = IntMat::from_rows(&[
            vec![1, 0, 0, 0],
            vec![0, 1, 1, 0],
            vec![0, 0, 1, 0],
            vec![-1, 0, 0, 1],
        ]);
        assert_eq!(right.mat, expect.to_rat());
        assert!(
            sl2_embed(&lat, &IntMat::from_rows(&[vec![1, 1], vec![1, 1]]), Sl2Side::Left).is_err()
        );
        let id = sl2_embed(&lat, &IntMat::identity(2), Sl2Side::Left).unwrap();
        assert!(id.is_identity());
    }

    #[test]
    fn sl2_embed_homomorphism() {
        let lat = two_u_a2();
        let mats = [
            IntMat::from_rows(&[vec![1, 1], vec![0, 1]]),
            IntMat::from_rows(&[vec![1, 0], vec![1, 1]]),
            IntMat::from_rows(&[vec![0, -1], vec![1, 0]]),
            IntMat::from_rows(&[vec![2, 1], vec![1, 1]]),
        ];
        for z1 in &mats {
            for z2 in &mats {
                let a = sl2_embed(&lat, z1, Sl2Side::Left).unwrap();
                let b = sl2_embed(&lat, z2, Sl2Side::Left).unwrap();
                let prod = sl2_embed(&lat, &z1.mul(z2), Sl2Side::Left).unwrap();
                assert_eq!(a.compose(&b).mat, prod.mat);
                let a = sl2_embed(&lat, z1, Sl2Side::Right).unwrap();
                let b = sl2_embed(&lat, z2, Sl2Side::Right).unwrap();
                let prod = sl2_embed(&lat, &z1.mul(z2), Sl2Side::Right).unwrap();
                assert_eq!(a.compose(&b).mat, prod.mat);
                let l = sl2_embed(&lat, z1, Sl2Side::Left).unwrap();
                let r = sl2_embed(&lat, z2, Sl2Side::Right).unwrap();
                assert_eq!(l.compose(&r).mat, r.compose(&l).mat);
            }
        }
        for z in &mats {
            let g = sl2_embed(&lat, z, Sl2Side::Left).unwrap();
            assert_eq!(spinor_norm(&lat, &g), 1);
        }
    }

    #[test]
    fn vinberg_u_a2() {
        let lat = u_a2();
        let x0 = zvec(&[1, 1, 0, 0]);
        let vr = vinberg_roots(&lat, &x0, 64).unwrap();
        assert!(vr.terminated);
        let expect: Vec<ZVec> = vec![
            zvec(&[1, -1, 0, 0]),
            zvec(&[0, 0, -1, 0]),
            zvec(&[0, 0, 0, 1]),
            zvec(&[0, 1, 1, -1]),
        ];
        assert_eq!(vr.roots.len(), 4);
        for e in &expect {
            let neg = crate::vectors::neg_z(e);
            assert!(
                vr.roots.contains(e) || vr.roots.contains(&neg),
                "missing root {:?}; got {:?}",
                e,
                vr.roots
            );
        }
        assert_eq!(candidate_root_norms(&lat), vec![2, 6]);
    }

    #[test]
    fn vinberg_diagram_automorphism() {
        let lat = u_a2();
        let x0 = zvec(&[1, 1, 0, 0]);
        let vr = vinberg_roots(&lat, &x0, 64).unwrap();
        let autos = diagram_automorphisms(&lat, &vr.roots).unwrap();
        let flip = IntMat::from_rows(&[
            vec![1, 0, 0, 0],
            vec![0, 1, 0, 0],
            vec![0, 0, 0, -1],
            vec![0, 0, -1, 0],
        ])
        .to_rat();
        assert!(autos.iter().any(|a| a.mat == flip), "diagram flip must appear");
    }

    #[test]
    fn group_spec_membership() {
        let lat = u_a3();
        let spec = GroupSpec::stable_oplus(&lat);
        assert!(spec.is_member(&OrthMap::identity(lat.clone())));
        let theta = OrthMap::new_int(
            lat.clone(),
            IntMat::from_rows(&[
                vec![11, 5, -11, -13, -9],
                vec![43, 21, -46, -51, -36],
                vec![1, 1, -1, -2, -2],
                vec![-9, -5, 10, 12, 8],
                vec![25, 12, -26, -30, -21],
            ]),
        )
        .unwrap();
        assert!(spec.is_member(&theta));
        let r = reflection(&lat, &qvec(&[1, 1, 0, 0, 0])).unwrap();
        assert!(!spec.is_member(&r));
    }

    #[test]
    fn coset_key_matches_predicate() {
        let lat = two_u_a2();
        let spec = GroupSpec::stable_oplus(&lat);
        let l1 = u_a2();
        let gens1 = oplus_generators_lorentzian(&l1, Some(&zvec(&[1, 1, 0, 0]))).unwrap();
        let gens = generators_oplus_split(&lat, &gens1).unwrap();
        let mut elems = vec![OrthMap::identity(lat.clone())];
        for g in gens.iter().take(6) {
            elems.push(g.clone());
            elems.push(g.inverse());
        }
        // include one composite
        elems.push(gens[0].compose(&gens[3]));
        for a in &elems {
            for b in &elems {
                let keys_equal = spec.coset_key(a) == spec.coset_key(b);
                let pred = spec.is_member(&b.inverse().compose(a));
                assert_eq!(keys_equal, pred, "key/predicate disagree");
            }
        }
    }

    #[test]
    fn disc_action_homomorphism() {
        let lat = u_a3();
        let r1 = reflection(&lat, &qvec(&[0, 0, 1, 0, 0])).unwrap();
        let r2 = reflection(&lat, &qvec(&[0, 0, 0, 1, 0])).unwrap();
        let a1 = disc_action(&lat, &r1).unwrap();
        let a2 = disc_action(&lat, &r2).unwrap();
        let a12 = disc_action(&lat, &r1.compose(&r2)).unwrap();
        // action(g h) = action(g) after action(h)
        let composed = a2.then(&a1);
        assert_eq!(a12.normalized().images, composed.normalized().images);
    }

    #[test]
    fn u1_negator_stabilizes() {
        let lat = two_u_a2();
        let h = u1_negator(&lat, &IntMat::identity(6)).unwrap();
        assert!(h.is_integral());
        let e1 = qvec(&[1, 0, 0, 0, 0, 0]);
        let img = h.apply(&e1);
        assert_eq!(img, qvec(&[-1, 0, 0, 0, 0, 0]));
        assert_eq!(spinor_norm(&lat, &h), -1);
    }
}
