//! Definite-lattice computations: short vector enumeration (Fincke-Pohst
//! with exact rational arithmetic), isometry testing by norm-pruned
//! backtracking, norm representation search, and brute-force genus
//! enumeration at rank <= 3.

use crate::lattice::{LatRef, Lattice};
use crate::discform::{iso_fqf, FiniteQuadraticForm};
use crate::matrix::{inertia, int, rat_of, Int, IntMat, Rat, RatMat};
use crate::vectors::{lex_cmp, sign_normalize, ZVec};
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// A definite even lattice; `positive` records the sign of the form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefiniteLattice {
    gram: IntMat,
    positive: bool,
}

impl DefiniteLattice {
    pub fn new(gram: IntMat) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let (pos, neg, zero) = inertia(&gram.to_rat());
        if zero != 0 || (pos != 0 && neg != 0) {
            return Err(Error::NotDefinite);
        }
        Ok(DefiniteLattice { gram, positive: neg == 0 })
    }

    pub fn from_lattice(lat: &Lattice) -> Result<Self> {
        DefiniteLattice::new(lat.gram().clone())
    }

    pub fn gram(&self) -> &IntMat {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    /// Gram with the sign flipped to positive definite.
    fn pos_gram(&self) -> IntMat {
        if self.positive {
            self.gram.clone()
        } else {
            self.gram.neg()
        }
    }

    pub fn norm_of(&self, v: &[Int]) -> Int {
        let n = self.rank();
        let mut s = Int::zero();
        for i in 0..n {
            if v[i].is_zero() {
                continue;
            }
            for j in 0..n {
                s += &v[i] * &self.gram[(i, j)] * &v[j];
            }
        }
        s
    }
}

/// LDL decomposition of a positive definite rational matrix:
/// a = u^T d u with u unit upper triangular.
fn ldl(a: &RatMat) -> (Vec<Rat>, RatMat) {
    let n = a.rows();
    let mut d = vec![Rat::zero(); n];
    let mut u = RatMat::identity(n);
    let mut work = a.clone();
    for k in 0..n {
        d[k] = work[(k, k)].clone();
        assert!(d[k].is_positive(), "not positive definite");
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

/// integer floor of sqrt(x) for a nonnegative rational:
/// floor(sqrt(p/q)) = floor(isqrt(p*q)/q)
fn floor_sqrt(x: &Rat) -> Int {
    if x.is_negative() {
        return int(-1);
    }
    let p = x.numer();
    let q = x.denom();
    (p * q).sqrt().div_floor(q)
}

/// All nonzero vectors v with |v^2| <= bound, one per +/- pair (first
/// nonzero coordinate positive), sorted lexicographically, with their
/// (signed) norms.
pub fn short_vectors(k: &DefiniteLattice, bound: u64) -> Vec<(ZVec, Int)> {
    let n = k.rank();
    if n == 0 {
        return Vec::new();
    }
    let a = k.pos_gram().to_rat();
    let (d, u) = ldl(&a);
    let bound_rat = Rat::from_integer(int(bound as i64));
    let mut out: Vec<(ZVec, Int)> = Vec::new();
    let mut x = vec![Int::zero(); n];
    // enumerate coordinates from the last; partial sums of
    // d_i (x_i + sum_{j>i} u_ij x_j)^2
    fn descend(
        i: usize,
        n: usize,
        d: &[Rat],
        u: &RatMat,
        x: &mut Vec<Int>,
        remaining: &Rat,
        out: &mut Vec<(ZVec, Int)>,
        k: &DefiniteLattice,
    ) {
        // center c_i = sum_{j>i} u_ij x_j
        let mut c = Rat::zero();
        for j in i + 1..n {
            c += &u[(i, j)] * rat_of(&x[j]);
        }
        // d_i (x_i + c)^2 <= remaining; the +1 margin over the integer
        // square root keeps the range complete, the exact term check below
        // keeps it correct
        let lim = remaining / &d[i];
        let root: Int = floor_sqrt(&lim) + 1;
        let lo = {
            let t = -&c - Rat::from_integer(root.clone());
            t.ceil().to_integer()
        };
        let hi = {
            let t = -&c + Rat::from_integer(root.clone());
            t.floor().to_integer()
        };
        let mut xi = lo;
        while xi <= hi {
            let term = {
                let s = rat_of(&xi) + &c;
                &d[i] * &s * &s
            };
            if term <= *remaining {
                x[i] = xi.clone();
                if i == 0 {
                    if x.iter().any(|v| !v.is_zero()) {
                        let canon = sign_normalize(x);
                        if &canon == x {
                            let norm = k.norm_of(x);
                            out.push((x.clone(), norm));
                        }
                    }
                } else {
                    let rem = remaining - &term;
                    descend(i - 1, n, d, u, x, &rem, out, k);
                }
                x[i] = Int::zero();
            }
            xi += 1;
        }
    }
    descend(n - 1, n, &d, &u, &mut x, &bound_rat, &mut out, k);
    out.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    out
}

/// All isometries K1 -> K2 as integer matrices m with
/// `m^T G(K2) m = G(K1)` (columns are the images of K1's basis vectors in
/// K2-coordinates). Empty iff the lattices are not isometric.
pub fn iso_definite(k1: &DefiniteLattice, k2: &DefiniteLattice) -> Result<Vec<IntMat>> {
    iso_definite_impl(k1, k2, false)
}

/// First isometry only (faster existence test).
pub fn iso_definite_first(k1: &DefiniteLattice, k2: &DefiniteLattice) -> Result<Option<IntMat>> {
    Ok(iso_definite_impl(k1, k2, true)?.into_iter().next())
}

fn iso_definite_impl(
    k1: &DefiniteLattice,
    k2: &DefiniteLattice,
    first_only: bool,
) -> Result<Vec<IntMat>> {
    if k1.rank() != k2.rank() {
        return Err(Error::RankMismatch(k1.rank(), k2.rank()));
    }
    let n = k1.rank();
    if n == 0 {
        return Ok(vec![IntMat::identity(0)]);
    }
    if k1.is_positive() != k2.is_positive() {
        return Ok(Vec::new());
    }
    if k1.gram().det() != k2.gram().det() {
        return Ok(Vec::new());
    }
    // enumerate in the direction whose source basis has the smaller norms:
    // candidates live in the codomain and their count grows with the source
    // diagonal
    let diag_max = |k: &DefiniteLattice| -> Int {
        (0..k.rank()).map(|i| k.gram()[(i, i)].abs()).max().unwrap()
    };
    if diag_max(k1) > diag_max(k2) {
        let rev = iso_definite_impl(k2, k1, first_only)?;
        let mut out: Vec<IntMat> = rev
            .into_iter()
            .map(|m| m.to_rat().inverse().expect("unimodular").to_int().expect("integral"))
            .collect();
        out.sort_by(|a, b| {
            for i in 0..n {
                for j in 0..n {
                    match a[(i, j)].cmp(&b[(i, j)]) {
                        std::cmp::Ordering::Equal => continue,
                        other => return other,
                    }
                }
            }
            std::cmp::Ordering::Equal
        });
        return Ok(out);
    }
    let g1 = k1.gram().clone();
    let max_norm: Int = (0..n).map(|i| g1[(i, i)].abs()).max().unwrap();
    let max_u64 = u64::try_from(&max_norm).map_err(|_| {
        Error::Unsupported("basis norms too large for short vector enumeration".into())
    })?;
    let shorts = short_vectors(k2, max_u64);
    // candidates per basis vector of K1: all +/- short vectors of matching norm
    let mut cands: Vec<Vec<ZVec>> = Vec::with_capacity(n);
    for i in 0..n {
        let target = &g1[(i, i)];
        let mut c: Vec<ZVec> = Vec::new();
        for (v, norm) in &shorts {
            if norm == target {
                c.push(v.clone());
                c.push(crate::vectors::neg_z(v));
            }
        }
        cands.push(c);
    }
    // process positions in ascending candidate multiplicity
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| cands[i].len());

    let mut found: Vec<IntMat> = Vec::new();
    let mut chosen: Vec<(usize, ZVec)> = Vec::new();
    fn backtrack(
        order: &[usize],
        depth: usize,
        g1: &IntMat,
        k2: &DefiniteLattice,
        cands: &[Vec<ZVec>],
        chosen: &mut Vec<(usize, ZVec)>,
        found: &mut Vec<IntMat>,
        first_only: bool,
    ) {
        if first_only && !found.is_empty() {
            return;
        }
        if depth == order.len() {
            let n = order.len();
            let mut m = IntMat::zero(n, n);
            for (pos, v) in chosen.iter() {
                for r in 0..n {
                    m[(r, *pos)] = v[r].clone();
                }
            }
            found.push(m);
            return;
        }
        let pos = order[depth];
        'cand: for c in &cands[pos] {
            for (p2, v2) in chosen.iter() {
                let ip = pair(k2, c, v2);
                if ip != g1[(pos.min(*p2), pos.max(*p2))] {
                    continue 'cand;
                }
            }
            chosen.push((pos, c.clone()));
            backtrack(order, depth + 1, g1, k2, cands, chosen, found, first_only);
            chosen.pop();
            if first_only && !found.is_empty() {
                return;
            }
        }
    }
    fn pair(k: &DefiniteLattice, a: &[Int], b: &[Int]) -> Int {
        let n = a.len();
        let mut s = Int::zero();
        for i in 0..n {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..n {
                s += &a[i] * &k.gram()[(i, j)] * &b[j];
            }
        }
        s
    }
    backtrack(&order, 0, &g1, k2, &cands, &mut chosen, &mut found, first_only);
    // canonical order of yields
    found.sort_by(|a, b| {
        for i in 0..n {
            for j in 0..n {
                match a[(i, j)].cmp(&b[(i, j)]) {
                    std::cmp::Ordering::Equal => continue,
                    other => return other,
                }
            }
        }
        std::cmp::Ordering::Equal
    });
    Ok(found)
}

/// Outcome of a norm-representation search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormSearch {
    Found(ZVec),
    /// exhaustive for definite lattices
    AbsentExact,
    /// the box was exhausted without an answer; absence is not certified
    Inconclusive,
}

/// Search for a vector of the given even norm. Exact for definite lattices;
/// for indefinite ones a box search is run and absence is reported as
/// inconclusive.
pub fn represents_norm(lat: &Lattice, target: i64, budget: u64) -> NormSearch {
    let n = lat.rank();
    let t = int(target);
    if lat.is_definite() {
        let (_, neg) = lat.signature();
        let positive_form = neg == 0;
        if target != 0 && (target > 0) != positive_form {
            return NormSearch::AbsentExact;
        }
        let k = DefiniteLattice::new(lat.gram().clone()).expect("definite");
        let bound = target.unsigned_abs();
        for (v, norm) in short_vectors(&k, bound) {
            if norm == t {
                return NormSearch::Found(v);
            }
        }
        return NormSearch::AbsentExact;
    }
    // indefinite: growing box search
    let max_radius = 10 * target.unsigned_abs().max(1);
    let mut radius: u64 = 1;
    while radius <= max_radius {
        let width = 2 * radius + 1;
        if width.checked_pow(n as u32).map(|total| total > budget).unwrap_or(true) {
            break;
        }
        if let Some(v) = box_search(lat, &t, radius as i64) {
            return NormSearch::Found(v);
        }
        radius += 1;
    }
    NormSearch::Inconclusive
}

fn box_search(lat: &Lattice, target: &Int, radius: i64) -> Option<ZVec> {
    let n = lat.rank();
    let mut v: ZVec = vec![int(-radius); n];
    loop {
        if lat.norm_z(&v) == *target && v.iter().any(|x| !x.is_zero()) {
            return Some(v);
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == n {
                return None;
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

/// One representative per isometry class of even definite lattices with the
/// given rank, signature and discriminant form. Enumeration of
/// Minkowski-reduced Gram matrices; complete for rank <= 3.
pub fn enumerate_genus_definite(
    rank: usize,
    sig: (usize, usize),
    q: &FiniteQuadraticForm,
) -> Result<Vec<DefiniteLattice>> {
    if rank > 3 {
        return Err(Error::Unsupported("genus enumeration limited to rank <= 3".into()));
    }
    if sig.0 + sig.1 != rank || (sig.0 != 0 && sig.1 != 0) {
        return Err(Error::NotDefinite);
    }
    let positive = sig.1 == 0;
    let det: Int = q.group_order();
    if rank == 0 {
        return Ok(if q.is_trivial() { vec![DefiniteLattice::new(IntMat::zero(0, 0))?] } else { vec![] });
    }
    let det_i64 = i64::try_from(&det)
        .map_err(|_| Error::Unsupported("determinant too large for genus enumeration".into()))?;
    let mut grams: Vec<IntMat> = Vec::new();
    match rank {
        1 => {
            grams.push(IntMat::from_rows(&[vec![det_i64]]));
        }
        2 => {
            // Minkowski reduced: 0 <= 2b <= a <= c, det = ac - b^2
            let mut a = 2i64;
            while a * a <= 4 * det_i64 / 3 + 3 {
                for b in 0..=(a / 2) {
                    let num = det_i64 + b * b;
                    if num % a == 0 {
                        let c = num / a;
                        if c >= a && c % 2 == 0 {
                            grams.push(IntMat::from_rows(&[vec![a, b], vec![b, c]]));
                        }
                    }
                }
                a += 2;
            }
        }
        3 => {
            // Minkowski reduced ternary: a <= b <= c, 2|t| <= a, 2|s| <= a,
            // 2|r| <= b, abc <= 2 det
            let mut a = 2i64;
            while a * a * a <= 2 * det_i64 {
                let mut b = a;
                while a * b * b <= 2 * det_i64 {
                    for t in -(a / 2)..=(a / 2) {
                        for s in -(a / 2)..=(a / 2) {
                            for r in -(b / 2)..=(b / 2) {
                                let minor = a * b - t * t;
                                if minor <= 0 {
                                    continue;
                                }
                                let num = det_i64 + a * r * r - 2 * t * r * s + b * s * s;
                                if num % minor != 0 {
                                    continue;
                                }
                                let c = num / minor;
                                if c < b || c % 2 != 0 {
                                    continue;
                                }
                                let g = IntMat::from_rows(&[
                                    vec![a, t, s],
                                    vec![t, b, r],
                                    vec![s, r, c],
                                ]);
                                if g.det() == det {
                                    grams.push(g);
                                }
                            }
                        }
                    }
                    b += 2;
                }
                a += 2;
            }
        }
        _ => unreachable!(),
    }
    // orient, filter by positive definiteness and discriminant form, dedupe
    let mut classes: Vec<DefiniteLattice> = Vec::new();
    for g in grams {
        let g = if positive { g } else { g.neg() };
        let dl = match DefiniteLattice::new(g.clone()) {
            Ok(d) => d,
            Err(_) => continue,
        };
        let lat = match Lattice::new(g) {
            Ok(l) => l,
            Err(_) => continue,
        };
        if lat.det().abs() != det {
            continue;
        }
        let qf = FiniteQuadraticForm::of_lattice(&lat);
        if iso_fqf(&qf, q).is_empty() {
            continue;
        }
        let mut dup = false;
        for c in &classes {
            if iso_definite_first(c, &dl)?.is_some() {
                dup = true;
                break;
            }
        }
        if !dup {
            classes.push(dl);
        }
    }
    Ok(classes)
}

/// Convenience: the quotient Gram of a plane inside a maximal lattice as a
/// definite lattice class.
pub fn definite_class_of(gram: IntMat) -> Result<DefiniteLattice> {
    DefiniteLattice::new(gram)
}

pub fn lattice_of(dl: &DefiniteLattice) -> LatRef {
    Lattice::new(dl.gram().clone()).expect("even definite gram")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, gram_a, LatticeTerm};
    use num_traits::One;
    use crate::vectors::zvec;

    fn a2() -> DefiniteLattice {
        DefiniteLattice::new(gram_a(2)).unwrap()
    }

    #[test]
    fn definite_guard() {
        assert!(DefiniteLattice::new(crate::lattice::gram_u()).is_err());
        assert!(DefiniteLattice::new(gram_a(3)).is_ok());
    }

    #[test]
    fn short_vectors_a2() {
        let sv = short_vectors(&a2(), 2);
        // 3 +/- pairs of norm -2
        assert_eq!(sv.len(), 3);
        for (_, n) in &sv {
            assert_eq!(*n, int(-2));
        }
        let vecs: Vec<ZVec> = sv.iter().map(|(v, _)| v.clone()).collect();
        assert!(vecs.contains(&zvec(&[1, 0])));
        assert!(vecs.contains(&zvec(&[0, 1])));
        assert!(vecs.contains(&zvec(&[1, -1])));

        assert!(short_vectors(&a2(), 1).is_empty());
    }

    #[test]
    fn short_vectors_rank1() {
        let m = DefiniteLattice::new(IntMat::from_rows(&[vec![-2]])).unwrap();
        let sv = short_vectors(&m, 2);
        assert_eq!(sv.len(), 1);
        assert_eq!(sv[0], (zvec(&[1]), int(-2)));
    }

    #[test]
    fn short_vectors_box_oracle() {
        // naive box enumeration agrees for rank <= 4
        let lats = [
            DefiniteLattice::new(gram_a(3)).unwrap(),
            DefiniteLattice::new(gram_a(4)).unwrap(),
            DefiniteLattice::new(IntMat::from_rows(&[vec![2, 1], vec![1, 4]])).unwrap(),
        ];
        for k in &lats {
            let bound = 6u64;
            let fast = short_vectors(k, bound);
            // box radius large enough for these small fixed cases
            let n = k.rank();
            let mut slow: Vec<(ZVec, Int)> = Vec::new();
            let radius = 4i64;
            let mut v = vec![int(-radius); n];
            'outer: loop {
                if v.iter().any(|x| !x.is_zero()) {
                    let norm = k.norm_of(&v);
                    if norm.abs() <= int(bound as i64) && sign_normalize(&v) == v {
                        slow.push((v.clone(), norm));
                    }
                }
                let mut i = 0;
                loop {
                    if i == n {
                        break 'outer;
                    }
                    v[i] += 1;
                    if v[i] <= int(radius) {
                        break;
                    }
                    v[i] = int(-radius);
                    i += 1;
                }
            }
            slow.sort_by(|a, b| lex_cmp(&a.0, &b.0));
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn iso_a2_self_is_twelve() {
        let isos = iso_definite(&a2(), &a2()).unwrap();
        assert_eq!(isos.len(), 12);
        // gram transport holds for each
        for m in &isos {
            assert_eq!(m.transpose().mul(a2().gram()).mul(m), *a2().gram());
            assert_eq!(m.det().abs(), Int::one());
        }
    }

    #[test]
    fn iso_rejects_distinct_determinants() {
        let a1a1 = DefiniteLattice::new(IntMat::from_rows(&[vec![-2, 0], vec![0, -2]])).unwrap();
        let isos = iso_definite(&a1a1, &a2()).unwrap();
        assert!(isos.is_empty());
    }

    #[test]
    fn iso_paper_complements() {
        let l = build_lattice(&[(LatticeTerm::U(1), 1), (LatticeTerm::A(3, 1), 1)]).unwrap();
        let k1b = l.orthogonal_complement(&zvec(&[4, 4, 1, 2, -1])).unwrap();
        let k2b = l.orthogonal_complement(&zvec(&[36, 144, 5, -30, 83])).unwrap();
        let k1 = DefiniteLattice::new(l.gram_of(k1b.basis())).unwrap();
        let k2 = DefiniteLattice::new(l.gram_of(k2b.basis())).unwrap();
        let isos = iso_definite(&k1, &k2).unwrap();
        assert!(!isos.is_empty());
        // the printed one appears among the yields
        let psi = IntMat::from_rows(&[
            vec![-2, -8, 2, -9],
            vec![-8, -30, 5, -36],
            vec![-1, -1, 1, -2],
            vec![22, 83, -18, 97],
        ]);
        assert!(isos.contains(&psi));
    }

    #[test]
    fn represents_norm_cases() {
        let u = build_lattice(&[(LatticeTerm::U(1), 1)]).unwrap();
        match represents_norm(&u, 2, 1_000_000) {
            NormSearch::Found(v) => assert_eq!(u.norm_z(&v), int(2)),
            other => panic!("expected Found, got {:?}", other),
        }
        let a2l = build_lattice(&[(LatticeTerm::A(2, 1), 1)]).unwrap();
        assert_eq!(represents_norm(&a2l, 2, 1_000_000), NormSearch::AbsentExact);
        match represents_norm(&a2l, -2, 1_000_000) {
            NormSearch::Found(_) => {}
            other => panic!("expected Found, got {:?}", other),
        }
    }

    #[test]
    fn genus_rank2_a2_unique() {
        let a2l = build_lattice(&[(LatticeTerm::A(2, 1), 1)]).unwrap();
        let q = FiniteQuadraticForm::of_lattice(&a2l);
        let classes = enumerate_genus_definite(2, (0, 2), &q).unwrap();
        assert_eq!(classes.len(), 1);
        assert!(iso_definite_first(&classes[0], &a2()).unwrap().is_some());
    }

    #[test]
    fn genus_rank1() {
        let m = build_lattice(&[(LatticeTerm::Rank1(-2), 1)]).unwrap();
        let q = FiniteQuadraticForm::of_lattice(&m);
        let classes = enumerate_genus_definite(1, (0, 1), &q).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].gram(), &IntMat::from_rows(&[vec![-2]]));
    }

    #[test]
    fn genus_rank2_two_a1() {
        let m = build_lattice(&[(LatticeTerm::Rank1(-2), 2)]).unwrap();
        let q = FiniteQuadraticForm::of_lattice(&m);
        let classes = enumerate_genus_definite(2, (0, 2), &q).unwrap();
        assert_eq!(classes.len(), 1);
        let expect = DefiniteLattice::new(IntMat::from_rows(&[vec![-2, 0], vec![0, -2]])).unwrap();
        assert!(iso_definite_first(&classes[0], &expect).unwrap().is_some());
    }

    #[test]
    fn iso_group_closure_spot_check() {
        let isos = iso_definite(&a2(), &a2()).unwrap();
        // closed under composition
        for a in isos.iter().take(4) {
            for b in isos.iter().take(4) {
                let c = a.mul(b);
                assert!(isos.contains(&c));
            }
        }
    }
}
