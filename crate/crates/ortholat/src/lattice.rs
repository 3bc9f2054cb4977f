//! Even non-degenerate integral lattices: construction, discriminant groups,
//! divisors, orthogonal complements and maximal overlattices.
//!
//! A lattice is Z^n with a fixed symmetric Gram matrix; vectors are
//! coordinate columns in that basis and everything downstream (dual vectors,
//! disc group lifts, isometries) lives in the same fixed coordinates.

use crate::matrix::{
    congruent_diagonalize, hnf_columns, int, rat_of, row_smith, saturate_columns,
    smith_normal_form, Int, IntMat, Rat, RatMat,
};
use crate::vectors::{content, primitive_scale, q_to_z, z_to_q, QVec, ZVec};
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::sync::{Arc, OnceLock};

/// An even, non-degenerate integral quadratic form on Z^rank.
pub struct Lattice {
    gram: IntMat,
    signature: (usize, usize),
    disc: OnceLock<DiscGroup>,
    /// pairwise orthogonal anisotropic rational basis, used for spinor norms
    orth_basis: OnceLock<Vec<(QVec, Rat)>>,
    gram_inv: OnceLock<RatMat>,
}

pub type LatRef = Arc<Lattice>;

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.gram == other.gram
    }
}
impl Eq for Lattice {}

impl std::fmt::Debug for Lattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Lattice(rank {}, sig {:?})", self.rank(), self.signature)
    }
}

impl Lattice {
    pub fn new(gram: IntMat) -> Result<LatRef> {
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        for i in 0..gram.rows() {
            if gram[(i, i)].is_odd() {
                return Err(Error::NotEven(gram[(i, i)].to_string(), i));
            }
        }
        if gram.rows() > 0 && gram.det().is_zero() {
            return Err(Error::Degenerate);
        }
        let (pos, neg, zero) = crate::matrix::inertia(&gram.to_rat());
        debug_assert_eq!(zero, 0);
        Ok(Arc::new(Lattice {
            gram,
            signature: (pos, neg),
            disc: OnceLock::new(),
            orth_basis: OnceLock::new(),
            gram_inv: OnceLock::new(),
        }))
    }

    pub fn gram(&self) -> &IntMat {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn det(&self) -> Int {
        self.gram.det()
    }

    pub fn is_definite(&self) -> bool {
        self.signature.0 == 0 || self.signature.1 == 0
    }

    pub fn gram_inv(&self) -> &RatMat {
        self.gram_inv
            .get_or_init(|| self.gram.to_rat().inverse().expect("nondegenerate"))
    }

    /// Bilinear pairing of two rational coordinate vectors.
    pub fn ip(&self, a: &[Rat], b: &[Rat]) -> Rat {
        let n = self.rank();
        assert_eq!(a.len(), n);
        assert_eq!(b.len(), n);
        let mut s = Rat::zero();
        for i in 0..n {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[j].is_zero() {
                    continue;
                }
                s += &a[i] * rat_of(&self.gram[(i, j)]) * &b[j];
            }
        }
        s
    }

    pub fn ip_z(&self, a: &[Int], b: &[Int]) -> Int {
        let n = self.rank();
        let mut s = Int::zero();
        for i in 0..n {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[j].is_zero() {
                    continue;
                }
                s += &a[i] * &self.gram[(i, j)] * &b[j];
            }
        }
        s
    }

    pub fn norm_z(&self, a: &[Int]) -> Int {
        self.ip_z(a, a)
    }

    pub fn norm(&self, a: &[Rat]) -> Rat {
        self.ip(a, a)
    }

    /// x-hat = x^T G as an integer row (x must be integral).
    pub fn hat(&self, x: &[Int]) -> ZVec {
        let n = self.rank();
        (0..n).map(|j| (0..n).map(|i| &x[i] * &self.gram[(i, j)]).sum()).collect()
    }

    /// Is the rational vector in L (all coordinates integral)?
    pub fn contains(&self, x: &[Rat]) -> bool {
        x.iter().all(|c| c.is_integer())
    }

    /// Is the rational vector in the dual L^vee (all pairings with L integral)?
    pub fn in_dual(&self, x: &[Rat]) -> bool {
        let n = self.rank();
        (0..n).all(|j| {
            let mut s = Rat::zero();
            for i in 0..n {
                s += &x[i] * rat_of(&self.gram[(i, j)]);
            }
            s.is_integer()
        })
    }

    /// Orthogonal anisotropic basis of L tensor Q (pairwise orthogonal
    /// columns with nonzero norms), cached. Used by reflection
    /// decompositions.
    pub fn orth_basis(&self) -> &Vec<(QVec, Rat)> {
        self.orth_basis.get_or_init(|| {
            let (p, diag) = congruent_diagonalize(&self.gram.to_rat());
            let mut out = Vec::new();
            for j in 0..self.rank() {
                assert!(!diag[j].is_zero(), "nondegenerate lattice");
                out.push((p.column(j), diag[j].clone()));
            }
            out
        })
    }

    /// The discriminant group D(L) = L^vee / L, cached.
    pub fn disc_group(&self) -> &DiscGroup {
        self.disc.get_or_init(|| {
            let snf = smith_normal_form(&self.gram);
            let n = self.rank();
            let divisors: Vec<Int> = (0..n).map(|i| snf.d[(i, i)].clone()).collect();
            // lift for divisor i: column i of Q / d_i, an element of L^vee
            // whose class has order d_i
            let mut orders = Vec::new();
            let mut lifts = Vec::new();
            for i in 0..n {
                if divisors[i] > Int::one() {
                    orders.push(divisors[i].clone());
                    let col = snf.q.column(i);
                    let lift: QVec =
                        col.iter().map(|c| Rat::new(c.clone(), divisors[i].clone())).collect();
                    lifts.push(reduce_mod_one_lattice(&lift));
                }
            }
            DiscGroup { orders, lifts, proj: snf.p, divisors_full: divisors }
        })
    }

    /// Exponents of the class of a dual vector in the invariant-factor
    /// presentation of D(L). Errors if x is not in L^vee.
    pub fn disc_coords(&self, x: &[Rat]) -> Result<ZVec> {
        let n = self.rank();
        let mut m = Vec::with_capacity(n);
        for j in 0..n {
            let mut s = Rat::zero();
            for i in 0..n {
                s += &x[i] * rat_of(&self.gram[(i, j)]);
            }
            if !s.is_integer() {
                return Err(Error::NotIntegral);
            }
            m.push(s.to_integer());
        }
        let dg = self.disc_group();
        let e = dg.proj.mul_vec(&m);
        let mut out = Vec::new();
        for i in 0..n {
            if dg.divisors_full[i] > Int::one() {
                out.push(e[i].mod_floor(&dg.divisors_full[i]));
            }
        }
        Ok(out)
    }

    /// div(x): positive generator of the pairing ideal (x, L), plus
    /// x* = x / div(x) in L^vee.
    pub fn divisor_and_star(&self, x: &[Int]) -> Result<(Int, QVec)> {
        if x.iter().all(|c| c.is_zero()) {
            return Err(Error::ZeroVector);
        }
        let hat = self.hat(x);
        let d = content(&hat);
        let star: QVec = x.iter().map(|c| Rat::new(c.clone(), d.clone())).collect();
        Ok((d, star))
    }

    pub fn is_primitive(&self, x: &[Int]) -> bool {
        content(x).is_one()
    }

    /// The primitive sublattice x^perp of a primitive vector x, with its
    /// basis given by the canonical kernel columns of the row Smith form of
    /// x-hat. For isotropic x the complement contains x and its Gram is
    /// degenerate; the flag on the returned value records this.
    pub fn orthogonal_complement(&self, x: &[Int]) -> Result<Sublattice> {
        if x.iter().all(|c| c.is_zero()) {
            return Err(Error::ZeroVector);
        }
        if !self.is_primitive(x) {
            return Err(Error::NotPrimitive);
        }
        let hat = self.hat(x);
        let (_, q) = row_smith(&hat);
        let n = self.rank();
        let mut basis = IntMat::zero(n, n - 1);
        for j in 1..n {
            for i in 0..n {
                basis[(i, j - 1)] = q[(i, j)].clone();
            }
        }
        Ok(Sublattice::from_basis_unchecked(basis))
    }

    /// Gram matrix of a sublattice basis.
    pub fn gram_of(&self, basis: &IntMat) -> IntMat {
        basis.transpose().mul(&self.gram).mul(basis)
    }

    /// Does this lattice admit no proper even overlattice? Equivalent to
    /// D(L) having no nontrivial isotropic element.
    pub fn is_maximal(&self) -> bool {
        let dg = self.disc_group();
        for e in dg.elements() {
            if e.iter().all(|x| x.is_zero()) {
                continue;
            }
            if dg.q_value(self, &e).is_zero() {
                return false;
            }
        }
        true
    }
}

fn reduce_mod_one_lattice(x: &[Rat]) -> QVec {
    x.iter().map(|c| c - Rat::from_integer(c.to_integer())).map(|c| {
        if c.is_negative() {
            c + Rat::one()
        } else {
            c
        }
    }).collect()
}

/// D(L) in invariant-factor form: cyclic orders d_1 | d_2 | ... (> 1 only)
/// and generator lifts in L^vee, reduced into [0,1)^n coordinates.
#[derive(Debug, Clone)]
pub struct DiscGroup {
    pub orders: Vec<Int>,
    pub lifts: Vec<QVec>,
    proj: IntMat,
    divisors_full: Vec<Int>,
}

impl DiscGroup {
    pub fn order(&self) -> Int {
        self.orders.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn num_generators(&self) -> usize {
        self.orders.len()
    }

    /// All group elements as exponent vectors, lexicographic.
    pub fn elements(&self) -> Vec<ZVec> {
        let mut out = vec![vec![]];
        for d in &self.orders {
            let mut next = Vec::new();
            for e in &out {
                let mut k = Int::zero();
                while &k < d {
                    let mut e2 = e.clone();
                    e2.push(k.clone());
                    next.push(e2);
                    k += 1;
                }
            }
            out = next;
        }
        out
    }

    /// Lift of an exponent vector into L^vee.
    pub fn lift(&self, exps: &[Int]) -> QVec {
        let n = self.lifts.first().map(|l| l.len()).unwrap_or(0);
        let mut v = vec![Rat::zero(); n];
        for (e, l) in exps.iter().zip(&self.lifts) {
            for i in 0..n {
                v[i] += rat_of(e) * &l[i];
            }
        }
        v
    }

    /// q(x) mod 2Z, normalized into [0,2).
    pub fn q_value(&self, lat: &Lattice, exps: &[Int]) -> Rat {
        let lift = self.lift(exps);
        norm_mod(&lat.norm(&lift), 2)
    }

    /// b(x,y) mod Z, normalized into [0,1).
    pub fn b_value(&self, lat: &Lattice, a: &[Int], b: &[Int]) -> Rat {
        let (la, lb) = (self.lift(a), self.lift(b));
        norm_mod(&lat.ip(&la, &lb), 1)
    }
}

pub fn norm_mod(x: &Rat, modulus: i64) -> Rat {
    let m = Rat::from_integer(int(modulus));
    let q = (x / &m).floor();
    x - q * m
}

/// A sublattice of the ambient lattice, stored as an integer basis matrix
/// (columns) plus the canonical HNF basis of its saturation. Saturated
/// sublattices compare equal iff they are the same primitive sublattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sublattice {
    basis: IntMat,
    hnf: IntMat,
}

impl Sublattice {
    pub fn from_basis_unchecked(basis: IntMat) -> Self {
        let hnf = saturate_columns(&basis);
        Sublattice { basis, hnf }
    }

    pub fn from_vectors(vecs: &[ZVec]) -> Self {
        Self::from_basis_unchecked(IntMat::from_columns(vecs))
    }

    /// Saturated sublattice spanned by rational vectors.
    pub fn from_rational_span(vecs: &[QVec]) -> Self {
        let mut den = Int::one();
        for v in vecs {
            for c in v {
                den = den.lcm(c.denom());
            }
        }
        let cols: Vec<ZVec> = vecs
            .iter()
            .map(|v| v.iter().map(|c| (c * rat_of(&den)).to_integer()).collect())
            .collect();
        Self::from_basis_unchecked(IntMat::from_columns(&cols))
    }

    pub fn basis(&self) -> &IntMat {
        &self.basis
    }

    /// Canonical basis of the saturation (primitive closure).
    pub fn canonical(&self) -> &IntMat {
        &self.hnf
    }

    pub fn rank(&self) -> usize {
        self.hnf.cols()
    }

    pub fn is_saturated(&self) -> bool {
        hnf_columns(&self.basis) == self.hnf
    }

    /// Image under an integral matrix, as a saturated sublattice.
    pub fn apply(&self, m: &RatMat) -> Sublattice {
        let cols: Vec<QVec> =
            (0..self.hnf.cols()).map(|j| m.mul_vec(&z_to_q(&self.hnf.column(j)))).collect();
        Sublattice::from_rational_span(&cols)
    }

    pub fn contains_vector(&self, v: &[Rat]) -> bool {
        // v in span and (after clearing denominators) in the saturation
        let h = &self.hnf;
        let n = h.rows();
        assert_eq!(v.len(), n);
        let hq = h.to_rat();
        // solve h x = v
        let mut aug_cols: Vec<QVec> = (0..h.cols()).map(|j| hq.column(j)).collect();
        aug_cols.push(v.to_vec());
        let m = RatMat::from_columns(&aug_cols);
        m.rank() == h.cols()
    }
}

/// Lattice expressions assembled block-diagonally in listed order.
#[derive(Debug, Clone, PartialEq)]
pub enum LatticeTerm {
    /// hyperbolic plane U, optionally rescaled
    U(i64),
    /// root lattice A_n (negative definite), optionally rescaled
    A(usize, i64),
    /// rank-1 lattice <d>
    Rank1(i64),
    /// explicit gram block, optionally rescaled
    Gram(Vec<Vec<i64>>, i64),
}

pub fn gram_u() -> IntMat {
    IntMat::from_rows(&[vec![0, 1], vec![1, 0]])
}

pub fn gram_a(n: usize) -> IntMat {
    let mut g = IntMat::zero(n, n);
    for i in 0..n {
        g[(i, i)] = int(-2);
        if i + 1 < n {
            g[(i, i + 1)] = int(-1);
            g[(i + 1, i)] = int(-1);
        }
    }
    g
}

/// Assemble a lattice from a list of (term, multiplicity) blocks.
pub fn build_lattice(terms: &[(LatticeTerm, usize)]) -> Result<LatRef> {
    let mut blocks: Vec<IntMat> = Vec::new();
    for (term, mult) in terms {
        let block = match term {
            LatticeTerm::U(m) => scale_gram(&gram_u(), *m),
            LatticeTerm::A(n, m) => {
                if *n == 0 {
                    return Err(Error::Precondition("A0 has rank 0".into()));
                }
                scale_gram(&gram_a(*n), *m)
            }
            LatticeTerm::Rank1(d) => {
                let mut g = IntMat::zero(1, 1);
                g[(0, 0)] = int(*d);
                g
            }
            LatticeTerm::Gram(rows, m) => {
                let g = IntMat::from_rows(rows);
                if !g.is_symmetric() {
                    return Err(Error::NotSymmetric);
                }
                scale_gram(&g, *m)
            }
        };
        for _ in 0..*mult {
            blocks.push(block.clone());
        }
    }
    let n: usize = blocks.iter().map(|b| b.rows()).sum();
    let mut gram = IntMat::zero(n, n);
    let mut off = 0;
    for b in &blocks {
        for i in 0..b.rows() {
            for j in 0..b.cols() {
                gram[(off + i, off + j)] = b[(i, j)].clone();
            }
        }
        off += b.rows();
    }
    Lattice::new(gram)
}

fn scale_gram(g: &IntMat, m: i64) -> IntMat {
    let mut out = g.clone();
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            out[(i, j)] = &g[(i, j)] * int(m);
        }
    }
    out
}

/// A maximal overlattice L subset Lp together with the coordinate embedding:
/// `embed` maps L-coordinates to Lp-coordinates, `|det embed| = [Lp : L]`,
/// and `embed^T G(Lp) embed = G(L)`.
pub struct Overlattice {
    pub lattice: LatRef,
    pub embed: IntMat,
}

/// Greedy maximal overlattice: scan D(L) elements in lexicographic
/// exponent order, adjoin the first isotropic element orthogonal to the glue
/// found so far, repeat. Deterministic.
pub fn maximal_overlattice(lat: &LatRef) -> Result<Overlattice> {
    let n = lat.rank();
    let mut glue: Vec<ZVec> = Vec::new();
    let dg = lat.disc_group().clone();
    loop {
        let mut found = None;
        'scan: for e in dg.elements() {
            if e.iter().all(|x| x.is_zero()) {
                continue;
            }
            if !dg.q_value(lat, &e).is_zero() {
                continue;
            }
            for h in &glue {
                if !dg.b_value(lat, &e, h).is_zero() {
                    continue 'scan;
                }
            }
            // skip elements already inside the generated glue subgroup
            if subgroup_contains(&dg, &glue, &e) {
                continue;
            }
            found = Some(e);
            break;
        }
        match found {
            Some(e) => glue.push(e),
            None => break,
        }
    }
    // columns: identity plus lifts of the glue generators
    let mut cols: Vec<QVec> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { Rat::one() } else { Rat::zero() }).collect())
        .collect();
    for g in &glue {
        cols.push(dg.lift(g));
    }
    let mut den = Int::one();
    for c in &cols {
        for x in c {
            den = den.lcm(x.denom());
        }
    }
    let int_cols: Vec<ZVec> = cols
        .iter()
        .map(|c| c.iter().map(|x| (x * rat_of(&den)).to_integer()).collect())
        .collect();
    let b_int = hnf_columns(&IntMat::from_columns(&int_cols)); // basis of den * Lp
    let bq = b_int.to_rat();
    let mut basis = RatMat::zero(n, n);
    for i in 0..n {
        for j in 0..n {
            basis[(i, j)] = &bq[(i, j)] / rat_of(&den);
        }
    }
    // Gram of Lp and the embedding of L into it
    let gq = lat.gram().to_rat();
    let gramp = basis.transpose().mul(&gq).mul(&basis);
    let gramp = gramp.to_int().ok_or(Error::Precondition("overlattice gram not integral".into()))?;
    let lp = Lattice::new(gramp)?;
    let embed = basis
        .inverse()
        .expect("basis invertible")
        .to_int()
        .expect("embedding integral");
    Ok(Overlattice { lattice: lp, embed })
}

fn subgroup_contains(dg: &DiscGroup, gens: &[ZVec], e: &[Int]) -> bool {
    // closure by BFS; groups here are tiny
    use std::collections::HashSet;
    let k = dg.orders.len();
    let zero: ZVec = vec![Int::zero(); k];
    let mut seen: HashSet<Vec<Int>> = HashSet::new();
    seen.insert(zero.clone());
    let mut frontier = vec![zero];
    while let Some(cur) = frontier.pop() {
        for g in gens {
            let next: ZVec = cur
                .iter()
                .zip(g)
                .zip(&dg.orders)
                .map(|((a, b), d)| (a + b).mod_floor(d))
                .collect();
            if seen.insert(next.clone()) {
                frontier.push(next);
            }
        }
    }
    seen.contains(&e.to_vec())
}

/// Quotient Gram of S^perp / S for a totally isotropic primitive sublattice
/// S inside its saturated orthogonal complement `comp` (computed in the
/// ambient lattice). The bilinear form descends because S pairs to zero
/// with all of S^perp.
pub fn isotropic_quotient_gram(lat: &Lattice, s: &Sublattice, comp: &Sublattice) -> IntMat {
    let b = comp.canonical();
    let w = s.canonical();
    // express S inside comp: b * x = w
    let bq = b.to_rat();
    let mut x_cols: Vec<ZVec> = Vec::new();
    for j in 0..w.cols() {
        let col = z_to_q(&w.column(j));
        let sol = solve_columns(&bq, &col).expect("S inside S^perp");
        x_cols.push(q_to_z(&sol).expect("integral expression"));
    }
    let x = IntMat::from_columns(&x_cols);
    let snf = smith_normal_form(&x);
    // new basis of comp: b * p_inv; first cols span S, remaining give quotient
    let bp = b.mul(&snf.p_inv);
    let r = w.cols();
    let mut rest = IntMat::zero(b.rows(), b.cols() - r);
    for j in r..b.cols() {
        for i in 0..b.rows() {
            rest[(i, j - r)] = bp[(i, j)].clone();
        }
    }
    lat.gram_of(&rest)
}

fn solve_columns(m: &RatMat, b: &[Rat]) -> Option<Vec<Rat>> {
    m.solve(b)
}

/// Minimal positive rational c with c*v in L, plus w = c*v.
pub fn minimal_scale(v: &[Rat]) -> (Rat, ZVec) {
    let (c, w) = primitive_scale(v);
    (c, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::{qvec, zvec};

    fn u_plus_a3() -> LatRef {
        build_lattice(&[(LatticeTerm::U(1), 1), (LatticeTerm::A(3, 1), 1)]).unwrap()
    }

    #[test]
    fn build_basics() {
        let u = build_lattice(&[(LatticeTerm::U(1), 1)]).unwrap();
        assert_eq!(u.gram(), &gram_u());
        assert_eq!(u.signature(), (1, 1));

        let a3 = build_lattice(&[(LatticeTerm::A(3, 1), 1)]).unwrap();
        assert_eq!(
            a3.gram(),
            &IntMat::from_rows(&[vec![-2, -1, 0], vec![-1, -2, -1], vec![0, -1, -2]])
        );

        let l = build_lattice(&[(LatticeTerm::U(1), 2), (LatticeTerm::A(2, 1), 1)]).unwrap();
        assert_eq!(l.rank(), 6);
        assert_eq!(l.signature(), (2, 4));
    }

    #[test]
    fn build_rejects_odd_and_degenerate() {
        assert!(build_lattice(&[(LatticeTerm::Rank1(3), 1)]).is_err());
        let g = LatticeTerm::Gram(vec![vec![2, 2], vec![2, 2]], 1);
        assert!(build_lattice(&[(g, 1)]).is_err());
    }

    #[test]
    fn disc_group_unimodular_trivial() {
        let u = build_lattice(&[(LatticeTerm::U(1), 1)]).unwrap();
        assert!(u.disc_group().is_trivial());
    }

    #[test]
    fn disc_group_u_a3() {
        let l = u_plus_a3();
        let dg = l.disc_group();
        assert_eq!(dg.orders, vec![int(4)]);
        // the paper's generator 1/4 (0,0,3,-2,1) must generate: its class
        // has order 4 and q-value equal to that of our generator or its
        // inverse/scalar multiples
        let w = vec![
            Rat::new(int(0), int(1)),
            Rat::new(int(0), int(1)),
            Rat::new(int(3), int(4)),
            Rat::new(int(-2), int(4)),
            Rat::new(int(1), int(4)),
        ];
        assert!(l.in_dual(&w));
        let coords = l.disc_coords(&w).unwrap();
        // order of the class is 4
        let e = &coords[0];
        assert!(e.gcd(&int(4)).is_one(), "lift must generate C4, got exponent {}", e);
    }

    #[test]
    fn disc_group_gk_lattice() {
        let l = build_lattice(&[
            (LatticeTerm::U(1), 2),
            (LatticeTerm::Rank1(-6), 1),
            (LatticeTerm::Rank1(-2), 1),
        ])
        .unwrap();
        let dg = l.disc_group();
        assert_eq!(dg.orders, vec![int(2), int(6)]);
    }

    #[test]
    fn divisor_cases() {
        let u = build_lattice(&[(LatticeTerm::U(1), 1)]).unwrap();
        let (d, _) = u.divisor_and_star(&zvec(&[1, 0])).unwrap();
        assert_eq!(d, int(1));

        let gk = build_lattice(&[
            (LatticeTerm::U(1), 2),
            (LatticeTerm::Rank1(-6), 1),
            (LatticeTerm::Rank1(-2), 1),
        ])
        .unwrap();
        let (d, _) = gk.divisor_and_star(&zvec(&[0, 0, 0, 0, 1, 0])).unwrap();
        assert_eq!(d, int(6));

        let l = u_plus_a3();
        let (d, star) = l.divisor_and_star(&zvec(&[0, 0, 3, -2, 1])).unwrap();
        assert_eq!(d, int(4));
        assert!(l.in_dual(&star));
        assert!(u.divisor_and_star(&zvec(&[0, 0])).is_err());
    }

    #[test]
    fn complement_matches_printed_grams() {
        let l = u_plus_a3();
        let k1 = l.orthogonal_complement(&zvec(&[4, 4, 1, 2, -1])).unwrap();
        let g1 = l.gram_of(k1.basis());
        assert_eq!(
            g1,
            IntMat::from_rows(&[
                vec![-2, -1, 1, -1],
                vec![-1, -2, 1, -1],
                vec![1, 1, -2, 1],
                vec![-1, -1, 1, -2],
            ])
        );
        let k2 = l.orthogonal_complement(&zvec(&[36, 144, 5, -30, 83])).unwrap();
        let g2 = l.gram_of(k2.basis());
        assert_eq!(g2[(0, 0)], int(-54432));
        assert_eq!(
            g2,
            IntMat::from_rows(&[
                vec![-54432, -13607, -7740, -10260],
                vec![-13607, -3402, -1935, -2565],
                vec![-7740, -1935, -1102, -1459],
                vec![-10260, -2565, -1459, -1934],
            ])
        );
    }

    #[test]
    fn complement_properties() {
        let l = u_plus_a3();
        let v = zvec(&[4, 4, 1, 2, -1]);
        let k = l.orthogonal_complement(&v).unwrap();
        for j in 0..k.basis().cols() {
            assert!(l.ip_z(&k.basis().column(j), &v).is_zero());
        }
        assert!(k.is_saturated());
    }

    #[test]
    fn complement_of_isotropic_vector_is_degenerate() {
        let u = build_lattice(&[(LatticeTerm::U(1), 1)]).unwrap();
        let k = u.orthogonal_complement(&zvec(&[1, 0])).unwrap();
        let g = u.gram_of(k.basis());
        assert_eq!(g, IntMat::zero(1, 1)); // e1 itself, degenerate Gram
    }

    #[test]
    fn disc_lift_orders() {
        let l = build_lattice(&[
            (LatticeTerm::U(1), 2),
            (LatticeTerm::Rank1(-6), 1),
            (LatticeTerm::Rank1(-2), 1),
        ])
        .unwrap();
        let dg = l.disc_group();
        for (d, lift) in dg.orders.iter().zip(&dg.lifts) {
            // d * lift lands in L, no smaller positive multiple does
            let mut k = Int::one();
            while &k < d {
                let scaled: Vec<Rat> = lift.iter().map(|c| c * rat_of(&k)).collect();
                assert!(!scaled.iter().all(|c| c.is_integer()), "order too small");
                k += 1;
            }
            let scaled: Vec<Rat> = lift.iter().map(|c| c * rat_of(d)).collect();
            assert!(scaled.iter().all(|c| c.is_integer()));
        }
    }

    #[test]
    fn maximal_overlattice_fixed_points() {
        let l = build_lattice(&[(LatticeTerm::U(1), 2), (LatticeTerm::A(2, 1), 1)]).unwrap();
        let ov = maximal_overlattice(&l).unwrap();
        assert_eq!(ov.lattice.gram(), l.gram());
        assert_eq!(ov.embed, IntMat::identity(6));
        assert!(l.is_maximal());

        let a2 = build_lattice(&[(LatticeTerm::A(2, 1), 1)]).unwrap();
        let ov = maximal_overlattice(&a2).unwrap();
        assert_eq!(ov.embed, IntMat::identity(2));
    }

    #[test]
    fn maximal_overlattice_gk() {
        let l = build_lattice(&[
            (LatticeTerm::U(1), 2),
            (LatticeTerm::Rank1(-6), 1),
            (LatticeTerm::Rank1(-2), 1),
        ])
        .unwrap();
        let ov = maximal_overlattice(&l).unwrap();
        // index 2, determinant drops 12 -> 3
        assert_eq!(ov.embed.det().abs(), int(2));
        assert_eq!(ov.lattice.det().abs(), int(3));
        assert!(ov.lattice.is_maximal());
        // gram transport: embed^T G(Lp) embed = G(L)
        let lhs = ov.embed.transpose().mul(ov.lattice.gram()).mul(&ov.embed);
        assert_eq!(&lhs, l.gram());
        // idempotent
        let again = maximal_overlattice(&ov.lattice).unwrap();
        assert_eq!(again.embed, IntMat::identity(6));
    }

    #[test]
    fn sublattice_canonical_equality() {
        let a = Sublattice::from_vectors(&[zvec(&[1, 1, 0])]);
        let b = Sublattice::from_vectors(&[zvec(&[-2, -2, 0])]);
        assert_eq!(a.canonical(), b.canonical());
        assert!(a.contains_vector(&qvec(&[3, 3, 0])));
        assert!(!a.contains_vector(&qvec(&[1, 0, 0])));
    }
}
