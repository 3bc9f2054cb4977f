//! Finite quadratic forms on discriminant groups: Q/2Z-valued values,
//! isomorphism enumeration by backtracking, isotropic elements, and the
//! genus-uniqueness criterion for indefinite lattices.

use crate::lattice::{norm_mod, Lattice};
use crate::matrix::{rat_of, smith_normal_form, Int, IntMat, Rat, RatMat};
use crate::vectors::ZVec;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::collections::HashSet;

/// A finite quadratic form on an abelian group in invariant-factor form:
/// orders d_1 | d_2 | ... (all > 1), q-values on the diagonal (mod 2Z,
/// stored in [0,2)) and pairwise b-values off the diagonal (mod Z, in [0,1)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteQuadraticForm {
    pub orders: Vec<Int>,
    pub q_matrix: RatMat,
}

impl FiniteQuadraticForm {
    /// The discriminant form of a lattice, on its invariant-factor
    /// generators.
    pub fn of_lattice(lat: &Lattice) -> Self {
        let dg = lat.disc_group();
        let k = dg.orders.len();
        let mut q = RatMat::zero(k, k);
        for i in 0..k {
            for j in 0..k {
                let val = lat.ip(&dg.lifts[i], &dg.lifts[j]);
                q[(i, j)] = if i == j { norm_mod(&val, 2) } else { norm_mod(&val, 1) };
            }
        }
        FiniteQuadraticForm { orders: dg.orders.clone(), q_matrix: q }
    }

    /// Build a form from arbitrary cyclic orders and a raw value matrix
    /// (diagonal mod 2Z, off-diagonal mod Z), renormalizing the group into
    /// invariant-factor shape.
    pub fn new_normalized(orders: &[Int], values: &RatMat) -> Self {
        let k = orders.len();
        assert_eq!(values.rows(), k);
        let mut rel = IntMat::zero(k, k);
        for i in 0..k {
            rel[(i, i)] = orders[i].clone();
        }
        let snf = smith_normal_form(&rel);
        // new generator j = sum_i p_inv[i][j] * old generator i
        let mut keep = Vec::new();
        let mut divs = Vec::new();
        for j in 0..k {
            if snf.d[(j, j)] > Int::one() {
                keep.push(j);
                divs.push(snf.d[(j, j)].clone());
            }
        }
        let mut q = RatMat::zero(keep.len(), keep.len());
        for (a, &ja) in keep.iter().enumerate() {
            for (b, &jb) in keep.iter().enumerate() {
                let mut val = Rat::zero();
                for i1 in 0..k {
                    for i2 in 0..k {
                        let c1 = rat_of(&snf.p_inv[(i1, ja)]);
                        let c2 = rat_of(&snf.p_inv[(i2, jb)]);
                        val += c1 * c2 * &values[(i1, i2)];
                    }
                }
                q[(a, b)] = if a == b { norm_mod(&val, 2) } else { norm_mod(&val, 1) };
            }
        }
        FiniteQuadraticForm { orders: divs, q_matrix: q }
    }

    pub fn num_generators(&self) -> usize {
        self.orders.len()
    }

    pub fn group_order(&self) -> Int {
        self.orders.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    /// All elements as exponent vectors, lexicographic.
    pub fn elements(&self) -> Vec<ZVec> {
        elements_of(&self.orders)
    }

    pub fn reduce(&self, e: &[Int]) -> ZVec {
        e.iter().zip(&self.orders).map(|(x, d)| x.mod_floor(d)).collect()
    }

    pub fn q_value(&self, e: &[Int]) -> Rat {
        let k = self.orders.len();
        let mut v = Rat::zero();
        for i in 0..k {
            for j in 0..k {
                if !e[i].is_zero() && !e[j].is_zero() {
                    v += rat_of(&e[i]) * rat_of(&e[j]) * &self.q_matrix[(i, j)];
                }
            }
        }
        norm_mod(&v, 2)
    }

    pub fn b_value(&self, a: &[Int], b: &[Int]) -> Rat {
        let k = self.orders.len();
        let mut v = Rat::zero();
        for i in 0..k {
            for j in 0..k {
                if !a[i].is_zero() && !b[j].is_zero() {
                    v += rat_of(&a[i]) * rat_of(&b[j]) * &self.q_matrix[(i, j)];
                }
            }
        }
        norm_mod(&v, 1)
    }

    pub fn element_order(&self, e: &[Int]) -> Int {
        let mut ord = Int::one();
        for (x, d) in e.iter().zip(&self.orders) {
            if x.is_zero() {
                continue;
            }
            let val = d / x.gcd(d);
            ord = ord.lcm(&val);
        }
        ord
    }

    /// All x with q(x) = 0 mod 2Z, in lexicographic exponent order
    /// (contains the zero element).
    pub fn isotropic_elements(&self) -> Vec<ZVec> {
        self.elements().into_iter().filter(|e| self.q_value(e).is_zero()).collect()
    }
}

/// A homomorphism between finite abelian groups in invariant-factor form,
/// stored as exponent images of the domain generators. The
/// `form_compatible` flag records whether it was produced as (or verified to
/// be) an isometry of quadratic forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FqfMap {
    pub dom_orders: Vec<Int>,
    pub cod_orders: Vec<Int>,
    pub images: Vec<ZVec>,
    pub form_compatible: bool,
}

impl FqfMap {
    pub fn identity(orders: &[Int]) -> Self {
        let k = orders.len();
        let images = (0..k)
            .map(|i| (0..k).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
            .collect();
        FqfMap {
            dom_orders: orders.to_vec(),
            cod_orders: orders.to_vec(),
            images,
            form_compatible: true,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.dom_orders == self.cod_orders
            && self.images.iter().enumerate().all(|(i, im)| {
                im.iter().enumerate().all(|(j, x)| {
                    if i == j {
                        (x - Int::one()).mod_floor(&self.cod_orders[j]).is_zero()
                    } else {
                        x.mod_floor(&self.cod_orders[j]).is_zero()
                    }
                })
            })
    }

    pub fn apply(&self, e: &[Int]) -> ZVec {
        let kc = self.cod_orders.len();
        let mut out = vec![Int::zero(); kc];
        for (x, im) in e.iter().zip(&self.images) {
            if x.is_zero() {
                continue;
            }
            for j in 0..kc {
                out[j] += x * &im[j];
            }
        }
        for (o, d) in out.iter_mut().zip(&self.cod_orders) {
            *o = o.mod_floor(d);
        }
        out
    }

    /// other after self (domain of self, codomain of other).
    pub fn then(&self, other: &FqfMap) -> FqfMap {
        assert_eq!(self.cod_orders, other.dom_orders);
        let images = self.images.iter().map(|im| other.apply(im)).collect();
        FqfMap {
            dom_orders: self.dom_orders.clone(),
            cod_orders: other.cod_orders.clone(),
            images,
            form_compatible: self.form_compatible && other.form_compatible,
        }
    }

    /// Inverse of a bijection, by exhausting the (small) domain.
    pub fn inverse(&self) -> Option<FqfMap> {
        use std::collections::HashMap;
        let mut table: HashMap<ZVec, ZVec> = HashMap::new();
        for e in elements_of(&self.dom_orders) {
            table.insert(self.apply(&e), e);
        }
        let kc = self.cod_orders.len();
        let mut images = Vec::with_capacity(kc);
        for i in 0..kc {
            let mut gen = vec![Int::zero(); kc];
            gen[i] = Int::one();
            images.push(table.get(&gen)?.clone());
        }
        Some(FqfMap {
            dom_orders: self.cod_orders.clone(),
            cod_orders: self.dom_orders.clone(),
            images,
            form_compatible: self.form_compatible,
        })
    }

    pub fn is_bijective(&self) -> bool {
        if self.dom_orders.iter().product::<Int>() != self.cod_orders.iter().product::<Int>() {
            return false;
        }
        let mut seen = HashSet::new();
        for e in elements_of(&self.dom_orders) {
            if !seen.insert(self.apply(&e)) {
                return false;
            }
        }
        true
    }

    /// Canonical reduced representation for equality tests.
    pub fn normalized(&self) -> FqfMap {
        let images = self
            .images
            .iter()
            .map(|im| im.iter().zip(&self.cod_orders).map(|(x, d)| x.mod_floor(d)).collect())
            .collect();
        FqfMap {
            dom_orders: self.dom_orders.clone(),
            cod_orders: self.cod_orders.clone(),
            images,
            form_compatible: self.form_compatible,
        }
    }
}

pub fn elements_of(orders: &[Int]) -> Vec<ZVec> {
    let mut out = vec![vec![]];
    for d in orders {
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

/// Every group isomorphism g with q2(g(x)) = q1(x), found by backtracking
/// over generator images with early q/b pruning. Empty when the underlying
/// groups differ.
pub fn iso_fqf(q1: &FiniteQuadraticForm, q2: &FiniteQuadraticForm) -> Vec<FqfMap> {
    if q1.orders != q2.orders {
        return Vec::new();
    }
    let k = q1.orders.len();
    if k == 0 {
        return vec![FqfMap::identity(&[])];
    }
    let elems2 = q2.elements();
    // candidate images per generator: order divides d_i, same q-value
    let cands: Vec<Vec<ZVec>> = (0..k)
        .map(|i| {
            let d = &q1.orders[i];
            let mut gen = vec![Int::zero(); k];
            gen[i] = Int::one();
            let qv = q1.q_value(&gen);
            elems2
                .iter()
                .filter(|e| {
                    let ord = q2.element_order(e);
                    (d % ord).is_zero() && q2.q_value(e) == qv
                })
                .cloned()
                .collect()
        })
        .collect();

    let mut found = Vec::new();
    let mut chosen: Vec<ZVec> = Vec::new();
    backtrack(q1, q2, &cands, &mut chosen, &mut found);
    found
}

fn backtrack(
    q1: &FiniteQuadraticForm,
    q2: &FiniteQuadraticForm,
    cands: &[Vec<ZVec>],
    chosen: &mut Vec<ZVec>,
    found: &mut Vec<FqfMap>,
) {
    let i = chosen.len();
    let k = q1.orders.len();
    if i == k {
        let map = FqfMap {
            dom_orders: q1.orders.clone(),
            cod_orders: q2.orders.clone(),
            images: chosen.clone(),
            form_compatible: true,
        };
        if map.is_bijective() {
            found.push(map);
        }
        return;
    }
    let mut gi = vec![Int::zero(); k];
    gi[i] = Int::one();
    'cand: for c in &cands[i] {
        for (j, prev) in chosen.iter().enumerate() {
            let mut gj = vec![Int::zero(); k];
            gj[j] = Int::one();
            if q2.b_value(c, prev) != q1.b_value(&gi, &gj) {
                continue 'cand;
            }
        }
        chosen.push(c.clone());
        backtrack(q1, q2, cands, chosen, found);
        chosen.pop();
    }
}

/// The orthogonal group of a finite quadratic form.
pub fn orthogonal_group(q: &FiniteQuadraticForm) -> Vec<FqfMap> {
    iso_fqf(q, q)
}

/// Closure of a set of maps inside O(q) under composition.
pub fn subgroup_closure(orders: &[Int], gens: &[FqfMap]) -> Vec<FqfMap> {
    let mut set: Vec<FqfMap> = vec![FqfMap::identity(orders)];
    let mut keys: HashSet<Vec<ZVec>> = HashSet::new();
    keys.insert(set[0].normalized().images);
    let mut frontier = set.clone();
    while let Some(cur) = frontier.pop() {
        for g in gens {
            let next = cur.then(g).normalized();
            if keys.insert(next.images.clone()) {
                set.push(next.clone());
                frontier.push(next);
            }
        }
    }
    set
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenusVerdict {
    Applies,
    Inconclusive,
}

/// Criterion for a signature and discriminant form to determine a unique
/// genus with surjective O(L) -> O(D(L)): t+ >= 1, t- >= 1, rank >= 3 and
/// rank >= 2 + l(q).
pub fn unique_genus_check(sig: (usize, usize), q: &FiniteQuadraticForm) -> GenusVerdict {
    let (tp, tm) = sig;
    let rank = tp + tm;
    let l = q.num_generators();
    if tp >= 1 && tm >= 1 && rank >= 3 && rank >= 2 + l {
        GenusVerdict::Applies
    } else {
        GenusVerdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, LatticeTerm};
    use crate::matrix::{int, rat};
    use num_traits::Signed;

    fn gk_lattice() -> crate::lattice::LatRef {
        build_lattice(&[
            (LatticeTerm::U(1), 2),
            (LatticeTerm::Rank1(-6), 1),
            (LatticeTerm::Rank1(-2), 1),
        ])
        .unwrap()
    }

    fn u_a3() -> crate::lattice::LatRef {
        build_lattice(&[(LatticeTerm::U(1), 1), (LatticeTerm::A(3, 1), 1)]).unwrap()
    }

    /// Reference form for q(a,b,c) = -a^2/2 - 3b^2/2 - 2c^2/3 on C2+C2+C3.
    fn gk_reference_form() -> FiniteQuadraticForm {
        let orders = vec![int(2), int(2), int(3)];
        let mut vals = RatMat::zero(3, 3);
        vals[(0, 0)] = Rat::new(int(-1), int(2));
        vals[(1, 1)] = Rat::new(int(-3), int(2));
        vals[(2, 2)] = Rat::new(int(-2), int(3));
        FiniteQuadraticForm::new_normalized(&orders, &vals)
    }

    #[test]
    fn disc_form_gk_matches_reference() {
        let q = FiniteQuadraticForm::of_lattice(&gk_lattice());
        assert_eq!(q.orders, vec![int(2), int(6)]);
        let r = gk_reference_form();
        assert_eq!(r.orders, vec![int(2), int(6)]);
        assert!(!iso_fqf(&q, &r).is_empty(), "forms must be isomorphic");
    }

    #[test]
    fn disc_form_trivial_for_u() {
        let u = build_lattice(&[(LatticeTerm::U(1), 1)]).unwrap();
        let q = FiniteQuadraticForm::of_lattice(&u);
        assert!(q.is_trivial());
        assert_eq!(q.isotropic_elements(), vec![Vec::<Int>::new()]);
    }

    #[test]
    fn isotropic_elements_gk() {
        let q = FiniteQuadraticForm::of_lattice(&gk_lattice());
        let iso = q.isotropic_elements();
        // exactly two: zero and the glue element of order 2
        assert_eq!(iso.len(), 2);
        assert!(iso[0].iter().all(|x| x.is_zero()));
        assert_eq!(q.element_order(&iso[1]), int(2));
    }

    #[test]
    fn isotropic_elements_a3() {
        let a3 = build_lattice(&[(LatticeTerm::A(3, 1), 1)]).unwrap();
        let q = FiniteQuadraticForm::of_lattice(&a3);
        assert_eq!(q.orders, vec![int(4)]);
        // q(c) = -3c^2/4: evaluating at c = 0..3 leaves only 0 isotropic
        let iso = q.isotropic_elements();
        assert_eq!(iso, vec![vec![int(0)]]);
    }

    #[test]
    fn iso_fqf_self_contains_identity() {
        let q = FiniteQuadraticForm::of_lattice(&gk_lattice());
        let isos = iso_fqf(&q, &q);
        assert!(isos.iter().any(|m| m.is_identity()));
        // group property: closed under composition and inversion
        for m in &isos {
            assert!(m.is_bijective());
            let inv = m.inverse().unwrap();
            assert!(isos.iter().any(|x| x.normalized().images == inv.normalized().images));
        }
    }

    #[test]
    fn iso_fqf_distinct_groups_empty() {
        let c2 = FiniteQuadraticForm::new_normalized(&[int(2)], &{
            let mut m = RatMat::zero(1, 1);
            m[(0, 0)] = Rat::new(int(-1), int(2));
            m
        });
        let c3 = FiniteQuadraticForm::new_normalized(&[int(3)], &{
            let mut m = RatMat::zero(1, 1);
            m[(0, 0)] = Rat::new(int(-2), int(3));
            m
        });
        assert!(iso_fqf(&c2, &c3).is_empty());
    }

    #[test]
    fn bilinearity_exhaustive() {
        // b(x,y) = (q(x+y) - q(x) - q(y))/2 mod Z
        for lat in [gk_lattice(), u_a3()] {
            let q = FiniteQuadraticForm::of_lattice(&lat);
            let elems = q.elements();
            for x in &elems {
                for y in &elems {
                    let sum: Vec<Int> = x.iter().zip(y).map(|(a, b)| a + b).collect();
                    let sum = q.reduce(&sum);
                    let lhs = crate::lattice::norm_mod(
                        &((q.q_value(&sum) - q.q_value(x) - q.q_value(y)) / rat(2)),
                        1,
                    );
                    assert_eq!(lhs, q.b_value(x, y));
                }
            }
        }
    }

    #[test]
    fn isotropic_closed_under_negation() {
        let q = FiniteQuadraticForm::of_lattice(&gk_lattice());
        let iso = q.isotropic_elements();
        for e in &iso {
            let neg: Vec<Int> = e.iter().map(|x| -x.clone()).collect();
            let neg = q.reduce(&neg);
            assert!(iso.contains(&neg));
        }
    }

    #[test]
    fn genus_checks() {
        let l = u_a3();
        let q = FiniteQuadraticForm::of_lattice(&l);
        assert_eq!(unique_genus_check(l.signature(), &q), GenusVerdict::Applies);

        let l2 = build_lattice(&[(LatticeTerm::U(1), 2), (LatticeTerm::A(2, 1), 1)]).unwrap();
        let q2 = FiniteQuadraticForm::of_lattice(&l2);
        assert_eq!(unique_genus_check(l2.signature(), &q2), GenusVerdict::Applies);

        let m2 = build_lattice(&[(LatticeTerm::Rank1(-2), 1)]).unwrap();
        let qm = FiniteQuadraticForm::of_lattice(&m2);
        assert_eq!(unique_genus_check(m2.signature(), &qm), GenusVerdict::Inconclusive);
    }

    #[test]
    fn q_values_in_range() {
        let q = FiniteQuadraticForm::of_lattice(&gk_lattice());
        for e in q.elements() {
            let v = q.q_value(&e);
            assert!(!v.is_negative() && v < rat(2));
        }
    }
}
