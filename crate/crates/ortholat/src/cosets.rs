//! Coset transversal enumeration for finite-index subgroup pairs via
//! membership oracles, and principal-congruence transversals in SL(2,Z).
//!
//! The BFS multiplies representatives by the supplied generators (inverses
//! are adjoined automatically) and keeps a candidate iff it lies in a new
//! coset. Coset identity is decided by the exact canonical key of the
//! subgroup when one exists, otherwise by the membership predicate; output
//! order is the deterministic discovery order.

use crate::matrix::{int, Int, IntMat};
use crate::ogroup::{GroupSpec, OrthMap};
use crate::par;
use crate::vectors::ZVec;
use crate::Result;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;

/// A set of coset representatives; `complete` is false when the budget ran
/// out before closure (the listed representatives are still pairwise
/// inequivalent).
#[derive(Clone, Debug)]
pub struct Transversal {
    pub reps: Vec<OrthMap>,
    pub complete: bool,
}

impl Transversal {
    pub fn index(&self) -> usize {
        self.reps.len()
    }
}

fn with_inverses(gens: &[OrthMap]) -> Vec<OrthMap> {
    let mut out: Vec<OrthMap> = Vec::new();
    for g in gens {
        if !out.iter().any(|x| x.mat == g.mat) {
            out.push(g.clone());
        }
        let inv = g.inverse();
        if !out.iter().any(|x| x.mat == inv.mat) {
            out.push(inv);
        }
    }
    out
}

enum CosetIndex {
    Keyed(HashMap<crate::ogroup::CosetKey, usize>),
    Scan,
}

/// Transversal for the left cosets g G1 inside G2 = <gens>: x and y are
/// equivalent iff y^{-1} x lies in G1.
pub fn coset_transversal(gens: &[OrthMap], member_g1: &GroupSpec, budget: usize) -> Transversal {
    let lat = member_g1.ambient.clone();
    let id = OrthMap::identity(lat);
    let gens = with_inverses(gens);
    let keyed = member_g1.coset_key(&id).is_some();
    let mut index = if keyed {
        let mut m = HashMap::new();
        m.insert(member_g1.coset_key(&id).unwrap(), 0usize);
        CosetIndex::Keyed(m)
    } else {
        CosetIndex::Scan
    };
    let mut reps: Vec<OrthMap> = vec![id];
    let mut frontier: Vec<usize> = vec![0];
    let mut complete = true;
    'outer: while !frontier.is_empty() {
        let mut next_frontier = Vec::new();
        // expand the whole frontier in parallel, insert sequentially in order
        let tasks: Vec<(usize, usize)> = frontier
            .iter()
            .flat_map(|&r| (0..gens.len()).map(move |s| (r, s)))
            .collect();
        let batch: Vec<(OrthMap, Option<crate::ogroup::CosetKey>)> = par::map_vec(&tasks, |(r, s)| {
            let cand = reps[*r].compose(&gens[*s]);
            let key = member_g1.coset_key(&cand);
            (cand, key)
        });
        for (cand, key) in batch {
            let is_new = match (&mut index, key) {
                (CosetIndex::Keyed(map), Some(k)) => {
                    match map.entry(k) {
                        std::collections::hash_map::Entry::Occupied(_) => false,
                        std::collections::hash_map::Entry::Vacant(v) => {
                            v.insert(reps.len());
                            true
                        }
                    }
                }
                (CosetIndex::Scan, _) => !reps
                    .iter()
                    .any(|y| member_g1.is_member(&y.inverse().compose(&cand))),
                (CosetIndex::Keyed(_), None) => unreachable!("key availability is static"),
            };
            if is_new {
                next_frontier.push(reps.len());
                reps.push(cand);
                if reps.len() > budget {
                    complete = false;
                    break 'outer;
                }
            }
        }
        frontier = next_frontier;
    }
    Transversal { reps, complete }
}

/// Transversal for the right cosets G1 a inside the group generated by
/// `gens`: a and b are equivalent iff a b^{-1} lies in G1. All generators
/// must lie in the ambient group (for stabilizer use, they must stabilize
/// the object; the caller checks that).
pub fn stab_coset_transversal(
    stab_gens: &[OrthMap],
    member_g1: &GroupSpec,
    budget: usize,
) -> Transversal {
    // right cosets of a's are left cosets of a^{-1}'s: run the keyed BFS on
    // inverses
    let lat = member_g1.ambient.clone();
    let id = OrthMap::identity(lat);
    let gens = with_inverses(stab_gens);
    let keyed = member_g1.coset_key(&id).is_some();
    let mut keymap: HashMap<crate::ogroup::CosetKey, usize> = HashMap::new();
    if keyed {
        keymap.insert(member_g1.coset_key(&id).unwrap(), 0);
    }
    // track (rep, rep_inverse) pairs to avoid repeated inversion
    let mut reps: Vec<(OrthMap, OrthMap)> = vec![(id.clone(), id)];
    let mut frontier: Vec<usize> = vec![0];
    let mut complete = true;
    'outer: while !frontier.is_empty() {
        let mut next_frontier = Vec::new();
        let tasks: Vec<(usize, usize)> = frontier
            .iter()
            .flat_map(|&r| (0..gens.len()).map(move |s| (r, s)))
            .collect();
        let batch: Vec<((OrthMap, OrthMap), Option<crate::ogroup::CosetKey>)> =
            par::map_vec(&tasks, |(r, s)| {
                let cand = reps[*r].0.compose(&gens[*s]);
                let cand_inv = gens[*s].inverse().compose(&reps[*r].1);
                let key = if keyed { member_g1.coset_key(&cand_inv) } else { None };
                ((cand, cand_inv), key)
            });
        for ((cand, cand_inv), key) in batch {
            let is_new = if keyed {
                match keymap.entry(key.expect("keyed")) {
                    std::collections::hash_map::Entry::Occupied(_) => false,
                    std::collections::hash_map::Entry::Vacant(v) => {
                        v.insert(reps.len());
                        true
                    }
                }
            } else {
                !reps.iter().any(|(y, _)| member_g1.is_member(&cand.compose(&y.inverse())))
            };
            if is_new {
                next_frontier.push(reps.len());
                reps.push((cand, cand_inv));
                if reps.len() > budget {
                    complete = false;
                    break 'outer;
                }
            }
        }
        frontier = next_frontier;
    }
    Transversal { reps: reps.into_iter().map(|(r, _)| r).collect(), complete }
}

/// Completeness audit: every representative times every generator lands in
/// an existing coset.
pub fn verify_closure(t: &Transversal, gens: &[OrthMap], member_g1: &GroupSpec) -> bool {
    if !t.complete {
        return false;
    }
    let gens = with_inverses(gens);
    for r in &t.reps {
        for s in &gens {
            let x = r.compose(s);
            if !t.reps.iter().any(|y| member_g1.is_member(&y.inverse().compose(&x))) {
                return false;
            }
        }
    }
    true
}

/// A transversal of Gamma(N) in SL(2,Z): one lift per element of
/// SL(2, Z/N), computed by enumerating SL(2, Z/N) and lifting each matrix
/// to determinant exactly one.
pub fn gamma_n_transversal(n: u64) -> Vec<IntMat> {
    assert!(n >= 1);
    if n == 1 {
        return vec![IntMat::identity(2)];
    }
    let nn = n as i64;
    let mut out = Vec::new();
    for a in 0..nn {
        for b in 0..nn {
            for c in 0..nn {
                for d in 0..nn {
                    if (a * d - b * c).rem_euclid(nn) == 1 {
                        out.push(lift_sl2(&[a, b, c, d], nn));
                    }
                }
            }
        }
    }
    out
}

/// Lift (a,b,c,d) mod n with ad - bc = 1 mod n to an SL(2,Z) matrix
/// congruent to it.
fn lift_sl2(m: &[i64; 4], n: i64) -> IntMat {
    let (a, b, c, d) = (int(m[0]), int(m[1]), int(m[2]), int(m[3]));
    let nn = int(n);
    // find coprime (c', d') congruent to (c, d) mod n
    let (mut cp, mut dp) = (c.clone(), d.clone());
    'search: for i in 0..=n {
        for j in 0..=n {
            let ct = &c + int(i) * &nn;
            let dt = &d + int(j) * &nn;
            if ct.gcd(&dt).is_one() {
                cp = ct;
                dp = dt;
                break 'search;
            }
        }
    }
    debug_assert!(cp.gcd(&dp).is_one(), "no coprime lift found");
    // alpha cp + beta dp = 1
    let (g, alpha, beta) = ext_gcd(&cp, &dp);
    debug_assert!(g.is_one());
    // particular solution x0 dp - y0 cp = 1
    let x0 = beta.clone();
    let y0 = -alpha.clone();
    // adjust by t (cp, dp) to hit (a, b) mod n
    let t = (&alpha * ((&a - &x0).mod_floor(&nn)) + &beta * ((&b - &y0).mod_floor(&nn)))
        .mod_floor(&nn);
    let ap = &x0 + &t * &cp;
    let bp = &y0 + &t * &dp;
    let mut out = IntMat::zero(2, 2);
    out[(0, 0)] = ap;
    out[(0, 1)] = bp;
    out[(1, 0)] = cp;
    out[(1, 1)] = dp;
    debug_assert_eq!(out.det(), Int::one());
    out
}

fn ext_gcd(a: &Int, b: &Int) -> (Int, Int, Int) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (Int::one(), Int::zero());
    let (mut old_t, mut t) = (Int::zero(), Int::one());
    while !r.is_zero() {
        let q = &old_r / &r;
        let tmp = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, tmp);
        let tmp = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, tmp);
        let tmp = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, tmp);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Exponent of the quotient A/B of two full-rank lattices given by rational
/// basis matrices in the same coordinates (B inside A).
pub fn quotient_exponent(a_basis: &crate::matrix::RatMat, b_basis: &crate::matrix::RatMat) -> Result<Int> {
    let ai = a_basis.inverse().ok_or(crate::Error::Degenerate)?;
    let x = ai.mul(b_basis);
    let xi = x.to_int().ok_or(crate::Error::Precondition("B not inside A".into()))?;
    let snf = crate::matrix::smith_normal_form(&xi);
    let divs = snf.divisors();
    Ok(divs.last().cloned().unwrap_or_else(Int::one))
}

/// Group-exponent of a finite abelian group given by invariant factors.
pub fn exponent_of(orders: &[Int]) -> Int {
    orders.last().cloned().unwrap_or_else(Int::one)
}

pub fn zvec_of_mat(m: &IntMat) -> ZVec {
    let mut v = Vec::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            v.push(m[(i, j)].clone());
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, LatticeTerm};
    use crate::ogroup::{generators_oplus_split, oplus_generators_lorentzian, GroupSpec};
    use crate::vectors::zvec;

    fn two_u_a2() -> crate::lattice::LatRef {
        build_lattice(&[(LatticeTerm::U(1), 2), (LatticeTerm::A(2, 1), 1)]).unwrap()
    }

    fn oplus_gens_2u_a2() -> Vec<OrthMap> {
        let lat = two_u_a2();
        let l1 = build_lattice(&[(LatticeTerm::U(1), 1), (LatticeTerm::A(2, 1), 1)]).unwrap();
        let gens1 = oplus_generators_lorentzian(&l1, Some(&zvec(&[1, 1, 0, 0]))).unwrap();
        generators_oplus_split(&lat, &gens1).unwrap()
    }

    #[test]
    fn transversal_blowup_guard_trivial() {
        let lat = two_u_a2();
        let spec = GroupSpec::oplus(&lat);
        // G1 = G2: single coset
        let gens = oplus_gens_2u_a2();
        let t = coset_transversal(&gens, &spec, 100);
        assert!(t.complete);
        assert_eq!(t.index(), 1);
        assert!(t.reps[0].is_identity());
    }

    #[test]
    fn stable_in_oplus_2u_a2_index_two() {
        let lat = two_u_a2();
        let spec = GroupSpec::stable_oplus(&lat);
        let gens = oplus_gens_2u_a2();
        let t = coset_transversal(&gens, &spec, 100);
        assert!(t.complete);
        assert_eq!(t.index(), 2, "index of ~O+ in O+ for 2U+A2");
        assert!(t.reps[0].is_identity());
        // the second representative acts nontrivially on D(L)
        assert!(!spec.is_member(&t.reps[1]));
        assert!(verify_closure(&t, &gens, &spec));
    }

    #[test]
    fn stab_transversal_trivial_when_g1_full() {
        let lat = two_u_a2();
        let spec = GroupSpec::oplus(&lat);
        let gens = oplus_gens_2u_a2();
        let t = stab_coset_transversal(&gens, &spec, 100);
        assert!(t.complete);
        assert_eq!(t.index(), 1);
    }

    #[test]
    fn gamma_n_counts() {
        assert_eq!(gamma_n_transversal(1).len(), 1);
        // |SL(2,Z/2)| = 6, |SL(2,Z/3)| = 24: counts verified by the direct
        // enumeration inside gamma_n_transversal itself; check lift
        // congruence and determinant
        let t2 = gamma_n_transversal(2);
        assert_eq!(t2.len(), 6);
        let t3 = gamma_n_transversal(3);
        assert_eq!(t3.len(), 24);
        for m in t3.iter() {
            assert_eq!(m.det(), Int::one());
        }
        // all distinct mod 3
        let mut seen = std::collections::HashSet::new();
        for m in &t3 {
            let key: Vec<Int> = (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].mod_floor(&int(3)))
                .collect();
            assert!(seen.insert(key), "lifts must be distinct mod N");
        }
    }

    #[test]
    fn quotient_exponent_basics() {
        use crate::matrix::RatMat;
        let a = RatMat::identity(2);
        let mut b = RatMat::identity(2);
        b[(0, 0)] = crate::matrix::rat(2);
        b[(1, 1)] = crate::matrix::rat(6);
        assert_eq!(quotient_exponent(&a, &b).unwrap(), int(6));
    }
}
