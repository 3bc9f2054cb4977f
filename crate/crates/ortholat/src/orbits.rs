//! Orbit equivalence of non-isotropic vectors under computable subgroups of
//! the orthogonal group: the definite-complement algorithm (which produces
//! an integral witness) and the indefinite-complement algorithm (which
//! certifies existence through the discriminant glue), plus the spinor
//! upgrade via +-2 representation.

use crate::discform::{iso_fqf, unique_genus_check, FiniteQuadraticForm, FqfMap, GenusVerdict};
use crate::isometry::{iso_definite, represents_norm, DefiniteLattice, NormSearch};
use crate::lattice::{LatRef, Lattice};
use crate::matrix::{inertia, int, rat_of, Int, IntMat, Rat, RatMat};
use crate::ogroup::{GroupSpec, OrthMap};
use crate::par;
use crate::vectors::{primitive_scale, QVec, ZVec};
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Outcome of an orbit-equivalence test.
#[derive(Clone, Debug)]
pub enum OrbitVerdict {
    Equivalent {
        /// integral witness when the definite-complement route ran
        witness: Option<OrthMap>,
        /// induced map on D(L) when the indefinite route certified existence
        disc_witness: Option<FqfMap>,
    },
    NotEquivalent,
    Inconclusive(String),
}

impl OrbitVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, OrbitVerdict::Equivalent { .. })
    }
}

/// Glue data of a vector: H = L/(<w> + K) inside D(<w>) + D(K).
#[derive(Clone, Debug)]
pub struct GlueData {
    /// orders of the ambient product group: |w^2| then the invariant
    /// factors of D(K) (including trivial ones)
    pub ambient_orders: Vec<Int>,
    /// all elements of H as exponent vectors in the ambient product
    pub h_elements: Vec<ZVec>,
}

impl GlueData {
    pub fn order(&self) -> usize {
        self.h_elements.len()
    }

    /// element orders, sorted; two finite abelian groups are isomorphic iff
    /// these multisets agree
    pub fn order_multiset(&self) -> Vec<Int> {
        let mut orders: Vec<Int> = self
            .h_elements
            .iter()
            .map(|e| {
                let mut ord = Int::from(1);
                for (x, d) in e.iter().zip(&self.ambient_orders) {
                    if x.is_zero() {
                        continue;
                    }
                    ord = ord.lcm(&(d / x.gcd(d)));
                }
                ord
            })
            .collect();
        orders.sort();
        orders
    }

    /// projection of H to the D(K) factor (dropping the first coordinate)
    pub fn k_projection(&self) -> Vec<ZVec> {
        self.h_elements
            .iter()
            .map(|e| {
                e[1..].iter().zip(&self.ambient_orders[1..]).map(|(x, d)| x.mod_floor(d)).collect()
            })
            .collect()
    }
}

/// Decide v1 ~ v2 under the group when v1 is non-isotropic with definite
/// orthogonal complement: scale and norm tests, complements via the
/// canonical row Smith transform, candidate isometries of the definite
/// complements, and the assembled map tested for membership. The first
/// verified witness is returned.
pub fn equiv_definite_complement(
    lat: &LatRef,
    spec: &GroupSpec,
    v1: &[Rat],
    v2: &[Rat],
) -> Result<OrbitVerdict> {
    let n = lat.rank();
    if lat.norm(v1).is_zero() {
        return Err(Error::Isotropic);
    }
    let (c1, w1) = primitive_scale(v1);
    let (c2, w2) = primitive_scale(v2);
    if lat.norm(v1) != lat.norm(v2) || c1 != c2 {
        return Ok(OrbitVerdict::NotEquivalent);
    }
    let k1 = lat.orthogonal_complement(&w1)?;
    let k2 = lat.orthogonal_complement(&w2)?;
    let gk1 = lat.gram_of(k1.basis());
    let gk2 = lat.gram_of(k2.basis());
    let (pos, neg, zero) = inertia(&gk1.to_rat());
    if zero != 0 || (pos > 0 && neg > 0) {
        return Err(Error::NotDefinite);
    }
    let dk1 = DefiniteLattice::new(gk1)?;
    let dk2 = match DefiniteLattice::new(gk2) {
        Ok(d) => d,
        Err(_) => return Ok(OrbitVerdict::NotEquivalent),
    };
    // iota_i = (w_i | complement basis)
    let iota1 = assemble_iota(&w1, k1.basis());
    let iota2 = assemble_iota(&w2, k2.basis());
    let iota1_inv = iota1.to_rat().inverse().ok_or(Error::Degenerate)?;
    let isos = iso_definite(&dk1, &dk2)?;
    let hit = par::find_map_first(&isos, |psi| {
        let mut phi_psi = RatMat::identity(n);
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                phi_psi[(i + 1, j + 1)] = rat_of(&psi[(i, j)]);
            }
        }
        let theta = iota2.to_rat().mul(&phi_psi).mul(&iota1_inv);
        let theta = OrthMap::new(lat.clone(), theta).ok()?;
        if spec.is_member(&theta) {
            Some(theta)
        } else {
            None
        }
    });
    match hit {
        Some(theta) => {
            debug_assert_eq!(theta.apply(v1), v2.to_vec());
            Ok(OrbitVerdict::Equivalent { witness: Some(theta), disc_witness: None })
        }
        None => Ok(OrbitVerdict::NotEquivalent),
    }
}

fn assemble_iota(w: &[Int], basis: &IntMat) -> IntMat {
    let n = w.len();
    let mut m = IntMat::zero(n, n);
    for i in 0..n {
        m[(i, 0)] = w[i].clone();
        for j in 0..n - 1 {
            m[(i, j + 1)] = basis[(i, j)].clone();
        }
    }
    m
}

/// Product coordinates of a dual vector x in D(<w>) + D(K): first
/// coordinate alpha (x, w) mod |w^2| with alpha the sign of w^2, remaining
/// coordinates the canonical invariant-factor exponents of the K-projection
/// (all factors of the Smith chain of G(K), trivial ones included).
fn glue_product_coords(
    lat: &LatRef,
    w: &[Int],
    k_basis: &IntMat,
    k_lat: &LatRef,
    x: &QVec,
) -> Option<ZVec> {
    let n = lat.rank();
    let w2 = lat.norm_z(w);
    let alpha = if w2.is_negative() { int(-1) } else { int(1) };
    let w2abs = w2.abs();
    let ksnf = crate::matrix::smith_normal_form(k_lat.gram());
    let kdivs: Vec<Int> = (0..k_lat.rank()).map(|i| ksnf.d[(i, i)].clone()).collect();
    let xw = lat.ip(x, &crate::vectors::z_to_q(w));
    if !xw.is_integer() {
        return None;
    }
    let first = (rat_of(&alpha) * &xw).to_integer().mod_floor(&w2abs);
    let coeff = xw / rat_of(&w2);
    let proj: QVec = (0..n).map(|i| &x[i] - &coeff * rat_of(&w[i])).collect();
    let gkq = k_lat.gram().to_rat();
    let gk_inv = gkq.inverse()?;
    let pair: Vec<Rat> = (0..k_basis.cols())
        .map(|j| lat.ip(&proj, &crate::vectors::z_to_q(&k_basis.column(j))))
        .collect();
    let kcoords = gk_inv.mul_vec(&pair);
    let gk_c = gkq.mul_vec(&kcoords);
    let mut exps = vec![first];
    for i in 0..k_lat.rank() {
        let mut s = Rat::zero();
        for j in 0..k_lat.rank() {
            s += rat_of(&ksnf.p[(i, j)]) * &gk_c[j];
        }
        if !s.is_integer() {
            return None;
        }
        exps.push(s.to_integer().mod_floor(&kdivs[i]));
    }
    Some(exps)
}

/// The glue group H = L/(<w> + K) with its canonical product coordinates.
fn glue_data(lat: &LatRef, w: &[Int], k_basis: &IntMat, k_lat: &LatRef) -> Result<GlueData> {
    let n = lat.rank();
    let w2abs = lat.norm_z(w).abs();
    let ksnf = crate::matrix::smith_normal_form(k_lat.gram());
    let kdivs: Vec<Int> = (0..k_lat.rank()).map(|i| ksnf.d[(i, i)].clone()).collect();
    let mut ambient_orders = vec![w2abs];
    ambient_orders.extend(kdivs);
    let mut gens = Vec::new();
    for j in 0..n {
        let mut e = vec![Rat::zero(); n];
        e[j] = Rat::from_integer(Int::from(1));
        gens.push(
            glue_product_coords(lat, w, k_basis, k_lat, &e).ok_or(Error::NotIntegral)?,
        );
    }
    let zero = vec![Int::zero(); ambient_orders.len()];
    let mut elements = vec![zero];
    let mut seen: std::collections::HashSet<ZVec> = elements.iter().cloned().collect();
    let mut frontier = elements.clone();
    while let Some(cur) = frontier.pop() {
        for g in &gens {
            let next: ZVec = cur
                .iter()
                .zip(g)
                .zip(&ambient_orders)
                .map(|((a, b), d)| (a + b).mod_floor(d))
                .collect();
            if seen.insert(next.clone()) {
                elements.push(next.clone());
                frontier.push(next);
            }
        }
    }
    elements.sort();
    Ok(GlueData { ambient_orders, h_elements: elements })
}

/// Intermediate data of an indefinite-complement run, exposed for reports
/// and tests.
#[derive(Clone, Debug)]
pub struct IndefiniteRun {
    pub verdict: OrbitVerdict,
    pub dk_orders: (Vec<Int>, Vec<Int>),
    pub glue: (GlueData, GlueData),
}

/// Decide v1 ~ v2 under O_A(L) when v1 is non-isotropic with indefinite
/// complement, assuming O(L) -> O(D(L)) is surjective (certified through
/// the genus-uniqueness criterion). No integral witness is produced: the
/// verdict certifies existence through the discriminant glue.
pub fn equiv_indefinite(
    lat: &LatRef,
    disc_subgroup: &[FqfMap],
    v1: &[Rat],
    v2: &[Rat],
) -> Result<IndefiniteRun> {
    let ql = FiniteQuadraticForm::of_lattice(lat);
    if unique_genus_check(lat.signature(), &ql) != GenusVerdict::Applies {
        return Err(Error::Inconclusive(
            "surjectivity of O(L) -> O(D(L)) not certified by the genus criterion".into(),
        ));
    }
    if lat.norm(v1).is_zero() || lat.norm(v2).is_zero() {
        return Err(Error::Isotropic);
    }
    let (c1, w1) = primitive_scale(v1);
    let (c2, w2) = primitive_scale(v2);
    let not_equiv = |dk1: Vec<Int>, dk2: Vec<Int>, g1: GlueData, g2: GlueData| IndefiniteRun {
        verdict: OrbitVerdict::NotEquivalent,
        dk_orders: (dk1, dk2),
        glue: (g1, g2),
    };
    let empty_glue = || GlueData { ambient_orders: vec![], h_elements: vec![] };
    if lat.norm(v1) != lat.norm(v2) || c1 != c2 {
        return Ok(not_equiv(vec![], vec![], empty_glue(), empty_glue()));
    }
    let k1 = lat.orthogonal_complement(&w1)?;
    let k2 = lat.orthogonal_complement(&w2)?;
    let gk1 = lat.gram_of(k1.basis());
    let gk2 = lat.gram_of(k2.basis());
    let (p1, n1m, z1) = inertia(&gk1.to_rat());
    if z1 != 0 {
        return Err(Error::Degenerate);
    }
    if p1 == 0 || n1m == 0 {
        return Err(Error::NotIndefinite);
    }
    let klat1 = Lattice::new(gk1)?;
    let klat2 = Lattice::new(gk2)?;
    let qk1 = FiniteQuadraticForm::of_lattice(&klat1);
    let qk2 = FiniteQuadraticForm::of_lattice(&klat2);
    let glue1 = glue_data(lat, &w1, k1.basis(), &klat1)?;
    let glue2 = glue_data(lat, &w2, k2.basis(), &klat2)?;
    if qk1.orders != qk2.orders || klat1.signature() != klat2.signature() {
        return Ok(not_equiv(qk1.orders, qk2.orders, glue1, glue2));
    }
    let isos = iso_fqf(&qk1, &qk2);
    if isos.is_empty() {
        return Ok(not_equiv(qk1.orders, qk2.orders, glue1, glue2));
    }
    if unique_genus_check(klat1.signature(), &qk1) != GenusVerdict::Applies {
        return Err(Error::Inconclusive(
            "complement genus uniqueness not certified; K1 = K2 undecidable here".into(),
        ));
    }
    if glue1.order_multiset() != glue2.order_multiset() {
        return Ok(not_equiv(qk1.orders, qk2.orders, glue1, glue2));
    }
    // search over {+-1} x Iso(q_K1, q_K2) for a map preserving the glue and
    // inducing an element of A on D(L)
    let w2abs = lat.norm_z(&w1).abs();
    let full_k_orders: Vec<Int> = glue1.ambient_orders[1..].to_vec();
    let mut candidates: Vec<(Int, FqfMap)> = Vec::new();
    for phi in [int(1), int(-1)] {
        for psi in &isos {
            candidates.push((phi.clone(), psi.clone()));
        }
    }
    let ql_orders = ql.orders.clone();
    let hit = candidates.into_iter().find_map(|(phi, psi)| {
        // product map: psi acts on the nontrivial invariant factors of D(K)
        let apply_product = |e: &ZVec| -> ZVec {
            let mut out = vec![(&e[0] * &phi).mod_floor(&w2abs)];
            let mut nontrivial = Vec::new();
            for (x, d) in e[1..].iter().zip(&full_k_orders) {
                if d > &int(1) {
                    nontrivial.push(x.clone());
                }
            }
            let img = psi.apply(&nontrivial);
            let mut img_iter = img.into_iter();
            for d in &full_k_orders {
                if d > &int(1) {
                    out.push(img_iter.next().unwrap());
                } else {
                    out.push(Int::zero());
                }
            }
            out
        };
        let image: std::collections::BTreeSet<ZVec> =
            glue1.h_elements.iter().map(&apply_product).collect();
        let target: std::collections::BTreeSet<ZVec> = glue2.h_elements.iter().cloned().collect();
        if image != target {
            return None;
        }
        let induced =
            induced_disc_map(lat, &ql_orders, &w1, &w2, &glue2, &apply_product)?;
        let key = induced.normalized().images;
        if disc_subgroup.iter().any(|m| m.normalized().images == key) {
            Some(induced)
        } else {
            None
        }
    });
    let verdict = match hit {
        Some(m) => OrbitVerdict::Equivalent { witness: None, disc_witness: Some(m) },
        None => OrbitVerdict::NotEquivalent,
    };
    Ok(IndefiniteRun { verdict, dk_orders: (qk1.orders, qk2.orders), glue: (glue1, glue2) })
}

/// The map D(L) -> D(L) induced by a glue-preserving product map through
/// the two embeddings iota_i. None if some image fails to land in the image
/// of iota_2 (the candidate does not descend).
fn induced_disc_map(
    lat: &LatRef,
    ql_orders: &[Int],
    w1: &[Int],
    w2: &[Int],
    glue2: &GlueData,
    apply_product: &dyn Fn(&ZVec) -> ZVec,
) -> Option<FqfMap> {
    let dg = lat.disc_group();
    let k1 = lat.orthogonal_complement(w1).ok()?;
    let k2 = lat.orthogonal_complement(w2).ok()?;
    let klat1 = Lattice::new(lat.gram_of(k1.basis())).ok()?;
    let klat2 = Lattice::new(lat.gram_of(k2.basis())).ok()?;
    let reduce_mod_h = |e: &ZVec| -> ZVec {
        glue2
            .h_elements
            .iter()
            .map(|h| {
                e.iter()
                    .zip(h)
                    .zip(&glue2.ambient_orders)
                    .map(|((a, b), d)| (a + b).mod_floor(d))
                    .collect::<ZVec>()
            })
            .min()
            .unwrap()
    };
    let mut table: std::collections::HashMap<ZVec, ZVec> = std::collections::HashMap::new();
    for exps in crate::discform::elements_of(ql_orders) {
        let lift = dg.lift(&exps);
        let coords = glue_product_coords(lat, w2, k2.basis(), &klat2, &lift)?;
        table.insert(reduce_mod_h(&coords), exps);
    }
    let mut images = Vec::new();
    for i in 0..ql_orders.len() {
        let mut gen = vec![Int::zero(); ql_orders.len()];
        gen[i] = Int::from(1);
        let lift = dg.lift(&gen);
        let c1 = glue_product_coords(lat, w1, k1.basis(), &klat1, &lift)?;
        let mapped = apply_product(&c1);
        let img = table.get(&reduce_mod_h(&mapped))?;
        images.push(img.clone());
    }
    Some(FqfMap {
        dom_orders: ql_orders.to_vec(),
        cod_orders: ql_orders.to_vec(),
        images,
        form_compatible: true,
    })
}

/// Transfer an O_A verdict to SO^+_A: when K1 represents both +2 and -2 the
/// verdict carries over verbatim; otherwise positive verdicts degrade to
/// inconclusive.
pub fn upgrade_to_so_plus(lat: &LatRef, v1: &[Rat], base: &OrbitVerdict) -> Result<OrbitVerdict> {
    match base {
        OrbitVerdict::NotEquivalent => Ok(OrbitVerdict::NotEquivalent),
        OrbitVerdict::Inconclusive(r) => Ok(OrbitVerdict::Inconclusive(r.clone())),
        OrbitVerdict::Equivalent { .. } => {
            let (_, w1) = primitive_scale(v1);
            let k1 = lat.orthogonal_complement(&w1)?;
            let klat = Lattice::new(lat.gram_of(k1.basis()))?;
            let plus = represents_norm(&klat, 2, 2_000_000);
            let minus = represents_norm(&klat, -2, 2_000_000);
            match (plus, minus) {
                (NormSearch::Found(_), NormSearch::Found(_)) => Ok(base.clone()),
                (a, b) => Ok(OrbitVerdict::Inconclusive(format!(
                    "complement +-2 representation not established (+2: {}, -2: {})",
                    short(&a),
                    short(&b)
                ))),
            }
        }
    }
}

fn short(n: &NormSearch) -> &'static str {
    match n {
        NormSearch::Found(_) => "found",
        NormSearch::AbsentExact => "absent",
        NormSearch::Inconclusive => "inconclusive",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discform::FqfMap;
    use crate::lattice::{build_lattice, LatticeTerm};
    use crate::vectors::qvec;

    fn u_a3() -> LatRef {
        build_lattice(&[(LatticeTerm::U(1), 1), (LatticeTerm::A(3, 1), 1)]).unwrap()
    }

    #[test]
    fn definite_route_paper_example() {
        let lat = u_a3();
        let spec = GroupSpec::stable_oplus(&lat);
        let v1 = qvec(&[4, 4, 1, 2, -1]);
        let v2 = qvec(&[36, 144, 5, -30, 83]);
        let verdict = equiv_definite_complement(&lat, &spec, &v1, &v2).unwrap();
        match verdict {
            OrbitVerdict::Equivalent { witness: Some(theta), .. } => {
                assert_eq!(theta.apply(&v1), v2);
                assert!(theta.is_integral());
                assert!(spec.is_member(&theta));
            }
            other => panic!("expected equivalence with witness, got {:?}", other),
        }
    }

    #[test]
    fn definite_route_reflexive_and_norm_guard() {
        let lat = u_a3();
        let spec = GroupSpec::stable_oplus(&lat);
        let v = qvec(&[4, 4, 1, 2, -1]);
        let verdict = equiv_definite_complement(&lat, &spec, &v, &v).unwrap();
        assert!(verdict.is_equivalent());

        let v2 = qvec(&[8, 8, 2, 4, -2]);
        let verdict = equiv_definite_complement(&lat, &spec, &v, &v2).unwrap();
        assert!(matches!(verdict, OrbitVerdict::NotEquivalent));
    }

    #[test]
    fn indefinite_route_paper_example() {
        let lat = u_a3();
        let trivial = vec![FqfMap::identity(&lat.disc_group().orders)];
        let v1 = qvec(&[1, -1, 0, 0, 0]);
        let v2 = qvec(&[1, 0, 1, 0, 0]);
        let run = equiv_indefinite(&lat, &trivial, &v1, &v2).unwrap();
        assert_eq!(run.dk_orders.0, vec![int(2), int(4)]);
        assert_eq!(run.dk_orders.1, vec![int(2), int(4)]);
        for glue in [&run.glue.0, &run.glue.1] {
            assert_eq!(glue.order(), 2);
        }
        assert!(run.verdict.is_equivalent());
        let upgraded = upgrade_to_so_plus(&lat, &v1, &run.verdict).unwrap();
        assert!(upgraded.is_equivalent());
    }

    #[test]
    fn indefinite_scale_test() {
        let lat = u_a3();
        let trivial = vec![FqfMap::identity(&lat.disc_group().orders)];
        let v1 = qvec(&[1, -1, 0, 0, 0]);
        let v2: Vec<Rat> = v1.iter().map(|x| x / crate::matrix::rat(2)).collect();
        let run = equiv_indefinite(&lat, &trivial, &v1, &v2).unwrap();
        assert!(matches!(run.verdict, OrbitVerdict::NotEquivalent));
    }

    #[test]
    fn upgrade_biconditional_on_negative() {
        let lat = u_a3();
        let base = OrbitVerdict::NotEquivalent;
        let v1 = qvec(&[1, -1, 0, 0, 0]);
        let out = upgrade_to_so_plus(&lat, &v1, &base).unwrap();
        assert!(matches!(out, OrbitVerdict::NotEquivalent));
    }

    #[test]
    fn verdict_symmetric() {
        let lat = u_a3();
        let spec = GroupSpec::stable_oplus(&lat);
        let v1 = qvec(&[4, 4, 1, 2, -1]);
        let v2 = qvec(&[36, 144, 5, -30, 83]);
        let a = equiv_definite_complement(&lat, &spec, &v1, &v2).unwrap();
        let b = equiv_definite_complement(&lat, &spec, &v2, &v1).unwrap();
        assert_eq!(a.is_equivalent(), b.is_equivalent());
    }

    #[test]
    fn glue_projection_q_value() {
        // the nontrivial element of p_K(H) has q = 1/2 in [0,2), matching
        // the paper's generator (1,0) of C2+C4 with q = -3/2 mod 2Z
        let lat = u_a3();
        let trivial = vec![FqfMap::identity(&lat.disc_group().orders)];
        let v1 = qvec(&[1, -1, 0, 0, 0]);
        let v2 = qvec(&[1, 0, 1, 0, 0]);
        let run = equiv_indefinite(&lat, &trivial, &v1, &v2).unwrap();
        let k1 = lat.orthogonal_complement(&crate::vectors::zvec(&[1, -1, 0, 0, 0])).unwrap();
        let klat1 = Lattice::new(lat.gram_of(k1.basis())).unwrap();
        let qk1 = FiniteQuadraticForm::of_lattice(&klat1);
        let proj = run.glue.0.k_projection();
        let nontrivial: Vec<_> = proj.iter().filter(|e| e.iter().any(|x| !x.is_zero())).collect();
        assert_eq!(nontrivial.len(), 1);
        let full_orders = &run.glue.0.ambient_orders[1..];
        let stripped: ZVec = nontrivial[0]
            .iter()
            .zip(full_orders)
            .filter(|(_, d)| **d > int(1))
            .map(|(x, _)| x.clone())
            .collect();
        assert_eq!(qk1.q_value(&stripped), Rat::new(int(1), int(2)));
    }
}
