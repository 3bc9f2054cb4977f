//! Small helpers for integer and rational coordinate vectors.

use crate::matrix::{Int, Rat};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type ZVec = Vec<Int>;
pub type QVec = Vec<Rat>;

pub fn zvec(v: &[i64]) -> ZVec {
    v.iter().map(|&x| Int::from(x)).collect()
}

pub fn qvec(v: &[i64]) -> QVec {
    v.iter().map(|&x| Rat::from_integer(Int::from(x))).collect()
}

pub fn z_to_q(v: &[Int]) -> QVec {
    v.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

pub fn q_to_z(v: &[Rat]) -> Option<ZVec> {
    if v.iter().all(|x| x.is_integer()) {
        Some(v.iter().map(|x| x.to_integer()).collect())
    } else {
        None
    }
}

pub fn is_zero(v: &[Rat]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn neg_z(v: &[Int]) -> ZVec {
    v.iter().map(|x| -x.clone()).collect()
}

pub fn add_q(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_q(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_q(a: &[Rat], c: &Rat) -> QVec {
    a.iter().map(|x| x * c).collect()
}

/// Content of an integer vector: gcd of the entries (nonnegative).
pub fn content(v: &[Int]) -> Int {
    let mut g = Int::zero();
    for x in v {
        g = g.gcd(x);
    }
    g
}

/// Smallest c in Q_{>0} with c*v integral, together with the integer vector
/// c*v. For v = 0 returns c = 1.
pub fn primitive_scale(v: &[Rat]) -> (Rat, ZVec) {
    let mut m = Int::one();
    for x in v {
        m = m.lcm(x.denom());
    }
    let scaled: ZVec = v.iter().map(|x| (x * Rat::from_integer(m.clone())).to_integer()).collect();
    let g = content(&scaled);
    if g.is_zero() {
        return (Rat::one(), scaled);
    }
    let c = Rat::new(m, g.clone());
    let prim: ZVec = scaled.iter().map(|x| x / &g).collect();
    (c, prim)
}

/// Canonical sign: flips the vector if its first nonzero entry is negative.
pub fn sign_normalize(v: &[Int]) -> ZVec {
    for x in v {
        if !x.is_zero() {
            if x.is_negative() {
                return neg_z(v);
            }
            break;
        }
    }
    v.to_vec()
}

pub fn lex_cmp(a: &[Int], b: &[Int]) -> std::cmp::Ordering {
    a.iter().cmp(b.iter())
}

pub fn fmt_zvec(v: &[Int]) -> String {
    let inner: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", inner.join(","))
}

pub fn fmt_qvec(v: &[Rat]) -> String {
    let inner: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", inner.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::rat;
    use num_bigint::BigInt;

    #[test]
    fn primitive_scale_cases() {
        let v = vec![rat(2), rat(4)];
        let (c, p) = primitive_scale(&v);
        assert_eq!(c, Rat::new(BigInt::from(1), BigInt::from(2)));
        assert_eq!(p, zvec(&[1, 2]));

        let v = vec![Rat::new(BigInt::from(1), BigInt::from(2)), rat(3)];
        let (c, p) = primitive_scale(&v);
        assert_eq!(c, rat(2));
        assert_eq!(p, zvec(&[1, 6]));
    }
}
