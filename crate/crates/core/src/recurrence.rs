//! The recurrence system bounding the depth-two algorithm, the inductive
//! ansatz behind its growth rate, and the lower-bound calculators.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, int, ratio, Rational};

/// Worst-case expected costs of the depth-two algorithm at one height.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityRow {
    pub h: u32,
    /// `T(h)`: `Evaluate` on a node of height `h`.
    pub t: Rational,
    /// `S^M(h)`: `Complete` when the evaluated child is a majority child.
    /// Undefined at `h = 0`.
    pub s_major: Option<Rational>,
    /// `S^m(h)`: `Complete` when the evaluated child is the minority child.
    pub s_minor: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityTable {
    rows: Vec<ComplexityRow>,
}

impl ComplexityTable {
    pub fn rows(&self) -> &[ComplexityRow] {
        &self.rows
    }

    pub fn max_height(&self) -> u32 {
        self.rows.len() as u32 - 1
    }

    pub fn row(&self, h: u32) -> Result<&ComplexityRow> {
        self.rows.get(h as usize).ok_or(Error::OutOfRange {
            index: h as usize,
            min: 0,
            max: self.rows.len() - 1,
        })
    }

    pub fn t(&self, h: u32) -> Result<&Rational> {
        Ok(&self.row(h)?.t)
    }

    /// Base cases and `S^M(h) <= S^m(h)`, `S^M(h) <= T(h)` for every row;
    /// returns a description of each violation.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let expect = |what: &str, got: Option<&Rational>, want: Rational, out: &mut Vec<String>| {
            if got != Some(&want) {
                out.push(format!("{what} = {got:?}, expected {want}"));
            }
        };
        expect("T(0)", self.rows.first().map(|r| &r.t), int(1), &mut out);
        if let Some(r) = self.rows.get(1) {
            expect("T(1)", Some(&r.t), ratio(8, 3), &mut out);
            expect("S^M(1)", r.s_major.as_ref(), ratio(3, 2), &mut out);
            expect("S^m(1)", r.s_minor.as_ref(), int(2), &mut out);
        }
        for r in self.rows.iter().skip(1) {
            let (Some(sm), Some(sn)) = (&r.s_major, &r.s_minor) else {
                out.push(format!("h={}: missing S values", r.h));
                continue;
            };
            if sm > sn {
                out.push(format!("h={}: S^M = {sm} > S^m = {sn}", r.h));
            }
            if sm > &r.t {
                out.push(format!("h={}: S^M = {sm} > T = {}", r.h, r.t));
            }
        }
        out
    }
}

/// Solves the recurrences exactly for `h = 0..=max_h`.
pub fn solve(max_h: u32) -> Result<ComplexityTable> {
    if max_h < 1 {
        return Err(Error::InvalidArgument("table needs at least heights 0 and 1".into()));
    }
    let mut t = vec![int(1), ratio(8, 3)];
    let mut sm = vec![None, Some(ratio(3, 2))];
    let mut sn = vec![None, Some(int(2))];
    for h in 2..=max_h as usize {
        let (t2, t1) = (&t[h - 2], &t[h - 1]);
        let big = sm[h - 1].clone().expect("defined for h >= 1");
        let small = sn[h - 1].clone().expect("defined for h >= 1");
        let s_minor = t2 + t1 + ratio(2, 3) * &big + ratio(1, 3) * &small;
        let s_major = t2 + ratio(2, 3) * t1 + ratio(1, 3) * &big + ratio(1, 3) * &small;
        let th = int(2) * t2 + ratio(23, 27) * t1 + ratio(26, 27) * &big + ratio(18, 27) * &small;
        t.push(th);
        sm.push(Some(s_major));
        sn.push(Some(s_minor));
    }
    let rows = t
        .into_iter()
        .zip(sm)
        .zip(sn)
        .enumerate()
        .map(|(h, ((t, s_major), s_minor))| ComplexityRow { h: h as u32, t, s_major, s_minor })
        .collect();
    Ok(ComplexityTable { rows })
}

/// `T(h) / T(h-1)`.
pub fn growth_ratio(table: &ComplexityTable, h: u32) -> Result<Rational> {
    if h == 0 {
        return Err(Error::OutOfRange { index: 0, min: 1, max: table.max_height() as usize });
    }
    Ok(table.t(h)? / table.t(h - 1)?)
}

/// Constants of the inductive hypothesis `T(h) <= a alpha^h`,
/// `S^M(h) <= b alpha^h`, `S^m(h) <= c alpha^h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ansatz {
    pub alpha: Rational,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

impl Ansatz {
    /// `alpha = 2.64944`, `a = 1.02`, `b = 0.559576 a`, `c = 0.755791 a`.
    pub fn standard() -> Self {
        Self::with_alpha(rational::parse("2.64944").expect("literal"))
    }

    /// The standard `a, b, c` with a different `alpha`.
    pub fn with_alpha(alpha: Rational) -> Self {
        let a = rational::parse("1.02").expect("literal");
        let b = rational::parse("0.559576").expect("literal") * &a;
        let c = rational::parse("0.755791").expect("literal") * &a;
        Ansatz { alpha, a, b, c }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: Rational,
    pub rhs: Rational,
}

impl InequalityCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }

    /// `rhs - lhs`; negative when violated.
    pub fn slack(&self) -> Rational {
        &self.rhs - &self.lhs
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzReport {
    pub checks: Vec<InequalityCheck>,
}

impl AnsatzReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(InequalityCheck::holds)
    }

    pub fn violations(&self) -> Vec<&InequalityCheck> {
        self.checks.iter().filter(|c| !c.holds()).collect()
    }
}

/// Checks the base cases and the three inductive steps in exact arithmetic.
pub fn verify_ansatz(ans: &Ansatz) -> AnsatzReport {
    let Ansatz { alpha, a, b, c } = ans;
    let alpha2 = alpha * alpha;
    let check = |name, lhs: Rational, rhs: Rational| InequalityCheck { name, lhs, rhs };
    let checks = vec![
        check("S^m(1) = 2 <= c alpha", int(2), c * alpha),
        check("S^M(1) = 3/2 <= b alpha", ratio(3, 2), b * alpha),
        check("T(0) = 1 <= a", int(1), a.clone()),
        check("T(1) = 8/3 <= a alpha", ratio(8, 3), a * alpha),
        check(
            "a + ((3a+2b+c)/3) alpha <= c alpha^2",
            a + (int(3) * a + int(2) * b + c) / int(3) * alpha,
            c * &alpha2,
        ),
        check(
            "a + ((2a+b+c)/3) alpha <= b alpha^2",
            a + (int(2) * a + b + c) / int(3) * alpha,
            b * &alpha2,
        ),
        check(
            "2a + ((23a+26b+18c)/27) alpha <= a alpha^2",
            int(2) * a + (int(23) * a + int(26) * b + int(18) * c) / int(27) * alpha,
            a * &alpha2,
        ),
    ];
    AnsatzReport { checks }
}

/// `sum_i C(h,i) 2^(h-i) p_i`.
pub fn binomial_bound(p: &[Rational], h: u32) -> Result<Rational> {
    if p.len() != h as usize + 1 {
        return Err(Error::LengthMismatch { expected: h as usize + 1, found: p.len() });
    }
    let mut binom = BigInt::one();
    let mut total = Rational::zero();
    for (i, pi) in p.iter().enumerate() {
        let weight = &binom * (BigInt::one() << (h as usize - i));
        total += pi * Rational::from_integer(weight);
        binom = binom * BigInt::from(h as usize - i) / BigInt::from(i + 1);
    }
    Ok(total)
}

/// `(1 - 2 delta) q^i` for `i = 0..=h`.
pub fn geometric(q: &Rational, delta: &Rational, h: u32) -> Vec<Rational> {
    let scale = int(1) - int(2) * delta;
    (0..=h).map(|i| &scale * q.pow(i as i32)).collect()
}

/// A closed interval with exact rational endpoints that are themselves
/// finite decimals with `digits` fractional digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecimalInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub digits: u32,
}

impl DecimalInterval {
    /// Rounds `[lo, hi]` outward to `digits` fractional digits.
    pub fn outward(lo: &Rational, hi: &Rational, digits: u32) -> Self {
        let scale = Rational::from_integer(BigInt::from(10u32).pow(digits));
        let lo_s = rational::scaled_floor(lo, digits);
        let hi_s = -rational::scaled_floor(&-hi, digits);
        DecimalInterval {
            lo: Rational::from_integer(lo_s) / &scale,
            hi: Rational::from_integer(hi_s) / &scale,
            digits,
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn lo_decimal(&self) -> String {
        rational::floor_decimal(&self.lo, self.digits)
    }

    pub fn hi_decimal(&self) -> String {
        rational::ceil_decimal(&self.hi, self.digits)
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    /// Width at most `10^-precision`.
    pub fn width_at_most(&self, precision: u32) -> bool {
        self.width() <= Rational::new(BigInt::one(), BigInt::from(10u32).pow(precision))
    }
}

impl fmt::Display for DecimalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo_decimal(), self.hi_decimal())
    }
}

/// Certified enclosures of the base `2 + alpha_k^(-1/k)` and of the bound
/// `(1 - 2 delta) (alpha_k / 2^k) base^h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowerBound {
    pub k: u32,
    pub h: u32,
    pub base: DecimalInterval,
    pub value: DecimalInterval,
    /// Set when the base is rational and `base.lo == base.hi`.
    pub exact_base: Option<Rational>,
}

/// Encloses `alpha^(-1/k)` in `[r / 10^d, (r + 1) / 10^d]`, or returns it
/// exactly when it is a `d`-digit decimal.
fn inverse_root(alpha: &Rational, k: u32, d: u32) -> (Rational, Rational) {
    let scale = BigInt::from(10u32).pow(d);
    // floor(alpha^-1 * 10^(dk)) = floor(den * 10^(dk) / num)
    let num = alpha.denom() * scale.pow(k);
    let den = alpha.numer().clone();
    let q = &num / &den;
    let exact_int = (&q * &den) == num;
    let qu = rational::to_biguint(&q).expect("positive");
    let r = rational::iroot_floor(&qu, k);
    let r_int = BigInt::from(r.clone());
    let lo = Rational::new(r_int.clone(), scale.clone());
    if exact_int && r.pow(k) == qu {
        return (lo.clone(), lo);
    }
    (lo, Rational::new(r_int + 1, scale))
}

pub fn lower_bound(k: u32, alpha_k: &Rational, delta: &Rational, h: u32, precision: u32) -> Result<LowerBound> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if !alpha_k.is_positive() {
        return Err(Error::InvalidArgument("alpha_k must be positive".into()));
    }
    if delta.is_negative() || delta >= &ratio(1, 2) {
        return Err(Error::InvalidArgument(format!("delta = {delta} is not in [0, 1/2)")));
    }
    let coeff = (int(1) - int(2) * delta) * alpha_k / Rational::from_integer(BigInt::one() << k);
    let target = Rational::new(BigInt::one(), BigInt::from(10u32).pow(precision)) / int(2);
    let mut d = precision + 1;
    loop {
        let (rlo, rhi) = inverse_root(alpha_k, k, d);
        let (blo, bhi) = (int(2) + rlo, int(2) + rhi);
        let vlo = &coeff * blo.pow(h as i32);
        let vhi = &coeff * bhi.pow(h as i32);
        if &bhi - &blo <= target && &vhi - &vlo <= target {
            let digits = precision + 2;
            let exact_base = (blo == bhi).then(|| blo.clone());
            return Ok(LowerBound {
                k,
                h,
                base: DecimalInterval::outward(&blo, &bhi, digits),
                value: DecimalInterval::outward(&vlo, &vhi, digits),
                exact_base,
            });
        }
        d += 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_table_values() {
        let t = solve(2).unwrap();
        assert!(t.violations().is_empty());
        let r = t.row(2).unwrap();
        assert_eq!(r.t, ratio(571, 81));
        assert_eq!(r.s_minor, Some(ratio(16, 3)));
        assert_eq!(r.s_major, Some(ratio(71, 18)));
        assert!(solve(0).is_err());
    }

    #[test]
    fn ratios() {
        let t = solve(40).unwrap();
        assert_eq!(growth_ratio(&t, 1).unwrap(), ratio(8, 3));
        assert!(growth_ratio(&t, 0).is_err());
        assert!(growth_ratio(&t, 41).is_err());
        let r40 = growth_ratio(&t, 40).unwrap();
        let r39 = growth_ratio(&t, 39).unwrap();
        assert!(r40 <= rational::parse("2.64944").unwrap());
        assert!(r40 >= rational::parse("2.64").unwrap());
        assert!((r40 - r39).abs() < rational::parse("0.000001").unwrap());
    }

    #[test]
    fn ansatz_cases() {
        assert!(verify_ansatz(&Ansatz::standard()).holds());
        let naive = Ansatz { alpha: int(2), a: int(1), b: int(1), c: int(1) };
        let report = verify_ansatz(&naive);
        assert!(!report.holds());
        assert!(!report.violations().is_empty());
        assert!(verify_ansatz(&Ansatz::with_alpha(ratio(8, 3))).holds());
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial_bound(&[int(1)], 0).unwrap(), int(1));
        for h in 0..8 {
            let p = geometric(&ratio(1, 3), &int(0), h);
            assert_eq!(binomial_bound(&p, h).unwrap(), ratio(7, 3).pow(h as i32));
        }
        assert!(binomial_bound(&[int(1)], 2).is_err());
    }

    #[test]
    fn lower_bound_bases() {
        let lb = lower_bound(1, &int(2), &int(0), 1, 6).unwrap();
        assert_eq!(lb.exact_base, Some(ratio(5, 2)));
        let lb = lower_bound(2, &ratio(24, 7), &int(0), 1, 6).unwrap();
        assert!(lb.base.lo > rational::parse("2.54006").unwrap());
        assert!(lb.base.width_at_most(6));
        let lb = lower_bound(4, &ratio(2027349, 216164), &int(0), 1, 6).unwrap();
        assert!(lb.base.lo > rational::parse("2.57143").unwrap());
        assert!(lower_bound(2, &int(3), &ratio(1, 2), 1, 6).is_err());
    }

    #[test]
    fn interval_rendering() {
        let iv = DecimalInterval::outward(&ratio(1, 3), &ratio(2, 3), 3);
        assert_eq!(iv.to_string(), "[0.333, 0.667]");
    }
}
