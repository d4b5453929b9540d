//! Exact arithmetic over Q(i) for identity checks. Float results from the
//! library are compared against these after conversion.
#![allow(dead_code)]

use std::ops::{Add, Mul, Neg, Sub};

use minvset::{BiPoly, Complex64, ComplexPoly, DiffOperator};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gq {
    pub re: BigRational,
    pub im: BigRational,
}

impl Gq {
    pub fn int(n: i64) -> Self {
        Self::new(n, 1, 0, 1)
    }

    pub fn new(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        Gq {
            re: BigRational::new(BigInt::from(re_num), BigInt::from(re_den)),
            im: BigRational::new(BigInt::from(im_num), BigInt::from(im_den)),
        }
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn recip_int(n: i64) -> Self {
        Self::new(1, n, 0, 1)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap(), self.im.to_f64().unwrap())
    }
}

impl Add for &Gq {
    type Output = Gq;
    fn add(self, o: &Gq) -> Gq {
        Gq {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
}

impl Sub for &Gq {
    type Output = Gq;
    fn sub(self, o: &Gq) -> Gq {
        Gq {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
}

impl Mul for &Gq {
    type Output = Gq;
    fn mul(self, o: &Gq) -> Gq {
        Gq {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &Gq {
    type Output = Gq;
    fn neg(self) -> Gq {
        Gq {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

/// Univariate polynomial, ascending coefficients, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct P(pub Vec<Gq>);

impl P {
    pub fn new(mut c: Vec<Gq>) -> Self {
        while c.last().is_some_and(Gq::is_zero) {
            c.pop();
        }
        P(c)
    }

    pub fn zero() -> Self {
        P(Vec::new())
    }

    pub fn constant(c: Gq) -> Self {
        P::new(vec![c])
    }

    pub fn monomial(d: usize) -> Self {
        let mut c = vec![Gq::zero(); d + 1];
        c[d] = Gq::int(1);
        P(c)
    }

    /// `x - a`
    pub fn linear(a: Gq) -> Self {
        P::new(vec![-&a, Gq::int(1)])
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn get(&self, i: usize) -> Gq {
        self.0.get(i).cloned().unwrap_or_else(Gq::zero)
    }

    pub fn add(&self, o: &P) -> P {
        let n = self.0.len().max(o.0.len());
        P::new((0..n).map(|i| &self.get(i) + &o.get(i)).collect())
    }

    pub fn mul(&self, o: &P) -> P {
        if self.0.is_empty() || o.0.is_empty() {
            return P::zero();
        }
        let mut out = vec![Gq::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        P::new(out)
    }

    pub fn scale(&self, c: &Gq) -> P {
        P::new(self.0.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, e: usize) -> P {
        (0..e).fold(P::constant(Gq::int(1)), |acc, _| acc.mul(self))
    }

    pub fn derive(&self, order: usize) -> P {
        let mut p = self.clone();
        for _ in 0..order {
            p = P::new(
                p.0.iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, a)| a * &Gq::int(i as i64))
                    .collect(),
            );
        }
        p
    }

    pub fn to_float(&self) -> ComplexPoly {
        ComplexPoly::new(self.0.iter().map(Gq::to_c64).collect())
    }
}

/// Bivariate polynomial as a polynomial in `x` with coefficients in `z`:
/// `rows[i]` is the coefficient of `x^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct B(pub Vec<P>);

impl B {
    pub fn new(mut rows: Vec<P>) -> Self {
        while rows.last().is_some_and(|r| r.0.is_empty()) {
            rows.pop();
        }
        B(rows)
    }

    pub fn from_x(p: &P) -> Self {
        B::new(p.0.iter().map(|c| P::constant(c.clone())).collect())
    }

    pub fn from_z(p: &P) -> Self {
        B::new(vec![p.clone()])
    }

    /// `(x - z)^k`
    pub fn diagonal_power(k: usize) -> Self {
        let x_minus_z = B::new(vec![
            P::new(vec![Gq::zero(), Gq::int(-1)]),
            P::constant(Gq::int(1)),
        ]);
        (0..k).fold(B::from_x(&P::constant(Gq::int(1))), |acc, _| {
            acc.mul(&x_minus_z)
        })
    }

    pub fn row(&self, i: usize) -> P {
        self.0.get(i).cloned().unwrap_or_else(P::zero)
    }

    pub fn add(&self, o: &B) -> B {
        let n = self.0.len().max(o.0.len());
        B::new((0..n).map(|i| self.row(i).add(&o.row(i))).collect())
    }

    pub fn mul(&self, o: &B) -> B {
        if self.0.is_empty() || o.0.is_empty() {
            return B(Vec::new());
        }
        let mut out = vec![P::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        B::new(out)
    }

    /// `d/dx`
    pub fn derive_x(&self) -> B {
        B::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, r)| r.scale(&Gq::int(i as i64)))
                .collect(),
        )
    }

    pub fn to_float(&self) -> BiPoly {
        let width = self.0.iter().map(|r| r.0.len()).max().unwrap_or(0);
        BiPoly::new(
            self.0
                .iter()
                .map(|r| (0..width).map(|j| r.get(j).to_c64()).collect())
                .collect(),
        )
    }
}

/// `sum_j Q_j(x) d^j`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Op(pub Vec<P>);

impl Op {
    pub fn term(q: P, j: usize) -> Op {
        let mut c = vec![P::zero(); j + 1];
        c[j] = q;
        Op(c)
    }

    pub fn add(&self, o: &Op) -> Op {
        let n = self.0.len().max(o.0.len());
        let get = |v: &Op, i: usize| v.0.get(i).cloned().unwrap_or_else(P::zero);
        Op((0..n).map(|i| get(self, i).add(&get(o, i))).collect())
    }

    pub fn scale(&self, c: &Gq) -> Op {
        Op(self.0.iter().map(|q| q.scale(c)).collect())
    }

    pub fn apply(&self, b: &B) -> B {
        let mut out = B(Vec::new());
        let mut d = b.clone();
        for q in &self.0 {
            out = out.add(&B::from_x(q).mul(&d));
            d = d.derive_x();
        }
        out
    }

    pub fn to_float(&self) -> DiffOperator {
        DiffOperator::new(self.0.iter().map(P::to_float).collect())
    }
}

pub fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

pub fn falling(n: usize, m: usize) -> i64 {
    (0..m as i64).map(|i| n as i64 - i).product()
}

pub fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    falling(n, k) / factorial(k)
}

pub fn is_one(g: &Gq) -> bool {
    g.re.is_one() && g.im.is_zero()
}

/// `1/k! sum_j (-1)^j Q^{(j)}(x) d^{k-j}`
fn taylor_operator(q: &P, k: usize) -> Op {
    let mut op = Op(Vec::new());
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        op = op.add(&Op::term(q.derive(j).scale(&Gq::int(sign)), k - j));
    }
    op.scale(&Gq::recip_int(factorial(k)))
}

// The six operator / bivariate pairs `(T, B)` with `T[(x - z)^k] = B`.

/// `Q(x) d^m` and `(k)_m Q(x) (x - z)^{k-m}`.
pub fn scaled_power_term(q: &P, k: usize, m: usize) -> (Op, B) {
    let b = B::from_x(&q.scale(&Gq::int(falling(k, m)))).mul(&B::diagonal_power(k - m));
    (Op::term(q.clone(), m), b)
}

/// `Q(x)/k! d^k` and `Q(x)`, `deg Q = k`.
pub fn top_degree_term(q: &P, k: usize) -> (Op, B) {
    (
        Op::term(q.scale(&Gq::recip_int(factorial(k))), k),
        B::from_x(q),
    )
}

/// `Q(x)/k! sum_{j<=l} (-1)^j (l)_j x^{l-j} d^{k-j}` and `Q(x) z^l`,
/// `deg Q <= k - l`.
pub fn x_poly_times_z_power(q: &P, k: usize, l: usize) -> (Op, B) {
    let mut op = Op(Vec::new());
    for j in 0..=l {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        let coef = P::monomial(l - j).scale(&Gq::int(sign * falling(l, j)));
        op = op.add(&Op::term(q.mul(&coef), k - j));
    }
    let op = op.scale(&Gq::recip_int(factorial(k)));
    (op, B::from_x(q).mul(&B::from_z(&P::monomial(l))))
}

/// Taylor operator and `Q(z)`, `deg Q <= k`.
pub fn z_poly(q: &P, k: usize) -> (Op, B) {
    (taylor_operator(q, k), B::from_z(q))
}

/// `x^l` times the Taylor operator and `Q(z) x^l`, `deg Q <= k`.
pub fn z_poly_times_x_power(q: &P, k: usize, l: usize) -> (Op, B) {
    let xl = P::monomial(l);
    let t = taylor_operator(q, k);
    let op = Op(t.0.iter().map(|c| c.mul(&xl)).collect());
    (op, B::from_z(q).mul(&B::from_x(&xl)))
}

/// `1/(k)_m sum_j (-1)^{m-j} C(k-j, k-m) Q^{(m-j)}(x) d^j` and
/// `Q(z) (x - z)^{k-m}`, `deg Q <= m`.
pub fn z_poly_times_offset_power(q: &P, k: usize, m: usize) -> (Op, B) {
    let mut op = Op(Vec::new());
    for j in 0..=m {
        let sign = if (m - j).is_multiple_of(2) { 1 } else { -1 };
        let c = Gq::int(sign * binomial(k - j, k - m));
        op = op.add(&Op::term(q.derive(m - j).scale(&c), j));
    }
    let op = op.scale(&Gq::recip_int(falling(k, m)));
    (op, B::from_z(q).mul(&B::diagonal_power(k - m)))
}

/// Whether `T[(x - z)^k] = B` holds exactly.
pub fn holds(pair: &(Op, B), k: usize) -> bool {
    pair.0.apply(&B::diagonal_power(k)) == pair.1
}
