//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A jet of order `d` in `m` variables stores the Taylor coefficients of a
//! function about a base point for all monomials of total degree `≤ d`.
//! Arithmetic and elementary functions propagate them exactly, which gives
//! the analytic derivative oracle its partials up to order four.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug)]
pub struct JetSpace {
    nvars: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    products: Vec<(u32, u32, u32)>,
}

impl JetSpace {
    fn build(nvars: usize, order: usize) -> Self {
        // graded ordering: every lower-order space is a prefix of this one
        let mut exps = Vec::new();
        for d in 0..=order {
            let mut cur = vec![0u8; nvars];
            push_degree(&mut exps, &mut cur, 0, d);
        }
        let index: HashMap<Vec<u8>, usize> = exps
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        let mut products = Vec::new();
        for (a, ea) in exps.iter().enumerate() {
            for (b, eb) in exps.iter().enumerate() {
                let deg: usize = ea.iter().chain(eb.iter()).map(|&x| x as usize).sum();
                if deg <= order {
                    let sum: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                    products.push((a as u32, b as u32, index[&sum] as u32));
                }
            }
        }
        Self {
            nvars,
            order,
            exps,
            index,
            products,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, var: usize, remaining: usize) {
    if var + 1 == cur.len() {
        cur[var] = remaining as u8;
        out.push(cur.clone());
        cur[var] = 0;
        return;
    }
    if cur.is_empty() {
        return;
    }
    for k in (0..=remaining).rev() {
        cur[var] = k as u8;
        push_degree(out, cur, var + 1, remaining - k);
    }
    cur[var] = 0;
}

/// Shared, cached jet space for `nvars` variables truncated at `order`.
pub fn space(nvars: usize, order: usize) -> Arc<JetSpace> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("jet space cache poisoned");
    guard
        .entry((nvars, order))
        .or_insert_with(|| Arc::new(JetSpace::build(nvars, order)))
        .clone()
}

#[derive(Debug, Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Self {
        let mut c = vec![0.0; space.len()];
        c[0] = value;
        Self {
            space: space.clone(),
            c,
        }
    }

    /// The coordinate function `x_var` expanded about `value`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, value: f64) -> Self {
        let mut j = Self::constant(space, value);
        if space.order >= 1 {
            let mut e = vec![0u8; space.nvars];
            e[var] = 1;
            j.c[space.index[&e]] = 1.0;
        }
        j
    }

    /// Jet with the given Taylor coefficients, laid out in `space` order.
    pub fn from_coeffs(space: &Arc<JetSpace>, c: Vec<f64>) -> Self {
        assert_eq!(
            c.len(),
            space.len(),
            "coefficient count does not match jet space"
        );
        Self {
            space: space.clone(),
            c,
        }
    }

    /// Jets of all coordinates about `point`.
    pub fn coordinates(point: &[f64], order: usize) -> Vec<Self> {
        let sp = space(point.len(), order);
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Self::variable(&sp, i, v))
            .collect()
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.space.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn constant_like(&self, value: f64) -> Self {
        Self::constant(&self.space, value)
    }

    /// Partial derivative `∂^α f` at the base point.
    pub fn partial(&self, alpha: &[u8]) -> f64 {
        match self.space.index_of(alpha) {
            Some(i) => {
                let fact: f64 = alpha
                    .iter()
                    .map(|&a| (1..=a as u64).product::<u64>() as f64)
                    .product();
                fact * self.c[i]
            }
            None => 0.0,
        }
    }

    /// Partial derivative along the listed variables (repetition allowed).
    pub fn partial_along(&self, vars: &[usize]) -> f64 {
        let mut alpha = vec![0u8; self.space.nvars];
        for &v in vars {
            alpha[v] += 1;
        }
        self.partial(&alpha)
    }

    /// `∂f/∂x_var` as a jet of one order less.
    pub fn derivative(&self, var: usize) -> Self {
        assert!(self.space.order >= 1, "cannot differentiate an order-0 jet");
        let target = space(self.space.nvars, self.space.order - 1);
        let mut c = vec![0.0; target.len()];
        let mut e = vec![0u8; self.space.nvars];
        for (p, ex) in self.space.exps.iter().enumerate() {
            if ex[var] == 0 || self.c[p] == 0.0 {
                continue;
            }
            e.copy_from_slice(ex);
            e[var] -= 1;
            c[target.index[&e]] += ex[var] as f64 * self.c[p];
        }
        Self { space: target, c }
    }

    /// Drops all terms above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.space.order {
            return self.clone();
        }
        let target = space(self.space.nvars, order);
        Self {
            c: self.c[..target.len()].to_vec(),
            space: target,
        }
    }

    fn check(&self, other: &Self) {
        debug_assert!(
            Arc::ptr_eq(&self.space, &other.space)
                || (self.space.nvars == other.space.nvars && self.space.order == other.space.order),
            "jet space mismatch"
        );
    }

    /// `Σ_k coeffs[k] (self − value)^k`, truncated at the jet order.
    pub fn compose(&self, coeffs: &[f64]) -> Self {
        let d = self.space.order;
        let mut t = self.clone();
        t.c[0] = 0.0;
        let mut acc = self.constant_like(coeffs.get(d).copied().unwrap_or(0.0));
        for k in (0..d).rev() {
            acc = &acc * &t;
            acc.c[0] += coeffs.get(k).copied().unwrap_or(0.0);
        }
        acc
    }

    pub fn powf(&self, p: f64) -> Self {
        let x0 = self.value();
        let d = self.space.order;
        let mut coeffs = Vec::with_capacity(d + 1);
        let mut binom = 1.0;
        for k in 0..=d {
            coeffs.push(binom * x0.powf(p - k as f64));
            binom *= (p - k as f64) / (k + 1) as f64;
        }
        self.compose(&coeffs)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Self {
        let x0 = self.value();
        let coeffs: Vec<f64> = (0..=self.space.order)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / x0.powi(k as i32 + 1))
            .collect();
        self.compose(&coeffs)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        self.compose(&taylor_from_cycle(&cycle, self.space.order))
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        self.compose(&taylor_from_cycle(&cycle, self.space.order))
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        let mut fact = 1.0;
        let coeffs: Vec<f64> = (0..=self.space.order)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                e / fact
            })
            .collect();
        self.compose(&coeffs)
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = self.constant_like(1.0);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            space: self.space.clone(),
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }
}

fn taylor_from_cycle(cycle: &[f64; 4], order: usize) -> Vec<f64> {
    let mut fact = 1.0;
    (0..=order)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            cycle[k % 4] / fact
        })
        .collect()
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.check(rhs);
        Jet {
            space: self.space.clone(),
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.check(rhs);
        Jet {
            space: self.space.clone(),
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.check(rhs);
        let mut c = vec![0.0; self.c.len()];
        for &(a, b, p) in &self.space.products {
            let (x, y) = (self.c[a as usize], rhs.c[b as usize]);
            if x != 0.0 && y != 0.0 {
                c[p as usize] += x * y;
            }
        }
        Jet {
            space: self.space.clone(),
            c,
        }
    }
}

impl Div<&Jet> for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self * &rhs.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
        impl $tr<f64> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: f64) -> Jet {
                self.$m(&self.constant_like(rhs))
            }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $m(self, rhs: f64) -> Jet {
                (&self).$m(&self.constant_like(rhs))
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Dot product of two jet vectors.
pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut acc = a[0].constant_like(0.0);
    for (x, y) in a.iter().zip(b) {
        acc = &acc + &(x * y);
    }
    acc
}

/// Determinant of a square jet matrix by cofactor expansion (small sizes).
pub fn det(m: &[Vec<Jet>]) -> Jet {
    let n = m.len();
    match n {
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = m[0][0].constant_like(0.0);
            for col in 0..n {
                let minor: Vec<Vec<Jet>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != col)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][col] * &det(&minor);
                acc = if col % 2 == 0 {
                    &acc + &term
                } else {
                    &acc - &term
                };
            }
            acc
        }
    }
}

/// Inverse of a square jet matrix by Gauss–Jordan with pivoting on the
/// base-point values.
pub fn inverse(m: &[Vec<Jet>]) -> Option<Vec<Vec<Jet>>> {
    let n = m.len();
    let mut a: Vec<Vec<Jet>> = m.to_vec();
    let one = m[0][0].constant_like(1.0);
    let zero = m[0][0].constant_like(0.0);
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { one.clone() } else { zero.clone() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].value().abs().total_cmp(&a[j][col].value().abs()))?;
        if a[piv][col].value().abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let r = a[col][col].recip();
        for j in 0..n {
            a[col][j] = &a[col][j] * &r;
            inv[col][j] = &inv[col][j] * &r;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i][col].clone();
            if f.coeffs().iter().all(|v| *v == 0.0) {
                continue;
            }
            for j in 0..n {
                a[i][j] = &a[i][j] - &(&f * &a[col][j]);
                inv[i][j] = &inv[i][j] - &(&f * &inv[col][j]);
            }
        }
    }
    Some(inv)
}
