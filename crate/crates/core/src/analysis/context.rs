//! Quantities attached to a prefix length `n` (or to a block index `i`)
//! of a construction.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cantor::{q_partial_sum, SumMode};
use crate::construction::{Construction, PrefixDecomposition};
use crate::numeric::{from_biguint, inv_pow};
use crate::{Error, Result};

/// Index-level quantities for block index `i` and block length `k`.
#[derive(Clone, Copy, Debug)]
pub struct IndexQuantities<'a> {
    pub c: &'a Construction,
    pub i: u64,
    pub k: u32,
}

fn nat(x: &BigUint) -> BigRational {
    from_biguint(x)
}

/// Coefficients of `g_i(w,z) = (C + Dw + Ez)/(F + Gw + Hz)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GCoefficients {
    pub c: BigRational,
    pub d: BigRational,
    pub e: BigRational,
    pub f: BigRational,
    pub g: BigRational,
    pub h: BigRational,
}

impl<'a> IndexQuantities<'a> {
    pub fn new(c: &'a Construction, i: u64, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        if i == 0 || i + 1 > c.top() {
            return Err(Error::OutOfRange {
                what: format!("index {i} (need 1..={})", c.top() - 1),
            });
        }
        Ok(IndexQuantities { c, i, k })
    }

    fn b(&self, j: u64) -> u32 {
        self.c.tuple(j).expect("index checked").b
    }

    fn l(&self, j: u64) -> &BigUint {
        &self.c.tuple(j).expect("index checked").l
    }

    fn eps(&self, j: u64) -> &BigRational {
        &self.c.tuple(j).expect("index checked").eps
    }

    fn xl(&self, j: u64) -> &BigUint {
        self.c.x_len(j).expect("index checked")
    }

    fn cum(&self, j: u64) -> &BigUint {
        self.c.cumulative_length(j).expect("index checked")
    }

    /// `b_j^{-k} l_j |x_j|`.
    fn weighted_run(&self, j: u64) -> BigRational {
        inv_pow(self.b(j), self.k) * nat(&(self.l(j) * self.xl(j)))
    }

    /// `S_{L_j}^(k) = sum_{t<=j} b_t^{-k} l_t |x_t|`.
    pub fn s_at_cumulative(&self, j: u64) -> BigRational {
        (1..=j).map(|t| self.weighted_run(t)).sum()
    }

    pub fn coefficients(&self) -> GCoefficients {
        let (i, k) = (self.i, self.k);
        let kq = BigRational::from_integer(k.into());
        let hk = inv_pow(self.b(i + 1), k);
        let next = nat(self.xl(i + 1));
        GCoefficients {
            c: nat(self.cum(i - 1))
                + self.eps(i) * self.weighted_run(i)
                + &kq * nat(&(self.l(i) + 1u32)),
            d: self.eps(i + 1) * &hk * &next + &kq,
            e: BigRational::one(),
            f: self.s_at_cumulative(i),
            g: &hk * &next,
            h: hk,
        }
    }

    fn denominator(co: &GCoefficients, w: &BigRational, z: &BigRational) -> Result<BigRational> {
        let den = &co.f + &co.g * w + &co.h * z;
        if den.is_zero() {
            return Err(Error::Precondition(
                "f_i, g_i undefined: zero denominator (l_i = 0)".into(),
            ));
        }
        Ok(den)
    }

    /// `(f_i(w,z), g_i(w,z))`.
    pub fn f_g(&self, w: &BigUint, z: &BigUint) -> Result<(BigRational, BigRational)> {
        let co = self.coefficients();
        let (wq, zq) = (nat(w), nat(z));
        let den = Self::denominator(&co, &wq, &zq)?;
        let i = self.i;
        let f_num = self.s_at_cumulative(i - 1)
            + self.eps(i) * self.weighted_run(i)
            + self.eps(i + 1) * &co.g * &wq
            + &co.h * &zq;
        let g_num = &co.c + &co.d * &wq + &co.e * &zq;
        Ok((f_num / &den, g_num / den))
    }

    pub fn g(&self, w: &BigUint, z: &BigUint) -> Result<BigRational> {
        Ok(self.f_g(w, z)?.1)
    }

    /// `eps_i' = g_i(0, |x_{i+1}|)`; needs `l_i >= 1`.
    pub fn epsilon_prime(&self) -> Result<BigRational> {
        if self.l(self.i).is_zero() {
            return Err(Error::Precondition(format!(
                "eps'_{} needs l_i >= 1",
                self.i
            )));
        }
        self.g(&BigUint::zero(), self.xl(self.i + 1))
    }

    /// `k (l_i + 1) / (b_i^{-k} l_i |x_i|)`, `None` when `l_i = 0`.
    pub fn boundary_ratio(&self) -> Option<BigRational> {
        let den = self.weighted_run(self.i);
        (!den.is_zero())
            .then(|| BigRational::from_integer(self.k.into()) * nat(&(self.l(self.i) + 1u32)) / den)
    }

    /// `2k b_i^k / |x_i|`, the bound on [`boundary_ratio`](Self::boundary_ratio).
    pub fn boundary_bound(&self) -> BigRational {
        BigRational::from_integer((2 * self.k).into())
            / inv_pow(self.b(self.i), self.k)
            / nat(self.xl(self.i))
    }

    /// `(sum_{j<=i-2} l_j |x_j|) / (b_i^{-k} l_i |x_i|)`, `None` when `l_i = 0`.
    pub fn early_mass_ratio(&self) -> Option<BigRational> {
        let den = self.weighted_run(self.i);
        let early = if self.i >= 2 {
            nat(self.cum(self.i - 2))
        } else {
            BigRational::zero()
        };
        (!den.is_zero()).then(|| early / den)
    }

    /// Hypotheses on `|x_i|`, `|x_{i+1}|` and `l_i` that make `g_i`
    /// monotone.
    pub fn monotonicity_hypotheses(&self) -> Hypotheses {
        let i = self.i;
        let k = BigUint::from(self.k);
        let gap = self.eps(i) - self.eps(i + 1);
        let needed = nat(&(&k * BigUint::from(self.b(i + 1)).pow(self.k))) / &gap;
        Hypotheses {
            x_i_long: *self.xl(i) > BigUint::from(4u32) * &k,
            x_next_long: gap > BigRational::zero() && nat(self.xl(i + 1)) > needed,
            l_positive: !self.l(i).is_zero(),
        }
    }
}

/// Preconditions for the bound `g_i(w,z) < eps_i'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hypotheses {
    /// `|x_i| > 4k`.
    pub x_i_long: bool,
    /// `|x_{i+1}| > k b_{i+1}^k / (eps_i - eps_{i+1})`.
    pub x_next_long: bool,
    /// `l_i > 0`.
    pub l_positive: bool,
}

impl Hypotheses {
    pub fn all(self) -> bool {
        self.x_i_long && self.x_next_long && self.l_positive
    }
}

/// Everything attached to a prefix length `n` and block length `k`.
#[derive(Clone, Debug)]
pub struct SectionTwoContext<'a> {
    pub c: &'a Construction,
    pub k: u32,
    pub n: BigUint,
    pub d: PrefixDecomposition,
}

impl<'a> SectionTwoContext<'a> {
    pub fn new(c: &'a Construction, k: u32, n: &BigUint) -> Result<Self> {
        c.range_set().require(k)?;
        if k == 0 {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        let d = c.decompose(n)?;
        Ok(SectionTwoContext {
            c,
            k,
            n: n.clone(),
            d,
        })
    }

    pub fn i(&self) -> u64 {
        self.d.i
    }

    /// Index quantities for `i`; fails when `n < L_1`, where `i = 0`.
    pub fn index(&self) -> Result<IndexQuantities<'a>> {
        IndexQuantities::new(self.c, self.d.i, self.k)
    }

    /// `S_n^(k) = sum_{j<=i} b_j^{-k} l_j |x_j| + b_{i+1}^{-k} m`.
    pub fn s_partial_sum(&self) -> BigRational {
        let k = self.k;
        let head: BigRational = (1..=self.d.i)
            .map(|j| {
                let t = self.c.tuple(j).expect("cached");
                inv_pow(t.b, k) * nat(&(&t.l * self.c.x_len(j).expect("cached")))
            })
            .sum();
        let b_next = self.c.tuple(self.d.i + 1).expect("cached").b;
        head + inv_pow(b_next, k) * nat(&self.d.m)
    }

    /// `Q_n^(k)`, exact.
    pub fn q_partial_sum(&self) -> Result<BigRational> {
        Ok(q_partial_sum(self.c.basic_sequence(), &self.n, self.k, SumMode::Exact)?.value)
    }

    /// The upper bound `kappa` on `N_n^Q(B,x)`; needs `i >= 1`.
    pub fn kappa(&self) -> Result<BigRational> {
        let (i, k) = (self.d.i, self.k);
        if i == 0 {
            return Err(Error::Precondition("kappa needs i >= 1".into()));
        }
        let t = |j: u64| self.c.tuple(j).expect("cached");
        let xl = |j: u64| nat(self.c.x_len(j).expect("cached"));
        let kq = BigRational::from_integer(k.into());
        let one = BigRational::one();
        let head = nat(self.c.cumulative_length(i - 1).expect("cached"))
            + &kq * nat(&(&t(i).l + 1u32))
            + (&one + &t(i).eps) * inv_pow(t(i).b, k) * nat(&t(i).l) * xl(i);
        let per_copy = (&one + &t(i + 1).eps) * inv_pow(t(i + 1).b, k) * xl(i + 1) + &kq;
        Ok(head + per_copy * nat(&self.d.alpha) + nat(&self.d.beta))
    }

    /// `eps_i'` for this context's `i`.
    pub fn epsilon_prime(&self) -> Result<BigRational> {
        self.index()?.epsilon_prime()
    }
}
