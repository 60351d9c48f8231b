//! Counting solutions of Q(x) ≡ n (mod p^t).
//!
//! The number of x mod p^t with Q(x) ≡ y only depends on the orbit of y under
//! multiplication by unit squares. Distributions are therefore stored as
//! functions on these orbits (a few per valuation) and the distribution of
//! an orthogonal sum is the convolution of its blocks' distributions, done
//! with structure constants computed once per modulus.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use super::jordan::{jordan_exact, Block2Kind, ExactBlock};
use crate::arith::{pow_u64, valuation};
use crate::error::{Error, Result};
use crate::forms::QuadraticForm;
use crate::gram::GramMatrix;

/// Largest p^{tk} handled by literal enumeration of residue vectors.
pub const SCAN_LIMIT: u64 = 1 << 22;
/// Largest modulus p^t handled by the orbit convolution.
pub const MODULUS_LIMIT: u64 = 1 << 23;

/// Value distribution of ½xᵀGx over x ∈ (ℤ/p^t)^k by literal enumeration.
pub fn scan_distribution(gram: &GramMatrix, p: u64, t: u32) -> Vec<u64> {
    let q = p.pow(t);
    let k = gram.dim();
    let m2 = 2 * q as i128;
    let g: Vec<i128> =
        (0..k * k).map(|i| gram.get(i / k, i % k).mod_floor(&BigInt::from(m2)).to_i128().unwrap()).collect();
    let mut out = vec![0u64; q as usize];
    let mut x = vec![0i128; k];
    loop {
        let mut s = 0i128;
        for i in 0..k {
            if x[i] == 0 {
                continue;
            }
            let mut row = 0i128;
            for j in 0..k {
                row += g[i * k + j] * x[j];
            }
            s = (s + row % m2 * x[i]) % m2;
        }
        out[(s / 2) as usize] += 1;
        let mut i = 0;
        loop {
            if i == k {
                return out;
            }
            x[i] += 1;
            if x[i] < q as i128 {
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}

/// #{x mod p^t : Q(x) ≡ n} by literal enumeration.
pub fn scan_count(gram: &GramMatrix, n: &BigInt, p: u64, t: u32) -> u64 {
    let q = p.pow(t);
    let r = n.mod_floor(&BigInt::from(q)).to_usize().unwrap();
    scan_distribution(gram, p, t)[r]
}

/// Orbits of ℤ/p^t under multiplication by unit squares, with the structure
/// constants of the additive convolution.
struct Ring {
    p: u64,
    t: u32,
    q: u64,
    offsets: Vec<usize>,
    residue: Vec<bool>,
    reps: Vec<u64>,
    sizes: Vec<u64>,
    /// For each target orbit: (a, b, c) with c = #{z ∈ a : y − z ∈ b}.
    structure: Vec<Vec<(u16, u16, u64)>>,
}

fn unit_classes(p: u64, s: u32) -> usize {
    match (p, s) {
        (2, 1) => 1,
        (2, 2) => 2,
        (2, _) => 4,
        _ => 2,
    }
}

impl Ring {
    fn build(p: u64, t: u32) -> Ring {
        let q = p.pow(t);
        let mut offsets = vec![1usize];
        for v in 0..t {
            let last = *offsets.last().unwrap();
            offsets.push(last + unit_classes(p, t - v));
        }
        let count = *offsets.last().unwrap();
        let mut residue = vec![false; p as usize];
        for x in 1..p {
            residue[(x * x % p) as usize] = true;
        }
        let nonresidue = (2..p).find(|&x| !residue[x as usize]).unwrap_or(1);
        let mut reps = vec![0u64];
        for v in 0..t {
            let units: Vec<u64> = if p == 2 { vec![1, 3, 5, 7] } else { vec![1, nonresidue] };
            for &u in units.iter().take(unit_classes(p, t - v)) {
                reps.push(p.pow(v) * u);
            }
        }
        let mut ring = Ring { p, t, q, offsets, residue, reps, sizes: vec![0; count], structure: Vec::new() };
        let mut sizes = vec![0u64; count];
        for y in 0..q {
            sizes[ring.orbit(y)] += 1;
        }
        ring.sizes = sizes;
        let structure = (0..count)
            .into_par_iter()
            .map(|o| {
                let y = ring.reps[o];
                let mut dense = vec![0u64; count * count];
                for z in 0..q {
                    let a = ring.orbit(z);
                    let b = ring.orbit((y + q - z) % q);
                    dense[a * count + b] += 1;
                }
                dense
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(i, &c)| ((i / count) as u16, (i % count) as u16, c))
                    .collect()
            })
            .collect();
        ring.structure = structure;
        ring
    }

    fn len(&self) -> usize {
        self.sizes.len()
    }

    #[inline]
    fn orbit(&self, y: u64) -> usize {
        let y = y % self.q;
        if y == 0 {
            return 0;
        }
        if self.p == 2 {
            let v = y.trailing_zeros();
            let u = y >> v;
            let class = match self.t - v {
                1 => 0,
                2 => (u % 4 == 3) as usize,
                _ => ((u % 8) / 2) as usize,
            };
            self.offsets[v as usize] + class
        } else {
            let mut v = 0;
            let mut u = y;
            while u.is_multiple_of(self.p) {
                u /= self.p;
                v += 1;
            }
            self.offsets[v] + (!self.residue[(u % self.p) as usize]) as usize
        }
    }

    fn convolve(&self, f: &[BigUint], g: &[BigUint]) -> Vec<BigUint> {
        self.structure
            .iter()
            .map(|terms| {
                let mut acc = BigUint::zero();
                for &(a, b, c) in terms {
                    let (fa, gb) = (&f[a as usize], &g[b as usize]);
                    if !fa.is_zero() && !gb.is_zero() {
                        acc += fa * gb * c;
                    }
                }
                acc
            })
            .collect()
    }

    /// Distribution of c·x² for x mod q.
    fn square_block(&self, c: u64) -> Vec<BigUint> {
        let mut cnt = vec![0u64; self.len()];
        let q = self.q as u128;
        for x in 0..q {
            cnt[self.orbit((c as u128 * (x * x % q) % q) as u64)] += 1;
        }
        self.per_element(cnt)
    }

    /// Distribution of 2^α·x₁x₂.
    fn hyperbolic_block(&self, alpha: u32) -> Vec<BigUint> {
        let t = self.t;
        let cnt = self
            .reps
            .iter()
            .map(|&y| {
                let mut total = 0u64;
                for j in 0..=t {
                    let how_many = if j < t { 1u64 << (t - j - 1) } else { 1 };
                    let g = 1u64 << (alpha + j).min(t);
                    if y % g == 0 {
                        total += how_many * g;
                    }
                }
                BigUint::from(total)
            })
            .collect();
        cnt
    }

    /// Distribution of 2^α·(x₁² + x₁x₂ + x₂²).
    fn elliptic_block(&self, alpha: u32) -> Vec<BigUint> {
        let t = self.t;
        if alpha >= t {
            let mut f = vec![BigUint::zero(); self.len()];
            f[0] = BigUint::from(self.q) * self.q;
            return f;
        }
        let s = t - alpha;
        let ms = 1u64 << s;
        let mut roots = vec![0u64; ms as usize];
        for z in 0..ms {
            roots[(z * z % ms) as usize] += 1;
        }
        let lift = BigUint::one() << (2 * alpha) as usize;
        self.reps
            .iter()
            .map(|&y| {
                if y % (1 << alpha) != 0 {
                    return BigUint::zero();
                }
                let c = (y >> alpha) % ms;
                let mut total = 0u64;
                if c % 2 == 1 {
                    total += 2 * (ms / 2);
                }
                for u in 0..(ms / 2).max(1) {
                    let r = (c + ms * 4 - (3 * u * u) % ms) % ms;
                    total += roots[r as usize];
                }
                BigUint::from(total) * &lift
            })
            .collect()
    }

    fn per_element(&self, cnt: Vec<u64>) -> Vec<BigUint> {
        cnt.into_iter()
            .zip(&self.sizes)
            .map(|(c, &s)| {
                debug_assert_eq!(c % s, 0);
                BigUint::from(c / s)
            })
            .collect()
    }
}

fn ring(p: u64, t: u32) -> Arc<Ring> {
    static RINGS: OnceLock<Mutex<HashMap<(u64, u32), Arc<Ring>>>> = OnceLock::new();
    let cache = RINGS.get_or_init(Default::default);
    if let Some(r) = cache.lock().unwrap().get(&(p, t)) {
        return r.clone();
    }
    let built = Arc::new(Ring::build(p, t));
    cache.lock().unwrap().entry((p, t)).or_insert(built).clone()
}

/// Local solution counts of one form at one prime, reusing the Jordan
/// splitting and the per-level distributions across targets.
pub struct LocalCounter {
    p: u64,
    k: usize,
    discriminant: BigInt,
    blocks: Vec<ExactBlock>,
    cache: Mutex<HashMap<u32, Arc<Vec<BigUint>>>>,
}

impl LocalCounter {
    pub fn new(form: &QuadraticForm, p: u64) -> Self {
        LocalCounter {
            p,
            k: form.dim(),
            discriminant: form.discriminant().clone(),
            blocks: jordan_exact(form.gram(), p),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// t* = v_p(4nD) + 2.
    pub fn stabilization_level(&self, n: &BigInt) -> u32 {
        valuation(&(n * &self.discriminant * 4), self.p) + 2
    }

    /// Whether counts up to level t fit the convolution engine.
    pub fn feasible(&self, t: u32) -> bool {
        self.p.checked_pow(t).is_some_and(|q| q <= MODULUS_LIMIT)
    }

    fn distribution(&self, t: u32) -> Result<Arc<Vec<BigUint>>> {
        if let Some(d) = self.cache.lock().unwrap().get(&t) {
            return Ok(d.clone());
        }
        if !self.feasible(t) {
            return Err(Error::BudgetExceeded { budget: MODULUS_LIMIT });
        }
        let r = ring(self.p, t);
        let mut square_cache: HashMap<u64, Vec<BigUint>> = HashMap::new();
        let mut acc = vec![BigUint::zero(); r.len()];
        acc[0] = BigUint::one();
        for b in &self.blocks {
            let f = match b.kind {
                Block2Kind::Square => {
                    let coef = if self.p == 2 {
                        // Gram entry a·2^α contributes a·2^{α-1}x²
                        b.unit_mod(2, t + 1) * pow_u64(2, b.exponent) / 2
                    } else {
                        b.unit_mod(self.p, t) * pow_u64(self.p, b.exponent)
                    };
                    let c = (coef % r.q).to_u64().unwrap();
                    square_cache.entry(c).or_insert_with(|| r.square_block(c)).clone()
                }
                Block2Kind::Hyperbolic => r.hyperbolic_block(b.exponent),
                Block2Kind::Elliptic => r.elliptic_block(b.exponent),
            };
            acc = r.convolve(&acc, &f);
        }
        let acc = Arc::new(acc);
        self.cache.lock().unwrap().insert(t, acc.clone());
        Ok(acc)
    }

    /// N_t(n) = #{x mod p^t : Q(x) ≡ n}.
    pub fn count(&self, n: &BigInt, t: u32) -> Result<BigUint> {
        if t == 0 {
            return Ok(BigUint::one());
        }
        let dist = self.distribution(t)?;
        let r = ring(self.p, t);
        let y = n.mod_floor(&BigInt::from(r.q)).to_u64().unwrap();
        Ok(dist[r.orbit(y)].clone())
    }

    /// N_t(n) / p^{t(k-1)}.
    pub fn ratio(&self, n: &BigInt, t: u32) -> Result<BigRational> {
        let c = BigInt::from(self.count(n, t)?);
        Ok(BigRational::new(c, pow_u64(self.p, t * (self.k as u32 - 1))))
    }

    /// σ_p from counts at t*, t*+1, t*+2, which must agree.
    pub fn sigma(&self, n: &BigInt) -> Result<BigRational> {
        let t0 = self.stabilization_level(n);
        let vals: Vec<BigRational> = (t0..t0 + 3).map(|t| self.ratio(n, t)).collect::<Result<_>>()?;
        if vals.windows(2).all(|w| w[0] == w[1]) {
            Ok(vals[0].clone())
        } else {
            Err(Error::StabilizationFailure { p: self.p, levels: (t0..t0 + 3).collect() })
        }
    }
}

/// N_t = #{x mod p^t : Q(x) ≡ n (mod p^t)}.
pub fn local_count(form: &QuadraticForm, n: &BigInt, p: u64, t: u32) -> Result<BigUint> {
    if t == 0 {
        return Ok(BigUint::one());
    }
    let k = form.dim() as u32;
    let small = (t * k) as f64 * (p as f64).log2() <= (SCAN_LIMIT as f64).log2();
    if small {
        Ok(BigUint::from(scan_count(form.gram(), n, p, t)))
    } else {
        LocalCounter::new(form, p).count(n, t)
    }
}

/// σ_p by direct counting at three consecutive levels from t* = v_p(4nD)+2.
pub fn sigma_p(form: &QuadraticForm, n: &BigInt, p: u64) -> Result<BigRational> {
    LocalCounter::new(form, p).sigma(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let f = QuadraticForm::scaled_identity(4, 2).unwrap();
        assert_eq!(local_count(&f, &1.into(), 3, 1).unwrap(), BigUint::from(24u32));
        assert_eq!(local_count(&f, &1.into(), 3, 0).unwrap(), BigUint::one());
        assert_eq!(local_count(&f, &1.into(), 2, 1).unwrap(), BigUint::from(8u32));
        assert_eq!(sigma_p(&f, &1.into(), 3).unwrap(), BigRational::new(8.into(), 9.into()));
    }

    #[test]
    fn engine_matches_scan() {
        let forms = [
            QuadraticForm::scaled_identity(4, 2).unwrap(),
            QuadraticForm::from_i64_rows(&[vec![4, 2, 1], vec![2, 6, 3], vec![1, 3, 10]]).unwrap(),
            QuadraticForm::from_i64_rows(&[vec![6, 3, 0, 3], vec![3, 12, 6, 0], vec![0, 6, 18, 9], vec![3, 0, 9, 24]])
                .unwrap(),
            QuadraticForm::from_i64_rows(&[
                vec![2, -1, 0, 0],
                vec![-1, 2, -1, -1],
                vec![0, -1, 2, 0],
                vec![0, -1, 0, 2],
            ])
            .unwrap(),
        ];
        for f in &forms {
            for (p, t) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1)] {
                if (p as f64).powi((t * f.dim() as u32) as i32) > 2e6 {
                    continue;
                }
                let engine = LocalCounter::new(f, p);
                let dist = scan_distribution(f.gram(), p, t);
                for (y, &c) in dist.iter().enumerate() {
                    assert_eq!(engine.count(&BigInt::from(y), t).unwrap(), BigUint::from(c), "p={p} t={t} y={y}");
                }
            }
        }
    }
}
