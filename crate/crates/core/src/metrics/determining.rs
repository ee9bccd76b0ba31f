//! Countable Lipschitz test-function classes and the series metric built on
//! them, on measures over `S` and over unordered m-tuples.
//!
//! Generators are hat functions `g(x) = clamp(1 - d(x, c)/r, 0, 1)`, which take
//! values in `[0, 1]`, are `1/r`-Lipschitz and have `‖g‖_BL = 1 + 1/r`. The
//! series weights generator `k` (1-based) by `2^{-k}` after dividing it by its
//! BL norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{for_each_index_tuple, tuple_count, DiscreteMeasure, GroundSpace, Point, TupleMeasure, DEFAULT_TUPLE_BUDGET};

#[derive(Clone, Debug, PartialEq)]
pub struct HatFunction {
    pub center: Point,
    pub radius: f64,
}

impl HatFunction {
    pub fn eval(&self, space: &GroundSpace, x: &Point) -> f64 {
        (1.0 - space.distance(x, &self.center) / self.radius).clamp(0.0, 1.0)
    }

    pub fn bl_norm(&self) -> f64 {
        1.0 + 1.0 / self.radius
    }
}

/// Layout of the hat-function nets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassConfig {
    /// Bounding box `[lower, upper]` (per coordinate) covered by the nets on
    /// the real line and in `R^d`. Ignored on finite spaces.
    pub lower: f64,
    pub upper: f64,
    /// Number of dyadic scales `r = 1, 1/2, ..., 2^{1-levels}`.
    pub levels: usize,
    /// Number of generators kept in the series.
    pub truncation: usize,
}

impl Default for ClassConfig {
    fn default() -> Self {
        Self {
            lower: -4.0,
            upper: 4.0,
            levels: 4,
            truncation: 24,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DeterminingClass {
    space: GroundSpace,
    generators: Vec<HatFunction>,
    /// `1 / ‖g_k‖_BL`, cached.
    scale: Vec<f64>,
}

/// A truncated series value together with a bound on the omitted tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// Permutation of `0..len` that visits indices in bit-reversed order, so any
/// prefix is spread over the whole range.
fn spread_order(len: usize) -> Vec<usize> {
    let bits = usize::BITS - len.saturating_sub(1).leading_zeros();
    let mut idx: Vec<usize> = (0..len).collect();
    idx.sort_by_key(|&i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) });
    idx
}

impl DeterminingClass {
    /// Hat functions on dyadic nets, interleaved across scales: the k-th round
    /// takes the k-th center (in spread order) of every scale.
    pub fn new(space: GroundSpace, config: &ClassConfig) -> Result<Self> {
        if config.truncation == 0 {
            return Err(Error::invalid("class truncation must be positive"));
        }
        if config.levels == 0 {
            return Err(Error::invalid("class needs at least one scale"));
        }
        let levels = match &space {
            GroundSpace::Finite(f) => config.levels.max(config.truncation.div_ceil(f.len())),
            _ => {
                if !(config.upper > config.lower) {
                    return Err(Error::invalid("class region needs lower < upper"));
                }
                config.levels
            }
        };
        let mut nets: Vec<Vec<HatFunction>> = Vec::with_capacity(levels);
        for level in 0..levels {
            let radius = 0.5f64.powi(level as i32);
            let centers: Vec<Point> = match &space {
                GroundSpace::Finite(f) => (0..f.len()).map(Point::Label).collect(),
                GroundSpace::RealLine => {
                    let count = ((config.upper - config.lower) / radius).floor() as usize + 1;
                    spread_order(count)
                        .into_iter()
                        .map(|i| Point::real(config.lower + i as f64 * radius))
                        .collect()
                }
                GroundSpace::Euclidean { dim } => {
                    let per_axis = ((config.upper - config.lower) / radius).floor() as usize + 1;
                    let total = tuple_count(per_axis, *dim, DEFAULT_TUPLE_BUDGET)?;
                    spread_order(total)
                        .into_iter()
                        .map(|mut flat| {
                            let coords = (0..*dim)
                                .map(|_| {
                                    let c = flat % per_axis;
                                    flat /= per_axis;
                                    config.lower + c as f64 * radius
                                })
                                .collect();
                            Point::vector(coords)
                        })
                        .collect()
                }
            };
            nets.push(centers.into_iter().map(|center| HatFunction { center, radius }).collect());
        }
        let mut generators = Vec::with_capacity(config.truncation);
        let mut round = 0;
        while generators.len() < config.truncation {
            let mut any = false;
            for net in &nets {
                if let Some(g) = net.get(round) {
                    any = true;
                    if generators.len() < config.truncation {
                        generators.push(g.clone());
                    }
                }
            }
            if !any {
                break;
            }
            round += 1;
        }
        Self::from_generators(space, generators)
    }

    pub fn from_generators(space: GroundSpace, generators: Vec<HatFunction>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::invalid("determining class needs at least one generator"));
        }
        for g in &generators {
            space.check(&g.center)?;
            if !(g.radius > 0.0) || !g.radius.is_finite() {
                return Err(Error::invalid(format!("hat radius {} must be positive", g.radius)));
            }
        }
        let scale = generators.iter().map(|g| 1.0 / g.bl_norm()).collect();
        Ok(Self { space, generators, scale })
    }

    pub fn space(&self) -> &GroundSpace {
        &self.space
    }

    pub fn generators(&self) -> &[HatFunction] {
        &self.generators
    }

    pub fn truncation(&self) -> usize {
        self.generators.len()
    }

    pub fn bl_norms(&self) -> Vec<f64> {
        self.generators.iter().map(HatFunction::bl_norm).collect()
    }

    /// Bound on the terms beyond the truncation, `2 · 2^{-K}`.
    pub fn tail_bound(&self) -> f64 {
        2.0 * 0.5f64.powi(self.truncation() as i32)
    }

    /// `g_k^*(x) = g_k(x) / ‖g_k‖_BL` with `k` zero-based.
    #[inline]
    pub fn normalized(&self, k: usize, x: &Point) -> f64 {
        self.generators[k].eval(&self.space, x) * self.scale[k]
    }

    /// `(∫ g_k^* dμ)_k`.
    pub fn features(&self, mu: &DiscreteMeasure) -> Vec<f64> {
        let mut out = vec![0.0; self.truncation()];
        for (x, w) in mu.iter() {
            for (k, slot) in out.iter_mut().enumerate() {
                *slot += w * self.normalized(k, x);
            }
        }
        out
    }

    /// Series distance between two feature vectors.
    pub fn feature_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        super::level2::series_distance(a, b)
    }

    fn check_space(&self, space: &GroundSpace) -> Result<()> {
        if *space != self.space {
            return Err(Error::invalid("measure and determining class live on different spaces"));
        }
        Ok(())
    }
}

/// `Σ_{k ≤ K} 2^{-k} |∫ g_k^* dμ - ∫ g_k^* dν|`.
pub fn dw(mu: &DiscreteMeasure, nu: &DiscreteMeasure, cls: &DeterminingClass) -> Result<SeriesValue> {
    cls.check_space(mu.space())?;
    cls.check_space(nu.space())?;
    Ok(SeriesValue {
        value: cls.feature_distance(&cls.features(mu), &cls.features(nu)),
        tail_bound: cls.tail_bound(),
    })
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

/// Largest tuple length accepted by [`dw_product`] (the integrands average
/// over all `m!` coordinate orders).
pub const MAX_PRODUCT_ORDER: usize = 6;

/// Integrals of the symmetrized products `Π_i g_{k_i}^*(x_i)` for every
/// multi-index in `[K]^m`, lexicographic order.
fn product_integrals(pm: &TupleMeasure, cls: &DeterminingClass, perms: &[Vec<usize>]) -> Vec<f64> {
    let k = cls.truncation();
    let m = pm.m();
    let mut out = vec![0.0; k.pow(m as u32)];
    let inv = 1.0 / perms.len() as f64;
    for (class, w) in pm.iter() {
        let g: Vec<Vec<f64>> = class
            .points()
            .iter()
            .map(|x| (0..k).map(|j| cls.normalized(j, x)).collect())
            .collect();
        let mut flat = 0;
        for_each_index_tuple(k, m, |idx| {
            let mut sym = 0.0;
            for sigma in perms {
                let mut prod = 1.0;
                for (i, &ki) in idx.iter().enumerate() {
                    prod *= g[sigma[i]][ki];
                }
                sym += prod;
            }
            out[flat] += w * (sym * inv);
            flat += 1;
        });
    }
    out
}

/// Series metric on laws of unordered m-tuples:
/// `Σ_{k_1..k_m ≤ K} 2^{-(k_1+...+k_m)} |∫ Π g_{k_i}^* dP - ∫ Π g_{k_i}^* dQ|`.
pub fn dw_product(
    pm: &TupleMeasure,
    qm: &TupleMeasure,
    cls: &DeterminingClass,
    m: usize,
) -> Result<SeriesValue> {
    if pm.m() != m || qm.m() != m {
        return Err(Error::invalid(format!(
            "tuple lengths {} and {} do not match m = {m}",
            pm.m(),
            qm.m()
        )));
    }
    if m > MAX_PRODUCT_ORDER {
        return Err(Error::ResourceLimit {
            what: "tuple length for product series",
            requested: m,
            limit: MAX_PRODUCT_ORDER,
        });
    }
    cls.check_space(pm.space())?;
    cls.check_space(qm.space())?;
    let k = cls.truncation();
    tuple_count(k, m, DEFAULT_TUPLE_BUDGET)?;
    let perms = permutations(m);
    let a = product_integrals(pm, cls, &perms);
    let b = product_integrals(qm, cls, &perms);
    let mut total = 0.0;
    let mut flat = 0;
    for_each_index_tuple(k, m, |idx| {
        let order: usize = idx.iter().sum::<usize>() + m;
        total += 0.5f64.powi(order as i32) * (a[flat] - b[flat]).abs();
        flat += 1;
    });
    let kept = (1.0 - 0.5f64.powi(k as i32)).powi(m as i32);
    Ok(SeriesValue {
        value: total,
        tail_bound: 2.0 * (1.0 - kept),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real_class(truncation: usize) -> DeterminingClass {
        DeterminingClass::new(
            GroundSpace::RealLine,
            &ClassConfig {
                truncation,
                ..ClassConfig::default()
            },
        )
        .unwrap()
    }

    fn random_real(rng: &mut ChaCha8Rng, k: usize) -> DiscreteMeasure {
        let pairs: Vec<(Point, f64)> = (0..k)
            .map(|_| (Point::real(rng.random_range(-3.0..3.0)), rng.random_range(0.05..1.0)))
            .collect();
        let s: f64 = pairs.iter().map(|p| p.1).sum();
        DiscreteMeasure::from_pairs(GroundSpace::RealLine, pairs.into_iter().map(|(p, w)| (p, w / s)).collect()).unwrap()
    }

    #[test]
    fn generators_are_bounded_lipschitz_hats() {
        let cls = real_class(40);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (k, g) in cls.generators().iter().enumerate() {
            assert!((cls.bl_norms()[k] - (1.0 + 1.0 / g.radius)).abs() < 1e-15);
            for _ in 0..200 {
                let x = Point::real(rng.random_range(-6.0..6.0));
                let y = Point::real(rng.random_range(-6.0..6.0));
                let (gx, gy) = (g.eval(cls.space(), &x), g.eval(cls.space(), &y));
                assert!((0.0..=1.0).contains(&gx));
                let d = cls.space().distance(&x, &y);
                assert!((gx - gy).abs() <= d / g.radius + 1e-12);
            }
            // The Lipschitz constant 1/r is attained next to the center.
            let c = g.center.as_real().unwrap();
            let slope = (g.eval(cls.space(), &g.center) - g.eval(cls.space(), &Point::real(c + g.radius / 2.0)))
                / (g.radius / 2.0);
            assert!((slope - 1.0 / g.radius).abs() < 1e-9);
        }
    }

    #[test]
    fn scales_are_interleaved() {
        let cls = real_class(12);
        let radii: Vec<f64> = cls.generators().iter().map(|g| g.radius).collect();
        assert_eq!(&radii[..4], &[1.0, 0.5, 0.25, 0.125]);
        let first_centers: Vec<f64> = cls.generators()[..8].iter().map(|g| g.center.as_real().unwrap()).collect();
        assert!(first_centers.iter().any(|&c| c > 0.0) && first_centers.iter().any(|&c| c < 0.0));
    }

    #[test]
    fn dw_basic_properties() {
        let cls = real_class(24);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let mu = random_real(&mut rng, 5);
            let nu = random_real(&mut rng, 4);
            assert_eq!(dw(&mu, &mu, &cls).unwrap().value, 0.0);
            let v = dw(&mu, &nu, &cls).unwrap();
            assert!(v.value >= 0.0 && v.value <= 1.0);
            assert!((v.value - dw(&nu, &mu, &cls).unwrap().value).abs() < 1e-15);
        }
    }

    #[test]
    fn truncation_moves_value_within_tail_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let mu = random_real(&mut rng, 5);
            let nu = random_real(&mut rng, 5);
            let short = dw(&mu, &nu, &real_class(10)).unwrap();
            let long = dw(&mu, &nu, &real_class(30)).unwrap();
            assert!(long.value >= short.value);
            assert!(long.value - short.value <= short.tail_bound);
        }
    }

    #[test]
    fn product_with_m1_equals_dw() {
        let cls = real_class(16);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let mu = random_real(&mut rng, 5);
            let nu = random_real(&mut rng, 3);
            let a = dw(&mu, &nu, &cls).unwrap().value;
            let b = dw_product(&mu.product_power(1).unwrap(), &nu.product_power(1).unwrap(), &cls, 1)
                .unwrap()
                .value;
            assert!((a - b).abs() <= 1e-12);
        }
    }

    /// Direct expansion of the double series for product laws on two points:
    /// for μ^2 the symmetrized integral of g_a(x1) g_b(x2) is (∫g_a dμ)(∫g_b dμ).
    #[test]
    fn product_series_by_hand_on_two_points() {
        let space = GroundSpace::discrete(2).unwrap();
        let cls = DeterminingClass::new(space.clone(), &ClassConfig { truncation: 2, levels: 1, ..ClassConfig::default() }).unwrap();
        // Generators: indicator of label 0 and of label 1, both with BL norm 2.
        assert_eq!(cls.truncation(), 2);
        let mk = |p: f64| DiscreteMeasure::new(space.clone(), vec![Point::Label(0), Point::Label(1)], vec![p, 1.0 - p]).unwrap();
        let (p, q) = (0.3, 0.6);
        let (mu, nu) = (mk(p), mk(q));
        let fm = [p / 2.0, (1.0 - p) / 2.0];
        let fn_ = [q / 2.0, (1.0 - q) / 2.0];
        let mut want = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                want += 0.5f64.powi((a + b + 2) as i32) * (fm[a] * fm[b] - fn_[a] * fn_[b]).abs();
            }
        }
        let got = dw_product(&mu.product_power(2).unwrap(), &nu.product_power(2).unwrap(), &cls, 2).unwrap();
        assert!((got.value - want).abs() < 1e-15);
        assert!((got.tail_bound - 2.0 * (1.0 - 0.75f64.powi(2))).abs() < 1e-15);
    }

    #[test]
    fn product_rejects_mismatched_m() {
        let cls = real_class(4);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mu = random_real(&mut rng, 2);
        assert!(dw_product(&mu.product_power(2).unwrap(), &mu.product_power(1).unwrap(), &cls, 2).is_err());
    }
}
