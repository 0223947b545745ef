use crate::discrete::system::{DiscreteSystem, Initial};
use crate::ensemble::map_paths;
use crate::error::{Error, Result};
use crate::kernel::KernelSeq;
use crate::manifest::Norm;
use crate::rng::rng_stream;
use crate::{Matrix, Vector};

/// `R(0..=n)` from `R(0) = I`, `R(n+1) = R(n) + Σ_{j<=n} K(n-j) R(j)`.
pub fn resolvent_seq(kernel: &KernelSeq, n: usize) -> Vec<Matrix> {
    let k = kernel.materialize(n);
    resolvent_from(&k, kernel.dim(), n)
}

fn resolvent_from(k: &[Matrix], d: usize, n: usize) -> Vec<Matrix> {
    let mut r = Vec::with_capacity(n + 1);
    r.push(Matrix::identity(d, d));
    for m in 0..n {
        let mut next = r[m].clone();
        for j in 0..=m {
            next += &k[m - j] * &r[j];
        }
        r.push(next);
    }
    r
}

/// Max-entry residual of the defining recursion over `n < N`.
pub fn resolvent_residual(kernel: &KernelSeq, r: &[Matrix]) -> f64 {
    let n = r.len().saturating_sub(1);
    let k = kernel.materialize(n);
    (0..n)
        .map(|m| {
            let mut res = &r[m + 1] - &r[m];
            for j in 0..=m {
                res -= &k[m - j] * &r[j];
            }
            res.amax()
        })
        .fold(0.0, f64::max)
}

/// Random inputs of one path: `ξ` and `ξ(1..=N)` (row-major, `N x m`).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDraws {
    pub initial: Vector,
    pub increments: Vec<f64>,
    pub noise_dim: usize,
}

impl NoiseDraws {
    /// `ξ(n)` for `n >= 1`.
    pub fn xi(&self, n: usize) -> &[f64] {
        let m = self.noise_dim;
        &self.increments[(n - 1) * m..n * m]
    }

    pub fn len(&self) -> usize {
        self.increments.len() / self.noise_dim
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }
}

/// Draws `ξ` (when random) and then `ξ(1), ..., ξ(N)` from the path's
/// stream.
pub fn draw_noise(sys: &DiscreteSystem, master_seed: u64, path_index: u64) -> NoiseDraws {
    let mut rng = rng_stream(master_seed, path_index);
    let initial = match sys.initial() {
        Initial::Fixed(x) => x.clone(),
        Initial::Random(spec) => {
            let mut v = vec![0.0; spec.dim];
            spec.sample_into(&mut rng, &mut v);
            Vector::from_vec(v)
        }
    };
    let m = sys.noise_dim();
    let mut increments = vec![0.0; sys.horizon() * m];
    for chunk in increments.chunks_exact_mut(m) {
        sys.noise().sample_into(&mut rng, chunk);
    }
    NoiseDraws {
        initial,
        increments,
        noise_dim: m,
    }
}

/// Discrete path `X(0..=N)` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqPath {
    dim: usize,
    data: Vec<f64>,
}

impl SeqPath {
    pub fn new(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len() % dim, 0, "data length must be a multiple of dim");
        Self { dim, data }
    }

    pub fn from_scalars(values: Vec<f64>) -> Self {
        Self::new(1, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of nodes `N + 1`.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn at(&self, n: usize) -> &[f64] {
        &self.data[n * self.dim..(n + 1) * self.dim]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// `max_n ‖a(n) - b(n)‖_∞ / max(max_n ‖a(n)‖_∞, tiny)`.
    pub fn relative_gap(&self, other: &SeqPath) -> f64 {
        let diff = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = self.data.iter().map(|a| a.abs()).fold(0.0, f64::max);
        diff / scale.max(f64::MIN_POSITIVE)
    }
}

fn add_sigma_xi(sigma: &Matrix, xi: &[f64], out: &mut Vector) {
    for i in 0..sigma.nrows() {
        let mut acc = 0.0;
        for (j, x) in xi.iter().enumerate() {
            acc += sigma[(i, j)] * x;
        }
        out[i] += acc;
    }
}

/// Steps the equation forward on the given draws.
pub fn simulate_direct_with(sys: &DiscreteSystem, draws: &NoiseDraws) -> Result<SeqPath> {
    let n = sys.horizon();
    let d = sys.dim();
    check_draws(sys, draws)?;
    let mut x: Vec<Vector> = Vec::with_capacity(n + 1);
    x.push(draws.initial.clone());
    for m in 0..n {
        let mut next = x[m].clone();
        for (j, xj) in x.iter().enumerate() {
            next += &sys.k()[m - j] * xj;
        }
        next += &sys.f()[m];
        add_sigma_xi(&sys.sigma()[m], draws.xi(m + 1), &mut next);
        x.push(next);
    }
    let path = SeqPath::new(d, x.iter().flat_map(|v| v.iter().copied()).collect());
    if path.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("discrete path"));
    }
    Ok(path)
}

pub fn simulate_direct(sys: &DiscreteSystem, master_seed: u64, path_index: u64) -> Result<SeqPath> {
    simulate_direct_with(sys, &draw_noise(sys, master_seed, path_index))
}

fn check_draws(sys: &DiscreteSystem, draws: &NoiseDraws) -> Result<()> {
    if draws.noise_dim != sys.noise_dim() || draws.len() != sys.horizon() {
        return Err(Error::LengthMismatch {
            what: "noise draws",
            expected: sys.horizon() * sys.noise_dim(),
            found: draws.increments.len(),
        });
    }
    if draws.initial.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            what: "initial value",
            expected: sys.dim(),
            found: draws.initial.len(),
        });
    }
    Ok(())
}

/// `X(n) = R(n) ξ + Σ_{j=1}^{n} R(n-j) [f(j-1) + σ(j-1) ξ(j)]`.
pub fn simulate_voc(r: &[Matrix], sys: &DiscreteSystem, draws: &NoiseDraws) -> Result<SeqPath> {
    let n = sys.horizon();
    let d = sys.dim();
    if r.len() < n + 1 {
        return Err(Error::LengthMismatch {
            what: "resolvent",
            expected: n + 1,
            found: r.len(),
        });
    }
    check_draws(sys, draws)?;
    let inputs: Vec<Vector> = (1..=n)
        .map(|j| {
            let mut v = sys.f()[j - 1].clone();
            add_sigma_xi(&sys.sigma()[j - 1], draws.xi(j), &mut v);
            v
        })
        .collect();
    let mut data = Vec::with_capacity((n + 1) * d);
    for m in 0..=n {
        let mut x = &r[m] * &draws.initial;
        for j in 1..=m {
            x += &r[m - j] * &inputs[j - 1];
        }
        data.extend(x.iter());
    }
    Ok(SeqPath::new(d, data))
}

/// `M` direct-solver paths, path `i` on stream `(master_seed, i)`.
pub fn simulate_ensemble(sys: &DiscreteSystem, master_seed: u64, paths: usize) -> Result<Vec<SeqPath>> {
    map_paths(paths, |i| simulate_direct(sys, master_seed, i))
        .into_iter()
        .collect()
}

/// `S(N) = Σ_{n<=N} ‖X(n)‖^p` for every `N`.
pub fn lp_partial_sums(path: &SeqPath, p: f64, norm: Norm) -> Result<Vec<f64>> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("ℓ^p sums need p >= 1, got {p}")));
    }
    let mut acc = 0.0;
    Ok((0..path.len())
        .map(|n| {
            acc += norm.of(path.at(n)).powf(p);
            acc
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::system::MatrixSeq;
    use crate::noise::NoiseSpec;

    fn scalar_sys(k0: f64, f: f64, sigma: f64, xi: f64, n: usize) -> DiscreteSystem {
        DiscreteSystem::new(
            KernelSeq::scalar_head(k0),
            MatrixSeq::Constant(Matrix::from_element(1, 1, f)),
            MatrixSeq::Constant(Matrix::from_element(1, 1, sigma)),
            NoiseSpec::gaussian(1),
            Some(Initial::Fixed(Vector::from_element(1, xi))),
            n,
        )
        .unwrap()
    }

    #[test]
    fn resolvent_examples() {
        let r = resolvent_seq(&KernelSeq::zero(3), 5);
        assert!(r.iter().all(|m| *m == Matrix::identity(3, 3)));
        let r = resolvent_seq(&KernelSeq::scalar_head(-0.5), 20);
        for (n, m) in r.iter().enumerate() {
            assert_eq!(m[(0, 0)], 2f64.powi(-(n as i32)));
        }
        let r = resolvent_seq(&KernelSeq::scalar_head(-1.0), 5);
        assert_eq!(r[0][(0, 0)], 1.0);
        assert!(r[1..].iter().all(|m| m[(0, 0)] == 0.0));
    }

    #[test]
    fn direct_examples() {
        let p = simulate_direct(&scalar_sys(0.0, 0.0, 0.0, 3.0, 10), 1, 0).unwrap();
        assert!(p.as_flat().iter().all(|&v| v == 3.0));
        let p = simulate_direct(&scalar_sys(0.0, 1.0, 0.0, 0.0, 10), 1, 0).unwrap();
        assert!(p.as_flat().iter().enumerate().all(|(n, &v)| v == n as f64));
        let p = simulate_direct(&scalar_sys(-0.5, 0.0, 0.0, 1.0, 10), 1, 0).unwrap();
        assert!(p.as_flat().iter().enumerate().all(|(n, &v)| v == 2f64.powi(-(n as i32))));
    }

    #[test]
    fn voc_with_trivial_kernel_is_a_partial_sum() {
        let sys = scalar_sys(0.0, 0.3, 1.0, 0.5, 50);
        let draws = draw_noise(&sys, 7, 3);
        let r = resolvent_seq(sys.kernel(), 50);
        let p = simulate_voc(&r, &sys, &draws).unwrap();
        let mut acc = 0.5;
        for n in 1..=50 {
            acc += 0.3 + draws.xi(n)[0];
            assert!((p.at(n)[0] - acc).abs() < 1e-12);
        }
        assert!(simulate_voc(&r[..10], &sys, &draws).is_err());
    }

    #[test]
    fn partial_sums() {
        let x = SeqPath::from_scalars((0..=20).map(|n| 2f64.powi(-n)).collect());
        let s = lp_partial_sums(&x, 1.0, Norm::Max).unwrap();
        for (n, v) in s.iter().enumerate() {
            assert!((v - (2.0 - 2f64.powi(-(n as i32)))).abs() < 1e-15);
        }
        let ones = SeqPath::from_scalars(vec![1.0; 11]);
        assert_eq!(lp_partial_sums(&ones, 2.0, Norm::Max).unwrap()[10], 11.0);
        assert!(lp_partial_sums(&ones, 0.5, Norm::Max).is_err());
    }
}
