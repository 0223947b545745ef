use serde::Serialize;

use crate::error::{Error, Result};
use crate::func::VectorFn;
use crate::grid::{GridPath, GridSpec};
use crate::manifest::Norm;
use crate::measure::{SignedMeasure, Support};
use crate::Matrix;

/// Explicit Euler for `r'(t) = ∫ν(ds) r(t-s)`, `r(0) = I`. Each node holds
/// `r(t_k)` row-major.
pub fn differential_resolvent(nu: &SignedMeasure, grid: &GridSpec) -> Result<GridPath> {
    if nu.support() != Support::HalfLine || nu.rows() != nu.cols() {
        return Err(Error::InvalidMeasure(
            "the differential resolvent needs a square kernel on [0, ∞)".into(),
        ));
    }
    let d = nu.rows();
    let weights = nu.discretize(grid)?;
    let h = grid.step();
    let mut r = GridPath::zeros(*grid, 0, d * d);
    for i in 0..d {
        r.at_mut(0)[i * d + i] = 1.0;
    }
    let mut acc = vec![0.0; d * d];
    for k in 0..grid.n_steps() {
        acc.fill(0.0);
        weights.apply_block(&r, k, d, &mut acc)?;
        let prev = r.at(k).to_vec();
        for (o, (p, a)) in r.at_mut(k + 1).iter_mut().zip(prev.iter().zip(&acc)) {
            *o = p + h * a;
        }
    }
    if !r.all_finite() {
        return Err(Error::NonFinite("resolvent"));
    }
    Ok(r)
}

/// `r(t_k)` as a matrix.
pub fn resolvent_entry(r: &GridPath, k: usize) -> Matrix {
    let d = (r.dim() as f64).sqrt().round() as usize;
    Matrix::from_row_slice(d, d, r.at(k))
}

/// `(r*f)(t_k) = Σ_{j<k} r(t_k - t_j) F_j` with `F_j` the cell integral of
/// `f` over `[t_j, t_j + h]`.
pub fn r_conv_f(r: &GridPath, forcing: &VectorFn, grid: &GridSpec) -> Result<GridPath> {
    let d = forcing.dim();
    if r.dim() != d * d || r.len() != grid.n_nodes() {
        return Err(Error::DimensionMismatch {
            what: "resolvent grid function",
            expected: d * d * grid.n_nodes(),
            found: r.dim() * r.len(),
        });
    }
    let n = grid.n_steps();
    let h = grid.step();
    let mut cells = vec![0.0; n * d];
    for (j, chunk) in cells.chunks_exact_mut(d).enumerate() {
        forcing.cell_integral(grid.time(j), h, chunk);
    }
    let mut out = GridPath::zeros(*grid, 0, d);
    if forcing.is_zero() {
        return Ok(out);
    }
    let rf = r.forward_flat();
    for k in 1..=n {
        let o = out.at_mut(k);
        for j in 0..k {
            let rk = &rf[(k - j) * d * d..(k - j + 1) * d * d];
            let fj = &cells[j * d..(j + 1) * d];
            for a in 0..d {
                let mut acc = 0.0;
                for b in 0..d {
                    acc += rk[a * d + b] * fj[b];
                }
                o[a] += acc;
            }
        }
    }
    Ok(out)
}

/// `∫_0^1 ∫_{t-u}^t f(s) ds du` on the grid. The inner integral sums cell
/// integrals (truncated at 0); the outer integral over `u` uses the
/// trapezoidal rule on the grid nodes, which is exact for the linear part in
/// `u` so the error stays uniform in `t`.
pub fn f3_transform(forcing: &VectorFn, grid: &GridSpec) -> Result<GridPath> {
    let d = forcing.dim();
    let h = grid.step();
    let m = grid.snap(1.0)? as usize;
    let n = grid.n_steps();
    let mut out = GridPath::zeros(*grid, 0, d);
    let mut cell = vec![0.0; d];
    for c in 0..d {
        // C_i = Σ_{i'<i} F_i', P_i = Σ_{i'<i} C_i'
        let mut cum = vec![0.0; n + 1];
        for k in 0..n {
            forcing.cell_integral(grid.time(k), h, &mut cell);
            cum[k + 1] = cum[k] + cell[c];
        }
        let mut pre = vec![0.0; n + 2];
        for i in 0..=n {
            pre[i + 1] = pre[i] + cum[i];
        }
        for k in 0..=n {
            let lo = k.saturating_sub(m);
            let far = if k >= m { cum[k - m] } else { 0.0 };
            let window_sum = pre[k + 1] - pre[lo];
            let trapezoid = h * window_sum - 0.5 * h * (cum[k] + far);
            out.at_mut(k)[c] = m as f64 * h * cum[k] - trapezoid;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSup {
    pub start: f64,
    pub end: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapProfile {
    /// `‖X(t_k) - (r*f)(t_k)‖` per node.
    pub values: Vec<f64>,
    pub blocks: Vec<BlockSup>,
}

/// Gap norms per node and their suprema over `[T_k, T_k + width]`.
pub fn pathwise_gap(
    x: &GridPath,
    rf: &GridPath,
    norm: Norm,
    block_starts: &[f64],
    width: f64,
) -> Result<GapProfile> {
    let diff = x.sub(rf)?;
    let grid = *x.grid();
    let values: Vec<f64> = (0..diff.len()).map(|k| norm.of(diff.at(k))).collect();
    let mut blocks = Vec::with_capacity(block_starts.len());
    for &start in block_starts {
        let a = grid.index_of(start);
        let b = grid.index_of(start + width).min(values.len() - 1);
        if a > b || a >= values.len() {
            return Err(Error::InvalidParameter(format!(
                "block [{start}, {}] lies outside the grid",
                start + width
            )));
        }
        let sup = values[a..=b].iter().copied().fold(0.0, f64::max);
        blocks.push(BlockSup {
            start,
            end: start + width,
            sup,
        });
    }
    Ok(GapProfile { values, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{from_fn, Constant};
    use std::sync::Arc;

    #[test]
    fn exponential_resolvent_is_first_order() {
        let nu = SignedMeasure::decay(1, 1.0);
        let mut errs = Vec::new();
        for h in [1e-2, 5e-3] {
            let g = GridSpec::new(h, 10.0).unwrap();
            let r = differential_resolvent(&nu, &g).unwrap();
            let e = (0..r.len())
                .map(|k| (r.at(k)[0] - (-g.time(k)).exp()).abs())
                .fold(0.0, f64::max);
            assert!(e <= 0.6 * h, "h {h} err {e}");
            errs.push(e);
        }
        let ratio = errs[0] / errs[1];
        assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn trivial_resolvents() {
        let g = GridSpec::new(0.01, 2.0).unwrap();
        let r = differential_resolvent(&SignedMeasure::zero(2, Support::HalfLine), &g).unwrap();
        assert!((0..r.len()).all(|k| r.at(k) == [1.0, 0.0, 0.0, 1.0]));
        let r = differential_resolvent(&SignedMeasure::decay(1, 2.0), &g).unwrap();
        let e = (0..r.len())
            .map(|k| (r.at(k)[0] - (-2.0 * g.time(k)).exp()).abs())
            .fold(0.0, f64::max);
        assert!(e < 2.0 * 0.01);
    }

    #[test]
    fn convolution_examples() {
        let g = GridSpec::new(1e-3, 3.0).unwrap();
        let r = differential_resolvent(&SignedMeasure::decay(1, 1.0), &g).unwrap();
        let one = VectorFn::scalar(Arc::new(Constant(1.0)));
        let c = r_conv_f(&r, &one, &g).unwrap();
        let e = (0..c.len())
            .map(|k| (c.at(k)[0] - (1.0 - (-g.time(k)).exp())).abs())
            .fold(0.0, f64::max);
        assert!(e < 2e-3, "{e}");
        let id = differential_resolvent(&SignedMeasure::zero(1, Support::HalfLine), &g).unwrap();
        let c = r_conv_f(&id, &VectorFn::constant(&[2.5]), &g).unwrap();
        assert!((0..c.len()).all(|k| (c.at(k)[0] - 2.5 * g.time(k)).abs() < 1e-9));
        assert!(r_conv_f(&r, &VectorFn::zero(1), &g).unwrap().forward_flat().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn f3_examples() {
        let h = 1e-3;
        let g = GridSpec::new(h, 20.0).unwrap();
        let c = f3_transform(&VectorFn::constant(&[3.0]), &g).unwrap();
        let lin = f3_transform(&VectorFn::scalar(from_fn("t", |t| t)), &g).unwrap();
        for k in g.index_of(1.0)..g.n_nodes() {
            let t = g.time(k);
            assert!((c.at(k)[0] - 1.5).abs() <= 2.0 * h);
            assert!((lin.at(k)[0] - (t / 2.0 - 1.0 / 6.0)).abs() <= 2.0 * h, "t {t}");
        }
    }

    #[test]
    fn gap_blocks() {
        let g = GridSpec::new(0.5, 4.0).unwrap();
        let x = GridPath::from_scalar(g, vec![0.0, 1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0, 0.0]).unwrap();
        let z = GridPath::zeros(g, 0, 1);
        let gap = pathwise_gap(&x, &z, Norm::Max, &[0.0, 3.0], 1.0).unwrap();
        assert_eq!(gap.blocks[0].sup, 2.0);
        assert_eq!(gap.blocks[1].sup, 2.0);
    }
}
