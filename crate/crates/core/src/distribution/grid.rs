//! Tensor trapezoid rule over `m` concentric circles.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fredholm::det::{evaluate, LevelData, NodeValues, Want};
use crate::fredholm::{series_d, shell_sum, KernelParams, SeriesKind, TruncationSpec};
use crate::quad::{circle_angles, pairwise_sum};
use crate::{Error, Result};

/// Everything an integrand may need at one quadrature node.
pub(crate) struct Node<'a> {
    pub params: KernelParams,
    levels: Vec<&'a LevelData>,
    trunc: &'a TruncationSpec,
}

impl Node<'_> {
    #[inline]
    pub fn z(&self) -> &[Complex64] {
        &self.params.z
    }

    /// Series values at this node and an absolute truncation estimate,
    /// through the determinant when every order is requested and through the
    /// capped shell sums otherwise.
    pub fn series(&self, want: Want) -> Result<(NodeValues, f64)> {
        match self.trunc.max_order {
            None => {
                let v = evaluate(&self.levels, want, self.trunc.tol)?;
                let scale = [v.d_all - 1.0, v.dhat_all, v.d_pos, v.dhat_pos, v.d_one, v.dhat_one]
                    .iter()
                    .map(|x| x.norm())
                    .fold(0.0, f64::max);
                Ok((v, v.edge * scale))
            }
            Some(_) => {
                let mut v = NodeValues::default();
                let mut last = 0.0f64;
                let kinds: &[SeriesKind] = if want.hat { &[SeriesKind::D, SeriesKind::DHat] } else { &[SeriesKind::D] };
                for &kind in kinds {
                    if want.all {
                        let r = series_d(&self.params, self.trunc, kind, true)?;
                        last = last.max(r.last_shell);
                        match kind {
                            SeriesKind::D => v.d_all = r.value,
                            SeriesKind::DHat => v.dhat_all = r.value,
                        }
                    }
                    if want.positive {
                        let r = series_d(&self.params, self.trunc, kind, false)?;
                        last = last.max(r.last_shell);
                        match kind {
                            SeriesKind::D => v.d_pos = r.value,
                            SeriesKind::DHat => v.dhat_pos = r.value,
                        }
                    }
                    if want.ones {
                        let ones = vec![1; self.params.m()];
                        let s = shell_sum(&self.params, self.trunc, &ones, kind)?;
                        match kind {
                            SeriesKind::D => v.d_one = s,
                            SeriesKind::DHat => v.dhat_one = s,
                        }
                    }
                }
                Ok((v, last))
            }
        }
    }

    /// One shell `D_n/(n!)²` (or its hatted version).
    pub fn shell(&self, n: &[usize], kind: SeriesKind) -> Result<Complex64> {
        shell_sum(&self.params, self.trunc, n, kind)
    }
}

/// Integrand values at one node and an absolute truncation estimate.
pub(crate) struct NodeOut {
    pub values: Vec<Complex64>,
    pub trunc: f64,
}

pub(crate) struct GridSum {
    /// trapezoid means on the full grid
    pub fine: Vec<Complex64>,
    /// trapezoid means on the every-other-node subgrid
    pub coarse: Vec<Complex64>,
    pub max_abs: Vec<f64>,
    pub trunc: f64,
    pub nodes: usize,
}

impl GridSum {
    /// `|I_N − I_{N/2}|` with a floor for rounding in the node sum.
    pub fn quad_proxy(&self, k: usize) -> f64 {
        (self.fine[k] - self.coarse[k]).norm().max(1e-15 * self.max_abs[k])
    }
}

/// Averages `f` over the product of circles `|z_i| = radii[i]` with `nodes`
/// equispaced angles on each.
pub(crate) fn integrate<F>(
    template: &KernelParams,
    radii: &[f64],
    nodes: usize,
    trunc: &TruncationSpec,
    outputs: usize,
    f: F,
) -> Result<GridSum>
where
    F: Fn(&Node) -> Result<NodeOut> + Sync,
{
    let m = radii.len();
    if nodes < 16 || nodes % 2 != 0 {
        return Err(Error::InvalidArgument(format!("nodes per circle must be even and at least 16, got {nodes}")));
    }
    let angles = circle_angles(nodes);
    let points: Vec<Vec<Complex64>> =
        radii.iter().map(|&r| angles.iter().map(|&t| Complex64::from_polar(r, t)).collect()).collect();
    let level_data: Vec<Vec<LevelData>> = if trunc.max_order.is_none() {
        (0..m)
            .map(|i| {
                points[i]
                    .par_iter()
                    .map(|&z| LevelData::build(template, i, z, trunc))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?
    } else {
        vec![]
    };
    let total = nodes.pow(m as u32);
    let results: Vec<Result<NodeOut>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rest = idx;
            let mut z = Vec::with_capacity(m);
            let mut levels = Vec::with_capacity(m);
            for i in 0..m {
                let j = rest % nodes;
                rest /= nodes;
                z.push(points[i][j]);
                if let Some(row) = level_data.get(i) {
                    levels.push(&row[j]);
                }
            }
            let params = template.with_z(z)?;
            let out = f(&Node { params, levels, trunc })?;
            debug_assert_eq!(out.values.len(), outputs);
            Ok(out)
        })
        .collect();
    let mut cols: Vec<Vec<Complex64>> = vec![Vec::with_capacity(total); outputs];
    let mut sub: Vec<Vec<Complex64>> = vec![Vec::with_capacity(total >> m); outputs];
    let mut max_abs = vec![0.0f64; outputs];
    let mut tr = 0.0f64;
    for (idx, r) in results.into_iter().enumerate() {
        let out = r?;
        tr = tr.max(out.trunc);
        let mut rest = idx;
        let mut even = true;
        for _ in 0..m {
            even &= (rest % nodes) % 2 == 0;
            rest /= nodes;
        }
        for k in 0..outputs {
            let v = out.values[k];
            if !v.is_finite() {
                return Err(Error::IllConditioned(format!(
                    "integrand is not finite at node {idx}; the terms exceed double range"
                )));
            }
            max_abs[k] = max_abs[k].max(v.norm());
            cols[k].push(v);
            if even {
                sub[k].push(v);
            }
        }
    }
    let fine = cols.iter().map(|c| pairwise_sum(c) / total as f64).collect();
    let coarse = sub.iter().map(|c| pairwise_sum(c) / c.len() as f64).collect();
    Ok(GridSum { fine, coarse, max_abs, trunc: tr, nodes: total })
}
