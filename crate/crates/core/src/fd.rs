//! Central finite differences of fourth-order accuracy on uniform grids.
//!
//! No one-sided fallback: nodes whose stencil leaves the grid, or touches a
//! masked sample, come back as `None`.

use crate::error::{Result, UdmError};

/// Weights of the central stencil for the `order`-th derivative at unit spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub order: usize,
    pub radius: usize,
    /// Weights for offsets −radius…radius.
    pub weights: Vec<f64>,
}

impl Stencil {
    /// Fourth-order accurate central stencil.
    pub fn central(order: usize) -> Self {
        let radius = (order + 1) / 2 + 1;
        let offsets: Vec<f64> = (-(radius as i64)..=radius as i64).map(|o| o as f64).collect();
        let mut weights = fornberg(order, 0.0, &offsets);
        // symmetric stencils have exactly (anti)symmetric weights
        for j in 0..radius {
            let m = weights.len() - 1 - j;
            let avg = 0.5 * (weights[j].abs() + weights[m].abs());
            weights[j] = avg.copysign(weights[j]);
            weights[m] = avg.copysign(weights[m]);
        }
        if order % 2 == 1 {
            weights[radius] = 0.0;
        }
        Self { order, radius, weights }
    }

    pub fn width(&self) -> usize {
        2 * self.radius + 1
    }
}

/// Fornberg's recursion: weights at nodes `x` for the `m`-th derivative at `z`.
pub fn fornberg(m: usize, z: f64, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c.swap_remove(m)
}

/// `order`-th derivative of samples with spacing `h`.
pub fn derivative(values: &[f64], h: f64, order: usize) -> Result<Vec<Option<f64>>> {
    let wrapped: Vec<Option<f64>> = values.iter().copied().map(Some).collect();
    derivative_masked(&wrapped, h, order)
}

/// As [`derivative`], for samples that may themselves be masked.
pub fn derivative_masked(values: &[Option<f64>], h: f64, order: usize) -> Result<Vec<Option<f64>>> {
    if order == 0 {
        return Ok(values.to_vec());
    }
    let st = Stencil::central(order);
    if values.len() < st.width() {
        return Err(UdmError::GridTooSmall { len: values.len(), needed: st.width() });
    }
    let scale = h.powi(-(order as i32));
    let r = st.radius;
    let mut out = vec![None; values.len()];
    for (i, slot) in out.iter_mut().enumerate().take(values.len() - r).skip(r) {
        let mut acc = 0.0;
        let mut ok = true;
        for (w, v) in st.weights.iter().zip(&values[i - r..=i + r]) {
            match v {
                Some(v) => acc += w * v,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            *slot = Some(acc * scale);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_weights() {
        let d1 = Stencil::central(1);
        let want = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in d1.weights.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let d2 = Stencil::central(2);
        let want = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in d2.weights.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(Stencil::central(3).radius, 3);
        assert_eq!(Stencil::central(4).radius, 3);
    }

    #[test]
    fn weights_annihilate_low_monomials() {
        for order in 1..=9 {
            let st = Stencil::central(order);
            let r = st.radius as i64;
            for p in 0..order + 4 {
                let moment: f64 = st
                    .weights
                    .iter()
                    .zip(-r..=r)
                    .map(|(w, o)| w * (o as f64).powi(p as i32))
                    .sum();
                let want = if p == order { (1..=order).map(|j| j as f64).product() } else { 0.0 };
                assert!((moment - want).abs() < 1e-8 * want.max(1.0), "order {order} moment {p}");
            }
        }
    }

    #[test]
    fn fourth_order_convergence() {
        for order in 1..=4 {
            let err = |h: f64| {
                let xs: Vec<f64> = (0..201).map(|i| 0.7 + h * (i as f64 - 100.0)).collect();
                let v: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
                let d = derivative(&v, h, order).unwrap();
                let exact = match order % 4 {
                    1 => xs[100].cos(),
                    2 => -xs[100].sin(),
                    3 => -xs[100].cos(),
                    _ => xs[100].sin(),
                };
                (d[100].unwrap() - exact).abs()
            };
            let ratio = err(0.1) / err(0.05);
            assert!(ratio > 14.0 && ratio < 18.0, "order {order}: {ratio}");
        }
    }

    #[test]
    fn masking() {
        let v: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let d = derivative(&v, 1.0, 1).unwrap();
        assert!(d[0].is_none() && d[1].is_none() && d[8].is_none() && d[9].is_none());
        assert!((d[5].unwrap() - 1.0).abs() < 1e-14);
        let mut m: Vec<Option<f64>> = v.iter().copied().map(Some).collect();
        m[5] = None;
        let d = derivative_masked(&m, 1.0, 1).unwrap();
        assert!(d[3..=7].iter().all(Option::is_none));
        assert!(d[2].is_some());
        assert!(matches!(derivative(&v[..4], 1.0, 1), Err(UdmError::GridTooSmall { .. })));
    }
}
