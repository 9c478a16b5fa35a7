//! Pointwise affine maps on channel-major fields, chunked over grid points so
//! the working set stays in cache.

const CHUNK: usize = 256;

/// `y[j] = b[j] + sum_i w[j][i] x[i]` at every point; `y` is overwritten.
pub(crate) fn affine_forward(w: &[f64], b: &[f64], x: &[f64], cin: usize, cout: usize, p: usize, y: &mut [f64]) {
    debug_assert_eq!(x.len(), cin * p);
    debug_assert_eq!(y.len(), cout * p);
    let mut start = 0;
    while start < p {
        let len = CHUNK.min(p - start);
        for j in 0..cout {
            let yj = &mut y[j * p + start..][..len];
            yj.fill(b[j]);
            let wj = &w[j * cin..(j + 1) * cin];
            for (i, &wji) in wj.iter().enumerate() {
                let xi = &x[i * p + start..][..len];
                for (a, &c) in yj.iter_mut().zip(xi) {
                    *a += wji * c;
                }
            }
        }
        start += len;
    }
}

/// Reverse of [`affine_forward`]: accumulates into `gw`, `gb` and, when
/// given, `gx`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn affine_backward(
    w: &[f64],
    x: &[f64],
    gy: &[f64],
    cin: usize,
    cout: usize,
    p: usize,
    gw: &mut [f64],
    gb: &mut [f64],
    mut gx: Option<&mut [f64]>,
) {
    for j in 0..cout {
        let g = &gy[j * p..(j + 1) * p];
        gb[j] += g.iter().sum::<f64>();
        for i in 0..cin {
            gw[j * cin + i] += dot(g, &x[i * p..(i + 1) * p]);
        }
    }
    if let Some(gx) = gx.as_deref_mut() {
        let mut start = 0;
        while start < p {
            let len = CHUNK.min(p - start);
            for i in 0..cin {
                let gxi = &mut gx[i * p + start..][..len];
                for j in 0..cout {
                    let wji = w[j * cin + i];
                    let g = &gy[j * p + start..][..len];
                    for (a, &c) in gxi.iter_mut().zip(g) {
                        *a += wji * c;
                    }
                }
            }
            start += len;
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, ra) = a.split_at(a.len() / 4 * 4);
    let (cb, rb) = b.split_at(ca.len());
    for (x, y) in ca.chunks_exact(4).zip(cb.chunks_exact(4)) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn relu_in_place(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// Zero the gradient wherever the activation output is not positive.
pub(crate) fn relu_mask(grad: &mut [f64], activated: &[f64]) {
    for (g, &a) in grad.iter_mut().zip(activated) {
        if a <= 0.0 {
            *g = 0.0;
        }
    }
}
