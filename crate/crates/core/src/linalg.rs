//! Dense weighted least squares for the handful of columns the surrogate fit needs.

use crate::scalar::Scalar;

/// Minimises `Σ w_i (y_i − x_i·β)²` by Householder QR on the row-scaled,
/// column-equilibrated design. Returns `None` if a column is (numerically)
/// dependent on the others, i.e. the condition estimate exceeds `max_condition`.
pub(crate) fn weighted_lstsq<S: Scalar>(rows: &[Vec<S>], y: &[S], w: &[S], max_condition: S) -> Option<Vec<S>> {
    let m = rows.len();
    let p = rows.first()?.len();
    if m < p || p == 0 {
        return None;
    }
    // Column-major working copy of sqrt(W)·X and sqrt(W)·y.
    let mut a: Vec<Vec<S>> = (0..p)
        .map(|j| (0..m).map(|i| rows[i][j] * w[i].sqrt()).collect())
        .collect();
    let mut b: Vec<S> = (0..m).map(|i| y[i] * w[i].sqrt()).collect();

    let mut scale = vec![S::one(); p];
    for (j, col) in a.iter_mut().enumerate() {
        let norm = col.iter().fold(S::zero(), |acc, &v| acc + v * v).sqrt();
        if !(norm > S::zero()) {
            return None;
        }
        scale[j] = norm;
        col.iter_mut().for_each(|v| *v /= norm);
    }

    for k in 0..p {
        let norm = a[k][k..].iter().fold(S::zero(), |acc, &v| acc + v * v).sqrt();
        if !(norm > S::zero()) {
            return None;
        }
        let alpha = if a[k][k] > S::zero() { -norm } else { norm };
        let mut v: Vec<S> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2 = v.iter().fold(S::zero(), |acc, &x| acc + x * x);
        if vnorm2 > S::zero() {
            let two = S::lit(2.0);
            for col in a.iter_mut().skip(k) {
                let dot = v.iter().zip(&col[k..]).fold(S::zero(), |acc, (&vi, &ci)| acc + vi * ci);
                let f = two * dot / vnorm2;
                for (ci, &vi) in col[k..].iter_mut().zip(&v) {
                    *ci -= f * vi;
                }
            }
            let dot = v.iter().zip(&b[k..]).fold(S::zero(), |acc, (&vi, &bi)| acc + vi * bi);
            let f = two * dot / vnorm2;
            for (bi, &vi) in b[k..].iter_mut().zip(&v) {
                *bi -= f * vi;
            }
        }
    }

    let diag: Vec<S> = (0..p).map(|k| a[k][k].abs()).collect();
    let dmax = diag.iter().copied().fold(S::zero(), S::max);
    let dmin = diag.iter().copied().fold(S::infinity(), S::min);
    let condition = dmax / dmin;
    if !(condition <= max_condition) {
        return None;
    }

    let mut coef = vec![S::zero(); p];
    for k in (0..p).rev() {
        let mut acc = b[k];
        for j in k + 1..p {
            acc -= a[j][k] * coef[j];
        }
        coef[k] = acc / a[k][k];
    }
    for (c, s) in coef.iter_mut().zip(&scale) {
        *c /= *s;
    }
    Some(coef)
}
