/// Dense row-major tensor of `f64`. Rank is arbitrary but almost all of the
/// crate works with rank-2 (matrices) and rank-3 (images).
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: &[usize], data: Vec<f64>) -> Tensor {
        let len: usize = shape.iter().product();
        assert!(!shape.is_empty() && shape.iter().all(|&d| d > 0), "empty or zero dim in shape {shape:?}");
        assert_eq!(len, data.len(), "shape {shape:?} does not match {} elements", data.len());
        Tensor { shape: shape.to_vec(), data }
    }

    pub fn zeros(shape: &[usize]) -> Tensor {
        let len: usize = shape.iter().product();
        Tensor::new(shape, vec![0.0; len])
    }

    pub fn scalar(v: f64) -> Tensor {
        Tensor::new(&[1, 1], vec![v])
    }

    /// 1 x n row vector.
    pub fn row(values: &[f64]) -> Tensor {
        Tensor::new(&[1, values.len()], values.to_vec())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Scalar tensors are [1,1] (or any all-ones shape).
    pub fn item(&self) -> f64 {
        assert_eq!(self.data.len(), 1, "item() on tensor of shape {:?}", self.shape);
        self.data[0]
    }

    pub fn rows(&self) -> usize {
        assert_eq!(self.shape.len(), 2, "rows() on rank-{} tensor", self.shape.len());
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        assert_eq!(self.shape.len(), 2, "cols() on rank-{} tensor", self.shape.len());
        self.shape[1]
    }

    pub fn at2(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols() + c]
    }

    pub fn row_slice(&self, r: usize) -> &[f64] {
        let w = self.cols();
        &self.data[r * w..(r + 1) * w]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Reinterpret the same buffer under a new shape of equal element count.
    pub fn reshaped(&self, shape: &[usize]) -> Tensor {
        Tensor::new(shape, self.data.clone())
    }

    pub fn transposed(&self) -> Tensor {
        let (r, c) = (self.rows(), self.cols());
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                out[j * r + i] = self.data[i * c + j];
            }
        }
        Tensor::new(&[c, r], out)
    }
}

/// out += a @ b, with a: [m,k], b: [k,n], out: [m,n]. The i-k-j loop order
/// keeps the inner loop streaming over contiguous rows of `b`, which is what
/// makes training runs tractable.
pub fn mm_nn_acc(a: &[f64], b: &[f64], out: &mut [f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let orow = &mut out[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for j in 0..n {
                orow[j] += av * brow[j];
            }
        }
    }
}

/// out += a @ b^T, with a: [m,k], b: [n,k], out: [m,n].
pub fn mm_nt_acc(a: &[f64], b: &[f64], out: &mut [f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), n * k);
    debug_assert_eq!(out.len(), m * n);
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let orow = &mut out[i * n..(i + 1) * n];
        for j in 0..n {
            let brow = &b[j * k..(j + 1) * k];
            let mut acc = 0.0;
            for p in 0..k {
                acc += arow[p] * brow[p];
            }
            orow[j] += acc;
        }
    }
}

/// out += a^T @ b, with a: [k,m], b: [k,n], out: [m,n].
pub fn mm_tn_acc(a: &[f64], b: &[f64], out: &mut [f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), k * m);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    for p in 0..k {
        let arow = &a[p * m..(p + 1) * m];
        let brow = &b[p * n..(p + 1) * n];
        for i in 0..m {
            let av = arow[i];
            if av == 0.0 {
                continue;
            }
            let orow = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                orow[j] += av * brow[j];
            }
        }
    }
}

pub fn matmul(a: &Tensor, b: &Tensor) -> Tensor {
    let (m, k) = (a.rows(), a.cols());
    let (k2, n) = (b.rows(), b.cols());
    assert_eq!(k, k2, "matmul inner dims {k} vs {k2}");
    let mut out = Tensor::zeros(&[m, n]);
    mm_nn_acc(a.data(), b.data(), out.data_mut(), m, k, n);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small() {
        // [[1,2],[3,4]] @ [[5,6],[7,8]] = [[19,22],[43,50]]
        let a = Tensor::new(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]);
        let b = Tensor::new(&[2, 2], vec![5.0, 6.0, 7.0, 8.0]);
        assert_eq!(matmul(&a, &b).data(), &[19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn matmul_rectangular() {
        let a = Tensor::new(&[1, 3], vec![1.0, 2.0, 3.0]);
        let b = Tensor::new(&[3, 2], vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        assert_eq!(matmul(&a, &b).data(), &[14.0, 32.0]);
    }

    #[test]
    fn transposed_variants_agree_with_plain_matmul() {
        let a = Tensor::new(&[2, 3], vec![1.0, -2.0, 0.5, 3.0, 4.0, -1.0]);
        let b = Tensor::new(&[3, 4], (0..12).map(|i| i as f64 * 0.25 - 1.0).collect());

        let nn = matmul(&a, &b);

        let mut nt = vec![0.0; 2 * 4];
        mm_nt_acc(a.data(), b.transposed().data(), &mut nt, 2, 3, 4);
        assert_eq!(nn.data(), &nt[..]);

        let mut tn = vec![0.0; 2 * 4];
        mm_tn_acc(a.transposed().data(), b.data(), &mut tn, 2, 3, 4);
        assert_eq!(nn.data(), &tn[..]);
    }

    #[test]
    fn transpose_round_trip() {
        let a = Tensor::new(&[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(a.transposed().transposed(), a);
        assert_eq!(a.transposed().at2(2, 1), 6.0);
    }

    #[test]
    #[should_panic(expected = "does not match")]
    fn shape_mismatch_panics() {
        Tensor::new(&[2, 2], vec![1.0, 2.0, 3.0]);
    }
}
