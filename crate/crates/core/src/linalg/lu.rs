use super::{minimum_degree, norm2, CsrMatrix};
use crate::{Error, Result};

/// Pivots below `SINGULAR_PIVOT_RTOL * max|A|` are treated as zero.
pub const SINGULAR_PIVOT_RTOL: f64 = 1e-14;

/// Pivot selection strategy of [`SparseLu`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pivoting {
    /// Threshold partial pivoting: the diagonal entry is kept whenever its
    /// magnitude is at least `threshold` times the largest candidate.
    Partial { threshold: f64 },
    /// Diagonal pivots only, each required to be positive. Succeeds exactly
    /// when the (symmetric) matrix is positive definite, up to round-off.
    PositiveDiagonal,
}

impl Default for Pivoting {
    fn default() -> Self {
        Pivoting::Partial { threshold: 0.1 }
    }
}

/// Sparse LU factorization `P A Q = L U`.
///
/// Left-looking (Gilbert–Peierls) column elimination. `L` is unit lower
/// triangular with the unit diagonal stored first in each column, `U` keeps
/// its diagonal last. Both are stored column-wise with rows already mapped to
/// pivot order.
#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    /// Row `i` of `A` becomes pivot row `pinv[i]`.
    pinv: Vec<usize>,
    /// Column `k` of the factor is column `q[k]` of `A`.
    q: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    up: Vec<usize>,
    ui: Vec<usize>,
    ux: Vec<f64>,
}

struct Csc {
    p: Vec<usize>,
    i: Vec<usize>,
    x: Vec<f64>,
}

impl Csc {
    fn from_csr(a: &CsrMatrix) -> Self {
        let n = a.n_cols();
        let mut count = vec![0usize; n + 1];
        for &c in a.col_idx() {
            count[c + 1] += 1;
        }
        for k in 0..n {
            count[k + 1] += count[k];
        }
        let mut next = count.clone();
        let mut i = vec![0; a.nnz()];
        let mut x = vec![0.0; a.nnz()];
        for r in 0..a.n_rows() {
            for (c, v) in a.row(r) {
                i[next[c]] = r;
                x[next[c]] = v;
                next[c] += 1;
            }
        }
        Csc { p: count, i, x }
    }
}

const UNSET: usize = usize::MAX;

impl SparseLu {
    pub fn factorize(a: &CsrMatrix) -> Result<Self> {
        Self::factorize_with(a, Pivoting::default())
    }

    pub fn factorize_with(a: &CsrMatrix, pivoting: Pivoting) -> Result<Self> {
        let n = a.n_rows();
        if n != a.n_cols() {
            return Err(Error::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                n,
                a.n_cols()
            )));
        }
        if a.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix to factorize"));
        }
        let q = minimum_degree(a);
        let csc = Csc::from_csr(a);
        let threshold = SINGULAR_PIVOT_RTOL * a.max_abs();

        let mut lu = SparseLu {
            n,
            pinv: vec![UNSET; n],
            q,
            lp: Vec::with_capacity(n + 1),
            li: Vec::with_capacity(4 * a.nnz()),
            lx: Vec::with_capacity(4 * a.nnz()),
            up: Vec::with_capacity(n + 1),
            ui: Vec::with_capacity(4 * a.nnz()),
            ux: Vec::with_capacity(4 * a.nnz()),
        };

        let mut x = vec![0.0; n];
        let mut xi = vec![0usize; n];
        let mut mark = vec![usize::MAX; n];
        let mut stack = vec![0usize; n];
        let mut pstack = vec![0usize; n];

        for k in 0..n {
            lu.lp.push(lu.li.len());
            lu.up.push(lu.ui.len());
            let col = lu.q[k];

            // x = L \ A(:, col) restricted to the reach of the column pattern
            let top = lu.reach(&csc, col, k, &mut xi, &mut mark, &mut stack, &mut pstack);
            for &j in &xi[top..] {
                x[j] = 0.0;
            }
            for p in csc.p[col]..csc.p[col + 1] {
                x[csc.i[p]] = csc.x[p];
            }
            for px in top..n {
                let j = xi[px];
                let jj = lu.pinv[j];
                if jj == UNSET {
                    continue;
                }
                let xj = x[j];
                for p in lu.lp[jj] + 1..lu.lp[jj + 1] {
                    x[lu.li[p]] -= lu.lx[p] * xj;
                }
            }

            let mut ipiv = UNSET;
            let mut amax = -1.0f64;
            for &i in &xi[top..] {
                if lu.pinv[i] == UNSET {
                    if x[i].abs() > amax {
                        amax = x[i].abs();
                        ipiv = i;
                    }
                } else {
                    lu.ui.push(lu.pinv[i]);
                    lu.ux.push(x[i]);
                }
            }
            match pivoting {
                Pivoting::Partial { threshold: t } => {
                    let diag_free = lu.pinv[col] == UNSET && mark[col] == k;
                    if diag_free && x[col].abs() >= t * amax {
                        ipiv = col;
                    }
                }
                Pivoting::PositiveDiagonal => {
                    let in_pattern = lu.pinv[col] == UNSET && mark[col] == k;
                    let d = if in_pattern { x[col] } else { 0.0 };
                    if d <= threshold {
                        return Err(Error::SingularMatrix {
                            column: col,
                            pivot: d,
                            threshold,
                        });
                    }
                    ipiv = col;
                }
            }
            if ipiv == UNSET || x[ipiv].abs() <= threshold {
                return Err(Error::SingularMatrix {
                    column: col,
                    pivot: if ipiv == UNSET { 0.0 } else { x[ipiv] },
                    threshold,
                });
            }
            let pivot = x[ipiv];
            lu.ui.push(k);
            lu.ux.push(pivot);
            lu.pinv[ipiv] = k;
            lu.li.push(ipiv);
            lu.lx.push(1.0);
            for &i in &xi[top..] {
                if lu.pinv[i] == UNSET {
                    lu.li.push(i);
                    lu.lx.push(x[i] / pivot);
                }
                x[i] = 0.0;
            }
        }
        lu.lp.push(lu.li.len());
        lu.up.push(lu.ui.len());
        for r in lu.li.iter_mut() {
            *r = lu.pinv[*r];
        }
        Ok(lu)
    }

    /// Depth-first reach of column `col` of `A` through the columns of `L`
    /// computed so far. Returns `top` such that `xi[top..]` holds the reach in
    /// topological order. Nodes are marked with the stamp `k`.
    #[allow(clippy::too_many_arguments)]
    fn reach(
        &self,
        a: &Csc,
        col: usize,
        k: usize,
        xi: &mut [usize],
        mark: &mut [usize],
        stack: &mut [usize],
        pstack: &mut [usize],
    ) -> usize {
        let n = self.n;
        let mut top = n;
        // columns of L that are complete; the one being built is not yet pushed
        let n_done = self.lp.len() - 1;
        for p in a.p[col]..a.p[col + 1] {
            let start = a.i[p];
            if mark[start] == k {
                continue;
            }
            let mut head = 0usize;
            stack[0] = start;
            loop {
                let j = stack[head];
                let jnew = self.pinv[j];
                if mark[j] != k {
                    mark[j] = k;
                    pstack[head] = if jnew == UNSET { 0 } else { self.lp[jnew] + 1 };
                }
                let end = if jnew == UNSET || jnew >= n_done {
                    0
                } else {
                    self.lp[jnew + 1]
                };
                let mut done = true;
                let mut q = pstack[head];
                while q < end {
                    let i = self.li[q];
                    q += 1;
                    if mark[i] == k {
                        continue;
                    }
                    pstack[head] = q;
                    head += 1;
                    stack[head] = i;
                    done = false;
                    break;
                }
                if done {
                    top -= 1;
                    xi[top] = j;
                    if head == 0 {
                        break;
                    }
                    head -= 1;
                }
            }
        }
        top
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored entries in `L` and `U` together.
    pub fn fill(&self) -> usize {
        self.lx.len() + self.ux.len()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::Dimension(format!(
                "rhs length {} for system of size {}",
                b.len(),
                self.n
            )));
        }
        let mut y = vec![0.0; self.n];
        for (i, &bi) in b.iter().enumerate() {
            y[self.pinv[i]] = bi;
        }
        for j in 0..self.n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.lp[j] + 1..self.lp[j + 1] {
                    y[self.li[p]] -= self.lx[p] * yj;
                }
            }
        }
        for j in (0..self.n).rev() {
            let d = self.up[j + 1] - 1;
            y[j] /= self.ux[d];
            let yj = y[j];
            if yj != 0.0 {
                for p in self.up[j]..d {
                    y[self.ui[p]] -= self.ux[p] * yj;
                }
            }
        }
        let mut out = vec![0.0; self.n];
        for (k, &col) in self.q.iter().enumerate() {
            out[col] = y[k];
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("LU solution"));
        }
        Ok(out)
    }
}

/// Solver for `M[S,S] y[S] = b[S]` where `S` is the support of an SPD block
/// of a symmetric, otherwise singular `M`. Realizes `M⁺ b` for `b` in the
/// range of `M`. The factorization is built once and reused.
#[derive(Debug, Clone)]
pub struct RestrictedSpdSolver {
    n: usize,
    support: Vec<usize>,
    in_support: Vec<bool>,
    lu: SparseLu,
}

impl RestrictedSpdSolver {
    pub fn new(m: &CsrMatrix, support: &[usize]) -> Result<Self> {
        let n = m.n_rows();
        let mut in_support = vec![false; n];
        for &s in support {
            if s >= n {
                return Err(Error::Dimension(format!("support index {s} >= {n}")));
            }
            in_support[s] = true;
        }
        let block = m.submatrix(support, support);
        let lu = SparseLu::factorize_with(&block, Pivoting::PositiveDiagonal)?;
        Ok(Self {
            n,
            support: support.to_vec(),
            in_support,
            lu,
        })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::Dimension(format!(
                "rhs length {} for matrix of size {}",
                b.len(),
                self.n
            )));
        }
        let total = norm2(b);
        let outside = b
            .iter()
            .zip(&self.in_support)
            .filter(|(_, &s)| !s)
            .map(|(v, _)| v * v)
            .sum::<f64>()
            .sqrt();
        if outside > 1e-12 * total {
            return Err(Error::InconsistentRhs { outside, total });
        }
        let rhs: Vec<f64> = self.support.iter().map(|&i| b[i]).collect();
        let ys = self.lu.solve(&rhs)?;
        let mut y = vec![0.0; self.n];
        for (k, &i) in self.support.iter().enumerate() {
            y[i] = ys[k];
        }
        Ok(y)
    }
}
