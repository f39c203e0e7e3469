#include "steklov/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "steklov/errors.hpp"

namespace steklov {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

Vector Matrix::operator*(const Vector& x) const {
  Vector y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* r = row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

double Matrix::max_asymmetry() const {
  double m = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < i; ++j)
      m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
  return m;
}

double dot(const Vector& x, const Vector& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const Vector& x) { return std::sqrt(dot(x, x)); }

Matrix cholesky(const Matrix& B) {
  const std::size_t n = B.rows();
  Matrix L(n, n);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, B(i, i));
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * max_diag;
  for (std::size_t i = 0; i < n; ++i) {
    double* li = L.row(i);
    for (std::size_t j = 0; j <= i; ++j) {
      const double* lj = L.row(j);
      double s = B(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      if (i == j) {
        if (!(s > floor))
          fail(ErrorKind::resolution,
               "mass matrix is not numerically positive definite (pivot " +
                   std::to_string(i) + "); increase the truncation N");
        li[i] = std::sqrt(s);
      } else {
        li[j] = s / lj[j];
      }
    }
  }
  return L;
}

Vector tridiagonal_eigenvalues(Vector d, Vector e) {
  const std::size_t n = d.size();
  if (n == 0) return d;
  e.resize(n, 0.0);
  e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (++iter > 60) fail(ErrorKind::invariant, "implicit QL did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

namespace {

struct Tridiagonal {
  Vector d, e;
  // Householder vectors v_k acting on indices k+1..n-1, with scale beta_k.
  std::vector<Vector> v;
  Vector beta;
};

Tridiagonal householder_reduce(Matrix A) {
  const std::size_t n = A.rows();
  Tridiagonal t;
  t.d.assign(n, 0.0);
  t.e.assign(n > 0 ? n - 1 : 0, 0.0);
  Vector p(n), w(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    Vector v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = A(k + 1 + i, k);
    double alpha = norm2(v);
    if (alpha == 0.0) {
      t.e[k] = 0.0;
      t.v.push_back(Vector(m, 0.0));
      t.beta.push_back(0.0);
      continue;
    }
    alpha = -std::copysign(alpha, v[0]);
    v[0] -= alpha;
    const double vv = dot(v, v);
    const double beta = 2.0 / vv;
    t.e[k] = alpha;
    for (std::size_t i = 0; i < m; ++i) {
      const double* ai = A.row(k + 1 + i) + k + 1;
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += ai[j] * v[j];
      p[i] = beta * s;
    }
    double pv = 0.0;
    for (std::size_t i = 0; i < m; ++i) pv += p[i] * v[i];
    const double K = 0.5 * beta * pv;
    for (std::size_t i = 0; i < m; ++i) w[i] = p[i] - K * v[i];
    for (std::size_t i = 0; i < m; ++i) {
      double* ai = A.row(k + 1 + i) + k + 1;
      const double vi = v[i], wi = w[i];
      for (std::size_t j = 0; j < m; ++j) ai[j] -= vi * w[j] + wi * v[j];
    }
    t.v.push_back(std::move(v));
    t.beta.push_back(beta);
  }
  for (std::size_t i = 0; i < n; ++i) t.d[i] = A(i, i);
  if (n >= 2) t.e[n - 2] = A(n - 1, n - 2);
  return t;
}

// LU with partial pivoting of T - lambda I, solved in place (LAPACK gttrf/gtts pattern).
class ShiftedTridiagonalLU {
 public:
  ShiftedTridiagonalLU(const Vector& d, const Vector& e, double lambda, double tiny)
      : n_(d.size()), dl_(e), dd_(d), du_(e), du2_(n_, 0.0), piv_(n_, 0) {
    for (auto& x : dd_) x -= lambda;
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (std::abs(dd_[i]) >= std::abs(dl_[i])) {
        if (dd_[i] == 0.0) dd_[i] = tiny;
        const double fact = dl_[i] / dd_[i];
        dl_[i] = fact;
        dd_[i + 1] -= fact * du_[i];
        piv_[i] = 0;
      } else {
        const double fact = dd_[i] / dl_[i];
        dd_[i] = dl_[i];
        dl_[i] = fact;
        const double temp = du_[i];
        du_[i] = dd_[i + 1];
        dd_[i + 1] = temp - fact * dd_[i + 1];
        if (i + 2 < n_) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -fact * du_[i + 1];
        }
        piv_[i] = 1;
      }
    }
    for (auto& x : dd_)
      if (x == 0.0) x = tiny;
  }

  void solve(Vector& b) const {
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (piv_[i] == 0) {
        b[i + 1] -= dl_[i] * b[i];
      } else {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl_[i] * b[i];
      }
    }
    for (std::size_t i = n_; i-- > 0;) {
      double s = b[i];
      if (i + 1 < n_) s -= du_[i] * b[i + 1];
      if (i + 2 < n_) s -= du2_[i] * b[i + 2];
      b[i] = s / dd_[i];
    }
  }

 private:
  std::size_t n_;
  Vector dl_, dd_, du_, du2_;
  std::vector<int> piv_;
};

// Lowest m eigenvectors of the tridiagonal matrix by inverse iteration with
// reorthogonalization inside clusters.
std::vector<Vector> tridiagonal_vectors(const Vector& d, const Vector& e,
                                        const Vector& values, std::size_t m) {
  const std::size_t n = d.size();
  double tnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = std::abs(d[i]);
    if (i > 0) r += std::abs(e[i - 1]);
    if (i + 1 < n) r += std::abs(e[i]);
    tnorm = std::max(tnorm, r);
  }
  if (tnorm == 0.0) tnorm = 1.0;
  const double eps = std::numeric_limits<double>::epsilon();
  const double cluster_gap = 1e-3 * tnorm;
  const double sep = 10.0 * eps * tnorm;

  std::vector<Vector> out;
  std::size_t cluster_start = 0;
  double prev_shift = 0.0;
  std::uint64_t state = 0x9e3779b97f4a7c15ULL;
  auto next_random = [&state]() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
  };
  for (std::size_t j = 0; j < m; ++j) {
    double shift = values[j];
    if (j > 0) {
      if (values[j] - values[j - 1] > cluster_gap) {
        cluster_start = j;
      } else if (shift <= prev_shift + sep) {
        shift = prev_shift + sep;
      }
    }
    prev_shift = shift;
    const ShiftedTridiagonalLU lu(d, e, shift, eps * tnorm);
    Vector x(n);
    for (auto& xi : x) xi = next_random();
    for (int it = 0; it < 5; ++it) {
      lu.solve(x);
      for (std::size_t k = cluster_start; k < j; ++k) {
        const double c = dot(out[k], x);
        for (std::size_t i = 0; i < n; ++i) x[i] -= c * out[k][i];
      }
      const double nx = norm2(x);
      for (auto& xi : x) xi /= nx;
      if (it >= 1 && nx * eps * tnorm > 1e-3) break;
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace

EigenSystem symmetric_eigen(const Matrix& C, std::size_t n_vectors) {
  const std::size_t n = C.rows();
  n_vectors = std::min(n_vectors, n);
  EigenSystem res;
  if (n == 0) return res;
  if (n == 1) {
    res.values = {C(0, 0)};
    res.vectors = Matrix(1, n_vectors, 1.0);
    return res;
  }
  const Tridiagonal t = householder_reduce(C);
  res.values = tridiagonal_eigenvalues(t.d, t.e);
  const auto ys = tridiagonal_vectors(t.d, t.e, res.values, n_vectors);
  res.vectors = Matrix(n, n_vectors);
  for (std::size_t j = 0; j < n_vectors; ++j) {
    Vector y = ys[j];
    for (std::size_t k = t.v.size(); k-- > 0;) {
      const Vector& v = t.v[k];
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * y[k + 1 + i];
      s *= t.beta[k];
      for (std::size_t i = 0; i < v.size(); ++i) y[k + 1 + i] -= s * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) res.vectors(i, j) = y[i];
  }
  return res;
}

namespace {

// Rows of L^{-1} for lower-triangular L.
Matrix lower_inverse(const Matrix& L) {
  const std::size_t n = L.rows();
  Matrix X(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double* xi = X.row(i);
    const double* li = L.row(i);
    xi[i] = 1.0;
    for (std::size_t k = 0; k < i; ++k) {
      const double c = li[k];
      if (c == 0.0) continue;
      const double* xk = X.row(k);
      for (std::size_t j = 0; j <= k; ++j) xi[j] -= c * xk[j];
    }
    const double inv = 1.0 / li[i];
    for (std::size_t j = 0; j <= i; ++j) xi[j] *= inv;
  }
  return X;
}

// u = X^T y for each requested vector.
EigenSystem back_transform(const Matrix& X, EigenSystem sys) {
  const std::size_t n = X.rows();
  const std::size_t m = sys.vectors.cols();
  Matrix U(n, m);
  Vector u(n);
  for (std::size_t c = 0; c < m; ++c) {
    std::fill(u.begin(), u.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double yi = sys.vectors(i, c);
      const double* xi = X.row(i);
      for (std::size_t j = 0; j <= i; ++j) u[j] += yi * xi[j];
    }
    for (std::size_t i = 0; i < n; ++i) U(i, c) = u[i];
  }
  sys.vectors = std::move(U);
  return sys;
}

}  // namespace

EigenSystem generalized_eigen(const Matrix& A, const Matrix& B, std::size_t n_vectors) {
  const std::size_t n = A.rows();
  const Matrix X = lower_inverse(cholesky(B));
  // C = X A X^T
  Matrix T(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k <= i; ++k) {
      const double x = X(i, k);
      const double* ak = A.row(k);
      double* ti = T.row(i);
      for (std::size_t j = 0; j < n; ++j) ti[j] += x * ak[j];
    }
  Matrix C(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double* ti = T.row(i);
      const double* xj = X.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += ti[k] * xj[k];
      C(i, j) = s;
      C(j, i) = s;
    }
  return back_transform(X, symmetric_eigen(C, n_vectors));
}

EigenSystem generalized_eigen_diag(const Vector& a, const Matrix& B, std::size_t n_vectors) {
  const std::size_t n = a.size();
  const Matrix X = lower_inverse(cholesky(B));
  Matrix Y(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k <= i; ++k) Y(i, k) = X(i, k) * std::sqrt(a[k]);
  Matrix C(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* yi = Y.row(i);
    for (std::size_t j = 0; j <= i; ++j) {
      const double* yj = Y.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += yi[k] * yj[k];
      C(i, j) = s;
      C(j, i) = s;
    }
  }
  return back_transform(X, symmetric_eigen(C, n_vectors));
}

}  // namespace steklov
