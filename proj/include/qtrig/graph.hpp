#pragma once

// Undirected graphs, their Laplacians, and a dense symmetric eigensolver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qtrig/errors.hpp"

namespace qtrig {

/// Dense row-major square matrix. Sizes here are tens of rows at most.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }

  [[nodiscard]] std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * n_, n_};
  }

  /// Induced max-norm: largest absolute row sum.
  [[nodiscard]] double norm_inf() const {
    double best = 0.0;
    for (std::size_t r = 0; r < n_; ++r) {
      double s = 0.0;
      for (double v : row(r)) s += std::abs(v);
      best = std::max(best, s);
    }
    return best;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix out(a.n_);
    for (std::size_t i = 0; i < a.n_; ++i)
      for (std::size_t k = 0; k < a.n_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < a.n_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  [[nodiscard]] std::vector<double> apply(std::span<const double> v) const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) out[i] += (*this)(i, j) * v[j];
    return out;
  }

  [[nodiscard]] Matrix transpose() const {
    Matrix t(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Max-norm of a vector.
inline double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Undirected simple graph on vertices 0..n-1.
///
/// Edges are stored once as (min, max). Construction rejects self-loops,
/// duplicates, and out-of-range endpoints, so every Graph value is well formed.
class Graph {
 public:
  using Edge = std::pair<int, int>;

  Graph(int n_vertices, const std::vector<Edge>& edges) : n_(n_vertices), adj_(n_vertices) {
    if (n_vertices < 2) throw DomainError("graph needs at least 2 vertices");
    std::set<Edge> seen;
    for (auto [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n_ || v >= n_)
        throw DomainError("edge endpoint out of range: (" + std::to_string(u) + "," +
                          std::to_string(v) + ")");
      if (u == v) throw DomainError("self-loop at vertex " + std::to_string(u));
      Edge e{std::min(u, v), std::max(u, v)};
      if (!seen.insert(e).second)
        throw DomainError("duplicate edge (" + std::to_string(e.first) + "," +
                          std::to_string(e.second) + ")");
      edges_.push_back(e);
      adj_[u].push_back(v);
      adj_[v].push_back(u);
    }
    for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
  }

  /// Builds from 1-based vertex ids, as written in config files.
  static Graph from_one_based(int n_vertices, const std::vector<Edge>& edges) {
    std::vector<Edge> shifted;
    shifted.reserve(edges.size());
    for (auto [u, v] : edges) shifted.emplace_back(u - 1, v - 1);
    return Graph(n_vertices, shifted);
  }

  static Graph complete(int n) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return Graph(n, e);
  }

  static Graph cycle(int n) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    return Graph(n, e);
  }

  [[nodiscard]] int size() const noexcept { return n_; }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
  [[nodiscard]] const std::vector<int>& neighbors(int i) const { return adj_.at(check(i)); }

  [[nodiscard]] int degree(int i) const { return static_cast<int>(adj_.at(check(i)).size()); }

  [[nodiscard]] std::vector<int> degrees() const {
    std::vector<int> d(n_);
    for (int i = 0; i < n_; ++i) d[i] = degree(i);
    return d;
  }

  [[nodiscard]] int max_degree() const {
    int m = 0;
    for (const auto& nb : adj_) m = std::max(m, static_cast<int>(nb.size()));
    return m;
  }

 private:
  int check(int i) const {
    if (i < 0 || i >= n_) throw DomainError("vertex out of range: " + std::to_string(i));
    return i;
  }

  int n_;
  std::vector<std::vector<int>> adj_;
  std::vector<Edge> edges_;
};

/// L = D - A.
inline Matrix build_laplacian(const Graph& g) {
  const auto n = static_cast<std::size_t>(g.size());
  Matrix lap(n);
  for (auto [u, v] : g.edges()) {
    lap(u, v) -= 1.0;
    lap(v, u) -= 1.0;
    lap(u, u) += 1.0;
    lap(v, v) += 1.0;
  }
  return lap;
}

/// Breadth-first reachability from vertex 0.
inline bool is_connected(const Graph& g) {
  std::vector<char> seen(g.size(), 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : g.neighbors(u)) {
      if (seen[v]) continue;
      seen[v] = 1;
      ++reached;
      frontier.push(v);
    }
  }
  return reached == g.size();
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
///
/// Column k of `vectors` is the unit eigenvector for `values[k]`. For a
/// connected-graph Laplacian the first column is 1/sqrt(N) times the
/// all-ones vector.
struct Spectrum {
  std::vector<double> values;
  Matrix vectors;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
  [[nodiscard]] double lambda2() const { return values.at(1); }
  [[nodiscard]] double eigvec(std::size_t row, std::size_t k) const { return vectors(row, k); }
};

struct JacobiOptions {
  double tolerance = 1e-12;  // off-diagonal Frobenius norm, scaled by max(1, ||A||_F)
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigendecomposition of a dense symmetric matrix.
///
/// Throws NumericError when the off-diagonal mass is still above tolerance
/// after `max_sweeps` full sweeps.
inline Spectrum eigendecompose(const Matrix& sym, JacobiOptions opt = {}) {
  const std::size_t n = sym.size();
  Matrix a = sym;
  Matrix v = Matrix::identity(n);

  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) frob += a(i, j) * a(i, j);
  const double tol = opt.tolerance * std::max(1.0, std::sqrt(frob));

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > tol) {
    if (sweep++ >= opt.max_sweeps)
      throw NumericError("Jacobi eigensolver did not converge in " +
                         std::to_string(opt.max_sweeps) + " sweeps");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rutishauser's stable rotation angle.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  Spectrum out;
  out.values.resize(n);
  out.vectors = Matrix(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = a(src, src);
    // Sign convention: the first column sums positive; the others have
    // their largest-magnitude entry (lowest row on ties) positive.
    double sign = 1.0;
    if (k == 0) {
      double sum = 0.0;
      for (std::size_t r = 0; r < n; ++r) sum += v(r, src);
      sign = sum < 0.0 ? -1.0 : 1.0;
    } else {
      std::size_t arg = 0;
      for (std::size_t r = 1; r < n; ++r)
        if (std::abs(v(r, src)) > std::abs(v(arg, src)) + 1e-12) arg = r;
      sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
    }
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = sign * v(r, src);
  }
  return out;
}

}  // namespace qtrig
