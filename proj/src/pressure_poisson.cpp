#include "fhd/pressure_poisson.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fhd/errors.hpp"
#include "fhd/least_squares.hpp"

namespace fhd {

PressureOperator::PressureOperator(const PointCloud& cloud, const StencilSet& stencils,
                                   std::span<const Vec3> surface_normals, double alpha)
    : stencils_(stencils),
      surface_count_(cloud.surface_count),
      n_(cloud.size()),
      diagonal_(cloud.size(), 0.0) {
  if (stencils.size() != n_) throw Error("stencil set does not match the cloud");
  if (surface_normals.size() < surface_count_) throw Error("missing normals for surface points");

  std::vector<std::vector<std::uint32_t>> idx(surface_count_);
  std::vector<std::vector<double>> coef(surface_count_);
  std::vector<std::string> failures(surface_count_);
#pragma omp parallel
  {
    std::vector<Vec3> d;
    std::vector<double> w;
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < surface_count_; ++i) {
      d.clear();
      w.clear();
      const Vec3& xi = cloud.points[i].position;
      for (std::size_t e = stencils.begin(i); e < stencils.end(i); ++e) {
        const std::uint32_t j = stencils.neighbor(e);
        if (cloud.points[j].kind != PointKind::interior) continue;
        idx[i].push_back(j);
        d.push_back(cloud.box.displacement(xi, cloud.points[j].position));
        w.push_back(weight(d.back(), cloud.h, alpha));
      }
      try {
        const Eigen::MatrixXd rows = taylor_fit(d, w, cloud.h, 2, false, 1e8);
        const Vec3& n = surface_normals[i];
        coef[i].resize(d.size());
        for (std::size_t e = 0; e < d.size(); ++e) {
          const auto c = static_cast<Eigen::Index>(e);
          coef[i][e] = n.x() * rows(0, c) + n.y() * rows(1, c) + n.z() * rows(2, c);
        }
      } catch (const Error& ex) {
        failures[i] = ex.what();
      }
    }
  }
  for (std::size_t i = 0; i < surface_count_; ++i)
    if (!failures[i].empty())
      throw Error("normal derivative at surface point " + std::to_string(i) + ": " + failures[i]);

  normal_offsets_.assign(surface_count_ + 1, 0);
  for (std::size_t i = 0; i < surface_count_; ++i)
    normal_offsets_[i + 1] = normal_offsets_[i] + idx[i].size();
  normal_indices_.reserve(normal_offsets_.back());
  normal_coefficients_.reserve(normal_offsets_.back());
  for (std::size_t i = 0; i < surface_count_; ++i) {
    normal_indices_.insert(normal_indices_.end(), idx[i].begin(), idx[i].end());
    normal_coefficients_.insert(normal_coefficients_.end(), coef[i].begin(), coef[i].end());
    double dsum = 0.0;
    for (double c : coef[i]) dsum -= c;
    diagonal_[i] = dsum;
  }

#pragma omp parallel for schedule(static)
  for (std::size_t i = surface_count_; i < n_; ++i) {
    double dsum = 0.0;
    for (std::size_t e = stencils_.begin(i); e < stencils_.end(i); ++e)
      dsum -= stencils_.laplacian_coefficient(e);
    diagonal_[i] = dsum;
  }
}

void PressureOperator::apply(std::span<const double> p, std::span<double> out) const {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n_; ++i) {
    if (i >= surface_count_) {
      out[i] = stencils_.laplacian_at(i, p);
      continue;
    }
    double s = 0.0;
    for (std::size_t e = normal_offsets_[i]; e < normal_offsets_[i + 1]; ++e)
      s += normal_coefficients_[e] * (p[normal_indices_[e]] - p[i]);
    out[i] = s;
  }
}

namespace {

void axpy(double a, std::span<const double> x, std::span<double> y) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

double norm(std::span<const double> x) { return std::sqrt(deterministic_dot(x, x)); }

double mean(std::span<const double> x) {
  return x.empty() ? 0.0 : deterministic_sum(x) / static_cast<double>(x.size());
}

// A p + shift * mean(p) * 1: nonsingular when the constant vector spans the
// nullspace of A.
class DeflatedOperator {
 public:
  DeflatedOperator(const PressureOperator& op, double shift) : op_(op), shift_(shift) {}
  void apply(std::span<const double> p, std::span<double> out) const {
    op_.apply(p, out);
    const double m = shift_ * mean(p);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += m;
  }

 private:
  const PressureOperator& op_;
  double shift_;
};

template <typename Op>
double true_residual(const Op& a, std::span<const double> b, std::span<const double> x,
                     std::span<double> r) {
  a.apply(x, r);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return norm(r);
}

// Jacobi-preconditioned BiCGSTAB, restarted from the true residual whenever the
// recurrence breaks down.
int bicgstab(const DeflatedOperator& a, const std::vector<double>& inv_diag,
             std::span<const double> b, std::vector<double>& x, double target,
             const PoissonOptions& options, std::vector<double>& history) {
  const std::size_t n = b.size();
  const double b_norm = norm(b);

  std::vector<double> r(n), r_hat(n), p(n, 0.0), v(n, 0.0), y(n), s(n), z(n), t(n);
  double r_norm = true_residual(a, b, x, r);
  history.push_back(r_norm / b_norm);
  int it = 0;
  while (r_norm > target && it < options.max_iterations) {
    // (re)start the Krylov recurrence from the current true residual
    r_hat = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    while (it < options.max_iterations) {
      ++it;
      const double rho_next = deterministic_dot(r_hat, r);
      if (std::abs(rho_next) < 1e-30 * b_norm * b_norm) break;
      const double beta = (rho_next / rho) * (alpha / omega);
      rho = rho_next;
#pragma omp parallel for schedule(static)
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = r[i] + beta * (p[i] - omega * v[i]);
        y[i] = inv_diag[i] * p[i];
      }
      a.apply(y, v);
      const double denom = deterministic_dot(r_hat, v);
      if (denom == 0.0) break;
      alpha = rho / denom;
#pragma omp parallel for schedule(static)
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = r[i] - alpha * v[i];
        z[i] = inv_diag[i] * s[i];
      }
      const double s_norm = norm(s);
      if (s_norm <= target) {
        axpy(alpha, y, x);
        r.swap(s);
        r_norm = s_norm;
        history.push_back(r_norm / b_norm);
        break;
      }
      a.apply(z, t);
      const double tt = deterministic_dot(t, t);
      omega = tt > 0.0 ? deterministic_dot(t, s) / tt : 0.0;
#pragma omp parallel for schedule(static)
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * y[i] + omega * z[i];
        r[i] = s[i] - omega * t[i];
      }
      r_norm = norm(r);
      history.push_back(r_norm / b_norm);
      if (r_norm <= target) break;
      if (omega == 0.0) break;
    }
    // guard against drift of the recursively updated residual
    r_norm = true_residual(a, b, x, r);
  }

  history.push_back(r_norm / b_norm);
  return it;
}

// Right-preconditioned restarted GMRES with modified Gram-Schmidt.
int gmres(const DeflatedOperator& a, const std::vector<double>& inv_diag,
          std::span<const double> b, std::vector<double>& x, double target,
          const PoissonOptions& options, std::vector<double>& history) {
  const std::size_t n = b.size();
  const int m = std::max(2, options.restart);
  const double b_norm = norm(b);
  std::vector<double> r(n), w(n), z(n);
  std::vector<std::vector<double>> basis(m + 1, std::vector<double>(n));
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);

  double r_norm = true_residual(a, b, x, r);
  history.push_back(r_norm / b_norm);
  int it = 0;
  while (r_norm > target && it < options.max_iterations) {
    for (std::size_t i = 0; i < n; ++i) basis[0][i] = r[i] / r_norm;
    g.setZero();
    g(0) = r_norm;
    hess.setZero();
    int k = 0;
    for (; k < m && it < options.max_iterations; ++k) {
      ++it;
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * basis[k][i];
      a.apply(z, w);
      for (int j = 0; j <= k; ++j) {
        const double hjk = deterministic_dot(w, basis[j]);
        hess(j, k) = hjk;
        axpy(-hjk, basis[j], w);
      }
      const double h_next = norm(w);
      hess(k + 1, k) = h_next;
      if (h_next > 0.0)
        for (std::size_t i = 0; i < n; ++i) basis[k + 1][i] = w[i] / h_next;
      for (int j = 0; j < k; ++j) {
        const double t = cs(j) * hess(j, k) + sn(j) * hess(j + 1, k);
        hess(j + 1, k) = -sn(j) * hess(j, k) + cs(j) * hess(j + 1, k);
        hess(j, k) = t;
      }
      const double rr = std::hypot(hess(k, k), hess(k + 1, k));
      cs(k) = hess(k, k) / rr;
      sn(k) = hess(k + 1, k) / rr;
      hess(k, k) = rr;
      hess(k + 1, k) = 0.0;
      g(k + 1) = -sn(k) * g(k);
      g(k) = cs(k) * g(k);
      history.push_back(std::abs(g(k + 1)) / b_norm);
      if (std::abs(g(k + 1)) <= target || h_next == 0.0) {
        ++k;
        break;
      }
    }
    const Eigen::VectorXd y =
        hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    std::fill(w.begin(), w.end(), 0.0);
    for (int j = 0; j < k; ++j) axpy(y(j), basis[j], w);
    for (std::size_t i = 0; i < n; ++i) x[i] += inv_diag[i] * w[i];
    r_norm = true_residual(a, b, x, r);
    history.back() = r_norm / b_norm;
  }
  return it;
}

}  // namespace

PoissonResult solve_pressure_poisson(std::span<const double> rhs, const PointCloud& cloud,
                                     const StencilSet& stencils,
                                     std::span<const Vec3> surface_normals,
                                     const PoissonOptions& options,
                                     std::span<const double> initial_guess) {
  const std::size_t n = cloud.size();
  const std::size_t ns = cloud.surface_count;
  if (rhs.size() != n) throw Error("right-hand side does not match the cloud");

  PoissonResult result;
  result.pressure.assign(n, 0.0);

  // compatibility: interior rows projected to mean zero, Neumann rows homogeneous
  std::vector<double> b(n, 0.0);
  std::copy(rhs.begin() + ns, rhs.end(), b.begin() + ns);
  if (n > ns) {
    const double m = mean(std::span<const double>(b).subspan(ns));
    for (std::size_t i = ns; i < n; ++i) b[i] -= m;
  }
  const double b_norm = norm(b);
  if (b_norm == 0.0) return result;

  const PressureOperator op(cloud, stencils, surface_normals);
  // the shift takes the sign of the bulk spectrum so the deflated operator
  // stays definite
  double typical = 0.0;
  for (double d : op.diagonal()) typical += d;
  typical /= static_cast<double>(n);
  if (typical == 0.0) throw Error("pressure operator has a zero diagonal");
  const DeflatedOperator a(op, typical);

  std::vector<double> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = op.diagonal()[i] + typical / static_cast<double>(n);
    if (std::abs(d) < 1e-8 * std::abs(typical)) d = typical;
    inv_diag[i] = 1.0 / d;
  }

  std::vector<double>& x = result.pressure;
  if (initial_guess.size() == n) std::copy(initial_guess.begin(), initial_guess.end(), x.begin());

  const double target = options.tolerance * b_norm;
  const int it = options.method == KrylovMethod::gmres
                     ? gmres(a, inv_diag, b, x, target, options, result.residual_history)
                     : bicgstab(a, inv_diag, b, x, target, options, result.residual_history);
  const double r_norm = result.residual_history.back() * b_norm;

  result.iterations = it;
  result.relative_residual = r_norm / b_norm;
  if (r_norm > target) {
    throw SolverDiverged("pressure Poisson solve stopped at relative residual " +
                             std::to_string(result.relative_residual) + " after " +
                             std::to_string(it) + " iterations",
                         result.residual_history);
  }
  const double m = mean(x);
  for (double& value : x) value -= m;
  return result;
}

namespace {

Vec3 row_sum(const StencilSet& s, std::size_t i) {
  Vec3 a = Vec3::Zero();
  for (std::size_t e = s.begin(i); e < s.end(i); ++e)
    a += Vec3(s.coefficient(d_x, e), s.coefficient(d_y, e), s.coefficient(d_z, e));
  return a;
}

// Interior-restricted divergence D and its transpose, matrix-free.
class InteriorDivergence {
 public:
  InteriorDivergence(const PointCloud& cloud, const StencilSet& s)
      : s_(s), ns_(cloud.surface_count), n_(cloud.size()), row_sum_(n_, Vec3::Zero()) {
    std::vector<std::size_t> count(n_ + 1, 0);
    for (std::size_t i = ns_; i < n_; ++i) {
      row_sum_[i] = row_sum(s, i);
      for (std::size_t e = s.begin(i); e < s.end(i); ++e) ++count[s.neighbor(e) + 1];
    }
    for (std::size_t m = 0; m < n_; ++m) count[m + 1] += count[m];
    offsets_ = count;
    entries_.resize(offsets_[n_]);
    rows_.resize(offsets_[n_]);
    for (std::size_t i = ns_; i < n_; ++i)
      for (std::size_t e = s.begin(i); e < s.end(i); ++e) {
        const std::size_t at = count[s.neighbor(e)]++;
        entries_[at] = e;
        rows_[at] = i;
      }
  }

  // out_i = (D v)_i for interior i, 0 on surface rows
  void divergence(std::span<const Vec3> v, std::span<double> out) const {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n_; ++i) {
      if (i < ns_) {
        out[i] = 0.0;
        continue;
      }
      double d = 0.0;
      const Vec3 vi = v[i];
      for (std::size_t e = s_.begin(i); e < s_.end(i); ++e) {
        const Vec3 dv = v[s_.neighbor(e)] - vi;
        d += s_.coefficient(d_x, e) * dv.x() + s_.coefficient(d_y, e) * dv.y() +
             s_.coefficient(d_z, e) * dv.z();
      }
      out[i] = d;
    }
  }

  // diagonal of D D^T over the interior columns
  std::vector<double> normal_diagonal() const {
    std::vector<double> d(n_, 1.0);
#pragma omp parallel for schedule(static)
    for (std::size_t i = ns_; i < n_; ++i) {
      double s = row_sum_[i].squaredNorm();
      for (std::size_t e = s_.begin(i); e < s_.end(i); ++e)
        if (s_.neighbor(e) >= ns_)
          s += Vec3(s_.coefficient(d_x, e), s_.coefficient(d_y, e), s_.coefficient(d_z, e))
                   .squaredNorm();
      d[i] = s > 0.0 ? s : 1.0;
    }
    return d;
  }

  // w_m = (D^T lambda)_m for interior m, 0 on surface points
  void transpose(std::span<const double> lambda, std::span<Vec3> w) const {
#pragma omp parallel for schedule(static)
    for (std::size_t m = 0; m < n_; ++m) {
      if (m < ns_) {
        w[m] = Vec3::Zero();
        continue;
      }
      Vec3 acc = -lambda[m] * row_sum_[m];
      for (std::size_t k = offsets_[m]; k < offsets_[m + 1]; ++k) {
        const std::size_t e = entries_[k];
        acc += lambda[rows_[k]] *
               Vec3(s_.coefficient(d_x, e), s_.coefficient(d_y, e), s_.coefficient(d_z, e));
      }
      w[m] = acc;
    }
  }

 private:
  const StencilSet& s_;
  std::size_t ns_, n_;
  std::vector<Vec3> row_sum_;
  std::vector<std::size_t> offsets_, entries_, rows_;
};

}  // namespace

DivergenceCleanup remove_discrete_divergence(std::span<Vec3> velocity, const PointCloud& cloud,
                                             const StencilSet& stencils, double tolerance,
                                             int max_iterations) {
  const std::size_t n = cloud.size();
  const std::size_t ns = cloud.surface_count;
  if (velocity.size() != n || stencils.size() != n)
    throw Error("velocity field does not match the cloud");
  const InteriorDivergence d(cloud, stencils);

  // surface velocities enter the initial divergence but are never corrected
  std::vector<double> r(n), p(n), q(n), lambda(n, 0.0);
  std::vector<Vec3> w(n);
  d.divergence(velocity, r);

  DivergenceCleanup result;
  const double b_norm = norm(r);
  if (b_norm == 0.0) return result;
  const double target = tolerance * b_norm;
  const auto diag = d.normal_diagonal();
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  p = z;
  double rz = deterministic_dot(r, z);
  double r_norm = b_norm;
  int it = 0;
  while (r_norm > target && it < max_iterations) {
    ++it;
    d.transpose(p, w);
    d.divergence(w, q);
    const double pq = deterministic_dot(p, q);
    if (!(pq > 0.0)) break;
    const double alpha = rz / pq;
    axpy(alpha, p, lambda);
    axpy(-alpha, q, r);
    r_norm = norm(r);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    const double rz_next = deterministic_dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  result.iterations = it;
  result.relative_residual = r_norm / b_norm;
  if (r_norm > target)
    throw SolverDiverged("divergence cleanup stopped at relative residual " +
                             std::to_string(result.relative_residual) + " after " +
                             std::to_string(it) + " iterations",
                         {});
  d.transpose(lambda, w);
#pragma omp parallel for schedule(static)
  for (std::size_t i = ns; i < n; ++i) velocity[i] -= w[i];
  return result;
}

}  // namespace fhd
