#pragma once

// Banach contraction for maps of the form F(x) = L(x) + Q(x) + F(x0), plus
// the small regression helper shared by the gluing experiments.

#include <acyl/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace acyl::gluer {

using Eigen::VectorXd;
using VecFn = std::function<VectorXd(const VectorXd&)>;

/// Sup norm, the norm used on both sides of the contraction.
inline double sup_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

struct ContractionSpec {
  VecFn apply_L;  // x -> L x
  VecFn solve_L;  // y -> L^{-1} y
  VecFn Q;        // nonlinear remainder, Q(x0) = -L x0 for consistency
  VectorXd F_x0;
  VectorXd x0;
  double c_L = 0.0;  // ||x|| <= c_L ||L x||
  double c_Q = 0.0;  // ||Q(x1)-Q(x2)|| <= c_Q ||x1-x2|| (||x1-x0|| + ||x2-x0||)
  double tol = 1e-14;
  int max_iter = 200;

  double precondition_bound() const { return 1.0 / (10.0 * c_L * c_L * c_Q); }
  double radius() const { return 1.0 / (5.0 * c_L * c_Q); }

  /// Shape and constant checks. Throws ConstantsInvalid / InvalidInput.
  void validate() const {
    if (!apply_L || !solve_L || !Q) throw InvalidInput("contraction spec needs L, L^{-1} and Q");
    if (!(c_L > 0.0) || !(c_Q > 0.0) || !std::isfinite(c_L) || !std::isfinite(c_Q))
      throw ConstantsInvalid("c_L and c_Q must be positive and finite");
    if (F_x0.size() != x0.size()) throw InvalidInput("F(x0) and x0 have different dimensions");
  }
};

struct SpotCheck {
  double invertibility_defect = 0.0;  // max ||L L^{-1} y - y|| / ||y||
  double worst_cL_ratio = 0.0;        // max ||x|| / (c_L ||L x||)
  double worst_cQ_ratio = 0.0;        // max observed quadratic ratio / c_Q
  bool ok() const { return invertibility_defect < 1e-8 && worst_cL_ratio <= 1.0 + 1e-9 && worst_cQ_ratio <= 1.0 + 1e-9; }
};

/// Samples the invariants of a ContractionSpec on random vectors in the ball.
inline SpotCheck spot_check(const ContractionSpec& s, int samples, std::uint64_t seed) {
  s.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  const auto dim = s.x0.size();
  auto rnd = [&] {
    VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = n(rng);
    return v;
  };
  SpotCheck out;
  const double eps = s.radius();
  for (int k = 0; k < samples; ++k) {
    const VectorXd y = rnd();
    out.invertibility_defect =
        std::max(out.invertibility_defect, sup_norm(s.apply_L(s.solve_L(y)) - y) / std::max(sup_norm(y), 1e-300));
    const VectorXd x = rnd();
    out.worst_cL_ratio = std::max(out.worst_cL_ratio, sup_norm(x) / (s.c_L * sup_norm(s.apply_L(x))));
    VectorXd d1 = rnd(), d2 = rnd();
    d1 *= eps / sup_norm(d1) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    d2 *= eps / sup_norm(d2) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double den = sup_norm(d1 - d2) * (sup_norm(d1) + sup_norm(d2));
    if (den > 0.0)
      out.worst_cQ_ratio =
          std::max(out.worst_cQ_ratio, sup_norm(s.Q(s.x0 + d1) - s.Q(s.x0 + d2)) / (s.c_Q * den));
  }
  return out;
}

struct ContractionResult {
  VectorXd x;              // the solution x0 + displacement
  VectorXd displacement;   // fixed point of phi
  int iterations = 0;
  double residual = 0.0;   // ||L x + Q(x) + F(x0)||
  double max_factor = 0.0; // largest observed ||x_{n+1}-x_n|| / ||x_n - x_{n-1}||
  double max_step_norm = 0.0;  // largest ||phi(x_n)||
  double radius = 0.0;
  double precondition_bound = 0.0;
};

/// phi(x) = -L^{-1}(F(x0) + Q(x0 + x)) - x0.
inline VectorXd phi(const ContractionSpec& s, const VectorXd& x) { return -s.solve_L(s.F_x0 + s.Q(s.x0 + x)) - s.x0; }

/// Fixed-point iteration of phi from 0. Throws PreconditionError when
/// ||F(x0)|| exceeds 1/(10 c_L^2 c_Q), ConstantsInvalid when an observed
/// contraction factor exceeds 1/2 or an iterate leaves 7/10 of the ball.
inline ContractionResult contract_solve(const ContractionSpec& s) {
  s.validate();
  ContractionResult r;
  r.radius = s.radius();
  r.precondition_bound = s.precondition_bound();
  const double f0 = sup_norm(s.F_x0);
  if (f0 > r.precondition_bound) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "||F(x0)|| = " << f0 << " exceeds 1/(10 c_L^2 c_Q) = " << r.precondition_bound;
    throw PreconditionError(msg.str());
  }
  const double scale = std::max({1.0, sup_norm(s.x0), f0});
  const double consistency = sup_norm(s.apply_L(s.x0) + s.Q(s.x0));
  if (consistency > 1e-10 * scale)
    throw InvalidInput("inconsistent spec: L x0 + Q(x0) must vanish so that F(x0) is the value at x0");

  const double slack = 1e-9;
  VectorXd x = VectorXd::Zero(s.x0.size());
  double prev_step = -1.0;
  for (r.iterations = 1; r.iterations <= s.max_iter; ++r.iterations) {
    const VectorXd next = phi(s, x);
    const double n_next = sup_norm(next);
    r.max_step_norm = std::max(r.max_step_norm, n_next);
    if (n_next > 0.7 * r.radius * (1.0 + slack))
      throw ConstantsInvalid("iterate left 7/10 of the contraction ball; c_L or c_Q is too small");
    const double step = sup_norm(next - x);
    if (prev_step > 1e-13 * scale && step > 1e-13 * scale) {
      const double f = step / prev_step;
      r.max_factor = std::max(r.max_factor, f);
      if (f > 0.5 + slack) {
        std::ostringstream msg;
        msg << "observed contraction factor " << f << " > 1/2; c_L or c_Q is invalid";
        throw ConstantsInvalid(msg.str());
      }
    }
    x = next;
    prev_step = step;
    if (step <= s.tol * scale) break;
  }
  r.iterations = std::min(r.iterations, s.max_iter);
  r.displacement = x;
  r.x = s.x0 + x;
  r.residual = sup_norm(s.apply_L(r.x) + s.Q(r.x) + s.F_x0);
  return r;
}

struct CertificateReport {
  double worst_factor = 0.0;     // max ||phi(x1)-phi(x2)|| / ||x1-x2||
  double worst_image = 0.0;      // max ||phi(x)|| / epsilon
  bool holds() const { return worst_factor <= 0.5 + 1e-9 && worst_image <= 0.7 + 1e-9; }
};

/// Random-pair check of the two estimates behind the lemma.
inline CertificateReport contraction_certificate(const ContractionSpec& s, int pairs, std::uint64_t seed) {
  s.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double eps = s.radius();
  auto in_ball = [&] {
    VectorXd v(s.x0.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = n(rng);
    const double nv = sup_norm(v);
    return nv > 0 ? VectorXd(v * (eps * u(rng) / nv)) : v;
  };
  CertificateReport c;
  for (int k = 0; k < pairs; ++k) {
    const VectorXd x1 = in_ball(), x2 = in_ball();
    const VectorXd p1 = phi(s, x1), p2 = phi(s, x2);
    const double d = sup_norm(x1 - x2);
    if (d > 0) c.worst_factor = std::max(c.worst_factor, sup_norm(p1 - p2) / d);
    c.worst_image = std::max(c.worst_image, std::max(sup_norm(p1), sup_norm(p2)) / eps);
  }
  return c;
}

// ------------------------------------------------------------- regression

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // 95% interval on the slope
  std::size_t points = 0;
};

namespace detail {
// Two-sided 97.5% Student-t quantiles for 1..30 degrees of freedom.
inline double t975(std::size_t dof) {
  static const double q[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                             2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                             2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof == 0) return INFINITY;
  return dof <= 30 ? q[dof - 1] : 1.96;
}
}  // namespace detail

/// Least-squares fit of log(y) against x. Needs at least 4 points with y > 0.
inline SlopeFit fit_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidInput("regression inputs differ in length");
  if (x.size() < 4) throw InvalidInput("a decay-rate regression needs at least 4 grid points");
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw InvalidInput("cannot fit the logarithm of a nonpositive value");
    ly[i] = std::log(y[i]);
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (ly[i] - my);
  }
  SlopeFit f;
  f.points = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = ly[i] - (f.intercept + f.slope * x[i]);
    rss += e * e;
  }
  f.stderr_slope = std::sqrt(rss / (n - 2.0) / sxx);
  const double t = detail::t975(x.size() - 2);
  f.ci_low = f.slope - t * f.stderr_slope;
  f.ci_high = f.slope + t * f.stderr_slope;
  return f;
}

}  // namespace acyl::gluer
