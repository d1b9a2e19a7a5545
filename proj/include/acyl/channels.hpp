#pragma once

// Real scalar channels of J d/dt + D_Sigma on a flat torus neck.
//
// On a Fourier pair {xi, -xi} the operator splits into real channels
// (a, b) -> (-b' - s b, a' - s a) with s = |k|. The zero mode contributes
// channels with s = 0. A channel is discretised on a staggered grid: a on
// nodes t_i = t0 + i h, b on cell midpoints, which keeps the assembled matrix
// exactly symmetric.

#include <acyl/errors.hpp>
#include <acyl/spectral.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace acyl::gluer {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ------------------------------------------------------------------ cutoff

namespace detail {
inline double smooth_step_f(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
}  // namespace detail

/// chi(t) = f(t) / (f(t) + f(1-t)), f(t) = exp(-1/t) for t > 0.
inline double chi(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = detail::smooth_step_f(t), b = detail::smooth_step_f(1.0 - t);
  return a / (a + b);
}

/// chi_T(t) = chi(t - T): 0 for t <= T, 1 for t >= T + 1.
inline double cutoff(double t, double T) { return chi(t - T); }

/// Smooth bump on (lo, hi) with peak value 1 at the midpoint.
inline double bump(double t, double lo, double hi) {
  if (t <= lo || t >= hi) return 0.0;
  const double x = (t - lo) / (hi - lo);
  return std::exp(4.0 - 1.0 / (x * (1.0 - x)));
}

// -------------------------------------------------------- exact transfer

/// Generator of the channel eigenvalue problem (a, b)' = K (a, b) for
/// L u = sigma u: K = [[s, sigma], [-sigma, -s]].
inline Eigen::Matrix2d channel_generator(double s, double sigma) {
  Eigen::Matrix2d K;
  K << s, sigma, -sigma, -s;
  return K;
}

/// exp(t K) by the matrix exponential.
inline Eigen::Matrix2d transfer_matrix(double s, double sigma, double t) {
  return (t * channel_generator(s, sigma)).exp();
}

/// exp(t K) in closed form, using K^2 = (s^2 - sigma^2) I.
inline Eigen::Matrix2d transfer_closed_form(double s, double sigma, double t) {
  const Eigen::Matrix2d K = channel_generator(s, sigma);
  const double w2 = s * s - sigma * sigma;
  double c, sw;  // c = cosh/cos(w t), sw = sinh/sin(w t) / w
  if (w2 > 0) {
    const double w = std::sqrt(w2);
    c = std::cosh(w * t);
    sw = std::sinh(w * t) / w;
  } else if (w2 < 0) {
    const double w = std::sqrt(-w2);
    c = std::cos(w * t);
    sw = std::sin(w * t) / w;
  } else {
    c = 1.0;
    sw = t;
  }
  return c * Eigen::Matrix2d::Identity() + sw * K;
}

/// Propagator of the full 4x4 mode system J u' + A(k) u = sigma u, i.e.
/// exp(t (J A - sigma J)), by the matrix exponential.
inline spectral::CMat4 mode_propagator(const spectral::CliffordModel& c, const spectral::Vec2& k, double sigma,
                                       double t) {
  const auto op = spectral::mode_operator(c, k);
  const spectral::CMat4 G = op.JA - sigma * c.J.cast<std::complex<double>>();
  return (t * G).exp();
}

/// Same propagator in closed form: (JA - sigma J)^2 = (|k|^2 - sigma^2) I.
inline spectral::CMat4 mode_propagator_closed_form(const spectral::CliffordModel& c, const spectral::Vec2& k,
                                                   double sigma, double t) {
  const auto op = spectral::mode_operator(c, k);
  const spectral::CMat4 G = op.JA - sigma * c.J.cast<std::complex<double>>();
  const double s = k.norm();
  const Eigen::Matrix2d tc = transfer_closed_form(s, sigma, t);
  // tc = c I + sw K, so c and sw can be read off the diagonal and corner.
  const double cc = 0.5 * (tc(0, 0) + tc(1, 1));
  const double sw = sigma != 0.0 ? tc(0, 1) / sigma : (s != 0.0 ? (tc(0, 0) - cc) / s : t);
  return cc * spectral::CMat4::Identity() + sw * G;
}

// ------------------------------------------------------------- channels

/// Boundary condition at one end of a channel. KillA: a = 0 there.
/// KillB: b = 0 there (the natural condition of the staggered grid).
/// Free: no condition (used for the open end of a half-cylinder).
enum class EndCondition { KillA, KillB, Free };

inline const char* to_string(EndCondition e) {
  switch (e) {
    case EndCondition::KillA: return "kill-a";
    case EndCondition::KillB: return "kill-b";
    case EndCondition::Free: return "free";
  }
  return "?";
}

struct Channel {
  std::string name;
  double s = 0.0;
  EndCondition left = EndCondition::KillB;   // spectral condition at the plus cap
  EndCondition right = EndCondition::KillA;  // spectral condition at the minus cap
};

/// Nonzero when sigma is an eigenvalue of the uncoupled channel on [0, len]:
/// the component killed at the right end of the solution started from the
/// left boundary condition.
inline double channel_characteristic(const Channel& ch, double sigma, double len) {
  if (ch.left == EndCondition::Free || ch.right == EndCondition::Free)
    throw InvalidInput("characteristic function needs conditions at both ends");
  const Eigen::Vector2d y0 = ch.left == EndCondition::KillA ? Eigen::Vector2d(0, 1) : Eigen::Vector2d(1, 0);
  const Eigen::Vector2d y = transfer_closed_form(ch.s, sigma, len) * y0;
  return ch.right == EndCondition::KillA ? y(0) : y(1);
}

/// Throws IllPosedBoundary when the uncoupled channel has kernel on [0, len].
inline void check_well_posed(const Channel& ch, double len) {
  const double f = channel_characteristic(ch, 0.0, len);
  const Eigen::Vector2d y0 = ch.left == EndCondition::KillA ? Eigen::Vector2d(0, 1) : Eigen::Vector2d(1, 0);
  const double scale = (transfer_closed_form(ch.s, 0.0, len) * y0).norm();
  if (std::abs(f) <= 1e-12 * scale)
    throw IllPosedBoundary("boundary conditions (" + std::string(to_string(ch.left)) + ", " +
                           to_string(ch.right) + ") leave a kernel on mode '" + ch.name + "'");
}

/// Eigenvalues in (0, sigma_max] of the uncoupled channel on [0, len], from
/// sign changes of the exact characteristic function refined by bisection.
inline std::vector<double> channel_eigenvalues(const Channel& ch, double len, double sigma_max, int samples = 4000) {
  std::vector<double> out;
  auto f = [&](double x) { return channel_characteristic(ch, x, len); };
  double x0 = 1e-9, f0 = f(x0);
  for (int i = 1; i <= samples; ++i) {
    const double x1 = sigma_max * i / samples, f1 = f(x1);
    if (f0 == 0.0) out.push_back(x0);
    else if ((f0 < 0) != (f1 < 0)) {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi), fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      out.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    f0 = f1;
  }
  return out;
}

// --------------------------------------------------------- discretisation

struct Grid {
  double t0 = 0.0;
  double h = 0.1;
  int cells = 0;

  static Grid over(double t0, double t1, double h_target) {
    if (!(t1 > t0) || !(h_target > 0.0)) throw InvalidInput("grid needs t1 > t0 and h > 0");
    Grid g;
    g.t0 = t0;
    g.cells = std::max(1, static_cast<int>(std::lround((t1 - t0) / h_target)));
    g.h = (t1 - t0) / g.cells;
    return g;
  }
  double node(int i) const { return t0 + i * h; }
  double cell(int j) const { return t0 + (j + 0.5) * h; }
  double t1() const { return t0 + cells * h; }
};

/// Potential term added to a group of channels. Kind S enters the D part
/// (a-to-a and b-to-b through the first-order operator), kind P is the
/// chirality-breaking part, +P on a-rows and -P on b-rows. Both are
/// symmetric in (i, j). `from_right` measures the support from the right
/// end, tau = t1 - t.
struct Coupling {
  enum Kind { S, P };
  Kind kind = S;
  int i = 0, j = 0;
  double amplitude = 0.0;
  double lo = 0.0, hi = 1.0;
  bool from_right = false;

  double value(double t, const Grid& g) const {
    const double tau = from_right ? g.t1() - t : t - g.t0;
    return amplitude * bump(tau, lo, hi);
  }
};

/// A set of channels coupled by potentials, assembled on one grid.
/// Unknowns are ordered along t: the kept a-nodes at t_i, then the b-cells
/// of cell i. Equation rows use the same order; a Free end keeps its node
/// but drops that node's equation.
class Block {
 public:
  Block(std::vector<Channel> channels, std::vector<Coupling> couplings, Grid grid)
      : channels_(std::move(channels)), couplings_(std::move(couplings)), grid_(grid) {
    if (channels_.empty()) throw InvalidInput("a block needs at least one channel");
    for (const auto& c : couplings_)
      if (c.i < 0 || c.j < 0 || c.i >= size() || c.j >= size()) throw InvalidInput("coupling index out of range");
    layout();
    assemble();
  }

  int size() const { return static_cast<int>(channels_.size()); }
  const std::vector<Channel>& channels() const { return channels_; }
  const std::vector<Coupling>& couplings() const { return couplings_; }
  const Grid& grid() const { return grid_; }
  int unknowns() const { return static_cast<int>(pos_.size()); }
  int equations() const { return static_cast<int>(row_unknown_.size()); }
  bool square() const { return equations() == unknowns(); }

  /// The operator, equations x unknowns. Symmetric when square.
  const Eigen::SparseMatrix<double>& matrix() const { return M_; }

  double position(int k) const { return pos_[static_cast<std::size_t>(k)]; }
  int channel_of(int k) const { return chan_[static_cast<std::size_t>(k)]; }
  bool is_a(int k) const { return is_a_[static_cast<std::size_t>(k)] != 0; }
  /// Global index of a(ch, node i) or b(ch, cell j); -1 when dropped.
  int a_index(int ch, int i) const { return a_idx_[static_cast<std::size_t>(ch)][static_cast<std::size_t>(i)]; }
  int b_index(int ch, int j) const { return b_idx_[static_cast<std::size_t>(ch)][static_cast<std::size_t>(j)]; }

  /// Unknown index whose equation occupies each row.
  const std::vector<int>& row_unknowns() const { return row_unknown_; }

  /// Samples a function of (channel, t, is_a) on the unknowns.
  template <class Fn>
  VectorXd sample(Fn&& fn) const {
    VectorXd v(unknowns());
    for (int k = 0; k < unknowns(); ++k) v(k) = fn(channel_of(k), position(k), is_a(k));
    return v;
  }

  /// Dense copy, used for the spectral experiments.
  MatrixXd dense() const { return MatrixXd(M_); }

  /// Matrix with an extra diagonal term (a linearised pointwise product).
  Eigen::SparseMatrix<double> with_diagonal(const VectorXd& d) const {
    if (!square() || d.size() != unknowns()) throw InvalidInput("diagonal shift needs a square block");
    Eigen::SparseMatrix<double> A = M_;
    for (int k = 0; k < unknowns(); ++k) A.coeffRef(k, k) += d(k);
    return A;
  }

 private:
  void layout() {
    const int N = grid_.cells;
    a_idx_.assign(channels_.size(), std::vector<int>(static_cast<std::size_t>(N + 1), -1));
    b_idx_.assign(channels_.size(), std::vector<int>(static_cast<std::size_t>(N), -1));
    for (int i = 0; i <= N; ++i) {
      for (int c = 0; c < size(); ++c) {
        const auto& ch = channels_[static_cast<std::size_t>(c)];
        const bool drop = (i == 0 && ch.left == EndCondition::KillA) || (i == N && ch.right == EndCondition::KillA);
        if (drop) continue;
        const int k = static_cast<int>(pos_.size());
        a_idx_[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] = k;
        pos_.push_back(grid_.node(i));
        chan_.push_back(c);
        is_a_.push_back(1);
        const bool free_end = (i == 0 && ch.left == EndCondition::Free) || (i == N && ch.right == EndCondition::Free);
        if (!free_end) row_unknown_.push_back(k);
      }
      if (i == N) break;
      for (int c = 0; c < size(); ++c) {
        const int k = static_cast<int>(pos_.size());
        b_idx_[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] = k;
        pos_.push_back(grid_.cell(i));
        chan_.push_back(c);
        is_a_.push_back(0);
        row_unknown_.push_back(k);
      }
    }
  }

  Eigen::MatrixXd potential(Coupling::Kind kind, double t) const {
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(size(), size());
    if (kind == Coupling::S)
      for (int c = 0; c < size(); ++c) V(c, c) = channels_[static_cast<std::size_t>(c)].s;
    for (const auto& cp : couplings_) {
      if (cp.kind != kind) continue;
      const double v = cp.value(t, grid_);
      V(cp.i, cp.j) += v;
      if (cp.i != cp.j) V(cp.j, cp.i) += v;
    }
    return V;
  }

  void assemble() {
    const int N = grid_.cells;
    const double h = grid_.h;
    // Full symmetric operator on unknowns; rows of Free nodes are removed below.
    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0; j < N; ++j) {
      const double tc = grid_.cell(j);
      const MatrixXd S = potential(Coupling::S, tc), P = potential(Coupling::P, tc);
      for (int c = 0; c < size(); ++c) {
        const int row = b_idx_[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
        for (int c2 = 0; c2 < size(); ++c2) {
          const double dl = (c == c2 ? -1.0 / h : 0.0) - 0.5 * S(c, c2);
          const double dr = (c == c2 ? 1.0 / h : 0.0) - 0.5 * S(c, c2);
          const int al = a_idx_[static_cast<std::size_t>(c2)][static_cast<std::size_t>(j)];
          const int ar = a_idx_[static_cast<std::size_t>(c2)][static_cast<std::size_t>(j + 1)];
          if (al >= 0 && dl != 0.0) {
            trip.emplace_back(row, al, dl);
            trip.emplace_back(al, row, dl);
          }
          if (ar >= 0 && dr != 0.0) {
            trip.emplace_back(row, ar, dr);
            trip.emplace_back(ar, row, dr);
          }
          if (P(c, c2) != 0.0)
            trip.emplace_back(row, b_idx_[static_cast<std::size_t>(c2)][static_cast<std::size_t>(j)], -P(c, c2));
        }
      }
    }
    for (int i = 0; i <= N; ++i) {
      const MatrixXd P = potential(Coupling::P, grid_.node(i));
      for (int c = 0; c < size(); ++c)
        for (int c2 = 0; c2 < size(); ++c2) {
          const int r = a_idx_[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
          const int q = a_idx_[static_cast<std::size_t>(c2)][static_cast<std::size_t>(i)];
          if (r >= 0 && q >= 0 && P(c, c2) != 0.0) trip.emplace_back(r, q, P(c, c2));
        }
    }
    Eigen::SparseMatrix<double> full(unknowns(), unknowns());
    full.setFromTriplets(trip.begin(), trip.end());
    if (square()) {
      M_ = std::move(full);
      return;
    }
    Eigen::SparseMatrix<double> sel(equations(), unknowns());
    std::vector<Eigen::Triplet<double>> st;
    for (int r = 0; r < equations(); ++r) st.emplace_back(r, row_unknown_[static_cast<std::size_t>(r)], 1.0);
    sel.setFromTriplets(st.begin(), st.end());
    M_ = sel * full;
  }

  std::vector<Channel> channels_;
  std::vector<Coupling> couplings_;
  Grid grid_;
  std::vector<std::vector<int>> a_idx_, b_idx_;
  std::vector<double> pos_;
  std::vector<int> chan_;
  std::vector<char> is_a_;
  std::vector<int> row_unknown_;
  Eigen::SparseMatrix<double> M_;
};

// ------------------------------------------------------- block spectra

namespace detail {

using quad = __float128;

// Number of negative eigenvalues of the symmetric banded matrix A - x I,
// from the pivots of an unpivoted LDL^T in quad precision (Sylvester).
inline int negative_count(const std::vector<std::vector<double>>& band, int bw, quad x) {
  const int n = static_cast<int>(band.size());
  // row-major band storage: w[i][k] = entry (i, i - bw + k), k = 0..bw
  std::vector<std::vector<quad>> w(static_cast<std::size_t>(n), std::vector<quad>(static_cast<std::size_t>(bw + 1)));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k <= bw; ++k) w[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = band[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  std::vector<quad> d(static_cast<std::size_t>(n));
  int neg = 0;
  const quad tiny = 1e-60;
  for (int i = 0; i < n; ++i) {
    auto& ri = w[static_cast<std::size_t>(i)];
    // L(i, j) = ri[j - i + bw] / d[j] after elimination
    for (int j = std::max(0, i - bw); j < i; ++j) {
      quad s = ri[static_cast<std::size_t>(j - i + bw)];
      const auto& rj = w[static_cast<std::size_t>(j)];
      for (int k = std::max({0, i - bw, j - bw}); k < j; ++k)
        s -= ri[static_cast<std::size_t>(k - i + bw)] * rj[static_cast<std::size_t>(k - j + bw)] * d[static_cast<std::size_t>(k)];
      ri[static_cast<std::size_t>(j - i + bw)] = s / d[static_cast<std::size_t>(j)];
    }
    quad s = ri[static_cast<std::size_t>(bw)] - x;
    for (int k = std::max(0, i - bw); k < i; ++k) s -= ri[static_cast<std::size_t>(k - i + bw)] * ri[static_cast<std::size_t>(k - i + bw)] * d[static_cast<std::size_t>(k)];
    if (s == 0) s = tiny;
    d[static_cast<std::size_t>(i)] = s;
    if (s < 0) ++neg;
  }
  return neg;
}

// Smallest |eigenvalue| of a symmetric banded matrix below `upper`, by
// bisection on the eigenvalue count in [-x, x]. Resolves values far below
// the double-precision floor eps * ||A||.
inline double sigma_min_refined(const Eigen::SparseMatrix<double>& A, double upper) {
  const int n = static_cast<int>(A.rows());
  int bw = 0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      bw = std::max(bw, static_cast<int>(std::abs(it.row() - it.col())));
  std::vector<std::vector<double>> band(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(bw + 1), 0.0));
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      if (it.col() <= it.row())
        band[static_cast<std::size_t>(it.row())][static_cast<std::size_t>(it.col() - it.row() + bw)] = it.value();
  auto inside = [&](double x) {
    return negative_count(band, bw, static_cast<quad>(x)) - negative_count(band, bw, -static_cast<quad>(x));
  };
  double lo = 1e-30, hi = upper;
  if (inside(lo) > 0) return 0.0;
  if (inside(hi) == 0) return hi;
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-10; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (inside(mid) > 0) hi = mid;
    else lo = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace detail

/// Smallest |eigenvalue| of a square block matrix (its smallest singular
/// value, the matrix being symmetric). Tridiagonal blocks use the O(n^2)
/// tridiagonal solver; values near the double-precision floor are refined
/// in quad precision.
inline double sigma_min(const Eigen::SparseMatrix<double>& A) {
  const Eigen::Index n = A.rows();
  if (n == 0) return INFINITY;
  bool tri = true;
  for (int k = 0; k < A.outerSize() && tri; ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      if (std::abs(it.row() - it.col()) > 1 && it.value() != 0.0) {
        tri = false;
        break;
      }
  Eigen::VectorXd ev;
  if (tri) {
    Eigen::VectorXd d(n), e(std::max<Eigen::Index>(n - 1, 1));
    for (Eigen::Index i = 0; i < n; ++i) d(i) = A.coeff(i, i);
    for (Eigen::Index i = 0; i + 1 < n; ++i) e(i) = A.coeff(i + 1, i);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es;
    es.computeFromTridiagonal(d, e.head(std::max<Eigen::Index>(n - 1, 0)), Eigen::EigenvaluesOnly);
    ev = es.eigenvalues();
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(MatrixXd(A), Eigen::EigenvaluesOnly);
    ev = es.eigenvalues();
  }
  const double smin = ev.cwiseAbs().minCoeff();
  const double scale = ev.cwiseAbs().maxCoeff();
  if (smin < 1e-8 * scale) return detail::sigma_min_refined(A, 1e-8 * scale);
  return smin;
}

/// Smallest singular value of A restricted to the orthogonal complement of
/// span(C) (columns of C need not be orthonormal).
inline double sigma_min_restricted(const Eigen::SparseMatrix<double>& A, const MatrixXd& C) {
  if (C.cols() == 0) return sigma_min(A);
  const MatrixXd Ad(A);
  Eigen::HouseholderQR<MatrixXd> qr(C);
  const MatrixXd Qc = qr.householderQ() * MatrixXd::Identity(C.rows(), C.cols());
  const MatrixXd A2 = Ad.transpose() * Ad;
  const MatrixXd Pi = MatrixXd::Identity(C.rows(), C.rows()) - Qc * Qc.transpose();
  const double gamma = 10.0 * A2.diagonal().maxCoeff() + 1.0;
  const MatrixXd B = Pi * A2 * Pi + gamma * Qc * Qc.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (B + B.transpose()), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues()(0)));
}

/// Induced sup norm of A^{-1}: the largest absolute column sum of the
/// inverse, which equals its largest row sum for symmetric A.
inline double inverse_sup_norm(const Eigen::SparseMatrix<double>& A) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw ModelInconsistency("block matrix is singular");
  const Eigen::Index n = A.rows();
  double best = 0.0;
  const Eigen::Index chunk = 64;
  for (Eigen::Index c0 = 0; c0 < n; c0 += chunk) {
    const Eigen::Index m = std::min(chunk, n - c0);
    MatrixXd E = MatrixXd::Zero(n, m);
    for (Eigen::Index k = 0; k < m; ++k) E(c0 + k, k) = 1.0;
    const MatrixXd X = lu.solve(E);
    best = std::max(best, X.cwiseAbs().colwise().sum().maxCoeff());
  }
  return best;
}

}  // namespace acyl::gluer
