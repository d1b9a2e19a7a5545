#pragma once

// Two-ended cylinder model of the pregluing / contraction construction.
//
// The neck is [0, L] with L = 2T + 1: the plus piece is [0, T + 1], the
// minus piece is the reflection t -> L - t of [0, T + 1]. Each cap is a
// band of width 1 carrying a potential and a spectral boundary condition.
//
// Real channels used by the model (s = transverse speed):
//   z1, z2  the two real channels of the zero mode; V0 = (a_z1, b_z1, a_z2, b_z2)
//   w1      one channel at the first nonzero speed, coupled to z1 in the caps
//   v1      one channel at the second nonzero speed
// All remaining Fourier channels with |k| <= mode_cutoff are spectators: they
// carry no data and enter only through c_L and sigma_min.

#include <acyl/channels.hpp>
#include <acyl/contraction.hpp>
#include <acyl/errors.hpp>
#include <acyl/spectral.hpp>

#include <json.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace acyl::gluer {

/// Cap design. z1/z2: boundary condition of the zero channels at this cap.
/// coupling: z1-w1 potential on cap coordinate (0.5, 1). chirality: w1
/// potential of P type on (0, 0.5).
struct CapDesign {
  EndCondition z1 = EndCondition::KillA;
  EndCondition z2 = EndCondition::KillA;
  double coupling = 0.8;
  double chirality = 0.6;
};

struct ModelGluingProblem {
  std::string name = "custom";
  spectral::CliffordModel clifford = spectral::CliffordModel::quaternionic();
  spectral::LatticeTorus lattice = spectral::LatticeTorus::square2pi();
  int mode_cutoff = 8;
  double T = 6.0;
  double mu = -1.0;
  double delta = 2.0;
  CapDesign plus{EndCondition::KillA, EndCondition::KillA, 0.8, 0.6};
  CapDesign minus{EndCondition::KillB, EndCondition::KillB, 0.7, 0.5};
  double kappa = 0.2;
  double eps0 = 0.01;
  double h = 0.1;
  bool include_zero_mode = true;
  // both ends carry the same global solution e^{mu t} nu_plus + e^{mu (L-t)} nu_minus
  bool matched_exact = false;
  // end-profile amplitudes on (z1, w1, v1)
  std::array<double, 3> nu_plus{0.01, 0.01, 0.01};
  std::array<double, 3> nu_minus{-0.01, 0.008, 0.012};

  double delta_e() const { return std::min(delta, -mu); }
  double length() const { return 2.0 * T + 1.0; }

  void validate() const {
    if (!(mu < 0.0) || !(delta > 0.0)) throw InvalidInput("need mu < 0 < delta");
    if (!(T > 0.0) || !std::isfinite(T)) throw InvalidInput("neck half-length T must be positive");
    if (mode_cutoff < 1) throw InvalidInput("mode cutoff must be a positive integer");
    if (!(h > 0.0) || h > 0.5) throw InvalidInput("grid step must lie in (0, 0.5]");
    if (!std::isfinite(kappa) || !std::isfinite(eps0)) throw InvalidInput("kappa and eps0 must be finite");
    for (auto e : {plus.z1, plus.z2, minus.z1, minus.z2})
      if (e == EndCondition::Free) throw InvalidInput("caps need a boundary condition on every zero channel");
    clifford.validate();
  }

  /// Named presets: matched-exact, generic-d2m1, generic-d05m1, generic-d1m05, kernel-obstructed.
  static ModelGluingProblem preset(const std::string& name) {
    ModelGluingProblem p;
    p.name = name;
    if (name == "generic-d2m1") return p;
    if (name == "generic-d05m1") {
      p.delta = 0.5;
      p.eps0 = 0.05;
      return p;
    }
    if (name == "generic-d1m05") {
      p.delta = 1.0;
      p.mu = -0.5;
      return p;
    }
    if (name == "matched-exact") {
      p.matched_exact = true;
      p.eps0 = 0.0;
      return p;
    }
    if (name == "kernel-obstructed") {
      p.minus = {EndCondition::KillA, EndCondition::KillB, 0.0, 0.5};
      p.eps0 = 0.0;
      p.nu_plus = {0, 0, 0};
      p.nu_minus = {0, 0, 0};
      return p;
    }
    throw InvalidInput("unknown preset '" + name + "'");
  }

  static std::vector<std::string> preset_names() {
    return {"matched-exact", "generic-d2m1", "generic-d05m1", "generic-d1m05", "kernel-obstructed"};
  }
};

// ---------------------------------------------------------------- modes

struct SpeedClass {
  double s = 0.0;
  int channels = 0;  // real channels at this speed, 2 * multiplicity
};

/// Distinct nonzero speeds |k| <= mode_cutoff with their channel counts.
inline std::vector<SpeedClass> speed_classes(const ModelGluingProblem& p) {
  const double cut = static_cast<double>(p.mode_cutoff);
  const auto table = spectral::laplace_spectrum_torus(p.lattice, cut * cut * (1.0 + 1e-12));
  std::vector<SpeedClass> out;
  for (const auto& e : table.entries)
    if (e.eigenvalue > 0.0) out.push_back({std::sqrt(e.eigenvalue), 2 * e.multiplicity});
  if (out.size() < 2) throw InvalidInput("mode cutoff must admit at least two nonzero speeds");
  return out;
}

/// Largest defect between the matrix-exponential and closed-form mode
/// propagators over every wavevector with |k| <= mode_cutoff, relative to
/// the propagator norm, at the given (sigma, t) samples.
inline double per_mode_exactness_defect(const ModelGluingProblem& p, const std::vector<double>& sigmas, double t) {
  const double cut = static_cast<double>(p.mode_cutoff);
  const auto pts = spectral::detail::enumerate_dual(p.lattice, cut * cut * (1.0 + 1e-12)).first;
  double worst = 0.0;
  for (const auto& q : pts) {
    const spectral::Vec2 k = p.lattice.wavevector(q.m, q.n);
    for (double sg : sigmas) {
      const spectral::CMat4 a = mode_propagator(p.clifford, k, sg, t);
      const spectral::CMat4 b = mode_propagator_closed_form(p.clifford, k, sg, t);
      worst = std::max(worst, (a - b).norm() / std::max(1.0, b.norm()));
    }
  }
  return worst;
}

/// omega(u, v) = <J u, v> on V0 = (a_z1, b_z1, a_z2, b_z2).
inline MatrixXd model_symplectic_form() {
  MatrixXd w = MatrixXd::Zero(4, 4);
  w(0, 1) = 1;
  w(1, 0) = -1;
  w(2, 3) = 1;
  w(3, 2) = -1;
  return w;
}

// ------------------------------------------------------------ pregluing

/// beta_T = (1 - chi_T) u_plus + chi_T u_minus at the sample points t.
inline VectorXd preglue(const VectorXd& u_plus, const VectorXd& u_minus, const std::vector<double>& t, double T) {
  if (u_plus.size() != u_minus.size() || u_plus.size() != static_cast<Eigen::Index>(t.size()))
    throw InvalidInput("preglue: sections are sampled on different point sets");
  VectorXd out(u_plus.size());
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    const double w = cutoff(t[static_cast<std::size_t>(k)], T);
    out(k) = (1.0 - w) * u_plus(k) + w * u_minus(k);
  }
  return out;
}

// ---------------------------------------------------------- assembly

namespace detail {

enum class Side { Glued, Plus, Minus };

struct ChannelRef {
  int block = -1, channel = -1;
};

struct Layout {
  std::vector<Block> blocks;          // active blocks (G, Z2, V1 when present)
  ChannelRef z1, z2, w1, v1;
  std::vector<std::pair<Block, int>> spectators;  // one block per speed, with copy count
};

inline std::vector<Coupling> cap_couplings(const CapDesign& cap, bool from_right, int z, int w) {
  std::vector<Coupling> c;
  if (z >= 0 && cap.coupling != 0.0) c.push_back({Coupling::S, z, w, cap.coupling, 0.5, 1.0, from_right});
  // the minus cap is the mirror of a plus-type cap, which flips the sign of P
  if (cap.chirality != 0.0)
    c.push_back({Coupling::P, w, w, from_right ? -cap.chirality : cap.chirality, 0.0, 0.5, from_right});
  return c;
}

/// Blocks on the glued neck (Side::Glued) or on a half-cylinder. Half
/// cylinders only contain the zero-mode blocks and use radiation conditions
/// at the open end.
inline Layout build_layout(const ModelGluingProblem& p, Side side, const Grid& grid, bool spectators) {
  const auto speeds = speed_classes(p);
  const double s1 = speeds[0].s, s2 = speeds[1].s;
  const bool plus_cap = side != Side::Minus, minus_cap = side != Side::Plus;
  const auto zl = [&](EndCondition e) { return plus_cap ? e : EndCondition::Free; };
  const auto zr = [&](EndCondition e) { return minus_cap ? e : EndCondition::Free; };
  const Channel w1{"w1", s1, EndCondition::KillB, EndCondition::KillA};

  Layout out;
  std::vector<Coupling> cg;
  std::vector<Channel> g;
  if (p.include_zero_mode) {
    g.push_back({"z1", 0.0, zl(p.plus.z1), zr(p.minus.z1)});
    g.push_back(w1);
    if (plus_cap)
      for (auto& c : cap_couplings(p.plus, false, 0, 1)) cg.push_back(c);
    if (minus_cap)
      for (auto& c : cap_couplings(p.minus, true, 0, 1)) cg.push_back(c);
    out.blocks.emplace_back(g, cg, grid);
    out.z1 = {0, 0};
    out.w1 = {0, 1};
    out.blocks.emplace_back(std::vector<Channel>{{"z2", 0.0, zl(p.plus.z2), zr(p.minus.z2)}},
                            std::vector<Coupling>{}, grid);
    out.z2 = {1, 0};
  } else if (side == Side::Glued) {
    g.push_back(w1);
    for (auto& c : cap_couplings(p.plus, false, -1, 0)) cg.push_back(c);
    for (auto& c : cap_couplings(p.minus, true, -1, 0)) cg.push_back(c);
    out.blocks.emplace_back(g, cg, grid);
    out.w1 = {0, 0};
  }
  if (side == Side::Glued) {
    out.blocks.emplace_back(std::vector<Channel>{{"v1", s2, EndCondition::KillB, EndCondition::KillA}},
                            std::vector<Coupling>{}, grid);
    out.v1 = {static_cast<int>(out.blocks.size()) - 1, 0};
  }
  if (spectators)
    for (std::size_t i = 0; i < speeds.size(); ++i) {
      const int used = (i == 0 || i == 1) ? 1 : 0;
      const int copies = speeds[i].channels - used;
      if (copies <= 0) continue;
      std::ostringstream nm;
      nm.precision(6);
      nm << "s=" << speeds[i].s;
      out.spectators.emplace_back(
          Block({{nm.str(), speeds[i].s, EndCondition::KillB, EndCondition::KillA}}, {}, grid), copies);
    }
  return out;
}

inline Grid glued_grid(const ModelGluingProblem& p) { return Grid::over(0.0, p.length(), p.h); }

}  // namespace detail

/// Linearisation handle on the glued neck: active blocks, spectators, the
/// pregluing beta_T, the forcing g and the nonlinear functional
/// F(u) = L0 u + kappa u.u - g with linearisation L_T = L0 + 2 kappa diag(beta).
class Linearization {
 public:
  Linearization(ModelGluingProblem p, bool with_spectators = true) : p_(std::move(p)) {
    p_.validate();
    grid_ = detail::glued_grid(p_);
    layout_ = detail::build_layout(p_, detail::Side::Glued, grid_, with_spectators);
    dim_ = 0;
    for (const auto& b : layout_.blocks) {
      offset_.push_back(dim_);
      dim_ += b.unknowns();
      positions_.reserve(static_cast<std::size_t>(dim_));
      for (int k = 0; k < b.unknowns(); ++k) positions_.push_back(b.position(k));
    }
    build_data();
    for (std::size_t i = 0; i < layout_.blocks.size(); ++i)
      lin_.push_back(layout_.blocks[i].with_diagonal(2.0 * p_.kappa * segment(beta_, static_cast<int>(i))));
  }

  const ModelGluingProblem& problem() const { return p_; }
  const Grid& grid() const { return grid_; }
  double T() const { return p_.T; }
  Eigen::Index dim() const { return dim_; }
  const std::vector<double>& positions() const { return positions_; }
  const std::vector<Block>& blocks() const { return layout_.blocks; }
  const std::vector<std::pair<Block, int>>& spectators() const { return layout_.spectators; }
  const detail::Layout& layout() const { return layout_; }
  Eigen::Index offset(int block) const { return offset_[static_cast<std::size_t>(block)]; }

  const VectorXd& beta() const { return beta_; }
  const VectorXd& forcing() const { return g_; }

  VectorXd segment(const VectorXd& x, int block) const {
    return x.segment(offset(block), layout_.blocks[static_cast<std::size_t>(block)].unknowns());
  }

  /// L0 u (no linearisation term).
  VectorXd apply_bare(const VectorXd& u) const {
    VectorXd out(dim_);
    for (std::size_t i = 0; i < layout_.blocks.size(); ++i)
      out.segment(offset(static_cast<int>(i)), layout_.blocks[i].unknowns()) =
          layout_.blocks[i].matrix() * segment(u, static_cast<int>(i));
    return out;
  }

  /// L_T u, the linearisation at beta_T.
  VectorXd apply(const VectorXd& u) const { return apply_with(lin_, u); }

  VectorXd F(const VectorXd& u) const { return apply_bare(u) + p_.kappa * u.cwiseProduct(u) - g_; }
  /// Q_T(beta + d) = F(beta + d) - F(beta) - L_T d = kappa d.d.
  VectorXd remainder(const VectorXd& d) const { return p_.kappa * d.cwiseProduct(d); }
  VectorXd error() const { return F(beta_); }

  /// Linearised block matrices at an arbitrary point.
  std::vector<Eigen::SparseMatrix<double>> linearized_at(const VectorXd& u) const {
    std::vector<Eigen::SparseMatrix<double>> out;
    for (std::size_t i = 0; i < layout_.blocks.size(); ++i)
      out.push_back(layout_.blocks[i].with_diagonal(2.0 * p_.kappa * segment(u, static_cast<int>(i))));
    return out;
  }
  const std::vector<Eigen::SparseMatrix<double>>& linear_blocks() const { return lin_; }

  VectorXd apply_with(const std::vector<Eigen::SparseMatrix<double>>& mats, const VectorXd& u) const {
    if (u.size() != dim_) throw InvalidInput("section has the wrong dimension");
    VectorXd out(dim_);
    for (std::size_t i = 0; i < mats.size(); ++i)
      out.segment(offset(static_cast<int>(i)), layout_.blocks[i].unknowns()) = mats[i] * segment(u, static_cast<int>(i));
    return out;
  }

  /// Smallest singular value over active blocks (given matrices) and spectators.
  double sigma_min_with(const std::vector<Eigen::SparseMatrix<double>>& mats) const {
    double s = INFINITY;
    for (const auto& m : mats) s = std::min(s, gluer::sigma_min(m));
    for (const auto& [b, n] : layout_.spectators) s = std::min(s, gluer::sigma_min(b.matrix()));
    return s;
  }
  double sigma_min() const { return sigma_min_with(lin_); }

  /// Exact sup-norm bound ||u|| <= c_L ||L_T u|| over all blocks.
  double c_L() const {
    double c = 0.0;
    for (const auto& m : lin_) c = std::max(c, inverse_sup_norm(m));
    for (const auto& [b, n] : layout_.spectators) c = std::max(c, inverse_sup_norm(b.matrix()));
    return c;
  }

  /// max |<L u, v> - <u, L v>| h over random unit vectors, per block.
  double self_adjoint_defect(int samples, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    double worst = 0.0;
    auto check = [&](const Eigen::SparseMatrix<double>& M) {
      for (int k = 0; k < samples; ++k) {
        VectorXd u(M.rows()), v(M.rows());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
          u(i) = n(rng);
          v(i) = n(rng);
        }
        u.normalize();
        v.normalize();
        worst = std::max(worst, std::abs((M * u).dot(v) - u.dot(M * v)));
      }
    };
    for (const auto& m : lin_) check(m);
    for (const auto& [b, c] : layout_.spectators) check(b.matrix());
    return worst;
  }

 private:
  VectorXd channel_profile(const std::array<double, 3>& nu, bool from_plus) const {
    VectorXd v = VectorXd::Zero(dim_);
    const double L = p_.length();
    const detail::ChannelRef refs[3] = {layout_.z1, layout_.w1, layout_.v1};
    for (int c = 0; c < 3; ++c) {
      if (refs[c].block < 0 || nu[static_cast<std::size_t>(c)] == 0.0) continue;
      const Block& b = layout_.blocks[static_cast<std::size_t>(refs[c].block)];
      const double amp = nu[static_cast<std::size_t>(c)];
      for (int k = 0; k < b.unknowns(); ++k)
        if (b.channel_of(k) == refs[c].channel) {
          const double t = b.position(k);
          v(offset(refs[c].block) + k) = amp * std::exp(p_.mu * (from_plus ? t : L - t));
        }
    }
    return v;
  }

  void build_data() {
    VectorXd ap = channel_profile(p_.nu_plus, true), am = channel_profile(p_.nu_minus, false);
    if (p_.matched_exact) {
      ap += am;
      am = ap;
    }
    const VectorXd gp = apply_bare(ap) + p_.kappa * ap.cwiseProduct(ap);
    const VectorXd gm = apply_bare(am) + p_.kappa * am.cwiseProduct(am);
    beta_ = preglue(ap, am, positions_, p_.T);
    g_ = preglue(gp, gm, positions_, p_.T);
    if (p_.eps0 != 0.0) {
      const detail::ChannelRef src = p_.include_zero_mode ? layout_.z2 : layout_.w1;
      const Block& b = layout_.blocks[static_cast<std::size_t>(src.block)];
      const double amp = p_.eps0 * std::exp(-p_.delta * p_.T);
      for (int k = 0; k < b.unknowns(); ++k)
        if (b.channel_of(k) == src.channel) g_(offset(src.block) + k) += amp * bump(b.position(k), p_.T, p_.T + 1.0);
    }
  }

  ModelGluingProblem p_;
  Grid grid_;
  detail::Layout layout_;
  Eigen::Index dim_ = 0;
  std::vector<Eigen::Index> offset_;
  std::vector<double> positions_;
  VectorXd beta_, g_;
  std::vector<Eigen::SparseMatrix<double>> lin_;
};

/// Assembles L_T and checks well-posedness and self-adjointness. Channels
/// without cap coupling are checked for an exact kernel through the
/// closed-form transfer matrix.
inline Linearization assemble_linearization(const ModelGluingProblem& p, bool with_spectators = true) {
  p.validate();
  const double L = p.length();
  Linearization lin(p, with_spectators);
  auto coupled = [](const Block& b, int c) {
    for (const auto& cp : b.couplings())
      if (cp.kind == Coupling::S && cp.i != cp.j && (cp.i == c || cp.j == c) && cp.amplitude != 0.0) return true;
    return false;
  };
  for (const auto& b : lin.blocks())
    for (int c = 0; c < b.size(); ++c)
      if (!coupled(b, c)) check_well_posed(b.channels()[static_cast<std::size_t>(c)], L);
  for (const auto& [b, n] : lin.spectators()) check_well_posed(b.channels()[0], L);
  const double defect = lin.self_adjoint_defect(4, 17);
  if (defect > 1e-10) throw ModelInconsistency("assembled operator is not self-adjoint");
  return lin;
}

// ------------------------------------------------------ matching kernel

/// Basis (columns) of {(c+, c-) : f_star * iota_plus c+ = iota_minus c-}.
/// Rows 0..k+-1 hold c+, the remaining rows c-.
inline MatrixXd matching_kernel(const MatrixXd& iota_plus, const MatrixXd& iota_minus, const MatrixXd& f_star) {
  const auto d = f_star.rows();
  if (f_star.cols() != d || iota_plus.rows() != d || iota_minus.rows() != d)
    throw InvalidInput("matching kernel: limits and f_star must share the dimension of V0");
  Eigen::FullPivLU<MatrixXd> flu(f_star);
  if (!flu.isInvertible()) throw InvalidInput("f_star must be invertible");
  MatrixXd A(d, iota_plus.cols() + iota_minus.cols());
  A << f_star * iota_plus, -iota_minus;
  if (A.cols() == 0) return MatrixXd(0, 0);
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  return svd.matrixV().rightCols(A.cols() - rank);
}

/// Bounded kernel of the zero-mode blocks on one half-cylinder, with the V0
/// limits of each kernel element.
struct HalfCylinder {
  bool plus = true;
  std::vector<Block> blocks;
  std::vector<int> block_of;     // per kernel element
  std::vector<VectorXd> vectors; // per kernel element, on its block
  MatrixXd limits;               // 4 x elements
};

/// Half-cylinder [0, T+2] (plus) or [L-T-2, L] (minus), sharing nodes with
/// the glued grid. s > 0 channels suppress the growing mode at the open end;
/// zero channels are left free there.
inline HalfCylinder half_cylinder(const ModelGluingProblem& p, bool plus) {
  p.validate();
  if (!p.include_zero_mode) throw InvalidInput("half-cylinder limits need the zero mode");
  const Grid g = detail::glued_grid(p);
  const int cells = std::min(g.cells, static_cast<int>(std::ceil((p.T + 2.0) / g.h - 1e-9)));
  Grid hg{plus ? 0.0 : g.t0 + (g.cells - cells) * g.h, g.h, cells};
  auto lay = detail::build_layout(p, plus ? detail::Side::Plus : detail::Side::Minus, hg, false);
  // s > 0 channels: plus kills a at the open end, minus kills b there
  HalfCylinder hc;
  hc.plus = plus;
  hc.blocks = std::move(lay.blocks);
  std::vector<std::array<double, 4>> lim;
  for (std::size_t bi = 0; bi < hc.blocks.size(); ++bi) {
    const Block& b = hc.blocks[bi];
    const MatrixXd A(b.matrix());
    Eigen::BDCSVD<MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double tol = 1e-9 * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > tol) ++rank;
    const MatrixXd K = svd.matrixV().rightCols(A.cols() - rank);
    const int N = hg.cells;
    for (Eigen::Index c = 0; c < K.cols(); ++c) {
      std::array<double, 4> l{0, 0, 0, 0};
      for (int ch = 0; ch < b.size(); ++ch) {
        const auto& name = b.channels()[static_cast<std::size_t>(ch)].name;
        if (name != "z1" && name != "z2") continue;
        const int base = name == "z1" ? 0 : 2;
        const int ai = b.a_index(ch, plus ? N : 0), bj = b.b_index(ch, plus ? N - 1 : 0);
        l[static_cast<std::size_t>(base)] = ai >= 0 ? K(ai, c) : 0.0;
        l[static_cast<std::size_t>(base + 1)] = K(bj, c);
      }
      hc.block_of.push_back(static_cast<int>(bi));
      hc.vectors.push_back(K.col(c));
      lim.push_back(l);
    }
  }
  hc.limits = MatrixXd::Zero(4, static_cast<Eigen::Index>(lim.size()));
  for (std::size_t c = 0; c < lim.size(); ++c)
    for (int r = 0; r < 4; ++r) hc.limits(r, static_cast<Eigen::Index>(c)) = lim[c][static_cast<std::size_t>(r)];
  return hc;
}

struct MatchingData {
  HalfCylinder plus, minus;
  MatrixXd basis;  // columns of the matching kernel
  int dim() const { return static_cast<int>(basis.cols()); }
};

inline MatchingData compute_matching(const ModelGluingProblem& p) {
  MatchingData m{half_cylinder(p, true), half_cylinder(p, false), {}};
  m.basis = matching_kernel(m.plus.limits, m.minus.limits, MatrixXd::Identity(4, 4));
  return m;
}

// ---------------------------------------------------- approximate kernel

struct ApproximateKernel {
  std::vector<VectorXd> elements;  // glued sections on the active layout, sup norm 1
  std::vector<double> residuals;   // ||L_T xi|| / ||xi|| (sup norms)
  double gram_det = 1.0;           // Gram determinant of L2-normalised elements
};

namespace detail {
// Copies a half-cylinder section onto the matching glued block.
inline VectorXd transplant(const Block& half, const VectorXd& v, const Block& glued) {
  const double h = glued.grid().h;
  const int off = static_cast<int>(std::lround((half.grid().t0 - glued.grid().t0) / h));
  VectorXd out = VectorXd::Zero(glued.unknowns());
  for (int k = 0; k < glued.unknowns(); ++k) {
    const int ch = glued.channel_of(k);
    const double t = glued.position(k) - glued.grid().t0;
    int idx = -1;
    if (glued.is_a(k)) {
      const int i = static_cast<int>(std::lround(t / h)) - off;
      if (i >= 0 && i <= half.grid().cells) idx = half.a_index(ch, i);
    } else {
      const int j = static_cast<int>(std::lround(t / h - 0.5)) - off;
      if (j >= 0 && j < half.grid().cells) idx = half.b_index(ch, j);
    }
    if (idx >= 0) out(k) = v(idx);
  }
  return out;
}
}  // namespace detail

/// Glued sections u+ #_T u- for every matching-kernel basis element.
inline ApproximateKernel approximate_kernel_elements(const Linearization& lin, const MatchingData& m) {
  ApproximateKernel out;
  const auto kp = static_cast<Eigen::Index>(m.plus.vectors.size());
  for (Eigen::Index c = 0; c < m.basis.cols(); ++c) {
    VectorXd up = VectorXd::Zero(lin.dim()), um = VectorXd::Zero(lin.dim());
    auto add = [&](const HalfCylinder& hc, Eigen::Index first, VectorXd& target) {
      for (std::size_t e = 0; e < hc.vectors.size(); ++e) {
        const double coef = m.basis(first + static_cast<Eigen::Index>(e), c);
        if (coef == 0.0) continue;
        const int bi = hc.block_of[e];
        const Block& glued = lin.blocks()[static_cast<std::size_t>(bi)];
        target.segment(lin.offset(bi), glued.unknowns()) +=
            coef * detail::transplant(hc.blocks[static_cast<std::size_t>(bi)], hc.vectors[e], glued);
      }
    };
    add(m.plus, 0, up);
    add(m.minus, kp, um);
    VectorXd xi = preglue(up, um, lin.positions(), lin.T());
    xi /= sup_norm(xi);
    out.residuals.push_back(sup_norm(lin.apply(xi)));
    out.elements.push_back(xi);
  }
  if (!out.elements.empty()) {
    MatrixXd G(out.elements.size(), out.elements.size());
    for (std::size_t i = 0; i < out.elements.size(); ++i)
      for (std::size_t j = 0; j < out.elements.size(); ++j)
        G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            out.elements[i].normalized().dot(out.elements[j].normalized());
    out.gram_det = G.determinant();
  }
  return out;
}

inline ApproximateKernel approximate_kernel_elements(const ModelGluingProblem& p) {
  return approximate_kernel_elements(Linearization(p, false), compute_matching(p));
}

// ----------------------------------------------------------- experiments

inline std::vector<double> integer_grid(int tmin, int tmax) {
  if (tmax < tmin) throw InvalidInput("empty T grid");
  std::vector<double> g;
  for (int t = tmin; t <= tmax; ++t) g.push_back(t);
  return g;
}

inline void require_regression_grid(const std::vector<double>& grid) {
  if (grid.size() < 4) throw InvalidInput("a decay-rate regression needs at least 4 grid points");
}

/// sigma_min of L_T on X_T: orthogonal to each approximate-kernel element
/// and to its restrictions to the two cap bands of width 1.
inline double restricted_sigma_min(const Linearization& lin, const ApproximateKernel& ak) {
  if (ak.elements.empty()) return lin.sigma_min();
  const double L = lin.problem().length();
  std::vector<VectorXd> cons;
  for (const auto& xi : ak.elements) {
    VectorXd left = VectorXd::Zero(lin.dim()), right = VectorXd::Zero(lin.dim());
    for (Eigen::Index k = 0; k < lin.dim(); ++k) {
      const double t = lin.positions()[static_cast<std::size_t>(k)];
      if (t <= 1.0) left(k) = xi(k);
      if (t >= L - 1.0) right(k) = xi(k);
    }
    for (const VectorXd& v : {xi, left, right})
      if (v.norm() > 0.0) cons.push_back(v);
  }
  const auto& mats = lin.linear_blocks();
  std::vector<int> touched;
  double s = INFINITY;
  for (std::size_t b = 0; b < mats.size(); ++b) {
    bool hit = false;
    for (const auto& v : cons) hit = hit || lin.segment(v, static_cast<int>(b)).norm() > 0.0;
    if (hit) touched.push_back(static_cast<int>(b));
    else s = std::min(s, gluer::sigma_min(mats[b]));
  }
  for (const auto& [b, n] : lin.spectators()) s = std::min(s, gluer::sigma_min(b.matrix()));
  Eigen::Index n = 0;
  for (int b : touched) n += mats[static_cast<std::size_t>(b)].rows();
  Eigen::SparseMatrix<double> joint(n, n);
  std::vector<Eigen::Triplet<double>> trip;
  MatrixXd C(n, static_cast<Eigen::Index>(cons.size()));
  Eigen::Index o = 0;
  for (int b : touched) {
    const auto& M = mats[static_cast<std::size_t>(b)];
    for (int k = 0; k < M.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it)
        trip.emplace_back(o + it.row(), o + it.col(), it.value());
    for (std::size_t c = 0; c < cons.size(); ++c) C.block(o, static_cast<Eigen::Index>(c), M.rows(), 1) = lin.segment(cons[c], b);
    o += M.rows();
  }
  joint.setFromTriplets(trip.begin(), trip.end());
  return std::min(s, sigma_min_restricted(joint, C));
}

struct LinearEstimate {
  std::vector<double> T;
  std::vector<double> sigma_restricted;
  std::vector<double> sigma_unrestricted;
  int kernel_dim = 0;
  double Lambda = 0.0;
  SlopeFit fit_restricted, fit_unrestricted;
  double c = 0.0;  // fitted constant: sigma >= c e^{-Lambda T} on the grid
  bool holds() const { return fit_restricted.slope >= -Lambda; }
};

inline LinearEstimate linear_estimate_experiment(ModelGluingProblem p, const std::vector<double>& grid, double Lambda) {
  require_regression_grid(grid);
  if (!(Lambda > 0.0)) throw InvalidInput("Lambda must be positive");
  LinearEstimate out;
  out.Lambda = Lambda;
  for (double T : grid) {
    p.T = T;
    const Linearization lin(p);
    const double su = lin.sigma_min();
    double sr = su;
    if (p.include_zero_mode) {
      const auto m = compute_matching(p);
      out.kernel_dim = m.dim();
      sr = restricted_sigma_min(lin, approximate_kernel_elements(lin, m));
    }
    out.T.push_back(T);
    out.sigma_unrestricted.push_back(su);
    out.sigma_restricted.push_back(sr);
  }
  out.fit_restricted = fit_log_slope(out.T, out.sigma_restricted);
  out.fit_unrestricted = fit_log_slope(out.T, out.sigma_unrestricted);
  out.c = INFINITY;
  for (std::size_t i = 0; i < out.T.size(); ++i)
    out.c = std::min(out.c, out.sigma_restricted[i] * std::exp(Lambda * out.T[i]));
  return out;
}

struct ErrorExperiment {
  std::vector<double> T, error_norm;
  std::optional<SlopeFit> fit;  // absent when some error vanishes
};

inline ErrorExperiment error_norm_experiment(ModelGluingProblem p, const std::vector<double>& grid) {
  require_regression_grid(grid);
  ErrorExperiment out;
  for (double T : grid) {
    p.T = T;
    out.T.push_back(T);
    out.error_norm.push_back(sup_norm(Linearization(p, false).error()));
  }
  bool positive = true;
  for (double e : out.error_norm) positive = positive && e > 0.0;
  if (positive) out.fit = fit_log_slope(out.T, out.error_norm);
  return out;
}

/// max ||Q(u) - Q(v)|| / (||u - v|| (||u - beta|| + ||v - beta||)) over random
/// pairs u = beta + du, v = beta + dv near beta_T.
inline double quadratic_probe(const Linearization& lin, int samples, std::uint64_t seed, double radius = 0.1) {
  if (samples < 1) throw InvalidInput("quadratic probe needs at least one sample");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto draw = [&] {
    VectorXd d(lin.dim());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = n(rng);
    return VectorXd(d * (radius * u01(rng) / sup_norm(d)));
  };
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const VectorXd du = draw(), dv = draw();
    const double den = sup_norm(du - dv) * (sup_norm(du) + sup_norm(dv));
    if (den > 0.0) worst = std::max(worst, sup_norm(lin.remainder(du) - lin.remainder(dv)) / den);
  }
  return worst;
}

// ---------------------------------------------------------------- gluing

struct GlueResult {
  double T = 0.0;
  bool converged = false;
  double error_norm = 0.0;
  double sigma_min = 0.0;
  double c_L = 0.0, c_Q = 0.0;
  double precondition_bound = 0.0;
  double solution_distance = 0.0;
  double residual = 0.0;
  double relinearized_sigma_min = 0.0;
  double max_factor = 0.0;
  int iterations = 0;
  VectorXd solution;
};

inline void require_unobstructed(const ModelGluingProblem& p) {
  if (!p.include_zero_mode) return;
  const int d = compute_matching(p).dim();
  if (d != 0)
    throw HypothesisViolated("matching kernel has dimension " + std::to_string(d) + "; gluing needs it trivial");
}

/// One nonlinear solve at the problem's T. Throws PreconditionError when
/// ||e_T|| exceeds 1/(10 c_L^2 c_Q).
inline GlueResult glue_model(const ModelGluingProblem& p, bool check_kernel = true) {
  if (check_kernel) require_unobstructed(p);
  const Linearization lin = assemble_linearization(p);
  GlueResult r;
  r.T = p.T;
  const VectorXd e = lin.error();
  r.error_norm = sup_norm(e);
  r.sigma_min = lin.sigma_min();
  r.c_L = lin.c_L();
  r.c_Q = p.kappa;  // |u.u - v.v| <= |u - v| (|u| + |v|) componentwise
  std::vector<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lus(lin.linear_blocks().size());
  for (std::size_t i = 0; i < lus.size(); ++i) {
    lus[i].compute(lin.linear_blocks()[i]);
    if (lus[i].info() != Eigen::Success) throw ModelInconsistency("linearisation is singular");
  }
  ContractionSpec s;
  s.apply_L = [&](const VectorXd& x) { return lin.apply(x); };
  s.solve_L = [&](const VectorXd& y) {
    VectorXd x(y.size());
    for (std::size_t i = 0; i < lus.size(); ++i) {
      const int b = static_cast<int>(i);
      x.segment(lin.offset(b), lin.blocks()[i].unknowns()) = lus[i].solve(lin.segment(y, b));
    }
    return x;
  };
  const double kappa = p.kappa;
  s.Q = [kappa](const VectorXd& x) { return VectorXd(kappa * x.cwiseProduct(x)); };
  s.F_x0 = e;
  s.x0 = VectorXd::Zero(lin.dim());
  s.c_L = r.c_L;
  s.c_Q = kappa > 0.0 ? kappa : 1e-300;
  r.precondition_bound = s.precondition_bound();
  const auto res = contract_solve(s);
  r.solution = lin.beta() + res.x;
  r.solution_distance = sup_norm(res.x);
  r.residual = sup_norm(lin.F(r.solution));
  r.iterations = res.iterations;
  r.max_factor = res.max_factor;
  r.relinearized_sigma_min = lin.sigma_min_with(lin.linearized_at(r.solution));
  r.converged = r.residual <= 1e-9 && r.relinearized_sigma_min > 0.0;
  return r;
}

struct GluingReport {
  std::string preset;
  std::vector<GlueResult> rows;
  std::optional<double> T1;
  std::optional<SlopeFit> error_fit, sigma_fit, distance_fit;
};

/// glue_model over a T grid. T1 is the first grid value whose
/// contraction preconditions hold; rows before it are reported unconverged.
inline GluingReport glue_experiment(ModelGluingProblem p, const std::vector<double>& grid) {
  require_regression_grid(grid);
  require_unobstructed(p);
  GluingReport rep;
  rep.preset = p.name;
  for (double T : grid) {
    p.T = T;
    GlueResult r;
    try {
      r = glue_model(p, false);
    } catch (const PreconditionError&) {
      const Linearization lin(p);
      r.T = T;
      r.error_norm = sup_norm(lin.error());
      r.sigma_min = lin.sigma_min();
      r.c_L = lin.c_L();
      r.c_Q = p.kappa;
      r.converged = false;
      r.solution_distance = NAN;
    }
    if (!rep.T1 && r.converged) rep.T1 = T;
    rep.rows.push_back(std::move(r));
  }
  if (!rep.T1) throw NoThreshold("contraction preconditions fail on every grid value");
  std::vector<double> t, e, s, dt, dd;
  for (const auto& r : rep.rows) {
    t.push_back(r.T);
    e.push_back(r.error_norm);
    s.push_back(r.sigma_min);
    if (r.converged && r.T >= *rep.T1 && r.solution_distance > 0.0) {
      dt.push_back(r.T);
      dd.push_back(r.solution_distance);
    }
  }
  auto all_pos = [](const std::vector<double>& v) {
    for (double x : v)
      if (!(x > 0.0)) return false;
    return true;
  };
  if (all_pos(e)) rep.error_fit = fit_log_slope(t, e);
  rep.sigma_fit = fit_log_slope(t, s);
  if (dt.size() >= 4) rep.distance_fit = fit_log_slope(dt, dd);
  return rep;
}

// ---------------------------------------------------------------- output

namespace detail {
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
inline nlohmann::json fit_json(const std::optional<SlopeFit>& f) {
  if (!f) return nullptr;
  return {{"slope", f->slope}, {"intercept", f->intercept}, {"stderr", f->stderr_slope},
          {"ci95", {f->ci_low, f->ci_high}}, {"points", f->points}};
}
}  // namespace detail

inline std::string to_csv(const GluingReport& r) {
  std::string out = "T,error_norm,sigma_min,solution_distance,converged\n";
  for (const auto& row : r.rows)
    out += detail::num(row.T) + "," + detail::num(row.error_norm) + "," + detail::num(row.sigma_min) + "," +
           detail::num(row.solution_distance) + "," + (row.converged ? "true" : "false") + "\n";
  return out;
}

inline nlohmann::json to_json(const GluingReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json j{{"T", row.T},
                     {"error_norm", row.error_norm},
                     {"sigma_min", row.sigma_min},
                     {"c_L", row.c_L},
                     {"c_Q", row.c_Q},
                     {"converged", row.converged}};
    j["solution_distance"] = std::isnan(row.solution_distance) ? nlohmann::json(nullptr) : nlohmann::json(row.solution_distance);
    if (row.converged) {
      j["residual"] = row.residual;
      j["relinearized_sigma_min"] = row.relinearized_sigma_min;
      j["iterations"] = row.iterations;
      j["max_factor"] = row.max_factor;
    }
    rows.push_back(j);
  }
  return {{"preset", r.preset},
          {"T1", r.T1 ? nlohmann::json(*r.T1) : nlohmann::json(nullptr)},
          {"rows", rows},
          {"fitted_exponents",
           {{"error_norm", detail::fit_json(r.error_fit)},
            {"sigma_min", detail::fit_json(r.sigma_fit)},
            {"solution_distance", detail::fit_json(r.distance_fit)}}}};
}

}  // namespace acyl::gluer
