#pragma once

// Weighted Fredholm index calculus over multi-ended cylinders.

#include <acyl/errors.hpp>
#include <acyl/spectral.hpp>

#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace acyl::fredholm {

using spectral::IndicialData;
using spectral::IndicialRoot;

inline constexpr double kCriticalTol = 1e-10;

struct EndSpectrum {
  std::vector<IndicialData> ends;
  std::vector<std::string> labels;  // optional, empty or one per end

  std::size_t size() const { return ends.size(); }

  void validate() const {
    if (ends.empty()) throw InvalidInput("at least one end is required");
    if (!labels.empty() && labels.size() != ends.size()) throw InvalidInput("labels must match the number of ends");
    for (const auto& e : ends) e.validate();
  }
};

using RateVector = std::vector<double>;

struct EndContribution {
  int d0 = 0;
  int sign = 1;                       // +1 for rate >= 0, -1 otherwise
  std::vector<IndicialRoot> crossed;  // roots strictly between 0 and the rate
  int value = 0;                      // sign * (d0/2 + sum of crossed d)
};

struct IndexReport {
  int index = 0;
  std::vector<EndContribution> per_end;
};

namespace detail {

inline void check_shapes(const EndSpectrum& ends, const RateVector& rate) {
  ends.validate();
  if (rate.size() != ends.size())
    throw InvalidInput("rate vector has " + std::to_string(rate.size()) + " components, expected " +
                       std::to_string(ends.size()));
  for (std::size_t i = 0; i < rate.size(); ++i) {
    if (!std::isfinite(rate[i])) throw InvalidInput("rates must be finite");
    if (std::abs(rate[i]) > ends.ends[i].cutoff + kCriticalTol)
      throw InsufficientSpectrum("rate " + std::to_string(rate[i]) + " on end " + std::to_string(i) +
                                 " exceeds the computed root cutoff " + std::to_string(ends.ends[i].cutoff));
  }
}

inline bool near_root(const IndicialData& end, double rate) {
  if (std::abs(rate) <= kCriticalTol && end.d0 > 0) return true;
  for (const auto& r : end.roots)
    if (std::abs(r.root - rate) <= kCriticalTol) return true;
  return false;
}

inline int half_d0(const IndicialData& end) {
  if (end.d0 % 2 != 0) throw ModelInconsistency("odd d0 = " + std::to_string(end.d0) + " has no half-index");
  return end.d0 / 2;
}

}  // namespace detail

/// True when some component of `rate` sits on an indicial root of its end.
inline bool is_critical_rate(const EndSpectrum& ends, const RateVector& rate) {
  detail::check_shapes(ends, rate);
  for (std::size_t i = 0; i < rate.size(); ++i)
    if (detail::near_root(ends.ends[i], rate[i])) return true;
  return false;
}

/// Index of the weighted operator at a non-critical rate:
///   sum over lambda_i >= 0 of (d0_i/2 + sum_{zeta in (0, lambda_i)} d_zeta)
/// minus sum over lambda_i < 0 of (d0_i/2 + sum_{zeta in (lambda_i, 0)} d_zeta).
inline IndexReport index_full(const EndSpectrum& ends, const RateVector& rate) {
  if (is_critical_rate(ends, rate)) throw CriticalRate("rate lies on the wall of critical rates");
  IndexReport rep;
  for (std::size_t i = 0; i < rate.size(); ++i) {
    const auto& end = ends.ends[i];
    EndContribution c;
    c.d0 = end.d0;
    c.sign = rate[i] >= 0.0 ? 1 : -1;
    int sum = detail::half_d0(end);
    for (const auto& r : end.roots) {
      const bool inside = c.sign > 0 ? (r.root > 0.0 && r.root < rate[i]) : (r.root < 0.0 && r.root > rate[i]);
      if (inside) {
        c.crossed.push_back(r);
        sum += r.d;
      }
    }
    c.value = c.sign * sum;
    rep.index += c.value;
    rep.per_end.push_back(std::move(c));
  }
  return rep;
}

/// Index for fixed asymptotic cross-section and decaying rates mu < 0.
inline IndexReport index_fixed_cross_section(const EndSpectrum& ends, const RateVector& mu) {
  for (double m : mu)
    if (!(m < 0.0)) throw InvalidInput("fixed-cross-section index needs every rate component negative");
  IndexReport rep = index_full(ends, mu);
  // Closed form -sum d0/2 - sum sum d_lambda, cross-checked against the
  // general formula.
  int closed = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    closed -= detail::half_d0(ends.ends[i]);
    for (const auto& r : ends.ends[i].roots)
      if (r.root < 0.0 && r.root > mu[i]) closed -= r.d;
  }
  if (closed != rep.index) throw ModelInconsistency("fixed-cross-section index disagrees with the full formula");
  return rep;
}

/// Index when the asymptotic cross-section is allowed to vary: sum d0_i / 2.
inline int index_varying_cross_section(const EndSpectrum& ends) {
  ends.validate();
  int total = 0;
  for (const auto& e : ends.ends) total += detail::half_d0(e);
  return total;
}

/// Index after the rate crosses one wall of dimension d_lambda upwards.
inline int wall_crossing(int index_before, int d_lambda) {
  if (d_lambda < 0) throw InvalidInput("d_lambda must be nonnegative");
  return index_before + d_lambda;
}

/// Walls met on the straight path from `from` to `to` (componentwise), with
/// the direction of crossing: +1 upward, -1 downward.
struct Wall {
  std::size_t end;
  double root;
  int d;
  int direction;
};

inline std::vector<Wall> walls_between(const EndSpectrum& ends, const RateVector& from, const RateVector& to) {
  detail::check_shapes(ends, from);
  detail::check_shapes(ends, to);
  std::vector<Wall> out;
  for (std::size_t i = 0; i < from.size(); ++i) {
    const double lo = std::min(from[i], to[i]), hi = std::max(from[i], to[i]);
    const int dir = to[i] >= from[i] ? 1 : -1;
    const auto& end = ends.ends[i];
    if (lo < 0.0 && hi > 0.0 && end.d0 > 0) out.push_back({i, 0.0, end.d0, dir});
    for (const auto& r : end.roots)
      if (r.root > lo && r.root < hi) out.push_back({i, r.root, r.d, dir});
  }
  return out;
}

inline nlohmann::json to_json(const IndexReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& c : r.per_end) {
    nlohmann::json crossed = nlohmann::json::array();
    for (const auto& z : c.crossed) crossed.push_back({{"root", z.root}, {"d", z.d}});
    per.push_back({{"d0", c.d0}, {"sign", c.sign}, {"value", c.value}, {"crossed", crossed}});
  }
  return {{"index", r.index}, {"per_end", per}};
}

inline IndexReport index_report_from_json(const nlohmann::json& j) {
  IndexReport r;
  r.index = j.at("index").get<int>();
  for (const auto& p : j.at("per_end")) {
    EndContribution c;
    c.d0 = p.at("d0").get<int>();
    c.sign = p.value("sign", 1);
    c.value = p.value("value", 0);
    for (const auto& z : p.at("crossed")) c.crossed.push_back({z.at("root").get<double>(), z.at("d").get<int>()});
    r.per_end.push_back(std::move(c));
  }
  return r;
}

}  // namespace acyl::fredholm
