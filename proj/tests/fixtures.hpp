#pragma once

#include <acyl/fredholm.hpp>
#include <acyl/spectral.hpp>

#include <random>
#include <vector>

namespace fixtures {

inline acyl::spectral::IndicialData torus_end(const acyl::spectral::LatticeTorus& L, double cutoff) {
  return acyl::spectral::torus_indicial_data(acyl::spectral::laplace_spectrum_torus(L, cutoff));
}

/// Three end configurations: one square end; square + hexagonal; square,
/// hexagonal and a skew lattice.
inline std::vector<acyl::fredholm::EndSpectrum> end_spectra() {
  using acyl::spectral::LatticeTorus;
  const auto sq = torus_end(LatticeTorus::square2pi(), 30.0);
  const auto hx = torus_end(LatticeTorus::hex_first2(), 30.0);
  const auto sk = torus_end(LatticeTorus({5.1, 0.4}, {1.7, 4.6}), 30.0);
  return {{{sq}, {"square"}}, {{sq, hx}, {"square", "hex"}}, {{sq, hx, sk}, {"square", "hex", "skew"}}};
}

/// Uniform rate inside the computed range, nudged off critical values.
inline acyl::fredholm::RateVector random_rate(const acyl::fredholm::EndSpectrum& E, std::mt19937_64& rng,
                                              double span = 4.0) {
  std::uniform_real_distribution<double> u(-span, span);
  acyl::fredholm::RateVector r(E.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    do r[i] = u(rng);
    while (E.ends[i].dimension_at(r[i], 1e-6) > 0);
  }
  return r;
}

}  // namespace fixtures
