#pragma once

#include <random>

#include "cemdc/assembly.hpp"
#include "cemdc/grid.hpp"
#include "cemdc/media.hpp"

namespace cemdc::testing {

inline MediaField constant_media(const GridHierarchy& hier, double kappa = 1.0, double cap = 1.0,
                                 double rho = 1.0, double sigma = 0.0) {
  return MediaField(hier.n_fine(), hier.n_fine(), {kappa, kappa}, {cap, cap}, rho, sigma);
}

/// A small deterministic two-channel layout for desk problems.
inline MediaField desk_channel_media(const GridHierarchy& hier, double contrast, double sigma = 1.0) {
  ChannelSpec spec;
  Channel a;
  a.continuum = 0;
  a.segments.push_back({0.05, 0.30, 0.95, 0.34});
  spec.channels.push_back(a);
  Channel b;
  b.continuum = 1;
  b.segments.push_back({0.05, 0.62, 0.95, 0.66});
  spec.channels.push_back(b);
  return generate_channelized(hier, spec, contrast, Physics{1.0, sigma, {1.0, 1.0}});
}

inline Eigen::VectorXd random_vector(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

inline double sym_error(const Eigen::SparseMatrix<double>& m) {
  Eigen::SparseMatrix<double> d = Eigen::SparseMatrix<double>(m.transpose()) - m;
  double num = 0.0, den = 0.0;
  for (int o = 0; o < d.outerSize(); ++o)
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, o); it; ++it)
      num = std::max(num, std::abs(it.value()));
  for (int o = 0; o < m.outerSize(); ++o)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, o); it; ++it)
      den = std::max(den, std::abs(it.value()));
  return den > 0 ? num / den : num;
}

}  // namespace cemdc::testing
