#pragma once

#include <random>

#include "presslens/fem.hpp"

namespace presslens::testing {

inline ScalarField random_p1(const MeshPtr& mesh, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1, 1);
  Vector c(mesh->num_vertices());
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = dist(rng);
  return ScalarField(mesh, c);
}

inline VectorField random_zero_trace(const MeshPtr& mesh, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1, 1);
  const auto n = static_cast<Eigen::Index>(2 * (mesh->num_vertices() + mesh->num_edges()));
  Vector c(n);
  for (Eigen::Index i = 0; i < n; ++i) c[i] = dist(rng);
  return VectorField(mesh, c).with_zero_trace();
}

inline double rel(double err, double scale) { return err / std::max(scale, 1e-300); }

inline double rate(double coarse, double fine, double ratio = 2.0) { return std::log(coarse / fine) / std::log(ratio); }

}  // namespace presslens::testing
