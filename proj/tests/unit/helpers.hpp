#pragma once

#include <doctest.h>

#include "ioid/model.hpp"
#include "oracles.hpp"

namespace ioid::testing {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) out(r, c++) = v;
    ++r;
  }
  return out;
}

inline Matrix s(double v) { return Matrix::Constant(1, 1, v); }
inline Vector vs(double v) { return Vector::Constant(1, v); }

/// Scalar model from (F_1..F_n, G_0..G_n).
inline IOModel scalar_model(std::vector<double> F, std::vector<double> G) {
  std::vector<Matrix> Fm;
  std::vector<Matrix> Gm;
  for (double f : F) Fm.push_back(s(f));
  for (double g : G) Gm.push_back(s(g));
  return IOModel(1, 1, Fm, Gm);
}

inline std::vector<Vector> scalar_seq(std::vector<double> v) {
  std::vector<Vector> out;
  for (double x : v) out.push_back(vs(x));
  return out;
}

}  // namespace ioid::testing
