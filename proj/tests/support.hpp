// Shared oracles for the unit tests: brute-force enumeration and explicit
// matrix forms that do not go through the library's index tricks.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

#include <covalign/error.hpp>
#include <covalign/linalg.hpp>
#include <covalign/rng.hpp>

namespace testing {

using covalign::Matrix;
using covalign::Permutation;
using covalign::Rng;
using covalign::SymMatrix;

inline std::vector<Permutation> all_permutations(std::size_t d) {
  std::vector<int> map(d);
  std::iota(map.begin(), map.end(), 0);
  std::vector<Permutation> out;
  do {
    out.emplace_back(map);
  } while (std::next_permutation(map.begin(), map.end()));
  return out;
}

inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> z;
  Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = z(rng);
  return g;
}

inline SymMatrix random_symmetric(std::size_t d, Rng& rng) {
  const Matrix g = gaussian_matrix(d, d, rng);
  return covalign::symmetrize(g + g.transpose());
}

/// G Gᵀ/d + floor·I, comfortably positive definite.
inline SymMatrix random_spd(std::size_t d, Rng& rng, double floor = 0.1) {
  const Matrix g = gaussian_matrix(d, d, rng);
  Matrix a = g * g.transpose() / static_cast<double>(d);
  a.diagonal().array() += floor;
  return covalign::symmetrize(a);
}

/// Σ_ij B_ij M_{π(i)π(j)} through the explicit product P M Pᵀ.
inline double explicit_qap(const SymMatrix& m, const SymMatrix& b, const Permutation& pi) {
  const Matrix p = pi.matrix();
  return (p * m.matrix() * p.transpose()).cwiseProduct(b.matrix()).sum();
}

template <class Fn>
covalign::ErrorKind thrown_kind(Fn&& fn) {
  try {
    fn();
  } catch (const covalign::Error& e) {
    return e.kind();
  }
  throw std::logic_error("expected covalign::Error");
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::uint64_t counter = 0;
  const auto base = std::filesystem::temp_directory_path() /
                    ("covalign-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(base);
  std::filesystem::create_directories(base);
  return base;
}

}  // namespace testing
