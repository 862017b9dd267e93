#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "bourne/graph.hpp"
#include "bourne/random.hpp"
#include "bourne/tensor.hpp"

namespace bourne::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

inline AttributedGraph random_graph(std::size_t n, double p, std::size_t d, std::uint64_t seed) {
  auto rng = make_rng({seed, 99});
  std::vector<Edge> pairs;
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      if (bernoulli(rng, p)) pairs.push_back({a, b});
    }
  }
  return build_graph(n, pairs, random_matrix(static_cast<Eigen::Index>(n),
                                             static_cast<Eigen::Index>(d), rng));
}

inline AttributedGraph graph_from(std::size_t n, std::vector<Edge> pairs, std::size_t d = 2) {
  return build_graph(n, pairs, Matrix::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(d)));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("bourne_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace bourne::testing
