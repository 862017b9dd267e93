#include "bourne/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include <fmt/format.h>
#include <fmt/os.h>

#include "bourne/errors.hpp"
#include "json.hpp"

namespace bourne {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    cells.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput(fmt::format("cannot open {}", path.string()));
  return in;
}

Labels read_labels(const fs::path& path) {
  auto in = open_input(path);
  Labels labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cell = trim(line);
    if (cell.empty()) continue;
    int value = 0;
    if (!parse_number(cell, value)) {
      if (lineno == 1) continue;  // header
      throw InvalidInput(fmt::format("{}:{}: expected 0 or 1", path.string(), lineno));
    }
    if (value != 0 && value != 1) {
      throw InvalidInput(fmt::format("{}:{}: label {} is not 0/1", path.string(), lineno, value));
    }
    labels.push_back(static_cast<std::uint8_t>(value));
  }
  return labels;
}

Matrix read_features(const fs::path& path) {
  auto in = open_input(path);
  std::vector<float> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (rows == 0) cols = cells.size();
    if (cells.size() != cols) {
      throw InvalidInput(fmt::format("{}: row {} has {} columns, expected {}", path.string(),
                                     rows + 1, cells.size(), cols));
    }
    for (auto cell : cells) {
      float v = 0.0f;
      if (!parse_number(cell, v)) {
        throw InvalidInput(fmt::format("{}: row {}: bad number '{}'", path.string(), rows + 1,
                                       std::string(cell)));
      }
      values.push_back(v);
    }
    ++rows;
  }
  Matrix x(rows, cols);
  std::copy(values.begin(), values.end(), x.data());
  return x;
}

std::vector<Edge> read_edges(const fs::path& path) {
  auto in = open_input(path);
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    if (cells.size() != 2 || !parse_number(cells[0], a) || !parse_number(cells[1], b)) {
      if (lineno == 1) continue;  // header
      throw InvalidInput(fmt::format("{}:{}: expected two integer columns", path.string(),
                                     lineno));
    }
    if (a > UINT32_MAX || b > UINT32_MAX) {
      throw InvalidInput(fmt::format("{}:{}: node id too large", path.string(), lineno));
    }
    edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});
  }
  return edges;
}

}  // namespace

LoadResult load_dataset(const fs::path& dir) {
  LoadResult result;
  Matrix features = read_features(dir / "features.csv");
  const auto pairs = read_edges(dir / "edges.csv");
  const auto n = static_cast<std::size_t>(features.rows());

  const auto meta_path = dir / "meta.json";
  if (fs::exists(meta_path)) {
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(open_input(meta_path));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(fmt::format("{}: {}", meta_path.string(), e.what()));
    }
    if (meta.contains("num_nodes") && meta["num_nodes"].get<std::size_t>() != n) {
      throw InvalidInput(fmt::format("meta.json num_nodes={} but features.csv has {} rows",
                                     meta["num_nodes"].get<std::size_t>(), n));
    }
    if (meta.contains("feature_dim") &&
        meta["feature_dim"].get<std::size_t>() != static_cast<std::size_t>(features.cols())) {
      throw InvalidInput("meta.json feature_dim disagrees with features.csv");
    }
    result.graph = build_graph(n, pairs, std::move(features));
    if (meta.contains("num_edges") &&
        meta["num_edges"].get<std::size_t>() != result.graph.num_edges()) {
      result.warnings.push_back(fmt::format(
          "meta.json num_edges={} but {} undirected edges remain after symmetrization",
          meta["num_edges"].get<std::size_t>(), result.graph.num_edges()));
    }
  } else {
    result.graph = build_graph(n, pairs, std::move(features));
  }

  if (fs::exists(dir / "node_labels.csv")) {
    result.graph.set_node_labels(read_labels(dir / "node_labels.csv"));
  }
  if (fs::exists(dir / "edge_labels.csv")) {
    result.graph.set_edge_labels(read_labels(dir / "edge_labels.csv"));
  }
  return result;
}

void save_dataset(const AttributedGraph& graph, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto out = fmt::output_file((dir / "edges.csv").string());
    out.print("src,dst\n");
    for (const auto& e : graph.edges()) out.print("{},{}\n", e.u, e.v);
  }
  {
    auto out = fmt::output_file((dir / "features.csv").string());
    const auto& x = graph.features();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        if (c > 0) out.print(",");
        out.print("{}", x(r, c));
      }
      out.print("\n");
    }
  }
  const auto write_labels = [&](const Labels& labels, const char* name) {
    auto out = fmt::output_file((dir / name).string());
    for (auto l : labels) out.print("{}\n", static_cast<int>(l));
  };
  if (graph.node_labels()) write_labels(*graph.node_labels(), "node_labels.csv");
  if (graph.edge_labels()) write_labels(*graph.edge_labels(), "edge_labels.csv");

  nlohmann::json meta = {{"num_nodes", graph.num_nodes()},
                         {"num_edges", graph.num_edges()},
                         {"feature_dim", graph.feature_dim()}};
  std::ofstream(dir / "meta.json") << meta.dump(2) << "\n";
}

}  // namespace bourne
