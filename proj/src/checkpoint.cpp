#include "bourne/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "bourne/errors.hpp"

namespace bourne {

namespace {

constexpr char kMagic[8] = {'B', 'O', 'U', 'R', 'N', 'E', 'C', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void write_matrix(std::ofstream& out, const Matrix& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(float)));
}

Matrix read_matrix(std::ifstream& in, Eigen::Index rows, Eigen::Index cols,
                   const std::string& what) {
  Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
  if (!in) throw InvalidInput("checkpoint truncated while reading " + what);
  return m;
}

}  // namespace

OptimizerSnapshot snapshot(const Adam& adam) {
  return {adam.step_count(), adam.first_moments(), adam.second_moments()};
}

void save_checkpoint(const std::filesystem::path& path,
                     const std::vector<const Parameter*>& parameters, std::int64_t step,
                     float tau, const nlohmann::json& extra,
                     const std::optional<OptimizerSnapshot>& optimizer) {
  if (optimizer && (optimizer->first_moments.size() != parameters.size() ||
                    optimizer->second_moments.size() != parameters.size())) {
    throw InvalidInput("optimizer snapshot does not match parameter list");
  }
  nlohmann::json header;
  header["format"] = "bourne-checkpoint";
  header["version"] = 1;
  header["step"] = step;
  header["tau"] = tau;
  header["optimizer_state"] = optimizer.has_value();
  header["extra"] = extra;
  auto& list = header["parameters"] = nlohmann::json::array();
  for (const auto* p : parameters) {
    list.push_back({{"name", p->name},
                    {"shape", {p->value.rows(), p->value.cols()}},
                    {"dtype", "float32"}});
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput(fmt::format("cannot write checkpoint '{}'", path.string()));
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t length = text.size();
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* p : parameters) write_matrix(out, p->value);
  if (optimizer) {
    for (const auto& m : optimizer->first_moments) write_matrix(out, m);
    for (const auto& v : optimizer->second_moments) write_matrix(out, v);
  }
  if (!out) throw InvalidInput(fmt::format("failed writing checkpoint '{}'", path.string()));
}

CheckpointData load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput(fmt::format("cannot open checkpoint '{}'", path.string()));
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw InvalidInput(fmt::format("'{}' is not a checkpoint", path.string()));
  }
  std::uint64_t length = 0;
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  if (!in || length > (1u << 30)) throw InvalidInput("checkpoint header length is corrupt");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw InvalidInput("checkpoint header truncated");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(fmt::format("checkpoint header is not JSON: {}", e.what()));
  }

  CheckpointData data;
  try {
    data.step = header.at("step").get<std::int64_t>();
    data.tau = header.at("tau").get<float>();
    data.extra = header.value("extra", nlohmann::json::object());
    std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes;
    for (const auto& entry : header.at("parameters")) {
      if (entry.at("dtype") != "float32") throw InvalidInput("unsupported checkpoint dtype");
      const auto rows = entry.at("shape").at(0).get<Eigen::Index>();
      const auto cols = entry.at("shape").at(1).get<Eigen::Index>();
      if (rows < 0 || cols < 0) throw InvalidInput("negative checkpoint shape");
      shapes.emplace_back(rows, cols);
      const auto name = entry.at("name").get<std::string>();
      data.parameters.emplace_back(name, read_matrix(in, rows, cols, name));
    }
    if (header.at("optimizer_state").get<bool>()) {
      OptimizerSnapshot opt;
      opt.step = data.step;
      for (const auto& [r, c] : shapes) opt.first_moments.push_back(read_matrix(in, r, c, "moments"));
      for (const auto& [r, c] : shapes) opt.second_moments.push_back(read_matrix(in, r, c, "moments"));
      data.optimizer = std::move(opt);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(fmt::format("malformed checkpoint header: {}", e.what()));
  }
  return data;
}

}  // namespace bourne
