#include <nlohmann/json.hpp>

#include "fpt/calibration.hpp"
#include "fpt/container.hpp"
#include "fpt/error.hpp"
#include "fpt/trainer.hpp"

namespace fpt {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "fpt-checkpoint-1";

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const TrainState& state,
                     const std::string& config_hash) {
  std::filesystem::create_directories(dir);
  const auto params = state.model.parameters();
  TensorMatrix flat(static_cast<Eigen::Index>(state.model.parameter_count()), 1);
  json layout = json::array();
  Eigen::Index offset = 0;
  for (const auto& [name, p] : params) {
    for (Eigen::Index i = 0; i < p->size(); ++i) flat(offset + i, 0) = p->data()[i];
    layout.push_back({{"name", name}, {"rows", p->rows()}, {"cols", p->cols()}, {"offset", offset}});
    offset += p->size();
  }
  write_tensor(dir / "checkpoint.fpt", flat);

  json manifest = {
      {"format", kFormat},
      {"step", state.step},
      {"seed", state.seed},
      {"lr", state.lr},
      {"tau", state.tau},
      {"weights",
       {{"spatial", state.weights.spatial},
        {"temporal", state.weights.temporal},
        {"cross", state.weights.cross},
        {"d2s", state.weights.d2s}}},
      {"config_hash", config_hash},
      {"tensors", layout},
  };
  write_text_file(dir / "checkpoint.json", manifest.dump(2) + "\n");
}

TrainState load_checkpoint(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_text_file(dir / "checkpoint.json"));
  } catch (const json::exception& e) {
    throw FormatError("checkpoint manifest: " + std::string(e.what()));
  }
  const TensorMatrix flat = read_tensor(dir / "checkpoint.fpt");
  try {
    if (manifest.at("format").get<std::string>() != kFormat)
      throw FormatError("checkpoint manifest: unsupported format");
    TrainState state;
    state.step = manifest.at("step").get<std::uint64_t>();
    state.seed = manifest.at("seed").get<std::uint64_t>();
    state.lr = manifest.at("lr").get<double>();
    state.tau = manifest.at("tau").get<double>();
    const json& w = manifest.at("weights");
    state.weights = {w.at("spatial").get<double>(), w.at("temporal").get<double>(),
                     w.at("cross").get<double>(), w.at("d2s").get<double>()};

    auto params = state.model.parameters();
    const json& tensors = manifest.at("tensors");
    if (tensors.size() != params.size() || flat.cols() != 1)
      throw FormatError("checkpoint: tensor layout does not match the model");
    Eigen::Index offset = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const json& t = tensors[i];
      if (t.at("name").get<std::string>() != params[i].first ||
          t.at("offset").get<Eigen::Index>() != offset)
        throw FormatError("checkpoint: unexpected tensor " + t.at("name").get<std::string>());
      const auto rows = t.at("rows").get<Eigen::Index>();
      const auto cols = t.at("cols").get<Eigen::Index>();
      if (rows < 0 || cols < 0 || offset + rows * cols > flat.rows())
        throw FormatError("checkpoint: tensor " + params[i].first + " exceeds the payload");
      RowMatrixXd& p = *params[i].second;
      p.resize(rows, cols);
      for (Eigen::Index k = 0; k < p.size(); ++k) p.data()[k] = flat(offset + k, 0);
      offset += p.size();
    }
    if (offset != flat.rows()) throw FormatError("checkpoint: payload has unused values");
    return state;
  } catch (const json::exception& e) {
    throw FormatError("checkpoint manifest: " + std::string(e.what()));
  }
}

}  // namespace fpt
