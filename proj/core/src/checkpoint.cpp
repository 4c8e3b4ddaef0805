#include "hyperfit/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace hyperfit::io {

namespace {

using nlohmann::json;

json to_json(const icnn::IcnnParams& p) {
  return json{{"v0_raw", p.v0_raw}, {"b0", p.b0}, {"w1_raw", p.w1_raw},
              {"v1_raw", p.v1_raw}, {"b1", p.b1}};
}

icnn::IcnnParams icnn_from_json(const json& j) {
  icnn::IcnnParams p;
  p.v0_raw = j.at("v0_raw").get<std::vector<double>>();
  p.b0 = j.at("b0").get<std::vector<double>>();
  p.w1_raw = j.at("w1_raw").get<std::vector<double>>();
  p.v1_raw = j.at("v1_raw").get<double>();
  p.b1 = j.at("b1").get<double>();
  if (p.b0.size() != p.v0_raw.size() || p.w1_raw.size() != p.v0_raw.size())
    throw CheckpointError("checkpoint: inconsistent network parameter shapes");
  return p;
}

json to_json(const pnam::AffineScaler& s) { return json{{"m", s.m}, {"M", s.M}}; }

pnam::AffineScaler scaler_from_json(const json& j) {
  return {j.at("m").get<double>(), j.at("M").get<double>()};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
  json j;
  j["format_version"] = cp.version;
  j["model"] = {{"net1", to_json(cp.model.net1)},
                {"net2", to_json(cp.model.net2)},
                {"scaler1", to_json(cp.model.scaler1)},
                {"scaler2", to_json(cp.model.scaler2)},
                {"stress_scale", cp.model.stress_scale}};
  j["train_config"] = {{"learning_rate", cp.config.learning_rate},
                       {"epochs", cp.config.epochs},
                       {"split_fraction", cp.config.split_fraction},
                       {"stress_scale", cp.config.stress_scale},
                       {"seed", cp.config.seed},
                       {"hidden", cp.config.hidden}};
  json hist = json::array();
  for (const auto& h : cp.history) hist.push_back(json{{"train", h.train}, {"validation", h.validation}});
  j["history"] = std::move(hist);
  j["best_epoch"] = cp.best_epoch;

  std::ofstream out(path);
  if (!out) throw CheckpointError("checkpoint: cannot write " + path.string());
  out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CheckpointError("checkpoint: corrupt file " + path.string() + ": " + e.what());
  }
  try {
    Checkpoint cp;
    cp.version = j.at("format_version").get<int>();
    if (cp.version != kCheckpointVersion)
      throw CheckpointError("checkpoint: format version " + std::to_string(cp.version) +
                            " is incompatible with supported version " +
                            std::to_string(kCheckpointVersion));
    const json& m = j.at("model");
    cp.model.net1 = icnn_from_json(m.at("net1"));
    cp.model.net2 = icnn_from_json(m.at("net2"));
    cp.model.scaler1 = scaler_from_json(m.at("scaler1"));
    cp.model.scaler2 = scaler_from_json(m.at("scaler2"));
    cp.model.stress_scale = m.at("stress_scale").get<double>();
    const json& c = j.at("train_config");
    cp.config.learning_rate = c.at("learning_rate").get<double>();
    cp.config.epochs = c.at("epochs").get<int>();
    cp.config.split_fraction = c.at("split_fraction").get<double>();
    cp.config.stress_scale = c.at("stress_scale").get<double>();
    cp.config.seed = c.at("seed").get<std::uint64_t>();
    cp.config.hidden = c.at("hidden").get<int>();
    for (const json& h : j.at("history"))
      cp.history.push_back({h.at("train").get<double>(), h.at("validation").get<double>()});
    cp.best_epoch = j.at("best_epoch").get<int>();
    return cp;
  } catch (const CheckpointError&) {
    throw;
  } catch (const json::exception& e) {
    throw CheckpointError("checkpoint: missing or mistyped field in " + path.string() + ": " + e.what());
  }
}

}  // namespace hyperfit::io
