#include "drape/config.hpp"

#include <initializer_list>

#include "json_io.hpp"

namespace drape {

namespace detail {

namespace {

void rejectUnknown(const Json& j, std::initializer_list<const char*> known, const char* what) {
  if (!j.is_object()) throw Error(std::string(what) + " config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw Error(std::string("unknown ") + what + " config key '" + key + "'");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

Json toJsonValue(const NetConfig& c) {
  return Json{{"hypothesis_count", c.hypothesisCount},
              {"embedding_widths", c.embeddingWidths},
              {"fusion_hidden", c.fusionHidden},
              {"init_std", c.initStd},
              {"seed", c.seed}};
}

Json toJsonValue(const LossWeights& w) {
  return Json{{"mask", w.mask},           {"normal", w.normal},   {"edge", w.edge},
              {"face", w.face},           {"angle", w.angle},     {"collision", w.collision},
              {"epsilon", w.epsilon},     {"collision_radius", w.collisionRadius}};
}

Json toJsonValue(const TrainConfig& c) {
  return Json{{"epochs", c.epochs},
              {"batch_size", c.batchSize},
              {"lr", c.lr},
              {"weights", toJsonValue(c.weights)},
              {"seed", c.seed},
              {"precision", std::string(toString(c.precision))},
              {"optimize_blend_weights", c.optimizeBlendWeights},
              {"sharpness", c.sharpness}};
}

Json toJsonValue(const SynthConfig& c) {
  return Json{{"frames", c.frames},
              {"pose_amplitude", c.poseAmplitude},
              {"wrinkle_amplitude", c.wrinkleAmplitude},
              {"seed", c.seed},
              {"image_size", c.imageSize},
              {"sharpness", c.sharpness},
              {"train_fraction", c.trainFraction}};
}

void fromJsonValue(const Json& j, NetConfig& c) {
  rejectUnknown(j, {"hypothesis_count", "embedding_widths", "fusion_hidden", "init_std", "seed"}, "network");
  read(j, "hypothesis_count", c.hypothesisCount);
  read(j, "embedding_widths", c.embeddingWidths);
  read(j, "fusion_hidden", c.fusionHidden);
  read(j, "init_std", c.initStd);
  read(j, "seed", c.seed);
  c.validate();
}

void fromJsonValue(const Json& j, LossWeights& w) {
  rejectUnknown(j, {"mask", "normal", "edge", "face", "angle", "collision", "epsilon", "collision_radius"},
                "loss weight");
  read(j, "mask", w.mask);
  read(j, "normal", w.normal);
  read(j, "edge", w.edge);
  read(j, "face", w.face);
  read(j, "angle", w.angle);
  read(j, "collision", w.collision);
  read(j, "epsilon", w.epsilon);
  read(j, "collision_radius", w.collisionRadius);
  w.validate();
}

void fromJsonValue(const Json& j, TrainConfig& c) {
  rejectUnknown(j, {"epochs", "batch_size", "lr", "weights", "seed", "precision", "optimize_blend_weights", "sharpness"},
                "train");
  read(j, "epochs", c.epochs);
  read(j, "batch_size", c.batchSize);
  read(j, "lr", c.lr);
  if (j.contains("weights")) fromJsonValue(j.at("weights"), c.weights);
  read(j, "seed", c.seed);
  if (j.contains("precision")) {
    std::string p;
    read(j, "precision", p);
    c.precision = parsePrecision(p);
  }
  read(j, "optimize_blend_weights", c.optimizeBlendWeights);
  read(j, "sharpness", c.sharpness);
  c.validate();
}

void fromJsonValue(const Json& j, SynthConfig& c) {
  rejectUnknown(j, {"frames", "pose_amplitude", "wrinkle_amplitude", "seed", "image_size", "sharpness", "train_fraction"},
                "synth");
  read(j, "frames", c.frames);
  read(j, "pose_amplitude", c.poseAmplitude);
  read(j, "wrinkle_amplitude", c.wrinkleAmplitude);
  read(j, "seed", c.seed);
  read(j, "image_size", c.imageSize);
  read(j, "sharpness", c.sharpness);
  read(j, "train_fraction", c.trainFraction);
  c.validate();
}

}  // namespace detail

namespace {

template <typename T>
T parse(std::string_view text) {
  detail::Json j;
  try {
    j = detail::Json::parse(text);
  } catch (const detail::Json::exception& e) {
    throw Error(std::string("invalid JSON: ") + e.what());
  }
  T out;
  detail::fromJsonValue(j, out);
  return out;
}

}  // namespace

std::string toJson(const NetConfig& c) { return detail::toJsonValue(c).dump(); }
std::string toJson(const LossWeights& w) { return detail::toJsonValue(w).dump(); }
std::string toJson(const TrainConfig& c) { return detail::toJsonValue(c).dump(); }
std::string toJson(const SynthConfig& c) { return detail::toJsonValue(c).dump(); }

NetConfig netConfigFromJson(std::string_view text) { return parse<NetConfig>(text); }
LossWeights lossWeightsFromJson(std::string_view text) { return parse<LossWeights>(text); }
TrainConfig trainConfigFromJson(std::string_view text) { return parse<TrainConfig>(text); }
SynthConfig synthConfigFromJson(std::string_view text) { return parse<SynthConfig>(text); }

}  // namespace drape
