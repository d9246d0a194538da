#pragma once

#include <string>
#include <string_view>

#include "drape/loss.hpp"
#include "drape/network.hpp"
#include "drape/synthetic.hpp"
#include "drape/train.hpp"

/// JSON (de)serialization of the configuration structs. Missing keys keep
/// their defaults; unknown keys are rejected.
namespace drape {

std::string toJson(const NetConfig& c);
std::string toJson(const LossWeights& w);
std::string toJson(const TrainConfig& c);
std::string toJson(const SynthConfig& c);

NetConfig netConfigFromJson(std::string_view text);
LossWeights lossWeightsFromJson(std::string_view text);
TrainConfig trainConfigFromJson(std::string_view text);
SynthConfig synthConfigFromJson(std::string_view text);

}  // namespace drape
