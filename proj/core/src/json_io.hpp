#pragma once

#include <json.hpp>
#include <string>

#include "drape/loss.hpp"
#include "drape/network.hpp"
#include "drape/synthetic.hpp"
#include "drape/train.hpp"

namespace drape::detail {

using Json = nlohmann::json;

Json toJsonValue(const NetConfig& c);
Json toJsonValue(const LossWeights& w);
Json toJsonValue(const TrainConfig& c);
Json toJsonValue(const SynthConfig& c);

void fromJsonValue(const Json& j, NetConfig& c);
void fromJsonValue(const Json& j, LossWeights& w);
void fromJsonValue(const Json& j, TrainConfig& c);
void fromJsonValue(const Json& j, SynthConfig& c);

}  // namespace drape::detail
