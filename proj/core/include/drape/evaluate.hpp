#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drape/metrics.hpp"

namespace drape {

struct EvalOptions {
  int samples = kDefaultChamferSamples;
  std::uint64_t seed = kDefaultSampleSeed;
};

struct EvalReport {
  /// Per frame: Chamfer distance (cm) after rigid alignment onto gt.
  std::vector<double> chamfer;
  double meanChamfer = 0.0;
  /// CCV (cm) of the predicted sequence and of the reference.
  double ccv = 0.0;
  double gtCcv = 0.0;
};

/// Throws if the sequences differ in length.
EvalReport evaluate(const MeshSequence& pred, const MeshSequence& gt, const EvalOptions& options = {});

/// Frames `indices` of `seq`, in the given order.
MeshSequence subsequence(const MeshSequence& seq, std::span<const std::size_t> indices);

/// `sequence_id,frame,CD_cm,CCV_cm`; the CCV column repeats the sequence value.
std::string perFrameCsv(const std::string& sequenceId, std::span<const int> frames, const EvalReport& report);
/// `subject,CD_cm,CCV_cm` header plus one row per entry.
std::string summaryCsv(std::span<const std::pair<std::string, EvalReport>> rows);

}  // namespace drape
