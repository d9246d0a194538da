#include "drape/evaluate.hpp"

#include <cstdio>
#include <sstream>

namespace drape {

EvalReport evaluate(const MeshSequence& pred, const MeshSequence& gt, const EvalOptions& options) {
  if (pred.size() != gt.size()) {
    throw Error("evaluate: prediction has " + std::to_string(pred.size()) + " frames, ground truth has " +
                std::to_string(gt.size()));
  }
  if (pred.size() == 0) throw Error("evaluate: empty sequences");
  EvalReport r;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const TriMesh p = pred.frame(i);
    const TriMesh g = gt.frame(i);
    const RigidTransform align = rigidAlign(p, g.vertices, options.seed);
    const double cd = chamferDistance(align.apply(p), g, options.samples, options.seed);
    r.chamfer.push_back(cd);
    sum += cd;
  }
  r.meanChamfer = sum / static_cast<double>(pred.size());
  r.ccv = pred.size() > 1 ? ccv(pred) : 0.0;
  r.gtCcv = gt.size() > 1 ? ccv(gt) : 0.0;
  return r;
}

MeshSequence subsequence(const MeshSequence& seq, std::span<const std::size_t> indices) {
  MeshSequence out;
  out.faces = seq.faces;
  for (const std::size_t i : indices) out.frames.push_back(seq.frames.at(i));
  return out;
}

std::string perFrameCsv(const std::string& sequenceId, std::span<const int> frames, const EvalReport& report) {
  if (frames.size() != report.chamfer.size()) throw Error("per-frame CSV: frame list does not match the report");
  std::ostringstream out;
  out << "sequence_id,frame,CD_cm,CCV_cm\n";
  char buf[256];
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%.6f,%.6f\n", sequenceId.c_str(), frames[i], report.chamfer[i], report.ccv);
    out << buf;
  }
  return out.str();
}

std::string summaryCsv(std::span<const std::pair<std::string, EvalReport>> rows) {
  std::ostringstream out;
  out << "subject,CD_cm,CCV_cm\n";
  char buf[256];
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f\n", name.c_str(), r.meanChamfer, r.ccv);
    out << buf;
  }
  return out.str();
}

}  // namespace drape
