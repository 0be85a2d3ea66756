#include "scbm/core.hpp"

#include <cmath>
#include <cstring>

namespace scbm {

std::string_view to_string(CognitiveLabel label) noexcept {
  switch (label) {
    case CognitiveLabel::NormalAging: return "normal";
    case CognitiveLabel::MCI: return "mci";
    case CognitiveLabel::AD: return "ad";
  }
  return "?";
}

std::string_view to_string(BinaryLabel label) noexcept {
  return label == BinaryLabel::NormalAging ? "normal" : "ad_aging";
}

CognitiveLabel parse_cognitive_label(std::string_view text) {
  if (text == "normal") return CognitiveLabel::NormalAging;
  if (text == "mci") return CognitiveLabel::MCI;
  if (text == "ad") return CognitiveLabel::AD;
  throw Error(ErrorKind::InvalidArgument, "unknown cognitive label '" + std::string(text) + "'");
}

BinaryLabel parse_binary_label(std::string_view text) {
  if (text == "normal") return BinaryLabel::NormalAging;
  if (text == "ad_aging") return BinaryLabel::ADAging;
  throw Error(ErrorKind::InvalidArgument, "unknown binary label '" + std::string(text) + "'");
}

std::string_view to_string(ClipStatus status) noexcept {
  switch (status) {
    case ClipStatus::Pure: return "pure";
    case ClipStatus::Blackframe: return "blackframe";
    case ClipStatus::Missing: return "missing";
  }
  return "?";
}

ClipStatus parse_clip_status(std::string_view text) {
  if (text == "pure") return ClipStatus::Pure;
  if (text == "blackframe") return ClipStatus::Blackframe;
  if (text == "missing") return ClipStatus::Missing;
  throw Error(ErrorKind::InvalidArgument, "unknown clip status '" + std::string(text) + "'");
}

void NeuropsychBattery::validate() const {
  const double all[] = {cowa_words,  line_orientation, avlt_recall,     benton_errors,
                        rey_copy,    rey_recall,       trails_b_seconds};
  for (double v : all) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "battery score is not finite");
  }
  if (benton_errors < 0) throw Error(ErrorKind::InvariantError, "Benton error count must be >= 0");
  if (trails_b_seconds <= 0) throw Error(ErrorKind::InvariantError, "Trail Making B time must be > 0");
}

void RouteSegment::validate() const {
  if (!(length_m > 0) || length_m > kMaxLengthM) {
    throw Error(ErrorKind::InvariantError,
                "segment " + id.str() + ": length_m must be in (0, 500], got " + std::to_string(length_m));
  }
  if (!(speed_limit_mph > 0) || !std::isfinite(speed_limit_mph)) {
    throw Error(ErrorKind::InvariantError, "segment " + id.str() + ": speed_limit_mph must be > 0");
  }
}

std::string clip_triple(const SubjectId& s, const DriveId& d, const ClipId& c) {
  std::string out;
  out.reserve(s.str().size() + d.str().size() + c.str().size() + 2);
  out.append(s.str()).push_back('\x1f');
  out.append(d.str()).push_back('\x1f');
  out.append(c.str());
  return out;
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorKind::InvariantError, "embedding dimension must be positive");
}

void EmbeddingMatrix::add_row(ClipKey key, std::span<const float> values) {
  if (values.size() != dim_) {
    throw Error(ErrorKind::DimMismatch, "row has " + std::to_string(values.size()) +
                                            " components, matrix dim is " + std::to_string(dim_));
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "embedding component is not finite");
  }
  auto triple = clip_triple(key.subject, key.drive, key.clip);
  if (!seen_.insert(triple).second) {
    throw Error(ErrorKind::DuplicateId, "duplicate clip key (" + key.subject.str() + ", " +
                                            key.drive.str() + ", " + key.clip.str() + ")");
  }
  keys_.push_back(std::move(key));
  data_.insert(data_.end(), values.begin(), values.end());
}

std::span<const float> EmbeddingMatrix::row(std::size_t i) const {
  if (i >= rows()) throw Error(ErrorKind::InvalidArgument, "row index out of range");
  return std::span<const float>(data_).subspan(i * dim_, dim_);
}

EmbeddingMatrix EmbeddingMatrix::select(std::span<const std::size_t> indices) const {
  EmbeddingMatrix out(dim_);
  out.keys_.reserve(indices.size());
  out.data_.reserve(indices.size() * dim_);
  for (auto i : indices) out.add_row(key(i), row(i));
  return out;
}

EmbeddingMatrix EmbeddingMatrix::scenario_subset(const ScenarioId& scenario) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rows(); ++i) {
    if (keys_[i].scenario == scenario) idx.push_back(i);
  }
  return select(idx);
}

std::vector<ScenarioId> EmbeddingMatrix::scenarios() const {
  std::vector<ScenarioId> out;
  std::unordered_set<std::string> seen;
  for (const auto& k : keys_) {
    if (seen.insert(k.scenario.str()).second) out.push_back(k.scenario);
  }
  return out;
}

bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  if (a.dim_ != b.dim_ || a.keys_ != b.keys_ || a.data_.size() != b.data_.size()) return false;
  return a.data_.empty() ||
         std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(float)) == 0;
}

}  // namespace scbm
