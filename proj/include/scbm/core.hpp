#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "scbm/error.hpp"

namespace scbm {

/// Opaque, non-empty string identifier, distinct per tag.
template <class Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {
    if (value_.empty()) {
      throw Error(ErrorKind::InvariantError, std::string(Tag::name) + " must be non-empty");
    }
  }

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

 private:
  std::string value_;
};

struct SubjectTag { static constexpr const char* name = "SubjectId"; };
struct DriveTag { static constexpr const char* name = "DriveId"; };
struct ClipTag { static constexpr const char* name = "ClipId"; };
struct SegmentTag { static constexpr const char* name = "SegmentId"; };
struct ScenarioTag { static constexpr const char* name = "ScenarioId"; };

using SubjectId = Id<SubjectTag>;
using DriveId = Id<DriveTag>;
using ClipId = Id<ClipTag>;
using SegmentId = Id<SegmentTag>;
using ScenarioId = Id<ScenarioTag>;

enum class CognitiveLabel { NormalAging, MCI, AD };
enum class BinaryLabel { NormalAging, ADAging };

/// MCI and AD collapse into the AD-aging class.
constexpr BinaryLabel binary_label(CognitiveLabel label) noexcept {
  return label == CognitiveLabel::NormalAging ? BinaryLabel::NormalAging : BinaryLabel::ADAging;
}

std::string_view to_string(CognitiveLabel label) noexcept;
std::string_view to_string(BinaryLabel label) noexcept;
CognitiveLabel parse_cognitive_label(std::string_view text);
BinaryLabel parse_binary_label(std::string_view text);

/// Raw scores of the seven tests entering the composite cognition score.
struct NeuropsychBattery {
  double cowa_words = 0;           // C
  double line_orientation = 0;     // L
  double avlt_recall = 0;          // R
  double benton_errors = 0;        // B, >= 0
  double rey_copy = 0;             // R_cs
  double rey_recall = 0;           // R_rs
  double trails_b_seconds = 0;     // T, > 0

  void validate() const;
};

struct Subject {
  SubjectId id;
  std::optional<CognitiveLabel> label;
  std::optional<NeuropsychBattery> battery;
  std::optional<double> cogstat;
  std::optional<double> moca;

  std::optional<BinaryLabel> binary() const {
    if (!label) return std::nullopt;
    return binary_label(*label);
  }
};

struct RouteSegment {
  SegmentId id;
  ScenarioId scenario;
  double length_m = 0;
  double speed_limit_mph = 0;
  std::string functional_class;

  static constexpr double kMaxLengthM = 500.0;
  void validate() const;
};

enum class ClipStatus { Pure, Blackframe, Missing };
std::string_view to_string(ClipStatus status) noexcept;
ClipStatus parse_clip_status(std::string_view text);

struct ClipRecord {
  SubjectId subject;
  DriveId drive;
  ClipId clip;
  SegmentId segment;
  ScenarioId scenario;
  ClipStatus status = ClipStatus::Pure;
  double duration_min = 0;
  std::string timestamp;
};

struct ClipKey {
  SubjectId subject;
  DriveId drive;
  ClipId clip;
  ScenarioId scenario;
  BinaryLabel label = BinaryLabel::NormalAging;

  friend bool operator==(const ClipKey&, const ClipKey&) = default;
};

/// Row-major float32 matrix of clip embeddings with a parallel key index.
class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }

  /// Appends a row. Rejects a (subject, drive, clip) triple already present,
  /// a wrong-length vector, and non-finite components.
  void add_row(ClipKey key, std::span<const float> values);

  std::span<const float> row(std::size_t i) const;
  const ClipKey& key(std::size_t i) const { return keys_.at(i); }
  const std::vector<ClipKey>& keys() const noexcept { return keys_; }
  std::span<const float> data() const noexcept { return data_; }

  /// Rows whose indices are listed, in the listed order.
  EmbeddingMatrix select(std::span<const std::size_t> indices) const;
  /// Rows belonging to one scenario, in stored order.
  EmbeddingMatrix scenario_subset(const ScenarioId& scenario) const;
  /// Distinct scenarios in order of first appearance.
  std::vector<ScenarioId> scenarios() const;

  friend bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b);

 private:
  std::size_t dim_;
  std::vector<ClipKey> keys_;
  std::vector<float> data_;
  std::unordered_set<std::string> seen_;
};

std::string clip_triple(const SubjectId& s, const DriveId& d, const ClipId& c);

}  // namespace scbm

template <class Tag>
struct std::hash<scbm::Id<Tag>> {
  std::size_t operator()(const scbm::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
