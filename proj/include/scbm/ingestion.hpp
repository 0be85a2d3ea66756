#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <vector>

#include "scbm/cogscore.hpp"
#include "scbm/core.hpp"

namespace scbm {

/// Route segments keyed by id, in file order.
class SegmentCatalog {
 public:
  void add(RouteSegment segment);

  const RouteSegment* find(const SegmentId& id) const;
  const RouteSegment& at(const SegmentId& id) const;
  bool has_scenario(const ScenarioId& scenario) const;

  const std::vector<RouteSegment>& segments() const noexcept { return segments_; }
  /// Scenarios in order of first appearance.
  const std::vector<ScenarioId>& scenarios() const noexcept { return scenarios_; }
  std::size_t size() const noexcept { return segments_.size(); }
  std::size_t count(const ScenarioId& scenario) const;

 private:
  std::vector<RouteSegment> segments_;
  std::unordered_map<SegmentId, std::size_t> index_;
  std::vector<ScenarioId> scenarios_;
};

/// Subjects keyed by id, in file order.
class SubjectRegistry {
 public:
  void add(Subject subject);

  const Subject* find(const SubjectId& id) const;
  const Subject& at(const SubjectId& id) const;
  const std::vector<Subject>& subjects() const noexcept { return subjects_; }
  std::size_t size() const noexcept { return subjects_.size(); }

 private:
  std::vector<Subject> subjects_;
  std::unordered_map<SubjectId, std::size_t> index_;
};

struct TripRecord {
  SubjectId subject;
  DriveId drive;
  SegmentId segment;
  std::string timestamp;
};

/// Per-scenario exposure counts. A unique trip is a distinct
/// (subject, segment) pair; total_trips also counts repeated traversals.
struct ScenarioExposure {
  ScenarioId scenario;
  std::uint64_t normal_unique = 0;  // N_u
  std::uint64_t mci_unique = 0;     // M_u
  std::uint64_t ad_unique = 0;      // A_u
  std::uint64_t total_unique = 0;   // T_u
  std::uint64_t total_trips = 0;    // T̄_u
  std::uint64_t active_subjects = 0;
  /// Average traversals per (subject, segment) pair: total_trips / total_unique.
  double avg_trips = 0;
  /// total_trips / active_subjects.
  double trips_per_active_subject = 0;
};

struct DurationBreakdown {
  double total_min = 0;
  double pure_min = 0;
  double blackframe_min = 0;
  double missing_min = 0;
  double pure_fraction = 0;
  double blackframe_fraction = 0;
  double missing_fraction = 0;

  double valid_min() const noexcept { return pure_min + blackframe_min; }
};

/// Small set of clip statuses.
class StatusSet {
 public:
  StatusSet() = default;
  StatusSet(std::initializer_list<ClipStatus> statuses) {
    for (auto s : statuses) insert(s);
  }
  void insert(ClipStatus s) noexcept { bits_ |= bit(s); }
  bool contains(ClipStatus s) const noexcept { return (bits_ & bit(s)) != 0; }

  /// Pure and black-frame footage; missing clips are never valid input.
  static StatusSet valid() { return {ClipStatus::Pure, ClipStatus::Blackframe}; }

 private:
  static unsigned bit(ClipStatus s) noexcept { return 1u << static_cast<unsigned>(s); }
  unsigned bits_ = 0;
};

SegmentCatalog load_segments(const std::filesystem::path& path);
SubjectRegistry load_subjects(const std::filesystem::path& path, CogstatOptions options = {});
std::vector<TripRecord> load_trips(const std::filesystem::path& path, const SegmentCatalog& segments,
                                   const SubjectRegistry& subjects);
/// Clip scenarios are taken from the referenced segment.
std::vector<ClipRecord> load_clips(const std::filesystem::path& path, const SegmentCatalog& segments,
                                   const SubjectRegistry& subjects);

DurationBreakdown duration_breakdown(std::span<const ClipRecord> clips);

std::vector<ClipRecord> filter_scenario_samples(std::span<const ClipRecord> clips,
                                                const SegmentCatalog& segments,
                                                const ScenarioId& scenario,
                                                StatusSet include = StatusSet::valid());

/// One entry per catalog scenario, in catalog order.
std::vector<ScenarioExposure> exposure_stats(std::span<const TripRecord> trips,
                                             const SubjectRegistry& subjects,
                                             const SegmentCatalog& segments);

/// Fraction of catalog segments each registered subject drove at least once.
std::unordered_map<SubjectId, double> coverage_fractions(const SubjectRegistry& subjects,
                                                         std::span<const TripRecord> trips,
                                                         const SegmentCatalog& segments);

/// Subjects (registry order) whose coverage fraction is >= min_fraction.
std::vector<SubjectId> coverage_gate(const SubjectRegistry& subjects,
                                     std::span<const TripRecord> trips,
                                     const SegmentCatalog& segments, double min_fraction);

}  // namespace scbm
