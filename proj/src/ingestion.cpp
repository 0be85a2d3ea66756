#include "scbm/ingestion.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "scbm/csv.hpp"

namespace scbm {

namespace {

const std::vector<std::string> kSegmentColumns = {"segment_id", "scenario", "length_m",
                                                  "speed_limit_mph", "functional_class"};
const std::vector<std::string> kTripColumns = {"subject_id", "drive_id", "segment_id", "timestamp"};
const std::vector<std::string> kClipColumns = {"subject_id", "drive_id",     "clip_id",  "segment_id",
                                               "status",     "duration_min", "timestamp"};
const std::vector<std::string> kSubjectColumns = {"subject_id", "label", "cogstat", "moca", "C", "L",
                                                  "R",          "B",     "R_cs",    "R_rs", "T"};

template <class IdT>
IdT make_id(const std::string& text, const CsvDocument& doc, const CsvRow& row, std::string_view col) {
  if (text.empty()) throw ParseError(doc.file, row.line, fmt::format("column {} is empty", col));
  return IdT(text);
}

}  // namespace

void SegmentCatalog::add(RouteSegment segment) {
  segment.validate();
  if (index_.contains(segment.id)) {
    throw Error(ErrorKind::DuplicateId, "duplicate segment id " + segment.id.str());
  }
  if (!has_scenario(segment.scenario)) scenarios_.push_back(segment.scenario);
  index_.emplace(segment.id, segments_.size());
  segments_.push_back(std::move(segment));
}

const RouteSegment* SegmentCatalog::find(const SegmentId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &segments_[it->second];
}

const RouteSegment& SegmentCatalog::at(const SegmentId& id) const {
  if (const auto* s = find(id)) return *s;
  throw Error(ErrorKind::UnknownSegment, "unknown segment " + id.str());
}

bool SegmentCatalog::has_scenario(const ScenarioId& scenario) const {
  return std::find(scenarios_.begin(), scenarios_.end(), scenario) != scenarios_.end();
}

std::size_t SegmentCatalog::count(const ScenarioId& scenario) const {
  std::size_t n = 0;
  for (const auto& s : segments_) n += (s.scenario == scenario);
  return n;
}

void SubjectRegistry::add(Subject subject) {
  if (index_.contains(subject.id)) {
    throw Error(ErrorKind::DuplicateId, "duplicate subject id " + subject.id.str());
  }
  index_.emplace(subject.id, subjects_.size());
  subjects_.push_back(std::move(subject));
}

const Subject* SubjectRegistry::find(const SubjectId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &subjects_[it->second];
}

const Subject& SubjectRegistry::at(const SubjectId& id) const {
  if (const auto* s = find(id)) return *s;
  throw Error(ErrorKind::UnknownSubject, "unknown subject " + id.str());
}

SegmentCatalog load_segments(const std::filesystem::path& path) {
  const auto doc = read_csv(path, kSegmentColumns);
  SegmentCatalog catalog;
  for (const auto& row : doc.rows) {
    const auto& f = row.fields;
    RouteSegment seg{make_id<SegmentId>(f[0], doc, row, "segment_id"),
                     make_id<ScenarioId>(f[1], doc, row, "scenario"),
                     parse_real(f[2], doc.file, row.line, "length_m"),
                     parse_real(f[3], doc.file, row.line, "speed_limit_mph"), f[4]};
    try {
      catalog.add(std::move(seg));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InvariantError) {
        throw Error(ErrorKind::InvariantError, fmt::format("{}:{}: {}", doc.file, row.line, e.what()));
      }
      throw ParseError(doc.file, row.line, e.what());
    }
  }
  return catalog;
}

SubjectRegistry load_subjects(const std::filesystem::path& path, CogstatOptions options) {
  const auto doc = read_csv(path, kSubjectColumns);
  SubjectRegistry registry;
  for (const auto& row : doc.rows) {
    const auto& f = row.fields;
    Subject s;
    s.id = make_id<SubjectId>(f[0], doc, row, "subject_id");
    if (!f[1].empty()) {
      try {
        s.label = parse_cognitive_label(f[1]);
      } catch (const Error& e) {
        throw ParseError(doc.file, row.line, e.what());
      }
    }
    s.cogstat = parse_optional_real(f[2], doc.file, row.line, "cogstat");
    s.moca = parse_optional_real(f[3], doc.file, row.line, "moca");
    if (s.moca && (*s.moca < 0 || *s.moca > 30)) {
      throw ParseError(doc.file, row.line, "moca must be within [0, 30]");
    }

    std::size_t present = 0;
    for (std::size_t i = 4; i < 11; ++i) present += !f[i].empty();
    if (present != 0 && present != 7) {
      throw ParseError(doc.file, row.line, "battery columns must be all present or all blank");
    }
    if (present == 7) {
      NeuropsychBattery b;
      b.cowa_words = parse_real(f[4], doc.file, row.line, "C");
      b.line_orientation = parse_real(f[5], doc.file, row.line, "L");
      b.avlt_recall = parse_real(f[6], doc.file, row.line, "R");
      b.benton_errors = parse_real(f[7], doc.file, row.line, "B");
      b.rey_copy = parse_real(f[8], doc.file, row.line, "R_cs");
      b.rey_recall = parse_real(f[9], doc.file, row.line, "R_rs");
      b.trails_b_seconds = parse_real(f[10], doc.file, row.line, "T");
      double expected = 0;
      try {
        expected = compute_cogstat(b, options);
      } catch (const Error& e) {
        throw ParseError(doc.file, row.line, e.what());
      }
      if (s.cogstat && std::abs(*s.cogstat - expected) > 1e-9) {
        throw ParseError(doc.file, row.line,
                         fmt::format("cogstat {} disagrees with battery composite {}", *s.cogstat, expected));
      }
      s.cogstat = expected;
      s.battery = b;
    }
    try {
      registry.add(std::move(s));
    } catch (const Error& e) {
      throw ParseError(doc.file, row.line, e.what());
    }
  }
  return registry;
}

std::vector<TripRecord> load_trips(const std::filesystem::path& path, const SegmentCatalog& segments,
                                   const SubjectRegistry& subjects) {
  const auto doc = read_csv(path, kTripColumns);
  std::vector<TripRecord> trips;
  trips.reserve(doc.rows.size());
  for (const auto& row : doc.rows) {
    const auto& f = row.fields;
    TripRecord t{make_id<SubjectId>(f[0], doc, row, "subject_id"),
                 make_id<DriveId>(f[1], doc, row, "drive_id"),
                 make_id<SegmentId>(f[2], doc, row, "segment_id"), f[3]};
    if (!subjects.find(t.subject)) {
      throw Error(ErrorKind::UnknownSubject,
                  fmt::format("{}:{}: unknown subject {}", doc.file, row.line, t.subject.str()));
    }
    if (!segments.find(t.segment)) {
      throw Error(ErrorKind::UnknownSegment,
                  fmt::format("{}:{}: unknown segment {}", doc.file, row.line, t.segment.str()));
    }
    trips.push_back(std::move(t));
  }
  return trips;
}

std::vector<ClipRecord> load_clips(const std::filesystem::path& path, const SegmentCatalog& segments,
                                   const SubjectRegistry& subjects) {
  const auto doc = read_csv(path, kClipColumns);
  std::vector<ClipRecord> clips;
  clips.reserve(doc.rows.size());
  std::unordered_set<std::string> seen;
  for (const auto& row : doc.rows) {
    const auto& f = row.fields;
    ClipRecord c;
    c.subject = make_id<SubjectId>(f[0], doc, row, "subject_id");
    c.drive = make_id<DriveId>(f[1], doc, row, "drive_id");
    c.clip = make_id<ClipId>(f[2], doc, row, "clip_id");
    c.segment = make_id<SegmentId>(f[3], doc, row, "segment_id");
    try {
      c.status = parse_clip_status(f[4]);
    } catch (const Error& e) {
      throw ParseError(doc.file, row.line, e.what());
    }
    c.duration_min = parse_real(f[5], doc.file, row.line, "duration_min");
    if (c.duration_min < 0) throw ParseError(doc.file, row.line, "duration_min must be >= 0");
    c.timestamp = f[6];

    if (!subjects.find(c.subject)) {
      throw Error(ErrorKind::UnknownSubject,
                  fmt::format("{}:{}: unknown subject {}", doc.file, row.line, c.subject.str()));
    }
    const auto* seg = segments.find(c.segment);
    if (!seg) {
      throw Error(ErrorKind::UnknownSegment,
                  fmt::format("{}:{}: unknown segment {}", doc.file, row.line, c.segment.str()));
    }
    c.scenario = seg->scenario;
    if (!seen.insert(clip_triple(c.subject, c.drive, c.clip)).second) {
      throw ParseError(doc.file, row.line, "duplicate (subject_id, drive_id, clip_id)");
    }
    clips.push_back(std::move(c));
  }
  return clips;
}

DurationBreakdown duration_breakdown(std::span<const ClipRecord> clips) {
  DurationBreakdown d;
  for (const auto& c : clips) {
    switch (c.status) {
      case ClipStatus::Pure: d.pure_min += c.duration_min; break;
      case ClipStatus::Blackframe: d.blackframe_min += c.duration_min; break;
      case ClipStatus::Missing: d.missing_min += c.duration_min; break;
    }
  }
  d.total_min = d.pure_min + d.blackframe_min + d.missing_min;
  if (d.total_min > 0) {
    d.pure_fraction = d.pure_min / d.total_min;
    d.blackframe_fraction = d.blackframe_min / d.total_min;
    d.missing_fraction = d.missing_min / d.total_min;
  }
  return d;
}

std::vector<ClipRecord> filter_scenario_samples(std::span<const ClipRecord> clips,
                                                const SegmentCatalog& segments,
                                                const ScenarioId& scenario, StatusSet include) {
  if (!segments.has_scenario(scenario)) {
    throw Error(ErrorKind::UnknownScenario, "unknown scenario " + scenario.str());
  }
  std::vector<ClipRecord> out;
  for (const auto& c : clips) {
    if (c.scenario == scenario && include.contains(c.status)) out.push_back(c);
  }
  return out;
}

std::vector<ScenarioExposure> exposure_stats(std::span<const TripRecord> trips,
                                             const SubjectRegistry& subjects,
                                             const SegmentCatalog& segments) {
  const auto& scenarios = segments.scenarios();
  std::vector<ScenarioExposure> out(scenarios.size());
  std::unordered_map<ScenarioId, std::size_t> slot;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    out[i].scenario = scenarios[i];
    slot.emplace(scenarios[i], i);
  }

  std::unordered_set<std::string> pairs;
  std::vector<std::unordered_set<SubjectId>> active(scenarios.size());
  for (const auto& t : trips) {
    const auto& subject = subjects.at(t.subject);
    if (!subject.label) {
      throw Error(ErrorKind::UnlabeledSubject, "subject " + t.subject.str() + " has no label");
    }
    auto& e = out[slot.at(segments.at(t.segment).scenario)];
    ++e.total_trips;
    active[slot.at(e.scenario)].insert(t.subject);
    if (!pairs.insert(t.subject.str() + '\x1f' + t.segment.str()).second) continue;
    switch (*subject.label) {
      case CognitiveLabel::NormalAging: ++e.normal_unique; break;
      case CognitiveLabel::MCI: ++e.mci_unique; break;
      case CognitiveLabel::AD: ++e.ad_unique; break;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& e = out[i];
    e.total_unique = e.normal_unique + e.mci_unique + e.ad_unique;
    e.active_subjects = active[i].size();
    if (e.total_unique > 0) e.avg_trips = static_cast<double>(e.total_trips) / e.total_unique;
    if (e.active_subjects > 0) {
      e.trips_per_active_subject = static_cast<double>(e.total_trips) / e.active_subjects;
    }
  }
  return out;
}

std::unordered_map<SubjectId, double> coverage_fractions(const SubjectRegistry& subjects,
                                                         std::span<const TripRecord> trips,
                                                         const SegmentCatalog& segments) {
  std::unordered_map<SubjectId, std::set<SegmentId>> driven;
  for (const auto& t : trips) driven[t.subject].insert(t.segment);
  std::unordered_map<SubjectId, double> out;
  for (const auto& s : subjects.subjects()) {
    auto it = driven.find(s.id);
    const double n = it == driven.end() ? 0.0 : static_cast<double>(it->second.size());
    out[s.id] = segments.size() == 0 ? 0.0 : n / static_cast<double>(segments.size());
  }
  return out;
}

std::vector<SubjectId> coverage_gate(const SubjectRegistry& subjects,
                                     std::span<const TripRecord> trips,
                                     const SegmentCatalog& segments, double min_fraction) {
  if (!(min_fraction >= 0.0 && min_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "min_fraction must be within [0, 1]");
  }
  const auto fractions = coverage_fractions(subjects, trips, segments);
  std::vector<SubjectId> kept;
  for (const auto& s : subjects.subjects()) {
    if (fractions.at(s.id) >= min_fraction) kept.push_back(s.id);
  }
  return kept;
}

}  // namespace scbm
