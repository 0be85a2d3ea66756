#include "scbm/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include "scbm/cogscore.hpp"
#include "scbm/csv.hpp"
#include "scbm/random.hpp"

namespace scbm {

namespace {

constexpr double kMetersPerMile = 1609.344;
constexpr double kMetersPerMinutePerMph = kMetersPerMile / 60.0;

// Footage share per status.
constexpr double kPureShare = 0.726;
constexpr double kBlackframeShare = 0.041;

struct GroupModel {
  CognitiveLabel label;
  double ability_mean;
  double moca_mean;
  double moca_sd;
};

// Latent ability in z units per group.
constexpr GroupModel kGroups[] = {
    {CognitiveLabel::NormalAging, 0.8, 26.0, 2.0},
    {CognitiveLabel::MCI, -0.4, 22.0, 3.0},
    {CognitiveLabel::AD, -1.6, 17.0, 4.0},
};
constexpr double kAbilitySd = 0.8;
constexpr double kTestNoiseSd = 0.5;

const GroupModel& group_of(CognitiveLabel label) {
  for (const auto& g : kGroups) {
    if (g.label == label) return g;
  }
  return kGroups[0];
}

double round_to(double v, double step) { return std::round(v / step) * step; }

std::string iso_timestamp(int day_offset, int minute_of_day) {
  using namespace std::chrono;
  const sys_days base = year{2021} / March / 1;
  const year_month_day ymd{base + days{day_offset}};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:00Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), minute_of_day / 60,
                     minute_of_day % 60);
}

double weighted_pick(Rng& rng, const std::vector<double>& values, const std::vector<double>& weights) {
  double total = 0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < values.size(); ++i) {
    u -= weights[i];
    if (u < 0) return values[i];
  }
  return values.back();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

std::uint64_t scaled(std::uint64_t target, double scale) {
  return static_cast<std::uint64_t>(std::llround(static_cast<double>(target) * scale));
}

struct SubjectDraft {
  Subject subject;
  std::size_t group_index = 0;  // index within its three-way group
};

struct TripDraft {
  std::size_t subject = 0;  // index into subjects
  std::size_t segment = 0;  // index into segments
  std::size_t scenario = 0;
};

}  // namespace

CohortSpec CohortSpec::defaults() {
  CohortSpec spec;
  ScenarioTarget fwy;
  fwy.scenario = ScenarioId("fwy-interchange");
  fwy.functional_class = "interchange_ramp";
  fwy.segments = 632;
  fwy.normal_unique = 8136;
  fwy.mci_unique = 10134;
  fwy.ad_unique = 919;
  fwy.total_trips = 68048;
  fwy.speed_limits_mph = {30, 35, 40, 45};
  fwy.speed_weights = {0.2, 0.3, 0.3, 0.2};
  fwy.median_length_mi = 0.12;
  fwy.delta = 4.0;
  fwy.sigma = 1.0;

  ScenarioTarget interstate;
  interstate.scenario = ScenarioId("interstate");
  interstate.functional_class = "interstate";
  interstate.segments = 332;
  interstate.normal_unique = 7123;
  interstate.mci_unique = 7894;
  interstate.ad_unique = 780;
  interstate.total_trips = 69620;
  interstate.speed_limits_mph = {55, 60, 65, 70};
  interstate.speed_weights = {0.3, 0.4, 0.2, 0.1};
  interstate.median_length_mi = 0.20;
  interstate.delta = 1.0;
  interstate.sigma = 1.0;

  spec.scenarios = {fwy, interstate};
  return spec;
}

void CohortSpec::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::SpecInvalid, why); };
  if (n_normal + n_mci + n_ad < 2) fail("cohort needs at least 2 subjects");
  if (n_normal == 0 || n_mci + n_ad == 0) fail("cohort needs both Normal-aging and AD-aging subjects");
  if (!(trip_scale >= 0) || !std::isfinite(trip_scale)) fail("trip_scale must be >= 0");
  std::set<ScenarioId> names;
  for (const auto& s : scenarios) {
    if (!names.insert(s.scenario).second) fail("duplicate scenario " + s.scenario.str());
    if (s.segments == 0) fail("scenario " + s.scenario.str() + " needs segments");
    if (s.speed_limits_mph.empty() || s.speed_limits_mph.size() != s.speed_weights.size()) {
      fail("scenario " + s.scenario.str() + " speed-limit support and weights differ");
    }
    if (!(s.median_length_mi > 0)) fail("median_length_mi must be positive");
    if (!(s.delta >= 0) || !(s.sigma > 0)) fail("scenario " + s.scenario.str() + " needs delta >= 0, sigma > 0");
    const std::pair<std::uint64_t, std::size_t> groups[] = {
        {scaled(s.normal_unique, trip_scale), n_normal},
        {scaled(s.mci_unique, trip_scale), n_mci},
        {scaled(s.ad_unique, trip_scale), n_ad}};
    std::uint64_t unique = 0;
    for (auto [target, members] : groups) {
      if (target > static_cast<std::uint64_t>(members) * s.segments) {
        fail(fmt::format("scenario {}: {} unique trips exceed {} subjects x {} segments", s.scenario.str(), target,
                         members, s.segments));
      }
      unique += target;
    }
    if (scaled(s.total_trips, trip_scale) < unique) {
      fail("scenario " + s.scenario.str() + ": total trips below unique trips");
    }
  }
}

CohortFiles generate_cohort(const CohortSpec& spec) {
  spec.validate();
  CohortFiles files;
  Rng rng(derive_seed(spec.seed, 0x5eed));

  // Subjects: labels dealt to shuffled ids.
  std::vector<CognitiveLabel> deal;
  deal.insert(deal.end(), spec.n_normal, CognitiveLabel::NormalAging);
  deal.insert(deal.end(), spec.n_mci, CognitiveLabel::MCI);
  deal.insert(deal.end(), spec.n_ad, CognitiveLabel::AD);
  rng.shuffle(deal.begin(), deal.end());

  std::vector<SubjectDraft> subjects;
  std::map<CognitiveLabel, std::vector<std::size_t>> members;
  std::map<CognitiveLabel, std::vector<double>> cogstats;
  for (std::size_t i = 0; i < deal.size(); ++i) {
    const auto& g = group_of(deal[i]);
    const double ability = rng.normal(g.ability_mean, kAbilitySd);
    auto test_z = [&] { return ability + rng.normal(0, kTestNoiseSd); };

    NeuropsychBattery b;
    b.cowa_words = std::max(0.0, round_to(38.7 + 11.1 * test_z(), 0.1));
    b.line_orientation = std::max(0.0, round_to(26.2 + 3.5 * test_z(), 0.1));
    b.avlt_recall = std::max(0.0, round_to(10.08 + 3.2 * test_z(), 0.1));
    b.benton_errors = std::max(0.0, std::round(4.4 - 2.4 * test_z()));
    b.rey_copy = std::max(0.0, round_to(31.0 + 3.7 * test_z(), 0.1));
    b.rey_recall = std::max(0.0, round_to(15.7 + 5.7 * test_z(), 0.1));
    b.trails_b_seconds = std::max(10.0, std::round(46.1 - 32.6 * test_z()));

    SubjectDraft d;
    d.subject.id = SubjectId(fmt::format("S{:03d}", i + 1));
    d.subject.label = deal[i];
    d.subject.battery = b;
    d.subject.cogstat = compute_cogstat(b);
    d.subject.moca = std::clamp(std::round(rng.normal(g.moca_mean, g.moca_sd)), 0.0, 30.0);
    d.group_index = members[deal[i]].size();
    members[deal[i]].push_back(i);
    cogstats[deal[i]].push_back(*d.subject.cogstat);
    subjects.push_back(std::move(d));
  }

  // Segments.
  std::vector<RouteSegment> segments;
  std::vector<std::vector<std::size_t>> scenario_segments(spec.scenarios.size());
  for (std::size_t s = 0; s < spec.scenarios.size(); ++s) {
    const auto& target = spec.scenarios[s];
    for (std::size_t k = 0; k < target.segments; ++k) {
      RouteSegment seg;
      seg.id = SegmentId(fmt::format("{}-{:04d}", target.scenario.str(), k + 1));
      seg.scenario = target.scenario;
      const double miles = target.median_length_mi * std::exp(0.35 * rng.normal());
      seg.length_m = std::clamp(std::round(miles * kMetersPerMile * 10) / 10, 20.0, RouteSegment::kMaxLengthM);
      seg.speed_limit_mph = weighted_pick(rng, target.speed_limits_mph, target.speed_weights);
      seg.functional_class = target.functional_class;
      scenario_segments[s].push_back(segments.size());
      segments.push_back(std::move(seg));
    }
  }

  // Trips: exact unique-pair targets per group, then repeats on random pairs.
  std::vector<TripDraft> trips;
  auto& ledger = files.ledger;
  ledger["seed"] = spec.seed;
  ledger["cohort"] = {{"n_normal", spec.n_normal}, {"n_mci", spec.n_mci}, {"n_ad", spec.n_ad},
                      {"clips_per_subject", spec.clips_per_subject}, {"trip_scale", spec.trip_scale}};
  ledger["scenarios"] = nlohmann::ordered_json::array();

  for (std::size_t s = 0; s < spec.scenarios.size(); ++s) {
    const auto& target = spec.scenarios[s];
    const auto& segs = scenario_segments[s];
    std::vector<TripDraft> unique_pairs;
    const std::pair<CognitiveLabel, std::uint64_t> groups[] = {
        {CognitiveLabel::NormalAging, scaled(target.normal_unique, spec.trip_scale)},
        {CognitiveLabel::MCI, scaled(target.mci_unique, spec.trip_scale)},
        {CognitiveLabel::AD, scaled(target.ad_unique, spec.trip_scale)}};
    for (auto [label, count] : groups) {
      const auto& who = members[label];
      const std::uint64_t space = static_cast<std::uint64_t>(who.size()) * segs.size();
      std::vector<std::uint64_t> cells(space);
      for (std::uint64_t c = 0; c < space; ++c) cells[c] = c;
      for (std::uint64_t c = 0; c < count; ++c) std::swap(cells[c], cells[c + rng.index(space - c)]);
      cells.resize(count);
      std::sort(cells.begin(), cells.end());
      for (auto c : cells) unique_pairs.push_back({who[c / segs.size()], segs[c % segs.size()], s});
    }
    const auto total = scaled(target.total_trips, spec.trip_scale);
    const auto unique = static_cast<std::uint64_t>(unique_pairs.size());
    trips.insert(trips.end(), unique_pairs.begin(), unique_pairs.end());
    for (std::uint64_t r = unique; r < total && !unique_pairs.empty(); ++r) {
      trips.push_back(unique_pairs[rng.index(unique_pairs.size())]);
    }

    nlohmann::ordered_json entry;
    entry["scenario"] = target.scenario.str();
    entry["segments"] = target.segments;
    entry["normal_unique"] = groups[0].second;
    entry["mci_unique"] = groups[1].second;
    entry["ad_unique"] = groups[2].second;
    entry["total_unique"] = unique;
    entry["total_trips"] = unique_pairs.empty() ? 0 : total;
    entry["delta"] = target.delta;
    entry["sigma"] = target.sigma;
    ledger["scenarios"].push_back(std::move(entry));
  }

  // Group each subject's trips into drives of up to 12 traversals.
  std::vector<std::vector<std::size_t>> by_subject(subjects.size());
  for (std::size_t t = 0; t < trips.size(); ++t) by_subject[trips[t].subject].push_back(t);

  struct TripRow {
    std::size_t trip;
    std::string drive;
    std::size_t position;
    std::string timestamp;
  };
  std::vector<TripRow> rows;
  rows.reserve(trips.size());
  std::vector<std::vector<std::size_t>> subject_rows(subjects.size());
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    auto& list = by_subject[i];
    rng.shuffle(list.begin(), list.end());
    std::size_t drive_no = 0;
    for (std::size_t start = 0; start < list.size(); ++drive_no) {
      const std::size_t len = 1 + rng.index(12);
      const int day = static_cast<int>(rng.index(90));
      const int minute = 6 * 60 + static_cast<int>(rng.index(14 * 60));
      const auto drive = fmt::format("{}-D{:04d}", subjects[i].subject.id.str(), drive_no + 1);
      for (std::size_t p = 0; p < len && start + p < list.size(); ++p) {
        const int at = std::min(minute + static_cast<int>(2 * p), 24 * 60 - 1);
        subject_rows[i].push_back(rows.size());
        rows.push_back({list[start + p], drive, p + 1, iso_timestamp(day, at)});
      }
      start += len;
    }
  }

  CsvWriter trip_csv({"subject_id", "drive_id", "segment_id", "timestamp"}, true);
  for (const auto& r : rows) {
    const auto& t = trips[r.trip];
    trip_csv.row({subjects[t.subject].subject.id.str(), r.drive, segments[t.segment].id.str(), r.timestamp});
  }
  files.trips_csv = trip_csv.str();

  // Clips: sample trips per (subject, scenario) and draw a footage status.
  CsvWriter clip_csv({"subject_id", "drive_id", "clip_id", "segment_id", "status", "duration_min", "timestamp"},
                     true);
  struct ClipTally {
    std::uint64_t pure = 0, blackframe = 0, missing = 0, valid_normal = 0, valid_ad = 0;
    double pure_min = 0, blackframe_min = 0, missing_min = 0;
  };
  std::vector<ClipTally> tally(spec.scenarios.size());
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    for (std::size_t s = 0; s < spec.scenarios.size(); ++s) {
      std::vector<std::size_t> mine;
      for (auto r : subject_rows[i]) {
        if (trips[rows[r].trip].scenario == s) mine.push_back(r);
      }
      const auto take = std::min(mine.size(), spec.clips_per_subject);
      for (std::size_t c = 0; c < take; ++c) std::swap(mine[c], mine[c + rng.index(mine.size() - c)]);
      mine.resize(take);
      std::sort(mine.begin(), mine.end());
      for (auto r : mine) {
        const auto& row = rows[r];
        const auto& seg = segments[trips[row.trip].segment];
        const double u = rng.uniform();
        const ClipStatus status = u < kPureShare                      ? ClipStatus::Pure
                                  : u < kPureShare + kBlackframeShare ? ClipStatus::Blackframe
                                                                      : ClipStatus::Missing;
        const double minutes =
            std::round(seg.length_m / (seg.speed_limit_mph * kMetersPerMinutePerMph) * 1e4) / 1e4;
        auto& t = tally[s];
        switch (status) {
          case ClipStatus::Pure: ++t.pure; t.pure_min += minutes; break;
          case ClipStatus::Blackframe: ++t.blackframe; t.blackframe_min += minutes; break;
          case ClipStatus::Missing: ++t.missing; t.missing_min += minutes; break;
        }
        if (status != ClipStatus::Missing) {
          ++(binary_label(*subjects[i].subject.label) == BinaryLabel::NormalAging ? t.valid_normal : t.valid_ad);
        }
        clip_csv.row({subjects[i].subject.id.str(), row.drive, fmt::format("C{:03d}", row.position),
                      seg.id.str(), std::string(to_string(status)), format_real(minutes), row.timestamp});
      }
    }
  }
  files.clips_csv = clip_csv.str();

  for (std::size_t s = 0; s < spec.scenarios.size(); ++s) {
    auto& entry = ledger["scenarios"][s];
    const auto& t = tally[s];
    entry["clips"] = {{"pure", t.pure}, {"blackframe", t.blackframe}, {"missing", t.missing}};
    entry["clip_minutes"] = {{"pure", t.pure_min}, {"blackframe", t.blackframe_min}, {"missing", t.missing_min}};
    entry["valid_clips"] = {{"normal", t.valid_normal}, {"ad_aging", t.valid_ad}};
    std::vector<double> speeds, lengths;
    for (auto k : scenario_segments[s]) {
      speeds.push_back(segments[k].speed_limit_mph);
      lengths.push_back(segments[k].length_m / kMetersPerMile);
    }
    entry["median_speed_mph"] = median(speeds);
    entry["median_length_mi"] = median(lengths);
  }

  // Coverage per subject over the whole segment catalog.
  std::vector<std::set<std::size_t>> driven(subjects.size());
  for (const auto& t : trips) driven[t.subject].insert(t.segment);
  auto& subject_ledger = ledger["subjects"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const auto& s = subjects[i].subject;
    subject_ledger.push_back({{"subject_id", s.id.str()},
                              {"label", std::string(to_string(*s.label))},
                              {"coverage", static_cast<double>(driven[i].size()) / static_cast<double>(segments.size())},
                              {"trips", by_subject[i].size()}});
  }

  nlohmann::ordered_json battery;
  battery["ability_sd"] = kAbilitySd;
  battery["test_noise_sd"] = kTestNoiseSd;
  for (const auto& g : kGroups) {
    const auto& v = cogstats[g.label];
    double mean = 0;
    for (double x : v) mean += x;
    battery[std::string(to_string(g.label))] = {{"ability_mean", g.ability_mean},
                                                {"moca_mean", g.moca_mean},
                                                {"cogstat_mean", v.empty() ? 0.0 : mean / static_cast<double>(v.size())}};
  }
  ledger["battery_model"] = std::move(battery);

  CsvWriter subject_csv({"subject_id", "label", "cogstat", "moca", "C", "L", "R", "B", "R_cs", "R_rs", "T"}, true);
  for (const auto& d : subjects) {
    const auto& s = d.subject;
    const auto& b = *s.battery;
    subject_csv.row({s.id.str(), std::string(to_string(*s.label)), format_real(*s.cogstat), format_real(*s.moca),
                     format_real(b.cowa_words), format_real(b.line_orientation), format_real(b.avlt_recall),
                     format_real(b.benton_errors), format_real(b.rey_copy), format_real(b.rey_recall),
                     format_real(b.trails_b_seconds)});
  }
  files.subjects_csv = subject_csv.str();

  CsvWriter segment_csv({"segment_id", "scenario", "length_m", "speed_limit_mph", "functional_class"}, true);
  for (const auto& seg : segments) {
    segment_csv.row({seg.id.str(), seg.scenario.str(), format_real(seg.length_m), format_real(seg.speed_limit_mph),
                     seg.functional_class});
  }
  files.segments_csv = segment_csv.str();
  return files;
}

void write_cohort(const CohortFiles& files, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "subjects.csv", files.subjects_csv);
  write_file_atomic(dir / "segments.csv", files.segments_csv);
  write_file_atomic(dir / "trips.csv", files.trips_csv);
  write_file_atomic(dir / "clips.csv", files.clips_csv);
  write_file_atomic(dir / "ledger.json", files.ledger.dump(2) + "\n");
}

SyntheticEmbedderSpec embedder_spec_from_ledger(const nlohmann::json& ledger, std::size_t dim,
                                                std::uint64_t seed, std::size_t informative_dims) {
  std::vector<PlantedScenario> planted;
  try {
    for (const auto& s : ledger.at("scenarios")) {
      planted.push_back({ScenarioId(s.at("scenario").get<std::string>()), s.at("delta").get<double>() * s.at("sigma").get<double>(),
                         s.at("sigma").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SpecInvalid, std::string("ledger: ") + e.what());
  }
  return SyntheticEmbedderSpec::planted(dim, planted, seed, informative_dims);
}

}  // namespace scbm
