#include "scbm/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>

#include "scbm/csv.hpp"
#include "scbm/error.hpp"

namespace scbm {

namespace {

[[noreturn]] void field_error(std::string_view key, const std::string& constraint) {
  throw Error(ErrorKind::ConfigError, fmt::format("field `{}`: {}", key, constraint));
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    field_error(key, fmt::format("expected a non-negative integer, got '{}'", v));
  }
  return out;
}

double to_real(std::string_view key, std::string_view v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
    field_error(key, fmt::format("expected a finite number, got '{}'", v));
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  field_error(key, fmt::format("expected true or false, got '{}'", v));
}

template <class Parse>
auto guarded(std::string_view key, std::string_view v, Parse parse) {
  try {
    return parse(v);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    field_error(key, e.what());
  }
}

struct Field {
  std::string_view key;
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <class T>
Field size_field(std::string_view key, T PipelineConfig::*member) {
  return {key, [=](PipelineConfig& c, std::string_view v) { c.*member = static_cast<T>(to_u64(key, v)); },
          [=](const PipelineConfig& c) { return fmt::format("{}", c.*member); }};
}

Field real_field(std::string_view key, double PipelineConfig::*member) {
  return {key, [=](PipelineConfig& c, std::string_view v) { c.*member = to_real(key, v); },
          [=](const PipelineConfig& c) { return format_real(c.*member); }};
}

Field bool_field(std::string_view key, bool PipelineConfig::*member) {
  return {key, [=](PipelineConfig& c, std::string_view v) { c.*member = to_bool(key, v); },
          [=](const PipelineConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field space_field(std::string_view key, FeatureSpace PipelineConfig::*member) {
  return {key,
          [=](PipelineConfig& c, std::string_view v) { c.*member = guarded(key, v, parse_feature_space); },
          [=](const PipelineConfig& c) { return std::string(to_string(c.*member)); }};
}

template <class T>
Field forest_field(std::string_view key, T ForestParams::*member) {
  if constexpr (std::is_same_v<T, bool>) {
    return {key, [=](PipelineConfig& c, std::string_view v) { c.forest.*member = to_bool(key, v); },
            [=](const PipelineConfig& c) { return std::string(c.forest.*member ? "true" : "false"); }};
  } else {
    return {key, [=](PipelineConfig& c, std::string_view v) { c.forest.*member = to_u64(key, v); },
            [=](const PipelineConfig& c) { return fmt::format("{}", c.forest.*member); }};
  }
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"seed", [](PipelineConfig& c, std::string_view v) { c.seed = to_u64("seed", v); },
       [](const PipelineConfig& c) { return c.seed ? fmt::format("{}", *c.seed) : std::string(); }},
      size_field("dim", &PipelineConfig::dim),
      size_field("n_components", &PipelineConfig::n_components),
      size_field("frame_rate", &PipelineConfig::frame_rate),
      {"metric",
       [](PipelineConfig& c, std::string_view v) { c.metric = guarded("metric", v, parse_distance_metric); },
       [](const PipelineConfig& c) { return std::string(to_string(c.metric)); }},
      space_field("space", &PipelineConfig::space),
      space_field("classifier_space", &PipelineConfig::classifier_space),
      forest_field("rf_trees", &ForestParams::n_trees),
      forest_field("rf_max_features", &ForestParams::max_features),
      forest_field("rf_min_leaf", &ForestParams::min_leaf),
      forest_field("rf_max_depth", &ForestParams::max_depth),
      forest_field("rf_bootstrap", &ForestParams::bootstrap),
      size_field("dls_k", &PipelineConfig::dls_k),
      size_field("dls_r", &PipelineConfig::dls_r),
      real_field("test_fraction", &PipelineConfig::test_fraction),
      size_field("resamples", &PipelineConfig::resamples),
      real_field("min_fraction", &PipelineConfig::min_fraction),
      bool_field("cogstat_sign_corrected", &PipelineConfig::cogstat_sign_corrected),
      {"include_statuses",
       [](PipelineConfig& c, std::string_view v) {
         c.include_statuses.clear();
         for (auto item : split_list(v)) {
           const auto s = guarded("include_statuses", item, parse_clip_status);
           if (std::find(c.include_statuses.begin(), c.include_statuses.end(), s) != c.include_statuses.end()) {
             field_error("include_statuses", fmt::format("'{}' listed twice", item));
           }
           c.include_statuses.push_back(s);
         }
       },
       [](const PipelineConfig& c) {
         std::vector<std::string_view> names;
         for (auto s : c.include_statuses) names.push_back(to_string(s));
         return fmt::format("{}", fmt::join(names, ","));
       }},
      size_field("informative_dims", &PipelineConfig::informative_dims),
      size_field("synth_n_normal", &PipelineConfig::synth_n_normal),
      size_field("synth_n_mci", &PipelineConfig::synth_n_mci),
      size_field("synth_n_ad", &PipelineConfig::synth_n_ad),
      size_field("synth_clips_per_subject", &PipelineConfig::synth_clips_per_subject),
      real_field("synth_trip_scale", &PipelineConfig::synth_trip_scale),
      {"synth_delta",
       [](PipelineConfig& c, std::string_view v) {
         c.synth_delta.clear();
         for (auto item : split_list(v)) {
           const auto colon = item.rfind(':');
           if (colon == std::string_view::npos || colon == 0) {
             field_error("synth_delta", fmt::format("expected scenario:delta, got '{}'", item));
           }
           const ScenarioId id(std::string(trim(item.substr(0, colon))));
           if (!c.synth_delta.emplace(id, to_real("synth_delta", trim(item.substr(colon + 1)))).second) {
             field_error("synth_delta", fmt::format("scenario '{}' listed twice", id.str()));
           }
         }
       },
       [](const PipelineConfig& c) {
         std::vector<std::string> parts;
         for (const auto& [id, d] : c.synth_delta) parts.push_back(id.str() + ":" + format_real(d));
         return fmt::format("{}", fmt::join(parts, ","));
       }},
      real_field("synth_sigma", &PipelineConfig::synth_sigma),
  };
  return table;
}

}  // namespace

void PipelineConfig::validate() const {
  require_seed();
  if (dim == 0) field_error("dim", "must be >= 1");
  if (n_components != 50 && n_components != 100 && n_components != 200) {
    field_error("n_components", fmt::format("must be one of 50, 100, 200 (got {})", n_components));
  }
  if (n_components > dim) field_error("n_components", fmt::format("must not exceed dim = {}", dim));
  if (frame_rate != 1 && frame_rate != 10) field_error("frame_rate", "must be 1 or 10");
  if (forest.n_trees == 0) field_error("rf_trees", "must be >= 1");
  if (forest.min_leaf == 0) field_error("rf_min_leaf", "must be >= 1");
  if (forest.max_features > dim) field_error("rf_max_features", fmt::format("must not exceed dim = {}", dim));
  if (dls_k == 0) field_error("dls_k", "must be >= 1");
  if (dls_r == 0) field_error("dls_r", "must be >= 1");
  if (!(test_fraction > 0 && test_fraction < 1)) field_error("test_fraction", "must lie in (0, 1)");
  if (resamples == 0) field_error("resamples", "must be >= 1");
  if (!(min_fraction >= 0 && min_fraction <= 1)) field_error("min_fraction", "must lie in [0, 1]");
  if (include_statuses.empty()) field_error("include_statuses", "must name at least one status");
  if (std::find(include_statuses.begin(), include_statuses.end(), ClipStatus::Missing) != include_statuses.end()) {
    field_error("include_statuses", "missing footage cannot be embedded");
  }
  if (informative_dims == 0 || informative_dims > dim) {
    field_error("informative_dims", fmt::format("must lie in [1, dim = {}]", dim));
  }
  if (!(synth_trip_scale >= 0)) field_error("synth_trip_scale", "must be >= 0");
  if (!(synth_sigma > 0)) field_error("synth_sigma", "must be > 0");
  const auto defaults = CohortSpec::defaults();
  for (const auto& [id, d] : synth_delta) {
    const bool known = std::any_of(defaults.scenarios.begin(), defaults.scenarios.end(),
                                   [&](const ScenarioTarget& t) { return t.scenario == id; });
    if (!known) field_error("synth_delta", fmt::format("unknown scenario '{}'", id.str()));
    if (!(d >= 0)) field_error("synth_delta", "deltas must be >= 0");
  }
}

std::uint64_t PipelineConfig::require_seed() const {
  if (!seed) field_error("seed", "required field is missing");
  return *seed;
}

StatusSet PipelineConfig::statuses() const {
  StatusSet set;
  for (auto s : include_statuses) set.insert(s);
  return set;
}

CohortSpec PipelineConfig::cohort_spec() const {
  CohortSpec spec = CohortSpec::defaults();
  spec.n_normal = synth_n_normal;
  spec.n_mci = synth_n_mci;
  spec.n_ad = synth_n_ad;
  spec.clips_per_subject = synth_clips_per_subject;
  spec.trip_scale = synth_trip_scale;
  spec.seed = require_seed();
  for (auto& t : spec.scenarios) {
    t.sigma = synth_sigma;
    if (auto it = synth_delta.find(t.scenario); it != synth_delta.end()) t.delta = it->second;
  }
  return spec;
}

std::string PipelineConfig::render() const {
  std::string out;
  for (const auto& f : fields()) out += fmt::format("{} = {}\n", f.key, f.get(*this));
  return out;
}

PipelineConfig parse_config(std::string_view text, const std::string& origin) {
  PipelineConfig config;
  std::set<std::string_view> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::ConfigError, fmt::format("{}:{}: expected `key = value`", origin, line_no));
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end()) {
      throw Error(ErrorKind::ConfigError, fmt::format("{}:{}: unknown key `{}`", origin, line_no, key));
    }
    if (!seen.insert(it->key).second) {
      throw Error(ErrorKind::ConfigError, fmt::format("{}:{}: key `{}` given twice", origin, line_no, key));
    }
    it->set(config, value);
  }
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  return parse_config(text, path.string());
}

}  // namespace scbm
