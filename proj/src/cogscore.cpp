#include "scbm/cogscore.hpp"

#include <cmath>
#include <map>

namespace scbm {

namespace {

struct Norm {
  double mean;
  double sd;
};

constexpr Norm kCowa{38.7, 11.1};
constexpr Norm kLineOrientation{26.2, 3.5};
constexpr Norm kAvltRecall{10.08, 3.2};
constexpr Norm kBenton{4.4, 2.4};
constexpr Norm kReyCopy{31.0, 3.7};
constexpr Norm kReyRecall{15.7, 5.7};
constexpr Norm kTrailsB{46.1, 32.6};

constexpr double kCenter = 350.0;

double z(double raw, Norm n) { return (raw - n.mean) / n.sd; }

}  // namespace

double compute_cogstat(const NeuropsychBattery& b, CogstatOptions options) {
  b.validate();
  const double error_sign = options.sign_corrected ? -1.0 : 1.0;
  const double score = kCenter + z(b.cowa_words, kCowa) + z(b.line_orientation, kLineOrientation) +
                       z(b.avlt_recall, kAvltRecall) + error_sign * z(b.benton_errors, kBenton) +
                       z(b.rey_copy, kReyCopy) + z(b.rey_recall, kReyRecall) +
                       error_sign * z(b.trails_b_seconds, kTrailsB);
  if (!std::isfinite(score)) throw Error(ErrorKind::NonFinite, "COGSTAT evaluation overflowed");
  return score;
}

bool mci_jak(std::span<const DomainScore> scores) {
  std::map<std::string, int> impaired;
  for (const auto& s : scores) {
    if (s.z < -1.0 && ++impaired[s.domain] >= 2) return true;
  }
  return false;
}

bool mci_peterson(std::span<const DomainScore> scores) {
  for (const auto& s : scores) {
    if (s.z < -1.5) return true;
  }
  return false;
}

}  // namespace scbm
