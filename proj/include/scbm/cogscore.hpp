#pragma once

#include <span>
#include <string>

#include "scbm/core.hpp"

namespace scbm {

/// Standardized score of one neuropsychological test within a cognitive domain.
struct DomainScore {
  std::string domain;
  std::string test;
  double z = 0;
};

struct CogstatOptions {
  /// Negate the Benton-error and Trail-Making-time terms. Off by default: the
  /// composite is evaluated exactly as published, with both terms added.
  bool sign_corrected = false;
};

/// Composite cognition score centered at 350: the sum of seven z-terms, each
/// (raw - reference mean) / reference SD.
double compute_cogstat(const NeuropsychBattery& battery, CogstatOptions options = {});

/// Jak criteria: some domain holds at least two tests with z < -1.
bool mci_jak(std::span<const DomainScore> scores);

/// Peterson criteria: any test with z < -1.5.
bool mci_peterson(std::span<const DomainScore> scores);

}  // namespace scbm
