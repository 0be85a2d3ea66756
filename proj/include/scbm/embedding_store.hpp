#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scbm/core.hpp"
#include "scbm/ingestion.hpp"

namespace scbm {

struct EmbedderConfig {
  std::size_t dim = 6144;
  int frame_rate = 1;
  std::array<int, 3> input_shape{960, 752, 3};

  void validate() const;
};

/// Maps one clip to a fixed-length embedding vector.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dim() const = 0;
  /// Throws MissingClip for clips whose footage is missing.
  virtual std::vector<float> embed(const ClipRecord& clip, BinaryLabel label) const = 0;
};

/// Class means and noise level of one scenario for the synthetic embedder.
struct ScenarioMeans {
  std::vector<double> normal;
  std::vector<double> ad_aging;
  double sigma = 1.0;
};

struct PlantedScenario {
  ScenarioId scenario;
  double delta = 0;  // ‖μ_normal − μ_ad‖₂
  double sigma = 1;
};

struct SyntheticEmbedderSpec {
  std::size_t dim = 0;
  std::map<ScenarioId, ScenarioMeans> scenarios;
  std::uint64_t seed = 0;
  /// Test-only escape hatch for the σ → 0 degenerate case.
  bool allow_zero_sigma = false;

  void validate() const;
  double separation(const ScenarioId& scenario) const;

  /// Normal-class mean at the origin and the AD-aging mean displaced by
  /// `delta` along a seeded random unit direction confined to
  /// `informative_dims` coordinates.
  static SyntheticEmbedderSpec planted(std::size_t dim, std::span<const PlantedScenario> scenarios,
                                       std::uint64_t seed, std::size_t informative_dims = 16);
};

/// Draws N(μ(scenario, label), σ²I) from a stream keyed on
/// (seed, subject, drive, clip); the result is independent of call order.
class SyntheticEmbedder final : public Embedder {
 public:
  explicit SyntheticEmbedder(SyntheticEmbedderSpec spec);

  std::size_t dim() const override { return spec_.dim; }
  std::vector<float> embed(const ClipRecord& clip, BinaryLabel label) const override;
  const SyntheticEmbedderSpec& spec() const noexcept { return spec_; }

 private:
  SyntheticEmbedderSpec spec_;
};

/// Looks clips up in an embedding matrix produced elsewhere.
class PrecomputedEmbedder final : public Embedder {
 public:
  explicit PrecomputedEmbedder(EmbeddingMatrix matrix);

  std::size_t dim() const override { return matrix_.dim(); }
  std::vector<float> embed(const ClipRecord& clip, BinaryLabel label) const override;

 private:
  EmbeddingMatrix matrix_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Embeds every clip in order; labels come from the registry. Clips may be
/// embedded concurrently, the row order always follows `clips`.
EmbeddingMatrix embed_clips(const Embedder& embedder, std::span<const ClipRecord> clips,
                            const SubjectRegistry& subjects);

// Binary container: "SBEM" | u16 version | u32 dim | u64 rows |
// rows*dim float32 | u32 CRC32 of the payload. All little-endian.
inline constexpr std::array<char, 4> kEmbeddingMagic{'S', 'B', 'E', 'M'};
inline constexpr std::uint16_t kEmbeddingFormatVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 4 + 2 + 4 + 8;

std::filesystem::path sidecar_path(const std::filesystem::path& file);

std::string encode_embeddings(const EmbeddingMatrix& matrix);
std::string encode_index(const EmbeddingMatrix& matrix);
/// Decodes the binary container; keys are taken from the sidecar lines.
EmbeddingMatrix decode_embeddings(std::string_view bytes, std::string_view index_jsonl);

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

}  // namespace scbm
