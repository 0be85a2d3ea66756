#include "scbm/embedding_store.hpp"

#include <fmt/format.h>
#include <zlib.h>

#include <bit>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "scbm/csv.hpp"
#include "scbm/parallel.hpp"
#include "scbm/random.hpp"

namespace scbm {

namespace {

template <class T>
void put_le(std::string& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

template <class T>
T get_le(std::string_view bytes, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return value;
}

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for payloads above 4 GiB
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const auto len = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(len));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void EmbedderConfig::validate() const {
  if (dim == 0) throw Error(ErrorKind::InvalidArgument, "embedding dim must be positive");
  if (frame_rate != 1 && frame_rate != 10) {
    throw Error(ErrorKind::InvalidArgument, "frame_rate must be 1 or 10");
  }
}

void SyntheticEmbedderSpec::validate() const {
  if (dim == 0) throw Error(ErrorKind::SpecInvalid, "synthetic embedder dim must be positive");
  for (const auto& [scenario, means] : scenarios) {
    if (means.normal.size() != dim || means.ad_aging.size() != dim) {
      throw Error(ErrorKind::DimMismatch, "class means of " + scenario.str() + " do not match dim");
    }
    const bool sigma_ok = allow_zero_sigma ? means.sigma >= 0 : means.sigma > 0;
    if (!sigma_ok || !std::isfinite(means.sigma)) {
      throw Error(ErrorKind::SpecInvalid, "sigma of " + scenario.str() + " must be > 0");
    }
  }
}

double SyntheticEmbedderSpec::separation(const ScenarioId& scenario) const {
  auto it = scenarios.find(scenario);
  if (it == scenarios.end()) throw Error(ErrorKind::UnknownScenario, "unknown scenario " + scenario.str());
  double sq = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = it->second.normal[i] - it->second.ad_aging[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

SyntheticEmbedderSpec SyntheticEmbedderSpec::planted(std::size_t dim,
                                                     std::span<const PlantedScenario> scenarios,
                                                     std::uint64_t seed,
                                                     std::size_t informative_dims) {
  SyntheticEmbedderSpec spec;
  spec.dim = dim;
  spec.seed = seed;
  const std::size_t k = std::clamp<std::size_t>(informative_dims, 1, dim);
  for (const auto& p : scenarios) {
    if (!(p.delta >= 0) || !std::isfinite(p.delta)) {
      throw Error(ErrorKind::SpecInvalid, "planted delta must be >= 0");
    }
    Rng rng(KeyHasher(seed).add("direction").add(p.scenario.str()).digest());
    std::vector<std::size_t> coords(dim);
    for (std::size_t i = 0; i < dim; ++i) coords[i] = i;
    rng.shuffle(coords.begin(), coords.end());

    std::vector<double> direction(dim, 0.0);
    double norm = 0;
    while (norm == 0) {
      for (std::size_t j = 0; j < k; ++j) {
        const double w = rng.normal();
        direction[coords[j]] = w;
        norm += w * w;
      }
    }
    norm = std::sqrt(norm);

    ScenarioMeans means;
    means.sigma = p.sigma;
    means.normal.assign(dim, 0.0);
    means.ad_aging.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) means.ad_aging[i] = p.delta * direction[i] / norm;
    spec.scenarios.emplace(p.scenario, std::move(means));
  }
  spec.validate();
  return spec;
}

SyntheticEmbedder::SyntheticEmbedder(SyntheticEmbedderSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
}

std::vector<float> SyntheticEmbedder::embed(const ClipRecord& clip, BinaryLabel label) const {
  if (clip.status == ClipStatus::Missing) {
    throw Error(ErrorKind::MissingClip, "clip " + clip.clip.str() + " has no footage");
  }
  auto it = spec_.scenarios.find(clip.scenario);
  if (it == spec_.scenarios.end()) {
    throw Error(ErrorKind::UnknownScenario, "no synthetic means for scenario " + clip.scenario.str());
  }
  const auto& mean = label == BinaryLabel::NormalAging ? it->second.normal : it->second.ad_aging;
  Rng rng(KeyHasher(spec_.seed).add(clip.subject.str()).add(clip.drive.str()).add(clip.clip.str()).digest());
  std::vector<float> out(spec_.dim);
  for (std::size_t i = 0; i < spec_.dim; ++i) {
    out[i] = static_cast<float>(mean[i] + it->second.sigma * rng.normal());
  }
  return out;
}

PrecomputedEmbedder::PrecomputedEmbedder(EmbeddingMatrix matrix) : matrix_(std::move(matrix)) {
  for (std::size_t i = 0; i < matrix_.rows(); ++i) {
    const auto& k = matrix_.key(i);
    index_.emplace(clip_triple(k.subject, k.drive, k.clip), i);
  }
}

std::vector<float> PrecomputedEmbedder::embed(const ClipRecord& clip, BinaryLabel label) const {
  if (clip.status == ClipStatus::Missing) {
    throw Error(ErrorKind::MissingClip, "clip " + clip.clip.str() + " has no footage");
  }
  auto it = index_.find(clip_triple(clip.subject, clip.drive, clip.clip));
  if (it == index_.end()) {
    throw Error(ErrorKind::MissingClip, fmt::format("no stored embedding for ({}, {}, {})",
                                                    clip.subject.str(), clip.drive.str(), clip.clip.str()));
  }
  const auto& key = matrix_.key(it->second);
  if (key.label != label || key.scenario != clip.scenario) {
    throw Error(ErrorKind::InvariantError, "stored key of clip " + clip.clip.str() + " disagrees with manifest");
  }
  auto row = matrix_.row(it->second);
  return {row.begin(), row.end()};
}

EmbeddingMatrix embed_clips(const Embedder& embedder, std::span<const ClipRecord> clips,
                            const SubjectRegistry& subjects) {
  std::vector<BinaryLabel> labels;
  labels.reserve(clips.size());
  for (const auto& c : clips) {
    auto label = subjects.at(c.subject).binary();
    if (!label) throw Error(ErrorKind::UnlabeledSubject, "subject " + c.subject.str() + " has no label");
    labels.push_back(*label);
  }

  std::vector<std::vector<float>> rows(clips.size());
  parallel_for(clips.size(), [&](std::size_t i) { rows[i] = embedder.embed(clips[i], labels[i]); });

  EmbeddingMatrix out(embedder.dim());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const auto& c = clips[i];
    out.add_row({c.subject, c.drive, c.clip, c.scenario, labels[i]}, rows[i]);
  }
  return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& file) {
  auto p = file;
  p += ".idx.jsonl";
  return p;
}

std::string encode_embeddings(const EmbeddingMatrix& matrix) {
  const auto data = matrix.data();
  std::string out;
  out.reserve(kEmbeddingHeaderBytes + data.size() * 4 + 4);
  out.append(kEmbeddingMagic.data(), kEmbeddingMagic.size());
  put_le<std::uint16_t>(out, kEmbeddingFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.dim()));
  put_le<std::uint64_t>(out, matrix.rows());
  for (float v : data) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  const auto crc = crc32_of(std::string_view(out).substr(kEmbeddingHeaderBytes));
  put_le<std::uint32_t>(out, crc);
  return out;
}

std::string encode_index(const EmbeddingMatrix& matrix) {
  std::string out;
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const auto& k = matrix.key(i);
    nlohmann::ordered_json j;
    j["row"] = i;
    j["subject"] = k.subject.str();
    j["drive"] = k.drive.str();
    j["clip"] = k.clip.str();
    j["scenario"] = k.scenario.str();
    j["label"] = std::string(to_string(k.label));
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

EmbeddingMatrix decode_embeddings(std::string_view bytes, std::string_view index_jsonl) {
  if (bytes.size() < kEmbeddingHeaderBytes) {
    throw FormatError(bytes.size(), "file shorter than header");
  }
  if (bytes.substr(0, 4) != std::string_view(kEmbeddingMagic.data(), 4)) {
    throw FormatError(0, "bad magic");
  }
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kEmbeddingFormatVersion) {
    throw FormatError(4, fmt::format("unsupported format version {}", version));
  }
  const auto dim = get_le<std::uint32_t>(bytes, 6);
  const auto rows = get_le<std::uint64_t>(bytes, 10);
  if (dim == 0) throw FormatError(6, "dim must be positive");

  const std::uint64_t max_payload = std::numeric_limits<std::uint64_t>::max() / 8;
  if (rows > max_payload / dim / 4) throw FormatError(10, "row count overflows");
  const std::uint64_t payload = rows * dim * 4;
  const std::uint64_t expected = kEmbeddingHeaderBytes + payload + 4;
  if (bytes.size() < expected) {
    throw FormatError(bytes.size(), fmt::format("truncated: expected {} bytes", expected));
  }
  if (bytes.size() > expected) throw FormatError(expected, "trailing bytes after checksum");

  const auto body = bytes.substr(kEmbeddingHeaderBytes, payload);
  const auto stored_crc = get_le<std::uint32_t>(bytes, kEmbeddingHeaderBytes + payload);
  const auto actual_crc = crc32_of(body);
  if (stored_crc != actual_crc) {
    throw Error(ErrorKind::ChecksumMismatch,
                fmt::format("payload CRC32 {:08x} does not match stored {:08x}", actual_crc, stored_crc));
  }

  std::vector<ClipKey> keys;
  keys.reserve(rows);
  std::size_t pos = 0;
  std::uint64_t line_no = 0;
  while (pos < index_jsonl.size()) {
    auto nl = index_jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = index_jsonl.size();
    const auto line = index_jsonl.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    ++line_no;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.at("row").get<std::uint64_t>() != keys.size()) {
        throw FormatError(line_no, "index rows out of order");
      }
      keys.push_back({SubjectId(j.at("subject").get<std::string>()),
                      DriveId(j.at("drive").get<std::string>()), ClipId(j.at("clip").get<std::string>()),
                      ScenarioId(j.at("scenario").get<std::string>()),
                      parse_binary_label(j.at("label").get<std::string>())});
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw FormatError(line_no, std::string("sidecar index: ") + e.what());
    }
  }
  if (keys.size() != rows) {
    throw FormatError(10, fmt::format("sidecar lists {} rows, header says {}", keys.size(), rows));
  }

  EmbeddingMatrix out(dim);
  std::vector<float> row(dim);
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < dim; ++c) {
      row[c] = std::bit_cast<float>(get_le<std::uint32_t>(body, (r * dim + c) * 4));
    }
    try {
      out.add_row(std::move(keys[r]), row);
    } catch (const Error& e) {
      throw FormatError(kEmbeddingHeaderBytes + r * dim * 4, e.what());
    }
  }
  return out;
}

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  write_file_atomic(path, encode_embeddings(matrix));
  write_file_atomic(sidecar_path(path), encode_index(matrix));
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  const auto bytes = read_text_file(path);
  const auto index = read_text_file(sidecar_path(path));
  return decode_embeddings(bytes, index);
}

}  // namespace scbm
