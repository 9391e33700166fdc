#pragma once

// Pool of past successful physical operations, retrieved as demonstrations.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tqprep::memory {

class MemoryError : public std::runtime_error {
 public:
  enum class Kind { ZeroVector, Io, Schema };
  MemoryError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Unit-cost edit distance over code points.
std::size_t edit_distance(std::string_view a, std::string_view b);
// 1 - d / (|a| + |b|) in code points; 1 for two empty strings.
double lev_ratio(std::string_view a, std::string_view b);

constexpr std::size_t kEmbeddingDim = 256;
using Embedding = std::vector<double>;

// Throws ZeroVector when either side is all zeros.
double cosine(const Embedding& a, const Embedding& b);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Embedding embed(std::string_view text) const = 0;
};

// Hashed character trigrams of "^text$", L2-normalised. Empty text gives zeros.
class TrigramEmbedder : public Embedder {
 public:
  Embedding embed(std::string_view text) const override;
};

Embedding embed(std::string_view text);

enum class Outcome { Succeeded, Repaired };
const char* outcome_name(Outcome o);

struct MemoryRecord {
  std::string key;
  std::string payload;  // wire-encoded physical op
  Outcome outcome = Outcome::Succeeded;
  std::uint64_t timestamp = 0;  // logical sequence number
  friend bool operator==(const MemoryRecord&, const MemoryRecord&) = default;
};

nlohmann::json to_json(const MemoryRecord& r);
MemoryRecord record_from_json(const nlohmann::json& j);

// "description | column | v1; v2; v3" with at most three sample values.
std::string make_key(std::string_view description, std::string_view column, const std::vector<std::string>& samples);

enum class Mode { Lexical, Semantic };

class Pool {
 public:
  static constexpr std::size_t kCapacity = 10000;

  Pool();
  explicit Pool(std::shared_ptr<const Embedder> embedder);

  // Stamps the next sequence number; evicts the oldest record past capacity.
  void add(MemoryRecord r);
  // Keeps the stored timestamp (used when loading).
  void restore(MemoryRecord r);

  const std::vector<MemoryRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // Best first; ties by newer timestamp, then earlier insertion.
  std::vector<MemoryRecord> retrieve(std::string_view key, std::size_t k, Mode mode = Mode::Lexical) const;

  void load_jsonl(const std::string& path);  // missing file = empty pool
  void save_jsonl(const std::string& path) const;
  nlohmann::json snapshot() const;

 private:
  void trim();
  std::shared_ptr<const Embedder> embedder_;
  std::vector<MemoryRecord> records_;
  std::uint64_t next_ts_ = 1;
};

}  // namespace tqprep::memory
