#include "tqprep/memory.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "tqprep/text.hpp"

namespace tqprep::memory {

using nlohmann::json;

std::size_t edit_distance(std::string_view a_sv, std::string_view b_sv) {
  std::u32string a = text::utf8_decode(a_sv);
  std::u32string b = text::utf8_decode(b_sv);
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double lev_ratio(std::string_view a, std::string_view b) {
  std::size_t total = text::utf8_decode(a).size() + text::utf8_decode(b).size();
  if (total == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(a, b)) / static_cast<double>(total);
}

namespace {
double norm(const Embedding& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}
}  // namespace

double cosine(const Embedding& a, const Embedding& b) {
  if (a.size() != b.size()) throw std::invalid_argument("embedding dimensions differ");
  double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw MemoryError(MemoryError::Kind::ZeroVector, "cosine of a zero vector");
  double dot = 0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot / (na * nb);
}

Embedding TrigramEmbedder::embed(std::string_view text_sv) const {
  Embedding v(kEmbeddingDim, 0.0);
  if (text_sv.empty()) return v;
  std::u32string s = U"^" + text::utf8_decode(text_sv) + U"$";
  for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t k = 0; k < 3; ++k) {
      char32_t c = s[i + k];
      for (int byte = 0; byte < 4; ++byte) {
        h ^= (c >> (8 * byte)) & 0xFF;
        h *= 1099511628211ULL;
      }
    }
    v[h % kEmbeddingDim] += 1.0;
  }
  double n = norm(v);
  for (double& x : v) x /= n;
  return v;
}

Embedding embed(std::string_view text) { return TrigramEmbedder().embed(text); }

const char* outcome_name(Outcome o) { return o == Outcome::Succeeded ? "succeeded" : "repaired"; }

json to_json(const MemoryRecord& r) {
  return json{{"key", r.key}, {"payload", r.payload}, {"outcome", outcome_name(r.outcome)}, {"timestamp", r.timestamp}};
}

MemoryRecord record_from_json(const json& j) {
  MemoryRecord r;
  std::string outcome;
  try {
    r.key = j.at("key").get<std::string>();
    r.payload = j.at("payload").get<std::string>();
    outcome = j.value("outcome", "succeeded");
    r.timestamp = j.value("timestamp", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw MemoryError(MemoryError::Kind::Schema, std::string("memory record: ") + e.what());
  }
  if (outcome != "succeeded" && outcome != "repaired") {
    throw MemoryError(MemoryError::Kind::Schema, "unknown outcome '" + outcome + "'");
  }
  r.outcome = outcome == "repaired" ? Outcome::Repaired : Outcome::Succeeded;
  return r;
}

std::string make_key(std::string_view description, std::string_view column, const std::vector<std::string>& samples) {
  std::string out = std::string(description) + " | " + std::string(column) + " | ";
  for (std::size_t i = 0; i < samples.size() && i < 3; ++i) {
    if (i) out += "; ";
    out += samples[i];
  }
  return out;
}

Pool::Pool() : embedder_(std::make_shared<TrigramEmbedder>()) {}
Pool::Pool(std::shared_ptr<const Embedder> embedder) : embedder_(std::move(embedder)) {}

void Pool::add(MemoryRecord r) {
  r.timestamp = next_ts_++;
  records_.push_back(std::move(r));
  trim();
}

void Pool::restore(MemoryRecord r) {
  next_ts_ = std::max(next_ts_, r.timestamp + 1);
  records_.push_back(std::move(r));
  trim();
}

void Pool::trim() {
  if (records_.size() <= kCapacity) return;
  // Oldest by timestamp, earliest inserted among equals.
  auto oldest = std::min_element(records_.begin(), records_.end(),
                                 [](const MemoryRecord& a, const MemoryRecord& b) { return a.timestamp < b.timestamp; });
  records_.erase(oldest);
}

std::vector<MemoryRecord> Pool::retrieve(std::string_view key, std::size_t k, Mode mode) const {
  if (k == 0) throw std::invalid_argument("retrieve needs k >= 1");
  std::vector<double> score(records_.size());
  Embedding qv;
  bool q_zero = false;
  if (mode == Mode::Semantic) {
    qv = embedder_->embed(key);
    q_zero = norm(qv) == 0.0;
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (mode == Mode::Lexical) {
      score[i] = lev_ratio(key, records_[i].key);
    } else {
      Embedding rv = embedder_->embed(records_[i].key);
      score[i] = (q_zero || norm(rv) == 0.0) ? 0.0 : cosine(qv, rv);
    }
  }
  std::vector<std::size_t> idx(records_.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return records_[a].timestamp > records_[b].timestamp;
  });
  std::vector<MemoryRecord> out;
  for (std::size_t i = 0; i < idx.size() && out.size() < k; ++i) out.push_back(records_[idx[i]]);
  return out;
}

void Pool::load_jsonl(const std::string& path) {
  if (!std::filesystem::exists(path)) return;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MemoryError(MemoryError::Kind::Io, "cannot read memory pool " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      restore(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw MemoryError(MemoryError::Kind::Schema, path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const MemoryError& e) {
      throw MemoryError(MemoryError::Kind::Schema, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void Pool::save_jsonl(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MemoryError(MemoryError::Kind::Io, "cannot write memory pool " + path);
  for (const auto& r : records_) out << to_json(r).dump() << "\n";
}

json Pool::snapshot() const {
  json arr = json::array();
  for (const auto& r : records_) arr.push_back(to_json(r));
  return arr;
}

}  // namespace tqprep::memory
