#include "usd/representation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

namespace usd::repr {

using nlohmann::json;

std::uint64_t content_hash(std::string_view text, text::Span target) {
  std::string key(text);
  key.push_back('\x1f');
  key += std::to_string(target.start);
  key.push_back('\x1f');
  key += std::to_string(target.end);
  return text::fnv1a(key);
}

std::uint64_t EmbeddingRequest::content_hash() const { return repr::content_hash(text, target); }

EmbeddingVector::EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {
  for (float v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("embedding vector with non-finite entry");
  }
}

EmbeddingVector mean(std::span<const EmbeddingVector> vectors) {
  if (vectors.empty()) throw std::invalid_argument("mean of zero vectors");
  const std::size_t dim = vectors.front().dim();
  std::vector<double> acc(dim, 0.0);
  for (const auto& v : vectors) {
    if (v.dim() != dim) throw std::invalid_argument("mean over vectors of different dimension");
    for (std::size_t i = 0; i < dim; ++i) acc[i] += v[i];
  }
  std::vector<float> out(dim);
  const double n = static_cast<double>(vectors.size());
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / n);
  return EmbeddingVector(std::move(out));
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double unit_draw(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * (2.0 / 9007199254740992.0) - 1.0;
}

}  // namespace

MockProvider::MockProvider(std::size_t dim, double target_weight, double context_weight)
    : dim_(dim), target_weight_(target_weight), context_weight_(context_weight) {
  if (dim < 2) throw std::invalid_argument("mock provider needs dim >= 2");
}

EmbeddingVector MockProvider::embed(const EmbeddingRequest& request) const {
  if (request.target.start > request.target.end || request.target.end > text::length(request.text)) {
    throw ProviderError(request.request_id, "invalid target span for request " + request.request_id);
  }
  std::uint64_t target_state = text::fnv1a(text::lower(text::slice(request.text, request.target)));
  std::uint64_t context_state = request.content_hash();
  std::vector<float> v(dim_);
  for (auto& x : v) {
    x = static_cast<float>(target_weight_ * unit_draw(target_state) +
                           context_weight_ * unit_draw(context_state));
  }
  return EmbeddingVector(std::move(v));
}

std::vector<EmbeddingVector> MockProvider::embed_batch(std::span<const EmbeddingRequest> requests) {
  std::vector<EmbeddingVector> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.push_back(embed(r));
  return out;
}

std::optional<EmbeddingVector> VectorCache::get(std::uint64_t hash) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(hash);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void VectorCache::put(std::uint64_t hash, EmbeddingVector v) {
  std::unique_lock lock(mutex_);
  entries_.insert_or_assign(hash, std::move(v));
}

std::size_t VectorCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

CachingProvider::CachingProvider(EmbeddingProvider& inner, std::size_t batch_size)
    : inner_(inner), batch_size_(std::max<std::size_t>(1, batch_size)) {}

std::vector<EmbeddingVector> CachingProvider::embed_batch(std::span<const EmbeddingRequest> requests) {
  std::vector<std::optional<EmbeddingVector>> slots(requests.size());
  std::vector<std::size_t> missing;
  std::unordered_map<std::uint64_t, std::size_t> first_miss;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto h = requests[i].content_hash();
    slots[i] = cache_.get(h);
    if (!slots[i] && first_miss.emplace(h, i).second) missing.push_back(i);
  }
  for (std::size_t off = 0; off < missing.size(); off += batch_size_) {
    std::vector<EmbeddingRequest> batch;
    for (std::size_t k = off; k < std::min(missing.size(), off + batch_size_); ++k) {
      batch.push_back(requests[missing[k]]);
    }
    auto vecs = inner_.embed_batch(batch);
    ++inner_calls_;
    if (vecs.size() != batch.size()) {
      throw ProviderError(batch.front().request_id, "provider returned wrong number of vectors");
    }
    for (std::size_t k = 0; k < batch.size(); ++k) cache_.put(batch[k].content_hash(), std::move(vecs[k]));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (slots[i]) {
      out.push_back(std::move(*slots[i]));
    } else {
      out.push_back(*cache_.get(requests[i].content_hash()));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vector store
// ---------------------------------------------------------------------------

namespace {

template <typename T>
void put_le(std::string& out, T v) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::string_view in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw StoreError("truncated vector store");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += sizeof(T);
  return static_cast<T>(v);
}

}  // namespace

bool VectorStore::add(std::uint64_t hash, const EmbeddingVector& v) {
  if (dim_ == 0) dim_ = v.dim();
  if (v.dim() != dim_) {
    throw StoreError("vector of dim " + std::to_string(v.dim()) + " in store of dim " + std::to_string(dim_));
  }
  if (index_.contains(hash)) return false;
  index_.emplace(hash, hashes_.size());
  hashes_.push_back(hash);
  vectors_.push_back(v);
  return true;
}

const EmbeddingVector* VectorStore::find(std::uint64_t hash) const {
  auto it = index_.find(hash);
  return it == index_.end() ? nullptr : &vectors_[it->second];
}

std::string VectorStore::to_bytes() const {
  std::string out(kStoreMagic, sizeof kStoreMagic);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  put_le<std::uint32_t>(out, kDtypeFloat32);
  put_le<std::uint64_t>(out, hashes_.size());
  for (std::size_t r = 0; r < hashes_.size(); ++r) {
    put_le<std::uint64_t>(out, hashes_[r]);
    for (float f : vectors_[r].values()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

VectorStore VectorStore::from_bytes(std::string_view bytes) {
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kStoreMagic, sizeof kStoreMagic) != 0) {
    throw StoreError("not a vector store (bad magic)");
  }
  std::size_t pos = 8;
  const auto dim = get_le<std::uint32_t>(bytes, pos);
  const auto dtype = get_le<std::uint32_t>(bytes, pos);
  const auto count = get_le<std::uint64_t>(bytes, pos);
  if (dtype != kDtypeFloat32) throw StoreError("unsupported vector store dtype " + std::to_string(dtype));
  if (dim == 0 && count > 0) throw StoreError("vector store with zero dimension");
  const std::size_t record = 8 + 4 * static_cast<std::size_t>(dim);
  if (count > 0 && (bytes.size() - pos) / record < count) throw StoreError("truncated vector store");
  if (bytes.size() - pos != record * count) throw StoreError("trailing bytes in vector store");
  VectorStore store(dim);
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto hash = get_le<std::uint64_t>(bytes, pos);
    std::vector<float> v(dim);
    for (auto& f : v) f = std::bit_cast<float>(get_le<std::uint32_t>(bytes, pos));
    store.add(hash, EmbeddingVector(std::move(v)));
  }
  return store;
}

VectorStore VectorStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot open vector store " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_bytes(ss.str());
}

void VectorStore::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot write vector store " + tmp);
    const auto bytes = to_bytes();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw StoreError("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string manifest_to_jsonl(std::span<const ManifestEntry> entries) {
  std::string out;
  for (const auto& e : entries) {
    out += json{{"request_id", e.request_id}, {"hash", text::hex64(e.hash)}}.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<ManifestEntry> manifest_from_jsonl(std::string_view lines) {
  std::vector<ManifestEntry> out;
  std::istringstream in{std::string(lines)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line);
    out.push_back({j.at("request_id").get<std::string>(), text::parse_hex64(j.at("hash").get<std::string>())});
  }
  return out;
}

std::string requests_to_jsonl(std::span<const EmbeddingRequest> requests) {
  std::string out;
  for (const auto& r : requests) {
    out += json{{"request_id", r.request_id}, {"text", r.text}, {"start", r.target.start}, {"end", r.target.end}}
               .dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<EmbeddingRequest> requests_from_jsonl(std::string_view lines) {
  std::vector<EmbeddingRequest> out;
  std::istringstream in{std::string(lines)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      EmbeddingRequest r{j.at("request_id").get<std::string>(), j.at("text").get<std::string>(),
                         {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()}};
      if (r.target.start > r.target.end || r.target.end > text::length(r.text)) {
        throw std::invalid_argument("span out of range");
      }
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::runtime_error("request line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<EmbeddingVector> StoreProvider::embed_batch(std::span<const EmbeddingRequest> requests) {
  std::vector<EmbeddingVector> out;
  out.reserve(requests.size());
  for (const auto& r : requests) {
    const auto* v = store_.find(r.content_hash());
    if (!v) {
      throw ProviderError(r.request_id, "no stored vector for request " + r.request_id + " (hash " +
                                            text::hex64(r.content_hash()) + ")");
    }
    out.push_back(*v);
  }
  return out;
}

std::vector<ManifestEntry> embed_into_store(EmbeddingProvider& provider,
                                            std::span<const EmbeddingRequest> requests, VectorStore& store,
                                            std::size_t batch_size) {
  std::vector<ManifestEntry> manifest;
  std::vector<EmbeddingRequest> todo;
  std::unordered_map<std::uint64_t, bool> queued;
  for (const auto& r : requests) {
    const auto h = r.content_hash();
    manifest.push_back({r.request_id, h});
    if (!store.find(h) && queued.emplace(h, true).second) todo.push_back(r);
  }
  const auto vecs = embed_all(provider, todo, batch_size);
  for (std::size_t i = 0; i < todo.size(); ++i) store.add(todo[i].content_hash(), vecs[i]);
  return manifest;
}

// ---------------------------------------------------------------------------
// Model configuration
// ---------------------------------------------------------------------------

std::string_view to_string(UsageMode m) { return m == UsageMode::plain ? "default" : "SUB"; }

std::string_view to_string(SenseMode m) {
  static constexpr std::string_view names[] = {"G0", "G1", "G2", "G3", "E0", "E1", "E2", "E3", "E4"};
  return names[static_cast<int>(m)];
}

SenseMode sense_mode_from_string(std::string_view s) {
  for (SenseMode m : all_sense_modes()) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown sense mode: " + std::string(s));
}

bool is_gloss_mode(SenseMode m) { return static_cast<int>(m) <= static_cast<int>(SenseMode::G3); }

int strategy_of(SenseMode m) {
  const int i = static_cast<int>(m);
  return is_gloss_mode(m) ? i : i - static_cast<int>(SenseMode::E0);
}

inventory::Kind kind_of(SenseMode m) {
  return is_gloss_mode(m) ? inventory::Kind::gloss : inventory::Kind::examples;
}

std::vector<SenseMode> all_sense_modes() {
  return {SenseMode::G0, SenseMode::G1, SenseMode::G2, SenseMode::G3, SenseMode::E0,
          SenseMode::E1, SenseMode::E2, SenseMode::E3, SenseMode::E4};
}

std::string ModelConfig::name() const {
  std::string n(to_string(sense_mode));
  if (usage_mode == UsageMode::sub) n += "_SUB";
  n += "_";
  n += to_string(similarity);
  return n;
}

ModelConfig ModelConfig::parse(std::string_view name, double threshold) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : name) {
    if (c == '_') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  if (parts.size() < 2 || parts.size() > 3) throw std::invalid_argument("bad model name: " + std::string(name));
  ModelConfig c;
  c.sense_mode = sense_mode_from_string(parts.front());
  c.similarity = similarity_from_string(parts.back());
  if (parts.size() == 3) {
    if (parts[1] != "SUB") throw std::invalid_argument("bad model name: " + std::string(name));
    c.usage_mode = UsageMode::sub;
  }
  c.threshold = threshold;
  return c;
}

void validate(const ModelConfig& config, inventory::Source source) {
  if (config.sense_mode == SenseMode::E4 && source != inventory::Source::wordnet_like) {
    throw std::invalid_argument("E4 needs synset members and is only defined for WordNet-like inventories");
  }
  if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) {
    throw std::invalid_argument("threshold must lie in [0, 1]");
  }
}

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

std::string display_form(std::string_view headword) {
  std::string s(headword);
  std::replace(s.begin(), s.end(), '_', ' ');
  return s;
}

Rewritten apply_strategy(int strategy, std::string_view headword, std::string_view sequence,
                         std::optional<text::Span> contained, std::string_view language) {
  if (strategy < 0 || strategy > 4) {
    throw std::invalid_argument("replacement strategy must be in 0..4, got " + std::to_string(strategy));
  }
  const std::size_t seq_len = text::length(sequence);
  if (contained && (contained->start >= contained->end || contained->end > seq_len)) {
    throw std::invalid_argument("contained headword span outside the sequence");
  }
  const std::string hw = display_form(headword);
  const std::size_t hw_len = text::length(hw);
  switch (strategy) {
    case 0:
      return {std::string(sequence), contained.value_or(text::Span{0, seq_len}), 0};
    case 1:
      return {hw + ": " + std::string(sequence), {0, hw_len}, 1};
    case 2:
      return {std::string(sequence) + " (" + hw + ")", {seq_len + 2, seq_len + 2 + hw_len}, 2};
    case 3: {
      const std::string connective = language == "sv" ? ", dvs., " : ", i.e., ";
      const std::size_t start = seq_len + text::length(connective);
      return {std::string(sequence) + connective + hw, {start, start + hw_len}, 3};
    }
    default:
      break;
  }
  if (!contained) {
    Rewritten r = apply_strategy(2, headword, sequence, std::nullopt, language);
    return r;
  }
  return {text::replace(sequence, *contained, hw), {contained->start, contained->start + hw_len}, 4};
}

std::optional<text::Span> locate_member(std::string_view sequence, std::string_view headword,
                                        std::span<const std::string> members) {
  const auto tokens = corpus::tokenize(sequence);
  std::vector<std::string> forms;
  forms.reserve(tokens.size());
  for (const auto& t : tokens) forms.push_back(text::lower(t.form));

  std::vector<std::vector<std::string>> patterns;
  auto add_pattern = [&](std::string_view word) {
    std::vector<std::string> p;
    for (const auto& t : corpus::tokenize(display_form(word))) p.push_back(text::lower(t.form));
    if (!p.empty()) patterns.push_back(std::move(p));
  };
  add_pattern(headword);
  for (const auto& m : members) add_pattern(m);

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& p : patterns) {
      if (i + p.size() > tokens.size()) continue;
      if (std::equal(p.begin(), p.end(), forms.begin() + static_cast<std::ptrdiff_t>(i))) {
        return text::Span{tokens[i].span.start, tokens[i + p.size() - 1].span.end};
      }
    }
  }
  return std::nullopt;
}

EmbeddingRequest usage_request(const corpus::Usage& usage, UsageMode mode) {
  const std::size_t len = text::length(usage.sentence);
  if (usage.target.start >= usage.target.end || usage.target.end > len) {
    throw std::invalid_argument("usage " + usage.usage_id + " has an invalid target span");
  }
  EmbeddingRequest r;
  r.request_id = usage.usage_id + "|" + std::string(to_string(mode));
  if (mode == UsageMode::plain) {
    r.text = usage.sentence;
    r.target = usage.target;
  } else {
    const std::string hw = display_form(usage.headword);
    r.text = text::replace(usage.sentence, usage.target, hw);
    r.target = {usage.target.start, usage.target.start + text::length(hw)};
  }
  return r;
}

std::vector<EmbeddingRequest> sense_requests(const inventory::SenseEntry& sense, std::string_view headword,
                                             SenseMode mode, std::string_view language) {
  std::vector<EmbeddingRequest> out;
  const int strategy = strategy_of(mode);
  auto push = [&](std::string_view sequence, std::size_t index) {
    const auto contained = locate_member(sequence, headword, sense.synonyms);
    auto rw = apply_strategy(strategy, headword, sequence, contained, language);
    out.push_back({sense.sense_id + "|" + std::string(to_string(mode)) + "|" + std::to_string(index),
                   std::move(rw.text), rw.target});
  };
  if (is_gloss_mode(mode)) {
    if (auto g = sense.effective_gloss()) push(*g, 0);
  } else {
    for (std::size_t i = 0; i < sense.examples.size(); ++i) push(sense.examples[i], i);
  }
  return out;
}

std::vector<EmbeddingVector> embed_all(EmbeddingProvider& provider, std::span<const EmbeddingRequest> requests,
                                       std::size_t batch_size) {
  batch_size = std::max<std::size_t>(1, batch_size);
  std::vector<EmbeddingVector> out;
  out.reserve(requests.size());
  for (std::size_t off = 0; off < requests.size(); off += batch_size) {
    const auto n = std::min(batch_size, requests.size() - off);
    auto vecs = provider.embed_batch(requests.subspan(off, n));
    if (vecs.size() != n) {
      throw ProviderError(requests[off].request_id, "provider returned wrong number of vectors");
    }
    for (auto& v : vecs) out.push_back(std::move(v));
  }
  return out;
}

EmbeddingVector embed_usage(const corpus::Usage& usage, UsageMode mode, EmbeddingProvider& provider) {
  const EmbeddingRequest r = usage_request(usage, mode);
  auto vecs = provider.embed_batch(std::span<const EmbeddingRequest>(&r, 1));
  if (vecs.size() != 1) throw ProviderError(r.request_id, "provider returned wrong number of vectors");
  return std::move(vecs.front());
}

std::optional<EmbeddingVector> embed_sense(const inventory::SenseEntry& sense, std::string_view headword,
                                           SenseMode mode, EmbeddingProvider& provider,
                                           std::string_view language) {
  const auto requests = sense_requests(sense, headword, mode, language);
  if (requests.empty()) return std::nullopt;
  const auto vecs = embed_all(provider, requests);
  return mean(vecs);
}

}  // namespace usd::repr
