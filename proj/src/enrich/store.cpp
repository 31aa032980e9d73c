#include "noderag/enrich/store.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "noderag/common/error.hpp"
#include "noderag/common/hash.hpp"

namespace noderag::enrich {
namespace {

static_assert(std::endian::native == std::endian::little, "store format assumes little-endian");
static_assert(sizeof(float) == 4);

using Kind = FormatError::Kind;

void put_u32(std::string& out, std::uint32_t x) {
  char b[4];
  std::memcpy(b, &x, 4);
  out.append(b, 4);
}

class Reader {
public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::string_view take(std::size_t n) {
    if (data_.size() - pos_ < n) throw FormatError(Kind::Truncated, "vector store truncated");
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() {
    std::uint32_t x;
    std::memcpy(&x, take(4).data(), 4);
    return x;
  }
  bool done() const { return pos_ == data_.size(); }

private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

void EmbeddingStore::put(const std::string& id, llmio::Vector v) {
  if (v.size() != dim_) {
    throw Error("embedding for " + id + " has dimension " + std::to_string(v.size()) +
                ", store expects " + std::to_string(dim_));
  }
  if (auto it = slot_.find(id); it != slot_.end()) {
    vectors_[it->second] = std::move(v);
    return;
  }
  slot_.emplace(id, ids_.size());
  ids_.push_back(id);
  vectors_.push_back(std::move(v));
}

bool EmbeddingStore::contains(std::string_view id) const {
  return slot_.find(std::string(id)) != slot_.end();
}

const llmio::Vector& EmbeddingStore::get(std::string_view id) const {
  auto it = slot_.find(std::string(id));
  if (it == slot_.end()) throw Error("no embedding for " + std::string(id));
  return vectors_[it->second];
}

std::string EmbeddingStore::serialize() const {
  std::string out = "HVEC v1 " + std::to_string(dim_) + " " + std::to_string(ids_.size()) + " " +
                    model_tag_ + "\n";
  std::vector<std::size_t> order(ids_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ids_[a] < ids_[b]; });
  for (auto i : order) {
    put_u32(out, static_cast<std::uint32_t>(ids_[i].size()));
    out += ids_[i];
    out.append(reinterpret_cast<const char*>(vectors_[i].data()), dim_ * sizeof(float));
  }
  const auto digest = sha256(out);
  out.append(reinterpret_cast<const char*>(digest.data()), digest.size());
  return out;
}

EmbeddingStore EmbeddingStore::deserialize(std::string_view bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string_view::npos) throw FormatError(Kind::Truncated, "vector store header");
  std::istringstream header{std::string(bytes.substr(0, nl))};
  std::string magic, version, tag;
  std::size_t dim = 0, count = 0;
  header >> magic >> version;
  if (magic != "HVEC") throw FormatError(Kind::Malformed, "not a vector store");
  if (version != "v1") throw FormatError(Kind::VersionMismatch, "vector store version " + version);
  if (!(header >> dim >> count >> tag)) {
    throw FormatError(Kind::Malformed, "vector store header fields");
  }
  if (bytes.size() < nl + 1 + 32) throw FormatError(Kind::Truncated, "vector store truncated");

  const auto body = bytes.substr(0, bytes.size() - 32);
  const auto digest = sha256(body);
  if (std::memcmp(digest.data(), bytes.data() + body.size(), 32) != 0) {
    // A cut-off file usually fails here too; tell the two apart by size.
    std::size_t expected = nl + 1 + 32;
    Reader probe(body.substr(nl + 1));
    try {
      for (std::size_t i = 0; i < count; ++i) {
        const auto len = probe.u32();
        probe.take(len);
        probe.take(dim * 4);
        expected += 4 + len + dim * 4;
      }
    } catch (const FormatError&) {
      throw FormatError(Kind::Truncated, "vector store truncated");
    }
    if (bytes.size() < expected) throw FormatError(Kind::Truncated, "vector store truncated");
    throw FormatError(Kind::ChecksumMismatch, "vector store checksum mismatch");
  }

  EmbeddingStore store(tag, dim);
  Reader r(body.substr(nl + 1));
  for (std::size_t i = 0; i < count; ++i) {
    const auto len = r.u32();
    std::string id(r.take(len));
    llmio::Vector v(dim);
    std::memcpy(v.data(), r.take(dim * 4).data(), dim * 4);
    store.put(id, std::move(v));
  }
  if (!r.done()) throw FormatError(Kind::Malformed, "trailing bytes in vector store");
  return store;
}

void EmbeddingStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  const auto bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

bool EmbeddingStore::operator==(const EmbeddingStore& other) const {
  if (model_tag_ != other.model_tag_ || dim_ != other.dim_ || size() != other.size()) return false;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!other.contains(ids_[i]) || other.get(ids_[i]) != vectors_[i]) return false;
  }
  return true;
}

}  // namespace noderag::enrich
