#include "noderag/hgraph/persistence.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "noderag/common/error.hpp"
#include "noderag/common/hash.hpp"

namespace noderag::hgraph {
namespace {

using nlohmann::json;
using Kind = FormatError::Kind;

json node_record(const HeteroNode& n) {
  json j = json::object();
  j["id"] = n.id;
  j["type"] = std::string(1, type_code(n.type));
  j["title"] = n.title;
  j["content"] = n.content;
  j["source_chunk"] = n.source_chunk ? json(*n.source_chunk) : json(nullptr);
  j["community"] = n.community ? json(*n.community) : json(nullptr);
  j["hrid"] = n.hrid;
  return j;
}

json edge_record(const std::string& u, const std::string& v, const Edge& e) {
  json kinds = json::array();
  std::vector<std::string> names;
  for (auto k : kAllEdgeKinds) {
    if (e.kinds.contains(k)) names.emplace_back(kind_name(k));
  }
  std::sort(names.begin(), names.end());
  for (auto& n : names) kinds.push_back(n);
  json j = json::object();
  j["u"] = u;
  j["v"] = v;
  j["weight"] = e.weight;
  j["kinds"] = kinds;
  return j;
}

std::string header_line() {
  return std::string(kGraphMagic) + " v" + std::to_string(kGraphFormatVersion);
}

HeteroNode parse_node(const json& j) {
  HeteroNode n;
  n.id = j.at("id").get<std::string>();
  n.type = type_from_code(j.at("type").get<std::string>());
  n.title = j.at("title").get<std::string>();
  n.content = j.at("content").get<std::string>();
  if (!j.at("source_chunk").is_null()) n.source_chunk = j["source_chunk"].get<std::string>();
  if (!j.at("community").is_null()) n.community = j["community"].get<std::int32_t>();
  n.hrid = j.at("hrid").get<std::uint32_t>();
  return n;
}

}  // namespace

std::string serialize(const HeteroGraph& g) {
  std::string out = header_line();
  out.push_back('\n');
  for (const auto& n : g.nodes()) {
    out += node_record(n).dump();
    out.push_back('\n');
  }

  struct Row {
    const std::string* u;
    const std::string* v;
    const Edge* e;
  };
  std::vector<Row> rows;
  rows.reserve(g.edge_count());
  for (const auto& e : g.edges()) {
    const auto* a = &g.node(e.a).id;
    const auto* b = &g.node(e.b).id;
    if (*b < *a) std::swap(a, b);
    rows.push_back({a, b, &e});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
    return std::tie(*x.u, *x.v) < std::tie(*y.u, *y.v);
  });
  for (const auto& r : rows) {
    out += edge_record(*r.u, *r.v, *r.e).dump();
    out.push_back('\n');
  }

  const auto digest = sha256_hex(out);
  out += "CHECKSUM " + digest + "\n";
  return out;
}

HeteroGraph deserialize(std::string_view bytes) {
  const auto first_nl = bytes.find('\n');
  if (first_nl == std::string_view::npos) {
    throw FormatError(Kind::Truncated, "hgraph: missing header line");
  }
  const auto header = bytes.substr(0, first_nl);
  const std::string magic_prefix = std::string(kGraphMagic) + " v";
  if (header.substr(0, magic_prefix.size()) != magic_prefix) {
    throw FormatError(Kind::Malformed, "hgraph: bad magic");
  }
  if (header != header_line()) {
    throw FormatError(Kind::VersionMismatch,
                      "hgraph: unsupported version '" + std::string(header) + "'");
  }

  // Locate the checksum trailer: the last line must be "CHECKSUM <hex>".
  if (bytes.size() < 2 || bytes.back() != '\n') {
    throw FormatError(Kind::Truncated, "hgraph: file does not end with a newline");
  }
  constexpr std::string_view kChecksum = "CHECKSUM ";
  const auto body_end = bytes.rfind('\n', bytes.size() - 2);
  if (body_end == std::string_view::npos) {
    throw FormatError(Kind::Truncated, "hgraph: missing checksum trailer");
  }
  const auto trailer = bytes.substr(body_end + 1, bytes.size() - body_end - 2);
  if (trailer.substr(0, kChecksum.size()) != kChecksum) {
    throw FormatError(Kind::Truncated, "hgraph: missing checksum trailer");
  }
  const auto body = bytes.substr(0, body_end + 1);
  if (sha256_hex(body) != trailer.substr(kChecksum.size())) {
    throw FormatError(Kind::ChecksumMismatch, "hgraph: checksum mismatch");
  }

  HeteroGraph g;
  bool in_edges = false;
  std::size_t pos = first_nl + 1;
  while (pos < body.size()) {
    const auto nl = body.find('\n', pos);
    const auto line = body.substr(pos, nl - pos);
    pos = nl + 1;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(Kind::Malformed, std::string("hgraph: bad record: ") + e.what());
    }
    try {
      if (j.contains("u")) {
        in_edges = true;
        const auto u = g.index(j.at("u").get<std::string>());
        const auto v = g.index(j.at("v").get<std::string>());
        EdgeKindSet kinds;
        for (const auto& k : j.at("kinds")) kinds.insert(kind_from_name(k.get<std::string>()));
        g.restore_edge(u, v, j.at("weight").get<std::uint32_t>(), kinds);
      } else {
        if (in_edges) throw FormatError(Kind::Malformed, "hgraph: node record after edges");
        auto node = parse_node(j);
        const auto expected = static_cast<std::uint32_t>(g.node_count());
        if (node.hrid != expected) {
          throw FormatError(Kind::Malformed, "hgraph: node records out of hrid order");
        }
        const auto id = node.id;
        if (g.contains(id)) throw FormatError(Kind::Malformed, "hgraph: duplicate node " + id);
        g.add_node(std::move(node));
      }
    } catch (const json::exception& e) {
      throw FormatError(Kind::Malformed, std::string("hgraph: bad record: ") + e.what());
    }
  }
  return g;
}

void save(const HeteroGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const auto bytes = serialize(g);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

HeteroGraph load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

}  // namespace noderag::hgraph
