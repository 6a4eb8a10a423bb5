#pragma once

#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "powdag/dag_store.hpp"

namespace powdag {

/// Line-delimited JSON: one block per line, insertion order,
/// {"id","payload_hex","refs","miner","parent"}; genesis has parent null.
inline void export_snapshot(const BlockDag& g, std::ostream& out) {
  for (BlockIndex i = 0; i < g.size(); ++i) {
    const Block& b = g.block(i);
    nlohmann::ordered_json j;
    j["id"] = b.id.hex();
    j["payload_hex"] = to_hex(b.payload);
    auto refs = nlohmann::ordered_json::array();
    for (BlockIndex r : b.refs) refs.push_back(g.id(r).hex());
    j["refs"] = std::move(refs);
    j["miner"] = b.miner.value;
    j["parent"] = b.parent == kNoBlock ? nlohmann::ordered_json(nullptr)
                                      : nlohmann::ordered_json(g.id(b.parent).hex());
    out << j.dump() << '\n';
  }
}

enum class ParentPolicy {
  verify,  // recompute every parent and reject records that disagree
  trust,   // keep the recorded parent (fixtures, fault injection)
};

inline BlockDag import_snapshot(std::istream& in, ParentPolicy policy = ParentPolicy::verify) {
  BlockDag g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::parse_error, "snapshot line " + std::to_string(lineno) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    }
    try {
      const BlockId id = BlockId::from_hex(j.at("id").get<std::string>());
      const std::string payload = from_hex(j.at("payload_hex").get<std::string>());
      const MinerId miner{j.at("miner").get<std::uint32_t>()};
      std::vector<BlockIndex> refs;
      for (const auto& r : j.at("refs")) refs.push_back(g.index_of(BlockId::from_hex(r.get<std::string>())));
      if (refs.empty()) {
        if (id != g.id(g.genesis())) fail("only genesis may have no references");
        continue;
      }
      const auto& parent_field = j.at("parent");
      if (parent_field.is_null()) fail("non-genesis block without parent");
      const BlockIndex recorded = g.index_of(BlockId::from_hex(parent_field.get<std::string>()));
      const Block& b = policy == ParentPolicy::trust
                           ? g.insert_block_with_parent(payload, refs, miner, recorded)
                           : g.insert_block(payload, refs, miner);
      if (b.id != id) fail("id does not match block contents");
      if (b.parent != recorded) fail("recorded parent differs from chain selection");
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    }
  }
  return g;
}

}  // namespace powdag
