#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mixclt/chain_model.hpp"

namespace mixclt {

/// Parses the chain-spec document: {m, n, initial, transitions, f, name?}.
/// Raises ParseError naming the offending field. The result is not validated.
ChainSpec chain_spec_from_json(const nlohmann::json& doc, const std::string& source = "<json>");
ChainSpec load_chain_spec(const std::filesystem::path& path);
nlohmann::json chain_spec_to_json(const ChainSpec& spec);

}  // namespace mixclt
