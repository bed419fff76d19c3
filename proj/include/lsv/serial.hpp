#pragma once

#include <json.hpp>
#include <string>

#include "lsv/stream.hpp"

namespace lsv {

using Json = nlohmann::json;

/// Canonical state snapshot: location names sorted lexicographically,
/// permission fractions as "num/den" strings.
Json state_to_json(const State& s);
State state_from_json(const Json& j);

/// One state snapshot per line.
std::string stream_to_jsonl(const Stream& s);
Stream stream_from_jsonl(const std::string& text);

Json value_to_json(const Value& v);
Value value_from_json(const Json& j);

std::string fraction_to_string(const Fraction& f);
Fraction fraction_from_string(const std::string& s);

}  // namespace lsv
