#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sensaptic/wire.hpp"

namespace sensaptic {

struct ConformanceVector {
  std::string name;
  Message message;
};

// The fixed corpus shipped in data/conformance_vectors.json.
std::vector<ConformanceVector> conformance_corpus();

nlohmann::json message_to_json(const Message& message);
Message message_from_json(const nlohmann::json& doc);

// {"vectors": [{"name", "hex", "message"}...]}
nlohmann::json conformance_json();

}  // namespace sensaptic
