#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace hirag::http {

using Headers = std::vector<std::pair<std::string, std::string>>;

/// POST a JSON body and parse a JSON reply. Any connection failure, timeout,
/// non-2xx status, or unparseable body raises TransportError.
nlohmann::json post_json(const std::string& url, const Headers& headers,
                         const nlohmann::json& body, std::chrono::milliseconds timeout);

/// Value of an environment variable, or empty when unset or name is empty.
std::string env_or_empty(const std::string& name);

}  // namespace hirag::http
