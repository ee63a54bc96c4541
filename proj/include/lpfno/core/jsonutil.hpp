#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpfno/core/errors.hpp"

namespace lpfno {

/// Rejects any key of `j` that is not in `allowed`, naming the offender.
/// Config parsing is strict everywhere: a typo should fail loudly instead of
/// silently falling back to a default.
inline void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                                const std::string& context) {
    if (!j.is_object())
        throw InvalidArgument(context + ": expected a JSON object, got " + std::string(j.type_name()));
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw InvalidArgument(context + ": unknown key '" + item.key() + "'");
    }
}

inline const nlohmann::json& require_key(const nlohmann::json& j, const std::string& key,
                                         const std::string& context) {
    auto it = j.find(key);
    if (it == j.end()) throw InvalidArgument(context + ": missing required key '" + key + "'");
    return *it;
}

}  // namespace lpfno
