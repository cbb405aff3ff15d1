#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "driftbench/series.hpp"

namespace driftbench {

/// A configuration problem tied to a JSON pointer such as "/detector/params/q".
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& message)
        : Error(fmt::format("{}: {}", path.empty() ? "/" : path, message)),
          path_(std::move(path)) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

namespace json_fields {

inline std::string child(const std::string& path, std::string_view key) {
    return fmt::format("{}/{}", path, key);
}

inline std::string child(const std::string& path, std::size_t index) {
    return fmt::format("{}/{}", path, index);
}

inline const nlohmann::json& require_object(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    return j;
}

template <typename T>
T convert(const nlohmann::json& j, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
        if (!j.is_boolean()) throw ConfigError(path, "expected a boolean");
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
        if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
            throw ConfigError(path, "expected a non-negative integer");
        }
    } else if constexpr (std::is_integral_v<T>) {
        if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!j.is_number()) throw ConfigError(path, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!j.is_string()) throw ConfigError(path, "expected a string");
    }
    return j.get<T>();
}

template <typename T>
T required(const nlohmann::json& obj, std::string_view key, const std::string& path) {
    require_object(obj, path);
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(child(path, key), "missing required field");
    return convert<T>(*it, child(path, key));
}

template <typename T>
T optional(const nlohmann::json& obj, std::string_view key, const std::string& path, T fallback) {
    require_object(obj, path);
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return convert<T>(*it, child(path, key));
}

}  // namespace json_fields
}  // namespace driftbench
