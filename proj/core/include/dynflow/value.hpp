// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <variant>

namespace dynflow {

/// Runtime values: bounded signed integers and Booleans. Security events
/// always hold Booleans; program variables may hold either.
using Value = std::variant<int64_t, bool>;

inline bool is_int(const Value& v) { return std::holds_alternative<int64_t>(v); }
inline bool is_bool(const Value& v) { return std::holds_alternative<bool>(v); }
inline int64_t as_int(const Value& v) { return std::get<int64_t>(v); }
inline bool as_bool(const Value& v) { return std::get<bool>(v); }

inline std::string to_string(const Value& v) {
    if (is_bool(v))
        return as_bool(v) ? "true" : "false";
    return std::to_string(as_int(v));
}

} // namespace dynflow
