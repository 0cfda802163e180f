#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace selfx {

/// Identifier shared by instances and links. Engine-assigned, never reused
/// within the lifetime of a knowledge base.
struct FactId {
    std::uint64_t value = 0;
    auto operator<=>(const FactId&) const = default;
};

using InstanceId = FactId;
using LinkId = FactId;

struct ClassId {
    std::uint32_t value = 0;
    auto operator<=>(const ClassId&) const = default;
};

struct RoleId {
    std::uint32_t value = 0;
    auto operator<=>(const RoleId&) const = default;
};

struct DerivationId {
    std::uint64_t value = 0;
    auto operator<=>(const DerivationId&) const = default;
};

enum class MetaKind { Entity, Relation, Attribute };
enum class Origin { Asserted, Inferred };

std::string_view to_string(MetaKind kind);
std::string_view to_string(Origin origin);

/// Marker for an attribute whose value is known to be unknown (the camera's
/// initial image quality). Distinct from any floating point NaN.
struct NotANumber {
    bool operator==(const NotANumber&) const = default;
};

using Value = std::variant<std::string, double, bool, NotANumber>;

inline bool is_text(const Value& v) { return std::holds_alternative<std::string>(v); }
inline bool is_number(const Value& v) { return std::holds_alternative<double>(v); }
inline bool is_bool(const Value& v) { return std::holds_alternative<bool>(v); }
inline bool is_nan(const Value& v) { return std::holds_alternative<NotANumber>(v); }

/// Maps a floating point NaN onto the sentinel; other values pass through.
Value normalize(Value v);

/// Human readable rendering: text verbatim, shortest round-trip decimal for
/// numbers, `true`/`false`, `nan`.
std::string display(const Value& v);

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double x);

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace selfx

template <>
struct std::hash<selfx::FactId> {
    std::size_t operator()(const selfx::FactId& id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};
