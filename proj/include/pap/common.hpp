#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pap {

/// Raised when a caller breaks an operation's precondition.
class contract_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a physical quantity falls outside the model's domain.
class model_domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline void require(bool condition, std::string_view what)
{
    if (!condition)
        throw contract_error(std::string(what));
}

inline void require_finite(double value, std::string_view what)
{
    if (!std::isfinite(value))
        throw contract_error(std::string(what) + " must be finite");
}

inline void require_positive(double value, std::string_view what)
{
    if (!(value > 0.0) || !std::isfinite(value))
        throw contract_error(std::string(what) + " must be positive and finite");
}

template <typename T>
constexpr T square(T x) { return x * x; }

/// 64-bit FNV-1a; stable across platforms, used for scenario fingerprints.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL)
{
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace pap
