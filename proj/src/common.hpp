#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace evselca {

// Feasibility comparisons on schedule quantities (minutes).
inline constexpr double kFeasTol = 1e-6;
// Fixed-point stabilization tolerance for FCFS waits (minutes).
inline constexpr double kWaitTol = 1e-9;

// Bad data supplied by the caller (parse errors, invariant violations).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Model is provably infeasible for the request (not a usage error).
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Configured search/emission cap exceeded; refusal, never truncation.
class LimitError : public std::runtime_error {
public:
    explicit LimitError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a64_mix(std::uint64_t value, std::uint64_t h) {
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xffu;
        h *= kFnvPrime;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xfu];
        v >>= 4;
    }
    return out;
}

}  // namespace evselca
