#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace scax {

// All model values are bounded integers. Booleans are the two-element
// domain {0, 1} with surface literals F/T.
using Value = std::int64_t;

// Thrown by operations whose preconditions are violated. `kind` is a
// stable machine-readable tag ("unknown-variable", "not-hard", ...).
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

[[noreturn]] inline void raise(const std::string& kind, const std::string& message) {
    throw Error(kind, message);
}

enum class Severity { Error, Warning, Info };

// A positioned validation or parse message. Line/column are 1-based;
// 0 means "no position" (programmatically built objects).
struct Diagnostic {
    Severity severity = Severity::Error;
    std::string code;     // "syntax-error", "domain-closure-violation", ...
    std::string message;
    int line = 0;
    int col = 0;

    std::string str() const {
        std::string head;
        switch (severity) {
        case Severity::Error: head = "error"; break;
        case Severity::Warning: head = "warning"; break;
        case Severity::Info: head = "info"; break;
        }
        std::string pos;
        if (line > 0) pos = std::to_string(line) + ":" + std::to_string(col) + ": ";
        return pos + head + " [" + code + "] " + message;
    }
};

using Diagnostics = std::vector<Diagnostic>;

inline bool has_errors(const Diagnostics& diags) {
    for (const auto& d : diags)
        if (d.severity == Severity::Error) return true;
    return false;
}

inline Value checked_add(Value a, Value b) {
    Value r;
    if (__builtin_add_overflow(a, b, &r)) raise("overflow", "integer overflow in +");
    return r;
}

inline Value checked_sub(Value a, Value b) {
    Value r;
    if (__builtin_sub_overflow(a, b, &r)) raise("overflow", "integer overflow in -");
    return r;
}

inline Value checked_mul(Value a, Value b) {
    Value r;
    if (__builtin_mul_overflow(a, b, &r)) raise("overflow", "integer overflow in *");
    return r;
}

// Euclidean remainder: result always in [0, k).
inline Value floor_mod(Value a, Value k) {
    Value r = a % k;
    if (r < 0) r += k;
    return r;
}

enum class VarKind { Endogenous, Exogenous };

// Position of a variable inside a model: kind selects the endogenous or
// exogenous list, index is the position in canonical (name-sorted) order.
struct VarRef {
    VarKind kind = VarKind::Endogenous;
    int index = 0;

    friend bool operator==(const VarRef&, const VarRef&) = default;
    friend auto operator<=>(const VarRef& a, const VarRef& b) {
        if (a.kind != b.kind)
            return a.kind == VarKind::Endogenous ? std::strong_ordering::less
                                                 : std::strong_ordering::greater;
        return a.index <=> b.index;
    }
};

// Mixed-radix index space over an ordered list of finite domain sizes.
// Rank 0 is the all-first-values tuple; the first position is the most
// significant digit, so ascending rank order is lexicographic order.
class JointSpace {
public:
    JointSpace() = default;

    explicit JointSpace(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
        strides_.resize(sizes_.size());
        std::size_t acc = 1;
        for (std::size_t i = sizes_.size(); i-- > 0;) {
            strides_[i] = acc;
            if (sizes_[i] == 0) raise("internal", "empty domain in joint space");
            if (acc > kMaxStates / sizes_[i])
                raise("state-space-too-large",
                      "joint domain exceeds the exhaustive-checking limit");
            acc *= sizes_[i];
        }
        total_ = acc;
    }

    std::size_t arity() const { return sizes_.size(); }
    std::size_t size() const { return total_; }
    std::size_t size_at(std::size_t i) const { return sizes_[i]; }

    std::uint64_t rank(const std::vector<int>& ordinals) const {
        std::uint64_t r = 0;
        for (std::size_t i = 0; i < sizes_.size(); ++i)
            r += static_cast<std::uint64_t>(ordinals[i]) * strides_[i];
        return r;
    }

    void unrank(std::uint64_t r, std::vector<int>& out) const {
        out.resize(sizes_.size());
        for (std::size_t i = 0; i < sizes_.size(); ++i) {
            out[i] = static_cast<int>(r / strides_[i]);
            r %= strides_[i];
        }
    }

    std::vector<int> unrank(std::uint64_t r) const {
        std::vector<int> out;
        unrank(r, out);
        return out;
    }

    // Digit of `r` at position i, without materializing the whole tuple.
    int digit(std::uint64_t r, std::size_t i) const {
        return static_cast<int>((r / strides_[i]) % sizes_[i]);
    }

    // Odometer-style increment; returns false after the last tuple.
    bool next(std::vector<int>& ordinals) const {
        for (std::size_t i = sizes_.size(); i-- > 0;) {
            if (++ordinals[i] < static_cast<int>(sizes_[i])) return true;
            ordinals[i] = 0;
        }
        return false;
    }

    static constexpr std::size_t kMaxStates = std::size_t(1) << 26;

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 1;
};

} // namespace scax
