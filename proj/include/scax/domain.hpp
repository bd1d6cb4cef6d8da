#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "scax/common.hpp"

namespace scax {

// An ordered finite list of values. The declaration order of the values is
// the canonical enumeration order used by every exhaustive scan, so it is
// part of the domain's identity.
class Domain {
public:
    Domain() = default;

    Domain(std::string name, std::vector<Value> values, bool boolean_display = false)
        : name_(std::move(name)), values_(std::move(values)), boolean_(boolean_display) {}

    static Domain boolean(std::string name = "B") {
        return Domain(std::move(name), {0, 1}, true);
    }

    static Domain range(std::string name, Value lo, Value hi) {
        std::vector<Value> v;
        for (Value x = lo; x <= hi; ++x) v.push_back(x);
        return Domain(std::move(name), std::move(v));
    }

    const std::string& name() const { return name_; }
    const std::vector<Value>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    Value value_at(int ordinal) const { return values_[static_cast<std::size_t>(ordinal)]; }
    bool boolean_display() const { return boolean_; }

    std::optional<int> ordinal_of(Value v) const {
        auto it = std::find(values_.begin(), values_.end(), v);
        if (it == values_.end()) return std::nullopt;
        return static_cast<int>(it - values_.begin());
    }

    bool contains(Value v) const { return ordinal_of(v).has_value(); }

    Diagnostics validate() const {
        Diagnostics out;
        if (values_.empty())
            out.push_back({Severity::Error, "empty-domain", "domain '" + name_ + "' has no values"});
        auto sorted = values_;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            out.push_back({Severity::Error, "duplicate-domain-value",
                           "domain '" + name_ + "' lists a value twice"});
        return out;
    }

    std::string display(Value v) const {
        if (boolean_ && (v == 0 || v == 1)) return v == 1 ? "T" : "F";
        return std::to_string(v);
    }

    bool same_values(const Domain& other) const { return values_ == other.values_; }

    friend bool operator==(const Domain& a, const Domain& b) {
        return a.name_ == b.name_ && a.values_ == b.values_ && a.boolean_ == b.boolean_;
    }

private:
    std::string name_;
    std::vector<Value> values_;
    bool boolean_ = false;
};

} // namespace scax
