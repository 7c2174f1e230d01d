#pragma once

#include <algorithm>
#include <compare>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "simlearn/working_memory.hpp"

namespace simlearn {

// Closed where-learning vocabulary. Enumerator order is also the order in
// which discriminating predicates are tried during specialization.
enum class PredicateKind {
    op_equals,
    denominators_equal,
    denominators_differ,
    box_checked,
    field_filled,
    field_empty,
};

struct Predicate {
    PredicateKind kind = PredicateKind::field_filled;
    Role role = Role::done;  // op_equals / field_filled / field_empty
    std::string symbol;      // op_equals only

    static Predicate op_equals(Role role, std::string symbol) {
        return {PredicateKind::op_equals, role, std::move(symbol)};
    }
    static Predicate denominators_equal() { return {PredicateKind::denominators_equal, Role::done, {}}; }
    static Predicate denominators_differ() { return {PredicateKind::denominators_differ, Role::done, {}}; }
    static Predicate box_checked() { return {PredicateKind::box_checked, Role::check_convert, {}}; }
    static Predicate field_filled(Role role) { return {PredicateKind::field_filled, role, {}}; }
    static Predicate field_empty(Role role) { return {PredicateKind::field_empty, role, {}}; }

    friend auto operator<=>(const Predicate&, const Predicate&) = default;
    friend bool operator==(const Predicate&, const Predicate&) = default;

    std::string str() const {
        switch (kind) {
            case PredicateKind::op_equals:
                if (role == Role::op) return "op_equals(" + symbol + ")";
                return "op_equals(" + std::string(role_name(role)) + "," + symbol + ")";
            case PredicateKind::denominators_equal:
                return "denominators_equal";
            case PredicateKind::denominators_differ:
                return "denominators_differ";
            case PredicateKind::box_checked:
                return "box_checked";
            case PredicateKind::field_filled:
                return "field_filled(" + std::string(role_name(role)) + ")";
            case PredicateKind::field_empty:
                return "field_empty(" + std::string(role_name(role)) + ")";
        }
        return {};
    }

    static std::optional<Predicate> parse(std::string_view text) {
        if (text == "denominators_equal") return denominators_equal();
        if (text == "denominators_differ") return denominators_differ();
        if (text == "box_checked") return box_checked();
        const auto open = text.find('(');
        if (open == std::string_view::npos || text.back() != ')') return std::nullopt;
        const std::string_view head = text.substr(0, open);
        const std::string_view arg = text.substr(open + 1, text.size() - open - 2);
        if (head == "op_equals") {
            const auto comma = arg.find(',');
            if (comma == std::string_view::npos) return op_equals(Role::op, std::string(arg));
            auto role = parse_role(arg.substr(0, comma));
            if (!role) return std::nullopt;
            return op_equals(*role, std::string(arg.substr(comma + 1)));
        }
        auto role = parse_role(arg);
        if (!role) return std::nullopt;
        if (head == "field_filled") return field_filled(*role);
        if (head == "field_empty") return field_empty(*role);
        return std::nullopt;
    }
};

// Every predicate of the vocabulary that holds in wm.
inline std::set<Predicate> observe(const WorkingMemory& wm) {
    std::set<Predicate> out;
    for (const Field& f : wm.fields()) {
        const FieldState& s = f.state;
        switch (field_kind(s.role)) {
            case FieldKind::symbol:
                if (s.value) out.insert(Predicate::op_equals(s.role, s.value->text()));
                break;
            case FieldKind::checkbox:
                out.insert(s.filled() ? Predicate::box_checked() : Predicate::field_empty(s.role));
                break;
            case FieldKind::button:
                break;
            case FieldKind::number:
                out.insert(s.filled() ? Predicate::field_filled(s.role) : Predicate::field_empty(s.role));
                break;
        }
    }
    const auto d1 = wm.number(Role::den1);
    const auto d2 = wm.number(Role::den2);
    if (d1 && d2) out.insert(*d1 == *d2 ? Predicate::denominators_equal() : Predicate::denominators_differ());
    return out;
}

inline bool holds(const Predicate& p, const std::set<Predicate>& observed) { return observed.contains(p); }

// Conjunction of predicates. Stored sorted in vocabulary order.
class ConditionSet {
public:
    ConditionSet() = default;
    explicit ConditionSet(std::set<Predicate> predicates) : predicates_(std::move(predicates)) {}

    const std::set<Predicate>& predicates() const noexcept { return predicates_; }
    std::size_t size() const noexcept { return predicates_.size(); }
    bool contains(const Predicate& p) const { return predicates_.contains(p); }

    bool matches(const std::set<Predicate>& observed) const {
        return std::includes(observed.begin(), observed.end(), predicates_.begin(), predicates_.end());
    }
    bool matches(const WorkingMemory& wm) const { return matches(observe(wm)); }

    // Drop-literal generalization: keep only predicates that hold.
    // Returns the number of predicates removed.
    std::size_t retain_satisfied(const std::set<Predicate>& observed) {
        std::size_t removed = 0;
        for (auto it = predicates_.begin(); it != predicates_.end();) {
            if (!observed.contains(*it)) {
                it = predicates_.erase(it);
                ++removed;
            } else {
                ++it;
            }
        }
        return removed;
    }

    void insert(const Predicate& p) { predicates_.insert(p); }

    bool subset_of(const ConditionSet& other) const {
        return std::includes(other.predicates_.begin(), other.predicates_.end(), predicates_.begin(),
                             predicates_.end());
    }

    std::vector<std::string> strings() const {
        std::vector<std::string> out;
        out.reserve(predicates_.size());
        for (const auto& p : predicates_) out.push_back(p.str());
        return out;
    }

    friend bool operator==(const ConditionSet&, const ConditionSet&) = default;

private:
    std::set<Predicate> predicates_;
};

}  // namespace simlearn
