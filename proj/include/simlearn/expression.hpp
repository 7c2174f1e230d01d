#pragma once

#include <algorithm>
#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simlearn/rational.hpp"
#include "simlearn/working_memory.hpp"

namespace simlearn {

enum class Op { add, subtract, multiply, divide };

inline constexpr std::array<Op, 4> kOps{Op::add, Op::subtract, Op::multiply, Op::divide};

inline std::string_view op_name(Op op) {
    switch (op) {
        case Op::add:
            return "add";
        case Op::subtract:
            return "subtract";
        case Op::multiply:
            return "multiply";
        case Op::divide:
            return "divide";
    }
    return "?";
}

inline bool is_commutative(Op op) { return op == Op::add || op == Op::multiply; }

inline std::optional<Rational> apply_op(Op op, const Rational& a, const Rational& b) {
    switch (op) {
        case Op::add:
            return checked_add(a, b);
        case Op::subtract:
            return checked_sub(a, b);
        case Op::multiply:
            return checked_mul(a, b);
        case Op::divide:
            return checked_div(a, b);
    }
    return std::nullopt;
}

// Immutable expression tree over field roles. Leaves reference a role (copy)
// or hold a literal constant; inner nodes apply one arithmetic operator.
class Expr {
public:
    enum class Kind { field, constant, binary };

    static Expr field(Role role) {
        Expr e;
        e.node_ = std::make_shared<Node>(Node{Kind::field, role, Rational{}, Op::add, {}, {}, 0});
        return e;
    }

    static Expr constant(const Rational& value) {
        Expr e;
        e.node_ = std::make_shared<Node>(Node{Kind::constant, Role::done, value, Op::add, {}, {}, 0});
        return e;
    }

    static Expr binary(Op op, const Expr& lhs, const Expr& rhs) {
        Expr e;
        e.node_ = std::make_shared<Node>(
            Node{Kind::binary, Role::done, Rational{}, op, lhs.node_, rhs.node_, 1 + std::max(lhs.depth(), rhs.depth())});
        return e;
    }

    Kind kind() const noexcept { return node_->kind; }
    Role role() const noexcept { return node_->role; }
    const Rational& value() const noexcept { return node_->value; }
    Op op() const noexcept { return node_->op; }
    Expr lhs() const { return Expr(node_->lhs); }
    Expr rhs() const { return Expr(node_->rhs); }
    int depth() const noexcept { return node_->depth; }

    // Role references in left-to-right order.
    std::vector<Role> leaves() const {
        std::vector<Role> out;
        collect(*node_, out);
        return out;
    }

    // Evaluates against the numeric values visible in wm. nullopt when a
    // referenced field is absent/empty/non-numeric or on division by zero.
    std::optional<Rational> evaluate(const WorkingMemory& wm) const { return eval(*node_, wm); }

    // "(multiply den1 den2)", "num1", "6"
    std::string sexpr() const { return render(*node_, false); }

    // Like sexpr() but with commutative operands sorted, so that equal
    // procedures compare equal as strings.
    std::string normalized() const { return render(*node_, true); }

    friend bool operator==(const Expr& a, const Expr& b) { return a.sexpr() == b.sexpr(); }

    static std::optional<Expr> parse(std::string_view text) {
        std::size_t pos = 0;
        auto e = parse_at(text, pos);
        skip_ws(text, pos);
        if (!e || pos != text.size()) return std::nullopt;
        return e;
    }

private:
    struct Node {
        Kind kind;
        Role role;
        Rational value;
        Op op;
        std::shared_ptr<const Node> lhs;
        std::shared_ptr<const Node> rhs;
        int depth;
    };

    Expr() = default;
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    std::shared_ptr<const Node> node_;

    static void collect(const Node& n, std::vector<Role>& out) {
        if (n.kind == Kind::field) out.push_back(n.role);
        if (n.kind == Kind::binary) {
            collect(*n.lhs, out);
            collect(*n.rhs, out);
        }
    }

    static std::optional<Rational> eval(const Node& n, const WorkingMemory& wm) {
        switch (n.kind) {
            case Kind::field:
                return wm.number(n.role);
            case Kind::constant:
                return n.value;
            case Kind::binary: {
                auto a = eval(*n.lhs, wm);
                if (!a) return std::nullopt;
                auto b = eval(*n.rhs, wm);
                if (!b) return std::nullopt;
                return apply_op(n.op, *a, *b);
            }
        }
        return std::nullopt;
    }

    static std::string render(const Node& n, bool normalize) {
        switch (n.kind) {
            case Kind::field:
                return std::string(role_name(n.role));
            case Kind::constant:
                return n.value.str();
            case Kind::binary: {
                std::string a = render(*n.lhs, normalize);
                std::string b = render(*n.rhs, normalize);
                if (normalize && is_commutative(n.op) && b < a) std::swap(a, b);
                return "(" + std::string(op_name(n.op)) + " " + a + " " + b + ")";
            }
        }
        return {};
    }

    static void skip_ws(std::string_view t, std::size_t& pos) {
        while (pos < t.size() && t[pos] == ' ') ++pos;
    }

    static std::optional<Expr> parse_at(std::string_view t, std::size_t& pos) {
        skip_ws(t, pos);
        if (pos >= t.size()) return std::nullopt;
        if (t[pos] == '(') {
            ++pos;
            const std::size_t start = pos;
            while (pos < t.size() && t[pos] != ' ') ++pos;
            const std::string_view name = t.substr(start, pos - start);
            std::optional<Op> op;
            for (Op o : kOps)
                if (op_name(o) == name) op = o;
            if (!op) return std::nullopt;
            auto lhs = parse_at(t, pos);
            if (!lhs) return std::nullopt;
            auto rhs = parse_at(t, pos);
            if (!rhs) return std::nullopt;
            skip_ws(t, pos);
            if (pos >= t.size() || t[pos] != ')') return std::nullopt;
            ++pos;
            return binary(*op, *lhs, *rhs);
        }
        const std::size_t start = pos;
        while (pos < t.size() && t[pos] != ' ' && t[pos] != ')') ++pos;
        const std::string_view atom = t.substr(start, pos - start);
        if (auto role = parse_role(atom)) return field(*role);
        if (auto value = Rational::parse(atom)) return constant(*value);
        return std::nullopt;
    }
};

}  // namespace simlearn
