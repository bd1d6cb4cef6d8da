#pragma once

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "scax/common.hpp"

namespace scax {

// Expression trees for structural equations, replacement functions and
// tau maps. Semantics are total over integers: logical operators read any
// nonzero operand as true and produce 0/1, so boolean and arithmetic
// domains share one value type.
//
// `[a = b]` (equality test / indicator) is a single node producing 0/1.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Op { Const, Var, Not, Neg, And, Or, Xor, Eq, Add, Sub, Mul, Mod, Ite };

    Op op = Op::Const;
    Value value = 0;          // Const
    std::string var;          // Var
    Value modulus = 0;        // Mod
    std::vector<ExprPtr> args;
};

namespace expr {

inline ExprPtr constant(Value v) {
    auto e = std::make_shared<Expr>();
    e->op = Expr::Op::Const;
    e->value = v;
    return e;
}

inline ExprPtr var(std::string name) {
    auto e = std::make_shared<Expr>();
    e->op = Expr::Op::Var;
    e->var = std::move(name);
    return e;
}

inline ExprPtr unary(Expr::Op op, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->args = {std::move(a)};
    return e;
}

inline ExprPtr binary(Expr::Op op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->args = {std::move(a), std::move(b)};
    return e;
}

inline ExprPtr lnot(ExprPtr a) { return unary(Expr::Op::Not, std::move(a)); }

// Negated literals fold to negative constants so the canonical printer
// and the parser agree on one representation.
inline ExprPtr neg(ExprPtr a) {
    if (a->op == Expr::Op::Const) return constant(-a->value);
    return unary(Expr::Op::Neg, std::move(a));
}
inline ExprPtr land(ExprPtr a, ExprPtr b) { return binary(Expr::Op::And, std::move(a), std::move(b)); }
inline ExprPtr lor(ExprPtr a, ExprPtr b) { return binary(Expr::Op::Or, std::move(a), std::move(b)); }
inline ExprPtr lxor(ExprPtr a, ExprPtr b) { return binary(Expr::Op::Xor, std::move(a), std::move(b)); }
inline ExprPtr eq(ExprPtr a, ExprPtr b) { return binary(Expr::Op::Eq, std::move(a), std::move(b)); }
inline ExprPtr add(ExprPtr a, ExprPtr b) { return binary(Expr::Op::Add, std::move(a), std::move(b)); }
inline ExprPtr sub(ExprPtr a, ExprPtr b) { return binary(Expr::Op::Sub, std::move(a), std::move(b)); }
inline ExprPtr mul(ExprPtr a, ExprPtr b) { return binary(Expr::Op::Mul, std::move(a), std::move(b)); }

inline ExprPtr mod(ExprPtr a, Value k) {
    auto e = std::make_shared<Expr>();
    e->op = Expr::Op::Mod;
    e->modulus = k;
    e->args = {std::move(a)};
    return e;
}

inline ExprPtr ite(ExprPtr c, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->op = Expr::Op::Ite;
    e->args = {std::move(c), std::move(a), std::move(b)};
    return e;
}

} // namespace expr

using Env = std::function<Value(const std::string&)>;

inline Value eval(const Expr& e, const Env& env) {
    auto truthy = [](Value v) { return v != 0; };
    switch (e.op) {
    case Expr::Op::Const: return e.value;
    case Expr::Op::Var: return env(e.var);
    case Expr::Op::Not: return truthy(eval(*e.args[0], env)) ? 0 : 1;
    case Expr::Op::Neg: return checked_sub(0, eval(*e.args[0], env));
    case Expr::Op::And:
        return truthy(eval(*e.args[0], env)) && truthy(eval(*e.args[1], env)) ? 1 : 0;
    case Expr::Op::Or:
        return truthy(eval(*e.args[0], env)) || truthy(eval(*e.args[1], env)) ? 1 : 0;
    case Expr::Op::Xor:
        return truthy(eval(*e.args[0], env)) != truthy(eval(*e.args[1], env)) ? 1 : 0;
    case Expr::Op::Eq: return eval(*e.args[0], env) == eval(*e.args[1], env) ? 1 : 0;
    case Expr::Op::Add: return checked_add(eval(*e.args[0], env), eval(*e.args[1], env));
    case Expr::Op::Sub: return checked_sub(eval(*e.args[0], env), eval(*e.args[1], env));
    case Expr::Op::Mul: return checked_mul(eval(*e.args[0], env), eval(*e.args[1], env));
    case Expr::Op::Mod: return floor_mod(eval(*e.args[0], env), e.modulus);
    case Expr::Op::Ite:
        return truthy(eval(*e.args[0], env)) ? eval(*e.args[1], env) : eval(*e.args[2], env);
    }
    raise("internal", "unhandled expression operator");
}

inline void collect_leaves(const Expr& e, std::set<std::string>& out) {
    if (e.op == Expr::Op::Var) {
        out.insert(e.var);
        return;
    }
    for (const auto& a : e.args) collect_leaves(*a, out);
}

inline std::set<std::string> leaves(const Expr& e) {
    std::set<std::string> out;
    collect_leaves(e, out);
    return out;
}

namespace detail {

// Binding strength used by the canonical printer; mirrors the surface
// grammar: or < and < xor < mod < add/sub < mul < unary < atom.
inline int precedence(Expr::Op op) {
    switch (op) {
    case Expr::Op::Or: return 1;
    case Expr::Op::And: return 2;
    case Expr::Op::Xor: return 3;
    case Expr::Op::Mod: return 4;
    case Expr::Op::Add:
    case Expr::Op::Sub: return 5;
    case Expr::Op::Mul: return 6;
    case Expr::Op::Not:
    case Expr::Op::Neg: return 7;
    default: return 8;
    }
}

inline void print_expr(const Expr& e, std::string& out, bool boolean_consts);

inline void print_child(const Expr& parent, const Expr& child, std::string& out,
                        bool boolean_consts, bool right_assoc_side = false) {
    int pp = precedence(parent.op);
    int cp = precedence(child.op);
    // Same-precedence chains are left associative; parenthesize a
    // same-precedence right operand so reparsing rebuilds the tree shape.
    bool parens = cp < pp || (cp == pp && right_assoc_side);
    if (parens) out += "(";
    print_expr(child, out, boolean_consts);
    if (parens) out += ")";
}

inline void print_expr(const Expr& e, std::string& out, bool boolean_consts) {
    switch (e.op) {
    case Expr::Op::Const:
        if (boolean_consts && (e.value == 0 || e.value == 1))
            out += e.value == 1 ? "T" : "F";
        else
            out += std::to_string(e.value);
        return;
    case Expr::Op::Var: out += e.var; return;
    case Expr::Op::Not:
        out += "not ";
        print_child(e, *e.args[0], out, boolean_consts);
        return;
    case Expr::Op::Neg:
        out += "-";
        print_child(e, *e.args[0], out, boolean_consts);
        return;
    case Expr::Op::Eq:
        out += "[";
        print_expr(*e.args[0], out, boolean_consts);
        out += " = ";
        print_expr(*e.args[1], out, boolean_consts);
        out += "]";
        return;
    case Expr::Op::Ite:
        out += "ite(";
        print_expr(*e.args[0], out, boolean_consts);
        out += ", ";
        print_expr(*e.args[1], out, boolean_consts);
        out += ", ";
        print_expr(*e.args[2], out, boolean_consts);
        out += ")";
        return;
    case Expr::Op::Mod:
        // A mod-expression takes a single trailing divisor, so a nested
        // mod operand keeps its parentheses.
        print_child(e, *e.args[0], out, boolean_consts, true);
        out += " mod " + std::to_string(e.modulus);
        return;
    default: break;
    }
    const char* sym = "";
    switch (e.op) {
    case Expr::Op::And: sym = " and "; break;
    case Expr::Op::Or: sym = " or "; break;
    case Expr::Op::Xor: sym = " xor "; break;
    case Expr::Op::Add: sym = " + "; break;
    case Expr::Op::Sub: sym = " - "; break;
    case Expr::Op::Mul: sym = " * "; break;
    default: raise("internal", "unhandled operator in printer");
    }
    print_child(e, *e.args[0], out, boolean_consts);
    out += sym;
    print_child(e, *e.args[1], out, boolean_consts, true);
}

} // namespace detail

// Canonical infix rendering; reparsing it reproduces the tree. With
// `boolean_consts` the 0/1 constants print as F/T.
inline std::string to_string(const Expr& e, bool boolean_consts = false) {
    std::string out;
    detail::print_expr(e, out, boolean_consts);
    return out;
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.op != b.op || a.value != b.value || a.var != b.var || a.modulus != b.modulus ||
        a.args.size() != b.args.size())
        return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!structurally_equal(*a.args[i], *b.args[i])) return false;
    return true;
}

} // namespace scax
