// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#include "dynflow/interp.hpp"

#include <sstream>

namespace dynflow {

const Value& Memory::get(const std::string& name) const {
    auto it = map_.find(name);
    if (it == map_.end())
        throw EvalError("unbound name: " + name);
    return it->second;
}

bool Memory::event_value(const std::string& name) const {
    auto it = map_.find(name);
    if (it == map_.end())
        return false; // events start unset
    if (!is_bool(it->second))
        throw EvalError("event holds a non-Boolean value: " + name);
    return as_bool(it->second);
}

std::string to_string(const Memory& m) {
    std::ostringstream out;
    out << '{';
    bool first = true;
    for (const auto& [k, v] : m.bindings()) {
        if (!first)
            out << ", ";
        out << k << "=" << to_string(v);
        first = false;
    }
    out << '}';
    return out.str();
}

namespace {

int64_t checked_arith(BinOp op, int64_t a, int64_t b) {
    int64_t r = 0;
    bool overflow = false;
    switch (op) {
    case BinOp::Add: overflow = __builtin_add_overflow(a, b, &r); break;
    case BinOp::Sub: overflow = __builtin_sub_overflow(a, b, &r); break;
    case BinOp::Mul: overflow = __builtin_mul_overflow(a, b, &r); break;
    case BinOp::Div:
        if (b == 0)
            throw EvalError("division by zero");
        if (a == INT64_MIN && b == -1)
            throw EvalError("integer overflow");
        r = a / b;
        break;
    default: throw EvalError("not an arithmetic operator");
    }
    if (overflow)
        throw EvalError("integer overflow");
    return r;
}

int64_t want_int(const Value& v) {
    if (!is_int(v))
        throw EvalError("expected an integer operand");
    return as_int(v);
}
bool want_bool(const Value& v) {
    if (!is_bool(v))
        throw EvalError("expected a Boolean operand");
    return as_bool(v);
}

} // namespace

Value eval_expr(const Memory& m, const ExprPtr& e) {
    switch (e->kind) {
    case Expr::Kind::IntLit: return e->lit;
    case Expr::Kind::Name: return m.get(e->name);
    case Expr::Kind::Var: return m.get(e->name);
    case Expr::Kind::Event: return m.event_value(e->name);
    case Expr::Kind::Not: return !want_bool(eval_expr(m, e->lhs));
    case Expr::Kind::Binary: {
        switch (e->op) {
        case BinOp::Add:
        case BinOp::Sub:
        case BinOp::Mul:
        case BinOp::Div:
            return checked_arith(e->op, want_int(eval_expr(m, e->lhs)),
                                 want_int(eval_expr(m, e->rhs)));
        case BinOp::Eq: {
            Value a = eval_expr(m, e->lhs), b = eval_expr(m, e->rhs);
            if (is_int(a) && is_int(b))
                return as_int(a) == as_int(b);
            if (is_bool(a) && is_bool(b))
                return as_bool(a) == as_bool(b);
            throw EvalError("comparison between integer and Boolean");
        }
        case BinOp::Lt: return want_int(eval_expr(m, e->lhs)) < want_int(eval_expr(m, e->rhs));
        case BinOp::Le: return want_int(eval_expr(m, e->lhs)) <= want_int(eval_expr(m, e->rhs));
        case BinOp::Gt: return want_int(eval_expr(m, e->lhs)) > want_int(eval_expr(m, e->rhs));
        case BinOp::Ge: return want_int(eval_expr(m, e->lhs)) >= want_int(eval_expr(m, e->rhs));
        case BinOp::And:
            return want_bool(eval_expr(m, e->lhs)) && want_bool(eval_expr(m, e->rhs));
        case BinOp::Or:
            return want_bool(eval_expr(m, e->lhs)) || want_bool(eval_expr(m, e->rhs));
        }
        throw EvalError("unknown operator");
    }
    }
    throw EvalError("unknown expression");
}

bool eval_cond(const Memory& m, const ExprPtr& e) {
    Value v = eval_expr(m, e);
    if (!is_bool(v))
        throw EvalError("condition is not Boolean: " + to_string(e));
    return as_bool(v);
}

StepResult step(const CmdPtr& c, const Memory& m) {
    switch (c->kind) {
    case Cmd::Kind::Skip: throw EvalError("cannot step a terminal configuration");
    case Cmd::Kind::Seq:
        if (c->first->kind == Cmd::Kind::Skip)
            return {c->second, m, std::nullopt};
        else {
            StepResult r = step(c->first, m);
            return {Cmd::seq(r.cmd, c->second), std::move(r.mem), std::move(r.output)};
        }
    case Cmd::Kind::Assign: {
        if (c->is_declassify)
            throw EvalError("declassify must be encoded away before execution");
        Memory next = m;
        next.set(c->target, eval_expr(m, c->rhs));
        return {Cmd::skip(), std::move(next), std::nullopt};
    }
    case Cmd::Kind::If:
        return {eval_cond(m, c->guard) ? c->first : c->second, m, std::nullopt};
    case Cmd::Kind::While:
        if (eval_cond(m, c->guard))
            return {Cmd::seq(c->first, c), m, std::nullopt};
        return {Cmd::skip(), m, std::nullopt};
    case Cmd::Kind::Output: {
        Value v = eval_expr(m, c->rhs);
        return {Cmd::skip(), m, std::make_pair(c->channel, v)};
    }
    case Cmd::Kind::EventOn:
    case Cmd::Kind::Open: {
        Memory next = m;
        next.set(c->target, true);
        return {Cmd::skip(), std::move(next), std::nullopt};
    }
    case Cmd::Kind::EventOff:
    case Cmd::Kind::Close: {
        Memory next = m;
        next.set(c->target, false);
        return {Cmd::skip(), std::move(next), std::nullopt};
    }
    }
    throw EvalError("unknown command");
}

ExecTrace run(const CmdPtr& body, const Memory& initial, uint64_t fuel) {
    ExecTrace tr;
    tr.memories.push_back(initial);
    CmdPtr c = body;
    uint64_t used = 0;
    while (c->kind != Cmd::Kind::Skip) {
        if (used >= fuel) {
            tr.status = RunStatus::NonTerminating;
            return tr;
        }
        try {
            StepResult r = step(c, tr.memories.back());
            if (r.output)
                tr.outputs.push_back({r.output->first, r.output->second, tr.memories.size() - 1});
            tr.memories.push_back(std::move(r.mem));
            c = r.cmd;
        } catch (const EvalError& e) {
            tr.status = RunStatus::Stuck;
            tr.stuck_reason = e.what();
            return tr;
        }
        ++used;
    }
    return tr;
}

ExecTrace run(const Program& p, const Memory& initial, uint64_t fuel) {
    return run(p.body, initial, fuel);
}

} // namespace dynflow
