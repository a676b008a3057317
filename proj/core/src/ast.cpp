// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#include "dynflow/ast.hpp"

#include <sstream>

namespace dynflow {

// --- expressions -------------------------------------------------------------

ExprPtr Expr::int_lit(int64_t n) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::IntLit;
    e->lit = n;
    return e;
}
ExprPtr Expr::name_ref(std::string n) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Name;
    e->name = std::move(n);
    return e;
}
ExprPtr Expr::var(std::string n) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Var;
    e->name = std::move(n);
    return e;
}
ExprPtr Expr::event(std::string n) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Event;
    e->name = std::move(n);
    return e;
}
ExprPtr Expr::binary(BinOp op, ExprPtr l, ExprPtr r) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Binary;
    e->op = op;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    return e;
}
ExprPtr Expr::negate(ExprPtr inner) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Not;
    e->lhs = std::move(inner);
    return e;
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b)
        return true;
    if (!a || !b || a->kind != b->kind)
        return false;
    switch (a->kind) {
    case Expr::Kind::IntLit: return a->lit == b->lit;
    case Expr::Kind::Name:
    case Expr::Kind::Var:
    case Expr::Kind::Event: return a->name == b->name;
    case Expr::Kind::Binary:
        return a->op == b->op && equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    case Expr::Kind::Not: return equal(a->lhs, b->lhs);
    }
    return false;
}

namespace {

int precedence(BinOp op) {
    switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 3;
    case BinOp::Add:
    case BinOp::Sub: return 4;
    case BinOp::Mul:
    case BinOp::Div: return 5;
    }
    return 0;
}

const char* op_text(BinOp op) {
    switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Eq: return "==";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    }
    return "?";
}

void print_expr(std::ostream& out, const ExprPtr& e, int parent_prec) {
    switch (e->kind) {
    case Expr::Kind::IntLit: out << e->lit; return;
    case Expr::Kind::Name:
    case Expr::Kind::Var:
    case Expr::Kind::Event: out << e->name; return;
    case Expr::Kind::Not:
        out << '!';
        print_expr(out, e->lhs, 6);
        return;
    case Expr::Kind::Binary: {
        int prec = precedence(e->op);
        bool paren = prec < parent_prec;
        if (paren)
            out << '(';
        print_expr(out, e->lhs, prec);
        out << ' ' << op_text(e->op) << ' ';
        print_expr(out, e->rhs, prec + 1); // left-associative
        if (paren)
            out << ')';
        return;
    }
    }
}

} // namespace

std::string to_string(const ExprPtr& e) {
    std::ostringstream out;
    print_expr(out, e, 0);
    return out.str();
}

bool definitely_arithmetic(const ExprPtr& e) {
    switch (e->kind) {
    case Expr::Kind::IntLit: return true;
    case Expr::Kind::Binary:
        switch (e->op) {
        case BinOp::Add:
        case BinOp::Sub:
        case BinOp::Mul:
        case BinOp::Div: return true;
        default: return false;
        }
    default: return false;
    }
}

void collect_names(const ExprPtr& e, std::set<std::string>& out) {
    if (!e)
        return;
    switch (e->kind) {
    case Expr::Kind::Name:
    case Expr::Kind::Var:
    case Expr::Kind::Event: out.insert(e->name); break;
    case Expr::Kind::Binary:
        collect_names(e->lhs, out);
        collect_names(e->rhs, out);
        break;
    case Expr::Kind::Not: collect_names(e->lhs, out); break;
    default: break;
    }
}

// --- labels ------------------------------------------------------------------

LabelPtr Label::level_set(dynflow::LevelSet ls) {
    auto l = std::make_shared<Label>();
    l->kind = Kind::LevelSet;
    l->levels = std::move(ls);
    return l;
}
LabelPtr Label::level_ref(std::string name) {
    auto l = std::make_shared<Label>();
    l->kind = Kind::LevelName;
    l->level_name = std::move(name);
    return l;
}
LabelPtr Label::mutate(ExprPtr cond, LabelPtr left, MutationDir dir, LabelPtr right) {
    auto l = std::make_shared<Label>();
    l->kind = Kind::Mutate;
    l->cond = std::move(cond);
    l->left = std::move(left);
    l->dir = dir;
    l->right = std::move(right);
    return l;
}

bool equal(const LabelPtr& a, const LabelPtr& b) {
    if (a == b)
        return true;
    if (!a || !b || a->kind != b->kind)
        return false;
    switch (a->kind) {
    case Label::Kind::LevelSet: return a->levels == b->levels;
    case Label::Kind::LevelName: return a->level_name == b->level_name;
    case Label::Kind::Mutate:
        return a->dir == b->dir && equal(a->cond, b->cond) && equal(a->left, b->left) &&
               equal(a->right, b->right);
    }
    return false;
}

std::string to_string(const LabelPtr& l) {
    switch (l->kind) {
    case Label::Kind::LevelSet: return to_string(l->levels);
    case Label::Kind::LevelName: return l->level_name;
    case Label::Kind::Mutate: {
        const char* arrow = l->dir == MutationDir::Right  ? "->"
                            : l->dir == MutationDir::Left ? "<-"
                                                          : "<=>";
        std::ostringstream out;
        out << to_string(l->cond) << " ? " << to_string(l->left) << ' ' << arrow << ' '
            << to_string(l->right);
        return out.str();
    }
    }
    return "?";
}

LabelPtr resolve(const LabelPtr& l, const Lattice& lat) {
    switch (l->kind) {
    case Label::Kind::LevelSet: {
        for (const auto& lvl : l->levels)
            if (!lat.has_level(lvl))
                throw ResolveError("unknown level in level set: " + lvl);
        return l;
    }
    case Label::Kind::LevelName: return Label::level_set(lat.level_set(l->level_name));
    case Label::Kind::Mutate:
        return Label::mutate(l->cond, resolve(l->left, lat), l->dir, resolve(l->right, lat));
    }
    return l;
}

void collect_names(const LabelPtr& l, std::set<std::string>& out) {
    if (!l)
        return;
    if (l->kind == Label::Kind::Mutate) {
        collect_names(l->cond, out);
        collect_names(l->left, out);
        collect_names(l->right, out);
    }
}

// --- commands ----------------------------------------------------------------

CmdPtr Cmd::skip() {
    static CmdPtr instance = [] {
        auto c = std::make_shared<Cmd>();
        c->kind = Kind::Skip;
        return c;
    }();
    return instance;
}
CmdPtr Cmd::seq(CmdPtr a, CmdPtr b) {
    auto c = std::make_shared<Cmd>();
    c->kind = Kind::Seq;
    c->first = std::move(a);
    c->second = std::move(b);
    return c;
}
CmdPtr Cmd::assign(std::string x, ExprPtr e, bool declassify) {
    auto c = std::make_shared<Cmd>();
    c->kind = Kind::Assign;
    c->target = std::move(x);
    c->rhs = std::move(e);
    c->is_declassify = declassify;
    return c;
}
CmdPtr Cmd::if_(ExprPtr g, CmdPtr then_c, CmdPtr else_c) {
    auto c = std::make_shared<Cmd>();
    c->kind = Kind::If;
    c->guard = std::move(g);
    c->first = std::move(then_c);
    c->second = std::move(else_c);
    return c;
}
CmdPtr Cmd::while_(ExprPtr g, CmdPtr body) {
    auto c = std::make_shared<Cmd>();
    c->kind = Kind::While;
    c->guard = std::move(g);
    c->first = std::move(body);
    return c;
}
CmdPtr Cmd::output(LabelPtr chan, ExprPtr e) {
    auto c = std::make_shared<Cmd>();
    c->kind = Kind::Output;
    c->channel = std::move(chan);
    c->rhs = std::move(e);
    return c;
}
CmdPtr Cmd::event_on(std::string s) {
    auto c = std::make_shared<Cmd>();
    c->kind = Kind::EventOn;
    c->target = std::move(s);
    return c;
}
CmdPtr Cmd::event_off(std::string s) {
    auto c = std::make_shared<Cmd>();
    c->kind = Kind::EventOff;
    c->target = std::move(s);
    return c;
}
CmdPtr Cmd::open(std::string lock) {
    auto c = std::make_shared<Cmd>();
    c->kind = Kind::Open;
    c->target = std::move(lock);
    return c;
}
CmdPtr Cmd::close(std::string lock) {
    auto c = std::make_shared<Cmd>();
    c->kind = Kind::Close;
    c->target = std::move(lock);
    return c;
}

bool equal(const CmdPtr& a, const CmdPtr& b) {
    if (a == b)
        return true;
    if (!a || !b || a->kind != b->kind)
        return false;
    switch (a->kind) {
    case Cmd::Kind::Skip: return true;
    case Cmd::Kind::Seq: return equal(a->first, b->first) && equal(a->second, b->second);
    case Cmd::Kind::Assign:
        return a->target == b->target && a->is_declassify == b->is_declassify &&
               equal(a->rhs, b->rhs);
    case Cmd::Kind::If:
        return equal(a->guard, b->guard) && equal(a->first, b->first) &&
               equal(a->second, b->second);
    case Cmd::Kind::While: return equal(a->guard, b->guard) && equal(a->first, b->first);
    case Cmd::Kind::Output: return equal(a->channel, b->channel) && equal(a->rhs, b->rhs);
    case Cmd::Kind::EventOn:
    case Cmd::Kind::EventOff:
    case Cmd::Kind::Open:
    case Cmd::Kind::Close: return a->target == b->target;
    }
    return false;
}

namespace {

void print_cmd(std::ostream& out, const CmdPtr& c, int indent) {
    auto pad = [&] { for (int i = 0; i < indent; ++i) out << "  "; };
    switch (c->kind) {
    case Cmd::Kind::Skip:
        pad();
        out << "skip;\n";
        return;
    case Cmd::Kind::Seq:
        print_cmd(out, c->first, indent);
        print_cmd(out, c->second, indent);
        return;
    case Cmd::Kind::Assign:
        pad();
        out << c->target << " := ";
        if (c->is_declassify)
            out << "declassify(" << to_string(c->rhs) << ")";
        else
            out << to_string(c->rhs);
        out << ";\n";
        return;
    case Cmd::Kind::If:
        pad();
        out << "if (" << to_string(c->guard) << ") {\n";
        print_cmd(out, c->first, indent + 1);
        pad();
        if (c->second && c->second->kind != Cmd::Kind::Skip) {
            out << "} else {\n";
            print_cmd(out, c->second, indent + 1);
            pad();
        }
        out << "}\n";
        return;
    case Cmd::Kind::While:
        pad();
        out << "while (" << to_string(c->guard) << ") {\n";
        print_cmd(out, c->first, indent + 1);
        pad();
        out << "}\n";
        return;
    case Cmd::Kind::Output:
        pad();
        out << "output(" << to_string(c->channel) << ", " << to_string(c->rhs) << ");\n";
        return;
    case Cmd::Kind::EventOn:
        pad();
        out << "EventOn(" << c->target << ");\n";
        return;
    case Cmd::Kind::EventOff:
        pad();
        out << "EventOff(" << c->target << ");\n";
        return;
    case Cmd::Kind::Open:
        pad();
        out << "open(" << c->target << ");\n";
        return;
    case Cmd::Kind::Close:
        pad();
        out << "close(" << c->target << ");\n";
        return;
    }
}

} // namespace

std::string to_string(const CmdPtr& c, int indent) {
    std::ostringstream out;
    print_cmd(out, c, indent);
    return out.str();
}

std::string to_string(const Program& p) { return to_string(p.body, 0); }

} // namespace dynflow
