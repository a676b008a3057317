// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "dynflow/levels.hpp"

namespace dynflow {

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class BinOp { Add, Sub, Mul, Div, Eq, Lt, Le, Gt, Ge, And, Or };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Expression AST. Identifiers start out as Name nodes; a resolution pass
/// turns them into Var or Event references once the program's event set is
/// known (events may only be written by EventOn/EventOff).
struct Expr {
    enum class Kind { IntLit, Name, Var, Event, Binary, Not };

    Kind kind;
    int64_t lit = 0;        // IntLit
    std::string name;       // Name / Var / Event
    BinOp op = BinOp::Add;  // Binary
    ExprPtr lhs, rhs;       // Binary (lhs only for Not)

    static ExprPtr int_lit(int64_t n);
    static ExprPtr name_ref(std::string n);
    static ExprPtr var(std::string n);
    static ExprPtr event(std::string n);
    static ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r);
    static ExprPtr negate(ExprPtr e);
};

bool equal(const ExprPtr& a, const ExprPtr& b);
std::string to_string(const ExprPtr& e);

/// True when the expression can never be Boolean-valued (integer literals,
/// arithmetic). Used to reject such expressions in condition positions.
bool definitely_arithmetic(const ExprPtr& e);

void collect_names(const ExprPtr& e, std::set<std::string>& out);

// ---------------------------------------------------------------------------
// Security labels
// ---------------------------------------------------------------------------

enum class MutationDir { Right, Left, TwoWay }; // ->  <-  <=>

struct Label;
using LabelPtr = std::shared_ptr<const Label>;

/// Security label: either a level set (or a bare lattice level, lowered to
/// its level set against a lattice), or a conditional mutation between two
/// labels. Structural equality is the equality used throughout.
struct Label {
    enum class Kind { LevelSet, LevelName, Mutate };

    Kind kind;
    dynflow::LevelSet levels;  // LevelSet
    std::string level_name;    // LevelName (unresolved)
    ExprPtr cond;              // Mutate
    MutationDir dir = MutationDir::Right;
    LabelPtr left, right;

    static LabelPtr level_set(dynflow::LevelSet ls);
    static LabelPtr level_ref(std::string name);
    static LabelPtr mutate(ExprPtr cond, LabelPtr l, MutationDir dir, LabelPtr r);
};

bool equal(const LabelPtr& a, const LabelPtr& b);
std::string to_string(const LabelPtr& l);

/// Lower every bare level name to its level set via the lattice (Denning
/// conversion). Throws ResolveError on unknown levels.
LabelPtr resolve(const LabelPtr& l, const Lattice& lat);

void collect_names(const LabelPtr& l, std::set<std::string>& out);

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct Cmd;
using CmdPtr = std::shared_ptr<const Cmd>;

struct Cmd {
    enum class Kind {
        Skip,
        Seq,
        Assign,      // x := e        (is_declassify marks x := declassify(e))
        If,
        While,
        Output,      // output(b, e)
        EventOn,
        EventOff,
        Open,        // open(lock)  -- lock programs only
        Close,
    };

    Kind kind;
    CmdPtr first, second;      // Seq; If(then/else); While(body in first)
    ExprPtr guard;             // If / While
    std::string target;        // Assign / EventOn / EventOff / Open / Close
    ExprPtr rhs;               // Assign / Output value
    LabelPtr channel;          // Output
    bool is_declassify = false;

    static CmdPtr skip();
    static CmdPtr seq(CmdPtr a, CmdPtr b);
    static CmdPtr assign(std::string x, ExprPtr e, bool declassify = false);
    static CmdPtr if_(ExprPtr g, CmdPtr then_c, CmdPtr else_c);
    static CmdPtr while_(ExprPtr g, CmdPtr body);
    static CmdPtr output(LabelPtr chan, ExprPtr e);
    static CmdPtr event_on(std::string s);
    static CmdPtr event_off(std::string s);
    static CmdPtr open(std::string lock);
    static CmdPtr close(std::string lock);
};

bool equal(const CmdPtr& a, const CmdPtr& b);

/// A parsed program plus the name partition the resolution pass computed.
struct Program {
    CmdPtr body = Cmd::skip();
    std::set<std::string> variables;  // assigned or read as data
    std::set<std::string> events;     // EventOn/EventOff targets
    std::set<std::string> locks;      // open/close targets
    bool has_declassify = false;
};

std::string to_string(const Program& p);
std::string to_string(const CmdPtr& c, int indent = 0);

} // namespace dynflow
