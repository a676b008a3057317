// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

#include "dynflow/ast.hpp"

namespace dynflow {

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(const std::string& msg, int line, int column)
        : std::runtime_error(msg + " at " + std::to_string(line) + ":" + std::to_string(column)),
          line(line), column(column) {}
};

/// Parse a whole program in the concrete grammar (docs/grammar.md) and run
/// the name-resolution pass: EventOn/EventOff targets become events, every
/// other identifier a variable. A name used both ways is rejected.
Program parse_program(const std::string& text);

/// Parse a security label, e.g. "{A,B}", "H", "erase ? {} <- {M}",
/// "s ? b1 <=> b2". Bare level names stay unresolved until resolve().
LabelPtr parse_label(const std::string& text);

/// Parse a single expression (mostly for tests and tools).
ExprPtr parse_expression(const std::string& text);

/// Rewrite bare names inside a label's conditions: members of `events`
/// become event references (reading false when unset), the rest variables.
LabelPtr bind_label_names(const LabelPtr& l, const std::set<std::string>& events);

} // namespace dynflow
