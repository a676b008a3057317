// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>

#include "dynflow/ast.hpp"
#include "dynflow/interp.hpp"
#include "dynflow/levels.hpp"

namespace dynflow {

enum class PolicyType { Transient, Persistent };

/// Variable-to-label map plus the transient/persistent tag.
struct PolicySpec {
    std::map<std::string, LabelPtr> gamma;
    PolicyType type = PolicyType::Transient;

    const LabelPtr& label_of(const std::string& var) const;
};

/// Interpret a label over a trace (a span of configuration memories,
/// including both endpoints). Resolution against a lattice must have
/// happened already; LevelName nodes are rejected here.
///
/// The two one-time directions fire on the first index where the condition
/// is false (->) resp. true (<-); nested conditions of the target label are
/// then read from that index on. The two-way direction looks only at the
/// final configuration and reads the chosen side from the index after the
/// last flip.
LevelSet interpret_label(const LabelPtr& label, std::span<const Memory> trace);

/// Interpret over the prefix τ^[:i] of a run.
LevelSet interpret_label_prefix(const LabelPtr& label, const ExecTrace& trace, size_t i);

/// Dynamic specification at execution point i: every variable's label
/// interpreted over τ^[:i]. Lookups for arbitrary labels go through
/// interpret_label_prefix directly.
std::map<std::string, LevelSet> dynamic_spec(const PolicySpec& spec, const ExecTrace& trace,
                                             size_t i);

} // namespace dynflow
