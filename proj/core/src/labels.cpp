// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#include "dynflow/labels.hpp"

#include <cassert>

namespace dynflow {

const LabelPtr& PolicySpec::label_of(const std::string& var) const {
    auto it = gamma.find(var);
    if (it == gamma.end())
        throw EvalError("no policy for variable: " + var);
    return it->second;
}

LevelSet interpret_label(const LabelPtr& label, std::span<const Memory> trace) {
    assert(!trace.empty());
    switch (label->kind) {
    case Label::Kind::LevelSet: return label->levels;
    case Label::Kind::LevelName:
        throw ResolveError("label not resolved against a lattice: " + label->level_name);
    case Label::Kind::Mutate: {
        auto cond_at = [&](size_t i) { return eval_cond(trace[i], label->cond); };
        switch (label->dir) {
        case MutationDir::Right: {
            // One-time switch to the right label the first time cond is false.
            for (size_t i = 0; i < trace.size(); ++i)
                if (!cond_at(i))
                    return interpret_label(label->right, trace.subspan(i));
            return interpret_label(label->left, trace);
        }
        case MutationDir::Left: {
            for (size_t i = 0; i < trace.size(); ++i)
                if (cond_at(i))
                    return interpret_label(label->left, trace.subspan(i));
            return interpret_label(label->right, trace);
        }
        case MutationDir::TwoWay: {
            // Decided by the final configuration; nested conditions are read
            // from the index after the last flip (0 when cond never flipped).
            bool final_val = cond_at(trace.size() - 1);
            size_t start = 0;
            for (size_t i = trace.size(); i-- > 0;) {
                if (cond_at(i) != final_val) {
                    start = i + 1;
                    break;
                }
            }
            const LabelPtr& chosen = final_val ? label->left : label->right;
            return interpret_label(chosen, trace.subspan(start));
        }
        }
    }
    }
    throw ResolveError("unknown label kind");
}

LevelSet interpret_label_prefix(const LabelPtr& label, const ExecTrace& trace, size_t i) {
    assert(i < trace.memories.size());
    return interpret_label(label, std::span<const Memory>(trace.memories.data(), i + 1));
}

std::map<std::string, LevelSet> dynamic_spec(const PolicySpec& spec, const ExecTrace& trace,
                                             size_t i) {
    std::map<std::string, LevelSet> out;
    for (const auto& [var, label] : spec.gamma)
        out[var] = interpret_label_prefix(label, trace, i);
    return out;
}

} // namespace dynflow
