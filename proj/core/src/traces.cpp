// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#include "dynflow/traces.hpp"

#include <cassert>

namespace dynflow {

OutSeq extend(const ExecTrace& trace, const PolicySpec& spec,
              const std::vector<LabelOfInterest>& labels,
              const std::vector<LabelPtr>& label_asts, const std::set<std::string>& locks) {
    assert(trace.status == RunStatus::Terminated);
    assert(labels.size() == label_asts.size());
    OutSeq out;
    out.reserve(trace.outputs.size());
    for (const RawOutput& raw : trace.outputs) {
        OutEvent ev;
        ev.channel_key = to_string(raw.channel);
        ev.channel_now = interpret_label_prefix(raw.channel, trace, raw.step);
        ev.value = raw.value;
        for (const auto& [var, label] : spec.gamma)
            ev.gamma[var] = interpret_label_prefix(label, trace, raw.step);
        ev.label_gamma.reserve(label_asts.size());
        for (const auto& l : label_asts)
            ev.label_gamma.push_back(interpret_label_prefix(l, trace, raw.step));
        for (const auto& lock : locks)
            if (trace.memories[raw.step].event_value(lock))
                ev.open_locks.insert(lock);
        out.push_back(std::move(ev));
    }
    return out;
}

OutSeq project(const OutSeq& t, const std::function<bool(const OutEvent&)>& f) {
    OutSeq out;
    for (const auto& ev : t)
        if (f(ev))
            out.push_back(ev);
    return out;
}

OutSeq project_L(const OutSeq& t, const LevelSet& L) {
    return project(t, [&](const OutEvent& ev) { return flows_to(ev.channel_now, L); });
}

OutSeq project_secret(const OutSeq& t, size_t label_idx, const LevelSet& L) {
    return project(t, [&](const OutEvent& ev) {
        assert(label_idx < ev.label_gamma.size());
        return !flows_to(ev.label_gamma[label_idx], L) && flows_to(ev.channel_now, L);
    });
}

bool is_prefix_of(const OutSeq& a, const OutSeq& b) {
    if (a.size() > b.size())
        return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!a[i].same_observation(b[i]))
            return false;
    return true;
}

bool is_subtrace_of(const OutSeq& a, const OutSeq& b) {
    if (a.empty())
        return true;
    if (a.size() > b.size())
        return false;
    for (size_t start = 0; start + a.size() <= b.size(); ++start) {
        bool match = true;
        for (size_t i = 0; i < a.size(); ++i)
            if (!a[i].same_observation(b[start + i])) {
                match = false;
                break;
            }
        if (match)
            return true;
    }
    return false;
}

bool indist(const OutSeq& t1, const OutSeq& t2, const LevelSet& L) {
    return is_prefix_of(project_L(t1, L), project_L(t2, L));
}

bool consistent(const OutSeq& t1, const OutSeq& t2, size_t label_idx, const LevelSet& L) {
    OutSeq p1 = project_secret(t1, label_idx, L);
    OutSeq p2 = project_secret(t2, label_idx, L);
    if (p1.size() != p2.size())
        return false;
    if (p1.empty())
        return true;
    return p1.back().same_observation(p2.back());
}

MemberSet closure(const Memory& m, const Universe& u, const std::set<std::string>& X) {
    MemberSet out;
    for (size_t i = 0; i < u.size(); ++i) {
        bool agrees = true;
        for (const auto& x : X) {
            if (!(u[i].has(x) && m.has(x)))
                throw EvalError("memory closure over unbound variable: " + x);
            if (!(u[i].get(x) == m.get(x))) {
                agrees = false;
                break;
            }
        }
        if (agrees)
            out.insert(i);
    }
    return out;
}

} // namespace dynflow
