// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#include "dynflow/knowledge.hpp"

#include <algorithm>

namespace dynflow {

std::vector<size_t> TraceTable::live_members() const {
    std::vector<size_t> out;
    for (size_t i = 0; i < universe.size(); ++i)
        if (terminating[i])
            out.push_back(i);
    return out;
}

std::set<std::string> TraceTable::vars_with_label(size_t label_idx) const {
    std::set<std::string> out(labels[label_idx].vars.begin(), labels[label_idx].vars.end());
    return out;
}

std::set<std::string> TraceTable::vars_without_label(size_t label_idx) const {
    std::set<std::string> out = all_vars();
    for (const auto& v : labels[label_idx].vars)
        out.erase(v);
    return out;
}

std::set<std::string> TraceTable::all_vars() const {
    std::set<std::string> out;
    for (const auto& l : labels)
        out.insert(l.vars.begin(), l.vars.end());
    return out;
}

MemberSet TraceTable::live_closure(size_t member, const std::set<std::string>& X) const {
    MemberSet out = closure(universe[member], universe, X);
    for (auto it = out.begin(); it != out.end();)
        it = terminating[*it] ? std::next(it) : out.erase(it);
    return out;
}

MemberSet k1(const TraceTable& tt, const OutSeq& observed, const LevelSet& L) {
    MemberSet out;
    for (size_t i : tt.live_members())
        if (indist(observed, tt.seqs[i], L))
            out.insert(i);
    return out;
}

MemberSet k_gen(const TraceTable& tt, const OutSeq& observed, const SimRel& sim) {
    MemberSet out;
    for (size_t i : tt.live_members())
        if (sim(observed, tt.seqs[i]))
            out.insert(i);
    return out;
}

MemberSet k2(const TraceTable& tt, const OutSeq& observed, const LevelSet& L, size_t label_idx) {
    MemberSet out;
    for (size_t m : tt.live_members()) {
        const OutSeq& full = tt.seqs[m];
        for (size_t j = 0; j <= full.size(); ++j) {
            OutSeq pfx = prefix(full, j);
            if (!consistent(pfx, observed, label_idx, L))
                continue;
            MemberSet part = k1(tt, pfx, L);
            out.insert(part.begin(), part.end());
        }
    }
    return out;
}

MemberSet allowance(const TraceTable& tt, size_t member, const OutSeq& observed,
                    size_t label_idx, const LevelSet& L, PolicyType type) {
    MemberSet base = tt.live_closure(member, tt.vars_without_label(label_idx));
    if (type == PolicyType::Transient)
        return base;
    OutSeq before_last = prefix(observed, observed.empty() ? 0 : observed.size() - 1);
    return intersect(base, k1(tt, before_last, L));
}

MemberSet intersect(const MemberSet& a, const MemberSet& b) {
    MemberSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::inserter(out, out.begin()));
    return out;
}

bool subset(const MemberSet& a, const MemberSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

} // namespace dynflow
