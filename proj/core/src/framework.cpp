// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#include "dynflow/framework.hpp"

#include <sstream>

namespace dynflow {

std::string to_string(const Verdict& v) {
    switch (v.kind) {
    case Verdict::Kind::Secure: return "Secure";
    case Verdict::Kind::Insecure: return "Insecure";
    case Verdict::Kind::NotApplicable: return "NotApplicable";
    }
    return "?";
}

namespace {

/// Knowledge gained from one observation: a single K query when consistency
/// is identity, otherwise the union of K over every consistent prefix of
/// every run.
MemberSet gained_knowledge(const FrameworkInstance& inst, const TraceTable& tt,
                           const OutSeq& observed, const LevelSet& L, size_t b) {
    auto sim = [&](const OutSeq& t1, const OutSeq& t2) { return inst.sim(L, b, t1, t2); };
    if (!inst.consist)
        return k_gen(tt, observed, sim);
    MemberSet out;
    for (size_t m : tt.live_members()) {
        const OutSeq& full = tt.seqs[m];
        for (size_t j = 0; j <= full.size(); ++j) {
            OutSeq pfx = prefix(full, j);
            if (!inst.consist(L, b, pfx, observed))
                continue;
            MemberSet part = k_gen(tt, pfx, sim);
            out.insert(part.begin(), part.end());
        }
    }
    return out;
}

std::optional<size_t> uncovered(const MemberSet& allowed, const MemberSet& known) {
    for (size_t m : allowed)
        if (!known.count(m))
            return m;
    return std::nullopt;
}

} // namespace

Verdict check_framework(const FrameworkInstance& inst, const TraceTable& tt,
                        const std::vector<LevelSet>& attackers) {
    const size_t label_count = inst.per_label ? tt.labels.size() : 1;
    for (size_t m : tt.live_members()) {
        const OutSeq& t = tt.seqs[m];
        for (const LevelSet& L : attackers) {
            for (size_t b = 0; b < label_count; ++b) {
                if (inst.quantifier == FrameworkInstance::Quantifier::Prefix) {
                    for (size_t i = 1; i <= t.size(); ++i) {
                        OutSeq obs = prefix(t, i);
                        MemberSet allowed = inst.allow(m, obs, b, L);
                        MemberSet known = gained_knowledge(inst, tt, obs, L, b);
                        if (auto off = uncovered(allowed, known)) {
                            Witness w;
                            w.member = m;
                            w.event_index = i;
                            w.attacker = L;
                            w.label_key = inst.per_label ? tt.labels[b].key : "";
                            w.offender = *off;
                            return Verdict::insecure(w);
                        }
                    }
                } else {
                    for (size_t s = 1; s <= t.size(); ++s) {
                        for (size_t e = s; e <= t.size(); ++e) {
                            OutSeq obs = window(t, s, e);
                            MemberSet allowed = inst.allow(m, obs, b, L);
                            MemberSet known = gained_knowledge(inst, tt, obs, L, b);
                            if (auto off = uncovered(allowed, known)) {
                                Witness w;
                                w.member = m;
                                w.event_index = e;
                                w.window_start = s;
                                w.attacker = L;
                                w.label_key = inst.per_label ? tt.labels[b].key : "";
                                w.offender = *off;
                                return Verdict::insecure(w);
                            }
                        }
                    }
                }
            }
        }
    }
    return Verdict::secure();
}

bool replay_witness(const FrameworkInstance& inst, const TraceTable& tt, const Witness& w) {
    if (w.member >= tt.seqs.size())
        return false;
    const OutSeq& t = tt.seqs[w.member];
    OutSeq obs = inst.quantifier == FrameworkInstance::Quantifier::Prefix
                     ? prefix(t, w.event_index)
                     : window(t, w.window_start, w.event_index);
    size_t b = 0;
    if (inst.per_label) {
        bool found = false;
        for (size_t i = 0; i < tt.labels.size(); ++i)
            if (tt.labels[i].key == w.label_key) {
                b = i;
                found = true;
                break;
            }
        if (!found)
            return false;
    }
    MemberSet allowed = inst.allow(w.member, obs, b, w.attacker);
    MemberSet known = gained_knowledge(inst, tt, obs, w.attacker, b);
    return allowed.count(w.offender) && !known.count(w.offender);
}

} // namespace dynflow
