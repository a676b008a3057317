// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynflow/ast.hpp"
#include "dynflow/value.hpp"

namespace dynflow {

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Program state: a total map from variables and security events to values.
/// Events absent from the map read as false; variables must be bound.
class Memory {
  public:
    Memory() = default;
    explicit Memory(std::map<std::string, Value> bindings) : map_(std::move(bindings)) {}

    const Value& get(const std::string& name) const;
    bool event_value(const std::string& name) const; // defaults to false
    void set(const std::string& name, Value v) { map_[name] = std::move(v); }
    bool has(const std::string& name) const { return map_.count(name) != 0; }

    const std::map<std::string, Value>& bindings() const { return map_; }
    bool operator==(const Memory& o) const { return map_ == o.map_; }
    bool operator<(const Memory& o) const { return map_ < o.map_; }

  private:
    std::map<std::string, Value> map_;
};

std::string to_string(const Memory& m);

/// Pure expression evaluation. Division by zero, unbound names and type
/// mismatches throw EvalError (the caller reports a stuck configuration).
Value eval_expr(const Memory& m, const ExprPtr& e);

/// Evaluate an expression expected to be Boolean (guards, label conditions).
bool eval_cond(const Memory& m, const ExprPtr& e);

struct RawOutput {
    LabelPtr channel;   // channel label as written in the program
    Value value;
    size_t step;        // index of the configuration the output fired from
};

struct StepResult {
    CmdPtr cmd;
    Memory mem;
    std::optional<std::pair<LabelPtr, Value>> output;
};

/// One small step. Precondition: c is not skip. open/close step like
/// EventOn/EventOff on the lock's name.
StepResult step(const CmdPtr& c, const Memory& m);

enum class RunStatus { Terminated, NonTerminating, Stuck };

/// Full configuration trace of one execution. memories[i] is the memory of
/// the i-th configuration; a terminated run of n steps has n+1 memories.
/// steps() == |τ| in the prefix/postfix indexing conventions.
struct ExecTrace {
    std::vector<Memory> memories;
    std::vector<RawOutput> outputs;
    RunStatus status = RunStatus::Terminated;
    std::string stuck_reason;

    size_t steps() const { return memories.empty() ? 0 : memories.size() - 1; }
};

constexpr uint64_t kDefaultFuel = 100000;

/// Run to termination within the step budget. Nontermination and stuck
/// configurations are reported in the status, never thrown.
ExecTrace run(const Program& p, const Memory& initial, uint64_t fuel = kDefaultFuel);
ExecTrace run(const CmdPtr& c, const Memory& initial, uint64_t fuel = kDefaultFuel);

} // namespace dynflow
