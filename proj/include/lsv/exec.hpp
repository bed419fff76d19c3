#pragma once

#include <functional>
#include <map>
#include <optional>

#include "lsv/command.hpp"

namespace lsv {

/// PerLocation: at most one shared-location read or one write per process per
/// time step; guards and assignment sources accumulate a cached partial state
/// over several steps (owned variables are read freely and batched). Sound
/// with respect to beh. PerAtom: one step per guard/assignment/lock/alloc,
/// used where whole operations must fit a small horizon; not beh-sound for
/// assignments (their evaluation phase collapses into the write step).
enum class Granularity { PerLocation, PerAtom };

struct ExecutionConfig {
  Time horizon = 14;
  int omega_unroll = 4;
  Granularity granularity = Granularity::PerLocation;
  /// Node slots (base addresses) available to allocation, in the order they
  /// are handed out.
  std::vector<std::uint32_t> free_nodes;
};

struct StepInfo {
  Proc proc;
  std::string note;
  std::vector<std::string> labels;  // enclosing labels, outermost first
};

struct Execution {
  Stream stream;
  Interval window;  // [1, T]; empty when no step was taken
  Truncation truncation = Truncation::Complete;
  /// steps[t-1] holds the micro-steps taken at time t.
  std::vector<std::vector<StepInfo>> steps;
  /// Whether each process's program had run to completion when the execution
  /// was emitted.
  std::map<Proc, bool> completed;
  /// Some omega loop was cut off at the unroll bound along the way.
  bool forced_exit = false;

  bool all_completed() const;
  /// Smallest interval covering every step of p taken under the given label.
  Interval label_window(Proc p, const std::string& label) const;
  /// Time of the last step p took, 0 if none.
  Time last_step(Proc p) const;
};

struct ProcProgram {
  Proc proc;
  Command cmd;
};

/// Depth-first enumeration of all bounded executions of the programs run in
/// parallel from the initial state. At each time step a non-empty subset of
/// the runnable processes advances simultaneously; two micro-steps may share
/// a step only if no location written by one is touched by the other. The
/// permission table of each state reflects exactly that step: 1 for a write,
/// 1/(r+1) per location for its r readers, 0 elsewhere. The visitor returns
/// false to stop early; the function returns false iff it was stopped.
bool enumerate_executions(const std::vector<ProcProgram>& progs, const State& init,
                          const ExecutionConfig& cfg,
                          const std::function<bool(const Execution&)>& visit);

enum class Status { Holds, BoundedHolds, Counterexample };

struct RefineVerdict {
  Status status = Status::Holds;
  std::size_t cases = 0;
  std::optional<Execution> witness;
};

/// Checks that every complete enumerated execution of the concrete programs
/// satisfies beh of the abstract command; truncated executions degrade the
/// verdict to BoundedHolds.
RefineVerdict refines(const Command& abst, const std::vector<Proc>& procs,
                      std::vector<Location> y, const std::vector<ProcProgram>& concrete,
                      const State& init, const ExecutionConfig& cfg, EvalOptions opts = {});

}  // namespace lsv
