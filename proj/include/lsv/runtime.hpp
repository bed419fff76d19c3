#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lsv/serial.hpp"

namespace lsv::rt {

enum class Op { Add, Remove, Contains };

const char* op_name(Op op);

/// One invocation or response of a set operation. `ret` is present exactly on
/// responses; `seq` is a global monotone stamp taken immediately around the
/// call, so seq order refines real-time order.
struct HistoryEvent {
  bool invoke = true;
  Op op = Op::Add;
  std::int64_t arg = 0;
  std::optional<bool> ret;
  int proc = 0;
  std::uint64_t seq = 0;

  bool operator==(const HistoryEvent&) const = default;
};

using History = std::vector<HistoryEvent>;

/// JSON-lines, one event per line; parsing rejects events that break the
/// well-formedness invariants (per-proc alternation, matching responses,
/// strictly increasing seq) with Err::MalformedHistory.
std::string history_to_jsonl(const History& h);
History history_from_jsonl(const std::string& text);

/// The abstract set the checker replays histories against.
class SequentialSet {
 public:
  bool add(std::int64_t x);
  bool remove(std::int64_t x);
  bool contains(std::int64_t x) const;
  std::vector<std::int64_t> values() const;
  bool apply(Op op, std::int64_t x);

 private:
  std::vector<std::int64_t> keys_;  // sorted
};

/// Faults seeded into the runtime list, mirroring the model-level ones.
/// SkipMark unlinks without marking, SwapLink publishes the new node before
/// wiring its nxt, NoValidate skips the post-lock revalidation. Each fault
/// yields at its widened race window so small runs already expose it.
enum class RtMutant { None, SkipMark, SwapLink, NoValidate };

/// The lock-based lazy list. Thread safe; removed nodes are retired, never
/// freed mid-run, so unlocked traversals stay safe.
class LazySet {
 public:
  explicit LazySet(RtMutant mutant = RtMutant::None);
  ~LazySet();
  LazySet(const LazySet&) = delete;
  LazySet& operator=(const LazySet&) = delete;

  bool add(std::int64_t x);
  bool remove(std::int64_t x);
  bool contains(std::int64_t x) const;

  /// Unmarked values reachable from Head. Quiescent callers only.
  std::vector<std::int64_t> snapshot() const;
  /// Values strictly ascend along the chain. Quiescent callers only.
  bool sorted() const;
  /// Number of physical unlinks that found the node still unmarked.
  std::uint64_t unmarked_unlinks() const;

 private:
  std::unique_ptr<struct LazySetImpl> impl_;
};

struct RunConfig {
  int threads = 4;
  std::uint64_t ops_per_thread = 1000;
  int keys = 8;
  std::uint64_t seed = 1;
  RtMutant mutant = RtMutant::None;
};

struct RunResult {
  History history;       // merged by seq
  bool sorted_ok = true;  // audited at the quiescent end of each phase
  std::uint64_t unmarked_unlinks = 0;
  std::vector<std::int64_t> final_values;
};

/// Runs a uniform add/remove/contains mix over [1, keys] on `phases`
/// stop-the-world rounds, auditing the list between rounds. Per-thread event
/// buffers are merged by stamp afterwards.
RunResult record_run(const RunConfig& cfg, int phases = 4);

/// One operation of the sequential witness, in linearisation order.
struct SeqOp {
  Op op;
  std::int64_t arg;
  std::optional<bool> ret;
  int proc;
};

/// "add(1):true; contains(2):false; ..."
std::string witness_to_string(const std::vector<SeqOp>& w);

struct LinResult {
  bool linearisable = true;
  std::vector<SeqOp> witness;  // valid when linearisable
  /// When not linearisable: the smallest event-prefix length of the checked
  /// window that already fails, and that window's seq range.
  std::size_t failing_prefix = 0;
  std::uint64_t window_first_seq = 0, window_last_seq = 0;

  Json to_json() const;
};

struct CheckConfig {
  /// Hard cap on operations per checked window; exceeding it is an error
  /// rather than a silent partial check.
  std::size_t max_ops = 100000;
};

/// Wing-Gong search for a sequential witness: every response-ordered pair
/// stays ordered, every recorded return is reproduced by SequentialSet from
/// the empty set, pending invocations may take effect or be dropped.
LinResult check_linearisable(const History& h, const CheckConfig& cfg = {});

/// Cuts the history at quiescent points (no open invocation) and checks each
/// window independently; reports the first failing window if any.
LinResult check_windows(const History& h, const CheckConfig& cfg = {});

/// Ground-truth oracle: tries every completion subset and every real-time
/// respecting permutation. Usable only for histories of at most 8 operations.
bool brute_force_linearisable(const History& h);

}  // namespace lsv::rt
