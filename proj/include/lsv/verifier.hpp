#pragma once

#include "lsv/lazyset.hpp"
#include "lsv/serial.hpp"

namespace lsv {

struct VerifyConfig {
  SetConfig set{};
  Time horizon = 14;
  int omega_unroll = 4;
  Granularity granularity = Granularity::PerAtom;
  /// Stop enumerating a scenario at its first counterexample.
  bool stop_at_first = true;
};

/// A replayable failure: the recorded stream, the interval the obligation was
/// evaluated over, and the predicate that came out false there.
struct Witness {
  Stream stream;
  Interval interval = Interval::empty();
  IntvPred obligation;
  std::string detail;
};

struct Verdict {
  std::string id;
  Status status = Status::Holds;
  std::size_t cases = 0;        // obligations actually discharged
  std::size_t omega_cut = 0;    // runs cut at the loop-unroll bound
  std::size_t horizon_cut = 0;  // runs cut at the horizon with nothing due
  std::size_t witnesses = 0;    // effect instances extracted along the way
  std::optional<Witness> witness;

  Json to_json() const;
};

/// Every completed contains over every enumerated interleaving with one
/// interfering add or remove on the same key: a true result needs the key in
/// the set at some point of the operation, a false result is impossible when
/// the key was in the set throughout, and the whole operation satisfies the
/// behaviour of its coarse-grained form.
Verdict check_contains_refinement(const VerifyConfig& cfg,
                                  SetModel::Mutant mutant = SetModel::Mutant::None);

/// Every completed add: the successful path performs one insertion effect
/// (with an extracted (a, n, b) instance) and modifies the set nowhere else;
/// the failing path saw the key present. Includes solo runs, runs against an
/// interfering reader/remover, and for NoValidate the two-writer race that
/// exhibits the missing validation.
Verdict check_add_refinement(const VerifyConfig& cfg,
                             SetModel::Mutant mutant = SetModel::Mutant::None);

/// The deletion counterpart of check_add_refinement.
Verdict check_remove_refinement(const VerifyConfig& cfg,
                                SetModel::Mutant mutant = SetModel::Mutant::None);

/// The rely catalogue. R5: a contains cursor stays list-reachable or marked.
/// R10: while contains computes its result, its node keeps its mark once set
/// and its value. R11: whenever the key stays in the abstract set, one node
/// witnesses it throughout. R13: values strictly ascend along the list.
/// R24: every operation's pred pointer reaches Tail. R20: nobody else writes
/// the fresh node's fields during the linking phase of add. R21/R27: nobody
/// else writes the locked nodes' fields during the decided phase of add /
/// remove.
enum class RelyId { R5, R10, R11, R13, R24, R20, R21, R27 };

const char* rely_name(RelyId id);
std::vector<RelyId> rely_catalog();

/// The named condition as an interval predicate, instantiated for process p
/// probing key x (used to replay witnesses).
IntvPred rely_pred(const SetModel& m, RelyId id, Proc p, std::int64_t x);

/// Evaluates the named condition over every interval of every enumerated
/// stream of one contains racing one add or remove (the latter optionally
/// faulty).
Verdict check_rely(const VerifyConfig& cfg, RelyId id,
                   SetModel::Mutant env = SetModel::Mutant::None);

/// All catalogue entries over a single shared enumeration pass.
std::vector<Verdict> check_rely_all(const VerifyConfig& cfg,
                                    SetModel::Mutant env = SetModel::Mutant::None);

/// The algebraic law suite, checked on randomly generated streams and
/// predicates plus small exhaustive program enumerations. Passing opts with a
/// deliberately broken engine must make at least one law fail.
struct LawReport {
  std::vector<Verdict> laws;
  bool all_pass() const;
  Json to_json() const;
};
LawReport law_suite(std::uint64_t seed = 1, EvalOptions opts = {});

}  // namespace lsv
