#pragma once

#include <array>

#include "lsv/exec.hpp"

namespace lsv {

struct SetConfig {
  std::uint32_t pool = 6;                     // node slots; slots 0/1 are the sentinels
  std::vector<std::int64_t> domain = {1, 2};  // candidate keys
  std::vector<Proc> procs = {0, 1};
};

/// The lazy list-based set at desk scale: a fixed pool of node slots, the
/// fine-grained operations, their coarse-grained counterparts, and the state
/// and interval predicates relating the two.
class SetModel {
 public:
  /// Seeded faults for checking that the verdicts catch real bugs.
  /// SkipMark: remove unlinks without first setting the marked bit.
  /// SwapLink: add links the new node into the list before its nxt is set.
  /// NoValidate: locate returns without re-checking pred/curr under the locks.
  /// NoMrkCheck: contains reports a key present even on a marked node.
  enum class Mutant { None, SkipMark, SwapLink, NoValidate, NoMrkCheck };

  explicit SetModel(SetConfig cfg = {});

  const SetConfig& config() const { return cfg_; }
  std::shared_ptr<LocationUniverse> universe() const { return uni_; }

  std::uint32_t slot_base(std::uint32_t slot) const { return slot * kNodeSize; }
  std::uint32_t head_base() const { return 0; }
  std::uint32_t tail_base() const { return kNodeSize; }

  Location head() const { return Location::variable("Head"); }
  Location tail() const { return Location::variable("Tail"); }
  Location n1(Proc p) const { return Location::variable("n1", p); }
  Location n2(Proc p) const { return Location::variable("n2", p); }
  Location n3(Proc p) const { return Location::variable("n3", p); }
  Location res(Proc p) const { return Location::variable("res", p); }

  /// All heap cell locations, minus the given cells.
  std::vector<Location> cells_except(const std::vector<LocIdx>& excluded = {}) const;

  struct Heap {
    State state;
    std::vector<std::uint32_t> free_nodes;  // unused slot bases, allocation order
  };

  /// Sentinel list Head(-inf) -> seeded keys ascending -> Tail(+inf), with all
  /// remaining slots on the free list and all permissions zero.
  Heap init_heap(std::vector<std::int64_t> seeded = {}) const;

  // Heap queries on a single state. set_addr: bases of the unmarked nodes
  // reachable from Head; abs_set: their values; in_set: node at `base` holds x
  // and counts.
  std::vector<std::uint32_t> set_addr(const State& sigma) const;
  std::vector<Value> abs_set(const State& sigma) const;
  bool in_set(std::uint32_t base, const Value& x, const State& sigma) const;

  /// Values strictly ascend along the chain from Head (marked nodes included).
  bool sorted_chain(const State& sigma) const;

  // Expressions.
  Expr in_abs_set(std::int64_t x) const;
  static Expr located_expr(const Expr& pred, const Expr& curr);

  // Fine-grained operations.
  Command mk_search(Proc p, std::int64_t x, const Location& pred, const Location& curr) const;
  Command mk_locate(Proc p, std::int64_t x, const Location& pred, const Location& curr,
                    Mutant m = Mutant::None) const;
  Command mk_contains(Proc p, std::int64_t x, Mutant m = Mutant::None) const;
  Command mk_add(Proc p, std::int64_t x, Mutant m = Mutant::None) const;
  Command mk_remove(Proc p, std::int64_t x, Mutant m = Mutant::None) const;

  // Coarse-grained abstractions.
  Command mk_cgcon(Proc p, std::int64_t x) const;
  Command mk_cg_add(Proc p, std::int64_t x) const;
  Command mk_cg_remove(Proc p, std::int64_t x) const;

  /// p holds write permission on one of base's val/mrk/nxt cells.
  StateFn write_fields(Proc p, std::uint32_t base) const;
  /// At some point p can write a val/mrk/nxt cell of a node currently in the set.
  IntvPred mod_set(Proc p) const;
  /// No other process ever has write permission on base's four cells.
  IntvPred int_free(Proc p, std::uint32_t base) const;

  /// One candidate (a, n, b) instance of the insertion effect: just before the
  /// interval a -> b with a.val < x < b.val, throughout it a points at the
  /// fresh node n carrying (x, b, unmarked, unlocked), no interference on a or
  /// b, and p writes nothing but a's nxt cell.
  IntvPred insert_body(Proc p, std::int64_t x, std::uint32_t a, std::uint32_t n,
                       std::uint32_t b) const;
  IntvPred insert_pred(Proc p, std::int64_t x) const;

  /// One candidate (a, n, b) instance of the deletion effect: just before the
  /// interval a -> n with n carrying (x, b, unmarked, locked by p), throughout
  /// it n is marked or already unlinked, no interference on a or n, and p
  /// writes nothing but a's nxt and n's mrk cells.
  IntvPred delete_body(Proc p, std::int64_t x, std::uint32_t a, std::uint32_t n,
                       std::uint32_t b) const;
  IntvPred delete_pred(Proc p, std::int64_t x) const;

  /// Ordered distinct slot-base triples (a, n, b), the witness domain of the
  /// two predicates above.
  std::vector<std::array<std::uint32_t, 3>> node_triples() const;

  /// Shared context for behaviour checks: heap cells plus Head/Tail/res_p;
  /// the wider variant adds p's node pointers.
  std::vector<Location> context_L(Proc p) const;
  std::vector<Location> context_M(Proc p) const;

 private:
  Expr preIns(std::int64_t x, std::uint32_t a, std::uint32_t b) const;
  Expr preDel(Proc p, std::int64_t x, std::uint32_t a, std::uint32_t n, std::uint32_t b) const;
  IntvPred frame_except(Proc p, const std::vector<LocIdx>& writable) const;

  SetConfig cfg_;
  std::shared_ptr<LocationUniverse> uni_;
};

}  // namespace lsv
