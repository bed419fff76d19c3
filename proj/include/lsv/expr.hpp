#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "lsv/state.hpp"

namespace lsv {

class ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

enum class BinOp { Lt, Le, Gt, Ge, Eq, Ne, And, Or, Plus, Minus };

class ExprNode {
 public:
  enum class Kind {
    Const,      // literal value
    Loc,        // variable or address location
    Deref,      // *ae
    FieldAddr,  // ae . f
    FieldVal,   // ae |-> f  ==  *(ae . f)
    Binary,
    Not,
    ReachFrom,     // link reachability: RE(from, to)
    AbsSetMember,  // value membership in the abstract set rooted at a location
  };

  Kind kind;
  Value value;     // Const
  Location loc;    // Loc; also root location for AbsSetMember
  Field field{};   // FieldAddr / FieldVal
  BinOp op{};      // Binary
  std::vector<Expr> kids;

  std::string to_string() const;
};

// Constructors.
Expr e_const(Value v);
Expr e_int(std::int64_t k);
Expr e_bool(bool b);
Expr e_null();
Expr e_loc(Location l);
Expr e_var(const std::string& name, std::optional<Proc> owner = std::nullopt);
Expr e_deref(Expr a);
Expr e_field_addr(Expr a, Field f);
Expr e_field_val(Expr a, Field f);
Expr e_bin(BinOp op, Expr l, Expr r);
Expr e_not(Expr a);
Expr e_and(Expr l, Expr r);
Expr e_or(Expr l, Expr r);
Expr e_eq(Expr l, Expr r);
Expr e_ne(Expr l, Expr r);
Expr e_lt(Expr l, Expr r);
Expr e_ge(Expr l, Expr r);
Expr e_gt(Expr l, Expr r);
Expr e_reach(Expr from, Expr to);
Expr e_abs_member(Expr x, Location head);

/// Collects the locations read during an evaluation.
class ReadRecorder {
 public:
  void note(LocIdx i) {
    for (LocIdx j : reads_)
      if (j == i) return;
    reads_.push_back(i);
  }
  const std::vector<LocIdx>& reads() const { return reads_; }

 private:
  std::vector<LocIdx> reads_;
};

/// Evaluates an expression in a single state. And/Or short-circuit, so the
/// recorded read set depends on the state.
Value eval_expr(const Expr& e, const State& sigma, ReadRecorder* rec = nullptr);

/// A state restricted to a set of bound locations. Reading an unbound
/// location raises UnknownLocation; callers decide how to treat that.
class PartialState {
 public:
  explicit PartialState(std::shared_ptr<const LocationUniverse> uni) : uni_(std::move(uni)) {}

  const LocationUniverse& universe() const { return *uni_; }

  void bind(LocIdx i, Value v) { bound_[i] = v; }

  Value get(LocIdx i) const {
    auto it = bound_.find(i);
    if (it == bound_.end())
      fail(Err::UnknownLocation, "read outside the apparent state: loc " + std::to_string(i));
    return it->second;
  }

 private:
  std::shared_ptr<const LocationUniverse> uni_;
  std::unordered_map<LocIdx, Value> bound_;
};

Value eval_expr(const Expr& e, const PartialState& sigma);

/// A store view for incremental evaluation: cached shared reads win, p-owned
/// variables read through to the base state (and are recorded), and any other
/// location raises UnknownLocation, reported via missing().
class CachedView {
 public:
  CachedView(const State& base, const std::unordered_map<LocIdx, Value>& cache, Proc p)
      : base_(&base), cache_(&cache), p_(p) {}

  const LocationUniverse& universe() const { return base_->universe(); }

  Value get(LocIdx i) const {
    auto it = cache_->find(i);
    if (it != cache_->end()) return it->second;
    if (base_->universe().owner_of(i) == std::optional<Proc>(p_)) {
      bool seen = false;
      for (LocIdx j : local_reads_) seen = seen || j == i;
      if (!seen) local_reads_.push_back(i);
      return base_->get(i);
    }
    missing_ = i;
    fail(Err::UnknownLocation, "shared location not yet read: loc " + std::to_string(i));
  }

  std::optional<LocIdx> missing() const { return missing_; }
  const std::vector<LocIdx>& local_reads() const { return local_reads_; }

 private:
  const State* base_;
  const std::unordered_map<LocIdx, Value>* cache_;
  Proc p_;
  mutable std::optional<LocIdx> missing_;
  mutable std::vector<LocIdx> local_reads_;
};

Value eval_expr(const Expr& e, const CachedView& sigma);

/// Smallest set of locations that must be read to evaluate e in sigma.
std::vector<LocIdx> accessed(const Expr& e, const State& sigma);

// Heap walks shared between expression evaluation and the set model. `from`
// and `to` are values (addresses, or null); cycles are cut at the pool size.
bool heap_reachable(Value from, Value to, const State& sigma, ReadRecorder* rec = nullptr);
std::vector<std::uint32_t> heap_set_addrs(Value head, const State& sigma, ReadRecorder* rec = nullptr);

}  // namespace lsv
