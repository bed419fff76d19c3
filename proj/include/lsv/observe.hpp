#pragma once

#include <functional>

#include "lsv/expr.hpp"
#include "lsv/intv_pred.hpp"

namespace lsv {

/// Lifts of state predicates to interval predicates, over the actual states
/// of the interval (clipped to the recorded window). A state in which the
/// expression cannot be evaluated (null dereference, bad type) counts as not
/// satisfying it.
IntvPred sp_all(Expr c);    // c in every actual state
IntvPred sp_some(Expr c);   // c in some actual state
IntvPred sp_begin(Expr c);  // non-empty interval whose first state satisfies c
IntvPred sp_end(Expr c);    // non-empty interval whose last state satisfies c

/// The location keeps, throughout the interval, the value it had in the state
/// immediately before it.
IntvPred sp_stable(Location va);

/// If c held just before the interval then it holds in all its states.
IntvPred sp_inv(Expr c);

/// Lifts of arbitrary state functions (used for permission predicates, which
/// are not expressions).
using StateFn = std::function<bool(const State&)>;
IntvPred sf_all(std::string name, StateFn f);
IntvPred sf_some(std::string name, StateFn f);

StateFn fn_write_perm(Location va, Proc p);
StateFn fn_read_perm(Location va, Proc p);
/// Some process other than p holds write permission on one of the locations.
StateFn fn_interference(std::vector<Location> vas, Proc p);

/// p never has write permission on va within the interval.
IntvPred no_write(Location va, Proc p);

/// Apparent-state evaluation for process p: the set of per-location values p
/// could have observed (those it held read permission for), combined across
/// the accessed locations. def_: c holds in every combination; pos_: in some
/// combination. Combinations in which c cannot be evaluated are skipped.
IntvPred def_apparent(Proc p, Expr c);
IntvPred pos_apparent(Proc p, Expr c);

/// Cap on the number of apparent-state combinations per evaluation.
constexpr std::size_t kApparentCap = 1u << 16;

/// Direct (non-memoised) forms, for evaluation with parameters computed on
/// the fly.
bool def_apparent_holds(Proc p, const Expr& c, const Interval& d, EvalCtx& ctx);
bool pos_apparent_holds(Proc p, const Expr& c, const Interval& d, EvalCtx& ctx);

/// Evaluates a state expression, mapping evaluation errors to false.
bool holds_in(const Expr& c, const State& sigma);

}  // namespace lsv
