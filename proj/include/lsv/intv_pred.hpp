#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lsv/stream.hpp"

namespace lsv {

class PredNode;

/// An interval predicate: (Interval, Stream) -> bool. Nodes are immutable and
/// shared; evaluation is memoised per (node, interval) within an EvalCtx.
using IntvPred = std::shared_ptr<const PredNode>;

struct EvalOptions {
  /// Deliberately broken chop (drops the splits with an empty side). Only
  /// used to check that the law suite catches a bad engine.
  bool buggy_chop = false;
  /// Deliberately broken iteration (rejects the empty interval), the second
  /// engine fault the law suite must catch.
  bool buggy_omega = false;
};

class EvalCtx {
 public:
  explicit EvalCtx(const Stream& s, EvalOptions opts = {}) : s_(&s), opts_(opts) {}

  const Stream& stream() const { return *s_; }
  const EvalOptions& options() const { return opts_; }

  void reset() {
    memo_.clear();
    busy_.clear();
  }

 private:
  friend bool eval(const IntvPred&, const Interval&, EvalCtx&);

  const Stream* s_;
  EvalOptions opts_;
  std::unordered_map<std::uint64_t, bool> memo_;
  std::unordered_set<std::uint64_t> busy_;
};

class PredNode {
 public:
  enum class Kind {
    Lift,     // arbitrary (interval, ctx) -> bool
    EmptyP,   // interval is empty
    Not,
    And,
    Or,
    Implies,
    Chop,
    Omega,    // greatest fixpoint of z = (g ; z) or empty
    Box,      // g on every subinterval
    Diamond,  // g on some subinterval
    Prev,     // g on some interval adjoining from the left
  };

  Kind kind;
  std::uint64_t id;
  std::string name;
  std::function<bool(const Interval&, EvalCtx&)> fn;  // Lift only
  std::vector<IntvPred> kids;
};

bool eval(const IntvPred& g, const Interval& d, EvalCtx& ctx);

IntvPred p_lift(std::string name, std::function<bool(const Interval&, EvalCtx&)> fn);
IntvPred p_true();
IntvPred p_false();
IntvPred p_empty();
IntvPred p_not(IntvPred g);
IntvPred p_and(IntvPred a, IntvPred b);
IntvPred p_or(IntvPred a, IntvPred b);
IntvPred p_implies(IntvPred a, IntvPred b);
IntvPred p_all(std::vector<IntvPred> gs);
IntvPred p_any(std::vector<IntvPred> gs);
IntvPred p_chop(IntvPred a, IntvPred b);
IntvPred p_seq(std::vector<IntvPred> gs);  // right-nested chop
IntvPred p_omega(IntvPred g);
IntvPred p_box(IntvPred g);
IntvPred p_diamond(IntvPred g);
IntvPred p_prev(IntvPred g);
IntvPred p_ne(IntvPred g);  // g and the interval is non-empty

/// All intervals contained in d, clipped to the stream window (includes the
/// empty interval).
std::vector<Interval> subintervals(const Interval& d, const Stream& s);

/// All (left, right) pairs with left adjoining right and their union d,
/// clipped to the window for unbounded d.
struct ChopSplit {
  Interval left, right;
};
std::vector<ChopSplit> chop_splits(const Interval& d, const Stream& s);

/// All intervals of the window (and the empty interval); the domain used by
/// bounded law checks.
std::vector<Interval> window_intervals(const Stream& s);

/// Bounded universal implication: g1 implies g2 on every given interval.
/// Returns the first failing interval, or nullopt if none.
std::optional<Interval> entails_on(const IntvPred& g1, const IntvPred& g2,
                                   const std::vector<Interval>& ds, EvalCtx& ctx);

std::string to_string(const IntvPred& g);

}  // namespace lsv
