#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "lsv/interval.hpp"
#include "lsv/state.hpp"

namespace lsv {

/// Why a recorded behaviour window ends where it does. Horizon means the
/// scheduler ran out of time budget; OmegaBound means an unbounded loop was
/// cut after the configured number of unrollings.
/// Complete: the behaviour ran to the end. Horizon: cut off by the window
/// bound. OmegaBound: an omega loop was cut at the unroll bound. Stuck: no
/// process could take a step (a blocked guard or lock); no complete behaviour
/// extends such a prefix.
enum class Truncation : std::uint8_t { Complete, Horizon, OmegaBound, Stuck };

/// A finite window of a stream: one state per time in [0, horizon].
class Stream {
 public:
  Stream() = default;
  explicit Stream(std::vector<State> states) : states_(std::move(states)) {}

  Time horizon() const { return static_cast<Time>(states_.size()) - 1; }
  std::size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty(); }

  const State& at(Time t) const {
    if (t < 0 || static_cast<std::size_t>(t) >= states_.size())
      fail(Err::IntervalOutOfWindow, "stream access at t=" + std::to_string(t));
    return states_[static_cast<std::size_t>(t)];
  }
  State& at(Time t) {
    if (t < 0 || static_cast<std::size_t>(t) >= states_.size())
      fail(Err::IntervalOutOfWindow, "stream access at t=" + std::to_string(t));
    return states_[static_cast<std::size_t>(t)];
  }

  void push(State s) { states_.push_back(std::move(s)); }
  void truncate(std::size_t n) { states_.resize(n); }

  /// Full window as an interval.
  Interval whole() const {
    if (states_.empty()) return Interval::empty();
    return Interval::bounded(0, horizon());
  }

  /// Times of an interval clipped to the recorded window, in order.
  std::vector<Time> times(const Interval& d) const {
    std::vector<Time> out;
    if (d.is_empty() || states_.empty()) return out;
    Time lo = std::max<Time>(d.glb(), 0);
    Time hi = d.is_infinite() ? horizon() : std::min<Time>(d.lub(), horizon());
    for (Time t = lo; t <= hi; ++t) out.push_back(t);
    return out;
  }

  const std::vector<State>& states() const { return states_; }

 private:
  std::vector<State> states_;
};

}  // namespace lsv
