#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "lsv/error.hpp"

namespace lsv {

using Time = std::int32_t;

constexpr Time kTimeInf = std::numeric_limits<Time>::max();
constexpr Time kTimeNegInf = std::numeric_limits<Time>::min();

/// A contiguous set of times. OpenRight models intervals whose least upper
/// bound is infinity; their observable states are truncated at the stream
/// horizon.
class Interval {
 public:
  enum class Kind : std::uint8_t { Empty, Bounded, OpenRight };

  Interval() : kind_(Kind::Empty), lo_(0), hi_(0) {}

  static Interval empty() { return Interval(); }
  static Interval bounded(Time lo, Time hi) {
    if (lo > hi) fail(Err::IntervalOutOfWindow, "bounded interval requires lo <= hi");
    Interval d;
    d.kind_ = Kind::Bounded;
    d.lo_ = lo;
    d.hi_ = hi;
    return d;
  }
  static Interval open_right(Time lo) {
    Interval d;
    d.kind_ = Kind::OpenRight;
    d.lo_ = lo;
    d.hi_ = 0;
    return d;
  }

  Kind kind() const { return kind_; }
  bool is_empty() const { return kind_ == Kind::Empty; }
  bool is_bounded() const { return kind_ == Kind::Bounded; }
  bool is_infinite() const { return kind_ == Kind::OpenRight; }

  /// glb(empty) = +inf, lub(empty) = -inf by convention.
  Time glb() const { return is_empty() ? kTimeInf : lo_; }
  Time lub() const {
    if (is_empty()) return kTimeNegInf;
    if (is_infinite()) return kTimeInf;
    return hi_;
  }

  bool contains(Time t) const {
    switch (kind_) {
      case Kind::Empty: return false;
      case Kind::Bounded: return lo_ <= t && t <= hi_;
      case Kind::OpenRight: return lo_ <= t;
    }
    return false;
  }

  bool subset_of(const Interval& o) const {
    if (is_empty()) return true;
    if (o.is_empty()) return false;
    if (lo_ < o.lo_) return false;
    if (is_infinite()) return o.is_infinite();
    return o.is_infinite() || hi_ <= o.hi_;
  }

  bool operator==(const Interval& o) const {
    if (kind_ != o.kind_) return false;
    if (kind_ == Kind::Empty) return true;
    if (kind_ == Kind::OpenRight) return lo_ == o.lo_;
    return lo_ == o.lo_ && hi_ == o.hi_;
  }

  /// Delta adjoins Delta' iff every time of Delta precedes every time of
  /// Delta' and the union is contiguous. Empty adjoins everything.
  static bool adjoins(const Interval& d1, const Interval& d2) {
    if (d1.is_empty() || d2.is_empty()) return true;
    if (d1.is_infinite()) return false;  // no time can follow an unbounded interval
    return d2.glb() == d1.lub() + 1;
  }

  /// Compact key for memo tables; valid for times in [0, 2^14).
  std::uint32_t key() const {
    return (static_cast<std::uint32_t>(kind_) << 28) |
           (static_cast<std::uint32_t>(lo_ & 0x3fff) << 14) |
           static_cast<std::uint32_t>(hi_ & 0x3fff);
  }

  std::string to_string() const {
    switch (kind_) {
      case Kind::Empty: return "[]";
      case Kind::Bounded: return "[" + std::to_string(lo_) + "," + std::to_string(hi_) + "]";
      case Kind::OpenRight: return "[" + std::to_string(lo_) + ",inf)";
    }
    return "?";
  }

 private:
  Kind kind_;
  Time lo_, hi_;
};

inline bool adjoins(const Interval& a, const Interval& b) { return Interval::adjoins(a, b); }

}  // namespace lsv
