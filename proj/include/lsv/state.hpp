#pragma once

#include <boost/rational.hpp>
#include <algorithm>
#include <cstdint>
#include <memory>
#include <vector>

#include "lsv/location.hpp"
#include "lsv/value.hpp"

namespace lsv {

/// Permissions are exact rationals; the per-location sum over processes must
/// never exceed 1.
using Fraction = boost::rational<std::int64_t>;

enum class PermMode { Write, Read, None };

/// A state: total store over the location universe plus a sparse fractional
/// permission table. Value semantics throughout; copies are cheap enough at
/// desk scale.
class State {
 public:
  State() = default;
  explicit State(std::shared_ptr<const LocationUniverse> uni)
      : uni_(std::move(uni)), store_(uni_->size(), Value::null()) {}

  const LocationUniverse& universe() const { return *uni_; }
  std::shared_ptr<const LocationUniverse> universe_ptr() const { return uni_; }

  Value get(LocIdx i) const {
    if (i >= store_.size()) fail(Err::UnknownLocation, "location index out of universe");
    return store_[i];
  }
  Value get(const Location& l) const { return get(uni_->index_of(l)); }

  void set(LocIdx i, Value v) {
    if (i >= store_.size()) fail(Err::UnknownLocation, "location index out of universe");
    store_[i] = v;
  }
  void set(const Location& l, Value v) { set(uni_->index_of(l), v); }

  struct PermEntry {
    LocIdx loc;
    Proc proc;
    Fraction frac;
  };

  const std::vector<PermEntry>& perms() const { return perms_; }

  void clear_perms() { perms_.clear(); }

  /// Sets the permission of (loc, proc); asserts the per-location sum stays
  /// within [0, 1].
  void set_perm(LocIdx loc, Proc p, Fraction f) {
    auto it = std::find_if(perms_.begin(), perms_.end(),
                           [&](const PermEntry& e) { return e.loc == loc && e.proc == p; });
    if (it != perms_.end()) {
      if (f == Fraction(0))
        perms_.erase(it);
      else
        it->frac = f;
    } else if (f != Fraction(0)) {
      perms_.push_back({loc, p, f});
    }
    Fraction sum(0);
    for (const auto& e : perms_)
      if (e.loc == loc) sum += e.frac;
    if (sum > Fraction(1)) fail(Err::TypeError, "permission sum exceeds 1 at loc " + std::to_string(loc));
  }

  Fraction perm(LocIdx loc, Proc p) const {
    for (const auto& e : perms_)
      if (e.loc == loc && e.proc == p) return e.frac;
    return Fraction(0);
  }

  PermMode perm_mode(LocIdx loc, Proc p) const {
    Fraction f = perm(loc, p);
    if (f == Fraction(1)) return PermMode::Write;
    if (f > Fraction(0)) return PermMode::Read;
    return PermMode::None;
  }
  PermMode perm_mode(const Location& l, Proc p) const { return perm_mode(uni_->index_of(l), p); }

  bool can_write(LocIdx loc, Proc p) const { return perm(loc, p) == Fraction(1); }
  bool can_read(LocIdx loc, Proc p) const {
    Fraction f = perm(loc, p);
    return f > Fraction(0) && f < Fraction(1);
  }

  /// True iff some process other than p holds write permission on a location
  /// in the given set.
  bool interfered(const std::vector<LocIdx>& locs, Proc p) const {
    for (const auto& e : perms_) {
      if (e.proc == p || e.frac != Fraction(1)) continue;
      if (std::find(locs.begin(), locs.end(), e.loc) != locs.end()) return true;
    }
    return false;
  }

  bool operator==(const State& o) const { return store_ == o.store_ && perm_set_equal(o); }
  bool operator!=(const State& o) const { return !(*this == o); }

  bool store_equal(const State& o) const { return store_ == o.store_; }

  std::uint64_t store_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& v : store_) h = (h ^ v.hash()) * 1099511628211ull;
    return h;
  }

 private:
  bool perm_set_equal(const State& o) const {
    if (perms_.size() != o.perms_.size()) return false;
    for (const auto& e : perms_)
      if (o.perm(e.loc, e.proc) != e.frac) return false;
    return true;
  }

  std::shared_ptr<const LocationUniverse> uni_;
  std::vector<Value> store_;
  std::vector<PermEntry> perms_;
};

}  // namespace lsv
