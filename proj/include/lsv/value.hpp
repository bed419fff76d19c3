#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "lsv/error.hpp"

namespace lsv {

using Proc = std::uint32_t;

/// Tagged scalar. Only NegInf < Int < PosInf are ordered; comparing anything
/// else with a relational operator is a TypeError. Equality is total.
class Value {
 public:
  enum class Kind : std::uint8_t { Null, Bool, Int, Addr, NegInf, PosInf, ProcId };

  Value() : kind_(Kind::Null), payload_(0) {}

  static Value null() { return Value(); }
  static Value boolean(bool b) { return Value(Kind::Bool, b ? 1 : 0); }
  static Value integer(std::int64_t k) { return Value(Kind::Int, k); }
  static Value addr(std::uint32_t a) { return Value(Kind::Addr, a); }
  static Value neg_inf() { return Value(Kind::NegInf, 0); }
  static Value pos_inf() { return Value(Kind::PosInf, 0); }
  static Value proc(Proc p) { return Value(Kind::ProcId, p); }

  Kind kind() const { return kind_; }
  bool is_null() const { return kind_ == Kind::Null; }
  bool is_addr() const { return kind_ == Kind::Addr; }
  bool is_bool() const { return kind_ == Kind::Bool; }
  bool is_int() const { return kind_ == Kind::Int; }
  bool is_proc() const { return kind_ == Kind::ProcId; }
  bool is_neg_inf() const { return kind_ == Kind::NegInf; }
  bool is_pos_inf() const { return kind_ == Kind::PosInf; }

  bool as_bool() const {
    if (kind_ != Kind::Bool) fail(Err::TypeError, "expected Bool, got " + to_string());
    return payload_ != 0;
  }
  std::int64_t as_int() const {
    if (kind_ != Kind::Int) fail(Err::TypeError, "expected Int, got " + to_string());
    return payload_;
  }
  std::uint32_t as_addr() const {
    if (kind_ != Kind::Addr) fail(Err::TypeError, "expected Addr, got " + to_string());
    return static_cast<std::uint32_t>(payload_);
  }
  Proc as_proc() const {
    if (kind_ != Kind::ProcId) fail(Err::TypeError, "expected ProcId, got " + to_string());
    return static_cast<Proc>(payload_);
  }

  bool operator==(const Value& o) const { return kind_ == o.kind_ && payload_ == o.payload_; }
  bool operator!=(const Value& o) const { return !(*this == o); }

  /// Three-way compare under the sentinel order; TypeError for unordered kinds.
  int compare(const Value& o) const {
    auto rank = [](const Value& v) -> std::optional<int> {
      switch (v.kind_) {
        case Kind::NegInf: return -1;
        case Kind::Int: return 0;
        case Kind::PosInf: return 1;
        default: return std::nullopt;
      }
    };
    auto ra = rank(*this), rb = rank(o);
    if (!ra || !rb) fail(Err::TypeError, "unordered values: " + to_string() + " vs " + o.to_string());
    if (*ra != *rb) return *ra < *rb ? -1 : 1;
    if (*ra != 0) return 0;  // two infinities of the same sign
    return payload_ < o.payload_ ? -1 : payload_ > o.payload_ ? 1 : 0;
  }

  std::string to_string() const {
    switch (kind_) {
      case Kind::Null: return "null";
      case Kind::Bool: return payload_ ? "true" : "false";
      case Kind::Int: return std::to_string(payload_);
      case Kind::Addr: return "#" + std::to_string(payload_);
      case Kind::NegInf: return "-inf";
      case Kind::PosInf: return "+inf";
      case Kind::ProcId: return "p" + std::to_string(payload_);
    }
    return "?";
  }

  std::uint64_t hash() const {
    std::uint64_t h = static_cast<std::uint64_t>(kind_) * 0x9e3779b97f4a7c15ull;
    h ^= static_cast<std::uint64_t>(payload_) + 0x517cc1b727220a95ull + (h << 6) + (h >> 2);
    return h;
  }

 private:
  Value(Kind k, std::int64_t p) : kind_(k), payload_(p) {}

  Kind kind_;
  std::int64_t payload_;
};

}  // namespace lsv
