#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lsv/error.hpp"
#include "lsv/value.hpp"

namespace lsv {

/// Node field layout: a node occupies 4 consecutive addresses.
enum class Field : std::uint32_t { Val = 0, Nxt = 1, Mrk = 2, Lck = 3 };

constexpr std::uint32_t kNodeSize = 4;

inline std::uint32_t field_offset(Field f) { return static_cast<std::uint32_t>(f); }

inline const char* field_name(Field f) {
  switch (f) {
    case Field::Val: return "val";
    case Field::Nxt: return "nxt";
    case Field::Mrk: return "mrk";
    case Field::Lck: return "lck";
  }
  return "?";
}

/// A location is either a named variable (optionally owned by a process) or a
/// heap address. Var and Addr namespaces are disjoint.
struct Location {
  enum class Kind : std::uint8_t { Var, Addr };

  Kind kind;
  std::string var_name;       // Var only
  std::optional<Proc> owner;  // Var only
  std::uint32_t addr = 0;     // Addr only

  static Location variable(std::string name, std::optional<Proc> owner = std::nullopt) {
    Location l;
    l.kind = Kind::Var;
    l.var_name = std::move(name);
    l.owner = owner;
    return l;
  }
  static Location address(std::uint32_t a) {
    Location l;
    l.kind = Kind::Addr;
    l.addr = a;
    return l;
  }

  bool operator==(const Location& o) const {
    if (kind != o.kind) return false;
    return kind == Kind::Addr ? addr == o.addr : (var_name == o.var_name && owner == o.owner);
  }

  std::string to_string() const {
    if (kind == Kind::Addr) return "#" + std::to_string(addr);
    if (owner) return var_name + "@p" + std::to_string(*owner);
    return var_name;
  }
};

/// Dense index space over a fixed finite location universe: addresses first,
/// variables after. States are total on this universe.
using LocIdx = std::uint32_t;

class LocationUniverse {
 public:
  explicit LocationUniverse(std::uint32_t addr_count = 0) : addr_count_(addr_count) {}

  std::uint32_t addr_count() const { return addr_count_; }
  std::uint32_t size() const { return addr_count_ + static_cast<std::uint32_t>(vars_.size()); }

  LocIdx add_var(const std::string& name, std::optional<Proc> owner = std::nullopt) {
    std::string key = var_key(name, owner);
    auto it = var_index_.find(key);
    if (it != var_index_.end()) return it->second;
    LocIdx idx = addr_count_ + static_cast<std::uint32_t>(vars_.size());
    vars_.push_back({name, owner});
    var_index_.emplace(std::move(key), idx);
    return idx;
  }

  LocIdx index_of(const Location& l) const {
    if (l.kind == Location::Kind::Addr) {
      if (l.addr >= addr_count_) fail(Err::DanglingAddr, "address out of pool: " + l.to_string());
      return l.addr;
    }
    auto it = var_index_.find(var_key(l.var_name, l.owner));
    if (it == var_index_.end()) fail(Err::UnknownLocation, "unknown variable: " + l.to_string());
    return it->second;
  }

  std::optional<LocIdx> try_var(const std::string& name, std::optional<Proc> owner = std::nullopt) const {
    auto it = var_index_.find(var_key(name, owner));
    if (it == var_index_.end()) return std::nullopt;
    return it->second;
  }

  bool is_addr(LocIdx i) const { return i < addr_count_; }

  Location location_of(LocIdx i) const {
    if (i < addr_count_) return Location::address(i);
    const auto& v = vars_.at(i - addr_count_);
    return Location::variable(v.name, v.owner);
  }

  std::optional<Proc> owner_of(LocIdx i) const {
    if (i < addr_count_) return std::nullopt;
    return vars_.at(i - addr_count_).owner;
  }

 private:
  struct VarInfo {
    std::string name;
    std::optional<Proc> owner;
  };

  static std::string var_key(const std::string& name, std::optional<Proc> owner) {
    return owner ? name + "@p" + std::to_string(*owner) : name;
  }

  std::uint32_t addr_count_;
  std::vector<VarInfo> vars_;
  std::unordered_map<std::string, LocIdx> var_index_;
};

}  // namespace lsv
