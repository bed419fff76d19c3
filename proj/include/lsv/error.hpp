#pragma once

#include <stdexcept>
#include <string>

namespace lsv {

enum class Err {
  TypeError,
  DerefNull,
  DanglingAddr,
  UnknownLocation,
  IntervalOutOfWindow,
  ContextClash,
  CapExceeded,
  AllocExhausted,
  PoolTooSmall,
  MalformedHistory,
  Usage,
};

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& what) { throw Error(code, what); }

}  // namespace lsv
