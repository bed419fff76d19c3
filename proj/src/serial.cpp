#include "lsv/serial.hpp"

#include <sstream>

namespace lsv {

Json value_to_json(const Value& v) {
  if (v.is_null()) return nullptr;
  if (v.is_bool()) return v.as_bool();
  if (v.is_int()) return v.as_int();
  if (v.is_addr()) return Json{{"addr", v.as_addr()}};
  if (v.is_proc()) return Json{{"proc", v.as_proc()}};
  if (v.is_neg_inf()) return "-inf";
  return "+inf";
}

Value value_from_json(const Json& j) {
  if (j.is_null()) return Value::null();
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (j.is_number_integer()) return Value::integer(j.get<std::int64_t>());
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "-inf") return Value::neg_inf();
    if (s == "+inf") return Value::pos_inf();
    fail(Err::TypeError, "bad value literal: " + s);
  }
  if (j.is_object()) {
    if (j.contains("addr")) return Value::addr(j["addr"].get<std::uint32_t>());
    if (j.contains("proc")) return Value::proc(j["proc"].get<Proc>());
  }
  fail(Err::TypeError, "bad value json: " + j.dump());
}

std::string fraction_to_string(const Fraction& f) {
  return std::to_string(f.numerator()) + "/" + std::to_string(f.denominator());
}

Fraction fraction_from_string(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) fail(Err::TypeError, "bad fraction: " + s);
  std::int64_t num = std::stoll(s.substr(0, slash));
  std::int64_t den = std::stoll(s.substr(slash + 1));
  if (den == 0) fail(Err::TypeError, "zero denominator: " + s);
  return Fraction(num, den);
}

namespace {

Location location_from_name(const std::string& name, std::uint32_t addr_count) {
  if (!name.empty() && name[0] == '#') {
    std::uint32_t a = static_cast<std::uint32_t>(std::stoul(name.substr(1)));
    if (a >= addr_count) fail(Err::DanglingAddr, "address outside pool: " + name);
    return Location::address(a);
  }
  auto at = name.rfind("@p");
  if (at != std::string::npos)
    return Location::variable(name.substr(0, at),
                              static_cast<Proc>(std::stoul(name.substr(at + 2))));
  return Location::variable(name);
}

}  // namespace

Json state_to_json(const State& s) {
  const LocationUniverse& uni = s.universe();
  Json store = Json::object();
  for (LocIdx i = 0; i < uni.size(); ++i)
    store[uni.location_of(i).to_string()] = value_to_json(s.get(i));

  Json perm = Json::object();
  for (const auto& e : s.perms()) {
    std::string loc = uni.location_of(e.loc).to_string();
    perm[loc]["p" + std::to_string(e.proc)] = fraction_to_string(e.frac);
  }

  return Json{{"addrs", uni.addr_count()}, {"store", store}, {"perm", perm}};
}

State state_from_json(const Json& j) {
  std::uint32_t addrs = j.at("addrs").get<std::uint32_t>();
  auto uni = std::make_shared<LocationUniverse>(addrs);
  const Json& store = j.at("store");
  for (auto it = store.begin(); it != store.end(); ++it) {
    Location l = location_from_name(it.key(), addrs);
    if (l.kind == Location::Kind::Var) uni->add_var(l.var_name, l.owner);
  }
  State s(uni);
  for (auto it = store.begin(); it != store.end(); ++it)
    s.set(location_from_name(it.key(), addrs), value_from_json(it.value()));
  if (j.contains("perm")) {
    const Json& perm = j.at("perm");
    for (auto it = perm.begin(); it != perm.end(); ++it) {
      LocIdx loc = uni->index_of(location_from_name(it.key(), addrs));
      for (auto pe = it.value().begin(); pe != it.value().end(); ++pe) {
        if (pe.key().size() < 2 || pe.key()[0] != 'p')
          fail(Err::TypeError, "bad process key: " + pe.key());
        Proc p = static_cast<Proc>(std::stoul(pe.key().substr(1)));
        s.set_perm(loc, p, fraction_from_string(pe.value().get<std::string>()));
      }
    }
  }
  return s;
}

std::string stream_to_jsonl(const Stream& s) {
  std::ostringstream out;
  for (const State& st : s.states()) out << state_to_json(st).dump() << "\n";
  return out.str();
}

Stream stream_from_jsonl(const std::string& text) {
  Stream s;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    s.push(state_from_json(Json::parse(line)));
  }
  return s;
}

}  // namespace lsv
