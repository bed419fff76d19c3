// Acceptance gate: each criterion runs standalone (argv[1] = 1..8) and prints
// one pass/fail line; exit 0 iff the selected criteria all pass.
#include <chrono>
#include <cstdio>
#include <random>

#include "lsv/observe.hpp"
#include "lsv/runtime.hpp"
#include "lsv/verifier.hpp"

using namespace lsv;

namespace {

bool holds(const Verdict& v) { return v.status == Status::Holds; }
bool refuted(const Verdict& v) { return v.status == Status::Counterexample; }

// --- 1: the overlapping add/contains/remove/add scenario ---------------------

rt::History overlap_fixture(bool remove_succeeds) {
  using rt::Op;
  rt::History h;
  std::uint64_t seq = 0;
  auto inv = [&](int p, Op op, std::int64_t a) {
    h.push_back({true, op, a, std::nullopt, p, ++seq});
  };
  auto res = [&](int p, Op op, std::int64_t a, bool r) {
    h.push_back({false, op, a, r, p, ++seq});
  };
  inv(0, Op::Add, 1);
  inv(1, Op::Contains, 1);
  inv(2, Op::Remove, 1);
  res(0, Op::Add, 1, true);
  res(1, Op::Contains, 1, true);
  res(2, Op::Remove, 1, remove_succeeds);
  inv(2, Op::Add, 2);
  res(2, Op::Add, 2, true);
  return h;
}

std::vector<std::int64_t> replay(const std::vector<rt::SeqOp>& w) {
  rt::SequentialSet s;
  for (const rt::SeqOp& o : w) s.apply(o.op, o.arg);
  return s.values();
}

bool criterion_1() {
  rt::LinResult a = rt::check_linearisable(overlap_fixture(true));
  bool ok = a.linearisable &&
            rt::witness_to_string(a.witness) ==
                "add(1):true; contains(1):true; remove(1):true; add(2):true" &&
            replay(a.witness) == std::vector<std::int64_t>{2};
  rt::LinResult b = rt::check_linearisable(overlap_fixture(false));
  ok = ok && b.linearisable &&
       rt::witness_to_string(b.witness) ==
           "remove(1):false; add(1):true; contains(1):true; add(2):true" &&
       replay(b.witness) == std::vector<std::int64_t>{1, 2};
  std::printf("  witness when remove succeeds: %s\n",
              rt::witness_to_string(a.witness).c_str());
  std::printf("  witness when remove fails:    %s\n",
              rt::witness_to_string(b.witness).c_str());
  return ok;
}

// --- 2: actual vs apparent two-field observation -----------------------------

bool criterion_2() {
  auto uni = std::make_shared<LocationUniverse>(4);
  uni->add_var("v");
  Stream st;
  Fraction half(1, 2);
  for (Time t = 0; t <= 16; ++t) {
    State s(uni);
    s.set(Location::variable("v"), Value::addr(0));
    s.set(Location::address(0), Value::integer(t >= 5 ? 1 : 0));
    s.set(Location::address(1), Value::integer(t >= 11 ? 1 : 0));
    s.set_perm(uni->index_of(Location::variable("v")), 0, half);
    s.set_perm(uni->index_of(Location::address(0)), 0, half);
    s.set_perm(uni->index_of(Location::address(1)), 0, half);
    st.push(s);
  }
  EvalCtx ctx(st);
  Expr fa = e_field_val(e_var("v"), Field::Val);
  Expr fb = e_field_val(e_var("v"), Field::Nxt);
  Interval whole = Interval::bounded(1, 16);
  bool all_ge = eval(sp_all(e_ge(fa, fb)), whole, ctx);
  bool some_gt = eval(sp_some(e_gt(fa, fb)), whole, ctx);
  bool apparent_lt = eval(pos_apparent(0, e_not(e_ge(fa, fb))), whole, ctx);
  std::printf("  always fa>=fb: %d, sometime fa>fb: %d, observable fa<fb: %d\n",
              all_ge, some_gt, apparent_lt);
  return all_ge && some_gt && apparent_lt;
}

// --- 3/4: refinement of the three operations ---------------------------------

bool criterion_3() {
  Verdict v = check_contains_refinement(VerifyConfig{});
  std::printf("  %s: %zu cases, %zu horizon-cut, %zu unroll-cut\n", v.id.c_str(),
              v.cases, v.horizon_cut, v.omega_cut);
  return holds(v) && v.cases > 0;
}

bool criterion_4() {
  Verdict a = check_add_refinement(VerifyConfig{});
  Verdict r = check_remove_refinement(VerifyConfig{});
  std::printf("  %s: %zu cases, %zu effect instances\n", a.id.c_str(), a.cases,
              a.witnesses);
  std::printf("  %s: %zu cases, %zu effect instances\n", r.id.c_str(), r.cases,
              r.witnesses);
  return holds(a) && a.witnesses > 0 && holds(r) && r.witnesses > 0;
}

// --- 5: rely catalogue plus seeded faults ------------------------------------

bool criterion_5() {
  bool ok = true;
  for (const Verdict& v : check_rely_all(VerifyConfig{})) {
    std::printf("  %s: %s over %zu runs\n", v.id.c_str(),
                holds(v) ? "holds" : "FAILED", v.cases);
    ok = ok && holds(v);
  }
  Verdict skip = check_rely(VerifyConfig{}, RelyId::R5, SetModel::Mutant::SkipMark);
  Verdict swap = check_add_refinement(VerifyConfig{}, SetModel::Mutant::SwapLink);
  Verdict nv_a = check_add_refinement(VerifyConfig{}, SetModel::Mutant::NoValidate);
  Verdict nv_r = check_remove_refinement(VerifyConfig{}, SetModel::Mutant::NoValidate);
  std::printf("  unmarked removal refutes R5: %d; premature link refuted: %d; "
              "skipped revalidation refuted: %d/%d\n",
              refuted(skip), refuted(swap), refuted(nv_a), refuted(nv_r));
  return ok && refuted(skip) && refuted(swap) && refuted(nv_a) && refuted(nv_r);
}

// --- 6: law suite and engine mutants -----------------------------------------

bool criterion_6() {
  LawReport healthy = law_suite(1);
  auto failures = [](const LawReport& r) {
    std::size_t n = 0;
    for (const Verdict& v : r.laws) n += v.status == Status::Counterexample;
    return n;
  };
  std::size_t bad_chop = failures(law_suite(1, EvalOptions{.buggy_chop = true}));
  std::size_t bad_omega = failures(law_suite(1, EvalOptions{.buggy_omega = true}));
  std::printf("  healthy: %s; broken chop fails %zu laws; broken loop fails %zu\n",
              healthy.all_pass() ? "all laws hold" : "FAILED", bad_chop, bad_omega);
  return healthy.all_pass() && bad_chop >= 1 && bad_omega >= 1;
}

// --- 7: checker vs brute-force oracle ----------------------------------------

rt::History random_history(std::mt19937_64& g) {
  using rt::Op;
  rt::History h;
  std::uint64_t seq = 0;
  int procs = 3;
  std::vector<std::optional<std::pair<Op, std::int64_t>>> open(procs);
  std::size_t ops = 1 + g() % 8, started = 0;
  while (true) {
    bool any_open = false;
    for (int t = 0; t < procs; ++t) any_open = any_open || open[t].has_value();
    if (started == ops && !any_open) break;
    int t = static_cast<int>(g() % procs);
    if (open[t] && (started == ops || g() % 2)) {
      auto [op, arg] = *open[t];
      open[t].reset();
      if (started == ops && g() % 8 == 0) continue;  // leave pending
      h.push_back({false, op, arg, g() % 2 == 0, t, ++seq});
    } else if (started < ops && !open[t]) {
      Op op = static_cast<Op>(g() % 3);
      std::int64_t arg = 1 + static_cast<std::int64_t>(g() % 3);
      open[t] = {op, arg};
      h.push_back({true, op, arg, std::nullopt, t, ++seq});
      ++started;
    }
  }
  return h;
}

bool criterion_7() {
  std::mt19937_64 g(2026);
  int agree = 0, lin = 0;
  for (int i = 0; i < 1000; ++i) {
    rt::History h = random_history(g);
    bool fast = rt::check_linearisable(h).linearisable;
    bool slow = rt::brute_force_linearisable(h);
    agree += fast == slow;
    lin += fast;
  }
  std::printf("  1000 histories, %d agreements, %d linearisable\n", agree, lin);
  return agree == 1000 && lin > 100 && lin < 900;
}

// --- 8: concurrent soak ------------------------------------------------------

bool criterion_8() {
  rt::RunConfig cfg;
  cfg.threads = 4;
  cfg.ops_per_thread = 100000;
  cfg.keys = 8;
  cfg.seed = 2026;
  rt::RunResult r = rt::record_run(cfg, 50);
  bool lin = rt::check_windows(r.history).linearisable;
  std::printf("  %zu events, sorted audits: %d, unmarked unlinks: %llu, "
              "windows linearisable: %d\n",
              r.history.size(), r.sorted_ok,
              static_cast<unsigned long long>(r.unmarked_unlinks), lin);
  return r.sorted_ok && r.unmarked_unlinks == 0 && lin;
}

}  // namespace

int main(int argc, char** argv) {
  bool (*const crit[8])() = {criterion_1, criterion_2, criterion_3, criterion_4,
                             criterion_5, criterion_6, criterion_7, criterion_8};
  const char* names[8] = {
      "overlap scenario linearises both ways",
      "actual vs apparent field observation",
      "contains refinement, exhaustive",
      "add/remove refinement with effect instances",
      "rely catalogue and seeded faults",
      "law suite and engine mutants",
      "checker agrees with the oracle",
      "concurrent soak with audits",
  };
  int first = 1, last = 8;
  if (argc > 1) {
    first = last = std::atoi(argv[1]);
    if (first < 1 || first > 8) {
      std::fprintf(stderr, "usage: %s [1-8]\n", argv[0]);
      return 2;
    }
  }
  bool all = true;
  for (int i = first; i <= last; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = crit[i - 1]();
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    std::printf("criterion %d (%s): %s in %lld ms\n", i, names[i - 1],
                ok ? "PASS" : "FAIL", static_cast<long long>(ms));
    all = all && ok;
  }
  return all ? 0 : 1;
}
