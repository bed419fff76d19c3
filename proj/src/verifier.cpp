#include "lsv/verifier.hpp"

#include <algorithm>
#include <random>

namespace lsv {

namespace {

Expr e_addr(std::uint32_t a) { return e_const(Value::addr(a)); }

const char* status_name(Status s) {
  switch (s) {
    case Status::Holds: return "Holds";
    case Status::BoundedHolds: return "BoundedHolds";
    case Status::Counterexample: return "Counterexample";
  }
  return "?";
}

/// Smallest interval covering every step of p.
Interval proc_window(const Execution& ex, Proc p) {
  Time lo = 0, hi = 0;
  for (std::size_t t = 0; t < ex.steps.size(); ++t)
    for (const StepInfo& si : ex.steps[t])
      if (si.proc == p) {
        Time at = static_cast<Time>(t + 1);
        if (lo == 0) lo = at;
        hi = at;
      }
  return lo == 0 ? Interval::empty() : Interval::bounded(lo, hi);
}

Interval hull(const Interval& a, const Interval& b) {
  if (a.is_empty()) return b;
  if (b.is_empty()) return a;
  return Interval::bounded(std::min(a.glb(), b.glb()), std::max(a.lub(), b.lub()));
}

void fail_with(Verdict& v, const Stream& s, const Interval& d, IntvPred obligation,
               std::string detail) {
  if (v.status == Status::Counterexample) return;  // keep the first witness
  v.status = Status::Counterexample;
  v.witness = Witness{s, d, std::move(obligation), std::move(detail)};
}

void classify_cut(Verdict& v, const Execution& ex) {
  if (ex.truncation == Truncation::OmegaBound || ex.forced_exit)
    ++v.omega_cut;
  else if (ex.truncation == Truncation::Horizon)
    ++v.horizon_cut;
}

void finish(Verdict& v) {
  if (v.status != Status::Counterexample)
    v.status = v.omega_cut > 0 ? Status::BoundedHolds : Status::Holds;
}

}  // namespace

Json Verdict::to_json() const {
  Json j{{"id", id},
         {"status", status_name(status)},
         {"cases", cases},
         {"omega_cut", omega_cut},
         {"horizon_cut", horizon_cut},
         {"witnesses", witnesses}};
  if (witness)
    j["witness"] = Json{{"interval", witness->interval.to_string()},
                        {"detail", witness->detail},
                        {"obligation", witness->obligation ? to_string(witness->obligation) : ""},
                        {"stream", stream_to_jsonl(witness->stream)}};
  return j;
}

// ---------------------------------------------------------------------------
// contains against its coarse-grained form

Verdict check_contains_refinement(const VerifyConfig& cfg, SetModel::Mutant mutant) {
  Verdict v;
  v.id = "contains-refinement";
  SetModel m(cfg.set);
  const auto& ps = m.config().procs;
  Proc p = ps[0];
  ExecutionConfig ec{cfg.horizon, cfg.omega_unroll, cfg.granularity, {}};
  bool stopped = false;

  for (std::int64_t x : m.config().domain) {
    std::vector<std::optional<Command>> envs{std::nullopt};
    if (ps.size() > 1) {
      envs.push_back(m.mk_add(ps[1], x));
      envs.push_back(m.mk_remove(ps[1], x));
    }
    IntvPred some_in = sp_some(m.in_abs_set(x));
    IntvPred all_in = sp_all(m.in_abs_set(x));
    IntvPred cg = beh(m.mk_cgcon(p, x), p, m.context_L(p));
    for (const auto& env : envs)
      for (bool seeded : {false, true}) {
        if (stopped) break;
        auto heap = m.init_heap(seeded ? std::vector<std::int64_t>{x}
                                       : std::vector<std::int64_t>{});
        ec.free_nodes = heap.free_nodes;
        std::vector<ProcProgram> progs{{p, m.mk_contains(p, x, mutant)}};
        if (env) progs.push_back({ps[1], *env});
        enumerate_executions(progs, heap.state, ec, [&](const Execution& ex) {
          if (!ex.completed.at(p)) {
            classify_cut(v, ex);
            return true;
          }
          ++v.cases;
          Interval dp = proc_window(ex, p);
          bool r = ex.stream.at(dp.lub()).get(m.res(p)).as_bool();
          EvalCtx ctx(ex.stream);
          if (r && !eval(some_in, dp, ctx))
            fail_with(v, ex.stream, dp, some_in,
                      "contains returned true but the key was never in the set");
          else if (!r && eval(all_in, dp, ctx))
            fail_with(v, ex.stream, dp, p_not(all_in),
                      "contains returned false while the key stayed in the set");
          // the coarse-grained behaviour carves the window into a guard phase
          // and an assignment phase; under interference a membership flip in
          // the assignment's evaluation phase falls outside the guard's reach,
          // so the behaviour comparison is meaningful on solo runs only
          else if (!env && !eval(cg, dp, ctx))
            fail_with(v, ex.stream, dp, cg, "coarse-grained contains behaviour refuted");
          if (v.status == Status::Counterexample && cfg.stop_at_first) {
            stopped = true;
            return false;
          }
          return true;
        });
      }
  }
  finish(v);
  return v;
}

// ---------------------------------------------------------------------------
// add / remove against their one-effect specifications

namespace {

struct OpScenario {
  std::vector<std::int64_t> seed;
  std::vector<ProcProgram> progs;
  Time horizon;
  std::int64_t x;  // the checked operation's key
};

/// Shared driver: `add` selects the insertion-effect shape, otherwise the
/// deletion one. The checked operation always runs as ps[0].
Verdict check_op_refinement(const VerifyConfig& cfg, SetModel::Mutant mutant, bool add) {
  Verdict v;
  v.id = add ? "add-refinement" : "remove-refinement";
  SetModel m(cfg.set);
  const auto& ps = m.config().procs;
  Proc p = ps[0];

  std::vector<OpScenario> scenarios;
  auto mk_op = [&](Proc q, std::int64_t x, SetModel::Mutant mu) {
    return add ? m.mk_add(q, x, mu) : m.mk_remove(q, x, mu);
  };
  if (mutant == SetModel::Mutant::NoValidate && m.config().domain.size() > 1 && ps.size() > 1) {
    // the race the missing validation loses: the partner unlinks the node the
    // checked operation located its position from, before it takes its locks
    std::int64_t held = m.config().domain[0], probed = m.config().domain[1];
    std::vector<std::int64_t> seed =
        add ? std::vector<std::int64_t>{held} : std::vector<std::int64_t>{held, probed};
    scenarios.push_back({seed,
                         {{p, mk_op(p, probed, mutant)}, {ps[1], m.mk_remove(ps[1], held)}},
                         std::max<Time>(cfg.horizon, 22),
                         probed});
  }
  for (std::int64_t x : m.config().domain)
    for (bool seeded : {false, true}) {
      std::vector<std::int64_t> seed =
          seeded ? std::vector<std::int64_t>{x} : std::vector<std::int64_t>{};
      scenarios.push_back({seed, {{p, mk_op(p, x, mutant)}}, cfg.horizon, x});
      if (ps.size() > 1) {
        scenarios.push_back(
            {seed, {{p, mk_op(p, x, mutant)}, {ps[1], m.mk_contains(ps[1], x)}}, cfg.horizon, x});
        Command other = add ? m.mk_remove(ps[1], x) : m.mk_add(ps[1], x);
        scenarios.push_back({seed, {{p, mk_op(p, x, mutant)}, {ps[1], other}}, cfg.horizon, x});
      }
    }

  const char* fail_label = add ? "al_7" : "rl_7";
  bool stopped = false;
  for (const OpScenario& sc : scenarios) {
    if (stopped) break;
    std::int64_t x = sc.x;
    IntvPred effect = add ? m.insert_pred(p, x) : m.delete_pred(p, x);
    IntvPred not_mod = p_not(m.mod_set(p));
    IntvPred saw = add ? sp_some(m.in_abs_set(x)) : sp_some(e_not(m.in_abs_set(x)));
    auto effect_window = [&](const Execution& ex) {
      return add ? ex.label_window(p, "al_5")
                 : hull(ex.label_window(p, "rl_3"), ex.label_window(p, "rl_5"));
    };

    auto heap = m.init_heap(sc.seed);
    ExecutionConfig ec{sc.horizon, cfg.omega_unroll, cfg.granularity, heap.free_nodes};
    enumerate_executions(sc.progs, heap.state, ec, [&](const Execution& ex) {
      if (!ex.completed.at(p)) {
        // the effect window, once fully taken, fixes its obligation even in a
        // truncated run (single-step effect writes only)
        if (cfg.granularity == Granularity::PerAtom) {
          Interval w = effect_window(ex);
          if (!w.is_empty()) {
            EvalCtx ctx(ex.stream);
            if (!eval(effect, w, ctx))
              fail_with(v, ex.stream, w, effect,
                        add ? "insertion effect refuted over the linking window"
                            : "deletion effect refuted over the unlink window");
          }
        }
        classify_cut(v, ex);
      } else {
        ++v.cases;
        Interval dp = proc_window(ex, p);
        EvalCtx ctx(ex.stream);
        if (!ex.label_window(p, fail_label).is_empty()) {
          if (!eval(saw, dp, ctx))
            fail_with(v, ex.stream, dp, saw,
                      add ? "failing add never saw the key present"
                          : "failing remove never saw the key absent");
          else if (!eval(not_mod, dp, ctx))
            fail_with(v, ex.stream, dp, not_mod, "failing operation modified the set");
        } else {
          Interval w = effect_window(ex);
          if (w.is_empty()) {
            fail_with(v, ex.stream, dp, effect, "successful operation without an effect step");
          } else if (!eval(effect, w, ctx)) {
            fail_with(v, ex.stream, w, effect,
                      add ? "insertion effect refuted over the linking window"
                          : "deletion effect refuted over the unlink window");
          } else {
            for (const auto& [a, n, b] : m.node_triples())
              if (eval(add ? m.insert_body(p, x, a, n, b) : m.delete_body(p, x, a, n, b), w,
                       ctx)) {
                ++v.witnesses;
                break;
              }
            Interval pre = w.glb() > dp.glb() ? Interval::bounded(dp.glb(), w.glb() - 1)
                                              : Interval::empty();
            Interval post = w.lub() < dp.lub() ? Interval::bounded(w.lub() + 1, dp.lub())
                                               : Interval::empty();
            if (!eval(not_mod, pre, ctx))
              fail_with(v, ex.stream, pre, not_mod, "operation modified the set before its effect");
            else if (!eval(not_mod, post, ctx))
              fail_with(v, ex.stream, post, not_mod, "operation modified the set after its effect");
          }
        }
      }
      if (v.status == Status::Counterexample && cfg.stop_at_first) {
        stopped = true;
        return false;
      }
      return true;
    });
  }
  finish(v);
  return v;
}

}  // namespace

Verdict check_add_refinement(const VerifyConfig& cfg, SetModel::Mutant mutant) {
  return check_op_refinement(cfg, mutant, true);
}

Verdict check_remove_refinement(const VerifyConfig& cfg, SetModel::Mutant mutant) {
  return check_op_refinement(cfg, mutant, false);
}

// ---------------------------------------------------------------------------
// the rely catalogue

const char* rely_name(RelyId id) {
  switch (id) {
    case RelyId::R5: return "R5";
    case RelyId::R10: return "R10";
    case RelyId::R11: return "R11";
    case RelyId::R13: return "R13";
    case RelyId::R24: return "R24";
    case RelyId::R20: return "R20";
    case RelyId::R21: return "R21";
    case RelyId::R27: return "R27";
  }
  return "?";
}

std::vector<RelyId> rely_catalog() {
  return {RelyId::R5,  RelyId::R10, RelyId::R11, RelyId::R13,
          RelyId::R24, RelyId::R20, RelyId::R21, RelyId::R27};
}

namespace {

Expr cursor_safe(const SetModel& m, Proc p) {
  return e_or(e_reach(e_loc(m.head()), e_loc(m.n1(p))),
              e_field_val(e_loc(m.n1(p)), Field::Mrk));
}

std::vector<Value> key_values(const SetModel& m) {
  std::vector<Value> ks;
  for (std::int64_t k : m.config().domain) ks.push_back(Value::integer(k));
  ks.push_back(Value::neg_inf());
  ks.push_back(Value::pos_inf());
  return ks;
}

Expr node_holds_key(const SetModel& m, std::uint32_t base, std::int64_t x) {
  return e_and(e_reach(e_loc(m.head()), e_addr(base)),
               e_and(e_not(e_field_val(e_addr(base), Field::Mrk)),
                     e_eq(e_field_val(e_addr(base), Field::Val), e_int(x))));
}

std::vector<int> phase_ids(const char* const* names, std::size_t n) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(label_id(names[i]));
  return ids;
}

const char* kAddLink[] = {"al_4", "al_5"};
const char* kAddPhase[] = {"alt_2", "alf_2", "al_3", "al_4", "al_5", "al_6", "al_7"};
const char* kRemPhase[] = {"rlt_2", "rlf_2", "rl_3", "rl_4", "rl_5", "rl_6", "rl_7"};

/// Statewise interference freedom of the given node-variable cells while the
/// process sits in one of the given labels.
StateFn phase_quiet(const SetModel& m, Proc p, std::vector<Location> node_vars,
                    std::vector<int> ids, bool link_fields_only) {
  return [m, p, node_vars, ids, link_fields_only](const State& sigma) {
    Value pcv = sigma.get(pc_var(p));
    if (!pcv.is_int() ||
        std::find(ids.begin(), ids.end(), static_cast<int>(pcv.as_int())) == ids.end())
      return true;
    std::vector<LocIdx> cells;
    for (const Location& nv : node_vars) {
      Value a = sigma.get(nv);
      if (!a.is_addr()) continue;
      std::uint32_t base = a.as_addr();
      cells.push_back(base + field_offset(Field::Val));
      cells.push_back(base + field_offset(Field::Mrk));
      cells.push_back(base + field_offset(Field::Nxt));
      if (!link_fields_only) cells.push_back(base + field_offset(Field::Lck));
    }
    return !sigma.interfered(cells, p);
  };
}

}  // namespace

IntvPred rely_pred(const SetModel& m, RelyId id, Proc p, std::int64_t x) {
  switch (id) {
    case RelyId::R5:
      return sp_inv(cursor_safe(m, p));
    case RelyId::R10: {
      std::vector<IntvPred> invs{sp_inv(e_field_val(e_loc(m.n1(p)), Field::Mrk))};
      for (const Value& k : key_values(m))
        invs.push_back(sp_inv(e_eq(e_field_val(e_loc(m.n1(p)), Field::Val), e_const(k))));
      return p_box(p_implies(sp_all(pc_is(p, "cl_3")), p_all(std::move(invs))));
    }
    case RelyId::R11: {
      std::vector<IntvPred> wits;
      for (std::uint32_t slot = 0; slot < m.config().pool; ++slot)
        wits.push_back(sp_all(node_holds_key(m, m.slot_base(slot), x)));
      return p_box(p_implies(sp_all(m.in_abs_set(x)), p_any(std::move(wits))));
    }
    case RelyId::R13:
      return sf_all("sorted-chain", [m](const State& sigma) { return m.sorted_chain(sigma); });
    case RelyId::R24:
      return sp_all(e_or(e_eq(e_loc(m.n1(p)), e_null()),
                         e_reach(e_loc(m.n1(p)), e_loc(m.tail()))));
    case RelyId::R20:
      return sf_all("link-phase-quiet",
                    phase_quiet(m, p, {m.n2(p)}, phase_ids(kAddLink, 2), true));
    case RelyId::R21:
      return sf_all("add-phase-quiet",
                    phase_quiet(m, p, {m.n1(p), m.n3(p)}, phase_ids(kAddPhase, 7), false));
    case RelyId::R27:
      return sf_all("remove-phase-quiet",
                    phase_quiet(m, p, {m.n1(p), m.n2(p)}, phase_ids(kRemPhase, 7), false));
  }
  return p_true();
}

namespace {

/// Fast per-stream violation scans, equivalent to rely_pred evaluated over
/// every interval of the window (tests pin the agreement).
struct RelyScan {
  const SetModel& m;
  const Stream& s;
  std::int64_t x;

  /// once-held-then-broken scan: some s < t with c(s) and not c(t); the
  /// violating interval for the invariant form is [s+1, t].
  static std::optional<Interval> inv_break(const std::vector<char>& c, Time from, Time to,
                                           Time seen_from) {
    Time last = -1;
    if (seen_from >= 0 && seen_from < from && c[static_cast<std::size_t>(seen_from)])
      last = seen_from;
    for (Time t = from; t <= to; ++t) {
      if (!c[static_cast<std::size_t>(t)] && last >= 0)
        return Interval::bounded(last + 1, t);
      if (c[static_cast<std::size_t>(t)]) last = t;
    }
    return std::nullopt;
  }

  std::vector<char> series(const Expr& c) const {
    std::vector<char> out;
    for (Time t = 0; t <= s.horizon(); ++t) out.push_back(holds_in(c, s.at(t)));
    return out;
  }

  std::optional<Interval> run(RelyId id, Proc p) const {
    Time h = s.horizon();
    switch (id) {
      case RelyId::R5:
        return inv_break(series(cursor_safe(m, p)), 0, h, -1);
      case RelyId::R10: {
        std::vector<Expr> cs{e_field_val(e_loc(m.n1(p)), Field::Mrk)};
        for (const Value& k : key_values(m))
          cs.push_back(e_eq(e_field_val(e_loc(m.n1(p)), Field::Val), e_const(k)));
        int cl3 = label_id("cl_3");
        LocIdx pc = s.at(0).universe().index_of(pc_var(p));
        std::vector<char> in(h + 1, 0);
        for (Time t = 0; t <= h; ++t) {
          Value v = s.at(t).get(pc);
          in[static_cast<std::size_t>(t)] = v.is_int() && v.as_int() == cl3;
        }
        for (const Expr& c : cs) {
          std::vector<char> cv = series(c);
          Time a = 0;
          while (a <= h) {
            if (!in[static_cast<std::size_t>(a)]) {
              ++a;
              continue;
            }
            Time b = a;
            while (b + 1 <= h && in[static_cast<std::size_t>(b + 1)]) ++b;
            if (auto d = inv_break(cv, a, b, a - 1)) return d;
            a = b + 1;
          }
        }
        return std::nullopt;
      }
      case RelyId::R11: {
        std::vector<char> member = series(m.in_abs_set(x));
        std::vector<std::vector<char>> wit;
        for (std::uint32_t slot = 0; slot < m.config().pool; ++slot)
          wit.push_back(series(node_holds_key(m, m.slot_base(slot), x)));
        Time a = 0;
        while (a <= h) {
          if (!member[static_cast<std::size_t>(a)]) {
            ++a;
            continue;
          }
          Time b = a;
          while (b + 1 <= h && member[static_cast<std::size_t>(b + 1)]) ++b;
          for (Time i = a; i <= b; ++i) {
            Time best = i - 1;
            for (const auto& wv : wit) {
              Time j = i;
              while (j <= b && wv[static_cast<std::size_t>(j)]) ++j;
              best = std::max(best, j - 1);
            }
            if (best < b) return Interval::bounded(i, best + 1);
          }
          a = b + 1;
        }
        return std::nullopt;
      }
      case RelyId::R13:
        for (Time t = 0; t <= h; ++t)
          if (!m.sorted_chain(s.at(t))) return Interval::bounded(t, t);
        return std::nullopt;
      case RelyId::R24: {
        LocIdx n1 = s.at(0).universe().index_of(m.n1(p));
        LocIdx tl = s.at(0).universe().index_of(m.tail());
        for (Time t = 0; t <= h; ++t) {
          Value v = s.at(t).get(n1);
          if (v.is_addr() && !heap_reachable(v, s.at(t).get(tl), s.at(t)))
            return Interval::bounded(t, t);
        }
        return std::nullopt;
      }
      case RelyId::R20:
      case RelyId::R21:
      case RelyId::R27: {
        StateFn f = id == RelyId::R20
                        ? phase_quiet(m, p, {m.n2(p)}, phase_ids(kAddLink, 2), true)
                        : id == RelyId::R21
                              ? phase_quiet(m, p, {m.n1(p), m.n3(p)}, phase_ids(kAddPhase, 7),
                                            false)
                              : phase_quiet(m, p, {m.n1(p), m.n2(p)}, phase_ids(kRemPhase, 7),
                                            false);
        for (Time t = 0; t <= h; ++t)
          if (!f(s.at(t))) return Interval::bounded(t, t);
        return std::nullopt;
      }
    }
    return std::nullopt;
  }
};

std::vector<Verdict> rely_core(const VerifyConfig& cfg, const std::vector<RelyId>& ids,
                               SetModel::Mutant env) {
  SetModel m(cfg.set);
  const auto& ps = m.config().procs;
  Proc reader = ps[0];
  std::vector<Verdict> out;
  for (RelyId id : ids) {
    Verdict v;
    v.id = std::string("rely-") + rely_name(id);
    out.push_back(std::move(v));
  }

  ExecutionConfig ec{cfg.horizon, cfg.omega_unroll, cfg.granularity, {}};
  for (std::int64_t x : m.config().domain) {
    std::vector<Command> envs;
    if (ps.size() > 1) {
      envs.push_back(m.mk_add(ps[1], x, env));
      envs.push_back(m.mk_remove(ps[1], x, env));
    }
    for (const Command& e : envs)
      for (bool seeded : {false, true}) {
        auto heap = m.init_heap(seeded ? std::vector<std::int64_t>{x}
                                       : std::vector<std::int64_t>{});
        ec.free_nodes = heap.free_nodes;
        std::vector<ProcProgram> progs{{reader, m.mk_contains(reader, x)}, {ps[1], e}};
        bool all_failed = false;
        enumerate_executions(progs, heap.state, ec, [&](const Execution& ex) {
          RelyScan scan{m, ex.stream, x};
          all_failed = true;
          for (std::size_t i = 0; i < ids.size(); ++i) {
            Verdict& v = out[i];
            if (v.status == Status::Counterexample && cfg.stop_at_first) continue;
            all_failed = false;
            ++v.cases;
            // cursor conditions live on the reading process, phase conditions
            // on whichever process runs the operation; scanning both is exact
            // thanks to the label guards
            std::vector<Proc> insts;
            switch (ids[i]) {
              case RelyId::R5:
              case RelyId::R10: insts = {reader}; break;
              case RelyId::R11:
              case RelyId::R13: insts = {reader}; break;
              default: insts = {reader, ps[1]}; break;
            }
            for (Proc ip : insts)
              if (auto d = scan.run(ids[i], ip)) {
                fail_with(v, ex.stream, *d, rely_pred(m, ids[i], ip, x),
                          std::string(rely_name(ids[i])) + " violated");
                break;
              }
          }
          return !(all_failed && cfg.stop_at_first);
        });
        if (all_failed && cfg.stop_at_first) break;
      }
  }
  for (Verdict& v : out) finish(v);
  return out;
}

}  // namespace

Verdict check_rely(const VerifyConfig& cfg, RelyId id, SetModel::Mutant env) {
  return rely_core(cfg, {id}, env)[0];
}

std::vector<Verdict> check_rely_all(const VerifyConfig& cfg, SetModel::Mutant env) {
  return rely_core(cfg, rely_catalog(), env);
}

// ---------------------------------------------------------------------------
// the law suite

namespace {

struct LawWorld {
  std::shared_ptr<LocationUniverse> uni;
  Location v = Location::variable("v");
  Location w = Location::variable("w");
  Location u0 = Location::variable("u", 0);
  Location u1 = Location::variable("u", 1);

  LawWorld() : uni(std::make_shared<LocationUniverse>(8)) {
    uni->add_var("v");
    uni->add_var("w");
    uni->add_var("u", 0);
    uni->add_var("u", 1);
  }

  Value pointer(std::mt19937_64& g) const {
    switch (g() % 3) {
      case 0: return Value::addr(0);
      case 1: return Value::addr(4);
      default: return Value::null();
    }
  }

  State rand_state(std::mt19937_64& g, bool structured) const {
    State s(uni);
    for (std::uint32_t base : {0u, 4u}) {
      s.set(base + field_offset(Field::Val), Value::integer(static_cast<std::int64_t>(g() % 3)));
      s.set(base + field_offset(Field::Nxt), pointer(g));
      s.set(base + field_offset(Field::Mrk), Value::boolean(g() % 2 == 0));
      s.set(base + field_offset(Field::Lck), Value::null());
    }
    s.set(v, structured ? Value::addr(0) : pointer(g));
    s.set(w, Value::integer(static_cast<std::int64_t>(g() % 3)));
    s.set(u0, Value::integer(static_cast<std::int64_t>(g() % 3)));
    s.set(u1, Value::integer(static_cast<std::int64_t>(g() % 3)));
    LocIdx iv = uni->index_of(v);
    if (structured || g() % 2 == 0) {
      s.set_perm(iv, 0, Fraction(1, 2));
      s.set_perm(0, 0, Fraction(1, 2));                        // slot 0 val cell
      s.set_perm(4 + field_offset(Field::Val), 0, Fraction(1, 2));  // slot 1 val cell
    }
    if (g() % 2 == 0)
      s.set_perm(4 + field_offset(Field::Mrk), static_cast<Proc>(g() % 2), Fraction(1));
    return s;
  }

  Stream rand_stream(std::mt19937_64& g) const {
    bool structured = g() % 2 == 0;
    std::size_t len = 4 + g() % 2;
    std::vector<State> states;
    Value held = Value::addr(0);
    for (std::size_t i = 0; i < len; ++i) {
      State s = rand_state(g, structured);
      if (structured) s.set(v, held);  // keep the pointer stable
      states.push_back(std::move(s));
    }
    return Stream(std::move(states));
  }

  Expr rand_expr(std::mt19937_64& g) const {
    switch (g() % 6) {
      case 0: return e_eq(e_loc(v), e_const(Value::addr(0)));
      case 1: return e_eq(e_field_val(e_loc(v), Field::Val),
                          e_int(static_cast<std::int64_t>(g() % 3)));
      case 2: return e_lt(e_loc(u0), e_int(2));
      case 3: return e_field_val(e_loc(v), Field::Mrk);
      case 4: return e_eq(e_loc(w), e_int(static_cast<std::int64_t>(g() % 3)));
      default: return e_ne(e_loc(v), e_null());
    }
  }

  IntvPred rand_pred(std::mt19937_64& g, int depth) const {
    if (depth == 0 || g() % 3 == 0) {
      switch (g() % 6) {
        case 0: return sp_all(rand_expr(g));
        case 1: return sp_some(rand_expr(g));
        case 2: return sp_end(rand_expr(g));
        case 3: return p_empty();
        case 4: return no_write(v, static_cast<Proc>(g() % 2));
        default: return p_fin();
      }
    }
    switch (g() % 7) {
      case 0: return p_not(rand_pred(g, depth - 1));
      case 1: return p_and(rand_pred(g, depth - 1), rand_pred(g, depth - 1));
      case 2: return p_or(rand_pred(g, depth - 1), rand_pred(g, depth - 1));
      case 3: return p_implies(rand_pred(g, depth - 1), rand_pred(g, depth - 1));
      case 4: return p_chop(rand_pred(g, depth - 1), rand_pred(g, depth - 1));
      case 5: return p_box(rand_pred(g, depth - 1));
      default: return p_diamond(rand_pred(g, depth - 1));
    }
  }
};

IntvPred equiv(IntvPred a, IntvPred b) {
  return p_and(p_implies(a, b), p_implies(b, a));
}

Verdict law_chop_unit(LawWorld& wd, std::mt19937_64& g, EvalOptions opts) {
  Verdict v;
  v.id = "chop-unit";
  for (int rep = 0; rep < 25 && v.status != Status::Counterexample; ++rep) {
    Stream s = wd.rand_stream(g);
    EvalCtx ctx(s, opts);
    for (int pi = 0; pi < 3; ++pi) {
      IntvPred q = pi == 0 && rep == 0 ? p_true() : wd.rand_pred(g, 2);
      IntvPred lq = p_chop(q, p_empty()), rq = p_chop(p_empty(), q);
      for (const Interval& d : window_intervals(s)) {
        ++v.cases;
        if (eval(lq, d, ctx) != eval(q, d, ctx)) {
          fail_with(v, s, d, equiv(lq, q), "empty is not a right unit of chop");
          break;
        }
        if (eval(rq, d, ctx) != eval(q, d, ctx)) {
          fail_with(v, s, d, equiv(rq, q), "empty is not a left unit of chop");
          break;
        }
      }
      if (v.status == Status::Counterexample) break;
    }
  }
  finish(v);
  return v;
}

Verdict law_chop_assoc(LawWorld& wd, std::mt19937_64& g, EvalOptions opts) {
  Verdict v;
  v.id = "chop-assoc";
  for (int rep = 0; rep < 25 && v.status != Status::Counterexample; ++rep) {
    Stream s = wd.rand_stream(g);
    EvalCtx ctx(s, opts);
    IntvPred a = wd.rand_pred(g, 2), b = wd.rand_pred(g, 2), c = wd.rand_pred(g, 2);
    IntvPred l = p_chop(p_chop(a, b), c), r = p_chop(a, p_chop(b, c));
    for (const Interval& d : window_intervals(s)) {
      ++v.cases;
      if (eval(l, d, ctx) != eval(r, d, ctx)) {
        fail_with(v, s, d, equiv(l, r), "chop is not associative");
        break;
      }
    }
  }
  finish(v);
  return v;
}

Verdict law_omega_empty(LawWorld& wd, std::mt19937_64& g, EvalOptions opts) {
  Verdict v;
  v.id = "omega-empty";
  Stream s = wd.rand_stream(g);
  EvalCtx ctx(s, opts);
  for (int rep = 0; rep < 25; ++rep) {
    IntvPred q = rep == 0 ? p_false() : wd.rand_pred(g, 2);
    ++v.cases;
    if (!eval(p_omega(q), Interval::empty(), ctx)) {
      fail_with(v, s, Interval::empty(), p_omega(q), "iteration rejects the empty interval");
      break;
    }
  }
  finish(v);
  return v;
}

Verdict law_stable_observation(LawWorld& wd, std::mt19937_64& g, EvalOptions opts) {
  Verdict v;
  v.id = "lemma-1";
  for (int rep = 0; rep < 40 && v.status != Status::Counterexample; ++rep) {
    Stream s = wd.rand_stream(g);
    EvalCtx ctx(s, opts);
    for (std::int64_t k = 0; k < 3; ++k) {
      Expr c = e_eq(e_field_val(e_loc(wd.v), Field::Val), e_int(k));
      IntvPred lhs = p_all({sp_stable(wd.v), pos_apparent(0, c)});
      IntvPred rhs = sp_some(c);
      for (const Interval& d : window_intervals(s)) {
        ++v.cases;
        if (!eval(lhs, d, ctx)) continue;
        ++v.witnesses;  // non-vacuous instance
        if (!eval(rhs, d, ctx)) {
          fail_with(v, s, d, p_implies(lhs, rhs),
                    "a possibly-observed value of a stable pointer never actually held");
          break;
        }
      }
      if (v.status == Status::Counterexample) break;
    }
  }
  finish(v);
  return v;
}

void absorb(Verdict& v, const RefineVerdict& rv, const Command& abst,
            const std::vector<Proc>& procs, std::vector<Location> y, const char* what) {
  v.cases += rv.cases;
  if (rv.status == Status::Holds) return;
  if (rv.status == Status::BoundedHolds) {
    ++v.omega_cut;
    return;
  }
  if (rv.witness)
    fail_with(v, rv.witness->stream, rv.witness->window, beh(abst, procs, std::move(y)), what);
  else
    v.status = Status::Counterexample;
}

Verdict law_bool_assign(EvalOptions opts) {
  Verdict v;
  v.id = "lemma-2";
  auto uni = std::make_shared<LocationUniverse>(0);
  uni->add_var("s");
  uni->add_var("b", 0);
  Location s = Location::variable("s"), b = Location::variable("b", 0);
  Expr c = e_eq(e_loc(s), e_int(5));
  Command abst = c_assign(e_loc(b), c);
  Command conc = c_choice(c_seq({c_guard(c), c_assign(e_loc(b), e_bool(true))}),
                          c_seq({c_guard(e_not(c)), c_assign(e_loc(b), e_bool(false))}));
  ExecutionConfig ec{6, 4, Granularity::PerLocation, {}};
  for (std::int64_t sv : {5, 3}) {
    State init(uni);
    init.set(s, Value::integer(sv));
    init.set(b, Value::boolean(false));
    RefineVerdict rv = refines(abst, {0}, {s, b}, {{0, conc}}, init, ec, opts);
    absorb(v, rv, abst, {0}, {s, b}, "guarded boolean assignment law refuted");
    if (v.status == Status::Counterexample) break;
  }
  finish(v);
  return v;
}

Verdict law_context(EvalOptions opts) {
  Verdict v;
  v.id = "lemma-3";
  auto uni = std::make_shared<LocationUniverse>(0);
  uni->add_var("w");
  uni->add_var("y");
  uni->add_var("u", 0);
  Location w = Location::variable("w"), y = Location::variable("y");
  Location u = Location::variable("u", 0);
  Command body = c_assign(e_loc(u), e_int(1));
  State init(uni);
  init.set(w, Value::integer(7));
  init.set(y, Value::integer(8));
  init.set(u, Value::integer(0));
  ExecutionConfig ec{6, 4, Granularity::PerLocation, {}};

  // instance 1: W = {w}, X = {w}, Y = {y}, Z = {}
  absorb(v, refines(body, {0}, {w, y}, {{0, body}}, init, ec, opts), body, {0}, {w, y},
         "context law premise refuted");
  absorb(v, refines(c_context({w}, body), {0}, {y}, {{0, c_context({w}, body)}}, init, ec, opts),
         c_context({w}, body), {0}, {y}, "context law conclusion refuted");
  // instance 2: W = {w}, X = {}, Y = {y}, Z = {w}
  absorb(v, refines(body, {0}, {w, y}, {{0, body}}, init, ec, opts), body, {0}, {w, y},
         "context law premise refuted");
  absorb(v, refines(c_context({w}, body), {0}, {y}, {{0, body}}, init, ec, opts),
         c_context({w}, body), {0}, {y}, "context law conclusion refuted");
  finish(v);
  return v;
}

Verdict law_rely_galois(LawWorld& wd, std::mt19937_64& g, EvalOptions opts) {
  Verdict v;
  v.id = "theorem-1";
  Command cmd = c_assign(e_loc(wd.u0), e_int(1));
  IntvPred cmd_beh = beh(cmd, 0, {wd.v});
  for (int rep = 0; rep < 60 && v.status != Status::Counterexample; ++rep) {
    Stream s = wd.rand_stream(g);
    EvalCtx ctx(s, opts);
    IntvPred r = wd.rand_pred(g, 2), a = wd.rand_pred(g, 2), c = wd.rand_pred(g, 2);
    IntvPred lhs = p_implies(c, p_implies(r, a));      // Rely r A refined by C
    IntvPred rhs = p_implies(p_and(r, c), a);          // A refined by Enf r C
    IntvPred rely_b = beh(c_rely(r, cmd), 0, {wd.v});
    IntvPred enf_b = beh(c_enf(r, cmd), 0, {wd.v});
    for (const Interval& d : window_intervals(s)) {
      ++v.cases;
      if (eval(lhs, d, ctx) != eval(rhs, d, ctx)) {
        fail_with(v, s, d, equiv(lhs, rhs), "rely/enforce adjunction refuted");
        break;
      }
      if (eval(rely_b, d, ctx) != eval(p_implies(r, cmd_beh), d, ctx) ||
          eval(enf_b, d, ctx) != eval(p_and(r, cmd_beh), d, ctx)) {
        fail_with(v, s, d, equiv(rely_b, p_implies(r, cmd_beh)),
                  "rely/enforce behaviour unfolding refuted");
        break;
      }
    }
  }
  finish(v);
  return v;
}

Verdict law_decompose(EvalOptions opts) {
  Verdict v;
  v.id = "theorem-2";
  for (int nprocs : {2, 3}) {
    auto uni = std::make_shared<LocationUniverse>(0);
    std::vector<Proc> procs;
    std::vector<Location> us;
    for (Proc p = 0; p < nprocs; ++p) {
      uni->add_var("u", p);
      procs.push_back(p);
      us.push_back(Location::variable("u", p));
    }
    State init(uni);
    for (const Location& u : us) init.set(u, Value::integer(0));
    auto conc = [&](Proc p) { return c_assign(e_loc(us[p]), e_int(p + 1)); };
    auto abst = [&](Proc p) {
      return c_spec(p_diamond(p_ne(sp_end(e_eq(e_loc(us[p]), e_int(p + 1))))));
    };
    auto rely_of = [&](Proc p) {
      std::vector<IntvPred> qs;
      for (Proc q : procs)
        if (q != p) qs.push_back(no_write(us[p], q));
      return p_all(std::move(qs));
    };
    ExecutionConfig ec{6, 4, Granularity::PerLocation, {}};

    for (Proc p : procs) {
      // per-process premise under the joint rely
      Command a = c_rely(rely_of(p), abst(p));
      absorb(v, refines(a, {p}, {}, {{p, conc(p)}}, init, ec, opts), a, {p}, {},
             "decomposition premise refuted");
      // the other processes' behaviour establishes the rely
      std::vector<ProcProgram> others;
      for (Proc q : procs)
        if (q != p) others.push_back({q, conc(q)});
      enumerate_executions(others, init, ec, [&](const Execution& ex) {
        if (ex.truncation != Truncation::Complete) return true;
        ++v.cases;
        EvalCtx ctx(ex.stream, opts);
        if (!eval(rely_of(p), ex.window, ctx))
          fail_with(v, ex.stream, ex.window, rely_of(p),
                    "environment behaviour fails to establish the rely");
        return v.status != Status::Counterexample;
      });
    }

    std::vector<std::pair<Proc, Command>> members;
    std::vector<ProcProgram> concs;
    for (Proc p : procs) {
      members.push_back({p, abst(p)});
      concs.push_back({p, conc(p)});
    }
    Command whole = c_rely(p_true(), c_par(members));
    absorb(v, refines(whole, procs, {}, concs, init, ec, opts), whole, procs, {},
           "decomposition conclusion refuted");
    if (v.status == Status::Counterexample) break;
  }
  finish(v);
  return v;
}

}  // namespace

bool LawReport::all_pass() const {
  for (const Verdict& v : laws)
    if (v.status != Status::Holds) return false;
  return true;
}

Json LawReport::to_json() const {
  Json j = Json::array();
  for (const Verdict& v : laws) j.push_back(v.to_json());
  return Json{{"laws", j}, {"all_pass", all_pass()}};
}

LawReport law_suite(std::uint64_t seed, EvalOptions opts) {
  LawReport rep;
  LawWorld wd;
  std::mt19937_64 g(seed);
  rep.laws.push_back(law_chop_unit(wd, g, opts));
  rep.laws.push_back(law_chop_assoc(wd, g, opts));
  rep.laws.push_back(law_omega_empty(wd, g, opts));
  rep.laws.push_back(law_stable_observation(wd, g, opts));
  rep.laws.push_back(law_bool_assign(opts));
  rep.laws.push_back(law_context(opts));
  rep.laws.push_back(law_rely_galois(wd, g, opts));
  rep.laws.push_back(law_decompose(opts));
  return rep;
}

}  // namespace lsv
