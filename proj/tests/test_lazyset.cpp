#include <doctest.h>

#include "lsv/lazyset.hpp"

using namespace lsv;

namespace {

constexpr Proc P0 = 0;
constexpr Proc P1 = 1;

std::uint32_t off(Field f) { return field_offset(f); }

std::vector<std::int64_t> keys_of(const std::vector<Value>& vals) {
  std::vector<std::int64_t> out;
  for (const Value& v : vals)
    if (v.is_int()) out.push_back(v.as_int());
  return out;
}

std::vector<Execution> run(const SetModel& m, const std::vector<ProcProgram>& progs,
                           const SetModel::Heap& h, Time horizon = 14,
                           Granularity g = Granularity::PerAtom) {
  ExecutionConfig cfg;
  cfg.horizon = horizon;
  cfg.granularity = g;
  cfg.free_nodes = h.free_nodes;
  std::vector<Execution> out;
  enumerate_executions(progs, h.state, cfg, [&](const Execution& ex) {
    out.push_back(ex);
    return true;
  });
  return out;
}

std::vector<Execution> complete_only(std::vector<Execution> exs) {
  std::erase_if(exs, [](const Execution& e) { return e.truncation != Truncation::Complete; });
  return exs;
}

}  // namespace

TEST_CASE("initial heap satisfies the sentinel layout") {
  SetModel m;
  auto h = m.init_heap();
  const State& st = h.state;
  std::uint32_t hb = m.head_base(), tb = m.tail_base();
  CHECK(st.get(m.head()) == Value::addr(hb));
  CHECK(st.get(m.tail()) == Value::addr(tb));
  CHECK(st.get(hb + off(Field::Val)) == Value::neg_inf());
  CHECK(st.get(hb + off(Field::Nxt)) == Value::addr(tb));
  CHECK(st.get(hb + off(Field::Mrk)) == Value::boolean(false));
  CHECK(st.get(hb + off(Field::Lck)) == Value::null());
  CHECK(st.get(tb + off(Field::Val)) == Value::pos_inf());
  CHECK(st.get(tb + off(Field::Nxt)) == Value::null());
  CHECK(st.perms().empty());

  // the remaining four slots are free
  CHECK(h.free_nodes == std::vector<std::uint32_t>{8, 12, 16, 20});

  // the abstract set of the empty list is just the sentinels
  CHECK(m.set_addr(st) == std::vector<std::uint32_t>{hb, tb});
  auto vals = m.abs_set(st);
  REQUIRE(vals.size() == 2);
  CHECK(vals[0] == Value::neg_inf());
  CHECK(vals[1] == Value::pos_inf());
  CHECK(m.sorted_chain(st));

  CHECK_THROWS_AS(SetModel({.pool = 1}), Error);
  CHECK_THROWS_AS(m.init_heap({1, 2, 3, 4, 5}), Error);
}

TEST_CASE("seeded heap and marking semantics") {
  SetModel m;
  auto h = m.init_heap({2, 1});  // sorted internally
  const State& st = h.state;
  std::uint32_t s2 = m.slot_base(2), s3 = m.slot_base(3);
  CHECK(st.get(s2 + off(Field::Val)) == Value::integer(1));
  CHECK(st.get(s3 + off(Field::Val)) == Value::integer(2));
  CHECK(st.get(m.head_base() + off(Field::Nxt)) == Value::addr(s2));
  CHECK(st.get(s2 + off(Field::Nxt)) == Value::addr(s3));
  CHECK(st.get(s3 + off(Field::Nxt)) == Value::addr(m.tail_base()));
  CHECK(keys_of(m.abs_set(st)) == std::vector<std::int64_t>{1, 2});
  CHECK(h.free_nodes == std::vector<std::uint32_t>{16, 20});

  CHECK(m.in_set(s2, Value::integer(1), st));
  CHECK(!m.in_set(s2, Value::integer(2), st));
  CHECK(holds_in(m.in_abs_set(1), st));

  // a marked node leaves the abstract set while still physically linked
  State marked = st;
  marked.set(s2 + off(Field::Mrk), Value::boolean(true));
  CHECK(keys_of(m.abs_set(marked)) == std::vector<std::int64_t>{2});
  CHECK(!m.in_set(s2, Value::integer(1), marked));
  CHECK(!holds_in(m.in_abs_set(1), marked));
  CHECK(heap_reachable(marked.get(m.head()), Value::addr(s2), marked));
  CHECK(m.sorted_chain(marked));

  // an unlinked node breaks neither reachability of Tail nor sortedness
  State unlinked = marked;
  unlinked.set(m.head_base() + off(Field::Nxt), Value::addr(s3));
  CHECK(!heap_reachable(unlinked.get(m.head()), Value::addr(s2), unlinked));
  CHECK(m.sorted_chain(unlinked));
}

TEST_CASE("write-field and interference predicates") {
  SetModel m;
  auto h = m.init_heap({1});
  std::uint32_t s2 = m.slot_base(2);

  State quiet = h.state;
  State lck_only = quiet;
  lck_only.set_perm(s2 + off(Field::Lck), P0, Fraction(1));
  State val_write = quiet;
  val_write.set_perm(s2 + off(Field::Val), P0, Fraction(1));

  CHECK(!m.write_fields(P0, s2)(quiet));
  CHECK(!m.write_fields(P0, s2)(lck_only));  // lck is not a set-changing field
  CHECK(m.write_fields(P0, s2)(val_write));

  Stream s({quiet, lck_only, val_write});
  EvalCtx ctx(s);
  Interval d = Interval::bounded(0, 2);
  CHECK(eval(m.mod_set(P0), d, ctx));
  CHECK(!eval(m.mod_set(P0), Interval::bounded(0, 1), ctx));
  CHECK(!eval(m.mod_set(P1), d, ctx));

  // int_free: q writing the node's mrk cell is interference for p
  State q_marks = quiet;
  q_marks.set_perm(s2 + off(Field::Mrk), P1, Fraction(1));
  Stream s2s({quiet, q_marks});
  EvalCtx ctx2(s2s);
  CHECK(eval(m.int_free(P0, s2), Interval::bounded(0, 0), ctx2));
  CHECK(!eval(m.int_free(P0, s2), Interval::bounded(0, 1), ctx2));
  CHECK(eval(m.int_free(P1, s2), Interval::bounded(0, 1), ctx2));
}

TEST_CASE("hand-built insertion stream satisfies the insertion predicate") {
  SetModel m;
  auto h = m.init_heap();
  std::uint32_t hb = m.head_base(), tb = m.tail_base(), n = m.slot_base(2);

  State s0 = h.state;
  State s1 = s0;
  s1.set(n + off(Field::Val), Value::integer(1));
  s1.set(n + off(Field::Nxt), Value::addr(tb));
  s1.set(n + off(Field::Mrk), Value::boolean(false));
  s1.set(n + off(Field::Lck), Value::null());
  s1.set(hb + off(Field::Nxt), Value::addr(n));
  s1.set_perm(hb + off(Field::Nxt), P0, Fraction(1));

  Stream s({s0, s1});
  EvalCtx ctx(s);
  Interval step = Interval::bounded(1, 1);
  CHECK(eval(m.insert_body(P0, 1, hb, n, tb), step, ctx));
  CHECK(eval(m.insert_pred(P0, 1), step, ctx));
  // wrong key and wrong triple are refuted
  CHECK(!eval(m.insert_pred(P0, 2), step, ctx));
  CHECK(!eval(m.insert_body(P0, 1, hb, tb, n), step, ctx));

  // an extra write permission elsewhere violates the frame
  State noisy = s1;
  noisy.set_perm(tb + off(Field::Val), P0, Fraction(1));
  Stream sn({s0, noisy});
  EvalCtx ctxn(sn);
  CHECK(!eval(m.insert_body(P0, 1, hb, n, tb), step, ctxn));

  // interference on the bracketing node is refuted
  State raced = s1;
  raced.set_perm(tb + off(Field::Mrk), P1, Fraction(1));
  Stream sr({s0, raced});
  EvalCtx ctxr(sr);
  CHECK(!eval(m.insert_body(P0, 1, hb, n, tb), step, ctxr));
}

TEST_CASE("hand-built deletion stream satisfies the deletion predicate") {
  SetModel m;
  auto h = m.init_heap({1});
  std::uint32_t hb = m.head_base(), tb = m.tail_base(), n = m.slot_base(2);

  State s0 = h.state;
  s0.set(n + off(Field::Lck), Value::proc(P0));

  State s1 = s0;  // logical removal
  s1.set(n + off(Field::Mrk), Value::boolean(true));
  s1.set_perm(n + off(Field::Mrk), P0, Fraction(1));

  State s2 = s1;  // physical removal
  s2.clear_perms();
  s2.set(hb + off(Field::Nxt), Value::addr(tb));
  s2.set_perm(hb + off(Field::Nxt), P0, Fraction(1));

  Stream s({s0, s1, s2});
  EvalCtx ctx(s);
  CHECK(eval(m.delete_body(P0, 1, hb, n, tb), Interval::bounded(1, 2), ctx));
  CHECK(eval(m.delete_pred(P0, 1), Interval::bounded(1, 2), ctx));
  // the marked-but-linked prefix alone is a valid deletion window too
  CHECK(eval(m.delete_body(P0, 1, hb, n, tb), Interval::bounded(1, 1), ctx));
  // but a window starting after the mark has no unmarked pre-state
  CHECK(!eval(m.delete_body(P0, 1, hb, n, tb), Interval::bounded(2, 2), ctx));
  CHECK(!eval(m.delete_pred(P0, 2), Interval::bounded(1, 2), ctx));
}

TEST_CASE("sequential add executes the insertion effect") {
  SetModel m({.pool = 6, .domain = {1, 2}, .procs = {P0}});
  auto h = m.init_heap();
  auto exs = complete_only(run(m, {{P0, m.mk_add(P0, 1)}}, h));
  REQUIRE(exs.size() == 1);
  const Execution& ex = exs[0];
  const State& last = ex.stream.at(ex.window.lub());
  CHECK(last.get(m.res(P0)) == Value::boolean(true));
  CHECK(keys_of(m.abs_set(last)) == std::vector<std::int64_t>{1});
  for (Time t : ex.stream.times(ex.window)) CHECK(m.sorted_chain(ex.stream.at(t)));

  // the linking step satisfies the insertion predicate with the expected witness
  Interval link = ex.label_window(P0, "al_5");
  REQUIRE(!link.is_empty());
  EvalCtx ctx(ex.stream);
  CHECK(eval(m.insert_body(P0, 1, m.head_base(), m.slot_base(2), m.tail_base()), link, ctx));
  CHECK(eval(m.insert_pred(P0, 1), link, ctx));
  CHECK(!eval(m.insert_pred(P0, 1), ex.label_window(P0, "al_4"), ctx));
}

TEST_CASE("sequential add on a present key fails without modifying the set") {
  SetModel m({.pool = 6, .domain = {1, 2}, .procs = {P0}});
  auto h = m.init_heap({1});
  auto exs = complete_only(run(m, {{P0, m.mk_add(P0, 1)}}, h));
  REQUIRE(exs.size() == 1);
  const State& last = exs[0].stream.at(exs[0].window.lub());
  CHECK(last.get(m.res(P0)) == Value::boolean(false));
  CHECK(keys_of(m.abs_set(last)) == std::vector<std::int64_t>{1});
  CHECK(exs[0].label_window(P0, "al_7") != Interval::empty());
  CHECK(exs[0].label_window(P0, "al_5").is_empty());
}

TEST_CASE("sequential remove marks before unlinking and matches the deletion predicate") {
  SetModel m({.pool = 6, .domain = {1, 2}, .procs = {P0}});
  auto h = m.init_heap({1});
  auto exs = complete_only(run(m, {{P0, m.mk_remove(P0, 1)}}, h));
  REQUIRE(exs.size() == 1);
  const Execution& ex = exs[0];
  const State& last = ex.stream.at(ex.window.lub());
  CHECK(last.get(m.res(P0)) == Value::boolean(true));
  CHECK(keys_of(m.abs_set(last)).empty());

  Interval mark = ex.label_window(P0, "rl_3");
  Interval unlink = ex.label_window(P0, "rl_5");
  REQUIRE(!mark.is_empty());
  REQUIRE(!unlink.is_empty());
  CHECK(mark.lub() < unlink.glb());
  Interval span = Interval::bounded(mark.glb(), unlink.lub());
  EvalCtx ctx(ex.stream);
  CHECK(eval(m.delete_body(P0, 1, m.head_base(), m.slot_base(2), m.tail_base()), span, ctx));
  CHECK(eval(m.delete_pred(P0, 1), span, ctx));
}

TEST_CASE("sequential remove of an absent key fails") {
  SetModel m({.pool = 6, .domain = {1, 2}, .procs = {P0}});
  for (auto seeded : {std::vector<std::int64_t>{}, std::vector<std::int64_t>{2}}) {
    auto h = m.init_heap(seeded);
    auto exs = complete_only(run(m, {{P0, m.mk_remove(P0, 1)}}, h));
    REQUIRE(exs.size() == 1);
    const State& last = exs[0].stream.at(exs[0].window.lub());
    CHECK(last.get(m.res(P0)) == Value::boolean(false));
    CHECK(keys_of(m.abs_set(last)) == keys_of(m.abs_set(h.state)));
  }
}

TEST_CASE("sequential contains reports membership including marked nodes") {
  SetModel m({.pool = 6, .domain = {1, 2}, .procs = {P0}});

  auto probe = [&](const State& init, std::int64_t x) {
    SetModel::Heap h{init, {}};
    auto exs = complete_only(run(m, {{P0, m.mk_contains(P0, x)}}, h));
    REQUIRE(exs.size() == 1);
    return exs[0].stream.at(exs[0].window.lub()).get(m.res(P0));
  };

  CHECK(probe(m.init_heap({1}).state, 1) == Value::boolean(true));
  CHECK(probe(m.init_heap().state, 1) == Value::boolean(false));
  CHECK(probe(m.init_heap({2}).state, 1) == Value::boolean(false));

  State marked = m.init_heap({1}).state;
  marked.set(m.slot_base(2) + off(Field::Mrk), Value::boolean(true));
  CHECK(probe(marked, 1) == Value::boolean(false));
}

TEST_CASE("coarse-grained contains abstracts the sequential fine-grained one") {
  SetModel m({.pool = 6, .domain = {1, 2}, .procs = {P0}});
  for (auto seeded : {std::vector<std::int64_t>{}, std::vector<std::int64_t>{1}}) {
    auto h = m.init_heap(seeded);
    ExecutionConfig cfg;
    cfg.horizon = 14;
    cfg.granularity = Granularity::PerAtom;
    cfg.free_nodes = h.free_nodes;
    auto v = refines(m.mk_cgcon(P0, 1), {P0}, m.context_L(P0), {{P0, m.mk_contains(P0, 1)}},
                     h.state, cfg);
    CHECK(v.status == Status::Holds);
    CHECK(v.cases > 0);
  }
}

TEST_CASE("coarse-grained add and remove abstract the sequential operations") {
  SetModel m({.pool = 4, .domain = {1}, .procs = {P0}});
  ExecutionConfig cfg;
  cfg.horizon = 34;
  cfg.granularity = Granularity::PerLocation;

  auto h = m.init_heap();
  cfg.free_nodes = h.free_nodes;
  auto va = refines(m.mk_cg_add(P0, 1), {P0}, m.context_L(P0), {{P0, m.mk_add(P0, 1)}}, h.state,
                    cfg);
  CHECK(va.status == Status::Holds);
  CHECK(va.cases > 0);

  auto h1 = m.init_heap({1});
  cfg.free_nodes = h1.free_nodes;
  auto vr = refines(m.mk_cg_remove(P0, 1), {P0}, m.context_L(P0), {{P0, m.mk_remove(P0, 1)}},
                    h1.state, cfg);
  CHECK(vr.status == Status::Holds);
  CHECK(vr.cases > 0);
}

TEST_CASE("the swapped-link mutant exposes an unsorted or tail-unreachable state") {
  SetModel m({.pool = 6, .domain = {1, 2}, .procs = {P0}});
  auto h = m.init_heap();
  auto exs = complete_only(run(m, {{P0, m.mk_add(P0, 1, SetModel::Mutant::SwapLink)}}, h));
  REQUIRE(exs.size() == 1);
  const Execution& ex = exs[0];
  bool tail_lost = false;
  for (Time t : ex.stream.times(ex.window)) {
    const State& st = ex.stream.at(t);
    tail_lost = tail_lost ||
                !heap_reachable(st.get(m.head()), Value::addr(m.tail_base()), st);
  }
  CHECK(tail_lost);
  EvalCtx ctx(ex.stream);
  CHECK(!eval(m.insert_pred(P0, 1), ex.label_window(P0, "al_5"), ctx));
}

TEST_CASE("the skip-mark mutant unlinks an unmarked node") {
  SetModel m({.pool = 6, .domain = {1, 2}, .procs = {P0}});
  auto h = m.init_heap({1});
  auto exs = complete_only(run(m, {{P0, m.mk_remove(P0, 1, SetModel::Mutant::SkipMark)}}, h));
  REQUIRE(exs.size() == 1);
  const Execution& ex = exs[0];
  CHECK(ex.label_window(P0, "rl_3").is_empty());
  std::uint32_t n = m.slot_base(2);
  for (Time t : ex.stream.times(ex.window))
    CHECK(ex.stream.at(t).get(n + off(Field::Mrk)) == Value::boolean(false));
}

TEST_CASE("the no-validate mutant locates without the under-lock guard") {
  SetModel m({.pool = 6, .domain = {1, 2}, .procs = {P0}});
  auto h = m.init_heap();
  auto exs = complete_only(
      run(m, {{P0, m.mk_add(P0, 1, SetModel::Mutant::NoValidate)}}, h));
  REQUIRE(!exs.empty());
  for (const auto& ex : exs) CHECK(ex.label_window(P0, "L8").is_empty());
}

TEST_CASE("witness triple domain") {
  SetModel m({.pool = 4});
  CHECK(m.node_triples().size() == 4u * 3u * 2u);
  CHECK(m.context_M(P0).size() == m.context_L(P0).size() + 3);
}
