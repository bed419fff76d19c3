#include <doctest.h>

#include "lsv/expr.hpp"
#include "lsv/serial.hpp"

using namespace lsv;

namespace {

// Pool of 6 nodes (24 addresses) plus the usual variables. Nodes at #0
// (head sentinel, val -inf), #4 (tail sentinel, val +inf), #8 (val 5).
// Head -> #8 -> Tail; remaining nodes unlinked.
State make_list_state() {
  auto uni = std::make_shared<LocationUniverse>(24);
  uni->add_var("Head");
  uni->add_var("Tail");
  uni->add_var("n1", 0);
  uni->add_var("res", 0);
  State s(uni);
  for (LocIdx i = 0; i < 24; ++i) s.set(i, Value::null());

  auto node = [&](std::uint32_t base, Value val, Value nxt) {
    s.set(base + 0, val);
    s.set(base + 1, nxt);
    s.set(base + 2, Value::boolean(false));
    s.set(base + 3, Value::null());
  };
  node(0, Value::neg_inf(), Value::addr(8));
  node(8, Value::integer(5), Value::addr(4));
  node(4, Value::pos_inf(), Value::null());
  s.set(Location::variable("Head"), Value::addr(0));
  s.set(Location::variable("Tail"), Value::addr(4));
  return s;
}

}  // namespace

TEST_CASE("value ordering and equality") {
  CHECK(Value::neg_inf().compare(Value::integer(-100)) < 0);
  CHECK(Value::integer(7).compare(Value::pos_inf()) < 0);
  CHECK(Value::integer(3).compare(Value::integer(3)) == 0);
  CHECK(Value::pos_inf().compare(Value::pos_inf()) == 0);
  CHECK(Value::addr(1) == Value::addr(1));
  CHECK(Value::addr(1) != Value::integer(1));
  CHECK_THROWS_AS((void)Value::addr(0).compare(Value::integer(0)), Error);
  CHECK_THROWS_AS((void)Value::null().as_bool(), Error);
}

TEST_CASE("location universe indexing") {
  LocationUniverse uni(8);
  LocIdx v = uni.add_var("x", 1);
  CHECK(v == 8);
  CHECK(uni.add_var("x", 1) == v);  // idempotent
  CHECK(uni.index_of(Location::variable("x", 1)) == v);
  CHECK(uni.index_of(Location::address(3)) == 3);
  CHECK(uni.is_addr(3));
  CHECK(!uni.is_addr(v));
  CHECK(uni.location_of(v) == Location::variable("x", 1));
  CHECK_THROWS_AS((void)uni.index_of(Location::variable("y")), Error);
  CHECK_THROWS_AS((void)uni.index_of(Location::address(8)), Error);
}

TEST_CASE("field layout") {
  CHECK(field_offset(Field::Val) == 0);
  CHECK(field_offset(Field::Nxt) == 1);
  CHECK(field_offset(Field::Mrk) == 2);
  CHECK(field_offset(Field::Lck) == 3);
}

TEST_CASE("expression evaluation over the heap") {
  State s = make_list_state();
  Expr n8 = e_const(Value::addr(8));

  CHECK(eval_expr(e_deref(n8), s) == Value::integer(5));
  CHECK(eval_expr(e_field_addr(n8, Field::Mrk), s) == Value::addr(10));
  CHECK(eval_expr(e_field_val(n8, Field::Nxt), s) == Value::addr(4));
  CHECK(eval_expr(e_lt(e_field_val(e_var("Head"), Field::Val), e_int(0)), s) == Value::boolean(true));

  CHECK_THROWS_AS(eval_expr(e_deref(e_null()), s), Error);
  CHECK_THROWS_AS(eval_expr(e_deref(e_var("n1", 0)), s), Error);  // n1 is null
  CHECK_THROWS_AS(eval_expr(e_deref(e_const(Value::addr(24))), s), Error);
}

TEST_CASE("reachability and abstract set") {
  State s = make_list_state();
  Expr head = e_var("Head");
  Expr tail = e_var("Tail");

  CHECK(eval_expr(e_reach(head, tail), s).as_bool());
  CHECK(eval_expr(e_reach(head, e_const(Value::addr(8))), s).as_bool());
  CHECK(eval_expr(e_reach(head, head), s).as_bool());  // zero steps
  CHECK(!eval_expr(e_reach(tail, head), s).as_bool());
  CHECK(!eval_expr(e_reach(head, e_const(Value::addr(12))), s).as_bool());

  Location head_loc = Location::variable("Head");
  CHECK(eval_expr(e_abs_member(e_int(5), head_loc), s).as_bool());
  CHECK(!eval_expr(e_abs_member(e_int(6), head_loc), s).as_bool());

  // marking #8 removes 5 from the abstract set even though it stays linked
  s.set(LocIdx(10), Value::boolean(true));
  CHECK(!eval_expr(e_abs_member(e_int(5), head_loc), s).as_bool());
  CHECK(eval_expr(e_reach(head, e_const(Value::addr(8))), s).as_bool());
}

TEST_CASE("accessed matches a hand-derived read set") {
  State s = make_list_state();

  // (n1 != null) && (n1->val < 5): n1 is null, so && short-circuits after
  // reading only n1.
  Expr guard = e_and(e_ne(e_var("n1", 0), e_null()),
                     e_lt(e_field_val(e_var("n1", 0), Field::Val), e_int(5)));
  LocIdx n1 = s.universe().index_of(Location::variable("n1", 0));
  CHECK(accessed(guard, s) == std::vector<LocIdx>{n1});

  s.set(n1, Value::addr(8));
  CHECK(accessed(guard, s) == std::vector<LocIdx>{n1, 8});

  // head->nxt reads Head then #1
  LocIdx head = s.universe().index_of(Location::variable("Head"));
  CHECK(accessed(e_field_val(e_var("Head"), Field::Nxt), s) == std::vector<LocIdx>{head, 1});
}

TEST_CASE("fractional permissions") {
  State s = make_list_state();

  s.set_perm(0, 1, Fraction(1));
  CHECK(s.perm_mode(LocIdx(0), 1) == PermMode::Write);
  CHECK(s.can_write(0, 1));
  CHECK(!s.can_read(0, 1));
  CHECK(s.perm_mode(LocIdx(0), 0) == PermMode::None);

  CHECK_THROWS_AS(s.set_perm(0, 2, Fraction(1, 2)), Error);  // sum would exceed 1

  s.set_perm(0, 1, Fraction(1, 3));
  s.set_perm(0, 2, Fraction(1, 2));
  CHECK(s.perm_mode(LocIdx(0), 1) == PermMode::Read);
  CHECK(s.perm(0, 2) == Fraction(1, 2));

  CHECK(s.interfered({5}, 0) == false);
  s.set_perm(5, 2, Fraction(1));
  CHECK(s.interfered({5}, 0));
  CHECK(!s.interfered({5}, 2));  // own write is not interference

  s.set_perm(5, 2, Fraction(0));
  CHECK(s.perm(5, 2) == Fraction(0));
  CHECK(!s.interfered({5}, 0));
}

TEST_CASE("partial state evaluation") {
  auto uni = std::make_shared<LocationUniverse>(4);
  auto u2 = std::make_shared<LocationUniverse>(*uni);
  PartialState ps(u2);
  ps.bind(0, Value::integer(7));
  CHECK(eval_expr(e_eq(e_loc(Location::address(0)), e_int(7)), ps).as_bool());
  CHECK_THROWS_AS(eval_expr(e_loc(Location::address(1)), ps), Error);
}

TEST_CASE("state json round-trip is canonical") {
  State s = make_list_state();
  s.set_perm(0, 0, Fraction(1, 2));
  s.set_perm(0, 1, Fraction(1, 2));
  s.set_perm(9, 1, Fraction(1));

  Json j = state_to_json(s);
  CHECK(j["perm"]["#0"]["p0"] == "1/2");
  CHECK(j["store"]["Head"] == Json{{"addr", 0}});
  CHECK(j["store"]["#0"] == "-inf");

  // keys come out sorted
  std::string prev;
  for (auto it = j["store"].begin(); it != j["store"].end(); ++it) {
    CHECK(prev < it.key());
    prev = it.key();
  }

  State back = state_from_json(j);
  CHECK(state_to_json(back).dump() == j.dump());
  CHECK(back.get(Location::variable("Head")) == Value::addr(0));
  CHECK(back.perm(0, 1) == Fraction(1, 2));
}

TEST_CASE("stream jsonl round-trip") {
  State s = make_list_state();
  Stream st;
  st.push(s);
  s.set(Location::variable("res", 0), Value::boolean(true));
  st.push(s);

  std::string text = stream_to_jsonl(st);
  Stream back = stream_from_jsonl(text);
  REQUIRE(back.size() == 2);
  CHECK(stream_to_jsonl(back) == text);
  CHECK(back.at(1).get(Location::variable("res", 0)) == Value::boolean(true));
}

TEST_CASE("fraction strings") {
  CHECK(fraction_to_string(Fraction(1, 3)) == "1/3");
  CHECK(fraction_from_string("2/6") == Fraction(1, 3));
  CHECK_THROWS_AS(fraction_from_string("nope"), Error);
  CHECK_THROWS_AS(fraction_from_string("1/0"), Error);
}
