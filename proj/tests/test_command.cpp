#include <doctest.h>

#include "lsv/command.hpp"

using namespace lsv;

namespace {

constexpr Proc P0 = 0;
constexpr Proc P1 = 1;

struct Fix {
  std::shared_ptr<LocationUniverse> uni;
  LocIdx src, dst, nn, pc0, pc1;

  Fix() {
    uni = std::make_shared<LocationUniverse>(8);
    src = uni->add_var("src", P0);
    dst = uni->add_var("dst", P0);
    nn = uni->add_var("n", P0);
    pc0 = uni->add_var("pc", P0);
    pc1 = uni->add_var("pc", P1);
  }

  State blank() const {
    State s(uni);
    s.set(src, Value::integer(7));
    s.set(dst, Value::integer(0));
    return s;
  }
};

Expr v_src() { return e_var("src", P0); }
Expr v_dst() { return e_var("dst", P0); }

Location l_src() { return Location::variable("src", P0); }
Location l_dst() { return Location::variable("dst", P0); }

}  // namespace

TEST_CASE("label registry and pc") {
  int a = label_id("al_1");
  int b = label_id("al_2");
  CHECK(a != b);
  CHECK(label_id("al_1") == a);
  CHECK(label_name(a) == "al_1");
  CHECK(pc_var(P0).to_string() == "pc@p0");
}

TEST_CASE("idle behaviour") {
  Fix fx;
  Stream s;
  for (int t = 0; t < 3; ++t) s.push(fx.blank());
  EvalCtx ctx(s);
  std::vector<Location> z = {l_src(), l_dst()};

  CHECK(eval(beh(c_idle(), P0, z), s.whole(), ctx));

  State noisy = fx.blank();
  noisy.set_perm(fx.dst, P0, Fraction(1));
  Stream s2;
  s2.push(fx.blank());
  s2.push(noisy);
  s2.push(fx.blank());
  EvalCtx ctx2(s2);
  CHECK(!eval(beh(c_idle(), P0, z), s2.whole(), ctx2));
  CHECK(eval(beh(c_idle(), P0, z), Interval::bounded(2, 2), ctx2));
  // another process writing is still idle for p0
  CHECK(eval(beh(c_idle(), P1, z), s2.whole(), ctx2));
}

TEST_CASE("guards") {
  Fix fx;
  State s0 = fx.blank();
  s0.set_perm(fx.src, P0, Fraction(1, 2));
  Stream s;
  s.push(s0);
  s.push(s0);
  EvalCtx ctx(s);
  std::vector<Location> z = {l_src(), l_dst()};

  // apparent guard needs read permission; src holds 7
  CHECK(eval(beh(c_guard(e_eq(v_src(), e_int(7))), P0, z), s.whole(), ctx));
  CHECK(!eval(beh(c_guard(e_eq(v_src(), e_int(8))), P0, z), s.whole(), ctx));
  // atomic guard reads the actual state, no permission needed
  CHECK(eval(beh(c_atomic_guard(e_eq(v_dst(), e_int(0))), P0, z), s.whole(), ctx));
  CHECK(!eval(beh(c_atomic_guard(e_eq(v_dst(), e_int(1))), P0, z), s.whole(), ctx));
  // a guard over a location with no permission at all cannot be observed
  CHECK(!eval(beh(c_guard(e_eq(v_dst(), e_int(0))), P0, z), s.whole(), ctx));
}

namespace {

/// Hand-built stream for dst := src: one evaluation step observing src, then
/// two update steps where p0 holds write permission on dst and dst carries
/// the copied value.
Stream assign_stream(const Fix& fx, std::int64_t written, bool with_perm) {
  State ev = fx.blank();
  ev.set_perm(fx.src, P0, Fraction(1, 2));
  State up = fx.blank();
  up.set(fx.dst, Value::integer(written));
  if (with_perm) up.set_perm(fx.dst, P0, Fraction(1));
  Stream s;
  s.push(ev);
  s.push(up);
  s.push(up);
  return s;
}

}  // namespace

TEST_CASE("assignment to a variable") {
  Fix fx;
  std::vector<Location> z = {l_src(), l_dst()};
  Command asg = c_assign(e_loc(l_dst()), v_src());

  Stream good = assign_stream(fx, 7, true);
  EvalCtx ctx(good);
  CHECK(eval(beh(asg, P0, z), good.whole(), ctx));
  // no split puts the update phase inside the evaluation-only prefix
  CHECK(!eval(beh(asg, P0, z), Interval::bounded(0, 0), ctx));
  // the empty interval is not an assignment
  CHECK(!eval(beh(asg, P0, z), Interval::empty(), ctx));

  // wrong value written
  Stream bad_val = assign_stream(fx, 8, true);
  EvalCtx ctx2(bad_val);
  CHECK(!eval(beh(asg, P0, z), bad_val.whole(), ctx2));

  // value right but no write permission
  Stream no_perm = assign_stream(fx, 7, false);
  EvalCtx ctx3(no_perm);
  CHECK(!eval(beh(asg, P0, z), no_perm.whole(), ctx3));

  // an interval reaching past the horizon leaves the tail unconstrained
  CHECK(eval(beh(asg, P0, z), Interval::open_right(0), ctx));
}

TEST_CASE("assignment through an address") {
  Fix fx;
  // n points at node 0; write 7 into its val cell
  State ev = fx.blank();
  ev.set(fx.nn, Value::addr(0));
  ev.set_perm(fx.nn, P0, Fraction(1, 2));
  ev.set_perm(fx.src, P0, Fraction(1, 2));
  State up = ev;
  up.clear_perms();
  up.set(0, Value::integer(7));
  up.set_perm(0, P0, Fraction(1));
  Stream s;
  s.push(ev);
  s.push(up);
  EvalCtx ctx(s);
  std::vector<Location> z = {l_src(), Location::address(0)};

  Command asg = c_assign(e_field_addr(e_var("n", P0), Field::Val), v_src());
  CHECK(eval(beh(asg, P0, z), s.whole(), ctx));

  // without write permission on the cell there is no candidate address
  Stream s2;
  s2.push(ev);
  State up2 = up;
  up2.set_perm(0, P0, Fraction(1, 2));
  s2.push(up2);
  EvalCtx ctx2(s2);
  CHECK(!eval(beh(asg, P0, z), s2.whole(), ctx2));
}

TEST_CASE("sequencing and choice") {
  Fix fx;
  std::vector<Location> z = {l_src(), l_dst()};
  Command asg = c_assign(e_loc(l_dst()), v_src());
  Command idle = c_idle();

  Stream s;
  s.push(fx.blank());  // idle
  State ev = fx.blank();
  ev.set_perm(fx.src, P0, Fraction(1, 2));
  s.push(ev);  // evaluate
  State up = fx.blank();
  up.set(fx.dst, Value::integer(7));
  up.set_perm(fx.dst, P0, Fraction(1));
  s.push(up);  // write
  EvalCtx ctx(s);

  CHECK(eval(beh(c_seq({idle, asg}), P0, z), s.whole(), ctx));
  CHECK(eval(beh(c_choice(asg, idle), P0, z), Interval::bounded(0, 0), ctx));
  CHECK(eval(beh(c_choice(asg, idle), P0, z), s.whole(), ctx));
  // pure idling never satisfies the assignment alone
  Stream quiet;
  quiet.push(fx.blank());
  quiet.push(fx.blank());
  EvalCtx ctxq(quiet);
  CHECK(!eval(beh(asg, P0, z), quiet.whole(), ctxq));
  CHECK(eval(beh(c_choice(asg, idle), P0, z), quiet.whole(), ctxq));
}

TEST_CASE("omega iterates") {
  Fix fx;
  std::vector<Location> z = {l_src(), l_dst()};
  Stream quiet;
  for (int t = 0; t < 4; ++t) quiet.push(fx.blank());
  EvalCtx ctx(quiet);

  Command loop = c_omega(c_idle());
  CHECK(eval(beh(loop, P0, z), quiet.whole(), ctx));
  CHECK(eval(beh(loop, P0, z), Interval::empty(), ctx));
  CHECK(eval(beh(loop, P0, z), Interval::open_right(0), ctx));

  // a loop whose body requires a write never runs on a quiet stream
  Command busy = c_omega(c_assign(e_loc(l_dst()), e_int(1)));
  CHECK(!eval(beh(busy, P0, z), quiet.whole(), ctx));
  CHECK(eval(beh(busy, P0, z), Interval::empty(), ctx));
}

TEST_CASE("lock and unlock") {
  Fix fx;
  LocIdx lck = 0 * kNodeSize + field_offset(Field::Lck);
  State before = fx.blank();
  before.set(fx.nn, Value::addr(0));
  before.set(lck, Value::null());
  State held = before;
  held.set(lck, Value::proc(P0));
  held.set_perm(lck, P0, Fraction(1));
  Stream s;
  s.push(before);
  s.push(held);
  State after = before;
  after.set_perm(lck, P0, Fraction(1));
  s.push(after);
  EvalCtx ctx(s);
  std::vector<Location> z = {l_src(), Location::address(lck)};

  Expr node = e_var("n", P0);
  CHECK(eval(beh(c_lock(node), P0, z), Interval::bounded(1, 1), ctx));
  // the acquiring step needs the cell to have been null just before
  CHECK(!eval(beh(c_lock(node), P0, z), Interval::bounded(2, 2), ctx));
  // p1 cannot claim the acquisition
  CHECK(!eval(beh(c_lock(node), P1, z), Interval::bounded(1, 1), ctx));
  // release: previous owner p0, new value null
  CHECK(eval(beh(c_unlock(node), P0, z), Interval::bounded(2, 2), ctx));
  CHECK(!eval(beh(c_unlock(node), P0, z), Interval::bounded(1, 1), ctx));
  // an idle prefix before the acquisition is allowed
  CHECK(eval(beh(c_lock(node), P0, z), Interval::bounded(0, 1), ctx));
}

TEST_CASE("labels pin the program counter") {
  Fix fx;
  State at = fx.blank();
  at.set(fx.pc0, Value::integer(label_id("here")));
  Stream s;
  s.push(at);
  s.push(at);
  EvalCtx ctx(s);
  std::vector<Location> z = {l_src()};

  CHECK(eval(beh(c_label("here", c_idle()), P0, z), s.whole(), ctx));
  CHECK(!eval(beh(c_label("elsewhere", c_idle()), P0, z), s.whole(), ctx));
}

TEST_CASE("rely, enforce, spec") {
  Fix fx;
  Stream s;
  s.push(fx.blank());
  s.push(fx.blank());
  EvalCtx ctx(s);
  std::vector<Location> z = {l_src()};

  CHECK(eval(beh(c_spec(p_true()), P0, z), s.whole(), ctx));
  CHECK(!eval(beh(c_spec(p_false()), P0, z), s.whole(), ctx));
  // a false rely discharges any obligation
  CHECK(eval(beh(c_rely(p_false(), c_spec(p_false())), P0, z), s.whole(), ctx));
  CHECK(!eval(beh(c_rely(p_true(), c_spec(p_false())), P0, z), s.whole(), ctx));
  CHECK(!eval(beh(c_enf(p_false(), c_idle()), P0, z), s.whole(), ctx));
  CHECK(eval(beh(c_enf(p_true(), c_idle()), P0, z), s.whole(), ctx));
}

TEST_CASE("context widens the frame and rejects clashes") {
  Fix fx;
  State noisy = fx.blank();
  noisy.set_perm(fx.dst, P0, Fraction(1));
  Stream s;
  s.push(noisy);
  EvalCtx ctx(s);

  // idle within {src} even though dst is written
  CHECK(eval(beh(c_idle(), P0, {l_src()}), s.whole(), ctx));
  // widening the context with dst makes the write visible
  CHECK(!eval(beh(c_context({l_dst()}, c_idle()), P0, {l_src()}), s.whole(), ctx));
  CHECK_THROWS_AS((void)beh(c_context({l_src()}, c_idle()), P0, {l_src()}), Error);
}

TEST_CASE("parallel composition splits the interval") {
  Fix fx;
  std::vector<Location> z = {l_src(), l_dst()};

  // p0 writes dst in step 1, p1 writes src in step 2; both idle elsewhere
  Stream s;
  s.push(fx.blank());
  State w0 = fx.blank();
  w0.set(fx.dst, Value::integer(1));
  w0.set_perm(fx.dst, P0, Fraction(1));
  s.push(w0);
  State w1 = fx.blank();
  w1.set(fx.src, Value::integer(1));
  w1.set_perm(fx.src, P1, Fraction(1));
  s.push(w1);
  s.push(fx.blank());
  EvalCtx ctx(s);

  Command a0 = c_assign(e_loc(l_dst()), e_int(1));
  Command a1 = c_assign(e_loc(l_src()), e_int(1));
  CHECK(eval(beh(c_par({{P0, a0}, {P1, a1}}), std::vector<Proc>{P0, P1}, z), s.whole(), ctx));
  // swapping the processes cannot explain the permissions seen
  CHECK(!eval(beh(c_par({{P0, a1}, {P1, a0}}), std::vector<Proc>{P0, P1}, z), s.whole(), ctx));
  // both idling is consistent with a quiet stream
  Stream quiet;
  quiet.push(fx.blank());
  quiet.push(fx.blank());
  EvalCtx ctxq(quiet);
  Command both = c_par({{P0, c_idle()}, {P1, c_idle()}});
  CHECK(eval(beh(both, std::vector<Proc>{P0, P1}, z), quiet.whole(), ctxq));
}

TEST_CASE("new node establishes the initialised cells") {
  Fix fx;
  State done = fx.blank();
  done.set(fx.nn, Value::addr(4));
  done.set(4 + field_offset(Field::Val), Value::integer(5));
  done.set(4 + field_offset(Field::Mrk), Value::boolean(false));
  done.set(4 + field_offset(Field::Lck), Value::null());
  Stream s;
  s.push(fx.blank());
  s.push(done);
  EvalCtx ctx(s);
  std::vector<Location> z = {l_src()};

  Command nn = c_new_node(e_var("n", P0), e_int(5));
  CHECK(eval(beh(nn, P0, z), s.whole(), ctx));
  CHECK(!eval(beh(nn, P0, z), Interval::bounded(0, 0), ctx));
  CHECK(!eval(beh(nn, P0, z), Interval::empty(), ctx));
  Command wrong = c_new_node(e_var("n", P0), e_int(6));
  CHECK(!eval(beh(wrong, P0, z), s.whole(), ctx));
}
