#include "lsv/lazyset.hpp"

#include <algorithm>

namespace lsv {

namespace {

Expr e_addr(std::uint32_t a) { return e_const(Value::addr(a)); }

Expr cell(std::uint32_t base, Field f) { return e_field_val(e_addr(base), f); }

Expr node_is(std::uint32_t base, Expr val, Expr nxt, Expr mrk, Expr lck) {
  return e_and(e_and(e_eq(cell(base, Field::Val), std::move(val)),
                     e_eq(cell(base, Field::Nxt), std::move(nxt))),
               e_and(e_eq(cell(base, Field::Mrk), std::move(mrk)),
                     e_eq(cell(base, Field::Lck), std::move(lck))));
}

}  // namespace

SetModel::SetModel(SetConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.pool < 2) fail(Err::PoolTooSmall, "need at least the two sentinel slots");
  uni_ = std::make_shared<LocationUniverse>(cfg_.pool * kNodeSize);
  uni_->add_var("Head");
  uni_->add_var("Tail");
  for (Proc p : cfg_.procs) {
    uni_->add_var("n1", p);
    uni_->add_var("n2", p);
    uni_->add_var("n3", p);
    uni_->add_var("res", p);
    uni_->add_var("pc", p);
  }
}

std::vector<Location> SetModel::cells_except(const std::vector<LocIdx>& excluded) const {
  std::vector<Location> out;
  for (LocIdx i = 0; i < uni_->addr_count(); ++i) {
    if (std::find(excluded.begin(), excluded.end(), i) == excluded.end())
      out.push_back(Location::address(i));
  }
  return out;
}

SetModel::Heap SetModel::init_heap(std::vector<std::int64_t> seeded) const {
  std::sort(seeded.begin(), seeded.end());
  seeded.erase(std::unique(seeded.begin(), seeded.end()), seeded.end());
  if (cfg_.pool < 2 + seeded.size())
    fail(Err::PoolTooSmall, "pool cannot hold the seeded keys and both sentinels");

  Heap h;
  h.state = State(uni_);
  State& st = h.state;
  st.set(head(), Value::addr(head_base()));
  st.set(tail(), Value::addr(tail_base()));

  // Chain: Head, seeded keys ascending in slots 2.., Tail.
  std::vector<std::uint32_t> chain = {head_base()};
  for (std::uint32_t k = 0; k < seeded.size(); ++k) chain.push_back(slot_base(2 + k));
  chain.push_back(tail_base());

  for (std::size_t i = 0; i < chain.size(); ++i) {
    std::uint32_t b = chain[i];
    Value val = b == head_base()   ? Value::neg_inf()
                : b == tail_base() ? Value::pos_inf()
                                   : Value::integer(seeded[i - 1]);
    Value nxt = i + 1 < chain.size() ? Value::addr(chain[i + 1]) : Value::null();
    st.set(b + field_offset(Field::Val), val);
    st.set(b + field_offset(Field::Nxt), nxt);
    st.set(b + field_offset(Field::Mrk), Value::boolean(false));
    st.set(b + field_offset(Field::Lck), Value::null());
  }

  for (std::uint32_t s = 2 + static_cast<std::uint32_t>(seeded.size()); s < cfg_.pool; ++s)
    h.free_nodes.push_back(slot_base(s));
  return h;
}

std::vector<std::uint32_t> SetModel::set_addr(const State& sigma) const {
  return heap_set_addrs(sigma.get(head()), sigma);
}

std::vector<Value> SetModel::abs_set(const State& sigma) const {
  std::vector<Value> out;
  for (std::uint32_t b : set_addr(sigma)) out.push_back(sigma.get(b + field_offset(Field::Val)));
  return out;
}

bool SetModel::in_set(std::uint32_t base, const Value& x, const State& sigma) const {
  if (!heap_reachable(sigma.get(head()), Value::addr(base), sigma)) return false;
  Value mrk = sigma.get(base + field_offset(Field::Mrk));
  if (mrk.is_bool() && mrk.as_bool()) return false;
  return sigma.get(base + field_offset(Field::Val)) == x;
}

bool SetModel::sorted_chain(const State& sigma) const {
  Value cur = sigma.get(head());
  std::uint32_t limit = cfg_.pool + 2;
  Value prev_val;
  bool have_prev = false;
  for (std::uint32_t steps = 0; steps <= limit && cur.is_addr(); ++steps) {
    Value val = sigma.get(cur.as_addr() + field_offset(Field::Val));
    if (have_prev && prev_val.compare(val) >= 0) return false;
    prev_val = val;
    have_prev = true;
    cur = sigma.get(cur.as_addr() + field_offset(Field::Nxt));
  }
  return cur.is_null();
}

Expr SetModel::in_abs_set(std::int64_t x) const { return e_abs_member(e_int(x), head()); }

Expr SetModel::located_expr(const Expr& pred, const Expr& curr) {
  return e_and(e_and(e_not(e_field_val(pred, Field::Mrk)), e_not(e_field_val(curr, Field::Mrk))),
               e_eq(e_field_val(pred, Field::Nxt), curr));
}

Command SetModel::mk_search(Proc p, std::int64_t x, const Location& pred,
                            const Location& curr) const {
  (void)p;
  Expr pe = e_loc(pred), ce = e_loc(curr);
  Command walk = c_seq({c_label("L3", c_guard(e_lt(e_field_val(ce, Field::Val), e_int(x)))),
                        c_label("L4", c_assign(pe, ce)),
                        c_label("L5", c_assign(ce, e_field_val(pe, Field::Nxt)))});
  return c_seq({c_label("L1", c_assign(pe, e_loc(head()))),
                c_label("L2", c_assign(ce, e_field_val(pe, Field::Nxt))),
                c_omega(walk),
                c_label("L3", c_guard(e_ge(e_field_val(ce, Field::Val), e_int(x)))),
                c_label("L6", c_lock(pe)),
                c_label("L7", c_lock(ce))});
}

Command SetModel::mk_locate(Proc p, std::int64_t x, const Location& pred, const Location& curr,
                            Mutant m) const {
  // The mutant trusts the traversal and skips the under-lock re-validation.
  if (m == Mutant::NoValidate) return mk_search(p, x, pred, curr);
  Expr pe = e_loc(pred), ce = e_loc(curr);
  Command try_find = c_seq({mk_search(p, x, pred, curr),
                            c_label("L8", c_guard(e_not(located_expr(pe, ce)))),
                            c_label("L10", c_unlock(pe)), c_label("L11", c_unlock(ce))});
  Command find = c_seq({mk_search(p, x, pred, curr), c_label("L8", c_guard(located_expr(pe, ce)))});
  return c_seq({c_omega(try_find), find});
}

Command SetModel::mk_contains(Proc p, std::int64_t x, Mutant m) const {
  Expr n = e_loc(n1(p));
  Command loop =
      c_seq({c_omega(c_seq({c_guard(e_lt(e_field_val(n, Field::Val), e_int(x))),
                            c_assign(n, e_field_val(n, Field::Nxt))})),
             c_guard(e_ge(e_field_val(n, Field::Val), e_int(x)))});
  Expr found = e_eq(e_field_val(n, Field::Val), e_int(x));
  if (m != Mutant::NoMrkCheck) found = e_and(e_not(e_field_val(n, Field::Mrk)), found);
  return c_seq({c_label("cl_1", c_assign(n, e_loc(head()))), c_label("cl_2", loop),
                c_label("cl_3", c_assign(e_loc(res(p)), found))});
}

Command SetModel::mk_add(Proc p, std::int64_t x, Mutant m) const {
  Expr a = e_loc(n1(p)), fresh = e_loc(n2(p)), b = e_loc(n3(p));
  Command link_fresh = c_label("al_4", c_assign(e_field_addr(fresh, Field::Nxt), b));
  Command link_list = c_label("al_5", c_assign(e_field_addr(a, Field::Nxt), fresh));
  std::vector<Command> ok = {
      c_label("alt_2", c_guard(e_ne(e_field_val(b, Field::Val), e_int(x)))),
      c_label("al_3", c_new_node(fresh, e_int(x)))};
  if (m == Mutant::SwapLink) {
    ok.push_back(link_list);
    ok.push_back(link_fresh);
  } else {
    ok.push_back(link_fresh);
    ok.push_back(link_list);
  }
  ok.push_back(c_label("al_6", c_assign(e_loc(res(p)), e_bool(true))));
  Command fail_branch =
      c_seq({c_label("alf_2", c_guard(e_eq(e_field_val(b, Field::Val), e_int(x)))),
             c_label("al_7", c_assign(e_loc(res(p)), e_bool(false)))});
  return c_seq({c_label("al_1", mk_locate(p, x, n1(p), n3(p), m)),
                c_choice(c_seq(std::move(ok)), fail_branch),
                c_label("al_8", c_unlock(a)), c_label("al_9", c_unlock(b))});
}

Command SetModel::mk_remove(Proc p, std::int64_t x, Mutant m) const {
  Expr a = e_loc(n1(p)), victim = e_loc(n2(p)), succ = e_loc(n3(p));
  std::vector<Command> ok = {
      c_label("rlt_2", c_guard(e_eq(e_field_val(victim, Field::Val), e_int(x))))};
  if (m != Mutant::SkipMark)
    ok.push_back(c_label("rl_3", c_assign(e_field_addr(victim, Field::Mrk), e_bool(true))));
  ok.push_back(c_label("rl_4", c_assign(succ, e_field_val(victim, Field::Nxt))));
  ok.push_back(c_label("rl_5", c_assign(e_field_addr(a, Field::Nxt), succ)));
  ok.push_back(c_label("rl_6", c_assign(e_loc(res(p)), e_bool(true))));
  Command fail_branch =
      c_seq({c_label("rlf_2", c_guard(e_ne(e_field_val(victim, Field::Val), e_int(x)))),
             c_label("rl_7", c_assign(e_loc(res(p)), e_bool(false)))});
  return c_seq({c_label("rl_1", mk_locate(p, x, n1(p), n2(p), m)),
                c_choice(c_seq(std::move(ok)), fail_branch),
                c_label("rl_8", c_unlock(a)), c_label("rl_9", c_unlock(victim))});
}

Command SetModel::mk_cgcon(Proc p, std::int64_t x) const {
  return c_choice(
      c_seq({c_atomic_guard(in_abs_set(x)), c_assign(e_loc(res(p)), e_bool(true))}),
      c_seq({c_atomic_guard(e_not(in_abs_set(x))), c_assign(e_loc(res(p)), e_bool(false))}));
}

Command SetModel::mk_cg_add(Proc p, std::int64_t x) const {
  IntvPred idle = p_not(mod_set(p));
  Command ok = c_seq({c_spec(insert_pred(p, x)), c_assign(e_loc(res(p)), e_bool(true))});
  Command fail_branch =
      c_seq({c_atomic_guard(in_abs_set(x)), c_assign(e_loc(res(p)), e_bool(false))});
  return c_seq({c_spec(idle), c_choice(ok, fail_branch), c_spec(idle)});
}

Command SetModel::mk_cg_remove(Proc p, std::int64_t x) const {
  IntvPred idle = p_not(mod_set(p));
  Command ok = c_seq({c_spec(delete_pred(p, x)), c_assign(e_loc(res(p)), e_bool(true))});
  Command fail_branch =
      c_seq({c_atomic_guard(e_not(in_abs_set(x))), c_assign(e_loc(res(p)), e_bool(false))});
  return c_seq({c_spec(idle), c_choice(ok, fail_branch), c_spec(idle)});
}

StateFn SetModel::write_fields(Proc p, std::uint32_t base) const {
  return [p, base](const State& sigma) {
    for (Field f : {Field::Val, Field::Mrk, Field::Nxt})
      if (sigma.can_write(base + field_offset(f), p)) return true;
    return false;
  };
}

IntvPred SetModel::mod_set(Proc p) const {
  LocIdx head_idx = uni_->index_of(head());
  return sf_some("modset(p" + std::to_string(p) + ")", [this, p, head_idx](const State& sigma) {
    for (std::uint32_t b : heap_set_addrs(sigma.get(head_idx), sigma))
      if (write_fields(p, b)(sigma)) return true;
    return false;
  });
}

IntvPred SetModel::int_free(Proc p, std::uint32_t base) const {
  std::vector<Location> cells;
  for (std::uint32_t off = 0; off < kNodeSize; ++off) cells.push_back(Location::address(base + off));
  StateFn interf = fn_interference(cells, p);
  return sf_all("intfree(p" + std::to_string(p) + ",#" + std::to_string(base) + ")",
                [interf](const State& sigma) { return !interf(sigma); });
}

Expr SetModel::preIns(std::int64_t x, std::uint32_t a, std::uint32_t b) const {
  return e_and(e_and(e_reach(e_loc(head()), e_addr(a)), located_expr(e_addr(a), e_addr(b))),
               e_and(e_lt(cell(a, Field::Val), e_int(x)), e_gt(cell(b, Field::Val), e_int(x))));
}

Expr SetModel::preDel(Proc p, std::int64_t x, std::uint32_t a, std::uint32_t n,
                      std::uint32_t b) const {
  return e_and(e_and(e_reach(e_loc(head()), e_addr(a)), located_expr(e_addr(a), e_addr(n))),
               e_and(e_lt(cell(a, Field::Val), e_int(x)),
                     node_is(n, e_int(x), e_addr(b), e_bool(false), e_const(Value::proc(p)))));
}

IntvPred SetModel::frame_except(Proc p, const std::vector<LocIdx>& writable) const {
  std::vector<IntvPred> parts;
  for (const Location& ua : cells_except(writable)) parts.push_back(no_write(ua, p));
  return p_all(std::move(parts));
}

IntvPred SetModel::insert_body(Proc p, std::int64_t x, std::uint32_t a, std::uint32_t n,
                               std::uint32_t b) const {
  Expr effect = e_and(e_eq(cell(a, Field::Nxt), e_addr(n)),
                      node_is(n, e_int(x), e_addr(b), e_bool(false), e_null()));
  LocIdx a_nxt = a + field_offset(Field::Nxt);
  return p_all({p_prev(sp_end(preIns(x, a, b))), p_ne(sp_all(effect)), int_free(p, a),
                int_free(p, b), frame_except(p, {a_nxt})});
}

IntvPred SetModel::insert_pred(Proc p, std::int64_t x) const {
  std::vector<IntvPred> cases;
  for (const auto& [a, n, b] : node_triples()) cases.push_back(insert_body(p, x, a, n, b));
  return p_any(std::move(cases));
}

IntvPred SetModel::delete_body(Proc p, std::int64_t x, std::uint32_t a, std::uint32_t n,
                               std::uint32_t b) const {
  Expr effect = e_or(e_eq(cell(a, Field::Nxt), e_addr(b)), e_field_val(e_addr(n), Field::Mrk));
  LocIdx a_nxt = a + field_offset(Field::Nxt);
  LocIdx n_mrk = n + field_offset(Field::Mrk);
  return p_all({p_prev(sp_end(preDel(p, x, a, n, b))), p_ne(sp_all(effect)), int_free(p, a),
                int_free(p, n), frame_except(p, {a_nxt, n_mrk})});
}

IntvPred SetModel::delete_pred(Proc p, std::int64_t x) const {
  std::vector<IntvPred> cases;
  for (const auto& [a, n, b] : node_triples()) cases.push_back(delete_body(p, x, a, n, b));
  return p_any(std::move(cases));
}

std::vector<std::array<std::uint32_t, 3>> SetModel::node_triples() const {
  std::vector<std::array<std::uint32_t, 3>> out;
  for (std::uint32_t a = 0; a < cfg_.pool; ++a)
    for (std::uint32_t n = 0; n < cfg_.pool; ++n)
      for (std::uint32_t b = 0; b < cfg_.pool; ++b) {
        if (a == n || a == b || n == b) continue;
        out.push_back({slot_base(a), slot_base(n), slot_base(b)});
      }
  return out;
}

std::vector<Location> SetModel::context_L(Proc p) const {
  std::vector<Location> out = cells_except();
  out.push_back(head());
  out.push_back(tail());
  out.push_back(res(p));
  return out;
}

std::vector<Location> SetModel::context_M(Proc p) const {
  std::vector<Location> out = context_L(p);
  out.push_back(n1(p));
  out.push_back(n2(p));
  out.push_back(n3(p));
  return out;
}

}  // namespace lsv
