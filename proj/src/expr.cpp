#include "lsv/expr.hpp"

#include <unordered_set>

namespace lsv {

namespace {

Expr mk(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

const char* op_name(BinOp op) {
  switch (op) {
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "=";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    case BinOp::Plus: return "+";
    case BinOp::Minus: return "-";
  }
  return "?";
}

}  // namespace

std::string ExprNode::to_string() const {
  switch (kind) {
    case Kind::Const: return value.to_string();
    case Kind::Loc: return loc.to_string();
    case Kind::Deref: return "*" + kids[0]->to_string();
    case Kind::FieldAddr: return kids[0]->to_string() + "." + field_name(field);
    case Kind::FieldVal: return kids[0]->to_string() + "->" + field_name(field);
    case Kind::Binary:
      return "(" + kids[0]->to_string() + " " + op_name(op) + " " + kids[1]->to_string() + ")";
    case Kind::Not: return "!" + kids[0]->to_string();
    case Kind::ReachFrom: return "RE(" + kids[0]->to_string() + ", " + kids[1]->to_string() + ")";
    case Kind::AbsSetMember: return kids[0]->to_string() + " in absSet";
  }
  return "?";
}

Expr e_const(Value v) {
  ExprNode n;
  n.kind = ExprNode::Kind::Const;
  n.value = v;
  return mk(std::move(n));
}
Expr e_int(std::int64_t k) { return e_const(Value::integer(k)); }
Expr e_bool(bool b) { return e_const(Value::boolean(b)); }
Expr e_null() { return e_const(Value::null()); }

Expr e_loc(Location l) {
  ExprNode n;
  n.kind = ExprNode::Kind::Loc;
  n.loc = std::move(l);
  return mk(std::move(n));
}
Expr e_var(const std::string& name, std::optional<Proc> owner) {
  return e_loc(Location::variable(name, owner));
}

Expr e_deref(Expr a) {
  ExprNode n;
  n.kind = ExprNode::Kind::Deref;
  n.kids = {std::move(a)};
  return mk(std::move(n));
}
Expr e_field_addr(Expr a, Field f) {
  ExprNode n;
  n.kind = ExprNode::Kind::FieldAddr;
  n.field = f;
  n.kids = {std::move(a)};
  return mk(std::move(n));
}
Expr e_field_val(Expr a, Field f) {
  ExprNode n;
  n.kind = ExprNode::Kind::FieldVal;
  n.field = f;
  n.kids = {std::move(a)};
  return mk(std::move(n));
}
Expr e_bin(BinOp op, Expr l, Expr r) {
  ExprNode n;
  n.kind = ExprNode::Kind::Binary;
  n.op = op;
  n.kids = {std::move(l), std::move(r)};
  return mk(std::move(n));
}
Expr e_not(Expr a) {
  ExprNode n;
  n.kind = ExprNode::Kind::Not;
  n.kids = {std::move(a)};
  return mk(std::move(n));
}
Expr e_and(Expr l, Expr r) { return e_bin(BinOp::And, std::move(l), std::move(r)); }
Expr e_or(Expr l, Expr r) { return e_bin(BinOp::Or, std::move(l), std::move(r)); }
Expr e_eq(Expr l, Expr r) { return e_bin(BinOp::Eq, std::move(l), std::move(r)); }
Expr e_ne(Expr l, Expr r) { return e_bin(BinOp::Ne, std::move(l), std::move(r)); }
Expr e_lt(Expr l, Expr r) { return e_bin(BinOp::Lt, std::move(l), std::move(r)); }
Expr e_ge(Expr l, Expr r) { return e_bin(BinOp::Ge, std::move(l), std::move(r)); }
Expr e_gt(Expr l, Expr r) { return e_bin(BinOp::Gt, std::move(l), std::move(r)); }
Expr e_reach(Expr from, Expr to) {
  ExprNode n;
  n.kind = ExprNode::Kind::ReachFrom;
  n.kids = {std::move(from), std::move(to)};
  return mk(std::move(n));
}
Expr e_abs_member(Expr x, Location head) {
  ExprNode n;
  n.kind = ExprNode::Kind::AbsSetMember;
  n.loc = std::move(head);
  n.kids = {std::move(x)};
  return mk(std::move(n));
}

namespace {

template <class Store>
Value read_loc(LocIdx i, const Store& sigma, ReadRecorder* rec) {
  if (rec) rec->note(i);
  return sigma.get(i);
}

template <class Store>
std::uint32_t addr_of(const Value& v, const Store& sigma) {
  if (v.is_null()) fail(Err::DerefNull, "dereference of null");
  if (!v.is_addr()) fail(Err::TypeError, "dereference of non-address " + v.to_string());
  std::uint32_t a = v.as_addr();
  if (a >= sigma.universe().addr_count()) fail(Err::DanglingAddr, "address outside pool: #" + std::to_string(a));
  return a;
}

template <class Store>
bool reach_impl(Value from, Value to, const Store& sigma, ReadRecorder* rec) {
  // phi^1 = from; each further step follows nxt. k = 1 allows from == to.
  Value cur = from;
  std::uint32_t limit = sigma.universe().addr_count() / kNodeSize + 2;
  for (std::uint32_t steps = 0; steps <= limit; ++steps) {
    if (cur == to) return true;
    if (cur.is_null()) return false;
    std::uint32_t a = addr_of(cur, sigma);
    cur = read_loc(a + field_offset(Field::Nxt), sigma, rec);
  }
  return false;  // cycle cutoff
}

template <class Store>
std::vector<std::uint32_t> set_addrs_impl(Value head, const Store& sigma, ReadRecorder* rec) {
  std::vector<std::uint32_t> out;
  Value cur = head;
  std::uint32_t limit = sigma.universe().addr_count() / kNodeSize + 2;
  for (std::uint32_t steps = 0; steps <= limit && !cur.is_null(); ++steps) {
    std::uint32_t a = addr_of(cur, sigma);
    Value marked = read_loc(a + field_offset(Field::Mrk), sigma, rec);
    if (!(marked.is_bool() && marked.as_bool())) out.push_back(a);
    cur = read_loc(a + field_offset(Field::Nxt), sigma, rec);
  }
  return out;
}

template <class Store>
Value eval_impl(const Expr& e, const Store& sigma, ReadRecorder* rec) {
  switch (e->kind) {
    case ExprNode::Kind::Const:
      return e->value;
    case ExprNode::Kind::Loc:
      return read_loc(sigma.universe().index_of(e->loc), sigma, rec);
    case ExprNode::Kind::Deref: {
      Value a = eval_impl(e->kids[0], sigma, rec);
      return read_loc(addr_of(a, sigma), sigma, rec);
    }
    case ExprNode::Kind::FieldAddr: {
      Value a = eval_impl(e->kids[0], sigma, rec);
      return Value::addr(addr_of(a, sigma) + field_offset(e->field));
    }
    case ExprNode::Kind::FieldVal: {
      Value a = eval_impl(e->kids[0], sigma, rec);
      return read_loc(addr_of(a, sigma) + field_offset(e->field), sigma, rec);
    }
    case ExprNode::Kind::Not:
      return Value::boolean(!eval_impl(e->kids[0], sigma, rec).as_bool());
    case ExprNode::Kind::Binary: {
      if (e->op == BinOp::And) {
        if (!eval_impl(e->kids[0], sigma, rec).as_bool()) return Value::boolean(false);
        return Value::boolean(eval_impl(e->kids[1], sigma, rec).as_bool());
      }
      if (e->op == BinOp::Or) {
        if (eval_impl(e->kids[0], sigma, rec).as_bool()) return Value::boolean(true);
        return Value::boolean(eval_impl(e->kids[1], sigma, rec).as_bool());
      }
      Value l = eval_impl(e->kids[0], sigma, rec);
      Value r = eval_impl(e->kids[1], sigma, rec);
      switch (e->op) {
        case BinOp::Eq: return Value::boolean(l == r);
        case BinOp::Ne: return Value::boolean(l != r);
        case BinOp::Lt: return Value::boolean(l.compare(r) < 0);
        case BinOp::Le: return Value::boolean(l.compare(r) <= 0);
        case BinOp::Gt: return Value::boolean(l.compare(r) > 0);
        case BinOp::Ge: return Value::boolean(l.compare(r) >= 0);
        case BinOp::Plus: return Value::integer(l.as_int() + r.as_int());
        case BinOp::Minus: return Value::integer(l.as_int() - r.as_int());
        default: break;
      }
      fail(Err::TypeError, "bad binary op");
    }
    case ExprNode::Kind::ReachFrom: {
      Value from = eval_impl(e->kids[0], sigma, rec);
      Value to = eval_impl(e->kids[1], sigma, rec);
      return Value::boolean(reach_impl(from, to, sigma, rec));
    }
    case ExprNode::Kind::AbsSetMember: {
      Value x = eval_impl(e->kids[0], sigma, rec);
      Value head = read_loc(sigma.universe().index_of(e->loc), sigma, rec);
      for (std::uint32_t a : set_addrs_impl(head, sigma, rec)) {
        if (read_loc(a + field_offset(Field::Val), sigma, rec) == x) return Value::boolean(true);
      }
      return Value::boolean(false);
    }
  }
  fail(Err::TypeError, "bad expression node");
}

}  // namespace

bool heap_reachable(Value from, Value to, const State& sigma, ReadRecorder* rec) {
  return reach_impl(from, to, sigma, rec);
}

std::vector<std::uint32_t> heap_set_addrs(Value head, const State& sigma, ReadRecorder* rec) {
  return set_addrs_impl(head, sigma, rec);
}

Value eval_expr(const Expr& e, const State& sigma, ReadRecorder* rec) {
  return eval_impl(e, sigma, rec);
}

Value eval_expr(const Expr& e, const PartialState& sigma) {
  return eval_impl(e, sigma, nullptr);
}

Value eval_expr(const Expr& e, const CachedView& sigma) {
  return eval_impl(e, sigma, nullptr);
}

std::vector<LocIdx> accessed(const Expr& e, const State& sigma) {
  ReadRecorder rec;
  eval_expr(e, sigma, &rec);
  return rec.reads();
}

}  // namespace lsv
