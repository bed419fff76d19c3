#include "lsv/command.hpp"

#include <algorithm>
#include <mutex>
#include <unordered_map>

namespace lsv {

namespace {

std::mutex label_mu;
std::vector<std::string> label_names;
std::unordered_map<std::string, int> label_ids;

Command mk(CommandNode n) { return std::make_shared<const CommandNode>(std::move(n)); }

}  // namespace

int label_id(const std::string& name) {
  std::lock_guard<std::mutex> lock(label_mu);
  auto it = label_ids.find(name);
  if (it != label_ids.end()) return it->second;
  int id = static_cast<int>(label_names.size());
  label_names.push_back(name);
  label_ids.emplace(name, id);
  return id;
}

const std::string& label_name(int id) {
  std::lock_guard<std::mutex> lock(label_mu);
  return label_names.at(static_cast<std::size_t>(id));
}

Location pc_var(Proc p) { return Location::variable("pc", p); }

Expr pc_is(Proc p, const std::string& label) {
  return e_eq(e_loc(pc_var(p)), e_int(label_id(label)));
}

Command c_idle() {
  CommandNode n;
  n.kind = CommandNode::Kind::Idle;
  return mk(std::move(n));
}
Command c_guard(Expr c) {
  CommandNode n;
  n.kind = CommandNode::Kind::Guard;
  n.guard = std::move(c);
  return mk(std::move(n));
}
Command c_atomic_guard(Expr c) {
  CommandNode n;
  n.kind = CommandNode::Kind::AtomicGuard;
  n.guard = std::move(c);
  return mk(std::move(n));
}
Command c_assign(Expr target, Expr rhs) {
  CommandNode n;
  n.kind = CommandNode::Kind::Assign;
  n.target = std::move(target);
  n.rhs = std::move(rhs);
  return mk(std::move(n));
}
Command c_seq(std::vector<Command> cs) {
  if (cs.size() == 1) return cs[0];
  CommandNode n;
  n.kind = CommandNode::Kind::Seq;
  n.kids = std::move(cs);
  return mk(std::move(n));
}
Command c_choice(Command a, Command b) {
  CommandNode n;
  n.kind = CommandNode::Kind::Choice;
  n.kids = {std::move(a), std::move(b)};
  return mk(std::move(n));
}
Command c_omega(Command body) {
  CommandNode n;
  n.kind = CommandNode::Kind::Omega;
  n.kids = {std::move(body)};
  return mk(std::move(n));
}
Command c_par(std::vector<std::pair<Proc, Command>> procs) {
  CommandNode n;
  n.kind = CommandNode::Kind::Par;
  n.procs = std::move(procs);
  return mk(std::move(n));
}
Command c_context(std::vector<Location> frame, Command body) {
  CommandNode n;
  n.kind = CommandNode::Kind::Context;
  n.frame = std::move(frame);
  n.kids = {std::move(body)};
  return mk(std::move(n));
}
Command c_label(const std::string& l, Command body) {
  label_id(l);
  CommandNode n;
  n.kind = CommandNode::Kind::Labelled;
  n.label = l;
  n.kids = {std::move(body)};
  return mk(std::move(n));
}
Command c_rely(IntvPred r, Command body) {
  CommandNode n;
  n.kind = CommandNode::Kind::Rely;
  n.pred = std::move(r);
  n.kids = {std::move(body)};
  return mk(std::move(n));
}
Command c_enf(IntvPred g, Command body) {
  CommandNode n;
  n.kind = CommandNode::Kind::Enf;
  n.pred = std::move(g);
  n.kids = {std::move(body)};
  return mk(std::move(n));
}
Command c_spec(IntvPred g) {
  CommandNode n;
  n.kind = CommandNode::Kind::Spec;
  n.pred = std::move(g);
  return mk(std::move(n));
}
Command c_lock(Expr node) {
  CommandNode n;
  n.kind = CommandNode::Kind::Lock;
  n.target = std::move(node);
  return mk(std::move(n));
}
Command c_unlock(Expr node) {
  CommandNode n;
  n.kind = CommandNode::Kind::Unlock;
  n.target = std::move(node);
  return mk(std::move(n));
}
Command c_new_node(Expr node_var, Expr value) {
  CommandNode n;
  n.kind = CommandNode::Kind::NewNode;
  n.target = std::move(node_var);
  n.rhs = std::move(value);
  return mk(std::move(n));
}

std::string CommandNode::to_string() const {
  switch (kind) {
    case Kind::Idle: return "Idle";
    case Kind::Guard: return "[" + guard->to_string() + "]";
    case Kind::AtomicGuard: return "<" + guard->to_string() + ">";
    case Kind::Assign: return target->to_string() + " := " + rhs->to_string();
    case Kind::Seq: {
      std::string out;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (i) out += " ; ";
        out += kids[i]->to_string();
      }
      return "(" + out + ")";
    }
    case Kind::Choice: return "(" + kids[0]->to_string() + " |~| " + kids[1]->to_string() + ")";
    case Kind::Omega: return "(" + kids[0]->to_string() + ")^w";
    case Kind::Par: {
      std::string out = "par{";
      for (std::size_t i = 0; i < procs.size(); ++i) {
        if (i) out += " || ";
        out += "p" + std::to_string(procs[i].first) + ": " + procs[i].second->to_string();
      }
      return out + "}";
    }
    case Kind::Context: return "ctx(" + kids[0]->to_string() + ")";
    case Kind::Labelled: return label + ": " + kids[0]->to_string();
    case Kind::Rely: return "rely(" + lsv::to_string(pred) + ", " + kids[0]->to_string() + ")";
    case Kind::Enf: return "enf(" + lsv::to_string(pred) + ", " + kids[0]->to_string() + ")";
    case Kind::Spec: return "spec(" + lsv::to_string(pred) + ")";
    case Kind::Lock: return "lock(" + target->to_string() + ")";
    case Kind::Unlock: return "unlock(" + target->to_string() + ")";
    case Kind::NewNode: return target->to_string() + " := new(" + rhs->to_string() + ")";
  }
  return "?";
}

IntvPred p_inf() {
  static IntvPred g = p_lift("inf", [](const Interval& d, EvalCtx&) { return d.is_infinite(); });
  return g;
}
IntvPred p_fin() {
  static IntvPred g = p_not(p_inf());
  return g;
}

namespace {

bool idle_holds(const std::vector<Location>& z, Proc p, const Interval& d, EvalCtx& ctx) {
  const Stream& s = ctx.stream();
  for (Time t : s.times(d)) {
    const State& sigma = s.at(t);
    for (const Location& va : z)
      if (sigma.can_write(sigma.universe().index_of(va), p)) return false;
  }
  return true;
}

std::vector<Location> without(std::vector<Location> z, const Location& va) {
  z.erase(std::remove(z.begin(), z.end(), va), z.end());
  return z;
}

IntvPred idle_pred(Proc p, const std::vector<Location>& z) {
  std::vector<IntvPred> parts;
  parts.reserve(z.size());
  for (const Location& va : z) parts.push_back(no_write(va, p));
  return p_all(std::move(parts));
}

/// The two-phase assignment behaviour: an evaluation phase observing the
/// source (and target address), chopped with a non-empty update phase holding
/// write permission while the location carries the assigned value.
bool assign_holds(Proc p, const std::vector<Location>& z, const Expr& target, const Expr& rhs,
                  const Interval& d, EvalCtx& ctx) {
  const Stream& s = ctx.stream();
  bool var_case = target->kind == ExprNode::Kind::Loc;

  auto eval_phase = [&](const Interval& d1, const std::optional<Value>& addr,
                        const std::optional<Value>& k) {
    if (!idle_holds(z, p, d1, ctx)) return false;
    Expr c = k ? e_eq(rhs, e_const(*k)) : e_eq(rhs, rhs);
    if (!var_case) {
      Expr ta = addr ? e_eq(target, e_const(*addr)) : e_eq(target, target);
      c = e_and(ta, c);
    }
    return pos_apparent_holds(p, c, d1, ctx);
  };

  for (const ChopSplit& sp : chop_splits(d, s)) {
    if (sp.right.is_empty()) continue;  // the update phase is non-empty
    std::vector<Time> ts = s.times(sp.right);
    if (ts.empty()) {
      // update beyond the window constrains nothing
      if (eval_phase(sp.left, std::nullopt, std::nullopt)) return true;
      continue;
    }
    const State& first = s.at(ts[0]);
    if (var_case) {
      Location va = target->loc;
      LocIdx idx = first.universe().index_of(va);
      Value k = first.get(idx);
      bool ok = true;
      for (Time t : ts) {
        const State& sig = s.at(t);
        if (sig.get(idx) != k || !sig.can_write(idx, p)) {
          ok = false;
          break;
        }
      }
      if (ok && idle_holds(without(z, va), p, sp.right, ctx) &&
          eval_phase(sp.left, std::nullopt, k))
        return true;
    } else {
      // candidate written addresses: those p holds write permission for
      for (const auto& pe : first.perms()) {
        if (pe.proc != p || pe.frac != Fraction(1) || !first.universe().is_addr(pe.loc)) continue;
        LocIdx a = pe.loc;
        Value k = first.get(a);
        bool ok = true;
        for (Time t : ts) {
          const State& sig = s.at(t);
          if (sig.get(a) != k || !sig.can_write(a, p)) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        if (idle_holds(without(z, Location::address(a)), p, sp.right, ctx) &&
            eval_phase(sp.left, Value::addr(a), k))
          return true;
      }
    }
  }
  if (d.is_infinite() && eval_phase(d, std::nullopt, std::nullopt)) return true;
  return false;
}

/// Lock/Unlock: an idle prefix chopped with a single update-like phase on the
/// node's lck cell, whose previous value must be null (lock) or the locking
/// process (unlock).
bool latch_holds(Proc p, const std::vector<Location>& z, const Expr& node, bool acquire,
                 const Interval& d, EvalCtx& ctx) {
  const Stream& s = ctx.stream();
  Value mine = Value::proc(p);
  for (const ChopSplit& sp : chop_splits(d, s)) {
    if (sp.right.is_empty()) continue;
    if (!idle_holds(z, p, sp.left, ctx)) continue;
    std::vector<Time> ts = s.times(sp.right);
    if (ts.empty()) return true;  // beyond the window
    Value a;
    try {
      a = eval_expr(e_field_addr(node, Field::Lck), s.at(ts[0]));
    } catch (const Error&) {
      continue;
    }
    LocIdx lck = a.as_addr();
    Value held = acquire ? mine : Value::null();
    Value before = acquire ? Value::null() : mine;
    bool ok = true;
    for (Time t : ts) {
      const State& sig = s.at(t);
      if (sig.get(lck) != held || !sig.can_write(lck, p)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (ts[0] == 0 || s.at(ts[0] - 1).get(lck) != before) continue;
    if (!idle_holds(without(z, Location::address(lck)), p, sp.right, ctx)) continue;
    return true;
  }
  return false;
}

struct BehBuilder {
  IntvPred build(const Command& c, const std::vector<Proc>& procs, std::vector<Location> z) {
    if (c->kind == CommandNode::Kind::Par) return build_par(c->procs, z);

    switch (c->kind) {
      case CommandNode::Kind::Seq: {
        std::vector<IntvPred> parts;
        for (const auto& k : c->kids) parts.push_back(build(k, procs, z));
        return p_seq(std::move(parts));
      }
      case CommandNode::Kind::Choice: {
        std::vector<IntvPred> parts;
        for (const auto& k : c->kids) parts.push_back(build(k, procs, z));
        return p_any(std::move(parts));
      }
      case CommandNode::Kind::Omega:
        return p_omega(build(c->kids[0], procs, z));
      case CommandNode::Kind::Rely:
        return p_implies(c->pred, build(c->kids[0], procs, z));
      case CommandNode::Kind::Enf:
        return p_and(c->pred, build(c->kids[0], procs, z));
      case CommandNode::Kind::Spec:
        return c->pred;
      case CommandNode::Kind::Context: {
        std::vector<Location> wider = z;
        for (const Location& va : c->frame) {
          if (std::find(z.begin(), z.end(), va) != z.end())
            fail(Err::ContextClash, "context reuses location " + va.to_string());
          wider.push_back(va);
        }
        return build(c->kids[0], procs, wider);
      }
      case CommandNode::Kind::Idle: {
        std::vector<IntvPred> parts;
        for (Proc p : procs) parts.push_back(idle_pred(p, z));
        return p_all(std::move(parts));
      }
      default:
        break;
    }

    if (procs.size() != 1)
      fail(Err::ContextClash, "per-process command evaluated with " +
                                  std::to_string(procs.size()) + " processes: " + c->to_string());
    Proc p = procs[0];

    switch (c->kind) {
      case CommandNode::Kind::Guard:
        return p_and(pos_apparent(p, c->guard), idle_pred(p, z));
      case CommandNode::Kind::AtomicGuard:
        return p_and(sp_some(c->guard), idle_pred(p, z));
      case CommandNode::Kind::Labelled:
        return p_and(sp_all(pc_is(p, c->label)), build(c->kids[0], procs, z));
      case CommandNode::Kind::Assign: {
        Expr target = c->target, rhs = c->rhs;
        std::vector<Location> zz = z;
        return p_lift("assign[" + c->to_string() + "]@p" + std::to_string(p),
                      [p, zz, target, rhs](const Interval& d, EvalCtx& ctx) {
                        return assign_holds(p, zz, target, rhs, d, ctx);
                      });
      }
      case CommandNode::Kind::Lock:
      case CommandNode::Kind::Unlock: {
        bool acquire = c->kind == CommandNode::Kind::Lock;
        Expr node = c->target;
        std::vector<Location> zz = z;
        return p_lift(std::string(acquire ? "lock" : "unlock") + "[" + node->to_string() + "]@p" +
                          std::to_string(p),
                      [p, zz, node, acquire](const Interval& d, EvalCtx& ctx) {
                        return latch_holds(p, zz, node, acquire, d, ctx);
                      });
      }
      case CommandNode::Kind::NewNode: {
        // Loose behaviour: by the end of the phase the node variable points
        // at a fresh node holding (x, _, false, null).
        Expr n = c->target;
        Expr done = e_and(e_eq(e_field_val(n, Field::Val), c->rhs),
                          e_and(e_eq(e_field_val(n, Field::Mrk), e_bool(false)),
                                e_eq(e_field_val(n, Field::Lck), e_null())));
        return p_ne(sp_end(done));
      }
      default:
        fail(Err::TypeError, "behaviour undefined for " + c->to_string());
    }
  }

  IntvPred build_par(const std::vector<std::pair<Proc, Command>>& members,
                     const std::vector<Location>& z) {
    if (members.empty()) return p_true();
    if (members.size() == 1)
      return build(members[0].second, {members[0].first}, z);

    // existential split into two non-empty groups, each padded with finite or
    // infinite idling (at most one side idles forever)
    std::vector<IntvPred> cases;
    std::size_t n = members.size();
    for (std::size_t mask = 1; mask + 1 < (1u << n); ++mask) {
      std::vector<std::pair<Proc, Command>> g1, g2;
      for (std::size_t i = 0; i < n; ++i)
        (mask >> i & 1 ? g1 : g2).push_back(members[i]);
      for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2; ++s2) {
          if (s1 == 1 && s2 == 1) continue;  // not both infinite
          cases.push_back(p_and(padded(g1, z, s1 == 1), padded(g2, z, s2 == 1)));
        }
    }
    return p_any(std::move(cases));
  }

  IntvPred padded(const std::vector<std::pair<Proc, Command>>& group,
                  const std::vector<Location>& z, bool infinite) {
    IntvPred body = build_par(group, z);
    std::vector<IntvPred> idles;
    for (const auto& [p, cmd] : group) idles.push_back(idle_pred(p, z));
    IntvPred idle = p_all(std::move(idles));
    IntvPred pad = p_and(infinite ? p_inf() : p_fin(), idle);
    return p_chop(body, pad);
  }
};

}  // namespace

IntvPred beh(const Command& c, const std::vector<Proc>& procs, std::vector<Location> z) {
  BehBuilder b;
  return b.build(c, procs, std::move(z));
}

bool beh_check(const Command& c, const std::vector<Proc>& procs, std::vector<Location> z,
               const Interval& d, EvalCtx& ctx) {
  return eval(beh(c, procs, std::move(z)), d, ctx);
}

}  // namespace lsv
