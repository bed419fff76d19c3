#include "lsv/observe.hpp"

#include <algorithm>

namespace lsv {

bool holds_in(const Expr& c, const State& sigma) {
  try {
    return eval_expr(c, sigma).as_bool();
  } catch (const Error&) {
    return false;
  }
}

namespace {

std::vector<LocIdx> accessed_safe(const Expr& c, const State& sigma) {
  ReadRecorder rec;
  try {
    eval_expr(c, sigma, &rec);
  } catch (const Error&) {
    // keep the locations read before the failure
  }
  return rec.reads();
}

}  // namespace

IntvPred sp_all(Expr c) {
  return p_lift("all[" + c->to_string() + "]", [c](const Interval& d, EvalCtx& ctx) {
    for (Time t : ctx.stream().times(d))
      if (!holds_in(c, ctx.stream().at(t))) return false;
    return true;
  });
}

IntvPred sp_some(Expr c) {
  return p_lift("some[" + c->to_string() + "]", [c](const Interval& d, EvalCtx& ctx) {
    for (Time t : ctx.stream().times(d))
      if (holds_in(c, ctx.stream().at(t))) return true;
    return false;
  });
}

IntvPred sp_begin(Expr c) {
  return p_lift("begin[" + c->to_string() + "]", [c](const Interval& d, EvalCtx& ctx) {
    if (d.is_empty()) return false;
    Time t = d.glb();
    if (t > ctx.stream().horizon()) return true;  // outside the recorded window
    return holds_in(c, ctx.stream().at(t));
  });
}

IntvPred sp_end(Expr c) {
  return p_lift("end[" + c->to_string() + "]", [c](const Interval& d, EvalCtx& ctx) {
    if (d.is_empty()) return false;
    if (d.is_infinite()) return true;  // the constrained suffix lies beyond the window
    Time t = d.lub();
    if (t > ctx.stream().horizon()) return true;
    if (t < 0) return false;
    return holds_in(c, ctx.stream().at(t));
  });
}

IntvPred sp_stable(Location va) {
  return p_lift("stable[" + va.to_string() + "]", [va](const Interval& d, EvalCtx& ctx) {
    const Stream& s = ctx.stream();
    if (d.is_empty()) return !s.empty();
    Time before = d.glb() - 1;
    if (before < 0 || before > s.horizon()) return false;
    LocIdx i = s.at(before).universe().index_of(va);
    Value k = s.at(before).get(i);
    for (Time t : s.times(d))
      if (s.at(t).get(i) != k) return false;
    return true;
  });
}

IntvPred sp_inv(Expr c) { return p_implies(p_prev(sp_end(c)), sp_all(c)); }

IntvPred sf_all(std::string name, StateFn f) {
  return p_lift("all[" + name + "]", [f = std::move(f)](const Interval& d, EvalCtx& ctx) {
    for (Time t : ctx.stream().times(d))
      if (!f(ctx.stream().at(t))) return false;
    return true;
  });
}

IntvPred sf_some(std::string name, StateFn f) {
  return p_lift("some[" + name + "]", [f = std::move(f)](const Interval& d, EvalCtx& ctx) {
    for (Time t : ctx.stream().times(d))
      if (f(ctx.stream().at(t))) return true;
    return false;
  });
}

StateFn fn_write_perm(Location va, Proc p) {
  return [va, p](const State& sigma) { return sigma.can_write(sigma.universe().index_of(va), p); };
}

StateFn fn_read_perm(Location va, Proc p) {
  return [va, p](const State& sigma) { return sigma.can_read(sigma.universe().index_of(va), p); };
}

StateFn fn_interference(std::vector<Location> vas, Proc p) {
  return [vas = std::move(vas), p](const State& sigma) {
    std::vector<LocIdx> idxs;
    idxs.reserve(vas.size());
    for (const auto& va : vas) idxs.push_back(sigma.universe().index_of(va));
    return sigma.interfered(idxs, p);
  };
}

IntvPred no_write(Location va, Proc p) {
  return sf_all("noW " + va.to_string() + " p" + std::to_string(p),
                [va, p](const State& sigma) { return !sigma.can_write(sigma.universe().index_of(va), p); });
}

namespace {

bool apparent_eval(Proc p, const Expr& c, const Interval& d, EvalCtx& ctx, bool definite) {
  const Stream& s = ctx.stream();
  std::vector<Time> ts = s.times(d);

  // W: every location some actual state makes the expression touch.
  std::vector<LocIdx> w;
  for (Time t : ts)
    for (LocIdx i : accessed_safe(c, s.at(t)))
      if (std::find(w.begin(), w.end(), i) == w.end()) w.push_back(i);

  // Per location, the values observable with read permission, deduplicated.
  std::vector<std::vector<Value>> obs(w.size());
  std::size_t combos = 1;
  for (std::size_t j = 0; j < w.size(); ++j) {
    for (Time t : ts) {
      const State& sigma = s.at(t);
      Fraction f = sigma.perm(w[j], p);
      if (!(f > Fraction(0) && f < Fraction(1))) continue;
      Value v = sigma.get(w[j]);
      if (std::find(obs[j].begin(), obs[j].end(), v) == obs[j].end()) obs[j].push_back(v);
    }
    combos *= std::max<std::size_t>(obs[j].size(), 1);
    if (combos > kApparentCap)
      fail(Err::CapExceeded, "apparent state combinations exceed cap");
    // a location with no observable value stays unbound: only the
    // combinations that actually read it are skipped
  }

  std::shared_ptr<const LocationUniverse> uni =
      s.empty() ? std::make_shared<const LocationUniverse>(0) : s.at(0).universe_ptr();
  std::vector<std::size_t> pick(w.size(), 0);
  while (true) {
    PartialState sigma(uni);
    for (std::size_t j = 0; j < w.size(); ++j)
      if (!obs[j].empty()) sigma.bind(w[j], obs[j][pick[j]]);
    std::optional<bool> r;
    try {
      r = eval_expr(c, sigma).as_bool();
    } catch (const Error&) {
      // combination not evaluable over W; skip it
    }
    if (r.has_value()) {
      if (definite && !*r) return false;
      if (!definite && *r) return true;
    }
    std::size_t j = 0;
    for (; j < w.size(); ++j) {
      if (++pick[j] < obs[j].size()) break;
      pick[j] = 0;
    }
    if (j == w.size()) break;
  }
  return definite;
}

}  // namespace

bool def_apparent_holds(Proc p, const Expr& c, const Interval& d, EvalCtx& ctx) {
  return apparent_eval(p, c, d, ctx, true);
}

bool pos_apparent_holds(Proc p, const Expr& c, const Interval& d, EvalCtx& ctx) {
  return apparent_eval(p, c, d, ctx, false);
}

IntvPred def_apparent(Proc p, Expr c) {
  return p_lift("def_p" + std::to_string(p) + "[" + c->to_string() + "]",
                [p, c](const Interval& d, EvalCtx& ctx) { return apparent_eval(p, c, d, ctx, true); });
}

IntvPred pos_apparent(Proc p, Expr c) {
  return p_lift("pos_p" + std::to_string(p) + "[" + c->to_string() + "]",
                [p, c](const Interval& d, EvalCtx& ctx) { return apparent_eval(p, c, d, ctx, false); });
}

}  // namespace lsv
