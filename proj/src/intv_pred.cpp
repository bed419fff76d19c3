#include "lsv/intv_pred.hpp"

#include <atomic>

namespace lsv {

namespace {

std::uint64_t next_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

IntvPred mk(PredNode::Kind kind, std::string name, std::vector<IntvPred> kids,
            std::function<bool(const Interval&, EvalCtx&)> fn = nullptr) {
  auto n = std::make_shared<PredNode>();
  n->kind = kind;
  n->id = next_id();
  n->name = std::move(name);
  n->kids = std::move(kids);
  n->fn = std::move(fn);
  return n;
}

std::vector<ChopSplit> splits_of(const Interval& d, const Stream& s, bool skip_empty_sides) {
  std::vector<ChopSplit> out;
  if (d.is_empty()) {
    if (!skip_empty_sides) out.push_back({Interval::empty(), Interval::empty()});
    return out;
  }
  Time lo = d.glb();
  if (d.is_bounded()) {
    Time hi = d.lub();
    for (Time k = lo - 1; k <= hi; ++k) {
      Interval l = (k < lo) ? Interval::empty() : Interval::bounded(lo, k);
      Interval r = (k == hi) ? Interval::empty() : Interval::bounded(k + 1, hi);
      if (skip_empty_sides && (l.is_empty() || r.is_empty())) continue;
      out.push_back({l, r});
    }
  } else {
    if (!skip_empty_sides) out.push_back({Interval::empty(), d});
    Time hi = std::max<Time>(s.horizon(), lo);
    for (Time k = lo; k <= hi; ++k)
      out.push_back({Interval::bounded(lo, k), Interval::open_right(k + 1)});
  }
  return out;
}

}  // namespace

std::vector<ChopSplit> chop_splits(const Interval& d, const Stream& s) {
  return splits_of(d, s, false);
}

std::vector<Interval> subintervals(const Interval& d, const Stream& s) {
  std::vector<Interval> out;
  out.push_back(Interval::empty());
  if (d.is_empty()) return out;
  Time lo = std::max<Time>(d.glb(), 0);
  Time hi = d.is_infinite() ? s.horizon() : std::min<Time>(d.lub(), s.horizon());
  for (Time a = lo; a <= hi; ++a)
    for (Time b = a; b <= hi; ++b) out.push_back(Interval::bounded(a, b));
  if (d.is_infinite())
    for (Time a = lo; a <= hi + 1; ++a) out.push_back(Interval::open_right(a));
  return out;
}

std::vector<Interval> window_intervals(const Stream& s) {
  std::vector<Interval> out = subintervals(s.whole(), s);
  for (Time a = 0; a <= s.horizon() + 1; ++a) out.push_back(Interval::open_right(a));
  return out;
}

bool eval(const IntvPred& g, const Interval& d, EvalCtx& ctx) {
  std::uint64_t key = (g->id << 32) | d.key();
  if (auto it = ctx.memo_.find(key); it != ctx.memo_.end()) return it->second;
  // A revisit while computing can only happen through omega; the greatest
  // fixpoint resolves the cycle to true.
  if (ctx.busy_.count(key)) return true;
  ctx.busy_.insert(key);

  bool r = false;
  switch (g->kind) {
    case PredNode::Kind::Lift:
      r = g->fn(d, ctx);
      break;
    case PredNode::Kind::EmptyP:
      r = d.is_empty();
      break;
    case PredNode::Kind::Not:
      r = !eval(g->kids[0], d, ctx);
      break;
    case PredNode::Kind::And:
      r = true;
      for (const auto& k : g->kids)
        if (!eval(k, d, ctx)) {
          r = false;
          break;
        }
      break;
    case PredNode::Kind::Or:
      r = false;
      for (const auto& k : g->kids)
        if (eval(k, d, ctx)) {
          r = true;
          break;
        }
      break;
    case PredNode::Kind::Implies:
      r = !eval(g->kids[0], d, ctx) || eval(g->kids[1], d, ctx);
      break;
    case PredNode::Kind::Chop: {
      for (const ChopSplit& sp : splits_of(d, ctx.stream(), ctx.options().buggy_chop)) {
        if (eval(g->kids[0], sp.left, ctx) && eval(g->kids[1], sp.right, ctx)) {
          r = true;
          break;
        }
      }
      if (!r && d.is_infinite()) r = eval(g->kids[0], d, ctx);
      break;
    }
    case PredNode::Kind::Omega: {
      if (d.is_empty()) {
        r = !ctx.options().buggy_omega;
        break;
      }
      for (const ChopSplit& sp : splits_of(d, ctx.stream(), ctx.options().buggy_chop)) {
        if (eval(g->kids[0], sp.left, ctx) && eval(g, sp.right, ctx)) {
          r = true;
          break;
        }
      }
      if (!r && d.is_infinite()) r = eval(g->kids[0], d, ctx);
      break;
    }
    case PredNode::Kind::Box: {
      r = true;
      for (const Interval& sub : subintervals(d, ctx.stream()))
        if (!eval(g->kids[0], sub, ctx)) {
          r = false;
          break;
        }
      break;
    }
    case PredNode::Kind::Diamond: {
      r = false;
      for (const Interval& sub : subintervals(d, ctx.stream()))
        if (eval(g->kids[0], sub, ctx)) {
          r = true;
          break;
        }
      break;
    }
    case PredNode::Kind::Prev: {
      if (d.is_empty()) {
        // every interval adjoins the empty interval
        for (const Interval& cand : window_intervals(ctx.stream()))
          if (eval(g->kids[0], cand, ctx)) {
            r = true;
            break;
          }
      } else {
        r = eval(g->kids[0], Interval::empty(), ctx);
        Time lo = d.glb();
        for (Time t0 = 0; !r && t0 < lo; ++t0)
          r = eval(g->kids[0], Interval::bounded(t0, lo - 1), ctx);
      }
      break;
    }
  }

  ctx.busy_.erase(key);
  ctx.memo_.emplace(key, r);
  return r;
}

IntvPred p_lift(std::string name, std::function<bool(const Interval&, EvalCtx&)> fn) {
  return mk(PredNode::Kind::Lift, std::move(name), {}, std::move(fn));
}
IntvPred p_true() {
  static IntvPred t = p_lift("true", [](const Interval&, EvalCtx&) { return true; });
  return t;
}
IntvPred p_false() {
  static IntvPred f = p_lift("false", [](const Interval&, EvalCtx&) { return false; });
  return f;
}
IntvPred p_empty() {
  static IntvPred e = mk(PredNode::Kind::EmptyP, "empty", {});
  return e;
}
IntvPred p_not(IntvPred g) { return mk(PredNode::Kind::Not, "not", {std::move(g)}); }
IntvPred p_and(IntvPred a, IntvPred b) {
  return mk(PredNode::Kind::And, "and", {std::move(a), std::move(b)});
}
IntvPred p_or(IntvPred a, IntvPred b) {
  return mk(PredNode::Kind::Or, "or", {std::move(a), std::move(b)});
}
IntvPred p_implies(IntvPred a, IntvPred b) {
  return mk(PredNode::Kind::Implies, "implies", {std::move(a), std::move(b)});
}
IntvPred p_all(std::vector<IntvPred> gs) {
  if (gs.empty()) return p_true();
  if (gs.size() == 1) return gs[0];
  return mk(PredNode::Kind::And, "and", std::move(gs));
}
IntvPred p_any(std::vector<IntvPred> gs) {
  if (gs.empty()) return p_false();
  if (gs.size() == 1) return gs[0];
  return mk(PredNode::Kind::Or, "or", std::move(gs));
}
IntvPred p_chop(IntvPred a, IntvPred b) {
  return mk(PredNode::Kind::Chop, "chop", {std::move(a), std::move(b)});
}
IntvPred p_seq(std::vector<IntvPred> gs) {
  if (gs.empty()) return p_empty();
  IntvPred acc = gs.back();
  for (auto it = gs.rbegin() + 1; it != gs.rend(); ++it) acc = p_chop(*it, acc);
  return acc;
}
IntvPred p_omega(IntvPred g) { return mk(PredNode::Kind::Omega, "omega", {std::move(g)}); }
IntvPred p_box(IntvPred g) { return mk(PredNode::Kind::Box, "box", {std::move(g)}); }
IntvPred p_diamond(IntvPred g) { return mk(PredNode::Kind::Diamond, "diamond", {std::move(g)}); }
IntvPred p_prev(IntvPred g) { return mk(PredNode::Kind::Prev, "prev", {std::move(g)}); }
IntvPred p_ne(IntvPred g) { return p_and(p_not(p_empty()), std::move(g)); }

std::optional<Interval> entails_on(const IntvPred& g1, const IntvPred& g2,
                                   const std::vector<Interval>& ds, EvalCtx& ctx) {
  for (const Interval& d : ds)
    if (eval(g1, d, ctx) && !eval(g2, d, ctx)) return d;
  return std::nullopt;
}

std::string to_string(const IntvPred& g) {
  if (g->kids.empty()) return g->name;
  std::string out = g->name + "(";
  for (std::size_t i = 0; i < g->kids.size(); ++i) {
    if (i) out += ", ";
    out += to_string(g->kids[i]);
  }
  return out + ")";
}

}  // namespace lsv
