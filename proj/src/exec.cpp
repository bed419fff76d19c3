#include "lsv/exec.hpp"

#include <algorithm>

namespace lsv {

bool Execution::all_completed() const {
  for (const auto& [p, ok] : completed)
    if (!ok) return false;
  return true;
}

Interval Execution::label_window(Proc p, const std::string& label) const {
  Time lo = 0, hi = -1;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (const StepInfo& si : steps[i]) {
      if (si.proc != p) continue;
      if (std::find(si.labels.begin(), si.labels.end(), label) == si.labels.end()) continue;
      Time t = static_cast<Time>(i) + 1;
      if (hi < 0) lo = t;
      hi = t;
    }
  }
  return hi < 0 ? Interval::empty() : Interval::bounded(lo, hi);
}

Time Execution::last_step(Proc p) const {
  Time last = 0;
  for (std::size_t i = 0; i < steps.size(); ++i)
    for (const StepInfo& si : steps[i])
      if (si.proc == p) last = static_cast<Time>(i) + 1;
  return last;
}

namespace {

struct Entry {
  enum class K { Run, PopLabel, Loop };
  K k;
  Command cmd;        // Run body; Loop body
  int left = 0;       // Loop iterations remaining
  std::string label;  // PopLabel
};
using Stack = std::vector<Entry>;  // back = top

Entry run(Command c) { return {Entry::K::Run, std::move(c), 0, {}}; }

bool stack_eq(const Stack& a, const Stack& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].k != b[i].k || a[i].cmd != b[i].cmd || a[i].left != b[i].left ||
        a[i].label != b[i].label)
      return false;
  return true;
}

/// Progress of a multi-step atomic command.
struct Atom {
  bool active = false;
  int phase = 0;  // assignment: 1 = value computed; allocation: next cell
  std::unordered_map<LocIdx, Value> cache;
  LocIdx pend_loc = 0;
  Value pend_val;
  std::uint32_t base = 0;  // node chosen by an in-progress allocation
};

struct Micro {
  std::vector<LocIdx> reads;    // R grants
  std::vector<LocIdx> touches;  // conflict participation without a grant
  std::vector<std::pair<LocIdx, Value>> writes;
  std::optional<std::uint32_t> alloc;
};

struct Option {
  Micro micro;
  Stack stack;
  Atom atom;
  bool forced = false;
  std::vector<std::string> labels;  // outermost first
  std::string note;
};

struct Resolution {
  bool finish_any = false;
  bool finish_unforced = false;
  std::vector<Option> options;
};

struct Rt {
  Proc p;
  Stack stack;
  Atom atom;
};

std::vector<std::string> labels_of(const Stack& st) {
  std::vector<std::string> out;
  for (const Entry& e : st)
    if (e.k == Entry::K::PopLabel) out.push_back(e.label);
  return out;
}

bool micro_eq(const Micro& a, const Micro& b) {
  return a.reads == b.reads && a.touches == b.touches && a.writes == b.writes &&
         a.alloc == b.alloc;
}

void add_option(Resolution& out, Option opt) {
  for (const Option& o : out.options)
    if (micro_eq(o.micro, opt.micro) && stack_eq(o.stack, opt.stack)) return;
  out.options.push_back(std::move(opt));
}

std::vector<LocIdx> merged_reads(const CachedView& view, std::optional<LocIdx> extra) {
  std::vector<LocIdx> r = view.local_reads();
  if (extra && std::find(r.begin(), r.end(), *extra) == r.end()) r.push_back(*extra);
  return r;
}

class Walker {
 public:
  Walker(const ExecutionConfig& cfg, const State& pre, Proc p,
         const std::vector<std::uint32_t>& free_nodes)
      : cfg_(cfg), pre_(pre), p_(p), free_nodes_(free_nodes) {}

  void resolve(Stack st, const Atom& atom, bool forced, Resolution& out) {
    while (!st.empty()) {
      Entry top = st.back();
      if (top.k == Entry::K::PopLabel) {
        st.pop_back();
        continue;
      }
      if (top.k == Entry::K::Loop) {
        Stack exit_st = st;
        exit_st.pop_back();
        if (top.left > 0) {
          Stack iter = st;
          iter.back().left -= 1;
          iter.push_back(run(top.cmd));
          // Exit before iterate: early-stopping searches then meet short
          // loop-free schedules first instead of exhausting retry subtrees.
          resolve(std::move(exit_st), atom, forced, out);
          resolve(std::move(iter), atom, forced, out);
        } else {
          resolve(std::move(exit_st), atom, true, out);
        }
        return;
      }
      const CommandNode& c = *top.cmd;
      switch (c.kind) {
        case CommandNode::Kind::Idle:
          st.pop_back();
          continue;
        case CommandNode::Kind::Seq: {
          Command whole = top.cmd;
          st.pop_back();
          for (auto it = whole->kids.rbegin(); it != whole->kids.rend(); ++it)
            st.push_back(run(*it));
          continue;
        }
        case CommandNode::Kind::Labelled: {
          Command whole = top.cmd;
          st.pop_back();
          st.push_back({Entry::K::PopLabel, nullptr, 0, whole->label});
          st.push_back(run(whole->kids[0]));
          continue;
        }
        case CommandNode::Kind::Context:
        case CommandNode::Kind::Rely:
        case CommandNode::Kind::Enf: {
          Command kid = top.cmd->kids[0];
          st.pop_back();
          st.push_back(run(kid));
          continue;
        }
        case CommandNode::Kind::Choice: {
          Command whole = top.cmd;
          st.pop_back();
          for (const Command& kid : whole->kids) {
            Stack branch = st;
            branch.push_back(run(kid));
            resolve(std::move(branch), atom, forced, out);
          }
          return;
        }
        case CommandNode::Kind::Omega: {
          Command body = top.cmd->kids[0];
          st.back() = {Entry::K::Loop, body, cfg_.omega_unroll, {}};
          continue;
        }
        case CommandNode::Kind::Par:
        case CommandNode::Kind::Spec:
          fail(Err::Usage, "command is not executable: " + c.to_string());
        default:
          atom_options(st, c, atom, forced, out);
          return;
      }
    }
    out.finish_any = true;
    if (!forced) out.finish_unforced = true;
  }

 private:
  void emit(Resolution& out, const Stack& st, bool complete, Atom atom, Micro micro, bool forced,
            std::string note) {
    Option opt;
    opt.labels = labels_of(st);
    opt.stack = st;
    if (complete) {
      opt.stack.pop_back();
      opt.atom = Atom{};
    } else {
      atom.active = true;
      opt.atom = std::move(atom);
    }
    opt.micro = std::move(micro);
    opt.forced = forced;
    opt.note = std::move(note);
    add_option(out, std::move(opt));
  }

  LocIdx target_index(const Expr& target, const Value& addr_val) const {
    if (target->kind == ExprNode::Kind::Loc) return pre_.universe().index_of(target->loc);
    return addr_val.as_addr();
  }

  void atom_options(const Stack& st, const CommandNode& c, const Atom& atom, bool forced,
                    Resolution& out) {
    bool per_loc = cfg_.granularity == Granularity::PerLocation;
    switch (c.kind) {
      case CommandNode::Kind::AtomicGuard: {
        ReadRecorder rec;
        Value v;
        try {
          v = eval_expr(c.guard, pre_, &rec);
        } catch (const Error&) {
          return;
        }
        if (!v.is_bool() || !v.as_bool()) return;
        Micro m;
        m.touches = rec.reads();
        emit(out, st, true, atom, std::move(m), forced, "<" + c.guard->to_string() + ">");
        return;
      }
      case CommandNode::Kind::Guard: {
        if (!per_loc) {
          ReadRecorder rec;
          Value v;
          try {
            v = eval_expr(c.guard, pre_, &rec);
          } catch (const Error&) {
            return;
          }
          if (!v.is_bool() || !v.as_bool()) return;
          Micro m;
          m.reads = rec.reads();
          emit(out, st, true, atom, std::move(m), forced, "[" + c.guard->to_string() + "]");
          return;
        }
        CachedView view(pre_, atom.cache, p_);
        try {
          Value v = eval_expr(c.guard, view);
          if (!v.is_bool() || !v.as_bool()) return;
          Micro m;
          m.reads = merged_reads(view, std::nullopt);
          emit(out, st, true, atom, std::move(m), forced, "[" + c.guard->to_string() + "] pass");
          return;
        } catch (const Error&) {
          if (!view.missing()) return;  // evaluation error: guard can never pass
          LocIdx need = *view.missing();
          Atom next = atom;
          next.cache[need] = pre_.get(need);
          Micro m;
          m.reads = merged_reads(view, need);
          emit(out, st, false, std::move(next), std::move(m), forced,
               "[" + c.guard->to_string() + "] read loc " + std::to_string(need));
          return;
        }
      }
      case CommandNode::Kind::Assign: {
        if (!per_loc) {
          ReadRecorder rec;
          Value addr_val, v;
          try {
            if (c.target->kind != ExprNode::Kind::Loc) addr_val = eval_expr(c.target, pre_, &rec);
            v = eval_expr(c.rhs, pre_, &rec);
          } catch (const Error&) {
            return;
          }
          LocIdx idx = target_index(c.target, addr_val);
          Micro m;
          for (LocIdx r : rec.reads())
            if (r != idx) m.reads.push_back(r);
          m.writes = {{idx, v}};
          emit(out, st, true, atom, std::move(m), forced, c.to_string());
          return;
        }
        if (atom.phase == 1) {
          // value computed; the write is its own step
          Micro m;
          m.writes = {{atom.pend_loc, atom.pend_val}};
          emit(out, st, true, atom, std::move(m), forced, c.to_string() + " write");
          return;
        }
        CachedView view(pre_, atom.cache, p_);
        try {
          Value addr_val;
          if (c.target->kind != ExprNode::Kind::Loc) addr_val = eval_expr(c.target, view);
          Value v = eval_expr(c.rhs, view);
          Atom next = atom;
          next.phase = 1;
          next.pend_loc = target_index(c.target, addr_val);
          next.pend_val = v;
          Micro m;
          m.reads = merged_reads(view, std::nullopt);
          emit(out, st, false, std::move(next), std::move(m), forced, c.to_string() + " eval");
          return;
        } catch (const Error&) {
          if (!view.missing()) return;
          LocIdx need = *view.missing();
          Atom next = atom;
          next.cache[need] = pre_.get(need);
          Micro m;
          m.reads = merged_reads(view, need);
          emit(out, st, false, std::move(next), std::move(m), forced,
               c.to_string() + " read loc " + std::to_string(need));
          return;
        }
      }
      case CommandNode::Kind::Lock:
      case CommandNode::Kind::Unlock: {
        bool acquire = c.kind == CommandNode::Kind::Lock;
        Value a;
        std::vector<LocIdx> local_reads;
        if (per_loc) {
          CachedView view(pre_, atom.cache, p_);
          try {
            a = eval_expr(e_field_addr(c.target, Field::Lck), view);
          } catch (const Error&) {
            if (view.missing()) {
              LocIdx need = *view.missing();
              Atom next = atom;
              next.cache[need] = pre_.get(need);
              Micro m;
              m.reads = merged_reads(view, need);
              emit(out, st, false, std::move(next), std::move(m), forced,
                   c.to_string() + " read loc " + std::to_string(need));
            }
            return;
          }
          local_reads = view.local_reads();
        } else {
          ReadRecorder rec;
          try {
            a = eval_expr(e_field_addr(c.target, Field::Lck), pre_, &rec);
          } catch (const Error&) {
            return;
          }
          local_reads = rec.reads();
        }
        LocIdx lck = a.as_addr();
        Value cur = pre_.get(lck);
        if (acquire ? !cur.is_null() : cur != Value::proc(p_)) return;
        Micro m;
        m.reads = local_reads;
        m.touches = {lck};
        m.writes = {{lck, acquire ? Value::proc(p_) : Value::null()}};
        emit(out, st, true, atom, std::move(m), forced, c.to_string());
        return;
      }
      case CommandNode::Kind::NewNode: {
        LocIdx var = pre_.universe().index_of(c.target->loc);
        if (!per_loc) {
          ReadRecorder rec;
          Value v;
          try {
            v = eval_expr(c.rhs, pre_, &rec);
          } catch (const Error&) {
            return;
          }
          if (free_nodes_.empty()) fail(Err::AllocExhausted, "no free nodes left");
          std::uint32_t base = free_nodes_.front();
          Micro m;
          m.reads = rec.reads();
          m.writes = {{base + field_offset(Field::Val), v},
                      {base + field_offset(Field::Nxt), Value::null()},
                      {base + field_offset(Field::Mrk), Value::boolean(false)},
                      {base + field_offset(Field::Lck), Value::null()},
                      {var, Value::addr(base)}};
          m.alloc = base;
          emit(out, st, true, atom, std::move(m), forced, c.to_string());
          return;
        }
        if (atom.phase == 0) {
          CachedView view(pre_, atom.cache, p_);
          try {
            Value v = eval_expr(c.rhs, view);
            if (free_nodes_.empty()) fail(Err::AllocExhausted, "no free nodes left");
            std::uint32_t base = free_nodes_.front();
            Atom next = atom;
            next.phase = 1;
            next.pend_val = v;
            next.base = base;
            Micro m;
            m.reads = merged_reads(view, std::nullopt);
            m.writes = {{base + field_offset(Field::Val), v}};
            m.alloc = base;
            emit(out, st, false, std::move(next), std::move(m), forced, c.to_string() + " val");
            return;
          } catch (const Error& err) {
            if (err.code() == Err::AllocExhausted) throw;
            if (!view.missing()) return;
            LocIdx need = *view.missing();
            Atom next = atom;
            next.cache[need] = pre_.get(need);
            Micro m;
            m.reads = merged_reads(view, need);
            emit(out, st, false, std::move(next), std::move(m), forced,
                 c.to_string() + " read loc " + std::to_string(need));
            return;
          }
        }
        // one field per step, the node variable last
        struct Cell {
          Field f;
          Value v;
          const char* tag;
        };
        const Cell cells[] = {{Field::Nxt, Value::null(), "nxt"},
                              {Field::Mrk, Value::boolean(false), "mrk"},
                              {Field::Lck, Value::null(), "lck"}};
        if (atom.phase <= 3) {
          const Cell& cell = cells[atom.phase - 1];
          Atom next = atom;
          next.phase += 1;
          Micro m;
          m.writes = {{atom.base + field_offset(cell.f), cell.v}};
          emit(out, st, false, std::move(next), std::move(m), forced,
               c.to_string() + std::string(" ") + cell.tag);
          return;
        }
        Micro m;
        m.writes = {{var, Value::addr(atom.base)}};
        emit(out, st, true, atom, std::move(m), forced, c.to_string() + " bind");
        return;
      }
      default:
        fail(Err::Usage, "not an atomic command: " + c.to_string());
    }
  }

  const ExecutionConfig& cfg_;
  const State& pre_;
  Proc p_;
  const std::vector<std::uint32_t>& free_nodes_;
};

bool conflicts(const Micro& a, const Micro& b) {
  auto touched = [](const Micro& m, LocIdx loc) {
    auto in = [loc](const std::vector<LocIdx>& v) {
      return std::find(v.begin(), v.end(), loc) != v.end();
    };
    if (in(m.reads) || in(m.touches)) return true;
    for (const auto& [l, v] : m.writes)
      if (l == loc) return true;
    return false;
  };
  for (const auto& [l, v] : a.writes)
    if (touched(b, l)) return true;
  for (const auto& [l, v] : b.writes)
    if (touched(a, l)) return true;
  return false;
}

/// Innermost label of the deterministic continuation prefix, used to keep the
/// ghost program counter pointing at the region about to run even while the
/// process is not scheduled.
std::optional<std::string> pending_label(const Stack& st) {
  std::optional<std::string> innermost;
  for (const Entry& e : st)
    if (e.k == Entry::K::PopLabel) innermost = e.label;
  if (st.empty()) return innermost;
  Command cur = st.back().k == Entry::K::Run ? st.back().cmd : nullptr;
  while (cur) {
    switch (cur->kind) {
      case CommandNode::Kind::Seq:
        cur = cur->kids[0];
        break;
      case CommandNode::Kind::Labelled:
        innermost = cur->label;
        cur = cur->kids[0];
        break;
      case CommandNode::Kind::Context:
      case CommandNode::Kind::Rely:
      case CommandNode::Kind::Enf:
        cur = cur->kids[0];
        break;
      default:
        cur = nullptr;
        break;
    }
  }
  return innermost;
}

class Search {
 public:
  Search(const ExecutionConfig& cfg, const std::function<bool(const Execution&)>& visit)
      : cfg_(cfg), visit_(visit) {}

  bool stopped() const { return stopped_; }

  void dfs(std::vector<State>& states, std::vector<Rt>& rts,
           std::vector<std::uint32_t>& free_nodes, std::vector<std::vector<StepInfo>>& steps,
           bool forced) {
    if (stopped_) return;

    std::vector<Resolution> res(rts.size());
    bool all_finish = true;
    bool finish_forced = forced;
    for (std::size_t i = 0; i < rts.size(); ++i) {
      Walker w(cfg_, states.back(), rts[i].p, free_nodes);
      w.resolve(rts[i].stack, rts[i].atom, false, res[i]);
      all_finish = all_finish && res[i].finish_any;
      if (res[i].finish_any && !res[i].finish_unforced) finish_forced = true;
    }

    if (all_finish) {
      emit(states, rts, steps, res, finish_forced ? Truncation::OmegaBound : Truncation::Complete);
      if (stopped_) return;
    }

    Time t = static_cast<Time>(states.size());
    bool any_options = false;
    for (const Resolution& r : res) any_options = any_options || !r.options.empty();

    if (t > cfg_.horizon || !any_options) {
      if (!all_finish)
        emit(states, rts, steps, res,
             t > cfg_.horizon ? Truncation::Horizon : Truncation::Stuck);
      return;
    }

    std::vector<std::size_t> movable;
    for (std::size_t i = 0; i < rts.size(); ++i)
      if (!res[i].options.empty()) movable.push_back(i);

    std::vector<int> choice(movable.size(), -1);  // -1 = idle this step
    pick(0, movable, choice, res, states, rts, free_nodes, steps, forced);
  }

 private:
  void pick(std::size_t k, const std::vector<std::size_t>& movable, std::vector<int>& choice,
            const std::vector<Resolution>& res, std::vector<State>& states, std::vector<Rt>& rts,
            std::vector<std::uint32_t>& free_nodes, std::vector<std::vector<StepInfo>>& steps,
            bool forced) {
    if (stopped_) return;
    if (k == movable.size()) {
      bool any = false;
      for (int c : choice) any = any || c >= 0;
      if (any) apply(movable, choice, res, states, rts, free_nodes, steps, forced);
      return;
    }
    // each step option, pairwise conflict-free with earlier picks; options
    // before idling, so the first leaf explored is the lockstep schedule and
    // early-stopping searches meet dense interleavings first
    const auto& opts = res[movable[k]].options;
    for (std::size_t oi = 0; oi < opts.size(); ++oi) {
      bool ok = true;
      for (std::size_t j = 0; j < k && ok; ++j)
        if (choice[j] >= 0)
          ok = !conflicts(opts[oi].micro, res[movable[j]].options[choice[j]].micro);
      if (!ok) continue;
      choice[k] = static_cast<int>(oi);
      pick(k + 1, movable, choice, res, states, rts, free_nodes, steps, forced);
    }
    // idle
    choice[k] = -1;
    pick(k + 1, movable, choice, res, states, rts, free_nodes, steps, forced);
  }

  void apply(const std::vector<std::size_t>& movable, const std::vector<int>& choice,
             const std::vector<Resolution>& res, std::vector<State>& states, std::vector<Rt>& rts,
             std::vector<std::uint32_t>& free_nodes, std::vector<std::vector<StepInfo>>& steps,
             bool forced) {
    State next = states.back();
    next.clear_perms();

    std::vector<Rt> next_rts = rts;
    std::vector<std::uint32_t> next_free = free_nodes;
    std::vector<StepInfo> infos;
    bool step_forced = forced;

    // per-location reader counts for the fraction policy
    std::vector<std::pair<LocIdx, int>> readers;
    auto add_reader = [&](LocIdx l) {
      for (auto& [loc, n] : readers)
        if (loc == l) {
          ++n;
          return;
        }
      readers.push_back({l, 1});
    };

    for (std::size_t k = 0; k < movable.size(); ++k) {
      if (choice[k] < 0) continue;
      const Rt& rt = rts[movable[k]];
      const Option& opt = res[movable[k]].options[static_cast<std::size_t>(choice[k])];
      for (const auto& [loc, v] : opt.micro.writes) next.set(loc, v);
      for (LocIdx l : opt.micro.reads) add_reader(l);
      if (opt.micro.alloc)
        next_free.erase(std::remove(next_free.begin(), next_free.end(), *opt.micro.alloc),
                        next_free.end());
      next_rts[movable[k]].stack = opt.stack;
      next_rts[movable[k]].atom = opt.atom;
      step_forced = step_forced || opt.forced;
      infos.push_back({rt.p, opt.note, opt.labels});
    }

    for (std::size_t k = 0; k < movable.size(); ++k) {
      if (choice[k] < 0) continue;
      Proc p = rts[movable[k]].p;
      const Option& opt = res[movable[k]].options[static_cast<std::size_t>(choice[k])];
      for (const auto& [loc, v] : opt.micro.writes) next.set_perm(loc, p, Fraction(1));
      for (LocIdx l : opt.micro.reads) {
        if (next.can_write(l, p)) continue;  // already the writer this step
        int r = 1;
        for (const auto& [loc, n] : readers)
          if (loc == l) r = n;
        next.set_perm(l, p, Fraction(1, r + 1));
      }
    }

    // ghost program counters track each process's pending region
    for (const Rt& rt : next_rts) {
      auto l = pending_label(rt.stack);
      if (!l) continue;
      auto idx = next.universe().try_var("pc", rt.p);
      if (idx) next.set(*idx, Value::integer(label_id(*l)));
    }

    states.push_back(std::move(next));
    steps.push_back(std::move(infos));
    std::vector<Rt> saved = rts;
    rts = std::move(next_rts);
    std::vector<std::uint32_t> saved_free = free_nodes;
    free_nodes = std::move(next_free);

    dfs(states, rts, free_nodes, steps, step_forced);

    states.pop_back();
    steps.pop_back();
    rts = std::move(saved);
    free_nodes = std::move(saved_free);
  }

  void emit(const std::vector<State>& states, const std::vector<Rt>& rts,
            const std::vector<std::vector<StepInfo>>& steps, const std::vector<Resolution>& res,
            Truncation trunc) {
    Execution ex;
    for (const State& s : states) ex.stream.push(s);
    Time T = static_cast<Time>(states.size()) - 1;
    ex.window = T >= 1 ? Interval::bounded(1, T) : Interval::empty();
    ex.truncation = trunc;
    ex.steps = steps;
    for (std::size_t i = 0; i < rts.size(); ++i) ex.completed[rts[i].p] = res[i].finish_any;
    ex.forced_exit = trunc == Truncation::OmegaBound;
    if (!visit_(ex)) stopped_ = true;
  }

  const ExecutionConfig& cfg_;
  const std::function<bool(const Execution&)>& visit_;
  bool stopped_ = false;
};

}  // namespace

bool enumerate_executions(const std::vector<ProcProgram>& progs, const State& init,
                          const ExecutionConfig& cfg,
                          const std::function<bool(const Execution&)>& visit) {
  std::vector<Rt> rts;
  for (const ProcProgram& pp : progs) rts.push_back({pp.proc, {run(pp.cmd)}, Atom{}});
  std::vector<State> states = {init};
  std::vector<std::uint32_t> free_nodes = cfg.free_nodes;
  std::vector<std::vector<StepInfo>> steps;
  Search search(cfg, visit);
  search.dfs(states, rts, free_nodes, steps, false);
  return !search.stopped();
}

RefineVerdict refines(const Command& abst, const std::vector<Proc>& procs,
                      std::vector<Location> y, const std::vector<ProcProgram>& concrete,
                      const State& init, const ExecutionConfig& cfg, EvalOptions opts) {
  RefineVerdict verdict;
  bool bounded = false;
  enumerate_executions(concrete, init, cfg, [&](const Execution& ex) {
    ++verdict.cases;
    if (ex.truncation == Truncation::Stuck) return true;  // infeasible branch
    if (ex.truncation != Truncation::Complete) {
      bounded = true;
      return true;
    }
    EvalCtx ctx(ex.stream, opts);
    if (!beh_check(abst, procs, y, ex.window, ctx)) {
      verdict.status = Status::Counterexample;
      verdict.witness = ex;
      return false;
    }
    return true;
  });
  if (verdict.status != Status::Counterexample && bounded) verdict.status = Status::BoundedHolds;
  return verdict;
}

}  // namespace lsv
