#include "lsv/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "lsv/error.hpp"

namespace lsv::rt {

const char* op_name(Op op) {
  switch (op) {
    case Op::Add: return "add";
    case Op::Remove: return "remove";
    case Op::Contains: return "contains";
  }
  return "?";
}

namespace {

Op op_from_name(const std::string& s) {
  if (s == "add") return Op::Add;
  if (s == "remove") return Op::Remove;
  if (s == "contains") return Op::Contains;
  fail(Err::MalformedHistory, "unknown op: " + s);
}

/// One operation reassembled from its events. res_idx is empty for pending
/// invocations.
struct OpRec {
  Op op;
  std::int64_t arg;
  std::optional<bool> ret;
  int proc;
  std::size_t inv_idx;
  std::optional<std::size_t> res_idx;
};

/// Validates the HistoryEvent invariants and pairs events into operations.
std::vector<OpRec> collect_ops(const History& h) {
  std::vector<OpRec> ops;
  std::map<int, std::size_t> open;  // proc -> index into ops
  std::uint64_t prev_seq = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const HistoryEvent& e = h[i];
    if (i > 0 && e.seq <= prev_seq)
      fail(Err::MalformedHistory, "seq stamps not strictly increasing at event " +
                                      std::to_string(i));
    prev_seq = e.seq;
    auto it = open.find(e.proc);
    if (e.invoke) {
      if (e.ret) fail(Err::MalformedHistory, "invocation carries a return value");
      if (it != open.end())
        fail(Err::MalformedHistory,
             "proc " + std::to_string(e.proc) + " invokes with an open operation");
      open[e.proc] = ops.size();
      ops.push_back({e.op, e.arg, std::nullopt, e.proc, i, std::nullopt});
    } else {
      if (!e.ret) fail(Err::MalformedHistory, "response without a return value");
      if (it == open.end())
        fail(Err::MalformedHistory,
             "proc " + std::to_string(e.proc) + " responds without an invocation");
      OpRec& o = ops[it->second];
      if (o.op != e.op || o.arg != e.arg)
        fail(Err::MalformedHistory, "response does not match the open invocation");
      o.ret = e.ret;
      o.res_idx = i;
      open.erase(it);
    }
  }
  return ops;
}

}  // namespace

// ---------------------------------------------------------------------------
// history serialisation

std::string history_to_jsonl(const History& h) {
  std::string out;
  for (const HistoryEvent& e : h) {
    Json j{{"kind", e.invoke ? "invoke" : "respond"},
           {"op", op_name(e.op)},
           {"arg", e.arg},
           {"proc", e.proc},
           {"seq", e.seq}};
    if (e.ret) j["ret"] = *e.ret;
    out += j.dump();
    out += '\n';
  }
  return out;
}

History history_from_jsonl(const std::string& text) {
  History h;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      fail(Err::MalformedHistory, "unparseable history line: " + line);
    HistoryEvent e;
    try {
      std::string kind = j.at("kind").get<std::string>();
      if (kind != "invoke" && kind != "respond")
        fail(Err::MalformedHistory, "unknown event kind: " + kind);
      e.invoke = kind == "invoke";
      e.op = op_from_name(j.at("op").get<std::string>());
      e.arg = j.at("arg").get<std::int64_t>();
      e.proc = j.at("proc").get<int>();
      e.seq = j.at("seq").get<std::uint64_t>();
      if (j.contains("ret")) e.ret = j.at("ret").get<bool>();
    } catch (const Json::exception& ex) {
      fail(Err::MalformedHistory, std::string("bad history line: ") + ex.what());
    }
    h.push_back(e);
  }
  collect_ops(h);  // reject ill-formed pairings up front
  return h;
}

// ---------------------------------------------------------------------------
// the abstract set

bool SequentialSet::add(std::int64_t x) {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), x);
  if (it != keys_.end() && *it == x) return false;
  keys_.insert(it, x);
  return true;
}

bool SequentialSet::remove(std::int64_t x) {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), x);
  if (it == keys_.end() || *it != x) return false;
  keys_.erase(it);
  return true;
}

bool SequentialSet::contains(std::int64_t x) const {
  return std::binary_search(keys_.begin(), keys_.end(), x);
}

std::vector<std::int64_t> SequentialSet::values() const { return keys_; }

bool SequentialSet::apply(Op op, std::int64_t x) {
  switch (op) {
    case Op::Add: return add(x);
    case Op::Remove: return remove(x);
    case Op::Contains: return contains(x);
  }
  return false;
}

// ---------------------------------------------------------------------------
// the runtime list

namespace {

struct RtNode {
  std::int64_t val;
  std::atomic<RtNode*> nxt;
  std::atomic<bool> mrk{false};
  std::mutex lck;
  RtNode(std::int64_t v, RtNode* n) : val(v), nxt(n) {}
};

}  // namespace

struct LazySetImpl {
  RtNode* head;
  RtNode* tail;
  RtMutant mutant;
  std::atomic<std::uint64_t> unmarked_unlinks{0};
  std::mutex alloc_mu;
  std::vector<RtNode*> all;  // every node ever allocated; freed at destruction

  RtNode* make(std::int64_t v, RtNode* n) {
    RtNode* node = new RtNode(v, n);
    std::lock_guard<std::mutex> g(alloc_mu);
    all.push_back(node);
    return node;
  }

  /// Fig-style locate: unlocked search, lock pred then curr (list order, so
  /// deadlock free), revalidate, retry on failure.
  RtNode* locate(std::int64_t x, RtNode*& pred) {
    while (true) {
      pred = head;
      RtNode* curr = pred->nxt.load(std::memory_order_acquire);
      while (curr->val < x) {
        pred = curr;
        curr = curr->nxt.load(std::memory_order_acquire);
      }
      if (mutant == RtMutant::NoValidate) std::this_thread::yield();
      pred->lck.lock();
      curr->lck.lock();
      if (mutant == RtMutant::NoValidate) return curr;
      if (!pred->mrk.load(std::memory_order_acquire) &&
          !curr->mrk.load(std::memory_order_acquire) &&
          pred->nxt.load(std::memory_order_acquire) == curr)
        return curr;
      curr->lck.unlock();
      pred->lck.unlock();
    }
  }
};

LazySet::LazySet(RtMutant mutant) : impl_(std::make_unique<LazySetImpl>()) {
  impl_->mutant = mutant;
  impl_->tail = impl_->make(std::numeric_limits<std::int64_t>::max(), nullptr);
  impl_->head = impl_->make(std::numeric_limits<std::int64_t>::min(), impl_->tail);
}

LazySet::~LazySet() {
  for (RtNode* n : impl_->all) delete n;
}

bool LazySet::add(std::int64_t x) {
  RtNode* pred;
  RtNode* curr = impl_->locate(x, pred);
  bool res = false;
  if (curr->val != x) {
    if (impl_->mutant == RtMutant::SwapLink) {
      // publish before wiring nxt; the dangling link points at Tail so the
      // fault shows as lost suffixes rather than a crash
      RtNode* n = impl_->make(x, impl_->tail);
      pred->nxt.store(n, std::memory_order_release);
      std::this_thread::yield();
      n->nxt.store(curr, std::memory_order_release);
    } else {
      RtNode* n = impl_->make(x, curr);  // nxt wired first
      pred->nxt.store(n, std::memory_order_release);
    }
    res = true;
  }
  curr->lck.unlock();
  pred->lck.unlock();
  return res;
}

bool LazySet::remove(std::int64_t x) {
  RtNode* pred;
  RtNode* curr = impl_->locate(x, pred);
  bool res = false;
  if (curr->val == x) {
    if (impl_->mutant == RtMutant::SkipMark)
      std::this_thread::yield();
    else
      curr->mrk.store(true, std::memory_order_release);
    if (!curr->mrk.load(std::memory_order_acquire))
      impl_->unmarked_unlinks.fetch_add(1, std::memory_order_relaxed);
    pred->nxt.store(curr->nxt.load(std::memory_order_acquire),
                    std::memory_order_release);
    res = true;
  }
  curr->lck.unlock();
  pred->lck.unlock();
  return res;
}

bool LazySet::contains(std::int64_t x) const {
  RtNode* curr = impl_->head;
  while (curr->val < x) curr = curr->nxt.load(std::memory_order_acquire);
  return curr->val == x && !curr->mrk.load(std::memory_order_acquire);
}

std::vector<std::int64_t> LazySet::snapshot() const {
  std::vector<std::int64_t> out;
  for (RtNode* n = impl_->head->nxt.load(); n != impl_->tail; n = n->nxt.load())
    if (!n->mrk.load()) out.push_back(n->val);
  return out;
}

bool LazySet::sorted() const {
  for (RtNode* n = impl_->head; n != impl_->tail; n = n->nxt.load())
    if (n->nxt.load()->val <= n->val) return false;
  return true;
}

std::uint64_t LazySet::unmarked_unlinks() const {
  return impl_->unmarked_unlinks.load();
}

// ---------------------------------------------------------------------------
// recording

RunResult record_run(const RunConfig& cfg, int phases) {
  if (cfg.threads < 1 || phases < 1) fail(Err::Usage, "threads and phases must be positive");
  LazySet set(cfg.mutant);
  std::atomic<std::uint64_t> stamp{0};
  std::vector<History> bufs(static_cast<std::size_t>(cfg.threads));
  std::vector<std::mt19937_64> rngs;
  for (int t = 0; t < cfg.threads; ++t)
    rngs.emplace_back(cfg.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(t));

  RunResult out;
  std::uint64_t done = 0;
  for (int ph = 0; ph < phases; ++ph) {
    std::uint64_t upto = cfg.ops_per_thread * (ph + 1) / phases;
    std::uint64_t n = upto - done;
    done = upto;
    std::vector<std::thread> workers;
    for (int t = 0; t < cfg.threads; ++t)
      workers.emplace_back([&, t] {
        std::mt19937_64& rng = rngs[static_cast<std::size_t>(t)];
        History& buf = bufs[static_cast<std::size_t>(t)];
        for (std::uint64_t i = 0; i < n; ++i) {
          Op op = static_cast<Op>(rng() % 3);
          std::int64_t x = 1 + static_cast<std::int64_t>(rng() % cfg.keys);
          buf.push_back({true, op, x, std::nullopt, t, stamp.fetch_add(1) + 1});
          bool r = op == Op::Add      ? set.add(x)
                   : op == Op::Remove ? set.remove(x)
                                      : set.contains(x);
          buf.push_back({false, op, x, r, t, stamp.fetch_add(1) + 1});
        }
      });
    for (std::thread& w : workers) w.join();
    out.sorted_ok = out.sorted_ok && set.sorted();
  }

  for (const History& b : bufs) out.history.insert(out.history.end(), b.begin(), b.end());
  std::sort(out.history.begin(), out.history.end(),
            [](const HistoryEvent& a, const HistoryEvent& b) { return a.seq < b.seq; });
  out.unmarked_unlinks = set.unmarked_unlinks();
  out.final_values = set.snapshot();
  return out;
}

// ---------------------------------------------------------------------------
// linearisability checking

std::string witness_to_string(const std::vector<SeqOp>& w) {
  std::string out;
  for (const SeqOp& o : w) {
    if (!out.empty()) out += "; ";
    out += std::string(op_name(o.op)) + "(" + std::to_string(o.arg) + ")";
    if (o.ret) out += *o.ret ? ":true" : ":false";
  }
  return out;
}

Json LinResult::to_json() const {
  Json j{{"linearisable", linearisable}};
  if (linearisable) {
    Json w = Json::array();
    for (const SeqOp& o : witness)
      w.push_back(Json{{"op", op_name(o.op)},
                       {"arg", o.arg},
                       {"ret", o.ret ? Json(*o.ret) : Json(nullptr)},
                       {"proc", o.proc}});
    j["witness"] = w;
  } else {
    j["failing_prefix"] = failing_prefix;
    j["window"] = Json{{"first_seq", window_first_seq}, {"last_seq", window_last_seq}};
  }
  return j;
}

namespace {

struct Ev {
  bool invoke;
  std::uint32_t op;
};

/// Wing-Gong search over one window. The scan walks events in stamp order;
/// each operation must take effect between its invocation and its response,
/// so a response of a not-yet-applied operation forces a choice among the
/// open ones. Pending operations may apply late or never. Explored
/// configurations (position, open-unapplied set, abstract set) are memoised.
/// Choices try the earliest invocation first, so the witness found is the
/// invocation-ordered one when that is valid.
struct WgFinal {
  std::vector<std::int64_t> set;       // abstract set after the window
  std::vector<std::uint32_t> witness;  // one linearisation reaching it
};

bool wg_solve(const std::vector<Ev>& evs, const std::vector<OpRec>& ops,
              const std::vector<std::int64_t>& init_set,
              std::vector<std::uint32_t>* witness_out,
              std::vector<WgFinal>* all_finals = nullptr) {
  struct Cfg {
    std::size_t pos = 0;
    std::vector<std::uint32_t> unlin;  // invoked, not yet applied; invoke order
    std::vector<std::int64_t> set;     // sorted
  };
  auto closure = [&](Cfg& c) {
    while (c.pos < evs.size()) {
      const Ev& e = evs[c.pos];
      if (e.invoke) {
        c.unlin.push_back(e.op);
      } else if (std::find(c.unlin.begin(), c.unlin.end(), e.op) != c.unlin.end()) {
        return;  // forced: e.op must apply before its response passes
      }
      ++c.pos;
    }
  };
  auto key = [](const Cfg& c) {
    std::string k;
    k.reserve(8 + c.unlin.size() * 4 + c.set.size() * 8);
    auto put = [&k](const void* p, std::size_t n) {
      k.append(static_cast<const char*>(p), n);
    };
    std::uint64_t pos = c.pos;
    put(&pos, 8);
    for (std::uint32_t o : c.unlin) put(&o, 4);
    k += '|';
    for (std::int64_t v : c.set) put(&v, 8);
    return k;
  };
  auto apply = [](std::vector<std::int64_t>& set, Op op, std::int64_t x) {
    auto it = std::lower_bound(set.begin(), set.end(), x);
    bool present = it != set.end() && *it == x;
    if (op == Op::Add && !present) set.insert(it, x);
    if (op == Op::Remove && present) set.erase(it);
    return op == Op::Add ? !present : present;
  };

  struct Frame {
    Cfg cfg;
    std::size_t next_choice = 0;
    std::uint32_t chose = 0;  // op applied to reach this frame (root unused)
  };
  std::unordered_set<std::string> seen;
  std::vector<Frame> stack;
  Cfg root;
  root.set = init_set;
  closure(root);
  seen.insert(key(root));
  stack.push_back({std::move(root), 0, 0});

  bool any = false;
  auto current_witness = [&stack] {
    std::vector<std::uint32_t> w;
    for (std::size_t i = 1; i < stack.size(); ++i) w.push_back(stack[i].chose);
    return w;
  };
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.cfg.pos == evs.size() && f.next_choice == 0) {
      any = true;
      if (!all_finals) {
        if (witness_out) *witness_out = current_witness();
        return true;
      }
      bool fresh = true;
      for (const WgFinal& fin : *all_finals) fresh = fresh && fin.set != f.cfg.set;
      if (fresh) all_finals->push_back({f.cfg.set, current_witness()});
      // keep exploring: later terminals may reach other abstract sets by
      // linearising leftover pending operations differently
    }
    bool pushed = false;
    while (f.next_choice < f.cfg.unlin.size()) {
      std::uint32_t z = f.cfg.unlin[f.next_choice++];
      Cfg next = f.cfg;
      next.unlin.erase(std::find(next.unlin.begin(), next.unlin.end(), z));
      bool r = apply(next.set, ops[z].op, ops[z].arg);
      if (ops[z].ret && *ops[z].ret != r) continue;  // recorded return refuted
      closure(next);
      if (!seen.insert(key(next)).second) continue;
      stack.push_back({std::move(next), 0, z});
      pushed = true;
      break;
    }
    if (!pushed) stack.pop_back();
  }
  return any;
}

std::vector<Ev> events_of(const History& h, const std::vector<OpRec>& ops) {
  std::vector<Ev> evs(h.size());
  for (std::uint32_t o = 0; o < ops.size(); ++o) {
    evs[ops[o].inv_idx] = {true, o};
    if (ops[o].res_idx) evs[*ops[o].res_idx] = {false, o};
  }
  return evs;
}

/// Smallest event-prefix of the window failing from every given start set.
/// Failure is monotone under extension, so bisect.
std::size_t minimal_failing_prefix(const History& h,
                                   const std::vector<std::vector<std::int64_t>>& inits) {
  auto fails = [&](std::size_t len) {
    History pre(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(len));
    std::vector<OpRec> pops = collect_ops(pre);
    std::vector<Ev> evs = events_of(pre, pops);
    for (const auto& init : inits)
      if (wg_solve(evs, pops, init, nullptr)) return false;
    return true;
  };
  std::size_t lo = 1, hi = h.size();
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (fails(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

LinResult check_window(const History& h, const CheckConfig& cfg,
                       const std::vector<std::int64_t>& init) {
  std::vector<OpRec> ops = collect_ops(h);
  if (ops.size() > cfg.max_ops)
    fail(Err::CapExceeded, "window has " + std::to_string(ops.size()) +
                               " operations, cap is " + std::to_string(cfg.max_ops));
  LinResult r;
  r.window_first_seq = h.empty() ? 0 : h.front().seq;
  r.window_last_seq = h.empty() ? 0 : h.back().seq;
  std::vector<std::uint32_t> wit;
  if (wg_solve(events_of(h, ops), ops, init, &wit)) {
    for (std::uint32_t o : wit)
      r.witness.push_back({ops[o].op, ops[o].arg, ops[o].ret, ops[o].proc});
    return r;
  }
  r.linearisable = false;
  r.failing_prefix = minimal_failing_prefix(h, {init});
  return r;
}

}  // namespace

LinResult check_linearisable(const History& h, const CheckConfig& cfg) {
  return check_window(h, cfg, {});
}

namespace {

/// Exact but slow: threads every reachable abstract set across the quiescent
/// cuts. Used only when the fast single-path pass reports a failure.
LinResult check_windows_exhaustive(const History& h, const CheckConfig& cfg) {
  LinResult all;
  all.window_first_seq = h.empty() ? 0 : h.front().seq;
  all.window_last_seq = h.empty() ? 0 : h.back().seq;
  // The abstract state at a quiescent cut depends on which witness the
  // previous windows took, so thread every reachable set forward with one
  // representative witness each.
  struct Thread {
    std::vector<std::int64_t> set;
    std::vector<SeqOp> witness;
  };
  std::vector<Thread> frontier{{{}, {}}};
  std::size_t begin = 0;
  int open = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    open += h[i].invoke ? 1 : -1;
    if (open != 0 && i + 1 < h.size()) continue;
    // quiescent point (or trailing pending ops at the end): close the window
    History win(h.begin() + static_cast<std::ptrdiff_t>(begin),
                h.begin() + static_cast<std::ptrdiff_t>(i + 1));
    std::vector<OpRec> ops = collect_ops(win);
    if (ops.size() > cfg.max_ops)
      fail(Err::CapExceeded, "window has " + std::to_string(ops.size()) +
                                 " operations, cap is " + std::to_string(cfg.max_ops));
    std::vector<Ev> evs = events_of(win, ops);
    std::vector<Thread> next;
    for (const Thread& from : frontier) {
      std::vector<WgFinal> finals;
      wg_solve(evs, ops, from.set, nullptr, &finals);
      for (WgFinal& fin : finals) {
        bool fresh = true;
        for (const Thread& n : next) fresh = fresh && n.set != fin.set;
        if (!fresh) continue;
        Thread n{std::move(fin.set), from.witness};
        for (std::uint32_t o : fin.witness)
          n.witness.push_back({ops[o].op, ops[o].arg, ops[o].ret, ops[o].proc});
        next.push_back(std::move(n));
      }
    }
    if (next.empty()) {
      LinResult r;
      r.linearisable = false;
      r.window_first_seq = win.front().seq;
      r.window_last_seq = win.back().seq;
      std::vector<std::vector<std::int64_t>> inits;
      for (const Thread& from : frontier) inits.push_back(from.set);
      r.failing_prefix = minimal_failing_prefix(win, inits);
      return r;
    }
    if (next.size() > 1024)
      fail(Err::CapExceeded, "too many feasible abstract states at a window cut");
    frontier = std::move(next);
    begin = i + 1;
  }
  all.witness = std::move(frontier.front().witness);
  return all;
}

}  // namespace

LinResult check_windows(const History& h, const CheckConfig& cfg) {
  collect_ops(h);  // validate up front so cut points are trustworthy
  // Fast pass: follow one witness per window and thread its final set. A
  // failure here may be an artifact of that single choice, so it is only a
  // trigger for the exhaustive pass, never reported directly.
  LinResult all;
  all.window_first_seq = h.empty() ? 0 : h.front().seq;
  all.window_last_seq = h.empty() ? 0 : h.back().seq;
  std::vector<std::int64_t> set;
  std::size_t begin = 0;
  int open = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    open += h[i].invoke ? 1 : -1;
    if (open != 0 && i + 1 < h.size()) continue;
    History win(h.begin() + static_cast<std::ptrdiff_t>(begin),
                h.begin() + static_cast<std::ptrdiff_t>(i + 1));
    std::vector<OpRec> ops = collect_ops(win);
    if (ops.size() > cfg.max_ops)
      fail(Err::CapExceeded, "window has " + std::to_string(ops.size()) +
                                 " operations, cap is " + std::to_string(cfg.max_ops));
    std::vector<std::uint32_t> wit;
    if (!wg_solve(events_of(win, ops), ops, set, &wit))
      return check_windows_exhaustive(h, cfg);
    SequentialSet s;
    for (std::int64_t v : set) s.add(v);
    for (std::uint32_t o : wit) {
      s.apply(ops[o].op, ops[o].arg);
      all.witness.push_back({ops[o].op, ops[o].arg, ops[o].ret, ops[o].proc});
    }
    set = s.values();
    begin = i + 1;
  }
  return all;
}

bool brute_force_linearisable(const History& h) {
  std::vector<OpRec> ops = collect_ops(h);
  if (ops.size() > 8) fail(Err::CapExceeded, "oracle handles at most 8 operations");
  std::vector<std::uint32_t> pending, completed;
  for (std::uint32_t i = 0; i < ops.size(); ++i)
    (ops[i].res_idx ? completed : pending).push_back(i);

  for (std::uint32_t mask = 0; mask < (1u << pending.size()); ++mask) {
    std::vector<std::uint32_t> chosen = completed;
    for (std::size_t i = 0; i < pending.size(); ++i)
      if (mask & (1u << i)) chosen.push_back(pending[i]);
    std::sort(chosen.begin(), chosen.end());
    do {
      // real-time order: a response wholly before an invocation stays ordered
      bool ok = true;
      for (std::size_t i = 0; i < chosen.size() && ok; ++i)
        for (std::size_t j = i + 1; j < chosen.size() && ok; ++j) {
          const OpRec& later = ops[chosen[i]];  // placed before ops[chosen[j]]
          const OpRec& earlier = ops[chosen[j]];
          if (earlier.res_idx && *earlier.res_idx < later.inv_idx) ok = false;
        }
      if (!ok) continue;
      SequentialSet s;
      for (std::uint32_t o : chosen) {
        bool r = s.apply(ops[o].op, ops[o].arg);
        if (ops[o].ret && *ops[o].ret != r) {
          ok = false;
          break;
        }
      }
      if (ok) return true;
    } while (std::next_permutation(chosen.begin(), chosen.end()));
  }
  return false;
}

}  // namespace lsv::rt
