#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lsv/observe.hpp"

namespace lsv {

class CommandNode;
using Command = std::shared_ptr<const CommandNode>;

/// Labels are interned to small integers stored in the per-process program
/// counter variable.
int label_id(const std::string& name);
const std::string& label_name(int id);
Location pc_var(Proc p);
Expr pc_is(Proc p, const std::string& label);

class CommandNode {
 public:
  enum class Kind {
    Idle,
    Guard,        // [c]
    AtomicGuard,  // <c>
    Assign,       // target := rhs; target a variable or an address expression
    Seq,
    Choice,
    Omega,
    Par,
    Context,   // frame of additional locations
    Labelled,
    Rely,
    Enf,
    Spec,
    Lock,     // test-and-set on (node . lck)
    Unlock,   // release, owner must be the locking process
    NewNode,  // allocate from the free list, initialised (x, null, false, null)
  };

  Kind kind;
  Expr guard;    // Guard / AtomicGuard
  Expr target;   // Assign (Loc or address expression); Lock/Unlock/NewNode: node variable
  Expr rhs;      // Assign source; NewNode value
  std::vector<Command> kids;
  std::vector<Location> frame;  // Context
  std::string label;            // Labelled
  IntvPred pred;                // Rely / Enf / Spec
  std::vector<std::pair<Proc, Command>> procs;  // Par

  std::string to_string() const;
};

Command c_idle();
Command c_guard(Expr c);
Command c_atomic_guard(Expr c);
Command c_assign(Expr target, Expr rhs);
Command c_seq(std::vector<Command> cs);
Command c_choice(Command a, Command b);
Command c_omega(Command body);
Command c_par(std::vector<std::pair<Proc, Command>> procs);
Command c_context(std::vector<Location> frame, Command body);
Command c_label(const std::string& l, Command body);
Command c_rely(IntvPred r, Command body);
Command c_enf(IntvPred g, Command body);
Command c_spec(IntvPred g);
Command c_lock(Expr node);
Command c_unlock(Expr node);
Command c_new_node(Expr node_var, Expr value);

/// Interval is unbounded / bounded.
IntvPred p_inf();
IntvPred p_fin();

/// The behaviour of C executed by processes P in context Z. Per-process
/// constructs (guards, assignments, labels, locks) require |P| = 1.
/// Context clashes raise ContextClash at construction.
IntvPred beh(const Command& c, const std::vector<Proc>& procs, std::vector<Location> z);

inline IntvPred beh(const Command& c, Proc p, std::vector<Location> z) {
  return beh(c, std::vector<Proc>{p}, std::move(z));
}

bool beh_check(const Command& c, const std::vector<Proc>& procs, std::vector<Location> z,
               const Interval& d, EvalCtx& ctx);

}  // namespace lsv
