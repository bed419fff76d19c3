#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lsv/error.hpp"
#include "lsv/runtime.hpp"
#include "lsv/verifier.hpp"

using namespace lsv;

namespace {

int status_exit(Status s) { return s == Status::Counterexample ? 1 : 0; }

std::uint64_t env_seed() {
  if (const char* e = std::getenv("LSV_SEED")) return std::strtoull(e, nullptr, 10);
  return 1;
}

SetModel::Mutant mutant_from(const std::string& name) {
  if (name == "none") return SetModel::Mutant::None;
  if (name == "skip-mark") return SetModel::Mutant::SkipMark;
  if (name == "swap-link") return SetModel::Mutant::SwapLink;
  if (name == "no-validate") return SetModel::Mutant::NoValidate;
  if (name == "no-mrk-check") return SetModel::Mutant::NoMrkCheck;
  throw CLI::ValidationError("mutant", "unknown mutant: " + name);
}

rt::RtMutant rt_mutant_from(const std::string& name) {
  if (name == "none") return rt::RtMutant::None;
  if (name == "skip-mark") return rt::RtMutant::SkipMark;
  if (name == "swap-link") return rt::RtMutant::SwapLink;
  if (name == "no-validate") return rt::RtMutant::NoValidate;
  throw CLI::ValidationError("mutant", "unknown runtime mutant: " + name);
}

std::optional<RelyId> rely_from(const std::string& name) {
  for (RelyId id : rely_catalog())
    if (rely_name(id) == name) return id;
  return std::nullopt;
}

void emit(const Json& report, const std::string& summary) {
  std::printf("%s\n", report.dump(2).c_str());
  std::fprintf(stderr, "%s\n", summary.c_str());
}

int verdict_report(const Verdict& v) {
  emit(v.to_json(), v.id + ": " + std::string(v.status == Status::Holds ? "holds"
                                              : v.status == Status::BoundedHolds
                                                  ? "holds up to the explored bound"
                                                  : "counterexample found") +
                        " (" + std::to_string(v.cases) + " cases)");
  return status_exit(v.status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lazy set verification workbench"};
  app.require_subcommand(1);

  std::uint64_t seed = env_seed();
  VerifyConfig vc;
  std::string mutant = "none";
  std::string kind, rely_id, hist_file, record_file;
  bool full = false;
  std::size_t max_ops = 100000;
  rt::RunConfig rc;
  rc.seed = env_seed();
  int phases = 50;

  CLI::App* laws = app.add_subcommand("laws", "run the algebraic law suite");
  laws->add_option("--seed", seed, "random stream seed");

  CLI::App* refine =
      app.add_subcommand("check-refinement", "check one operation against its abstraction");
  refine->add_option("kind", kind, "contains, add or remove")->required();
  refine->add_option("--mutant", mutant, "seeded fault (none, skip-mark, swap-link, no-validate, no-mrk-check)");
  refine->add_option("--horizon", vc.horizon, "time steps explored");
  refine->add_option("--omega-unroll", vc.omega_unroll, "loop unroll bound");

  CLI::App* rely = app.add_subcommand("check-rely", "check one rely condition");
  rely->add_option("id", rely_id, "R5 R10 R11 R13 R24 R20 R21 R27, or all")->required();
  rely->add_option("--mutant", mutant, "fault seeded into the environment");
  rely->add_option("--horizon", vc.horizon, "time steps explored");

  CLI::App* lin = app.add_subcommand("check-lin", "check a recorded history file");
  lin->add_option("file", hist_file, "JSON-lines history")->required()->check(CLI::ExistingFile);
  lin->add_flag("--full", full, "single whole-history check instead of windows");
  lin->add_option("--max-ops", max_ops, "operation cap per checked window");

  CLI::App* stress = app.add_subcommand("stress", "concurrent soak run plus checks");
  stress->add_option("--threads", rc.threads, "worker threads");
  stress->add_option("--ops", rc.ops_per_thread, "operations per thread");
  stress->add_option("--keys", rc.keys, "key range [1, keys]");
  stress->add_option("--seed", rc.seed, "workload seed");
  stress->add_option("--phases", phases, "stop-the-world audit rounds");
  stress->add_option("--mutant", mutant, "seeded runtime fault");
  stress->add_option("--record", record_file, "write the merged history here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors are exit 2
  }

  try {
    if (*laws) {
      LawReport rep = law_suite(seed);
      emit(rep.to_json(), rep.all_pass() ? "all laws hold" : "law failure");
      return rep.all_pass() ? 0 : 1;
    }
    if (*refine) {
      SetModel::Mutant m = mutant_from(mutant);
      if (kind == "contains") return verdict_report(check_contains_refinement(vc, m));
      if (kind == "add") return verdict_report(check_add_refinement(vc, m));
      if (kind == "remove") return verdict_report(check_remove_refinement(vc, m));
      std::fprintf(stderr, "unknown kind: %s\n", kind.c_str());
      return 2;
    }
    if (*rely) {
      SetModel::Mutant m = mutant_from(mutant);
      if (rely_id == "all") {
        Json j = Json::array();
        bool ok = true;
        for (const Verdict& v : check_rely_all(vc, m)) {
          j.push_back(v.to_json());
          ok = ok && v.status != Status::Counterexample;
        }
        emit(j, ok ? "all rely conditions hold" : "rely violation found");
        return ok ? 0 : 1;
      }
      std::optional<RelyId> id = rely_from(rely_id);
      if (!id) {
        std::fprintf(stderr, "unknown rely id: %s\n", rely_id.c_str());
        return 2;
      }
      return verdict_report(check_rely(vc, *id, m));
    }
    if (*lin) {
      std::ifstream in(hist_file);
      std::stringstream buf;
      buf << in.rdbuf();
      rt::History h = rt::history_from_jsonl(buf.str());
      rt::CheckConfig cc{max_ops};
      rt::LinResult r = full ? rt::check_linearisable(h, cc) : rt::check_windows(h, cc);
      emit(r.to_json(), r.linearisable
                            ? "linearisable; witness: " + rt::witness_to_string(r.witness)
                            : "not linearisable");
      return r.linearisable ? 0 : 1;
    }
    if (*stress) {
      rc.mutant = rt_mutant_from(mutant);
      rt::RunResult r = rt::record_run(rc, phases);
      if (!record_file.empty()) {
        std::ofstream out(record_file);
        out << rt::history_to_jsonl(r.history);
      }
      rt::LinResult lr = rt::check_windows(r.history, rt::CheckConfig{max_ops});
      bool ok = r.sorted_ok && r.unmarked_unlinks == 0 && lr.linearisable;
      Json j{{"events", r.history.size()},
             {"sorted_ok", r.sorted_ok},
             {"unmarked_unlinks", r.unmarked_unlinks},
             {"linearisable", lr.linearisable},
             {"final_values", r.final_values}};
      if (!lr.linearisable) j["failure"] = lr.to_json();
      emit(j, ok ? "stress run clean" : "stress run found a violation");
      return ok ? 0 : 1;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == Err::Usage || e.code() == Err::MalformedHistory ? 2 : 1;
  }
  return 2;
}
