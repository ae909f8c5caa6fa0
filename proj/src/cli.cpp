#include "pushd/cli.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pushd/encoder.hpp"

namespace pushd::cli {

using json = nlohmann::json;

// --- text formats ---------------------------------------------------------------

namespace {

std::string bits(const std::vector<bool>& v) {
  std::string s;
  for (bool b : v) s += b ? '1' : '0';
  return s;
}

}  // namespace

std::string format_witness(const aiger::Trace& trace, std::size_t property) {
  std::ostringstream os;
  os << "1\nb" << property << "\n";
  for (Lit l : trace.initial.cube()) os << (l.negated() ? '0' : '1');
  os << "\n";
  for (const auto& st : trace.steps) os << bits(st.values) << "\n";
  os << bits(trace.final_inputs.values) << "\n.\n";
  return os.str();
}

std::string format_safe(std::size_t property) { return "0\nb" + std::to_string(property) + "\n.\n"; }

std::string format_invariant(std::span<const Clause> phi) {
  std::ostringstream os;
  for (const auto& c : phi) {
    for (Lit l : c) os << (l.negated() ? "-" : "") << l.var() << ' ';
    os << "0\n";
  }
  return os.str();
}

namespace {

json stats_object(const ic3::Stats& s) {
  return {
      {"sat_calls",
       {{"bad", s.sat_bad},
        {"block", s.sat_block},
        {"minimize", s.sat_minimize},
        {"push", s.sat_push},
        {"verify", s.sat_verify},
        {"total", s.sat_calls()}}},
      {"clauses", {{"learned", s.clauses_learned}, {"pushed", s.clauses_pushed}, {"subsumed", s.clauses_subsumed}}},
      {"insertions_skipped", s.insertions_skipped},
      {"witnesses", {{"created", s.witnesses_created}, {"killed", s.witnesses_killed}}},
      {"obligations",
       {{"created", s.obligations_created},
        {"rescheduled", s.obligations_rescheduled},
        {"dropped", s.obligations_dropped}}},
      {"frames", s.frames},
  };
}

}  // namespace

std::string stats_json(const ic3::Stats& s) { return stats_object(s).dump() + "\n"; }

std::string stats_text(const ic3::Stats& s) {
  std::ostringstream os;
  os << "sat calls: " << s.sat_calls() << " (bad " << s.sat_bad << ", block " << s.sat_block << ", minimize "
     << s.sat_minimize << ", push " << s.sat_push << ", verify " << s.sat_verify << ")\n"
     << "clauses: learned " << s.clauses_learned << ", pushed " << s.clauses_pushed << ", subsumed "
     << s.clauses_subsumed << ", insertions skipped " << s.insertions_skipped << "\n"
     << "witnesses: created " << s.witnesses_created << ", killed " << s.witnesses_killed << "\n"
     << "obligations: created " << s.obligations_created << ", rescheduled " << s.obligations_rescheduled
     << ", dropped " << s.obligations_dropped << "\n"
     << "frames: " << s.frames << "\n";
  return os.str();
}

// --- modes ----------------------------------------------------------------------

std::vector<ModeSpec> all_mode_specs() {
  return {{"none", ic3::Mode::none, false},
          {"iteration", ic3::Mode::iteration, false},
          {"triggered", ic3::Mode::triggered, false},
          {"triggered+wdm", ic3::Mode::triggered, true}};
}

std::optional<ModeSpec> parse_mode_spec(std::string_view label) {
  for (auto& m : all_mode_specs())
    if (m.label == label) return m;
  return std::nullopt;
}

// --- bench ----------------------------------------------------------------------

namespace {

BenchRow run_job(const std::filesystem::path& file, const ModeSpec& spec, const BenchOptions& opts) {
  BenchRow row;
  row.file = file.filename().string();
  row.mode = spec.label;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto sys = aiger::parse_aag_file(file);
    ic3::EngineConfig cfg;
    cfg.mode = spec.mode;
    cfg.wdm = spec.wdm;
    cfg.max_frames = opts.max_frames;
    cfg.seed = opts.seed;
    const auto outcome = ic3::check(sys, cfg);
    row.verdict = outcome.safe() ? "safe" : outcome.unsafe() ? "unsafe" : "unknown";
    if (outcome.unknown()) row.detail = std::get<ic3::ResourceOut>(outcome.verdict).reason;
    row.sat_calls = outcome.stats.sat_calls();
    row.frames = outcome.stats.frames;
  } catch (const std::exception& e) {
    row.verdict = "error";
    row.detail = e.what();
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

json row_json(const BenchRow& r) {
  return {{"file", r.file},           {"mode", r.mode},   {"verdict", r.verdict}, {"seconds", r.seconds},
          {"sat_calls", r.sat_calls}, {"frames", r.frames}, {"detail", r.detail}};
}

BenchRow row_from_json(const json& j) {
  BenchRow r;
  r.file = j.at("file");
  r.mode = j.at("mode");
  r.verdict = j.at("verdict");
  r.seconds = j.at("seconds");
  r.sat_calls = j.at("sat_calls");
  r.frames = j.at("frames");
  r.detail = j.at("detail");
  return r;
}

struct Job {
  std::filesystem::path file;
  ModeSpec spec;
};

struct Worker {
  pid_t pid;
  int fd;
  std::size_t job;
  std::string buf;
  std::chrono::steady_clock::time_point started;
};

// Runs every job in a forked child; results come back as one JSON document
// per pipe.  A child that dies or overruns the timeout yields an error or
// timeout row, and the run continues.
std::vector<BenchRow> run_workers(const std::vector<Job>& jobs, const BenchOptions& opts) {
  std::vector<BenchRow> rows(jobs.size());
  std::vector<Worker> running;
  std::size_t next = 0;
  const unsigned width = std::max(1u, opts.jobs);

  auto failed = [&](std::size_t j, std::string verdict, std::string detail, double secs) {
    BenchRow& r = rows[j];
    r.file = jobs[j].file.filename().string();
    r.mode = jobs[j].spec.label;
    r.verdict = std::move(verdict);
    r.detail = std::move(detail);
    r.seconds = secs;
  };

  while (next < jobs.size() || !running.empty()) {
    while (next < jobs.size() && running.size() < width) {
      int fds[2];
      if (pipe(fds) != 0) throw std::runtime_error("pipe failed");
      const pid_t pid = fork();
      if (pid < 0) throw std::runtime_error("fork failed");
      if (pid == 0) {
        close(fds[0]);
        const std::string payload = row_json(run_job(jobs[next].file, jobs[next].spec, opts)).dump();
        std::size_t off = 0;
        while (off < payload.size()) {
          const ssize_t n = write(fds[1], payload.data() + off, payload.size() - off);
          if (n <= 0) _exit(2);
          off += static_cast<std::size_t>(n);
        }
        _exit(0);
      }
      close(fds[1]);
      running.push_back({pid, fds[0], next, {}, std::chrono::steady_clock::now()});
      ++next;
    }

    std::vector<pollfd> pfds;
    for (const auto& w : running) pfds.push_back({w.fd, POLLIN, 0});
    poll(pfds.data(), pfds.size(), 50);

    const auto now = std::chrono::steady_clock::now();
    for (std::size_t k = 0; k < running.size();) {
      Worker& w = running[k];
      bool done = false;
      if (pfds[k].revents & (POLLIN | POLLHUP | POLLERR)) {
        char chunk[4096];
        const ssize_t n = read(w.fd, chunk, sizeof chunk);
        if (n > 0)
          w.buf.append(chunk, static_cast<std::size_t>(n));
        else
          done = true;
      }
      const double secs = std::chrono::duration<double>(now - w.started).count();
      if (!done && opts.timeout_seconds > 0 && secs > opts.timeout_seconds) {
        kill(w.pid, SIGKILL);
        waitpid(w.pid, nullptr, 0);
        close(w.fd);
        failed(w.job, "timeout", "", secs);
        pfds.erase(pfds.begin() + static_cast<std::ptrdiff_t>(k));
        running.erase(running.begin() + static_cast<std::ptrdiff_t>(k));
        continue;
      }
      if (done) {
        int status = 0;
        waitpid(w.pid, &status, 0);
        close(w.fd);
        try {
          if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) throw std::runtime_error("worker died");
          rows[w.job] = row_from_json(json::parse(w.buf));
        } catch (const std::exception& e) {
          failed(w.job, "error", e.what(), secs);
        }
        pfds.erase(pfds.begin() + static_cast<std::ptrdiff_t>(k));
        running.erase(running.begin() + static_cast<std::ptrdiff_t>(k));
        continue;
      }
      ++k;
    }
  }
  return rows;
}

}  // namespace

BenchTable run_bench(const BenchOptions& opts) {
  if (!std::filesystem::is_directory(opts.dir)) throw std::runtime_error("not a directory: " + opts.dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(opts.dir))
    if (e.is_regular_file() && e.path().extension() == ".aag") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::vector<Job> jobs;
  for (const auto& f : files)
    for (const auto& m : opts.modes) jobs.push_back({f, m});

  BenchTable t;
  t.rows = run_workers(jobs, opts);
  for (const auto& m : opts.modes) {
    BenchModeSummary s{m.label};
    for (const auto& r : t.rows) {
      if (r.mode != m.label) continue;
      if (r.verdict == "safe" || r.verdict == "unsafe") ++s.solved;
      s.sat_calls += r.sat_calls;
      s.frames += r.frames;
    }
    t.summary.push_back(s);
  }
  std::map<std::string, std::pair<bool, bool>> seen;
  for (const auto& r : t.rows) {
    if (r.verdict == "safe") seen[r.file].first = true;
    if (r.verdict == "unsafe") seen[r.file].second = true;
  }
  for (const auto& [file, v] : seen)
    if (v.first && v.second) t.inconsistent.push_back(file);
  return t;
}

std::string bench_json(const BenchTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) rows.push_back(row_json(r));
  json summary = json::array();
  for (const auto& s : t.summary)
    summary.push_back({{"mode", s.mode}, {"solved", s.solved}, {"sat_calls", s.sat_calls}, {"frames", s.frames}});
  return json{{"rows", rows}, {"summary", summary}, {"inconsistent", t.inconsistent}}.dump(2) + "\n";
}

std::string bench_text(const BenchTable& t) {
  std::ostringstream os;
  char line[256];
  for (const auto& r : t.rows) {
    std::snprintf(line, sizeof line, "%-28s %-14s %-8s %9.3fs %10llu sat %5zu frames", r.file.c_str(),
                  r.mode.c_str(), r.verdict.c_str(), r.seconds, static_cast<unsigned long long>(r.sat_calls),
                  r.frames);
    os << line;
    if (!r.detail.empty()) os << "  (" << r.detail << ")";
    os << "\n";
  }
  if (!t.summary.empty()) os << "\n";
  for (const auto& s : t.summary) {
    std::snprintf(line, sizeof line, "%-14s solved %4zu  sat calls %10llu  frames %6zu", s.mode.c_str(), s.solved,
                  static_cast<unsigned long long>(s.sat_calls), s.frames);
    os << line << "\n";
  }
  for (const auto& f : t.inconsistent) os << "INCONSISTENT " << f << "\n";
  return os.str();
}

// --- main -----------------------------------------------------------------------

namespace {

struct CheckArgs {
  std::string file;
  std::string mode = "triggered";
  bool wdm = false;
  std::size_t max_frames = 1000;
  std::uint64_t seed = 0;
  std::size_t property = 0;
  bool no_verify = false;
  std::string dump_cnf;
  std::string stats;
  std::string witness;
  std::string invariant;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

int run_check(const CheckArgs& a, std::ostream& out, std::ostream& err) {
  const auto mode = ic3::parse_mode(a.mode);
  if (!mode) {
    err << "error: unknown mode '" << a.mode << "'\n";
    return kExitError;
  }
  if (a.wdm && *mode != ic3::Mode::triggered) {
    err << "error: --wdm requires --mode triggered\n";
    return kExitError;
  }

  aiger::TransitionSystem sys;
  try {
    sys = aiger::parse_aag_file(a.file, a.property);
  } catch (const std::exception& e) {
    err << "error: " << a.file << ": " << e.what() << "\n";
    return kExitError;
  }

  const auto enc = encoder::encode(sys);
  if (!a.dump_cnf.empty()) {
    std::ofstream f(a.dump_cnf);
    if (!f) {
      err << "error: cannot write " << a.dump_cnf << "\n";
      return kExitError;
    }
    encoder::write_dimacs(f, enc);
  }

  ic3::EngineConfig cfg;
  cfg.mode = *mode;
  cfg.wdm = a.wdm;
  cfg.max_frames = a.max_frames;
  cfg.seed = a.seed;
  cfg.verify_certificates = !a.no_verify;

  ic3::CheckOutcome outcome;
  try {
    outcome = ic3::check(sys, enc, cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  int code = kExitUnknown;
  std::string text;
  if (const auto* u = std::get_if<ic3::Unsafe>(&outcome.verdict)) {
    text = format_witness(u->trace, a.property);
    code = kExitUnsafe;
  } else if (const auto* s = std::get_if<ic3::Safe>(&outcome.verdict)) {
    text = format_safe(a.property);
    code = kExitSafe;
    if (!a.invariant.empty()) write_file(a.invariant, format_invariant(s->invariant));
  } else {
    text = "unknown\n";
  }
  if (!a.witness.empty() && code != kExitUnknown) write_file(a.witness, text);
  out << text;
  if (a.stats == "json") err << stats_json(outcome.stats);
  if (a.stats == "text") err << stats_text(outcome.stats);
  return code;
}

}  // namespace

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"IC3 model checker with triggered clause pushing", "pushd"};
  app.require_subcommand(1);

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "check the safety property of an ASCII AIGER file");
  check->add_option("file", ca.file, "input .aag file")->required();
  check->add_option("--mode", ca.mode, "none, iteration or triggered")
      ->check(CLI::IsMember({"none", "iteration", "triggered"}));
  check->add_flag("--wdm", ca.wdm, "witness-directed cube minimization");
  check->add_option("--max-frames", ca.max_frames, "frame limit");
  check->add_option("--seed", ca.seed, "SAT solver seed");
  check->add_option("--property", ca.property, "index of the bad property");
  check->add_flag("--no-verify", ca.no_verify, "skip certificate re-verification");
  check->add_option("--dump-cnf", ca.dump_cnf, "write the transition CNF as DIMACS");
  check->add_option("--stats", ca.stats, "print statistics to stderr")->check(CLI::IsMember({"json", "text"}));
  check->add_option("--witness", ca.witness, "write the status block to a file");
  check->add_option("--invariant", ca.invariant, "write the inductive invariant to a file");

  BenchOptions bo;
  std::string dir;
  std::vector<std::string> modes;
  std::string format = "text";
  auto* bench = app.add_subcommand("bench", "run every .aag file of a directory under several modes");
  bench->add_option("dir", dir, "directory of .aag files")->required();
  bench->add_option("--modes", modes, "subset of none, iteration, triggered, triggered+wdm")->delimiter(',');
  bench->add_option("--max-frames", bo.max_frames, "frame limit");
  bench->add_option("--seed", bo.seed, "SAT solver seed");
  bench->add_option("--jobs", bo.jobs, "worker processes")->check(CLI::PositiveNumber);
  bench->add_option("--timeout", bo.timeout_seconds, "seconds per run, 0 for none");
  bench->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));

  std::vector<std::string> argv{"pushd"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::vector<const char*> cargv;
  for (const auto& s : argv) cargv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : kExitError;
  }

  try {
    if (*check) return run_check(ca, out, err);

    bo.dir = dir;
    if (!modes.empty()) {
      bo.modes.clear();
      for (const auto& m : modes) {
        auto spec = parse_mode_spec(m);
        if (!spec) {
          err << "error: unknown mode '" << m << "'\n";
          return kExitError;
        }
        bo.modes.push_back(*spec);
      }
    }
    const auto table = run_bench(bo);
    out << (format == "json" ? bench_json(table) : bench_text(table));
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace pushd::cli
