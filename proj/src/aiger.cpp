#include "pushd/aiger.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

namespace pushd::aiger {

namespace {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  // Returns the next line without its terminator, or nullopt at end of input.
  std::optional<std::string_view> next() {
    if (pos_ >= text_.size()) return std::nullopt;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    std::string_view line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++line_no_;
    return line;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::uint64_t to_uint(std::string_view tok, std::size_t line) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError(line, "expected unsigned integer, got '" + std::string(tok) + "'");
  return v;
}

enum class Def : std::uint8_t { none, input, latch, gate };

struct Parser {
  LineReader reader;
  std::uint64_t max_var = 0;
  std::vector<Def> defs;
  std::vector<std::size_t> gate_of_var;

  explicit Parser(std::string_view text) : reader(text) {}

  std::vector<std::uint64_t> numbers(std::size_t min_count, std::size_t max_count,
                                     const char* what) {
    auto line = reader.next();
    if (!line) throw ParseError(reader.line_no() + 1, std::string("unexpected end of file, expected ") + what);
    auto toks = split_ws(*line);
    if (toks.size() < min_count || toks.size() > max_count)
      throw ParseError(reader.line_no(), std::string("malformed ") + what + " line");
    std::vector<std::uint64_t> out;
    for (auto t : toks) out.push_back(to_uint(t, reader.line_no()));
    return out;
  }

  Lit literal(std::uint64_t code) {
    if (code > 2 * max_var + 1)
      throw ParseError(reader.line_no(), "literal " + std::to_string(code) +
                                             " exceeds maximum " + std::to_string(2 * max_var + 1));
    return Lit(static_cast<std::uint32_t>(code));
  }

  void define(Lit lit, Def kind) {
    if (lit.negated()) throw ParseError(reader.line_no(), "defined literal " + std::to_string(lit.code()) + " is negated");
    if (lit.var() == 0) throw ParseError(reader.line_no(), "constant cannot be redefined");
    if (defs[lit.var()] != Def::none)
      throw ParseError(reader.line_no(), "variable " + std::to_string(lit.var()) + " defined twice");
    defs[lit.var()] = kind;
  }
};

// Orders gates so that operands precede their users; rejects cycles.
std::vector<AndGate> topo_sort(const std::vector<AndGate>& gates, const std::vector<std::size_t>& gate_of_var,
                               const std::vector<Def>& defs) {
  std::vector<AndGate> out;
  out.reserve(gates.size());
  std::vector<std::uint8_t> mark(gates.size(), 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::pair<std::size_t, int>> stack;
  for (std::size_t root = 0; root < gates.size(); ++root) {
    if (mark[root]) continue;
    stack.push_back({root, 0});
    mark[root] = 1;
    while (!stack.empty()) {
      auto& [g, child] = stack.back();
      if (child < 2) {
        Lit operand = child == 0 ? gates[g].rhs0 : gates[g].rhs1;
        ++child;
        Var v = operand.var();
        if (v != 0 && defs[v] == Def::gate) {
          std::size_t h = gate_of_var[v];
          if (mark[h] == 1) throw std::invalid_argument("combinational cycle through variable " + std::to_string(v));
          if (mark[h] == 0) {
            mark[h] = 1;
            stack.push_back({h, 0});
          }
        }
        continue;
      }
      mark[g] = 2;
      out.push_back(gates[g]);
      stack.pop_back();
    }
  }
  return out;
}

}  // namespace

TransitionSystem parse_aag(std::string_view text, std::size_t property) {
  Parser p(text);
  auto header_line = p.reader.next();
  if (!header_line) throw ParseError(1, "empty input");
  auto toks = split_ws(*header_line);
  if (toks.empty() || toks[0] != "aag")
    throw ParseError(1, "expected 'aag' header (binary AIGER is not supported)");
  if (toks.size() < 6 || toks.size() > 10) throw ParseError(1, "malformed header");
  std::vector<std::uint64_t> h;
  for (std::size_t i = 1; i < toks.size(); ++i) h.push_back(to_uint(toks[i], 1));
  h.resize(9, 0);
  const auto [M, I, L, O, A, B, C, J, F] = std::tuple(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
  if (C || J || F) throw ParseError(1, "constraint, justice and fairness sections are not supported");
  if (M > (std::uint64_t{1} << 26)) throw ParseError(1, "maximum variable index too large");
  if (I + L + A > M) throw ParseError(1, "M is smaller than I + L + A");

  p.max_var = M;
  p.defs.assign(M + 1, Def::none);
  p.gate_of_var.assign(M + 1, 0);

  TransitionSystem sys;
  sys.max_var = static_cast<Var>(M);
  sys.property_index = property;

  for (std::uint64_t i = 0; i < I; ++i) {
    auto n = p.numbers(1, 1, "input");
    Lit lit = p.literal(n[0]);
    p.define(lit, Def::input);
    sys.inputs.push_back(lit);
  }
  std::vector<std::size_t> latch_lines;
  for (std::uint64_t i = 0; i < L; ++i) {
    auto n = p.numbers(2, 3, "latch");
    Lit lit = p.literal(n[0]);
    p.define(lit, Def::latch);
    Lit next = p.literal(n[1]);
    if (n.size() == 3 && n[2] != 0)
      throw ParseError(p.reader.line_no(), n[2] == n[0] ? "uninitialized latches are not supported"
                                                        : "latch reset values other than 0 are not supported");
    sys.latches.push_back({lit, next});
    latch_lines.push_back(p.reader.line_no());
  }
  std::vector<Lit> outputs;
  for (std::uint64_t i = 0; i < O; ++i) outputs.push_back(p.literal(p.numbers(1, 1, "output")[0]));
  std::vector<Lit> bads;
  for (std::uint64_t i = 0; i < B; ++i) bads.push_back(p.literal(p.numbers(1, 1, "bad")[0]));
  std::size_t property_line = p.reader.line_no();

  std::vector<AndGate> gates;
  std::vector<std::size_t> gate_lines;
  for (std::uint64_t i = 0; i < A; ++i) {
    auto n = p.numbers(3, 3, "and gate");
    AndGate g{p.literal(n[0]), p.literal(n[1]), p.literal(n[2])};
    p.define(g.lhs, Def::gate);
    p.gate_of_var[g.lhs.var()] = gates.size();
    gates.push_back(g);
    gate_lines.push_back(p.reader.line_no());
  }
  // Anything after the gates is the symbol table or comment section.

  auto check_defined = [&](Lit l, std::size_t line, const char* where) {
    if (l.var() != 0 && p.defs[l.var()] == Def::none)
      throw ParseError(line, std::string(where) + " uses undefined variable " + std::to_string(l.var()));
  };
  for (std::size_t i = 0; i < sys.latches.size(); ++i) check_defined(sys.latches[i].next, latch_lines[i], "latch");
  for (std::size_t i = 0; i < gates.size(); ++i) {
    check_defined(gates[i].rhs0, gate_lines[i], "and gate");
    check_defined(gates[i].rhs1, gate_lines[i], "and gate");
  }

  if (B > 0) {
    if (property >= bads.size())
      throw ParseError(property_line, "property index " + std::to_string(property) + " out of range");
    sys.bad = bads[property];
  } else if (O > 0) {
    if (property >= outputs.size())
      throw ParseError(property_line, "property index " + std::to_string(property) + " out of range");
    sys.bad = outputs[property];
  } else {
    throw ParseError(1, "missing property: no outputs and no bad-state lines");
  }
  check_defined(sys.bad, property_line, "property");

  try {
    sys.gates = topo_sort(gates, p.gate_of_var, p.defs);
  } catch (const std::invalid_argument& e) {
    throw ParseError(p.reader.line_no(), e.what());
  }
  return sys;
}

TransitionSystem parse_aag_file(const std::filesystem::path& path, std::size_t property) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_aag(buf.str(), property);
}

std::string to_aag(const TransitionSystem& sys) {
  std::ostringstream os;
  os << "aag " << sys.max_var << ' ' << sys.inputs.size() << ' ' << sys.latches.size() << " 1 "
     << sys.gates.size() << '\n';
  for (Lit l : sys.inputs) os << l.code() << '\n';
  for (const auto& l : sys.latches) os << l.lit.code() << ' ' << l.next.code() << '\n';
  os << sys.bad.code() << '\n';
  for (const auto& g : sys.gates) os << g.lhs.code() << ' ' << g.rhs0.code() << ' ' << g.rhs1.code() << '\n';
  return os.str();
}

State initial_state(const TransitionSystem& sys) {
  return make_state(sys, std::vector<bool>(sys.latches.size(), false));
}

State make_state(const TransitionSystem& sys, const std::vector<bool>& latch_values) {
  if (latch_values.size() != sys.latches.size())
    throw std::invalid_argument("state needs one value per latch");
  std::vector<Lit> lits;
  lits.reserve(sys.latches.size());
  for (std::size_t i = 0; i < sys.latches.size(); ++i)
    lits.emplace_back(sys.latches[i].lit.var(), !latch_values[i]);
  return State(Cube(std::move(lits)));
}

std::vector<bool> latch_values(const TransitionSystem& sys, const State& s) {
  std::vector<bool> out;
  out.reserve(sys.latches.size());
  for (const auto& l : sys.latches) out.push_back(s.value(l.lit.var()));
  return out;
}

namespace {

// Combinational evaluation of all variables at (s, in).
std::vector<std::uint8_t> evaluate(const TransitionSystem& sys, const State& s, const Step& in) {
  if (in.values.size() != sys.inputs.size()) throw std::invalid_argument("step needs one value per input");
  std::vector<std::uint8_t> val(sys.max_var + 1, 0);
  for (std::size_t i = 0; i < sys.inputs.size(); ++i) val[sys.inputs[i].var()] = in.values[i];
  for (const auto& l : sys.latches) val[l.lit.var()] = s.value(l.lit.var());
  auto lit_val = [&](Lit l) -> std::uint8_t { return val[l.var()] ^ static_cast<std::uint8_t>(l.negated()); };
  for (const auto& g : sys.gates) val[g.lhs.var()] = lit_val(g.rhs0) & lit_val(g.rhs1);
  return val;
}

bool lit_value(const std::vector<std::uint8_t>& val, Lit l) { return (val[l.var()] ^ l.negated()) != 0; }

}  // namespace

State simulate_step(const TransitionSystem& sys, const State& s, const Step& in) {
  auto val = evaluate(sys, s, in);
  std::vector<bool> next;
  next.reserve(sys.latches.size());
  for (const auto& l : sys.latches) next.push_back(lit_value(val, l.next));
  return make_state(sys, next);
}

bool eval_bad(const TransitionSystem& sys, const State& s, const Step& in) {
  return lit_value(evaluate(sys, s, in), sys.bad);
}

bool replay(const TransitionSystem& sys, const Trace& trace) {
  if (trace.initial.size() != sys.latches.size() || !trace.initial.is_all_zero()) return false;
  State s = trace.initial;
  for (const auto& step : trace.steps) {
    if (step.values.size() != sys.inputs.size()) return false;
    s = simulate_step(sys, s, step);
  }
  if (trace.final_inputs.values.size() != sys.inputs.size()) return false;
  return eval_bad(sys, s, trace.final_inputs);
}

}  // namespace pushd::aiger
