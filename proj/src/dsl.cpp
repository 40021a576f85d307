#include "avq/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace avq::dsl {

namespace {

struct Token {
  std::string text;
  int column = 0;  // 1-based
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

// Splits one line on whitespace; '[' and ']' are tokens of their own so
// "init [1,0 0,0]" comes apart without requiring spaces around brackets.
std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char ch = line[i];
    if (ch == '#') break;
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      continue;
    }
    if (ch == '[' || ch == ']') {
      out.push_back(Token{std::string(1, ch), int(i + 1)});
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
           line[i] != '#' && line[i] != '[' && line[i] != ']') {
      ++i;
    }
    out.push_back(Token{line.substr(start, i - start), int(start + 1)});
  }
  return out;
}

bool parse_ll(std::string_view s, long long& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

bool parse_num(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end && std::isfinite(out);
}

std::string fmt_num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

// The whole parser reports through this; `fail` fills the error and returns
// false so handlers can bail with a single statement.
struct Reporter {
  ParseError* err;
  bool fail(int line, const Token& tok, std::string message) {
    *err = ParseError{line, tok.column, std::move(message), tok.text};
    return false;
  }
  bool fail_at(int line, int column, std::string message,
               std::string token = {}) {
    *err = ParseError{line, column, std::move(message), std::move(token)};
    return false;
  }
};

struct ParserState {
  CircuitDescription desc;
  bool seen_circuit = false;
  bool seen_qubits = false;
  bool seen_init = false;
  bool seen_partition = false;
  bool seen_rebase = false;
  int partition_line = 0;
  int partition_column = 0;
};

// One past the last token, for "missing argument" errors.
Token end_token(const std::vector<Token>& toks) {
  const Token& last = toks.back();
  return Token{"", last.column + int(last.text.size())};
}

bool require_arity(Reporter& rep, int line, const std::vector<Token>& toks,
                   std::size_t count, const char* what) {
  if (toks.size() < count + 1) {
    return rep.fail(line, end_token(toks),
                    std::string(what) + ": missing argument");
  }
  if (toks.size() > count + 1) {
    return rep.fail(line, toks[count + 1],
                    std::string(what) + ": unexpected token");
  }
  return true;
}

bool need_qubits(Reporter& rep, int line, const ParserState& st,
                 const Token& tok) {
  if (!st.seen_qubits) {
    return rep.fail(line, tok, "qubits must be declared before this directive");
  }
  return true;
}

bool handle_circuit(Reporter& rep, int line, const std::vector<Token>& toks,
                    ParserState& st) {
  if (st.seen_circuit) return rep.fail(line, toks[0], "duplicate directive");
  if (!require_arity(rep, line, toks, 1, "circuit")) return false;
  st.seen_circuit = true;
  st.desc.name = toks[1].text;
  return true;
}

bool handle_qubits(Reporter& rep, int line, const std::vector<Token>& toks,
                   ParserState& st) {
  if (st.seen_qubits) return rep.fail(line, toks[0], "duplicate directive");
  if (!require_arity(rep, line, toks, 1, "qubits")) return false;
  long long n = 0;
  if (!parse_ll(toks[1].text, n) || n < 1) {
    return rep.fail(line, toks[1], "qubits needs a positive integer");
  }
  if (n > max_qubits()) {
    return rep.fail(line, toks[1],
                    "qubit count exceeds the dense-representation cap of " +
                        std::to_string(max_qubits()));
  }
  st.seen_qubits = true;
  st.desc.n_qubits = int(n);
  return true;
}

bool handle_init(Reporter& rep, int line, const std::vector<Token>& toks,
                 ParserState& st) {
  if (st.seen_init) return rep.fail(line, toks[0], "duplicate directive");
  if (!need_qubits(rep, line, st, toks[0])) return false;
  if (toks.size() < 2) {
    return rep.fail(line, end_token(toks), "init: missing argument");
  }
  st.seen_init = true;
  const std::string kind = lower(toks[1].text);
  if (kind == "zero" || kind == "plus") {
    if (!require_arity(rep, line, toks, 1, "init")) return false;
    st.desc.init = (kind == "zero") ? CircuitDescription::Init::Zero
                                    : CircuitDescription::Init::Plus;
    return true;
  }
  if (toks[1].text != "[") {
    return rep.fail(line, toks[1],
                    "init takes zero, plus, or a [re,im ...] list");
  }
  std::size_t close = 2;
  while (close < toks.size() && toks[close].text != "]") ++close;
  if (close == toks.size()) {
    return rep.fail(line, end_token(toks), "init: missing closing bracket");
  }
  if (close + 1 != toks.size()) {
    return rep.fail(line, toks[close + 1], "init: unexpected token");
  }
  const std::size_t want = std::size_t(1) << st.desc.n_qubits;
  std::vector<Complex> amps;
  double sumsq = 0.0;
  for (std::size_t i = 2; i < close; ++i) {
    const std::string& pair = toks[i].text;
    const auto comma = pair.find(',');
    double re = 0.0, im = 0.0;
    if (comma == std::string::npos ||
        !parse_num(std::string_view(pair).substr(0, comma), re) ||
        !parse_num(std::string_view(pair).substr(comma + 1), im)) {
      return rep.fail(line, toks[i], "init: malformed amplitude, want re,im");
    }
    amps.emplace_back(re, im);
    sumsq += re * re + im * im;
  }
  if (amps.size() != want) {
    return rep.fail(line, toks[1],
                    "init: expected " + std::to_string(want) +
                        " amplitudes, got " + std::to_string(amps.size()));
  }
  if (std::abs(sumsq - 1.0) > Tolerances{}.normalization) {
    return rep.fail(line, toks[1], "init: state is not normalized");
  }
  st.desc.init = CircuitDescription::Init::Explicit;
  st.desc.init_amplitudes = std::move(amps);
  return true;
}

bool read_target(Reporter& rep, int line, const Token& tok, int n_qubits,
                 int& out) {
  long long t = 0;
  if (!parse_ll(tok.text, t)) {
    return rep.fail(line, tok, "expected a qubit index");
  }
  if (t < 0 || t >= n_qubits) {
    return rep.fail(line, tok,
                    "qubit index out of range for " +
                        std::to_string(n_qubits) + " qubits");
  }
  out = int(t);
  return true;
}

bool handle_gate(Reporter& rep, int line, const std::vector<Token>& toks,
                 ParserState& st) {
  if (!need_qubits(rep, line, st, toks[0])) return false;
  if (toks.size() < 2) {
    return rep.fail(line, end_token(toks), "gate: missing gate name");
  }
  const int n = st.desc.n_qubits;
  GateSpec spec;
  const std::string name = lower(toks[1].text);

  static const char* kNamed[] = {"i", "x", "y", "z", "h", "s", "t"};
  const bool is_named =
      std::find_if(std::begin(kNamed), std::end(kNamed),
                   [&](const char* s) { return name == s; }) != std::end(kNamed);

  if (is_named) {
    if (!require_arity(rep, line, toks, 2, "gate")) return false;
    int t = 0;
    if (!read_target(rep, line, toks[2], n, t)) return false;
    spec.name = name;
    spec.targets = {t};
  } else if (name == "cx") {
    if (!require_arity(rep, line, toks, 3, "gate")) return false;
    int c = 0, t = 0;
    if (!read_target(rep, line, toks[2], n, c)) return false;
    if (!read_target(rep, line, toks[3], n, t)) return false;
    if (c == t) {
      return rep.fail(line, toks[3], "cx needs distinct control and target");
    }
    spec.name = "cx";
    spec.targets = {c, t};
  } else if (name.rfind("phase(", 0) == 0 && name.back() == ')') {
    if (!require_arity(rep, line, toks, 2, "gate")) return false;
    double angle = 0.0;
    const std::string_view inner =
        std::string_view(name).substr(6, name.size() - 7);
    if (!parse_num(inner, angle)) {
      return rep.fail(line, toks[1], "phase: malformed angle");
    }
    int t = 0;
    if (!read_target(rep, line, toks[2], n, t)) return false;
    spec.name = "phase";
    spec.angle = angle;
    spec.targets = {t};
  } else if (name == "iqft") {
    if (!require_arity(rep, line, toks, 2, "gate")) return false;
    const std::string& range = toks[2].text;
    const auto dots = range.find("..");
    long long a = 0, b = 0;
    if (dots == std::string::npos ||
        !parse_ll(std::string_view(range).substr(0, dots), a) ||
        !parse_ll(std::string_view(range).substr(dots + 2), b)) {
      return rep.fail(line, toks[2], "iqft: malformed range, want a..b");
    }
    if (a < 0 || b < a || b >= n) {
      return rep.fail(line, toks[2], "iqft: range out of order or out of "
                                     "bounds");
    }
    spec.name = "iqft";
    spec.targets = {int(a), int(b)};
  } else if (name == "oracle") {
    if (toks.size() < 3) {
      return rep.fail(line, end_token(toks), "oracle: missing kind");
    }
    const std::string kind = lower(toks[2].text);
    if (kind == "const0" || kind == "const1" || kind == "identity_balanced" ||
        kind == "not_balanced") {
      if (!require_arity(rep, line, toks, 2, "gate")) return false;
      if (n != 2) {
        return rep.fail(line, toks[2],
                        "oracle '" + kind + "' needs a 2-qubit circuit");
      }
      spec.name = "oracle";
      spec.arg = kind;
    } else if (kind == "zero") {
      if (!require_arity(rep, line, toks, 2, "gate")) return false;
      spec.name = "oracle";
      spec.arg = "zero";
    } else if (kind == "marked") {
      if (toks.size() < 4) {
        return rep.fail(line, end_token(toks),
                        "oracle marked: missing basis indices");
      }
      const std::uint64_t dim = std::uint64_t(1) << n;
      for (std::size_t i = 3; i < toks.size(); ++i) {
        std::uint64_t v = 0;
        if (!parse_u64(toks[i].text, v)) {
          return rep.fail(line, toks[i], "oracle marked: expected an index");
        }
        if (v >= dim) {
          return rep.fail(line, toks[i],
                          "oracle marked: index out of range for dimension " +
                              std::to_string(dim));
        }
        spec.marked.push_back(v);
      }
      spec.name = "oracle";
      spec.arg = "marked";
    } else {
      return rep.fail(line, toks[2], "oracle: unknown kind");
    }
  } else if (name == "umat") {
    if (!require_arity(rep, line, toks, 2, "gate")) return false;
    spec.name = "umat";
    spec.arg = toks[2].text;
  } else {
    return rep.fail(line, toks[1], "unknown gate");
  }
  st.desc.gates.push_back(std::move(spec));
  return true;
}

bool parse_group_list(std::string_view text, std::vector<Group>& out) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '(') return false;
    const auto colon = text.find(':', i);
    const auto close = text.find(')', i);
    if (colon == std::string_view::npos || close == std::string_view::npos ||
        colon > close) {
      return false;
    }
    long long start = 0, span = 0;
    if (!parse_ll(text.substr(i + 1, colon - i - 1), start) ||
        !parse_ll(text.substr(colon + 1, close - colon - 1), span) ||
        start < 0 || span < 0) {
      return false;
    }
    out.push_back(Group{int(start), int(span)});
    i = close + 1;
  }
  return !out.empty();
}

bool handle_partition(Reporter& rep, int line, const std::vector<Token>& toks,
                      ParserState& st) {
  if (st.seen_partition) return rep.fail(line, toks[0], "duplicate directive");
  if (!need_qubits(rep, line, st, toks[0])) return false;
  if (toks.size() < 2) {
    return rep.fail(line, end_token(toks), "partition: missing argument");
  }
  st.seen_partition = true;
  st.partition_line = line;
  st.partition_column = toks[1].column;
  const std::string mode = lower(toks[1].text);
  if (mode == "whole" || mode == "singles") {
    if (!require_arity(rep, line, toks, 1, "partition")) return false;
    st.desc.partition.mode = (mode == "whole")
                                 ? PartitionDirective::Mode::Whole
                                 : PartitionDirective::Mode::Singles;
    return true;
  }
  std::string joined;
  for (std::size_t i = 1; i < toks.size(); ++i) joined += toks[i].text;
  std::vector<Group> groups;
  if (!parse_group_list(joined, groups)) {
    return rep.fail(line, toks[1],
                    "partition takes whole, singles, or (start:span) groups");
  }
  st.desc.partition.mode = PartitionDirective::Mode::Explicit;
  st.desc.partition.groups = std::move(groups);
  return true;
}

bool handle_rebase(Reporter& rep, int line, const std::vector<Token>& toks,
                   ParserState& st) {
  if (st.seen_rebase) return rep.fail(line, toks[0], "duplicate directive");
  if (!need_qubits(rep, line, st, toks[0])) return false;
  if (toks.size() < 2) {
    return rep.fail(line, end_token(toks), "rebase: missing basis label");
  }
  RebaseDirective dir;
  const std::string basis = lower(toks[1].text);
  if (basis == "zero") {
    dir.basis = Basis::Zero;
  } else if (basis == "plus") {
    dir.basis = Basis::Plus;
  } else {
    return rep.fail(line, toks[1], "rebase basis must be zero or plus");
  }
  for (std::size_t i = 2; i < toks.size(); ++i) {
    const std::string opt = lower(toks[i].text);
    if (opt.rfind("k=", 0) == 0) {
      const std::string g = opt.substr(2);
      if (g != "i" && g != "h") {
        return rep.fail(line, toks[i], "rebase gate must be i or h");
      }
      dir.gate_name = g;
    } else if (opt.rfind("q=", 0) == 0) {
      double q = 0.0;
      if (!parse_num(opt.substr(2), q) || q <= 0.0) {
        return rep.fail(line, toks[i], "rebase scale must be a positive "
                                       "number");
      }
      dir.scale = q;
    } else {
      return rep.fail(line, toks[i], "rebase: unknown option");
    }
  }
  st.seen_rebase = true;
  st.desc.rebase = std::move(dir);
  return true;
}

// Mirrors make_partition's tiling rules but reports through ParseError.
bool check_tiling(Reporter& rep, const ParserState& st) {
  const int m = int(st.desc.gates.size());
  int expected = 0;
  for (const auto& g : st.desc.partition.groups) {
    if (g.start != expected) {
      return rep.fail_at(st.partition_line, st.partition_column,
                         "partition groups leave a gap or overlap at gate " +
                             std::to_string(expected));
    }
    expected = g.start + g.span + 1;
  }
  if (expected != m) {
    return rep.fail_at(st.partition_line, st.partition_column,
                       "partition covers " + std::to_string(expected) +
                           " gates but the circuit has " + std::to_string(m));
  }
  return true;
}

}  // namespace

std::optional<CircuitDescription> parse(std::string_view source,
                                        ParseError& error) {
  ParserState st;
  Reporter rep{&error};

  int line_no = 0;
  std::size_t pos = 0;
  bool ok = true;
  while (ok && pos <= source.size()) {
    if (pos == source.size() && line_no > 0) break;
    auto nl = source.find('\n', pos);
    if (nl == std::string_view::npos) nl = source.size();
    std::string line(source.substr(pos, nl - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = nl + 1;
    ++line_no;

    const std::vector<Token> toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string keyword = lower(toks[0].text);
    if (keyword == "circuit") {
      ok = handle_circuit(rep, line_no, toks, st);
    } else if (keyword == "qubits") {
      ok = handle_qubits(rep, line_no, toks, st);
    } else if (keyword == "init") {
      ok = handle_init(rep, line_no, toks, st);
    } else if (keyword == "gate") {
      ok = handle_gate(rep, line_no, toks, st);
    } else if (keyword == "partition") {
      ok = handle_partition(rep, line_no, toks, st);
    } else if (keyword == "rebase") {
      ok = handle_rebase(rep, line_no, toks, st);
    } else {
      ok = rep.fail(line_no, toks[0], "unknown directive");
    }
  }
  if (!ok) return std::nullopt;

  if (!st.seen_qubits) {
    rep.fail_at(1, 1, "missing qubits directive");
    return std::nullopt;
  }
  if (st.desc.partition.mode == PartitionDirective::Mode::Explicit &&
      !check_tiling(rep, st)) {
    return std::nullopt;
  }
  return st.desc;
}

namespace {

std::string gate_text(const GateSpec& g) {
  if (g.name == "phase") {
    return "gate phase(" + fmt_num(g.angle) + ") " +
           std::to_string(g.targets.at(0));
  }
  if (g.name == "iqft") {
    return "gate iqft " + std::to_string(g.targets.at(0)) + ".." +
           std::to_string(g.targets.at(1));
  }
  if (g.name == "oracle") {
    std::string out = "gate oracle " + g.arg;
    for (auto m : g.marked) out += " " + std::to_string(m);
    return out;
  }
  if (g.name == "umat") return "gate umat " + g.arg;
  std::string out = "gate " + g.name;
  for (int t : g.targets) out += " " + std::to_string(t);
  return out;
}

}  // namespace

std::string serialize(const CircuitDescription& desc) {
  std::string out;
  if (!desc.name.empty()) out += "circuit " + desc.name + "\n";
  out += "qubits " + std::to_string(desc.n_qubits) + "\n";
  switch (desc.init) {
    case CircuitDescription::Init::Zero: out += "init zero\n"; break;
    case CircuitDescription::Init::Plus: out += "init plus\n"; break;
    case CircuitDescription::Init::Explicit: {
      out += "init [";
      for (std::size_t i = 0; i < desc.init_amplitudes.size(); ++i) {
        if (i) out += " ";
        out += fmt_num(desc.init_amplitudes[i].real()) + "," +
               fmt_num(desc.init_amplitudes[i].imag());
      }
      out += "]\n";
      break;
    }
  }
  for (const auto& g : desc.gates) out += gate_text(g) + "\n";
  switch (desc.partition.mode) {
    case PartitionDirective::Mode::Singles:
      break;  // the default; canonical form omits it
    case PartitionDirective::Mode::Whole:
      out += "partition whole\n";
      break;
    case PartitionDirective::Mode::Explicit: {
      out += "partition ";
      for (const auto& g : desc.partition.groups) {
        out += "(" + std::to_string(g.start) + ":" + std::to_string(g.span) +
               ")";
      }
      out += "\n";
      break;
    }
  }
  if (desc.rebase.has_value()) {
    out += "rebase ";
    out += (desc.rebase->basis == Basis::Zero) ? "zero" : "plus";
    if (desc.rebase->gate_name != "i") out += " k=" + desc.rebase->gate_name;
    if (desc.rebase->scale.has_value()) {
      out += " q=" + fmt_num(*desc.rebase->scale);
    }
    out += "\n";
  }
  return out;
}

std::optional<PartitionDirective> parse_partition_text(std::string_view text,
                                                       std::string& error) {
  const std::string low = lower(text);
  PartitionDirective dir;
  if (low == "whole") {
    dir.mode = PartitionDirective::Mode::Whole;
    return dir;
  }
  if (low == "singles") {
    dir.mode = PartitionDirective::Mode::Singles;
    return dir;
  }
  std::string joined;
  for (char c : low) {
    if (!std::isspace(static_cast<unsigned char>(c))) joined += c;
  }
  std::vector<Group> groups;
  if (!parse_group_list(joined, groups)) {
    error = "partition must be whole, singles, or (start:span) groups";
    return std::nullopt;
  }
  dir.mode = PartitionDirective::Mode::Explicit;
  dir.groups = std::move(groups);
  return dir;
}

namespace {

GateMatrix embed_block(const GateMatrix& block, int n_qubits, int first) {
  const int w = block.n_qubits();
  GateMatrix out = block;
  if (first > 0) {
    const auto ldim = Eigen::Index(1) << first;
    out = tensor(GateMatrix(first, Matrix::Identity(ldim, ldim)), out);
  }
  const int rest = n_qubits - first - w;
  if (rest > 0) {
    const auto rdim = Eigen::Index(1) << rest;
    out = tensor(out, GateMatrix(rest, Matrix::Identity(rdim, rdim)));
  }
  return out;
}

GateMatrix hadamard_all(int n_qubits) {
  Matrix acc = standard_gate(GateName::H, n_qubits, 0).entries();
  for (int t = 1; t < n_qubits; ++t) {
    acc = standard_gate(GateName::H, n_qubits, t).entries() * acc;
  }
  return GateMatrix(n_qubits, std::move(acc));
}

GateName named_gate(const std::string& name) {
  switch (name.at(0)) {
    case 'i': return GateName::I;
    case 'x': return GateName::X;
    case 'y': return GateName::Y;
    case 'z': return GateName::Z;
    case 'h': return GateName::H;
    case 's': return GateName::S;
    default: return GateName::T;
  }
}

OracleSpec::Kind deutsch_kind(const std::string& arg) {
  if (arg == "const0") return OracleSpec::Kind::Const0;
  if (arg == "const1") return OracleSpec::Kind::Const1;
  if (arg == "identity_balanced") return OracleSpec::Kind::IdentityBalanced;
  return OracleSpec::Kind::NotBalanced;
}

GateMatrix gate_matrix_for(const GateSpec& g, int n,
                           const std::string& base_dir) {
  if (g.name == "cx") {
    return controlled_not(n, g.targets.at(0), g.targets.at(1));
  }
  if (g.name == "phase") {
    return phase_shift(n, g.targets.at(0), g.angle);
  }
  if (g.name == "iqft") {
    const int a = g.targets.at(0), b = g.targets.at(1);
    return embed_block(iqft(b - a + 1), n, a);
  }
  if (g.name == "oracle") {
    if (g.arg == "zero") return phase_flip(n, {0});
    if (g.arg == "marked") {
      return phase_flip(
          n, std::set<std::uint64_t>(g.marked.begin(), g.marked.end()));
    }
    if (n != 2) {
      throw BuildError("oracle '" + g.arg + "' needs a 2-qubit circuit");
    }
    return deutsch_oracle(deutsch_kind(g.arg));
  }
  if (g.name == "umat") {
    std::filesystem::path p(g.arg);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    GateMatrix u = load_umat(p.string());
    if (u.n_qubits() != n) {
      throw BuildError("umat '" + g.arg + "' acts on " +
                       std::to_string(u.n_qubits()) + " qubits, circuit has " +
                       std::to_string(n));
    }
    return u;
  }
  return standard_gate(named_gate(g.name), n, g.targets.at(0));
}

}  // namespace

BuiltCircuit build(const CircuitDescription& desc,
                   const std::string& base_dir) {
  const int n = desc.n_qubits;
  if (n < 1) throw BuildError("circuit has no qubits declaration");

  StateVector initial = basis_state(n, Basis::Zero);
  if (desc.init == CircuitDescription::Init::Plus) {
    initial = basis_state(n, Basis::Plus);
  } else if (desc.init == CircuitDescription::Init::Explicit) {
    const auto dim = Eigen::Index(1) << n;
    if (Eigen::Index(desc.init_amplitudes.size()) != dim) {
      throw BuildError("init amplitude count does not match qubit count");
    }
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = desc.init_amplitudes[i];
    initial = StateVector(n, std::move(v));
  }

  std::vector<Gate> gates;
  gates.reserve(desc.gates.size());
  for (const auto& g : desc.gates) {
    const std::string line = gate_text(g);
    gates.push_back(Gate{line.substr(5), gate_matrix_for(g, n, base_dir)});
  }
  GateSequence seq(n, std::move(gates));

  SubSequencePartition part;
  switch (desc.partition.mode) {
    case PartitionDirective::Mode::Whole:
      part = make_partition(seq, PartitionMode::Whole);
      break;
    case PartitionDirective::Mode::Singles:
      part = make_partition(seq, PartitionMode::Singles);
      break;
    case PartitionDirective::Mode::Explicit:
      part = make_partition(seq, desc.partition.groups);
      break;
  }

  std::optional<RebaseSettings> rebase;
  if (desc.rebase.has_value()) {
    StateVector phi = basis_state(n, desc.rebase->basis);
    const auto dim = Eigen::Index(1) << n;
    GateMatrix k = (desc.rebase->gate_name == "h")
                       ? hadamard_all(n)
                       : GateMatrix(n, Matrix::Identity(dim, dim));
    double q;
    if (desc.rebase->scale.has_value()) {
      q = *desc.rebase->scale;
    } else {
      q = expectation(k, phi).real();
      if (!(q > 0.0)) {
        throw BuildError("rebase gate has non-positive expectation in the "
                         "chosen basis state; give q explicitly");
      }
    }
    rebase = RebaseSettings{std::move(phi), std::move(k), q};
  }

  return BuiltCircuit{std::move(seq), std::move(initial), std::move(part),
                      std::move(rebase)};
}

namespace {

bool parse_umat_entry(std::string_view s, Complex& out) {
  if (s.size() < 2 || s.back() != 'i') return false;
  s.remove_suffix(1);
  // Split before the sign of the imaginary part; skip index 0 and any sign
  // that is part of an exponent.
  std::size_t split = std::string_view::npos;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string_view::npos) return false;
  double re = 0.0, im = 0.0;
  std::string_view im_part = s.substr(split);
  if (im_part.front() == '+') im_part.remove_prefix(1);
  if (!parse_num(s.substr(0, split), re) || !parse_num(im_part, im)) {
    return false;
  }
  out = Complex(re, im);
  return true;
}

}  // namespace

GateMatrix load_umat(const std::string& path, double unitary_tol) {
  std::ifstream f(path);
  if (!f) throw BuildError("cannot read umat file: " + path);
  std::string word;
  if (!(f >> word) || lower(word) != "dim") {
    throw BuildError("umat file must start with a dim line: " + path);
  }
  long long dim = 0;
  if (!(f >> word) || !parse_ll(word, dim) || dim < 2 ||
      (dim & (dim - 1)) != 0) {
    throw BuildError("umat dimension must be a power of two >= 2: " + path);
  }
  int k = 0;
  while ((1LL << k) < dim) ++k;
  if (k > max_qubits()) {
    throw BuildError("umat dimension exceeds the dense-representation cap: " +
                     path);
  }
  Matrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      if (!(f >> word)) {
        throw BuildError("umat file ends early at row " + std::to_string(r) +
                         ": " + path);
      }
      Complex e;
      if (!parse_umat_entry(word, e)) {
        throw BuildError("malformed umat entry '" + word + "': " + path);
      }
      m(r, c) = e;
    }
  }
  if (f >> word) {
    throw BuildError("trailing content after the umat matrix: " + path);
  }
  return GateMatrix(k, std::move(m), /*unitary=*/true, unitary_tol);
}

std::string serialize_umat(const GateMatrix& gate) {
  std::string out = "dim " + std::to_string(gate.dim()) + "\n";
  for (Eigen::Index r = 0; r < gate.dim(); ++r) {
    for (Eigen::Index c = 0; c < gate.dim(); ++c) {
      if (c) out += " ";
      const Complex e = gate.entries()(r, c);
      out += fmt_num(e.real());
      if (!std::signbit(e.imag())) out += "+";
      out += fmt_num(e.imag()) + "i";
    }
    out += "\n";
  }
  return out;
}

}  // namespace avq::dsl
