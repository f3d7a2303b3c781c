#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "jobshoplab/errors.hpp"
#include "jobshoplab/instance.hpp"

namespace jsl {

namespace {

struct Token {
  std::string_view text;
  int column;  // 1-based
};

struct Line {
  int number;
  std::vector<Token> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t' || raw[i] == '\r')) ++i;
      const std::size_t start = i;
      while (i < raw.size() && raw[i] != ' ' && raw[i] != '\t' && raw[i] != '\r') ++i;
      if (i > start) line.tokens.push_back({raw.substr(start, i - start), static_cast<int>(start) + 1});
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    pos = end + 1;
  }
  return lines;
}

template <class T>
T parse_number(const Token& tok, int line, const char* what) {
  T value{};
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(std::string("expected ") + what + ", got '" + std::string(tok.text) + "'", line, tok.column);
  return value;
}

Tick parse_tick(const Token& tok, int line) { return parse_number<Tick>(tok, line, "integer"); }
double parse_real(const Token& tok, int line) { return parse_number<double>(tok, line, "number"); }

std::optional<int> parse_capacity(const Token& tok, int line) {
  if (tok.text == "inf") return std::nullopt;
  return parse_number<int>(tok, line, "integer or 'inf'");
}

std::string fmt_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

class DslParser {
 public:
  explicit DslParser(std::string_view text) : lines_(tokenize(text)) {}

  Instance run() {
    for (const auto& line : lines_) statement(line);
    resolve_references();
    if (inst_.name.empty()) inst_.name = "instance";
    auto violations = validate_instance(inst_);
    if (!violations.empty()) throw InvalidInstance(std::move(violations));
    inst_.classification = classify(inst_);
    return std::move(inst_);
  }

 private:
  struct Ref {
    std::string id;
    int line;
    int column;
    enum class Kind { machine, location, resource, transport } kind;
  };

  void need(const Line& l, std::size_t count, const char* usage) {
    if (l.tokens.size() < count) {
      const auto& last = l.tokens.back();
      throw ParseError(std::string("expected: ") + usage, l.number,
                       last.column + static_cast<int>(last.text.size()));
    }
  }

  [[noreturn]] void unexpected(const Line& l, std::size_t i) {
    throw ParseError("unexpected token '" + std::string(l.tokens[i].text) + "'", l.number, l.tokens[i].column);
  }

  void claim(std::set<std::string>& ids, const Token& tok, int line) {
    if (!ids.insert(std::string(tok.text)).second) throw DuplicateIdError(std::string(tok.text), line, tok.column);
  }

  void statement(const Line& l) {
    const auto kw = l.tokens[0].text;
    if (kw == "instance") {
      need(l, 2, "instance <name>");
      if (l.tokens.size() > 2) unexpected(l, 2);
      inst_.name = std::string(l.tokens[1].text);
    } else if (kw == "job") {
      job(l);
    } else if (kw == "op") {
      need(l, 3, "op <machine-id> <duration>");
      if (l.tokens.size() > 3) unexpected(l, 3);
      if (inst_.jobs.empty()) throw ParseError("'op' before any 'job'", l.number, l.tokens[0].column);
      OperationSpec op{std::string(l.tokens[1].text), parse_tick(l.tokens[2], l.number)};
      refs_.push_back({op.machine, l.number, l.tokens[1].column, Ref::Kind::machine});
      inst_.jobs.back().ops.push_back(std::move(op));
    } else if (kw == "machine") {
      machine(l);
    } else if (kw == "transport") {
      transport(l);
    } else if (kw == "travel") {
      need(l, 4, "travel <from> <to> <duration>");
      if (l.tokens.size() > 4) unexpected(l, 4);
      TravelEntry e{std::string(l.tokens[1].text), std::string(l.tokens[2].text), parse_tick(l.tokens[3], l.number)};
      refs_.push_back({e.from, l.number, l.tokens[1].column, Ref::Kind::location});
      refs_.push_back({e.to, l.number, l.tokens[2].column, Ref::Kind::location});
      inst_.travel.entries.push_back(std::move(e));
    } else if (kw == "setup") {
      need(l, 5, "setup <machine-id> <from-type|NEUTRAL> <to-type> <duration>");
      if (l.tokens.size() > 5) unexpected(l, 5);
      SetupRule r{std::string(l.tokens[1].text), std::string(l.tokens[2].text), std::string(l.tokens[3].text),
                  parse_tick(l.tokens[4], l.number)};
      refs_.push_back({r.machine, l.number, l.tokens[1].column, Ref::Kind::machine});
      inst_.setups.push_back(std::move(r));
    } else if (kw == "outage") {
      outage(l);
    } else if (kw == "stochastic") {
      stochastic(l);
    } else {
      throw ParseError("unknown keyword '" + std::string(kw) + "'", l.number, l.tokens[0].column);
    }
  }

  void job(const Line& l) {
    need(l, 2, "job <id> [type <t>] [due <int>] [weight <real>]");
    claim(job_ids_, l.tokens[1], l.number);
    JobSpec j;
    j.id = std::string(l.tokens[1].text);
    j.job_type = j.id;
    for (std::size_t i = 2; i < l.tokens.size(); i += 2) {
      const auto key = l.tokens[i].text;
      if (i + 1 >= l.tokens.size()) throw ParseError("missing value for '" + std::string(key) + "'", l.number, l.tokens[i].column);
      const auto& val = l.tokens[i + 1];
      if (key == "type") j.job_type = std::string(val.text);
      else if (key == "due") j.due = parse_tick(val, l.number);
      else if (key == "weight") j.weight = parse_real(val, l.number);
      else unexpected(l, i);
    }
    inst_.jobs.push_back(std::move(j));
  }

  void machine(const Line& l) {
    need(l, 2, "machine <id> [pre <int|inf>] [post <int|inf>] [order fifo|any]");
    claim(resource_ids_, l.tokens[1], l.number);
    MachineSpec m;
    m.id = std::string(l.tokens[1].text);
    for (std::size_t i = 2; i < l.tokens.size(); i += 2) {
      const auto key = l.tokens[i].text;
      if (i + 1 >= l.tokens.size()) throw ParseError("missing value for '" + std::string(key) + "'", l.number, l.tokens[i].column);
      const auto& val = l.tokens[i + 1];
      if (key == "pre") m.pre_buffer_capacity = parse_capacity(val, l.number);
      else if (key == "post") m.post_buffer_capacity = parse_capacity(val, l.number);
      else if (key == "order") {
        if (val.text == "fifo") m.buffer_order = BufferOrder::fifo;
        else if (val.text == "any") m.buffer_order = BufferOrder::any;
        else throw ParseError("expected 'fifo' or 'any'", l.number, val.column);
      } else unexpected(l, i);
    }
    inst_.machines.push_back(std::move(m));
  }

  void transport(const Line& l) {
    need(l, 2, "transport <id> [capacity <int>] [load <int>] [unload <int>]");
    claim(resource_ids_, l.tokens[1], l.number);
    TransportSpec t;
    t.id = std::string(l.tokens[1].text);
    for (std::size_t i = 2; i < l.tokens.size(); i += 2) {
      const auto key = l.tokens[i].text;
      if (i + 1 >= l.tokens.size()) throw ParseError("missing value for '" + std::string(key) + "'", l.number, l.tokens[i].column);
      const auto& val = l.tokens[i + 1];
      if (key == "capacity") t.capacity = parse_number<int>(val, l.number, "integer");
      else if (key == "load") t.load_time = parse_tick(val, l.number);
      else if (key == "unload") t.unload_time = parse_tick(val, l.number);
      else unexpected(l, i);
    }
    inst_.transports.push_back(std::move(t));
  }

  void outage(const Line& l) {
    need(l, 6, "outage <resource-id> mtbf <int> mttr <int>");
    if (l.tokens.size() > 6) unexpected(l, 6);
    if (l.tokens[2].text != "mtbf") throw ParseError("expected 'mtbf'", l.number, l.tokens[2].column);
    if (l.tokens[4].text != "mttr") throw ParseError("expected 'mttr'", l.number, l.tokens[4].column);
    OutageSpec o{std::string(l.tokens[1].text), parse_tick(l.tokens[3], l.number), parse_tick(l.tokens[5], l.number)};
    refs_.push_back({o.resource, l.number, l.tokens[1].column, Ref::Kind::resource});
    inst_.outage_specs.push_back(std::move(o));
  }

  void stochastic(const Line& l) {
    need(l, 3, "stochastic <processing|transport> <distribution> [on <resource-id>]");
    StochasticSpec s;
    if (l.tokens[1].text == "processing") s.scope = StochasticScope::processing;
    else if (l.tokens[1].text == "transport") s.scope = StochasticScope::transport;
    else throw ParseError("expected 'processing' or 'transport'", l.number, l.tokens[1].column);
    std::size_t i = 2;
    const auto dist = l.tokens[i].text;
    if (dist == "deterministic") {
      s.distribution = Distribution::deterministic();
      i += 1;
    } else if (dist == "uniform" || dist == "gamma") {
      need(l, i + 3, "uniform <lo> <hi> | gamma <shape> <scale>");
      const double a = parse_real(l.tokens[i + 1], l.number);
      const double b = parse_real(l.tokens[i + 2], l.number);
      s.distribution = dist == "uniform" ? Distribution::uniform(a, b) : Distribution::gamma(a, b);
      i += 3;
    } else {
      throw ParseError("unknown distribution '" + std::string(dist) + "'", l.number, l.tokens[i].column);
    }
    if (i < l.tokens.size()) {
      if (l.tokens[i].text != "on") unexpected(l, i);
      need(l, i + 2, "on <resource-id>");
      s.applies_to = std::string(l.tokens[i + 1].text);
      refs_.push_back({*s.applies_to, l.number, l.tokens[i + 1].column,
                       s.scope == StochasticScope::processing ? Ref::Kind::machine : Ref::Kind::transport});
      if (i + 2 < l.tokens.size()) unexpected(l, i + 2);
    }
    inst_.stochastic_specs.push_back(std::move(s));
  }

  void resolve_references() const {
    for (const auto& r : refs_) {
      const bool machine = inst_.find_machine(r.id) != nullptr;
      const bool transport = inst_.find_transport(r.id) != nullptr;
      bool ok = false;
      switch (r.kind) {
        case Ref::Kind::machine: ok = machine; break;
        case Ref::Kind::transport: ok = transport; break;
        case Ref::Kind::resource: ok = machine || transport; break;
        case Ref::Kind::location: ok = machine || r.id == kSource || r.id == kSink; break;
      }
      if (!ok) throw ReferenceError(r.id, r.line, r.column);
    }
  }

  std::vector<Line> lines_;
  Instance inst_;
  std::vector<Ref> refs_;
  std::set<std::string> job_ids_;
  std::set<std::string> resource_ids_;
};

}  // namespace

Instance parse_instance_dsl(std::string_view text) { return DslParser(text).run(); }

std::string to_dsl(const Instance& inst) {
  std::ostringstream out;
  out << "instance " << inst.name << '\n';
  for (const auto& m : inst.machines) {
    out << "machine " << m.id;
    if (m.pre_buffer_capacity) out << " pre " << *m.pre_buffer_capacity;
    if (m.post_buffer_capacity) out << " post " << *m.post_buffer_capacity;
    if (m.buffer_order == BufferOrder::fifo) out << " order fifo";
    out << '\n';
  }
  for (const auto& t : inst.transports)
    out << "transport " << t.id << " capacity " << t.capacity << " load " << t.load_time << " unload "
        << t.unload_time << '\n';
  for (const auto& j : inst.jobs) {
    out << "job " << j.id;
    if (j.job_type != j.id) out << " type " << j.job_type;
    if (j.due) out << " due " << *j.due;
    if (j.weight != 1.0) out << " weight " << fmt_real(j.weight);
    out << '\n';
    for (const auto& op : j.ops) out << "  op " << op.machine << ' ' << op.duration << '\n';
  }
  for (const auto& e : inst.travel.entries) out << "travel " << e.from << ' ' << e.to << ' ' << e.duration << '\n';
  for (const auto& s : inst.setups)
    out << "setup " << s.machine << ' ' << s.from_type << ' ' << s.to_type << ' ' << s.duration << '\n';
  for (const auto& o : inst.outage_specs)
    out << "outage " << o.resource << " mtbf " << o.mean_time_between_failures << " mttr " << o.mean_time_to_repair
        << '\n';
  for (const auto& s : inst.stochastic_specs) {
    out << "stochastic " << (s.scope == StochasticScope::processing ? "processing" : "transport") << ' ';
    switch (s.distribution.kind) {
      case Distribution::Kind::deterministic: out << "deterministic"; break;
      case Distribution::Kind::uniform:
        out << "uniform " << fmt_real(s.distribution.a) << ' ' << fmt_real(s.distribution.b);
        break;
      case Distribution::Kind::gamma:
        out << "gamma " << fmt_real(s.distribution.a) << ' ' << fmt_real(s.distribution.b);
        break;
    }
    if (s.applies_to) out << " on " << *s.applies_to;
    out << '\n';
  }
  return out.str();
}

Instance parse_orlib(std::string_view text, std::string name) {
  const auto lines = tokenize(text);
  if (lines.empty()) throw ParseError("malformed header: empty file", 0, 0);
  const auto& header = lines.front();
  if (header.tokens.size() != 2) throw ParseError("malformed header: expected '<jobs> <machines>'", header.number, 1);
  const int n = parse_number<int>(header.tokens[0], header.number, "job count");
  const int m = parse_number<int>(header.tokens[1], header.number, "machine count");
  if (n <= 0 || m <= 0) throw ParseError("malformed header: counts must be positive", header.number, 1);
  if (static_cast<int>(lines.size()) - 1 < n)
    throw ParseError("expected " + std::to_string(n) + " job lines, found " + std::to_string(lines.size() - 1),
                     lines.back().number, 1);
  if (static_cast<int>(lines.size()) - 1 > n)
    throw ParseError("unexpected content after " + std::to_string(n) + " job lines", lines[n + 1].number, 1);

  Instance inst;
  inst.name = std::move(name);
  for (int k = 0; k < m; ++k) inst.machines.push_back({"m" + std::to_string(k), std::nullopt, std::nullopt, BufferOrder::any});
  for (int i = 0; i < n; ++i) {
    const auto& line = lines[i + 1];
    if (line.tokens.size() != static_cast<std::size_t>(2 * m))
      throw ParseError("expected " + std::to_string(m) + " pairs, got " + std::to_string(line.tokens.size()) +
                           " values",
                       line.number, 1);
    JobSpec job;
    job.id = "j" + std::to_string(i);
    job.job_type = job.id;
    for (int k = 0; k < m; ++k) {
      const auto& mt = line.tokens[2 * k];
      const auto& dt = line.tokens[2 * k + 1];
      const int machine = parse_number<int>(mt, line.number, "machine index");
      const Tick duration = parse_tick(dt, line.number);
      if (machine < 0 || machine >= m)
        throw ParseError("machine index " + std::to_string(machine) + " out of range", line.number, mt.column);
      if (duration < 0) throw ParseError("negative duration", line.number, dt.column);
      job.ops.push_back({inst.machines[machine].id, duration});
    }
    inst.jobs.push_back(std::move(job));
  }
  auto violations = validate_instance(inst);
  if (!violations.empty()) throw InvalidInstance(std::move(violations));
  inst.classification = classify(inst);
  return inst;
}

}  // namespace jsl
